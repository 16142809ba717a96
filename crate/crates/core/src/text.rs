//! Tokenization shared by working-memory retrieval, search-term derivation
//! and the perturbation inequality check.

use std::collections::BTreeSet;

/// Lowercased alphanumeric tokens in order of appearance.
pub fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

pub fn token_set(text: &str) -> BTreeSet<String> {
    tokens(text).into_iter().collect()
}

/// Jaccard similarity of two token sets; two empty sets score 0.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    inter as f64 / union as f64
}

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "are", "as", "at", "be", "been", "but",
    "by", "claim", "claims", "did", "do", "does", "for", "from", "had", "has", "have", "he",
    "her", "his", "in", "is", "it", "its", "last", "more", "new", "not", "of", "on", "or",
    "our", "over", "said", "says", "she", "shows", "so", "than", "that", "the", "their",
    "them", "there", "these", "they", "this", "those", "to", "up", "was", "we", "were", "what",
    "when", "which", "who", "will", "with", "would", "you",
];

/// Content keywords of `text`: tokens minus stopwords, deduplicated, in
/// order of first appearance.
pub fn keywords(text: &str) -> Vec<String> {
    let mut seen = BTreeSet::new();
    tokens(text)
        .into_iter()
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .filter(|t| seen.insert(t.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_and_strips_punctuation() {
        assert_eq!(tokens("Hello, World! 23,196"), vec!["hello", "world", "23", "196"]);
    }

    #[test]
    fn jaccard_basics() {
        let a = token_set("a b c");
        assert_eq!(jaccard(&a, &a), 1.0);
        assert_eq!(jaccard(&a, &token_set("d e")), 0.0);
        assert_eq!(jaccard(&token_set(""), &token_set("")), 0.0);
        assert_eq!(jaccard(&a, &token_set("c d")), 0.25);
    }

    #[test]
    fn keywords_drop_stopwords() {
        assert_eq!(
            keywords("The survival rate of the vaccine is 99%"),
            vec!["survival", "rate", "vaccine", "99"]
        );
    }
}
