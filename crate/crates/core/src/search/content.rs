use std::sync::OnceLock;

use regex::Regex;

use super::{SearchError, SearchResult};

pub const DEFAULT_CONTENT_CAP: usize = 4000;

fn block_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?is)<!--.*?-->|<(script|style|noscript)\b[^>]*>.*?</(script|style|noscript)\s*>")
            .expect("valid regex")
    })
}

fn tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<[^<>]*>").expect("valid regex"))
}

/// Removes tags until none remain, so nested fragments like `<a <b>>`
/// cannot leave a tag behind.
fn strip_tags(html: &str) -> String {
    let mut text = block_re().replace_all(html, " ").into_owned();
    loop {
        let next = tag_re().replace_all(&text, " ").into_owned();
        if next == text {
            return text;
        }
        text = next;
    }
}

fn truncate_at_word(text: &str, cap: usize) -> String {
    if text.chars().count() <= cap {
        return text.to_string();
    }
    let head: String = text.chars().take(cap + 1).collect();
    // a space at index `cap` means the first `cap` chars end on a word
    match head.rfind(' ') {
        Some(i) if i > 0 => head[..i].trim_end().to_string(),
        _ => head.chars().take(cap).collect(),
    }
}

/// Core text of a result: entities decoded, markup stripped, whitespace
/// collapsed, and cut to at most `cap` characters at a word boundary.
/// Falls back to the snippet when there is no raw content.
pub fn extract_content(result: &SearchResult, cap: usize) -> Result<String, SearchError> {
    let source = match result.raw_content.as_deref() {
        Some(raw) if !raw.trim().is_empty() => raw,
        _ if !result.snippet.trim().is_empty() => &result.snippet,
        _ => return Err(SearchError::EmptyContent),
    };
    let decoded = html_escape::decode_html_entities(source);
    let stripped = strip_tags(&decoded);
    let collapsed = stripped.split_whitespace().collect::<Vec<_>>().join(" ");
    Ok(truncate_at_word(&collapsed, cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(content: Option<&str>, snippet: &str) -> SearchResult {
        SearchResult {
            url: "https://example.com".into(),
            title: String::new(),
            snippet: snippet.into(),
            published: None,
            raw_content: content.map(str::to_string),
        }
    }

    #[test]
    fn strips_and_collapses() {
        let r = raw(Some("<p>Hello  world</p>"), "");
        assert_eq!(extract_content(&r, DEFAULT_CONTENT_CAP).unwrap(), "Hello world");
    }

    #[test]
    fn drops_scripts_and_decodes_entities() {
        let r = raw(
            Some("<html><script>var x = '<b>';</script><p>Fish &amp; chips</p><!-- hidden --></html>"),
            "",
        );
        assert_eq!(extract_content(&r, 100).unwrap(), "Fish & chips");
    }

    #[test]
    fn snippet_fallback() {
        assert_eq!(extract_content(&raw(None, "summary text"), 4000).unwrap(), "summary text");
        assert!(matches!(extract_content(&raw(None, " "), 4000), Err(SearchError::EmptyContent)));
    }

    #[test]
    fn truncates_at_word_boundary() {
        let long = "lorem ipsum ".repeat(1000);
        let out = extract_content(&raw(Some(&long), ""), 4000).unwrap();
        assert!(out.chars().count() <= 4000);
        assert!(long.starts_with(&out));
        assert!(out.ends_with("lorem") || out.ends_with("ipsum"));
    }

    #[test]
    fn exact_fit_kept_whole() {
        assert_eq!(truncate_at_word("abc def", 7), "abc def");
        assert_eq!(truncate_at_word("abc def", 6), "abc");
        assert_eq!(truncate_at_word("abcdefgh", 4), "abcd");
    }

    fn html_fragment() -> impl Strategy<Value = String> {
        let piece = prop_oneof![
            "[a-zA-Z ]{0,12}",
            Just("<p>".to_string()),
            Just("</p>".to_string()),
            Just("<div class=\"x\">".to_string()),
            Just("<br/>".to_string()),
            Just("<script>if (a < b) {}</script>".to_string()),
            Just("&lt;b&gt;".to_string()),
            Just("<".to_string()),
            Just(">".to_string()),
            Just("<!-- c -->".to_string()),
            Just("\n\t".to_string()),
        ];
        proptest::collection::vec(piece, 0..40).prop_map(|v| v.concat())
    }

    proptest! {
        #[test]
        fn never_exceeds_cap_or_leaves_tags(html in html_fragment(), cap in 1usize..200) {
            let r = raw(Some(&html), "fallback");
            let out = extract_content(&r, cap).unwrap();
            prop_assert!(out.chars().count() <= cap);
            prop_assert!(!tag_re().is_match(&out), "tag left in {:?}", out);
            prop_assert!(!out.contains("  "));
        }
    }
}
