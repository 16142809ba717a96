use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;

use super::CliError;
use crate::credibility::{self, ReliabilityDataset};
use crate::eval::{DatasetFormat, FixtureRewriter, LlmRewriter, Rewriter, DEFAULT_SEED};
use crate::llm::{LlmGateway, LlmSource, OpenAiCompatible, ScriptBook};
use crate::model::Tool;
use crate::orchestrator::{AgentConfig, Toolbox};
use crate::search::{FixtureProvider, HttpSearchProvider, RecordingProvider, SearchProvider};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlmProvider {
    Http,
    #[default]
    Scripted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchProviderKind {
    Http,
    #[default]
    Fixture,
    Recording,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSection {
    pub provider: LlmProvider,
    pub script: Option<PathBuf>,
    pub base_url: String,
    pub model: String,
    pub timeout_secs: u64,
}

impl Default for LlmSection {
    fn default() -> Self {
        LlmSection {
            provider: LlmProvider::Scripted,
            script: None,
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            timeout_secs: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub provider: SearchProviderKind,
    /// Fixture file read by `fixture` and written by `recording`.
    pub fixture: Option<PathBuf>,
    pub endpoint: String,
    pub timeout_secs: u64,
}

impl Default for SearchSection {
    fn default() -> Self {
        SearchSection {
            provider: SearchProviderKind::Fixture,
            fixture: None,
            endpoint: String::new(),
            timeout_secs: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewriterKind {
    #[default]
    Fixture,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewriterSection {
    pub kind: RewriterKind,
    pub fixture: Option<PathBuf>,
}

/// Everything a command needs, read from a TOML file and then overridden
/// by command-line flags. Relative paths resolve against the file's
/// directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub limit: Option<usize>,
    pub jobs: usize,
    pub frozen_clock: bool,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub reliability_dataset: Option<PathBuf>,
    pub llm: LlmSection,
    pub search: SearchSection,
    pub agent: AgentConfig,
    pub dataset: DatasetSection,
    pub rewriter: RewriterSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            limit: None,
            jobs: 1,
            frozen_clock: false,
            out: None,
            trace: None,
            reliability_dataset: None,
            llm: LlmSection::default(),
            search: SearchSection::default(),
            agent: AgentConfig::default(),
            dataset: DatasetSection::default(),
            rewriter: RewriterSection::default(),
        }
    }
}

pub type Recorder = Arc<RecordingProvider<HttpSearchProvider>>;

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<RunConfig, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for p in [
            &mut cfg.out,
            &mut cfg.trace,
            &mut cfg.reliability_dataset,
            &mut cfg.llm.script,
            &mut cfg.search.fixture,
            &mut cfg.dataset.path,
            &mut cfg.rewriter.fixture,
        ] {
            rebase(base_dir, p);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::from_toml(&text, base)
    }

    pub fn disable_tools(&mut self, tools: &[Tool]) {
        for t in tools {
            self.agent.enabled_tools.remove(t);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.agent.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.agent.enables(Tool::CredibilityAssessment) && self.reliability_dataset.is_none() {
            return Err(CliError::Config(
                "credibility_assessment is enabled but no reliability_dataset path is set".into(),
            ));
        }
        if self.llm.provider == LlmProvider::Scripted && self.llm.script.is_none() {
            return Err(CliError::Config("the scripted LLM provider needs llm.script".into()));
        }
        if self.agent.enables(Tool::WebSearch) {
            match self.search.provider {
                SearchProviderKind::Fixture if self.search.fixture.is_none() => {
                    return Err(CliError::Config("the fixture search provider needs search.fixture".into()))
                }
                SearchProviderKind::Recording if self.search.fixture.is_none() => {
                    return Err(CliError::Config(
                        "the recording search provider needs search.fixture to write to".into(),
                    ))
                }
                SearchProviderKind::Http | SearchProviderKind::Recording if self.search.endpoint.is_empty() => {
                    return Err(CliError::Config("the http search provider needs search.endpoint".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn llm_source(&self) -> Result<LlmSource, CliError> {
        match self.llm.provider {
            LlmProvider::Scripted => {
                let path = self.llm.script.as_ref().ok_or_else(|| {
                    CliError::Config("the scripted LLM provider needs llm.script".into())
                })?;
                let book = ScriptBook::from_file(path).map_err(|e| CliError::Config(e.to_string()))?;
                Ok(LlmSource::Scripted(Arc::new(book)))
            }
            LlmProvider::Http => {
                let backend = OpenAiCompatible::from_env(
                    &self.llm.base_url,
                    &self.llm.model,
                    Duration::from_secs(self.llm.timeout_secs),
                )
                .map_err(CliError::Config)?;
                Ok(LlmSource::Shared(LlmGateway::new(Arc::new(backend))))
            }
        }
    }

    pub fn reliability(&self) -> Result<Arc<ReliabilityDataset>, CliError> {
        match &self.reliability_dataset {
            Some(p) => credibility::load_dataset(p)
                .map(Arc::new)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
            None => Ok(Arc::new(
                ReliabilityDataset::from_pairs("none", std::iter::empty())
                    .expect("empty dataset is valid"),
            )),
        }
    }

    fn http_search(&self) -> Result<HttpSearchProvider, CliError> {
        HttpSearchProvider::from_env(&self.search.endpoint, Duration::from_secs(self.search.timeout_secs))
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Builds the toolbox. A recording provider is also returned so the
    /// caller can save what it captured.
    pub fn toolbox(&self) -> Result<(Toolbox, Option<Recorder>), CliError> {
        let reliability = self.reliability()?;
        let mut recorder = None;
        let search: Arc<dyn SearchProvider> = if !self.agent.enables(Tool::WebSearch) {
            Arc::new(FixtureProvider::new(Default::default()).expect("empty fixtures are valid"))
        } else {
            match self.search.provider {
                SearchProviderKind::Fixture => {
                    let p = self.search.fixture.as_ref().expect("validated");
                    Arc::new(FixtureProvider::from_file(p).map_err(|e| CliError::Config(e.to_string()))?)
                }
                SearchProviderKind::Http => Arc::new(self.http_search()?),
                SearchProviderKind::Recording => {
                    let rec = Arc::new(RecordingProvider::new(self.http_search()?));
                    recorder = Some(rec.clone());
                    rec
                }
            }
        };
        Ok((Toolbox { search, reliability }, recorder))
    }

    pub fn dataset_format(&self, flag: Option<&str>) -> Result<DatasetFormat, CliError> {
        let raw = flag.or(self.dataset.format.as_deref()).unwrap_or("generic_jsonl");
        raw.parse().map_err(|e: crate::eval::EvalError| CliError::Config(e.to_string()))
    }

    pub fn rewriter(&self, kind: Option<RewriterKind>, fixture: Option<PathBuf>) -> Result<Box<dyn Rewriter>, CliError> {
        match kind.unwrap_or(self.rewriter.kind) {
            RewriterKind::Fixture => {
                let path = fixture.or_else(|| self.rewriter.fixture.clone()).ok_or_else(|| {
                    CliError::Config("the fixture rewriter needs a rewrites file".into())
                })?;
                Ok(Box::new(
                    FixtureRewriter::from_file(&path).map_err(|e| CliError::Config(e.to_string()))?,
                ))
            }
            RewriterKind::Llm => Ok(Box::new(LlmRewriter {
                source: self.llm_source()?,
            })),
        }
    }
}
