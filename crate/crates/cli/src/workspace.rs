//! Everything loaded once at startup and shared read-only: corpus,
//! dictionaries, prompt knobs, and prototypes for per-session backends.

use std::collections::BTreeMap;

use thiserror::Error;

use peano_tutor::autoformalizer::{default_step_examples, FewShot, PromptContext};
use peano_tutor::dataset::{build_dictionaries, Corpus, DatasetError, Descriptions, Dictionaries};
use peano_tutor::lean_bridge::{BridgeError, Checker, FakeChecker, LeanRepl};
use peano_tutor::llm::{Knobs, LlmBackend, LlmError, RemoteBackend, ReplayBackend, ReplayStore};
use peano_tutor::next_step::{forbidden_theorems, world_premises, SearchConfig};
use peano_tutor::oracle::CorpusOracle;
use peano_tutor::proof_model::{AnnotatedProof, TheoremSpec};

use crate::config::{BackendKind, CheckerKind, Config, ConfigError};

pub type BoxedLlm = Box<dyn LlmBackend + Send>;
pub type BoxedChecker = Box<dyn Checker + Send>;

#[derive(Debug, Error)]
pub enum SetupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Checker(#[from] BridgeError),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

pub struct Workspace {
    pub config: Config,
    pub corpus: Corpus,
    pub dicts: Dictionaries,
    pub knobs: Knobs,
    pub examples: Vec<FewShot>,
    fixtures: Option<FakeChecker>,
    oracle: Option<CorpusOracle>,
}

impl Workspace {
    pub fn load(config: Config) -> Result<Self, SetupError> {
        config.validate()?;
        let corpus = Corpus::load(&config.manifest_path())?;
        let descriptions = Descriptions::load(&config.descriptions_path())?;
        let proofs: Vec<AnnotatedProof> = corpus.proofs().cloned().collect();
        let dicts = build_dictionaries(&proofs, &descriptions);
        for m in &dicts.missing {
            log::warn!("no description for {} {}", m.kind, m.name);
        }
        let fixtures = match config.checker {
            CheckerKind::Fixtures => Some(FakeChecker::load(&config.checker_fixtures)?),
            CheckerKind::Repl => None,
        };
        let oracle = (config.backend == BackendKind::Mock).then(|| CorpusOracle::new(&corpus));
        if config.backend == BackendKind::Replay && !config.replay_dir.is_dir() {
            return Err(LlmError::Config(format!(
                "replay directory {} not found",
                config.replay_dir.display()
            ))
            .into());
        }
        Ok(Workspace {
            knobs: config.knobs(),
            config,
            corpus,
            dicts,
            examples: default_step_examples(),
            fixtures,
            oracle,
        })
    }

    /// A fresh model handle; each session owns one.
    pub fn llm(&self) -> Result<BoxedLlm, LlmError> {
        Ok(match self.config.backend {
            BackendKind::Mock => {
                Box::new(self.oracle.clone().expect("oracle built for mock backend"))
            }
            BackendKind::Replay => Box::new(ReplayBackend::new(ReplayStore::open(
                &self.config.replay_dir,
            ))),
            BackendKind::Remote => Box::new(RemoteBackend::new(self.config.remote.clone())?),
        })
    }

    /// A fresh checker session; each tutoring session owns one.
    pub fn checker(&self) -> Result<BoxedChecker, BridgeError> {
        Ok(match self.config.checker {
            CheckerKind::Fixtures => Box::new(self.fixtures.clone().expect("fixtures loaded")),
            CheckerKind::Repl => {
                let mut repl = self.config.repl.clone();
                repl.project_root = self.config.lean_project_root.clone();
                Box::new(LeanRepl::start(&repl)?)
            }
        })
    }

    pub fn theorem(&self, name: &str) -> Option<TheoremSpec> {
        self.corpus.theorem(name)
    }

    pub fn staff_solution(&self, theorem: &str) -> Option<&AnnotatedProof> {
        self.corpus.staff_solution(theorem)
    }

    pub fn staff_map(&self) -> BTreeMap<String, AnnotatedProof> {
        self.corpus
            .theorems()
            .iter()
            .filter_map(|t| {
                self.staff_solution(&t.name)
                    .map(|p| (t.name.clone(), p.clone()))
            })
            .collect()
    }

    pub fn prompt_context<'a>(&'a self, theorem: &TheoremSpec) -> PromptContext<'a> {
        PromptContext {
            theorem_dict: &self.dicts.theorems,
            tactic_dict: &self.dicts.tactics,
            examples: &self.examples,
            staff_solution: if self.config.staff_solution {
                self.staff_solution(&theorem.name)
            } else {
                None
            },
            knobs: &self.knobs,
        }
    }

    /// The configured search settings plus the theorem's forbidden
    /// theorems and its world's premises.
    pub fn search_config(&self, theorem: &TheoremSpec) -> SearchConfig {
        let mut c = self.config.search.clone();
        c.forbidden
            .extend(forbidden_theorems(theorem, &self.corpus.theorems()));
        for p in world_premises(self.corpus.proofs(), &theorem.world) {
            if !c.world_premises.contains(&p) {
                c.world_premises.push(p);
            }
        }
        c.knobs = self.knobs.clone();
        c
    }
}
