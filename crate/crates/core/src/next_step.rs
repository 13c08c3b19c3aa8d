//! Depth-first search for a tactic sequence that completes a partial proof.
//!
//! Children of a node are model-proposed tactics, explored in the model's
//! rank order and compiled lazily. A child is pruned when its tactic names
//! a forbidden theorem or when its normalized state already occurs on the
//! path from the root.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autoformalizer::sanitize_tactic;
use crate::dataset::used_names;
use crate::lean_bridge::{BridgeError, CheckRequest, CheckStatus, Checker};
use crate::llm::{Knobs, LlmBackend, LlmError, PromptBundle};
use crate::proof_model::{AnnotatedProof, ProofState, TheoremSpec};
use crate::state_match::{lexer::identifiers, state_key};
use crate::template::{render, TemplateError};

pub const DEFAULT_BRANCHING: usize = 12;
pub const DEFAULT_MAX_DEPTH: usize = 8;

const PROPOSE_SYSTEM: &str = "You are an expert in the Lean4 theorem prover and the Natural Number Game. You suggest the next tactic in an unfinished tactic proof.";

const PROPOSE_USER: &str = "\
This is an unfinished Lean4 proof:
{partial_proof}

These are the tactics and theorems used in this world:
{premises}

Generate {branching} candidate next tactics, ranked from most to least likely to be a correct next step.
Write exactly one Lean tactic per line, with no numbering, comments, or markdown.";

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("candidate proposal failed: {0}")]
    Backend(#[from] LlmError),
    #[error("checker failed: {0}")]
    Checker(#[from] BridgeError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("the partial proof does not compile: {0}")]
    InvalidRoot(String),
    #[error("completion failed its final re-check")]
    RecheckFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub branching: usize,
    pub max_depth: usize,
    pub forbidden: BTreeSet<String>,
    pub world_premises: Vec<String>,
    pub knobs: Knobs,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            branching: DEFAULT_BRANCHING,
            max_depth: DEFAULT_MAX_DEPTH,
            forbidden: BTreeSet::new(),
            world_premises: Vec::new(),
            knobs: Knobs::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.branching == 0 || self.max_depth == 0 {
            return Err(SearchError::Config(
                "branching and max_depth must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// The theorem itself and every theorem introduced after it.
pub fn forbidden_theorems(theorem: &TheoremSpec, corpus: &[TheoremSpec]) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = corpus
        .iter()
        .filter(|t| t.order_index > theorem.order_index)
        .map(|t| t.name.clone())
        .collect();
    out.insert(theorem.name.clone());
    out
}

/// Tactic and theorem names used by any proof in `world`, sorted.
pub fn world_premises<'a, I>(proofs: I, world: &str) -> Vec<String>
where
    I: IntoIterator<Item = &'a AnnotatedProof>,
{
    let mut names = BTreeSet::new();
    for p in proofs.into_iter().filter(|p| p.theorem.world == world) {
        let used = used_names(p);
        names.extend(used.tactics);
        names.extend(used.theorems);
    }
    names.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchNode {
    /// Tactics after the search root.
    pub tactics_so_far: Vec<String>,
    pub state: ProofState,
    pub depth: usize,
}

pub fn build_propose_prompt(
    theorem: &TheoremSpec,
    tactics: &[String],
    config: &SearchConfig,
) -> Result<PromptBundle, SearchError> {
    let mut partial = theorem.statement_fl.trim_end().to_string();
    for t in tactics {
        partial.push_str("\n  ");
        partial.push_str(t);
    }
    let premises = if config.world_premises.is_empty() {
        "(none)".to_string()
    } else {
        config.world_premises.join(", ")
    };
    let values = [
        ("partial_proof", partial),
        ("premises", premises),
        ("branching", config.branching.to_string()),
    ]
    .into_iter()
    .collect();
    Ok(PromptBundle::new(
        PROPOSE_SYSTEM,
        render(PROPOSE_USER, &values)?,
        config.knobs.clone(),
    ))
}

fn strip_rank_marker(line: &str) -> &str {
    let t = line.trim();
    let digits = t.len() - t.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    let rest = &t[digits..];
    if digits > 0 && (rest.starts_with(". ") || rest.starts_with(") ")) {
        return rest[2..].trim_start();
    }
    t.strip_prefix("- ")
        .or_else(|| t.strip_prefix("* "))
        .unwrap_or(t)
}

/// Parses a ranked candidate list: one tactic per line, malformed lines
/// dropped, duplicates keep their first rank, at most `branching` kept.
pub fn parse_candidates(raw: &str, branching: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for line in raw.lines() {
        if line.trim_start().starts_with("```") {
            continue;
        }
        let Ok(t) = sanitize_tactic(strip_rank_marker(line)) else {
            continue;
        };
        if !out.contains(&t) {
            out.push(t);
        }
        if out.len() == branching {
            break;
        }
    }
    out
}

/// Root tactics are the student's valid prefix; `node` extends them.
pub fn propose_candidates<L: LlmBackend + ?Sized>(
    root: &[String],
    node: &SearchNode,
    theorem: &TheoremSpec,
    config: &SearchConfig,
    llm: &mut L,
) -> Result<Vec<String>, SearchError> {
    let mut all = root.to_vec();
    all.extend(node.tactics_so_far.iter().cloned());
    let prompt = build_propose_prompt(theorem, &all, config)?;
    let raw = llm.complete(&prompt)?;
    Ok(parse_candidates(&raw, config.branching))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Progress {
    Novel,
    Forbidden(String),
    Cyclic,
}

/// First forbidden name used in `tactic`, as a whole identifier or as
/// the last component of a qualified one (`MyNat.add_comm`).
pub fn forbidden_use<'a>(tactic: &str, forbidden: &'a BTreeSet<String>) -> Option<&'a str> {
    identifiers(tactic).find_map(|id| {
        let last = id.rsplit('.').next().unwrap_or(id);
        forbidden
            .get(id)
            .or_else(|| forbidden.get(last))
            .map(String::as_str)
    })
}

pub fn progress_check(
    candidate: &str,
    child: &ProofState,
    visited: &BTreeSet<String>,
    config: &SearchConfig,
) -> Progress {
    if let Some(name) = forbidden_use(candidate, &config.forbidden) {
        return Progress::Forbidden(name.to_string());
    }
    if visited.contains(&state_key(child)) {
        return Progress::Cyclic;
    }
    Progress::Novel
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchVerdict {
    CompileFail,
    Forbidden,
    Cyclic,
    Expanded,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLogEntry {
    /// Depth of the child the tactic would create.
    pub depth: usize,
    pub tactic: String,
    pub verdict: SearchVerdict,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub proposals: usize,
    pub compiled: usize,
    pub expanded: usize,
    pub pruned_forbidden: usize,
    pub pruned_cyclic: usize,
    pub compile_failures: usize,
    pub distinct_states: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Tactics to append after the root, or `None` if no completion was found.
    pub completion: Option<Vec<String>>,
    pub log: Vec<SearchLogEntry>,
    pub stats: SearchStats,
}

impl SearchOutcome {
    pub fn next_step(&self) -> Option<&str> {
        self.completion.as_ref()?.first().map(String::as_str)
    }

    /// One JSON object per log entry.
    pub fn log_jsonl(&self) -> String {
        self.log
            .iter()
            .map(|e| serde_json::to_string(e).expect("log entries serialize") + "\n")
            .collect()
    }
}

struct Dfs<'a, L: ?Sized, C: ?Sized> {
    root: &'a [String],
    theorem: &'a TheoremSpec,
    config: &'a SearchConfig,
    llm: &'a mut L,
    checker: &'a mut C,
    log: Vec<SearchLogEntry>,
    stats: SearchStats,
    seen: BTreeSet<String>,
}

impl<L: LlmBackend + ?Sized, C: Checker + ?Sized> Dfs<'_, L, C> {
    fn check(&mut self, tail: &[String]) -> Result<crate::lean_bridge::CheckResult, SearchError> {
        let mut tactics = self.root.to_vec();
        tactics.extend(tail.iter().cloned());
        let req = CheckRequest::new(self.theorem.statement_fl.clone(), tactics);
        Ok(self.checker.check(&req)?)
    }

    fn record(&mut self, depth: usize, tactic: &str, verdict: SearchVerdict) {
        log::debug!("depth {depth} {tactic:?}: {verdict:?}");
        self.log.push(SearchLogEntry {
            depth,
            tactic: tactic.to_string(),
            verdict,
        });
    }

    /// `path` holds the state keys from the root to `node`, inclusive.
    fn expand(
        &mut self,
        node: &SearchNode,
        path: &mut BTreeSet<String>,
    ) -> Result<Option<Vec<String>>, SearchError> {
        if node.depth >= self.config.max_depth {
            return Ok(None);
        }
        let candidates = propose_candidates(self.root, node, self.theorem, self.config, self.llm)?;
        self.stats.proposals += 1;
        let depth = node.depth + 1;
        for cand in candidates {
            if forbidden_use(&cand, &self.config.forbidden).is_some() {
                self.stats.pruned_forbidden += 1;
                self.record(depth, &cand, SearchVerdict::Forbidden);
                continue;
            }
            let mut tail = node.tactics_so_far.clone();
            tail.push(cand.clone());
            let result = self.check(&tail)?;
            self.stats.compiled += 1;
            match result.status {
                CheckStatus::Error => {
                    self.stats.compile_failures += 1;
                    self.record(depth, &cand, SearchVerdict::CompileFail);
                }
                CheckStatus::Complete => {
                    self.record(depth, &cand, SearchVerdict::Complete);
                    return Ok(Some(tail));
                }
                CheckStatus::Incomplete => {
                    let state = result.state().unwrap_or_else(ProofState::completed);
                    if progress_check(&cand, &state, path, self.config) == Progress::Cyclic {
                        self.stats.pruned_cyclic += 1;
                        self.record(depth, &cand, SearchVerdict::Cyclic);
                        continue;
                    }
                    let key = state_key(&state);
                    self.seen.insert(key.clone());
                    self.stats.expanded += 1;
                    self.record(depth, &cand, SearchVerdict::Expanded);
                    path.insert(key.clone());
                    let child = SearchNode {
                        tactics_so_far: tail,
                        state,
                        depth,
                    };
                    let found = self.expand(&child, path)?;
                    path.remove(&key);
                    if found.is_some() {
                        return Ok(found);
                    }
                }
            }
        }
        Ok(None)
    }
}

/// Searches for tactics that complete `root_tactics` (the student's proof
/// with the erroring step removed). A returned completion has been
/// re-checked from scratch.
pub fn search<L, C>(
    root_tactics: &[String],
    theorem: &TheoremSpec,
    config: &SearchConfig,
    llm: &mut L,
    checker: &mut C,
) -> Result<SearchOutcome, SearchError>
where
    L: LlmBackend + ?Sized,
    C: Checker + ?Sized,
{
    config.validate()?;
    let mut dfs = Dfs {
        root: root_tactics,
        theorem,
        config,
        llm,
        checker,
        log: Vec::new(),
        stats: SearchStats::default(),
        seen: BTreeSet::new(),
    };
    let root = dfs.check(&[])?;
    let completion = match root.status {
        CheckStatus::Error => {
            return Err(SearchError::InvalidRoot(root.message.unwrap_or_default()));
        }
        CheckStatus::Complete => Some(Vec::new()),
        CheckStatus::Incomplete => {
            let state = root.state().unwrap_or_else(ProofState::completed);
            let key = state_key(&state);
            dfs.seen.insert(key.clone());
            let mut path = BTreeSet::from([key]);
            let node = SearchNode {
                tactics_so_far: Vec::new(),
                state,
                depth: 0,
            };
            dfs.expand(&node, &mut path)?
        }
    };
    if let Some(tail) = &completion {
        if dfs.check(tail)?.status != CheckStatus::Complete {
            return Err(SearchError::RecheckFailed);
        }
    }
    let mut stats = dfs.stats;
    stats.distinct_states = dfs.seen.len();
    Ok(SearchOutcome {
        completion,
        log: dfs.log,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(name: &str, idx: u32) -> TheoremSpec {
        TheoremSpec::new(name, "", format!("theorem {name} : 0 = 0 := by"), "W", idx).unwrap()
    }

    #[test]
    fn forbidden_set_by_order() {
        let corpus: Vec<_> = (0..5).map(|i| spec(&format!("t{i}"), i)).collect();
        let f = forbidden_theorems(&corpus[2], &corpus);
        assert_eq!(
            f,
            ["t2", "t3", "t4"].iter().map(|s| s.to_string()).collect()
        );
        assert_eq!(forbidden_theorems(&corpus[4], &corpus).len(), 1);
        assert_eq!(forbidden_theorems(&corpus[0], &corpus).len(), 5);
    }

    #[test]
    fn candidate_parsing() {
        let raw = "1. rw [add_zero]\n2) rfl\n- rw [add_zero]\n```\n\nintro h, rfl\n* simp";
        assert_eq!(
            parse_candidates(raw, 12),
            vec!["rw [add_zero]", "rfl", "simp"]
        );
        assert_eq!(parse_candidates(raw, 1), vec!["rw [add_zero]"]);
        assert!(parse_candidates("```\n```", 12).is_empty());
    }

    #[test]
    fn whole_identifier_forbidden() {
        let f: BTreeSet<String> = ["add_comm".to_string()].into();
        assert_eq!(forbidden_use("rw [add_comm a]", &f), Some("add_comm"));
        assert_eq!(forbidden_use("rw [add_comm' a]", &f), None);
        assert_eq!(forbidden_use("rw [MyNat.add_comm]", &f), Some("add_comm"));
        assert_eq!(forbidden_use("rw [add_comm_left]", &f), None);
    }

    #[test]
    fn zero_bounds_rejected() {
        let c = SearchConfig {
            branching: 0,
            ..SearchConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
