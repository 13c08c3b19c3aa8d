//! A deterministic stand-in for the language model that answers from an
//! annotated corpus. It reads the same prompts a real model would get, so it
//! exercises every prompt builder and parser without network access.
//!
//! Step prompts are answered with the tactic annotated under the same NL
//! text in the same declaration, or failing that in any proof of the same
//! theorem. Candidate prompts are answered with the
//! continuations found in correct proofs of the theorem. Feedback prompts
//! get a fixed, well-formed reply.

use std::collections::BTreeMap;

use crate::dataset::Corpus;
use crate::llm::{LlmBackend, LlmError, PromptBundle};
use crate::proof_model::{decl_name_of, AnnotatedProof, Label};
use crate::state_match::canonicalize_tactic;

const FL_LINE: &str = "Theorem statement in formal language: ";
const STEP_USER_PREFIX: &str = "The natural-language statement to formalize is:\n";
const WHOLE_USER_PREFIX: &str = "The natural language proof that we want to formalize:\n";
const PARTIAL_PREFIX: &str = "This is an unfinished Lean4 proof:\n";
const PARTIAL_END: &str = "\n\nThese are the tactics and theorems used in this world:";
const FEEDBACK_PREFIX: &str = "A first-year math student's incomplete";
const COLD_START_PREFIX: &str = "A first-year math student is starting";
const HINT_PREFIX: &str = "A first-year math student is partway through";

/// Reply for NL the corpus does not annotate; it is a bare comment, so the
/// autoformalizer rejects it as unusable output.
pub const UNKNOWN_STEP_REPLY: &str = "-- no formalization available";

#[derive(Debug, Clone, Default)]
pub struct CorpusOracle {
    /// (decl, NL step) to tactic.
    steps: BTreeMap<(String, String), String>,
    /// (theorem, NL step) to tactic, for declarations that never annotate the step.
    theorem_steps: BTreeMap<(String, String), String>,
    /// decl to the full tactic list.
    whole: BTreeMap<String, Vec<String>>,
    /// theorem name to correct tactic lists.
    correct: BTreeMap<String, Vec<Vec<String>>>,
    decl_theorem: BTreeMap<String, String>,
    /// Candidates proposed ahead of (`before`) or after the corpus continuations.
    before: BTreeMap<(String, Vec<String>), Vec<String>>,
    after: BTreeMap<(String, Vec<String>), Vec<String>>,
    feedback: BTreeMap<String, String>,
    calls: usize,
}

impl CorpusOracle {
    pub fn new(corpus: &Corpus) -> Self {
        let mut o = CorpusOracle::default();
        for p in corpus.proofs() {
            o.add_proof(p);
        }
        o
    }

    fn add_proof(&mut self, p: &AnnotatedProof) {
        let decl = p.decl_name().to_string();
        for s in &p.steps {
            self.steps
                .entry((decl.clone(), s.nl.clone()))
                .or_insert_with(|| s.tactic.clone());
            self.theorem_steps
                .entry((p.theorem.name.clone(), s.nl.clone()))
                .or_insert_with(|| s.tactic.clone());
        }
        self.whole.insert(decl.clone(), p.tactics());
        self.decl_theorem.insert(decl, p.theorem.name.clone());
        if p.label == Label::Correct {
            self.correct
                .entry(p.theorem.name.clone())
                .or_default()
                .push(p.tactics());
        }
    }

    /// Replaces the answer for one NL step of `decl`.
    pub fn override_step(&mut self, decl: &str, nl: &str, tactic: &str) {
        self.steps
            .insert((decl.to_string(), nl.to_string()), tactic.to_string());
    }

    /// Replaces the whole-proof answer for `decl`.
    pub fn override_whole(&mut self, decl: &str, tactics: &[&str]) {
        self.whole.insert(
            decl.to_string(),
            tactics.iter().map(|t| t.to_string()).collect(),
        );
    }

    /// Extra candidates for the partial proof `tactics` of `decl`, ranked
    /// before or after the corpus continuations.
    pub fn add_candidates(&mut self, decl: &str, tactics: &[&str], first: bool, extra: &[&str]) {
        let key = (
            decl.to_string(),
            tactics.iter().map(|t| canonicalize_tactic(t)).collect(),
        );
        let slot = if first {
            &mut self.before
        } else {
            &mut self.after
        };
        slot.entry(key)
            .or_default()
            .extend(extra.iter().map(|t| t.to_string()));
    }

    /// Raw reply to feedback prompts about `decl`.
    pub fn set_feedback(&mut self, decl: &str, reply: &str) {
        self.feedback.insert(decl.to_string(), reply.to_string());
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    fn candidates(&self, decl: &str, tactics: &[String]) -> Vec<String> {
        let canon: Vec<String> = tactics.iter().map(|t| canonicalize_tactic(t)).collect();
        let key = (decl.to_string(), canon.clone());
        let mut out: Vec<String> = self.before.get(&key).cloned().unwrap_or_default();
        let theorem = self
            .decl_theorem
            .get(decl)
            .map(String::as_str)
            .unwrap_or(decl);
        for proof in self.correct.get(theorem).into_iter().flatten() {
            let prefix: Vec<String> = proof.iter().map(|t| canonicalize_tactic(t)).collect();
            if prefix.len() > canon.len() && prefix[..canon.len()] == canon[..] {
                out.push(proof[canon.len()].clone());
            }
        }
        out.extend(self.after.get(&key).cloned().unwrap_or_default());
        let mut seen = Vec::new();
        out.retain(|t| {
            let c = canonicalize_tactic(t);
            let fresh = !seen.contains(&c);
            seen.push(c);
            fresh
        });
        out
    }
}

fn decl_from_system(system: &str) -> Option<String> {
    let line = system.lines().find_map(|l| l.strip_prefix(FL_LINE))?;
    decl_name_of(line).map(str::to_string)
}

/// Splits a rendered partial proof into its declaration and tactics.
fn parse_partial(text: &str) -> Option<(String, Vec<String>)> {
    let mut lines = text.lines();
    let header = lines.next()?;
    let decl = decl_name_of(header)?.to_string();
    let tactics = lines
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect();
    Some((decl, tactics))
}

fn field(text: &str, marker: &str) -> Option<String> {
    let start = text.find(marker)? + marker.len();
    let rest = &text[start..];
    let rest = rest.trim_start_matches('\n');
    Some(rest.lines().next().unwrap_or_default().trim().to_string())
}

fn generic_feedback(next_step: &str) -> String {
    serde_json::json!({
        "Type": "Other",
        "Message": "The last step you wrote does not follow from the current goal.",
        "Question": "Which part of the current goal can you simplify or rewrite next?",
        "Informalization": format!("The next step is to carry out `{next_step}`."),
    })
    .to_string()
}

impl LlmBackend for CorpusOracle {
    fn complete(&mut self, prompt: &PromptBundle) -> Result<String, LlmError> {
        prompt.validate()?;
        self.calls += 1;
        let user = prompt.user.as_str();
        if let Some(nl) = user.strip_prefix(STEP_USER_PREFIX) {
            let decl = decl_from_system(&prompt.system).unwrap_or_default();
            let theorem = self.decl_theorem.get(&decl).cloned().unwrap_or_default();
            return Ok(self
                .steps
                .get(&(decl, nl.to_string()))
                .or_else(|| self.theorem_steps.get(&(theorem, nl.to_string())))
                .cloned()
                .unwrap_or_else(|| UNKNOWN_STEP_REPLY.to_string()));
        }
        if user.starts_with(WHOLE_USER_PREFIX) {
            let decl = decl_from_system(&prompt.system).unwrap_or_default();
            return Ok(self
                .whole
                .get(&decl)
                .map(|t| t.join("\n"))
                .unwrap_or_else(|| UNKNOWN_STEP_REPLY.to_string()));
        }
        if let Some(rest) = user.strip_prefix(PARTIAL_PREFIX) {
            let body = rest.split(PARTIAL_END).next().unwrap_or_default();
            let Some((decl, tactics)) = parse_partial(body) else {
                return Ok(String::new());
            };
            return Ok(self.candidates(&decl, &tactics).join("\n"));
        }
        if user.starts_with(FEEDBACK_PREFIX) {
            let body = user.split("\n\n").nth(1).unwrap_or_default();
            let decl = body
                .lines()
                .next()
                .and_then(decl_name_of)
                .unwrap_or_default();
            if let Some(reply) = self.feedback.get(decl) {
                return Ok(reply.clone());
            }
            let next = field(user, "The actual correct step in Lean4 is:\n").unwrap_or_default();
            return Ok(generic_feedback(&next));
        }
        if user.starts_with(COLD_START_PREFIX) || user.starts_with(HINT_PREFIX) {
            let next = field(user, "next step in Lean4 is:\n")
                .or_else(|| field(user, "first step in Lean4 is:\n"))
                .unwrap_or_default();
            return Ok(serde_json::json!({
                "Question": "What does the goal look like, and which fact about it could you use first?",
                "Informalization": format!("The next step is to carry out `{next}`."),
            })
            .to_string());
        }
        Err(LlmError::InvalidPrompt(
            "the corpus oracle does not recognize this prompt".into(),
        ))
    }
}
