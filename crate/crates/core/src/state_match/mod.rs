//! Relaxed exact matching of a predicted tactic against ground truth.
//!
//! Phase one compares tactic strings, treating `rw[` and `rw [` as equal.
//! Phase two runs both tactics after their respective prefixes and compares
//! the resulting proof states case by case, up to renaming of the free
//! variables of each case.

pub mod lexer;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lean_bridge::{BridgeError, CheckRequest, CheckStatus, Checker};
use crate::proof_model::{AnnotatedProof, GoalCase, Label, ProofState};

pub use lexer::{contains_identifier, identifiers, longest_identifier_at, tokenize, Token};

/// One goal case with free variables renamed to `var0`, `var1`, ...
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedState {
    pub text: String,
    /// Original name to `var{i}`.
    pub renaming: BTreeMap<String, String>,
}

/// Renames every whole-identifier occurrence of a free variable by its
/// index in the case's variable list; all other text is copied verbatim.
pub fn normalize_case(case: &GoalCase) -> NormalizedState {
    let text = case.text();
    let vars = &case.free_variables;
    let mut out = String::with_capacity(text.len() + 8);
    let mut renaming = BTreeMap::new();
    for token in tokenize(&text) {
        match token {
            Token::Ident(id) => match vars.iter().position(|v| v == id) {
                Some(i) => {
                    let new = format!("var{i}");
                    out.push_str(&new);
                    renaming.insert(id.to_string(), new);
                }
                None => out.push_str(id),
            },
            Token::Other(s) => out.push_str(s),
        }
    }
    NormalizedState {
        text: out,
        renaming,
    }
}

pub fn normalize(state: &ProofState) -> Vec<NormalizedState> {
    state.cases.iter().map(normalize_case).collect()
}

/// A single string identifying a state up to free-variable renaming.
pub fn state_key(state: &ProofState) -> String {
    normalize(state)
        .into_iter()
        .map(|n| n.text)
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Same number of cases and pairwise-identical normalized case texts.
pub fn states_equivalent(a: &ProofState, b: &ProofState) -> bool {
    a.cases.len() == b.cases.len()
        && a.cases
            .iter()
            .zip(&b.cases)
            .all(|(x, y)| normalize_case(x).text == normalize_case(y).text)
}

/// `rw[` becomes `rw [`; nothing else changes.
pub fn canonicalize_tactic(tactic: &str) -> String {
    let tokens = tokenize(tactic);
    let mut out = String::with_capacity(tactic.len() + 1);
    for (i, tok) in tokens.iter().enumerate() {
        out.push_str(tok.as_str());
        if *tok == Token::Ident("rw") && tokens.get(i + 1) == Some(&Token::Other("[")) {
            out.push(' ');
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchPhase {
    String,
    State,
    None,
}

impl fmt::Display for MatchPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchPhase::String => "string",
            MatchPhase::State => "state",
            MatchPhase::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchVerdict {
    pub matched: bool,
    pub phase: MatchPhase,
    pub evidence: String,
}

impl MatchVerdict {
    fn hit(phase: MatchPhase, evidence: String) -> Self {
        MatchVerdict {
            matched: true,
            phase,
            evidence,
        }
    }

    fn miss(evidence: String) -> Self {
        MatchVerdict {
            matched: false,
            phase: MatchPhase::None,
            evidence,
        }
    }
}

/// Decides whether `pred` faithfully formalizes the step whose ground truth
/// is `truth`. Prefixes are the tactics already accepted on each side.
pub fn tactics_match<C: Checker + ?Sized>(
    pred: &str,
    truth: &str,
    pred_prefix: &[String],
    truth_prefix: &[String],
    theorem_header: &str,
    checker: &mut C,
) -> Result<MatchVerdict, BridgeError> {
    let (p, t) = (
        canonicalize_tactic(pred.trim()),
        canonicalize_tactic(truth.trim()),
    );
    if p == t {
        return Ok(MatchVerdict::hit(MatchPhase::String, p));
    }

    let run = |prefix: &[String], last: &str, checker: &mut C| {
        let mut tactics = prefix.to_vec();
        tactics.push(last.trim().to_string());
        checker.check(&CheckRequest::new(theorem_header, tactics))
    };
    let pred_result = run(pred_prefix, pred, checker)?;
    if pred_result.status == CheckStatus::Error {
        return Ok(MatchVerdict::miss(format!(
            "predicted tactic fails: {}",
            pred_result.message.unwrap_or_default()
        )));
    }
    let truth_result = run(truth_prefix, truth, checker)?;
    if truth_result.status == CheckStatus::Error {
        return Ok(MatchVerdict::miss(format!(
            "ground-truth tactic fails: {}",
            truth_result.message.unwrap_or_default()
        )));
    }
    let (ps, ts) = (
        pred_result.state().expect("non-error result has a state"),
        truth_result.state().expect("non-error result has a state"),
    );
    let evidence = format!(
        "predicted:\n{}\n---\nexpected:\n{}",
        state_key(&ps),
        state_key(&ts)
    );
    if states_equivalent(&ps, &ts) {
        Ok(MatchVerdict::hit(MatchPhase::State, evidence))
    } else {
        Ok(MatchVerdict::miss(evidence))
    }
}

/// The predicted prefix compared against a ground truth of `truth_len`
/// tactics: `min(len(generated), len(truth))` positions.
pub fn align_whole_proof(pred: &[String], truth_len: usize) -> &[String] {
    &pred[..pred.len().min(truth_len)]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofScore {
    pub tactic_hits: usize,
    pub compared: usize,
    pub proof_exact: bool,
    pub verdicts: Vec<MatchVerdict>,
}

/// Scores predictions for a correct proof position by position. Extra
/// predicted tactics beyond the ground truth are ignored; a shorter
/// prediction can never be exact.
pub fn score_correct_proof<C: Checker + ?Sized>(
    pred: &[String],
    truth: &AnnotatedProof,
    checker: &mut C,
) -> Result<ProofScore, BridgeError> {
    let truth_tactics = truth.tactics();
    let pred = align_whole_proof(pred, truth_tactics.len());
    let mut verdicts = Vec::with_capacity(pred.len());
    for i in 0..pred.len() {
        verdicts.push(tactics_match(
            &pred[i],
            &truth_tactics[i],
            &pred[..i],
            &truth_tactics[..i],
            &truth.theorem.statement_fl,
            checker,
        )?);
    }
    let tactic_hits = verdicts.iter().filter(|v| v.matched).count();
    Ok(ProofScore {
        tactic_hits,
        compared: pred.len(),
        proof_exact: pred.len() == truth_tactics.len() && tactic_hits == truth_tactics.len(),
        verdicts,
    })
}

/// 1-based position of the first wrong step in an incorrect proof: the step
/// that followed the deleted one, or the last step when the deleted step
/// was the final one.
pub fn first_incorrect_step(truth: &AnnotatedProof) -> Option<usize> {
    if truth.label != Label::Incorrect {
        return None;
    }
    truth.skipped_index.map(|k| k.min(truth.steps.len()).max(1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncorrectScore {
    pub success: bool,
    pub prefix_verdicts: Vec<MatchVerdict>,
    pub error_step: Option<usize>,
}

/// Success iff every step before the first incorrect one is matched and
/// the predicted formalization of that step makes the checker fail.
pub fn score_incorrect_proof<C: Checker + ?Sized>(
    pred: &[String],
    truth: &AnnotatedProof,
    checker: &mut C,
) -> Result<IncorrectScore, BridgeError> {
    let Some(k) = first_incorrect_step(truth) else {
        return Ok(IncorrectScore {
            success: false,
            prefix_verdicts: vec![],
            error_step: None,
        });
    };
    let truth_tactics = truth.tactics();
    let mut prefix_verdicts = Vec::new();
    let mut ok = pred.len() >= k;
    for i in 0..(k - 1).min(pred.len()) {
        let v = tactics_match(
            &pred[i],
            &truth_tactics[i],
            &pred[..i],
            &truth_tactics[..i],
            &truth.theorem.statement_fl,
            checker,
        )?;
        ok &= v.matched;
        prefix_verdicts.push(v);
        if !ok {
            break;
        }
    }
    if ok {
        let result = checker.check(&CheckRequest::new(
            truth.theorem.statement_fl.clone(),
            pred[..k].to_vec(),
        ))?;
        ok = result.status == CheckStatus::Error;
    }
    Ok(IncorrectScore {
        success: ok,
        prefix_verdicts,
        error_step: Some(k),
    })
}

/// One line of the evaluation log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub theorem: String,
    pub index: usize,
    pub phase: MatchPhase,
    pub matched: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lean_bridge::{CheckResult, FakeChecker};
    use crate::proof_model::parse_proof_state;

    const STATE_N: &str = "n : ℕ\nh : 1 ≤ n\n⊢ n + 0 = n";
    const STATE_M: &str = "m : ℕ\nhm : 1 ≤ m\n⊢ m + 0 = m";

    #[test]
    fn appendix_states_normalize_identically() {
        let a = parse_proof_state(STATE_N).unwrap();
        let b = parse_proof_state(STATE_M).unwrap();
        let na = normalize(&a);
        assert_eq!(na[0].text, "var0 : ℕ\nvar1 : 1 ≤ var0\n⊢ var0 + 0 = var0");
        assert_eq!(na[0].text, normalize(&b)[0].text);
        assert_eq!(na[0].renaming.get("h").map(String::as_str), Some("var1"));
        assert!(states_equivalent(&a, &b));
    }

    #[test]
    fn non_variables_untouched() {
        let s = parse_proof_state("a b : ℕ\n⊢ succ_add a b = MyNat.succ (a + b)").unwrap();
        assert_eq!(
            normalize(&s)[0].text,
            "var0 var1 : ℕ\n⊢ succ_add var0 var1 = MyNat.succ (var0 + var1)"
        );
    }

    #[test]
    fn case_count_mismatch() {
        let one = parse_proof_state("⊢ 0 = 0").unwrap();
        let two = parse_proof_state("⊢ 0 = 0\n\n⊢ 0 = 0").unwrap();
        assert!(!states_equivalent(&one, &two));
        assert!(states_equivalent(&two, &two));
    }

    #[test]
    fn rw_spacing() {
        assert_eq!(canonicalize_tactic("rw[add_zero]"), "rw [add_zero]");
        assert_eq!(canonicalize_tactic("rw [add_zero]"), "rw [add_zero]");
        assert_eq!(canonicalize_tactic("nth_rw[2]"), "nth_rw[2]");
        assert_eq!(canonicalize_tactic("rw[h] at h2"), "rw [h] at h2");
    }

    #[test]
    fn string_phase_needs_no_checker() {
        let mut fake = FakeChecker::new();
        let v = tactics_match(
            "rw[add_zero]",
            "rw [add_zero]",
            &[],
            &[],
            "theorem t : 0 = 0 := by",
            &mut fake,
        )
        .unwrap();
        assert!(v.matched);
        assert_eq!(v.phase, MatchPhase::String);
        assert_eq!(fake.calls(), 0);
    }

    #[test]
    fn state_phase_via_checker() {
        let header = "theorem t (n : ℕ) : 0 + n = n := by";
        let mut fake = FakeChecker::new();
        let st = |s: &str| CheckResult::incomplete(parse_proof_state(s).unwrap());
        fake.insert(
            "t",
            &["induction n with d hd".to_string()],
            st("case zero\n⊢ 0 + 0 = 0\n\ncase succ\nd : ℕ\nhd : 0 + d = d\n⊢ 0 + succ d = succ d"),
        );
        fake.insert(
            "t",
            &["induction n with k hk".to_string()],
            st("case zero\n⊢ 0 + 0 = 0\n\ncase succ\nk : ℕ\nhk : 0 + k = k\n⊢ 0 + succ k = succ k"),
        );
        fake.insert(
            "t",
            &["rw [foo]".to_string()],
            CheckResult::error("unknown identifier 'foo'", None),
        );
        let v = tactics_match(
            "induction n with k hk",
            "induction n with d hd",
            &[],
            &[],
            header,
            &mut fake,
        )
        .unwrap();
        assert_eq!((v.matched, v.phase), (true, MatchPhase::State));
        let v = tactics_match(
            "rw [foo]",
            "induction n with d hd",
            &[],
            &[],
            header,
            &mut fake,
        )
        .unwrap();
        assert_eq!((v.matched, v.phase), (false, MatchPhase::None));
    }
}
