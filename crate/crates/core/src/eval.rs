//! Corpus-level autoformalization evaluation with Jeffreys binomial intervals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::autoformalizer::{
    formalize_step_by_step, formalize_whole_proof, AutoformError, FewShot, PromptContext,
    StepOptions,
};
use crate::dataset::PremiseDictionary;
use crate::lean_bridge::Checker;
use crate::llm::{Knobs, LlmBackend};
use crate::proof_model::AnnotatedProof;
use crate::state_match::{score_correct_proof, score_incorrect_proof, MatchVerdict, VerdictRecord};

pub const CONFIDENCE: f64 = 0.95;

/// `p`-quantile of Beta(a, b) by bisection on the regularized incomplete beta.
pub fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Equal-tailed Jeffreys interval for `x` successes in `n` trials: the
/// quantiles of Beta(x + 1/2, n − x + 1/2), with the lower bound pinned to
/// 0 when x = 0 and the upper bound to 1 when x = n.
pub fn jeffreys_interval(x: u64, n: u64, confidence: f64) -> (f64, f64) {
    assert!(x <= n, "successes exceed trials");
    if n == 0 {
        return (0.0, 1.0);
    }
    let alpha = 1.0 - confidence;
    let (a, b) = (x as f64 + 0.5, (n - x) as f64 + 0.5);
    let lower = if x == 0 {
        0.0
    } else {
        beta_quantile(alpha / 2.0, a, b)
    };
    let upper = if x == n {
        1.0
    } else {
        beta_quantile(1.0 - alpha / 2.0, a, b)
    };
    (lower, upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        let (lower, upper) = jeffreys_interval(successes, trials, CONFIDENCE);
        let point = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        Proportion {
            successes,
            trials,
            point,
            lower,
            upper,
        }
    }

    /// Point estimate as a percentage with two decimals, e.g. `32.89%`.
    pub fn percent(&self) -> String {
        format!("{:.2}%", 100.0 * self.point)
    }
}

impl std::fmt::Display for Proportion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} / {} = {} [{:.2}%, {:.2}%]",
            self.successes,
            self.trials,
            self.percent(),
            100.0 * self.lower,
            100.0 * self.upper
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Step,
    Whole,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aborted {
    pub decl: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: Mode,
    pub staff_solution: bool,
    pub correct_tactics: Proportion,
    pub correct_proofs: Proportion,
    pub incorrect_proofs: Proportion,
    /// Whole-proof outputs that close every goal.
    pub compiling_proofs: u64,
    pub aborted: Vec<Aborted>,
    pub evaluated: usize,
    pub total: usize,
}

impl EvalReport {
    pub fn render(&self) -> String {
        let mut s = format!(
            "mode: {:?}, staff solution: {}\n",
            self.mode,
            if self.staff_solution { "on" } else { "off" }
        );
        s += &format!("correct tactics:  {}\n", self.correct_tactics);
        s += &format!("correct proofs:   {}\n", self.correct_proofs);
        s += &format!("incorrect proofs: {}\n", self.incorrect_proofs);
        if self.mode == Mode::Whole {
            s += &format!("compiling proofs: {}\n", self.compiling_proofs);
        }
        s += &format!("coverage: {} / {} proofs\n", self.evaluated, self.total);
        for a in &self.aborted {
            s += &format!("aborted {}: {}\n", a.decl, a.reason);
        }
        s
    }
}

pub struct EvalSetup<'a> {
    pub mode: Mode,
    pub theorem_dict: &'a PremiseDictionary,
    pub tactic_dict: &'a PremiseDictionary,
    pub examples: &'a [FewShot],
    /// Staff solutions by theorem name; `None` disables the staff block.
    pub staff: Option<&'a BTreeMap<String, AnnotatedProof>>,
    pub knobs: &'a Knobs,
}

fn records(decl: &str, verdicts: &[MatchVerdict]) -> Vec<VerdictRecord> {
    verdicts
        .iter()
        .enumerate()
        .map(|(i, v)| VerdictRecord {
            theorem: decl.to_string(),
            index: i + 1,
            phase: v.phase,
            matched: v.matched,
        })
        .collect()
}

fn abort_reason(e: &AutoformError) -> String {
    match e {
        AutoformError::Backend { source, .. } | AutoformError::WholeBackend(source) => {
            source.to_string()
        }
        AutoformError::Checker { source, .. } | AutoformError::WholeChecker(source) => {
            source.to_string()
        }
        other => other.to_string(),
    }
}

/// Formalizes every proof and scores it. A proof whose backend or checker
/// fails is reported as aborted and left out of every denominator.
pub fn evaluate<L, C>(
    correct: &[AnnotatedProof],
    incorrect: &[AnnotatedProof],
    setup: &EvalSetup<'_>,
    llm: &mut L,
    checker: &mut C,
) -> (EvalReport, Vec<VerdictRecord>)
where
    L: LlmBackend + ?Sized,
    C: Checker + ?Sized,
{
    let mut log = Vec::new();
    let mut aborted = Vec::new();
    let (mut hits, mut positions, mut exact, mut n_correct) = (0u64, 0u64, 0u64, 0u64);
    let (mut success, mut n_incorrect, mut compiling) = (0u64, 0u64, 0u64);

    // Returns the predicted tactics and whether they close the proof on their own.
    let predict = |proof: &AnnotatedProof,
                   halt: bool,
                   llm: &mut L,
                   checker: &mut C|
     -> Result<(Vec<String>, bool), AutoformError> {
        let staff = setup.staff.and_then(|m| m.get(&proof.theorem.name));
        let ctx = PromptContext {
            theorem_dict: setup.theorem_dict,
            tactic_dict: setup.tactic_dict,
            examples: setup.examples,
            staff_solution: staff,
            knobs: setup.knobs,
        };
        let nl = proof.nl_steps();
        match setup.mode {
            Mode::Step => {
                let opts = StepOptions {
                    halt_on_error: halt,
                };
                let trace = formalize_step_by_step(&nl, &proof.theorem, &ctx, llm, checker, opts)?;
                Ok((trace.tactics(), trace.is_complete()))
            }
            Mode::Whole => {
                let w = formalize_whole_proof(&nl, &proof.theorem, &ctx, llm, checker)?;
                let compiles = w.compiles();
                Ok((w.tactics, compiles))
            }
        }
    };

    for proof in correct {
        let decl = proof.decl_name().to_string();
        let scored = predict(proof, false, llm, checker)
            .map_err(|e| abort_reason(&e))
            .and_then(|(pred, compiles)| {
                let score =
                    score_correct_proof(&pred, proof, checker).map_err(|e| e.to_string())?;
                Ok((score, compiles))
            });
        match scored {
            Ok((score, compiles)) => {
                compiling += u64::from(compiles && setup.mode == Mode::Whole);
                n_correct += 1;
                hits += score.tactic_hits as u64;
                positions += proof.steps.len() as u64;
                exact += u64::from(score.proof_exact);
                log.extend(records(&decl, &score.verdicts));
            }
            Err(reason) => aborted.push(Aborted { decl, reason }),
        }
    }
    for proof in incorrect {
        let decl = proof.decl_name().to_string();
        let scored = predict(proof, true, llm, checker)
            .map_err(|e| abort_reason(&e))
            .and_then(|(pred, _)| {
                score_incorrect_proof(&pred, proof, checker).map_err(|e| e.to_string())
            });
        match scored {
            Ok(score) => {
                n_incorrect += 1;
                success += u64::from(score.success);
                log.extend(records(&decl, &score.prefix_verdicts));
            }
            Err(reason) => aborted.push(Aborted { decl, reason }),
        }
    }
    let report = EvalReport {
        mode: setup.mode,
        staff_solution: setup.staff.is_some(),
        correct_tactics: Proportion::new(hits, positions),
        correct_proofs: Proportion::new(exact, n_correct),
        incorrect_proofs: Proportion::new(success, n_incorrect),
        compiling_proofs: compiling,
        aborted,
        evaluated: (n_correct + n_incorrect) as usize,
        total: correct.len() + incorrect.len(),
    };
    (report, log)
}

/// One JSON object per verdict.
pub fn verdict_log_jsonl(records: &[VerdictRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("verdict records serialize") + "\n")
        .collect()
}
