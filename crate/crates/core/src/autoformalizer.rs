//! Natural-language proof steps to Lean tactics, one LLM call per step,
//! with each partial proof compiled before the next step is attempted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{serialize_proof, PremiseDictionary};
use crate::lean_bridge::{BridgeError, CheckRequest, CheckResult, CheckStatus, Checker};
use crate::llm::{Knobs, LlmBackend, LlmError, PromptBundle};
use crate::proof_model::{AnnotatedProof, TheoremSpec};
use crate::template::{render, TemplateError};

/// Number of worked examples every autoformalization prompt carries.
pub const FEW_SHOT_COUNT: usize = 5;

const STEP_SYSTEM: &str = "\
An undergraduate student is proving the following Peano Arithmetic theorem:
Theorem statement in natural language: {theorem_statement_NL}
Theorem statement in formal language: {theorem_statement_FL}
Convert the student’s natural language mathematical proof step to Lean4 syntax.
{staff_block}These are the formal theorems you have access to:
{theorem_dict}

These are the Lean tactics you have access to:
{tactic_dict}

Your response must be written as a single line of Lean tactic code, as used in the body of a by block of a Lean theorem.It should match the structure of Lean DSL tactic proofs, such as:
intro h
rw [← is_zero_succ a]
apply succ_inj at h
exact h
contrapose! h

Note: Only 1 lean tactic, do not write multiple lean tactics that are comma seperated.
DO *NOT* wrap your answer in markdown syntax, e.g. '''lean '''. It must be simply a Lean tactic script that can be inserted into a proof.

Here are some examples. NOTE: These are just examples. The correct Lean4 code may not necessarily use the propositions shown in these proofs.

{examples}";

const STEP_USER: &str = "The natural-language statement to formalize is:\n{nl_statement}";

const WHOLE_SYSTEM: &str = "\
An undergraduate student is proving the following Peano Arithmetic theorem:
Theorem statement in natural language: {theorem_statement_NL}
Theorem statement in formal language: {theorem_statement_FL}

Convert the student’s natural language mathematical proof to Lean4 syntax.

{staff_block}These are the formal theorems you have access to:
{theorem_dict}

These are the Lean tactics you have access to:
{tactic_dict}

Your response must be written as a proof in Lean, in a list of tactics on each new line. SUch as:
intro h
rw [← is_zero_succ a]
apply succ_inj at h
exact h
contrapose! h

Each tactic must be formatted consistently with Lean4's syntax and DO NOT include any comments in the list.
DO *NOT* wrap your answer in markdown syntax, e.g. '''lean '''. It must be simply a list of Lean tactics separated by \\n.

Here are some examples. NOTE: These are just examples. The correct Lean4 code may not necessarily use the propositions shown in these proofs.

{examples}";

const WHOLE_USER: &str = "The natural language proof that we want to formalize:\n{nl_statement}";

const STAFF_BLOCK: &str = "This is one example of the completed proof in Lean4, with in-line comments of the natural language proof corresponding to the Lean4 syntax:\n";

/// Tactic names used to spot comma-joined multi-tactic replies.
const KNOWN_TACTICS: &[&str] = &[
    "rfl",
    "rw",
    "rewrite",
    "nth_rewrite",
    "intro",
    "intros",
    "apply",
    "exact",
    "induction",
    "cases",
    "rcases",
    "obtain",
    "use",
    "contrapose!",
    "contrapose",
    "symm",
    "trivial",
    "decide",
    "simp",
    "tauto",
    "left",
    "right",
    "exfalso",
    "constructor",
    "have",
    "repeat",
    "omega",
    "linarith",
    "ring",
    "by_contra",
    "push_neg",
    "specialize",
    "refine",
    "calc",
    "show",
    "skip",
    "assumption",
];

#[derive(Debug, Error)]
pub enum AutoformError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("expected {FEW_SHOT_COUNT} few-shot examples, got {0}")]
    FewShotCount(usize),
    #[error("unusable model output: {0}")]
    Format(String),
    #[error("language model failed at step {step}: {source}")]
    Backend {
        step: usize,
        source: LlmError,
        partial: Box<FormalizationTrace>,
    },
    #[error("checker failed at step {step}: {source}")]
    Checker {
        step: usize,
        source: BridgeError,
        partial: Box<FormalizationTrace>,
    },
    #[error("language model failed: {0}")]
    WholeBackend(LlmError),
    #[error(transparent)]
    WholeChecker(BridgeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShot {
    pub input: String,
    pub output: String,
}

impl FewShot {
    fn new(input: &str, output: &str) -> Self {
        FewShot {
            input: input.into(),
            output: output.into(),
        }
    }
}

/// The five single-step examples of the step-by-step prompt.
pub fn default_step_examples() -> Vec<FewShot> {
    vec![
        FewShot::new(
            "Rewrite the LHS pred (succ a) with the given statement that succ a = succ b, LHS is now pred (succ b)",
            "rw [h]",
        ),
        FewShot::new(
            "Rewrite LHS using the commutative property of addition, changing a + (b + c) to a + b + c",
            "rw [← add_assoc]",
        ),
        FewShot::new(
            "Assume that the hypothesis 'h' is true, that is, a + succ d = 0. The goal now is to prove that a = 0.",
            "rw [add_zero] at h",
        ),
        FewShot::new(
            "Split the natural number 'b' into two cases: 'b' is zero, and 'b' is the successor of another natural number 'd'.",
            "cases b with d",
        ),
        FewShot::new(
            "Use the case of a + b to simplify the goal to equal z = x + (a + b).",
            "use a + b",
        ),
    ]
}

/// The five whole-proof examples of the ablation prompt.
pub fn default_whole_examples() -> Vec<FewShot> {
    vec![
        FewShot::new(
            "Induct on b, with d = 0 as the base case and the inductive hypothesis a * d = d * a. There are now two proof goals, prove base case: a * 0 = 0 * a, and inductive step: a * succ d = succ d * a.
First we prove base case.
Simplify RHS 0 * a to 0.
Simplify LHS a * 0 to 0.
Prove LHS and RHS are equal, 0 = 0, completing base case.
Next prove inductive step. Rewrite RHS succ d * a to d * a + a.
Rewrite the RHS from d * a + a to a * d + a using the inductive hypothesis.
Rewrite the LHS, changing a * succ d to a * d + a.
Prove LHS and RHS are equal, a * d + a = a * d + a, completing the proof.",
            "induction b with d hd
rw [zero_mul]
rw [mul_zero]
rfl
rw [succ_mul]
rw [← hd]
rw [mul_succ]
rfl",
        ),
        FewShot::new(
            "We must assume succ (succ 0) + succ (succ 0) = succ (succ (succ (succ (succ 0)))) and derive a contradiction or falsehood.
Using our previous theorems, we can change succ (succ 0) + succ (succ 0) into succ (succ (succ (succ 0))).
By the injectivity of succ, we know that 0 = succ 0.
0 is not equal to the successor of any natural number, so we have a contradiction.
Thus, we have a falsehood/contradiction, which is what we wanted to show.",
            "intro h
rw [add_succ, add_succ, add_zero] at h
repeat apply succ_inj at h
apply zero_ne_succ at h
exact h",
        ),
        FewShot::new(
            "We consider the case where the successor of x is less than or equal to the successor of y. This implies that the successor of y is equal to the successor of x plus some natural number d.
We assume d as the difference such that when added to x results in y. The goal now is to prove that y is equal to x plus d.
We rewrite the right-hand side of succ y = succ x + d using the theorem that states the the successor of a sum of two natural numbers is the same as the successor of the first number added to the second number.
We apply the property that if two natural numbers with successors are equal, then the original numbers are also equal.
We have shown that x = y + d, so we can use this to prove the goal.",
            "cases hx with d hd
use d
rw [succ_add] at hd
apply succ_inj at hd
exact hd",
        ),
        FewShot::new(
            "We use proof by contraposition. So, we assume succ m = succ n and show m = n.
By the injectivity of succ, we have m = n.
So, m = n, which is exactly what we wanted to show.",
            "contrapose! h
apply succ_inj at h
exact h",
        ),
        FewShot::new(
            "Rewrite the expression for the square of (a + b), a^ 2, and b^2 to be (a + b) * (a + b), a * a, and b * b respectively.
Rearrange the terms on the right hand side of the equation, swapping the order of b * b and 2 * a * b. This is based on the commutative property of addition, which states that the order of the terms does not change the result of the addition.
Rewrite the left-hand side of the equation using the distributive property of multiplication over addition. This expands (a + b) * (a + b) to a * a + b * a + a * b + b * b.
Rewrite the term 2 * a * b in the goal as (a * b + a * b) using the theorem that 2 times a number is the same as the number added to itself. Also, rewrite the term a * b + b * b as (a * b + a * b) + b * b using the theorem that the product of a sum is the sum of the products.
We rewrite the expression a * b as b * a in the goal. This is based on the commutative property of multiplication, which states that the order of the factors does not change the product. This results in the new goal: a * a + a * b + (a * b + b * b) = a * a + (a * b + a * b) + b * b.
We use the theorem that states the associativity of addition twice to rearrange the left-hand side of the equation. This changes the goal to proving that a * a + a * b + a * b + b * b equals a * a + a * b + a * b + b * b.
The goal is now to prove that a * a + a * b + a * b + b * b = a * a + a * b + a * b + b * b, which is true by reflexivity",
            "rw [pow_two, pow_two, pow_two]
rw [add_right_comm]
rw [mul_add, add_mul, add_mul]
rw [two_mul, add_mul]
rw [mul_comm b a]
rw [← add_assoc, ← add_assoc]
rfl",
        ),
    ]
}

fn render_examples(examples: &[FewShot]) -> Result<String, AutoformError> {
    if examples.len() != FEW_SHOT_COUNT {
        return Err(AutoformError::FewShotCount(examples.len()));
    }
    Ok(examples
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            format!(
                "Example {}:\nInput: {}\nOutput: {}\n",
                i + 1,
                ex.input,
                ex.output
            )
        })
        .collect::<Vec<_>>()
        .join("\n"))
}

/// Prompt-side context shared by every step of one theorem.
#[derive(Debug, Clone)]
pub struct PromptContext<'a> {
    pub theorem_dict: &'a PremiseDictionary,
    pub tactic_dict: &'a PremiseDictionary,
    pub examples: &'a [FewShot],
    pub staff_solution: Option<&'a AnnotatedProof>,
    pub knobs: &'a Knobs,
}

fn build_prompt(
    system: &str,
    user: &str,
    theorem: &TheoremSpec,
    nl: &str,
    ctx: &PromptContext<'_>,
) -> Result<PromptBundle, AutoformError> {
    let staff_block = match ctx.staff_solution {
        Some(staff) => format!("{STAFF_BLOCK}{}\n", serialize_proof(staff)),
        None => String::new(),
    };
    let mut values = BTreeMap::new();
    values.insert("theorem_statement_NL", theorem.statement_nl.clone());
    values.insert("theorem_statement_FL", theorem.statement_fl.clone());
    values.insert("staff_block", staff_block);
    values.insert("theorem_dict", ctx.theorem_dict.render());
    values.insert("tactic_dict", ctx.tactic_dict.render());
    values.insert("examples", render_examples(ctx.examples)?);
    let system = render(system, &values)?;
    let user = render(user, &BTreeMap::from([("nl_statement", nl.to_string())]))?;
    Ok(PromptBundle::new(system, user, ctx.knobs.clone()))
}

pub fn build_step_prompt(
    theorem: &TheoremSpec,
    nl_step: &str,
    ctx: &PromptContext<'_>,
) -> Result<PromptBundle, AutoformError> {
    build_prompt(STEP_SYSTEM, STEP_USER, theorem, nl_step, ctx)
}

/// The NL proof is sent as one step per line.
pub fn build_whole_prompt(
    theorem: &TheoremSpec,
    proof_nl: &[String],
    ctx: &PromptContext<'_>,
) -> Result<PromptBundle, AutoformError> {
    build_prompt(WHOLE_SYSTEM, WHOLE_USER, theorem, &proof_nl.join("\n"), ctx)
}

/// Lines of a reply with one enclosing markdown fence removed.
fn unfenced_lines(raw: &str) -> Vec<&str> {
    let lines: Vec<&str> = raw.trim().lines().collect();
    let is_fence = |l: &&str| l.trim_start().starts_with("```");
    match lines.iter().position(is_fence) {
        Some(open) => {
            let body = &lines[open + 1..];
            let close = body.iter().position(is_fence).unwrap_or(body.len());
            body[..close].to_vec()
        }
        None => lines,
    }
}

fn strip_output_label(line: &str) -> &str {
    let t = line.trim();
    t.strip_prefix("Output:").map(str::trim).unwrap_or(t)
}

/// True if `line` has a comma outside brackets followed by a tactic name.
fn has_joined_tactics(line: &str) -> bool {
    let mut depth = 0i32;
    for (i, c) in line.char_indices() {
        match c {
            '(' | '[' | '{' | '⟨' => depth += 1,
            ')' | ']' | '}' | '⟩' => depth -= 1,
            ',' if depth == 0 => {
                let next = line[i + 1..].split_whitespace().next().unwrap_or("");
                if KNOWN_TACTICS.contains(&next) {
                    return true;
                }
            }
            _ => {}
        }
    }
    false
}

/// Reduces a model reply to one tactic line.
pub fn sanitize_tactic(raw: &str) -> Result<String, AutoformError> {
    let line = unfenced_lines(raw)
        .into_iter()
        .map(strip_output_label)
        .find(|l| !l.is_empty() && !l.starts_with("--"))
        .ok_or_else(|| AutoformError::Format(format!("no tactic in reply {raw:?}")))?;
    let line = match line.find(" --") {
        Some(i) => line[..i].trim_end(),
        None => line,
    };
    if line.contains("```") {
        return Err(AutoformError::Format(format!(
            "stray markdown fence in {line:?}"
        )));
    }
    if has_joined_tactics(line) {
        return Err(AutoformError::Format(format!(
            "several comma-joined tactics in {line:?}"
        )));
    }
    Ok(line.to_string())
}

/// Splits a whole-proof reply into tactic lines, dropping comment lines.
pub fn sanitize_whole_proof(raw: &str) -> Result<Vec<String>, AutoformError> {
    let mut out = Vec::new();
    for (i, line) in unfenced_lines(raw).into_iter().enumerate() {
        let t = if i == 0 {
            strip_output_label(line)
        } else {
            line.trim()
        };
        if t.contains("```") {
            return Err(AutoformError::Format("markdown fence inside proof".into()));
        }
        if t.is_empty() || t.starts_with("--") {
            continue;
        }
        let t = match t.find(" --") {
            Some(k) => t[..k].trim_end(),
            None => t,
        };
        out.push(t.to_string());
    }
    if out.is_empty() {
        return Err(AutoformError::Format(format!(
            "no tactics in reply {raw:?}"
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    Finished,
    CheckerError,
    BackendError,
    /// The model's reply could not be reduced to a single tactic.
    FormatError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptedStep {
    pub nl: String,
    pub tactic: String,
    pub result: CheckResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalizationTrace {
    pub theorem: TheoremSpec,
    pub accepted: Vec<AcceptedStep>,
    /// 1-based index of the step that stopped the run.
    pub halted_at: Option<usize>,
    pub halt_reason: HaltReason,
    /// Raw reply for a `FormatError` halt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected_output: Option<String>,
}

impl FormalizationTrace {
    pub fn tactics(&self) -> Vec<String> {
        self.accepted.iter().map(|s| s.tactic.clone()).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.accepted
            .last()
            .is_some_and(|s| s.result.status == CheckStatus::Complete)
    }

    /// The erroring step, if the run halted on a checker error.
    pub fn error_step(&self) -> Option<&AcceptedStep> {
        match self.halt_reason {
            HaltReason::CheckerError => self.accepted.last(),
            _ => None,
        }
    }

    /// Tactics accepted before the erroring step.
    pub fn valid_prefix(&self) -> Vec<String> {
        let mut t = self.tactics();
        if self.halt_reason == HaltReason::CheckerError {
            t.pop();
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOptions {
    /// Stop at the first erroring step. Off only for metric evaluation,
    /// where every NL step must be formalized.
    pub halt_on_error: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            halt_on_error: true,
        }
    }
}

/// Formalizes and checks each NL step in order, one model call per step.
pub fn formalize_step_by_step<L, C>(
    proof_nl: &[String],
    theorem: &TheoremSpec,
    ctx: &PromptContext<'_>,
    llm: &mut L,
    checker: &mut C,
    opts: StepOptions,
) -> Result<FormalizationTrace, AutoformError>
where
    L: LlmBackend + ?Sized,
    C: Checker + ?Sized,
{
    let mut trace = FormalizationTrace {
        theorem: theorem.clone(),
        accepted: Vec::new(),
        halted_at: None,
        halt_reason: HaltReason::Finished,
        rejected_output: None,
    };
    let mut tactics: Vec<String> = Vec::new();
    for (i, nl) in proof_nl.iter().enumerate() {
        let step = i + 1;
        let prompt = build_step_prompt(theorem, nl, ctx)?;
        let raw = match llm.complete(&prompt) {
            Ok(r) => r,
            Err(source) => {
                trace.halted_at = Some(step);
                trace.halt_reason = HaltReason::BackendError;
                return Err(AutoformError::Backend {
                    step,
                    source,
                    partial: Box::new(trace),
                });
            }
        };
        let tactic = match sanitize_tactic(&raw) {
            Ok(t) => t,
            Err(_) => {
                trace.halted_at = Some(step);
                trace.halt_reason = HaltReason::FormatError;
                trace.rejected_output = Some(raw);
                return Ok(trace);
            }
        };
        tactics.push(tactic.clone());
        let req = CheckRequest::new(theorem.statement_fl.clone(), tactics.clone());
        let result = match checker.check(&req) {
            Ok(r) => r,
            Err(source) => {
                trace.halted_at = Some(step);
                trace.halt_reason = HaltReason::BackendError;
                return Err(AutoformError::Checker {
                    step,
                    source,
                    partial: Box::new(trace),
                });
            }
        };
        let status = result.status;
        trace.accepted.push(AcceptedStep {
            nl: nl.clone(),
            tactic,
            result,
        });
        match status {
            CheckStatus::Error if opts.halt_on_error => {
                trace.halted_at = Some(step);
                trace.halt_reason = HaltReason::CheckerError;
                return Ok(trace);
            }
            CheckStatus::Complete if opts.halt_on_error => return Ok(trace),
            _ => {}
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WholeProof {
    pub tactics: Vec<String>,
    pub result: CheckResult,
}

impl WholeProof {
    /// The generated proof closes every goal on its own.
    pub fn compiles(&self) -> bool {
        self.result.status == CheckStatus::Complete
    }
}

/// Formalizes the whole NL proof with one model call, then checks it once.
pub fn formalize_whole_proof<L, C>(
    proof_nl: &[String],
    theorem: &TheoremSpec,
    ctx: &PromptContext<'_>,
    llm: &mut L,
    checker: &mut C,
) -> Result<WholeProof, AutoformError>
where
    L: LlmBackend + ?Sized,
    C: Checker + ?Sized,
{
    let prompt = build_whole_prompt(theorem, proof_nl, ctx)?;
    let raw = llm.complete(&prompt).map_err(AutoformError::WholeBackend)?;
    let tactics = sanitize_whole_proof(&raw)?;
    let req = CheckRequest::new(theorem.statement_fl.clone(), tactics.clone());
    let result = checker.check(&req).map_err(AutoformError::WholeChecker)?;
    Ok(WholeProof { tactics, result })
}
