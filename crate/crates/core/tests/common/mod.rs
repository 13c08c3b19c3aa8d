//! Shared fixture loading for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use peano_tutor::autoformalizer::{default_step_examples, default_whole_examples, FewShot};
use peano_tutor::dataset::{build_dictionaries, Corpus, Descriptions, Dictionaries};
use peano_tutor::eval::{evaluate, EvalReport, EvalSetup, Mode};
use peano_tutor::lean_bridge::CheckStatus;
use peano_tutor::lean_bridge::FakeChecker;
use peano_tutor::llm::{Knobs, LlmBackend, ReplayBackend, ReplayStore};
use peano_tutor::next_step::{forbidden_theorems, world_premises, SearchConfig};
use peano_tutor::oracle::CorpusOracle;
use peano_tutor::proof_model::{AnnotatedProof, Label, Persona};
use peano_tutor::state_match::VerdictRecord;
use peano_tutor::tutor::{
    explain_error, formalize_step, request_hint, tutor_proof, Hint, StepAttempt, TutorReport,
};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn corpus() -> Corpus {
    Corpus::load(&fixtures().join("corpus/manifest.json")).expect("fixture corpus loads")
}

pub fn descriptions() -> Descriptions {
    Descriptions::load(&fixtures().join("corpus/descriptions.toml")).expect("descriptions load")
}

pub fn dictionaries(corpus: &Corpus) -> Dictionaries {
    let proofs: Vec<AnnotatedProof> = corpus.proofs().cloned().collect();
    build_dictionaries(&proofs, &descriptions())
}

pub fn checker() -> FakeChecker {
    FakeChecker::load(&fixtures().join("checker.jsonl")).expect("checker fixtures load")
}

pub fn replay_store() -> ReplayStore {
    ReplayStore::open(fixtures().join("replay"))
}

pub fn replay() -> ReplayBackend {
    ReplayBackend::new(replay_store())
}

/// Persona proofs evaluated for tactic accuracy.
pub fn eval_correct(corpus: &Corpus) -> Vec<AnnotatedProof> {
    let mut v = corpus.select(Persona::EquationBased, Label::Correct);
    v.extend(corpus.select(Persona::JustificationBased, Label::Correct));
    v
}

pub fn eval_incorrect(corpus: &Corpus) -> Vec<AnnotatedProof> {
    corpus
        .proofs()
        .filter(|p| p.label == Label::Incorrect)
        .cloned()
        .collect()
}

pub fn staff_map(corpus: &Corpus) -> BTreeMap<String, AnnotatedProof> {
    corpus
        .theorems()
        .iter()
        .filter_map(|t| {
            corpus
                .staff_solution(&t.name)
                .map(|p| (t.name.clone(), p.clone()))
        })
        .collect()
}

pub fn search_config(corpus: &Corpus, theorem: &str) -> SearchConfig {
    let spec = corpus.theorem(theorem).expect("theorem in corpus");
    let all = corpus.theorems();
    SearchConfig {
        forbidden: forbidden_theorems(&spec, &all),
        world_premises: world_premises(corpus.proofs(), &spec.world),
        ..SearchConfig::default()
    }
}

fn step(corpus: &Corpus, decl: &str, index: usize) -> String {
    let p = corpus
        .proofs()
        .find(|p| p.decl_name() == decl)
        .unwrap_or_else(|| panic!("{decl} in corpus"));
    p.steps[index - 1].nl.clone()
}

/// The answers recorded in the replay store. Most steps are answered with
/// the annotated tactic; these few are not, so the store also exercises
/// state-phase matches, swapped rewrites and failing tactics.
pub fn recording_oracle(corpus: &Corpus) -> CorpusOracle {
    let mut o = CorpusOracle::new(corpus);
    let d = "zero_add_equation";
    o.override_step(d, &step(corpus, d, 1), "induction n with k hk");
    o.override_step(d, &step(corpus, d, 2), "rw[add_zero]");
    o.override_step(d, &step(corpus, d, 5), "rw [hk]");
    o.override_whole(
        d,
        &[
            "induction n with k hk",
            "rw[add_zero]",
            "rfl",
            "rw [add_succ]",
            "rw [hk]",
            "rfl",
        ],
    );
    let d = "succ_add_equation";
    o.override_step(d, &step(corpus, d, 6), "rw [add_succ]");
    o.override_step(d, &step(corpus, d, 7), "rw [hd]");
    let d = "add_assoc_justification";
    o.override_step(d, &step(corpus, d, 9), "exact hd");
    let mut whole: Vec<String> = corpus
        .proofs()
        .find(|p| p.decl_name() == d)
        .expect("fixture proof")
        .tactics();
    *whole.last_mut().unwrap() = "exact hd".into();
    o.override_whole(d, &whole.iter().map(String::as_str).collect::<Vec<_>>());
    o.override_whole(
        "eq_succ_of_ne_zero_equation",
        &["induction a with d _", "tauto", "use d"],
    );

    let base = [
        "induction b with d hd",
        "rw [add_zero]",
        "rw [zero_add]",
        "rfl",
        "rw [succ_add]",
        "rw [add_succ]",
    ];
    o.add_candidates("add_comm_incorrect", &base, true, &["rw [add_comm]"]);
    o.add_candidates("add_comm_incorrect", &base, false, &["symm"]);
    o.add_candidates(
        "eq_succ_of_ne_zero_incorrect",
        &["induction a with d _"],
        true,
        &["use d"],
    );
    o.set_feedback(
        "eq_succ_of_ne_zero_incorrect",
        &serde_json::json!({
            "Type": "Inducting on the incorrect variable",
            "Message": "You are incorrectly inducting on the variable 'a' instead of its successor form, which leads to confusion in your proof.",
            "Question": "Do you think you should consider the structure of 'a' in terms of its base case and successor?",
            "Informalization": "The next step is to use the fact that if 'a' is a successor, you should analyze 'a' as 'succ d' for some natural number 'd'.",
        })
        .to_string(),
    );
    o.set_feedback(
        "add_comm_incorrect",
        &serde_json::json!({
            "Type": "Failing to apply the inductive hypothesis",
            "Message": "Your goal is succ (a + d) = succ (d + a), and the two sides are not yet the same.",
            "Question": "Which assumption tells you how a + d relates to d + a?",
            "Informalization": "The next step is to rewrite a + d as d + a using the inductive hypothesis.",
        })
        .to_string(),
    );
    o
}

/// Every evaluation configuration whose prompts are in the replay store.
pub const EVAL_CONFIGS: [(Mode, bool); 4] = [
    (Mode::Step, true),
    (Mode::Step, false),
    (Mode::Whole, true),
    (Mode::Whole, false),
];

pub fn examples(mode: Mode) -> Vec<FewShot> {
    match mode {
        Mode::Step => default_step_examples(),
        Mode::Whole => default_whole_examples(),
    }
}

pub fn run_eval<L: LlmBackend + ?Sized>(
    corpus: &Corpus,
    mode: Mode,
    staff: bool,
    llm: &mut L,
) -> (EvalReport, Vec<VerdictRecord>) {
    let dicts = dictionaries(corpus);
    let staff_map = staff_map(corpus);
    let examples = examples(mode);
    let knobs = Knobs::default();
    let setup = EvalSetup {
        mode,
        theorem_dict: &dicts.theorems,
        tactic_dict: &dicts.tactics,
        examples: &examples,
        staff: staff.then_some(&staff_map),
        knobs: &knobs,
    };
    let mut checker = checker();
    evaluate(
        &eval_correct(corpus),
        &eval_incorrect(corpus),
        &setup,
        llm,
        &mut checker,
    )
}

/// Tutors one fixture proof end to end, with the staff solution in the prompt.
pub fn run_tutor<L: LlmBackend + ?Sized>(corpus: &Corpus, decl: &str, llm: &mut L) -> TutorReport {
    let proof = corpus
        .proofs()
        .find(|p| p.decl_name() == decl)
        .expect("fixture proof")
        .clone();
    let dicts = dictionaries(corpus);
    let examples = default_step_examples();
    let knobs = Knobs::default();
    let staff = corpus.staff_solution(&proof.theorem.name);
    let ctx = peano_tutor::autoformalizer::PromptContext {
        theorem_dict: &dicts.theorems,
        tactic_dict: &dicts.tactics,
        examples: &examples,
        staff_solution: staff,
        knobs: &knobs,
    };
    let config = search_config(corpus, &proof.theorem.name);
    tutor_proof(
        &proof.nl_steps(),
        &proof.theorem,
        &ctx,
        &config,
        llm,
        &mut checker(),
    )
    .expect("tutoring succeeds")
}

pub fn run_cold_start<L: LlmBackend + ?Sized>(corpus: &Corpus, theorem: &str, llm: &mut L) -> Hint {
    let spec = corpus.theorem(theorem).expect("theorem");
    let config = search_config(corpus, theorem);
    request_hint(
        &spec,
        &[],
        corpus.staff_solution(theorem),
        &config,
        llm,
        &mut checker(),
    )
    .expect("cold start succeeds")
}

/// Interactive sessions the service tests replay: (theorem, proof whose NL
/// steps the student submits, step count after which a hint is requested).
pub const SESSIONS: [(&str, &str, Option<usize>); 3] = [
    ("add_comm", "add_comm_incorrect", Some(3)),
    (
        "eq_succ_of_ne_zero",
        "eq_succ_of_ne_zero_incorrect",
        Some(1),
    ),
    ("zero_add", "zero_add_equation", None),
];

/// One session driven through the library the way the service drives it:
/// steps are checked against the theorem's own header, and the first
/// erroring step is explained.
pub fn run_session<L: LlmBackend + ?Sized>(
    corpus: &Corpus,
    theorem: &str,
    source: &str,
    hint_after: Option<usize>,
    llm: &mut L,
) {
    let spec = corpus.theorem(theorem).expect("theorem");
    let nl = corpus
        .proofs()
        .find(|p| p.decl_name() == source)
        .expect("fixture proof")
        .nl_steps();
    let dicts = dictionaries(corpus);
    let examples = default_step_examples();
    let knobs = Knobs::default();
    let staff = corpus.staff_solution(theorem);
    let ctx = peano_tutor::autoformalizer::PromptContext {
        theorem_dict: &dicts.theorems,
        tactic_dict: &dicts.tactics,
        examples: &examples,
        staff_solution: staff,
        knobs: &knobs,
    };
    let config = search_config(corpus, theorem);
    let mut checker = checker();
    let mut prior: Vec<String> = Vec::new();
    for (i, step) in nl.iter().enumerate() {
        if hint_after == Some(i) {
            request_hint(&spec, &prior, staff, &config, llm, &mut checker).expect("hint");
        }
        let attempt = formalize_step(&spec, &prior, step, &ctx, llm, &mut checker).expect("step");
        let StepAttempt::Checked { step } = attempt else {
            break;
        };
        prior.push(step.tactic.clone());
        match step.result.status {
            CheckStatus::Error => {
                let msg = step.result.message.clone().unwrap_or_default();
                explain_error(&spec, &prior, &msg, &config, llm, &mut checker)
                    .expect("explanation");
                break;
            }
            CheckStatus::Complete => break,
            CheckStatus::Incomplete => {}
        }
    }
}

/// Every scenario whose prompts the replay store must answer.
pub fn run_all_scenarios<L: LlmBackend + ?Sized>(corpus: &Corpus, llm: &mut L) {
    for (mode, staff) in EVAL_CONFIGS {
        run_eval(corpus, mode, staff, llm);
    }
    for decl in ["add_comm_incorrect", "eq_succ_of_ne_zero_incorrect"] {
        run_tutor(corpus, decl, llm);
    }
    for t in corpus.theorems() {
        run_cold_start(corpus, &t.name, llm);
    }
    for (theorem, source, hint_after) in SESSIONS {
        run_session(corpus, theorem, source, hint_after, llm);
    }
}
