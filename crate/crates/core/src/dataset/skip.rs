//! Incorrect proofs made by deleting one step near the end of a correct one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::proof_model::{AnnotatedProof, Label, Persona};

/// 1-based step indices that may be deleted from a proof of `n` steps.
/// Empty for one-step proofs.
pub fn deletion_window(n: usize) -> Vec<usize> {
    match n {
        0 | 1 => vec![],
        2 | 3 => vec![2],
        4 => vec![3, 2],
        _ => vec![n - 1, n - 2, n - 3],
    }
}

/// Deletes one step chosen uniformly (under `seed`) from the deletion
/// window and labels the result incorrect.
pub fn skip_step(proof: &AnnotatedProof, seed: u64) -> Result<AnnotatedProof, DatasetError> {
    if proof.label != Label::Correct {
        return Err(DatasetError::NotCorrect(proof.decl_name().to_string()));
    }
    let window = deletion_window(proof.steps.len());
    if window.is_empty() {
        return Err(DatasetError::TooShort(proof.decl_name().to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deleted = window[rng.random_range(0..window.len())];

    let mut out = proof.clone();
    out.steps.remove(deleted - 1);
    out.label = Label::Incorrect;
    out.skipped_index = Some(deleted);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipReport {
    pub decl: String,
    pub reason: String,
}

/// One incorrect proof per eligible input: correct, not a staff solution,
/// at least two steps. The per-proof seeds are drawn in input order from a
/// stream seeded by `seed`, so the output depends only on the inputs.
pub fn generate_incorrect_set(
    proofs: &[AnnotatedProof],
    seed: u64,
) -> (Vec<AnnotatedProof>, Vec<SkipReport>) {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for proof in proofs {
        let proof_seed: u64 = master.random();
        let reason = if proof.persona == Persona::StaffSolution {
            Some("staff solutions are not used for incorrect proofs".to_string())
        } else if proof.label != Label::Correct {
            Some("already incorrect".to_string())
        } else {
            None
        };
        if let Some(reason) = reason {
            skipped.push(SkipReport {
                decl: proof.decl_name().to_string(),
                reason,
            });
            continue;
        }
        match skip_step(proof, proof_seed) {
            Ok(p) => out.push(p),
            Err(e) => skipped.push(SkipReport {
                decl: proof.decl_name().to_string(),
                reason: e.to_string(),
            }),
        }
    }
    (out, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof_model::{ProofStep, TheoremSpec};

    fn proof(n: usize) -> AnnotatedProof {
        AnnotatedProof {
            theorem: TheoremSpec::new("t", "", "theorem t : 0 = 0 := by", "W", 0).unwrap(),
            steps: (1..=n)
                .map(|i| ProofStep::new(format!("s{i}"), format!("t{i}")))
                .collect(),
            persona: Persona::EquationBased,
            label: Label::Correct,
            skipped_index: None,
        }
    }

    #[test]
    fn two_step_proof_loses_step_two() {
        let out = skip_step(&proof(2), 7).unwrap();
        assert_eq!(out.tactics(), vec!["t1"]);
        assert_eq!(out.skipped_index, Some(2));
        assert_eq!(out.label, Label::Incorrect);
    }

    #[test]
    fn one_step_proof_is_too_short() {
        assert!(matches!(
            skip_step(&proof(1), 0),
            Err(DatasetError::TooShort(_))
        ));
    }

    #[test]
    fn incorrect_input_rejected() {
        let p = skip_step(&proof(3), 0).unwrap();
        assert!(matches!(skip_step(&p, 0), Err(DatasetError::NotCorrect(_))));
    }

    #[test]
    fn deterministic_in_seed() {
        let p = proof(9);
        assert_eq!(skip_step(&p, 42).unwrap(), skip_step(&p, 42).unwrap());
    }

    #[test]
    fn staff_and_short_excluded() {
        let mut staff = proof(5);
        staff.persona = Persona::StaffSolution;
        let (out, report) = generate_incorrect_set(&[staff, proof(1), proof(5)], 3);
        assert_eq!(out.len(), 1);
        assert_eq!(report.len(), 2);
        assert!(generate_incorrect_set(&[], 3).0.is_empty());
    }
}
