//! Checking natural-language Peano arithmetic proofs step by step against
//! Lean, finding a verified next step when a student goes wrong, and
//! turning both into tutoring feedback.

pub mod autoformalizer;
pub mod dataset;
pub mod eval;
pub mod feedback;
pub mod lean_bridge;
pub mod llm;
pub mod next_step;
pub mod oracle;
pub mod proof_model;
pub mod state_match;
pub mod template;
pub mod tutor;
