//! Reading and writing annotated proof sources: Lean files in which every
//! tactic line is preceded by exactly one `--` comment holding the
//! natural-language step.

use super::DatasetError;
use crate::proof_model::{decl_name_of, AnnotatedProof, ProofStep, PROOF_ENTRY};

pub const STATEMENT_PREFIX: &str = "-- Theorem Statement:";

/// A proof as it appears in a source file, before manifest metadata is attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedTheorem {
    pub decl_name: String,
    /// Header through `:= by`, whitespace-normalised to one line per source line.
    pub header: String,
    pub statement_nl: Option<String>,
    pub steps: Vec<ProofStep>,
    /// 1-based source line of the header.
    pub line: usize,
}

const TOP_LEVEL: &[&str] = &[
    "import ",
    "open ",
    "namespace ",
    "end",
    "section",
    "variable ",
    "set_option ",
    "#",
];

fn is_header_start(t: &str) -> bool {
    t.starts_with("theorem ") || t.starts_with("lemma ") || t.starts_with("example")
}

fn is_top_level_directive(raw: &str) -> bool {
    !raw.starts_with(char::is_whitespace) && TOP_LEVEL.iter().any(|k| raw.starts_with(k))
}

struct Builder {
    header: String,
    header_open: bool,
    statement_nl: Option<String>,
    steps: Vec<ProofStep>,
    pending: Option<(usize, String)>,
    line: usize,
}

impl Builder {
    fn finish(self) -> Result<ParsedTheorem, DatasetError> {
        if self.header_open {
            return Err(DatasetError::Header {
                line: self.line,
                reason: format!("header is not terminated by `{PROOF_ENTRY}`"),
            });
        }
        if let Some((line, _)) = self.pending {
            return Err(DatasetError::Alignment {
                line,
                reason: "comment is not followed by a tactic".into(),
            });
        }
        if self.steps.is_empty() {
            return Err(DatasetError::Alignment {
                line: self.line,
                reason: "proof has no steps".into(),
            });
        }
        let decl_name = decl_name_of(&self.header)
            .ok_or_else(|| DatasetError::Header {
                line: self.line,
                reason: "missing declaration name".into(),
            })?
            .to_string();
        Ok(ParsedTheorem {
            decl_name,
            header: self.header,
            statement_nl: self.statement_nl,
            steps: self.steps,
            line: self.line,
        })
    }
}

/// Parses every annotated proof in `text`, in file order.
pub fn parse_annotated_file(text: &str) -> Result<Vec<ParsedTheorem>, DatasetError> {
    let mut out = Vec::new();
    let mut current: Option<Builder> = None;
    let mut statement: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }

        if let Some(b) = current.as_mut().filter(|b| b.header_open) {
            if t.starts_with("--") || is_header_start(t) {
                return Err(DatasetError::Header {
                    line: b.line,
                    reason: format!("header is not terminated by `{PROOF_ENTRY}`"),
                });
            }
            b.header.push('\n');
            b.header.push_str(raw.trim_end());
            b.header_open = !t.ends_with(PROOF_ENTRY);
            continue;
        }

        if let Some(rest) = t.strip_prefix(STATEMENT_PREFIX) {
            if let Some(b) = current.take() {
                out.push(b.finish()?);
            }
            statement = Some(rest.trim().to_string());
        } else if is_header_start(t) {
            if let Some(b) = current.take() {
                out.push(b.finish()?);
            }
            current = Some(Builder {
                header: raw.trim_end().to_string(),
                header_open: !t.ends_with(PROOF_ENTRY),
                statement_nl: statement.take(),
                steps: Vec::new(),
                pending: None,
                line: lineno,
            });
        } else if is_top_level_directive(raw) {
            if let Some(b) = current.take() {
                out.push(b.finish()?);
            }
        } else if let Some(b) = current.as_mut() {
            if let Some(comment) = t.strip_prefix("--") {
                if let Some((first, _)) = &b.pending {
                    return Err(DatasetError::Alignment {
                        line: *first,
                        reason: "two comment lines without a tactic between them".into(),
                    });
                }
                b.pending = Some((lineno, comment.trim().to_string()));
            } else {
                let tactic = match t.split_once("--") {
                    Some((code, _)) => code.trim_end(),
                    None => t,
                };
                let (_, nl) = b.pending.take().ok_or_else(|| DatasetError::Alignment {
                    line: lineno,
                    reason: format!("tactic `{tactic}` has no preceding comment"),
                })?;
                b.steps.push(ProofStep::new(nl, tactic));
            }
        }
    }
    if let Some(b) = current.take() {
        out.push(b.finish()?);
    }
    if out.is_empty() {
        return Err(DatasetError::Header {
            line: 0,
            reason: "no theorem header found".into(),
        });
    }
    Ok(out)
}

/// Renders a proof in the annotated source format.
pub fn serialize_proof(proof: &AnnotatedProof) -> String {
    let mut s = String::new();
    let nl = proof.theorem.statement_nl.trim();
    if !nl.is_empty() {
        s.push_str(STATEMENT_PREFIX);
        s.push(' ');
        s.push_str(nl);
        s.push('\n');
    }
    s.push_str(proof.theorem.statement_fl.trim_end());
    s.push('\n');
    for step in &proof.steps {
        s.push_str("  -- ");
        s.push_str(step.nl.trim());
        s.push_str("\n  ");
        s.push_str(step.tactic.trim());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const ADD_COMM_STAFF: &str = "\
theorem add_comm_staff_solution (a b : ℕ) : a + b = b + a := by
  -- Induct on b, with d = 0 as the base case and the inductive hypothesis a + d = d + a. There are now two proof goals, prove base case: a + 0 = 0 + a and the inductive step: a + succ d = succ d + a
  induction b with d hd
  -- First prove base case. Simplify LHS a + 0 to a.
  rw [add_zero]
  -- Simplify RHS 0 + a to a
  rw [zero_add]
  -- Prove LHS and RHS are equal, a = a, completing the base case.
  rfl
  -- Now prove the inductive step. Rewrite LHS a + succ (d) to succ (a + d)
  rw [add_succ]
  -- Rewrite RHS succ (d) + a to succ (d + a)
  rw [succ_add]
  -- Rewrite LHS succ (a + d) to succ (d + a) using the inductive hypothesis
  rw [hd]
  -- Prove succ LHS and RHS are equal, (d + a) = succ (d + a), completing the proof
  rfl
";

    const ADD_COMM_INCORRECT: &str = "\
theorem add_comm_incorrect (a b : ℕ) : a + b = b + a := by
  -- Start by inducting on b
  induction b with d hd
  -- We start with the base case using properties of addition by 0 we can rewrite a + 0 to a on the LHS
  rw [add_zero]
  -- using properties of addition by 0 we can rewrite 0 + a to a on the RHS
  rw [zero_add]
  -- since both sides are equal, we are done with the base case
  rfl
  -- Now to the (n+1) step. using properties of successors, succ (n) + a -> succ (n + a) and substitute this into the RHS
  rw [succ_add]
  -- using properties of succession, we substitute a + succ(n) -> succ(a+n) on the RHS
  rw [add_succ]
  -- since both sides are equal, we are done with the proof
  rfl
";

    #[test]
    fn staff_solution_listing() {
        let parsed = parse_annotated_file(ADD_COMM_STAFF).unwrap();
        assert_eq!(parsed.len(), 1);
        let p = &parsed[0];
        assert_eq!(p.decl_name, "add_comm_staff_solution");
        assert_eq!(p.steps.len(), 8);
        assert_eq!(p.steps[0].tactic, "induction b with d hd");
        assert_eq!(
            p.steps[1].nl,
            "First prove base case. Simplify LHS a + 0 to a."
        );
        assert_eq!(p.statement_nl, None);
    }

    #[test]
    fn incorrect_listing_lacks_hypothesis_step() {
        let p = &parse_annotated_file(ADD_COMM_INCORRECT).unwrap()[0];
        assert_eq!(p.steps.len(), 7);
        assert!(p.steps.iter().all(|s| s.tactic != "rw [hd]"));
    }

    #[test]
    fn statement_comment_and_inline_comments() {
        let src = "\
-- Theorem Statement: Prove that if a is not equal to 0, then a is the successor of some natural number.
  theorem eq_succ_of_ne_zero_incorrect (a : ℕ) (ha : a ≠ 0) : ∃ n, a = succ n := by
  -- We use induction on a.
  induction a with d _
  -- For the inductive step, we set n to be d which gives us the goal succ d = succ d
  use d -- incorrect
  -- Since the LHS and RHS are equal, we can use reflexivity to prove the goal.
  rfl -- incorrect
";
        let p = &parse_annotated_file(src).unwrap()[0];
        assert_eq!(
            p.statement_nl.as_deref(),
            Some("Prove that if a is not equal to 0, then a is the successor of some natural number.")
        );
        assert_eq!(p.steps[1].tactic, "use d");
        assert_eq!(p.steps[2].tactic, "rfl");
    }

    #[test]
    fn two_tactics_in_a_row() {
        let src = "theorem t : 0 = 0 := by\n  -- one\n  rfl\n  rfl\n";
        assert!(matches!(
            parse_annotated_file(src),
            Err(DatasetError::Alignment { line: 4, .. })
        ));
    }

    #[test]
    fn dangling_and_doubled_comments() {
        let dangling = "theorem t : 0 = 0 := by\n  -- one\n  rfl\n  -- trailing\n";
        assert!(matches!(
            parse_annotated_file(dangling),
            Err(DatasetError::Alignment { line: 4, .. })
        ));
        let doubled = "theorem t : 0 = 0 := by\n  -- one\n  -- two\n  rfl\n";
        assert!(matches!(
            parse_annotated_file(doubled),
            Err(DatasetError::Alignment { .. })
        ));
    }

    #[test]
    fn header_errors() {
        assert!(matches!(
            parse_annotated_file(""),
            Err(DatasetError::Header { .. })
        ));
        let open = "theorem t : 0 = 0\n  -- one\n  rfl\n";
        assert!(matches!(
            parse_annotated_file(open),
            Err(DatasetError::Header { line: 1, .. })
        ));
    }

    #[test]
    fn multiple_theorems_and_directives() {
        let src = format!(
            "import Game\nopen MyNat\n\n{ADD_COMM_STAFF}\ntheorem t2 (n : ℕ)\n    : n = n := by\n  -- done\n  rfl\nend MyNat\n"
        );
        let parsed = parse_annotated_file(&src).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[1].decl_name, "t2");
        assert_eq!(parsed[1].header, "theorem t2 (n : ℕ)\n    : n = n := by");
    }
}
