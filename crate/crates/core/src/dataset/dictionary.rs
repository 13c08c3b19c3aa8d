//! Theorem and tactic dictionaries: every formal name used in a corpus,
//! paired with an instructor-written description.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::proof_model::AnnotatedProof;
use crate::state_match::lexer::{identifiers, longest_identifier_at};

pub const MISSING_DESCRIPTION: &str = "(no description available)";

/// Tactic combinators whose argument is itself a tactic.
const COMBINATORS: &[&str] = &[
    "repeat",
    "try",
    "all_goals",
    "any_goals",
    "focus",
    "iterate",
];

/// Words in tactic syntax that are neither premises nor bound names.
const KEYWORDS: &[&str] = &[
    "at",
    "with",
    "using",
    "only",
    "generalizing",
    "by",
    "fun",
    "in",
    "if",
    "then",
    "else",
    "this",
    "from",
    "show",
    "calc",
    "do",
];

/// Tactics whose remaining identifiers all introduce new local names.
const BINDERS: &[&str] = &["intro", "intros", "rintro", "obtain", "rcases", "set"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PremiseKind {
    Theorem,
    Tactic,
}

impl fmt::Display for PremiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PremiseKind::Theorem => "theorem",
            PremiseKind::Tactic => "tactic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseDictionary {
    pub kind: PremiseKind,
    pub entries: BTreeMap<String, String>,
}

impl PremiseDictionary {
    pub fn new(kind: PremiseKind) -> Self {
        PremiseDictionary {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// One `name: description` line per entry, sorted by name.
    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}: {v}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Curated descriptions, stored as TOML with `[theorems]` and `[tactics]` tables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptions {
    #[serde(default)]
    pub theorems: BTreeMap<String, String>,
    #[serde(default)]
    pub tactics: BTreeMap<String, String>,
}

impl Descriptions {
    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        toml::from_str(text).map_err(|e| DatasetError::Manifest(format!("descriptions: {e}")))
    }

    fn table(&self, kind: PremiseKind) -> &BTreeMap<String, String> {
        match kind {
            PremiseKind::Theorem => &self.theorems,
            PremiseKind::Tactic => &self.tactics,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingDescription {
    pub kind: PremiseKind,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionaries {
    pub theorems: PremiseDictionary,
    pub tactics: PremiseDictionary,
    pub missing: Vec<MissingDescription>,
}

/// Names a proof uses: tactic names and theorem (premise) names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UsedNames {
    pub tactics: BTreeSet<String>,
    pub theorems: BTreeSet<String>,
}

/// Names bound by the header's binder groups, e.g. `a b` and `h` in
/// `theorem t (a b : ℕ) (h : a = b) : ...`.
pub fn header_binders(header: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut depth = 0usize;
    let mut group = String::new();
    for c in header.chars() {
        match c {
            '(' | '{' | '[' | '⦃' => {
                if depth == 0 {
                    group.clear();
                } else {
                    group.push(c);
                }
                depth += 1;
            }
            ')' | '}' | ']' | '⦄' if depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    if let Some((names, _)) = group.split_once(':') {
                        out.extend(identifiers(names).map(str::to_string));
                    }
                } else {
                    group.push(c);
                }
            }
            _ if depth > 0 => group.push(c),
            _ => {}
        }
    }
    out
}

/// Splits leading combinators off a tactic: `repeat rw [h]` yields
/// `["repeat", "rw"]` and the argument text `[h]`.
fn tactic_heads(tactic: &str) -> (Vec<&str>, &str) {
    let mut heads = Vec::new();
    let mut rest = tactic.trim().trim_start_matches('·').trim_start();
    while let Some(name) = longest_identifier_at(rest, 0) {
        heads.push(name);
        rest = rest[name.len()..].trim_start();
        if !COMBINATORS.contains(&name) {
            break;
        }
    }
    (heads, rest)
}

/// Identifiers bound by a tactic line.
fn introduced_names(heads: &[&str], args: &str) -> Vec<String> {
    let head = heads.last().copied().unwrap_or_default();
    if BINDERS.contains(&head) {
        let binding = args.split(":=").next().unwrap_or_default();
        let binding = binding.split(" : ").next().unwrap_or_default();
        return identifiers(binding).map(str::to_string).collect();
    }
    if head == "have" || head == "let" {
        return identifiers(args).take(1).map(str::to_string).collect();
    }
    let ids: Vec<&str> = identifiers(args).collect();
    match ids.iter().position(|&w| w == "with") {
        Some(p) => ids[p + 1..].iter().map(|s| s.to_string()).collect(),
        None => vec![],
    }
}

/// Tactic and theorem names used by one proof. Identifiers bound by the
/// header or introduced by earlier tactics are local names, not premises.
pub fn used_names(proof: &AnnotatedProof) -> UsedNames {
    let mut used = UsedNames::default();
    let mut locals = header_binders(&proof.theorem.statement_fl);
    for step in &proof.steps {
        let (heads, args) = tactic_heads(&step.tactic);
        used.tactics.extend(heads.iter().map(|h| h.to_string()));
        let intro = introduced_names(&heads, args);
        locals.extend(intro);
        for id in identifiers(args) {
            if !KEYWORDS.contains(&id) && !locals.contains(id) && !is_tactic_keyword(id) {
                used.theorems.insert(id.to_string());
            }
        }
    }
    used
}

/// Tactic names that appear as arguments, e.g. the `rw` in `repeat rw [h]`
/// after combinator splitting has failed to catch it.
fn is_tactic_keyword(id: &str) -> bool {
    matches!(id, "rw" | "rfl" | "exact" | "apply" | "intro")
}

/// Builds both dictionaries from the names used across `proofs`. Names
/// with no curated description get a placeholder and are reported.
pub fn build_dictionaries(proofs: &[AnnotatedProof], descriptions: &Descriptions) -> Dictionaries {
    let mut tactic_names = BTreeSet::new();
    let mut theorem_names = BTreeSet::new();
    for p in proofs {
        let used = used_names(p);
        tactic_names.extend(used.tactics);
        theorem_names.extend(used.theorems);
    }
    let mut missing = Vec::new();
    let mut fill = |kind: PremiseKind, names: BTreeSet<String>| {
        let mut dict = PremiseDictionary::new(kind);
        for name in names {
            let desc = match descriptions.table(kind).get(&name) {
                Some(d) if !d.trim().is_empty() => d.trim().to_string(),
                _ => {
                    missing.push(MissingDescription {
                        kind,
                        name: name.clone(),
                    });
                    MISSING_DESCRIPTION.to_string()
                }
            };
            dict.entries.insert(name, desc);
        }
        dict
    };
    let theorems = fill(PremiseKind::Theorem, theorem_names);
    let tactics = fill(PremiseKind::Tactic, tactic_names);
    Dictionaries {
        theorems,
        tactics,
        missing,
    }
}
