//! Corpus manifests: the JSON sidecar that attaches curriculum metadata
//! (world, ordering, persona, label) to declarations in annotated files.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{parse_annotated_file, serialize_proof, DatasetError, ParsedTheorem};
use crate::proof_model::{AnnotatedProof, Label, Persona, TheoremSpec};

fn correct() -> Label {
    Label::Correct
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Curriculum theorem name shared by every persona's proof of it.
    pub theorem: String,
    /// Declaration name inside `file`.
    pub decl: String,
    /// Path relative to the manifest's directory.
    pub file: PathBuf,
    pub world: String,
    pub order_index: u32,
    pub persona: Persona,
    #[serde(default = "correct")]
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped_index: Option<usize>,
    /// Overrides the `-- Theorem Statement:` comment when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement_nl: Option<String>,
}

/// One annotated source file with the proofs it contributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeanoBenchFile {
    pub path: PathBuf,
    pub proofs: Vec<AnnotatedProof>,
    pub manifest: Vec<ManifestEntry>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub files: Vec<PeanoBenchFile>,
}

impl Corpus {
    /// Loads the manifest at `path` and every file it references.
    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = fs::read_to_string(path)
            .map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
        let entries: Vec<ManifestEntry> = serde_json::from_str(&text)
            .map_err(|e| DatasetError::Manifest(format!("{}: {e}", path.display())))?;
        let root = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_entries(&root, entries)
    }

    pub fn from_entries(root: &Path, entries: Vec<ManifestEntry>) -> Result<Self, DatasetError> {
        check_ordering(&entries)?;
        let mut by_file: BTreeMap<PathBuf, Vec<ManifestEntry>> = BTreeMap::new();
        let mut order = Vec::new();
        for e in entries {
            if !by_file.contains_key(&e.file) {
                order.push(e.file.clone());
            }
            by_file.entry(e.file.clone()).or_default().push(e);
        }
        let mut files = Vec::new();
        for rel in order {
            let manifest = by_file.remove(&rel).unwrap_or_default();
            let full = root.join(&rel);
            let text = fs::read_to_string(&full)
                .map_err(|e| DatasetError::Io(format!("{}: {e}", full.display())))?;
            let parsed = parse_annotated_file(&text)?;
            let proofs = manifest
                .iter()
                .map(|entry| attach(&parsed, entry))
                .collect::<Result<Vec<_>, _>>()?;
            files.push(PeanoBenchFile {
                path: rel,
                proofs,
                manifest,
            });
        }
        Ok(Corpus {
            root: root.to_path_buf(),
            files,
        })
    }

    /// Every proof, in manifest order.
    pub fn proofs(&self) -> impl Iterator<Item = &AnnotatedProof> {
        self.files.iter().flat_map(|f| f.proofs.iter())
    }

    pub fn select(&self, persona: Persona, label: Label) -> Vec<AnnotatedProof> {
        self.proofs()
            .filter(|p| p.persona == persona && p.label == label)
            .cloned()
            .collect()
    }

    /// One spec per curriculum theorem, sorted by `order_index`. The staff
    /// solution's header is preferred when a theorem has several proofs.
    pub fn theorems(&self) -> Vec<TheoremSpec> {
        let mut seen: BTreeMap<String, &AnnotatedProof> = BTreeMap::new();
        for p in self.proofs() {
            let slot = seen.entry(p.theorem.name.clone()).or_insert(p);
            if p.persona == Persona::StaffSolution && slot.persona != Persona::StaffSolution {
                *slot = p;
            }
        }
        let mut out: Vec<TheoremSpec> = seen.values().map(|p| p.theorem.clone()).collect();
        out.sort_by_key(|t| t.order_index);
        out
    }

    pub fn theorem(&self, name: &str) -> Option<TheoremSpec> {
        self.theorems().into_iter().find(|t| t.name == name)
    }

    pub fn staff_solution(&self, theorem: &str) -> Option<&AnnotatedProof> {
        self.proofs().find(|p| {
            p.theorem.name == theorem
                && p.persona == Persona::StaffSolution
                && p.label == Label::Correct
        })
    }

    /// World names in curriculum order.
    pub fn worlds(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for t in self.theorems() {
            if !out.contains(&t.world) {
                out.push(t.world);
            }
        }
        out
    }
}

/// `order_index` must agree across a theorem's entries and differ between theorems.
fn check_ordering(entries: &[ManifestEntry]) -> Result<(), DatasetError> {
    let mut by_name: HashMap<&str, u32> = HashMap::new();
    let mut by_index: HashMap<u32, &str> = HashMap::new();
    for e in entries {
        if let Some(&idx) = by_name.get(e.theorem.as_str()) {
            if idx != e.order_index {
                return Err(DatasetError::Manifest(format!(
                    "{} has order_index {idx} and {}",
                    e.theorem, e.order_index
                )));
            }
        }
        if let Some(&other) = by_index.get(&e.order_index) {
            if other != e.theorem {
                return Err(DatasetError::Manifest(format!(
                    "order_index {} is shared by {other} and {}",
                    e.order_index, e.theorem
                )));
            }
        }
        by_name.insert(&e.theorem, e.order_index);
        by_index.insert(e.order_index, &e.theorem);
    }
    Ok(())
}

fn attach(parsed: &[ParsedTheorem], entry: &ManifestEntry) -> Result<AnnotatedProof, DatasetError> {
    let mut found = parsed.iter().filter(|p| p.decl_name == entry.decl);
    let src = found.next().ok_or_else(|| {
        DatasetError::Manifest(format!(
            "{} not found in {}",
            entry.decl,
            entry.file.display()
        ))
    })?;
    if found.next().is_some() {
        return Err(DatasetError::Manifest(format!(
            "{} declared twice in {}",
            entry.decl,
            entry.file.display()
        )));
    }
    let statement_nl = entry
        .statement_nl
        .clone()
        .or_else(|| src.statement_nl.clone())
        .unwrap_or_default();
    let theorem = TheoremSpec::new(
        &entry.theorem,
        statement_nl,
        &src.header,
        &entry.world,
        entry.order_index,
    )?;
    let proof = AnnotatedProof {
        theorem,
        steps: src.steps.clone(),
        persona: entry.persona,
        label: entry.label,
        skipped_index: entry.skipped_index,
    };
    proof.validate()?;
    Ok(proof)
}

/// Writes one annotated file per proof under `dir` plus `manifest.json`,
/// in a form `Corpus::load` reads back unchanged.
pub fn write_corpus(dir: &Path, proofs: &[AnnotatedProof]) -> Result<PathBuf, DatasetError> {
    let io = |e: std::io::Error| DatasetError::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let mut entries = Vec::new();
    for proof in proofs {
        let label = match proof.label {
            Label::Correct => "correct",
            Label::Incorrect => "incorrect",
        };
        let file = PathBuf::from(format!(
            "{}_{}_{label}.lean",
            proof.decl_name(),
            proof.persona
        ));
        fs::write(dir.join(&file), serialize_proof(proof)).map_err(io)?;
        entries.push(ManifestEntry {
            theorem: proof.theorem.name.clone(),
            decl: proof.decl_name().to_string(),
            file,
            world: proof.theorem.world.clone(),
            order_index: proof.theorem.order_index,
            persona: proof.persona,
            label: proof.label,
            skipped_index: proof.skipped_index,
            statement_nl: None,
        });
    }
    let manifest = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&entries)
        .map_err(|e| DatasetError::Manifest(e.to_string()))?;
    fs::write(&manifest, json + "\n").map_err(io)?;
    Ok(manifest)
}
