use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BridgeError, CheckRequest, CheckResult, CheckStatus, Checker, Position};
use crate::proof_model::parse_proof_state;

/// Hex SHA-256 of a tactic list; list boundaries are part of the hash.
pub fn tactic_list_hash(tactics: &[String]) -> String {
    let mut hasher = Sha256::new();
    for t in tactics {
        hasher.update((t.len() as u64).to_le_bytes());
        hasher.update(t.as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// One line of a checker fixture file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRecord {
    /// Lean declaration name from the theorem header.
    pub theorem: String,
    pub tactics: Vec<String>,
    pub status: CheckStatus,
    /// Raw goal text for incomplete results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goals: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
}

impl FixtureRecord {
    pub fn to_result(&self) -> Result<CheckResult, BridgeError> {
        let result = match self.status {
            CheckStatus::Complete => CheckResult::complete(),
            CheckStatus::Incomplete => {
                let raw = self.goals.as_deref().unwrap_or_default();
                let state = parse_proof_state(raw).map_err(|e| {
                    BridgeError::Protocol(format!("fixture {} goals: {e}", self.theorem))
                })?;
                CheckResult::incomplete(state)
            }
            CheckStatus::Error => {
                CheckResult::error(self.message.clone().unwrap_or_default(), self.position)
            }
        };
        result.validate().map_err(BridgeError::Protocol)?;
        Ok(result)
    }

    pub fn from_result(theorem: &str, tactics: &[String], result: &CheckResult) -> Self {
        FixtureRecord {
            theorem: theorem.to_string(),
            tactics: tactics.to_vec(),
            status: result.status,
            goals: result.goal_state.as_ref().map(|s| s.render()),
            message: result.message.clone(),
            position: result.error_position,
        }
    }
}

/// A checker answering from recorded results, keyed by theorem name and
/// tactic-list hash. Requests with no recorded result are an error rather
/// than a guess.
#[derive(Debug, Default, Clone)]
pub struct FakeChecker {
    table: HashMap<(String, String), CheckResult>,
    calls: usize,
}

impl FakeChecker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records<I: IntoIterator<Item = FixtureRecord>>(
        records: I,
    ) -> Result<Self, BridgeError> {
        let mut fake = FakeChecker::new();
        for r in records {
            fake.insert_record(&r)?;
        }
        Ok(fake)
    }

    /// Loads a JSON-lines fixture file; blank lines and `#` lines are skipped.
    pub fn load(path: &Path) -> Result<Self, BridgeError> {
        let file = fs::File::open(path).map_err(|e| {
            BridgeError::BackendUnavailable(format!("fixture file {}: {e}", path.display()))
        })?;
        let mut fake = FakeChecker::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let record: FixtureRecord = serde_json::from_str(line)
                .map_err(|e| BridgeError::Protocol(format!("{}:{}: {e}", path.display(), n + 1)))?;
            fake.insert_record(&record)?;
        }
        Ok(fake)
    }

    pub fn insert_record(&mut self, record: &FixtureRecord) -> Result<(), BridgeError> {
        let result = record.to_result()?;
        self.insert(&record.theorem, &record.tactics, result);
        Ok(())
    }

    pub fn insert(&mut self, theorem: &str, tactics: &[String], result: CheckResult) {
        self.table
            .insert((theorem.to_string(), tactic_list_hash(tactics)), result);
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Number of `check` calls answered or refused so far.
    pub fn calls(&self) -> usize {
        self.calls
    }
}

impl Checker for FakeChecker {
    fn check(&mut self, req: &CheckRequest) -> Result<CheckResult, BridgeError> {
        self.calls += 1;
        req.validate()?;
        let name = req
            .theorem_name()
            .ok_or_else(|| BridgeError::InvalidRequest("header has no theorem name".into()))?;
        self.table
            .get(&(name.to_string(), tactic_list_hash(&req.tactics)))
            .cloned()
            .ok_or_else(|| {
                BridgeError::BackendUnavailable(format!(
                    "no fixture for {name} with tactics {:?}",
                    req.tactics
                ))
            })
    }
}

/// Wraps a checker and appends every answered request to a fixture file.
pub struct RecordingChecker<C> {
    inner: C,
    out: fs::File,
}

impl<C: Checker> RecordingChecker<C> {
    pub fn new(inner: C, path: &Path) -> Result<Self, BridgeError> {
        let out = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        Ok(RecordingChecker { inner, out })
    }
}

impl<C: Checker> Checker for RecordingChecker<C> {
    fn check(&mut self, req: &CheckRequest) -> Result<CheckResult, BridgeError> {
        let result = self.inner.check(req)?;
        let name = req.theorem_name().unwrap_or_default();
        let record = FixtureRecord::from_result(name, &req.tactics, &result);
        let line =
            serde_json::to_string(&record).map_err(|e| BridgeError::Protocol(e.to_string()))?;
        writeln!(self.out, "{line}")?;
        Ok(result)
    }
}
