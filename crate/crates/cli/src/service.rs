use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use peano_tutor::lean_bridge::{BridgeError, CheckRequest, CheckStatus};
use peano_tutor::llm::LlmError;
use peano_tutor::tutor::{explain_error, formalize_step, request_hint, StepAttempt, TutorError};

use crate::session::{
    goal_summaries, verdict_of, Event, HintResponse, JournalRecord, SessionRecord, SessionStatus,
    SessionView, StepResponse, TheoremView,
};
use crate::workspace::{BoxedChecker, BoxedLlm, Workspace};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("unknown theorem {0}")]
    UnknownTheorem(String),
    #[error("session {0} is complete")]
    Completed(String),
    #[error("{0}")]
    BadRequest(String),
    /// An external backend failed; the request can be retried unchanged.
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("journal: {0}")]
    Journal(String),
    #[error("{0}")]
    Internal(String),
}

impl ServiceError {
    pub fn retriable(&self) -> bool {
        matches!(self, ServiceError::Backend(_))
    }
}

impl From<TutorError> for ServiceError {
    fn from(e: TutorError) -> Self {
        if e.is_backend() {
            ServiceError::Backend(e.to_string())
        } else {
            ServiceError::Internal(e.to_string())
        }
    }
}

impl From<BridgeError> for ServiceError {
    fn from(e: BridgeError) -> Self {
        ServiceError::Backend(e.to_string())
    }
}

impl From<LlmError> for ServiceError {
    fn from(e: LlmError) -> Self {
        ServiceError::Backend(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    pub theorem: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmitStep {
    pub nl: String,
}

/// Backend handles owned by one session, created on its first request.
struct Runtime {
    llm: BoxedLlm,
    checker: BoxedChecker,
}

struct Slot {
    record: SessionRecord,
    runtime: Option<Runtime>,
}

impl Slot {
    fn runtime(&mut self, ws: &Workspace) -> Result<&mut Runtime, ServiceError> {
        if self.runtime.is_none() {
            self.runtime = Some(Runtime {
                llm: ws.llm()?,
                checker: ws.checker()?,
            });
        }
        Ok(self.runtime.as_mut().expect("just set"))
    }
}

/// Session store and request handling. Each session is processed serially
/// under its own lock; the workspace is shared read-only.
pub struct Service {
    ws: Arc<Workspace>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
    journal: Option<Mutex<File>>,
    journal_path: Option<PathBuf>,
}

impl Service {
    /// A store without persistence, for the terminal tutor.
    pub fn in_memory(ws: Arc<Workspace>) -> Self {
        Service {
            ws,
            sessions: RwLock::new(HashMap::new()),
            journal: None,
            journal_path: None,
        }
    }

    /// Opens or creates the journal at `path` and replays it. A torn final
    /// line from an interrupted write is dropped; any other bad line is an error.
    pub fn open(ws: Arc<Workspace>, path: &Path) -> Result<Self, ServiceError> {
        let jerr = |e: std::io::Error| ServiceError::Journal(format!("{}: {e}", path.display()));
        let mut sessions: HashMap<String, Slot> = HashMap::new();
        let mut valid_len = 0u64;
        if path.exists() {
            let lines: Vec<String> = BufReader::new(File::open(path).map_err(jerr)?)
                .lines()
                .collect::<Result<_, _>>()
                .map_err(jerr)?;
            let last = lines.len();
            for (i, line) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    valid_len += line.len() as u64 + 1;
                    continue;
                }
                let rec: JournalRecord = match serde_json::from_str(line) {
                    Ok(r) => r,
                    Err(e) if i + 1 == last => {
                        log::warn!("dropping torn journal line {}: {e}", i + 1);
                        break;
                    }
                    Err(e) => return Err(ServiceError::Journal(format!("line {}: {e}", i + 1))),
                };
                valid_len += line.len() as u64 + 1;
                Self::replay_record(&mut sessions, rec, i + 1)?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(jerr)?;
        if file.metadata().map_err(jerr)?.len() > valid_len {
            file.set_len(valid_len).map_err(jerr)?;
        }
        Ok(Service {
            ws,
            sessions: RwLock::new(
                sessions
                    .into_iter()
                    .map(|(k, v)| (k, Arc::new(Mutex::new(v))))
                    .collect(),
            ),
            journal: Some(Mutex::new(file)),
            journal_path: Some(path.to_path_buf()),
        })
    }

    fn replay_record(
        sessions: &mut HashMap<String, Slot>,
        rec: JournalRecord,
        line: usize,
    ) -> Result<(), ServiceError> {
        match rec.event {
            Event::Created { theorem, initial } => {
                let record = SessionRecord::new(rec.session_id.clone(), theorem, initial);
                sessions.insert(
                    rec.session_id,
                    Slot {
                        record,
                        runtime: None,
                    },
                );
            }
            event => {
                let slot = sessions.get_mut(&rec.session_id).ok_or_else(|| {
                    ServiceError::Journal(format!(
                        "line {line}: event for unknown session {}",
                        rec.session_id
                    ))
                })?;
                slot.record.apply(&event);
            }
        }
        Ok(())
    }

    pub fn workspace(&self) -> &Workspace {
        &self.ws
    }

    pub fn journal_path(&self) -> Option<&Path> {
        self.journal_path.as_deref()
    }

    fn append(&self, session_id: &str, event: &Event) -> Result<(), ServiceError> {
        let Some(journal) = &self.journal else {
            return Ok(());
        };
        let rec = JournalRecord {
            session_id: session_id.to_string(),
            event: event.clone(),
        };
        let mut line =
            serde_json::to_string(&rec).map_err(|e| ServiceError::Journal(e.to_string()))?;
        line.push('\n');
        let mut f = journal.lock().expect("journal lock");
        f.write_all(line.as_bytes())
            .and_then(|_| f.sync_data())
            .map_err(|e| ServiceError::Journal(e.to_string()))
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>, ServiceError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    fn dicts(&self) -> [&peano_tutor::dataset::PremiseDictionary; 2] {
        [&self.ws.dicts.theorems, &self.ws.dicts.tactics]
    }

    pub fn theorems(&self) -> Vec<TheoremView> {
        self.ws
            .corpus
            .theorems()
            .iter()
            .map(TheoremView::from)
            .collect()
    }

    pub fn worlds(&self) -> Vec<String> {
        self.ws.corpus.worlds()
    }

    pub fn create_session(&self, req: &CreateSession) -> Result<SessionView, ServiceError> {
        let theorem = self
            .ws
            .theorem(&req.theorem)
            .ok_or_else(|| ServiceError::UnknownTheorem(req.theorem.clone()))?;
        let mut runtime = Runtime {
            llm: self.ws.llm()?,
            checker: self.ws.checker()?,
        };
        let initial = runtime
            .checker
            .check(&CheckRequest::new(theorem.statement_fl.clone(), Vec::new()))?;
        let id = format!("s-{}", uuid::Uuid::new_v4().simple());
        let event = Event::Created {
            theorem: theorem.clone(),
            initial: initial.clone(),
        };
        self.append(&id, &event)?;
        let record = SessionRecord::new(id.clone(), theorem, initial);
        let view = SessionView::of(&record, false, &self.dicts());
        self.sessions.write().expect("session map lock").insert(
            id,
            Arc::new(Mutex::new(Slot {
                record,
                runtime: Some(runtime),
            })),
        );
        Ok(view)
    }

    pub fn submit_step(&self, id: &str, req: &SubmitStep) -> Result<StepResponse, ServiceError> {
        let nl = req.nl.trim();
        if nl.is_empty() {
            return Err(ServiceError::BadRequest("step text is empty".into()));
        }
        let slot = self.slot(id)?;
        let mut slot = slot.lock().expect("session lock");
        if slot.record.status == SessionStatus::Complete {
            return Err(ServiceError::Completed(id.to_string()));
        }
        let theorem = slot.record.theorem.clone();
        let prior = slot.record.prefix();
        let ctx = self.ws.prompt_context(&theorem);
        let config = self.ws.search_config(&theorem);
        let rt = slot.runtime(&self.ws)?;
        let attempt = formalize_step(&theorem, &prior, nl, &ctx, &mut *rt.llm, &mut *rt.checker)?;
        let explanation = match &attempt {
            StepAttempt::Checked { step } if step.result.status == CheckStatus::Error => {
                let mut tactics = prior;
                tactics.push(step.tactic.clone());
                let error = step.result.message.clone().unwrap_or_default();
                Some(explain_error(
                    &theorem,
                    &tactics,
                    &error,
                    &config,
                    &mut *rt.llm,
                    &mut *rt.checker,
                )?)
            }
            _ => None,
        };
        let event = Event::Step {
            nl: nl.to_string(),
            attempt,
            explanation,
        };
        self.append(id, &event)?;
        slot.record.apply(&event);
        let Event::Step {
            attempt,
            explanation,
            ..
        } = event
        else {
            unreachable!("built as a step event")
        };
        let verdict = verdict_of(&attempt);
        let goals = match &attempt {
            StepAttempt::Checked { step } if step.result.status == CheckStatus::Incomplete => step
                .result
                .state()
                .map(|s| goal_summaries(&s))
                .unwrap_or_default(),
            _ => Vec::new(),
        };
        Ok(StepResponse {
            verdict,
            status: slot.record.status,
            goals,
            feedback: explanation.map(|e| e.bundle),
        })
    }

    pub fn request_hint(&self, id: &str) -> Result<HintResponse, ServiceError> {
        let slot = self.slot(id)?;
        let mut slot = slot.lock().expect("session lock");
        if slot.record.status == SessionStatus::Complete {
            return Err(ServiceError::Completed(id.to_string()));
        }
        let theorem = slot.record.theorem.clone();
        let prefix = slot.record.prefix();
        let config = self.ws.search_config(&theorem);
        let staff = self.ws.staff_solution(&theorem.name).cloned();
        let rt = slot.runtime(&self.ws)?;
        let hint = request_hint(
            &theorem,
            &prefix,
            staff.as_ref(),
            &config,
            &mut *rt.llm,
            &mut *rt.checker,
        )?;
        let event = Event::Hint { hint };
        self.append(id, &event)?;
        slot.record.apply(&event);
        let Event::Hint { hint } = event else {
            unreachable!("built as a hint event")
        };
        Ok(HintResponse {
            status: slot.record.status,
            feedback: hint.bundle,
        })
    }

    pub fn view(&self, id: &str, instructor: bool) -> Result<SessionView, ServiceError> {
        let slot = self.slot(id)?;
        let slot = slot.lock().expect("session lock");
        Ok(SessionView::of(&slot.record, instructor, &self.dicts()))
    }

    /// Snapshot of every session record, for persistence checks.
    pub fn records(&self) -> Vec<SessionRecord> {
        let map = self.sessions.read().expect("session map lock");
        let mut out: Vec<SessionRecord> = map
            .values()
            .map(|s| s.lock().expect("session lock").record.clone())
            .collect();
        out.sort_by(|a, b| a.session_id.cmp(&b.session_id));
        out
    }
}
