//! One file per session in the export format, written before a mutation is
//! acknowledged.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::format::{export_session, import_session_as, ImportError};
use crate::session::{new_session_id, SessionError, SessionState};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown session {0}")]
    NotFound(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("storage error: {0}")]
    Storage(#[from] std::io::Error),
    #[error("{file}: {source}")]
    Corrupt {
        file: PathBuf,
        #[source]
        source: ImportError,
    },
}

type Shared = Arc<Mutex<SessionState>>;

#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    sessions: Mutex<HashMap<String, Shared>>,
}

impl SessionStore {
    /// Opens (creating if needed) `dir` and loads every stored session. Each
    /// file must replay to its stored document.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else {
                continue;
            };
            let bytes = fs::read(&path)?;
            let state =
                import_session_as(&bytes, id.clone()).map_err(|source| StoreError::Corrupt {
                    file: path.clone(),
                    source,
                })?;
            sessions.insert(id, Arc::new(Mutex::new(state)));
        }
        tracing::info!(count = sessions.len(), dir = %dir.display(), "loaded sessions");
        Ok(SessionStore {
            dir,
            sessions: Mutex::new(sessions),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<_> = self.map().keys().cloned().collect();
        ids.sort();
        ids
    }

    pub fn create(&self) -> Result<String, StoreError> {
        let state = SessionState::new(new_session_id());
        let id = state.session_id().to_owned();
        self.insert(state)?;
        Ok(id)
    }

    /// Stores an already validated session (e.g. an import).
    pub fn insert(&self, state: SessionState) -> Result<(), StoreError> {
        self.persist(&state)?;
        self.map()
            .insert(state.session_id().to_owned(), Arc::new(Mutex::new(state)));
        Ok(())
    }

    pub fn snapshot(&self, id: &str) -> Result<SessionState, StoreError> {
        let shared = self.shared(id)?;
        let guard = shared.lock().expect("session lock poisoned");
        Ok(guard.clone())
    }

    /// Runs `f` on a copy of the session, persists the result, then commits
    /// it. Mutations of one session are serialized; a failing `f` or a failed
    /// write leaves the stored and in-memory state untouched.
    pub fn mutate<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut SessionState) -> Result<T, SessionError>,
    ) -> Result<T, StoreError> {
        let shared = self.shared(id)?;
        let mut guard = shared.lock().expect("session lock poisoned");
        let mut next = guard.clone();
        let out = f(&mut next)?;
        self.persist(&next)?;
        *guard = next;
        Ok(out)
    }

    fn shared(&self, id: &str) -> Result<Shared, StoreError> {
        self.map()
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(id.to_owned()))
    }

    fn map(&self) -> std::sync::MutexGuard<'_, HashMap<String, Shared>> {
        self.sessions.lock().expect("session map poisoned")
    }

    fn path_for(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn persist(&self, state: &SessionState) -> Result<(), StoreError> {
        let path = self.path_for(state.session_id());
        let tmp = path.with_extension("json.tmp");
        {
            let mut file = fs::File::create(&tmp)?;
            file.write_all(&export_session(state))?;
            file.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        if let Ok(dir) = fs::File::open(&self.dir) {
            let _ = dir.sync_all();
        }
        Ok(())
    }
}
