//! In-memory session table backed by one JSONL log per session.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use moondisp_core::engine::{replay, LogError, LoggedSession, SessionConfig, SessionHeader};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;
use tokio::sync::{Mutex, RwLock};

pub type SharedSession = Arc<Mutex<LoggedSession<File>>>;

/// Random bytes per session id; 16 bytes encode to 22 URL-safe characters.
const ID_BYTES: usize = 16;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("data directory {path}: {source}")]
    DataDir {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("session log i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug)]
pub struct Store {
    data_dir: PathBuf,
    sessions: RwLock<HashMap<String, SharedSession>>,
    ids: std::sync::Mutex<ChaCha20Rng>,
}

impl Store {
    /// Open `data_dir`, creating it if needed, and restore every session
    /// logged there. `id_seed` fixes the id generator (tests only); otherwise
    /// it is seeded from the OS once at startup.
    pub fn open(data_dir: impl Into<PathBuf>, id_seed: Option<u64>) -> Result<Self, StoreError> {
        let data_dir = data_dir.into();
        let dir_err = |source| StoreError::DataDir {
            path: data_dir.clone(),
            source,
        };
        std::fs::create_dir_all(&data_dir).map_err(dir_err)?;

        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&data_dir)
            .map_err(dir_err)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            match restore(&path) {
                Ok(session) => {
                    let id = session.header().session_id.clone();
                    if path.file_stem().and_then(|s| s.to_str()) != Some(id.as_str()) {
                        tracing::warn!(path = %path.display(), "log file name does not match its session id; skipped");
                        continue;
                    }
                    sessions.insert(id, Arc::new(Mutex::new(session)));
                }
                Err(e) => tracing::error!(path = %path.display(), error = %e, "could not restore session; skipped"),
            }
        }
        tracing::info!(count = sessions.len(), dir = %data_dir.display(), "sessions restored");

        let rng = match id_seed {
            Some(seed) => ChaCha20Rng::seed_from_u64(seed),
            None => ChaCha20Rng::from_os_rng(),
        };
        Ok(Self {
            data_dir,
            sessions: RwLock::new(sessions),
            ids: std::sync::Mutex::new(rng),
        })
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    pub fn log_path(&self, id: &str) -> PathBuf {
        self.data_dir.join(format!("{id}.jsonl"))
    }

    pub async fn get(&self, id: &str) -> Option<SharedSession> {
        self.sessions.read().await.get(id).cloned()
    }

    pub async fn is_empty(&self) -> bool {
        self.sessions.read().await.is_empty()
    }

    pub async fn len(&self) -> usize {
        self.sessions.read().await.len()
    }

    /// Persist and register a new session. The config must already be valid.
    pub async fn create(&self, config: SessionConfig) -> Result<SessionHeader, StoreError> {
        let mut sessions = self.sessions.write().await;
        let (id, file) = loop {
            let id = self.fresh_id();
            if sessions.contains_key(&id) {
                continue;
            }
            match OpenOptions::new()
                .append(true)
                .create_new(true)
                .open(self.log_path(&id))
            {
                Ok(file) => break (id, file),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e.into()),
            }
        };
        let header = SessionHeader {
            session_id: id.clone(),
            created_at: humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string(),
            config,
        };
        let session = LoggedSession::create(header.clone(), file)?;
        sessions.insert(id, Arc::new(Mutex::new(session)));
        Ok(header)
    }

    fn fresh_id(&self) -> String {
        let mut bytes = [0u8; ID_BYTES];
        self.ids.lock().expect("id generator poisoned").fill_bytes(&mut bytes);
        URL_SAFE_NO_PAD.encode(bytes)
    }
}

/// Replay one log, cut off any torn tail, and reopen it for appending.
fn restore(path: &Path) -> Result<LoggedSession<File>, StoreError> {
    let replayed = replay(BufReader::new(File::open(path)?))?;
    let file = OpenOptions::new().append(true).open(path)?;
    if file.metadata()?.len() > replayed.valid_len {
        tracing::warn!(path = %path.display(), "dropping torn final record");
        file.set_len(replayed.valid_len)?;
    }
    Ok(LoggedSession::resume(replayed, file)?)
}
