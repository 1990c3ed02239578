//! Admin credentials and bearer sessions.
//!
//! Passwords are stored as salted Argon2id digests in `auth/users.manifest`.
//! Sessions live in memory only, so they are scoped to one running process
//! serving one repository.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use argon2::{Algorithm, Argon2, Params, Version};
use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Duration, Utc};
use parking_lot::RwLock;
use rand::rngs::OsRng;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use subtle::ConstantTimeEq;
use tracing::info;

use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::store::{Repository, USERS_FILE};

pub const MIN_PASSWORD_CHARS: usize = 8;
pub const SALT_BYTES: usize = 16;
pub const TOKEN_BYTES: usize = 32;
const DIGEST_BYTES: usize = 32;
const MAX_USERNAME_LEN: usize = 64;

/// Argon2id cost parameters. Stored alongside each credential so that a
/// cost change never invalidates existing accounts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashCost {
    pub memory_kib: u32,
    pub iterations: u32,
    pub parallelism: u32,
}

impl Default for HashCost {
    fn default() -> Self {
        HashCost {
            memory_kib: 19 * 1024,
            iterations: 2,
            parallelism: 1,
        }
    }
}

impl HashCost {
    /// The smallest parameters Argon2 accepts; for tests only.
    pub fn minimal() -> Self {
        HashCost {
            memory_kib: 8,
            iterations: 1,
            parallelism: 1,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct AdminCredential {
    username: String,
    salt: String,
    secret_digest: String,
    cost: HashCost,
}

impl fmt::Debug for AdminCredential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdminCredential")
            .field("username", &self.username)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct UsersFile {
    users: Vec<AdminCredential>,
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdminSession {
    pub token: String,
    pub username: String,
    #[serde(with = "crate::model::timestamp")]
    pub expires_at: DateTime<Utc>,
}

impl fmt::Debug for AdminSession {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdminSession")
            .field("username", &self.username)
            .field("expires_at", &self.expires_at)
            .finish_non_exhaustive()
    }
}

fn derive(password: &str, salt: &[u8], cost: HashCost) -> Result<[u8; DIGEST_BYTES]> {
    let params = Params::new(cost.memory_kib, cost.iterations, cost.parallelism, Some(DIGEST_BYTES))
        .map_err(|e| Error::Malformed(format!("argon2 parameters: {e}")))?;
    let mut out = [0u8; DIGEST_BYTES];
    Argon2::new(Algorithm::Argon2id, Version::V0x13, params)
        .hash_password_into(password.as_bytes(), salt, &mut out)
        .map_err(|e| Error::Malformed(format!("argon2: {e}")))?;
    Ok(out)
}

fn random_bytes<const N: usize>() -> [u8; N] {
    let mut b = [0u8; N];
    OsRng.fill_bytes(&mut b);
    b
}

fn make_credential(username: &str, password: &str, cost: HashCost) -> Result<AdminCredential> {
    let salt = random_bytes::<SALT_BYTES>();
    let digest = derive(password, &salt, cost)?;
    Ok(AdminCredential {
        username: username.to_owned(),
        salt: hex::encode(salt),
        secret_digest: hex::encode(digest),
        cost,
    })
}

fn check_username(username: &str) -> Result<()> {
    let ok = !username.is_empty()
        && username.len() <= MAX_USERNAME_LEN
        && username.bytes().all(|b| b.is_ascii_graphic());
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidUsername)
    }
}

/// Credential checks and the live session table for one repository.
pub struct Auth {
    repo: Arc<Repository>,
    clock: Arc<dyn Clock>,
    ttl: Duration,
    cost: HashCost,
    /// Stand-in verified against when the username is unknown, so that both
    /// failure paths do the same work.
    decoy: AdminCredential,
    sessions: RwLock<HashMap<String, AdminSession>>,
}

impl fmt::Debug for Auth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Auth")
            .field("ttl", &self.ttl)
            .field("sessions", &self.sessions.read().len())
            .finish_non_exhaustive()
    }
}

impl Auth {
    pub fn new(repo: Arc<Repository>) -> Self {
        Self::with_cost(repo, HashCost::default())
    }

    pub fn with_cost(repo: Arc<Repository>, cost: HashCost) -> Self {
        let decoy_password = URL_SAFE_NO_PAD.encode(random_bytes::<16>());
        let decoy = make_credential("\u{0}decoy", &decoy_password, cost)
            .expect("hash cost parameters are valid");
        Auth {
            clock: repo.clock(),
            repo,
            ttl: Duration::hours(12),
            cost,
            decoy,
            sessions: RwLock::new(HashMap::new()),
        }
    }

    pub fn with_ttl(mut self, ttl: Duration) -> Self {
        self.ttl = ttl;
        self
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    pub fn repository(&self) -> &Arc<Repository> {
        &self.repo
    }

    pub fn add_admin(&self, username: &str, password: &str) -> Result<()> {
        check_username(username)?;
        if password.chars().count() < MIN_PASSWORD_CHARS {
            return Err(Error::WeakPassword { min: MIN_PASSWORD_CHARS });
        }
        let credential = make_credential(username, password, self.cost)?;
        self.repo.modify_doc(USERS_FILE, |file: Option<UsersFile>| {
            let mut file = file.unwrap_or_default();
            if file.users.iter().any(|u| u.username == username) {
                return Err(Error::UsernameTaken(username.to_owned()));
            }
            file.users.push(credential);
            file.users.sort_by(|a, b| a.username.cmp(&b.username));
            Ok((file, ()))
        })?;
        info!(username, "admin account added");
        Ok(())
    }

    pub fn admins(&self) -> Result<Vec<String>> {
        let file: UsersFile = self.repo.read_doc(USERS_FILE)?.unwrap_or_default();
        Ok(file.users.into_iter().map(|u| u.username).collect())
    }

    /// Checks a username/password pair and opens a session. Wrong passwords
    /// and unknown usernames fail identically, after the same amount of work.
    pub fn login(&self, username: &str, password: &str) -> Result<AdminSession> {
        let file: UsersFile = self.repo.read_doc(USERS_FILE)?.unwrap_or_default();
        let found = file.users.iter().find(|u| u.username == username);
        let credential = found.unwrap_or(&self.decoy);

        let salt = hex::decode(&credential.salt).map_err(|e| Error::Malformed(e.to_string()))?;
        let expected =
            hex::decode(&credential.secret_digest).map_err(|e| Error::Malformed(e.to_string()))?;
        let actual = derive(password, &salt, credential.cost)?;
        let matches: bool = actual.ct_eq(expected.as_slice()).into();
        if !(matches && found.is_some()) {
            return Err(Error::InvalidCredentials);
        }

        let now = self.clock.now();
        let session = AdminSession {
            token: URL_SAFE_NO_PAD.encode(random_bytes::<TOKEN_BYTES>()),
            username: username.to_owned(),
            expires_at: now + self.ttl,
        };
        let mut sessions = self.sessions.write();
        sessions.retain(|_, s| s.expires_at > now);
        sessions.insert(session.token.clone(), session.clone());
        info!(username, "admin logged in");
        Ok(session)
    }

    /// Returns the username owning a live token.
    pub fn authorize(&self, token: &str) -> Result<String> {
        let now = self.clock.now();
        {
            let sessions = self.sessions.read();
            match sessions.get(token) {
                Some(s) if s.expires_at > now => return Ok(s.username.clone()),
                None => return Err(Error::Unauthorized),
                Some(_) => {}
            }
        }
        self.sessions.write().remove(token);
        Err(Error::Unauthorized)
    }

    pub fn logout(&self, token: &str) -> bool {
        self.sessions.write().remove(token).is_some()
    }
}
