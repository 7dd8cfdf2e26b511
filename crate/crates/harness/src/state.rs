use std::cell::RefCell;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use asso_core::codec::Message;
use asso_core::group::{G1, G2};
use asso_core::registry::{CaState, CentralAuthority, PublicParams, RegistrationRequest, Role};

/// On-disk state shared by every role of one deployment.
///
/// ```text
/// pp.msg                       public parameters
/// ca/state.msg                 CA master key and records (CA only)
/// ca/index.msg                 reverse identity index (public)
/// public/<id>.msg              each entity's published registration request
/// entities/<id>/…              private keys, credentials, wallets
/// messages/…                   the protocol messages in flight
/// rekeys/<from>.<to>.<tp>.msg  re-keys; announcements/ holds the public notices
/// ledgers/<id>.log             spend ledgers
/// ```
///
/// Every write is also appended to an in-memory journal, which scripted
/// runs use as their transcript.
pub struct StateDir {
    root: PathBuf,
    journal: RefCell<Vec<(String, Vec<u8>)>>,
}

/// Which spend ledger a verifier consults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LedgerMode {
    /// Each verifier keeps its own ledger.
    #[default]
    PerVerifier,
    /// All verifiers and proxies share one ledger.
    Shared,
}

/// Entity ids double as path components, so keep them tame.
pub fn check_id(id: &str) -> Result<()> {
    let ok =
        !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
    if !ok {
        bail!("identity {id:?} must be 1-64 characters of [A-Za-z0-9_-]");
    }
    Ok(())
}

impl StateDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into(), journal: RefCell::new(Vec::new()) }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn exists(&self, rel: &str) -> bool {
        self.path(rel).exists()
    }

    pub fn write_raw(&self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.journal.borrow_mut().push((rel.to_string(), bytes.to_vec()));
        Ok(())
    }

    pub fn read_raw(&self, rel: &str) -> Result<Vec<u8>> {
        let path = self.path(rel);
        fs::read(&path).with_context(|| format!("reading {}", path.display()))
    }

    pub fn write<T: Message>(&self, rel: &str, value: &T) -> Result<()> {
        self.write_raw(rel, &value.to_message())
    }

    pub fn read<T: Message>(&self, rel: &str) -> Result<T> {
        let bytes = self.read_raw(rel)?;
        T::from_message(&bytes).with_context(|| format!("decoding {}", self.path(rel).display()))
    }

    /// The journal so far, framed as `len ‖ path ‖ len ‖ bytes` records.
    pub fn transcript(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (rel, bytes) in self.journal.borrow().iter() {
            out.extend_from_slice(&(rel.len() as u32).to_be_bytes());
            out.extend_from_slice(rel.as_bytes());
            out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
            out.extend_from_slice(bytes);
        }
        out
    }

    pub fn pp(&self) -> Result<PublicParams> {
        self.read("pp.msg").context("no public parameters; run `asso setup` first")
    }

    pub fn ca(&self) -> Result<CentralAuthority> {
        let state: CaState = self.read("ca/state.msg")?;
        Ok(CentralAuthority::from_state(self.pp()?, state))
    }

    pub fn save_ca(&self, ca: &CentralAuthority) -> Result<()> {
        self.write("ca/state.msg", &ca.to_state())?;
        self.write("ca/index.msg", ca.index())
    }

    pub fn entity(&self, id: &str, file: &str) -> String {
        format!("entities/{id}/{file}")
    }

    pub fn public_record(&self, id: &str) -> Result<RegistrationRequest> {
        check_id(id)?;
        self.read(&format!("public/{id}.msg")).with_context(|| format!("{id} is not registered"))
    }

    fn only_with_role(&self, role: Role) -> Result<RegistrationRequest> {
        let dir = self.path("public");
        let mut found = Vec::new();
        if dir.exists() {
            for entry in fs::read_dir(&dir)? {
                let name = entry?.file_name().to_string_lossy().into_owned();
                if let Some(id) = name.strip_suffix(".msg") {
                    let rec = self.public_record(id)?;
                    if rec.role == role {
                        found.push(rec);
                    }
                }
            }
        }
        match found.len() {
            1 => Ok(found.pop().expect("one")),
            0 => bail!("no {role} is registered"),
            _ => bail!("more than one {role} is registered"),
        }
    }

    /// `(ID_I, Ỹ_I)` of the deployment's issuer.
    pub fn issuer(&self) -> Result<(String, G2)> {
        let rec = self.only_with_role(Role::Issuer)?;
        let pk = rec.pk_g2.context("issuer record lacks its G2 key")?;
        Ok((String::from_utf8_lossy(&rec.id).into_owned(), pk))
    }

    /// `(ID_CV, Y_CV)` of the deployment's central verifier.
    pub fn central_verifier(&self) -> Result<(String, G1)> {
        let rec = self.only_with_role(Role::CentralVerifier)?;
        let pk = rec.pk_g1.context("central verifier record lacks its key")?;
        Ok((String::from_utf8_lossy(&rec.id).into_owned(), pk))
    }

    pub fn ledger_path(&self, verifier: &str, mode: LedgerMode) -> PathBuf {
        match mode {
            LedgerMode::PerVerifier => self.path(&format!("ledgers/{verifier}.log")),
            LedgerMode::Shared => self.path("ledgers/shared.log"),
        }
    }
}
