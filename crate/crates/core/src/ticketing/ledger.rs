use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::bbs::BbsSignature;
use crate::codec::{Decode, Encode, Reader};
use crate::error::{Error, Result};
use crate::group::{Scalar, SCALAR_LEN};

/// What a verifier stores for each accepted tag: `(s_v, w_v, z_v, Z_V)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpendRecord {
    pub serial: Scalar,
    pub signature: BbsSignature,
}

/// Bytes per record in the ledger file.
pub const RECORD_LEN: usize = SCALAR_LEN + 112;

impl Encode for SpendRecord {
    fn encode(&self, out: &mut Vec<u8>) {
        self.serial.encode(out);
        self.signature.encode(out);
    }
}

impl Decode for SpendRecord {
    fn decode(r: &mut Reader<'_>) -> Result<Self, crate::error::DecodeError> {
        Ok(Self { serial: r.get()?, signature: r.get()? })
    }
}

fn key(serial: &Scalar) -> Vec<u8> {
    serial.to_bytes()
}

/// Double-spend store keyed by tag serial.
///
/// `insert` must be atomic: of two concurrent inserts of one serial exactly
/// one returns `true`. Verifiers that should reject each other's replays
/// share one ledger; otherwise each keeps its own.
pub trait SpendLedger {
    fn contains(&self, serial: &Scalar) -> Result<bool>;
    /// Records a spend. Returns `false` if the serial was already present.
    fn insert(&self, record: &SpendRecord) -> Result<bool>;
}

impl<L: SpendLedger + ?Sized> SpendLedger for &L {
    fn contains(&self, serial: &Scalar) -> Result<bool> {
        (**self).contains(serial)
    }

    fn insert(&self, record: &SpendRecord) -> Result<bool> {
        (**self).insert(record)
    }
}

#[derive(Debug, Default)]
pub struct MemoryLedger {
    seen: Mutex<HashMap<Vec<u8>, SpendRecord>>,
}

impl MemoryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.seen.lock().expect("ledger lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SpendLedger for MemoryLedger {
    fn contains(&self, serial: &Scalar) -> Result<bool> {
        Ok(self.seen.lock().expect("ledger lock").contains_key(&key(serial)))
    }

    fn insert(&self, record: &SpendRecord) -> Result<bool> {
        let mut seen = self.seen.lock().expect("ledger lock");
        if seen.contains_key(&key(&record.serial)) {
            return Ok(false);
        }
        seen.insert(key(&record.serial), *record);
        Ok(true)
    }
}

const MAGIC: &[u8; 8] = b"ASSOLDG1";

/// Append-only ledger file shared by any number of processes.
///
/// The file is an 8-byte header followed by fixed-size records. Every
/// operation takes an OS file lock and first replays records appended by
/// other processes, so check-and-append is atomic across processes too.
#[derive(Debug)]
pub struct FileLedger {
    path: PathBuf,
    state: Mutex<Replayed>,
}

#[derive(Debug, Default)]
struct Replayed {
    offset: u64,
    seen: HashMap<Vec<u8>, SpendRecord>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Ledger(format!("{}: {e}", path.display()))
}

impl FileLedger {
    /// Opens or creates the ledger at `path` and replays it.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let ledger = Self { path: path.into(), state: Mutex::new(Replayed::default()) };
        {
            let mut state = ledger.state.lock().expect("ledger lock");
            let mut file = ledger.open_file()?;
            file.lock().map_err(|e| io_err(&ledger.path, e))?;
            ledger.catch_up(&mut file, &mut state)?;
        }
        Ok(ledger)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn records(&self) -> Vec<SpendRecord> {
        self.state.lock().expect("ledger lock").seen.values().copied().collect()
    }

    fn open_file(&self) -> Result<File> {
        OpenOptions::new().read(true).append(true).create(true).open(&self.path).map_err(|e| io_err(&self.path, e))
    }

    /// Writes the header if the file is new, then reads any records past
    /// the last replayed offset. Caller holds the file lock.
    fn catch_up(&self, file: &mut File, state: &mut Replayed) -> Result<()> {
        let io = |e| io_err(&self.path, e);
        let len = file.metadata().map_err(io)?.len();
        if len == 0 {
            file.write_all(MAGIC).map_err(io)?;
            file.sync_data().map_err(io)?;
            state.offset = MAGIC.len() as u64;
            return Ok(());
        }
        if state.offset == 0 {
            let mut magic = [0u8; 8];
            file.seek(SeekFrom::Start(0)).map_err(io)?;
            file.read_exact(&mut magic).map_err(io)?;
            if &magic != MAGIC {
                return Err(Error::Ledger(format!("{}: not a spend ledger", self.path.display())));
            }
            state.offset = MAGIC.len() as u64;
        }
        let mut tail = Vec::new();
        file.seek(SeekFrom::Start(state.offset)).map_err(io)?;
        file.read_to_end(&mut tail).map_err(io)?;
        if tail.len() % RECORD_LEN != 0 {
            return Err(Error::Ledger(format!("{}: truncated record", self.path.display())));
        }
        for chunk in tail.chunks_exact(RECORD_LEN) {
            let record = SpendRecord::from_bytes(chunk)?;
            state.seen.insert(key(&record.serial), record);
        }
        state.offset += tail.len() as u64;
        Ok(())
    }
}

impl SpendLedger for FileLedger {
    fn contains(&self, serial: &Scalar) -> Result<bool> {
        let mut state = self.state.lock().expect("ledger lock");
        let mut file = self.open_file()?;
        file.lock_shared().map_err(|e| io_err(&self.path, e))?;
        self.catch_up(&mut file, &mut state)?;
        Ok(state.seen.contains_key(&key(serial)))
    }

    fn insert(&self, record: &SpendRecord) -> Result<bool> {
        let mut state = self.state.lock().expect("ledger lock");
        let mut file = self.open_file()?;
        file.lock().map_err(|e| io_err(&self.path, e))?;
        self.catch_up(&mut file, &mut state)?;
        if state.seen.contains_key(&key(&record.serial)) {
            return Ok(false);
        }
        let bytes = record.to_bytes();
        file.write_all(&bytes).map_err(|e| io_err(&self.path, e))?;
        file.sync_data().map_err(|e| io_err(&self.path, e))?;
        state.offset += bytes.len() as u64;
        state.seen.insert(key(&record.serial), *record);
        Ok(true)
    }
}
