//! The machine-readable dictionary store.
//!
//! Tables live in memory. A store directory holds a TSV snapshot plus an
//! append-only journal of saved pages; reopening replays the journal over
//! the snapshot. Each journal line carries a CRC32, so a line torn by a
//! crash is detected and dropped, never half-applied.
//!
//! ```text
//! <dir>/state.json          generation + checkpoint
//! <dir>/snapshot-<gen>/     <table>.tsv files + meta.json
//! <dir>/journal-<gen>.log   crc32hex \t json \n
//! ```

mod rows;
mod tables;
mod tsv;

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use log::{debug, info};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyze::PageBundle;

pub use rows::*;
pub use tables::{
    index_table_name, linked_titles, SavedIds, Tables, INDEX_NATIVE, MAX_TEXT_BYTES, TABLE_NAMES,
};
pub use tsv::{escape, unescape};

use tsv::{parse_table, render, TsvRow};

/// Journal size that triggers folding it into a fresh snapshot.
pub const DEFAULT_COMPACT_BYTES: u64 = 64 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("no space left on device")]
    StorageFull,
    #[error("corrupt store: {0}")]
    CorruptStore(String),
    #[error("checkpoint belongs to dump {stored}, current dump is {current}")]
    ChecksumMismatch { stored: String, current: String },
    #[error("{table}.tsv line {line}: {reason}")]
    MalformedRow {
        table: String,
        line: usize,
        reason: String,
    },
    #[error("invalid checkpoint: {0}")]
    InvalidCheckpoint(String),
    #[error("store is read-only")]
    ReadOnly,
    #[error(transparent)]
    Io(io::Error),
}

impl From<io::Error> for StoreError {
    fn from(e: io::Error) -> Self {
        const ENOSPC: i32 = 28;
        if e.kind() == io::ErrorKind::StorageFull || e.raw_os_error() == Some(ENOSPC) {
            StoreError::StorageFull
        } else {
            StoreError::Io(e)
        }
    }
}

pub type Result<T> = std::result::Result<T, StoreError>;

/// Where an interrupted parse can pick up again.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Stream position of the next record to process.
    pub last_record_id: u64,
    pub dump_identity: String,
    pub counters: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct StateFile {
    generation: u64,
    checkpoint: Option<Checkpoint>,
    /// Journal length at the time of the checkpoint.
    #[serde(default)]
    checkpoint_journal_len: u64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct SnapshotMeta {
    next_ids: BTreeMap<String, u64>,
    truncated_texts: u64,
    native_language: Option<String>,
}

#[derive(Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum JournalOp {
    Save { bundle: PageBundle },
    BuildIndex { native: String },
}

/// Borrowed twin of [`JournalOp`] for writing.
#[derive(Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum JournalOpRef<'a> {
    Save { bundle: &'a PageBundle },
    BuildIndex { native: &'a str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    ReadWrite,
    ReadOnly,
    /// Read-write, discarding journal entries after the checkpoint.
    Rewind,
}

#[derive(Debug)]
struct Disk {
    dir: PathBuf,
    state: StateFile,
    journal: Option<File>,
    journal_len: u64,
    compact_bytes: u64,
}

impl Disk {
    fn snapshot_dir(&self, generation: u64) -> PathBuf {
        self.dir.join(format!("snapshot-{generation}"))
    }

    fn journal_path(&self, generation: u64) -> PathBuf {
        self.dir.join(format!("journal-{generation}.log"))
    }
}

#[derive(Debug)]
pub struct Store {
    tables: Tables,
    disk: Option<Disk>,
    /// Checkpoint of an in-memory store.
    mem_checkpoint: Option<Checkpoint>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    if let Some(parent) = path.parent() {
        // Directory fsync makes the rename durable; not all platforms allow it.
        if let Ok(d) = File::open(parent) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

fn journal_line(op: &JournalOpRef<'_>) -> Vec<u8> {
    let json = serde_json::to_string(op).expect("journal ops serialize");
    let crc = crc32fast::hash(json.as_bytes());
    format!("{crc:08x}\t{json}\n").into_bytes()
}

fn decode_line(line: &[u8]) -> Option<JournalOp> {
    let line = std::str::from_utf8(line).ok()?;
    let (crc, json) = line.split_once('\t')?;
    let crc = u32::from_str_radix(crc, 16).ok()?;
    if crc32fast::hash(json.as_bytes()) != crc {
        return None;
    }
    serde_json::from_str(json).ok()
}

/// Parses journal bytes up to `limit`. Returns the ops and the length of the
/// valid prefix; an unreadable final line is treated as a torn write.
fn read_journal(bytes: &[u8], limit: usize) -> Result<(Vec<JournalOp>, usize)> {
    let bytes = &bytes[..limit.min(bytes.len())];
    let mut ops = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let Some(nl) = bytes[pos..].iter().position(|&b| b == b'\n') else {
            break;
        };
        let end = pos + nl + 1;
        match decode_line(&bytes[pos..end - 1]) {
            Some(op) => ops.push(op),
            None if end == bytes.len() => break,
            None => {
                return Err(StoreError::CorruptStore(format!(
                    "journal entry at byte {pos} fails its checksum"
                )))
            }
        }
        pos = end;
    }
    Ok((ops, pos))
}

fn table_path(dir: &Path, table: &str) -> PathBuf {
    dir.join(format!("{table}.tsv"))
}

fn write_table<'a, R: TsvRow + 'a>(
    dir: &Path,
    table: &str,
    rows: impl IntoIterator<Item = &'a R>,
) -> Result<()> {
    let mut f = File::create(table_path(dir, table))?;
    f.write_all(render(rows).as_bytes())?;
    f.sync_all()?;
    Ok(())
}

fn write_tables(dir: &Path, t: &Tables) -> Result<()> {
    fs::create_dir_all(dir)?;
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("index_") && name.ends_with(".tsv") {
            fs::remove_file(&path)?;
        }
    }
    write_table(dir, "page", t.page.values())?;
    write_table(dir, "lang", t.lang.values())?;
    write_table(dir, "pos", t.pos.values())?;
    write_table(dir, "lang_pos", t.lang_pos.values())?;
    write_table(dir, "wiki_text", t.wiki_text.values())?;
    write_table(dir, "wiki_text_words", t.wiki_text_words.values())?;
    write_table(dir, "meaning", t.meaning.values())?;
    write_table(dir, "relation_type", t.relation_type.values())?;
    write_table(dir, "relation", t.relation.values())?;
    write_table(dir, "translation", t.translation.values())?;
    write_table(dir, "translation_entry", t.translation_entry.values())?;
    write_table(dir, "inflection", t.inflection.values())?;
    write_table(dir, INDEX_NATIVE, t.index_native.iter())?;
    for (code, rows) in &t.index_foreign {
        write_table(dir, &index_table_name(code), rows.iter())?;
    }
    Ok(())
}

fn read_table<R: TsvRow>(dir: &Path, table: &str) -> Result<Option<Vec<R>>> {
    let path = table_path(dir, table);
    let text = match fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) if e.kind() == io::ErrorKind::InvalidData => {
            return Err(StoreError::MalformedRow {
                table: table.to_string(),
                line: 0,
                reason: "file is not UTF-8".to_string(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    parse_table(&text)
        .map(Some)
        .map_err(|(line, reason)| StoreError::MalformedRow {
            table: table.to_string(),
            line,
            reason,
        })
}

fn by_id<R>(rows: Option<Vec<R>>, id: impl Fn(&R) -> u64, table: &str) -> Result<BTreeMap<u64, R>> {
    let mut map = BTreeMap::new();
    for (i, row) in rows.unwrap_or_default().into_iter().enumerate() {
        let key = id(&row);
        if map.insert(key, row).is_some() {
            return Err(StoreError::MalformedRow {
                table: table.to_string(),
                line: i + 2,
                reason: format!("duplicate id {key}"),
            });
        }
    }
    Ok(map)
}

fn read_tables(dir: &Path) -> Result<Tables> {
    let mut t = Tables::new();
    t.page = by_id(read_table::<PageRow>(dir, "page")?, |r| r.id, "page")?;
    t.lang = by_id(read_table::<LangRow>(dir, "lang")?, |r| r.id, "lang")?;
    t.pos = by_id(read_table::<PosRow>(dir, "pos")?, |r| r.id, "pos")?;
    t.lang_pos = by_id(
        read_table::<LangPosRow>(dir, "lang_pos")?,
        |r| r.id,
        "lang_pos",
    )?;
    t.wiki_text = by_id(
        read_table::<WikiTextRow>(dir, "wiki_text")?,
        |r| r.id,
        "wiki_text",
    )?;
    t.wiki_text_words = by_id(
        read_table::<WikiTextWordRow>(dir, "wiki_text_words")?,
        |r| r.id,
        "wiki_text_words",
    )?;
    t.meaning = by_id(
        read_table::<MeaningRow>(dir, "meaning")?,
        |r| r.id,
        "meaning",
    )?;
    if let Some(rows) = read_table::<RelationTypeRow>(dir, "relation_type")? {
        t.relation_type = by_id(Some(rows), |r| r.id, "relation_type")?;
    }
    t.relation = by_id(
        read_table::<RelationRow>(dir, "relation")?,
        |r| r.id,
        "relation",
    )?;
    t.translation = by_id(
        read_table::<TranslationRow>(dir, "translation")?,
        |r| r.id,
        "translation",
    )?;
    t.translation_entry = by_id(
        read_table::<TranslationEntryRow>(dir, "translation_entry")?,
        |r| r.id,
        "translation_entry",
    )?;
    t.inflection = by_id(
        read_table::<InflectionRow>(dir, "inflection")?,
        |r| r.id,
        "inflection",
    )?;
    t.index_native = read_table::<IndexRow>(dir, INDEX_NATIVE)?.unwrap_or_default();

    let mut foreign = Vec::new();
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if let Some(code) = name
            .strip_prefix("index_")
            .and_then(|n| n.strip_suffix(".tsv"))
        {
            if code != "native" {
                foreign.push(code.to_string());
            }
        }
    }
    for code in foreign {
        let mut rows = read_table::<IndexRow>(dir, &index_table_name(&code))?.unwrap_or_default();
        rows.sort();
        t.index_foreign.insert(code, rows);
    }
    t.index_native.sort();
    t.native_language = t
        .index_native
        .first()
        .and_then(|r| t.lang_pos.get(&r.lang_pos_id))
        .and_then(|lp| t.lang.get(&lp.lang_id))
        .map(|l| l.code.clone());
    t.rebuild_lookups();
    Ok(t)
}

impl Store {
    /// A store with no backing directory.
    pub fn in_memory() -> Self {
        Store {
            tables: Tables::new(),
            disk: None,
            mem_checkpoint: None,
        }
    }

    /// Opens (or creates) the store in `dir` with every committed page.
    pub fn open(dir: &Path) -> Result<Self> {
        Self::open_mode(dir, Mode::ReadWrite)
    }

    /// Opens an existing store without modifying it.
    pub fn open_read_only(dir: &Path) -> Result<Self> {
        if !dir.join("state.json").exists() && !dir.join("journal-0.log").exists() {
            return Err(StoreError::CorruptStore(format!(
                "{} is not a store",
                dir.display()
            )));
        }
        Self::open_mode(dir, Mode::ReadOnly)
    }

    /// Opens the store as it was at its last checkpoint, dropping pages
    /// saved after it so that a resumed parse reproduces them exactly.
    pub fn open_at_checkpoint(dir: &Path) -> Result<Self> {
        Self::open_mode(dir, Mode::Rewind)
    }

    fn open_mode(dir: &Path, mode: Mode) -> Result<Self> {
        if mode != Mode::ReadOnly {
            fs::create_dir_all(dir)?;
        }
        let state_path = dir.join("state.json");
        let state: StateFile = match fs::read(&state_path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| StoreError::CorruptStore(format!("state.json: {e}")))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => StateFile::default(),
            Err(e) => return Err(e.into()),
        };
        let mut disk = Disk {
            dir: dir.to_path_buf(),
            state,
            journal: None,
            journal_len: 0,
            compact_bytes: DEFAULT_COMPACT_BYTES,
        };
        let generation = disk.state.generation;

        let snapshot = disk.snapshot_dir(generation);
        let mut tables = if snapshot.is_dir() {
            let mut t = read_tables(&snapshot)?;
            let meta: SnapshotMeta = match fs::read(snapshot.join("meta.json")) {
                Ok(bytes) => serde_json::from_slice(&bytes)
                    .map_err(|e| StoreError::CorruptStore(format!("meta.json: {e}")))?,
                Err(e) if e.kind() == io::ErrorKind::NotFound => SnapshotMeta::default(),
                Err(e) => return Err(e.into()),
            };
            for (table, next) in meta.next_ids {
                let slot = t.next_ids.entry(table).or_insert(next);
                *slot = (*slot).max(next);
            }
            t.truncated_texts = meta.truncated_texts;
            if meta.native_language.is_some() {
                t.native_language = meta.native_language;
            }
            t
        } else if generation > 0 {
            return Err(StoreError::CorruptStore(format!(
                "snapshot {} is missing",
                snapshot.display()
            )));
        } else {
            Tables::new()
        };

        let journal_path = disk.journal_path(generation);
        let bytes = match fs::read(&journal_path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        let limit = match mode {
            Mode::Rewind => {
                let at = disk.state.checkpoint_journal_len as usize;
                if at > bytes.len() {
                    return Err(StoreError::CorruptStore(
                        "journal is shorter than its checkpoint".to_string(),
                    ));
                }
                at
            }
            _ => bytes.len(),
        };
        let (ops, valid) = read_journal(&bytes, limit)?;
        if valid < disk.state.checkpoint_journal_len as usize {
            return Err(StoreError::CorruptStore(
                "journal lost entries covered by the checkpoint".to_string(),
            ));
        }
        let replayed = ops.len();
        for op in ops {
            match op {
                JournalOp::Save { bundle } => {
                    tables.apply(&bundle);
                }
                JournalOp::BuildIndex { native } => {
                    tables.build_indexes(&native);
                }
            }
        }
        debug!(
            "replayed {replayed} journal entries from {}",
            journal_path.display()
        );
        disk.journal_len = valid as u64;

        if mode != Mode::ReadOnly {
            if valid < bytes.len() {
                info!(
                    "discarding {} journal bytes after the last complete entry",
                    bytes.len() - valid
                );
            }
            let journal = OpenOptions::new()
                .create(true)
                .truncate(false)
                .write(true)
                .open(&journal_path)?;
            journal.set_len(valid as u64)?;
            let mut journal = journal;
            use std::io::Seek;
            journal.seek(io::SeekFrom::End(0))?;
            disk.journal = Some(journal);
            Self::remove_stale_generations(dir, generation)?;
            if !state_path.exists() {
                write_atomic(
                    &state_path,
                    &serde_json::to_vec_pretty(&disk.state).unwrap(),
                )?;
            }
        }
        Ok(Store {
            tables,
            disk: Some(disk),
            mem_checkpoint: None,
        })
    }

    fn remove_stale_generations(dir: &Path, current: u64) -> Result<()> {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or("")
                .to_string();
            let generation = name
                .strip_prefix("snapshot-")
                .or_else(|| {
                    name.strip_prefix("journal-")
                        .and_then(|n| n.strip_suffix(".log"))
                })
                .and_then(|g| g.parse::<u64>().ok());
            match generation {
                Some(g) if g != current => {
                    if path.is_dir() {
                        fs::remove_dir_all(&path)?;
                    } else {
                        fs::remove_file(&path)?;
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Journal size above which a checkpoint also compacts the store.
    pub fn set_compact_threshold(&mut self, bytes: u64) {
        if let Some(d) = &mut self.disk {
            d.compact_bytes = bytes;
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.disk.as_ref().map(|d| d.dir.as_path())
    }

    pub fn tables(&self) -> &Tables {
        &self.tables
    }

    fn append(&mut self, op: &JournalOpRef<'_>) -> Result<()> {
        let Some(disk) = &mut self.disk else {
            return Ok(());
        };
        let Some(journal) = &mut disk.journal else {
            return Err(StoreError::ReadOnly);
        };
        let line = journal_line(op);
        if let Err(e) = journal.write_all(&line) {
            // Cut back a partial append so the journal stays line-aligned.
            let _ = journal.set_len(disk.journal_len);
            return Err(e.into());
        }
        disk.journal_len += line.len() as u64;
        Ok(())
    }

    /// Saves a page, replacing any earlier version with the same title.
    /// Either every row of the page becomes visible or none does.
    pub fn save_word(&mut self, bundle: &PageBundle) -> Result<SavedIds> {
        self.append(&JournalOpRef::Save { bundle })?;
        Ok(self.tables.apply(bundle))
    }

    pub fn table_sizes(&self) -> BTreeMap<String, u64> {
        self.tables.table_sizes()
    }

    /// Rebuilds index_native (entries in `native`) and one index table per
    /// other entry language.
    pub fn build_index_tables(&mut self, native: &str) -> Result<BTreeMap<String, usize>> {
        self.append(&JournalOpRef::BuildIndex { native })?;
        Ok(self.tables.build_indexes(native))
    }

    /// The stored checkpoint, if any.
    pub fn checkpoint(&self) -> Option<&Checkpoint> {
        match &self.disk {
            Some(d) => d.state.checkpoint.as_ref(),
            None => self.mem_checkpoint.as_ref(),
        }
    }

    /// The checkpoint to resume from for the dump identified by
    /// `dump_identity`; record 0 when none was saved.
    pub fn load_checkpoint(&self, dump_identity: &str) -> Result<Checkpoint> {
        match self.checkpoint() {
            None => Ok(Checkpoint {
                last_record_id: 0,
                dump_identity: dump_identity.to_string(),
                counters: BTreeMap::new(),
            }),
            Some(cp) if cp.dump_identity == dump_identity => Ok(cp.clone()),
            Some(cp) => Err(StoreError::ChecksumMismatch {
                stored: cp.dump_identity.clone(),
                current: dump_identity.to_string(),
            }),
        }
    }

    /// Makes everything saved so far durable and records `cp`. Compacts
    /// when the journal has grown past the threshold.
    pub fn save_checkpoint(&mut self, cp: &Checkpoint) -> Result<()> {
        if let Some(prev) = self.checkpoint() {
            if prev.dump_identity == cp.dump_identity && cp.last_record_id < prev.last_record_id {
                return Err(StoreError::InvalidCheckpoint(format!(
                    "record {} precedes saved record {}",
                    cp.last_record_id, prev.last_record_id
                )));
            }
        }
        let Some(disk) = &mut self.disk else {
            self.mem_checkpoint = Some(cp.clone());
            return Ok(());
        };
        let Some(journal) = &mut disk.journal else {
            return Err(StoreError::ReadOnly);
        };
        journal.sync_data()?;
        let mut state = disk.state.clone();
        state.checkpoint = Some(cp.clone());
        state.checkpoint_journal_len = disk.journal_len;
        write_atomic(
            &disk.dir.join("state.json"),
            &serde_json::to_vec_pretty(&state).unwrap(),
        )?;
        disk.state = state;
        if disk.journal_len > disk.compact_bytes {
            self.compact()?;
        }
        Ok(())
    }

    /// Folds the journal into a new snapshot generation. The checkpoint
    /// then refers to the snapshot, so call this right after a checkpoint.
    pub fn compact(&mut self) -> Result<()> {
        let Some(disk) = &mut self.disk else {
            return Ok(());
        };
        if disk.journal.is_none() {
            return Err(StoreError::ReadOnly);
        }
        let old = disk.state.generation;
        let next = old + 1;
        let snapshot = disk.snapshot_dir(next);
        if snapshot.exists() {
            fs::remove_dir_all(&snapshot)?;
        }
        write_tables(&snapshot, &self.tables)?;
        let meta = SnapshotMeta {
            next_ids: self.tables.next_ids.clone(),
            truncated_texts: self.tables.truncated_texts,
            native_language: self.tables.native_language.clone(),
        };
        write_atomic(
            &snapshot.join("meta.json"),
            &serde_json::to_vec_pretty(&meta).unwrap(),
        )?;
        let journal_path = disk.journal_path(next);
        let journal = File::create(&journal_path)?;
        journal.sync_all()?;

        let state = StateFile {
            generation: next,
            checkpoint: disk.state.checkpoint.clone(),
            checkpoint_journal_len: 0,
        };
        write_atomic(
            &disk.dir.join("state.json"),
            &serde_json::to_vec_pretty(&state).unwrap(),
        )?;
        disk.state = state;
        disk.journal = Some(OpenOptions::new().append(true).open(&journal_path)?);
        disk.journal_len = 0;
        let old_snapshot = disk.snapshot_dir(old);
        if old_snapshot.exists() {
            fs::remove_dir_all(old_snapshot)?;
        }
        let old_journal = disk.journal_path(old);
        if old_journal.exists() {
            fs::remove_file(old_journal)?;
        }
        debug!("compacted store into generation {next}");
        Ok(())
    }

    /// Writes one TSV per table into `dir` after checking referential
    /// integrity.
    pub fn export_tsv(&self, dir: &Path) -> Result<()> {
        self.tables
            .check_integrity()
            .map_err(StoreError::CorruptStore)?;
        write_tables(dir, &self.tables)
    }

    /// Loads an exported directory into an in-memory store. Missing table
    /// files are read as empty tables.
    pub fn import_tsv(dir: &Path) -> Result<Self> {
        let tables = read_tables(dir)?;
        tables.check_integrity().map_err(StoreError::CorruptStore)?;
        Ok(Store {
            tables,
            disk: None,
            mem_checkpoint: None,
        })
    }

    pub fn check_integrity(&self) -> Result<()> {
        self.tables
            .check_integrity()
            .map_err(StoreError::CorruptStore)
    }
}
