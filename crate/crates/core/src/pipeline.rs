//! The parse run: read the dump, analyze pages on worker threads, commit
//! results to the store in record order with periodic checkpoints.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::thread;
use std::time::Instant;

use crossbeam_channel::{bounded, Receiver, Sender};
use log::{debug, info, warn};
use serde::Serialize;
use thiserror::Error;

use crate::analyze::{analyze_page_guarded, PageBundle, PageError};
use crate::dump::{dump_identity, iterate_dump, DumpError};
use crate::entry::Page;
use crate::registry::{Dialect, DialectConfig, Registry, RegistryError};
use crate::store::{Checkpoint, Store, StoreError};

pub const DEFAULT_CHECKPOINT_INTERVAL: u64 = 1000;

#[derive(Debug, Clone)]
pub struct ParseConfig {
    pub dialect: Dialect,
    pub dump_path: PathBuf,
    pub store_path: PathBuf,
    /// Explicit resume point; overrides the stored checkpoint.
    pub start_record: Option<u64>,
    pub registry_path: Option<PathBuf>,
    pub worker_count: usize,
    pub checkpoint_interval: u64,
    /// Test hook: abort the process after this many commits.
    pub abort_after: Option<u64>,
}

impl ParseConfig {
    pub fn new(dialect: Dialect, dump_path: PathBuf, store_path: PathBuf) -> Self {
        ParseConfig {
            dialect,
            dump_path,
            store_path,
            start_record: None,
            registry_path: None,
            worker_count: 1,
            checkpoint_interval: DEFAULT_CHECKPOINT_INTERVAL,
            abort_after: None,
        }
    }
}

/// Counters of a parse, cumulative over resumed runs. Elapsed time and
/// speed cover the current run only.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParseReport {
    pub pages_seen: u64,
    pub pages_parsed: u64,
    pub pages_skipped_redirect: u64,
    pub pages_failed: u64,
    pub pages_filtered_namespace: u64,
    pub sections_skipped_unknown_language: u64,
    pub lines_skipped: u64,
    pub elapsed_secs: f64,
    pub pages_per_second: f64,
}

impl ParseReport {
    fn from_counters(c: &BTreeMap<String, u64>) -> Self {
        let get = |k: &str| c.get(k).copied().unwrap_or(0);
        ParseReport {
            pages_seen: get("pages_seen"),
            pages_parsed: get("pages_parsed"),
            pages_skipped_redirect: get("pages_skipped_redirect"),
            pages_failed: get("pages_failed"),
            pages_filtered_namespace: get("pages_filtered_namespace"),
            sections_skipped_unknown_language: get("sections_skipped_unknown_language"),
            lines_skipped: get("lines_skipped"),
            ..Default::default()
        }
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        BTreeMap::from([
            ("pages_seen".to_string(), self.pages_seen),
            ("pages_parsed".to_string(), self.pages_parsed),
            (
                "pages_skipped_redirect".to_string(),
                self.pages_skipped_redirect,
            ),
            ("pages_failed".to_string(), self.pages_failed),
            (
                "pages_filtered_namespace".to_string(),
                self.pages_filtered_namespace,
            ),
            (
                "sections_skipped_unknown_language".to_string(),
                self.sections_skipped_unknown_language,
            ),
            ("lines_skipped".to_string(), self.lines_skipped),
        ])
    }

    pub fn render(&self) -> String {
        format!(
            "pages seen: {}\npages parsed: {}\nredirects skipped: {}\npages failed: {}\n\
             other namespaces: {}\nsections in unknown languages: {}\ntranslation lines skipped: {}\n\
             elapsed: {:.2} s ({:.0} pages/s)\n",
            self.pages_seen,
            self.pages_parsed,
            self.pages_skipped_redirect,
            self.pages_failed,
            self.pages_filtered_namespace,
            self.sections_skipped_unknown_language,
            self.lines_skipped,
            self.elapsed_secs,
            self.pages_per_second
        )
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Dump(#[from] DumpError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("cannot read dump: {0}")]
    Io(#[from] std::io::Error),
}

enum Outcome {
    Parsed(PageBundle),
    Redirect,
    Failed(PageError),
}

enum Message {
    Done {
        record_id: u64,
        title: String,
        outcome: Outcome,
    },
    /// Sent by the reader once the dump is exhausted or broken.
    End {
        next_record: u64,
        filtered: u64,
        error: Option<DumpError>,
    },
}

const REDIRECT_MARKERS: [&str; 2] = ["#redirect", "#перенаправление"];

fn is_redirect(page: &Page) -> bool {
    if page.is_redirect {
        return true;
    }
    let head: String = page.raw_text.trim_start().chars().take(20).collect();
    let head = head.to_lowercase();
    REDIRECT_MARKERS.iter().any(|m| head.starts_with(m))
}

fn analyze(page: &Page, config: &DialectConfig, registry: &Registry) -> Outcome {
    if is_redirect(page) {
        return Outcome::Redirect;
    }
    match analyze_page_guarded(page, config, registry) {
        Ok(bundle) => Outcome::Parsed(bundle),
        Err(e) => Outcome::Failed(e),
    }
}

fn worker(
    pages: Receiver<Page>,
    results: Sender<Message>,
    config: &DialectConfig,
    registry: &Registry,
) {
    for page in pages {
        let outcome = analyze(&page, config, registry);
        let msg = Message::Done {
            record_id: page.record_id,
            title: page.title,
            outcome,
        };
        if results.send(msg).is_err() {
            break;
        }
    }
}

fn reader(
    dump: Result<crate::dump::DumpReader<Box<dyn std::io::BufRead + Send>>, DumpError>,
    start: u64,
    pages: Sender<Page>,
    results: Sender<Message>,
) {
    let mut dump = match dump {
        Ok(d) => d,
        Err(e) => {
            let _ = results.send(Message::End {
                next_record: start,
                filtered: 0,
                error: Some(e),
            });
            return;
        }
    };
    let mut next_record = 0;
    let mut error = None;
    for item in dump.by_ref() {
        match item {
            Ok(page) => {
                next_record = page.record_id + 1;
                if page.record_id < start {
                    continue;
                }
                if pages.send(page).is_err() {
                    return;
                }
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    drop(pages);
    let _ = results.send(Message::End {
        next_record: next_record.max(start),
        filtered: dump.filtered(),
        error,
    });
}

struct Committer<'a> {
    store: &'a mut Store,
    report: ParseReport,
    identity: String,
    interval: u64,
    abort_after: Option<u64>,
    committed_this_run: u64,
}

impl Committer<'_> {
    fn commit(&mut self, record_id: u64, title: &str, outcome: Outcome) -> Result<(), StoreError> {
        self.report.pages_seen += 1;
        match outcome {
            Outcome::Parsed(bundle) => {
                for s in &bundle.skipped_sections {
                    debug!("{title}: skipped section {:?}: {}", s.heading, s.reason);
                }
                self.report.sections_skipped_unknown_language +=
                    bundle.skipped_sections.len() as u64;
                self.report.lines_skipped += bundle.skipped_lines.len() as u64;
                self.store.save_word(&bundle)?;
                self.report.pages_parsed += 1;
            }
            Outcome::Redirect => {
                debug!("{title}: skipped redirect");
                self.report.pages_skipped_redirect += 1;
            }
            Outcome::Failed(e) => {
                warn!("record {record_id} {title:?} failed: {e}");
                self.report.pages_failed += 1;
            }
        }
        self.committed_this_run += 1;
        if self.abort_after == Some(self.committed_this_run) {
            std::process::abort();
        }
        if self.committed_this_run.is_multiple_of(self.interval) {
            self.checkpoint(record_id + 1)?;
        }
        Ok(())
    }

    fn checkpoint(&mut self, next_record: u64) -> Result<(), StoreError> {
        self.store.save_checkpoint(&Checkpoint {
            last_record_id: next_record,
            dump_identity: self.identity.clone(),
            counters: self.report.counters(),
        })
    }
}

/// Parses the dump into the store named by `config`.
pub fn run_parse(config: &ParseConfig) -> Result<ParseReport, PipelineError> {
    let registry = match &config.registry_path {
        Some(path) => Registry::load(path)?,
        None => Registry::builtin(),
    };
    let identity = dump_identity(&config.dump_path)?;
    let (mut store, start, report) = match config.start_record {
        Some(start) => (
            Store::open(&config.store_path)?,
            start,
            ParseReport::default(),
        ),
        None => {
            let store = Store::open_at_checkpoint(&config.store_path)?;
            let cp = store.load_checkpoint(&identity)?;
            let report = ParseReport::from_counters(&cp.counters);
            (store, cp.last_record_id, report)
        }
    };
    if start > 0 {
        info!("resuming at record {start}");
    }
    run_parse_into(&mut store, config, &registry, &identity, start, report)
}

/// [`run_parse`] over an already opened store.
pub fn run_parse_into(
    store: &mut Store,
    config: &ParseConfig,
    registry: &Registry,
    identity: &str,
    start: u64,
    report: ParseReport,
) -> Result<ParseReport, PipelineError> {
    let dialect_config = DialectConfig::new(config.dialect, registry)?;
    let started = Instant::now();
    let workers = config.worker_count.max(1);
    let (page_tx, page_rx) = bounded::<Page>(workers * 4);
    let (result_tx, result_rx) = bounded::<Message>(workers * 4);
    let dump = iterate_dump(&config.dump_path);

    let mut committer = Committer {
        store,
        report,
        identity: identity.to_string(),
        interval: config.checkpoint_interval.max(1),
        abort_after: config.abort_after,
        committed_this_run: 0,
    };
    let seen_before = committer.report.pages_seen;

    let outcome: Result<(u64, u64, Option<DumpError>), StoreError> = thread::scope(|scope| {
        {
            let result_tx = result_tx.clone();
            scope.spawn(move || reader(dump, start, page_tx, result_tx));
        }
        for _ in 0..workers {
            let page_rx = page_rx.clone();
            let result_tx = result_tx.clone();
            let dialect_config = &dialect_config;
            scope.spawn(move || worker(page_rx, result_tx, dialect_config, registry));
        }
        drop(page_rx);
        drop(result_tx);

        let mut pending: BTreeMap<u64, (String, Outcome)> = BTreeMap::new();
        let mut expected = start;
        let mut end = None;
        let mut failure = None;
        for msg in result_rx.iter() {
            if failure.is_some() {
                // Drain so producer threads can finish.
                continue;
            }
            match msg {
                Message::Done {
                    record_id,
                    title,
                    outcome,
                } => {
                    pending.insert(record_id, (title, outcome));
                    while let Some((title, outcome)) = pending.remove(&expected) {
                        if let Err(e) = committer.commit(expected, &title, outcome) {
                            failure = Some(e);
                            break;
                        }
                        expected += 1;
                    }
                }
                Message::End {
                    next_record,
                    filtered,
                    error,
                } => end = Some((next_record, filtered, error)),
            }
        }
        if let Some(e) = failure {
            return Err(e);
        }
        let (next_record, filtered, error) = end.unwrap_or((expected, 0, None));
        Ok((next_record.max(expected), filtered, error))
    });
    let (next_record, filtered, dump_error) = outcome?;

    let mut report = committer.report.clone();
    // The reader always scans from the first record, so this run's count
    // already covers everything before the stopping point.
    report.pages_filtered_namespace = filtered;
    committer.report = report.clone();
    if let Some(e) = dump_error {
        // Pages before the damage are committed; keep them resumable.
        let resume_at = start + (report.pages_seen - seen_before);
        committer.checkpoint(resume_at)?;
        return Err(e.into());
    }
    committer.checkpoint(next_record)?;
    let counts = committer
        .store
        .build_index_tables(config.dialect.native_code())?;
    debug!("index tables: {counts:?}");
    committer.store.compact()?;

    let elapsed = started.elapsed().as_secs_f64();
    report.elapsed_secs = elapsed;
    let this_run = report.pages_seen - seen_before;
    report.pages_per_second = if elapsed > 0.0 {
        this_run as f64 / elapsed
    } else {
        0.0
    };
    info!(
        "parsed {} pages ({} failed) in {:.2} s",
        this_run, report.pages_failed, elapsed
    );
    Ok(report)
}
