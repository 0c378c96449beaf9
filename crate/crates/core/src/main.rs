use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use wiktmrd::lookup::{lookup, reverse_lookup};
use wiktmrd::pipeline::{run_parse, ParseConfig, PipelineError, DEFAULT_CHECKPOINT_INTERVAL};
use wiktmrd::registry::{Dialect, Registry};
use wiktmrd::stats::{
    compare_dictionaries, render_coverage, render_json_lines, render_text, store_metrics,
};
use wiktmrd::store::{Store, StoreError};

#[derive(Parser)]
#[command(
    name = "wiktmrd",
    version,
    about = "Machine-readable dictionaries from Wiktionary dumps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a pages-articles dump into a store.
    Parse {
        #[arg(long)]
        dialect: Dialect,
        #[arg(long)]
        dump: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// Start at this record, ignoring any saved checkpoint.
        #[arg(long)]
        start_record: Option<u64>,
        /// Language registry TSV to use instead of the built-in one.
        #[arg(long)]
        registry: Option<PathBuf>,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[arg(long, default_value_t = DEFAULT_CHECKPOINT_INTERVAL)]
        checkpoint_interval: u64,
        #[arg(long, hide = true)]
        abort_after: Option<u64>,
    },
    /// Print store statistics.
    Stats {
        #[arg(long)]
        store: PathBuf,
        /// One JSON object per metric.
        #[arg(long)]
        json: bool,
    },
    /// Show an entry, or with --reverse the entries translating to WORD.
    Lookup {
        #[arg(long)]
        store: PathBuf,
        word: String,
        #[arg(long)]
        lang: Option<String>,
        #[arg(long)]
        reverse: bool,
    },
    /// Compare the coverage of two stores.
    Compare {
        #[arg(long)]
        store_a: PathBuf,
        #[arg(long)]
        store_b: PathBuf,
    },
    /// List known language codes.
    Languages {
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Write the store as one TSV file per table.
    Export {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Parse {
            dialect,
            dump,
            store,
            start_record,
            registry,
            workers,
            checkpoint_interval,
            abort_after,
        } => {
            let config = ParseConfig {
                dialect,
                dump_path: dump,
                store_path: store,
                start_record,
                registry_path: registry,
                worker_count: workers.max(1),
                checkpoint_interval,
                abort_after,
            };
            match run_parse(&config) {
                Ok(report) => {
                    print!("{}", report.render());
                    Ok(())
                }
                Err(PipelineError::Store(e @ StoreError::ChecksumMismatch { .. })) => Err(format!(
                    "{e}\nthe store was built from another dump; pass --start-record 0 to parse this one from the start"
                )),
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Stats { store, json } => {
            let store = Store::open_read_only(&store).map_err(|e| e.to_string())?;
            let metrics = store_metrics(&store);
            if json {
                print!("{}", render_json_lines(&metrics));
            } else {
                print!("{}", render_text(&metrics));
            }
            Ok(())
        }
        Command::Lookup {
            store,
            word,
            lang,
            reverse,
        } => {
            let store = Store::open_read_only(&store).map_err(|e| e.to_string())?;
            let out = if reverse {
                reverse_lookup(&store, &word, lang.as_deref())
            } else {
                lookup(&store, &word, lang.as_deref())
            };
            out.map(|text| print!("{text}")).map_err(|e| e.to_string())
        }
        Command::Compare { store_a, store_b } => {
            let a = Store::open_read_only(&store_a).map_err(|e| e.to_string())?;
            let b = Store::open_read_only(&store_b).map_err(|e| e.to_string())?;
            print!("{}", render_coverage(&compare_dictionaries(&a, &b)));
            Ok(())
        }
        Command::Languages { registry } => {
            let registry = match registry {
                Some(path) => Registry::load(&path).map_err(|e| e.to_string())?,
                None => Registry::builtin(),
            };
            for lang in registry.languages() {
                println!(
                    "{}\t{}\t{}",
                    lang.code, lang.english_name, lang.russian_name
                );
            }
            println!("{} languages", registry.len());
            Ok(())
        }
        Command::Export { store, out } => {
            let store = Store::open_read_only(&store).map_err(|e| e.to_string())?;
            store.export_tsv(&out).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            error!("{message}");
            ExitCode::FAILURE
        }
    }
}
