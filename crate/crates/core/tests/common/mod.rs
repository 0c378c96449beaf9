#![allow(dead_code)]

pub mod synth;

use std::fs;
use std::path::{Path, PathBuf};

use wiktmrd::dump::write_dump;
use wiktmrd::pipeline::{run_parse, ParseConfig, ParseReport};
use wiktmrd::registry::Dialect;
use wiktmrd::store::Store;

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests")
}

pub struct Fixture {
    pub dialect: Dialect,
    pub title: String,
    pub text: String,
}

impl Fixture {
    pub fn dialect_dir(&self) -> &'static str {
        match self.dialect {
            Dialect::En => "en",
            Dialect::Ru => "ru",
        }
    }

    pub fn golden_dir(&self) -> PathBuf {
        root()
            .join("golden")
            .join(self.dialect_dir())
            .join(&self.title)
    }
}

/// Every fixture, sorted by dialect then title. The file stem is the title.
pub fn fixtures() -> Vec<Fixture> {
    let mut out = Vec::new();
    for (dir, dialect) in [("en", Dialect::En), ("ru", Dialect::Ru)] {
        let mut paths: Vec<PathBuf> = fs::read_dir(root().join("fixtures").join(dir))
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "wiki"))
            .collect();
        paths.sort();
        for path in paths {
            out.push(Fixture {
                dialect,
                title: path.file_stem().unwrap().to_string_lossy().into_owned(),
                text: fs::read_to_string(&path).unwrap(),
            });
        }
    }
    out
}

pub fn fixture(dialect: Dialect, title: &str) -> Fixture {
    fixtures()
        .into_iter()
        .find(|f| f.dialect == dialect && f.title == title)
        .unwrap_or_else(|| panic!("no fixture {title}"))
}

/// Writes `pages` as a dump in `dir` and parses it into `dir/store`.
pub fn parse_pages(dir: &Path, dialect: Dialect, pages: &[(&str, &str)]) -> (Store, ParseReport) {
    fs::create_dir_all(dir).unwrap();
    let dump = dir.join("dump.xml");
    fs::write(&dump, write_dump(pages.iter().map(|(t, x)| (*t, 0, *x)))).unwrap();
    let store_dir = dir.join("store");
    let report = run_parse(&ParseConfig::new(dialect, dump, store_dir.clone())).unwrap();
    (Store::open_read_only(&store_dir).unwrap(), report)
}

pub fn parse_fixture(dir: &Path, f: &Fixture) -> Store {
    parse_pages(dir, f.dialect, &[(&f.title, &f.text)]).0
}

/// Reads every file of an exported store, sorted by name.
pub fn read_export(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}
