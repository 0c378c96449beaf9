//! Streaming reader for MediaWiki pages-articles XML exports.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use bzip2::read::MultiBzDecoder;
use flate2::read::MultiGzDecoder;
use quick_xml::events::Event;
use quick_xml::Reader;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::entry::{has_namespace_prefix, Page};

/// Bytes of the raw file hashed into the dump identity.
const IDENTITY_PREFIX: usize = 64 * 1024;

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("malformed dump at byte {offset}: {reason}")]
    MalformedDump { offset: u64, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Opens `path`, transparently decompressing bzip2 or gzip by magic bytes.
pub fn open_decompressed(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let mut file = BufReader::with_capacity(1 << 16, File::open(path)?);
    let magic = file.fill_buf()?;
    let reader: Box<dyn Read + Send> = if magic.starts_with(b"BZh") {
        Box::new(MultiBzDecoder::new(file))
    } else if magic.starts_with(&[0x1f, 0x8b]) {
        Box::new(MultiGzDecoder::new(file))
    } else {
        return Ok(Box::new(file));
    };
    Ok(Box::new(BufReader::with_capacity(1 << 16, reader)))
}

/// Hash of the head of the raw file plus its length. Identifies a dump
/// cheaply enough to check on every resume.
pub fn dump_identity(path: &Path) -> io::Result<String> {
    let mut file = File::open(path)?;
    let len = file.metadata()?.len();
    let mut head = Vec::with_capacity(IDENTITY_PREFIX);
    (&mut file)
        .take(IDENTITY_PREFIX as u64)
        .read_to_end(&mut head)?;
    let mut hasher = Sha256::new();
    hasher.update(&head);
    hasher.update(len.to_le_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(format!("{hex}-{len}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    None,
    Title,
    Ns,
    Text,
}

#[derive(Default)]
struct PageState {
    title: String,
    ns: Option<String>,
    text: String,
    redirect: bool,
}

/// Iterator over the main-namespace pages of a dump. Pages of other
/// namespaces are counted and skipped; record ids count main-namespace
/// pages from 0.
pub struct DumpReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    next_record: u64,
    filtered: u64,
    depth: usize,
    in_revision: bool,
    page: Option<PageState>,
    field: Field,
    done: bool,
}

pub fn iterate_dump(path: &Path) -> Result<DumpReader<Box<dyn BufRead + Send>>, DumpError> {
    Ok(DumpReader::new(open_decompressed(path)?))
}

impl<R: BufRead> DumpReader<R> {
    pub fn new(source: R) -> Self {
        let mut reader = Reader::from_reader(source);
        reader.config_mut().check_end_names = true;
        DumpReader {
            reader,
            buf: Vec::new(),
            next_record: 0,
            filtered: 0,
            depth: 0,
            in_revision: false,
            page: None,
            field: Field::None,
            done: false,
        }
    }

    /// Pages skipped so far for being outside the main namespace.
    pub fn filtered(&self) -> u64 {
        self.filtered
    }

    fn malformed(&self, reason: impl Into<String>) -> DumpError {
        DumpError::MalformedDump {
            offset: self.reader.buffer_position(),
            reason: reason.into(),
        }
    }

    fn finish_page(&mut self, state: PageState) -> Option<Page> {
        let main = match state.ns.as_deref().map(str::trim) {
            Some(ns) => ns == "0",
            None => !has_namespace_prefix(&state.title),
        };
        if !main {
            self.filtered += 1;
            return None;
        }
        let record_id = self.next_record;
        self.next_record += 1;
        Some(Page {
            title: state.title,
            raw_text: state.text,
            is_redirect: state.redirect,
            record_id,
        })
    }

    fn next_page(&mut self) -> Result<Option<Page>, DumpError> {
        loop {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(e) => e.into_owned(),
                Err(e) => return Err(self.malformed(e.to_string())),
            };
            match event {
                Event::Start(e) => {
                    self.depth += 1;
                    match (e.local_name().as_ref(), self.page.is_some()) {
                        (b"page", false) => self.page = Some(PageState::default()),
                        (b"page", true) => return Err(self.malformed("nested <page>")),
                        (b"revision", true) => self.in_revision = true,
                        (b"title", true) if !self.in_revision => self.field = Field::Title,
                        (b"ns", true) if !self.in_revision => self.field = Field::Ns,
                        (b"text", true) if self.in_revision => self.field = Field::Text,
                        (b"redirect", true) => {
                            if let Some(p) = &mut self.page {
                                p.redirect = true;
                            }
                        }
                        _ => {}
                    }
                }
                Event::Empty(e) => {
                    if e.local_name().as_ref() == b"redirect" {
                        if let Some(p) = &mut self.page {
                            p.redirect = true;
                        }
                    }
                }
                Event::End(e) => {
                    self.depth = self.depth.saturating_sub(1);
                    self.field = Field::None;
                    match e.local_name().as_ref() {
                        b"revision" => self.in_revision = false,
                        b"page" => {
                            let Some(state) = self.page.take() else {
                                return Err(self.malformed("</page> without <page>"));
                            };
                            self.in_revision = false;
                            if let Some(page) = self.finish_page(state) {
                                return Ok(Some(page));
                            }
                        }
                        _ => {}
                    }
                }
                Event::Text(t) => {
                    if self.field == Field::None {
                        continue;
                    }
                    let text = t.unescape().map_err(|e| self.malformed(e.to_string()))?;
                    self.push_text(&text);
                }
                Event::CData(c) => {
                    if self.field == Field::None {
                        continue;
                    }
                    let bytes = c.into_inner();
                    let text = String::from_utf8_lossy(&bytes).into_owned();
                    self.push_text(&text);
                }
                Event::Eof => {
                    if self.page.is_some() || self.depth > 0 {
                        return Err(self.malformed("unexpected end of file"));
                    }
                    return Ok(None);
                }
                _ => {}
            }
        }
    }

    fn push_text(&mut self, text: &str) {
        let Some(p) = &mut self.page else {
            return;
        };
        match self.field {
            Field::Title => p.title.push_str(text),
            Field::Ns => p.ns.get_or_insert_with(String::new).push_str(text),
            Field::Text => p.text.push_str(text),
            Field::None => {}
        }
    }
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<Page, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_page() {
            Ok(Some(p)) => Some(Ok(p)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Escapes text for inclusion in a dump fixture.
pub fn xml_escape(text: &str) -> String {
    quick_xml::escape::escape(text).into_owned()
}

/// Renders pages as a minimal pages-articles export. Used to build
/// fixture and synthetic dumps.
pub fn write_dump<'a>(pages: impl IntoIterator<Item = (&'a str, i32, &'a str)>) -> String {
    let mut out = String::from(
        "<mediawiki xmlns=\"http://www.mediawiki.org/xml/export-0.10/\" xml:lang=\"en\">\n",
    );
    for (i, (title, ns, text)) in pages.into_iter().enumerate() {
        out.push_str(&format!(
            "  <page>\n    <title>{}</title>\n    <ns>{ns}</ns>\n    <id>{}</id>\n    <revision>\n      <id>{}</id>\n      <text xml:space=\"preserve\">{}</text>\n    </revision>\n  </page>\n",
            xml_escape(title),
            i + 1,
            i + 1,
            xml_escape(text)
        ));
    }
    out.push_str("</mediawiki>\n");
    out
}
