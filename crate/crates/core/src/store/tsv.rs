//! TSV interchange: one file per logical table, header line first, rows
//! sorted by id. Tabs, newlines, carriage returns and backslashes inside
//! values are backslash-escaped.

use std::fmt::Write as _;

use super::rows::*;

pub fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape(field: &str) -> Result<String, String> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => return Err(format!("unknown escape \\{other}")),
            None => return Err("dangling backslash".to_string()),
        }
    }
    Ok(out)
}

/// A row of a logical table with a fixed column layout.
pub trait TsvRow: Sized {
    const COLUMNS: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
    fn parse(fields: &[String]) -> Result<Self, String>;
}

fn int(s: &str) -> Result<u64, String> {
    s.parse()
        .map_err(|_| format!("expected an integer, found {s:?}"))
}

fn opt_int(s: &str) -> Result<Option<u64>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        int(s).map(Some)
    }
}

fn small(s: &str) -> Result<u32, String> {
    s.parse()
        .map_err(|_| format!("expected an integer, found {s:?}"))
}

fn flag(s: &str) -> Result<bool, String> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(format!("expected 0 or 1, found {s:?}")),
    }
}

fn opt_id(v: Option<u64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl TsvRow for PageRow {
    const COLUMNS: &'static [&'static str] = &[
        "id",
        "title",
        "record_id",
        "is_soft_redirect",
        "redirect_target",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.title.clone(),
            self.record_id.to_string(),
            (self.is_soft_redirect as u8).to_string(),
            self.redirect_target.clone().unwrap_or_default(),
        ]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(PageRow {
            id: int(&f[0])?,
            title: f[1].clone(),
            record_id: int(&f[2])?,
            is_soft_redirect: flag(&f[3])?,
            redirect_target: (!f[4].is_empty()).then(|| f[4].clone()),
        })
    }
}

impl TsvRow for LangRow {
    const COLUMNS: &'static [&'static str] = &["id", "code"];
    fn fields(&self) -> Vec<String> {
        vec![self.id.to_string(), self.code.clone()]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(LangRow {
            id: int(&f[0])?,
            code: f[1].clone(),
        })
    }
}

impl TsvRow for PosRow {
    const COLUMNS: &'static [&'static str] = &["id", "name"];
    fn fields(&self) -> Vec<String> {
        vec![self.id.to_string(), self.name.clone()]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(PosRow {
            id: int(&f[0])?,
            name: f[1].clone(),
        })
    }
}

impl TsvRow for LangPosRow {
    const COLUMNS: &'static [&'static str] =
        &["id", "page_id", "lang_id", "pos_id", "etymology_ordinal"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.page_id.to_string(),
            self.lang_id.to_string(),
            self.pos_id.to_string(),
            self.etymology_ordinal.to_string(),
        ]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(LangPosRow {
            id: int(&f[0])?,
            page_id: int(&f[1])?,
            lang_id: int(&f[2])?,
            pos_id: int(&f[3])?,
            etymology_ordinal: small(&f[4])?,
        })
    }
}

impl TsvRow for WikiTextRow {
    const COLUMNS: &'static [&'static str] = &["id", "text"];
    fn fields(&self) -> Vec<String> {
        vec![self.id.to_string(), self.text.clone()]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(WikiTextRow {
            id: int(&f[0])?,
            text: f[1].clone(),
        })
    }
}

impl TsvRow for WikiTextWordRow {
    const COLUMNS: &'static [&'static str] = &["id", "wiki_text_id", "page_ref_title"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.wiki_text_id.to_string(),
            self.page_ref_title.clone(),
        ]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(WikiTextWordRow {
            id: int(&f[0])?,
            wiki_text_id: int(&f[1])?,
            page_ref_title: f[2].clone(),
        })
    }
}

impl TsvRow for MeaningRow {
    const COLUMNS: &'static [&'static str] = &["id", "lang_pos_id", "ordinal", "wiki_text_id"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.lang_pos_id.to_string(),
            self.ordinal.to_string(),
            self.wiki_text_id.to_string(),
        ]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(MeaningRow {
            id: int(&f[0])?,
            lang_pos_id: int(&f[1])?,
            ordinal: small(&f[2])?,
            wiki_text_id: int(&f[3])?,
        })
    }
}

impl TsvRow for RelationTypeRow {
    const COLUMNS: &'static [&'static str] = &["id", "name"];
    fn fields(&self) -> Vec<String> {
        vec![self.id.to_string(), self.name.clone()]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(RelationTypeRow {
            id: int(&f[0])?,
            name: f[1].clone(),
        })
    }
}

impl TsvRow for RelationRow {
    const COLUMNS: &'static [&'static str] = &[
        "id",
        "meaning_id",
        "lang_pos_id",
        "relation_type_id",
        "wiki_text_id",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            opt_id(self.meaning_id),
            self.lang_pos_id.to_string(),
            self.relation_type_id.to_string(),
            self.wiki_text_id.to_string(),
        ]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(RelationRow {
            id: int(&f[0])?,
            meaning_id: opt_int(&f[1])?,
            lang_pos_id: int(&f[2])?,
            relation_type_id: int(&f[3])?,
            wiki_text_id: int(&f[4])?,
        })
    }
}

impl TsvRow for TranslationRow {
    const COLUMNS: &'static [&'static str] = &["id", "lang_pos_id", "gloss_wiki_text_id"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.lang_pos_id.to_string(),
            opt_id(self.gloss_wiki_text_id),
        ]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(TranslationRow {
            id: int(&f[0])?,
            lang_pos_id: int(&f[1])?,
            gloss_wiki_text_id: opt_int(&f[2])?,
        })
    }
}

impl TsvRow for TranslationEntryRow {
    const COLUMNS: &'static [&'static str] = &[
        "id",
        "translation_id",
        "lang_id",
        "wiki_text_id",
        "transliteration",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.translation_id.to_string(),
            self.lang_id.to_string(),
            self.wiki_text_id.to_string(),
            self.transliteration.clone(),
        ]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(TranslationEntryRow {
            id: int(&f[0])?,
            translation_id: int(&f[1])?,
            lang_id: int(&f[2])?,
            wiki_text_id: int(&f[3])?,
            transliteration: f[4].clone(),
        })
    }
}

impl TsvRow for InflectionRow {
    const COLUMNS: &'static [&'static str] = &["id", "lang_pos_id", "form_kind", "lemma_title"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.lang_pos_id.to_string(),
            self.form_kind.clone(),
            self.lemma_title.clone(),
        ]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(InflectionRow {
            id: int(&f[0])?,
            lang_pos_id: int(&f[1])?,
            form_kind: f[2].clone(),
            lemma_title: f[3].clone(),
        })
    }
}

impl TsvRow for IndexRow {
    const COLUMNS: &'static [&'static str] = &["word", "lang_pos_id"];
    fn fields(&self) -> Vec<String> {
        vec![self.word.clone(), self.lang_pos_id.to_string()]
    }
    fn parse(f: &[String]) -> Result<Self, String> {
        Ok(IndexRow {
            word: f[0].clone(),
            lang_pos_id: int(&f[1])?,
        })
    }
}

/// Renders a table as TSV text.
pub fn render<'a, R: TsvRow + 'a>(rows: impl IntoIterator<Item = &'a R>) -> String {
    let mut out = R::COLUMNS.join("\t");
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.fields().iter().map(|f| escape(f)).collect();
        let _ = writeln!(out, "{}", fields.join("\t"));
    }
    out
}

/// Parses TSV text produced by [`render`]. Errors carry the 1-based line.
pub fn parse_table<R: TsvRow>(text: &str) -> Result<Vec<R>, (usize, String)> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == R::COLUMNS.join("\t") => {}
        Some(header) => {
            return Err((1, format!("unexpected header {header:?}")));
        }
        None => return Ok(Vec::new()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let raw: Vec<&str> = line.split('\t').collect();
        if raw.len() != R::COLUMNS.len() {
            return Err((
                line_no,
                format!("expected {} columns, found {}", R::COLUMNS.len(), raw.len()),
            ));
        }
        let fields = raw
            .iter()
            .map(|f| unescape(f))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| (line_no, e))?;
        rows.push(R::parse(&fields).map_err(|e| (line_no, e))?);
    }
    Ok(rows)
}
