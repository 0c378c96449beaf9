//! In-memory tables of the dictionary schema and the upsert that maps a
//! [`PageBundle`] onto them.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::{Hash, Hasher};

use crate::analyze::PageBundle;
use crate::entry::has_namespace_prefix;
use crate::registry::RelationType;
use crate::wikitext::scan_wikilinks;

use super::rows::*;

/// Longest wiki_text stored; longer texts are cut at a char boundary.
pub const MAX_TEXT_BYTES: usize = 65_535;

/// The fixed tables, in schema order. Index tables follow these.
pub const TABLE_NAMES: [&str; 12] = [
    "page",
    "lang",
    "pos",
    "lang_pos",
    "wiki_text",
    "wiki_text_words",
    "meaning",
    "relation_type",
    "relation",
    "translation",
    "translation_entry",
    "inflection",
];

pub const INDEX_NATIVE: &str = "index_native";

pub fn index_table_name(code: &str) -> String {
    format!("index_{}", code.to_lowercase())
}

/// Ids assigned by one `save_word`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SavedIds {
    pub page_id: u64,
    pub lang_pos_ids: Vec<u64>,
}

#[derive(Debug, Clone, Default)]
struct Children {
    meanings: Vec<u64>,
    relations: Vec<u64>,
    translations: Vec<u64>,
    entries: Vec<u64>,
    inflections: Vec<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct Tables {
    pub page: BTreeMap<u64, PageRow>,
    pub lang: BTreeMap<u64, LangRow>,
    pub pos: BTreeMap<u64, PosRow>,
    pub lang_pos: BTreeMap<u64, LangPosRow>,
    pub wiki_text: BTreeMap<u64, WikiTextRow>,
    pub wiki_text_words: BTreeMap<u64, WikiTextWordRow>,
    pub meaning: BTreeMap<u64, MeaningRow>,
    pub relation_type: BTreeMap<u64, RelationTypeRow>,
    pub relation: BTreeMap<u64, RelationRow>,
    pub translation: BTreeMap<u64, TranslationRow>,
    pub translation_entry: BTreeMap<u64, TranslationEntryRow>,
    pub inflection: BTreeMap<u64, InflectionRow>,
    /// Sorted by (word, lang_pos_id).
    pub index_native: Vec<IndexRow>,
    /// Keyed by language code.
    pub index_foreign: BTreeMap<String, Vec<IndexRow>>,
    /// Language the indexes were last built for.
    pub native_language: Option<String>,
    pub next_ids: BTreeMap<String, u64>,
    pub truncated_texts: u64,

    page_by_title: HashMap<String, u64>,
    lang_by_code: HashMap<String, u64>,
    pos_by_name: HashMap<String, u64>,
    text_by_hash: HashMap<u64, Vec<u64>>,
    lang_pos_by_page: HashMap<u64, Vec<u64>>,
    children: HashMap<u64, Children>,
}

fn text_hash(text: &str) -> u64 {
    let mut h = DefaultHasher::new();
    text.hash(&mut h);
    h.finish()
}

fn truncate_at_char_boundary(text: &str, max: usize) -> &str {
    if text.len() <= max {
        return text;
    }
    let mut end = max;
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    &text[..end]
}

/// Page titles linked from a wiki_text, anchors dropped, first occurrence
/// kept.
pub fn linked_titles(text: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for link in scan_wikilinks(text) {
        if has_namespace_prefix(&link.target) {
            continue;
        }
        let title = link.target.split('#').next().unwrap_or("").trim();
        if !title.is_empty() && seen.insert(title.to_string()) {
            out.push(title.to_string());
        }
    }
    out
}

impl Tables {
    /// Empty tables with the nine relation types seeded.
    pub fn new() -> Self {
        let mut t = Tables::default();
        for rt in RelationType::ALL {
            let id = t.next_id("relation_type");
            t.relation_type.insert(
                id,
                RelationTypeRow {
                    id,
                    name: rt.as_str().to_string(),
                },
            );
        }
        t
    }

    fn next_id(&mut self, table: &str) -> u64 {
        let slot = self.next_ids.entry(table.to_string()).or_insert(1);
        let id = *slot;
        *slot += 1;
        id
    }

    pub fn page_id(&self, title: &str) -> Option<u64> {
        self.page_by_title.get(title).copied()
    }

    pub fn lang_id(&self, code: &str) -> Option<u64> {
        self.lang_by_code.get(code).copied()
    }

    pub fn lang_pos_of_page(&self, page_id: u64) -> &[u64] {
        self.lang_pos_by_page
            .get(&page_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn lang_code(&self, lang_id: u64) -> Option<&str> {
        self.lang.get(&lang_id).map(|l| l.code.as_str())
    }

    pub fn text(&self, wiki_text_id: u64) -> Option<&str> {
        self.wiki_text.get(&wiki_text_id).map(|t| t.text.as_str())
    }

    /// Meanings of a lang_pos in ordinal order.
    pub fn meanings_of(&self, lang_pos_id: u64) -> Vec<&MeaningRow> {
        let mut rows: Vec<&MeaningRow> = self
            .children
            .get(&lang_pos_id)
            .map(|c| {
                c.meanings
                    .iter()
                    .filter_map(|id| self.meaning.get(id))
                    .collect()
            })
            .unwrap_or_default();
        rows.sort_by_key(|m| m.ordinal);
        rows
    }

    pub fn relations_of(&self, lang_pos_id: u64) -> Vec<&RelationRow> {
        self.children
            .get(&lang_pos_id)
            .map(|c| {
                c.relations
                    .iter()
                    .filter_map(|id| self.relation.get(id))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn translations_of(&self, lang_pos_id: u64) -> Vec<&TranslationRow> {
        self.children
            .get(&lang_pos_id)
            .map(|c| {
                c.translations
                    .iter()
                    .filter_map(|id| self.translation.get(id))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn entries_of(&self, lang_pos_id: u64) -> Vec<&TranslationEntryRow> {
        self.children
            .get(&lang_pos_id)
            .map(|c| {
                c.entries
                    .iter()
                    .filter_map(|id| self.translation_entry.get(id))
                    .collect()
            })
            .unwrap_or_default()
    }

    fn intern_lang(&mut self, code: &str) -> u64 {
        if let Some(&id) = self.lang_by_code.get(code) {
            return id;
        }
        let id = self.next_id("lang");
        self.lang.insert(
            id,
            LangRow {
                id,
                code: code.to_string(),
            },
        );
        self.lang_by_code.insert(code.to_string(), id);
        id
    }

    fn intern_pos(&mut self, name: &str) -> u64 {
        if let Some(&id) = self.pos_by_name.get(name) {
            return id;
        }
        let id = self.next_id("pos");
        self.pos.insert(
            id,
            PosRow {
                id,
                name: name.to_string(),
            },
        );
        self.pos_by_name.insert(name.to_string(), id);
        id
    }

    fn find_text(&self, text: &str) -> Option<u64> {
        self.text_by_hash
            .get(&text_hash(text))?
            .iter()
            .copied()
            .find(|id| self.wiki_text[id].text == text)
    }

    fn intern_text(&mut self, text: &str) -> u64 {
        let stored = truncate_at_char_boundary(text, MAX_TEXT_BYTES);
        if stored.len() < text.len() {
            self.truncated_texts += 1;
        }
        if let Some(id) = self.find_text(stored) {
            return id;
        }
        let id = self.next_id("wiki_text");
        self.wiki_text.insert(
            id,
            WikiTextRow {
                id,
                text: stored.to_string(),
            },
        );
        self.text_by_hash
            .entry(text_hash(stored))
            .or_default()
            .push(id);
        for title in linked_titles(stored) {
            let word_id = self.next_id("wiki_text_words");
            self.wiki_text_words.insert(
                word_id,
                WikiTextWordRow {
                    id: word_id,
                    wiki_text_id: id,
                    page_ref_title: title,
                },
            );
        }
        id
    }

    fn remove_page_children(&mut self, page_id: u64) {
        let removed = self.lang_pos_by_page.remove(&page_id).unwrap_or_default();
        if !removed.is_empty() {
            let gone = |r: &IndexRow| removed.contains(&r.lang_pos_id);
            self.index_native.retain(|r| !gone(r));
            for rows in self.index_foreign.values_mut() {
                rows.retain(|r| !gone(r));
            }
            self.index_foreign.retain(|_, rows| !rows.is_empty());
        }
        for lp in removed {
            self.lang_pos.remove(&lp);
            if let Some(c) = self.children.remove(&lp) {
                for id in c.meanings {
                    self.meaning.remove(&id);
                }
                for id in c.relations {
                    self.relation.remove(&id);
                }
                for id in c.translations {
                    self.translation.remove(&id);
                }
                for id in c.entries {
                    self.translation_entry.remove(&id);
                }
                for id in c.inflections {
                    self.inflection.remove(&id);
                }
            }
        }
    }

    /// Upserts one page keyed by title: an existing page keeps its id and
    /// has its rows replaced.
    pub fn apply(&mut self, bundle: &PageBundle) -> SavedIds {
        let page_id = match self.page_by_title.get(&bundle.title) {
            Some(&id) => {
                self.remove_page_children(id);
                id
            }
            None => {
                let id = self.next_id("page");
                self.page_by_title.insert(bundle.title.clone(), id);
                id
            }
        };
        let redirect_target = bundle.soft_redirect_target().map(str::to_string);
        self.page.insert(
            page_id,
            PageRow {
                id: page_id,
                title: bundle.title.clone(),
                record_id: bundle.record_id,
                is_soft_redirect: redirect_target.is_some(),
                redirect_target,
            },
        );

        let mut lang_pos_ids = Vec::with_capacity(bundle.lang_pos.len());
        for lp in &bundle.lang_pos {
            let lang_id = self.intern_lang(&lp.language);
            let pos_id = self.intern_pos(lp.pos.as_str());
            let lp_id = self.next_id("lang_pos");
            self.lang_pos.insert(
                lp_id,
                LangPosRow {
                    id: lp_id,
                    page_id,
                    lang_id,
                    pos_id,
                    etymology_ordinal: lp.etymology_ordinal,
                },
            );
            lang_pos_ids.push(lp_id);
            let mut children = Children::default();

            let mut by_ordinal = HashMap::new();
            for m in &lp.meanings {
                let wiki_text_id = self.intern_text(&m.wikitext);
                let id = self.next_id("meaning");
                self.meaning.insert(
                    id,
                    MeaningRow {
                        id,
                        lang_pos_id: lp_id,
                        ordinal: m.ordinal,
                        wiki_text_id,
                    },
                );
                by_ordinal.insert(m.ordinal, id);
                children.meanings.push(id);
            }

            for r in &lp.relations {
                let wiki_text_id = self.intern_text(&r.target_wikitext);
                let relation_type_id = RelationType::ALL
                    .iter()
                    .position(|t| *t == r.relation_type)
                    .expect("closed enum") as u64
                    + 1;
                let id = self.next_id("relation");
                self.relation.insert(
                    id,
                    RelationRow {
                        id,
                        meaning_id: r.meaning_ordinal.and_then(|o| by_ordinal.get(&o).copied()),
                        lang_pos_id: lp_id,
                        relation_type_id,
                        wiki_text_id,
                    },
                );
                children.relations.push(id);
            }

            for b in &lp.translations {
                let gloss_wiki_text_id = (!b.gloss.is_empty()).then(|| self.intern_text(&b.gloss));
                let translation_id = self.next_id("translation");
                self.translation.insert(
                    translation_id,
                    TranslationRow {
                        id: translation_id,
                        lang_pos_id: lp_id,
                        gloss_wiki_text_id,
                    },
                );
                children.translations.push(translation_id);
                for e in &b.entries {
                    let lang_id = self.intern_lang(&e.language);
                    let wiki_text_id = self.intern_text(&e.target_wikitext);
                    let id = self.next_id("translation_entry");
                    self.translation_entry.insert(
                        id,
                        TranslationEntryRow {
                            id,
                            translation_id,
                            lang_id,
                            wiki_text_id,
                            transliteration: e.transliteration.clone(),
                        },
                    );
                    children.entries.push(id);
                }
            }

            if let Some(sr) = &lp.soft_redirect {
                let id = self.next_id("inflection");
                self.inflection.insert(
                    id,
                    InflectionRow {
                        id,
                        lang_pos_id: lp_id,
                        form_kind: sr.form_kind.clone(),
                        lemma_title: sr.lemma_title.clone(),
                    },
                );
                children.inflections.push(id);
            }
            self.children.insert(lp_id, children);
        }
        self.lang_pos_by_page.insert(page_id, lang_pos_ids.clone());
        SavedIds {
            page_id,
            lang_pos_ids,
        }
    }

    /// Rebuilds every index table from lang_pos. Returns row counts by
    /// table name.
    pub fn build_indexes(&mut self, native: &str) -> BTreeMap<String, usize> {
        let mut native_rows = Vec::new();
        let mut foreign: BTreeMap<String, Vec<IndexRow>> = BTreeMap::new();
        for lp in self.lang_pos.values() {
            let (Some(page), Some(lang)) = (self.page.get(&lp.page_id), self.lang.get(&lp.lang_id))
            else {
                continue;
            };
            let row = IndexRow {
                word: page.title.clone(),
                lang_pos_id: lp.id,
            };
            if lang.code == native {
                native_rows.push(row);
            } else {
                foreign
                    .entry(lang.code.to_lowercase())
                    .or_default()
                    .push(row);
            }
        }
        native_rows.sort();
        for rows in foreign.values_mut() {
            rows.sort();
        }
        self.index_native = native_rows;
        self.index_foreign = foreign;
        self.native_language = Some(native.to_string());
        self.index_counts()
    }

    pub fn index_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        counts.insert(INDEX_NATIVE.to_string(), self.index_native.len());
        for (code, rows) in &self.index_foreign {
            counts.insert(index_table_name(code), rows.len());
        }
        counts
    }

    /// Index rows for `code` (the native language or a foreign one) whose
    /// word starts with `prefix`.
    pub fn index_prefix(&self, code: &str, prefix: &str) -> &[IndexRow] {
        let rows: &[IndexRow] = if self.native_language.as_deref() == Some(code) {
            &self.index_native
        } else {
            match self.index_foreign.get(&code.to_lowercase()) {
                Some(rows) => rows,
                None => return &[],
            }
        };
        let start = rows.partition_point(|r| r.word.as_str() < prefix);
        let len = rows[start..].partition_point(|r| r.word.starts_with(prefix));
        &rows[start..start + len]
    }

    pub fn table_sizes(&self) -> BTreeMap<String, u64> {
        let mut sizes: BTreeMap<String, u64> = BTreeMap::new();
        let counts = [
            self.page.len(),
            self.lang.len(),
            self.pos.len(),
            self.lang_pos.len(),
            self.wiki_text.len(),
            self.wiki_text_words.len(),
            self.meaning.len(),
            self.relation_type.len(),
            self.relation.len(),
            self.translation.len(),
            self.translation_entry.len(),
            self.inflection.len(),
        ];
        for (name, n) in TABLE_NAMES.iter().zip(counts) {
            sizes.insert(name.to_string(), n as u64);
        }
        for (name, n) in self.index_counts() {
            sizes.insert(name, n as u64);
        }
        sizes
    }

    /// Recomputes lookup maps and id counters after rows were loaded
    /// directly. Counters already present are kept if larger.
    pub fn rebuild_lookups(&mut self) {
        self.page_by_title = self
            .page
            .values()
            .map(|p| (p.title.clone(), p.id))
            .collect();
        self.lang_by_code = self.lang.values().map(|l| (l.code.clone(), l.id)).collect();
        self.pos_by_name = self.pos.values().map(|p| (p.name.clone(), p.id)).collect();
        self.text_by_hash.clear();
        for t in self.wiki_text.values() {
            self.text_by_hash
                .entry(text_hash(&t.text))
                .or_default()
                .push(t.id);
        }
        self.lang_pos_by_page.clear();
        self.children.clear();
        for lp in self.lang_pos.values() {
            self.lang_pos_by_page
                .entry(lp.page_id)
                .or_default()
                .push(lp.id);
            self.children.entry(lp.id).or_default();
        }
        for m in self.meaning.values() {
            self.children
                .entry(m.lang_pos_id)
                .or_default()
                .meanings
                .push(m.id);
        }
        for r in self.relation.values() {
            self.children
                .entry(r.lang_pos_id)
                .or_default()
                .relations
                .push(r.id);
        }
        for t in self.translation.values() {
            self.children
                .entry(t.lang_pos_id)
                .or_default()
                .translations
                .push(t.id);
        }
        for e in self.translation_entry.values() {
            if let Some(t) = self.translation.get(&e.translation_id) {
                self.children
                    .entry(t.lang_pos_id)
                    .or_default()
                    .entries
                    .push(e.id);
            }
        }
        for i in self.inflection.values() {
            self.children
                .entry(i.lang_pos_id)
                .or_default()
                .inflections
                .push(i.id);
        }

        let maxima = [
            ("page", self.page.keys().next_back()),
            ("lang", self.lang.keys().next_back()),
            ("pos", self.pos.keys().next_back()),
            ("lang_pos", self.lang_pos.keys().next_back()),
            ("wiki_text", self.wiki_text.keys().next_back()),
            ("wiki_text_words", self.wiki_text_words.keys().next_back()),
            ("meaning", self.meaning.keys().next_back()),
            ("relation_type", self.relation_type.keys().next_back()),
            ("relation", self.relation.keys().next_back()),
            ("translation", self.translation.keys().next_back()),
            (
                "translation_entry",
                self.translation_entry.keys().next_back(),
            ),
            ("inflection", self.inflection.keys().next_back()),
        ];
        for (table, max) in maxima {
            let floor = max.map_or(1, |m| m + 1);
            let slot = self.next_ids.entry(table.to_string()).or_insert(floor);
            *slot = (*slot).max(floor);
        }
    }

    /// First referential-integrity or uniqueness violation, if any.
    pub fn check_integrity(&self) -> Result<(), String> {
        fn need<T>(
            map: &BTreeMap<u64, T>,
            id: u64,
            what: &str,
            table: &str,
            row: u64,
        ) -> Result<(), String> {
            if map.contains_key(&id) {
                Ok(())
            } else {
                Err(format!("{table} row {row}: dangling {what} {id}"))
            }
        }
        if self.relation_type.len() != RelationType::ALL.len() {
            return Err(format!(
                "relation_type has {} rows, expected {}",
                self.relation_type.len(),
                RelationType::ALL.len()
            ));
        }
        let mut titles = HashSet::new();
        for p in self.page.values() {
            if !titles.insert(p.title.as_str()) {
                return Err(format!("page row {}: duplicate title {:?}", p.id, p.title));
            }
        }
        let mut keys = HashSet::new();
        for lp in self.lang_pos.values() {
            need(&self.page, lp.page_id, "page_id", "lang_pos", lp.id)?;
            need(&self.lang, lp.lang_id, "lang_id", "lang_pos", lp.id)?;
            need(&self.pos, lp.pos_id, "pos_id", "lang_pos", lp.id)?;
            if !keys.insert((lp.page_id, lp.lang_id, lp.pos_id, lp.etymology_ordinal)) {
                return Err(format!("lang_pos row {}: duplicate key", lp.id));
            }
        }
        for w in self.wiki_text_words.values() {
            need(
                &self.wiki_text,
                w.wiki_text_id,
                "wiki_text_id",
                "wiki_text_words",
                w.id,
            )?;
        }
        for m in self.meaning.values() {
            need(
                &self.lang_pos,
                m.lang_pos_id,
                "lang_pos_id",
                "meaning",
                m.id,
            )?;
            need(
                &self.wiki_text,
                m.wiki_text_id,
                "wiki_text_id",
                "meaning",
                m.id,
            )?;
        }
        for r in self.relation.values() {
            if let Some(mid) = r.meaning_id {
                need(&self.meaning, mid, "meaning_id", "relation", r.id)?;
            }
            need(
                &self.lang_pos,
                r.lang_pos_id,
                "lang_pos_id",
                "relation",
                r.id,
            )?;
            need(
                &self.relation_type,
                r.relation_type_id,
                "relation_type_id",
                "relation",
                r.id,
            )?;
            need(
                &self.wiki_text,
                r.wiki_text_id,
                "wiki_text_id",
                "relation",
                r.id,
            )?;
        }
        for t in self.translation.values() {
            need(
                &self.lang_pos,
                t.lang_pos_id,
                "lang_pos_id",
                "translation",
                t.id,
            )?;
            if let Some(g) = t.gloss_wiki_text_id {
                need(
                    &self.wiki_text,
                    g,
                    "gloss_wiki_text_id",
                    "translation",
                    t.id,
                )?;
            }
        }
        for e in self.translation_entry.values() {
            need(
                &self.translation,
                e.translation_id,
                "translation_id",
                "translation_entry",
                e.id,
            )?;
            need(&self.lang, e.lang_id, "lang_id", "translation_entry", e.id)?;
            need(
                &self.wiki_text,
                e.wiki_text_id,
                "wiki_text_id",
                "translation_entry",
                e.id,
            )?;
        }
        for i in self.inflection.values() {
            need(
                &self.lang_pos,
                i.lang_pos_id,
                "lang_pos_id",
                "inflection",
                i.id,
            )?;
        }
        let indexes = std::iter::once(("native", &self.index_native)).chain(
            self.index_foreign
                .iter()
                .map(|(c, rows)| (c.as_str(), rows)),
        );
        for (name, rows) in indexes {
            for r in rows {
                if !self.lang_pos.contains_key(&r.lang_pos_id) {
                    return Err(format!(
                        "index_{name}: dangling lang_pos_id {}",
                        r.lang_pos_id
                    ));
                }
            }
        }
        Ok(())
    }
}
