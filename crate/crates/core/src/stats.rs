//! Dictionary statistics and cross-dictionary comparison.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::store::{Store, Tables};
use crate::wikitext::strip_markup;

/// Relation counts at or above this land in the overflow bucket.
pub const HISTOGRAM_OVERFLOW: usize = 13;

/// Marker printed for a ratio with a zero denominator.
pub const INFINITY_MARKER: &str = "∞";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("table sets differ: only in first {only_a:?}, only in second {only_b:?}")]
    MismatchedTables {
        only_a: Vec<String>,
        only_b: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub numerator: u64,
    pub denominator: u64,
}

impl Ratio {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        Ratio {
            numerator,
            denominator,
        }
    }

    /// `None` for n/0 with n > 0; 0/0 counts as zero.
    pub fn value(&self) -> Option<f64> {
        match (self.numerator, self.denominator) {
            (0, 0) => Some(0.0),
            (_, 0) => None,
            (n, d) => Some(n as f64 / d as f64),
        }
    }

    /// Two-decimal rendering, or the infinity marker.
    pub fn display(&self) -> String {
        self.value()
            .map(|v| format!("{v:.2}"))
            .unwrap_or_else(|| INFINITY_MARKER.to_string())
    }

    pub fn display_percent(&self) -> String {
        self.value()
            .map(|v| format!("{:.2}", v * 100.0))
            .unwrap_or_else(|| INFINITY_MARKER.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NativeStats {
    /// Pages in the store; stands in for the wiki's content page count.
    pub content_pages: u64,
    /// lang_pos rows with at least one relation.
    pub words_with_relations: u64,
    /// lang_pos rows in the native language.
    pub native_words: u64,
    pub native_native_relations: u64,
    /// native_words / content_pages.
    pub native_fraction: Ratio,
    /// words_with_relations / content_pages.
    pub relations_fraction: Ratio,
    /// native_native_relations / native_words.
    pub avg_relations_per_native_word: Ratio,
    pub empty_store: bool,
}

impl NativeStats {
    pub fn from_counts(
        content_pages: u64,
        words_with_relations: u64,
        native_words: u64,
        native_native_relations: u64,
    ) -> Self {
        NativeStats {
            content_pages,
            words_with_relations,
            native_words,
            native_native_relations,
            native_fraction: Ratio::new(native_words, content_pages),
            relations_fraction: Ratio::new(words_with_relations, content_pages),
            avg_relations_per_native_word: Ratio::new(native_native_relations, native_words),
            empty_store: content_pages == 0,
        }
    }
}

fn native_lang_pos(t: &Tables, native: &str) -> HashSet<u64> {
    match t.lang_id(native) {
        Some(lang_id) => t
            .lang_pos
            .values()
            .filter(|lp| lp.lang_id == lang_id)
            .map(|lp| lp.id)
            .collect(),
        None => HashSet::new(),
    }
}

/// Target word of a relation or translation row.
pub fn target_word(t: &Tables, wiki_text_id: u64) -> String {
    t.text(wiki_text_id).map(strip_markup).unwrap_or_default()
}

pub fn compute_native_stats(store: &Store, native: &str) -> NativeStats {
    let t = store.tables();
    let with_relations: HashSet<u64> = t.relation.values().map(|r| r.lang_pos_id).collect();
    let native_lp = native_lang_pos(t, native);
    let native_titles: HashSet<&str> = native_lp
        .iter()
        .filter_map(|id| t.lang_pos.get(id))
        .filter_map(|lp| t.page.get(&lp.page_id))
        .map(|p| p.title.as_str())
        .collect();
    let native_native = t
        .relation
        .values()
        .filter(|r| native_lp.contains(&r.lang_pos_id))
        .filter(|r| native_titles.contains(target_word(t, r.wiki_text_id).as_str()))
        .count();
    NativeStats::from_counts(
        t.page.len() as u64,
        with_relations.len() as u64,
        native_lp.len() as u64,
        native_native as u64,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationHistogram {
    /// `buckets[n]` counts lang_pos groups with n relations; the last
    /// bucket holds 13 or more.
    pub buckets: [u64; HISTOGRAM_OVERFLOW + 1],
}

impl RelationHistogram {
    pub fn total(&self) -> u64 {
        self.buckets.iter().sum()
    }

    pub fn label(i: usize) -> String {
        if i == HISTOGRAM_OVERFLOW {
            format!("{HISTOGRAM_OVERFLOW}+")
        } else {
            i.to_string()
        }
    }
}

/// Relations per lang_pos group, every group included.
pub fn relation_histogram(store: &Store) -> RelationHistogram {
    let t = store.tables();
    let mut per_group: HashMap<u64, usize> = t.lang_pos.keys().map(|&id| (id, 0)).collect();
    for r in t.relation.values() {
        *per_group.entry(r.lang_pos_id).or_default() += 1;
    }
    let mut buckets = [0u64; HISTOGRAM_OVERFLOW + 1];
    for n in per_group.into_values() {
        buckets[n.min(HISTOGRAM_OVERFLOW)] += 1;
    }
    RelationHistogram { buckets }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeCountDistribution {
    /// `counts[k]` counts groups with k distinct relation types; index 0
    /// is unused.
    pub counts: [u64; 10],
}

pub fn type_count_distribution(store: &Store) -> TypeCountDistribution {
    let t = store.tables();
    let mut types: HashMap<u64, BTreeSet<u64>> = HashMap::new();
    for r in t.relation.values() {
        types
            .entry(r.lang_pos_id)
            .or_default()
            .insert(r.relation_type_id);
    }
    let mut counts = [0u64; 10];
    for set in types.values() {
        counts[set.len().min(9)] += 1;
    }
    TypeCountDistribution { counts }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranslationStats {
    pub boxes: u64,
    /// Boxes with no entries, such as a bare translations heading.
    pub empty_boxes: u64,
    pub entries: u64,
    pub target_languages: u64,
    pub words_with_translations: u64,
}

pub fn translation_stats(store: &Store) -> TranslationStats {
    let t = store.tables();
    let filled: HashSet<u64> = t
        .translation_entry
        .values()
        .map(|e| e.translation_id)
        .collect();
    let languages: HashSet<u64> = t.translation_entry.values().map(|e| e.lang_id).collect();
    let words: HashSet<u64> = t.translation.values().map(|b| b.lang_pos_id).collect();
    TranslationStats {
        boxes: t.translation.len() as u64,
        empty_boxes: t
            .translation
            .keys()
            .filter(|id| !filled.contains(id))
            .count() as u64,
        entries: t.translation_entry.len() as u64,
        target_languages: languages.len() as u64,
        words_with_translations: words.len() as u64,
    }
}

/// Elementwise `a / b` over two table-size maps with the same keys.
pub fn ratio_report(
    sizes_a: &BTreeMap<String, u64>,
    sizes_b: &BTreeMap<String, u64>,
) -> Result<Vec<(String, Ratio)>, StatsError> {
    let only_a: Vec<String> = sizes_a
        .keys()
        .filter(|k| !sizes_b.contains_key(*k))
        .cloned()
        .collect();
    let only_b: Vec<String> = sizes_b
        .keys()
        .filter(|k| !sizes_a.contains_key(*k))
        .cloned()
        .collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        return Err(StatsError::MismatchedTables { only_a, only_b });
    }
    Ok(sizes_a
        .iter()
        .map(|(name, &a)| (name.clone(), Ratio::new(a, sizes_b[name])))
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LanguageCoverage {
    pub only_a: u64,
    pub only_b: u64,
    pub both: u64,
    pub meanings_a: u64,
    pub meanings_b: u64,
    pub relations_a: u64,
    pub relations_b: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub languages: BTreeMap<String, LanguageCoverage>,
    /// Languages with entries in only one of the stores.
    pub red_list: Vec<(String, Side)>,
    /// Languages by meanings(A) - meanings(B), largest first.
    pub ranked_by_meanings: Vec<(String, i64)>,
    /// Languages by relations(A) - relations(B), largest first.
    pub ranked_by_relations: Vec<(String, i64)>,
}

#[derive(Default)]
struct LanguageSide {
    titles: HashSet<String>,
    meanings: u64,
    relations: u64,
}

fn per_language(t: &Tables) -> HashMap<String, LanguageSide> {
    let mut meanings: HashMap<u64, u64> = HashMap::new();
    for m in t.meaning.values() {
        *meanings.entry(m.lang_pos_id).or_default() += 1;
    }
    let mut relations: HashMap<u64, u64> = HashMap::new();
    for r in t.relation.values() {
        *relations.entry(r.lang_pos_id).or_default() += 1;
    }
    let mut out: HashMap<String, LanguageSide> = HashMap::new();
    for lp in t.lang_pos.values() {
        let (Some(code), Some(page)) = (t.lang_code(lp.lang_id), t.page.get(&lp.page_id)) else {
            continue;
        };
        let side = out.entry(code.to_string()).or_default();
        side.titles.insert(page.title.clone());
        side.meanings += meanings.get(&lp.id).copied().unwrap_or(0);
        side.relations += relations.get(&lp.id).copied().unwrap_or(0);
    }
    out
}

fn ranked(
    languages: &BTreeMap<String, LanguageCoverage>,
    key: impl Fn(&LanguageCoverage) -> i64,
) -> Vec<(String, i64)> {
    let mut v: Vec<(String, i64)> = languages.iter().map(|(c, l)| (c.clone(), key(l))).collect();
    v.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    v
}

pub fn compare_dictionaries(a: &Store, b: &Store) -> CoverageReport {
    let side_a = per_language(a.tables());
    let side_b = per_language(b.tables());
    let codes: BTreeSet<&String> = side_a.keys().chain(side_b.keys()).collect();
    let empty = LanguageSide::default();
    let mut languages = BTreeMap::new();
    let mut red_list = Vec::new();
    for code in codes {
        let la = side_a.get(code).unwrap_or(&empty);
        let lb = side_b.get(code).unwrap_or(&empty);
        let both = la.titles.intersection(&lb.titles).count() as u64;
        languages.insert(
            code.clone(),
            LanguageCoverage {
                only_a: la.titles.len() as u64 - both,
                only_b: lb.titles.len() as u64 - both,
                both,
                meanings_a: la.meanings,
                meanings_b: lb.meanings,
                relations_a: la.relations,
                relations_b: lb.relations,
            },
        );
        match (side_a.contains_key(code), side_b.contains_key(code)) {
            (true, false) => red_list.push((code.clone(), Side::A)),
            (false, true) => red_list.push((code.clone(), Side::B)),
            _ => {}
        }
    }
    CoverageReport {
        ranked_by_meanings: ranked(&languages, |l| l.meanings_a as i64 - l.meanings_b as i64),
        ranked_by_relations: ranked(&languages, |l| l.relations_a as i64 - l.relations_b as i64),
        languages,
        red_list,
    }
}

/// One reported number.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: String,
    pub numerator: Option<u64>,
    pub denominator: Option<u64>,
}

impl Metric {
    pub fn count(name: impl Into<String>, n: u64) -> Self {
        Metric {
            name: name.into(),
            value: n.to_string(),
            numerator: Some(n),
            denominator: None,
        }
    }

    pub fn ratio(name: impl Into<String>, r: Ratio) -> Self {
        Metric {
            name: name.into(),
            value: r.display(),
            numerator: Some(r.numerator),
            denominator: Some(r.denominator),
        }
    }

    pub fn percent(name: impl Into<String>, r: Ratio) -> Self {
        Metric {
            value: r.display_percent(),
            ..Metric::ratio(name, r)
        }
    }

    fn json(&self) -> serde_json::Value {
        let value = match self.value.parse::<f64>() {
            Ok(v) if self.value != INFINITY_MARKER => json!(v),
            _ => json!(self.value),
        };
        json!({
            "name": self.name,
            "value": value,
            "numerator": self.numerator,
            "denominator": self.denominator,
        })
    }
}

/// Every statistic of one store, in report order.
pub fn store_metrics(store: &Store) -> Vec<Metric> {
    let t = store.tables();
    let mut out = Vec::new();
    for (name, n) in store.table_sizes() {
        out.push(Metric::count(format!("table.{name}"), n));
    }
    let native = t.native_language.clone().unwrap_or_default();
    let ns = compute_native_stats(store, &native);
    out.push(Metric::count(
        "native.words_with_relations",
        ns.words_with_relations,
    ));
    out.push(Metric::count("native.native_words", ns.native_words));
    out.push(Metric::count(
        "native.native_native_relations",
        ns.native_native_relations,
    ));
    out.push(Metric::percent(
        "native.native_fraction_percent",
        ns.native_fraction,
    ));
    out.push(Metric::percent(
        "native.relations_fraction_percent",
        ns.relations_fraction,
    ));
    out.push(Metric::ratio(
        "native.avg_relations_per_native_word",
        ns.avg_relations_per_native_word,
    ));
    let h = relation_histogram(store);
    for (i, n) in h.buckets.iter().enumerate() {
        out.push(Metric::count(
            format!("histogram.{}", RelationHistogram::label(i)),
            *n,
        ));
    }
    let d = type_count_distribution(store);
    for k in 1..=9 {
        out.push(Metric::count(format!("relation_types.{k}"), d.counts[k]));
    }
    let ts = translation_stats(store);
    out.push(Metric::count("translation.boxes", ts.boxes));
    out.push(Metric::count("translation.empty_boxes", ts.empty_boxes));
    out.push(Metric::count("translation.entries", ts.entries));
    out.push(Metric::count(
        "translation.target_languages",
        ts.target_languages,
    ));
    out.push(Metric::count(
        "translation.words_with_translations",
        ts.words_with_translations,
    ));
    out.push(Metric::count("store.truncated_texts", t.truncated_texts));
    out
}

pub fn render_text(metrics: &[Metric]) -> String {
    let width = metrics.iter().map(|m| m.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for m in metrics {
        let _ = writeln!(out, "{:<width$}  {}", m.name, m.value);
    }
    out
}

pub fn render_json_lines(metrics: &[Metric]) -> String {
    let mut out = String::new();
    for m in metrics {
        out.push_str(&m.json().to_string());
        out.push('\n');
    }
    out
}

pub fn render_coverage(report: &CoverageReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>8} {:>8} {:>8} {:>10} {:>10} {:>10} {:>10}",
        "language", "only_a", "only_b", "both", "meanings_a", "meanings_b", "rel_a", "rel_b"
    );
    for (code, l) in &report.languages {
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>8} {:>8} {:>10} {:>10} {:>10} {:>10}",
            code,
            l.only_a,
            l.only_b,
            l.both,
            l.meanings_a,
            l.meanings_b,
            l.relations_a,
            l.relations_b
        );
    }
    let _ = writeln!(out, "\nred list ({}):", report.red_list.len());
    for (code, side) in &report.red_list {
        let _ = writeln!(out, "  {code} only in {side:?}");
    }
    let _ = writeln!(out, "\nbetter presented by meanings (a - b):");
    for (code, diff) in report.ranked_by_meanings.iter().filter(|(_, d)| *d != 0) {
        let _ = writeln!(out, "  {code} {diff:+}");
    }
    let _ = writeln!(out, "\nbetter presented by relations (a - b):");
    for (code, diff) in report.ranked_by_relations.iter().filter(|(_, d)| *d != 0) {
        let _ = writeln!(out, "  {code} {diff:+}");
    }
    out
}
