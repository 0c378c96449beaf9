//! Random en-dialect pages built from a plan, so tests can compute
//! expected counts from the plan instead of from the store.

use rand::rngs::StdRng;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub const LANGUAGES: [(&str, &str); 6] = [
    ("en", "English"),
    ("fr", "French"),
    ("de", "German"),
    ("fi", "Finnish"),
    ("it", "Italian"),
    ("es", "Spanish"),
];

/// Headings in the canonical type order.
pub const RELATION_HEADINGS: [&str; 9] = [
    "Synonyms",
    "Antonyms",
    "Hypernyms",
    "Hyponyms",
    "Holonyms",
    "Meronyms",
    "Troponyms",
    "Coordinate terms",
    "See also",
];

const POS_HEADINGS: [&str; 4] = ["Noun", "Verb", "Adjective", "Adverb"];

#[derive(Debug, Clone)]
pub struct SectionPlan {
    pub lang: &'static str,
    pub meanings: usize,
    /// (index into RELATION_HEADINGS, row count), each count ≥ 1.
    pub relations: Vec<(usize, usize)>,
    pub translations: Vec<(&'static str, String)>,
}

impl SectionPlan {
    pub fn relation_count(&self) -> usize {
        self.relations.iter().map(|(_, n)| n).sum()
    }
}

#[derive(Debug, Clone)]
pub struct PagePlan {
    pub title: String,
    pub sections: Vec<SectionPlan>,
}

pub fn word(rng: &mut StdRng) -> String {
    const SYLLABLES: [&str; 12] = [
        "ka", "lo", "mi", "tur", "sen", "pa", "ri", "vo", "den", "el", "qu", "ship",
    ];
    let n = rng.random_range(1..=3);
    (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

/// A section with up to `max_relations` rows spread over up to `max_types`
/// types.
pub fn section(
    rng: &mut StdRng,
    lang: &'static str,
    max_relations: usize,
    max_types: usize,
) -> SectionPlan {
    let total = rng.random_range(0..=max_relations);
    let mut relations = Vec::new();
    if total > 0 {
        let k = rng.random_range(1..=max_types.min(total).min(9));
        let mut types: Vec<usize> = (0..9).collect();
        types.shuffle(rng);
        types.truncate(k);
        types.sort();
        let mut counts = vec![1; k];
        for _ in k..total {
            counts[rng.random_range(0..k)] += 1;
        }
        relations = types.into_iter().zip(counts).collect();
    }
    let translations = (0..rng.random_range(0..3))
        .map(|_| (LANGUAGES[rng.random_range(1..LANGUAGES.len())].0, word(rng)))
        .collect();
    SectionPlan {
        lang,
        meanings: rng.random_range(1..=3),
        relations,
        translations,
    }
}

/// A page with one to three sections in distinct languages.
pub fn page(rng: &mut StdRng, title: String, max_relations: usize, max_types: usize) -> PagePlan {
    let mut langs: Vec<&'static str> = LANGUAGES.iter().map(|l| l.0).collect();
    langs.shuffle(rng);
    let n = rng.random_range(1..=3);
    PagePlan {
        title,
        sections: langs[..n]
            .iter()
            .map(|lang| section(rng, lang, max_relations, max_types))
            .collect(),
    }
}

/// `n` pages with distinct titles.
pub fn pages(rng: &mut StdRng, n: usize, max_relations: usize, max_types: usize) -> Vec<PagePlan> {
    (0..n)
        .map(|i| {
            let title = format!("{}{}", word(rng), i);
            page(rng, title, max_relations, max_types)
        })
        .collect()
}

fn language_name(code: &str) -> &'static str {
    LANGUAGES.iter().find(|l| l.0 == code).unwrap().1
}

pub fn render(plan: &PagePlan, rng: &mut StdRng) -> String {
    let mut out = String::new();
    for s in &plan.sections {
        out.push_str(&format!("=={}==\n\n", language_name(s.lang)));
        out.push_str(&format!(
            "==={}===\n{{{{head|{}}}}}\n\n",
            POS_HEADINGS.choose(rng).unwrap(),
            s.lang
        ));
        for i in 0..s.meanings {
            out.push_str(&format!(
                "# Sense {} of [[{}]].\n#: ''An example.''\n",
                i + 1,
                word(rng)
            ));
        }
        for &(ty, n) in &s.relations {
            out.push_str(&format!("\n===={}====\n", RELATION_HEADINGS[ty]));
            let words: Vec<String> = (0..n).map(|j| format!("[[{}{j}]]", word(rng))).collect();
            out.push_str(&format!("* {}\n", words.join(", ")));
        }
        if !s.translations.is_empty() {
            out.push_str("\n====Translations====\n{{trans-top|sense}}\n");
            for (code, w) in &s.translations {
                out.push_str(&format!(
                    "* {}: {{{{t|{code}|{w}}}}}\n",
                    language_name(code)
                ));
            }
            out.push_str("{{trans-bottom}}\n");
        }
        out.push('\n');
    }
    out
}

pub fn build_store(plans: &[PagePlan], rng: &mut StdRng) -> wiktmrd::store::Store {
    use wiktmrd::analyze::analyze_page;
    use wiktmrd::entry::Page;
    use wiktmrd::registry::{Dialect, DialectConfig, Registry};

    let registry = Registry::builtin();
    let config = DialectConfig::new(Dialect::En, &registry).unwrap();
    let mut store = wiktmrd::store::Store::in_memory();
    for (i, plan) in plans.iter().enumerate() {
        let page = Page {
            title: plan.title.clone(),
            raw_text: render(plan, rng),
            is_redirect: false,
            record_id: i as u64,
        };
        store
            .save_word(&analyze_page(&page, &config, &registry).unwrap())
            .unwrap();
    }
    store
}

pub fn oracle_histogram(plans: &[PagePlan]) -> [u64; 14] {
    let mut buckets = [0u64; 14];
    for s in plans.iter().flat_map(|p| &p.sections) {
        buckets[s.relation_count().min(13)] += 1;
    }
    buckets
}

pub fn oracle_type_counts(plans: &[PagePlan]) -> [u64; 10] {
    let mut counts = [0u64; 10];
    for s in plans.iter().flat_map(|p| &p.sections) {
        if !s.relations.is_empty() {
            counts[s.relations.len()] += 1;
        }
    }
    counts
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct OracleCoverage {
    pub only_a: u64,
    pub only_b: u64,
    pub both: u64,
    pub meanings_a: u64,
    pub meanings_b: u64,
    pub relations_a: u64,
    pub relations_b: u64,
}

/// Per-language coverage by set operations on the plans, plus the codes
/// present on one side only as (code, true if side A).
pub fn oracle_compare(
    a: &[PagePlan],
    b: &[PagePlan],
) -> (
    std::collections::BTreeMap<String, OracleCoverage>,
    Vec<(String, bool)>,
) {
    use std::collections::{BTreeMap, BTreeSet};

    type Side = BTreeMap<&'static str, (BTreeSet<String>, u64, u64)>;
    fn side(plans: &[PagePlan]) -> Side {
        let mut out: Side = BTreeMap::new();
        for p in plans {
            for s in &p.sections {
                let e = out.entry(s.lang).or_default();
                e.0.insert(p.title.clone());
                e.1 += s.meanings as u64;
                e.2 += s.relation_count() as u64;
            }
        }
        out
    }
    let (sa, sb) = (side(a), side(b));
    let empty = (BTreeSet::new(), 0, 0);
    let codes: BTreeSet<&str> = sa.keys().chain(sb.keys()).copied().collect();
    let mut coverage = BTreeMap::new();
    let mut red = Vec::new();
    for code in codes {
        let x = sa.get(code).unwrap_or(&empty);
        let y = sb.get(code).unwrap_or(&empty);
        coverage.insert(
            code.to_string(),
            OracleCoverage {
                only_a: x.0.difference(&y.0).count() as u64,
                only_b: y.0.difference(&x.0).count() as u64,
                both: x.0.intersection(&y.0).count() as u64,
                meanings_a: x.1,
                meanings_b: y.1,
                relations_a: x.2,
                relations_b: y.2,
            },
        );
        match (sa.contains_key(code), sb.contains_key(code)) {
            (true, false) => red.push((code.to_string(), true)),
            (false, true) => red.push((code.to_string(), false)),
            _ => {}
        }
    }
    (coverage, red)
}

/// Two plan sets sharing some titles. Shared titles may carry different
/// sections on each side.
pub fn overlapping_pair(rng: &mut StdRng, max_words: usize) -> (Vec<PagePlan>, Vec<PagePlan>) {
    let n = rng.random_range(0..=max_words);
    let a = pages(rng, n, 15, 9);
    let mut b = Vec::new();
    for p in &a {
        if rng.random_bool(0.4) {
            b.push(page(rng, p.title.clone(), 15, 9));
        }
    }
    let extra = rng.random_range(0..=max_words / 2);
    for i in 0..extra {
        let title = format!("{}b{i}", word(rng));
        b.push(page(rng, title, 15, 9));
    }
    // a language present on one side only
    if rng.random_bool(0.5) {
        for p in &mut b {
            p.sections.retain(|s| s.lang != "es");
        }
        b.retain(|p| !p.sections.is_empty());
    }
    (a, b)
}

/// Checks a store-derived report against the plan oracles. Returns a
/// description of the first difference.
pub fn check_compare(
    report: &wiktmrd::stats::CoverageReport,
    a: &[PagePlan],
    b: &[PagePlan],
) -> Result<(), String> {
    use wiktmrd::stats::Side;

    let (coverage, red) = oracle_compare(a, b);
    let got: std::collections::BTreeMap<String, OracleCoverage> = report
        .languages
        .iter()
        .map(|(code, l)| {
            (
                code.clone(),
                OracleCoverage {
                    only_a: l.only_a,
                    only_b: l.only_b,
                    both: l.both,
                    meanings_a: l.meanings_a,
                    meanings_b: l.meanings_b,
                    relations_a: l.relations_a,
                    relations_b: l.relations_b,
                },
            )
        })
        .collect();
    if got != coverage {
        return Err(format!("coverage {got:?} != {coverage:?}"));
    }
    let got_red: Vec<(String, bool)> = report
        .red_list
        .iter()
        .map(|(c, s)| (c.clone(), *s == Side::A))
        .collect();
    if got_red != red {
        return Err(format!("red list {got_red:?} != {red:?}"));
    }
    let mut by_meanings: Vec<(String, i64)> = coverage
        .iter()
        .map(|(c, l)| (c.clone(), l.meanings_a as i64 - l.meanings_b as i64))
        .collect();
    by_meanings.sort_by_key(|(c, d)| (std::cmp::Reverse(*d), c.clone()));
    if report.ranked_by_meanings != by_meanings {
        return Err(format!(
            "ranking {:?} != {by_meanings:?}",
            report.ranked_by_meanings
        ));
    }
    Ok(())
}
