mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{fixture, fixtures, parse_fixture, parse_pages};
use wiktmrd::lookup::{lookup, reverse_matches};
use wiktmrd::registry::{Dialect, Registry};
use wiktmrd::stats::{relation_histogram, type_count_distribution};
use wiktmrd::store::{Store, Tables};

fn store_of(dialect: Dialect, title: &str) -> (tempfile::TempDir, Store) {
    let tmp = tempfile::tempdir().unwrap();
    let store = parse_fixture(tmp.path(), &fixture(dialect, title));
    (tmp, store)
}

/// (relation rows, distinct type ids) per lang_pos, in lang_pos order.
fn groups(t: &Tables) -> Vec<(usize, usize)> {
    let mut by_lp: BTreeMap<u64, (usize, BTreeSet<u64>)> = BTreeMap::new();
    for r in t.relation.values() {
        let e = by_lp.entry(r.lang_pos_id).or_default();
        e.0 += 1;
        e.1.insert(r.relation_type_id);
    }
    by_lp
        .into_values()
        .map(|(n, types)| (n, types.len()))
        .collect()
}

fn type_names(t: &Tables) -> BTreeSet<String> {
    t.relation
        .values()
        .map(|r| t.relation_type[&r.relation_type_id].name.clone())
        .collect()
}

/// (language code, target word, transliteration) of every translation entry.
fn translations(t: &Tables) -> Vec<(String, String, String)> {
    t.translation_entry
        .values()
        .map(|e| {
            let text = &t.wiki_text[&e.wiki_text_id].text;
            let word = text
                .trim_start_matches("[[")
                .trim_end_matches("]]")
                .to_string();
            (
                t.lang[&e.lang_id].code.clone(),
                word,
                e.transliteration.clone(),
            )
        })
        .collect()
}

#[test]
fn toe_has_seven_relations_of_six_types() {
    let (_tmp, s) = store_of(Dialect::En, "toe");
    let t = s.tables();
    assert_eq!(groups(t), [(7, 6)]);
    let want: BTreeSet<String> = [
        "synonym",
        "antonym",
        "hyponym",
        "holonym",
        "meronym",
        "coordinate_term",
    ]
    .map(String::from)
    .into();
    assert_eq!(type_names(t), want);
    assert_eq!(relation_histogram(&s).buckets[7], 1);
}

#[test]
fn paw_homonyms() {
    let (_tmp, s) = store_of(Dialect::En, "paw");
    let t = s.tables();
    assert_eq!(groups(t), [(12, 4), (7, 5)]);
    let nouns: Vec<u32> = t
        .lang_pos
        .values()
        .filter(|lp| t.pos[&lp.pos_id].name == "noun")
        .map(|lp| lp.etymology_ordinal)
        .collect();
    assert_eq!(nouns, [1, 2]);
    let d = type_count_distribution(&s);
    assert_eq!((d.counts[4], d.counts[5]), (1, 1));
}

#[test]
fn iron_has_six_types() {
    let (_tmp, s) = store_of(Dialect::En, "iron");
    let t = s.tables();
    let want: BTreeSet<String> = [
        "synonym",
        "hypernym",
        "hyponym",
        "meronym",
        "holonym",
        "coordinate_term",
    ]
    .map(String::from)
    .into();
    assert_eq!(type_names(t), want);
    assert_eq!(type_count_distribution(&s).counts[6], 1);
}

#[test]
fn bush_translations() {
    let (_tmp, s) = store_of(Dialect::En, "bush");
    let tr = translations(s.tables());
    assert!(tr.contains(&("fi".into(), "pensas".into(), "".into())));
    assert!(tr.contains(&("ko".into(), "수풀".into(), "supul".into())));
}

#[test]
fn angel_translations() {
    let (_tmp, s) = store_of(Dialect::Ru, "ангел");
    let tr = translations(s.tables());
    assert!(tr.contains(&("fi".into(), "enkeli".into(), "".into())));
    assert!(tr.contains(&("ko".into(), "천사".into(), "".into())));
    assert_eq!(
        reverse_matches(&s, "enkeli", Some("fi")),
        [("ангел".to_string(), "fi".to_string())]
    );
}

#[test]
fn dogs_is_a_soft_redirect_to_dog() {
    let (_tmp, s) = store_of(Dialect::En, "dogs");
    let page = s.tables().page.values().next().unwrap();
    assert!(page.is_soft_redirect);
    assert_eq!(page.redirect_target.as_deref(), Some("dog"));
}

#[test]
fn sobaka_empty_headers_add_nothing() {
    let (_tmp, s) = store_of(Dialect::Ru, "собака");
    let t = s.tables();
    let names = type_names(t);
    assert!(!names.contains("antonym") && !names.contains("holonym") && !names.contains("meronym"));
    assert_eq!(t.relation.len(), 11);
}

#[test]
fn nationality_lookup_shows_everything() {
    let (_tmp, s) = store_of(Dialect::En, "nationality");
    let out = lookup(&s, "nationality", None).unwrap();
    assert!(
        out.contains("1. Membership of a nation or sovereign state"),
        "{out}"
    );
    assert!(
        out.contains("Synonyms: citizenship (1), ethnicity (3)"),
        "{out}"
    );
    assert!(out.contains("Hypernyms: people (3)"), "{out}");
    assert!(out.contains("fi: kansallisuus"), "{out}");
    assert!(out.contains("ru: гражданство (graždanstvo)"), "{out}");
}

#[test]
fn degenerate_pages_keep_the_page_row() {
    for title in ["void", "muddle", "lone"] {
        let (_tmp, s) = store_of(Dialect::En, title);
        assert_eq!(s.tables().page.len(), 1, "{title}");
        s.check_integrity().unwrap();
    }
    let (_tmp, s) = store_of(Dialect::En, "qagh");
    assert_eq!(s.tables().lang_pos.len(), 1);
}

#[test]
fn fixture_languages_resolve() {
    let r = Registry::builtin();
    for f in fixtures() {
        let tmp = tempfile::tempdir().unwrap();
        let s = parse_fixture(tmp.path(), &f);
        for lang in s.tables().lang.values() {
            assert!(
                r.lookup_code(&lang.code).is_ok(),
                "{} in {}",
                lang.code,
                f.title
            );
        }
    }
}

#[test]
fn whole_corpus_in_one_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let en: Vec<_> = fixtures()
        .into_iter()
        .filter(|f| f.dialect == Dialect::En)
        .collect();
    let pages: Vec<(&str, &str)> = en
        .iter()
        .map(|f| (f.title.as_str(), f.text.as_str()))
        .collect();
    let (s, report) = parse_pages(tmp.path(), Dialect::En, &pages);
    assert_eq!(report.pages_parsed, en.len() as u64);
    assert_eq!(report.pages_seen, en.len() as u64);
    assert_eq!(s.tables().page.len(), en.len());
    assert_eq!(
        relation_histogram(&s).buckets.iter().sum::<u64>(),
        s.tables().lang_pos.len() as u64
    );
    s.check_integrity().unwrap();
}
