use std::collections::BTreeSet;

use proptest::prelude::*;
use wiktmrd::analyze::analyze_page;
use wiktmrd::entry::{extract_definitions, split_language_sections, split_pos_sections, Page};
use wiktmrd::registry::{Dialect, DialectConfig, Registry};
use wiktmrd::relations::extract_relations;
use wiktmrd::store::Store;
use wiktmrd::translations::extract_translations;
use wiktmrd::wikitext::{scan_headings, scan_templates, scan_wikilinks, strip_markup, Span};

/// Wikitext-ish noise: markup fragments, headings, list markers, letters.
fn wikitext() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        Just("{{".to_string()),
        Just("}}".to_string()),
        Just("[[".to_string()),
        Just("]]".to_string()),
        Just("|".to_string()),
        Just("\n".to_string()),
        Just("\n==English==\n".to_string()),
        Just("\n= {{-ru-}} =\n".to_string()),
        Just("\n===Noun===\n".to_string()),
        Just("\n====Synonyms====\n".to_string()),
        Just("\n==== Синонимы ====\n".to_string()),
        Just("\n==== Значение ====\n".to_string()),
        Just("\n===Etymology 2===\n".to_string()),
        Just("\n====Translations====\n".to_string()),
        Just("{{trans-top|x}}\n".to_string()),
        Just("{{перев-блок|x\n|en=[[y]]\n}}".to_string()),
        Just("* Finnish: {{t|fi|".to_string()),
        Just("\n# ".to_string()),
        Just("\n* ".to_string()),
        Just("=".to_string()),
        "[a-zа-я ,]{0,8}",
        "\\PC{0,4}",
    ];
    prop::collection::vec(piece, 0..40).prop_map(|v| v.concat())
}

fn page(text: &str) -> Page {
    Page {
        title: "x".into(),
        raw_text: text.into(),
        is_redirect: false,
        record_id: 0,
    }
}

fn at_zero(span: Span) -> Span {
    Span::new(0, span.len())
}

fn increasing(spans: &[Span]) -> bool {
    spans.windows(2).all(|w| w[0].start < w[1].start)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn scanned_spans_rescan_to_the_same_value(text in wikitext()) {
        for t in scan_templates(&text) {
            let again = scan_templates(&text[t.span.range()]);
            prop_assert_eq!(again.len(), 1);
            let mut expected = t.clone();
            expected.span = at_zero(t.span);
            prop_assert_eq!(&again[0], &expected);
        }
        for l in scan_wikilinks(&text) {
            let again = scan_wikilinks(&text[l.span.range()]);
            let mut expected = l.clone();
            expected.span = at_zero(l.span);
            prop_assert_eq!(again, vec![expected]);
        }
        for h in scan_headings(&text) {
            let again = scan_headings(&text[h.span.range()]);
            let mut expected = h.clone();
            expected.span = at_zero(h.span);
            prop_assert_eq!(again, vec![expected]);
        }
    }

    #[test]
    fn scanned_items_are_in_source_order(text in wikitext()) {
        prop_assert!(increasing(&scan_templates(&text).iter().map(|t| t.span).collect::<Vec<_>>()));
        prop_assert!(increasing(&scan_wikilinks(&text).iter().map(|l| l.span).collect::<Vec<_>>()));
        prop_assert!(increasing(&scan_headings(&text).iter().map(|h| h.span).collect::<Vec<_>>()));
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,300}") {
        let _ = scan_templates(&text);
        let _ = scan_wikilinks(&text);
        let _ = scan_headings(&text);
        let _ = strip_markup(&text);
        let r = Registry::builtin();
        for dialect in [Dialect::En, Dialect::Ru] {
            let c = DialectConfig::new(dialect, &r).unwrap();
            prop_assert!(analyze_page(&page(&text), &c, &r).is_ok());
        }
    }

    #[test]
    fn language_sections_are_disjoint_and_ordered(text in wikitext()) {
        let r = Registry::builtin();
        for dialect in [Dialect::En, Dialect::Ru] {
            let c = DialectConfig::new(dialect, &r).unwrap();
            let p = page(&text);
            let (sections, _) = split_language_sections(&p, &c, &r);
            let mut last_end = 0;
            for s in &sections {
                prop_assert!(s.offset >= last_end);
                prop_assert_eq!(&text[s.offset..s.offset + s.body.len()], s.body);
                last_end = s.offset + s.body.len();
            }
        }
    }

    #[test]
    fn fuzzed_sections_keep_their_invariants(text in wikitext()) {
        let r = Registry::builtin();
        for dialect in [Dialect::En, Dialect::Ru] {
            let c = DialectConfig::new(dialect, &r).unwrap();
            let p = page(&text);
            let (sections, _) = split_language_sections(&p, &c, &r);
            for ls in &sections {
                for ps in split_pos_sections(ls, dialect, &r) {
                    let meanings = extract_definitions(&ps, dialect, &r);
                    let ordinals: Vec<u32> = meanings.iter().map(|m| m.ordinal).collect();
                    prop_assert_eq!(ordinals, (1..=meanings.len() as u32).collect::<Vec<_>>());
                    for m in &meanings {
                        prop_assert_eq!(&m.definition_plain, &strip_markup(&m.definition_wikitext));
                    }

                    let relations = extract_relations(&ps, &meanings, dialect, &r);
                    let types: BTreeSet<_> = relations.iter().map(|x| x.relation_type).collect();
                    prop_assert!(types.len() <= relations.len().min(9));
                    for rel in &relations {
                        prop_assert!(!rel.target_word.is_empty());
                        prop_assert_eq!(&rel.target_word, &strip_markup(&rel.target_wikitext));
                        if let Some(o) = rel.meaning_ordinal {
                            prop_assert!(o >= 1 && o as usize <= meanings.len());
                        }
                    }

                    let translations = extract_translations(&ps, dialect, &r);
                    for b in &translations.boxes {
                        for e in &b.entries {
                            prop_assert!(!e.target_word.is_empty());
                            prop_assert!(r.lookup_code(&e.language).is_ok());
                        }
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn store_stays_consistent_under_upserts(
        texts in prop::collection::vec((0usize..6, wikitext()), 1..25)
    ) {
        let r = Registry::builtin();
        let c = DialectConfig::new(Dialect::En, &r).unwrap();
        let mut store = Store::in_memory();
        for (i, (title, text)) in texts.iter().enumerate() {
            let p = Page {
                title: format!("w{title}"),
                raw_text: text.clone(),
                is_redirect: false,
                record_id: i as u64,
            };
            store.save_word(&analyze_page(&p, &c, &r).unwrap()).unwrap();
            if i % 7 == 3 {
                store.build_index_tables("en").unwrap();
            }
            prop_assert!(store.check_integrity().is_ok());
        }
        let titles: BTreeSet<usize> = texts.iter().map(|(t, _)| *t).collect();
        prop_assert_eq!(store.tables().page.len(), titles.len());
    }
}

#[test]
fn translation_boxes_match_openings() {
    let r = Registry::builtin();
    let c = DialectConfig::new(Dialect::En, &r).unwrap();
    let text = "==English==\n===Noun===\n# A thing.\n====Translations====\n\
        {{trans-top|a}}\n* Finnish: {{t|fi|a}}\n{{trans-bottom}}\n\
        {{trans-top|b}}\n{{trans-bottom}}\n\
        {{checktrans-top}}\n* German: {{t|de|c}}, {{t|de|d}}\n{{trans-bottom}}\n";
    let p = page(text);
    let bundle = analyze_page(&p, &c, &r).unwrap();
    let boxes = &bundle.lang_pos[0].translations;
    assert_eq!(boxes.len(), text.matches("trans-top").count());
    let words: Vec<&str> = boxes[2]
        .entries
        .iter()
        .map(|e| e.target_word.as_str())
        .collect();
    assert_eq!(words, ["c", "d"]);
}

#[test]
fn registry_names_and_codes_are_a_bijection() {
    let r = Registry::builtin();
    assert!(r.len() >= 540);
    for lang in r.languages() {
        let by_name = r.lookup_english_name(&lang.english_name).unwrap();
        assert_eq!(by_name.code, lang.code, "{}", lang.english_name);
    }
}
