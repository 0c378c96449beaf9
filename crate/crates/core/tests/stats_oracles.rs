mod common;

use std::collections::BTreeMap;

use common::synth::{
    build_store, check_compare, oracle_histogram, oracle_type_counts, overlapping_pair, pages,
};
use rand::rngs::StdRng;
use rand::SeedableRng;
use wiktmrd::stats::{
    compare_dictionaries, compute_native_stats, ratio_report, relation_histogram,
    type_count_distribution, NativeStats,
};

#[test]
fn histogram_and_types_match_plan() {
    for seed in 0..20 {
        let mut rng = StdRng::seed_from_u64(seed);
        let plans = pages(&mut rng, 60, 15, 9);
        let store = build_store(&plans, &mut rng);
        assert_eq!(
            relation_histogram(&store).buckets,
            oracle_histogram(&plans),
            "seed {seed}"
        );
        assert_eq!(
            type_count_distribution(&store).counts,
            oracle_type_counts(&plans),
            "seed {seed}"
        );
    }
}

#[test]
fn compare_matches_set_operations() {
    for seed in 0..20 {
        let mut rng = StdRng::seed_from_u64(seed);
        let (a, b) = overlapping_pair(&mut rng, 40);
        let sa = build_store(&a, &mut rng);
        let sb = build_store(&b, &mut rng);
        check_compare(&compare_dictionaries(&sa, &sb), &a, &b).unwrap();
    }
}

#[test]
fn compare_with_itself_is_all_shared() {
    let mut rng = StdRng::seed_from_u64(7);
    let plans = pages(&mut rng, 50, 15, 9);
    let store = build_store(&plans, &mut rng);
    let report = compare_dictionaries(&store, &store);
    assert!(report.red_list.is_empty());
    assert!(report
        .languages
        .values()
        .all(|l| l.only_a == 0 && l.only_b == 0));
}

#[test]
fn ratio_of_a_store_with_itself_is_one() {
    let mut rng = StdRng::seed_from_u64(8);
    let store = build_store(&pages(&mut rng, 30, 15, 9), &mut rng);
    let sizes = store.table_sizes();
    for (name, r) in ratio_report(&sizes, &sizes).unwrap() {
        if sizes[&name] > 0 {
            assert_eq!(r.display(), "1.00", "{name}");
        }
    }
    let mut other = sizes.clone();
    other.insert("extra".into(), 1);
    assert!(ratio_report(&sizes, &other).is_err());
    assert!(ratio_report(&BTreeMap::new(), &BTreeMap::new())
        .unwrap()
        .is_empty());
}

#[test]
fn native_stats_on_synthetic_store() {
    let mut rng = StdRng::seed_from_u64(9);
    let plans = pages(&mut rng, 80, 15, 9);
    let store = build_store(&plans, &mut rng);
    let stats = compute_native_stats(&store, "en");
    let native_sections = plans
        .iter()
        .flat_map(|p| &p.sections)
        .filter(|s| s.lang == "en")
        .count();
    let with_relations = plans
        .iter()
        .flat_map(|p| &p.sections)
        .filter(|s| !s.relations.is_empty())
        .count();
    assert_eq!(stats.native_words, native_sections as u64);
    assert_eq!(stats.words_with_relations, with_relations as u64);
    assert_eq!(stats.content_pages, plans.len() as u64);
    // generated targets carry a numeric suffix no title ends with alone
    assert_eq!(stats.native_native_relations, 0);
}

#[test]
fn native_relations_need_a_native_target() {
    use wiktmrd::analyze::analyze_page;
    use wiktmrd::entry::Page;
    use wiktmrd::registry::{Dialect, DialectConfig, Registry};
    use wiktmrd::store::Store;

    let r = Registry::builtin();
    let c = DialectConfig::new(Dialect::En, &r).unwrap();
    let pages = [
        ("hot", "==English==\n===Adjective===\n# Warm.\n====Synonyms====\n* [[warm]], [[heated]]\n====Antonyms====\n* [[cold]]\n"),
        ("warm", "==English==\n===Adjective===\n# Not cold.\n====Antonyms====\n* [[cool]]\n"),
        ("cold", "==French==\n===Noun===\n# A misspelling.\n"),
        ("chaud", "==French==\n===Adjective===\n# Hot.\n====Synonyms====\n* [[warm]]\n"),
    ];
    let mut store = Store::in_memory();
    for (i, (title, text)) in pages.iter().enumerate() {
        let page = Page {
            title: title.to_string(),
            raw_text: text.to_string(),
            is_redirect: false,
            record_id: i as u64,
        };
        store
            .save_word(&analyze_page(&page, &c, &r).unwrap())
            .unwrap();
    }
    let stats = compute_native_stats(&store, "en");
    // hot->warm only: heated has no page, cold is French only, chaud is not native
    assert_eq!(stats.native_native_relations, 1);
    assert_eq!(stats.native_words, 2);
    assert_eq!(stats.words_with_relations, 3);
    assert_eq!(stats.content_pages, 4);
    assert_eq!(stats.avg_relations_per_native_word.display(), "0.50");
    assert_eq!(stats.native_fraction.display(), "0.50");
    assert_eq!(stats.relations_fraction.display(), "0.75");
}

#[test]
fn published_ratios() {
    let close = |got: Option<f64>, want: f64| (got.unwrap() - want).abs() <= 0.005;
    let ru = NativeStats::from_counts(1, 0, 129_669, 83_968);
    let en = NativeStats::from_counts(1, 0, 315_343, 43_814);
    assert!(close(ru.avg_relations_per_native_word.value(), 0.65));
    assert!(close(en.avg_relations_per_native_word.value(), 0.14));
    let sizes = |n: u64| BTreeMap::from([("relation".to_string(), n)]);
    let r = ratio_report(&sizes(157_198), &sizes(100_121)).unwrap();
    assert_eq!(r[0].1.display(), "1.57");
    let r = ratio_report(&sizes(59_321), &sizes(38_306)).unwrap();
    assert_eq!(r[0].1.display(), "1.55");
    assert_eq!(
        ratio_report(&sizes(5), &sizes(0)).unwrap()[0].1.display(),
        "∞"
    );
}
