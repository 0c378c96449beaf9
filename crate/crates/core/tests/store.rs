mod common;

use common::{fixtures, parse_fixture, read_export};
use wiktmrd::store::Store;

#[test]
fn goldens_survive_import_and_export() {
    for f in fixtures() {
        let store = Store::import_tsv(&f.golden_dir()).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        store.export_tsv(tmp.path()).unwrap();
        assert_eq!(
            read_export(tmp.path()),
            read_export(&f.golden_dir()),
            "{}",
            f.title
        );
    }
}

#[test]
fn reopened_store_matches_the_parsed_one() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, f) in fixtures().iter().enumerate() {
        let dir = tmp.path().join(i.to_string());
        let parsed = parse_fixture(&dir, f);
        let reopened = Store::open(&dir.join("store")).unwrap();
        let (a, b) = (dir.join("a"), dir.join("b"));
        parsed.export_tsv(&a).unwrap();
        reopened.export_tsv(&b).unwrap();
        assert_eq!(read_export(&a), read_export(&b), "{}", f.title);
    }
}
