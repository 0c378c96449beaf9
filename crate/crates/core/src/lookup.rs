//! Human-readable entry lookup, forward by title and reverse by
//! translation.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::registry::RelationType;
use crate::stats::target_word;
use crate::store::{Store, Tables};
use crate::wikitext::strip_markup;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LookupError {
    #[error("{0:?} not found")]
    NotFound(String),
}

fn relation_type(t: &Tables, id: u64) -> Option<RelationType> {
    t.relation_type.get(&id).and_then(|r| r.name.parse().ok())
}

fn render_lang_pos(t: &Tables, lang_pos_id: u64, out: &mut String) {
    let Some(lp) = t.lang_pos.get(&lang_pos_id) else {
        return;
    };
    let code = t.lang_code(lp.lang_id).unwrap_or("?");
    let pos = t
        .pos
        .get(&lp.pos_id)
        .map(|p| p.name.as_str())
        .unwrap_or("?");
    let _ = write!(out, "  [{code}] {pos}");
    if lp.etymology_ordinal > 0 {
        let _ = write!(out, " (etymology {})", lp.etymology_ordinal);
    }
    out.push('\n');

    for m in t.meanings_of(lang_pos_id) {
        let text = t.text(m.wiki_text_id).map(strip_markup).unwrap_or_default();
        let _ = writeln!(out, "    {}. {}", m.ordinal, text);
    }
    for inflection in t
        .inflection
        .values()
        .filter(|i| i.lang_pos_id == lang_pos_id)
    {
        let _ = writeln!(
            out,
            "    {} of {}",
            inflection.form_kind, inflection.lemma_title
        );
    }

    let relations = t.relations_of(lang_pos_id);
    for rt in RelationType::ALL {
        let words: Vec<String> = relations
            .iter()
            .filter(|r| relation_type(t, r.relation_type_id) == Some(*rt))
            .map(|r| {
                let word = target_word(t, r.wiki_text_id);
                let ordinal = r
                    .meaning_id
                    .and_then(|id| t.meaning.get(&id))
                    .map(|m| m.ordinal);
                match ordinal {
                    Some(o) => format!("{word} ({o})"),
                    None => word,
                }
            })
            .collect();
        if !words.is_empty() {
            let _ = writeln!(out, "    {}: {}", rt.label(), words.join(", "));
        }
    }

    let entries = t.entries_of(lang_pos_id);
    for b in t.translations_of(lang_pos_id) {
        let gloss = b
            .gloss_wiki_text_id
            .and_then(|id| t.text(id))
            .map(strip_markup)
            .unwrap_or_default();
        let _ = writeln!(out, "    translations: {gloss}");
        for e in entries.iter().filter(|e| e.translation_id == b.id) {
            let code = t.lang_code(e.lang_id).unwrap_or("?");
            let word = target_word(t, e.wiki_text_id);
            if e.transliteration.is_empty() {
                let _ = writeln!(out, "      {code}: {word}");
            } else {
                let _ = writeln!(out, "      {code}: {word} ({})", e.transliteration);
            }
        }
    }
}

/// Every section of the page titled `word`, optionally limited to one
/// language.
pub fn lookup(store: &Store, word: &str, lang: Option<&str>) -> Result<String, LookupError> {
    let t = store.tables();
    let not_found = || LookupError::NotFound(word.to_string());
    let page_id = t.page_id(word).ok_or_else(not_found)?;
    let lang_pos: Vec<u64> = t
        .lang_pos_of_page(page_id)
        .iter()
        .copied()
        .filter(|id| match lang {
            Some(code) => t.lang_pos.get(id).and_then(|lp| t.lang_code(lp.lang_id)) == Some(code),
            None => true,
        })
        .collect();
    if lang_pos.is_empty() {
        return Err(not_found());
    }
    let mut out = format!("{word}\n");
    if let Some(target) = t
        .page
        .get(&page_id)
        .and_then(|p| p.redirect_target.as_deref())
    {
        let _ = writeln!(out, "  see {target}");
    }
    for id in lang_pos {
        render_lang_pos(t, id, &mut out);
    }
    Ok(out)
}

/// Titles of entries with a translation into `word`, with the language of
/// each matching translation.
pub fn reverse_matches(store: &Store, word: &str, lang: Option<&str>) -> Vec<(String, String)> {
    let t = store.tables();
    let mut found = BTreeSet::new();
    for e in t.translation_entry.values() {
        let code = t.lang_code(e.lang_id).unwrap_or("");
        if lang.is_some_and(|l| l != code) || target_word(t, e.wiki_text_id) != word {
            continue;
        }
        let title = t
            .translation
            .get(&e.translation_id)
            .and_then(|b| t.lang_pos.get(&b.lang_pos_id))
            .and_then(|lp| t.page.get(&lp.page_id))
            .map(|p| p.title.clone());
        if let Some(title) = title {
            found.insert((title, code.to_string()));
        }
    }
    found.into_iter().collect()
}

pub fn reverse_lookup(
    store: &Store,
    word: &str,
    lang: Option<&str>,
) -> Result<String, LookupError> {
    let matches = reverse_matches(store, word, lang);
    if matches.is_empty() {
        return Err(LookupError::NotFound(word.to_string()));
    }
    let mut out = String::new();
    for (title, code) in matches {
        let _ = writeln!(out, "{title} <- {code}: {word}");
    }
    Ok(out)
}
