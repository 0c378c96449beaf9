//! Per-page analysis: runs every parser stage over one page and gathers the
//! results into a [`PageBundle`], the unit the store saves atomically.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entry::{
    classify_soft_redirect, extract_definitions, split_language_sections, split_pos_sections, Page,
    SkippedSection, SoftRedirect,
};
use crate::registry::{DialectConfig, PartOfSpeech, Registry};
use crate::relations::{extract_relations, RelationRecord};
use crate::translations::{extract_translations, SkippedLine, TranslationBox};

/// Titles longer than this are rejected, matching MediaWiki's limit.
pub const MAX_TITLE_BYTES: usize = 255;
/// Pages larger than this are rejected rather than analyzed.
pub const MAX_PAGE_BYTES: usize = 8 * 1024 * 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PageError {
    #[error("empty title")]
    EmptyTitle,
    #[error("title longer than {MAX_TITLE_BYTES} bytes")]
    TitleTooLong,
    #[error("title contains control characters")]
    InvalidTitle,
    #[error("page text of {0} bytes exceeds the size limit")]
    PageTooLarge(usize),
    #[error("analysis panicked: {0}")]
    Panicked(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeaningData {
    pub ordinal: u32,
    pub wikitext: String,
}

/// Everything extracted for one (language, etymology, part of speech).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LangPosData {
    pub language: String,
    pub pos: PartOfSpeech,
    pub etymology_ordinal: u32,
    pub meanings: Vec<MeaningData>,
    pub relations: Vec<RelationRecord>,
    pub translations: Vec<TranslationBox>,
    pub soft_redirect: Option<SoftRedirect>,
}

/// The parsed form of one page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageBundle {
    pub title: String,
    pub record_id: u64,
    pub lang_pos: Vec<LangPosData>,
    pub skipped_sections: Vec<SkippedSection>,
    pub skipped_lines: Vec<SkippedLine>,
}

impl PageBundle {
    /// A page is a soft redirect when it has content and every part of
    /// speech on it is a word-form entry.
    pub fn soft_redirect_target(&self) -> Option<&str> {
        if self.lang_pos.is_empty() || self.lang_pos.iter().any(|lp| lp.soft_redirect.is_none()) {
            return None;
        }
        self.lang_pos[0]
            .soft_redirect
            .as_ref()
            .map(|sr| sr.lemma_title.as_str())
    }
}

fn validate(page: &Page) -> Result<(), PageError> {
    if page.title.trim().is_empty() {
        return Err(PageError::EmptyTitle);
    }
    if page.title.len() > MAX_TITLE_BYTES {
        return Err(PageError::TitleTooLong);
    }
    if page.title.chars().any(char::is_control) {
        return Err(PageError::InvalidTitle);
    }
    if page.raw_text.len() > MAX_PAGE_BYTES {
        return Err(PageError::PageTooLarge(page.raw_text.len()));
    }
    Ok(())
}

/// Parses one page. Only structurally invalid pages fail; malformed markup
/// just yields less data.
pub fn analyze_page(
    page: &Page,
    config: &DialectConfig,
    registry: &Registry,
) -> Result<PageBundle, PageError> {
    validate(page)?;
    let dialect = config.dialect;
    let (sections, skipped_sections) = split_language_sections(page, config, registry);

    let mut lang_pos: Vec<LangPosData> = Vec::new();
    let mut skipped_lines = Vec::new();
    for section in &sections {
        for pos_section in split_pos_sections(section, dialect, registry) {
            let meanings = extract_definitions(&pos_section, dialect, registry);
            let relations = extract_relations(&pos_section, &meanings, dialect, registry);
            let translations = extract_translations(&pos_section, dialect, registry);
            let soft_redirect = classify_soft_redirect(&page.title, &meanings, dialect, registry);
            skipped_lines.extend(translations.skipped);

            let key = (
                &pos_section.language.code,
                pos_section.pos,
                pos_section.etymology_ordinal,
            );
            let existing = lang_pos
                .iter_mut()
                .find(|lp| (&lp.language, lp.pos, lp.etymology_ordinal) == key);
            match existing {
                // A repeated (language, etymology, part of speech) continues
                // the earlier one; ordinals keep counting from where it ended.
                Some(lp) => {
                    let base = lp.meanings.len() as u32;
                    lp.meanings
                        .extend(meanings.into_iter().map(|m| MeaningData {
                            ordinal: base + m.ordinal,
                            wikitext: m.definition_wikitext,
                        }));
                    lp.relations.extend(relations.into_iter().map(|mut r| {
                        r.meaning_ordinal = r.meaning_ordinal.map(|o| o + base);
                        r
                    }));
                    lp.translations.extend(translations.boxes);
                    lp.soft_redirect = None;
                }
                None => lang_pos.push(LangPosData {
                    language: pos_section.language.code.clone(),
                    pos: pos_section.pos,
                    etymology_ordinal: pos_section.etymology_ordinal,
                    meanings: meanings
                        .into_iter()
                        .map(|m| MeaningData {
                            ordinal: m.ordinal,
                            wikitext: m.definition_wikitext,
                        })
                        .collect(),
                    relations,
                    translations: translations.boxes,
                    soft_redirect,
                }),
            }
        }
    }

    Ok(PageBundle {
        title: page.title.clone(),
        record_id: page.record_id,
        lang_pos,
        skipped_sections,
        skipped_lines,
    })
}

/// [`analyze_page`] with panics converted into [`PageError::Panicked`].
pub fn analyze_page_guarded(
    page: &Page,
    config: &DialectConfig,
    registry: &Registry,
) -> Result<PageBundle, PageError> {
    std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        analyze_page(page, config, registry)
    }))
    .unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".to_string());
        Err(PageError::Panicked(msg))
    })
}
