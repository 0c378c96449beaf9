//! Row types of the logical schema.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRow {
    pub id: u64,
    pub title: String,
    pub record_id: u64,
    pub is_soft_redirect: bool,
    pub redirect_target: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LangRow {
    pub id: u64,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosRow {
    pub id: u64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LangPosRow {
    pub id: u64,
    pub page_id: u64,
    pub lang_id: u64,
    pub pos_id: u64,
    pub etymology_ordinal: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WikiTextRow {
    pub id: u64,
    pub text: String,
}

/// A page title linked from a wiki_text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WikiTextWordRow {
    pub id: u64,
    pub wiki_text_id: u64,
    pub page_ref_title: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeaningRow {
    pub id: u64,
    pub lang_pos_id: u64,
    pub ordinal: u32,
    pub wiki_text_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationTypeRow {
    pub id: u64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationRow {
    pub id: u64,
    pub meaning_id: Option<u64>,
    pub lang_pos_id: u64,
    pub relation_type_id: u64,
    pub wiki_text_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationRow {
    pub id: u64,
    pub lang_pos_id: u64,
    pub gloss_wiki_text_id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationEntryRow {
    pub id: u64,
    pub translation_id: u64,
    pub lang_id: u64,
    pub wiki_text_id: u64,
    pub transliteration: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InflectionRow {
    pub id: u64,
    pub lang_pos_id: u64,
    pub form_kind: String,
    pub lemma_title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IndexRow {
    pub word: String,
    pub lang_pos_id: u64,
}
