//! Language codes, part-of-speech names, relation types and the per-dialect
//! alias tables that map raw headings and templates onto them.
//!
//! The built-in registry is compiled from `data/languages.tsv` and
//! `data/aliases.tsv`. A registry file in the same format can extend or
//! override it at runtime.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_LANGUAGES: &str = include_str!("../data/languages.tsv");
const BUILTIN_ALIASES: &str = include_str!("../data/aliases.tsv");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("unknown language: {0}")]
    UnknownLanguage(String),
    #[error("not a relation heading: {0}")]
    NotARelationHeading(String),
    #[error("malformed registry file at line {line}: {reason}")]
    MalformedRegistryFile { line: usize, reason: String },
    #[error("cannot read registry file: {0}")]
    Io(String),
}

/// Which Wiktionary edition's formatting conventions apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    En,
    Ru,
}

impl Dialect {
    pub fn native_code(self) -> &'static str {
        match self {
            Dialect::En => "en",
            Dialect::Ru => "ru",
        }
    }

    fn index(self) -> usize {
        match self {
            Dialect::En => 0,
            Dialect::Ru => 1,
        }
    }
}

impl FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" => Ok(Dialect::En),
            "ru" => Ok(Dialect::Ru),
            other => Err(format!("unknown dialect {other:?} (expected en or ru)")),
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.native_code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LanguageCode {
    pub code: String,
    pub english_name: String,
    pub russian_name: String,
}

macro_rules! closed_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!("unknown {} {other:?}", stringify!($name))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

closed_enum! {
    /// The nine thesaurus relation types.
    RelationType {
        Synonym => "synonym",
        Antonym => "antonym",
        Hypernym => "hypernym",
        Hyponym => "hyponym",
        Holonym => "holonym",
        Meronym => "meronym",
        Troponym => "troponym",
        CoordinateTerm => "coordinate_term",
        SeeAlso => "see_also",
    }
}

closed_enum! {
    PartOfSpeech {
        Noun => "noun",
        Verb => "verb",
        Adjective => "adjective",
        Adverb => "adverb",
        Pronoun => "pronoun",
        Preposition => "preposition",
        Conjunction => "conjunction",
        Interjection => "interjection",
        Numeral => "numeral",
        Particle => "particle",
        ProperNoun => "proper_noun",
        Phrase => "phrase",
        Unknown => "unknown",
    }
}

impl RelationType {
    /// Human-readable plural label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            RelationType::Synonym => "Synonyms",
            RelationType::Antonym => "Antonyms",
            RelationType::Hypernym => "Hypernyms",
            RelationType::Hyponym => "Hyponyms",
            RelationType::Holonym => "Holonyms",
            RelationType::Meronym => "Meronyms",
            RelationType::Troponym => "Troponyms",
            RelationType::CoordinateTerm => "Coordinate terms",
            RelationType::SeeAlso => "See also",
        }
    }
}

/// Structural role of a subsection heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SectionRole {
    Etymology,
    Translations,
    Definitions,
    Semantics,
    Morphology,
    NonPos,
}

impl FromStr for SectionRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "etymology" => SectionRole::Etymology,
            "translations" => SectionRole::Translations,
            "definitions" => SectionRole::Definitions,
            "semantics" => SectionRole::Semantics,
            "morphology" => SectionRole::Morphology,
            "non_pos" => SectionRole::NonPos,
            other => return Err(format!("unknown section role {other:?}")),
        })
    }
}

/// Structural role of a template name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemplateRole {
    /// `{{t|code|word}}` translation.
    Translation,
    /// `{{l|code|word}}` link.
    Link,
    /// `{{sense|gloss}}` relation-line gloss.
    Sense,
    /// Opens a translation box.
    Box,
    /// Closes a translation box.
    BoxEnd,
}

impl FromStr for TemplateRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "translation" => TemplateRole::Translation,
            "link" => TemplateRole::Link,
            "sense" => TemplateRole::Sense,
            "box" => TemplateRole::Box,
            "box_end" => TemplateRole::BoxEnd,
            other => return Err(format!("unknown template role {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialectConfig {
    pub dialect: Dialect,
    pub native_language: LanguageCode,
}

impl DialectConfig {
    pub fn new(dialect: Dialect, registry: &Registry) -> Result<Self, RegistryError> {
        Ok(DialectConfig {
            dialect,
            native_language: registry.lookup_code(dialect.native_code())?.clone(),
        })
    }
}

#[derive(Debug, Clone, Default)]
struct DialectAliases {
    relations: HashMap<String, RelationType>,
    pos: HashMap<String, PartOfSpeech>,
    sections: HashMap<String, SectionRole>,
    templates: HashMap<String, TemplateRole>,
    form_of: BTreeSet<String>,
}

/// Case-folds and collapses inner whitespace so aliases match loosely.
fn normalize(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn valid_code(code: &str) -> bool {
    (2..=11).contains(&code.len())
        && code
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

/// Immutable after construction; share freely across threads.
#[derive(Debug, Clone)]
pub struct Registry {
    languages: Vec<LanguageCode>,
    by_code: HashMap<String, usize>,
    by_english: HashMap<String, usize>,
    dialects: [DialectAliases; 2],
}

impl Default for Registry {
    fn default() -> Self {
        Registry::builtin()
    }
}

impl Registry {
    fn empty() -> Self {
        Registry {
            languages: Vec::new(),
            by_code: HashMap::new(),
            by_english: HashMap::new(),
            dialects: Default::default(),
        }
    }

    /// The registry shipped with the crate.
    pub fn builtin() -> Self {
        let mut registry = Registry::empty();
        registry
            .extend_from_str(BUILTIN_LANGUAGES)
            .expect("built-in language table is well-formed");
        registry
            .extend_from_str(BUILTIN_ALIASES)
            .expect("built-in alias table is well-formed");
        registry
    }

    /// The built-in registry extended or overridden by the entries in `path`.
    pub fn load(path: &Path) -> Result<Self, RegistryError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RegistryError::Io(format!("{}: {e}", path.display())))?;
        let mut registry = Registry::builtin();
        registry.extend_from_str(&text)?;
        Ok(registry)
    }

    /// Parses registry rows from `text` and applies them on top of `self`.
    pub fn extend_from_str(&mut self, text: &str) -> Result<(), RegistryError> {
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let malformed = |reason: String| RegistryError::MalformedRegistryFile {
                line: line_no,
                reason,
            };
            if line.starts_with('@') {
                self.apply_directive(&fields).map_err(malformed)?;
            } else {
                if fields.len() < 2 || fields.len() > 3 {
                    return Err(malformed(format!(
                        "expected 2 or 3 tab-separated columns, found {}",
                        fields.len()
                    )));
                }
                let code = fields[0].trim().to_lowercase();
                let english = fields[1].trim();
                if !valid_code(&code) {
                    return Err(malformed(format!("invalid language code {code:?}")));
                }
                if english.is_empty() {
                    return Err(malformed("empty english name".to_string()));
                }
                let russian = fields.get(2).map(|s| s.trim()).unwrap_or_default();
                self.insert_language(LanguageCode {
                    code,
                    english_name: english.to_string(),
                    russian_name: russian.to_string(),
                });
            }
        }
        Ok(())
    }

    fn insert_language(&mut self, language: LanguageCode) {
        let name_key = normalize(&language.english_name);
        match self.by_code.get(&language.code) {
            Some(&idx) => {
                let old_key = normalize(&self.languages[idx].english_name);
                if self.by_english.get(&old_key) == Some(&idx) {
                    self.by_english.remove(&old_key);
                }
                self.by_english.insert(name_key, idx);
                self.languages[idx] = language;
            }
            None => {
                let idx = self.languages.len();
                self.by_code.insert(language.code.clone(), idx);
                self.by_english.insert(name_key, idx);
                self.languages.push(language);
            }
        }
    }

    fn apply_directive(&mut self, fields: &[&str]) -> Result<(), String> {
        let kind = fields[0];
        let arity = if kind == "@form-of" { 3 } else { 4 };
        if fields.len() != arity {
            return Err(format!(
                "{kind} expects {arity} columns, found {}",
                fields.len()
            ));
        }
        let dialect: Dialect = fields[1].trim().parse()?;
        let aliases = &mut self.dialects[dialect.index()];
        let key = normalize(fields[arity - 1]);
        if key.is_empty() {
            return Err("empty alias".to_string());
        }
        match kind {
            "@relation" => {
                aliases.relations.insert(key, fields[2].trim().parse()?);
            }
            "@pos" => {
                aliases.pos.insert(key, fields[2].trim().parse()?);
            }
            "@section" => {
                aliases.sections.insert(key, fields[2].trim().parse()?);
            }
            "@template" => {
                aliases.templates.insert(key, fields[2].trim().parse()?);
            }
            "@form-of" => {
                aliases.form_of.insert(key);
            }
            other => return Err(format!("unknown directive {other}")),
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    pub fn languages(&self) -> &[LanguageCode] {
        &self.languages
    }

    /// Case-insensitive code lookup.
    pub fn lookup_code(&self, code: &str) -> Result<&LanguageCode, RegistryError> {
        self.by_code
            .get(&code.trim().to_lowercase())
            .map(|&i| &self.languages[i])
            .ok_or_else(|| RegistryError::UnknownLanguage(code.to_string()))
    }

    /// Case-insensitive exact match on the English language name.
    pub fn lookup_english_name(&self, name: &str) -> Result<&LanguageCode, RegistryError> {
        self.by_english
            .get(&normalize(name))
            .map(|&i| &self.languages[i])
            .ok_or_else(|| RegistryError::UnknownLanguage(name.to_string()))
    }

    pub fn classify_relation_heading(
        &self,
        inner: &str,
        dialect: Dialect,
    ) -> Result<RelationType, RegistryError> {
        self.dialects[dialect.index()]
            .relations
            .get(&normalize(inner))
            .copied()
            .ok_or_else(|| RegistryError::NotARelationHeading(inner.to_string()))
    }

    pub fn pos_alias(&self, alias: &str, dialect: Dialect) -> Option<PartOfSpeech> {
        self.dialects[dialect.index()]
            .pos
            .get(&normalize(alias))
            .copied()
    }

    /// Role of a heading; `Etymology N` headings resolve to `Etymology`.
    pub fn section_role(&self, heading: &str, dialect: Dialect) -> Option<SectionRole> {
        let aliases = &self.dialects[dialect.index()];
        let key = normalize(heading);
        if let Some(role) = aliases.sections.get(&key) {
            return Some(*role);
        }
        let (base, _) = split_trailing_number(&key)?;
        match aliases.sections.get(base) {
            Some(SectionRole::Etymology) => Some(SectionRole::Etymology),
            _ => None,
        }
    }

    pub fn template_role(&self, name: &str, dialect: Dialect) -> Option<TemplateRole> {
        self.dialects[dialect.index()]
            .templates
            .get(&normalize(name))
            .copied()
    }

    pub fn is_form_of_template(&self, name: &str, dialect: Dialect) -> bool {
        self.dialects[dialect.index()]
            .form_of
            .contains(&normalize(name))
    }
}

/// Splits `"etymology 2"` into `("etymology", 2)`.
pub(crate) fn split_trailing_number(s: &str) -> Option<(&str, u32)> {
    let (base, n) = s.trim().rsplit_once(' ')?;
    Some((base.trim_end(), n.parse().ok()?))
}
