//! Thesaurus edges: relation subsections of a part-of-speech section,
//! aligned to the meanings they qualify.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::entry::{has_namespace_prefix, Meaning, PosSection};
use crate::registry::{Dialect, Registry, RelationType, TemplateRole};
use crate::wikitext::{
    lines_with_offsets, scan_headings, scan_templates, scan_wikilinks, strip_markup, Template,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationRecord {
    /// Ordinal of the meaning this edge belongs to, when it can be aligned.
    pub meaning_ordinal: Option<u32>,
    pub relation_type: RelationType,
    pub target_word: String,
    pub target_wikitext: String,
    pub sense_gloss: String,
}

/// A linked word found on a relation or translation line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LinkedWord {
    pub word: String,
    pub wikitext: String,
    /// Byte offset where the link ends in the scanned line.
    pub end: usize,
}

/// Dash placeholders editors leave on empty lines.
pub(crate) fn is_placeholder(token: &str) -> bool {
    matches!(token, "-" | "—" | "–" | "?")
}

/// Words linked from `line`: plain wikilinks outside templates plus
/// link-role templates (`{{l|en|word}}`), in source order.
pub(crate) fn linked_words(line: &str, dialect: Dialect, registry: &Registry) -> Vec<LinkedWord> {
    let templates = scan_templates(line);
    let mut blanked = line.to_string();
    let mut found: Vec<(usize, LinkedWord)> = Vec::new();
    for t in &templates {
        // Same-length ASCII filler keeps byte offsets stable.
        blanked.replace_range(t.span.range(), &" ".repeat(t.span.len()));
        if registry.template_role(&t.name, dialect) == Some(TemplateRole::Link) {
            if let Some(word) = t.param(2).map(strip_markup).filter(|w| !w.is_empty()) {
                found.push((
                    t.span.start,
                    LinkedWord {
                        wikitext: format!("[[{word}]]"),
                        word,
                        end: t.span.end,
                    },
                ));
            }
        }
    }
    for link in scan_wikilinks(&blanked) {
        if has_namespace_prefix(&link.target) {
            continue;
        }
        let wikitext = &line[link.span.range()];
        let word = strip_markup(wikitext);
        if word.is_empty() {
            continue;
        }
        found.push((
            link.span.start,
            LinkedWord {
                word,
                wikitext: wikitext.to_string(),
                end: link.span.end,
            },
        ));
    }
    found.sort_by_key(|(start, _)| *start);
    found.into_iter().map(|(_, w)| w).collect()
}

/// Comma- or semicolon-separated bare words of a line without links.
pub(crate) fn bare_tokens(line: &str) -> Vec<String> {
    let templates = scan_templates(line);
    let mut text = line.to_string();
    for t in templates.iter().rev() {
        text.replace_range(t.span.range(), "");
    }
    text.split([',', ';'])
        .map(strip_markup)
        .filter(|t| !t.is_empty() && !is_placeholder(t))
        .collect()
}

fn line_targets(content: &str, dialect: Dialect, registry: &Registry) -> Vec<(String, String)> {
    let linked = linked_words(content, dialect, registry);
    // Lines with any link (even a skipped namespaced one) are link lists.
    if !linked.is_empty() || !scan_wikilinks(content).is_empty() {
        return linked.into_iter().map(|w| (w.word, w.wikitext)).collect();
    }
    bare_tokens(content)
        .into_iter()
        .map(|token| (token.clone(), token))
        .collect()
}

fn leading_sense<'t>(
    templates: &'t [Template],
    content: &str,
    dialect: Dialect,
    registry: &Registry,
) -> Option<&'t Template> {
    let first = templates.first()?;
    let before = &content[..first.span.start];
    (before.trim().is_empty()
        && registry.template_role(&first.name, dialect) == Some(TemplateRole::Sense))
    .then_some(first)
}

fn contains_word(haystack: &str, needle: &str) -> bool {
    haystack.match_indices(needle).any(|(i, _)| {
        let before = haystack[..i].chars().next_back();
        let after = haystack[i + needle.len()..].chars().next();
        !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
    })
}

/// First meaning containing the gloss as whole words, else the first
/// containing it at all. Case-insensitive.
fn align_by_gloss(gloss: &str, meanings: &[Meaning]) -> Option<u32> {
    let needle = gloss.to_lowercase();
    let plain: Vec<String> = meanings
        .iter()
        .map(|m| m.definition_plain.to_lowercase())
        .collect();
    plain
        .iter()
        .position(|p| contains_word(p, &needle))
        .or_else(|| plain.iter().position(|p| p.contains(&needle)))
        .map(|i| meanings[i].ordinal)
}

fn extract_en_lines(
    subsection: &str,
    relation_type: RelationType,
    meanings: &[Meaning],
    registry: &Registry,
    out: &mut Vec<RelationRecord>,
) {
    for (_, line) in lines_with_offsets(subsection) {
        let line = line.trim_end_matches('\r');
        if !line.starts_with(['*', '#']) {
            continue;
        }
        let content = line.trim_start_matches(['*', '#', ':']).trim();
        let templates = scan_templates(content);
        let (gloss, rest) = match leading_sense(&templates, content, Dialect::En, registry) {
            Some(t) => (
                t.param(1).map(strip_markup).unwrap_or_default(),
                &content[t.span.end..],
            ),
            None => (String::new(), content),
        };
        let rest = rest.trim_start_matches([':', ' ']);
        let meaning_ordinal = if !gloss.is_empty() {
            align_by_gloss(&gloss, meanings)
        } else if meanings.len() == 1 {
            Some(meanings[0].ordinal)
        } else {
            None
        };
        for (word, wikitext) in line_targets(rest, Dialect::En, registry) {
            out.push(RelationRecord {
                meaning_ordinal,
                relation_type,
                target_word: word,
                target_wikitext: wikitext,
                sense_gloss: gloss.clone(),
            });
        }
    }
}

fn extract_ru_lines(
    subsection: &str,
    relation_type: RelationType,
    meanings: &[Meaning],
    registry: &Registry,
    out: &mut Vec<RelationRecord>,
) {
    let numbered = lines_with_offsets(subsection)
        .map(|(_, line)| line.trim_end_matches('\r'))
        .filter(|line| line.starts_with('#'));
    for (i, line) in numbered.enumerate() {
        let ordinal = i as u32 + 1;
        let meaning_ordinal = meanings
            .iter()
            .any(|m| m.ordinal == ordinal)
            .then_some(ordinal);
        let content = line.trim_start_matches(['#', ':', '*']).trim();
        if content.is_empty() || is_placeholder(content) {
            continue;
        }
        for (word, wikitext) in line_targets(content, Dialect::Ru, registry) {
            out.push(RelationRecord {
                meaning_ordinal,
                relation_type,
                target_word: word,
                target_wikitext: wikitext,
                sense_gloss: String::new(),
            });
        }
    }
}

pub fn extract_relations(
    section: &PosSection<'_>,
    meanings: &[Meaning],
    dialect: Dialect,
    registry: &Registry,
) -> Vec<RelationRecord> {
    let body = section.body;
    let headings = scan_headings(body);
    let mut out = Vec::new();
    for (i, heading) in headings.iter().enumerate() {
        let Ok(relation_type) = registry.classify_relation_heading(heading.title(), dialect) else {
            continue;
        };
        let start = (heading.span.end + 1).min(body.len());
        let end = headings
            .get(i + 1)
            .map(|h| h.span.start)
            .unwrap_or(body.len())
            .max(start);
        let subsection = &body[start..end];
        match dialect {
            Dialect::En => {
                extract_en_lines(subsection, relation_type, meanings, registry, &mut out)
            }
            Dialect::Ru => {
                extract_ru_lines(subsection, relation_type, meanings, registry, &mut out)
            }
        }
    }
    out
}

/// `(relation count, distinct relation types)` for one section's records.
pub fn count_relations_per_word(records: &[RelationRecord]) -> (usize, usize) {
    let types: BTreeSet<RelationType> = records.iter().map(|r| r.relation_type).collect();
    (records.len(), types.len())
}
