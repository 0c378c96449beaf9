//! Splitting one page into language sections, etymology/homonym blocks,
//! part-of-speech sections and numbered definitions.

use serde::{Deserialize, Serialize};

use crate::registry::{
    split_trailing_number, Dialect, DialectConfig, LanguageCode, PartOfSpeech, Registry,
    SectionRole, TemplateRole,
};
use crate::wikitext::{lines_with_offsets, scan_headings, scan_templates, strip_markup, Heading};

/// Title prefixes of non-dictionary namespaces.
const NAMESPACE_PREFIXES: &[&str] = &[
    "appendix",
    "category",
    "citations",
    "concordance",
    "file",
    "help",
    "image",
    "index",
    "media",
    "mediawiki",
    "module",
    "portal",
    "reconstruction",
    "rhymes",
    "special",
    "talk",
    "template",
    "thesaurus",
    "transwiki",
    "user",
    "wikisaurus",
    "wiktionary",
    "викисловарь",
    "категория",
    "шаблон",
    "участник",
    "приложение",
    "файл",
    "справка",
];

/// True when `title` (or link target) begins with a known namespace prefix.
pub fn has_namespace_prefix(title: &str) -> bool {
    match title.split_once(':') {
        Some((prefix, _)) => {
            let prefix = prefix.trim().to_lowercase();
            let base = prefix.strip_suffix(" talk").unwrap_or(&prefix);
            NAMESPACE_PREFIXES.contains(&base) || base.strip_prefix("обсуждение").is_some()
        }
        None => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub title: String,
    pub raw_text: String,
    pub is_redirect: bool,
    /// Position of the page in the dump stream.
    pub record_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageSection<'a> {
    pub language: LanguageCode,
    /// Byte offset of `body` within the page text.
    pub offset: usize,
    pub body: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedSection {
    pub heading: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosSection<'a> {
    pub language: LanguageCode,
    pub etymology_ordinal: u32,
    pub pos: PartOfSpeech,
    /// Byte offset of `body` within the page text.
    pub offset: usize,
    pub body: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meaning {
    pub ordinal: u32,
    pub definition_wikitext: String,
    pub definition_plain: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoftRedirect {
    pub form_title: String,
    pub lemma_title: String,
    pub form_kind: String,
}

/// End of the line containing byte `pos`, past its `\n`.
fn after_line(text: &str, pos: usize) -> usize {
    match text[pos..].find('\n') {
        Some(nl) => pos + nl + 1,
        None => text.len(),
    }
}

/// Language a heading opens, or the reason it opens none.
fn language_of_heading<'r>(
    heading: &Heading,
    dialect: Dialect,
    registry: &'r Registry,
) -> Result<&'r LanguageCode, String> {
    match dialect {
        Dialect::En => {
            let name = strip_markup(heading.title());
            registry
                .lookup_english_name(&name)
                .map_err(|_| format!("unknown language name {name:?}"))
        }
        Dialect::Ru => {
            let templates = scan_templates(&heading.inner);
            let rest_is_blank = {
                let mut rest = heading.inner.clone();
                for t in templates.iter().rev() {
                    rest.replace_range(t.span.range(), "");
                }
                rest.trim().is_empty()
            };
            match templates.as_slice() {
                [t] if rest_is_blank => {
                    let code = t
                        .name
                        .strip_prefix('-')
                        .and_then(|n| n.strip_suffix('-'))
                        .filter(|c| !c.is_empty())
                        .ok_or_else(|| format!("not a language template {:?}", t.name))?;
                    registry
                        .lookup_code(code)
                        .map_err(|_| format!("unknown language code {code:?}"))
                }
                _ => Err(format!(
                    "expected a single language template in {:?}",
                    heading.title()
                )),
            }
        }
    }
}

/// Splits a page into language sections. Headings naming no known language
/// are reported as skipped; their content belongs to no section.
pub fn split_language_sections<'a>(
    page: &'a Page,
    config: &DialectConfig,
    registry: &Registry,
) -> (Vec<LanguageSection<'a>>, Vec<SkippedSection>) {
    let text = page.raw_text.as_str();
    let level = match config.dialect {
        Dialect::En => 2,
        Dialect::Ru => 1,
    };
    let headings: Vec<Heading> = scan_headings(text)
        .into_iter()
        .filter(|h| h.level <= level)
        .collect();

    let mut sections = Vec::new();
    let mut skipped = Vec::new();
    for (i, heading) in headings.iter().enumerate() {
        if heading.level != level {
            continue;
        }
        let body_start = after_line(text, heading.span.start);
        let body_end = headings
            .get(i + 1)
            .map(|next| next.span.start)
            .unwrap_or(text.len())
            .max(body_start);
        match language_of_heading(heading, config.dialect, registry) {
            Ok(language) => sections.push(LanguageSection {
                language: language.clone(),
                offset: body_start,
                body: &text[body_start..body_end],
            }),
            Err(reason) => skipped.push(SkippedSection {
                heading: heading.title().to_string(),
                reason,
            }),
        }
    }
    (sections, skipped)
}

enum HeadingKind {
    Etymology(u32),
    Pos(PartOfSpeech),
    Other,
}

fn classify_en_heading(heading: &Heading, registry: &Registry) -> HeadingKind {
    let title = heading.title();
    if let Some(pos) = registry.pos_alias(title, Dialect::En) {
        return HeadingKind::Pos(pos);
    }
    if registry
        .classify_relation_heading(title, Dialect::En)
        .is_ok()
    {
        return HeadingKind::Other;
    }
    match registry.section_role(title, Dialect::En) {
        Some(SectionRole::Etymology) => {
            HeadingKind::Etymology(split_trailing_number(title).map(|(_, n)| n).unwrap_or(0))
        }
        Some(_) => HeadingKind::Other,
        None => HeadingKind::Pos(PartOfSpeech::Unknown),
    }
}

fn split_pos_en<'a>(section: &LanguageSection<'a>, registry: &Registry) -> Vec<PosSection<'a>> {
    let body = section.body;
    let headings = scan_headings(body);

    let mut out = Vec::new();
    let mut etymology = 0u32;
    // (pos, heading level, body start)
    let mut open: Option<(PartOfSpeech, u8, usize)> = None;
    let mut close = |open: &mut Option<(PartOfSpeech, u8, usize)>, end: usize, ety: u32| {
        if let Some((pos, _, start)) = open.take() {
            let end = end.max(start);
            out.push(PosSection {
                language: section.language.clone(),
                etymology_ordinal: ety,
                pos,
                offset: section.offset + start,
                body: &body[start..end],
            });
        }
    };

    let mut saw_pos = false;
    for heading in &headings {
        match classify_en_heading(heading, registry) {
            HeadingKind::Etymology(n) => {
                close(&mut open, heading.span.start, etymology);
                etymology = n;
            }
            HeadingKind::Pos(pos) => {
                // Unrecognized headings nested under a part of speech stay
                // inside it; only same-level or shallower ones open a new one.
                if pos == PartOfSpeech::Unknown {
                    if let Some((_, level, _)) = open {
                        if heading.level > level {
                            continue;
                        }
                    }
                }
                close(&mut open, heading.span.start, etymology);
                open = Some((pos, heading.level, after_line(body, heading.span.start)));
                saw_pos = true;
            }
            HeadingKind::Other => {}
        }
    }
    close(&mut open, body.len(), etymology);

    if !saw_pos {
        out.push(PosSection {
            language: section.language.clone(),
            etymology_ordinal: 0,
            pos: PartOfSpeech::Unknown,
            offset: section.offset,
            body,
        });
    }
    out
}

/// Text of the subsection opened by `heading` up to the next heading of the
/// same or a shallower level.
fn subsection_of<'a>(body: &'a str, headings: &[Heading], index: usize) -> (usize, &'a str) {
    let heading = &headings[index];
    let start = after_line(body, heading.span.start);
    let end = headings[index + 1..]
        .iter()
        .find(|h| h.level <= heading.level)
        .map(|h| h.span.start)
        .unwrap_or(body.len())
        .max(start);
    (start, &body[start..end])
}

fn ru_block_pos(block: &str, registry: &Registry) -> PartOfSpeech {
    let headings = scan_headings(block);
    let Some(idx) = headings.iter().position(|h| {
        registry.section_role(h.title(), Dialect::Ru) == Some(SectionRole::Morphology)
    }) else {
        return PartOfSpeech::Unknown;
    };
    let (_, morphology) = subsection_of(block, &headings, idx);
    scan_templates(morphology)
        .iter()
        .find_map(|t| {
            let first = t.name.split_whitespace().next()?;
            registry.pos_alias(first, Dialect::Ru)
        })
        .unwrap_or(PartOfSpeech::Unknown)
}

fn split_pos_ru<'a>(section: &LanguageSection<'a>, registry: &Registry) -> Vec<PosSection<'a>> {
    let body = section.body;
    let homonyms: Vec<Heading> = scan_headings(body)
        .into_iter()
        .filter(|h| h.level == 2)
        .collect();

    let blocks: Vec<(u32, usize, usize)> = if homonyms.is_empty() {
        vec![(0, 0, body.len())]
    } else {
        homonyms
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let start = after_line(body, h.span.start);
                let end = homonyms
                    .get(i + 1)
                    .map(|n| n.span.start)
                    .unwrap_or(body.len())
                    .max(start);
                (i as u32 + 1, start, end)
            })
            .collect()
    };

    blocks
        .into_iter()
        .map(|(ordinal, start, end)| {
            let block = &body[start..end];
            PosSection {
                language: section.language.clone(),
                etymology_ordinal: ordinal,
                pos: ru_block_pos(block, registry),
                offset: section.offset + start,
                body: block,
            }
        })
        .collect()
}

/// Splits a language section into one section per (etymology, part of
/// speech) pair. Always yields at least one section.
pub fn split_pos_sections<'a>(
    section: &LanguageSection<'a>,
    dialect: Dialect,
    registry: &Registry,
) -> Vec<PosSection<'a>> {
    match dialect {
        Dialect::En => split_pos_en(section, registry),
        Dialect::Ru => split_pos_ru(section, registry),
    }
}

/// A `#` line that is a definition rather than an example, quotation or
/// sub-definition. Returns the definition wikitext.
pub(crate) fn definition_line(line: &str) -> Option<&str> {
    let rest = line.strip_prefix('#')?;
    if rest.starts_with([':', '*', '#']) {
        return None;
    }
    let text = rest.trim();
    (!text.is_empty()).then_some(text)
}

/// The part of a section holding its definition lines.
fn definition_block<'a>(
    section: &PosSection<'a>,
    dialect: Dialect,
    registry: &Registry,
) -> &'a str {
    let body = section.body;
    let headings = scan_headings(body);
    match dialect {
        Dialect::En => match headings.first() {
            Some(h) => &body[..h.span.start],
            None => body,
        },
        Dialect::Ru => headings
            .iter()
            .position(|h| {
                registry.section_role(h.title(), Dialect::Ru) == Some(SectionRole::Definitions)
            })
            .map(|idx| subsection_of(body, &headings, idx).1)
            .unwrap_or(""),
    }
}

pub fn extract_definitions(
    section: &PosSection<'_>,
    dialect: Dialect,
    registry: &Registry,
) -> Vec<Meaning> {
    lines_with_offsets(definition_block(section, dialect, registry))
        .filter_map(|(_, line)| definition_line(line.trim_end_matches('\r')))
        .enumerate()
        .map(|(i, text)| Meaning {
            ordinal: i as u32 + 1,
            definition_wikitext: text.to_string(),
            definition_plain: strip_markup(text),
        })
        .collect()
}

/// A section whose sole definition is a word-form template pointing at its
/// lemma, e.g. `# {{plural of|dog}}`.
pub fn classify_soft_redirect(
    title: &str,
    meanings: &[Meaning],
    dialect: Dialect,
    registry: &Registry,
) -> Option<SoftRedirect> {
    let [meaning] = meanings else {
        return None;
    };
    let text = meaning.definition_wikitext.trim();
    let templates = scan_templates(text);
    let [template] = templates.as_slice() else {
        return None;
    };
    if template.span.start != 0 || template.span.end != text.len() {
        return None;
    }
    if !registry.is_form_of_template(&template.name, dialect)
        || registry.template_role(&template.name, dialect) == Some(TemplateRole::Link)
    {
        return None;
    }
    let lemma = strip_markup(template.param(1)?);
    if lemma.is_empty() || lemma == title {
        return None;
    }
    Some(SoftRedirect {
        form_title: title.to_string(),
        lemma_title: lemma,
        form_kind: template.name.to_lowercase(),
    })
}
