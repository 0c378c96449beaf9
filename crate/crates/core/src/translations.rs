//! Translation boxes and their per-language entries.

use serde::{Deserialize, Serialize};

use crate::entry::PosSection;
use crate::registry::{Dialect, LanguageCode, Registry, SectionRole, TemplateRole};
use crate::relations::linked_words;
use crate::wikitext::{
    lines_with_offsets, scan_headings, scan_templates, split_top_level, strip_markup, Span,
};

/// One translated sense.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationBox {
    pub gloss: String,
    /// Span of the opening line or template within the page text.
    pub span: (usize, usize),
    pub entries: Vec<TranslationEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationEntry {
    /// Registry code of the target language.
    pub language: String,
    pub target_word: String,
    pub target_wikitext: String,
    pub transliteration: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedLine {
    pub line: String,
    pub reason: String,
}

pub const REASON_CODE_NAME_CONFLICT: &str = "code–name conflict";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Translations {
    pub boxes: Vec<TranslationBox>,
    pub skipped: Vec<SkippedLine>,
}

impl Translations {
    fn skip(&mut self, line: &str, reason: impl Into<String>) {
        self.skipped.push(SkippedLine {
            line: line.trim().to_string(),
            reason: reason.into(),
        });
    }
}

fn open_box(out: &mut Translations, gloss: String, span: Span) -> usize {
    out.boxes.push(TranslationBox {
        gloss,
        span: (span.start, span.end),
        entries: Vec::new(),
    });
    out.boxes.len() - 1
}

/// Splits a translation line such as `*: Mandarin: {{t|cmn|...}}` into its
/// nesting depth, language name and remainder.
fn split_translation_line(line: &str) -> Option<(bool, &str, &str)> {
    let trimmed = line.trim_start();
    if !trimmed.starts_with('*') {
        return None;
    }
    let marker_len = trimmed
        .bytes()
        .take_while(|b| matches!(b, b'*' | b':' | b'#'))
        .count();
    let nested = marker_len > 1;
    let rest = &trimmed[marker_len..];
    let parts = split_top_level(rest, b':');
    if parts.len() < 2 {
        return None;
    }
    let name = parts[0];
    Some((nested, name, &rest[name.len() + 1..]))
}

/// Trailing `(...)` of a chunk, e.g. the transliteration in `[[수풀]] (supul)`.
fn trailing_parenthetical(chunk: &str) -> Option<String> {
    let trimmed = chunk.trim_end();
    let inner = trimmed.strip_suffix(')')?;
    let open = inner.rfind('(')?;
    let text = strip_markup(&inner[open + 1..]);
    (!text.is_empty()).then_some(text)
}

struct EnLineContext<'r> {
    parent: Option<&'r LanguageCode>,
}

fn extract_en_line<'r>(
    line: &str,
    registry: &'r Registry,
    ctx: &mut EnLineContext<'r>,
    target: &mut TranslationBox,
    out_skipped: &mut Translations,
) {
    let Some((nested, name_part, content)) = split_translation_line(line) else {
        return;
    };
    let name = strip_markup(name_part);
    let resolved = registry.lookup_english_name(&name).ok();
    let language = match (resolved, nested) {
        (Some(lang), _) => Some(lang),
        (None, true) => ctx.parent,
        (None, false) => None,
    };
    if !nested {
        ctx.parent = resolved;
    }
    let Some(language) = language else {
        out_skipped.skip(line, format!("unknown language name {name:?}"));
        return;
    };

    let templates: Vec<_> = scan_templates(content)
        .into_iter()
        .filter(|t| registry.template_role(&t.name, Dialect::En) == Some(TemplateRole::Translation))
        .collect();

    if !templates.is_empty() {
        for t in templates {
            let code = t.param(1).unwrap_or_default().trim().to_string();
            let word = t.param(2).map(strip_markup).unwrap_or_default();
            if word.is_empty() {
                continue;
            }
            let Ok(code_lang) = registry.lookup_code(&code) else {
                out_skipped.skip(line, format!("unknown language code {code:?}"));
                continue;
            };
            if code_lang.code != language.code {
                out_skipped.skip(line, REASON_CODE_NAME_CONFLICT);
            }
            target.entries.push(TranslationEntry {
                language: code_lang.code.clone(),
                target_wikitext: format!("[[{word}]]"),
                target_word: word,
                transliteration: t.named_param("tr").map(strip_markup).unwrap_or_default(),
            });
        }
        return;
    }

    for chunk in split_top_level(content, b',')
        .into_iter()
        .flat_map(|c| split_top_level(c, b';'))
    {
        let words = linked_words(chunk, Dialect::En, registry);
        let translit = words
            .last()
            .and_then(|last| trailing_parenthetical(&chunk[last.end..]));
        let count = words.len();
        for (i, w) in words.into_iter().enumerate() {
            target.entries.push(TranslationEntry {
                language: language.code.clone(),
                target_word: w.word,
                target_wikitext: w.wikitext,
                transliteration: if i + 1 == count {
                    translit.clone().unwrap_or_default()
                } else {
                    String::new()
                },
            });
        }
    }
}

/// Translation boxes from `Translations` subsections of an English-edition
/// section.
pub fn extract_translations_en(section: &PosSection<'_>, registry: &Registry) -> Translations {
    let body = section.body;
    let headings = scan_headings(body);
    let mut out = Translations::default();

    for (i, heading) in headings.iter().enumerate() {
        if registry.section_role(heading.title(), Dialect::En) != Some(SectionRole::Translations) {
            continue;
        }
        let start = (heading.span.end + 1).min(body.len());
        let end = headings
            .get(i + 1)
            .map(|h| h.span.start)
            .unwrap_or(body.len())
            .max(start);
        let sub = &body[start..end];
        let has_box_template = scan_templates(sub)
            .iter()
            .any(|t| registry.template_role(&t.name, Dialect::En) == Some(TemplateRole::Box));

        let mut current: Option<usize> = None;
        if !has_box_template {
            let span = heading.span.shift(section.offset);
            current = Some(open_box(&mut out, String::new(), span));
        }
        let mut ctx = EnLineContext { parent: None };

        for (line_start, line) in lines_with_offsets(sub) {
            let line = line.trim_end_matches('\r');
            let lead = line.trim_start();
            if lead.starts_with("{{") {
                let role = scan_templates(lead)
                    .first()
                    .filter(|t| t.span.start == 0)
                    .and_then(|t| {
                        registry
                            .template_role(&t.name, Dialect::En)
                            .map(|role| (role, t.param(1).map(strip_markup).unwrap_or_default()))
                    });
                match role {
                    Some((TemplateRole::Box, gloss)) => {
                        let abs = section.offset + start + line_start;
                        current = Some(open_box(&mut out, gloss, Span::new(abs, abs + line.len())));
                        ctx.parent = None;
                        continue;
                    }
                    Some((TemplateRole::BoxEnd, _)) => {
                        current = None;
                        continue;
                    }
                    _ => {}
                }
            }
            if split_translation_line(line).is_none() {
                continue;
            }
            let idx = match current.or(out.boxes.len().checked_sub(1)) {
                Some(idx) => idx,
                None => {
                    out.skip(line, "translation line outside any box");
                    continue;
                }
            };
            let mut target = std::mem::replace(
                &mut out.boxes[idx],
                TranslationBox {
                    gloss: String::new(),
                    span: (0, 0),
                    entries: Vec::new(),
                },
            );
            extract_en_line(line, registry, &mut ctx, &mut target, &mut out);
            out.boxes[idx] = target;
        }
    }
    out
}

/// Translation boxes from `{{перев-блок}}` templates of a Russian-edition
/// section. Each named parameter keyed by a language code holds that
/// language's linked words.
pub fn extract_translations_ru(section: &PosSection<'_>, registry: &Registry) -> Translations {
    let mut out = Translations::default();
    for t in scan_templates(section.body) {
        if registry.template_role(&t.name, Dialect::Ru) != Some(TemplateRole::Box) {
            continue;
        }
        let gloss = t
            .positional
            .first()
            .map(|g| strip_markup(g))
            .unwrap_or_default();
        let idx = open_box(&mut out, gloss, t.span.shift(section.offset));
        for (key, value) in &t.named {
            match registry.lookup_code(key) {
                Ok(lang) => {
                    for w in linked_words(value, Dialect::Ru, registry) {
                        out.boxes[idx].entries.push(TranslationEntry {
                            language: lang.code.clone(),
                            target_word: w.word,
                            target_wikitext: w.wikitext,
                            transliteration: String::new(),
                        });
                    }
                }
                Err(_) => out.skip(
                    &format!("{key}={value}"),
                    format!("unknown language code {key:?}"),
                ),
            }
        }
    }
    out
}

pub fn extract_translations(
    section: &PosSection<'_>,
    dialect: Dialect,
    registry: &Registry,
) -> Translations {
    match dialect {
        Dialect::En => extract_translations_en(section, registry),
        Dialect::Ru => extract_translations_ru(section, registry),
    }
}
