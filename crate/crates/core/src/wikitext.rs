//! Structural scanning of raw wikitext.
//!
//! The scanners here never fail: malformed markup simply yields fewer items.
//! Bracket matching uses an explicit stack, so arbitrarily deep nesting costs
//! memory proportional to the input and never recursion depth.

use std::ops::Range;

/// Byte offsets into the scanned text, `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Returns this span moved right by `offset` bytes.
    pub fn shift(self, offset: usize) -> Self {
        Span::new(self.start + offset, self.end + offset)
    }
}

/// A `{{name|...}}` template call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub name: String,
    pub positional: Vec<String>,
    /// Named parameters in source order. Keys and values are trimmed.
    pub named: Vec<(String, String)>,
    pub span: Span,
}

impl Template {
    /// The last value given for `key`, as MediaWiki resolves duplicates.
    pub fn named_param(&self, key: &str) -> Option<&str> {
        self.named
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Positional parameter `n` (1-based), falling back to a parameter
    /// explicitly named `n`.
    pub fn param(&self, n: usize) -> Option<&str> {
        self.positional
            .get(n.wrapping_sub(1))
            .map(String::as_str)
            .or_else(|| self.named_param(&n.to_string()))
    }
}

/// A `[[target|label]]` link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WikiLink {
    pub target: String,
    pub label: String,
    pub span: Span,
}

/// A `== heading ==` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Heading {
    pub level: u8,
    /// Content between the marker runs, untrimmed.
    pub inner: String,
    /// The whole heading line, without its line terminator.
    pub span: Span,
}

impl Heading {
    pub fn title(&self) -> &str {
        self.inner.trim()
    }
}

/// Finds outermost matched `open`/`close` pairs. Each close matches the most
/// recent unmatched open; unmatched opens are dropped.
fn outer_pairs(text: &str, open: u8, close: u8) -> Vec<Span> {
    let bytes = text.as_bytes();
    let mut stack: Vec<usize> = Vec::new();
    let mut pairs: Vec<Span> = Vec::new();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] == open && bytes[i + 1] == open {
            stack.push(i);
            i += 2;
        } else if bytes[i] == close && bytes[i + 1] == close && !stack.is_empty() {
            let start = stack.pop().unwrap_or_default();
            pairs.push(Span::new(start, i + 2));
            i += 2;
        } else {
            i += 1;
        }
    }
    // Pairs close innermost-first; sorting by start then sweeping keeps only
    // pairs not nested inside an earlier kept pair.
    pairs.sort_unstable_by_key(|s| s.start);
    let mut outer: Vec<Span> = Vec::with_capacity(pairs.len());
    for span in pairs {
        match outer.last() {
            Some(last) if span.start < last.end => {}
            _ => outer.push(span),
        }
    }
    outer
}

/// Splits `inner` at top-level occurrences of `sep`, ignoring separators
/// nested inside `{{...}}` or `[[...]]`.
pub(crate) fn split_top_level(inner: &str, sep: u8) -> Vec<&str> {
    let bytes = inner.as_bytes();
    let mut parts = Vec::new();
    let mut braces = 0usize;
    let mut brackets = 0usize;
    let mut last = 0;
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let next = bytes.get(i + 1).copied();
        if b == b'{' && next == Some(b'{') {
            braces += 1;
            i += 2;
            continue;
        }
        if b == b'}' && next == Some(b'}') && braces > 0 {
            braces -= 1;
            i += 2;
            continue;
        }
        if b == b'[' && next == Some(b'[') {
            brackets += 1;
            i += 2;
            continue;
        }
        if b == b']' && next == Some(b']') && brackets > 0 {
            brackets -= 1;
            i += 2;
            continue;
        }
        if b == sep && braces == 0 && brackets == 0 {
            parts.push(&inner[last..i]);
            last = i + 1;
        }
        i += 1;
    }
    parts.push(&inner[last..]);
    parts
}

fn build_template(text: &str, span: Span) -> Option<Template> {
    let inner = &text[span.start + 2..span.end - 2];
    let mut parts = split_top_level(inner, b'|').into_iter();
    let name = parts.next().unwrap_or_default().trim();
    if name.is_empty() {
        return None;
    }
    let mut positional = Vec::new();
    let mut named = Vec::new();
    for part in parts {
        let eq = split_top_level(part, b'=');
        if eq.len() > 1 {
            let key = eq[0].trim();
            if !key.is_empty() {
                let value = &part[eq[0].len() + 1..];
                named.push((key.to_string(), value.trim().to_string()));
                continue;
            }
        }
        positional.push(part.to_string());
    }
    Some(Template {
        name: name.to_string(),
        positional,
        named,
        span,
    })
}

/// All top-level templates in source order.
pub fn scan_templates(text: &str) -> Vec<Template> {
    outer_pairs(text, b'{', b'}')
        .into_iter()
        .filter_map(|span| build_template(text, span))
        .collect()
}

fn build_link(text: &str, span: Span) -> Option<WikiLink> {
    let inner = &text[span.start + 2..span.end - 2];
    let (target, label) = match inner.find('|') {
        Some(pipe) => (inner[..pipe].trim(), inner[pipe + 1..].trim()),
        None => (inner.trim(), ""),
    };
    if target.is_empty() {
        return None;
    }
    let label = if label.is_empty() { target } else { label };
    Some(WikiLink {
        target: target.to_string(),
        label: label.to_string(),
        span,
    })
}

/// All outermost `[[...]]` links in source order, namespace prefixes
/// included verbatim.
pub fn scan_wikilinks(text: &str) -> Vec<WikiLink> {
    outer_pairs(text, b'[', b']')
        .into_iter()
        .filter_map(|span| build_link(text, span))
        .collect()
}

/// Lines of `text` with their byte offsets, excluding the `\n` terminator.
pub(crate) fn lines_with_offsets(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    text.split('\n').map(move |line| {
        let start = offset;
        offset += line.len() + 1;
        (start, line)
    })
}

fn parse_heading_line(line: &str) -> Option<(u8, &str)> {
    let body = line.trim_end();
    if !body.starts_with('=') || !body.ends_with('=') {
        return None;
    }
    let n = body.len();
    let leading = body.bytes().take_while(|&b| b == b'=').count();
    let level = if leading == n {
        // A line made only of '=' renders as a heading whose text is the
        // middle '=' characters.
        (n - 1) / 2
    } else {
        let trailing = body.bytes().rev().take_while(|&b| b == b'=').count();
        leading.min(trailing)
    }
    .min(6);
    if level == 0 {
        return None;
    }
    Some((level as u8, &body[level..n - level]))
}

/// One heading per line that opens and closes with `=` runs.
pub fn scan_headings(text: &str) -> Vec<Heading> {
    lines_with_offsets(text)
        .filter_map(|(start, line)| {
            let (level, inner) = parse_heading_line(line)?;
            Some(Heading {
                level,
                inner: inner.to_string(),
                span: Span::new(start, start + line.len()),
            })
        })
        .collect()
}

fn remove_spans(text: &str, spans: &[Span], replacement: impl Fn(usize) -> String) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for (i, span) in spans.iter().enumerate() {
        out.push_str(&text[last..span.start]);
        out.push_str(&replacement(i));
        last = span.end;
    }
    out.push_str(&text[last..]);
    out
}

/// Plain text of a wikitext fragment: templates dropped, links replaced by
/// their labels, bold/italic quote runs removed, whitespace collapsed.
pub fn strip_markup(text: &str) -> String {
    let template_spans: Vec<Span> = outer_pairs(text, b'{', b'}');
    let without_templates = remove_spans(text, &template_spans, |_| String::new());

    let links = scan_wikilinks(&without_templates);
    let link_spans: Vec<Span> = links.iter().map(|l| l.span).collect();
    let linked = remove_spans(&without_templates, &link_spans, |i| links[i].label.clone());

    let mut unquoted = String::with_capacity(linked.len());
    let mut chars = linked.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\'' && chars.peek() == Some(&'\'') {
            while chars.peek() == Some(&'\'') {
                chars.next();
            }
            continue;
        }
        unquoted.push(c);
    }

    unquoted.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_positional() {
        let t = scan_templates("{{t+|fi|pensas}}");
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].name, "t+");
        assert_eq!(t[0].positional, vec!["fi", "pensas"]);
        assert!(t[0].named.is_empty());
        assert_eq!(t[0].span, Span::new(0, 16));
    }

    #[test]
    fn template_nested_named() {
        let t = scan_templates("{{a|x={{b|1}}|y}}");
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].name, "a");
        assert_eq!(t[0].named, vec![("x".to_string(), "{{b|1}}".to_string())]);
        assert_eq!(t[0].positional, vec!["y"]);
    }

    #[test]
    fn template_empty_and_unclosed() {
        assert!(scan_templates("").is_empty());
        assert!(scan_templates("{{open|never closed").is_empty());
        // the inner closed template survives an unclosed outer one
        let t = scan_templates("{{outer|{{inner}} tail");
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].name, "inner");
    }

    #[test]
    fn template_equals_inside_link_is_positional() {
        let t = scan_templates("{{q|[[a=b]]}}");
        assert_eq!(t[0].positional, vec!["[[a=b]]"]);
        let t = scan_templates("{{перев-блок||fi=[[enkeli]]|ko=[[천사]]}}");
        assert_eq!(t[0].positional, vec![""]);
        assert_eq!(t[0].named_param("ko"), Some("[[천사]]"));
    }

    #[test]
    fn template_with_empty_name_is_dropped() {
        assert!(scan_templates("{{|x}}").is_empty());
        assert!(scan_templates("{{ }}").is_empty());
    }

    #[test]
    fn triple_close_brace() {
        let t = scan_templates("= {{-sq-}}} =");
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].name, "-sq-");
    }

    #[test]
    fn deep_nesting_is_linear_and_safe() {
        let depth = 50_000;
        let text = format!("{}x{}", "{{a|".repeat(depth), "}}".repeat(depth));
        let t = scan_templates(&text);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].span, Span::new(0, text.len()));
    }

    #[test]
    fn links() {
        let l = scan_wikilinks("fi=[[enkeli]]");
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].target, "enkeli");
        assert_eq!(l[0].label, "enkeli");
        assert_eq!(l[0].span, Span::new(3, 13));

        let l = scan_wikilinks("* Korean: [[수풀]] (supul)");
        assert_eq!(l[0].target, "수풀");

        let l = scan_wikilinks("[[a|b]] and [[Category:X]]");
        assert_eq!(l[0].target, "a");
        assert_eq!(l[0].label, "b");
        assert_eq!(l[1].target, "Category:X");

        assert!(scan_wikilinks("no links here").is_empty());
        assert!(scan_wikilinks("[[unclosed").is_empty());
        assert!(scan_wikilinks("[[|label]]").is_empty());
    }

    #[test]
    fn headings() {
        let h = scan_headings("==English==\n");
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].level, 2);
        assert_eq!(h[0].inner, "English");

        let h = scan_headings("= {{-sq-}} =\n");
        assert_eq!(h[0].level, 1);
        assert_eq!(h[0].inner, " {{-sq-}} ");

        assert!(scan_headings("plain paragraph").is_empty());
    }

    #[test]
    fn heading_asymmetric_and_trailing_space() {
        let h = scan_headings("text\n==x===  \r\nmore");
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].level, 2);
        assert_eq!(h[0].inner, "x=");
        assert_eq!(h[0].span, Span::new(5, 14));

        let h = scan_headings("========x========");
        assert_eq!(h[0].level, 6);
        assert_eq!(h[0].inner, "==x==");

        let h = scan_headings("===\n==\n=");
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].inner, "=");
    }

    #[test]
    fn strip() {
        assert_eq!(strip_markup("[[dog]]s bark"), "dogs bark");
        assert_eq!(strip_markup("{{t+|fi|pensas}}"), "");
        assert_eq!(strip_markup("''a'' [[b|c]]"), "a c");
        assert_eq!(strip_markup("  '''bold'''\n\ttext  "), "bold text");
        assert_eq!(strip_markup("it's"), "it's");
    }
}
