//! Parsers for the marker-delimited blocks the stage prompts instruct the
//! model to produce.
//!
//! Marker detection is exact-match on `==Name==` lines after trimming.
//! Accepted item numbering styles are `N.`, `N)`, `N -` for headers and
//! `N.M` (or indentation) for subheaders; any other line inside a block is
//! folded into the previous item, which keeps mild LLM format drift from
//! failing a run. Parsers never panic on arbitrary input; they return
//! [`ParseError`].

use super::ParseError;
use crate::domain::{dedup_case_folded, KeywordSet, Metadata, Outline, OutlineSection};

const TITLE_BLOCK: &str = "Title";
const INITIAL_BLOCK: &str = "Initial Outline";
const AUGMENTED_BLOCK: &str = "Augmented Outline";

/// Extracts the title and the header-only initial outline.
pub fn parse_title_and_initial_outline(raw: &str) -> Result<(String, Outline), ParseError> {
    let title_lines = block_lines(raw, TITLE_BLOCK)
        .ok_or_else(|| ParseError::MissingBlock(TITLE_BLOCK.into()))?;
    let title = title_lines
        .iter()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    if title.is_empty() {
        return Err(ParseError::MissingBlock(TITLE_BLOCK.into()));
    }

    let lines = block_lines(raw, INITIAL_BLOCK)
        .ok_or_else(|| ParseError::MissingBlock(INITIAL_BLOCK.into()))?;
    if lines.iter().all(|l| l.trim().is_empty()) {
        return Err(ParseError::MissingBlock(INITIAL_BLOCK.into()));
    }

    let mut headers: Vec<String> = Vec::new();
    for line in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(text) = top_level_item(trimmed) {
            if !text.is_empty() {
                headers.push(text);
            }
        } else if let Some(last) = headers.last_mut() {
            // Includes stray subheader-style lines: the initial outline is
            // header-only by contract, so they fold into the header text
            // (with any `N.M` marker stripped).
            let folded = sub_item(trimmed).unwrap_or_else(|| trimmed.to_string());
            if !folded.is_empty() {
                last.push(' ');
                last.push_str(&folded);
            }
        }
    }
    if headers.is_empty() {
        return Err(ParseError::NoItems(INITIAL_BLOCK.into()));
    }
    let sections = headers
        .into_iter()
        .map(|h| OutlineSection::header_only(h).expect("nonempty header"))
        .collect();
    Ok((title, Outline::new(sections).expect("nonempty sections")))
}

/// Extracts an augmented outline: top-level numbered lines become headers,
/// `N.M`-numbered or indented lines beneath them become subheaders.
pub fn parse_augmented_outline(raw: &str) -> Result<Outline, ParseError> {
    let lines = block_lines(raw, AUGMENTED_BLOCK)
        .ok_or_else(|| ParseError::MissingBlock(AUGMENTED_BLOCK.into()))?;
    if lines.iter().all(|l| l.trim().is_empty()) {
        return Err(ParseError::MissingBlock(AUGMENTED_BLOCK.into()));
    }
    let lines = dedent(&lines);

    enum Last {
        None,
        Header,
        Sub,
    }
    let mut sections: Vec<(String, Vec<String>)> = Vec::new();
    let mut last = Last::None;
    for line in &lines {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indented = line.starts_with([' ', '\t']);
        if let Some(text) = sub_item(trimmed) {
            let section = sections
                .last_mut()
                .ok_or_else(|| ParseError::OrphanSubheader(trimmed.to_string()))?;
            if !text.is_empty() {
                section.1.push(text);
                last = Last::Sub;
            }
        } else if indented {
            let section = sections
                .last_mut()
                .ok_or_else(|| ParseError::OrphanSubheader(trimmed.to_string()))?;
            let text = strip_list_marker(trimmed);
            if !text.is_empty() {
                section.1.push(text);
                last = Last::Sub;
            }
        } else if let Some(text) = top_level_item(trimmed) {
            if !text.is_empty() {
                sections.push((text, Vec::new()));
                last = Last::Header;
            }
        } else {
            match last {
                Last::Sub => {
                    let sub = sections
                        .last_mut()
                        .and_then(|s| s.1.last_mut())
                        .expect("sub continuation follows a subheader");
                    sub.push(' ');
                    sub.push_str(trimmed);
                }
                Last::Header => {
                    let header = &mut sections.last_mut().expect("header exists").0;
                    header.push(' ');
                    header.push_str(trimmed);
                }
                Last::None => {} // preamble before the first item
            }
        }
    }
    if sections.is_empty() {
        return Err(ParseError::NoItems(AUGMENTED_BLOCK.into()));
    }
    let sections = sections
        .into_iter()
        .map(|(header, subs)| {
            // exact-match dedup, keeping the first occurrence
            let mut seen = std::collections::HashSet::new();
            let subs = subs
                .into_iter()
                .filter(|s| seen.insert(s.clone()))
                .collect();
            OutlineSection::new(header, subs).expect("parser yields valid sections")
        })
        .collect();
    Ok(Outline::new(sections).expect("nonempty sections"))
}

/// Splits a completion on commas and newlines into a deduplicated keyword
/// set. Empty input is a valid empty set, not an error.
pub fn parse_keyword_list(raw: &str) -> KeywordSet {
    let keywords = raw
        .split(['\n', ','])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    KeywordSet {
        keywords: dedup_case_folded(keywords),
        provenance: String::new(),
    }
}

/// Extracts the four labeled metadata fields (purpose, type, style,
/// keywords) from a completion. Matching is by label, so field order does
/// not matter; unlabeled lines continue the previous field.
pub fn parse_metadata_block(raw: &str) -> Result<Metadata, ParseError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Field {
        Purpose,
        Type,
        Style,
        Keywords,
    }
    const LABELS: [(&str, Field); 6] = [
        ("purpose", Field::Purpose),
        ("post type", Field::Type),
        ("type", Field::Type),
        ("style", Field::Style),
        ("keywords", Field::Keywords),
        ("keyword", Field::Keywords),
    ];

    let mut values: [String; 4] = Default::default();
    let slot = |f: Field| match f {
        Field::Purpose => 0,
        Field::Type => 1,
        Field::Style => 2,
        Field::Keywords => 3,
    };
    let mut current: Option<Field> = None;
    for line in raw.lines() {
        let mut rest = line.trim();
        if rest.is_empty() {
            continue;
        }
        if let Some(stripped) = strip_numbering(rest) {
            rest = stripped;
        }
        let rest_no_article = strip_prefix_ci(rest, "the ").unwrap_or(rest);
        let mut matched = None;
        for (label, field) in LABELS {
            if let Some(after) = strip_prefix_ci(rest_no_article, label) {
                let after = strip_prefix_ci(after, " of the post").unwrap_or(after);
                let after = after.trim_start();
                let boundary_ok = after.is_empty() || after.starts_with([':', '-', '.']);
                if boundary_ok {
                    let value = after.trim_start_matches([':', '-', '.']).trim();
                    matched = Some((field, value.to_string()));
                    break;
                }
            }
        }
        match matched {
            Some((field, value)) => {
                let entry = &mut values[slot(field)];
                if entry.is_empty() {
                    *entry = value;
                } else if !value.is_empty() {
                    entry.push(' ');
                    entry.push_str(&value);
                }
                current = Some(field);
            }
            None => {
                if let Some(field) = current {
                    let entry = &mut values[slot(field)];
                    if !entry.is_empty() {
                        entry.push(' ');
                    }
                    entry.push_str(rest);
                }
            }
        }
    }

    for (idx, name) in [(0, "purpose"), (1, "type"), (2, "style"), (3, "keywords")] {
        if values[idx].trim().is_empty() {
            return Err(ParseError::MissingField(name.into()));
        }
    }
    let keywords = parse_keyword_list(&values[3]).keywords;
    if keywords.is_empty() {
        return Err(ParseError::MissingField("keywords".into()));
    }
    Metadata::new(
        values[0].clone(),
        values[1].clone(),
        values[2].clone(),
        keywords,
    )
    .map_err(|_| ParseError::MissingField("keywords".into()))
}

/// Returns the lines strictly between the `==name==` marker line and the next
/// marker line (or end of input). `None` when the marker never appears.
fn block_lines<'a>(raw: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let marker = format!("=={name}==");
    let mut lines = raw.lines();
    lines.by_ref().find(|line| line.trim() == marker)?;
    Some(lines.take_while(|line| !is_marker_line(line)).collect())
}

fn is_marker_line(line: &str) -> bool {
    let t = line.trim();
    t.len() >= 5 && t.starts_with("==") && t.ends_with("==")
}

/// Removes common leading whitespace so uniformly indented blocks parse the
/// same as flush-left ones.
fn dedent<'a>(lines: &[&'a str]) -> Vec<&'a str> {
    let indent = lines
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start_matches([' ', '\t']).len())
        .min()
        .unwrap_or(0);
    lines
        .iter()
        .map(|l| {
            if l.trim().is_empty() {
                ""
            } else {
                &l[indent..]
            }
        })
        .collect()
}

/// `N. text`, `N) text`, or `N - text` → `text`.
fn top_level_item(trimmed: &str) -> Option<String> {
    let digits = leading_digits(trimmed)?;
    let rest = &trimmed[digits..];
    let text = if let Some(r) = rest.strip_prefix('.') {
        // require whitespace (or end) after the dot so `1.1` stays a subheader
        if !r.is_empty() && !r.starts_with(char::is_whitespace) {
            return None;
        }
        r
    } else if let Some(r) = rest.strip_prefix(')') {
        r
    } else {
        let r = rest.trim_start_matches(char::is_whitespace);
        let r = r.strip_prefix('-')?;
        if !r.is_empty() && !r.starts_with(char::is_whitespace) {
            return None;
        }
        r
    };
    Some(text.trim().to_string())
}

/// `N.M text` (with an optional trailing dot after M) → `text`.
fn sub_item(trimmed: &str) -> Option<String> {
    let first = leading_digits(trimmed)?;
    let rest = trimmed[first..].strip_prefix('.')?;
    let second = leading_digits(rest)?;
    let rest = &rest[second..];
    let rest = rest.strip_prefix('.').unwrap_or(rest);
    if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
        return None;
    }
    Some(rest.trim().to_string())
}

/// Length in bytes of the leading ASCII digit run, if any.
fn leading_digits(s: &str) -> Option<usize> {
    let n = s.bytes().take_while(u8::is_ascii_digit).count();
    (n > 0).then_some(n)
}

/// Strips one leading list marker (`N.M`, `N.`, `N)`, `-`, `*`, `•`) from an
/// indented subheader line.
fn strip_list_marker(trimmed: &str) -> String {
    if let Some(text) = sub_item(trimmed) {
        return text;
    }
    if let Some(text) = top_level_item(trimmed) {
        return text;
    }
    trimmed
        .trim_start_matches(['-', '*', '•'])
        .trim()
        .to_string()
}

/// Strips a `N.`/`N)`/`N -` numbering prefix, returning the rest.
fn strip_numbering(trimmed: &str) -> Option<&str> {
    let digits = leading_digits(trimmed)?;
    let rest = &trimmed[digits..];
    let rest = rest
        .strip_prefix('.')
        .or_else(|| rest.strip_prefix(')'))
        .or_else(|| {
            rest.strip_prefix(' ')
                .and_then(|r| r.trim_start().strip_prefix('-'))
        })?;
    Some(rest.trim_start())
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix)
        .then(|| &s[prefix.len()..])
}
