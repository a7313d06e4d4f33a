//! Canonical textual rendering of outlines, matching what the parsers read
//! back. Used to bind outlines into prompts and to fabricate scripted
//! completions.

use crate::domain::Outline;

/// Numbered outline lines without any block marker: `1. Header` for headers
/// and an indented `1.1 Subheader` for subheaders.
pub fn outline_body(outline: &Outline) -> String {
    let mut out = String::new();
    for (i, section) in outline.sections.iter().enumerate() {
        out.push_str(&format!("{}. {}\n", i + 1, section.header));
        for (j, sub) in section.subheaders.iter().enumerate() {
            out.push_str(&format!("  {}.{} {}\n", i + 1, j + 1, sub));
        }
    }
    out.trim_end().to_string()
}

/// The `==Title==` / `==Initial Outline==` completion shape for a title and
/// a header-only outline.
pub fn format_title_and_initial_outline(title: &str, outline: &Outline) -> String {
    format!(
        "==Title==\n{title}\n==Initial Outline==\n{}",
        outline_body(outline)
    )
}

/// The `==Augmented Outline==` completion shape.
pub fn format_augmented_outline(outline: &Outline) -> String {
    format!("==Augmented Outline==\n{}", outline_body(outline))
}
