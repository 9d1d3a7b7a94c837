//! Pulling formulas and lists out of free-form completions.

use crate::lang::{parse_property, Logic};

fn first_fenced_block(text: &str) -> Option<&str> {
    let start = text.find("```")?;
    let after = &text[start + 3..];
    let body_start = after.find('\n').map(|i| i + 1)?;
    let body = &after[body_start..];
    let end = body.find("```").unwrap_or(body.len());
    Some(&body[..end])
}

/// Strips list markers, emphasis, inline code ticks, a leading
/// `CTLSPEC`/`LTLSPEC` keyword and a trailing semicolon.
fn clean(line: &str) -> String {
    let mut s = line.trim();
    for marker in ["- ", "* ", "> "] {
        if let Some(rest) = s.strip_prefix(marker) {
            s = rest.trim_start();
        }
    }
    let s = s.replace("**", "").replace('`', "");
    let mut s = s.trim();
    for kw in ["CTLSPEC", "LTLSPEC", "ctlspec", "ltlspec"] {
        if let Some(rest) = s.strip_prefix(kw) {
            s = rest.trim_start();
        }
    }
    s.trim_end_matches(';').trim().to_string()
}

/// The candidate formula in a completion: the first fenced block if any,
/// otherwise the first line that parses as a formula of `logic`.
pub fn extract_formula(completion: &str, logic: Logic) -> Option<String> {
    if let Some(block) = first_fenced_block(completion) {
        let joined = block.lines().map(clean).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ");
        return (!joined.is_empty()).then_some(joined);
    }
    completion.lines().map(clean).filter(|l| !l.is_empty()).find(|l| parse_property(l, logic, true).is_ok())
}

fn list_item(line: &str) -> Option<&str> {
    let t = line.trim_start();
    for marker in ["- ", "* ", "• "] {
        if let Some(rest) = t.strip_prefix(marker) {
            return Some(rest);
        }
    }
    let digits = t.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &t[digits..];
        if let Some(r) = rest.strip_prefix(". ").or_else(|| rest.strip_prefix(") ")) {
            return Some(r);
        }
    }
    None
}

/// Items of a bulleted or numbered list. Indented continuation lines are
/// joined to their item; text before the first item is ignored. A
/// terminating `;` or `.` of each item is dropped.
pub fn parse_list(completion: &str) -> Vec<String> {
    let mut items: Vec<String> = Vec::new();
    for line in completion.lines() {
        if let Some(item) = list_item(line) {
            items.push(item.trim().to_string());
        } else if !line.trim().is_empty() && line.starts_with([' ', '\t']) {
            if let Some(last) = items.last_mut() {
                last.push(' ');
                last.push_str(line.trim());
            }
        }
    }
    items.into_iter().map(|i| i.trim_end_matches([';', '.']).trim_end().to_string()).filter(|i| !i.is_empty()).collect()
}
