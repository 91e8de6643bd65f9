//! Number and JSON string formatting shared by the export writers.
//!
//! Reports promise that every number shown in HTML appears verbatim in
//! the machine-readable exports, so all of them format through these
//! helpers instead of ad-hoc float printing.

/// One-decimal percentage string from tenths (e.g. 797 -> "79.7").
pub(crate) fn tenths_string(tenths: u64) -> String {
    format!("{}.{}", tenths / 10, tenths % 10)
}

/// Scores are reported at two decimals, round-half-up on the wire.
pub(crate) fn score_string(value: f64) -> String {
    format!("{value:.2}")
}

/// Escapes a string for embedding in a JSON document.
pub(crate) fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Escapes text for HTML element content.
pub(crate) fn html_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}
