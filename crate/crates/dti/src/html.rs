//! HTML to plain text extraction.
//!
//! A tolerant single-pass scanner rather than a spec-grade DOM: script,
//! style, and head subtrees are dropped, block-level tags become line
//! breaks, entities are decoded, and everything else that is not a text
//! node is discarded. Malformed input never fails; worst case the output
//! is empty.

/// Tags whose entire content is dropped.
const SKIP_SUBTREE: &[&str] = &["script", "style", "head", "noscript", "template", "svg"];

/// Tags treated as block boundaries (line break on open and close).
const BLOCK_TAGS: &[&str] = &[
    "p", "div", "br", "li", "ul", "ol", "dl", "dt", "dd", "h1", "h2", "h3", "h4", "h5", "h6",
    "tr", "td", "th", "table", "thead", "tbody", "tfoot", "caption", "section", "article",
    "aside", "header", "footer", "nav", "main", "blockquote", "pre", "hr", "form", "fieldset",
    "figure", "figcaption", "address", "option", "select", "title",
];

/// Extracts the text-node content of an HTML document.
pub fn extract_text(html: &str) -> String {
    let bytes = html.as_bytes();
    let mut out = String::with_capacity(html.len() / 4);
    let mut i = 0;
    let mut skip_until: Option<String> = None;

    while i < bytes.len() {
        if bytes[i] == b'<' {
            // comment
            if html[i..].starts_with("<!--") {
                i = match html[i + 4..].find("-->") {
                    Some(end) => i + 4 + end + 3,
                    None => bytes.len(),
                };
                continue;
            }
            // doctype / CDATA / other declarations
            if html[i..].starts_with("<!") || html[i..].starts_with("<?") {
                i = match html[i..].find('>') {
                    Some(end) => i + end + 1,
                    None => bytes.len(),
                };
                continue;
            }
            let Some(rel_end) = html[i..].find('>') else {
                // unterminated tag: drop the rest
                break;
            };
            let tag_body = &html[i + 1..i + rel_end];
            let closing = tag_body.starts_with('/');
            let name: String = tag_body
                .trim_start_matches('/')
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric())
                .collect::<String>()
                .to_ascii_lowercase();
            i += rel_end + 1;

            if let Some(waiting) = &skip_until {
                if closing && &name == waiting {
                    skip_until = None;
                }
                continue;
            }
            if !closing && SKIP_SUBTREE.contains(&name.as_str()) {
                // void-style usage (<script src=... />) has no subtree
                if !tag_body.ends_with('/') {
                    skip_until = Some(name);
                }
                continue;
            }
            if BLOCK_TAGS.contains(&name.as_str()) {
                out.push('\n');
            }
            continue;
        }

        if skip_until.is_some() {
            i = html[i..].find('<').map_or(bytes.len(), |p| i + p);
            continue;
        }

        let next_tag = html[i..].find('<').map_or(bytes.len(), |p| i + p);
        out.push_str(&decode_entities(&html[i..next_tag]));
        i = next_tag;
    }

    tidy_whitespace(&out)
}

/// Collapses runs of blank lines and surrounding spaces; trims the ends.
fn tidy_whitespace(raw: &str) -> String {
    let mut lines: Vec<&str> = raw.lines().map(str::trim).collect();
    lines.retain(|l| !l.is_empty());
    lines.join("\n")
}

/// Decodes numeric references and the named entities that matter for
/// Spanish-language pages.
pub fn decode_entities(text: &str) -> String {
    if !text.contains('&') {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        // entity bodies are short; anything longer is literal text
        let semi = rest.find(';').filter(|&p| p <= 11);
        match semi {
            Some(end) => {
                let body = &rest[1..end];
                match decode_entity(body) {
                    Some(ch) => out.push_str(&ch),
                    None => out.push_str(&rest[..end + 1]),
                }
                rest = &rest[end + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_entity(body: &str) -> Option<String> {
    if let Some(num) = body.strip_prefix('#') {
        let code = if let Some(hex) = num.strip_prefix(['x', 'X']) {
            u32::from_str_radix(hex, 16).ok()?
        } else {
            num.parse::<u32>().ok()?
        };
        return char::from_u32(code).map(String::from);
    }
    let ch = match body {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => ' ',
        "ndash" => '\u{2013}',
        "mdash" => '\u{2014}',
        "hellip" => '\u{2026}',
        "laquo" => '\u{00AB}',
        "raquo" => '\u{00BB}',
        "copy" => '\u{00A9}',
        "reg" => '\u{00AE}',
        "deg" => '\u{00B0}',
        "middot" => '\u{00B7}',
        "iexcl" => '\u{00A1}',
        "iquest" => '\u{00BF}',
        "aacute" => 'á',
        "eacute" => 'é',
        "iacute" => 'í',
        "oacute" => 'ó',
        "uacute" => 'ú',
        "ntilde" => 'ñ',
        "uuml" => 'ü',
        "Aacute" => 'Á',
        "Eacute" => 'É',
        "Iacute" => 'Í',
        "Oacute" => 'Ó',
        "Uacute" => 'Ú',
        "Ntilde" => 'Ñ',
        "Uuml" => 'Ü',
        "ccedil" => 'ç',
        "Ccedil" => 'Ç',
        "agrave" => 'à',
        "egrave" => 'è',
        "igrave" => 'ì',
        "ograve" => 'ò',
        "ugrave" => 'ù',
        _ => return None,
    };
    Some(ch.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_paragraph() {
        assert_eq!(extract_text("<p>Hola</p>"), "Hola");
    }

    #[test]
    fn scripts_are_dropped() {
        assert_eq!(extract_text("<script>x=1</script><p>a</p>"), "a");
        assert_eq!(extract_text("<style>.x{color:red}</style><p>b</p>"), "b");
    }

    #[test]
    fn head_content_is_dropped() {
        let html = "<html><head><title>t</title><meta x=1></head><body><p>cuerpo</p></body></html>";
        assert_eq!(extract_text(html), "cuerpo");
    }

    #[test]
    fn entities_decode() {
        assert_eq!(extract_text("a&amp;b"), "a&b");
        assert_eq!(extract_text("men&uacute; espa&ntilde;ol &#233;"), "menú español é");
        assert_eq!(extract_text("&#x41;&unknown;"), "A&unknown;");
    }

    #[test]
    fn block_elements_become_line_breaks() {
        let html = "<div>uno</div><div>dos</div><span>tres</span><span>!</span>";
        assert_eq!(extract_text(html), "uno\ndos\ntres!");
        assert_eq!(extract_text("a<br>b"), "a\nb");
    }

    #[test]
    fn comments_and_doctype_disappear() {
        assert_eq!(extract_text("<!doctype html><!-- hi <p>x</p> -->ok"), "ok");
    }

    #[test]
    fn malformed_input_is_tolerated() {
        assert_eq!(extract_text("<p>abierto"), "abierto");
        assert_eq!(extract_text("texto <no-cerrado"), "texto");
        assert_eq!(extract_text(""), "");
        assert_eq!(extract_text("<script>never closed"), "");
    }

    #[test]
    fn nested_skip_subtrees() {
        let html = "<body><script>var a = '<p>no</p>';</script>si<style>x</style></body>";
        assert_eq!(extract_text(html), "si");
    }
}
