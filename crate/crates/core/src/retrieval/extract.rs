//! Plain-text extraction from fetched markup.
//!
//! Script/style regions and comments are dropped, block-level boundaries
//! become paragraph breaks, remaining tags are stripped, and character
//! entities are decoded. Documents without markup pass through mostly
//! untouched; a lone `<` not opening a tag is kept as text.

/// Tags whose boundaries separate blocks of text.
const BLOCK_TAGS: [&str; 22] = [
    "p", "div", "br", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "tr", "td", "table",
    "section", "article", "header", "footer", "blockquote", "pre", "dd",
];

/// Strips markup from `html` and returns the visible text with block
/// boundaries rendered as blank lines. The result still needs
/// [`crate::text::normalize`] for whitespace canonicalization.
pub fn extract_text(html: &str) -> String {
    let without_regions = drop_regions(html);
    let mut out = String::with_capacity(without_regions.len());
    let bytes: Vec<char> = without_regions.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == '<' && i + 1 < bytes.len() && is_tag_start(bytes[i + 1]) {
            let close = match bytes[i..].iter().position(|&c| c == '>') {
                Some(offset) => i + offset,
                None => break, // unterminated tag: drop the rest
            };
            let tag: String = bytes[i + 1..close].iter().collect();
            if is_block_tag(&tag) {
                out.push_str("\n\n");
            }
            i = close + 1;
            continue;
        }
        if c == '&' {
            if let Some((decoded, consumed)) = decode_entity(&bytes[i..]) {
                out.push(decoded);
                i += consumed;
                continue;
            }
        }
        out.push(c);
        i += 1;
    }
    out
}

fn is_tag_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '/' || c == '!'
}

fn is_block_tag(tag: &str) -> bool {
    let name: String = tag
        .trim_start_matches('/')
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase();
    BLOCK_TAGS.contains(&name.as_str())
}

/// Removes `<script>`/`<style>` bodies and comments. Tag matching is
/// ASCII-case-insensitive on the original bytes, so multibyte text never
/// shifts offsets.
fn drop_regions(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut i = 0;
    while i < html.len() {
        let rest = &html[i..];
        let skip = if starts_ci(rest, "<script") {
            Some(region_len(rest, "</script"))
        } else if starts_ci(rest, "<style") {
            Some(region_len(rest, "</style"))
        } else if rest.starts_with("<!--") {
            Some(rest.find("-->").map(|p| p + 3).unwrap_or(rest.len()))
        } else {
            None
        };
        match skip {
            Some(len) => i += len.max(1),
            None => {
                let step = rest.chars().next().map(char::len_utf8).unwrap_or(1);
                out.push_str(&html[i..i + step]);
                i += step;
            }
        }
    }
    out
}

fn starts_ci(s: &str, prefix: &str) -> bool {
    s.len() >= prefix.len() && s.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

/// Byte length of a region from its opening tag through the `>` of the
/// ASCII close tag; the rest of the document when unterminated. The close
/// tag starts with `<`, so the returned offsets sit on char boundaries.
fn region_len(rest: &str, close: &str) -> usize {
    let needle = close.as_bytes();
    let position = rest
        .as_bytes()
        .windows(needle.len())
        .position(|w| w.eq_ignore_ascii_case(needle));
    match position {
        Some(p) => match rest[p..].find('>') {
            Some(q) => p + q + 1,
            None => rest.len(),
        },
        None => rest.len(),
    }
}

/// Decodes one entity starting at `chars[0] == '&'`. Returns the decoded
/// character and how many input characters were consumed.
fn decode_entity(chars: &[char]) -> Option<(char, usize)> {
    let end = chars.iter().take(12).position(|&c| c == ';')?;
    let body: String = chars[1..end].iter().collect();
    let decoded = match body.as_str() {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => ' ',
        _ => {
            let code = match body.strip_prefix("#x").or_else(|| body.strip_prefix("#X")) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => body.strip_prefix('#')?.parse::<u32>().ok()?,
            };
            char::from_u32(code)?
        }
    };
    Some((decoded, end + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::normalize;

    fn extract_normalized(html: &str) -> String {
        normalize(&extract_text(html))
    }

    #[test]
    fn strips_inline_markup() {
        assert_eq!(extract_normalized("<p>Hello <b>world</b>.</p>"), "Hello world.");
    }

    #[test]
    fn drops_scripts_and_styles() {
        let html = "<html><head><style>p{color:red}</style>\
                    <script>var x = '<p>not text</p>';</script></head>\
                    <body><p>Real content.</p></body></html>";
        assert_eq!(extract_normalized(html), "Real content.");
    }

    #[test]
    fn block_tags_become_paragraph_breaks() {
        let html = "<div>First block.</div><div>Second block.</div>";
        assert_eq!(extract_normalized(html), "First block.\n\nSecond block.");
    }

    #[test]
    fn decodes_entities() {
        assert_eq!(
            extract_normalized("Fish &amp; chips &lt;cheap&gt; &#65; &#x42;"),
            "Fish & chips <cheap> A B"
        );
    }

    #[test]
    fn plain_text_passes_through() {
        assert_eq!(extract_normalized("No markup, just 2 < 3 text."), "No markup, just 2 < 3 text.");
    }

    #[test]
    fn comments_are_removed() {
        assert_eq!(extract_normalized("before <!-- hidden <p>x</p> --> after"), "before after");
    }

    #[test]
    fn script_only_document_yields_empty_text() {
        assert_eq!(extract_normalized("<script>only()</script>"), "");
    }

    #[test]
    fn multibyte_text_does_not_shift_region_offsets() {
        // 'İ' grows when lowercased; offsets must come from the original.
        let html = "İstanbul önce <SCRIPT>var x = 'İ';</SCRIPT> sonra İzmir.";
        assert_eq!(extract_normalized(html), "İstanbul önce sonra İzmir.");
    }

    #[test]
    fn unterminated_script_drops_the_rest() {
        assert_eq!(extract_normalized("keep <script>lost forever"), "keep");
    }
}
