//! HTML to plain text for article bodies.
//!
//! The parser is a forgiving single pass over the input: anything that looks
//! like a tag is dropped, the content of `<code>`, `<script>` and `<style>`
//! elements is dropped entirely, and a `<` that does not open a tag is kept
//! as text. Unbalanced or truncated markup never fails.

use std::sync::OnceLock;

use regex::Regex;

/// Elements whose content is removed along with the tags.
const DROP_CONTENT: &[&str] = &["code", "script", "style"];

/// Elements that do not separate words when removed.
const INLINE: &[&str] = &[
    "a", "abbr", "b", "bdi", "bdo", "cite", "data", "dfn", "em", "i", "kbd", "mark", "q", "s",
    "samp", "small", "span", "strong", "sub", "sup", "time", "u", "var", "wbr",
];

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)https?://\S*|\bwww\.\S+").expect("static regex"))
}

/// Strip markup from `body_html`, returning whitespace-collapsed plain text
/// with code, tags and URLs removed.
pub fn strip_markup(body_html: &str) -> String {
    let without_tags = remove_tags(body_html);
    let decoded = decode_entities(&without_tags);
    let without_urls = url_regex().replace_all(&decoded, " ");
    collapse_whitespace(&without_urls)
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

struct Tag<'a> {
    name: &'a str,
    closing: bool,
    self_closing: bool,
    /// Byte offset one past the closing `>`.
    end: usize,
}

/// Try to read a tag starting at `start` (which holds `<`).
fn read_tag(html: &str, start: usize) -> Option<Tag<'_>> {
    let rest = &html[start + 1..];
    let (closing, name_start) = match rest.as_bytes().first()? {
        b'/' => (true, 1),
        b'!' | b'?' => {
            // comment, doctype or processing instruction
            let end = if rest.starts_with("!--") {
                rest.find("-->").map(|i| i + 3)
            } else {
                rest.find('>').map(|i| i + 1)
            };
            return Some(Tag {
                name: "",
                closing: false,
                self_closing: true,
                end: start + 1 + end.unwrap_or(rest.len()),
            });
        }
        _ => (false, 0),
    };
    let name_bytes = &rest.as_bytes()[name_start..];
    if !name_bytes.first()?.is_ascii_alphabetic() {
        return None;
    }
    let name_len = name_bytes
        .iter()
        .take_while(|b| b.is_ascii_alphanumeric() || **b == b'-')
        .count();
    let name = &rest[name_start..name_start + name_len];
    // Scan to the closing '>' honouring quoted attribute values.
    let mut quote: Option<u8> = None;
    let mut end = None;
    for (i, b) in rest.bytes().enumerate().skip(name_start + name_len) {
        match (quote, b) {
            (Some(q), _) if b == q => quote = None,
            (Some(_), _) => {}
            (None, b'"') | (None, b'\'') => quote = Some(b),
            (None, b'>') => {
                end = Some(i);
                break;
            }
            _ => {}
        }
    }
    let end = end.unwrap_or(rest.len());
    let self_closing = rest[..end].ends_with('/');
    Some(Tag {
        name,
        closing,
        self_closing,
        end: (start + 1 + end + 1).min(html.len()),
    })
}

fn remove_tags(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut pos = 0;
    // Depth inside content-dropping elements, with the name that opened it.
    let mut dropping: Vec<String> = Vec::new();
    while pos < html.len() {
        let Some(offset) = html[pos..].find('<') else {
            if dropping.is_empty() {
                out.push_str(&html[pos..]);
            }
            break;
        };
        let lt = pos + offset;
        if dropping.is_empty() {
            out.push_str(&html[pos..lt]);
        }
        match read_tag(html, lt) {
            None => {
                if dropping.is_empty() {
                    out.push('<');
                }
                pos = lt + 1;
            }
            Some(tag) => {
                let lower = tag.name.to_ascii_lowercase();
                if DROP_CONTENT.contains(&lower.as_str()) {
                    if tag.closing {
                        if let Some(i) = dropping.iter().rposition(|n| *n == lower) {
                            dropping.truncate(i);
                        }
                    } else if !tag.self_closing {
                        dropping.push(lower.clone());
                    }
                }
                if dropping.is_empty() && !INLINE.contains(&lower.as_str()) {
                    out.push(' ');
                }
                pos = tag.end;
            }
        }
    }
    out
}

fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        match tail[1..].find(';').filter(|&i| i > 0 && i <= 10) {
            Some(semi) => {
                let entity = &tail[1..1 + semi];
                match decode_entity(entity) {
                    Some(c) => {
                        out.push(c);
                        rest = &tail[semi + 2..];
                    }
                    None => {
                        out.push('&');
                        rest = &tail[1..];
                    }
                }
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_entity(entity: &str) -> Option<char> {
    let c = match entity {
        "amp" => '&',
        "quot" => '"',
        "apos" | "#39" => '\'',
        "nbsp" => ' ',
        "mdash" => '—',
        "ndash" => '–',
        "hellip" => '…',
        "rsquo" | "lsquo" => '\'',
        "rdquo" | "ldquo" => '"',
        // Angle brackets from escaped text would re-form markup-like
        // sequences; they carry no words, so become separators.
        "lt" | "gt" => ' ',
        _ => {
            let num = entity.strip_prefix('#')?;
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => num.parse().ok()?,
            };
            let c = char::from_u32(code)?;
            if c == '<' || c == '>' {
                ' '
            } else {
                c
            }
        }
    };
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inline_code_is_removed() {
        assert_eq!(strip_markup("<p>Hi <code>x=1</code> there</p>"), "Hi there");
    }

    #[test]
    fn code_blocks_are_removed() {
        assert_eq!(
            strip_markup("<pre><code>for i in range(10): pass</code></pre>Read on"),
            "Read on"
        );
    }

    #[test]
    fn urls_are_removed() {
        assert_eq!(strip_markup("see https://example.com/a?b=c now"), "see now");
        assert_eq!(strip_markup("or www.example.org too"), "or too");
    }

    #[test]
    fn block_tags_separate_words() {
        assert_eq!(strip_markup("<p>one</p><p>two</p>"), "one two");
        assert_eq!(strip_markup("<li>a</li><li>b</li>"), "a b");
        assert_eq!(strip_markup("re<em>mark</em>able"), "remarkable");
    }

    #[test]
    fn links_keep_text_but_not_href() {
        assert_eq!(
            strip_markup(r#"read <a href="https://dev.to/x">my post</a>."#),
            "read my post."
        );
    }

    #[test]
    fn malformed_markup_is_tolerated() {
        assert_eq!(strip_markup("a < b and <p unclosed"), "a < b and");
        assert_eq!(strip_markup("<code>never closed"), "");
        assert_eq!(strip_markup("x </code> y"), "x y");
        assert_eq!(strip_markup("<!-- note --> kept"), "kept");
        assert_eq!(strip_markup("<3 you"), "<3 you");
    }

    #[test]
    fn nested_code_and_attributes() {
        let html = r#"<div class="highlight"><pre class="a>b"><code><span>let</span> x</code></pre></div>after"#;
        assert_eq!(strip_markup(html), "after");
    }

    #[test]
    fn entities_decode() {
        assert_eq!(strip_markup("Tom &amp; Jerry&#39;s"), "Tom & Jerry's");
        assert_eq!(strip_markup("&lt;code&gt;x"), "code x");
        assert_eq!(strip_markup("&bogus; &"), "&bogus; &");
    }

    proptest! {
        #[test]
        fn idempotent_on_plain_text(s in "[a-zA-Z0-9 .,;:!?'()\\-\n\t]{0,80}") {
            let once = strip_markup(&s);
            prop_assert_eq!(strip_markup(&once), once);
        }

        #[test]
        fn never_emits_code_or_urls(s in "(<code>|</code>|<p>|https://x.y/z|http://a.b|&lt;|[a-z ]){0,30}") {
            let out = strip_markup(&s);
            prop_assert!(!out.contains("<code>"));
            prop_assert!(!out.contains("http://"));
            prop_assert!(!out.contains("https://"));
        }
    }
}
