//! Tolerant HTML handling: selector-driven text extraction and link
//! discovery. Parsing follows HTML5 error recovery, so unclosed tags and
//! attribute quirks never fail.

use std::collections::HashSet;

use scraper::node::Node;
use scraper::{ElementRef, Html};
use url::Url;

use crate::selector::ContentSelector;
use crate::spider::{url_filter, SpiderConfig};
use crate::urls::canonicalize;

const SKIP_TEXT_OF: [&str; 4] = ["script", "style", "noscript", "template"];

/// Text of every element the selector matches, in document order, one match
/// per line. Inline markup is flattened and whitespace runs collapse.
/// Matches nested inside an earlier match are not repeated.
pub fn extract_content(html: &str, selector: &ContentSelector) -> String {
    let doc = Html::parse_document(html);
    extract_from(&doc, selector)
}

pub(crate) fn extract_from(doc: &Html, selector: &ContentSelector) -> String {
    let mut blocks: Vec<String> = Vec::new();
    let mut stack = vec![doc.tree.root()];
    // depth-first, document order, pruning below a match
    while let Some(node) = stack.pop() {
        if let Some(el) = ElementRef::wrap(node) {
            if SKIP_TEXT_OF.contains(&el.value().name()) {
                continue;
            }
            if selector.matches(&el) {
                let text = element_text(el);
                if !text.is_empty() {
                    blocks.push(text);
                }
                continue;
            }
        }
        let children: Vec<_> = node.children().collect();
        stack.extend(children.into_iter().rev());
    }
    blocks.join("\n")
}

fn element_text(el: ElementRef<'_>) -> String {
    let mut raw = String::new();
    let mut stack = vec![*el];
    while let Some(node) = stack.pop() {
        match node.value() {
            Node::Text(t) => raw.push_str(t),
            Node::Element(e) => {
                if SKIP_TEXT_OF.contains(&e.name()) {
                    continue;
                }
                if e.name() == "br" {
                    raw.push(' ');
                }
                let children: Vec<_> = node.children().collect();
                stack.extend(children.into_iter().rev());
            }
            _ => {}
        }
    }
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// `<title>` text, whitespace-collapsed, if present and non-empty.
pub fn page_title(doc: &Html) -> Option<String> {
    let sel = scraper::Selector::parse("title").expect("static selector");
    doc.select(&sel).next().map(element_text).filter(|t| !t.is_empty())
}

/// Anchor targets resolved against the page (honouring `<base href>`),
/// canonicalized, kept when they match an allow pattern and pass the URL
/// filter, de-duplicated in document order.
pub fn discover_links(html: &str, base_url: &Url, config: &SpiderConfig) -> Vec<Url> {
    let doc = Html::parse_document(html);
    discover_from(&doc, base_url, config)
}

pub(crate) fn discover_from(doc: &Html, base_url: &Url, config: &SpiderConfig) -> Vec<Url> {
    let base_sel = scraper::Selector::parse("base[href]").expect("static selector");
    let base = doc
        .select(&base_sel)
        .next()
        .and_then(|b| b.value().attr("href"))
        .and_then(|h| base_url.join(h.trim()).ok())
        .unwrap_or_else(|| base_url.clone());

    let a_sel = scraper::Selector::parse("a[href]").expect("static selector");
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in doc.select(&a_sel) {
        let href = a.value().attr("href").unwrap_or("").trim();
        if href.is_empty() {
            continue;
        }
        let Ok(url) = base.join(href) else { continue };
        if !matches!(url.scheme(), "http" | "https") {
            continue;
        }
        let url = canonicalize(url);
        if !config.allow_patterns.iter().any(|p| p.matches(&url)) || !url_filter(&url, config) {
            continue;
        }
        if seen.insert(url.as_str().to_owned()) {
            out.push(url);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sel(s: &str) -> ContentSelector {
        ContentSelector::parse(s).unwrap()
    }

    #[test]
    fn article_paragraphs() {
        assert_eq!(extract_content("<article><p>a</p><p>b</p></article>", &sel("article p::text")), "a\nb");
    }

    #[test]
    fn no_match_is_empty() {
        assert_eq!(extract_content("<div><p>a</p></div>", &sel("article p::text")), "");
    }

    #[test]
    fn inline_markup_is_flattened() {
        assert_eq!(extract_content("<p>x <b>y</b> z</p>", &sel("p::text")), "x y z");
        assert_eq!(extract_content("<p>a<br>b</p>", &sel("p")), "a b");
    }

    #[test]
    fn entities_decoded_and_scripts_skipped() {
        let html = "<div class=body><p>Tom &amp; Jerry &#1587;</p><script>var x = 1;</script><p>  two\n  lines </p></div>";
        assert_eq!(extract_content(html, &sel("div.body p")), "Tom & Jerry س\ntwo lines");
        assert_eq!(extract_content(html, &sel(".body")), "Tom & Jerry س two lines");
    }

    #[test]
    fn tolerant_of_broken_markup() {
        let html = "<html><body><article><p>one<p>two<div id=x class='a b'>three</article>";
        assert_eq!(extract_content(html, &sel("article p")), "one\ntwo");
        assert_eq!(extract_content(html, &sel("#x.b")), "three");
        assert_eq!(extract_content(html, &sel("body #x")), "three");
        assert_eq!(extract_content(html, &sel("section #x")), "");
    }

    #[test]
    fn nested_matches_not_repeated() {
        let html = "<div>outer <div>inner</div></div><div>next</div>";
        assert_eq!(extract_content(html, &sel("div")), "outer inner\nnext");
    }

    #[test]
    fn descendant_chain_needs_order() {
        let html = "<section><article><p>in</p></article></section><article><section><p>rev</p></section></article>";
        assert_eq!(extract_content(html, &sel("section article p")), "in");
    }
}
