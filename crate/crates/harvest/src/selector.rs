//! The selector subset spiders use: type selectors, `.class`, `#id`,
//! descendant combinators and a trailing `::text`.

use std::fmt;

use scraper::ElementRef;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unsupported selector `{selector}`: {reason}")]
pub struct SelectorError {
    pub selector: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Compound {
    tag: Option<String>,
    ids: Vec<String>,
    classes: Vec<String>,
}

impl Compound {
    fn matches(&self, el: &ElementRef<'_>) -> bool {
        let v = el.value();
        if let Some(tag) = &self.tag {
            if !v.name().eq_ignore_ascii_case(tag) {
                return false;
            }
        }
        if !self.ids.iter().all(|id| v.id() == Some(id.as_str())) {
            return false;
        }
        self.classes.iter().all(|c| v.classes().any(|have| have == c))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentSelector {
    source: String,
    chain: Vec<Compound>,
    text_suffix: bool,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '_' || !c.is_ascii()
}

impl ContentSelector {
    pub fn parse(input: &str) -> Result<Self, SelectorError> {
        let err = |reason: &str| SelectorError { selector: input.to_owned(), reason: reason.to_owned() };
        let trimmed = input.trim();
        let (body, text_suffix) = match trimmed.strip_suffix("::text") {
            Some(b) => (b, true),
            None => (trimmed, false),
        };
        if body.trim().is_empty() {
            return Err(err("empty selector"));
        }
        if body.ends_with(char::is_whitespace) {
            return Err(err("`::text` must follow a compound selector directly"));
        }
        let mut chain = Vec::new();
        for part in body.split_whitespace() {
            chain.push(Self::parse_compound(part).map_err(|r| err(&r))?);
        }
        Ok(ContentSelector { source: trimmed.to_owned(), chain, text_suffix })
    }

    fn parse_compound(part: &str) -> Result<Compound, String> {
        let mut compound = Compound::default();
        let mut chars = part.char_indices().peekable();
        let take_ident = |start: usize, chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>| -> String {
            let mut end = start;
            while let Some(&(i, c)) = chars.peek() {
                if is_ident_char(c) {
                    end = i + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            part[start..end].to_owned()
        };
        if let Some(&(_, c)) = chars.peek() {
            if is_ident_char(c) {
                if c.is_ascii_digit() || c == '-' {
                    return Err(format!("`{part}`: a type selector cannot start with `{c}`"));
                }
                compound.tag = Some(take_ident(0, &mut chars).to_ascii_lowercase());
            }
        }
        while let Some((i, c)) = chars.next() {
            let ident = take_ident(i + 1, &mut chars);
            if ident.is_empty() {
                return Err(format!("`{part}`: expected a name after `{c}`"));
            }
            match c {
                '.' => compound.classes.push(ident),
                '#' => compound.ids.push(ident),
                other => return Err(format!("`{other}` is outside the supported subset (tag, .class, #id, descendant, ::text)")),
            }
        }
        if compound == Compound::default() {
            return Err(format!("`{part}` is not a selector"));
        }
        Ok(compound)
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn has_text_suffix(&self) -> bool {
        self.text_suffix
    }

    /// True when the last compound matches `el` and the earlier compounds
    /// match a chain of its ancestors, in order.
    pub fn matches(&self, el: &ElementRef<'_>) -> bool {
        let (last, rest) = self.chain.split_last().expect("selector chain is non-empty");
        if !last.matches(el) {
            return false;
        }
        let mut remaining = rest.iter().rev().peekable();
        let mut node = el.parent();
        while let Some(n) = node {
            let Some(want) = remaining.peek() else { break };
            if let Some(anc) = ElementRef::wrap(n) {
                if want.matches(&anc) {
                    remaining.next();
                }
            }
            node = n.parent();
        }
        remaining.peek().is_none()
    }
}

impl fmt::Display for ContentSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for ContentSelector {
    type Err = SelectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}
