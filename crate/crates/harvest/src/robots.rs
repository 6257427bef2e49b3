//! Minimal robots.txt: user-agent groups with Allow/Disallow prefixes,
//! `*` wildcards and `$` anchors. Longest matching rule wins; ties allow.

#[derive(Debug, Clone, PartialEq, Eq)]
struct Rule {
    allow: bool,
    pattern: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RobotsRules {
    rules: Vec<Rule>,
}

impl RobotsRules {
    pub fn allow_all() -> Self {
        RobotsRules::default()
    }

    pub fn disallow_all() -> Self {
        RobotsRules { rules: vec![Rule { allow: false, pattern: "/".into() }] }
    }

    /// Rules of the groups naming `user_agent` (product token, case-insensitive),
    /// else of the `*` groups, else nothing.
    pub fn parse(body: &str, user_agent: &str) -> Self {
        let token = user_agent.split('/').next().unwrap_or("").trim().to_ascii_lowercase();
        let mut groups: Vec<(Vec<String>, Vec<Rule>)> = Vec::new();
        let mut in_rules = false;
        for raw in body.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let Some((key, value)) = line.split_once(':') else { continue };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            match key.as_str() {
                "user-agent" => {
                    if in_rules || groups.is_empty() {
                        groups.push((Vec::new(), Vec::new()));
                        in_rules = false;
                    }
                    groups.last_mut().expect("pushed above").0.push(value.to_ascii_lowercase());
                }
                "allow" | "disallow" => {
                    in_rules = true;
                    let Some(group) = groups.last_mut() else { continue };
                    // empty Disallow allows everything; empty Allow is a no-op
                    if !value.is_empty() {
                        group.1.push(Rule { allow: key == "allow", pattern: value.to_owned() });
                    }
                }
                _ => {}
            }
        }
        let named = |agents: &Vec<String>| {
            !token.is_empty() && agents.iter().any(|a| a != "*" && !a.is_empty() && token.contains(a.as_str()))
        };
        let pick = if groups.iter().any(|(a, _)| named(a)) {
            groups.into_iter().filter(|(a, _)| named(a)).flat_map(|(_, r)| r).collect()
        } else {
            groups.into_iter().filter(|(a, _)| a.iter().any(|x| x == "*")).flat_map(|(_, r)| r).collect()
        };
        RobotsRules { rules: pick }
    }

    /// `path` is the URL path plus optional `?query`.
    pub fn is_allowed(&self, path: &str) -> bool {
        let mut best: Option<(usize, bool)> = None;
        for r in &self.rules {
            if pattern_matches(&r.pattern, path) {
                let len = r.pattern.len();
                best = match best {
                    Some((l, a)) if l > len || (l == len && a) => Some((l, a)),
                    _ => Some((len, r.allow)),
                };
            }
        }
        best.is_none_or(|(_, allow)| allow)
    }
}

fn pattern_matches(pattern: &str, path: &str) -> bool {
    let (pattern, anchored) = match pattern.strip_suffix('$') {
        Some(p) => (p, true),
        None => (pattern, false),
    };
    let pieces: Vec<&str> = pattern.split('*').collect();
    let mut pos = 0usize;
    for (i, piece) in pieces.iter().enumerate() {
        if i == 0 {
            if !path.starts_with(piece) {
                return false;
            }
            pos = piece.len();
            continue;
        }
        if i == pieces.len() - 1 && anchored {
            return path.len() >= pos + piece.len() && path.ends_with(piece);
        }
        match path[pos..].find(piece) {
            Some(off) => pos += off + piece.len(),
            None => return false,
        }
    }
    !anchored || pos == path.len()
}
