//! The ten constraint-sentence phrasings, shared by the prompt renderer
//! and the task-block parser.
//!
//! Each template is a data file with a `{before}` slot (always a single
//! step) and an `{after}` slot (one step, or an ascending "step 2, 3 and
//! 4" list when economic compression merges edges that share their
//! preceding step). Sentences are rendered in sentence case with a
//! trailing period.

use std::sync::OnceLock;

use regex::Regex;

pub(crate) const TEMPLATE_COUNT: usize = 10;

static TEMPLATE_TEXTS: [&str; TEMPLATE_COUNT] = [
    include_str!("../data/templates/template_01.txt"),
    include_str!("../data/templates/template_02.txt"),
    include_str!("../data/templates/template_03.txt"),
    include_str!("../data/templates/template_04.txt"),
    include_str!("../data/templates/template_05.txt"),
    include_str!("../data/templates/template_06.txt"),
    include_str!("../data/templates/template_07.txt"),
    include_str!("../data/templates/template_08.txt"),
    include_str!("../data/templates/template_09.txt"),
    include_str!("../data/templates/template_10.txt"),
];

/// Renders one constraint sentence. `index` is 0-based; `followers` must
/// be nonempty and ascending.
pub(crate) fn sentence(index: usize, before: u32, followers: &[u32]) -> String {
    let template = TEMPLATE_TEXTS[index];
    let rendered = template
        .replace("{before}", &format!("step {before}"))
        .replace("{after}", &follower_phrase(followers));
    capitalize_first(&rendered)
}

/// "step 2", "step 2 and 3", "step 2, 3 and 4", ...
fn follower_phrase(followers: &[u32]) -> String {
    let mut phrase = format!("step {}", followers[0]);
    for (pos, f) in followers.iter().enumerate().skip(1) {
        if pos + 1 == followers.len() {
            phrase.push_str(&format!(" and {f}"));
        } else {
            phrase.push_str(&format!(", {f}"));
        }
    }
    phrase
}

/// Tries all ten templates against one sentence; returns the preceding
/// step and its followers on a match.
pub(crate) fn parse_sentence(line: &str) -> Option<(u32, Vec<u32>)> {
    let normalized = decapitalize_first(line.trim_end());
    for regex in regexes() {
        if let Some(caps) = regex.captures(&normalized) {
            let before: u32 = caps.name("before")?.as_str().parse().ok()?;
            let followers: Vec<u32> = caps
                .name("after")?
                .as_str()
                .replace(" and ", ", ")
                .split(", ")
                .map(|n| n.parse().ok())
                .collect::<Option<Vec<u32>>>()?;
            return Some((before, followers));
        }
    }
    None
}

fn regexes() -> &'static Vec<Regex> {
    static REGEXES: OnceLock<Vec<Regex>> = OnceLock::new();
    REGEXES.get_or_init(|| {
        TEMPLATE_TEXTS
            .iter()
            .map(|template| {
                let mut pattern = String::from("^");
                let mut rest = *template;
                while let Some(pos) = rest.find('{') {
                    pattern.push_str(&regex::escape(&rest[..pos]));
                    let end = rest[pos..].find('}').expect("unclosed template slot") + pos;
                    match &rest[pos..=end] {
                        "{before}" => pattern.push_str(r"step (?P<before>\d+)"),
                        "{after}" => {
                            pattern.push_str(r"step (?P<after>\d+(?:, \d+)*(?: and \d+)?)")
                        }
                        slot => panic!("unknown template slot {slot}"),
                    }
                    rest = &rest[end + 1..];
                }
                pattern.push_str(&regex::escape(rest));
                pattern.push('$');
                Regex::new(&pattern).expect("template pattern must compile")
            })
            .collect()
    })
}

fn capitalize_first(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn decapitalize_first(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}
