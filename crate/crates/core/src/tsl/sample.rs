//! Deterministic string synthesis for `pattern` constraints.

use regex::Regex;
use regex_syntax::hir::{Class, Hir, HirKind};

/// A string matching `pattern` whose length (in chars) lies in the bounds.
///
/// Unbounded repetitions are unrolled progressively; `None` when the
/// pattern is unsupported (e.g. look-around) or no candidate fits.
pub fn sample_matching(pattern: &str, min_len: Option<u64>, max_len: Option<u64>) -> Option<String> {
    let re = Regex::new(pattern).ok()?;
    let hir = regex_syntax::Parser::new().parse(pattern).ok()?;
    let fits = |s: &str| {
        let n = s.chars().count() as u64;
        min_len.is_none_or(|lo| n >= lo) && max_len.is_none_or(|hi| n <= hi)
    };
    for extra in 0..=128u32 {
        let candidate = generate(&hir, extra);
        if re.is_match(&candidate) && fits(&candidate) {
            return Some(candidate);
        }
        if max_len.is_some_and(|hi| candidate.chars().count() as u64 > hi) {
            break;
        }
    }
    None
}

/// A string of `len` chars that `pattern` does not match.
pub fn sample_violating(pattern: &str, len: u64) -> Option<String> {
    let re = Regex::new(pattern).ok()?;
    let len = len.max(1) as usize;
    ['!', ' ', '0', 'a', 'A', '-', '#', '_', '~']
        .into_iter()
        .map(|c| c.to_string().repeat(len))
        .chain(std::iter::once(String::new()))
        .find(|s| !re.is_match(s))
}

fn generate(hir: &Hir, extra: u32) -> String {
    match hir.kind() {
        HirKind::Empty | HirKind::Look(_) => String::new(),
        HirKind::Literal(lit) => String::from_utf8_lossy(&lit.0).into_owned(),
        HirKind::Class(Class::Unicode(class)) => {
            let ranges = class.ranges();
            let preferred = ['a', 'A', '0'];
            preferred
                .into_iter()
                .find(|c| ranges.iter().any(|r| r.start() <= *c && *c <= r.end()))
                .or_else(|| ranges.iter().flat_map(|r| [r.start(), r.end()]).find(|c| !c.is_control()))
                .map(String::from)
                .unwrap_or_default()
        }
        HirKind::Class(Class::Bytes(class)) => class
            .ranges()
            .iter()
            .map(|r| r.start())
            .find(u8::is_ascii_graphic)
            .map(|b| (b as char).to_string())
            .unwrap_or_default(),
        HirKind::Repetition(rep) => {
            let mut count = rep.min.saturating_add(extra);
            if let Some(max) = rep.max {
                count = count.min(max);
            }
            generate(&rep.sub, extra).repeat(count as usize)
        }
        HirKind::Capture(cap) => generate(&cap.sub, extra),
        HirKind::Concat(parts) => parts.iter().map(|p| generate(p, extra)).collect(),
        HirKind::Alternation(alts) => alts.first().map(|a| generate(a, extra)).unwrap_or_default(),
    }
}
