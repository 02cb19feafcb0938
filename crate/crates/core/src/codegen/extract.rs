use serde::{Deserialize, Serialize};

use super::{file_stem, CodegenError, TestFile};
use crate::gateway::Completion;
use crate::prompt::Segment;
use crate::tsl::{contains_id, id_positions};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub blocks_found: usize,
    pub blocks_used: usize,
    pub discarded_reasons: Vec<String>,
}

/// Pulls test code for `segment` out of a completion.
///
/// Fenced blocks are preferred. Without fences the whole text is used when it
/// is all code; otherwise the largest contiguous code run holding a case id.
/// Each case id is assigned to the block carrying its longest identifier, so
/// a block that merely mentions an id does not claim it.
pub fn extract_test_code(
    completion: &Completion,
    segment: &Segment,
) -> Result<(Vec<TestFile>, ExtractionReport), CodegenError> {
    if completion.truncated {
        return Err(CodegenError::TruncatedCompletion);
    }
    let mut report = ExtractionReport::default();
    let fenced = fenced_blocks(&completion.content, &mut report.discarded_reasons);
    let blocks = if fenced.is_empty() {
        unfenced_block(&completion.content, &segment.case_ids, &mut report.discarded_reasons).into_iter().collect()
    } else {
        fenced
    };
    report.blocks_found = blocks.len();

    let mut owners: Vec<Vec<String>> = vec![Vec::new(); blocks.len()];
    let mut missing = Vec::new();
    for id in &segment.case_ids {
        let best = blocks
            .iter()
            .enumerate()
            .filter_map(|(i, b)| longest_identifier(b, id).map(|name| (i, name.len())))
            .fold(None::<(usize, usize)>, |best, (i, len)| match best {
                Some((_, l)) if l >= len => best,
                _ => Some((i, len)),
            });
        match best {
            Some((i, _)) => owners[i].push(id.clone()),
            None => missing.push(id.clone()),
        }
    }

    let stem = file_stem(&segment.group);
    let mut files = Vec::new();
    for (i, (block, case_ids)) in blocks.into_iter().zip(owners).enumerate() {
        if case_ids.is_empty() {
            let reason = if segment.case_ids.iter().any(|id| contains_id(&block, id)) {
                "only mentions case ids owned by another block"
            } else {
                "contains no case id of the segment"
            };
            report.discarded_reasons.push(format!("block {}: {reason}", i + 1));
            continue;
        }
        files.push(TestFile {
            file_name: format!("{stem}{}.tests", files.len() + 1),
            group: segment.group.clone(),
            content: block,
            case_ids,
        });
    }
    report.blocks_used = files.len();

    if files.is_empty() {
        return Err(CodegenError::ExtractionEmpty(report.discarded_reasons.join("; ")));
    }
    if !missing.is_empty() {
        return Err(CodegenError::MissingCases(missing));
    }
    Ok((files, report))
}

/// The longest identifier (letters, digits, `_`) that starts at an
/// occurrence of `id`.
pub fn longest_identifier<'a>(text: &'a str, id: &str) -> Option<&'a str> {
    id_positions(text, id)
        .into_iter()
        .map(|at| {
            let end = text[at..]
                .char_indices()
                .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
                .map_or(text.len(), |(j, _)| at + j);
            &text[at..end]
        })
        .fold(None, |best: Option<&str>, name| match best {
            Some(b) if b.len() >= name.len() => Some(b),
            _ => Some(name),
        })
}

fn fence_of(line: &str) -> Option<(char, usize)> {
    let t = line.trim_start();
    let c = t.chars().next().filter(|c| *c == '`' || *c == '~')?;
    let n = t.chars().take_while(|x| *x == c).count();
    (n >= 3).then_some((c, n))
}

/// Contents of the fenced code blocks in `text`, in order, empty ones
/// dropped.
pub fn code_blocks(text: &str) -> Vec<String> {
    fenced_blocks(text, &mut Vec::new())
}

fn fenced_blocks(text: &str, discarded: &mut Vec<String>) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut open: Option<((char, usize), Vec<&str>)> = None;
    for line in text.lines() {
        match open.take() {
            None => {
                if let Some(fence) = fence_of(line) {
                    open = Some((fence, Vec::new()));
                }
            }
            Some(((c, n), mut body)) => {
                let closes =
                    fence_of(line).is_some_and(|(c2, n2)| c2 == c && n2 >= n) && line.trim().chars().all(|x| x == c);
                if closes {
                    blocks.push(join(&body));
                } else {
                    body.push(line);
                    open = Some(((c, n), body));
                }
            }
        }
    }
    if let Some((_, body)) = open {
        discarded.push("unterminated code fence; kept its content".into());
        blocks.push(join(&body));
    }
    blocks.retain(|b| !b.trim().is_empty());
    blocks
}

fn join(lines: &[&str]) -> String {
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

const CODE_STARTS: [&str; 22] = [
    "//",
    "#",
    "/*",
    "*",
    "[",
    "@",
    "}",
    "{",
    ")",
    "def ",
    "class ",
    "using ",
    "import ",
    "from ",
    "public ",
    "private ",
    "protected ",
    "var ",
    "assert ",
    "return ",
    "await ",
    "namespace ",
];

fn is_code(line: &str) -> bool {
    let raw = line.trim_end();
    if raw.starts_with([' ', '\t']) {
        return true;
    }
    let t = raw.trim();
    CODE_STARTS.iter().any(|p| t.starts_with(p))
        || t.ends_with([';', '{', '}', '(', ')', ',', ':', '[', ']'])
        || t.contains(" = ")
}

fn unfenced_block(text: &str, ids: &[String], discarded: &mut Vec<String>) -> Option<String> {
    if !ids.iter().any(|id| contains_id(text, id)) {
        if !text.trim().is_empty() {
            discarded.push("no code fences and no case id in the text".into());
        }
        return None;
    }
    let lines: Vec<&str> = text.lines().collect();
    if lines.iter().all(|l| l.trim().is_empty() || is_code(l)) {
        return Some(join(&lines).trim_matches('\n').to_string() + "\n");
    }

    // maximal runs of code lines; blank lines do not break a run
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    for (i, line) in lines.iter().enumerate() {
        let blank = line.trim().is_empty();
        match (start, blank || is_code(line)) {
            (None, true) if !blank => start = Some(i),
            (Some(s), false) => {
                runs.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, lines.len()));
    }
    let best = runs
        .into_iter()
        .map(|(s, e)| {
            let mut e = e;
            while e > s && lines[e - 1].trim().is_empty() {
                e -= 1;
            }
            (s, e)
        })
        .filter(|(s, e)| {
            let chunk = lines[*s..*e].join("\n");
            ids.iter().any(|id| contains_id(&chunk, id))
        })
        .fold(None::<(usize, usize)>, |best, (s, e)| match best {
            Some((bs, be)) if be - bs >= e - s => best,
            _ => Some((s, e)),
        });
    match best {
        Some((s, e)) => {
            let dropped = lines.len() - (e - s);
            discarded.push(format!("no code fences; kept lines {}-{}, dropped {dropped} other lines", s + 1, e));
            Some(join(&lines[s..e]))
        }
        None => {
            discarded.push("no code fences and no code run holding a case id".into());
            None
        }
    }
}
