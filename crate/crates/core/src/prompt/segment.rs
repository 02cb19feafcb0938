use indexmap::IndexMap;

use super::{PromptError, Segment, SegmentPlan};
use crate::tsl::TslDocument;

/// Groups cases by `group` in first-appearance order, then splits groups
/// larger than `max_cases_per_segment` into consecutive chunks.
pub fn plan_segments(doc: &TslDocument, max_cases_per_segment: usize) -> Result<SegmentPlan, PromptError> {
    if doc.is_empty() {
        return Err(PromptError::EmptyDocument);
    }
    let cap = max_cases_per_segment.max(1);
    let mut groups: IndexMap<&str, Vec<String>> = IndexMap::new();
    for case in &doc.cases {
        groups.entry(case.group.as_str()).or_default().push(case.id.clone());
    }
    let segments = groups
        .into_iter()
        .flat_map(|(group, ids)| {
            ids.chunks(cap)
                .map(|chunk| Segment { group: group.to_string(), case_ids: chunk.to_vec() })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(SegmentPlan { segments })
}
