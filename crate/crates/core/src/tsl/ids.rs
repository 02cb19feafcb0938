//! Case-id occurrences in free text.
//!
//! An occurrence counts only when the neighbouring characters are not ASCII
//! alphanumerics, so `TC1` is not found inside `TC10` while
//! `TC101_Login_...` still contains `TC101`.

pub fn id_positions(text: &str, id: &str) -> Vec<usize> {
    if id.is_empty() {
        return Vec::new();
    }
    let bytes = text.as_bytes();
    text.match_indices(id)
        .map(|(at, _)| at)
        .filter(|&at| {
            let before = at.checked_sub(1).map(|i| bytes[i]);
            let after = bytes.get(at + id.len()).copied();
            !before.is_some_and(|b| b.is_ascii_alphanumeric()) && !after.is_some_and(|b| b.is_ascii_alphanumeric())
        })
        .collect()
}

pub fn contains_id(text: &str, id: &str) -> bool {
    !id_positions(text, id).is_empty()
}
