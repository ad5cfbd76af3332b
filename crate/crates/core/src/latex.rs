//! Minimal LaTeX source scanning: enough to locate preamble landmarks while
//! ignoring commented-out text.

pub(crate) const BEGIN_DOCUMENT: &str = r"\begin{document}";

/// Byte offsets of `needle` in `source`, skipping any occurrence that sits
/// after an unescaped `%` on its line.
pub(crate) fn find_uncommented(source: &str, needle: &str) -> Vec<usize> {
    let mut hits = Vec::new();
    let mut line_start = 0;
    for line in source.split_inclusive('\n') {
        let live = &line[..comment_start(line)];
        let mut from = 0;
        while let Some(pos) = live[from..].find(needle) {
            let at = from + pos;
            if is_command_boundary(live, at + needle.len(), needle) {
                hits.push(line_start + at);
            }
            from = at + needle.len();
        }
        line_start += line.len();
    }
    hits
}

/// Rejects prefix matches such as `\documentclassfoo` for control words.
fn is_command_boundary(line: &str, end: usize, needle: &str) -> bool {
    let word_like =
        needle.starts_with('\\') && needle[1..].chars().all(|c| c.is_ascii_alphabetic());
    if !word_like {
        return true;
    }
    !line[end..]
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic())
}

fn comment_start(line: &str) -> usize {
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'%' => return i,
            _ => i += 1,
        }
    }
    line.len()
}

pub(crate) fn begin_document_offset(source: &str) -> Option<usize> {
    find_uncommented(source, BEGIN_DOCUMENT).first().copied()
}

/// Whether `directive` already appears, uncommented, before `\begin{document}`.
pub(crate) fn preamble_contains(source: &str, directive: &str) -> bool {
    let end = begin_document_offset(source).unwrap_or(source.len());
    find_uncommented(&source[..end], directive)
        .into_iter()
        .next()
        .is_some()
}
