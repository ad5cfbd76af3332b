use super::InduceError;
use crate::latex;

pub const MARKUP_BEGIN: &str = "% figscan box markup: begin";
pub const MARKUP_END: &str = "% figscan box markup: end";

/// Rule thickness of the injected frame, in TeX points.
pub const FRAME_RULE_PT: f64 = 1.5;

/// Frame stroke in pixels at `dpi`, rounded to the nearest pixel (at least 1).
pub fn frame_stroke_px(dpi: u32) -> u32 {
    ((FRAME_RULE_PT * dpi as f64 / 72.27).round() as u32).max(1)
}

// Draws a rule frame over every float box after it is built. The frame is
// an overlay of zero width and unchanged height and depth, so float
// placement and pagination are the same as in the plain compile. Its outer
// edge sits one rule width outside the float box.
const MARKUP_BODY: &str = r"\chardef\figscanatcode=\catcode`\@
\catcode`\@=11
\newdimen\figscan@rule
\figscan@rule=1.5pt
\let\figscan@endfloatbox\@endfloatbox
\def\@endfloatbox{\figscan@endfloatbox\figscan@frame}
\def\figscan@frame{%
  \global\setbox\@currbox\vbox{\hbox{%
    \dimen@\wd\@currbox \advance\dimen@ 2\figscan@rule
    \dimen@ii\ht\@currbox \advance\dimen@ii\dp\@currbox
    \raise\ht\@currbox\rlap{\kern-\figscan@rule\vbox to\z@{%
      \kern-\figscan@rule
      \hrule\@width\dimen@\@height\figscan@rule
      \hbox to\dimen@{\vrule\@width\figscan@rule\@height\dimen@ii\hfil
        \vrule\@width\figscan@rule\@height\dimen@ii}%
      \hrule\@width\dimen@\@height\figscan@rule
      \vss}}%
    \box\@currbox}}}
\catcode`\@=\figscanatcode
";

/// Inserts the frame-drawing block immediately before `\begin{document}`.
/// A source that already carries the block is returned unchanged.
pub fn inject_box_markup(source: &str) -> Result<String, InduceError> {
    if source.contains(MARKUP_BEGIN) {
        return Ok(source.to_string());
    }
    if latex::find_uncommented(source, r"\documentclass").is_empty() {
        return Err(InduceError::Preamble(r"no \documentclass found".into()));
    }
    let at = latex::begin_document_offset(source)
        .ok_or_else(|| InduceError::Preamble(r"no \begin{document} found".into()))?;
    let mut out = String::with_capacity(source.len() + MARKUP_BODY.len() + 80);
    out.push_str(&source[..at]);
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    out.push_str(MARKUP_BEGIN);
    out.push('\n');
    out.push_str(MARKUP_BODY);
    out.push_str(MARKUP_END);
    out.push('\n');
    out.push_str(&source[at..]);
    Ok(out)
}
