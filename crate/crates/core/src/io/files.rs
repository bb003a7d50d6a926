//! Line-oriented formats for surgery descriptions and piece covers.

use thiserror::Error;

use crate::cover::{BoundaryRef, Piece, PieceCover};
use crate::surgery::{BaseSpace, Filling, LinkComponent, Slope, SurgeryDescription};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FileError {
    pub line: usize,
    pub message: String,
}

/// Parse a surgery description:
///
/// ```text
/// base S2~S1
/// component k1 torus 3/4
/// component k2 kleinbottle
/// bpt 1
/// ```
pub fn parse_surgery(text: &str) -> Result<SurgeryDescription, FileError> {
    let mut base: Option<BaseSpace> = None;
    let mut components = Vec::new();
    let mut bpt_sites = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fail = |message: String| FileError { line, message };
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        match words.as_slice() {
            ["base", b] => {
                base = Some(match *b {
                    "S3" => BaseSpace::S3,
                    "S2~S1" => BaseSpace::S2TwistS1,
                    other => return Err(fail(format!("unknown base `{other}`"))),
                });
            }
            ["component", id, "torus", slope] => {
                let (p, q) = slope
                    .split_once('/')
                    .ok_or_else(|| fail(format!("bad slope `{slope}`, expected p/q")))?;
                let p: i64 = p.parse().map_err(|_| fail(format!("bad slope `{slope}`")))?;
                let q: i64 = q.parse().map_err(|_| fail(format!("bad slope `{slope}`")))?;
                let slope = Slope::new(p, q).map_err(|e| fail(e.to_string()))?;
                components.push(LinkComponent {
                    id: id.to_string(),
                    filling: Filling::SolidTorus(slope),
                });
            }
            ["component", id, "kleinbottle"] => {
                components.push(LinkComponent {
                    id: id.to_string(),
                    filling: Filling::SolidKleinBottle,
                });
            }
            ["bpt", n] => {
                bpt_sites = n.parse().map_err(|_| fail(format!("bad bpt count `{n}`")))?;
            }
            _ => return Err(fail(format!("unrecognized line `{content}`"))),
        }
    }

    let base = base.ok_or(FileError { line: 0, message: "missing `base` line".to_string() })?;
    Ok(SurgeryDescription { base, components, bpt_sites })
}

/// Parse a piece-cover description:
///
/// ```text
/// piece Dhat_a sheets 1 over Dhat
/// piece Dhat_b sheets 1 over Dhat
/// piece K1xI sheets 2
/// match Dhat_a.k K1xI.k0
/// match Dhat_b.k K1xI.k1
/// ```
///
/// `over <base>` defaults to the piece's own name.
pub fn parse_piece_cover(text: &str) -> Result<PieceCover, FileError> {
    let mut cover = PieceCover::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fail = |message: String| FileError { line, message };
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        match words.as_slice() {
            ["piece", name, "sheets", n] | ["piece", name, "sheets", n, "over", _] => {
                let sheets: u8 = n.parse().map_err(|_| fail(format!("bad sheet count `{n}`")))?;
                let base = match words.as_slice() {
                    [_, _, _, _, "over", base] => base.to_string(),
                    _ => name.to_string(),
                };
                cover.pieces.push(Piece { name: name.to_string(), sheets, base });
            }
            ["match", a, b] => {
                let parse_ref = |s: &str| -> Result<BoundaryRef, FileError> {
                    let (piece, boundary) = s.split_once('.').ok_or_else(|| {
                        fail(format!("bad boundary reference `{s}`, expected piece.boundary"))
                    })?;
                    Ok(BoundaryRef { piece: piece.to_string(), boundary: boundary.to_string() })
                };
                cover.matchings.push((parse_ref(a)?, parse_ref(b)?));
            }
            _ => return Err(fail(format!("unrecognized line `{content}`"))),
        }
    }
    Ok(cover)
}
