//! CSV, JSON and SVG writers. Every writer is deterministic: same input,
//! same bytes.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use flagchart::chart::Frame;
use flagchart::limitset::LimitSample;
use serde::Serialize;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `x0 .. x{n+1}` are the unit representative in the `(e, f, V')` basis.
pub fn write_limit_set_csv(path: &Path, sample: &LimitSample) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let dim = sample.points.first().map_or(0, |p| p.dim());
    let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    header.push("word_len".into());
    header.push("word".into());
    w.write_record(&header)?;
    for ((p, len), word) in sample.points.iter().zip(&sample.word_len).zip(&sample.words) {
        let mut row: Vec<String> = p.rep().iter().map(|x| format!("{x:?}")).collect();
        row.push(len.to_string());
        row.push(word.clone());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Planar picture of `Q_L − {L}` for `n = 3`. A point `span(αe + w)` with
/// `w = s·(cos θ, sin θ, 1)` is drawn at `exp(α/s)·(cos θ, sin θ)`: the
/// circle `E` of the trivial cocycle becomes the unit circle, and the
/// offset `α/s` is the radial log-coordinate.
pub fn planar_projection(frame: &Frame, sample: &LimitSample) -> Vec<[f64; 2]> {
    let space = frame.space();
    sample
        .points
        .iter()
        .map(|p| {
            let rep = p.rep();
            let alpha = space.bilinear(frame.f(), rep);
            let w = frame.v_to_vprime(rep);
            let s = w[2];
            let r = (alpha / s).exp();
            let (x, y) = (w[0] / s, w[1] / s);
            let norm = x.hypot(y);
            [r * x / norm, r * y / norm]
        })
        .collect()
}

pub fn write_planar_csv(path: &Path, points: &[[f64; 2]], word_len: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["x", "y", "word_len"])?;
    for (p, len) in points.iter().zip(word_len) {
        w.write_record([format!("{:?}", p[0]), format!("{:?}", p[1]), len.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Scatter plot of the planar projection, shaded by word length.
pub fn write_svg(path: &Path, points: &[[f64; 2]], word_len: &[usize]) -> Result<()> {
    const SIZE: f64 = 800.0;
    const PAD: f64 = 20.0;
    let extent = points.iter().flat_map(|p| [p[0].abs(), p[1].abs()]).fold(1.0, f64::max) * 1.05;
    let max_len = word_len.iter().copied().max().unwrap_or(1).max(1);
    let scale = (SIZE / 2.0 - PAD) / extent;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )?;
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    let c = SIZE / 2.0;
    writeln!(
        svg,
        r##"<circle cx="{c}" cy="{c}" r="{:.3}" fill="none" stroke="#bbbbbb" stroke-dasharray="4 4"/>"##,
        scale
    )?;
    for (p, &len) in points.iter().zip(word_len) {
        let shade = 200 - (160 * len / max_len) as i64;
        writeln!(
            svg,
            r#"<circle cx="{:.3}" cy="{:.3}" r="1.2" fill="rgb({shade},{shade},255)"/>"#,
            c + p[0] * scale,
            c - p[1] * scale
        )?;
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}
