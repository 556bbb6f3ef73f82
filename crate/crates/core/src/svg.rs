//! Minimal direct SVG emitters for the three figure kinds the experiments
//! produce: log-log convergence plots, field-magnitude heatmaps, and truss
//! layouts with bar widths proportional to `|w|`.
//!
//! Everything is written as plain paths and rects with pinned `{:.2}`/
//! `{:.3}` coordinate formatting, so figures are byte-reproducible and need
//! no plotting dependency.

use crate::truss::{GroundStructure, TrussDesign};
use crate::{Error, Result};
use std::fmt::Write as _;

/// Canvas width of the plot figures, px.
const PLOT_W: f64 = 560.0;
/// Canvas height of the plot figures, px.
const PLOT_H: f64 = 400.0;
/// Margins: left, right, top, bottom.
const MARGIN: [f64; 4] = [64.0, 16.0, 28.0, 44.0];
/// Series stroke colors, cycled.
const PALETTE: [&str; 4] = ["#1f5fa8", "#c23b22", "#3a7d44", "#7b4fa6"];
/// Heatmaps are block-averaged down to at most this many cells per axis.
const HEATMAP_MAX: usize = 128;

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" \
         viewBox=\"0 0 {w:.0} {h:.0}\">"
    );
    let _ = writeln!(out, "<rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>");
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, size: f64, s: &str) {
    let _ = writeln!(
        out,
        "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" \
         font-family=\"sans-serif\" font-size=\"{size:.0}\" fill=\"#222\">{}</text>",
        xml_escape(s)
    );
}

/// A named polyline for [`plot_loglog`].
#[derive(Debug, Clone)]
pub struct Series {
    /// Legend label.
    pub label: String,
    /// `(x, y)` pairs; only strictly positive pairs are drawable on log
    /// axes, the rest are dropped.
    pub points: Vec<(f64, f64)>,
}

/// Render a log-log plot (decade grid on both axes) of one or more series.
///
/// Nonpositive or nonfinite points are silently dropped — they have no
/// place on a log axis. Intended for gap-vs-λ convergence figures.
///
/// # Errors
/// No series contains a drawable point.
pub fn plot_loglog(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> Result<String> {
    let drawable: Vec<(usize, Vec<(f64, f64)>)> = series
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .copied()
                .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
                .collect();
            (k, pts)
        })
        .filter(|(_, p)| !p.is_empty())
        .collect();
    if drawable.is_empty() {
        return Err(Error::InvalidInput(
            "log-log plot needs at least one positive finite point".into(),
        ));
    }
    let (mut x0, mut x1, mut y0, mut y1) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (_, pts) in &drawable {
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    // expand to whole decades so the grid is meaningful
    let (dx0, dx1) = (x0.log10().floor(), x1.log10().ceil().max(x0.log10().floor() + 1.0));
    let (dy0, dy1) = (y0.log10().floor(), y1.log10().ceil().max(y0.log10().floor() + 1.0));
    let (px0, px1) = (MARGIN[0], PLOT_W - MARGIN[1]);
    let (py0, py1) = (PLOT_H - MARGIN[3], MARGIN[2]);
    let sx = |x: f64| px0 + (x.log10() - dx0) / (dx1 - dx0) * (px1 - px0);
    let sy = |y: f64| py0 + (y.log10() - dy0) / (dy1 - dy0) * (py1 - py0);

    let mut out = String::new();
    svg_open(&mut out, PLOT_W, PLOT_H);
    // decade grid + tick labels
    let mut d = dx0;
    while d <= dx1 + 0.5 {
        let x = px0 + (d - dx0) / (dx1 - dx0) * (px1 - px0);
        let _ = writeln!(
            out,
            "<line x1=\"{x:.1}\" y1=\"{py0:.1}\" x2=\"{x:.1}\" y2=\"{py1:.1}\" \
             stroke=\"#ddd\" stroke-width=\"1\"/>"
        );
        text(&mut out, x, py0 + 16.0, "middle", 11.0, &format!("1e{}", d as i64));
        d += 1.0;
    }
    let mut d = dy0;
    while d <= dy1 + 0.5 {
        let y = py0 + (d - dy0) / (dy1 - dy0) * (py1 - py0);
        let _ = writeln!(
            out,
            "<line x1=\"{px0:.1}\" y1=\"{y:.1}\" x2=\"{px1:.1}\" y2=\"{y:.1}\" \
             stroke=\"#ddd\" stroke-width=\"1\"/>"
        );
        text(&mut out, px0 - 6.0, y + 4.0, "end", 11.0, &format!("1e{}", d as i64));
        d += 1.0;
    }
    // frame
    let _ = writeln!(
        out,
        "<rect x=\"{px0:.1}\" y=\"{py1:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>",
        px1 - px0,
        py0 - py1
    );
    // series
    for (k, pts) in &drawable {
        let color = PALETTE[k % PALETTE.len()];
        let mut path = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(path, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, sx(x), sy(y));
        }
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>",
            path.trim_end()
        );
        for &(x, y) in pts {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                sx(x),
                sy(y)
            );
        }
        // legend entry
        let ly = py1 + 14.0 + 16.0 * *k as f64;
        let _ = writeln!(
            out,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>",
            px0 + 8.0,
            px0 + 28.0
        );
        text(&mut out, px0 + 34.0, ly + 4.0, "start", 11.0, &series[*k].label);
    }
    text(&mut out, (px0 + px1) / 2.0, 18.0, "middle", 13.0, title);
    text(&mut out, (px0 + px1) / 2.0, PLOT_H - 8.0, "middle", 12.0, xlabel);
    let _ = writeln!(
        out,
        "<text x=\"14\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"12\" fill=\"#222\" transform=\"rotate(-90 14 {:.1})\">{}</text>",
        (py0 + py1) / 2.0,
        (py0 + py1) / 2.0,
        xml_escape(ylabel)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

/// Two-stop white → deep-blue ramp for normalized magnitudes in `[0,1]`.
fn ramp(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    (lerp(255.0, 18.0), lerp(255.0, 48.0), lerp(255.0, 112.0))
}

/// Render a cell-valued scalar field (row-major, `values[j*nx + i]`, row 0
/// at the bottom) as a rect-per-block heatmap. Grids beyond
/// [`HEATMAP_MAX`] cells per axis are block-averaged down first, keeping
/// the file size bounded.
///
/// # Errors
/// Dimension mismatch or empty field.
pub fn heatmap(title: &str, values: &[f64], nx: usize, ny: usize) -> Result<String> {
    if nx == 0 || ny == 0 || values.len() != nx * ny {
        return Err(Error::InvalidInput(format!(
            "heatmap needs nx*ny = len, got {nx}x{ny} vs {}",
            values.len()
        )));
    }
    // block-average downsample
    let bx = nx.div_ceil(HEATMAP_MAX);
    let by = ny.div_ceil(HEATMAP_MAX);
    let (mx, my) = (nx.div_ceil(bx), ny.div_ceil(by));
    let mut blocks = vec![0.0f64; mx * my];
    for jj in 0..my {
        for ii in 0..mx {
            let (mut acc, mut cnt) = (0.0, 0usize);
            for j in jj * by..((jj + 1) * by).min(ny) {
                for i in ii * bx..((ii + 1) * bx).min(nx) {
                    acc += values[j * nx + i];
                    cnt += 1;
                }
            }
            blocks[jj * mx + ii] = acc / cnt.max(1) as f64;
        }
    }
    let vmax = blocks.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let scale = if vmax > 0.0 { 1.0 / vmax } else { 0.0 };

    let side = 480.0;
    let cell = (side / mx.max(my) as f64).max(1.0);
    let (w, h) = (cell * mx as f64, cell * my as f64);
    let (top, bottom) = (30.0, 12.0);
    let mut out = String::new();
    svg_open(&mut out, w, h + top + bottom);
    text(&mut out, w / 2.0, 19.0, "middle", 13.0, title);
    for jj in 0..my {
        for ii in 0..mx {
            let v = blocks[jj * mx + ii].abs() * scale;
            let (r, g, b) = ramp(v);
            // row 0 of the field sits at the bottom of the image
            let y = top + (my - 1 - jj) as f64 * cell;
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"{cell:.2}\" height=\"{cell:.2}\" \
                 fill=\"rgb({r},{g},{b})\"/>",
                ii as f64 * cell
            );
        }
    }
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"{top}\" width=\"{w:.1}\" height=\"{h:.1}\" \
         fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>"
    );
    text(&mut out, 4.0, top + h + 10.0, "start", 10.0, &format!("max |value| = {vmax:.6e}"));
    out.push_str("</svg>\n");
    Ok(out)
}

/// Render a truss design: bars drawn with stroke width proportional to
/// `|w|` (zero-strength bars as faint hairlines), supports as filled
/// squares, other nodes as dots.
///
/// # Errors
/// Design length mismatch.
pub fn truss_figure(title: &str, gs: &GroundStructure, design: &TrussDesign) -> Result<String> {
    if design.w.len() != gs.bars.len() {
        return Err(Error::InvalidInput(format!(
            "design has {} strengths for {} bars",
            design.w.len(),
            gs.bars.len()
        )));
    }
    let (mut x0, mut x1, mut y0, mut y1) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &gs.nodes {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let side = 480.0;
    let margin = 40.0;
    let s = (side - 2.0 * margin) / span;
    let (w, h) = ((x1 - x0) * s + 2.0 * margin, (y1 - y0) * s + 2.0 * margin + 20.0);
    let px = |x: f64| margin + (x - x0) * s;
    let py = |y: f64| h - margin - (y - y0) * s; // y up

    let wmax = design.w.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let mut out = String::new();
    svg_open(&mut out, w, h);
    text(&mut out, w / 2.0, 19.0, "middle", 13.0, title);
    for (b, &(i, j)) in gs.bars.iter().enumerate() {
        let (pi, pj) = (gs.nodes[i], gs.nodes[j]);
        let wa = design.w[b].abs();
        let (stroke, width) = if wmax > 0.0 && wa > 1e-12 * wmax {
            // tension blue, compression red
            let c = if design.w[b] >= 0.0 { "#1f5fa8" } else { "#c23b22" };
            (c, 1.0 + 9.0 * wa / wmax)
        } else {
            ("#cccccc", 0.6)
        };
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
             stroke=\"{stroke}\" stroke-width=\"{width:.2}\" stroke-linecap=\"round\"/>",
            px(pi[0]),
            py(pi[1]),
            px(pj[0]),
            py(pj[1])
        );
    }
    for (n, p) in gs.nodes.iter().enumerate() {
        if gs.is_support(n) {
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"9\" height=\"9\" fill=\"#222\"/>",
                px(p[0]) - 4.5,
                py(p[1]) - 4.5
            );
        } else {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.2\" fill=\"#222\"/>",
                px(p[0]),
                py(p[1])
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
