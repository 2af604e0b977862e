//! SVG picture of a parallel slit domain.
//!
//! Columns are numbered `0..=q` from right to left and rows `0..=p` from bottom
//! to top. In column `i` the upper edge of rectangle `(i, j)` is glued to the
//! lower edge of rectangle `(i, σ_i(j))`; wherever that is not the rectangle
//! directly above, both edges are drawn as slits carrying the same letter.

use std::collections::BTreeSet;
use std::fmt::Write;

use anyhow::{bail, Context, Result};
use slit_core::cells::HomCell;
use slit_core::perm::Permutation;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;

fn coordinates(given: Option<&[f64]>, n: usize, name: &str) -> Result<Vec<f64>> {
    let Some(v) = given else {
        return Ok(vec![1.0 / n as f64; n]);
    };
    if v.len() != n {
        bail!("--{name} needs {n} barycentric coordinates, got {}", v.len());
    }
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        bail!("--{name} coordinates must be non-negative");
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        bail!("--{name} coordinates sum to {sum}, not 1");
    }
    Ok(v.to_vec())
}

fn letter(k: usize) -> String {
    let base = char::from(b'A' + (k % 26) as u8);
    if k < 26 {
        base.to_string()
    } else {
        format!("{base}{}", k / 26)
    }
}

/// Renders `cell_text` with row heights `a` and column widths `b`.
pub fn render_cell(cell_text: &str, a: Option<&[f64]>, b: Option<&[f64]>) -> Result<String> {
    let cell: HomCell = cell_text.parse().context("parsing --cell")?;
    let (p, q) = (cell.p(), cell.q());
    if cell.sigma(0) != Permutation::rotation(p) {
        bail!("degenerate cell: the rightmost column must glue every rectangle to the one above (σ_0 = ω)");
    }
    if let Some(i) = (0..=q).find(|&i| cell.sigma(i).apply(p) != 0) {
        bail!("degenerate cell: σ_{i} does not send the top row {p} to 0, so the picture has no point at infinity");
    }
    let heights = coordinates(a, p + 1, "a")?;
    let widths = coordinates(b, q + 1, "b")?;
    // x of the left edge of column i; columns run q, …, 0 from the left
    let col_left = |i: usize| MARGIN + widths[i + 1..].iter().sum::<f64>() * WIDTH;
    let col_right = |i: usize| col_left(i) + widths[i] * WIDTH;
    // y of horizontal line k, the lower edge of row k
    let line_y = |k: usize| MARGIN + HEIGHT - heights[..k].iter().sum::<f64>() * HEIGHT;

    let mut svg = String::new();
    let (w, h) = (WIDTH + 2.0 * MARGIN, HEIGHT + 2.0 * MARGIN + 20.0);
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    )?;
    writeln!(svg, r#"<rect x="0" y="0" width="{w:.0}" height="{h:.0}" fill="white"/>"#)?;
    writeln!(svg, r##"<g stroke="#bbbbbb" stroke-width="1" stroke-dasharray="4 3" fill="none">"##)?;
    for i in 0..q {
        let x = col_left(i);
        writeln!(svg, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#, MARGIN, MARGIN + HEIGHT)?;
    }
    for k in 1..=p {
        let y = line_y(k);
        writeln!(svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, MARGIN, MARGIN + WIDTH)?;
    }
    writeln!(svg, "</g>")?;

    let mut slits: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut labels = String::new();
    let mut next = 0;
    for i in (0..=q).rev() {
        let sigma = cell.sigma(i);
        let cx = (col_left(i) + col_right(i)) / 2.0;
        for j in 0..p {
            let target = sigma.apply(j);
            if target == j + 1 {
                continue;
            }
            let name = letter(next);
            next += 1;
            slits.insert((i, j + 1));
            slits.insert((i, target));
            writeln!(
                labels,
                r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{name}</text>"#,
                line_y(j + 1) + 13.0
            )?;
            writeln!(
                labels,
                r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{name}</text>"#,
                line_y(target) - 4.0
            )?;
        }
    }
    writeln!(svg, r#"<g stroke="black" stroke-width="3">"#)?;
    for &(i, k) in &slits {
        let y = line_y(k);
        writeln!(svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, col_left(i), col_right(i))?;
    }
    writeln!(svg, "</g>")?;
    writeln!(svg, r#"<g font-family="sans-serif" font-size="11" fill="black">"#)?;
    svg.push_str(&labels);
    writeln!(svg, "</g>")?;

    writeln!(svg, r##"<g font-family="sans-serif" font-size="9" fill="#888888" text-anchor="middle">"##)?;
    for i in 0..=q {
        let cx = (col_left(i) + col_right(i)) / 2.0;
        for j in 0..=p {
            let cy = (line_y(j) + line_y(j + 1)) / 2.0 + 3.0;
            writeln!(svg, r#"<text x="{cx:.2}" y="{cy:.2}">{i}{j}</text>"#)?;
        }
        writeln!(svg, r#"<text x="{cx:.2}" y="{:.2}">σ{i}</text>"#, MARGIN + HEIGHT + 16.0)?;
    }
    writeln!(svg, "</g>")?;
    writeln!(
        svg,
        r#"<text x="{MARGIN}" y="{:.2}" font-family="monospace" font-size="11">{}</text>"#,
        h - 6.0,
        cell.to_text()
    )?;
    writeln!(svg, "</svg>")?;
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = "4 2 : 3,4,1,2,0 ; 1,4,3,2,0 ; 1,2,3,4,0";

    #[test]
    fn slit_count_of_torus_cell() {
        let svg = render_cell(TORUS, None, None).unwrap();
        let thick = svg.split(r#"<g stroke="black""#).nth(1).unwrap().split("</g>").next().unwrap();
        assert_eq!(thick.matches("<line").count(), 6);
        assert_eq!(svg, render_cell(TORUS, None, None).unwrap());
    }

    #[test]
    fn plane_without_slits() {
        let svg = render_cell("2 0 : 1,2,0", None, None).unwrap();
        let thick = svg.split(r#"<g stroke="black""#).nth(1).unwrap().split("</g>").next().unwrap();
        assert_eq!(thick.matches("<line").count(), 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(render_cell("2 1 : 2,0,1 ; 2,0,1", None, None).is_err());
        assert!(render_cell(TORUS, Some(&[0.5, 0.5]), None).is_err());
        assert!(render_cell(TORUS, None, Some(&[0.2, 0.2, 0.2])).is_err());
    }
}
