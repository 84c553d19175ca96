use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::levelset::LevelSetField;
use crate::scalar::Scalar;

/// Vertices `(x, y)` with `x` = column and `y` = row, in pixel units.
/// Closed curves repeat their first vertex at the end.
pub type Polyline = Vec<(f64, f64)>;

fn h_edge(w: usize, r: usize, c: usize) -> usize {
    (r * w + c) * 2
}

fn v_edge(w: usize, r: usize, c: usize) -> usize {
    (r * w + c) * 2 + 1
}

/// Extracts the zero level set of `phi` by marching squares. Pixels with
/// `phi < 0` count as inside; saddles are resolved by the cell average.
pub fn contours<T: Scalar>(phi: &LevelSetField<T>) -> Vec<Polyline> {
    let (h, w) = (phi.height(), phi.width());
    let val = |r: usize, c: usize| phi.get(r, c).as_f64();
    let inside = |r: usize, c: usize| val(r, c) < 0.0;

    let mut points: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    let crossing = |r0: usize, c0: usize, r1: usize, c1: usize| {
        let (a, b) = (val(r0, c0), val(r1, c1));
        let t = a / (a - b);
        let x = c0 as f64 + t * (c1 as f64 - c0 as f64);
        let y = r0 as f64 + t * (r1 as f64 - r0 as f64);
        (x, y)
    };
    for r in 0..h {
        for c in 0..w {
            if c + 1 < w && inside(r, c) != inside(r, c + 1) {
                points.insert(h_edge(w, r, c), crossing(r, c, r, c + 1));
            }
            if r + 1 < h && inside(r, c) != inside(r + 1, c) {
                points.insert(v_edge(w, r, c), crossing(r, c, r + 1, c));
            }
        }
    }

    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut link = |a: usize, b: usize| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for r in 0..h.saturating_sub(1) {
        for c in 0..w.saturating_sub(1) {
            let top = h_edge(w, r, c);
            let right = v_edge(w, r, c + 1);
            let bottom = h_edge(w, r + 1, c);
            let left = v_edge(w, r, c);
            let cut: Vec<usize> = [top, right, bottom, left]
                .into_iter()
                .filter(|e| points.contains_key(e))
                .collect();
            match cut.len() {
                2 => link(cut[0], cut[1]),
                4 => {
                    let center = (val(r, c) + val(r, c + 1) + val(r + 1, c) + val(r + 1, c + 1)) / 4.0;
                    if (center < 0.0) == inside(r, c) {
                        link(top, right);
                        link(bottom, left);
                    } else {
                        link(left, top);
                        link(right, bottom);
                    }
                }
                _ => {}
            }
        }
    }

    let mut visited = std::collections::BTreeSet::new();
    let mut lines = Vec::new();
    let trace = |start: usize, visited: &mut std::collections::BTreeSet<usize>| {
        let mut line = vec![points[&start]];
        visited.insert(start);
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let next = adj
                .get(&cur)
                .into_iter()
                .flatten()
                .copied()
                .find(|&n| n != prev && !visited.contains(&n));
            match next {
                Some(n) => {
                    visited.insert(n);
                    line.push(points[&n]);
                    prev = cur;
                    cur = n;
                }
                None => {
                    if cur != start && adj.get(&cur).is_some_and(|ns| ns.contains(&start)) {
                        line.push(points[&start]);
                    }
                    break;
                }
            }
        }
        line
    };
    // Open curves end on the image border; trace those first.
    for (&e, ns) in &adj {
        if ns.len() == 1 && !visited.contains(&e) {
            lines.push(trace(e, &mut visited));
        }
    }
    for &e in adj.keys() {
        if !visited.contains(&e) {
            lines.push(trace(e, &mut visited));
        }
    }
    lines
}

/// One `x y` line per vertex, polylines separated by a blank line.
pub fn format_contours(lines: &[Polyline]) -> String {
    let mut s = String::new();
    for (i, line) in lines.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        for &(x, y) in line {
            let _ = writeln!(s, "{x} {y}");
        }
    }
    s
}

pub fn write_contours(lines: &[Polyline], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_contours(lines))?;
    Ok(())
}
