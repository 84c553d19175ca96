//! Plain scalar Chan-Vese and geodesic active contours on `f64` grids.
//!
//! Written against the classical formulas: `(I - c)^2` data terms with
//! arithmetic region means and `|grad I|` edge detection. Discretization
//! constants match the library defaults.

pub struct Grid {
    pub h: usize,
    pub w: usize,
    pub v: Vec<f64>,
}

impl Grid {
    pub fn new(h: usize, w: usize, v: Vec<f64>) -> Self {
        assert_eq!(v.len(), h * w);
        Self { h, w, v }
    }

    fn at(&self, r: isize, c: isize) -> f64 {
        let (h, w) = (self.h as isize, self.w as isize);
        if r < 0 {
            return 2.0 * self.at(0, c) - self.at(1, c);
        }
        if r >= h {
            return 2.0 * self.at(h - 1, c) - self.at(h - 2, c);
        }
        if c < 0 {
            return 2.0 * self.at(r, 0) - self.at(r, 1);
        }
        if c >= w {
            return 2.0 * self.at(r, w - 1) - self.at(r, w - 2);
        }
        self.v[(r * w + c) as usize]
    }

    pub fn mask(&self) -> Vec<bool> {
        self.v.iter().map(|&x| x < 0.0).collect()
    }
}

const EPS: f64 = 1.5;
const FLOOR: f64 = 1e-8;

fn delta(x: f64) -> f64 {
    EPS / (std::f64::consts::PI * (EPS * EPS + x * x))
}

fn kappa(p: &Grid, r: isize, c: isize) -> f64 {
    let f = |a: f64, b: f64| a / (a * a + b * b).sqrt().max(FLOOR);
    let q = |dr: isize, dc: isize| p.at(r + dr, c + dc);
    let east = f(q(0, 1) - q(0, 0), (q(1, 0) - q(-1, 0) + q(1, 1) - q(-1, 1)) / 4.0);
    let west = f(q(0, 0) - q(0, -1), (q(1, -1) - q(-1, -1) + q(1, 0) - q(-1, 0)) / 4.0);
    let south = f(q(1, 0) - q(0, 0), (q(0, 1) - q(0, -1) + q(1, 1) - q(1, -1)) / 4.0);
    let north = f(q(0, 0) - q(-1, 0), (q(-1, 1) - q(-1, -1) + q(0, 1) - q(0, -1)) / 4.0);
    east - west + south - north
}

/// `(D-x, D+x, D-y, D+y)`, x along columns.
fn diffs(p: &Grid, r: isize, c: isize) -> [f64; 4] {
    let v = p.at(r, c);
    [
        v - p.at(r, c - 1),
        p.at(r, c + 1) - v,
        v - p.at(r - 1, c),
        p.at(r + 1, c) - v,
    ]
}

fn godunov(d: [f64; 4], s: f64) -> f64 {
    let [a, b, c, e] = d;
    let (x, y) = if s > 0.0 {
        (
            a.max(0.0).powi(2).max(b.min(0.0).powi(2)),
            c.max(0.0).powi(2).max(e.min(0.0).powi(2)),
        )
    } else {
        (
            a.min(0.0).powi(2).max(b.max(0.0).powi(2)),
            c.min(0.0).powi(2).max(e.max(0.0).powi(2)),
        )
    };
    (x + y).sqrt()
}

fn central(p: &Grid, r: isize, c: isize) -> (f64, f64) {
    (
        (p.at(r, c + 1) - p.at(r, c - 1)) / 2.0,
        (p.at(r + 1, c) - p.at(r - 1, c)) / 2.0,
    )
}

pub fn reinit(p: &Grid, iters: usize) -> Grid {
    let (h, w) = (p.h, p.w);
    let mut sign = vec![0.0; h * w];
    let mut anchor = vec![None; h * w];
    for r in 0..h as isize {
        for c in 0..w as isize {
            let i = r as usize * w + c as usize;
            let x = p.v[i];
            let (gx, gy) = central(p, r, c);
            let g2 = gx * gx + gy * gy;
            sign[i] = x / (x * x + g2.max(1e-4)).sqrt();
            let d = diffs(p, r, c);
            let nbrs = [x - d[0], x + d[1], x - d[2], x + d[3]];
            if x != 0.0 && nbrs.iter().any(|&n| (n < 0.0) != (x < 0.0)) {
                let fwd = (d[1] * d[1] + d[3] * d[3]).sqrt();
                let back = (d[0] * d[0] + d[2] * d[2]).sqrt();
                anchor[i] = Some(x / g2.sqrt().max(fwd).max(back).max(FLOOR));
            }
        }
    }
    let mut cur = Grid::new(h, w, p.v.clone());
    for _ in 0..iters {
        let mut next = cur.v.clone();
        for r in 0..h as isize {
            for c in 0..w as isize {
                let i = r as usize * w + c as usize;
                let x = cur.v[i];
                next[i] = match anchor[i] {
                    Some(d) => x - 0.5 * (d.signum() * x.abs() - d),
                    None if sign[i] == 0.0 => x,
                    None => x - 0.5 * sign[i] * (godunov(diffs(&cur, r, c), sign[i]) - 1.0),
                };
            }
        }
        cur.v = next;
    }
    cur
}

/// Declares convergence after three consecutive 10-iteration windows whose
/// mask change rate is at most `tol`.
struct Stability {
    tol: f64,
    last: Vec<bool>,
    quiet: usize,
}

impl Stability {
    fn check(&mut self, it: usize, p: &Grid) -> bool {
        if !it.is_multiple_of(10) {
            return false;
        }
        let m = p.mask();
        let changed = m.iter().zip(&self.last).filter(|(a, b)| a != b).count();
        self.last = m;
        if changed as f64 / (p.v.len() as f64 * 10.0) <= self.tol {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        self.quiet >= 3
    }
}

pub struct Outcome {
    pub phi: Grid,
    pub iterations: usize,
}

pub fn chan_vese(img: &Grid, phi0: &Grid, max_iters: usize) -> Outcome {
    let (h, w) = (img.h, img.w);
    let mut phi = Grid::new(h, w, phi0.v.clone());
    let mut mon = Stability {
        tol: 1e-4,
        last: phi.mask(),
        quiet: 0,
    };
    let mut mu = None;
    let mut iterations = 0;
    for it in 0..max_iters {
        let m = phi.mask();
        let (mut s_in, mut n_in, mut s_out, mut n_out) = (0.0, 0usize, 0.0, 0usize);
        for (x, &inside) in img.v.iter().zip(&m) {
            if inside {
                s_in += x;
                n_in += 1;
            } else {
                s_out += x;
                n_out += 1;
            }
        }
        let (c1, c2) = (s_in / n_in as f64, s_out / n_out as f64);
        let d1: Vec<f64> = img.v.iter().map(|x| (x - c1).powi(2)).collect();
        let d2: Vec<f64> = img.v.iter().map(|x| (x - c2).powi(2)).collect();
        let weight = *mu.get_or_insert_with(|| {
            let all = d1.iter().chain(&d2);
            let hi = all.clone().cloned().fold(f64::MIN, f64::max);
            let lo = all.cloned().fold(f64::MAX, f64::min);
            0.1 * (hi - lo)
        });
        let mut next = phi.v.clone();
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                let force = weight * kappa(&phi, r as isize, c as isize) + d1[i] - d2[i];
                next[i] = phi.v[i] + 0.5 * delta(phi.v[i]) * force;
            }
        }
        phi.v = next;
        let step = it + 1;
        if step % 25 == 0 {
            phi = reinit(&phi, 10);
        }
        iterations = step;
        if mon.check(step, &phi) {
            break;
        }
    }
    Outcome { phi, iterations }
}

/// Steeper one-sided slope when both sides agree in sign, else zero (or the
/// only nonzero side).
fn slope(back: f64, fwd: f64) -> f64 {
    if back * fwd > 0.0 {
        if back.abs() > fwd.abs() {
            back
        } else {
            fwd
        }
    } else if back == 0.0 {
        fwd
    } else if fwd == 0.0 {
        back
    } else {
        0.0
    }
}

pub fn gac(img: &Grid, phi0: &Grid, balloon: f64, max_iters: usize) -> Outcome {
    let (h, w) = (img.h, img.w);
    let px = |r: usize, c: usize| img.v[r * w + c];
    let mut g = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let dr = if r + 1 < h {
                px(r + 1, c) - px(r, c)
            } else {
                px(r, c) - px(r - 1, c)
            };
            let dc = if c + 1 < w {
                px(r, c + 1) - px(r, c)
            } else {
                px(r, c) - px(r, c - 1)
            };
            g[r * w + c] = 1.0 / (1.0 + (dr * dr + dc * dc).sqrt());
        }
    }
    let gat = |r: usize, c: usize| g[r * w + c];
    let mut grad_g = vec![(0.0, 0.0); h * w];
    for r in 0..h {
        for c in 0..w {
            let bx = if c == 0 { 0.0 } else { gat(r, c) - gat(r, c - 1) };
            let fx = if c + 1 == w { 0.0 } else { gat(r, c + 1) - gat(r, c) };
            let by = if r == 0 { 0.0 } else { gat(r, c) - gat(r - 1, c) };
            let fy = if r + 1 == h { 0.0 } else { gat(r + 1, c) - gat(r, c) };
            grad_g[r * w + c] = (slope(bx, fx), slope(by, fy));
        }
    }

    let mut phi = Grid::new(h, w, phi0.v.clone());
    let mut mon = Stability {
        tol: 1e-4,
        last: phi.mask(),
        quiet: 0,
    };
    let mut iterations = 0;
    for it in 1..=max_iters {
        let mut next = phi.v.clone();
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                let (ri, ci) = (r as isize, c as isize);
                let (cx, cy) = central(&phi, ri, ci);
                let d = diffs(&phi, ri, ci);
                let (gx, gy) = grad_g[i];
                let ax = if gx > 0.0 { d[1] } else { d[0] };
                let ay = if gy > 0.0 { d[3] } else { d[2] };
                let mut speed = g[i] * kappa(&phi, ri, ci) * (cx * cx + cy * cy).sqrt() + gx * ax + gy * ay;
                if balloon != 0.0 {
                    speed -= balloon * g[i] * godunov(d, balloon);
                }
                next[i] = phi.v[i] + 0.2 * speed;
            }
        }
        phi.v = next;
        if it % 25 == 0 {
            phi = reinit(&phi, 10);
        }
        iterations = it;
        if mon.check(it, &phi) {
            break;
        }
    }
    Outcome { phi, iterations }
}
