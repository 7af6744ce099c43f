//! Independent oracles shared by the integration tests. Nothing here calls
//! into the raster code of the library.

#![allow(dead_code)]

use sspp::{Point, Window};

/// Midpoint Riemann sum of the two-valued interaction density over a
/// `cells × cells` grid of the window.
pub fn brute_normalizer(past: &[Point], theta: f64, r: f64, window: &Window, cells: usize) -> f64 {
    let dx = window.width() / cells as f64;
    let dy = window.height() / cells as f64;
    let r2 = r * r;
    let mut inside = 0usize;
    for i in 0..cells {
        let x = window.xmin() + (i as f64 + 0.5) * dx;
        for j in 0..cells {
            let y = window.ymin() + (j as f64 + 0.5) * dy;
            if past
                .iter()
                .any(|p| (p.x - x).powi(2) + (p.y - y).powi(2) <= r2)
            {
                inside += 1;
            }
        }
    }
    let total = cells * cells;
    let cell = dx * dy;
    cell * (theta * inside as f64 + (1.0 - theta) * (total - inside) as f64)
}

/// Log-likelihood of the sequence from the second point onwards, every
/// normalizer recomputed from scratch by [`brute_normalizer`].
pub fn brute_loglik(points: &[Point], theta: f64, r: f64, window: &Window, cells: usize) -> f64 {
    (1..points.len())
        .map(|k| {
            let past = &points[..k];
            let y = points[k];
            let inside = past
                .iter()
                .any(|p| (p.x - y.x).powi(2) + (p.y - y.y).powi(2) <= r * r);
            let pi = if inside { theta } else { 1.0 - theta };
            pi.ln() - brute_normalizer(past, theta, r, window, cells).ln()
        })
        .sum()
}

/// Maximizer of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}

/// Small deterministic generator (splitmix64) for test fixtures.
pub struct Fixture(u64);

impl Fixture {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn point_in(&mut self, w: &Window) -> Point {
        Point::new(
            self.range(w.xmin(), w.xmax()),
            self.range(w.ymin(), w.ymax()),
        )
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.index(i + 1);
            v.swap(i, j);
        }
        v
    }
}
