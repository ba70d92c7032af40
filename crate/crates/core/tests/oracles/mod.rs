//! Deliberately naive reference implementations, shared by the integration
//! tests and the acceptance suite. None of these call into the library's
//! numeric code.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

/// Walks the ray in fixed steps until the signed distance to the circle
/// changes sign, then bisects. Returns the first crossing at `t >= 0`.
pub fn march_ray(origin: (f64, f64), dir: (f64, f64), center: (f64, f64), radius: f64, step: f64) -> Option<f64> {
    let sd = |t: f64| {
        let x = origin.0 + dir.0 * t - center.0;
        let y = origin.1 + dir.1 * t - center.1;
        (x * x + y * y).sqrt() - radius
    };
    let start = sd(0.0);
    if start == 0.0 {
        return Some(0.0);
    }
    let limit = ((origin.0 - center.0).powi(2) + (origin.1 - center.1).powi(2)).sqrt() + radius + 2.0 * step;
    let mut t = 0.0;
    while t < limit {
        let next = t + step;
        if sd(next).signum() != start.signum() || sd(next) == 0.0 {
            let (mut lo, mut hi) = (t, next);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if sd(mid).signum() == start.signum() && sd(mid) != 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        t = next;
    }
    None
}

/// Distance from `center` to the infinite line through `origin` along unit `dir`.
pub fn line_distance(origin: (f64, f64), dir: (f64, f64), center: (f64, f64)) -> f64 {
    ((center.0 - origin.0) * dir.1 - (center.1 - origin.1) * dir.0).abs()
}

/// `(tp, fp, fn, tn)` by visiting every pixel.
pub fn confusion_counts(pred: &[bool], gt: &[bool], width: usize, height: usize) -> (u64, u64, u64, u64) {
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for row in 0..height {
        for col in 0..width {
            let i = row * width + col;
            match (pred[i], gt[i]) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
    }
    (tp, fp, fn_, tn)
}

/// Per-window SSIM with a full 2-D Gaussian, valid windows only.
pub fn ssim_direct(a: &[f64], b: &[f64], width: usize, height: usize) -> f64 {
    let (size, sigma, c1, c2) = (11usize, 1.5f64, 0.01f64.powi(2), 0.03f64.powi(2));
    let half = (size / 2) as f64;
    let mut weights = vec![0.0; size * size];
    for dy in 0..size {
        for dx in 0..size {
            let (x, y) = (dx as f64 - half, dy as f64 - half);
            weights[dy * size + dx] = (-(x * x + y * y) / (2.0 * sigma * sigma)).exp();
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    let mut sum = 0.0;
    let mut count = 0usize;
    for top in 0..=height - size {
        for left in 0..=width - size {
            let (mut ma, mut mb) = (0.0, 0.0);
            for dy in 0..size {
                for dx in 0..size {
                    let w = weights[dy * size + dx];
                    let i = (top + dy) * width + left + dx;
                    ma += w * a[i];
                    mb += w * b[i];
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for dy in 0..size {
                for dx in 0..size {
                    let w = weights[dy * size + dx];
                    let i = (top + dy) * width + left + dx;
                    va += w * (a[i] - ma) * (a[i] - ma);
                    vb += w * (b[i] - mb) * (b[i] - mb);
                    cov += w * (a[i] - ma) * (b[i] - mb);
                }
            }
            sum += (2.0 * ma * mb + c1) * (2.0 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    sum / count as f64
}

/// Neumaier-compensated sum.
fn careful_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + c
}

pub fn bce(p: &[f64], g: &[bool]) -> f64 {
    let eps = 1e-7;
    let terms = p.iter().zip(g).map(|(&p, &g)| {
        let p = p.max(eps).min(1.0 - eps);
        if g {
            p.ln()
        } else {
            (-p).ln_1p()
        }
    });
    -careful_sum(terms) / p.len() as f64
}

pub fn dice(p: &[f64], g: &[bool], eps: f64) -> f64 {
    let gv = |g: bool| if g { 1.0 } else { 0.0 };
    let inter = careful_sum(p.iter().zip(g).map(|(&p, &g)| p * gv(g)));
    let pp = careful_sum(p.iter().map(|&p| p * p));
    let gg = careful_sum(g.iter().map(|&g| gv(g)));
    1.0 - 2.0 * inter / (pp + gg + eps)
}

pub struct Frame<'a> {
    pub step: usize,
    pub position: (f64, f64),
    pub heading: f64,
    pub ranges: &'a [f64],
    pub hits: &'a [bool],
}

/// Per-pixel max of `(t + 1) / T` (or 1) over every hit endpoint of every
/// frame.
pub fn reproject(
    frames: &[Frame<'_>],
    angles: &[f64],
    width: usize,
    height: usize,
    extent: f64,
    window: usize,
    decay: bool,
) -> Vec<f64> {
    let mut best: HashMap<(usize, usize), f64> = HashMap::new();
    let half = extent / 2.0;
    for f in frames {
        let v = if decay {
            (f.step + 1) as f64 / window as f64
        } else {
            1.0
        };
        for b in 0..angles.len() {
            if !f.hits[b] {
                continue;
            }
            let theta = f.heading + angles[b];
            let x = f.position.0 + theta.cos() * f.ranges[b];
            let y = f.position.1 + theta.sin() * f.ranges[b];
            if x < -half || x > half || y < -half || y > half {
                continue;
            }
            let col = (((x + half) / extent * width as f64).floor() as usize).min(width - 1);
            let row = (((half - y) / extent * height as f64).floor() as usize).min(height - 1);
            let e = best.entry((row, col)).or_insert(0.0);
            if v > *e {
                *e = v;
            }
        }
    }
    let mut out = vec![0.0; width * height];
    for ((row, col), v) in best {
        out[row * width + col] = v;
    }
    out
}
