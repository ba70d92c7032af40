//! Mean structural similarity over Gaussian-weighted windows.
//!
//! Windows are evaluated only where they fit entirely inside the image (no
//! padding); the score is the unweighted mean over those positions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsimParams {
    /// Window side length, pixels (odd).
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub data_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            data_range: 1.0,
        }
    }
}

impl SsimParams {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.data_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.data_range).powi(2)
    }
}

/// Normalized 1-D Gaussian taps centered on the middle sample.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let mid = (size as f64 - 1.0) / 2.0;
    let taps: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - mid;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Valid-region separable filter: rows first, then columns.
fn filter_valid(src: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let k = kernel.len();
    let out_w = width - k + 1;
    let out_h = height - k + 1;
    let mut horizontal = vec![0.0; out_w * height];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..out_w {
            horizontal[y * out_w + x] = kernel.iter().zip(&row[x..x + k]).map(|(w, v)| w * v).sum();
        }
    }
    let mut out = vec![0.0; out_w * out_h];
    for y in 0..out_h {
        for x in 0..out_w {
            out[y * out_w + x] = kernel
                .iter()
                .enumerate()
                .map(|(j, w)| w * horizontal[(y + j) * out_w + x])
                .sum();
        }
    }
    out
}

/// Mean SSIM between two equally sized row-major images.
pub fn ssim(a: &[f64], b: &[f64], width: usize, height: usize, params: &SsimParams) -> Result<f64> {
    if a.len() != width * height || b.len() != width * height {
        return Err(Error::GridMismatch(format!(
            "ssim inputs of {} and {} values for a {width}x{height} image",
            a.len(),
            b.len()
        )));
    }
    if params.window == 0 || width < params.window || height < params.window {
        return Err(Error::ImageTooSmall {
            width,
            height,
            window: params.window,
        });
    }
    let kernel = gaussian_kernel(params.window, params.sigma);
    let product = |f: fn(f64, f64) -> f64| -> Vec<f64> { a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect() };

    let mu_a = filter_valid(a, width, height, &kernel);
    let mu_b = filter_valid(b, width, height, &kernel);
    let aa = filter_valid(&product(|x, _| x * x), width, height, &kernel);
    let bb = filter_valid(&product(|_, y| y * y), width, height, &kernel);
    let ab = filter_valid(&product(|x, y| x * y), width, height, &kernel);

    let (c1, c2) = (params.c1(), params.c2());
    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let var_a = aa[i] - ma * ma;
            let var_b = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}
