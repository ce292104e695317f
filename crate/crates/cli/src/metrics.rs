//! Image error metrics and the per-iteration CSV log.

use std::io::Write;

use g3d_core::render::Image;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn check_dims(a: &Image, b: &Image) -> Result<(), CliError> {
    if a.width != b.width || a.height != b.height {
        return Err(CliError::DimensionMismatch {
            a: (a.width, a.height),
            b: (b.width, b.height),
        });
    }
    Ok(())
}

/// Mean squared error over all pixels and linear RGB channels.
pub fn mse(a: &Image, b: &Image) -> Result<f64, CliError> {
    check_dims(a, b)?;
    let sum: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| {
            let d = *x - *y;
            d.r * d.r + d.g * d.g + d.b * d.b
        })
        .sum();
    Ok(sum / (3 * a.data.len()) as f64)
}

pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_RADIUS: usize = 5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn gaussian_kernel() -> Vec<f64> {
    let r = SSIM_RADIUS as i64;
    let w: Vec<f64> = (-r..=r)
        .map(|i| (-0.5 * (i * i) as f64 / (SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

// Half-sample symmetric extension: d c b a | a b c d | d c b a.
fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}

fn blur(src: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let r = SSIM_RADIUS as i64;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = (-r..=r)
                .map(|d| k[(d + r) as usize] * src[y * w + reflect(x as i64 + d, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = (-r..=r)
                .map(|d| k[(d + r) as usize] * tmp[reflect(y as i64 + d, h) * w + x])
                .sum();
        }
    }
    out
}

/// SSIM of two single-channel images with an 11 x 11 Gaussian window
/// (sigma 1.5), population covariances, and the mean taken over pixels at
/// least five away from every border.
pub fn ssim_gray(a: &[f64], b: &[f64], w: usize, h: usize, data_range: f64) -> Result<f64, CliError> {
    let win = 2 * SSIM_RADIUS + 1;
    if w < win || h < win {
        return Err(CliError::ImageTooSmall { min: win });
    }
    assert_eq!(a.len(), w * h);
    assert_eq!(b.len(), w * h);
    let k = gaussian_kernel();
    let prod = |f: &dyn Fn(usize) -> f64| (0..w * h).map(f).collect::<Vec<f64>>();
    let ux = blur(a, w, h, &k);
    let uy = blur(b, w, h, &k);
    let uxx = blur(&prod(&|i| a[i] * a[i]), w, h, &k);
    let uyy = blur(&prod(&|i| b[i] * b[i]), w, h, &k);
    let uxy = blur(&prod(&|i| a[i] * b[i]), w, h, &k);
    let c1 = (SSIM_K1 * data_range).powi(2);
    let c2 = (SSIM_K2 * data_range).powi(2);
    let mut sum = 0.0;
    let mut n = 0usize;
    for y in SSIM_RADIUS..h - SSIM_RADIUS {
        for x in SSIM_RADIUS..w - SSIM_RADIUS {
            let i = y * w + x;
            let vx = uxx[i] - ux[i] * ux[i];
            let vy = uyy[i] - uy[i] * uy[i];
            let vxy = uxy[i] - ux[i] * uy[i];
            let num = (2.0 * ux[i] * uy[i] + c1) * (2.0 * vxy + c2);
            let den = (ux[i] * ux[i] + uy[i] * uy[i] + c1) * (vx + vy + c2);
            sum += num / den;
            n += 1;
        }
    }
    Ok(sum / n as f64)
}

/// SSIM on Rec. 709 luma with a data range of 1.
pub fn ssim(a: &Image, b: &Image) -> Result<f64, CliError> {
    check_dims(a, b)?;
    ssim_gray(&a.luminance(), &b.luminance(), a.width, a.height, 1.0)
}

/// One line of the metrics log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub iteration: usize,
    /// Empty when no reference image was given.
    pub mse: Option<f64>,
    /// `1 - SSIM`.
    pub ssim_comp: Option<f64>,
    pub gathered: usize,
    pub seconds: f64,
}

pub const CSV_HEADER: &str = "iteration,mse,ssim_comp,gathered,seconds";

pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(w: W) -> Self {
        Self {
            inner: csv::Writer::from_writer(w),
        }
    }

    pub fn write(&mut self, row: &MetricsRow) -> Result<(), CliError> {
        self.inner.serialize(row)?;
        self.inner.flush()?;
        Ok(())
    }
}

pub fn read_metrics<R: std::io::Read>(r: R) -> Result<Vec<MetricsRow>, CliError> {
    let mut rd = csv::Reader::from_reader(r);
    Ok(rd.deserialize().collect::<Result<Vec<_>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use g3d_core::Rgb;

    fn pattern(w: usize, h: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..h)
            .flat_map(|y| (0..w).map(move |x| (x as f64, y as f64)))
            .map(|(x, y)| f(x, y))
            .collect()
    }

    #[test]
    fn kernel_and_reflection() {
        let k = gaussian_kernel();
        assert_eq!(k.len(), 11);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let idx: Vec<usize> = (-3..7).map(|i| reflect(i, 4)).collect();
        assert_eq!(idx, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1]);
    }

    #[test]
    fn identical_and_offset_images() {
        let mut a = Image::new(16, 12);
        for (i, c) in a.data.iter_mut().enumerate() {
            *c = Rgb::splat((i as f64 * 0.37).sin().abs());
        }
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let mut b = a.clone();
        b.data.iter_mut().for_each(|c| *c += Rgb::splat(0.1));
        assert!((mse(&a, &b).unwrap() - 0.01).abs() < 1e-12);
        assert!(mse(&a, &Image::new(3, 3)).is_err());
        assert!(ssim(&Image::new(8, 8), &Image::new(8, 8)).is_err());
    }

    // Reference values from skimage.metrics.structural_similarity with
    // gaussian_weights=True, sigma=1.5, use_sample_covariance=False,
    // data_range=1 on the same patterns.
    #[test]
    fn matches_reference_implementation() {
        let (w, h) = (32, 24);
        let a = pattern(w, h, |x, y| 0.5 + 0.4 * (0.3 * x).sin() * (0.2 * y).cos());
        let b = pattern(w, h, |x, y| {
            0.5 + 0.4 * (0.3 * x).sin() * (0.2 * y).cos() + 0.1 * (0.7 * x + 0.5 * y).sin()
        });
        let c = pattern(w, h, |x, y| ((x * 7.0 + y * 13.0) % 17.0) / 17.0);
        let ab = ssim_gray(&a, &b, w, h, 1.0).unwrap();
        let ac = ssim_gray(&a, &c, w, h, 1.0).unwrap();
        assert!((ab - SSIM_AB).abs() < 1e-4, "{ab}");
        assert!((ac - SSIM_AC).abs() < 1e-4, "{ac}");
    }

    const SSIM_AB: f64 = 0.8016595257277409;
    const SSIM_AC: f64 = 0.00954670992811439;

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        {
            let mut w = MetricsWriter::new(&mut buf);
            w.write(&MetricsRow {
                iteration: 1,
                mse: Some(0.5),
                ssim_comp: Some(0.25),
                gathered: 10,
                seconds: 0.125,
            })
            .unwrap();
            w.write(&MetricsRow {
                iteration: 2,
                mse: None,
                ssim_comp: None,
                gathered: 0,
                seconds: 1.0,
            })
            .unwrap();
        }
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().nth(2).unwrap(), "2,,,0,1.0");
        let rows = read_metrics(&buf[..]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].mse, Some(0.5));
    }
}
