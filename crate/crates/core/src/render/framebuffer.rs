//! Progressive accumulation of per-pixel estimates.

use serde::{Deserialize, Serialize};

use crate::vec3::Rgb;

/// Linear HDR image, row-major from the top-left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub data: Vec<Rgb>,
}

impl Image {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![Rgb::BLACK; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        self.data[y * self.width + x] = c;
    }

    pub fn luminance(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.luminance()).collect()
    }
}

/// One iteration's per-pixel estimates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PixelSample {
    pub caustic: Rgb,
    pub direct: Rgb,
    /// Gather radius, or `None` when the pixel saw no receiver.
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Framebuffer {
    pub width: usize,
    pub height: usize,
    iterations: u64,
    caustic_sum: Vec<Rgb>,
    // Per-pixel sum of squared caustic luminance, for error bars.
    caustic_sq: Vec<f64>,
    direct_sum: Vec<Rgb>,
    radius: Vec<f64>,
}

impl Framebuffer {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            iterations: 0,
            caustic_sum: vec![Rgb::BLACK; n],
            caustic_sq: vec![0.0; n],
            direct_sum: vec![Rgb::BLACK; n],
            radius: vec![0.0; n],
        }
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn accumulate(&mut self, samples: &[PixelSample]) {
        assert_eq!(samples.len(), self.caustic_sum.len());
        for (i, s) in samples.iter().enumerate() {
            self.caustic_sum[i] += s.caustic;
            let l = s.caustic.luminance();
            self.caustic_sq[i] += l * l;
            self.direct_sum[i] += s.direct;
            self.radius[i] = s.radius.unwrap_or(0.0);
        }
        self.iterations += 1;
    }

    fn mean(&self, sum: &[Rgb]) -> Image {
        let k = if self.iterations == 0 { 0.0 } else { 1.0 / self.iterations as f64 };
        Image {
            width: self.width,
            height: self.height,
            data: sum.iter().map(|c| *c * k).collect(),
        }
    }

    /// Running mean of the caustic channel.
    pub fn caustic(&self) -> Image {
        self.mean(&self.caustic_sum)
    }

    pub fn direct(&self) -> Image {
        self.mean(&self.direct_sum)
    }

    pub fn combined(&self) -> Image {
        let mut img = self.caustic();
        for (c, d) in img.data.iter_mut().zip(self.direct().data) {
            *c += d;
        }
        img
    }

    /// Standard error of each pixel's mean caustic luminance.
    pub fn caustic_standard_error(&self) -> Vec<f64> {
        let n = self.iterations as f64;
        if self.iterations < 2 {
            return vec![0.0; self.caustic_sq.len()];
        }
        self.caustic_sum
            .iter()
            .zip(&self.caustic_sq)
            .map(|(s, sq)| {
                let m = s.luminance() / n;
                let var = ((sq / n - m * m) * n / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            })
            .collect()
    }

    /// Last iteration's gather radius per pixel (zero where nothing was gathered).
    pub fn radius(&self) -> &[f64] {
        &self.radius
    }
}
