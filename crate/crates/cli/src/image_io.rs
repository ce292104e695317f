//! PFM (linear float) and binary PPM (tonemapped) images.

use std::io::{self, BufRead, BufReader, Read, Write};

use g3d_core::render::Image;
use g3d_core::Rgb;

/// Writes a color PFM. Rows are stored bottom-up and the negative scale
/// marks little-endian floats.
pub fn write_pfm<W: Write>(img: &Image, mut w: W) -> io::Result<()> {
    write!(w, "PF\n{} {}\n-1.0\n", img.width, img.height)?;
    let mut buf = Vec::with_capacity(img.width * img.height * 12);
    for y in (0..img.height).rev() {
        for x in 0..img.width {
            for v in img.get(x, y).to_array() {
                buf.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    w.write_all(&buf)
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

fn header_token<R: BufRead>(r: &mut R) -> io::Result<String> {
    let mut tok = Vec::new();
    loop {
        let mut b = [0u8];
        if r.read(&mut b)? == 0 {
            break;
        }
        if b[0].is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            break;
        }
        tok.push(b[0]);
    }
    String::from_utf8(tok).map_err(|_| bad("non-ASCII header"))
}

/// Reads color (`PF`) or grayscale (`Pf`) PFM in either byte order.
pub fn read_pfm<R: Read>(r: R) -> io::Result<Image> {
    let mut r = BufReader::new(r);
    let channels = match header_token(&mut r)?.as_str() {
        "PF" => 3,
        "Pf" => 1,
        _ => return Err(bad("not a PFM file")),
    };
    let width: usize = header_token(&mut r)?.parse().map_err(|_| bad("bad width"))?;
    let height: usize = header_token(&mut r)?.parse().map_err(|_| bad("bad height"))?;
    let scale: f64 = header_token(&mut r)?.parse().map_err(|_| bad("bad scale"))?;
    let mut raw = vec![0u8; width * height * channels * 4];
    r.read_exact(&mut raw)?;
    let value = |i: usize| {
        let b = [raw[4 * i], raw[4 * i + 1], raw[4 * i + 2], raw[4 * i + 3]];
        (if scale < 0.0 { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) }) as f64
    };
    let mut img = Image::new(width, height);
    for row in 0..height {
        for x in 0..width {
            let i = (row * width + x) * channels;
            let c = if channels == 3 {
                Rgb::new(value(i), value(i + 1), value(i + 2))
            } else {
                Rgb::splat(value(i))
            };
            img.set(x, height - 1 - row, c);
        }
    }
    Ok(img)
}

/// Exposure scale, then gamma 2.2, clamped to 8 bits.
pub fn tonemap(v: f64, exposure: f64) -> u8 {
    let x = (v * exposure).max(0.0).powf(1.0 / 2.2);
    (x.min(1.0) * 255.0).round() as u8
}

pub fn write_ppm<W: Write>(img: &Image, exposure: f64, mut w: W) -> io::Result<()> {
    write!(w, "P6\n{} {}\n255\n", img.width, img.height)?;
    let bytes: Vec<u8> = img
        .data
        .iter()
        .flat_map(|c| c.to_array().map(|v| tonemap(v, exposure)))
        .collect();
    w.write_all(&bytes)
}

/// Maps `t` in [0, 1] through a blue-cyan-yellow-red ramp.
pub fn heat_color(t: f64) -> Rgb {
    const STOPS: [(f64, f64, f64); 5] = [
        (0.0, 0.0, 0.3),
        (0.0, 0.4, 1.0),
        (0.0, 1.0, 1.0),
        (1.0, 1.0, 0.0),
        (1.0, 0.0, 0.0),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let f = t * (STOPS.len() - 1) as f64;
    let i = (f as usize).min(STOPS.len() - 2);
    let s = f - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    Rgb::new(a.0 + (b.0 - a.0) * s, a.1 + (b.1 - a.1) * s, a.2 + (b.2 - a.2) * s)
}

/// False-color image of `values`, normalized by their maximum. Zeros stay black.
pub fn heatmap(values: &[f64], width: usize, height: usize) -> Image {
    let max = values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let mut img = Image::new(width, height);
    for (c, &v) in img.data.iter_mut().zip(values) {
        if v > 0.0 && max > 0.0 {
            *c = heat_color(v / max);
        }
    }
    img
}
