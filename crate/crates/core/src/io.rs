//! Image files and atomic output.
//!
//! PGM (binary `P5`, maxval 255) is read and written. 8-bit grayscale and RGB
//! PNG are accepted on input; RGB is reduced to luminance.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use image::{ColorType, DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::image::{to_luminance, GrayImage, Raster};

/// Writes through a temporary file in the destination directory and renames it
/// into place, so a failure never leaves a partial file behind.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        write(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

/// Parses a binary PGM with maxval 255.
pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut pos = 0;
    let token = |pos: &mut usize| -> std::result::Result<String, String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err("truncated PGM header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let magic = token(&mut pos)?;
    if magic != "P5" {
        return Err(format!("unsupported PNM magic {magic:?} (expected P5)"));
    }
    let number = |pos: &mut usize, what: &str| -> std::result::Result<usize, String> {
        token(pos)?
            .parse::<usize>()
            .map_err(|_| format!("invalid PGM {what}"))
    };
    let width = number(&mut pos, "width")?;
    let height = number(&mut pos, "height")?;
    let maxval = number(&mut pos, "maxval")?;
    if maxval != 255 {
        return Err(format!(
            "only 8-bit PGM (maxval 255) is supported, got maxval {maxval}"
        ));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let len = width * height;
    if bytes.len() < pos + len {
        return Err(format!(
            "PGM raster truncated: need {len} bytes, have {}",
            bytes.len().saturating_sub(pos)
        ));
    }
    GrayImage::new(width, height, bytes[pos..pos + len].to_vec()).map_err(|e| e.to_string())
}

fn decode_png(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| format!("PNG decode failed: {e}"))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img.color() {
        ColorType::L8 | ColorType::La8 => {
            let gray = DynamicImage::to_luma8(&img).into_raw();
            GrayImage::new(w, h, gray).map_err(|e| e.to_string())
        }
        ColorType::Rgb8 | ColorType::Rgba8 => {
            let rgb = DynamicImage::to_rgb8(&img).into_raw();
            let raster = Raster::new(w, h, 3, rgb).map_err(|e| e.to_string())?;
            to_luminance(&raster).map_err(|e| e.to_string())
        }
        other => Err(format!(
            "unsupported PNG color type {other:?} (8-bit gray/RGB only)"
        )),
    }
}

/// Decodes PGM or PNG by content.
pub fn decode_image(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    if bytes.starts_with(b"\x89PNG") {
        decode_png(bytes)
    } else if bytes.starts_with(b"P") {
        decode_pgm(bytes)
    } else {
        Err("unrecognized image format (expected PGM P5 or PNG)".into())
    }
}

pub fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|m| Error::format(path, m))
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let bytes = encode_pgm(img);
    write_atomic(path, |w| w.write_all(&bytes))
}

pub fn encode_png(img: &GrayImage) -> Vec<u8> {
    use image::ImageEncoder;
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(
            img.pixels(),
            img.width() as u32,
            img.height() as u32,
            image::ExtendedColorType::L8,
        )
        .expect("in-memory PNG encoding");
    out
}

/// PNG for a `.png` extension, PGM otherwise.
pub fn write_image(path: &Path, img: &GrayImage) -> Result<()> {
    let png = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    let bytes = if png {
        encode_png(img)
    } else {
        encode_pgm(img)
    };
    write_atomic(path, |w| w.write_all(&bytes))
}
