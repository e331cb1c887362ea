//! Binary 8-bit PGM (`P5`) reading and writing.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u8,
    /// Row-major, top row first.
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Self {
        assert_eq!(pixels.len(), width * height);
        GrayImage {
            width,
            height,
            maxval: 255,
            pixels,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Gray level scaled to [0, 1].
    pub fn level(&self, x: usize, y: usize) -> f64 {
        self.get(x, y) as f64 / self.maxval as f64
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<GrayImage> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        GrayImage::decode(&bytes).map_err(|message| Error::Format {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn decode(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
        let mut pos = 0;
        let magic = next_token(bytes, &mut pos).ok_or("empty file")?;
        if magic != b"P5" {
            return Err(format!(
                "magic number {:?} is not P5 (binary graymap)",
                String::from_utf8_lossy(magic)
            ));
        }
        let mut header = [0usize; 3];
        for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
            let tok = next_token(bytes, &mut pos).ok_or(format!("missing {name}"))?;
            *slot = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or(format!("bad {name}"))?;
        }
        let [width, height, maxval] = header;
        if width == 0 || height == 0 {
            return Err("zero image dimension".into());
        }
        if maxval == 0 || maxval > 255 {
            return Err(format!("maxval {maxval} is not an 8-bit graymap"));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let need = width * height;
        let raster = bytes.get(pos..pos + need).ok_or("truncated raster")?;
        Ok(GrayImage {
            width,
            height,
            maxval: maxval as u8,
            pixels: raster.to_vec(),
        })
    }
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
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
    (start < *pos).then(|| &bytes[start..*pos])
}
