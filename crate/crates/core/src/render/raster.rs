use serde::{Deserialize, Serialize};

use super::scene::Rgb;
use super::RenderError;

/// Row-major 8-bit RGB image.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, RenderError> {
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(RenderError::invalid(
                "pixels",
                format!("expected {expected} bytes for {width}x{height}, got {}", pixels.len()),
            ));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        let pixels = color
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Self { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = self.offset(x, y);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, color: Rgb) {
        let i = self.offset(x, y);
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    pub fn row(&self, y: u32) -> &[u8] {
        let start = self.offset(0, y);
        &self.pixels[start..start + self.width as usize * 3]
    }
}

/// Left and right views of one stimulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StereoPair {
    left: RasterImage,
    right: RasterImage,
}

impl StereoPair {
    pub fn new(left: RasterImage, right: RasterImage) -> Result<Self, RenderError> {
        if left.dimensions() != right.dimensions() {
            return Err(RenderError::DimensionMismatch {
                left: left.dimensions(),
                right: right.dimensions(),
            });
        }
        Ok(Self { left, right })
    }

    pub fn left(&self) -> &RasterImage {
        &self.left
    }

    pub fn right(&self) -> &RasterImage {
        &self.right
    }
}

/// How a stereo pair is turned into a single displayable image.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Presentation {
    /// Free fusion: left view on the left half, right view on the right half.
    #[default]
    SideBySide,
    /// Red from the left view, green and blue from the right.
    Anaglyph,
}

impl Presentation {
    pub fn compose(self, pair: &StereoPair) -> RasterImage {
        match self {
            Presentation::SideBySide => compose_side_by_side(pair),
            Presentation::Anaglyph => compose_anaglyph(pair),
        }
    }
}

pub fn compose_side_by_side(pair: &StereoPair) -> RasterImage {
    let (w, h) = pair.left.dimensions();
    let mut pixels = Vec::with_capacity(w as usize * h as usize * 6);
    for y in 0..h {
        pixels.extend_from_slice(pair.left.row(y));
        pixels.extend_from_slice(pair.right.row(y));
    }
    RasterImage {
        width: w * 2,
        height: h,
        pixels,
    }
}

pub fn compose_anaglyph(pair: &StereoPair) -> RasterImage {
    let pixels = pair
        .left
        .pixels
        .chunks_exact(3)
        .zip(pair.right.pixels.chunks_exact(3))
        .flat_map(|(l, r)| [l[0], r[1], r[2]])
        .collect();
    RasterImage {
        width: pair.left.width,
        height: pair.left.height,
        pixels,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    /// Binary PPM. Byte-exact and codec-free.
    Ppm,
    Png,
}

pub fn encode_image(img: &RasterImage, format: ImageFormat) -> Result<Vec<u8>, RenderError> {
    match format {
        ImageFormat::Ppm => Ok(encode_ppm(img)),
        ImageFormat::Png => encode_png(img),
    }
}

pub fn encode_ppm(img: &RasterImage) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>, RenderError> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width, img.height);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(|e| RenderError::Encode(e.to_string()))?;
        writer
            .write_image_data(&img.pixels)
            .map_err(|e| RenderError::Encode(e.to_string()))?;
    }
    Ok(out)
}

/// Parse a binary PPM with maxval 255. Header comments are not supported.
pub fn decode_ppm(bytes: &[u8]) -> Result<RasterImage, RenderError> {
    let bad = |why: &str| RenderError::Decode(why.to_string());
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ascii header"))?);
    }
    if fields[0] != "P6" || fields[3] != "255" {
        return Err(bad("expected P6 with maxval 255"));
    }
    let width: u32 = fields[1].parse().map_err(|_| bad("bad width"))?;
    let height: u32 = fields[2].parse().map_err(|_| bad("bad height"))?;
    // exactly one whitespace byte separates the header from the raster
    RasterImage::new(width, height, bytes.get(pos + 1..).unwrap_or_default().to_vec())
}
