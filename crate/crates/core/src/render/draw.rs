//! Per-eye painter's-order rasterization.
//!
//! Order is sky, then cues from far to near (equal depths in listing order),
//! then the moon. The moon is drawn last whatever its nominal distance, so it
//! always reads as an occluder in front of the sky, never as something seen
//! through a hole in it. Its disparity is set independently of that order.
//!
//! Coverage uses pixel-center sampling with hard edges and no anti-aliasing:
//! a pixel belongs to a shape iff its center `(x + 0.5, y + 0.5)` does.
//! Cue silhouettes are rasterized once and shifted by whole pixels per eye,
//! so both views show the same shape.

use std::ops::Range;

use super::raster::{RasterImage, StereoPair};
use super::rig::{CameraRig, Eye};
use super::scene::{MoonDisparity, StereoScene};
use super::RenderError;

/// Luminance jitter amplitude of the sky texture, in 8-bit levels.
const SKY_TEXTURE_AMPLITUDE: i16 = 14;
/// Sky texel edge length, in pixels at the sky's depth.
const SKY_TEXEL_PX: f64 = 4.0;

/// What ended up visible at a pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layer {
    Sky,
    /// Index into `StereoScene::cues`.
    Cue(usize),
    Moon,
}

/// One eye's image plus the per-pixel layer labels it was painted from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EyeRender {
    pub image: RasterImage,
    pub layers: Vec<Layer>,
}

impl EyeRender {
    /// Row-major boolean mask of pixels showing `layer`.
    pub fn mask(&self, layer: Layer) -> Vec<bool> {
        self.layers.iter().map(|&l| l == layer).collect()
    }

    /// Mean `(x, y)` of pixel centers showing `layer`, if any.
    pub fn centroid(&self, layer: Layer) -> Option<(f64, f64)> {
        let w = self.image.width() as usize;
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for (i, _) in self.layers.iter().enumerate().filter(|(_, &l)| l == layer) {
            sx += (i % w) as f64 + 0.5;
            sy += (i / w) as f64 + 0.5;
            n += 1;
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }
}

/// Moon disc placement in one eye, pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscFootprint {
    pub center: (f64, f64),
    pub radius: f64,
}

impl DiscFootprint {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        let dx = x as f64 + 0.5 - self.center.0;
        let dy = y as f64 + 0.5 - self.center.1;
        let r = self.radius;
        if dx * dx + dy * dy <= r * r {
            return true;
        }
        // Near the poles a chord can fall between pixel centers; keep the
        // pixel on the axis so the disc still spans its full extent.
        (dx.abs() <= 0.5 && dy.abs() <= r) || (dy.abs() <= 0.5 && dx.abs() <= r)
    }
}

/// Where the moon lands in `eye`: radius `f·tan(θ/2)`, centered on its
/// direction and split by its disparity.
pub fn moon_footprint(rig: &CameraRig, scene: &StereoScene, eye: Eye) -> Result<DiscFootprint, RenderError> {
    let moon = &scene.moon;
    let radius = rig.focal_px * (moon.angular_diameter_deg.to_radians() / 2.0).tan();
    let tan_az = moon.azimuth_deg.to_radians().tan();
    let tan_el = moon.elevation_deg.to_radians().tan();
    let center = match moon.disparity {
        MoonDisparity::OverrideDeg(d) => {
            let half = rig.focal_px * d.to_radians().tan() / 2.0;
            let u = rig.cx() + rig.focal_px * tan_az;
            let v = rig.cy() - rig.focal_px * tan_el;
            match eye {
                Eye::Left => (u + half, v),
                Eye::Right => (u - half, v),
            }
        }
        MoonDisparity::Veridical => {
            let z = moon.distance_m;
            rig.project_point(eye, [z * tan_az, -z * tan_el, z])?
        }
    };
    Ok(DiscFootprint { center, radius })
}

/// Pixel indices whose centers fall in `[lo, hi)`, clipped to `0..limit`.
fn covered(lo: f64, hi: f64, limit: u32) -> Range<u32> {
    clip(pixel_span(lo, hi), 0, limit)
}

/// Unclipped `[first, end)` pixel span of `[lo, hi)`.
fn pixel_span(lo: f64, hi: f64) -> (i64, i64) {
    ((lo - 0.5).ceil() as i64, (hi - 0.5).ceil() as i64)
}

fn clip((first, end): (i64, i64), offset: i64, limit: u32) -> Range<u32> {
    let first = (first + offset).clamp(0, limit as i64);
    let end = (end + offset).clamp(0, limit as i64);
    if end <= first {
        0..0
    } else {
        first as u32..end as u32
    }
}

/// Whole-pixel horizontal offset of a cue at depth `z` in `eye`. The two
/// offsets differ by `round(f·b/z)`, so the rasterized disparity is never
/// more than half a pixel off.
fn cue_offset(rig: &CameraRig, eye: Eye, z: f64) -> i64 {
    let d = rig.pixel_disparity(z).round() as i64;
    match eye {
        Eye::Left => d - d / 2,
        Eye::Right => -(d / 2),
    }
}

/// SplitMix64 finalizer over the texel coordinates.
fn texel_hash(seed: u64, ix: i64, iy: i64) -> u64 {
    let mut z =
        seed ^ (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn paint_sky(rig: &CameraRig, scene: &StereoScene, eye: Eye, img: &mut RasterImage) {
    let Some(seed) = scene.sky.texture_seed else {
        return;
    };
    let base = scene.sky.color;
    // Texels are anchored to the sky plane, so the texture carries the
    // sky's disparity f·b/z.
    let shift = rig.focal_px * eye.x_shift(rig.baseline_m) / scene.sky.distance_m;
    for y in 0..rig.height_px {
        let iy = ((y as f64 + 0.5 - rig.cy()) / SKY_TEXEL_PX).floor() as i64;
        for x in 0..rig.width_px {
            let ix = ((x as f64 + 0.5 - rig.cx() - shift) / SKY_TEXEL_PX).floor() as i64;
            let span = (2 * SKY_TEXTURE_AMPLITUDE + 1) as u64;
            let jitter = (texel_hash(seed, ix, iy) % span) as i16 - SKY_TEXTURE_AMPLITUDE;
            let c = base.map(|ch| (ch as i16 + jitter).clamp(0, 255) as u8);
            img.set_pixel(x, y, c);
        }
    }
}

/// Render one eye's view with layer labels.
pub fn render_eye(rig: &CameraRig, scene: &StereoScene, eye: Eye) -> Result<EyeRender, RenderError> {
    rig.validate()?;
    scene.validate()?;

    let (w, h) = (rig.width_px, rig.height_px);
    let mut image = RasterImage::filled(w, h, scene.sky.color);
    let mut layers = vec![Layer::Sky; w as usize * h as usize];
    paint_sky(rig, scene, eye, &mut image);

    let mut order: Vec<usize> = (0..scene.cues.len()).collect();
    // stable: equal depths keep listing order, later entries on top
    order.sort_by(|&a, &b| scene.cues[b].distance_m.total_cmp(&scene.cues[a].distance_m));
    for i in order {
        let cue = &scene.cues[i];
        let z = cue.distance_m;
        // Rasterize once from the midpoint between the eyes, then shift.
        let to_px = |x: f64, y: f64| (rig.cx() + rig.focal_px * x / z, rig.cy() + rig.focal_px * y / z);
        let (u0, v0) = to_px(cue.rect.x_min, cue.rect.y_min);
        let (u1, v1) = to_px(cue.rect.x_max, cue.rect.y_max);
        let columns = clip(pixel_span(u0, u1), cue_offset(rig, eye, z), w);
        for y in covered(v0, v1, h) {
            for x in columns.clone() {
                image.set_pixel(x, y, cue.color);
                layers[y as usize * w as usize + x as usize] = Layer::Cue(i);
            }
        }
    }

    let disc = moon_footprint(rig, scene, eye)?;
    let color = scene.moon.color();
    let (cu, cv) = disc.center;
    for y in covered(cv - disc.radius, cv + disc.radius + 1.0, h) {
        for x in covered(cu - disc.radius, cu + disc.radius + 1.0, w) {
            if disc.contains(x, y) {
                image.set_pixel(x, y, color);
                layers[y as usize * w as usize + x as usize] = Layer::Moon;
            }
        }
    }

    Ok(EyeRender { image, layers })
}

/// Render both eyes. Output depends only on `(rig, scene)`.
pub fn render_stereo(rig: &CameraRig, scene: &StereoScene) -> Result<StereoPair, RenderError> {
    let left = render_eye(rig, scene, Eye::Left)?;
    let right = render_eye(rig, scene, Eye::Right)?;
    StereoPair::new(left.image, right.image)
}
