//! Triangle-mesh scenes and a deterministic z-buffered software rasterizer.

mod obj;
mod raster;
mod synthetic;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use image::{ImageFormat, Rgb32FImage, RgbImage};
use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::Pose;

pub use obj::{load_mesh, load_mesh_with_texture, parse_obj};
pub use raster::render;
pub use synthetic::{make_synthetic_scene, RoomLayout, SyntheticSpec};

/// RGB image with channels in `[0, 1]`.
pub type Image = Rgb32FImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vector3<f64>>) -> Option<Aabb> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let (min, max) = it.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
        Some(Aabb { min, max })
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn center(&self) -> Vector3<f64> {
        0.5 * (self.min + self.max)
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

#[derive(Debug, Clone)]
pub struct Texture {
    pub image: Image,
    /// One `(u, v)` per scene vertex; `v = 0` is the bottom row of the image.
    pub uvs: Vec<[f32; 2]>,
}

/// Immutable triangle mesh with optional per-vertex colors and texture.
#[derive(Debug, Clone)]
pub struct Scene {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[u32; 3]>,
    colors: Option<Vec<[f32; 3]>>,
    texture: Option<Texture>,
    bbox: Aabb,
}

impl Scene {
    pub fn new(
        vertices: Vec<Vector3<f64>>,
        triangles: Vec<[u32; 3]>,
        colors: Option<Vec<[f32; 3]>>,
        texture: Option<Texture>,
    ) -> Result<Scene> {
        let bbox = Aabb::from_points(&vertices)
            .ok_or_else(|| Error::InvalidScene("scene has no vertices".into()))?;
        if vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidScene("non-finite vertex coordinate".into()));
        }
        let n = vertices.len();
        if let Some((t, idx)) = triangles
            .iter()
            .enumerate()
            .find_map(|(t, tri)| tri.iter().find(|&&i| i as usize >= n).map(|&i| (t, i)))
        {
            return Err(Error::InvalidScene(format!(
                "triangle {t} references vertex {idx} but scene has {n} vertices"
            )));
        }
        if let Some(c) = &colors {
            if c.len() != n {
                return Err(Error::InvalidScene(format!(
                    "{} vertex colors for {n} vertices",
                    c.len()
                )));
            }
        }
        if let Some(t) = &texture {
            if t.uvs.len() != n {
                return Err(Error::InvalidScene(format!(
                    "{} texture coordinates for {n} vertices",
                    t.uvs.len()
                )));
            }
            if t.image.width() == 0 || t.image.height() == 0 {
                return Err(Error::InvalidScene("empty texture image".into()));
            }
        }
        Ok(Scene {
            vertices,
            triangles,
            colors,
            texture,
            bbox,
        })
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn colors(&self) -> Option<&[[f32; 3]]> {
        self.colors.as_deref()
    }

    pub fn texture(&self) -> Option<&Texture> {
        self.texture.as_ref()
    }

    pub fn bbox(&self) -> Aabb {
        self.bbox
    }

    pub fn diagonal(&self) -> f64 {
        self.bbox.diagonal()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Attaches a texture to a scene whose UVs were parsed separately.
    pub fn with_texture(self, texture: Texture) -> Result<Scene> {
        Scene::new(self.vertices, self.triangles, self.colors, Some(texture))
    }
}

/// Appearance domain of a render. Geometry (and therefore depth) is the
/// same in every mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShadingMode {
    Textured,
    VertexColor,
    /// Gray level `1 / (1 + depth / diag)` with `diag` the scene bounding-box diagonal.
    RawGeometry,
}

impl ShadingMode {
    pub const ALL: [ShadingMode; 3] = [
        ShadingMode::Textured,
        ShadingMode::VertexColor,
        ShadingMode::RawGeometry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShadingMode::Textured => "textured",
            ShadingMode::VertexColor => "color",
            ShadingMode::RawGeometry => "raw",
        }
    }
}

impl fmt::Display for ShadingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShadingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "textured" | "texture" => Ok(ShadingMode::Textured),
            "color" | "colored" | "vertex-color" | "vertex_color" => Ok(ShadingMode::VertexColor),
            "raw" | "raw-geometry" | "raw_geometry" | "geometry" => Ok(ShadingMode::RawGeometry),
            _ => Err(Error::InvalidArgument(format!(
                "unknown shading mode `{s}` (valid modes: textured, color, raw)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RenderedView {
    pub image: Image,
    /// Row-major camera-space depth in meters, `+inf` where nothing was hit.
    pub depth: Vec<f32>,
    pub pose: Pose,
    /// `(height, width)`
    pub resolution: (u32, u32),
}

impl RenderedView {
    pub fn depth_at(&self, x: u32, y: u32) -> f32 {
        self.depth[(y * self.resolution.1 + x) as usize]
    }

    /// Depth map as CSV, one image row per line, `inf` for background.
    pub fn depth_csv(&self) -> String {
        let (h, w) = self.resolution;
        let mut out = String::with_capacity((h * w * 8) as usize);
        for row in self.depth.chunks(w as usize) {
            let line: Vec<String> = row.iter().map(|d| format!("{d}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn to_rgb8(image: &Image) -> RgbImage {
    RgbImage::from_fn(image.width(), image.height(), |x, y| {
        let p = image.get_pixel(x, y);
        image::Rgb(p.0.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8))
    })
}

pub fn from_rgb8(image: &RgbImage) -> Image {
    Image::from_fn(image.width(), image.height(), |x, y| {
        image::Rgb(image.get_pixel(x, y).0.map(|v| v as f32 / 255.0))
    })
}

/// Reads an 8-bit RGB PNG or binary PPM into a float image.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image(other),
    })?;
    Ok(from_rgb8(&img.to_rgb8()))
}

/// Writes an image as 8-bit RGB; the format follows the extension (`.png` or `.ppm`).
pub fn save_image(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(e) if e == "ppm" || e == "pnm" => ImageFormat::Pnm,
        _ => ImageFormat::Png,
    };
    to_rgb8(image).save_with_format(path, format)?;
    Ok(())
}

/// Area-weighted resampling to `width x height`.
pub fn resize_image(image: &Image, width: u32, height: u32) -> Image {
    if image.width() == width && image.height() == height {
        return image.clone();
    }
    let cols = area_weights(image.width(), width);
    let rows = area_weights(image.height(), height);
    let src_w = image.width() as usize;
    let src = image.as_raw();

    // horizontal pass into a (src_h x width) buffer
    let mut tmp = vec![0.0f32; image.height() as usize * width as usize * 3];
    for y in 0..image.height() as usize {
        for (x, taps) in cols.iter().enumerate() {
            let mut acc = [0.0f32; 3];
            for &(i, w) in taps {
                let p = &src[(y * src_w + i) * 3..][..3];
                for c in 0..3 {
                    acc[c] += w * p[c];
                }
            }
            tmp[(y * width as usize + x) * 3..][..3].copy_from_slice(&acc);
        }
    }
    let mut out = vec![0.0f32; width as usize * height as usize * 3];
    for (y, taps) in rows.iter().enumerate() {
        for x in 0..width as usize {
            let mut acc = [0.0f32; 3];
            for &(i, w) in taps {
                let p = &tmp[(i * width as usize + x) * 3..][..3];
                for c in 0..3 {
                    acc[c] += w * p[c];
                }
            }
            out[(y * width as usize + x) * 3..][..3].copy_from_slice(&acc);
        }
    }
    Image::from_raw(width, height, out).expect("buffer size matches dimensions")
}

/// For each destination pixel, the overlapped source pixels and their
/// normalized overlap weights. Upsampling degenerates to nearest-neighbor.
fn area_weights(src: u32, dst: u32) -> Vec<Vec<(usize, f32)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let lo = d as f64 * scale;
            let hi = lo + scale;
            let mut taps = Vec::new();
            let mut i = lo.floor() as usize;
            while (i as f64) < hi && i < src as usize {
                let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                if overlap > 0.0 {
                    taps.push((i, overlap));
                }
                i += 1;
            }
            let total: f64 = taps.iter().map(|t| t.1).sum();
            taps.into_iter().map(|(i, w)| (i, (w / total) as f32)).collect()
        })
        .collect()
}
