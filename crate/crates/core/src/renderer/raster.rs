use nalgebra::Vector3;

use super::{Image, RenderedView, Scene, ShadingMode};
use crate::error::{Error, Result};
use crate::geometry::{Intrinsics, Pose};

const NEAR: f64 = 1e-3;
const MIN_RESOLUTION: u32 = 16;

#[derive(Clone, Copy)]
struct ClipVertex {
    p: Vector3<f64>,
    attr: [f64; 3],
}

impl ClipVertex {
    fn lerp(&self, other: &ClipVertex, t: f64) -> ClipVertex {
        let mut attr = [0.0; 3];
        for (k, a) in attr.iter_mut().enumerate() {
            *a = self.attr[k] + (other.attr[k] - self.attr[k]) * t;
        }
        ClipVertex {
            p: self.p + (other.p - self.p) * t,
            attr,
        }
    }
}

/// Sutherland-Hodgman against the plane `z = NEAR`. Returns the number of
/// output vertices (0, 3 or 4).
fn clip_near(input: &[ClipVertex; 3], out: &mut [ClipVertex; 4]) -> usize {
    let mut n = 0;
    for i in 0..3 {
        let a = &input[i];
        let b = &input[(i + 1) % 3];
        let a_in = a.p.z >= NEAR;
        let b_in = b.p.z >= NEAR;
        if a_in {
            out[n] = *a;
            n += 1;
        }
        if a_in != b_in {
            let t = (NEAR - a.p.z) / (b.p.z - a.p.z);
            out[n] = a.lerp(b, t);
            n += 1;
        }
    }
    n
}

struct ScreenVertex {
    x: f64,
    y: f64,
    inv_z: f64,
    attr_over_z: [f64; 3],
}

struct Target<'a> {
    width: usize,
    height: usize,
    depth: &'a mut [f64],
    attrs: &'a mut [[f64; 3]],
}

fn edge(ax: f64, ay: f64, bx: f64, by: f64, px: f64, py: f64) -> f64 {
    (bx - ax) * (py - ay) - (by - ay) * (px - ax)
}

fn raster_triangle(v: [&ScreenVertex; 3], target: &mut Target<'_>) {
    let area = edge(v[0].x, v[0].y, v[1].x, v[1].y, v[2].x, v[2].y);
    if !area.is_finite() || area.abs() < 1e-12 {
        return;
    }
    let inv_area = 1.0 / area;
    let min_x = v.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let max_x = v.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let min_y = v.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let max_y = v.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    // pixel centers sit at +0.5
    let x0 = (min_x - 0.5).ceil().max(0.0);
    let x1 = (max_x - 0.5).floor().min(target.width as f64 - 1.0);
    let y0 = (min_y - 0.5).ceil().max(0.0);
    let y1 = (max_y - 0.5).floor().min(target.height as f64 - 1.0);
    if x0 > x1 || y0 > y1 {
        return;
    }
    let (x0, x1, y0, y1) = (x0 as usize, x1 as usize, y0 as usize, y1 as usize);

    // barycentric weights are affine in screen space: b = b0 + bx*x + by*y
    let coeffs = |a: &ScreenVertex, b: &ScreenVertex| {
        let dx = (a.y - b.y) * inv_area;
        let dy = (b.x - a.x) * inv_area;
        let c = edge(a.x, a.y, b.x, b.y, 0.0, 0.0) * inv_area;
        (c, dx, dy)
    };
    let w0 = coeffs(v[1], v[2]);
    let w1 = coeffs(v[2], v[0]);
    let w2 = coeffs(v[0], v[1]);

    let edges = [w0, w1, w2];
    for py in y0..=y1 {
        let fy = py as f64 + 0.5;
        let row = py * target.width;
        // each barycentric is affine in x along the row: clip the span to b >= 0
        let (mut lo, mut hi) = (x0 as f64 + 0.5, x1 as f64 + 0.5);
        for &(c, dx, dy) in &edges {
            let base = c + dy * fy;
            if dx > 0.0 {
                lo = lo.max(-base / dx);
            } else if dx < 0.0 {
                hi = hi.min(-base / dx);
            } else if base < 0.0 {
                hi = f64::NEG_INFINITY;
            }
        }
        if !(lo <= hi) {
            continue;
        }
        // one pixel of slack on both ends, the exact test below decides
        let sx0 = ((lo - 0.5).ceil() as isize - 1).max(x0 as isize) as usize;
        let sx1 = ((hi - 0.5).floor() as isize + 1).min(x1 as isize);
        if sx1 < sx0 as isize {
            continue;
        }
        for px in sx0..=sx1 as usize {
            let fx = px as f64 + 0.5;
            let b0 = w0.0 + w0.1 * fx + w0.2 * fy;
            let b1 = w1.0 + w1.1 * fx + w1.2 * fy;
            let b2 = w2.0 + w2.1 * fx + w2.2 * fy;
            if b0 < 0.0 || b1 < 0.0 || b2 < 0.0 {
                continue;
            }
            let inv_z = b0 * v[0].inv_z + b1 * v[1].inv_z + b2 * v[2].inv_z;
            if inv_z <= 0.0 {
                continue;
            }
            let z = 1.0 / inv_z;
            let idx = row + px;
            if z < target.depth[idx] {
                target.depth[idx] = z;
                let mut a = [0.0; 3];
                for (k, slot) in a.iter_mut().enumerate() {
                    *slot = z
                        * (b0 * v[0].attr_over_z[k]
                            + b1 * v[1].attr_over_z[k]
                            + b2 * v[2].attr_over_z[k]);
                }
                target.attrs[idx] = a;
            }
        }
    }
}

/// Renders `scene` from `pose`. Pixels with no surface are black with
/// infinite depth. Output is a pure function of the inputs.
pub fn render(scene: &Scene, pose: &Pose, intr: &Intrinsics, mode: ShadingMode) -> Result<RenderedView> {
    intr.validate()?;
    if intr.width < MIN_RESOLUTION || intr.height < MIN_RESOLUTION {
        return Err(Error::InvalidIntrinsics(format!(
            "render resolution {}x{} below minimum {MIN_RESOLUTION}x{MIN_RESOLUTION}",
            intr.width, intr.height
        )));
    }
    let (w, h) = (intr.width as usize, intr.height as usize);

    // Textured falls back to vertex colors, then to white, when the scene lacks them.
    let texture = scene.texture().filter(|_| mode == ShadingMode::Textured);
    let colors = match mode {
        ShadingMode::RawGeometry => None,
        _ if texture.is_some() => None,
        _ => scene.colors(),
    };

    let rot = pose.rotation();
    let center = pose.center();
    let cam: Vec<Vector3<f64>> = scene.vertices().iter().map(|v| rot * (v - center)).collect();
    let attr_of = |i: usize| -> [f64; 3] {
        if let Some(t) = texture {
            let uv = t.uvs[i];
            [uv[0] as f64, uv[1] as f64, 0.0]
        } else if let Some(c) = colors {
            c[i].map(|v| v as f64)
        } else {
            [1.0; 3]
        }
    };

    let mut depth = vec![f64::INFINITY; w * h];
    let mut attrs = vec![[0.0f64; 3]; w * h];
    let mut target = Target {
        width: w,
        height: h,
        depth: &mut depth,
        attrs: &mut attrs,
    };

    let mut clipped = [ClipVertex {
        p: Vector3::zeros(),
        attr: [0.0; 3],
    }; 4];
    for tri in scene.triangles() {
        let idx = tri.map(|i| i as usize);
        let input = idx.map(|i| ClipVertex {
            p: cam[i],
            attr: attr_of(i),
        });
        if input.iter().all(|v| v.p.z < NEAR) {
            continue;
        }
        let n = clip_near(&input, &mut clipped);
        if n < 3 {
            continue;
        }
        let screen: Vec<ScreenVertex> = clipped[..n]
            .iter()
            .map(|cv| {
                let (x, y) = intr.project(&cv.p);
                let inv_z = 1.0 / cv.p.z;
                ScreenVertex {
                    x,
                    y,
                    inv_z,
                    attr_over_z: cv.attr.map(|a| a * inv_z),
                }
            })
            .collect();
        for k in 1..n - 1 {
            raster_triangle([&screen[0], &screen[k], &screen[k + 1]], &mut target);
        }
    }

    let diag = scene.diagonal().max(1e-12);
    let mut pixels = vec![0.0f32; w * h * 3];
    for (i, px) in pixels.chunks_exact_mut(3).enumerate() {
        let z = depth[i];
        if !z.is_finite() {
            continue;
        }
        let rgb = match mode {
            ShadingMode::RawGeometry => [(1.0 / (1.0 + z / diag)) as f32; 3],
            _ => match texture {
                Some(t) => sample_nearest(&t.image, attrs[i][0], attrs[i][1]),
                None => attrs[i].map(|v| v as f32),
            },
        };
        px.copy_from_slice(&rgb);
    }

    Ok(RenderedView {
        image: Image::from_raw(intr.width, intr.height, pixels).expect("buffer size matches"),
        depth: depth.into_iter().map(|d| d as f32).collect(),
        pose: *pose,
        resolution: (intr.height, intr.width),
    })
}

fn sample_nearest(tex: &Image, u: f64, v: f64) -> [f32; 3] {
    let (tw, th) = (tex.width() as usize, tex.height() as usize);
    // float-to-int casts saturate at 0, so truncation matches floor here
    let x = ((u * tw as f64) as usize).min(tw - 1);
    let y = (((1.0 - v) * th as f64) as usize).min(th - 1);
    let p = &tex.as_raw()[(y * tw + x) * 3..][..3];
    [p[0], p[1], p[2]]
}
