//! Procedural textured rooms used as stand-in scenes.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Aabb, Image, Scene, Texture};
use crate::error::{Error, Result};
use crate::geometry::Pose;

const TILE: u32 = 64;
const MAX_PANEL: f64 = 2.5;
/// Brightness spread of the pattern painted over a surface's base color.
const CONTRAST: f32 = 0.35;
/// Baked lighting from a lamp below the ceiling at the room center: the
/// fraction of light that does not fall off with distance, the lamp height
/// as a fraction of the room height, and the falloff distance as a fraction
/// of the room diagonal.
const AMBIENT: f64 = 0.25;
const LAMP_HEIGHT: f64 = 0.8;
const LAMP_REACH: f64 = 0.35;
/// Size range of painted shapes, in texels of a tile.
const SHAPE_SIZE: std::ops::Range<f64> = 4.0..24.0;
/// Number of shapes painted per tile.
const SHAPES: std::ops::Range<u32> = 30..60;
/// Amplitude of per-texel noise.
const GRAIN: f32 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub seed: u64,
    /// Room extent along world x, y (vertical) and z, meters.
    pub dims: [f64; 3],
    pub objects: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            seed: 0,
            dims: [10.0, 3.0, 10.0],
            objects: 8,
        }
    }
}

/// A generated room together with the layout used to place cameras.
#[derive(Debug, Clone)]
pub struct RoomLayout {
    pub scene: Scene,
    pub room: Aabb,
    pub boxes: Vec<Aabb>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Surface {
    Floor,
    Ceiling,
    Wall,
    Object,
}

impl Surface {
    /// Range of base brightness for this kind of surface.
    fn brightness(self) -> std::ops::Range<f32> {
        match self {
            Surface::Floor => 0.55..0.75,
            Surface::Ceiling => 0.6..0.8,
            Surface::Wall => 0.2..0.4,
            Surface::Object => 0.7..0.95,
        }
    }
}

struct Quad {
    base: [f32; 3],
    origin: Vector3<f64>,
    du: Vector3<f64>,
    dv: Vector3<f64>,
}

struct Builder {
    vertices: Vec<Vector3<f64>>,
    colors: Vec<[f32; 3]>,
    uvs: Vec<[f32; 2]>,
    triangles: Vec<[u32; 3]>,
    // base brightness per quad; one texture tile per quad, painted later
    quads: Vec<Quad>,
}

impl Builder {
    /// Quad `origin + s*du + t*dv` for `s, t` in `[0, 1]`.
    fn quad(&mut self, base: [f32; 3], origin: Vector3<f64>, du: Vector3<f64>, dv: Vector3<f64>) {
        let first = self.vertices.len() as u32;
        self.vertices
            .extend([origin, origin + du, origin + du + dv, origin + dv]);
        self.triangles.push([first, first + 1, first + 2]);
        self.triangles.push([first, first + 2, first + 3]);
        self.quads.push(Quad { base, origin, du, dv });
    }

    /// Splits a face into panels no larger than `MAX_PANEL`.
    fn panelled(&mut self, base: [f32; 3], origin: Vector3<f64>, du: Vector3<f64>, dv: Vector3<f64>) {
        let nu = (du.norm() / MAX_PANEL).ceil().max(1.0) as usize;
        let nv = (dv.norm() / MAX_PANEL).ceil().max(1.0) as usize;
        let (su, sv) = (du / nu as f64, dv / nv as f64);
        for i in 0..nu {
            for j in 0..nv {
                self.quad(base, origin + su * i as f64 + sv * j as f64, su, sv);
            }
        }
    }
}

/// A color of brightness `level` with a random tint.
fn tinted(level: f32, rng: &mut ChaCha8Rng) -> [f32; 3] {
    [(); 3].map(|_| (level + rng.random_range(-0.08..0.08f32)).clamp(0.0, 1.0))
}

/// Base color of one face: brightness by surface kind, random tint.
fn face(kind: Surface, rng: &mut ChaCha8Rng) -> [f32; 3] {
    let level = rng.random_range(kind.brightness());
    tinted(level, rng)
}

/// Paints one texture tile: base color for the surface kind, random
/// rectangles and discs around it, light noise. Returns the tile mean.
fn paint_tile(
    atlas: &mut Image,
    col: u32,
    row: u32,
    quad: &Quad,
    light: &dyn Fn(&Vector3<f64>) -> f32,
    rng: &mut ChaCha8Rng,
) -> [f32; 3] {
    let base = quad.base;
    let mut tile = vec![base; (TILE * TILE) as usize];
    let level = (base[0] + base[1] + base[2]) / 3.0;
    let shapes = rng.random_range(SHAPES);
    for _ in 0..shapes {
        let color = tinted(level + rng.random_range(-CONTRAST..CONTRAST), rng);
        let size = rng.random_range(SHAPE_SIZE);
        let cx = rng.random_range(0.0..TILE as f64);
        let cy = rng.random_range(0.0..TILE as f64);
        let disc = rng.random_bool(0.5);
        let aspect = rng.random_range(0.4..2.5f64);
        for y in 0..TILE {
            for x in 0..TILE {
                let dx = x as f64 + 0.5 - cx;
                let dy = y as f64 + 0.5 - cy;
                let inside = if disc {
                    dx * dx + dy * dy <= 0.25 * size * size
                } else {
                    dx.abs() <= 0.5 * size * aspect && dy.abs() <= 0.5 * size / aspect
                };
                if inside {
                    tile[(y * TILE + x) as usize] = color;
                }
            }
        }
    }
    let mut mean = [0.0f64; 3];
    for y in 0..TILE {
        for x in 0..TILE {
            let mut c = tile[(y * TILE + x) as usize];
            let n: f32 = rng.random_range(-GRAIN..GRAIN);
            // texel row 0 is the top of the quad (the `dv` end)
            let s = (x as f64 + 0.5) / TILE as f64;
            let t = 1.0 - (y as f64 + 0.5) / TILE as f64;
            let lit = light(&(quad.origin + quad.du * s + quad.dv * t));
            for v in c.iter_mut() {
                *v = ((*v + n) * lit).clamp(0.0, 1.0);
            }
            for k in 0..3 {
                mean[k] += c[k] as f64;
            }
            atlas.put_pixel(col * TILE + x, row * TILE + y, image::Rgb(c));
        }
    }
    mean.map(|m| (m / (TILE * TILE) as f64) as f32)
}

/// Generates a deterministic textured room: floor, ceiling and four walls
/// split into panels, plus `objects` random boxes standing on the floor.
pub fn make_synthetic_scene(spec: &SyntheticSpec) -> Result<Scene> {
    Ok(RoomLayout::generate(spec)?.scene)
}

impl RoomLayout {
    pub fn generate(spec: &SyntheticSpec) -> Result<RoomLayout> {
        let [dx, dy, dz] = spec.dims;
        if !(dx > 0.0 && dy > 0.0 && dz > 0.0) || !(dx.is_finite() && dy.is_finite() && dz.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "room dimensions must be positive, got {:?}",
                spec.dims
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut b = Builder {
            vertices: Vec::new(),
            colors: Vec::new(),
            uvs: Vec::new(),
            triangles: Vec::new(),
            quads: Vec::new(),
        };
        let (x, y, z) = (Vector3::x(), Vector3::y(), Vector3::z());
        let o = Vector3::zeros();
        // floor, ceiling, walls at z=0, z=dz, x=0, x=dx
        b.panelled(face(Surface::Floor, &mut rng), o, x * dx, z * dz);
        b.panelled(face(Surface::Ceiling, &mut rng), y * dy, z * dz, x * dx);
        b.panelled(face(Surface::Wall, &mut rng), o, y * dy, x * dx);
        b.panelled(face(Surface::Wall, &mut rng), z * dz, x * dx, y * dy);
        b.panelled(face(Surface::Wall, &mut rng), o, z * dz, y * dy);
        b.panelled(face(Surface::Wall, &mut rng), x * dx, y * dy, z * dz);

        let mut boxes = Vec::with_capacity(spec.objects);
        let margin = 0.1 * dx.min(dz);
        for _ in 0..spec.objects {
            let sx = rng.random_range(0.4..1.6f64).min(0.4 * dx);
            let sz = rng.random_range(0.4..1.6f64).min(0.4 * dz);
            let sy = rng.random_range(0.3..2.0f64).min(0.8 * dy);
            let px = rng.random_range(margin..(dx - margin - sx).max(margin + 1e-6));
            let pz = rng.random_range(margin..(dz - margin - sz).max(margin + 1e-6));
            let min = Vector3::new(px, 0.0, pz);
            let max = min + Vector3::new(sx, sy, sz);
            boxes.push(Aabb { min, max });
            // top and four sides; the bottom rests on the floor
            let base = face(Surface::Object, &mut rng);
            b.quad(base, Vector3::new(px, sy, pz), z * sz, x * sx);
            b.quad(base, min, x * sx, y * sy);
            b.quad(base, Vector3::new(px, 0.0, pz + sz), y * sy, x * sx);
            b.quad(base, min, y * sy, z * sz);
            b.quad(base, Vector3::new(px + sx, 0.0, pz), z * sz, y * sy);
        }

        let quads = b.quads.len() as u32;
        let lamp = Vector3::new(0.5 * dx, LAMP_HEIGHT * dy, 0.5 * dz);
        let reach = LAMP_REACH * spec.dims.iter().map(|d| d * d).sum::<f64>().sqrt();
        let light = move |p: &Vector3<f64>| {
            let r = (p - lamp).norm() / reach;
            (AMBIENT + (1.0 - AMBIENT) / (1.0 + r * r)) as f32
        };
        let cols = (quads as f64).sqrt().ceil() as u32;
        let rows = quads.div_ceil(cols);
        let mut atlas = Image::new(cols * TILE, rows * TILE);
        let (aw, ah) = (atlas.width() as f32, atlas.height() as f32);
        for q in 0..quads {
            let (col, row) = (q % cols, q / cols);
            let mean = paint_tile(&mut atlas, col, row, &b.quads[q as usize], &light, &mut rng);
            let u0 = (col * TILE) as f32 / aw + 0.5 / aw;
            let u1 = ((col + 1) * TILE) as f32 / aw - 0.5 / aw;
            let v_top = 1.0 - (row * TILE) as f32 / ah - 0.5 / ah;
            let v_bot = 1.0 - ((row + 1) * TILE) as f32 / ah + 0.5 / ah;
            b.uvs
                .extend([[u0, v_bot], [u1, v_bot], [u1, v_top], [u0, v_top]]);
            b.colors.extend([mean; 4]);
        }

        let room = Aabb {
            min: Vector3::zeros(),
            max: Vector3::new(dx, dy, dz),
        };
        let scene = Scene::new(
            b.vertices,
            b.triangles,
            Some(b.colors),
            Some(Texture {
                image: atlas,
                uvs: b.uvs,
            }),
        )?;
        Ok(RoomLayout { scene, room, boxes })
    }

    /// Distance along a ray to the first box or wall, `inf` if none.
    pub fn ray_distance(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> f64 {
        let mut best = f64::INFINITY;
        for b in &self.boxes {
            if let Some((t0, _)) = ray_aabb(origin, dir, b) {
                if t0 > 0.0 {
                    best = best.min(t0);
                }
            }
        }
        if let Some((_, t1)) = ray_aabb(origin, dir, &self.room) {
            if t1 > 0.0 {
                best = best.min(t1);
            }
        }
        best
    }

    /// Samples a camera inside free space at roughly eye height, looking
    /// mostly horizontally at a surface at least `min_view_distance` away.
    pub fn sample_camera<R: Rng + ?Sized>(&self, rng: &mut R, min_view_distance: f64) -> Pose {
        let size = self.room.max - self.room.min;
        let margin = 0.15 * size.x.min(size.z);
        let clearance = 0.4;
        loop {
            let c = Vector3::new(
                self.room.min.x + rng.random_range(margin..size.x - margin),
                self.room.min.y + rng.random_range(0.4..0.6) * size.y,
                self.room.min.z + rng.random_range(margin..size.z - margin),
            );
            let blocked = self.boxes.iter().any(|b| {
                let grown = Aabb {
                    min: b.min.add_scalar(-clearance),
                    max: b.max.add_scalar(clearance),
                };
                grown.contains(&c)
            });
            if blocked {
                continue;
            }
            let yaw: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let pitch: f64 = rng.random_range(-8.0f64..8.0).to_radians();
            let dir = Vector3::new(yaw.cos() * pitch.cos(), pitch.sin(), yaw.sin() * pitch.cos());
            if self.ray_distance(&c, &dir) < min_view_distance {
                continue;
            }
            return Pose::look_at(c, c + dir).expect("non-vertical view direction");
        }
    }
}

fn ray_aabb(origin: &Vector3<f64>, dir: &Vector3<f64>, b: &Aabb) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for i in 0..3 {
        if dir[i].abs() < 1e-15 {
            if origin[i] < b.min[i] || origin[i] > b.max[i] {
                return None;
            }
            continue;
        }
        let a = (b.min[i] - origin[i]) / dir[i];
        let c = (b.max[i] - origin[i]) / dir[i];
        t0 = t0.max(a.min(c));
        t1 = t1.min(a.max(c));
    }
    (t0 <= t1).then_some((t0, t1))
}
