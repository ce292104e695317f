//! Scene geometry, materials, lights and camera.

mod builtin;
mod bvh;
mod desc;
mod geometry;

use std::f64::consts::PI;

pub use builtin::{
    glass_sphere_scene, no_caster_scene, parallax_scene, two_caster_scene, visibility_toy_scene,
};
pub use bvh::{Bvh, Primitive, Shape};
pub use desc::{
    CameraDesc, GeometryDesc, LightDesc, Material, MaterialDesc, MeshData, SceneDesc, SurfaceDesc,
};
pub use geometry::{Aabb, Ray, Sphere, Triangle};

use crate::error::{Error, Result};
use crate::sampling::{uniform_triangle, Frame};
use crate::vec3::{Rgb, Vec3};

#[derive(Clone, Debug, PartialEq)]
pub enum Light {
    Point {
        position: Vec3,
        intensity: Rgb,
    },
    Rect {
        corner: Vec3,
        edge_u: Vec3,
        edge_v: Vec3,
        radiance: Rgb,
        normal: Vec3,
        area: f64,
    },
    Directional {
        /// Unit propagation direction.
        direction: Vec3,
        irradiance: Rgb,
    },
}

impl Light {
    fn from_desc(d: &LightDesc) -> Result<Self> {
        Ok(match *d {
            LightDesc::Point {
                position,
                intensity,
            } => Light::Point {
                position,
                intensity,
            },
            LightDesc::Rect {
                corner,
                edge_u,
                edge_v,
                radiance,
            } => {
                let c = edge_u.cross(edge_v);
                let area = c.length();
                if !(area > 0.0) {
                    return Err(Error::InvalidScene("rect light has zero area".into()));
                }
                Light::Rect {
                    corner,
                    edge_u,
                    edge_v,
                    radiance,
                    normal: c / area,
                    area,
                }
            }
            LightDesc::Directional {
                direction,
                irradiance,
            } => {
                if !(direction.length() > 0.0) {
                    return Err(Error::InvalidScene("directional light needs a direction".into()));
                }
                Light::Directional {
                    direction: direction.normalize(),
                    irradiance,
                }
            }
        })
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Light::Directional { .. })
    }

    /// Reference point: the position, rect center, or `None` for infinite lights.
    pub fn center(&self) -> Option<Vec3> {
        match *self {
            Light::Point { position, .. } => Some(position),
            Light::Rect {
                corner,
                edge_u,
                edge_v,
                ..
            } => Some(corner + (edge_u + edge_v) * 0.5),
            Light::Directional { .. } => None,
        }
    }

    /// Point on a rect light from two uniforms; the position for point lights.
    pub fn position_on(&self, u1: f64, u2: f64) -> Option<Vec3> {
        match *self {
            Light::Point { position, .. } => Some(position),
            Light::Rect {
                corner,
                edge_u,
                edge_v,
                ..
            } => Some(corner + edge_u * u1 + edge_v * u2),
            Light::Directional { .. } => None,
        }
    }

    /// Emitted power for finite lights; power through a disk of radius
    /// `scene_radius` for infinite ones.
    pub fn power(&self, scene_radius: f64) -> Rgb {
        match *self {
            Light::Point { intensity, .. } => intensity * (4.0 * PI),
            Light::Rect { radiance, area, .. } => radiance * (PI * area),
            Light::Directional { irradiance, .. } => irradiance * (PI * scene_radius * scene_radius),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    frame: Frame,
    tan_half_fov: f64,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    fn from_desc(d: &CameraDesc) -> Result<Self> {
        let forward = (d.look_at - d.position).normalize();
        if forward == Vec3::ZERO || !(d.fov > 0.0 && d.fov < 180.0) || d.width == 0 || d.height == 0 {
            return Err(Error::InvalidScene("camera is degenerate".into()));
        }
        let right = forward.cross(d.up).normalize();
        if right == Vec3::ZERO {
            return Err(Error::InvalidScene("camera up is parallel to view direction".into()));
        }
        let up = right.cross(forward);
        Ok(Self {
            position: d.position,
            frame: Frame {
                s: right,
                t: up,
                n: forward,
            },
            tan_half_fov: (d.fov.to_radians() * 0.5).tan(),
            width: d.width,
            height: d.height,
        })
    }

    /// Ray through image position `(px, py)` in pixel units, origin top-left.
    pub fn ray(&self, px: f64, py: f64) -> Ray {
        let aspect = self.width as f64 / self.height as f64;
        let sx = (2.0 * px / self.width as f64 - 1.0) * self.tan_half_fov * aspect;
        let sy = (1.0 - 2.0 * py / self.height as f64) * self.tan_half_fov;
        let d = self.frame.to_world(Vec3::new(sx, sy, 1.0)).normalize();
        Ray::new(self.position, d)
    }

    /// Inverse of [`Camera::ray`]: continuous pixel coordinates of a world point, if in front.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let l = self.frame.to_local(p - self.position);
        if l.z <= 0.0 {
            return None;
        }
        let aspect = self.width as f64 / self.height as f64;
        let sx = l.x / l.z / (self.tan_half_fov * aspect);
        let sy = l.y / l.z / self.tan_half_fov;
        Some((
            (sx + 1.0) * 0.5 * self.width as f64,
            (1.0 - sy) * 0.5 * self.height as f64,
        ))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Surface {
    pub name: String,
    pub material: Material,
    pub caster: bool,
    pub receiver: bool,
    pub shapes: Vec<Shape>,
    pub bounds: Aabb,
    area_cdf: Vec<f64>,
}

impl Surface {
    pub fn area(&self) -> f64 {
        *self.area_cdf.last().unwrap_or(&0.0)
    }

    /// Area-uniform point and its outward normal, from three uniforms.
    pub fn sample_point(&self, u0: f64, u1: f64, u2: f64) -> (Vec3, Vec3) {
        let target = u0 * self.area();
        let i = self
            .area_cdf
            .partition_point(|&c| c <= target)
            .min(self.shapes.len() - 1);
        match self.shapes[i] {
            Shape::Sphere(s) => {
                let n = crate::sampling::uniform_sphere(u1, u2);
                (s.center + n * s.radius, n)
            }
            Shape::Triangle(t) => {
                let (b1, b2) = uniform_triangle(u1, u2);
                let p = t.v[0] * (1.0 - b1 - b2) + t.v[1] * b1 + t.v[2] * b2;
                (p, t.normal())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingSphere {
    pub center: Vec3,
    pub radius: f64,
}

impl BoundingSphere {
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub p: Vec3,
    /// Geometric normal, outward for spheres and by winding for triangles.
    pub n: Vec3,
    pub surface: usize,
}

#[derive(Clone, Debug)]
pub struct Scene {
    desc: SceneDesc,
    pub camera: Camera,
    pub lights: Vec<Light>,
    pub surfaces: Vec<Surface>,
    pub bounds: BoundingSphere,
    bvh: Bvh,
}

/// Relative ray offset used to leave a surface.
pub const RAY_EPSILON: f64 = 1e-7;

impl Scene {
    /// Builds a scene whose meshes are all inline.
    pub fn new(desc: SceneDesc) -> Result<Self> {
        Self::with_meshes(desc, |path| {
            Err(Error::InvalidScene(format!("mesh file {path} cannot be resolved here")))
        })
    }

    /// Builds a scene, calling `resolve` for every `obj` mesh reference.
    pub fn with_meshes<F>(desc: SceneDesc, mut resolve: F) -> Result<Self>
    where
        F: FnMut(&str) -> Result<MeshData>,
    {
        if desc.lights.is_empty() {
            return Err(Error::InvalidScene("scene needs at least one light".into()));
        }
        let camera = Camera::from_desc(&desc.camera)?;
        let lights = desc
            .lights
            .iter()
            .map(Light::from_desc)
            .collect::<Result<Vec<_>>>()?;
        let mut surfaces = Vec::with_capacity(desc.surfaces.len());
        for (k, s) in desc.surfaces.iter().enumerate() {
            let name = s.name.clone().unwrap_or_else(|| format!("surface{k}"));
            let material = desc
                .materials
                .iter()
                .find(|m| m.name == s.material)
                .ok_or_else(|| {
                    Error::InvalidScene(format!("{name}: unknown material '{}'", s.material))
                })?
                .material;
            if let Material::Dielectric { ior } = material {
                if !(ior > 0.0) {
                    return Err(Error::InvalidScene(format!("{name}: ior must be positive")));
                }
            }
            let shapes = match &s.geometry {
                GeometryDesc::Sphere { center, radius } => {
                    if !(*radius > 0.0) {
                        return Err(Error::InvalidScene(format!("{name}: sphere radius must be positive")));
                    }
                    vec![Shape::Sphere(Sphere {
                        center: *center,
                        radius: *radius,
                    })]
                }
                GeometryDesc::TriMesh {
                    vertices,
                    faces,
                    obj,
                } => {
                    let mesh = match (vertices, faces, obj) {
                        (Some(v), Some(f), None) => MeshData {
                            vertices: v.clone(),
                            faces: f.clone(),
                        },
                        (None, None, Some(path)) => resolve(path)?,
                        _ => {
                            return Err(Error::InvalidScene(format!(
                                "{name}: tri_mesh needs either vertices and faces, or obj"
                            )))
                        }
                    };
                    let mut tris = Vec::with_capacity(mesh.faces.len());
                    for f in &mesh.faces {
                        if f.iter().any(|&i| i >= mesh.vertices.len()) {
                            return Err(Error::InvalidScene(format!("{name}: face index out of range")));
                        }
                        let t = Triangle::new(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
                        if t.area() > 0.0 {
                            tris.push(Shape::Triangle(t));
                        }
                    }
                    if tris.is_empty() {
                        return Err(Error::InvalidScene(format!("{name}: mesh has no triangles")));
                    }
                    tris
                }
            };
            let mut acc = 0.0;
            let area_cdf = shapes
                .iter()
                .map(|sh| {
                    acc += sh.area();
                    acc
                })
                .collect();
            let bounds = shapes.iter().fold(Aabb::EMPTY, |b, sh| b.union(&sh.bounds()));
            surfaces.push(Surface {
                name,
                material,
                caster: s.caster,
                receiver: s.receiver,
                shapes,
                bounds,
                area_cdf,
            });
        }
        if !surfaces.iter().any(|s| s.receiver) {
            return Err(Error::InvalidScene("scene needs at least one receiver surface".into()));
        }
        if surfaces
            .iter()
            .any(|s| s.receiver && !matches!(s.material, Material::Diffuse { .. }))
        {
            return Err(Error::InvalidScene("receiver surfaces must be diffuse".into()));
        }
        let prims: Vec<Primitive> = surfaces
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.shapes.iter().map(move |&shape| Primitive { shape, surface: i }))
            .collect();
        let bvh = Bvh::build(prims);
        let bb = bvh.bounds();
        let bounds = BoundingSphere {
            center: bb.center(),
            radius: (bb.extent().length() * 0.5).max(1e-9),
        };
        Ok(Self {
            desc,
            camera,
            lights,
            surfaces,
            bounds,
            bvh,
        })
    }

    pub fn desc(&self) -> &SceneDesc {
        &self.desc
    }

    pub fn has_casters(&self) -> bool {
        self.surfaces.iter().any(|s| s.caster)
    }

    pub fn caster_indices(&self) -> Vec<usize> {
        (0..self.surfaces.len()).filter(|&i| self.surfaces[i].caster).collect()
    }

    pub fn intersect(&self, ray: &Ray) -> Option<Hit> {
        let t_min = RAY_EPSILON * (1.0 + self.bounds.radius);
        let (t, i) = self.bvh.intersect(ray, t_min, f64::INFINITY)?;
        let prim = &self.bvh.primitives()[i];
        let p = ray.at(t);
        Some(Hit {
            t,
            p,
            n: prim.shape.normal_at(p),
            surface: prim.surface,
        })
    }

    /// True when nothing blocks the open segment from `a` toward `dir` up to `dist`.
    pub fn unoccluded(&self, a: Vec3, dir: Vec3, dist: f64) -> bool {
        let eps = RAY_EPSILON * (1.0 + self.bounds.radius);
        self.bvh
            .intersect(&Ray::new(a, dir), eps, dist - eps)
            .is_none()
    }

    /// Offsets `p` off its surface to the side `dir` points into.
    pub fn spawn(&self, p: Vec3, n: Vec3, dir: Vec3) -> Vec3 {
        let eps = RAY_EPSILON * 10.0 * (1.0 + self.bounds.radius);
        if dir.dot(n) >= 0.0 {
            p + n * eps
        } else {
            p - n * eps
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenes_validate() {
        for s in [
            glass_sphere_scene(64, 64),
            two_caster_scene(64, 64),
            no_caster_scene(32, 32),
        ] {
            assert!(s.bounds.radius > 0.0);
            assert!(!s.lights.is_empty());
        }
        assert!(glass_sphere_scene(8, 8).has_casters());
        assert!(!no_caster_scene(8, 8).has_casters());
    }

    #[test]
    fn validation_names_the_problem() {
        let mut d = glass_sphere_scene(8, 8).desc().clone();
        for s in &mut d.surfaces {
            s.receiver = false;
        }
        let err = Scene::new(d).unwrap_err().to_string();
        assert!(err.contains("receiver"), "{err}");

        let mut d = glass_sphere_scene(8, 8).desc().clone();
        d.lights.clear();
        assert!(Scene::new(d).unwrap_err().to_string().contains("light"));

        let mut d = glass_sphere_scene(8, 8).desc().clone();
        d.surfaces[0].material = "nope".into();
        assert!(Scene::new(d).unwrap_err().to_string().contains("nope"));
    }

    #[test]
    fn camera_project_inverts_ray() {
        let s = glass_sphere_scene(64, 48);
        let r = s.camera.ray(10.5, 30.25);
        let (x, y) = s.camera.project(r.at(3.0)).unwrap();
        assert!((x - 10.5).abs() < 1e-9 && (y - 30.25).abs() < 1e-9);
    }

    #[test]
    fn surface_sampling_is_area_weighted() {
        let desc = SceneDesc {
            camera: glass_sphere_scene(8, 8).desc().camera.clone(),
            lights: glass_sphere_scene(8, 8).desc().lights.clone(),
            materials: vec![MaterialDesc {
                name: "d".into(),
                material: Material::Diffuse {
                    albedo: Rgb::splat(0.5),
                },
            }],
            surfaces: vec![SurfaceDesc {
                name: None,
                material: "d".into(),
                caster: false,
                receiver: true,
                geometry: GeometryDesc::TriMesh {
                    vertices: Some(vec![
                        Vec3::ZERO,
                        Vec3::X,
                        Vec3::Y,
                        Vec3::new(10.0, 0.0, 0.0),
                        Vec3::new(13.0, 0.0, 0.0),
                        Vec3::new(10.0, 2.0, 0.0),
                    ]),
                    faces: Some(vec![[0, 1, 2], [3, 4, 5]]),
                    obj: None,
                },
            }],
        };
        let s = Scene::new(desc).unwrap();
        let surf = &s.surfaces[0];
        assert!((surf.area() - 3.5).abs() < 1e-12);
        let mut rng = crate::sampling::stream_rng(1, 0, 0, 0);
        use rand::Rng;
        let n = 100_000;
        let second = (0..n)
            .filter(|_| surf.sample_point(rng.random(), rng.random(), rng.random()).0.x >= 10.0)
            .count();
        let frac = second as f64 / n as f64;
        assert!((frac - 3.0 / 3.5).abs() < 0.01, "{frac}");
    }
}
