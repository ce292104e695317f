//! Serializable scene description, the on-disk JSON format.

use serde::{Deserialize, Serialize};

use crate::vec3::{Rgb, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDesc {
    pub camera: CameraDesc,
    pub lights: Vec<LightDesc>,
    pub materials: Vec<MaterialDesc>,
    pub surfaces: Vec<SurfaceDesc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraDesc {
    pub position: Vec3,
    pub look_at: Vec3,
    #[serde(default = "default_up")]
    pub up: Vec3,
    /// Vertical field of view in degrees.
    pub fov: f64,
    pub width: usize,
    pub height: usize,
}

fn default_up() -> Vec3 {
    Vec3::Y
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LightDesc {
    /// Isotropic point source; `intensity` in W/sr.
    Point { position: Vec3, intensity: Rgb },
    /// One-sided rectangle emitting along `edge_u x edge_v`.
    Rect {
        corner: Vec3,
        edge_u: Vec3,
        edge_v: Vec3,
        radiance: Rgb,
    },
    /// Light arriving from infinity, travelling along `direction`;
    /// `irradiance` is measured perpendicular to it.
    Directional { direction: Vec3, irradiance: Rgb },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Material {
    Diffuse { albedo: Rgb },
    Mirror,
    Dielectric { ior: f64 },
}

impl Material {
    pub fn is_specular(&self) -> bool {
        !matches!(self, Material::Diffuse { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialDesc {
    pub name: String,
    #[serde(flatten)]
    pub material: Material,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDesc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub material: String,
    #[serde(default)]
    pub caster: bool,
    #[serde(default)]
    pub receiver: bool,
    #[serde(flatten)]
    pub geometry: GeometryDesc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeometryDesc {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    /// Either inline `vertices` + `faces`, or an `obj` file path.
    TriMesh {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vertices: Option<Vec<Vec3>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        faces: Option<Vec<[usize; 3]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        obj: Option<String>,
    },
}

/// Triangle mesh as vertex positions and index triples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeshData {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}
