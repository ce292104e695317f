//! Small synthetic scenes used by tests, benches and the CLI examples.

use super::desc::{
    CameraDesc, GeometryDesc, LightDesc, Material, MaterialDesc, SceneDesc, SurfaceDesc,
};
use super::Scene;
use crate::vec3::{Rgb, Vec3};

fn material(name: &str, material: Material) -> MaterialDesc {
    MaterialDesc {
        name: name.into(),
        material,
    }
}

/// Horizontal square at height `y`, facing +y.
fn floor(half: f64, y: f64) -> SurfaceDesc {
    SurfaceDesc {
        name: Some("floor".into()),
        material: "white".into(),
        caster: false,
        receiver: true,
        geometry: GeometryDesc::TriMesh {
            vertices: Some(vec![
                Vec3::new(-half, y, -half),
                Vec3::new(half, y, -half),
                Vec3::new(half, y, half),
                Vec3::new(-half, y, half),
            ]),
            faces: Some(vec![[0, 2, 1], [0, 3, 2]]),
            obj: None,
        },
    }
}

fn glass_ball(name: &str, center: Vec3, radius: f64) -> SurfaceDesc {
    SurfaceDesc {
        name: Some(name.into()),
        material: "glass".into(),
        caster: true,
        receiver: false,
        geometry: GeometryDesc::Sphere { center, radius },
    }
}

fn base_materials() -> Vec<MaterialDesc> {
    vec![
        material(
            "white",
            Material::Diffuse {
                albedo: Rgb::splat(0.8),
            },
        ),
        material("glass", Material::Dielectric { ior: 1.5 }),
        material("mirror", Material::Mirror),
    ]
}

fn camera(position: Vec3, look_at: Vec3, fov: f64, width: usize, height: usize) -> CameraDesc {
    CameraDesc {
        position,
        look_at,
        up: Vec3::Y,
        fov,
        width,
        height,
    }
}

/// Glass ball over a 10 x 10 floor, lit by a point light above and to the side.
pub fn glass_sphere_scene(width: usize, height: usize) -> Scene {
    Scene::new(SceneDesc {
        camera: camera(
            Vec3::new(0.0, 2.2, 2.6),
            Vec3::new(-0.2, 0.3, 0.0),
            40.0,
            width,
            height,
        ),
        lights: vec![LightDesc::Point {
            position: Vec3::new(1.0, 5.0, 0.0),
            intensity: Rgb::splat(20.0),
        }],
        materials: base_materials(),
        surfaces: vec![floor(5.0, 0.0), glass_ball("ball", Vec3::new(0.0, 1.5, 0.0), 0.5)],
    })
    .expect("built-in scene is valid")
}

/// Two glass balls at opposite corners of the floor, one point light.
pub fn two_caster_scene(width: usize, height: usize) -> Scene {
    Scene::new(SceneDesc {
        camera: camera(
            Vec3::new(0.0, 3.5, 4.5),
            Vec3::new(0.0, 0.3, 0.0),
            45.0,
            width,
            height,
        ),
        lights: vec![LightDesc::Point {
            position: Vec3::new(0.0, 5.0, 0.0),
            intensity: Rgb::splat(20.0),
        }],
        materials: base_materials(),
        surfaces: vec![
            floor(5.0, 0.0),
            glass_ball("left", Vec3::new(-1.6, 1.4, -0.5), 0.45),
            glass_ball("right", Vec3::new(1.5, 1.2, 0.6), 0.35),
        ],
    })
    .expect("built-in scene is valid")
}

/// Same layout as the glass-ball scene without any caster flags.
pub fn no_caster_scene(width: usize, height: usize) -> Scene {
    let mut desc = glass_sphere_scene(width, height).desc().clone();
    for s in &mut desc.surfaces {
        s.caster = false;
    }
    Scene::new(desc).expect("built-in scene is valid")
}

/// Wide downward-facing rect light with a small ball close below one of its
/// corners, so the direction to the ball changes strongly across the light.
pub fn parallax_scene(width: usize, height: usize) -> Scene {
    Scene::new(SceneDesc {
        camera: camera(
            Vec3::new(0.0, 3.0, 6.0),
            Vec3::new(0.0, 0.5, 0.0),
            45.0,
            width,
            height,
        ),
        lights: vec![LightDesc::Rect {
            corner: Vec3::new(-2.0, 4.0, -2.0),
            edge_u: Vec3::new(0.0, 0.0, 4.0),
            edge_v: Vec3::new(4.0, 0.0, 0.0),
            radiance: Rgb::splat(1.0),
        }],
        materials: base_materials(),
        surfaces: vec![floor(5.0, 0.0), glass_ball("ball", Vec3::new(1.0, 3.2, 0.6), 0.25)],
    })
    .expect("built-in scene is valid")
}

/// One ball seen by a nearby point light and by a directional light whose
/// footprint is the whole (large) scene. The point light's photons hit the
/// ball about a thousand times more often; the directional light carries
/// correspondingly more power so both deliver similar flux to the ball.
pub fn visibility_toy_scene() -> Scene {
    let radius = 0.5;
    let half = 100.0;
    Scene::new(SceneDesc {
        camera: camera(
            Vec3::new(0.0, 6.0, 8.0),
            Vec3::new(0.0, 0.0, 0.0),
            40.0,
            32,
            32,
        ),
        lights: vec![
            LightDesc::Point {
                position: Vec3::new(0.0, 3.24, 0.0),
                intensity: Rgb::splat(1.0),
            },
            LightDesc::Directional {
                direction: Vec3::new(0.0, -1.0, 0.0),
                irradiance: Rgb::splat(1.0),
            },
        ],
        materials: base_materials(),
        surfaces: vec![floor(half, 0.0), glass_ball("ball", Vec3::new(0.0, 1.0, 0.0), radius)],
    })
    .expect("built-in scene is valid")
}
