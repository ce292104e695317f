//! Specular transport shared by photon and camera paths.

use crate::scene::{Hit, Material, Ray, Scene};
use crate::vec3::{Rgb, Vec3};

/// Unpolarized Fresnel reflectance for a ray arriving with `cos_i` (> 0)
/// against the surface, going from index `eta_i` into `eta_t`.
pub fn fresnel_dielectric(cos_i: f64, eta_i: f64, eta_t: f64) -> f64 {
    let sin_t = eta_i / eta_t * (1.0 - cos_i * cos_i).max(0.0).sqrt();
    if sin_t >= 1.0 {
        return 1.0;
    }
    let cos_t = (1.0 - sin_t * sin_t).max(0.0).sqrt();
    let rs = (eta_i * cos_i - eta_t * cos_t) / (eta_i * cos_i + eta_t * cos_t);
    let rp = (eta_t * cos_i - eta_i * cos_t) / (eta_t * cos_i + eta_i * cos_t);
    0.5 * (rs * rs + rp * rp)
}

/// Continues `dir` through a specular surface with outward normal `n`.
/// Dielectrics pick reflection with the Fresnel probability using `u`;
/// the weight stays one either way.
pub fn specular_scatter(material: &Material, dir: Vec3, n: Vec3, u: f64) -> Option<Vec3> {
    match *material {
        Material::Mirror => Some(dir.reflect(n)),
        Material::Dielectric { ior } => {
            let entering = dir.dot(n) < 0.0;
            let (nn, eta_i, eta_t) = if entering { (n, 1.0, ior) } else { (-n, ior, 1.0) };
            let cos_i = -dir.dot(nn);
            let f = fresnel_dielectric(cos_i, eta_i, eta_t);
            if u < f {
                return Some(dir.reflect(nn));
            }
            let eta = eta_i / eta_t;
            let k = 1.0 - eta * eta * (1.0 - cos_i * cos_i);
            // `f == 1` above already covers total internal reflection.
            Some((dir * eta + nn * (eta * cos_i - k.max(0.0).sqrt())).normalize())
        }
        Material::Diffuse { .. } => None,
    }
}

/// Where a caustic photon landed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Deposit {
    pub position: Vec3,
    /// Unit vector back toward where the photon came from.
    pub incident: Vec3,
    pub surface: usize,
    /// Specular throughput along the path (one for mirrors and glass).
    pub throughput: Rgb,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhotonPath {
    pub first_bounce: Option<Vec3>,
    pub deposit: Option<Deposit>,
}

/// Follows one photon from `x0` along `omega`.
///
/// The first hit must be a caster. Specular surfaces are followed; the first
/// diffuse surface ends the path, leaving a deposit if it is a receiver and
/// a caster was hit before. `decide` supplies the lobe choices.
pub fn trace_photon<D: FnMut() -> f64>(
    scene: &Scene,
    x0: Vec3,
    omega: Vec3,
    max_depth: usize,
    mut decide: D,
) -> PhotonPath {
    let mut out = PhotonPath::default();
    let mut ray = Ray::new(x0, omega);
    let mut caster_hits = 0usize;
    for depth in 0..max_depth {
        let Some(Hit { p, n, surface, .. }) = scene.intersect(&ray) else {
            break;
        };
        let s = &scene.surfaces[surface];
        if depth == 0 {
            out.first_bounce = Some(p);
            if !s.caster {
                break;
            }
        }
        if let Material::Diffuse { .. } = s.material {
            if s.receiver && caster_hits > 0 {
                out.deposit = Some(Deposit {
                    position: p,
                    incident: -ray.dir,
                    surface,
                    throughput: Rgb::WHITE,
                });
            }
            break;
        }
        if s.caster {
            caster_hits += 1;
        }
        let Some(d) = specular_scatter(&s.material, ray.dir, n, decide()) else {
            break;
        };
        ray = Ray::new(scene.spawn(p, n, d), d);
    }
    out
}
