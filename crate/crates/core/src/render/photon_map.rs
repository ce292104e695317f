//! Stored caustic photons and density estimation.

use std::f64::consts::PI;

use super::kdtree::KdTree;
use crate::vec3::{Rgb, Vec3};

/// Nearest photons used per density estimate.
pub const GATHER_K: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Photon {
    pub position: Vec3,
    /// Unit vector back toward where the photon came from.
    pub incident: Vec3,
    /// Power carried, already divided by the emission density. Still to be
    /// divided by the number of emitted photons.
    pub flux: Rgb,
    pub light: u32,
    /// Index of the emission that produced this photon.
    pub emission: u32,
    pub first_bounce: Vec3,
    pub emission_pdf: f64,
}

#[derive(Clone, Debug, Default)]
pub struct PhotonMap {
    photons: Vec<Photon>,
    tree: KdTree,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gather {
    pub radiance: Rgb,
    pub radius: f64,
    /// Indices into [`PhotonMap::photons`].
    pub ids: Vec<u32>,
}

impl PhotonMap {
    pub fn build(photons: Vec<Photon>) -> Self {
        let pts: Vec<Vec3> = photons.iter().map(|p| p.position).collect();
        Self {
            tree: KdTree::build(&pts),
            photons,
        }
    }

    pub fn photons(&self) -> &[Photon] {
        &self.photons
    }

    pub fn len(&self) -> usize {
        self.photons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.photons.is_empty()
    }

    /// Reflected radiance of a diffuse point from its nearest photons.
    ///
    /// Up to [`GATHER_K`] photons arriving from the side `normal` faces are
    /// taken within `max_radius`. With a full set the radius shrinks to the
    /// farthest one and the sum is scaled by `(k - 1) / k`, which removes the
    /// bias of a radius chosen by the k-th neighbor. Otherwise the radius
    /// stays at `max_radius`.
    pub fn gather(&self, x: Vec3, normal: Vec3, max_radius: f64, albedo: Rgb, n_emitted: f64) -> Gather {
        let found = self.tree.knn(x, GATHER_K, max_radius, |i| {
            self.photons[i as usize].incident.dot(normal) > 0.0
        });
        let (radius, scale) = if found.len() == GATHER_K {
            (
                found[GATHER_K - 1].dist2.sqrt(),
                (GATHER_K - 1) as f64 / GATHER_K as f64,
            )
        } else {
            (max_radius, 1.0)
        };
        let mut flux = Rgb::BLACK;
        for n in &found {
            flux += self.photons[n.id as usize].flux;
        }
        let radiance = if found.is_empty() || radius <= 0.0 || n_emitted <= 0.0 {
            Rgb::BLACK
        } else {
            flux * albedo * (scale / (PI * PI * radius * radius * n_emitted))
        };
        Gather {
            radiance,
            radius,
            ids: found.iter().map(|n| n.id).collect(),
        }
    }
}
