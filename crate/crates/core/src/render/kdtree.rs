//! Balanced median-split kd-tree over points, stored implicitly in one array.

use crate::vec3::Vec3;

#[derive(Clone, Debug, Default)]
pub struct KdTree {
    // Node `mid` of the range `lo..hi` sits at `(lo + hi) / 2`.
    points: Vec<Vec3>,
    ids: Vec<u32>,
    axes: Vec<u8>,
}

/// One k-NN result: squared distance and the caller's point id.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub dist2: f64,
    pub id: u32,
}

fn axis(p: Vec3, a: u8) -> f64 {
    match a {
        0 => p.x,
        1 => p.y,
        _ => p.z,
    }
}

// Distance first, id breaks ties so results never depend on traversal order.
fn closer(a: &Neighbor, b: &Neighbor) -> bool {
    a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.id < b.id)
}

impl KdTree {
    /// Ids are the positions in `points`.
    pub fn build(points: &[Vec3]) -> Self {
        let mut items: Vec<(Vec3, u32)> = points.iter().copied().zip(0u32..).collect();
        let mut axes = vec![0u8; items.len()];
        Self::build_range(&mut items, &mut axes);
        let (points, ids) = items.into_iter().unzip();
        Self { points, ids, axes }
    }

    fn build_range(items: &mut [(Vec3, u32)], axes: &mut [u8]) {
        if items.is_empty() {
            return;
        }
        let (lo, hi) = items.iter().fold(
            (Vec3::splat(f64::INFINITY), Vec3::splat(f64::NEG_INFINITY)),
            |(lo, hi), (p, _)| (lo.min(*p), hi.max(*p)),
        );
        let e = hi - lo;
        let a = if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        };
        let mid = items.len() / 2;
        items.select_nth_unstable_by(mid, |p, q| axis(p.0, a).total_cmp(&axis(q.0, a)).then(p.1.cmp(&q.1)));
        axes[mid] = a;
        let (left, rest) = items.split_at_mut(mid);
        let (laxes, raxes) = axes.split_at_mut(mid);
        Self::build_range(left, laxes);
        Self::build_range(&mut rest[1..], &mut raxes[1..]);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Up to `k` nearest points within `max_dist` (inclusive) that pass
    /// `keep`, sorted by distance then id.
    pub fn knn<F: Fn(u32) -> bool>(&self, q: Vec3, k: usize, max_dist: f64, keep: F) -> Vec<Neighbor> {
        let mut best = Vec::with_capacity(k + 1);
        if k > 0 {
            self.search(0, self.len(), q, k, max_dist * max_dist, &keep, &mut best);
        }
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn search<F: Fn(u32) -> bool>(
        &self,
        lo: usize,
        hi: usize,
        q: Vec3,
        k: usize,
        max2: f64,
        keep: &F,
        best: &mut Vec<Neighbor>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let p = self.points[mid];
        let cand = Neighbor {
            dist2: p.distance_squared(q),
            id: self.ids[mid],
        };
        if cand.dist2 <= max2 && keep(cand.id) && (best.len() < k || closer(&cand, &best[k - 1])) {
            let pos = best.partition_point(|b| closer(b, &cand));
            best.insert(pos, cand);
            best.truncate(k);
        }
        let a = self.axes[mid];
        let diff = axis(q, a) - axis(p, a);
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, q, k, max2, keep, best);
        let bound = if best.len() == k { best[k - 1].dist2.min(max2) } else { max2 };
        if diff * diff <= bound {
            self.search(far.0, far.1, q, k, max2, keep, best);
        }
    }

    /// Whether any point lies within `r` of `q`.
    pub fn any_within(&self, q: Vec3, r: f64) -> bool {
        !self.knn(q, 1, r, |_| true).is_empty()
    }
}
