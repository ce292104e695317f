use super::geometry::{Aabb, Ray, Sphere, Triangle};
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Sphere(Sphere),
    Triangle(Triangle),
}

impl Shape {
    pub fn bounds(&self) -> Aabb {
        match self {
            Shape::Sphere(s) => s.bounds(),
            Shape::Triangle(t) => t.bounds(),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape::Sphere(s) => s.area(),
            Shape::Triangle(t) => t.area(),
        }
    }

    pub fn intersect(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<f64> {
        match self {
            Shape::Sphere(s) => s.intersect(ray, t_min, t_max),
            Shape::Triangle(t) => t.intersect(ray, t_min, t_max),
        }
    }

    /// Outward (sphere) or winding (triangle) normal at a point on the shape.
    pub fn normal_at(&self, p: Vec3) -> Vec3 {
        match self {
            Shape::Sphere(s) => s.normal_at(p),
            Shape::Triangle(t) => t.normal(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub shape: Shape,
    pub surface: usize,
}

#[derive(Clone, Debug)]
enum BvhNode {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl BvhNode {
    fn bounds(&self) -> &Aabb {
        match self {
            BvhNode::Leaf { bounds, .. } | BvhNode::Inner { bounds, .. } => bounds,
        }
    }
}

/// Median-split bounding volume hierarchy.
#[derive(Clone, Debug)]
pub struct Bvh {
    prims: Vec<Primitive>,
    nodes: Vec<BvhNode>,
}

const LEAF_SIZE: usize = 4;

impl Bvh {
    pub fn build(mut prims: Vec<Primitive>) -> Self {
        let mut nodes = Vec::new();
        if !prims.is_empty() {
            let n = prims.len();
            Self::build_range(&mut prims, &mut nodes, 0, n);
        }
        Self { prims, nodes }
    }

    fn build_range(prims: &mut [Primitive], nodes: &mut Vec<BvhNode>, start: usize, end: usize) -> usize {
        let bounds = prims[start..end]
            .iter()
            .fold(Aabb::EMPTY, |b, p| b.union(&p.shape.bounds()));
        let idx = nodes.len();
        if end - start <= LEAF_SIZE {
            nodes.push(BvhNode::Leaf { bounds, start, end });
            return idx;
        }
        let centroids = prims[start..end]
            .iter()
            .fold(Aabb::EMPTY, |b, p| b.grow(p.shape.bounds().center()));
        let axis = centroids.largest_axis();
        let mid = (start + end) / 2;
        prims[start..end].select_nth_unstable_by(mid - start, |a, b| {
            a.shape.bounds().center()[axis].total_cmp(&b.shape.bounds().center()[axis])
        });
        nodes.push(BvhNode::Leaf { bounds, start, end });
        let left = Self::build_range(prims, nodes, start, mid);
        let right = Self::build_range(prims, nodes, mid, end);
        nodes[idx] = BvhNode::Inner { bounds, left, right };
        idx
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.prims
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes.first().map(|n| *n.bounds()).unwrap_or(Aabb::EMPTY)
    }

    /// Nearest hit as `(t, primitive index)`.
    pub fn intersect(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<(f64, usize)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(f64, usize)> = None;
        let mut t_far = t_max;
        let mut stack = [0usize; 64];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp]];
            if node.bounds().intersect(ray, t_min, t_far).is_none() {
                continue;
            }
            match *node {
                BvhNode::Leaf { start, end, .. } => {
                    for i in start..end {
                        if let Some(t) = self.prims[i].shape.intersect(ray, t_min, t_far) {
                            t_far = t;
                            best = Some((t, i));
                        }
                    }
                }
                BvhNode::Inner { left, right, .. } => {
                    stack[sp] = right;
                    stack[sp + 1] = left;
                    sp += 2;
                }
            }
        }
        best
    }
}
