//! Adaptive binary tree over light indices, steered by gathered-photon counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How counts from earlier iterations are carried into the next one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CountUpdate {
    /// Multiply existing counts by the factor before new records arrive.
    Decay(f64),
    /// Forget previous counts entirely.
    Replace,
}

impl Default for CountUpdate {
    fn default() -> Self {
        CountUpdate::Decay(0.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightTreeConfig {
    /// Virtual count added to every node when choosing between children.
    pub prior: f64,
    pub branch_threshold: f64,
    pub update: CountUpdate,
}

impl Default for LightTreeConfig {
    fn default() -> Self {
        Self {
            prior: 1.0,
            branch_threshold: 64.0,
            update: CountUpdate::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Node {
    count: f64,
    lo: usize,
    hi: usize,
    children: Option<(usize, usize)>,
}

impl Node {
    fn leaf(lo: usize, hi: usize, count: f64) -> Self {
        Self {
            count,
            lo,
            hi,
            children: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightTree {
    nodes: Vec<Node>,
    num_lights: usize,
    pub config: LightTreeConfig,
}

impl LightTree {
    pub fn new(num_lights: usize, config: LightTreeConfig) -> Result<Self> {
        if num_lights == 0 {
            return Err(Error::InvalidConfig("light tree needs at least one light".into()));
        }
        if !(config.prior >= 0.0) || !(config.branch_threshold >= 0.0) {
            return Err(Error::InvalidConfig("light tree prior and threshold must be >= 0".into()));
        }
        Ok(Self {
            nodes: vec![Node::leaf(0, num_lights, 0.0)],
            num_lights,
            config,
        })
    }

    pub fn num_lights(&self) -> usize {
        self.num_lights
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn root_count(&self) -> f64 {
        self.nodes[0].count
    }

    /// Light ranges `[lo, hi)` of the current leaves, with their counts.
    pub fn leaves(&self) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<_> = self
            .nodes
            .iter()
            .filter(|n| n.children.is_none())
            .map(|n| (n.lo, n.hi, n.count))
            .collect();
        out.sort_by_key(|l| l.0);
        out
    }

    fn left_probability(&self, left: usize, right: usize) -> f64 {
        let p = self.config.prior;
        let (a, b) = (self.nodes[left].count + p, self.nodes[right].count + p);
        if a + b > 0.0 {
            a / (a + b)
        } else {
            // Zero prior and zero counts: split by range size.
            let (l, r) = (&self.nodes[left], &self.nodes[right]);
            (l.hi - l.lo) as f64 / (r.hi - l.lo) as f64
        }
    }

    /// Draws a light with `u` in `[0, 1)`; returns the index and its exact pmf.
    pub fn sample(&self, u: f64) -> (usize, f64) {
        let mut u = u.clamp(0.0, 1.0 - f64::EPSILON);
        let mut node = 0;
        let mut pmf = 1.0;
        while let Some((l, r)) = self.nodes[node].children {
            let pl = self.left_probability(l, r);
            if u < pl {
                u /= pl;
                pmf *= pl;
                node = l;
            } else {
                u = ((u - pl) / (1.0 - pl)).min(1.0 - f64::EPSILON);
                pmf *= 1.0 - pl;
                node = r;
            }
        }
        let n = &self.nodes[node];
        let size = n.hi - n.lo;
        let idx = n.lo + ((u * size as f64) as usize).min(size - 1);
        (idx, pmf / size as f64)
    }

    pub fn pmf(&self, light: usize) -> Result<f64> {
        if light >= self.num_lights {
            return Err(Error::LightOutOfRange {
                index: light,
                count: self.num_lights,
            });
        }
        let mut node = 0;
        let mut pmf = 1.0;
        while let Some((l, r)) = self.nodes[node].children {
            let pl = self.left_probability(l, r);
            if light < self.nodes[l].hi {
                pmf *= pl;
                node = l;
            } else {
                pmf *= 1.0 - pl;
                node = r;
            }
        }
        let n = &self.nodes[node];
        Ok(pmf / (n.hi - n.lo) as f64)
    }

    /// Applies the configured carry-over rule. Call once per iteration before
    /// recording that iteration's gathers.
    pub fn begin_iteration(&mut self) {
        let f = match self.config.update {
            CountUpdate::Decay(f) => f,
            CountUpdate::Replace => 0.0,
        };
        for n in &mut self.nodes {
            n.count *= f;
        }
    }

    /// Adds `gathered` to every node on the path from the root to `light`.
    pub fn record(&mut self, light: usize, gathered: u64) -> Result<()> {
        if light >= self.num_lights {
            return Err(Error::LightOutOfRange {
                index: light,
                count: self.num_lights,
            });
        }
        let g = gathered as f64;
        let mut node = 0;
        loop {
            self.nodes[node].count += g;
            match self.nodes[node].children {
                Some((l, r)) => node = if light < self.nodes[l].hi { l } else { r },
                None => break,
            }
        }
        Ok(())
    }

    /// Splits every leaf whose count exceeds the threshold and that covers more
    /// than one light. Children start with half the parent's count.
    pub fn refine(&mut self) {
        let existing = self.nodes.len();
        for i in 0..existing {
            let n = &self.nodes[i];
            if n.children.is_some() || n.hi - n.lo < 2 || n.count <= self.config.branch_threshold {
                continue;
            }
            let (lo, hi, half) = (n.lo, n.hi, n.count * 0.5);
            let mid = lo + (hi - lo).div_ceil(2);
            let l = self.nodes.len();
            self.nodes.push(Node::leaf(lo, mid, half));
            self.nodes.push(Node::leaf(mid, hi, half));
            self.nodes[i].children = Some((l, l + 1));
        }
    }
}
