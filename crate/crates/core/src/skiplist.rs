//! Randomized multi-level list for the barrier solver's dual maps.
//!
//! The bottom level is the full knot sequence of a continuous increasing
//! map. Upper levels skip over knots and store the length and relative rise
//! of the span they cover, so the zero crossing can be found top-down in
//! expected logarithmic time. As in [`crate::pwl`], slopes and rises are
//! relative to a step counter `m`: an edge of length `len` and relative rise
//! `r` actually rises by `r + m · len`.
//!
//! Lengths, rises and the precursor anchor are kept in double-double
//! precision. The map spreads by `2λ` at every step, so the anchor and the
//! long upper spans grow large while the zero crossing is read off as a
//! small difference of them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::link::BregmanLink;

type Dd = TwoFloat;

fn dd(x: f64) -> Dd {
    Dd::from(x)
}

#[derive(Debug, Clone)]
struct Node {
    next: Vec<Option<usize>>,
    len: Vec<Dd>,
    /// Relative rise per level; entry 0 is unused.
    rise: Vec<Dd>,
    /// Relative slope of the bottom edge.
    slope: f64,
}

impl Node {
    fn with_height(h: usize) -> Self {
        Node {
            next: vec![None; h],
            len: vec![Dd::default(); h],
            rise: vec![Dd::default(); h],
            slope: 0.0,
        }
    }

    fn height(&self) -> usize {
        self.next.len()
    }
}

/// Per-level bracket found by [`LazySkipList::find_zero`]: the last node at
/// that level whose value is ≤ 0, with its position and value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEntry {
    node: usize,
    u: Dd,
    alpha: Dd,
}

impl PathEntry {
    pub fn u(&self) -> f64 {
        self.u.hi()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.hi()
    }
}

#[derive(Debug, Clone)]
pub struct SearchPath {
    pub z: f64,
    levels: Vec<PathEntry>,
}

impl SearchPath {
    pub fn levels(&self) -> &[PathEntry] {
        &self.levels
    }
}

#[derive(Debug, Clone)]
pub struct LazySkipList {
    nodes: Vec<Node>,
    precursor: usize,
    /// Position and value of the precursor (leftmost) node.
    v0: Dd,
    alpha0: Dd,
    steps: u64,
    left_slope: f64,
    right_slope: f64,
    max_level: usize,
    promote_p: f64,
    rng: ChaCha8Rng,
    visited: usize,
}

impl LazySkipList {
    /// The zero map, sized for about `n` insertions.
    pub fn new(n: usize, seed: u64, promote_p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&promote_p) {
            return Err(Error::InvalidParameter(format!(
                "promotion probability must be in [0, 1), got {promote_p}"
            )));
        }
        let max_level = (n.max(2) as f64).log2().ceil() as usize + 4;
        Ok(LazySkipList {
            nodes: vec![Node::with_height(max_level)],
            precursor: 0,
            v0: Dd::default(),
            alpha0: Dd::default(),
            steps: 0,
            left_slope: 0.0,
            right_slope: 0.0,
            max_level,
            promote_p,
            rng: ChaCha8Rng::seed_from_u64(seed),
            visited: 0,
        })
    }

    fn m(&self) -> f64 {
        self.steps as f64
    }

    /// Total nodes touched by searches so far.
    pub fn visited(&self) -> usize {
        self.visited
    }

    pub fn levels(&self) -> usize {
        self.max_level
    }

    /// `u ↦ old(u) + u − c`.
    pub fn add_shift(&mut self, c: f64) {
        self.alpha0 += self.v0 - c;
        self.steps += 1;
    }

    pub fn add_coordinate(&mut self, y_next: f64, link: &BregmanLink) -> Result<()> {
        if !link.contains(y_next) {
            let (lo, hi) = link.domain();
            return Err(Error::OutsideDomain {
                index: 0,
                value: y_next,
                lo,
                hi,
            });
        }
        self.add_shift(link.forward(y_next));
        Ok(())
    }

    fn bottom_rise(&self, k: usize) -> Dd {
        let n = &self.nodes[k];
        n.len[0] * (n.slope + self.m())
    }

    fn level_rise(&self, k: usize, level: usize) -> Dd {
        if level == 0 {
            self.bottom_rise(k)
        } else {
            let n = &self.nodes[k];
            n.rise[level] + n.len[level] * self.m()
        }
    }

    /// Locates the zero crossing of a strictly increasing map, caching the
    /// per-level brackets for a following [`kvetsh`](Self::kvetsh).
    pub fn find_zero(&mut self) -> Result<SearchPath> {
        let m = self.m();
        if self.alpha0 > 0.0 {
            let sl = self.left_slope + m;
            if sl <= 0.0 {
                return Err(Error::Internal("dual map does not cross zero".into()));
            }
            self.extend_left(self.v0 - self.alpha0 / sl);
        }
        let mut levels = vec![
            PathEntry {
                node: self.precursor,
                u: self.v0,
                alpha: self.alpha0
            };
            self.max_level
        ];
        let mut cur = self.precursor;
        let mut pos = self.v0;
        let mut val = self.alpha0;
        for level in (0..self.max_level).rev() {
            self.visited += 1;
            while let Some(nx) = self.nodes[cur].next[level] {
                let nval = val + self.level_rise(cur, level);
                if nval > 0.0 {
                    break;
                }
                pos += self.nodes[cur].len[level];
                val = nval;
                cur = nx;
                self.visited += 1;
            }
            levels[level] = PathEntry {
                node: cur,
                u: pos,
                alpha: val,
            };
        }
        let z = if val == 0.0 {
            pos
        } else if self.nodes[cur].next[0].is_some() {
            let s = self.nodes[cur].slope + m;
            (pos - val / s).min(pos + self.nodes[cur].len[0])
        } else {
            let sr = self.right_slope + m;
            if sr <= 0.0 {
                return Err(Error::Internal("dual map does not cross zero".into()));
            }
            pos - val / sr
        };
        Ok(SearchPath { z: z.hi(), levels })
    }

    /// Root of the current map.
    pub fn zero_crossing(&mut self) -> Result<f64> {
        Ok(self.find_zero()?.z)
    }

    /// Adds a new precursor at `z` left of the old one, where the map is
    /// zero. The old precursor drops to the bottom level.
    fn extend_left(&mut self, z: Dd) {
        let h = self.max_level;
        let m = self.m();
        let old = self.precursor;
        let gap = self.v0 - z;
        let gap_rise = self.alpha0;
        let mut node = Node::with_height(h);
        node.next[0] = Some(old);
        node.len[0] = gap;
        node.slope = self.left_slope;
        for level in 1..h {
            node.next[level] = self.nodes[old].next[level];
            if node.next[level].is_some() {
                let len = gap + self.nodes[old].len[level];
                let actual = gap_rise + self.level_rise(old, level);
                node.len[level] = len;
                node.rise[level] = actual - len * m;
            }
        }
        let o = &mut self.nodes[old];
        o.next.truncate(1);
        o.len.truncate(1);
        o.rise.truncate(1);
        self.nodes.push(node);
        self.precursor = self.nodes.len() - 1;
        self.v0 = z;
        self.alpha0 = Dd::default();
    }

    fn random_height(&mut self) -> usize {
        let mut h = 1;
        while h < self.max_level && self.rng.random::<f64>() < self.promote_p {
            h += 1;
        }
        h
    }

    /// Splices a flat interval of width `2λ` centred at `path.z`.
    pub fn kvetsh(&mut self, path: &SearchPath, lambda: f64) -> Result<()> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kvetsh needs lambda >= 0, got {lambda}"
            )));
        }
        if lambda == 0.0 {
            return Ok(());
        }
        let m = self.m();
        let z = dd(path.z);
        let width = dd(2.0 * lambda);
        let bottom = path.levels[0];
        let cur = bottom.node;
        let offset = z - bottom.u;
        let hit = offset == 0.0;
        let val_z = if hit {
            bottom.alpha
        } else if self.nodes[cur].next[0].is_some() {
            bottom.alpha + offset * (self.nodes[cur].slope + m)
        } else {
            bottom.alpha + offset * (self.right_slope + m)
        };

        // bottom level: A at z (reusing `cur` on an exact hit), B right after it
        let (a, a_is_new) = if hit {
            (cur, false)
        } else {
            let h = self.random_height();
            let mut node = Node::with_height(h);
            match self.nodes[cur].next[0] {
                Some(nx) => {
                    node.next[0] = Some(nx);
                    node.len[0] = self.nodes[cur].len[0] - offset;
                    node.slope = self.nodes[cur].slope;
                }
                None => self.nodes[cur].slope = self.right_slope,
            }
            self.nodes[cur].len[0] = offset;
            self.nodes.push(node);
            let a = self.nodes.len() - 1;
            self.nodes[cur].next[0] = Some(a);
            (a, true)
        };
        let hb = self.random_height();
        let mut node_b = Node::with_height(hb);
        node_b.next[0] = self.nodes[a].next[0];
        node_b.len[0] = self.nodes[a].len[0];
        node_b.slope = self.nodes[a].slope;
        self.nodes.push(node_b);
        let b = self.nodes.len() - 1;
        self.nodes[a].next[0] = Some(b);
        self.nodes[a].len[0] = width;
        self.nodes[a].slope = -m;

        let ha = if a_is_new { self.nodes[a].height() } else { 0 };
        for level in 1..self.max_level {
            let PathEntry {
                node: p,
                u: pu,
                alpha: pv,
            } = path.levels[level];
            let old_next = self.nodes[p].next[level];
            let old_len = self.nodes[p].len[level];
            let old_end = old_next.map(|_| pv + self.level_rise(p, level));
            let head_len = z - pu;
            let tail_len = old_len - head_len;
            let in_a = level < ha;
            let in_b = level < hb;
            let set = |nodes: &mut Vec<Node>, from: usize, to: Option<usize>, len: Dd, actual: Dd| {
                nodes[from].next[level] = to;
                nodes[from].len[level] = len;
                nodes[from].rise[level] = actual - len * m;
            };
            match (in_a, in_b) {
                (false, false) => {
                    if old_next.is_some() {
                        self.nodes[p].len[level] += width;
                        self.nodes[p].rise[level] -= width * m;
                    }
                }
                (true, true) => {
                    set(&mut self.nodes, p, Some(a), head_len, val_z - pv);
                    set(&mut self.nodes, a, Some(b), width, Dd::default());
                    match old_end {
                        Some(end) => set(&mut self.nodes, b, old_next, tail_len, end - val_z),
                        None => self.nodes[b].next[level] = None,
                    }
                }
                (true, false) => {
                    set(&mut self.nodes, p, Some(a), head_len, val_z - pv);
                    match old_end {
                        Some(end) => set(&mut self.nodes, a, old_next, tail_len + width, end - val_z),
                        None => self.nodes[a].next[level] = None,
                    }
                }
                (false, true) => {
                    set(&mut self.nodes, p, Some(b), head_len + width, val_z - pv);
                    match old_end {
                        Some(end) => set(&mut self.nodes, b, old_next, tail_len, end - val_z),
                        None => self.nodes[b].next[level] = None,
                    }
                }
            }
        }
        self.v0 -= lambda;
        Ok(())
    }

    /// Bottom-level knots as `(u, α)`.
    pub fn knots(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut cur = Some(self.precursor);
        let mut pos = self.v0;
        let mut val = self.alpha0;
        while let Some(k) = cur {
            out.push((pos.hi(), val.hi()));
            pos += self.nodes[k].len[0];
            val += self.bottom_rise(k);
            cur = self.nodes[k].next[0];
        }
        out
    }

    pub fn eval(&self, u: f64) -> f64 {
        let m = self.m();
        if u <= self.v0 {
            return (self.alpha0 - (self.v0 - u) * (self.left_slope + m)).hi();
        }
        let mut k = self.precursor;
        let mut pos = self.v0;
        let mut val = self.alpha0;
        loop {
            match self.nodes[k].next[0] {
                Some(nx) if u > pos + self.nodes[k].len[0] => {
                    pos += self.nodes[k].len[0];
                    val += self.bottom_rise(k);
                    k = nx;
                }
                Some(_) => return (val + (dd(u) - pos) * (self.nodes[k].slope + m)).hi(),
                None => return (val + (dd(u) - pos) * (self.right_slope + m)).hi(),
            }
        }
    }

    /// Largest disagreement between any stored upper-level span and the
    /// length and rise recomputed from the bottom level. Also checks that
    /// every upper-level successor is reachable at the level below.
    pub fn max_level_error(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for level in 1..self.max_level {
            let mut cur = self.precursor;
            while let Some(target) = self.nodes[cur].next[level] {
                let (mut len, mut rise) = (Dd::default(), Dd::default());
                let mut k = cur;
                while k != target {
                    len += self.nodes[k].len[level - 1];
                    rise += self.level_rise(k, level - 1);
                    k = self.nodes[k].next[level - 1]
                        .ok_or_else(|| Error::Internal(format!("level {level} skips past the end")))?;
                }
                let scale = 1.0 + len.hi().abs() + rise.hi().abs();
                worst = worst
                    .max((len - self.nodes[cur].len[level]).hi().abs() / scale)
                    .max((rise - self.level_rise(cur, level)).hi().abs() / scale);
                cur = target;
            }
        }
        Ok(worst)
    }

    /// Number of nodes present at each level.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.max_level];
        for (level, size) in sizes.iter_mut().enumerate() {
            let mut cur = Some(self.precursor);
            while let Some(k) = cur {
                *size += 1;
                cur = self.nodes[k].next[level];
            }
        }
        sizes
    }
}
