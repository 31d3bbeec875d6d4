//! Monotone piecewise-linear dual maps `u ↦ α(u)`.
//!
//! Knots live in a doubly linked list backed by an arena. Positions are not
//! stored per knot: each knot carries the length and slope of the edge to
//! its right, and the list keeps absolute anchors (position and value) for
//! its first and last knot. Slopes are stored relative to a step counter so
//! that adding the identity to the whole map is O(1): the actual slope of a
//! stored edge is `slope + steps`.
//!
//! A knot may carry a vertical jump. Only the sparse fused lasso uses it, to
//! represent the set-valued subgradient of `β|x|` at the origin.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::link::BregmanLink;

#[derive(Debug, Clone, Copy)]
struct Knot {
    prev: Option<usize>,
    next: Option<usize>,
    /// Vertical rise at this knot (right limit minus left limit).
    jump: f64,
    /// Length of the edge to `next`.
    len: f64,
    /// Relative slope of the edge to `next`.
    slope: f64,
}

impl Knot {
    fn new() -> Self {
        Knot {
            prev: None,
            next: None,
            jump: 0.0,
            len: 0.0,
            slope: 0.0,
        }
    }
}

/// Bound hit while clipping: `z_minus` where the map reaches `lo`, `z_plus`
/// where it reaches `hi`. Infinite when the bound is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipRecord {
    pub z_minus: f64,
    pub z_plus: f64,
    pub step_index: usize,
}

/// Centre of a flat interval inserted by [`BreakpointList::kvetsh`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KvetshRecord {
    pub z: f64,
    pub lambda: f64,
}

/// A knot with its position and left-limit value, kept near the last root.
#[derive(Debug, Clone, Copy)]
struct Finger {
    knot: usize,
    pos: f64,
    value: f64,
}

/// Counters used as complexity witnesses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpStats {
    pub inserted: usize,
    pub removed: usize,
    pub visited: usize,
}

/// Continuous (up to explicit jumps) non-decreasing piecewise-linear map.
#[derive(Debug, Clone)]
pub struct BreakpointList {
    knots: Vec<Knot>,
    free: Vec<usize>,
    head: Option<usize>,
    tail: Option<usize>,
    count: usize,
    head_u: f64,
    /// Left limit of the map at the head knot.
    head_alpha: f64,
    tail_u: f64,
    /// Right limit of the map at the tail knot.
    tail_alpha: f64,
    steps: u64,
    left_slope: f64,
    right_slope: f64,
    /// Value at u = 0 while the list holds no knots.
    pending_offset: f64,
    jump_knot: Option<usize>,
    finger: Option<Finger>,
    stats: OpStats,
}

impl Default for BreakpointList {
    fn default() -> Self {
        Self::zero()
    }
}

impl BreakpointList {
    /// The map `u ↦ 0`.
    pub fn zero() -> Self {
        BreakpointList {
            knots: Vec::new(),
            free: Vec::new(),
            head: None,
            tail: None,
            count: 0,
            head_u: 0.0,
            head_alpha: 0.0,
            tail_u: 0.0,
            tail_alpha: 0.0,
            steps: 0,
            left_slope: 0.0,
            right_slope: 0.0,
            pending_offset: 0.0,
            jump_knot: None,
            finger: None,
            stats: OpStats::default(),
        }
    }

    /// Builds a continuous map through `points` (strictly increasing in u)
    /// with the given extension slopes.
    pub fn from_points(points: &[(f64, f64)], left_slope: f64, right_slope: f64) -> Result<Self> {
        let mut map = Self::zero();
        map.left_slope = left_slope;
        map.right_slope = right_slope;
        if points.is_empty() {
            if left_slope != right_slope {
                return Err(Error::InvalidParameter("an affine map needs a single slope".into()));
            }
            return Ok(map);
        }
        let mut prev: Option<usize> = None;
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::InvalidParameter(
                    "points must increase in u and be non-decreasing in alpha".into(),
                ));
            }
        }
        for (j, &(u, _)) in points.iter().enumerate() {
            let k = map.alloc();
            if let Some(p) = prev {
                map.link_after(p, k);
            } else {
                map.head = Some(k);
            }
            if let Some(&(u2, a2)) = points.get(j + 1) {
                map.knots[k].len = u2 - u;
                map.knots[k].slope = (a2 - points[j].1) / (u2 - u);
            }
            prev = Some(k);
        }
        map.tail = prev;
        map.head_u = points[0].0;
        map.head_alpha = points[0].1;
        map.tail_u = points[points.len() - 1].0;
        map.tail_alpha = points[points.len() - 1].1;
        Ok(map)
    }

    pub fn stats(&self) -> OpStats {
        self.stats
    }

    pub fn knot_count(&self) -> usize {
        self.count
    }

    pub fn is_affine(&self) -> bool {
        self.head.is_none()
    }

    fn m(&self) -> f64 {
        self.steps as f64
    }

    fn alloc(&mut self) -> usize {
        self.stats.inserted += 1;
        self.count += 1;
        match self.free.pop() {
            Some(k) => {
                self.knots[k] = Knot::new();
                k
            }
            None => {
                self.knots.push(Knot::new());
                self.knots.len() - 1
            }
        }
    }

    fn release(&mut self, k: usize) {
        self.stats.removed += 1;
        self.count -= 1;
        if self.jump_knot == Some(k) {
            self.jump_knot = None;
        }
        if self.finger.is_some_and(|f| f.knot == k) {
            self.finger = None;
        }
        self.free.push(k);
    }

    /// Links `k` right after `p`, fixing up `tail` when `p` was last.
    fn link_after(&mut self, p: usize, k: usize) {
        let nx = self.knots[p].next;
        self.knots[k].prev = Some(p);
        self.knots[k].next = nx;
        self.knots[p].next = Some(k);
        match nx {
            Some(n) => self.knots[n].prev = Some(k),
            None => self.tail = Some(k),
        }
    }

    fn link_before(&mut self, n: usize, k: usize) {
        let pv = self.knots[n].prev;
        self.knots[k].next = Some(n);
        self.knots[k].prev = pv;
        self.knots[n].prev = Some(k);
        match pv {
            Some(p) => self.knots[p].next = Some(k),
            None => self.head = Some(k),
        }
    }

    fn clear_to_constant(&mut self, value: f64) {
        let mut cur = self.head;
        while let Some(k) = cur {
            cur = self.knots[k].next;
            self.release(k);
        }
        self.head = None;
        self.tail = None;
        self.pending_offset = value;
        self.left_slope = -self.m();
        self.right_slope = -self.m();
    }

    /// `u ↦ old(u) + u − c`.
    pub fn add_shift(&mut self, c: f64) {
        self.steps += 1;
        if self.head.is_none() {
            self.pending_offset -= c;
        } else {
            self.head_alpha += self.head_u - c;
            self.tail_alpha += self.tail_u - c;
            if let Some(f) = &mut self.finger {
                f.value += f.pos - c;
            }
        }
    }

    /// Absorbs the next observation: `u ↦ old(u) + u − ∇φ(y_next)`.
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

    /// Adds `beta · sign(u − at)` with the vertical segment `[−beta, beta]`
    /// at `at`. Repeated calls reuse the same knot while it survives clipping.
    pub fn add_jump(&mut self, at: f64, beta: f64) {
        if beta == 0.0 && self.jump_knot.is_none() {
            return;
        }
        let k = match self.jump_knot {
            Some(k) => k,
            None => {
                let k = self.ensure_knot_at(at);
                self.jump_knot = Some(k);
                k
            }
        };
        self.finger = None;
        self.knots[k].jump += 2.0 * beta;
        self.head_alpha -= beta;
        self.tail_alpha += beta;
    }

    /// Returns a knot positioned exactly at `u`, inserting one if needed.
    fn ensure_knot_at(&mut self, u: f64) -> usize {
        let m = self.m();
        let Some(head) = self.head else {
            let v = (self.left_slope + m) * u + self.pending_offset;
            let k = self.alloc();
            self.head = Some(k);
            self.tail = Some(k);
            self.head_u = u;
            self.tail_u = u;
            self.head_alpha = v;
            self.tail_alpha = v;
            return k;
        };
        if u < self.head_u {
            let k = self.alloc();
            self.knots[k].len = self.head_u - u;
            self.knots[k].slope = self.left_slope;
            self.link_before(head, k);
            self.head_alpha -= (self.left_slope + m) * (self.head_u - u);
            self.head_u = u;
            return k;
        }
        let tail = self.tail.expect("non-empty list has a tail");
        if u > self.tail_u {
            let k = self.alloc();
            self.knots[tail].len = u - self.tail_u;
            self.knots[tail].slope = self.right_slope;
            self.link_after(tail, k);
            self.tail_alpha += (self.right_slope + m) * (u - self.tail_u);
            self.tail_u = u;
            return k;
        }
        let (k, pos) = self.locate(u);
        if pos == u {
            return k;
        }
        let nk = self.alloc();
        let len = self.knots[k].len;
        self.knots[nk].len = len - (u - pos);
        self.knots[nk].slope = self.knots[k].slope;
        self.knots[k].len = u - pos;
        self.link_after(k, nk);
        nk
    }

    /// Walks left from the finger to the first knot satisfying `stop`,
    /// returning it with its position, left-limit value and the number of
    /// knots visited. `None` when there is no finger or the head is reached.
    fn walk_from_finger(&self, stop: impl Fn(f64, f64) -> bool) -> Option<(usize, f64, f64, usize)> {
        let f = self.finger?;
        let m = self.m();
        let (mut k, mut pos, mut v) = (f.knot, f.pos, f.value);
        let mut visited = 0;
        while !stop(pos, v) {
            let p = self.knots[k].prev?;
            let kp = &self.knots[p];
            pos -= kp.len;
            v -= (kp.slope + m) * kp.len + kp.jump;
            k = p;
            visited += 1;
        }
        Some((k, pos, v, visited))
    }

    /// Last knot at or left of `u` (requires head_u ≤ u ≤ tail_u) and its position.
    fn locate(&mut self, u: f64) -> (usize, f64) {
        let (mut k, mut pos) = match self.walk_from_finger(|pos, _| pos <= u) {
            Some((k, pos, _, visited)) => {
                self.stats.visited += visited;
                (k, pos)
            }
            None => (self.head.expect("non-empty"), self.head_u),
        };
        loop {
            self.stats.visited += 1;
            match self.knots[k].next {
                Some(n) if pos + self.knots[k].len <= u => {
                    pos += self.knots[k].len;
                    k = n;
                }
                _ => return (k, pos),
            }
        }
    }

    /// Clamps the map to `[lo, hi]`, trimming knots from both ends.
    pub fn clip(&mut self, lo: f64, hi: f64, step_index: usize) -> Result<ClipRecord> {
        self.finger = None;
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "clip bounds [{lo}, {hi}] are not ordered"
            )));
        }
        let z_minus = self.clip_lower(lo);
        let mut z_plus = self.clip_upper(hi);
        if z_minus.is_finite() && z_plus.is_finite() && z_plus < z_minus {
            z_plus = z_minus;
        }
        Ok(ClipRecord {
            z_minus,
            z_plus,
            step_index,
        })
    }

    fn clip_lower(&mut self, lo: f64) -> f64 {
        if lo == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let m = self.m();
        let Some(head) = self.head else {
            let s = self.left_slope + m;
            if s <= 0.0 {
                if self.pending_offset >= lo {
                    return f64::NEG_INFINITY;
                }
                self.clear_to_constant(lo);
                return f64::INFINITY;
            }
            let z = (lo - self.pending_offset) / s;
            let k = self.alloc();
            self.head = Some(k);
            self.tail = Some(k);
            self.head_u = z;
            self.tail_u = z;
            self.head_alpha = lo;
            self.tail_alpha = lo;
            self.left_slope = -m;
            return z;
        };
        let sl = self.left_slope + m;
        if lo < self.head_alpha {
            if sl <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let z = self.head_u - (self.head_alpha - lo) / sl;
            let k = self.alloc();
            self.knots[k].len = self.head_u - z;
            self.knots[k].slope = self.left_slope;
            self.link_before(head, k);
            self.head_u = z;
            self.head_alpha = lo;
            self.left_slope = -m;
            return z;
        }
        let mut k = head;
        let mut pos = self.head_u;
        let mut v = self.head_alpha;
        loop {
            self.stats.visited += 1;
            let vr = v + self.knots[k].jump;
            if lo <= vr {
                self.knots[k].jump = vr - lo;
                self.head = Some(k);
                self.knots[k].prev = None;
                self.head_u = pos;
                self.head_alpha = lo;
                self.left_slope = -m;
                return pos;
            }
            match self.knots[k].next {
                Some(nk) => {
                    let s = self.knots[k].slope + m;
                    let len = self.knots[k].len;
                    let vn = vr + s * len;
                    if lo < vn {
                        let z = (pos + (lo - vr) / s).min(pos + len);
                        if self.jump_knot == Some(k) {
                            self.jump_knot = None;
                        }
                        self.knots[k].jump = 0.0;
                        self.knots[k].len = len - (z - pos);
                        self.knots[k].prev = None;
                        self.head = Some(k);
                        self.head_u = z;
                        self.head_alpha = lo;
                        self.left_slope = -m;
                        return z;
                    }
                    self.release(k);
                    self.knots[nk].prev = None;
                    self.head = Some(nk);
                    k = nk;
                    pos += len;
                    v = vn;
                }
                None => {
                    let sr = self.right_slope + m;
                    if sr <= 0.0 {
                        self.head = Some(k);
                        self.clear_to_constant(lo);
                        return f64::INFINITY;
                    }
                    let z = pos + (lo - vr) / sr;
                    if self.jump_knot == Some(k) {
                        self.jump_knot = None;
                    }
                    self.knots[k].jump = 0.0;
                    self.knots[k].prev = None;
                    self.head = Some(k);
                    self.tail = Some(k);
                    self.head_u = z;
                    self.tail_u = z;
                    self.head_alpha = lo;
                    self.tail_alpha = lo;
                    self.left_slope = -m;
                    return z;
                }
            }
        }
    }

    fn clip_upper(&mut self, hi: f64) -> f64 {
        if hi == f64::INFINITY {
            return f64::INFINITY;
        }
        let m = self.m();
        let Some(tail) = self.tail else {
            let s = self.right_slope + m;
            if s <= 0.0 {
                if self.pending_offset <= hi {
                    return f64::INFINITY;
                }
                self.clear_to_constant(hi);
                return f64::NEG_INFINITY;
            }
            let z = (hi - self.pending_offset) / s;
            let k = self.alloc();
            self.head = Some(k);
            self.tail = Some(k);
            self.head_u = z;
            self.tail_u = z;
            self.head_alpha = hi;
            self.tail_alpha = hi;
            self.right_slope = -m;
            return z;
        };
        let sr = self.right_slope + m;
        if hi > self.tail_alpha {
            if sr <= 0.0 {
                return f64::INFINITY;
            }
            let z = self.tail_u + (hi - self.tail_alpha) / sr;
            let k = self.alloc();
            self.knots[tail].len = z - self.tail_u;
            self.knots[tail].slope = self.right_slope;
            self.link_after(tail, k);
            self.tail_u = z;
            self.tail_alpha = hi;
            self.right_slope = -m;
            return z;
        }
        let mut k = tail;
        let mut pos = self.tail_u;
        let mut v = self.tail_alpha;
        loop {
            self.stats.visited += 1;
            let vl = v - self.knots[k].jump;
            if hi >= vl {
                self.knots[k].jump = hi - vl;
                self.knots[k].next = None;
                self.tail = Some(k);
                self.tail_u = pos;
                self.tail_alpha = hi;
                self.right_slope = -m;
                return pos;
            }
            match self.knots[k].prev {
                Some(pk) => {
                    let s = self.knots[pk].slope + m;
                    let len = self.knots[pk].len;
                    let vp = vl - s * len;
                    if hi > vp {
                        let z = (pos - (vl - hi) / s).max(pos - len);
                        if self.jump_knot == Some(k) {
                            self.jump_knot = None;
                        }
                        self.knots[k].jump = 0.0;
                        self.knots[k].next = None;
                        self.knots[pk].len = len - (pos - z);
                        self.tail = Some(k);
                        self.tail_u = z;
                        self.tail_alpha = hi;
                        self.right_slope = -m;
                        return z;
                    }
                    self.release(k);
                    self.knots[pk].next = None;
                    self.tail = Some(pk);
                    k = pk;
                    pos -= len;
                    v = vp;
                }
                None => {
                    let sl = self.left_slope + m;
                    if sl <= 0.0 {
                        self.tail = Some(k);
                        self.clear_to_constant(hi);
                        return f64::NEG_INFINITY;
                    }
                    let z = pos - (vl - hi) / sl;
                    if self.jump_knot == Some(k) {
                        self.jump_knot = None;
                    }
                    self.knots[k].jump = 0.0;
                    self.knots[k].next = None;
                    self.head = Some(k);
                    self.tail = Some(k);
                    self.head_u = z;
                    self.tail_u = z;
                    self.head_alpha = hi;
                    self.tail_alpha = hi;
                    self.right_slope = -m;
                    return z;
                }
            }
        }
    }

    /// Leftmost and rightmost u with `0 ∈ α(u)`.
    pub fn zero_interval(&mut self) -> Result<(f64, f64)> {
        let m = self.m();
        let no_root = || Error::Internal("dual map does not cross zero".into());
        let Some(head) = self.head else {
            let s = self.left_slope + m;
            if s > 0.0 {
                let z = -self.pending_offset / s;
                return Ok((z, z));
            }
            if self.pending_offset == 0.0 {
                return Ok((f64::NEG_INFINITY, f64::INFINITY));
            }
            return Err(no_root());
        };
        let mut lower: Option<f64> = None;
        if self.head_alpha > 0.0 {
            let sl = self.left_slope + m;
            if sl <= 0.0 {
                return Err(no_root());
            }
            let z = self.head_u - self.head_alpha / sl;
            return Ok((z, z));
        }
        if self.head_alpha == 0.0 && self.left_slope + m <= 0.0 {
            lower = Some(f64::NEG_INFINITY);
        }
        let (mut k, mut pos, mut v) = match self.walk_from_finger(|_, v| v < 0.0) {
            Some((k, pos, v, visited)) if lower.is_none() => {
                self.stats.visited += visited;
                (k, pos, v)
            }
            _ => (head, self.head_u, self.head_alpha),
        };
        loop {
            self.stats.visited += 1;
            let vr = v + self.knots[k].jump;
            if lower.is_none() && v <= 0.0 && vr >= 0.0 {
                lower = Some(pos);
            }
            if vr > 0.0 {
                return Ok((lower.unwrap_or(pos), pos));
            }
            match self.knots[k].next {
                Some(nk) => {
                    let s = self.knots[k].slope + m;
                    let len = self.knots[k].len;
                    let vn = vr + s * len;
                    if vn > 0.0 {
                        let z = pos + (-vr) / s;
                        return Ok((lower.unwrap_or(z), z));
                    }
                    if lower.is_none() && vn == 0.0 && vr < 0.0 {
                        lower = Some(pos + len);
                    }
                    k = nk;
                    pos += len;
                    v = vn;
                }
                None => {
                    let sr = self.right_slope + m;
                    if sr > 0.0 {
                        let z = pos - vr / sr;
                        return Ok((lower.unwrap_or(z), z));
                    }
                    if vr == 0.0 {
                        return Ok((lower.unwrap_or(pos), f64::INFINITY));
                    }
                    return Err(no_root());
                }
            }
        }
    }

    /// Unique root of a strictly increasing map; the midpoint when the map
    /// is flat at zero.
    pub fn zero_crossing(&mut self) -> Result<f64> {
        let (a, b) = self.zero_interval()?;
        match (a.is_finite(), b.is_finite()) {
            (true, true) => Ok(0.5 * (a + b)),
            (true, false) => Ok(a),
            (false, true) => Ok(b),
            (false, false) => Ok(0.0),
        }
    }

    /// `u ↦ old(z + κ_λ(u − z))`: splices a flat interval `[z − λ, z + λ]`
    /// into the map, shifting the left part by −λ and the right part by +λ.
    pub fn kvetsh(&mut self, z: f64, lambda: f64) -> Result<KvetshRecord> {
        if !(lambda >= 0.0) || !lambda.is_finite() || !z.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kvetsh needs finite z and lambda >= 0, got z={z}, lambda={lambda}"
            )));
        }
        let at_z = self.eval(z);
        let scale = 1.0 + self.head_alpha.abs() + self.tail_alpha.abs() + self.m() * z.abs();
        if at_z.abs() > 1e-9 * scale {
            return Err(Error::InvalidParameter(format!(
                "kvetsh centre {z} is not a root (map value {at_z})"
            )));
        }
        if lambda == 0.0 {
            return Ok(KvetshRecord { z, lambda });
        }
        let m = self.m();
        let flat = -m;
        let flat_knot = match self.head {
            None => {
                let a = self.alloc();
                let b = self.alloc();
                self.head = Some(a);
                self.tail = Some(a);
                self.link_after(a, b);
                self.knots[a].len = 2.0 * lambda;
                self.knots[a].slope = flat;
                self.head_u = z;
                self.tail_u = z;
                self.head_alpha = at_z;
                self.tail_alpha = at_z;
                a
            }
            Some(head) if z < self.head_u => {
                let a = self.alloc();
                let b = self.alloc();
                self.link_before(head, b);
                self.link_before(b, a);
                self.knots[a].len = 2.0 * lambda;
                self.knots[a].slope = flat;
                self.knots[b].len = self.head_u - z;
                self.knots[b].slope = self.left_slope;
                self.head_u = z;
                self.head_alpha = at_z;
                a
            }
            Some(_) if z > self.tail_u => {
                let tail = self.tail.expect("non-empty");
                let a = self.alloc();
                let b = self.alloc();
                self.knots[tail].len = z - self.tail_u;
                self.knots[tail].slope = self.right_slope;
                self.link_after(tail, a);
                self.link_after(a, b);
                self.knots[a].len = 2.0 * lambda;
                self.knots[a].slope = flat;
                self.tail_u = z;
                self.tail_alpha = at_z;
                a
            }
            Some(_) => {
                let (k, pos) = self.locate(z);
                let b = self.alloc();
                if pos == z {
                    self.knots[b].len = self.knots[k].len;
                    self.knots[b].slope = self.knots[k].slope;
                    self.knots[k].len = 2.0 * lambda;
                    self.knots[k].slope = flat;
                    self.link_after(k, b);
                    k
                } else {
                    let a = self.alloc();
                    let len = self.knots[k].len;
                    self.knots[b].len = len - (z - pos);
                    self.knots[b].slope = self.knots[k].slope;
                    self.knots[k].len = z - pos;
                    self.knots[a].len = 2.0 * lambda;
                    self.knots[a].slope = flat;
                    self.link_after(k, a);
                    self.link_after(a, b);
                    a
                }
            }
        };
        self.finger = Some(Finger {
            knot: flat_knot,
            pos: z - lambda,
            value: at_z,
        });
        self.head_u -= lambda;
        self.tail_u += lambda;
        Ok(KvetshRecord { z, lambda })
    }

    /// Exact evaluation; at a knot with a jump the left limit is returned.
    pub fn eval(&self, u: f64) -> f64 {
        let m = self.m();
        let Some(head) = self.head else {
            return (self.left_slope + m) * u + self.pending_offset;
        };
        if u <= self.head_u {
            return self.head_alpha - (self.left_slope + m) * (self.head_u - u);
        }
        if u > self.tail_u {
            return self.tail_alpha + (self.right_slope + m) * (u - self.tail_u);
        }
        let (mut k, mut pos, mut v) = match self.walk_from_finger(|pos, _| pos <= u) {
            Some((k, pos, v, _)) => (k, pos, v),
            None => (head, self.head_u, self.head_alpha),
        };
        loop {
            let vr = v + self.knots[k].jump;
            let Some(nk) = self.knots[k].next else {
                return if u < self.tail_u { vr } else { v };
            };
            let len = self.knots[k].len;
            let s = self.knots[k].slope + m;
            if u <= pos + len {
                return vr + s * (u - pos);
            }
            k = nk;
            pos += len;
            v = vr + s * len;
        }
    }

    /// Knots as `(u, left limit, right limit)`.
    pub fn knots(&self) -> Vec<(f64, f64, f64)> {
        let m = self.m();
        let mut out = Vec::with_capacity(self.count);
        let mut cur = self.head;
        let mut pos = self.head_u;
        let mut v = self.head_alpha;
        while let Some(k) = cur {
            let vr = v + self.knots[k].jump;
            out.push((pos, v, vr));
            v = vr + (self.knots[k].slope + m) * self.knots[k].len;
            pos += self.knots[k].len;
            cur = self.knots[k].next;
        }
        out
    }

    /// Actual slopes of the two unbounded extensions.
    pub fn extension_slopes(&self) -> (f64, f64) {
        (self.left_slope + self.m(), self.right_slope + self.m())
    }

    /// Text dump: the left slope, one `u,alpha` line per knot (two when the
    /// knot carries a jump), then the right slope.
    pub fn dump(&self) -> String {
        let (sl, sr) = self.extension_slopes();
        let mut s = String::new();
        let _ = writeln!(s, "left_slope,{sl}");
        if self.head.is_none() {
            let _ = writeln!(s, "0,{}", self.pending_offset);
        }
        for (u, a, b) in self.knots() {
            let _ = writeln!(s, "{u},{a}");
            if b != a {
                let _ = writeln!(s, "{u},{b}");
            }
        }
        let _ = writeln!(s, "right_slope,{sr}");
        s
    }
}
