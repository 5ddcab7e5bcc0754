//! Hierarchical box tessellation of the weight-augmented torus.
//!
//! Level `i` tiles the torus with cubes of side `D_i = 2^i * D0` crossed with
//! the weight range `[2^(d*i/2), 2^(d*(i+1)/2))`; the single TOP box covers
//! the whole torus above level `rho0`. Two box graphs matter:
//!
//! * `B`: edges where closures intersect in a d-dimensional set — exactly
//!   same-level facet neighbors plus parent/child pairs (dimension counting:
//!   facets give (d-1)-dim geometry x 1-dim weight, parent/child give d-dim
//!   geometry x 0-dim weight; everything else falls short).
//! * `G+`: edges where closures intersect at all — same-level Chebyshev-1
//!   neighbors and level±1 boxes whose geometric closures meet. Levels two
//!   or more apart never touch (weight closures are disjoint).
//!
//! All adjacency predicates run on integer unit coordinates (units of D0,
//! circle of 2^rho0 units), so corner touches are exact.

use crate::error::{GirgError, Result};
use crate::geometry::{ModelParams, TorusPoint, WeightedVertex};
use crate::scalar::Scalar;

/// Identifies a box: `level` in `[0, rho0]`, per-axis 1-based indices.
/// The TOP box is `level == rho0` with an empty index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxId {
    pub level: u32,
    pub index: Vec<u32>,
}

impl BoxId {
    pub fn new(level: u32, index: Vec<u32>) -> Self {
        BoxId { level, index }
    }

    pub fn top(rho0: u32) -> Self {
        BoxId { level: rho0, index: Vec::new() }
    }

    pub fn is_top(&self) -> bool {
        self.index.is_empty()
    }
}

impl std::fmt::Display for BoxId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_top() {
            write!(f, "TOP")
        } else {
            let idx: Vec<String> = self.index.iter().map(|j| j.to_string()).collect();
            write!(f, "L{}:{}", self.level, idx.join(","))
        }
    }
}

/// The level hierarchy for one parameter set.
#[derive(Debug, Clone)]
pub struct Tessellation<F: Scalar> {
    pub params: ModelParams<F>,
    /// Number of geometric halvings: `side / D0 = 2^rho0`.
    pub rho0: u32,
    /// Lowest-level box side.
    pub d0: F,
    pub side: F,
    /// `D_i = 2^i * D0` for `i` in `0..rho0`.
    pub level_sides: Vec<F>,
    /// `2^(d*i/2)` for `i` in `0..=rho0`.
    pub weight_thresholds: Vec<F>,
}

/// `rho0 = ceil(log2(side / d0_target))`, `D0 = side / 2^rho0 <= d0_target`.
pub fn build_tessellation<F: Scalar>(params: &ModelParams<F>) -> Result<Tessellation<F>> {
    params.validate_geometry()?;
    let side = params.side();
    let mut rho0 = 0u32;
    let mut pow = F::one();
    while side > params.d0_target * pow {
        rho0 += 1;
        pow = pow + pow;
        if rho0 > 60 {
            return Err(GirgError::InvalidInput("d0_target too small for this torus".into()));
        }
    }
    if rho0 < 1 {
        return Err(GirgError::InvalidInput(
            "torus too small for d0_target (rho0 < 1)".into(),
        ));
    }
    let d0 = side / pow;
    let mut level_sides = Vec::with_capacity(rho0 as usize);
    let mut s = d0;
    for _ in 0..rho0 {
        level_sides.push(s);
        s = s + s;
    }
    let d = params.d as f64;
    let weight_thresholds = (0..=rho0)
        .map(|i| F::from_f64_lossy(2.0f64.powf(d * i as f64 / 2.0)))
        .collect();
    Ok(Tessellation { params: *params, rho0, d0, side, level_sides, weight_thresholds })
}

impl<F: Scalar> Tessellation<F> {
    pub fn dim(&self) -> usize {
        self.params.d
    }

    /// Boxes per axis at a non-TOP level.
    pub fn per_axis(&self, level: u32) -> u64 {
        debug_assert!(level < self.rho0);
        1u64 << (self.rho0 - level)
    }

    /// Number of boxes at a level (1 for TOP).
    pub fn level_len(&self, level: u32) -> usize {
        if level >= self.rho0 {
            1
        } else {
            (self.per_axis(level) as usize).pow(self.dim() as u32)
        }
    }

    /// Weight level: `floor(2*log2(w)/d)` capped at `rho0` (TOP).
    pub fn level_of_weight(&self, w: F) -> u32 {
        let lvl = (2.0 * w.to_f64_lossy().log2() / self.dim() as f64).floor();
        if lvl <= 0.0 {
            0
        } else {
            (lvl as u32).min(self.rho0)
        }
    }

    /// Geometric cell (1-based) of a point at a given non-TOP level.
    pub fn cell_of(&self, pos: &TorusPoint<F>, level: u32) -> Vec<u32> {
        let per_axis = self.per_axis(level);
        let d_level = self.level_sides[level as usize];
        pos.coords
            .iter()
            .map(|&c| {
                let j = (c / d_level).to_f64_lossy().floor() as i64;
                (j.clamp(0, per_axis as i64 - 1) + 1) as u32
            })
            .collect()
    }

    /// The unique box a vertex maps to.
    pub fn box_of(&self, v: &WeightedVertex<F>) -> BoxId {
        let level = self.level_of_weight(v.weight);
        if level >= self.rho0 {
            BoxId::top(self.rho0)
        } else {
            BoxId::new(level, self.cell_of(&v.pos, level))
        }
    }

    /// Parent halves each index (ceil) and moves one level up; boxes at level
    /// `rho0 - 1` have the TOP box as parent.
    pub fn parent(&self, b: &BoxId) -> Result<BoxId> {
        if b.is_top() {
            return Err(GirgError::InvalidInput("TOP has no parent".into()));
        }
        if b.level + 1 >= self.rho0 {
            return Ok(BoxId::top(self.rho0));
        }
        Ok(BoxId::new(b.level + 1, b.index.iter().map(|&j| j.div_ceil(2)).collect()))
    }

    /// Inverse of `parent`: the 2^d boxes one level down (TOP's children are
    /// all level `rho0 - 1` boxes). Level-0 boxes have no children.
    pub fn children(&self, b: &BoxId) -> Vec<BoxId> {
        if b.is_top() {
            return self.level_boxes(self.rho0 - 1);
        }
        if b.level == 0 {
            return Vec::new();
        }
        let child_level = b.level - 1;
        let mut out = vec![Vec::new()];
        for &j in &b.index {
            let mut next = Vec::with_capacity(out.len() * 2);
            for prefix in &out {
                for cj in [2 * j - 1, 2 * j] {
                    let mut p = prefix.clone();
                    p.push(cj);
                    next.push(p);
                }
            }
            out = next;
        }
        out.into_iter().map(|idx| BoxId::new(child_level, idx)).collect()
    }

    /// All boxes of one level, in index order.
    pub fn level_boxes(&self, level: u32) -> Vec<BoxId> {
        if level >= self.rho0 {
            return vec![BoxId::top(self.rho0)];
        }
        let per_axis = self.per_axis(level) as u32;
        let d = self.dim();
        let mut out = Vec::with_capacity(self.level_len(level));
        let mut idx = vec![1u32; d];
        loop {
            out.push(BoxId::new(level, idx.clone()));
            let mut k = 0;
            while k < d {
                idx[k] += 1;
                if idx[k] <= per_axis {
                    break;
                }
                idx[k] = 1;
                k += 1;
            }
            if k == d {
                break;
            }
        }
        out
    }

    /// Neighbors in `B`: same-level facet neighbors (one coordinate off by
    /// one, torus wrap; coinciding directions deduplicated), the parent, and
    /// all children.
    pub fn b_neighbors(&self, b: &BoxId) -> Vec<BoxId> {
        let mut out = Vec::new();
        if b.is_top() {
            out.extend(self.children(b));
            return out;
        }
        let per_axis = self.per_axis(b.level) as i64;
        for k in 0..b.index.len() {
            for step in [-1i64, 1] {
                let j = (b.index[k] as i64 - 1 + step).rem_euclid(per_axis) as u32 + 1;
                if j == b.index[k] {
                    continue; // per_axis == 1 cannot happen; guard anyway
                }
                let mut idx = b.index.clone();
                idx[k] = j;
                out.push(BoxId::new(b.level, idx));
            }
        }
        out.push(self.parent(b).expect("non-TOP has a parent"));
        out.extend(self.children(b));
        out.sort();
        out.dedup();
        out
    }

    /// Neighbors in `G+`: same-level Chebyshev-1 boxes plus level±1 boxes
    /// whose geometric closures intersect. TOP touches every level
    /// `rho0 - 1` box.
    pub fn gplus_neighbors(&self, b: &BoxId) -> Vec<BoxId> {
        let space = BoxSpace::new(self, 0);
        let mut buf = Vec::new();
        space.gplus_neighbors_flat(space.flat(b), &mut buf);
        let mut out: Vec<BoxId> = buf.into_iter().map(|f| space.unflat(f)).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Closure-intersection predicate for `G+`.
    pub fn gplus_adjacent(&self, a: &BoxId, b: &BoxId) -> bool {
        let space = BoxSpace::new(self, 0);
        space.gplus_adjacent_flat(space.flat(a), space.flat(b))
    }

    /// `B`-adjacency predicate.
    pub fn b_adjacent(&self, a: &BoxId, b: &BoxId) -> bool {
        if a == b {
            return false;
        }
        if a.is_top() || b.is_top() {
            let other = if a.is_top() { b } else { a };
            return other.level == self.rho0 - 1;
        }
        if a.level == b.level {
            // Exactly one coordinate off by one, modulo wrap.
            let per_axis = self.per_axis(a.level) as i64;
            let mut off_by_one = 0;
            for (&x, &y) in a.index.iter().zip(&b.index) {
                let diff = (x as i64 - y as i64).rem_euclid(per_axis);
                if diff == 0 {
                    continue;
                }
                if diff == 1 || diff == per_axis - 1 {
                    off_by_one += 1;
                } else {
                    return false;
                }
            }
            return off_by_one == 1;
        }
        let (lo, hi) = if a.level < b.level { (a, b) } else { (b, a) };
        hi.level == lo.level + 1 && self.parent(lo).unwrap() == *hi
    }

    /// Whether a box holds at least one vertex of the sample. O(m) scan; use
    /// an `ActivityMap` for bulk queries.
    pub fn is_active(&self, b: &BoxId, vertices: &[WeightedVertex<F>]) -> bool {
        vertices.iter().any(|v| self.box_of(v) == *b)
    }

    /// One generating cycle per same-level `B`-edge: a triangle through the
    /// shared parent, or a quadrilateral through both parents.
    pub fn gamma_generators(&self) -> Vec<Vec<BoxId>> {
        let mut out = Vec::new();
        for (b1, b2) in self.same_level_b_edges() {
            let p1 = self.parent(&b1).unwrap();
            let p2 = self.parent(&b2).unwrap();
            if p1 == p2 {
                out.push(vec![b1, p1, b2]);
            } else {
                out.push(vec![b1, p1, p2, b2]);
            }
        }
        out
    }

    /// All same-level facet edges, each exactly once.
    pub fn same_level_b_edges(&self) -> Vec<(BoxId, BoxId)> {
        let mut out = Vec::new();
        for level in 0..self.rho0 {
            let per_axis = self.per_axis(level) as u32;
            for b in self.level_boxes(level) {
                for k in 0..b.index.len() {
                    let j = b.index[k];
                    // Emit j -> j+1, and the wrap edge only when it is not
                    // already the j -> j+1 edge of some j (per_axis == 2
                    // collapses both directions to one edge).
                    if j < per_axis {
                        let mut idx = b.index.clone();
                        idx[k] = j + 1;
                        out.push((b.clone(), BoxId::new(level, idx)));
                    } else if per_axis > 2 {
                        let mut idx = b.index.clone();
                        idx[k] = 1;
                        out.push((b.clone(), BoxId::new(level, idx)));
                    }
                }
            }
        }
        out
    }

    /// True iff every vertex pair of the cycle is `G+`-adjacent.
    pub fn check_chordal_in_gplus(&self, cycle: &[BoxId]) -> bool {
        for i in 0..cycle.len() {
            for j in (i + 1)..cycle.len() {
                if !self.gplus_adjacent(&cycle[i], &cycle[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// GF(2) check that the generator cycles span every fundamental cycle of
    /// the parent-chain spanning tree of `B`. Limited to small tessellations.
    pub fn cycle_space_generation_check(&self) -> Result<bool> {
        let space = BoxSpace::new(self, 0);
        if space.len() > 200 {
            return Err(GirgError::SizeLimit(format!(
                "cycle space check limited to 200 boxes, tessellation has {}",
                space.len()
            )));
        }
        // Index all B-edges.
        let mut edge_ids = std::collections::HashMap::new();
        let mut edge_key = |a: usize, b: usize, ids: &mut std::collections::HashMap<(usize, usize), usize>| {
            let key = (a.min(b), a.max(b));
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        };
        let mut buf = Vec::new();
        for f in 0..space.len() {
            space.b_neighbors_flat(f, &mut buf);
            for &g in &buf {
                edge_key(f, g, &mut edge_ids);
            }
        }
        let num_edges = edge_ids.len();
        let words = num_edges.div_ceil(64);
        let cycle_vec = |boxes: &[usize]| -> Vec<u64> {
            let mut v = vec![0u64; words];
            for i in 0..boxes.len() {
                let a = boxes[i];
                let b = boxes[(i + 1) % boxes.len()];
                let key = (a.min(b), a.max(b));
                let e = edge_ids[&key];
                v[e / 64] ^= 1 << (e % 64);
            }
            v
        };

        // Gaussian elimination basis from the generators.
        let mut basis: Vec<(usize, Vec<u64>)> = Vec::new(); // (pivot bit, row)
        let reduce = |mut row: Vec<u64>, basis: &[(usize, Vec<u64>)]| -> Vec<u64> {
            for (pivot, b) in basis {
                if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                    for (r, x) in row.iter_mut().zip(b) {
                        *r ^= x;
                    }
                }
            }
            row
        };
        for gen in self.gamma_generators() {
            let flats: Vec<usize> = gen.iter().map(|b| space.flat(b)).collect();
            let row = reduce(cycle_vec(&flats), &basis);
            if let Some(pivot) = first_bit(&row) {
                basis.push((pivot, row));
            }
        }

        // Every same-level (non-tree) edge closes a fundamental cycle:
        // the canonical tree path plus the edge itself.
        for (b1, b2) in self.same_level_b_edges() {
            let path = space.tree_path_flat(space.flat(&b1), space.flat(&b2));
            let row = reduce(cycle_vec(&path), &basis);
            if first_bit(&row).is_some() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Maximum `G+` degree over all boxes (diagnostic; the path-counting
    /// argument quotes 3^d - 1 but cross-level neighbors push it higher).
    pub fn max_gplus_degree(&self) -> usize {
        let space = BoxSpace::new(self, 0);
        let mut buf = Vec::new();
        let mut best = 0;
        for f in 0..space.len() {
            space.gplus_neighbors_flat(f, &mut buf);
            best = best.max(buf.len());
        }
        best
    }
}

fn first_bit(row: &[u64]) -> Option<usize> {
    for (w, &x) in row.iter().enumerate() {
        if x != 0 {
            return Some(w * 64 + x.trailing_zeros() as usize);
        }
    }
    None
}

impl<F: Scalar> ModelParams<F> {
    /// Geometry-only validation, shared by tessellation construction. The
    /// verify command's misconfiguration mode relaxes d0_target to (0, 1).
    pub fn validate_geometry(&self) -> Result<()> {
        if self.d == 0 {
            return Err(GirgError::InvalidInput("dimension must be >= 1".into()));
        }
        if !(self.n >= F::one()) {
            return Err(GirgError::InvalidInput("n must be >= 1".into()));
        }
        if !(self.d0_target > F::zero() && self.d0_target < F::one()) {
            return Err(GirgError::InvalidInput(format!(
                "d0_target must be in (0, 1), got {}",
                self.d0_target
            )));
        }
        Ok(())
    }
}

/// Dense flat indexing over the levels `min_level..=rho0` of a tessellation,
/// with allocation-free adjacency generation. `min_level > 0` is the element
/// view used by tower renormalization: level `min_level` slots then stand for
/// towers and lower levels do not exist.
pub struct BoxSpace<'a, F: Scalar> {
    pub tess: &'a Tessellation<F>,
    pub min_level: u32,
    offsets: Vec<usize>,
    total: usize,
}

impl<'a, F: Scalar> BoxSpace<'a, F> {
    pub fn new(tess: &'a Tessellation<F>, min_level: u32) -> Self {
        assert!(min_level < tess.rho0, "min_level must leave at least one box level");
        let mut offsets = Vec::new();
        let mut total = 0usize;
        for level in min_level..tess.rho0 {
            offsets.push(total);
            total += tess.level_len(level);
        }
        offsets.push(total); // TOP
        total += 1;
        BoxSpace { tess, min_level, offsets, total }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn top_flat(&self) -> usize {
        self.total - 1
    }

    pub fn dim(&self) -> usize {
        self.tess.dim()
    }

    pub fn level_of_flat(&self, f: usize) -> u32 {
        if f == self.top_flat() {
            return self.tess.rho0;
        }
        let mut level = self.min_level;
        for (k, &off) in self.offsets.iter().enumerate().skip(1) {
            if f < off {
                level = self.min_level + k as u32 - 1;
                break;
            }
        }
        level
    }

    /// Flat index from 0-based per-axis coordinates.
    fn flat_from_coords(&self, level: u32, coords: &[u64]) -> usize {
        let per_axis = self.tess.per_axis(level);
        let mut idx = 0u64;
        for &c in coords.iter().rev() {
            idx = idx * per_axis + c;
        }
        self.offsets[(level - self.min_level) as usize] + idx as usize
    }

    /// 0-based per-axis coordinates of a non-TOP flat index.
    fn coords_of(&self, f: usize, out: &mut [u64]) -> u32 {
        let level = self.level_of_flat(f);
        debug_assert!(level < self.tess.rho0);
        let per_axis = self.tess.per_axis(level);
        let mut idx = (f - self.offsets[(level - self.min_level) as usize]) as u64;
        for c in out.iter_mut().take(self.dim()) {
            *c = idx % per_axis;
            idx /= per_axis;
        }
        level
    }

    pub fn flat(&self, b: &BoxId) -> usize {
        if b.is_top() {
            return self.top_flat();
        }
        assert!(b.level >= self.min_level, "box below the element view");
        let coords: Vec<u64> = b.index.iter().map(|&j| (j - 1) as u64).collect();
        self.flat_from_coords(b.level, &coords)
    }

    pub fn unflat(&self, f: usize) -> BoxId {
        if f == self.top_flat() {
            return BoxId::top(self.tess.rho0);
        }
        let mut coords = [0u64; 8];
        let level = self.coords_of(f, &mut coords);
        BoxId::new(level, coords[..self.dim()].iter().map(|&c| c as u32 + 1).collect())
    }

    pub fn parent_flat(&self, f: usize) -> Option<usize> {
        if f == self.top_flat() {
            return None;
        }
        let mut coords = [0u64; 8];
        let level = self.coords_of(f, &mut coords);
        if level + 1 >= self.tess.rho0 {
            return Some(self.top_flat());
        }
        let parents: Vec<u64> = coords[..self.dim()].iter().map(|&c| c / 2).collect();
        Some(self.flat_from_coords(level + 1, &parents))
    }

    /// `B`-neighbors into `out` (cleared first): facet boxes, parent,
    /// children above `min_level`.
    pub fn b_neighbors_flat(&self, f: usize, out: &mut Vec<usize>) {
        out.clear();
        let d = self.dim();
        if f == self.top_flat() {
            // All level rho0-1 boxes.
            let level = self.tess.rho0 - 1;
            let base = self.offsets[(level - self.min_level) as usize];
            for k in 0..self.tess.level_len(level) {
                out.push(base + k);
            }
            return;
        }
        let mut coords = [0u64; 8];
        let level = self.coords_of(f, &mut coords);
        let per_axis = self.tess.per_axis(level);
        for k in 0..d {
            let c = coords[k];
            for step in [per_axis - 1, 1] {
                let nc = (c + step) % per_axis;
                if nc == c {
                    continue;
                }
                let mut tmp = coords;
                tmp[k] = nc;
                out.push(self.flat_from_coords(level, &tmp[..d]));
            }
        }
        out.push(self.parent_flat(f).expect("non-TOP"));
        if level > self.min_level {
            self.push_children(level, &coords[..d], out);
        }
        out.sort_unstable();
        out.dedup();
    }

    fn push_children(&self, level: u32, coords: &[u64], out: &mut Vec<usize>) {
        let d = self.dim();
        let child_level = level - 1;
        let mut tmp = [0u64; 8];
        let count = 1usize << d;
        for mask in 0..count {
            for k in 0..d {
                tmp[k] = 2 * coords[k] + ((mask >> k) & 1) as u64;
            }
            out.push(self.flat_from_coords(child_level, &tmp[..d]));
        }
    }

    /// `G+`-neighbors into `out` (cleared first).
    pub fn gplus_neighbors_flat(&self, f: usize, out: &mut Vec<usize>) {
        out.clear();
        let d = self.dim();
        if f == self.top_flat() {
            let level = self.tess.rho0 - 1;
            let base = self.offsets[(level - self.min_level) as usize];
            for k in 0..self.tess.level_len(level) {
                out.push(base + k);
            }
            return;
        }
        let mut coords = [0u64; 8];
        let level = self.coords_of(f, &mut coords);
        let per_axis = self.tess.per_axis(level);
        let units = 1u64 << self.tess.rho0;
        let len = 1u64 << level;

        // Same level: all Chebyshev-1 offsets.
        let mut counters = [0usize; 8];
        loop {
            let mut all_zero = true;
            let mut tmp = [0u64; 8];
            for k in 0..d {
                let step = counters[k] as u64; // 0 -> -1, 1 -> 0, 2 -> +1
                tmp[k] = (coords[k] + per_axis + step - 1) % per_axis;
                if step != 1 {
                    all_zero = false;
                }
            }
            if !all_zero && tmp[..d] != coords[..d] {
                out.push(self.flat_from_coords(level, &tmp[..d]));
            }
            let mut k = 0;
            while k < d {
                counters[k] += 1;
                if counters[k] < 3 {
                    break;
                }
                counters[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }

        // One level up.
        if level + 1 >= self.tess.rho0 {
            out.push(self.top_flat());
        } else {
            let up_len = len * 2;
            self.push_cross_level(level + 1, up_len, &coords[..d], len, units, out);
        }

        // One level down (within the element view).
        if level > self.min_level {
            let down_len = len / 2;
            self.push_cross_level(level - 1, down_len, &coords[..d], len, units, out);
        }

        out.sort_unstable();
        out.dedup();
    }

    /// Cross-level candidates: per axis the other-level cells whose closed
    /// unit interval meets ours, then the cartesian product.
    fn push_cross_level(
        &self,
        other_level: u32,
        other_len: u64,
        coords: &[u64],
        len: u64,
        units: u64,
        out: &mut Vec<usize>,
    ) {
        let d = coords.len();
        let other_axis = self.tess.per_axis(other_level);
        let mut cands = [[0u64; 4]; 8];
        let mut cand_len = [0usize; 8];
        for k in 0..d {
            let start = coords[k] * len;
            // Window of other-level cells that can touch our span: the cell
            // under our start, one before, and one past our end.
            let base = (start / other_len) as i64;
            let lo = base - 1;
            let hi = base + (len / other_len).max(1) as i64;
            let mut seen = [u64::MAX; 4];
            let mut m = 0usize;
            for j in lo..=hi {
                let cell = j.rem_euclid(other_axis as i64) as u64;
                if seen[..m].contains(&cell) {
                    continue;
                }
                if circ_intersect(start, len, cell * other_len, other_len, units) {
                    seen[m] = cell;
                    cands[k][m] = cell;
                    m += 1;
                    if m == 4 {
                        break;
                    }
                }
            }
            cand_len[k] = m;
        }
        let mut counters = [0usize; 8];
        loop {
            let mut tmp = [0u64; 8];
            for k in 0..d {
                tmp[k] = cands[k][counters[k]];
            }
            out.push(self.flat_from_coords(other_level, &tmp[..d]));
            let mut k = 0;
            while k < d {
                counters[k] += 1;
                if counters[k] < cand_len[k] {
                    break;
                }
                counters[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
    }

    /// Closure-intersection `G+` predicate on flat ids.
    pub fn gplus_adjacent_flat(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let (la, lb) = (self.level_of_flat(a), self.level_of_flat(b));
        if la.abs_diff(lb) >= 2 {
            return false;
        }
        if a == self.top_flat() || b == self.top_flat() {
            // TOP spans the whole torus; weight closures must touch.
            return la.abs_diff(lb) == 1;
        }
        let d = self.dim();
        let units = 1u64 << self.tess.rho0;
        let mut ca = [0u64; 8];
        let mut cb = [0u64; 8];
        self.coords_of(a, &mut ca);
        self.coords_of(b, &mut cb);
        let (lena, lenb) = (1u64 << la, 1u64 << lb);
        for k in 0..d {
            if !circ_intersect(ca[k] * lena, lena, cb[k] * lenb, lenb, units) {
                return false;
            }
        }
        true
    }

    /// `B`-adjacency on flat ids.
    pub fn b_adjacent_flat(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let (la, lb) = (self.level_of_flat(a), self.level_of_flat(b));
        if la == lb {
            if a == self.top_flat() {
                return false;
            }
            let d = self.dim();
            let per_axis = self.tess.per_axis(la);
            let mut ca = [0u64; 8];
            let mut cb = [0u64; 8];
            self.coords_of(a, &mut ca);
            self.coords_of(b, &mut cb);
            let mut off = 0;
            for k in 0..d {
                let diff = (ca[k] + per_axis - cb[k]) % per_axis;
                if diff == 0 {
                    continue;
                }
                if diff == 1 || diff == per_axis - 1 {
                    off += 1;
                } else {
                    return false;
                }
            }
            off == 1
        } else if la.abs_diff(lb) == 1 {
            let (lo, hi) = if la < lb { (a, b) } else { (b, a) };
            self.parent_flat(lo) == Some(hi)
        } else {
            false
        }
    }

    /// Canonical tree path between two elements: both parent chains to the
    /// lowest common ancestor. Returns the full sequence a..=LCA..=b.
    pub fn tree_path_flat(&self, a: usize, b: usize) -> Vec<usize> {
        if a == b {
            return vec![a];
        }
        let mut up_a = vec![a];
        let mut up_b = vec![b];
        let (mut ca, mut cb) = (a, b);
        while self.level_of_flat(ca) < self.level_of_flat(cb) {
            ca = self.parent_flat(ca).unwrap();
            up_a.push(ca);
        }
        while self.level_of_flat(cb) < self.level_of_flat(ca) {
            cb = self.parent_flat(cb).unwrap();
            up_b.push(cb);
        }
        while ca != cb {
            ca = self.parent_flat(ca).unwrap();
            up_a.push(ca);
            cb = self.parent_flat(cb).unwrap();
            up_b.push(cb);
        }
        // up_a ends at the LCA; append b's chain in reverse, skipping its LCA.
        up_b.pop();
        while let Some(x) = up_b.pop() {
            up_a.push(x);
        }
        up_a
    }

    /// Element of a vertex: its box, lifted to `min_level` when the weight
    /// level falls below the cutoff (that slot stands for the tower).
    pub fn element_of(&self, v: &WeightedVertex<F>) -> usize {
        let level = self.tess.level_of_weight(v.weight).max(self.min_level);
        if level >= self.tess.rho0 {
            return self.top_flat();
        }
        let cell = self.tess.cell_of(&v.pos, level);
        let coords: Vec<u64> = cell.iter().map(|&j| (j - 1) as u64).collect();
        self.flat_from_coords(level, &coords)
    }
}

/// Closed interval intersection on a circle of `units` units.
fn circ_intersect(a_start: u64, a_len: u64, b_start: u64, b_len: u64, units: u64) -> bool {
    let diff = (b_start + units - a_start % units) % units;
    diff <= a_len || units - diff <= b_len
}

/// Per-element vertex presence for one sampled graph.
#[derive(Debug, Clone)]
pub struct ActivityMap {
    pub active: Vec<bool>,
    pub counts: Vec<u32>,
}

impl ActivityMap {
    /// Presence-based activity: an element is active iff >= 1 vertex maps
    /// to it.
    pub fn from_vertices<F: Scalar>(space: &BoxSpace<'_, F>, vertices: &[WeightedVertex<F>]) -> Self {
        let mut counts = vec![0u32; space.len()];
        for v in vertices {
            counts[space.element_of(v)] += 1;
        }
        let active = counts.iter().map(|&c| c > 0).collect();
        ActivityMap { active, counts }
    }

    /// Explicit activity pattern, for constructed test instances.
    pub fn from_active_set<F: Scalar>(space: &BoxSpace<'_, F>, active_flat: &[usize]) -> Self {
        let mut active = vec![false; space.len()];
        let mut counts = vec![0u32; space.len()];
        for &f in active_flat {
            active[f] = true;
            counts[f] = 1;
        }
        ActivityMap { active, counts }
    }

    pub fn is_active(&self, f: usize) -> bool {
        self.active[f]
    }
}

/// CSR of vertex ids per element, ids ascending within an element.
#[derive(Debug, Clone)]
pub struct VertexIndex {
    starts: Vec<u32>,
    ids: Vec<u32>,
}

impl VertexIndex {
    pub fn build<F: Scalar>(space: &BoxSpace<'_, F>, vertices: &[WeightedVertex<F>]) -> Self {
        let mut counts = vec![0u32; space.len() + 1];
        let elements: Vec<usize> = vertices.iter().map(|v| space.element_of(v)).collect();
        for &e in &elements {
            counts[e + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut cursor = counts;
        let mut ids = vec![0u32; vertices.len()];
        for (v, &e) in elements.iter().enumerate() {
            ids[cursor[e] as usize] = v as u32;
            cursor[e] += 1;
        }
        VertexIndex { starts, ids }
    }

    pub fn vertices_in(&self, f: usize) -> &[u32] {
        &self.ids[self.starts[f] as usize..self.starts[f + 1] as usize]
    }
}
