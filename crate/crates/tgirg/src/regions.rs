//! Canonical box paths and the inactive region machinery: W-expansion,
//! boundary S, holes of the complement, and visible boundaries.

use crate::error::{GirgError, Result};
use crate::scalar::Scalar;
use crate::tessellation::{ActivityMap, BoxId, BoxSpace, Tessellation};

/// A W(B1,B2) computation result, in flat indices of the generating space.
#[derive(Debug, Clone)]
pub struct Region {
    pub source: usize,
    pub target: usize,
    /// Canonical tree path between the endpoints (inclusive).
    pub canonical_path: Vec<usize>,
    /// Path plus its full G+ neighborhood, sorted.
    pub l_prime: Vec<usize>,
    /// Expanded inactive region, sorted. Always a superset of `l_prime`.
    pub w_set: Vec<usize>,
    /// Active boxes G+-adjacent to W, outside it, sorted.
    pub s_set: Vec<usize>,
    /// Per-box hole label (B-component id of the complement of W);
    /// `u32::MAX` for boxes inside W. Present unless holes were skipped.
    pub hole_label: Option<Vec<u32>>,
    pub hole_count: u32,
}

impl Region {
    pub fn in_w(&self, f: usize) -> bool {
        self.w_set.binary_search(&f).is_ok()
    }

    pub fn in_ws(&self, f: usize) -> bool {
        self.in_w(f) || self.s_set.binary_search(&f).is_ok()
    }

    pub fn hole_of(&self, f: usize) -> Option<u32> {
        let labels = self.hole_label.as_ref()?;
        let l = labels[f];
        if l == u32::MAX {
            None
        } else {
            Some(l)
        }
    }
}

/// Canonical box path: the two parent chains to the lowest common ancestor.
/// `b1 == b2` yields a singleton sequence.
pub fn canonical_path<F: Scalar>(tess: &Tessellation<F>, b1: &BoxId, b2: &BoxId) -> Vec<BoxId> {
    let space = BoxSpace::new(tess, 0);
    space
        .tree_path_flat(space.flat(b1), space.flat(b2))
        .into_iter()
        .map(|f| space.unflat(f))
        .collect()
}

/// Compute W, S and (optionally) the holes for a pair of elements.
///
/// W is the canonical path's closed G+ neighborhood L' together with every
/// inactive G+-component that touches L' (intersects it or sits G+-adjacent
/// to it). With that expansion every box G+-adjacent to W is active, so S is
/// exactly the active rim.
pub fn compute_region<F: Scalar>(
    space: &BoxSpace<'_, F>,
    activity: &ActivityMap,
    source: usize,
    target: usize,
    with_holes: bool,
) -> Region {
    let n = space.len();
    let path = space.tree_path_flat(source, target);

    let mut in_lprime = vec![false; n];
    let mut l_prime = Vec::new();
    let mut buf = Vec::new();
    for &f in &path {
        if !in_lprime[f] {
            in_lprime[f] = true;
            l_prime.push(f);
        }
    }
    for &f in &path {
        space.gplus_neighbors_flat(f, &mut buf);
        for &g in &buf {
            if !in_lprime[g] {
                in_lprime[g] = true;
                l_prime.push(g);
            }
        }
    }

    // Seed the inactive expansion with every inactive box in the closed
    // neighborhood of L', then flood through inactive boxes in G+.
    let mut in_w = vec![false; n];
    let mut w_set = l_prime.clone();
    for &f in &l_prime {
        in_w[f] = true;
    }
    let mut seeds: Vec<usize> = l_prime.clone();
    for &f in &l_prime {
        space.gplus_neighbors_flat(f, &mut buf);
        seeds.extend_from_slice(&buf);
    }
    let mut seen_inactive = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    for f in seeds {
        if !activity.is_active(f) && !seen_inactive[f] {
            seen_inactive[f] = true;
            if !in_w[f] {
                in_w[f] = true;
                w_set.push(f);
            }
            queue.push_back(f);
        }
    }
    while let Some(f) = queue.pop_front() {
        space.gplus_neighbors_flat(f, &mut buf);
        for &g in &buf {
            if !activity.is_active(g) && !seen_inactive[g] {
                seen_inactive[g] = true;
                if !in_w[g] {
                    in_w[g] = true;
                    w_set.push(g);
                }
                queue.push_back(g);
            }
        }
    }

    // S: the rim of W. By construction of the expansion it is all active.
    let mut in_s = vec![false; n];
    let mut s_set = Vec::new();
    for &f in &w_set {
        space.gplus_neighbors_flat(f, &mut buf);
        for &g in &buf {
            if !in_w[g] && !in_s[g] {
                debug_assert!(activity.is_active(g), "rim box must be active");
                in_s[g] = true;
                s_set.push(g);
            }
        }
    }

    w_set.sort_unstable();
    s_set.sort_unstable();
    l_prime.sort_unstable();

    let (hole_label, hole_count) = if with_holes {
        let (labels, count) = label_complement_components(space, &in_w);
        (Some(labels), count)
    } else {
        (None, 0)
    };

    Region {
        source,
        target,
        canonical_path: path,
        l_prime,
        w_set,
        s_set,
        hole_label,
        hole_count,
    }
}

/// B-components of the complement of `in_set`; returns per-box labels
/// (`u32::MAX` inside the set) and the component count.
fn label_complement_components<F: Scalar>(
    space: &BoxSpace<'_, F>,
    in_set: &[bool],
) -> (Vec<u32>, u32) {
    let n = space.len();
    let mut labels = vec![u32::MAX; n];
    let mut count = 0u32;
    let mut buf = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if in_set[start] || labels[start] != u32::MAX {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(f) = queue.pop_front() {
            space.b_neighbors_flat(f, &mut buf);
            for &g in &buf {
                if !in_set[g] && labels[g] == u32::MAX {
                    labels[g] = count;
                    queue.push_back(g);
                }
            }
        }
        count += 1;
    }
    (labels, count)
}

/// Boundary of `c_set` visible from `x`: boxes G+-adjacent to the set that
/// are reachable from `x` in B without crossing the set. Sorted flat ids.
pub fn visible_boundary<F: Scalar>(
    space: &BoxSpace<'_, F>,
    in_c: &[bool],
    x: usize,
) -> Result<Vec<usize>> {
    if !in_c.iter().any(|&b| b) {
        return Err(GirgError::InvalidInput(
            "visible boundary of the empty set is undefined".into(),
        ));
    }
    if in_c[x] {
        return Err(GirgError::InvalidInput(
            "viewpoint must lie outside the set".into(),
        ));
    }
    let n = space.len();
    let mut visited = vec![false; n];
    let mut reached = Vec::new();
    let mut buf = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    visited[x] = true;
    reached.push(x);
    queue.push_back(x);
    while let Some(f) = queue.pop_front() {
        space.b_neighbors_flat(f, &mut buf);
        for &g in &buf {
            if !in_c[g] && !visited[g] {
                visited[g] = true;
                reached.push(g);
                queue.push_back(g);
            }
        }
    }
    let mut out = Vec::new();
    for f in reached {
        space.gplus_neighbors_flat(f, &mut buf);
        if buf.iter().any(|&g| in_c[g]) {
            out.push(f);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// True iff the visible boundary induces a connected subgraph of B.
pub fn verify_boundary_connected<F: Scalar>(
    space: &BoxSpace<'_, F>,
    in_c: &[bool],
    x: usize,
) -> Result<bool> {
    let vb = visible_boundary(space, in_c, x)?;
    Ok(is_b_connected(space, &vb))
}

/// Connectivity of a sorted box set under B-adjacency restricted to the set.
pub fn is_b_connected<F: Scalar>(space: &BoxSpace<'_, F>, set: &[usize]) -> bool {
    if set.len() <= 1 {
        return true;
    }
    let mut member = vec![false; space.len()];
    for &f in set {
        member[f] = true;
    }
    let mut reached = 1usize;
    let mut visited = vec![false; space.len()];
    visited[set[0]] = true;
    let mut buf = Vec::new();
    let mut queue = std::collections::VecDeque::from([set[0]]);
    while let Some(f) = queue.pop_front() {
        space.b_neighbors_flat(f, &mut buf);
        for &g in &buf {
            if member[g] && !visited[g] {
                visited[g] = true;
                reached += 1;
                queue.push_back(g);
            }
        }
    }
    reached == set.len()
}

/// B-path between two G+-adjacent boxes that stays within G+-distance 1 of
/// `b1`. A direct B-edge is returned as-is; otherwise coordinates are
/// adjusted one at a time, stepping through a child of the higher box when
/// the levels differ.
pub fn local_shortcut_path<F: Scalar>(
    tess: &Tessellation<F>,
    b1: &BoxId,
    b2: &BoxId,
) -> Result<Vec<BoxId>> {
    if !tess.gplus_adjacent(b1, b2) {
        return Err(GirgError::InvalidInput(format!(
            "{b1} and {b2} are not G+-adjacent"
        )));
    }
    if tess.b_adjacent(b1, b2) {
        return Ok(vec![b1.clone(), b2.clone()]);
    }
    if b1.level == b2.level {
        // Diagonal same-level neighbors: fix disagreeing axes in order.
        let mut path = vec![b1.clone()];
        let mut cur = b1.clone();
        for k in 0..cur.index.len() {
            if cur.index[k] != b2.index[k] {
                cur.index[k] = b2.index[k];
                path.push(cur.clone());
            }
        }
        return Ok(path);
    }
    // Levels differ by one and the pair is not parent/child.
    let (lower, upper) = if b1.level < b2.level { (b1, b2) } else { (b2, b1) };
    let child = tess
        .children(upper)
        .into_iter()
        .find(|c| *c == *lower || tess.gplus_adjacent(c, lower))
        .expect("a child of the higher box touches the lower box");
    let mut chain = vec![lower.clone()];
    let mut cur = lower.clone();
    for k in 0..cur.index.len() {
        if cur.index[k] != child.index[k] {
            cur.index[k] = child.index[k];
            chain.push(cur.clone());
        }
    }
    chain.push(upper.clone());
    if b1.level < b2.level {
        Ok(chain)
    } else {
        chain.reverse();
        Ok(chain)
    }
}

/// Diagnostic dump: one line per box with its region tag.
pub fn region_dump<F: Scalar>(space: &BoxSpace<'_, F>, region: &Region) -> String {
    let mut in_l = vec![false; space.len()];
    for &f in &region.canonical_path {
        in_l[f] = true;
    }
    let mut in_lp = vec![false; space.len()];
    for &f in &region.l_prime {
        in_lp[f] = true;
    }
    let mut out = String::new();
    for f in 0..space.len() {
        let tag = if in_l[f] {
            "L".to_string()
        } else if in_lp[f] {
            "LPRIME".to_string()
        } else if region.in_w(f) {
            "W".to_string()
        } else if region.s_set.binary_search(&f).is_ok() {
            "S".to_string()
        } else {
            match region.hole_of(f) {
                Some(h) => format!("HOLE:{h}"),
                None => "HOLE:?".to_string(),
            }
        };
        out.push_str(&format!("{} {}\n", space.unflat(f), tag));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ModelParams;
    use crate::tessellation::build_tessellation;
    use rand::{Rng, SeedableRng};

    fn tess(d: usize, n: f64, target: f64) -> Tessellation<f64> {
        let mut p = ModelParams::new(d, 1.0, 3.0, n, 0).unwrap();
        p.d0_target = target;
        build_tessellation(&p).unwrap()
    }

    fn bid(level: u32, index: &[u32]) -> BoxId {
        BoxId::new(level, index.to_vec())
    }

    fn all_active<F: Scalar>(space: &BoxSpace<'_, F>) -> ActivityMap {
        ActivityMap::from_active_set(space, &(0..space.len()).collect::<Vec<_>>())
    }

    #[test]
    fn canonical_path_examples() {
        let t = tess(1, 16.0, 0.5); // rho0 5
        assert_eq!(
            canonical_path(&t, &bid(0, &[1]), &bid(0, &[2])),
            vec![bid(0, &[1]), bid(1, &[1]), bid(0, &[2])]
        );
        assert_eq!(
            canonical_path(&t, &bid(0, &[1]), &bid(0, &[3])),
            vec![bid(0, &[1]), bid(1, &[1]), bid(2, &[1]), bid(1, &[2]), bid(0, &[3])]
        );
        // Any box to TOP: the full parent chain.
        assert_eq!(
            canonical_path(&t, &bid(0, &[1]), &BoxId::top(5)),
            vec![bid(0, &[1]), bid(1, &[1]), bid(2, &[1]), bid(3, &[1]), bid(4, &[1]), BoxId::top(5)]
        );
        // Singleton extension.
        assert_eq!(canonical_path(&t, &bid(0, &[4]), &bid(0, &[4])), vec![bid(0, &[4])]);
        // Length bound: <= 2*rho0 + 1.
        for a in 1..=8u32 {
            for b in 1..=8u32 {
                let len = canonical_path(&t, &bid(0, &[a]), &bid(0, &[b])).len();
                assert!(len <= 2 * t.rho0 as usize + 1);
            }
        }
    }

    #[test]
    fn region_all_active_is_lprime() {
        let t = tess(1, 16.0, 0.5);
        let space = BoxSpace::new(&t, 0);
        let act = all_active(&space);
        let r = compute_region(&space, &act, space.flat(&bid(0, &[1])), space.flat(&bid(0, &[3])), true);
        assert_eq!(r.w_set, r.l_prime);
        assert!(r.in_w(space.flat(&bid(0, &[1]))));
        assert!(r.in_w(space.flat(&bid(0, &[3]))));
        // S is active and G+-adjacent to W.
        for &s in &r.s_set {
            assert!(act.is_active(s));
            let mut buf = Vec::new();
            space.gplus_neighbors_flat(s, &mut buf);
            assert!(buf.iter().any(|&g| r.in_w(g)));
        }
    }

    #[test]
    fn region_all_inactive_swallows_everything() {
        let t = tess(1, 16.0, 0.5);
        let space = BoxSpace::new(&t, 0);
        let a = space.flat(&bid(0, &[1]));
        let b = space.flat(&bid(0, &[9]));
        let act = ActivityMap::from_active_set(&space, &[a, b]);
        let r = compute_region(&space, &act, a, b, true);
        assert_eq!(r.w_set.len(), space.len());
        assert!(r.s_set.is_empty());
        assert_eq!(r.hole_count, 0);
    }

    #[test]
    fn region_excludes_detached_pocket() {
        let t = tess(1, 16.0, 0.5); // level 0 has 32 boxes
        let space = BoxSpace::new(&t, 0);
        let pocket = space.flat(&bid(0, &[20]));
        let active: Vec<usize> = (0..space.len()).filter(|&f| f != pocket).collect();
        let act = ActivityMap::from_active_set(&space, &active);
        let r = compute_region(&space, &act, space.flat(&bid(0, &[1])), space.flat(&bid(0, &[3])), true);
        assert!(!r.in_w(pocket), "detached inactive pocket must stay out of W");
        assert_eq!(r.w_set, r.l_prime);
    }

    #[test]
    fn region_w_is_gplus_connected_and_s_active() {
        let t = tess(2, 256.0, 0.25);
        let space = BoxSpace::new(&t, 0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        // Random sparse activity.
        let active: Vec<usize> = (0..space.len()).filter(|_| rng.random::<f64>() < 0.7).collect();
        let act = ActivityMap::from_active_set(&space, &active);
        for _ in 0..20 {
            let a = rng.random_range(0..space.len());
            let b = rng.random_range(0..space.len());
            let r = compute_region(&space, &act, a, b, true);
            assert!(r.in_w(a) && r.in_w(b));
            // W G+-connected.
            let mut member = vec![false; space.len()];
            for &f in &r.w_set {
                member[f] = true;
            }
            let mut visited = vec![false; space.len()];
            let mut queue = std::collections::VecDeque::from([r.w_set[0]]);
            visited[r.w_set[0]] = true;
            let mut reached = 1;
            let mut buf = Vec::new();
            while let Some(f) = queue.pop_front() {
                space.gplus_neighbors_flat(f, &mut buf);
                for &g in &buf {
                    if member[g] && !visited[g] {
                        visited[g] = true;
                        reached += 1;
                        queue.push_back(g);
                    }
                }
            }
            assert_eq!(reached, r.w_set.len(), "W must be G+-connected");
            // Every box in S active; every box G+-adjacent to W active.
            for &s in &r.s_set {
                assert!(act.is_active(s));
            }
            // Hole boundaries are active (via the S characterization).
            if let Some(labels) = &r.hole_label {
                for (f, &l) in labels.iter().enumerate() {
                    if l != u32::MAX {
                        continue;
                    }
                    assert!(r.in_w(f));
                }
            }
        }
    }

    #[test]
    fn visible_boundary_singleton_full_neighborhood() {
        let t = tess(1, 16.0, 0.5);
        let space = BoxSpace::new(&t, 0);
        let c = space.flat(&bid(0, &[10]));
        let mut in_c = vec![false; space.len()];
        in_c[c] = true;
        let far = space.flat(&bid(0, &[1]));
        let vb = visible_boundary(&space, &in_c, far).unwrap();
        let mut expect: Vec<usize> = t
            .gplus_neighbors(&bid(0, &[10]))
            .iter()
            .map(|b| space.flat(b))
            .collect();
        expect.sort_unstable();
        assert_eq!(vb, expect);
        assert!(verify_boundary_connected(&space, &in_c, far).unwrap());
    }

    #[test]
    fn visible_boundary_guards() {
        let t = tess(1, 16.0, 0.5);
        let space = BoxSpace::new(&t, 0);
        let empty = vec![false; space.len()];
        assert!(visible_boundary(&space, &empty, 0).is_err());
        let mut in_c = vec![false; space.len()];
        in_c[3] = true;
        assert!(visible_boundary(&space, &in_c, 3).is_err());
    }

    #[test]
    fn separating_set_sees_disjoint_boundaries() {
        // C = everything above level 0 plus two level-0 boxes: the
        // complement splits into two arcs with disjoint visible boundaries.
        let t = tess(1, 16.0, 0.5);
        let space = BoxSpace::new(&t, 0);
        let mut in_c = vec![false; space.len()];
        for f in 0..space.len() {
            if space.level_of_flat(f) >= 1 {
                in_c[f] = true;
            }
        }
        let cut1 = space.flat(&bid(0, &[1]));
        let cut2 = space.flat(&bid(0, &[16]));
        in_c[cut1] = true;
        in_c[cut2] = true;
        let x1 = space.flat(&bid(0, &[5]));
        let x2 = space.flat(&bid(0, &[20]));
        let vb1 = visible_boundary(&space, &in_c, x1).unwrap();
        let vb2 = visible_boundary(&space, &in_c, x2).unwrap();
        assert!(!vb1.is_empty() && !vb2.is_empty());
        assert!(vb1.iter().all(|f| !vb2.contains(f)), "boundaries must be disjoint");
        assert!(verify_boundary_connected(&space, &in_c, x1).unwrap());
        assert!(verify_boundary_connected(&space, &in_c, x2).unwrap());
    }

    #[test]
    fn boundary_connected_random_walk_sets() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for d in 1..=3usize {
            let n = match d {
                1 => 16.0,
                2 => 64.0,
                _ => 512.0,
            };
            let t = tess(d, n, 0.5);
            let space = BoxSpace::new(&t, 0);
            let mut buf = Vec::new();
            for _ in 0..60 {
                // Random G+-connected set from a random walk.
                let mut in_c = vec![false; space.len()];
                let mut cur = rng.random_range(0..space.len());
                in_c[cur] = true;
                let steps = rng.random_range(1..=30usize);
                for _ in 0..steps {
                    space.gplus_neighbors_flat(cur, &mut buf);
                    cur = buf[rng.random_range(0..buf.len())];
                    in_c[cur] = true;
                }
                let outside: Vec<usize> = (0..space.len()).filter(|&f| !in_c[f]).collect();
                if outside.is_empty() {
                    continue;
                }
                let x = outside[rng.random_range(0..outside.len())];
                assert!(
                    verify_boundary_connected(&space, &in_c, x).unwrap(),
                    "boundary not B-connected (d={d})"
                );
            }
        }
    }

    #[test]
    fn shortcut_path_examples() {
        let t = tess(2, 1024.0, 0.25);
        // Facet neighbors: the direct B-edge.
        let p = local_shortcut_path(&t, &bid(0, &[3, 3]), &bid(0, &[4, 3])).unwrap();
        assert_eq!(p, vec![bid(0, &[3, 3]), bid(0, &[4, 3])]);
        // Diagonal neighbors: two steps via the (1,0)-offset box.
        let p = local_shortcut_path(&t, &bid(0, &[3, 3]), &bid(0, &[4, 4])).unwrap();
        assert_eq!(p, vec![bid(0, &[3, 3]), bid(0, &[4, 3]), bid(0, &[4, 4])]);
        // Cross-level non-parent neighbor: ends with a child-to-parent edge.
        let b1 = bid(0, &[4, 4]);
        let b2 = bid(1, &[3, 2]); // touches (4,4) at its geometric corner
        assert!(t.gplus_adjacent(&b1, &b2));
        assert_ne!(t.parent(&b1).unwrap(), b2);
        let p = local_shortcut_path(&t, &b1, &b2).unwrap();
        assert_eq!(p.first().unwrap(), &b1);
        assert_eq!(p.last().unwrap(), &b2);
        let last_step_child = &p[p.len() - 2];
        assert_eq!(t.parent(last_step_child).unwrap(), b2);
        // Not adjacent: error.
        assert!(local_shortcut_path(&t, &bid(0, &[1, 1]), &bid(0, &[10, 10])).is_err());
    }

    #[test]
    fn shortcut_path_structural_invariants() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for d in [1usize, 2, 3] {
            let n = match d {
                1 => 16.0,
                2 => 64.0,
                _ => 512.0,
            };
            let t = tess(d, n, 0.5);
            let space = BoxSpace::new(&t, 0);
            let mut buf = Vec::new();
            for _ in 0..200 {
                let f = rng.random_range(0..space.len());
                space.gplus_neighbors_flat(f, &mut buf);
                let g = buf[rng.random_range(0..buf.len())];
                let b1 = space.unflat(f);
                let b2 = space.unflat(g);
                let path = local_shortcut_path(&t, &b1, &b2).unwrap();
                assert_eq!(path.first().unwrap(), &b1);
                assert_eq!(path.last().unwrap(), &b2);
                for w in path.windows(2) {
                    assert!(t.b_adjacent(&w[0], &w[1]), "consecutive must be B-adjacent");
                }
                for b in &path {
                    assert!(
                        *b == b1 || tess_gplus_dist1(&t, &b1, b),
                        "box {b} outside the G+-ball of {b1}"
                    );
                }
            }
        }
    }

    fn tess_gplus_dist1(t: &Tessellation<f64>, a: &BoxId, b: &BoxId) -> bool {
        a == b || t.gplus_adjacent(a, b)
    }

    #[test]
    fn region_dump_tags() {
        let t = tess(1, 4.0, 0.5);
        let space = BoxSpace::new(&t, 0);
        let act = all_active(&space);
        let r = compute_region(&space, &act, space.flat(&bid(0, &[1])), space.flat(&bid(0, &[2])), true);
        let dump = region_dump(&space, &r);
        assert!(dump.lines().count() == space.len());
        assert!(dump.contains("L0:1 L\n"));
        for line in dump.lines() {
            let tag = line.split_whitespace().nth(1).unwrap();
            assert!(
                tag == "L" || tag == "LPRIME" || tag == "W" || tag == "S" || tag.starts_with("HOLE:"),
                "bad tag {tag}"
            );
        }
    }
}
