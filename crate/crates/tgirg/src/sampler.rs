//! Threshold GIRG sampling: Poisson vertex counts, uniform positions,
//! exact Pareto weights, and two edge builders (naive all-pairs and a
//! weight-layered cell grid) that produce identical edge sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{GirgError, Result};
use crate::geometry::{threshold_connects, ModelParams, TorusPoint, WeightedVertex};
use crate::graph::{AdjacencyList, GirgGraph};
use crate::scalar::Scalar;

/// Inverse-CDF weight transform: for U in [0,1), `w = (1-U)^(-1/(tau-1))`,
/// so that P(W >= x) = x^(1-tau) exactly for x >= 1.
pub fn weight_from_uniform(u: f64, tau: f64) -> f64 {
    (1.0 - u).powf(-1.0 / (tau - 1.0))
}

/// Draw the vertex set: count is Poisson with mean `lambda * n`, positions
/// i.i.d. uniform on the torus, weights i.i.d. Pareto via inverse transform.
pub fn sample_vertices<F: Scalar>(params: &ModelParams<F>) -> Vec<WeightedVertex<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mean = params.lambda.to_f64_lossy() * params.n.to_f64_lossy();
    let count = Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize;
    let side = params.side().to_f64_lossy();
    let tau = params.tau.to_f64_lossy();
    let mut vertices = Vec::with_capacity(count);
    for id in 0..count {
        let coords: Vec<F> = (0..params.d)
            .map(|_| F::from_f64_lossy(rng.random_range(0.0..side)))
            .collect();
        let w = weight_from_uniform(rng.random::<f64>(), tau);
        vertices.push(WeightedVertex {
            id: id as u32,
            pos: TorusPoint::new(coords),
            weight: F::from_f64_lossy(w),
        });
    }
    vertices
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Pair-keyed retention stream: keyed by the sorted id pair and the seed, so
/// naive and grid construction make identical retention decisions.
pub fn retains_edge(seed: u64, u: u32, v: u32, edge_prob: f64) -> bool {
    if edge_prob >= 1.0 {
        return true;
    }
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    let h = splitmix64(seed ^ splitmix64(((a as u64) << 32) | b as u64));
    // 53-bit mantissa to uniform in [0, 1).
    let x = (h >> 11) as f64 / (1u64 << 53) as f64;
    x < edge_prob
}

/// All-pairs edge construction: the oracle the grid builder is held to.
pub fn build_edges_naive<F: Scalar>(
    vertices: Vec<WeightedVertex<F>>,
    params: &ModelParams<F>,
) -> GirgGraph<F> {
    let p = params.edge_prob.to_f64_lossy();
    let mut lists = vec![Vec::new(); vertices.len()];
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            if threshold_connects(&vertices[i], &vertices[j], params)
                && retains_edge(params.seed, i as u32, j as u32, p)
            {
                lists[i].push(j as u32);
                lists[j].push(i as u32);
            }
        }
    }
    GirgGraph { params: *params, vertices, adjacency: AdjacencyList::from_lists(lists) }
}

/// Per-weight-layer geometric cell index. Layer `l` holds weights in
/// `[2^(dl/2), 2^(d(l+1)/2))`; a pair from layers (i, j) can only connect
/// within max-norm distance `2^((i+j)/2 + 1)`, so scans stay local.
struct LayerGrid {
    cells_per_axis: usize,
    cell_side: f64,
    /// Cell -> vertex index list (row-major over d axes).
    buckets: Vec<Vec<u32>>,
}

impl LayerGrid {
    fn build(d: usize, side: f64, layer: usize, members: &[(u32, Vec<f64>)]) -> Self {
        // Cell side at least the layer's own interaction scale.
        let target = 2.0f64.powf(layer as f64 / 2.0 + 1.0);
        let cells_per_axis = ((side / target).floor() as usize).max(1);
        let cell_side = side / cells_per_axis as f64;
        let mut buckets = vec![Vec::new(); cells_per_axis.pow(d as u32)];
        for (idx, coords) in members {
            let mut cell = 0usize;
            for &c in coords.iter().rev() {
                let k = ((c / cell_side) as usize).min(cells_per_axis - 1);
                cell = cell * cells_per_axis + k;
            }
            buckets[cell].push(*idx);
        }
        LayerGrid { cells_per_axis, cell_side, buckets }
    }

    /// Distinct per-axis cell indices overlapping `[x - r, x + r]` mod torus.
    fn axis_range(&self, x: f64, r: f64) -> Vec<usize> {
        let m = self.cells_per_axis;
        let lo = ((x - r) / self.cell_side).floor() as i64;
        let hi = ((x + r) / self.cell_side).floor() as i64;
        if (hi - lo + 1) as usize >= m {
            return (0..m).collect();
        }
        let mut out: Vec<usize> = (lo..=hi).map(|k| k.rem_euclid(m as i64) as usize).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Grid-accelerated edge construction. Produces exactly the naive edge set:
/// candidates are complete (any connectable pair lies within the layer-pair
/// radius) and the final test is the exact threshold rule plus the same
/// pair-keyed retention stream.
pub fn build_edges_grid<F: Scalar>(
    vertices: Vec<WeightedVertex<F>>,
    params: &ModelParams<F>,
) -> GirgGraph<F> {
    let d = params.d;
    let side = params.side().to_f64_lossy();
    let p = params.edge_prob.to_f64_lossy();

    // Assign each vertex its weight layer.
    let mut layers: Vec<Vec<(u32, Vec<f64>)>> = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        let w = v.weight.to_f64_lossy();
        let l = ((2.0 * w.log2() / d as f64).floor().max(0.0)) as usize;
        if l >= layers.len() {
            layers.resize_with(l + 1, Vec::new);
        }
        let coords: Vec<f64> = v.pos.coords.iter().map(|c| c.to_f64_lossy()).collect();
        layers[l].push((i as u32, coords));
    }

    let grids: Vec<Option<LayerGrid>> = layers
        .iter()
        .enumerate()
        .map(|(l, members)| {
            if members.is_empty() {
                None
            } else {
                Some(LayerGrid::build(d, side, l, members))
            }
        })
        .collect();

    let mut lists = vec![Vec::new(); vertices.len()];
    let mut add = |lists: &mut Vec<Vec<u32>>, a: u32, b: u32| {
        lists[a as usize].push(b);
        lists[b as usize].push(a);
    };

    for i in 0..layers.len() {
        if layers[i].is_empty() {
            continue;
        }
        for j in i..layers.len() {
            let Some(grid) = grids[j].as_ref() else { continue };
            // Weight product < 2^(d(i+1)/2) * 2^(d(j+1)/2); connection needs
            // dist^d <= product, so dist < 2^((i+j)/2 + 1).
            let radius = 2.0f64.powf((i + j) as f64 / 2.0 + 1.0).min(side / 2.0);
            for (ui, coords) in &layers[i] {
                let axis_cells: Vec<Vec<usize>> =
                    coords.iter().map(|&x| grid.axis_range(x, radius)).collect();
                // Iterate the cartesian product of per-axis cell choices.
                let mut counters = vec![0usize; d];
                loop {
                    let mut cell = 0usize;
                    for k in (0..d).rev() {
                        cell = cell * grid.cells_per_axis + axis_cells[k][counters[k]];
                    }
                    for &vj in &grid.buckets[cell] {
                        let keep = if i == j { *ui < vj } else { true };
                        if keep
                            && threshold_connects(
                                &vertices[*ui as usize],
                                &vertices[vj as usize],
                                params,
                            )
                            && retains_edge(params.seed, *ui, vj, p)
                        {
                            add(&mut lists, *ui, vj);
                        }
                    }
                    // Advance the mixed-radix counter.
                    let mut k = 0;
                    loop {
                        if k == d {
                            break;
                        }
                        counters[k] += 1;
                        if counters[k] < axis_cells[k].len() {
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
        }
    }

    GirgGraph { params: *params, vertices, adjacency: AdjacencyList::from_lists(lists) }
}

/// Sample a complete graph instance with the grid builder.
pub fn sample_graph<F: Scalar>(params: &ModelParams<F>) -> GirgGraph<F> {
    let vertices = sample_vertices(params);
    build_edges_grid(vertices, params)
}

/// Least-squares slope of ln CCDF vs ln x over a one-decade log grid.
///
/// The decade is anchored at the value of rank `max(20, len/1000)` so every
/// fit point has at least ~20 samples above it. Returns the tail exponent
/// `a` in `P(X >= x) ~ x^(-a)`.
pub fn tail_exponent_fit(samples: &[f64]) -> Result<f64> {
    let mut xs: Vec<f64> = samples.iter().copied().filter(|x| *x > 0.0).collect();
    if xs.len() < 1000 {
        return Err(GirgError::InsufficientData(format!(
            "need >= 1000 positive samples, got {}",
            xs.len()
        )));
    }
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let m = xs.len();
    let top_rank = (m / 1000).max(20).min(m - 1);
    let x_hi = xs[m - 1 - top_rank];
    let x_lo = x_hi / 10.0;
    if x_lo < 1.0 || x_hi <= x_lo {
        return Err(GirgError::InsufficientData(
            "tail too short to span a decade".into(),
        ));
    }
    let grid = 16;
    let mut pts = Vec::with_capacity(grid);
    for g in 0..grid {
        let x = x_lo * 10.0f64.powf(g as f64 / (grid - 1) as f64);
        // Fraction of samples >= x via binary search on the sorted values.
        let idx = xs.partition_point(|&v| v < x);
        let ccdf = (m - idx) as f64 / m as f64;
        if ccdf > 0.0 {
            pts.push((x.ln(), ccdf.ln()));
        }
    }
    if pts.len() < 4 {
        return Err(GirgError::InsufficientData("too few usable fit points".into()));
    }
    let (slope, _intercept, _r2) = least_squares(&pts);
    Ok(-slope)
}

/// Plain least squares over (x, y) points: (slope, intercept, r^2).
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Fitted tail exponent of the empirical degree distribution over the upper
/// decade of degrees; expected near `tau - 1` for GIRG samples.
pub fn degree_tail_stats<F: Scalar>(graph: &GirgGraph<F>) -> Result<f64> {
    if graph.num_vertices() < 10_000 {
        return Err(GirgError::InsufficientData(format!(
            "need >= 10^4 vertices, got {}",
            graph.num_vertices()
        )));
    }
    let degrees: Vec<f64> = (0..graph.num_vertices())
        .map(|v| graph.adjacency.degree(v as u32) as f64)
        .filter(|&d| d > 0.0)
        .collect();
    if degrees.len() < 1000 {
        return Err(GirgError::InsufficientData("graph has almost no edges".into()));
    }
    tail_exponent_fit(&degrees)
}
