//! Immutable adjacency storage, BFS distances, connected components and
//! graph-power distance queries.

use crate::error::{GirgError, Result};
use crate::geometry::{ModelParams, WeightedVertex};
use crate::scalar::Scalar;

/// Distance sentinel for unreachable vertices. Distances are 32-bit;
/// desk-scale graphs never get close.
pub const INFINITY: u32 = u32::MAX;

/// Plain undirected adjacency with sorted neighbor lists and no self-loops.
#[derive(Debug, Clone, Default)]
pub struct AdjacencyList {
    adj: Vec<Vec<u32>>,
}

impl AdjacencyList {
    pub fn new(num_vertices: usize) -> Self {
        AdjacencyList { adj: vec![Vec::new(); num_vertices] }
    }

    /// Build from an undirected edge list; neighbor lists end up sorted.
    pub fn from_edges(num_vertices: usize, edges: &[(u32, u32)]) -> Self {
        let mut adj = vec![Vec::new(); num_vertices];
        for &(u, v) in edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        AdjacencyList { adj }
    }

    /// Take ownership of per-vertex lists; sorts and dedups each.
    pub fn from_lists(mut adj: Vec<Vec<u32>>) -> Self {
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        AdjacencyList { adj }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// Sorted (u, v) pairs with u < v.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }
}

/// A sampled threshold GIRG: parameters, vertices and adjacency.
#[derive(Debug, Clone)]
pub struct GirgGraph<F: Scalar> {
    pub params: ModelParams<F>,
    pub vertices: Vec<WeightedVertex<F>>,
    pub adjacency: AdjacencyList,
}

impl<F: Scalar> GirgGraph<F> {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.num_edges()
    }
}

/// Exact unweighted shortest-path distances from `source`; `INFINITY` marks
/// unreachable vertices.
pub fn bfs_distances(graph: &AdjacencyList, source: u32) -> Result<Vec<u32>> {
    if source as usize >= graph.num_vertices() {
        return Err(GirgError::InvalidInput(format!(
            "source {} out of range ({} vertices)",
            source,
            graph.num_vertices()
        )));
    }
    let mut dist = vec![INFINITY; graph.num_vertices()];
    let mut queue = std::collections::VecDeque::new();
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &v in graph.neighbors(u) {
            if dist[v as usize] == INFINITY {
                dist[v as usize] = du + 1;
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// BFS that also records parents, for path reconstruction.
pub fn bfs_tree(graph: &AdjacencyList, source: u32) -> (Vec<u32>, Vec<u32>) {
    let n = graph.num_vertices();
    let mut dist = vec![INFINITY; n];
    let mut parent = vec![INFINITY; n];
    let mut queue = std::collections::VecDeque::new();
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &v in graph.neighbors(u) {
            if dist[v as usize] == INFINITY {
                dist[v as usize] = du + 1;
                parent[v as usize] = u;
                queue.push_back(v);
            }
        }
    }
    (dist, parent)
}

/// Shortest path from u to v as a vertex sequence, or None if disconnected.
pub fn bfs_path(graph: &AdjacencyList, u: u32, v: u32) -> Option<Vec<u32>> {
    let (dist, parent) = bfs_tree(graph, u);
    if dist[v as usize] == INFINITY {
        return None;
    }
    let mut path = vec![v];
    let mut cur = v;
    while cur != u {
        cur = parent[cur as usize];
        path.push(cur);
    }
    path.reverse();
    Some(path)
}

/// Partition of the vertex set into connected components.
#[derive(Debug, Clone)]
pub struct ComponentLabeling {
    /// Component id per vertex (0-based, dense).
    pub label: Vec<u32>,
    /// Size per component id.
    pub sizes: Vec<usize>,
    /// Id of a largest component, if the graph is non-empty.
    pub largest: Option<u32>,
}

impl ComponentLabeling {
    pub fn num_components(&self) -> usize {
        self.sizes.len()
    }

    pub fn vertices_of(&self, comp: u32) -> Vec<u32> {
        self.label
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == comp)
            .map(|(v, _)| v as u32)
            .collect()
    }
}

/// Connected components via repeated BFS.
pub fn components(graph: &AdjacencyList) -> ComponentLabeling {
    let n = graph.num_vertices();
    let mut label = vec![u32::MAX; n];
    let mut sizes = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if label[start] != u32::MAX {
            continue;
        }
        let comp = sizes.len() as u32;
        let mut size = 0usize;
        label[start] = comp;
        queue.push_back(start as u32);
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in graph.neighbors(u) {
                if label[v as usize] == u32::MAX {
                    label[v as usize] = comp;
                    queue.push_back(v);
                }
            }
        }
        sizes.push(size);
    }
    let largest = sizes
        .iter()
        .enumerate()
        .max_by_key(|(i, &s)| (s, std::cmp::Reverse(*i)))
        .map(|(i, _)| i as u32);
    ComponentLabeling { label, sizes, largest }
}

/// Distance in the k-th graph power: `ceil(dist_G(u, v) / k)`, with the
/// `INFINITY` sentinel passed through for unreachable pairs.
pub fn power_distance(graph: &AdjacencyList, u: u32, v: u32, k: u32) -> Result<u32> {
    if k == 0 {
        return Err(GirgError::InvalidInput("power k must be >= 1".into()));
    }
    let dist = bfs_distances(graph, u)?;
    let d = dist[v as usize];
    if d == INFINITY {
        return Ok(INFINITY);
    }
    Ok(d.div_ceil(k))
}
