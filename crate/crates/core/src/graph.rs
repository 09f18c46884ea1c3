//! Block graphs: cliques with singleton separators, running-intersection
//! ordering, and unique shortest paths.
//!
//! A block graph is a connected decomposable graph whose clique separators
//! are all single vertices. Between any two vertices there is a unique
//! shortest path, which makes pairwise marginalization reducible to a chain
//! along that path ([`BlockGraph::chain_reduction`]).

use thiserror::Error;

/// Errors from block-graph construction and queries.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("clique list is empty")]
    EmptyCliques,
    #[error("clique {index} has {size} vertices; cliques need at least 2")]
    CliqueTooSmall { index: usize, size: usize },
    #[error("clique {index} repeats vertex {vertex}")]
    DuplicateVertex { index: usize, vertex: usize },
    #[error("clique-intersection graph is not connected (clique {index} shares no vertex with the component grown so far)")]
    NotConnected { index: usize },
    #[error("separator {intersection:?} is not a singleton; only block graphs (all separators single vertices) are supported")]
    SeparatorNotSingleton { intersection: Vec<usize> },
    #[error("cliques admit no running-intersection order (the union graph is not decomposable as given)")]
    NotDecomposable,
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(usize),
    #[error("path endpoints must differ (both are {0})")]
    SameVertex(usize),
}

/// A path through the graph; consecutive vertices share a clique.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    /// Vertex labels from source to target, inclusive.
    pub vertices: Vec<usize>,
}

impl Path {
    /// Number of edges on the path.
    pub fn length(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Interior vertices (everything strictly between the endpoints).
    pub fn interior(&self) -> &[usize] {
        &self.vertices[1..self.vertices.len() - 1]
    }

    /// Consecutive vertex pairs along the path.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.vertices.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// A validated block graph.
///
/// Cliques are stored in a running-intersection order; [`BlockGraph::declared_index`]
/// maps each stored clique back to its position in the input list so callers
/// can align per-clique data supplied in declaration order.
#[derive(Clone, Debug)]
pub struct BlockGraph {
    /// Sorted distinct vertex labels.
    vertices: Vec<usize>,
    /// Cliques in running-intersection order; each clique keeps its declared
    /// vertex order (gauge arguments bind positionally to it).
    cliques: Vec<Vec<usize>>,
    /// `declared_index[k]` = position of stored clique `k` in the input list.
    declared_index: Vec<usize>,
    /// One separator vertex per stored clique after the first.
    separators: Vec<usize>,
    /// Adjacency lists over vertex *indices* (positions in `vertices`).
    adj: Vec<Vec<usize>>,
}

impl BlockGraph {
    /// Sorted distinct vertex labels.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Position of a vertex label in coordinate vectors, or `None`.
    pub fn vertex_index(&self, label: usize) -> Option<usize> {
        self.vertices.binary_search(&label).ok()
    }

    /// Cliques in running-intersection order (vertices in declared order).
    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    /// Input-list position of stored clique `k`.
    pub fn declared_index(&self, k: usize) -> usize {
        self.declared_index[k]
    }

    /// Separator multiset: one vertex per clique after the first in the
    /// running-intersection order.
    pub fn separators(&self) -> &[usize] {
        &self.separators
    }

    /// The unique shortest path between two distinct vertices.
    pub fn shortest_path(&self, i: usize, j: usize) -> Result<Path, GraphError> {
        if i == j {
            return Err(GraphError::SameVertex(i));
        }
        let si = self.vertex_index(i).ok_or(GraphError::UnknownVertex(i))?;
        let sj = self.vertex_index(j).ok_or(GraphError::UnknownVertex(j))?;

        // BFS from si; parents are unique on the shortest path to sj because
        // block graphs have unique shortest paths.
        let n = self.vertices.len();
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        seen[si] = true;
        queue.push_back(si);
        while let Some(u) = queue.pop_front() {
            if u == sj {
                break;
            }
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = u;
                    queue.push_back(w);
                }
            }
        }
        debug_assert!(seen[sj], "connected graph must reach every vertex");
        let mut rev = vec![sj];
        let mut cur = sj;
        while cur != si {
            cur = parent[cur];
            rev.push(cur);
        }
        rev.reverse();
        Ok(Path { vertices: rev.into_iter().map(|k| self.vertices[k]).collect() })
    }

    /// The ordered edge list along the shortest path from `i` to `j`; the
    /// pairwise marginal of the full model equals the marginal of the chain
    /// model on these edges.
    pub fn chain_reduction(&self, i: usize, j: usize) -> Result<Vec<(usize, usize)>, GraphError> {
        Ok(self.shortest_path(i, j)?.edges())
    }

    /// Index of a stored clique containing both vertices, or `None`.
    pub fn clique_containing(&self, a: usize, b: usize) -> Option<usize> {
        self.cliques
            .iter()
            .position(|c| c.contains(&a) && c.contains(&b))
    }
}

/// Builds a [`BlockGraph`] from a clique list, reordering cliques to satisfy
/// the running-intersection property and validating that every separator is
/// a single vertex. The result is independent of the input order (up to the
/// stored order itself; vertex set, separator multiset, and paths agree).
pub fn build_block_graph(cliques: &[Vec<usize>]) -> Result<BlockGraph, GraphError> {
    if cliques.is_empty() {
        return Err(GraphError::EmptyCliques);
    }
    for (index, c) in cliques.iter().enumerate() {
        if c.len() < 2 {
            return Err(GraphError::CliqueTooSmall { index, size: c.len() });
        }
        let mut sorted = c.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateVertex { index, vertex: w[0] });
            }
        }
    }

    // Greedy running-intersection order: seed with the clique holding the
    // globally smallest label (ties by declared position), then repeatedly
    // take the unplaced clique with the largest overlap with the covered
    // vertex set. For block graphs every valid order has singleton overlaps,
    // so a >1 overlap or a non-covered-contained one is a structure error.
    let m = cliques.len();
    let min_label = |c: &Vec<usize>| *c.iter().min().unwrap();
    let mut seed = 0usize;
    for k in 1..m {
        if min_label(&cliques[k]) < min_label(&cliques[seed]) {
            seed = k;
        }
    }

    let mut placed = vec![false; m];
    let mut order: Vec<usize> = Vec::with_capacity(m);
    let mut covered: Vec<usize> = Vec::new(); // sorted labels
    let mut separators: Vec<usize> = Vec::with_capacity(m - 1);

    placed[seed] = true;
    order.push(seed);
    covered.extend(cliques[seed].iter().copied());
    covered.sort_unstable();

    for _ in 1..m {
        let mut best: Option<(usize, usize)> = None; // (overlap, clique index)
        for k in 0..m {
            if placed[k] {
                continue;
            }
            let overlap = cliques[k]
                .iter()
                .filter(|v| covered.binary_search(v).is_ok())
                .count();
            if overlap > 0 {
                let better = match best {
                    None => true,
                    Some((bo, bk)) => overlap > bo || (overlap == bo && k < bk),
                };
                if better {
                    best = Some((overlap, k));
                }
            }
        }
        let (_, k) = match best {
            Some(b) => b,
            None => {
                let index = placed.iter().position(|p| !p).unwrap();
                return Err(GraphError::NotConnected { index });
            }
        };
        let intersection: Vec<usize> = cliques[k]
            .iter()
            .copied()
            .filter(|v| covered.binary_search(v).is_ok())
            .collect();
        if intersection.len() > 1 {
            let mut inter = intersection;
            inter.sort_unstable();
            // A multi-vertex overlap contained in one earlier clique is a
            // decomposable-but-not-block structure; otherwise no
            // running-intersection order exists at all.
            let in_one = order
                .iter()
                .any(|&o| inter.iter().all(|v| cliques[o].contains(v)));
            return if in_one {
                Err(GraphError::SeparatorNotSingleton { intersection: inter })
            } else {
                Err(GraphError::NotDecomposable)
            };
        }
        separators.push(intersection[0]);
        placed[k] = true;
        order.push(k);
        for &v in &cliques[k] {
            if covered.binary_search(&v).is_err() {
                let pos = covered.binary_search(&v).unwrap_err();
                covered.insert(pos, v);
            }
        }
    }

    let vertices = covered;
    let n = vertices.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in cliques {
        for (p, &a) in c.iter().enumerate() {
            for &b in &c[p + 1..] {
                let ia = vertices.binary_search(&a).unwrap();
                let ib = vertices.binary_search(&b).unwrap();
                if !adj[ia].contains(&ib) {
                    adj[ia].push(ib);
                    adj[ib].push(ia);
                }
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
    }

    Ok(BlockGraph {
        vertices,
        cliques: order.iter().map(|&k| cliques[k].clone()).collect(),
        declared_index: order,
        separators,
        adj,
    })
}
