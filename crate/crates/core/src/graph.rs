//! Simple undirected graphs, vertex potentials and the Hamiltonian `A + diag(Q)`.
//!
//! The potential enters with a plus sign. Results stated for `A - Q` are
//! recovered by negating the potential before building the Hamiltonian.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{PstError, Result};

/// Undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    neighbors: Vec<BTreeSet<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(PstError::input("graph must have at least one vertex"));
        }
        let mut set = BTreeSet::new();
        let mut neighbors = vec![BTreeSet::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(PstError::input(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{n}"
                )));
            }
            if a == b {
                return Err(PstError::input(format!("self-loop at vertex {a}")));
            }
            let key = (a.min(b), a.max(b));
            if !set.insert(key) {
                return Err(PstError::input(format!("duplicate edge ({a}, {b})")));
            }
            neighbors[a].insert(b);
            neighbors[b].insert(a);
        }
        Ok(Graph {
            n,
            edges: set,
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.neighbors[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(PstError::input(format!(
                "vertex {v} out of range for graph on {} vertices",
                self.n
            )))
        }
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(PstError::input("cycle needs at least 3 vertices"));
        }
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    /// Star with center 0 and leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Result<Self> {
        Graph::new(leaves + 1, (1..=leaves).map(|i| (0, i)))
    }

    /// `K_n` with the edge `{a, b}` removed.
    pub fn complete_minus_edge(n: usize, a: usize, b: usize) -> Result<Self> {
        let key = (a.min(b), a.max(b));
        if a == b || key.1 >= n {
            return Err(PstError::input(format!("({a}, {b}) is not an edge of K_{n}")));
        }
        Graph::new(
            n,
            (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&e| e != key),
        )
    }
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn path_graph(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(PstError::input("path must have at least one vertex"));
    }
    Graph::new(n, (1..n).map(|i| (i - 1, i)))
}

/// Real on-site energy per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential(Vec<f64>);

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(PstError::input(format!(
                "potential entry {i} is not finite"
            )));
        }
        Ok(Potential(values))
    }

    pub fn zeros(n: usize) -> Self {
        Potential(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for Potential {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `q + c` at every vertex. Eigenvectors are unchanged and every eigenvalue moves by `c`.
pub fn shift_potential(q: &Potential, c: f64) -> Potential {
    Potential(q.0.iter().map(|x| x + c).collect())
}

/// Potential on the product graph: entry `a * n2 + b` is `q1[a] + q2[b]`.
pub fn combine_potentials(q1: &Potential, q2: &Potential) -> Potential {
    Potential(
        q1.0.iter()
            .flat_map(|a| q2.0.iter().map(move |b| a + b))
            .collect(),
    )
}

/// Cartesian product with vertex `(a, b)` encoded as `a * g2.n() + b`.
///
/// `(a, b) ~ (c, d)` iff `a == c` and `b ~ d` in `g2`, or `b == d` and `a ~ c` in `g1`,
/// so the adjacency matrix is `A1 ⊗ I + I ⊗ A2`.
pub fn cartesian_product(g1: &Graph, g2: &Graph) -> Graph {
    let n2 = g2.n;
    let mut edges = Vec::with_capacity(g1.n * g2.edge_count() + n2 * g1.edge_count());
    for a in 0..g1.n {
        for (b, d) in g2.edges() {
            edges.push((a * n2 + b, a * n2 + d));
        }
    }
    for (a, c) in g1.edges() {
        for b in 0..n2 {
            edges.push((a * n2 + b, c * n2 + b));
        }
    }
    Graph::new(g1.n * n2, edges).expect("product of simple graphs is simple")
}

/// All non-adjacent pairs `(u, v)`, `u < v`, with identical neighborhoods.
pub fn find_twins(g: &Graph) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..g.n {
        for v in u + 1..g.n {
            if !g.has_edge(u, v) && g.neighbors[u] == g.neighbors[v] {
                out.push((u, v));
            }
        }
    }
    out
}

pub fn are_twins(g: &Graph, u: usize, v: usize) -> bool {
    u != v && u < g.n && v < g.n && !g.has_edge(u, v) && g.neighbors[u] == g.neighbors[v]
}

/// Real symmetric `A + diag(Q)` together with the graph and potential it came from.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    matrix: DMatrix<f64>,
    graph: Graph,
    potential: Potential,
}

impl Hamiltonian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn n(&self) -> usize {
        self.graph.n
    }
}

pub fn build_hamiltonian(g: &Graph, q: &Potential) -> Result<Hamiltonian> {
    if q.len() != g.n {
        return Err(PstError::DimensionMismatch {
            expected: g.n,
            found: q.len(),
        });
    }
    let mut matrix = g.adjacency();
    for (i, &x) in q.0.iter().enumerate() {
        matrix[(i, i)] = x;
    }
    Ok(Hamiltonian {
        matrix,
        graph: g.clone(),
        potential: q.clone(),
    })
}
