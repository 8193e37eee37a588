//! Simple undirected graphs on bitset rows and enumeration of the maximal
//! cliques above a size threshold.

use std::fmt::Write;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;

use super::SearchError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

fn ones(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(w, &word)| {
        let mut x = word;
        std::iter::from_fn(move || {
            (x != 0).then(|| {
                let b = x.trailing_zeros() as usize;
                x &= x - 1;
                64 * w + b
            })
        })
    })
}

fn first_one(set: &[u64]) -> Option<usize> {
    set.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| 64 * i + w.trailing_zeros() as usize)
}

fn count(set: &[u64]) -> usize {
    set.iter().map(|w| w.count_ones() as usize).sum()
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = words_for(n);
        Graph {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    /// Graph with an edge `{u, v}` wherever `adjacent(u, v)` holds (`u < v`).
    pub fn from_predicate(n: usize, adjacent: impl Fn(usize, usize) -> bool + Sync) -> Self {
        let words = words_for(n);
        let mut bits = vec![0u64; n * words];
        bits.par_chunks_mut(words).enumerate().for_each(|(u, row)| {
            for v in u + 1..n {
                if adjacent(u, v) {
                    row[v / 64] |= 1 << (v % 64);
                }
            }
        });
        for u in 0..n {
            for v in u + 1..n {
                if (bits[u * words + v / 64] >> (v % 64)) & 1 == 1 {
                    bits[v * words + u / 64] |= 1 << (u % 64);
                }
            }
        }
        Graph { n, words, bits }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && u < self.n && v < self.n, "bad edge ({u}, {v})");
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        (self.neighbors(u)[v / 64] >> (v % 64)) & 1 == 1
    }

    pub fn degree(&self, u: usize) -> usize {
        count(self.neighbors(u))
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).min().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).sum::<usize>() / 2
    }

    /// An edge lying in no triangle, if any.
    pub fn edge_outside_triangles(&self) -> Option<(usize, usize)> {
        (0..self.n).into_par_iter().find_map_first(|u| {
            let nu = self.neighbors(u);
            ones(nu).filter(|&v| v > u).find_map(|v| {
                let nv = self.neighbors(v);
                let shared = nu.iter().zip(nv).any(|(a, b)| a & b != 0);
                (!shared).then_some((u, v))
            })
        })
    }

    /// `graph <n> <edges>` then one line `u: v w ...` per vertex, 1-based.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = format!("graph {} {}\n", self.n, self.edge_count());
        for u in 0..self.n {
            let nbrs: Vec<String> = ones(self.neighbors(u)).map(|v| (v + 1).to_string()).collect();
            writeln!(out, "{}: {}", u + 1, nbrs.join(" ")).unwrap();
        }
        out
    }

    /// Whether no vertex outside `clique` is adjacent to all of it.
    pub fn is_maximal_clique(&self, clique: &[usize]) -> bool {
        let mut common = vec![u64::MAX; self.words];
        for &u in clique {
            for (c, n) in common.iter_mut().zip(self.neighbors(u)) {
                *c &= n;
            }
        }
        for &u in clique {
            common[u / 64] &= !(1 << (u % 64));
        }
        // bits past the last vertex are never set in neighbour rows
        common.iter().all(|&w| w == 0)
    }

    /// Vertices ordered by repeatedly removing one of least remaining degree.
    pub fn degeneracy_order(&self) -> Vec<usize> {
        let mut deg: Vec<usize> = (0..self.n).map(|u| self.degree(u)).collect();
        let mut removed = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let u = (0..self.n)
                .filter(|&u| !removed[u])
                .min_by_key(|&u| (deg[u], u))
                .expect("vertex left");
            removed[u] = true;
            order.push(u);
            for v in ones(self.neighbors(u)) {
                if !removed[v] {
                    deg[v] -= 1;
                }
            }
        }
        order
    }
}

/// Enumeration of maximal cliques of size at least `min_size`.
#[derive(Clone, Debug)]
pub struct CliqueSearch {
    pub min_size: usize,
    /// Stop after this many search nodes.
    pub node_budget: Option<u64>,
}

/// Adjacency restricted to a vertex subset, re-indexed densely.
struct Local {
    words: usize,
    adj: Vec<u64>,
}

impl Local {
    fn row(&self, u: usize) -> &[u64] {
        &self.adj[u * self.words..(u + 1) * self.words]
    }
}

/// Branch-and-bound over one vertex neighbourhood. Cliques are reported
/// when no candidate is left; maximality in the whole graph is checked by
/// the caller.
struct Ctx<'a> {
    local: &'a Local,
    min_size: usize,
    budget: Option<u64>,
    nodes: &'a AtomicU64,
    stop: &'a AtomicBool,
    found: Vec<Vec<usize>>,
    sets: Vec<Vec<u64>>,
    orders: Vec<Vec<(usize, usize)>>,
}

impl Ctx<'_> {
    /// Greedy colouring of `p`, one class at a time in index order; fills
    /// `out` with vertices and their 1-based colours, ascending by colour.
    fn colour(&self, p: &[u64], left: &mut Vec<u64>, out: &mut Vec<(usize, usize)>) {
        out.clear();
        left.clear();
        left.extend_from_slice(p);
        let mut colour = 0;
        let mut avail = vec![0u64; p.len()];
        while left.iter().any(|&w| w != 0) {
            colour += 1;
            avail.copy_from_slice(left);
            while let Some(v) = first_one(&avail) {
                out.push((v, colour));
                left[v / 64] &= !(1 << (v % 64));
                avail[v / 64] &= !(1 << (v % 64));
                for (a, b) in avail.iter_mut().zip(self.local.row(v)) {
                    *a &= !b;
                }
            }
        }
    }

    fn take(&mut self) -> Vec<u64> {
        self.sets.pop().unwrap_or_else(|| vec![0; self.local.words])
    }

    fn expand(&mut self, r: &mut Vec<usize>, p: &mut [u64]) {
        if self.stop.load(Ordering::Relaxed) {
            return;
        }
        let seen = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if self.budget.is_some_and(|b| seen > b) {
            self.stop.store(true, Ordering::Relaxed);
            return;
        }
        if p.iter().all(|&w| w == 0) {
            if r.len() >= self.min_size {
                self.found.push(r.clone());
            }
            return;
        }
        if r.len() + count(p) < self.min_size {
            return;
        }
        let mut order = self.orders.pop().unwrap_or_default();
        let mut scratch = self.take();
        self.colour(p, &mut scratch, &mut order);
        for &(v, c) in order.iter().rev() {
            if r.len() + c < self.min_size {
                break;
            }
            let mut p2 = self.take();
            for ((d, a), b) in p2.iter_mut().zip(p.iter()).zip(self.local.row(v)) {
                *d = a & b;
            }
            r.push(v);
            self.expand(r, &mut p2);
            r.pop();
            self.sets.push(p2);
            p[v / 64] &= !(1 << (v % 64));
        }
        self.sets.push(scratch);
        self.orders.push(order);
    }
}

impl CliqueSearch {
    pub fn new(min_size: usize) -> Self {
        CliqueSearch {
            min_size,
            node_budget: None,
        }
    }

    pub fn with_budget(mut self, nodes: u64) -> Self {
        self.node_budget = Some(nodes);
        self
    }

    /// All maximal cliques of size at least `min_size`, each sorted, in
    /// lexicographic order. `Err(Timeout)` carries what was found before the
    /// budget ran out.
    pub fn run(&self, g: &Graph) -> Result<Vec<Vec<usize>>, SearchError> {
        self.run_counted(g).map(|(cliques, _)| cliques)
    }

    /// As [`CliqueSearch::run`], also returning the number of search nodes.
    pub fn run_counted(&self, g: &Graph) -> Result<(Vec<Vec<usize>>, u64), SearchError> {
        let order = g.degeneracy_order();
        let mut pos = vec![0; g.order()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let need = self.min_size.saturating_sub(1);
        let nodes = AtomicU64::new(0);
        let stop = AtomicBool::new(false);
        let per_vertex: Vec<Vec<Vec<usize>>> = order
            .par_iter()
            .map(|&v| {
                if stop.load(Ordering::Relaxed) {
                    return Vec::new();
                }
                let mut mask = vec![0u64; g.words];
                let mut later: Vec<usize> =
                    ones(g.neighbors(v)).filter(|&u| pos[u] > pos[v]).collect();
                let within = |a: usize, mask: &[u64]| -> usize {
                    g.neighbors(a)
                        .iter()
                        .zip(mask)
                        .map(|(x, y)| (x & y).count_ones() as usize)
                        .sum()
                };
                // candidates with too few candidate neighbours are dropped
                loop {
                    mask.iter_mut().for_each(|w| *w = 0);
                    for &a in &later {
                        mask[a / 64] |= 1 << (a % 64);
                    }
                    let before = later.len();
                    later.retain(|&a| within(a, &mask) + 1 >= need);
                    if later.len() == before {
                        break;
                    }
                }
                if later.len() < need {
                    return Vec::new();
                }
                // colour high-degree vertices first
                later.sort_by_cached_key(|&a| (std::cmp::Reverse(within(a, &mask)), a));
                let words = words_for(later.len());
                let mut adj = vec![0u64; later.len() * words];
                for (i, &a) in later.iter().enumerate() {
                    for (j, &b) in later.iter().enumerate() {
                        if g.has_edge(a, b) {
                            adj[i * words + j / 64] |= 1 << (j % 64);
                        }
                    }
                }
                let local = Local { words, adj };
                let mut p = vec![0u64; words];
                for i in 0..later.len() {
                    p[i / 64] |= 1 << (i % 64);
                }
                let mut ctx = Ctx {
                    local: &local,
                    min_size: need,
                    budget: self.node_budget,
                    nodes: &nodes,
                    stop: &stop,
                    found: Vec::new(),
                    sets: Vec::new(),
                    orders: Vec::new(),
                };
                ctx.expand(&mut Vec::new(), &mut p);
                ctx.found
                    .into_iter()
                    .map(|c| {
                        let mut clique: Vec<usize> = c.iter().map(|&i| later[i]).collect();
                        clique.push(v);
                        clique.sort_unstable();
                        clique
                    })
                    .filter(|c| g.is_maximal_clique(c))
                    .collect()
            })
            .collect();
        let mut all: Vec<Vec<usize>> = per_vertex.into_iter().flatten().collect();
        all.sort();
        all.dedup();
        if stop.load(Ordering::Relaxed) {
            return Err(SearchError::Timeout {
                nodes: nodes.load(Ordering::Relaxed),
                partial: all,
            });
        }
        Ok((all, nodes.load(Ordering::Relaxed)))
    }
}

/// Maximal cliques of `g` with at least `t` vertices, within a node budget.
pub fn cliques_at_least(
    g: &Graph,
    t: usize,
    budget: Option<u64>,
) -> Result<Vec<Vec<usize>>, SearchError> {
    let mut search = CliqueSearch::new(t);
    search.node_budget = budget;
    search.run(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Maximal cliques by checking every vertex subset.
    fn brute(g: &Graph, t: usize) -> Vec<Vec<usize>> {
        let n = g.order();
        let mut out = Vec::new();
        for mask in 1u32..1 << n {
            let vs: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            let clique = vs
                .iter()
                .all(|&a| vs.iter().all(|&b| a == b || g.has_edge(a, b)));
            let maximal = (0..n)
                .filter(|v| !vs.contains(v))
                .all(|u| !vs.iter().all(|&a| g.has_edge(a, u)));
            if clique && maximal && vs.len() >= t {
                out.push(vs);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn triangle() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(cliques_at_least(&g, 3, None).unwrap(), vec![vec![0, 1, 2]]);
        assert_eq!(g.edge_outside_triangles(), None);
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(path.edge_outside_triangles(), Some((0, 1)));
        assert!(cliques_at_least(&path, 3, None).unwrap().is_empty());
    }

    #[test]
    fn random_graphs_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=12);
            let p = rng.gen_range(0.2..0.9);
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .filter(|_| rng.gen_bool(p))
                .collect();
            let g = Graph::from_edges(n, &edges);
            for t in 1..=5 {
                assert_eq!(cliques_at_least(&g, t, None).unwrap(), brute(&g, t));
            }
        }
    }

    #[test]
    fn budget_reports_timeout() {
        let edges: Vec<(usize, usize)> = (0..20)
            .flat_map(|a| (a + 1..20).map(move |b| (a, b)))
            .filter(|&(a, b)| (a + b) % 3 != 0)
            .collect();
        let g = Graph::from_edges(20, &edges);
        assert!(matches!(
            cliques_at_least(&g, 2, Some(3)),
            Err(SearchError::Timeout { .. })
        ));
        assert_eq!(g.to_adjacency_text().lines().count(), 21);
    }
}
