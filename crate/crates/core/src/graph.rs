//! Undirected graphs with independent-set, clique, separation and
//! reconstruction operations.
//!
//! Vertices are string labels; declaration order is the canonical order used
//! for all listings, so identical inputs always produce identical output.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Enumeration is refused above this vertex count: the output family can be
/// exponential in |V|.
pub const ENUMERATION_LIMIT: usize = 64;

/// A set of vertex labels. Plain set semantics; ordering for display follows
/// the owning graph's declaration order where one is in scope, otherwise the
/// labels sort lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSet(BTreeSet<String>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(BTreeSet::new())
    }

    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        VertexSet(labels.into_iter().map(Into::into).collect())
    }

    pub fn insert(&mut self, label: impl Into<String>) {
        self.0.insert(label.into());
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Iterates members in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().map(String::as_str)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.difference(&other.0).cloned().collect())
    }
}

impl<S: Into<String>> FromIterator<S> for VertexSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        VertexSet(iter.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

/// A simple undirected graph: no self loops, no multiple edges.
#[derive(Clone, Debug)]
pub struct UndirectedGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<BTreeSet<usize>>,
}

impl UndirectedGraph {
    /// Creates a graph with the given vertices and no edges. Declaration
    /// order is remembered and used as the canonical vertex order.
    pub fn new<I, S>(vertices: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels = Vec::new();
        let mut index = HashMap::new();
        for v in vertices {
            let v = v.into();
            if index.contains_key(&v) {
                return Err(Error::DuplicateVertex(v));
            }
            index.insert(v.clone(), labels.len());
            labels.push(v);
        }
        let adj = vec![BTreeSet::new(); labels.len()];
        Ok(UndirectedGraph { labels, index, adj })
    }

    /// Creates a graph from a vertex list and an edge list.
    pub fn from_parts<I, S, E, A, B>(vertices: I, edges: E) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
        E: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut g = UndirectedGraph::new(vertices)?;
        for (a, b) in edges {
            g.add_edge(a.as_ref(), b.as_ref())?;
        }
        Ok(g)
    }

    /// Adds an edge. Adding an existing edge again is a no-op.
    pub fn add_edge(&mut self, a: &str, b: &str) -> Result<()> {
        let i = self.vertex_index(a)?;
        let j = self.vertex_index(b)?;
        if i == j {
            return Err(Error::SelfLoop(a.to_string()));
        }
        self.adj[i].insert(j);
        self.adj[j].insert(i);
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Vertex labels in declaration order.
    pub fn vertices(&self) -> &[String] {
        &self.labels
    }

    pub fn contains_vertex(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    fn vertex_index(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn has_edge(&self, a: &str, b: &str) -> Result<bool> {
        let i = self.vertex_index(a)?;
        let j = self.vertex_index(b)?;
        Ok(self.adj[i].contains(&j))
    }

    /// Edges as label pairs, each pair and the list in canonical order.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            for &j in nbrs.iter().filter(|&&j| j > i) {
                out.push((self.labels[i].clone(), self.labels[j].clone()));
            }
        }
        out
    }

    /// The complement graph on the same vertices.
    pub fn complement(&self) -> UndirectedGraph {
        let n = self.labels.len();
        let mut g = UndirectedGraph::new(self.labels.clone()).expect("labels are unique");
        for i in 0..n {
            for j in (i + 1)..n {
                if !self.adj[i].contains(&j) {
                    g.adj[i].insert(j);
                    g.adj[j].insert(i);
                }
            }
        }
        g
    }

    /// Sorts the members of `set` into declaration order, checking that each
    /// one exists.
    pub fn order_members(&self, set: &VertexSet) -> Result<Vec<String>> {
        let mut idx = Vec::with_capacity(set.len());
        for v in set.iter() {
            idx.push(self.vertex_index(v)?);
        }
        idx.sort_unstable();
        Ok(idx.into_iter().map(|i| self.labels[i].clone()).collect())
    }

    fn index_set(&self, set: &VertexSet) -> Result<Vec<usize>> {
        let mut idx = Vec::with_capacity(set.len());
        for v in set.iter() {
            idx.push(self.vertex_index(v)?);
        }
        idx.sort_unstable();
        Ok(idx)
    }

    fn set_from_indices(&self, indices: impl IntoIterator<Item = usize>) -> VertexSet {
        indices.into_iter().map(|i| self.labels[i].clone()).collect()
    }

    /// True iff no two members of `s` are adjacent. The empty set and
    /// singletons are independent.
    pub fn is_independent_set(&self, s: &VertexSet) -> Result<bool> {
        let idx = self.index_set(s)?;
        for (k, &i) in idx.iter().enumerate() {
            for &j in &idx[k + 1..] {
                if self.adj[i].contains(&j) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The neighbours of `x`.
    pub fn boundary(&self, x: &str) -> Result<VertexSet> {
        let i = self.vertex_index(x)?;
        Ok(self.set_from_indices(self.adj[i].iter().copied()))
    }

    /// True iff every path from `a` to `b` passes through `c`, i.e. removing
    /// `c` disconnects `a` from `b`.
    pub fn separates(&self, a: &VertexSet, b: &VertexSet, c: &VertexSet) -> Result<bool> {
        for (x, y) in [(a, b), (a, c), (b, c)] {
            if let Some(v) = x.iter().find(|v| y.contains(v)) {
                return Err(Error::OverlappingSets(v.to_string()));
            }
        }
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidArgument(
                "separation requires nonempty sets on both sides".into(),
            ));
        }
        let a_idx = self.index_set(a)?;
        let b_idx = self.index_set(b)?;
        let c_idx = self.index_set(c)?;

        let n = self.labels.len();
        let mut blocked = vec![false; n];
        for &i in &c_idx {
            blocked[i] = true;
        }
        let mut target = vec![false; n];
        for &i in &b_idx {
            target[i] = true;
        }
        let mut seen = vec![false; n];
        let mut queue: Vec<usize> = a_idx.to_vec();
        for &i in &queue {
            seen[i] = true;
        }
        while let Some(u) = queue.pop() {
            if target[u] {
                return Ok(false);
            }
            for &w in &self.adj[u] {
                if !blocked[w] && !seen[w] {
                    seen[w] = true;
                    queue.push(w);
                }
            }
        }
        Ok(true)
    }

    fn adjacency_masks(&self) -> Result<Vec<u64>> {
        let n = self.labels.len();
        if n > ENUMERATION_LIMIT {
            return Err(Error::TooManyVertices(n));
        }
        Ok(self
            .adj
            .iter()
            .map(|nbrs| nbrs.iter().fold(0u64, |m, &j| m | (1 << j)))
            .collect())
    }

    fn complement_masks(&self) -> Result<Vec<u64>> {
        let n = self.labels.len();
        let masks = self.adjacency_masks()?;
        let full = if n == 64 { !0u64 } else { (1u64 << n) - 1 };
        Ok(masks
            .iter()
            .enumerate()
            .map(|(i, m)| !m & full & !(1u64 << i))
            .collect())
    }

    fn masks_to_sets(&self, mut masks: Vec<u64>) -> Vec<VertexSet> {
        masks.sort_unstable_by_key(|&m| mask_to_indices(m));
        masks
            .into_iter()
            .map(|m| self.set_from_indices(mask_to_indices(m)))
            .collect()
    }

    /// All maximal independent sets, each sorted by canonical vertex order
    /// and the family sorted lexicographically.
    pub fn maximal_independent_sets(&self) -> Result<Vec<VertexSet>> {
        let comp = self.complement_masks()?;
        let mut out = Vec::new();
        let n = self.labels.len();
        let full = if n == 0 {
            0
        } else if n == 64 {
            !0u64
        } else {
            (1u64 << n) - 1
        };
        bron_kerbosch(&comp, 0, full, 0, &mut out);
        Ok(self.masks_to_sets(out))
    }

    /// All maximal cliques, canonically ordered. Equals the maximal
    /// independent sets of the complement graph.
    pub fn maximal_cliques(&self) -> Result<Vec<VertexSet>> {
        let adj = self.adjacency_masks()?;
        let mut out = Vec::new();
        let n = self.labels.len();
        let full = if n == 0 {
            0
        } else if n == 64 {
            !0u64
        } else {
            (1u64 << n) - 1
        };
        bron_kerbosch(&adj, 0, full, 0, &mut out);
        Ok(self.masks_to_sets(out))
    }

    /// Rebuilds the unique graph whose family of maximal independent sets is
    /// `families`: vertices are the union, and two vertices are adjacent iff
    /// no family contains both.
    pub fn reconstruct_from_amis(families: &[VertexSet]) -> Result<UndirectedGraph> {
        if families.is_empty() {
            return Err(Error::InvalidArgument(
                "need at least one maximal independent set".into(),
            ));
        }
        let distinct: Vec<&VertexSet> = {
            let mut seen = BTreeSet::new();
            families.iter().filter(|f| seen.insert((*f).clone())).collect()
        };
        for a in &distinct {
            for b in &distinct {
                if a != b && a.is_subset(b) {
                    return Err(Error::NotMaximalFamily {
                        inner: a.to_string(),
                        outer: b.to_string(),
                    });
                }
            }
        }
        let union: BTreeSet<&str> = distinct.iter().flat_map(|f| f.iter()).collect();
        let mut g = UndirectedGraph::new(union.iter().copied())?;
        let labels: Vec<String> = g.labels.clone();
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                let covered = distinct.iter().any(|f| f.contains(a) && f.contains(b));
                if !covered {
                    g.add_edge(a, b)?;
                }
            }
        }
        Ok(g)
    }

    /// Maximum-cardinality search ordering, with the chordality verdict.
    /// Returns the visit order and true iff every vertex's already-visited
    /// neighbours form a clique.
    fn mcs(&self) -> (Vec<usize>, bool) {
        let n = self.labels.len();
        let mut order = Vec::with_capacity(n);
        let mut visited = vec![false; n];
        let mut weight = vec![0usize; n];
        let mut chordal = true;
        for _ in 0..n {
            let v = (0..n)
                .filter(|&v| !visited[v])
                .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
                .expect("unvisited vertex exists");
            let earlier: Vec<usize> = self.adj[v].iter().copied().filter(|&u| visited[u]).collect();
            for (k, &i) in earlier.iter().enumerate() {
                for &j in &earlier[k + 1..] {
                    if !self.adj[i].contains(&j) {
                        chordal = false;
                    }
                }
            }
            visited[v] = true;
            order.push(v);
            for &u in &self.adj[v] {
                if !visited[u] {
                    weight[u] += 1;
                }
            }
        }
        (order, chordal)
    }

    /// True iff the graph is chordal.
    pub fn is_decomposable(&self) -> bool {
        self.mcs().1
    }

    /// For a chordal graph, a perfect elimination ordering plus a junction
    /// tree: maximal cliques in an order satisfying the running-intersection
    /// property, with `separators[i]` the intersection of clique `i` with the
    /// union of the earlier cliques (`separators[0]` is empty).
    pub fn decomposition(&self) -> Option<Decomposition> {
        let (order, chordal) = self.mcs();
        if !chordal {
            return None;
        }
        let n = self.labels.len();
        if n == 0 {
            return Some(Decomposition {
                elimination_order: Vec::new(),
                cliques: Vec::new(),
                separators: Vec::new(),
            });
        }

        // Candidate cliques: each vertex with its already-visited neighbours.
        let mut pos = vec![0usize; n];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        let mut candidates: Vec<BTreeSet<usize>> = Vec::new();
        for (p, &v) in order.iter().enumerate() {
            let mut c: BTreeSet<usize> =
                self.adj[v].iter().copied().filter(|&u| pos[u] < p).collect();
            c.insert(v);
            candidates.push(c);
        }
        let mut cliques: Vec<BTreeSet<usize>> = Vec::new();
        for c in candidates {
            if !cliques.iter().any(|other| c.is_subset(other)) {
                cliques.retain(|other| !other.is_subset(&c));
                cliques.push(c);
            }
        }
        cliques.sort_by_key(|c| c.iter().copied().collect::<Vec<_>>());

        // Maximum-weight spanning tree over pairwise intersections; the order
        // in which Prim's algorithm attaches cliques is a valid
        // running-intersection order, with the attachment edge as separator.
        let m = cliques.len();
        let mut in_tree = vec![false; m];
        let mut tree_order = vec![0usize];
        let mut parents: Vec<Option<usize>> = vec![None; m];
        in_tree[0] = true;
        while tree_order.len() < m {
            let mut best: Option<(usize, usize, usize)> = None; // (weight, clique, parent)
            for c in 0..m {
                if in_tree[c] {
                    continue;
                }
                for &t in &tree_order {
                    let w = cliques[c].intersection(&cliques[t]).count();
                    let candidate = (w, c, t);
                    let better = match best {
                        None => true,
                        Some((bw, bc, _)) => w > bw || (w == bw && c < bc),
                    };
                    if better {
                        best = Some(candidate);
                    }
                }
            }
            let (_, c, t) = best.expect("some clique remains");
            in_tree[c] = true;
            parents[c] = Some(t);
            tree_order.push(c);
        }

        let mut out_cliques = Vec::with_capacity(m);
        let mut out_seps = Vec::with_capacity(m);
        for &c in &tree_order {
            out_cliques.push(self.set_from_indices(cliques[c].iter().copied()));
            let sep = match parents[c] {
                None => VertexSet::new(),
                Some(p) => self.set_from_indices(
                    cliques[c].intersection(&cliques[p]).copied().collect::<Vec<_>>(),
                ),
            };
            out_seps.push(sep);
        }
        Some(Decomposition {
            elimination_order: order.iter().rev().map(|&v| self.labels[v].clone()).collect(),
            cliques: out_cliques,
            separators: out_seps,
        })
    }

    /// The full vertex set.
    pub fn vertex_set(&self) -> VertexSet {
        self.labels.iter().cloned().collect()
    }
}

/// Structural equality: same sorted vertex list and same edge set,
/// independent of declaration order.
impl PartialEq for UndirectedGraph {
    fn eq(&self, other: &Self) -> bool {
        let mut va: Vec<&String> = self.labels.iter().collect();
        let mut vb: Vec<&String> = other.labels.iter().collect();
        va.sort();
        vb.sort();
        if va != vb {
            return false;
        }
        let norm = |g: &UndirectedGraph| -> BTreeSet<(String, String)> {
            g.edges()
                .into_iter()
                .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
                .collect()
        };
        norm(self) == norm(other)
    }
}

impl Eq for UndirectedGraph {}

/// A junction-tree decomposition of a chordal graph.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub elimination_order: Vec<String>,
    pub cliques: Vec<VertexSet>,
    pub separators: Vec<VertexSet>,
}

fn mask_to_indices(mut m: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// Bron-Kerbosch with pivoting over bitmask adjacency.
fn bron_kerbosch(adj: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
    if p == 0 && x == 0 {
        out.push(r);
        return;
    }
    let pivot = {
        let mut best = usize::MAX;
        let mut best_count = 0u32;
        let mut m = p | x;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let count = (p & adj[v]).count_ones();
            if best == usize::MAX || count > best_count {
                best = v;
                best_count = count;
            }
        }
        best
    };
    let mut candidates = p & !adj[pivot];
    while candidates != 0 {
        let v = candidates.trailing_zeros() as usize;
        let bit = 1u64 << v;
        candidates &= candidates - 1;
        bron_kerbosch(adj, r | bit, p & adj[v], x & adj[v], out);
        p &= !bit;
        x |= bit;
    }
}
