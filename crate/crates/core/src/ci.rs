//! Symbolic conditional-independence statements, graphoid-axiom rewriting,
//! and the pairwise / local / global / mutual relation families of a graph.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{UndirectedGraph, VertexSet};

/// A conditional-independence statement `left ⟂ right | given`.
///
/// Statements are kept in canonical form: `left <= right` under the natural
/// set ordering, so symmetry (swapping the two sides) is quotiented out and
/// statement equality is set equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CiStatement {
    left: VertexSet,
    right: VertexSet,
    given: VertexSet,
}

impl CiStatement {
    pub fn new(left: VertexSet, right: VertexSet, given: VertexSet) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::InvalidArgument(
                "both sides of a conditional-independence statement must be nonempty".into(),
            ));
        }
        for (x, y) in [(&left, &right), (&left, &given), (&right, &given)] {
            if let Some(v) = x.iter().find(|v| y.contains(v)) {
                return Err(Error::OverlappingSets(v.to_string()));
            }
        }
        let (left, right) = if left <= right { (left, right) } else { (right, left) };
        Ok(CiStatement { left, right, given })
    }

    /// Convenience constructor from label slices.
    pub fn from_labels(left: &[&str], right: &[&str], given: &[&str]) -> Result<Self> {
        CiStatement::new(
            VertexSet::from_labels(left.iter().copied()),
            VertexSet::from_labels(right.iter().copied()),
            VertexSet::from_labels(given.iter().copied()),
        )
    }

    pub fn left(&self) -> &VertexSet {
        &self.left
    }

    pub fn right(&self) -> &VertexSet {
        &self.right
    }

    pub fn given(&self) -> &VertexSet {
        &self.given
    }

    /// All vertices mentioned by the statement.
    pub fn support(&self) -> VertexSet {
        self.left.union(&self.right).union(&self.given)
    }

    /// True iff the statement has the pairwise-Markov shape over the
    /// vertices of `g`: singleton ⟂ singleton | all remaining vertices.
    pub fn is_pairwise_shape(&self, g: &UndirectedGraph) -> bool {
        self.left.len() == 1
            && self.right.len() == 1
            && self.given.len() + 2 == g.vertex_count()
            && self.support() == g.vertex_set()
    }
}

impl fmt::Display for CiStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} _||_ {}", self.left, self.right)?;
        if !self.given.is_empty() {
            write!(f, " | {}", self.given)?;
        }
        Ok(())
    }
}

/// A mutual conditional-independence statement
/// `X₁ ⟂ X₂ ⟂ … ⟂ X_k | given` with k ≥ 2 blocks.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MutualCiStatement {
    blocks: Vec<VertexSet>,
    given: VertexSet,
}

impl MutualCiStatement {
    pub fn new(mut blocks: Vec<VertexSet>, given: VertexSet) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::InvalidArgument(
                "a mutual statement needs at least two blocks".into(),
            ));
        }
        if blocks.iter().any(VertexSet::is_empty) {
            return Err(Error::InvalidArgument("blocks must be nonempty".into()));
        }
        for (i, a) in blocks.iter().enumerate() {
            for b in blocks.iter().skip(i + 1).chain(std::iter::once(&given)) {
                if let Some(v) = a.iter().find(|v| b.contains(v)) {
                    return Err(Error::OverlappingSets(v.to_string()));
                }
            }
        }
        blocks.sort();
        Ok(MutualCiStatement { blocks, given })
    }

    pub fn from_labels(blocks: &[&[&str]], given: &[&str]) -> Result<Self> {
        MutualCiStatement::new(
            blocks
                .iter()
                .map(|b| VertexSet::from_labels(b.iter().copied()))
                .collect(),
            VertexSet::from_labels(given.iter().copied()),
        )
    }

    pub fn blocks(&self) -> &[VertexSet] {
        &self.blocks
    }

    pub fn given(&self) -> &VertexSet {
        &self.given
    }

    pub fn support(&self) -> VertexSet {
        self.blocks
            .iter()
            .fold(self.given.clone(), |acc, b| acc.union(b))
    }
}

impl fmt::Display for MutualCiStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, " _||_ ")?;
            }
            write!(f, "{b}")?;
        }
        if !self.given.is_empty() {
            write!(f, " | {}", self.given)?;
        }
        Ok(())
    }
}

/// One statement `x ⟂ y | V∖{x,y}` per non-adjacent pair.
pub fn pairwise_relations(g: &UndirectedGraph) -> BTreeSet<CiStatement> {
    let vertices = g.vertices();
    let mut out = BTreeSet::new();
    for (i, x) in vertices.iter().enumerate() {
        for y in &vertices[i + 1..] {
            if !g.has_edge(x, y).expect("vertices come from the graph") {
                let rest: VertexSet = vertices
                    .iter()
                    .filter(|v| *v != x && *v != y)
                    .cloned()
                    .collect();
                let s = CiStatement::new(
                    VertexSet::from_labels([x.clone()]),
                    VertexSet::from_labels([y.clone()]),
                    rest,
                )
                .expect("pairwise statements are well-formed");
                out.insert(s);
            }
        }
    }
    out
}

/// One statement `x ⟂ non-neighbours(x) | bd(x)` per vertex with at least one
/// non-neighbour.
pub fn local_relations(g: &UndirectedGraph) -> BTreeSet<CiStatement> {
    let mut out = BTreeSet::new();
    for x in g.vertices() {
        let bd = g.boundary(x).expect("vertex comes from the graph");
        let non_neighbours: VertexSet = g
            .vertices()
            .iter()
            .filter(|v| *v != x && !bd.contains(v))
            .cloned()
            .collect();
        if non_neighbours.is_empty() {
            continue;
        }
        let s = CiStatement::new(VertexSet::from_labels([x.clone()]), non_neighbours, bd)
            .expect("local statements are well-formed");
        out.insert(s);
    }
    out
}

/// One mutual statement per maximal independent set with at least two
/// members: its singletons as blocks, given everything else. Singleton
/// maximal independent sets carry no content and are omitted.
pub fn mcip_relations(g: &UndirectedGraph) -> Result<BTreeSet<MutualCiStatement>> {
    let mut out = BTreeSet::new();
    for set in g.maximal_independent_sets()? {
        if set.len() < 2 {
            continue;
        }
        let blocks: Vec<VertexSet> = set
            .iter()
            .map(|v| VertexSet::from_labels([v.to_string()]))
            .collect();
        let given = g.vertex_set().difference(&set);
        out.insert(MutualCiStatement::new(blocks, given).expect("blocks are disjoint singletons"));
    }
    Ok(out)
}

/// The global Markov query: does `given` separate `left` from `right` in `g`?
pub fn global_query(g: &UndirectedGraph, s: &CiStatement) -> Result<bool> {
    g.separates(s.left(), s.right(), s.given())
}

/// Weak-union expansion of a mutual statement: for every pair of blocks
/// `{X_i, X_j}`, the statement `X_i ⟂ X_j | given ∪ (all other blocks)` —
/// k(k−1)/2 statements for k blocks.
pub fn weak_union_expand(m: &MutualCiStatement) -> BTreeSet<CiStatement> {
    let blocks = m.blocks();
    let mut out = BTreeSet::new();
    for (i, a) in blocks.iter().enumerate() {
        for (j, b) in blocks.iter().enumerate().skip(i + 1) {
            let mut given = m.given().clone();
            for (l, other) in blocks.iter().enumerate() {
                if l != i && l != j {
                    given = given.union(other);
                }
            }
            out.insert(
                CiStatement::new(a.clone(), b.clone(), given)
                    .expect("blocks are disjoint and nonempty"),
            );
        }
    }
    out
}

/// The pairwise-shape statements derivable from the mutual relation family
/// by weak union; for any graph this reproduces the pairwise relation
/// exactly, so the mutual statements carry the full pairwise content.
pub fn pairwise_from_mcip(g: &UndirectedGraph) -> Result<BTreeSet<CiStatement>> {
    let mut out = BTreeSet::new();
    for m in mcip_relations(g)? {
        for s in weak_union_expand(&m) {
            if s.is_pairwise_shape(g) {
                out.insert(s);
            }
        }
    }
    Ok(out)
}

/// The five graphoid axioms as single rewrite steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    Symmetry,
    Decomposition,
    WeakUnion,
    Contraction,
    Intersection,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Symmetry => "symmetry",
            Axiom::Decomposition => "decomposition",
            Axiom::WeakUnion => "weak_union",
            Axiom::Contraction => "contraction",
            Axiom::Intersection => "intersection",
        }
    }
}

/// Symmetry, Eq. (1): X ⟂ Y | Z ⇒ Y ⟂ X | Z. The canonical form already
/// quotients this out, so the result equals the input.
pub fn symmetry(s: &CiStatement) -> CiStatement {
    s.clone()
}

/// Decomposition, Eq. (2): X ⟂ (Y ∪ W) | Z ⇒ X ⟂ Y | Z, where `drop` is W.
/// The selection may sit inside either side of the canonical statement; an
/// empty selection is the identity. Returns `None` when the selection is not
/// a proper subset of one side.
pub fn decomposition(s: &CiStatement, drop: &VertexSet) -> Option<CiStatement> {
    split_side(s, drop).map(|(other, kept, _)| {
        CiStatement::new(other, kept, s.given().clone()).expect("shrinking a side stays disjoint")
    })
}

/// Weak union, Eq. (3): X ⟂ (Y ∪ W) | Z ⇒ X ⟂ Y | (Z ∪ W), where `moved` is
/// W. An empty selection is the identity. Returns `None` when the selection
/// is not a proper subset of one side.
pub fn weak_union(s: &CiStatement, moved: &VertexSet) -> Option<CiStatement> {
    split_side(s, moved).map(|(other, kept, moved)| {
        CiStatement::new(other, kept, s.given().union(&moved))
            .expect("moved labels were already disjoint from the rest")
    })
}

/// Finds the side of `s` containing `selection` and splits it; returns
/// (other side, side ∖ selection, selection). Fails when no side properly
/// contains the selection.
fn split_side(
    s: &CiStatement,
    selection: &VertexSet,
) -> Option<(VertexSet, VertexSet, VertexSet)> {
    for (side, other) in [(s.right(), s.left()), (s.left(), s.right())] {
        if selection.is_subset(side) {
            let kept = side.difference(selection);
            if kept.is_empty() {
                return None;
            }
            return Some((other.clone(), kept, selection.clone()));
        }
    }
    None
}

/// Contraction, Eq. (4): (X ⟂ Y | Z) and (X ⟂ W | Z ∪ Y) ⇒ X ⟂ (Y ∪ W) | Z.
/// Both orientations of both statements are tried; `None` when no
/// orientation matches the shape.
pub fn contraction(first: &CiStatement, second: &CiStatement) -> Option<CiStatement> {
    for (x, y) in orientations(first) {
        for (x2, w) in orientations(second) {
            if x == x2 && *second.given() == first.given().union(y) {
                return CiStatement::new(x.clone(), y.union(w), first.given().clone()).ok();
            }
        }
    }
    None
}

/// Intersection, Eq. (5): (X ⟂ Y | Z ∪ W) and (X ⟂ W | Z ∪ Y) ⇒
/// X ⟂ (Y ∪ W) | Z. `None` when no orientation matches.
pub fn intersection(first: &CiStatement, second: &CiStatement) -> Option<CiStatement> {
    for (x, y) in orientations(first) {
        for (x2, w) in orientations(second) {
            if x != x2 || !w.is_subset(first.given()) || !y.is_subset(second.given()) {
                continue;
            }
            let z = first.given().difference(w);
            if z == second.given().difference(y) {
                return CiStatement::new(x.clone(), y.union(w), z).ok();
            }
        }
    }
    None
}

fn orientations(s: &CiStatement) -> [(&VertexSet, &VertexSet); 2] {
    [(s.left(), s.right()), (s.right(), s.left())]
}

/// Single-step axiom application. Wrong arity (missing or extra inputs for
/// the chosen axiom) is an input error; a shape mismatch is the `None`
/// failure result.
pub fn apply_axiom(
    axiom: Axiom,
    first: &CiStatement,
    second: Option<&CiStatement>,
    selection: Option<&VertexSet>,
) -> Result<Option<CiStatement>> {
    let need = |cond: bool, what: &str| {
        if cond {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "axiom {} {}",
                axiom.name(),
                what
            )))
        }
    };
    match axiom {
        Axiom::Symmetry => {
            need(second.is_none(), "takes a single statement")?;
            need(selection.is_none(), "takes no selection")?;
            Ok(Some(symmetry(first)))
        }
        Axiom::Decomposition => {
            need(second.is_none(), "takes a single statement")?;
            let sel = selection
                .ok_or_else(|| Error::InvalidArgument("axiom decomposition needs a selection".into()))?;
            Ok(decomposition(first, sel))
        }
        Axiom::WeakUnion => {
            need(second.is_none(), "takes a single statement")?;
            let sel = selection
                .ok_or_else(|| Error::InvalidArgument("axiom weak_union needs a selection".into()))?;
            Ok(weak_union(first, sel))
        }
        Axiom::Contraction => {
            need(selection.is_none(), "takes no selection")?;
            let s2 = second
                .ok_or_else(|| Error::InvalidArgument("axiom contraction needs two statements".into()))?;
            Ok(contraction(first, s2))
        }
        Axiom::Intersection => {
            need(selection.is_none(), "takes no selection")?;
            let s2 = second
                .ok_or_else(|| Error::InvalidArgument("axiom intersection needs two statements".into()))?;
            Ok(intersection(first, s2))
        }
    }
}
