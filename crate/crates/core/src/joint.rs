//! Exact joint probability tables built from clique potentials, with
//! numeric conditional-independence and mutual-independence checking — the
//! brute-force oracle used to validate the symbolic machinery.

use rand::Rng;

use crate::ci::{CiStatement, MutualCiStatement};
use crate::error::{Error, Result};
use crate::exec;
use crate::graph::{UndirectedGraph, VertexSet};

/// Largest joint table (in cells) the oracle will materialize; the oracle
/// exists for desk-scale verification only.
pub const MAX_CELLS: usize = 1 << 20;

/// A nonnegative potential over the cells of a clique's product space.
/// Values are indexed over the scope variables in the owning graph's
/// declaration order, last variable fastest.
#[derive(Clone, Debug)]
pub struct CliquePotential {
    pub scope: VertexSet,
    pub values: Vec<f64>,
}

impl CliquePotential {
    pub fn new(scope: VertexSet, values: Vec<f64>) -> Self {
        CliquePotential { scope, values }
    }
}

/// A dense joint distribution over categorical variables, stored row-major
/// with the last variable fastest.
#[derive(Clone, Debug)]
pub struct JointTable {
    variables: Vec<(String, usize)>,
    probabilities: Vec<f64>,
    strictly_positive: bool,
}

impl JointTable {
    /// Builds a table directly from unnormalized nonnegative cell masses.
    pub fn from_probabilities(variables: Vec<(String, usize)>, masses: Vec<f64>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for (name, levels) in &variables {
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateVertex(name.clone()));
            }
            if *levels < 2 {
                return Err(Error::InvalidArgument(format!(
                    "variable {name} needs at least two levels"
                )));
            }
        }
        let cells: u128 = variables.iter().map(|(_, l)| *l as u128).product();
        if cells > MAX_CELLS as u128 {
            return Err(Error::TableTooLarge { cells, limit: MAX_CELLS });
        }
        if masses.len() as u128 != cells {
            return Err(Error::InvalidArgument(format!(
                "expected {cells} cells, got {}",
                masses.len()
            )));
        }
        if masses.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidArgument(
                "cell masses must be finite and nonnegative".into(),
            ));
        }
        let z: f64 = masses.iter().sum();
        if z <= 0.0 {
            return Err(Error::ZeroNormalizer);
        }
        let probabilities: Vec<f64> = masses.iter().map(|p| p / z).collect();
        let strictly_positive = probabilities.iter().all(|&p| p > 0.0);
        Ok(JointTable {
            variables,
            probabilities,
            strictly_positive,
        })
    }

    pub fn variables(&self) -> &[(String, usize)] {
        &self.variables
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// True iff every cell has positive probability.
    pub fn strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    fn assignment_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.variables.len()];
        for i in (0..self.variables.len()).rev() {
            let levels = self.variables[i].1;
            out[i] = index % levels;
            index /= levels;
        }
        out
    }

    /// Sums the distribution onto the variables at `order` (positions into
    /// this table's variable list), arranged in exactly that order, last
    /// fastest. Summation runs in fixed cell order, so the result is
    /// bitwise deterministic.
    fn project(&self, order: &[usize]) -> Vec<f64> {
        let mut strides = vec![1usize; order.len()];
        for i in (0..order.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.variables[order[i + 1]].1;
        }
        let size: usize = order.iter().map(|&v| self.variables[v].1).product();
        let mut out = vec![0.0f64; size];
        for (cell, &p) in self.probabilities.iter().enumerate() {
            let assignment = self.assignment_of(cell);
            let idx: usize = order
                .iter()
                .zip(&strides)
                .map(|(&v, &s)| assignment[v] * s)
                .sum();
            out[idx] += p;
        }
        out
    }

    /// Marginal distribution over `keep`, preserving this table's variable
    /// order.
    pub fn marginalize(&self, keep: &VertexSet) -> Result<JointTable> {
        for name in keep.iter() {
            self.variable_index(name)?;
        }
        let order: Vec<usize> = (0..self.variables.len())
            .filter(|&i| keep.contains(&self.variables[i].0))
            .collect();
        let probabilities = self.project(&order);
        let strictly_positive = probabilities.iter().all(|&p| p > 0.0);
        Ok(JointTable {
            variables: order.iter().map(|&i| self.variables[i].clone()).collect(),
            probabilities,
            strictly_positive,
        })
    }
}

/// Builds the normalized joint distribution P(x) = (1/Z) ∏ ψ_a(x_a) of a
/// Markov network. Each potential scope must be a clique of `g`; potentials
/// over non-maximal cliques are absorbed into a containing maximal clique,
/// and maximal cliques with no potential get all-ones padding.
pub fn from_clique_potentials(
    g: &UndirectedGraph,
    levels: &[usize],
    potentials: &[CliquePotential],
) -> Result<JointTable> {
    if levels.len() != g.vertex_count() {
        return Err(Error::InvalidArgument(format!(
            "expected {} level counts, got {}",
            g.vertex_count(),
            levels.len()
        )));
    }
    if levels.iter().any(|&l| l < 2) {
        return Err(Error::InvalidArgument(
            "every variable needs at least two levels".into(),
        ));
    }
    let cells_wide: u128 = levels.iter().map(|&l| l as u128).product();
    if cells_wide > MAX_CELLS as u128 {
        return Err(Error::TableTooLarge { cells: cells_wide, limit: MAX_CELLS });
    }
    let cells = cells_wide as usize;
    let vertices = g.vertices();

    // one combined potential per maximal clique, all-ones start
    let cliques = g.maximal_cliques()?;
    let clique_members: Vec<Vec<usize>> = cliques
        .iter()
        .map(|c| {
            (0..vertices.len())
                .filter(|&i| c.contains(&vertices[i]))
                .collect()
        })
        .collect();
    let mut combined: Vec<Vec<f64>> = clique_members
        .iter()
        .map(|members| vec![1.0f64; members.iter().map(|&v| levels[v]).product()])
        .collect();

    for potential in potentials {
        if potential.scope.is_empty() {
            return Err(Error::InvalidArgument(
                "potential scopes must be nonempty".into(),
            ));
        }
        let members: Vec<usize> = {
            let mut idx = Vec::new();
            for name in potential.scope.iter() {
                idx.push(
                    vertices
                        .iter()
                        .position(|v| v == name)
                        .ok_or_else(|| Error::UnknownVertex(name.to_string()))?,
                );
            }
            idx.sort_unstable();
            idx
        };
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                if !g.has_edge(&vertices[i], &vertices[j])? {
                    return Err(Error::ScopeNotClique(potential.scope.to_string()));
                }
            }
        }
        let expected: usize = members.iter().map(|&v| levels[v]).product();
        if potential.values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "potential over {{{}}} needs {expected} values, got {}",
                potential.scope,
                potential.values.len()
            )));
        }
        if potential.values.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::InvalidArgument(
                "potential values must be finite and nonnegative".into(),
            ));
        }
        // absorb into the first maximal clique containing the scope
        let host = cliques
            .iter()
            .position(|c| potential.scope.is_subset(c))
            .expect("a clique scope lies inside some maximal clique");
        let host_members = &clique_members[host];
        let mut pot_strides = vec![1usize; members.len()];
        for i in (0..members.len().saturating_sub(1)).rev() {
            pot_strides[i] = pot_strides[i + 1] * levels[members[i + 1]];
        }
        let host_levels: Vec<usize> = host_members.iter().map(|&v| levels[v]).collect();
        for cell in 0..combined[host].len() {
            let mut rem = cell;
            let mut host_assignment = vec![0usize; host_members.len()];
            for i in (0..host_members.len()).rev() {
                host_assignment[i] = rem % host_levels[i];
                rem /= host_levels[i];
            }
            let idx: usize = members
                .iter()
                .zip(&pot_strides)
                .map(|(&v, &s)| {
                    let pos = host_members.iter().position(|&h| h == v).expect("scope ⊆ host");
                    host_assignment[pos] * s
                })
                .sum();
            combined[host][cell] *= potential.values[idx];
        }
    }

    let clique_strides: Vec<Vec<usize>> = clique_members
        .iter()
        .map(|members| {
            let mut s = vec![1usize; members.len()];
            for i in (0..members.len().saturating_sub(1)).rev() {
                s[i] = s[i + 1] * levels[members[i + 1]];
            }
            s
        })
        .collect();

    let mut masses = vec![0.0f64; cells];
    let mut assignment = vec![0usize; vertices.len()];
    for (cell, mass) in masses.iter_mut().enumerate() {
        let mut rem = cell;
        for i in (0..vertices.len()).rev() {
            assignment[i] = rem % levels[i];
            rem /= levels[i];
        }
        let mut value = 1.0f64;
        for (members, (strides, table)) in clique_members
            .iter()
            .zip(clique_strides.iter().zip(&combined))
        {
            let idx: usize = members
                .iter()
                .zip(strides)
                .map(|(&v, &s)| assignment[v] * s)
                .sum();
            value *= table[idx];
        }
        *mass = value;
    }

    let variables: Vec<(String, usize)> = vertices
        .iter()
        .cloned()
        .zip(levels.iter().copied())
        .collect();
    JointTable::from_probabilities(variables, masses)
}

/// Random strictly positive potentials (values uniform in [0.1, 1.0]), one
/// per maximal clique of `g`.
pub fn random_positive_potentials<R: Rng>(
    g: &UndirectedGraph,
    levels: &[usize],
    rng: &mut R,
) -> Result<Vec<CliquePotential>> {
    let vertices = g.vertices();
    let mut out = Vec::new();
    for clique in g.maximal_cliques()? {
        let size: usize = (0..vertices.len())
            .filter(|&i| clique.contains(&vertices[i]))
            .map(|i| levels[i])
            .product();
        let values: Vec<f64> = (0..size).map(|_| rng.random_range(0.1..=1.0)).collect();
        out.push(CliquePotential::new(clique, values));
    }
    Ok(out)
}

/// Numeric conditional-independence check: true iff for every conditioning
/// cell with positive mass, |P(A,B|C) − P(A|C)·P(B|C)| ≤ tol on every cell.
/// Zero-probability conditioning slices are vacuous and skipped.
pub fn check_ci(t: &JointTable, s: &CiStatement, tol: f64) -> Result<bool> {
    check_factorization(t, &[s.left().clone(), s.right().clone()], s.given(), tol)
}

/// Numeric mutual-conditional-independence check: the joint conditional over
/// the blocks must equal the product of the single-block conditionals within
/// tol per cell, for every conditioning cell with positive mass.
pub fn check_mcip(t: &JointTable, m: &MutualCiStatement, tol: f64) -> Result<bool> {
    check_factorization(t, m.blocks(), m.given(), tol)
}

fn check_factorization(
    t: &JointTable,
    blocks: &[VertexSet],
    given: &VertexSet,
    tol: f64,
) -> Result<bool> {
    for name in blocks.iter().flat_map(VertexSet::iter).chain(given.iter()) {
        t.variable_index(name)?;
    }
    // project onto (given, block₁, block₂, …), given slowest: each
    // conditioning slice is then one contiguous run of block cells
    let positions = |set: &VertexSet| -> Vec<usize> {
        (0..t.variables.len())
            .filter(|&i| set.contains(&t.variables[i].0))
            .collect()
    };
    let given_positions = positions(given);
    let block_positions: Vec<Vec<usize>> = blocks.iter().map(positions).collect();
    let order: Vec<usize> = given_positions
        .iter()
        .chain(block_positions.iter().flatten())
        .copied()
        .collect();
    let table = t.project(&order);

    let block_sizes: Vec<usize> = block_positions
        .iter()
        .map(|p| p.iter().map(|&v| t.variables[v].1).product())
        .collect();
    let slice_size: usize = block_sizes.iter().product();
    let slices = table.len() / slice_size.max(1);

    Ok(exec::all_range(slices, |slice_idx| {
        let slice = &table[slice_idx * slice_size..(slice_idx + 1) * slice_size];
        let mass: f64 = slice.iter().sum();
        if mass <= 0.0 {
            return true; // conditioning on a null event is vacuous
        }
        // per-block conditional marginals within the slice
        let mut block_marginals: Vec<Vec<f64>> =
            block_sizes.iter().map(|&s| vec![0.0f64; s]).collect();
        for (cell, &p) in slice.iter().enumerate() {
            let mut rem = cell;
            for (i, &size) in block_sizes.iter().enumerate().rev() {
                block_marginals[i][rem % size] += p;
                rem /= size;
            }
        }
        for (cell, &p) in slice.iter().enumerate() {
            let mut product = 1.0f64;
            let mut rem = cell;
            for (i, &size) in block_sizes.iter().enumerate().rev() {
                product *= block_marginals[i][rem % size] / mass;
                rem /= size;
            }
            if ((p / mass) - product).abs() > tol {
                return false;
            }
        }
        true
    }))
}
