//! Log-linear inference on contingency tables: closed-form fits for mutual
//! conditional independence and decomposable models, iterative proportional
//! fitting for everything else, and the X²/G²/df/p-value machinery.

use crate::chisq::chi_square_sf;
use crate::error::{Error, Result};
use crate::exec;
use crate::graph::{UndirectedGraph, VertexSet};

/// Largest table (in cells) the module will materialize.
pub const MAX_CELLS: usize = 1 << 20;

/// A categorical variable: a name plus its ordered level names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub levels: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, levels: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Variable {
            name: name.into(),
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }
}

/// A table of nonnegative real counts over the cross product of its
/// variables' levels, stored row-major with the last variable fastest.
/// Counts are reals so observed and fitted tables share one type.
#[derive(Clone, Debug, PartialEq)]
pub struct ContingencyTable {
    variables: Vec<Variable>,
    counts: Vec<f64>,
}

impl ContingencyTable {
    pub fn new(variables: Vec<Variable>, counts: Vec<f64>) -> Result<Self> {
        let mut names = std::collections::BTreeSet::new();
        for v in &variables {
            if !names.insert(v.name.clone()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate variable {}",
                    v.name
                )));
            }
            if v.levels.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "variable {} has no levels",
                    v.name
                )));
            }
            let mut levels = std::collections::BTreeSet::new();
            for l in &v.levels {
                if !levels.insert(l) {
                    return Err(Error::InvalidArgument(format!(
                        "variable {} repeats level {l}",
                        v.name
                    )));
                }
            }
        }
        let cells: u128 = variables.iter().map(|v| v.levels.len() as u128).product();
        if cells > MAX_CELLS as u128 {
            return Err(Error::TableTooLarge { cells, limit: MAX_CELLS });
        }
        if counts.len() as u128 != cells {
            return Err(Error::InvalidArgument(format!(
                "expected {cells} cells, got {}",
                counts.len()
            )));
        }
        if counts.iter().any(|&c| !c.is_finite() || c < 0.0) {
            return Err(Error::InvalidArgument(
                "cell counts must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = counts.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("total count must be positive".into()));
        }
        Ok(ContingencyTable { variables, counts })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn cell_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn variable_set(&self) -> VertexSet {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Strides for row-major indexing, last variable fastest.
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.variables.len()];
        for i in (0..self.variables.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.variables[i + 1].levels.len();
        }
        strides
    }

    /// Decodes a flat index into per-variable level indices.
    pub fn assignment_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.variables.len()];
        for i in (0..self.variables.len()).rev() {
            let len = self.variables[i].levels.len();
            out[i] = index % len;
            index /= len;
        }
        out
    }

    pub fn index_of(&self, assignment: &[usize]) -> usize {
        let strides = self.strides();
        assignment
            .iter()
            .zip(&strides)
            .map(|(&a, &s)| a * s)
            .sum()
    }

    /// Human-readable cell label, e.g. `smoke=no,mental=yes`.
    pub fn cell_label(&self, index: usize) -> String {
        let assignment = self.assignment_of(index);
        self.variables
            .iter()
            .zip(assignment)
            .map(|(v, a)| format!("{}={}", v.name, v.levels[a]))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Sums counts over every variable not in `keep`; kept variables stay in
    /// table order.
    pub fn marginal(&self, keep: &VertexSet) -> Result<ContingencyTable> {
        for name in keep.iter() {
            self.variable_index(name)?;
        }
        let kept: Vec<usize> = (0..self.variables.len())
            .filter(|&i| keep.contains(&self.variables[i].name))
            .collect();
        let map = self.marginal_map(&kept);
        let cells: usize = kept.iter().map(|&i| self.variables[i].levels.len()).product();
        let mut counts = vec![0.0f64; cells];
        for (cell, &c) in self.counts.iter().enumerate() {
            counts[map[cell]] += c;
        }
        ContingencyTable::new(
            kept.iter().map(|&i| self.variables[i].clone()).collect(),
            counts,
        )
    }

    /// For the kept variable positions (in table order), the map from each
    /// full-table cell index to the corresponding marginal cell index.
    fn marginal_map(&self, kept: &[usize]) -> Vec<usize> {
        let mut sub_strides = vec![1usize; kept.len()];
        for i in (0..kept.len().saturating_sub(1)).rev() {
            sub_strides[i] = sub_strides[i + 1] * self.variables[kept[i + 1]].levels.len();
        }
        (0..self.counts.len())
            .map(|cell| {
                let assignment = self.assignment_of(cell);
                kept.iter()
                    .zip(&sub_strides)
                    .map(|(&v, &s)| assignment[v] * s)
                    .sum()
            })
            .collect()
    }
}

/// The outcome of fitting a log-linear model.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub fitted: ContingencyTable,
    pub x2: f64,
    pub g2: f64,
    pub df: usize,
    pub p_value_x2: f64,
    pub p_value_g2: f64,
    /// Full IPF cycles run; 0 for closed-form fits.
    pub iterations: usize,
    pub converged: bool,
}

fn p_value(stat: f64, df: usize) -> Result<f64> {
    if df == 0 {
        // saturated model: the statistic is structurally 0
        return Ok(1.0);
    }
    chi_square_sf(stat, u32::try_from(df).expect("cell counts bound df"))
}

fn finish_fit(
    observed: &ContingencyTable,
    fitted: ContingencyTable,
    generators: &[VertexSet],
    iterations: usize,
    converged: bool,
) -> Result<FitResult> {
    let x2 = pearson_x2(observed, &fitted)?;
    let g2 = g2(observed, &fitted)?;
    let levels: Vec<(String, usize)> = observed
        .variables()
        .iter()
        .map(|v| (v.name.clone(), v.levels.len()))
        .collect();
    let df = degrees_of_freedom(&levels, generators)?;
    Ok(FitResult {
        p_value_x2: p_value(x2, df)?,
        p_value_g2: p_value(g2, df)?,
        fitted,
        x2,
        g2,
        df,
        iterations,
        converged,
    })
}

/// Closed-form expected counts under mutual conditional independence of
/// `blocks` given `given`:
/// m̂(x) = ∏ᵢ n(x_{Bᵢ ∪ S}) / n(x_S)^{k−1}, with fitted 0 where n(x_S) = 0.
pub fn fit_mcip(
    t: &ContingencyTable,
    blocks: &[VertexSet],
    given: &VertexSet,
) -> Result<FitResult> {
    if blocks.len() < 2 {
        return Err(Error::InvalidArgument(
            "mutual conditional independence needs at least two blocks".into(),
        ));
    }
    if blocks.iter().any(VertexSet::is_empty) {
        return Err(Error::NotAPartition("blocks must be nonempty".into()));
    }
    let mut seen = VertexSet::new();
    for part in blocks.iter().chain(std::iter::once(given)) {
        if let Some(v) = part.iter().find(|v| seen.contains(v)) {
            return Err(Error::NotAPartition(format!("variable {v} appears twice")));
        }
        seen = seen.union(part);
    }
    if seen != t.variable_set() {
        return Err(Error::NotAPartition(
            "blocks and given must cover every table variable".into(),
        ));
    }

    let k = blocks.len();
    let sep = t.marginal(given)?;
    let sep_kept: Vec<usize> = (0..t.variables.len())
        .filter(|&i| given.contains(&t.variables[i].name))
        .collect();
    let sep_map = t.marginal_map(&sep_kept);
    let mut block_marginals = Vec::with_capacity(k);
    for b in blocks {
        let scope = b.union(given);
        let kept: Vec<usize> = (0..t.variables.len())
            .filter(|&i| scope.contains(&t.variables[i].name))
            .collect();
        let map = t.marginal_map(&kept);
        block_marginals.push((t.marginal(&scope)?, map));
    }

    let fitted_counts = exec::map_range(t.cell_count(), |cell| {
        let n_s = sep.counts()[sep_map[cell]];
        if n_s <= 0.0 {
            return 0.0;
        }
        let mut value = 1.0 / n_s.powi(k as i32 - 1);
        for (m, map) in &block_marginals {
            value *= m.counts()[map[cell]];
        }
        value
    });
    let fitted = ContingencyTable::new(t.variables.clone(), fitted_counts)?;
    let generators: Vec<VertexSet> = blocks.iter().map(|b| b.union(given)).collect();
    finish_fit(t, fitted, &generators, 0, true)
}

/// Maximum-likelihood fit of the graphical model of a decomposable graph:
/// fitted(x) = total · ∏_cliques p̂(x_C) / ∏_separators p̂(x_S) along a
/// running-intersection ordering.
pub fn fit_decomposable(t: &ContingencyTable, g: &UndirectedGraph) -> Result<FitResult> {
    let tv = t.variable_set();
    let gv = g.vertex_set();
    if tv != gv {
        return Err(Error::StructureMismatch(format!(
            "table variables {{{tv}}} differ from graph vertices {{{gv}}}"
        )));
    }
    let decomposition = g.decomposition().ok_or(Error::NotDecomposable)?;
    let total = t.total();

    let mut factors = Vec::new(); // (marginal, cell map, is_numerator)
    for (scope, numerator) in decomposition
        .cliques
        .iter()
        .map(|c| (c, true))
        .chain(decomposition.separators.iter().map(|s| (s, false)))
    {
        if !numerator && scope.is_empty() {
            continue; // empty separator contributes p̂ = 1
        }
        let kept: Vec<usize> = (0..t.variables.len())
            .filter(|&i| scope.contains(&t.variables[i].name))
            .collect();
        let map = t.marginal_map(&kept);
        factors.push((t.marginal(scope)?, map, numerator));
    }

    let fitted_counts = exec::map_range(t.cell_count(), |cell| {
        let mut value = total;
        for (m, map, numerator) in &factors {
            let p = m.counts()[map[cell]] / total;
            if *numerator {
                if p <= 0.0 {
                    return 0.0;
                }
                value *= p;
            } else {
                value /= p; // separator ⊆ clique keeps this positive here
            }
        }
        value
    });
    let fitted = ContingencyTable::new(t.variables.clone(), fitted_counts)?;
    finish_fit(t, fitted, &decomposition.cliques, 0, true)
}

/// Iterative proportional fitting from a uniform start, cycling the
/// generators and rescaling the working table to match each observed
/// generator marginal. Stops when the maximum absolute generator-marginal
/// discrepancy drops to `tol` or after `max_iter` full cycles;
/// non-convergence is reported in the result, not thrown.
pub fn fit_ipf(
    t: &ContingencyTable,
    generators: &[VertexSet],
    tol: f64,
    max_iter: usize,
) -> Result<FitResult> {
    if generators.is_empty() {
        return Err(Error::InvalidArgument("need at least one generator".into()));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be a positive finite number, got {tol}"
        )));
    }
    let mut plans = Vec::with_capacity(generators.len());
    for gen in generators {
        let kept: Vec<usize> = (0..t.variables.len())
            .filter(|&i| gen.contains(&t.variables[i].name))
            .collect();
        if kept.len() != gen.len() {
            let missing = gen
                .iter()
                .find(|v| t.variable_index(v).is_err())
                .unwrap_or_default();
            return Err(Error::UnknownVariable(missing.to_string()));
        }
        let map = t.marginal_map(&kept);
        let observed = t.marginal(gen)?;
        plans.push((map, observed));
    }

    let cells = t.cell_count();
    let mut work = vec![t.total() / cells as f64; cells];
    let discrepancy = |work: &[f64]| -> f64 {
        plans
            .iter()
            .map(|(map, observed)| {
                let mut current = vec![0.0f64; observed.cell_count()];
                for (cell, &w) in work.iter().enumerate() {
                    current[map[cell]] += w;
                }
                current
                    .iter()
                    .zip(observed.counts())
                    .map(|(c, o)| (c - o).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max)
    };

    let mut iterations = 0;
    let mut converged = discrepancy(&work) <= tol;
    while !converged && iterations < max_iter {
        for (map, observed) in &plans {
            let mut current = vec![0.0f64; observed.cell_count()];
            for (cell, &w) in work.iter().enumerate() {
                current[map[cell]] += w;
            }
            for (cell, w) in work.iter_mut().enumerate() {
                let c = current[map[cell]];
                if c > 0.0 {
                    *w *= observed.counts()[map[cell]] / c;
                }
            }
        }
        iterations += 1;
        converged = discrepancy(&work) <= tol;
    }

    let fitted = ContingencyTable::new(t.variables.clone(), work)?;
    finish_fit(t, fitted, generators, iterations, converged)
}

/// Largest absolute difference between the generator marginals of `fitted`
/// and those of `observed`.
pub fn max_marginal_discrepancy(
    fitted: &ContingencyTable,
    observed: &ContingencyTable,
    generators: &[VertexSet],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for gen in generators {
        let a = fitted.marginal(gen)?;
        let b = observed.marginal(gen)?;
        for (x, y) in a.counts().iter().zip(b.counts()) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

fn check_structure(observed: &ContingencyTable, fitted: &ContingencyTable) -> Result<()> {
    if observed.variables != fitted.variables {
        return Err(Error::StructureMismatch(
            "observed and fitted tables must share variables and levels".into(),
        ));
    }
    Ok(())
}

/// Pearson's X² = Σ (O−E)²/E over cells with E > 0. A cell with E = 0 and
/// O = 0 contributes 0; E = 0 with O > 0 means the model excludes an
/// observed cell and is a degenerate-fit error.
pub fn pearson_x2(observed: &ContingencyTable, fitted: &ContingencyTable) -> Result<f64> {
    check_structure(observed, fitted)?;
    let mut sum = 0.0;
    for (cell, (&o, &e)) in observed.counts().iter().zip(fitted.counts()).enumerate() {
        if e > 0.0 {
            sum += (o - e) * (o - e) / e;
        } else if o > 0.0 {
            return Err(Error::DegenerateFit {
                cell: observed.cell_label(cell),
                observed: o,
            });
        }
    }
    Ok(sum)
}

/// Deviance G² = 2 Σ O·ln(O/E) over cells with O > 0, with 0·ln(0/E) := 0.
pub fn g2(observed: &ContingencyTable, fitted: &ContingencyTable) -> Result<f64> {
    check_structure(observed, fitted)?;
    let mut sum = 0.0;
    for (cell, (&o, &e)) in observed.counts().iter().zip(fitted.counts()).enumerate() {
        if o > 0.0 {
            if e <= 0.0 {
                return Err(Error::DegenerateFit {
                    cell: observed.cell_label(cell),
                    observed: o,
                });
            }
            sum += o * (o / e).ln();
        }
    }
    Ok(2.0 * sum)
}

/// Structural degrees of freedom of the hierarchical model with the given
/// generators: #cells − Σ over all distinct subsets of any generator
/// (including ∅) of ∏_{v ∈ subset} (levels(v) − 1).
pub fn degrees_of_freedom(
    levels: &[(String, usize)],
    generators: &[VertexSet],
) -> Result<usize> {
    if generators.is_empty() {
        return Err(Error::InvalidArgument("need at least one generator".into()));
    }
    let index: std::collections::BTreeMap<&str, usize> = levels
        .iter()
        .map(|(name, count)| (name.as_str(), *count))
        .collect();
    let mut subsets: std::collections::BTreeSet<Vec<&str>> = std::collections::BTreeSet::new();
    for gen in generators {
        let members: Vec<&str> = gen.iter().collect();
        for v in &members {
            if !index.contains_key(*v) {
                return Err(Error::UnknownVariable((*v).to_string()));
            }
        }
        for mask in 0u64..(1u64 << members.len()) {
            let subset: Vec<&str> = members
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, v)| *v)
                .collect();
            subsets.insert(subset);
        }
    }
    let cells: usize = levels.iter().map(|(_, c)| *c).product();
    let parameters: usize = subsets
        .iter()
        .map(|subset| subset.iter().map(|v| index[v] - 1).product::<usize>())
        .sum();
    Ok(cells.saturating_sub(parameters))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(counts: [f64; 4]) -> ContingencyTable {
        ContingencyTable::new(
            vec![Variable::new("a", ["0", "1"]), Variable::new("b", ["0", "1"])],
            counts.to_vec(),
        )
        .unwrap()
    }

    fn binary_vars(names: &[&str]) -> Vec<(String, usize)> {
        names.iter().map(|n| (n.to_string(), 2)).collect()
    }

    fn set(labels: &[&str]) -> VertexSet {
        VertexSet::from_labels(labels.iter().copied())
    }

    #[test]
    fn marginal_examples() {
        let t = two_by_two([10.0, 20.0, 30.0, 40.0]);
        let identity = t.marginal(&set(&["a", "b"])).unwrap();
        assert_eq!(identity.counts(), t.counts());
        let grand = t.marginal(&VertexSet::new()).unwrap();
        assert_eq!(grand.counts(), &[100.0]);
        let rows = t.marginal(&set(&["a"])).unwrap();
        assert_eq!(rows.counts(), &[30.0, 70.0]);
        let cols = t.marginal(&set(&["b"])).unwrap();
        assert_eq!(cols.counts(), &[40.0, 60.0]);
        assert!(t.marginal(&set(&["zzz"])).is_err());
    }

    #[test]
    fn fit_mcip_two_way_independence() {
        let t = two_by_two([10.0, 20.0, 30.0, 40.0]);
        let fit = fit_mcip(&t, &[set(&["a"]), set(&["b"])], &VertexSet::new()).unwrap();
        // classic row·col/total
        for (f, want) in fit.fitted.counts().iter().zip([12.0, 18.0, 28.0, 42.0]) {
            assert!((f - want).abs() < 1e-12, "{f} vs {want}");
        }
        let x2 = 4.0 / 12.0 + 4.0 / 18.0 + 4.0 / 28.0 + 4.0 / 42.0;
        assert!((fit.x2 - x2).abs() < 1e-12);
        assert_eq!(fit.df, 1);
        assert_eq!(fit.iterations, 0);
        assert!(fit.converged);
        assert!((fit.fitted.total() - t.total()).abs() < 1e-9);
    }

    #[test]
    fn fit_mcip_partition_validation() {
        let t = two_by_two([10.0, 20.0, 30.0, 40.0]);
        assert!(matches!(
            fit_mcip(&t, &[set(&["a"])], &set(&["b"])),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            fit_mcip(&t, &[set(&["a"]), set(&["a"])], &set(&["b"])),
            Err(Error::NotAPartition(_))
        ));
        assert!(matches!(
            fit_mcip(&t, &[set(&["a"]), set(&["b"])], &set(&["c"])),
            Err(Error::NotAPartition(_))
        ));
    }

    #[test]
    fn fit_mcip_preserves_generator_marginals() {
        let t = random_table(&["a", "b", "c", "d"], 11);
        let blocks = [set(&["a"]), set(&["b"])];
        let given = set(&["c", "d"]);
        let fit = fit_mcip(&t, &blocks, &given).unwrap();
        for b in &blocks {
            let scope = b.union(&given);
            let fitted = fit.fitted.marginal(&scope).unwrap();
            let observed = t.marginal(&scope).unwrap();
            for (f, o) in fitted.counts().iter().zip(observed.counts()) {
                assert!((f - o).abs() < 1e-9);
            }
        }
        assert!((fit.fitted.total() - t.total()).abs() / t.total() < 1e-6);
    }

    #[test]
    fn fit_mcip_matches_star_of_cliques_decomposable_fit() {
        let t = random_table(&["a", "b", "c", "d"], 5);
        let fit_m = fit_mcip(&t, &[set(&["a"]), set(&["b"])], &set(&["c", "d"])).unwrap();
        // star of cliques: given-set complete, each block complete, all
        // block-to-given edges, no block-to-block edges
        let g = UndirectedGraph::from_parts(
            ["a", "b", "c", "d"],
            [("c", "d"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")],
        )
        .unwrap();
        let fit_d = fit_decomposable(&t, &g).unwrap();
        for (m, d) in fit_m.fitted.counts().iter().zip(fit_d.fitted.counts()) {
            assert!((m - d).abs() < 1e-9, "{m} vs {d}");
        }
        assert_eq!(fit_m.df, fit_d.df);
    }

    #[test]
    fn fit_decomposable_saturated() {
        let t = two_by_two([10.0, 20.0, 30.0, 40.0]);
        let complete = UndirectedGraph::from_parts(["a", "b"], [("a", "b")]).unwrap();
        let fit = fit_decomposable(&t, &complete).unwrap();
        for (f, o) in fit.fitted.counts().iter().zip(t.counts()) {
            assert!((f - o).abs() < 1e-9);
        }
        assert_eq!(fit.x2, 0.0);
        assert_eq!(fit.g2, 0.0);
        assert_eq!(fit.df, 0);
        assert_eq!(fit.p_value_x2, 1.0);
    }

    #[test]
    fn fit_decomposable_rejects_chordless_cycle() {
        let t = random_table(&["a", "b", "c", "d"], 3);
        let cycle = UndirectedGraph::from_parts(
            ["a", "b", "c", "d"],
            [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        )
        .unwrap();
        assert!(matches!(fit_decomposable(&t, &cycle), Err(Error::NotDecomposable)));
        let other = UndirectedGraph::from_parts(["a", "b", "x"], [("a", "b")]).unwrap();
        assert!(matches!(
            fit_decomposable(&t, &other),
            Err(Error::StructureMismatch(_))
        ));
    }

    #[test]
    fn ipf_fits_product_table_with_singletons() {
        let t = two_by_two([12.0, 18.0, 28.0, 42.0]); // exact product form
        let fit = fit_ipf(&t, &[set(&["a"]), set(&["b"])], 1e-10, 100).unwrap();
        assert!(fit.converged);
        for (f, o) in fit.fitted.counts().iter().zip(t.counts()) {
            assert!((f - o).abs() < 1e-8);
        }
    }

    #[test]
    fn ipf_matches_decomposable_fit() {
        let t = random_table(&["a", "b", "c"], 7);
        let chain = UndirectedGraph::from_parts(["a", "b", "c"], [("a", "b"), ("b", "c")]).unwrap();
        let direct = fit_decomposable(&t, &chain).unwrap();
        let ipf = fit_ipf(&t, &[set(&["a", "b"]), set(&["b", "c"])], 1e-10, 200).unwrap();
        assert!(ipf.converged);
        for (i, d) in ipf.fitted.counts().iter().zip(direct.fitted.counts()) {
            assert!((i - d).abs() < 1e-6, "{i} vs {d}");
        }
        assert_eq!(ipf.df, direct.df);
    }

    #[test]
    fn ipf_discrepancy_monotone_over_cycles() {
        // chordless 4-cycle: no closed form, IPF must genuinely iterate
        let t = random_table(&["a", "b", "c", "d"], 23);
        let generators = [
            set(&["a", "b"]),
            set(&["b", "c"]),
            set(&["c", "d"]),
            set(&["d", "a"]),
        ];
        let mut last = f64::INFINITY;
        for cycles in 1..=8 {
            let fit = fit_ipf(&t, &generators, 1e-300, cycles).unwrap();
            assert_eq!(fit.iterations, cycles);
            let d = max_marginal_discrepancy(&fit.fitted, &t, &generators).unwrap();
            assert!(d <= last + 1e-12, "cycle {cycles}: {d} > {last}");
            last = d;
        }
        // converged run reproduces every generator marginal within tol
        let fit = fit_ipf(&t, &generators, 1e-8, 500).unwrap();
        assert!(fit.converged);
        assert!(max_marginal_discrepancy(&fit.fitted, &t, &generators).unwrap() <= 1e-8);
    }

    #[test]
    fn statistic_conventions() {
        let t = two_by_two([10.0, 20.0, 30.0, 40.0]);
        assert_eq!(pearson_x2(&t, &t).unwrap(), 0.0);
        assert_eq!(g2(&t, &t).unwrap(), 0.0);

        // structural zero in both → contributes nothing
        let observed = two_by_two([0.0, 20.0, 30.0, 40.0]);
        let fitted = two_by_two([0.0, 20.0, 30.0, 40.0]);
        assert_eq!(pearson_x2(&observed, &fitted).unwrap(), 0.0);
        assert_eq!(g2(&observed, &fitted).unwrap(), 0.0);

        // observed mass on a model-excluded cell is a degenerate fit
        let fitted = ContingencyTable::new(
            vec![Variable::new("a", ["0", "1"]), Variable::new("b", ["0", "1"])],
            vec![0.0, 30.0, 30.0, 40.0],
        )
        .unwrap();
        assert!(matches!(
            pearson_x2(&t, &fitted),
            Err(Error::DegenerateFit { .. })
        ));
        assert!(matches!(g2(&t, &fitted), Err(Error::DegenerateFit { .. })));

        let mismatched = ContingencyTable::new(
            vec![Variable::new("a", ["0", "1"]), Variable::new("z", ["0", "1"])],
            vec![1.0; 4],
        )
        .unwrap();
        assert!(matches!(
            pearson_x2(&t, &mismatched),
            Err(Error::StructureMismatch(_))
        ));
    }

    #[test]
    fn degrees_of_freedom_examples() {
        let vars6 = binary_vars(&["systol", "protein", "smoke", "phys", "mental", "family"]);
        let fig2_cliques = [
            set(&["systol", "protein", "mental"]),
            set(&["protein", "mental", "phys"]),
            set(&["mental", "phys", "smoke"]),
            set(&["smoke", "family"]),
        ];
        assert_eq!(degrees_of_freedom(&vars6, &fig2_cliques).unwrap(), 46);

        let fig3_cliques = [
            set(&["systol", "protein", "mental"]),
            set(&["protein", "smoke"]),
            set(&["mental", "phys"]),
            set(&["smoke", "phys"]),
            set(&["phys", "family"]),
        ];
        assert_eq!(degrees_of_freedom(&vars6, &fig3_cliques).unwrap(), 49);

        // saturated
        let all = set(&["systol", "protein", "smoke", "phys", "mental", "family"]);
        assert_eq!(degrees_of_freedom(&vars6, &[all]).unwrap(), 0);

        // mixed level counts: 3×2 independence model → (3-1)(2-1) = 2
        let vars = vec![("a".to_string(), 3), ("b".to_string(), 2)];
        assert_eq!(
            degrees_of_freedom(&vars, &[set(&["a"]), set(&["b"])]).unwrap(),
            2
        );
    }

    #[test]
    fn table_validation() {
        assert!(ContingencyTable::new(
            vec![Variable::new("a", ["0", "1"])],
            vec![1.0, 2.0, 3.0]
        )
        .is_err());
        assert!(ContingencyTable::new(vec![Variable::new("a", ["0", "1"])], vec![-1.0, 2.0])
            .is_err());
        assert!(ContingencyTable::new(vec![Variable::new("a", ["0", "0"])], vec![1.0, 2.0])
            .is_err());
        assert!(ContingencyTable::new(vec![Variable::new("a", ["0", "1"])], vec![0.0, 0.0])
            .is_err());
        // zero-variable table holds the grand total
        let grand = ContingencyTable::new(vec![], vec![5.0]).unwrap();
        assert_eq!(grand.total(), 5.0);
    }

    /// Deterministic pseudo-random binary table for cross-checks.
    fn random_table(names: &[&str], seed: u64) -> ContingencyTable {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let vars: Vec<Variable> = names.iter().map(|n| Variable::new(*n, ["0", "1"])).collect();
        let cells = 1usize << names.len();
        let counts: Vec<f64> = (0..cells).map(|_| rng.random_range(1.0..50.0)).collect();
        ContingencyTable::new(vars, counts).unwrap()
    }
}
