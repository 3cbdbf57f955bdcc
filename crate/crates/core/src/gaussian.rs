//! Gaussian graphical-model testing: covariance, partial correlations, the
//! single-edge deviance CI test, and the pairwise-to-mutual MCIP conclusion
//! for normal data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::chisq::chi_square_sf;
use crate::error::{Error, Result};
use crate::graph::VertexSet;

/// A complete numeric data matrix: n observations of p named variables.
#[derive(Clone, Debug)]
pub struct DataMatrix {
    variables: Vec<String>,
    data: Vec<f64>, // row-major n × p
    n: usize,
}

impl DataMatrix {
    pub fn new(variables: Vec<String>, data: Vec<f64>) -> Result<Self> {
        let p = variables.len();
        if p == 0 {
            return Err(Error::InvalidArgument("need at least one variable".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in &variables {
            if !seen.insert(v.clone()) {
                return Err(Error::DuplicateVertex(v.clone()));
            }
        }
        if data.is_empty() || !data.len().is_multiple_of(p) {
            return Err(Error::InvalidArgument(format!(
                "data length {} is not a positive multiple of {p} variables",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("data must be finite, no missing values".into()));
        }
        let n = data.len() / p;
        Ok(DataMatrix { variables, data, n })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.variables.len()
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.p() + col]
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

/// A labeled symmetric covariance matrix.
#[derive(Clone, Debug)]
pub struct CovarianceMatrix {
    variables: Vec<String>,
    values: Vec<f64>, // row-major p × p
}

impl CovarianceMatrix {
    pub fn new(variables: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let p = variables.len();
        if values.len() != p * p {
            return Err(Error::InvalidArgument(format!(
                "expected {p}×{p} values, got {}",
                values.len()
            )));
        }
        Ok(CovarianceMatrix { variables, values })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.variables.len() + j]
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

/// Sample covariance with denominator n − 1.
pub fn covariance(d: &DataMatrix) -> Result<CovarianceMatrix> {
    if d.n() < 2 {
        return Err(Error::TooFewObservations { needed: 2, found: d.n() });
    }
    let p = d.p();
    let n = d.n();
    let mut means = vec![0.0f64; p];
    for row in 0..n {
        for (col, m) in means.iter_mut().enumerate() {
            *m += d.value(row, col);
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut values = vec![0.0f64; p * p];
    for i in 0..p {
        for j in i..p {
            let mut acc = 0.0;
            for row in 0..n {
                acc += (d.value(row, i) - means[i]) * (d.value(row, j) - means[j]);
            }
            let c = acc / (n - 1) as f64;
            values[i * p + j] = c;
            values[j * p + i] = c;
        }
    }
    CovarianceMatrix::new(d.variables().to_vec(), values)
}

/// In-place Gauss-Jordan inversion with partial pivoting. Pivots smaller
/// than 1e-12 × (largest initial entry) are treated as singular.
fn invert(matrix: &[f64], size: usize, context: &str) -> Result<Vec<f64>> {
    let mut a = matrix.to_vec();
    let mut inv = vec![0.0f64; size * size];
    for i in 0..size {
        inv[i * size + i] = 1.0;
    }
    let scale = a.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let threshold = 1e-12 * scale;
    for col in 0..size {
        let pivot_row = (col..size)
            .max_by(|&r1, &r2| {
                a[r1 * size + col]
                    .abs()
                    .partial_cmp(&a[r2 * size + col].abs())
                    .expect("finite entries")
            })
            .expect("nonempty range");
        if a[pivot_row * size + col].abs() <= threshold {
            return Err(Error::SingularMatrix(context.to_string()));
        }
        if pivot_row != col {
            for k in 0..size {
                a.swap(col * size + k, pivot_row * size + k);
                inv.swap(col * size + k, pivot_row * size + k);
            }
        }
        let pivot = a[col * size + col];
        for k in 0..size {
            a[col * size + k] /= pivot;
            inv[col * size + k] /= pivot;
        }
        for row in 0..size {
            if row == col {
                continue;
            }
            let factor = a[row * size + col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..size {
                a[row * size + k] -= factor * a[col * size + k];
                inv[row * size + k] -= factor * inv[col * size + k];
            }
        }
    }
    Ok(inv)
}

/// Partial correlation of u and v given the conditioning set: with Ω the
/// inverse of the covariance submatrix over {u, v} ∪ given,
/// r = −Ω_uv / sqrt(Ω_uu · Ω_vv).
pub fn partial_correlation(
    cov: &CovarianceMatrix,
    u: &str,
    v: &str,
    given: &VertexSet,
) -> Result<f64> {
    if u == v || given.contains(u) || given.contains(v) {
        return Err(Error::OverlappingSets(if u == v || given.contains(u) {
            u.to_string()
        } else {
            v.to_string()
        }));
    }
    let mut indices = vec![cov.variable_index(u)?, cov.variable_index(v)?];
    for name in given.iter() {
        indices.push(cov.variable_index(name)?);
    }
    let size = indices.len();
    let mut sub = vec![0.0f64; size * size];
    for (a, &i) in indices.iter().enumerate() {
        for (b, &j) in indices.iter().enumerate() {
            sub[a * size + b] = cov.get(i, j);
        }
    }
    let context = format!("covariance submatrix over {{{u},{v}}} ∪ {{{given}}}");
    let omega = invert(&sub, size, &context)?;
    let denominator = omega[0] * omega[size + 1];
    if denominator <= 0.0 {
        return Err(Error::SingularMatrix(context));
    }
    Ok(-omega[1] / denominator.sqrt())
}

/// The outcome of one Gaussian conditional-independence test.
#[derive(Clone, Debug)]
pub struct GaussianCiTestResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub partial_correlation: f64,
}

/// Deviance test of u ⟂ v | given for normal data: statistic −n·ln(1 − r²)
/// with r the sample partial correlation, referred to chi-square with 1 df.
pub fn ci_test_gaussian(
    d: &DataMatrix,
    u: &str,
    v: &str,
    given: &VertexSet,
) -> Result<GaussianCiTestResult> {
    if d.n() <= given.len() + 2 {
        return Err(Error::TooFewObservations {
            needed: given.len() + 3,
            found: d.n(),
        });
    }
    let cov = covariance(d)?;
    let r = partial_correlation(&cov, u, v, given)?;
    let one_minus = 1.0 - r * r;
    if one_minus <= 0.0 {
        return Err(Error::DegenerateCorrelation);
    }
    let statistic = (-(d.n() as f64) * one_minus.ln()).max(0.0);
    Ok(GaussianCiTestResult {
        statistic,
        df: 1,
        p_value: chi_square_sf(statistic, 1)?,
        partial_correlation: r,
    })
}

/// One pairwise test inside an MCIP consistency report.
#[derive(Clone, Debug)]
pub struct PairwiseGaussianTest {
    pub u: String,
    pub v: String,
    pub result: GaussianCiTestResult,
}

/// The MCIP verdict for a set of singleton blocks on normal data.
#[derive(Clone, Debug)]
pub struct McipGaussianReport {
    pub tests: Vec<PairwiseGaussianTest>,
    pub alpha: f64,
    pub consistent: bool,
    pub rationale: &'static str,
}

pub const NORMALITY_RATIONALE: &str = "for jointly normal variables, pairwise conditional \
independence given the conditioning set implies mutual conditional independence";

/// Tests every pair of block variables given `given`; the data are declared
/// MCIP-consistent iff every pairwise p-value exceeds alpha.
pub fn mcip_gaussian_check(
    d: &DataMatrix,
    blocks: &[VertexSet],
    given: &VertexSet,
    alpha: f64,
) -> Result<McipGaussianReport> {
    if blocks.len() < 2 {
        return Err(Error::InvalidArgument(
            "an MCIP check needs at least two blocks".into(),
        ));
    }
    let mut labels = Vec::with_capacity(blocks.len());
    for b in blocks {
        if b.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "blocks must be singletons, got {{{b}}}"
            )));
        }
        labels.push(b.iter().next().expect("nonempty").to_string());
    }
    labels.sort();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    let mut tests = Vec::new();
    let mut consistent = true;
    for (i, u) in labels.iter().enumerate() {
        for v in &labels[i + 1..] {
            let result = ci_test_gaussian(d, u, v, given)?;
            consistent &= result.p_value > alpha;
            tests.push(PairwiseGaussianTest {
                u: u.clone(),
                v: v.clone(),
                result,
            });
        }
    }
    Ok(McipGaussianReport {
        tests,
        alpha,
        consistent,
        rationale: NORMALITY_RATIONALE,
    })
}

/// Draws n rows from a zero-mean multivariate normal with the given
/// covariance, deterministically from the seed. Used by calibration tests
/// and synthetic examples.
pub fn sample_gaussian(
    variables: Vec<String>,
    covariance: &[f64],
    n: usize,
    seed: u64,
) -> Result<DataMatrix> {
    let p = variables.len();
    if covariance.len() != p * p {
        return Err(Error::InvalidArgument(format!(
            "expected {p}×{p} covariance, got {} entries",
            covariance.len()
        )));
    }
    let chol = cholesky(covariance, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0f64; n * p];
    let mut z = vec![0.0f64; p];
    for row in 0..n {
        for zi in &mut z {
            *zi = StandardNormal.sample(&mut rng);
        }
        for i in 0..p {
            let mut acc = 0.0;
            for (j, &zj) in z.iter().enumerate().take(i + 1) {
                acc += chol[i * p + j] * zj;
            }
            data[row * p + i] = acc;
        }
    }
    DataMatrix::new(variables, data)
}

/// Lower-triangular Cholesky factor of a positive-definite matrix.
fn cholesky(matrix: &[f64], p: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0f64; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut acc = matrix[i * p + j];
            for k in 0..j {
                acc -= l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if acc <= 0.0 {
                    return Err(Error::SingularMatrix(
                        "covariance is not positive definite".into(),
                    ));
                }
                l[i * p + j] = acc.sqrt();
            } else {
                l[i * p + j] = acc / l[j * p + j];
            }
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(vars: &[&str], rows: &[&[f64]]) -> DataMatrix {
        DataMatrix::new(
            vars.iter().map(|v| v.to_string()).collect(),
            rows.iter().flat_map(|r| r.iter().copied()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn covariance_examples() {
        let d = matrix(&["a", "b", "c"], &[&[1.0, 2.0, 5.0], &[3.0, 4.0, 5.0], &[5.0, 6.0, 5.0]]);
        let cov = covariance(&d).unwrap();
        assert_eq!(cov.get(0, 0), 4.0);
        // b = a + 1: identical shape, covariance = variance
        assert_eq!(cov.get(0, 1), 4.0);
        assert_eq!(cov.get(1, 1), 4.0);
        // constant column has zero variance
        assert_eq!(cov.get(2, 2), 0.0);
        // symmetry
        assert_eq!(cov.get(0, 2), cov.get(2, 0));

        let single = matrix(&["a"], &[&[1.0]]);
        assert!(matches!(
            covariance(&single),
            Err(Error::TooFewObservations { .. })
        ));
    }

    #[test]
    fn covariance_recovers_generator() {
        let sigma = [2.0, 0.6, 0.3, 0.6, 1.0, 0.2, 0.3, 0.2, 1.5];
        let d = sample_gaussian(
            vec!["x".into(), "y".into(), "z".into()],
            &sigma,
            10_000,
            99,
        )
        .unwrap();
        let cov = covariance(&d).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = sigma[i * 3 + j];
                let got = cov.get(i, j);
                assert!((got - want).abs() < 0.15, "cov[{i}][{j}] = {got}, want {want}");
            }
        }
    }

    #[test]
    fn partial_correlation_unconditional_is_plain_correlation() {
        let d = matrix(
            &["a", "b"],
            &[&[1.0, 2.1], &[2.0, 3.9], &[3.0, 6.2], &[4.0, 7.8], &[5.0, 10.1]],
        );
        let cov = covariance(&d).unwrap();
        let r = partial_correlation(&cov, "a", "b", &VertexSet::new()).unwrap();
        let plain = cov.get(0, 1) / (cov.get(0, 0) * cov.get(1, 1)).sqrt();
        assert!((r - plain).abs() < 1e-12);
    }

    #[test]
    fn partial_correlation_identity_covariance_is_zero() {
        let vars: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let mut identity = vec![0.0f64; 16];
        for i in 0..4 {
            identity[i * 4 + i] = 1.0;
        }
        let cov = CovarianceMatrix::new(vars, identity).unwrap();
        for given in [VertexSet::new(), VertexSet::from_labels(["c"]), VertexSet::from_labels(["c", "d"])] {
            let r = partial_correlation(&cov, "a", "b", &given).unwrap();
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn partial_correlation_matches_hand_inverted_3x3() {
        // Σ and its inverse computed by the adjugate formula
        let sigma = [2.0, 0.5, 0.3, 0.5, 1.0, 0.2, 0.3, 0.2, 1.5];
        let det: f64 = 2.0 * (1.0 * 1.5 - 0.2 * 0.2) - 0.5 * (0.5 * 1.5 - 0.2 * 0.3)
            + 0.3 * (0.5 * 0.2 - 1.0 * 0.3);
        let omega_00 = (1.0 * 1.5 - 0.2 * 0.2) / det;
        let omega_01 = -(0.5 * 1.5 - 0.2 * 0.3) / det;
        let omega_11 = (2.0 * 1.5 - 0.3 * 0.3) / det;
        let expected = -omega_01 / (omega_00 * omega_11).sqrt();

        let cov = CovarianceMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            sigma.to_vec(),
        )
        .unwrap();
        let r = partial_correlation(&cov, "a", "b", &VertexSet::from_labels(["c"])).unwrap();
        assert!((r - expected).abs() < 1e-12, "{r} vs {expected}");
    }

    #[test]
    fn partial_correlation_errors() {
        let vars: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let singular = CovarianceMatrix::new(vars.clone(), vec![0.0; 9]).unwrap();
        assert!(matches!(
            partial_correlation(&singular, "a", "b", &VertexSet::new()),
            Err(Error::SingularMatrix(_))
        ));
        let identity = CovarianceMatrix::new(
            vars,
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        assert!(partial_correlation(&identity, "a", "a", &VertexSet::new()).is_err());
        assert!(partial_correlation(&identity, "a", "b", &VertexSet::from_labels(["a"])).is_err());
        assert!(partial_correlation(&identity, "a", "zz", &VertexSet::new()).is_err());
    }

    #[test]
    fn ci_test_zero_correlation() {
        // orthogonal columns: r = 0, statistic 0, p-value 1
        let d = matrix(
            &["a", "b"],
            &[&[1.0, 1.0], &[1.0, -1.0], &[-1.0, 1.0], &[-1.0, -1.0]],
        );
        let t = ci_test_gaussian(&d, "a", "b", &VertexSet::new()).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
        assert_eq!(t.df, 1);
        assert_eq!(t.partial_correlation, 0.0);
    }

    #[test]
    fn ci_test_degenerate_and_short_data() {
        let d = matrix(&["a", "b"], &[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0], &[4.0, 8.0]]);
        assert!(matches!(
            ci_test_gaussian(&d, "a", "b", &VertexSet::new()),
            Err(Error::DegenerateCorrelation) | Err(Error::SingularMatrix(_))
        ));
        let short = matrix(&["a", "b"], &[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            ci_test_gaussian(&short, "a", "b", &VertexSet::new()),
            Err(Error::TooFewObservations { .. })
        ));
    }

    #[test]
    fn statistic_invariant_under_rescaling() {
        let sigma = [1.0, 0.3, 0.1, 0.3, 1.0, 0.4, 0.1, 0.4, 1.0];
        let d = sample_gaussian(vec!["x".into(), "y".into(), "z".into()], &sigma, 200, 5).unwrap();
        let base = ci_test_gaussian(&d, "x", "y", &VertexSet::from_labels(["z"])).unwrap();
        let rescaled = DataMatrix::new(
            d.variables().to_vec(),
            (0..d.n() * d.p())
                .map(|idx| {
                    let col = idx % d.p();
                    let scale = [13.0, 0.007, 3.4][col];
                    d.value(idx / d.p(), col) * scale
                })
                .collect(),
        )
        .unwrap();
        let scaled = ci_test_gaussian(&rescaled, "x", "y", &VertexSet::from_labels(["z"])).unwrap();
        assert!((base.statistic - scaled.statistic).abs() < 1e-9);
        assert!((base.partial_correlation - scaled.partial_correlation).abs() < 1e-9);
    }

    #[test]
    fn mcip_check_identity_covariance_consistent() {
        let mut identity = vec![0.0f64; 25];
        for i in 0..5 {
            identity[i * 5 + i] = 1.0;
        }
        let vars: Vec<String> = (1..=5).map(|i| format!("V{i}")).collect();
        let d = sample_gaussian(vars, &identity, 400, 21).unwrap();
        let report = mcip_gaussian_check(
            &d,
            &[
                VertexSet::from_labels(["V1"]),
                VertexSet::from_labels(["V3"]),
                VertexSet::from_labels(["V5"]),
            ],
            &VertexSet::from_labels(["V2", "V4"]),
            0.01,
        )
        .unwrap();
        assert_eq!(report.tests.len(), 3);
        assert!(report.consistent, "identity covariance should look independent");
    }

    #[test]
    fn mcip_check_detects_planted_dependence() {
        // strong direct V1–V3 coupling survives conditioning on V2
        let sigma = [
            1.0, 0.0, 0.8, //
            0.0, 1.0, 0.0, //
            0.8, 0.0, 1.0,
        ];
        let vars: Vec<String> = (1..=3).map(|i| format!("V{i}")).collect();
        let d = sample_gaussian(vars, &sigma, 500, 33).unwrap();
        let report = mcip_gaussian_check(
            &d,
            &[VertexSet::from_labels(["V1"]), VertexSet::from_labels(["V3"])],
            &VertexSet::from_labels(["V2"]),
            0.05,
        )
        .unwrap();
        assert!(!report.consistent);
        assert!(matches!(
            mcip_gaussian_check(&d, &[VertexSet::from_labels(["V1"])], &VertexSet::new(), 0.05),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            mcip_gaussian_check(
                &d,
                &[VertexSet::from_labels(["V1", "V2"]), VertexSet::from_labels(["V3"])],
                &VertexSet::new(),
                0.05
            ),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let sigma = [1.0, 0.2, 0.2, 1.0];
        let a = sample_gaussian(vec!["x".into(), "y".into()], &sigma, 10, 7).unwrap();
        let b = sample_gaussian(vec!["x".into(), "y".into()], &sigma, 10, 7).unwrap();
        for row in 0..10 {
            for col in 0..2 {
                assert_eq!(a.value(row, col), b.value(row, col));
            }
        }
        assert!(sample_gaussian(vec!["x".into()], &[-1.0], 5, 1).is_err());
    }
}
