//! Information-theoretic functionals over finite joint distributions and
//! Gaussian covariance matrices. Everything is in bits (log base 2) and
//! follows the convention `0 * log 0 = 0`.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use ndarray::{ArrayD, Axis as NdAxis, IxDyn};

pub const LOG2_2PIE: f64 = 4.094191170361282; // log2(2*pi*e)

const MASS_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn xlog2x(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy of a raw probability slice, in bits. No validation.
pub(crate) fn entropy_slice(p: &[f64]) -> f64 {
    -p.iter().copied().map(xlog2x).sum::<f64>()
}

/// A validated probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        if let Some((i, &e)) = entries.iter().enumerate().find(|(_, &e)| e < 0.0 || !e.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {e}, expected a probability"
            )));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1 within {MASS_TOL:e}"
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Shannon entropy in bits.
pub fn entropy(dist: &ProbVector) -> f64 {
    entropy_slice(dist.entries())
}

/// Binary entropy h2(p) in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("binary_entropy: p = {p} outside [0, 1]")));
    }
    Ok(-xlog2x(p) - xlog2x(1.0 - p))
}

/// A dense joint distribution over named finite axes.
#[derive(Debug, Clone)]
pub struct JointDist {
    axes: Vec<(String, usize)>,
    mass: ArrayD<f64>,
}

impl JointDist {
    pub fn new(axes: Vec<(&str, usize)>, mass: ArrayD<f64>) -> Result<Self> {
        let shape: Vec<usize> = axes.iter().map(|&(_, s)| s).collect();
        if mass.shape() != shape.as_slice() {
            return Err(Error::SizeMismatch(format!(
                "mass tensor shape {:?} does not match axes {:?}",
                mass.shape(),
                shape
            )));
        }
        if mass.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidDistribution("negative or non-finite mass".into()));
        }
        let total: f64 = mass.sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "total mass {total}, expected 1 within {MASS_TOL:e}"
            )));
        }
        Ok(Self {
            axes: axes.into_iter().map(|(n, s)| (n.to_string(), s)).collect(),
            mass,
        })
    }

    pub fn axes(&self) -> &[(String, usize)] {
        &self.axes
    }

    pub fn mass(&self) -> &ArrayD<f64> {
        &self.mass
    }

    pub fn axis_index(&self, name: &str) -> Option<usize> {
        self.axes.iter().position(|(n, _)| n == name)
    }

    pub fn axis_size(&self, name: &str) -> Option<usize> {
        self.axes.iter().find(|(n, _)| n == name).map(|&(_, s)| s)
    }

    fn resolve(&self, group: &[&str]) -> Result<Vec<usize>> {
        group
            .iter()
            .map(|name| {
                self.axis_index(name)
                    .ok_or_else(|| Error::Argument(format!("unknown axis {name:?}")))
            })
            .collect()
    }

    /// Marginal over the named axes (original axis order is preserved).
    pub fn marginal(&self, keep: &[&str]) -> Result<JointDist> {
        let keep_idx = self.resolve(keep)?;
        let mut mass = self.mass.clone();
        let mut axes = self.axes.clone();
        for i in (0..self.axes.len()).rev() {
            if !keep_idx.contains(&i) {
                mass = mass.sum_axis(NdAxis(i));
                axes.remove(i);
            }
        }
        Ok(JointDist { axes, mass })
    }

    /// Joint entropy of the whole distribution, in bits.
    pub fn entropy(&self) -> f64 {
        -self.mass.iter().copied().map(xlog2x).sum::<f64>()
    }

    /// Entropy of the marginal on `group`, in bits.
    pub fn entropy_of(&self, group: &[&str]) -> Result<f64> {
        Ok(self.marginal(group)?.entropy())
    }

    fn check_disjoint(groups: &[&[&str]]) -> Result<()> {
        let mut seen: Vec<&str> = Vec::new();
        for g in groups {
            for name in *g {
                if seen.contains(name) {
                    return Err(Error::Argument(format!("axis {name:?} appears in two groups")));
                }
                seen.push(name);
            }
        }
        Ok(())
    }

    /// I(A;B) in bits.
    pub fn mutual_info(&self, group_a: &[&str], group_b: &[&str]) -> Result<f64> {
        Self::check_disjoint(&[group_a, group_b])?;
        let ab: Vec<&str> = group_a.iter().chain(group_b).copied().collect();
        Ok(self.entropy_of(group_a)? + self.entropy_of(group_b)? - self.entropy_of(&ab)?)
    }

    /// I(A;B|C) in bits.
    pub fn cond_mutual_info(&self, group_a: &[&str], group_b: &[&str], given: &[&str]) -> Result<f64> {
        Self::check_disjoint(&[group_a, group_b, given])?;
        let ac: Vec<&str> = group_a.iter().chain(given).copied().collect();
        let bc: Vec<&str> = group_b.iter().chain(given).copied().collect();
        let abc: Vec<&str> = group_a.iter().chain(group_b).chain(given).copied().collect();
        Ok(self.entropy_of(&ac)? + self.entropy_of(&bc)? - self.entropy_of(&abc)?
            - self.entropy_of(given)?)
    }
}

/// A conditional probability table p(to | from_1, ..., from_k).
/// Stored as a tensor of shape `from sizes ++ [to size]`; each row
/// (fixed `from` index) is a distribution over `to`.
#[derive(Debug, Clone)]
pub struct Kernel {
    from_axes: Vec<(String, usize)>,
    to_axis: (String, usize),
    rows: ArrayD<f64>,
}

impl Kernel {
    pub fn new(from_axes: Vec<(&str, usize)>, to_axis: (&str, usize), rows: ArrayD<f64>) -> Result<Self> {
        Self::with_row_tolerance(from_axes, to_axis, rows, MASS_TOL)
    }

    /// Rows whose sum is within `tol` of 1 are renormalized; beyond that, error.
    pub fn with_row_tolerance(
        from_axes: Vec<(&str, usize)>,
        to_axis: (&str, usize),
        mut rows: ArrayD<f64>,
        tol: f64,
    ) -> Result<Self> {
        let mut shape: Vec<usize> = from_axes.iter().map(|&(_, s)| s).collect();
        shape.push(to_axis.1);
        if rows.shape() != shape.as_slice() {
            return Err(Error::SizeMismatch(format!(
                "kernel shape {:?} does not match axes {:?}",
                rows.shape(),
                shape
            )));
        }
        let n_to = to_axis.1;
        let flat_rows = rows.len() / n_to;
        {
            let flat = rows.as_slice_mut().expect("kernel rows are contiguous");
            for r in 0..flat_rows {
                let row = &mut flat[r * n_to..(r + 1) * n_to];
                if let Some(j) = row.iter().position(|&v| v < 0.0 || !v.is_finite()) {
                    return Err(Error::InvalidDistribution(format!(
                        "kernel row {r} entry {j} is {}",
                        row[j]
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > tol {
                    return Err(Error::InvalidDistribution(format!(
                        "kernel row {r} sums to {sum}, expected 1 within {tol:e}"
                    )));
                }
                for v in row.iter_mut() {
                    *v /= sum;
                }
            }
        }
        Ok(Self {
            from_axes: from_axes.into_iter().map(|(n, s)| (n.to_string(), s)).collect(),
            to_axis: (to_axis.0.to_string(), to_axis.1),
            rows,
        })
    }

    pub fn from_axes(&self) -> &[(String, usize)] {
        &self.from_axes
    }

    pub fn to_axis(&self) -> (&str, usize) {
        (&self.to_axis.0, self.to_axis.1)
    }

    pub fn rows(&self) -> &ArrayD<f64> {
        &self.rows
    }

    pub fn prob(&self, from: &[usize], to: usize) -> f64 {
        let mut idx = from.to_vec();
        idx.push(to);
        self.rows[IxDyn(&idx)]
    }
}

/// A validated symmetric positive-semidefinite covariance matrix.
#[derive(Debug, Clone)]
pub struct CovMatrix {
    m: DMatrix<f64>,
}

impl CovMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::SizeMismatch(format!(
                "covariance matrix is {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().fold(1.0_f64, |a, &v| a.max(v.abs()));
        for i in 0..m.nrows() {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidDistribution(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let eig = m.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| l < -1e-10 * scale.max(1.0)) {
            return Err(Error::InvalidDistribution(format!(
                "matrix not PSD, min eigenvalue {}",
                eig.eigenvalues.min()
            )));
        }
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }
}

/// Differential entropies can be genuinely degenerate (a variable fully
/// determined by the conditioning set). That case is kept symbolic so
/// downstream minimizations can treat the constraint explicitly instead of
/// propagating floating-point infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffEntropy {
    Finite(f64),
    Degenerate,
}

impl DiffEntropy {
    pub fn finite(self) -> Option<f64> {
        match self {
            DiffEntropy::Finite(v) => Some(v),
            DiffEntropy::Degenerate => None,
        }
    }
}

/// Conditional covariance of `target` given `given`, by Schur complement
/// with a pseudo-inverse on the conditioning block.
pub(crate) fn schur_complement(m: &DMatrix<f64>, target: &[usize], given: &[usize]) -> DMatrix<f64> {
    let tt = m.select_rows(target).select_columns(target);
    if given.is_empty() {
        return tt;
    }
    let tg = m.select_rows(target).select_columns(given);
    let gg = m.select_rows(given).select_columns(given);
    let gg_pinv = gg.pseudo_inverse(1e-12).expect("pseudo-inverse of PSD block");
    &tt - &tg * gg_pinv * tg.transpose()
}

/// Differential entropy h(target | given) in bits for a jointly Gaussian
/// vector with the given covariance: (1/2) log2((2*pi*e)^k det S) where S is
/// the Schur complement.
pub fn gaussian_cond_entropy(cov: &CovMatrix, target: &[usize], given: &[usize]) -> Result<DiffEntropy> {
    let dim = cov.dim();
    for &i in target.iter().chain(given) {
        if i >= dim {
            return Err(Error::Argument(format!("index {i} out of range for {dim}x{dim} matrix")));
        }
    }
    if target.iter().any(|i| given.contains(i)) {
        return Err(Error::Argument("target and given overlap".into()));
    }
    let s = schur_complement(cov.matrix(), target, given);
    let det = s.determinant();
    if det <= 1e-12 {
        return Ok(DiffEntropy::Degenerate);
    }
    let k = target.len() as f64;
    Ok(DiffEntropy::Finite(0.5 * (k * LOG2_2PIE + det.log2())))
}

/// Standard normal density with variance `v`.
#[inline]
fn normal_pdf(x: f64, v: f64) -> f64 {
    (-(x * x) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Differential entropy (bits) of a zero-mean scalar Gaussian mixture
/// `sum_k w_k N(0, v_k)`, by adaptive Simpson quadrature over +/- 8 standard
/// deviations of the widest component, absolute tolerance 1e-7 bits.
pub fn mixture_output_entropy(variances: &[f64], weights: &ProbVector) -> Result<f64> {
    if variances.len() != weights.len() {
        return Err(Error::SizeMismatch(format!(
            "{} variances vs {} weights",
            variances.len(),
            weights.len()
        )));
    }
    if let Some(&v) = variances.iter().find(|&&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::Domain(format!("nonpositive mixture variance {v}")));
    }
    let w = weights.entries();
    let density = |x: f64| -> f64 {
        variances
            .iter()
            .zip(w)
            .map(|(&v, &wk)| wk * normal_pdf(x, v))
            .sum()
    };
    let integrand = |x: f64| -> f64 {
        let fx = density(x);
        -xlog2x(fx)
    };
    let sigma_max = variances.iter().cloned().fold(0.0_f64, f64::max).sqrt();
    let (a, b) = (-8.0 * sigma_max, 8.0 * sigma_max);
    // Split the range so narrow components are not stepped over.
    let mut total = 0.0;
    let pieces = 16usize;
    let h = (b - a) / pieces as f64;
    for i in 0..pieces {
        let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
        let (fa, fb) = (integrand(lo), integrand(hi));
        let fm = integrand(0.5 * (lo + hi));
        let whole = simpson(lo, hi, fa, fm, fb);
        total += adaptive_simpson(
            &integrand,
            lo,
            hi,
            fa,
            fm,
            fb,
            whole,
            1e-7 / pieces as f64,
            40,
        );
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::ArrayD;

    fn joint(axes: Vec<(&str, usize)>, vals: Vec<f64>) -> JointDist {
        let shape: Vec<usize> = axes.iter().map(|&(_, s)| s).collect();
        JointDist::new(axes, ArrayD::from_shape_vec(IxDyn(&shape), vals).unwrap()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let h = |v: Vec<f64>| entropy(&ProbVector::new(v).unwrap());
        assert_abs_diff_eq!(h(vec![0.5, 0.5]), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h(vec![1.0, 0.0]), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h(vec![1.0 / 3.0; 3]), 3f64.log2(), epsilon = 1e-12);
    }

    #[test]
    fn entropy_rejects_bad_distributions() {
        assert!(ProbVector::new(vec![0.5, 0.4]).is_err());
        assert!(ProbVector::new(vec![1.2, -0.2]).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_abs_diff_eq!(binary_entropy(0.5).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(binary_entropy(0.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            binary_entropy(1.0 / 3.0).unwrap(),
            0.9182958340544896,
            epsilon = 1e-12
        );
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn mutual_info_independent_bits() {
        let d = joint(vec![("x1", 2), ("x2", 2)], vec![0.25; 4]);
        assert_abs_diff_eq!(d.mutual_info(&["x1"], &["x2"]).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mutual_info_dsbs_third() {
        // doubly symmetric binary source, crossover 1/3
        let p = 1.0 / 3.0;
        let d = joint(
            vec![("x1", 2), ("x2", 2)],
            vec![(1.0 - p) / 2.0, p / 2.0, p / 2.0, (1.0 - p) / 2.0],
        );
        let expect = 1.0 - binary_entropy(p).unwrap();
        assert_abs_diff_eq!(d.mutual_info(&["x1"], &["x2"]).unwrap(), expect, epsilon = 1e-12);
        assert_abs_diff_eq!(expect, 0.08170416594551044, epsilon = 1e-12);
    }

    #[test]
    fn mutual_info_adder_output() {
        // independent uniform inputs through y = x1 + x2
        let mut vals = vec![0.0; 12];
        for x1 in 0..2 {
            for x2 in 0..2 {
                vals[(x1 * 2 + x2) * 3 + (x1 + x2)] = 0.25;
            }
        }
        let d = joint(vec![("x1", 2), ("x2", 2), ("y", 3)], vals);
        assert_abs_diff_eq!(d.mutual_info(&["x1", "x2"], &["y"]).unwrap(), 1.5, epsilon = 1e-12);
        // vacuous conditioning
        assert_abs_diff_eq!(
            d.cond_mutual_info(&["x2"], &["y"], &["x1"]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mutual_info_rejects_overlap() {
        let d = joint(vec![("x1", 2), ("x2", 2)], vec![0.25; 4]);
        assert!(d.mutual_info(&["x1"], &["x1"]).is_err());
        assert!(d.cond_mutual_info(&["x1"], &["x2"], &["x1"]).is_err());
    }

    #[test]
    fn gaussian_entropy_unit_variance() {
        let cov = CovMatrix::new(DMatrix::identity(1, 1)).unwrap();
        let h = gaussian_cond_entropy(&cov, &[0], &[]).unwrap().finite().unwrap();
        assert_abs_diff_eq!(h, 2.047095585180641, epsilon = 1e-9);
    }

    #[test]
    fn gaussian_entropy_degenerate() {
        // X given X is degenerate
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let cov = CovMatrix::new(m).unwrap();
        assert_eq!(
            gaussian_cond_entropy(&cov, &[0], &[1]).unwrap(),
            DiffEntropy::Degenerate
        );
    }

    #[test]
    fn gaussian_entropy_sum_channel() {
        // Y = X1 + X2 + Z, unit powers, rho = 0: Var(Y) = 3
        let cov = CovMatrix::new(DMatrix::from_row_slice(1, 1, &[3.0])).unwrap();
        let h = gaussian_cond_entropy(&cov, &[0], &[]).unwrap().finite().unwrap();
        assert_abs_diff_eq!(h, 2.8395768355412192, epsilon = 1e-9);
    }

    #[test]
    fn mixture_entropy_single_component() {
        let h = mixture_output_entropy(&[3.0], &ProbVector::new(vec![1.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(h, 2.8395768355412192, epsilon = 1e-6);
    }

    #[test]
    fn mixture_entropy_identical_components() {
        let h = mixture_output_entropy(&[2.0, 2.0], &ProbVector::new(vec![0.3, 0.7]).unwrap()).unwrap();
        assert_abs_diff_eq!(h, 0.5 * (LOG2_2PIE + 2f64.log2()), epsilon = 1e-6);
    }

    #[test]
    fn mixture_entropy_exceeds_average() {
        let w = ProbVector::new(vec![0.5, 0.5]).unwrap();
        let h = mixture_output_entropy(&[1.0, 9.0], &w).unwrap();
        let avg = 0.5 * (0.5 * LOG2_2PIE) + 0.5 * (0.5 * (LOG2_2PIE + 9f64.log2()));
        assert!(h >= avg, "mixture entropy {h} below average {avg}");
    }

    #[test]
    fn mixture_entropy_rejects_bad_variance() {
        let w = ProbVector::new(vec![1.0]).unwrap();
        assert!(mixture_output_entropy(&[0.0], &w).is_err());
        assert!(mixture_output_entropy(&[-1.0], &w).is_err());
    }
}
