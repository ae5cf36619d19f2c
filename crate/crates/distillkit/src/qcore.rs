//! Labelled multipartite states and the entropy functionals.
//!
//! A [`DensityOperator`] carries its matrix together with an ordered list
//! of subsystem dimensions and labels; operations address subsystems by
//! label. All entropies are in bits.

use crate::linalg::{self, CMatrix, CVector};
use crate::{Error, Result, Tolerances};
use num_complex::Complex64;

/// PSD unit-trace operator over an ordered list of labelled subsystems.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: CMatrix,
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        Self::with_tolerances(matrix, dims, labels, &Tolerances::default())
    }

    pub fn with_tolerances(
        matrix: CMatrix,
        dims: Vec<usize>,
        labels: Vec<String>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let side: usize = dims.iter().product();
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but dims {:?} require side {}",
                matrix.nrows(),
                matrix.ncols(),
                dims,
                side
            )));
        }
        if labels.len() != dims.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} subsystems",
                labels.len(),
                dims.len()
            )));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Dimension("zero-dimensional subsystem".into()));
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > tol.hermiticity {
            return Err(Error::NotHermitian(defect));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::BadTrace(tr.re, tol.trace));
        }
        let min_ev = linalg::hermitian_eigenvalues(&matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_ev < -tol.psd {
            return Err(Error::NegativeEigenvalue(min_ev, tol.psd));
        }
        Ok(DensityOperator { matrix, dims, labels })
    }

    /// Construction that skips the eigenvalue scan; for internal routines
    /// that produce states by construction (Kraus application of validated
    /// maps, mixing of validated states).
    pub(crate) fn trusted(matrix: CMatrix, dims: Vec<usize>, labels: Vec<String>) -> Self {
        debug_assert_eq!(matrix.nrows(), dims.iter().product::<usize>());
        debug_assert_eq!(dims.len(), labels.len());
        DensityOperator { matrix, dims, labels }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.matrix)
    }

    /// Positions of the subsystems whose label is in `wanted` (original
    /// order). Errors on labels that do not occur.
    pub fn positions_of(&self, wanted: &[&str]) -> Result<Vec<usize>> {
        for w in wanted {
            if !self.labels.iter().any(|l| l == w) {
                return Err(Error::UnknownLabel((*w).into()));
            }
        }
        Ok((0..self.labels.len())
            .filter(|&p| wanted.iter().any(|w| self.labels[p] == *w))
            .collect())
    }

    pub fn relabeled(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} subsystems",
                labels.len(),
                self.dims.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    /// A fresh label not already used by this operator: `base`, then
    /// `base'`, `base''`, ...
    pub fn fresh_label(&self, base: &str) -> String {
        let mut candidate = base.to_string();
        while self.labels.iter().any(|l| *l == candidate) {
            candidate.push('\'');
        }
        candidate
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_values(linalg::hermitian_eigenvalues(&self.matrix))
            .expect("validated state has an admissible spectrum")
    }
}

/// Normalised state vector over labelled subsystems.
#[derive(Debug, Clone)]
pub struct PureStateVector {
    amplitudes: CVector,
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl PureStateVector {
    pub fn new(amplitudes: CVector, dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        Self::with_tolerances(amplitudes, dims, labels, &Tolerances::default())
    }

    pub fn with_tolerances(
        amplitudes: CVector,
        dims: Vec<usize>,
        labels: Vec<String>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let side: usize = dims.iter().product();
        if amplitudes.len() != side {
            return Err(Error::Dimension(format!(
                "vector has {} amplitudes but dims {:?} require {}",
                amplitudes.len(),
                dims,
                side
            )));
        }
        if labels.len() != dims.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} subsystems",
                labels.len(),
                dims.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol.norm {
            return Err(Error::BadNorm(norm, tol.norm));
        }
        Ok(PureStateVector { amplitudes, dims, labels })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// |psi><psi| as a density operator.
    pub fn to_density(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator::trusted(m, self.dims.clone(), self.labels.clone())
    }
}

/// Eigenvalue vector in non-increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts the values non-increasingly; entries below -1e-10 are
    /// rejected.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|&&v| v < -1e-10) {
            return Err(Error::NegativeEigenvalue(bad, 1e-10));
        }
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Spectrum { values })
    }

    pub fn of_hermitian(m: &CMatrix) -> Result<Self> {
        Spectrum::from_values(linalg::hermitian_eigenvalues(m))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn zero_padded(&self, len: usize) -> Vec<f64> {
        let mut v = self.values.clone();
        v.resize(v.len().max(len), 0.0);
        v
    }
}

/// Kronecker product of two states; dims and labels are concatenated.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    let matrix = linalg::kron(a.matrix(), b.matrix());
    let mut dims = a.dims().to_vec();
    dims.extend_from_slice(b.dims());
    let mut labels = a.labels().to_vec();
    labels.extend_from_slice(b.labels());
    DensityOperator::trusted(matrix, dims, labels)
}

/// Marginal on the subsystems whose labels are in `keep`.
pub fn partial_trace(rho: &DensityOperator, keep: &[&str]) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(Error::Dimension("keep set must be nonempty".into()));
    }
    let positions = rho.positions_of(keep)?;
    let matrix = linalg::partial_trace_raw(rho.matrix(), rho.dims(), &positions);
    let dims: Vec<usize> = positions.iter().map(|&p| rho.dims()[p]).collect();
    let labels: Vec<String> = positions.iter().map(|&p| rho.labels()[p].clone()).collect();
    Ok(DensityOperator::trusted(matrix, dims, labels))
}

/// Canonical purification |phi> = sum_i sqrt(lambda_i) |v_i> ⊗ |i>_E with
/// eigenpairs in non-increasing order under the crate phase convention;
/// eigenvalues below the rank cutoff are dropped. The environment gets a
/// fresh label derived from "E".
pub fn purify(rho: &DensityOperator) -> PureStateVector {
    let (evs, vecs) = linalg::hermitian_eigen_sorted(rho.matrix());
    let cutoff = Tolerances::default().rank_cutoff;
    let kept: Vec<(f64, &CVector)> = evs
        .iter()
        .zip(&vecs)
        .filter(|(ev, _)| **ev > cutoff)
        .map(|(ev, v)| (*ev, v))
        .collect();
    let rank = kept.len().max(1);
    let d = rho.dim();
    let mut amp = CVector::zeros(d * rank);
    for (k, (ev, v)) in kept.iter().enumerate() {
        let w = ev.max(0.0).sqrt();
        for i in 0..d {
            amp[i * rank + k] += v[i] * Complex64::new(w, 0.0);
        }
    }
    let norm = amp.norm();
    if norm > 0.0 {
        amp /= Complex64::new(norm, 0.0);
    } else {
        amp[0] = Complex64::new(1.0, 0.0);
    }
    let mut dims = rho.dims().to_vec();
    dims.push(rank);
    let mut labels = rho.labels().to_vec();
    labels.push(rho.fresh_label("E"));
    PureStateVector::trusted(amp, dims, labels)
}

impl PureStateVector {
    pub(crate) fn trusted(amplitudes: CVector, dims: Vec<usize>, labels: Vec<String>) -> Self {
        PureStateVector { amplitudes, dims, labels }
    }

    /// Marginal density operator on the labelled subsystems.
    pub fn marginal(&self, keep: &[&str]) -> Result<DensityOperator> {
        partial_trace(&self.to_density(), keep)
    }
}

/// S(rho) = -sum lambda_i log2 lambda_i with 0 log 0 = 0. Eigenvalues in
/// [-1e-10, 0) are clipped to 0; anything lower is an error.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    linalg::entropy_bits(rho.matrix(), Tolerances::default().psd)
        .map_err(|ev| Error::NegativeEigenvalue(ev, Tolerances::default().psd))
}

/// S2(rho) = -log2 Tr(rho^2).
pub fn renyi2_entropy(rho: &DensityOperator) -> f64 {
    let purity: f64 = rho.matrix().iter().map(|z| z.norm_sqr()).sum();
    -purity.log2()
}

/// I(A>B) = S(B) - S(AB) for the partition (a, b) of the subsystems.
pub fn coherent_information(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<f64> {
    check_partition(rho, a, b)?;
    let s_b = von_neumann_entropy(&partial_trace(rho, b)?)?;
    let s_ab = von_neumann_entropy(rho)?;
    Ok(s_b - s_ab)
}

/// I(A;B) = S(A) + S(B) - S(AB).
pub fn mutual_information(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<f64> {
    check_partition(rho, a, b)?;
    let s_a = von_neumann_entropy(&partial_trace(rho, a)?)?;
    let s_b = von_neumann_entropy(&partial_trace(rho, b)?)?;
    let s_ab = von_neumann_entropy(rho)?;
    Ok(s_a + s_b - s_ab)
}

fn check_partition(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<()> {
    let pa = rho.positions_of(a)?;
    let pb = rho.positions_of(b)?;
    let mut all: Vec<usize> = pa.iter().chain(pb.iter()).cloned().collect();
    all.sort_unstable();
    all.dedup();
    if pa.iter().any(|p| pb.contains(p)) || all.len() != rho.dims().len() {
        let joined: Vec<String> = a.iter().chain(b.iter()).map(|s| s.to_string()).collect();
        return Err(Error::BadPartition(joined));
    }
    Ok(())
}

/// Binary entropy h(p) in bits, with h(0) = h(1) = 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability(p));
    }
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    Ok(h)
}

/// Convenience constructors used across the crate and in tests.
pub mod states {
    use super::*;
    use crate::linalg::{cr, czero};

    /// Computational basis projector |k><k| on one subsystem.
    pub fn basis_projector(dim: usize, k: usize, label: &str) -> DensityOperator {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = cr(1.0);
        DensityOperator::trusted(m, vec![dim], vec![label.into()])
    }

    /// Maximally mixed state on one subsystem.
    pub fn maximally_mixed(dim: usize, label: &str) -> DensityOperator {
        let m = CMatrix::identity(dim, dim) * cr(1.0 / dim as f64);
        DensityOperator::trusted(m, vec![dim], vec![label.into()])
    }

    /// |Phi+> = (1/sqrt d) sum_i |ii> on two d-dimensional subsystems.
    pub fn maximally_entangled(d: usize, label_a: &str, label_b: &str) -> PureStateVector {
        let mut amp = CVector::from_element(d * d, czero());
        for i in 0..d {
            amp[i * d + i] = cr(1.0 / (d as f64).sqrt());
        }
        PureStateVector::trusted(amp, vec![d, d], vec![label_a.into(), label_b.into()])
    }
}
