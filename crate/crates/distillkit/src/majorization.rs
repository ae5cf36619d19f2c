//! Majorization predicates, pinching maps, and the tensor-rearrangement
//! property behind the spin-alignment reductions.

use crate::linalg::{self, cr, CMatrix};
use crate::qcore::{DensityOperator, Spectrum};
use crate::{Error, Result};

/// The predicate x ≺ y: every partial sum of the sorted `y` dominates the
/// corresponding partial sum of the sorted `x` (tolerance 1e-10 per
/// comparison) and the totals agree within 1e-10. Vectors of different
/// lengths are zero-padded.
pub fn majorizes(x: &Spectrum, y: &Spectrum) -> bool {
    let len = x.values().len().max(y.values().len());
    let xs = x.zero_padded(len);
    let ys = y.zero_padded(len);
    let mut sx = 0.0;
    let mut sy = 0.0;
    for k in 0..len {
        sx += xs[k];
        sy += ys[k];
        if k + 1 < len && sx > sy + 1e-10 {
            return false;
        }
    }
    (sx - sy).abs() <= 1e-10
}

/// The diagonal matrix X↓ of eigenvalues in non-increasing order, in the
/// fixed reference (computational) basis.
pub fn down_arrow(x: &CMatrix) -> Result<CMatrix> {
    let defect = linalg::hermiticity_defect(x);
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    let evs = linalg::hermitian_eigenvalues(x);
    let mut out = CMatrix::zeros(x.nrows(), x.ncols());
    for (k, ev) in evs.into_iter().enumerate() {
        out[(k, k)] = cr(ev);
    }
    Ok(out)
}

/// Outcome of the tensor rearrangement comparison: the spectrum of
/// B1⊗C1 + B2⊗C2, the spectrum of the down-arrow-aligned sum, and the
/// majorization predicate between them (which is a theorem and must hold).
#[derive(Debug, Clone)]
pub struct TensorRearrangement {
    pub mixed: Spectrum,
    pub aligned: Spectrum,
    pub majorized: bool,
}

/// Checks lambda(B1⊗C1 + B2⊗C2) ≺ lambda(B1↓⊗C1↓ + B2↓⊗C2↓). All four
/// operators must be PSD (eigenvalues >= -1e-10).
pub fn tensor_rearrangement_check(
    b1: &CMatrix,
    b2: &CMatrix,
    c1: &CMatrix,
    c2: &CMatrix,
) -> Result<TensorRearrangement> {
    for m in [b1, b2, c1, c2] {
        let defect = linalg::hermiticity_defect(m);
        if defect > 1e-10 {
            return Err(Error::NotHermitian(defect));
        }
        if let Some(&bad) = linalg::hermitian_eigenvalues(m)
            .iter()
            .find(|&&v| v < -1e-10)
        {
            return Err(Error::NegativeEigenvalue(bad, 1e-10));
        }
    }
    if b1.nrows() != b2.nrows() || c1.nrows() != c2.nrows() {
        return Err(Error::Dimension(
            "B factors (and C factors) must share dimensions".into(),
        ));
    }
    let mixed_op = linalg::kron(b1, c1) + linalg::kron(b2, c2);
    let aligned_op = linalg::kron(&down_arrow(b1)?, &down_arrow(c1)?)
        + linalg::kron(&down_arrow(b2)?, &down_arrow(c2)?);
    let mixed = Spectrum::from_values(
        linalg::hermitian_eigenvalues(&mixed_op)
            .into_iter()
            .map(|v| v.max(0.0))
            .collect(),
    )?;
    let aligned = Spectrum::from_values(
        linalg::hermitian_eigenvalues(&aligned_op)
            .into_iter()
            .map(|v| v.max(0.0))
            .collect(),
    )?;
    let majorized = majorizes(&mixed, &aligned);
    Ok(TensorRearrangement { mixed, aligned, majorized })
}

/// The pinching map P(rho) = sum_x Pi_x rho Pi_x for mutually orthogonal
/// projectors summing to the identity (within 1e-10).
pub fn pinch(rho: &DensityOperator, projectors: &[CMatrix]) -> Result<DensityOperator> {
    let d = rho.dim();
    if projectors.is_empty() {
        return Err(Error::BadProjectors("empty projector set".into()));
    }
    let mut sum = CMatrix::zeros(d, d);
    for (i, p) in projectors.iter().enumerate() {
        if p.nrows() != d || p.ncols() != d {
            return Err(Error::BadProjectors(format!(
                "projector {i} is {}x{}, state dimension is {d}",
                p.nrows(),
                p.ncols()
            )));
        }
        let idem = linalg::max_abs_diff(&(p * p), p);
        if idem > 1e-10 || linalg::hermiticity_defect(p) > 1e-10 {
            return Err(Error::BadProjectors(format!(
                "operator {i} is not an orthogonal projector (defect {idem:.3e})"
            )));
        }
        for (jj, q) in projectors.iter().enumerate().skip(i + 1) {
            let cross = linalg::frobenius_norm(&(p * q));
            if cross > 1e-10 {
                return Err(Error::BadProjectors(format!(
                    "projectors {i} and {jj} overlap (norm {cross:.3e})"
                )));
            }
        }
        sum += p;
    }
    if linalg::max_abs_diff(&sum, &linalg::identity(d)) > 1e-10 {
        return Err(Error::BadProjectors("projectors do not sum to the identity".into()));
    }
    let mut out = CMatrix::zeros(d, d);
    for p in projectors {
        out += p * rho.matrix() * p;
    }
    Ok(DensityOperator::trusted(
        out,
        rho.dims().to_vec(),
        rho.labels().to_vec(),
    ))
}
