//! Degradability residuals: how close (id ⊗ D)(rho_AB) can get to the
//! environment marginal phi_AE over channels D (and the reverse for
//! antidegradability).
//!
//! The objective ||L(J) - target||_F^2 is linear-quadratic in the Choi
//! matrix J of D, and the feasible set {J >= 0, Tr_out J = I} is convex,
//! so the search is a projected-gradient solve plus an alternating-
//! projection polish rather than a generic nonconvex optimisation. The
//! reported map always comes from an exactly trace-preserving Kraus
//! extraction, and the residual is re-evaluated on it.

use crate::channels::KrausMap;
use crate::linalg::{self, cr, CMatrix};
use crate::qcore::{self, DensityOperator};
use crate::sample;
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegradabilityDirection {
    /// Bob simulates the environment: (id ⊗ D^{B->E})(rho_AB) ~ phi_AE.
    Degradable,
    /// The environment simulates Bob: (id ⊗ D^{E->B})(phi_AE) ~ rho_AB.
    Antidegradable,
}

/// Residual report. A residual below 1e-6 is "numerically degradable at
/// desk scale"; it is evidence, not a proof.
#[derive(Debug, Clone)]
pub struct DegradabilityReport {
    /// Frobenius distance of the best (id ⊗ D)(source) to the target,
    /// evaluated on the returned trace-preserving map.
    pub residual: f64,
    pub degrading_map: KrausMap,
    pub direction: DegradabilityDirection,
}

/// Applies id ⊗ D to `source` (bipartite dA x din) where D is given by
/// its Choi matrix J on din ⊗ dout.
fn apply_choi_on_second(
    source: &CMatrix,
    da: usize,
    din: usize,
    dout: usize,
    j: &CMatrix,
) -> CMatrix {
    let mut out = CMatrix::zeros(da * dout, da * dout);
    for a in 0..da {
        for ap in 0..da {
            for e in 0..dout {
                for ep in 0..dout {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..din {
                        for bp in 0..din {
                            acc += source[(a * din + b, ap * din + bp)]
                                * j[(b * dout + e, bp * dout + ep)];
                        }
                    }
                    out[(a * dout + e, ap * dout + ep)] = acc;
                }
            }
        }
    }
    out
}

/// Adjoint of `apply_choi_on_second` in J for fixed source.
fn apply_choi_adjoint(
    source: &CMatrix,
    da: usize,
    din: usize,
    dout: usize,
    y: &CMatrix,
) -> CMatrix {
    let mut out = CMatrix::zeros(din * dout, din * dout);
    for b in 0..din {
        for bp in 0..din {
            for e in 0..dout {
                for ep in 0..dout {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..da {
                        for ap in 0..da {
                            acc += source[(a * din + b, ap * din + bp)].conj()
                                * y[(a * dout + e, ap * dout + ep)];
                        }
                    }
                    out[(b * dout + e, bp * dout + ep)] = acc;
                }
            }
        }
    }
    out
}

fn tp_projection(j: &CMatrix, din: usize, dout: usize) -> CMatrix {
    // orthogonal projection onto {Tr_out J = I_din}
    let tr = linalg::partial_trace_raw(j, &[din, dout], &[0]);
    let correction = (linalg::identity(din) - tr) * cr(1.0 / dout as f64);
    j + linalg::kron(&correction, &linalg::identity(dout))
}

/// Dykstra alternation between the PSD cone and the trace-preserving
/// affine set.
fn project_cptp(j: &CMatrix, din: usize, dout: usize, iters: usize) -> CMatrix {
    let mut x = j.clone();
    let mut p = CMatrix::zeros(j.nrows(), j.ncols());
    let mut q = CMatrix::zeros(j.nrows(), j.ncols());
    for _ in 0..iters {
        let y = linalg::psd_projection(&(&x + &p));
        p = &x + &p - &y;
        let x_next = tp_projection(&(&y + &q), din, dout);
        q = &y + &q - &x_next;
        x = x_next;
    }
    x
}

struct Problem {
    source: CMatrix,
    target: CMatrix,
    da: usize,
    din: usize,
    dout: usize,
}

impl Problem {
    fn residual_sq(&self, j: &CMatrix) -> f64 {
        let delta = apply_choi_on_second(&self.source, self.da, self.din, self.dout, j)
            - &self.target;
        delta.iter().map(|z| z.norm_sqr()).sum()
    }

    fn gradient(&self, j: &CMatrix) -> CMatrix {
        let delta = apply_choi_on_second(&self.source, self.da, self.din, self.dout, j)
            - &self.target;
        let g = apply_choi_adjoint(&self.source, self.da, self.din, self.dout, &delta);
        (&g + g.adjoint()) * cr(1.0)
    }

    fn lipschitz(&self) -> f64 {
        // power iteration on L* L
        let dim = self.din * self.dout;
        let mut v = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            v[(i, i)] = cr(1.0 + 0.01 * i as f64);
        }
        let mut norm = 1.0;
        for _ in 0..40 {
            let w = apply_choi_adjoint(
                &self.source,
                self.da,
                self.din,
                self.dout,
                &apply_choi_on_second(&self.source, self.da, self.din, self.dout, &v),
            );
            norm = linalg::frobenius_norm(&w);
            if norm < 1e-300 {
                return 1.0;
            }
            v = w * cr(1.0 / norm);
        }
        norm.max(1e-12)
    }

    /// Accelerated projected gradient from `j0`.
    fn solve_pgd(&self, j0: &CMatrix, iters: usize) -> CMatrix {
        let eta = 0.9 / self.lipschitz();
        let mut j = project_cptp(j0, self.din, self.dout, 30);
        let mut y = j.clone();
        let mut t = 1.0f64;
        let mut best = j.clone();
        let mut best_val = self.residual_sq(&j);
        for _ in 0..iters {
            let g = self.gradient(&y);
            let j_next = project_cptp(&(&y - &g * cr(2.0 * eta)), self.din, self.dout, 25);
            let val = self.residual_sq(&j_next);
            if val < best_val {
                best_val = val;
                best = j_next.clone();
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let momentum = (t - 1.0) / t_next;
            y = &j_next + (&j_next - &j) * cr(momentum);
            // restart momentum when the objective increases
            if val > 1.5 * best_val {
                y = j_next.clone();
                t = 1.0;
            } else {
                t = t_next;
            }
            j = j_next;
        }
        best
    }

    /// Alternating projections between the PSD cone and the affine set
    /// {L(J) = target, Tr_out J = I}, entered through a least-squares
    /// correction. Converges fast when an exact degrading channel
    /// exists; used as a polish after the gradient phase.
    fn solve_pocs(&self, j0: &CMatrix, affine: &AffineProjector, iters: usize) -> CMatrix {
        let mut j = j0.clone();
        for _ in 0..iters {
            j = affine.project(&j);
            j = linalg::psd_projection(&j);
        }
        j
    }
}

/// Least-squares projector onto the affine constraints
/// (L(J), Tr_out J) = (target, I), built once per problem via SVD.
struct AffineProjector {
    /// Columns indexed by vec(J), rows by vec(L(J)) ++ vec(Tr_out J).
    pinv: CMatrix,
    amat: CMatrix,
    rhs: CMatrix,
    dim: usize,
}

impl AffineProjector {
    fn build(p: &Problem) -> Self {
        let dim = p.din * p.dout;
        let out_dim = p.da * p.dout;
        let rows = out_dim * out_dim + p.din * p.din;
        let cols = dim * dim;
        let mut amat = CMatrix::zeros(rows, cols);
        for be in 0..dim {
            for bpep in 0..dim {
                let col = be * dim + bpep;
                let mut basis = CMatrix::zeros(dim, dim);
                basis[(be, bpep)] = cr(1.0);
                let lj = apply_choi_on_second(&p.source, p.da, p.din, p.dout, &basis);
                for r in 0..out_dim {
                    for c in 0..out_dim {
                        amat[(r * out_dim + c, col)] = lj[(r, c)];
                    }
                }
                let tr = linalg::partial_trace_raw(&basis, &[p.din, p.dout], &[0]);
                for r in 0..p.din {
                    for c in 0..p.din {
                        amat[(out_dim * out_dim + r * p.din + c, col)] = tr[(r, c)];
                    }
                }
            }
        }
        let mut rhs = CMatrix::zeros(rows, 1);
        for r in 0..out_dim {
            for c in 0..out_dim {
                rhs[(r * out_dim + c, 0)] = p.target[(r, c)];
            }
        }
        for r in 0..p.din {
            rhs[(out_dim * out_dim + r * p.din + r, 0)] = cr(1.0);
        }
        let svd = amat.clone().svd(true, true);
        let pinv = svd.pseudo_inverse(1e-10).expect("svd computed with u and v");
        AffineProjector { pinv, amat, rhs, dim }
    }

    fn project(&self, j: &CMatrix) -> CMatrix {
        let mut v = CMatrix::zeros(self.dim * self.dim, 1);
        for r in 0..self.dim {
            for c in 0..self.dim {
                v[(r * self.dim + c, 0)] = j[(r, c)];
            }
        }
        let defect = &self.amat * &v - &self.rhs;
        let correction = &self.pinv * defect;
        let corrected = v - correction;
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(r, c)] = corrected[(r * self.dim + c, 0)];
            }
        }
        // keep the iterate Hermitian
        (&out + out.adjoint()) * cr(0.5)
    }
}

/// Exactly trace-preserving Kraus extraction from an approximately CPTP
/// Choi matrix.
fn kraus_from_choi(j: &CMatrix, din: usize, dout: usize) -> Result<KrausMap> {
    let psd = linalg::psd_projection(j);
    // tiny admixture of the fully depolarizing Choi keeps the Kraus sum
    // invertible for the trace-preserving correction
    let mix = 1e-12;
    let flat = linalg::kron(&linalg::identity(din), &linalg::identity(dout)) * cr(1.0 / dout as f64);
    let psd = psd * cr(1.0 - mix) + flat * cr(mix);
    let (evs, vecs) = linalg::hermitian_eigen_sorted(&psd);
    let mut kraus = Vec::new();
    for (ev, v) in evs.iter().zip(&vecs) {
        if *ev > 1e-14 {
            let w = v * cr(ev.sqrt());
            kraus.push(linalg::unvec_cm(&w, dout, din));
        }
    }
    if kraus.is_empty() {
        return Err(Error::ZeroMap);
    }
    let mut s = CMatrix::zeros(din, din);
    for k in &kraus {
        s += k.adjoint() * k;
    }
    // S^{-1/2} correction
    let (sev, svec) = linalg::hermitian_eigen_sorted(&s);
    let mut s_inv_sqrt = CMatrix::zeros(din, din);
    for (ev, v) in sev.iter().zip(&svec) {
        let scale = if *ev > 1e-14 { 1.0 / ev.sqrt() } else { 0.0 };
        s_inv_sqrt += v * v.adjoint() * cr(scale);
    }
    let corrected: Vec<CMatrix> = kraus.into_iter().map(|k| k * &s_inv_sqrt).collect();
    KrausMap::new(corrected, din, dout)
}

/// Minimises the Frobenius distance between (id ⊗ D)(source) and the
/// target marginal over channels D, in the direction requested. The
/// returned residual is evaluated on the returned (exactly trace-
/// preserving) map; `restarts` scales the gradient-phase effort and adds
/// random initial Choi matrices.
pub fn degradability_residual(
    rho: &DensityOperator,
    direction: DegradabilityDirection,
    restarts: usize,
    seed: u64,
) -> Result<DegradabilityReport> {
    if rho.dims().len() < 2 {
        return Err(Error::Dimension(
            "need at least two subsystems (Alice first, the rest Bob)".into(),
        ));
    }
    let da = rho.dims()[0];
    let db: usize = rho.dims()[1..].iter().product();
    let rho2 = DensityOperator::trusted(
        rho.matrix().clone(),
        vec![da, db],
        vec!["A".into(), "B".into()],
    );
    let phi = qcore::purify(&rho2);
    let de = *phi.dims().last().unwrap();
    let phi_ae = qcore::partial_trace(&phi.to_density(), &["A", "E"])?;

    let (source, target, din, dout) = match direction {
        DegradabilityDirection::Degradable => {
            (rho2.matrix().clone(), phi_ae.matrix().clone(), db, de)
        }
        DegradabilityDirection::Antidegradable => {
            (phi_ae.matrix().clone(), rho2.matrix().clone(), de, db)
        }
    };
    let problem = Problem { source, target, da, din, dout };
    let affine = AffineProjector::build(&problem);

    let flat_choi =
        linalg::kron(&linalg::identity(din), &linalg::identity(dout)) * cr(1.0 / dout as f64);
    let attempts = restarts.clamp(1, 4);
    let mut best: Option<(f64, KrausMap)> = None;
    for attempt in 0..attempts {
        let j0 = if attempt == 0 {
            flat_choi.clone()
        } else {
            let mut rng = sample::stream_rng(seed, attempt as u64);
            let random = sample::random_channel(din, dout, din, &mut rng);
            let mut j = CMatrix::zeros(din * dout, din * dout);
            for k in random.kraus_operators() {
                let v = linalg::vec_cm(k);
                j += &v * v.adjoint();
            }
            j
        };
        let pgd = problem.solve_pgd(&j0, 600);
        let polished = problem.solve_pocs(&pgd, &affine, 400);

        for candidate in [&pgd, &polished] {
            let map = kraus_from_choi(candidate, din, dout)?;
            let mut j_exact = CMatrix::zeros(din * dout, din * dout);
            for k in map.kraus_operators() {
                let v = linalg::vec_cm(k);
                j_exact += &v * v.adjoint();
            }
            let residual = problem.residual_sq(&j_exact).max(0.0).sqrt();
            if best.as_ref().map_or(true, |(r, _)| residual < *r) {
                best = Some((residual, map));
            }
        }
    }
    let (residual, degrading_map) = best.expect("at least one attempt");
    Ok(DegradabilityReport { residual, degrading_map, direction })
}
