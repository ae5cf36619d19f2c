//! The three restart-based maximisers: complete instruments (for the
//! one-shot distillation lower bound), single filters, and pure channel
//! inputs. All share the simplex minimiser from [`crate::optim`] and a
//! deterministic parallel reduction over restarts.

use super::{OptArgument, OptimizationReport};
use crate::channels::{instrument_coherent_info, Instrument, KrausMap};
use crate::linalg::{self, cr, CMatrix, CVector};
use crate::optim::{nelder_mead, SimplexOptions};
use crate::qcore::DensityOperator;
use crate::sample;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;

/// A bipartite working view of a state: Alice is the first subsystem,
/// everything else is Bob's (flags included).
pub(crate) struct BipartiteView {
    pub m: CMatrix,
    pub da: usize,
    pub db: usize,
}

impl BipartiteView {
    pub fn of(rho: &DensityOperator) -> Result<Self> {
        if rho.dims().len() < 2 {
            return Err(Error::Dimension(
                "need at least two subsystems (Alice first, the rest Bob)".into(),
            ));
        }
        let da = rho.dims()[0];
        let db = rho.dims()[1..].iter().product();
        Ok(BipartiteView { m: rho.matrix().clone(), da, db })
    }
}

/// Unnormalised entropy contribution -sum lambda log2 lambda of a PSD
/// block; small negative eigenvalues from float noise are clipped.
fn entropy_raw(m: &CMatrix) -> f64 {
    linalg::hermitian_eigenvalues(m)
        .into_iter()
        .map(|ev| {
            let p = ev.max(0.0);
            if p > 0.0 {
                -p * p.log2()
            } else {
                0.0
            }
        })
        .sum()
}

/// I(A'>BM) = sum_m [S_raw(Tr_A' sigma_m) - S_raw(sigma_m)] for branches
/// sigma_m = (K_m ⊗ I) rho (K_m ⊗ I)†. Valid because the flagged state is
/// block diagonal over M and the branch weights sum to one.
pub(crate) fn instrument_objective(kraus: &[CMatrix], view: &BipartiteView) -> f64 {
    let mut total = 0.0;
    let id_b = linalg::identity(view.db);
    for k in kraus {
        let big = linalg::kron(k, &id_b);
        let branch = &big * &view.m * big.adjoint();
        let weight = linalg::trace_re(&branch);
        if weight < 1e-14 {
            continue;
        }
        let bob = linalg::partial_trace_raw(&branch, &[k.nrows(), view.db], &[1]);
        total += entropy_raw(&bob) - entropy_raw(&branch);
    }
    total
}

/// Hermitian matrix from a packed real parameter vector (diagonal first,
/// then re/im pairs of the upper triangle).
fn hermitian_from_params(theta: &[f64], d: usize) -> CMatrix {
    let mut h = CMatrix::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = cr(theta[i]);
    }
    let mut idx = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = Complex64::new(theta[idx], theta[idx + 1]);
            idx += 2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// Kraus operators of the instrument encoded by `theta`: the first d_a
/// orthonormal columns of exp(iH) sliced into `outcomes` blocks of d_out
/// rows each. Completeness holds by construction.
fn instrument_kraus_from_params(
    theta: &[f64],
    da: usize,
    d_out: usize,
    outcomes: usize,
) -> Vec<CMatrix> {
    let d = d_out * outcomes;
    let u = linalg::expi_hermitian(&hermitian_from_params(theta, d));
    (0..outcomes)
        .map(|m| CMatrix::from_fn(d_out, da, |a, i| u[(m * d_out + a, i)]))
        .collect()
}

fn complex_from_params(theta: &[f64], rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |r, c| {
        let k = r * cols + c;
        Complex64::new(theta[2 * k], theta[2 * k + 1])
    })
}

struct RestartOutcome {
    value: f64,
    theta: Vec<f64>,
    iterations: usize,
    evals: u64,
    converged: bool,
}

/// Runs `restarts` simplex maximisations of `objective` in parallel with
/// per-restart seeded starts, reduced deterministically (max value, ties
/// to the lowest restart index).
fn run_restarts(
    dim: usize,
    restarts: usize,
    seed: u64,
    opts: &SimplexOptions,
    start: &(impl Fn(usize, &mut rand_chacha::ChaCha8Rng) -> Vec<f64> + Sync),
    objective: &(impl Fn(&[f64]) -> f64 + Sync),
) -> (RestartOutcome, Vec<f64>, Vec<usize>, u64) {
    let outcomes: Vec<RestartOutcome> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = sample::stream_rng(seed, r as u64);
            let x0 = start(r, &mut rng);
            debug_assert_eq!(x0.len(), dim);
            let mut f = |x: &[f64]| -objective(x);
            let res = nelder_mead(&mut f, &x0, opts);
            RestartOutcome {
                value: -res.fx,
                theta: res.x,
                iterations: res.iterations,
                evals: res.evals,
                converged: res.converged,
            }
        })
        .collect();

    let history: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let iterations: Vec<usize> = outcomes.iter().map(|o| o.iterations).collect();
    let evals: u64 = outcomes.iter().map(|o| o.evals).sum();
    let best = outcomes
        .into_iter()
        .enumerate()
        .max_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap().then(b.0.cmp(&a.0)))
        .map(|(_, o)| o)
        .expect("at least one restart");
    (best, history, iterations, evals)
}

/// Maximises I(A'>BM) over complete instruments with the given number of
/// outcomes, parameterized through an isometry A -> A' ⊗ M realized as
/// orthonormal columns of exp(iH). Restart 0 starts at the trivial
/// instrument; the value is therefore never below I(A>B). Every feasible
/// point is a complete instrument, so the result certifies a lower bound
/// on the one-shot quantity.
pub fn d1_lower_bound(
    rho: &DensityOperator,
    outcomes: usize,
    restarts: usize,
    seed: u64,
) -> Result<OptimizationReport> {
    let view = BipartiteView::of(rho)?;
    let da = view.da;
    let d_out = da;
    let outcomes = if outcomes == 0 { da * da } else { outcomes };
    let d = d_out * outcomes;
    let dim = d * d;

    let objective = |theta: &[f64]| {
        let kraus = instrument_kraus_from_params(theta, da, d_out, outcomes);
        instrument_objective(&kraus, &view)
    };
    let start = |r: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        if r == 0 {
            vec![0.0; dim] // exp(0) = I: the trivial instrument
        } else {
            (0..dim).map(|_| 0.8 * sample_normal(rng)).collect()
        }
    };
    let opts = SimplexOptions {
        max_iters: simplex_budget(dim),
        ..Default::default()
    };
    let (best, history, iterations, evals) =
        run_restarts(dim, restarts, seed, &opts, &start, &objective);

    let kraus = instrument_kraus_from_params(&best.theta, da, d_out, outcomes);
    let argument = Instrument::new(
        kraus.into_iter().enumerate().map(|(m, k)| (m.to_string(), k)).collect(),
        da,
        d_out,
    )?;
    argument.require_complete()?;

    let as_bipartite = bipartite_clone(rho, &view);
    let value = instrument_coherent_info(&argument, &as_bipartite)?;
    if (value - best.value).abs() > 1e-9 {
        return Err(Error::ConsistencyCheck(format!(
            "re-evaluated objective {value} differs from search value {}",
            best.value
        )));
    }
    let trivial_value = instrument_coherent_info(&Instrument::trivial(da), &as_bipartite)?;

    Ok(OptimizationReport {
        value,
        trivial_value: Some(trivial_value),
        argument: OptArgument::Instrument(argument),
        restarts: restarts.max(1),
        iterations,
        evals,
        seed,
        converged: best.converged,
        history,
    })
}

/// The state reshaped to exactly two subsystems (Alice, combined Bob).
fn bipartite_clone(rho: &DensityOperator, view: &BipartiteView) -> DensityOperator {
    DensityOperator::trusted(
        view.m.clone(),
        vec![view.da, view.db],
        vec![rho.labels()[0].clone(), "Bob".into()],
    )
}

fn sample_normal(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    use rand::Rng;
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn simplex_budget(dim: usize) -> usize {
    (140 * dim).clamp(1200, 9000)
}

/// I(A'>B) of the renormalised filtered state; filters that annihilate
/// the state are rejected with a large negative score rather than an
/// error.
pub(crate) fn filter_objective(k: &CMatrix, view: &BipartiteView) -> f64 {
    let big = linalg::kron(k, &linalg::identity(view.db));
    let mut omega = &big * &view.m * big.adjoint();
    let t = linalg::trace_re(&omega);
    if t < 1e-12 {
        return -1e6;
    }
    omega /= cr(t);
    let bob = linalg::partial_trace_raw(&omega, &[k.nrows(), view.db], &[1]);
    entropy_raw(&bob) - entropy_raw(&omega)
}

/// Maximises I(A'>B) over single filters K: A -> A' (the completeness-
/// free relaxation). Restart 0 starts at K = I.
pub fn d1_hat(rho: &DensityOperator, restarts: usize, seed: u64) -> Result<OptimizationReport> {
    let view = BipartiteView::of(rho)?;
    let da = view.da;
    let dim = 2 * da * da;

    let objective = |theta: &[f64]| {
        let k = complex_from_params(theta, da, da);
        filter_objective(&k, &view)
    };
    let start = |r: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        if r == 0 {
            identity_params(da)
        } else {
            let g = sample::ginibre(da, da, rng);
            matrix_params(&g)
        }
    };
    let opts = SimplexOptions { max_iters: simplex_budget(dim), ..Default::default() };
    let (best, history, iterations, evals) =
        run_restarts(dim, restarts, seed, &opts, &start, &objective);

    let k = complex_from_params(&best.theta, da, da);
    let value = filter_objective(&k, &view);
    if (value - best.value).abs() > 1e-9 {
        return Err(Error::ConsistencyCheck("filter re-evaluation mismatch".into()));
    }
    Ok(OptimizationReport {
        value,
        trivial_value: Some(filter_objective(&linalg::identity(da), &view)),
        argument: OptArgument::Filter(k),
        restarts: restarts.max(1),
        iterations,
        evals,
        seed,
        converged: best.converged,
        history,
    })
}

fn identity_params(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; 2 * d * d];
    for i in 0..d {
        v[2 * (i * d + i)] = 1.0;
    }
    v
}

fn matrix_params(m: &CMatrix) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            v.push(m[(r, c)].re);
            v.push(m[(r, c)].im);
        }
    }
    v
}

/// I(A'>B) of (id ⊗ N)(|psi><psi|) / Tr(...) for a pure input on the
/// reference ⊗ channel-input space.
pub(crate) fn channel_input_objective(psi: &CVector, n: &KrausMap) -> f64 {
    let da = n.dim_in();
    let dref = psi.len() / da;
    let norm = psi.norm();
    if norm < 1e-12 {
        return -1e6;
    }
    let rho_in = psi * psi.adjoint() / cr(norm * norm);
    // apply N on the second factor
    let id_ref = linalg::identity(dref);
    let mut omega = CMatrix::zeros(dref * n.dim_out(), dref * n.dim_out());
    for k in n.kraus_operators() {
        let big = linalg::kron(&id_ref, k);
        omega += &big * &rho_in * big.adjoint();
    }
    let t = linalg::trace_re(&omega);
    if t < 1e-12 {
        return -1e6;
    }
    omega /= cr(t);
    let bob = linalg::partial_trace_raw(&omega, &[dref, n.dim_out()], &[1]);
    entropy_raw(&bob) - entropy_raw(&omega)
}

/// Maximal coherent information of a CP map: maximises I(A'>B) of the
/// renormalised channel output over pure inputs |psi> on reference ⊗
/// input. Restart r >= 1 draws the same Ginibre matrix as [`d1_hat`]'s
/// restart r, so the two searches explore corresponding points under the
/// pure-state/filter correspondence; restart 0 starts at the maximally
/// entangled input (the image of K = I).
pub fn q1_channel(n: &KrausMap, restarts: usize, seed: u64) -> Result<OptimizationReport> {
    let da = n.dim_in();
    let dref = da;
    let dim = 2 * dref * da;

    let psi_of = |theta: &[f64]| -> CVector {
        // theta encodes K (dref x da, row major); psi[(a', a)] = K[a', a]
        let k = complex_from_params(theta, dref, da);
        CVector::from_fn(dref * da, |i, _| k[(i / da, i % da)])
    };
    let objective = |theta: &[f64]| channel_input_objective(&psi_of(theta), n);
    let start = |r: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        if r == 0 {
            identity_params(da)
        } else {
            let g = sample::ginibre(da, da, rng);
            matrix_params(&g)
        }
    };
    let opts = SimplexOptions { max_iters: simplex_budget(dim), ..Default::default() };
    let (best, history, iterations, evals) =
        run_restarts(dim, restarts, seed, &opts, &start, &objective);

    let psi = psi_of(&best.theta);
    let value = channel_input_objective(&psi, n);
    if (value - best.value).abs() > 1e-9 {
        return Err(Error::ConsistencyCheck("input-state re-evaluation mismatch".into()));
    }
    let normalised = &psi / cr(psi.norm());
    Ok(OptimizationReport {
        value,
        trivial_value: Some(objective(&identity_params(da))),
        argument: OptArgument::InputState(normalised),
        restarts: restarts.max(1),
        iterations,
        evals,
        seed,
        converged: best.converged,
        history,
    })
}
