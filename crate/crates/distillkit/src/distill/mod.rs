//! One-way distillation optimisers and closed forms: the instrument
//! lower bound on D1, its filter relaxation, channel coherent
//! information, degradability residuals, information-dominance
//! falsifiers, orthogonal-mixture composition, and the GDS single-letter
//! check.

mod degrade;
mod search;

pub use degrade::{degradability_residual, DegradabilityDirection, DegradabilityReport};
pub use search::{d1_hat, d1_lower_bound, q1_channel};

use crate::channels::{apply_instrument, instrument_coherent_info, Instrument};
use crate::families;
use crate::linalg::{self, cr, CMatrix, CVector};
use crate::qcore::{self, binary_entropy, DensityOperator};
use crate::sample;
use crate::{Error, Result};

/// Best value and argument of a restart-based search, together with the
/// run statistics needed to reproduce it.
#[derive(Debug, Clone)]
pub struct OptimizationReport {
    /// Best objective value (bits). Re-evaluated at `argument` on
    /// construction; the two agree within 1e-9.
    pub value: f64,
    /// Value of the canonical starting point (trivial instrument,
    /// identity filter, or maximally entangled input).
    pub trivial_value: Option<f64>,
    pub argument: OptArgument,
    pub restarts: usize,
    /// Simplex iterations per restart.
    pub iterations: Vec<usize>,
    /// Total objective evaluations across restarts.
    pub evals: u64,
    pub seed: u64,
    pub converged: bool,
    /// Best value per restart.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum OptArgument {
    Instrument(Instrument),
    Filter(CMatrix),
    InputState(CVector),
}

/// The closed-form one-way distillable entanglement of the two-qutrit
/// orthogonal-mixture family: (2/3) max{h(s/2) - h((1+s)/2), 0}.
pub fn eq48_closed_form(s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfRange(format!("s = {s} outside [0, 1]")));
    }
    let value = binary_entropy(s / 2.0)? - binary_entropy((1.0 + s) / 2.0)?;
    Ok((2.0 / 3.0) * value.max(0.0))
}

/// An orthogonally flagged mixture p rho0 + (1-p) rho1 together with the
/// certificate of its block structure: the support projectors on Alice
/// and the flag isometry V with V|_{A_i} = |i>_X ⊗ id.
#[derive(Debug, Clone)]
pub struct OrthogonalMixture {
    pub state: DensityOperator,
    pub p: f64,
    /// Projector onto supp(rho0^A) (resp. rho1^A) inside Alice's space.
    pub support0: CMatrix,
    pub support1: CMatrix,
    /// Isometry A -> X ⊗ A (2 d_A rows) flagging the two blocks.
    pub flag_isometry: CMatrix,
}

/// Builds the mixture and its block certificate. Errors unless the
/// A-marginals have orthogonal supports (overlap below 1e-10 in the
/// Frobenius norm of sqrt(rho0^A) sqrt(rho1^A)).
pub fn orthogonal_mixture(
    rho0: &DensityOperator,
    rho1: &DensityOperator,
    p: f64,
) -> Result<OrthogonalMixture> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability(p));
    }
    if rho0.dims() != rho1.dims() {
        return Err(Error::Dimension("components live on different spaces".into()));
    }
    let a_label = rho0.labels()[0].as_str();
    let a0 = qcore::partial_trace(rho0, &[a_label])?;
    let a1 = qcore::partial_trace(rho1, &[rho1.labels()[0].as_str()])?;
    let overlap =
        linalg::frobenius_norm(&(linalg::psd_sqrt(a0.matrix()) * linalg::psd_sqrt(a1.matrix())));
    if overlap > 1e-10 {
        return Err(Error::NotOrthogonal(overlap));
    }

    let support = |marg: &DensityOperator| -> CMatrix {
        let (evs, vecs) = linalg::hermitian_eigen_sorted(marg.matrix());
        let mut proj = CMatrix::zeros(marg.dim(), marg.dim());
        for (ev, v) in evs.iter().zip(&vecs) {
            if *ev > 1e-10 {
                proj += v * v.adjoint();
            }
        }
        proj
    };
    let support0 = support(&a0);
    let support1 = support(&a1);

    let da = a0.dim();
    let mut v = CMatrix::zeros(2 * da, da);
    for r in 0..da {
        for c in 0..da {
            v[(r, c)] += support0[(r, c)];
            v[(da + r, c)] += support1[(r, c)];
        }
    }

    let mixture = rho0.matrix() * cr(p) + rho1.matrix() * cr(1.0 - p);
    Ok(OrthogonalMixture {
        state: DensityOperator::new(mixture, rho0.dims().to_vec(), rho0.labels().to_vec())?,
        p,
        support0,
        support1,
        flag_isometry: v,
    })
}

impl OrthogonalMixture {
    /// The conditional instrument |0><0| . ⊗ T0 + |1><1| . ⊗ T1: each
    /// outcome of T_i is restricted to the corresponding block, plus a
    /// remainder outcome when the supports do not exhaust Alice's space.
    /// Its coherent information on the mixture is exactly
    /// p . value(T0 on rho0) + (1-p) . value(T1 on rho1).
    pub fn compose_instruments(&self, t0: &Instrument, t1: &Instrument) -> Result<Instrument> {
        let da = self.support0.nrows();
        if t0.dim_in() != da || t1.dim_in() != da || t0.dim_out() != da || t1.dim_out() != da {
            return Err(Error::Dimension(
                "component instruments must act on Alice's space".into(),
            ));
        }
        let mut outcomes = Vec::new();
        for (label, k) in t0.outcomes() {
            outcomes.push((format!("0:{label}"), k * &self.support0));
        }
        for (label, k) in t1.outcomes() {
            outcomes.push((format!("1:{label}"), k * &self.support1));
        }
        let rest = linalg::identity(da) - &self.support0 - &self.support1;
        if linalg::frobenius_norm(&rest) > 1e-10 {
            outcomes.push(("rest".into(), rest));
        }
        let t = Instrument::new(outcomes, da, da)?;
        t.require_complete()?;
        Ok(t)
    }
}

/// Instrument obtained by completing a single filter K: E0 = c K†K
/// scaled so E0 <= I, completed by the rank-one spectral pieces of
/// I - E0. If the filter certifies a positive relaxed value, the
/// completed instrument certifies a positive instrument value.
pub fn complete_filter_to_instrument(k: &CMatrix) -> Result<Instrument> {
    let da = k.ncols();
    let gram = k.adjoint() * k;
    let top = linalg::hermitian_eigenvalues(&gram)[0];
    if top < 1e-14 {
        return Err(Error::ZeroMap);
    }
    let c = 1.0 / top;
    let mut outcomes = vec![("0".to_string(), k * cr(c.sqrt()))];
    let remainder = linalg::identity(da) - &gram * cr(c);
    let (evs, vecs) = linalg::hermitian_eigen_sorted(&remainder);
    for (ev, v) in evs.iter().zip(&vecs) {
        if *ev > 1e-12 {
            let mut kr = CMatrix::zeros(k.nrows(), da);
            let scaled = v * cr(ev.sqrt());
            for r in 0..da.min(k.nrows()) {
                for c_ in 0..da {
                    kr[(r, c_)] += scaled[r] * v[c_].conj();
                }
            }
            outcomes.push((format!("{}", outcomes.len()), kr));
        }
    }
    let t = Instrument::new(outcomes, da, k.nrows())?;
    t.require_complete()?;
    Ok(t)
}

/// Worst information-dominance gap found by a randomized falsifier.
#[derive(Debug, Clone)]
pub struct FalsifyReport {
    /// min over samples of I(.;B) - I(.;E).
    pub worst_gap: f64,
    pub worst_sample: usize,
    pub samples: usize,
    pub seed: u64,
    /// worst_gap < -1e-6: the dominance condition is certified violated.
    pub violation: bool,
}

const FALSIFY_THRESHOLD: f64 = -1e-6;

/// Samples random channels N: A -> A' on Alice of the purified state and
/// reports the minimum of I(A'; B) - I(A'; E). Sample 0 is the identity
/// channel. A gap below -1e-6 certifies the state is not informationally
/// degradable; nonnegative results are evidence only.
pub fn info_degradable_falsify(
    rho: &DensityOperator,
    samples: usize,
    seed: u64,
) -> Result<FalsifyReport> {
    let (rho2, _) = as_bipartite(rho)?;
    let phi = qcore::purify(&rho2).to_density();
    let da = rho2.dims()[0];

    let mut worst_gap = f64::INFINITY;
    let mut worst_sample = 0;
    for s in 0..samples.max(1) {
        let mut rng = sample::stream_rng(seed, s as u64);
        let channel = if s == 0 {
            crate::channels::KrausMap::identity(da)
        } else {
            let d_out = 1 + (s - 1) % (da * da);
            sample::random_channel(da, d_out, da, &mut rng)
        };
        let omega = crate::channels::apply_kraus(&channel, &phi, "A")?.state;
        let gap = qcore::mutual_information(
            &qcore::partial_trace(&omega, &["A", "Bob"])?,
            &["A"],
            &["Bob"],
        )? - qcore::mutual_information(
            &qcore::partial_trace(&omega, &["A", "E"])?,
            &["A"],
            &["E"],
        )?;
        if gap < worst_gap {
            worst_gap = gap;
            worst_sample = s;
        }
    }
    Ok(FalsifyReport {
        worst_gap,
        worst_sample,
        samples: samples.max(1),
        seed,
        violation: worst_gap < FALSIFY_THRESHOLD,
    })
}

/// Samples random complete instruments on A^n and reports the minimum of
/// I(M; B^n) - I(M; E^n). Sample 0 is the trivial instrument (gap 0).
/// The total purified dimension (dA dB dE)^n is guarded by `budget_dim`.
pub fn less_noisy_falsify(
    rho: &DensityOperator,
    n: usize,
    samples: usize,
    seed: u64,
    budget_dim: usize,
) -> Result<FalsifyReport> {
    let (rho2, _) = as_bipartite(rho)?;
    let phi = qcore::purify(&rho2);
    let (da, db, de) = (phi.dims()[0], phi.dims()[1], phi.dims()[2]);
    let total = (da * db * de).pow(n as u32);
    if total > budget_dim {
        return Err(Error::BudgetExceeded { requested: total, budget: budget_dim });
    }

    // n-fold purification with the factors regrouped as (A^n, B^n, E^n).
    let mut amp = phi.amplitudes().clone();
    let mut dims: Vec<usize> = phi.dims().to_vec();
    for _ in 1..n {
        amp = kron_vec(&amp, phi.amplitudes());
        dims.extend_from_slice(phi.dims());
    }
    let dens = &amp * amp.adjoint();
    let mut perm = Vec::new();
    for slot in 0..3 {
        for copy in 0..n {
            perm.push(3 * copy + slot);
        }
    }
    let grouped = linalg::permute_subsystems(&dens, &dims, &perm);
    let dan = da.pow(n as u32);
    let dbn = db.pow(n as u32);
    let den = de.pow(n as u32);
    let state = DensityOperator::trusted(
        grouped,
        vec![dan, dbn, den],
        vec!["A".into(), "Bob".into(), "E".into()],
    );

    let mut worst_gap = f64::INFINITY;
    let mut worst_sample = 0;
    for s in 0..samples.max(1) {
        let mut rng = sample::stream_rng(seed, s as u64);
        let instrument = if s == 0 {
            Instrument::trivial(dan)
        } else {
            let outcomes = 2 + (s - 1) % 3;
            sample::random_complete_instrument(dan, dan, outcomes, &mut rng)
        };
        let applied = apply_instrument(&instrument, &state, "A")?;
        let m_label = applied.state.labels().last().unwrap().clone();
        let gap = qcore::mutual_information(
            &qcore::partial_trace(&applied.state, &[&m_label, "Bob"])?,
            &[&m_label],
            &["Bob"],
        )? - qcore::mutual_information(
            &qcore::partial_trace(&applied.state, &[&m_label, "E"])?,
            &[&m_label],
            &["E"],
        )?;
        if gap < worst_gap {
            worst_gap = gap;
            worst_sample = s;
        }
    }
    Ok(FalsifyReport {
        worst_gap,
        worst_sample,
        samples: samples.max(1),
        seed,
        violation: worst_gap < FALSIFY_THRESHOLD,
    })
}

fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::from_element(a.len() * b.len(), linalg::czero());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Collapses a multipartite state to the (Alice, combined-Bob) view used
/// by the optimizers.
fn as_bipartite(rho: &DensityOperator) -> Result<(DensityOperator, usize)> {
    if rho.dims().len() < 2 {
        return Err(Error::Dimension(
            "need at least two subsystems (Alice first, the rest Bob)".into(),
        ));
    }
    let da = rho.dims()[0];
    let db: usize = rho.dims()[1..].iter().product();
    Ok((
        DensityOperator::trusted(
            rho.matrix().clone(),
            vec![da, db],
            vec!["A".into(), "Bob".into()],
        ),
        da,
    ))
}

/// Result of the GDS single-letter comparison at `n` copies.
#[derive(Debug, Clone)]
pub struct GdsCheckReport {
    pub d0: usize,
    pub d1: usize,
    pub n: usize,
    /// (a): I(A>B) of the degradable filtered state sigma0.
    pub sigma0_coherent_info: f64,
    /// (b): coherent information of the canonical instrument tensor
    /// power on the n-copy GDS state.
    pub canonical_value: f64,
    /// (c): best value of the free instrument search on the n-copy state.
    pub optimizer_value: f64,
    /// |(b) - n (a)| <= 1e-6.
    pub canonical_matches: bool,
    /// (c) <= n (a) + 1e-3.
    pub optimizer_bounded: bool,
}

/// Computes (a) I(A>B)_sigma0, (b) the canonical-instrument value on the
/// n-copy GDS state, and (c) an independent restart search, and checks
/// (b) = n(a) within 1e-6 and (c) <= n(a) + 1e-3.
pub fn gds_single_letter_check(
    d0: usize,
    d1: usize,
    n: usize,
    restarts: usize,
    seed: u64,
    budget_dim: usize,
) -> Result<GdsCheckReport> {
    if n == 0 {
        return Err(Error::OutOfRange("copy count must be >= 1".into()));
    }
    let d = d0 + d1;
    let outcome_count = (d0 * d1).pow(n as u32);
    let omega_dim = d.pow(2 * n as u32) * outcome_count;
    if omega_dim > budget_dim {
        return Err(Error::BudgetExceeded { requested: omega_dim, budget: budget_dim });
    }

    let sigma0 = families::gds_sigma0(d0, d1)?;
    let a = qcore::coherent_information(&sigma0, &["A"], &["B"])?;

    let rho = families::gds_state(d0, d1)?;
    let rho_n = tensor_power_bipartite(&rho, n);
    let canonical = families::gds_instrument(d0, d1)?.tensor_power(n);
    let b = instrument_coherent_info(&canonical, &rho_n)?;

    let free = d1_lower_bound(&rho_n, 2, restarts, seed)?;
    let c = free.value;

    Ok(GdsCheckReport {
        d0,
        d1,
        n,
        sigma0_coherent_info: a,
        canonical_value: b,
        optimizer_value: c,
        canonical_matches: (b - n as f64 * a).abs() <= 1e-6,
        optimizer_bounded: c <= n as f64 * a + 1e-3,
    })
}

/// rho^{⊗n} of a bipartite state, regrouped as (A^n, B^n).
pub fn tensor_power_bipartite(rho: &DensityOperator, n: usize) -> DensityOperator {
    assert_eq!(rho.dims().len(), 2);
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let mut m = rho.matrix().clone();
    let mut dims = vec![da, db];
    for _ in 1..n {
        m = linalg::kron(&m, rho.matrix());
        dims.push(da);
        dims.push(db);
    }
    let mut perm = Vec::new();
    for slot in 0..2 {
        for copy in 0..n {
            perm.push(2 * copy + slot);
        }
    }
    let grouped = linalg::permute_subsystems(&m, &dims, &perm);
    DensityOperator::trusted(
        grouped,
        vec![da.pow(n as u32), db.pow(n as u32)],
        vec!["A".into(), "B".into()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::states;

    fn h(p: f64) -> f64 {
        binary_entropy(p).unwrap()
    }

    #[test]
    fn eq48_values() {
        assert!((eq48_closed_form(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(eq48_closed_form(0.0).unwrap().abs() < 1e-15);
        let v = eq48_closed_form(0.8).unwrap();
        assert!((v - (2.0 / 3.0) * (h(0.4) - h(0.9))).abs() < 1e-12);
        assert!(eq48_closed_form(1.2).is_err());
    }

    #[test]
    fn orthogonal_mixture_accepts_rho_s_blocks() {
        let (useful, junk) = families::rho_s_components(0.7).unwrap();
        let mix = orthogonal_mixture(&useful, &junk, 2.0 / 3.0).unwrap();
        let direct = families::rho_s(0.7).unwrap();
        assert!(linalg::max_abs_diff(mix.state.matrix(), direct.matrix()) < 1e-12);
        // flag isometry is isometric on the joint support
        let v = &mix.flag_isometry;
        let gram = v.adjoint() * v;
        let support = &mix.support0 + &mix.support1;
        assert!(linalg::max_abs_diff(&gram, &support) < 1e-10);
    }

    #[test]
    fn orthogonal_mixture_rejects_overlapping_supports() {
        let mut rng = sample::stream_rng(51, 0);
        let a = sample::random_state(&[2, 2], &["A", "B"], 4, &mut rng);
        let b = sample::random_state(&[2, 2], &["A", "B"], 4, &mut rng);
        assert!(matches!(
            orthogonal_mixture(&a, &b, 0.5),
            Err(Error::NotOrthogonal(_))
        ));
    }

    #[test]
    fn orthogonal_mixture_p_one_is_first_component() {
        let (useful, junk) = families::rho_s_components(0.5).unwrap();
        let mix = orthogonal_mixture(&useful, &junk, 1.0).unwrap();
        assert!(linalg::max_abs_diff(mix.state.matrix(), useful.matrix()) < 1e-12);
    }

    #[test]
    fn completed_filter_is_a_complete_instrument() {
        let mut rng = sample::stream_rng(52, 0);
        for _ in 0..5 {
            let k = sample::ginibre(3, 3, &mut rng);
            let t = complete_filter_to_instrument(&k).unwrap();
            assert!(t.is_complete());
        }
    }

    #[test]
    fn info_degradable_falsifier_flags_antidegradable() {
        let rho = families::ad_choi(0.8).unwrap();
        let report = info_degradable_falsify(&rho, 8, 5).unwrap();
        // the identity sample already exposes I(A;B) < I(A;E)
        assert!(report.violation, "worst gap {}", report.worst_gap);
        assert_eq!(report.worst_sample, 0);
    }

    #[test]
    fn info_degradable_falsifier_passes_degradable() {
        let rho = families::ad_choi(0.2).unwrap();
        let report = info_degradable_falsify(&rho, 30, 5).unwrap();
        assert!(report.worst_gap >= -1e-6, "worst gap {}", report.worst_gap);
        assert!(!report.violation);
    }

    #[test]
    fn less_noisy_falsifier_behaviour() {
        let good = families::ad_choi(0.2).unwrap();
        let report = less_noisy_falsify(&good, 1, 20, 5, 4096).unwrap();
        assert!(report.worst_gap >= -1e-6);

        let bad = families::ad_choi(0.8).unwrap();
        let report = less_noisy_falsify(&bad, 1, 20, 5, 4096).unwrap();
        assert!(report.violation, "worst gap {}", report.worst_gap);

        // trivial instrument alone gives gap exactly zero
        let only_trivial = less_noisy_falsify(&good, 1, 1, 5, 4096).unwrap();
        assert!(only_trivial.worst_gap.abs() < 1e-10);

        assert!(matches!(
            less_noisy_falsify(&good, 4, 2, 5, 512),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn tensor_power_groups_subsystems() {
        let rho = families::ad_choi(0.3).unwrap();
        let two = tensor_power_bipartite(&rho, 2);
        assert_eq!(two.dims(), &[4, 4]);
        assert!((two.trace() - 1.0).abs() < 1e-12);
        let s1 = qcore::von_neumann_entropy(&rho).unwrap();
        let s2 = qcore::von_neumann_entropy(&two).unwrap();
        assert!((s2 - 2.0 * s1).abs() < 1e-10);
        let marg = qcore::partial_trace(&two, &["B"]).unwrap();
        let small = qcore::partial_trace(&rho, &["B"]).unwrap();
        let expect = linalg::kron(small.matrix(), small.matrix());
        assert!(linalg::max_abs_diff(marg.matrix(), &expect) < 1e-10);
    }

    #[test]
    fn d1_lower_bound_on_bell_state() {
        let phi = states::maximally_entangled(2, "A", "B").to_density();
        let report = d1_lower_bound(&phi, 2, 4, 9).unwrap();
        assert!((report.value - 1.0).abs() < 1e-6, "value {}", report.value);
        assert!((report.trivial_value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn d1_hat_on_bell_and_product() {
        let phi = states::maximally_entangled(2, "A", "B").to_density();
        let report = d1_hat(&phi, 4, 9).unwrap();
        assert!((report.value - 1.0).abs() < 1e-6, "value {}", report.value);

        let mut rng = sample::stream_rng(53, 0);
        let a = sample::random_density(2, 2, "A", &mut rng);
        let b = sample::random_density(2, 2, "B", &mut rng);
        let product = qcore::tensor(&a, &b);
        let report = d1_hat(&product, 6, 9).unwrap();
        assert!(report.value.abs() < 1e-6, "value {}", report.value);
    }

    #[test]
    fn q1_identity_channel_is_log_d() {
        let id = crate::channels::KrausMap::identity(3);
        let report = q1_channel(&id, 2, 9).unwrap();
        assert!((report.value - 3.0f64.log2()).abs() < 1e-6, "value {}", report.value);
    }
}
