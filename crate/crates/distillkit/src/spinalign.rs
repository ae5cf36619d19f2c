//! Spin-alignment entropy minimisation: the mixture objective over
//! partially erasing channels, aligned-input construction, randomized
//! falsification searches for the alignment conjecture, and the exact
//! Rényi-2 overlap bounds.
//!
//! Bit-string convention: a branch is indexed by a mask whose bit
//! (n-1-i) is the letter x_i of site i, so site 0 is the most
//! significant bit and the mask reads like the string.


use crate::linalg::{self, cr, CMatrix, CVector};
use crate::qcore::{self, DensityOperator};
use crate::sample;
use crate::{Error, Result, Tolerances};
use num_complex::Complex64;
use rayon::prelude::*;

/// Letter of site `i` in the branch `mask` for `n` sites.
pub fn site_bit(mask: usize, i: usize, n: usize) -> bool {
    (mask >> (n - 1 - i)) & 1 == 1
}

/// One instance of the alignment minimisation: branch weights over
/// {0,1}^n, the fixed states sigma0/sigma1, and an input state for every
/// branch (possibly entangled across sites).
#[derive(Debug, Clone)]
pub struct AlignmentInstance {
    n: usize,
    weights: Vec<f64>,
    sigma0: DensityOperator,
    sigma1: DensityOperator,
    inputs: Vec<DensityOperator>,
}

impl AlignmentInstance {
    pub fn new(
        weights: Vec<f64>,
        sigma0: DensityOperator,
        sigma1: DensityOperator,
        inputs: Vec<DensityOperator>,
    ) -> Result<Self> {
        let branches = weights.len();
        if branches == 0 || branches & (branches - 1) != 0 {
            return Err(Error::Dimension(format!(
                "weight vector length {branches} is not a power of two"
            )));
        }
        let n = branches.trailing_zeros() as usize;
        if inputs.len() != branches {
            return Err(Error::Dimension(format!(
                "{} inputs for {} branches",
                inputs.len(),
                branches
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::BadProbability(total));
        }
        let d0 = sigma0.dim();
        let d1 = sigma1.dim();
        for (mask, input) in inputs.iter().enumerate() {
            let expect: usize = (0..n)
                .map(|i| if site_bit(mask, i, n) { d1 } else { d0 })
                .product();
            if input.dim() != expect {
                return Err(Error::Dimension(format!(
                    "input for branch {mask:b} has dimension {}, expected {expect}",
                    input.dim()
                )));
            }
        }
        Ok(AlignmentInstance { n, weights, sigma0, sigma1, inputs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sigma0(&self) -> &DensityOperator {
        &self.sigma0
    }

    pub fn sigma1(&self) -> &DensityOperator {
        &self.sigma1
    }

    pub fn inputs(&self) -> &[DensityOperator] {
        &self.inputs
    }

    /// Output dimension (d0 d1)^n of the mixture.
    pub fn output_dim(&self) -> usize {
        (self.sigma0.dim() * self.sigma1.dim()).pow(self.n as u32)
    }
}

/// N_x(rho_x) for one branch, on the interleaved output order
/// (B0_1, B1_1, ..., B0_n, B1_n). Semantically this is the tensor product
/// of the partially erasing channels of [`crate::families`]; the direct
/// tensor-and-permute evaluation avoids the Kraus blowup at n = 3.
fn branch_output(
    mask: usize,
    n: usize,
    sigma0: &CMatrix,
    sigma1: &CMatrix,
    d0: usize,
    d1: usize,
    input: &CMatrix,
) -> CMatrix {
    // Free factors first (site order, living inside `input`), then the
    // fixed sigmas (site order); a subsystem permutation interleaves them.
    let mut big = input.clone();
    let mut dims: Vec<usize> = (0..n)
        .map(|i| if site_bit(mask, i, n) { d1 } else { d0 })
        .collect();
    for i in 0..n {
        if site_bit(mask, i, n) {
            big = linalg::kron(&big, sigma0);
            dims.push(d0);
        } else {
            big = linalg::kron(&big, sigma1);
            dims.push(d1);
        }
    }
    let mut perm = Vec::with_capacity(2 * n);
    for i in 0..n {
        if site_bit(mask, i, n) {
            perm.push(n + i); // B0 slot holds the fixed sigma0
            perm.push(i); // B1 slot holds the free factor
        } else {
            perm.push(i);
            perm.push(n + i);
        }
    }
    linalg::permute_subsystems(&big, &dims, &perm)
}

/// The mixture sum_x p_x N_x(rho_x) as a raw matrix.
pub fn mixture_matrix(inst: &AlignmentInstance) -> CMatrix {
    let d0 = inst.sigma0.dim();
    let d1 = inst.sigma1.dim();
    let dim = inst.output_dim();
    let mut mix = CMatrix::zeros(dim, dim);
    for (mask, input) in inst.inputs.iter().enumerate() {
        if inst.weights[mask] == 0.0 {
            continue;
        }
        let out = branch_output(
            mask,
            inst.n,
            inst.sigma0.matrix(),
            inst.sigma1.matrix(),
            d0,
            d1,
            input.matrix(),
        );
        mix += out * cr(inst.weights[mask]);
    }
    mix
}

/// S(sum_x p_x N_x(rho_x)) in bits.
pub fn alignment_objective(inst: &AlignmentInstance) -> Result<f64> {
    linalg::entropy_bits(&mixture_matrix(inst), Tolerances::default().psd)
        .map_err(|ev| Error::NegativeEigenvalue(ev, Tolerances::default().psd))
}

/// Projector onto a deterministically chosen maximal eigenvector of
/// sigma (first under the crate phase convention and tie-break).
pub fn max_eigenvector_projector(sigma: &DensityOperator) -> DensityOperator {
    let (_, vecs) = linalg::hermitian_eigen_sorted(sigma.matrix());
    let v = &vecs[0];
    DensityOperator::trusted(
        v * v.adjoint(),
        sigma.dims().to_vec(),
        sigma.labels().to_vec(),
    )
}

/// Aligned product inputs: for every branch, the tensor product over
/// sites of the maximal-eigenvector projector of the relevant fixed
/// state.
pub fn aligned_inputs(
    sigma0: &DensityOperator,
    sigma1: &DensityOperator,
    n: usize,
) -> Vec<DensityOperator> {
    let tau0 = max_eigenvector_projector(sigma0);
    let tau1 = max_eigenvector_projector(sigma1);
    (0..1usize << n)
        .map(|mask| {
            let mut acc: Option<DensityOperator> = None;
            for i in 0..n {
                let site = if site_bit(mask, i, n) { &tau1 } else { &tau0 };
                let site = site
                    .clone()
                    .relabeled(vec![format!("A{i}")])
                    .expect("single label");
                acc = Some(match acc {
                    None => site,
                    Some(prev) => qcore::tensor(&prev, &site),
                });
            }
            acc.expect("n >= 1")
        })
        .collect()
}

/// Instance with aligned inputs and the given weights.
pub fn aligned_instance(
    sigma0: &DensityOperator,
    sigma1: &DensityOperator,
    n: usize,
    weights: Vec<f64>,
) -> Result<AlignmentInstance> {
    AlignmentInstance::new(
        weights,
        sigma0.clone(),
        sigma1.clone(),
        aligned_inputs(sigma0, sigma1, n),
    )
}

/// Outcome of a randomized alignment search.
#[derive(Debug, Clone)]
pub struct AlignmentSearchReport {
    pub aligned_value: f64,
    pub min_found: f64,
    /// min_found - aligned_value; the alignment statements assert >= 0.
    pub worst_gap: f64,
    pub best_trial: usize,
    pub trials: usize,
    pub seed: u64,
    /// Gap below -1e-6: worth human review (the conjecture is open).
    pub candidate_counterexample: bool,
    /// Pure inputs (one amplitude vector per branch) achieving min_found.
    pub best_inputs: Vec<CVector>,
}

/// Threshold separating float noise from a genuine violation.
pub const COUNTEREXAMPLE_THRESHOLD: f64 = -1e-6;

struct SearchProblem<'a> {
    n: usize,
    weights: &'a [f64],
    sigma0: &'a CMatrix,
    sigma1: &'a CMatrix,
    d0: usize,
    d1: usize,
}

impl SearchProblem<'_> {
    fn branch_dim(&self, mask: usize) -> usize {
        (0..self.n)
            .map(|i| if site_bit(mask, i, self.n) { self.d1 } else { self.d0 })
            .product()
    }

    /// Entropy of the mixture for pure branch inputs given as raw
    /// amplitude vectors (normalised internally).
    fn value(&self, inputs: &[CVector]) -> f64 {
        let dim = (self.d0 * self.d1).pow(self.n as u32);
        let mut mix = CMatrix::zeros(dim, dim);
        for (mask, amp) in inputs.iter().enumerate() {
            if self.weights[mask] == 0.0 {
                continue;
            }
            let norm = amp.norm();
            let normalised = amp / cr(norm);
            let rho = &normalised * normalised.adjoint();
            let out = branch_output(mask, self.n, self.sigma0, self.sigma1, self.d0, self.d1, &rho);
            mix += out * cr(self.weights[mask]);
        }
        linalg::entropy_bits(&mix, 1e-8).unwrap_or(f64::INFINITY)
    }

    /// Alternating single-branch descent with central two-point gradient
    /// estimates and step decay 0.7 on non-improvement.
    fn refine(&self, inputs: &mut Vec<CVector>, iterations: usize) -> f64 {
        let mut best = self.value(inputs);
        let mut step = 0.1;
        let h = 1e-5;
        let active: Vec<usize> = (0..inputs.len())
            .filter(|&m| self.weights[m] > 0.0)
            .collect();
        if active.is_empty() {
            return best;
        }
        for it in 0..iterations {
            let mask = active[it % active.len()];
            let dim = inputs[mask].len();
            let mut grad = vec![0.0; 2 * dim];
            for (c, slot) in grad.iter_mut().enumerate() {
                let bump = |v: &mut CVector, delta: f64| {
                    if c < dim {
                        v[c] += cr(delta);
                    } else {
                        v[c - dim] += Complex64::new(0.0, delta);
                    }
                };
                let mut plus = inputs.clone();
                bump(&mut plus[mask], h);
                let mut minus = inputs.clone();
                bump(&mut minus[mask], -h);
                *slot = (self.value(&plus) - self.value(&minus)) / (2.0 * h);
            }
            let norm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            let mut trial = inputs.clone();
            for c in 0..dim {
                trial[mask][c] -= cr(step * grad[c] / norm);
                trial[mask][c] -= Complex64::new(0.0, step * grad[c + dim] / norm);
            }
            let candidate = self.value(&trial);
            if candidate < best {
                best = candidate;
                *inputs = trial;
            } else {
                step *= 0.7;
            }
        }
        best
    }
}

fn run_search(
    sigma0: &DensityOperator,
    sigma1: &DensityOperator,
    n: usize,
    weights: &[f64],
    trials: usize,
    seed: u64,
    refine_iterations: usize,
) -> Result<AlignmentSearchReport> {
    let aligned = aligned_instance(sigma0, sigma1, n, weights.to_vec())?;
    let aligned_value = alignment_objective(&aligned)?;
    let problem = SearchProblem {
        n,
        weights,
        sigma0: sigma0.matrix(),
        sigma1: sigma1.matrix(),
        d0: sigma0.dim(),
        d1: sigma1.dim(),
    };

    let results: Vec<(f64, Vec<CVector>)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = sample::stream_rng(seed, trial as u64 + 1);
            let mut inputs: Vec<CVector> = (0..1usize << n)
                .map(|mask| sample::random_unit_vector(problem.branch_dim(mask), &mut rng))
                .collect();
            let value = problem.refine(&mut inputs, refine_iterations);
            (value, inputs)
        })
        .collect();

    let (best_trial, (min_found, best_inputs)) = results
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap())
        .unwrap_or((0, (aligned_value, Vec::new())));

    let worst_gap = min_found - aligned_value;
    Ok(AlignmentSearchReport {
        aligned_value,
        min_found,
        worst_gap,
        best_trial,
        trials,
        seed,
        candidate_counterexample: worst_gap < COUNTEREXAMPLE_THRESHOLD,
        best_inputs,
    })
}

/// Randomized check of the n = 1 alignment statement: Haar-sampled pure
/// input pairs, locally refined, compared against the aligned value. The
/// reported worst gap must be >= 0 up to float noise.
pub fn n1_alignment_check(
    sigma0: &DensityOperator,
    sigma1: &DensityOperator,
    p0: f64,
    trials: usize,
    seed: u64,
) -> Result<AlignmentSearchReport> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::BadProbability(p0));
    }
    run_search(sigma0, sigma1, 1, &[p0, 1.0 - p0], trials, seed, 200)
}

/// Counterexample search for the multi-copy alignment conjecture,
/// including inputs entangled across sites. A gap below -1e-6 flags a
/// CANDIDATE for human review; the search asserts nothing.
pub fn conjecture_search(
    sigma0: &DensityOperator,
    sigma1: &DensityOperator,
    n: usize,
    weights: &[f64],
    trials: usize,
    seed: u64,
    budget_dim: usize,
) -> Result<AlignmentSearchReport> {
    if n == 0 || weights.len() != 1usize << n {
        return Err(Error::Dimension(format!(
            "{} weights for n = {n}",
            weights.len()
        )));
    }
    let out_dim = (sigma0.dim() * sigma1.dim()).pow(n as u32);
    if out_dim > budget_dim {
        return Err(Error::BudgetExceeded { requested: out_dim, budget: budget_dim });
    }
    run_search(sigma0, sigma1, n, weights, trials, seed, 200)
}

/// Rényi-2 value of the mixture plus the purity computed both directly
/// and through the pairwise cross-term expansion; the two purities agree
/// as an algebraic identity.
#[derive(Debug, Clone)]
pub struct Renyi2Report {
    pub s2_bits: f64,
    pub purity: f64,
    pub purity_via_cross_terms: f64,
}

pub fn renyi2_objective(inst: &AlignmentInstance) -> Renyi2Report {
    let d0 = inst.sigma0.dim();
    let d1 = inst.sigma1.dim();
    let outputs: Vec<(f64, CMatrix)> = inst
        .inputs
        .iter()
        .enumerate()
        .map(|(mask, input)| {
            (
                inst.weights[mask],
                branch_output(
                    mask,
                    inst.n,
                    inst.sigma0.matrix(),
                    inst.sigma1.matrix(),
                    d0,
                    d1,
                    input.matrix(),
                ),
            )
        })
        .collect();

    let dim = inst.output_dim();
    let mut mix = CMatrix::zeros(dim, dim);
    for (w, out) in &outputs {
        if *w > 0.0 {
            mix += out * cr(*w);
        }
    }
    let purity: f64 = mix.iter().map(|z| z.norm_sqr()).sum();

    let mut cross = 0.0;
    for (wx, ox) in &outputs {
        for (wy, oy) in &outputs {
            if *wx > 0.0 && *wy > 0.0 {
                cross += wx * wy * linalg::hs_inner(ox, oy).re;
            }
        }
    }
    Renyi2Report {
        s2_bits: -purity.log2(),
        purity,
        purity_via_cross_terms: cross,
    }
}

/// The closed-form upper bound on Tr[N_x(rho_x) N_y(rho_y)]:
/// alpha1^N00 alpha0^N11 (lambda0 lambda1)^(N01+N10), from the maximal
/// eigenvalues and purities of the fixed states and the per-site match
/// counts of the two strings.
pub fn renyi2_overlap_bound(
    x: &[bool],
    y: &[bool],
    sigma0: &DensityOperator,
    sigma1: &DensityOperator,
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "strings of lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let lambda0 = linalg::hermitian_eigenvalues(sigma0.matrix())[0];
    let lambda1 = linalg::hermitian_eigenvalues(sigma1.matrix())[0];
    let alpha0: f64 = sigma0.matrix().iter().map(|z| z.norm_sqr()).sum();
    let alpha1: f64 = sigma1.matrix().iter().map(|z| z.norm_sqr()).sum();
    let mut counts = [0usize; 4];
    for (&a, &b) in x.iter().zip(y) {
        counts[((a as usize) << 1) | b as usize] += 1;
    }
    let n00 = counts[0] as i32;
    let n01 = counts[1] as i32;
    let n10 = counts[2] as i32;
    let n11 = counts[3] as i32;
    Ok(alpha1.powi(n00) * alpha0.powi(n11) * (lambda0 * lambda1).powi(n01 + n10))
}

/// Single-site adjoint composition N_a† N_b applied to a PSD operator:
/// (0,0) -> alpha1 X, (1,1) -> alpha0 X, (0,1) -> Tr(sigma1 X) sigma0,
/// (1,0) -> Tr(sigma0 X) sigma1.
pub fn adjoint_composition(
    a: bool,
    b: bool,
    sigma0: &DensityOperator,
    sigma1: &DensityOperator,
    x: &CMatrix,
) -> Result<CMatrix> {
    let d0 = sigma0.dim();
    let d1 = sigma1.dim();
    let expect_in = if b { d1 } else { d0 };
    if x.nrows() != expect_in || x.ncols() != expect_in {
        return Err(Error::Dimension(format!(
            "operator is {}x{} but branch ({}, {}) expects {expect_in}",
            x.nrows(),
            x.ncols(),
            a as u8,
            b as u8
        )));
    }
    let alpha0: f64 = sigma0.matrix().iter().map(|z| z.norm_sqr()).sum();
    let alpha1: f64 = sigma1.matrix().iter().map(|z| z.norm_sqr()).sum();
    Ok(match (a, b) {
        (false, false) => x * cr(alpha1),
        (true, true) => x * cr(alpha0),
        (false, true) => {
            let t = linalg::hs_inner(sigma1.matrix(), x);
            sigma0.matrix() * t
        }
        (true, false) => {
            let t = linalg::hs_inner(sigma0.matrix(), x);
            sigma1.matrix() * t
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::partially_erasing;
    use crate::qcore::states;

    fn qubit_sigmas(a: f64, b: f64) -> (DensityOperator, DensityOperator) {
        let s0 = DensityOperator::new(
            CMatrix::from_diagonal(&CVector::from_vec(vec![cr(a), cr(1.0 - a)])),
            vec![2],
            vec!["S0".into()],
        )
        .unwrap();
        let s1 = DensityOperator::new(
            CMatrix::from_diagonal(&CVector::from_vec(vec![cr(b), cr(1.0 - b)])),
            vec![2],
            vec!["S1".into()],
        )
        .unwrap();
        (s0, s1)
    }

    #[test]
    fn single_branch_objective_is_additive() {
        let (s0, s1) = qubit_sigmas(0.7, 0.6);
        let mut rng = sample::stream_rng(41, 0);
        let rho = sample::random_density(2, 2, "A0", &mut rng);
        let inst = AlignmentInstance::new(
            vec![1.0, 0.0],
            s0.clone(),
            s1.clone(),
            vec![rho.clone(), sample::random_density(2, 2, "A0", &mut rng)],
        )
        .unwrap();
        let value = alignment_objective(&inst).unwrap();
        let expect = qcore::von_neumann_entropy(&rho).unwrap()
            + qcore::von_neumann_entropy(&s1).unwrap();
        assert!((value - expect).abs() < 1e-10);
    }

    #[test]
    fn pure_sigmas_and_aligned_inputs_give_zero_entropy() {
        let s0 = states::basis_projector(2, 0, "S0");
        let s1 = states::basis_projector(2, 0, "S1");
        let inst = aligned_instance(&s0, &s1, 1, vec![0.5, 0.5]).unwrap();
        // both branches produce |00><00|
        assert!(alignment_objective(&inst).unwrap().abs() < 1e-10);
    }

    #[test]
    fn maximally_mixed_sigmas_dense_oracle() {
        // n = 1, p = (1/2, 1/2), qubit sigmas = I/2, aligned rank-one
        // inputs: mixture = (P ⊗ I/2 + I/2 ⊗ P)/2 has spectrum
        // {1/2, 1/4, 1/4, 0} by direct 4x4 eigensolve, entropy 1.5 bits.
        let s0 = states::maximally_mixed(2, "S0");
        let s1 = states::maximally_mixed(2, "S1");
        let inst = aligned_instance(&s0, &s1, 1, vec![0.5, 0.5]).unwrap();
        let value = alignment_objective(&inst).unwrap();
        assert!((value - 1.5).abs() < 1e-10);
    }

    #[test]
    fn branch_output_matches_partially_erasing_kraus_route() {
        let mut rng = sample::stream_rng(42, 0);
        let s0 = sample::random_density(2, 2, "S0", &mut rng);
        let s1 = sample::random_density(3, 2, "S1", &mut rng);
        let n0 = partially_erasing(&s0, &s1, false).unwrap();
        let n1 = partially_erasing(&s0, &s1, true).unwrap();
        // two sites, branch "01": N_0 ⊗ N_1 on a (possibly entangled) input
        let input = sample::random_state(&[2, 3], &["X", "Y"], 4, &mut rng);
        let direct = branch_output(0b01, 2, s0.matrix(), s1.matrix(), 2, 3, input.matrix());
        let via_kraus = n0.tensor(&n1).apply_raw(input.matrix());
        assert!(linalg::max_abs_diff(&direct, &via_kraus) < 1e-12);
    }

    #[test]
    fn aligned_inputs_pick_max_eigenvectors() {
        let (s0, _) = qubit_sigmas(0.7, 0.6);
        let tau = max_eigenvector_projector(&s0);
        assert!((tau.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);

        // degenerate case: deterministic choice under the tie-break
        let flat = states::maximally_mixed(2, "S");
        let tau = max_eigenvector_projector(&flat);
        assert!((tau.trace() - 1.0).abs() < 1e-12);
        let again = max_eigenvector_projector(&flat);
        assert_eq!(
            linalg::max_abs_diff(tau.matrix(), again.matrix()),
            0.0,
            "degenerate pick must be deterministic"
        );

        let (s0, s1) = qubit_sigmas(0.9, 0.8);
        let inputs = aligned_inputs(&s0, &s1, 2);
        assert_eq!(inputs.len(), 4);
        for input in &inputs {
            assert_eq!(input.dim(), 4);
            // product of two rank-one projectors
            let top = input.spectrum().values()[0];
            assert!((top - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn n1_check_on_pure_sigmas() {
        let s0 = states::basis_projector(2, 0, "S0");
        let s1 = states::basis_projector(2, 1, "S1");
        let report = n1_alignment_check(&s0, &s1, 0.5, 4, 7).unwrap();
        assert!(report.worst_gap >= -1e-9);
    }

    #[test]
    fn n1_check_single_branch_gap_zero() {
        let (s0, s1) = qubit_sigmas(0.8, 0.65);
        let report = n1_alignment_check(&s0, &s1, 1.0, 4, 7).unwrap();
        // p0 = 1: every pure input gives S = S(sigma1)
        assert!((report.aligned_value - qcore::von_neumann_entropy(&s1).unwrap()).abs() < 1e-9);
        assert!(report.worst_gap.abs() < 1e-9);
    }

    #[test]
    fn n1_check_mixed_sigmas() {
        let (s0, s1) = qubit_sigmas(0.9, 0.6);
        let report = n1_alignment_check(&s0, &s1, 0.5, 16, 11).unwrap();
        assert!(report.worst_gap >= -1e-9, "gap {}", report.worst_gap);
        assert!(!report.candidate_counterexample);
    }

    #[test]
    fn conjecture_search_budget_guard() {
        let (s0, s1) = qubit_sigmas(0.7, 0.6);
        let err = conjecture_search(&s0, &s1, 4, &[1.0 / 16.0; 16], 2, 1, 64);
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn conjecture_search_concentrated_weight() {
        let (s0, s1) = qubit_sigmas(0.75, 0.6);
        let mut weights = vec![0.0; 4];
        weights[0b01] = 1.0;
        let report = conjecture_search(&s0, &s1, 2, &weights, 8, 3, 4096).unwrap();
        // single branch "01": exact minimum is S(sigma1) + S(sigma0)
        let expect = qcore::von_neumann_entropy(&s1).unwrap()
            + qcore::von_neumann_entropy(&s0).unwrap();
        assert!((report.aligned_value - expect).abs() < 1e-9);
        assert!(report.worst_gap.abs() < 1e-6, "gap {}", report.worst_gap);
    }

    #[test]
    fn renyi2_cross_term_identity() {
        let mut rng = sample::stream_rng(43, 0);
        for _ in 0..5 {
            let s0 = sample::random_density(2, 2, "S0", &mut rng);
            let s1 = sample::random_density(2, 2, "S1", &mut rng);
            let inputs: Vec<DensityOperator> = (0..4)
                .map(|_| sample::random_state(&[2, 2], &["X", "Y"], 3, &mut rng))
                .collect();
            let inst =
                AlignmentInstance::new(vec![0.25; 4], s0.clone(), s1.clone(), inputs).unwrap();
            let report = renyi2_objective(&inst);
            assert!((report.purity - report.purity_via_cross_terms).abs() < 1e-12);
            assert!((report.s2_bits + report.purity.log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn renyi2_single_pure_branch_is_zero() {
        let s0 = states::basis_projector(2, 1, "S0");
        let s1 = states::basis_projector(2, 0, "S1");
        let inst = aligned_instance(&s0, &s1, 1, vec![1.0, 0.0]).unwrap();
        let report = renyi2_objective(&inst);
        assert!(report.s2_bits.abs() < 1e-12);
    }

    #[test]
    fn overlap_bound_special_cases() {
        let mut rng = sample::stream_rng(44, 0);
        let s0 = sample::random_density(2, 2, "S0", &mut rng);
        let s1 = sample::random_density(2, 2, "S1", &mut rng);
        let alpha1: f64 = s1.matrix().iter().map(|z| z.norm_sqr()).sum();
        let n = 3;
        let x = vec![false; n];
        let bound = renyi2_overlap_bound(&x, &x, &s0, &s1).unwrap();
        assert!((bound - alpha1.powi(n as i32)).abs() < 1e-12);

        let l0 = linalg::hermitian_eigenvalues(s0.matrix())[0];
        let l1 = linalg::hermitian_eigenvalues(s1.matrix())[0];
        let bound = renyi2_overlap_bound(&[false], &[true], &s0, &s1).unwrap();
        assert!((bound - l0 * l1).abs() < 1e-12);
    }

    #[test]
    fn overlap_bound_holds_and_is_attained_by_aligned_inputs() {
        let mut rng = sample::stream_rng(45, 0);
        for trial in 0..6 {
            let d = 2 + trial % 2;
            let s0 = sample::random_density(d, d, "S0", &mut rng);
            let s1 = sample::random_density(d, d, "S1", &mut rng);
            let n = 2;
            let aligned = aligned_inputs(&s0, &s1, n);
            for xm in 0..4usize {
                for ym in 0..4usize {
                    let xs: Vec<bool> = (0..n).map(|i| site_bit(xm, i, n)).collect();
                    let ys: Vec<bool> = (0..n).map(|i| site_bit(ym, i, n)).collect();
                    let bound = renyi2_overlap_bound(&xs, &ys, &s0, &s1).unwrap();

                    // random (entangled) inputs never exceed the bound
                    let dims_x: Vec<usize> =
                        xs.iter().map(|&b| if b { s1.dim() } else { s0.dim() }).collect();
                    let dims_y: Vec<usize> =
                        ys.iter().map(|&b| if b { s1.dim() } else { s0.dim() }).collect();
                    let rx = sample::random_state(&dims_x, &["X1", "X2"], 2, &mut rng);
                    let ry = sample::random_state(&dims_y, &["Y1", "Y2"], 2, &mut rng);
                    let ox = branch_output(
                        xm, n, s0.matrix(), s1.matrix(), s0.dim(), s1.dim(), rx.matrix(),
                    );
                    let oy = branch_output(
                        ym, n, s0.matrix(), s1.matrix(), s0.dim(), s1.dim(), ry.matrix(),
                    );
                    let overlap = linalg::hs_inner(&ox, &oy).re;
                    assert!(overlap <= bound + 1e-10);

                    // aligned product inputs attain it
                    let oxa = branch_output(
                        xm, n, s0.matrix(), s1.matrix(), s0.dim(), s1.dim(),
                        aligned[xm].matrix(),
                    );
                    let oya = branch_output(
                        ym, n, s0.matrix(), s1.matrix(), s0.dim(), s1.dim(),
                        aligned[ym].matrix(),
                    );
                    let attained = linalg::hs_inner(&oxa, &oya).re;
                    assert!((attained - bound).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn adjoint_composition_matches_kraus_route() {
        let mut rng = sample::stream_rng(46, 0);
        let s0 = sample::random_density(2, 2, "S0", &mut rng);
        let s1 = sample::random_density(3, 3, "S1", &mut rng);
        let n0 = partially_erasing(&s0, &s1, false).unwrap();
        let n1 = partially_erasing(&s0, &s1, true).unwrap();
        let maps = [&n0, &n1];
        for a in [false, true] {
            for b in [false, true] {
                let din = if b { s1.dim() } else { s0.dim() };
                let g = sample::ginibre(din, din, &mut rng);
                let x = &g * g.adjoint();
                let closed = adjoint_composition(a, b, &s0, &s1, &x).unwrap();
                let via_kraus =
                    maps[a as usize].apply_adjoint_raw(&maps[b as usize].apply_raw(&x));
                assert!(linalg::max_abs_diff(&closed, &via_kraus) < 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_composition_closed_forms() {
        let mut rng = sample::stream_rng(47, 0);
        let s0 = sample::random_density(2, 2, "S0", &mut rng);
        let s1 = sample::random_density(2, 2, "S1", &mut rng);
        let alpha1: f64 = s1.matrix().iter().map(|z| z.norm_sqr()).sum();

        // a = b = 0 with arbitrary X: alpha1 X
        let g = sample::ginibre(2, 2, &mut rng);
        let x = &g * g.adjoint();
        let out = adjoint_composition(false, false, &s0, &s1, &x).unwrap();
        assert!(linalg::max_abs_diff(&out, &(&x * cr(alpha1))) < 1e-12);

        // a = 0, b = 1 with X = sigma1: alpha1 sigma0
        let out = adjoint_composition(false, true, &s0, &s1, s1.matrix()).unwrap();
        assert!(linalg::max_abs_diff(&out, &(s0.matrix() * cr(alpha1))) < 1e-12);

        // a = 1, b = 0 with X = I: Tr(sigma0) sigma1 = sigma1
        let out =
            adjoint_composition(true, false, &s0, &s1, &linalg::identity(2)).unwrap();
        assert!(linalg::max_abs_diff(&out, s1.matrix()) < 1e-12);
    }

    #[test]
    fn mixed_inputs_never_beat_the_aligned_value_at_n1() {
        let mut rng = sample::stream_rng(48, 0);
        let (s0, s1) = qubit_sigmas(0.85, 0.7);
        let aligned = alignment_objective(&aligned_instance(&s0, &s1, 1, vec![0.4, 0.6]).unwrap())
            .unwrap();
        for _ in 0..20 {
            let inputs = vec![
                sample::random_density(2, 2, "A0", &mut rng),
                sample::random_density(2, 2, "A0", &mut rng),
            ];
            let inst =
                AlignmentInstance::new(vec![0.4, 0.6], s0.clone(), s1.clone(), inputs).unwrap();
            assert!(alignment_objective(&inst).unwrap() >= aligned - 1e-9);
        }
    }
}
