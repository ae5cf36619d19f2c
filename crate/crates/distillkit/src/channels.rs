//! Completely positive maps, Choi-Jamiolkowski conversion, complementary
//! channels, and quantum instruments with their isometric extensions.

use crate::linalg::{self, cr, czero, CMatrix, CVector};
use crate::qcore::{self, DensityOperator};
use crate::{Error, Result, Tolerances};

/// Completely positive map given by a finite Kraus list. Trace
/// preservation is detected at construction; general (trace
/// non-increasing or even trace-increasing) CP maps are allowed.
#[derive(Debug, Clone)]
pub struct KrausMap {
    kraus: Vec<CMatrix>,
    dim_in: usize,
    dim_out: usize,
    trace_preserving: bool,
}

impl KrausMap {
    pub fn new(kraus: Vec<CMatrix>, dim_in: usize, dim_out: usize) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Dimension("a Kraus map needs at least one operator".into()));
        }
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::Dimension(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    dim_out,
                    dim_in
                )));
            }
        }
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let defect = linalg::max_abs_diff(&sum, &linalg::identity(dim_in));
        let trace_preserving = defect <= Tolerances::default().hermiticity;
        Ok(KrausMap { kraus, dim_in, dim_out, trace_preserving })
    }

    pub fn identity(dim: usize) -> Self {
        KrausMap {
            kraus: vec![linalg::identity(dim)],
            dim_in: dim,
            dim_out: dim,
            trace_preserving: true,
        }
    }

    pub fn kraus_operators(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// Raw action on a matrix of the map's input dimension.
    pub fn apply_raw(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }

    /// Hilbert-Schmidt adjoint action: sum_k K† X K.
    pub fn apply_adjoint_raw(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * m * k;
        }
        out
    }

    /// Tensor product of two maps (Kraus operators are all pairwise
    /// Kronecker products).
    pub fn tensor(&self, other: &KrausMap) -> KrausMap {
        let kraus: Vec<CMatrix> = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| linalg::kron(a, b)))
            .collect();
        KrausMap::new(kraus, self.dim_in * other.dim_in, self.dim_out * other.dim_out)
            .expect("tensor of valid maps is valid")
    }
}

/// Result of applying a (possibly trace non-preserving) map to a state:
/// the renormalised output together with the pre-normalisation trace.
#[derive(Debug, Clone)]
pub struct KrausApplication {
    pub state: DensityOperator,
    /// Trace of the raw output before renormalisation (1 for channels).
    pub weight: f64,
}

/// Applies `n` to the subsystem labelled `on`, leaving the others
/// untouched. The addressed subsystem is replaced by one of the map's
/// output dimension with the same label.
pub fn apply_kraus(n: &KrausMap, rho: &DensityOperator, on: &str) -> Result<KrausApplication> {
    let pos = rho
        .labels()
        .iter()
        .position(|l| l == on)
        .ok_or_else(|| Error::UnknownLabel(on.into()))?;
    if rho.dims()[pos] != n.dim_in() {
        return Err(Error::Dimension(format!(
            "subsystem `{on}` has dimension {} but the map expects {}",
            rho.dims()[pos],
            n.dim_in()
        )));
    }
    let (raw, new_dims) = apply_on_position(n.kraus_operators(), rho.matrix(), rho.dims(), pos, n.dim_out());
    let weight = linalg::trace_re(&raw);
    if weight < 1e-14 {
        return Err(Error::ZeroMap);
    }
    let state = DensityOperator::trusted(&raw / cr(weight), new_dims, rho.labels().to_vec());
    Ok(KrausApplication { state, weight })
}

/// Shared low-level routine: sum_k (E_k on `pos`) m (...)†, returning the
/// raw output and the updated dims.
pub(crate) fn apply_on_position(
    kraus: &[CMatrix],
    m: &CMatrix,
    dims: &[usize],
    pos: usize,
    dim_out: usize,
) -> (CMatrix, Vec<usize>) {
    // Move the addressed factor to the front, act there, move it back.
    let k = dims.len();
    let mut to_front: Vec<usize> = vec![pos];
    to_front.extend((0..k).filter(|&p| p != pos));
    let fronted = linalg::permute_subsystems(m, dims, &to_front);
    let rest_dim: usize = dims.iter().enumerate().filter(|(p, _)| *p != pos).map(|(_, &d)| d).product();
    let rest_id = linalg::identity(rest_dim);
    let mut out_front = CMatrix::zeros(dim_out * rest_dim, dim_out * rest_dim);
    for e in kraus {
        let big = linalg::kron(e, &rest_id);
        out_front += &big * &fronted * big.adjoint();
    }
    let mut front_dims: Vec<usize> = vec![dim_out];
    front_dims.extend(dims.iter().enumerate().filter(|(p, _)| *p != pos).map(|(_, &d)| d));
    let mut back: Vec<usize> = Vec::with_capacity(k);
    for j in 0..k {
        if j == pos {
            back.push(0);
        } else if j < pos {
            back.push(1 + j);
        } else {
            back.push(j);
        }
    }
    let out = linalg::permute_subsystems(&out_front, &front_dims, &back);
    let mut new_dims = dims.to_vec();
    new_dims[pos] = dim_out;
    (out, new_dims)
}

/// Normalised Choi state of a CP map together with the trace of the
/// unnormalised Choi operator.
#[derive(Debug, Clone)]
pub struct ChoiState {
    pub state: DensityOperator,
    /// Tr(J) of the unnormalised Choi operator (d_in for channels).
    pub choi_trace: f64,
}

/// J = sum_k vec(F_k) vec(F_k)† on A ⊗ B (column-major vec), normalised
/// to unit trace. Errors on the zero map.
pub fn choi_of_map(n: &KrausMap) -> Result<ChoiState> {
    let d = n.dim_in() * n.dim_out();
    let mut j = CMatrix::zeros(d, d);
    for k in n.kraus_operators() {
        let v = linalg::vec_cm(k);
        j += &v * v.adjoint();
    }
    let tr = linalg::trace_re(&j);
    if tr < 1e-14 {
        return Err(Error::ZeroMap);
    }
    let state = DensityOperator::trusted(
        &j / cr(tr),
        vec![n.dim_in(), n.dim_out()],
        vec!["A".into(), "B".into()],
    );
    Ok(ChoiState { state, choi_trace: tr })
}

/// CP map induced by a bipartite state via N(sigma) = d_A Tr_A((sigma^T ⊗
/// I) rho). Kraus operators come from the eigendecomposition of d_A rho
/// under the crate phase convention, with rank cutoff 1e-12.
pub fn map_of_choi(rho: &DensityOperator) -> Result<KrausMap> {
    if rho.dims().len() != 2 {
        return Err(Error::Dimension(format!(
            "Choi state must be bipartite, got {} subsystems",
            rho.dims().len()
        )));
    }
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let scaled = rho.matrix() * cr(da as f64);
    let (evs, vecs) = linalg::hermitian_eigen_sorted(&scaled);
    let cutoff = Tolerances::default().rank_cutoff;
    let mut kraus = Vec::new();
    for (ev, v) in evs.iter().zip(&vecs) {
        if *ev > cutoff {
            let w = v * cr(ev.sqrt());
            kraus.push(linalg::unvec_cm(&w, db, da));
        }
    }
    if kraus.is_empty() {
        return Err(Error::ZeroMap);
    }
    KrausMap::new(kraus, da, db)
}

/// Map to the environment of the Stinespring dilation V|psi> = sum_k
/// E_k|psi> ⊗ |k>; the environment dimension equals the number of Kraus
/// operators.
pub fn complementary_channel(n: &KrausMap) -> Result<KrausMap> {
    if !n.is_trace_preserving() {
        let mut sum = CMatrix::zeros(n.dim_in(), n.dim_in());
        for k in n.kraus_operators() {
            sum += k.adjoint() * k;
        }
        let defect = linalg::max_abs_diff(&sum, &linalg::identity(n.dim_in()));
        return Err(Error::NotTracePreserving(defect));
    }
    let env = n.kraus_operators().len();
    let kraus: Vec<CMatrix> = (0..n.dim_out())
        .map(|j| {
            CMatrix::from_fn(env, n.dim_in(), |k, i| n.kraus_operators()[k][(j, i)])
        })
        .collect();
    KrausMap::new(kraus, n.dim_in(), env)
}

/// Outcome-labelled family of Kraus operators from A to A'.
#[derive(Debug, Clone)]
pub struct Instrument {
    outcomes: Vec<(String, CMatrix)>,
    dim_in: usize,
    dim_out: usize,
    complete: bool,
    completeness_defect: f64,
}

impl Instrument {
    pub fn new(outcomes: Vec<(String, CMatrix)>, dim_in: usize, dim_out: usize) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::Dimension("an instrument needs at least one outcome".into()));
        }
        for (_, k) in &outcomes {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::Dimension(format!(
                    "instrument Kraus operator is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    dim_out,
                    dim_in
                )));
            }
        }
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for (_, k) in &outcomes {
            sum += k.adjoint() * k;
        }
        let defect = linalg::max_abs_diff(&sum, &linalg::identity(dim_in));
        Ok(Instrument {
            outcomes,
            dim_in,
            dim_out,
            complete: defect <= Tolerances::default().hermiticity,
            completeness_defect: defect,
        })
    }

    /// The instrument {I} with a single outcome "0".
    pub fn trivial(dim: usize) -> Self {
        Instrument::new(vec![("0".into(), linalg::identity(dim))], dim, dim)
            .expect("identity instrument is valid")
    }

    pub fn outcomes(&self) -> &[(String, CMatrix)] {
        &self.outcomes
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    pub fn require_complete(&self) -> Result<()> {
        if self.complete {
            Ok(())
        } else {
            Err(Error::IncompleteInstrument(self.completeness_defect))
        }
    }

    /// Tensor product; outcome labels are joined with a comma.
    pub fn tensor(&self, other: &Instrument) -> Instrument {
        let outcomes: Vec<(String, CMatrix)> = self
            .outcomes
            .iter()
            .flat_map(|(la, ka)| {
                other
                    .outcomes
                    .iter()
                    .map(move |(lb, kb)| (format!("{la},{lb}"), linalg::kron(ka, kb)))
            })
            .collect();
        Instrument::new(outcomes, self.dim_in * other.dim_in, self.dim_out * other.dim_out)
            .expect("tensor of valid instruments is valid")
    }

    pub fn tensor_power(&self, n: usize) -> Instrument {
        assert!(n >= 1);
        let mut t = self.clone();
        for _ in 1..n {
            t = t.tensor(self);
        }
        t
    }
}

/// Post-instrument state with the classical register appended, plus the
/// outcome weights lambda_m = Tr[T_m(rho)].
#[derive(Debug, Clone)]
pub struct InstrumentApplication {
    /// State on (... A' at the addressed slot ...) ⊗ M with M the flag
    /// register (fresh label).
    pub state: DensityOperator,
    pub weights: Vec<f64>,
    /// Sum of the weights; 1 for complete instruments, otherwise the Def
    /// II.3 normalisation that has been divided out.
    pub total_weight: f64,
}

/// omega = sum_m (K_m on `on`) rho (...)† ⊗ |m><m|_M. Non-complete
/// instruments are admitted and normalised by the total branch weight.
pub fn apply_instrument(
    t: &Instrument,
    rho: &DensityOperator,
    on: &str,
) -> Result<InstrumentApplication> {
    let pos = rho
        .labels()
        .iter()
        .position(|l| l == on)
        .ok_or_else(|| Error::UnknownLabel(on.into()))?;
    if rho.dims()[pos] != t.dim_in() {
        return Err(Error::Dimension(format!(
            "subsystem `{on}` has dimension {} but the instrument expects {}",
            rho.dims()[pos],
            t.dim_in()
        )));
    }
    let m_count = t.num_outcomes();
    let branch_dim: usize = {
        let mut dims = rho.dims().to_vec();
        dims[pos] = t.dim_out();
        dims.iter().product()
    };
    let mut full = CMatrix::zeros(branch_dim * m_count, branch_dim * m_count);
    let mut weights = Vec::with_capacity(m_count);
    let mut new_dims = Vec::new();
    for (m, (_, k)) in t.outcomes().iter().enumerate() {
        let (branch, dims) = apply_on_position(std::slice::from_ref(k), rho.matrix(), rho.dims(), pos, t.dim_out());
        weights.push(linalg::trace_re(&branch));
        new_dims = dims;
        for r in 0..branch_dim {
            for c in 0..branch_dim {
                full[(r * m_count + m, c * m_count + m)] = branch[(r, c)];
            }
        }
    }
    let total_weight: f64 = weights.iter().sum();
    if total_weight < 1e-14 {
        return Err(Error::ZeroMap);
    }
    full /= cr(total_weight);
    new_dims.push(m_count);
    let mut labels = rho.labels().to_vec();
    labels.push(rho.fresh_label("M"));
    Ok(InstrumentApplication {
        state: DensityOperator::trusted(full, new_dims, labels),
        weights,
        total_weight,
    })
}

/// Isometric extension V = sum_m K_m ⊗ |m>_M ⊗ |m>_N of a complete
/// instrument, a matrix from A to A' ⊗ M ⊗ N (factors in that order).
pub fn instrument_isometry(t: &Instrument) -> Result<CMatrix> {
    t.require_complete()?;
    let m_count = t.num_outcomes();
    let rows = t.dim_out() * m_count * m_count;
    let mut v = CMatrix::zeros(rows, t.dim_in());
    for (m, (_, k)) in t.outcomes().iter().enumerate() {
        for a in 0..t.dim_out() {
            let row = (a * m_count + m) * m_count + m;
            for i in 0..t.dim_in() {
                v[(row, i)] += k[(a, i)];
            }
        }
    }
    let defect = linalg::max_abs_diff(&(v.adjoint() * &v), &linalg::identity(t.dim_in()));
    if defect > 1e-9 {
        return Err(Error::ConsistencyCheck(format!(
            "isometric extension violates V†V = I by {defect:.3e}"
        )));
    }
    Ok(v)
}

/// Applies a rectangular operator to the subsystem at `pos` of a pure
/// state, splitting that factor into the given output dims.
pub(crate) fn apply_operator_to_pure(
    amp: &CVector,
    dims: &[usize],
    pos: usize,
    op: &CMatrix,
    out_dims: &[usize],
) -> (CVector, Vec<usize>) {
    assert_eq!(op.ncols(), dims[pos]);
    assert_eq!(op.nrows(), out_dims.iter().product::<usize>());
    let before: usize = dims[..pos].iter().product();
    let at = dims[pos];
    let after: usize = dims[pos + 1..].iter().product();
    let out_at = op.nrows();
    let mut out = CVector::from_element(before * out_at * after, czero());
    for b in 0..before {
        for o in 0..out_at {
            for a in 0..after {
                let mut acc = czero();
                for i in 0..at {
                    acc += op[(o, i)] * amp[(b * at + i) * after + a];
                }
                out[(b * out_at + o) * after + a] = acc;
            }
        }
    }
    let mut new_dims: Vec<usize> = dims[..pos].to_vec();
    new_dims.extend_from_slice(out_dims);
    new_dims.extend_from_slice(&dims[pos + 1..]);
    (out, new_dims)
}

/// I(A'>BM) of the post-instrument state, where the instrument acts on
/// the first subsystem of `rho` and everything else is Bob's. The value
/// is computed twice: directly on the instrument output, and as S(BM) -
/// S(EM) on the isometrically extended purification; the two must agree
/// within 1e-9. Returns the direct value.
pub fn instrument_coherent_info(t: &Instrument, rho: &DensityOperator) -> Result<f64> {
    t.require_complete()?;
    let a_label = rho.labels()[0].clone();
    let b_labels: Vec<String> = rho.labels()[1..].to_vec();
    if b_labels.is_empty() {
        return Err(Error::Dimension("state must have a Bob subsystem".into()));
    }

    // Direct route on the instrument output.
    let applied = apply_instrument(t, rho, &a_label)?;
    let omega = &applied.state;
    let m_label = omega.labels().last().unwrap().clone();
    let mut bm: Vec<&str> = b_labels.iter().map(|s| s.as_str()).collect();
    bm.push(&m_label);
    let a_ref: Vec<&str> = vec![&a_label];
    let direct = qcore::coherent_information(omega, &a_ref, &bm)?;

    // Lemma II.1 route through the purification and isometric extension.
    // Marginals come straight from the amplitudes; the full density of
    // the extended pure state is never formed.
    let phi = qcore::purify(rho);
    let v = instrument_isometry(t)?;
    let m_count = t.num_outcomes();
    let (amp, dims) = apply_operator_to_pure(
        phi.amplitudes(),
        phi.dims(),
        0,
        &v,
        &[t.dim_out(), m_count, m_count],
    );
    // factor order: A', M, N, B..., E
    let n_b = b_labels.len();
    let e_pos = 3 + n_b;
    let mut bm_positions: Vec<usize> = (3..3 + n_b).collect();
    bm_positions.push(1);
    let rho_bm = linalg::pure_marginal(&amp, &dims, &bm_positions);
    let rho_em = linalg::pure_marginal(&amp, &dims, &[1, e_pos]);
    let psd = Tolerances::default().psd;
    let s_bm = linalg::entropy_bits(&rho_bm, psd)
        .map_err(|ev| Error::NegativeEigenvalue(ev, psd))?;
    let s_em = linalg::entropy_bits(&rho_em, psd)
        .map_err(|ev| Error::NegativeEigenvalue(ev, psd))?;
    let via_purification = s_bm - s_em;

    if (direct - via_purification).abs() > 1e-9 {
        return Err(Error::ConsistencyCheck(format!(
            "coherent-information routes disagree: direct {direct} vs purified {via_purification}"
        )));
    }
    Ok(direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::linalg::{identity, max_abs_diff};
    use crate::qcore::{states, PureStateVector};
    use crate::sample;

    fn ad(gamma: f64) -> KrausMap {
        families::amplitude_damping(gamma).unwrap()
    }

    #[test]
    fn apply_identity_map() {
        let mut rng = sample::stream_rng(2, 0);
        let rho = sample::random_density(2, 2, "A", &mut rng);
        let out = apply_kraus(&KrausMap::identity(2), &rho, "A").unwrap();
        assert!(max_abs_diff(out.state.matrix(), rho.matrix()) < 1e-13);
        assert!((out.weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_damping_sends_everything_to_ground() {
        let mut rng = sample::stream_rng(3, 0);
        let rho = sample::random_density(2, 2, "A", &mut rng);
        let out = apply_kraus(&ad(1.0), &rho, "A").unwrap();
        assert!((out.state.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn damping_of_maximally_mixed() {
        let rho = states::maximally_mixed(2, "A");
        let out = apply_kraus(&ad(0.3), &rho, "A").unwrap();
        assert!((out.state.matrix()[(0, 0)].re - 0.65).abs() < 1e-12);
        assert!((out.state.matrix()[(1, 1)].re - 0.35).abs() < 1e-12);
    }

    #[test]
    fn apply_kraus_respects_other_subsystems() {
        let mut rng = sample::stream_rng(4, 0);
        let rho = sample::random_state(&[2, 3], &["A", "B"], 4, &mut rng);
        let before = qcore::partial_trace(&rho, &["B"]).unwrap();
        let out = apply_kraus(&ad(0.5), &rho, "A").unwrap();
        let after = qcore::partial_trace(&out.state, &["B"]).unwrap();
        assert!(max_abs_diff(before.matrix(), after.matrix()) < 1e-12);
    }

    #[test]
    fn apply_kraus_dimension_mismatch() {
        let rho = states::maximally_mixed(3, "A");
        assert!(apply_kraus(&ad(0.5), &rho, "A").is_err());
    }

    #[test]
    fn choi_of_identity_is_maximally_entangled() {
        let choi = choi_of_map(&KrausMap::identity(2)).unwrap();
        let phi = states::maximally_entangled(2, "A", "B").to_density();
        assert!(max_abs_diff(choi.state.matrix(), phi.matrix()) < 1e-14);
        assert!((choi.choi_trace - 2.0).abs() < 1e-12);
    }

    #[test]
    fn choi_of_fully_depolarizing_is_maximally_mixed() {
        let kraus: Vec<CMatrix> = (0..2)
            .flat_map(|i| {
                (0..2).map(move |j| {
                    let mut m = CMatrix::zeros(2, 2);
                    m[(i, j)] = cr(1.0 / (2.0f64).sqrt());
                    m
                })
            })
            .collect();
        let dep = KrausMap::new(kraus, 2, 2).unwrap();
        let choi = choi_of_map(&dep).unwrap();
        let expect = identity(4) * cr(0.25);
        assert!(max_abs_diff(choi.state.matrix(), &expect) < 1e-14);
    }

    #[test]
    fn map_of_choi_round_trips_on_kraus_action() {
        let mut rng = sample::stream_rng(5, 0);
        for gamma in [0.0, 0.3, 0.8] {
            let n = ad(gamma);
            let choi = choi_of_map(&n).unwrap();
            let back = map_of_choi(&choi.state).unwrap();
            assert!(back.is_trace_preserving());
            for _ in 0..3 {
                let rho = sample::random_density(2, 2, "A", &mut rng);
                let d1 = apply_kraus(&n, &rho, "A").unwrap();
                let d2 = apply_kraus(&back, &rho, "A").unwrap();
                assert!(max_abs_diff(d1.state.matrix(), d2.state.matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn map_of_maximally_entangled_is_identity() {
        let phi = states::maximally_entangled(2, "A", "B").to_density();
        let n = map_of_choi(&phi).unwrap();
        let mut rng = sample::stream_rng(6, 0);
        let rho = sample::random_density(2, 2, "A", &mut rng);
        let out = apply_kraus(&n, &rho, "A").unwrap();
        assert!(max_abs_diff(out.state.matrix(), rho.matrix()) < 1e-10);
    }

    #[test]
    fn map_of_maximally_mixed_depolarizes() {
        let rho = DensityOperator::new(
            identity(4) * cr(0.25),
            vec![2, 2],
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        let n = map_of_choi(&rho).unwrap();
        let mut rng = sample::stream_rng(7, 0);
        let input = sample::random_density(2, 2, "A", &mut rng);
        let out = apply_kraus(&n, &input, "A").unwrap();
        assert!(max_abs_diff(out.state.matrix(), &(identity(2) * cr(0.5))) < 1e-10);
    }

    #[test]
    fn complementary_of_identity_has_flat_environment() {
        let nc = complementary_channel(&KrausMap::identity(3)).unwrap();
        let mut rng = sample::stream_rng(8, 0);
        let rho = sample::random_density(3, 3, "A", &mut rng);
        let out = apply_kraus(&nc, &rho, "A").unwrap();
        // single Kraus operator: the environment is one-dimensional
        assert_eq!(nc.dim_out(), 1);
        assert!(qcore::von_neumann_entropy(&out.state).unwrap().abs() < 1e-12);
    }

    #[test]
    fn amplitude_damping_complement_entropy_matches() {
        // The complement of AD_gamma is AD_{1-gamma} up to an isometry:
        // output entropies agree on arbitrary inputs.
        let mut rng = sample::stream_rng(9, 0);
        let n = ad(0.3);
        let nc = complementary_channel(&n).unwrap();
        let mirror = ad(0.7);
        for _ in 0..4 {
            let rho = sample::random_density(2, 2, "A", &mut rng);
            let s1 = qcore::von_neumann_entropy(&apply_kraus(&nc, &rho, "A").unwrap().state).unwrap();
            let s2 =
                qcore::von_neumann_entropy(&apply_kraus(&mirror, &rho, "A").unwrap().state).unwrap();
            assert!((s1 - s2).abs() < 1e-10);
        }
    }

    #[test]
    fn complementary_rejects_non_channels() {
        let filter = KrausMap::new(vec![linalg::identity(2) * cr(0.5)], 2, 2).unwrap();
        assert!(matches!(
            complementary_channel(&filter),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn complementary_entropy_is_representation_independent() {
        // Remixing the Kraus operators by a unitary changes the dilation
        // but not S(N(rho)) - S(Nc(rho)).
        let mut rng = sample::stream_rng(10, 0);
        let n = ad(0.4);
        let u = sample::haar_unitary(2, &mut rng);
        let remixed: Vec<CMatrix> = (0..2)
            .map(|r| {
                let mut m = CMatrix::zeros(2, 2);
                for (k, e) in n.kraus_operators().iter().enumerate() {
                    m += e * u[(r, k)];
                }
                m
            })
            .collect();
        let n2 = KrausMap::new(remixed, 2, 2).unwrap();
        assert!(n2.is_trace_preserving());
        let rho = sample::random_density(2, 2, "A", &mut rng);
        let ic = |map: &KrausMap| {
            let out = qcore::von_neumann_entropy(&apply_kraus(map, &rho, "A").unwrap().state).unwrap();
            let comp = complementary_channel(map).unwrap();
            let env =
                qcore::von_neumann_entropy(&apply_kraus(&comp, &rho, "A").unwrap().state).unwrap();
            out - env
        };
        assert!((ic(&n) - ic(&n2)).abs() < 1e-10);
    }

    #[test]
    fn trivial_instrument_appends_flag() {
        let mut rng = sample::stream_rng(11, 0);
        let rho = sample::random_state(&[2, 2], &["A", "B"], 3, &mut rng);
        let out = apply_instrument(&Instrument::trivial(2), &rho, "A").unwrap();
        assert_eq!(out.state.dims(), &[2, 2, 1]);
        assert!((out.total_weight - 1.0).abs() < 1e-12);
        let reduced = qcore::partial_trace(&out.state, &["A", "B"]).unwrap();
        assert!(max_abs_diff(reduced.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn projective_instrument_on_mixed_state() {
        let p0 = {
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 0)] = cr(1.0);
            m
        };
        let p1 = {
            let mut m = CMatrix::zeros(2, 2);
            m[(1, 1)] = cr(1.0);
            m
        };
        let t = Instrument::new(vec![("0".into(), p0), ("1".into(), p1)], 2, 2).unwrap();
        assert!(t.is_complete());
        let rho = states::maximally_mixed(2, "A");
        let out = apply_instrument(&t, &rho, "A").unwrap();
        assert!((out.weights[0] - 0.5).abs() < 1e-12);
        assert!((out.weights[1] - 0.5).abs() < 1e-12);
        // dephased mixture with a perfectly correlated flag: entropy 1 bit
        assert!((qcore::von_neumann_entropy(&out.state).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn isometry_extension_is_isometric() {
        let t = Instrument::trivial(2);
        let v = instrument_isometry(&t).unwrap();
        assert!(max_abs_diff(&(v.adjoint() * &v), &identity(2)) < 1e-12);

        let mut rng = sample::stream_rng(12, 0);
        let t3 = sample::random_complete_instrument(3, 3, 3, &mut rng);
        let v3 = instrument_isometry(&t3).unwrap();
        assert!(max_abs_diff(&(v3.adjoint() * &v3), &identity(3)) < 1e-10);
    }

    #[test]
    fn isometry_extension_traces_back_to_instrument_output() {
        let mut rng = sample::stream_rng(13, 0);
        let t = sample::random_complete_instrument(2, 2, 2, &mut rng);
        let rho = sample::random_state(&[2, 2], &["A", "B"], 4, &mut rng);
        let direct = apply_instrument(&t, &rho, "A").unwrap().state;

        let v = instrument_isometry(&t).unwrap();
        let phi = qcore::purify(&rho);
        let (amp, dims) = apply_operator_to_pure(phi.amplitudes(), phi.dims(), 0, &v, &[2, 2, 2]);
        let labels: Vec<String> =
            vec!["A".into(), "M".into(), "N".into(), "B".into(), "E".into()];
        let big = PureStateVector::trusted(amp, dims, labels).to_density();
        let reduced = qcore::partial_trace(&big, &["A", "M", "B"]).unwrap();
        // reorder direct (A, B, M) to match (A, M, B)
        let perm = linalg::permute_subsystems(direct.matrix(), direct.dims(), &[0, 2, 1]);
        assert!(max_abs_diff(reduced.matrix(), &perm) < 1e-10);
    }

    #[test]
    fn incomplete_instrument_is_flagged_and_rejected() {
        let half = linalg::identity(2) * cr(0.5);
        let t = Instrument::new(vec![("0".into(), half)], 2, 2).unwrap();
        assert!(!t.is_complete());
        assert!(matches!(
            instrument_isometry(&t),
            Err(Error::IncompleteInstrument(_))
        ));
        let rho = states::maximally_mixed(2, "A");
        // apply_instrument admits it and renormalises
        let out = apply_instrument(&t, &rho, "A").unwrap();
        assert!((out.total_weight - 0.25).abs() < 1e-12);
        assert!((out.state.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_info_trivial_instrument_on_degradable_choi() {
        let rho = families::ad_choi(0.2).unwrap();
        let val = instrument_coherent_info(&Instrument::trivial(2), &rho).unwrap();
        let h = |p: f64| qcore::binary_entropy(p).unwrap();
        assert!((val - (h(0.4) - h(0.1))).abs() < 1e-10);
    }

    #[test]
    fn coherent_info_trivial_on_maximally_entangled() {
        let phi = states::maximally_entangled(2, "A", "B").to_density();
        let val = instrument_coherent_info(&Instrument::trivial(2), &phi).unwrap();
        assert!((val - 1.0).abs() < 1e-10);
    }

    #[test]
    fn measure_and_discard_gives_zero() {
        // Rank-one Kraus |0><a|: every branch is a product state on A'B.
        let mut k0 = CMatrix::zeros(2, 2);
        k0[(0, 0)] = cr(1.0);
        let mut k1 = CMatrix::zeros(2, 2);
        k1[(0, 1)] = cr(1.0);
        let t = Instrument::new(vec![("0".into(), k0), ("1".into(), k1)], 2, 2).unwrap();
        assert!(t.is_complete());
        let phi = states::maximally_entangled(2, "A", "B").to_density();
        let val = instrument_coherent_info(&t, &phi).unwrap();
        assert!(val.abs() < 1e-10);
    }

    #[test]
    fn lemma_ii1_routes_agree_on_random_instruments() {
        let mut rng = sample::stream_rng(14, 0);
        for trial in 0..10 {
            let da = 2 + (trial % 2);
            let rho = sample::random_state(&[da, 2], &["A", "B"], da * 2, &mut rng);
            let t = sample::random_complete_instrument(da, da, 3, &mut rng);
            // instrument_coherent_info errors if the two routes disagree
            instrument_coherent_info(&t, &rho).unwrap();
        }
    }
}
