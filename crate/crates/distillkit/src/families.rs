//! Constructors for the explicit state and channel families under study:
//! amplitude damping and its Choi states, flagged mixtures, the 3x3
//! orthogonal-mixture state rho(s), generalized direct sum (GDS) states,
//! instruments and channels, and the partially erasing channels used by
//! the spin-alignment objective.

use crate::channels::{map_of_choi, Instrument, KrausMap};
use crate::linalg::{self, cr, CMatrix};
use crate::qcore::DensityOperator;
use crate::{Error, Result};

/// Parameters of a generalized direct sum channel: input block dimensions
/// (d0, d1), output block targets (d0p, d1p), and a copy count for the
/// multi-copy checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GdsSpec {
    pub d0: usize,
    pub d1: usize,
    pub d0p: usize,
    pub d1p: usize,
    pub n: usize,
}

impl GdsSpec {
    pub fn new(d0: usize, d1: usize, d0p: usize, d1p: usize) -> Result<Self> {
        if d0 == 0 || d1 == 0 || d0p == 0 || d1p == 0 {
            return Err(Error::OutOfRange("GDS block dimensions must be >= 1".into()));
        }
        Ok(GdsSpec { d0, d1, d0p, d1p, n: 1 })
    }

    pub fn with_copies(mut self, n: usize) -> Self {
        self.n = n.max(1);
        self
    }

    pub fn dim_in(&self) -> usize {
        self.d0 + self.d1
    }

    /// Output block dimensions after the enlargement that makes room for
    /// the transposed off-diagonal blocks.
    pub fn enlarged_blocks(&self) -> (usize, usize) {
        (self.d0p.max(self.d1), self.d1p.max(self.d0))
    }

    pub fn dim_out(&self) -> usize {
        let (b0, b1) = self.enlarged_blocks();
        b0 + b1
    }
}

/// Qubit amplitude damping channel: E0 = |0><0| + sqrt(1-gamma)|1><1|,
/// E1 = sqrt(gamma)|0><1|.
pub fn amplitude_damping(gamma: f64) -> Result<KrausMap> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange(format!("gamma = {gamma} outside [0, 1]")));
    }
    let mut e0 = CMatrix::zeros(2, 2);
    e0[(0, 0)] = cr(1.0);
    e0[(1, 1)] = cr((1.0 - gamma).sqrt());
    let mut e1 = CMatrix::zeros(2, 2);
    e1[(0, 1)] = cr(gamma.sqrt());
    KrausMap::new(vec![e0, e1], 2, 2)
}

/// The 4x4 amplitude damping Choi state in the computational basis
/// {|00>, |01>, |10>, |11>} of RB.
pub fn ad_choi(gamma: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange(format!("gamma = {gamma} outside [0, 1]")));
    }
    let root = (1.0 - gamma).sqrt();
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = cr(0.5);
    m[(0, 3)] = cr(0.5 * root);
    m[(3, 0)] = cr(0.5 * root);
    m[(2, 2)] = cr(0.5 * gamma);
    m[(3, 3)] = cr(0.5 * (1.0 - gamma));
    DensityOperator::new(m, vec![2, 2], vec!["R".into(), "B".into()])
}

/// Flagged mixture p rho(gamma0) ⊗ |0><0|_F + (1-p) rho(gamma1) ⊗
/// |1><1|_F on subsystems R, B, F.
pub fn flagged_ad_choi(p: f64, gamma0: f64, gamma1: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability(p));
    }
    let r0 = ad_choi(gamma0)?;
    let r1 = ad_choi(gamma1)?;
    let mut m = CMatrix::zeros(8, 8);
    for r in 0..4 {
        for c in 0..4 {
            m[(2 * r, 2 * c)] += r0.matrix()[(r, c)] * cr(p);
            m[(2 * r + 1, 2 * c + 1)] += r1.matrix()[(r, c)] * cr(1.0 - p);
        }
    }
    DensityOperator::new(m, vec![2, 2, 2], vec!["R".into(), "B".into(), "F".into()])
}

/// The 9x9 state rho_AB(s) on two qutrits: a Choi-type amplitude-damping
/// block on span{|0>,|1>}_A coupled to B-kets |0> and |2>, mixed with the
/// separable |22><22| component of weight 1/3.
pub fn rho_s(s: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfRange(format!("s = {s} outside [0, 1]")));
    }
    let mut m = CMatrix::zeros(9, 9);
    let t = 1.0 / 3.0;
    let idx = |a: usize, b: usize| a * 3 + b;
    m[(idx(0, 0), idx(0, 0))] = cr(t * s);
    m[(idx(0, 2), idx(0, 2))] = cr(t * (1.0 - s));
    m[(idx(0, 0), idx(1, 2))] = cr(t * s.sqrt());
    m[(idx(1, 2), idx(0, 0))] = cr(t * s.sqrt());
    m[(idx(1, 2), idx(1, 2))] = cr(t);
    m[(idx(2, 2), idx(2, 2))] = cr(t);
    DensityOperator::new(m, vec![3, 3], vec!["A".into(), "B".into()])
}

/// The two orthogonal components of rho_s: the normalised useful block
/// (weight 2/3) and the separable junk |22><22| (weight 1/3), both on the
/// full two-qutrit space.
pub fn rho_s_components(s: f64) -> Result<(DensityOperator, DensityOperator)> {
    let full = rho_s(s)?;
    let mut useful = full.matrix().clone();
    let idx = |a: usize, b: usize| a * 3 + b;
    useful[(idx(2, 2), idx(2, 2))] = cr(0.0);
    useful *= cr(1.5);
    let mut junk = CMatrix::zeros(9, 9);
    junk[(idx(2, 2), idx(2, 2))] = cr(1.0);
    Ok((
        DensityOperator::new(useful, vec![3, 3], vec!["A".into(), "B".into()])?,
        DensityOperator::new(junk, vec![3, 3], vec!["A".into(), "B".into()])?,
    ))
}

/// Basis vectors |psi_ij> = (|i>|j> + |j+d0>|i+d1>)/sqrt(2) of the GDS
/// state, as indices into the (d0+d1)^2-dimensional AB space.
fn gds_pair_indices(d0: usize, d1: usize, i: usize, j: usize) -> (usize, usize) {
    let d = d0 + d1;
    (i * d + j, (j + d0) * d + (i + d1))
}

/// The GDS state (1/(2 d0 d1)) sum_ij (|i>|j> + |j+d0>|i+d1>)(h.c.) on
/// A, B of dimension d0 + d1 each.
pub fn gds_state(d0: usize, d1: usize) -> Result<DensityOperator> {
    if d0 == 0 || d1 == 0 {
        return Err(Error::OutOfRange("block dimensions must be >= 1".into()));
    }
    let d = d0 + d1;
    let mut m = CMatrix::zeros(d * d, d * d);
    let w = cr(1.0 / (2.0 * (d0 * d1) as f64));
    for i in 0..d0 {
        for j in 0..d1 {
            let (u, v) = gds_pair_indices(d0, d1, i, j);
            m[(u, u)] += w;
            m[(u, v)] += w;
            m[(v, u)] += w;
            m[(v, v)] += w;
        }
    }
    DensityOperator::new(m, vec![d, d], vec!["A".into(), "B".into()])
}

/// The filtered state sigma_0 = d0 d1 (K_00 ⊗ I) rho (K_00 ⊗ I)†, written
/// out explicitly: a coherent rank-one piece on {|0,0>, |d0,d1>} plus flat
/// diagonal tails on |0,j> and |d0,i+d1>.
pub fn gds_sigma0(d0: usize, d1: usize) -> Result<DensityOperator> {
    if d0 == 0 || d1 == 0 {
        return Err(Error::OutOfRange("block dimensions must be >= 1".into()));
    }
    let d = d0 + d1;
    let mut m = CMatrix::zeros(d * d, d * d);
    let idx = |a: usize, b: usize| a * d + b;
    let amp0 = 1.0 / (d1 as f64).sqrt();
    let amp1 = 1.0 / (d0 as f64).sqrt();
    let u = idx(0, 0);
    let v = idx(d0, d1);
    m[(u, u)] += cr(0.5 * amp0 * amp0);
    m[(u, v)] += cr(0.5 * amp0 * amp1);
    m[(v, u)] += cr(0.5 * amp0 * amp1);
    m[(v, v)] += cr(0.5 * amp1 * amp1);
    for j in 1..d1 {
        m[(idx(0, j), idx(0, j))] += cr(0.5 / d1 as f64);
    }
    for i in 1..d0 {
        m[(idx(d0, i + d1), idx(d0, i + d1))] += cr(0.5 / d0 as f64);
    }
    DensityOperator::new(m, vec![d, d], vec!["A".into(), "B".into()])
}

/// The canonical instrument with Kraus operators K_ij = |i><i|/sqrt(d1) +
/// |d0+j><d0+j|/sqrt(d0).
pub fn gds_instrument(d0: usize, d1: usize) -> Result<Instrument> {
    if d0 == 0 || d1 == 0 {
        return Err(Error::OutOfRange("block dimensions must be >= 1".into()));
    }
    let d = d0 + d1;
    let mut outcomes = Vec::with_capacity(d0 * d1);
    for i in 0..d0 {
        for j in 0..d1 {
            let mut k = CMatrix::zeros(d, d);
            k[(i, i)] = cr(1.0 / (d1 as f64).sqrt());
            k[(d0 + j, d0 + j)] = cr(1.0 / (d0 as f64).sqrt());
            outcomes.push((format!("{i},{j}"), k));
        }
    }
    Instrument::new(outcomes, d, d)
}

/// Unnormalised Choi operator of the GDS channel: depolarizing diagonal
/// blocks onto the first d0p (resp. d1p) coordinates of the enlarged
/// output blocks, and transposed off-diagonal blocks at the largest
/// coherence compatible with complete positivity, 1/sqrt(d0p d1p), with
/// rows/columns outside the depolarizing supports truncated.
fn gds_choi_matrix(spec: &GdsSpec) -> CMatrix {
    let (b0, b1) = spec.enlarged_blocks();
    let d_in = spec.dim_in();
    let d_out = b0 + b1;
    let mut j = CMatrix::zeros(d_in * d_out, d_in * d_out);
    let idx = |a: usize, b: usize| a * d_out + b;
    for i in 0..spec.d0 {
        for b in 0..spec.d0p {
            j[(idx(i, b), idx(i, b))] += cr(1.0 / spec.d0p as f64);
        }
    }
    for jj in 0..spec.d1 {
        for b in 0..spec.d1p {
            j[(idx(spec.d0 + jj, b0 + b), idx(spec.d0 + jj, b0 + b))] += cr(1.0 / spec.d1p as f64);
        }
    }
    let c = cr(1.0 / ((spec.d0p * spec.d1p) as f64).sqrt());
    for i in 0..spec.d0.min(spec.d1p) {
        for jj in 0..spec.d1.min(spec.d0p) {
            let u = idx(i, jj);
            let v = idx(spec.d0 + jj, b0 + i);
            j[(u, v)] += c;
            j[(v, u)] += c;
        }
    }
    j
}

/// Trace-preserving GDS channel realizing the two-block action
/// (Tr(X00) I/d0p, c X01^T; c X10^T, Tr(X11) I/d1p) on the enlarged
/// output blocks, with c = 1/sqrt(d0p d1p). Kraus operators are obtained
/// from the Choi eigendecomposition and are block diagonal.
pub fn gds_channel(spec: &GdsSpec) -> Result<KrausMap> {
    let j = gds_choi_matrix(spec);
    let d_in = spec.dim_in();
    let state = DensityOperator::new(
        &j / cr(d_in as f64),
        vec![d_in, spec.dim_out()],
        vec!["A".into(), "B".into()],
    )?;
    let map = map_of_choi(&state)?;
    if !map.is_trace_preserving() {
        return Err(Error::NotTracePreserving(f64::NAN));
    }
    Ok(map)
}

/// Partially erasing channels: N_0(rho) = rho ⊗ sigma1 (x = 0) or
/// N_1(rho) = sigma0 ⊗ rho (x = 1), with Kraus operators built from the
/// eigendecomposition of the appended fixed state.
pub fn partially_erasing(
    sigma0: &DensityOperator,
    sigma1: &DensityOperator,
    x: bool,
) -> Result<KrausMap> {
    let fixed = if x { sigma0 } else { sigma1 };
    let free_dim = if x { sigma1.dim() } else { sigma0.dim() };
    let (evs, vecs) = linalg::hermitian_eigen_sorted(fixed.matrix());
    let cutoff = crate::Tolerances::default().rank_cutoff;
    let mut kraus = Vec::new();
    let fd = fixed.dim();
    for (ev, u) in evs.iter().zip(&vecs) {
        if *ev <= cutoff {
            continue;
        }
        let w = ev.sqrt();
        let mut k = CMatrix::zeros(free_dim * fd, free_dim);
        for c in 0..free_dim {
            for r in 0..fd {
                let row = if x { r * free_dim + c } else { c * fd + r };
                k[(row, c)] = u[r] * cr(w);
            }
        }
        kraus.push(k);
    }
    KrausMap::new(kraus, free_dim, free_dim * fd)
}
