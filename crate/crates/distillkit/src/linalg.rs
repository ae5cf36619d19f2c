//! Dense complex linear algebra over composite (tensor-product) index
//! spaces. Everything here works on raw matrices; the labelled types in
//! [`crate::qcore`] wrap these routines with validation.
//!
//! Subsystem 0 is the most significant tensor factor: a composite basis
//! index is `((i_0 d_1 + i_1) d_2 + i_2) ...`, matching the Kronecker
//! product order `A ⊗ B = kron(A, B)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cone() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

pub fn trace_re(m: &CMatrix) -> f64 {
    trace(m).re
}

/// Hilbert-Schmidt inner product Tr(A† B).
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max entry modulus of M - M†.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Column-major flattening of a matrix into a vector (and back). This is
/// the `vec` convention under which the Choi operator of a map with Kraus
/// operators `F_k` is `sum_k vec(F_k) vec(F_k)†` on `A ⊗ B` with `A` the
/// input and `B` the output factor.
pub fn vec_cm(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.nrows() * m.ncols(), m.iter().cloned())
}

pub fn unvec_cm(v: &CVector, nrows: usize, ncols: usize) -> CMatrix {
    assert_eq!(v.len(), nrows * ncols);
    CMatrix::from_iterator(nrows, ncols, v.iter().cloned())
}

/// Row strides of each tensor factor: `strides[p]` is the product of the
/// dimensions after position `p`.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for p in (0..dims.len().saturating_sub(1)).rev() {
        s[p] = s[p + 1] * dims[p + 1];
    }
    s
}

fn flat_index(multi: &[usize], strides: &[usize]) -> usize {
    multi.iter().zip(strides).map(|(i, s)| i * s).sum()
}

/// Iterates all multi-indices over `dims`, calling `f` with each.
fn for_each_multi_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    let total: usize = dims.iter().product();
    let mut multi = vec![0usize; dims.len()];
    for _ in 0..total {
        f(&multi);
        for p in (0..dims.len()).rev() {
            multi[p] += 1;
            if multi[p] < dims[p] {
                break;
            }
            multi[p] = 0;
        }
    }
}

/// Partial trace over the positions NOT listed in `keep`. Kept positions
/// stay in their original relative order.
pub fn partial_trace_raw(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let n: usize = dims.iter().product();
    assert_eq!(m.nrows(), n, "matrix side must match product of dims");
    let full_strides = strides(dims);
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep.contains(p)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&p| dims[p]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&p| dims[p]).collect();
    let out_dim: usize = keep_dims.iter().product();
    let mut out = CMatrix::zeros(out_dim, out_dim);

    let mut kept_rows: Vec<(usize, usize)> = Vec::new(); // (out flat, base contribution)
    for_each_multi_index(&keep_dims, |ki| {
        let base: usize = ki
            .iter()
            .zip(keep)
            .map(|(&i, &p)| i * full_strides[p])
            .sum();
        kept_rows.push((kept_rows.len(), base));
    });
    let mut traced_offsets: Vec<usize> = Vec::new();
    for_each_multi_index(&traced_dims, |ti| {
        let off: usize = ti
            .iter()
            .zip(&traced)
            .map(|(&i, &p)| i * full_strides[p])
            .sum();
        traced_offsets.push(off);
    });

    for &(r_out, r_base) in &kept_rows {
        for &(c_out, c_base) in &kept_rows {
            let mut acc = czero();
            for &off in &traced_offsets {
                acc += m[(r_base + off, c_base + off)];
            }
            out[(r_out, c_out)] = acc;
        }
    }
    out
}

/// Reorders tensor factors: slot `j` of the result holds old position
/// `perm[j]`. Returns the permuted matrix; the new dims are
/// `perm.map(|p| dims[p])`.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    assert_eq!(dims.len(), perm.len());
    let n: usize = dims.iter().product();
    assert_eq!(m.nrows(), n);
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_strides = strides(&new_dims);

    // old flat index -> new flat index
    let mut map = vec![0usize; n];
    for_each_multi_index(dims, |multi| {
        let old = flat_index(multi, &old_strides);
        let new: usize = perm
            .iter()
            .enumerate()
            .map(|(slot, &p)| multi[p] * new_strides[slot])
            .sum();
        map[old] = new;
    });

    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    out
}

/// Embeds an operator acting on the factors at `positions` (in that order)
/// into the full space, i.e. builds the matrix of `op` acting on those
/// factors and the identity elsewhere.
pub fn embed_operator(op: &CMatrix, dims: &[usize], positions: &[usize]) -> CMatrix {
    let op_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
    let op_dim: usize = op_dims.iter().product();
    assert_eq!(op.nrows(), op_dim, "operator size must match the addressed factors");
    let rest: Vec<usize> = (0..dims.len()).filter(|p| !positions.contains(p)).collect();
    let rest_dim: usize = rest.iter().map(|&p| dims[p]).product();
    let big = kron(op, &identity(rest_dim));
    // `big` acts on positions ++ rest; permute back to the original order.
    let block_dims: Vec<usize> = positions
        .iter()
        .chain(rest.iter())
        .map(|&p| dims[p])
        .collect();
    let mut perm = vec![0usize; dims.len()];
    let order: Vec<usize> = positions.iter().chain(rest.iter()).cloned().collect();
    for (slot_in_block, &orig) in order.iter().enumerate() {
        // slot `orig` of the output should read block slot `slot_in_block`
        perm[orig] = slot_in_block;
    }
    permute_subsystems(&big, &block_dims, &perm)
}

/// Marginal density matrix of a pure state on the factors listed in
/// `keep` (original order), computed from the amplitudes without forming
/// the full density matrix.
pub fn pure_marginal(amp: &CVector, dims: &[usize], keep: &[usize]) -> CMatrix {
    let full_strides = strides(dims);
    let rest: Vec<usize> = (0..dims.len()).filter(|p| !keep.contains(p)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&p| dims[p]).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&p| dims[p]).collect();
    let dk: usize = keep_dims.iter().product();
    let dr: usize = rest_dims.iter().product();

    // reshape |psi> into the dk x dr matrix M with rho_keep = M M†
    let mut m = CMatrix::zeros(dk, dr);
    let mut keep_offsets = Vec::with_capacity(dk);
    for_each_multi_index(&keep_dims, |ki| {
        let off: usize = ki.iter().zip(keep).map(|(&i, &p)| i * full_strides[p]).sum();
        keep_offsets.push(off);
    });
    let mut rest_offsets = Vec::with_capacity(dr);
    for_each_multi_index(&rest_dims, |ri| {
        let off: usize = ri.iter().zip(&rest).map(|(&i, &p)| i * full_strides[p]).sum();
        rest_offsets.push(off);
    });
    for (r, &ro) in keep_offsets.iter().enumerate() {
        for (c, &co) in rest_offsets.iter().enumerate() {
            m[(r, c)] = amp[ro + co];
        }
    }
    &m * m.adjoint()
}

/// Eigendecomposition of a Hermitian matrix with deterministic output:
/// eigenvalues in non-increasing order, each eigenvector rescaled so its
/// first component of modulus > 1e-12 is real positive, ties (within
/// 1e-12) broken by lexicographic comparison of the phase-fixed component
/// sequences.
pub fn hermitian_eigen_sorted(m: &CMatrix) -> (Vec<f64>, Vec<CVector>) {
    let n = m.nrows();
    let sym = m.clone().symmetric_eigen();
    let mut pairs: Vec<(f64, CVector)> = (0..n)
        .map(|k| {
            let v = fix_phase(sym.eigenvectors.column(k).into_owned());
            (sym.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= 1e-12 {
            lex_cmp(&a.1, &b.1)
        } else {
            b.0.partial_cmp(&a.0).unwrap()
        }
    });
    pairs.into_iter().unzip()
}

/// Scales `v` so its first component of modulus > 1e-12 is real positive.
pub fn fix_phase(v: CVector) -> CVector {
    for z in v.iter() {
        if z.norm() > 1e-12 {
            let phase = z.conj() / z.norm();
            return v.map(|w| w * phase);
        }
    }
    v
}

fn lex_cmp(a: &CVector, b: &CVector) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.partial_cmp(&y.re).unwrap_or(Ordering::Equal) {
            Ordering::Equal => {}
            o => return o,
        }
        match x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

/// Eigenvalues only, non-increasing.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let sym = m.clone().symmetric_eigen();
    let mut evs: Vec<f64> = sym.eigenvalues.iter().cloned().collect();
    evs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    evs
}

/// Shannon entropy in bits of an eigenvalue vector, with the clipping
/// convention: entries in [-psd_tol, 0) are treated as 0, entries below
/// -psd_tol are an error reported through the returned value.
pub fn entropy_bits_from_eigs(eigs: &[f64], psd_tol: f64) -> Result<f64, f64> {
    let mut s = 0.0;
    for &ev in eigs {
        if ev < -psd_tol {
            return Err(ev);
        }
        let p = ev.clamp(0.0, 1.0);
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    Ok(s)
}

/// Entropy in bits of a Hermitian PSD matrix (validated against `psd_tol`).
pub fn entropy_bits(m: &CMatrix, psd_tol: f64) -> Result<f64, f64> {
    entropy_bits_from_eigs(&hermitian_eigenvalues(m), psd_tol)
}

/// U = exp(iH) for Hermitian H, via eigendecomposition.
pub fn expi_hermitian(h: &CMatrix) -> CMatrix {
    let n = h.nrows();
    let sym = h.clone().symmetric_eigen();
    let mut u = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = sym.eigenvalues[k];
        let phase = Complex64::from_polar(1.0, lam);
        let col = sym.eigenvectors.column(k);
        for i in 0..n {
            for j in 0..n {
                u[(i, j)] += phase * col[i] * col[j].conj();
            }
        }
    }
    u
}

/// PSD square root via eigendecomposition; negative eigenvalues (from
/// floating-point noise) are clipped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let sym = m.clone().symmetric_eigen();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = sym.eigenvalues[k].max(0.0).sqrt();
        if lam == 0.0 {
            continue;
        }
        let col = sym.eigenvectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += cr(lam) * col[i] * col[j].conj();
            }
        }
    }
    out
}

/// Projection onto the PSD cone (clip negative eigenvalues).
pub fn psd_projection(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let herm = (m + dagger(m)) * cr(0.5);
    let sym = herm.symmetric_eigen();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = sym.eigenvalues[k];
        if lam <= 0.0 {
            continue;
        }
        let col = sym.eigenvectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += cr(lam) * col[i] * col[j].conj();
            }
        }
    }
    out
}
