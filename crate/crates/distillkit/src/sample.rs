//! Seeded random generators for states, unitaries, isometries and
//! instruments. Haar-distributed objects come from QR factorisation of
//! Ginibre matrices with the standard phase correction.

use crate::channels::{Instrument, KrausMap};
use crate::linalg::{cr, CMatrix, CVector};
use crate::qcore::{DensityOperator, PureStateVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// Independent generator for a worker derived from (seed, stream index).
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; two uniforms per call keeps the stream layout simple.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(standard_normal(rng), standard_normal(rng))
    })
}

/// Haar-random unitary.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    haar_isometry(dim, dim, rng)
}

/// Haar-random isometry: `cols` orthonormal columns in dimension `rows`
/// (requires rows >= cols).
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the gauge so the distribution is Haar: rescale each column by
    // the phase of the corresponding diagonal entry of R.
    for j in 0..cols {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..rows {
                q[(i, j)] *= phase.conj();
            }
        }
    }
    q
}

/// Haar-random unit vector.
pub fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> CVector {
    let mut v = CVector::from_fn(dim, |_, _| {
        Complex64::new(standard_normal(rng), standard_normal(rng))
    });
    let n = v.norm();
    if n > 0.0 {
        v /= cr(n);
    } else {
        v[0] = cr(1.0);
    }
    v
}

pub fn random_pure_state(dims: &[usize], labels: &[&str], rng: &mut impl Rng) -> PureStateVector {
    let dim: usize = dims.iter().product();
    PureStateVector::new(
        random_unit_vector(dim, rng),
        dims.to_vec(),
        labels.iter().map(|s| s.to_string()).collect(),
    )
    .expect("random unit vector is normalised")
}

/// Hilbert-Schmidt-ensemble random density operator of the given rank.
pub fn random_density(dim: usize, rank: usize, label: &str, rng: &mut impl Rng) -> DensityOperator {
    random_state(&[dim], &[label], rank, rng)
}

pub fn random_state(
    dims: &[usize],
    labels: &[&str],
    rank: usize,
    rng: &mut impl Rng,
) -> DensityOperator {
    let dim: usize = dims.iter().product();
    let g = ginibre(dim, rank.max(1), rng);
    let mut m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    m /= cr(tr);
    DensityOperator::new(
        m,
        dims.to_vec(),
        labels.iter().map(|s| s.to_string()).collect(),
    )
    .expect("Wishart matrix normalises to a state")
}

/// Random channel A -> A' drawn from a Haar Stinespring isometry
/// A -> A' ⊗ G with environment dimension `env_dim`.
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    env_dim: usize,
    rng: &mut impl Rng,
) -> KrausMap {
    assert!(dim_out * env_dim >= dim_in, "no isometry fits these dimensions");
    let v = haar_isometry(dim_out * env_dim, dim_in, rng);
    // Kraus operator g is the block of rows with environment index g.
    let kraus: Vec<CMatrix> = (0..env_dim)
        .map(|g| {
            CMatrix::from_fn(dim_out, dim_in, |a, i| v[(a * env_dim + g, i)])
        })
        .collect();
    KrausMap::new(kraus, dim_in, dim_out).expect("isometry slices form a channel")
}

/// Random complete instrument with `outcomes` Kraus operators A -> A',
/// obtained by slicing a Haar isometry A -> A' ⊗ M.
pub fn random_complete_instrument(
    dim_in: usize,
    dim_out: usize,
    outcomes: usize,
    rng: &mut impl Rng,
) -> Instrument {
    assert!(dim_out * outcomes >= dim_in, "no isometry fits these dimensions");
    let v = haar_isometry(dim_out * outcomes, dim_in, rng);
    let kraus: Vec<(String, CMatrix)> = (0..outcomes)
        .map(|m| {
            let k = CMatrix::from_fn(dim_out, dim_in, |a, i| v[(m * dim_out + a, i)]);
            (m.to_string(), k)
        })
        .collect();
    Instrument::new(kraus, dim_in, dim_out).expect("isometry slices form a complete instrument")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, identity, max_abs_diff};

    #[test]
    fn haar_isometry_has_orthonormal_columns() {
        let mut rng = stream_rng(5, 0);
        let v = haar_isometry(6, 3, &mut rng);
        assert!(max_abs_diff(&(dagger(&v) * &v), &identity(3)) < 1e-12);
    }

    #[test]
    fn random_channel_is_trace_preserving() {
        let mut rng = stream_rng(6, 0);
        let n = random_channel(3, 2, 4, &mut rng);
        assert!(n.is_trace_preserving());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a1 = ginibre(2, 2, &mut stream_rng(1, 0));
        let a2 = ginibre(2, 2, &mut stream_rng(1, 0));
        let b = ginibre(2, 2, &mut stream_rng(1, 1));
        assert_eq!(max_abs_diff(&a1, &a2), 0.0);
        assert!(max_abs_diff(&a1, &b) > 1e-6);
    }
}
