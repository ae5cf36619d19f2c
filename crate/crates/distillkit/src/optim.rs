//! Derivative-free simplex minimiser used by the distillation searches.
//!
//! A compact adaptive Nelder-Mead: good enough for the smooth, low-
//! dimensional objectives in this crate when combined with restarts.

/// Outcome of one simplex run.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evals: u64,
    pub converged: bool,
}

/// Options for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iters: usize,
    /// Stop when the simplex value spread falls below this.
    pub f_tol: f64,
    /// Initial simplex step per coordinate.
    pub step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { max_iters: 4000, f_tol: 1e-10, step: 0.35 }
    }
}

/// Minimises `f` from `x0`. Standard Nelder-Mead with adaptive
/// (dimension-dependent) expansion/contraction coefficients.
pub fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    let n = x0.len();
    let mut evals: u64 = 0;
    let mut eval = |x: &[f64], evals: &mut u64| {
        *evals += 1;
        f(x)
    };

    // adaptive coefficients (Gao & Han)
    let nf = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let fx0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), fx0));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.step;
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() < opts.f_tol {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for (v, _) in simplex.iter().take(n) {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / nf;
            }
        }
        let worst = simplex[n].clone();
        let second_worst = simplex[n - 1].1;
        let best = simplex[0].1;

        let blend = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = blend(alpha);
        let fr = eval(&xr, &mut evals);
        if fr < best {
            let xe = blend(alpha * beta);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < second_worst {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = blend(alpha * gamma);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = blend(-gamma);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                // shrink toward the best vertex
                let best_x = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> = best_x
                        .iter()
                        .zip(&entry.0)
                        .map(|(b, x)| b + delta * (x - b))
                        .collect();
                    let fv = eval(&v, &mut evals);
                    *entry = (v, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (x, fx) = simplex.swap_remove(0);
    SimplexResult { x, fx, iterations, evals, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimises_quadratic() {
        let mut f = |x: &[f64]| x.iter().map(|v| (v - 1.5) * (v - 1.5)).sum::<f64>();
        let r = nelder_mead(&mut f, &[0.0; 4], &SimplexOptions::default());
        assert!(r.fx < 1e-8);
        for v in r.x {
            assert!((v - 1.5).abs() < 1e-4);
        }
    }

    #[test]
    fn handles_rosenbrock_2d() {
        let mut f = |x: &[f64]| {
            let a = 1.0 - x[0];
            let b = x[1] - x[0] * x[0];
            a * a + 100.0 * b * b
        };
        let r = nelder_mead(
            &mut f,
            &[-1.2, 1.0],
            &SimplexOptions { max_iters: 8000, ..Default::default() },
        );
        assert!(r.fx < 1e-6);
    }
}
