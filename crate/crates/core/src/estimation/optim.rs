//! Derivative-free simplex descent with a quasi-Newton polish, plus the
//! finite-difference gradient/Hessian helpers used for covariance estimation.
//! The objective may return `f64::INFINITY` to reject a parameter point.

/// Convergence thresholds: parameter step and objective step.
pub const PARAM_TOL: f64 = 1e-8;
pub const FN_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex minimization.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    init_step: f64,
    max_iters: usize,
) -> OptimResult {
    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += init_step * v[i].abs().max(1.0);
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iters = 0;
    let mut converged = false;

    while iters < max_iters {
        iters += 1;
        // Order the simplex by objective value.
        let mut idx: Vec<usize> = (0..=dim).collect();
        idx.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap_or(std::cmp::Ordering::Equal));
        let reorder: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let fre: Vec<f64> = idx.iter().map(|&i| fvals[i]).collect();
        simplex = reorder;
        fvals = fre;

        let f_best = fvals[0];
        let f_worst = fvals[dim];
        let spread = (0..dim)
            .map(|j| {
                (0..=dim)
                    .map(|i| simplex[i][j])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    })
            })
            .map(|(lo, hi)| hi - lo)
            .fold(0.0f64, f64::max);
        if f_worst.is_finite()
            && (f_worst - f_best).abs() <= FN_TOL * (1.0 + f_best.abs())
            && spread <= PARAM_TOL
        {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for v in simplex.iter().take(dim) {
            for j in 0..dim {
                centroid[j] += v[j] / dim as f64;
            }
        }

        let reflect: Vec<f64> = (0..dim)
            .map(|j| centroid[j] + alpha * (centroid[j] - simplex[dim][j]))
            .collect();
        let f_r = f(&reflect);

        if f_r < fvals[0] {
            let expand: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + gamma * (reflect[j] - centroid[j]))
                .collect();
            let f_e = f(&expand);
            if f_e < f_r {
                simplex[dim] = expand;
                fvals[dim] = f_e;
            } else {
                simplex[dim] = reflect;
                fvals[dim] = f_r;
            }
        } else if f_r < fvals[dim - 1] {
            simplex[dim] = reflect;
            fvals[dim] = f_r;
        } else {
            // Contraction (outside if the reflection improved on the worst).
            let base = if f_r < fvals[dim] { &reflect } else { &simplex[dim] };
            let contract: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + rho * (base[j] - centroid[j]))
                .collect();
            let f_c = f(&contract);
            if f_c < fvals[dim].min(f_r) {
                simplex[dim] = contract;
                fvals[dim] = f_c;
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].clone();
                for i in 1..=dim {
                    for j in 0..dim {
                        simplex[i][j] = best[j] + sigma * (simplex[i][j] - best[j]);
                    }
                    fvals[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if fvals[i] < fvals[best] {
            best = i;
        }
    }
    OptimResult {
        x: simplex[best].clone(),
        f: fvals[best],
        iterations: iters,
        converged,
    }
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = rel_step * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central finite-difference Hessian with per-coordinate step
/// `step_scale * max(1, |x_i|)`.
pub fn fd_hessian(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], step_scale: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|v| step_scale * v.abs().max(1.0)).collect();
    let f0 = f(x);
    let mut hess = vec![vec![0.0; n]; n];
    let mut xp = x.to_vec();
    for i in 0..n {
        xp[i] = x[i] + h[i];
        let fp = f(&xp);
        xp[i] = x[i] - h[i];
        let fm = f(&xp);
        xp[i] = x[i];
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in (i + 1)..n {
            xp[i] = x[i] + h[i];
            xp[j] = x[j] + h[j];
            let fpp = f(&xp);
            xp[j] = x[j] - h[j];
            let fpm = f(&xp);
            xp[i] = x[i] - h[i];
            let fmm = f(&xp);
            xp[j] = x[j] + h[j];
            let fmp = f(&xp);
            xp[i] = x[i];
            xp[j] = x[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// BFGS with finite-difference gradients and a backtracking line search.
pub fn bfgs_polish(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], max_iters: usize) -> OptimResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return OptimResult {
            x,
            f: fx,
            iterations: 0,
            converged: false,
        };
    }
    let mut grad = fd_gradient(f, &x, 1e-6);
    // Inverse Hessian approximation, started at the identity.
    let mut hinv = vec![vec![0.0; n]; n];
    for (i, row) in hinv.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let mut iters = 0;
    let mut converged = false;
    while iters < max_iters {
        iters += 1;
        let dir: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| hinv[i][j] * grad[j]).sum::<f64>())
            .collect();
        let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if slope >= 0.0 {
            // Not a descent direction; reset the approximation.
            for (i, row) in hinv.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if i == j { 1.0 } else { 0.0 };
                }
            }
            if grad.iter().all(|g| g.abs() < PARAM_TOL) {
                converged = true;
                break;
            }
            continue;
        }

        // Backtracking Armijo search.
        let mut step = 1.0;
        let mut x_new = x.clone();
        let mut f_new = f64::INFINITY;
        let mut ok = false;
        for _ in 0..40 {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            f_new = f(&x_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if !ok {
            converged = grad.iter().all(|g| g.abs() < 1e-6);
            break;
        }

        let grad_new = fd_gradient(f, &x_new, 1e-6);
        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| grad_new[i] - grad[i]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();

        let step_norm = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let f_step = (fx - f_new).abs();
        x = x_new.clone();
        fx = f_new;
        grad = grad_new;
        if step_norm < PARAM_TOL && f_step < FN_TOL * (1.0 + fx.abs()) {
            converged = true;
            break;
        }

        if sy > 1e-12 {
            // Standard BFGS inverse update.
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| hinv[i][j] * y[j]).sum::<f64>())
                .collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] += (1.0 + rho * yhy) * rho * s[i] * s[j]
                        - rho * (s[i] * hy[j] + hy[i] * s[j]);
                }
            }
        }
    }

    OptimResult {
        x,
        f: fx,
        iterations: iters,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: &[f64]) -> f64 {
        // Minimum at (1, -2, 3).
        (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 2.0).powi(2) + 0.5 * (x[2] - 3.0).powi(2)
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let mut f = |x: &[f64]| quadratic(x);
        let r = nelder_mead(&mut f, &[0.0, 0.0, 0.0], 0.25, 2000);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6);
        assert!((r.x[1] + 2.0).abs() < 1e-6);
        assert!((r.x[2] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn nelder_mead_handles_rejected_regions() {
        // Infinity outside the unit-ish box.
        let mut f = |x: &[f64]| {
            if x[0].abs() > 3.0 {
                f64::INFINITY
            } else {
                (x[0] - 0.5).powi(2)
            }
        };
        let r = nelder_mead(&mut f, &[2.0], 0.5, 500);
        assert!((r.x[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn bfgs_polishes_rosenbrock() {
        let mut f = |x: &[f64]| {
            100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
        };
        let nm = nelder_mead(&mut f, &[-1.2, 1.0], 0.25, 2000);
        let r = bfgs_polish(&mut f, &nm.x, 500);
        assert!((r.x[0] - 1.0).abs() < 1e-5, "{:?}", r.x);
        assert!((r.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn fd_hessian_of_quadratic_is_exact() {
        let mut f = |x: &[f64]| quadratic(x);
        let h = fd_hessian(&mut f, &[1.0, -2.0, 3.0], 1e-5);
        let expect = [[2.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((h[i][j] - expect[i][j]).abs() < 1e-5, "H[{i}][{j}] = {}", h[i][j]);
            }
        }
    }
}
