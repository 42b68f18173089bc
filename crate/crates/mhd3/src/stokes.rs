//! Spectral steady Stokes solver `-Lap(U) + grad(P) = F`, `div U = 0`, and a
//! numerical harness for its elliptic regularity estimate.

use num_complex::Complex64;
use serde::Serialize;

use crate::field::{lp_norm, ScalarField, VectorField};
use crate::spectral::{forward_vector, gradient, inverse_vector, Spectrum};
use crate::{Error, Result};

/// Periodic steady Stokes solution.
#[derive(Debug, Clone)]
pub struct StokesSolution {
    /// Solenoidal velocity; the forcing's zero mode has no periodic steady
    /// response and is excluded.
    pub velocity: VectorField,
    /// Zero-mean pressure.
    pub pressure: ScalarField,
    /// Mean of the forcing, subtracted before solving.
    pub mean_force: [f64; 3],
}

/// Modewise solve: `U_hat = (I - k k^T/|k|^2) F_hat / |k|^2`,
/// `P_hat = -i (k . F_hat) / |k|^2`, zero mode dropped.
pub fn solve_stokes(force: &VectorField) -> Result<StokesSolution> {
    if !force.is_finite() {
        return Err(Error::NonFinite("stokes forcing".into()));
    }
    let grid = force.grid();
    let n = grid.n();
    let mut s = forward_vector(force);
    let n3 = grid.num_points() as f64;
    let mean_force = [
        s[0].mode(0, 0, 0).re / n3,
        s[1].mode(0, 0, 0).re / n3,
        s[2].mode(0, 0, 0).re / n3,
    ];
    let mut p_hat = Spectrum::zeros(grid);

    for z in 0..n {
        let kz = grid.wavenumber(z);
        for y in 0..n {
            let ky = grid.wavenumber(y);
            for x in 0..n {
                let kx = grid.wavenumber(x);
                let k2 = kx * kx + ky * ky + kz * kz;
                let i = grid.idx(x, y, z);
                if k2 == 0.0 {
                    s[0].modes_mut()[i] = Complex64::new(0.0, 0.0);
                    s[1].modes_mut()[i] = Complex64::new(0.0, 0.0);
                    s[2].modes_mut()[i] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let fx = s[0].modes()[i];
                let fy = s[1].modes()[i];
                let fz = s[2].modes()[i];
                let kdotf = fx * kx + fy * ky + fz * kz;
                p_hat.modes_mut()[i] = Complex64::new(0.0, -1.0) * kdotf / k2;
                s[0].modes_mut()[i] = (fx - kdotf * kx / k2) / k2;
                s[1].modes_mut()[i] = (fy - kdotf * ky / k2) / k2;
                s[2].modes_mut()[i] = (fz - kdotf * kz / k2) / k2;
            }
        }
    }

    Ok(StokesSolution {
        velocity: inverse_vector(&s, true),
        pressure: p_hat.inverse(),
        mean_force,
    })
}

/// `-Lap(U) + grad(P)`, for residual checks against the mean-free forcing.
pub fn stokes_residual_operator(sol: &StokesSolution) -> VectorField {
    let lap = crate::spectral::laplacian_vector(&sol.velocity);
    let gp = gradient(&sol.pressure);
    gp.sub(&lap)
}

/// Elliptic regularity report for one forcing at one exponent `r`.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub r: f64,
    pub hessian_norm: f64,
    pub grad_p_norm: f64,
    pub force_norm: f64,
    /// `(||grad^2 U||_r + ||grad P||_r) / ||F||_r`.
    pub sum_ratio: f64,
    /// `(||grad^2 U||_2^2 + ||grad P||_2^2) / ||F - mean F||_2^2`; for r = 2
    /// this is the quantity the spectral Parseval argument actually bounds by
    /// one (the plain sum of norms can reach sqrt(2) on mixed forcings).
    pub pythagorean_ratio: f64,
}

/// All nine second derivatives of the velocity, as an `L^r` norm of the
/// pointwise Frobenius magnitude.
fn hessian_norm(u: &VectorField, r: f64) -> Result<f64> {
    let grid = u.grid();
    let mut frob_sq = ScalarField::zeros(grid);
    for i in 0..3 {
        let s = Spectrum::forward(u.component(i));
        for a in 0..3 {
            for b in a..3 {
                let d = s.derivative(a).derivative(b).inverse();
                let weight = if a == b { 1.0 } else { 2.0 }; // symmetric pair
                for (acc, &v) in frob_sq.data_mut().iter_mut().zip(d.data()) {
                    *acc += weight * v * v;
                }
            }
        }
    }
    lp_norm(&frob_sq.map(f64::sqrt), r)
}

pub fn verify_regularity(force: &VectorField, r: f64) -> Result<RegularityReport> {
    if !(r > 1.0) && !r.is_infinite() {
        return Err(Error::InvalidParameter(format!(
            "regularity exponent must exceed 1, got {r}"
        )));
    }
    let force_norm = lp_norm(force, r)?;
    if force_norm == 0.0 {
        return Err(Error::InvalidParameter(
            "degenerate zero forcing: the estimate is vacuous".into(),
        ));
    }
    let sol = solve_stokes(force)?;
    let hess = hessian_norm(&sol.velocity, r)?;
    let grad_p = lp_norm(&gradient(&sol.pressure), r)?;

    let hess2 = hessian_norm(&sol.velocity, 2.0)?;
    let grad_p2 = lp_norm(&gradient(&sol.pressure), 2.0)?;
    let mean = sol.mean_force;
    let mean_free = VectorField::from_components(
        force.x().map(|v| v - mean[0]),
        force.y().map(|v| v - mean[1]),
        force.z().map(|v| v - mean[2]),
    )
    .expect("same grid");
    let f2 = lp_norm(&mean_free, 2.0)?;
    let pythagorean_ratio = if f2 > 0.0 {
        (hess2 * hess2 + grad_p2 * grad_p2) / (f2 * f2)
    } else {
        0.0
    };

    Ok(RegularityReport {
        r,
        hessian_norm: hess,
        grad_p_norm: grad_p,
        force_norm,
        sum_ratio: (hess + grad_p) / force_norm,
        pythagorean_ratio,
    })
}

/// Ensemble sweep over random forcings, used by `check-inequalities`.
#[derive(Debug, Clone, Serialize)]
pub struct StokesEnsembleSummary {
    pub trials: usize,
    pub max_residual_rel: f64,
    pub max_pythagorean_ratio: f64,
    pub max_sum_ratio_r2: f64,
    pub max_sum_ratio_r4: f64,
}

pub fn run_ensemble(seed: u64, trials: usize, n: usize) -> Result<StokesEnsembleSummary> {
    use rand::SeedableRng;
    let grid = crate::Grid::new(n, 1.0)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5f0c_35a1);
    let mut out = StokesEnsembleSummary {
        trials,
        max_residual_rel: 0.0,
        max_pythagorean_ratio: 0.0,
        max_sum_ratio_r2: 0.0,
        max_sum_ratio_r4: 0.0,
    };
    for _ in 0..trials {
        let force = VectorField::from_components(
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
        )
        .expect("same grid");
        let sol = solve_stokes(&force)?;
        let mean_free = VectorField::from_components(
            force.x().map(|v| v - sol.mean_force[0]),
            force.y().map(|v| v - sol.mean_force[1]),
            force.z().map(|v| v - sol.mean_force[2]),
        )
        .expect("same grid");
        let res = stokes_residual_operator(&sol).sub(&mean_free);
        let rel = lp_norm(&res, 2.0)? / lp_norm(&force, 2.0)?;
        out.max_residual_rel = out.max_residual_rel.max(rel);
        let r2 = verify_regularity(&force, 2.0)?;
        out.max_pythagorean_ratio = out.max_pythagorean_ratio.max(r2.pythagorean_ratio);
        out.max_sum_ratio_r2 = out.max_sum_ratio_r2.max(r2.sum_ratio);
        out.max_sum_ratio_r4 = out
            .max_sum_ratio_r4
            .max(verify_regularity(&force, 4.0)?.sum_ratio);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Grid;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn unit_grid() -> Grid {
        Grid::new(32, 1.0).unwrap()
    }

    #[test]
    fn zero_forcing_gives_zero_solution() {
        let sol = solve_stokes(&VectorField::zeros(unit_grid())).unwrap();
        assert!(sol.velocity.max_magnitude() < 1e-14);
        assert!(sol.pressure.max().abs() < 1e-14);
        assert_eq!(sol.mean_force, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn pure_gradient_forcing_is_absorbed_by_pressure() {
        // F = grad(phi), phi = sin(2 pi x): U = 0, P = phi.
        let grid = unit_grid();
        let phi = ScalarField::from_fn(grid, |x, _, _| (TAU * x).sin());
        let force = gradient(&phi);
        let sol = solve_stokes(&force).unwrap();
        assert!(sol.velocity.max_magnitude() < 1e-10);
        let diff = sol.pressure.sub(&phi);
        assert!(diff.max().abs() < 1e-10 && diff.min().abs() < 1e-10);
    }

    #[test]
    fn unit_wavenumber_solenoidal_forcing_returns_itself() {
        // L = 2 pi so the lowest mode has |k| = 1; modewise division by
        // |k|^2 = 1 leaves the solenoidal forcing unchanged and P = 0.
        let grid = Grid::new(32, TAU).unwrap();
        let force = {
            let mut v = VectorField::from_fn(grid, |_, y, _| [y.sin(), 0.0, 0.0]);
            v.set_solenoidal(true);
            v
        };
        let sol = solve_stokes(&force).unwrap();
        assert!(sol.velocity.sub(&force).max_magnitude() < 1e-10);
        assert!(sol.pressure.max().abs() < 1e-12);
        // residual substitution: -Lap(U) + grad(P) reproduces the forcing
        let res = stokes_residual_operator(&sol).sub(&force);
        assert!(res.max_magnitude() < 1e-9);
    }

    #[test]
    fn residual_small_for_random_forcing() {
        let grid = unit_grid();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(101);
        let force = VectorField::from_components(
            crate::lorentz::random_bandlimited(grid, &mut rng, 5, 10),
            crate::lorentz::random_bandlimited(grid, &mut rng, 5, 10),
            crate::lorentz::random_bandlimited(grid, &mut rng, 5, 10),
        )
        .unwrap();
        let sol = solve_stokes(&force).unwrap();
        let mean_free = VectorField::from_components(
            force.x().map(|v| v - sol.mean_force[0]),
            force.y().map(|v| v - sol.mean_force[1]),
            force.z().map(|v| v - sol.mean_force[2]),
        )
        .unwrap();
        let res = stokes_residual_operator(&sol).sub(&mean_free);
        let rel = lp_norm(&res, 2.0).unwrap() / lp_norm(&force, 2.0).unwrap();
        assert!(rel <= 1e-10, "relative residual {rel}");
    }

    #[test]
    fn pressure_is_zero_mean_and_velocity_solenoidal() {
        let grid = unit_grid();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let force = VectorField::from_components(
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
        )
        .unwrap();
        let sol = solve_stokes(&force).unwrap();
        assert!(sol.pressure.mean().abs() < 1e-12);
        assert!(crate::spectral::max_divergence_mode(&sol.velocity) < 1e-10);
        assert!(sol.velocity.is_solenoidal());
    }

    #[test]
    fn solver_is_linear() {
        let grid = unit_grid();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let f = VectorField::from_components(
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
        )
        .unwrap();
        let g = VectorField::from_components(
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
            crate::lorentz::random_bandlimited(grid, &mut rng, 4, 8),
        )
        .unwrap();
        let combo = f.scale(2.0).add(&g.scale(-0.5));
        let sol_combo = solve_stokes(&combo).unwrap();
        let sol_parts = solve_stokes(&f)
            .unwrap()
            .velocity
            .scale(2.0)
            .add(&solve_stokes(&g).unwrap().velocity.scale(-0.5));
        assert!(sol_combo.velocity.sub(&sol_parts).max_magnitude() < 1e-10);
    }

    #[test]
    fn regularity_pure_gradient_ratio_is_one() {
        let grid = unit_grid();
        let phi = ScalarField::from_fn(grid, |x, y, _| (TAU * x).sin() + 0.3 * (TAU * y).cos());
        let force = gradient(&phi);
        let rep = verify_regularity(&force, 2.0).unwrap();
        assert!(rep.hessian_norm < 1e-9);
        assert_relative_eq!(rep.sum_ratio, 1.0, max_relative = 1e-9);
        assert_relative_eq!(rep.pythagorean_ratio, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn regularity_rejects_zero_forcing() {
        assert!(verify_regularity(&VectorField::zeros(unit_grid()), 2.0).is_err());
    }

    #[test]
    fn pythagorean_ratio_contracts_and_sum_ratio_stays_below_sqrt2() {
        let s = run_ensemble(7, 25, 16).unwrap();
        assert!(s.max_residual_rel <= 1e-10);
        assert!(s.max_pythagorean_ratio <= 1.0 + 1e-8);
        assert!(s.max_sum_ratio_r2 <= 2.0_f64.sqrt() + 1e-8);
        assert!(s.max_sum_ratio_r2 >= 1.0 - 1e-8);
    }

    #[test]
    fn mixed_forcing_sum_ratio_exceeds_one() {
        // Equal-energy solenoidal and gradient parts on one mode push the sum
        // ratio to sqrt(2), showing the plain sum of norms is not a
        // contraction even though each square is.
        let grid = Grid::new(32, TAU).unwrap();
        let force = VectorField::from_fn(grid, |x, y, _| [y.sin() + x.cos(), 0.0, 0.0]);
        // F_x = sin(y) (solenoidal, |k| = 1) + cos(x) = d/dx sin(x) (gradient)
        let rep = verify_regularity(&force, 2.0).unwrap();
        assert_relative_eq!(rep.sum_ratio, 2.0_f64.sqrt(), max_relative = 1e-9);
        assert_relative_eq!(rep.pythagorean_ratio, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn ensemble_regressions() {
        let s = run_ensemble(2024, 30, 16).unwrap();
        assert_relative_eq!(s.max_sum_ratio_r2, FROZEN_SUM_R2, max_relative = 1e-9);
        assert_relative_eq!(s.max_sum_ratio_r4, FROZEN_SUM_R4, max_relative = 1e-9);
    }

    const FROZEN_SUM_R2: f64 = 1.4141850107600837;
    const FROZEN_SUM_R4: f64 = 1.387916249366735;
}
