//! Time integration of the coupled system: semi-Lagrangian density transport,
//! IMEX Runge-Kutta with spectral integrating factors for the stiff diffusion,
//! explicit advection/force terms, projection after every substage.

mod advect;
mod rhs;

pub use advect::{advect_cfl_bound, advect_density};
pub use rhs::{induction_rhs, momentum_rhs, temperature_rhs};

use serde::{Deserialize, Serialize};

use crate::field::{ScalarField, VectorField};
use crate::spectral::{forward_vector, inverse_vector, leray_project_spectra, Spectrum};
use crate::{Error, Result};

use rhs::{evaluate, DiffusionSplit, EvalContext, ExplicitEval};

/// Coefficients of the system; all strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// viscosity
    pub mu: f64,
    /// magnetic diffusivity
    pub nu: f64,
    /// heat capacity
    pub c_v: f64,
    /// heat conductivity
    pub kappa: f64,
}

impl PhysicalConstants {
    pub fn new(mu: f64, nu: f64, c_v: f64, kappa: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("nu", nu), ("c_v", c_v), ("kappa", kappa)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "physical constant {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { mu, nu, c_v, kappa })
    }
}

/// Time-stepping substage scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstepScheme {
    #[default]
    Rk2Imex,
    Rk3Imex,
}

/// Stepper knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    /// CFL safety factor in (0, 1].
    pub cfl_number: f64,
    /// Density floor used in divisions; 0 permits vacuum but aborts on
    /// division faults.
    pub density_floor: f64,
    /// 2/3-rule dealiasing of quadratic products.
    pub dealias: bool,
    /// Hard cap on the step size.
    pub max_dt: f64,
    pub substep_scheme: SubstepScheme,
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_number > 0.0 && self.cfl_number <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_number must lie in (0, 1], got {}",
                self.cfl_number
            )));
        }
        if !(self.density_floor >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "density_floor must be >= 0, got {}",
                self.density_floor
            )));
        }
        if !(self.max_dt > 0.0) || !self.max_dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "max_dt must be positive and finite, got {}",
                self.max_dt
            )));
        }
        Ok(())
    }
}

/// Full solution snapshot at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub rho: ScalarField,
    pub u: VectorField,
    pub h: VectorField,
    pub theta: ScalarField,
    pub time: f64,
}

impl State {
    pub fn new(
        rho: ScalarField,
        u: VectorField,
        h: VectorField,
        theta: ScalarField,
        time: f64,
    ) -> Result<Self> {
        let grid = rho.grid();
        if u.grid() != grid || h.grid() != grid || theta.grid() != grid {
            return Err(Error::GridMismatch(
                "state fields must share one grid".into(),
            ));
        }
        if !rho.is_finite() || !u.is_finite() || !h.is_finite() || !theta.is_finite() {
            return Err(Error::NonFinite("state construction".into()));
        }
        if rho.min() < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "density must be nonnegative, min = {}",
                rho.min()
            )));
        }
        if theta.min() < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "temperature must be nonnegative, min = {}",
                theta.min()
            )));
        }
        if !(time >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time must be >= 0, got {time}"
            )));
        }
        Ok(Self {
            rho,
            u,
            h,
            theta,
            time,
        })
    }

    pub fn grid(&self) -> crate::Grid {
        self.rho.grid()
    }

    pub fn zeros(grid: crate::Grid) -> Self {
        Self {
            rho: ScalarField::zeros(grid),
            u: VectorField::zeros(grid),
            h: VectorField::zeros(grid),
            theta: ScalarField::zeros(grid),
            time: 0.0,
        }
    }
}

/// Per-step bookkeeping for the diagnostics ledger.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepReport {
    pub dt: f64,
    /// Mean density used for the integrating factors.
    pub rho_bar: f64,
    /// `min theta` after the update, before clipping at zero.
    pub theta_min_pre_clip: f64,
    /// `c_v int rho * max(-theta, 0)` removed by the clip.
    pub clipped_thermal_mass: f64,
}

/// Advective/Alfven-limited step size, capped at `max_dt`.
pub fn cfl_dt(state: &State, config: &SchemeConfig, _constants: &PhysicalConstants) -> f64 {
    let h = state.grid().spacing();
    let mut dt = config.max_dt;
    let umax = state.u.max_magnitude();
    if umax > 0.0 {
        dt = dt.min(config.cfl_number * h / umax);
    }
    let hmax = state.h.max_magnitude();
    if hmax > 0.0 {
        // Alfven speed |H| / sqrt(rho), worst case at the smallest density
        let rho_ref = state.rho.min().max(config.density_floor).max(1e-12);
        dt = dt.min(config.cfl_number * h * rho_ref.sqrt() / hmax);
    }
    dt
}

fn nan_fault(state: &State, time: f64) -> Result<()> {
    if state.rho.is_finite() && state.u.is_finite() && state.h.is_finite() && state.theta.is_finite()
    {
        Ok(())
    } else {
        Err(Error::NanFault {
            time,
            last_checkpoint: None,
        })
    }
}

struct StageFields {
    su: [Spectrum; 3],
    sh: [Spectrum; 3],
    st: Spectrum,
}

fn forward_state(state: &State) -> StageFields {
    StageFields {
        su: forward_vector(&state.u),
        sh: forward_vector(&state.h),
        st: Spectrum::forward(&state.theta),
    }
}

/// `E(tau)(y + w * n)` for one variable with diffusion coefficient `c`.
fn if_stage(y: &Spectrum, n: &Spectrum, w: f64, c: f64, tau: f64) -> Spectrum {
    let mut s = y.clone();
    s.add_scaled(n, w);
    s.diffuse(c, tau);
    s
}

/// One step with the size chosen by `cfl_dt`.
pub fn step(
    state: &State,
    config: &SchemeConfig,
    constants: &PhysicalConstants,
) -> Result<(State, StepReport)> {
    let dt = cfl_dt(state, config, constants);
    step_with_dt(state, dt, config, constants)
}

/// One IMEX Runge-Kutta step of fixed size `dt`.
pub fn step_with_dt(
    state: &State,
    dt: f64,
    config: &SchemeConfig,
    constants: &PhysicalConstants,
) -> Result<(State, StepReport)> {
    config.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive and finite, got {dt}"
        )));
    }
    let bound = advect_cfl_bound(&state.u);
    if dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }

    let grid = state.grid();
    let rho_bar = {
        let m = state.rho.mean();
        if m > 0.0 {
            m
        } else {
            config.density_floor.max(1e-12)
        }
    };
    let cu = constants.mu / rho_bar;
    let ch = constants.nu;
    let ct = constants.kappa / (constants.c_v * rho_bar);

    let ctx = EvalContext {
        constants: *constants,
        density_floor: config.density_floor,
        dealias: config.dealias,
        split: DiffusionSplit::ImexResidual { rho_bar },
    };

    let y0 = forward_state(state);
    let n1 = evaluate(
        &state.rho,
        &state.u,
        &state.h,
        &state.theta,
        state.time,
        &ctx,
    )?;

    let combine3 = |y: &[Spectrum; 3], n: &[ExplicitEval; 1], pick: fn(&ExplicitEval) -> &[Spectrum; 3], w: f64, c: f64, tau: f64| -> [Spectrum; 3] {
        let nf = pick(&n[0]);
        [
            if_stage(&y[0], &nf[0], w, c, tau),
            if_stage(&y[1], &nf[1], w, c, tau),
            if_stage(&y[2], &nf[2], w, c, tau),
        ]
    };

    let (mut su_new, mut sh_new, st_new, trace_u) = match config.substep_scheme {
        SubstepScheme::Rk2Imex => {
            // midpoint stage
            let n1w = [n1];
            let su_half = combine3(&y0.su, &n1w, |e| &e.nu_hat, 0.5 * dt, cu, 0.5 * dt);
            let sh_half = combine3(&y0.sh, &n1w, |e| &e.nh_hat, 0.5 * dt, ch, 0.5 * dt);
            let st_half = if_stage(&y0.st, &n1w[0].ntheta_hat, 0.5 * dt, ct, 0.5 * dt);

            let u_half = inverse_vector(&su_half, true);
            let h_half = inverse_vector(&sh_half, true);
            let theta_half = st_half.inverse();
            let rho_half = advect_density(&state.rho, &state.u, 0.5 * dt)?;

            let n2 = evaluate(
                &rho_half,
                &u_half,
                &h_half,
                &theta_half,
                state.time + 0.5 * dt,
                &ctx,
            )?;

            // y_{n+1} = E(dt) y_n + dt E(dt/2) N2
            let full = |y: &Spectrum, n: &Spectrum, c: f64| -> Spectrum {
                let mut a = y.clone();
                a.diffuse(c, dt);
                let mut b = n.clone();
                b.diffuse(c, 0.5 * dt);
                a.add_scaled(&b, dt);
                a
            };
            let su_new = [
                full(&y0.su[0], &n2.nu_hat[0], cu),
                full(&y0.su[1], &n2.nu_hat[1], cu),
                full(&y0.su[2], &n2.nu_hat[2], cu),
            ];
            let sh_new = [
                full(&y0.sh[0], &n2.nh_hat[0], ch),
                full(&y0.sh[1], &n2.nh_hat[1], ch),
                full(&y0.sh[2], &n2.nh_hat[2], ch),
            ];
            let st_new = full(&y0.st, &n2.ntheta_hat, ct);
            (su_new, sh_new, st_new, u_half)
        }
        SubstepScheme::Rk3Imex => {
            // Heun's third-order scheme: c = (0, 1/3, 2/3), b = (1/4, 0, 3/4)
            let n1w = [n1];
            let su2 = combine3(&y0.su, &n1w, |e| &e.nu_hat, dt / 3.0, cu, dt / 3.0);
            let sh2 = combine3(&y0.sh, &n1w, |e| &e.nh_hat, dt / 3.0, ch, dt / 3.0);
            let st2 = if_stage(&y0.st, &n1w[0].ntheta_hat, dt / 3.0, ct, dt / 3.0);
            let n1 = n1w;

            let u2 = inverse_vector(&su2, true);
            let h2 = inverse_vector(&sh2, true);
            let theta2 = st2.inverse();
            let rho2 = advect_density(&state.rho, &state.u, dt / 3.0)?;
            let n2 = evaluate(&rho2, &u2, &h2, &theta2, state.time + dt / 3.0, &ctx)?;

            // y3 = E(2dt/3) y_n + (2dt/3) E(dt/3) N2
            let stage3 = |y: &Spectrum, n: &Spectrum, c: f64| -> Spectrum {
                let mut a = y.clone();
                a.diffuse(c, 2.0 * dt / 3.0);
                let mut b = n.clone();
                b.diffuse(c, dt / 3.0);
                a.add_scaled(&b, 2.0 * dt / 3.0);
                a
            };
            let su3 = [
                stage3(&y0.su[0], &n2.nu_hat[0], cu),
                stage3(&y0.su[1], &n2.nu_hat[1], cu),
                stage3(&y0.su[2], &n2.nu_hat[2], cu),
            ];
            let sh3 = [
                stage3(&y0.sh[0], &n2.nh_hat[0], ch),
                stage3(&y0.sh[1], &n2.nh_hat[1], ch),
                stage3(&y0.sh[2], &n2.nh_hat[2], ch),
            ];
            let st3 = if_stage(&{
                let mut a = y0.st.clone();
                a.diffuse(ct, dt / 3.0);
                a
            }, &n2.ntheta_hat, 2.0 * dt / 3.0, ct, dt / 3.0);
            // the helper above composes E(dt/3) twice for the linear part,
            // matching E(2dt/3) exactly since the factors commute

            let u3 = inverse_vector(&su3, true);
            let h3 = inverse_vector(&sh3, true);
            let theta3 = st3.inverse();
            let rho3 = advect_density(&state.rho, &u2, 2.0 * dt / 3.0)?;
            let n3 = evaluate(&rho3, &u3, &h3, &theta3, state.time + 2.0 * dt / 3.0, &ctx)?;

            // y_{n+1} = E(dt) y_n + dt [ 1/4 E(dt) N1 + 3/4 E(dt/3) N3 ]
            let full = |y: &Spectrum, k1: &Spectrum, k3: &Spectrum, c: f64| -> Spectrum {
                let mut a = y.clone();
                a.diffuse(c, dt);
                let mut b1 = k1.clone();
                b1.diffuse(c, dt);
                let mut b3 = k3.clone();
                b3.diffuse(c, dt / 3.0);
                a.add_scaled(&b1, 0.25 * dt);
                a.add_scaled(&b3, 0.75 * dt);
                a
            };
            let su_new = [
                full(&y0.su[0], &n1[0].nu_hat[0], &n3.nu_hat[0], cu),
                full(&y0.su[1], &n1[0].nu_hat[1], &n3.nu_hat[1], cu),
                full(&y0.su[2], &n1[0].nu_hat[2], &n3.nu_hat[2], cu),
            ];
            let sh_new = [
                full(&y0.sh[0], &n1[0].nh_hat[0], &n3.nh_hat[0], ch),
                full(&y0.sh[1], &n1[0].nh_hat[1], &n3.nh_hat[1], ch),
                full(&y0.sh[2], &n1[0].nh_hat[2], &n3.nh_hat[2], ch),
            ];
            let st_new = full(&y0.st, &n1[0].ntheta_hat, &n3.ntheta_hat, ct);
            // midpoint-accurate trace velocity for the full density step
            let trace_u = u2.add(&u3).scale(0.5);
            (su_new, sh_new, st_new, trace_u)
        }
    };

    let rho_new = advect_density(&state.rho, &trace_u, dt)?;

    // projection after the step kills divergence reintroduced by roundoff
    leray_project_spectra(&mut su_new);
    leray_project_spectra(&mut sh_new);
    let u_new = inverse_vector(&su_new, true);
    let h_new = inverse_vector(&sh_new, true);
    let mut theta_new = st_new.inverse();

    let theta_min_pre_clip = theta_new.min();
    let mut clipped_thermal_mass = 0.0;
    if theta_min_pre_clip < 0.0 {
        let rho_d = rho_new.data();
        let cell = grid.cell_volume();
        for (i, v) in theta_new.data_mut().iter_mut().enumerate() {
            if *v < 0.0 {
                clipped_thermal_mass += constants.c_v * rho_d[i] * (-*v) * cell;
                *v = 0.0;
            }
        }
    }

    let time = state.time + dt;
    let next = State {
        rho: rho_new,
        u: u_new,
        h: h_new,
        theta: theta_new,
        time,
    };
    nan_fault(&next, time)?;
    Ok((
        next,
        StepReport {
            dt,
            rho_bar,
            theta_min_pre_clip,
            clipped_thermal_mass,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Grid;
    use approx::assert_relative_eq;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn constants() -> PhysicalConstants {
        PhysicalConstants::new(0.01, 0.05, 1.0, 0.1).unwrap()
    }

    fn config() -> SchemeConfig {
        SchemeConfig {
            cfl_number: 0.5,
            density_floor: 1e-6,
            dealias: true,
            max_dt: 1e-3,
            substep_scheme: SubstepScheme::Rk2Imex,
        }
    }

    fn solenoidal(grid: Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> VectorField {
        crate::spectral::leray_project(&VectorField::from_fn(grid, f))
    }

    #[test]
    fn constants_must_be_positive() {
        assert!(PhysicalConstants::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, 1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn cfl_dt_examples() {
        let grid = Grid::new(64, TAU).unwrap();
        let mut cfg = config();
        cfg.max_dt = 10.0;
        let zero = State {
            rho: ScalarField::constant(grid, 1.0),
            ..State::zeros(grid)
        };
        assert_eq!(cfl_dt(&zero, &cfg, &constants()), 10.0);

        let mut st = zero.clone();
        st.u = VectorField::from_fn(grid, |_, _, _| [1.0, 0.0, 0.0]);
        let dt = cfl_dt(&st, &cfg, &constants());
        assert_relative_eq!(dt, 0.5 * TAU / 64.0, max_relative = 1e-12);

        let mut st2 = st.clone();
        st2.u = st.u.scale(2.0);
        assert_relative_eq!(
            cfl_dt(&st2, &cfg, &constants()),
            dt / 2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_state_steps_to_zero() {
        let grid = Grid::new(16, TAU).unwrap();
        let mut st = State::zeros(grid);
        st.rho = ScalarField::constant(grid, 1.0);
        let (next, rep) = step(&st, &config(), &constants()).unwrap();
        assert_eq!(next.time, 1e-3);
        assert!(next.u.max_magnitude() == 0.0);
        assert!(next.h.max_magnitude() == 0.0);
        assert_eq!(next.theta.max(), 0.0);
        assert_eq!(rep.clipped_thermal_mass, 0.0);
    }

    /// Amplitude of the `cos(x)` component of a scalar field on the 2 pi box.
    fn cos_x_amplitude(f: &ScalarField) -> f64 {
        let s = Spectrum::forward(f);
        2.0 * s.mode(1, 0, 0).re / f.grid().num_points() as f64
    }

    #[test]
    fn pure_heat_matches_heat_kernel() {
        // theta0 = 1 + cos x, kappa = 0.1, c_v = 1, rho = 1: the cos mode
        // decays like exp(-0.1 t); at t = 1 the factor is 0.904837...
        let grid = Grid::new(16, TAU).unwrap();
        let c = PhysicalConstants::new(0.01, 0.05, 1.0, 0.1).unwrap();
        let mut st = State::zeros(grid);
        st.rho = ScalarField::constant(grid, 1.0);
        st.theta = ScalarField::from_fn(grid, |x, _, _| 1.0 + x.cos());
        let cfg = config();
        for _ in 0..1000 {
            let (next, _) = step(&st, &cfg, &c).unwrap();
            st = next;
        }
        assert_relative_eq!(st.time, 1.0, max_relative = 1e-12);
        let amp = cos_x_amplitude(&st.theta);
        assert_relative_eq!(amp, (-0.1_f64).exp(), epsilon = 1e-5);
    }

    #[test]
    fn pure_induction_decay_matches_heat_kernel() {
        // H = (sin z, 0, 0), nu = 0.05: amplitude factor exp(-0.1) at t = 2
        let grid = Grid::new(16, TAU).unwrap();
        let c = constants();
        let mut st = State::zeros(grid);
        st.rho = ScalarField::constant(grid, 1.0);
        st.h = {
            let mut v = VectorField::from_fn(grid, |_, _, z| [z.sin(), 0.0, 0.0]);
            v.set_solenoidal(true);
            v
        };
        let mut cfg = config();
        cfg.max_dt = 2e-3;
        for _ in 0..1000 {
            let (next, _) = step_with_dt(&st, 2e-3, &cfg, &c).unwrap();
            st = next;
        }
        let s = Spectrum::forward(st.h.x());
        let amp = 2.0 * s.mode(0, 0, 1).im / grid.num_points() as f64;
        // sin z has coefficient amplitude 1/(2i); the integrating factor makes
        // pure diffusion exact, so agreement is to roundoff
        assert_relative_eq!(-amp, (-0.1_f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn aligned_fields_cancel_induction_transport() {
        let grid = Grid::new(16, TAU).unwrap();
        let c = constants();
        let w = solenoidal(grid, |x, y, z| {
            [(y).sin() * (z).cos(), (z).sin() * (x).cos(), (x).sin() * (y).cos()]
        });
        let st = State {
            rho: ScalarField::constant(grid, 1.0),
            u: w.clone(),
            h: w.clone(),
            theta: ScalarField::zeros(grid),
            time: 0.0,
        };
        let rhs = induction_rhs(&st, &c, true).unwrap();
        let lap = crate::spectral::laplacian_vector(&st.h).scale(c.nu);
        let lap = crate::spectral::dealias_vector(&lap);
        assert!(
            rhs.sub(&lap).max_magnitude() < 1e-10,
            "transport terms failed to cancel"
        );
    }

    #[test]
    fn momentum_rhs_pure_shear_is_viscous_decay() {
        // u = (sin y, 0, 0) on the 2 pi box, rho = 1, H = 0: the convective
        // term vanishes and du/dt = mu Lap(u) = -mu u
        let grid = Grid::new(16, TAU).unwrap();
        let c = constants();
        let st = State {
            rho: ScalarField::constant(grid, 1.0),
            u: {
                let mut v = VectorField::from_fn(grid, |_, y, _| [y.sin(), 0.0, 0.0]);
                v.set_solenoidal(true);
                v
            },
            h: VectorField::zeros(grid),
            theta: ScalarField::zeros(grid),
            time: 0.0,
        };
        let rhs = momentum_rhs(&st, &c, 1e-6, true).unwrap();
        let expect = st.u.scale(-c.mu);
        assert!(rhs.sub(&expect).max_magnitude() < 1e-10);
    }

    #[test]
    fn momentum_rhs_single_mode_magnetic_force() {
        // u = 0, H = (sin y, sin z, sin x): the force (H.grad)H has the
        // closed form (sin z cos y, sin x cos z, sin y cos x); the operator
        // output must equal its projection
        let grid = Grid::new(16, TAU).unwrap();
        let c = constants();
        let st = State {
            rho: ScalarField::constant(grid, 1.0),
            u: VectorField::zeros(grid),
            h: {
                let mut v = VectorField::from_fn(grid, |x, y, z| [y.sin(), z.sin(), x.sin()]);
                v.set_solenoidal(true);
                v
            },
            theta: ScalarField::zeros(grid),
            time: 0.0,
        };
        let rhs = momentum_rhs(&st, &c, 1e-6, true).unwrap();
        let force = VectorField::from_fn(grid, |x, y, z| {
            [z.sin() * y.cos(), x.sin() * z.cos(), y.sin() * x.cos()]
        });
        let expect = crate::spectral::leray_project(&force);
        assert!(rhs.sub(&expect).max_magnitude() < 1e-9);
    }

    #[test]
    fn split_and_full_evaluations_agree() {
        // residual split + integrating-factor part == full explicit operator
        let grid = Grid::new(16, TAU).unwrap();
        let c = constants();
        let rho = ScalarField::from_fn(grid, |x, y, _| 1.0 + 0.2 * (x).sin() * (y).cos());
        let st = State {
            rho,
            u: solenoidal(grid, |x, y, z| [(y + z).sin(), (x).cos(), (x + y).sin()]),
            h: solenoidal(grid, |x, y, z| [(z).sin(), (x + z).cos(), (y).sin()]),
            theta: ScalarField::from_fn(grid, |x, _, z| 1.0 + 0.5 * (x + z).cos()),
            time: 0.0,
        };
        let full = momentum_rhs(&st, &c, 1e-6, true).unwrap();

        let rho_bar = st.rho.mean();
        let ctx = EvalContext {
            constants: c,
            density_floor: 1e-6,
            dealias: true,
            split: DiffusionSplit::ImexResidual { rho_bar },
        };
        let ev = evaluate(&st.rho, &st.u, &st.h, &st.theta, 0.0, &ctx).unwrap();
        let residual = inverse_vector(&ev.nu_hat, true);
        // add back the integrating-factor part (mu / rho_bar) Lap(u),
        // dealiased like the operator output
        let lap = crate::spectral::laplacian_vector(&st.u).scale(c.mu / rho_bar);
        let lap = crate::spectral::dealias_vector(&lap);
        let recombined = residual.add(&lap);
        let scale = full.max_magnitude();
        assert!(
            full.sub(&recombined).max_magnitude() < 1e-10 * scale,
            "split recombination mismatch"
        );
    }

    fn small_mhd_state(grid: Grid) -> State {
        State {
            rho: ScalarField::from_fn(grid, |x, y, _| 1.0 + 0.2 * x.sin() * y.cos()),
            u: solenoidal(grid, |x, y, z| {
                [
                    0.3 * x.sin() * y.cos() * z.cos(),
                    -0.3 * x.cos() * y.sin() * z.cos(),
                    0.0,
                ]
            }),
            h: solenoidal(grid, |_, y, z| [0.1 * (y + z).sin(), 0.1 * z.cos(), 0.1 * y.sin()]),
            theta: ScalarField::from_fn(grid, |x, z, _| 1.0 + 0.3 * (x - z).cos()),
            time: 0.0,
        }
    }

    fn run_to(grid_state: &State, t_end: f64, dt: f64, scheme: SubstepScheme) -> State {
        let mut cfg = config();
        cfg.max_dt = dt;
        cfg.substep_scheme = scheme;
        let c = constants();
        let mut st = grid_state.clone();
        let steps = (t_end / dt).round() as usize;
        for _ in 0..steps {
            let (next, _) = step_with_dt(&st, dt, &cfg, &c).unwrap();
            st = next;
        }
        st
    }

    fn state_distance(a: &State, b: &State) -> f64 {
        a.u.sub(&b.u)
            .max_magnitude()
            .max(a.h.sub(&b.h).max_magnitude())
            .max({
                let d = a.theta.sub(&b.theta);
                d.max().abs().max(d.min().abs())
            })
    }

    #[test]
    fn rk2_is_second_order_in_dt() {
        let grid = Grid::new(16, TAU).unwrap();
        let st0 = small_mhd_state(grid);
        let t = 0.08;
        let fine = run_to(&st0, t, 0.0025, SubstepScheme::Rk2Imex);
        let e1 = state_distance(&run_to(&st0, t, 0.02, SubstepScheme::Rk2Imex), &fine);
        let e2 = state_distance(&run_to(&st0, t, 0.01, SubstepScheme::Rk2Imex), &fine);
        let ratio = e1 / e2;
        assert!(ratio > 3.2, "observed dt-refinement ratio {ratio}");
    }

    #[test]
    fn rk3_tracks_rk2_and_refines_faster() {
        // n = 32: at coarser resolution the accumulated semi-Lagrangian
        // interpolation error (which scales like h^4 / dt) floors the
        // refinement study and hides the third-order gain
        let grid = Grid::new(32, TAU).unwrap();
        let st0 = small_mhd_state(grid);
        let t = 0.08;
        let fine = run_to(&st0, t, 0.0025, SubstepScheme::Rk3Imex);
        let e1 = state_distance(&run_to(&st0, t, 0.02, SubstepScheme::Rk3Imex), &fine);
        let e2 = state_distance(&run_to(&st0, t, 0.01, SubstepScheme::Rk3Imex), &fine);
        let ratio = e1 / e2;
        assert!(ratio > 3.2, "observed dt-refinement ratio {ratio}");
        // the two schemes agree on the same trajectory
        let rk2 = run_to(&st0, t, 0.0025, SubstepScheme::Rk2Imex);
        assert!(state_distance(&rk2, &fine) < 1e-5);
    }

    #[test]
    fn density_range_is_preserved_across_steps() {
        let grid = Grid::new(16, TAU).unwrap();
        let st0 = small_mhd_state(grid);
        let lo = st0.rho.min();
        let hi = st0.rho.max();
        let mut st = st0;
        let mut cfg = config();
        cfg.max_dt = 0.01;
        for _ in 0..20 {
            let (next, _) = step(&st, &cfg, &constants()).unwrap();
            st = next;
        }
        assert!(st.rho.min() >= lo - 1e-14);
        assert!(st.rho.max() <= hi + 1e-14);
    }

    #[test]
    fn solenoidality_enforced_after_steps() {
        let grid = Grid::new(16, TAU).unwrap();
        let mut st = small_mhd_state(grid);
        let mut cfg = config();
        cfg.max_dt = 0.01;
        for _ in 0..5 {
            let (next, _) = step(&st, &cfg, &constants()).unwrap();
            st = next;
        }
        assert!(crate::spectral::max_divergence_mode(&st.u) < 1e-10);
        assert!(crate::spectral::max_divergence_mode(&st.h) < 1e-10);
        assert!(st.u.is_solenoidal() && st.h.is_solenoidal());
    }

    #[test]
    fn vacuum_with_zero_floor_faults() {
        let grid = Grid::new(16, TAU).unwrap();
        let mut st = small_mhd_state(grid);
        st.rho = ScalarField::from_fn(grid, |x, _, _| (1.0 - x.cos()) / 2.0); // touches zero
        let mut cfg = config();
        cfg.density_floor = 0.0;
        match step(&st, &cfg, &constants()) {
            Err(Error::VacuumFault { .. }) => {}
            other => panic!("expected vacuum fault, got {other:?}"),
        }
    }

    #[test]
    fn nan_input_faults() {
        let grid = Grid::new(16, TAU).unwrap();
        let mut st = small_mhd_state(grid);
        st.u.component_mut(0).data_mut()[0] = f64::NAN;
        assert!(step(&st, &config(), &constants()).is_err());
    }

    #[test]
    fn cfl_violation_rejected_by_step() {
        let grid = Grid::new(16, TAU).unwrap();
        let st = small_mhd_state(grid);
        let err = step_with_dt(&st, 1e3, &config(), &constants());
        match err {
            Err(Error::CflViolation { .. }) => {}
            other => panic!("expected CFL violation, got {other:?}"),
        }
    }
}
