//! Discrete audits of the energy identities and the running blowup/smallness
//! functionals, plus the small-data bootstrap certificate.

use serde::Serialize;

use crate::field::{lp_norm, ScalarField, VectorField};
use crate::lorentz::weak_lp_norm;
use crate::solver::{PhysicalConstants, State};
use crate::spectral::Spectrum;
use crate::{Error, Result};

/// `int |grad v|^2 dx` summed over the components.
pub fn grad_l2_sq(v: &VectorField) -> f64 {
    (0..3)
        .map(|i| Spectrum::forward(v.component(i)).grad_l2_norm_sq())
        .sum()
}

/// `int rho |u|^2 dx`.
pub fn kinetic_energy(state: &State) -> f64 {
    let mut sum = 0.0;
    let rho = state.rho.data();
    for i in 0..state.grid().num_points() {
        let a = state.u.x().data()[i];
        let b = state.u.y().data()[i];
        let c = state.u.z().data()[i];
        sum += rho[i] * (a * a + b * b + c * c);
    }
    sum * state.grid().cell_volume()
}

/// `int |H|^2 dx`.
pub fn magnetic_energy(state: &State) -> f64 {
    lp_norm(&state.h, 2.0).expect("p = 2 valid").powi(2)
}

/// `c_v int rho theta dx`.
pub fn thermal_energy(state: &State, constants: &PhysicalConstants) -> f64 {
    constants.c_v * state.rho.zip_with(&state.theta, |a, b| a * b).integral()
}

/// One row of the discrete energy audit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BudgetReport {
    pub time: f64,
    pub kinetic: f64,
    pub magnetic: f64,
    pub thermal: f64,
    pub viscous_dissipation: f64,
    pub ohmic_dissipation: f64,
    /// Drift of the kinetic+magnetic balance: `d/dt (K + M)/2` plus the
    /// midpoint dissipation; zero for the continuous system.
    pub identity_residual_36: f64,
    /// Drift rate of the conserved total energy.
    pub identity_residual_313: f64,
}

/// Audit of the two energy identities across one step `prev -> next`.
pub fn audit_energy(
    prev: &State,
    next: &State,
    dt: f64,
    constants: &PhysicalConstants,
) -> Result<BudgetReport> {
    if prev.grid() != next.grid() {
        return Err(Error::GridMismatch(
            "audit requires states on one grid".into(),
        ));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "audit requires dt > 0, got {dt}"
        )));
    }
    let km = |s: &State| kinetic_energy(s) + magnetic_energy(s);
    let dissipation = |s: &State| {
        constants.mu * grad_l2_sq(&s.u) + constants.nu * grad_l2_sq(&s.h)
    };
    // conserved total: the kinetic/magnetic halves lose to dissipation at
    // exactly the rate the viscous + ohmic heating feeds the thermal part
    let e_tot =
        |s: &State| 0.5 * (kinetic_energy(s) + magnetic_energy(s)) + thermal_energy(s, constants);

    let visc_next = constants.mu * grad_l2_sq(&next.u);
    let ohm_next = constants.nu * grad_l2_sq(&next.h);
    let diss_mid = 0.5 * (dissipation(prev) + dissipation(next));

    Ok(BudgetReport {
        time: next.time,
        kinetic: kinetic_energy(next),
        magnetic: magnetic_energy(next),
        thermal: thermal_energy(next, constants),
        viscous_dissipation: visc_next,
        ohmic_dissipation: ohm_next,
        identity_residual_36: 0.5 * (km(next) - km(prev)) / dt + diss_mid,
        identity_residual_313: (e_tot(next) - e_tot(prev)) / dt,
    })
}

/// Space-time exponents of the weak-Serrin functional.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SerrinConfig {
    pub s: f64,
    pub r: f64,
    /// Optional alert threshold: the monitor flags the run once the
    /// accumulated integral exceeds `m0^s`.
    pub m0: Option<f64>,
}

impl SerrinConfig {
    pub fn new(s: f64, r: f64, m0: Option<f64>) -> Result<Self> {
        if !(r > 3.0) {
            return Err(Error::InvalidParameter(format!(
                "Serrin exponent r must exceed 3, got {r}"
            )));
        }
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Serrin exponent s must be positive, got {s}"
            )));
        }
        let index = 2.0 / s + if r.is_infinite() { 0.0 } else { 3.0 / r };
        if index > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "Serrin indices must satisfy 2/s + 3/r <= 1, got {index}"
            )));
        }
        Ok(Self { s, r, m0 })
    }
}

impl Default for SerrinConfig {
    fn default() -> Self {
        Self {
            s: 4.0,
            r: 6.0,
            m0: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Integrands {
    time: f64,
    serrin: f64,
    gradu4: f64,
    hq: f64,
}

/// Running accumulators over a run; all integrals use trapezoidal quadrature
/// on step boundaries and are monotone non-decreasing in time.
#[derive(Debug, Clone)]
pub struct DiagnosticsLedger {
    pub budgets: Vec<BudgetReport>,
    /// running `int ||u||_{weak-r}^s dt`
    pub serrin_integral: f64,
    /// running `int ||grad u||_2^4 dt`
    pub gradu4_integral: f64,
    /// running `sup_t ||H||_q^q`
    pub hq_sup: f64,
    /// running `int int |H|^{q-2} |grad H|^2 dx dt`
    pub hq_integral: f64,
    /// running `sup_t (mu ||grad u||_2^2 + nu ||grad H||_2^2)`
    pub e_sup: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub theta_min: f64,
    pub serrin_alert: bool,
    last: Option<Integrands>,
}

impl Default for DiagnosticsLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl DiagnosticsLedger {
    pub fn new() -> Self {
        Self {
            budgets: Vec::new(),
            serrin_integral: 0.0,
            gradu4_integral: 0.0,
            hq_sup: 0.0,
            hq_integral: 0.0,
            e_sup: 0.0,
            rho_min: f64::INFINITY,
            rho_max: f64::NEG_INFINITY,
            theta_min: f64::INFINITY,
            serrin_alert: false,
            last: None,
        }
    }

    /// Resume with previously accumulated totals (checkpoint restart).
    #[allow(clippy::too_many_arguments)]
    pub fn with_accumulators(
        serrin_integral: f64,
        gradu4_integral: f64,
        hq_sup: f64,
        hq_integral: f64,
        e_sup: f64,
        rho_min: f64,
        rho_max: f64,
        theta_min: f64,
    ) -> Self {
        Self {
            serrin_integral,
            gradu4_integral,
            hq_sup,
            hq_integral,
            e_sup,
            rho_min,
            rho_max,
            theta_min,
            ..Self::new()
        }
    }

    /// Fold one state snapshot into every accumulator. Consecutive calls must
    /// be in increasing time order.
    pub fn observe(
        &mut self,
        state: &State,
        constants: &PhysicalConstants,
        serrin: &SerrinConfig,
        q: f64,
    ) -> Result<()> {
        if !(2.0..=12.0).contains(&q) {
            return Err(Error::InvalidParameter(format!(
                "magnetic exponent q must lie in [2, 12], got {q}"
            )));
        }
        let serrin_integrand = if r_is_weak_usable(serrin.r) {
            weak_lp_norm(&state.u, serrin.r)?.powf(serrin.s)
        } else {
            lp_norm(&state.u, f64::INFINITY)?.powf(serrin.s)
        };
        let gradu_sq = grad_l2_sq(&state.u);
        let gradu4 = gradu_sq * gradu_sq;

        // |H|^{q-2} |grad H|^2 integrand and ||H||_q^q
        let (hq_integrand, hq_norm) = {
            let grid = state.grid();
            let mag = state.h.magnitude();
            let mut grad_sq = ScalarField::zeros(grid);
            for i in 0..3 {
                let s = Spectrum::forward(state.h.component(i));
                for axis in 0..3 {
                    let d = s.derivative(axis).inverse();
                    for (acc, &v) in grad_sq.data_mut().iter_mut().zip(d.data()) {
                        *acc += v * v;
                    }
                }
            }
            let mut integrand = 0.0;
            let mut norm_q = 0.0;
            for (&m, &g) in mag.data().iter().zip(grad_sq.data()) {
                integrand += m.powf(q - 2.0) * g;
                norm_q += m.powf(q);
            }
            let cell = grid.cell_volume();
            (integrand * cell, norm_q * cell)
        };

        if let Some(prev) = self.last {
            let dt = state.time - prev.time;
            if dt < 0.0 {
                return Err(Error::InvalidParameter(
                    "ledger observations must be in time order".into(),
                ));
            }
            self.serrin_integral += 0.5 * dt * (prev.serrin + serrin_integrand);
            self.gradu4_integral += 0.5 * dt * (prev.gradu4 + gradu4);
            self.hq_integral += 0.5 * dt * (prev.hq + hq_integrand);
        }
        self.last = Some(Integrands {
            time: state.time,
            serrin: serrin_integrand,
            gradu4,
            hq: hq_integrand,
        });

        self.hq_sup = self.hq_sup.max(hq_norm);
        let e_now = constants.mu * gradu_sq + constants.nu * grad_l2_sq(&state.h);
        self.e_sup = self.e_sup.max(e_now);
        self.rho_min = self.rho_min.min(state.rho.min());
        self.rho_max = self.rho_max.max(state.rho.max());
        self.theta_min = self.theta_min.min(state.theta.min());
        if let Some(m0) = serrin.m0 {
            if self.serrin_integral > m0.powf(serrin.s) {
                self.serrin_alert = true;
            }
        }
        Ok(())
    }

    pub fn push_budget(&mut self, report: BudgetReport) {
        self.budgets.push(report);
    }
}

fn r_is_weak_usable(r: f64) -> bool {
    r.is_finite()
}

/// Initial-data smallness certificate inputs and verdict.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmallnessReport {
    /// `||sqrt(rho0) u0||_2^2 + ||H0||_2^2`
    pub c0: f64,
    /// `mu ||grad u0||_2^2 + nu ||grad H0||_2^2`
    pub g0: f64,
    /// `c0 * (||grad u0||_2^2 + ||grad H0||_2^2)`
    pub product: f64,
    /// `1 / (64 M (mu + nu))`
    pub epsilon0: f64,
    pub m: f64,
    pub passes: bool,
}

pub fn smallness_check(initial: &State, constants: &PhysicalConstants, m: f64) -> Result<SmallnessReport> {
    if !(m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "calibration constant M must be positive, got {m}"
        )));
    }
    let c0 = {
        let mut sum = 0.0;
        let rho = initial.rho.data();
        for i in 0..initial.grid().num_points() {
            let a = initial.u.x().data()[i];
            let b = initial.u.y().data()[i];
            let c = initial.u.z().data()[i];
            sum += rho[i] * (a * a + b * b + c * c);
        }
        sum * initial.grid().cell_volume() + magnetic_energy(initial)
    };
    let gu = grad_l2_sq(&initial.u);
    let gh = grad_l2_sq(&initial.h);
    let g0 = constants.mu * gu + constants.nu * gh;
    let product = c0 * (gu + gh);
    let epsilon0 = 1.0 / (64.0 * m * (constants.mu + constants.nu));
    Ok(SmallnessReport {
        c0,
        g0,
        product,
        epsilon0,
        m,
        passes: product <= epsilon0,
    })
}

/// Outcome of the bootstrap-map scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BootstrapReport {
    /// `M C0 (||grad u0||^2 + ||grad H0||^2) <= 1 / (64 (mu + nu))`
    pub condition_holds: bool,
    pub condition_lhs: f64,
    pub condition_rhs: f64,
    pub g0: f64,
    /// Scan verdict: `Phi(E) <= 2 G0 + (3/4) E` everywhere on `[0, 16 G0]`.
    pub scan_certified: bool,
    /// First scan point violating the contraction, if any.
    pub counterexample: Option<(f64, f64)>,
    /// `8 G0` when the scan certifies the trap.
    pub certified_bound: Option<f64>,
}

const SCAN_POINTS: usize = 100_000;

/// Scan the map `Phi(E) = 2 G0 + sqrt(M C0) E^{3/2} + M C0 E^2` over
/// `[0, 16 G0]` and certify the contraction that traps trajectories below
/// `8 G0`.
pub fn bootstrap_check(
    m: f64,
    c0: f64,
    grad_u0_sq: f64,
    grad_h0_sq: f64,
    mu: f64,
    nu: f64,
) -> Result<BootstrapReport> {
    for (name, v) in [
        ("M", m),
        ("C0", c0),
        ("grad_u0_sq", grad_u0_sq),
        ("grad_h0_sq", grad_h0_sq),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bootstrap input {name} must be finite and >= 0, got {v}"
            )));
        }
    }
    if !(mu > 0.0) || !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bootstrap requires mu, nu > 0, got ({mu}, {nu})"
        )));
    }
    let g0 = mu * grad_u0_sq + nu * grad_h0_sq;
    let condition_lhs = m * c0 * (grad_u0_sq + grad_h0_sq);
    let condition_rhs = 1.0 / (64.0 * (mu + nu));
    let condition_holds = condition_lhs <= condition_rhs * (1.0 + 1e-12);

    let mc0 = m * c0;
    let sqrt_mc0 = mc0.sqrt();
    let phi = |e: f64| 2.0 * g0 + sqrt_mc0 * e.powf(1.5) + mc0 * e * e;
    let mut counterexample = None;
    let top = 16.0 * g0;
    for i in 0..=SCAN_POINTS {
        let e = top * i as f64 / SCAN_POINTS as f64;
        let bound = 2.0 * g0 + 0.75 * e;
        let val = phi(e);
        if val > bound * (1.0 + 1e-12) {
            counterexample = Some((e, val));
            break;
        }
    }
    let scan_certified = counterexample.is_none();
    Ok(BootstrapReport {
        condition_holds,
        condition_lhs,
        condition_rhs,
        g0,
        scan_certified,
        counterexample,
        certified_bound: if scan_certified { Some(8.0 * g0) } else { None },
    })
}

/// Comparison of the running functionals against the a priori bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", content = "component")]
pub enum Verdict {
    WithinTheory,
    BoundExceeded(String),
}

/// Compare `sup E(t)` against `8 G0` and the accumulated
/// `int ||grad u||_2^4 dt` against `(8 G0 / mu)(C0 / (2 mu))`.
pub fn global_regularity_monitor(
    ledger: &DiagnosticsLedger,
    g0: f64,
    c0: f64,
    mu: f64,
) -> Verdict {
    let e_bound = 8.0 * g0;
    if ledger.e_sup > e_bound {
        return Verdict::BoundExceeded(format!(
            "E_sup = {} exceeds 8 G0 = {}",
            ledger.e_sup, e_bound
        ));
    }
    let gradu4_bound = (8.0 * g0 / mu) * (c0 / (2.0 * mu));
    if ledger.gradu4_integral > gradu4_bound {
        return Verdict::BoundExceeded(format!(
            "gradu4_integral = {} exceeds bound {}",
            ledger.gradu4_integral, gradu4_bound
        ));
    }
    Verdict::WithinTheory
}

/// Empirical calibration of the bootstrap constant `M` from the recorded
/// inequality-ensemble maxima: conservative (larger `M` only shrinks the
/// admissible data set).
pub fn calibrate_m(seed: u64, trials: usize, n: usize) -> Result<f64> {
    let ineq = crate::lorentz::run_ensemble(seed, trials, n)?;
    let stokes = crate::stokes::run_ensemble(seed, trials, n)?;
    let base = ineq
        .max_gn_ratio_p4
        .max(ineq.max_gn_ratio_p6)
        .max(ineq.max_holder_ratio)
        .max(ineq.min_embedding_c)
        .max(stokes.max_sum_ratio_r2)
        .max(1.0);
    Ok(base * base)
}
