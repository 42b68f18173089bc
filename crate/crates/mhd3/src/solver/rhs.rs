//! Explicit right-hand sides of the coupled system, shared between the public
//! single-equation operators and the fused stage evaluator of the stepper.

use crate::field::{ScalarField, VectorField};
use crate::spectral::{forward_vector, inverse_vector, leray_project_spectra, Spectrum};
use crate::{Error, Result};

use super::{PhysicalConstants, State};

/// What the stiff diffusion terms should contribute to the explicit part.
#[derive(Debug, Clone, Copy)]
pub(crate) enum DiffusionSplit {
    /// Full diffusion included explicitly (the public operators).
    Full,
    /// Integrating-factor splitting around the mean density `rho_bar`: the
    /// factors absorb `mu/rho_bar` and `kappa/(c_v rho_bar)`, leaving only the
    /// variable-coefficient residuals here. The constant-coefficient magnetic
    /// diffusion is absorbed entirely.
    ImexResidual { rho_bar: f64 },
}

/// Explicit tendencies in spectral space, projected and dealiased.
pub(crate) struct ExplicitEval {
    pub nu_hat: [Spectrum; 3],
    pub nh_hat: [Spectrum; 3],
    pub ntheta_hat: Spectrum,
}

pub(crate) struct EvalContext {
    pub constants: PhysicalConstants,
    pub density_floor: f64,
    pub dealias: bool,
    pub split: DiffusionSplit,
}

pub(crate) fn evaluate(
    rho: &ScalarField,
    u: &VectorField,
    h: &VectorField,
    theta: &ScalarField,
    time: f64,
    ctx: &EvalContext,
) -> Result<ExplicitEval> {
    let grid = rho.grid();
    let c = &ctx.constants;
    if ctx.density_floor == 0.0 && rho.min() <= 0.0 {
        return Err(Error::VacuumFault { time });
    }

    let mut su = forward_vector(u);
    let mut sh = forward_vector(h);
    let mut st = Spectrum::forward(theta);
    if ctx.dealias {
        for s in su.iter_mut().chain(sh.iter_mut()) {
            s.dealias();
        }
        st.dealias();
    }

    // physical fields consistent with the (possibly truncated) spectra
    let up: [ScalarField; 3] = [su[0].inverse(), su[1].inverse(), su[2].inverse()];
    let hp: [ScalarField; 3] = [sh[0].inverse(), sh[1].inverse(), sh[2].inverse()];

    // gu[i][j] = d u_i / d x_j
    let grad_of = |s: &Spectrum| -> [ScalarField; 3] {
        [
            s.derivative(0).inverse(),
            s.derivative(1).inverse(),
            s.derivative(2).inverse(),
        ]
    };
    let gu: [[ScalarField; 3]; 3] = [grad_of(&su[0]), grad_of(&su[1]), grad_of(&su[2])];
    let gh: [[ScalarField; 3]; 3] = [grad_of(&sh[0]), grad_of(&sh[1]), grad_of(&sh[2])];
    let gt = grad_of(&st);

    let lap_u: [ScalarField; 3] = [
        su[0].laplacian().inverse(),
        su[1].laplacian().inverse(),
        su[2].laplacian().inverse(),
    ];
    let lap_t = st.laplacian().inverse();

    let npts = grid.num_points();
    let floor = ctx.density_floor;
    let rho_d = rho.data();

    // momentum: -u.grad(u) + (mu Lap(u) + H.grad(H)) / max(rho, floor),
    // minus the integrating-factor part when splitting is active
    let mut nu = [
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
    ];
    for i in 0..3 {
        let d = nu[i].data_mut();
        for p in 0..npts {
            let conv: f64 = (0..3).map(|j| up[j].data()[p] * gu[i][j].data()[p]).sum();
            let lorentz: f64 = (0..3).map(|j| hp[j].data()[p] * gh[i][j].data()[p]).sum();
            let rho_f = rho_d[p].max(floor);
            let mut v = -conv + (c.mu * lap_u[i].data()[p] + lorentz) / rho_f;
            if let DiffusionSplit::ImexResidual { rho_bar } = ctx.split {
                v -= c.mu / rho_bar * lap_u[i].data()[p];
            }
            d[p] = v;
        }
    }

    // induction transport: -u.grad(H) + H.grad(u); diffusion handled below
    let mut nh = [
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
    ];
    for i in 0..3 {
        let d = nh[i].data_mut();
        for p in 0..npts {
            let conv: f64 = (0..3).map(|j| up[j].data()[p] * gh[i][j].data()[p]).sum();
            let stretch: f64 = (0..3).map(|j| hp[j].data()[p] * gu[i][j].data()[p]).sum();
            d[p] = stretch - conv;
        }
    }

    // temperature: [-c_v rho u.grad(theta) + kappa Lap(theta)
    //               + 2 mu |D(u)|^2 + nu |curl H|^2] / (c_v max(rho, floor))
    let mut ntheta = ScalarField::zeros(grid);
    {
        let d = ntheta.data_mut();
        for p in 0..npts {
            let conv: f64 = (0..3).map(|j| up[j].data()[p] * gt[j].data()[p]).sum();
            let mut def_sq = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let dij = 0.5 * (gu[i][j].data()[p] + gu[j][i].data()[p]);
                    def_sq += dij * dij;
                }
            }
            let curl_h = [
                gh[2][1].data()[p] - gh[1][2].data()[p],
                gh[0][2].data()[p] - gh[2][0].data()[p],
                gh[1][0].data()[p] - gh[0][1].data()[p],
            ];
            let curl_sq: f64 = curl_h.iter().map(|v| v * v).sum();
            let heat = 2.0 * c.mu * def_sq + c.nu * curl_sq;
            let rho_f = rho_d[p].max(floor);
            let mut v =
                (-c.c_v * rho_d[p] * conv + c.kappa * lap_t.data()[p] + heat) / (c.c_v * rho_f);
            if let DiffusionSplit::ImexResidual { rho_bar } = ctx.split {
                v -= c.kappa / (c.c_v * rho_bar) * lap_t.data()[p];
            }
            d[p] = v;
        }
    }

    let mut nu_hat = [
        Spectrum::forward(&nu[0]),
        Spectrum::forward(&nu[1]),
        Spectrum::forward(&nu[2]),
    ];
    leray_project_spectra(&mut nu_hat);
    let mut nh_hat = [
        Spectrum::forward(&nh[0]),
        Spectrum::forward(&nh[1]),
        Spectrum::forward(&nh[2]),
    ];
    leray_project_spectra(&mut nh_hat);
    if let DiffusionSplit::Full = ctx.split {
        // constant-coefficient magnetic diffusion, solenoidal already
        for i in 0..3 {
            nh_hat[i].add_scaled(&sh[i].laplacian(), c.nu);
        }
    }
    let mut ntheta_hat = Spectrum::forward(&ntheta);
    if ctx.dealias {
        for s in nu_hat.iter_mut().chain(nh_hat.iter_mut()) {
            s.dealias();
        }
        ntheta_hat.dealias();
    }

    Ok(ExplicitEval {
        nu_hat,
        nh_hat,
        ntheta_hat,
    })
}

fn full_ctx(constants: &PhysicalConstants, density_floor: f64, dealias: bool) -> EvalContext {
    EvalContext {
        constants: *constants,
        density_floor,
        dealias,
        split: DiffusionSplit::Full,
    }
}

/// `du/dt` with every term explicit (projection included).
pub fn momentum_rhs(
    state: &State,
    constants: &PhysicalConstants,
    density_floor: f64,
    dealias: bool,
) -> Result<VectorField> {
    let ev = evaluate(
        &state.rho,
        &state.u,
        &state.h,
        &state.theta,
        state.time,
        &full_ctx(constants, density_floor, dealias),
    )?;
    Ok(inverse_vector(&ev.nu_hat, true))
}

/// `dH/dt` with every term explicit (projection included).
pub fn induction_rhs(
    state: &State,
    constants: &PhysicalConstants,
    dealias: bool,
) -> Result<VectorField> {
    let ev = evaluate(
        &state.rho,
        &state.u,
        &state.h,
        &state.theta,
        state.time,
        // the induction equation never divides by rho; pass a benign floor
        &full_ctx(constants, f64::MIN_POSITIVE, dealias),
    )?;
    Ok(inverse_vector(&ev.nh_hat, true))
}

/// `dtheta/dt` with every term explicit.
pub fn temperature_rhs(
    state: &State,
    constants: &PhysicalConstants,
    density_floor: f64,
    dealias: bool,
) -> Result<ScalarField> {
    let ev = evaluate(
        &state.rho,
        &state.u,
        &state.h,
        &state.theta,
        state.time,
        &full_ctx(constants, density_floor, dealias),
    )?;
    Ok(ev.ntheta_hat.inverse())
}
