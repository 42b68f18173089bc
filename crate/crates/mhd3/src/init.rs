//! Deterministic initial-data generation for the scenario presets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{DensityProfile, Preset, ScenarioSpec};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::solver::State;
use crate::spectral::leray_project;
use crate::Result;

fn density(spec: &ScenarioSpec, grid: Grid) -> ScalarField {
    let base = spec.density.base;
    match spec.density.profile {
        DensityProfile::Constant => ScalarField::constant(grid, base),
        DensityProfile::Blob => {
            // smooth well centered at the origin; contrast = base carves a
            // region of exact vacuum (the clamped squared hinge is C^1)
            let contrast = spec.density.contrast;
            let l = spec.box_length;
            let tau = 2.0 * std::f64::consts::PI;
            ScalarField::from_fn(grid, move |x, y, z| {
                let g = (3.0
                    - (tau * x / l).cos()
                    - (tau * y / l).cos()
                    - (tau * z / l).cos())
                    / 6.0;
                // g in [0, 1], zero at the origin; hinge below 0.15
                let s = ((g - 0.15).max(0.0) / 0.85).powi(2).min(1.0);
                base - contrast + contrast * s
            })
        }
    }
}

fn taylor_green(grid: Grid, amp: f64) -> VectorField {
    let l = grid.box_length();
    let k = 2.0 * std::f64::consts::PI / l;
    let mut v = VectorField::from_fn(grid, move |x, y, z| {
        [
            amp * (k * x).sin() * (k * y).cos() * (k * z).cos(),
            -amp * (k * x).cos() * (k * y).sin() * (k * z).cos(),
            0.0,
        ]
    });
    v.set_solenoidal(true); // exactly divergence-free by construction
    v
}

fn abc_mode(grid: Grid, amp: f64) -> VectorField {
    let l = grid.box_length();
    let k = 2.0 * std::f64::consts::PI / l;
    let mut v = VectorField::from_fn(grid, move |x, y, z| {
        [amp * (k * z).sin(), amp * (k * x).sin(), amp * (k * y).sin()]
    });
    v.set_solenoidal(true);
    v
}

fn random_solenoidal(grid: Grid, rng: &mut ChaCha8Rng, amp: f64) -> VectorField {
    let raw = VectorField::from_components(
        crate::lorentz::random_bandlimited(grid, rng, 4, 10),
        crate::lorentz::random_bandlimited(grid, rng, 4, 10),
        crate::lorentz::random_bandlimited(grid, rng, 4, 10),
    )
    .expect("same grid");
    let projected = leray_project(&raw);
    let peak = projected.max_magnitude();
    if peak == 0.0 {
        projected
    } else {
        projected.scale(amp / peak)
    }
}

/// Deterministic initial state for `(preset, seed)`.
pub fn generate_initial_data(spec: &ScenarioSpec) -> Result<State> {
    spec.validate()?;
    let grid = Grid::new(spec.n, spec.box_length)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let l = spec.box_length;
    let k = 2.0 * std::f64::consts::PI / l;
    let a = &spec.amplitudes;

    let (rho, u, h, theta) = match spec.preset {
        Preset::PureHeat => {
            // nonnegative single-mode profile: amplitude * (1 + cos(k x))
            let amp = a.theta;
            let theta = ScalarField::from_fn(grid, move |x, _, _| amp * (1.0 + (k * x).cos()));
            (
                ScalarField::constant(grid, spec.density.base),
                VectorField::zeros(grid),
                VectorField::zeros(grid),
                theta,
            )
        }
        Preset::TaylorGreen => {
            let u = taylor_green(grid, a.u);
            let h = abc_mode(grid, a.h);
            let theta = ScalarField::constant(grid, a.theta);
            (density(spec, grid), u, h, theta)
        }
        Preset::AlignedMhdMode => {
            let w = abc_mode(grid, a.u);
            let h = if a.u == 0.0 {
                abc_mode(grid, a.h)
            } else {
                w.scale(a.h / a.u)
            };
            let theta = ScalarField::constant(grid, a.theta);
            (density(spec, grid), w, h, theta)
        }
        Preset::VacuumBlob => {
            // force the blob profile with full contrast: min rho = 0
            let mut dspec = spec.clone();
            dspec.density.profile = DensityProfile::Blob;
            dspec.density.contrast = dspec.density.base;
            let rho = density(&dspec, grid);
            let u = taylor_green(grid, a.u);
            let h = abc_mode(grid, a.h);
            let theta = ScalarField::constant(grid, a.theta);
            (rho, u, h, theta)
        }
        Preset::RandomBandlimited => {
            let u = random_solenoidal(grid, &mut rng, a.u);
            let h = random_solenoidal(grid, &mut rng, a.h);
            let raw = crate::lorentz::random_bandlimited(grid, &mut rng, 4, 10);
            let peak = raw
                .data()
                .iter()
                .fold(0.0_f64, |acc, &v| acc.max(v.abs()))
                .max(1e-300);
            let amp = a.theta;
            let theta = raw.map(move |v| amp * (1.0 + 0.5 * v / peak));
            (density(spec, grid), u, h, theta)
        }
    };
    State::new(rho, u, h, theta, 0.0)
}

/// Order-sensitive digest of every sample, for golden regression tests.
pub fn state_checksum(state: &State) -> u64 {
    let mut acc: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: f64| {
        acc ^= v.to_bits();
        acc = acc.wrapping_mul(0x1000_0000_01b3);
    };
    for &v in state.rho.data() {
        eat(v);
    }
    for i in 0..3 {
        for &v in state.u.component(i).data() {
            eat(v);
        }
    }
    for i in 0..3 {
        for &v in state.h.component(i).data() {
            eat(v);
        }
    }
    for &v in state.theta.data() {
        eat(v);
    }
    eat(state.time);
    acc
}
