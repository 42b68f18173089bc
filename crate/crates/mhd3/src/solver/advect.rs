//! Semi-Lagrangian density transport.
//!
//! Characteristics are traced backward with a midpoint rule and the density is
//! interpolated with tricubic Lagrange polynomials, then clamped to the input
//! range so the transport preserves `min rho` and `max rho` exactly.

use rayon::prelude::*;

use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::{Error, Result};

/// The trace must stay well inside one period: `dt * max|u| <= L / 4`.
pub fn advect_cfl_bound(u: &VectorField) -> f64 {
    let speed = u.max_magnitude();
    if speed == 0.0 {
        f64::INFINITY
    } else {
        u.grid().box_length() / (4.0 * speed)
    }
}

/// Periodic tricubic Lagrange interpolation at fractional grid coordinates
/// (units of grid spacing).
fn tricubic(grid: Grid, data: &[f64], gx: f64, gy: f64, gz: f64) -> f64 {
    let n = grid.n() as i64;
    let base = |g: f64| -> (i64, f64) {
        let f = g.floor();
        (f as i64, g - f)
    };
    let (ix, fx) = base(gx);
    let (iy, fy) = base(gy);
    let (iz, fz) = base(gz);
    // Lagrange cubic through nodes at offsets -1, 0, 1, 2
    let weights = |t: f64| -> [f64; 4] {
        [
            -t * (t - 1.0) * (t - 2.0) / 6.0,
            (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0,
            (t + 1.0) * t * (t - 1.0) / 6.0,
        ]
    };
    let wx = weights(fx);
    let wy = weights(fy);
    let wz = weights(fz);
    let nn = grid.n();
    let wrap = |i: i64| -> usize { (i.rem_euclid(n)) as usize };
    let mut acc = 0.0;
    for dz in 0..4 {
        let z = wrap(iz + dz as i64 - 1);
        let mut acc_z = 0.0;
        for dy in 0..4 {
            let y = wrap(iy + dy as i64 - 1);
            let row = &data[grid.idx(0, y, z)..grid.idx(0, y, z) + nn];
            let mut acc_y = 0.0;
            for dx in 0..4 {
                acc_y += wx[dx] * row[wrap(ix + dx as i64 - 1)];
            }
            acc_z += wy[dy] * acc_y;
        }
        acc += wz[dz] * acc_z;
    }
    acc
}

/// One semi-Lagrangian transport step of `rho` by velocity `u` over `dt`.
///
/// `u = 0` (or `dt = 0`) returns the input bit-for-bit.
pub fn advect_density(rho: &ScalarField, u: &VectorField, dt: f64) -> Result<ScalarField> {
    let grid = rho.grid();
    if grid != u.grid() {
        return Err(Error::GridMismatch(
            "density and velocity must share one grid".into(),
        ));
    }
    if !dt.is_finite() || dt < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "advection requires finite dt >= 0, got {dt}"
        )));
    }
    let bound = advect_cfl_bound(u);
    if dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    if dt == 0.0 || u.max_magnitude() == 0.0 {
        return Ok(rho.clone());
    }

    let n = grid.n();
    let h = grid.spacing();
    let lo = rho.min();
    let hi = rho.max();
    let (ux, uy, uz) = (u.x().data(), u.y().data(), u.z().data());
    let rho_in = rho.data();

    let mut out = ScalarField::zeros(grid);
    out.data_mut()
        .par_chunks_mut(n * n)
        .enumerate()
        .for_each(|(z, plane)| {
            for y in 0..n {
                for x in 0..n {
                    let i = grid.idx(x, y, z);
                    // midpoint backward trace, in grid units
                    let mx = x as f64 - 0.5 * dt * ux[i] / h;
                    let my = y as f64 - 0.5 * dt * uy[i] / h;
                    let mz = z as f64 - 0.5 * dt * uz[i] / h;
                    let um = [
                        tricubic(grid, ux, mx, my, mz),
                        tricubic(grid, uy, mx, my, mz),
                        tricubic(grid, uz, mx, my, mz),
                    ];
                    let dx = x as f64 - dt * um[0] / h;
                    let dy = y as f64 - dt * um[1] / h;
                    let dz = z as f64 - dt * um[2] / h;
                    plane[x + n * y] = tricubic(grid, rho_in, dx, dy, dz).clamp(lo, hi);
                }
            }
        });
    Ok(out)
}
