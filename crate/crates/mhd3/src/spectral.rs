//! Spectral representation and differential operators.
//!
//! Transform convention: forward FFT is unnormalized, the inverse carries the
//! `1/n^3` factor. Derivatives are exact on the trigonometric interpolant with
//! the Nyquist frequency zeroed for odd-order operators. Quadratic products
//! are dealiased by the 2/3 rule (`|m| <= n/3` kept).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut plans = PLANS.lock().unwrap();
    plans
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            planner.plan_fft(n, dir)
        })
        .clone()
}

fn fft_lines(buf: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    let scratch_len = fft.get_inplace_scratch_len();
    buf.par_chunks_mut(n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, line| fft.process_with_scratch(line, scratch),
    );
}

// dst[y + n*x + n^2*z] = src[x + n*y + n^2*z] (involution)
fn transpose_xy(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    dst.par_chunks_mut(n * n)
        .zip(src.par_chunks(n * n))
        .for_each(|(d, s)| {
            for y in 0..n {
                for x in 0..n {
                    d[y + n * x] = s[x + n * y];
                }
            }
        });
}

// dst[z + n*y + n^2*x] = src[x + n*y + n^2*z] (involution)
fn transpose_xz(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    dst.par_chunks_mut(n * n).enumerate().for_each(|(x, d)| {
        for z in 0..n {
            for y in 0..n {
                d[z + n * y] = src[x + n * (y + n * z)];
            }
        }
    });
}

fn fft3(buf: &mut Vec<Complex64>, n: usize, inverse: bool) {
    let fft = plan(n, inverse);
    let mut tmp = vec![Complex64::new(0.0, 0.0); buf.len()];
    // x lines are contiguous
    fft_lines(buf, n, &fft);
    // y lines
    transpose_xy(buf, &mut tmp, n);
    fft_lines(&mut tmp, n, &fft);
    transpose_xy(&tmp, buf, n);
    // z lines
    transpose_xz(buf, &mut tmp, n);
    fft_lines(&mut tmp, n, &fft);
    transpose_xz(&tmp, buf, n);
}

/// Complex modal coefficients of a real field (full cube, unnormalized).
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Grid,
    modes: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            modes: vec![Complex64::new(0.0, 0.0); grid.num_points()],
        }
    }

    pub fn forward(f: &ScalarField) -> Self {
        let grid = f.grid();
        let mut modes: Vec<Complex64> = f
            .data()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft3(&mut modes, grid.n(), false);
        Self { grid, modes }
    }

    /// Inverse transform, real part. Carries the `1/n^3` normalization.
    pub fn inverse(&self) -> ScalarField {
        let mut buf = self.modes.clone();
        fft3(&mut buf, self.grid.n(), true);
        let scale = 1.0 / self.grid.num_points() as f64;
        let data: Vec<f64> = buf.iter().map(|c| c.re * scale).collect();
        ScalarField::from_samples(self.grid, data).expect("size preserved")
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn modes(&self) -> &[Complex64] {
        &self.modes
    }

    pub fn modes_mut(&mut self) -> &mut [Complex64] {
        &mut self.modes
    }

    /// Modal coefficient at integer frequencies `(mx, my, mz)`.
    pub fn mode(&self, mx: i64, my: i64, mz: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let wrap = |m: i64| ((m % n) + n) % n;
        self.modes[self
            .grid
            .idx(wrap(mx) as usize, wrap(my) as usize, wrap(mz) as usize)]
    }

    pub fn set_mode(&mut self, mx: i64, my: i64, mz: i64, v: Complex64) {
        let n = self.grid.n() as i64;
        let wrap = |m: i64| ((m % n) + n) % n;
        let idx = self
            .grid
            .idx(wrap(mx) as usize, wrap(my) as usize, wrap(mz) as usize);
        self.modes[idx] = v;
    }

    /// Apply `f(kx, ky, kz, coeff)` to every mode, with physical wavenumbers.
    pub fn map_modes(&mut self, f: impl Fn(f64, f64, f64, Complex64) -> Complex64 + Sync) {
        let grid = self.grid;
        let n = grid.n();
        self.modes
            .par_chunks_mut(n * n)
            .enumerate()
            .for_each(|(z, plane)| {
                let kz = grid.wavenumber(z);
                for y in 0..n {
                    let ky = grid.wavenumber(y);
                    for x in 0..n {
                        let kx = grid.wavenumber(x);
                        let i = x + n * y;
                        plane[i] = f(kx, ky, kz, plane[i]);
                    }
                }
            });
    }

    /// Spectral derivative along `axis` (multiply by `i*k`, Nyquist zeroed).
    pub fn derivative(&self, axis: usize) -> Self {
        let grid = self.grid;
        let n = grid.n();
        let nyquist = -((n / 2) as i64);
        let mut out = self.clone();
        out.map_modes_indexed(|mx, my, mz, c| {
            let m = [mx, my, mz][axis];
            if m == nyquist {
                return Complex64::new(0.0, 0.0);
            }
            let k = 2.0 * std::f64::consts::PI / grid.box_length() * m as f64;
            Complex64::new(0.0, k) * c
        });
        out
    }

    /// Multiply every mode by `-|k|^2`.
    pub fn laplacian(&self) -> Self {
        let mut out = self.clone();
        out.map_modes(|kx, ky, kz, c| c * -(kx * kx + ky * ky + kz * kz));
        out
    }

    /// Multiply every mode by `exp(-coef * |k|^2 * dt)` (integrating factor).
    pub fn diffuse(&mut self, coef: f64, dt: f64) {
        self.map_modes(|kx, ky, kz, c| c * (-coef * (kx * kx + ky * ky + kz * kz) * dt).exp());
    }

    /// Zero all modes with any `|m| > n/3` (2/3 dealiasing rule).
    pub fn dealias(&mut self) {
        let cutoff = self.grid.dealias_cutoff();
        self.map_modes_indexed(|mx, my, mz, c| {
            if mx.abs() > cutoff || my.abs() > cutoff || mz.abs() > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                c
            }
        });
    }

    /// Apply `f(mx, my, mz, coeff)` with integer frequencies.
    pub fn map_modes_indexed(&mut self, f: impl Fn(i64, i64, i64, Complex64) -> Complex64 + Sync) {
        let grid = self.grid;
        let n = grid.n();
        self.modes
            .par_chunks_mut(n * n)
            .enumerate()
            .for_each(|(z, plane)| {
                let mz = grid.freq(z);
                for y in 0..n {
                    let my = grid.freq(y);
                    for x in 0..n {
                        let i = x + n * y;
                        plane[i] = f(grid.freq(x), my, mz, plane[i]);
                    }
                }
            });
    }

    pub fn add_scaled(&mut self, other: &Self, c: f64) {
        for (a, b) in self.modes.iter_mut().zip(&other.modes) {
            *a += b * c;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for a in self.modes.iter_mut() {
            *a *= c;
        }
    }

    /// `int |f|^2 dx` by Parseval under this crate's transform convention.
    pub fn l2_norm_sq(&self) -> f64 {
        let n6 = (self.grid.num_points() as f64) * (self.grid.num_points() as f64);
        let sum: f64 = self.modes.iter().map(|c| c.norm_sqr()).sum();
        sum * self.grid.volume() / n6
    }

    /// `int |grad f|^2 dx` by Parseval.
    pub fn grad_l2_norm_sq(&self) -> f64 {
        let grid = self.grid;
        let n = grid.n();
        let n6 = (grid.num_points() as f64) * (grid.num_points() as f64);
        let mut sum = 0.0;
        for z in 0..n {
            let kz = grid.wavenumber(z);
            for y in 0..n {
                let ky = grid.wavenumber(y);
                for x in 0..n {
                    let kx = grid.wavenumber(x);
                    let k2 = kx * kx + ky * ky + kz * kz;
                    sum += k2 * self.modes[grid.idx(x, y, z)].norm_sqr();
                }
            }
        }
        sum * grid.volume() / n6
    }
}

/// Spectra of the three components of a vector field.
pub fn forward_vector(v: &VectorField) -> [Spectrum; 3] {
    [
        Spectrum::forward(v.x()),
        Spectrum::forward(v.y()),
        Spectrum::forward(v.z()),
    ]
}

pub fn inverse_vector(s: &[Spectrum; 3], solenoidal: bool) -> VectorField {
    let mut v = VectorField::from_components(s[0].inverse(), s[1].inverse(), s[2].inverse())
        .expect("components share grid");
    v.set_solenoidal(solenoidal);
    v
}

/// Exact spectral gradient of the trigonometric interpolant.
pub fn gradient(f: &ScalarField) -> VectorField {
    let s = Spectrum::forward(f);
    VectorField::from_components(
        s.derivative(0).inverse(),
        s.derivative(1).inverse(),
        s.derivative(2).inverse(),
    )
    .expect("components share grid")
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let mut s = Spectrum::forward(v.x()).derivative(0);
    s.add_scaled(&Spectrum::forward(v.y()).derivative(1), 1.0);
    s.add_scaled(&Spectrum::forward(v.z()).derivative(2), 1.0);
    s.inverse()
}

pub fn curl(v: &VectorField) -> VectorField {
    let sx = Spectrum::forward(v.x());
    let sy = Spectrum::forward(v.y());
    let sz = Spectrum::forward(v.z());
    let mut cx = sz.derivative(1);
    cx.add_scaled(&sy.derivative(2), -1.0);
    let mut cy = sx.derivative(2);
    cy.add_scaled(&sz.derivative(0), -1.0);
    let mut cz = sy.derivative(0);
    cz.add_scaled(&sx.derivative(1), -1.0);
    VectorField::from_components(cx.inverse(), cy.inverse(), cz.inverse())
        .expect("components share grid")
}

pub fn laplacian_scalar(f: &ScalarField) -> ScalarField {
    Spectrum::forward(f).laplacian().inverse()
}

pub fn laplacian_vector(v: &VectorField) -> VectorField {
    let mut out = VectorField::from_components(
        laplacian_scalar(v.x()),
        laplacian_scalar(v.y()),
        laplacian_scalar(v.z()),
    )
    .expect("components share grid");
    out.set_solenoidal(v.is_solenoidal());
    out
}

/// Modewise `v_hat -> v_hat - k (k . v_hat) / |k|^2`, zero mode unchanged.
pub fn leray_project_spectra(s: &mut [Spectrum; 3]) {
    let grid = s[0].grid();
    let n = grid.n();
    let (sx, rest) = s.split_at_mut(1);
    let (sy, sz) = rest.split_at_mut(1);
    let planes = sx[0]
        .modes_mut()
        .par_chunks_mut(n * n)
        .zip(sy[0].modes_mut().par_chunks_mut(n * n))
        .zip(sz[0].modes_mut().par_chunks_mut(n * n));
    planes.enumerate().for_each(|(z, ((px, py), pz))| {
        let kz = grid.wavenumber(z);
        for y in 0..n {
            let ky = grid.wavenumber(y);
            for x in 0..n {
                let kx = grid.wavenumber(x);
                let k2 = kx * kx + ky * ky + kz * kz;
                if k2 == 0.0 {
                    continue;
                }
                let i = x + n * y;
                let kdotv = (px[i] * kx + py[i] * ky + pz[i] * kz) / k2;
                px[i] -= kdotv * kx;
                py[i] -= kdotv * ky;
                pz[i] -= kdotv * kz;
            }
        }
    });
}

/// Orthogonal projection onto divergence-free fields.
pub fn leray_project(v: &VectorField) -> VectorField {
    let mut s = forward_vector(v);
    leray_project_spectra(&mut s);
    inverse_vector(&s, true)
}

/// Pointwise `|D(u)|^2` with `D(u) = (grad u + grad u^T)/2`.
pub fn deformation_heating(u: &VectorField) -> ScalarField {
    let grads = [gradient(u.x()), gradient(u.y()), gradient(u.z())];
    let grid = u.grid();
    let mut out = ScalarField::zeros(grid);
    let d = out.data_mut();
    for p in 0..d.len() {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                // grads[i] holds grad(u_i); entry j is d u_i / d x_j
                let dij = 0.5 * (grads[i].component(j).data()[p] + grads[j].component(i).data()[p]);
                acc += dij * dij;
            }
        }
        d[p] = acc;
    }
    out
}

pub fn dealias_scalar(f: &ScalarField) -> ScalarField {
    let mut s = Spectrum::forward(f);
    s.dealias();
    s.inverse()
}

pub fn dealias_vector(v: &VectorField) -> VectorField {
    let mut out = VectorField::from_components(
        dealias_scalar(v.x()),
        dealias_scalar(v.y()),
        dealias_scalar(v.z()),
    )
    .expect("components share grid");
    out.set_solenoidal(v.is_solenoidal());
    out
}

/// Largest modal magnitude of the spectral divergence, for solenoidality checks.
pub fn max_divergence_mode(v: &VectorField) -> f64 {
    let mut s = Spectrum::forward(v.x()).derivative(0);
    s.add_scaled(&Spectrum::forward(v.y()).derivative(1), 1.0);
    s.add_scaled(&Spectrum::forward(v.z()).derivative(2), 1.0);
    let scale = 1.0 / v.grid().num_points() as f64;
    s.modes().iter().map(|c| c.norm() * scale).fold(0.0, f64::max)
}
