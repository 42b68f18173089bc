use crate::{Error, Result};

/// Uniform periodic `n^3` discretization of a cube of side `box_length`.
///
/// Owns the spectral wavenumber convention: axis index `i` carries the integer
/// frequency `i` for `i < n/2` and `i - n` otherwise, scaled by `2*pi/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    box_length: f64,
}

impl Grid {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two >= 8, got {n}"
            )));
        }
        if !box_length.is_finite() || box_length <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        Ok(Self { n, box_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Total number of sample points `n^3`.
    pub fn num_points(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Grid spacing `L/n`.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.box_length * self.box_length * self.box_length
    }

    /// Quadrature weight `L^3 / n^3`. Since `n` is a power of two the product
    /// `cell_volume * n^3` recovers `L^3` exactly in f64 arithmetic.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.num_points() as f64
    }

    /// Integer frequency of axis index `i`, in `[-n/2, n/2)`.
    pub fn freq(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Physical wavenumber `2*pi/L * freq(i)`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.box_length * self.freq(i) as f64
    }

    /// Largest retained integer frequency under the 2/3 dealiasing rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Linear index of the sample at axis indices `(x, y, z)`, x-fastest.
    pub fn idx(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.n * (y + self.n * z)
    }

    /// Physical coordinate of axis index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }
}
