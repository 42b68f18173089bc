use crate::grid::Grid;
use crate::{Error, Result};

/// Real scalar samples on a periodic grid, x-fastest order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.num_points()],
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            data: vec![value; grid.num_points()],
        }
    }

    /// Sample a function of the physical coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut data = Vec::with_capacity(grid.num_points());
        for z in 0..n {
            let pz = grid.coord(z);
            for y in 0..n {
                let py = grid.coord(y);
                for x in 0..n {
                    data.push(f(grid.coord(x), py, pz));
                }
            }
        }
        Self { grid, data }
    }

    pub fn from_samples(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.num_points() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.num_points(),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn max(&self) -> f64 {
        self.data.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Rectangle-rule integral over the box.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }
}

/// Three scalar components on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: [ScalarField; 3],
    solenoidal: bool,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            components: [
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
            ],
            solenoidal: true,
        }
    }

    pub fn from_components(x: ScalarField, y: ScalarField, z: ScalarField) -> Result<Self> {
        if x.grid() != y.grid() || y.grid() != z.grid() {
            return Err(Error::GridMismatch(
                "vector components must share one grid".into(),
            ));
        }
        Ok(Self {
            components: [x, y, z],
            solenoidal: false,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let fx = ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[0]);
        let fy = ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[1]);
        let fz = ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[2]);
        Self {
            components: [fx, fy, fz],
            solenoidal: false,
        }
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut ScalarField {
        self.solenoidal = false;
        &mut self.components[i]
    }

    pub fn x(&self) -> &ScalarField {
        &self.components[0]
    }

    pub fn y(&self) -> &ScalarField {
        &self.components[1]
    }

    pub fn z(&self) -> &ScalarField {
        &self.components[2]
    }

    /// Whether the field has been flagged divergence-free by `leray_project`.
    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    pub(crate) fn set_solenoidal(&mut self, flag: bool) {
        self.solenoidal = flag;
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid());
        let d = out.data_mut();
        for i in 0..d.len() {
            let a = self.components[0].data()[i];
            let b = self.components[1].data()[i];
            let c = self.components[2].data()[i];
            d[i] = (a * a + b * b + c * c).sqrt();
        }
        out
    }

    pub fn max_magnitude(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.grid().num_points() {
            let a = self.components[0].data()[i];
            let b = self.components[1].data()[i];
            let c = self.components[2].data()[i];
            m = m.max(a * a + b * b + c * c);
        }
        m.sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            components: [
                self.components[0].scale(c),
                self.components[1].scale(c),
                self.components[2].scale(c),
            ],
            solenoidal: self.solenoidal,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            components: [
                self.components[0].add(&other.components[0]),
                self.components[1].add(&other.components[1]),
                self.components[2].add(&other.components[2]),
            ],
            solenoidal: self.solenoidal && other.solenoidal,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            components: [
                self.components[0].sub(&other.components[0]),
                self.components[1].sub(&other.components[1]),
                self.components[2].sub(&other.components[2]),
            ],
            solenoidal: self.solenoidal && other.solenoidal,
        }
    }
}

/// A field whose pointwise magnitude samples feed quadrature-based norms.
pub trait Sampled {
    fn sample_grid(&self) -> Grid;
    /// `|f|` at every sample point, x-fastest.
    fn magnitudes(&self) -> Vec<f64>;
}

impl Sampled for ScalarField {
    fn sample_grid(&self) -> Grid {
        self.grid()
    }

    fn magnitudes(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.abs()).collect()
    }
}

impl Sampled for VectorField {
    fn sample_grid(&self) -> Grid {
        self.grid()
    }

    fn magnitudes(&self) -> Vec<f64> {
        self.magnitude().data().to_vec()
    }
}

/// Strong `L^p` norm by the rectangle rule, `p = inf` gives `max |f|`.
///
/// The reduction order is fixed (serial, x-fastest) so results are
/// independent of thread count.
pub fn lp_norm<F: Sampled>(f: &F, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lp_norm requires p >= 1, got {p}"
        )));
    }
    let mags = f.magnitudes();
    if p.is_infinite() {
        return Ok(mags.iter().fold(0.0_f64, |a, &b| a.max(b)));
    }
    let dv = f.sample_grid().cell_volume();
    let sum: f64 = if p == 2.0 {
        mags.iter().map(|&v| v * v).sum()
    } else if p == 1.0 {
        mags.iter().sum()
    } else {
        mags.iter().map(|&v| v.powf(p)).sum()
    };
    Ok((sum * dv).powf(1.0 / p))
}
