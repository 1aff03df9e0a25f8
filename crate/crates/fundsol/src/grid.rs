//! Piecewise-linear complex functions on a shared uniform mesh over `[0, 1]`.
//!
//! Everything the solver computes lives on one uniform mesh of `N ≥ 2` cells
//! (`N + 1` nodes). A [`GridFn`] stores complex node values and is read as its
//! piecewise-linear interpolant; a [`Weight`] is the real, strictly positive
//! variant used for `ρ`, `τ₀` and `ϱ`; a [`MatrixFn`] is an `n×n` matrix of
//! grid functions on the same mesh.
//!
//! Three operations carry the numerical weight of the whole crate:
//!
//! - [`GridFn::antiderivative`] — cumulative per-cell trapezoid, which is
//!   *exact* for piecewise-linear integrands, anchored so the result vanishes
//!   at a chosen point;
//! - [`oscillatory_cell_integral`] — the closed form of `∫ (a + bt) e^{ct} dt`
//!   over one cell, with a series branch near `c = 0` where the closed form
//!   loses digits to cancellation;
//! - [`GridFn::l_norm`] — `L_μ` norms by composite 4-node Gauss–Legendre
//!   quadrature per cell (exact for `μ = 2`, sup of node values for `μ = ∞`).

use crate::error::Error;
use crate::{Result, C64};

/// Threshold on `|c·Δt|` below which the closed form of the oscillatory cell
/// integral switches to its series expansion. At the boundary the eight-term
/// series truncation error is ~`|cΔt|⁸/4e5 ≈ 1e-16` while the closed form
/// has lost ~3 digits in its second moment to cancellation; both stay inside
/// a few times 1e-13.
const OSC_SERIES_THRESHOLD: f64 = 5e-2;

/// 4-node Gauss–Legendre abscissae on `[-1, 1]`.
const GAUSS4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];

/// 4-node Gauss–Legendre weights on `[-1, 1]`.
const GAUSS4_W: [f64; 4] = [
    0.347_854_845_137_453_86,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_86,
];

// ───────────────────────────── GridFn ─────────────────────────────

/// A complex-valued piecewise-linear function on the uniform mesh of
/// `cells ≥ 2` cells over `[0, 1]`, stored as its `cells + 1` node values.
///
/// The all-zero function is a legal value (a zero potential is a meaningful
/// input, not an error).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    values: Vec<C64>,
}

impl GridFn {
    /// Wraps node values; `values.len()` must be at least 3 (2 cells).
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::TooFewCells(values.len().saturating_sub(1)));
        }
        Ok(GridFn { values })
    }

    /// Samples `f` at the mesh nodes.
    pub fn from_fn(cells: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        if cells < 2 {
            return Err(Error::TooFewCells(cells));
        }
        let dx = 1.0 / cells as f64;
        Ok(GridFn {
            values: (0..=cells).map(|i| f(i as f64 * dx)).collect(),
        })
    }

    /// The constant function `v`.
    pub fn constant(cells: usize, v: C64) -> Result<Self> {
        if cells < 2 {
            return Err(Error::TooFewCells(cells));
        }
        Ok(GridFn {
            values: vec![v; cells + 1],
        })
    }

    /// The zero function.
    pub fn zeros(cells: usize) -> Result<Self> {
        Self::constant(cells, C64::new(0.0, 0.0))
    }

    /// Number of mesh cells `N`.
    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    /// Mesh spacing `1/N`.
    pub fn dx(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    /// Coordinate of node `i`.
    pub fn node_x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// All node values.
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Value at node `i`.
    pub fn value(&self, i: usize) -> C64 {
        self.values[i]
    }

    /// Mutable access to the node values (same mesh, new data).
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    /// Locates `x ∈ [0, 1]`: returns `(cell, local)` with
    /// `x = (cell + local)·dx`, `local ∈ [0, 1]`, `cell ≤ N − 1`.
    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.cells();
        let t = (x * n as f64).clamp(0.0, n as f64);
        let mut cell = t.floor() as usize;
        if cell >= n {
            cell = n - 1;
        }
        (cell, t - cell as f64)
    }

    /// Linear interpolation at `x`; errors outside `[0, 1]`.
    pub fn eval(&self, x: f64) -> Result<C64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let (cell, local) = self.locate(x);
        Ok(self.values[cell] * (1.0 - local) + self.values[cell + 1] * local)
    }

    /// Applies `f` to every node value.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> GridFn {
        GridFn {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Combines node values of two functions on the same mesh.
    pub fn zip_with(&self, other: &GridFn, f: impl Fn(C64, C64) -> C64) -> Result<GridFn> {
        if self.values.len() != other.values.len() {
            return Err(Error::MeshMismatch(self.values.len(), other.values.len()));
        }
        Ok(GridFn {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Pointwise sum.
    pub fn add(&self, other: &GridFn) -> Result<GridFn> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &GridFn) -> Result<GridFn> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Scalar multiple.
    pub fn scale(&self, c: C64) -> GridFn {
        self.map(|v| v * c)
    }

    /// Slope of the interpolant on cell `i` (constant there).
    pub fn cell_slope(&self, i: usize) -> C64 {
        (self.values[i + 1] - self.values[i]) / self.dx()
    }

    /// The derivative of the interpolant collapsed back onto nodes: the
    /// average of the two adjacent cell slopes at interior nodes (equivalently
    /// the centered difference), the one-sided slope at the endpoints.
    pub fn node_derivative(&self) -> GridFn {
        let n = self.cells();
        let mut d = Vec::with_capacity(n + 1);
        d.push(self.cell_slope(0));
        for i in 1..n {
            d.push((self.cell_slope(i - 1) + self.cell_slope(i)) * 0.5);
        }
        d.push(self.cell_slope(n - 1));
        GridFn { values: d }
    }

    /// Resamples onto a mesh of `cells` cells by linear interpolation of the
    /// current interpolant. Exact when `cells` is a multiple of the current
    /// cell count.
    pub fn resample(&self, cells: usize) -> Result<GridFn> {
        if cells < 2 {
            return Err(Error::TooFewCells(cells));
        }
        let dx = 1.0 / cells as f64;
        let values = (0..=cells)
            .map(|i| self.eval((i as f64 * dx).min(1.0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(GridFn { values })
    }

    /// The antiderivative `g(x) = ∫_ξ^x f(t) dt` of the interpolant, as a
    /// grid function with *exact* node values (the per-cell trapezoid rule is
    /// exact for a piecewise-linear integrand) and `g(ξ) = 0` exactly, even
    /// when `ξ` is interior to a cell.
    pub fn antiderivative(&self, xi: f64) -> Result<GridFn> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::OutOfDomain(xi));
        }
        let n = self.cells();
        let dx = self.dx();
        // Cumulative from 0.
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = C64::new(0.0, 0.0);
        cumulative.push(acc);
        for i in 0..n {
            acc += (self.values[i] + self.values[i + 1]) * (0.5 * dx);
            cumulative.push(acc);
        }
        // Exact value at the anchor: trapezoid over the partial cell.
        let (cell, local) = self.locate(xi);
        let f_xi = self.values[cell] * (1.0 - local) + self.values[cell + 1] * local;
        let at_xi = cumulative[cell] + (self.values[cell] + f_xi) * (0.5 * local * dx);
        for v in &mut cumulative {
            *v -= at_xi;
        }
        Ok(GridFn { values: cumulative })
    }

    /// Sup norm of the interpolant. `|a + bt|` is convex on each cell, so the
    /// supremum is attained at a node; this is exact.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Total variation `∫₀¹ |f′|` of the interpolant (exact: the derivative is
    /// constant per cell).
    pub fn derivative_l1(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .sum()
    }

    /// `L_μ` norm of the interpolant for `μ ∈ [1, ∞]`.
    ///
    /// Finite `μ` uses composite 4-node Gauss–Legendre quadrature per cell on
    /// `|f(t)|^μ` (exact for `μ = 2`, where the integrand is a quadratic);
    /// `μ = ∞` returns the sup norm. Errors for `μ < 1`.
    pub fn l_norm(&self, mu: f64) -> Result<f64> {
        if mu.is_nan() || mu < 1.0 {
            return Err(Error::InvalidExponent(mu));
        }
        if mu.is_infinite() {
            return Ok(self.sup_norm());
        }
        let dx = self.dx();
        let mut acc = 0.0;
        for i in 0..self.cells() {
            let a = self.values[i];
            let b = self.values[i + 1];
            for (&x, &w) in GAUSS4_X.iter().zip(&GAUSS4_W) {
                let local = 0.5 * (x + 1.0); // map [-1,1] → [0,1]
                let v = a * (1.0 - local) + b * local;
                acc += w * 0.5 * dx * v.norm().powf(mu);
            }
        }
        Ok(acc.powf(1.0 / mu))
    }
}

// ───────────────────────────── Weight ─────────────────────────────

/// A real, strictly positive piecewise-linear function on the uniform mesh:
/// the weight `ρ` of the spectral term and the leading coefficients `τ₀`, `ϱ`
/// of higher-order problems. Construction rejects any node value below the
/// positivity floor, so downstream code may divide by a weight freely.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    values: Vec<f64>,
}

impl Weight {
    /// Default positivity floor.
    pub const DEFAULT_FLOOR: f64 = 1e-9;

    /// Wraps node values, requiring every value `≥ DEFAULT_FLOOR`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_floor(values, Self::DEFAULT_FLOOR)
    }

    /// Wraps node values with an explicit positivity floor.
    pub fn with_floor(values: Vec<f64>, floor: f64) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::TooFewCells(values.len().saturating_sub(1)));
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value >= floor) {
                return Err(Error::NonPositiveWeight {
                    index,
                    value,
                    floor,
                });
            }
        }
        Ok(Weight { values })
    }

    /// Samples a real function at the nodes (checked against the floor).
    pub fn from_fn(cells: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if cells < 2 {
            return Err(Error::TooFewCells(cells));
        }
        let dx = 1.0 / cells as f64;
        Self::new((0..=cells).map(|i| f(i as f64 * dx)).collect())
    }

    /// The constant weight `v`.
    pub fn constant(cells: usize, v: f64) -> Result<Self> {
        if cells < 2 {
            return Err(Error::TooFewCells(cells));
        }
        Self::new(vec![v; cells + 1])
    }

    /// Number of mesh cells.
    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    /// Mesh spacing.
    pub fn dx(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    /// Node values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at node `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Linear interpolation at `x ∈ [0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let n = self.cells();
        let t = (x * n as f64).clamp(0.0, n as f64);
        let mut cell = t.floor() as usize;
        if cell >= n {
            cell = n - 1;
        }
        let local = t - cell as f64;
        Ok(self.values[cell] * (1.0 - local) + self.values[cell + 1] * local)
    }

    /// Cumulative integral from 0 with exact (trapezoid) node values:
    /// `p(x) = ∫₀ˣ ρ`, nondecreasing since the weight is positive.
    pub fn antiderivative(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut p = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        p.push(acc);
        for w in self.values.windows(2) {
            acc += 0.5 * dx * (w[0] + w[1]);
            p.push(acc);
        }
        p
    }

    /// View as a complex grid function.
    pub fn to_grid(&self) -> GridFn {
        GridFn {
            values: self.values.iter().map(|&v| C64::new(v, 0.0)).collect(),
        }
    }

    /// Applies a positive map to the node values (checked again).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Weight> {
        Weight::new(self.values.iter().map(|&v| f(v)).collect())
    }
}

// ───────────────────────────── MatrixFn ─────────────────────────────

/// An `n×n` matrix of grid functions on one shared mesh, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFn {
    n: usize,
    entries: Vec<GridFn>,
}

impl MatrixFn {
    /// Wraps `n²` grid functions (row-major) that must share a mesh.
    pub fn new(n: usize, entries: Vec<GridFn>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "matrix of order {n} needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let nodes = entries[0].values().len();
        for e in &entries {
            if e.values().len() != nodes {
                return Err(Error::MeshMismatch(nodes, e.values().len()));
            }
        }
        Ok(MatrixFn { n, entries })
    }

    /// Samples `f(row, col, x)` at the nodes (indices 0-based).
    pub fn from_fn(n: usize, cells: usize, f: impl Fn(usize, usize, f64) -> C64) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                entries.push(GridFn::from_fn(cells, |x| f(j, k, x))?);
            }
        }
        MatrixFn::new(n, entries)
    }

    /// The zero matrix function.
    pub fn zeros(n: usize, cells: usize) -> Result<Self> {
        Self::from_fn(n, cells, |_, _, _| C64::new(0.0, 0.0))
    }

    /// The constant identity.
    pub fn identity(n: usize, cells: usize) -> Result<Self> {
        Self::from_fn(n, cells, |j, k, _| {
            if j == k {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Matrix order `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of mesh cells.
    pub fn cells(&self) -> usize {
        self.entries[0].cells()
    }

    /// Entry `(row, col)`, 0-based.
    pub fn entry(&self, row: usize, col: usize) -> &GridFn {
        &self.entries[row * self.n + col]
    }

    /// Mutable entry `(row, col)`, 0-based.
    pub fn entry_mut(&mut self, row: usize, col: usize) -> &mut GridFn {
        &mut self.entries[row * self.n + col]
    }

    /// Dense row-major snapshot of the matrix at node `i`.
    pub fn at_node(&self, i: usize) -> Vec<C64> {
        self.entries.iter().map(|e| e.value(i)).collect()
    }

    /// Dense row-major value at `x` by entry-wise interpolation.
    pub fn eval(&self, x: f64) -> Result<Vec<C64>> {
        self.entries.iter().map(|e| e.eval(x)).collect()
    }

    /// `L_μ` norm: the sum over rows of the row-wise vector `L_μ` norm,
    /// `Σ_j (Σ_k ∫₀¹ |t_{jk}|^μ)^{1/μ}`; for `μ = ∞` the inner norm is
    /// `max_k sup_x |t_{jk}|`.
    pub fn norm_l(&self, mu: f64) -> Result<f64> {
        if mu.is_nan() || mu < 1.0 {
            return Err(Error::InvalidExponent(mu));
        }
        let mut total = 0.0;
        for j in 0..self.n {
            if mu.is_infinite() {
                let row_max = (0..self.n)
                    .map(|k| self.entry(j, k).sup_norm())
                    .fold(0.0, f64::max);
                total += row_max;
            } else {
                let mut row = 0.0;
                for k in 0..self.n {
                    row += self.entry(j, k).l_norm(mu)?.powf(mu);
                }
                total += row.powf(1.0 / mu);
            }
        }
        Ok(total)
    }

    /// `C` norm: the largest entry sup over the mesh.
    pub fn norm_c(&self) -> f64 {
        self.entries.iter().map(|e| e.sup_norm()).fold(0.0, f64::max)
    }

    /// Row-sum operator norm `max_j Σ_k |t_{jk}(x_i)|` at node `i` — the
    /// matrix norm matching the vector sup-norm in the growth bounds.
    pub fn row_sum_at_node(&self, i: usize) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|k| self.entry(j, k).value(i).norm()).sum())
            .fold(0.0, f64::max)
    }

    /// Entry-wise map.
    pub fn map_entries(&self, f: impl Fn(&GridFn) -> GridFn) -> MatrixFn {
        MatrixFn {
            n: self.n,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Pointwise sum.
    pub fn add(&self, other: &MatrixFn) -> Result<MatrixFn> {
        self.binary(other, |a, b| a + b)
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &MatrixFn) -> Result<MatrixFn> {
        self.binary(other, |a, b| a - b)
    }

    /// Scalar multiple.
    pub fn scale(&self, c: C64) -> MatrixFn {
        self.map_entries(|e| e.scale(c))
    }

    fn binary(&self, other: &MatrixFn, f: impl Fn(C64, C64) -> C64 + Copy) -> Result<MatrixFn> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "matrix orders {} vs {}",
                self.n, other.n
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.zip_with(b, f))
            .collect::<Result<Vec<_>>>()?;
        MatrixFn::new(self.n, entries)
    }

    /// Node-wise matrix product `(self · other)(x_i)`.
    pub fn matmul(&self, other: &MatrixFn) -> Result<MatrixFn> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "matrix orders {} vs {}",
                self.n, other.n
            )));
        }
        let nodes = self.entries[0].values().len();
        if other.entries[0].values().len() != nodes {
            return Err(Error::MeshMismatch(nodes, other.entries[0].values().len()));
        }
        let n = self.n;
        let mut entries = vec![vec![C64::new(0.0, 0.0); nodes]; n * n];
        for i in 0..nodes {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for l in 0..n {
                        acc += self.entry(j, l).value(i) * other.entry(l, k).value(i);
                    }
                    entries[j * n + k][i] = acc;
                }
            }
        }
        MatrixFn::new(
            n,
            entries.into_iter().map(|v| GridFn { values: v }).collect(),
        )
    }

    /// Trace as a grid function.
    pub fn trace(&self) -> GridFn {
        let nodes = self.entries[0].values().len();
        let mut values = vec![C64::new(0.0, 0.0); nodes];
        for j in 0..self.n {
            for (i, v) in values.iter_mut().enumerate() {
                *v += self.entry(j, j).value(i);
            }
        }
        GridFn { values }
    }

    /// Resamples every entry onto `cells` cells.
    pub fn resample(&self, cells: usize) -> Result<MatrixFn> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.resample(cells))
            .collect::<Result<Vec<_>>>()?;
        MatrixFn::new(self.n, entries)
    }
}

// ─────────────────── Oscillatory cell integral ───────────────────

/// `φ₁(z) = (e^z − 1)/z` and `φ₂(z) = ((z − 1)e^z + 1)/z²` — the two moments
/// `∫₀^Δ e^{cu} du = Δ φ₁(cΔ)` and `∫₀^Δ u e^{cu} du = Δ² φ₂(cΔ)` in closed
/// form. Valid away from `z = 0`.
fn phi_closed(z: C64) -> (C64, C64) {
    let ez = z.exp();
    let one = C64::new(1.0, 0.0);
    ((ez - one) / z, ((z - one) * ez + one) / (z * z))
}

/// Eight-term series for the same moments:
/// `φ₁(z) = Σ_{j≥0} z^j/(j+1)!` and `φ₂(z) = Σ_{j≥0} (j+1)·z^j/(j+2)!`,
/// truncated after `z⁷`.  At `|z| ≤ 5e-2` the truncation error is below
/// `2e-16`, while the closed form there still loses ~3 digits in `φ₂` to
/// cancellation — hence the generous switch radius.
fn phi_series(z: C64) -> (C64, C64) {
    let z2 = z * z;
    let z3 = z2 * z;
    let z4 = z2 * z2;
    let z5 = z4 * z;
    let z6 = z4 * z2;
    let z7 = z6 * z;
    (
        C64::new(1.0, 0.0)
            + z * 0.5
            + z2 * (1.0 / 6.0)
            + z3 * (1.0 / 24.0)
            + z4 * (1.0 / 120.0)
            + z5 * (1.0 / 720.0)
            + z6 * (1.0 / 5040.0)
            + z7 * (1.0 / 40320.0),
        C64::new(0.5, 0.0)
            + z * (1.0 / 3.0)
            + z2 * 0.125
            + z3 * (1.0 / 30.0)
            + z4 * (1.0 / 144.0)
            + z5 * (1.0 / 840.0)
            + z6 * (1.0 / 5760.0)
            + z7 * (1.0 / 45360.0),
    )
}

/// `∫₀^Δ (α + β u) e^{cu} du` with branch selection on `|cΔ|`.
///
/// This is the overflow-safe core: every caller anchors the exponent so that
/// `Re(cΔ)` is bounded by the admissible growth on one cell before calling.
pub(crate) fn osc_moment_integral(alpha: C64, beta: C64, c: C64, delta: f64) -> C64 {
    let z = c * delta;
    let (p1, p2) = if z.norm() < OSC_SERIES_THRESHOLD {
        phi_series(z)
    } else {
        phi_closed(z)
    };
    alpha * delta * p1 + beta * (delta * delta) * p2
}

/// Closed-form `∫_{t₀}^{t₁} (a + b t) e^{c t} dt` for one mesh cell.
///
/// The amplitude is affine in the *global* coordinate `t`. Internally the
/// integral is shifted to the left endpoint, so the only unbounded factor is
/// `e^{c t₀}`; callers that need overflow safety must pre-subtract a reference
/// exponent (the solver always does). Near `c·(t₁−t₀) = 0` the evaluation
/// switches to a four-term series to avoid cancellation.
pub fn oscillatory_cell_integral(a: C64, b: C64, c: C64, t0: f64, t1: f64) -> C64 {
    let delta = t1 - t0;
    let alpha = a + b * t0;
    (c * t0).exp() * osc_moment_integral(alpha, b, c, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    // ── oscillatory cell integral: frozen analytic values ──

    #[test]
    fn osc_integral_pure_exponential() {
        // ∫₀¹ e^{iπt} dt = (e^{iπ} − 1)/(iπ) = 2i/π.
        let got = oscillatory_cell_integral(c(1.0, 0.0), c(0.0, 0.0), c(0.0, PI), 0.0, 1.0);
        assert_abs_diff_eq!(got.re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(got.im, 2.0 / PI, epsilon = 1e-14);
    }

    #[test]
    fn osc_integral_linear_amplitude() {
        // ∫₀¹ t e^{iπt} dt = (iπ − 2)/π²  (antiderivative by parts:
        // Re = ∫ t cos πt = −2/π², Im = ∫ t sin πt = 1/π).
        let got = oscillatory_cell_integral(c(0.0, 0.0), c(1.0, 0.0), c(0.0, PI), 0.0, 1.0);
        assert_abs_diff_eq!(got.re, -2.0 / (PI * PI), epsilon = 1e-14);
        assert_abs_diff_eq!(got.im, 1.0 / PI, epsilon = 1e-14);
    }

    #[test]
    fn osc_integral_against_brute_force() {
        // Dense Simpson quadrature as an independent oracle on a generic cell.
        let (a, b, cc) = (c(0.3, -0.4), c(-1.1, 0.7), c(2.0, -35.0));
        let (t0, t1) = (0.25, 0.375);
        let m = 20_000;
        let h = (t1 - t0) / m as f64;
        let f = |t: f64| (a + b * t) * (cc * t).exp();
        let mut s = f(t0) + f(t1);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += f(t0 + i as f64 * h) * w;
        }
        let oracle = s * (h / 3.0);
        let got = oscillatory_cell_integral(a, b, cc, t0, t1);
        assert!((got - oracle).norm() < 1e-12, "got {got}, oracle {oracle}");
    }

    #[test]
    fn osc_integral_branch_continuity() {
        // At the switch radius both evaluations are trustworthy: the series
        // truncation sits near 2e-16 and the closed form has lost ~3 digits
        // of its ~1e-16 base accuracy to cancellation in the second moment.
        for z in [c(5e-2, 0.0), c(0.0, 5e-2), c(-3.5e-2, 3.5e-2)] {
            let (s1, s2) = phi_series(z);
            let (c1, c2) = phi_closed(z);
            assert!((s1 - c1).norm() < 1e-13, "phi1 mismatch at {z}");
            assert!((s2 - c2).norm() < 1e-12, "phi2 mismatch at {z}");
        }
        // The assembled integral must not jump across the threshold either.
        let below = osc_moment_integral(c(1.0, 0.5), c(-0.3, 0.2), c(0.0, 4.999e-2), 1.0);
        let above = osc_moment_integral(c(1.0, 0.5), c(-0.3, 0.2), c(0.0, 5.001e-2), 1.0);
        assert!((below - above).norm() < 1e-4 * below.norm());
    }

    #[test]
    fn osc_integral_zero_c_is_plain_trapezoid_area() {
        // c = 0 reduces to ∫ (a + bt) dt.
        let got = oscillatory_cell_integral(c(2.0, 0.0), c(3.0, 0.0), c(0.0, 0.0), 0.0, 1.0);
        assert_abs_diff_eq!(got.re, 3.5, epsilon = 1e-15);
        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn osc_integral_reversed_limits_changes_sign() {
        let (a, b, cc) = (c(0.2, 0.1), c(0.5, -0.3), c(0.0, 7.0));
        let fwd = oscillatory_cell_integral(a, b, cc, 0.1, 0.6);
        let rev = oscillatory_cell_integral(a, b, cc, 0.6, 0.1);
        assert!((fwd + rev).norm() < 1e-15);
    }

    // ── antiderivative ──

    #[test]
    fn antiderivative_is_exact_per_cell_trapezoid() {
        // f(t) = t is represented exactly; ∫₀ˣ t dt = x²/2 at every node.
        let f = GridFn::from_fn(64, |x| c(x, 0.0)).unwrap();
        let g = f.antiderivative(0.0).unwrap();
        for i in 0..=64 {
            let x = g.node_x(i);
            assert_abs_diff_eq!(g.value(i).re, 0.5 * x * x, epsilon = 1e-15);
        }
    }

    #[test]
    fn antiderivative_anchor_mid_cell_is_exact() {
        // Anchor interior to a cell: node values must still be the exact
        // integral of the interpolant from ξ.
        let f = GridFn::from_fn(10, |x| c(1.0 + x, -2.0 * x)).unwrap();
        let xi = 0.33; // inside cell 3 of a 10-cell mesh
        let g = f.antiderivative(xi).unwrap();
        // ∫_ξ^x (1 + t − 2it) dt computed analytically (interpolant = function
        // here because f is affine).
        for i in 0..=10 {
            let x = g.node_x(i);
            let exact = |t: f64| c(t + 0.5 * t * t, -t * t);
            let want = exact(x) - exact(xi);
            assert!((g.value(i) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn antiderivative_rejects_anchor_outside_domain() {
        let f = GridFn::zeros(4).unwrap();
        assert!(matches!(
            f.antiderivative(1.5),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            f.antiderivative(-0.1),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn antiderivative_consistency_with_independent_sum() {
        // Node increments must equal the per-cell trapezoid areas to 1e−12
        // relative — checked against a separately accumulated sum.
        let f = GridFn::from_fn(257, |x| c((7.0 * x).sin(), (3.0 * x).cos())).unwrap();
        let g = f.antiderivative(0.0).unwrap();
        let dx = f.dx();
        let mut acc = c(0.0, 0.0);
        for i in 0..f.cells() {
            acc += (f.value(i) + f.value(i + 1)) * 0.5 * dx;
            let rel = (g.value(i + 1) - acc).norm() / (1.0 + acc.norm());
            assert!(rel < 1e-12);
        }
    }

    // ── l_norm ──

    #[test]
    fn l2_norm_of_sine_matches_closed_form() {
        // ‖sin πx‖_{L₂[0,1]} = 1/√2. With N = 65536 the interpolation error
        // ~‖f″‖∞ Δx²/9.6 ≈ 2e−10 dominates (the quadrature is exact for the
        // squared interpolant), safely inside 1e−8.
        let f = GridFn::from_fn(65_536, |x| c((PI * x).sin(), 0.0)).unwrap();
        let got = f.l_norm(2.0).unwrap();
        assert_abs_diff_eq!(got, 0.5_f64.sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn l1_norm_of_affine_function() {
        // ∫₀¹ |2t| dt = 1 exactly; the integrand is piecewise linear and
        // positive so Gauss-4 is exact.
        let f = GridFn::from_fn(8, |x| c(2.0 * x, 0.0)).unwrap();
        assert_abs_diff_eq!(f.l_norm(1.0).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn sup_norm_is_max_node_modulus() {
        let f = GridFn::from_fn(16, |x| c(x, 1.0 - x)).unwrap();
        // |f| is maximal at the endpoints (|f| = 1 there, < 1 inside).
        assert_abs_diff_eq!(f.l_norm(f64::INFINITY).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn l_norm_rejects_mu_below_one() {
        let f = GridFn::zeros(4).unwrap();
        assert!(matches!(f.l_norm(0.5), Err(Error::InvalidExponent(_))));
    }

    // ── Weight ──

    #[test]
    fn weight_rejects_nonpositive_nodes() {
        let err = Weight::new(vec![1.0, 0.0, 1.0]);
        assert!(matches!(err, Err(Error::NonPositiveWeight { index: 1, .. })));
        let err = Weight::new(vec![1.0, -3.0, 1.0]);
        assert!(matches!(err, Err(Error::NonPositiveWeight { .. })));
        // At the floor is allowed.
        assert!(Weight::new(vec![1.0, Weight::DEFAULT_FLOOR, 1.0]).is_ok());
    }

    #[test]
    fn weight_antiderivative_is_nondecreasing_and_exact() {
        let w = Weight::from_fn(32, |x| 1.0 + x).unwrap();
        let p = w.antiderivative();
        // p(x) = x + x²/2 exactly at nodes.
        for (i, &pi) in p.iter().enumerate() {
            let x = i as f64 / 32.0;
            assert_abs_diff_eq!(pi, x + 0.5 * x * x, epsilon = 1e-15);
        }
        for pair in p.windows(2) {
            assert!(pair[1] >= pair[0]);
        }
    }

    // ── MatrixFn ──

    #[test]
    fn matrix_l1_norm_sums_rows() {
        // Constant matrix [[1, 2], [0, 3]]: row norms 3 and 3, total 6.
        let m = MatrixFn::from_fn(2, 4, |j, k, _| match (j, k) {
            (0, 0) => c(1.0, 0.0),
            (0, 1) => c(2.0, 0.0),
            (1, 1) => c(3.0, 0.0),
            _ => c(0.0, 0.0),
        })
        .unwrap();
        assert_abs_diff_eq!(m.norm_l(1.0).unwrap(), 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.norm_c(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn matrix_matmul_matches_dense_product() {
        let a = MatrixFn::from_fn(2, 4, |j, k, x| c((j + 2 * k) as f64 + x, x)).unwrap();
        let b = MatrixFn::from_fn(2, 4, |j, k, x| c(x - k as f64, j as f64)).unwrap();
        let ab = a.matmul(&b).unwrap();
        for i in 0..=4 {
            let (da, db, dab) = (a.at_node(i), b.at_node(i), ab.at_node(i));
            for j in 0..2 {
                for k in 0..2 {
                    let want = da[2 * j] * db[k] + da[2 * j + 1] * db[2 + k];
                    assert!((dab[2 * j + k] - want).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn gridfn_requires_two_cells() {
        assert!(matches!(GridFn::zeros(1), Err(Error::TooFewCells(1))));
        assert!(GridFn::zeros(2).is_ok());
    }

    #[test]
    fn resample_refinement_is_exact() {
        let f = GridFn::from_fn(8, |x| c(x * x, -x)).unwrap();
        let g = f.resample(32).unwrap();
        // On original nodes the values are untouched.
        for i in 0..=8 {
            assert!((g.value(4 * i) - f.value(i)).norm() < 1e-15);
        }
        // A refined node interpolates the coarse interpolant, not the
        // original quadratic.
        let x = 1.0 / 16.0; // midpoint of the first coarse cell
        let coarse = (f.value(0) + f.value(1)) * 0.5;
        assert!((g.eval(x).unwrap() - coarse).norm() < 1e-15);
    }
}
