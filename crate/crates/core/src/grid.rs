//! Uniform-grid discretization of a box `[-L, L]^dim` and pointwise algebra
//! of grid functions.
//!
//! Sample points are cell centers (midpoint rule), and the number of cells
//! per side is a power of two so that every dyadic cube is an exact union of
//! cells. Functions, weights, and symbols are all carried by [`GridFunction`].

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Box domain `[-L, L]^dim` split into `n_cells` cells per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    dim: usize,
    half_width: f64,
    n_cells: usize,
}

impl Domain {
    /// `dim` must be 1 or 2, `half_width > 0`, `n_cells` a power of two `>= 8`.
    pub fn new(dim: usize, half_width: f64, n_cells: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::invalid(format!("dim must be 1 or 2, got {dim}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::invalid(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if n_cells < 8 || !n_cells.is_power_of_two() {
            return Err(Error::invalid(format!(
                "n_cells must be a power of two >= 8, got {n_cells}"
            )));
        }
        Ok(Domain {
            dim,
            half_width,
            n_cells,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Cells per side.
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Cell width `h = 2L / N`.
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n_cells as f64
    }

    /// Total number of cells, `N^dim`.
    pub fn total_cells(&self) -> usize {
        self.n_cells.pow(self.dim as u32)
    }

    /// Cell volume `h^dim`.
    pub fn cell_measure(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    /// Multi-index of a flat cell index. The second entry is 0 in 1D.
    pub fn cell_coords(&self, flat: usize) -> [usize; 2] {
        debug_assert!(flat < self.total_cells());
        match self.dim {
            1 => [flat, 0],
            _ => [flat % self.n_cells, flat / self.n_cells],
        }
    }

    /// Flat index of a cell multi-index.
    pub fn flat_index(&self, coords: [usize; 2]) -> usize {
        match self.dim {
            1 => coords[0],
            _ => coords[1] * self.n_cells + coords[0],
        }
    }

    /// Center of the cell with the given flat index. The second coordinate
    /// is 0.0 in 1D.
    pub fn cell_center(&self, flat: usize) -> [f64; 2] {
        let c = self.cell_coords(flat);
        let h = self.h();
        let x0 = -self.half_width + (c[0] as f64 + 0.5) * h;
        let x1 = if self.dim == 2 {
            -self.half_width + (c[1] as f64 + 0.5) * h
        } else {
            0.0
        };
        [x0, x1]
    }

    /// Same box with twice as many cells per side.
    pub fn refined(&self) -> Domain {
        Domain {
            dim: self.dim,
            half_width: self.half_width,
            n_cells: self.n_cells * 2,
        }
    }
}

/// Real-valued samples on the cells of a [`Domain`]. Immutable after
/// construction; all values are finite. A weight is a `GridFunction` whose
/// values are strictly positive everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: Domain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.total_cells() {
            return Err(Error::DomainMismatch(format!(
                "expected {} values, got {}",
                domain.total_cells(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample value {v}")));
        }
        Ok(GridFunction { domain, values })
    }

    /// Sample `f` at every cell center.
    pub fn from_fn(domain: Domain, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..domain.total_cells())
            .map(|i| {
                let c = domain.cell_center(i);
                f(&c[..domain.dim()])
            })
            .collect();
        Self::from_values(domain, values)
    }

    pub fn constant(domain: Domain, c: f64) -> Result<Self> {
        Self::from_values(domain, vec![c; domain.total_cells()])
    }

    pub fn zeros(domain: Domain) -> Self {
        GridFunction {
            values: vec![0.0; domain.total_cells()],
            domain,
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    /// True if every sample is strictly positive (weight role).
    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::from_values(self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(
                "zip_with requires identical domains".into(),
            ));
        }
        GridFunction::from_values(
            self.domain,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Result<GridFunction> {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> GridFunction {
        self.map(|v| v.abs()).expect("abs of finite is finite")
    }

    /// Pointwise `|f|^a`.
    pub fn powf(&self, a: f64) -> Result<GridFunction> {
        self.map(|v| v.abs().powf(a))
    }

    /// Integral over the whole box, `sum f_i h^dim`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.domain.cell_measure()
    }

    /// Same samples copied onto the doubled grid (each cell split into
    /// `2^dim` children with equal value). Preserves all Lp norms exactly.
    pub fn refine_double(&self) -> GridFunction {
        let fine = self.domain.refined();
        let n = self.domain.n_cells();
        let mut values = vec![0.0; fine.total_cells()];
        for (i, v) in values.iter_mut().enumerate() {
            let c = fine.cell_coords(i);
            let coarse = self.domain.flat_index([c[0] / 2, c[1] / 2]);
            let _ = n;
            *v = self.values[coarse];
        }
        GridFunction {
            domain: fine,
            values,
        }
    }

    /// CSV rows `index,x0[,x1],value` with a header line.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        if self.domain.dim() == 1 {
            writeln!(w, "index,x0,value")?;
        } else {
            writeln!(w, "index,x0,x1,value")?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let c = self.domain.cell_center(i);
            if self.domain.dim() == 1 {
                writeln!(w, "{},{:.17e},{:.17e}", i, c[0], v)?;
            } else {
                writeln!(w, "{},{:.17e},{:.17e},{:.17e}", i, c[0], c[1], v)?;
            }
        }
        Ok(())
    }

    /// Compact dump: `dim: u32 | n_cells: u32 | half_width: f64 | values`,
    /// all little-endian.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&(self.domain.dim() as u32).to_le_bytes())?;
        w.write_all(&(self.domain.n_cells() as u32).to_le_bytes())?;
        w.write_all(&self.domain.half_width().to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<GridFunction> {
        let mut u32buf = [0u8; 4];
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut u32buf)?;
        let dim = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut u32buf)?;
        let n_cells = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut f64buf)?;
        let half_width = f64::from_le_bytes(f64buf);
        let domain = Domain::new(dim, half_width, n_cells)?;
        let mut values = Vec::with_capacity(domain.total_cells());
        for _ in 0..domain.total_cells() {
            r.read_exact(&mut f64buf)?;
            values.push(f64::from_le_bytes(f64buf));
        }
        GridFunction::from_values(domain, values)
    }
}

/// Axis-aligned block of cells: `cells_per_side^dim` cells starting at
/// `offset` (in cell coordinates).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeRegion {
    domain: Domain,
    offset: [usize; 2],
    cells_per_side: usize,
}

impl CubeRegion {
    pub fn new(domain: Domain, offset: [usize; 2], cells_per_side: usize) -> Result<Self> {
        if cells_per_side == 0 {
            return Err(Error::DegenerateCube("cube with zero cells".into()));
        }
        for axis in 0..domain.dim() {
            if offset[axis] + cells_per_side > domain.n_cells() {
                return Err(Error::DomainMismatch(format!(
                    "cube exceeds domain on axis {axis}: offset {} + side {} > {}",
                    offset[axis],
                    cells_per_side,
                    domain.n_cells()
                )));
            }
        }
        if domain.dim() == 1 && offset[1] != 0 {
            return Err(Error::DomainMismatch(
                "1D cube with nonzero y offset".into(),
            ));
        }
        Ok(CubeRegion {
            domain,
            offset,
            cells_per_side,
        })
    }

    /// The whole box as a single cube.
    pub fn root(domain: Domain) -> CubeRegion {
        CubeRegion {
            domain,
            offset: [0, 0],
            cells_per_side: domain.n_cells(),
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn offset(&self) -> [usize; 2] {
        self.offset
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    /// Physical side length.
    pub fn side_length(&self) -> f64 {
        self.cells_per_side as f64 * self.domain.h()
    }

    /// `|Q| = side^dim`.
    pub fn measure(&self) -> f64 {
        self.side_length().powi(self.domain.dim() as i32)
    }

    pub fn num_cells(&self) -> usize {
        self.cells_per_side.pow(self.domain.dim() as u32)
    }

    pub fn center(&self) -> [f64; 2] {
        let h = self.domain.h();
        let half = self.cells_per_side as f64 * h / 2.0;
        let x0 = -self.domain.half_width() + self.offset[0] as f64 * h + half;
        let x1 = if self.domain.dim() == 2 {
            -self.domain.half_width() + self.offset[1] as f64 * h + half
        } else {
            0.0
        };
        [x0, x1]
    }

    /// Flat indices of the cells in this cube, in row-major order.
    pub fn cells(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.num_cells());
        if self.domain.dim() == 1 {
            out.extend(self.offset[0]..self.offset[0] + self.cells_per_side);
        } else {
            for j in self.offset[1]..self.offset[1] + self.cells_per_side {
                for i in self.offset[0]..self.offset[0] + self.cells_per_side {
                    out.push(self.domain.flat_index([i, j]));
                }
            }
        }
        out
    }

    pub fn contains_cell(&self, flat: usize) -> bool {
        let c = self.domain.cell_coords(flat);
        (0..self.domain.dim())
            .all(|a| c[a] >= self.offset[a] && c[a] < self.offset[a] + self.cells_per_side)
    }

    pub fn contains_cube(&self, other: &CubeRegion) -> bool {
        (0..self.domain.dim()).all(|a| {
            other.offset[a] >= self.offset[a]
                && other.offset[a] + other.cells_per_side <= self.offset[a] + self.cells_per_side
        })
    }

    /// Concentric cube with doubled side length, when it fits on the grid.
    /// Requires an even `cells_per_side` so the expansion stays cell-aligned.
    pub fn doubled(&self) -> Option<CubeRegion> {
        if !self.cells_per_side.is_multiple_of(2) {
            return None;
        }
        let half = self.cells_per_side / 2;
        let mut offset = [0usize; 2];
        for axis in 0..self.domain.dim() {
            if self.offset[axis] < half
                || self.offset[axis] + self.cells_per_side + half > self.domain.n_cells()
            {
                return None;
            }
            offset[axis] = self.offset[axis] - half;
        }
        Some(CubeRegion {
            domain: self.domain,
            offset,
            cells_per_side: self.cells_per_side * 2,
        })
    }

    /// `depth:i[:j]` label when the cube is dyadically aligned, otherwise
    /// `at(i[,j])+side`.
    pub fn label(&self) -> String {
        let n = self.domain.n_cells();
        let s = self.cells_per_side;
        let aligned = s.is_power_of_two()
            && self.offset[0].is_multiple_of(s)
            && (self.domain.dim() == 1 || self.offset[1].is_multiple_of(s));
        if aligned {
            let depth = (n / s).trailing_zeros();
            if self.domain.dim() == 1 {
                format!("{}:{}", depth, self.offset[0] / s)
            } else {
                format!("{}:{}:{}", depth, self.offset[0] / s, self.offset[1] / s)
            }
        } else if self.domain.dim() == 1 {
            format!("at({})+{}", self.offset[0], s)
        } else {
            format!("at({},{})+{}", self.offset[0], self.offset[1], s)
        }
    }
}

/// Mean of `f` over the cells of `Q`, the discrete `|Q|^{-1} int_Q f`.
pub fn cube_average(f: &GridFunction, q: &CubeRegion) -> Result<f64> {
    if f.domain() != q.domain() {
        return Err(Error::DomainMismatch("cube_average domain mismatch".into()));
    }
    let cells = q.cells();
    if cells.is_empty() {
        return Err(Error::DegenerateCube("empty cube".into()));
    }
    Ok(cells.iter().map(|&i| f.value(i)).sum::<f64>() / cells.len() as f64)
}

/// Weighted norm `(sum |f_i|^p w_i h^dim)^{1/p}`.
pub fn lp_norm(f: &GridFunction, w: &GridFunction, p: f64) -> Result<f64> {
    if f.domain() != w.domain() {
        return Err(Error::DomainMismatch("lp_norm domain mismatch".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("lp_norm requires p >= 1, got {p}")));
    }
    if !w.is_positive() {
        return Err(Error::invalid("lp_norm weight must be strictly positive"));
    }
    let h_pow = f.domain().cell_measure();
    let sum: f64 = f
        .values()
        .iter()
        .zip(w.values())
        .map(|(&fi, &wi)| fi.abs().powf(p) * wi)
        .sum();
    Ok((sum * h_pow).powf(1.0 / p))
}

/// Weak norm `sup_t t (w{|f| >= t})^{1/q}`, the supremum over all positive
/// thresholds of the level-set functional (attained in the limit from below
/// at the sample values).
pub fn weak_lq_norm(f: &GridFunction, w: &GridFunction, q: f64) -> Result<f64> {
    if f.domain() != w.domain() {
        return Err(Error::DomainMismatch("weak_lq_norm domain mismatch".into()));
    }
    if !(q > 0.0) {
        return Err(Error::invalid(format!(
            "weak_lq_norm requires q > 0, got {q}"
        )));
    }
    if !w.is_positive() {
        return Err(Error::invalid(
            "weak_lq_norm weight must be strictly positive",
        ));
    }
    let h_pow = f.domain().cell_measure();
    let mut pairs: Vec<(f64, f64)> = f
        .values()
        .iter()
        .zip(w.values())
        .map(|(&fi, &wi)| (fi.abs(), wi))
        .filter(|&(a, _)| a > 0.0)
        .collect();
    // Descending by |f|; cumulative measure of {|f| >= t}.
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut best: f64 = 0.0;
    let mut cum = 0.0;
    let mut idx = 0;
    while idx < pairs.len() {
        let level = pairs[idx].0;
        while idx < pairs.len() && pairs[idx].0 == level {
            cum += pairs[idx].1 * h_pow;
            idx += 1;
        }
        best = best.max(level * cum.powf(1.0 / q));
    }
    Ok(best)
}
