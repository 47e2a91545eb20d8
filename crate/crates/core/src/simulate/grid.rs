use crate::error::{Error, Result};

/// Boundary treatment on one edge of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeCondition {
    ZeroFlux,
    Fixed(f64),
}

/// Uniform node grid. `ny = 1` selects 1D. Node `(i, j)` has index `j·nx + i`
/// and sits at `(i·hx, j·hy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub left: EdgeCondition,
    pub right: EdgeCondition,
    pub bottom: EdgeCondition,
    pub top: EdgeCondition,
}

impl Grid {
    /// `nx` nodes spanning `[0, length]` with zero-flux ends.
    pub fn line(nx: usize, length: f64) -> Result<Self> {
        if nx < 2 {
            return Err(Error::input(format!("grid needs nx >= 2, got {nx}")));
        }
        let g = Self {
            nx,
            ny: 1,
            hx: length / (nx - 1) as f64,
            hy: 1.0,
            left: EdgeCondition::ZeroFlux,
            right: EdgeCondition::ZeroFlux,
            bottom: EdgeCondition::ZeroFlux,
            top: EdgeCondition::ZeroFlux,
        };
        g.validate()?;
        Ok(g)
    }

    /// `nx × ny` nodes spanning `[0, lx] × [0, ly]`, all edges zero-flux.
    pub fn rectangle(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::input(format!("2D grid needs nx, ny >= 2, got {nx}x{ny}")));
        }
        let g = Self {
            nx,
            ny,
            hx: lx / (nx - 1) as f64,
            hy: ly / (ny - 1) as f64,
            left: EdgeCondition::ZeroFlux,
            right: EdgeCondition::ZeroFlux,
            bottom: EdgeCondition::ZeroFlux,
            top: EdgeCondition::ZeroFlux,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_bottom(mut self, bottom: EdgeCondition) -> Self {
        self.bottom = bottom;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny == 0 {
            return Err(Error::input(format!("grid {}x{} too small", self.nx, self.ny)));
        }
        if !(self.hx > 0.0 && self.hx.is_finite() && self.hy > 0.0 && self.hy.is_finite()) {
            return Err(Error::input(format!(
                "grid spacing must be positive, got hx={} hy={}",
                self.hx, self.hy
            )));
        }
        for e in [self.left, self.right, self.bottom, self.top] {
            if let EdgeCondition::Fixed(v) = e {
                if !v.is_finite() {
                    return Err(Error::input("fixed boundary value is not finite"));
                }
            }
        }
        Ok(())
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    pub fn nodes(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn position(&self, p: usize) -> (f64, f64) {
        let (i, j) = (p % self.nx, p / self.nx);
        (i as f64 * self.hx, if self.is_1d() { 0.0 } else { j as f64 * self.hy })
    }

    /// Measure of one cell: `hx·hy` in 2D, `hx` in 1D.
    pub fn cell_weight(&self) -> f64 {
        if self.is_1d() {
            self.hx
        } else {
            self.hx * self.hy
        }
    }

    /// Neighbour pairs `(p, q, g)` with `q > p`, where `g` is the geometric
    /// factor of the face (`hy/hx` or `hx/hy` in 2D, `1/hx` in 1D).
    pub(crate) fn faces(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        let (gx, gy) = if self.is_1d() {
            (1.0 / self.hx, 0.0)
        } else {
            (self.hy / self.hx, self.hx / self.hy)
        };
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.index(i, j);
                if i + 1 < self.nx {
                    out.push((p, p + 1, gx));
                }
                if j + 1 < self.ny {
                    out.push((p, p + self.nx, gy));
                }
            }
        }
        out
    }

    /// Half bandwidth of the five-point operator in node ordering.
    pub(crate) fn bandwidth(&self) -> usize {
        if self.is_1d() {
            1
        } else {
            self.nx
        }
    }

    pub(crate) fn all_zero_flux(&self) -> bool {
        [self.left, self.right, self.bottom, self.top]
            .iter()
            .all(|e| *e == EdgeCondition::ZeroFlux)
    }
}
