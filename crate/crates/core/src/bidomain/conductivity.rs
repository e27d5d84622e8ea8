use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Symmetric conductivity tensor per node, stored as `[s11, s12, s22]`.
/// In 1D only `s11` is read.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductivityField {
    grid: Grid,
    tensors: Vec<[f64; 3]>,
}

/// How a face conductivity is formed from its two end nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceAveraging {
    #[default]
    Arithmetic,
    Harmonic,
}

impl FaceAveraging {
    pub(crate) fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            FaceAveraging::Arithmetic => 0.5 * (a + b),
            FaceAveraging::Harmonic => {
                if a + b == 0.0 {
                    0.0
                } else {
                    2.0 * a * b / (a + b)
                }
            }
        }
    }
}

/// Eigenvalues of `[[a, b], [b, c]]`, ascending.
pub(crate) fn sym2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let m = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (m - r, m + r)
}

impl ConductivityField {
    /// Takes per-node tensors; nothing is validated until assembly or
    /// [`check_ellipticity`] so that invalid inputs can be reported.
    pub fn new(grid: &Grid, tensors: Vec<[f64; 3]>) -> Result<Self> {
        grid.check_len(tensors.len(), "conductivity")?;
        if let Some(k) = tensors.iter().position(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::arg(format!("conductivity at node {k} is not finite")));
        }
        let tensors = if grid.dimension() == 1 {
            tensors.into_iter().map(|t| [t[0], 0.0, t[0]]).collect()
        } else {
            tensors
        };
        Ok(Self {
            grid: grid.clone(),
            tensors,
        })
    }

    pub fn isotropic(grid: &Grid, sigma: f64) -> Self {
        Self::constant(grid, [sigma, 0.0, sigma])
    }

    pub fn constant(grid: &Grid, tensor: [f64; 3]) -> Self {
        Self::new(grid, vec![tensor; grid.node_count()]).expect("length matches by construction")
    }

    /// Samples `f(x, y) -> [s11, s12, s22]` at the nodes.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> [f64; 3]) -> Result<Self> {
        let tensors = (0..grid.node_count())
            .map(|k| {
                let [x, y] = grid.coordinates(k);
                f(x, y)
            })
            .collect();
        Self::new(grid, tensors)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn tensor(&self, node: usize) -> [f64; 3] {
        self.tensors[node]
    }

    pub fn tensors(&self) -> &[[f64; 3]] {
        &self.tensors
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            tensors: self
                .tensors
                .iter()
                .map(|t| [t[0] * factor, t[1] * factor, t[2] * factor])
                .collect(),
        }
    }

    /// Rejects off-diagonal entries on boundary nodes. On axis-aligned
    /// boundaries this is what makes the tensor map the normal to a
    /// multiple of itself.
    pub fn check_boundary(&self) -> Result<()> {
        if self.grid.dimension() == 1 {
            return Ok(());
        }
        for (node, t) in self.tensors.iter().enumerate() {
            if self.grid.is_boundary(node) && t[1] != 0.0 {
                return Err(Error::BoundaryCompatibility { node, value: t[1] });
            }
        }
        Ok(())
    }
}

/// Smallest and largest tensor eigenvalue over all nodes. Fails at the
/// first node whose tensor is not positive definite.
pub fn check_ellipticity(sigma: &ConductivityField) -> Result<(f64, f64)> {
    let mut low = f64::INFINITY;
    let mut high = f64::NEG_INFINITY;
    let one_d = sigma.grid.dimension() == 1;
    for (node, t) in sigma.tensors.iter().enumerate() {
        let (lo, hi) = if one_d {
            (t[0], t[0])
        } else {
            sym2_eigenvalues(t[0], t[1], t[2])
        };
        if !(lo > 0.0) {
            return Err(Error::Ellipticity {
                node,
                min_eigenvalue: lo,
            });
        }
        low = low.min(lo);
        high = high.max(hi);
    }
    Ok((low, high))
}
