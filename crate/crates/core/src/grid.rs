//! Structured vertex-centred grids on intervals and rectangles, nodal
//! fields, trapezoid quadrature and the discrete norms built on it.
//!
//! Node numbering is x-fastest: node `(i, j)` has index `i + nx * j`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform vertex-centred grid on `[0, L_x]` or `[0, L_x] x [0, L_y]`.
#[derive(Debug, Clone)]
pub struct Grid {
    dimension: usize,
    extents: [usize; 2],
    lengths: [f64; 2],
    spacing: [f64; 2],
    weights: Arc<[f64]>,
    measure: f64,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension
            && self.extents == other.extents
            && self.lengths == other.lengths
    }
}

/// Serializable description of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dimension: usize,
    pub extents: Vec<usize>,
    pub lengths: Vec<f64>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        make_grid(self.dimension, &self.extents, &self.lengths)
    }
}

/// Builds a grid, rejecting fewer than three nodes per axis and non-positive lengths.
pub fn make_grid(dimension: usize, extents: &[usize], lengths: &[f64]) -> Result<Grid> {
    if dimension != 1 && dimension != 2 {
        return Err(Error::InvalidGrid(format!(
            "dimension must be 1 or 2, got {dimension}"
        )));
    }
    if extents.len() != dimension || lengths.len() != dimension {
        return Err(Error::InvalidGrid(format!(
            "expected {dimension} extents and lengths, got {} and {}",
            extents.len(),
            lengths.len()
        )));
    }
    let mut ext = [1usize; 2];
    let mut len = [1.0f64; 2];
    let mut spacing = [1.0f64; 2];
    for axis in 0..dimension {
        if extents[axis] < 3 {
            return Err(Error::InvalidGrid(format!(
                "axis {axis} has {} nodes; at least 3 are required",
                extents[axis]
            )));
        }
        if !(lengths[axis] > 0.0) || !lengths[axis].is_finite() {
            return Err(Error::InvalidGrid(format!(
                "axis {axis} has non-positive length {}",
                lengths[axis]
            )));
        }
        ext[axis] = extents[axis];
        len[axis] = lengths[axis];
        spacing[axis] = lengths[axis] / (extents[axis] - 1) as f64;
    }

    let axis_weights = |axis: usize| -> Vec<f64> {
        let n = ext[axis];
        if axis >= dimension {
            return vec![1.0];
        }
        let h = spacing[axis];
        (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
            .collect()
    };
    let wx = axis_weights(0);
    let wy = axis_weights(1);
    let mut weights = Vec::with_capacity(ext[0] * ext[1]);
    for wyj in &wy {
        for wxi in &wx {
            weights.push(wxi * wyj);
        }
    }
    let measure = weights.iter().sum();

    Ok(Grid {
        dimension,
        extents: ext,
        lengths: len,
        spacing,
        weights: weights.into(),
        measure,
    })
}

impl Grid {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents[..self.dimension]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dimension]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dimension]
    }

    pub fn node_count(&self) -> usize {
        self.extents[0] * self.extents[1]
    }

    /// Trapezoid weights, one per node.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Domain measure as seen by the quadrature (sum of the weights).
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            dimension: self.dimension,
            extents: self.extents().to_vec(),
            lengths: self.lengths().to_vec(),
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.extents[0] * j
    }

    /// Axis indices `(i, j)` of a node (`j = 0` in 1D).
    pub fn position(&self, node: usize) -> (usize, usize) {
        (node % self.extents[0], node / self.extents[0])
    }

    /// Physical coordinates of a node; the second entry is 0 in 1D.
    pub fn coordinates(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.position(node);
        [i as f64 * self.spacing[0], j as f64 * self.spacing[1] * (self.dimension - 1) as f64]
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        let (i, j) = self.position(node);
        let on_x = i == 0 || i == self.extents[0] - 1;
        if self.dimension == 1 {
            on_x
        } else {
            on_x || j == 0 || j == self.extents[1] - 1
        }
    }

    /// Same domain with each axis refined by a factor of two (`n -> 2n - 1` nodes).
    pub fn refined(&self) -> Grid {
        let extents: Vec<usize> = self.extents().iter().map(|&n| 2 * n - 1).collect();
        make_grid(self.dimension, &extents, self.lengths()).expect("refinement of a valid grid")
    }

    pub(crate) fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.node_count() {
            return Err(Error::arg(format!(
                "{what} has {len} values but the grid has {} nodes",
                self.node_count()
            )));
        }
        Ok(())
    }
}

/// Nodal values of a scalar function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len(), "field")?;
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("field value at node {k} is not finite")));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.node_count()],
        }
    }

    /// Samples `f(x, y)` at every node (`y = 0` in 1D).
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|k| {
                let [x, y] = grid.coordinates(k);
                f(x, y)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub(crate) fn from_parts(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        Self {
            grid: grid.clone(),
            values,
        }
    }
}

/// `M` uniform samples over one period of a state with one or more
/// components. Sample `k` sits at time `k T / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicTrajectory {
    grid: Grid,
    period: f64,
    components: usize,
    samples: Vec<Vec<f64>>,
}

impl PeriodicTrajectory {
    /// Each sample is a flat state: component `c` occupies nodes
    /// `c * N .. (c + 1) * N`.
    pub fn new(grid: &Grid, period: f64, components: usize, samples: Vec<Vec<f64>>) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::arg(format!("period must be positive, got {period}")));
        }
        if components == 0 {
            return Err(Error::arg("trajectory needs at least one component"));
        }
        if samples.len() < 4 {
            return Err(Error::arg(format!(
                "a periodic trajectory needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        let len = components * grid.node_count();
        for (k, s) in samples.iter().enumerate() {
            if s.len() != len {
                return Err(Error::arg(format!(
                    "sample {k} has {} values, expected {len}",
                    s.len()
                )));
            }
        }
        Ok(Self {
            grid: grid.clone(),
            period,
            components,
            samples,
        })
    }

    pub fn zeros(grid: &Grid, period: f64, components: usize, samples: usize) -> Result<Self> {
        let len = components * grid.node_count();
        Self::new(grid, period, components, vec![vec![0.0; len]; samples])
    }

    /// Samples `f(t, x, y) -> component values` at `t = k T / M`.
    pub fn from_fn(
        grid: &Grid,
        period: f64,
        components: usize,
        samples: usize,
        f: impl Fn(f64, f64, f64) -> Vec<f64>,
    ) -> Result<Self> {
        let n = grid.node_count();
        let data = (0..samples)
            .map(|k| {
                let t = k as f64 * period / samples as f64;
                let mut state = vec![0.0; components * n];
                for node in 0..n {
                    let [x, y] = grid.coordinates(node);
                    let vals = f(t, x, y);
                    for c in 0..components {
                        state[c * n + node] = vals[c];
                    }
                }
                state
            })
            .collect();
        Self::new(grid, period, components, data)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        (k % self.len()) as f64 * self.period / self.len() as f64
    }

    /// Sample `k`; indices wrap modulo `M`.
    pub fn sample(&self, k: usize) -> &[f64] {
        &self.samples[k % self.samples.len()]
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn component(&self, k: usize, c: usize) -> ScalarField {
        let n = self.grid.node_count();
        ScalarField::from_parts(&self.grid, self.sample(k)[c * n..(c + 1) * n].to_vec())
    }

    pub(crate) fn with_samples(&self, samples: Vec<Vec<f64>>) -> Self {
        Self {
            grid: self.grid.clone(),
            period: self.period,
            components: self.components,
            samples,
        }
    }

    /// Pointwise linear combination `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &PeriodicTrajectory, b: f64) -> Result<Self> {
        if other.len() != self.len() || other.components != self.components || other.grid != self.grid {
            return Err(Error::arg("trajectories have incompatible layouts"));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        Ok(self.with_samples(samples))
    }

    /// Largest absolute nodal value over all samples.
    pub fn max_abs(&self) -> f64 {
        self.samples
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Trapezoid approximation of the domain integral.
pub fn integrate(field: &ScalarField) -> f64 {
    weighted_sum(field.grid.weights(), &field.values)
}

pub(crate) fn weighted_sum(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v).sum()
}

pub(crate) fn weighted_dot(weights: &[f64], x: &[f64], y: &[f64]) -> f64 {
    weights
        .iter()
        .zip(x.iter().zip(y))
        .map(|(w, (a, b))| w * a * b)
        .sum()
}

/// L^q norm of nodal values under the weights; `q = f64::INFINITY` gives the max norm.
pub(crate) fn weighted_lq(weights: &[f64], values: &[f64], q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::arg(format!("L^q norm needs q >= 1, got {q}")));
    }
    if q.is_infinite() {
        return Ok(values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    if q == 2.0 {
        return Ok(weighted_dot(weights, values, values).sqrt());
    }
    let s: f64 = weights
        .iter()
        .zip(values)
        .map(|(w, v)| w * v.abs().powf(q))
        .sum();
    Ok(s.powf(1.0 / q))
}

/// L^q norm of a multi-component state: the components are stacked, so the
/// result is `(sum_c ||x_c||_q^q)^(1/q)`.
pub fn state_lq_norm(grid: &Grid, state: &[f64], q: f64) -> Result<f64> {
    let n = grid.node_count();
    if n == 0 || !state.len().is_multiple_of(n) {
        return Err(Error::arg("state length is not a multiple of the node count"));
    }
    let comps = state.len() / n;
    if q.is_infinite() {
        return weighted_lq(grid.weights(), state, q);
    }
    let mut total = 0.0;
    for c in 0..comps {
        total += weighted_lq(grid.weights(), &state[c * n..(c + 1) * n], q)?.powf(q);
    }
    Ok(total.powf(1.0 / q))
}

/// `(integral |f|^q)^(1/q)` by trapezoid quadrature, or `max |f|` for `q = inf`.
pub fn lq_norm(field: &ScalarField, q: f64) -> Result<f64> {
    weighted_lq(field.grid.weights(), &field.values, q)
}

/// Rectangle-rule Bochner norm `((T/M) sum_k ||x_k||^p)^(1/p)` over a
/// periodic trajectory, with the spatial norm supplied by the caller.
pub fn bochner_norm<F>(traj: &PeriodicTrajectory, p: f64, mut spatial_norm: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::arg(format!("Bochner norm needs 1 <= p < inf, got {p}")));
    }
    if traj.is_empty() {
        return Err(Error::arg("empty trajectory"));
    }
    let dt = traj.period() / traj.len() as f64;
    let mut acc = 0.0;
    for s in traj.samples() {
        acc += spatial_norm(s)?.powf(p);
    }
    Ok((dt * acc).powf(1.0 / p))
}

/// Removes the mean: `f - (1/|Omega|) integral f`.
pub fn project_mean_zero(field: &ScalarField) -> ScalarField {
    let mut values = field.values.clone();
    project_mean_zero_in_place(field.grid.weights(), field.grid.measure(), &mut values);
    ScalarField::from_parts(&field.grid, values)
}

pub(crate) fn project_mean_zero_in_place(weights: &[f64], measure: f64, values: &mut [f64]) {
    let mean = weighted_sum(weights, values) / measure;
    for v in values.iter_mut() {
        *v -= mean;
    }
}
