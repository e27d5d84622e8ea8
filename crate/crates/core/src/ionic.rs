//! Ionic models: reaction terms, rest states, stability predicates, the
//! coefficients of the linearization about a rest state and the purely
//! nonlinear remainder.
//!
//! With `u = u* + v`, `w = w* + z`, the shifted systems read
//! `d/dt (v, z) + [[eps A + alpha, beta], [-gamma, delta]] (v, z) = (I, 0) + (N1, N2)`
//! for the two-variable models, and `d/dt v + (A + alpha) v = I + N1` for
//! Allen-Cahn.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    #[serde(alias = "fhn")]
    FitzHughNagumo,
    #[serde(alias = "ap")]
    AlievPanfilov,
    #[serde(alias = "rm")]
    RogersMcCulloch,
    #[serde(alias = "ac")]
    AllenCahn,
}

impl ModelVariant {
    pub fn short_name(self) -> &'static str {
        match self {
            ModelVariant::FitzHughNagumo => "FHN",
            ModelVariant::AlievPanfilov => "AP",
            ModelVariant::RogersMcCulloch => "RM",
            ModelVariant::AllenCahn => "AC",
        }
    }
}

/// Model parameters. Each variant reads its own subset:
/// FHN `a, b, c`; AP `a, d, k`; RM `a, b, c, d`; AC none. `epsilon`
/// scales the two-variable models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonicModelSpec {
    pub variant: ModelVariant,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub d: f64,
    #[serde(default)]
    pub k: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
}

fn one() -> f64 {
    1.0
}

impl IonicModelSpec {
    pub fn fitzhugh_nagumo(a: f64, b: f64, c: f64, epsilon: f64) -> Result<Self> {
        Self {
            variant: ModelVariant::FitzHughNagumo,
            a,
            b,
            c,
            d: 0.0,
            k: 0.0,
            epsilon,
        }
        .validated()
    }

    pub fn aliev_panfilov(a: f64, d: f64, k: f64, epsilon: f64) -> Result<Self> {
        Self {
            variant: ModelVariant::AlievPanfilov,
            a,
            b: 0.0,
            c: 0.0,
            d,
            k,
            epsilon,
        }
        .validated()
    }

    pub fn rogers_mcculloch(a: f64, b: f64, c: f64, d: f64, epsilon: f64) -> Result<Self> {
        Self {
            variant: ModelVariant::RogersMcCulloch,
            a,
            b,
            c,
            d,
            k: 0.0,
            epsilon,
        }
        .validated()
    }

    pub fn allen_cahn() -> Self {
        Self {
            variant: ModelVariant::AllenCahn,
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            k: 0.0,
            epsilon: 1.0,
        }
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("model.{name}"), format!("must be positive, got {v}")))
            }
        };
        if self.variant == ModelVariant::AllenCahn {
            return Ok(());
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(Error::config("model.a", format!("must lie in (0, 1), got {}", self.a)));
        }
        positive("epsilon", self.epsilon)?;
        match self.variant {
            ModelVariant::FitzHughNagumo => {
                positive("b", self.b)?;
                positive("c", self.c)
            }
            ModelVariant::AlievPanfilov => {
                positive("d", self.d)?;
                positive("k", self.k)
            }
            ModelVariant::RogersMcCulloch => {
                positive("b", self.b)?;
                positive("c", self.c)?;
                positive("d", self.d)
            }
            ModelVariant::AllenCahn => Ok(()),
        }
    }

    pub fn component_count(&self) -> usize {
        if self.variant == ModelVariant::AllenCahn {
            1
        } else {
            2
        }
    }

    /// Scale of the diffusion term in the shifted system: `epsilon` for the
    /// two-variable models, 1 for Allen-Cahn.
    pub fn diffusion_scale(&self) -> f64 {
        if self.variant == ModelVariant::AllenCahn {
            1.0
        } else {
            self.epsilon
        }
    }
}

/// `(F(u, w), G(u, w))`; `G = 0` for Allen-Cahn.
pub fn eval_reaction(model: &IonicModelSpec, u: f64, w: f64) -> (f64, f64) {
    let IonicModelSpec { a, b, c, d, k, .. } = *model;
    match model.variant {
        ModelVariant::FitzHughNagumo => (u * (u - a) * (u - 1.0) + w, b * w - c * u),
        ModelVariant::AlievPanfilov => (k * u * (u - a) * (u - 1.0) + u * w, k * u * (u - 1.0 - a) + d * w),
        ModelVariant::RogersMcCulloch => (b * u * (u - a) * (u - 1.0) + u * w, d * w - c * u),
        ModelVariant::AllenCahn => (u * u * u - u, 0.0),
    }
}

/// A rest state. `index` follows the conventional numbering: 1 is the
/// trivial state (or `u = -1` for Allen-Cahn), 2 and 3 the smaller and
/// larger nontrivial roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub u_star: f64,
    /// Absent for Allen-Cahn.
    pub w_star: Option<f64>,
    pub index: u8,
    /// Coefficient of `v` in the first row before division by `epsilon`.
    pub shift_alpha: f64,
    pub admissible: bool,
}

/// Rest states plus a note when some could not be formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub points: Vec<EquilibriumPoint>,
    pub omitted: Option<String>,
}

impl EquilibriumSet {
    pub fn by_index(&self, index: u8) -> Option<EquilibriumPoint> {
        self.points.iter().copied().find(|p| p.index == index)
    }
}

/// Coefficients of `[[eps A + alpha, beta], [-gamma, delta]]`.
/// `alpha` and `beta` already include `1/eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedSystem {
    pub variant: ModelVariant,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Multiplier of the diffusion operator.
    pub diffusion_scale: f64,
    pub components: usize,
    pub admissible: bool,
}

impl LinearizedSystem {
    /// The sign pattern under which the operator matrix generates a
    /// decaying analytic semigroup with an explicit inverse.
    pub fn sign_pattern_ok(alpha: f64, beta: f64, gamma: f64, delta: f64, components: usize) -> bool {
        if components == 1 {
            alpha > 0.0
        } else {
            alpha > 0.0 && beta >= 0.0 && gamma >= 0.0 && delta > 0.0
        }
    }
}

/// Linear coefficients about a state, no admissibility attached.
fn coefficients(model: &IonicModelSpec, u: f64, w: f64) -> (f64, f64, f64, f64) {
    let IonicModelSpec { a, b, c, d, k, epsilon, .. } = *model;
    match model.variant {
        ModelVariant::FitzHughNagumo => ((3.0 * u * u - 2.0 * (a + 1.0) * u + a) / epsilon, 1.0 / epsilon, c, b),
        ModelVariant::AlievPanfilov => (
            (3.0 * k * u * u - 2.0 * k * (a + 1.0) * u + k * a + w) / epsilon,
            u / epsilon,
            -(2.0 * k * u - k * (a + 1.0)),
            d,
        ),
        ModelVariant::RogersMcCulloch => (
            (3.0 * b * u * u - 2.0 * b * (a + 1.0) * u + b * a + w) / epsilon,
            u / epsilon,
            c,
            d,
        ),
        ModelVariant::AllenCahn => (-1.0 + 3.0 * u * u, 0.0, 0.0, 0.0),
    }
}

fn make_point(model: &IonicModelSpec, u: f64, w: f64, index: u8) -> EquilibriumPoint {
    let (alpha, beta, gamma, delta) = coefficients(model, u, w);
    EquilibriumPoint {
        u_star: u,
        w_star: (model.component_count() == 2).then_some(w),
        index,
        shift_alpha: alpha * model.diffusion_scale(),
        admissible: LinearizedSystem::sign_pattern_ok(alpha, beta, gamma, delta, model.component_count()),
    }
}

/// All real rest states in ascending `u*`, each checked to annihilate the
/// reaction terms.
pub fn equilibria(model: &IonicModelSpec) -> Result<EquilibriumSet> {
    model.validate()?;
    let IonicModelSpec { a, b, c, d, k, .. } = *model;
    let mut pts: Vec<(f64, f64, u8)> = vec![(0.0, 0.0, 1)];
    let mut omitted = None;
    match model.variant {
        ModelVariant::FitzHughNagumo => {
            let disc = (a + 1.0).powi(2) - 4.0 * (a + c / b);
            if disc >= 0.0 {
                let r = disc.sqrt();
                let (u2, u3) = (0.5 * (a + 1.0 - r), 0.5 * (a + 1.0 + r));
                pts.push((u2, c / b * u2, 2));
                pts.push((u3, c / b * u3, 3));
            } else {
                omitted = Some(format!("nontrivial rest states are complex (discriminant {disc:e})"));
            }
        }
        ModelVariant::AlievPanfilov => {
            if d == 1.0 {
                omitted = Some("d = 1: the nontrivial rest states are not defined".into());
            } else {
                let disc = (a + 1.0).powi(2) / 4.0 + d * a / (1.0 - d);
                if disc >= 0.0 {
                    let e = disc.sqrt();
                    let wf = |u: f64| -k * u * u + k * (a + 1.0) * u - k * a;
                    let (u2, u3) = (0.5 * (a + 1.0) - e, 0.5 * (a + 1.0) + e);
                    pts.push((u2, wf(u2), 2));
                    pts.push((u3, wf(u3), 3));
                } else {
                    omitted = Some(format!("nontrivial rest states are complex (discriminant {disc:e})"));
                }
            }
        }
        ModelVariant::RogersMcCulloch => {
            let m = a + 1.0 - c / (b * d);
            let disc = m * m - 4.0 * a;
            if disc >= 0.0 {
                let e = disc.sqrt();
                let (u2, u3) = (0.5 * (m - e), 0.5 * (m + e));
                pts.push((u2, c / d * u2, 2));
                pts.push((u3, c / d * u3, 3));
            } else {
                omitted = Some(format!("nontrivial rest states are complex (discriminant {disc:e})"));
            }
        }
        ModelVariant::AllenCahn => {
            pts = vec![(-1.0, 0.0, 1), (0.0, 0.0, 2), (1.0, 0.0, 3)];
        }
    }
    for &(u, w, idx) in &pts {
        let (f, g) = eval_reaction(model, u, w);
        let bound = 1e-12 * (1.0 + u.abs().powi(3));
        if f.abs() + g.abs() > bound {
            return Err(Error::arg(format!(
                "rest state {idx} at u = {u} fails the reaction check (|F| + |G| = {:e})",
                f.abs() + g.abs()
            )));
        }
    }
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let points = pts.into_iter().map(|(u, w, i)| make_point(model, u, w, i)).collect();
    Ok(EquilibriumSet { points, omitted })
}

/// Outcome of a stability predicate with every intermediate value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub holds: bool,
    pub details: Vec<(String, f64)>,
}

/// The model-level condition under which the largest nontrivial rest state
/// admits periodic solutions: for FHN `c < b((a-1)^2/4 - a)` together with
/// `u3 > (a + 1 + sqrt((a+1)^2 - 3a))/3`; for RM
/// `sqrt((a+1-c/(bd))^2 - 4a) - c/(bd) > 0`. Aliev-Panfilov never
/// satisfies it; for Allen-Cahn it holds (at `u = +-1`). Equality fails.
pub fn stability_condition(model: &IonicModelSpec) -> Result<StabilityReport> {
    model.validate()?;
    let IonicModelSpec { a, b, c, d, .. } = *model;
    let mut details = Vec::new();
    let holds = match model.variant {
        ModelVariant::FitzHughNagumo => {
            let identity_gap = ((a + 1.0).powi(2) - 4.0 * a - (a - 1.0).powi(2)).abs();
            debug_assert!(identity_gap <= 1e-12 * (1.0 + a * a));
            details.push(("identity_gap".into(), identity_gap));
            let bound = b * ((a - 1.0).powi(2) / 4.0 - a);
            details.push(("c_bound".into(), bound));
            details.push(("c".into(), c));
            let disc = (a + 1.0).powi(2) - 4.0 * (a + c / b);
            details.push(("discriminant".into(), disc));
            let threshold = (a + 1.0 + ((a + 1.0).powi(2) - 3.0 * a).sqrt()) / 3.0;
            details.push(("u3_threshold".into(), threshold));
            if disc >= 0.0 {
                let u3 = 0.5 * (a + 1.0 + disc.sqrt());
                details.push(("u3".into(), u3));
                c < bound && u3 > threshold
            } else {
                false
            }
        }
        ModelVariant::RogersMcCulloch => {
            let ratio = c / (b * d);
            details.push(("c_over_bd".into(), ratio));
            let disc = (a + 1.0 - ratio).powi(2) - 4.0 * a;
            details.push(("discriminant".into(), disc));
            if disc >= 0.0 {
                let e = disc.sqrt();
                details.push(("e".into(), e));
                details.push(("margin".into(), e - ratio));
                e - ratio > 0.0
            } else {
                false
            }
        }
        ModelVariant::AlievPanfilov => false,
        ModelVariant::AllenCahn => true,
    };
    Ok(StabilityReport { holds, details })
}

/// Whether a particular rest state is covered: the trivial state of the
/// two-variable models always is, the largest nontrivial state is covered
/// when [`stability_condition`] holds, Allen-Cahn at `u = +-1`.
pub fn is_stable(model: &IonicModelSpec, eq: &EquilibriumPoint) -> Result<bool> {
    Ok(match (model.variant, eq.index) {
        (ModelVariant::AllenCahn, 2) => false,
        (ModelVariant::AllenCahn, _) => true,
        (_, 1) => true,
        (ModelVariant::AlievPanfilov, _) => false,
        (_, 3) => stability_condition(model)?.holds,
        _ => false,
    })
}

/// Coefficients of the shifted system at a rest state.
pub fn linearize(model: &IonicModelSpec, eq: &EquilibriumPoint) -> LinearizedSystem {
    let w = eq.w_star.unwrap_or(0.0);
    let (alpha, beta, gamma, delta) = coefficients(model, eq.u_star, w);
    let components = model.component_count();
    LinearizedSystem {
        variant: model.variant,
        alpha,
        beta,
        gamma,
        delta,
        diffusion_scale: model.diffusion_scale(),
        components,
        admissible: LinearizedSystem::sign_pattern_ok(alpha, beta, gamma, delta, components),
    }
}

/// The purely nonlinear remainder `(N1, N2)` at a single node.
pub fn shifted_nonlinearity_scalar(model: &IonicModelSpec, eq: &EquilibriumPoint, v: f64, z: f64) -> (f64, f64) {
    let IonicModelSpec { a, b, k, epsilon, .. } = *model;
    let ui = eq.u_star;
    let v2 = v * v;
    let v3 = v2 * v;
    match model.variant {
        ModelVariant::FitzHughNagumo => (-(v3 + (3.0 * ui - a - 1.0) * v2) / epsilon, 0.0),
        ModelVariant::AlievPanfilov => (
            -(k * v3 + (3.0 * k * ui - k * (a + 1.0)) * v2 + v * z) / epsilon,
            -k * v2,
        ),
        ModelVariant::RogersMcCulloch => (-(b * v3 + (3.0 * b * ui - b * (a + 1.0)) * v2 + v * z) / epsilon, 0.0),
        ModelVariant::AllenCahn => (-v3 - 3.0 * ui * v2, 0.0),
    }
}

/// Nodewise remainder on fields; `z` is ignored for Allen-Cahn.
pub fn shifted_nonlinearity(
    model: &IonicModelSpec,
    eq: &EquilibriumPoint,
    v: &[f64],
    z: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let mut n1 = vec![0.0; n];
    let mut n2 = vec![0.0; n];
    for i in 0..n {
        let zi = if z.is_empty() { 0.0 } else { z[i] };
        let (p, q) = shifted_nonlinearity_scalar(model, eq, v[i], zi);
        n1[i] = p;
        n2[i] = q;
    }
    (n1, n2)
}
