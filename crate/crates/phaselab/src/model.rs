//! Problem description and closed-form model quantities.
//!
//! The energy under study is
//!
//! ```text
//!   J[u] = ∫ |∇u|^p + F_γ(u) + f·u dx,        2 <= p,  0 <= γ <= 1,
//!   F_γ(v) = λ₊ (v⁺)^γ + λ₋ (v⁻)^γ            (γ > 0),
//!   F_0(v) = λ₊ 1{v > 0} + λ₋ 1{v <= 0},
//! ```
//!
//! with 0 <= λ₋ < λ₊. This module holds the instance data
//! ([`ProblemSpec`]), the potential and its smoothed slope, and the
//! predicted regularity exponents: the gradient Hölder exponent
//! `min{α_p, γ/(p−γ), (q−n)/((p−1)q)}`, the integrability threshold
//! `q(p,n,γ) = n(p−γ)/(p(1−γ))`, the one-phase profile constant of
//! `c·(x⁺)^{p/(p−γ)}`, and the jet slope from the flux balance
//! `|∇u⁺|^p − |∇u⁻|^p = (λ₊−λ₋)/(p−1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{DiscreteFunction, Domain, Grid};

/// Source term family. Radial powers are cut off at one grid spacing from
/// the singular point (value held constant inside) so node evaluation
/// stays finite without leaving the declared L^q class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SourceFamily {
    Zero,
    Constant(f64),
    RadialPower {
        amplitude: f64,
        exponent: f64,
        center: [f64; 2],
    },
    /// Node values supplied externally (one per grid node).
    Gridded(Vec<f64>),
}

/// Source term plus its declared integrability class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub family: SourceFamily,
    /// Declared q with f ∈ L^q; `f64::INFINITY` for bounded sources.
    pub q: f64,
}

impl SourceSpec {
    pub fn zero() -> SourceSpec {
        SourceSpec { family: SourceFamily::Zero, q: f64::INFINITY }
    }

    pub fn constant(c: f64) -> SourceSpec {
        SourceSpec { family: SourceFamily::Constant(c), q: f64::INFINITY }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, SourceFamily::Zero)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.q > 1.0) {
            return Err(Error::InvalidExponent(self.q));
        }
        match &self.family {
            SourceFamily::Zero => Ok(()),
            SourceFamily::Constant(c) => {
                if c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidProblem("constant source must be finite".into()))
                }
            }
            SourceFamily::RadialPower { amplitude, exponent, .. } => {
                if !amplitude.is_finite() {
                    return Err(Error::InvalidProblem("radial source amplitude must be finite".into()));
                }
                // membership |X|^{-s} ∈ L^q near the singular point needs s·q < n
                let s = *exponent;
                if s > 0.0 && (self.q.is_infinite() || s * self.q >= dim as f64) {
                    return Err(Error::InvalidProblem(format!(
                        "radial power s = {s} is not in L^q for declared q = {} in dimension {dim} (needs s*q < n)",
                        self.q
                    )));
                }
                Ok(())
            }
            SourceFamily::Gridded(values) => {
                if values.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidProblem("gridded source contains non-finite values".into()))
                }
            }
        }
    }

    /// Pointwise value for the analytic families; `h` is the cutoff radius
    /// for radial powers. Panics for `Gridded` (use the element/node paths).
    pub fn value_at(&self, x: &[f64; 2], h: f64) -> f64 {
        match &self.family {
            SourceFamily::Zero => 0.0,
            SourceFamily::Constant(c) => *c,
            SourceFamily::RadialPower { amplitude, exponent, center } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                let d = (dx * dx + dy * dy).sqrt().max(h);
                amplitude * d.powf(-exponent)
            }
            SourceFamily::Gridded(_) => panic!("gridded sources are sampled per node"),
        }
    }

    /// Source values at the grid nodes.
    pub fn node_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        match &self.family {
            SourceFamily::Gridded(values) => {
                if values.len() != grid.node_count() {
                    return Err(Error::GridMismatch(format!(
                        "gridded source has {} values, grid has {} nodes",
                        values.len(),
                        grid.node_count()
                    )));
                }
                Ok(values.clone())
            }
            _ => {
                let h = grid.h_max();
                Ok((0..grid.node_count())
                    .map(|i| self.value_at(&grid.node_coord(i), h))
                    .collect())
            }
        }
    }

    /// Source values at element barycenters (the quadrature points).
    pub fn element_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        match &self.family {
            SourceFamily::Gridded(values) => {
                if values.len() != grid.node_count() {
                    return Err(Error::GridMismatch("gridded source size mismatch".into()));
                }
                Ok((0..grid.element_count())
                    .map(|e| grid.element_mean(values, e))
                    .collect())
            }
            _ => {
                let h = grid.h_max();
                Ok((0..grid.element_count())
                    .map(|e| self.value_at(&grid.element_barycenter(e), h))
                    .collect())
            }
        }
    }
}

/// Boundary trace φ. Families are evaluated on boundary nodes; `extension`
/// provides a conforming function to start solves from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundarySpec {
    Constant(f64),
    /// 1-D only: φ(a) = left, φ(b) = right.
    Ends { left: f64, right: f64 },
    /// c0 + cx·x + cy·y evaluated on the boundary.
    Affine { c0: f64, cx: f64, cy: f64 },
    /// Explicit values, one per boundary node in node storage order.
    Nodes(Vec<f64>),
}

impl BoundarySpec {
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        match self {
            BoundarySpec::Ends { left, right } => {
                if domain.dim() != 1 {
                    return Err(Error::InvalidProblem("Ends boundary data is 1-D only".into()));
                }
                if left.is_finite() && right.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidProblem("boundary values must be finite".into()))
                }
            }
            BoundarySpec::Constant(c) => {
                if c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidProblem("boundary values must be finite".into()))
                }
            }
            BoundarySpec::Affine { c0, cx, cy } => {
                if c0.is_finite() && cx.is_finite() && cy.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidProblem("boundary values must be finite".into()))
                }
            }
            BoundarySpec::Nodes(values) => {
                if values.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidProblem("boundary values must be finite".into()))
                }
            }
        }
    }

    /// Values on the boundary nodes of `grid`, as (node index, value).
    pub fn boundary_values(&self, grid: &Grid) -> Result<Vec<(usize, f64)>> {
        let nodes = grid.boundary_nodes();
        match self {
            BoundarySpec::Constant(c) => Ok(nodes.into_iter().map(|i| (i, *c)).collect()),
            BoundarySpec::Ends { left, right } => {
                let n = grid.subdivisions();
                Ok(vec![(0, *left), (n, *right)])
            }
            BoundarySpec::Affine { c0, cx, cy } => Ok(nodes
                .into_iter()
                .map(|i| {
                    let x = grid.node_coord(i);
                    (i, c0 + cx * x[0] + cy * x[1])
                })
                .collect()),
            BoundarySpec::Nodes(values) => {
                if values.len() != nodes.len() {
                    return Err(Error::GridMismatch(format!(
                        "boundary data has {} values, grid has {} boundary nodes",
                        values.len(),
                        nodes.len()
                    )));
                }
                Ok(nodes.into_iter().zip(values.iter().copied()).collect())
            }
        }
    }

    /// A conforming extension of the trace: analytic families evaluated
    /// everywhere, `Ends` interpolated affinely, explicit node data
    /// extended by zero in the interior.
    pub fn extension(&self, grid: &Grid) -> Result<DiscreteFunction> {
        let mut u = DiscreteFunction::zeros(grid.clone());
        match self {
            BoundarySpec::Constant(c) => {
                u.values_mut().fill(*c);
            }
            BoundarySpec::Ends { left, right } => {
                let (a, b) = match *grid.domain() {
                    Domain::Interval { a, b } => (a, b),
                    _ => return Err(Error::InvalidProblem("Ends boundary data is 1-D only".into())),
                };
                for i in 0..grid.node_count() {
                    let x = grid.node_coord(i)[0];
                    let t = (x - a) / (b - a);
                    u.values_mut()[i] = left + t * (right - left);
                }
            }
            BoundarySpec::Affine { c0, cx, cy } => {
                for i in 0..grid.node_count() {
                    let x = grid.node_coord(i);
                    u.values_mut()[i] = c0 + cx * x[0] + cy * x[1];
                }
            }
            BoundarySpec::Nodes(_) => {
                for (i, v) in self.boundary_values(grid)? {
                    u.values_mut()[i] = v;
                }
            }
        }
        Ok(u)
    }

    /// sup |φ| over the boundary of `grid`.
    pub fn sup_abs(&self, grid: &Grid) -> f64 {
        self.boundary_values(grid)
            .map(|vals| vals.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs())))
            .unwrap_or(f64::NAN)
    }

    /// Oscillation (max − min) of φ over the boundary of `grid`.
    pub fn oscillation(&self, grid: &Grid) -> f64 {
        match self.boundary_values(grid) {
            Ok(vals) if !vals.is_empty() => {
                let max = vals.iter().fold(f64::NEG_INFINITY, |m, (_, v)| m.max(*v));
                let min = vals.iter().fold(f64::INFINITY, |m, (_, v)| m.min(*v));
                max - min
            }
            _ => f64::NAN,
        }
    }
}

/// Full description of one minimization instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    /// Degeneracy exponent, p >= 2.
    pub p: f64,
    /// Singularity parameter, 0 <= γ <= 1; γ = 0 is the jet/cavity case.
    pub gamma: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub source: SourceSpec,
    pub boundary: BoundarySpec,
    pub domain: Domain,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if !(self.p >= 2.0) || !self.p.is_finite() {
            return Err(Error::InvalidProblem(format!("p must satisfy 2 <= p < inf, got {}", self.p)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidProblem(format!("gamma must lie in [0,1], got {}", self.gamma)));
        }
        if !(self.lambda_minus >= 0.0
            && self.lambda_plus > self.lambda_minus
            && self.lambda_plus.is_finite())
        {
            return Err(Error::InvalidProblem(format!(
                "phase weights must satisfy 0 <= lambda_minus < lambda_plus < inf, got ({}, {})",
                self.lambda_minus, self.lambda_plus
            )));
        }
        self.source.validate(self.dim())?;
        self.boundary.validate(&self.domain)?;
        Ok(())
    }

    /// Same instance with a different singularity parameter (continuation
    /// stages).
    pub fn with_gamma(&self, gamma: f64) -> ProblemSpec {
        ProblemSpec { gamma, ..self.clone() }
    }
}

/// F_γ(v); at γ = 0 the zero set is counted in the λ₋ phase.
pub fn potential_value(v: f64, spec: &ProblemSpec) -> f64 {
    if spec.gamma == 0.0 {
        if v > 0.0 {
            spec.lambda_plus
        } else {
            spec.lambda_minus
        }
    } else if v > 0.0 {
        if spec.lambda_plus != 0.0 {
            spec.lambda_plus * v.powf(spec.gamma)
        } else {
            0.0
        }
    } else if v < 0.0 {
        if spec.lambda_minus != 0.0 {
            spec.lambda_minus * (-v).powf(spec.gamma)
        } else {
            0.0
        }
    } else {
        0.0
    }
}

/// Value of the ε-smoothed potential
/// λ₊[((v⁺)²+ε²)^{γ/2} − ε^γ] + λ₋[((v⁻)²+ε²)^{γ/2} − ε^γ].
/// Nonnegative, exact at ε = 0, differentiable everywhere for ε > 0.
pub fn smoothed_potential_value(v: f64, spec: &ProblemSpec, eps: f64) -> f64 {
    debug_assert!(spec.gamma > 0.0);
    let g = spec.gamma;
    let shift = if eps > 0.0 { eps.powf(g) } else { 0.0 };
    let plus = v.max(0.0);
    let minus = (-v).max(0.0);
    spec.lambda_plus * ((plus * plus + eps * eps).powf(0.5 * g) - shift)
        + spec.lambda_minus * ((minus * minus + eps * eps).powf(0.5 * g) - shift)
}

/// Derivative of the ε-smoothed potential; at ε = 0 and v = 0 the chosen
/// subgradient is 0.
pub fn potential_slope(v: f64, spec: &ProblemSpec, eps: f64) -> Result<f64> {
    if spec.gamma == 0.0 {
        return Err(Error::DiscontinuousPotential);
    }
    let g = spec.gamma;
    if v == 0.0 {
        return Ok(0.0);
    }
    let lambda = if v > 0.0 { spec.lambda_plus } else { spec.lambda_minus };
    Ok(lambda * g * v * (v * v + eps * eps).powf(0.5 * g - 1.0))
}

/// Inputs for the gradient Hölder exponent prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentInputs {
    pub p: f64,
    pub gamma: f64,
    /// Source integrability; `f64::INFINITY` allowed.
    pub q: f64,
    /// Ambient dimension.
    pub n: usize,
    /// Hölder exponent of p-harmonic gradients; its true value is unknown
    /// in general, so it is a user input.
    pub alpha_p: f64,
}

impl ExponentInputs {
    /// Default α_p = 1/(p−1) (which is exactly 1 at p = 2).
    pub fn new(p: f64, gamma: f64, q: f64, n: usize) -> ExponentInputs {
        ExponentInputs { p, gamma, q, n, alpha_p: 1.0 / (p - 1.0) }
    }

    pub fn with_alpha_p(mut self, alpha_p: f64) -> ExponentInputs {
        self.alpha_p = alpha_p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0) {
            return Err(Error::InvalidProblem(format!("p must be >= 2, got {}", self.p)));
        }
        if !(self.alpha_p > 0.0 && self.alpha_p <= 1.0) {
            return Err(Error::InvalidProblem(format!(
                "alpha_p must lie in (0,1], got {}",
                self.alpha_p
            )));
        }
        Ok(())
    }
}

/// Which term attains the predicted exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaRegime {
    /// min attained at α_p: the open-exponent regime (C^{1,σ} for σ < α_p).
    PHarmonicOpen,
    /// min attained at γ/(p−γ): the singular absorption rate.
    GammaRate,
    /// min attained at (q−n)/((p−1)q): source roughness.
    SourceRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaPrediction {
    pub alpha: f64,
    pub regime: AlphaRegime,
}

/// Predicted gradient Hölder exponent min{α_p, γ/(p−γ), (q−n)/((p−1)q)}
/// for γ in (0,1] and q > n.
pub fn predicted_alpha(inputs: &ExponentInputs) -> Result<AlphaPrediction> {
    inputs.validate()?;
    if !(inputs.gamma > 0.0 && inputs.gamma <= 1.0) {
        return Err(Error::InvalidProblem(format!(
            "gradient Holder prediction needs gamma in (0,1], got {}",
            inputs.gamma
        )));
    }
    let n = inputs.n as f64;
    if !(inputs.q > n) {
        return Err(Error::BorderlineRegime { q: inputs.q, n: inputs.n });
    }
    let gamma_rate = inputs.gamma / (inputs.p - inputs.gamma);
    let source_rate = if inputs.q.is_infinite() {
        1.0 / (inputs.p - 1.0)
    } else {
        (inputs.q - n) / ((inputs.p - 1.0) * inputs.q)
    };
    let closed = gamma_rate.min(source_rate);
    if closed < inputs.alpha_p {
        let regime = if gamma_rate <= source_rate {
            AlphaRegime::GammaRate
        } else {
            AlphaRegime::SourceRate
        };
        Ok(AlphaPrediction { alpha: closed, regime })
    } else {
        Ok(AlphaPrediction { alpha: inputs.alpha_p, regime: AlphaRegime::PHarmonicOpen })
    }
}

/// Integrability threshold q(p,n,γ) = n(p−γ)/(p(1−γ)); infinite at γ = 1.
pub fn threshold_q(p: f64, n: usize, gamma: f64) -> f64 {
    if gamma >= 1.0 {
        f64::INFINITY
    } else {
        n as f64 * (p - gamma) / (p * (1.0 - gamma))
    }
}

/// The constant c > 0 for which c·(x⁺)^{p/(p−γ)} solves the homogeneous
/// one-phase Euler-Lagrange equation:
/// c = [λ₊ (p−γ)^p / (p^p (p−1))]^{1/(p−γ)}.
pub fn profile_constant(p: f64, gamma: f64, lambda_plus: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Err(Error::UseJetOracle);
    }
    if !(gamma > 0.0 && gamma <= 1.0 && lambda_plus > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "profile constant needs gamma in (0,1] and lambda_plus > 0, got ({gamma}, {lambda_plus})"
        )));
    }
    let base = lambda_plus * (p - gamma).powf(p) / (p.powf(p) * (p - 1.0));
    Ok(base.powf(1.0 / (p - gamma)))
}

/// Positive-phase slope from the flux balance:
/// m₊ = (m₋^p + (λ₊−λ₋)/(p−1))^{1/p}.
pub fn jet_slope(p: f64, lambda_plus: f64, lambda_minus: f64, m_minus: f64) -> f64 {
    (m_minus.powf(p) + (lambda_plus - lambda_minus) / (p - 1.0)).powf(1.0 / p)
}
