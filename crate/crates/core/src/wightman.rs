//! Two-point structures of the massless scalar field in 1+1 dimensions.
//!
//! W(x) = −(1/4π) log(−x² + iε x⁰) on the principal branch and the
//! commutator function D(x) = ½ sign(x⁰) θ(x²), with x² = (x⁰)² − (x¹)².
//! The indefinite inner product on test functions is evaluated in momentum
//! space; the position-space double integral is kept as a cross-check on
//! zero-mean combinations.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{MomentumProfile, SpacetimeCombination};
use crate::quad::{
    eps_extrapolate, integrate, ir_weighted_integral, Estimate,
    Extrapolated, QuadratureConfig,
};

/// |x²| below this is classified lightlike.
pub const LIGHTLIKE_BAND: f64 = 1e-12;
/// Below this ε the logarithm is not evaluated inside the lightlike band.
pub const ILL_CONDITIONED_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalClass {
    TimelikeFuture,
    TimelikePast,
    Spacelike,
    Lightlike,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: f64,
}

impl SpacetimePoint {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }

    /// x² = (x⁰)² − (x¹)²
    pub fn interval(&self) -> f64 {
        (self.t - self.x) * (self.t + self.x)
    }

    pub fn causal_class(&self) -> CausalClass {
        let s = self.interval();
        if s.abs() <= LIGHTLIKE_BAND {
            CausalClass::Lightlike
        } else if s < 0.0 {
            CausalClass::Spacelike
        } else if self.t > 0.0 {
            CausalClass::TimelikeFuture
        } else {
            CausalClass::TimelikePast
        }
    }

    pub fn reflected(&self) -> Self {
        Self::new(-self.t, -self.x)
    }

    /// Lorentz boost with the given rapidity.
    pub fn boosted(&self, rapidity: f64) -> Self {
        let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
        Self::new(ch * self.t + sh * self.x, sh * self.t + ch * self.x)
    }
}

/// W(x) at finite ε.
pub fn w_position(x: SpacetimePoint, eps: f64) -> Result<Complex64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let arg = Complex64::new(-x.interval(), eps * x.t);
    let lightlike = x.causal_class() == CausalClass::Lightlike;
    if (lightlike && eps < ILL_CONDITIONED_EPS) || arg == Complex64::new(0.0, 0.0) {
        return Err(Error::IllConditionedLightlike { t: x.t, x: x.x, eps });
    }
    Ok(-arg.ln() / (4.0 * PI))
}

/// The ε → 0 boundary value −(1/4π)[log|x²| + iπ θ(x²) sign(x⁰)].
pub fn w_boundary(x: SpacetimePoint) -> Result<Complex64> {
    let s = x.interval();
    let phase = match x.causal_class() {
        CausalClass::Lightlike => return Err(Error::LightlikeBoundary { t: x.t, x: x.x }),
        CausalClass::Spacelike => 0.0,
        CausalClass::TimelikeFuture => PI,
        CausalClass::TimelikePast => -PI,
    };
    Ok(-Complex64::new(s.abs().ln(), phase) / (4.0 * PI))
}

pub fn d_commutator(x: SpacetimePoint) -> Result<f64> {
    Ok(match x.causal_class() {
        CausalClass::Lightlike => return Err(Error::LightlikeBoundary { t: x.t, x: x.x }),
        CausalClass::Spacelike => 0.0,
        CausalClass::TimelikeFuture => 0.5,
        CausalClass::TimelikePast => -0.5,
    })
}

/// W(x) − W(−x) + i·D(x) at finite ε; vanishes in the limit ε → 0.
pub fn commutator_residual(x: SpacetimePoint, eps: f64) -> Result<Complex64> {
    let d = d_commutator(x)?;
    Ok(w_position(x, eps)? - w_position(x.reflected(), eps)? + Complex64::new(0.0, d))
}

/// Geometric ε-ladder for the boundary-value limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsLadder(pub Vec<f64>);

impl Default for EpsLadder {
    fn default() -> Self {
        Self(vec![1e-2, 5e-3, 2.5e-3, 1.25e-3])
    }
}

impl EpsLadder {
    /// Rejects ladders the extrapolator cannot use.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let probe: Vec<(f64, Complex64)> = values.iter().map(|&e| (e, Complex64::new(0.0, 0.0))).collect();
        eps_extrapolate(&probe)?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Extrapolates a pointwise quantity sampled on the ladder. Pointwise
/// W is analytic in ε, so plain powers are eliminated.
pub fn extrapolate_pointwise<F>(ladder: &EpsLadder, f: F) -> Result<Extrapolated>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let samples = ladder
        .values()
        .iter()
        .map(|&eps| Ok((eps, f(eps)?)))
        .collect::<Result<Vec<_>>>()?;
    eps_extrapolate(&samples)
}

pub fn w_extrapolated(x: SpacetimePoint, ladder: &EpsLadder) -> Result<Extrapolated> {
    extrapolate_pointwise(ladder, |eps| w_position(x, eps))
}

/// The defining indefinite inner product ⟨f, g⟩ on mass-shell profiles.
pub fn indefinite_inner(
    f: &MomentumProfile,
    g: &MomentumProfile,
    quad: &QuadratureConfig,
) -> Result<Estimate> {
    ir_weighted_integral(f, g, quad)
}

/// Position-space value of ⟨f, g⟩ with its ε-ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionInner {
    pub value: Complex64,
    pub uncertainty: f64,
    pub samples: Vec<(f64, Complex64)>,
}

/// Gaussian term of K(z) = ∫ d²x f*(x) g(x − z).
#[derive(Debug, Clone, Copy)]
struct CorrelationTerm {
    coef: Complex64,
    shift: [f64; 2],
    width: [f64; 2],
}

impl CorrelationTerm {
    fn eval(&self, z0: f64, z1: f64) -> Complex64 {
        let a = (z0 - self.shift[0]) / self.width[0];
        let b = (z1 - self.shift[1]) / self.width[1];
        self.coef * (-0.5 * (a * a + b * b)).exp()
    }
}

fn correlation_terms(f: &SpacetimeCombination, g: &SpacetimeCombination) -> Vec<CorrelationTerm> {
    let mut terms = Vec::with_capacity(f.terms.len() * g.terms.len());
    for fi in &f.terms {
        for gj in &g.terms {
            let mut coef = fi.amp.conj() * gj.amp;
            let mut width = [0.0; 2];
            let mut shift = [0.0; 2];
            for mu in 0..2 {
                let (si, sj) = (fi.width[mu], gj.width[mu]);
                let s = (si * si + sj * sj).sqrt();
                coef *= (2.0 * PI).sqrt() * si * sj / s;
                width[mu] = s;
                shift[mu] = fi.center[mu] - gj.center[mu];
            }
            terms.push(CorrelationTerm { coef, shift, width });
        }
    }
    terms
}

// Gaussian tails beyond this many widths are below 1e−17 relative.
const KERNEL_REACH: f64 = 9.0;

fn mean_scale(f: &SpacetimeCombination) -> f64 {
    f.terms
        .iter()
        .map(|g| g.amp.norm() * 2.0 * PI * g.width[0] * g.width[1])
        .sum()
}

fn check_zero_mean(f: &SpacetimeCombination) -> Result<()> {
    let mean = f.mean();
    if mean.norm() > 1e-12 * mean_scale(f).max(1.0) {
        return Err(Error::NonzeroMean { mean });
    }
    Ok(())
}

/// ∫ d²z W_ε(z) K(z) in light-cone coordinates u = z⁰ − z¹, v = z⁰ + z¹,
/// where −z² = −uv and the light cone sits on the axes.
fn smeared_w(terms: &[CorrelationTerm], eps: f64, quad: &QuadratureConfig) -> Result<Complex64> {
    let (mut u_lo, mut u_hi, mut v_lo, mut v_hi) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for t in terms {
        let reach = KERNEL_REACH * (t.width[0] + t.width[1]);
        let u = t.shift[0] - t.shift[1];
        let v = t.shift[0] + t.shift[1];
        u_lo = u_lo.min(u - reach);
        u_hi = u_hi.max(u + reach);
        v_lo = v_lo.min(v - reach);
        v_hi = v_hi.max(v + reach);
    }
    let u_points = [u_lo, 0.0, u_hi];
    let v_points = [v_lo, 0.0, v_hi];

    let inner_abs = 1e-2 * quad.abs_tol;
    let failure = std::sync::Mutex::new(None);
    let kernel = |u: f64, v: f64| -> Complex64 {
        let z0 = 0.5 * (u + v);
        let z1 = 0.5 * (v - u);
        let k: Complex64 = terms.iter().map(|t| t.eval(z0, z1)).sum();
        if k == Complex64::new(0.0, 0.0) {
            return k;
        }
        let w = -Complex64::new(-u * v, eps * z0).ln() / (4.0 * PI);
        // du dv / 2
        0.5 * w * k
    };
    let outer = integrate(
        |u| match integrate(|v| kernel(u, v), &v_points, inner_abs, quad.rel_tol, quad.max_subdivisions) {
            Ok(est) => est.value,
            Err(e) => {
                let mut slot = failure.lock().expect("poisoned");
                if slot.is_none() {
                    *slot = Some(e);
                }
                Complex64::new(0.0, 0.0)
            }
        },
        &u_points,
        quad.abs_tol,
        quad.rel_tol,
        quad.max_subdivisions,
    )?;
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(outer.value)
}

/// ∫∫ f*(x) W(x − y) g(y) d²x d²y for zero-mean Gaussian combinations, taken
/// to ε → 0 along the ladder.
pub fn position_inner_zero_mean(
    f: &SpacetimeCombination,
    g: &SpacetimeCombination,
    ladder: &EpsLadder,
    quad: &QuadratureConfig,
) -> Result<PositionInner> {
    quad.validate()?;
    check_zero_mean(f)?;
    check_zero_mean(g)?;
    if f.terms.is_empty() || g.terms.is_empty() {
        return Ok(PositionInner {
            value: Complex64::new(0.0, 0.0),
            uncertainty: 0.0,
            samples: ladder.values().iter().map(|&e| (e, Complex64::new(0.0, 0.0))).collect(),
        });
    }
    let terms = correlation_terms(f, g);
    let samples = ladder
        .values()
        .par_iter()
        .map(|&eps| Ok((eps, smeared_w(&terms, eps, quad)?)))
        .collect::<Result<Vec<_>>>()?;
    let limit = eps_extrapolate(&samples)?;
    Ok(PositionInner {
        value: limit.value,
        uncertainty: limit.uncertainty,
        samples,
    })
}
