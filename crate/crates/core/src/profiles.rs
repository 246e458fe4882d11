//! Closed families of test functions and their mass-shell momentum profiles.
//!
//! A [`MomentumProfile`] is the restriction h(p) = f̂(|p|, p) of a test
//! function's Fourier transform to the forward light cone. Profiles are built
//! from a small set of families (Gaussians, Hermite-Gaussians, bumps, mass-shell
//! restrictions of spacetime Gaussians) and their linear combinations, so every
//! profile carries an exact value at p = 0, an accurate evaluation of
//! h(p) − h(0), one-sided slopes at the origin, and a decay certificate.
//!
//! Fourier convention: f̂(p⁰, p¹) = ∫ d²x e^{i(p⁰x⁰ − p¹x¹)} f(x).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{ir_weighted_integral, try_bracket_root, QuadratureConfig};

#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

pub fn euler_gamma() -> f64 {
    EULER_GAMMA
}

/// Closed form of ⟨h_a, h_a⟩ for h_a(p) = e^{−a p²}, from
/// ∫₀^∞ (e^{−s p²} − θ(1 − p)) dp/p = −½(γ + ln s).
pub fn gaussian_self_product_oracle(a: f64) -> f64 {
    -(EULER_GAMMA + (2.0 * a).ln()) / (4.0 * PI)
}

/// Null parameter of the Gaussian family, e^{−γ}/2.
pub fn gaussian_null_parameter() -> f64 {
    (-EULER_GAMMA).exp() / 2.0
}

fn unit() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// JSON description of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProfileSpec {
    /// amp · e^{−a p²}
    Gaussian {
        a: f64,
        #[serde(default = "unit")]
        amp: Complex64,
    },
    /// amp · He_n(√(2a) p) · e^{−a p²} (probabilists' Hermite polynomial)
    HermiteGaussian {
        a: f64,
        n: u32,
        #[serde(default = "unit")]
        amp: Complex64,
    },
    /// amp · exp(1 − 1/(1 − y²)) for |y| < 1, y = (p − center)/width
    Bump {
        #[serde(default, skip_serializing_if = "is_zero")]
        center: f64,
        width: f64,
        #[serde(default = "unit")]
        amp: Complex64,
    },
    /// Mass-shell restriction of amp · exp(−Σ_μ (x^μ − c^μ)² / 2σ_μ²).
    SpacetimeGaussian {
        center: [f64; 2],
        width: [f64; 2],
        #[serde(default = "unit")]
        amp: Complex64,
    },
    /// amp · Σ terms
    Sum {
        terms: Vec<ProfileSpec>,
        #[serde(default = "unit")]
        amp: Complex64,
    },
}

/// |h(p)| ≤ scale · e^{−rate p²} for |p| beyond the owning certificate's radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnvelope {
    pub scale: f64,
    pub rate: f64,
}

/// Decay certificate. Beyond `radius` the profile is bounded by `envelope`,
/// or vanishes identically when there is no envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayBound {
    pub radius: f64,
    pub envelope: Option<GaussianEnvelope>,
}

impl DecayBound {
    pub fn bound(&self, p: f64) -> Option<f64> {
        if p.abs() <= self.radius {
            return None;
        }
        Some(self.envelope.map_or(0.0, |e| e.scale * (-e.rate * p * p).exp()))
    }
}

#[derive(Debug)]
enum Node {
    Gaussian {
        a: f64,
        amp: Complex64,
    },
    Hermite {
        scale: f64,
        a: f64,
        coeffs: Vec<f64>,
        amp: Complex64,
    },
    Bump {
        center: f64,
        width: f64,
        amp: Complex64,
    },
    MassShell {
        // amplitude of f̂ on the shell: amp · 2π σ₀ σ₁
        peak: Complex64,
        c0: f64,
        c1: f64,
        rate: f64,
    },
    Sum {
        amp: Complex64,
        terms: Vec<Arc<Node>>,
    },
}

/// e^z − 1 without cancellation for small |z|.
pub fn complex_expm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * c - 2.0 * half * half,
        z.re.exp() * s,
    )
}

/// Coefficients of the probabilists' Hermite polynomial He_n, lowest degree first.
fn hermite_coefficients(n: u32) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for k in 1..n as usize {
        // He_{k+1} = x He_k − k He_{k−1}
        let mut next = vec![0.0; k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl Node {
    fn eval(&self, p: f64) -> Complex64 {
        match self {
            Node::Gaussian { a, amp } => amp * (-a * p * p).exp(),
            Node::Hermite { scale, a, coeffs, amp } => {
                amp * (horner(coeffs, scale * p) * (-a * p * p).exp())
            }
            Node::Bump { center, width, amp } => {
                let y = (p - center) / width;
                if y.abs() >= 1.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    amp * (1.0 - 1.0 / (1.0 - y * y)).exp()
                }
            }
            Node::MassShell { peak, c0, c1, rate } => {
                let phase = p.abs() * c0 - p * c1;
                peak * Complex64::new(-rate * p * p, phase).exp()
            }
            Node::Sum { amp, terms } => {
                amp * terms.iter().fold(Complex64::new(0.0, 0.0), |acc, t| acc + t.eval(p))
            }
        }
    }

    fn delta(&self, p: f64) -> Complex64 {
        match self {
            Node::Gaussian { a, amp } => amp * (-a * p * p).exp_m1(),
            Node::Hermite { scale, a, coeffs, amp } => {
                let x = scale * p;
                let poly = horner(coeffs, x);
                let poly_shift = x * horner(&coeffs[1..], x);
                amp * (poly * (-a * p * p).exp_m1() + poly_shift)
            }
            Node::Bump { center, width, amp } => {
                let y = (p - center) / width;
                let y0 = -center / width;
                let inside = y.abs() < 1.0;
                let zero_inside = y0.abs() < 1.0;
                match (inside, zero_inside) {
                    (false, false) => Complex64::new(0.0, 0.0),
                    (true, false) => self.eval(p),
                    (false, true) => -self.eval(0.0),
                    (true, true) => {
                        // exp(A) − exp(B) = exp(B)·expm1(A − B) with
                        // A − B = (y0² − y²) / ((1 − y²)(1 − y0²))
                        let base = (1.0 - 1.0 / (1.0 - y0 * y0)).exp();
                        let diff = (y0 - y) * (y0 + y) / ((1.0 - y * y) * (1.0 - y0 * y0));
                        amp * (base * diff.exp_m1())
                    }
                }
            }
            Node::MassShell { peak, c0, c1, rate } => {
                let phase = p.abs() * c0 - p * c1;
                peak * complex_expm1(Complex64::new(-rate * p * p, phase))
            }
            Node::Sum { amp, terms } => {
                amp * terms.iter().fold(Complex64::new(0.0, 0.0), |acc, t| acc + t.delta(p))
            }
        }
    }

    /// One-sided derivative at p = 0 (from the right when `positive`).
    fn slope(&self, positive: bool) -> Complex64 {
        match self {
            Node::Gaussian { .. } => Complex64::new(0.0, 0.0),
            Node::Hermite { scale, coeffs, amp, .. } => {
                amp * (coeffs.get(1).copied().unwrap_or(0.0) * scale)
            }
            Node::Bump { center, width, amp } => {
                let y0 = -center / width;
                if y0.abs() >= 1.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let s = 1.0 - y0 * y0;
                let value = (1.0 - 1.0 / s).exp();
                amp * (value * (-2.0 * y0 / (s * s)) / width)
            }
            Node::MassShell { peak, c0, c1, .. } => {
                let d_phase = if positive { c0 - c1 } else { -c0 - c1 };
                peak * Complex64::new(0.0, d_phase)
            }
            Node::Sum { amp, terms } => {
                amp * terms
                    .iter()
                    .fold(Complex64::new(0.0, 0.0), |acc, t| acc + t.slope(positive))
            }
        }
    }

    fn decay(&self) -> DecayBound {
        match self {
            Node::Gaussian { a, amp } => DecayBound {
                radius: 0.0,
                envelope: Some(GaussianEnvelope { scale: amp.norm(), rate: *a }),
            },
            Node::Hermite { a, coeffs, amp, .. } => {
                // |He_n(x)| e^{−x²/2} ≤ e^{−x²/4} Σ_k |c_k| max_x |x|^k e^{−x²/4}
                let bound: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let peak = if k == 0 {
                            1.0
                        } else {
                            (2.0 * k as f64 / std::f64::consts::E).powf(0.5 * k as f64)
                        };
                        c.abs() * peak
                    })
                    .sum();
                DecayBound {
                    radius: 0.0,
                    envelope: Some(GaussianEnvelope { scale: amp.norm() * bound, rate: 0.5 * a }),
                }
            }
            Node::Bump { center, width, .. } => DecayBound {
                radius: center.abs() + width,
                envelope: None,
            },
            Node::MassShell { peak, rate, .. } => DecayBound {
                radius: 0.0,
                envelope: Some(GaussianEnvelope { scale: peak.norm(), rate: *rate }),
            },
            Node::Sum { amp, terms } => {
                let mut radius: f64 = 0.0;
                let mut scale = 0.0;
                let mut rate = f64::INFINITY;
                let mut any = false;
                for t in terms {
                    let d = t.decay();
                    radius = radius.max(d.radius);
                    if let Some(e) = d.envelope {
                        any = true;
                        scale += e.scale;
                        rate = rate.min(e.rate);
                    }
                }
                DecayBound {
                    radius,
                    envelope: any.then(|| GaussianEnvelope { scale: amp.norm() * scale, rate }),
                }
            }
        }
    }

    fn real_symmetric(&self) -> bool {
        match self {
            Node::Gaussian { amp, .. } => amp.im == 0.0,
            Node::Hermite { coeffs, amp, .. } => amp.im == 0.0 && (coeffs.len() - 1) % 2 == 0,
            Node::Bump { center, amp, .. } => amp.im == 0.0 && *center == 0.0,
            Node::MassShell { peak, c0, c1, .. } => peak.im == 0.0 && *c0 == 0.0 && *c1 == 0.0,
            Node::Sum { amp, terms } => amp.im == 0.0 && terms.iter().all(|t| t.real_symmetric()),
        }
    }

    fn to_spec(&self, origin: &SpecOrigin) -> ProfileSpec {
        match (self, origin) {
            (Node::Gaussian { a, amp }, _) => ProfileSpec::Gaussian { a: *a, amp: *amp },
            (Node::Hermite { a, coeffs, amp, .. }, _) => ProfileSpec::HermiteGaussian {
                a: *a,
                n: (coeffs.len() - 1) as u32,
                amp: *amp,
            },
            (Node::Bump { center, width, amp }, _) => ProfileSpec::Bump {
                center: *center,
                width: *width,
                amp: *amp,
            },
            (Node::MassShell { .. }, SpecOrigin::Spacetime(g)) => ProfileSpec::SpacetimeGaussian {
                center: g.center,
                width: g.width,
                amp: g.amp,
            },
            (Node::Sum { amp, terms }, SpecOrigin::Sum(origins)) => ProfileSpec::Sum {
                terms: terms.iter().zip(origins).map(|(t, o)| t.to_spec(o)).collect(),
                amp: *amp,
            },
            _ => unreachable!("spec origin out of sync with node"),
        }
    }
}

// Data the evaluation tree drops but serialization needs.
#[derive(Debug, Clone)]
enum SpecOrigin {
    Leaf,
    Spacetime(SpacetimeGaussian),
    Sum(Vec<SpecOrigin>),
}

/// A validated momentum profile: immutable, cheap to clone, safe to share
/// across threads.
#[derive(Clone)]
pub struct MomentumProfile {
    node: Arc<Node>,
    origin: Arc<SpecOrigin>,
    at_zero: Complex64,
    decay: DecayBound,
    real_symmetric: bool,
}

impl fmt::Debug for MomentumProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MomentumProfile")
            .field("spec", &self.spec())
            .field("at_zero", &self.at_zero)
            .finish()
    }
}

impl PartialEq for MomentumProfile {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.node, &other.node) || self.spec() == other.spec()
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!("{name} must be positive and finite, got {x}")))
    }
}

fn check_amp(amp: Complex64) -> Result<()> {
    if amp.re.is_finite() && amp.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!("amplitude must be finite, got {amp}")))
    }
}

const MAX_HERMITE_DEGREE: u32 = 40;

fn build(spec: &ProfileSpec) -> Result<(Node, SpecOrigin)> {
    Ok(match spec {
        ProfileSpec::Gaussian { a, amp } => {
            check_positive("a", *a)?;
            check_amp(*amp)?;
            (Node::Gaussian { a: *a, amp: *amp }, SpecOrigin::Leaf)
        }
        ProfileSpec::HermiteGaussian { a, n, amp } => {
            check_positive("a", *a)?;
            check_amp(*amp)?;
            if *n > MAX_HERMITE_DEGREE {
                return Err(Error::InvalidProfile(format!(
                    "hermite degree {n} exceeds {MAX_HERMITE_DEGREE}"
                )));
            }
            (
                Node::Hermite {
                    scale: (2.0 * a).sqrt(),
                    a: *a,
                    coeffs: hermite_coefficients(*n),
                    amp: *amp,
                },
                SpecOrigin::Leaf,
            )
        }
        ProfileSpec::Bump { center, width, amp } => {
            check_positive("width", *width)?;
            check_amp(*amp)?;
            if !center.is_finite() {
                return Err(Error::InvalidProfile("bump center must be finite".into()));
            }
            (Node::Bump { center: *center, width: *width, amp: *amp }, SpecOrigin::Leaf)
        }
        ProfileSpec::SpacetimeGaussian { center, width, amp } => {
            let g = SpacetimeGaussian::new(*center, *width, *amp)?;
            (g.node(), SpecOrigin::Spacetime(g))
        }
        ProfileSpec::Sum { terms, amp } => {
            check_amp(*amp)?;
            let mut nodes = Vec::with_capacity(terms.len());
            let mut origins = Vec::with_capacity(terms.len());
            for t in terms {
                let (n, o) = build(t)?;
                nodes.push(Arc::new(n));
                origins.push(o);
            }
            (Node::Sum { amp: *amp, terms: nodes }, SpecOrigin::Sum(origins))
        }
    })
}

impl MomentumProfile {
    fn from_parts(node: Arc<Node>, origin: Arc<SpecOrigin>) -> Self {
        let at_zero = node.eval(0.0);
        let decay = node.decay();
        let real_symmetric = node.real_symmetric();
        Self { node, origin, at_zero, decay, real_symmetric }
    }

    pub fn from_spec(spec: &ProfileSpec) -> Result<Self> {
        let (node, origin) = build(spec)?;
        Ok(Self::from_parts(Arc::new(node), Arc::new(origin)))
    }

    pub fn gaussian(a: f64, amp: Complex64) -> Result<Self> {
        Self::from_spec(&ProfileSpec::Gaussian { a, amp })
    }

    pub fn hermite_gaussian(a: f64, n: u32, amp: Complex64) -> Result<Self> {
        Self::from_spec(&ProfileSpec::HermiteGaussian { a, n, amp })
    }

    pub fn bump(center: f64, width: f64, amp: Complex64) -> Result<Self> {
        Self::from_spec(&ProfileSpec::Bump { center, width, amp })
    }

    /// The identically vanishing profile (an empty sum).
    pub fn zero() -> Self {
        Self::linear_combination(&[])
    }

    /// Σ c_i · profile_i. Members are shared, not copied.
    pub fn linear_combination(terms: &[(Complex64, &MomentumProfile)]) -> Self {
        let nodes = terms
            .iter()
            .map(|(c, p)| {
                Arc::new(Node::Sum { amp: *c, terms: vec![p.node.clone()] })
            })
            .collect();
        let origins = terms
            .iter()
            .map(|(_, p)| SpecOrigin::Sum(vec![(*p.origin).clone()]))
            .collect();
        Self::from_parts(
            Arc::new(Node::Sum { amp: unit(), terms: nodes }),
            Arc::new(SpecOrigin::Sum(origins)),
        )
    }

    /// c · self. Evaluates as c·h(p), so c·h(0) is exact when h(0) = 1.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_parts(
            Arc::new(Node::Sum { amp: c, terms: vec![self.node.clone()] }),
            Arc::new(SpecOrigin::Sum(vec![(*self.origin).clone()])),
        )
    }

    pub fn eval(&self, p: f64) -> Complex64 {
        if p == 0.0 {
            return self.at_zero;
        }
        self.node.eval(p)
    }

    /// h(p) − h(0), evaluated without cancellation.
    pub fn delta(&self, p: f64) -> Complex64 {
        self.node.delta(p)
    }

    pub fn slope_at_zero(&self, positive: bool) -> Complex64 {
        self.node.slope(positive)
    }

    pub fn at_zero(&self) -> Complex64 {
        self.at_zero
    }

    pub fn decay(&self) -> &DecayBound {
        &self.decay
    }

    /// Structural flag: every member is real-valued and even in p.
    pub fn is_real_symmetric(&self) -> bool {
        self.real_symmetric
    }

    /// Sampled check of h(p) ∈ ℝ and h(p) = h(−p) on `grid`.
    pub fn check_real_symmetric(&self, grid: &[f64]) -> bool {
        grid.iter().all(|&p| {
            let a = self.eval(p);
            let b = self.eval(-p);
            a.im == 0.0 && b.im == 0.0 && a.re == b.re
        })
    }

    pub fn spec(&self) -> ProfileSpec {
        self.node.to_spec(&self.origin)
    }
}

impl TryFrom<ProfileSpec> for MomentumProfile {
    type Error = Error;
    fn try_from(spec: ProfileSpec) -> Result<Self> {
        Self::from_spec(&spec)
    }
}

impl Serialize for MomentumProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MomentumProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = ProfileSpec::deserialize(d)?;
        Self::from_spec(&spec).map_err(serde::de::Error::custom)
    }
}

/// A spacetime Gaussian amp · exp(−Σ_μ (x^μ − c^μ)² / 2σ_μ²) with its
/// Fourier transform in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeGaussian {
    pub center: [f64; 2],
    pub width: [f64; 2],
    #[serde(default = "unit")]
    pub amp: Complex64,
}

impl SpacetimeGaussian {
    pub fn new(center: [f64; 2], width: [f64; 2], amp: Complex64) -> Result<Self> {
        check_positive("width[0]", width[0])?;
        check_positive("width[1]", width[1])?;
        check_amp(amp)?;
        if !(center[0].is_finite() && center[1].is_finite()) {
            return Err(Error::InvalidProfile("center must be finite".into()));
        }
        Ok(Self { center, width, amp })
    }

    pub fn eval(&self, t: f64, x: f64) -> Complex64 {
        let dt = (t - self.center[0]) / self.width[0];
        let dx = (x - self.center[1]) / self.width[1];
        self.amp * (-0.5 * (dt * dt + dx * dx)).exp()
    }

    /// ∫ d²x e^{i(p⁰x⁰ − p¹x¹)} f(x)
    pub fn fourier(&self, p0: f64, p1: f64) -> Complex64 {
        let [s0, s1] = self.width;
        let [c0, c1] = self.center;
        let gauss = -0.5 * (s0 * s0 * p0 * p0 + s1 * s1 * p1 * p1);
        self.amp * (2.0 * PI * s0 * s1) * Complex64::new(gauss, p0 * c0 - p1 * c1).exp()
    }

    fn node(&self) -> Node {
        let [s0, s1] = self.width;
        Node::MassShell {
            peak: self.amp * (2.0 * PI * s0 * s1),
            c0: self.center[0],
            c1: self.center[1],
            rate: 0.5 * (s0 * s0 + s1 * s1),
        }
    }

    pub fn mass_shell(&self) -> MomentumProfile {
        MomentumProfile::from_parts(Arc::new(self.node()), Arc::new(SpecOrigin::Spacetime(*self)))
    }
}

/// Finite linear combination of spacetime Gaussians (amplitudes included).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeCombination {
    pub terms: Vec<SpacetimeGaussian>,
}

impl SpacetimeCombination {
    pub fn new(terms: Vec<SpacetimeGaussian>) -> Self {
        Self { terms }
    }

    pub fn eval(&self, t: f64, x: f64) -> Complex64 {
        self.terms.iter().map(|g| g.eval(t, x)).sum()
    }

    pub fn fourier(&self, p0: f64, p1: f64) -> Complex64 {
        self.terms.iter().map(|g| g.fourier(p0, p1)).sum()
    }

    /// f̂(0, 0) = ∫ f d²x
    pub fn mean(&self) -> Complex64 {
        self.fourier(0.0, 0.0)
    }

    pub fn mass_shell(&self) -> MomentumProfile {
        let shells: Vec<MomentumProfile> = self.terms.iter().map(|g| g.mass_shell()).collect();
        let terms: Vec<(Complex64, &MomentumProfile)> = shells.iter().map(|s| (unit(), s)).collect();
        MomentumProfile::linear_combination(&terms)
    }
}

/// One-parameter real-symmetric families normalised to h(0) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChiStarFamily {
    /// e^{−a p²}, parameter a
    Gaussian,
    /// centred bump of width w, parameter w
    Bump,
}

impl ChiStarFamily {
    pub fn member(self, param: f64) -> Result<MomentumProfile> {
        match self {
            ChiStarFamily::Gaussian => MomentumProfile::gaussian(param, unit()),
            ChiStarFamily::Bump => MomentumProfile::bump(0.0, param, unit()),
        }
    }

    pub fn default_bracket(self) -> (f64, f64) {
        match self {
            ChiStarFamily::Gaussian => (0.05, 2.0),
            ChiStarFamily::Bump => (1.0, 10.0),
        }
    }
}

impl std::str::FromStr for ChiStarFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(ChiStarFamily::Gaussian),
            "bump" => Ok(ChiStarFamily::Bump),
            other => Err(Error::InvalidArgument(format!("unknown chi* family {other:?}"))),
        }
    }
}

/// Root tolerance on ⟨h_a, h_a⟩ used while solving for the null parameter.
pub const CHI_STAR_ROOT_TOL: f64 = 1e-13;
/// Required |⟨χ*, χ*⟩| for an admissible χ*.
pub const CHI_STAR_NULL_TOL: f64 = 1e-8;

/// A null, real-symmetric profile with χ*(0) = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiStar {
    pub family: ChiStarFamily,
    pub param: f64,
    pub profile: MomentumProfile,
    /// |⟨χ*, χ*⟩| at the returned parameter.
    pub residual: f64,
    /// Final root bracket; rerunning on it reproduces `param`.
    pub bracket: (f64, f64),
}

pub fn self_product(profile: &MomentumProfile, quad: &QuadratureConfig) -> Result<Complex64> {
    Ok(ir_weighted_integral(profile, profile, quad)?.value)
}

/// Solve ⟨h_a, h_a⟩ = 0 over the family on `bracket`.
pub fn make_chi_star(
    family: ChiStarFamily,
    bracket: (f64, f64),
    quad: &QuadratureConfig,
) -> Result<ChiStar> {
    quad.validate()?;
    if !(bracket.0 > 0.0 && bracket.1 > 0.0 && bracket.0.is_finite() && bracket.1.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "chi* bracket must be positive, got [{}, {}]",
            bracket.0, bracket.1
        )));
    }
    let root = try_bracket_root(
        |param| Ok(self_product(&family.member(param)?, quad)?.re),
        bracket,
        CHI_STAR_ROOT_TOL,
    )?;
    let profile = family.member(root.x)?;
    let residual = self_product(&profile, quad)?.norm();
    if residual > CHI_STAR_NULL_TOL {
        return Err(Error::NonConvergence {
            iterations: root.iterations,
            best: root.x,
            residual,
        });
    }
    Ok(ChiStar {
        family,
        param: root.x,
        profile,
        residual,
        bracket: root.bracket,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn parse(json: &str) -> MomentumProfile {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn eval_examples() {
        let g = MomentumProfile::gaussian(1.0, unit()).unwrap();
        assert_eq!(g.eval(0.0), unit());
        assert!((g.eval(1.0).re - (-1f64).exp()).abs() < 1e-16);

        let combo = parse(
            r#"{"family":"sum","terms":[{"family":"gaussian","a":1,"amp":[2,0]},
               {"family":"gaussian","a":2,"amp":[-1,0]}]}"#,
        );
        assert_eq!(combo.eval(0.0), unit());
        assert_eq!(combo.eval(0.0), combo.at_zero());
    }

    #[test]
    fn json_round_trip_keeps_spec() {
        let json = r#"{"family":"gaussian","a":0.2807,"amp":[1.0,0.0]}"#;
        let p = parse(json);
        assert_eq!(serde_json::to_string(&p).unwrap(), json);
        let amp_defaults = parse(r#"{"family":"bump","width":2.0}"#);
        assert_eq!(amp_defaults.at_zero(), unit());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        for bad in [
            r#"{"family":"gaussian","a":-1}"#,
            r#"{"family":"bump","width":0}"#,
            r#"{"family":"hermite-gaussian","a":1,"n":99}"#,
            r#"{"family":"nope"}"#,
        ] {
            assert!(serde_json::from_str::<MomentumProfile>(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn hermite_polynomials() {
        assert_eq!(hermite_coefficients(0), vec![1.0]);
        assert_eq!(hermite_coefficients(2), vec![-1.0, 0.0, 1.0]);
        assert_eq!(hermite_coefficients(3), vec![0.0, -3.0, 0.0, 1.0]);
        assert_eq!(hermite_coefficients(4), vec![3.0, 0.0, -6.0, 0.0, 1.0]);
    }

    #[test]
    fn real_symmetry_flags() {
        let grid: Vec<f64> = (0..50).map(|k| 0.13 * k as f64).collect();
        for (json, expected) in [
            (r#"{"family":"gaussian","a":0.3}"#, true),
            (r#"{"family":"gaussian","a":0.3,"amp":[1,1]}"#, false),
            (r#"{"family":"hermite-gaussian","a":0.5,"n":2}"#, true),
            (r#"{"family":"hermite-gaussian","a":0.5,"n":3}"#, false),
            (r#"{"family":"bump","width":2}"#, true),
            (r#"{"family":"bump","center":0.5,"width":2}"#, false),
            (r#"{"family":"spacetime-gaussian","center":[0,0],"width":[1,2]}"#, true),
            (r#"{"family":"spacetime-gaussian","center":[0.5,0],"width":[1,2]}"#, false),
        ] {
            let p = parse(json);
            assert_eq!(p.is_real_symmetric(), expected, "{json}");
            if expected {
                assert!(p.check_real_symmetric(&grid), "{json}");
            } else {
                assert!(!p.check_real_symmetric(&grid), "{json}");
            }
        }
    }

    fn sample_profiles() -> Vec<MomentumProfile> {
        [
            r#"{"family":"gaussian","a":0.7,"amp":[0.3,-1.2]}"#,
            r#"{"family":"hermite-gaussian","a":0.4,"n":3,"amp":[1,0.5]}"#,
            r#"{"family":"hermite-gaussian","a":1.3,"n":4}"#,
            r#"{"family":"bump","center":0.3,"width":1.7,"amp":[0,2]}"#,
            r#"{"family":"bump","center":2.0,"width":1.0}"#,
            r#"{"family":"spacetime-gaussian","center":[0.4,-0.3],"width":[0.8,1.1],"amp":[1,-1]}"#,
        ]
        .iter()
        .map(|s| parse(s))
        .collect()
    }

    #[test]
    fn delta_matches_direct_difference() {
        for p in sample_profiles() {
            for &x in &[-2.5, -0.7, -0.01, 0.003, 0.4, 1.9] {
                let direct = p.eval(x) - p.at_zero();
                assert!((p.delta(x) - direct).norm() < 1e-14, "{:?} at {x}", p.spec());
            }
            // small p: delta is accurate where the direct difference cancels
            let x = 1e-6;
            let slope = p.slope_at_zero(true);
            assert!((p.delta(x) - slope * x).norm() < 1e-10, "{:?}", p.spec());
        }
    }

    #[test]
    fn slopes_match_finite_differences() {
        let h = 1e-7;
        for p in sample_profiles() {
            let right = (p.eval(h) - p.at_zero()) / h;
            let left = (p.at_zero() - p.eval(-h)) / h;
            assert!((p.slope_at_zero(true) - right).norm() < 1e-5, "{:?}", p.spec());
            assert!((p.slope_at_zero(false) - left).norm() < 1e-5, "{:?}", p.spec());
        }
    }

    #[test]
    fn decay_certificates_bound_the_profiles() {
        for p in sample_profiles() {
            let d = *p.decay();
            for k in 0..400 {
                let x = d.radius + 0.05 * k as f64 + 1e-9;
                for x in [x, -x] {
                    if let Some(b) = d.bound(x) {
                        assert!(p.eval(x).norm() <= b * (1.0 + 1e-12), "{:?} at {x}", p.spec());
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn combinations_evaluate_linearly(
            a1 in 0.05f64..5.0, a2 in 0.05f64..5.0,
            c1r in -2.0f64..2.0, c1i in -2.0f64..2.0,
            c2r in -2.0f64..2.0, c2i in -2.0f64..2.0,
            p in -6.0f64..6.0,
        ) {
            let g1 = MomentumProfile::hermite_gaussian(a1, 2, unit()).unwrap();
            let g2 = MomentumProfile::bump(0.2, a2, c(0.5, 1.0)).unwrap();
            let (c1, c2) = (c(c1r, c1i), c(c2r, c2i));
            let combo = MomentumProfile::linear_combination(&[(c1, &g1), (c2, &g2)]);
            let direct = c1 * g1.eval(p) + c2 * g2.eval(p);
            prop_assert!((combo.eval(p) - direct).norm() <= 1e-14 * (1.0 + direct.norm()));
            let back: MomentumProfile = serde_json::from_value(serde_json::to_value(&combo).unwrap()).unwrap();
            prop_assert_eq!(back.eval(p), combo.eval(p));
        }
    }

    /// Direct 2D Fourier transform by the trapezoid rule, which converges
    /// spectrally for Gaussians.
    fn numerical_fourier(g: &SpacetimeGaussian, p0: f64, p1: f64) -> Complex64 {
        let n = 600;
        let half = 12.0;
        let mut sum = Complex64::new(0.0, 0.0);
        let h0 = 2.0 * half * g.width[0] / n as f64;
        let h1 = 2.0 * half * g.width[1] / n as f64;
        for i in 0..=n {
            let t = g.center[0] - half * g.width[0] + i as f64 * h0;
            for j in 0..=n {
                let x = g.center[1] - half * g.width[1] + j as f64 * h1;
                sum += g.eval(t, x) * Complex64::new(0.0, p0 * t - p1 * x).exp();
            }
        }
        sum * h0 * h1
    }

    #[test]
    fn mass_shell_matches_numerical_fourier_transform() {
        let g = SpacetimeGaussian::new([0.3, -0.7], [0.9, 1.3], c(1.0, 0.4)).unwrap();
        let shell = g.mass_shell();
        for k in 0..10 {
            let p = -2.0 + 0.45 * k as f64;
            let direct = numerical_fourier(&g, p.abs(), p);
            let rel = (shell.eval(p) - direct).norm() / direct.norm();
            assert!(rel < 1e-6, "p = {p}: rel {rel}");
        }
    }

    #[test]
    fn chi_star_gaussian() {
        let quad = QuadratureConfig::default();
        let chi = make_chi_star(ChiStarFamily::Gaussian, (0.05, 2.0), &quad).unwrap();
        let expected = gaussian_null_parameter();
        assert!(((chi.param - expected) / expected).abs() < 1e-10, "{}", chi.param);
        assert!(chi.residual <= CHI_STAR_NULL_TOL);
        assert_eq!(chi.profile.at_zero(), unit());

        let again = make_chi_star(ChiStarFamily::Gaussian, chi.bracket, &quad).unwrap();
        assert!((again.param - chi.param).abs() < 1e-10);
    }

    #[test]
    fn chi_star_no_sign_change() {
        let err = make_chi_star(ChiStarFamily::Gaussian, (1.0, 2.0), &QuadratureConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }), "{err}");
    }

    #[test]
    fn chi_star_bump() {
        let quad = QuadratureConfig::default();
        let family = ChiStarFamily::Bump;
        let chi = make_chi_star(family, family.default_bracket(), &quad).unwrap();
        assert!(chi.residual <= CHI_STAR_NULL_TOL);
        assert_eq!(chi.profile.at_zero(), unit());
        assert!(chi.profile.is_real_symmetric());
    }

    #[test]
    fn real_symmetric_self_products_are_real() {
        let quad = QuadratureConfig::default();
        for json in [
            r#"{"family":"gaussian","a":0.3}"#,
            r#"{"family":"hermite-gaussian","a":0.5,"n":2,"amp":[-0.4,0]}"#,
            r#"{"family":"bump","width":3.5}"#,
        ] {
            let p = parse(json);
            let v = self_product(&p, &quad).unwrap();
            assert!(v.im.abs() <= 1e-12 * v.norm().max(f64::MIN_POSITIVE), "{json}: {v}");
        }
    }
}
