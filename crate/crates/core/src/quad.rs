//! Weighted adaptive quadrature, bracketing root finding and Richardson
//! extrapolation.
//!
//! The central routine is [`ir_weighted_integral`], which evaluates
//!
//! ```text
//!   (1/4π) ∫ dp/|p| [ u*(p) v(p) − u*(0) v(0) θ(1 − |p|) ]
//! ```
//!
//! on the fixed panels (−P, −1), (−1, 0), (0, 1), (1, P). The cutoff P comes
//! from the decay certificates carried by the profiles, so the discarded tail
//! is bounded rather than guessed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{DecayBound, MomentumProfile};

/// Below this |p| the subtracted integrand switches to its first-order
/// Taylor expansion.
pub const TAYLOR_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections across all panels.
    pub max_subdivisions: usize,
    /// Fraction of `abs_tol` the certified tail bound may consume.
    pub tail_fraction: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
            tail_fraction: 1e-2,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be strictly positive (abs = {:e}, rel = {:e})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions < 16 {
            return Err(Error::InvalidConfig(format!(
                "subdivision cap must be at least 16, got {}",
                self.max_subdivisions
            )));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tail fraction must lie in (0, 1], got {}",
                self.tail_fraction
            )));
        }
        Ok(())
    }
}

/// A complex value with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
    };

    pub fn exact(value: Complex64) -> Self {
        Self { value, error: 0.0 }
    }

    pub fn conj(self) -> Self {
        Self {
            value: self.value.conj(),
            error: self.error,
        }
    }

    pub fn scale(self, c: Complex64) -> Self {
        Self {
            value: c * self.value,
            error: c.norm() * self.error,
        }
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl Sub for Estimate {
    type Output = Estimate;
    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value - rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl Neg for Estimate {
    type Output = Estimate;
    fn neg(self) -> Estimate {
        Estimate {
            value: -self.value,
            error: self.error,
        }
    }
}

impl Mul for Estimate {
    type Output = Estimate;
    fn mul(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value * rhs.value,
            error: self.value.norm() * rhs.error
                + rhs.value.norm() * self.error
                + self.error * rhs.error,
        }
    }
}

// 21-point Gauss-Kronrod rule (10-point Gauss embedded).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F>(f: &F, a: f64, b: f64) -> Segment
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let f_center = f(center);
    let mut kronrod = f_center * WGK[10];
    let mut res_abs = f_center.norm() * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut f1 = [Complex64::new(0.0, 0.0); 10];
    let mut f2 = [Complex64::new(0.0, 0.0); 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let v1 = f(center - dx);
        let v2 = f(center + dx);
        f1[jtw] = v1;
        f2[jtw] = v2;
        gauss += (v1 + v2) * WG[j];
        kronrod += (v1 + v2) * WGK[jtw];
        res_abs += (v1.norm() + v2.norm()) * WGK[jtw];
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let v1 = f(center - dx);
        let v2 = f(center + dx);
        f1[jtwm1] = v1;
        f2[jtwm1] = v2;
        kronrod += (v1 + v2) * WGK[jtwm1];
        res_abs += (v1.norm() + v2.norm()) * WGK[jtwm1];
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((f1[j] - mean).norm() + (f2[j] - mean).norm());
    }

    let value = kronrod * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut error = ((kronrod - gauss) * half).norm();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }

    Segment { a, b, value, error }
}

/// Globally adaptive Gauss-Kronrod integration of a complex integrand over
/// consecutive panels delimited by `points` (which must be increasing).
///
/// Stops once the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
/// Exhausting the subdivision cap yields [`Error::ToleranceNotMet`] carrying
/// the best estimate.
pub fn integrate<F>(
    f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gauss_kronrod(&f, w[0], w[1]));
        }
    }
    if heap.is_empty() {
        return Ok(Estimate::ZERO);
    }

    let totals = |heap: &BinaryHeap<Segment>| {
        heap.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), s| {
            (v + s.value, e + s.error)
        })
    };

    let mut splits = 0;
    loop {
        let (value, error) = totals(&heap);
        let target = abs_tol.max(rel_tol * value.norm());
        if error <= target {
            return Ok(Estimate { value, error });
        }

        let worst = *heap.peek().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        let unsplittable = !(worst.a < mid && mid < worst.b)
            || (worst.b - worst.a).abs() <= 100.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE);
        if splits >= max_subdivisions || unsplittable {
            return Err(Error::ToleranceNotMet {
                estimate: value,
                achieved: error,
                requested: target,
            });
        }

        heap.pop();
        heap.push(gauss_kronrod(&f, worst.a, mid));
        heap.push(gauss_kronrod(&f, mid, worst.b));
        splits += 1;
    }
}

/// Smallest P ≥ `floor` such that the certified tail
/// ∫_{|p|>P} |u v| dp/|p| is at most `budget`. Returns the cutoff and the
/// tail bound actually achieved.
pub fn tail_cutoff(u: &DecayBound, v: &DecayBound, floor: f64, budget: f64) -> (f64, f64) {
    let (eu, ev) = match (u.envelope, v.envelope) {
        (None, None) => return (u.radius.min(v.radius).max(floor), 0.0),
        (None, Some(_)) => return (u.radius.max(floor), 0.0),
        (Some(_), None) => return (v.radius.max(floor), 0.0),
        (Some(eu), Some(ev)) => (eu, ev),
    };
    let scale = eu.scale * ev.scale;
    let rate = eu.rate + ev.rate;
    // ∫_P^∞ e^{-B p²} dp/p ≤ e^{-B P²} / (2 B P²), counted twice for ±p.
    let bound = |p: f64| scale * (-rate * p * p).exp() / (rate * p * p);

    let mut p = floor.max(u.radius).max(v.radius).max(f64::MIN_POSITIVE);
    if scale == 0.0 {
        return (p, 0.0);
    }
    for _ in 0..64 {
        if bound(p) <= budget {
            break;
        }
        let needed = ((scale / (rate * p * p * budget)).ln() / rate).max(0.0).sqrt();
        p = needed.max(p * 1.01);
    }
    (p, bound(p))
}

/// The infrared-subtracted integrand (without the 1/4π prefactor).
fn subtracted_integrand(u: &MomentumProfile, v: &MomentumProfile, p: f64) -> Complex64 {
    let ap = p.abs();
    if ap >= 1.0 {
        return u.eval(p).conj() * v.eval(p) / ap;
    }
    let u0 = u.at_zero();
    let v0 = v.at_zero();
    if ap < TAYLOR_BAND {
        let positive = p > 0.0;
        let slope = u0.conj() * v.slope_at_zero(positive) + u.slope_at_zero(positive).conj() * v0;
        return if positive { slope } else { -slope };
    }
    // u*(p)v(p) − u*(0)v(0) = u*(p)·δv(p) + δu*(p)·v(0), free of cancellation.
    let numerator = u.eval(p).conj() * v.delta(p) + u.delta(p).conj() * v0;
    numerator / ap
}

/// (1/4π) ∫_ℝ dp/|p| [u*(p)v(p) − u*(0)v(0)·θ(1−|p|)] with an error estimate
/// that includes the certified tail bound.
pub fn ir_weighted_integral(
    u: &MomentumProfile,
    v: &MomentumProfile,
    quad: &QuadratureConfig,
) -> Result<Estimate> {
    quad.validate()?;
    let norm = 1.0 / (4.0 * PI);
    let budget = quad.tail_fraction * quad.abs_tol / norm;
    let (cutoff, tail) = tail_cutoff(u.decay(), v.decay(), 1.0, budget);

    let mut points = vec![-cutoff, -1.0, 0.0, 1.0, cutoff];
    points.dedup();
    // Tolerances are expressed on the normalised result.
    let remaining = (quad.abs_tol / norm - tail).max(0.5 * quad.abs_tol / norm);
    let integral = integrate(
        |p| subtracted_integrand(u, v, p),
        &points,
        remaining,
        quad.rel_tol,
        quad.max_subdivisions,
    )
    .map_err(|e| match e {
        Error::ToleranceNotMet {
            estimate,
            achieved,
            requested,
        } => Error::ToleranceNotMet {
            estimate: estimate * norm,
            achieved: (achieved + tail) * norm,
            requested: requested * norm,
        },
        other => other,
    })?;

    Ok(Estimate {
        value: integral.value * norm,
        error: (integral.error + tail) * norm,
    })
}

/// A bracketed root together with the final bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

pub const ROOT_MAX_ITERATIONS: usize = 200;

/// Brent's method on a continuous scalar map. Succeeds when |F(root)| ≤ `tol`.
pub fn bracket_root<F>(mut f: F, bracket: (f64, f64), tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    try_bracket_root(|x| Ok(f(x)), bracket, tol)
}

/// As [`bracket_root`], for maps whose evaluation can fail.
pub fn try_bracket_root<F>(mut f: F, bracket: (f64, f64), tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (lo, hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);

    if fa.abs() <= tol {
        return Ok(Root { x: a, residual: fa.abs(), bracket: (a, a), iterations: 0 });
    }
    if fb.abs() <= tol {
        return Ok(Root { x: b, residual: fb.abs(), bracket: (b, b), iterations: 0 });
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange { lo, hi, f_lo: fa, f_hi: fb });
    }

    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);

    for iteration in 1..=ROOT_MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let step_tol = 2.0 * f64::EPSILON * b.abs();
        let m = 0.5 * (c - b);
        if fb.abs() <= tol {
            return Ok(Root {
                x: b,
                residual: fb.abs(),
                bracket: ordered(b, c),
                iterations: iteration,
            });
        }
        if m.abs() <= step_tol {
            return Err(Error::NonConvergence {
                iterations: iteration,
                best: b,
                residual: fb.abs(),
            });
        }

        if e.abs() >= step_tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (step_tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }

        a = b;
        fa = fb;
        b += if d.abs() > step_tol { d } else { step_tol.copysign(m) };
        fb = f(b)?;
    }

    Err(Error::NonConvergence {
        iterations: ROOT_MAX_ITERATIONS,
        best: b,
        residual: fb.abs(),
    })
}

fn ordered(x: f64, y: f64) -> (f64, f64) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Limit estimate of a Richardson table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub value: Complex64,
    /// Magnitude of the last correction applied.
    pub uncertainty: f64,
}

/// Richardson extrapolation to ε → 0 assuming an error expansion in
/// ε, ε², ε³, … on a geometric ladder.
pub fn eps_extrapolate(samples: &[(f64, Complex64)]) -> Result<Extrapolated> {
    let orders: Vec<f64> = (1..samples.len()).map(|k| k as f64).collect();
    eps_extrapolate_with_orders(samples, &orders)
}

/// Richardson extrapolation eliminating the error terms ε^{orders[0]},
/// ε^{orders[1]}, … in turn. Repeating order 1 removes an ε·log ε term: one
/// first-order step maps it onto a pure ε term.
pub fn eps_extrapolate_with_orders(
    samples: &[(f64, Complex64)],
    orders: &[f64],
) -> Result<Extrapolated> {
    if samples.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    if orders.len() + 1 < samples.len() {
        return Err(Error::InvalidLadder(format!(
            "{} samples need {} elimination orders, got {}",
            samples.len(),
            samples.len() - 1,
            orders.len()
        )));
    }
    if samples.iter().any(|(eps, _)| !(*eps > 0.0)) {
        return Err(Error::InvalidLadder("epsilon values must be positive".into()));
    }
    let ratio = samples[1].0 / samples[0].0;
    if !(ratio < 1.0) {
        return Err(Error::InvalidLadder("epsilon must decrease".into()));
    }
    for w in samples.windows(2) {
        let r = w[1].0 / w[0].0;
        if (r - ratio).abs() > 1e-9 * ratio {
            return Err(Error::InvalidLadder(format!(
                "ratio {r} differs from {ratio}"
            )));
        }
    }

    let mut column: Vec<Complex64> = samples.iter().map(|&(_, v)| v).collect();
    let mut correction = 0.0;
    for &order in orders.iter().take(samples.len() - 1) {
        let factor = ratio.powf(order);
        let next: Vec<Complex64> = column
            .windows(2)
            .map(|w| (w[1] - w[0] * factor) / (1.0 - factor))
            .collect();
        correction = (next[next.len() - 1] - column[column.len() - 1]).norm();
        column = next;
    }

    Ok(Extrapolated {
        value: column[0],
        uncertainty: correction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{euler_gamma, gaussian_self_product_oracle, ProfileSpec};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn gaussian(a: f64) -> MomentumProfile {
        MomentumProfile::gaussian(a, c(1.0)).unwrap()
    }

    #[test]
    fn gauss_kronrod_integrates_polynomials_exactly() {
        let est = integrate(|x| c(x.powi(7) - 3.0 * x * x), &[-1.0, 2.0], 1e-12, 1e-12, 50).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((est.value.re - exact).abs() < 1e-12, "{}", est.value);
    }

    #[test]
    fn adaptive_handles_log_endpoint() {
        // ∫₀¹ ln x dx = −1
        let est = integrate(|x| c(x.ln()), &[0.0, 1.0], 1e-12, 1e-12, 500).unwrap();
        assert!((est.value.re + 1.0).abs() < 1e-11);
    }

    #[test]
    fn subdivision_cap_reports_best_estimate() {
        let err = integrate(|x| c(x.ln()), &[0.0, 1.0], 1e-15, 1e-15, 16).unwrap_err();
        match err {
            Error::ToleranceNotMet { estimate, achieved, .. } => {
                assert!((estimate.re + 1.0).abs() < 1e-3);
                assert!(achieved > 1e-15);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn gaussian_self_product_matches_closed_form() {
        let quad = QuadratureConfig::default();
        let est = ir_weighted_integral(&gaussian(1.0), &gaussian(1.0), &quad).unwrap();
        let oracle = -(euler_gamma() + 2f64.ln()) / (4.0 * PI);
        assert!((est.value.re - oracle).abs() < 1e-12, "{} vs {}", est.value, oracle);
        assert!(est.value.im.abs() < 1e-15);
        assert!(est.error <= quad.abs_tol);
    }

    #[test]
    fn null_gaussian_has_vanishing_self_product() {
        let a = (-euler_gamma()).exp() / 2.0;
        let est = ir_weighted_integral(&gaussian(a), &gaussian(a), &QuadratureConfig::default()).unwrap();
        assert!(est.value.norm() < 1e-12, "{}", est.value);
    }

    #[test]
    fn oracle_sweep() {
        let quad = QuadratureConfig::default();
        for a in [0.05, 0.1404, 0.2807, 1.0, 10.0] {
            let got = ir_weighted_integral(&gaussian(a), &gaussian(a), &quad).unwrap().value.re;
            let want = gaussian_self_product_oracle(a);
            assert!(((got - want) / want).abs() < 1e-6, "a = {a}: {got} vs {want}");
        }
    }

    #[test]
    fn shifted_bump_is_strictly_positive() {
        let bump = MomentumProfile::bump(2.0, 1.5, c(1.0)).unwrap();
        assert_eq!(bump.at_zero(), c(0.0));
        let est = ir_weighted_integral(&bump, &bump, &QuadratureConfig::default()).unwrap();
        assert!(est.value.re > 0.0 && est.value.im.abs() < 1e-14);
    }

    #[test]
    fn tail_cutoffs_agree() {
        let u: MomentumProfile = serde_json::from_str::<ProfileSpec>(
            r#"{"family":"sum","terms":[{"family":"gaussian","a":0.07,"amp":[1.0,0.5]},
                {"family":"hermite-gaussian","a":0.3,"n":3,"amp":[0.0,1.0]}]}"#,
        )
        .unwrap()
        .try_into()
        .unwrap();
        let v = gaussian(0.2);
        let loose = QuadratureConfig { tail_fraction: 1.0, ..Default::default() };
        let tight = QuadratureConfig { tail_fraction: 1e-8, ..Default::default() };
        let a = ir_weighted_integral(&u, &v, &loose).unwrap();
        let b = ir_weighted_integral(&u, &v, &tight).unwrap();
        assert!((a.value - b.value).norm() <= a.error + b.error);
    }

    #[test]
    fn unattainable_tolerance_fails_gracefully() {
        let quad = QuadratureConfig { abs_tol: 1e-15, rel_tol: 1e-15, ..Default::default() };
        let err = ir_weighted_integral(&gaussian(1.0), &gaussian(1.0), &quad).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { .. }));
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig { abs_tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(QuadratureConfig { max_subdivisions: 15, ..Default::default() }.validate().is_err());
        assert!(QuadratureConfig::default().validate().is_ok());
    }

    #[test]
    fn brent_examples() {
        let r = bracket_root(|x| x * x - 2.0, (1.0, 2.0), 1e-12).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-11);
        assert!(r.residual <= 1e-12);

        let r = bracket_root(|x| euler_gamma() + (2.0 * x).ln(), (0.1, 1.0), 1e-13).unwrap();
        assert!((r.x - (-euler_gamma()).exp() / 2.0).abs() < 1e-12);
        assert!(r.x >= 0.1 && r.x <= 1.0);

        let err = bracket_root(|x| x + 3.0, (0.0, 1.0), 1e-12).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }

    #[test]
    fn brent_reports_non_convergence_on_discontinuity() {
        // sign flip without a root: the bracket collapses but |f| stays 1
        let err = bracket_root(|x| if x < 0.3 { -1.0 } else { 1.0 }, (0.0, 1.0), 1e-12).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    fn ladder(values: impl Fn(f64) -> f64) -> Vec<(f64, Complex64)> {
        (0..4)
            .map(|k| {
                let eps = 0.1 * 0.5f64.powi(k);
                (eps, c(values(eps)))
            })
            .collect()
    }

    #[test]
    fn richardson_examples() {
        let lin = eps_extrapolate(&ladder(|e| 2.5 + 3.0 * e)).unwrap();
        assert!((lin.value.re - 2.5).abs() < 1e-14);

        let flat = eps_extrapolate(&ladder(|_| 0.75)).unwrap();
        assert_eq!(flat.value.re, 0.75);
        assert_eq!(flat.uncertainty, 0.0);

        let quad = eps_extrapolate(&ladder(|e| 1.0 + e + e * e)).unwrap();
        assert!((quad.value.re - 1.0).abs() < 1e-3);

        let err = eps_extrapolate(&ladder(|e| e)[..2]).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { .. }));
    }

    #[test]
    fn repeated_first_order_removes_eps_log_eps() {
        let samples = ladder(|e| 1.0 + 0.3 * e * e.ln() - 0.2 * e);
        let plain = eps_extrapolate(&samples).unwrap();
        let log_aware = eps_extrapolate_with_orders(&samples, &[1.0, 1.0, 2.0]).unwrap();
        assert!((log_aware.value.re - 1.0).abs() < 1e-12);
        assert!((plain.value.re - 1.0).abs() > (log_aware.value.re - 1.0).abs());
    }

    #[test]
    fn non_geometric_ladder_is_rejected() {
        let samples = vec![(0.1, c(1.0)), (0.05, c(1.0)), (0.02, c(1.0))];
        assert!(matches!(eps_extrapolate(&samples), Err(Error::InvalidLadder(_))));
    }
}
