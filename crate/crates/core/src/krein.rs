//! Krein-space structure on K = L²(dp/|p|) ⊕ V₀ ⊕ V.
//!
//! A vector is h + α·v₀ + β·χ* (+ γ·χ), where h is a momentum profile with
//! h(0) = 0, v₀ is the boundary element with ⟨v₀, f⟩ = f(0), and χ* is a null
//! real-symmetric profile normalised to χ*(0) = 1. The γ slot holds exact
//! multiples of χ = (v₀ − χ*)/√2 so that canonical decompositions reassemble
//! without rounding; every form flattens it into (α, β) first.
//!
//! All forms are conjugate-linear in the first argument.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gram::{Form, GramReport};
use crate::profiles::{ChiStar, MomentumProfile, CHI_STAR_NULL_TOL};
use crate::quad::{ir_weighted_integral, Estimate, QuadratureConfig};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Required |⟨χ, χ⟩ + 1| at context construction.
pub const CHI_NORM_TOL: f64 = 1e-8;
/// Relative tolerance of the equivalence check between the two metrics.
pub const EQUIVALENCE_TOL: f64 = 1e-9;

/// Exact indefinite form on span{v₀, χ*}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralGram {
    /// Rows and columns ordered (v₀, χ*).
    pub table: [[f64; 2]; 2],
}

impl StructuralGram {
    /// ⟨v₀, v₀⟩ = ⟨χ*, χ*⟩ = 0, ⟨v₀, χ*⟩ = ⟨χ*, v₀⟩ = χ*(0) = 1.
    pub const STANDARD: StructuralGram = StructuralGram {
        table: [[0.0, 1.0], [1.0, 0.0]],
    };

    /// Σ_ij conj(x_i) G_ij y_j
    pub fn pair(&self, x: [Complex64; 2], y: [Complex64; 2]) -> Complex64 {
        let mut acc = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                acc += x[i].conj() * self.table[i][j] * y[j];
            }
        }
        acc
    }

    pub fn is_hermitian(&self) -> bool {
        self.table[0][1] == self.table[1][0]
    }
}

/// On-disk form of a context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextRecord {
    pub schema: String,
    pub chi_star: ChiStar,
    pub quad: QuadratureConfig,
}

/// A validated χ* with its quadrature configuration. Every metric operation is
/// relative to one context.
#[derive(Debug, Clone)]
pub struct KreinContext {
    chi_star: ChiStar,
    quad: QuadratureConfig,
    id: u64,
    structural: StructuralGram,
}

fn fingerprint(chi_star: &ChiStar) -> u64 {
    let spec = serde_json::to_string(&chi_star.profile).expect("profiles serialize");
    let mut hasher = Sha256::new();
    hasher.update(spec.as_bytes());
    hasher.update(chi_star.param.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

impl KreinContext {
    /// Revalidates χ*(0) = 1, real symmetry, and |⟨χ*, χ*⟩| ≤ 1e−8 (both the
    /// stored residual and a fresh quadrature), then ⟨χ, χ⟩ = −1.
    pub fn new(chi_star: ChiStar, quad: QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        let profile = &chi_star.profile;
        if profile.at_zero() != ONE {
            return Err(Error::ContextValidation(format!(
                "chi*(0) must be exactly 1, got {}",
                profile.at_zero()
            )));
        }
        if !profile.is_real_symmetric() {
            return Err(Error::ContextValidation("chi* must be real and even".into()));
        }
        if !(chi_star.residual.abs() <= CHI_STAR_NULL_TOL) {
            return Err(Error::ContextValidation(format!(
                "stored chi* residual {:e} exceeds {CHI_STAR_NULL_TOL:e}",
                chi_star.residual
            )));
        }
        let fresh = ir_weighted_integral(profile, profile, &quad)?.value.norm();
        if fresh > CHI_STAR_NULL_TOL {
            return Err(Error::ContextValidation(format!(
                "<chi*, chi*> = {fresh:e} exceeds {CHI_STAR_NULL_TOL:e}"
            )));
        }

        let ctx = Self {
            id: fingerprint(&chi_star),
            chi_star,
            quad,
            structural: StructuralGram::STANDARD,
        };
        let chi = ctx.chi();
        let norm = ctx.inner(&chi, &chi)?.value;
        if (norm + 1.0).norm() > CHI_NORM_TOL {
            return Err(Error::ContextValidation(format!("<chi, chi> = {norm}, expected -1")));
        }
        Ok(ctx)
    }

    pub fn from_record(record: ContextRecord) -> Result<Self> {
        if record.schema != "1" {
            return Err(Error::ContextValidation(format!(
                "unsupported context schema {:?}",
                record.schema
            )));
        }
        Self::new(record.chi_star, record.quad)
    }

    pub fn record(&self) -> ContextRecord {
        ContextRecord {
            schema: "1".into(),
            chi_star: self.chi_star.clone(),
            quad: self.quad,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn chi_star_profile(&self) -> &MomentumProfile {
        &self.chi_star.profile
    }

    pub fn chi_star_param(&self) -> f64 {
        self.chi_star.param
    }

    pub fn quad(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn structural(&self) -> &StructuralGram {
        &self.structural
    }

    fn vector(&self, h: Option<MomentumProfile>, v0: Complex64, chi_star: Complex64, chi: Complex64) -> KreinVector {
        KreinVector { context: self.id, h, v0, chi_star, chi }
    }

    pub fn zero(&self) -> KreinVector {
        self.vector(None, ZERO, ZERO, ZERO)
    }

    pub fn v0(&self) -> KreinVector {
        self.vector(None, ONE, ZERO, ZERO)
    }

    pub fn chi_star(&self) -> KreinVector {
        self.vector(None, ZERO, ONE, ZERO)
    }

    /// χ = (v₀ − χ*)/√2, held symbolically.
    pub fn chi(&self) -> KreinVector {
        self.vector(None, ZERO, ZERO, ONE)
    }

    /// h·(profile) + α v₀ + β χ* with an explicit h-part, which must vanish at 0.
    pub fn from_parts(&self, h: Option<MomentumProfile>, v0: Complex64, chi_star: Complex64) -> Result<KreinVector> {
        if let Some(h) = &h {
            if h.at_zero() != ZERO {
                return Err(Error::InvalidArgument(format!(
                    "h-part must vanish at p = 0, got {}",
                    h.at_zero()
                )));
            }
        }
        Ok(self.vector(h, v0, chi_star, ZERO))
    }

    /// f ↦ (f − f(0)·χ*, α = 0, β = f(0)).
    pub fn embed(&self, f: &MomentumProfile) -> KreinVector {
        let f0 = f.at_zero();
        if f0 == ZERO {
            return self.vector(Some(f.clone()), ZERO, ZERO, ZERO);
        }
        if *f == self.chi_star.profile {
            return self.chi_star();
        }
        let h = MomentumProfile::linear_combination(&[(ONE, f), (-f0, &self.chi_star.profile)]);
        debug_assert_eq!(h.at_zero(), ZERO);
        self.vector(Some(h), ZERO, f0, ZERO)
    }

    fn check(&self, v: &KreinVector) -> Result<()> {
        if v.context != self.id {
            return Err(Error::ContextMismatch { left: self.id, right: v.context });
        }
        Ok(())
    }

    fn profile_inner(&self, a: Option<&MomentumProfile>, b: Option<&MomentumProfile>) -> Result<Estimate> {
        match (a, b) {
            (Some(a), Some(b)) => ir_weighted_integral(a, b, &self.quad),
            _ => Ok(Estimate::ZERO),
        }
    }

    /// Value-at-zero functional Z(f) = ⟨v₀, f⟩.
    pub fn value_at_zero(&self, f: &KreinVector) -> Result<Complex64> {
        self.check(f)?;
        Ok(f.flattened().1)
    }

    /// The indefinite form ⟨f, g⟩ resolved through the structural table:
    /// h–h and h–χ* by quadrature, h–v₀ = 0.
    pub fn inner(&self, f: &KreinVector, g: &KreinVector) -> Result<Estimate> {
        self.check(f)?;
        self.check(g)?;
        let (af, bf) = f.flattened();
        let (ag, bg) = g.flattened();
        let chi_star = Some(&self.chi_star.profile);

        let hh = self.profile_inner(f.h.as_ref(), g.h.as_ref())?;
        let structural = self.structural.pair([af, bf], [ag, bg]);
        // ⟨β_f χ*, h_g⟩ and ⟨h_f, β_g χ*⟩
        let mut mixed = Estimate::ZERO;
        if bf != ZERO && g.h.is_some() {
            mixed = mixed + self.profile_inner(chi_star, g.h.as_ref())?.scale(bf.conj());
        }
        if bg != ZERO && f.h.is_some() {
            mixed = mixed + self.profile_inner(f.h.as_ref(), chi_star)?.scale(bg);
        }
        Ok(hh + Estimate::exact(structural) + mixed)
    }

    /// (f, g)_K = ⟨h_f, h_g⟩ + ⟨f, χ*⟩⟨χ*, g⟩ + conj(Z(f)) Z(g).
    pub fn metric_a(&self, f: &KreinVector, g: &KreinVector) -> Result<Estimate> {
        self.check(f)?;
        self.check(g)?;
        let chi_star = self.chi_star();
        let hh = self.profile_inner(f.h.as_ref(), g.h.as_ref())?;
        let f_chi = self.inner(&chi_star, f)?.conj();
        let chi_g = self.inner(&chi_star, g)?;
        let zf = self.value_at_zero(f)?;
        let zg = self.value_at_zero(g)?;
        Ok(hh + f_chi * chi_g + Estimate::exact(zf.conj() * zg))
    }

    /// f₊ = f + ⟨χ, f⟩χ, f₋ = −⟨χ, f⟩χ.
    pub fn canonical_decompose(&self, f: &KreinVector) -> Result<CanonicalParts> {
        let t = self.inner(&self.chi(), f)?;
        let mut plus = f.clone();
        plus.chi += t.value;
        let minus = self.vector(None, ZERO, ZERO, -t.value);
        Ok(CanonicalParts { plus, minus, coefficient: t })
    }

    /// ⟨f₊, g₊⟩ + ⟨f, χ⟩⟨χ, g⟩ via the canonical decomposition.
    pub fn metric_b(&self, f: &KreinVector, g: &KreinVector) -> Result<Estimate> {
        let fp = self.canonical_decompose(f)?.plus;
        let gp = self.canonical_decompose(g)?.plus;
        let chi = self.chi();
        Ok(self.inner(&fp, &gp)? + self.inner(f, &chi)? * self.inner(&chi, g)?)
    }

    /// ⟨f, g⟩ + 2⟨f, χ⟩⟨χ, g⟩ directly.
    pub fn metric_b_alt(&self, f: &KreinVector, g: &KreinVector) -> Result<Estimate> {
        let chi = self.chi();
        let correction = self.inner(f, &chi)? * self.inner(&chi, g)?;
        Ok(self.inner(f, g)? + correction.scale(Complex64::new(2.0, 0.0)))
    }

    pub fn form(&self, form: Form, f: &KreinVector, g: &KreinVector) -> Result<Estimate> {
        match form {
            Form::Indefinite => self.inner(f, g),
            Form::MetricA => self.metric_a(f, g),
            Form::MetricB => self.metric_b(f, g),
        }
    }

    /// Pairwise form values, spectrum and signature.
    pub fn gram(&self, vectors: &[KreinVector], labels: Vec<String>, form: Form) -> Result<GramReport> {
        if vectors.is_empty() {
            return Err(Error::InvalidArgument("Gram matrix needs at least one vector".into()));
        }
        for v in vectors {
            self.check(v)?;
        }
        let n = vectors.len();
        let entries = (0..n * n)
            .into_par_iter()
            .map(|k| Ok(self.form(form, &vectors[k / n], &vectors[k % n])?.value))
            .collect::<Result<Vec<_>>>()?;
        let matrix = entries.chunks(n).map(<[Complex64]>::to_vec).collect();
        GramReport::from_matrix(form, labels, matrix)
    }

    /// Checks metric_B_alt ≡ metric_A and the intermediate identity
    /// ⟨f, g⟩ + [conj(Z f) − ⟨f, χ*⟩][Z g − ⟨χ*, g⟩] on every pair.
    pub fn verify_equivalence(&self, pairs: &[(KreinVector, KreinVector)]) -> Result<EquivalenceReport> {
        let chi_star = self.chi_star();
        let rows = pairs
            .par_iter()
            .map(|(f, g)| {
                let a = self.metric_a(f, g)?.value;
                let b = self.metric_b_alt(f, g)?.value;
                let zf = self.value_at_zero(f)?;
                let zg = self.value_at_zero(g)?;
                let f_chi = self.inner(f, &chi_star)?.value;
                let chi_g = self.inner(&chi_star, g)?.value;
                let middle = self.inner(f, g)?.value + (zf.conj() - f_chi) * (zg - chi_g);
                let scale = 1.0 + a.norm();
                Ok(((b - a).norm() / scale, (middle - a).norm() / scale))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;

        let first_violation = rows
            .iter()
            .position(|&(d, m)| !(d <= EQUIVALENCE_TOL && m <= EQUIVALENCE_TOL));
        Ok(EquivalenceReport {
            pairs: rows.len(),
            max_discrepancy: rows.iter().map(|r| r.0).fold(0.0, f64::max),
            max_middle_discrepancy: rows.iter().map(|r| r.1).fold(0.0, f64::max),
            tolerance: EQUIVALENCE_TOL,
            passed: first_violation.is_none(),
            first_violation,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub pairs: usize,
    /// max |metric_B_alt − metric_A| / (1 + |metric_A|)
    pub max_discrepancy: f64,
    pub max_middle_discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub first_violation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalParts {
    pub plus: KreinVector,
    pub minus: KreinVector,
    /// ⟨χ, f⟩
    pub coefficient: Estimate,
}

/// h + α v₀ + β χ* + γ χ under a fixed context.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinVector {
    context: u64,
    h: Option<MomentumProfile>,
    v0: Complex64,
    chi_star: Complex64,
    chi: Complex64,
}

impl KreinVector {
    pub fn context_id(&self) -> u64 {
        self.context
    }

    pub fn h(&self) -> Option<&MomentumProfile> {
        self.h.as_ref()
    }

    /// Coefficient α of v₀.
    pub fn v0_coef(&self) -> Complex64 {
        self.v0
    }

    /// Coefficient β of χ*.
    pub fn chi_star_coef(&self) -> Complex64 {
        self.chi_star
    }

    /// Coefficient γ of χ.
    pub fn chi_coef(&self) -> Complex64 {
        self.chi
    }

    /// (α, β) after expanding γχ = γ(v₀ − χ*)/√2.
    pub fn flattened(&self) -> (Complex64, Complex64) {
        if self.chi == ZERO {
            return (self.v0, self.chi_star);
        }
        let shift = self.chi * FRAC_1_SQRT_2;
        (self.v0 + shift, self.chi_star - shift)
    }

    pub fn add(&self, other: &KreinVector) -> Result<KreinVector> {
        if self.context != other.context {
            return Err(Error::ContextMismatch { left: self.context, right: other.context });
        }
        let h = match (&self.h, &other.h) {
            (Some(a), Some(b)) => Some(MomentumProfile::linear_combination(&[(ONE, a), (ONE, b)])),
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        };
        Ok(KreinVector {
            context: self.context,
            h,
            v0: self.v0 + other.v0,
            chi_star: self.chi_star + other.chi_star,
            chi: self.chi + other.chi,
        })
    }

    pub fn scale(&self, c: Complex64) -> KreinVector {
        KreinVector {
            context: self.context,
            h: self.h.as_ref().map(|h| h.scaled(c)),
            v0: c * self.v0,
            chi_star: c * self.chi_star,
            chi: c * self.chi,
        }
    }
}

/// η: swaps the v₀ and χ* coefficients (so ηχ = −χ) and acts as the identity
/// on the h-part.
pub fn eta(f: &KreinVector) -> KreinVector {
    KreinVector {
        context: f.context,
        h: f.h.clone(),
        v0: f.chi_star,
        chi_star: f.v0,
        chi: -f.chi,
    }
}
