//! Gram matrices of pairwise form values and their eigenvalue signature.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues with |λ| ≤ this count as zero in the signature.
pub const ZERO_BAND: f64 = 1e-9;
/// Largest tolerated |M_ij − conj(M_ji)| before symmetrisation.
pub const HERMITIAN_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Form {
    #[serde(rename = "indefinite")]
    Indefinite,
    #[serde(rename = "metric_A")]
    MetricA,
    #[serde(rename = "metric_B")]
    MetricB,
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::Indefinite => "indefinite",
            Form::MetricA => "metric_A",
            Form::MetricB => "metric_B",
        }
    }
}

impl std::str::FromStr for Form {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "indefinite" => Ok(Form::Indefinite),
            "metric_A" | "metric-a" | "A" => Ok(Form::MetricA),
            "metric_B" | "metric-b" | "B" => Ok(Form::MetricB),
            other => Err(Error::InvalidArgument(format!("unknown form {other:?}"))),
        }
    }
}

/// (n₋, n₀, n₊)
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature(pub usize, pub usize, pub usize);

impl Signature {
    pub fn of(eigenvalues: &[f64]) -> Self {
        eigenvalues.iter().fold(Signature(0, 0, 0), |Signature(m, z, p), &e| {
            if e < -ZERO_BAND {
                Signature(m + 1, z, p)
            } else if e > ZERO_BAND {
                Signature(m, z, p + 1)
            } else {
                Signature(m, z + 1, p)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub schema: String,
    pub form: Form,
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<Complex64>>,
    pub eigs: Vec<f64>,
    pub signature: Signature,
}

impl GramReport {
    /// Checks Hermiticity, symmetrises, and computes the ascending spectrum.
    pub fn from_matrix(form: Form, labels: Vec<String>, matrix: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || labels.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "Gram matrix must be square and non-empty with one label per row ({} labels, {} rows)",
                labels.len(),
                n
            )));
        }
        let mut deviation: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                deviation = deviation.max((matrix[i][j] - matrix[j][i].conj()).norm());
            }
        }
        if deviation > HERMITIAN_LIMIT {
            return Err(Error::NonHermitian { deviation, limit: HERMITIAN_LIMIT });
        }
        let symmetric: Vec<Vec<Complex64>> = (0..n)
            .map(|i| (0..n).map(|j| 0.5 * (matrix[i][j] + matrix[j][i].conj())).collect())
            .collect();

        let m = DMatrix::from_fn(n, n, |i, j| symmetric[i][j]);
        let mut eigs: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        eigs.sort_by(f64::total_cmp);
        let signature = Signature::of(&eigs);

        Ok(Self {
            schema: "1".to_string(),
            form,
            labels,
            matrix: symmetric,
            eigs,
            signature,
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigs[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hyperbolic_plane_has_split_signature() {
        let m = vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]];
        let r = GramReport::from_matrix(Form::Indefinite, vec!["a".into(), "b".into()], m).unwrap();
        assert_eq!(r.signature, Signature(1, 0, 1));
        assert!((r.eigs[0] + 1.0).abs() < 1e-15 && (r.eigs[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_hermitian_spectrum() {
        // [[2, i], [−i, 2]] has eigenvalues 1 and 3
        let m = vec![vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]];
        let r = GramReport::from_matrix(Form::MetricA, vec!["x".into(), "y".into()], m).unwrap();
        assert!((r.eigs[0] - 1.0).abs() < 1e-14 && (r.eigs[1] - 3.0).abs() < 1e-14);
        assert_eq!(r.signature, Signature(0, 0, 2));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = vec![vec![c(1.0, 0.0), c(0.5, 0.0)], vec![c(0.4, 0.0), c(1.0, 0.0)]];
        let err = GramReport::from_matrix(Form::MetricB, vec!["x".into(), "y".into()], m).unwrap_err();
        assert!(matches!(err, Error::NonHermitian { .. }));
    }

    #[test]
    fn json_layout() {
        let m = vec![vec![c(-1.0, 0.0)]];
        let r = GramReport::from_matrix(Form::Indefinite, vec!["chi".into()], m).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"schema":"1","form":"indefinite","labels":["chi"],"matrix":[[[-1.0,0.0]]],"eigs":[-1.0],"signature":[1,0,0]}"#
        );
    }

    #[test]
    fn zero_band() {
        assert_eq!(Signature::of(&[-2e-9, -5e-10, 0.0, 5e-10, 3.0]), Signature(1, 3, 1));
    }
}
