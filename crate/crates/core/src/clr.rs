//! The Birman–Schwinger principle as an integer identity for Galerkin pencils, and scans of
//! the negative-eigenvalue count N₋(g) of A − gB against the CLR scaling g^θ.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Matrix};
use crate::measure::AtomicMeasure;
use crate::operators::{galerkin_pair, negative_count, PeriodicBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BsCheck {
    pub n_minus: usize,
    pub n_plus: usize,
    pub equal: bool,
}

/// Eigenvalues of A^{−1/2}BA^{−1/2}, computed as L⁻¹BL⁻ᵀ with A = LLᵀ (ascending).
pub fn pencil_eigenvalues(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    if !a.is_symmetric() || !b.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let l = linalg::cholesky(a)?;
    let x = linalg::solve_lower(&l, b)?;
    let s = linalg::solve_lower(&l, &x.transpose())?;
    let n = s.rows();
    let sym = Matrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    linalg::symmetric_eigenvalues(&sym)
}

/// Compare N₋(A − gB) by inertia with #{eigenvalues of A^{−1/2}BA^{−1/2} > 1/g}.
pub fn birman_schwinger_check(a: &Matrix, b: &Matrix, g: f64) -> Result<BsCheck> {
    if !(g > 0.0) {
        return Err(invalid(format!("coupling must be positive, got {g}")));
    }
    let ev = pencil_eigenvalues(a, b)?;
    let threshold = 1.0 / g;
    if ev.iter().any(|e| (e - threshold).abs() <= 1e-12 * threshold) {
        return Err(Error::BoundaryCoupling { g });
    }
    let n_plus = ev.iter().filter(|e| **e > threshold).count();
    let n_minus = negative_count(a, b, g)?;
    Ok(BsCheck { n_minus, n_plus, equal: n_minus == n_plus })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClrRow {
    pub g: f64,
    #[serde(rename = "N_minus")]
    pub n_minus: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClrScan {
    pub rows: Vec<ClrRow>,
    pub max_ratio: f64,
    /// Galerkin dimension (number of retained trigonometric modes).
    pub modes: usize,
}

impl ClrScan {
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].g > w[1].g || w[1].n_minus >= w[0].n_minus)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("g,N_minus,ratio\n");
        for r in &self.rows {
            let _ = writeln!(out, "{:?},{},{:?}", r.g, r.n_minus, r.ratio);
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({ "max_ratio": self.max_ratio, "modes": self.modes, "monotone": self.monotone() })
    }
}

/// N₋(g) for each coupling and the empirical CLR ratio N₋/(g^θ·K).
#[allow(clippy::too_many_arguments)]
pub fn clr_scan(
    l: f64,
    bx: &PeriodicBox,
    cutoff: usize,
    m: &AtomicMeasure,
    v: &[f64],
    g_list: &[f64],
    theta: f64,
    k: f64,
) -> Result<ClrScan> {
    if v.iter().any(|x| !(*x >= 0.0)) {
        return Err(invalid("CLR scans need a nonnegative potential"));
    }
    if !(theta > 0.0 && k > 0.0) {
        return Err(invalid("theta and K must be positive"));
    }
    if let Some(g) = g_list.iter().find(|g| !(**g > 0.0)) {
        return Err(invalid(format!("couplings must be positive, got {g}")));
    }
    let pair = galerkin_pair(l, bx, cutoff, m, v)?;
    let a = pair.a_matrix();
    let mut rows = Vec::with_capacity(g_list.len());
    for &g in g_list {
        let n_minus = negative_count(&a, &pair.b, g)?;
        rows.push(ClrRow { g, n_minus, ratio: n_minus as f64 / (g.powf(theta) * k) });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(ClrScan { rows, max_ratio, modes: pair.a.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{discretize, MeasureSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_examples() {
        let one = Matrix::from_diagonal(&[1.0]);
        let c = birman_schwinger_check(&one, &one, 2.0).unwrap();
        assert_eq!(c, BsCheck { n_minus: 1, n_plus: 1, equal: true });
        let b = Matrix::from_diagonal(&[0.3]);
        assert_eq!(birman_schwinger_check(&one, &b, 1.0).unwrap(), BsCheck { n_minus: 0, n_plus: 0, equal: true });
        assert!(matches!(birman_schwinger_check(&one, &one, 1.0), Err(Error::BoundaryCoupling { .. })));
    }

    #[test]
    fn random_instances_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let a = Matrix::from_diagonal(&(0..8).map(|_| rng.gen_range(0.2..4.0)).collect::<Vec<_>>());
            let r = Matrix::from_fn(8, 3, |_, _| rng.gen_range(-1.0..1.0));
            let b = r.matmul(&r.transpose()).unwrap();
            let g = rng.gen_range(0.5..20.0);
            let c = birman_schwinger_check(&a, &b, g).unwrap();
            assert!(c.equal, "{c:?}");
        }
    }

    #[test]
    fn scan_on_a_small_dust() {
        let m = discretize(&MeasureSpec::cantor_dust(), 2).unwrap();
        let bx = PeriodicBox::centered_on(&m, 4.0 * m.diam());
        let g: Vec<f64> = (0..8).map(|k| 2f64.powi(k)).collect();
        let scan = clr_scan(0.75, &bx, 4, &m, &vec![1.0; m.len()], &g, 2.0, 1.0).unwrap();
        assert!(scan.monotone());
        let tiny = clr_scan(0.75, &bx, 4, &m, &vec![1.0; m.len()], &[1e-9], 2.0, 1.0).unwrap();
        assert_eq!(tiny.rows[0].n_minus, 0);
        let csv = scan.to_csv();
        assert!(csv.starts_with("g,N_minus,ratio\n1.0,"));
        assert_eq!(csv.lines().count(), 9);
    }
}
