//! Theoretical exponents and Weyl coefficients, log-log power-law fits of computed spectra,
//! and the empirical constants of the eigenvalue estimates.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::measure::{AhlforsReport, AtomicMeasure};
use crate::operators::{Sign, SpectralResult};
use crate::quadrature::integrate;
use crate::special::{beta, unit_sphere_area};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Supercritical,
}

/// θ = s/(2l − N + s).
pub fn exponent_theta(n: usize, l: f64, s: f64) -> Result<f64> {
    theta_from_gap(2.0 * l - n as f64, s)
}

/// θ = s/(gap + s) with gap = 2l − N.
pub fn theta_from_gap(gap: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(invalid(format!("dimension s must be positive, got {s}")));
    }
    if gap == 0.0 {
        return Err(Error::Regime("critical case 2l = N is out of scope".into()));
    }
    let denom = gap + s;
    if !(denom > 0.0) {
        return Err(Error::Regime(format!(
            "subcritical estimates need s > N - 2l, got s = {s}, N - 2l = {}",
            -gap
        )));
    }
    Ok(s / denom)
}

/// r(ξ) = (2π)^{−𝔡}∫_{ℝ^𝔡}(|ξ|² + |η|²)^{−l} dη, by radial quadrature and by the Beta closed form.
pub fn symbol_r(codim: usize, l: f64, xi_norm: f64) -> Result<f64> {
    if codim == 0 {
        return Err(invalid("codimension must be at least 1"));
    }
    if !(xi_norm > 0.0) {
        return Err(invalid(format!("|xi| must be positive, got {xi_norm}")));
    }
    let dc = codim as f64;
    if !(2.0 * l > dc) {
        return Err(Error::Regime(format!("symbol integral diverges for 2l = {} <= {codim}", 2.0 * l)));
    }
    let prefactor = (2.0 * PI).powf(-dc) * unit_sphere_area(codim);
    let closed = prefactor * 0.5 * beta(dc / 2.0, l - dc / 2.0)? * xi_norm.powf(dc - 2.0 * l);
    // η = ξ tan φ turns the radial integral into ∫₀^{π/2} sin^{𝔡−1}φ cos^{2l−𝔡−1}φ dφ
    let radial = integrate(
        |phi: f64| phi.sin().powf(dc - 1.0) * phi.cos().powf(2.0 * l - dc - 1.0),
        0.0,
        PI / 2.0,
        1e-13,
    )?;
    let quad = prefactor * xi_norm.powf(dc - 2.0 * l) * radial;
    if ((quad - closed) / closed).abs() > 1e-8 {
        return Err(Error::Inconsistent(format!(
            "symbol quadrature {quad} disagrees with the closed form {closed}"
        )));
    }
    Ok(closed)
}

/// A = (2π)^{−d}(ω_{d−1}/d)·r(1)^θ·∫V^θ dμ with θ = d/(2l − 𝔡).
pub fn weyl_coefficient(d: usize, codim: usize, l: f64, v_theta_integral: f64) -> Result<f64> {
    if d == 0 {
        return Err(invalid("surface dimension must be at least 1"));
    }
    if !(v_theta_integral >= 0.0) {
        return Err(invalid("the V^theta integral must be nonnegative"));
    }
    let theta = d as f64 / (2.0 * l - codim as f64);
    let r = symbol_r(codim, l, 1.0)?;
    let df = d as f64;
    Ok((2.0 * PI).powf(-df) * unit_sphere_area(d) / df * r.powf(theta) * v_theta_integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowRule {
    /// k ∈ [⌈n^0.25⌉, ⌊n^0.6⌋].
    #[default]
    Auto,
    /// Inclusive 1-based indices.
    Explicit(usize, usize),
}

impl WindowRule {
    /// Parse `k_min:k_max` or `auto`.
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(WindowRule::Auto);
        }
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("window `{s}` must look like k_min:k_max")))?;
        let p = |t: &str| t.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad window bound `{t}`")));
        Ok(WindowRule::Explicit(p(a)?, p(b)?))
    }

    pub fn resolve(self, n: usize) -> Result<(usize, usize)> {
        let (lo, hi) = match self {
            WindowRule::Auto => {
                let nf = n as f64;
                (nf.powf(0.25).ceil() as usize, nf.powf(0.6).floor() as usize)
            }
            WindowRule::Explicit(a, b) => (a, b),
        };
        if lo < 1 || hi > n || hi < lo + 15 {
            return Err(invalid(format!(
                "fit window [{lo}, {hi}] needs 1 <= k_min, k_max <= {n} and at least 16 points"
            )));
        }
        Ok((lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitForm {
    /// λ_k ≈ C·k^{−1/θ}.
    EigenDecay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta_hat: f64,
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
    pub window: (usize, usize),
    pub residual: f64,
    pub form: FitForm,
}

impl FitResult {
    /// Coefficient of the counting form n(λ) ≈ C'λ^{−θ} implied by the decay fit, C' = C^θ.
    pub fn counting_coefficient(&self) -> f64 {
        self.c_hat.powf(self.theta_hat)
    }
}

/// Least-squares line through (log k, log λ_k) on the positive branch of `sr`.
pub fn fit_power_law(sr: &SpectralResult, window: WindowRule) -> Result<FitResult> {
    fit_decreasing(&sr.positive_branch(), window)
}

/// Fit on an explicit decreasing sequence λ_1 ≥ λ_2 ≥ ….
pub fn fit_decreasing(values: &[f64], window: WindowRule) -> Result<FitResult> {
    let (lo, hi) = window.resolve(values.len())?;
    let slice = &values[lo - 1..hi];
    if let Some(v) = slice.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(invalid(format!("fit window contains the nonpositive value {v}")));
    }
    let xs: Vec<f64> = (lo..=hi).map(|k| (k as f64).ln()).collect();
    let ys: Vec<f64> = slice.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if !(slope < 0.0) {
        return Err(invalid(format!("spectrum does not decay on the window (slope {slope})")));
    }
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / m).sqrt();
    Ok(FitResult {
        theta_hat: -1.0 / slope,
        c_hat: intercept.exp(),
        window: (lo, hi),
        residual,
        form: FitForm::EigenDecay,
    })
}

/// sup_k n₊(λ_k)·λ_k^θ / K over the positive branch, with n₊(λ_k) = #{j : λ_j ≥ λ_k}.
pub fn bound_ratio(sr: &SpectralResult, theta: f64, bound_k: f64) -> Result<f64> {
    bound_ratio_signed(sr, Sign::Plus, theta, bound_k)
}

pub fn bound_ratio_signed(sr: &SpectralResult, sign: Sign, theta: f64, bound_k: f64) -> Result<f64> {
    if sr.values.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    if !(theta > 0.0 && bound_k > 0.0) {
        return Err(invalid(format!("bound ratio needs theta > 0 and K > 0, got ({theta}, {bound_k})")));
    }
    Ok(bound_profile(&sr.branch(sign), theta).into_iter().fold(0.0, f64::max) / bound_k)
}

/// n(λ_k)·λ_k^θ for every value of a decreasing positive sequence (ties share the larger count).
pub fn bound_profile(branch: &[f64], theta: f64) -> Vec<f64> {
    let mut out = vec![0.0; branch.len()];
    let mut k = 0;
    while k < branch.len() {
        let mut end = k + 1;
        while end < branch.len() && branch[end] == branch[k] {
            end += 1;
        }
        for slot in &mut out[k..end] {
            *slot = end as f64 * branch[k].powf(theta);
        }
        k = end;
    }
    out
}

/// Σ_Q B(Q)^{1−1/θ}·(∫_Q|V|dμ)^θ·μ(Q)^{1−θ} over integer-translate unit cubes, 2l > N.
pub fn birman_borzov_functional(
    m: &AtomicMeasure,
    v: &[f64],
    l: f64,
    s: f64,
    b_of_cube: impl Fn(&[i64]) -> f64,
) -> Result<f64> {
    let n = m.ambient_dim();
    if !(2.0 * l > n as f64) {
        return Err(Error::Regime("the lattice functional is for 2l > N".into()));
    }
    if v.len() != m.len() {
        return Err(Error::Dimension("density table length differs from atom count".into()));
    }
    let theta = exponent_theta(n, l, s)?;
    let mut cells: BTreeMap<Vec<i64>, (f64, f64)> = BTreeMap::new();
    for (i, p) in m.positions().enumerate() {
        let key: Vec<i64> = p.iter().map(|x| x.floor() as i64).collect();
        let e = cells.entry(key).or_insert((0.0, 0.0));
        e.0 += m.weight(i);
        e.1 += m.weight(i) * v[i].abs();
    }
    let mut terms = Vec::with_capacity(cells.len());
    for (key, (mass, vint)) in cells {
        terms.push((b_of_cube(&key), vint, mass));
    }
    birman_borzov_sum(terms, theta)
}

/// The lattice sum from per-cube (B(Q), ∫_Q|V|dμ, μ(Q)) triples.
pub fn birman_borzov_sum(cells: impl IntoIterator<Item = (f64, f64, f64)>, theta: f64) -> Result<f64> {
    let mut total = 0.0;
    for (b, vint, mass) in cells {
        if !(mass > 0.0) {
            continue;
        }
        if !(b > 0.0) {
            return Err(invalid(format!("cube constant B(Q) must be positive, got {b}")));
        }
        total += b.powf(1.0 - 1.0 / theta) * vint.powf(theta) * mass.powf(1.0 - theta);
    }
    Ok(total)
}

/// Inputs of the right-hand side of the eigenvalue estimate for one sign of V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// 𝓐 (subcritical) or 𝓑 (supercritical).
    pub ahlfors_constant: f64,
    /// ∫V±^θ dμ (subcritical) or ∫V± dμ (supercritical).
    pub v_integral: f64,
    pub total_mass: f64,
    /// 𝓐^{θ−1}∫V^θ or 𝓑^{−β}(∫V)^θ μ(Ω)^{1−θ}.
    pub bound_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryPrediction {
    pub theta: f64,
    pub regime: Regime,
    pub a_plus: Option<f64>,
    pub a_minus: Option<f64>,
    pub bound_plus: Option<BoundInputs>,
    pub bound_minus: Option<BoundInputs>,
}

/// Theory for kernel `k` on `m` with density `v`.
///
/// Weyl coefficients are produced only when `surface` is set (the support is a d-dimensional
/// rectifiable set, d = s integral) and the kernel is of Riesz type. Bound inputs need the
/// Ahlfors report.
pub fn predict(
    k: &KernelSpec,
    m: &AtomicMeasure,
    v: &[f64],
    surface: bool,
    ahlfors: Option<&AhlforsReport>,
) -> Result<TheoryPrediction> {
    if v.len() != m.len() {
        return Err(Error::Dimension("density table length differs from atom count".into()));
    }
    let s = m.nominal_dim();
    let gap = k.order_gap();
    let theta = theta_from_gap(gap, s)?;
    let regime = if gap < 0.0 { Regime::Subcritical } else { Regime::Supercritical };
    let part = |sign: f64| -> Vec<f64> { v.iter().map(|x| (sign * x).max(0.0)).collect() };
    let (vp, vm) = (part(1.0), part(-1.0));

    let mut a_plus = None;
    let mut a_minus = None;
    if surface {
        let d = s.round();
        if (s - d).abs() > 1e-12 {
            return Err(invalid(format!("surface asymptotics need an integer dimension, got {s}")));
        }
        if let KernelSpec::Riesz { ambient_dim, l } = *k {
            let codim = ambient_dim - d as usize;
            let int_theta = |t: &[f64]| m.integrate(&t.iter().map(|x| x.powf(theta)).collect::<Vec<_>>());
            a_plus = Some(weyl_coefficient(d as usize, codim, l, int_theta(&vp)?)?);
            a_minus = Some(weyl_coefficient(d as usize, codim, l, int_theta(&vm)?)?);
        }
    }

    let bounds = |t: &[f64]| -> Result<Option<BoundInputs>> {
        let Some(rep) = ahlfors else { return Ok(None) };
        if t.iter().all(|x| *x == 0.0) {
            return Ok(None);
        }
        let total_mass = m.total_mass();
        Ok(Some(match regime {
            Regime::Subcritical => {
                let vint = m.integrate(&t.iter().map(|x| x.powf(theta)).collect::<Vec<_>>())?;
                BoundInputs {
                    ahlfors_constant: rep.a_hat,
                    v_integral: vint,
                    total_mass,
                    bound_k: rep.a_hat.powf(theta - 1.0) * vint,
                }
            }
            Regime::Supercritical => {
                let vint = m.integrate(t)?;
                let beta_exp = 1.0 / theta - 1.0;
                BoundInputs {
                    ahlfors_constant: rep.b_hat,
                    v_integral: vint,
                    total_mass,
                    bound_k: rep.b_hat.powf(-beta_exp) * vint.powf(theta) * total_mass.powf(1.0 - theta),
                }
            }
        }))
    };
    Ok(TheoryPrediction {
        theta,
        regime,
        a_plus,
        a_minus,
        bound_plus: bounds(&vp)?,
        bound_minus: bounds(&vm)?,
    })
}

/// Flat JSON summary of a fit against theory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub theta_theory: f64,
    pub theta_hat: f64,
    pub coefficient_theory: Option<f64>,
    pub coefficient_hat: f64,
    pub ratio: Option<f64>,
    pub window: (usize, usize),
    pub residual: f64,
}

impl FitSummary {
    pub fn new(theory: &TheoryPrediction, fit: &FitResult, ratio: Option<f64>) -> Self {
        FitSummary {
            theta_theory: theory.theta,
            theta_hat: fit.theta_hat,
            coefficient_theory: theory.a_plus,
            coefficient_hat: fit.counting_coefficient(),
            ratio,
            window: fit.window,
            residual: fit.residual,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{discretize, MeasureSpec};
    use crate::operators::SpectralResult;
    use proptest::prelude::*;

    #[test]
    fn theta_examples() {
        assert_eq!(exponent_theta(3, 1.0, 2.0).unwrap(), 2.0);
        let s = 2f64.ln() / 3f64.ln();
        assert!((exponent_theta(1, 1.0, s).unwrap() - 0.38685).abs() < 1e-5);
        assert!(matches!(exponent_theta(3, 1.0, 1.0), Err(Error::Regime(_))));
        assert!(matches!(exponent_theta(2, 1.0, 1.0), Err(Error::Regime(_))));
    }

    #[test]
    fn symbol_examples() {
        assert!((symbol_r(1, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((symbol_r(2, 2.0, 1.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-14);
        assert!((symbol_r(1, 1.0, 2.0).unwrap() - 0.25).abs() < 1e-14);
        assert!(symbol_r(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn symbol_dual_evaluation_on_grid() {
        for codim in 1..=3 {
            for l in [0.75, 1.0, 1.5, 2.0] {
                if 2.0 * l > codim as f64 {
                    symbol_r(codim, l, 1.0).unwrap();
                    symbol_r(codim, l, 0.3).unwrap();
                }
            }
        }
    }

    #[test]
    fn weyl_examples() {
        assert!((weyl_coefficient(2, 1, 1.0, 4.0 * PI).unwrap() - 0.25).abs() < 1e-13);
        assert_eq!(weyl_coefficient(2, 1, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn weyl_circle_against_exact_fourier_spectrum() {
        // eigenvalues of c|x−y|^{−1/2} on the unit circle: 2πc·Γ(1/2)/(Γ(3/4)Γ(1/4))·Γ(k+1/4)/Γ(k+3/4), k ∈ ℤ
        use crate::special::{gamma, ln_gamma};
        let c = crate::kernels::riesz_constant(2, 0.75).unwrap();
        let pre = 2.0 * PI * c * gamma(0.5).unwrap() / (gamma(0.75).unwrap() * gamma(0.25).unwrap());
        let lam = |k: f64| pre * (ln_gamma(k + 0.25).unwrap() - ln_gamma(k + 0.75).unwrap()).exp();
        // n(λ_K)·λ_K² for large K: modes ±1..±K plus k = 0
        let big = 200_000.0;
        let fitted = (2.0 * big + 1.0) * lam(big).powi(2);
        let theory = weyl_coefficient(1, 1, 0.75, 2.0 * PI).unwrap();
        assert!(((fitted - theory) / theory).abs() < 0.05, "{fitted} vs {theory}");
    }

    #[test]
    fn fit_examples() {
        let a: Vec<f64> = (1..=1000).map(|k| (k as f64).powf(-0.5)).collect();
        let f = fit_decreasing(&a, WindowRule::Auto).unwrap();
        assert!((f.theta_hat - 2.0).abs() < 1e-10 && (f.c_hat - 1.0).abs() < 1e-10 && f.residual < 1e-12);
        let b: Vec<f64> = (1..=1000).map(|k| 3.0 * (k as f64).powi(-2)).collect();
        let f = fit_decreasing(&b, WindowRule::Auto).unwrap();
        assert!((f.theta_hat - 0.5).abs() < 1e-10 && (f.c_hat - 3.0).abs() < 1e-10);
        let mut alt = Vec::new();
        for k in 1..=500 {
            alt.push(1.0 / k as f64);
            alt.push(-3.0 / (k as f64).sqrt());
        }
        let f = fit_power_law(&SpectralResult::eigen(alt), WindowRule::Auto).unwrap();
        assert!((f.theta_hat - 1.0).abs() < 1e-10);
        assert!(fit_decreasing(&a[..10], WindowRule::Auto).is_err());
        let mut z = a.clone();
        z[20] = 0.0;
        assert!(fit_decreasing(&z, WindowRule::Explicit(10, 40)).is_err());
        assert_eq!(WindowRule::parse("5:40").unwrap(), WindowRule::Explicit(5, 40));
    }

    #[test]
    fn bound_ratio_examples() {
        let theta = 2.0;
        let sr = SpectralResult::eigen((1..=300).map(|k| (k as f64).powf(-1.0 / theta)).collect());
        assert!((bound_ratio(&sr, theta, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(bound_ratio(&SpectralResult::eigen(vec![0.0; 5]), theta, 1.0).unwrap(), 0.0);
        assert!(bound_ratio(&SpectralResult::eigen(vec![]), theta, 1.0).is_err());
        // ties count together: two equal values give n = 2
        assert_eq!(bound_profile(&[1.0, 1.0, 0.5], 1.0), vec![2.0, 2.0, 1.5]);
    }

    #[test]
    fn birman_borzov_examples() {
        let one = crate::measure::AtomicMeasure::new(1, vec![vec![0.2], vec![0.7]], vec![0.5, 0.5], 1.0, 0).unwrap();
        assert!((birman_borzov_functional(&one, &[1.0, 1.0], 1.0, 1.0, |_| 1.0).unwrap() - 1.0).abs() < 1e-15);
        let two = crate::measure::AtomicMeasure::new(1, vec![vec![0.2], vec![1.7]], vec![0.5, 0.5], 1.0, 0).unwrap();
        // N = 1, l = 1, s = 1 gives θ = 1/2
        assert!((birman_borzov_functional(&two, &[1.0, 1.0], 1.0, 1.0, |_| 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(birman_borzov_sum(Vec::new(), 0.5).unwrap(), 0.0);
        assert!(birman_borzov_functional(&two, &[1.0, 1.0], 1.0, 1.0, |q| if q[0] == 1 { 0.0 } else { 1.0 }).is_err());
    }

    #[test]
    fn predict_sphere() {
        let m = discretize(&MeasureSpec::unit_sphere(), 200).unwrap();
        let k = KernelSpec::riesz(3, 1.0).unwrap();
        let p = predict(&k, &m, &vec![1.0; 200], true, None).unwrap();
        assert_eq!(p.theta, 2.0);
        assert_eq!(p.regime, Regime::Subcritical);
        assert!((p.a_plus.unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(p.a_minus.unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn theta_forms_agree(n in 2usize..8, d_frac in 0.0f64..1.0, l in 0.3f64..4.0) {
            let d = 1 + ((n - 1) as f64 * d_frac).floor() as usize;
            let d = d.min(n - 1).max(1);
            let codim = n - d;
            prop_assume!(2.0 * l != n as f64 && 2.0 * l > codim as f64);
            let a = exponent_theta(n, l, d as f64).unwrap();
            let b = d as f64 / (2.0 * l - codim as f64);
            prop_assert!((a - b).abs() < 1e-14 * b.abs().max(1.0));
        }

        #[test]
        fn weyl_scales_like_c_to_theta(c in 0.1f64..10.0) {
            let theta = 2.0;
            let base = weyl_coefficient(2, 1, 1.0, 4.0 * PI).unwrap();
            let scaled = weyl_coefficient(2, 1, 1.0, c.powf(theta) * 4.0 * PI).unwrap();
            prop_assert!((scaled / base - c.powf(theta)).abs() < 1e-12 * c.powf(theta));
        }

        #[test]
        fn fit_exact_on_power_laws(theta in 0.2f64..5.0, c in 0.01f64..100.0) {
            let v: Vec<f64> = (1..=400).map(|k| c * (k as f64).powf(-1.0 / theta)).collect();
            let f = fit_decreasing(&v, WindowRule::Auto).unwrap();
            prop_assert!(f.residual < 1e-12);
            prop_assert!((f.theta_hat - theta).abs() < 1e-10 * theta.max(1.0));
        }
    }
}
