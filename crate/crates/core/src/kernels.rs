//! Radial kernels of 𝔄𝔄*: Riesz kernels of (−Δ)^{−l} (2l < N), closed-form Bessel kernels of
//! (1−Δ)^{−l} for a few (N, 2l) pairs, and bare power laws.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::quadrature::integrate;
use crate::special::gamma;

/// Supercritical (N, 2l) pairs with elementary Bessel kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselPair {
    /// N = 1, 2l = 2: e^{−r}/2, the Krein string case.
    N1L2,
    /// N = 3, 2l = 2: e^{−r}/(4πr).
    N3L2,
    /// N = 3, 2l = 4: e^{−r}/(8π).
    N3L4,
}

impl BesselPair {
    pub fn from_dims(n: usize, two_l: usize) -> Result<Self> {
        match (n, two_l) {
            (1, 2) => Ok(BesselPair::N1L2),
            (3, 2) => Ok(BesselPair::N3L2),
            (3, 4) => Ok(BesselPair::N3L4),
            _ => Err(invalid(format!(
                "no closed-form Bessel kernel for (N, 2l) = ({n}, {two_l}); available: (1,2), (3,2), (3,4)"
            ))),
        }
    }

    pub fn dims(self) -> (usize, usize) {
        match self {
            BesselPair::N1L2 => (1, 2),
            BesselPair::N3L2 => (3, 2),
            BesselPair::N3L4 => (3, 4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Riesz { ambient_dim: usize, l: f64 },
    Bessel(BesselPair),
    PurePower { alpha: f64, c: f64 },
}

/// c(N, l) = Γ(N/2 − l) / (4^l π^{N/2} Γ(l)), so that c|x|^{2l−N} is the kernel of (−Δ)^{−l}.
pub fn riesz_constant(n: usize, l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(invalid(format!("order l must be positive, got {l}")));
    }
    let half_n = n as f64 / 2.0;
    if 2.0 * l >= n as f64 {
        return Err(Error::Regime(format!(
            "Riesz kernel needs 2l < N, got 2l = {}, N = {n}",
            2.0 * l
        )));
    }
    Ok(gamma(half_n - l)? / (4f64.powf(l) * PI.powf(half_n) * gamma(l)?))
}

impl KernelSpec {
    /// Validated Riesz kernel.
    pub fn riesz(ambient_dim: usize, l: f64) -> Result<Self> {
        riesz_constant(ambient_dim, l)?;
        Ok(KernelSpec::Riesz { ambient_dim, l })
    }

    pub fn bessel(n: usize, two_l: usize) -> Result<Self> {
        Ok(KernelSpec::Bessel(BesselPair::from_dims(n, two_l)?))
    }

    pub fn power(alpha: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && c > 0.0) || !alpha.is_finite() || !c.is_finite() {
            return Err(invalid(format!("power kernel needs alpha > 0, c > 0, got ({alpha}, {c})")));
        }
        Ok(KernelSpec::PurePower { alpha, c })
    }

    /// Normalization constant c.
    pub fn constant(&self) -> f64 {
        match *self {
            KernelSpec::Riesz { ambient_dim, l } => {
                riesz_constant(ambient_dim, l).expect("validated on construction")
            }
            KernelSpec::Bessel(BesselPair::N1L2) => 0.5,
            KernelSpec::Bessel(BesselPair::N3L2) => 1.0 / (4.0 * PI),
            KernelSpec::Bessel(BesselPair::N3L4) => 1.0 / (8.0 * PI),
            KernelSpec::PurePower { c, .. } => c,
        }
    }

    /// Exponent α of the leading singularity r^{−α} (0 for bounded kernels).
    pub fn singular_exponent(&self) -> f64 {
        match *self {
            KernelSpec::Riesz { ambient_dim, l } => ambient_dim as f64 - 2.0 * l,
            KernelSpec::Bessel(BesselPair::N3L2) => 1.0,
            KernelSpec::Bessel(_) => 0.0,
            KernelSpec::PurePower { alpha, .. } => alpha,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular_exponent() > 0.0
    }

    /// 2l − N, the quantity entering θ = s/(2l − N + s); −α for a bare power law.
    pub fn order_gap(&self) -> f64 {
        match *self {
            KernelSpec::Riesz { ambient_dim, l } => 2.0 * l - ambient_dim as f64,
            KernelSpec::Bessel(p) => {
                let (n, two_l) = p.dims();
                two_l as f64 - n as f64
            }
            KernelSpec::PurePower { alpha, .. } => -alpha,
        }
    }

    /// (N, l) when the kernel comes from an operator of order l on ℝ^N.
    pub fn dims(&self) -> Option<(usize, f64)> {
        match *self {
            KernelSpec::Riesz { ambient_dim, l } => Some((ambient_dim, l)),
            KernelSpec::Bessel(p) => {
                let (n, two_l) = p.dims();
                Some((n, two_l as f64 / 2.0))
            }
            KernelSpec::PurePower { .. } => None,
        }
    }

    fn smooth_factor(&self, r: f64) -> f64 {
        match self {
            KernelSpec::Bessel(_) => (-r).exp(),
            _ => 1.0,
        }
    }

    /// Kernel value k(r) = c·r^{−α}·g(r).
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(invalid(format!("kernel argument must be a finite r >= 0, got {r}")));
        }
        let alpha = self.singular_exponent();
        if alpha == 0.0 {
            return Ok(self.constant() * self.smooth_factor(r));
        }
        if r == 0.0 {
            return Err(Error::SingularAtOrigin);
        }
        Ok(self.constant() * r.powf(-alpha) * self.smooth_factor(r))
    }

    /// Mean of k(|x|) over an s-dimensional ball of radius ρ with volume element ∝ r^{s−1} dr.
    pub fn ball_average(&self, rho: f64, s: f64) -> Result<f64> {
        let alpha = self.singular_exponent();
        if !(rho > 0.0) || !(s > alpha) {
            return Err(invalid(format!(
                "ball average needs rho > 0 and s > alpha, got rho = {rho}, s = {s}, alpha = {alpha}"
            )));
        }
        // with r = ρ v^{1/(s−α)} the singular weight is absorbed: mean = c ρ^{−α} s/(s−α) ∫₀¹ g
        let p = 1.0 / (s - alpha);
        let tail = match self {
            KernelSpec::Bessel(_) => integrate(|v| self.smooth_factor(rho * v.powf(p)), 0.0, 1.0, 1e-13)?,
            _ => 1.0,
        };
        Ok(self.constant() * rho.powf(-alpha) * s / (s - alpha) * tail)
    }
}

/// Free-function form of [`KernelSpec::eval`].
pub fn kernel_eval(k: &KernelSpec, r: f64) -> Result<f64> {
    k.eval(r)
}

fn parse_number(tok: &str) -> Result<f64> {
    let bad = || Error::Config(format!("cannot parse number `{tok}`"));
    match tok.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok(a / b)
        }
        None => tok.trim().parse().map_err(|_| bad()),
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// Accepts `riesz:N:l`, `bessel:N:2l` and `power:alpha:c`; numbers may be written `a/b`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [name, a, b] = parts[..] else {
            return Err(Error::Config(format!("kernel spec `{s}` must look like name:a:b")));
        };
        let int = |tok: &str| {
            tok.trim().parse::<usize>().map_err(|_| Error::Config(format!("expected an integer, got `{tok}`")))
        };
        match name.to_ascii_lowercase().as_str() {
            "riesz" => KernelSpec::riesz(int(a)?, parse_number(b)?),
            "bessel" => KernelSpec::bessel(int(a)?, int(b)?),
            "power" => KernelSpec::power(parse_number(a)?, parse_number(b)?),
            other => Err(Error::Config(format!("unknown kernel family `{other}`"))),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Riesz { ambient_dim, l } => write!(f, "riesz:{ambient_dim}:{l}"),
            KernelSpec::Bessel(p) => {
                let (n, two_l) = p.dims();
                write!(f, "bessel:{n}:{two_l}")
            }
            KernelSpec::PurePower { alpha, c } => write!(f, "power:{alpha}:{c}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn riesz_constants() {
        assert!((riesz_constant(3, 1.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        let expected = gamma(0.25).unwrap() / (4f64.powf(0.75) * PI * gamma(0.75).unwrap());
        let c = riesz_constant(2, 0.75).unwrap();
        assert!((c - expected).abs() < 1e-15);
        assert!((c - 0.3330).abs() < 5e-5, "{c}");
        assert!(matches!(riesz_constant(3, 1.5), Err(Error::Regime(_))));
    }

    #[test]
    fn newtonian_potential_of_the_sphere() {
        // mean of 1/(4π|x−y|) over the unit sphere at |x| = 1 is 1/(4π)·2 (∫₀^π sinφ/(2 sin(φ/2)) dφ = 2)
        let k = KernelSpec::riesz(3, 1.0).unwrap();
        let v = integrate(|phi: f64| 2.0 * PI * phi.sin() * k.eval(2.0 * (phi / 2.0).sin()).unwrap(), 0.0, PI, 1e-12)
            .unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn evaluations() {
        let k = KernelSpec::riesz(3, 1.0).unwrap();
        assert!((k.eval(2.0).unwrap() - 1.0 / (8.0 * PI)).abs() < 1e-16);
        assert!(matches!(k.eval(0.0), Err(Error::SingularAtOrigin)));
        assert_eq!(KernelSpec::bessel(1, 2).unwrap().eval(0.0).unwrap(), 0.5);
        assert!(KernelSpec::bessel(3, 2).unwrap().eval(0.0).is_err());
        assert!((KernelSpec::bessel(3, 4).unwrap().eval(1.0).unwrap() - (-1f64).exp() / (8.0 * PI)).abs() < 1e-16);
        assert!(KernelSpec::bessel(2, 2).is_err());
    }

    #[test]
    fn parse_and_display() {
        let k: KernelSpec = "riesz:2:3/4".parse().unwrap();
        assert_eq!(k, KernelSpec::Riesz { ambient_dim: 2, l: 0.75 });
        assert_eq!(k.to_string().parse::<KernelSpec>().unwrap(), k);
        assert_eq!("bessel:3:4".parse::<KernelSpec>().unwrap(), KernelSpec::Bessel(BesselPair::N3L4));
        assert_eq!("power:0.5:2".parse::<KernelSpec>().unwrap(), KernelSpec::PurePower { alpha: 0.5, c: 2.0 });
        assert!("riesz:3:1.5".parse::<KernelSpec>().is_err());
        assert!("gauss:1:1".parse::<KernelSpec>().is_err());
        assert!("riesz:3".parse::<KernelSpec>().is_err());
    }

    #[test]
    fn ball_averages() {
        // disk of radius ρ in the plane, kernel 1/(4πr): mean = 1/(2πρ)
        let k = KernelSpec::riesz(3, 1.0).unwrap();
        assert!((k.ball_average(0.1, 2.0).unwrap() - 1.0 / (2.0 * PI * 0.1)).abs() < 1e-12);
        // 1D interval [−ρ, ρ], kernel e^{−r}/2: mean = (1 − e^{−ρ})/(2ρ)
        let b = KernelSpec::bessel(1, 2).unwrap();
        let rho = 0.3;
        assert!((b.ball_average(rho, 1.0).unwrap() - (1.0 - (-rho).exp()) / (2.0 * rho)).abs() < 1e-13);
        // e^{−r}/(4πr) over a disk: (1 − e^{−ρ})/(2πρ²)
        let b = KernelSpec::bessel(3, 2).unwrap();
        let expected = (1.0 - (-rho).exp()) / (2.0 * PI * rho * rho);
        assert!((b.ball_average(rho, 2.0).unwrap() - expected).abs() < 1e-12);
        assert!(k.ball_average(0.1, 0.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn gamma_recurrence(x in 0.1f64..30.0) {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            prop_assert!(((lhs - rhs) / lhs).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn kernels_strictly_decrease(r in 1e-3f64..50.0, dr in 1e-3f64..5.0, which in 0usize..6) {
            let k = [
                KernelSpec::riesz(3, 1.0).unwrap(),
                KernelSpec::riesz(2, 0.75).unwrap(),
                KernelSpec::bessel(1, 2).unwrap(),
                KernelSpec::bessel(3, 2).unwrap(),
                KernelSpec::bessel(3, 4).unwrap(),
                KernelSpec::power(0.7, 2.0).unwrap(),
            ][which];
            prop_assert!(k.eval(r).unwrap() > k.eval(r + dr).unwrap());
        }

        #[test]
        fn riesz_homogeneity(n in 2usize..6, frac in 0.05f64..0.95, r in 1e-3f64..10.0, t in 0.1f64..10.0) {
            let l = frac * n as f64 / 2.0;
            let k = KernelSpec::riesz(n, l).unwrap();
            let lhs = k.eval(t * r).unwrap();
            let rhs = t.powf(2.0 * l - n as f64) * k.eval(r).unwrap();
            prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
        }

        #[test]
        fn beta_symmetric(a in 0.01f64..60.0, b in 0.01f64..60.0) {
            prop_assert_eq!(crate::special::beta(a, b).unwrap(), crate::special::beta(b, a).unwrap());
        }
    }
}
