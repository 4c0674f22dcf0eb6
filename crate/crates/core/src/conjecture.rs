//! The conjectured limit `X∞`, the large-`μ` approximation `X̃`, the deviation
//! measure `Δ` and the thermodynamic integral.

use std::f64::consts::PI;
use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{ChargeError, Result};
use crate::exact::{charge_exact, RationalEvaluator};
use crate::monodromy::ChargeEvaluator;
use crate::output::fmt_num;
use crate::spin_algebra::RepIndex;
use crate::state::SpinState;

/// Switch to the series branch of `x_tilde` when `|1 − r|` is below this.
pub const R_ONE_BRANCH: f64 = 1e-6;
/// `ε²` coefficient of `X̃(1 − ε) / X∞` as printed alongside the conjecture.
pub const PRINTED_EPS2: f64 = 1.0 / 12.0;
/// Largest length handled by the exact backend under `Backend::Auto`.
pub const EXACT_MAX_LEN: usize = 60;

fn q_sq(jj: RepIndex) -> f64 {
    let q = (jj.get() as f64 + 1.0) / 2.0;
    q * q
}

fn pole_guard(jj: RepIndex, mu: Complex64) -> Result<Complex64> {
    let d = mu * mu + q_sq(jj);
    if d.norm() < 1e-300 {
        return Err(ChargeError::SingularPoint { re: mu.re, im: mu.im });
    }
    Ok(d)
}

/// `X∞(μ) = (1/4π) jj / (μ² + (jj+1)²/4)`.
pub fn x_infinity(jj: RepIndex, mu: Complex64) -> Result<Complex64> {
    Ok(jj.get() as f64 / (4.0 * PI) / pole_guard(jj, mu)?)
}

pub fn x_infinity_real(jj: RepIndex, mu: f64) -> f64 {
    jj.get() as f64 / (4.0 * PI * (mu * mu + q_sq(jj)))
}

/// `jj/2 − C(r)`, the bracket of the large-`μ` approximation.
fn bracket(jj: RepIndex, r: f64) -> f64 {
    let j = jj.get() as f64;
    let eps = 1.0 - r;
    if eps.abs() < R_ONE_BRANCH {
        return j / 2.0 * (1.0 + derived_eps2(jj) * eps * eps);
    }
    // numerator and denominator of C(r) with the common factor (1 − r) removed
    let geom = |k: u32| (0..k).fold(0.0, |acc, _| acc * r + 1.0);
    let n = j * (r.powi(jj.get() as i32 + 1) + 1.0) - 2.0 * r * geom(jj.get());
    let d = 2.0 * (r + 1.0) * geom(jj.get() + 1);
    j / 2.0 - n / d
}

/// `ε²` coefficient of `X̃(1 − ε) / X∞` from the series of the closed form.
pub fn derived_eps2(jj: RepIndex) -> f64 {
    -(jj.get() as f64 + 2.0) / 12.0
}

/// `X̃(μ) = (1/2π) (jj/2 − C(r)) / (μ² + (jj+1)²/4)`.
pub fn x_tilde(jj: RepIndex, mu: Complex64, r: f64) -> Result<Complex64> {
    if !(r >= 0.0) {
        return Err(ChargeError::InvalidInput(format!("r = {r} must be nonnegative")));
    }
    let b = if r.is_infinite() { bracket(jj, 0.0) } else { bracket(jj, r) };
    Ok(b / (2.0 * PI) / pole_guard(jj, mu)?)
}

pub fn x_tilde_real(jj: RepIndex, mu: f64, r: f64) -> Result<f64> {
    Ok(x_tilde(jj, Complex64::new(mu, 0.0), r)?.re)
}

/// Coefficient `c` of `X̃ ~ c / (π μ²)` as an exact rational in `r = n₂/n₁`.
pub fn approx_leading_coefficient(jj: RepIndex, n1: usize, n2: usize) -> Result<BigRational> {
    if n1 + n2 == 0 {
        return Err(ChargeError::InvalidInput("empty state".into()));
    }
    let (lo, hi) = (n1.min(n2), n1.max(n2));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let j = BigRational::from_integer(BigInt::from(jj.get()));
    if lo == hi {
        return Ok(&half * &j * &half);
    }
    let r = BigRational::new(BigInt::from(lo), BigInt::from(hi));
    let one = BigRational::one();
    let pow = |k: u32| (0..k).fold(BigRational::one(), |acc, _| acc * &r);
    let n = &j * (&one - &r) * (pow(jj.get() + 1) + &one)
        - BigRational::from_integer(BigInt::from(2)) * &r * (&one - pow(jj.get()));
    let d = BigRational::from_integer(BigInt::from(2)) * (&r + &one) * (&one - pow(jj.get() + 1));
    Ok(&half * (&j * &half - n / d))
}

pub fn r_inversion_check(jj: RepIndex, mu: Complex64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(ChargeError::InvalidInput(format!("r = {r} must be positive")));
    }
    let a = x_tilde(jj, mu, r)?;
    let b = x_tilde(jj, mu, 1.0 / r)?;
    Ok((a - b).norm() / a.norm().max(f64::MIN_POSITIVE))
}

/// `|X̃(r = 1 − ε) − X∞ (1 + c₂ ε²)|` with `c₂ = derived_eps2(jj)`.
pub fn epsilon_expansion_check(jj: RepIndex, mu: Complex64, eps: f64) -> Result<f64> {
    epsilon_expansion_residual(jj, mu, eps, derived_eps2(jj))
}

pub fn epsilon_expansion_residual(jj: RepIndex, mu: Complex64, eps: f64, c2: f64) -> Result<f64> {
    if eps.abs() > 0.3 {
        return Err(ChargeError::InvalidInput(format!("|eps| = {} exceeds 0.3", eps.abs())));
    }
    let lhs = x_tilde(jj, mu, 1.0 - eps)?;
    let rhs = x_infinity(jj, mu)? * (1.0 + c2 * eps * eps);
    Ok((lhs - rhs).norm())
}

/// Least-squares slope of `log residual` against `log ε`.
pub fn fitted_exponent(jj: RepIndex, mu: Complex64, eps: &[f64], c2: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .map(|&e| Ok((e.ln(), epsilon_expansion_residual(jj, mu, e, c2)?.ln())))
        .collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    Ok(num / den)
}

/// Uniform grid with one local refinement pass around the coarse maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub refinement: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { lo: -10.0, hi: 10.0, points: 2001, refinement: 10 }
    }
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize, refinement: usize) -> Result<Self> {
        let g = GridSpec { lo, hi, points, refinement };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || self.points < 2 {
            return Err(ChargeError::InvalidInput(format!("bad grid {self:?}")));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.lo + i as f64 * self.step()).collect()
    }
}

/// Charge backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Numeric,
    /// Exact up to `EXACT_MAX_LEN` sites, numeric beyond.
    Auto,
}

impl Backend {
    pub fn resolve(self, len: usize) -> Backend {
        match self {
            Backend::Auto if len <= EXACT_MAX_LEN => Backend::Exact,
            Backend::Auto => Backend::Numeric,
            b => b,
        }
    }
}

/// Real-`μ` charge of one state, built once and evaluated many times.
pub enum ChargeFunction {
    Exact(RationalEvaluator),
    Numeric { evaluator: ChargeEvaluator, psi: SpinState },
}

impl ChargeFunction {
    pub fn new(psi: &SpinState, jj: RepIndex, backend: Backend) -> Result<Self> {
        Ok(match backend.resolve(psi.len()) {
            Backend::Exact => ChargeFunction::Exact(charge_exact(psi, jj)?.evaluator()),
            _ => ChargeFunction::Numeric { evaluator: ChargeEvaluator::new(jj), psi: psi.clone() },
        })
    }

    pub fn eval(&self, mu: f64) -> Result<f64> {
        match self {
            ChargeFunction::Exact(ev) => Ok(ev.eval(mu)),
            ChargeFunction::Numeric { evaluator, psi } => evaluator.charge_real(psi, mu),
        }
    }
}

/// `r = n₂/n₁` folded into `[0, 1]` using the `r → 1/r` symmetry.
pub fn folded_ratio(psi: &SpinState) -> f64 {
    let (a, b) = (psi.n_up(), psi.n_down());
    a.min(b) as f64 / a.max(b) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub delta: f64,
    pub argmax: f64,
    /// Grid points where the charge could not be evaluated or vanishes.
    pub excluded: Vec<f64>,
}

/// `Δ = sup |(X − X̃)/X|` over the grid, `X` from `charge`.
pub fn deviation_with(
    charge: impl Fn(f64) -> Result<f64>,
    jj: RepIndex,
    r: f64,
    grid: &GridSpec,
) -> Result<Deviation> {
    grid.validate()?;
    let mut excluded = Vec::new();
    let rel = |mu: f64, excluded: &mut Vec<f64>| -> Result<Option<f64>> {
        let xt = x_tilde_real(jj, mu, r)?;
        match charge(mu) {
            Ok(x) if x != 0.0 && x.is_finite() => Ok(Some(((x - xt) / x).abs())),
            Ok(x) if x == 0.0 && xt == 0.0 => Ok(Some(0.0)),
            Ok(_) | Err(ChargeError::PoleProximity { .. }) | Err(ChargeError::JordanChain { .. })
            | Err(ChargeError::DegenerateEigenspace { .. }) => {
                excluded.push(mu);
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    let mut best_idx = None;
    for (i, mu) in grid.nodes().into_iter().enumerate() {
        if let Some(d) = rel(mu, &mut excluded)? {
            if d > best.0 {
                best = (d, mu);
                best_idx = Some(i);
            }
        }
    }
    if let (Some(_), true) = (best_idx, grid.refinement > 1) {
        let h = grid.step();
        let fine = h / grid.refinement as f64;
        let centre = best.1;
        for k in 1..grid.refinement {
            for mu in [centre - k as f64 * fine, centre + k as f64 * fine] {
                if mu < grid.lo || mu > grid.hi {
                    continue;
                }
                if let Some(d) = rel(mu, &mut excluded)? {
                    if d > best.0 {
                        best = (d, mu);
                    }
                }
            }
        }
    }
    if best_idx.is_none() {
        return Err(ChargeError::InvalidInput("no grid point could be evaluated".into()));
    }
    Ok(Deviation { delta: best.0, argmax: best.1, excluded })
}

pub fn deviation(psi: &SpinState, jj: RepIndex, grid: &GridSpec, backend: Backend) -> Result<Deviation> {
    let charge = ChargeFunction::new(psi, jj, backend)?;
    deviation_with(|mu| charge.eval(mu), jj, folded_ratio(psi), grid)
}

/// `(c/2π²) ∫ da / ((4a²+1)(a² + (μ−a)² + 1/2))` over the real line.
pub fn thermo_integral(mu: f64, c: f64) -> Result<f64> {
    let f = |theta: f64| {
        let a = theta.tan();
        let sec2 = 1.0 + a * a;
        let v = sec2 / ((4.0 * a * a + 1.0) * (a * a + (mu - a) * (mu - a) + 0.5));
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let out = quadrature::double_exponential::integrate(f, -PI / 2.0, PI / 2.0, 1e-10);
    if !(out.error_estimate <= 1e-8) {
        return Err(ChargeError::Quadrature(out.error_estimate));
    }
    Ok(c / (2.0 * PI * PI) * out.integral)
}

pub fn thermo_closed_form(mu: f64, c: f64) -> f64 {
    c / (4.0 * PI * (mu * mu + 1.0))
}

/// CSV rows `mu, X_exact, X_tilde, X_infinity, rel_deviation`.
pub fn write_curve_csv<W: Write>(
    psi: &SpinState,
    jj: RepIndex,
    mus: &[f64],
    backend: Backend,
    out: W,
) -> Result<()> {
    let charge = ChargeFunction::new(psi, jj, backend)?;
    let r = folded_ratio(psi);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mu", "X_exact", "X_tilde", "X_infinity", "rel_deviation"])?;
    for &mu in mus {
        let x = charge.eval(mu).unwrap_or(f64::NAN);
        let xt = x_tilde_real(jj, mu, r)?;
        let row = [mu, x, xt, x_infinity_real(jj, mu), ((x - xt) / x).abs()];
        w.write_record(row.map(fmt_num))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use proptest::prelude::*;

    fn jj(n: u32) -> RepIndex {
        RepIndex::new(n).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn x_infinity_values() {
        assert!((x_infinity(jj(1), c(0.0)).unwrap().re - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((x_infinity(jj(2), c(0.0)).unwrap().re - 2.0 / (9.0 * PI)).abs() < 1e-16);
        assert!(x_infinity(jj(1), c(1e8)).unwrap().norm() < 1e-17);
        assert!(x_infinity(jj(1), Complex64::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn x_tilde_values() {
        for j in 1..=6 {
            for mu in [0.0, 0.7, 3.0] {
                assert_eq!(x_tilde(jj(j), c(mu), 1.0).unwrap(), x_infinity(jj(j), c(mu)).unwrap());
            }
        }
        let v = x_tilde_real(jj(1), 0.0, 0.4).unwrap();
        assert!((v - 10.0 / (49.0 * PI)).abs() < 1e-15);
        for j in 1..=4 {
            assert_eq!(x_tilde_real(jj(j), 2.0, 0.0).unwrap(), 0.0);
        }
        assert!(x_tilde(jj(1), c(0.0), -0.1).is_err());
    }

    #[test]
    fn r_inversion() {
        assert!(r_inversion_check(jj(3), c(2.0), 0.3).unwrap() <= 1e-12);
        assert_eq!(r_inversion_check(jj(2), c(1.0), 1.0).unwrap(), 0.0);
        let a = x_tilde_real(jj(1), 0.0, 5.0).unwrap();
        let b = x_tilde_real(jj(1), 0.0, 0.2).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn series_branch_is_continuous() {
        for j in 1..=5 {
            let left = x_tilde_real(jj(j), 0.5, 1.0 - 1.01e-6).unwrap();
            let right = x_tilde_real(jj(j), 0.5, 1.0 - 0.99e-6).unwrap();
            assert!((left - right).abs() < 1e-12 * left.abs());
        }
    }

    #[test]
    fn epsilon_expansion_is_third_order() {
        assert_eq!(epsilon_expansion_check(jj(2), c(1.0), 0.0).unwrap(), 0.0);
        let eps = [0.01, 0.02, 0.04, 0.06, 0.08, 0.1];
        for j in 1..=4 {
            let p = fitted_exponent(jj(j), c(1.0), &eps, derived_eps2(jj(j))).unwrap();
            assert!(p >= 2.8, "jj={j} exponent {p}");
            let printed = fitted_exponent(jj(j), c(1.0), &eps, PRINTED_EPS2).unwrap();
            assert!((printed - 2.0).abs() < 0.1, "jj={j} printed exponent {printed}");
        }
        let ratios: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&e| epsilon_expansion_check(jj(2), c(1.0), e).unwrap() / (e * e * e))
            .collect();
        assert!(ratios.windows(2).all(|w| (w[0] - w[1]).abs() < 0.1 * w[0]));
    }

    #[test]
    fn leading_coefficient_rational() {
        assert_eq!(approx_leading_coefficient(jj(1), 5, 2).unwrap(), rational(10, 49));
        assert_eq!(approx_leading_coefficient(jj(1), 1, 1).unwrap(), rational(1, 4));
        assert_eq!(approx_leading_coefficient(jj(3), 4, 0).unwrap(), rational(0, 1));
        for j in 1..=4 {
            for (n1, n2) in [(3, 1), (2, 5), (7, 4)] {
                let exact = approx_leading_coefficient(jj(j), n1, n2).unwrap();
                let r = n2 as f64 / n1 as f64;
                let float = x_tilde_real(jj(j), 1e7, r).unwrap() * PI * 1e14;
                assert!((exact_f64(&exact) - float).abs() < 1e-6);
            }
        }
    }

    fn exact_f64(q: &BigRational) -> f64 {
        use num_traits::ToPrimitive;
        q.to_f64().unwrap()
    }

    #[test]
    fn deviation_of_exact_match_is_zero() {
        let d = deviation_with(|mu| x_tilde_real(jj(2), mu, 0.5), jj(2), 0.5, &GridSpec::default()).unwrap();
        assert_eq!(d.delta, 0.0);
        assert!(d.excluded.is_empty());
    }

    #[test]
    fn neel_state_is_an_outlier() {
        let psi: SpinState = "1212".parse().unwrap();
        let d = deviation(&psi, jj(1), &GridSpec::default(), Backend::Exact).unwrap();
        assert!(d.delta >= 0.4, "{d:?}");
    }

    #[test]
    fn backends_agree_on_deviation() {
        let psi: SpinState = "1121221211".parse().unwrap();
        let grid = GridSpec::new(-10.0, 10.0, 201, 10).unwrap();
        let a = deviation(&psi, jj(2), &grid, Backend::Exact).unwrap();
        let b = deviation(&psi, jj(2), &grid, Backend::Numeric).unwrap();
        assert!((a.delta - b.delta).abs() < 1e-9 * a.delta);
    }

    #[test]
    fn thermo_integral_values() {
        assert!((thermo_integral(0.0, 1.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-8);
        assert!((thermo_integral(1.0, 1.0).unwrap() - 1.0 / (8.0 * PI)).abs() < 1e-8);
        let one = thermo_integral(0.3, 1.0).unwrap();
        assert!((thermo_integral(0.3, 2.0).unwrap() - 2.0 * one).abs() < 1e-15);
    }

    #[test]
    fn curve_csv() {
        let psi: SpinState = "1121".parse().unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&psi, jj(1), &[0.0, 1.0], Backend::Exact, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("mu,X_exact,X_tilde,X_infinity,rel_deviation\n"));
        assert_eq!(text.lines().count(), 3);
    }

    proptest! {
        #[test]
        fn thermo_matches_closed_form(mu in -5.0f64..5.0) {
            prop_assert!((thermo_integral(mu, 1.0).unwrap() - thermo_closed_form(mu, 1.0)).abs() < 1e-8);
        }

        #[test]
        fn inversion_symmetry(j in 1u32..6, r in 0.01f64..20.0, mu in -5.0f64..5.0) {
            prop_assert!(r_inversion_check(jj(j), c(mu), r).unwrap() <= 1e-12);
        }

        #[test]
        fn tilde_tends_to_infinity_form(j in 1u32..6, mu in -10.0f64..10.0) {
            let a = x_tilde_real(jj(j), mu, 1.0 - 1e-4).unwrap();
            let b = x_infinity_real(jj(j), mu);
            prop_assert!((a - b).abs() <= 1e-7 * b);
        }
    }
}
