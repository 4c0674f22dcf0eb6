//! Infinite-temperature averages of the charges, string-charge densities and
//! the Y-system.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conjecture::x_infinity;
use crate::error::{ChargeError, Result};
use crate::lax::{lax_block_derivative_with, lax_blocks_with, SpectralPoint};
use crate::matrix::CMat;
use crate::monodromy::matrix_power;
use crate::output::fmt_num;
use crate::spin_algebra::{LadderConvention, RepIndex, SpinOperators};

const EIGEN_CLUSTER: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CasimirLevel {
    /// Irrep label `r = 2S`; always even.
    pub rlabel: u32,
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

/// `C₂ = s⁻⊗s⁺ + s⁺⊗s⁻ + 2 s_z⊗s_z` on `V_jj ⊗ V_jj` and its spectrum.
#[derive(Clone, Debug)]
pub struct CasimirSpec {
    pub jj: RepIndex,
    pub operator: CMat,
    pub spectrum: Vec<CasimirLevel>,
}

/// Eigenvalue of `C₂` on the irrep with label `r`.
pub fn casimir_eigenvalue(jj: RepIndex, rlabel: u32) -> f64 {
    let (r, j) = (rlabel as f64, jj.get() as f64);
    r * (r + 2.0) / 4.0 - j * (j + 2.0) / 2.0
}

impl CasimirSpec {
    pub fn new(jj: RepIndex) -> Result<Self> {
        let ops = SpinOperators::unitary(jj);
        let two = Complex64::new(2.0, 0.0);
        let operator = ops.sm.kron(&ops.sp) + ops.sp.kron(&ops.sm) + ops.sz.kron(&ops.sz).scale(&two);
        let n = operator.rows();
        let real = DMatrix::from_fn(n, n, |i, j| operator.get(i, j).re);
        let mut eig: Vec<f64> = SymmetricEigen::new(real).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);

        let mut spectrum: Vec<CasimirLevel> = Vec::new();
        for e in eig {
            match spectrum.last_mut() {
                Some(l) if (e - l.eigenvalue).abs() < EIGEN_CLUSTER * (1.0 + e.abs()) => l.multiplicity += 1,
                _ => spectrum.push(CasimirLevel { rlabel: 0, eigenvalue: e, multiplicity: 1 }),
            }
        }
        let j = jj.get() as f64;
        for l in &mut spectrum {
            let r = -1.0 + (1.0 + 4.0 * (l.eigenvalue + j * (j + 2.0) / 2.0)).sqrt();
            let rounded = r.round();
            if (r - rounded).abs() > 1e-6 || rounded < 0.0 || l.multiplicity != rounded as usize + 1 {
                return Err(ChargeError::Invariant(format!(
                    "Casimir level {} with multiplicity {} is not an irrep",
                    l.eigenvalue, l.multiplicity
                )));
            }
            l.rlabel = rounded as u32;
        }
        Ok(CasimirSpec { jj, operator, spectrum })
    }
}

fn lambda_parts(jj: RepIndex, rlabel: u32, mu: Complex64, x: Complex64) -> Result<(Complex64, Complex64)> {
    let a = jj.get() as f64 + 1.0;
    let i = Complex64::i();
    let r = rlabel as f64;
    let num = a * a - r * (r / 2.0 + 1.0) + 2.0 * i * (mu - x) + 4.0 * mu * x;
    let (d1, d2) = (2.0 * mu - i * a, 2.0 * x + i * a);
    if d1.norm() == 0.0 || d2.norm() == 0.0 {
        let at = if d1.norm() == 0.0 { mu } else { x };
        return Err(ChargeError::SingularPoint { re: at.re, im: at.im });
    }
    let den = d1 * d2;
    let d_num = 4.0 * mu - 2.0 * i;
    let d_den = 2.0 * d1;
    Ok((num / den, (d_num * den - num * d_den) / (den * den)))
}

/// `λ_r(μ, x)`, the eigenvalue of `½ tr 𝕃(μ, x)` on the irrep with label `r`.
pub fn lambda_r(jj: RepIndex, rlabel: u32, mu: Complex64, x: Complex64) -> Result<Complex64> {
    Ok(lambda_parts(jj, rlabel, mu, x)?.0)
}

/// `∂_x λ_r(μ, x)`.
pub fn lambda_r_dx(jj: RepIndex, rlabel: u32, mu: Complex64, x: Complex64) -> Result<Complex64> {
    Ok(lambda_parts(jj, rlabel, mu, x)?.1)
}

/// Irrep labels present in `V_jj ⊗ V_jj` with their multiplicities.
pub fn irreps(jj: RepIndex) -> Vec<(u32, usize)> {
    (0..=jj.get()).map(|s| (2 * s, 2 * s as usize + 1)).collect()
}

/// `½ (𝕃¹₁ + 𝕃²₂)` on the quantum space, unitary convention.
pub fn half_trace(jj: RepIndex, mu: Complex64, x: Complex64) -> Result<CMat> {
    let b = lax_blocks_with(jj, SpectralPoint::new(mu, x), LadderConvention::Unitary)?;
    Ok((b.b11 + b.b22).scale(&Complex64::new(0.5, 0.0)))
}

/// Checks that `½ tr 𝕃(μ, x)` has eigenvalue `λ_r` with multiplicity `r + 1`
/// for each irrep, measured by the nullity of `½ tr 𝕃 − λ_r`. Returns the
/// largest singular value inside the claimed null spaces, relative to the
/// operator norm.
pub fn spectrum_check(jj: RepIndex, mu: Complex64, x: Complex64) -> Result<f64> {
    let t = half_trace(jj, mu, x)?;
    let scale = t.norm2().max(1.0);
    let n = t.rows();
    let mut worst = 0.0f64;
    for (r, mult) in irreps(jj) {
        let lam = lambda_r(jj, r, mu, x)?;
        let shifted = t.clone() - CMat::identity(n).scale(&lam);
        let sv = shifted.singular_values();
        worst = worst.max(sv[n - mult] / scale);
        if mult < n && sv[n - mult - 1] / scale < 1e-8 {
            return Err(ChargeError::Invariant(format!("eigenvalue of r = {r} has multiplicity above {mult}")));
        }
    }
    Ok(worst)
}

/// `(1/π) jj / ((jj+1)² + 4μ²)`.
pub fn gibbs_average(jj: RepIndex, mu: f64) -> f64 {
    let a = jj.get() as f64 + 1.0;
    jj.get() as f64 / (PI * (a * a + 4.0 * mu * mu))
}

/// `(1 / 2πi N) ∂_x (λ₀^N)` at `x = μ`.
pub fn lambda0_finite_n(jj: RepIndex, mu: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(ChargeError::InvalidInput("N must be >= 1".into()));
    }
    let m = Complex64::new(mu, 0.0);
    let (lam, dlam) = lambda_parts(jj, 0, m, m)?;
    let v = lam.powf(n as f64 - 1.0) * dlam / Complex64::new(0.0, 2.0 * PI);
    Ok(v.re)
}

/// `(1 / 2πi N) tr ∂_x (½ tr 𝕃(μ, x))^N` at `x = μ`, by matrix powers.
pub fn literal_average(jj: RepIndex, mu: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(ChargeError::InvalidInput("N must be >= 1".into()));
    }
    let m = Complex64::new(mu, 0.0);
    let t = half_trace(jj, m, m)?;
    let d = lax_block_derivative_with(jj, m, LadderConvention::Unitary)?;
    let dt = (d.b11 + d.b22).scale(&Complex64::new(0.5, 0.0));
    // tr ∂(T^N) = N tr(T^{N-1} T')
    let prod = matrix_power(&t, n - 1).matmul(&dt);
    let tr: Complex64 = (0..prod.rows()).map(|i| *prod.get(i, i)).sum();
    Ok((tr / Complex64::new(0.0, 2.0 * PI)).re)
}

/// Same as `literal_average` through the irrep decomposition.
pub fn spectral_average(jj: RepIndex, mu: f64, n: u64) -> Result<f64> {
    let m = Complex64::new(mu, 0.0);
    let mut tr = Complex64::new(0.0, 0.0);
    for (r, mult) in irreps(jj) {
        let (lam, dlam) = lambda_parts(jj, r, m, m)?;
        tr += mult as f64 * lam.powf(n as f64 - 1.0) * dlam;
    }
    Ok((tr / Complex64::new(0.0, 2.0 * PI)).re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPair {
    pub jj: u32,
    pub mu: f64,
    pub rho: f64,
    pub rho_bar: f64,
    pub eta: f64,
}

/// `X∞_j(μ)` with `X∞_0 ≡ 0`.
fn x_inf(j: u32, mu: Complex64) -> Result<Complex64> {
    if j == 0 {
        Ok(Complex64::new(0.0, 0.0))
    } else {
        x_infinity(RepIndex::new(j)?, mu)
    }
}

/// `ρ` and `ρ̄` through the string-charge relations applied to `X∞`.
pub fn string_densities(jj: RepIndex, mu: f64) -> Result<DensityPair> {
    let j = jj.get();
    let m = Complex64::new(mu, 0.0);
    let half = Complex64::new(0.0, 0.5);
    let shifted = x_inf(j, m + half)? + x_inf(j, m - half)?;
    let rho = (shifted - x_inf(j - 1, m)? - x_inf(j + 1, m)?).re;
    let jf = j as f64;
    let rho_bar = 4.0 * jf / (2.0 * PI * (jf * jf + 4.0 * mu * mu)) - shifted.re;
    Ok(DensityPair { jj: j, mu, rho, rho_bar, eta: rho_bar / rho })
}

/// `ρ_jj(μ) = (1/2π) 8 / ((4μ² + jj²)(4μ² + (jj+2)²))`.
pub fn rho_closed_form(jj: RepIndex, mu: f64) -> f64 {
    let j = jj.get() as f64;
    let m2 = 4.0 * mu * mu;
    8.0 / (2.0 * PI * (m2 + j * j) * (m2 + (j + 2.0) * (j + 2.0)))
}

/// `ρ̄_jj(μ) = jj (jj+2) ρ_jj(μ)`.
pub fn rho_bar_closed_form(jj: RepIndex, mu: f64) -> f64 {
    let j = jj.get() as f64;
    j * (j + 2.0) * rho_closed_form(jj, mu)
}

pub fn eta(j: u64) -> u64 {
    j * (j + 2)
}

/// `max_j |η_j² − (1 + η_{j+1})(1 + η_{j−1})|` over `1 ≤ j ≤ jj_max`, in
/// integers with `η₀ = 0`.
pub fn y_system_check(jj_max: u64) -> Result<u64> {
    if jj_max == 0 {
        return Err(ChargeError::InvalidInput("jj_max must be >= 1".into()));
    }
    Ok((1..=jj_max)
        .map(|j| {
            let lhs = eta(j) as i128 * eta(j) as i128;
            let rhs = (1 + eta(j + 1) as i128) * (1 + eta(j - 1) as i128);
            (lhs - rhs).unsigned_abs() as u64
        })
        .max()
        .unwrap_or(0))
}

pub fn write_densities_csv<W: Write>(jj: RepIndex, mus: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mu", "rho", "rho_bar", "eta"])?;
    for &mu in mus {
        let d = string_densities(jj, mu)?;
        w.write_record([mu, d.rho, d.rho_bar, d.eta].map(fmt_num))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjecture::x_infinity_real;
    use proptest::prelude::*;

    fn jj(n: u32) -> RepIndex {
        RepIndex::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lambda_zero_is_one_on_diagonal() {
        for j in 1..=6 {
            for mu in [-3.0, 0.0, 0.4, 7.5] {
                let l = lambda_r(jj(j), 0, c(mu, 0.0), c(mu, 0.0)).unwrap();
                assert!((l - 1.0).norm() < 1e-15);
            }
        }
        assert!(lambda_r(jj(1), 0, c(0.0, 1.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn casimir_spectrum_is_even_irreps() {
        for j in 1..=4 {
            let spec = CasimirSpec::new(jj(j)).unwrap();
            let labels: Vec<(u32, usize)> = spec.spectrum.iter().map(|l| (l.rlabel, l.multiplicity)).collect();
            assert_eq!(labels, irreps(jj(j)));
            for l in &spec.spectrum {
                assert!((l.eigenvalue - casimir_eigenvalue(jj(j), l.rlabel)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn half_trace_spectrum_matches_lambda() {
        for j in 1..=3 {
            for (mu, x) in [(c(0.3, 0.0), c(-1.1, 0.0)), (c(1.0, 0.2), c(0.5, -0.7)), (c(2.0, 0.0), c(2.0, 0.0))] {
                assert!(spectrum_check(jj(j), mu, x).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn subleading_eigenvalues_are_contracting() {
        for j in 1..=5 {
            for k in -200..=200 {
                let mu = c(k as f64 * 0.05, 0.0);
                for (r, _) in irreps(jj(j)).into_iter().skip(1) {
                    assert!(lambda_r(jj(j), r, mu, mu).unwrap().norm() < 1.0);
                }
            }
        }
    }

    #[test]
    fn gibbs_examples() {
        assert!((gibbs_average(jj(1), 0.0) - 1.0 / (4.0 * PI)).abs() < 1e-16);
        for j in 1..=5 {
            for k in 0..1000 {
                let mu = -10.0 + 0.02 * k as f64;
                let g = gibbs_average(jj(j), mu);
                assert!((g - x_infinity_real(jj(j), mu)).abs() <= 1e-12 * g);
            }
        }
    }

    #[test]
    fn finite_n_limits() {
        for n in [100, 1000, 10_000] {
            assert!((lambda0_finite_n(jj(1), 0.7, n).unwrap() - gibbs_average(jj(1), 0.7)).abs() < 1e-6);
        }
        let target = gibbs_average(jj(2), 0.5);
        let errs: Vec<f64> = (4..=12).map(|n| (literal_average(jj(2), 0.5, n).unwrap() - target).abs()).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        for n in [1, 3, 12] {
            let a = literal_average(jj(3), -0.8, n).unwrap();
            let b = spectral_average(jj(3), -0.8, n).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn density_examples() {
        let d = string_densities(jj(1), 0.0).unwrap();
        assert!((d.rho - 4.0 / (9.0 * PI)).abs() < 1e-15);
        let d = string_densities(jj(2), 0.0).unwrap();
        assert!((d.eta - 8.0).abs() < 1e-12);
    }

    #[test]
    fn y_system() {
        assert_eq!(eta(1) * eta(1), (1 + eta(2)) * (1 + eta(0)));
        assert_eq!(eta(2) * eta(2), 64);
        assert_eq!(y_system_check(20).unwrap(), 0);
    }

    #[test]
    fn densities_csv_header() {
        let mut buf = Vec::new();
        write_densities_csv(jj(1), &[0.0, 1.0], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("mu,rho,rho_bar,eta\n"));
        assert_eq!(s.lines().count(), 3);
    }

    proptest! {
        #[test]
        fn shift_relations_match_closed_forms(j in 1u32..=5, mu in -10.0f64..10.0) {
            let d = string_densities(jj(j), mu).unwrap();
            let (r, rb) = (rho_closed_form(jj(j), mu), rho_bar_closed_form(jj(j), mu));
            prop_assert!((d.rho - r).abs() <= 1e-12 * r.max(1e-300) || (d.rho - r).abs() < 1e-12);
            prop_assert!((d.rho_bar - rb).abs() < 1e-12);
        }

        #[test]
        fn densities_are_positive(j in 1u32..=8, mu in -50.0f64..50.0) {
            let d = string_densities(jj(j), mu).unwrap();
            prop_assert!(d.rho > 0.0 && d.rho_bar > 0.0);
        }
    }
}
