//! Exact charges as reduced rational functions of `μ`.
//!
//! At `x = μ` the scaled diagonal blocks `4 B(μ, μ)` of the top sector are
//! integer polynomials in `t = μ²`, and `2 ∂_x B` splits into `μ G_re + i G_im`
//! with integer `G_re`, `G_im`. With `E = 4t + (jj+1)²` the unit-eigenvalue
//! problem becomes `(P − E^M) v = 0` for the integer product `P`, and
//!
//! ```text
//! π X = [Σ_i E^(M−i) w·G_im u_i + M (jj+1) E^(M−1) w·v] / (M E^M w·v)
//! ```
//!
//! where `u_1 = v`, `u_(i+1) = 4B_(ψ_i) u_i`. The real part cancels exactly
//! and is checked rather than assumed.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{ChargeError, Result};
use crate::lax::{Bilinear, LaxStructure, Spin};
use crate::matrix::Mat;
use crate::poly::IntPoly;
use crate::scalar::GaussRational;
use crate::spin_algebra::{RepIndex, SpinOperators};
use crate::state::SpinState;

pub const DEFAULT_DEGREE_CAP: usize = 600;
pub const JSON_SCHEMA: &str = "rational-charge/1";

/// `X(μ) = prefactor / π · numerator(μ²) / denominator(μ²)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalCharge {
    pub jj: RepIndex,
    pub psi_len: usize,
    pub prefactor: BigRational,
    /// Coefficients in `t = μ²`, ascending.
    pub numerator: IntPoly,
    pub denominator: IntPoly,
}

/// Integer site data in `t`.
#[derive(Clone, Debug)]
struct SitePolys {
    block: Mat<IntPoly>,
    g_re: Mat<IntPoly>,
    g_im: Mat<IntPoly>,
}

fn to_integer(q: &BigRational) -> Result<BigInt> {
    if q.is_integer() {
        Ok(q.to_integer())
    } else {
        Err(ChargeError::Invariant(format!("non-integer coefficient {q}")))
    }
}

fn real_integer(z: &GaussRational, what: &str) -> Result<BigInt> {
    if !z.im.is_zero() {
        return Err(ChargeError::Invariant(format!("{what} has an imaginary part")));
    }
    to_integer(&z.re)
}

fn site_polys(b: &Bilinear<GaussRational>) -> Result<SitePolys> {
    let n = b.c0.rows();
    let four = GaussRational::new(BigRational::from_integer(4.into()), BigRational::zero());
    let two = GaussRational::new(BigRational::from_integer(2.into()), BigRational::zero());
    let mut block = Mat::zeros(n, n);
    let mut g_re = Mat::zeros(n, n);
    let mut g_im = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let lin = b.c_mu.get(i, j).clone() + b.c_x.get(i, j).clone();
            if !lin.re.is_zero() || !lin.im.is_zero() {
                return Err(ChargeError::Invariant("diagonal block is not even in mu".into()));
            }
            let c0 = real_integer(&(b.c0.get(i, j).clone() * four.clone()), "block constant")?;
            let c2 = real_integer(&(b.c_mux.get(i, j).clone() * four.clone()), "block quadratic")?;
            block.set(i, j, IntPoly::new(vec![c0, c2]));

            let dx = b.c_x.get(i, j).clone() * two.clone();
            let dmux = b.c_mux.get(i, j).clone() * two.clone();
            if !dx.re.is_zero() || !dmux.im.is_zero() {
                return Err(ChargeError::Invariant("derivative block has the wrong parity".into()));
            }
            g_re.set(i, j, IntPoly::constant(to_integer(&dmux.re)?));
            g_im.set(i, j, IntPoly::constant(to_integer(&dx.im)?));
        }
    }
    Ok(SitePolys { block, g_re, g_im })
}

fn top_site_polys(jj: RepIndex) -> Result<(SitePolys, SitePolys)> {
    let structure = LaxStructure::<GaussRational>::new(&SpinOperators::integer(jj));
    let (up, down) = structure.top_diagonal();
    Ok((site_polys(&up)?, site_polys(&down)?))
}

fn minor(m: &Mat<IntPoly>, skip_row: usize, skip_col: usize) -> Vec<Vec<IntPoly>> {
    (0..m.rows())
        .filter(|&i| i != skip_row)
        .map(|i| {
            (0..m.cols())
                .filter(|&j| j != skip_col)
                .map(|j| m.get(i, j).clone())
                .collect()
        })
        .collect()
}

/// Fraction-free (Bareiss) determinant over `Z[t]`.
pub fn determinant(mut a: Vec<Vec<IntPoly>>) -> Result<IntPoly> {
    let n = a.len();
    if n == 0 {
        return Ok(IntPoly::one());
    }
    let mut negate = false;
    let mut prev = IntPoly::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return Ok(IntPoly::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.exact_divide_int(&prev)?;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    Ok(if negate { -det } else { det })
}

/// First nonvanishing column of `Adj(m)`, made primitive, as a null vector of
/// a corank-one polynomial matrix `m`.
pub fn adjugate_null_vector(m: &Mat<IntPoly>) -> Result<Vec<IntPoly>> {
    let n = m.rows();
    if n == 1 {
        return if m.get(0, 0).is_zero() {
            Ok(vec![IntPoly::one()])
        } else {
            Err(ChargeError::AdjugateVanishes)
        };
    }
    for col in 0..n {
        let v: Vec<IntPoly> = (0..n)
            .map(|i| {
                let d = determinant(minor(m, col, i))?;
                Ok(if (i + col) % 2 == 1 { -d } else { d })
            })
            .collect::<Result<_>>()?;
        if v.iter().all(|p| p.is_zero()) {
            continue;
        }
        let g = v.iter().fold(IntPoly::zero(), |g, p| g.gcd_int(p));
        let mut v: Vec<IntPoly> = v
            .iter()
            .map(|p| p.exact_divide_int(&g))
            .collect::<Result<_>>()?;
        let first = v.iter().find(|p| !p.is_zero()).expect("nonzero column");
        if first.leading().is_some_and(|c| c.is_negative()) {
            v = v.iter().map(|p| -p).collect();
        }
        return Ok(v);
    }
    Err(ChargeError::AdjugateVanishes)
}

/// Null vector of `m − I` for a matrix of rational functions given as
/// `numerators / common_denominator`.
pub fn adjugate_unit_vector(numerators: &Mat<IntPoly>, common_denominator: &IntPoly) -> Result<Vec<IntPoly>> {
    let n = numerators.rows();
    let shifted = Mat::from_fn(n, n, |i, j| {
        let e = numerators.get(i, j);
        if i == j {
            e - common_denominator
        } else {
            e.clone()
        }
    });
    adjugate_null_vector(&shifted)
}

fn dot(w: &[BigInt], v: &[IntPoly]) -> IntPoly {
    w.iter()
        .zip(v)
        .fold(IntPoly::zero(), |acc, (wk, vk)| &acc + &vk.scale(wk))
}

fn w_integer(n: usize) -> Vec<BigInt> {
    (0..n).map(|k| BigInt::from(if k % 2 == 0 { 1 } else { -1 })).collect()
}

fn unit_vector_of(psi: &SpinState, n: usize, up: &SitePolys, down: &SitePolys, e_m: &IntPoly) -> Result<Vec<IntPoly>> {
    let mut product: Mat<IntPoly> = Mat::identity(n);
    for &s in psi.sites() {
        let site = match s {
            Spin::Up => up,
            Spin::Down => down,
        };
        product = site.block.matmul(&product);
    }
    let v = adjugate_unit_vector(&product, e_m)?;
    let residual = product.apply(&v);
    if residual.iter().zip(&v).any(|(pv, vk)| pv != &(e_m * vk)) {
        return Err(ChargeError::Invariant("adjugate column is not a null vector".into()));
    }
    Ok(v)
}

pub fn charge_exact(psi: &SpinState, jj: RepIndex) -> Result<RationalCharge> {
    charge_exact_capped(psi, jj, DEFAULT_DEGREE_CAP)
}

pub fn charge_exact_capped(psi: &SpinState, jj: RepIndex, degree_cap: usize) -> Result<RationalCharge> {
    let m = psi.len();
    let bound = 2 * m * jj.get() as usize;
    if bound > degree_cap {
        return Err(ChargeError::DegreeCap { degree: bound, cap: degree_cap });
    }
    let (up, down) = top_site_polys(jj)?;
    let site = |s: Spin| match s {
        Spin::Up => &up,
        Spin::Down => &down,
    };
    let n = jj.dim();
    let q = BigInt::from(jj.get() + 1);
    let e = IntPoly::new(vec![&q * &q, BigInt::from(4)]);
    let e_m1 = e.pow(m as u32 - 1);
    let e_m = &e_m1 * &e;

    let v = unit_vector_of(psi, n, &up, &down, &e_m)?;

    let w = w_integer(n);
    let wv = dot(&w, &v);
    if wv.is_zero() {
        return Err(ChargeError::Invariant("w.v vanishes identically".into()));
    }

    let mut u = v.clone();
    let mut acc_re = IntPoly::zero();
    let mut acc_im = IntPoly::zero();
    for &s in psi.sites() {
        let sp = site(s);
        acc_re = &(&acc_re * &e) + &dot(&w, &sp.g_re.apply(&u));
        acc_im = &(&acc_im * &e) + &dot(&w, &sp.g_im.apply(&u));
        u = sp.block.apply(&u);
    }

    let mm = BigInt::from(m);
    let wv_e = &e_m1 * &wv;
    if acc_re != wv_e.scale(&(BigInt::from(2) * &mm)) {
        return Err(ChargeError::Invariant("real part of the charge does not cancel".into()));
    }
    let numerator = &acc_im + &wv_e.scale(&(&mm * &q));
    let denominator = (&e_m * &wv).scale(&mm);

    let rc = reduce(jj, m, numerator, denominator)?;
    let den_deg = 2 * rc.denominator.degree().unwrap_or(0);
    if den_deg > bound {
        return Err(ChargeError::Invariant(format!(
            "denominator degree {den_deg} exceeds 2 M jj = {bound}"
        )));
    }
    Ok(rc)
}

fn reduce(jj: RepIndex, psi_len: usize, numerator: IntPoly, denominator: IntPoly) -> Result<RationalCharge> {
    if numerator.is_zero() {
        return Ok(RationalCharge {
            jj,
            psi_len,
            prefactor: BigRational::zero(),
            numerator: IntPoly::zero(),
            denominator: IntPoly::one(),
        });
    }
    let g = numerator.gcd_int(&denominator);
    let num = numerator.exact_divide_int(&g)?;
    let den = denominator.exact_divide_int(&g)?;
    let cn = num.content();
    let mut cd = den.content();
    if den.leading().is_some_and(|c| c.is_negative()) {
        cd = -cd;
    }
    Ok(RationalCharge {
        jj,
        psi_len,
        prefactor: BigRational::new(cn.clone(), cd.clone()),
        numerator: num.div_scalar(&cn)?,
        denominator: den.div_scalar(&cd)?,
    })
}

impl RationalCharge {
    pub fn numerator_mu(&self) -> IntPoly {
        self.numerator.expand_even()
    }

    pub fn denominator_mu(&self) -> IntPoly {
        self.denominator.expand_even()
    }

    /// Degree of the denominator in `μ`.
    pub fn denominator_degree(&self) -> usize {
        2 * self.denominator.degree().unwrap_or(0)
    }

    /// `π X(μ)` at a rational point.
    pub fn eval_times_pi(&self, mu: &BigRational) -> BigRational {
        let t = mu * mu;
        let to_rat = |p: &IntPoly| p.map(|c| BigRational::from_integer(c.clone())).eval(&t);
        &self.prefactor * to_rat(&self.numerator) / to_rat(&self.denominator)
    }

    /// Coefficient `c` of the large-`μ` behaviour `X ~ c / (π μ²)`.
    pub fn leading_coefficient(&self) -> Result<BigRational> {
        let dn = self.numerator.degree().map_or(i64::MIN / 4, |d| d as i64);
        let dd = self.denominator.degree().unwrap_or(0) as i64;
        let gap = 2 * (dd - dn);
        if gap != 2 {
            return Err(ChargeError::DegreeGap(gap));
        }
        let ln = BigRational::from_integer(self.numerator.leading().expect("nonzero").clone());
        let ld = BigRational::from_integer(self.denominator.leading().expect("nonzero").clone());
        Ok(&self.prefactor * ln / ld)
    }

    pub fn evaluator(&self) -> RationalEvaluator {
        let bits = self.numerator.max_bits().max(self.denominator.max_bits());
        let shift = bits.saturating_sub(900);
        RationalEvaluator {
            scale: self.prefactor.to_f64().unwrap_or(f64::NAN) / std::f64::consts::PI,
            num: self.numerator.to_f64_shifted(shift),
            den: self.denominator.to_f64_shifted(shift),
        }
    }

    pub fn eval_f64(&self, mu: f64) -> f64 {
        self.evaluator().eval(mu)
    }

    pub fn eval_complex(&self, mu: Complex64) -> Complex64 {
        self.evaluator().eval_complex(mu)
    }

    pub fn to_json(&self) -> RationalChargeJson {
        let strings = |p: &IntPoly| p.coeffs().iter().map(|c| c.to_string()).collect();
        RationalChargeJson {
            schema: JSON_SCHEMA.to_string(),
            jj: self.jj.get(),
            psi_len: self.psi_len,
            prefactor_num: self.prefactor.numer().to_string(),
            prefactor_den: self.prefactor.denom().to_string(),
            numerator: strings(&self.numerator),
            denominator: strings(&self.denominator),
        }
    }

    pub fn from_json(j: &RationalChargeJson) -> Result<Self> {
        if j.schema != JSON_SCHEMA {
            return Err(ChargeError::Parse(format!("unknown schema {}", j.schema)));
        }
        let int = |s: &str| BigInt::from_str(s).map_err(|e| ChargeError::Parse(format!("{s}: {e}")));
        let poly = |v: &[String]| -> Result<IntPoly> {
            Ok(IntPoly::new(v.iter().map(|s| int(s)).collect::<Result<_>>()?))
        };
        let den = int(&j.prefactor_den)?;
        if den.is_zero() {
            return Err(ChargeError::Parse("zero prefactor denominator".into()));
        }
        Ok(RationalCharge {
            jj: RepIndex::new(j.jj)?,
            psi_len: j.psi_len,
            prefactor: BigRational::new(int(&j.prefactor_num)?, den),
            numerator: poly(&j.numerator)?,
            denominator: poly(&j.denominator)?,
        })
    }
}

impl fmt::Display for RationalCharge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})/pi * ({}) / ({})",
            self.prefactor,
            self.numerator_mu(),
            self.denominator_mu()
        )
    }
}

/// JSON form with arbitrary-precision integers as decimal strings and
/// coefficients of ascending even powers of `μ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalChargeJson {
    pub schema: String,
    pub jj: u32,
    pub psi_len: usize,
    pub prefactor_num: String,
    pub prefactor_den: String,
    pub numerator: Vec<String>,
    pub denominator: Vec<String>,
}

/// Floating-point evaluation of a `RationalCharge`.
#[derive(Clone, Debug)]
pub struct RationalEvaluator {
    scale: f64,
    num: Vec<f64>,
    den: Vec<f64>,
}

fn horner<T>(c: &[f64], t: T) -> T
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Add<f64, Output = T> + From<f64>,
{
    c.iter().rev().fold(T::from(0.0), |acc, &a| acc * t + a)
}

fn horner_rev<T>(c: &[f64], s: T) -> T
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Add<f64, Output = T> + From<f64>,
{
    c.iter().fold(T::from(0.0), |acc, &a| acc * s + a)
}

impl RationalEvaluator {
    pub fn eval(&self, mu: f64) -> f64 {
        let t = mu * mu;
        if t <= 1.0 {
            self.scale * horner(&self.num, t) / horner(&self.den, t)
        } else {
            let s = 1.0 / t;
            let gap = self.den.len() as i32 - self.num.len() as i32;
            self.scale * horner_rev(&self.num, s) / horner_rev(&self.den, s) * s.powi(gap)
        }
    }

    pub fn eval_complex(&self, mu: Complex64) -> Complex64 {
        let t = mu * mu;
        if t.norm() <= 1.0 {
            horner(&self.num, t) / horner(&self.den, t) * self.scale
        } else {
            let s = t.inv();
            let gap = self.den.len() as i32 - self.num.len() as i32;
            horner_rev(&self.num, s) / horner_rev(&self.den, s) * s.powi(gap) * self.scale
        }
    }

    /// Denominator coefficients in `t` (common scale with the numerator).
    pub fn denominator(&self) -> &[f64] {
        &self.den
    }
}
