//! Dense univariate polynomials with ascending coefficients.
//!
//! `Poly<T>` works over any commutative ring; field coefficients add
//! division and monic gcd, and `IntPoly` adds content, primitive parts and a
//! modular gcd.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{ChargeError, Result};
use crate::scalar::GaussRational;

pub trait Ring:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + fmt::Debug
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

/// Exact fields.
pub trait Field: Ring + std::ops::Div<Output = Self> {}

impl Field for BigRational {}
impl Field for GaussRational {}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

pub type GaussPoly = Poly<GaussRational>;
pub type RatPoly = Poly<BigRational>;
pub type IntPoly = Poly<BigInt>;

impl<T: Ring> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    /// `c · μ^k`.
    pub fn monomial(c: T, k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    /// `a + b μ`.
    pub fn linear(a: T, b: T) -> Self {
        Poly::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// `None` stands for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// Multiply by `μ^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![T::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut out = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        out
    }

    /// `p(μ) ↦ p(t)` with `t = μ²`; `None` if an odd coefficient is nonzero.
    pub fn compress_even(&self) -> Option<Self> {
        if self.coeffs.iter().skip(1).step_by(2).any(|c| !c.is_zero()) {
            return None;
        }
        Some(Poly::new(self.coeffs.iter().step_by(2).cloned().collect()))
    }

    /// `p(t) ↦ p(μ²)`.
    pub fn expand_even(&self) -> Self {
        let mut coeffs = Vec::with_capacity(2 * self.coeffs.len());
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                coeffs.push(T::zero());
            }
            coeffs.push(c.clone());
        }
        Poly::new(coeffs)
    }

    /// Even and odd parts in `μ`.
    pub fn split_parity(&self) -> (Self, Self) {
        let pick = |parity: usize| {
            Poly::new(
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| if k % 2 == parity { c.clone() } else { T::zero() })
                    .collect(),
            )
        };
        (pick(0), pick(1))
    }

    pub fn map<U: Ring>(&self, f: impl FnMut(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}

impl<T: Ring + FromPrimitive> Poly<T> {
    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * T::from_usize(k).expect("degree fits the coefficient type"))
                .collect(),
        )
    }
}

impl<T: Ring> Add<&Poly<T>> for &Poly<T> {
    type Output = Poly<T>;

    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Ring> Sub<&Poly<T>> for &Poly<T> {
    type Output = Poly<T>;

    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Ring> Mul<&Poly<T>> for &Poly<T> {
    type Output = Poly<T>;

    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

impl<T: Ring> Neg for &Poly<T> {
    type Output = Poly<T>;

    fn neg(self) -> Poly<T> {
        Poly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl<T: Ring> $tr for Poly<T> {
            type Output = Poly<T>;
            fn $f(self, rhs: Poly<T>) -> Poly<T> {
                (&self).$f(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl<T: Ring> Neg for Poly<T> {
    type Output = Poly<T>;

    fn neg(self) -> Poly<T> {
        -&self
    }
}

impl<T: Ring> Zero for Poly<T> {
    fn zero() -> Self {
        Poly::zero()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<T: Ring> One for Poly<T> {
    fn one() -> Self {
        Poly::one()
    }
}

impl<T: Field> Poly<T> {
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Poly::zero(),
            Some(lc) => {
                let inv = T::one() / lc.clone();
                self.scale(&inv)
            }
        }
    }

    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor
            .degree()
            .ok_or_else(|| ChargeError::InvalidInput("division by the zero polynomial".into()))?;
        let lc = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![T::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let q = rem[rem.len() - 1].clone() / lc.clone();
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].clone() - q.clone() * d.clone();
            }
            quot[k] = q;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    pub fn exact_divide(&self, divisor: &Self) -> Result<Self> {
        let (q, r) = self.div_rem(divisor)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(ChargeError::NotDivisible)
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).expect("divisor is nonzero").1;
            a = b;
            b = r;
        }
        a.monic()
    }
}

impl IntPoly {
    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Nonnegative gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Content-free part with a positive leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = self.content();
        if self.leading().is_some_and(|lc| lc.is_negative()) {
            c = -c;
        }
        self.div_scalar(&c).expect("content divides every coefficient")
    }

    pub fn div_scalar(&self, s: &BigInt) -> Result<Self> {
        self.coeffs
            .iter()
            .map(|c| {
                let (q, r) = c.div_rem(s);
                if r.is_zero() {
                    Ok(q)
                } else {
                    Err(ChargeError::NotDivisible)
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Poly::new)
    }

    /// Division in `Z[μ]`, failing unless the quotient has integer coefficients
    /// and the remainder vanishes.
    pub fn exact_divide_int(&self, divisor: &Self) -> Result<Self> {
        let dd = divisor
            .degree()
            .ok_or_else(|| ChargeError::InvalidInput("division by the zero polynomial".into()))?;
        let lc = &divisor.coeffs[dd];
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(top) = rem.last() {
            if rem.len() <= dd {
                return Err(ChargeError::NotDivisible);
            }
            let (q, r) = top.div_rem(lc);
            if !r.is_zero() {
                return Err(ChargeError::NotDivisible);
            }
            let k = rem.len() - 1 - dd;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &q * d;
            }
            quot[k] = q;
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        Ok(Poly::new(quot))
    }

    /// Greatest common divisor in `Z[μ]`, normalized to a positive leading
    /// coefficient. Uses modular images over word-size primes combined by
    /// the Chinese remainder theorem and certified by trial division.
    pub fn gcd_int(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.abs_normalized();
        }
        if other.is_zero() {
            return self.abs_normalized();
        }
        let content = self.content().gcd(&other.content());
        let a = self.primitive_part();
        let b = other.primitive_part();
        if a.degree() == Some(0) || b.degree() == Some(0) {
            return Poly::constant(content);
        }
        let lc_a = a.leading().expect("nonzero").clone();
        let lc_b = b.leading().expect("nonzero").clone();
        let lc_g = lc_a.gcd(&lc_b);

        let mut best_deg = usize::MAX;
        let mut modulus = BigInt::one();
        let mut image: Vec<BigInt> = Vec::new();
        let mut previous: Option<IntPoly> = None;
        for p in primes_below(1 << 31) {
            let pb = BigInt::from(p);
            if (&lc_a % &pb).is_zero() || (&lc_b % &pb).is_zero() {
                continue;
            }
            let ap = reduce_mod(&a, p);
            let bp = reduce_mod(&b, p);
            let gp = gcd_mod(ap, bp, p);
            let deg = gp.len() - 1;
            if deg == 0 {
                return Poly::constant(content);
            }
            if deg > best_deg {
                continue;
            }
            let scale = mod_u64(&lc_g, p);
            let gp: Vec<u64> = gp.iter().map(|&c| c * scale % p).collect();
            if deg < best_deg {
                best_deg = deg;
                modulus = pb;
                image = gp.iter().map(|&c| BigInt::from(c)).collect();
                previous = None;
                continue;
            }
            crt_combine(&mut image, &modulus, &gp, p);
            modulus *= &pb;
            let half = &modulus >> 1;
            let candidate = Poly::new(
                image
                    .iter()
                    .map(|c| if c > &half { c - &modulus } else { c.clone() })
                    .collect(),
            )
            .primitive_part();
            if previous.as_ref() == Some(&candidate)
                && a.exact_divide_int(&candidate).is_ok()
                && b.exact_divide_int(&candidate).is_ok()
            {
                return candidate.scale(&content);
            }
            previous = Some(candidate);
        }
        unreachable!("prime supply exhausted before the gcd stabilized")
    }

    fn abs_normalized(&self) -> Self {
        if self.leading().is_some_and(|lc| lc.is_negative()) {
            -self
        } else {
            self.clone()
        }
    }

    pub fn max_coeff_digits(&self) -> usize {
        self.coeffs
            .iter()
            .map(|c| c.magnitude().to_string().len())
            .max()
            .unwrap_or(0)
    }

    pub fn max_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0)
    }

    /// Coefficients as `f64` after a right shift by `shift` bits.
    pub fn to_f64_shifted(&self, shift: u64) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| {
                let (sign, mag) = (c.sign(), c.magnitude());
                let v = if shift == 0 {
                    mag.to_f64().unwrap_or(f64::INFINITY)
                } else {
                    let bits = mag.bits();
                    if bits <= shift {
                        mag.to_f64().unwrap_or(0.0) * 2f64.powi(-(shift.min(1074) as i32))
                    } else {
                        (mag >> shift).to_f64().unwrap_or(f64::INFINITY)
                    }
                };
                if sign == Sign::Minus {
                    -v
                } else {
                    v
                }
            })
            .collect()
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match k {
                0 => write!(f, "{mag}")?,
                _ if mag.is_one() => {}
                _ => write!(f, "{mag}*")?,
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

fn mod_u64(c: &BigInt, p: u64) -> u64 {
    c.mod_floor(&BigInt::from(p)).to_u64().expect("residue below p")
}

fn reduce_mod(a: &IntPoly, p: u64) -> Vec<u64> {
    let mut v: Vec<u64> = a.coeffs.iter().map(|c| mod_u64(c, p)).collect();
    trim_mod(&mut v);
    v
}

fn trim_mod(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Monic gcd over `F_p`; inputs are nonzero.
fn gcd_mod(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    while !b.is_empty() {
        let inv = inv_mod(*b.last().expect("nonempty"), p);
        let db = b.len() - 1;
        while a.len() > db && !a.is_empty() {
            let q = a[a.len() - 1] * inv % p;
            let k = a.len() - 1 - db;
            for (j, &bj) in b.iter().enumerate() {
                a[k + j] = (a[k + j] + p - q * bj % p) % p;
            }
            trim_mod(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    let inv = inv_mod(*a.last().expect("gcd of nonzero inputs"), p);
    a.iter().map(|&c| c * inv % p).collect()
}

fn crt_combine(image: &mut [BigInt], modulus: &BigInt, residues: &[u64], p: u64) {
    let m_inv = inv_mod(mod_u64(modulus, p), p);
    for (h, &r) in image.iter_mut().zip(residues) {
        let hp = mod_u64(h, p);
        let t = (r + p - hp) % p * m_inv % p;
        *h += modulus * BigInt::from(t);
    }
}

fn primes_below(start: u64) -> impl Iterator<Item = u64> {
    (3..start).rev().step_by(2).filter(|&n| is_prime(n))
}

/// Deterministic Miller-Rabin for `n < 2^32`.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2, 3, 5, 7, 61] {
        if n % q == 0 {
            return n == q;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2, 7, 61] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = x * x % n;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
