//! Simultaneous polynomial root finding (Aberth-Ehrlich) in `f64`.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

use crate::error::{ChargeError, Result};

const MAX_ITER: usize = 1000;

/// `p(z) / p'(z)` without overflow for large `|z|`.
fn newton_ratio(c: &[f64], z: Complex64) -> Complex64 {
    let n = c.len() - 1;
    if z.norm() <= 1.0 {
        let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &a in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        p / dp
    } else {
        // q(s) = s^n p(1/s)
        let s = z.inv();
        let (mut q, mut dq) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &a in c {
            dq = dq * s + q;
            q = q * s + a;
        }
        (s * (n as f64 - s * dq / q)).inv()
    }
}

/// `|p(z)| / Σ |a_k| |z|^k`, the normwise backward error at `z`.
pub fn backward_error(c: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    if r <= 1.0 {
        let (mut p, mut m) = (Complex64::new(0.0, 0.0), 0.0);
        for &a in c.iter().rev() {
            p = p * z + a;
            m = m * r + a.abs();
        }
        p.norm() / m
    } else {
        let s = z.inv();
        let (mut q, mut m) = (Complex64::new(0.0, 0.0), 0.0);
        for &a in c {
            q = q * s + a;
            m = m / r + a.abs();
        }
        q.norm() / m
    }
}

/// All roots of `Σ c_k z^k` with their final backward errors.
pub fn aberth(c: &[f64], tol: f64) -> Result<Vec<(Complex64, f64)>> {
    let mut c = c.to_vec();
    while c.last() == Some(&0.0) {
        c.pop();
    }
    if c.len() < 2 {
        return Ok(Vec::new());
    }
    let zeros_at_origin = c.iter().take_while(|&&a| a == 0.0).count();
    let c: Vec<f64> = c[zeros_at_origin..].to_vec();
    let n = c.len() - 1;
    let mut out: Vec<(Complex64, f64)> = vec![(Complex64::new(0.0, 0.0), 0.0); zeros_at_origin];
    if n == 0 {
        return Ok(out);
    }

    let radius = (c[0].abs() / c[n].abs()).powf(1.0 / n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let ratio = newton_ratio(&c, z[i]);
            let sum: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if step.is_finite() {
                z[i] -= step;
            }
            if !step.is_finite() || step.norm() <= 1e-15 * z[i].norm().max(1e-300) {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let step = newton_ratio(&c, *zi);
            let cand = *zi - step;
            if cand.is_finite() && backward_error(&c, cand) <= backward_error(&c, *zi) {
                *zi = cand;
            }
        }
    }
    let mut worst = 0.0f64;
    for &zi in &z {
        let e = backward_error(&c, zi);
        worst = worst.max(e);
        out.push((zi, e));
    }
    if worst > tol || !worst.is_finite() {
        return Err(ChargeError::RootFinder { residual: worst });
    }
    Ok(out)
}

/// Fixed-point complex number `(re + i im) / 2^bits`.
#[derive(Clone)]
struct Fixed {
    re: BigInt,
    im: BigInt,
}

fn to_fixed(z: Complex64, bits: u32) -> Fixed {
    let s = 2f64.powi(bits as i32);
    let conv = |x: f64| BigInt::from_f64(x * s).unwrap_or_default();
    Fixed { re: conv(z.re), im: conv(z.im) }
}

fn from_fixed(z: &Fixed, bits: u32) -> Complex64 {
    let s = 2f64.powi(-(bits as i32));
    let conv = |x: &BigInt| x.to_f64().unwrap_or(f64::NAN) * s;
    Complex64::new(conv(&z.re), conv(&z.im))
}

/// Newton refinement of a simple root of an integer polynomial in
/// `bits`-bit fixed-point arithmetic; stops once steps stop shrinking.
pub fn polish_integer_root(coeffs: &[BigInt], z: Complex64, bits: u32, iterations: usize) -> Complex64 {
    if coeffs.len() < 2 || !z.is_finite() {
        return z;
    }
    let mut t = to_fixed(z, bits);
    let mut last_step: Option<BigUint> = None;
    for _ in 0..iterations {
        let (mut p, mut dp) = (Fixed { re: BigInt::zero(), im: BigInt::zero() }, Fixed { re: BigInt::zero(), im: BigInt::zero() });
        for c in coeffs.iter().rev() {
            dp = Fixed {
                re: ((&dp.re * &t.re - &dp.im * &t.im) >> bits) + &p.re,
                im: ((&dp.re * &t.im + &dp.im * &t.re) >> bits) + &p.im,
            };
            p = Fixed {
                re: ((&p.re * &t.re - &p.im * &t.im) >> bits) + (c << bits),
                im: (&p.re * &t.im + &p.im * &t.re) >> bits,
            };
        }
        let den = &dp.re * &dp.re + &dp.im * &dp.im;
        if den.is_zero() {
            break;
        }
        let num_re = &p.re * &dp.re + &p.im * &dp.im;
        let num_im = &p.im * &dp.re - &p.re * &dp.im;
        let step = Fixed { re: (num_re << bits) / &den, im: (num_im << bits) / &den };
        let size = step.re.magnitude().max(step.im.magnitude()).clone();
        if last_step.as_ref().is_some_and(|prev| &size >= prev) {
            break;
        }
        t = Fixed { re: &t.re - &step.re, im: &t.im - &step.im };
        if size.is_zero() {
            break;
        }
        last_step = Some(size);
    }
    from_fixed(&t, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn quadratic() {
        let r = sorted(aberth(&[1.0, 0.0, 1.0], 1e-12).unwrap().into_iter().map(|x| x.0).collect());
        assert!((r[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn wilkinson_like() {
        let roots: Vec<f64> = (1..=12).map(|k| k as f64).collect();
        let mut c = vec![1.0];
        for r in &roots {
            let mut next = vec![0.0; c.len() + 1];
            for (k, a) in c.iter().enumerate() {
                next[k] -= r * a;
                next[k + 1] += a;
            }
            c = next;
        }
        let found = sorted(aberth(&c, 1e-12).unwrap().into_iter().map(|x| x.0).collect());
        for (f, r) in found.iter().zip(&roots) {
            assert!((f - r).norm() < 1e-6, "{f} vs {r}");
        }
    }

    #[test]
    fn huge_coefficients() {
        // (t + 1e40)(t + 1)
        let c = [1e40, 1e40 + 1.0, 1.0];
        let r = sorted(aberth(&c, 1e-12).unwrap().into_iter().map(|x| x.0).collect());
        assert!((r[0].re / -1e40 - 1.0).abs() < 1e-12);
        assert!((r[1].re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn polishing_recovers_digits() {
        // t^2 - 2
        let c = [BigInt::from(-2), BigInt::from(0), BigInt::from(1)];
        let z = polish_integer_root(&c, Complex64::new(1.4142, 1e-6), 256, 20);
        assert!((z - Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-16);
    }

    #[test]
    fn root_at_origin() {
        let r = aberth(&[0.0, -1.0, 1.0], 1e-12).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().any(|x| x.0.norm() == 0.0));
        assert!(r.iter().any(|x| (x.0.re - 1.0).abs() < 1e-14));
    }
}
