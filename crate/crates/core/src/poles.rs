//! Poles of exact charges: location, Physical Strip classification, the
//! jj = 1 hyperbola and curve laws, Jordan-block confirmation and pole
//! density.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ChargeError, Result};
use crate::exact::RationalCharge;
use crate::monodromy::monodromy;
use crate::output::fmt_num;
use crate::roots::{aberth, polish_integer_root};
use crate::spin_algebra::{w_vector, RepIndex};
use crate::state::SpinState;

pub const ROOT_TOL: f64 = 1e-10;
pub const CLUSTER_TOL: f64 = 1e-7;
pub const STRIP_MARGIN: f64 = 1e-9;
pub const JORDAN_TOL: f64 = 1e-8;
const POLISH_BITS: u32 = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct PoleSet {
    /// Distinct poles in `μ`.
    pub roots: Vec<Complex64>,
    pub multiplicities: Vec<usize>,
    /// Worst normwise backward error of the denominator roots in `t`.
    pub residual: f64,
    pub jj: RepIndex,
    pub psi_len: usize,
}

impl PoleSet {
    /// Roots counted with multiplicity.
    pub fn total(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn upper_half(&self) -> impl Iterator<Item = &Complex64> {
        self.roots.iter().filter(|z| z.im > 0.0)
    }
}

/// Roots of a real polynomial in `t`, merged into clusters of relative width
/// `CLUSTER_TOL`; returns cluster centres with sizes.
fn clustered_roots(coeffs: &[f64]) -> Result<(Vec<(Complex64, usize)>, f64)> {
    let roots = aberth(coeffs, ROOT_TOL)?;
    let residual = roots.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for (t, _) in roots {
        match clusters
            .iter_mut()
            .find(|(c, _)| (c - t).norm() <= CLUSTER_TOL * c.norm().max(t.norm()).max(1e-300))
        {
            Some((c, k)) => {
                *c = (*c * *k as f64 + t) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => clusters.push((t, 1)),
        }
    }
    Ok((clusters, residual))
}

pub fn find_poles(rc: &RationalCharge) -> Result<PoleSet> {
    if rc.denominator.degree().unwrap_or(0) == 0 {
        return Err(ChargeError::InvalidInput("denominator is constant".into()));
    }
    let den = rc.evaluator().denominator().to_vec();
    let (clusters, residual) = clustered_roots(&den)?;
    let mut roots = Vec::new();
    let mut multiplicities = Vec::new();
    for (t, k) in clusters {
        let t = if k == 1 { polish_integer_root(rc.denominator.coeffs(), t, POLISH_BITS, 12) } else { t };
        let mu = t.sqrt();
        if mu.norm() == 0.0 {
            roots.push(mu);
            multiplicities.push(2 * k);
        } else {
            roots.extend([mu, -mu]);
            multiplicities.extend([k, k]);
        }
    }
    Ok(PoleSet { roots, multiplicities, residual, jj: rc.jj, psi_len: rc.psi_len })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StripReport {
    pub inside: Vec<(f64, f64)>,
    /// Smallest `|Im μ|` over all poles.
    pub min_distance: f64,
}

pub fn classify_physical_strip(ps: &PoleSet) -> StripReport {
    classify_roots(&ps.roots)
}

pub fn classify_roots(roots: &[Complex64]) -> StripReport {
    StripReport {
        inside: roots
            .iter()
            .filter(|z| z.im.abs() < 0.5 - STRIP_MARGIN)
            .map(|z| (z.re, z.im))
            .collect(),
        min_distance: roots.iter().map(|z| z.im.abs()).fold(f64::INFINITY, f64::min),
    }
}

/// `|Im(μ)² − Re(μ)² − 1/2|`.
pub fn hyperbola_residual(mu: Complex64) -> f64 {
    (mu.im * mu.im - mu.re * mu.re - 0.5).abs()
}

pub fn hyperbola_check(ps: &PoleSet) -> Result<f64> {
    if ps.jj.get() != 1 {
        return Err(ChargeError::WrongRepresentation("hyperbola_check"));
    }
    Ok(ps.roots.iter().map(|&z| hyperbola_residual(z)).fold(0.0, f64::max))
}

/// Solutions of `(μ²/(μ²+1))^M = 1`: `μ²_k = (i/2) cot(πk/M) − 1/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSolutions {
    pub k: Vec<usize>,
    pub mu_sq: Vec<Complex64>,
    /// Principal square roots followed by their negatives.
    pub mu: Vec<Complex64>,
}

impl CurveSolutions {
    /// The root of each `μ²_k` with `Im μ > 0`.
    pub fn upper_branch(&self) -> Vec<Complex64> {
        self.mu_sq
            .iter()
            .map(|t| {
                let r = t.sqrt();
                if r.im < 0.0 {
                    -r
                } else {
                    r
                }
            })
            .collect()
    }

    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.mu.iter().map(|m| (m - z).norm()).fold(f64::INFINITY, f64::min)
    }
}

pub fn curve_solutions(m: usize) -> Result<CurveSolutions> {
    if m < 2 {
        return Err(ChargeError::InvalidInput("curve solutions need M >= 2".into()));
    }
    let k: Vec<usize> = (1..m).collect();
    let mu_sq: Vec<Complex64> = k
        .iter()
        .map(|&k| {
            let theta = PI * k as f64 / m as f64;
            Complex64::new(-0.5, 0.5 * theta.cos() / theta.sin())
        })
        .collect();
    let principal: Vec<Complex64> = mu_sq.iter().map(|t| t.sqrt()).collect();
    let mu = principal.iter().copied().chain(principal.iter().map(|z| -z)).collect();
    Ok(CurveSolutions { k, mu_sq, mu })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JordanReport {
    /// Singular values of `M − I`, ascending.
    pub sv_first: Vec<f64>,
    /// Singular values of `(M − I)²`, ascending.
    pub sv_second: Vec<f64>,
    /// `|w·v| / (‖w‖ ‖v‖)` with `v` spanning the numerical kernel of `M − I`.
    pub overlap: f64,
}

/// Confirms that `μ` is a point where the unit eigenvalue of the monodromy
/// sits in a two-dimensional Jordan block.
pub fn jordan_check(psi: &SpinState, jj: RepIndex, pole: Complex64) -> Result<JordanReport> {
    let m = monodromy(psi, jj, pole)?;
    let n = m.rows();
    let a = m.clone() - crate::matrix::CMat::identity(n);
    let scale = a.norm2().max(1.0);
    let asc = |mut v: Vec<f64>| {
        v.reverse();
        v
    };
    let sv1 = asc(a.singular_values());
    let sv2 = asc(a.matmul(&a).singular_values());

    let svd = a.to_nalgebra().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let v: Vec<Complex64> = (0..n).map(|j| v_t[(imin, j)].conj()).collect();
    let w: Vec<Complex64> = w_vector(jj);
    let wv: Complex64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
    let overlap = wv.norm() / (n as f64).sqrt();

    let report = JordanReport { sv_first: sv1.clone(), sv_second: sv2.clone(), overlap };
    let simple_kernel = n < 2 || sv1[1] > JORDAN_TOL * scale;
    let defect = n >= 2 && sv2[1] <= JORDAN_TOL * scale * scale;
    if !(simple_kernel && defect && overlap <= JORDAN_TOL) {
        return Err(ChargeError::PoleMismatch(format!(
            "sv(M-I) = {sv1:?}, sv((M-I)^2) = {sv2:?}, |w.v| = {overlap:e}"
        )));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityComparison {
    /// `a = Re μ` of the upper-branch curve solutions, ascending.
    pub a: Vec<f64>,
    pub empirical_cdf: Vec<f64>,
    pub analytic_cdf: Vec<f64>,
    /// Kolmogorov distance between the two CDFs.
    pub sup_distance: f64,
    /// Same distance with each solution weighted by `Im μ`.
    pub weighted_sup_distance: f64,
}

/// Normalized CDF of `1/(4a² + 1)`.
pub fn analytic_cdf(a: f64) -> f64 {
    0.5 + (2.0 * a).atan() / PI
}

pub fn pole_density_compare(m: usize) -> Result<DensityComparison> {
    let cs = curve_solutions(m)?;
    let mut pts: Vec<(f64, f64)> = cs.upper_branch().iter().map(|z| (z.re, z.im)).collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = pts.len() as f64;
    let total_w: f64 = pts.iter().map(|p| p.1).sum();
    let (mut sup, mut wsup, mut cum_w) = (0.0f64, 0.0f64, 0.0);
    let mut a = Vec::with_capacity(pts.len());
    let mut emp = Vec::with_capacity(pts.len());
    let mut ana = Vec::with_capacity(pts.len());
    for (i, &(x, w)) in pts.iter().enumerate() {
        let f = analytic_cdf(x);
        sup = sup.max((i as f64 / n - f).abs()).max(((i + 1) as f64 / n - f).abs());
        wsup = wsup.max((cum_w / total_w - f).abs());
        cum_w += w;
        wsup = wsup.max((cum_w / total_w - f).abs());
        a.push(x);
        emp.push((i + 1) as f64 / n);
        ana.push(f);
    }
    Ok(DensityComparison {
        a,
        empirical_cdf: emp,
        analytic_cdf: ana,
        sup_distance: sup,
        weighted_sup_distance: wsup,
    })
}

/// `c_n = lim (μ − μ_n) X(μ)` at simple poles (diagnostic only).
pub fn residues(rc: &RationalCharge, ps: &PoleSet) -> Vec<Option<Complex64>> {
    let ev = rc.evaluator();
    ps.roots
        .iter()
        .zip(&ps.multiplicities)
        .map(|(&z, &k)| {
            if k != 1 {
                return None;
            }
            let h = 1e-6 * z.norm().max(1.0);
            let probe = |d: Complex64| d * ev.eval_complex(z + d);
            let r = (probe(Complex64::new(h, 0.0)) + probe(Complex64::new(-h, 0.0))) * 0.5;
            Some(r)
        })
        .collect()
}

/// CSV rows `re_mu, im_mu, multiplicity, on_hyperbola_residual`.
pub fn write_poles_csv<W: Write>(ps: &PoleSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["re_mu", "im_mu", "multiplicity", "on_hyperbola_residual"])?;
    for (&z, &k) in ps.roots.iter().zip(&ps.multiplicities) {
        w.write_record([fmt_num(z.re), fmt_num(z.im), k.to_string(), fmt_num(hyperbola_residual(z))])?;
    }
    w.flush()?;
    Ok(())
}
