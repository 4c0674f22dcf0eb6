//! Numeric charge pipeline on the zero-magnetization sector.
//!
//! `M(μ, x) = 𝕃^{ψ(M)} ⋯ 𝕃^{ψ(1)}` (site 1 rightmost), its `x`-derivative
//! at `x = μ`, the unit right eigenvector `v`, the fixed left eigenvector
//! `w`, and `X = δ / (2πi M)` with `δ = (w ∂M v) / (w v)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ChargeError, Result};
use crate::lax::{norm_factor, LaxStructure, SpectralPoint, Spin, TopSectorSite};
use crate::matrix::{CMat, Mat};
use crate::spin_algebra::{top_sector, w_vector, RepIndex, SpinOperators};
use crate::state::SpinState;

/// Second-smallest singular value of `M − I` below this times `‖M‖`
/// means the eigenvalue-1 eigenspace is not one-dimensional.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// `|w·v| / (‖w‖‖v‖)` below this is treated as a pole of the charge.
pub const POLE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct MonodromyData {
    pub jj: RepIndex,
    pub matrix: CMat,
    pub derivative: CMat,
    pub v: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub delta: Complex64,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Top-sector monodromy at `x = μ`.
pub fn monodromy(psi: &SpinState, jj: RepIndex, mu: Complex64) -> Result<CMat> {
    let site = TopSectorSite::new(jj, mu)?;
    let mut m = Mat::identity(jj.dim());
    for &s in psi.sites() {
        m = site.block(s).0.matmul(&m);
    }
    Ok(m)
}

/// Top-sector monodromy at a general point `(μ, x)`.
pub fn monodromy_at(psi: &SpinState, jj: RepIndex, p: SpectralPoint) -> Result<CMat> {
    let f = norm_factor(jj, p)?;
    let structure = LaxStructure::<Complex64>::new(&SpinOperators::integer(jj));
    let (t1, t2) = structure.top_diagonal();
    let up = t1.eval(&p.mu, &p.x).scale(&f);
    let down = t2.eval(&p.mu, &p.x).scale(&f);
    let mut m = Mat::identity(jj.dim());
    for &s in psi.sites() {
        m = match s {
            Spin::Up => up.matmul(&m),
            Spin::Down => down.matmul(&m),
        };
    }
    Ok(m)
}

/// Monodromy and its `x`-derivative at `x = μ` (Leibniz sum over sites).
pub fn monodromy_with_derivative(psi: &SpinState, jj: RepIndex, site: &TopSectorSite) -> (CMat, CMat) {
    let n = jj.dim();
    let mut m = Mat::identity(n);
    let mut dm = Mat::zeros(n, n);
    for &s in psi.sites() {
        let (l, dl) = site.block(s);
        dm = l.matmul(&dm) + dl.matmul(&m);
        m = l.matmul(&m);
    }
    (m, dm)
}

pub fn monodromy_derivative(psi: &SpinState, jj: RepIndex, mu: Complex64) -> Result<CMat> {
    let site = TopSectorSite::new(jj, mu)?;
    Ok(monodromy_with_derivative(psi, jj, &site).1)
}

struct NullDirection {
    right: Vec<Complex64>,
    left: Vec<Complex64>,
    second: f64,
    scale: f64,
}

fn null_direction(m: &CMat) -> NullDirection {
    let n = m.rows();
    let a = m.clone() - Mat::identity(n);
    let svd = a.to_nalgebra().svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let s = order[0];
    let second = if n > 1 { svd.singular_values[order[1]] } else { f64::INFINITY };
    let right: Vec<Complex64> = (0..n).map(|k| v_t[(s, k)].conj()).collect();
    // row vector y with y (M − I) ≈ 0
    let left: Vec<Complex64> = (0..n).map(|k| u[(k, s)].conj()).collect();
    NullDirection { right, left, second, scale: m.norm2() }
}

/// Unit 2-norm, first significant component real and positive.
fn fix_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let biggest = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(lead) = v.iter().find(|z| z.norm() > 1e-12 * biggest).copied() {
        let phase = lead.conj() / lead.norm() / norm;
        for z in &mut v {
            *z *= phase;
        }
    }
    v
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit right eigenvector of `m` for eigenvalue 1.
///
/// Fails when the eigenvalue-1 eigenspace is more than one-dimensional, or
/// when the left and right null directions are orthogonal (a Jordan chain),
/// which is where the charge has its poles.
pub fn unit_right_eigenvector(m: &CMat) -> Result<Vec<Complex64>> {
    let nd = null_direction(m);
    if nd.second < DEGENERACY_TOL * nd.scale.max(1.0) {
        return Err(ChargeError::DegenerateEigenspace { second: nd.second });
    }
    let overlap = dot(&nd.left, &nd.right).norm();
    if overlap < POLE_TOL {
        return Err(ChargeError::JordanChain { overlap });
    }
    Ok(fix_phase(nd.right))
}

/// Full monodromy data at `x = μ`.
pub fn monodromy_data(psi: &SpinState, jj: RepIndex, mu: Complex64) -> Result<MonodromyData> {
    let site = TopSectorSite::new(jj, mu)?;
    monodromy_data_with(psi, jj, mu, &site)
}

fn monodromy_data_with(psi: &SpinState, jj: RepIndex, _mu: Complex64, site: &TopSectorSite) -> Result<MonodromyData> {
    let (matrix, derivative) = monodromy_with_derivative(psi, jj, site);
    let nd = null_direction(&matrix);
    if nd.second < DEGENERACY_TOL * nd.scale.max(1.0) {
        return Err(ChargeError::DegenerateEigenspace { second: nd.second });
    }
    let v = fix_phase(nd.right);
    let w: Vec<Complex64> = w_vector(jj);
    let wv = dot(&w, &v);
    let overlap = wv.norm() / (norm(&w) * norm(&v));
    if overlap < POLE_TOL {
        return Err(ChargeError::PoleProximity { overlap });
    }
    let w_dm = derivative.left_apply(&w);
    let delta = dot(&w_dm, &v) / wv;
    Ok(MonodromyData { jj, matrix, derivative, v, w, delta })
}

/// `X_jj(μ) = δ / (2πi M)`.
pub fn charge_numeric(psi: &SpinState, jj: RepIndex, mu: Complex64) -> Result<Complex64> {
    let data = monodromy_data(psi, jj, mu)?;
    Ok(data.delta / (Complex64::new(0.0, 2.0 * PI) * psi.len() as f64))
}

/// Reusable evaluator: the Lax structure is built once and reused over
/// many spectral points.
pub struct ChargeEvaluator {
    jj: RepIndex,
    structure: LaxStructure<Complex64>,
}

impl ChargeEvaluator {
    pub fn new(jj: RepIndex) -> Self {
        ChargeEvaluator { jj, structure: LaxStructure::new(&SpinOperators::integer(jj)) }
    }

    pub fn charge(&self, psi: &SpinState, mu: Complex64) -> Result<Complex64> {
        let site = TopSectorSite::from_structure(&self.structure, mu)?;
        let data = monodromy_data_with(psi, self.jj, mu, &site)?;
        Ok(data.delta / (Complex64::new(0.0, 2.0 * PI) * psi.len() as f64))
    }

    /// Real part at real `μ`; the imaginary part vanishes for simple states.
    pub fn charge_real(&self, psi: &SpinState, mu: f64) -> Result<f64> {
        Ok(self.charge(psi, c(mu))?.re)
    }
}

/// Full-space monodromy `⟨ψ| 𝕃^{(M)} ⋯ 𝕃^{(1)} |ψ⟩` on `V_jj ⊗ V_jj`.
pub fn full_monodromy_at(psi: &SpinState, jj: RepIndex, p: SpectralPoint) -> Result<CMat> {
    let f = norm_factor(jj, p)?;
    let structure = LaxStructure::<Complex64>::new(&SpinOperators::integer(jj));
    let up = structure.b11.eval(&p.mu, &p.x).scale(&f);
    let down = structure.b22.eval(&p.mu, &p.x).scale(&f);
    let n = jj.dim() * jj.dim();
    let mut m = Mat::identity(n);
    for &s in psi.sites() {
        m = match s {
            Spin::Up => up.matmul(&m),
            Spin::Down => down.matmul(&m),
        };
    }
    Ok(m)
}

pub fn matrix_power(m: &CMat, mut k: u64) -> CMat {
    let mut result = Mat::identity(m.rows());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = result.matmul(&base);
        }
        base = base.matmul(&base);
        k >>= 1;
    }
    result
}

fn trace(m: &CMat) -> Complex64 {
    (0..m.rows()).map(|i| *m.get(i, i)).sum()
}

/// Finite-chain oracle
/// `(1 / 2πi N) tr_{V⊗V} ∂_x (M(μ, x))^{N/M}` at `x = μ`, `N = n_over_m · M`,
/// with the `x`-derivative of the matrix power taken by central differences.
pub fn power_limit_oracle(psi: &SpinState, jj: RepIndex, mu: Complex64, n_over_m: u64) -> Result<Complex64> {
    if n_over_m == 0 {
        return Err(ChargeError::InvalidInput("n_over_m must be >= 1".into()));
    }
    let h = 1e-4 / n_over_m as f64;
    let at = |dx: f64| -> Result<Complex64> {
        let m = full_monodromy_at(psi, jj, SpectralPoint::new(mu, mu + dx))?;
        Ok(trace(&matrix_power(&m, n_over_m)))
    };
    let d = (at(h)? - at(-h)?) / (2.0 * h);
    let n = (n_over_m as f64) * psi.len() as f64;
    Ok(d / (Complex64::new(0.0, 2.0 * PI) * n))
}

/// Top-sector flat indices, for callers restricting full-space data.
pub fn top_indices(jj: RepIndex) -> Vec<usize> {
    top_sector(jj).flat()
}
