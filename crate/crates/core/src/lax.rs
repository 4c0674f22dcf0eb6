//! Composite two-channel Lax blocks `𝕃_jj(μ, x)^i_j` on `V_jj ⊗ V_jj`.
//!
//! ```text
//! (𝕃)^1_1 = f ((μ⁻ + i s^z) ⊗ (x⁺ + i s^z) − s^- ⊗ s^+)
//! (𝕃)^2_2 = f ((μ⁻ − i s^z) ⊗ (x⁺ − i s^z) − s^+ ⊗ s^-)
//! (𝕃)^1_2 = f (i μ⁻ ⊗ s^+ + i s^+ ⊗ x⁺ − s^+ ⊗ s^z + s^z ⊗ s^+)
//! (𝕃)^2_1 = f (i μ⁻ ⊗ s^- + i s^- ⊗ x⁺ + s^- ⊗ s^z − s^z ⊗ s^-)
//! ```
//!
//! with `μ⁻ = μ − i/2`, `x⁺ = x + i/2` and
//! `f(μ, x) = [(μ − i(jj+1)/2)(x + i(jj+1)/2)]⁻¹`.
//!
//! Every bare block is bilinear in `(μ, x)`, so it is stored once as four
//! coefficient matrices and evaluated by either backend.

use num_complex::Complex64;

use crate::error::{ChargeError, Result};
use crate::matrix::{CMat, Mat};
use crate::scalar::{GaussRational, LaxScalar};
use crate::spin_algebra::{top_sector, LadderConvention, RepIndex, SpinOperators};

/// Site spin of a simple substate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    pub fn label(self) -> char {
        match self {
            Spin::Up => '1',
            Spin::Down => '2',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint {
    pub mu: Complex64,
    pub x: Complex64,
}

impl SpectralPoint {
    pub fn new(mu: Complex64, x: Complex64) -> Self {
        SpectralPoint { mu, x }
    }

    pub fn diagonal(mu: Complex64) -> Self {
        SpectralPoint { mu, x: mu }
    }

    pub fn real(mu: f64, x: f64) -> Self {
        SpectralPoint { mu: Complex64::new(mu, 0.0), x: Complex64::new(x, 0.0) }
    }
}

/// `c0 + μ c_mu + x c_x + μ x c_mux`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bilinear<S> {
    pub c0: Mat<S>,
    pub c_mu: Mat<S>,
    pub c_x: Mat<S>,
    pub c_mux: Mat<S>,
}

impl<S: LaxScalar> Bilinear<S> {
    /// `(μ + A) ⊗ (x + B) + C`
    fn product(a: &Mat<S>, b: &Mat<S>, c: Mat<S>) -> Self {
        let id = Mat::identity(a.rows());
        Bilinear {
            c0: a.kron(b) + c,
            c_mu: id.kron(b),
            c_x: a.kron(&id),
            c_mux: id.kron(&id),
        }
    }

    pub fn eval(&self, mu: &S, x: &S) -> Mat<S> {
        self.c0.clone()
            + self.c_mu.scale(mu)
            + self.c_x.scale(x)
            + self.c_mux.scale(&(mu.clone() * x.clone()))
    }

    /// `∂_x` of the bare block.
    pub fn eval_dx(&self, mu: &S) -> Mat<S> {
        self.c_x.clone() + self.c_mux.scale(mu)
    }

    pub fn restrict(&self, indices: &[usize]) -> Bilinear<S> {
        Bilinear {
            c0: self.c0.restrict(indices),
            c_mu: self.c_mu.restrict(indices),
            c_x: self.c_x.restrict(indices),
            c_mux: self.c_mux.restrict(indices),
        }
    }
}

/// The four unnormalized blocks as bilinear forms in `(μ, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxStructure<S> {
    pub jj: RepIndex,
    pub b11: Bilinear<S>,
    pub b22: Bilinear<S>,
    pub b12: Bilinear<S>,
    pub b21: Bilinear<S>,
}

impl<S: LaxScalar> LaxStructure<S> {
    pub fn new(ops: &SpinOperators<S>) -> Self {
        let i = S::imag_unit();
        let half_i = i.clone() * S::half();
        let id = ops.identity();
        let shift = |sign: i64| id.scale(&(half_i.clone() * S::from_int(sign)));
        let isz = ops.sz.scale(&i);

        // (μ - i/2 ± i sz) ⊗ (x + i/2 ± i sz)
        let b11 = Bilinear::product(
            &(shift(-1) + isz.clone()),
            &(shift(1) + isz.clone()),
            -ops.sm.kron(&ops.sp),
        );
        let b22 = Bilinear::product(
            &(shift(-1) - isz.clone()),
            &(shift(1) - isz),
            -ops.sp.kron(&ops.sm),
        );

        let off = |s: &Mat<S>, sign: i64| {
            let sign = S::from_int(sign);
            Bilinear {
                // i μ⁻ ⊗ s = i μ (1 ⊗ s) + 1/2 (1 ⊗ s); i s ⊗ x⁺ = i x (s ⊗ 1) − 1/2 (s ⊗ 1)
                c0: id.kron(s).scale(&S::half()) - s.kron(&id).scale(&S::half())
                    + (s.kron(&ops.sz) - ops.sz.kron(s)).scale(&sign),
                c_mu: id.kron(s).scale(&i),
                c_x: s.kron(&id).scale(&i),
                c_mux: Mat::zeros(id.rows() * id.rows(), id.rows() * id.rows()),
            }
        };
        let b12 = off(&ops.sp, -1);
        let b21 = off(&ops.sm, 1);
        LaxStructure { jj: ops.jj, b11, b22, b12, b21 }
    }

    pub fn diagonal(&self, spin: Spin) -> &Bilinear<S> {
        match spin {
            Spin::Up => &self.b11,
            Spin::Down => &self.b22,
        }
    }

    pub fn block(&self, row: Spin, col: Spin) -> &Bilinear<S> {
        match (row, col) {
            (Spin::Up, Spin::Up) => &self.b11,
            (Spin::Down, Spin::Down) => &self.b22,
            (Spin::Up, Spin::Down) => &self.b12,
            (Spin::Down, Spin::Up) => &self.b21,
        }
    }

    /// Diagonal blocks restricted to the zero-magnetization sector.
    pub fn top_diagonal(&self) -> (Bilinear<S>, Bilinear<S>) {
        let idx = top_sector(self.jj).flat();
        (self.b11.restrict(&idx), self.b22.restrict(&idx))
    }

    fn eval_all(&self, mu: &S, x: &S, scale: &S, normalized: bool) -> LaxBlocks<S> {
        let e = |b: &Bilinear<S>| b.eval(mu, x).scale(scale);
        LaxBlocks {
            jj: self.jj,
            b11: e(&self.b11),
            b22: e(&self.b22),
            b12: e(&self.b12),
            b21: e(&self.b21),
            normalized,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaxBlocks<S> {
    pub jj: RepIndex,
    pub b11: Mat<S>,
    pub b22: Mat<S>,
    pub b12: Mat<S>,
    pub b21: Mat<S>,
    pub normalized: bool,
}

impl<S: LaxScalar> LaxBlocks<S> {
    pub fn diagonal(&self, spin: Spin) -> &Mat<S> {
        match spin {
            Spin::Up => &self.b11,
            Spin::Down => &self.b22,
        }
    }

    pub fn block(&self, row: Spin, col: Spin) -> &Mat<S> {
        match (row, col) {
            (Spin::Up, Spin::Up) => &self.b11,
            (Spin::Down, Spin::Down) => &self.b22,
            (Spin::Up, Spin::Down) => &self.b12,
            (Spin::Down, Spin::Up) => &self.b21,
        }
    }

    /// Restriction of all four blocks to the zero-magnetization sector.
    /// Only the diagonal blocks preserve it.
    pub fn restrict_top(&self) -> LaxBlocks<S> {
        let idx = top_sector(self.jj).flat();
        LaxBlocks {
            jj: self.jj,
            b11: self.b11.restrict(&idx),
            b22: self.b22.restrict(&idx),
            b12: self.b12.restrict(&idx),
            b21: self.b21.restrict(&idx),
            normalized: self.normalized,
        }
    }
}

fn pole_factors<S: LaxScalar>(jj: RepIndex, mu: &S, x: &S) -> (S, S) {
    let q = S::from_ratio(jj.get() as i64 + 1, 2) * S::imag_unit();
    (mu.clone() - q.clone(), x.clone() + q)
}

/// `f(μ, x)` in any scalar field.
pub fn norm_factor_in<S: LaxScalar>(jj: RepIndex, mu: &S, x: &S) -> Result<S> {
    let (a, b) = pole_factors(jj, mu, x);
    if a.near_zero() || b.near_zero() {
        return Err(singular(mu, x));
    }
    Ok(S::one() / (a * b))
}

fn singular<S: std::fmt::Debug>(mu: &S, x: &S) -> ChargeError {
    ChargeError::InvalidInput(format!("singular normalization at mu = {mu:?}, x = {x:?}"))
}

pub fn norm_factor(jj: RepIndex, p: SpectralPoint) -> Result<Complex64> {
    let (a, b) = pole_factors(jj, &p.mu, &p.x);
    if a.near_zero() || b.near_zero() {
        let at = if a.near_zero() { p.mu } else { p.x };
        return Err(ChargeError::SingularPoint { re: at.re, im: at.im });
    }
    Ok(Complex64::new(1.0, 0.0) / (a * b))
}

/// Normalized blocks, integer ladder convention.
pub fn lax_blocks(jj: RepIndex, p: SpectralPoint) -> Result<LaxBlocks<Complex64>> {
    lax_blocks_with(jj, p, LadderConvention::Integer)
}

pub fn lax_blocks_with(jj: RepIndex, p: SpectralPoint, convention: LadderConvention) -> Result<LaxBlocks<Complex64>> {
    let f = norm_factor(jj, p)?;
    let structure = LaxStructure::new(&SpinOperators::build(jj, convention));
    Ok(structure.eval_all(&p.mu, &p.x, &f, true))
}

/// Blocks with `f` factored out.
pub fn bare_blocks(jj: RepIndex, p: SpectralPoint, convention: LadderConvention) -> LaxBlocks<Complex64> {
    let structure = LaxStructure::new(&SpinOperators::build(jj, convention));
    structure.eval_all(&p.mu, &p.x, &Complex64::new(1.0, 0.0), false)
}

/// Normalized blocks at an exact Gaussian-rational point.
pub fn lax_blocks_exact(jj: RepIndex, mu: &GaussRational, x: &GaussRational) -> Result<LaxBlocks<GaussRational>> {
    let f = norm_factor_in(jj, mu, x)?;
    let structure = LaxStructure::new(&SpinOperators::<GaussRational>::integer(jj));
    Ok(structure.eval_all(mu, x, &f, true))
}

/// `∂_x 𝕃(μ, x)` at `x = μ`:
/// `f ∂_x(bare) − f / (μ + i(jj+1)/2) · bare`.
pub fn lax_block_derivative(jj: RepIndex, mu: Complex64) -> Result<LaxBlocks<Complex64>> {
    lax_block_derivative_with(jj, mu, LadderConvention::Integer)
}

pub fn lax_block_derivative_with(jj: RepIndex, mu: Complex64, convention: LadderConvention) -> Result<LaxBlocks<Complex64>> {
    let structure = LaxStructure::new(&SpinOperators::build(jj, convention));
    let p = SpectralPoint::diagonal(mu);
    let f = norm_factor(jj, p)?;
    let df = -f / (mu + Complex64::new(0.0, jj.half_shift()));
    let d = |b: &Bilinear<Complex64>| b.eval_dx(&mu).scale(&f) + b.eval(&mu, &mu).scale(&df);
    Ok(LaxBlocks {
        jj,
        b11: d(&structure.b11),
        b22: d(&structure.b22),
        b12: d(&structure.b12),
        b21: d(&structure.b21),
        normalized: true,
    })
}

/// Total `Ŝ^z = s^z ⊗ 1 + 1 ⊗ s^z`.
pub fn total_sz<S: LaxScalar>(ops: &SpinOperators<S>) -> Mat<S> {
    let id = ops.identity();
    ops.sz.kron(&id) + id.kron(&ops.sz)
}

/// Top-sector diagonal blocks and their `x`-derivatives at `x = μ`, the
/// per-site input of the numeric monodromy.
#[derive(Clone, Debug)]
pub struct TopSectorSite {
    pub up: CMat,
    pub down: CMat,
    pub d_up: CMat,
    pub d_down: CMat,
}

impl TopSectorSite {
    pub fn new(jj: RepIndex, mu: Complex64) -> Result<Self> {
        let structure = LaxStructure::<Complex64>::new(&SpinOperators::integer(jj));
        Self::from_structure(&structure, mu)
    }

    pub fn from_structure(structure: &LaxStructure<Complex64>, mu: Complex64) -> Result<Self> {
        let jj = structure.jj;
        let f = norm_factor(jj, SpectralPoint::diagonal(mu))?;
        let df = -f / (mu + Complex64::new(0.0, jj.half_shift()));
        let (t1, t2) = structure.top_diagonal();
        let up_bare = t1.eval(&mu, &mu);
        let down_bare = t2.eval(&mu, &mu);
        Ok(TopSectorSite {
            d_up: t1.eval_dx(&mu).scale(&f) + up_bare.scale(&df),
            d_down: t2.eval_dx(&mu).scale(&f) + down_bare.scale(&df),
            up: up_bare.scale(&f),
            down: down_bare.scale(&f),
        })
    }

    pub fn block(&self, spin: Spin) -> (&CMat, &CMat) {
        match spin {
            Spin::Up => (&self.up, &self.d_up),
            Spin::Down => (&self.down, &self.d_down),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{gauss, rational};
    use crate::spin_algebra::{all_sectors, w_vector};
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn jj(j: u32) -> RepIndex {
        RepIndex::new(j).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn norm_factor_values() {
        let f = norm_factor(jj(1), SpectralPoint::real(0.0, 0.0)).unwrap();
        assert!((f - c(1.0)).norm() < 1e-15);
        let f = norm_factor(jj(2), SpectralPoint::real(1.0, 1.0)).unwrap();
        assert!((f - c(4.0 / 13.0)).norm() < 1e-15);
        let err = norm_factor(jj(1), SpectralPoint::diagonal(Complex64::new(0.0, 1.0)));
        assert!(matches!(err, Err(ChargeError::SingularPoint { .. })));
        let err = norm_factor(jj(1), SpectralPoint::new(c(0.0), Complex64::new(0.0, -1.0)));
        assert!(matches!(err, Err(ChargeError::SingularPoint { .. })));
    }

    fn exact_point(num: i64, den: i64) -> GaussRational {
        gauss(rational(num, den), BigRational::zero())
    }

    fn det2(m: &Mat<GaussRational>) -> GaussRational {
        m.get(0, 0).clone() * m.get(1, 1).clone() - m.get(0, 1).clone() * m.get(1, 0).clone()
    }

    #[test]
    fn top_determinant_law_exact() {
        for (num, den) in [(0, 1), (1, 1), (3, 7), (-5, 2), (11, 3)] {
            let mu = exact_point(num, den);
            let blocks = lax_blocks_exact(jj(1), &mu, &mu).unwrap().restrict_top();
            let m2 = mu.clone() * mu.clone();
            let expected = m2.clone() / (m2 + GaussRational::one());
            assert_eq!(det2(&blocks.b11), expected);
            assert_eq!(det2(&blocks.b22), expected);
        }
    }

    #[test]
    fn w_left_invariant_exact() {
        for j in 1..=8 {
            let w: Vec<GaussRational> = w_vector(jj(j));
            for (num, den) in [(0, 1), (2, 3), (-7, 5)] {
                let mu = exact_point(num, den);
                let blocks = lax_blocks_exact(jj(j), &mu, &mu).unwrap().restrict_top();
                assert_eq!(blocks.b11.left_apply(&w), w);
                assert_eq!(blocks.b22.left_apply(&w), w);
            }
        }
    }

    /// Rows of the top-sector diagonal blocks in closed form.
    #[test]
    fn left_action_closed_form() {
        for j in 1..=5u32 {
            let n = j as i64;
            for (num, den) in [(1, 2), (-3, 4), (5, 1)] {
                let mu = exact_point(num, den);
                let blocks = lax_blocks_exact(jj(j), &mu, &mu).unwrap().restrict_top();
                let f = norm_factor_in(jj(j), &mu, &mu).unwrap();
                let quarter = f.clone() * GaussRational::from_ratio(1, 4);
                let mu2x4 = GaussRational::from_int(4) * mu.clone() * mu.clone();
                for k in 0..=n {
                    let ku = k as usize;
                    let diag1 = quarter.clone() * (GaussRational::from_int((2 * k + 1 - n).pow(2)) + mu2x4.clone());
                    assert_eq!(*blocks.b11.get(ku, ku), diag1);
                    if k >= 1 {
                        let off = quarter.clone() * GaussRational::from_int(4 * k * (k - n - 1));
                        assert_eq!(*blocks.b11.get(ku, ku - 1), off);
                    }
                    let diag2 = quarter.clone() * (GaussRational::from_int((2 * k - 1 - n).pow(2)) + mu2x4.clone());
                    assert_eq!(*blocks.b22.get(ku, ku), diag2);
                    if k < n {
                        let off = quarter.clone() * GaussRational::from_int(4 * (k + 1) * (k - n));
                        assert_eq!(*blocks.b22.get(ku, ku + 1), off);
                    }
                    for l in 0..=n as usize {
                        if l != ku && l + 1 != ku {
                            assert!(blocks.b11.get(ku, l).is_zero());
                        }
                        if l != ku && l != ku + 1 {
                            assert!(blocks.b22.get(ku, l).is_zero());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_blocks_preserve_sectors_exact() {
        for j in 1..=4 {
            let ops = SpinOperators::<GaussRational>::integer(jj(j));
            let sz = total_sz(&ops);
            let mu = gauss(rational(3, 5), rational(-1, 7));
            let x = gauss(rational(-2, 3), rational(1, 9));
            let b = lax_blocks_exact(jj(j), &mu, &x).unwrap();
            assert!(b.b11.commutator(&sz).is_zero());
            assert!(b.b22.commutator(&sz).is_zero());
            // off-diagonal blocks shift S^z by ±1
            assert!((b.b12.commutator(&sz) + b.b12.clone()).is_zero());
            assert!((b.b21.commutator(&sz) - b.b21.clone()).is_zero());
        }
    }

    #[test]
    fn sector_entries_vanish_numeric() {
        use proptest::prelude::*;
        use proptest::test_runner::TestRunner;
        let mut runner = TestRunner::default();
        runner
            .run(&(1u32..=6, -10.0f64..10.0, -10.0f64..10.0), |(j, mu, x)| {
                let b = lax_blocks(jj(j), SpectralPoint::real(mu, x)).unwrap();
                let sectors = all_sectors(jj(j));
                for s1 in &sectors {
                    for s2 in &sectors {
                        if s1.twice_sz == s2.twice_sz {
                            continue;
                        }
                        for &r in &s1.flat() {
                            for &c in &s2.flat() {
                                prop_assert_eq!(*b.b11.get(r, c), Complex64::new(0.0, 0.0));
                                prop_assert_eq!(*b.b22.get(r, c), Complex64::new(0.0, 0.0));
                            }
                        }
                    }
                }
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn top_det_zero_at_origin() {
        let b = lax_blocks(jj(1), SpectralPoint::real(0.0, 0.0)).unwrap().restrict_top();
        let det = b.b11.get(0, 0) * b.b11.get(1, 1) - b.b11.get(0, 1) * b.b11.get(1, 0);
        assert!(det.norm() < 1e-15);
    }

    fn fd_check(j: u32, mu: f64) {
        let h = 1e-6;
        let plus = lax_blocks(jj(j), SpectralPoint::real(mu, mu + h)).unwrap();
        let minus = lax_blocks(jj(j), SpectralPoint::real(mu, mu - h)).unwrap();
        let d = lax_block_derivative(jj(j), c(mu)).unwrap();
        for (p, m, dd) in [
            (&plus.b11, &minus.b11, &d.b11),
            (&plus.b22, &minus.b22, &d.b22),
            (&plus.b12, &minus.b12, &d.b12),
            (&plus.b21, &minus.b21, &d.b21),
        ] {
            let fd = (p.clone() - m.clone()).scale(&c(1.0 / (2.0 * h)));
            let rel = fd.max_abs_diff(dd) / dd.frobenius().max(1e-300);
            assert!(rel < 1e-8, "jj={j} mu={mu} rel={rel}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        fd_check(1, 0.7);
        fd_check(3, 2.3);
    }

    #[test]
    fn derivative_commutes_with_sz() {
        let ops = SpinOperators::<Complex64>::integer(jj(3));
        let sz = total_sz(&ops);
        let d = lax_block_derivative(jj(3), c(1.3)).unwrap();
        assert!(d.b11.commutator(&sz).frobenius() < 1e-14);
        assert!(d.b22.commutator(&sz).frobenius() < 1e-14);
    }

    #[test]
    fn conventions_agree_on_top_sector() {
        for j in 1..=4 {
            let p = SpectralPoint::new(Complex64::new(0.4, 0.1), Complex64::new(-1.2, 0.2));
            let a = lax_blocks_with(jj(j), p, LadderConvention::Integer).unwrap().restrict_top();
            let b = lax_blocks_with(jj(j), p, LadderConvention::Unitary).unwrap().restrict_top();
            assert!(a.b11.max_abs_diff(&b.b11) < 1e-13);
            assert!(a.b22.max_abs_diff(&b.b22) < 1e-13);
        }
    }

    #[test]
    fn bare_times_factor_is_normalized() {
        let p = SpectralPoint::real(0.3, -0.8);
        let bare = bare_blocks(jj(2), p, LadderConvention::Integer);
        let f = norm_factor(jj(2), p).unwrap();
        let full = lax_blocks(jj(2), p).unwrap();
        assert!(bare.b12.scale(&f).max_abs_diff(&full.b12) < 1e-15);
        assert!(!bare.normalized && full.normalized);
    }
}
