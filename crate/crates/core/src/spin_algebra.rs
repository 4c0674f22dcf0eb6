//! su(2) representation matrices on `V_jj` (dimension `jj + 1`), the
//! `S^z` sector decomposition of `V_jj ⊗ V_jj` and the left invariant
//! vector `w` of the diagonal Lax blocks.
//!
//! Basis `e_0 … e_jj` with `e_0` the highest weight:
//! `s^z e_k = (jj/2 - k) e_k`. Two ladder normalizations are provided:
//!
//! * [`LadderConvention::Integer`]: `s^+ e_k = e_{k-1}`,
//!   `s^- e_{k-1} = k (jj - k + 1) e_k`. Square-root free, so the exact
//!   backend stays inside the Gaussian rationals. In this basis the
//!   top-sector rows of the diagonal Lax blocks take the closed form used
//!   for `w`.
//! * [`LadderConvention::Unitary`]: the textbook
//!   `s^± e = sqrt(k (jj - k + 1))` elements. Operator norms of the
//!   off-diagonal blocks are measured in this basis.
//!
//! The two are related by a diagonal similarity `D` with `d_k d_{jj-k}`
//! constant, so the top-sector blocks (and all charges) coincide.

use std::fmt;

use num_complex::Complex64;

use crate::error::{ChargeError, Result};
use crate::matrix::Mat;
use crate::scalar::LaxScalar;

/// Twice the auxiliary spin; the module `V_jj` has dimension `jj + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RepIndex(u32);

impl RepIndex {
    pub fn new(jj: u32) -> Result<Self> {
        if jj == 0 {
            return Err(ChargeError::InvalidInput("representation index jj must be >= 1".into()));
        }
        Ok(RepIndex(jj))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// `(jj + 1) / 2`, the imaginary offset of the normalization poles.
    pub fn half_shift(self) -> f64 {
        (self.0 as f64 + 1.0) / 2.0
    }
}

impl fmt::Display for RepIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LadderConvention {
    #[default]
    Integer,
    Unitary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinOperators<S> {
    pub jj: RepIndex,
    pub sz: Mat<S>,
    pub sp: Mat<S>,
    pub sm: Mat<S>,
}

/// `s^z` eigenvalue of `e_k`, doubled: `jj - 2k`.
pub fn twice_weight(jj: RepIndex, k: usize) -> i64 {
    jj.get() as i64 - 2 * k as i64
}

impl<S: LaxScalar> SpinOperators<S> {
    /// Square-root free representation (see module docs).
    pub fn integer(jj: RepIndex) -> Self {
        let n = jj.dim();
        let j = jj.get() as i64;
        let sz = Mat::from_fn(n, n, |a, b| {
            if a == b {
                S::from_ratio(twice_weight(jj, a), 2)
            } else {
                S::zero()
            }
        });
        let sp = Mat::from_fn(n, n, |a, b| if b == a + 1 { S::one() } else { S::zero() });
        let sm = Mat::from_fn(n, n, |a, b| {
            if a == b + 1 {
                let k = a as i64;
                S::from_int(k * (j - k + 1))
            } else {
                S::zero()
            }
        });
        SpinOperators { jj, sz, sp, sm }
    }

    pub fn identity(&self) -> Mat<S> {
        Mat::identity(self.jj.dim())
    }

    /// `s^+ s^- + s^- s^+ + 2 (s^z)^2`, which equals `(jj/2)(jj/2 + 1) · 2`
    /// times the identity.
    pub fn casimir(&self) -> Mat<S> {
        let two = S::from_int(2);
        self.sp.matmul(&self.sm) + self.sm.matmul(&self.sp) + self.sz.matmul(&self.sz).scale(&two)
    }
}

impl SpinOperators<Complex64> {
    pub fn build(jj: RepIndex, convention: LadderConvention) -> Self {
        match convention {
            LadderConvention::Integer => Self::integer(jj),
            LadderConvention::Unitary => Self::unitary(jj),
        }
    }

    pub fn unitary(jj: RepIndex) -> Self {
        let n = jj.dim();
        let j = jj.get() as f64;
        let elem = |k: usize| {
            let k = k as f64;
            Complex64::new((k * (j - k + 1.0)).sqrt(), 0.0)
        };
        let sz = Mat::from_fn(n, n, |a, b| {
            if a == b {
                Complex64::new(twice_weight(jj, a) as f64 / 2.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let sp = Mat::from_fn(n, n, |a, b| if b == a + 1 { elem(b) } else { Complex64::new(0.0, 0.0) });
        let sm = Mat::from_fn(n, n, |a, b| if a == b + 1 { elem(a) } else { Complex64::new(0.0, 0.0) });
        SpinOperators { jj, sz, sp, sm }
    }
}

/// Convenience wrapper matching the exact-arithmetic default.
pub fn build_spin_ops<S: LaxScalar>(jj: RepIndex) -> SpinOperators<S> {
    SpinOperators::integer(jj)
}

/// Basis pairs `(k, l)` of `V_jj ⊗ V_jj` with a fixed total `S^z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorBasis {
    pub jj: RepIndex,
    /// Twice the total `S^z` eigenvalue.
    pub twice_sz: i64,
    pub indices: Vec<(usize, usize)>,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Flat indices into the `(jj+1)^2`-dimensional tensor space.
    pub fn flat(&self) -> Vec<usize> {
        let n = self.jj.dim();
        self.indices.iter().map(|&(k, l)| k * n + l).collect()
    }
}

/// Sector with total `S^z` equal to `twice_sz / 2`, ordered by `k` ascending.
pub fn sector(jj: RepIndex, twice_sz: i64) -> SectorBasis {
    let n = jj.dim();
    let mut indices = Vec::new();
    for k in 0..n {
        for l in 0..n {
            if twice_weight(jj, k) + twice_weight(jj, l) == twice_sz {
                indices.push((k, l));
            }
        }
    }
    SectorBasis { jj, twice_sz, indices }
}

/// All sectors, from the highest total weight down.
pub fn all_sectors(jj: RepIndex) -> Vec<SectorBasis> {
    let j = jj.get() as i64;
    (0..=2 * j).map(|s| sector(jj, 2 * j - 2 * s)).collect()
}

/// The zero-magnetization sector `{(k, jj - k)}` that carries `v` and `w`.
pub fn top_sector(jj: RepIndex) -> SectorBasis {
    let n = jj.dim();
    SectorBasis { jj, twice_sz: 0, indices: (0..n).map(|k| (k, n - 1 - k)).collect() }
}

/// `w = Σ_k (-1)^k e_k ⊗ e_{jj-k}` in top-sector coordinates.
pub fn w_vector<S: LaxScalar>(jj: RepIndex) -> Vec<S> {
    (0..jj.dim()).map(|k| if k % 2 == 0 { S::one() } else { -S::one() }).collect()
}
