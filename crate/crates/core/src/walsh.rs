//! Walsh functions in Paley numbering.
//!
//! The one-dimensional `W_n` is the character of the dyadic group reading the
//! bits of `n`: `W_n(g) = (-1)^(sum_k g_k n_k)`. Multi-indices act by
//! coordinatewise products. For `n < 2^k`, `W_n` is constant on every rank-k
//! interval, and those constants form the symmetric sign matrix `W^(k)` with
//! `W^(k) W^(k) = 2^k I`.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::group::{bit_reverse, DyadicCube, DyadicPoint};

/// Cap on materialized Walsh matrices; larger orders are served entrywise.
pub const MATRIX_RANK_CAP: u32 = 12;

/// A multi-index of a d-dimensional Walsh function.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WalshIndex {
    components: Vec<BigUint>,
}

impl WalshIndex {
    pub fn new(components: Vec<BigUint>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(WalshIndex { components })
    }

    pub fn from_u64s(components: &[u64]) -> Self {
        WalshIndex { components: components.iter().map(|&n| BigUint::from(n)).collect() }
    }

    pub fn zero(dimension: usize) -> Self {
        WalshIndex { components: vec![BigUint::default(); dimension] }
    }

    /// `v * (1, ..., 1)`.
    pub fn diagonal(dimension: usize, v: &BigUint) -> Self {
        WalshIndex { components: vec![v.clone(); dimension] }
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, j: usize) -> &BigUint {
        &self.components[j]
    }

    pub fn components(&self) -> &[BigUint] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        use num_traits::Zero;
        self.components.iter().all(|n| n.is_zero())
    }

    /// Largest bit length over the components.
    pub fn max_bits(&self) -> u64 {
        self.components.iter().map(|n| n.bits()).max().unwrap_or(0)
    }

    /// True when every component is strictly positive.
    pub fn is_positive(&self) -> bool {
        use num_traits::Zero;
        self.components.iter().all(|n| !n.is_zero())
    }

    /// Componentwise strict comparison `self < 2^k * 1`.
    pub fn below_pow2(&self, k: u32) -> bool {
        self.max_bits() <= k as u64
    }
}

#[inline]
fn parity_sign(x: &BigUint) -> i32 {
    if x.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

#[inline]
fn rev_u64(x: u64, k: u32) -> u64 {
    if k == 0 {
        0
    } else {
        x.reverse_bits() >> (64 - k)
    }
}

#[inline]
fn pair_sign_u64(n: u64, rev_m: u64) -> i32 {
    if (n & rev_m).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

// Word-sized operands avoid heap traffic in the enumeration loops.
#[inline]
fn small_pair(k: u32, n: &BigUint, m: &BigUint) -> Option<(u64, u64)> {
    use num_traits::ToPrimitive;
    if k > 63 {
        return None;
    }
    Some((n.to_u64()?, m.to_u64()?))
}

/// The constant value of `W_n` on a rank-k cube, `n < 2^k * 1` componentwise.
pub fn walsh_on_cube(n: &WalshIndex, cube: &DyadicCube) -> Result<i32> {
    if n.dimension() != cube.dimension() {
        return Err(Error::DimensionMismatch(n.dimension(), cube.dimension()));
    }
    let k = cube.rank();
    if !n.below_pow2(k) {
        return Err(Error::NotConstantOnCube { rank: k });
    }
    let mut sign = 1;
    for (nj, mj) in n.components().iter().zip(cube.index()) {
        sign *= match small_pair(k, nj, mj) {
            Some((nv, mv)) => pair_sign_u64(nv, rev_u64(mv, k)),
            None => parity_sign(&(nj & bit_reverse(mj, k))),
        };
    }
    Ok(sign)
}

/// Pointwise Walsh value; the depth of `g` must cover every bit of `n`.
pub fn walsh_at_point(n: &WalshIndex, g: &DyadicPoint) -> Result<i32> {
    if n.dimension() != g.dimension() {
        return Err(Error::DimensionMismatch(n.dimension(), g.dimension()));
    }
    if n.max_bits() > g.depth() as u64 {
        return Err(Error::DepthTooSmall { needed: n.max_bits() as u32, available: g.depth() });
    }
    let mut sign = 1;
    for (j, nj) in n.components().iter().enumerate() {
        use num_traits::ToPrimitive;
        sign *= match (nj.to_u64(), g.coord(j).to_u64()) {
            (Some(nv), Some(gv)) => pair_sign_u64(nv, gv),
            _ => parity_sign(&(nj & g.coord(j))),
        };
    }
    Ok(sign)
}

/// Product of Rademacher signs: `prod_j (-1)^(g^j bit k_vec[j])`.
pub fn rademacher(k_vec: &[u32], g: &DyadicPoint) -> Result<i32> {
    if k_vec.len() != g.dimension() {
        return Err(Error::DimensionMismatch(k_vec.len(), g.dimension()));
    }
    let mut sign = 1;
    for (j, &k) in k_vec.iter().enumerate() {
        if k >= g.depth() {
            return Err(Error::DepthTooSmall { needed: k + 1, available: g.depth() });
        }
        if g.bit(j, k) {
            sign = -sign;
        }
    }
    Ok(sign)
}

/// Single entry of the order-2^k Walsh matrix, for arbitrary `k` (both
/// arguments below `2^k`). Entry (n, m) is the value of `W_n` on the rank-k
/// interval with index m.
pub fn walsh_entry(k: u32, n: &BigUint, m: &BigUint) -> Result<i32> {
    if n.bits() > k as u64 || m.bits() > k as u64 {
        return Err(Error::NotConstantOnCube { rank: k });
    }
    Ok(match small_pair(k, n, m) {
        Some((nv, mv)) => pair_sign_u64(nv, rev_u64(mv, k)),
        None => parity_sign(&(n & bit_reverse(m, k))),
    })
}

/// Entry of the k-th Walsh matrix for small arguments.
pub fn walsh_entry_u64(k: u32, n: u64, m: u64) -> i32 {
    debug_assert!(k <= 63 && n < (1 << k) && m < (1 << k));
    let rev = m.reverse_bits() >> (64 - k.max(1));
    let rev = if k == 0 { 0 } else { rev };
    if (n & rev).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The materialized k-th Walsh matrix: symmetric, entries +-1, order 2^k.
pub struct SignMatrix {
    k: u32,
    order: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn rank(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, n: usize, m: usize) -> i32 {
        self.entries[n * self.order + m] as i32
    }
}

/// Builds the k-th Walsh matrix; capped at `MATRIX_RANK_CAP` (larger ranks
/// are served entrywise by `walsh_entry`).
pub fn walsh_matrix(k: u32) -> Result<SignMatrix> {
    if k > MATRIX_RANK_CAP {
        return Err(Error::MatrixTooLarge(k, MATRIX_RANK_CAP));
    }
    let order = 1usize << k;
    let mut entries = vec![0i8; order * order];
    for n in 0..order {
        for m in 0..order {
            entries[n * order + m] = walsh_entry_u64(k, n as u64, m as u64) as i8;
        }
    }
    Ok(SignMatrix { k, order, entries })
}
