//! Dirichlet kernels for the Walsh system.
//!
//! `D_N = W_0 + ... + W_{N-1}`. Two evaluation paths are kept side by side:
//! plain summation, and the split of `D_N` along the binary digits of `N`
//! into Rademacher-weighted dyadic kernels `D_{2^k}` (which are `2^k` on the
//! zero interval of rank `k` and vanish elsewhere). Tests require the two
//! paths to agree everywhere.
//!
//! Kernel values are plain integers; callers convert to `DyadicRational`
//! where needed.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::group::{bit_reverse, DyadicCube, DyadicPoint};
use crate::walsh::WalshIndex;

/// Evaluation strategy for kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelPath {
    /// Term-by-term summation of Walsh values; O(N).
    DirectSum,
    /// Split along the binary digits of N; O(log^2 N).
    RademacherSplit,
}

fn check_order(n: u64, rank_bits: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::KernelOrderZero);
    }
    if rank_bits < 64 && n > (1u64 << rank_bits) {
        return Err(Error::KernelOrderTooLarge { order: n, rank: rank_bits });
    }
    Ok(())
}

fn parity_sign_u64(x: u64) -> i64 {
    if x.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `D_n` on a one-dimensional rank-`rank` interval with index `m`
/// (requires `n <= 2^rank`, so the kernel is constant there).
pub fn dirichlet_interval(n: u64, rank: u32, m: &BigUint, path: KernelPath) -> Result<i64> {
    check_order(n, rank)?;
    match path {
        KernelPath::DirectSum => {
            let rev = bit_reverse(m, rank)
                .to_u64()
                .ok_or(Error::KernelOverflow)?;
            let mut acc: i64 = 0;
            for v in 0..n {
                acc += parity_sign_u64(v & rev);
            }
            Ok(acc)
        }
        KernelPath::RademacherSplit => {
            // D_n = sum_j R_{k_1}..R_{k_{j-1}} D_{2^{k_j}} over the set bits
            // k_1 > k_2 > ... of n.
            let mut acc: i64 = 0;
            let mut prefix: i64 = 1;
            for k in (0..64u32).rev().filter(|&k| n >> k & 1 == 1) {
                // D_{2^k} on the interval: 2^k when the index has its top
                // rank-k digits zero, i.e. m < 2^(rank-k).
                if m.bits() <= (rank - k) as u64 {
                    acc = acc
                        .checked_add(prefix * (1i64 << k))
                        .ok_or(Error::KernelOverflow)?;
                }
                // R_k on the interval reads index bit rank-1-k. k = rank can
                // only be the final (sole) digit, so the read is safe to skip.
                if k < rank && m.bit((rank - 1 - k) as u64) {
                    prefix = -prefix;
                }
            }
            Ok(acc)
        }
    }
}

/// `D_n` at a one-dimensional point given by its digit sequence.
pub fn dirichlet_at_coord(n: u64, coord: &BigUint, depth: u32, path: KernelPath) -> Result<i64> {
    check_order(n, depth)?;
    match path {
        KernelPath::DirectSum => {
            let mut acc: i64 = 0;
            if let Some(bits) = coord.to_u64() {
                for v in 0..n {
                    acc += parity_sign_u64(v & bits);
                }
            } else {
                for v in 0..n {
                    let x = BigUint::from(v) & coord;
                    acc += if x.count_ones() % 2 == 0 { 1 } else { -1 };
                }
            }
            Ok(acc)
        }
        KernelPath::RademacherSplit => {
            let mut acc: i64 = 0;
            let mut prefix: i64 = 1;
            for k in (0..64u32).rev().filter(|&k| n >> k & 1 == 1) {
                // D_{2^k}(g) = 2^k iff the first k digits of g vanish.
                if coord.trailing_zeros().unwrap_or(u64::MAX) >= k as u64 {
                    acc = acc
                        .checked_add(prefix * (1i64 << k))
                        .ok_or(Error::KernelOverflow)?;
                }
                if coord.bit(k as u64) {
                    prefix = -prefix;
                }
            }
            Ok(acc)
        }
    }
}

fn component_u64(n: &BigUint) -> Result<u64> {
    n.to_u64().ok_or(Error::KernelOverflow)
}

/// d-dimensional kernel on a rank-k cube: the product of the coordinate
/// kernels (requires `N <= 2^k * 1`).
pub fn dirichlet_on_cube(n: &WalshIndex, cube: &DyadicCube, path: KernelPath) -> Result<i128> {
    if n.dimension() != cube.dimension() {
        return Err(Error::DimensionMismatch(n.dimension(), cube.dimension()));
    }
    let mut acc: i128 = 1;
    for (nj, mj) in n.components().iter().zip(cube.index()) {
        let v = dirichlet_interval(component_u64(nj)?, cube.rank(), mj, path)?;
        acc = acc.checked_mul(v as i128).ok_or(Error::KernelOverflow)?;
        if acc == 0 {
            return Ok(0);
        }
    }
    Ok(acc)
}

/// d-dimensional kernel at a point.
pub fn dirichlet_at_point(n: &WalshIndex, g: &DyadicPoint, path: KernelPath) -> Result<i128> {
    if n.dimension() != g.dimension() {
        return Err(Error::DimensionMismatch(n.dimension(), g.dimension()));
    }
    let mut acc: i128 = 1;
    for (j, nj) in n.components().iter().enumerate() {
        let v = dirichlet_at_coord(component_u64(nj)?, g.coord(j), g.depth(), path)?;
        acc = acc.checked_mul(v as i128).ok_or(Error::KernelOverflow)?;
        if acc == 0 {
            return Ok(0);
        }
    }
    Ok(acc)
}
