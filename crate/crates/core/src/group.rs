//! The dyadic group, its finite-depth points, and dyadic cubes.
//!
//! A point of `G^d` is d bit sequences; we truncate every sequence at an
//! explicit depth `K`, since any finite computation inspects finitely many
//! bits. The group operation is componentwise bitwise XOR.
//!
//! A rank-`k` dyadic cube is addressed by a d-vector of indices `m < 2^k`.
//! The bit-to-index convention is fixed once: bit `t` of a point maps to bit
//! `k-1-t` of the cube index, so the first bits of a point are the most
//! significant digits of the index of the cube around it.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::DyadicRational;

/// Cap on `d * rank` for full cube enumerations (2^26 items).
pub const ENUMERATION_CAP_BITS: u64 = 26;

/// Reverses the low `k` bits of `x` (bit `t` goes to bit `k-1-t`).
pub(crate) fn bit_reverse(x: &BigUint, k: u32) -> BigUint {
    let mut out = BigUint::zero();
    for t in 0..k as u64 {
        if x.bit(t) {
            out.set_bit(k as u64 - 1 - t, true);
        }
    }
    out
}

/// An element of `G^d` truncated at depth `K`: bit `t` of `coords[j]` is the
/// `t`-th binary digit of coordinate `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicPoint {
    depth: u32,
    coords: Vec<BigUint>,
}

impl DyadicPoint {
    pub fn new(coords: Vec<BigUint>, depth: u32) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        for c in &coords {
            if c.bits() > depth as u64 {
                return Err(Error::DepthTooSmall { needed: c.bits() as u32, available: depth });
            }
        }
        Ok(DyadicPoint { depth, coords })
    }

    pub fn zero(dimension: usize, depth: u32) -> Self {
        DyadicPoint { depth, coords: vec![BigUint::zero(); dimension] }
    }

    /// Builds a point from explicit digit rows; `bits[j][t]` is digit `t` of
    /// coordinate `j`. All rows must have equal length, which becomes `K`.
    pub fn from_bits(bits: &[Vec<u8>]) -> Result<Self> {
        if bits.is_empty() || bits[0].is_empty() {
            return Err(Error::InvalidArgument("empty bit rows".into()));
        }
        let depth = bits[0].len() as u32;
        let mut coords = Vec::with_capacity(bits.len());
        for row in bits {
            if row.len() as u32 != depth {
                return Err(Error::DepthMismatch(depth, row.len() as u32));
            }
            let mut c = BigUint::zero();
            for (t, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => c.set_bit(t as u64, true),
                    _ => return Err(Error::InvalidArgument("bits must be 0 or 1".into())),
                }
            }
            coords.push(c);
        }
        Ok(DyadicPoint { depth, coords })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, dimension: usize, depth: u32) -> Self {
        let coords = (0..dimension)
            .map(|_| {
                let mut c = BigUint::zero();
                for t in 0..depth as u64 {
                    if rng.gen_bool(0.5) {
                        c.set_bit(t, true);
                    }
                }
                c
            })
            .collect();
        DyadicPoint { depth, coords }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn coord(&self, j: usize) -> &BigUint {
        &self.coords[j]
    }

    pub fn bit(&self, j: usize, t: u32) -> bool {
        self.coords[j].bit(t as u64)
    }

    /// Componentwise XOR; both points must share dimension and depth.
    pub fn xor_add(&self, other: &DyadicPoint) -> Result<DyadicPoint> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch(self.dimension(), other.dimension()));
        }
        if self.depth != other.depth {
            return Err(Error::DepthMismatch(self.depth, other.depth));
        }
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(DyadicPoint { depth: self.depth, coords })
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Zero-pads the bit sequences out to a larger depth.
    pub fn with_depth(&self, depth: u32) -> Result<DyadicPoint> {
        if depth < self.depth {
            let max_bits = self.coords.iter().map(|c| c.bits()).max().unwrap_or(0);
            if max_bits > depth as u64 {
                return Err(Error::DepthTooSmall { needed: max_bits as u32, available: depth });
            }
        }
        Ok(DyadicPoint { depth, coords: self.coords.clone() })
    }

    /// The index vector of the rank-`k` cube around this point.
    pub fn prefix_index(&self, rank: u32) -> Result<Vec<BigUint>> {
        if rank > self.depth {
            return Err(Error::RankExceedsDepth { rank, depth: self.depth });
        }
        Ok(self.coords.iter().map(|c| bit_reverse(c, rank)).collect())
    }
}

impl fmt::Display for DyadicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .coords
            .iter()
            .map(|c| (0..self.depth as u64).map(|t| if c.bit(t) { '1' } else { '0' }).collect())
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

/// How two dyadic cubes relate; they are always nested or disjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubeRelation {
    Equal,
    /// `self` strictly contains the other cube.
    Contains,
    /// `self` lies strictly inside the other cube.
    Inside,
    Disjoint,
}

/// A rank-`k` dyadic cube, the product of d rank-`k` dyadic intervals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    rank: u32,
    index: Vec<BigUint>,
}

impl DyadicCube {
    pub fn new(rank: u32, index: Vec<BigUint>) -> Result<Self> {
        if index.is_empty() {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        for m in &index {
            if m.bits() > rank as u64 {
                return Err(Error::IndexOutOfRange { rank });
            }
        }
        Ok(DyadicCube { rank, index })
    }

    pub fn from_u64s(rank: u32, index: &[u64]) -> Result<Self> {
        Self::new(rank, index.iter().map(|&m| BigUint::from(m)).collect())
    }

    /// The whole group: the unique rank-0 cube.
    pub fn root(dimension: usize) -> Self {
        DyadicCube { rank: 0, index: vec![BigUint::zero(); dimension] }
    }

    /// The unique rank-`k` cube containing `g`.
    pub fn of_point(g: &DyadicPoint, rank: u32) -> Result<Self> {
        Ok(DyadicCube { rank, index: g.prefix_index(rank)? })
    }

    pub fn dimension(&self) -> usize {
        self.index.len()
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn index(&self) -> &[BigUint] {
        &self.index
    }

    /// The 2^d rank-(k+1) subcubes, ordered lexicographically in the offset
    /// vector sigma.
    pub fn children(&self) -> Vec<DyadicCube> {
        let d = self.dimension();
        assert!(d <= 20, "dimension too large to enumerate children");
        let mut out = Vec::with_capacity(1 << d);
        for mask in 0u64..(1 << d) {
            let index = self
                .index
                .iter()
                .enumerate()
                .map(|(j, m)| {
                    let sigma = (mask >> (d - 1 - j)) & 1;
                    (m << 1u8) + BigUint::from(sigma)
                })
                .collect();
            out.push(DyadicCube { rank: self.rank + 1, index });
        }
        out
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        if self.rank == 0 {
            return None;
        }
        Some(DyadicCube {
            rank: self.rank - 1,
            index: self.index.iter().map(|m| m >> 1u8).collect(),
        })
    }

    /// The rank-`rank` cube containing this one (`rank <= self.rank`).
    pub fn ancestor(&self, rank: u32) -> Result<DyadicCube> {
        if rank > self.rank {
            return Err(Error::InvalidArgument(format!(
                "ancestor rank {rank} exceeds cube rank {}",
                self.rank
            )));
        }
        let shift = (self.rank - rank) as u64;
        Ok(DyadicCube {
            rank,
            index: self.index.iter().map(|m| m >> shift).collect(),
        })
    }

    pub fn relation(&self, other: &DyadicCube) -> CubeRelation {
        use std::cmp::Ordering::*;
        match self.rank.cmp(&other.rank) {
            Equal => {
                if self.index == other.index {
                    CubeRelation::Equal
                } else {
                    CubeRelation::Disjoint
                }
            }
            Less => {
                if other.ancestor(self.rank).expect("rank ordered").index == self.index {
                    CubeRelation::Contains
                } else {
                    CubeRelation::Disjoint
                }
            }
            Greater => {
                if self.ancestor(other.rank).expect("rank ordered").index == other.index {
                    CubeRelation::Inside
                } else {
                    CubeRelation::Disjoint
                }
            }
        }
    }

    pub fn contains_cube(&self, inner: &DyadicCube) -> bool {
        matches!(self.relation(inner), CubeRelation::Equal | CubeRelation::Contains)
    }

    pub fn contains_point(&self, g: &DyadicPoint) -> Result<bool> {
        Ok(g.prefix_index(self.rank)? == self.index)
    }

    /// Haar measure: `2^(-k d)`.
    pub fn measure(&self) -> DyadicRational {
        DyadicRational::pow2(-(self.rank as i64) * self.dimension() as i64)
    }

    /// The translated cube `g + self` (XOR translation); again a rank-`k`
    /// cube, with index XORed by the first `k` bits of `g`.
    pub fn translate(&self, g: &DyadicPoint) -> Result<DyadicCube> {
        if g.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch(g.dimension(), self.dimension()));
        }
        let prefix = g.prefix_index(self.rank)?;
        Ok(DyadicCube {
            rank: self.rank,
            index: self.index.iter().zip(&prefix).map(|(m, p)| m ^ p).collect(),
        })
    }

    /// The point of the cube whose remaining digits are all zero.
    pub fn min_point(&self, depth: u32) -> Result<DyadicPoint> {
        if depth < self.rank {
            return Err(Error::RankExceedsDepth { rank: self.rank, depth });
        }
        let coords = self.index.iter().map(|m| bit_reverse(m, self.rank)).collect();
        Ok(DyadicPoint { depth, coords })
    }

    /// All rank-`rank` cubes of `G^d`, in lexicographic index order.
    pub fn all_at_rank(dimension: usize, rank: u32) -> Result<CubeIter> {
        let bits = dimension as u64 * rank as u64;
        if bits > ENUMERATION_CAP_BITS {
            return Err(Error::EnumerationTooLarge { bits, cap: ENUMERATION_CAP_BITS });
        }
        Ok(CubeIter {
            rank,
            width: rank,
            base: vec![BigUint::zero(); dimension],
            counter: vec![0; dimension],
            done: false,
        })
    }

    /// All rank-`rank` subcubes of this cube (`rank >= self.rank`), in
    /// lexicographic order of the offset.
    pub fn subcubes_at_rank(&self, rank: u32) -> Result<CubeIter> {
        if rank < self.rank {
            return Err(Error::InvalidArgument(format!(
                "subcube rank {rank} below cube rank {}",
                self.rank
            )));
        }
        let width = rank - self.rank;
        let bits = self.dimension() as u64 * width as u64;
        if bits > ENUMERATION_CAP_BITS {
            return Err(Error::EnumerationTooLarge { bits, cap: ENUMERATION_CAP_BITS });
        }
        Ok(CubeIter {
            rank,
            width,
            base: self.index.iter().map(|m| m << (width as u64)).collect(),
            counter: vec![0; self.dimension()],
            done: false,
        })
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.index.iter().map(|m| m.to_string()).collect();
        write!(f, "({};{})", self.rank, idx.join(";"))
    }
}

/// Odometer over the offsets of a cube family; yields cubes in lexicographic
/// offset order.
pub struct CubeIter {
    rank: u32,
    width: u32,
    base: Vec<BigUint>,
    counter: Vec<u64>,
    done: bool,
}

impl Iterator for CubeIter {
    type Item = DyadicCube;

    fn next(&mut self) -> Option<DyadicCube> {
        if self.done {
            return None;
        }
        let index = self
            .base
            .iter()
            .zip(&self.counter)
            .map(|(b, &c)| b + BigUint::from(c))
            .collect();
        let cube = DyadicCube { rank: self.rank, index };
        // advance odometer, last coordinate fastest
        if self.width == 0 {
            self.done = true;
        } else {
            let limit = 1u64 << self.width.min(63);
            let mut j = self.counter.len();
            loop {
                if j == 0 {
                    self.done = true;
                    break;
                }
                j -= 1;
                self.counter[j] += 1;
                if self.counter[j] < limit {
                    break;
                }
                self.counter[j] = 0;
            }
        }
        Some(cube)
    }
}
