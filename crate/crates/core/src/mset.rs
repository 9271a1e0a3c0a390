//! The staged tiling construction of thin closed sets realized by null
//! series.
//!
//! Fix the stage ranks `m_1 = 0`, `m_{s+1} = 2(2 m_s + 1)`. At stage `s` the
//! group is tiled by rank-`2 m_s` cubes, addressed as `(m, m')` with
//! `m, m' < 2^{m_s} * 1`; the stage set keeps, inside each such cube, the
//! half of its children on which the Rademacher product at bit `2 m_s`
//! matches the Walsh matrix entry `W^(m_s)[pi_s(m), m']`. Intersecting the
//! stages yields a closed set of measure zero whose canonical quasimeasure
//! is generated by a null series supported on `{0}` and the diagonal blocks
//! `B_{2 m_s}`; the coefficients of that series have closed forms which this
//! module implements next to the brute-force integrals that check them.
//!
//! The permutations `pi_s` shuffle which scaled Walsh graph lands in which
//! cube. Identity permutations give the base set; per-coordinate (product)
//! permutations keep every convergence statement available; fully general
//! permutations are accepted only through an explicitly "unrestricted"
//! constructor and drive the coefficient formulas alone.

use std::collections::HashMap;
use std::io::Read;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::group::{DyadicCube, DyadicPoint, ENUMERATION_CAP_BITS};
use crate::quasimeasure::{CoefficientSource, MeetsPredicate, Quasimeasure};
use crate::rational::DyadicRational;
use crate::walsh::{rademacher, walsh_entry, WalshIndex};

/// Largest bit width of a stage rank that permutation tables may address.
const PERM_TABLE_BITS: u64 = 20;

/// The stage ranks `m_1, ..., m_S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSequence {
    values: Vec<u64>,
}

impl StageSequence {
    /// `[0, 2, 10, 42, ...]` with `stages` terms.
    pub fn new(stages: u32) -> Result<Self> {
        if stages == 0 {
            return Err(Error::InvalidArgument("need at least one stage".into()));
        }
        let mut values = Vec::with_capacity(stages as usize);
        let mut m: u64 = 0;
        for _ in 0..stages {
            values.push(m);
            m = next_stage_rank(m)?;
        }
        Ok(StageSequence { values })
    }

    pub fn stage_count(&self) -> u32 {
        self.values.len() as u32
    }

    /// `m_s`, 1-based.
    pub fn rank(&self, s: u32) -> Result<u64> {
        self.values
            .get((s as usize).wrapping_sub(1))
            .copied()
            .ok_or(Error::StageOutOfRange { stage: s, max: self.stage_count() })
    }

    /// `m_s` for any `s >= 1`, extending past the stored terms by the
    /// recurrence.
    pub fn rank_unbounded(&self, s: u32) -> Result<u64> {
        if s == 0 {
            return Err(Error::StageOutOfRange { stage: 0, max: self.stage_count() });
        }
        if let Ok(v) = self.rank(s) {
            return Ok(v);
        }
        let mut m = *self.values.last().expect("nonempty");
        for _ in self.stage_count()..s {
            m = next_stage_rank(m)?;
        }
        Ok(m)
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// The stage whose diagonal block contains `n` (every component in
    /// `[2^{2 m_s}, 2^{2 m_s + 1})`), searched over the unbounded recurrence.
    pub fn block_stage_of(&self, n: &WalshIndex) -> Option<u32> {
        let bits = n.max_bits();
        if bits == 0 {
            return None;
        }
        let mut m: u64 = 0;
        let mut s: u32 = 1;
        loop {
            // components of the stage-s block have exactly 2 m_s + 1 bits
            if bits == 2 * m + 1 && n.components().iter().all(|c| c.bits() == 2 * m + 1) {
                return Some(s);
            }
            if 2 * m + 1 >= bits {
                return None;
            }
            m = match next_stage_rank(m) {
                Ok(v) => v,
                Err(_) => return None,
            };
            s += 1;
        }
    }
}

fn next_stage_rank(m: u64) -> Result<u64> {
    m.checked_mul(4)
        .and_then(|x| x.checked_add(2))
        .ok_or_else(|| Error::InvalidArgument("stage rank overflow".into()))
}

fn rank_u32(m: u64) -> Result<u32> {
    u32::try_from(m).map_err(|_| Error::InvalidArgument(format!("rank {m} too large")))
}

/// A permutation of `0..2^bits` with its inverse.
#[derive(Clone, Debug)]
pub struct CoordinatePermutation {
    forward: Vec<u64>,
    inverse: Vec<u64>,
}

impl CoordinatePermutation {
    pub fn new(forward: Vec<u64>) -> Result<Self> {
        let n = forward.len() as u64;
        if !n.is_power_of_two() {
            return Err(Error::BadPermutation(format!(
                "length {n} is not a power of two"
            )));
        }
        let mut inverse = vec![u64::MAX; forward.len()];
        for (i, &v) in forward.iter().enumerate() {
            if v >= n || inverse[v as usize] != u64::MAX {
                return Err(Error::BadPermutation(format!(
                    "array of length {n} is not a bijection"
                )));
            }
            inverse[v as usize] = i as u64;
        }
        Ok(CoordinatePermutation { forward, inverse })
    }

    pub fn identity(len: usize) -> Self {
        CoordinatePermutation {
            forward: (0..len as u64).collect(),
            inverse: (0..len as u64).collect(),
        }
    }

    pub fn apply(&self, v: u64) -> u64 {
        self.forward[v as usize]
    }

    pub fn apply_inverse(&self, v: u64) -> u64 {
        self.inverse[v as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &v)| i as u64 == v)
    }
}

/// How one stage permutes the rank-`m_s` cube addresses.
#[derive(Clone, Debug)]
pub enum StagePermutation {
    Identity,
    /// Acts coordinatewise: the product subgroup.
    Product(Vec<CoordinatePermutation>),
    /// An arbitrary bijection of the d-dimensional address set. Only the
    /// coefficient formulas are guaranteed for these.
    General {
        forward: HashMap<Vec<u64>, Vec<u64>>,
        inverse: HashMap<Vec<u64>, Vec<u64>>,
    },
}

/// Per-stage permutations; unspecified stages act as the identity.
#[derive(Clone, Debug, Default)]
pub struct PermutationFamily {
    stages: HashMap<u32, StagePermutation>,
}

#[derive(Debug, Deserialize)]
struct PermSpecEntry {
    stage: u32,
    coordinate: usize,
    perm: Vec<u64>,
}

impl PermutationFamily {
    pub fn identity() -> Self {
        PermutationFamily::default()
    }

    pub fn is_identity(&self) -> bool {
        self.stages.values().all(|p| match p {
            StagePermutation::Identity => true,
            StagePermutation::Product(ps) => ps.iter().all(CoordinatePermutation::is_identity),
            StagePermutation::General { .. } => false,
        })
    }

    /// True when every stage acts coordinatewise.
    pub fn is_product(&self) -> bool {
        !self
            .stages
            .values()
            .any(|p| matches!(p, StagePermutation::General { .. }))
    }

    /// Installs a product permutation for one stage.
    pub fn set_product_stage(
        &mut self,
        stage: u32,
        perms: Vec<CoordinatePermutation>,
        seq: &StageSequence,
    ) -> Result<()> {
        let m = seq.rank_unbounded(stage)?;
        if m > PERM_TABLE_BITS {
            return Err(Error::BadPermutation(format!(
                "stage {stage} addresses 2^{m} cubes per axis; too large to tabulate"
            )));
        }
        let want = 1usize << m;
        for p in &perms {
            if p.forward.len() != want {
                return Err(Error::BadPermutation(format!(
                    "stage {stage} needs permutations of length {want}, got {}",
                    p.forward.len()
                )));
            }
        }
        self.stages.insert(stage, StagePermutation::Product(perms));
        Ok(())
    }

    /// Installs an arbitrary (not necessarily product-form) stage bijection.
    /// Convergence-side evaluators reject such families; only the
    /// coefficient formulas remain available.
    pub fn set_unrestricted_stage(
        &mut self,
        stage: u32,
        map: HashMap<Vec<u64>, Vec<u64>>,
        dimension: usize,
        seq: &StageSequence,
    ) -> Result<()> {
        let m = seq.rank_unbounded(stage)?;
        if m * dimension as u64 > ENUMERATION_CAP_BITS {
            return Err(Error::BadPermutation(format!(
                "stage {stage} address space too large for a general table"
            )));
        }
        let domain = 1u64 << (m * dimension as u64);
        if map.len() as u64 != domain {
            return Err(Error::BadPermutation(format!(
                "general stage map must cover all {domain} addresses"
            )));
        }
        let mut inverse = HashMap::with_capacity(map.len());
        let side = 1u64 << m;
        for (k, v) in &map {
            if k.len() != dimension
                || v.len() != dimension
                || k.iter().any(|&x| x >= side)
                || v.iter().any(|&x| x >= side)
            {
                return Err(Error::BadPermutation("address outside the stage domain".into()));
            }
            if inverse.insert(v.clone(), k.clone()).is_some() {
                return Err(Error::BadPermutation("general stage map is not injective".into()));
            }
        }
        self.stages
            .insert(stage, StagePermutation::General { forward: map, inverse });
        Ok(())
    }

    /// Parses the JSON permutation file: a list of
    /// `{"stage": s, "coordinate": j, "perm": [...]}` entries (1-based
    /// coordinates); entries must be bijections of the stage address range.
    pub fn from_spec_reader<R: Read>(
        reader: R,
        dimension: usize,
        seq: &StageSequence,
    ) -> Result<Self> {
        let entries: Vec<PermSpecEntry> = serde_json::from_reader(reader)?;
        let mut grouped: HashMap<u32, Vec<Option<CoordinatePermutation>>> = HashMap::new();
        for e in entries {
            if e.coordinate == 0 || e.coordinate > dimension {
                return Err(Error::BadPermutation(format!(
                    "coordinate {} out of 1..={dimension}",
                    e.coordinate
                )));
            }
            let m = seq.rank_unbounded(e.stage)?;
            if m > PERM_TABLE_BITS {
                return Err(Error::BadPermutation(format!(
                    "stage {} too deep for an explicit table",
                    e.stage
                )));
            }
            if e.perm.len() as u64 != 1u64 << m {
                return Err(Error::BadPermutation(format!(
                    "stage {} expects length {}, got {}",
                    e.stage,
                    1u64 << m,
                    e.perm.len()
                )));
            }
            let slot = grouped
                .entry(e.stage)
                .or_insert_with(|| vec![None; dimension]);
            if slot[e.coordinate - 1].is_some() {
                return Err(Error::BadPermutation(format!(
                    "duplicate entry for stage {} coordinate {}",
                    e.stage, e.coordinate
                )));
            }
            slot[e.coordinate - 1] = Some(CoordinatePermutation::new(e.perm)?);
        }
        let mut family = PermutationFamily::identity();
        for (stage, slots) in grouped {
            let m = seq.rank_unbounded(stage)?;
            let len = 1usize << m;
            let perms = slots
                .into_iter()
                .map(|p| p.unwrap_or_else(|| CoordinatePermutation::identity(len)))
                .collect();
            family.set_product_stage(stage, perms, seq)?;
        }
        Ok(family)
    }

    /// Uniformly random product permutations for stages `2..=max_stage`
    /// (stage 1 has a single address and is always the identity).
    pub fn random_product<R: rand::Rng + ?Sized>(
        rng: &mut R,
        dimension: usize,
        seq: &StageSequence,
        max_stage: u32,
    ) -> Result<Self> {
        use rand::seq::SliceRandom;
        let mut family = PermutationFamily::identity();
        for s in 2..=max_stage {
            let m = seq.rank_unbounded(s)?;
            if m > PERM_TABLE_BITS {
                break;
            }
            let mut perms = Vec::with_capacity(dimension);
            for _ in 0..dimension {
                let mut arr: Vec<u64> = (0..(1u64 << m)).collect();
                arr.shuffle(rng);
                perms.push(CoordinatePermutation::new(arr)?);
            }
            family.set_product_stage(s, perms, seq)?;
        }
        Ok(family)
    }

    fn to_u64s(v: &[BigUint]) -> Result<Vec<u64>> {
        v.iter()
            .map(|x| {
                x.to_u64()
                    .ok_or_else(|| Error::BadPermutation("address exceeds table width".into()))
            })
            .collect()
    }

    /// `pi_s(m)`.
    pub fn apply(&self, stage: u32, m: &[BigUint]) -> Result<Vec<BigUint>> {
        match self.stages.get(&stage) {
            None | Some(StagePermutation::Identity) => Ok(m.to_vec()),
            Some(StagePermutation::Product(ps)) => {
                let v = Self::to_u64s(m)?;
                Ok(v.iter()
                    .zip(ps)
                    .map(|(&x, p)| BigUint::from(p.apply(x)))
                    .collect())
            }
            Some(StagePermutation::General { forward, .. }) => {
                let v = Self::to_u64s(m)?;
                let out = forward
                    .get(&v)
                    .ok_or_else(|| Error::BadPermutation("address missing from stage map".into()))?;
                Ok(out.iter().map(|&x| BigUint::from(x)).collect())
            }
        }
    }

    /// `pi_s^{-1}(p)`.
    pub fn apply_inverse(&self, stage: u32, p: &[BigUint]) -> Result<Vec<BigUint>> {
        match self.stages.get(&stage) {
            None | Some(StagePermutation::Identity) => Ok(p.to_vec()),
            Some(StagePermutation::Product(ps)) => {
                let v = Self::to_u64s(p)?;
                Ok(v.iter()
                    .zip(ps)
                    .map(|(&x, q)| BigUint::from(q.apply_inverse(x)))
                    .collect())
            }
            Some(StagePermutation::General { inverse, .. }) => {
                let v = Self::to_u64s(p)?;
                let out = inverse
                    .get(&v)
                    .ok_or_else(|| Error::BadPermutation("address missing from stage map".into()))?;
                Ok(out.iter().map(|&x| BigUint::from(x)).collect())
            }
        }
    }

    /// The coordinatewise permutation at `(stage, coordinate)` when the
    /// stage acts in product form (`None` means identity).
    pub fn coordinate_perm(&self, stage: u32, j: usize) -> Result<Option<&CoordinatePermutation>> {
        match self.stages.get(&stage) {
            None | Some(StagePermutation::Identity) => Ok(None),
            Some(StagePermutation::Product(ps)) => Ok(Some(&ps[j])),
            Some(StagePermutation::General { .. }) => Err(Error::BadPermutation(
                "stage permutation is not of product form".into(),
            )),
        }
    }
}

/// Configuration of the staged set construction: dimension, stage cap, and
/// the permutation family (identity by default).
#[derive(Clone)]
pub struct MSetConfig {
    dimension: usize,
    seq: StageSequence,
    perms: Arc<PermutationFamily>,
}

impl MSetConfig {
    pub fn new(dimension: usize, stages: u32) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(MSetConfig {
            dimension,
            seq: StageSequence::new(stages)?,
            perms: Arc::new(PermutationFamily::identity()),
        })
    }

    pub fn with_perms(mut self, perms: PermutationFamily) -> Self {
        self.perms = Arc::new(perms);
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn stage_count(&self) -> u32 {
        self.seq.stage_count()
    }

    pub fn sequence(&self) -> &StageSequence {
        &self.seq
    }

    pub fn perms(&self) -> &PermutationFamily {
        &self.perms
    }

    /// Depth a point needs for the stage-`s` membership test.
    pub fn required_depth(&self, s: u32) -> Result<u32> {
        Ok(rank_u32(2 * self.seq.rank(s)? + 1)?)
    }

    /// Largest rank at which the set construction is exact with the
    /// configured number of stages.
    pub fn max_exact_rank(&self) -> Result<u32> {
        rank_u32(2 * self.seq.rank_unbounded(self.stage_count() + 1)?)
    }

    /// Stage-`s` membership of a point: inside each rank-`2 m_s` cube
    /// `(m, m')`, keep the points whose Rademacher product at bit `2 m_s`
    /// equals `W^(m_s)[pi_s(m), m']`.
    pub fn point_in_stage_set(&self, g: &DyadicPoint, s: u32) -> Result<bool> {
        let ms = self.seq.rank(s)?;
        let ms32 = rank_u32(ms)?;
        if g.dimension() != self.dimension {
            return Err(Error::DimensionMismatch(g.dimension(), self.dimension));
        }
        if g.depth() < 2 * ms32 + 1 {
            return Err(Error::DepthTooSmall { needed: 2 * ms32 + 1, available: g.depth() });
        }
        let fine = g.prefix_index(2 * ms32)?;
        let side = BigUint::one() << ms;
        let mut m = Vec::with_capacity(self.dimension);
        let mut m_prime = Vec::with_capacity(self.dimension);
        for f in &fine {
            m.push(f / &side);
            m_prime.push(f % &side);
        }
        let shuffled = self.perms.apply(s, &m)?;
        let mut target = 1i32;
        for (a, b) in shuffled.iter().zip(&m_prime) {
            target *= walsh_entry(ms32, a, b)?;
        }
        let rad = rademacher(&vec![2 * ms32; self.dimension], g)?;
        Ok(rad == target)
    }

    /// Membership in the intersection of stages `1..=s` (trivially true for
    /// `s = 0`).
    pub fn point_in_partial_intersection(&self, g: &DyadicPoint, s: u32) -> Result<bool> {
        for t in 1..=s {
            if !self.point_in_stage_set(g, t)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Stage-`s` membership of a whole cube; the cube must be fine enough
    /// (rank at least `2 m_s + 1`), since the stage set is a union of cubes
    /// of exactly that rank.
    pub fn cube_in_stage_set(&self, cube: &DyadicCube, s: u32) -> Result<bool> {
        let needed = self.required_depth(s)?;
        if cube.rank() < needed {
            return Err(Error::RankExceedsDepth { rank: needed, depth: cube.rank() });
        }
        let probe = cube.ancestor(needed)?.min_point(needed)?;
        self.point_in_stage_set(&probe, s)
    }

    /// Whole-cube membership in the intersection of stages `1..=s`.
    pub fn cube_in_partial_intersection(&self, cube: &DyadicCube, s: u32) -> Result<bool> {
        for t in (1..=s).rev() {
            if !self.cube_in_stage_set(cube, t)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether a cube meets the full set. Only the stages already resolved
    /// at the cube's rank can exclude it: every surviving finer stage keeps
    /// half of each deeper cube alive.
    pub fn cube_meets_set(&self, cube: &DyadicCube) -> Result<bool> {
        if cube.dimension() != self.dimension {
            return Err(Error::DimensionMismatch(cube.dimension(), self.dimension));
        }
        let mut s = 1u32;
        loop {
            let ms = self.seq.rank_unbounded(s)?;
            let resolution = rank_u32(2 * ms + 1)?;
            if resolution > cube.rank() {
                return Ok(true);
            }
            if s > self.stage_count() {
                return Err(Error::StageOutOfRange { stage: s, max: self.stage_count() });
            }
            if !self.cube_in_stage_set(cube, s)? {
                return Ok(false);
            }
            s += 1;
        }
    }

    /// The canonical quasimeasure carried by the configured set.
    pub fn tau(&self) -> Result<Quasimeasure> {
        let cfg = self.clone();
        let meets: MeetsPredicate = Arc::new(move |c: &DyadicCube| cfg.cube_meets_set(c));
        Quasimeasure::from_closed_set(self.dimension, Some(self.max_exact_rank()?), meets)
    }

    /// All cubes of rank `2 m_s + 1` lying inside the stage-`s` partial
    /// intersection.
    pub fn partial_intersection_cubes(&self, s: u32) -> Result<Vec<DyadicCube>> {
        let rank = self.required_depth(s)?;
        let mut out = Vec::new();
        for cube in DyadicCube::all_at_rank(self.dimension, rank)? {
            if self.cube_in_partial_intersection(&cube, s)? {
                out.push(cube);
            }
        }
        Ok(out)
    }

    /// Measure of the stage-`s` partial intersection, computed by cube
    /// enumeration. Equals `2^{-s}`.
    pub fn partial_intersection_measure(&self, s: u32) -> Result<DyadicRational> {
        let cubes = self.partial_intersection_cubes(s)?;
        let mut total = DyadicRational::zero();
        for c in &cubes {
            total = &total + &c.measure();
        }
        Ok(total)
    }

    /// Closed-form series coefficient of the canonical quasimeasure.
    pub fn coefficient(&self, n: &WalshIndex) -> Result<DyadicRational> {
        match decompose_block_index(n, &self.seq) {
            BlockPosition::Zero => Ok(DyadicRational::one()),
            BlockPosition::OffBlock => Ok(DyadicRational::zero()),
            BlockPosition::InBlock(dec) => {
                let s = dec.stage;
                if s > self.stage_count() {
                    return Err(Error::StageOutOfRange { stage: s, max: self.stage_count() });
                }
                let ms32 = rank_u32(dec.scale / 2)?;
                let u = self.perms.apply_inverse(s, &dec.p)?;
                let alive_cube = DyadicCube::new(ms32, u.clone())?;
                if s > 1 && !self.cube_in_partial_intersection(&alive_cube, s - 1)? {
                    return Ok(DyadicRational::zero());
                }
                let mut sign = 1i32;
                for (q, uj) in dec.q.iter().zip(&u) {
                    sign *= walsh_entry(ms32, q, uj)?;
                }
                Ok(DyadicRational::signed_pow2(sign, self.magnitude_exponent(s)?))
            }
        }
    }

    /// `s - 1 - d m_s`, the binary exponent of the block-`s` coefficient
    /// magnitude.
    pub fn magnitude_exponent(&self, s: u32) -> Result<i64> {
        let ms = self.seq.rank(s)? as i64;
        Ok(s as i64 - 1 - self.dimension as i64 * ms)
    }

    /// Closed-form local coefficient on a rank-`m_s` cube: nonzero only on
    /// the single cube addressed by `pi_s^{-1}(p)` when that cube survives
    /// the earlier stages.
    pub fn coefficient_on_cube(&self, n: &WalshIndex, cube: &DyadicCube) -> Result<DyadicRational> {
        let dec = match decompose_block_index(n, &self.seq) {
            BlockPosition::InBlock(dec) => dec,
            _ => return Err(Error::NotInBlock),
        };
        let s = dec.stage;
        if s > self.stage_count() {
            return Err(Error::StageOutOfRange { stage: s, max: self.stage_count() });
        }
        let ms32 = rank_u32(self.seq.rank(s)?)?;
        if cube.rank() != ms32 {
            return Err(Error::RankNotStageShaped { rank: cube.rank() });
        }
        let shuffled = self.perms.apply(s, cube.index())?;
        if shuffled != dec.p {
            return Ok(DyadicRational::zero());
        }
        if s > 1 && !self.cube_in_partial_intersection(cube, s - 1)? {
            return Ok(DyadicRational::zero());
        }
        let mut sign = 1i32;
        for (q, mj) in dec.q.iter().zip(cube.index()) {
            sign *= walsh_entry(ms32, q, mj)?;
        }
        Ok(DyadicRational::signed_pow2(sign, self.magnitude_exponent(s)?))
    }

    /// Closed-form coefficient of the restriction of the quasimeasure to a
    /// stage-shaped window cube (rank `m_{s0}`), valid for block stages
    /// `s > s0`; everything else must go through the brute-force integral.
    pub fn restricted_coefficient(
        &self,
        n: &WalshIndex,
        window: &DyadicCube,
    ) -> Result<DyadicRational> {
        let s0 = self
            .stage_of_rank(window.rank())
            .ok_or(Error::RankNotStageShaped { rank: window.rank() })?;
        let dec = match decompose_block_index(n, &self.seq) {
            BlockPosition::InBlock(dec) => dec,
            _ => return Err(Error::NotInBlock),
        };
        let s = dec.stage;
        if s > self.stage_count() {
            return Err(Error::StageOutOfRange { stage: s, max: self.stage_count() });
        }
        if s <= s0 {
            return Err(Error::InvalidArgument(format!(
                "restricted closed form needs block stage {s} above window stage {s0}"
            )));
        }
        let ms32 = rank_u32(self.seq.rank(s)?)?;
        let u = self.perms.apply_inverse(s, &dec.p)?;
        let alive_cube = DyadicCube::new(ms32, u.clone())?;
        if !window.contains_cube(&alive_cube) {
            return Ok(DyadicRational::zero());
        }
        if s > 1 && !self.cube_in_partial_intersection(&alive_cube, s - 1)? {
            return Ok(DyadicRational::zero());
        }
        let mut sign = 1i32;
        for (q, uj) in dec.q.iter().zip(&u) {
            sign *= walsh_entry(ms32, q, uj)?;
        }
        Ok(DyadicRational::signed_pow2(sign, self.magnitude_exponent(s)?))
    }

    /// The stage `s` with `m_s == rank`, if any.
    pub fn stage_of_rank(&self, rank: u32) -> Option<u32> {
        self.seq
            .values()
            .iter()
            .position(|&m| m == rank as u64)
            .map(|i| i as u32 + 1)
    }

    /// Closed-form value of the canonical quasimeasure on a stage-shaped
    /// cube: rank-`m_s` cubes carry `2^{s-1-d m_s}` inside the stage-(s-1)
    /// partial intersection, rank-`2 m_s + 1` cubes carry
    /// `2^{s - d(2 m_s + 1)}` inside the stage-s partial intersection, and
    /// both vanish outside.
    pub fn stage_cube_value(&self, cube: &DyadicCube) -> Result<DyadicRational> {
        let rank = cube.rank();
        if let Some(s) = self.stage_of_rank(rank) {
            let alive = s == 1 || self.cube_in_partial_intersection(cube, s - 1)?;
            return Ok(if alive {
                DyadicRational::pow2(self.magnitude_exponent(s)?)
            } else {
                DyadicRational::zero()
            });
        }
        for s in 1..=self.stage_count() {
            let ms = self.seq.rank(s)?;
            if rank as u64 == 2 * ms + 1 {
                let alive = self.cube_in_partial_intersection(cube, s)?;
                let e = s as i64 - self.dimension as i64 * (2 * ms as i64 + 1);
                return Ok(if alive { DyadicRational::pow2(e) } else { DyadicRational::zero() });
            }
        }
        Err(Error::RankNotStageShaped { rank })
    }

    /// First rank at which the cube around `g` stops meeting the set;
    /// `None` when `g` stays on the set down to the inspected depth.
    pub fn off_set_rank(&self, g: &DyadicPoint, max_rank: u32) -> Result<Option<u32>> {
        for w in 0..=max_rank.min(g.depth()) {
            if !self.cube_meets_set(&DyadicCube::of_point(g, w)?)? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }
}

/// The block coordinates of an index: `n = 2^{2 m_s} 1 + 2^{m_s} p + q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub stage: u32,
    /// `2 m_s`: the binary scale of the block.
    pub scale: u64,
    pub p: Vec<BigUint>,
    pub q: Vec<BigUint>,
}

impl BlockDecomposition {
    /// Reassembles the Walsh index.
    pub fn index(&self) -> WalshIndex {
        let ms = self.scale / 2;
        let comps = self
            .p
            .iter()
            .zip(&self.q)
            .map(|(p, q)| (BigUint::one() << self.scale) + (p << ms) + q)
            .collect();
        WalshIndex::new(comps).expect("nonempty")
    }
}

/// Where an index sits relative to the diagonal blocks `B_{2 m_s}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockPosition {
    /// The all-zero index (its coefficient is the total mass).
    Zero,
    /// Inside the stage-`s` diagonal block.
    InBlock(BlockDecomposition),
    /// Neither zero nor inside any diagonal block; the coefficient vanishes.
    OffBlock,
}

/// Splits `n` into block coordinates when every component lies in the same
/// diagonal block.
pub fn decompose_block_index(n: &WalshIndex, seq: &StageSequence) -> BlockPosition {
    if n.is_zero() {
        return BlockPosition::Zero;
    }
    let Some(stage) = seq.block_stage_of(n) else {
        return BlockPosition::OffBlock;
    };
    let ms = seq
        .rank_unbounded(stage)
        .expect("stage found by block scan");
    let side = BigUint::one() << ms;
    let top = BigUint::one() << (2 * ms);
    let mut p = Vec::with_capacity(n.dimension());
    let mut q = Vec::with_capacity(n.dimension());
    for c in n.components() {
        let rest = c - &top;
        p.push(&rest / &side);
        q.push(rest % &side);
    }
    BlockPosition::InBlock(BlockDecomposition { stage, scale: 2 * ms, p, q })
}

/// The coefficient family of the configured null series as a series source:
/// support is `{0}` plus the diagonal blocks of the configured stages.
pub struct NullSeriesCoefficients {
    cfg: MSetConfig,
}

impl NullSeriesCoefficients {
    pub fn new(cfg: MSetConfig) -> Self {
        NullSeriesCoefficients { cfg }
    }

    fn block_indices(&self, s: u32) -> Result<Vec<WalshIndex>> {
        let d = self.cfg.dimension();
        let ms = self.cfg.sequence().rank(s)?;
        let bits = 2 * ms * d as u64;
        if bits > ENUMERATION_CAP_BITS {
            return Err(Error::EnumerationTooLarge { bits, cap: ENUMERATION_CAP_BITS });
        }
        let lo = 1u64 << (2 * ms);
        let width = 1u64 << (2 * ms);
        let mut out = Vec::new();
        let mut counter = vec![0u64; d];
        loop {
            out.push(WalshIndex::from_u64s(
                &counter.iter().map(|&o| lo + o).collect::<Vec<_>>(),
            ));
            let mut j = d;
            loop {
                if j == 0 {
                    return Ok(out);
                }
                j -= 1;
                counter[j] += 1;
                if counter[j] < width {
                    break;
                }
                counter[j] = 0;
            }
        }
    }
}

impl CoefficientSource for NullSeriesCoefficients {
    fn dimension(&self) -> usize {
        self.cfg.dimension()
    }

    fn coefficient(&self, n: &WalshIndex) -> Result<DyadicRational> {
        self.cfg.coefficient(n)
    }

    fn support_below(&self, k: u32) -> Result<Vec<WalshIndex>> {
        let mut out = vec![WalshIndex::zero(self.cfg.dimension())];
        for s in 1..=self.cfg.stage_count() {
            let ms = self.cfg.sequence().rank(s)?;
            if 2 * ms + 1 <= k as u64 {
                out.extend(self.block_indices(s)?);
            }
        }
        Ok(out)
    }

    fn support_all(&self) -> Result<Vec<WalshIndex>> {
        let mut out = vec![WalshIndex::zero(self.cfg.dimension())];
        for s in 1..=self.cfg.stage_count() {
            out.extend(self.block_indices(s)?);
        }
        Ok(out)
    }
}
