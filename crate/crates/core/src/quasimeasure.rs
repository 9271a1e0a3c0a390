//! Quasimeasures: finitely additive set functions on the semiring of dyadic
//! cubes.
//!
//! A set function on cubes is a quasimeasure exactly when its value on every
//! cube equals the sum over the cube's 2^d children. The module provides
//!
//! * the canonical nonnegative quasimeasure attached to a closed set (equal
//!   split of mass among the children that meet the set),
//! * restriction to a window cube,
//! * Fourier-Walsh coefficients, global and localized to a cube,
//! * partial sums of the generated series through the kernel integral
//!   representation (both translation-of-measure and translation-of-kernel
//!   forms),
//! * the series-to-quasimeasure direction (value on a cube from averaged
//!   truncated sums), and
//! * finite-depth support scans.
//!
//! Evaluation is lazy and memoized per cube; deep single branches stay cheap
//! even where full enumeration of a rank is impossible.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};


use num_bigint::BigUint;

use crate::dirichlet::{dirichlet_interval, dirichlet_on_cube, KernelPath};
use crate::error::{Error, Result};
use crate::group::{CubeRelation, DyadicCube, DyadicPoint};
use crate::rational::DyadicRational;
use crate::walsh::{walsh_on_cube, WalshIndex};

/// A predicate telling whether a cube meets a fixed closed set. It must be
/// monotone (a meeting cube has a meeting parent) and consistent (a meeting
/// cube has at least one meeting child).
pub type MeetsPredicate = Arc<dyn Fn(&DyadicCube) -> Result<bool> + Send + Sync>;

/// Coefficients of a Walsh series with enumerable support.
pub trait CoefficientSource: Send + Sync {
    fn dimension(&self) -> usize;

    /// The exact coefficient at a multi-index.
    fn coefficient(&self, n: &WalshIndex) -> Result<DyadicRational>;

    /// Every support index lying strictly below `2^k * 1`, in ascending
    /// order. Errors when that set is not enumerable at reasonable cost.
    fn support_below(&self, k: u32) -> Result<Vec<WalshIndex>>;

    /// The entire declared support, when finite.
    fn support_all(&self) -> Result<Vec<WalshIndex>> {
        Err(Error::InvalidArgument("support is not finitely enumerable".into()))
    }
}

/// The series with a_0 = 1 and no other term; generates Haar measure.
pub struct UnitCoefficient {
    pub dimension: usize,
}

impl CoefficientSource for UnitCoefficient {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn coefficient(&self, n: &WalshIndex) -> Result<DyadicRational> {
        Ok(if n.is_zero() { DyadicRational::one() } else { DyadicRational::zero() })
    }

    fn support_below(&self, _k: u32) -> Result<Vec<WalshIndex>> {
        Ok(vec![WalshIndex::zero(self.dimension)])
    }

    fn support_all(&self) -> Result<Vec<WalshIndex>> {
        Ok(vec![WalshIndex::zero(self.dimension)])
    }
}

/// A finite table of coefficients, used to feed brute-force Fourier data
/// back into series evaluation.
pub struct TabulatedCoefficients {
    dimension: usize,
    entries: std::collections::BTreeMap<WalshIndex, DyadicRational>,
}

impl TabulatedCoefficients {
    pub fn new(dimension: usize) -> Self {
        TabulatedCoefficients { dimension, entries: Default::default() }
    }

    pub fn insert(&mut self, n: WalshIndex, value: DyadicRational) {
        if !value.is_zero() {
            self.entries.insert(n, value);
        }
    }
}

impl CoefficientSource for TabulatedCoefficients {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn coefficient(&self, n: &WalshIndex) -> Result<DyadicRational> {
        Ok(self.entries.get(n).cloned().unwrap_or_else(DyadicRational::zero))
    }

    fn support_below(&self, k: u32) -> Result<Vec<WalshIndex>> {
        Ok(self
            .entries
            .keys()
            .filter(|n| n.below_pow2(k))
            .cloned()
            .collect())
    }

    fn support_all(&self) -> Result<Vec<WalshIndex>> {
        Ok(self.entries.keys().cloned().collect())
    }
}

enum Rule {
    Haar,
    ClosedSet { meets: MeetsPredicate },
    Restrict { base: Quasimeasure, window: DyadicCube },
    Series { coeffs: Arc<dyn CoefficientSource> },
}

struct Inner {
    dimension: usize,
    max_rank: Option<u32>,
    nonnegative: bool,
    rule: Rule,
    memo: RwLock<HashMap<DyadicCube, DyadicRational>>,
}

/// A lazily evaluated, memoized quasimeasure. Cloning shares the cache.
#[derive(Clone)]
pub struct Quasimeasure {
    inner: Arc<Inner>,
}

impl Quasimeasure {
    fn from_rule(dimension: usize, max_rank: Option<u32>, nonnegative: bool, rule: Rule) -> Self {
        Quasimeasure {
            inner: Arc::new(Inner {
                dimension,
                max_rank,
                nonnegative,
                rule,
                memo: RwLock::new(HashMap::new()),
            }),
        }
    }

    /// Normalized Haar measure on `G^d`.
    pub fn haar(dimension: usize) -> Self {
        Self::from_rule(dimension, None, true, Rule::Haar)
    }

    /// The canonical quasimeasure of a nonempty closed set: total mass 1,
    /// and each cube's mass splits equally among its children meeting the
    /// set. `meets` must return true on the whole group.
    pub fn from_closed_set(
        dimension: usize,
        max_rank: Option<u32>,
        meets: MeetsPredicate,
    ) -> Result<Self> {
        if !meets(&DyadicCube::root(dimension))? {
            return Err(Error::InconsistentPredicate(
                "the whole group must meet a nonempty closed set".into(),
            ));
        }
        Ok(Self::from_rule(dimension, max_rank, true, Rule::ClosedSet { meets }))
    }

    /// The quasimeasure generated by a Walsh series: its value on a rank-k
    /// cube is `2^(-kd)` times the truncated sum at `2^k * 1` on the cube.
    pub fn from_series(coeffs: Arc<dyn CoefficientSource>, max_rank: Option<u32>) -> Self {
        let dimension = coeffs.dimension();
        Self::from_rule(dimension, max_rank, false, Rule::Series { coeffs })
    }

    /// Restriction to a window: the value on a cube is the value of the
    /// intersection with the window (nested-or-disjoint makes this a cube
    /// again, or empty).
    pub fn restrict(&self, window: DyadicCube) -> Result<Quasimeasure> {
        if window.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch(window.dimension(), self.dimension()));
        }
        Ok(Self::from_rule(
            self.dimension(),
            self.inner.max_rank,
            self.inner.nonnegative,
            Rule::Restrict { base: self.clone(), window },
        ))
    }

    pub fn dimension(&self) -> usize {
        self.inner.dimension
    }

    pub fn max_rank(&self) -> Option<u32> {
        self.inner.max_rank
    }

    /// Whether the construction guarantees nonnegative values (then a zero
    /// on a cube forces zero on every descendant).
    pub fn is_nonnegative(&self) -> bool {
        self.inner.nonnegative
    }

    fn check_rank(&self, rank: u32) -> Result<()> {
        if let Some(max) = self.inner.max_rank {
            if rank > max {
                return Err(Error::RankBeyondRule { rank, max_rank: max });
            }
        }
        Ok(())
    }

    /// The value on a cube. Deterministic and memoized.
    pub fn value(&self, cube: &DyadicCube) -> Result<DyadicRational> {
        if cube.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch(cube.dimension(), self.dimension()));
        }
        self.check_rank(cube.rank())?;
        if let Some(hit) = self.inner.memo.read().expect("memo lock").get(cube) {
            return Ok(hit.clone());
        }
        let value = match &self.inner.rule {
            Rule::Haar => cube.measure(),
            Rule::ClosedSet { meets } => self.closed_set_value(meets, cube)?,
            Rule::Restrict { base, window } => match cube.relation(window) {
                CubeRelation::Equal | CubeRelation::Inside => base.value(cube)?,
                CubeRelation::Contains => base.value(window)?,
                CubeRelation::Disjoint => DyadicRational::zero(),
            },
            Rule::Series { coeffs } => series_value_on_cube(coeffs.as_ref(), cube)?,
        };
        self.inner
            .memo
            .write()
            .expect("memo lock")
            .insert(cube.clone(), value.clone());
        Ok(value)
    }

    fn closed_set_value(&self, meets: &MeetsPredicate, cube: &DyadicCube) -> Result<DyadicRational> {
        if cube.rank() == 0 {
            return Ok(DyadicRational::one());
        }
        if !meets(cube)? {
            return Ok(DyadicRational::zero());
        }
        let parent = cube.parent().expect("rank > 0");
        if !meets(&parent)? {
            return Err(Error::InconsistentPredicate(format!(
                "cube {cube} meets the set but its parent does not"
            )));
        }
        let parent_value = self.value(&parent)?;
        let mut meeting = 0u64;
        for child in parent.children() {
            if meets(&child)? {
                meeting += 1;
            }
        }
        debug_assert!(meeting >= 1);
        parent_value
            .div_exact(meeting)
            .ok_or(Error::NonDyadicValue(meeting))
    }
}

/// Value of the series on a cube: `2^(-kd) * sum_{n < 2^k 1} a_n W_n(cube)`.
pub fn series_value_on_cube(
    coeffs: &dyn CoefficientSource,
    cube: &DyadicCube,
) -> Result<DyadicRational> {
    let k = cube.rank();
    let d = cube.dimension();
    let mut acc = DyadicRational::zero();
    for n in coeffs.support_below(k)? {
        let a = coeffs.coefficient(&n)?;
        if a.is_zero() {
            continue;
        }
        let sign = walsh_on_cube(&n, cube)?;
        acc = &acc + &(a * DyadicRational::from_integer(sign as i64));
    }
    Ok(acc.times_pow2(-(k as i64) * d as i64))
}

/// Brute-force Fourier-Walsh coefficient at evaluation rank `k`: the finite
/// sum of `W_n * tau` over all rank-k cubes. Independent of `k` as long as
/// `n < 2^k * 1`.
pub fn fourier_coefficient(
    tau: &Quasimeasure,
    n: &WalshIndex,
    k: u32,
) -> Result<DyadicRational> {
    if !n.below_pow2(k) {
        return Err(Error::NotConstantOnCube { rank: k });
    }
    let mut acc = DyadicRational::zero();
    for cube in DyadicCube::all_at_rank(tau.dimension(), k)? {
        let t = tau.value(&cube)?;
        if t.is_zero() {
            continue;
        }
        let sign = walsh_on_cube(n, &cube)?;
        acc = &acc + &(t * DyadicRational::from_integer(sign as i64));
    }
    Ok(acc)
}

/// Local Fourier-Walsh coefficient on a window cube, evaluated by summing
/// over the rank-k subcubes of the window.
pub fn local_coefficient(
    tau: &Quasimeasure,
    n: &WalshIndex,
    window: &DyadicCube,
    k: u32,
) -> Result<DyadicRational> {
    if !n.below_pow2(k) {
        return Err(Error::NotConstantOnCube { rank: k });
    }
    let mut acc = DyadicRational::zero();
    for cube in window.subcubes_at_rank(k)? {
        let t = tau.value(&cube)?;
        if t.is_zero() {
            continue;
        }
        let sign = walsh_on_cube(n, &cube)?;
        acc = &acc + &(t * DyadicRational::from_integer(sign as i64));
    }
    Ok(acc)
}

/// Which side of the kernel integral representation to translate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartialSumRoute {
    /// Sum of `tau(g + cube) * D_N(cube)`.
    TranslateMeasure,
    /// Sum of `tau(cube) * D_N(g + cube)`.
    TranslateKernel,
}

/// Partial sum `S_N(g)` of the series generated by `tau`, computed through
/// the kernel integral representation at evaluation rank `k`
/// (`N <= 2^k * 1`). Both routes give the same value; tests assert it.
///
/// The translate-measure route tabulates the coordinate kernels once and
/// walks only their joint support, so it stays cheap when the kernel
/// concentrates. The translate-kernel route is an independent
/// implementation: it enumerates every rank-k cube and evaluates the kernel
/// on the translated cube directly.
pub fn partial_sum(
    tau: &Quasimeasure,
    n: &WalshIndex,
    g: &DyadicPoint,
    k: u32,
    route: PartialSumRoute,
) -> Result<DyadicRational> {
    if !n.is_positive() {
        return Err(Error::InvalidArgument("partial sum order must be positive".into()));
    }
    if g.dimension() != tau.dimension() || n.dimension() != tau.dimension() {
        return Err(Error::DimensionMismatch(g.dimension(), tau.dimension()));
    }
    match route {
        PartialSumRoute::TranslateMeasure => partial_sum_tabulated(tau, n, g, k),
        PartialSumRoute::TranslateKernel => {
            let mut acc = DyadicRational::zero();
            for cube in DyadicCube::all_at_rank(tau.dimension(), k)? {
                let kernel =
                    dirichlet_on_cube(n, &cube.translate(g)?, KernelPath::RademacherSplit)?;
                if kernel == 0 {
                    continue;
                }
                let t = tau.value(&cube)?;
                if t.is_zero() {
                    continue;
                }
                acc = &acc + &(t * DyadicRational::from_i128(kernel));
            }
            Ok(acc)
        }
    }
}

/// Cap on the per-coordinate kernel table length (2^k entries each).
const KERNEL_TABLE_CAP: u32 = 26;

fn partial_sum_tabulated(
    tau: &Quasimeasure,
    n: &WalshIndex,
    g: &DyadicPoint,
    k: u32,
) -> Result<DyadicRational> {
    use num_traits::ToPrimitive;
    if k > KERNEL_TABLE_CAP {
        return Err(Error::EnumerationTooLarge { bits: k as u64, cap: KERNEL_TABLE_CAP as u64 });
    }
    let d = tau.dimension();
    let prefix: Vec<u64> = g
        .prefix_index(k)?
        .iter()
        .map(|x| x.to_u64().expect("prefix fits"))
        .collect();
    // per-coordinate kernel support: indices where the coordinate kernel
    // does not vanish, with their values
    let mut support: Vec<Vec<(u64, i64)>> = Vec::with_capacity(d);
    let mut cost: u64 = 1;
    for nj in n.components() {
        let order = nj.to_u64().ok_or(Error::KernelOverflow)?;
        let mut list = Vec::new();
        for idx in 0..(1u64 << k) {
            let v = dirichlet_interval(order, k, &BigUint::from(idx), KernelPath::RademacherSplit)?;
            if v != 0 {
                list.push((idx, v));
            }
        }
        cost = cost.saturating_mul(list.len() as u64);
        support.push(list);
    }
    if cost > (1 << KERNEL_TABLE_CAP) {
        return Err(Error::EnumerationTooLarge { bits: 64 - cost.leading_zeros() as u64, cap: KERNEL_TABLE_CAP as u64 });
    }
    if support.iter().any(|l| l.is_empty()) {
        return Ok(DyadicRational::zero());
    }
    let mut acc = DyadicRational::zero();
    let mut pick = vec![0usize; d];
    loop {
        let mut kernel: i128 = 1;
        let mut index = Vec::with_capacity(d);
        for (j, &choice) in pick.iter().enumerate() {
            let (idx, v) = support[j][choice];
            kernel *= v as i128;
            index.push(BigUint::from(idx ^ prefix[j]));
        }
        let t = tau.value(&DyadicCube::new(k, index)?)?;
        if !t.is_zero() {
            acc = &acc + &(t * DyadicRational::from_i128(kernel));
        }
        let mut j = d;
        loop {
            if j == 0 {
                return Ok(acc);
            }
            j -= 1;
            pick[j] += 1;
            if pick[j] < support[j].len() {
                break;
            }
            pick[j] = 0;
        }
    }
}

/// Rank-`probe_rank` cubes that still carry mass when scanned down to
/// `scan_rank`: a finite-depth over-approximation of the support from above.
pub fn support_cubes(
    tau: &Quasimeasure,
    probe_rank: u32,
    scan_rank: u32,
) -> Result<Vec<DyadicCube>> {
    if scan_rank < probe_rank {
        return Err(Error::InvalidArgument("scan rank below probe rank".into()));
    }
    tau.check_rank(scan_rank)?;
    let mut out = Vec::new();
    for cube in DyadicCube::all_at_rank(tau.dimension(), probe_rank)? {
        if cube_carries_mass(tau, &cube, scan_rank)? {
            out.push(cube);
        }
    }
    Ok(out)
}

/// Whether any cube of rank up to `scan_rank` below (or equal to) `cube`
/// has a nonzero value. For nonnegative quasimeasures the scan stops at the
/// cube itself.
pub fn cube_carries_mass(tau: &Quasimeasure, cube: &DyadicCube, scan_rank: u32) -> Result<bool> {
    let v = tau.value(cube)?;
    if !v.is_zero() {
        return Ok(true);
    }
    // Nonnegative quasimeasures propagate zeros downward.
    if tau.is_nonnegative() || cube.rank() >= scan_rank {
        return Ok(false);
    }
    for child in cube.children() {
        if cube_carries_mass(tau, &child, scan_rank)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Exhaustively checks the children-additivity law on every cube of rank
/// below `max_rank`.
pub fn check_additivity(tau: &Quasimeasure, max_rank: u32) -> Result<()> {
    for k in 0..max_rank {
        for cube in DyadicCube::all_at_rank(tau.dimension(), k)? {
            let mut sum = DyadicRational::zero();
            for child in cube.children() {
                sum = &sum + &tau.value(&child)?;
            }
            let direct = tau.value(&cube)?;
            if sum != direct {
                return Err(Error::InvalidArgument(format!(
                    "additivity fails at {cube}: {direct} vs children {sum}"
                )));
            }
        }
    }
    Ok(())
}

/// The smallest rank `w` such that the rank-`w` cube around `g` carries no
/// mass down to `scan_rank` (for nonnegative quasimeasures: simply has value
/// zero). Returns `None` when even the deepest inspected cube carries mass.
pub fn vanishing_rank(tau: &Quasimeasure, g: &DyadicPoint, scan_rank: u32) -> Result<Option<u32>> {
    for w in 0..=scan_rank.min(g.depth()) {
        let cube = DyadicCube::of_point(g, w)?;
        if !cube_carries_mass(tau, &cube, scan_rank)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walsh::walsh_at_point;
    use num_bigint::BigUint;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point_mass_at_zero(d: usize) -> Quasimeasure {
        // the closed set {0}: a cube meets it iff its index is all zeros
        let meets: MeetsPredicate =
            Arc::new(|c: &DyadicCube| Ok(c.index().iter().all(|m| m.is_zero())));
        Quasimeasure::from_closed_set(d, None, meets).unwrap()
    }

    #[test]
    fn haar_value_is_the_measure() {
        let mu = Quasimeasure::haar(2);
        let c = DyadicCube::from_u64s(3, &[5, 2]).unwrap();
        assert_eq!(mu.value(&c).unwrap(), DyadicRational::pow2(-6));
        check_additivity(&mu, 4).unwrap();
    }

    #[test]
    fn whole_group_set_reproduces_haar() {
        let meets: MeetsPredicate = Arc::new(|_c: &DyadicCube| Ok(true));
        let tau = Quasimeasure::from_closed_set(2, None, meets).unwrap();
        for k in 0..4 {
            for cube in DyadicCube::all_at_rank(2, k).unwrap() {
                assert_eq!(tau.value(&cube).unwrap(), cube.measure());
            }
        }
    }

    #[test]
    fn point_mass_follows_one_branch() {
        let tau = point_mass_at_zero(2);
        for k in 0..5 {
            for cube in DyadicCube::all_at_rank(2, k).unwrap() {
                let expected = if cube.index().iter().all(|m| m.is_zero()) {
                    DyadicRational::one()
                } else {
                    DyadicRational::zero()
                };
                assert_eq!(tau.value(&cube).unwrap(), expected);
            }
        }
        check_additivity(&tau, 5).unwrap();
        let hits = support_cubes(&tau, 3, 5).unwrap();
        assert_eq!(hits, vec![DyadicCube::from_u64s(3, &[0, 0]).unwrap()]);
    }

    #[test]
    fn restriction_is_cut_and_keep() {
        let tau = point_mass_at_zero(2);
        let window = DyadicCube::from_u64s(1, &[0, 0]).unwrap();
        let cut = tau.restrict(window.clone()).unwrap();
        assert_eq!(cut.value(&DyadicCube::root(2)).unwrap(), DyadicRational::one());
        let off = DyadicCube::from_u64s(1, &[1, 0]).unwrap();
        assert_eq!(cut.value(&off).unwrap(), DyadicRational::zero());
        check_additivity(&cut, 4).unwrap();

        let outside_window = tau.restrict(DyadicCube::from_u64s(1, &[1, 1]).unwrap()).unwrap();
        for k in 0..4 {
            for cube in DyadicCube::all_at_rank(2, k).unwrap() {
                assert!(outside_window.value(&cube).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn restricting_to_the_whole_group_changes_nothing() {
        let tau = point_mass_at_zero(2);
        let same = tau.restrict(DyadicCube::root(2)).unwrap();
        for k in 0..4 {
            for cube in DyadicCube::all_at_rank(2, k).unwrap() {
                assert_eq!(same.value(&cube).unwrap(), tau.value(&cube).unwrap());
            }
        }
    }

    #[test]
    fn unit_coefficient_series_generates_haar() {
        let tau = Quasimeasure::from_series(Arc::new(UnitCoefficient { dimension: 2 }), None);
        for k in 0..4 {
            for cube in DyadicCube::all_at_rank(2, k).unwrap() {
                assert_eq!(tau.value(&cube).unwrap(), cube.measure());
            }
        }
    }

    #[test]
    fn haar_coefficients_vanish_except_at_zero() {
        let mu = Quasimeasure::haar(2);
        assert_eq!(
            fourier_coefficient(&mu, &WalshIndex::zero(2), 3).unwrap(),
            DyadicRational::one()
        );
        for a in 0..8u64 {
            for b in 0..8u64 {
                if (a, b) == (0, 0) {
                    continue;
                }
                let c = fourier_coefficient(&mu, &WalshIndex::from_u64s(&[a, b]), 3).unwrap();
                assert!(c.is_zero(), "n=({a},{b})");
            }
        }
    }

    #[test]
    fn coefficients_are_rank_stable() {
        let tau = point_mass_at_zero(2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..40 {
            let n = WalshIndex::from_u64s(&[rng.gen_range(0..8), rng.gen_range(0..8)]);
            let a = fourier_coefficient(&tau, &n, 3).unwrap();
            let b = fourier_coefficient(&tau, &n, 4).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn local_coefficients_add_up() {
        let tau = point_mass_at_zero(2);
        let n = WalshIndex::from_u64s(&[3, 5]);
        let total = fourier_coefficient(&tau, &n, 3).unwrap();
        let mut sum = DyadicRational::zero();
        for cube in DyadicCube::all_at_rank(2, 1).unwrap() {
            sum = &sum + &local_coefficient(&tau, &n, &cube, 3).unwrap();
        }
        assert_eq!(sum, total);
        // window = whole group is the global coefficient
        assert_eq!(
            local_coefficient(&tau, &n, &DyadicCube::root(2), 3).unwrap(),
            total
        );
        // a window with no mass contributes nothing
        let empty = DyadicCube::from_u64s(1, &[1, 1]).unwrap();
        assert!(local_coefficient(&tau, &n, &empty, 3).unwrap().is_zero());
    }

    #[test]
    fn trivial_partial_sums() {
        let mu = Quasimeasure::haar(2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let g = DyadicPoint::random(&mut rng, 2, 6);
            // order 1: the single term a_0
            let one = WalshIndex::from_u64s(&[1, 1]);
            for route in [PartialSumRoute::TranslateMeasure, PartialSumRoute::TranslateKernel] {
                assert_eq!(partial_sum(&mu, &one, &g, 4, route).unwrap(), DyadicRational::one());
            }
            // Haar: every partial sum is 1
            let n = WalshIndex::from_u64s(&[rng.gen_range(1..=16), rng.gen_range(1..=16)]);
            assert_eq!(
                partial_sum(&mu, &n, &g, 4, PartialSumRoute::TranslateMeasure).unwrap(),
                DyadicRational::one()
            );
        }
    }

    #[test]
    fn both_partial_sum_routes_agree() {
        let tau = point_mass_at_zero(2);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let g = DyadicPoint::random(&mut rng, 2, 6);
            let n = WalshIndex::from_u64s(&[rng.gen_range(1..=16), rng.gen_range(1..=16)]);
            let a = partial_sum(&tau, &n, &g, 4, PartialSumRoute::TranslateMeasure).unwrap();
            let b = partial_sum(&tau, &n, &g, 4, PartialSumRoute::TranslateKernel).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn partial_sum_matches_coefficient_side() {
        // consistency triangle: kernel representation vs explicit
        // coefficient summation
        let tau = point_mass_at_zero(2);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let g = DyadicPoint::random(&mut rng, 2, 5);
            for (n1, n2) in [(1u64, 1u64), (3, 2), (8, 8), (5, 7)] {
                let nn = WalshIndex::from_u64s(&[n1, n2]);
                let via_kernel =
                    partial_sum(&tau, &nn, &g, 5, PartialSumRoute::TranslateMeasure).unwrap();
                let mut via_coeffs = DyadicRational::zero();
                for a in 0..n1 {
                    for b in 0..n2 {
                        let n = WalshIndex::from_u64s(&[a, b]);
                        let coeff = fourier_coefficient(&tau, &n, 5).unwrap();
                        let w = walsh_at_point(&n, &g).unwrap();
                        via_coeffs =
                            &via_coeffs + &(coeff * DyadicRational::from_integer(w as i64));
                    }
                }
                assert_eq!(via_kernel, via_coeffs);
            }
        }
    }

    #[test]
    fn round_trip_series_reproduces_the_measure() {
        let tau = point_mass_at_zero(2);
        let mut table = TabulatedCoefficients::new(2);
        for a in 0..8u64 {
            for b in 0..8u64 {
                let n = WalshIndex::from_u64s(&[a, b]);
                table.insert(n.clone(), fourier_coefficient(&tau, &n, 3).unwrap());
            }
        }
        let regenerated = Quasimeasure::from_series(Arc::new(table), Some(3));
        for k in 0..=3 {
            for cube in DyadicCube::all_at_rank(2, k).unwrap() {
                assert_eq!(regenerated.value(&cube).unwrap(), tau.value(&cube).unwrap());
            }
        }
    }

    #[test]
    fn support_scan_of_haar_keeps_everything() {
        let mu = Quasimeasure::haar(2);
        let cubes = support_cubes(&mu, 2, 4).unwrap();
        assert_eq!(cubes.len(), 16);
    }

    #[test]
    fn vanishing_rank_finds_the_first_dead_cube() {
        let tau = point_mass_at_zero(1);
        let g = DyadicPoint::from_bits(&[vec![0, 0, 1, 0, 0]]).unwrap();
        // the point leaves the support branch at depth 3
        assert_eq!(vanishing_rank(&tau, &g, 5).unwrap(), Some(3));
        let origin = DyadicPoint::zero(1, 5);
        assert_eq!(vanishing_rank(&tau, &origin, 5).unwrap(), None);
    }

    #[test]
    fn max_rank_is_enforced() {
        let meets: MeetsPredicate = Arc::new(|_c: &DyadicCube| Ok(true));
        let tau = Quasimeasure::from_closed_set(1, Some(3), meets).unwrap();
        assert!(tau.value(&DyadicCube::from_u64s(3, &[1]).unwrap()).is_ok());
        assert!(tau.value(&DyadicCube::from_u64s(4, &[1]).unwrap()).is_err());
    }

    #[test]
    fn inconsistent_predicate_is_reported() {
        // claims cubes meet the set while their parents do not
        let meets: MeetsPredicate = Arc::new(|c: &DyadicCube| Ok(c.rank() >= 2));
        let tau = Quasimeasure::from_closed_set(1, None, meets);
        // the root itself fails the nonempty check
        assert!(tau.is_err());
        let meets: MeetsPredicate =
            Arc::new(|c: &DyadicCube| Ok(c.rank() != 1 || c.index()[0] > BigUint::from(1u32)));
        let tau = Quasimeasure::from_closed_set(1, None, meets).unwrap();
        let deep = DyadicCube::from_u64s(2, &[0]).unwrap();
        assert!(matches!(tau.value(&deep), Err(Error::InconsistentPredicate(_))));
    }
}
