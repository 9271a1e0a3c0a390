//! Partial sums of block-supported Walsh series in the four convergence
//! modes, vanishing checks off the support, the stage tail bound, and a
//! factorized block evaluator.
//!
//! The factorized evaluator computes the stage-`s` block contribution to
//! `S_N(g)` without touching the `2^{2 d m_s}` individual terms. Writing
//! block indices as `n = 2^{2 m_s} 1 + 2^{m_s} p + q`, the coefficient and
//! the Walsh value both factor through rank-`m_s` Walsh matrix entries; for
//! every coordinate whose `q`-range is complete, row orthogonality collapses
//! the inner sum to `2^{m_s}` times a Kronecker delta pinning `p` to the
//! address of `g`, and the one incomplete `p` value per coordinate leaves a
//! single Dirichlet kernel value. What remains is a sum over the `2^d`
//! choices of which coordinates sit at their partial boundary.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::dirichlet::{dirichlet_interval, KernelPath};
use crate::error::{Error, Result};
use crate::group::{DyadicCube, DyadicPoint};
use crate::mset::{MSetConfig, StageSequence};
use crate::quasimeasure::{
    cube_carries_mass, partial_sum, vanishing_rank, CoefficientSource, PartialSumRoute,
    Quasimeasure,
};
use crate::rational::DyadicRational;
use crate::walsh::{rademacher, walsh_at_point, walsh_entry, WalshIndex};

/// An exact ratio bound for rectangle shapes, kept as an integer pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RatioBound {
    num: u64,
    den: u64,
}

impl RatioBound {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num < den {
            return Err(Error::InvalidArgument(format!(
                "ratio bound {num}/{den} must be a rational >= 1"
            )));
        }
        Ok(RatioBound { num, den })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }
}

/// Exact test of `max_j N^j / min_k N^k <= lambda`.
pub fn lambda_admissible(n: &WalshIndex, lambda: RatioBound) -> Result<bool> {
    if !n.is_positive() {
        return Err(Error::InvalidArgument("rectangle orders must be positive".into()));
    }
    let max = n.components().iter().max().expect("nonempty");
    let min = n.components().iter().min().expect("nonempty");
    Ok(max * BigUint::from(lambda.den) <= min * BigUint::from(lambda.num))
}

/// Convergence mode tag carried by emitted records.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConvergenceMode {
    Rectangular,
    Cubic,
    Lambda(RatioBound),
    /// Iterated summation in the given coordinate order (0-based), truncated
    /// at the outer coordinate only.
    Iterated { order: Vec<usize>, outer_limit: u64 },
}

impl ConvergenceMode {
    pub fn label(&self) -> String {
        match self {
            ConvergenceMode::Rectangular => "rectangular".into(),
            ConvergenceMode::Cubic => "cubic".into(),
            ConvergenceMode::Lambda(r) => format!("lambda({}/{})", r.num, r.den),
            ConvergenceMode::Iterated { order, .. } => {
                let o: Vec<String> = order.iter().map(|j| (j + 1).to_string()).collect();
                format!("iterated({})", o.join("-"))
            }
        }
    }
}

/// One evaluated partial sum.
#[derive(Clone, Debug)]
pub struct ConvergenceRecord {
    pub n: WalshIndex,
    pub mode: ConvergenceMode,
    pub value: DyadicRational,
    /// Stage of the diagonal block containing `n`, when there is one.
    pub stage: Option<u32>,
}

impl ConvergenceRecord {
    /// Builds a record, validating that the order vector fits the mode.
    pub fn new(
        n: WalshIndex,
        mode: ConvergenceMode,
        value: DyadicRational,
        seq: &StageSequence,
    ) -> Result<Self> {
        match &mode {
            ConvergenceMode::Cubic => {
                let first = n.component(0);
                if n.components().iter().any(|c| c != first) {
                    return Err(Error::InvalidArgument(
                        "cubic records need a diagonal order vector".into(),
                    ));
                }
            }
            ConvergenceMode::Lambda(r) => {
                if !lambda_admissible(&n, *r)? {
                    return Err(Error::InvalidArgument(
                        "order vector violates the declared ratio bound".into(),
                    ));
                }
            }
            _ => {}
        }
        let stage = seq.block_stage_of(&n);
        Ok(ConvergenceRecord { n, mode, value, stage })
    }
}

/// `S_N(g)` for a block-supported series, by direct enumeration of the
/// support below `N`.
pub fn block_partial_sum(
    coeffs: &dyn CoefficientSource,
    n: &WalshIndex,
    g: &DyadicPoint,
) -> Result<DyadicRational> {
    if n.dimension() != coeffs.dimension() {
        return Err(Error::DimensionMismatch(n.dimension(), coeffs.dimension()));
    }
    if !n.is_positive() {
        return Err(Error::InvalidArgument("partial sum order must be positive".into()));
    }
    let bound = n.max_bits() as u32;
    let mut acc = DyadicRational::zero();
    for idx in coeffs.support_below(bound)? {
        if !below(&idx, n) {
            continue;
        }
        let a = coeffs.coefficient(&idx)?;
        if a.is_zero() {
            continue;
        }
        let w = walsh_at_point(&idx, g)?;
        acc = &acc + &(a * DyadicRational::from_integer(w as i64));
    }
    Ok(acc)
}

fn below(n: &WalshIndex, bound: &WalshIndex) -> bool {
    n.components().iter().zip(bound.components()).all(|(a, b)| a < b)
}

/// Iterated partial sum: sums the support slice by slice along the given
/// coordinate order (outermost first), truncating only the outer
/// coordinate. Inner sums are complete because the support is
/// block-structured, hence finite in every slice.
pub fn iterated_partial_sum(
    coeffs: &dyn CoefficientSource,
    order: &[usize],
    outer_limit: &BigUint,
    g: &DyadicPoint,
) -> Result<DyadicRational> {
    let d = coeffs.dimension();
    let mut seen = vec![false; d];
    for &j in order {
        if j >= d || seen[j] {
            return Err(Error::InvalidArgument("order must be a permutation of the axes".into()));
        }
        seen[j] = true;
    }
    if order.len() != d {
        return Err(Error::InvalidArgument("order must be a permutation of the axes".into()));
    }
    let mut terms = Vec::new();
    for idx in coeffs.support_all()? {
        if idx.component(order[0]) >= outer_limit {
            continue;
        }
        let a = coeffs.coefficient(&idx)?;
        if a.is_zero() {
            continue;
        }
        let w = walsh_at_point(&idx, g)?;
        terms.push((idx, a * DyadicRational::from_integer(w as i64)));
    }
    Ok(nested_sum(&terms, order))
}

fn nested_sum(terms: &[(WalshIndex, DyadicRational)], order: &[usize]) -> DyadicRational {
    if order.is_empty() || terms.is_empty() {
        return terms
            .iter()
            .fold(DyadicRational::zero(), |acc, (_, v)| &acc + v);
    }
    let mut groups: std::collections::BTreeMap<BigUint, Vec<(WalshIndex, DyadicRational)>> =
        Default::default();
    for (idx, v) in terms {
        groups
            .entry(idx.component(order[0]).clone())
            .or_default()
            .push((idx.clone(), v.clone()));
    }
    let mut acc = DyadicRational::zero();
    for (_, slice) in groups {
        acc = &acc + &nested_sum(&slice, &order[1..]);
    }
    acc
}

/// Outcome of the off-support vanishing check.
#[derive(Clone, Debug)]
pub struct ZeroSumReport {
    pub requested_rank: u32,
    /// Smallest rank at which the cube around the point carries no mass.
    pub witness_rank: Option<u32>,
    pub precondition_ok: bool,
    pub values: Vec<(WalshIndex, DyadicRational)>,
    pub all_zero: bool,
}

/// Checks that every partial sum of order `2^w * M` vanishes at `g`, given
/// that the quasimeasure carries no mass below the rank-`w` cube around
/// `g`. The precondition is verified (scanning to `scan_rank` for signed
/// quasimeasures); on failure the report says so and no sums are taken.
pub fn zero_sum_check(
    tau: &Quasimeasure,
    g: &DyadicPoint,
    w: u32,
    m_range: &[WalshIndex],
    scan_rank: u32,
) -> Result<ZeroSumReport> {
    let home = DyadicCube::of_point(g, w)?;
    if cube_carries_mass(tau, &home, scan_rank)? {
        return Ok(ZeroSumReport {
            requested_rank: w,
            witness_rank: None,
            precondition_ok: false,
            values: Vec::new(),
            all_zero: false,
        });
    }
    let witness_rank = vanishing_rank(tau, g, scan_rank)?;
    let mut values = Vec::with_capacity(m_range.len());
    let mut all_zero = true;
    for m in m_range {
        if !m.is_positive() {
            return Err(Error::InvalidArgument("order factors must be positive".into()));
        }
        let n = WalshIndex::new(m.components().iter().map(|c| c << (w as u64)).collect())?;
        let k = n.max_bits() as u32;
        let value = partial_sum(tau, &n, g, k, PartialSumRoute::TranslateMeasure)?;
        all_zero &= value.is_zero();
        values.push((n, value));
    }
    Ok(ZeroSumReport {
        requested_rank: w,
        witness_rank,
        precondition_ok: true,
        values,
        all_zero,
    })
}

/// The stage-`s` tail bound `2^(d + s - m_s/2)` for points already off the
/// set at scale `m_s/2`. Defined from stage 2 on, where `m_s` is even.
pub fn tail_bound(s: u32, dimension: usize, seq: &StageSequence) -> Result<DyadicRational> {
    if s < 2 {
        return Err(Error::InvalidArgument(
            "the tail bound starts at stage 2, where half the stage rank is integral".into(),
        ));
    }
    let ms = seq.rank(s)?;
    Ok(DyadicRational::pow2(dimension as i64 + s as i64 - (ms / 2) as i64))
}

/// Naive stage-`s` block contribution to `S_N(g)`: enumerates every block
/// index below `N`. The oracle against which the factorized path is checked.
pub fn naive_block_component(
    cfg: &MSetConfig,
    stage: u32,
    n: &WalshIndex,
    g: &DyadicPoint,
) -> Result<DyadicRational> {
    let ms = cfg.sequence().rank(stage)?;
    let d = cfg.dimension();
    let bits = 2 * ms * d as u64;
    if bits > crate::group::ENUMERATION_CAP_BITS {
        return Err(Error::EnumerationTooLarge { bits, cap: crate::group::ENUMERATION_CAP_BITS });
    }
    let lo = BigUint::one() << (2 * ms);
    let hi = &lo << 1u8;
    let mut acc = DyadicRational::zero();
    let widths: Vec<u64> = n
        .components()
        .iter()
        .map(|c| {
            let upper = c.min(&hi);
            if upper <= &lo {
                0
            } else {
                (upper - &lo).to_u64().expect("block width fits")
            }
        })
        .collect();
    if widths.iter().any(|&w| w == 0) {
        return Ok(acc);
    }
    let mut counter = vec![0u64; d];
    loop {
        let idx = WalshIndex::new(counter.iter().map(|&o| &lo + BigUint::from(o)).collect())?;
        let a = cfg.coefficient(&idx)?;
        if !a.is_zero() {
            let w = walsh_at_point(&idx, g)?;
            acc = &acc + &(a * DyadicRational::from_integer(w as i64));
        }
        let mut j = d;
        loop {
            if j == 0 {
                return Ok(acc);
            }
            j -= 1;
            counter[j] += 1;
            if counter[j] < widths[j] {
                break;
            }
            counter[j] = 0;
        }
    }
}

/// Stage-`s` block contribution to `S_N(g)` in closed form, without
/// enumerating the block. `N` must have every component inside the stage
/// block (the block endpoint `2^{2 m_s + 1}` is allowed and means the full
/// block). Requires identity or product permutations.
pub fn factorized_block_sum(
    cfg: &MSetConfig,
    n: &WalshIndex,
    g: &DyadicPoint,
) -> Result<DyadicRational> {
    if !cfg.perms().is_product() {
        return Err(Error::BadPermutation(
            "factorized evaluation needs product-form permutations".into(),
        ));
    }
    let d = cfg.dimension();
    if n.dimension() != d || g.dimension() != d {
        return Err(Error::DimensionMismatch(n.dimension(), d));
    }
    // locate the stage whose block (closure included) contains N
    let mut found = None;
    for s in 1..=cfg.stage_count() {
        let ms = cfg.sequence().rank(s)?;
        let lo = BigUint::one() << (2 * ms);
        let hi = &lo << 1u8;
        if n.components().iter().all(|c| c >= &lo && c <= &hi) {
            found = Some((s, ms));
            break;
        }
    }
    let Some((s, ms)) = found else {
        return Err(Error::NotInBlock);
    };
    if ms > 62 {
        return Err(Error::InvalidArgument(format!(
            "stage rank {ms} too deep for the kernel arithmetic"
        )));
    }
    let ms32 = ms as u32;
    if g.depth() < 2 * ms32 + 1 {
        return Err(Error::DepthTooSmall { needed: 2 * ms32 + 1, available: g.depth() });
    }

    let lo = BigUint::one() << (2 * ms);
    let side = 1u64 << ms;
    let mask = BigUint::from(side - 1);
    // remaining widths inside the block, per coordinate; the width itself
    // can exceed a word, but its two halves cannot
    let mut full_p = Vec::with_capacity(d); // number of complete p values
    let mut rem_q = Vec::with_capacity(d); // width of the partial q range
    for c in n.components() {
        let width = c - &lo;
        if width.bits() == 0 {
            return Ok(DyadicRational::zero());
        }
        full_p.push((&width >> ms).to_u64().expect("p range fits"));
        rem_q.push((&width & &mask).to_u64().expect("q range fits"));
    }

    // the address of g: coarse index r, refinement r', boundary sign
    let coarse = g.prefix_index(ms32)?;
    let fine = g.prefix_index(2 * ms32)?;
    let r: Vec<u64> = coarse.iter().map(|x| x.to_u64().expect("fits")).collect();
    let r_prime: Vec<u64> = fine
        .iter()
        .map(|x| (x & &mask).to_u64().expect("fits"))
        .collect();
    let boundary_sign = rademacher(&vec![2 * ms32; d], g)?;

    let apply = |j: usize, v: u64| -> Result<u64> {
        Ok(match cfg.perms().coordinate_perm(s, j)? {
            Some(p) => p.apply(v),
            None => v,
        })
    };
    let apply_inv = |j: usize, v: u64| -> Result<u64> {
        Ok(match cfg.perms().coordinate_perm(s, j)? {
            Some(p) => p.apply_inverse(v),
            None => v,
        })
    };
    let entry =
        |a: u64, b: u64| -> Result<i32> { walsh_entry(ms32, &BigUint::from(a), &BigUint::from(b)) };

    let mut total = DyadicRational::zero();
    // choose the set of coordinates pinned at their partial p boundary
    for mask in 0u32..(1 << d) {
        let mut weight: i128 = 1;
        let mut pow = 0i64;
        let mut address = Vec::with_capacity(d);
        let mut dead = false;
        for j in 0..d {
            if mask >> j & 1 == 1 {
                // boundary coordinate: p_j sits at the partial value and the
                // incomplete q-range collapses to one kernel value
                if rem_q[j] == 0 {
                    dead = true;
                    break;
                }
                let u = apply_inv(j, full_p[j])?;
                let kernel = dirichlet_interval(
                    rem_q[j],
                    ms32,
                    &BigUint::from(u ^ r[j]),
                    KernelPath::RademacherSplit,
                )?;
                if kernel == 0 {
                    dead = true;
                    break;
                }
                weight *= (entry(full_p[j], r_prime[j])? as i128) * kernel as i128;
                address.push(u);
            } else {
                // complete coordinate: orthogonality pins p_j to the image
                // of r_j and contributes a factor 2^{m_s}
                let pinned = apply(j, r[j])?;
                if pinned >= full_p[j] {
                    dead = true;
                    break;
                }
                weight *= entry(pinned, r_prime[j])? as i128;
                pow += ms as i64;
                address.push(r[j]);
            }
        }
        if dead {
            continue;
        }
        let alive_cube = DyadicCube::from_u64s(ms32, &address)?;
        if s > 1 && !cfg.cube_in_partial_intersection(&alive_cube, s - 1)? {
            continue;
        }
        total = &total + &DyadicRational::from_i128(weight).times_pow2(pow);
    }
    let scale = DyadicRational::signed_pow2(boundary_sign, cfg.magnitude_exponent(s)?);
    Ok(&total * &scale)
}
