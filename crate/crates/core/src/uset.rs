//! The symmetric variant of the staged construction, and why it fails to be
//! thin in the series sense.
//!
//! Replacing the per-cube Walsh graphs of the staged set by the graph of a
//! single function per stage yields the level set `{W_{N_s} = 1}` for one
//! index `N_s = 2^{2 m_s} 1 + 2^{m_s} n_s` per stage. The geometry looks the
//! same (each stage halves the surviving measure), but the integral of
//! `W_{N_s}` against the canonical quasimeasure of the intersection now
//! reproduces the full mass of any window cube instead of decaying: the
//! computational witness that no null series can live on the symmetric set.
//! The module also carries the kernel-difference identity used to extract
//! that integral from partial sums.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::dirichlet::{dirichlet_at_coord, KernelPath};
use crate::error::{Error, Result};
use crate::group::{DyadicCube, DyadicPoint};
use crate::mset::{decompose_block_index, BlockPosition, MSetConfig};
use crate::quasimeasure::{local_coefficient, MeetsPredicate, Quasimeasure};
use crate::rational::DyadicRational;
use crate::walsh::{walsh_at_point, walsh_on_cube, WalshIndex};

/// One stage of the symmetric construction.
#[derive(Clone, Debug)]
pub struct SymmetricStage {
    pub stage: u32,
    /// The base index `n_s`, with `2^{m_s} 1 <= n_s < 2^{m_s+1} 1` (shifted
    /// graphs) or `n_s < 2^{m_s} 1` (graphs aligned with the stage grid).
    pub base: WalshIndex,
    /// `N_s = 2^{2 m_s} 1 + 2^{m_s} n_s`.
    pub index: WalshIndex,
    /// The binary block holding every component of `N_s`.
    pub block_scale: u64,
    /// Rank at which `{W_{N_s} = 1}` is a union of cubes.
    pub resolution: u32,
    /// Smallest set bit of each component (the property-P data).
    pub lowest_bits: Vec<u64>,
}

/// The validated index sequence `N_1, N_2, ...` of the symmetric set.
#[derive(Clone, Debug)]
pub struct SymmetricSequence {
    dimension: usize,
    stages: Vec<SymmetricStage>,
}

impl SymmetricSequence {
    /// Builds `N_s = 2^{2 m_s} 1 + 2^{m_s} base_s`, one base per stage, and
    /// validates the block and lowest-set-bit (property P) conditions. Base
    /// components must sit uniformly below `2^{m_s}` or uniformly in
    /// `[2^{m_s}, 2^{m_s+1})`, so all components of `N_s` land in one block.
    pub fn new(cfg: &MSetConfig, bases: &[WalshIndex]) -> Result<Self> {
        let d = cfg.dimension();
        if bases.is_empty() {
            return Err(Error::InvalidArgument("need at least one stage".into()));
        }
        let mut stages = Vec::with_capacity(bases.len());
        let mut prev_scale: Option<u64> = None;
        for (i, base) in bases.iter().enumerate() {
            let s = i as u32 + 1;
            let ms = cfg.sequence().rank_unbounded(s)?;
            if base.dimension() != d {
                return Err(Error::DimensionMismatch(base.dimension(), d));
            }
            if base.max_bits() > ms + 1 {
                return Err(Error::BaseIndexOutOfRange(format!(
                    "stage {s}: base must stay below 2^{}",
                    ms + 1
                )));
            }
            let low = base.components().iter().all(|c| c.bits() <= ms);
            let high = base.components().iter().all(|c| c.bits() == ms + 1);
            if !low && !high {
                return Err(Error::BaseIndexOutOfRange(format!(
                    "stage {s}: base components straddle 2^{ms}, splitting the index across blocks"
                )));
            }
            let top = BigUint::one() << (2 * ms);
            let index = WalshIndex::new(
                base.components()
                    .iter()
                    .map(|c| &top + (c << ms))
                    .collect(),
            )?;
            let block_scale = if high { 2 * ms + 1 } else { 2 * ms };
            let lowest_bits: Vec<u64> = index
                .components()
                .iter()
                .map(|c| c.trailing_zeros().expect("index positive"))
                .collect();
            // property P floor: no component may have digits below m_s
            if lowest_bits.iter().any(|&b| b < ms) {
                return Err(Error::BaseIndexOutOfRange(format!(
                    "stage {s}: index has a digit below scale {ms}"
                )));
            }
            debug_assert!(index.components().iter().all(|c| c.bits() == block_scale + 1));
            if let Some(prev) = prev_scale {
                if block_scale <= prev {
                    return Err(Error::BaseIndexOutOfRange(format!(
                        "stage {s}: block scale must increase (got {block_scale} after {prev})"
                    )));
                }
            }
            prev_scale = Some(block_scale);
            stages.push(SymmetricStage {
                stage: s,
                base: base.clone(),
                index,
                block_scale,
                resolution: u32::try_from(block_scale + 1)
                    .map_err(|_| Error::InvalidArgument("resolution too large".into()))?,
                lowest_bits,
            });
        }
        Ok(SymmetricSequence { dimension: d, stages })
    }

    /// The grid-aligned diagonal default: base `0` at stage 1 (forced, the
    /// stage-1 grid has one cell) and `1 * (1,...,1)` afterwards. Every
    /// component of `N_s` then has its lowest set bit exactly at `m_s`.
    pub fn default_bases(cfg: &MSetConfig, stages: u32) -> Result<Vec<WalshIndex>> {
        let d = cfg.dimension();
        let mut out = Vec::with_capacity(stages as usize);
        for s in 1..=stages {
            if s == 1 {
                out.push(WalshIndex::zero(d));
            } else {
                out.push(WalshIndex::diagonal(d, &BigUint::one()));
            }
        }
        Ok(out)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn stage_count(&self) -> u32 {
        self.stages.len() as u32
    }

    pub fn stage(&self, s: u32) -> Result<&SymmetricStage> {
        self.stages
            .get((s as usize).wrapping_sub(1))
            .ok_or(Error::StageOutOfRange { stage: s, max: self.stage_count() })
    }

    pub fn stages(&self) -> &[SymmetricStage] {
        &self.stages
    }

    /// Whether the whole sequence is diagonal (cubic orders).
    pub fn is_diagonal(&self) -> bool {
        self.stages.iter().all(|st| {
            let first = st.index.component(0);
            st.index.components().iter().all(|c| c == first)
        })
    }

    /// Stage-`s` membership: `W_{N_s}(g) = 1`.
    pub fn point_in_stage_set(&self, g: &DyadicPoint, s: u32) -> Result<bool> {
        Ok(walsh_at_point(&self.stage(s)?.index, g)? == 1)
    }

    /// Membership in the intersection of stages `1..=s`.
    pub fn point_in_partial_intersection(&self, g: &DyadicPoint, s: u32) -> Result<bool> {
        for t in 1..=s {
            if !self.point_in_stage_set(g, t)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether a cube meets the symmetric set: only stages resolved at the
    /// cube's rank constrain it, each unresolved stage keeps half of every
    /// finer cube alive.
    pub fn cube_meets_set(&self, cube: &DyadicCube) -> Result<bool> {
        for st in &self.stages {
            if st.resolution > cube.rank() {
                return Ok(true);
            }
            let ancestor = cube.ancestor(st.resolution)?;
            if walsh_on_cube(&st.index, &ancestor)? != 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Largest rank at which the finite stage list still decides meeting
    /// exactly (the first unbuilt stage resolves deeper than this).
    pub fn max_exact_rank(&self, cfg: &MSetConfig) -> Result<u32> {
        let next = self.stage_count() + 1;
        u32::try_from(2 * cfg.sequence().rank_unbounded(next)?)
            .map_err(|_| Error::InvalidArgument("rank too large".into()))
    }

    /// The canonical quasimeasure of the symmetric set.
    pub fn tau(&self, cfg: &MSetConfig) -> Result<Quasimeasure> {
        let seq = self.clone();
        let meets: MeetsPredicate = Arc::new(move |c: &DyadicCube| seq.cube_meets_set(c));
        Quasimeasure::from_closed_set(self.dimension, Some(self.max_exact_rank(cfg)?), meets)
    }
}

/// The integral of `W_N` over a window cube against a quasimeasure,
/// evaluated at rank `k`. This is the local Fourier-Walsh coefficient under
/// the name the uniqueness experiments use.
pub fn u_integral(
    tau: &Quasimeasure,
    n: &WalshIndex,
    window: &DyadicCube,
    k: u32,
) -> Result<DyadicRational> {
    local_coefficient(tau, n, window, k)
}

/// Outcome of the kernel-difference identity check
/// `D_{N + 2^q}(y) - D_N(y) = 2^q W_N(y) [y in the zero rank-q interval]`.
#[derive(Clone, Debug)]
pub struct KernelDifferenceReport {
    pub order: u64,
    pub window_rank: u32,
    /// False when the precondition (every digit of `N` above `q`) fails and
    /// the identity was not asserted.
    pub applicable: bool,
    pub checked: usize,
    pub all_equal: bool,
}

/// Checks the kernel-difference identity on sample pairs `(x, g)`,
/// evaluating both sides at `y = x + g`. Requires the lowest set bit of `n`
/// to exceed `q`; otherwise reports the check as skipped.
pub fn dirichlet_difference_check(
    n: u64,
    q: u32,
    samples: &[(DyadicPoint, DyadicPoint)],
) -> Result<KernelDifferenceReport> {
    if n == 0 {
        return Err(Error::KernelOrderZero);
    }
    if n.trailing_zeros() <= q {
        return Ok(KernelDifferenceReport {
            order: n,
            window_rank: q,
            applicable: false,
            checked: 0,
            all_equal: false,
        });
    }
    let mut all_equal = true;
    for (x, g) in samples {
        if x.dimension() != 1 || g.dimension() != 1 {
            return Err(Error::DimensionMismatch(x.dimension(), 1));
        }
        let y = x.xor_add(g)?;
        all_equal &= kernel_difference_holds_at(n, q, y.coord(0), y.depth())?;
    }
    Ok(KernelDifferenceReport {
        order: n,
        window_rank: q,
        applicable: true,
        checked: samples.len(),
        all_equal,
    })
}

/// Exhaustive version of the identity over all rank-`rank` intervals.
pub fn dirichlet_difference_exhaustive(n: u64, q: u32, rank: u32) -> Result<bool> {
    if n == 0 {
        return Err(Error::KernelOrderZero);
    }
    if n.trailing_zeros() <= q {
        return Err(Error::InvalidArgument(
            "identity needs every digit of the order above the window rank".into(),
        ));
    }
    for cube in DyadicCube::all_at_rank(1, rank)? {
        let y = cube.min_point(rank)?;
        if !kernel_difference_holds_at(n, q, y.coord(0), rank)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn kernel_difference_holds_at(n: u64, q: u32, coord: &BigUint, depth: u32) -> Result<bool> {
    let lhs = dirichlet_at_coord(n + (1 << q), coord, depth, KernelPath::RademacherSplit)?
        - dirichlet_at_coord(n, coord, depth, KernelPath::RademacherSplit)?;
    let in_zero_window = coord.trailing_zeros().unwrap_or(u64::MAX) >= q as u64;
    let rhs = if in_zero_window {
        let w = walsh_at_point(
            &WalshIndex::new(vec![BigUint::from(n)])?,
            &DyadicPoint::new(vec![coord.clone()], depth)?,
        )?;
        (w as i64) << q
    } else {
        0
    };
    Ok(lhs == rhs)
}

/// One row of the contrast table: the integral of one stage index over one
/// window, against either the symmetric or the staged quasimeasure.
#[derive(Clone, Debug, Serialize)]
pub struct ContrastRecord {
    pub construction: String,
    pub stage: u32,
    pub cube: String,
    pub integral_value_mantissa: String,
    pub integral_value_exponent: i64,
}

/// Outcome of the side-by-side experiment.
#[derive(Clone, Debug)]
pub struct ContrastReport {
    pub records: Vec<ContrastRecord>,
    /// Every symmetric-side integral equals the window mass, which is
    /// nonzero.
    pub symmetric_identity_holds: bool,
    /// Every staged-side integral obeys the block coefficient magnitude.
    pub staged_bounded: bool,
}

/// Runs the contrast experiment: for windows meeting the symmetric set, the
/// integrals of `W_{N_s}` against its quasimeasure equal the window mass at
/// every stage, while against the staged-set quasimeasure the same indices
/// produce values within the decaying block magnitude.
pub fn uniqueness_contrast_demo(
    cfg: &MSetConfig,
    seq: &SymmetricSequence,
    max_stage: u32,
    windows: &[DyadicCube],
) -> Result<ContrastReport> {
    let max_stage = max_stage.min(seq.stage_count());
    let sym_tau = seq.tau(cfg)?;
    let staged_tau = cfg.tau()?;
    let mut records = Vec::new();
    let mut symmetric_identity_holds = true;
    let mut staged_bounded = true;
    let mut nonzero_seen = false;
    for window in windows {
        let mass = sym_tau.value(window)?;
        if mass.is_zero() {
            continue;
        }
        nonzero_seen = true;
        for s in 1..=max_stage {
            let st = seq.stage(s)?;
            let k = st.resolution.max(window.rank());
            let sym_integral = u_integral(&sym_tau, &st.index, window, k)?;
            symmetric_identity_holds &= sym_integral == mass && !sym_integral.is_zero();
            records.push(ContrastRecord {
                construction: "symmetric".into(),
                stage: s,
                cube: window.to_string(),
                integral_value_mantissa: sym_integral.mantissa().to_string(),
                integral_value_exponent: sym_integral.exponent(),
            });

            let staged_integral = u_integral(&staged_tau, &st.index, window, k)?;
            let bound = match decompose_block_index(&st.index, cfg.sequence()) {
                BlockPosition::InBlock(dec) if dec.stage <= cfg.stage_count() => {
                    DyadicRational::pow2(cfg.magnitude_exponent(dec.stage)?)
                }
                // off-block indices integrate to zero against the staged set
                _ => DyadicRational::zero(),
            };
            staged_bounded &= staged_integral.abs() <= bound;
            records.push(ContrastRecord {
                construction: "staged".into(),
                stage: s,
                cube: window.to_string(),
                integral_value_mantissa: staged_integral.mantissa().to_string(),
                integral_value_exponent: staged_integral.exponent(),
            });
        }
    }
    if !nonzero_seen {
        return Err(Error::InvalidArgument(
            "no window carries mass; the construction failed".into(),
        ));
    }
    Ok(ContrastReport { records, symmetric_identity_holds, staged_bounded })
}
