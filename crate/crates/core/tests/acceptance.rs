//! Acceptance suite: one test per exit criterion, every comparison exact.
//!
//! Criteria that pit a closed form against an integral use the brute-force
//! integral as the oracle; criteria about kernel or sign identities carry
//! their own test-local oracles (plain digit loops, independent of the
//! library's bit tricks). Each test prints one pass line on completion.

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dyadic_walsh::convergence::{
    block_partial_sum, factorized_block_sum, iterated_partial_sum, naive_block_component,
    tail_bound, zero_sum_check,
};
use dyadic_walsh::dirichlet::{dirichlet_interval, KernelPath};
use dyadic_walsh::mset::{MSetConfig, NullSeriesCoefficients, PermutationFamily};
use dyadic_walsh::quasimeasure::{
    check_additivity, fourier_coefficient, local_coefficient, partial_sum, PartialSumRoute,
    Quasimeasure,
};
use dyadic_walsh::rational::DyadicRational;
use dyadic_walsh::uset::{dirichlet_difference_exhaustive, u_integral, SymmetricSequence};
use dyadic_walsh::verify::{run_all, VerifySettings};
use dyadic_walsh::walsh::{walsh_matrix, walsh_on_cube, WalshIndex};
use dyadic_walsh::{DyadicCube, DyadicPoint};

/// Test-local sign oracle: the literal digit sum `sum_j n_j m_{k-1-j}`,
/// written as a plain loop with no bit-reversal tricks.
fn oracle_interval_sign(n: u64, k: u32, m: u64) -> i32 {
    let mut exponent = 0u32;
    for j in 0..k {
        let n_j = (n >> j) & 1;
        let m_rev = (m >> (k - 1 - j)) & 1;
        exponent += (n_j * m_rev) as u32;
    }
    if exponent % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Test-local kernel oracle: direct summation of the sign oracle.
fn oracle_kernel(n: u64, k: u32, m: u64) -> i64 {
    (0..n).map(|v| oracle_interval_sign(v, k, m) as i64).sum()
}

fn identity_cfg() -> MSetConfig {
    MSetConfig::new(2, 2).unwrap()
}

/// Identity plus three seeded random product-permutation configurations.
fn permutation_configs() -> Vec<(String, MSetConfig)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let base = identity_cfg();
    let mut out = vec![("identity".to_string(), base.clone())];
    for i in 0..3 {
        let fam = PermutationFamily::random_product(&mut rng, 2, base.sequence(), 2).unwrap();
        out.push((format!("shuffle-{i}"), base.clone().with_perms(fam)));
    }
    out
}

fn all_indices_below(bits: u32) -> Vec<WalshIndex> {
    let side = 1u64 << bits;
    let mut out = Vec::with_capacity((side * side) as usize);
    for n1 in 0..side {
        for n2 in 0..side {
            out.push(WalshIndex::from_u64s(&[n1, n2]));
        }
    }
    out
}

fn in_stage2_block(n: &WalshIndex) -> bool {
    let lo = BigUint::from(16u32);
    let hi = BigUint::from(32u32);
    n.components().iter().all(|c| *c >= lo && *c < hi)
}

#[test]
fn criterion_01_walsh_matrix_orthogonality() {
    let t0 = Instant::now();
    for k in 0..=8u32 {
        let w = walsh_matrix(k).unwrap();
        let ord = w.order();
        for a in 0..ord {
            for b in a..ord {
                let dot: i64 = (0..ord).map(|m| (w.get(a, m) * w.get(b, m)) as i64).sum();
                let want = if a == b { 1i64 << k } else { 0 };
                assert_eq!(dot, want, "k={k} rows ({a},{b})");
                assert_eq!(w.get(a, b), w.get(b, a), "symmetry at k={k}");
            }
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("[PASS] criterion 01: sign matrices self-multiply to 2^k I for k<=8 in {elapsed:?}");
}

#[test]
fn criterion_02_multidimensional_orthogonality() {
    for k in 0..=4u32 {
        let w = walsh_matrix(k).unwrap();
        let ord = w.order();
        for m1 in 0..ord {
            for m2 in 0..ord {
                for p1 in 0..ord {
                    for p2 in 0..ord {
                        let mut dot: i64 = 0;
                        for a in 0..ord {
                            for b in 0..ord {
                                dot += ((w.get(m1, a) * w.get(m2, b)) as i64)
                                    * ((w.get(p1, a) * w.get(p2, b)) as i64);
                            }
                        }
                        let want = if (m1, m2) == (p1, p2) { 1i64 << (2 * k) } else { 0 };
                        assert_eq!(dot, want, "k={k} m=({m1},{m2}) p=({p1},{p2})");
                    }
                }
            }
        }
    }
    println!("[PASS] criterion 02: product-entry orthogonality sums give 2^(kd) deltas, d=2, k<=4");
}

#[test]
fn criterion_03_scaling_identity() {
    for scale in 1..=3u32 {
        let side = 1u64 << scale;
        for p in 0..side {
            for m in 0..side {
                for m_prime in 0..side {
                    let expected = oracle_interval_sign(p, scale, m_prime);
                    // d = 1
                    let cube = DyadicCube::from_u64s(2 * scale, &[side * m + m_prime]).unwrap();
                    let got =
                        walsh_on_cube(&WalshIndex::from_u64s(&[side * p]), &cube).unwrap();
                    assert_eq!(got, expected, "scale {scale} p={p} m={m} m'={m_prime}");
                    // d = 2, both coordinates scaled
                    let cube2 = DyadicCube::from_u64s(
                        2 * scale,
                        &[side * m + m_prime, side * m + m_prime],
                    )
                    .unwrap();
                    let got2 = walsh_on_cube(
                        &WalshIndex::from_u64s(&[side * p, side * p]),
                        &cube2,
                    )
                    .unwrap();
                    assert_eq!(got2, expected * expected);
                }
            }
        }
    }
    println!("[PASS] criterion 03: scaled indices on refined cubes reproduce coarse matrix entries, scales 1..3, d=1,2");
}

#[test]
fn criterion_04_dirichlet_decomposition() {
    // d = 1: both library paths and the test oracle agree for all N <= 256
    for n in 1..=256u64 {
        for m in 0..256u64 {
            let oracle = oracle_kernel(n, 8, m);
            let direct =
                dirichlet_interval(n, 8, &BigUint::from(m), KernelPath::DirectSum).unwrap();
            let split =
                dirichlet_interval(n, 8, &BigUint::from(m), KernelPath::RademacherSplit).unwrap();
            assert_eq!(direct, oracle, "direct vs oracle at n={n} m={m}");
            assert_eq!(split, oracle, "split vs oracle at n={n} m={m}");
        }
    }
    // d = 2: the product of split kernels equals the direct double sum
    for n1 in 1..=16u64 {
        for n2 in 1..=16u64 {
            for m1 in 0..16u64 {
                for m2 in 0..16u64 {
                    let prod = dirichlet_interval(n1, 4, &BigUint::from(m1), KernelPath::RademacherSplit)
                        .unwrap()
                        * dirichlet_interval(n2, 4, &BigUint::from(m2), KernelPath::RademacherSplit)
                            .unwrap();
                    let mut oracle = 0i64;
                    for a in 0..n1 {
                        for b in 0..n2 {
                            oracle += (oracle_interval_sign(a, 4, m1)
                                * oracle_interval_sign(b, 4, m2))
                                as i64;
                        }
                    }
                    assert_eq!(prod, oracle, "N=({n1},{n2}) m=({m1},{m2})");
                }
            }
        }
    }
    println!("[PASS] criterion 04: kernel digit-split equals direct summation, N<=256 (d=1) and N<=(16,16) (d=2)");
}

#[test]
fn criterion_05_quasimeasure_additivity() {
    // d = 2 family, ranks below 6
    let cfg = identity_cfg();
    let tau = cfg.tau().unwrap();
    check_additivity(&tau, 6).unwrap();
    check_additivity(&Quasimeasure::haar(2), 6).unwrap();
    let shuffled = permutation_configs().pop().unwrap().1;
    check_additivity(&shuffled.tau().unwrap(), 6).unwrap();
    let window = DyadicCube::from_u64s(2, &[0, 0]).unwrap();
    check_additivity(&tau.restrict(window).unwrap(), 6).unwrap();
    let series = Quasimeasure::from_series(
        Arc::new(NullSeriesCoefficients::new(cfg.clone())),
        Some(6),
    );
    check_additivity(&series, 6).unwrap();
    let seq = SymmetricSequence::new(&cfg, &SymmetricSequence::default_bases(&cfg, 2).unwrap())
        .unwrap();
    check_additivity(&seq.tau(&cfg).unwrap(), 6).unwrap();
    // d = 3 family, ranks below 4
    let cfg3 = MSetConfig::new(3, 2).unwrap();
    check_additivity(&cfg3.tau().unwrap(), 4).unwrap();
    check_additivity(&Quasimeasure::haar(3), 4).unwrap();
    println!("[PASS] criterion 05: children additivity on every constructed quasimeasure, ranks <6 (d=2) and <4 (d=3)");
}

#[test]
fn criterion_06_closed_form_coefficients() {
    let t0 = Instant::now();
    let indices = all_indices_below(5);
    for (label, cfg) in permutation_configs() {
        let tau = cfg.tau().unwrap();
        for n in &indices {
            let closed = cfg.coefficient(n).unwrap();
            let brute = fourier_coefficient(&tau, n, 5).unwrap();
            assert_eq!(closed, brute, "config {label}, n={n:?}");
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("[PASS] criterion 06: closed-form coefficients equal rank-5 integrals for all n<32*1, 4 permutation configs, in {elapsed:?}");
}

#[test]
fn criterion_07_closed_form_local_coefficients() {
    for (label, cfg) in permutation_configs() {
        let tau = cfg.tau().unwrap();
        let cubes: Vec<DyadicCube> = DyadicCube::all_at_rank(2, 2).unwrap().collect();
        assert_eq!(cubes.len(), 16);
        for n in all_indices_below(5).iter().filter(|n| in_stage2_block(n)) {
            for cube in &cubes {
                let closed = cfg.coefficient_on_cube(n, cube).unwrap();
                let brute = local_coefficient(&tau, n, cube, 5).unwrap();
                assert_eq!(closed, brute, "config {label}, n={n:?}, cube {cube}");
            }
        }
    }
    println!("[PASS] criterion 07: localized closed forms equal localized integrals on all 16 rank-2 cubes, 4 permutation configs");
}

#[test]
fn criterion_08_off_block_coefficients_vanish() {
    let cfg = identity_cfg();
    let tau = cfg.tau().unwrap();
    assert_eq!(cfg.coefficient(&WalshIndex::zero(2)).unwrap(), DyadicRational::one());
    assert_eq!(
        fourier_coefficient(&tau, &WalshIndex::zero(2), 5).unwrap(),
        DyadicRational::one()
    );
    let mut checked = 0;
    for n in all_indices_below(5) {
        let stage1 = n == WalshIndex::from_u64s(&[1, 1]);
        if n.is_zero() || stage1 || in_stage2_block(&n) {
            continue;
        }
        assert!(cfg.coefficient(&n).unwrap().is_zero(), "closed form at {n:?}");
        assert!(
            fourier_coefficient(&tau, &n, 5).unwrap().is_zero(),
            "integral at {n:?}"
        );
        checked += 1;
    }
    assert_eq!(checked, 1024 - 2 - 256);
    println!("[PASS] criterion 08: unit mass at n=0 and exact zero on all {checked} off-block indices below 32*1");
}

#[test]
fn criterion_09_between_scale_vanishing_and_measure_identity() {
    let cfg = identity_cfg();
    let tau = cfg.tau().unwrap();
    // local integrals vanish between the scales
    let mut vanished = 0;
    for n in all_indices_below(5) {
        let below_grid = n.below_pow2(2);
        if in_stage2_block(&n) || below_grid {
            continue;
        }
        for cube in DyadicCube::all_at_rank(2, 2).unwrap() {
            assert!(
                local_coefficient(&tau, &n, &cube, 5).unwrap().is_zero(),
                "n={n:?} cube {cube}"
            );
        }
        vanished += 1;
    }
    // plain-measure integral over the stage part equals 2^-s times the
    // quasimeasure integral, on every surviving rank-2 cube
    let mut windows = 0;
    for cube in DyadicCube::all_at_rank(2, 2).unwrap() {
        if !cfg.cube_in_partial_intersection(&cube, 1).unwrap() {
            continue;
        }
        windows += 1;
        for n in all_indices_below(5) {
            let mut lhs = DyadicRational::zero();
            for sub in cube.subcubes_at_rank(5).unwrap() {
                if cfg.cube_in_stage_set(&sub, 2).unwrap() {
                    let w = walsh_on_cube(&n, &sub).unwrap();
                    lhs = &lhs + &(sub.measure() * DyadicRational::from_integer(w as i64));
                }
            }
            let rhs = local_coefficient(&tau, &n, &cube, 5).unwrap().times_pow2(-2);
            assert_eq!(lhs, rhs, "n={n:?} cube {cube}");
        }
    }
    assert_eq!(windows, 8);
    println!("[PASS] criterion 09: {vanished} between-scale indices vanish on all rank-2 cubes; measure integral identity on {windows} surviving cubes");
}

#[test]
fn criterion_10_partial_intersection_measures() {
    let cfg = identity_cfg();
    assert_eq!(cfg.partial_intersection_measure(1).unwrap(), DyadicRational::pow2(-1));
    assert_eq!(cfg.partial_intersection_measure(2).unwrap(), DyadicRational::pow2(-2));
    let cfg3 = MSetConfig::new(3, 1).unwrap();
    assert_eq!(cfg3.partial_intersection_measure(1).unwrap(), DyadicRational::pow2(-1));
    println!("[PASS] criterion 10: surviving measure halves per stage: 2^-s at d=2 (s=1,2) and d=3 (s=1)");
}

#[test]
fn criterion_11_halving_geometry() {
    for d in [2usize, 3] {
        let cfg = MSetConfig::new(d, 2).unwrap();
        for s in 1..=2u32 {
            let coarse = (2 * cfg.sequence().rank(s).unwrap()) as u32;
            for cube in DyadicCube::all_at_rank(d, coarse).unwrap() {
                if s > 1 && !cfg.cube_in_partial_intersection(&cube, s - 1).unwrap() {
                    continue;
                }
                let inside = cube
                    .children()
                    .iter()
                    .filter(|c| cfg.cube_in_stage_set(c, s).unwrap())
                    .count();
                assert_eq!(inside, 1 << (d - 1), "d={d} s={s} cube {cube}");
            }
        }
    }
    println!("[PASS] criterion 11: every surviving coarse cube keeps exactly 2^(d-1) of its 2^d children, s<=2, d<=3");
}

#[test]
fn criterion_12_partial_sums_vanish_off_the_set() {
    let cfg = identity_cfg();
    let tau = cfg.tau().unwrap();
    let orders: Vec<WalshIndex> = (1..=4u64)
        .flat_map(|a| (1..=4u64).map(move |b| WalshIndex::from_u64s(&[a, b])))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut done = 0;
    while done < 100 {
        let g = DyadicPoint::random(&mut rng, 2, 12);
        let Some(w) = cfg.off_set_rank(&g, 5).unwrap() else {
            continue;
        };
        let report = zero_sum_check(&tau, &g, w, &orders, 8).unwrap();
        assert!(report.precondition_ok);
        assert!(report.all_zero, "g={g} w={w}");
        assert_eq!(report.witness_rank, Some(w));
        done += 1;
    }
    // restriction to a window: sums vanish at every point outside it
    let window = DyadicCube::all_at_rank(2, 2)
        .unwrap()
        .find(|c| cfg.cube_meets_set(c).unwrap())
        .unwrap();
    let restricted = tau.restrict(window.clone()).unwrap();
    let mut done_restricted = 0;
    while done_restricted < 100 {
        let g = DyadicPoint::random(&mut rng, 2, 12);
        if DyadicCube::of_point(&g, window.rank()).unwrap() == window {
            continue;
        }
        let report = zero_sum_check(&restricted, &g, window.rank(), &orders, 8).unwrap();
        assert!(report.precondition_ok);
        assert!(report.all_zero, "restricted, g={g}");
        done_restricted += 1;
    }
    println!("[PASS] criterion 12: orders 2^w*(M<=4) sum to exact zero at 100 off-set and 100 off-window points");
}

#[test]
fn criterion_13_coefficient_magnitude_rigidity() {
    let cfg = identity_cfg();
    for s in 1..=2u32 {
        let ms = cfg.sequence().rank(s).unwrap();
        let lo = 1u64 << (2 * ms);
        let hi = 1u64 << (2 * ms + 1);
        let peak = DyadicRational::pow2(cfg.magnitude_exponent(s).unwrap());
        let mut alive_addresses = 0u64;
        for cube in DyadicCube::all_at_rank(2, ms as u32).unwrap() {
            let alive = s == 1 || cfg.cube_in_partial_intersection(&cube, s - 1).unwrap();
            alive_addresses += alive as u64;
        }
        let mut max_seen = DyadicRational::zero();
        let mut attained = 0u64;
        for n1 in lo..hi {
            for n2 in lo..hi {
                let v = cfg
                    .coefficient(&WalshIndex::from_u64s(&[n1, n2]))
                    .unwrap()
                    .abs();
                if v > max_seen {
                    max_seen = v.clone();
                }
                if v == peak {
                    attained += 1;
                }
            }
        }
        assert_eq!(max_seen, peak, "stage {s} peak");
        // 2^(d m_s) free column choices per surviving address
        assert_eq!(attained, alive_addresses << (2 * ms), "stage {s} attainment");
    }
    println!("[PASS] criterion 13: block peak is 2^(s-1-d m_s), attained by exactly 2^(d m_s) indices per surviving address, s<=2");
}

#[test]
fn criterion_14_tail_bound() {
    let cfg = identity_cfg();
    let coeffs = NullSeriesCoefficients::new(cfg.clone());
    let bound = tail_bound(2, 2, cfg.sequence()).unwrap();
    assert_eq!(bound, DyadicRational::from_integer(8));
    let m2 = cfg.sequence().rank(2).unwrap() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut done = 0;
    while done < 100 {
        let g = DyadicPoint::random(&mut rng, 2, 8);
        let Some(w) = cfg.off_set_rank(&g, 5).unwrap() else {
            continue;
        };
        if w > m2 {
            continue;
        }
        for n1 in 17..=32u64 {
            for n2 in 17..=32u64 {
                let s = block_partial_sum(&coeffs, &WalshIndex::from_u64s(&[n1, n2]), &g).unwrap();
                assert!(s.abs() <= bound, "g={g} N=({n1},{n2}) S={s}");
            }
        }
        done += 1;
    }
    println!("[PASS] criterion 14: |S_N| <= 2^(d+s-m_s/2) = 8 across the whole stage-2 block at 100 early-departure points");
}

#[test]
fn criterion_15_factorized_block_sums() {
    let cfg = identity_cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let g = DyadicPoint::random(&mut rng, 2, 6);
        for n1 in 17..=32u64 {
            for n2 in 17..=32u64 {
                let n = WalshIndex::from_u64s(&[n1, n2]);
                let fast = factorized_block_sum(&cfg, &n, &g).unwrap();
                let slow = naive_block_component(&cfg, 2, &n, &g).unwrap();
                assert_eq!(fast, slow, "N=({n1},{n2}) g={g}");
            }
        }
    }
    // a stage-3 pointwise block sum (2^40 virtual terms) in under a second
    let cfg3 = MSetConfig::new(2, 3).unwrap();
    let g = DyadicPoint::random(&mut rng, 2, 21);
    let t0 = Instant::now();
    let n = WalshIndex::from_u64s(&[(1 << 20) + 654_321, (1 << 20) + 250_000]);
    let _ = factorized_block_sum(&cfg3, &n, &g).unwrap();
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "stage-3 sum took {elapsed:?}");
    println!("[PASS] criterion 15: factorized block sums equal naive enumeration on a 16x16 grid x 20 points; stage-3 point sum in {elapsed:?}");
}

#[test]
fn criterion_16_iterated_equals_rectangular() {
    // d = 2, both orders, full truncation over stages 1..2
    let cfg = identity_cfg();
    let coeffs = NullSeriesCoefficients::new(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..15 {
        let g = DyadicPoint::random(&mut rng, 2, 6);
        let rect = block_partial_sum(&coeffs, &WalshIndex::from_u64s(&[32, 32]), &g).unwrap();
        for order in [[0usize, 1], [1, 0]] {
            let it =
                iterated_partial_sum(&coeffs, &order, &BigUint::from(32u32), &g).unwrap();
            assert_eq!(it, rect, "order {order:?} at {g}");
        }
    }
    // d = 3: all six orders at stage 1, both extreme orders at stage 2
    let cfg3 = MSetConfig::new(3, 2).unwrap();
    let coeffs3 = NullSeriesCoefficients::new(cfg3);
    let orders6: [[usize; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for _ in 0..10 {
        let g = DyadicPoint::random(&mut rng, 3, 6);
        let rect1 = block_partial_sum(&coeffs3, &WalshIndex::from_u64s(&[2, 2, 2]), &g).unwrap();
        for order in orders6 {
            let it = iterated_partial_sum(&coeffs3, &order, &BigUint::from(2u32), &g).unwrap();
            assert_eq!(it, rect1, "stage-1 order {order:?}");
        }
        let rect2 =
            block_partial_sum(&coeffs3, &WalshIndex::from_u64s(&[32, 32, 32]), &g).unwrap();
        for order in [[0usize, 1, 2], [2, 1, 0]] {
            let it = iterated_partial_sum(&coeffs3, &order, &BigUint::from(32u32), &g).unwrap();
            assert_eq!(it, rect2, "stage-2 order {order:?}");
        }
    }
    println!("[PASS] criterion 16: iterated sums match rectangular sums at full truncation (2 orders d=2; all 6 orders d=3)");
}

#[test]
fn criterion_17_symmetric_set_integrals_persist() {
    let cfg = identity_cfg();
    let seq =
        SymmetricSequence::new(&cfg, &SymmetricSequence::default_bases(&cfg, 2).unwrap()).unwrap();
    let sym_tau = seq.tau(&cfg).unwrap();
    let staged_tau = cfg.tau().unwrap();
    let mut witnesses = 0;
    for rank in 0..=2u32 {
        for window in DyadicCube::all_at_rank(2, rank).unwrap() {
            if !seq.cube_meets_set(&window).unwrap() {
                continue;
            }
            let mass = sym_tau.value(&window).unwrap();
            assert!(!mass.is_zero());
            for s in 1..=2u32 {
                let st = seq.stage(s).unwrap();
                let k = st.resolution.max(rank);
                let integral = u_integral(&sym_tau, &st.index, &window, k).unwrap();
                assert_eq!(integral, mass, "window {window} stage {s}");
                // the staged set integrates the same index within the
                // decaying block magnitude
                let contrast = u_integral(&staged_tau, &st.index, &window, k).unwrap();
                let bound = DyadicRational::pow2(cfg.magnitude_exponent(s).unwrap());
                assert!(contrast.abs() <= bound, "contrast at {window} stage {s}");
                witnesses += 1;
            }
        }
    }
    assert!(witnesses >= 2 * (1 + 2 + 4));
    println!("[PASS] criterion 17: symmetric-set integrals equal the window mass at every stage ({witnesses} checks); staged-set integrals decay");
}

#[test]
fn criterion_18_kernel_difference_identity() {
    let mut checked = 0;
    for n in 1..=64u64 {
        for q in 0..n.trailing_zeros() {
            assert!(
                dirichlet_difference_exhaustive(n, q, 8).unwrap(),
                "n={n} q={q}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 63); // sum of trailing-zero counts over 1..=64
    println!("[PASS] criterion 18: kernel increment identity holds exhaustively for N<=64, all window ranks below the lowest digit");
}

/// Cross-check: the two kernel integral routes and the coefficient route
/// give one value at small orders.
#[test]
fn partial_sum_consistency_triangle() {
    let cfg = identity_cfg();
    let tau = cfg.tau().unwrap();
    let coeffs = NullSeriesCoefficients::new(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let g = DyadicPoint::random(&mut rng, 2, 6);
        for n1 in 1..=8u64 {
            for n2 in 1..=8u64 {
                let n = WalshIndex::from_u64s(&[n1, n2]);
                let a = partial_sum(&tau, &n, &g, 6, PartialSumRoute::TranslateMeasure).unwrap();
                let b = partial_sum(&tau, &n, &g, 6, PartialSumRoute::TranslateKernel).unwrap();
                let c = block_partial_sum(&coeffs, &n, &g).unwrap();
                assert_eq!(a, b);
                assert_eq!(a, c);
            }
        }
    }
    println!("[PASS] consistency: kernel-representation routes and coefficient summation agree for all N<=(8,8)");
}

/// The named verification suites (the CLI `verify` mode) all pass with the
/// default experiment shape.
#[test]
fn verify_mode_matrix_is_green() {
    let outcomes = run_all(&VerifySettings::new(2, 2, 8, 0));
    for o in &outcomes {
        assert!(o.passed, "{}: {}", o.name, o.detail);
    }
    println!("[PASS] verify-mode matrix: {} suites green", outcomes.len());
}
