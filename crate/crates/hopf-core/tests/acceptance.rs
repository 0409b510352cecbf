//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured figures (run with `--nocapture` to see them).
//!
//! The determinism criterion for scenario reports lives in the CLI crate's
//! acceptance test.

use hopf_core::discrete::{
    union_systems, z_on_cyclic_system, z_translation_system, DiscreteGroup, DiscreteSystem,
    GroupWord,
};
use hopf_core::engine::{
    classify_point, classify_set, default_level_grid, hopf_transform, lattice_reduce,
    maharam_criterion, orbit_separator, return_volume, DecisionPolicy, SetVerdict, Verdict,
};
use hopf_core::group::{GroupElement, GroupModel, ScanProfile};
use hopf_core::homogeneous::{
    compactness_integral, weil_verify, CompactnessVerdict, GroupPair, SubgroupDescriptor,
};
use hopf_core::quad::QuadratureSpec;
use hopf_core::rng::stream_rng;
use hopf_core::space::{
    catalog, circle_rotation_default, coset_space, integer_translation, maharam_extend_prob,
    pairing_residual, real_exp_translation, real_translation, sample_group_element,
    translation_space, Point, SetDescriptor, SpaceModel, TestFunction,
};
use num_rational::BigRational;
use rand::Rng;
use std::collections::BTreeSet;
use std::time::Instant;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn policy() -> DecisionPolicy {
    DecisionPolicy::default()
}

fn ground_truth_case(space: &SpaceModel, f: &TestFunction, expect: &Verdict, seed: u64) -> (usize, usize) {
    let points = space.sample(100, seed, 1);
    let mut correct = 0;
    let mut opposite = 0;
    for x in &points {
        let series = hopf_transform(space, f, x, 12, &spec()).unwrap();
        let class = classify_point(&series, &policy());
        if &class.verdict == expect {
            correct += 1;
        } else if class.verdict.is_decided() {
            opposite += 1;
        }
    }
    (correct, opposite)
}

#[test]
fn criterion_1_ground_truth_classification() {
    let t0 = Instant::now();
    let cases: Vec<(SpaceModel, TestFunction, Verdict)> = vec![
        (circle_rotation_default(), TestFunction::ConstOnProb, Verdict::Conservative),
        (integer_translation(), TestFunction::ExpDecay { base: 2.0 }, Verdict::Dissipative),
        (real_translation(), TestFunction::Gaussian { sigma: 1.0 }, Verdict::Dissipative),
        (
            translation_space(vec![1.0], GroupModel::real_vector(1)).unwrap(),
            TestFunction::Gaussian { sigma: 1.0 },
            Verdict::Dissipative,
        ),
        (
            coset_space(
                &GroupPair::new(GroupModel::euclidean_motions(), SubgroupDescriptor::Rotations)
                    .unwrap(),
            )
            .unwrap(),
            TestFunction::Gaussian { sigma: 1.0 },
            Verdict::Dissipative,
        ),
    ];
    for (i, (space, f, expect)) in cases.iter().enumerate() {
        let (correct, opposite) = ground_truth_case(space, f, expect, 1000 + i as u64);
        assert!(correct >= 99, "{}: {correct}/100 correct", space.name);
        assert_eq!(opposite, 0, "{}: opposite verdicts", space.name);
    }

    // the geometric series reaches its limit by window 8
    let space = integer_translation();
    for x in space.sample(20, 7, 2) {
        let s = hopf_transform(&space, &TestFunction::ExpDecay { base: 2.0 }, &x, 8, &spec())
            .unwrap();
        let last = s.window_values.last().unwrap().1;
        assert!((last - 3.0).abs() <= 1e-9, "S_8 = {last} at {x:?}");
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs() < 60, "runtime {elapsed:?}");
    println!(
        "ACCEPTANCE 1 ground-truth classification: PASS (5 systems x 100 points, runtime {:.1?})",
        elapsed
    );
}

#[test]
fn criterion_2_pairing_identity_residuals() {
    let t0 = Instant::now();
    let smooth_pairs = [
        (TestFunction::Gaussian { sigma: 1.0 }, TestFunction::Gaussian { sigma: 0.7 }),
        (TestFunction::Gaussian { sigma: 0.8 }, TestFunction::Gaussian { sigma: 1.3 }),
    ];
    let mut rng = stream_rng(2024, 2);
    let mut worst_cont = 0.0f64;
    let mut worst_disc = 0.0f64;
    for mut space in catalog() {
        // test functions decay fast; a tight truncation keeps this cheap
        space.truncation = space.truncation.min(12.0);
        let discrete = space.is_discrete_domain();
        let mut done = 0;
        while done < 20 {
            let g = sample_group_element(&space.group, 2.5, &mut rng);
            if space.group.norm(&g) > 2.5 {
                continue;
            }
            let (f0, f1) = &smooth_pairs[done % smooth_pairs.len()];
            let (lhs, rhs, residual) = pairing_residual(&space, &g, f0, f1, &spec()).unwrap();
            if lhs.abs().max(rhs.abs()) < 1e-12 {
                // both sides vanish (function supported outside the
                // truncation); not a meaningful triple
                done += 1;
                continue;
            }
            if discrete {
                assert!(residual <= 1e-12, "{}: residual {residual}", space.name);
                worst_disc = worst_disc.max(residual);
            } else {
                assert!(residual <= 1e-6, "{}: residual {residual}", space.name);
                worst_cont = worst_cont.max(residual);
            }
            done += 1;
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs() < 120, "runtime {elapsed:?}");
    println!(
        "ACCEPTANCE 2 pairing identity: PASS (worst continuous {:.2e}, worst discrete {:.2e}, runtime {:.1?})",
        worst_cont, worst_disc, elapsed
    );
}

#[test]
fn criterion_3_maharam_suite() {
    // (a) level-set criterion agrees with the transform verdict wherever
    // both are decided
    let mut instances: Vec<(SpaceModel, TestFunction)> = vec![
        (circle_rotation_default(), TestFunction::ConstOnProb),
        (integer_translation(), TestFunction::ExpDecay { base: 2.0 }),
        (real_translation(), TestFunction::Gaussian { sigma: 1.0 }),
        (real_exp_translation(), TestFunction::Gaussian { sigma: 1.0 }),
        (
            translation_space(vec![1.0], GroupModel::real_vector(1)).unwrap(),
            TestFunction::Gaussian { sigma: 1.0 },
        ),
        (
            coset_space(
                &GroupPair::new(GroupModel::euclidean_motions(), SubgroupDescriptor::Rotations)
                    .unwrap(),
            )
            .unwrap(),
            TestFunction::Gaussian { sigma: 1.0 },
        ),
    ];
    // the rest of the registry, with an integrable test function each
    for space in catalog() {
        if instances.iter().any(|(s, _)| s.name == space.name) {
            continue;
        }
        let f = if space.is_discrete_domain() {
            TestFunction::ExpDecay { base: 2.0 }
        } else if space.name.starts_with("maharam") || space.name.starts_with("circle") {
            TestFunction::ConstOnProb
        } else {
            TestFunction::Gaussian { sigma: 1.0 }
        };
        instances.push((space, f));
    }
    let grid: Vec<f64> = default_level_grid().into_iter().step_by(5).collect();
    let mut agreements = 0;
    for (space, f) in &instances {
        let x = space.sample(1, 33, 3).pop().unwrap();
        let series = hopf_transform(space, f, &x, 10, &spec()).unwrap();
        let point_verdict = classify_point(&series, &policy()).verdict;
        let crit =
            maharam_criterion(space, f, &x, &grid, 10, &policy(), &spec().with_scan(128)).unwrap();
        if point_verdict.is_decided() && crit.verdict.is_decided() {
            assert_eq!(point_verdict, crit.verdict, "{}", space.name);
            agreements += 1;
        }
    }
    assert!(agreements >= 8, "only {agreements} decided agreements");

    // (b) extension of the circle rotation is conservative, of the
    // integer translation dissipative
    let ext = maharam_extend_prob(&circle_rotation_default(), 8.0);
    let x = ext.sample(1, 5, 5).pop().unwrap();
    let s = hopf_transform(&ext, &TestFunction::ConstOnProb, &x, 10, &spec()).unwrap();
    assert_eq!(classify_point(&s, &policy()).verdict, Verdict::Conservative);

    let base = integer_translation();
    let ext = maharam_extend_prob(&base, 8.0);
    let x = ext.sample(1, 6, 6).pop().unwrap();
    let s = hopf_transform(&ext, &TestFunction::ExpDecay { base: 2.0 }, &x, 10, &spec()).unwrap();
    assert_eq!(classify_point(&s, &policy()).verdict, Verdict::Dissipative);

    // (c) reweighted extension cocycle dominates min{1, ∇²} on 10^4 samples
    let base = real_exp_translation();
    let ext = maharam_extend_prob(&base, 12.0);
    let mut rng = stream_rng(99, 4);
    let mut violations = 0;
    for _ in 0..10_000 {
        let g = sample_group_element(&ext.group, 6.0, &mut rng);
        let p = ext.sample(1, rng.gen(), 0).pop().unwrap();
        let (bx, _) = match &p {
            Point::WithFiber(b, t) => ((**b).clone(), *t),
            _ => unreachable!(),
        };
        let nabla = base.rn_cocycle(&g, &bx).unwrap();
        let hat = ext.rn_cocycle(&g, &p).unwrap();
        if hat < (nabla * nabla).min(1.0) - 1e-12 {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
    println!(
        "ACCEPTANCE 3 maharam suite: PASS ({agreements} criterion agreements, extensions classified, 0/10000 bound violations)"
    );
}

#[test]
fn criterion_4_lattice_identity() {
    let space = real_translation();
    let f = TestFunction::Gaussian { sigma: 1.0 };
    let mut rng = stream_rng(44, 0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let x = Point::Real(rng.gen_range(-3.0..3.0));
        let rep = lattice_reduce(&space, &f, &x, 8, &spec()).unwrap();
        worst = worst.max(rep.max_residual);
        assert!(
            rep.max_residual <= 1e-6,
            "lattice residual {} at {x:?}",
            rep.max_residual
        );
    }
    println!("ACCEPTANCE 4 lattice identity: PASS (50 points, worst residual {worst:.2e})");
}

#[test]
fn criterion_5_weil_formula() {
    // (E(2), SO(2)) with a gaussian
    let pair =
        GroupPair::new(GroupModel::euclidean_motions(), SubgroupDescriptor::Rotations).unwrap();
    let w = pair.ambient.window_with_radius(1, 12.0);
    let phi = |g: &GroupElement| match g {
        GroupElement::Motion { shift, .. } => {
            (-0.5 * (shift[0] * shift[0] + shift[1] * shift[1])).exp()
        }
        _ => unreachable!(),
    };
    let (lhs, rhs, residual) =
        weil_verify(&pair, &phi, &w, &spec(), ScanProfile::Smooth).unwrap();
    assert!(residual <= 1e-6, "E2 residual {residual} ({lhs} vs {rhs})");

    // exact equality on (Z x Z/2, Z/2)
    let pair = GroupPair::new(
        GroupModel::product(GroupModel::integer_lattice(1), GroupModel::finite_cyclic(2)),
        SubgroupDescriptor::CyclicRightFactor,
    )
    .unwrap();
    let w = pair.ambient.window_with_radius(1, 16.0);
    let phi = |g: &GroupElement| match g {
        GroupElement::Pair(l, r) => match (&**l, &**r) {
            (GroupElement::Ints(k), GroupElement::Cyclic(c)) => {
                if k[0].abs() <= 6 {
                    1.0 / (1.0 + k[0].abs() as f64) + *c as f64 * 0.5
                } else {
                    0.0
                }
            }
            _ => unreachable!(),
        },
        _ => unreachable!(),
    };
    let (lhs, rhs, _) = weil_verify(&pair, &phi, &w, &spec(), ScanProfile::Smooth).unwrap();
    assert_eq!(lhs, rhs, "discrete Weil formula is exact");

    // compactness integral: 2π for SO(2), growth for the line subgroup
    let pair =
        GroupPair::new(GroupModel::euclidean_motions(), SubgroupDescriptor::Rotations).unwrap();
    let rep = compactness_integral(&pair, 6, &spec());
    match rep.verdict {
        CompactnessVerdict::Finite(v) => {
            assert!((v - std::f64::consts::TAU).abs() <= 1e-9, "SO(2) integral {v}")
        }
        _ => panic!("SO(2) compactness integral must be finite"),
    }
    let line =
        GroupPair::new(GroupModel::real_vector(2), SubgroupDescriptor::LineInPlane).unwrap();
    let rep = compactness_integral(&line, 8, &spec());
    assert_eq!(rep.verdict, CompactnessVerdict::InfiniteByGrowth);
    for (n, v) in &rep.window_values {
        let r = GroupModel::window_radius(*n);
        assert!((v - 2.0 * r).abs() <= 1e-9 * r, "linear growth at window {n}");
    }
    println!("ACCEPTANCE 5 weil formula: PASS (E2 residual {residual:.2e}, discrete exact, compactness verdicts)");
}

// --- criterion 6: randomized discrete systems against a brute-force oracle

/// Independent classifier: a core point is conservative iff some word of
/// positive length and infinite order fixes it, enumerating every word up
/// to the radius plus the orbit diameter (full return enumeration).
fn oracle_conservative(ds: &DiscreteSystem, x: usize) -> bool {
    let orbit_size = {
        // breadth-first orbit size, independent of the engine's helpers
        let mut seen = BTreeSet::from([x]);
        let mut stack = vec![x];
        while let Some(p) = stack.pop() {
            for gi in 0..ds.group.generator_count() {
                for sign in [1i64, -1] {
                    if let Some(q) = ds.apply_gen(gi, sign, p) {
                        if seen.insert(q) {
                            stack.push(q);
                        }
                    }
                }
            }
        }
        seen.len()
    };
    let max_len = ds.exact_radius as u64 + orbit_size as u64;
    for w in ds.enumerate_words(max_len.min(40)) {
        if !w.is_identity() && w.infinite_order() && ds.apply_word(&w, x) == Some(x) {
            return true;
        }
    }
    false
}

fn random_rational(rng: &mut impl Rng) -> BigRational {
    BigRational::new(rng.gen_range(1i64..10).into(), rng.gen_range(1i64..10).into())
}

/// Builds a random certified system out of cycle/chain/fixed-point
/// components over Z, Z², or Z × Z/2.
fn random_system(seed: u64) -> DiscreteSystem {
    let mut rng = stream_rng(seed, 60);
    let radius: u32 = rng.gen_range(3..=5);
    let flavor = rng.gen_range(0..3);
    let group = match flavor {
        0 => DiscreteGroup::z(),
        1 => DiscreteGroup::z2(),
        _ => DiscreteGroup::z_cross_cyclic(2),
    };
    let mut labels: Vec<String> = Vec::new();
    let mut weights: Vec<BigRational> = Vec::new();
    let mut gen_maps: Vec<Vec<Option<usize>>> = vec![Vec::new(); group.generator_count()];
    let mut core: Vec<bool> = Vec::new();
    let mut core_budget = 32usize;

    let add_point = |labels: &mut Vec<String>,
                         weights: &mut Vec<BigRational>,
                         gen_maps: &mut Vec<Vec<Option<usize>>>,
                         core: &mut Vec<bool>,
                         rng: &mut rand_chacha::ChaCha12Rng,
                         in_core: bool|
     -> usize {
        let idx = labels.len();
        labels.push(format!("q{idx}"));
        weights.push(random_rational(rng));
        for m in gen_maps.iter_mut() {
            m.push(None);
        }
        core.push(in_core);
        idx
    };

    let components = rng.gen_range(1..=3);
    for _ in 0..components {
        if core_budget == 0 {
            break;
        }
        match group.z_rank {
            1 => {
                let is_cycle = rng.gen_bool(0.5);
                if is_cycle {
                    let len = rng.gen_range(2..=8usize).min(core_budget.max(2));
                    let base: Vec<usize> = (0..len)
                        .map(|_| {
                            add_point(&mut labels, &mut weights, &mut gen_maps, &mut core, &mut rng, true)
                        })
                        .collect();
                    for i in 0..len {
                        gen_maps[0][base[i]] = Some(base[(i + 1) % len]);
                    }
                    core_budget = core_budget.saturating_sub(len);
                    if group.cyclic.first() == Some(&2) {
                        // total flip: swap two parallel copies of the cycle
                        let twin: Vec<usize> = (0..len)
                            .map(|_| {
                                add_point(&mut labels, &mut weights, &mut gen_maps, &mut core, &mut rng, true)
                            })
                            .collect();
                        for i in 0..len {
                            gen_maps[0][twin[i]] = Some(twin[(i + 1) % len]);
                            gen_maps[1][base[i]] = Some(twin[i]);
                            gen_maps[1][twin[i]] = Some(base[i]);
                        }
                        core_budget = core_budget.saturating_sub(len);
                    }
                } else {
                    let core_len = rng.gen_range(1..=4usize).min(core_budget);
                    let len = core_len + 2 * radius as usize;
                    let pts: Vec<usize> = (0..len)
                        .map(|i| {
                            let in_core = i >= radius as usize && i < radius as usize + core_len;
                            add_point(&mut labels, &mut weights, &mut gen_maps, &mut core, &mut rng, in_core)
                        })
                        .collect();
                    for i in 0..len - 1 {
                        gen_maps[0][pts[i]] = Some(pts[i + 1]);
                    }
                    if group.cyclic.first() == Some(&2) {
                        // flip acting as the identity: finite isotropy
                        for &p in &pts {
                            gen_maps[1][p] = Some(p);
                        }
                    }
                    core_budget = core_budget.saturating_sub(core_len);
                }
            }
            2 => {
                let l1 = rng.gen_range(2..=4usize);
                let cyclic2 = rng.gen_bool(0.5);
                if cyclic2 {
                    // torus: cycle x cycle, fully closed
                    let l2 = rng.gen_range(2..=4usize);
                    let grid: Vec<Vec<usize>> = (0..l1)
                        .map(|_| {
                            (0..l2)
                                .map(|_| {
                                    add_point(&mut labels, &mut weights, &mut gen_maps, &mut core, &mut rng, true)
                                })
                                .collect()
                        })
                        .collect();
                    for i in 0..l1 {
                        for j in 0..l2 {
                            gen_maps[0][grid[i][j]] = Some(grid[(i + 1) % l1][j]);
                            gen_maps[1][grid[i][j]] = Some(grid[i][(j + 1) % l2]);
                        }
                    }
                    core_budget = core_budget.saturating_sub(l1 * l2);
                } else {
                    // cycle x chain: conservative despite the escape
                    let core_len = rng.gen_range(1..=2usize);
                    let l2 = core_len + 2 * radius as usize;
                    let grid: Vec<Vec<usize>> = (0..l1)
                        .map(|_| {
                            (0..l2)
                                .map(|j| {
                                    let in_core =
                                        j >= radius as usize && j < radius as usize + core_len;
                                    add_point(&mut labels, &mut weights, &mut gen_maps, &mut core, &mut rng, in_core)
                                })
                                .collect()
                        })
                        .collect();
                    for i in 0..l1 {
                        for j in 0..l2 {
                            gen_maps[0][grid[i][j]] = Some(grid[(i + 1) % l1][j]);
                            if j + 1 < l2 {
                                gen_maps[1][grid[i][j]] = Some(grid[i][j + 1]);
                            }
                        }
                    }
                    core_budget = core_budget.saturating_sub(l1 * core_len);
                }
            }
            _ => unreachable!(),
        }
    }
    if !core.iter().any(|&c| c) {
        // ensure at least one certified core point
        let idx = add_point(&mut labels, &mut weights, &mut gen_maps, &mut core, &mut rng, true);
        for m in gen_maps.iter_mut() {
            m[idx] = Some(idx);
        }
    }
    DiscreteSystem::new(group, labels, weights, gen_maps, core, radius).expect("generated system is valid")
}

#[test]
fn criterion_6_discrete_oracle_equivalence() {
    let mut checked_points = 0usize;
    for seed in 0..200u64 {
        let ds = random_system(seed);
        let partition = ds.hopf_decompose_exact().unwrap();
        for x in ds.core_points() {
            let engine_says = partition.conservative.contains(&x);
            let oracle_says = oracle_conservative(&ds, x);
            assert_eq!(
                engine_says, oracle_says,
                "seed {seed}, point {x}: engine {engine_says} oracle {oracle_says}"
            );
            checked_points += 1;
        }
        // greedy T_max: covers the dissipative part and is transient
        let t = &partition.t_max;
        for &d in &partition.dissipative {
            let orbit_of_d = ds
                .orbits()
                .into_iter()
                .find(|o| o.contains(&d))
                .unwrap();
            assert!(
                t.t_max.iter().any(|s| orbit_of_d.contains(s)),
                "seed {seed}: dissipative point {d} not covered by G.t_max"
            );
        }
        if !t.t_max.is_empty() {
            let rep = ds.wandering_tests(&t.t_max).unwrap();
            assert!(rep.is_transient, "seed {seed}: t_max not transient");
        }
    }
    println!("ACCEPTANCE 6 discrete oracle equivalence: PASS (200 systems, {checked_points} core points)");
}

#[test]
fn criterion_7_hajian_ito_positive_null() {
    // Z on Z/12: P1 = everything with the uniform acip
    let ds = z_on_cyclic_system(12, 16);
    let inv = ds.invariant_measure_search().unwrap();
    assert_eq!(inv.p1.len(), 12);
    assert!(inv.p_inf.is_empty());
    let acip = inv.acip.unwrap();
    let twelfth = BigRational::new(1.into(), 12.into());
    assert!(acip.iter().all(|w| *w == twelfth));

    // Z on Z: P∞ = everything, witness ({0}, S = Z)
    let ds = z_translation_system(40, 16);
    let inv = ds.invariant_measure_search().unwrap();
    assert!(inv.p1.is_empty());
    assert_eq!(inv.p_inf.len(), ds.core_points().count());
    assert!(inv.acip.is_none());
    let (witness_set, witness) = inv.no_acip_witness.unwrap();
    assert_eq!(witness_set.len(), 1);
    assert_eq!(witness.modulus, 1, "S = Z itself");

    // mixed union splits into the periodic and escaping parts
    let ds = union_systems(&z_on_cyclic_system(12, 16), &z_translation_system(40, 16)).unwrap();
    let inv = ds.invariant_measure_search().unwrap();
    assert_eq!(inv.p1.len(), 12);
    assert!(!inv.p_inf.is_empty());
    assert!(inv.n_part.is_empty() && !inv.n_witnessed);
    assert!(inv.acip.is_some(), "acip supported on P1");

    // brute force over all subsets of a core <= 12: no weakly wandering
    // positive subset inside P1
    let ds = z_on_cyclic_system(12, 16);
    let points: Vec<usize> = ds.core_points().collect();
    let mut searched = 0usize;
    for mask in 1u32..(1 << points.len()) {
        let subset: BTreeSet<usize> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &p)| p)
            .collect();
        let rep = ds.wandering_tests(&subset).unwrap();
        assert!(
            rep.weakly_wandering.is_none(),
            "subset {subset:?} claims a weakly wandering witness"
        );
        searched += 1;
    }
    println!("ACCEPTANCE 7 hajian-ito / positive-null: PASS ({searched} subsets searched)");
}

#[test]
fn criterion_8_orbit_separator() {
    let spec = spec();
    // 50 same-orbit pairs in Z on Z: every entry agrees
    let space = integer_translation();
    let basis: Vec<SetDescriptor> = (0..3)
        .map(|k| SetDescriptor::interval(-(1 << k) as f64, (1 << k) as f64))
        .collect();
    let transient = vec![SetDescriptor::int_set([0]), SetDescriptor::int_set([-3, 2])];
    let mut rng = stream_rng(88, 0);
    for _ in 0..50 {
        let x0 = Point::Int(rng.gen_range(-20i64..=20));
        let shift = rng.gen_range(-8i64..=8);
        let x1 = space.act(&GroupElement::Ints(vec![shift]), &x0).unwrap();
        let rep =
            orbit_separator(&space, &x0, &x1, &basis, &transient, 8, &spec).unwrap();
        assert!(!rep.separated, "same orbit separated: {x0:?} {x1:?}");
    }

    // 50 cross-fiber pairs in the two-atom translation space: separated
    let space = translation_space(vec![0.3, 0.7], GroupModel::integer_lattice(1)).unwrap();
    let basis = vec![SetDescriptor::Atom(0), SetDescriptor::Atom(1)];
    let transient = vec![SetDescriptor::int_set([0])];
    for _ in 0..50 {
        let x0 = Point::Fibered { atom: 0, g: GroupElement::Ints(vec![rng.gen_range(-20i64..=20)]) };
        let x1 = Point::Fibered { atom: 1, g: GroupElement::Ints(vec![rng.gen_range(-20i64..=20)]) };
        let rep =
            orbit_separator(&space, &x0, &x1, &basis, &transient, 8, &spec).unwrap();
        assert!(rep.separated, "distinct fibers not separated: {x0:?} {x1:?}");
    }
    println!("ACCEPTANCE 8 orbit separator: PASS (50 same-orbit + 50 cross-fiber pairs)");
}

// --- supporting invariants exercised across criteria

#[test]
fn series_monotonicity_and_return_caps() {
    // every series is nondecreasing and return volumes never exceed the
    // window volume
    let mut rng = stream_rng(7, 7);
    for space in catalog().into_iter().take(6) {
        let x = space.sample(1, rng.gen(), 0).pop().unwrap();
        if let Ok(s) =
            hopf_transform(&space, &TestFunction::Gaussian { sigma: 1.0 }, &x, 8, &spec())
        {
            for w in s.window_values.windows(2) {
                assert!(w[1].1 >= w[0].1, "{}", space.name);
            }
        }
    }
    let space = circle_rotation_default();
    let s = return_volume(
        &space,
        &SetDescriptor::interval(0.2, 0.5),
        &Point::Circle(0.25),
        10,
        &spec(),
    )
    .unwrap();
    for ((_, v), vol) in s.window_values.iter().zip(&s.window_volumes) {
        assert!(*v <= vol + 1e-12);
    }
}

#[test]
fn classify_set_union_is_mixed() {
    // the classifier never returns an opposite verdict on the mixed union
    let union = hopf_core::space::disjoint_union(vec![
        (0.5, circle_rotation_default()),
        (0.5, integer_translation()),
    ])
    .unwrap();
    let arc = SetDescriptor::Component(0, Box::new(SetDescriptor::interval(0.0, 0.1)));
    let zero = SetDescriptor::Component(1, Box::new(SetDescriptor::int_set([0])));
    let a = SetDescriptor::Union(vec![arc, zero]);
    let points = vec![
        Point::InComponent(0, Box::new(Point::Circle(0.05))),
        Point::InComponent(1, Box::new(Point::Int(0))),
    ];
    let c = classify_set(&union, &a, &points, 12, &policy(), &spec()).unwrap();
    assert_eq!(c.verdict, SetVerdict::Mixed);
}

#[test]
fn discrete_engine_agrees_with_estimator_on_shared_instances() {
    // the exact engine and the windowed estimator see the same systems:
    // Z on Z (dissipative) and Z on Z/12 (conservative)
    let ds = z_translation_system(40, 16);
    let p = ds.hopf_decompose_exact().unwrap();
    assert!(p.conservative.is_empty());
    let space = integer_translation();
    let s = hopf_transform(
        &space,
        &TestFunction::ExpDecay { base: 2.0 },
        &Point::Int(0),
        10,
        &spec(),
    )
    .unwrap();
    assert_eq!(classify_point(&s, &policy()).verdict, Verdict::Dissipative);

    let ds = z_on_cyclic_system(12, 16);
    let p = ds.hopf_decompose_exact().unwrap();
    assert!(p.dissipative.is_empty());
    let space = hopf_core::space::cyclic_points(12);
    let s = hopf_transform(
        &space,
        &TestFunction::ConstOnProb,
        &Point::Label(3),
        10,
        &spec(),
    )
    .unwrap();
    assert_eq!(classify_point(&s, &policy()).verdict, Verdict::Conservative);

    // the period word reported for returns matches the estimator's
    // divergence through the quotient
    let rep = ds
        .returns_set_exact(&BTreeSet::from([0usize, 1]), 0)
        .unwrap();
    let via: GroupWord = rep.infinite_via.unwrap();
    assert_eq!(via.z[0].abs() % 12, 0);
}
