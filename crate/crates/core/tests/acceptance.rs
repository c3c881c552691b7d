//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single `criterion N: PASS|FAIL` line (visible with `--nocapture`).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use eloily_core::contextuality::{
    cabello_chi, degree_of_contextuality, gray_scan, verify_minimal_spread_property, violated_lines,
};
use eloily_core::games::{
    all_deviations, evaluate_pointline_game, first_point_deviations, optimal_doily_value,
    optimal_grid_value, strategy_from_assignment, GameSpec, Probability,
};

use eloily_core::geometry::{
    build_doily, build_eloily, build_w52, canonical_q, check_spread, disjoint_triples,
    elliptic_quadric, enumerate_subgeometries, hyperbolic_quadric, load,
};
use eloily_core::invariant::{
    canonical_dressing, canonical_duads, det3, i3_det, i3_trace, lift, max_i3, pfaffian_mismatches,
    quadrangle_geometry, DressedInvariant, HVMatrices, Quadrangle,
};
use eloily_core::pauli::ProjectivePoint;
use eloily_core::qsim::{
    delegation_protocol, find_shared_state, joint_distribution, measure_joint,
    quantum_win_probability, reference_state_four_players, reference_state_two_players,
    simulate_quantum, stabilizer_residual, Protocol, QuantumResponder, SharedStateSpec,
    StateVector,
};
use eloily_core::{Assignment, Geometry, PauliOperator, Sign, SubgeometryKind};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn report(n: u32, title: &str, check: Check) {
    match check {
        Ok(detail) => println!("criterion {n}: PASS  {title} ({detail})"),
        Err(why) => {
            println!("criterion {n}: FAIL  {title} ({why})");
            panic!("criterion {n} failed: {why}");
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let e = t.elapsed();
    ensure(e < limit, || format!("{what} took {e:?}, limit {limit:?}"))?;
    Ok(e)
}

fn eloily() -> Geometry {
    build_eloily(&canonical_q()).unwrap()
}

fn q(n: u64, d: u64) -> Probability {
    Probability::new(n, d)
}

#[test]
fn criterion_1_eloily_golden_data() {
    let check = || -> Check {
        let t = Instant::now();
        let g = eloily();
        let golden =
            load(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/eloily_golden.txt"))
                .map_err(|e| e.to_string())?;
        ensure(g == golden, || {
            "built eloily differs from the golden table".into()
        })?;
        ensure(g.num_points() == 27 && g.num_lines() == 45, || {
            format!("{} points, {} lines", g.num_points(), g.num_lines())
        })?;
        let neg = g.negative_lines();
        ensure(neg.len() == 9, || format!("{} negative lines", neg.len()))?;
        check_spread(&g, &neg).map_err(|e| format!("negative lines: {e}"))?;
        let e = within(t, Duration::from_secs(1), "build and compare")?;
        Ok(format!(
            "27 points, 45 lines, 9 negative lines forming a spread, {e:?}"
        ))
    };
    report(1, "golden eloily", check());
}

/// Symplectic form on (x, z) bit pairs.
fn omega(a: u64, b: u64) -> u32 {
    let (ax, az, bx, bz) = (a >> 3, a & 7, b >> 3, b & 7);
    ((ax & bz).count_ones() + (az & bx).count_ones()) % 2
}

fn quadric_set(qid: u64) -> BTreeSet<u64> {
    // Q_q(p) = Q_0(p) + ⟨p, q⟩, with Q_0 the Y-count parity.
    (1..64u64)
        .filter(|&p| (((p >> 3) & p & 7).count_ones() + omega(p, qid)) % 2 == 0)
        .collect()
}

fn count_grids(g: &Geometry) -> usize {
    let masks: Vec<u32> = (0..g.num_lines())
        .map(|l| g.members(l).iter().fold(0, |m, &p| m | 1 << p))
        .collect();
    let mut grids = BTreeSet::new();
    let n = masks.len();
    for a in 0..n {
        for b in a + 1..n {
            if masks[a] & masks[b] != 0 {
                continue;
            }
            for c in b + 1..n {
                if (masks[a] | masks[b]) & masks[c] != 0 {
                    continue;
                }
                let cover = masks[a] | masks[b] | masks[c];
                let inside: Vec<usize> = (0..n).filter(|&l| masks[l] & !cover == 0).collect();
                let others: Vec<usize> = inside
                    .iter()
                    .copied()
                    .filter(|l| ![a, b, c].contains(l))
                    .collect();
                let transversal = others.len() == 3
                    && others.iter().fold(0u32, |m, &l| m | masks[l]) == cover
                    && others.iter().all(|&l| {
                        [a, b, c]
                            .iter()
                            .all(|&k| (masks[l] & masks[k]).count_ones() == 1)
                    });
                if inside.len() == 6 && transversal {
                    grids.insert(inside);
                }
            }
        }
    }
    grids.len()
}

#[test]
fn criterion_2_counting() {
    let check = || -> Check {
        let t = Instant::now();
        let w = build_w52().map_err(|e| e.to_string())?;
        ensure(w.num_points() == 63 && w.num_lines() == 315, || {
            format!("W(5,2): {} points, {} lines", w.num_points(), w.num_lines())
        })?;
        // oracle: totally isotropic triples {p, q, p^q}
        let mut oracle_lines = BTreeSet::new();
        for p in 1..64u64 {
            for r in p + 1..64 {
                if omega(p, r) == 0 && p ^ r != 0 {
                    let mut t = [p, r, p ^ r];
                    t.sort_unstable();
                    oracle_lines.insert(t);
                }
            }
        }
        ensure(oracle_lines.len() == 315, || {
            format!("oracle found {} lines", oracle_lines.len())
        })?;

        let mut elliptic = BTreeSet::new();
        let mut hyperbolic = BTreeSet::new();
        for id in 0..64u64 {
            let op = if id == 0 {
                PauliOperator::identity(3).unwrap()
            } else {
                ProjectivePoint::from_id(3, id).unwrap().operator()
            };
            let oracle = quadric_set(id);
            let (set, size, bucket) = if op.is_skew() {
                (elliptic_quadric(&op), 27, &mut elliptic)
            } else {
                (hyperbolic_quadric(&op), 35, &mut hyperbolic)
            };
            let set: BTreeSet<u64> = set.map_err(|e| e.to_string())?.into_iter().collect();
            ensure(set == oracle, || {
                format!("quadric of {op} disagrees with the oracle")
            })?;
            ensure(set.len() == size, || {
                format!("quadric of {op} has {} points", set.len())
            })?;
            bucket.insert(set.into_iter().collect::<Vec<_>>());
        }
        ensure(elliptic.len() == 28 && hyperbolic.len() == 36, || {
            format!(
                "{} elliptic, {} hyperbolic",
                elliptic.len(),
                hyperbolic.len()
            )
        })?;

        let g = eloily();
        let grids =
            enumerate_subgeometries(&g, SubgeometryKind::Grid).map_err(|e| e.to_string())?;
        let doilies =
            enumerate_subgeometries(&g, SubgeometryKind::Doily).map_err(|e| e.to_string())?;
        let oracle_grids = count_grids(&g);
        ensure(grids.len() == 120 && oracle_grids == 120, || {
            format!("{} grids, oracle {oracle_grids}", grids.len())
        })?;
        ensure(doilies.len() == 36, || format!("{} doilies", doilies.len()))?;
        for d in &doilies {
            d.check_gq(2)
                .map_err(|e| format!("doily is not a GQ(2,2): {e}"))?;
        }
        // point-disjoint triples, recounted on bitmasks
        let disjoint = |subs: &[eloily_core::Geometry]| -> usize {
            let m: Vec<u32> = subs
                .iter()
                .map(|s| {
                    s.point_ids()
                        .fold(0, |m, id| m | 1 << g.point_index(id).unwrap())
                })
                .collect();
            let mut n = 0;
            for a in 0..m.len() {
                for b in a + 1..m.len() {
                    for c in b + 1..m.len() {
                        n += usize::from(m[a] & m[b] == 0 && (m[a] | m[b]) & m[c] == 0);
                    }
                }
            }
            n
        };
        let grid_triples =
            disjoint_triples(&g, SubgeometryKind::Grid).map_err(|e| e.to_string())?;
        let doily_triples =
            disjoint_triples(&g, SubgeometryKind::Doily).map_err(|e| e.to_string())?;
        ensure(grid_triples.len() == 40 && disjoint(&grids) == 40, || {
            format!("{} disjoint grid triples", grid_triples.len())
        })?;
        ensure(doily_triples.is_empty() && disjoint(&doilies) == 0, || {
            format!("{} disjoint doily triples", doily_triples.len())
        })?;
        let e = within(t, Duration::from_secs(30), "counting")?;
        Ok(format!(
            "63/315, 28 elliptic, 36 hyperbolic, 120 grids, 36 doilies, 40 grid splits, no doily split, {e:?}"
        ))
    };
    report(2, "counting", check());
}

#[test]
fn criterion_3_contextuality_degrees() {
    let check = || -> Check {
        let w = workers();
        let mut parts = Vec::new();
        for (kind, expected) in [
            (Quadrangle::Grid, 1),
            (Quadrangle::Doily, 3),
            (Quadrangle::Eloily, 9),
        ] {
            let g = quadrangle_geometry(kind).map_err(|e| e.to_string())?;
            let t = Instant::now();
            let d = degree_of_contextuality(&g, w).map_err(|e| e.to_string())?;
            let e = t.elapsed();
            ensure(d.degree == expected, || {
                format!("{kind:?}: d = {}, expected {expected}", d.degree)
            })?;
            let report = violated_lines(&g, &d.witness).map_err(|e| e.to_string())?;
            ensure(report.count == expected, || {
                format!("{kind:?} witness violates {} lines", report.count)
            })?;
            if kind == Quadrangle::Eloily {
                ensure(e < Duration::from_secs(60 * 8), || {
                    format!("eloily scan took {e:?}")
                })?;
            }
            parts.push(format!("{kind:?} d={} in {e:?}", d.degree));
        }
        // a second, unlabelled doily gives the same degree
        let d = degree_of_contextuality(&build_doily(&canonical_q()).unwrap(), 1)
            .map_err(|e| e.to_string())?;
        ensure(d.degree == 3, || format!("doily d = {}", d.degree))?;
        Ok(format!("{}, {w} worker(s)", parts.join(", ")))
    };
    report(3, "contextuality degrees", check());
}

#[test]
fn criterion_4_classical_bounds() {
    let check = || -> Check {
        let grid = optimal_grid_value();
        ensure(grid.max == q(8, 9) && grid.searched == 4096, || {
            format!("grid max {} over {} pairs", grid.max, grid.searched)
        })?;

        let doily = build_doily(&canonical_q()).unwrap();
        let opt = optimal_doily_value(&doily, workers()).map_err(|e| e.to_string())?;
        ensure(opt.value == q(13, 15) && opt.every_minimal_attains, || {
            format!(
                "doily optimum {} (every minimal attains: {})",
                opt.value, opt.every_minimal_attains
            )
        })?;

        let g = eloily();
        let e2 = GameSpec::new(g.clone(), 2).map_err(|e| e.to_string())?;
        let e4 = GameSpec::new(g.clone(), 4).map_err(|e| e.to_string())?;
        let value = |spec: &GameSpec, a: &Assignment, dev: &[(usize, usize)]| -> Probability {
            let s = strategy_from_assignment(&g, a, dev).unwrap();
            evaluate_pointline_game(spec, &s).unwrap().value
        };

        // every deviation choice of the witness
        let witness = degree_of_contextuality(&g, workers())
            .map_err(|e| e.to_string())?
            .witness;
        for dev in all_deviations(&g, &witness).map_err(|e| e.to_string())? {
            ensure(value(&e2, &witness, &dev) == q(13, 15), || {
                format!("E2 deviation {dev:?}")
            })?;
            ensure(value(&e4, &witness, &dev) == q(11, 15), || {
                format!("E4 deviation {dev:?}")
            })?;
        }

        // every minimal assignment, with first-point and random deviations
        let scan = gray_scan(&g).map_err(|e| e.to_string())?;
        let level = scan
            .level(9, workers(), |bits, _| {
                let a = Assignment::new(27, bits).unwrap();
                let first = first_point_deviations(&g, &a).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(bits);
                let viol = violated_lines(&g, &a).unwrap().violated;
                let random: Vec<(usize, usize)> = viol
                    .iter()
                    .map(|&l| (l, g.members(l)[rng.random_range(0..3)]))
                    .collect();
                [&first, &random]
                    .iter()
                    .all(|d| value(&e2, &a, d) == q(13, 15) && value(&e4, &a, d) == q(11, 15))
            })
            .map_err(|e| e.to_string())?;
        ensure(level.count == 2560 && level.failures == 0, || {
            format!(
                "{} minimal assignments, {} off-value",
                level.count, level.failures
            )
        })?;
        Ok(format!(
            "grid 8/9, doily 13/15, E2 13/15, E4 11/15 over {} minimal assignments",
            level.count
        ))
    };
    report(4, "classical bounds", check());
}

fn counts_within_three_sigma(
    counts: &BTreeMap<Vec<Sign>, u64>,
    exact: &[(Vec<Sign>, f64)],
    n: u64,
) -> Result<(), String> {
    let total: f64 = exact.iter().map(|(_, p)| p).sum();
    ensure((total - 1.0).abs() < 1e-10, || {
        format!("branch probabilities sum to {total}")
    })?;
    for (outcome, p) in exact {
        let k = *counts.get(outcome).unwrap_or(&0) as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt().max(1e-9);
        ensure((k - n as f64 * p).abs() <= 3.0 * sigma, || {
            format!(
                "outcome {outcome:?}: {k} hits, expected {:.1} ± {:.1}",
                n as f64 * p,
                sigma
            )
        })?;
    }
    let unexpected: u64 = counts
        .iter()
        .filter(|(o, _)| !exact.iter().any(|(e, _)| e == *o))
        .map(|(_, c)| c)
        .sum();
    ensure(unexpected == 0, || {
        format!("{unexpected} samples outside the support")
    })
}

#[test]
fn criterion_5_quantum_strategy() {
    let check = || -> Check {
        let g = eloily();
        let mut parts = Vec::new();
        for (players, protocol) in [(2, Protocol::Delegation), (4, Protocol::Direct)] {
            let spec = GameSpec::new(g.clone(), players).map_err(|e| e.to_string())?;
            let state = find_shared_state(&SharedStateSpec::eloily(players).unwrap())
                .map_err(|e| e.to_string())?;
            let p = quantum_win_probability(&spec, &state, false)
                .map_err(|e| e.to_string())?
                .probability;
            ensure((1.0 - p).abs() < 1e-10, || format!("E{players}: p = {p}"))?;
            let responder = QuantumResponder::new(state, protocol);
            let wins =
                simulate_quantum(&spec, &responder, 100_000, 0).map_err(|e| e.to_string())?;
            ensure(wins == 100_000, || {
                format!("E{players}: {wins} of 100000 rounds won")
            })?;
            parts.push(format!("E{players} p={p:.12}, 100000/100000 rounds"));
        }

        // delegation versus direct joint measurement on a random register state
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let amps: Vec<Complex64> = (0..8)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let register =
            StateVector::from_amplitudes(amps.iter().map(|a| a / norm).collect()).unwrap();
        let with_ancilla = register.tensor(&StateVector::basis(1, 0).unwrap()).unwrap();
        let l = (0..g.num_lines())
            .find(|&l| g.line(l).is_negative())
            .unwrap();
        let ops = g.members(l).map(|p| *g.label_of(p));
        let exact = joint_distribution(&register, &ops[..2]).map_err(|e| e.to_string())?;
        let n = 100_000u64;
        let (mut delegated, mut direct) = (BTreeMap::new(), BTreeMap::new());
        for _ in 0..n {
            let mut s = with_ancilla.clone();
            let (a, _) =
                delegation_protocol(&mut s, ops, g.line(l).sign(), &[0, 1, 2], 3, &mut rng)
                    .map_err(|e| e.to_string())?;
            ensure(a.iter().product::<i8>() == g.line(l).sign().value(), || {
                "parity broken".into()
            })?;
            *delegated
                .entry(vec![
                    Sign::from_value(a[0] as i64).unwrap(),
                    Sign::from_value(a[1] as i64).unwrap(),
                ])
                .or_insert(0) += 1;
            let (o, _) =
                measure_joint(&register, &ops[..2], &mut rng).map_err(|e| e.to_string())?;
            *direct.entry(o).or_insert(0) += 1;
        }
        counts_within_three_sigma(&delegated, &exact, n).map_err(|e| format!("delegation: {e}"))?;
        counts_within_three_sigma(&direct, &exact, n)
            .map_err(|e| format!("joint measurement: {e}"))?;
        parts.push("delegation matches joint measurement over 100000 trials".into());
        Ok(parts.join("; "))
    };
    report(5, "quantum strategy", check());
}

#[test]
fn criterion_6_stabilizer_states() {
    let check = || -> Check {
        let mut parts = Vec::new();
        for (players, reference) in [
            (2, reference_state_two_players()),
            (4, reference_state_four_players()),
        ] {
            let spec = SharedStateSpec::eloily(players).unwrap();
            let s = find_shared_state(&spec).map_err(|e| e.to_string())?;
            let overlap = s.overlap(&reference.map_err(|e| e.to_string())?);
            ensure(overlap >= 1.0 - 1e-10, || {
                format!("r={players}: overlap {overlap}")
            })?;
            let residual = stabilizer_residual(&s, &spec).map_err(|e| e.to_string())?;
            ensure(residual < 1e-12, || {
                format!("r={players}: residual {residual:e}")
            })?;
            // independent residual check through explicit expectations
            for op in &spec.family {
                let e = s
                    .expectation(&op.replicate(players).unwrap())
                    .map_err(|e| e.to_string())?;
                ensure((e - 1.0).abs() < 1e-12, || {
                    format!("r={players}: ⟨{op}^{players}⟩ = {e}")
                })?;
            }
            parts.push(format!(
                "r={players} overlap {overlap:.12}, residual {residual:.1e}"
            ));
        }
        Ok(parts.join(", "))
    };
    report(6, "stabilizer states", check());
}

/// Leibniz expansion, independent of the library determinant.
fn leibniz(m: &[[f64; 3]; 3]) -> f64 {
    let perms = [
        ([0, 1, 2], 1.0),
        ([1, 2, 0], 1.0),
        ([2, 0, 1], 1.0),
        ([0, 2, 1], -1.0),
        ([2, 1, 0], -1.0),
        ([1, 0, 2], -1.0),
    ];
    perms
        .iter()
        .map(|(p, s)| s * m[0][p[0]] * m[1][p[1]] * m[2][p[2]])
        .sum()
}

#[test]
fn criterion_7_invariants() {
    let check = || -> Check {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let mut m = HVMatrices::default();
            for mat in [&mut m.a, &mut m.b, &mut m.c] {
                for row in mat.iter_mut() {
                    for v in row.iter_mut() {
                        *v = rng.random_range(-2.0..2.0);
                    }
                }
            }
            let (d, t) = (i3_det(&m), i3_trace(&m));
            ensure((d - t).abs() < 1e-9, || {
                format!("det form {d} vs trace form {t}")
            })?;
        }

        let mut maxima = Vec::new();
        for (kind, expected) in [
            (Quadrangle::Grid, 4),
            (Quadrangle::Doily, 9),
            (Quadrangle::Eloily, 27),
        ] {
            let m = max_i3(kind, workers()).map_err(|e| e.to_string())?;
            ensure(m.value == expected && m.formula_value == expected, || {
                format!(
                    "{kind:?}: max {} (formula {}), expected {expected}",
                    m.value, m.formula_value
                )
            })?;
            ensure(m.value == m.lines as i64 - 2 * m.degree as i64, || {
                format!("{kind:?}: max differs from N-2d")
            })?;
            maxima.push(m.value.to_string());
        }

        let g = eloily();
        let inv = DressedInvariant::new(canonical_dressing()).map_err(|e| e.to_string())?;
        for _ in 0..1_000_000 {
            let a = Assignment::new(27, rng.random::<u64>() & ((1 << 27) - 1)).unwrap();
            let (i3, chi) = (inv.i3(&a), cabello_chi(&g, &a).unwrap());
            ensure(i3 == chi, || format!("I3 {i3} vs chi {chi} at {a}"))?;
        }
        let grid = quadrangle_geometry(Quadrangle::Grid).map_err(|e| e.to_string())?;
        for bits in 0..1u64 << 9 {
            let a = Assignment::new(9, bits).unwrap();
            let lifted = lift(&grid, &g, &a).map_err(|e| e.to_string())?;
            ensure(
                inv.det_a(&lifted) == cabello_chi(&grid, &a).unwrap(),
                || format!("grid determinant at {a}"),
            )?;
        }

        let doily = quadrangle_geometry(Quadrangle::Doily).map_err(|e| e.to_string())?;
        let mismatches =
            pfaffian_mismatches(&doily, &canonical_duads().map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        ensure(mismatches == 0, || {
            format!("Pfaffian differs from chi on {mismatches} assignments")
        })?;

        let mut dets = BTreeSet::new();
        for bits in 0..1u32 << 9 {
            let mut m = [[0.0; 3]; 3];
            for k in 0..9 {
                m[k / 3][k % 3] = if bits >> k & 1 == 1 { -1.0 } else { 1.0 };
            }
            ensure(det3(&m) == leibniz(&m), || {
                format!("det3 disagrees with expansion on {m:?}")
            })?;
            dets.insert(det3(&m) as i64);
        }
        ensure(dets == BTreeSet::from([-4, 0, 4]), || {
            format!("±1 determinants take values {dets:?}")
        })?;
        Ok(format!(
            "max I3 {}, I3 = chi on 10^6 samples, Pf = chi on 2^15",
            maxima.join("/")
        ))
    };
    report(7, "invariants", check());
}

#[test]
fn criterion_8_properties() {
    let check = || -> Check {
        // polarization: Q_0(p + q) = Q_0(p) + Q_0(q) + ⟨p, q⟩ on all pairs
        let pts: Vec<ProjectivePoint> = ProjectivePoint::all(3).collect();
        let q0 = |id: u64| ((id >> 3) & id & 7).count_ones() % 2;
        let mut pairs = 0;
        for p in &pts {
            for r in &pts {
                if p.id() == r.id() {
                    continue;
                }
                let sum = p.id() ^ r.id();
                ensure(
                    q0(sum) == (q0(p.id()) + q0(r.id()) + omega(p.id(), r.id())) % 2,
                    || format!("polarization fails at {p}, {r}"),
                )?;
                pairs += 1;
            }
        }

        // per choice: a pair of lines through a point loses exactly when the
        // two answers at that point differ
        let g = eloily();
        let e2 = GameSpec::new(g.clone(), 2).unwrap();
        let witness = degree_of_contextuality(&g, workers()).unwrap().witness;
        let s =
            strategy_from_assignment(&g, &witness, &first_point_deviations(&g, &witness).unwrap())
                .unwrap();
        let exact = evaluate_pointline_game(&e2, &s).map_err(|e| e.to_string())?;
        for (choice, _) in e2.choices() {
            let answers: Vec<[i8; 3]> = choice.lines.iter().map(|&l| s.answer(l)).collect();
            let vals = e2.values_at_point(&choice, &answers);
            ensure(e2.wins(&choice, &answers) == (vals[0] == vals[1]), || {
                format!("choice {choice:?}")
            })?;
        }
        // one satisfied and one violated line: averaged over the violated
        // line's three deviation choices the choice is won exactly 2/3 of
        // the time
        let violated = violated_lines(&g, &witness).unwrap().violated;
        let base = first_point_deviations(&g, &witness).unwrap();
        let mut mixed = 0;
        for (choice, _) in e2.choices() {
            let bad: Vec<usize> = choice
                .lines
                .iter()
                .copied()
                .filter(|l| violated.contains(l))
                .collect();
            if bad.len() != 1 {
                continue;
            }
            let wins: u64 = g
                .members(bad[0])
                .iter()
                .map(|&p| {
                    let dev: Vec<(usize, usize)> = base
                        .iter()
                        .map(|&(l, q)| if l == bad[0] { (l, p) } else { (l, q) })
                        .collect();
                    let st = strategy_from_assignment(&g, &witness, &dev).unwrap();
                    let answers: Vec<[i8; 3]> =
                        choice.lines.iter().map(|&l| st.answer(l)).collect();
                    e2.wins(&choice, &answers) as u64
                })
                .sum();
            ensure(q(wins, 3) == q(2, 3), || {
                format!("choice {choice:?} wins {wins} of 3 deviations")
            })?;
            mixed += 1;
        }
        ensure(mixed > 0, || "no mixed choices".into())?;

        // Monte Carlo against the exact evaluator
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rounds = 100_000;
        let mut responder = s.clone();
        let wins = eloily_core::games::simulate(&e2, &mut responder, rounds, &mut rng)
            .map_err(|e| e.to_string())?;
        ensure(
            eloily_core::games::within_three_sigma(wins, rounds, exact.value),
            || format!("{wins}/{rounds} against {}", exact.value),
        )?;

        // parallel and serial searches agree exactly
        let scan = gray_scan(&g).map_err(|e| e.to_string())?;
        let serial = scan.minimum(1).map_err(|e| e.to_string())?;
        for w in [2, 3, 8] {
            let parallel = scan.minimum(w).map_err(|e| e.to_string())?;
            ensure(parallel == serial, || {
                format!("{w} workers: {parallel:?} vs {serial:?}")
            })?;
        }
        let spread = verify_minimal_spread_property(&g, 2).map_err(|e| e.to_string())?;
        ensure(spread.holds, || {
            "a minimal assignment violates a non-spread".into()
        })?;
        Ok(format!("{pairs} polarization pairs, {mixed} mixed choices at 2/3, {wins}/{rounds} vs {}, search identical for 1/2/3/8 workers", exact.value))
    };
    report(8, "properties", check());
}
