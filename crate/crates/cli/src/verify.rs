//! The acceptance suite behind `verify-all`. Every check is named so a
//! failure points at the claim that broke.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use eloily_core::contextuality::{
    cabello_chi, degree_of_contextuality, gray_scan, verify_minimal_spread_property, violated_lines,
};
use eloily_core::games::{
    all_deviations, evaluate_pointline_game, first_point_deviations, optimal_doily_value,
    optimal_grid_value, simulate, strategy_from_assignment, within_three_sigma, GameSpec,
    Probability,
};
use eloily_core::geometry::{
    build_doily, build_eloily, build_w52, canonical_q, check_spread, elliptic_quadric,
    enumerate_subgeometries, hyperbolic_quadric, load, SubgeometryKind,
};
use eloily_core::invariant::{
    canonical_dressing, canonical_duads, det3, i3_det, i3_trace, lift, max_i3, pfaffian_mismatches,
    quadrangle_geometry, DressedInvariant, HVMatrices, Quadrangle,
};
use eloily_core::pauli::{q0, symplectic_form, ProjectivePoint};
use eloily_core::qsim::{
    delegation_protocol, find_shared_state, joint_distribution, quantum_win_probability,
    reference_state_four_players, reference_state_two_players, simulate_quantum,
    stabilizer_residual, Protocol, QuantumResponder, SharedStateSpec, StateVector,
};
use eloily_core::{Assignment, Geometry, PauliOperator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::RunConfig;
use crate::report::Report;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn eloily() -> Result<Geometry, String> {
    build_eloily(&canonical_q()).map_err(err)
}

pub fn run(cfg: &RunConfig, report: &mut Report) {
    let checks: [(&str, &dyn Fn(&RunConfig) -> Outcome); 8] = [
        ("eloily-golden", &golden),
        ("counting", &counting),
        ("contextuality-degrees", &degrees),
        ("classical-bounds", &classical_bounds),
        ("quantum-strategy", &quantum_strategy),
        ("stabilizer-states", &stabilizer_states),
        ("invariants", &invariants),
        ("properties", &properties),
    ];
    for (name, check) in checks {
        let t = Instant::now();
        let outcome = check(cfg);
        report.time(name, t.elapsed());
        match outcome {
            Ok(detail) => report.check(name, true, detail),
            Err(why) => report.check(name, false, why),
        }
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    report.set("checks_passed", passed);
    report.set("checks_total", report.checks.len());
}

fn golden(cfg: &RunConfig) -> Outcome {
    let g = eloily()?;
    ensure(g.num_points() == 27 && g.num_lines() == 45, || {
        format!("{} points, {} lines", g.num_points(), g.num_lines())
    })?;
    let neg = g.negative_lines();
    ensure(neg.len() == 9, || format!("{} negative lines", neg.len()))?;
    check_spread(&g, &neg).map_err(|e| format!("negative lines are not a spread: {e}"))?;
    g.check_gq(4).map_err(err)?;
    let mut detail = "27 points, 45 lines, 9 negative lines forming a spread".to_string();
    // a geometry file given on the command line must match the built table
    if cfg.geometry.parse::<Quadrangle>().is_err() {
        let file = load(Path::new(&cfg.geometry)).map_err(|e| format!("{}: {e}", cfg.geometry))?;
        ensure(file == g, || {
            format!("{} differs from the built eloily", cfg.geometry)
        })?;
        detail.push_str(&format!("; {} matches", cfg.geometry));
    }
    Ok(detail)
}

fn counting(_: &RunConfig) -> Outcome {
    let w = build_w52().map_err(err)?;
    ensure(w.num_points() == 63 && w.num_lines() == 315, || {
        format!(
            "W(5,2) has {} points, {} lines",
            w.num_points(),
            w.num_lines()
        )
    })?;
    let mut elliptic = BTreeSet::new();
    let mut hyperbolic = BTreeSet::new();
    for id in 0..64u64 {
        let op = if id == 0 {
            PauliOperator::identity(3).map_err(err)?
        } else {
            ProjectivePoint::from_id(3, id).map_err(err)?.operator()
        };
        if op.is_skew() {
            let set = elliptic_quadric(&op).map_err(err)?;
            ensure(set.len() == 27, || {
                format!("E_{op} has {} points", set.len())
            })?;
            elliptic.insert(set);
        } else {
            let set = hyperbolic_quadric(&op).map_err(err)?;
            ensure(set.len() == 35, || {
                format!("H_{op} has {} points", set.len())
            })?;
            hyperbolic.insert(set);
        }
    }
    ensure(elliptic.len() == 28 && hyperbolic.len() == 36, || {
        format!(
            "{} elliptic, {} hyperbolic quadrics",
            elliptic.len(),
            hyperbolic.len()
        )
    })?;
    let g = eloily()?;
    let grids = enumerate_subgeometries(&g, SubgeometryKind::Grid)
        .map_err(err)?
        .len();
    let doilies = enumerate_subgeometries(&g, SubgeometryKind::Doily)
        .map_err(err)?
        .len();
    ensure(grids == 120 && doilies == 36, || {
        format!("{grids} grids, {doilies} doilies")
    })?;
    Ok("63 points, 315 lines, 28 elliptic, 36 hyperbolic, 120 grids, 36 doilies".into())
}

fn degrees(cfg: &RunConfig) -> Outcome {
    let mut found = Vec::new();
    for (kind, expected) in [
        (Quadrangle::Grid, 1),
        (Quadrangle::Doily, 3),
        (Quadrangle::Eloily, 9),
    ] {
        let g = quadrangle_geometry(kind).map_err(err)?;
        let d = degree_of_contextuality(&g, cfg.workers).map_err(err)?;
        ensure(d.degree == expected, || {
            format!("{kind:?}: d = {}, expected {expected}", d.degree)
        })?;
        found.push(d.degree.to_string());
    }
    let serial = degree_of_contextuality(&eloily()?, 1).map_err(err)?;
    ensure(serial.degree == 9, || "serial eloily scan disagrees".into())?;
    Ok(format!("d = {} for grid/doily/eloily", found.join("/")))
}

fn classical_bounds(cfg: &RunConfig) -> Outcome {
    let grid = optimal_grid_value();
    ensure(grid.max == Probability::new(8, 9), || {
        format!("grid optimum {}", grid.max)
    })?;
    let doily = build_doily(&canonical_q()).map_err(err)?;
    let opt = optimal_doily_value(&doily, cfg.workers).map_err(err)?;
    ensure(
        opt.value == Probability::new(13, 15) && opt.every_minimal_attains,
        || format!("doily optimum {}", opt.value),
    )?;
    let g = eloily()?;
    let witness = degree_of_contextuality(&g, cfg.workers)
        .map_err(err)?
        .witness;
    for (players, expected) in [(2, Probability::new(13, 15)), (4, Probability::new(11, 15))] {
        let spec = GameSpec::new(g.clone(), players).map_err(err)?;
        for dev in all_deviations(&g, &witness).map_err(err)? {
            let s = strategy_from_assignment(&g, &witness, &dev).map_err(err)?;
            let v = evaluate_pointline_game(&spec, &s).map_err(err)?.value;
            ensure(v == expected, || {
                format!("E{players}: {v} for deviations {dev:?}")
            })?;
        }
    }
    Ok(
        "grid 8/9, doily 13/15, eloily 13/15 (2 players) and 11/15 (4 players) for every deviation"
            .into(),
    )
}

fn quantum_strategy(cfg: &RunConfig) -> Outcome {
    let g = eloily()?;
    let mut parts = Vec::new();
    for (players, protocol) in [(2, Protocol::Delegation), (4, Protocol::Direct)] {
        let spec = GameSpec::new(g.clone(), players).map_err(err)?;
        let state =
            find_shared_state(&SharedStateSpec::eloily(players).map_err(err)?).map_err(err)?;
        let p = quantum_win_probability(&spec, &state, false)
            .map_err(err)?
            .probability;
        ensure((1.0 - p).abs() < 1e-10, || format!("E{players}: p = {p}"))?;
        let wins = simulate_quantum(
            &spec,
            &QuantumResponder::new(state, protocol),
            cfg.shots,
            cfg.seed,
        )
        .map_err(err)?;
        ensure(wins == cfg.shots, || {
            format!("E{players}: {wins}/{} rounds won", cfg.shots)
        })?;
        parts.push(format!("E{players} p = 1, {wins}/{} rounds", cfg.shots));
    }

    // delegation circuit against the Born probabilities of a random register
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let amps: Vec<Complex64> = (0..8)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let register =
        StateVector::from_amplitudes(amps.iter().map(|a| a / norm).collect()).map_err(err)?;
    let with_ancilla = register
        .tensor(&StateVector::basis(1, 0).map_err(err)?)
        .map_err(err)?;
    let l = g.negative_lines()[0];
    let ops = g.members(l).map(|p| *g.label_of(p));
    let exact = joint_distribution(&register, &ops[..2]).map_err(err)?;
    let mut counts = [0u64; 4];
    for _ in 0..cfg.shots {
        let mut s = with_ancilla.clone();
        let (a, _) = delegation_protocol(&mut s, ops, g.line(l).sign(), &[0, 1, 2], 3, &mut rng)
            .map_err(err)?;
        counts[((a[0] < 0) as usize) << 1 | (a[1] < 0) as usize] += 1;
    }
    let n = cfg.shots as f64;
    for (outcome, p) in &exact {
        let k = counts[(outcome[0].is_negative() as usize) << 1 | outcome[1].is_negative() as usize]
            as f64;
        let sigma = (n * p * (1.0 - p)).sqrt().max(1e-9);
        ensure((k - n * p).abs() <= 3.0 * sigma, || {
            format!(
                "delegation outcome {outcome:?}: {k} vs {:.1} ± {:.1}",
                n * p,
                sigma
            )
        })?;
    }
    parts.push(format!(
        "delegation within 3σ of the joint distribution over {} trials",
        cfg.shots
    ));
    Ok(parts.join("; "))
}

fn stabilizer_states(_: &RunConfig) -> Outcome {
    let mut parts = Vec::new();
    for (players, reference) in [
        (2, reference_state_two_players()),
        (4, reference_state_four_players()),
    ] {
        let spec = SharedStateSpec::eloily(players).map_err(err)?;
        let s = find_shared_state(&spec).map_err(err)?;
        let overlap = s.overlap(&reference.map_err(err)?);
        let residual = stabilizer_residual(&s, &spec).map_err(err)?;
        ensure(overlap >= 1.0 - 1e-10, || {
            format!("r={players}: overlap {overlap}")
        })?;
        ensure(residual < 1e-12, || {
            format!("r={players}: residual {residual:e}")
        })?;
        parts.push(format!(
            "r={players} overlap {overlap:.12} residual {residual:.1e}"
        ));
    }
    Ok(parts.join(", "))
}

fn invariants(cfg: &RunConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..1000 {
        let mut m = HVMatrices::default();
        for mat in [&mut m.a, &mut m.b, &mut m.c] {
            for v in mat.iter_mut().flatten() {
                *v = rng.random_range(-2.0..2.0);
            }
        }
        ensure((i3_det(&m) - i3_trace(&m)).abs() < 1e-9, || {
            "determinant and trace forms differ".into()
        })?;
    }
    for (kind, expected) in [
        (Quadrangle::Grid, 4),
        (Quadrangle::Doily, 9),
        (Quadrangle::Eloily, 27),
    ] {
        let m = max_i3(kind, cfg.workers).map_err(err)?;
        ensure(m.value == expected && m.formula_value == expected, || {
            format!("{kind:?}: max {} (formula {})", m.value, m.formula_value)
        })?;
        ensure(m.value == m.lines as i64 - 2 * m.degree as i64, || {
            format!("{kind:?}: max is not N-2d")
        })?;
    }
    let g = eloily()?;
    let inv = DressedInvariant::new(canonical_dressing()).map_err(err)?;
    for _ in 0..cfg.shots {
        let a = Assignment::new(27, rng.random::<u64>() & ((1 << 27) - 1)).map_err(err)?;
        ensure(inv.i3(&a) == cabello_chi(&g, &a).map_err(err)?, || {
            format!("I3 differs from chi at {a}")
        })?;
    }
    let grid = quadrangle_geometry(Quadrangle::Grid).map_err(err)?;
    for bits in 0..1u64 << 9 {
        let a = Assignment::new(9, bits).map_err(err)?;
        let lifted = lift(&grid, &g, &a).map_err(err)?;
        ensure(
            inv.det_a(&lifted) == cabello_chi(&grid, &a).map_err(err)?,
            || format!("grid determinant at {a}"),
        )?;
    }
    let doily = quadrangle_geometry(Quadrangle::Doily).map_err(err)?;
    let mismatches = pfaffian_mismatches(&doily, &canonical_duads().map_err(err)?).map_err(err)?;
    ensure(mismatches == 0, || {
        format!("Pfaffian differs from chi on {mismatches} assignments")
    })?;
    for bits in 0..1u32 << 9 {
        let mut m = [[0.0; 3]; 3];
        for k in 0..9 {
            m[k / 3][k % 3] = if bits >> k & 1 == 1 { -1.0 } else { 1.0 };
        }
        let d = det3(&m);
        ensure([0.0, 4.0, -4.0].contains(&d), || {
            format!("±1 determinant {d}")
        })?;
    }
    Ok(format!(
        "max I3 4/9/27, I3 = chi on {} samples, Pf = chi on 2^15",
        cfg.shots
    ))
}

fn properties(cfg: &RunConfig) -> Outcome {
    let pts: Vec<ProjectivePoint> = ProjectivePoint::all(3).collect();
    for p in &pts {
        for r in &pts {
            if let Some(sum) = p.add(r) {
                ensure(
                    q0(&sum) == q0(p) ^ q0(r) ^ symplectic_form(p, r).map_err(err)?,
                    || format!("polarization fails at {p}, {r}"),
                )?;
            }
        }
    }

    let g = eloily()?;
    let spec = GameSpec::new(g.clone(), 2).map_err(err)?;
    let witness = degree_of_contextuality(&g, cfg.workers)
        .map_err(err)?
        .witness;
    let base = first_point_deviations(&g, &witness).map_err(err)?;
    let violated = violated_lines(&g, &witness).map_err(err)?.violated;
    for (choice, _) in spec.choices() {
        let bad: Vec<usize> = choice
            .lines
            .iter()
            .copied()
            .filter(|l| violated.contains(l))
            .collect();
        if bad.len() != 1 {
            continue;
        }
        let mut wins = 0;
        for &p in &g.members(bad[0]) {
            let dev: Vec<_> = base
                .iter()
                .map(|&(l, q)| if l == bad[0] { (l, p) } else { (l, q) })
                .collect();
            let s = strategy_from_assignment(&g, &witness, &dev).map_err(err)?;
            let answers: Vec<[i8; 3]> = choice.lines.iter().map(|&l| s.answer(l)).collect();
            wins += spec.wins(&choice, &answers) as u32;
        }
        ensure(wins == 2, || {
            format!("choice at point {} wins {wins} of 3", choice.point)
        })?;
    }

    let s = strategy_from_assignment(&g, &witness, &base).map_err(err)?;
    let exact = evaluate_pointline_game(&spec, &s).map_err(err)?.value;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut player = s.clone();
    let wins = simulate(&spec, &mut player, cfg.shots, &mut rng).map_err(err)?;
    ensure(within_three_sigma(wins, cfg.shots, exact), || {
        format!("{wins}/{} against {exact}", cfg.shots)
    })?;

    let scan = gray_scan(&g).map_err(err)?;
    let serial = scan.minimum(1).map_err(err)?;
    for w in [2, 3, cfg.workers.max(1)] {
        ensure(scan.minimum(w).map_err(err)? == serial, || {
            format!("{w} workers disagree with one")
        })?;
    }
    let spread = verify_minimal_spread_property(&g, cfg.workers).map_err(err)?;
    ensure(spread.holds, || {
        "a minimal assignment violates a non-spread".into()
    })?;
    Ok(format!(
        "polarization, 2/3 per mixed choice, {wins}/{} vs {exact}, worker-independent search",
        cfg.shots
    ))
}
