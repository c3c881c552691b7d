use std::path::Path;
use std::time::Instant;

use eloily_core::contextuality::cabello_chi;
use eloily_core::contextuality::{
    degree_of_contextuality, verify_minimal_spread_property, violated_lines, ContextualityError,
};
use eloily_core::games::{
    all_deviations, evaluate_pointline_game, first_point_deviations, optimal_doily_value,
    optimal_grid_value, play_round, strategy_from_assignment, within_three_sigma, GameError,
    GameSpec, Probability,
};
use eloily_core::geometry::{
    check_spread, disjoint_triples, enumerate_subgeometries, load, SubgeometryKind,
};
use eloily_core::invariant::{
    canonical_dressing, canonical_duads, i3_det, i3_trace, lift, max_i3, pfaffian_mismatches,
    quadrangle_geometry, solve_sign_dressing, DressedInvariant, HVMatrices, Quadrangle,
};
use eloily_core::qsim::{
    expectation_win_probability, find_shared_state, quantum_win_probability, simulate_quantum,
    skew_flip_responder, stabilizer_residual, Protocol, QuantumResponder, SharedStateSpec,
};
use eloily_core::{Assignment, Geometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::{GameArgs, Mode, ProtocolArg, RunConfig};
use crate::error::{failed, CliError};
use crate::report::{ProbabilityJson, Report};

/// Resolves `--geometry`: a built-in quadrangle or a geometry file.
pub fn select_geometry(selector: &str) -> Result<(Geometry, Option<Quadrangle>), CliError> {
    if let Ok(kind) = selector.parse::<Quadrangle>() {
        return Ok((quadrangle_geometry(kind).map_err(failed)?, Some(kind)));
    }
    let path = Path::new(selector);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "--geometry must be grid, doily, eloily or an existing file, got {selector:?}"
        )));
    }
    let g = load(path).map_err(|e| CliError::Usage(format!("cannot load {selector}: {e}")))?;
    Ok((g, None))
}

fn label_line(g: &Geometry, l: usize) -> Vec<String> {
    g.members(l)
        .iter()
        .map(|&p| g.label_of(p).to_string())
        .collect()
}

/// Contextuality errors caused by the input size are usage errors.
fn search_error(e: ContextualityError) -> CliError {
    match e {
        ContextualityError::TooManyPoints(_) | ContextualityError::Search(_) => {
            CliError::Usage(e.to_string())
        }
        other => failed(other),
    }
}

fn game_error(e: GameError) -> CliError {
    match e {
        GameError::Precondition(m) => CliError::Usage(m),
        GameError::Contextuality(c) => search_error(c),
        other => failed(other),
    }
}

pub fn geometry(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let (g, _) = select_geometry(&cfg.geometry)?;
    let negative = g.negative_lines();
    let spread = check_spread(&g, &negative);
    report.set("name", g.name());
    report.set("qubits", g.width());
    report.set("points", g.num_points());
    report.set("lines", g.num_lines());
    report.set("negative_lines", negative.len());
    report.set("negative_lines_form_spread", spread.is_ok());
    report.set("gq_order", g.gq_order());
    report.set("signs_match_labels", g.signs_match_labels());
    // enumeration cost grows quickly; large geometries are skipped
    if g.num_lines() <= 64 {
        let t = Instant::now();
        let grids = enumerate_subgeometries(&g, SubgeometryKind::Grid)
            .map_err(failed)?
            .len();
        let doilies = enumerate_subgeometries(&g, SubgeometryKind::Doily)
            .map_err(failed)?
            .len();
        let grid_triples = disjoint_triples(&g, SubgeometryKind::Grid)
            .map_err(failed)?
            .len();
        let doily_triples = disjoint_triples(&g, SubgeometryKind::Doily)
            .map_err(failed)?
            .len();
        report.time("subgeometry enumeration", t.elapsed());
        report.set(
            "subgeometries",
            json!({
                "grids": grids,
                "doilies": doilies,
                "disjoint_grid_triples": grid_triples,
                "disjoint_doily_triples": doily_triples,
            }),
        );
    } else {
        report.set("subgeometries", serde_json::Value::Null);
    }
    report.set(
        "point_labels",
        g.points()
            .iter()
            .map(|p| p.label.to_string())
            .collect::<Vec<_>>(),
    );
    let lines: Vec<_> = (0..g.num_lines())
        .map(|l| json!({ "points": label_line(&g, l), "sign": g.line(l).sign().value() }))
        .collect();
    report.set("line_list", lines);
    Ok(())
}

pub fn contextuality(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let (g, _) = select_geometry(&cfg.geometry)?;
    let t = Instant::now();
    let d = degree_of_contextuality(&g, cfg.workers).map_err(search_error)?;
    report.time("exhaustive scan", t.elapsed());
    let n = g.num_lines() as i64;
    let violated = violated_lines(&g, &d.witness).map_err(failed)?.violated;
    report.set("degree", d.degree);
    report.set("witness", d.witness.to_string());
    report.set("minimal_assignments", d.minimal_assignments);
    report.set("lines", n);
    report.set("hidden_variable_bound", n - 2 * d.degree as i64);
    report.set("quantum_bound", n);
    report.set(
        "witness_violated_lines",
        violated
            .iter()
            .map(|&l| label_line(&g, l).join(" "))
            .collect::<Vec<_>>(),
    );
    report.set(
        "witness_violations_form_spread",
        check_spread(&g, &violated).is_ok(),
    );
    if g.check_gq(4).is_ok() {
        let t = Instant::now();
        let v = verify_minimal_spread_property(&g, cfg.workers).map_err(failed)?;
        report.time("minimal spread check", t.elapsed());
        report.set(
            "minimal_violations_are_spreads",
            json!({
                "holds": v.holds,
                "assignments_checked": v.minimal_assignments,
                "counterexample": v.counterexample.map(|a| a.to_string()),
            }),
        );
    }
    Ok(())
}

fn sampled_rate(report: &mut Report, wins: u64, shots: u64, exact: f64) {
    let n = shots as f64;
    let sigma = (n * exact * (1.0 - exact)).sqrt();
    let ok = (wins as f64 - n * exact).abs() <= 3.0 * sigma.max(1e-9);
    report.set(
        "sampled",
        json!({
            "rounds": shots,
            "wins": wins,
            "rate": ProbabilityJson::from(Probability::new(wins, shots)),
            "within_three_sigma": ok,
        }),
    );
    report.check(
        "sampled-rate",
        ok,
        format!(
            "{wins}/{shots} against {exact:.6} (3σ = {:.1} wins)",
            3.0 * sigma
        ),
    );
}

pub fn game(cfg: &RunConfig, args: &GameArgs, report: &mut Report) -> Result<(), CliError> {
    let (g, kind) = select_geometry(&cfg.geometry)?;
    let spec = GameSpec::new(g.clone(), cfg.players).map_err(game_error)?;
    report.set("mode", args.mode);
    report.set("players", cfg.players);
    report.set("referee_choices", spec.choices().count());
    match args.mode {
        Mode::Classical => classical_game(cfg, args, &spec, kind, report),
        Mode::Quantum => quantum_game(cfg, args, &spec, report),
    }
}

fn classical_game(
    cfg: &RunConfig,
    args: &GameArgs,
    spec: &GameSpec,
    kind: Option<Quadrangle>,
    report: &mut Report,
) -> Result<(), CliError> {
    let g = spec.geometry();
    let t = Instant::now();
    let d = degree_of_contextuality(g, cfg.workers).map_err(search_error)?;
    let witness = d.witness;
    let first = first_point_deviations(g, &witness).map_err(game_error)?;
    let strategy = strategy_from_assignment(g, &witness, &first).map_err(game_error)?;
    let exact = evaluate_pointline_game(spec, &strategy)
        .map_err(game_error)?
        .value;
    report.set(
        "strategy",
        "assignment-derived (minimal assignment, first-point deviations)",
    );
    report.set("assignment", witness.to_string());
    report.set("degree", d.degree);
    report.set("value", ProbabilityJson::from(exact));

    // every deviation choice of the same assignment, when there are few
    if d.degree <= 10 {
        let mut lo = exact;
        let mut hi = exact;
        for dev in all_deviations(g, &witness).map_err(game_error)? {
            let s = strategy_from_assignment(g, &witness, &dev).map_err(game_error)?;
            let v = evaluate_pointline_game(spec, &s).map_err(game_error)?.value;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        report.set(
            "deviation_range",
            json!({ "min": ProbabilityJson::from(lo), "max": ProbabilityJson::from(hi), "choices": 3u64.pow(d.degree as u32) }),
        );
    }
    match kind {
        Some(Quadrangle::Grid) if cfg.players == 2 => {
            let o = optimal_grid_value();
            report.set(
                "magic_square_optimum",
                json!({ "value": ProbabilityJson::from(o.max), "tables_searched": o.searched }),
            );
        }
        Some(Quadrangle::Doily) if cfg.players == 2 => {
            let o = optimal_doily_value(g, cfg.workers).map_err(game_error)?;
            report.set(
                "optimum",
                json!({
                    "value": ProbabilityJson::from(o.value),
                    "inconsistent_points": o.inconsistent_points,
                    "assignment": o.assignment.to_string(),
                    "every_minimal_assignment_attains": o.every_minimal_attains,
                }),
            );
        }
        _ => {}
    }
    report.time("exact evaluation", t.elapsed());

    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut player = strategy.clone();
    let mut wins = 0;
    let mut transcripts = Vec::new();
    for round in 0..cfg.shots {
        let tr = play_round(spec, &mut player, round, &mut rng).map_err(game_error)?;
        wins += tr.win as u64;
        if transcripts.len() < args.transcripts {
            transcripts.push(tr.to_record());
        }
    }
    report.time("sampled play", t.elapsed());
    sampled_rate(
        report,
        wins,
        cfg.shots,
        *exact.numer() as f64 / *exact.denom() as f64,
    );
    report.check(
        "sampled-rate-rational",
        within_three_sigma(wins, cfg.shots, exact),
        "rational three-sigma test",
    );
    if args.transcripts > 0 {
        report.set("transcripts", transcripts);
    }
    Ok(())
}

fn quantum_game(
    cfg: &RunConfig,
    args: &GameArgs,
    spec: &GameSpec,
    report: &mut Report,
) -> Result<(), CliError> {
    let g = spec.geometry();
    let protocol = match args.protocol {
        ProtocolArg::Delegation => Protocol::Delegation,
        ProtocolArg::Direct => Protocol::Direct,
        ProtocolArg::ThreeMeasurements => Protocol::ThreeMeasurements,
    };
    let t = Instant::now();
    let (responder, skew_flip, residual) = if g.width() == 2 {
        if cfg.players != 2 {
            return Err(CliError::Usage(
                "two-qubit games are played by 2 players".into(),
            ));
        }
        (
            skew_flip_responder(g, protocol).map_err(failed)?,
            true,
            None,
        )
    } else {
        let family = SharedStateSpec {
            players: cfg.players,
            qubits_per_player: g.width(),
            family: g.points().iter().map(|p| p.label).collect(),
        };
        let extra = (protocol == Protocol::Delegation) as usize;
        if family.total_qubits() + extra > eloily_core::qsim::MAX_QUBITS {
            return Err(CliError::Usage(format!(
                "{} players on {}-qubit labels need {} qubits, the simulator holds {}",
                cfg.players,
                g.width(),
                family.total_qubits() + extra,
                eloily_core::qsim::MAX_QUBITS
            )));
        }
        let state = find_shared_state(&family).map_err(failed)?;
        let residual = stabilizer_residual(&state, &family).map_err(failed)?;
        (
            QuantumResponder::new(state, protocol),
            false,
            Some(residual),
        )
    };
    report.time("shared state", t.elapsed());
    report.set("protocol", args.protocol);
    report.set("skew_flip", skew_flip);
    report.set("qubits", responder.state().qubits());
    report.set("stabilizer_residual", residual);

    let t = Instant::now();
    let exact = quantum_win_probability(spec, responder.state(), skew_flip).map_err(failed)?;
    let oracle = expectation_win_probability(spec, responder.state(), skew_flip).map_err(failed)?;
    report.time("branch enumeration", t.elapsed());
    report.set("value", ProbabilityJson::from_float(exact.probability));
    report.set("branches", exact.branches);
    report.set("expectation_oracle", ProbabilityJson::from_float(oracle));
    report.check(
        "expectation-oracle",
        (exact.probability - oracle).abs() < 1e-10,
        format!(
            "branch enumeration {:.12}, expectation {:.12}",
            exact.probability, oracle
        ),
    );

    let t = Instant::now();
    let wins = simulate_quantum(spec, &responder, cfg.shots, cfg.seed).map_err(game_error)?;
    report.time("sampled play", t.elapsed());
    sampled_rate(report, wins, cfg.shots, exact.probability);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut player = responder.clone();
    let mut transcripts = Vec::new();
    for round in 0..args.transcripts as u64 {
        transcripts.push(
            play_round(spec, &mut player, round, &mut rng)
                .map_err(game_error)?
                .to_record(),
        );
    }
    if args.transcripts > 0 {
        report.set("transcripts", transcripts);
    }
    if protocol == Protocol::Delegation {
        let mut player = responder.clone();
        play_round(
            spec,
            &mut player,
            0,
            &mut ChaCha8Rng::seed_from_u64(cfg.seed),
        )
        .map_err(game_error)?;
        report.set(
            "circuit",
            player
                .last_circuit
                .iter()
                .map(|gate| gate.to_string())
                .collect::<Vec<_>>(),
        );
    }
    Ok(())
}

pub fn invariant(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let kind: Quadrangle = cfg.geometry.parse().map_err(|_| {
        CliError::Usage(format!(
            "invariant needs grid, doily or eloily, got {:?}",
            cfg.geometry
        ))
    })?;
    let t = Instant::now();
    let m = max_i3(kind, cfg.workers).map_err(failed)?;
    report.time("maximum search", t.elapsed());
    let bound = m.lines as i64 - 2 * m.degree as i64;
    report.set(
        "maximum",
        json!({
            "value": m.value,
            "formula_value": m.formula_value,
            "argmax": m.argmax.to_string(),
            "lines": m.lines,
            "degree": m.degree,
            "lines_minus_twice_degree": bound,
        }),
    );
    report.check(
        "maximum",
        m.value == m.formula_value && m.value == bound,
        format!(
            "max {} (formula {}), N-2d = {bound}",
            m.value, m.formula_value
        ),
    );

    let g = quadrangle_geometry(kind).map_err(failed)?;
    let t = Instant::now();
    match kind {
        Quadrangle::Eloily => {
            let shipped = canonical_dressing();
            let solved = solve_sign_dressing().map_err(failed)?;
            report.set(
                "dressing",
                json!({
                    "negative_points": shipped.signs.iter().filter(|(_, s)| s.is_negative())
                        .map(|(id, _)| g.label_of(g.point_index(*id).unwrap()).to_string()).collect::<Vec<_>>(),
                    "nullity": shipped.nullity,
                }),
            );
            report.check(
                "dressing",
                shipped == solved,
                "shipped dressing equals the solver output",
            );
            let inv = DressedInvariant::new(shipped).map_err(failed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut agree = 0u64;
            let mut forms = 0u64;
            for _ in 0..cfg.shots {
                let a =
                    Assignment::new(27, rng.random::<u64>() & ((1 << 27) - 1)).map_err(failed)?;
                agree += (inv.i3(&a) == cabello_chi(&g, &a).map_err(failed)?) as u64;
                let mut m = HVMatrices::default();
                for mat in [&mut m.a, &mut m.b, &mut m.c] {
                    for v in mat.iter_mut().flatten() {
                        *v = rng.random_range(-1.0..1.0);
                    }
                }
                forms += ((i3_det(&m) - i3_trace(&m)).abs() < 1e-9) as u64;
            }
            report.set(
                "i3_equals_chi",
                json!({ "samples": cfg.shots, "agree": agree }),
            );
            report.set(
                "determinant_equals_trace_form",
                json!({ "samples": cfg.shots, "agree": forms }),
            );
            report.check(
                "i3-chi",
                agree == cfg.shots,
                format!("{agree}/{} random assignments", cfg.shots),
            );
            report.check(
                "trace-form",
                forms == cfg.shots,
                format!("{forms}/{} random matrices", cfg.shots),
            );
        }
        Quadrangle::Doily => {
            let mismatches =
                pfaffian_mismatches(&g, &canonical_duads().map_err(failed)?).map_err(failed)?;
            report.set("pfaffian", json!({ "assignments": 1u64 << 15, "mismatches": mismatches, "maximum": m.formula_value }));
            report.check(
                "pfaffian",
                mismatches == 0,
                format!("Pf = chi on {} of 32768", 32768 - mismatches),
            );
        }
        Quadrangle::Grid => {
            let e = quadrangle_geometry(Quadrangle::Eloily).map_err(failed)?;
            let inv = DressedInvariant::new(canonical_dressing()).map_err(failed)?;
            let mut agree = 0;
            for bits in 0..1u64 << 9 {
                let a = Assignment::new(9, bits).map_err(failed)?;
                let lifted = lift(&g, &e, &a).map_err(failed)?;
                agree += (inv.det_a(&lifted) == cabello_chi(&g, &a).map_err(failed)?) as u32;
            }
            report.set(
                "determinant_equals_chi",
                json!({ "assignments": 512, "agree": agree }),
            );
            report.check(
                "determinant",
                agree == 512,
                format!("Det = chi on {agree} of 512"),
            );
        }
    }
    report.time("identity checks", t.elapsed());
    Ok(())
}
