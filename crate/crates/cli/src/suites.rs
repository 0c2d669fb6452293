use qcommit::channels::{gen_pi, gen_qcd, gen_qsd, Channel, PromiseKind, QsdInstance};
use qcommit::linalg::random::{haar_unitary, random_density, random_pure_vec, stream_rng};
use qcommit::linalg::{reduced_state, DensityMatrix, PureState, SubsystemShape, C64, ZERO};
use qcommit::norms::{fidelity, fidelity_sum_opt, trace_distance};
use qcommit::oraclegame::{
    envelope, per_query_gap, protocol_accept, reset_control_prover, scaling_sweep, search_prover, honest_prover,
    OracleInput, OracleKind, PUniformSpec, UnitaryMeasure,
};
use qcommit::schemes::{
    orthogonalize, pi_cheat_search, pi_commit, pi_verify, qcd_advice, qcd_round, qcd_single_round_cheat,
    qsd_commit, qsd_optimal_cheat, qsd_verify, repetition_bound, repetition_cheat, witnessable_eval,
};
use qcommit::Result;
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, Suite};
use crate::report::{Assertion, Report};

const HONEST: f64 = 1e-9;

pub fn run(cfg: RunConfig) -> Result<Report> {
    let mut r = Report::new(cfg.clone());
    match cfg.subcommand {
        Suite::NormsSuite => norms_suite(&cfg, &mut r)?,
        Suite::QsdScheme => qsd_scheme(&cfg, &mut r)?,
        Suite::QcdScheme => qcd_scheme(&cfg, &mut r)?,
        Suite::Repetition => repetition(&cfg, &mut r)?,
        Suite::PiScheme => pi_scheme(&cfg, &mut r)?,
        Suite::Orthogonalize => orthogonalize_suite(&cfg, &mut r)?,
        Suite::OracleProtocol => oracle_protocol(&cfg, &mut r)?,
        Suite::OracleScaling => oracle_scaling(&cfg, &mut r)?,
    }
    Ok(r)
}

fn norms_suite(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let pairs = cfg.samples.unwrap_or(1000);
    let sum_pairs = pairs.div_ceil(5);
    let mut ordering_violation = f64::NEG_INFINITY;
    let mut sum_gap = 0.0f64;
    for i in 0..pairs as u64 {
        let d = 2 + (i as usize % 7);
        let mut rng = stream_rng(cfg.seed, i);
        let rho = random_density(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        let f = fidelity(&rho, &sigma)?;
        let t = 0.5 * trace_distance(&rho, &sigma)?;
        let upper = (1.0 - f * f).max(0.0).sqrt();
        ordering_violation = ordering_violation.max((1.0 - f) - t).max(t - upper);
        if (i as usize) < sum_pairs {
            sum_gap = sum_gap.max((fidelity_sum_opt(&rho, &sigma)?.value - (1.0 + f)).abs());
        }
    }
    r.result(json!({ "check": "fvdg_ordering", "pairs": pairs, "dims": [2, 8], "max_violation": ordering_violation }));
    r.result(json!({ "check": "fidelity_sum", "pairs": sum_pairs, "max_deviation": sum_gap }));
    r.check(Assertion::at_most("fvdg_ordering", ordering_violation, 1e-9));
    r.check(Assertion::at_most("fidelity_sum_reaches_one_plus_fidelity", sum_gap, 1e-6));
    Ok(())
}

#[derive(Serialize)]
struct QsdRow {
    instance: String,
    kind: PromiseKind,
    mu: f64,
    honest_accept: [f64; 2],
    cheat_average: f64,
    half_one_plus_fidelity: f64,
    analytic_bound: f64,
}

fn qsd_row(name: &str, inst: &QsdInstance) -> Result<QsdRow> {
    let mut honest = [0.0; 2];
    for b in 0..2u8 {
        let keep = qsd_commit(inst, b)?.sender_keep;
        honest[b as usize] = qsd_verify(inst, b, &keep.density())?;
    }
    let cheat = qsd_optimal_cheat(inst)?;
    let f = fidelity(&inst.output_state(0)?, &inst.output_state(1)?)?;
    Ok(QsdRow {
        instance: name.into(),
        kind: inst.kind,
        mu: inst.mu,
        honest_accept: honest,
        cheat_average: cheat.average,
        half_one_plus_fidelity: 0.5 * (1.0 + f),
        analytic_bound: cheat.analytic_bound,
    })
}

fn qsd_scheme(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let qubits = cfg.qubits.unwrap_or(2);
    let mut rows = Vec::new();
    for garbage in [false, true] {
        if garbage && qubits < 2 {
            continue;
        }
        let tag = if garbage { "garbage" } else { "plain" };
        let yes = gen_qsd(PromiseKind::Yes, qubits, garbage, cfg.seed)?;
        rows.push(qsd_row(&format!("yes/{tag}"), &yes)?);
        let no = gen_qsd(PromiseKind::No, qubits, garbage, cfg.seed)?;
        rows.push(qsd_row(&format!("no/{tag}"), &no)?);
    }
    rows.push(qsd_row("rotation/pi_over_3", &QsdInstance::rotation_pair(std::f64::consts::FRAC_PI_3)?)?);
    for row in &rows {
        let worst = row.honest_accept.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
        r.check(Assertion::at_most(format!("{}: honest_accept", row.instance), worst, HONEST));
        let dev = (row.cheat_average - row.half_one_plus_fidelity).abs();
        r.check(Assertion::at_most(format!("{}: cheat_equals_half_one_plus_fidelity", row.instance), dev, 1e-6));
        if row.kind == PromiseKind::Yes {
            let bound = 0.5 + row.mu.sqrt() / 2.0;
            r.check(Assertion::at_most(format!("{}: cheat_within_bound", row.instance), row.cheat_average, bound + HONEST));
        }
        if row.instance.starts_with("rotation") {
            let dev = (row.cheat_average - 0.75).abs();
            r.check(Assertion::at_most(format!("{}: cheat_is_three_quarters", row.instance), dev, 1e-6));
        }
    }
    rows.into_iter().for_each(|row| r.result(row));
    Ok(())
}

fn qcd_scheme(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let qubits = cfg.qubits.unwrap_or(1);
    let restarts = cfg.restarts.unwrap_or(16);
    for garbage in [false, true] {
        let tag = if garbage { "garbage" } else { "plain" };
        let inst = gen_qcd(PromiseKind::Yes, qubits, garbage, cfg.seed)?;
        let advice = qcd_advice(&inst, restarts, cfg.seed)?;
        let honest = [qcd_round(&inst, 0, &advice)?.accept_probability, qcd_round(&inst, 1, &advice)?.accept_probability];
        let cheat = qcd_single_round_cheat(&inst, &advice, restarts, cfg.seed.wrapping_add(1))?;
        let worst = honest.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
        r.check(Assertion::at_most(format!("yes/{tag}: honest_accept"), worst, HONEST));
        r.check(Assertion::at_most(format!("yes/{tag}: cheat_within_bound"), cheat.average, cheat.analytic_bound + 1e-6));
        r.check(Assertion::at_least(format!("yes/{tag}: search_reaches_three_quarters"), cheat.average, 0.75 - 1e-3));
        r.result(json!({
            "instance": format!("yes/{tag}"),
            "mu": inst.mu,
            "honest_accept": honest,
            "cheat": cheat,
        }));
    }
    Ok(())
}

fn repetition(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let (k, mu) = (cfg.k.unwrap_or(2), cfg.mu.unwrap_or(1e-6));
    let restarts = cfg.restarts.unwrap_or(8);
    let mut inst = gen_qcd(PromiseKind::Yes, cfg.qubits.unwrap_or(1), false, cfg.seed)?;
    inst.mu = mu;
    let advice = qcd_advice(&inst, restarts, cfg.seed)?;
    let cheat = repetition_cheat(&inst, k, &advice, restarts, cfg.seed.wrapping_add(1))?;
    let ideal = 0.5 + 0.5f64.powi(k as i32 + 1);
    let bound = repetition_bound(k, mu);
    r.check(Assertion::at_most("searched_within_ideal_term", cheat.average, ideal + 1e-6));
    r.check(Assertion::at_most("searched_within_full_bound", cheat.average, bound + 1e-6));
    r.result(json!({ "k": k, "mu": mu, "ideal_term": ideal, "full_bound": bound, "cheat": cheat }));
    Ok(())
}

fn pi_scheme(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let d = cfg.d.unwrap_or(2);
    let restarts = cfg.restarts.unwrap_or(64);
    let yes = gen_pi(PromiseKind::Yes, (d, d), cfg.seed)?;
    let (c0, c1) = (pi_commit(&yes, 0)?, pi_commit(&yes, 1)?);
    let hiding = c0.commit_msg.op().max_abs_diff(c1.commit_msg.op());
    let honest = [pi_verify(&yes, 0, &c0.joint)?, pi_verify(&yes, 1, &c1.joint)?];
    r.check(Assertion::at_most("yes: commit_messages_equal", hiding, 1e-10));
    let worst = honest.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
    r.check(Assertion::at_most("yes: honest_accept", worst, HONEST));
    r.result(json!({ "instance": "yes", "dims": [d, d], "commit_difference": hiding, "honest_accept": honest }));

    let no = gen_pi(PromiseKind::No, (d, d), cfg.seed)?;
    let s = pi_cheat_search(&no, restarts, cfg.seed.wrapping_add(1))?;
    let e = witnessable_eval(&no.q0, &no.q1, &s.rho0, &s.sigma, &s.psi)?;
    r.check(Assertion::at_least("no: witness_marginals_match", f64::from(u8::from(e.constraint_ok)), 1.0));
    r.check(Assertion::at_most("no: searched_witness_within_bound", e.avg_accept, 0.5 + no.mu + 1e-3));
    r.result(json!({
        "instance": "no",
        "dims": [d, d],
        "mu": no.mu,
        "restarts": restarts,
        "searched_average": e.avg_accept,
        "p0": e.p0,
        "p1": e.p1,
    }));
    Ok(())
}

/// A pair of states on A ⊗ B whose A-marginals are nearly orthogonal,
/// spoiled by a common random admixture of weight `eps`.
fn near_orthogonal_pair(seed: u64, i: u64) -> (PureState, PureState, SubsystemShape) {
    let mut rng = stream_rng(seed, i);
    let (da, db) = (2 + (i as usize % 3), 2 + (i as usize / 3 % 2));
    let eps = 0.03 * (i % 10) as f64;
    let noise = random_pure_vec(da * db, &mut rng);
    let make = |a: usize| {
        let mut v: Vec<C64> = noise.iter().map(|z| z * eps.sqrt()).collect();
        for b in 0..db {
            v[a * db + b] += C64::new((1.0 / db as f64).sqrt(), 0.0);
        }
        PureState::normalized(v).expect("nonzero vector")
    };
    (make(0), make(1), SubsystemShape::new(vec![da, db]).expect("positive dims"))
}

fn orthogonalize_suite(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let pairs = cfg.samples.unwrap_or(200);
    let (mut worst_f, mut worst_slack, mut too_close) = (0.0f64, f64::INFINITY, 0usize);
    for i in 0..pairs as u64 {
        let (p0, p1, split) = near_orthogonal_pair(cfg.seed, i);
        let o = match orthogonalize(&p0, &p1, &split) {
            Ok(o) => o,
            Err(qcommit::Error::TooClose { .. }) => {
                too_close += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let marginal = |p: &PureState| -> Result<DensityMatrix> {
            DensityMatrix::normalized(reduced_state(p.amplitudes(), &split, &[0])?)
        };
        worst_f = worst_f.max(fidelity(&marginal(&o.phi0p)?, &marginal(&o.phi1p)?)?);
        for (new, old) in [(&o.phi0p, &p0), (&o.phi1p, &p1)] {
            worst_slack = worst_slack.min(new.overlap(old).norm() - (1.0 - o.epsilon));
        }
    }
    let diag = |p: f64| PureState::new(vec![C64::new(p.sqrt(), 0.0), ZERO, ZERO, C64::new((1.0 - p).sqrt(), 0.0)]);
    let d0 = diag(0.99)?;
    let o = orthogonalize(&d0, &diag(0.01)?, &SubsystemShape::qubits(2))?;
    let diag_dev = (o.phi0p.overlap(&d0).norm() - 0.99f64.sqrt()).abs();
    r.result(json!({ "pairs": pairs, "too_close": too_close, "max_fidelity": worst_f, "min_overlap_slack": worst_slack }));
    r.result(json!({ "example": "diag(0.99, 0.01)", "epsilon": o.epsilon, "overlaps": o.overlaps }));
    r.check(Assertion::at_most("outputs_orthogonal", worst_f, 1e-9));
    r.check(Assertion::at_least("overlaps_at_least_one_minus_epsilon", worst_slack.min(0.0), -1e-8));
    r.check(Assertion::at_most("diagonal_example_overlap", diag_dev, 1e-9));
    Ok(())
}

fn oracle_protocol(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let d = cfg.d.unwrap_or(2);
    let restarts = cfg.restarts.unwrap_or(32);
    let hidden = cfg.samples.unwrap_or(50);
    let mut honest_worst = 0.0f64;
    for i in 0..hidden as u64 {
        let u = haar_unitary(d, &mut stream_rng(cfg.seed, i));
        let p = protocol_accept(OracleKind::Coherent, Some(&u), &honest_prover(&u)?, d)?;
        honest_worst = honest_worst.max((p - 1.0).abs());
    }
    let identity = protocol_accept(OracleKind::Dephasing, None, &Channel::identity(2 * d), d)?;
    let reset = protocol_accept(OracleKind::Dephasing, None, &reset_control_prover(d), d)?;
    let searched = search_prover(OracleKind::Dephasing, None, d, 2, restarts, cfg.seed)?;
    let u = haar_unitary(d, &mut stream_rng(cfg.seed, u64::MAX));
    let gap = per_query_gap(&UnitaryMeasure::point_mass(u)?, &OracleInput::plus(), 1)?;
    r.result(json!({ "prover": "honest", "oracle": 1, "hidden_unitaries": hidden, "max_deviation_from_one": honest_worst }));
    r.result(json!({ "prover": "identity", "oracle": 2, "accept": identity }));
    r.result(json!({ "prover": "reset_control", "oracle": 2, "accept": reset }));
    r.result(json!({ "prover": "searched", "oracle": 2, "restarts": restarts, "accept": searched.value }));
    r.result(json!({ "check": "point_mass_gap", "input": "plus", "gap": gap.direct, "expected": 1.0 }));
    r.check(Assertion::at_most("honest_accept", honest_worst, HONEST));
    r.check(Assertion::at_most("identity_prover_half", (identity - 0.5).abs(), 1e-12));
    r.check(Assertion::at_most("reset_prover_at_most_half", reset, 0.5 + 1e-9));
    r.check(Assertion::at_most("searched_prover_at_most_half", searched.value, 0.5 + 1e-9));
    r.check(Assertion::at_most("point_mass_gap", (gap.direct - 1.0).abs(), 1e-9));
    Ok(())
}

fn oracle_scaling(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let ds = cfg.d.map_or_else(|| vec![2, 4, 8], |d| vec![d]);
    let ms = cfg.m.map_or_else(|| (0..=4).collect(), |m| vec![m]);
    let n = cfg.samples.unwrap_or(10_000);
    let rows = scaling_sweep(&ds, &ms, n, cfg.seed)?;
    for row in &rows {
        let cell = format!("d={} m={}", row.d, row.m);
        r.check(Assertion::at_most(format!("{cell}: under_envelope"), row.estimate, envelope(row.d, row.m)));
        if row.m == 0 {
            r.check(Assertion::at_most(format!("{cell}: uniform_centered"), row.estimate.abs(), 3.0 * row.std_error));
        } else {
            let seed = cfg.seed ^ 0x9a9 ^ ((row.d as u64) << 32) ^ (u64::from(row.m) << 16);
            let spec = PUniformSpec::new(row.d, row.m, seed)?;
            let g = per_query_gap(&UnitaryMeasure::PUniform(spec), &OracleInput::plus(), n)?;
            let allowed = 2.0 * g.formula.std_error + 1e-9;
            r.check(Assertion::at_most(format!("{cell}: gap_formula_agrees"), (g.direct - g.formula.mean).abs(), allowed));
        }
        r.result(row);
    }
    r.table = Some(rows);
    Ok(())
}
