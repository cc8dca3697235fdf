//! One dispatcher per command. Each calls into `lpweights` and packages
//! the result; CSV carries the tabular data, JSON the full record.

use lpweights::auxops::{default_a, regularize_signed, DecompositionPlan, Source, DEFAULT_XI};
use lpweights::circle::lp_norm;
use lpweights::correction::{sweep, verify_result, Sweep};
use lpweights::multipliers::square_function;
use lpweights::trials::{
    maximal_scenario, random_positive_partition, rng, theorem2_growth, theorem2_sweep, unit_scenario,
};
use lpweights::weights::{
    a1_implied_by_alpha1, ainf_certificate, alpha_p_constant, ap_constant, lemma1_probe, lemma4_certificate,
    reverse_holder_probe,
};
use lpweights::Partition;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{Command, ExperimentConfig, Scenario};
use crate::io::{load_function, records_csv, to_json};
use crate::report::{fmt_f, fmt_opt, Report, Table};
use crate::CliError;

/// Artifacts as `(file name, bytes)`, plus the report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifacts: Vec<(String, Vec<u8>)>,
    pub report: Report,
}

/// Cap used for the class certificates reported by `weights`.
const CERTIFICATE_CAP: f64 = 100.0;

/// Runs a resolved config; nothing is written.
pub fn execute(c: &ExperimentConfig) -> Result<Outcome, CliError> {
    match c.command.expect("resolved") {
        Command::Sigma => sigma(c),
        Command::Weights => weights(c),
        Command::Lemma1 => lemma1(c),
        Command::Lemma4 => lemma4(c),
        Command::Theorem2Sweep => theorem2(c),
        Command::Regularize => regularize(c),
        Command::CorrectSweep => correct_sweep(c),
    }
}

fn outcome(c: &ExperimentConfig, artifacts: Vec<(&str, Vec<u8>)>, tables: Vec<Table>, notes: Vec<String>) -> Outcome {
    Outcome {
        artifacts: artifacts.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        report: Report {
            config: c.clone(),
            tables,
            notes,
        },
    }
}

fn n_of(c: &ExperimentConfig) -> usize {
    c.n.expect("resolved")
}

fn s(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn table_from(title: &str, header: &[&str], rows: &[Vec<String>], fmt: impl Fn(usize, &str) -> String) -> Table {
    let mut t = Table::new(title, header);
    for r in rows {
        t.push(r.iter().enumerate().map(|(i, v)| fmt(i, v)).collect());
    }
    t
}

/// Shortens numeric cells for display.
fn pretty(_: usize, v: &str) -> String {
    match v.parse::<f64>() {
        Ok(x) if v.contains('.') || v.contains('e') => fmt_f(x),
        _ if v.is_empty() => "-".into(),
        _ => v.to_string(),
    }
}

fn sigma(c: &ExperimentConfig) -> Result<Outcome, CliError> {
    let n = n_of(c);
    let f = load_function(c.function.as_deref().expect("resolved"), n, c.seed)?;
    let p = match &c.partition {
        Some(p) => p.clone(),
        None => Partition::dyadic_window(n)?,
    };
    let sf = square_function(&f, &p)?;
    let values = sf.re();
    let (norm_f, norm_s) = (lp_norm(&f, 2.0), lp_norm(&sf, 2.0));
    let summary = json!({
        "n": n,
        "partition": p,
        "covers_window": p.covers_window(n),
        "l2_f": norm_f,
        "l2_sigma": norm_s,
    });
    let mut t = Table::new("square function", &["N", "intervals", "covers window", "|f|_2", "|sigma f|_2"]);
    t.push(vec![
        n.to_string(),
        p.len().to_string(),
        p.covers_window(n).to_string(),
        fmt_f(norm_f),
        fmt_f(norm_s),
    ]);
    Ok(outcome(
        c,
        vec![("sigma.csv", crate::io::grid_csv("sigma", &values)?), ("sigma.json", to_json(&summary)?)],
        vec![t],
        vec![],
    ))
}

fn weights(c: &ExperimentConfig) -> Result<Outcome, CliError> {
    let n = n_of(c);
    let spec = c.weight.as_ref().expect("resolved");
    let w = spec.build(n)?;
    let header = ["p", "A_p", "alpha_p"];
    let mut rows = vec![];
    for &p in c.p_grid.as_ref().expect("resolved") {
        let alpha = if (1.0..=2.0).contains(&p) { Some(alpha_p_constant(&w, p)?) } else { None };
        rows.push(vec![s(p), s(ap_constant(&w, p)?), opt(alpha)]);
    }
    let a1 = a1_implied_by_alpha1(&w);
    let ainf = ainf_certificate(&w, CERTIFICATE_CAP);
    let rh = reverse_holder_probe(&w, c.s_grid.as_ref().expect("resolved"), CERTIFICATE_CAP)?;
    let json = json!({
        "weight": spec,
        "n": n,
        "constants": rows.iter().map(|r| json!({"p": r[0], "A_p": r[1], "alpha_p": r[2]})).collect::<Vec<_>>(),
        "a1_from_alpha1": a1,
        "ainf": ainf,
        "reverse_holder": rh,
    });
    let notes = vec![
        format!(
            "A_1 {} <= sqrt(alpha_1) {}: {}",
            fmt_f(a1.a1),
            fmt_f(a1.sqrt_alpha1),
            a1.pass
        ),
        format!("A_inf certified at p = {} (cap {})", fmt_opt(ainf.certified_at), CERTIFICATE_CAP),
        format!("reverse Hölder best s = {}", fmt_opt(rh.best.as_ref().map(|r| r.s))),
    ];
    Ok(outcome(
        c,
        vec![("weights.csv", records_csv(&header, &rows)?), ("weights.json", to_json(&json)?)],
        vec![table_from("class constants", &header, &rows, pretty)],
        notes,
    ))
}

fn lemma1(c: &ExperimentConfig) -> Result<Outcome, CliError> {
    let n = n_of(c);
    let r = lemma1_probe(
        c.weight.as_ref().expect("resolved"),
        c.a_weight.as_ref().expect("resolved"),
        c.q.expect("resolved"),
        c.t_grid.as_ref().expect("resolved"),
        n,
    )?;
    let header = ["t", "r", "alpha_N", "alpha_2N", "growth", "stable"];
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            vec![
                s(row.t),
                s(row.r),
                opt(row.constant_n),
                opt(row.constant_2n),
                opt(row.growth),
                row.stable.to_string(),
            ]
        })
        .collect();
    let notes = vec![
        format!("w alpha_q constant {} at q = {}", fmt_f(r.w_alpha_q), r.q_effective),
        format!("a A_inf certified at p = {}", fmt_opt(r.a_ainf.certified_at)),
        format!("max growth {} (threshold {})", fmt_opt(r.max_growth()), r.threshold),
    ];
    Ok(outcome(
        c,
        vec![("lemma1.csv", records_csv(&header, &rows)?), ("lemma1.json", to_json(&r)?)],
        vec![table_from(&format!("mixing probe, N = {n} -> {}", 2 * n), &header, &rows, pretty)],
        notes,
    ))
}

fn lemma4(c: &ExperimentConfig) -> Result<Outcome, CliError> {
    let n = n_of(c);
    let w = c.weight.as_ref().expect("resolved").build(n)?;
    let reports = c
        .p_grid
        .as_ref()
        .expect("resolved")
        .iter()
        .map(|&p| lemma4_certificate(&w, p))
        .collect::<lpweights::Result<Vec<_>>>()?;
    let header = ["p", "c", "a", "b", "alpha_p", "A_1", "margin", "pass"];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let k = &r.constants;
            vec![
                s(k.p),
                s(k.c),
                s(k.a),
                s(k.b),
                s(r.alpha_p),
                s(r.a1),
                s(r.worst_margin.value),
                r.pass.to_string(),
            ]
        })
        .collect();
    Ok(outcome(
        c,
        vec![("lemma4.csv", records_csv(&header, &rows)?), ("lemma4.json", to_json(&reports)?)],
        vec![table_from("certificate", &header, &rows, pretty)],
        vec![],
    ))
}

fn theorem2(c: &ExperimentConfig) -> Result<Outcome, CliError> {
    let rows = theorem2_sweep(
        c.pairs.as_ref().expect("resolved"),
        c.ns.as_ref().expect("resolved"),
        c.trials.expect("resolved"),
        c.seed.expect("resolved"),
    )?;
    let growth = theorem2_growth(&rows);
    let header = ["a", "w", "N", "trials", "max_ratio", "mean_ratio"];
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.a.clone(), r.w.clone(), r.n.to_string(), r.trials.to_string(), s(r.max_ratio), s(r.mean_ratio)])
        .collect();
    let g_header = ["a", "w", "N", "growth"];
    let g_records: Vec<Vec<String>> = growth
        .iter()
        .map(|(a, w, n, g)| vec![a.clone(), w.clone(), n.to_string(), s(*g)])
        .collect();
    let json = json!({
        "rows": rows,
        "growth": growth.iter().map(|(a, w, n, g)| json!({"a": a, "w": w, "n": n, "growth": g})).collect::<Vec<_>>(),
    });
    Ok(outcome(
        c,
        vec![
            ("theorem2.csv", records_csv(&header, &records)?),
            ("theorem2_growth.csv", records_csv(&g_header, &g_records)?),
            ("theorem2.json", to_json(&json)?),
        ],
        vec![
            table_from("ratio sweep", &header, &records, pretty),
            table_from("growth per doubling", &g_header, &g_records, pretty),
        ],
        vec![],
    ))
}

#[derive(Serialize)]
struct PlanRow {
    half: &'static str,
    group: String,
    interval: usize,
    piece: String,
    hull_lo: i64,
    hull_hi: i64,
    padded_lo: i64,
    padded_hi: i64,
}

fn plan_rows(half: &'static str, plan: &DecompositionPlan, source: &[usize], out: &mut Vec<PlanRow>) {
    for g in &plan.groups {
        for it in &g.items {
            let piece = match it.source {
                Source::Whole { .. } => "whole".to_string(),
                Source::Piece { direction, index, .. } => format!("{direction:?}-{index}").to_lowercase(),
            };
            out.push(PlanRow {
                half,
                group: g.kind.to_string(),
                interval: source[it.source.interval()],
                piece,
                hull_lo: it.hull.lo(),
                hull_hi: it.hull.hi(),
                padded_lo: it.padded.lo(),
                padded_hi: it.padded.hi(),
            });
        }
    }
}

fn regularize(c: &ExperimentConfig) -> Result<Outcome, CliError> {
    let n = n_of(c);
    let p = match &c.partition {
        Some(p) => p.clone(),
        None => {
            let mut r = rng(c.seed.expect("resolved"));
            let count = r.gen_range(1..=24);
            random_positive_partition(n, count, &mut r)?
        }
    };
    let plan = regularize_signed(&p, default_a(), DEFAULT_XI)?;
    let mut rows = vec![];
    plan_rows("positive", &plan.positive, &plan.positive_source, &mut rows);
    plan_rows("negative", &plan.negative_mirrored, &plan.negative_source, &mut rows);
    let halves = [("positive", &plan.positive), ("negative (mirrored)", &plan.negative_mirrored)];
    let mut tables = vec![];
    let mut notes = vec![];
    let mut summaries = vec![];
    for (name, half) in halves {
        let sm = half.summary();
        let v = half.validate(n);
        let mut t = Table::new(&format!("{name} half"), &["quantity", "value"]);
        for (k, val) in [
            ("intervals", sm.intervals),
            ("short", sm.short),
            ("long", sm.long),
            ("colors", sm.colors),
            ("forward classes", sm.forward_classes),
            ("reversed classes", sm.reversed_classes),
            ("forward pieces", sm.forward_pieces),
            ("reversed pieces", sm.reversed_pieces),
            ("pooled pieces", sm.pooled_pieces),
            ("rerouted", sm.rerouted),
            ("class conflicts", sm.class_conflicts),
        ] {
            t.push(vec![k.into(), val.to_string()]);
        }
        for (label, size) in &sm.group_sizes {
            t.push(vec![format!("size of {label}"), size.to_string()]);
        }
        tables.push(t);
        notes.push(format!("{name} half validator: {}", if v.pass() { "pass" } else { "FAIL" }));
        notes.extend(v.failures.iter().map(|f| format!("  {f}")));
        summaries.push(json!({"half": name, "summary": sm, "validation": v}));
    }
    let json = json!({"n": n, "partition": p, "plan": plan, "halves": summaries});
    Ok(outcome(
        c,
        vec![("plan.csv", crate::io::to_csv(rows)?), ("plan.json", to_json(&json)?)],
        tables,
        notes,
    ))
}

fn correct_sweep(c: &ExperimentConfig) -> Result<Outcome, CliError> {
    let n = n_of(c);
    let seed = c.seed.expect("resolved");
    let sc = match c.scenario.expect("resolved") {
        Scenario::Unit => unit_scenario(n, seed)?,
        Scenario::Maximal => maximal_scenario(
            n,
            c.gamma.expect("resolved"),
            c.a_weight.as_ref().expect("resolved"),
            seed,
        )?,
    };
    let sw: Sweep = sweep(
        &sc.f,
        &sc.w,
        &sc.a,
        &sc.partition,
        c.b_grid.as_ref().expect("resolved"),
        c.strategy.expect("resolved"),
    )?;
    let checks = sw
        .results
        .iter()
        .map(|r| verify_result(r, &sc.f, &sc.w, &sc.a, &sc.partition))
        .collect::<lpweights::Result<Vec<_>>>()?;
    let header: Vec<&str> = Sweep::CSV_HEADER.split(',').collect();
    let rows: Vec<Vec<String>> = sw
        .rows
        .iter()
        .map(|r| {
            vec![
                s(r.b_target),
                s(r.epsilon),
                s(r.b_achieved),
                r.iterations.to_string(),
                r.converged.to_string(),
            ]
        })
        .collect();
    let monotone = sw.rows.windows(2).all(|x| x[1].epsilon <= x[0].epsilon);
    let verified = checks.iter().all(|v| v.pass);
    let mut notes = vec![
        format!("verification: {}", if verified { "pass" } else { "FAIL" }),
        format!("epsilon nonincreasing in B: {monotone}"),
    ];
    notes.push(match &sw.fit {
        Some(fit) => format!(
            "fit B = {} (1 + |log eps|) + {}  (rms {}, {} points)",
            fmt_f(fit.slope),
            fmt_f(fit.intercept),
            fmt_f(fit.rms_residual),
            fit.points
        ),
        None => "fit skipped: fewer than two distinct epsilon > 0".into(),
    });
    let json = json!({
        "n": n,
        "strategy": sw.strategy,
        "rows": sw.rows,
        "fit": sw.fit,
        "verification": checks,
        "epsilon_monotone": monotone,
    });
    Ok(outcome(
        c,
        vec![("sweep.csv", records_csv(&header, &rows)?), ("sweep.json", to_json(&json)?)],
        vec![table_from("trade-off curve", &header, &rows, pretty)],
        notes,
    ))
}
