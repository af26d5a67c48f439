//! One function per subcommand. Each returns the report and its CSV rendering.

use mevcost::cost::{
    cost, estimate_sup_cost, global_smooth_bound, randomized_cost, stabilizer_bound, SupEstimateConfig,
};
use mevcost::payoff::{
    fair_wrapper, frontrun_payoff, indicator_payoff, linear_tightness_payoff, liquidation_example, liquidation_list,
    max_sandwich_sell, sandwich_payoff, table_payoff, trader_volume, ActionSpace, ExchangeFn, FrontrunList,
    FrontrunMetric, FrontrunSpace, MarketAction, Payoff, SandwichList, SandwichMetric, SandwichSpace,
};
use mevcost::permgroup::{enumerate_group, TransactionList, MAX_DEGREE};
use mevcost::spectral::{build_graph, coherence, decompose, parse_edge_list, GraphSpec, SpectrumExport, SPECTRAL_CAP};
use mevcost::suite::{kinds_covered, run_bounds_suite, SuiteConfig, SuiteReport, SUITE_MAX_DEGREE};
use mevcost::{CheckMode, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_exchange, parse_payoff, PayoffConfig};
use crate::report::{csv_field, quantities_csv, quantity, Provenance, Quantity, Report};
use crate::CliError;

pub struct Output {
    pub report: Report,
    pub csv: String,
}

impl Output {
    fn from_quantities(report: Report) -> Self {
        let csv = quantities_csv(&report.quantities);
        Self { report, csv }
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

fn resolve_n(from_config: Option<usize>, flag: Option<usize>) -> Result<usize, CliError> {
    match (from_config, flag) {
        (Some(a), Some(b)) if a != b => Err(config_error(format!(
            "--n {b} disagrees with the payoff config (n = {a})"
        ))),
        (Some(a), _) | (None, Some(a)) => Ok(a),
        (None, None) => Err(config_error("this payoff needs --n or params.n")),
    }
}

fn n_from_table(len: usize) -> Option<usize> {
    (1..=MAX_DEGREE).find(|&k| (1..=k).product::<usize>() == len)
}

// --- cost ------------------------------------------------------------------

fn cost_of<A, P>(family: &str, f: &P, x: &TransactionList<A>) -> Result<(Value, Vec<Quantity>), CliError>
where
    A: Clone + PartialEq + Serialize,
    P: Payoff<A> + ?Sized,
{
    let report = cost(f, x)?;
    let stabilizer = match stabilizer_bound(f, x) {
        Ok(c) => Some(c),
        Err(Error::Precondition(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut quantities = vec![
        quantity(
            "max_value",
            report.max_value,
            "max over orderings of f",
            Provenance::Exact,
        ),
        quantity(
            "mean_value",
            report.mean_value,
            "mean over orderings of f",
            Provenance::Exact,
        ),
        quantity("cost", report.cost, "C(f, x) = max - mean", Provenance::Exact),
    ];
    if let Some(c) = &stabilizer {
        quantities.push(quantity(
            "stabilizer_bound",
            c.rhs,
            "C(f, x) <= max f * (1 - |F(x)|/n!)",
            Provenance::Exact,
        ));
    }
    let result = json!({
        "family": family,
        "x": x.as_slice(),
        "report": report,
        "stabilizer_certificate": stabilizer,
    });
    Ok((result, quantities))
}

fn market_list(trades: &[f64]) -> Vec<MarketAction> {
    trades.iter().map(|&t| MarketAction::trade(t)).collect()
}

pub fn cost_command(n: Option<usize>, payoff: &str, seed: u64) -> Result<Output, CliError> {
    let config = parse_payoff(payoff)?;
    let check_len = |len: usize| match n {
        Some(k) if k != len => Err(config_error(format!("--n {k} disagrees with a list of length {len}"))),
        _ => Ok(()),
    };
    let (result, quantities) = match &config {
        PayoffConfig::Liquidation(p) => {
            let n = resolve_n(p.n, n)?;
            let (f, x) = match p.up_moves {
                Some(m) => liquidation_list(n, m)?,
                None => liquidation_example(n)?,
            };
            cost_of("liquidation", &f, &x)?
        }
        PayoffConfig::Indicator(p) => {
            check_len(p.x.len())?;
            let x = TransactionList::new(p.x.clone());
            cost_of("indicator", &indicator_payoff(x.clone()), &x)?
        }
        PayoffConfig::Linear(p) => {
            let x = match &p.x {
                Some(x) => {
                    check_len(x.len())?;
                    x.clone()
                }
                None => {
                    let n = resolve_n(None, n)?;
                    (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()
                }
            };
            cost_of("linear", &linear_tightness_payoff(), &TransactionList::new(x))?
        }
        PayoffConfig::Frontrun(p) => {
            check_len(p.trades.len() + 1)?;
            let mut actions = vec![MarketAction::validator(p.delta)];
            actions.extend(market_list(&p.trades));
            let cap = p.volume_cap.unwrap_or_else(|| p.trades.iter().sum());
            FrontrunList::new(actions.clone(), p.delta, cap)?;
            let f = frontrun_payoff(p.exchange.clone(), p.delta)?;
            cost_of("frontrun", &f, &TransactionList::new(actions))?
        }
        PayoffConfig::Sandwich(p) => {
            check_len(p.trades.len() + 2)?;
            let total: f64 = p.trades.iter().sum();
            let sell = match p.sell {
                Some(s) => s,
                None => max_sandwich_sell(&p.exchange, total, p.buy)?,
            };
            let mut actions = vec![MarketAction::validator(p.buy)];
            actions.extend(market_list(&p.trades));
            actions.push(MarketAction::validator(-sell));
            SandwichList::new(actions.clone(), p.volume_cap.unwrap_or(total))?;
            let f = sandwich_payoff(p.exchange.clone())?;
            cost_of("sandwich", &f, &TransactionList::new(actions))?
        }
        PayoffConfig::Table(p) => {
            let table_n = n_from_table(p.values.len())
                .ok_or_else(|| config_error(format!("{} table values is not n! for any n <= 8", p.values.len())))?;
            let n = resolve_n(Some(table_n), n)?;
            let x = TransactionList::new(p.x.clone().unwrap_or_else(|| (0..n as i64).collect()));
            if x.len() != n {
                return Err(config_error(format!("x has length {}, the table needs {n}", x.len())));
            }
            cost_of("table", &table_payoff(p.values.clone(), &x)?, &x)?
        }
    };
    let mut report = Report::new("cost", seed, Provenance::Exact);
    report.config = json!({ "n": n, "payoff": config });
    report.quantities = quantities;
    report.result = result;
    Ok(Output::from_quantities(report))
}

// --- spectrum and coherence ------------------------------------------------

pub fn parse_graph(spec: &str) -> Result<GraphSpec, CliError> {
    match spec {
        "complete" => Ok(GraphSpec::Complete),
        "transposition" => Ok(GraphSpec::Transposition),
        _ => match spec.strip_prefix("custom:") {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_error(format!("cannot read edge list {path}: {e}")))?;
                Ok(GraphSpec::Custom(parse_edge_list(&text)?))
            }
            None => Err(config_error(format!(
                "unknown graph {spec:?}; expected complete, transposition or custom:<path>"
            ))),
        },
    }
}

pub fn spectrum_command(n: usize, graph: &str, allow_n8: bool, seed: u64) -> Result<Output, CliError> {
    if n > SPECTRAL_CAP && allow_n8 {
        log::warn!(
            "n = {n}: the dense eigensolver needs roughly 13 GB per {0}x{0} matrix",
            40320
        );
    }
    let g = build_graph(n, parse_graph(graph)?, allow_n8)?;
    let spectrum = decompose(&g)?;
    let export = SpectrumExport::new(&spectrum);
    let mut report = Report::new("spectrum", seed, Provenance::Exact);
    report.config = json!({ "n": n, "graph": graph, "allow_n8": allow_n8 });
    report.quantities = vec![
        quantity("vertex_count", g.vertex_count() as f64, "n!", Provenance::Exact),
        quantity("edge_count", g.edge_count() as f64, "|E|", Provenance::Exact),
        quantity(
            "diameter",
            g.diameter() as f64,
            "diam(G) by breadth-first search",
            Provenance::Exact,
        ),
        quantity(
            "lambda_2",
            spectrum.lambda2(),
            "second-smallest Laplacian eigenvalue",
            Provenance::Exact,
        ),
        quantity(
            "lambda_max",
            spectrum.lambda_max(),
            "largest Laplacian eigenvalue",
            Provenance::Exact,
        ),
        quantity(
            "coherence",
            export.coherence,
            "mu = max_i ||u_i||_inf",
            Provenance::Exact,
        ),
    ];
    report.result = json!({
        "graph": {
            "kind": g.kind(),
            "vertex_count": g.vertex_count(),
            "edge_count": g.edge_count(),
            "diameter": g.diameter(),
            "regular_degree": g.regular_degree(),
        },
        "spectrum": export,
    });
    let csv = export.to_csv();
    Ok(Output { report, csv })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoherenceRow {
    pub n: usize,
    pub transposition_mu: f64,
    pub complete_mu: f64,
    /// `√(1 − 1/n!)`, or 1 for the single-vertex graph.
    pub complete_exact: f64,
    pub transposition_basis_dependent: bool,
}

pub fn coherence_table_command(n_max: usize, seed: u64) -> Result<Output, CliError> {
    if !(1..=SPECTRAL_CAP).contains(&n_max) {
        return Err(Error::DegreeOutOfRange {
            n: n_max,
            cap: SPECTRAL_CAP,
        }
        .into());
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let complete = coherence(&decompose(&build_graph(n, GraphSpec::Complete, false)?)?);
        let transposition = coherence(&decompose(&build_graph(n, GraphSpec::Transposition, false)?)?);
        let size: usize = (1..=n).product();
        rows.push(CoherenceRow {
            n,
            transposition_mu: transposition.mu,
            complete_mu: complete.mu,
            complete_exact: if size == 1 {
                1.0
            } else {
                (1.0 - 1.0 / size as f64).sqrt()
            },
            transposition_basis_dependent: transposition.basis_dependent,
        });
    }
    let mut report = Report::new("coherence-table", seed, Provenance::Exact);
    report.config = json!({ "n_max": n_max });
    for r in &rows {
        report.quantities.push(quantity(
            &format!("transposition_mu_n{}", r.n),
            r.transposition_mu,
            "coherence of the transposition graph (basis-dependent)",
            Provenance::Exact,
        ));
        report.quantities.push(quantity(
            &format!("complete_mu_n{}", r.n),
            r.complete_mu,
            "coherence of the complete graph, sqrt(1 - 1/n!)",
            Provenance::Exact,
        ));
    }
    let mut csv = String::from("n,transposition_mu,complete_mu,complete_exact,transposition_basis_dependent\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{}\n",
            r.n, r.transposition_mu, r.complete_mu, r.complete_exact, r.transposition_basis_dependent
        ));
    }
    report.result = json!({ "rows": rows });
    Ok(Output { report, csv })
}

// --- bounds suite -----------------------------------------------------------

fn suite_csv(report: &SuiteReport) -> String {
    let mut out = String::from("record,case,name,lhs,rhs,slack,passed,enforced\n");
    for r in &report.certificates {
        let c = &r.certificate;
        let name = serde_json::to_value(c.bound_name)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        out.push_str(&format!(
            "certificate,{},{name},{},{},{},{},{}\n",
            csv_field(&r.case),
            c.lhs,
            c.rhs,
            c.slack,
            c.satisfied,
            r.enforced
        ));
    }
    for c in &report.checks {
        out.push_str(&format!(
            "check,{},{},{},{},{},{},true\n",
            csv_field(&c.case),
            csv_field(&c.quantity),
            c.value,
            c.expected,
            c.tolerance - (c.value - c.expected).abs(),
            c.passed
        ));
    }
    for e in &report.errors {
        out.push_str(&format!(
            "error,{},{},,,,false,true\n",
            csv_field(&e.case),
            csv_field(&e.message)
        ));
    }
    out
}

pub fn bounds_suite_command(n: usize, trials: usize, seed: u64, inject_failure: bool) -> Result<Output, CliError> {
    if n > SUITE_MAX_DEGREE {
        return Err(Error::DegreeOutOfRange {
            n,
            cap: SUITE_MAX_DEGREE,
        }
        .into());
    }
    let suite = run_bounds_suite(SuiteConfig {
        n,
        trials,
        seed,
        inject_failure,
    })?;
    for e in &suite.errors {
        log::error!("{}: {}", e.case, e.message);
    }
    let sampled = suite
        .certificates
        .iter()
        .any(|r| r.certificate.mode == CheckMode::Sampled);
    let mut report = Report::new(
        "bounds-suite",
        seed,
        if sampled {
            Provenance::Sampled
        } else {
            Provenance::Exact
        },
    );
    report.config = json!({ "n": n, "trials": trials, "inject_failure": inject_failure });
    report.passed = suite.passed();
    let enforced = suite.certificates.iter().filter(|r| r.enforced).count();
    report.quantities = vec![
        quantity(
            "certificates",
            enforced as f64,
            "enforced certificates checked",
            Provenance::Exact,
        ),
        quantity(
            "checks",
            suite.checks.len() as f64,
            "scalar checks against known values",
            Provenance::Exact,
        ),
        quantity(
            "failures",
            suite.failures() as f64,
            "failed certificates, checks and errors",
            Provenance::Exact,
        ),
        quantity(
            "worst_violation",
            suite.worst_violation(),
            "largest lhs - rhs among failures",
            Provenance::Exact,
        ),
        quantity(
            "unenforced_violations",
            suite.unenforced_violations().count() as f64,
            "violations of the literal lower C_G bound (recorded, not enforced)",
            Provenance::Exact,
        ),
    ];
    let csv = suite_csv(&suite);
    report.result = json!({ "kinds": kinds_covered(&suite), "suite": suite });
    Ok(Output { report, csv })
}

// --- markets ----------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplingArgs {
    pub samples: usize,
    pub ascent_starts: usize,
    pub ascent_steps: usize,
}

fn market_config(n: usize, volume_cap: f64, sampling: SamplingArgs, seed: u64) -> Result<SupEstimateConfig, CliError> {
    if !(1..=MAX_DEGREE).contains(&n) {
        return Err(Error::DegreeOutOfRange { n, cap: MAX_DEGREE }.into());
    }
    if !(volume_cap > 0.0 && volume_cap.is_finite()) {
        return Err(config_error(format!("volume cap M must be positive, got {volume_cap}")));
    }
    if sampling.samples == 0 {
        return Err(config_error("--samples must be positive"));
    }
    Ok(SupEstimateConfig {
        samples: sampling.samples,
        ascent_starts: sampling.ascent_starts,
        ascent_steps: sampling.ascent_steps,
        seed,
    })
}

pub fn frontrun_command(
    n: usize,
    volume_cap: f64,
    delta: f64,
    exchange: &str,
    sampling: SamplingArgs,
    seed: u64,
) -> Result<Output, CliError> {
    let config = market_config(n, volume_cap, sampling, seed)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(config_error(format!("delta must be positive, got {delta}")));
    }
    let g: ExchangeFn = parse_exchange(exchange)?;
    let f = frontrun_payoff(g.clone(), delta)?;
    let space = FrontrunSpace::new(n, volume_cap, delta)?;
    let global = global_smooth_bound(
        &f,
        f.lipschitz_constant(),
        &FrontrunMetric,
        &space,
        space.diameter_bound(),
        config,
    )?;
    let zero = space.zero_cost_point().expect("frontrun space has a zero point");
    let zero_cost = cost(&f, &zero)?.cost;
    let bound = 8.0 * g.derivative_at_zero() * volume_cap;
    let sup = global.estimate.sup_cost;

    let mut report = Report::new("frontrun", seed, Provenance::Sampled);
    report.config = json!({ "n": n, "volume_cap": volume_cap, "delta": delta, "exchange": g, "sampling": sampling });
    report.passed = global.passed() && sup <= bound && zero_cost == 0.0;
    report.quantities = vec![
        quantity(
            "sampled_cost",
            sup,
            "sampled lower estimate of C_s",
            Provenance::Sampled,
        ),
        quantity("analytic_bound", bound, "C_s <= 8 G'(0) M", Provenance::Exact),
        quantity(
            "global_bound",
            global.certificate.rhs,
            "C_s <= 2 L t + inf C",
            Provenance::Sampled,
        ),
        quantity(
            "utilization",
            sup / bound,
            "sampled_cost / analytic_bound",
            Provenance::Sampled,
        ),
        quantity(
            "zero_volume_cost",
            zero_cost,
            "C at all trader volumes zero",
            Provenance::Exact,
        ),
        quantity(
            "evaluations",
            global.estimate.evaluations as f64,
            "cost evaluations",
            Provenance::Exact,
        ),
    ];
    report.result = json!({ "global": global, "zero_volume_cost": zero_cost, "analytic_bound": bound });
    Ok(Output::from_quantities(report))
}

pub fn sandwich_command(
    n: usize,
    volume_cap: f64,
    exchange: &str,
    sampling: SamplingArgs,
    seed: u64,
) -> Result<Output, CliError> {
    let config = market_config(n, volume_cap, sampling, seed)?;
    let g = parse_exchange(exchange)?;
    let f = sandwich_payoff(g.clone())?;
    let space = SandwichSpace::new(n, volume_cap, g.clone())?;
    let global = global_smooth_bound(&f, 1.0, &SandwichMetric, &space, space.diameter_bound(), config)?;
    let estimate = estimate_sup_cost(&f, &space, config)?;
    let zero = space.zero_cost_point().expect("sandwich space has a zero point");
    let zero_cost = cost(&f, &zero)?.cost;

    // Every sampled member must pay the validator at most the trader volume.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a17);
    let (mut checked, mut over_volume, mut max_ratio) = (0usize, 0usize, 0.0f64);
    for _ in 0..config.samples {
        let z = space.sample(&mut rng);
        let value = f.evaluate(&z)?;
        let volume = trader_volume(&z);
        checked += 1;
        if value > volume + 1e-9 {
            over_volume += 1;
        }
        if volume > 0.0 {
            max_ratio = max_ratio.max(value / volume);
        }
    }

    let sup = estimate.sup_cost.max(global.estimate.sup_cost);
    let mut report = Report::new("sandwich", seed, Provenance::Sampled);
    report.config = json!({ "n": n, "volume_cap": volume_cap, "exchange": g, "sampling": sampling });
    report.passed = global.passed() && sup <= volume_cap && over_volume == 0 && zero_cost == 0.0;
    report.quantities = vec![
        quantity(
            "sampled_cost",
            sup,
            "sampled lower estimate of C_s",
            Provenance::Sampled,
        ),
        quantity("global_bound", global.certificate.rhs, "C_s <= 2M", Provenance::Sampled),
        quantity("strengthened_bound", volume_cap, "C_s <= M", Provenance::Exact),
        quantity("utilization", sup / volume_cap, "sampled_cost / M", Provenance::Sampled),
        quantity(
            "payoff_over_volume",
            over_volume as f64,
            "sampled lists with f > trader volume",
            Provenance::Sampled,
        ),
        quantity(
            "max_payoff_volume_ratio",
            max_ratio,
            "max f / trader volume over samples",
            Provenance::Sampled,
        ),
        quantity(
            "zero_volume_cost",
            zero_cost,
            "C at all trader volumes zero",
            Provenance::Exact,
        ),
    ];
    report.result = json!({
        "global": global,
        "estimate": estimate,
        "volume_check": { "checked": checked, "violations": over_volume, "max_ratio": max_ratio },
        "zero_volume_cost": zero_cost,
    });
    Ok(Output::from_quantities(report))
}

// --- fair wrapper -------------------------------------------------------------

/// Largest degree for the fair-wrapper demo (`n!` outcomes per evaluation).
pub const FAIR_DEMO_MAX_DEGREE: usize = 6;

pub fn fair_demo_command(n: usize, trials: usize, seed: u64) -> Result<Output, CliError> {
    if !(1..=FAIR_DEMO_MAX_DEGREE).contains(&n) {
        return Err(Error::DegreeOutOfRange {
            n,
            cap: FAIR_DEMO_MAX_DEGREE,
        }
        .into());
    }
    let group = enumerate_group(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut worst_fair = 0.0f64;
    for trial in 0..trials.max(1) {
        let alphabet = rng.random_range(1..=n);
        let x: Vec<usize> = (0..n).map(|_| rng.random_range(0..alphabet)).collect();
        let list = TransactionList::new(x.clone());
        let mut seen: Vec<(Vec<usize>, f64)> = Vec::new();
        let mut values = Vec::with_capacity(group.len());
        for pi in &group {
            let y = pi.apply(&x)?;
            let v = match seen.iter().find(|(z, _)| *z == y) {
                Some((_, v)) => *v,
                None => {
                    let v = rng.random_range(-1.0..1.0);
                    seen.push((y, v));
                    v
                }
            };
            values.push(v);
        }
        let f = table_payoff(values, &list)?;
        let plain = cost(&f, &x)?.cost;
        let fair = randomized_cost(&fair_wrapper(f, n)?, &x)?.cost;
        worst_fair = worst_fair.max(fair.abs());
        rows.push(json!({ "trial": trial, "x": x, "cost": plain, "fair_cost": fair }));
    }
    let mut report = Report::new("fair-demo", seed, Provenance::Exact);
    report.config = json!({ "n": n, "trials": trials.max(1) });
    report.passed = worst_fair <= 1e-12;
    report.quantities = vec![
        quantity(
            "max_fair_cost",
            worst_fair,
            "cost of the uniformly shuffled payoff",
            Provenance::Exact,
        ),
        quantity(
            "pairs",
            rows.len() as f64,
            "random (payoff, list) pairs",
            Provenance::Exact,
        ),
    ];
    report.result = json!({ "rows": rows });
    Ok(Output::from_quantities(report))
}
