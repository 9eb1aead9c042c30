//! Subcommand runners.

use eslab_core::circle::{find_representations, major_arc_main_term, rho_exact, WaringInstance};
use eslab_core::diophantine::nit::taylor_phase_of_nit;
use eslab_core::diophantine::{
    best_rational, classify_arc, nit_approximation, simultaneous_q_search, ArcKind, NitOptions,
};
use eslab_core::expsums::heath_brown::heath_brown_decompose_with;
use eslab_core::expsums::{
    lambda_mobius_exp_sums, ComponentKind, HbOptions, Summation, Target,
};
use eslab_core::sieve::chebyshev_psi_delta;
use eslab_core::vinogradov::count_j;
use eslab_core::{Angle, ArithmeticTable, PolynomialPhase, Window};
use rayon::prelude::*;

use crate::cache::{load_or_sieve, CacheStatus};
use crate::config::{Command, RunConfig, Weight, WindowArgs};
use crate::error::{CliError, CliResult};
use crate::report::{format_float, Report, Value};

/// Largest scan grid.
pub const MAX_GRID: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    Report(Report),
    Json(String),
}

fn angle(s: &str) -> CliResult<Angle> {
    Angle::parse(s).map_err(|e| CliError::Usage(format!("bad angle '{s}': {e}")))
}

fn table_for(config: &RunConfig, window: Window) -> CliResult<ArithmeticTable> {
    let (table, status) = load_or_sieve(window, config.cache.as_deref())?;
    if status != CacheStatus::Disabled {
        eprintln!("cache: {status:?} for ({}, {}]", window.start(), window.end());
    }
    Ok(table)
}

/// Runs the configured subcommand on a pool of `config.threads` workers.
pub fn execute(config: &RunConfig) -> CliResult<Output> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| match &config.command {
        Command::Sieve { window, per_n } => run_sieve(config, window, *per_n),
        Command::Expsum { window, k, alpha } => run_expsum(config, window, *k, alpha),
        Command::Scan { .. } => run_scan(config).map(Output::Report),
        Command::HbVerify {
            window,
            target,
            alpha,
            k,
            budget,
        } => run_hb(config, window, *target, alpha, *k, *budget),
        Command::Waring {
            k,
            s,
            n,
            theta,
            qmax,
            limit,
        } => run_waring(*k, *s, *n, *theta, *qmax, *limit),
        Command::Vmvt { t, k, h } => run_vmvt(*t, *k, h),
        Command::Nit {
            window,
            k,
            t0,
            q,
            b,
        } => run_nit(window, *k, *t0, *q, *b),
    })
}

fn run_sieve(config: &RunConfig, args: &WindowArgs, per_n: bool) -> CliResult<Output> {
    let window = args.window()?;
    let table = table_for(config, window)?;
    if per_n {
        let mut r = Report::new(&["n", "lambda", "mu", "factorization"]);
        for (i, n) in window.iter().enumerate() {
            let fact: Vec<String> = table
                .factorization(i)
                .map(|(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
                .collect();
            r.push(vec![
                n.into(),
                table.lambda()[i].into(),
                (table.mu()[i] as i64).into(),
                fact.join("*").into(),
            ]);
        }
        return Ok(Output::Report(r));
    }
    let mut r = Report::new(&["N", "H", "psi_delta", "primes", "mu_sum"]);
    let mu_sum: i64 = table.mu().iter().map(|&m| m as i64).sum();
    r.push(vec![
        window.start().into(),
        window.len().into(),
        chebyshev_psi_delta(&table).into(),
        table.primes().count().into(),
        mu_sum.into(),
    ]);
    Ok(Output::Report(r))
}

fn run_expsum(config: &RunConfig, args: &WindowArgs, k: usize, alpha: &str) -> CliResult<Output> {
    let window = args.window()?;
    let a = angle(alpha)?;
    let table = table_for(config, window)?;
    let phase = PolynomialPhase::monomial(a, k)?;
    let (lam, mu) = lambda_mobius_exp_sums(&table, &phase, Summation::Compensated)?;
    let mut r = Report::new(&["op", "N", "H", "k", "alpha", "re", "im", "normalized", "terms"]);
    for (op, res) in [("lambda", lam), ("mobius", mu)] {
        r.push(vec![
            op.into(),
            window.start().into(),
            window.len().into(),
            k.into(),
            alpha.into(),
            res.value.re.into(),
            res.value.im.into(),
            res.normalized.into(),
            res.terms.into(),
        ]);
    }
    Ok(Output::Report(r))
}

/// Farey fractions `a/q ∈ [0, 1]` with `q <= order`, ascending.
pub fn farey(order: u64) -> Vec<(u64, u64)> {
    let mut out = vec![(0, 1)];
    if order == 0 {
        return out;
    }
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, order);
    while c <= order {
        let m = (order + b) / d;
        (a, b, c, d) = (c, d, m * c - a, m * d - b);
        out.push((a, b));
    }
    out
}

/// Scan grid: for each coefficient `α_j = a/q + c/H^j` with `a/q` Farey and
/// `c` a perturbation (perturbation-major), and the product over `j`.
pub fn run_scan(config: &RunConfig) -> CliResult<Report> {
    let Command::Scan {
        window: args,
        k,
        farey: order,
        perturb,
        qmax,
        arc_q,
    } = &config.command
    else {
        return Err(CliError::Usage("not a scan configuration".into()));
    };
    let (k, qmax) = (*k, *qmax);
    if k == 0 || k > 3 {
        return Err(CliError::Usage("scan supports 1 <= k <= 3".into()));
    }
    let window = args.window()?;
    let (n, h) = (window.start(), window.len());
    if n < 3 || h == 0 {
        return Err(CliError::Usage("scan needs N >= 3 and H >= 1".into()));
    }
    let fractions = farey(*order);
    let offsets: &[f64] = if perturb.0.is_empty() { &[0.0] } else { &perturb.0 };
    let axis: Vec<(u64, u64, f64)> = offsets
        .iter()
        .flat_map(|&c| fractions.iter().map(move |&(a, q)| (a, q, c)))
        .collect();
    let points = (axis.len() as u64).checked_pow(k as u32).unwrap_or(u64::MAX);
    if points > MAX_GRID {
        return Err(eslab_core::Error::Budget {
            what: "scan grid points".into(),
            needed: points as u128,
            limit: MAX_GRID as u128,
            hint: "lower --farey, the perturbation count or k".into(),
        }
        .into());
    }
    let table = table_for(config, window)?;
    let log_n = (n as f64).ln();
    let threshold = log_n.powi(-2);
    let bound = log_n.powi(10);
    let arc_q = arc_q.unwrap_or(log_n * log_n);

    let mut columns: Vec<String> = Vec::new();
    for j in 1..=k {
        columns.extend([format!("a_{j}"), format!("q_{j}"), format!("c_{j}")]);
    }
    columns.extend(
        [
            "lambda_norm",
            "mu_norm",
            "lambda_re",
            "lambda_im",
            "best_a",
            "best_q",
            "best_err",
            "sim_q",
            "sim_quality",
            "arc",
            "significant",
            "violation",
        ]
        .map(String::from),
    );

    let row = |index: u64| -> CliResult<Vec<Value>> {
        let mut digits = vec![0usize; k];
        let mut rest = index;
        for d in digits.iter_mut().rev() {
            *d = (rest % axis.len() as u64) as usize;
            rest /= axis.len() as u64;
        }
        let mut values: Vec<Value> = Vec::with_capacity(columns.len());
        let mut coeffs = Vec::with_capacity(k);
        for (j, &d) in digits.iter().enumerate() {
            let (a, q, c) = axis[d];
            let shift = c / (h as f64).powi(j as i32 + 1);
            coeffs.push(Angle::from_ratio(a as i128, q as u128)? + Angle::from_f64(shift));
            values.extend([a.into(), q.into(), c.into()]);
        }
        let lead = coeffs[k - 1];
        let phase = PolynomialPhase::new(n as i128, coeffs)?;
        let (lam, mu) = lambda_mobius_exp_sums(&table, &phase, Summation::Compensated)?;
        let best = best_rational(lead, qmax)?;
        let sim = simultaneous_q_search(&phase, h, qmax)?
            .ok_or_else(|| CliError::Usage("--qmax must be positive".into()))?;
        let arc = match classify_arc(lead, k, h, h, arc_q)?.kind {
            ArcKind::Major { a, q } => format!("major({a},{q})"),
            ArcKind::Minor => "minor".into(),
        };
        let significant = lam.normalized >= threshold;
        let violation = significant && !(sim.quality <= bound && sim.q <= qmax);
        values.extend([
            lam.normalized.into(),
            mu.normalized.into(),
            lam.value.re.into(),
            lam.value.im.into(),
            best.a.into(),
            best.q.into(),
            best.err.into(),
            sim.q.into(),
            sim.quality.into(),
            arc.into(),
            significant.into(),
            violation.into(),
        ]);
        Ok(values)
    };

    let results: Vec<CliResult<Vec<Value>>> = (0..points).into_par_iter().map(row).collect();
    let mut report = Report {
        columns,
        rows: Vec::with_capacity(results.len()),
        error: None,
    };
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(values) => report.rows.push(values),
            Err(e) => {
                report.error = Some(format!("grid point {i}: {e}"));
                break;
            }
        }
        if i % 10_000 == 9_999 {
            eprintln!("scan: {} of {points} rows assembled", i + 1);
        }
    }
    let violations = report
        .rows
        .iter()
        .filter(|r| r.last() == Some(&Value::Bool(true)))
        .count();
    eprintln!("scan: {} rows, {violations} violations", report.rows.len());
    Ok(report)
}

fn run_hb(
    config: &RunConfig,
    args: &WindowArgs,
    target: Weight,
    alpha: &str,
    k: usize,
    budget: u64,
) -> CliResult<Output> {
    let window = args.window()?;
    let table = table_for(config, window)?;
    let phase = PolynomialPhase::monomial(angle(alpha)?, k)?;
    let target = match target {
        Weight::Lambda => Target::Lambda,
        Weight::Mobius => Target::Mobius,
    };
    let options = HbOptions {
        budget,
        summation: Summation::Compensated,
    };
    let d = heath_brown_decompose_with(&table, &phase, target, options)?;
    let (lam, mu) = lambda_mobius_exp_sums(&table, &phase, Summation::Compensated)?;
    let direct = if target == Target::Lambda { lam.value } else { mu.value };
    eprintln!(
        "hb-verify: identity holds on {} integers, z = {}, {} tuples; total {} {}i, direct {} {}i",
        d.checked,
        d.z,
        d.tuples,
        format_float(d.total.re),
        format_float(d.total.im),
        format_float(direct.re),
        format_float(direct.im)
    );
    let mut r = Report::new(&["j", "exponents", "kind", "re", "im", "weight_sum", "tuples"]);
    for c in &d.components {
        let exps: Vec<String> = c.exponents.iter().map(u8::to_string).collect();
        let kind = match c.kind {
            ComponentKind::TypeI => "I",
            ComponentKind::TypeII => "II",
        };
        r.push(vec![
            (c.j as u64).into(),
            exps.join(".").into(),
            kind.into(),
            c.value.re.into(),
            c.value.im.into(),
            c.weight_sum.into(),
            c.tuples.into(),
        ]);
    }
    r.push(vec![
        0u64.into(),
        "".into(),
        "total".into(),
        d.total.re.into(),
        d.total.im.into(),
        direct.re.into(),
        d.tuples.into(),
    ]);
    Ok(Output::Report(r))
}

fn run_waring(k: u32, s: u32, n: u64, theta: f64, qmax: u64, limit: usize) -> CliResult<Output> {
    let inst = WaringInstance::new(k, s, n, theta)?;
    let rho = rho_exact(&inst)?;
    let main = major_arc_main_term(&inst, qmax)?;
    let reps = find_representations(&inst, limit)?;
    let f = |x: f64| Value::Float(x).json();
    let tuples: Vec<String> = reps
        .tuples
        .iter()
        .map(|t| format!("[{}]", t.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")))
        .collect();
    let fields = [
        ("k", k.to_string()),
        ("s", s.to_string()),
        ("N", n.to_string()),
        ("theta", f(theta)),
        ("X", inst.x.to_string()),
        ("H", inst.h.to_string()),
        ("rho", f(rho.weighted)),
        ("rho_prime_tuples", rho.prime_tuples.to_string()),
        ("main_term", f(main.value)),
        ("series", f(main.series.value)),
        ("series_imag", f(main.series.imag)),
        ("series_tail", f(main.series.tail)),
        ("series_low", main.series.low.to_string()),
        ("integral", f(main.integral.value)),
        ("integral_scale", f(main.integral.scale)),
        ("R", reps.r.to_string()),
        ("N_mod_R", reps.n_mod_r.to_string()),
        ("s_mod_R", reps.s_mod_r.to_string()),
        ("admissible", reps.admissible().to_string()),
        ("truncated", reps.truncated.to_string()),
        ("reps", format!("[{}]", tuples.join(", "))),
    ];
    let body: Vec<String> = fields.iter().map(|(key, v)| format!("  \"{key}\": {v}")).collect();
    if main.series.low {
        eprintln!("waring: truncated singular series below 0.1; positivity not established");
    }
    Ok(Output::Json(format!("{{\n{}\n}}\n", body.join(",\n"))))
}

fn run_vmvt(t: u32, k: u32, hs: &[u64]) -> CliResult<Output> {
    let mut r = Report::new(&["t", "k", "H", "J", "normalized"]);
    for &h in hs {
        let c = count_j(t, k, h)?;
        r.push(vec![
            (t as u64).into(),
            (k as u64).into(),
            h.into(),
            c.count.to_string().into(),
            c.normalized.into(),
        ]);
    }
    Ok(Output::Report(r))
}

fn run_nit(args: &WindowArgs, k: usize, t0: f64, q: u64, b: Option<f64>) -> CliResult<Output> {
    let window = args.window()?;
    let phase = taylor_phase_of_nit(t0, k, window.start())?;
    let mut options = NitOptions::for_degree(k);
    if let Some(b) = b {
        options = options.with_b(b);
    }
    let m = nit_approximation(&phase, window, q, options)?;
    let rel = if t0 == 0.0 { m.t.abs() } else { (m.t - t0).abs() / t0.abs() };
    let mut r = Report::new(&[
        "t0",
        "t",
        "rel_err",
        "max_dev",
        "target_dev",
        "n0",
        "h0",
        "modulus",
        "structure_quality",
        "t_scale",
    ]);
    r.push(vec![
        t0.into(),
        m.t.into(),
        rel.into(),
        m.max_dev.into(),
        m.target_dev.into(),
        m.n0.into(),
        m.h0.into(),
        m.modulus.into(),
        m.structure_quality.into(),
        m.t_scale.into(),
    ]);
    Ok(Output::Report(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn euler_phi_sum(order: u64) -> usize {
        (1..=order)
            .map(|q| (1..=q).filter(|&a| gcd(a, q) == 1).count())
            .sum()
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }

    #[test]
    fn farey_counts() {
        assert_eq!(farey(1), vec![(0, 1), (1, 1)]);
        assert_eq!(farey(5).len(), 11);
        for order in 1..=20 {
            let f = farey(order);
            assert_eq!(f.len(), 1 + euler_phi_sum(order));
            assert!(f.windows(2).all(|w| w[0].0 * w[1].1 < w[1].0 * w[0].1));
        }
    }

    #[test]
    fn scan_row_counts() {
        let c = parse_config(["scan", "--N", "1000000", "--theta", "0.7", "--farey", "5"]).unwrap();
        assert_eq!(run_scan(&c).unwrap().rows.len(), 33);
        let c = parse_config([
            "scan", "--N", "1000000", "--theta", "0.7", "--farey", "5", "--perturb", "",
        ])
        .unwrap();
        let r = run_scan(&c).unwrap();
        assert_eq!(r.rows.len(), 11);
        assert!(r.rows.iter().all(|row| row[2] == Value::Float(0.0)));
    }

    #[test]
    fn scan_third_row() {
        let c = parse_config(["scan", "--N", "1000000", "--theta", "0.7", "--farey", "3", "--perturb", "0"])
            .unwrap();
        let r = run_scan(&c).unwrap();
        let col = |name: &str| r.columns.iter().position(|c| c == name).unwrap();
        let row = r
            .rows
            .iter()
            .find(|row| row[0] == Value::Int(1) && row[1] == Value::Int(3))
            .unwrap();
        let Value::Float(norm) = row[col("lambda_norm")] else { panic!() };
        assert!((norm - 0.5).abs() < 0.05, "{norm}");
        assert_eq!(row[col("arc")], Value::Text("major(1,3)".into()));
    }

    #[test]
    fn waring_json() {
        let c = parse_config(["waring", "--k", "2", "--s", "5", "--N", "51005", "--theta", "0.9", "--limit", "3"])
            .unwrap();
        let Output::Json(text) = execute(&c).unwrap() else { panic!() };
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["rho", "main_term", "series", "integral", "reps"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["reps"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn waring_example_instance_is_feasible() {
        let c = parse_config(["waring", "--k", "2", "--s", "5", "--N", "5000000", "--theta", "0.8"]).unwrap();
        let Command::Waring { k, s, n, theta, .. } = c.command else { panic!() };
        assert!(WaringInstance::new(k, s, n, theta).unwrap().is_feasible());
    }
}
