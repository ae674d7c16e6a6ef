use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context as _, Result};
use permoment::aggregate::{aggregate, aggregate_brute, aggregate_fast, variance, BruteConfig};
use permoment::closedform::{
    adjacency_moment, euler_moment, expected_count, linearity_aggregate, linearity_case_for, LinearityCase,
};
use permoment::clt::{
    burstein_check, configuration_census, interpretation_mean, poisson_convergence, variance_leading,
    vincular_inequality_check, ConjectureStatus,
};
use permoment::factorial_basis::{default_offsets, fit, minimal_window};
use permoment::merge::{corollary_combination, corollary_from_census, merge_census_of, FactorialVariant};
use permoment::numbers::{factorial, format_rational, parse_rational};
use permoment::reproduce::{reproduce_paper, ReproduceOptions, RowStatus};
use permoment::{Limits, Method, Pattern, Rational, SimpleStatistic, Statistic, ValuationPoly};
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::output::{Numbers, Output, Table};

pub struct Ctx {
    pub numbers: Numbers,
    pub limits: Limits,
    pub brute: BruteConfig,
    pub threads: usize,
}

pub fn dispatch(cmd: &Command, ctx: &Ctx) -> Result<Output> {
    match cmd {
        Command::Count(a) => count(a),
        Command::Occurrences(a) => occurrences(a),
        Command::Aggregate(a) => moment(a, ctx, false),
        Command::Expect(a) => moment(a, ctx, true),
        Command::Variance(a) => variance_cmd(a, ctx),
        Command::Fit(a) => fit_cmd(a, ctx),
        Command::Census(a) => census(a, ctx),
        Command::Corollary(a) => corollary(a, ctx),
        Command::ClosedForm(a) => closed_form(a, ctx),
        Command::Clt(a) => clt(a, ctx),
        Command::Linearity(a) => linearity(a, ctx),
        Command::ReproducePaper(a) => reproduce(a, ctx),
    }
}

fn count(a: &PatternPerm) -> Result<Output> {
    let c = a.pattern.count(&a.perm);
    Ok(Output {
        json: json!({
            "pattern": a.pattern.to_string(),
            "perm": a.perm.to_string(),
            "count": c.to_string(),
        }),
        text: c.to_string(),
        table: None,
    })
}

fn occurrences(a: &PatternPerm) -> Result<Output> {
    let occ = a.pattern.occurrences(&a.perm);
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut text = String::new();
    for o in &occ {
        writeln!(text, "values {}  positions {}", join(&o.values), join(&o.positions))?;
    }
    if occ.is_empty() {
        text.push_str("no occurrences\n");
    }
    let rows = occ
        .iter()
        .map(|o| vec![join(&o.values), join(&o.positions)])
        .collect();
    Ok(Output {
        json: json!({
            "pattern": a.pattern.to_string(),
            "perm": a.perm.to_string(),
            "count": occ.len().to_string(),
            "occurrences": occ,
        }),
        text,
        table: Some(Table {
            headers: vec!["values".into(), "positions".into()],
            rows,
        }),
    })
}

/// Rows `{n, value}` with optional approximations, as JSON, text and table.
fn value_rows(ctx: &Ctx, label: impl Fn(usize) -> String, values: &[(usize, Rational)]) -> (Vec<Value>, String) {
    let mut rows = Vec::new();
    let mut text = String::new();
    for (n, v) in values {
        let mut obj = Map::new();
        obj.insert("n".into(), json!(n));
        obj.insert("value".into(), json!(format_rational(v)));
        ctx.numbers.annotate(&mut obj, "value", v);
        rows.push(Value::Object(obj));
        if values.len() == 1 {
            writeln!(text, "{}", ctx.numbers.text(v)).ok();
        } else {
            writeln!(text, "{} = {}", label(*n), ctx.numbers.text(v)).ok();
        }
    }
    (rows, text)
}

fn moment_value(stat: &Statistic, n: usize, r: u32, method: MethodArg, ctx: &Ctx) -> Result<(Rational, Method)> {
    Ok(match method {
        MethodArg::Auto => {
            let res = aggregate(stat, n, r, &ctx.brute)?;
            (res.value, res.method)
        }
        MethodArg::Brute => (aggregate_brute(stat, n, r, &ctx.brute)?.value, Method::Brute),
        MethodArg::Fast => {
            if r != 1 {
                bail!("the fast method computes first moments only; use --method brute or census for r = {r}");
            }
            (aggregate_fast(stat, n).value, Method::Fast)
        }
        MethodArg::Census => {
            let pat = stat
                .as_count()
                .ok_or_else(|| anyhow!("--method census needs a pattern count statistic (cnt:<pattern>)"))?;
            let census = merge_census_of(&vec![pat.clone(); r as usize], &ctx.limits)?;
            (
                corollary_from_census(&census, pat.len(), n, FactorialVariant::TargetLength),
                Method::ClosedForm,
            )
        }
    })
}

fn moment(a: &MomentArgs, ctx: &Ctx, expect: bool) -> Result<Output> {
    let mut values = Vec::new();
    let mut method = None;
    for &n in &a.n.0 {
        let (m, used) = moment_value(&a.stat, n, a.r, a.method, ctx)?;
        let v = if expect {
            m / Rational::from_integer(factorial(n as u64))
        } else {
            m
        };
        method.get_or_insert(used);
        values.push((n, v));
    }
    let name = if expect { "E" } else { "M" };
    let r = a.r;
    let (rows, text) = value_rows(
        ctx,
        |n| if expect { format!("E(f^{r}) at n = {n}") } else { format!("M(f^{r}, {n})") },
        &values,
    );
    let table = Table::from_objects(&rows);
    Ok(Output {
        json: json!({
            "statistic": a.stat.to_json(),
            "quantity": name,
            "r": a.r,
            "method": method.map(|m| m.to_string()),
            "results": rows,
        }),
        text,
        table: Some(table),
    })
}

fn variance_cmd(a: &VarianceArgs, ctx: &Ctx) -> Result<Output> {
    let values = a
        .n
        .0
        .iter()
        .map(|&n| Ok((n, variance(&a.stat, n, &ctx.brute)?)))
        .collect::<Result<Vec<_>>>()?;
    let (rows, text) = value_rows(ctx, |n| format!("Var at n = {n}"), &values);
    let table = Table::from_objects(&rows);
    Ok(Output {
        json: json!({ "statistic": a.stat.to_json(), "results": rows }),
        text,
        table: Some(table),
    })
}

/// `(n, value)` pairs from CSV (`n,value` with optional header) or JSON
/// (`[{"n":…,"value":"p/q"}]`).
pub fn load_data(path: &Path) -> Result<Vec<(i64, Rational)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        #[derive(serde::Deserialize)]
        struct Point {
            n: i64,
            value: Value,
        }
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Doc {
            List(Vec<Point>),
            Wrapped { data: Vec<Point> },
        }
        let doc: Doc = serde_json::from_str(trimmed).with_context(|| format!("parsing {}", path.display()))?;
        let points = match doc {
            Doc::List(p) | Doc::Wrapped { data: p } => p,
        };
        return points
            .into_iter()
            .map(|p| {
                let v = match &p.value {
                    Value::String(s) => parse_rational(s)?,
                    Value::Number(x) => parse_rational(&x.to_string())?,
                    other => bail!("n = {}: value must be a string or integer, got {other}", p.n),
                };
                Ok((p.n, v))
            })
            .collect();
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            bail!("{}: line {} needs two fields n,value", path.display(), i + 1);
        }
        let Ok(n) = rec[0].parse::<i64>() else {
            if i == 0 {
                continue;
            }
            bail!("{}: bad n {:?} on line {}", path.display(), &rec[0], i + 1);
        };
        out.push((n, parse_rational(&rec[1])?));
    }
    Ok(out)
}

fn fit_cmd(a: &FitArgs, ctx: &Ctx) -> Result<Output> {
    let window = a.stat.as_ref().map(|s| default_offsets(s, a.r));
    let (lo, hi) = match (a.offsets, window) {
        (Some(o), _) => o,
        (None, Some(w)) => (w.lo, w.hi),
        (None, None) => bail!("fitting a data file needs --offsets lo..hi"),
    };
    let data: Vec<(i64, Rational)> = match (&a.data, &a.stat) {
        (Some(path), _) => load_data(path)?,
        (None, Some(stat)) => {
            let ns: Vec<i64> = match &a.n {
                Some(list) => list.0.iter().map(|&n| n as i64).collect(),
                None => {
                    let mut w = window.expect("statistic given");
                    w.lo = lo;
                    w.hi = hi;
                    w.sample_points(a.held_out)
                }
            };
            ns.iter()
                .map(|&n| {
                    let (v, _) = moment_value(stat, n as usize, a.r, MethodArg::Auto, ctx)?;
                    Ok((n, v))
                })
                .collect::<Result<_>>()?
        }
        (None, None) => unreachable!("clap requires --stat or --data"),
    };
    let (used, fc) = if a.auto {
        minimal_window(&data, (lo, hi))
            .ok_or_else(|| anyhow!("no sub-window of offsets {lo}..{hi} fits the {} data points", data.len()))?
    } else {
        ((lo, hi), fit(&data, &(lo..=hi).collect::<Vec<_>>())?)
    };
    let formula = fc.to_string();
    let held = data.len().saturating_sub((used.1 - used.0 + 1).max(0) as usize);
    let points: Vec<Value> = data
        .iter()
        .map(|(n, v)| json!({ "n": n, "value": format_rational(v) }))
        .collect();
    let mut json = json!({
        "statistic": a.stat.as_ref().map(|s| s.to_json()),
        "r": a.r,
        "window": window,
        "offsets": { "lo": used.0, "hi": used.1 },
        "data": points,
        "heldOut": held,
        "combination": fc,
        "formula": formula,
        "verification": format!(
            "exact on {} sampled points, {held} of them held out",
            data.len()
        ),
    });
    if let (Some(w), Value::Object(m)) = (window, &mut json) {
        m.insert("theorem".into(), json!(w.source.to_string()));
    }
    let table = Table {
        headers: vec!["offset".into(), "coefficient".into()],
        rows: fc
            .coeffs()
            .iter()
            .map(|(i, c)| vec![i.to_string(), format_rational(c)])
            .collect(),
    };
    Ok(Output {
        json,
        text: formula,
        table: Some(table),
    })
}

fn census(a: &CensusArgs, ctx: &Ctx) -> Result<Output> {
    let patterns: Vec<Pattern> = match (a.pattern.len(), a.r) {
        (1, Some(r)) => vec![a.pattern[0].clone(); r],
        (1, None) => bail!("give --r with a single --pattern"),
        (_, None) => a.pattern.clone(),
        (_, Some(_)) => bail!("--r applies to a single --pattern only"),
    };
    let census = merge_census_of(&patterns, &ctx.limits)?;
    let rows = census.rows();
    let mut text = String::from("k  c  d  count\n");
    for row in &rows {
        writeln!(text, "{:<2} {:<2} {:<2} {}", row.k, row.c, row.d, row.count)?;
    }
    write!(text, "total {}", census.total())?;
    let json_rows: Vec<Value> = rows.iter().map(|r| serde_json::to_value(r).expect("row")).collect();
    let table = Table {
        headers: ["k", "c", "d", "blocks", "count"].map(String::from).to_vec(),
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    r.c.to_string(),
                    r.d.to_string(),
                    r.blocks.map(|b| b.to_string()).unwrap_or_default(),
                    r.count.to_string(),
                ]
            })
            .collect(),
    };
    Ok(Output {
        json: json!({
            "patterns": patterns.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "vincular": census.vincular,
            "total": census.total().to_string(),
            "rows": json_rows,
        }),
        text,
        table: Some(table),
    })
}

fn corollary(a: &CorollaryArgs, ctx: &Ctx) -> Result<Output> {
    let census = merge_census_of(&vec![a.pattern.clone(); a.r], &ctx.limits)?;
    let variant = if a.literal_factorial {
        FactorialVariant::PatternLength
    } else {
        FactorialVariant::TargetLength
    };
    let combination = (variant == FactorialVariant::TargetLength).then(|| corollary_combination(&census));
    let values: Vec<(usize, Rational)> = a
        .n
        .as_ref()
        .map(|l| {
            l.0.iter()
                .map(|&n| (n, corollary_from_census(&census, a.pattern.len(), n, variant)))
                .collect()
        })
        .unwrap_or_default();
    let r = a.r;
    let (rows, mut text) = value_rows(ctx, |n| format!("M(cnt^{r}, {n})"), &values);
    if let Some(fc) = &combination {
        text = if values.is_empty() { fc.to_string() } else { format!("{fc}\n{text}") };
    }
    let table = Table::from_objects(&rows);
    Ok(Output {
        json: json!({
            "pattern": a.pattern.to_string(),
            "r": a.r,
            "variant": variant,
            "combination": combination,
            "formula": combination.as_ref().map(|c| c.to_string()),
            "results": rows,
        }),
        text,
        table: Some(table),
    })
}

fn closed_form(a: &ClosedForm, ctx: &Ctx) -> Result<Output> {
    let (kind, extra, ns, f): (&str, Value, &NList, Box<dyn Fn(usize) -> Rational>) = match a {
        ClosedForm::ExpectedCount { pattern, n } => {
            let p = pattern.clone();
            ("expected-count", json!({ "pattern": pattern.to_string() }), n, Box::new(move |n| expected_count(&p, n)))
        }
        ClosedForm::Euler { r, n } => {
            let r = *r;
            ensure_positive(r)?;
            ("euler", json!({ "r": r }), n, Box::new(move |n| euler_moment(r, n)))
        }
        ClosedForm::Adjacency { r, n } => {
            let r = *r;
            ensure_positive(r)?;
            ("adjacency", json!({ "r": r }), n, Box::new(move |n| adjacency_moment(r, n)))
        }
    };
    if ns.0.contains(&0) {
        bail!("n must be positive");
    }
    let values: Vec<(usize, Rational)> = ns.0.iter().map(|&n| (n, f(n))).collect();
    let (rows, text) = value_rows(ctx, |n| format!("n = {n}"), &values);
    let table = Table::from_objects(&rows);
    let mut json = json!({ "kind": kind, "results": rows });
    if let (Value::Object(m), Value::Object(e)) = (&mut json, extra) {
        m.extend(e);
    }
    Ok(Output {
        json,
        text,
        table: Some(table),
    })
}

fn ensure_positive(r: u32) -> Result<()> {
    if r == 0 {
        bail!("r must be at least 1");
    }
    Ok(())
}

fn report<T: serde::Serialize>(value: &T, text: String) -> Result<Output> {
    Ok(Output {
        json: serde_json::to_value(value)?,
        text,
        table: None,
    })
}

fn status_text(s: ConjectureStatus) -> &'static str {
    match s {
        ConjectureStatus::Holds => "holds",
        ConjectureStatus::Fails => "fails",
        ConjectureStatus::Vacuous => "vacuous",
    }
}

fn clt(a: &Clt, ctx: &Ctx) -> Result<Output> {
    let nums = ctx.numbers;
    match a {
        Clt::Burstein { sigma } => {
            let rep = burstein_check(sigma)?;
            let text = format!("a = {}, bound = {}, holds = {}", rep.a, rep.bound, rep.holds);
            report(&rep, text)
        }
        Clt::Mean { sigma } => {
            let rep = interpretation_mean(sigma)?;
            let text = format!(
                "mean = {}, expected = {}, holds = {}",
                nums.text(&rep.mean),
                rep.expected,
                rep.holds
            );
            let mut out = report(&rep, text)?;
            out.table = Some(Table::from_objects(
                out.json["counts"].as_array().map(Vec::as_slice).unwrap_or(&[]),
            ));
            Ok(out)
        }
        Clt::Variance { pattern } => {
            let rep = variance_leading(pattern)?;
            let text = format!(
                "Var = {}\nn^{} coefficient: {}\nn^{} coefficient: {} (reference expansion gives {})",
                rep.variance,
                2 * rep.j,
                nums.text(&rep.coef_top),
                2 * rep.j - 1,
                nums.text(&rep.coef_next),
                nums.text(&rep.reference_next)
            );
            report(&rep, text)
        }
        Clt::Vincular { pattern } => {
            let rep = vincular_inequality_check(pattern)?;
            let text = format!(
                "lhs = {}, rhs = {}, holds = {}\nrhs with exact constant = {}, holds = {}",
                rep.lhs, rep.rhs, rep.holds, rep.rhs_exact, rep.holds_exact
            );
            let mut out = report(&rep, text)?;
            out.table = Some(Table::from_objects(out.json["b"].as_array().map(Vec::as_slice).unwrap_or(&[])));
            Ok(out)
        }
        Clt::Conjecture { pattern } => {
            let rep = configuration_census(pattern)?;
            let mut text = format!("{} configurations\n", rep.total_configurations);
            text.push_str("l  c_l  strict  loose  bound  strict-status  loose-status\n");
            for row in &rep.overlaps {
                writeln!(
                    text,
                    "{:<2} {:<4} {:<7} {:<6} {:<6} {:<14} {}",
                    row.l,
                    row.configurations,
                    row.strict,
                    row.loose,
                    format_rational(&row.bound),
                    status_text(row.strict_status),
                    status_text(row.loose_status)
                )?;
            }
            let mut out = report(&rep, text)?;
            out.table = Some(Table::from_objects(
                out.json["overlaps"].as_array().map(Vec::as_slice).unwrap_or(&[]),
            ));
            Ok(out)
        }
        Clt::Poisson { r, n, tolerance } => {
            let mut reports = Vec::new();
            let mut text = String::new();
            let mut rows = Vec::new();
            for &ri in &r.0 {
                let rep = poisson_convergence(ri as u32, &n.0, *tolerance)?;
                writeln!(text, "r = {ri}, B_r = {}", rep.bell)?;
                for row in &rep.rows {
                    writeln!(text, "  n = {:<6} gap = {} (approx. {:.3e})", row.n, row.gap, row.gap_approx)?;
                    rows.push(vec![
                        ri.to_string(),
                        row.n.to_string(),
                        format_rational(&row.moment),
                        format_rational(&row.gap),
                        format!("{:e}", row.gap_approx),
                    ]);
                }
                writeln!(
                    text,
                    "  nonincreasing = {}, below {} = {}",
                    rep.nonincreasing, rep.tolerance, rep.below_tolerance
                )?;
                reports.push(rep);
            }
            Ok(Output {
                json: json!({ "reports": reports }),
                text,
                table: Some(Table {
                    headers: ["r", "n", "moment", "gap", "gapApprox"].map(String::from).to_vec(),
                    rows,
                }),
            })
        }
    }
}

fn linearity(a: &LinearityArgs, ctx: &Ctx) -> Result<Output> {
    let k = a.pattern.len();
    let q1 = ValuationPoly::parse(&a.q1, k)?;
    let q2 = ValuationPoly::parse(&a.q2, k)?;
    let simple = SimpleStatistic::new(a.pattern.clone(), q1, q2)?;
    let (inferred, coef_a, coef_b) = linearity_case_for(&simple)?;
    let case = match a.case {
        Some(i) => LinearityCase::from_index(i)?,
        None => inferred,
    };
    let values = a
        .n
        .0
        .iter()
        .map(|&n| Ok((n, linearity_aggregate(case, &a.pattern, &coef_a, &coef_b, n)?)))
        .collect::<Result<Vec<_>>>()?;
    let (rows, text) = value_rows(ctx, |n| format!("n = {n}"), &values);
    let table = Table::from_objects(&rows);
    let list = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>();
    Ok(Output {
        json: json!({
            "case": case as u8,
            "pattern": a.pattern.to_string(),
            "a": list(&coef_a),
            "b": list(&coef_b),
            "results": rows,
        }),
        text,
        table: Some(table),
    })
}

fn reproduce(a: &ReproduceArgs, ctx: &Ctx) -> Result<Output> {
    let opts = ReproduceOptions {
        max_n: ctx.limits.max_n,
        factorial: if a.literal_factorial {
            FactorialVariant::PatternLength
        } else {
            FactorialVariant::TargetLength
        },
        threads: ctx.threads,
    };
    let rep = reproduce_paper(&opts);
    let mut text = String::new();
    for row in &rep.rows {
        let tag = match row.status {
            RowStatus::Pass => "PASS",
            RowStatus::Fail => "FAIL",
            RowStatus::Skip => "SKIP",
        };
        writeln!(text, "{tag} {:<28} {}", row.id, row.description)?;
        if row.status == RowStatus::Fail {
            writeln!(text, "     expected {}", row.expected)?;
            writeln!(text, "     computed {}", row.computed)?;
        }
        if let Some(note) = &row.note {
            writeln!(text, "     note: {note}")?;
        }
    }
    write!(text, "{} passed, {} failed, {} skipped", rep.passed, rep.failed, rep.skipped)?;
    let table = Table {
        headers: ["id", "status", "expected", "computed", "note"].map(String::from).to_vec(),
        rows: rep
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.id.clone(),
                    serde_json::to_value(r.status).expect("status").as_str().unwrap_or_default().to_string(),
                    r.expected.clone(),
                    r.computed.clone(),
                    r.note.clone().unwrap_or_default(),
                ]
            })
            .collect(),
    };
    Ok(Output {
        json: serde_json::to_value(&rep)?,
        text,
        table: Some(table),
    })
}
