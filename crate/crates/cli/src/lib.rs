//! The `fraclab` command-line runner.
//!
//! Exit codes: 0 success, 1 a failed verdict or an undefined quotient,
//! 2 usage, configuration or I/O errors.

pub mod args;
pub mod config;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use fraclab::experiments::{
    cusp_divergence_study, mushroom_scaling_study, random_smooth_fields, sweep_to_writer, threshold_bisection,
    verify_prop21, ExperimentReport, Study,
};
use fraclab::functionals::{frac_seminorm_full, frac_seminorm_restricted, inf_lq_norm, poincare_quotient};
use fraclab::geometry::Domain;
use fraclab::thresholds::{
    beta_john_b_sup, beta_john_p1_b_max, cusp_nu_window, holder_b_max, holder_b_sharp, john_b_max, john_p1_b_max,
    mushroom_q_max, mushroom_scaling_exponents, parse_ratio, ThresholdReport,
};
use fraclab::{Error, Result};

use args::{Cli, Command};
use config::{Format, RunConfig, StudyKind, ThresholdArgs};

/// What a command produced, before formatting.
enum Output {
    /// A flat or nested record; `ok` decides the exit code.
    Record { value: Value, ok: bool },
    Report(ExperimentReport),
    /// Already-formatted text (the sweep CSV).
    Text(String),
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let format = cfg.format.unwrap_or(match cli.command {
        Command::Sweep(_) => Format::Csv,
        _ => Format::Json,
    });
    let result = execute(&cli.command, &cfg).and_then(|out| {
        let (text, ok) = render(out, format)?;
        write_output(&cfg, &text)?;
        Ok(ok)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Error::UndefinedQuotient) => {
            eprintln!("undefined quotient: the seminorm of the field vanishes (is it constant?)");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.samples {
        cfg.samples = v;
    }
    if let Some(v) = &cli.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = cli.format {
        cfg.format = Some(v);
    }
    match &cli.command {
        Command::Quotient(p) | Command::Norm(p) | Command::Seminorm { problem: p, .. } => p.apply(&mut cfg),
        Command::Thresholds(t) => t.apply(&mut cfg),
        Command::VerifyProp21 { domain, params, fields } => {
            domain.apply(&mut cfg.domain);
            params.apply(&mut cfg.params);
            if let Some(k) = fields {
                cfg.prop21.fields = *k;
            }
        }
        Command::MushroomScaling(m) => m.apply(&mut cfg),
        Command::CuspDivergence(c) => c.apply(&mut cfg),
        Command::Bisect(b) => b.apply(&mut cfg),
        Command::Sweep(s) => s.apply(&mut cfg),
    }
    Ok(cfg)
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<Output> {
    let mc = cfg.mc();
    let problem = || -> Result<(Domain, fraclab::fields::Field)> {
        let domain = Domain::new(cfg.domain.clone())?;
        let field = cfg.field.resolve(&domain)?;
        Ok((domain, field))
    };
    let header = || json!({ "domain": cfg.domain, "field": cfg.field, "params": cfg.params, "mc": mc });
    Ok(match command {
        Command::Quotient(_) => {
            let (domain, field) = problem()?;
            let q = poincare_quotient(&field, &domain, &cfg.params, &mc)?;
            let ok = !q.value.flags.divergent;
            Output::Record {
                value: with(header(), "quotient", &q),
                ok,
            }
        }
        Command::Seminorm { full, .. } => {
            let (domain, field) = problem()?;
            let est = if *full {
                frac_seminorm_full(&field, &domain, cfg.params.s, cfg.params.p, &mc)?
            } else {
                frac_seminorm_restricted(&field, &domain, &cfg.params, &mc)?
            };
            let mut value = with(header(), "seminorm", &est);
            value["full"] = json!(full);
            Output::Record { value, ok: true }
        }
        Command::Norm(_) => {
            let (domain, field) = problem()?;
            let norm = inf_lq_norm(&field, &domain, cfg.params.q, cfg.params.a, &mc)?;
            Output::Record {
                value: with(header(), "norm", &norm),
                ok: true,
            }
        }
        Command::Thresholds(t) => Output::Record {
            value: thresholds(&cfg.thresholds, t.exact)?,
            ok: true,
        },
        Command::VerifyProp21 { .. } => {
            let domain = Domain::new(cfg.domain.clone())?;
            let fields = random_smooth_fields(&domain, cfg.prop21.fields, cfg.seed);
            Output::Report(verify_prop21(
                &domain,
                &fields,
                cfg.params.s,
                cfg.params.p,
                &mc,
                &cfg.tolerances,
            )?)
        }
        Command::MushroomScaling(_) => Output::Report(mushroom_scaling_study(
            &cfg.mushroom.setup,
            &cfg.mushroom.q_list,
            &mc,
            &cfg.tolerances,
        )?),
        Command::CuspDivergence(_) => Output::Report(cusp_divergence_study(&cfg.cusp, &mc, &cfg.tolerances)?),
        Command::Bisect(_) => {
            let study = match cfg.bisect.study {
                StudyKind::MushroomQ => Study::MushroomQ {
                    setup: cfg.mushroom.setup.clone(),
                },
                StudyKind::CuspB => Study::CuspB {
                    setup: cfg.cusp.clone(),
                    nu_grid: cfg.bisect.nu_grid.clone(),
                },
            };
            let bracket = cfg.bisect.bracket.unwrap_or_else(|| study.default_bracket());
            Output::Report(threshold_bisection(&study, bracket, &mc, cfg.bisect.tol, &cfg.tolerances)?)
        }
        Command::Sweep(_) => {
            let mut buf = Vec::new();
            sweep_to_writer(&cfg.sweep, &mc, &mut buf)?;
            Output::Text(String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))?)
        }
    })
}

fn with(mut header: Value, key: &str, value: impl Serialize) -> Value {
    header[key] = serde_json::to_value(value).unwrap_or(Value::Null);
    header
}

/// Canonical operation name for a theorem number or alias.
fn theorem_name(theorem: &str) -> Result<&'static str> {
    Ok(match theorem {
        "3.3" | "john_b_max" => "john_b_max",
        "3.5" | "john_p1_b_max" => "john_p1_b_max",
        "4.2" | "beta_john_b_sup" => "beta_john_b_sup",
        "4.3" | "beta_john_p1_b_max" => "beta_john_p1_b_max",
        "4.4" | "mushroom_q_max" => "mushroom_q_max",
        "5.1" | "holder_b_max" => "holder_b_max",
        "5.2" | "holder_b_sharp" => "holder_b_sharp",
        "window" | "cusp_nu_window" => "cusp_nu_window",
        "exponents" | "mushroom_scaling_exponents" => "mushroom_scaling_exponents",
        other => return Err(Error::Config(format!("unknown theorem {other:?}"))),
    })
}

/// Evaluates in exact rationals; floats are rounded from the exact value.
fn thresholds(t: &ThresholdArgs, exact: bool) -> Result<Value> {
    let name = theorem_name(&t.theorem)?;
    let num = |label: &str, text: &str| {
        parse_ratio(text).map_err(|e| Error::Config(format!("--{label}: {e}")))
    };
    let (p, q, a, s, b) = (num("p", &t.p)?, num("q", &t.q)?, num("a", &t.a)?, num("s", &t.s)?, num("b", &t.b)?);
    let (beta, alpha) = (num("beta", &t.beta)?, num("alpha", &t.alpha)?);
    let n = t.n;
    let pair = |x: &num_rational::BigRational| -> Value {
        if exact {
            json!({ "value": x.to_f64(), "exact": x.to_string() })
        } else {
            json!(x.to_f64())
        }
    };
    let report = |r: ThresholdReport<num_rational::BigRational>| -> Value {
        json!({
            "theorem": r.theorem,
            "quantity": r.quantity,
            "value": r.value.as_ref().map(&pair),
            "strict": r.strict,
            "side_conditions": r.side_conditions,
            "side_conditions_hold": r.side_conditions_hold(),
        })
    };
    let mut value = match name {
        "john_b_max" => report(john_b_max(n, p, q, a, s)?),
        "john_p1_b_max" => report(john_p1_b_max(n, q, a, s)?),
        "beta_john_b_sup" => report(beta_john_b_sup(n, p, q, a, s, beta)?),
        "beta_john_p1_b_max" => report(beta_john_p1_b_max(n, q, a, s, beta)?),
        "mushroom_q_max" => report(mushroom_q_max(n, a, p, b, s, beta)?),
        "holder_b_max" => report(holder_b_max(n, p, q, alpha, s)?),
        "holder_b_sharp" => report(holder_b_sharp(n, p, q, alpha, s)?),
        "cusp_nu_window" => {
            let w = cusp_nu_window(n, alpha, p, q, s, b)?;
            json!({
                "quantity": "nu_window",
                "window": w.map(|w| json!({ "lower": pair(&w.lower), "upper": pair(&w.upper) })),
            })
        }
        _ => {
            let e = mushroom_scaling_exponents(n, p, q, s, beta, a, b)?;
            json!({
                "quantity": "scaling_exponents",
                "lhs": pair(&e.lhs),
                "rhs": pair(&e.rhs),
                "junction": pair(&e.junction),
                "quotient": pair(&e.quotient()),
            })
        }
    };
    value["operation"] = json!(name);
    value["inputs"] = serde_json::to_value(t)?;
    Ok(value)
}

fn render(out: Output, format: Format) -> Result<(String, bool)> {
    match out {
        Output::Text(text) => Ok((text, true)),
        Output::Record { value, ok } => Ok((format_value(&value, format)?, ok)),
        Output::Report(report) => {
            eprint!("{}", report.summary());
            let ok = report.passed();
            let text = match format {
                Format::Json => json_text(&report)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for v in &report.verdicts {
                        w.serialize(v)?;
                    }
                    csv_text(w)?
                }
            };
            Ok((text, ok))
        }
    }
}

fn json_text(value: &impl Serialize) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

/// CSV of a record: one `key,value` row per leaf, keys joined with dots.
fn format_value(value: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => json_text(value),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", value, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            csv_text(w)
        }
    }
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn write_output(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_aliases() {
        assert_eq!(theorem_name("4.4").unwrap(), "mushroom_q_max");
        assert_eq!(theorem_name("holder_b_sharp").unwrap(), "holder_b_sharp");
        assert!(theorem_name("9.9").is_err());
    }

    #[test]
    fn exact_mushroom_threshold() {
        let t = ThresholdArgs {
            theorem: "4.4".into(),
            beta: "2".into(),
            ..ThresholdArgs::default()
        };
        let v = thresholds(&t, true).unwrap();
        assert_eq!(v["value"]["exact"], "4/3");
    }

    #[test]
    fn csv_flattening() {
        let text = format_value(&json!({ "a": { "b": 1, "c": [true, null] }, "d": "x" }), Format::Csv).unwrap();
        assert_eq!(text, "key,value\na.b,1\na.c.0,true\na.c.1,\nd,x\n");
    }
}
