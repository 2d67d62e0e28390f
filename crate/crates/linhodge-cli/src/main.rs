use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use linhodge::diffop::named::by_name;
use linhodge::exec::Mode;
use linhodge::qring::{build_gen_function, GenKind, GradedPoly, Mono};
use linhodge::series::named::{named_coeffs, named_series, CoeffKind};
use linhodge::tables::{self, Row};
use linhodge::verify::{self, CheckReport, Config, Ctx, Status};
use linhodge::Error;

#[derive(Parser)]
#[command(name = "linhodge", version, about = "Exact linear Hodge integrals and their Virasoro-type constraints")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Weight cap for rings, tables and generating functions.
    #[arg(long, global = true, default_value_t = 12)]
    cap: i64,

    /// Truncation order for series.
    #[arg(long, global = true, default_value_t = 30)]
    order: i64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,

    /// Same as --format json.
    #[arg(long, global = true)]
    json: bool,

    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Worker threads; 1 runs everything on the main thread.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Source {
    W,
    Recursion,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// A named series: h, eta, f, v, g, G<m>, p<m>.
    Series { name: String },
    /// A coefficient family: b, C, a, a_neg, nu<m>, gamma<m>.
    Coeffs { family: String },
    /// A generating function: FKt, FKq, FHt, FHq.
    Genfun { name: String },
    /// The materialised terms of a named operator.
    Op {
        name: String,
        /// Index parameter of the operator family.
        #[arg(long, alias = "params", allow_hyphen_values = true)]
        m: Option<i64>,
    },
    /// Linear Hodge integrals <lambda_j tau_d1 ... tau_dn>_g.
    Hodge {
        /// Largest genus; with --nmax this replaces --cap.
        #[arg(long, requires = "nmax")]
        gmax: Option<u32>,
        /// Largest number of insertions.
        #[arg(long, requires = "gmax")]
        nmax: Option<u32>,
        #[arg(long, value_enum, default_value_t = Source::W)]
        provenance: Source,
    },
    /// Witten intersection numbers <tau_d1 ... tau_dn>_g.
    Witten,
    /// The Hurwitz series H = log(e^(beta M_0) e^(q_1)).
    Hurwitz {
        /// Order in beta.
        #[arg(long, default_value_t = 4)]
        beta: i64,
    },
    /// Run verification checks (all when none are named).
    Verify {
        checks: Vec<String>,
        /// List the available checks and exit.
        #[arg(long)]
        list: bool,
    },
}

/// Failure with its exit status.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Domain(_) => Fail(2, e.to_string()),
            _ => Fail(1, e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok((text, ok)) => {
            let written = match &cli.out {
                Some(p) => fs::write(p, &text).map_err(|e| format!("cannot write {}: {e}", p.display())),
                None => io::stdout().lock().write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("linhodge: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(Fail(code, msg)) => {
            eprintln!("linhodge {}: {msg}", cmd_name(&cli.cmd));
            ExitCode::from(code)
        }
    }
}

fn cmd_name(c: &Cmd) -> &'static str {
    match c {
        Cmd::Series { .. } => "series",
        Cmd::Coeffs { .. } => "coeffs",
        Cmd::Genfun { .. } => "genfun",
        Cmd::Op { .. } => "op",
        Cmd::Hodge { .. } => "hodge",
        Cmd::Witten => "witten",
        Cmd::Hurwitz { .. } => "hurwitz",
        Cmd::Verify { .. } => "verify",
    }
}

fn mode(cli: &Cli) -> Result<Mode, Fail> {
    match cli.jobs {
        Some(0) => Err(usage("--jobs must be at least 1")),
        Some(1) => Ok(Mode::Sequential),
        Some(_n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new().num_threads(_n).build_global().map_err(|e| Fail(1, e.to_string()))?;
            Ok(Mode::Parallel)
        }
        None => Ok(Mode::Parallel),
    }
}

fn need_cap(cap: i64) -> Result<(), Fail> {
    if cap < 3 {
        return Err(usage(format!("--cap must be at least 3, got {cap}")));
    }
    Ok(())
}

fn need_order(order: i64) -> Result<(), Fail> {
    if order < 0 {
        return Err(usage(format!("--order must be non-negative, got {order}")));
    }
    Ok(())
}

/// Output text and whether everything passed.
fn run(cli: &Cli) -> Result<(String, bool), Fail> {
    let fmt = if cli.json { Format::Json } else { cli.format };
    let mode = mode(cli)?;
    let text = match &cli.cmd {
        Cmd::Series { name } => {
            need_order(cli.order)?;
            let s = named_series(name, cli.order)?;
            match fmt {
                Format::Human => format!("{s}\n"),
                Format::Json => to_json(&s),
                Format::Csv => csv_rows(&["exp", "coeff"], s.terms().map(|(e, c)| vec![e.to_string(), c.to_string()])),
            }
        }
        Cmd::Coeffs { family } => {
            need_order(cli.order)?;
            let kind: CoeffKind = family.parse()?;
            let f = named_coeffs(kind, cli.order)?;
            match fmt {
                Format::Human => f.values.iter().map(|(i, v)| format!("{i}\t{v}\n")).collect(),
                Format::Json => to_json(&f),
                Format::Csv => csv_rows(&["index", "value"], f.values.iter().map(|(i, v)| vec![i.to_string(), v.to_string()])),
            }
        }
        Cmd::Genfun { name } => {
            need_cap(cli.cap)?;
            let kind: GenKind = name.parse()?;
            let table = match kind {
                GenKind::FKt | GenKind::FKq => tables::witten_table(cli.cap)?,
                GenKind::FHt | GenKind::FHq => tables::hodge_table_via_w_mode(cli.cap, mode)?,
                GenKind::Hurwitz => return Err(usage("use the hurwitz subcommand for H")),
            };
            let f = build_gen_function(kind, cli.cap, &table)?;
            poly_out(fmt, &f.body, |p| to_json(&json!({ "kind": f.kind, "cap": f.cap, "terms": p })), "u")
        }
        Cmd::Op { name, m } => {
            need_cap(cli.cap)?;
            let o = by_name(name, *m, cli.cap)?;
            match fmt {
                Format::Human => o.terms().map(|(t, c)| format!("({c})*{}\n", t.render(o.family))).collect(),
                Format::Json => to_json(&json!({ "name": name, "m": m, "cap": cli.cap, "terms": o.rows() })),
                Format::Csv => csv_rows(
                    &["coeff", "u", "mult", "partials", "du"],
                    o.rows().into_iter().map(|r| vec![r.coeff.to_string(), r.u.to_string(), join(&r.mult), join(&r.partials), r.du.to_string()]),
                ),
            }
        }
        Cmd::Hodge { gmax, nmax, provenance } => {
            let (cap, keep): (i64, Box<dyn Fn(&Row) -> bool>) = match (gmax, nmax) {
                (Some(g), Some(n)) => {
                    let chi = 2 * *g as i64 - 2 + *n as i64;
                    if chi <= 0 {
                        return Err(usage(format!("no stable (g, n) with g <= {g}, n <= {n}")));
                    }
                    let (g, n) = (*g, *n as usize);
                    (3 * chi, Box::new(move |r: &Row| r.g <= g && r.d.len() <= n))
                }
                _ => (cli.cap, Box::new(|_: &Row| true)),
            };
            need_cap(cap)?;
            let mut rows = vec![];
            if *provenance != Source::Recursion {
                rows.extend(tables::hodge_table_via_w_mode(cap, mode)?.rows());
            }
            if *provenance != Source::W {
                rows.extend(tables::hodge_table_via_recursion(cap)?.rows());
            }
            rows.retain(|r| keep(r));
            rows.sort_by(|a, b| (a.g, a.d.len(), &a.d, a.j).cmp(&(b.g, b.d.len(), &b.d, b.j)).then(a.provenance.to_string().cmp(&b.provenance.to_string())));
            table_out(fmt, &rows, true)
        }
        Cmd::Witten => {
            need_cap(cli.cap)?;
            let mut rows = tables::witten_table(cli.cap)?.rows();
            rows.sort_by(|a, b| (a.g, a.d.len(), &a.d).cmp(&(b.g, b.d.len(), &b.d)));
            table_out(fmt, &rows, false)
        }
        Cmd::Hurwitz { beta } => {
            if *beta < 0 {
                return Err(usage("--beta must be non-negative"));
            }
            let h = tables::hurwitz_series(*beta, cli.cap)?;
            poly_out(fmt, &h.body, |p| to_json(&json!({ "beta_order": beta, "cap": cli.cap, "terms": p })), "beta")
        }
        Cmd::Verify { checks, list } => {
            if *list {
                let text = verify::CHECKS.iter().map(|c| format!("{:<16}{}\n", c.id, c.about)).collect();
                return Ok((text, true));
            }
            let cfg = Config::new(cli.cap, cli.order, mode).map_err(|e| usage(e.to_string()))?;
            let ids: Vec<&str> = if checks.is_empty() { verify::check_ids() } else { checks.iter().map(String::as_str).collect() };
            let reports = verify::run_checks(&ids, &Ctx::new(cfg))?;
            let ok = reports.iter().all(|r| !matches!(r.status, Status::Fail { .. }));
            let text = match fmt {
                Format::Human => reports.iter().map(human_report).collect(),
                Format::Json => to_json(&reports),
                Format::Csv => csv_rows(
                    &["check_id", "status", "weight_cap", "series_order", "term"],
                    reports.iter().map(|r| {
                        let (status, term) = match &r.status {
                            Status::Pass => ("pass", String::new()),
                            Status::Fail { term } => ("fail", term.clone()),
                            Status::Skipped { reason } => ("skipped", reason.clone()),
                        };
                        let opt = |x: Option<i64>| x.map(|v| v.to_string()).unwrap_or_default();
                        vec![r.check_id.clone(), status.into(), opt(r.window.weight_cap), opt(r.window.series_order), term]
                    }),
                ),
            };
            return Ok((text, ok));
        }
    };
    Ok((text, true))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn join(v: &[u16]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn csv_rows(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

/// A polynomial as text; `u_name` names what the `u` slot stands for.
fn poly_out(fmt: Format, p: &GradedPoly, json: impl Fn(&GradedPoly) -> String, u_name: &str) -> String {
    let fam = p.family;
    match fmt {
        Format::Human => p
            .terms()
            .map(|(m, c)| {
                let mut parts = vec![];
                match m.u {
                    0 => {}
                    1 => parts.push(u_name.to_string()),
                    e => parts.push(format!("{u_name}^{e}")),
                }
                let rest = Mono::new(0, m.vars.clone()).render(fam);
                if rest != "1" || parts.is_empty() {
                    parts.push(rest);
                }
                format!("({c})*{}\n", parts.join("*"))
            })
            .collect(),
        Format::Json => json(p),
        Format::Csv => csv_rows(&[u_name, fam.var_name(), "coeff"], p.terms().map(|(m, c)| vec![m.u.to_string(), join(&m.vars), c.to_string()])),
    }
}

fn table_out(fmt: Format, rows: &[Row], hodge: bool) -> String {
    match fmt {
        Format::Human => rows
            .iter()
            .map(|r| {
                let taus: Vec<String> = r.d.iter().map(|d| format!("tau_{d}")).collect();
                let lam = if hodge { format!("lambda_{} ", r.j) } else { String::new() };
                let prov = if hodge { format!("  [{}]", r.provenance) } else { String::new() };
                format!("<{lam}{}>_{} = {}{prov}\n", taus.join(" "), r.g, r.value)
            })
            .collect(),
        Format::Json if hodge => to_json(&rows),
        Format::Json => to_json(&rows.iter().map(|r| json!({ "g": r.g, "d": r.d, "value": r.value })).collect::<Vec<_>>()),
        Format::Csv if hodge => csv_rows(
            &["g", "j", "d", "value", "provenance"],
            rows.iter().map(|r| vec![r.g.to_string(), r.j.to_string(), join(&r.d), r.value.to_string(), r.provenance.to_string()]),
        ),
        Format::Csv => csv_rows(&["g", "d", "value"], rows.iter().map(|r| vec![r.g.to_string(), join(&r.d), r.value.to_string()])),
    }
}

fn human_report(r: &CheckReport) -> String {
    let mut window = vec![];
    if let Some(w) = r.window.weight_cap {
        window.push(format!("weight <= {w}"));
    }
    if let Some(n) = r.window.series_order {
        window.push(format!("order <= {n}"));
    }
    let head = match &r.status {
        Status::Pass => "PASS",
        Status::Fail { .. } => "FAIL",
        Status::Skipped { .. } => "SKIP",
    };
    let mut s = format!("{head} {} ({})\n", r.check_id, window.join(", "));
    match &r.status {
        Status::Fail { term } => s.push_str(&format!("  first failure: {term}\n")),
        Status::Skipped { reason } => s.push_str(&format!("  skipped: {reason}\n")),
        Status::Pass => {}
    }
    for i in r.items.iter().filter(|i| !i.passed) {
        s.push_str(&format!("  failed: {}: {}\n", i.name, i.residual.clone().unwrap_or_default()));
    }
    for n in &r.notes {
        s.push_str(&format!("  note: {n}\n"));
    }
    s
}
