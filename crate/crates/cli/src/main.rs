//! `ltspace` command-line front end.

mod render;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ltspace::arith::{dd_parameter_rows, intersection_types, rows_to_csv, RowOptions};
use ltspace::catalog::{self, load_catalog, run_manifest, Catalog, Outcome};
use ltspace::designs::{verify_group_action, verify_linear_space, Design, GroupActionReport, LinearSpaceReport};
use ltspace::groups::{build_group, GroupSpec};
use ltspace::search::{classify_designs, find_line_regular_designs, SearchConfig, SearchReport};
use ltspace::Error;

const EXIT_INVALID: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ltspace", version, about = "Parameter rows and line-regular orbit searches for linear spaces")]
struct Cli {
    /// Include wall-clock timings (otherwise output is deterministic).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Markdown,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Feasible parameter rows for one or more line sizes.
    Params {
        /// Line sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u64>,
        /// Keep only rows with gcd(k, v) = 1.
        #[arg(long)]
        gcd_one: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Intersection types for given k, x, c, d.
    Types {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        d: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Exhaustive base-block search under a line-regular group.
    Search {
        /// Group spec JSON file, or builtin:<catalog id>[/<index>].
        #[arg(long)]
        group: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        max_solutions: Option<usize>,
        /// Seconds.
        #[arg(long)]
        time_budget: Option<f64>,
        #[arg(long, env = "LTSPACE_THREADS")]
        threads: Option<usize>,
        /// Report every base block through 0, not one per line orbit.
        #[arg(long)]
        no_canonicity: bool,
        /// Skip the isomorphism classification of the solutions.
        #[arg(long)]
        no_classify: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Checks a design file against the linear-space axioms.
    Verify {
        #[arg(long)]
        design: PathBuf,
        /// Also check invariance under this group (defaults to the design's provenance).
        #[arg(long)]
        group: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Re-runs catalog entries and compares with their expected results.
    Reproduce {
        /// Entry ids, comma separated, or all-fast.
        #[arg(long, value_delimiter = ',', required = true)]
        entries: Vec<String>,
        /// Per-entry budget in seconds.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, value_enum, default_value = "markdown")]
        format: ReportFormat,
    },
    /// Lists catalog entries, or prints one.
    Catalog {
        #[arg(long)]
        id: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INVALID) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command, cli.timings) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn seconds(s: f64) -> Result<Duration, Error> {
    Duration::try_from_secs_f64(s)
        .map_err(|_| Error::InvalidArgument(format!("bad duration {s}")))
}

fn strip_timings(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.remove("elapsed_secs");
            map.values_mut().for_each(strip_timings);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

fn emit<T: Serialize>(value: &T, format: Format, timings: bool) -> Result<(), Error> {
    let mut json = serde_json::to_value(value)?;
    if !timings {
        strip_timings(&mut json);
    }
    match format {
        Format::Json | Format::Csv => println!("{}", serde_json::to_string_pretty(&json)?),
        Format::Text => print!("{}", render::text(&json)),
    }
    Ok(())
}

fn resolve_group(arg: &str, catalog: &Catalog) -> Result<GroupSpec, Error> {
    if arg.starts_with("builtin:") {
        return catalog.builtin_group(arg);
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {arg}: {e}")))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Serialize)]
struct ClassOut {
    label: String,
    representative: Vec<u32>,
    members: usize,
}

#[derive(Serialize)]
struct SearchOutput {
    report: SearchReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    classes: Option<Vec<ClassOut>>,
}

#[derive(Serialize)]
struct VerifyOutput {
    linear_space: LinearSpaceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    group_action: Option<GroupActionReport>,
}

#[derive(Serialize)]
struct CatalogLine<'a> {
    id: &'a str,
    scale: &'static str,
    claim: &'a str,
}

/// "A", "B", ..., "Z", "AA", ...
fn class_label(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'A' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).expect("ascii")
}

fn run(cmd: Command, timings: bool) -> Result<u8, Error> {
    match cmd {
        Command::Params { k, gcd_one, format } => {
            let catalog = load_catalog()?;
            let mut rows = Vec::new();
            for k in k {
                rows.extend(dd_parameter_rows(k, RowOptions { require_gcd_one: gcd_one, k_range_check: false })?);
            }
            catalog::tag_rows(&mut rows, &catalog)?;
            match format {
                Format::Csv => print!("{}", rows_to_csv(&rows)),
                f => emit(&rows, f, timings)?,
            }
            Ok(0)
        }
        Command::Types { k, x, c, d, format } => {
            let types: Vec<String> =
                intersection_types(k, x, c, d)?.iter().map(ToString::to_string).collect();
            match format {
                Format::Csv => {
                    println!("type");
                    for t in &types {
                        println!("\"{t}\"");
                    }
                }
                f => emit(&types, f, timings)?,
            }
            Ok(0)
        }
        Command::Search { group, k, max_solutions, time_budget, threads, no_canonicity, no_classify, format } => {
            let start = Instant::now();
            let catalog = load_catalog()?;
            let g = build_group(&resolve_group(&group, &catalog)?)?;
            let mut cfg = SearchConfig::new(k);
            cfg.max_solutions = max_solutions;
            cfg.time_budget = time_budget.map(seconds).transpose()?;
            cfg.threads = threads;
            cfg.canonicity = !no_canonicity;
            let report = find_line_regular_designs(&g, &cfg)?;
            let mut budget_hit = report.budget_exhausted;
            let classes = if no_classify || report.infeasible.is_some() {
                None
            } else {
                let designs: Vec<Design> =
                    report.solutions.iter().map(|b| Design::from_base_block(&g, b)).collect();
                let deadline = cfg.time_budget.map(|b| start + b);
                match classify_designs(&designs, deadline)? {
                    Some(cl) => Some(
                        cl.iter()
                            .enumerate()
                            .map(|(i, c)| ClassOut {
                                label: class_label(i),
                                representative: report.solutions[c.representative].clone(),
                                members: c.members,
                            })
                            .collect(),
                    ),
                    None => {
                        budget_hit = true;
                        None
                    }
                }
            };
            let infeasible = report.infeasible.is_some();
            let out = SearchOutput { report, classes };
            if format == Format::Csv {
                return Err(Error::InvalidArgument("search output is json or text".into()));
            }
            emit(&out, format, timings)?;
            Ok(if infeasible {
                EXIT_INFEASIBLE
            } else if budget_hit {
                EXIT_BUDGET
            } else {
                0
            })
        }
        Command::Verify { design, group, format } => {
            let text = std::fs::read_to_string(&design)
                .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", design.display())))?;
            let d: Design = serde_json::from_str(&text)?;
            let linear_space = verify_linear_space(&d);
            let spec = match group {
                Some(arg) => Some(resolve_group(&arg, &load_catalog()?)?),
                None => d.provenance.as_ref().map(|p| p.group.clone()),
            };
            let group_action = spec
                .map(|s| verify_group_action(&d, &build_group(&s)?))
                .transpose()?;
            let ok = linear_space.valid && group_action.as_ref().is_none_or(|g| g.invariant);
            emit(&VerifyOutput { linear_space, group_action }, format, timings)?;
            Ok(if ok { 0 } else { EXIT_VERIFY })
        }
        Command::Reproduce { entries, budget, format } => {
            let catalog = load_catalog()?;
            let report = run_manifest(&catalog, &entries, budget.map(seconds).transpose()?)?;
            match format {
                ReportFormat::Markdown => print!("{}", report.to_markdown(timings)),
                ReportFormat::Json => emit(&report, Format::Json, timings)?,
            }
            Ok(if report.count(Outcome::Fail) > 0 {
                EXIT_VERIFY
            } else if report.count(Outcome::Inconclusive) > 0 {
                EXIT_BUDGET
            } else {
                0
            })
        }
        Command::Catalog { id, format } => {
            let catalog = load_catalog()?;
            match id {
                Some(id) => emit(catalog.entry(&id)?, format, timings)?,
                None => {
                    let lines: Vec<CatalogLine> = catalog
                        .entries
                        .iter()
                        .map(|e| CatalogLine { id: &e.id, scale: catalog::scale_name(e.scale), claim: &e.claim })
                        .collect();
                    emit(&lines, format, timings)?;
                }
            }
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(class_label(0), "A");
        assert_eq!(class_label(1), "B");
        assert_eq!(class_label(25), "Z");
        assert_eq!(class_label(26), "AA");
    }
}
