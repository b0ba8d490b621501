use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use anfbench::anf::{anf_exp, anf_program};
use anfbench::cps::{admin_redex_count, cps_exp, cps_program, CONT_PREFIX};
use anfbench::eval::{eval_anf, eval_src};
use anfbench::harness::{
    run_campaign, run_trial, CampaignConfig, CampaignReport, Expectation, Mode, TrialRecord,
    TrialSettings, DEFAULT_BUDGET,
};
use anfbench::logrel::{exp_rel_bounded, AnfConfig, LogRelConfig};
use anfbench::spec::{check_judgment, JudgmentQuery, SpecVerdict};
use anfbench::syntax::surface::{
    parse, parse_anf_config, parse_ctx_result, parse_src, parse_src_env, render_src_env, Kind,
};
use anfbench::syntax::{CtorTable, CtorTableError, NameSupply, ParseError, SrcExpr, Var};
use anfbench::TransformError;

const EXIT_COUNTEREXAMPLE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "anfbench",
    version,
    about = "ANF and CPS transformations, interpreters and differential tests"
)]
struct Cli {
    /// Constructor table (`TAG ARITY` per line); defaults to Tt/0 Ff/0 Some/1 Pair/2
    #[arg(long, global = true, value_name = "FILE")]
    ctors: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SyntaxKind {
    Source,
    Anf,
    Context,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print its canonical rendering
    Parse {
        #[arg(long, value_enum, default_value = "source")]
        kind: SyntaxKind,
        /// Input file, or `-` for stdin
        file: PathBuf,
    },
    /// Evaluate a closed source term
    EvalSrc {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Environment `(values V...)` for an open term
        #[arg(long)]
        env: Option<String>,
    },
    /// Evaluate a target configuration `[ENV] EXPR`
    EvalAnf {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Translate a closed source term to ANF
    Anf {
        file: PathBuf,
        /// Also print the context and result variable
        #[arg(long)]
        decompose: bool,
        /// First counter value of the name supply
        #[arg(long, default_value_t = 0)]
        supply: u64,
    },
    /// Translate a closed source term to CPS
    Cps {
        file: PathBuf,
        /// Print the number of continuation functions instead of the program
        #[arg(long)]
        admin_count: bool,
        #[arg(long, default_value_t = 0)]
        supply: u64,
    },
    /// Check a context and result variable against the relational specification
    SpecCheck {
        /// Source term
        src: PathBuf,
        /// A context followed by the result variable
        ctx: PathBuf,
        #[arg(long, default_value_t = 0)]
        supply: u64,
    },
    /// Check two target configurations with the bounded logical relation
    LogrelCheck {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = 4)]
        k: u64,
        #[arg(long, default_value_t = 10_000)]
        eval_budget: u64,
        #[arg(long, default_value_t = 200_000)]
        witness_budget: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a randomized campaign, or replay one term with `--term`
    #[command(group(ArgGroup::new("expect").args(["expect_falsify", "expect_hold"])))]
    Fuzz {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Succeed only if a counterexample is found
        #[arg(long)]
        expect_falsify: bool,
        /// Succeed only if no counterexample is found (the default)
        #[arg(long)]
        expect_hold: bool,
        /// One JSON object per trial, then a summary object
        #[arg(long)]
        json: bool,
        /// Check this source term instead of generating terms
        #[arg(long)]
        term: Option<String>,
        /// Environment `(values V...)` for `--term` in divergence mode
        #[arg(long, requires = "term")]
        env: Option<String>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Ctors {
        path: String,
        source: CtorTableError,
    },
    #[error("{0}")]
    Transform(#[from] TransformError),
}

fn read_input(path: &Path) -> Result<String, CliError> {
    let name = path.display().to_string();
    if name == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|source| CliError::Io { path: name, source })?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|source| CliError::Io { path: name, source })
}

fn parsed<T>(path: &str, r: Result<T, ParseError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Parse {
        path: path.to_string(),
        source,
    })
}

fn load_src(path: &Path, ctors: &CtorTable) -> Result<SrcExpr, CliError> {
    let text = read_input(path)?;
    parsed(&path.display().to_string(), parse_src(&text, ctors))
}

fn load_config(path: &Path, ctors: &CtorTable) -> Result<AnfConfig, CliError> {
    let text = read_input(path)?;
    let (env, expr) = parsed(&path.display().to_string(), parse_anf_config(&text, ctors))?;
    Ok(AnfConfig::new(env, expr))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let ctors = match &cli.ctors {
        None => CtorTable::standard(),
        Some(p) => {
            let text = read_input(p)?;
            CtorTable::parse(&text).map_err(|source| CliError::Ctors {
                path: p.display().to_string(),
                source,
            })?
        }
    };
    match cli.command {
        Command::Parse { kind, file } => {
            let text = read_input(&file)?;
            let kind = match kind {
                SyntaxKind::Source => Kind::Source,
                SyntaxKind::Anf => Kind::Anf,
                SyntaxKind::Context => Kind::Context,
            };
            let term = parsed(&file.display().to_string(), parse(&text, kind, &ctors))?;
            println!("{term}");
            Ok(0)
        }
        Command::EvalSrc { file, budget, env } => {
            let e = load_src(&file, &ctors)?;
            let env = match env {
                Some(text) => parsed("--env", parse_src_env(&text, &ctors))?,
                None => vec![],
            };
            match eval_src(&env, &e, budget, &ctors) {
                Ok(ev) => {
                    println!("{}", ev.result);
                    println!("consumed {}", ev.consumed);
                    Ok(0)
                }
                Err(stuck) => {
                    println!("stuck: {}", stuck.reason);
                    println!("consumed {}", stuck.consumed);
                    Ok(EXIT_COUNTEREXAMPLE)
                }
            }
        }
        Command::EvalAnf { file, budget } => {
            let c = load_config(&file, &ctors)?;
            match eval_anf(&c.env, &c.expr, budget) {
                Ok(ev) => {
                    println!("{}", ev.result);
                    println!("consumed {}", ev.consumed);
                    Ok(0)
                }
                Err(stuck) => {
                    println!("stuck: {}", stuck.reason);
                    println!("consumed {}", stuck.consumed);
                    Ok(EXIT_COUNTEREXAMPLE)
                }
            }
        }
        Command::Anf {
            file,
            decompose,
            supply,
        } => {
            let e = load_src(&file, &ctors)?;
            if decompose {
                let out = anf_exp(&e, &[], NameSupply::new(supply), &ctors)?;
                println!("{}", out.program());
                println!("context: {}", out.ctx);
                println!("result: {}", out.result);
                println!("supply after: {}", out.supply_after.next);
            } else {
                println!("{}", anf_program(&e, &ctors, NameSupply::new(supply))?);
            }
            Ok(0)
        }
        Command::Cps {
            file,
            admin_count,
            supply,
        } => {
            let e = load_src(&file, &ctors)?;
            if admin_count {
                let mut s = NameSupply::new(supply);
                let k = s.fresh_with(CONT_PREFIX);
                let out = cps_exp(&e, &[], &k, s, &ctors)?;
                println!("{}", admin_redex_count(&out));
            } else {
                println!("{}", cps_program(&e, &ctors, NameSupply::new(supply))?);
            }
            Ok(0)
        }
        Command::SpecCheck { src, ctx, supply } => {
            let e = load_src(&src, &ctors)?;
            let text = read_input(&ctx)?;
            let (c, r) = parsed(&ctx.display().to_string(), parse_ctx_result(&text, &ctors))?;
            let q = JudgmentQuery {
                supply_before: NameSupply::new(supply),
                e,
                xs: Vec::<Var>::new(),
                ctx: c,
                result: r,
            };
            let verdict = check_judgment(&q, &ctors);
            println!("{verdict}");
            Ok(match verdict {
                SpecVerdict::Accepted(_) => 0,
                SpecVerdict::Rejected(_) => EXIT_COUNTEREXAMPLE,
            })
        }
        Command::LogrelCheck {
            left,
            right,
            k,
            eval_budget,
            witness_budget,
            samples,
            seed,
        } => {
            let c1 = load_config(&left, &ctors)?;
            let c2 = load_config(&right, &ctors)?;
            let cfg = LogRelConfig {
                eval_budget,
                witness_budget,
                closure_samples: samples as usize,
                sample_seed: seed,
                ctors: ctors.clone(),
            };
            let verdict = exp_rel_bounded(k, &c1, &c2, &cfg);
            println!("{verdict}");
            Ok(if verdict.holds() {
                0
            } else {
                EXIT_COUNTEREXAMPLE
            })
        }
        Command::Fuzz {
            mode,
            trials,
            seed,
            budget,
            expect_falsify,
            expect_hold: _,
            json,
            term,
            env,
        } => {
            let expect = if expect_falsify {
                Expectation::Falsify
            } else {
                Expectation::Hold
            };
            let mut settings = TrialSettings::new(mode, budget, ctors.clone());
            settings.ctors_path = cli.ctors.as_ref().map(|p| p.display().to_string());
            let report = match term {
                Some(text) => replay(&settings, seed, &text, env.as_deref())?,
                None => {
                    let mut cfg = CampaignConfig::new(mode, trials, seed, budget, ctors);
                    cfg.settings = settings;
                    run_campaign(&cfg)
                }
            };
            print_report(&report, json);
            let code = report.exit_code(expect);
            Ok(match code {
                0 => 0,
                3 => EXIT_INTERNAL,
                _ => EXIT_COUNTEREXAMPLE,
            })
        }
    }
}

fn replay(
    settings: &TrialSettings,
    seed: u64,
    text: &str,
    env: Option<&str>,
) -> Result<CampaignReport, CliError> {
    let start = Instant::now();
    let e = parsed("--term", parse_src(text, &settings.ctors))?;
    let env = match env {
        Some(t) => Some(parsed("--env", parse_src_env(t, &settings.ctors))?),
        None if settings.mode == Mode::Divergence => Some(vec![]),
        None => None,
    };
    let outcome = run_trial(settings, &e, env.as_deref());
    let record = TrialRecord {
        trial: 0,
        input: e.to_string(),
        input_env: env.as_deref().map(render_src_env),
        outcome,
    };
    let mut report = CampaignReport::from_records(settings, seed, vec![record]);
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

const SHOWN_FAILURES: usize = 5;

fn print_report(report: &CampaignReport, json: bool) {
    if json {
        for r in &report.records {
            println!("{}", serde_json::to_string(r).expect("records serialize"));
        }
        let summary = serde_json::json!({ "summary": report });
        println!("{summary}");
        return;
    }
    let failures: Vec<_> = report
        .records
        .iter()
        .filter(|r| r.outcome.failure().is_some())
        .collect();
    for r in failures.iter().take(SHOWN_FAILURES) {
        println!("trial {}: {}", r.trial, r.outcome);
    }
    if failures.len() > SHOWN_FAILURES {
        println!("... {} more failures", failures.len() - SHOWN_FAILURES);
    }
    for (kind, n) in &report.fail_kinds {
        println!("{kind}: {n}");
    }
    println!("{}", report.summary());
}
