//! Differential-testing campaigns over generated terms.
//!
//! Each mode checks one property per trial:
//!
//! | mode         | property                                                        |
//! |--------------|-----------------------------------------------------------------|
//! | `refine`     | a terminating source run is matched by the ANF program          |
//! | `refine-cps` | the same for the CPS program                                    |
//! | `alpha`      | ANF output under two name supplies is alpha-equivalent          |
//! | `spec`       | the relational checker accepts the ANF output, residual exact   |
//! | `divergence` | on open terms, the ANF program never uses less fuel than source |
//!
//! The divergence property is expected to fail; the campaign is a
//! falsification experiment.
//!
//! Failing terms are shrunk while the failure kind is preserved, and every
//! report carries a command line that reruns the check on the shrunk term.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use crate::anf::{anf_exp, anf_program, translate_env, AnfOutput};
use crate::cps::cps_program;
use crate::eval::{eval_anf, eval_src, EvalResult, Evaluation, StuckError};
use crate::logrel::obs_rel;
use crate::spec::{check_judgment, JudgmentQuery, SpecVerdict};
use crate::syntax::surface::render_src_env;
use crate::syntax::{
    alpha_eq, AnfEnv, AnfExpr, AnfValue, CtorTable, NameSupply, SrcExpr, SrcValue, Var,
};
use crate::testgen::{gen_open, gen_src, shrink_open, GenConfig};
use crate::TransformError;

pub const ALPHA_SUPPLIES: (u64, u64) = (0, 1000);
pub const DEFAULT_BUDGET: u64 = 100_000;
const ENV_PREFIX: &str = "w";

/// Fuel granted to a compiled program whose source run used at most `f`.
pub fn target_budget(f: u64) -> u64 {
    f.saturating_mul(16).saturating_add(64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Refine,
    RefineCps,
    Alpha,
    Spec,
    Divergence,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Refine => "refine",
            Mode::RefineCps => "refine-cps",
            Mode::Alpha => "alpha",
            Mode::Spec => "spec",
            Mode::Divergence => "divergence",
        }
    }

    fn uses_budget(self) -> bool {
        matches!(self, Mode::Refine | Mode::RefineCps | Mode::Divergence)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailKind {
    /// Both sides terminate and the target used less fuel.
    CostGap,
    /// Values are not related by the observation relation.
    Mismatch,
    TargetStuck,
    TargetOot,
    NotAlphaEquivalent,
    SpecRejected,
    ResidualMismatch,
    /// The transformation refused a generated term.
    Internal,
}

impl FailKind {
    pub fn is_internal(self) -> bool {
        self == FailKind::Internal
    }
}

impl fmt::Display for FailKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FailReport {
    pub mode: Mode,
    pub kind: FailKind,
    /// The shrunk witness.
    pub term: String,
    pub env: Option<String>,
    pub evidence: BTreeMap<String, String>,
    pub replay: Vec<String>,
}

impl FailReport {
    pub fn replay_command(&self) -> String {
        shlex::try_join(self.replay.iter().map(String::as_str))
            .expect("arguments contain no NUL bytes")
    }
}

impl fmt::Display for FailReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FAIL [{}] {}", self.mode, self.kind)?;
        writeln!(f, "  term: {}", self.term)?;
        if let Some(env) = &self.env {
            writeln!(f, "  env: {env}")?;
        }
        for (k, v) in &self.evidence {
            writeln!(f, "  {k}: {v}")?;
        }
        write!(f, "  replay: {}", self.replay_command())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TrialOutcome {
    Pass,
    Fail(Box<FailReport>),
    Skip { reason: String },
}

impl TrialOutcome {
    pub fn failure(&self) -> Option<&FailReport> {
        match self {
            TrialOutcome::Fail(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for TrialOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrialOutcome::Pass => f.write_str("PASS"),
            TrialOutcome::Skip { reason } => write!(f, "SKIP ({reason})"),
            TrialOutcome::Fail(r) => r.fmt(f),
        }
    }
}

/// The verdict of a single check, before shrinking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Check {
    Pass,
    Skip(String),
    Fail(FailKind, BTreeMap<String, String>),
}

impl Check {
    fn fail(kind: FailKind, evidence: impl IntoIterator<Item = (&'static str, String)>) -> Check {
        Check::Fail(
            kind,
            evidence
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        )
    }

    fn kind(&self) -> Option<FailKind> {
        match self {
            Check::Fail(k, _) => Some(*k),
            _ => None,
        }
    }
}

pub type Compile<'a> = dyn Fn(&SrcExpr, NameSupply) -> Result<AnfExpr, TransformError> + Sync + 'a;
pub type Decompose<'a> =
    dyn Fn(&SrcExpr, NameSupply) -> Result<AnfOutput, TransformError> + Sync + 'a;

/// Settings shared by every trial of a campaign.
#[derive(Clone, Debug)]
pub struct TrialSettings {
    pub mode: Mode,
    pub budget: u64,
    pub ctors: CtorTable,
    /// Passed back through `--ctors` in replay commands.
    pub ctors_path: Option<String>,
}

impl TrialSettings {
    pub fn new(mode: Mode, budget: u64, ctors: CtorTable) -> Self {
        TrialSettings {
            mode,
            budget,
            ctors,
            ctors_path: None,
        }
    }

    fn replay(&self, term: &SrcExpr, env: Option<&[SrcValue]>) -> Vec<String> {
        let mut argv = vec!["anfbench".to_string()];
        if let Some(p) = &self.ctors_path {
            argv.extend(["--ctors".to_string(), p.clone()]);
        }
        argv.extend(["fuzz".into(), "--mode".into(), self.mode.as_str().into()]);
        if self.mode.uses_budget() {
            argv.extend(["--budget".into(), self.budget.to_string()]);
        }
        argv.extend(["--term".into(), term.to_string()]);
        if let Some(env) = env {
            argv.extend(["--env".into(), render_src_env(env)]);
        }
        argv
    }

    fn report(&self, term: &SrcExpr, env: Option<&[SrcValue]>, check: Check) -> TrialOutcome {
        match check {
            Check::Pass => TrialOutcome::Pass,
            Check::Skip(reason) => TrialOutcome::Skip { reason },
            Check::Fail(kind, evidence) => TrialOutcome::Fail(Box::new(FailReport {
                mode: self.mode,
                kind,
                term: term.to_string(),
                env: env.map(render_src_env),
                evidence,
                replay: self.replay(term, env),
            })),
        }
    }
}

/// Constructors in full, closures elided; closure environments of compiled
/// programs can be very large.
fn brief(r: &EvalResult<AnfValue>) -> String {
    fn value(v: &AnfValue, out: &mut String) {
        match v {
            AnfValue::Con(t, fs) => {
                out.push_str("(con ");
                out.push_str(t.as_str());
                for f in fs.iter() {
                    out.push(' ');
                    value(f, out);
                }
                out.push(')');
            }
            AnfValue::Clos(c) => {
                out.push_str("<closure ");
                out.push_str(c.name.as_str());
                out.push('>');
            }
        }
    }
    match r {
        EvalResult::Oot => "OOT".to_string(),
        EvalResult::Val(v) => {
            let mut out = String::new();
            value(v, &mut out);
            out
        }
    }
}

fn brief_src(v: &SrcValue) -> String {
    match v {
        SrcValue::Con(t, fs) => {
            let mut out = format!("(con {t}");
            for f in fs.iter() {
                out.push(' ');
                out.push_str(&brief_src(f));
            }
            out.push(')');
            out
        }
        SrcValue::Clos(_) => "<closure>".to_string(),
    }
}

/// Refinement of a closed term against a compiled program.
pub fn check_refine(e: &SrcExpr, budget: u64, ctors: &CtorTable, compile: &Compile<'_>) -> Check {
    let src = match eval_src(&[], e, budget, ctors) {
        Err(stuck) => return Check::Skip(format!("source stuck: {}", stuck.reason)),
        Ok(ev) => ev,
    };
    let EvalResult::Val(v) = &src.result else {
        return Check::Skip(format!("source out of fuel at {budget}"));
    };
    let target = match compile(e, NameSupply::new(0)) {
        Ok(t) => t,
        Err(err) => return Check::fail(FailKind::Internal, [("error", err.to_string())]),
    };
    let tb = target_budget(budget);
    let trg = eval_anf(&AnfEnv::new(), &target, tb);
    let kind = match &trg {
        Err(_) => FailKind::TargetStuck,
        Ok(ev) => match &ev.result {
            EvalResult::Oot => FailKind::TargetOot,
            EvalResult::Val(v2) if obs_rel(v, v2) => return Check::Pass,
            EvalResult::Val(_) => FailKind::Mismatch,
        },
    };
    let mut evidence = vec![
        ("target", target.to_string()),
        ("src_value", brief_src(v)),
        ("consumed_src", src.consumed.to_string()),
        ("target_budget", tb.to_string()),
    ];
    push_target(&mut evidence, &trg);
    Check::fail(kind, evidence)
}

fn push_target(
    evidence: &mut Vec<(&'static str, String)>,
    trg: &Result<Evaluation<AnfValue>, StuckError>,
) {
    match trg {
        Err(stuck) => evidence.push(("trg_result", format!("stuck: {}", stuck.reason))),
        Ok(ev) => {
            evidence.push(("trg_result", brief(&ev.result)));
            evidence.push(("consumed_trg", ev.consumed.to_string()));
        }
    }
}

/// Alpha-equivalence of two compilations under different supplies.
pub fn check_alpha(e: &SrcExpr, s1: NameSupply, s2: NameSupply, compile: &Compile<'_>) -> Check {
    let (a, b) = match (compile(e, s1.clone()), compile(e, s2.clone())) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(err), _) | (_, Err(err)) => {
            return Check::fail(FailKind::Internal, [("error", err.to_string())])
        }
    };
    if alpha_eq(&a, &b) {
        Check::Pass
    } else {
        Check::fail(
            FailKind::NotAlphaEquivalent,
            [
                ("left", a.to_string()),
                ("right", b.to_string()),
                ("supplies", format!("{} vs {}", s1.next, s2.next)),
            ],
        )
    }
}

/// The relational checker against the decomposed ANF output.
pub fn check_spec(
    e: &SrcExpr,
    s: NameSupply,
    ctors: &CtorTable,
    decompose: &Decompose<'_>,
) -> Check {
    let out = match decompose(e, s.clone()) {
        Ok(o) => o,
        Err(err) => return Check::fail(FailKind::Internal, [("error", err.to_string())]),
    };
    let q = JudgmentQuery {
        supply_before: s,
        e: e.clone(),
        xs: vec![],
        ctx: out.ctx.clone(),
        result: out.result.clone(),
    };
    let verdict = check_judgment(&q, ctors);
    let evidence = [
        ("context", out.ctx.to_string()),
        ("result", out.result.to_string()),
        ("verdict", verdict.to_string()),
    ];
    match &verdict {
        SpecVerdict::Accepted(rest) if rest.is_exactly(&out.supply_after) => Check::Pass,
        SpecVerdict::Accepted(_) => Check::fail(FailKind::ResidualMismatch, evidence),
        SpecVerdict::Rejected(_) => Check::fail(FailKind::SpecRejected, evidence),
    }
}

/// Fuel comparison for an open term run under `env`: the source against
/// `C[halt r]` under the translated environment.
pub fn check_divergence(e: &SrcExpr, env: &[SrcValue], budget: u64, ctors: &CtorTable) -> Check {
    let src = match eval_src(env, e, budget, ctors) {
        Err(stuck) => return Check::Skip(format!("source stuck: {}", stuck.reason)),
        Ok(ev) => ev,
    };
    let EvalResult::Val(v) = &src.result else {
        return Check::Skip(format!("source out of fuel at {budget}"));
    };
    let mut names = NameSupply::with_prefix(ENV_PREFIX, 0);
    let xs: Vec<Var> = env.iter().map(|_| names.fresh()).collect();
    let built = translate_env(&xs, env, names, ctors)
        .and_then(|(sigma, _)| Ok((sigma, anf_exp(e, &xs, NameSupply::new(0), ctors)?.program())));
    let (sigma, target) = match built {
        Ok(x) => x,
        Err(err) => return Check::fail(FailKind::Internal, [("error", err.to_string())]),
    };
    let tb = target_budget(budget);
    let trg = eval_anf(&sigma, &target, tb);
    let kind = match &trg {
        Err(_) => FailKind::TargetStuck,
        Ok(ev) => match &ev.result {
            EvalResult::Oot => FailKind::TargetOot,
            EvalResult::Val(v2) if !obs_rel(v, v2) => FailKind::Mismatch,
            EvalResult::Val(_) if ev.consumed < src.consumed => FailKind::CostGap,
            EvalResult::Val(_) => return Check::Pass,
        },
    };
    let mut evidence = vec![
        ("sigma", sigma.to_string()),
        ("target", target.to_string()),
        ("src_value", brief_src(v)),
        ("consumed_src", src.consumed.to_string()),
    ];
    push_target(&mut evidence, &trg);
    Check::fail(kind, evidence)
}

fn default_compile(
    ctors: &CtorTable,
) -> impl Fn(&SrcExpr, NameSupply) -> Result<AnfExpr, TransformError> + Sync + '_ {
    move |e, s| anf_program(e, ctors, s)
}

/// Runs `check` on `e` and, on failure, shrinks `e` while the failure kind
/// stays the same.
fn run_shrinking(
    settings: &TrialSettings,
    e: &SrcExpr,
    env: Option<&[SrcValue]>,
    check: &(dyn Fn(&SrcExpr) -> Check + Sync),
) -> TrialOutcome {
    let first = check(e);
    let Some(kind) = first.kind() else {
        return settings.report(e, env, first);
    };
    let depth = env.map_or(0, <[SrcValue]>::len);
    let small = shrink_open(e, depth, &settings.ctors, &|c| {
        check(c).kind() == Some(kind)
    });
    let last = if small == *e { first } else { check(&small) };
    settings.report(&small, env, last)
}

pub fn run_refine_trial(e: &SrcExpr, budget: u64, ctors: &CtorTable) -> TrialOutcome {
    let settings = TrialSettings::new(Mode::Refine, budget, ctors.clone());
    run_refine_trial_with(&settings, e, &default_compile(ctors))
}

pub fn run_refine_cps_trial(e: &SrcExpr, budget: u64, ctors: &CtorTable) -> TrialOutcome {
    let settings = TrialSettings::new(Mode::RefineCps, budget, ctors.clone());
    run_refine_trial_with(&settings, e, &|e, s| cps_program(e, ctors, s))
}

pub fn run_refine_trial_with(
    settings: &TrialSettings,
    e: &SrcExpr,
    compile: &Compile<'_>,
) -> TrialOutcome {
    run_shrinking(settings, e, None, &|c| {
        check_refine(c, settings.budget, &settings.ctors, compile)
    })
}

pub fn run_alpha_trial(
    e: &SrcExpr,
    s1: NameSupply,
    s2: NameSupply,
    ctors: &CtorTable,
) -> TrialOutcome {
    let settings = TrialSettings::new(Mode::Alpha, DEFAULT_BUDGET, ctors.clone());
    run_alpha_trial_with(&settings, e, s1, s2, &default_compile(ctors))
}

pub fn run_alpha_trial_with(
    settings: &TrialSettings,
    e: &SrcExpr,
    s1: NameSupply,
    s2: NameSupply,
    compile: &Compile<'_>,
) -> TrialOutcome {
    run_shrinking(settings, e, None, &|c| {
        check_alpha(c, s1.clone(), s2.clone(), compile)
    })
}

pub fn run_spec_trial(e: &SrcExpr, s: NameSupply, ctors: &CtorTable) -> TrialOutcome {
    let settings = TrialSettings::new(Mode::Spec, DEFAULT_BUDGET, ctors.clone());
    run_spec_trial_with(&settings, e, s, &|e, s| anf_exp(e, &[], s, ctors))
}

pub fn run_spec_trial_with(
    settings: &TrialSettings,
    e: &SrcExpr,
    s: NameSupply,
    decompose: &Decompose<'_>,
) -> TrialOutcome {
    run_shrinking(settings, e, None, &|c| {
        check_spec(c, s.clone(), &settings.ctors, decompose)
    })
}

pub fn run_divergence_trial(
    e: &SrcExpr,
    env: &[SrcValue],
    budget: u64,
    ctors: &CtorTable,
) -> TrialOutcome {
    let settings = TrialSettings::new(Mode::Divergence, budget, ctors.clone());
    run_divergence_trial_in(&settings, e, env)
}

fn run_divergence_trial_in(
    settings: &TrialSettings,
    e: &SrcExpr,
    env: &[SrcValue],
) -> TrialOutcome {
    run_shrinking(settings, e, Some(env), &|c| {
        check_divergence(c, env, settings.budget, &settings.ctors)
    })
}

/// Runs the check of `settings.mode` on one term.
pub fn run_trial(settings: &TrialSettings, e: &SrcExpr, env: Option<&[SrcValue]>) -> TrialOutcome {
    let ctors = &settings.ctors;
    match settings.mode {
        Mode::Refine => run_refine_trial_with(settings, e, &default_compile(ctors)),
        Mode::RefineCps => run_refine_trial_with(settings, e, &|e, s| cps_program(e, ctors, s)),
        Mode::Alpha => run_alpha_trial_with(
            settings,
            e,
            NameSupply::new(ALPHA_SUPPLIES.0),
            NameSupply::new(ALPHA_SUPPLIES.1),
            &default_compile(ctors),
        ),
        Mode::Spec => run_spec_trial_with(settings, e, NameSupply::new(0), &|e, s| {
            anf_exp(e, &[], s, ctors)
        }),
        Mode::Divergence => run_divergence_trial_in(settings, e, env.unwrap_or(&[])),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Hold,
    Falsify,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// The generated term, before any shrinking.
    pub input: String,
    pub input_env: Option<String>,
    #[serde(flatten)]
    pub outcome: TrialOutcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct CampaignReport {
    pub mode: Mode,
    pub trials: u64,
    pub passes: u64,
    pub fails: u64,
    pub skips: u64,
    pub fail_kinds: BTreeMap<FailKind, u64>,
    pub first_failure: Option<TrialRecord>,
    pub wall_time: f64,
    pub seed: u64,
    pub budget: u64,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl CampaignReport {
    pub fn from_records(settings: &TrialSettings, seed: u64, records: Vec<TrialRecord>) -> Self {
        let mut report = CampaignReport {
            mode: settings.mode,
            trials: records.len() as u64,
            passes: 0,
            fails: 0,
            skips: 0,
            fail_kinds: BTreeMap::new(),
            first_failure: None,
            wall_time: 0.0,
            seed,
            budget: settings.budget,
            records: Vec::new(),
        };
        for r in &records {
            match &r.outcome {
                TrialOutcome::Pass => report.passes += 1,
                TrialOutcome::Skip { .. } => report.skips += 1,
                TrialOutcome::Fail(f) => {
                    report.fails += 1;
                    *report.fail_kinds.entry(f.kind).or_default() += 1;
                    if report.first_failure.is_none() {
                        report.first_failure = Some(r.clone());
                    }
                }
            }
        }
        report.records = records;
        report
    }

    /// Passes over non-skipped trials.
    pub fn pass_rate(&self) -> f64 {
        let ran = self.passes + self.fails;
        if ran == 0 {
            1.0
        } else {
            self.passes as f64 / ran as f64
        }
    }

    pub fn skip_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.skips as f64 / self.trials as f64
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &FailReport> {
        self.records.iter().filter_map(|r| r.outcome.failure())
    }

    pub fn has_internal_failure(&self) -> bool {
        self.fail_kinds.keys().any(|k| k.is_internal())
    }

    /// Whether the outcome is what `expect` asked for. Falsifying the
    /// divergence property requires a fuel gap specifically.
    pub fn meets(&self, expect: Expectation) -> bool {
        match expect {
            Expectation::Hold => self.fails == 0,
            Expectation::Falsify if self.mode == Mode::Divergence => {
                self.fail_kinds
                    .get(&FailKind::CostGap)
                    .is_some_and(|n| *n > 0)
                    && self.fail_kinds.len() == 1
            }
            Expectation::Falsify => self.fails > 0,
        }
    }

    /// 0 when the expectation is met, 3 on an internal failure, else 1.
    pub fn exit_code(&self, expect: Expectation) -> i32 {
        if self.trials != self.passes + self.fails + self.skips || self.has_internal_failure() {
            3
        } else if self.meets(expect) {
            0
        } else {
            1
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "mode {} seed {} budget {}: {} trials, {} passed, {} failed, {} skipped ({:.1}% pass rate over non-skipped, {:.1}% skipped) in {:.2}s",
            self.mode,
            self.seed,
            self.budget,
            self.trials,
            self.passes,
            self.fails,
            self.skips,
            100.0 * self.pass_rate(),
            100.0 * self.skip_rate(),
            self.wall_time
        )
    }
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub settings: TrialSettings,
    pub trials: u64,
    pub gen: GenConfig,
}

impl CampaignConfig {
    pub fn new(mode: Mode, trials: u64, seed: u64, budget: u64, ctors: CtorTable) -> Self {
        CampaignConfig {
            settings: TrialSettings::new(mode, budget, ctors.clone()),
            trials,
            gen: GenConfig {
                ctors,
                seed,
                ..GenConfig::default()
            },
        }
    }
}

pub fn run_campaign(cfg: &CampaignConfig) -> CampaignReport {
    let start = Instant::now();
    let settings = &cfg.settings;
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            if settings.mode == Mode::Divergence {
                let (e, env) = gen_open(&cfg.gen, trial);
                TrialRecord {
                    trial,
                    input: e.to_string(),
                    input_env: Some(render_src_env(&env)),
                    outcome: run_trial(settings, &e, Some(&env)),
                }
            } else {
                let e = gen_src(&cfg.gen, trial);
                TrialRecord {
                    trial,
                    input: e.to_string(),
                    input_env: None,
                    outcome: run_trial(settings, &e, None),
                }
            }
        })
        .collect();
    let mut report = CampaignReport::from_records(settings, cfg.gen.seed, records);
    report.wall_time = start.elapsed().as_secs_f64();
    report
}
