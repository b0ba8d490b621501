//! Acceptance suite. Runs as a plain binary so the PASS/FAIL lines are
//! always printed; exits non-zero if any criterion fails.

mod common;

use std::fmt::Debug;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use anfbench::anf::{anf_exp, anf_program, translate_env, translate_val};
use anfbench::cps::cps_program;
use anfbench::eval::anf::call_env;
use anfbench::eval::{eval_anf, eval_src, EvalResult, Evaluation, StuckError};
use anfbench::harness::{
    check_divergence, run_campaign, CampaignConfig, Check, Expectation, FailKind, Mode,
    TrialOutcome,
};
use anfbench::logrel::{exp_rel_bounded, val_rel_bounded, AnfConfig, LogRelConfig};
use anfbench::spec::{check_judgment, JudgmentQuery, RejectReason, SpecVerdict};
use anfbench::syntax::surface::{parse_anf, parse_ctx, parse_src, parse_src_env, parse_src_value};
use anfbench::syntax::{AnfEnv, AnfExpr, AnfValue, NameSupply, SrcExpr, SrcValue, Var};
use anfbench::testgen::{gen_open, gen_src, gen_value, GenConfig};
use common::{continuation, ctors};
use serde_json::Value;

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Outcome {
            ok,
            detail: detail.into(),
        }
    }
}

const TRIALS: u64 = 1000;
const BUDGET: u64 = 100_000;
const KS: [u64; 4] = [0, 1, 4, 8];

fn main() -> ExitCode {
    type Criterion = (&'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("refinement", 120, refinement),
        ("cps refinement", 120, cps_refinement),
        ("alpha-equivalence", 60, alpha),
        ("spec correspondence", 60, spec),
        ("divergence falsification", 60, divergence),
        ("logical relation", 120, logical_relation),
        ("interpreter laws", 60, interpreter_laws),
        ("round-trips and replay", u64::MAX, round_trips),
    ];
    let mut all = true;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut out = run();
        let took = start.elapsed();
        if took > Duration::from_secs(*limit) {
            out.ok = false;
            out.detail.push_str(&format!("; exceeded {limit}s"));
        }
        all &= out.ok;
        let status = if out.ok { "PASS" } else { "FAIL" };
        println!(
            "{status} {}. {name}: {} ({:.2}s)",
            i + 1,
            out.detail,
            took.as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn campaign(mode: Mode) -> anfbench::harness::CampaignReport {
    run_campaign(&CampaignConfig::new(mode, TRIALS, 0, BUDGET, ctors()))
}

fn holding_campaign(mode: Mode, max_skip: f64) -> Outcome {
    let r = campaign(mode);
    let ok = r.fails == 0
        && r.passes > 0
        && r.skip_rate() < max_skip
        && r.exit_code(Expectation::Hold) == 0;
    let mut detail = r.summary();
    if let Some(f) = r.failures().next() {
        detail.push_str(&format!("; first failure: {f}"));
    }
    Outcome::new(ok, detail)
}

fn refinement() -> Outcome {
    holding_campaign(Mode::Refine, 0.2)
}

fn cps_refinement() -> Outcome {
    holding_campaign(Mode::RefineCps, 1.0)
}

fn alpha() -> Outcome {
    holding_campaign(Mode::Alpha, f64::EPSILON)
}

/// Hand-mutated contexts. Each row: source term, names for its free
/// indices, supply start, context, result, expected reason.
type Mutation = (
    &'static str,
    &'static [&'static str],
    u64,
    &'static str,
    &'static str,
    RejectReason,
);

const MUTATIONS: &[Mutation] = {
    use RejectReason::*;
    const MATCH: &str =
        "(match (con Some (con Tt)) (Tt (con Ff)) (Ff (con Tt)) (Some (var 0)) (Pair (var 1)))";
    const APP: &str = "(app (lam (var 0)) (lam (var 0)))";
    const PAIR: &str = "(con Pair (con Tt) (con Ff))";
    &[
        ("(con Tt)", &[], 0, "(letcon v0 Tt () (hole))", "v1", ResultVarMismatch),
        ("(con Tt)", &[], 1, "(letcon v0 Tt () (hole))", "v0", NonFreshBinder),
        ("(con Tt)", &[], 0, "(letcon z Tt () (hole))", "z", NonFreshBinder),
        ("(con Tt)", &[], 0, "(letcon v0 Ff () (hole))", "v0", ShapeMismatch),
        ("(con Tt)", &[], 0, "(hole)", "v0", ShapeMismatch),
        ("(con Tt)", &[], 0, "(letcon v0 Tt () (letcon v1 Ff () (hole)))", "v0", ShapeMismatch),
        ("(var 2)", &["a", "b"], 0, "(hole)", "a", IndexOutOfRange),
        ("(var 1)", &["a", "b"], 0, "(hole)", "a", ResultVarMismatch),
        ("(lam (var 0))", &[], 0, "(letfun v1 (v0 v2) (halt v0) (hole))", "v1", ArityMismatch),
        ("(lam (var 0))", &[], 0, "(letfun v0 (v0) (halt v0) (hole))", "v0", SupplyViolation),
        ("(lam (var 0))", &[], 0, "(letfun v1 (v0) (halt v1) (hole))", "v1", ResultVarMismatch),
        ("(lam (var 0))", &[], 0, "(letfun v1 (v0) (halt v0) (hole))", "v0", ResultVarMismatch),
        ("(lam (var 0))", &[], 1, "(letfun v0 (v1) (halt v1) (hole))", "v0", NonFreshBinder),
        (
            APP,
            &[],
            0,
            "(letfun v3 (v2) (halt v2) (letfun v1 (v0) (halt v0) (letapp v4 v1 (v3) (hole))))",
            "v4",
            ResultVarMismatch,
        ),
        (
            APP,
            &[],
            0,
            "(letfun v1 (v0) (halt v0) (letfun v3 (v2) (halt v2) (letapp v4 v3 (v1) (hole))))",
            "v4",
            ResultVarMismatch,
        ),
        (
            APP,
            &[],
            0,
            "(letfun v1 (v0) (halt v0) (letfun v3 (v2) (halt v2) (letapp v1 v1 (v3) (hole))))",
            "v1",
            SupplyViolation,
        ),
        (
            APP,
            &[],
            0,
            "(letfun v1 (v0) (halt v0) (letfun v3 (v2) (halt v2) (letapp v4 v1 (v3 v3) (hole))))",
            "v4",
            ArityMismatch,
        ),
        (
            APP,
            &[],
            0,
            "(letfun v1 (v0) (halt v0) (letfun v3 (v2) (halt v2) (letapp r v1 (v3) (hole))))",
            "r",
            NonFreshBinder,
        ),
        (
            PAIR,
            &[],
            0,
            "(letcon v1 Tt () (letcon v2 Ff () (letcon v0 Pair (v2 v1) (hole))))",
            "v0",
            ResultVarMismatch,
        ),
        (
            APP,
            &[],
            0,
            "(letfun v1 (v0) (halt v0) (letfun v3 (v2) (halt v2) (letapp v4 v1 () (hole))))",
            "v4",
            ArityMismatch,
        ),
        (
            PAIR,
            &[],
            0,
            "(letcon v1 Tt () (letcon v2 Ff () (letcon v1 Pair (v1 v2) (hole))))",
            "v1",
            SupplyViolation,
        ),
        (
            PAIR,
            &[],
            0,
            "(letcon v0 Pair (v1 v2) (letcon v1 Tt () (letcon v2 Ff () (hole))))",
            "v0",
            ShapeMismatch,
        ),
        (
            MATCH,
            &[],
            0,
            "(letcon v1 Tt () (letcon v0 Some (v1) (joinfun v2 v3 (hole) (case v1 (Tt (letcon v4 Ff () (tailcall v2 v4))) (Ff (letcon v5 Tt () (tailcall v2 v5))) (Some (proj v6 v0 0 (tailcall v2 v6))) (Pair (proj v7 v0 0 (proj v8 v0 1 (tailcall v2 v7))))))))",
            "v3",
            ResultVarMismatch,
        ),
        (
            MATCH,
            &[],
            0,
            "(letcon v1 Tt () (letcon v0 Some (v1) (joinfun v2 v3 (hole) (case v0 (Tt (letcon v4 Ff () (tailcall v2 v4))) (Ff (letcon v5 Tt () (tailcall v2 v5))) (Some (proj v6 v0 0 (tailcall v2 v6))) (Pair (proj v7 v0 0 (tailcall v2 v7)))))))",
            "v3",
            ArityMismatch,
        ),
        (
            MATCH,
            &[],
            0,
            "(letcon v1 Tt () (letcon v0 Some (v1) (joinfun v2 v3 (hole) (case v0 (Ff (letcon v5 Tt () (tailcall v2 v5))) (Tt (letcon v4 Ff () (tailcall v2 v4))) (Some (proj v6 v0 0 (tailcall v2 v6))) (Pair (proj v7 v0 0 (proj v8 v0 1 (tailcall v2 v7))))))))",
            "v3",
            ShapeMismatch,
        ),
        (
            MATCH,
            &[],
            0,
            "(letcon v1 Tt () (letcon v0 Some (v1) (joinfun v2 v3 (hole) (case v0 (Tt (letcon v4 Ff () (tailcall v1 v4))) (Ff (letcon v5 Tt () (tailcall v2 v5))) (Some (proj v6 v0 0 (tailcall v2 v6))) (Pair (proj v7 v0 0 (proj v8 v0 1 (tailcall v2 v7))))))))",
            "v3",
            ResultVarMismatch,
        ),
        (
            MATCH,
            &[],
            0,
            "(letcon v1 Tt () (letcon v0 Some (v1) (joinfun v2 v3 (hole) (case v0 (Tt (letcon v4 Ff () (tailcall v2 v4))) (Ff (letcon v5 Tt () (tailcall v2 v5))) (Some (proj v6 v0 0 (tailcall v2 v6))) (Pair (proj v7 v0 1 (proj v8 v0 0 (tailcall v2 v7))))))))",
            "v3",
            ShapeMismatch,
        ),
        (
            MATCH,
            &[],
            0,
            "(letcon v1 Tt () (letcon v0 Some (v1) (joinfun v2 v3 (hole) (case v0 (Tt (letcon v4 Ff () (tailcall v2 v4))) (Ff (letcon v5 Tt () (tailcall v2 v5))) (Some (proj v6 v0 0 (tailcall v2 v6))) (Pair (proj v7 v0 0 (proj v8 v0 1 (tailcall v2 v8))))))))",
            "v3",
            ResultVarMismatch,
        ),
        (
            MATCH,
            &[],
            0,
            "(letcon v1 Tt () (letcon v0 Some (v1) (joinfun v2 v3 (hole) (case v0 (Tt (letcon v3 Ff () (tailcall v2 v3))) (Ff (letcon v5 Tt () (tailcall v2 v5))) (Some (proj v6 v0 0 (tailcall v2 v6))) (Pair (proj v7 v0 0 (proj v8 v0 1 (tailcall v2 v7))))))))",
            "v3",
            SupplyViolation,
        ),
        ("(let (con Tt) (var 0))", &[], 0, "(letcon v0 Tt () (hole))", "v1", ResultVarMismatch),
        ("(let (con Tt) (var 1))", &["a"], 0, "(letcon v0 Tt () (hole))", "v0", ResultVarMismatch),
    ]
};

fn mutation_suite() -> Result<usize, String> {
    let t = ctors();
    for (i, (src, xs, start, ctx, result, expected)) in MUTATIONS.iter().enumerate() {
        let q = JudgmentQuery {
            supply_before: NameSupply::new(*start),
            e: parse_src(src, &t).map_err(|e| format!("mutation {i}: {e}"))?,
            xs: xs.iter().map(Var::new).collect(),
            ctx: parse_ctx(ctx, &t).map_err(|e| format!("mutation {i}: {e}"))?,
            result: Var::new(result),
        };
        match check_judgment(&q, &t) {
            SpecVerdict::Rejected(r) if r.reason == *expected => {}
            other => return Err(format!("mutation {i} expected {expected}, got {other}")),
        }
    }
    Ok(MUTATIONS.len())
}

fn spec() -> Outcome {
    let camp = holding_campaign(Mode::Spec, f64::EPSILON);
    match mutation_suite() {
        Ok(n) if n >= 20 => Outcome::new(
            camp.ok,
            format!(
                "{}; {n} mutated contexts rejected as documented",
                camp.detail
            ),
        ),
        Ok(n) => Outcome::new(false, format!("only {n} mutated contexts")),
        Err(e) => Outcome::new(false, format!("{}; {e}", camp.detail)),
    }
}

fn divergence() -> Outcome {
    let r = campaign(Mode::Divergence);
    let found = r.fail_kinds.get(&FailKind::CostGap).copied().unwrap_or(0);
    let met = r.meets(Expectation::Falsify) && r.exit_code(Expectation::Falsify) == 0;
    let env = [
        SrcValue::clos(vec![], SrcExpr::var(0)),
        SrcValue::con("Tt", vec![]),
    ];
    let e = SrcExpr::app(SrcExpr::var(0), SrcExpr::var(1));
    let (src, trg) = match check_divergence(&e, &env, BUDGET, &ctors()) {
        Check::Fail(FailKind::CostGap, ev) => {
            (ev["consumed_src"].clone(), ev["consumed_trg"].clone())
        }
        other => return Outcome::new(false, format!("canonical witness gave {other:?}")),
    };
    Outcome::new(
        met && found >= 1 && src == "4" && trg == "3",
        format!("{found} fuel-gap counterexamples in {} trials; canonical witness consumed_src = {src}, consumed_trg = {trg}", r.trials),
    )
}

fn check<T: Debug>(cond: bool, what: impl FnOnce() -> T) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(format!("{:?}", what()))
    }
}

/// A closed or open program with its target environment.
fn sampled_config(trial: u64) -> AnfConfig {
    let t = ctors();
    let g = GenConfig::with_seed(0x5EED);
    if trial.is_multiple_of(2) {
        AnfConfig::new(
            AnfEnv::new(),
            anf_program(&gen_src(&g, trial), &t, NameSupply::new(0)).unwrap(),
        )
    } else {
        let (e, vs) = gen_open(&g, trial);
        let xs: Vec<Var> = (0..vs.len()).map(|i| Var::indexed("w", i as u64)).collect();
        let (env, _) = translate_env(&xs, &vs, NameSupply::with_prefix("u", 0), &t).unwrap();
        AnfConfig::new(
            env,
            anf_exp(&e, &xs, NameSupply::new(0), &t).unwrap().program(),
        )
    }
}

fn reflexivity(cfg: &LogRelConfig) -> Result<String, String> {
    for trial in 0..200 {
        let c = sampled_config(trial);
        for k in KS {
            let v = exp_rel_bounded(k, &c, &c, cfg);
            check(v.holds(), || format!("reflexivity, trial {trial}: {v}"))?;
        }
    }
    Ok("reflexive on 200 configs".into())
}

fn oot_trivial(cfg: &LogRelConfig) -> Result<String, String> {
    let t = ctors();
    let omega = parse_anf(
        "(letfun f (x) (letapp r f (x) (halt r)) (letapp y f (f) (halt y)))",
        &t,
    )
    .unwrap();
    let diverging = AnfConfig::new(AnfEnv::new(), omega);
    let rights = [
        AnfConfig::new(
            AnfEnv::new(),
            parse_anf("(letcon a Tt () (halt a))", &t).unwrap(),
        ),
        AnfConfig::new(AnfEnv::new(), parse_anf("(halt nowhere)", &t).unwrap()),
        diverging.clone(),
    ];
    for k in KS {
        for right in &rights {
            let v = exp_rel_bounded(k, &diverging, right, cfg);
            check(v.holds(), || format!("OOT left side at k={k}: {v}"))?;
        }
    }
    Ok("OOT left side always holds".into())
}

/// `(σ, letapp x f (y) e_k)` and its contractum `(σ[x ↦ r], e_k)` where `r`
/// is the result of the call.
fn reduce_app_pair(seed: u64) -> Option<(AnfConfig, AnfConfig)> {
    let t = ctors();
    let g = GenConfig::with_seed(seed);
    let f_src = match gen_value(&g, 0) {
        v @ SrcValue::Clos(_) => v,
        _ if seed.is_multiple_of(3) => SrcValue::clos(vec![], SrcExpr::var(0)),
        _ => SrcValue::clos(
            vec![],
            gen_src(
                &GenConfig {
                    max_depth: 4,
                    ..g.clone()
                },
                2,
            ),
        ),
    };
    let arg = gen_value(&g, 3);
    let (fv, s) = translate_val(&f_src, NameSupply::with_prefix("u", 0), &t).ok()?;
    let (av, _) = translate_val(&arg, s, &t).ok()?;
    let (f, y, x) = (Var::new("f"), Var::new("y"), Var::new("x"));
    let env = AnfEnv::new()
        .with(f.clone(), fv.clone())
        .with(y.clone(), av.clone());
    let ek = continuation(seed, &[f.clone(), y.clone(), x.clone()], &t);
    let redex = AnfExpr::let_app(x.clone(), f, vec![y], ek.clone());
    eval_anf(&env, &redex, 10_000)
        .ok()
        .filter(|ev| !ev.result.is_oot())?;
    let AnfValue::Clos(clos) = &fv else {
        return None;
    };
    let call = call_env(clos, vec![av]).ok()?;
    let r = match eval_anf(&call, &clos.body, 10_000).ok()?.result {
        EvalResult::Val(r) => r,
        EvalResult::Oot => return None,
    };
    Some((
        AnfConfig::new(env.clone(), redex),
        AnfConfig::new(env.with(x, r), ek),
    ))
}

fn reduce_app(cfg: &LogRelConfig) -> Result<String, String> {
    let mut found = 0;
    let mut seed = 0;
    while found < 100 {
        seed += 1;
        check(seed < 100_000, || "too few terminating LetApp configs")?;
        let Some((redex, contractum)) = reduce_app_pair(seed) else {
            continue;
        };
        found += 1;
        for k in KS {
            let a = exp_rel_bounded(k, &redex, &contractum, cfg);
            check(a.holds(), || {
                format!("redex vs contractum, seed {seed}: {a}")
            })?;
            let b = exp_rel_bounded(k, &contractum, &redex, cfg);
            check(b.holds(), || {
                format!("contractum vs redex, seed {seed}: {b}")
            })?;
        }
    }
    Ok("reduce-app holds both ways on 100 configs".into())
}

fn outer_shape(v: &AnfValue) -> Option<String> {
    match v {
        AnfValue::Con(tag, _) => Some(tag.to_string()),
        AnfValue::Clos(_) => None,
    }
}

fn constructor_mismatch() -> Result<String, String> {
    let t = ctors();
    let mut found = 0;
    let mut trial = 0;
    while found < 100 {
        trial += 1;
        let g = GenConfig::with_seed(trial);
        let (a, _) = translate_val(&gen_value(&g, 0), NameSupply::new(0), &t).unwrap();
        let (b, _) = translate_val(&gen_value(&g, 1), NameSupply::new(1000), &t).unwrap();
        let (sa, sb) = (outer_shape(&a), outer_shape(&b));
        if sa == sb || (sa.is_none() && sb.is_none()) {
            continue;
        }
        found += 1;
        for k in KS {
            for seed in 0..3 {
                let cfg = LogRelConfig {
                    sample_seed: seed,
                    ..LogRelConfig::default()
                };
                let v = val_rel_bounded(k, &a, &b, &cfg);
                check(!v.holds(), || {
                    format!("mismatched values related at k={k}: {a} vs {b}")
                })?;
            }
        }
    }
    Ok("100 mismatched pairs always fail".into())
}

fn logical_relation() -> Outcome {
    let cfg = LogRelConfig::default();
    let parts = [
        reflexivity(&cfg),
        oot_trivial(&cfg),
        reduce_app(&cfg),
        constructor_mismatch(),
    ];
    let ok = parts.iter().all(Result::is_ok);
    let detail: Vec<String> = parts.into_iter().map(|p| p.unwrap_or_else(|e| e)).collect();
    Outcome::new(ok, detail.join("; "))
}

type Run<V> = Result<Evaluation<V>, StuckError>;

/// Determinism, monotonicity above the fuel actually used, and OOT with
/// `consumed = budget` below it.
fn laws<V: PartialEq + Debug>(run: &dyn Fn(u64) -> Run<V>) -> Result<(), String> {
    let full = run(BUDGET);
    check(full == run(BUDGET), || "nondeterministic")?;
    let used = match &full {
        Ok(Evaluation {
            result: EvalResult::Oot,
            ..
        }) => {
            for b in [0, 1, BUDGET / 2, BUDGET - 1] {
                let r = run(b);
                check(
                    matches!(&r, Ok(ev) if ev.result.is_oot() && ev.consumed == b),
                    || r,
                )?;
            }
            return Ok(());
        }
        Ok(ev) => ev.consumed,
        Err(e) => e.consumed,
    };
    let above = [used, used + 1, used + 17, 2 * used + 5];
    for b in above {
        check(run(b) == full, || format!("budget {b} changed the outcome"))?;
    }
    let below: Vec<u64> = if used <= 256 {
        (0..used).collect()
    } else {
        (0..64)
            .chain((0..64).map(|i| used - 1 - i * (used / 64)))
            .collect()
    };
    for b in below {
        let r = run(b);
        check(
            matches!(&r, Ok(ev) if ev.result.is_oot() && ev.consumed == b),
            || (b, r),
        )?;
    }
    Ok(())
}

fn interpreter_laws() -> Outcome {
    let t = ctors();
    let g = GenConfig::with_seed(0x1A75);
    let mut errors = Vec::new();
    for trial in 0..500 {
        let (e, vs) = gen_open(&g, trial);
        if let Err(msg) = laws(&|b| eval_src(&vs, &e, b, &t)) {
            errors.push(format!("source trial {trial}: {msg}"));
        }
        let closed = gen_src(&g, trial);
        if let Err(msg) = laws(&|b| eval_src(&[], &closed, b, &t)) {
            errors.push(format!("closed source trial {trial}: {msg}"));
        }
        let p = anf_program(&closed, &t, NameSupply::new(0)).unwrap();
        let env = AnfEnv::new();
        if let Err(msg) = laws(&|b| eval_anf(&env, &p, b)) {
            errors.push(format!("target trial {trial}: {msg}"));
        }
    }
    Outcome::new(
        errors.is_empty(),
        match errors.first() {
            None => "determinism, monotonicity and OOT threshold on 500 terms per interpreter"
                .to_string(),
            Some(e) => format!("{} violations, first: {e}", errors.len()),
        },
    )
}

fn render_round_trips() -> Result<String, String> {
    let t = ctors();
    let g = GenConfig::with_seed(0xB0B);
    for trial in 0..TRIALS {
        let e = gen_src(&g, trial);
        check(parse_src(&e.to_string(), &t).as_ref() == Ok(&e), || {
            format!("source {e}")
        })?;
        let out = anf_exp(&e, &[], NameSupply::new(trial), &t).unwrap();
        check(
            parse_ctx(&out.ctx.to_string(), &t).as_ref() == Ok(&out.ctx),
            || format!("context {}", out.ctx),
        )?;
        let p = if trial.is_multiple_of(2) {
            out.program()
        } else {
            cps_program(&e, &t, NameSupply::new(trial)).unwrap()
        };
        check(parse_anf(&p.to_string(), &t).as_ref() == Ok(&p), || {
            format!("target {p}")
        })?;
        let (open, vs) = gen_open(&g, trial);
        check(
            parse_src(&open.to_string(), &t).as_ref() == Ok(&open),
            || format!("source {open}"),
        )?;
        let text = anfbench::syntax::surface::render_src_env(&vs);
        check(parse_src_env(&text, &t).as_ref() == Ok(&vs), || {
            format!("environment {text}")
        })?;
        let v = gen_value(&g, trial);
        check(
            parse_src_value(&v.to_string(), &t).as_ref() == Ok(&v),
            || format!("value {v}"),
        )?;
    }
    Ok(format!("{TRIALS} terms of each kind round-trip"))
}

fn strip_record(mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        for key in ["trial", "input", "input_env"] {
            m.remove(key);
        }
    }
    v
}

fn replays() -> Result<String, String> {
    let r = campaign(Mode::Divergence);
    let failures: Vec<_> = r
        .records
        .iter()
        .filter(|rec| matches!(rec.outcome, TrialOutcome::Fail(_)))
        .collect();
    check(!failures.is_empty(), || "no failures to replay")?;
    for rec in &failures {
        let report = rec.outcome.failure().unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_anfbench"))
            .args(&report.replay[1..])
            .arg("--json")
            .output()
            .map_err(|e| e.to_string())?;
        check(out.status.code() == Some(1), || {
            format!("replay exit {:?}: {}", out.status, report.replay_command())
        })?;
        let stdout = String::from_utf8_lossy(&out.stdout);
        let first = stdout.lines().next().ok_or("replay printed nothing")?;
        let replayed: Value = serde_json::from_str(first).map_err(|e| e.to_string())?;
        let original = serde_json::to_value(&rec.outcome).map_err(|e| e.to_string())?;
        check(strip_record(replayed) == original, || {
            format!("replay differs for `{}`", report.replay_command())
        })?;
    }
    Ok(format!(
        "{} failure reports replay identically",
        failures.len()
    ))
}

fn round_trips() -> Outcome {
    let parts = [render_round_trips(), replays()];
    let ok = parts.iter().all(Result::is_ok);
    let detail: Vec<String> = parts.into_iter().map(|p| p.unwrap_or_else(|e| e)).collect();
    Outcome::new(ok, detail.join("; "))
}
