mod common;

use anfbench::anf::{anf_exp, continuation_admissible, translate_env, translate_val};
use anfbench::eval::{eval_src, EvalResult};
use anfbench::logrel::{exp_rel_bounded, AnfConfig, LogRelConfig};
use anfbench::syntax::{free_vars_anf, AnfExpr, NameSupply, Var};
use common::{continuation, ctors, open_term};
use proptest::prelude::*;

const BUDGET: u64 = 10_000;

struct Instance {
    left: AnfConfig,
    right: AnfConfig,
}

/// Builds `(e_k, σ[x ↦ v'])` and `(C[e_k], σ)` for an open source term that
/// terminates, or `None` when it does not or the continuation is inadmissible.
fn instance(seed: u64, ek_seed: u64) -> Option<Instance> {
    let t = ctors();
    let (e, vs) = open_term(seed);
    let v = match eval_src(&vs, &e, BUDGET, &t).ok()?.result {
        EvalResult::Val(v) => v,
        EvalResult::Oot => return None,
    };
    let xs: Vec<Var> = (0..vs.len()).map(|i| Var::new(format!("w{i}"))).collect();
    let (sigma, _) = translate_env(&xs, &vs, NameSupply::with_prefix("u", 0), &t).ok()?;
    let before = NameSupply::new(0);
    let out = anf_exp(&e, &xs, before.clone(), &t).unwrap();
    let (v2, _) = translate_val(&v, NameSupply::with_prefix("p", 0), &t).unwrap();
    let mut pool = xs.clone();
    pool.push(out.result.clone());
    let ek = continuation(ek_seed, &pool, &t);
    if !continuation_admissible(&ek, &before, &out.supply_after, &out.result) {
        return None;
    }
    Some(Instance {
        left: AnfConfig::new(sigma.with(out.result.clone(), v2), ek.clone()),
        right: AnfConfig::new(sigma, out.ctx.plug(ek)),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn translation_is_related_for_every_admissible_continuation(
        seed in any::<u64>(),
        ek_seed in any::<u64>(),
        k in 0u64..=4,
    ) {
        let Some(inst) = instance(seed, ek_seed) else { return Ok(()) };
        let v = exp_rel_bounded(k, &inst.left, &inst.right, &LogRelConfig::default());
        prop_assert!(v.holds(), "{}", v);
    }
}

#[test]
fn whole_programs_are_related_to_their_results() {
    let t = ctors();
    let cfg = LogRelConfig::default();
    let mut checked = 0;
    for seed in 0..300 {
        let e = common::term(seed);
        let Ok(ev) = eval_src(&[], &e, BUDGET, &t) else {
            continue;
        };
        let EvalResult::Val(v) = ev.result else {
            continue;
        };
        let out = anf_exp(&e, &[], NameSupply::new(0), &t).unwrap();
        let (v2, _) = translate_val(&v, NameSupply::with_prefix("p", 0), &t).unwrap();
        let x = out.result.clone();
        let left = AnfConfig::new(Default::default(), AnfExpr::halt(x.clone()));
        let left = AnfConfig::new(left.env.with(x.clone(), v2), left.expr);
        let right = AnfConfig::new(Default::default(), out.program());
        let verdict = exp_rel_bounded(3, &left, &right, &cfg);
        assert!(verdict.holds(), "seed {seed}: {verdict}");
        checked += 1;
    }
    assert!(checked > 150, "only {checked} terminating terms");
}

#[test]
fn a_continuation_capturing_an_intermediate_name_is_inadmissible() {
    let t = ctors();
    let e = anfbench::syntax::surface::parse_src("(app (lam (var 0)) (con Tt))", &t).unwrap();
    let before = NameSupply::new(0);
    let out = anf_exp(&e, &[], before.clone(), &t).unwrap();
    let intermediate = out
        .ctx
        .binders()
        .into_iter()
        .find(|b| *b != out.result)
        .unwrap();
    let ek = AnfExpr::halt(intermediate);
    assert!(!free_vars_anf(&ek).is_empty());
    assert!(!continuation_admissible(
        &ek,
        &before,
        &out.supply_after,
        &out.result
    ));
    assert!(continuation_admissible(
        &AnfExpr::halt(out.result.clone()),
        &before,
        &out.supply_after,
        &out.result
    ));
}
