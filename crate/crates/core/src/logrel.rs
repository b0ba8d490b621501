//! The observation relation between source and target values, and a
//! bounded, executable version of the step-indexed logical relation over
//! target configurations.
//!
//! The universal quantifiers of the relation are replaced by sampling: a
//! closure comparison at index `k` tries a few indices below `k` and a few
//! argument vectors, so a positive answer only means that no violation was
//! found within the bounds.

use std::fmt;

use serde::Serialize;

use crate::anf::translate_val;
use crate::eval::{anf::call_env, eval_anf, EvalResult};
use crate::syntax::{AnfEnv, AnfExpr, AnfValue, CtorTable, NameSupply, SrcValue};
use crate::testgen::{derive_seed, gen_src_value};

/// `v ≈ v'`: equal constructors with related fields; closures always match.
pub fn obs_rel(v: &SrcValue, v2: &AnfValue) -> bool {
    match (v, v2) {
        (SrcValue::Con(t1, f1), AnfValue::Con(t2, f2)) => {
            t1 == t2 && f1.len() == f2.len() && f1.iter().zip(f2.iter()).all(|(a, b)| obs_rel(a, b))
        }
        (SrcValue::Clos(_), AnfValue::Clos(_)) => true,
        _ => false,
    }
}

#[derive(Clone, Debug)]
pub struct LogRelConfig {
    pub eval_budget: u64,
    pub witness_budget: u64,
    pub closure_samples: usize,
    pub sample_seed: u64,
    pub ctors: CtorTable,
}

impl Default for LogRelConfig {
    fn default() -> Self {
        LogRelConfig {
            eval_budget: 10_000,
            witness_budget: 200_000,
            closure_samples: 3,
            sample_seed: 0,
            ctors: CtorTable::standard(),
        }
    }
}

/// An environment and an expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnfConfig {
    pub env: AnfEnv,
    pub expr: AnfExpr,
}

impl AnfConfig {
    pub fn new(env: AnfEnv, expr: AnfExpr) -> Self {
        AnfConfig { env, expr }
    }
}

impl fmt::Display for AnfConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.env, self.expr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub reason: String,
    pub left: String,
    pub right: String,
    pub k: u64,
    pub eval_budget: u64,
    pub witness_budget: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    HoldsUpToBounds,
    Fails(Box<Witness>),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsUpToBounds)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::HoldsUpToBounds => f.write_str("HoldsUpToBounds"),
            Verdict::Fails(w) => write!(
                f,
                "Fails at k={} (eval budget {}, witness budget {}, seed {}): {}\n  left:  {}\n  right: {}",
                w.k, w.eval_budget, w.witness_budget, w.seed, w.reason, w.left, w.right
            ),
        }
    }
}

pub fn val_rel_bounded(k: u64, v1: &AnfValue, v2: &AnfValue, cfg: &LogRelConfig) -> Verdict {
    let r = Checker { cfg }.val(k, v1, v2, 0);
    verdict(r, k, v1.to_string(), v2.to_string(), cfg)
}

pub fn exp_rel_bounded(k: u64, c1: &AnfConfig, c2: &AnfConfig, cfg: &LogRelConfig) -> Verdict {
    let r = Checker { cfg }.exp(k, c1, c2, 0);
    verdict(r, k, c1.to_string(), c2.to_string(), cfg)
}

fn verdict(
    r: Result<(), String>,
    k: u64,
    left: String,
    right: String,
    cfg: &LogRelConfig,
) -> Verdict {
    match r {
        Ok(()) => Verdict::HoldsUpToBounds,
        Err(reason) => Verdict::Fails(Box::new(Witness {
            reason,
            left,
            right,
            k,
            eval_budget: cfg.eval_budget,
            witness_budget: cfg.witness_budget,
            seed: cfg.sample_seed,
        })),
    }
}

/// Indices tried below `k`: all of them for small `k`, else `0`, `k/2` and
/// `k-1`. Always containing `k-1` keeps failures stable as `k` grows.
pub fn sampled_indices(k: u64) -> Vec<u64> {
    if k <= 4 {
        (0..k).collect()
    } else {
        vec![0, k / 2, k - 1]
    }
}

struct Checker<'c> {
    cfg: &'c LogRelConfig,
}

impl Checker<'_> {
    fn val(&self, k: u64, v1: &AnfValue, v2: &AnfValue, depth: u64) -> Result<(), String> {
        match (v1, v2) {
            (AnfValue::Con(t1, f1), AnfValue::Con(t2, f2)) => {
                if t1 != t2 {
                    return Err(format!("constructor `{t1}` against `{t2}`"));
                }
                if f1.len() != f2.len() {
                    return Err(format!(
                        "`{t1}` with {} fields against {}",
                        f1.len(),
                        f2.len()
                    ));
                }
                for (i, (a, b)) in f1.iter().zip(f2.iter()).enumerate() {
                    self.val(k, a, b, depth)
                        .map_err(|e| format!("field {i} of `{t1}`: {e}"))?;
                }
                Ok(())
            }
            (AnfValue::Clos(c1), AnfValue::Clos(c2)) => {
                if k == 0 {
                    return Ok(());
                }
                let n = c1.params.len();
                for j in 0..self.cfg.closure_samples {
                    let (args1, args2) = self.related_args(n, depth, j as u64);
                    if c2.params.len() != args2.len() {
                        return Err(format!(
                            "closure `{}` takes {} arguments, `{}` takes {}",
                            c1.name,
                            n,
                            c2.name,
                            c2.params.len()
                        ));
                    }
                    let env1 = call_env(c1, args1.clone()).expect("arity checked");
                    let env2 = call_env(c2, args2.clone()).expect("arity checked");
                    let body1 = AnfConfig::new(env1, (*c1.body).clone());
                    let body2 = AnfConfig::new(env2, (*c2.body).clone());
                    for i in sampled_indices(k) {
                        self.exp(i, &body1, &body2, depth + 1).map_err(|e| {
                            format!(
                                "applying `{}` and `{}` to ({}) / ({}) at index {i}: {e}",
                                c1.name,
                                c2.name,
                                render(&args1),
                                render(&args2)
                            )
                        })?;
                    }
                }
                Ok(())
            }
            (AnfValue::Con(t, _), AnfValue::Clos(_)) => {
                Err(format!("constructor `{t}` against a closure"))
            }
            (AnfValue::Clos(_), AnfValue::Con(t, _)) => {
                Err(format!("closure against constructor `{t}`"))
            }
        }
    }

    fn exp(&self, k: u64, c1: &AnfConfig, c2: &AnfConfig, depth: u64) -> Result<(), String> {
        let v1 = match eval_anf(&c1.env, &c1.expr, self.cfg.eval_budget) {
            // no evaluation of the left side reaches a result
            Err(_) => return Ok(()),
            Ok(ev) => match ev.result {
                EvalResult::Oot => return Ok(()),
                EvalResult::Val(v) => v,
            },
        };
        let v2 = match eval_anf(&c2.env, &c2.expr, self.cfg.witness_budget) {
            Err(stuck) => {
                return Err(format!(
                    "left yields {v1}, right is stuck: {}",
                    stuck.reason
                ))
            }
            Ok(ev) => match ev.result {
                EvalResult::Oot => {
                    return Err(format!(
                        "left yields {v1}, right has no value within {} steps",
                        self.cfg.witness_budget
                    ))
                }
                EvalResult::Val(v) => v,
            },
        };
        self.val(k, &v1, &v2, depth)
    }

    /// Argument vectors related by construction: source values translated
    /// twice with disjoint name supplies.
    fn related_args(&self, n: usize, depth: u64, j: u64) -> (Vec<AnfValue>, Vec<AnfValue>) {
        let seed = derive_seed(&[self.cfg.sample_seed, depth, j]);
        let mut rng = crate::testgen::trial_rng(seed, n as u64);
        let mut a1 = Vec::with_capacity(n);
        let mut a2 = Vec::with_capacity(n);
        for _ in 0..n {
            let v = gen_src_value(&mut rng, &self.cfg.ctors, 2);
            let (x, _) = translate_val(&v, NameSupply::new(0), &self.cfg.ctors)
                .expect("generated values are well formed");
            let (y, _) = translate_val(&v, NameSupply::new(1000), &self.cfg.ctors)
                .expect("generated values are well formed");
            a1.push(x);
            a2.push(y);
        }
        (a1, a2)
    }
}

fn render(vs: &[AnfValue]) -> String {
    vs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{SrcExpr, Var};

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn tt() -> AnfValue {
        AnfValue::con("Tt", vec![])
    }

    fn id(name: &str) -> AnfValue {
        AnfValue::clos(AnfEnv::new(), v(name), vec![v("x")], AnfExpr::halt("x"))
    }

    #[test]
    fn observation_relation() {
        let s_tt = SrcValue::con("Tt", vec![]);
        assert!(obs_rel(&s_tt, &tt()));
        assert!(!obs_rel(&s_tt, &AnfValue::con("Ff", vec![])));
        assert!(obs_rel(&SrcValue::clos(vec![], SrcExpr::var(0)), &id("f")));
        assert!(!obs_rel(&s_tt, &id("f")));
        let pair = SrcValue::con("Pair", vec![s_tt.clone(), s_tt]);
        assert!(obs_rel(&pair, &AnfValue::con("Pair", vec![tt(), tt()])));
        assert!(!obs_rel(
            &pair,
            &AnfValue::con("Pair", vec![tt(), AnfValue::con("Ff", vec![])])
        ));
    }

    #[test]
    fn value_relation_basics() {
        let cfg = LogRelConfig::default();
        assert!(val_rel_bounded(5, &tt(), &tt(), &cfg).holds());
        assert!(val_rel_bounded(
            0,
            &id("f"),
            &AnfValue::clos(AnfEnv::new(), v("g"), vec![], AnfExpr::halt("g")),
            &cfg
        )
        .holds());
        assert!(!val_rel_bounded(0, &tt(), &id("f"), &cfg).holds());
        assert!(val_rel_bounded(3, &id("f"), &id("g"), &cfg).holds());
        // a closure that ignores its argument is not related to the identity
        let konst = AnfValue::clos(
            AnfEnv::new(),
            v("h"),
            vec![v("x")],
            AnfExpr::let_con(v("z"), "Ff".into(), vec![], AnfExpr::halt("z")),
        );
        let cfg = LogRelConfig {
            closure_samples: 8,
            ..LogRelConfig::default()
        };
        assert!(!val_rel_bounded(1, &id("f"), &konst, &cfg).holds());
    }

    #[test]
    fn arity_mismatch_fails() {
        let two = AnfValue::clos(
            AnfEnv::new(),
            v("g"),
            vec![v("x"), v("y")],
            AnfExpr::halt("x"),
        );
        assert!(!val_rel_bounded(1, &id("f"), &two, &LogRelConfig::default()).holds());
    }

    #[test]
    fn expression_relation_examples() {
        let cfg = LogRelConfig::default();
        let env: AnfEnv = [(v("y"), tt()), (v("f"), id("f"))].into_iter().collect();
        let c = AnfConfig::new(env.clone(), AnfExpr::halt("y"));
        assert!(exp_rel_bounded(4, &c, &c, &cfg).holds());

        let spin = AnfExpr::let_fun(
            v("g"),
            vec![],
            AnfExpr::tail_call(v("g"), vec![]),
            AnfExpr::tail_call(v("g"), vec![]),
        );
        let oot = AnfConfig::new(AnfEnv::new(), spin);
        assert!(exp_rel_bounded(4, &oot, &c, &cfg).holds());
        assert!(!exp_rel_bounded(4, &c, &oot, &cfg).holds());

        let ek = AnfExpr::let_con(v("w"), "Some".into(), vec![v("x")], AnfExpr::halt("w"));
        let inlined = AnfConfig::new(env.with(v("x"), tt()), ek.clone());
        let redex = AnfConfig::new(env, AnfExpr::let_app(v("x"), v("f"), vec![v("y")], ek));
        assert!(exp_rel_bounded(6, &inlined, &redex, &cfg).holds());
        assert!(exp_rel_bounded(6, &redex, &inlined, &cfg).holds());
    }

    #[test]
    fn index_samples() {
        assert_eq!(sampled_indices(0), Vec::<u64>::new());
        assert_eq!(sampled_indices(3), vec![0, 1, 2]);
        assert_eq!(sampled_indices(8), vec![0, 4, 7]);
    }
}
