use std::sync::Arc;

use super::{deeper, Evaluation, Halt, Meter, Stuck, StuckError};
use crate::syntax::{AnfClosure, AnfEnv, AnfExpr, AnfValue, Var};

/// `σ ⊢ e ⇓^budget r` for the target language.
///
/// One unit per rule. A non-tail call charges its unit before the callee body
/// runs; the callee sees its captured environment extended with the
/// parameters and then with its own name bound to the closure.
pub fn eval_anf(
    env: &AnfEnv,
    e: &AnfExpr,
    budget: u64,
) -> Result<Evaluation<AnfValue>, StuckError> {
    let mut m = Machine {
        meter: Meter::new(budget),
    };
    let r = m.run(env.clone(), e);
    m.meter.finish(r)
}

/// The environment a closure body runs in when applied to `args`.
pub fn call_env(clos: &Arc<AnfClosure>, args: Vec<AnfValue>) -> Result<AnfEnv, Stuck> {
    if clos.params.len() != args.len() {
        return Err(Stuck::ArityMismatch {
            expected: clos.params.len(),
            found: args.len(),
        });
    }
    let mut env = clos.env.clone();
    for (p, v) in clos.params.iter().zip(args) {
        env.insert(p.clone(), v);
    }
    env.insert(clos.name.clone(), AnfValue::Clos(clos.clone()));
    Ok(env)
}

enum Code<'a> {
    Borrowed(&'a AnfExpr),
    Shared(Arc<AnfExpr>),
}

impl Code<'_> {
    fn get(&self) -> &AnfExpr {
        match self {
            Code::Borrowed(e) => e,
            Code::Shared(e) => e,
        }
    }
}

fn lookup(env: &AnfEnv, x: &Var) -> Result<AnfValue, Halt> {
    env.get(x).cloned().ok_or_else(|| Stuck::unbound(x).into())
}

fn lookup_all(env: &AnfEnv, xs: &[Var]) -> Result<Vec<AnfValue>, Halt> {
    xs.iter().map(|x| lookup(env, x)).collect()
}

fn enter(env: &AnfEnv, f: &Var, args: &[Var]) -> Result<(AnfEnv, Arc<AnfExpr>), Halt> {
    let AnfValue::Clos(clos) = lookup(env, f)? else {
        return Err(Stuck::NotAClosure.into());
    };
    let vals = lookup_all(env, args)?;
    let body_env = call_env(&clos, vals)?;
    Ok((body_env, clos.body.clone()))
}

struct Machine {
    meter: Meter,
}

impl Machine {
    fn run(&mut self, mut env: AnfEnv, e: &AnfExpr) -> Result<AnfValue, Halt> {
        let mut code = Code::Borrowed(e);
        loop {
            let next = {
                let mut cur = code.get();
                loop {
                    self.meter.tick()?;
                    match cur {
                        AnfExpr::LetCon { x, tag, args, rest } => {
                            let fields = lookup_all(&env, args)?;
                            env.insert(x.clone(), AnfValue::Con(tag.clone(), fields.into()));
                            cur = rest;
                        }
                        AnfExpr::Proj { x, y, index, rest } => {
                            let AnfValue::Con(_, fields) = lookup(&env, y)? else {
                                return Err(Stuck::NotAConstructor.into());
                            };
                            let Some(v) = fields.get(*index) else {
                                return Err(Stuck::FieldOutOfRange {
                                    index: *index,
                                    fields: fields.len(),
                                }
                                .into());
                            };
                            env.insert(x.clone(), v.clone());
                            cur = rest;
                        }
                        AnfExpr::LetFun {
                            f,
                            params,
                            body,
                            rest,
                        } => {
                            let clos = AnfValue::Clos(Arc::new(AnfClosure {
                                env: env.clone(),
                                name: f.clone(),
                                params: params.clone(),
                                body: body.clone(),
                            }));
                            env.insert(f.clone(), clos);
                            cur = rest;
                        }
                        AnfExpr::LetApp { x, f, args, rest } => {
                            let (body_env, body) = enter(&env, f, args)?;
                            let v = deeper(|| self.run(body_env, &body))?;
                            env.insert(x.clone(), v);
                            cur = rest;
                        }
                        AnfExpr::Case { y, branches } => {
                            let AnfValue::Con(tag, _) = lookup(&env, y)? else {
                                return Err(Stuck::NotAConstructor.into());
                            };
                            let Some((_, b)) = branches.iter().find(|(t, _)| *t == tag) else {
                                return Err(Stuck::no_branch(&tag).into());
                            };
                            cur = b;
                        }
                        AnfExpr::TailCall { f, args } => {
                            let (body_env, body) = enter(&env, f, args)?;
                            env = body_env;
                            break body;
                        }
                        AnfExpr::Halt(x) => return lookup(&env, x),
                    }
                }
            };
            code = Code::Shared(next);
        }
    }
}
