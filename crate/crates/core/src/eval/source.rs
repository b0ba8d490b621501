use std::sync::Arc;

use super::{deeper, Evaluation, Halt, Meter, Stuck, StuckError};
use crate::syntax::{CtorTable, SrcClosure, SrcExpr, SrcValue};

/// `env ⊢ e ⇓^budget r` for the source language. `env[0]` is de Bruijn index 0.
///
/// Every rule costs one unit: variables and abstractions cost 1, and
/// compound forms cost 1 plus the cost of their premises. A match pushes the
/// fields of the scrutinee left to right, so the last field is index 0.
pub fn eval_src(
    env: &[SrcValue],
    e: &SrcExpr,
    budget: u64,
    ctors: &CtorTable,
) -> Result<Evaluation<SrcValue>, StuckError> {
    let mut m = Machine {
        meter: Meter::new(budget),
        ctors,
    };
    let r = m.eval(env.to_vec(), e);
    m.meter.finish(r)
}

enum Code<'a> {
    Borrowed(&'a SrcExpr),
    Shared(Arc<SrcExpr>),
}

impl Code<'_> {
    fn get(&self) -> &SrcExpr {
        match self {
            Code::Borrowed(e) => e,
            Code::Shared(e) => e,
        }
    }
}

struct Machine<'t> {
    meter: Meter,
    ctors: &'t CtorTable,
}

impl Machine<'_> {
    fn sub(&mut self, env: &[SrcValue], e: &SrcExpr) -> Result<SrcValue, Halt> {
        deeper(|| self.eval(env.to_vec(), e))
    }

    fn eval(&mut self, mut env: Vec<SrcValue>, e: &SrcExpr) -> Result<SrcValue, Halt> {
        let mut code = Code::Borrowed(e);
        loop {
            let next = {
                let mut cur = code.get();
                loop {
                    self.meter.tick()?;
                    match cur {
                        SrcExpr::Var(n) => {
                            return env
                                .get(*n)
                                .cloned()
                                .ok_or(Halt::Stuck(Stuck::UnboundIndex { index: *n }));
                        }
                        SrcExpr::Fun(body) => {
                            return Ok(SrcValue::Clos(Arc::new(SrcClosure {
                                env,
                                body: body.clone(),
                            })));
                        }
                        SrcExpr::Let(bound, body) => {
                            let v = self.sub(&env, bound)?;
                            env.insert(0, v);
                            cur = body;
                        }
                        SrcExpr::App(fun, arg) => {
                            let f = self.sub(&env, fun)?;
                            let a = self.sub(&env, arg)?;
                            let SrcValue::Clos(clos) = f else {
                                return Err(Stuck::NotAClosure.into());
                            };
                            env = Vec::with_capacity(clos.env.len() + 1);
                            env.push(a);
                            env.extend(clos.env.iter().cloned());
                            break clos.body.clone();
                        }
                        SrcExpr::Con(tag, args) => {
                            if let Some(n) = self.ctors.arity(tag) {
                                if n != args.len() {
                                    return Err(Stuck::ArityMismatch {
                                        expected: n,
                                        found: args.len(),
                                    }
                                    .into());
                                }
                            }
                            let mut fields = Vec::with_capacity(args.len());
                            for a in args {
                                fields.push(self.sub(&env, a)?);
                            }
                            return Ok(SrcValue::Con(tag.clone(), fields.into()));
                        }
                        SrcExpr::Match(scrutinee, branches) => {
                            let v = self.sub(&env, scrutinee)?;
                            let SrcValue::Con(tag, fields) = v else {
                                return Err(Stuck::NotAConstructor.into());
                            };
                            let Some((_, body)) = branches.iter().find(|(t, _)| *t == tag) else {
                                return Err(Stuck::no_branch(&tag).into());
                            };
                            let mut pushed = Vec::with_capacity(fields.len() + env.len());
                            pushed.extend(fields.iter().rev().cloned());
                            pushed.append(&mut env);
                            env = pushed;
                            cur = body;
                        }
                    }
                }
            };
            code = Code::Shared(next);
        }
    }
}
