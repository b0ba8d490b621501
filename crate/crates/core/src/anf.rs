//! The ANF transformation.
//!
//! `anf_exp` maps a source term `e`, a de Bruijn name environment `xs` and a
//! fresh-name supply `S` to a context `C`, a result variable `r` and the
//! remaining supply `S'`, so that `C[halt r]` is the translated program.
//!
//! Names are drawn in a fixed order so the output is deterministic:
//! abstraction draws its parameter and then the function name, a constructor
//! draws its result name before translating its arguments, and application
//! draws its result after both operands. A `match` translates its scrutinee,
//! then draws a join point `j` and its parameter, then each branch's field
//! names; every branch projects its fields, runs its body and tail-calls `j`,
//! and the rest of the program is plugged into the body of `j`.

use std::collections::BTreeSet;

use crate::syntax::{
    alpha_eq_value, free_vars_anf, AnfEnv, AnfExpr, AnfValue, CtorTable, Ctx, NameSupply, SrcExpr,
    SrcValue, Var,
};
use crate::TransformError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnfOutput {
    pub ctx: Ctx,
    pub result: Var,
    pub supply_after: NameSupply,
}

impl AnfOutput {
    /// `C[halt r]`
    pub fn program(&self) -> AnfExpr {
        self.ctx.plug(AnfExpr::Halt(self.result.clone()))
    }
}

pub fn anf_exp(
    e: &SrcExpr,
    xs: &[Var],
    s: NameSupply,
    ctors: &CtorTable,
) -> Result<AnfOutput, TransformError> {
    let mut t = Translator { supply: s, ctors };
    let (ctx, result) = t.exp(e, xs)?;
    Ok(AnfOutput {
        ctx,
        result,
        supply_after: t.supply,
    })
}

/// Translates a sequence left to right, composing the contexts in order.
pub fn anf_exps(
    es: &[SrcExpr],
    xs: &[Var],
    s: NameSupply,
    ctors: &CtorTable,
) -> Result<(Ctx, Vec<Var>, NameSupply), TransformError> {
    let mut t = Translator { supply: s, ctors };
    let (c, ys) = t.exps(es, xs)?;
    Ok((c, ys, t.supply))
}

/// The whole program `C[halt r]` for a closed term.
pub fn anf_program(
    e: &SrcExpr,
    ctors: &CtorTable,
    s: NameSupply,
) -> Result<AnfExpr, TransformError> {
    Ok(anf_exp(e, &[], s, ctors)?.program())
}

/// Translates a source value. Constructor values map structurally. A closure
/// `<env, body>` becomes a one-parameter target closure whose environment
/// binds one fresh name per captured value, with the body translated under
/// `param :: captured names`.
pub fn translate_val(
    v: &SrcValue,
    s: NameSupply,
    ctors: &CtorTable,
) -> Result<(AnfValue, NameSupply), TransformError> {
    let mut t = Translator { supply: s, ctors };
    let out = t.value(v)?;
    Ok((out, t.supply))
}

/// Builds `σ` with `σ(xs[i]) = translate_val(vs[i])`, threading the supply.
///
/// A name that occurs more than once must be bound to values whose
/// translations are alpha-equivalent; the later occurrence wins.
pub fn translate_env(
    xs: &[Var],
    vs: &[SrcValue],
    s: NameSupply,
    ctors: &CtorTable,
) -> Result<(AnfEnv, NameSupply), TransformError> {
    if xs.len() != vs.len() {
        return Err(TransformError::LengthMismatch {
            names: xs.len(),
            values: vs.len(),
        });
    }
    let mut t = Translator { supply: s, ctors };
    let mut env = AnfEnv::new();
    for (x, v) in xs.iter().zip(vs) {
        let tv = t.value(v)?;
        if let Some(prev) = env.get(x) {
            if !alpha_eq_value(prev, &tv) {
                return Err(TransformError::DuplicateName(x.to_string()));
            }
        }
        env.insert(x.clone(), tv);
    }
    Ok((env, t.supply))
}

/// The side condition on continuations: no free variable of `ek` may be a
/// name drawn by the translation other than its result `x`.
pub fn continuation_admissible(
    ek: &AnfExpr,
    before: &NameSupply,
    after: &NameSupply,
    x: &Var,
) -> bool {
    let drawn: BTreeSet<Var> = before.drawn_until(after).collect();
    free_vars_anf(ek)
        .iter()
        .all(|v| v == x || !drawn.contains(v))
}

fn cons(x: Var, xs: &[Var]) -> Vec<Var> {
    let mut out = Vec::with_capacity(xs.len() + 1);
    out.push(x);
    out.extend_from_slice(xs);
    out
}

pub(crate) fn lookup_index(xs: &[Var], n: usize) -> Result<Var, TransformError> {
    xs.get(n).cloned().ok_or(TransformError::IndexOutOfRange {
        index: n,
        depth: xs.len(),
    })
}

pub(crate) fn checked_arity(
    ctors: &CtorTable,
    tag: &crate::syntax::Tag,
    found: Option<usize>,
) -> Result<usize, TransformError> {
    let n = ctors
        .arity(tag)
        .ok_or_else(|| TransformError::UnknownTag(tag.to_string()))?;
    match found {
        Some(k) if k != n => Err(TransformError::Arity {
            tag: tag.to_string(),
            expected: n,
            found: k,
        }),
        _ => Ok(n),
    }
}

struct Translator<'t> {
    supply: NameSupply,
    ctors: &'t CtorTable,
}

impl Translator<'_> {
    fn exp(&mut self, e: &SrcExpr, xs: &[Var]) -> Result<(Ctx, Var), TransformError> {
        match e {
            SrcExpr::Var(n) => Ok((Ctx::Hole, lookup_index(xs, *n)?)),
            SrcExpr::Fun(body) => {
                let x1 = self.supply.fresh();
                let f = self.supply.fresh();
                let (c1, r1) = self.exp(body, &cons(x1.clone(), xs))?;
                let code = c1.plug(AnfExpr::Halt(r1));
                Ok((Ctx::let_fun(f.clone(), vec![x1], code, Ctx::Hole), f))
            }
            SrcExpr::App(e1, e2) => {
                let (c1, x1) = self.exp(e1, xs)?;
                let (c2, x2) = self.exp(e2, xs)?;
                let r = self.supply.fresh();
                let call = Ctx::let_app(r.clone(), x1, vec![x2], Ctx::Hole);
                Ok((c1.compose(c2.compose(call)), r))
            }
            SrcExpr::Con(tag, args) => {
                checked_arity(self.ctors, tag, Some(args.len()))?;
                let z = self.supply.fresh();
                let (c, ys) = self.exps(args, xs)?;
                Ok((
                    c.compose(Ctx::let_con(z.clone(), tag.clone(), ys, Ctx::Hole)),
                    z,
                ))
            }
            SrcExpr::Let(e1, e2) => {
                let (c1, x1) = self.exp(e1, xs)?;
                let (c2, x2) = self.exp(e2, &cons(x1, xs))?;
                Ok((c1.compose(c2), x2))
            }
            SrcExpr::Match(scrutinee, branches) => {
                let (c0, y) = self.exp(scrutinee, xs)?;
                let j = self.supply.fresh();
                let xr = self.supply.fresh();
                let mut arms = Vec::with_capacity(branches.len());
                for (tag, body) in branches {
                    let arity = checked_arity(self.ctors, tag, None)?;
                    let zs: Vec<Var> = (0..arity).map(|_| self.supply.fresh()).collect();
                    let mut inner = zs.iter().rev().cloned().collect::<Vec<_>>();
                    inner.extend_from_slice(xs);
                    let (cb, rb) = self.exp(body, &inner)?;
                    let mut arm = cb.plug(AnfExpr::tail_call(j.clone(), vec![rb]));
                    for (i, z) in zs.into_iter().enumerate().rev() {
                        arm = AnfExpr::proj(z, y.clone(), i, arm);
                    }
                    arms.push((tag.clone(), arm));
                }
                let join = Ctx::join_fun(j, xr.clone(), Ctx::Hole, AnfExpr::case(y, arms));
                Ok((c0.compose(join), xr))
            }
        }
    }

    fn exps(&mut self, es: &[SrcExpr], xs: &[Var]) -> Result<(Ctx, Vec<Var>), TransformError> {
        let mut ctxs = Vec::with_capacity(es.len());
        let mut ys = Vec::with_capacity(es.len());
        for e in es {
            let (c, y) = self.exp(e, xs)?;
            ctxs.push(c);
            ys.push(y);
        }
        let ctx = ctxs
            .into_iter()
            .rev()
            .fold(Ctx::Hole, |acc, c| c.compose(acc));
        Ok((ctx, ys))
    }

    fn value(&mut self, v: &SrcValue) -> Result<AnfValue, TransformError> {
        match v {
            SrcValue::Con(tag, fields) => {
                checked_arity(self.ctors, tag, Some(fields.len()))?;
                let fs = fields
                    .iter()
                    .map(|f| self.value(f))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(AnfValue::Con(tag.clone(), fs.into()))
            }
            SrcValue::Clos(clos) => {
                let x = self.supply.fresh();
                let f = self.supply.fresh();
                let names: Vec<Var> = clos.env.iter().map(|_| self.supply.fresh()).collect();
                let mut env = AnfEnv::new();
                for (n, cv) in names.iter().zip(&clos.env) {
                    let tv = self.value(cv)?;
                    env.insert(n.clone(), tv);
                }
                let (c, r) = self.exp(&clos.body, &cons(x.clone(), &names))?;
                Ok(AnfValue::clos(env, f, vec![x], c.plug(AnfExpr::Halt(r))))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::surface::parse_anf;
    use crate::syntax::{alpha_eq, Tag};

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn t() -> CtorTable {
        CtorTable::standard()
    }

    #[test]
    fn var_rule() {
        let out = anf_exp(
            &SrcExpr::var(1),
            &[v("a"), v("b")],
            NameSupply::new(0),
            &t(),
        )
        .unwrap();
        assert_eq!(out.ctx, Ctx::Hole);
        assert_eq!(out.result, v("b"));
        assert_eq!(out.supply_after.next, 0);
    }

    #[test]
    fn app_rule_on_variables() {
        let e = SrcExpr::app(SrcExpr::var(0), SrcExpr::var(1));
        let out = anf_exp(&e, &[v("x1"), v("x2")], NameSupply::new(0), &t()).unwrap();
        assert_eq!(
            out.ctx,
            Ctx::let_app(v("v0"), v("x1"), vec![v("x2")], Ctx::Hole)
        );
        assert_eq!(out.result, v("v0"));
        assert_eq!(out.supply_after.next, 1);
        assert_eq!(
            out.program(),
            AnfExpr::let_app(v("v0"), v("x1"), vec![v("x2")], AnfExpr::halt("v0"))
        );
    }

    #[test]
    fn lam_rule_draws_parameter_first() {
        let out = anf_exp(
            &SrcExpr::fun(SrcExpr::var(0)),
            &[],
            NameSupply::new(0),
            &t(),
        )
        .unwrap();
        assert_eq!(
            out.ctx,
            Ctx::let_fun(v("v1"), vec![v("v0")], AnfExpr::halt("v0"), Ctx::Hole)
        );
        assert_eq!(out.result, v("v1"));
        assert_eq!(out.supply_after.next, 2);
    }

    #[test]
    fn exps_sequence() {
        let (c, ys, s) = anf_exps(&[], &[v("a")], NameSupply::new(4), &t()).unwrap();
        assert_eq!((c, ys, s.next), (Ctx::Hole, vec![], 4));
        let (c, ys, _) = anf_exps(&[SrcExpr::var(0)], &[v("a")], NameSupply::new(0), &t()).unwrap();
        assert_eq!((c, ys), (Ctx::Hole, vec![v("a")]));
        let es = [SrcExpr::var(0), SrcExpr::fun(SrcExpr::var(0))];
        let (c, ys, s) = anf_exps(&es, &[v("a")], NameSupply::new(0), &t()).unwrap();
        assert_eq!(
            c,
            Ctx::let_fun(v("v1"), vec![v("v0")], AnfExpr::halt("v0"), Ctx::Hole)
        );
        assert_eq!(ys, vec![v("a"), v("v1")]);
        assert_eq!(s.next, 2);
    }

    #[test]
    fn program_examples() {
        let p = anf_program(&SrcExpr::con("Tt", vec![]), &t(), NameSupply::new(0)).unwrap();
        assert_eq!(
            p,
            AnfExpr::let_con(v("v0"), Tag::new("Tt"), vec![], AnfExpr::halt("v0"))
        );

        let id = SrcExpr::fun(SrcExpr::var(0));
        let p = anf_program(&SrcExpr::app(id.clone(), id), &t(), NameSupply::new(0)).unwrap();
        let expected = parse_anf(
            "(letfun v1 (v0) (halt v0) (letfun v3 (v2) (halt v2) (letapp v4 v1 (v3) (halt v4))))",
            &t(),
        )
        .unwrap();
        assert_eq!(p, expected);

        assert_eq!(
            anf_program(&SrcExpr::var(0), &t(), NameSupply::new(0)),
            Err(TransformError::IndexOutOfRange { index: 0, depth: 0 })
        );
    }

    #[test]
    fn constructor_draws_result_before_arguments() {
        let e = SrcExpr::con("Some", vec![SrcExpr::con("Tt", vec![])]);
        let p = anf_program(&e, &t(), NameSupply::new(0)).unwrap();
        let expected =
            parse_anf("(letcon v1 Tt () (letcon v0 Some (v1) (halt v0)))", &t()).unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn match_uses_a_join_point() {
        let e = SrcExpr::match_on(
            SrcExpr::con(
                "Pair",
                vec![SrcExpr::con("Tt", vec![]), SrcExpr::con("Ff", vec![])],
            ),
            vec![(Tag::new("Pair"), SrcExpr::var(1))],
        );
        let p = anf_program(&e, &t(), NameSupply::new(0)).unwrap();
        let expected = parse_anf(
            "(letcon v1 Tt () (letcon v2 Ff () (letcon v0 Pair (v1 v2) \
             (letfun v3 (v4) (halt v4) \
             (case v0 (Pair (proj v5 v0 0 (proj v6 v0 1 (tailcall v3 v5)))))))))",
            &t(),
        )
        .unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn unknown_tags_are_errors() {
        let e = SrcExpr::con("Nope", vec![]);
        assert_eq!(
            anf_program(&e, &t(), NameSupply::new(0)),
            Err(TransformError::UnknownTag("Nope".into()))
        );
    }

    #[test]
    fn value_translation() {
        let tt = SrcValue::con("Tt", vec![]);
        let (tv, _) = translate_val(&tt, NameSupply::new(0), &t()).unwrap();
        assert_eq!(tv, AnfValue::con("Tt", vec![]));
        let pair = SrcValue::con("Pair", vec![tt.clone(), SrcValue::con("Ff", vec![])]);
        let (tv, _) = translate_val(&pair, NameSupply::new(0), &t()).unwrap();
        assert_eq!(
            tv,
            AnfValue::con(
                "Pair",
                vec![AnfValue::con("Tt", vec![]), AnfValue::con("Ff", vec![])]
            )
        );
        let id = SrcValue::clos(vec![], SrcExpr::var(0));
        let (tv, s) = translate_val(&id, NameSupply::new(0), &t()).unwrap();
        assert_eq!(
            tv,
            AnfValue::clos(AnfEnv::new(), v("v1"), vec![v("v0")], AnfExpr::halt("v0"))
        );
        assert_eq!(s.next, 2);
    }

    #[test]
    fn env_translation() {
        let tt = SrcValue::con("Tt", vec![]);
        let (env, _) = translate_env(&[], &[], NameSupply::new(0), &t()).unwrap();
        assert!(env.is_empty());
        let (env, _) = translate_env(
            &[v("a")],
            std::slice::from_ref(&tt),
            NameSupply::new(0),
            &t(),
        )
        .unwrap();
        assert_eq!(env.get(&v("a")), Some(&AnfValue::con("Tt", vec![])));
        let id = SrcValue::clos(vec![], SrcExpr::var(0));
        let (env, _) = translate_env(
            &[v("a"), v("b")],
            &[tt.clone(), id.clone()],
            NameSupply::new(0),
            &t(),
        )
        .unwrap();
        assert_eq!(env.len(), 2);
        // equal values under one name are accepted
        let (env, _) = translate_env(
            &[v("a"), v("a")],
            &[id.clone(), id.clone()],
            NameSupply::new(0),
            &t(),
        )
        .unwrap();
        assert_eq!(env.len(), 1);
        assert_eq!(
            translate_env(
                &[v("a"), v("a")],
                &[tt.clone(), id],
                NameSupply::new(0),
                &t()
            ),
            Err(TransformError::DuplicateName("a".into()))
        );
        assert!(matches!(
            translate_env(&[v("a")], &[], NameSupply::new(0), &t()),
            Err(TransformError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn different_supplies_give_alpha_equivalent_programs() {
        let id = SrcExpr::fun(SrcExpr::var(0));
        let e = SrcExpr::app(id.clone(), id);
        let a = anf_program(&e, &t(), NameSupply::new(0)).unwrap();
        let b = anf_program(&e, &t(), NameSupply::new(100)).unwrap();
        assert_ne!(a, b);
        assert!(alpha_eq(&a, &b));
    }

    #[test]
    fn side_condition() {
        let before = NameSupply::new(0);
        let after = NameSupply::new(3);
        assert!(continuation_admissible(
            &AnfExpr::halt("v2"),
            &before,
            &after,
            &v("v2")
        ));
        assert!(!continuation_admissible(
            &AnfExpr::halt("v1"),
            &before,
            &after,
            &v("v2")
        ));
        assert!(continuation_admissible(
            &AnfExpr::halt("v3"),
            &before,
            &after,
            &v("v2")
        ));
    }
}
