//! Call-by-value CPS into the target language.
//!
//! User functions take their argument and a continuation. Continuations are
//! ordinary one-parameter local functions, named from the shared counter
//! with the `k` prefix; every one of them is an administrative redex and is
//! counted. No administrative contraction is done.

use crate::anf::{checked_arity, lookup_index};
use crate::syntax::{AnfExpr, CtorTable, NameSupply, SrcExpr, Tag, Var};
use crate::TransformError;

pub const CONT_PREFIX: &str = "k";
const JOIN_PREFIX: &str = "j";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CpsOutput {
    pub expr: AnfExpr,
    pub supply_after: NameSupply,
    pub admin_count: usize,
}

/// `[e]_k` under the name environment `xs`.
pub fn cps_exp(
    e: &SrcExpr,
    xs: &[Var],
    k: &Var,
    s: NameSupply,
    ctors: &CtorTable,
) -> Result<CpsOutput, TransformError> {
    let mut c = Cps {
        supply: s,
        ctors,
        admin: 0,
    };
    let expr = c.exp(e, xs, k)?;
    Ok(CpsOutput {
        expr,
        supply_after: c.supply,
        admin_count: c.admin,
    })
}

/// `letfun k (x) = halt x in [e]_k` for a closed term.
pub fn cps_program(
    e: &SrcExpr,
    ctors: &CtorTable,
    s: NameSupply,
) -> Result<AnfExpr, TransformError> {
    let mut s = s;
    let k = s.fresh_with(CONT_PREFIX);
    let x = s.fresh();
    let out = cps_exp(e, &[], &k, s, ctors)?;
    Ok(AnfExpr::let_fun(
        k,
        vec![x.clone()],
        AnfExpr::Halt(x),
        out.expr,
    ))
}

pub fn admin_redex_count(out: &CpsOutput) -> usize {
    out.admin_count
}

struct Cps<'t> {
    supply: NameSupply,
    ctors: &'t CtorTable,
    admin: usize,
}

impl Cps<'_> {
    fn cont(&mut self) -> Var {
        self.admin += 1;
        self.supply.fresh_with(CONT_PREFIX)
    }

    fn exp(&mut self, e: &SrcExpr, xs: &[Var], k: &Var) -> Result<AnfExpr, TransformError> {
        crate::eval::deeper(|| self.exp_inner(e, xs, k))
    }

    fn exp_inner(&mut self, e: &SrcExpr, xs: &[Var], k: &Var) -> Result<AnfExpr, TransformError> {
        match e {
            SrcExpr::Var(n) => Ok(AnfExpr::tail_call(k.clone(), vec![lookup_index(xs, *n)?])),
            SrcExpr::Fun(body) => {
                let f = self.supply.fresh();
                let x = self.supply.fresh();
                let j = self.supply.fresh_with(JOIN_PREFIX);
                let code = self.exp(body, &cons(x.clone(), xs), &j)?;
                Ok(AnfExpr::let_fun(
                    f.clone(),
                    vec![x, j],
                    code,
                    AnfExpr::tail_call(k.clone(), vec![f]),
                ))
            }
            SrcExpr::App(e1, e2) => {
                let k1 = self.cont();
                let m = self.supply.fresh();
                let k2 = self.cont();
                let n = self.supply.fresh();
                let first = self.exp(e1, xs, &k1)?;
                let second = self.exp(e2, xs, &k2)?;
                let call = AnfExpr::tail_call(m.clone(), vec![n.clone(), k.clone()]);
                Ok(AnfExpr::let_fun(
                    k1,
                    vec![m],
                    AnfExpr::let_fun(k2, vec![n], call, second),
                    first,
                ))
            }
            SrcExpr::Let(e1, e2) => {
                let k1 = self.cont();
                let x1 = self.supply.fresh();
                let bound = self.exp(e1, xs, &k1)?;
                let body = self.exp(e2, &cons(x1.clone(), xs), k)?;
                Ok(AnfExpr::let_fun(k1, vec![x1], body, bound))
            }
            SrcExpr::Con(tag, args) => {
                checked_arity(self.ctors, tag, Some(args.len()))?;
                let z = self.supply.fresh();
                self.fields(tag, args, xs, k, z, Vec::with_capacity(args.len()))
            }
            SrcExpr::Match(scrutinee, branches) => {
                let k0 = self.cont();
                let y = self.supply.fresh();
                let mut arms = Vec::with_capacity(branches.len());
                for (tag, body) in branches {
                    let arity = checked_arity(self.ctors, tag, None)?;
                    let zs: Vec<Var> = (0..arity).map(|_| self.supply.fresh()).collect();
                    let mut inner: Vec<Var> = zs.iter().rev().cloned().collect();
                    inner.extend_from_slice(xs);
                    let mut arm = self.exp(body, &inner, k)?;
                    for (i, z) in zs.into_iter().enumerate().rev() {
                        arm = AnfExpr::proj(z, y.clone(), i, arm);
                    }
                    arms.push((tag.clone(), arm));
                }
                let scrut = self.exp(scrutinee, xs, &k0)?;
                Ok(AnfExpr::let_fun(
                    k0,
                    vec![y.clone()],
                    AnfExpr::case(y, arms),
                    scrut,
                ))
            }
        }
    }

    /// Evaluates `args` left to right, each into its own continuation, then
    /// builds the value and passes it to `k`.
    fn fields(
        &mut self,
        tag: &Tag,
        args: &[SrcExpr],
        xs: &[Var],
        k: &Var,
        z: Var,
        mut ys: Vec<Var>,
    ) -> Result<AnfExpr, TransformError> {
        let Some((first, rest)) = args.split_first() else {
            return Ok(AnfExpr::let_con(
                z.clone(),
                tag.clone(),
                ys,
                AnfExpr::tail_call(k.clone(), vec![z]),
            ));
        };
        let ki = self.cont();
        let yi = self.supply.fresh();
        ys.push(yi.clone());
        let inner = self.fields(tag, rest, xs, k, z, ys)?;
        let arg = self.exp(first, xs, &ki)?;
        Ok(AnfExpr::let_fun(ki, vec![yi], inner, arg))
    }
}

fn cons(x: Var, xs: &[Var]) -> Vec<Var> {
    let mut out = Vec::with_capacity(xs.len() + 1);
    out.push(x);
    out.extend_from_slice(xs);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval_anf, EvalResult};
    use crate::syntax::surface::parse_anf;
    use crate::syntax::{alpha_eq, AnfEnv, AnfValue};

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn t() -> CtorTable {
        CtorTable::standard()
    }

    fn continuations(e: &AnfExpr) -> usize {
        e.binders()
            .iter()
            .filter(|b| b.supply_index(CONT_PREFIX).is_some())
            .count()
    }

    #[test]
    fn value_cases() {
        let out = cps_exp(
            &SrcExpr::var(0),
            &[v("a")],
            &v("k"),
            NameSupply::new(0),
            &t(),
        )
        .unwrap();
        assert_eq!(out.expr, AnfExpr::tail_call(v("k"), vec![v("a")]));
        assert_eq!(admin_redex_count(&out), 0);

        let out = cps_exp(
            &SrcExpr::fun(SrcExpr::var(0)),
            &[],
            &v("k"),
            NameSupply::new(0),
            &t(),
        )
        .unwrap();
        let expected = parse_anf("(letfun f (x j) (tailcall j x) (tailcall k f))", &t()).unwrap();
        assert!(alpha_eq(&out.expr, &expected), "{}", out.expr);
        assert_eq!(out.admin_count, 0);
    }

    #[test]
    fn application_emits_two_continuations() {
        let e = SrcExpr::app(SrcExpr::var(0), SrcExpr::var(1));
        let out = cps_exp(&e, &[v("x1"), v("x2")], &v("k"), NameSupply::new(0), &t()).unwrap();
        let expected = parse_anf(
            "(letfun c1 (m) (letfun c2 (n) (tailcall m n k) (tailcall c2 x2)) (tailcall c1 x1))",
            &t(),
        )
        .unwrap();
        assert!(alpha_eq(&out.expr, &expected), "{}", out.expr);
        assert_eq!(out.admin_count, 2);

        let e = SrcExpr::app(e, SrcExpr::var(2));
        let out = cps_exp(
            &e,
            &[v("a"), v("b"), v("c")],
            &v("k"),
            NameSupply::new(0),
            &t(),
        )
        .unwrap();
        assert_eq!(out.admin_count, 4);
        assert_eq!(continuations(&out.expr), 4);
    }

    #[test]
    fn constant_program() {
        let p = cps_program(&SrcExpr::con("Tt", vec![]), &t(), NameSupply::new(0)).unwrap();
        let expected = parse_anf(
            "(letfun k (x) (halt x) (letcon z Tt () (tailcall k z)))",
            &t(),
        )
        .unwrap();
        assert!(alpha_eq(&p, &expected), "{p}");
    }

    #[test]
    fn runs_end_to_end() {
        let e = SrcExpr::app(SrcExpr::fun(SrcExpr::var(0)), SrcExpr::con("Tt", vec![]));
        let p = cps_program(&e, &t(), NameSupply::new(0)).unwrap();
        let r = eval_anf(&AnfEnv::new(), &p, 1000).unwrap();
        assert_eq!(r.result, EvalResult::Val(AnfValue::con("Tt", vec![])));

        let e = SrcExpr::match_on(
            SrcExpr::con(
                "Pair",
                vec![SrcExpr::con("Tt", vec![]), SrcExpr::con("Ff", vec![])],
            ),
            vec![(
                Tag::new("Pair"),
                SrcExpr::let_in(SrcExpr::var(1), SrcExpr::con("Some", vec![SrcExpr::var(0)])),
            )],
        );
        let p = cps_program(&e, &t(), NameSupply::new(0)).unwrap();
        let r = eval_anf(&AnfEnv::new(), &p, 1000).unwrap();
        assert_eq!(
            r.result,
            EvalResult::Val(AnfValue::con("Some", vec![AnfValue::con("Tt", vec![])]))
        );
    }

    #[test]
    fn open_terms_are_rejected() {
        assert!(matches!(
            cps_program(&SrcExpr::var(0), &t(), NameSupply::new(0)),
            Err(TransformError::IndexOutOfRange { .. })
        ));
    }
}
