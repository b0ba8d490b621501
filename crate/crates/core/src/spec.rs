//! Checker for the relational specification of the ANF transformation.
//!
//! The judgment relates a name set `S`, a source term `e`, a name
//! environment `xs`, a context `C`, a result `r` and a residual set `S'`.
//! Given everything but `S'`, a derivation is reconstructed by recursion on
//! `e` while walking the spine of `C`; each rule consumes the frames it is
//! responsible for and hands the rest to the next premise.
//!
//! Binders are only required to be members of `S` that no other rule in the
//! derivation has used. Draw order is not checked.

use std::fmt;

use serde::Serialize;

use crate::syntax::{AnfExpr, CoFiniteSet, CtorTable, Ctx, NameSupply, SrcExpr, Tag, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JudgmentQuery {
    pub supply_before: NameSupply,
    pub e: SrcExpr,
    pub xs: Vec<Var>,
    pub ctx: Ctx,
    pub result: Var,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    ShapeMismatch,
    NonFreshBinder,
    ResultVarMismatch,
    IndexOutOfRange,
    ArityMismatch,
    SupplyViolation,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::ShapeMismatch => "ShapeMismatch",
            RejectReason::NonFreshBinder => "NonFreshBinder",
            RejectReason::ResultVarMismatch => "ResultVarMismatch",
            RejectReason::IndexOutOfRange => "IndexOutOfRange",
            RejectReason::ArityMismatch => "ArityMismatch",
            RejectReason::SupplyViolation => "SupplyViolation",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub reason: RejectReason,
    pub detail: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecVerdict {
    /// The residual name set `S'`.
    Accepted(CoFiniteSet),
    Rejected(Rejection),
}

impl SpecVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, SpecVerdict::Accepted(_))
    }

    pub fn reason(&self) -> Option<RejectReason> {
        match self {
            SpecVerdict::Accepted(_) => None,
            SpecVerdict::Rejected(r) => Some(r.reason),
        }
    }
}

impl fmt::Display for SpecVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecVerdict::Accepted(s) => {
                write!(f, "Accepted: S' = {{{}n | n >= {}}}", s.prefix, s.floor)?;
                if !s.removed.is_empty() {
                    let names: Vec<String> = s
                        .removed
                        .iter()
                        .map(|m| format!("{}{m}", s.prefix))
                        .collect();
                    write!(f, " \\ {{{}}}", names.join(", "))?;
                }
                Ok(())
            }
            SpecVerdict::Rejected(r) => write!(f, "Rejected: {r}"),
        }
    }
}

pub fn check_judgment(q: &JudgmentQuery, ctors: &CtorTable) -> SpecVerdict {
    let initial = CoFiniteSet::from(&q.supply_before);
    let mut d = Deriver {
        ctors,
        current: initial.clone(),
        initial,
    };
    let outcome = d
        .derive(&q.e, &q.xs, Cursor::Ctx(&q.ctx))
        .and_then(|(r, rest)| {
            if !matches!(rest, Cursor::Ctx(Ctx::Hole)) {
                return Err(reject(
                    RejectReason::ShapeMismatch,
                    "context has frames left over",
                ));
            }
            if r != q.result {
                return Err(reject(
                    RejectReason::ResultVarMismatch,
                    format!("derivation yields `{r}`, query names `{}`", q.result),
                ));
            }
            Ok(())
        });
    match outcome {
        Ok(()) => SpecVerdict::Accepted(d.current),
        Err(r) => SpecVerdict::Rejected(r),
    }
}

fn reject(reason: RejectReason, detail: impl Into<String>) -> Rejection {
    Rejection {
        reason,
        detail: detail.into(),
    }
}

/// A position in the spine being matched. Inside a function body the spine
/// is an expression whose hole is its final `halt` or `tailcall`.
#[derive(Clone, Copy, Debug)]
enum Cursor<'a> {
    Ctx(&'a Ctx),
    Expr(&'a AnfExpr),
}

enum Head<'a> {
    LetCon {
        x: &'a Var,
        tag: &'a Tag,
        args: &'a [Var],
        next: Cursor<'a>,
    },
    Proj {
        x: &'a Var,
        y: &'a Var,
        index: usize,
        next: Cursor<'a>,
    },
    LetApp {
        x: &'a Var,
        f: &'a Var,
        args: &'a [Var],
        next: Cursor<'a>,
    },
    LetFun {
        f: &'a Var,
        params: &'a [Var],
        body: Cursor<'a>,
        rest: Cursor<'a>,
    },
    End,
}

impl<'a> Cursor<'a> {
    fn head(self) -> Head<'a> {
        match self {
            Cursor::Ctx(c) => match c {
                Ctx::Hole => Head::End,
                Ctx::LetCon { x, tag, args, rest } => Head::LetCon {
                    x,
                    tag,
                    args,
                    next: Cursor::Ctx(rest),
                },
                Ctx::Proj { x, y, index, rest } => Head::Proj {
                    x,
                    y,
                    index: *index,
                    next: Cursor::Ctx(rest),
                },
                Ctx::LetApp { x, f, args, rest } => Head::LetApp {
                    x,
                    f,
                    args,
                    next: Cursor::Ctx(rest),
                },
                Ctx::LetFun {
                    f,
                    params,
                    body,
                    rest,
                } => Head::LetFun {
                    f,
                    params,
                    body: Cursor::Expr(body),
                    rest: Cursor::Ctx(rest),
                },
                Ctx::JoinFun {
                    f,
                    param,
                    body,
                    rest,
                } => Head::LetFun {
                    f,
                    params: std::slice::from_ref(param),
                    body: Cursor::Ctx(body),
                    rest: Cursor::Expr(rest),
                },
            },
            Cursor::Expr(e) => match e {
                AnfExpr::LetCon { x, tag, args, rest } => Head::LetCon {
                    x,
                    tag,
                    args,
                    next: Cursor::Expr(rest),
                },
                AnfExpr::Proj { x, y, index, rest } => Head::Proj {
                    x,
                    y,
                    index: *index,
                    next: Cursor::Expr(rest),
                },
                AnfExpr::LetApp { x, f, args, rest } => Head::LetApp {
                    x,
                    f,
                    args,
                    next: Cursor::Expr(rest),
                },
                AnfExpr::LetFun {
                    f,
                    params,
                    body,
                    rest,
                } => Head::LetFun {
                    f,
                    params,
                    body: Cursor::Expr(body),
                    rest: Cursor::Expr(rest),
                },
                AnfExpr::Case { .. } | AnfExpr::TailCall { .. } | AnfExpr::Halt(_) => Head::End,
            },
        }
    }
}

fn describe(c: Cursor<'_>) -> &'static str {
    match c {
        Cursor::Ctx(Ctx::Hole) => "hole",
        Cursor::Ctx(Ctx::LetCon { .. }) | Cursor::Expr(AnfExpr::LetCon { .. }) => "letcon",
        Cursor::Ctx(Ctx::Proj { .. }) | Cursor::Expr(AnfExpr::Proj { .. }) => "proj",
        Cursor::Ctx(Ctx::LetApp { .. }) | Cursor::Expr(AnfExpr::LetApp { .. }) => "letapp",
        Cursor::Ctx(Ctx::LetFun { .. }) | Cursor::Expr(AnfExpr::LetFun { .. }) => "letfun",
        Cursor::Ctx(Ctx::JoinFun { .. }) => "join point",
        Cursor::Expr(AnfExpr::Case { .. }) => "case",
        Cursor::Expr(AnfExpr::TailCall { .. }) => "tailcall",
        Cursor::Expr(AnfExpr::Halt(_)) => "halt",
    }
}

fn shape(expected: &str, found: Cursor<'_>) -> Rejection {
    reject(
        RejectReason::ShapeMismatch,
        format!("expected {expected}, found {}", describe(found)),
    )
}

struct Deriver<'t> {
    ctors: &'t CtorTable,
    initial: CoFiniteSet,
    current: CoFiniteSet,
}

type Step<'a> = Result<(Var, Cursor<'a>), Rejection>;

impl Deriver<'_> {
    fn bind(&mut self, v: &Var) -> Result<(), Rejection> {
        if !self.initial.contains(v) {
            return Err(reject(
                RejectReason::NonFreshBinder,
                format!("binder `{v}` is not in the initial name set"),
            ));
        }
        if !self.current.take(v) {
            return Err(reject(
                RejectReason::SupplyViolation,
                format!("binder `{v}` is used twice"),
            ));
        }
        Ok(())
    }

    fn derive<'a>(&mut self, e: &SrcExpr, xs: &[Var], at: Cursor<'a>) -> Step<'a> {
        crate::eval::deeper(|| self.rule(e, xs, at))
    }

    fn rule<'a>(&mut self, e: &SrcExpr, xs: &[Var], at: Cursor<'a>) -> Step<'a> {
        match e {
            SrcExpr::Var(n) => match xs.get(*n) {
                Some(y) => Ok((y.clone(), at)),
                None => Err(reject(
                    RejectReason::IndexOutOfRange,
                    format!("index {n} with {} names in scope", xs.len()),
                )),
            },
            SrcExpr::Fun(body) => {
                let Head::LetFun {
                    f,
                    params,
                    body: code,
                    rest,
                } = at.head()
                else {
                    return Err(shape("letfun for an abstraction", at));
                };
                let [x1] = params else {
                    return Err(reject(
                        RejectReason::ArityMismatch,
                        format!("abstraction compiled to {} parameters", params.len()),
                    ));
                };
                let Cursor::Expr(_) = code else {
                    return Err(shape("a function body", code));
                };
                self.bind(x1)?;
                self.bind(f)?;
                let mut inner = Vec::with_capacity(xs.len() + 1);
                inner.push(x1.clone());
                inner.extend_from_slice(xs);
                let (r1, end) = self.derive(body, &inner, code)?;
                match end {
                    Cursor::Expr(AnfExpr::Halt(r)) if *r == r1 => Ok((f.clone(), rest)),
                    Cursor::Expr(AnfExpr::Halt(r)) => Err(reject(
                        RejectReason::ResultVarMismatch,
                        format!("function body halts with `{r}`, expected `{r1}`"),
                    )),
                    other => Err(shape("halt at the end of a function body", other)),
                }
            }
            SrcExpr::App(e1, e2) => {
                let (x1, at) = self.derive(e1, xs, at)?;
                let (x2, at) = self.derive(e2, xs, at)?;
                let Head::LetApp {
                    x: r,
                    f,
                    args,
                    next,
                } = at.head()
                else {
                    return Err(shape("letapp for an application", at));
                };
                if args.len() != 1 {
                    return Err(reject(
                        RejectReason::ArityMismatch,
                        format!("application passes {} arguments", args.len()),
                    ));
                }
                if *f != x1 || args[0] != x2 {
                    return Err(reject(
                        RejectReason::ResultVarMismatch,
                        format!(
                            "letapp calls `{f}` with `{}`, expected `{x1}` with `{x2}`",
                            args[0]
                        ),
                    ));
                }
                self.bind(r)?;
                Ok((r.clone(), next))
            }
            SrcExpr::Let(e1, e2) => {
                let (x1, at) = self.derive(e1, xs, at)?;
                let mut inner = Vec::with_capacity(xs.len() + 1);
                inner.push(x1);
                inner.extend_from_slice(xs);
                self.derive(e2, &inner, at)
            }
            SrcExpr::Con(tag, es) => {
                match self.ctors.arity(tag) {
                    None => {
                        return Err(reject(
                            RejectReason::ShapeMismatch,
                            format!("unknown constructor `{tag}`"),
                        ));
                    }
                    Some(n) if n != es.len() => {
                        return Err(reject(
                            RejectReason::ArityMismatch,
                            format!("`{tag}` takes {n} fields, term gives {}", es.len()),
                        ));
                    }
                    Some(_) => {}
                }
                let mut ys = Vec::with_capacity(es.len());
                let mut at = at;
                for a in es {
                    let (y, next) = self.derive(a, xs, at)?;
                    ys.push(y);
                    at = next;
                }
                let Head::LetCon {
                    x: z,
                    tag: t,
                    args,
                    next,
                } = at.head()
                else {
                    return Err(shape("letcon for a constructor", at));
                };
                if t != tag {
                    return Err(reject(
                        RejectReason::ShapeMismatch,
                        format!("letcon builds `{t}`, term builds `{tag}`"),
                    ));
                }
                if args.len() != ys.len() {
                    return Err(reject(
                        RejectReason::ArityMismatch,
                        format!("letcon has {} fields, expected {}", args.len(), ys.len()),
                    ));
                }
                if args != ys.as_slice() {
                    return Err(reject(
                        RejectReason::ResultVarMismatch,
                        "letcon fields differ from argument results",
                    ));
                }
                self.bind(z)?;
                Ok((z.clone(), next))
            }
            SrcExpr::Match(scrutinee, branches) => {
                let (y, at) = self.derive(scrutinee, xs, at)?;
                let Head::LetFun {
                    f: j,
                    params,
                    body,
                    rest,
                } = at.head()
                else {
                    return Err(shape("join point for a match", at));
                };
                let [xr] = params else {
                    return Err(reject(
                        RejectReason::ArityMismatch,
                        format!("join point takes {} parameters", params.len()),
                    ));
                };
                let Cursor::Expr(AnfExpr::Case {
                    y: y2,
                    branches: arms,
                }) = rest
                else {
                    return Err(shape("case after the join point", rest));
                };
                if *y2 != y {
                    return Err(reject(
                        RejectReason::ResultVarMismatch,
                        format!("case inspects `{y2}`, scrutinee is `{y}`"),
                    ));
                }
                self.bind(j)?;
                self.bind(xr)?;
                if arms.len() != branches.len()
                    || arms.iter().zip(branches).any(|((a, _), (b, _))| a != b)
                {
                    return Err(reject(
                        RejectReason::ShapeMismatch,
                        "case branches do not follow the match",
                    ));
                }
                for ((tag, arm), (_, b)) in arms.iter().zip(branches) {
                    self.branch(tag, arm, b, &y, j, xs)?;
                }
                Ok((xr.clone(), body))
            }
        }
    }

    fn branch(
        &mut self,
        tag: &Tag,
        arm: &AnfExpr,
        body: &SrcExpr,
        y: &Var,
        j: &Var,
        xs: &[Var],
    ) -> Result<(), Rejection> {
        let arity = self.ctors.arity(tag).ok_or_else(|| {
            reject(
                RejectReason::ShapeMismatch,
                format!("unknown constructor `{tag}`"),
            )
        })?;
        let mut at = Cursor::Expr(arm);
        let mut inner = Vec::with_capacity(xs.len() + arity);
        for i in 0..arity {
            let Head::Proj {
                x,
                y: y2,
                index,
                next,
            } = at.head()
            else {
                return Err(reject(
                    RejectReason::ArityMismatch,
                    format!("branch `{tag}` projects {i} of {arity} fields"),
                ));
            };
            if y2 != y || index != i {
                return Err(reject(
                    RejectReason::ShapeMismatch,
                    format!("branch `{tag}` projects field {index} of `{y2}`, expected field {i} of `{y}`"),
                ));
            }
            self.bind(x)?;
            inner.insert(0, x.clone());
            at = next;
        }
        inner.extend_from_slice(xs);
        let (rb, end) = self.derive(body, &inner, at)?;
        match end {
            Cursor::Expr(AnfExpr::TailCall { f, args })
                if f == j && args.len() == 1 && args[0] == rb =>
            {
                Ok(())
            }
            Cursor::Expr(AnfExpr::TailCall { f, args }) if f == j && args.len() != 1 => {
                Err(reject(
                    RejectReason::ArityMismatch,
                    format!("jump to `{j}` passes {} arguments", args.len()),
                ))
            }
            Cursor::Expr(AnfExpr::TailCall { .. }) => Err(reject(
                RejectReason::ResultVarMismatch,
                format!("branch `{tag}` must end by jumping to `{j}` with `{rb}`"),
            )),
            other => Err(shape("jump to the join point", other)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anf::anf_exp;
    use crate::syntax::surface::{parse_ctx, parse_src};

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn t() -> CtorTable {
        CtorTable::standard()
    }

    fn query(e: SrcExpr, xs: &[&str], ctx: Ctx, result: &str) -> JudgmentQuery {
        JudgmentQuery {
            supply_before: NameSupply::new(0),
            e,
            xs: xs.iter().map(|x| v(x)).collect(),
            ctx,
            result: v(result),
        }
    }

    #[test]
    fn var_rule() {
        let ok = check_judgment(&query(SrcExpr::var(1), &["a", "b"], Ctx::Hole, "b"), &t());
        assert_eq!(
            ok,
            SpecVerdict::Accepted(CoFiniteSet::from(&NameSupply::new(0)))
        );
        let bad = check_judgment(&query(SrcExpr::var(1), &["a", "b"], Ctx::Hole, "a"), &t());
        assert_eq!(bad.reason(), Some(RejectReason::ResultVarMismatch));
        let oob = check_judgment(&query(SrcExpr::var(2), &["a", "b"], Ctx::Hole, "a"), &t());
        assert_eq!(oob.reason(), Some(RejectReason::IndexOutOfRange));
    }

    #[test]
    fn app_rule_accepts_any_fresh_result() {
        let e = SrcExpr::app(SrcExpr::var(0), SrcExpr::var(1));
        let ctx = Ctx::let_app(v("v9"), v("x1"), vec![v("x2")], Ctx::Hole);
        let verdict = check_judgment(&query(e, &["x1", "x2"], ctx, "v9"), &t());
        let SpecVerdict::Accepted(s) = verdict else {
            panic!("{verdict}");
        };
        assert!(!s.contains(&v("v9")));
        assert!(s.contains(&v("v0")));
        assert!(s.contains(&v("v10")));
    }

    #[test]
    fn accepts_translator_output_with_exact_residual() {
        let ctors = t();
        for src in [
            "(con Tt)",
            "(lam (var 0))",
            "(app (lam (var 0)) (lam (var 0)))",
            "(let (con Tt) (con Pair (var 0) (var 0)))",
            "(match (con Pair (con Tt) (con Ff)) (Pair (var 1)) (Tt (con Ff)) (Ff (con Tt)) (Some (var 0)))",
            "(lam (match (var 0) (Some (app (var 0) (var 1)))))",
        ] {
            let e = parse_src(src, &ctors).unwrap();
            let out = anf_exp(&e, &[], NameSupply::new(3), &ctors).unwrap();
            let q = JudgmentQuery {
                supply_before: NameSupply::new(3),
                e,
                xs: vec![],
                ctx: out.ctx.clone(),
                result: out.result.clone(),
            };
            match check_judgment(&q, &ctors) {
                SpecVerdict::Accepted(s) => assert!(s.is_exactly(&out.supply_after), "{src}"),
                SpecVerdict::Rejected(r) => panic!("{src}: {r}"),
            }
        }
    }

    #[test]
    fn rejections() {
        let ctors = t();
        let id = parse_src("(lam (var 0))", &ctors).unwrap();
        let stale = parse_ctx("(letfun v1 (v0) (halt v0) (hole))", &ctors).unwrap();
        let mut q = query(id.clone(), &[], stale, "v1");
        q.supply_before = NameSupply::new(1);
        assert_eq!(
            check_judgment(&q, &ctors).reason(),
            Some(RejectReason::NonFreshBinder)
        );

        let twice = parse_ctx("(letfun v0 (v0) (halt v0) (hole))", &ctors).unwrap();
        let q = query(id.clone(), &[], twice, "v0");
        assert_eq!(
            check_judgment(&q, &ctors).reason(),
            Some(RejectReason::SupplyViolation)
        );

        let two_params = parse_ctx("(letfun v1 (v0 v2) (halt v0) (hole))", &ctors).unwrap();
        let q = query(id, &[], two_params, "v1");
        assert_eq!(
            check_judgment(&q, &ctors).reason(),
            Some(RejectReason::ArityMismatch)
        );

        let q = query(SrcExpr::con("Tt", vec![]), &[], Ctx::Hole, "v0");
        assert_eq!(
            check_judgment(&q, &ctors).reason(),
            Some(RejectReason::ShapeMismatch)
        );
    }
}
