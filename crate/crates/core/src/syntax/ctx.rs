//! One-hole contexts over the target language.
//!
//! A context is a spine of bindings ending in a single hole. Besides the
//! tail-position forms, `JoinFun` places the hole inside the body of a
//! one-parameter local function whose continuation is fixed; the match
//! translation uses it to give every branch the same continuation.

use std::sync::Arc;

use super::anf::AnfExpr;
use super::names::{Tag, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ctx {
    Hole,
    LetCon {
        x: Var,
        tag: Tag,
        args: Vec<Var>,
        rest: Box<Ctx>,
    },
    Proj {
        x: Var,
        y: Var,
        index: usize,
        rest: Box<Ctx>,
    },
    LetApp {
        x: Var,
        f: Var,
        args: Vec<Var>,
        rest: Box<Ctx>,
    },
    LetFun {
        f: Var,
        params: Vec<Var>,
        body: Arc<AnfExpr>,
        rest: Box<Ctx>,
    },
    /// `let fun f param = C in rest`
    JoinFun {
        f: Var,
        param: Var,
        body: Box<Ctx>,
        rest: Box<AnfExpr>,
    },
}

impl Ctx {
    pub fn let_con(x: Var, tag: Tag, args: Vec<Var>, rest: Ctx) -> Self {
        Ctx::LetCon {
            x,
            tag,
            args,
            rest: Box::new(rest),
        }
    }

    pub fn proj(x: Var, y: Var, index: usize, rest: Ctx) -> Self {
        Ctx::Proj {
            x,
            y,
            index,
            rest: Box::new(rest),
        }
    }

    pub fn let_app(x: Var, f: Var, args: Vec<Var>, rest: Ctx) -> Self {
        Ctx::LetApp {
            x,
            f,
            args,
            rest: Box::new(rest),
        }
    }

    pub fn let_fun(f: Var, params: Vec<Var>, body: AnfExpr, rest: Ctx) -> Self {
        Ctx::LetFun {
            f,
            params,
            body: Arc::new(body),
            rest: Box::new(rest),
        }
    }

    pub fn join_fun(f: Var, param: Var, body: Ctx, rest: AnfExpr) -> Self {
        Ctx::JoinFun {
            f,
            param,
            body: Box::new(body),
            rest: Box::new(rest),
        }
    }

    pub fn is_hole(&self) -> bool {
        matches!(self, Ctx::Hole)
    }

    /// `C[e]`
    pub fn plug(&self, e: AnfExpr) -> AnfExpr {
        match self {
            Ctx::Hole => e,
            Ctx::LetCon { x, tag, args, rest } => {
                AnfExpr::let_con(x.clone(), tag.clone(), args.clone(), rest.plug(e))
            }
            Ctx::Proj { x, y, index, rest } => {
                AnfExpr::proj(x.clone(), y.clone(), *index, rest.plug(e))
            }
            Ctx::LetApp { x, f, args, rest } => {
                AnfExpr::let_app(x.clone(), f.clone(), args.clone(), rest.plug(e))
            }
            Ctx::LetFun {
                f,
                params,
                body,
                rest,
            } => AnfExpr::LetFun {
                f: f.clone(),
                params: params.clone(),
                body: body.clone(),
                rest: Box::new(rest.plug(e)),
            },
            Ctx::JoinFun {
                f,
                param,
                body,
                rest,
            } => AnfExpr::LetFun {
                f: f.clone(),
                params: vec![param.clone()],
                body: Arc::new(body.plug(e)),
                rest: rest.clone(),
            },
        }
    }

    /// `self ∘ inner`: the context whose hole is `inner`'s hole, placed at
    /// `self`'s hole.
    pub fn compose(self, inner: Ctx) -> Ctx {
        match self {
            Ctx::Hole => inner,
            Ctx::LetCon { x, tag, args, rest } => Ctx::LetCon {
                x,
                tag,
                args,
                rest: Box::new(rest.compose(inner)),
            },
            Ctx::Proj { x, y, index, rest } => Ctx::Proj {
                x,
                y,
                index,
                rest: Box::new(rest.compose(inner)),
            },
            Ctx::LetApp { x, f, args, rest } => Ctx::LetApp {
                x,
                f,
                args,
                rest: Box::new(rest.compose(inner)),
            },
            Ctx::LetFun {
                f,
                params,
                body,
                rest,
            } => Ctx::LetFun {
                f,
                params,
                body,
                rest: Box::new(rest.compose(inner)),
            },
            Ctx::JoinFun {
                f,
                param,
                body,
                rest,
            } => Ctx::JoinFun {
                f,
                param,
                body: Box::new(body.compose(inner)),
                rest,
            },
        }
    }

    /// Recovers the context around the unique position where `at_hole`
    /// matches. At a `LetFun`, the continuation is searched before the
    /// function body; the body is tried only for one-parameter functions
    /// (a join point).
    pub fn unplug<'e>(
        e: &'e AnfExpr,
        at_hole: &dyn Fn(&AnfExpr) -> bool,
    ) -> Option<(Ctx, &'e AnfExpr)> {
        if at_hole(e) {
            return Some((Ctx::Hole, e));
        }
        match e {
            AnfExpr::LetCon { x, tag, args, rest } => Ctx::unplug(rest, at_hole)
                .map(|(c, h)| (Ctx::let_con(x.clone(), tag.clone(), args.clone(), c), h)),
            AnfExpr::Proj { x, y, index, rest } => Ctx::unplug(rest, at_hole)
                .map(|(c, h)| (Ctx::proj(x.clone(), y.clone(), *index, c), h)),
            AnfExpr::LetApp { x, f, args, rest } => Ctx::unplug(rest, at_hole)
                .map(|(c, h)| (Ctx::let_app(x.clone(), f.clone(), args.clone(), c), h)),
            AnfExpr::LetFun {
                f,
                params,
                body,
                rest,
            } => {
                if let Some((c, h)) = Ctx::unplug(rest, at_hole) {
                    return Some((
                        Ctx::LetFun {
                            f: f.clone(),
                            params: params.clone(),
                            body: body.clone(),
                            rest: Box::new(c),
                        },
                        h,
                    ));
                }
                match params.as_slice() {
                    [param] => Ctx::unplug(body, at_hole).map(|(c, h)| {
                        (
                            Ctx::JoinFun {
                                f: f.clone(),
                                param: param.clone(),
                                body: Box::new(c),
                                rest: rest.clone(),
                            },
                            h,
                        )
                    }),
                    _ => None,
                }
            }
            AnfExpr::Case { .. } | AnfExpr::TailCall { .. } | AnfExpr::Halt(_) => None,
        }
    }

    /// Binding occurrences introduced by the context, in pre-order.
    pub fn binders(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Ctx::Hole => return out,
                Ctx::LetCon { x, rest, .. }
                | Ctx::Proj { x, rest, .. }
                | Ctx::LetApp { x, rest, .. } => {
                    out.push(x.clone());
                    cur = rest;
                }
                Ctx::LetFun {
                    f,
                    params,
                    body,
                    rest,
                } => {
                    out.push(f.clone());
                    out.extend(params.iter().cloned());
                    body.collect_binders(&mut out);
                    cur = rest;
                }
                Ctx::JoinFun {
                    f,
                    param,
                    body,
                    rest,
                } => {
                    out.push(f.clone());
                    out.push(param.clone());
                    rest.collect_binders(&mut out);
                    cur = body;
                }
            }
        }
    }

    pub fn rename(&self, map: &dyn Fn(&Var) -> Var) -> Ctx {
        let vs = |ys: &[Var]| ys.iter().map(map).collect::<Vec<_>>();
        match self {
            Ctx::Hole => Ctx::Hole,
            Ctx::LetCon { x, tag, args, rest } => {
                Ctx::let_con(map(x), tag.clone(), vs(args), rest.rename(map))
            }
            Ctx::Proj { x, y, index, rest } => Ctx::proj(map(x), map(y), *index, rest.rename(map)),
            Ctx::LetApp { x, f, args, rest } => {
                Ctx::let_app(map(x), map(f), vs(args), rest.rename(map))
            }
            Ctx::LetFun {
                f,
                params,
                body,
                rest,
            } => Ctx::let_fun(map(f), vs(params), body.rename(map), rest.rename(map)),
            Ctx::JoinFun {
                f,
                param,
                body,
                rest,
            } => Ctx::join_fun(map(f), map(param), body.rename(map), rest.rename(map)),
        }
    }

    /// Number of binding forms on the spine.
    pub fn spine_len(&self) -> usize {
        match self {
            Ctx::Hole => 0,
            Ctx::LetCon { rest, .. }
            | Ctx::Proj { rest, .. }
            | Ctx::LetApp { rest, .. }
            | Ctx::LetFun { rest, .. } => 1 + rest.spine_len(),
            Ctx::JoinFun { body, .. } => 1 + body.spine_len(),
        }
    }
}

/// `c[e]`
pub fn plug(c: &Ctx, e: AnfExpr) -> AnfExpr {
    c.plug(e)
}

/// `c1 ∘ c2`
pub fn compose(c1: Ctx, c2: Ctx) -> Ctx {
    c1.compose(c2)
}
