//! Alpha-equivalence for target terms and values.

use std::collections::BTreeMap;

use super::anf::{AnfEnv, AnfExpr, AnfValue};
use super::ctx::Ctx;
use super::names::Var;

/// Equality up to consistent renaming of bound variables. Free variables
/// must coincide.
pub fn alpha_eq(e1: &AnfExpr, e2: &AnfExpr) -> bool {
    Alpha::new(FreeVars::Exact).expr(e1, e2)
}

/// Alpha-equivalence of contexts; the holes must line up.
pub fn alpha_eq_ctx(c1: &Ctx, c2: &Ctx) -> bool {
    Alpha::new(FreeVars::Exact).ctx(c1, c2)
}

/// Constructor values compare structurally. Closures compare their code up to
/// renaming, where a captured name on one side may correspond to a different
/// captured name on the other as long as the correspondence is a bijection and
/// the captured values are themselves alpha-equivalent.
pub fn alpha_eq_value(v1: &AnfValue, v2: &AnfValue) -> bool {
    match (v1, v2) {
        (AnfValue::Con(t1, f1), AnfValue::Con(t2, f2)) => {
            t1 == t2
                && f1.len() == f2.len()
                && f1.iter().zip(f2.iter()).all(|(a, b)| alpha_eq_value(a, b))
        }
        (AnfValue::Clos(c1), AnfValue::Clos(c2)) => {
            if c1.params.len() != c2.params.len() {
                return false;
            }
            let mut a = Alpha::new(FreeVars::Captured {
                env1: &c1.env,
                env2: &c2.env,
                fwd: BTreeMap::new(),
                back: BTreeMap::new(),
            });
            a.scope.push((c1.name.clone(), c2.name.clone()));
            a.scope
                .extend(c1.params.iter().cloned().zip(c2.params.iter().cloned()));
            a.expr(&c1.body, &c2.body)
        }
        _ => false,
    }
}

enum FreeVars<'a> {
    Exact,
    Captured {
        env1: &'a AnfEnv,
        env2: &'a AnfEnv,
        fwd: BTreeMap<Var, Var>,
        back: BTreeMap<Var, Var>,
    },
}

struct Alpha<'a> {
    scope: Vec<(Var, Var)>,
    free: FreeVars<'a>,
}

impl<'a> Alpha<'a> {
    fn new(free: FreeVars<'a>) -> Self {
        Alpha {
            scope: Vec::new(),
            free,
        }
    }

    fn var(&mut self, a: &Var, b: &Var) -> bool {
        for (p, q) in self.scope.iter().rev() {
            if p == a || q == b {
                return p == a && q == b;
            }
        }
        match &mut self.free {
            FreeVars::Exact => a == b,
            FreeVars::Captured {
                env1,
                env2,
                fwd,
                back,
            } => {
                if let Some(m) = fwd.get(a) {
                    return m == b;
                }
                if back.contains_key(b) {
                    return false;
                }
                let ok = match (env1.get(a), env2.get(b)) {
                    (Some(x), Some(y)) => alpha_eq_value(x, y),
                    (None, None) => a == b,
                    _ => false,
                };
                if ok {
                    fwd.insert(a.clone(), b.clone());
                    back.insert(b.clone(), a.clone());
                }
                ok
            }
        }
    }

    fn vars(&mut self, xs: &[Var], ys: &[Var]) -> bool {
        xs.len() == ys.len() && xs.iter().zip(ys).all(|(a, b)| self.var(a, b))
    }

    fn under<R>(
        &mut self,
        binds: impl IntoIterator<Item = (Var, Var)>,
        f: impl FnOnce(&mut Self) -> R,
    ) -> R {
        let mark = self.scope.len();
        self.scope.extend(binds);
        let out = f(self);
        self.scope.truncate(mark);
        out
    }

    fn expr(&mut self, e1: &AnfExpr, e2: &AnfExpr) -> bool {
        use AnfExpr::*;
        match (e1, e2) {
            (
                LetCon {
                    x: x1,
                    tag: t1,
                    args: a1,
                    rest: r1,
                },
                LetCon {
                    x: x2,
                    tag: t2,
                    args: a2,
                    rest: r2,
                },
            ) => {
                t1 == t2
                    && self.vars(a1, a2)
                    && self.under([(x1.clone(), x2.clone())], |s| s.expr(r1, r2))
            }
            (
                Proj {
                    x: x1,
                    y: y1,
                    index: i1,
                    rest: r1,
                },
                Proj {
                    x: x2,
                    y: y2,
                    index: i2,
                    rest: r2,
                },
            ) => {
                i1 == i2
                    && self.var(y1, y2)
                    && self.under([(x1.clone(), x2.clone())], |s| s.expr(r1, r2))
            }
            (
                LetFun {
                    f: f1,
                    params: p1,
                    body: b1,
                    rest: r1,
                },
                LetFun {
                    f: f2,
                    params: p2,
                    body: b2,
                    rest: r2,
                },
            ) => {
                p1.len() == p2.len()
                    && self.under([(f1.clone(), f2.clone())], |s| {
                        s.under(p1.iter().cloned().zip(p2.iter().cloned()), |s| {
                            s.expr(b1, b2)
                        }) && s.expr(r1, r2)
                    })
            }
            (
                LetApp {
                    x: x1,
                    f: f1,
                    args: a1,
                    rest: r1,
                },
                LetApp {
                    x: x2,
                    f: f2,
                    args: a2,
                    rest: r2,
                },
            ) => {
                self.var(f1, f2)
                    && self.vars(a1, a2)
                    && self.under([(x1.clone(), x2.clone())], |s| s.expr(r1, r2))
            }
            (
                Case {
                    y: y1,
                    branches: b1,
                },
                Case {
                    y: y2,
                    branches: b2,
                },
            ) => {
                self.var(y1, y2)
                    && b1.len() == b2.len()
                    && b1
                        .iter()
                        .zip(b2)
                        .all(|((t1, e1), (t2, e2))| t1 == t2 && self.expr(e1, e2))
            }
            (TailCall { f: f1, args: a1 }, TailCall { f: f2, args: a2 }) => {
                self.var(f1, f2) && self.vars(a1, a2)
            }
            (Halt(x1), Halt(x2)) => self.var(x1, x2),
            _ => false,
        }
    }

    fn ctx(&mut self, c1: &Ctx, c2: &Ctx) -> bool {
        match (c1, c2) {
            (Ctx::Hole, Ctx::Hole) => true,
            (
                Ctx::LetCon {
                    x: x1,
                    tag: t1,
                    args: a1,
                    rest: r1,
                },
                Ctx::LetCon {
                    x: x2,
                    tag: t2,
                    args: a2,
                    rest: r2,
                },
            ) => {
                t1 == t2
                    && self.vars(a1, a2)
                    && self.under([(x1.clone(), x2.clone())], |s| s.ctx(r1, r2))
            }
            (
                Ctx::Proj {
                    x: x1,
                    y: y1,
                    index: i1,
                    rest: r1,
                },
                Ctx::Proj {
                    x: x2,
                    y: y2,
                    index: i2,
                    rest: r2,
                },
            ) => {
                i1 == i2
                    && self.var(y1, y2)
                    && self.under([(x1.clone(), x2.clone())], |s| s.ctx(r1, r2))
            }
            (
                Ctx::LetApp {
                    x: x1,
                    f: f1,
                    args: a1,
                    rest: r1,
                },
                Ctx::LetApp {
                    x: x2,
                    f: f2,
                    args: a2,
                    rest: r2,
                },
            ) => {
                self.var(f1, f2)
                    && self.vars(a1, a2)
                    && self.under([(x1.clone(), x2.clone())], |s| s.ctx(r1, r2))
            }
            (
                Ctx::LetFun {
                    f: f1,
                    params: p1,
                    body: b1,
                    rest: r1,
                },
                Ctx::LetFun {
                    f: f2,
                    params: p2,
                    body: b2,
                    rest: r2,
                },
            ) => {
                p1.len() == p2.len()
                    && self.under([(f1.clone(), f2.clone())], |s| {
                        s.under(p1.iter().cloned().zip(p2.iter().cloned()), |s| {
                            s.expr(b1, b2)
                        }) && s.ctx(r1, r2)
                    })
            }
            (
                Ctx::JoinFun {
                    f: f1,
                    param: p1,
                    body: b1,
                    rest: r1,
                },
                Ctx::JoinFun {
                    f: f2,
                    param: p2,
                    body: b2,
                    rest: r2,
                },
            ) => self.under([(f1.clone(), f2.clone())], |s| {
                s.under([(p1.clone(), p2.clone())], |s| s.ctx(b1, b2)) && s.expr(r1, r2)
            }),
            _ => false,
        }
    }
}
