//! The target language in administrative normal form, with named variables.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::names::{Tag, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AnfExpr {
    /// `let x = C(ys) in rest`
    LetCon {
        x: Var,
        tag: Tag,
        args: Vec<Var>,
        rest: Box<AnfExpr>,
    },
    /// `let x = y.i in rest`, fields numbered from 0.
    Proj {
        x: Var,
        y: Var,
        index: usize,
        rest: Box<AnfExpr>,
    },
    /// `let fun f params = body in rest`. `f` is in scope in `body` and `rest`.
    LetFun {
        f: Var,
        params: Vec<Var>,
        body: Arc<AnfExpr>,
        rest: Box<AnfExpr>,
    },
    /// `let x = f ys in rest`
    LetApp {
        x: Var,
        f: Var,
        args: Vec<Var>,
        rest: Box<AnfExpr>,
    },
    Case {
        y: Var,
        branches: Vec<(Tag, AnfExpr)>,
    },
    TailCall {
        f: Var,
        args: Vec<Var>,
    },
    Halt(Var),
}

impl AnfExpr {
    pub fn halt(x: impl Into<Var>) -> Self {
        AnfExpr::Halt(x.into())
    }

    pub fn let_con(x: Var, tag: Tag, args: Vec<Var>, rest: AnfExpr) -> Self {
        AnfExpr::LetCon {
            x,
            tag,
            args,
            rest: Box::new(rest),
        }
    }

    pub fn proj(x: Var, y: Var, index: usize, rest: AnfExpr) -> Self {
        AnfExpr::Proj {
            x,
            y,
            index,
            rest: Box::new(rest),
        }
    }

    pub fn let_fun(f: Var, params: Vec<Var>, body: AnfExpr, rest: AnfExpr) -> Self {
        AnfExpr::LetFun {
            f,
            params,
            body: Arc::new(body),
            rest: Box::new(rest),
        }
    }

    pub fn let_app(x: Var, f: Var, args: Vec<Var>, rest: AnfExpr) -> Self {
        AnfExpr::LetApp {
            x,
            f,
            args,
            rest: Box::new(rest),
        }
    }

    pub fn case(y: Var, branches: Vec<(Tag, AnfExpr)>) -> Self {
        AnfExpr::Case { y, branches }
    }

    pub fn tail_call(f: Var, args: Vec<Var>) -> Self {
        AnfExpr::TailCall { f, args }
    }

    pub fn size(&self) -> usize {
        match self {
            AnfExpr::LetCon { rest, .. }
            | AnfExpr::Proj { rest, .. }
            | AnfExpr::LetApp { rest, .. } => 1 + rest.size(),
            AnfExpr::LetFun { body, rest, .. } => 1 + body.size() + rest.size(),
            AnfExpr::Case { branches, .. } => {
                1 + branches.iter().map(|(_, b)| b.size()).sum::<usize>()
            }
            AnfExpr::TailCall { .. } | AnfExpr::Halt(_) => 1,
        }
    }

    /// Every binding occurrence, in pre-order.
    pub fn binders(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_binders(&mut out);
        out
    }

    pub(crate) fn collect_binders(&self, out: &mut Vec<Var>) {
        match self {
            AnfExpr::LetCon { x, rest, .. }
            | AnfExpr::Proj { x, rest, .. }
            | AnfExpr::LetApp { x, rest, .. } => {
                out.push(x.clone());
                rest.collect_binders(out);
            }
            AnfExpr::LetFun {
                f,
                params,
                body,
                rest,
            } => {
                out.push(f.clone());
                out.extend(params.iter().cloned());
                body.collect_binders(out);
                rest.collect_binders(out);
            }
            AnfExpr::Case { branches, .. } => {
                for (_, b) in branches {
                    b.collect_binders(out);
                }
            }
            AnfExpr::TailCall { .. } | AnfExpr::Halt(_) => {}
        }
    }

    /// Replaces every occurrence (binding or not) of each name in `map`.
    pub fn rename(&self, map: &dyn Fn(&Var) -> Var) -> AnfExpr {
        let vs = |ys: &[Var]| ys.iter().map(map).collect::<Vec<_>>();
        match self {
            AnfExpr::LetCon { x, tag, args, rest } => {
                AnfExpr::let_con(map(x), tag.clone(), vs(args), rest.rename(map))
            }
            AnfExpr::Proj { x, y, index, rest } => {
                AnfExpr::proj(map(x), map(y), *index, rest.rename(map))
            }
            AnfExpr::LetFun {
                f,
                params,
                body,
                rest,
            } => AnfExpr::let_fun(map(f), vs(params), body.rename(map), rest.rename(map)),
            AnfExpr::LetApp { x, f, args, rest } => {
                AnfExpr::let_app(map(x), map(f), vs(args), rest.rename(map))
            }
            AnfExpr::Case { y, branches } => AnfExpr::case(
                map(y),
                branches
                    .iter()
                    .map(|(t, b)| (t.clone(), b.rename(map)))
                    .collect(),
            ),
            AnfExpr::TailCall { f, args } => AnfExpr::tail_call(map(f), vs(args)),
            AnfExpr::Halt(x) => AnfExpr::Halt(map(x)),
        }
    }
}

/// Free variables under the binding structure of the target language.
pub fn free_vars_anf(e: &AnfExpr) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    let mut bound = Vec::new();
    collect_free(e, &mut bound, &mut out);
    out
}

fn collect_free(e: &AnfExpr, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    fn use_var(v: &Var, bound: &[Var], out: &mut BTreeSet<Var>) {
        if !bound.contains(v) {
            out.insert(v.clone());
        }
    }
    match e {
        AnfExpr::LetCon { x, args, rest, .. } => {
            args.iter().for_each(|y| use_var(y, bound, out));
            bound.push(x.clone());
            collect_free(rest, bound, out);
            bound.pop();
        }
        AnfExpr::Proj { x, y, rest, .. } => {
            use_var(y, bound, out);
            bound.push(x.clone());
            collect_free(rest, bound, out);
            bound.pop();
        }
        AnfExpr::LetFun {
            f,
            params,
            body,
            rest,
        } => {
            bound.push(f.clone());
            let mark = bound.len();
            bound.extend(params.iter().cloned());
            collect_free(body, bound, out);
            bound.truncate(mark);
            collect_free(rest, bound, out);
            bound.pop();
        }
        AnfExpr::LetApp { x, f, args, rest } => {
            use_var(f, bound, out);
            args.iter().for_each(|y| use_var(y, bound, out));
            bound.push(x.clone());
            collect_free(rest, bound, out);
            bound.pop();
        }
        AnfExpr::Case { y, branches } => {
            use_var(y, bound, out);
            for (_, b) in branches {
                collect_free(b, bound, out);
            }
        }
        AnfExpr::TailCall { f, args } => {
            use_var(f, bound, out);
            args.iter().for_each(|y| use_var(y, bound, out));
        }
        AnfExpr::Halt(x) => use_var(x, bound, out),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnfValue {
    Con(Tag, Arc<[AnfValue]>),
    Clos(Arc<AnfClosure>),
}

/// `<σ, fun f params = body>`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnfClosure {
    pub env: AnfEnv,
    pub name: Var,
    pub params: Vec<Var>,
    pub body: Arc<AnfExpr>,
}

impl AnfValue {
    pub fn con(tag: impl Into<Tag>, fields: Vec<AnfValue>) -> Self {
        AnfValue::Con(tag.into(), fields.into())
    }

    pub fn clos(env: AnfEnv, name: Var, params: Vec<Var>, body: AnfExpr) -> Self {
        AnfValue::Clos(Arc::new(AnfClosure {
            env,
            name,
            params,
            body: Arc::new(body),
        }))
    }

    pub fn is_closure(&self) -> bool {
        matches!(self, AnfValue::Clos(_))
    }
}

/// A finite map from variables to values. Persistent, so capturing it in a
/// closure is cheap.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct AnfEnv(im::OrdMap<Var, AnfValue>);

impl AnfEnv {
    pub fn new() -> Self {
        AnfEnv(im::OrdMap::new())
    }

    pub fn get(&self, x: &Var) -> Option<&AnfValue> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: Var, v: AnfValue) {
        self.0.insert(x, v);
    }

    pub fn with(&self, x: Var, v: AnfValue) -> AnfEnv {
        AnfEnv(self.0.update(x, v))
    }

    pub fn contains(&self, x: &Var) -> bool {
        self.0.contains_key(x)
    }

    pub fn remove(&mut self, x: &Var) -> Option<AnfValue> {
        self.0.remove(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &AnfValue)> {
        self.0.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }
}

impl fmt::Debug for AnfEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

impl FromIterator<(Var, AnfValue)> for AnfEnv {
    fn from_iter<I: IntoIterator<Item = (Var, AnfValue)>>(iter: I) -> Self {
        AnfEnv(iter.into_iter().collect())
    }
}
