//! The direct-style source language: an untyped call-by-value lambda calculus
//! with de Bruijn indices, let, constructors and pattern matching.

use std::sync::Arc;

use super::ctors::CtorTable;
use super::names::Tag;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SrcExpr {
    Var(usize),
    Let(Box<SrcExpr>, Box<SrcExpr>),
    /// Abstraction; the body sees its parameter at index 0.
    Fun(Arc<SrcExpr>),
    App(Box<SrcExpr>, Box<SrcExpr>),
    Con(Tag, Vec<SrcExpr>),
    /// Inside a branch for a constructor with fields `f1 .. fa`, field `fa`
    /// is index 0 and `f1` is index `a - 1`.
    Match(Box<SrcExpr>, Vec<(Tag, SrcExpr)>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SrcValue {
    Con(Tag, Arc<[SrcValue]>),
    Clos(Arc<SrcClosure>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SrcClosure {
    /// Captured environment, index 0 first.
    pub env: Vec<SrcValue>,
    pub body: Arc<SrcExpr>,
}

impl SrcExpr {
    pub fn var(n: usize) -> Self {
        SrcExpr::Var(n)
    }

    pub fn fun(body: SrcExpr) -> Self {
        SrcExpr::Fun(Arc::new(body))
    }

    pub fn app(f: SrcExpr, a: SrcExpr) -> Self {
        SrcExpr::App(Box::new(f), Box::new(a))
    }

    pub fn let_in(bound: SrcExpr, body: SrcExpr) -> Self {
        SrcExpr::Let(Box::new(bound), Box::new(body))
    }

    pub fn con(tag: impl Into<Tag>, args: Vec<SrcExpr>) -> Self {
        SrcExpr::Con(tag.into(), args)
    }

    pub fn match_on(scrutinee: SrcExpr, branches: Vec<(Tag, SrcExpr)>) -> Self {
        SrcExpr::Match(Box::new(scrutinee), branches)
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            SrcExpr::Var(_) => 1,
            SrcExpr::Fun(b) => 1 + b.size(),
            SrcExpr::Let(a, b) | SrcExpr::App(a, b) => 1 + a.size() + b.size(),
            SrcExpr::Con(_, args) => 1 + args.iter().map(SrcExpr::size).sum::<usize>(),
            SrcExpr::Match(s, bs) => 1 + s.size() + bs.iter().map(|(_, b)| b.size()).sum::<usize>(),
        }
    }

    /// True if some occurrence refers to the binder `cutoff` levels out.
    pub fn mentions(&self, cutoff: usize, ctors: &CtorTable) -> bool {
        match self {
            SrcExpr::Var(n) => *n == cutoff,
            SrcExpr::Fun(b) => b.mentions(cutoff + 1, ctors),
            SrcExpr::App(a, b) => a.mentions(cutoff, ctors) || b.mentions(cutoff, ctors),
            SrcExpr::Let(a, b) => a.mentions(cutoff, ctors) || b.mentions(cutoff + 1, ctors),
            SrcExpr::Con(_, args) => args.iter().any(|a| a.mentions(cutoff, ctors)),
            SrcExpr::Match(s, bs) => {
                s.mentions(cutoff, ctors)
                    || bs
                        .iter()
                        .any(|(t, b)| b.mentions(cutoff + branch_arity(t, ctors), ctors))
            }
        }
    }

    /// Removes the binder at `cutoff`, decrementing every index above it.
    /// The caller guarantees `!self.mentions(cutoff, ctors)`.
    pub fn unshift(&self, cutoff: usize, ctors: &CtorTable) -> SrcExpr {
        match self {
            SrcExpr::Var(n) => SrcExpr::Var(if *n > cutoff { n - 1 } else { *n }),
            SrcExpr::Fun(b) => SrcExpr::fun(b.unshift(cutoff + 1, ctors)),
            SrcExpr::App(a, b) => SrcExpr::app(a.unshift(cutoff, ctors), b.unshift(cutoff, ctors)),
            SrcExpr::Let(a, b) => {
                SrcExpr::let_in(a.unshift(cutoff, ctors), b.unshift(cutoff + 1, ctors))
            }
            SrcExpr::Con(t, args) => SrcExpr::Con(
                t.clone(),
                args.iter().map(|a| a.unshift(cutoff, ctors)).collect(),
            ),
            SrcExpr::Match(s, bs) => SrcExpr::match_on(
                s.unshift(cutoff, ctors),
                bs.iter()
                    .map(|(t, b)| (t.clone(), b.unshift(cutoff + branch_arity(t, ctors), ctors)))
                    .collect(),
            ),
        }
    }

    pub fn count_nodes(&self, pred: &dyn Fn(&SrcExpr) -> bool) -> usize {
        let here = usize::from(pred(self));
        here + match self {
            SrcExpr::Var(_) => 0,
            SrcExpr::Fun(b) => b.count_nodes(pred),
            SrcExpr::Let(a, b) | SrcExpr::App(a, b) => a.count_nodes(pred) + b.count_nodes(pred),
            SrcExpr::Con(_, args) => args.iter().map(|a| a.count_nodes(pred)).sum(),
            SrcExpr::Match(s, bs) => {
                s.count_nodes(pred) + bs.iter().map(|(_, b)| b.count_nodes(pred)).sum::<usize>()
            }
        }
    }
}

fn branch_arity(tag: &Tag, ctors: &CtorTable) -> usize {
    ctors.arity(tag).unwrap_or(0)
}

/// All de Bruijn indices in range at binding depth `depth`, and every
/// constructor and match branch consistent with `ctors`.
pub fn well_formed_src(e: &SrcExpr, depth: usize, ctors: &CtorTable) -> bool {
    match e {
        SrcExpr::Var(n) => *n < depth,
        SrcExpr::Fun(b) => well_formed_src(b, depth + 1, ctors),
        SrcExpr::App(a, b) => well_formed_src(a, depth, ctors) && well_formed_src(b, depth, ctors),
        SrcExpr::Let(a, b) => {
            well_formed_src(a, depth, ctors) && well_formed_src(b, depth + 1, ctors)
        }
        SrcExpr::Con(tag, args) => {
            ctors.arity(tag) == Some(args.len())
                && args.iter().all(|a| well_formed_src(a, depth, ctors))
        }
        SrcExpr::Match(s, bs) => {
            well_formed_src(s, depth, ctors)
                && bs.iter().enumerate().all(|(i, (tag, body))| {
                    bs[..i].iter().all(|(t, _)| t != tag)
                        && ctors
                            .arity(tag)
                            .is_some_and(|a| well_formed_src(body, depth + a, ctors))
                })
        }
    }
}

impl SrcValue {
    pub fn con(tag: impl Into<Tag>, fields: Vec<SrcValue>) -> Self {
        SrcValue::Con(tag.into(), fields.into())
    }

    pub fn clos(env: Vec<SrcValue>, body: SrcExpr) -> Self {
        SrcValue::Clos(Arc::new(SrcClosure {
            env,
            body: Arc::new(body),
        }))
    }

    pub fn well_formed(&self, ctors: &CtorTable) -> bool {
        match self {
            SrcValue::Con(tag, fs) => {
                ctors.arity(tag) == Some(fs.len()) && fs.iter().all(|f| f.well_formed(ctors))
            }
            SrcValue::Clos(c) => {
                c.env.iter().all(|v| v.well_formed(ctors))
                    && well_formed_src(&c.body, c.env.len() + 1, ctors)
            }
        }
    }
}
