//! The s-expression surface syntax for source terms, target terms, contexts,
//! values and environments. Rendering is deterministic and single-line;
//! `parse(render(x)) == x` for well-formed `x`.
//!
//! ```text
//! source   (var N) (lam E) (app E E) (let E E) (con TAG E...) (match E (TAG E)...)
//! target   (letcon X TAG (Y...) E) (proj X Y I E) (letfun F (X...) E E)
//!          (letapp X F (Y...) E) (case Y (TAG E)...) (tailcall F Y...) (halt X)
//! context  the binding forms above with a context in tail position,
//!          (hole) and (joinfun F X C E)
//! values   source: (con TAG V...) (clos (V...) E); environments (values V...)
//!          target: (con TAG V...) (clos ENV F (X...) E); environments (env (X V)...)
//! ```

use std::fmt;
use std::sync::Arc;

use super::anf::{AnfEnv, AnfExpr, AnfValue};
use super::ctors::CtorTable;
use super::ctx::Ctx;
use super::names::{Tag, Var};
use super::sexp::{read_all, read_one, ParseError, Pos, Sexp};
use super::source::{SrcClosure, SrcExpr, SrcValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Source,
    Anf,
    Context,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Source(SrcExpr),
    Anf(AnfExpr),
    Context(Ctx),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Source(e) => e.fmt(f),
            Term::Anf(e) => e.fmt(f),
            Term::Context(c) => c.fmt(f),
        }
    }
}

pub fn parse(text: &str, kind: Kind, ctors: &CtorTable) -> Result<Term, ParseError> {
    Ok(match kind {
        Kind::Source => Term::Source(parse_src(text, ctors)?),
        Kind::Anf => Term::Anf(parse_anf(text, ctors)?),
        Kind::Context => Term::Context(parse_ctx(text, ctors)?),
    })
}

pub fn parse_src(text: &str, ctors: &CtorTable) -> Result<SrcExpr, ParseError> {
    Parser { ctors }.src(&read_one(text)?)
}

pub fn parse_anf(text: &str, ctors: &CtorTable) -> Result<AnfExpr, ParseError> {
    Parser { ctors }.anf(&read_one(text)?)
}

pub fn parse_ctx(text: &str, ctors: &CtorTable) -> Result<Ctx, ParseError> {
    Parser { ctors }.ctx(&read_one(text)?)
}

pub fn parse_src_value(text: &str, ctors: &CtorTable) -> Result<SrcValue, ParseError> {
    Parser { ctors }.src_value(&read_one(text)?)
}

/// `(values V...)`, index 0 first.
pub fn parse_src_env(text: &str, ctors: &CtorTable) -> Result<Vec<SrcValue>, ParseError> {
    Parser { ctors }.src_env(&read_one(text)?)
}

pub fn parse_anf_value(text: &str, ctors: &CtorTable) -> Result<AnfValue, ParseError> {
    Parser { ctors }.anf_value(&read_one(text)?)
}

/// `(env (X V)...)`
pub fn parse_anf_env(text: &str, ctors: &CtorTable) -> Result<AnfEnv, ParseError> {
    Parser { ctors }.anf_env(&read_one(text)?)
}

/// A context followed by a result variable, as consumed by `spec-check`.
pub fn parse_ctx_result(text: &str, ctors: &CtorTable) -> Result<(Ctx, Var), ParseError> {
    let items = read_all(text)?;
    let p = Parser { ctors };
    match items.as_slice() {
        [c, r] => Ok((p.ctx(c)?, p.var(r)?)),
        _ => Err(ParseError::new(
            items.first().map_or(Pos { line: 1, col: 1 }, Sexp::pos),
            "expected a context followed by a result variable",
        )),
    }
}

/// An optional `(env ...)` followed by a target expression.
pub fn parse_anf_config(text: &str, ctors: &CtorTable) -> Result<(AnfEnv, AnfExpr), ParseError> {
    let items = read_all(text)?;
    let p = Parser { ctors };
    match items.as_slice() {
        [e] => Ok((AnfEnv::new(), p.anf(e)?)),
        [env, e] => Ok((p.anf_env(env)?, p.anf(e)?)),
        _ => Err(ParseError::new(
            items.first().map_or(Pos { line: 1, col: 1 }, Sexp::pos),
            "expected [ENV] EXPR",
        )),
    }
}

pub fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

struct Parser<'a> {
    ctors: &'a CtorTable,
}

fn err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::new(pos, msg))
}

fn form(s: &Sexp) -> Result<(&str, &[Sexp], Pos), ParseError> {
    match s {
        Sexp::List(items, pos) => match items.split_first() {
            Some((Sexp::Atom(head, _), rest)) => Ok((head.as_str(), rest, *pos)),
            _ => err(*pos, "expected a form `(keyword ...)`"),
        },
        Sexp::Atom(a, pos) => err(*pos, format!("expected a form, found `{a}`")),
    }
}

fn arity(args: &[Sexp], n: usize, head: &str, pos: Pos) -> Result<(), ParseError> {
    if args.len() == n {
        Ok(())
    } else {
        err(
            pos,
            format!("`{head}` expects {n} operands, found {}", args.len()),
        )
    }
}

impl Parser<'_> {
    fn atom<'s>(&self, s: &'s Sexp, what: &str) -> Result<(&'s str, Pos), ParseError> {
        match s {
            Sexp::Atom(a, p) => Ok((a.as_str(), *p)),
            Sexp::List(_, p) => err(*p, format!("expected {what}, found a list")),
        }
    }

    fn var(&self, s: &Sexp) -> Result<Var, ParseError> {
        let (a, p) = self.atom(s, "a variable")?;
        if is_ident(a) {
            Ok(Var::new(a))
        } else {
            err(p, format!("invalid variable name `{a}`"))
        }
    }

    fn vars(&self, s: &Sexp) -> Result<Vec<Var>, ParseError> {
        match s {
            Sexp::List(items, _) => items.iter().map(|i| self.var(i)).collect(),
            Sexp::Atom(_, p) => err(*p, "expected a parenthesized variable list"),
        }
    }

    fn nat(&self, s: &Sexp) -> Result<usize, ParseError> {
        let (a, p) = self.atom(s, "a natural number")?;
        if a.bytes().all(|b| b.is_ascii_digit()) {
            a.parse()
                .or_else(|_| err(p, format!("number `{a}` out of range")))
        } else {
            err(p, format!("expected a natural number, found `{a}`"))
        }
    }

    fn tag(&self, s: &Sexp) -> Result<(Tag, usize), ParseError> {
        let (a, p) = self.atom(s, "a constructor tag")?;
        if !is_ident(a) {
            return err(p, format!("invalid constructor tag `{a}`"));
        }
        let tag = Tag::new(a);
        match self.ctors.arity(&tag) {
            Some(n) => Ok((tag, n)),
            None => err(p, format!("unknown constructor `{a}`")),
        }
    }

    fn check_arity(
        &self,
        tag: &Tag,
        expected: usize,
        found: usize,
        pos: Pos,
    ) -> Result<(), ParseError> {
        if expected == found {
            Ok(())
        } else {
            err(
                pos,
                format!("arity mismatch: `{tag}` takes {expected} fields, given {found}"),
            )
        }
    }

    fn branches<T>(
        &self,
        items: &[Sexp],
        mut body: impl FnMut(&Sexp) -> Result<T, ParseError>,
    ) -> Result<Vec<(Tag, T)>, ParseError> {
        let mut out: Vec<(Tag, T)> = Vec::with_capacity(items.len());
        for item in items {
            let Sexp::List(parts, pos) = item else {
                return err(item.pos(), "expected a branch `(TAG E)`");
            };
            let [t, e] = parts.as_slice() else {
                return err(*pos, "expected a branch `(TAG E)`");
            };
            let (tag, _) = self.tag(t)?;
            if out.iter().any(|(seen, _)| *seen == tag) {
                return err(*pos, format!("duplicate branch for `{tag}`"));
            }
            out.push((tag, body(e)?));
        }
        Ok(out)
    }

    fn src(&self, s: &Sexp) -> Result<SrcExpr, ParseError> {
        let (head, args, pos) = form(s)?;
        match head {
            "var" => {
                arity(args, 1, head, pos)?;
                Ok(SrcExpr::Var(self.nat(&args[0])?))
            }
            "lam" => {
                arity(args, 1, head, pos)?;
                Ok(SrcExpr::fun(self.src(&args[0])?))
            }
            "app" => {
                arity(args, 2, head, pos)?;
                Ok(SrcExpr::app(self.src(&args[0])?, self.src(&args[1])?))
            }
            "let" => {
                arity(args, 2, head, pos)?;
                Ok(SrcExpr::let_in(self.src(&args[0])?, self.src(&args[1])?))
            }
            "con" => {
                let Some((t, fields)) = args.split_first() else {
                    return err(pos, "`con` expects a tag");
                };
                let (tag, n) = self.tag(t)?;
                self.check_arity(&tag, n, fields.len(), pos)?;
                Ok(SrcExpr::Con(
                    tag,
                    fields
                        .iter()
                        .map(|f| self.src(f))
                        .collect::<Result<_, _>>()?,
                ))
            }
            "match" => {
                let Some((scrut, bs)) = args.split_first() else {
                    return err(pos, "`match` expects a scrutinee");
                };
                Ok(SrcExpr::match_on(
                    self.src(scrut)?,
                    self.branches(bs, |e| self.src(e))?,
                ))
            }
            _ => err(pos, format!("unknown source form `{head}`")),
        }
    }

    fn anf(&self, s: &Sexp) -> Result<AnfExpr, ParseError> {
        let (head, args, pos) = form(s)?;
        match head {
            "letcon" => {
                arity(args, 4, head, pos)?;
                let (tag, n) = self.tag(&args[1])?;
                let ys = self.vars(&args[2])?;
                self.check_arity(&tag, n, ys.len(), pos)?;
                Ok(AnfExpr::let_con(
                    self.var(&args[0])?,
                    tag,
                    ys,
                    self.anf(&args[3])?,
                ))
            }
            "proj" => {
                arity(args, 4, head, pos)?;
                Ok(AnfExpr::proj(
                    self.var(&args[0])?,
                    self.var(&args[1])?,
                    self.nat(&args[2])?,
                    self.anf(&args[3])?,
                ))
            }
            "letfun" => {
                arity(args, 4, head, pos)?;
                Ok(AnfExpr::let_fun(
                    self.var(&args[0])?,
                    self.vars(&args[1])?,
                    self.anf(&args[2])?,
                    self.anf(&args[3])?,
                ))
            }
            "letapp" => {
                arity(args, 4, head, pos)?;
                Ok(AnfExpr::let_app(
                    self.var(&args[0])?,
                    self.var(&args[1])?,
                    self.vars(&args[2])?,
                    self.anf(&args[3])?,
                ))
            }
            "case" => {
                let Some((y, bs)) = args.split_first() else {
                    return err(pos, "`case` expects a variable");
                };
                Ok(AnfExpr::case(
                    self.var(y)?,
                    self.branches(bs, |e| self.anf(e))?,
                ))
            }
            "tailcall" => {
                let Some((f, ys)) = args.split_first() else {
                    return err(pos, "`tailcall` expects a function");
                };
                Ok(AnfExpr::tail_call(
                    self.var(f)?,
                    ys.iter().map(|y| self.var(y)).collect::<Result<_, _>>()?,
                ))
            }
            "halt" => {
                arity(args, 1, head, pos)?;
                Ok(AnfExpr::Halt(self.var(&args[0])?))
            }
            _ => err(pos, format!("unknown target form `{head}`")),
        }
    }

    fn ctx(&self, s: &Sexp) -> Result<Ctx, ParseError> {
        let (head, args, pos) = form(s)?;
        match head {
            "hole" => {
                arity(args, 0, head, pos)?;
                Ok(Ctx::Hole)
            }
            "letcon" => {
                arity(args, 4, head, pos)?;
                let (tag, n) = self.tag(&args[1])?;
                let ys = self.vars(&args[2])?;
                self.check_arity(&tag, n, ys.len(), pos)?;
                Ok(Ctx::let_con(
                    self.var(&args[0])?,
                    tag,
                    ys,
                    self.ctx(&args[3])?,
                ))
            }
            "proj" => {
                arity(args, 4, head, pos)?;
                Ok(Ctx::proj(
                    self.var(&args[0])?,
                    self.var(&args[1])?,
                    self.nat(&args[2])?,
                    self.ctx(&args[3])?,
                ))
            }
            "letfun" => {
                arity(args, 4, head, pos)?;
                Ok(Ctx::let_fun(
                    self.var(&args[0])?,
                    self.vars(&args[1])?,
                    self.anf(&args[2])?,
                    self.ctx(&args[3])?,
                ))
            }
            "letapp" => {
                arity(args, 4, head, pos)?;
                Ok(Ctx::let_app(
                    self.var(&args[0])?,
                    self.var(&args[1])?,
                    self.vars(&args[2])?,
                    self.ctx(&args[3])?,
                ))
            }
            "joinfun" => {
                arity(args, 4, head, pos)?;
                Ok(Ctx::join_fun(
                    self.var(&args[0])?,
                    self.var(&args[1])?,
                    self.ctx(&args[2])?,
                    self.anf(&args[3])?,
                ))
            }
            _ => err(pos, format!("unknown context form `{head}`")),
        }
    }

    fn src_value(&self, s: &Sexp) -> Result<SrcValue, ParseError> {
        let (head, args, pos) = form(s)?;
        match head {
            "con" => {
                let Some((t, fields)) = args.split_first() else {
                    return err(pos, "`con` expects a tag");
                };
                let (tag, n) = self.tag(t)?;
                self.check_arity(&tag, n, fields.len(), pos)?;
                let fs = fields
                    .iter()
                    .map(|f| self.src_value(f))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SrcValue::Con(tag, fs.into()))
            }
            "clos" => {
                arity(args, 2, head, pos)?;
                let Sexp::List(env, _) = &args[0] else {
                    return err(args[0].pos(), "expected a parenthesized value list");
                };
                let env = env
                    .iter()
                    .map(|v| self.src_value(v))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SrcValue::Clos(Arc::new(SrcClosure {
                    env,
                    body: Arc::new(self.src(&args[1])?),
                })))
            }
            _ => err(pos, format!("unknown source value form `{head}`")),
        }
    }

    fn src_env(&self, s: &Sexp) -> Result<Vec<SrcValue>, ParseError> {
        let (head, args, pos) = form(s)?;
        if head != "values" {
            return err(pos, "expected `(values V...)`");
        }
        args.iter().map(|v| self.src_value(v)).collect()
    }

    fn anf_value(&self, s: &Sexp) -> Result<AnfValue, ParseError> {
        let (head, args, pos) = form(s)?;
        match head {
            "con" => {
                let Some((t, fields)) = args.split_first() else {
                    return err(pos, "`con` expects a tag");
                };
                let (tag, n) = self.tag(t)?;
                self.check_arity(&tag, n, fields.len(), pos)?;
                let fs = fields
                    .iter()
                    .map(|f| self.anf_value(f))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(AnfValue::Con(tag, fs.into()))
            }
            "clos" => {
                arity(args, 4, head, pos)?;
                Ok(AnfValue::clos(
                    self.anf_env(&args[0])?,
                    self.var(&args[1])?,
                    self.vars(&args[2])?,
                    self.anf(&args[3])?,
                ))
            }
            _ => err(pos, format!("unknown target value form `{head}`")),
        }
    }

    fn anf_env(&self, s: &Sexp) -> Result<AnfEnv, ParseError> {
        let (head, args, pos) = form(s)?;
        if head != "env" {
            return err(pos, "expected `(env (X V)...)`");
        }
        let mut env = AnfEnv::new();
        for b in args {
            let Sexp::List(parts, bpos) = b else {
                return err(b.pos(), "expected a binding `(X V)`");
            };
            let [x, v] = parts.as_slice() else {
                return err(*bpos, "expected a binding `(X V)`");
            };
            let x = self.var(x)?;
            if env.contains(&x) {
                return err(*bpos, format!("duplicate binding for `{x}`"));
            }
            env.insert(x, self.anf_value(v)?);
        }
        Ok(env)
    }
}

struct Seq<'a, T>(&'a [T]);

impl<T: fmt::Display> fmt::Display for Seq<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            x.fmt(f)?;
        }
        Ok(())
    }
}

/// Space-prefixed items, for trailing operand lists.
struct Tail<'a, T>(&'a [T]);

impl<T: fmt::Display> fmt::Display for Tail<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|x| write!(f, " {x}"))
    }
}

impl fmt::Display for SrcExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SrcExpr::Var(n) => write!(f, "(var {n})"),
            SrcExpr::Fun(b) => write!(f, "(lam {b})"),
            SrcExpr::App(a, b) => write!(f, "(app {a} {b})"),
            SrcExpr::Let(a, b) => write!(f, "(let {a} {b})"),
            SrcExpr::Con(t, args) => write!(f, "(con {t}{})", Tail(args)),
            SrcExpr::Match(s, bs) => {
                write!(f, "(match {s}")?;
                for (t, b) in bs {
                    write!(f, " ({t} {b})")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for AnfExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnfExpr::LetCon { x, tag, args, rest } => {
                write!(f, "(letcon {x} {tag} ({}) {rest})", Seq(args))
            }
            AnfExpr::Proj { x, y, index, rest } => write!(f, "(proj {x} {y} {index} {rest})"),
            AnfExpr::LetFun {
                f: g,
                params,
                body,
                rest,
            } => write!(f, "(letfun {g} ({}) {body} {rest})", Seq(params)),
            AnfExpr::LetApp {
                x,
                f: g,
                args,
                rest,
            } => write!(f, "(letapp {x} {g} ({}) {rest})", Seq(args)),
            AnfExpr::Case { y, branches } => {
                write!(f, "(case {y}")?;
                for (t, b) in branches {
                    write!(f, " ({t} {b})")?;
                }
                f.write_str(")")
            }
            AnfExpr::TailCall { f: g, args } => write!(f, "(tailcall {g}{})", Tail(args)),
            AnfExpr::Halt(x) => write!(f, "(halt {x})"),
        }
    }
}

impl fmt::Display for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ctx::Hole => f.write_str("(hole)"),
            Ctx::LetCon { x, tag, args, rest } => {
                write!(f, "(letcon {x} {tag} ({}) {rest})", Seq(args))
            }
            Ctx::Proj { x, y, index, rest } => write!(f, "(proj {x} {y} {index} {rest})"),
            Ctx::LetApp {
                x,
                f: g,
                args,
                rest,
            } => write!(f, "(letapp {x} {g} ({}) {rest})", Seq(args)),
            Ctx::LetFun {
                f: g,
                params,
                body,
                rest,
            } => write!(f, "(letfun {g} ({}) {body} {rest})", Seq(params)),
            Ctx::JoinFun {
                f: g,
                param,
                body,
                rest,
            } => write!(f, "(joinfun {g} {param} {body} {rest})"),
        }
    }
}

impl fmt::Display for SrcValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SrcValue::Con(t, fs) => write!(f, "(con {t}{})", Tail(fs)),
            SrcValue::Clos(c) => write!(f, "(clos ({}) {})", Seq(&c.env), c.body),
        }
    }
}

impl fmt::Display for AnfValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnfValue::Con(t, fs) => write!(f, "(con {t}{})", Tail(fs)),
            AnfValue::Clos(c) => write!(
                f,
                "(clos {} {} ({}) {})",
                c.env,
                c.name,
                Seq(&c.params),
                c.body
            ),
        }
    }
}

impl fmt::Display for AnfEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(env")?;
        for (x, v) in self.iter() {
            write!(f, " ({x} {v})")?;
        }
        f.write_str(")")
    }
}

/// Renders a source environment as `(values V...)`.
pub fn render_src_env(env: &[SrcValue]) -> String {
    format!("(values{})", Tail(env))
}
