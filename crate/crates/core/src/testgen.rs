//! Seeded generation of well-formed source terms and values, and a greedy
//! shrinker.
//!
//! Trial `i` of a campaign draws from its own ChaCha stream keyed by a mix
//! of the campaign seed and `i`, so trials can run in any order and be
//! replayed one at a time.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::eval_src;
use crate::syntax::{CtorTable, SrcExpr, SrcValue, Tag};

/// Fuel used to weed out terms that get stuck.
const PROBE_BUDGET: u64 = 10_000;
const MAX_ATTEMPTS: usize = 64;

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_depth: usize,
    pub max_ctor_args: usize,
    pub app_bias: f64,
    pub let_bias: f64,
    pub match_bias: f64,
    pub ctors: CtorTable,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 6,
            max_ctor_args: 2,
            app_bias: 0.3,
            let_bias: 0.15,
            match_bias: 0.1,
            ctors: CtorTable::standard(),
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        GenConfig {
            seed,
            ..GenConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ws = [self.app_bias, self.let_bias, self.match_bias];
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err("weights must be non-negative".into());
        }
        if ws.iter().sum::<f64>() > 1.0 {
            return Err("app, let and match weights must sum to at most 1".into());
        }
        if self.max_depth < 1 {
            return Err("max_depth must be at least 1".into());
        }
        Ok(())
    }
}

/// SplitMix64 finaliser folded over `parts`.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x9E37_79B9_7F4A_7C15u64, |acc, &p| {
        let mut z = acc ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(acc << 6);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    })
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(&[seed, trial]))
}

/// A closed, well-formed term, deterministic in `(cfg.seed, trial)`.
/// Terms that get stuck within a small probe budget are redrawn.
pub fn gen_src(cfg: &GenConfig, trial: u64) -> SrcExpr {
    let mut rng = trial_rng(cfg.seed, trial);
    let mut g = Gen { cfg, rng: &mut rng };
    let mut e = g.term(cfg.max_depth, 0);
    for _ in 1..MAX_ATTEMPTS {
        if eval_src(&[], &e, PROBE_BUDGET, &cfg.ctors).is_ok() {
            break;
        }
        e = g.term(cfg.max_depth, 0);
    }
    e
}

/// An open term over one to three free indices together with an
/// environment that closes it.
pub fn gen_open(cfg: &GenConfig, trial: u64) -> (SrcExpr, Vec<SrcValue>) {
    let mut rng = trial_rng(cfg.seed, trial);
    let mut g = Gen { cfg, rng: &mut rng };
    let mut attempt = || {
        let n = g.rng.gen_range(1..=3);
        let env: Vec<SrcValue> = (0..n).map(|_| g.value(2)).collect();
        let e = g.term(cfg.max_depth, n);
        (e, env)
    };
    let mut out = attempt();
    for _ in 1..MAX_ATTEMPTS {
        if eval_src(&out.1, &out.0, PROBE_BUDGET, &cfg.ctors).is_ok() {
            break;
        }
        out = attempt();
    }
    out
}

/// A source value: a constructor tree or a closure over an empty
/// environment whose body has one free index.
pub fn gen_src_value<R: Rng>(rng: &mut R, ctors: &CtorTable, depth: usize) -> SrcValue {
    let cfg = GenConfig {
        ctors: ctors.clone(),
        max_depth: 3,
        ..GenConfig::default()
    };
    Gen { cfg: &cfg, rng }.value(depth)
}

/// The value drawn for `(cfg.seed, trial)`.
pub fn gen_value(cfg: &GenConfig, trial: u64) -> SrcValue {
    let mut rng = trial_rng(cfg.seed, trial);
    Gen { cfg, rng: &mut rng }.value(cfg.max_depth.min(3))
}

struct Gen<'a, R> {
    cfg: &'a GenConfig,
    rng: &'a mut R,
}

impl<R: Rng> Gen<'_, R> {
    fn ctors_upto(&self, max_args: usize) -> Vec<(Tag, usize)> {
        self.cfg
            .ctors
            .iter()
            .filter(|(_, a)| *a <= max_args)
            .map(|(t, a)| (t.clone(), a))
            .collect()
    }

    fn leaf(&mut self, binders: usize) -> SrcExpr {
        let nullary = self.ctors_upto(0);
        let mut choices = vec![0u8];
        if !nullary.is_empty() {
            choices.push(1);
        }
        if binders > 0 {
            choices.push(2);
        }
        match *choices.choose(self.rng).expect("non-empty") {
            1 => {
                let (t, _) = nullary.choose(self.rng).expect("non-empty");
                SrcExpr::Con(t.clone(), vec![])
            }
            2 => SrcExpr::Var(self.rng.gen_range(0..binders)),
            _ => SrcExpr::fun(SrcExpr::var(0)),
        }
    }

    fn term(&mut self, depth: usize, binders: usize) -> SrcExpr {
        if depth <= 1 {
            return self.leaf(binders);
        }
        let c = self.cfg;
        let roll: f64 = self.rng.gen();
        if roll < c.app_bias {
            let f = if self.rng.gen_bool(0.6) {
                SrcExpr::fun(self.term(depth - 1, binders + 1))
            } else {
                self.term(depth - 1, binders)
            };
            return SrcExpr::app(f, self.term(depth - 1, binders));
        }
        if roll < c.app_bias + c.let_bias {
            let bound = self.term(depth - 1, binders);
            return SrcExpr::let_in(bound, self.term(depth - 1, binders + 1));
        }
        if roll < c.app_bias + c.let_bias + c.match_bias {
            let scrutinee = if self.rng.gen_bool(0.6) {
                self.con(depth - 1, binders)
            } else {
                self.term(depth - 1, binders)
            };
            let table: Vec<(Tag, usize)> =
                self.cfg.ctors.iter().map(|(t, a)| (t.clone(), a)).collect();
            let branches = table
                .into_iter()
                .map(|(t, a)| (t, self.term(depth - 1, binders + a)))
                .collect();
            return SrcExpr::match_on(scrutinee, branches);
        }
        let forms = if binders > 0 { 3 } else { 2 };
        match self.rng.gen_range(0..forms) {
            0 => SrcExpr::fun(self.term(depth - 1, binders + 1)),
            1 => self.con(depth - 1, binders),
            _ => SrcExpr::Var(self.rng.gen_range(0..binders)),
        }
    }

    fn con(&mut self, depth: usize, binders: usize) -> SrcExpr {
        let table = self.ctors_upto(self.cfg.max_ctor_args);
        let Some((t, a)) = table.choose(self.rng).cloned() else {
            return self.leaf(binders);
        };
        let args = (0..a).map(|_| self.term(depth.max(1), binders)).collect();
        SrcExpr::Con(t, args)
    }

    fn value(&mut self, depth: usize) -> SrcValue {
        let table = self.ctors_upto(if depth == 0 {
            0
        } else {
            self.cfg.max_ctor_args
        });
        if table.is_empty() || self.rng.gen_bool(0.35) {
            let body = self.term(self.cfg.max_depth.min(3), 1);
            return SrcValue::clos(vec![], body);
        }
        let (t, a) = table.choose(self.rng).cloned().expect("non-empty");
        let fields = (0..a)
            .map(|_| self.value(depth.saturating_sub(1)))
            .collect();
        SrcValue::con(t, fields)
    }
}

/// Greedily shrinks a closed term while `failing` keeps holding.
pub fn shrink(e: &SrcExpr, ctors: &CtorTable, failing: &dyn Fn(&SrcExpr) -> bool) -> SrcExpr {
    shrink_open(e, 0, ctors, failing)
}

/// As [`shrink`], for a term with `depth` free indices. Every accepted step
/// strictly decreases the size and keeps the term well-formed at `depth`.
pub fn shrink_open(
    e: &SrcExpr,
    depth: usize,
    ctors: &CtorTable,
    failing: &dyn Fn(&SrcExpr) -> bool,
) -> SrcExpr {
    let nullary = ctors.iter().find(|(_, a)| *a == 0).map(|(t, _)| t.clone());
    let mut current = e.clone();
    'outer: loop {
        let size = current.size();
        for cand in candidates(&current, depth, ctors, nullary.as_ref()) {
            if cand.size() < size && failing(&cand) {
                current = cand;
                continue 'outer;
            }
        }
        return current;
    }
}

fn candidates(e: &SrcExpr, depth: usize, ctors: &CtorTable, nullary: Option<&Tag>) -> Vec<SrcExpr> {
    let mut out = Vec::new();
    match e {
        SrcExpr::Var(_) => {}
        SrcExpr::Fun(b) => {
            if !b.mentions(0, ctors) {
                out.push(b.unshift(0, ctors));
            }
        }
        SrcExpr::App(a, b) => {
            out.push((**a).clone());
            out.push((**b).clone());
        }
        SrcExpr::Let(a, b) => {
            if !b.mentions(0, ctors) {
                out.push(b.unshift(0, ctors));
            }
            out.push((**a).clone());
        }
        SrcExpr::Con(_, args) => out.extend(args.iter().cloned()),
        SrcExpr::Match(s, bs) => {
            out.push((**s).clone());
            for (t, b) in bs {
                let a = ctors.arity(t).unwrap_or(0);
                if (0..a).all(|i| !b.mentions(i, ctors)) {
                    let mut body = b.clone();
                    for _ in 0..a {
                        body = body.unshift(0, ctors);
                    }
                    out.push(body);
                }
            }
        }
    }
    if e.size() > 1 {
        if let Some(t) = nullary {
            out.push(SrcExpr::Con(t.clone(), vec![]));
        }
        out.extend((0..depth).map(SrcExpr::Var));
    }
    // the same moves applied below the root
    match e {
        SrcExpr::Var(_) => {}
        SrcExpr::Fun(b) => {
            for c in candidates(b, depth + 1, ctors, nullary) {
                out.push(SrcExpr::fun(c));
            }
        }
        SrcExpr::App(a, b) => {
            for c in candidates(a, depth, ctors, nullary) {
                out.push(SrcExpr::app(c, (**b).clone()));
            }
            for c in candidates(b, depth, ctors, nullary) {
                out.push(SrcExpr::app((**a).clone(), c));
            }
        }
        SrcExpr::Let(a, b) => {
            for c in candidates(a, depth, ctors, nullary) {
                out.push(SrcExpr::let_in(c, (**b).clone()));
            }
            for c in candidates(b, depth + 1, ctors, nullary) {
                out.push(SrcExpr::let_in((**a).clone(), c));
            }
        }
        SrcExpr::Con(t, args) => {
            for (i, arg) in args.iter().enumerate() {
                for c in candidates(arg, depth, ctors, nullary) {
                    let mut new = args.clone();
                    new[i] = c;
                    out.push(SrcExpr::Con(t.clone(), new));
                }
            }
        }
        SrcExpr::Match(s, bs) => {
            for c in candidates(s, depth, ctors, nullary) {
                out.push(SrcExpr::match_on(c, bs.clone()));
            }
            for (i, (t, b)) in bs.iter().enumerate() {
                let a = ctors.arity(t).unwrap_or(0);
                for c in candidates(b, depth + a, ctors, nullary) {
                    let mut new = bs.clone();
                    new[i] = (t.clone(), c);
                    out.push(SrcExpr::match_on((**s).clone(), new));
                }
            }
        }
    }
    out
}
