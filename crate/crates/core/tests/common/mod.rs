#![allow(dead_code)]

use anfbench::syntax::{AnfExpr, CtorTable, SrcExpr, SrcValue, Tag, Var};
use anfbench::testgen::{gen_open, gen_src, trial_rng, GenConfig};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn ctors() -> CtorTable {
    CtorTable::standard()
}

pub fn term(seed: u64) -> SrcExpr {
    gen_src(&GenConfig::with_seed(seed), 0)
}

pub fn open_term(seed: u64) -> (SrcExpr, Vec<SrcValue>) {
    gen_open(&GenConfig::with_seed(seed), 0)
}

/// A random continuation over `pool`, binding its own names with prefix `q`.
pub fn continuation(seed: u64, pool: &[Var], ctors: &CtorTable) -> AnfExpr {
    let mut rng = trial_rng(seed, 0xC0);
    let mut pool = pool.to_vec();
    let mut frames = Vec::new();
    for fresh in 0..rng.gen_range(0..4) {
        let q = Var::new(format!("q{fresh}"));
        let frame = match rng.gen_range(0..3) {
            0 => {
                let table: Vec<(Tag, usize)> = ctors.iter().map(|(t, a)| (t.clone(), a)).collect();
                let (t, a) = table.choose(&mut rng).unwrap().clone();
                let args = (0..a)
                    .map(|_| pool.choose(&mut rng).unwrap().clone())
                    .collect();
                Frame::Con(q.clone(), t, args)
            }
            1 => Frame::App(
                q.clone(),
                pool.choose(&mut rng).unwrap().clone(),
                pool.choose(&mut rng).unwrap().clone(),
            ),
            _ => {
                let y = pool.choose(&mut rng).unwrap().clone();
                Frame::Proj(q.clone(), y, rng.gen_range(0..2))
            }
        };
        frames.push(frame);
        pool.push(q);
    }
    let mut e = AnfExpr::Halt(pool.choose(&mut rng).unwrap().clone());
    for f in frames.into_iter().rev() {
        e = match f {
            Frame::Con(x, t, args) => AnfExpr::let_con(x, t, args, e),
            Frame::App(x, f, a) => AnfExpr::let_app(x, f, vec![a], e),
            Frame::Proj(x, y, i) => AnfExpr::proj(x, y, i, e),
        };
    }
    e
}

enum Frame {
    Con(Var, Tag, Vec<Var>),
    App(Var, Var, Var),
    Proj(Var, Var, usize),
}
