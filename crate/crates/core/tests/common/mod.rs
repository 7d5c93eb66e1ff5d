//! Seeded instance generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semstr::formula::{CnfFormula, Lit, VarId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A clause over distinct variables drawn from `vars`.
pub fn random_clause(rng: &mut ChaCha8Rng, vars: &[VarId], width: usize) -> Vec<Lit> {
    vars.choose_multiple(rng, width.min(vars.len())).map(|&v| Lit::new(v, rng.gen())).collect()
}

/// `m` clauses over variables 1..=n, widths uniform in `1..=max_width`.
pub fn random_cnf(rng: &mut ChaCha8Rng, n: u32, m: usize, max_width: usize) -> CnfFormula {
    let vars: Vec<VarId> = (1..=n).map(VarId::new).collect();
    let mut f = CnfFormula::new(n);
    for _ in 0..m {
        let w = rng.gen_range(1..=max_width);
        f.add_clause(random_clause(rng, &vars, w)).unwrap();
    }
    f
}

pub fn random_3cnf(rng: &mut ChaCha8Rng, n: u32, m: usize) -> CnfFormula {
    let vars: Vec<VarId> = (1..=n).map(VarId::new).collect();
    let mut f = CnfFormula::new(n);
    for _ in 0..m {
        f.add_clause(random_clause(rng, &vars, 3)).unwrap();
    }
    f
}

/// Dense values for variables 1..=n from the bits of `idx`.
pub fn dense(idx: u64, n: u32) -> Vec<bool> {
    (0..n).map(|i| (idx >> i) & 1 == 1).collect()
}

/// Every model of `f` over its universe.
pub fn models(f: &CnfFormula) -> Vec<Vec<bool>> {
    let n = f.num_vars();
    assert!(n <= 22, "brute force over {n} variables");
    (0..1u64 << n).map(|i| dense(i, n)).filter(|v| f.satisfied_by_dense(v)).collect()
}

pub fn satisfiable(f: &CnfFormula) -> bool {
    let n = f.num_vars();
    assert!(n <= 22, "brute force over {n} variables");
    (0..1u64 << n).any(|i| f.satisfied_by_dense(&dense(i, n)))
}

/// Whether every model of `f` satisfies every clause of `g` (same universe).
pub fn implies(f: &CnfFormula, g: &CnfFormula) -> bool {
    models(f).iter().all(|m| g.satisfied_by_dense(m))
}
