//! Splitting the keep-set clauses of A(X, Y) ∧ B(Y, Z) by ancestry: the A
//! part is implied by A, the B part by B, and together they are
//! unsatisfiable.

use semstr::formula::{CnfFormula, Lit, Side, VarId};
use semstr::sas::{interpolant_split, solve, SasConfig, SasResult};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // x = 1, 2; y = 3, 4; z = 5
    let mut g = CnfFormula::new(5);
    let lits = |xs: &[i64]| xs.iter().map(|&x| Lit::from_dimacs(x)).collect::<Vec<_>>();
    for c in [&[1, 3][..], &[-1, 2], &[-2, 4]] {
        g.add_tagged(lits(c), Side::A)?;
    }
    for c in [&[-3, 5][..], &[-3, -5], &[-4, 5], &[-4, -5]] {
        g.add_tagged(lits(c), Side::B)?;
    }
    g.set_keep([VarId::new(3), VarId::new(4)])?;
    let solved = solve(g, &SasConfig::default())?;
    let SasResult::Unsat { h, .. } = &solved.result else { unreachable!("A ∧ B is unsatisfiable") };
    let (a, b) = interpolant_split(&solved.formula, h)?;
    let show = |ids: &[semstr::formula::ClauseId]| {
        ids.iter()
            .map(|&id| {
                format!("{:?}", solved.formula.clause(id).lits().iter().map(|l| l.to_dimacs()).collect::<Vec<_>>())
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("h_A = {}", show(&a));
    println!("h_B = {}", show(&b));
    Ok(())
}
