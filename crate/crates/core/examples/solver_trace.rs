//! The SemStr search on a four-variable formula: exclude set W = {w1, w2},
//! keep set V = {v1, v2}. Prints the final keep-set clauses H, their
//! certificate, and the resolution history of every derived clause.

use semstr::formula::{parse_dimacs, write_dimacs};
use semstr::sas::{check_provenance, solve, SasConfig, SasResult};

const FORMULA: &str = "\
c w1 = 1, w2 = 2, v1 = 3, v2 = 4
c keep 3 4
p cnf 4 6
1 3 0
1 2 0
-2 4 0
-3 -4 0
-1 3 0
-1 4 0
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = parse_dimacs(FORMULA)?;
    let solved = solve(g, &SasConfig::default())?;
    let f = &solved.formula;
    for c in f.clauses() {
        let lits: Vec<i64> = c.lits().iter().map(|l| l.to_dimacs()).collect();
        match c.origin.derivation() {
            Some(d) => println!("{}: {lits:?} = resolve({}, {}) on {}", c.id, d.left, d.right, d.pivot),
            None => println!("{}: {lits:?} input", c.id),
        }
    }
    println!("provenance replays: {}", check_provenance(f).is_ok());
    println!("{:?}", solved.stats);
    match &solved.result {
        SasResult::Sat(m) => println!("satisfiable: {m:?}"),
        SasResult::Unsat { h, cert } => {
            println!(
                "H = {h:?}, center {}, members {:?}",
                cert.center,
                cert.members.iter().map(|m| m.to_string()).collect::<Vec<_>>()
            );
            let (hf, cert) = solved.h_formula().expect("unsat");
            print!("H as DIMACS:\n{}certificate:\n{}", write_dimacs(&hf), cert.to_text());
        }
    }
    Ok(())
}
