//! Stable sets of assignments: neighbourhoods, construction, checking and
//! the one-flip-at-a-time walk towards a model.

use semstr::formula::{Assignment, CnfFormula, Domain};
use semstr::ssa::{
    build_path, build_ssa, nbhd, pick_center, verify_ssa, CenterPolicy, SsaConfig, SsaFormula, SsaOutcome,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // (v1 ∨ v2 ∨ v3) ∧ ¬v1 ∧ ¬v2 ∧ ¬v3
    let f = CnfFormula::from_dimacs_clauses(3, &[&[1, 2, 3], &[-1], &[-2], &[-3]])?;
    let h = SsaFormula::from_formula(&f);
    let zero = Assignment::parse("000").unwrap();

    let n: Vec<String> = nbhd(&zero, &f.clauses()[0], &Domain::universe(3))?.iter().map(|a| a.to_string()).collect();
    println!("Nbhd(000, C1) = {n:?}");

    let SsaOutcome::Cert(cert) = build_ssa(&h, &zero, &SsaConfig::default())? else {
        unreachable!("the formula is unsatisfiable")
    };
    println!("stable set around {}:", cert.center);
    for (m, c) in cert.members.iter().zip(&cert.phi) {
        println!("  {m} -> {c}");
    }
    println!("verify: {:?}", verify_ssa(&h, &cert));
    print!("certificate file:\n{}", cert.to_text());

    // On a satisfiable formula the construction stops at a model instead.
    let g = CnfFormula::from_dimacs_clauses(3, &[&[1, 2], &[-1, 3], &[-2, 3]])?;
    let hg = SsaFormula::from_formula(&g);
    let center = pick_center(&hg, CenterPolicy::default(), 0);
    if let SsaOutcome::Sat(s) = build_ssa(&hg, &center, &SsaConfig::default())? {
        println!("model found from center {center}: {s}");
        let path = build_path(&hg, &center, &s)?;
        let steps: Vec<String> = path.steps.iter().map(|a| a.to_string()).collect();
        println!("path ({} flips): {}", path.len(), steps.join(" -> "));
    }
    Ok(())
}
