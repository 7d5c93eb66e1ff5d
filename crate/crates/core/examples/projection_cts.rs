//! Complete test sets for the example miter of (x1 ∨ x2) ∧ x3 against
//! (x1 ∧ x3) ∨ (x2 ∧ x3): a projection on the inputs, then a run keeping
//! every variable.

use semstr::circuit::{example_circuit, write_circuit};
use semstr::cts::{cts_for_projection, run_tests, CtsOutcome};
use semstr::formula::VarId;
use semstr::sas::SasConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = example_circuit();
    print!("{}", write_circuit(&n));

    let CtsOutcome::Complete(p) = cts_for_projection(&n, n.inputs(), &[], &SasConfig::default())? else {
        unreachable!("the miter is constant 0")
    };
    println!("H(X) has {} clauses; certificate of {} members", p.h.len(), p.cert.len());
    print!("{}", p.tests.to_text());
    println!("all outputs 0: {}", run_tests(&n, &p.tests.tests).first_failing.is_none());

    let all: Vec<VarId> = (0..n.num_vars() as usize).map(VarId::from_idx).collect();
    let CtsOutcome::Complete(full) = cts_for_projection(&n, &all, &[], &SasConfig::default())? else { unreachable!() };
    let tests: Vec<String> = full.tests.tests.iter().map(|t| t.to_string()).collect();
    println!("keeping all variables: {} members, {} distinct input tests {tests:?}", full.cert.len(), tests.len());
    Ok(())
}
