//! Local properties: a clause over the outputs of a transition-like circuit
//! that must hold whenever the inputs satisfy an invariant.

use semstr::circuit::parse_circuit;
use semstr::harness::{local_property, parse_named_clauses, LocalOutcome};
use semstr::sas::SasConfig;

const MT: &str = "\
inputs s1 s2 i
gate n1 = AND(s1,i)
gate n2 = OR(s2,n1)
gate n3 = XOR(s1,s2)
output n2
output n3
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mt = parse_circuit(MT)?;
    let clause = parse_named_clauses(&mt, "n2 n3")?.remove(0);
    for inv in ["", "s1 s2"] {
        let p = parse_named_clauses(&mt, inv)?;
        let (_, out, _) = local_property(&mt, &clause, &p, &SasConfig::default())?;
        match out {
            LocalOutcome::Holds(cts) => {
                println!("invariant {inv:?}: holds, {} tests\n{}", cts.tests.len(), cts.tests.to_text())
            }
            LocalOutcome::Violated(x) => println!("invariant {inv:?}: violated at {x:?}"),
        }
    }
    Ok(())
}
