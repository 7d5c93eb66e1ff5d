//! Importing an ASCII AIGER netlist and checking it against a native
//! description of the same function.

use semstr::circuit::{mk_miter, parse_aag, parse_circuit, write_circuit};
use semstr::cts::{cts_for_projection, CtsOutcome};
use semstr::sas::SasConfig;

// out = ¬(¬a ∧ ¬b) = a ∨ b
const AAG: &str = "\
aag 3 2 0 1 1
2
4
7
6 3 5
i0 a
i1 b
o0 out
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let aig = parse_aag(AAG)?;
    print!("imported:\n{}", write_circuit(&aig));
    for (name, op) in [("or", "OR"), ("and", "AND")] {
        let native = parse_circuit(&format!("inputs a b\ngate out = {op}(a,b)\noutput out\n"))?;
        let m = mk_miter(&aig, &native)?;
        match cts_for_projection(&m, m.inputs(), &[], &SasConfig::default())? {
            CtsOutcome::Complete(p) => println!("vs {name}: equivalent, {} tests prove it", p.tests.len()),
            CtsOutcome::Counterexample(x) => println!("vs {name}: differ on a,b = {x:?}"),
        }
    }
    Ok(())
}
