//! Certificates as files: write H and its stable set, check them, then show
//! how the checker reports a broken certificate.

use semstr::circuit::example_circuit;
use semstr::cts::{cts_for_projection, CtsOutcome};
use semstr::formula::{parse_dimacs, write_dimacs, Domain};
use semstr::sas::SasConfig;
use semstr::ssa::{verify_ssa, SsaCertificate, SsaFormula};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = example_circuit();
    let CtsOutcome::Complete(p) = cts_for_projection(&n, n.inputs(), &[], &SasConfig::default())? else {
        unreachable!()
    };
    let (h_text, cert_text) = (write_dimacs(&p.h), p.cert.to_text());
    print!("{h_text}{cert_text}");

    let h = parse_dimacs(&h_text)?;
    let cert = SsaCertificate::parse(&cert_text)?;
    let sf = SsaFormula::over(&h, Domain::new(cert.over.clone()))?;
    println!("check: {:?}", verify_ssa(&sf, &cert));

    let mut broken = cert.clone();
    broken.members.pop();
    broken.phi.pop();
    match verify_ssa(&sf, &broken) {
        Ok(()) => println!("unexpectedly valid"),
        Err(v) => println!("without its last member: {v}"),
    }
    Ok(())
}
