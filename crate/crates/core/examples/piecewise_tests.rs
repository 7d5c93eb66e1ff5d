//! Piecewise test streams: per-block projection CTSs sampled jointly. With
//! single-input blocks the stream is plain uniform random testing.

use semstr::circuit::{mk_miter, random_circuit};
use semstr::cts::{piecewise_cts, random_tests, Partition, PiecewiseOutcome};
use semstr::sas::SasConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = random_circuit(12, 40, 3, 7);
    let n = mk_miter(&c, &c)?;
    for k in [1, 2, 3] {
        let part = Partition::even(n.inputs(), k)?;
        let PiecewiseOutcome::Stream(p) = piecewise_cts(&n, &part, 200, 1, &SasConfig::default())? else {
            unreachable!("self-miter")
        };
        let sizes: Vec<String> = p
            .blocks
            .iter()
            .map(|b| match b {
                semstr::cts::BlockTests::Cts { tests, .. } => tests.len().to_string(),
                other => format!("{other:?}"),
            })
            .collect();
        println!(
            "k={k}: block CTS sizes {sizes:?}, product {}, 200 draws with {} duplicates",
            p.product_size(),
            p.duplicates
        );
    }
    let PiecewiseOutcome::Stream(p) =
        piecewise_cts(&n, &Partition::singletons(n.inputs()), 50, 9, &SasConfig::default())?
    else {
        unreachable!()
    };
    println!("singletons equal uniform random: {}", p.stream == random_tests(12, 50, 9));
    Ok(())
}
