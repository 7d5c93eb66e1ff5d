//! Corner cases: AND the output of a small circuit with fresh inputs and
//! count how many tests reach K = 1.

use semstr::circuit::random_circuit;
use semstr::harness::{corner_experiment, CornerConfig};
use semstr::sas::SasConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let r = (3..).map(|s| random_circuit(8, 12, 3, s)).find(|r| (0.1..0.9).contains(&r.density())).expect("some seed");
    println!("density of R: {:.4}", r.density());
    for and_extra in [0, 6, 10] {
        let cfg = CornerConfig { and_extra, random_budget: 10_000, seed: 1 };
        let res = corner_experiment(&r, &cfg, &SasConfig::default())?;
        println!(
            "{and_extra:>2} extra inputs: CTS {}/{} = {:.4}, random {}/{} = {:.5} (expected {:.5})",
            res.hits,
            res.tests,
            res.hit_ratio(),
            res.random_hits,
            res.random_tests,
            res.random_ratio(),
            res.expected_random_ratio.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
