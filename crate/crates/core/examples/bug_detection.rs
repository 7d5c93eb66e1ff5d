//! Seeded single-gate bugs: tests complete for the original circuit against
//! random tests of the same budget.

use semstr::circuit::random_circuit;
use semstr::harness::{bug_experiment, BugConfig, Strategy};
use semstr::sas::SasConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // the first seed whose output is not constant
    let c = (0x7000..)
        .map(|s| random_circuit(10, 60, 3, s))
        .find(|c| (0.1..0.9).contains(&c.density()))
        .expect("some seed");
    let cfg = BugConfig { bugs: 12, strategy: Strategy::Cts, budget: None, seed: 1, random_repeats: 16 };
    let exp = bug_experiment(&c, &cfg, &SasConfig::default())?;
    println!("{} tests from a certificate of {} members", exp.tests, exp.ssa_members);
    for r in &exp.rows {
        println!(
            "{:>2} {:<24} {:<10} cts {:>5} random {:>7}",
            r.bug,
            r.mutation,
            r.status.name(),
            r.cts_until.map_or("-".into(), |u| u.to_string()),
            if r.random_until.is_empty() { "-".into() } else { format!("{:.2}", r.random_censored()) }
        );
    }
    let p = exp.paired();
    println!("paired CTS - random over {} bugs: mean {:.2}, 95% upper bound {:.2}", p.n, p.mean, p.upper);
    Ok(())
}
