//! Complete test sets: extraction from certificates, projection CTSs and
//! piecewise test streams.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::circuit::{encode_property, Circuit};
use crate::formula::{Assignment, CnfFormula, Lit, VarId};
use crate::sas::{solve, SasConfig, SasError, SasResult, SasStats};
use crate::ssa::SsaCertificate;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CtsError {
    #[error("variable {0} is not covered by the certificate")]
    Scope(VarId),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("test set line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("test set does not match the circuit inputs: {0}")]
    Inputs(String),
    #[error(transparent)]
    Sas(#[from] SasError),
}

impl CtsError {
    pub fn is_limit(&self) -> bool {
        matches!(self, CtsError::Sas(SasError::LimitExceeded(_)))
    }
}

/// Where a test set came from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Provenance {
    pub strategy: u8,
    pub projection: Vec<String>,
    pub blocks: Vec<Vec<String>>,
    pub seed: Option<u64>,
    pub cert_hashes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestSet {
    pub over: Vec<VarId>,
    pub names: Vec<String>,
    pub tests: Vec<Assignment>,
    pub provenance: Provenance,
}

impl TestSet {
    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }

    /// Reorders the columns to `c`'s input order. Every circuit input must
    /// appear by name.
    pub fn bind(&self, c: &Circuit) -> Result<TestSet, CtsError> {
        let cols: Vec<usize> = c
            .inputs()
            .iter()
            .map(|&v| {
                self.names
                    .iter()
                    .position(|n| n == c.name(v))
                    .ok_or_else(|| CtsError::Inputs(format!("missing column {}", c.name(v))))
            })
            .collect::<Result<_, _>>()?;
        if cols.len() != self.names.len() {
            return Err(CtsError::Inputs("extra columns".into()));
        }
        let tests = self
            .tests
            .iter()
            .map(|t| Assignment::from_bools(&cols.iter().map(|&i| t.get(i)).collect::<Vec<_>>()))
            .collect();
        Ok(TestSet {
            over: c.inputs().to_vec(),
            names: c.inputs().iter().map(|&v| c.name(v).to_string()).collect(),
            tests,
            provenance: self.provenance.clone(),
        })
    }

    pub fn to_text(&self) -> String {
        let p = &self.provenance;
        let mut s = String::new();
        writeln!(s, "# strategy {}", p.strategy).unwrap();
        if !p.projection.is_empty() {
            writeln!(s, "# projection {}", p.projection.join(" ")).unwrap();
        }
        if !p.blocks.is_empty() {
            let b: Vec<String> = p.blocks.iter().map(|b| b.join(",")).collect();
            writeln!(s, "# blocks {}", b.join(" ")).unwrap();
        }
        if let Some(seed) = p.seed {
            writeln!(s, "# seed {seed}").unwrap();
        }
        for h in &p.cert_hashes {
            writeln!(s, "# cert sha256:{h}").unwrap();
        }
        writeln!(s, "inputs {}", self.names.join(" ")).unwrap();
        for t in &self.tests {
            writeln!(s, "{t}").unwrap();
        }
        s
    }

    /// Parses a test-set file. Variables are numbered by column.
    pub fn parse(text: &str) -> Result<TestSet, CtsError> {
        let mut names: Option<Vec<String>> = None;
        let mut tests = Vec::new();
        let mut p = Provenance::default();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let err = |msg: &str| CtsError::Parse { line: ln, msg: msg.to_string() };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let mut it = meta.split_whitespace();
                match it.next() {
                    Some("strategy") => {
                        p.strategy = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| err("bad strategy"))?
                    }
                    Some("projection") => p.projection = it.map(str::to_string).collect(),
                    Some("blocks") => p.blocks = it.map(|b| b.split(',').map(str::to_string).collect()).collect(),
                    Some("seed") => {
                        p.seed = Some(it.next().and_then(|s| s.parse().ok()).ok_or_else(|| err("bad seed"))?)
                    }
                    Some("cert") => {
                        let h =
                            it.next().and_then(|h| h.strip_prefix("sha256:")).ok_or_else(|| err("bad cert hash"))?;
                        p.cert_hashes.push(h.to_string());
                    }
                    _ => {}
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("inputs") {
                if names.is_some() {
                    return Err(err("second inputs line"));
                }
                names = Some(rest.split_whitespace().map(str::to_string).collect());
                continue;
            }
            let width = names.as_ref().ok_or_else(|| err("test before inputs line"))?.len();
            let a = Assignment::parse(line).ok_or_else(|| err("expected a 0/1 row"))?;
            if a.len() != width {
                return Err(err(&format!("row has {} bits, expected {width}", a.len())));
            }
            tests.push(a);
        }
        let names = names.ok_or(CtsError::Parse { line: 0, msg: "missing inputs line".into() })?;
        Ok(TestSet { over: (0..names.len()).map(VarId::from_idx).collect(), names, tests, provenance: p })
    }
}

/// Hex SHA-256 of a certificate's text form.
pub fn cert_hash(cert: &SsaCertificate) -> String {
    Sha256::digest(cert.to_text().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// The distinct projections of the certificate members onto `x_vars`, in
/// first-occurrence order.
pub fn extract_tests(cert: &SsaCertificate, x_vars: &[VarId]) -> Result<Vec<Assignment>, CtsError> {
    let pos: Vec<usize> = x_vars
        .iter()
        .map(|&v| cert.over.iter().position(|&u| u == v).ok_or(CtsError::Scope(v)))
        .collect::<Result<_, _>>()?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for m in &cert.members {
        let t = Assignment::from_bools(&pos.iter().map(|&i| m.get(i)).collect::<Vec<_>>());
        if seen.insert(t.clone()) {
            out.push(t);
        }
    }
    Ok(out)
}

/// A projection CTS with the proof it was extracted from.
#[derive(Clone, Debug)]
pub struct ProjectionCts {
    pub tests: TestSet,
    pub cert: SsaCertificate,
    /// H as a standalone formula; the certificate refers to its clause ids.
    pub h: CnfFormula,
    pub stats: SasStats,
}

#[derive(Clone, Debug)]
pub enum CtsOutcome {
    Complete(ProjectionCts),
    /// Input values (in circuit input order) on which the output is 1.
    Counterexample(Vec<bool>),
}

/// Proves the first output of `n` constant 0 under the input constraints
/// `extra` by solving `F_N ∧ z ∧ extra` with keep set `v`. On success the
/// tests are the distinct projections of the certificate onto the inputs
/// in `v`.
pub fn cts_for_projection(
    n: &Circuit,
    v: &[VarId],
    extra: &[Vec<Lit>],
    cfg: &SasConfig,
) -> Result<CtsOutcome, CtsError> {
    let mut e = encode_property(n);
    for c in extra {
        e.formula.add_clause(c.clone()).map_err(SasError::from)?;
    }
    e.formula.set_keep(v.iter().copied()).map_err(SasError::from)?;
    let solved = solve(e.formula, cfg)?;
    if let SasResult::Sat(model) = &solved.result {
        return Ok(CtsOutcome::Counterexample(n.inputs().iter().map(|x| model[x.idx()]).collect()));
    }
    let (h, cert) = solved.h_formula().expect("unsat result");
    let x: Vec<VarId> = n.inputs().iter().copied().filter(|x| v.contains(x)).collect();
    let tests = extract_tests(&cert, &x)?;
    let names: Vec<String> = x.iter().map(|&u| n.name(u).to_string()).collect();
    Ok(CtsOutcome::Complete(ProjectionCts {
        tests: TestSet {
            over: x,
            provenance: Provenance {
                strategy: 1,
                projection: v.iter().map(|&u| n.name(u).to_string()).collect(),
                cert_hashes: vec![cert_hash(&cert)],
                ..Provenance::default()
            },
            names,
            tests,
        },
        cert,
        h,
        stats: solved.stats,
    }))
}

/// Disjoint nonempty blocks covering the inputs of a circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<Vec<VarId>>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<VarId>>, inputs: &[VarId]) -> Result<Partition, CtsError> {
        let mut seen = HashSet::new();
        for b in &blocks {
            if b.is_empty() {
                return Err(CtsError::Partition("empty block".into()));
            }
            for v in b {
                if !inputs.contains(v) {
                    return Err(CtsError::Partition(format!("{v} is not an input")));
                }
                if !seen.insert(*v) {
                    return Err(CtsError::Partition(format!("{v} appears twice")));
                }
            }
        }
        if seen.len() != inputs.len() {
            return Err(CtsError::Partition("blocks do not cover every input".into()));
        }
        Ok(Partition { blocks })
    }

    /// `k` contiguous blocks of near-equal size in input order.
    pub fn even(inputs: &[VarId], k: usize) -> Result<Partition, CtsError> {
        if k == 0 || k > inputs.len() {
            return Err(CtsError::Partition(format!("cannot split {} inputs into {k} blocks", inputs.len())));
        }
        let (q, r) = (inputs.len() / k, inputs.len() % k);
        let mut blocks = Vec::with_capacity(k);
        let mut at = 0;
        for i in 0..k {
            let len = q + usize::from(i < r);
            blocks.push(inputs[at..at + len].to_vec());
            at += len;
        }
        Ok(Partition { blocks })
    }

    pub fn singletons(inputs: &[VarId]) -> Partition {
        Partition { blocks: inputs.iter().map(|&v| vec![v]).collect() }
    }

    /// Parses `x1,x2|x3` (blocks separated by `|`, names by `,`) against
    /// the inputs of `c`.
    pub fn parse(spec: &str, c: &Circuit) -> Result<Partition, CtsError> {
        let blocks = spec
            .split('|')
            .map(|b| {
                b.split(',')
                    .map(|n| {
                        let n = n.trim();
                        c.var_by_name(n).ok_or_else(|| CtsError::Partition(format!("unknown input {n}")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Partition::new(blocks, c.inputs())
    }

    pub fn names(&self, c: &Circuit) -> Vec<Vec<String>> {
        self.blocks.iter().map(|b| b.iter().map(|&v| c.name(v).to_string()).collect()).collect()
    }
}

/// The test choices of one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockTests {
    /// Projection CTS, sorted.
    Cts { tests: Vec<Assignment>, cert_hash: String, ssa_members: usize },
    /// Single variable: the trivial set {0, 1}.
    Trivial,
    /// The solver hit a resource cap; every variable is drawn uniformly.
    Fallback,
}

#[derive(Clone, Debug)]
pub struct Piecewise {
    pub partition: Partition,
    pub blocks: Vec<BlockTests>,
    /// Full input assignments in circuit input order, duplicates kept.
    pub stream: Vec<Assignment>,
    pub duplicates: usize,
}

impl Piecewise {
    /// Size of the Cartesian product of the block test sets, saturating.
    pub fn product_size(&self) -> u128 {
        self.partition
            .blocks
            .iter()
            .zip(&self.blocks)
            .map(|(b, t)| match t {
                BlockTests::Cts { tests, .. } => tests.len() as u128,
                BlockTests::Trivial | BlockTests::Fallback => 1u128 << b.len().min(100),
            })
            .fold(1u128, |a, b| a.saturating_mul(b))
    }

    pub fn to_test_set(&self, c: &Circuit, seed: u64) -> TestSet {
        TestSet {
            over: c.inputs().to_vec(),
            names: c.inputs().iter().map(|&v| c.name(v).to_string()).collect(),
            tests: self.stream.clone(),
            provenance: Provenance {
                strategy: 2,
                blocks: self.partition.names(c),
                seed: Some(seed),
                cert_hashes: self
                    .blocks
                    .iter()
                    .filter_map(|b| match b {
                        BlockTests::Cts { cert_hash, .. } => Some(cert_hash.clone()),
                        _ => None,
                    })
                    .collect(),
                ..Provenance::default()
            },
        }
    }
}

#[derive(Clone, Debug)]
pub enum PiecewiseOutcome {
    Stream(Piecewise),
    Counterexample(Vec<bool>),
}

/// Computes a projection CTS per block (blocks run in parallel), then
/// draws `budget` tests, each combining one seeded uniform pick per block.
/// With all blocks singletons the stream equals [`random_tests`] for the
/// same seed.
pub fn piecewise_cts(
    n: &Circuit,
    part: &Partition,
    budget: usize,
    seed: u64,
    cfg: &SasConfig,
) -> Result<PiecewiseOutcome, CtsError> {
    let results: Vec<Result<Result<BlockTests, Vec<bool>>, CtsError>> = part
        .blocks
        .par_iter()
        .map(|b| {
            if b.len() == 1 {
                return Ok(Ok(BlockTests::Trivial));
            }
            match cts_for_projection(n, b, &[], cfg) {
                Ok(CtsOutcome::Complete(p)) => {
                    let mut tests = p.tests.tests;
                    tests.sort();
                    Ok(Ok(BlockTests::Cts { tests, cert_hash: cert_hash(&p.cert), ssa_members: p.cert.len() }))
                }
                Ok(CtsOutcome::Counterexample(t)) => Ok(Err(t)),
                Err(e) if e.is_limit() => Ok(Ok(BlockTests::Fallback)),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut blocks = Vec::with_capacity(results.len());
    for r in results {
        match r? {
            Ok(b) => blocks.push(b),
            Err(t) => return Ok(PiecewiseOutcome::Counterexample(t)),
        }
    }
    let pos: Vec<Vec<usize>> = part
        .blocks
        .iter()
        .map(|b| b.iter().map(|v| n.inputs().iter().position(|x| x == v).expect("partition of inputs")).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stream = Vec::with_capacity(budget);
    let mut seen = HashSet::new();
    let mut duplicates = 0;
    for _ in 0..budget {
        let mut t = Assignment::zeros(n.inputs().len());
        for (p, b) in pos.iter().zip(&blocks) {
            match b {
                BlockTests::Cts { tests, .. } => {
                    let pick = &tests[rng.gen_range(0..tests.len())];
                    for (k, &i) in p.iter().enumerate() {
                        t.set(i, pick.get(k));
                    }
                }
                BlockTests::Trivial | BlockTests::Fallback => {
                    for &i in p {
                        t.set(i, rng.gen_range(0..2) == 1);
                    }
                }
            }
        }
        if !seen.insert(t.clone()) {
            duplicates += 1;
        }
        stream.push(t);
    }
    Ok(PiecewiseOutcome::Stream(Piecewise { partition: part.clone(), blocks, stream, duplicates }))
}

/// `budget` uniform input assignments over `width` inputs.
pub fn random_tests(width: usize, budget: usize, seed: u64) -> Vec<Assignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..budget)
        .map(|_| {
            let mut t = Assignment::zeros(width);
            for i in 0..width {
                t.set(i, rng.gen_range(0..2) == 1);
            }
            t
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdicts {
    /// Output value per test.
    pub outputs: Vec<bool>,
    pub first_failing: Option<usize>,
}

impl Verdicts {
    pub fn failures(&self) -> usize {
        self.outputs.iter().filter(|&&b| b).count()
    }
}

/// Simulates every test (over the circuit inputs, in input order) and
/// reports the first output; 64 tests per simulation pass, chunks in
/// parallel.
pub fn run_tests(n: &Circuit, tests: &[Assignment]) -> Verdicts {
    let z = n.output().idx();
    let width = n.inputs().len();
    let outputs: Vec<bool> = tests
        .par_chunks(64)
        .flat_map_iter(|chunk| {
            let mut words = vec![0u64; width];
            for (j, t) in chunk.iter().enumerate() {
                assert_eq!(t.len(), width, "test width");
                for (i, w) in words.iter_mut().enumerate() {
                    if t.get(i) {
                        *w |= 1 << j;
                    }
                }
            }
            let out = n.simulate_words(&words)[z];
            (0..chunk.len()).map(move |j| (out >> j) & 1 == 1)
        })
        .collect();
    let first_failing = outputs.iter().position(|&b| b);
    Verdicts { outputs, first_failing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{example_circuit, mk_miter, random_circuit, GateOp};
    use crate::formula::ClauseId;

    fn strs(ts: &[Assignment]) -> Vec<String> {
        ts.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn projection_on_inputs() {
        let c = example_circuit();
        let x = c.inputs().to_vec();
        let CtsOutcome::Complete(p) = cts_for_projection(&c, &x, &[], &SasConfig::default()).unwrap() else {
            panic!("expected a CTS")
        };
        let mut got = strs(&p.tests.tests);
        got.sort();
        assert_eq!(got, ["000", "001", "011", "101"]);
        assert_eq!(p.cert.center.to_string(), "000");
        assert_eq!(run_tests(&c, &p.tests.tests).first_failing, None);
    }

    #[test]
    fn full_variable_projections() {
        let c = example_circuit();
        let all: Vec<VarId> = (0..c.num_vars() as usize).map(VarId::from_idx).collect();
        let CtsOutcome::Complete(p) = cts_for_projection(&c, &all, &[], &SasConfig::default()).unwrap() else {
            panic!()
        };
        assert!(p.cert.len() <= 21);
        let mut got = strs(&p.tests.tests);
        got.sort();
        assert_eq!(got, ["000", "010", "011", "100", "101"]);
    }

    #[test]
    fn extract_errors_and_single_member() {
        let cert = SsaCertificate {
            over: vec![VarId::new(1), VarId::new(2)],
            center: Assignment::parse("01").unwrap(),
            members: vec![Assignment::parse("01").unwrap()],
            phi: vec![ClauseId(0)],
        };
        assert_eq!(strs(&extract_tests(&cert, &[VarId::new(2)]).unwrap()), ["1"]);
        assert_eq!(extract_tests(&cert, &[VarId::new(3)]), Err(CtsError::Scope(VarId::new(3))));
    }

    #[test]
    fn buggy_miter_gives_counterexample() {
        let text = crate::circuit::EXAMPLE_CIRCUIT.replace("y2 = AND", "y2 = OR");
        let bad = crate::circuit::parse_circuit(&text).unwrap();
        assert_eq!(bad.gates()[1].op, GateOp::Or);
        let x = bad.inputs().to_vec();
        let CtsOutcome::Counterexample(t) = cts_for_projection(&bad, &x, &[], &SasConfig::default()).unwrap() else {
            panic!("expected a counterexample")
        };
        assert!(bad.eval(&t));
    }

    #[test]
    fn empty_projection() {
        let c = example_circuit();
        let CtsOutcome::Complete(p) = cts_for_projection(&c, &[], &[], &SasConfig::default()).unwrap() else {
            panic!()
        };
        assert_eq!(p.h.len(), 1);
        assert!(p.h.clause(ClauseId(0)).is_empty());
        // one empty projection
        assert_eq!(p.tests.len(), 1);
        assert!(p.tests.over.is_empty());
    }

    #[test]
    fn partitions() {
        let c = random_circuit(5, 6, 3, 1);
        let x = c.inputs().to_vec();
        let p = Partition::even(&x, 2).unwrap();
        assert_eq!(p.blocks.iter().map(Vec::len).collect::<Vec<_>>(), [3, 2]);
        assert_eq!(
            Partition::parse("x1,x2|x3,x4,x5", &c).unwrap(),
            Partition::new(vec![x[..2].to_vec(), x[2..].to_vec()], &x).unwrap()
        );
        assert!(Partition::parse("x1,x2|x2,x3,x4,x5", &c).is_err());
        assert!(Partition::parse("x1,x2|x3", &c).is_err());
        assert!(Partition::even(&x, 0).is_err());
    }

    #[test]
    fn piecewise_in_product() {
        let c = example_circuit();
        let x = c.inputs().to_vec();
        let part = Partition::new(vec![vec![x[0], x[1]], vec![x[2]]], &x).unwrap();
        let PiecewiseOutcome::Stream(s) = piecewise_cts(&c, &part, 50, 3, &SasConfig::default()).unwrap() else {
            panic!()
        };
        let BlockTests::Cts { tests, .. } = &s.blocks[0] else { panic!() };
        for t in &s.stream {
            let head = Assignment::from_bools(&[t.get(0), t.get(1)]);
            assert!(tests.contains(&head));
        }
        assert_eq!(s.stream.len(), 50);
        assert!(s.duplicates > 0);
    }

    #[test]
    fn singletons_equal_random() {
        let c = random_circuit(6, 10, 3, 4);
        let m = mk_miter(&c, &c).unwrap();
        let part = Partition::singletons(m.inputs());
        let PiecewiseOutcome::Stream(s) = piecewise_cts(&m, &part, 200, 11, &SasConfig::default()).unwrap() else {
            panic!()
        };
        assert_eq!(s.stream, random_tests(6, 200, 11));
    }

    #[test]
    fn test_set_file_round_trip() {
        let c = example_circuit();
        let ts = TestSet {
            over: c.inputs().to_vec(),
            names: vec!["x1".into(), "x2".into(), "x3".into()],
            tests: ["000", "101"].iter().map(|s| Assignment::parse(s).unwrap()).collect(),
            provenance: Provenance {
                strategy: 2,
                projection: vec![],
                blocks: vec![vec!["x1".into(), "x2".into()], vec!["x3".into()]],
                seed: Some(5),
                cert_hashes: vec!["ab".into()],
            },
        };
        let back = TestSet::parse(&ts.to_text()).unwrap();
        assert_eq!(back, ts);
        assert!(TestSet::parse("inputs a b\n010\n").is_err());
        assert!(TestSet::parse("01\n").is_err());
    }

    #[test]
    fn bind_reorders() {
        let c = example_circuit();
        let ts = TestSet::parse("inputs x3 x1 x2\n100\n").unwrap();
        let b = ts.bind(&c).unwrap();
        assert_eq!(strs(&b.tests), ["001"]);
        assert!(TestSet::parse("inputs x3 x1\n10\n").unwrap().bind(&c).is_err());
    }

    #[test]
    fn run_tests_matches_eval() {
        let c = random_circuit(7, 15, 3, 2);
        let ts = random_tests(7, 300, 1);
        let v = run_tests(&c, &ts);
        for (t, &o) in ts.iter().zip(&v.outputs) {
            assert_eq!(c.eval(&t.to_bools()), o);
        }
        assert_eq!(v.first_failing, v.outputs.iter().position(|&b| b));
    }
}
