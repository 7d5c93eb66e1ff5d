//! Stable sets of assignments.
//!
//! A set `P` of assignments with an assignment-to-clause map `Φ` is stable
//! (with center `c ∈ P`) when every member falsifies its mapped clause and,
//! for every member `p`, each neighbour of `p` that satisfies `Φ(p)` and lies
//! farther from `c` than `p` is again in `P`. Such a set exists iff the
//! formula is unsatisfiable, which makes a certificate a checkable refutation
//! that depends on the clause set rather than on its truth table.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{Assignment, Clause, ClauseId, CnfFormula, Domain, FormulaError, VarId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SsaError {
    #[error("assignment {0} does not falsify the clause")]
    NotFalsified(Assignment),
    #[error("member cap of {0} assignments exceeded")]
    MemberCap(usize),
    #[error("time cap exceeded")]
    TimeCap,
    #[error("assignment {0} satisfies the formula before the target was reached")]
    SatisfiedEarly(Assignment),
    #[error("target assignment does not satisfy the formula")]
    TargetNotSatisfying,
    #[error("assignment width {got} does not match domain width {want}")]
    Width { got: usize, want: usize },
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("certificate line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl SsaError {
    /// True for the resource-limit outcomes.
    pub fn is_limit(&self) -> bool {
        matches!(self, SsaError::MemberCap(_) | SsaError::TimeCap)
    }
}

/// A clause restricted to the positions of a [`Domain`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalClause {
    pub id: ClauseId,
    /// `(position, positive)` pairs, ascending by position.
    pub lits: Vec<(u32, bool)>,
}

impl LocalClause {
    #[inline]
    pub fn falsified_by(&self, p: &Assignment) -> bool {
        self.lits.iter().all(|&(i, pos)| p.get(i as usize) != pos)
    }
}

/// A clause set projected onto a variable domain, the input of
/// [`build_ssa`] and [`verify_ssa`].
#[derive(Clone, Debug)]
pub struct SsaFormula {
    domain: Domain,
    clauses: Vec<LocalClause>,
    by_id: HashMap<ClauseId, usize>,
}

impl SsaFormula {
    /// Projects `clauses` onto `domain`: literals of variables outside the
    /// domain are dropped. Clauses are kept in ascending id order.
    pub fn project<'a>(domain: Domain, clauses: impl IntoIterator<Item = &'a Clause>) -> SsaFormula {
        let mut local: Vec<LocalClause> = clauses
            .into_iter()
            .map(|c| LocalClause {
                id: c.id,
                lits: c
                    .lits()
                    .iter()
                    .filter_map(|l| domain.position(l.var()).map(|p| (p as u32, l.is_positive())))
                    .collect(),
            })
            .collect();
        local.sort_by_key(|c| c.id);
        local.dedup_by_key(|c| c.id);
        let by_id = local.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
        SsaFormula { domain, clauses: local, by_id }
    }

    /// All clauses of `f`, over its whole universe.
    pub fn from_formula(f: &CnfFormula) -> SsaFormula {
        SsaFormula::project(Domain::universe(f.num_vars()), f.clauses())
    }

    /// All clauses of `f` over an explicit domain; fails if some clause
    /// mentions a variable outside it.
    pub fn over(f: &CnfFormula, domain: Domain) -> Result<SsaFormula, FormulaError> {
        for c in f.clauses() {
            if let Some(v) = c.vars().find(|&v| !domain.contains(v)) {
                return Err(FormulaError::Domain(v));
            }
        }
        Ok(SsaFormula::project(domain, f.clauses()))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn width(&self) -> usize {
        self.domain.len()
    }

    pub fn clauses(&self) -> &[LocalClause] {
        &self.clauses
    }

    pub fn get(&self, id: ClauseId) -> Option<&LocalClause> {
        self.by_id.get(&id).map(|&i| &self.clauses[i])
    }

    pub fn satisfied_by(&self, p: &Assignment) -> bool {
        !self.clauses.iter().any(|c| c.falsified_by(p))
    }

    fn pick_falsified(&self, p: &Assignment, pick: ClausePick) -> Option<&LocalClause> {
        match pick {
            ClausePick::LowestId => self.clauses.iter().find(|c| c.falsified_by(p)),
            ClausePick::Shortest => self.clauses.iter().filter(|c| c.falsified_by(p)).min_by_key(|c| c.lits.len()),
            ClausePick::Strongest => {
                let falsified: Vec<&LocalClause> = self.clauses.iter().filter(|c| c.falsified_by(p)).collect();
                // both falsified by p, so inclusion of positions is inclusion of literals
                let contains = |big: &LocalClause, small: &LocalClause| {
                    small.lits.len() < big.lits.len() && small.lits.iter().all(|l| big.lits.contains(l))
                };
                falsified.iter().copied().find(|c| !falsified.iter().any(|d| contains(c, d)))
            }
        }
    }
}

/// Neighbours of `p` at Hamming distance 1 that satisfy `c`, in literal order.
pub fn local_nbhd(p: &Assignment, c: &LocalClause) -> Result<Vec<Assignment>, SsaError> {
    if !c.falsified_by(p) {
        return Err(SsaError::NotFalsified(p.clone()));
    }
    Ok(c.lits.iter().map(|&(i, _)| p.flipped(i as usize)).collect())
}

/// The part of [`local_nbhd`] strictly farther from `center` than `p`.
///
/// Flipping position `i` moves away from the center exactly when `p` still
/// agrees with the center there.
pub fn local_nbhd_centered(center: &Assignment, p: &Assignment, c: &LocalClause) -> Result<Vec<Assignment>, SsaError> {
    if !c.falsified_by(p) {
        return Err(SsaError::NotFalsified(p.clone()));
    }
    Ok(c.lits
        .iter()
        .filter(|&&(i, _)| p.get(i as usize) == center.get(i as usize))
        .map(|&(i, _)| p.flipped(i as usize))
        .collect())
}

fn localize(c: &Clause, domain: &Domain) -> Result<LocalClause, SsaError> {
    let mut lits = Vec::with_capacity(c.len());
    for l in c.lits() {
        let p = domain.position(l.var()).ok_or(FormulaError::Domain(l.var()))?;
        lits.push((p as u32, l.is_positive()));
    }
    lits.sort_unstable();
    Ok(LocalClause { id: c.id, lits })
}

/// `Nbhd(p, C)` for an assignment over `domain`.
pub fn nbhd(p: &Assignment, c: &Clause, domain: &Domain) -> Result<Vec<Assignment>, SsaError> {
    local_nbhd(p, &localize(c, domain)?)
}

/// `Nbhd(q, p, C)`: the neighbours of `p` satisfying `c` that are farther
/// from `q` than `p` is.
pub fn nbhd_centered(q: &Assignment, p: &Assignment, c: &Clause, domain: &Domain) -> Result<Vec<Assignment>, SsaError> {
    if q.len() != p.len() {
        return Err(SsaError::Width { got: q.len(), want: p.len() });
    }
    local_nbhd_centered(q, p, &localize(c, domain)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ClausePick {
    /// Lowest clause id among the falsified clauses.
    LowestId,
    /// Fewest literals, ties broken by lowest id.
    Shortest,
    /// Lowest id among the falsified clauses that do not strictly contain
    /// another falsified clause.
    #[default]
    Strongest,
}

/// How the center of a new stable set is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CenterPolicy {
    /// The all-zeros assignment.
    Zeros,
    /// All zeros, except that the variables of the longest clause (lowest id
    /// on ties) take the values falsifying it.
    FalsifyLongest,
    /// Whichever of [`CenterPolicy::Zeros`] and
    /// [`CenterPolicy::FalsifyLongest`] falsifies fewer clauses, zeros on
    /// ties.
    #[default]
    FewestFalsified,
    /// Uniform random bits from the given seed.
    Seeded(u64),
}

/// Picks the initial assignment for [`build_ssa`]. `salt` varies the seeded
/// policy between calls.
pub fn pick_center(h: &SsaFormula, policy: CenterPolicy, salt: u64) -> Assignment {
    let mut p = Assignment::zeros(h.width());
    match policy {
        CenterPolicy::Zeros => {}
        CenterPolicy::FalsifyLongest => {
            let mut best: Option<&LocalClause> = None;
            for c in h.clauses() {
                if best.is_none_or(|b| c.lits.len() > b.lits.len()) {
                    best = Some(c);
                }
            }
            if let Some(c) = best {
                for &(i, pos) in &c.lits {
                    p.set(i as usize, !pos);
                }
            }
        }
        CenterPolicy::FewestFalsified => {
            let q = pick_center(h, CenterPolicy::FalsifyLongest, salt);
            let count = |x: &Assignment| h.clauses().iter().filter(|c| c.falsified_by(x)).count();
            if count(&q) < count(&p) {
                p = q;
            }
        }
        CenterPolicy::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            for i in 0..p.len() {
                p.set(i, rng.gen());
            }
        }
    }
    p
}

#[derive(Clone, Debug)]
pub struct SsaConfig {
    pub member_cap: usize,
    pub deadline: Option<Instant>,
    /// Expand only the centered neighbourhood (default) or the full one.
    pub centered: bool,
    pub pick: ClausePick,
}

impl Default for SsaConfig {
    fn default() -> Self {
        SsaConfig { member_cap: 10_000_000, deadline: None, centered: true, pick: ClausePick::Strongest }
    }
}

/// A stable set of assignments together with its center and AC-mapping.
///
/// `members[i]` is mapped to clause `phi[i]`; members are listed in the
/// order they were examined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsaCertificate {
    pub over: Vec<VarId>,
    pub center: Assignment,
    pub members: Vec<Assignment>,
    pub phi: Vec<ClauseId>,
}

impl SsaCertificate {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Distinct clauses of `Φ(P)`, ascending.
    pub fn range(&self) -> Vec<ClauseId> {
        let mut r = self.phi.clone();
        r.sort_unstable();
        r.dedup();
        r
    }

    pub fn mapped(&self, p: &Assignment) -> Option<ClauseId> {
        self.members.iter().position(|m| m == p).map(|i| self.phi[i])
    }

    /// Rewrites clause ids through `f`.
    pub fn remap(&mut self, mut f: impl FnMut(ClauseId) -> ClauseId) {
        for c in &mut self.phi {
            *c = f(*c);
        }
    }

    /// Text form: a version line, the variable list, the center, then one
    /// `<bits> <clause number>` line per member. Clause numbers are 1-based;
    /// an assignment over no variables is written `-`.
    pub fn to_text(&self) -> String {
        let bits = |a: &Assignment| if a.is_empty() { "-".to_string() } else { a.to_string() };
        let mut out = String::from("ssa-cert 1\nvars");
        for v in &self.over {
            out.push_str(&format!(" {}", v.get()));
        }
        out.push_str(&format!("\ncenter {}\n", bits(&self.center)));
        for (m, c) in self.members.iter().zip(&self.phi) {
            out.push_str(&format!("{} {}\n", bits(m), c.number()));
        }
        out
    }

    pub fn parse(text: &str) -> Result<SsaCertificate, SsaError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let perr = |line: usize, msg: &str| SsaError::Parse { line, msg: msg.to_string() };
        match lines.next() {
            Some((_, "ssa-cert 1")) => {}
            Some((n, _)) => return Err(perr(n, "expected `ssa-cert 1`")),
            None => return Err(perr(0, "empty certificate")),
        }
        let (n, vars_line) = lines.next().ok_or_else(|| perr(0, "missing `vars` line"))?;
        let mut toks = vars_line.split_whitespace();
        if toks.next() != Some("vars") {
            return Err(perr(n, "expected `vars`"));
        }
        let mut over = Vec::new();
        for t in toks {
            match t.parse::<u32>() {
                Ok(v) if v >= 1 => over.push(VarId::new(v)),
                _ => return Err(perr(n, "bad variable")),
            }
        }
        if over.windows(2).any(|w| w[0] >= w[1]) {
            return Err(perr(n, "variables must be strictly ascending"));
        }
        let (n, center_line) = lines.next().ok_or_else(|| perr(0, "missing `center` line"))?;
        let center = center_line
            .strip_prefix("center")
            .map(str::trim)
            .and_then(parse_bits)
            .filter(|a| a.len() == over.len())
            .ok_or_else(|| perr(n, "bad center"))?;
        let mut members = Vec::new();
        let mut phi = Vec::new();
        for (n, line) in lines {
            let mut toks = line.split_whitespace();
            let bits = toks
                .next()
                .and_then(parse_bits)
                .filter(|a| a.len() == over.len())
                .ok_or_else(|| perr(n, "bad member assignment"))?;
            let clause = toks
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .filter(|&c| c >= 1)
                .ok_or_else(|| perr(n, "bad clause number"))?;
            if toks.next().is_some() {
                return Err(perr(n, "trailing tokens"));
            }
            members.push(bits);
            phi.push(ClauseId::from_number(clause));
        }
        Ok(SsaCertificate { over, center, members, phi })
    }
}

fn parse_bits(s: &str) -> Option<Assignment> {
    if s == "-" {
        Some(Assignment::zeros(0))
    } else {
        Assignment::parse(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SsaOutcome {
    Sat(Assignment),
    Cert(SsaCertificate),
}

impl SsaOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SsaOutcome::Sat(_))
    }

    pub fn cert(&self) -> Option<&SsaCertificate> {
        match self {
            SsaOutcome::Cert(c) => Some(c),
            SsaOutcome::Sat(_) => None,
        }
    }
}

/// Why a certificate fails to be a stable set of its formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Empty,
    VarMismatch,
    Width { member: usize },
    DuplicateMember(Assignment),
    CenterNotMember(Assignment),
    UnknownClause { member: Assignment, clause: ClauseId },
    NotFalsified { member: Assignment, clause: ClauseId },
    MissingNeighbor { member: Assignment, clause: ClauseId, neighbor: Assignment },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "certificate has no members"),
            Violation::VarMismatch => write!(f, "certificate variables differ from the formula's"),
            Violation::Width { member } => write!(f, "member #{member} has the wrong width"),
            Violation::DuplicateMember(m) => write!(f, "member {m} is listed twice"),
            Violation::CenterNotMember(c) => write!(f, "center {c} is not a member"),
            Violation::UnknownClause { member, clause } => {
                write!(f, "member {member} is mapped to {clause}, which is not in the formula")
            }
            Violation::NotFalsified { member, clause } => {
                write!(f, "member {member} does not falsify its mapped clause {clause}")
            }
            Violation::MissingNeighbor { member, clause, neighbor } => {
                write!(f, "neighbor {neighbor} of member {member} (via {clause}) is missing")
            }
        }
    }
}

/// Checks that `cert` is a stable set of `h` with the recorded center.
///
/// Reports the first violation in member order.
pub fn verify_ssa(h: &SsaFormula, cert: &SsaCertificate) -> Result<(), Violation> {
    if cert.over.as_slice() != h.domain().vars() {
        return Err(Violation::VarMismatch);
    }
    if cert.members.is_empty() || cert.members.len() != cert.phi.len() {
        return Err(Violation::Empty);
    }
    let width = h.width();
    if cert.center.len() != width {
        return Err(Violation::Width { member: 0 });
    }
    let mut set = HashSet::with_capacity(cert.members.len());
    for (i, m) in cert.members.iter().enumerate() {
        if m.len() != width {
            return Err(Violation::Width { member: i });
        }
        if !set.insert(m) {
            return Err(Violation::DuplicateMember(m.clone()));
        }
    }
    if !set.contains(&cert.center) {
        return Err(Violation::CenterNotMember(cert.center.clone()));
    }
    for (m, &cid) in cert.members.iter().zip(&cert.phi) {
        let c = h.get(cid).ok_or_else(|| Violation::UnknownClause { member: m.clone(), clause: cid })?;
        if !c.falsified_by(m) {
            return Err(Violation::NotFalsified { member: m.clone(), clause: cid });
        }
        for n in local_nbhd_centered(&cert.center, m, c).expect("falsification checked above") {
            if !set.contains(&n) {
                return Err(Violation::MissingNeighbor { member: m.clone(), clause: cid, neighbor: n });
            }
        }
    }
    Ok(())
}

/// A walk from an initial assignment to a target one flip at a time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub steps: Vec<Assignment>,
}

impl Path {
    /// Number of flips.
    pub fn len(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Walks from `p_init` to the satisfying assignment `s`, using the lowest-id
/// falsified clause as the AC-mapping and flipping its lowest-position
/// variable on which the current assignment and `s` differ.
pub fn build_path(h: &SsaFormula, p_init: &Assignment, s: &Assignment) -> Result<Path, SsaError> {
    build_path_with(h, p_init, s, |p| h.clauses().iter().find(|c| c.falsified_by(p)).map(|c| c.id))
}

/// [`build_path`] with a caller-supplied AC-mapping.
pub fn build_path_with(
    h: &SsaFormula,
    p_init: &Assignment,
    s: &Assignment,
    phi: impl Fn(&Assignment) -> Option<ClauseId>,
) -> Result<Path, SsaError> {
    for a in [p_init, s] {
        if a.len() != h.width() {
            return Err(SsaError::Width { got: a.len(), want: h.width() });
        }
    }
    if !h.satisfied_by(s) {
        return Err(SsaError::TargetNotSatisfying);
    }
    let mut steps = vec![p_init.clone()];
    let mut cur = p_init.clone();
    while cur != *s {
        let c = phi(&cur)
            .and_then(|id| h.get(id))
            .filter(|c| c.falsified_by(&cur))
            .ok_or_else(|| SsaError::SatisfiedEarly(cur.clone()))?;
        let &(i, _) = c
            .lits
            .iter()
            .find(|&&(i, _)| cur.get(i as usize) != s.get(i as usize))
            .expect("s satisfies every clause, so some variable of c differs");
        cur.flip(i as usize);
        steps.push(cur.clone());
    }
    Ok(Path { steps })
}

struct Limits<'a> {
    cfg: &'a SsaConfig,
    ticks: u32,
}

impl Limits<'_> {
    fn check(&mut self, members: usize) -> Result<(), SsaError> {
        if members > self.cfg.member_cap {
            return Err(SsaError::MemberCap(self.cfg.member_cap));
        }
        self.ticks += 1;
        if self.ticks.is_multiple_of(256) {
            if let Some(d) = self.cfg.deadline {
                if Instant::now() > d {
                    return Err(SsaError::TimeCap);
                }
            }
        }
        Ok(())
    }
}

fn expansion(cfg: &SsaConfig, center: &Assignment, p: &Assignment, c: &LocalClause) -> Vec<Assignment> {
    if cfg.centered { local_nbhd_centered(center, p, c) } else { local_nbhd(p, c) }.expect("p falsifies c")
}

/// Builds a stable set of `h` around `center`, or returns the first
/// satisfying assignment met on the way.
///
/// Assignments are examined first-in first-out; each examined assignment is
/// mapped to a falsified clause chosen by `cfg.pick`, and the neighbours of
/// that clause not seen before are queued.
pub fn build_ssa(h: &SsaFormula, center: &Assignment, cfg: &SsaConfig) -> Result<SsaOutcome, SsaError> {
    if center.len() != h.width() {
        return Err(SsaError::Width { got: center.len(), want: h.width() });
    }
    let mut limits = Limits { cfg, ticks: 0 };
    let mut seen: HashSet<Assignment> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut members = Vec::new();
    let mut phi = Vec::new();
    seen.insert(center.clone());
    queue.push_back(center.clone());
    while let Some(p) = queue.pop_front() {
        let Some(c) = h.pick_falsified(&p, cfg.pick) else {
            return Ok(SsaOutcome::Sat(p));
        };
        for n in expansion(cfg, center, &p, c) {
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
        phi.push(c.id);
        members.push(p);
        limits.check(members.len())?;
    }
    Ok(SsaOutcome::Cert(SsaCertificate { over: h.domain().vars().to_vec(), center: center.clone(), members, phi }))
}

/// Rebuilds a stable set for `h` starting from a previous one.
///
/// Members of `prev` whose mapped clause is still present in `h`, is not in
/// `invalidated`, and is still falsified go to a cheap queue and keep their
/// clause without a search; everything else goes to a second queue that is
/// only served when the cheap one is empty.
pub fn build_ssa_reuse(
    h: &SsaFormula,
    prev: &SsaCertificate,
    invalidated: &HashSet<ClauseId>,
    cfg: &SsaConfig,
) -> Result<SsaOutcome, SsaError> {
    if prev.over.as_slice() != h.domain().vars() {
        return Err(SsaError::Width { got: prev.over.len(), want: h.width() });
    }
    let reusable: HashMap<&Assignment, &LocalClause> = prev
        .members
        .iter()
        .zip(&prev.phi)
        .filter(|(_, id)| !invalidated.contains(id))
        .filter_map(|(m, id)| h.get(*id).filter(|c| c.falsified_by(m)).map(|c| (m, c)))
        .collect();
    let center = &prev.center;
    let mut limits = Limits { cfg, ticks: 0 };
    let mut seen: HashSet<Assignment> = HashSet::new();
    let mut cheap = VecDeque::new();
    let mut fresh = VecDeque::new();
    let mut members = Vec::new();
    let mut phi = Vec::new();
    let enqueue = |p: Assignment, cheap: &mut VecDeque<Assignment>, fresh: &mut VecDeque<Assignment>| {
        if reusable.contains_key(&p) {
            cheap.push_back(p);
        } else {
            fresh.push_back(p);
        }
    };
    seen.insert(center.clone());
    enqueue(center.clone(), &mut cheap, &mut fresh);
    loop {
        let (p, c) = if let Some(p) = cheap.pop_front() {
            let c = reusable[&p];
            (p, c)
        } else if let Some(p) = fresh.pop_front() {
            match h.pick_falsified(&p, cfg.pick) {
                Some(c) => (p, c),
                None => return Ok(SsaOutcome::Sat(p)),
            }
        } else {
            break;
        };
        for n in expansion(cfg, center, &p, c) {
            if seen.insert(n.clone()) {
                enqueue(n, &mut cheap, &mut fresh);
            }
        }
        phi.push(c.id);
        members.push(p);
        limits.check(members.len())?;
    }
    Ok(SsaOutcome::Cert(SsaCertificate { over: h.domain().vars().to_vec(), center: center.clone(), members, phi }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Assignment {
        Assignment::parse(s).unwrap()
    }

    fn strs(v: &[Assignment]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn or3_against_units() -> CnfFormula {
        CnfFormula::from_dimacs_clauses(3, &[&[1, 2, 3], &[-1], &[-2], &[-3]]).unwrap()
    }

    #[test]
    fn nbhd_examples() {
        let f = CnfFormula::from_dimacs_clauses(4, &[&[1, -3]]).unwrap();
        let d = Domain::universe(4);
        let c = &f.clauses()[0];
        assert_eq!(strs(&nbhd(&a("0110"), c, &d).unwrap()), ["1110", "0100"]);
        assert_eq!(strs(&nbhd_centered(&a("0000"), &a("0110"), c, &d).unwrap()), ["1110"]);
        assert!(matches!(nbhd(&a("1110"), c, &d), Err(SsaError::NotFalsified(_))));

        let g = or3_against_units();
        let d3 = Domain::universe(3);
        let c1 = &g.clauses()[0];
        assert_eq!(strs(&nbhd(&a("000"), c1, &d3).unwrap()), ["100", "010", "001"]);
        assert_eq!(strs(&nbhd_centered(&a("000"), &a("000"), c1, &d3).unwrap()), ["100", "010", "001"]);
        assert!(nbhd_centered(&a("000"), &a("100"), &g.clauses()[1], &d3).unwrap().is_empty());

        let u = CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        assert_eq!(strs(&nbhd(&a("0"), &u.clauses()[0], &Domain::universe(1)).unwrap()), ["1"]);
    }

    #[test]
    fn build_ssa_or3_against_units() {
        let h = SsaFormula::from_formula(&or3_against_units());
        let out = build_ssa(&h, &a("000"), &SsaConfig::default()).unwrap();
        let cert = out.cert().unwrap();
        assert_eq!(strs(&cert.members), ["000", "100", "010", "001"]);
        assert_eq!(cert.phi, vec![ClauseId(0), ClauseId(1), ClauseId(2), ClauseId(3)]);
        assert_eq!(verify_ssa(&h, cert), Ok(()));
    }

    #[test]
    fn build_ssa_small_cases() {
        let h = SsaFormula::from_formula(&CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap());
        let cert = build_ssa(&h, &a("0"), &SsaConfig::default()).unwrap().cert().cloned().unwrap();
        assert_eq!(strs(&cert.members), ["0", "1"]);
        assert_eq!(cert.phi, vec![ClauseId(0), ClauseId(1)]);

        let h = SsaFormula::from_formula(&CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap());
        assert_eq!(build_ssa(&h, &a("00"), &SsaConfig::default()).unwrap(), SsaOutcome::Sat(a("10")));
    }

    #[test]
    fn member_cap_is_reported() {
        let h = SsaFormula::from_formula(&or3_against_units());
        let cfg = SsaConfig { member_cap: 2, ..SsaConfig::default() };
        assert_eq!(build_ssa(&h, &a("000"), &cfg), Err(SsaError::MemberCap(2)));
    }

    #[test]
    fn verify_rejects_missing_neighbor() {
        let h = SsaFormula::from_formula(&or3_against_units());
        let mut cert = build_ssa(&h, &a("000"), &SsaConfig::default()).unwrap().cert().cloned().unwrap();
        cert.members.pop();
        cert.phi.pop();
        assert_eq!(
            verify_ssa(&h, &cert),
            Err(Violation::MissingNeighbor { member: a("000"), clause: ClauseId(0), neighbor: a("001") })
        );
    }

    #[test]
    fn empty_clause_certificate() {
        let mut f = CnfFormula::new(2);
        f.add_dimacs(&[1, 2]).unwrap();
        let e = f.add_clause(vec![]).unwrap();
        let h = SsaFormula::from_formula(&f);
        let cert =
            SsaCertificate { over: h.domain().vars().to_vec(), center: a("01"), members: vec![a("01")], phi: vec![e] };
        assert_eq!(verify_ssa(&h, &cert), Ok(()));
    }

    #[test]
    fn uncentered_mode_is_closed_under_full_neighbourhoods() {
        let h = SsaFormula::from_formula(&or3_against_units());
        let cfg = SsaConfig { centered: false, ..SsaConfig::default() };
        let cert = build_ssa(&h, &a("000"), &cfg).unwrap().cert().cloned().unwrap();
        // 100 -> ¬v1 has neighbour 000, already present; same set as centered here.
        assert_eq!(cert.len(), 4);
        for (m, id) in cert.members.iter().zip(&cert.phi) {
            for n in local_nbhd(m, h.get(*id).unwrap()).unwrap() {
                assert!(cert.members.contains(&n));
            }
        }
    }

    #[test]
    fn build_path_examples() {
        let h = SsaFormula::from_formula(&CnfFormula::from_dimacs_clauses(3, &[&[1, 2, 3]]).unwrap());
        let p = build_path(&h, &a("000"), &a("100")).unwrap();
        assert_eq!(strs(&p.steps), ["000", "100"]);
        assert_eq!(build_path(&h, &a("100"), &a("100")).unwrap().len(), 0);

        let h2 = SsaFormula::from_formula(&CnfFormula::from_dimacs_clauses(2, &[&[1], &[2]]).unwrap());
        let p = build_path(&h2, &a("00"), &a("11")).unwrap();
        assert_eq!(strs(&p.steps), ["00", "10", "11"]);

        assert_eq!(build_path(&h2, &a("00"), &a("01")), Err(SsaError::TargetNotSatisfying));
        // 110 satisfies h but the target is 111
        assert_eq!(build_path(&h, &a("100"), &a("111")), Err(SsaError::SatisfiedEarly(a("100"))));
    }

    #[test]
    fn reuse_with_nothing_invalidated_returns_same_set() {
        let h = SsaFormula::from_formula(&or3_against_units());
        let prev = build_ssa(&h, &a("000"), &SsaConfig::default()).unwrap().cert().cloned().unwrap();
        let again = build_ssa_reuse(&h, &prev, &HashSet::new(), &SsaConfig::default()).unwrap();
        assert_eq!(again.cert(), Some(&prev));
    }

    #[test]
    fn reuse_requeues_the_invalidated_member() {
        // Previous branch: H0 = {(v1 ∨ v2 ∨ v3), ¬v1, ¬v2, B = (¬v3 ∨ w)} projected to V.
        // In the new branch B is gone and ¬v3 takes its place.
        let mut f = CnfFormula::new(4);
        f.add_dimacs(&[1, 2, 3]).unwrap();
        f.add_dimacs(&[-1]).unwrap();
        f.add_dimacs(&[-2]).unwrap();
        let b = f.add_dimacs(&[-3, 4]).unwrap();
        let c = f.add_dimacs(&[-3]).unwrap();
        let dom = Domain::universe(3);
        let old = SsaFormula::project(dom.clone(), f.clauses().iter().take(4));
        let prev = build_ssa(&old, &a("000"), &SsaConfig::default()).unwrap().cert().cloned().unwrap();
        assert_eq!(prev.mapped(&a("001")), Some(b));

        let new = SsaFormula::project(dom, [0, 1, 2, 4].map(|i| &f.clauses()[i]));
        let invalid = HashSet::from([b]);
        let out = build_ssa_reuse(&new, &prev, &invalid, &SsaConfig::default()).unwrap();
        let cert = out.cert().unwrap();
        assert_eq!(verify_ssa(&new, cert), Ok(()));
        assert_eq!(cert.mapped(&a("001")), Some(c));
        // 001 is served last, from the second queue
        assert_eq!(cert.members.last(), Some(&a("001")));
    }

    #[test]
    fn certificate_text_round_trip() {
        let h = SsaFormula::from_formula(&or3_against_units());
        let cert = build_ssa(&h, &a("000"), &SsaConfig::default()).unwrap().cert().cloned().unwrap();
        let text = cert.to_text();
        assert!(text.starts_with("ssa-cert 1\nvars 1 2 3\ncenter 000\n000 1\n"));
        assert_eq!(SsaCertificate::parse(&text).unwrap(), cert);
        assert!(matches!(
            SsaCertificate::parse("ssa-cert 1\nvars 1 2\ncenter 00\n001 1\n"),
            Err(SsaError::Parse { line: 4, .. })
        ));

        // no keep variables: the only assignment is the empty one
        let empty = SsaCertificate {
            over: vec![],
            center: Assignment::zeros(0),
            members: vec![Assignment::zeros(0)],
            phi: vec![ClauseId(0)],
        };
        assert_eq!(empty.to_text(), "ssa-cert 1\nvars\ncenter -\n- 1\n");
        assert_eq!(SsaCertificate::parse(&empty.to_text()).unwrap(), empty);
    }

    #[test]
    fn falsify_longest_center() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1], &[2], &[-1, -2]]).unwrap();
        let h = SsaFormula::from_formula(&f);
        assert_eq!(pick_center(&h, CenterPolicy::FalsifyLongest, 0), a("11"));
        assert_eq!(pick_center(&h, CenterPolicy::Zeros, 0), a("00"));
        let s1 = pick_center(&h, CenterPolicy::Seeded(7), 1);
        assert_eq!(s1, pick_center(&h, CenterPolicy::Seeded(7), 1));
    }
}
