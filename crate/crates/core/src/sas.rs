//! SemStr: search over the exclude set W combined with SSA construction over
//! the keep set V.
//!
//! The engine assigns only W variables. Unit propagation runs on clauses whose
//! variables all lie in W. After propagation it collects the current
//! V-clauses (clauses touching V whose W-literals are all false) and tries to
//! build a stable set for their V-parts. A stable set closes the branch
//! without a conflict. On the way back up, clauses are rewritten by resolution
//! so that every clause returned from a level mentions at most the decision
//! variable of that level, and the two branch results are merged by resolving
//! on the decision variable. The top call thus returns a clause set H over V,
//! implied by the input, together with a stable set proving H unsatisfiable.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{Assignment, ClauseId, CnfFormula, Derivation, Domain, FormulaError, Lit, Origin, Side, VarId};
use crate::ssa::{
    build_ssa, build_ssa_reuse, pick_center, CenterPolicy, ClausePick, SsaCertificate, SsaConfig, SsaError, SsaFormula,
    SsaOutcome,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SasError {
    #[error("resource limit: {0}")]
    LimitExceeded(SsaError),
    #[error("no clause pair to exclude {var} for assignment {v}")]
    Selection { var: VarId, v: Assignment },
    #[error("clause {0} mixes A and B ancestry")]
    MixedProvenance(ClauseId),
    #[error("input clause {0} carries no A/B tag")]
    Untagged(ClauseId),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Ssa(SsaError),
}

impl From<SsaError> for SasError {
    fn from(e: SsaError) -> Self {
        match e {
            SsaError::Formula(f) => SasError::Formula(f),
            e if e.is_limit() => SasError::LimitExceeded(e),
            e => SasError::Ssa(e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DecisionOrder {
    /// Lowest-indexed unassigned W variable.
    #[default]
    Lowest,
    /// Uniformly random unassigned W variable.
    Seeded(u64),
}

/// Where conflict analysis stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LearnScheme {
    /// Resolve until only the decision variable of the level is left.
    #[default]
    Decision,
    /// Additionally keep the first-UIP clause met on the way as a learned
    /// clause for propagation. The clause returned to the parent is still the
    /// decision clause.
    FirstUip,
}

#[derive(Clone, Debug)]
pub struct SasConfig {
    pub member_cap: usize,
    pub time_cap: Option<Duration>,
    pub centered: bool,
    pub pick: ClausePick,
    pub center: CenterPolicy,
    pub decisions: DecisionOrder,
    pub learning: LearnScheme,
    /// Seed the SSA of a right branch with the one of its left sibling.
    pub ssa_reuse: bool,
}

impl Default for SasConfig {
    fn default() -> Self {
        SasConfig {
            member_cap: 10_000_000,
            time_cap: None,
            centered: true,
            pick: ClausePick::Strongest,
            center: CenterPolicy::FewestFalsified,
            decisions: DecisionOrder::Lowest,
            learning: LearnScheme::Decision,
            ssa_reuse: false,
        }
    }
}

impl SasConfig {
    /// Applies a seed to both the decision order and the SSA centers.
    pub fn seeded(mut self, seed: u64) -> Self {
        self.decisions = DecisionOrder::Seeded(seed);
        self.center = CenterPolicy::Seeded(seed);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reason {
    Decision,
    Implied(ClauseId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrailEntry {
    pub var: VarId,
    pub value: bool,
    pub level: u32,
    pub reason: Reason,
}

/// Partial assignment to W organised by decision levels.
#[derive(Clone, Debug, Default)]
pub struct Trail {
    entries: Vec<TrailEntry>,
    /// `level_starts[k]` is the index of the first entry of level `k + 1`.
    level_starts: Vec<usize>,
    value: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<Reason>>,
    position: Vec<u32>,
}

impl Trail {
    pub fn new(num_vars: u32) -> Trail {
        let n = num_vars as usize;
        Trail {
            entries: Vec::new(),
            level_starts: Vec::new(),
            value: vec![None; n],
            level: vec![0; n],
            reason: vec![None; n],
            position: vec![0; n],
        }
    }

    pub fn entries(&self) -> &[TrailEntry] {
        &self.entries
    }

    pub fn decision_level(&self) -> u32 {
        self.level_starts.len() as u32
    }

    pub fn value(&self, v: VarId) -> Option<bool> {
        self.value[v.idx()]
    }

    pub fn lit_value(&self, l: Lit) -> Option<bool> {
        self.value(l.var()).map(|b| l.eval(b))
    }

    pub fn level(&self, v: VarId) -> u32 {
        self.level[v.idx()]
    }

    pub fn reason(&self, v: VarId) -> Option<Reason> {
        self.reason[v.idx()]
    }

    pub fn position(&self, v: VarId) -> u32 {
        self.position[v.idx()]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Decision variable of `level` (`level >= 1`).
    pub fn decision(&self, level: u32) -> VarId {
        self.entries[self.level_starts[level as usize - 1]].var
    }

    fn push(&mut self, var: VarId, value: bool, reason: Reason) {
        if reason == Reason::Decision {
            self.level_starts.push(self.entries.len());
        }
        let level = self.decision_level();
        let i = var.idx();
        debug_assert!(self.value[i].is_none());
        self.value[i] = Some(value);
        self.level[i] = level;
        self.reason[i] = Some(reason);
        self.position[i] = self.entries.len() as u32;
        self.entries.push(TrailEntry { var, value, level, reason });
    }

    fn pop(&mut self) -> Option<TrailEntry> {
        let e = self.entries.pop()?;
        let i = e.var.idx();
        self.value[i] = None;
        self.reason[i] = None;
        if e.reason == Reason::Decision {
            self.level_starts.pop();
        }
        Some(e)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SasStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub ssa_calls: u64,
    pub ssa_members_peak: usize,
    pub ssa_members_total: u64,
    pub resolvents_added: u64,
    pub excl_iterations: u64,
    pub branches_skipped: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SasResult {
    /// A model of the input, one value per variable of the universe.
    Sat(Vec<bool>),
    /// `h` is the clause set `Φ(P)`; on the top-level result it mentions only
    /// keep-set variables.
    Unsat { h: Vec<ClauseId>, cert: SsaCertificate },
}

impl SasResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SasResult::Sat(_))
    }
}

/// Outcome of [`solve`]: the result plus the final clause database, which
/// contains every derived clause with its provenance.
#[derive(Clone, Debug)]
pub struct Solved {
    pub result: SasResult,
    pub formula: CnfFormula,
    pub stats: SasStats,
}

impl Solved {
    /// The clauses of H as a standalone formula over the full universe, in
    /// the order of `h`, and the certificate renumbered to match.
    pub fn h_formula(&self) -> Option<(CnfFormula, SsaCertificate)> {
        let SasResult::Unsat { h, cert } = &self.result else {
            return None;
        };
        let sub = self.formula.subset(h);
        let mut cert = cert.clone();
        cert.remap(|id| ClauseId(h.iter().position(|&x| x == id).expect("range of phi") as u32));
        Some((sub, cert))
    }
}

/// Result of unit propagation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Propagation {
    Ok,
    Conflict(ClauseId),
}

/// A clause learned from a conflict and the highest level below the
/// conflict level among its variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Learned {
    pub clause: ClauseId,
    pub backjump: u32,
}

/// The current V-clauses: ids ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VClauseView {
    pub ids: Vec<ClauseId>,
}

enum Node {
    Sat(Vec<bool>),
    Unsat(SsaCertificate),
}

/// The search state. Exposed so the individual steps can be driven and
/// inspected one at a time; [`solve`] runs the whole procedure.
pub struct Engine {
    g: CnfFormula,
    cfg: SasConfig,
    keep: Vec<bool>,
    keep_domain: Domain,
    trail: Trail,
    /// Clauses taking part in propagation and V-clause views. Intermediate
    /// resolvents of a chain are stored for provenance only.
    active: Vec<bool>,
    has_v: Vec<bool>,
    w_count: Vec<u32>,
    w_false: Vec<u32>,
    occurs: Vec<Vec<ClauseId>>,
    deadline: Option<Instant>,
    rng: ChaCha8Rng,
    salt: u64,
    pub stats: SasStats,
}

fn lit_code(l: Lit) -> usize {
    // Lit packs (var << 1 | sign); var >= 1
    let v = l.var().idx();
    v * 2 + (!l.is_positive()) as usize
}

impl Engine {
    pub fn new(g: CnfFormula, cfg: SasConfig) -> Engine {
        let n = g.num_vars();
        let keep: Vec<bool> = (1..=n).map(|i| g.is_keep(VarId::new(i))).collect();
        let keep_domain = Domain::new(g.keep_set());
        let seed = match cfg.decisions {
            DecisionOrder::Seeded(s) => s,
            DecisionOrder::Lowest => 0,
        };
        let mut e = Engine {
            trail: Trail::new(n),
            keep,
            keep_domain,
            active: Vec::new(),
            has_v: Vec::new(),
            w_count: Vec::new(),
            w_false: Vec::new(),
            occurs: vec![Vec::new(); 2 * n as usize],
            deadline: cfg.time_cap.map(|d| Instant::now() + d),
            rng: ChaCha8Rng::seed_from_u64(seed),
            salt: 0,
            stats: SasStats::default(),
            g: CnfFormula::new(n),
            cfg,
        };
        let g_ids: Vec<ClauseId> = g.ids().collect();
        e.g = g;
        for id in g_ids {
            e.index_clause(id, true);
        }
        e
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.g
    }

    pub fn trail(&self) -> &Trail {
        &self.trail
    }

    pub fn into_formula(self) -> CnfFormula {
        self.g
    }

    fn is_keep(&self, v: VarId) -> bool {
        self.keep[v.idx()]
    }

    fn index_clause(&mut self, id: ClauseId, active: bool) {
        debug_assert_eq!(id.idx(), self.active.len());
        let c = self.g.clause(id);
        let mut has_v = false;
        let mut w_count = 0;
        let mut w_false = 0;
        let mut codes = Vec::new();
        for &l in c.lits() {
            if self.keep[l.var().idx()] {
                has_v = true;
            } else {
                w_count += 1;
                if self.trail.lit_value(l) == Some(false) {
                    w_false += 1;
                }
                codes.push(lit_code(l));
            }
        }
        for code in codes {
            self.occurs[code].push(id);
        }
        self.active.push(active);
        self.has_v.push(has_v);
        self.w_count.push(w_count);
        self.w_false.push(w_false);
    }

    fn add_resolvent(
        &mut self,
        left: ClauseId,
        right: ClauseId,
        pivot: VarId,
        kind: fn(Derivation) -> Origin,
        active: bool,
    ) -> Result<ClauseId, SasError> {
        let id = self.g.add_resolvent(left, right, pivot, kind)?;
        self.index_clause(id, active);
        self.stats.resolvents_added += 1;
        Ok(id)
    }

    fn assign(&mut self, var: VarId, value: bool, reason: Reason) {
        self.trail.push(var, value, reason);
        let falsified = Lit::new(var, !value);
        for &id in &self.occurs[lit_code(falsified)] {
            self.w_false[id.idx()] += 1;
        }
    }

    fn unassign_one(&mut self) {
        let e = self.trail.pop().expect("nonempty trail");
        let falsified = Lit::new(e.var, !e.value);
        for &id in &self.occurs[lit_code(falsified)] {
            self.w_false[id.idx()] -= 1;
        }
    }

    /// Undoes every level above `level`.
    pub fn backtrack_to(&mut self, level: u32) {
        while self.trail.decision_level() > level {
            self.unassign_one();
        }
    }

    /// Opens a new decision level with `var = value`.
    pub fn decide(&mut self, var: VarId, value: bool) {
        debug_assert!(!self.is_keep(var));
        self.stats.decisions += 1;
        self.assign(var, value, Reason::Decision);
    }

    fn is_w_only(&self, id: ClauseId) -> bool {
        !self.has_v[id.idx()]
    }

    /// Status of a W-only clause: conflict, unit (with its open literal) or
    /// neither.
    fn w_status(&self, id: ClauseId) -> Option<Result<Lit, ()>> {
        let i = id.idx();
        let open = self.w_count[i] - self.w_false[i];
        if open == 0 {
            return Some(Err(()));
        }
        if open == 1 {
            let c = self.g.clause(id);
            let mut unassigned = None;
            for &l in c.lits() {
                match self.trail.lit_value(l) {
                    Some(true) => return None,
                    None => unassigned = Some(l),
                    Some(false) => {}
                }
            }
            return unassigned.map(Ok);
        }
        None
    }

    /// Unit propagation restricted to clauses over W only.
    pub fn bcp(&mut self) -> Propagation {
        let mut head = self.trail.len();
        for i in 0..self.active.len() {
            let id = ClauseId(i as u32);
            if !self.active[i] || !self.is_w_only(id) {
                continue;
            }
            match self.w_status(id) {
                Some(Err(())) => return Propagation::Conflict(id),
                Some(Ok(l)) => self.assign(l.var(), l.is_positive(), Reason::Implied(id)),
                None => {}
            }
        }
        while head < self.trail.len() {
            let e = self.trail.entries()[head];
            head += 1;
            let falsified = Lit::new(e.var, !e.value);
            let watch = self.occurs[lit_code(falsified)].clone();
            for id in watch {
                if !self.active[id.idx()] || !self.is_w_only(id) {
                    continue;
                }
                match self.w_status(id) {
                    Some(Err(())) => return Propagation::Conflict(id),
                    Some(Ok(l)) => self.assign(l.var(), l.is_positive(), Reason::Implied(id)),
                    None => {}
                }
            }
        }
        Propagation::Ok
    }

    /// Latest-assigned variable of `id` implied at `level`, if any.
    fn latest_implied_at(&self, id: ClauseId, level: u32) -> Option<(VarId, ClauseId)> {
        let mut best: Option<(u32, VarId, ClauseId)> = None;
        for v in self.g.clause(id).vars() {
            if self.is_keep(v) || self.trail.value(v).is_none() || self.trail.level(v) != level {
                continue;
            }
            if let Some(Reason::Implied(ante)) = self.trail.reason(v) {
                let pos = self.trail.position(v);
                if best.is_none_or(|(p, _, _)| pos > p) {
                    best = Some((pos, v, ante));
                }
            }
        }
        best.map(|(_, v, a)| (v, a))
    }

    fn vars_at_level(&self, id: ClauseId, level: u32) -> usize {
        self.g
            .clause(id)
            .vars()
            .filter(|&v| !self.is_keep(v) && self.trail.value(v).is_some() && self.trail.level(v) == level)
            .count()
    }

    /// Resolves `id` against antecedents until no variable implied at
    /// `level` remains. Only the final clause becomes active.
    fn push_out(
        &mut self,
        id: ClauseId,
        level: u32,
        kind: fn(Derivation) -> Origin,
        uip: bool,
    ) -> Result<ClauseId, SasError> {
        let mut cur = id;
        let mut uip_marked = !uip;
        while let Some((v, ante)) = self.latest_implied_at(cur, level) {
            cur = self.add_resolvent(cur, ante, v, kind, false)?;
            if !uip_marked && self.vars_at_level(cur, level) == 1 {
                self.active[cur.idx()] = true;
                uip_marked = true;
            }
        }
        self.active[cur.idx()] = true;
        Ok(cur)
    }

    /// Derives the clause returned for a conflict at the current level: the
    /// conflicting clause with every implied variable of the level resolved
    /// away. At level 0 this is the empty clause.
    pub fn analyze_conflict(&mut self, conflict: ClauseId) -> Result<Learned, SasError> {
        self.stats.conflicts += 1;
        let level = self.trail.decision_level();
        let uip = self.cfg.learning == LearnScheme::FirstUip;
        let clause = self.push_out(conflict, level, Origin::ConflictLearned, uip)?;
        let backjump = self
            .g
            .clause(clause)
            .vars()
            .filter(|&v| self.trail.value(v).is_some() && self.trail.level(v) < level)
            .map(|v| self.trail.level(v))
            .max()
            .unwrap_or(0);
        Ok(Learned { clause, backjump })
    }

    /// The current V-clauses.
    pub fn v_clause_view(&self) -> VClauseView {
        let ids = (0..self.active.len())
            .filter(|&i| self.active[i] && self.has_v[i] && self.w_false[i] == self.w_count[i])
            .map(|i| ClauseId(i as u32))
            .collect();
        VClauseView { ids }
    }

    fn ssa_config(&self) -> SsaConfig {
        SsaConfig {
            member_cap: self.cfg.member_cap,
            deadline: self.deadline,
            centered: self.cfg.centered,
            pick: self.cfg.pick,
        }
    }

    fn project(&self, ids: &[ClauseId]) -> SsaFormula {
        SsaFormula::project(self.keep_domain.clone(), ids.iter().map(|&id| self.g.clause(id)))
    }

    fn run_ssa(&mut self, h: &SsaFormula, prev: Option<&SsaCertificate>) -> Result<SsaOutcome, SasError> {
        self.stats.ssa_calls += 1;
        let cfg = self.ssa_config();
        let out = match prev {
            Some(prev) => {
                let invalidated: HashSet<ClauseId> =
                    prev.range().into_iter().filter(|&id| h.get(id).is_none()).collect();
                build_ssa_reuse(h, prev, &invalidated, &cfg)?
            }
            None => {
                self.salt += 1;
                let center = pick_center(h, self.cfg.center, self.salt);
                build_ssa(h, &center, &cfg)?
            }
        };
        if let SsaOutcome::Cert(c) = &out {
            self.stats.ssa_members_peak = self.stats.ssa_members_peak.max(c.len());
            self.stats.ssa_members_total += c.len() as u64;
        }
        Ok(out)
    }

    /// Tries to prove the current V-clauses unsatisfiable. On success the
    /// certificate maps members to the original clause ids.
    pub fn try_ssa_at_level(&mut self, prev: Option<&SsaCertificate>) -> Result<SsaOutcome, SasError> {
        let view = self.v_clause_view();
        let h = self.project(&view.ids);
        self.run_ssa(&h, prev)
    }

    /// Rewrites every clause of `Φ(P)` that contains a variable implied at
    /// `level` into a clause with the same V-literals whose only variable of
    /// that level (if any) is the level's decision variable.
    pub fn normalize(&mut self, cert: &mut SsaCertificate, level: u32) -> Result<(), SasError> {
        for id in cert.range() {
            if self.latest_implied_at(id, level).is_some() {
                let new = self.push_out(id, level, Origin::NormalizeResolvent, false)?;
                for c in cert.phi.iter_mut().filter(|c| **c == id) {
                    *c = new;
                }
            }
        }
        Ok(())
    }

    fn v_part_falsified(&self, id: ClauseId, v: &Assignment) -> bool {
        self.g.clause(id).lits().iter().all(|l| match self.keep_domain.position(l.var()) {
            Some(p) => !l.eval(v.get(p)),
            None => true,
        })
    }

    /// Merges the results of branches `w = 0` (`h0`) and `w = 1` (`h1`).
    ///
    /// Starts from the clauses of `h0 ∪ h1` without `w`; while they are
    /// satisfiable by some `v`, adds the resolvent on `w` of the lowest-id
    /// clauses of `h0` and `h1` whose V-parts `v` falsifies.
    pub fn excl(&mut self, h0: &[ClauseId], h1: &[ClauseId], w: VarId) -> Result<SsaCertificate, SasError> {
        let mut h: Vec<ClauseId> = h0.iter().chain(h1).copied().filter(|&id| !self.g.clause(id).has_var(w)).collect();
        h.sort_unstable();
        h.dedup();
        let mut sorted0 = h0.to_vec();
        sorted0.sort_unstable();
        let mut sorted1 = h1.to_vec();
        sorted1.sort_unstable();
        loop {
            self.check_deadline()?;
            let f = self.project(&h);
            match self.run_ssa(&f, None)? {
                SsaOutcome::Cert(c) => return Ok(c),
                SsaOutcome::Sat(v) => {
                    self.stats.excl_iterations += 1;
                    let pick = |side: &[ClauseId], lit: Lit| {
                        side.iter()
                            .copied()
                            .find(|&id| self.g.clause(id).contains(lit) && self.v_part_falsified(id, &v))
                    };
                    let (Some(a), Some(b)) = (pick(&sorted0, w.pos()), pick(&sorted1, w.neg())) else {
                        return Err(SasError::Selection { var: w, v });
                    };
                    let r = self.add_resolvent(a, b, w, Origin::ExclResolvent, true)?;
                    h.push(r);
                }
            }
        }
    }

    fn check_deadline(&self) -> Result<(), SasError> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(SasError::LimitExceeded(SsaError::TimeCap)),
            _ => Ok(()),
        }
    }

    fn pick_var(&mut self) -> Option<VarId> {
        let free =
            (0..self.keep.len()).map(VarId::from_idx).filter(|&v| !self.keep[v.idx()] && self.trail.value(v).is_none());
        match self.cfg.decisions {
            DecisionOrder::Lowest => free.into_iter().next(),
            DecisionOrder::Seeded(_) => {
                let free: Vec<VarId> = free.collect();
                if free.is_empty() {
                    None
                } else {
                    Some(free[self.rng.gen_range(0..free.len())])
                }
            }
        }
    }

    fn all_w_assigned(&self) -> bool {
        (0..self.keep.len()).all(|i| self.keep[i] || self.trail.value[i].is_some())
    }

    fn full_model(&self, v: &Assignment) -> Vec<bool> {
        (0..self.keep.len())
            .map(|i| {
                let var = VarId::from_idx(i);
                match self.keep_domain.position(var) {
                    Some(p) => v.get(p),
                    None => self.trail.value(var).expect("all W assigned"),
                }
            })
            .collect()
    }

    fn single_member(&self, clause: ClauseId) -> SsaCertificate {
        let zero = Assignment::zeros(self.keep_domain.len());
        SsaCertificate {
            over: self.keep_domain.vars().to_vec(),
            center: zero.clone(),
            members: vec![zero],
            phi: vec![clause],
        }
    }

    fn sem_str(&mut self, prev: Option<SsaCertificate>) -> Result<Node, SasError> {
        self.check_deadline()?;
        let d = self.trail.decision_level();

        if let Propagation::Conflict(c) = self.bcp() {
            let learned = self.analyze_conflict(c)?;
            return Ok(Node::Unsat(self.single_member(learned.clause)));
        }

        match self.try_ssa_at_level(prev.as_ref())? {
            SsaOutcome::Cert(mut cert) => {
                self.normalize(&mut cert, d)?;
                return Ok(Node::Unsat(cert));
            }
            SsaOutcome::Sat(v) => {
                if self.all_w_assigned() {
                    return Ok(Node::Sat(self.full_model(&v)));
                }
            }
        }

        let w = self.pick_var().expect("an unassigned W variable remains");
        self.decide(w, false);
        let left = self.sem_str(None)?;
        self.backtrack_to(d);
        let mut cert0 = match left {
            Node::Sat(m) => return Ok(Node::Sat(m)),
            Node::Unsat(c) => c,
        };
        let h0 = cert0.range();
        if !h0.iter().any(|&id| self.g.clause(id).has_var(w)) {
            self.stats.branches_skipped += 1;
            self.normalize(&mut cert0, d)?;
            return Ok(Node::Unsat(cert0));
        }

        self.decide(w, true);
        let reuse = self.cfg.ssa_reuse.then(|| cert0.clone());
        let right = self.sem_str(reuse)?;
        self.backtrack_to(d);
        let cert1 = match right {
            Node::Sat(m) => return Ok(Node::Sat(m)),
            Node::Unsat(c) => c,
        };
        let mut cert = self.excl(&h0, &cert1.range(), w)?;
        self.normalize(&mut cert, d)?;
        Ok(Node::Unsat(cert))
    }

    /// Runs the procedure from the current (empty) trail.
    pub fn run(&mut self) -> Result<SasResult, SasError> {
        match self.sem_str(None)? {
            Node::Sat(m) => Ok(SasResult::Sat(m)),
            Node::Unsat(cert) => Ok(SasResult::Unsat { h: cert.range(), cert }),
        }
    }
}

/// Solves `g` with its keep set as V and everything else as W.
pub fn solve(g: CnfFormula, cfg: &SasConfig) -> Result<Solved, SasError> {
    let mut engine = Engine::new(g, cfg.clone());
    let result = engine.run()?;
    let stats = engine.stats.clone();
    Ok(Solved { result, formula: engine.into_formula(), stats })
}

/// Recomputes every derived clause from its recorded parents; returns the
/// first clause whose literals do not match.
pub fn check_provenance(f: &CnfFormula) -> Result<(), ClauseId> {
    for c in f.clauses() {
        if let Some(d) = c.origin.derivation() {
            if d.left >= c.id || d.right >= c.id {
                return Err(c.id);
            }
            match crate::formula::resolve(f.clause(d.left), f.clause(d.right), d.pivot) {
                Ok(lits) if lits.as_slice() == c.lits() => {}
                _ => return Err(c.id),
            }
        }
    }
    Ok(())
}

/// Splits H by ancestry: a clause derived only from A-tagged inputs goes to
/// the first set, one derived only from B-tagged inputs to the second.
pub fn interpolant_split(f: &CnfFormula, h: &[ClauseId]) -> Result<(Vec<ClauseId>, Vec<ClauseId>), SasError> {
    let mut side: Vec<Side> = Vec::with_capacity(f.len());
    for c in f.clauses() {
        let s = match c.origin.derivation() {
            None => c.side.ok_or(SasError::Untagged(c.id))?,
            Some(d) => {
                let (l, r) = (side[d.left.idx()], side[d.right.idx()]);
                if l != r {
                    return Err(SasError::MixedProvenance(c.id));
                }
                l
            }
        };
        side.push(s);
    }
    let (a, b): (Vec<ClauseId>, Vec<ClauseId>) = h.iter().partition(|id| side[id.idx()] == Side::A);
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssa::verify_ssa;

    // w1 = 1, w2 = 2, v1 = 3, v2 = 4
    fn trace_formula() -> CnfFormula {
        let mut g =
            CnfFormula::from_dimacs_clauses(4, &[&[1, 3], &[1, 2], &[-2, 4], &[-3, -4], &[-1, 3], &[-1, 4]]).unwrap();
        g.set_keep([VarId::new(3), VarId::new(4)]).unwrap();
        g
    }

    fn lits(xs: &[i64]) -> Vec<Lit> {
        let mut v: Vec<Lit> = xs.iter().map(|&x| Lit::from_dimacs(x)).collect();
        v.sort();
        v
    }

    #[test]
    fn bcp_on_trace_formula() {
        let mut e = Engine::new(trace_formula(), SasConfig::default());
        assert_eq!(e.bcp(), Propagation::Ok);
        assert!(e.trail().is_empty());
        e.decide(VarId::new(1), false);
        assert_eq!(e.bcp(), Propagation::Ok);
        let last = e.trail().entries()[1];
        assert_eq!((last.var, last.value, last.reason), (VarId::new(2), true, Reason::Implied(ClauseId(1))));
        e.backtrack_to(0);
        e.decide(VarId::new(1), true);
        assert_eq!(e.bcp(), Propagation::Ok);
        assert_eq!(e.trail().len(), 1);
    }

    #[test]
    fn bcp_contradictory_units() {
        let g = CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
        let mut e = Engine::new(g, SasConfig::default());
        let Propagation::Conflict(c) = e.bcp() else { panic!("expected conflict") };
        let learned = e.analyze_conflict(c).unwrap();
        assert!(e.formula().clause(learned.clause).is_empty());
    }

    #[test]
    fn conflict_learns_decision_clause() {
        let g = CnfFormula::from_dimacs_clauses(2, &[&[-1, 2], &[-1, -2]]).unwrap();
        let mut e = Engine::new(g, SasConfig::default());
        assert_eq!(e.bcp(), Propagation::Ok);
        e.decide(VarId::new(1), true);
        let Propagation::Conflict(c) = e.bcp() else { panic!("expected conflict") };
        let learned = e.analyze_conflict(c).unwrap();
        assert_eq!(e.formula().clause(learned.clause).lits(), lits(&[-1]).as_slice());
        assert_eq!(learned.backjump, 0);
        assert_eq!(check_provenance(e.formula()), Ok(()));
    }

    #[test]
    fn leaf_ssa_and_normalize_on_trace_formula() {
        let mut e = Engine::new(trace_formula(), SasConfig::default());
        e.decide(VarId::new(1), false);
        assert_eq!(e.bcp(), Propagation::Ok);
        assert_eq!(e.v_clause_view().ids, vec![ClauseId(0), ClauseId(2), ClauseId(3)]);
        let out = e.try_ssa_at_level(None).unwrap();
        let mut cert = out.cert().cloned().unwrap();
        let s: Vec<String> = cert.members.iter().map(|m| m.to_string()).collect();
        assert_eq!(s, ["11", "01", "10"]);
        assert_eq!(cert.phi, vec![ClauseId(3), ClauseId(0), ClauseId(2)]);
        e.normalize(&mut cert, 1).unwrap();
        assert_eq!(cert.phi, vec![ClauseId(3), ClauseId(0), ClauseId(6)]);
        assert_eq!(e.formula().clause(ClauseId(6)).lits(), lits(&[1, 4]).as_slice());
    }

    #[test]
    fn empty_view_is_satisfied_by_zeros() {
        let mut g = CnfFormula::from_dimacs_clauses(3, &[&[1, 2]]).unwrap();
        g.set_keep([VarId::new(3)]).unwrap();
        let mut e = Engine::new(g, SasConfig::default());
        assert_eq!(e.try_ssa_at_level(None).unwrap(), SsaOutcome::Sat(Assignment::zeros(1)));
    }

    #[test]
    fn root_view_has_only_c4() {
        let mut e = Engine::new(trace_formula(), SasConfig::default());
        assert_eq!(e.bcp(), Propagation::Ok);
        assert_eq!(e.v_clause_view().ids, vec![ClauseId(3)]);
        assert_eq!(e.try_ssa_at_level(None).unwrap(), SsaOutcome::Sat(Assignment::parse("00").unwrap()));
    }

    #[test]
    fn golden_trace() {
        let solved = solve(trace_formula(), &SasConfig::default()).unwrap();
        let SasResult::Unsat { h, cert } = &solved.result else { panic!("expected unsat") };
        assert_eq!(h, &vec![ClauseId(3), ClauseId(7), ClauseId(8)]);
        let f = &solved.formula;
        assert_eq!(f.clause(ClauseId(7)).lits(), lits(&[3]).as_slice());
        assert_eq!(f.clause(ClauseId(8)).lits(), lits(&[4]).as_slice());
        let s: Vec<String> = cert.members.iter().map(|m| m.to_string()).collect();
        assert_eq!(s, ["11", "01", "10"]);
        assert_eq!(cert.center.to_string(), "11");
        let proj = SsaFormula::project(Domain::new(f.keep_set()), h.iter().map(|&id| f.clause(id)));
        assert_eq!(verify_ssa(&proj, cert), Ok(()));
        assert_eq!(check_provenance(f), Ok(()));
    }

    #[test]
    fn sat_with_forced_w() {
        // v1 = 1, w1 = 2
        let mut g = CnfFormula::from_dimacs_clauses(2, &[&[1, 2], &[-2]]).unwrap();
        g.set_keep([VarId::new(1)]).unwrap();
        let solved = solve(g, &SasConfig::default()).unwrap();
        assert_eq!(solved.result, SasResult::Sat(vec![true, false]));
    }

    #[test]
    fn empty_keep_set_gives_empty_clause() {
        let g = CnfFormula::from_dimacs_clauses(2, &[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]).unwrap();
        let solved = solve(g, &SasConfig::default()).unwrap();
        let SasResult::Unsat { h, cert } = &solved.result else { panic!() };
        assert_eq!(h.len(), 1);
        assert!(solved.formula.clause(h[0]).is_empty());
        assert_eq!(cert.len(), 1);
        assert_eq!(check_provenance(&solved.formula), Ok(()));
    }

    #[test]
    fn interpolant_split_simple() {
        // y1 = 1, x1 = 2, z1 = 3
        let mut g = CnfFormula::new(3);
        for c in [[1i64, 2], [1, -2]] {
            g.add_tagged(c.iter().map(|&x| Lit::from_dimacs(x)).collect(), Side::A).unwrap();
        }
        for c in [[-1i64, 3], [-1, -3]] {
            g.add_tagged(c.iter().map(|&x| Lit::from_dimacs(x)).collect(), Side::B).unwrap();
        }
        g.set_keep([VarId::new(1)]).unwrap();
        let solved = solve(g, &SasConfig::default()).unwrap();
        let SasResult::Unsat { h, .. } = &solved.result else { panic!() };
        let (a, b) = interpolant_split(&solved.formula, h).unwrap();
        let f = &solved.formula;
        assert!(a.iter().any(|&id| f.clause(id).lits() == lits(&[1]).as_slice()));
        assert!(b.iter().any(|&id| f.clause(id).lits() == lits(&[-1]).as_slice()));

        let mut all_a = CnfFormula::new(1);
        all_a.add_tagged(vec![Lit::from_dimacs(1)], Side::A).unwrap();
        all_a.add_tagged(vec![Lit::from_dimacs(-1)], Side::A).unwrap();
        all_a.set_keep([VarId::new(1)]).unwrap();
        let solved = solve(all_a, &SasConfig::default()).unwrap();
        let SasResult::Unsat { h, .. } = &solved.result else { panic!() };
        let (a, b) = interpolant_split(&solved.formula, h).unwrap();
        assert_eq!(&a, h);
        assert!(b.is_empty());
    }

    #[test]
    fn time_cap_is_a_distinct_outcome() {
        let cfg = SasConfig { time_cap: Some(Duration::ZERO), ..SasConfig::default() };
        std::thread::sleep(Duration::from_millis(2));
        assert!(matches!(solve(trace_formula(), &cfg), Err(SasError::LimitExceeded(SsaError::TimeCap))));
    }
}
