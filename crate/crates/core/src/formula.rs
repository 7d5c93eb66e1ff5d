//! CNF representation shared by every other module.
//!
//! Variables are dense and 1-based, matching DIMACS. A [`CnfFormula`] is an
//! append-only clause database: clause ids are indices into it and are never
//! reused. Every clause records how it was obtained, so derived clauses can be
//! replayed from the input clauses.

use std::fmt;
use std::ops::Not;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("clause contains both polarities of variable {0}")]
    Tautology(VarId),
    #[error("pivot {0} does not occur with opposite signs in the two clauses")]
    Pivot(VarId),
    #[error("variable {var} is outside the universe 1..={num_vars}")]
    VarRange { var: i64, num_vars: u32 },
    #[error("assignment does not cover variable {0}")]
    Domain(VarId),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A 1-based variable index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(u32);

impl VarId {
    pub fn new(index: u32) -> VarId {
        assert!(index >= 1, "variable indices start at 1");
        VarId(index)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Zero-based position, handy for dense per-variable arrays.
    pub fn idx(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_idx(i: usize) -> VarId {
        VarId(i as u32 + 1)
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: VarId, positive: bool) -> Lit {
        Lit(var.0 << 1 | (!positive) as u32)
    }

    pub fn from_dimacs(x: i64) -> Lit {
        assert!(x != 0);
        Lit::new(VarId::new(x.unsigned_abs() as u32), x > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> VarId {
        VarId(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "{}", self.var())
        } else {
            write!(f, "-{}", self.var())
        }
    }
}

/// Sorts and deduplicates literals, rejecting tautologies.
pub fn normalize_lits(mut lits: Vec<Lit>) -> Result<Vec<Lit>, FormulaError> {
    lits.sort_unstable();
    lits.dedup();
    for pair in lits.windows(2) {
        if pair[0].var() == pair[1].var() {
            return Err(FormulaError::Tautology(pair[0].var()));
        }
    }
    Ok(lits)
}

/// Index of a clause in its database. Displayed 1-based (`C1`, `C2`, ...).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseId(pub u32);

impl ClauseId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }

    /// 1-based number as used in DIMACS-relative file formats.
    pub fn number(self) -> usize {
        self.0 as usize + 1
    }

    pub fn from_number(n: usize) -> ClauseId {
        assert!(n >= 1);
        ClauseId(n as u32 - 1)
    }
}

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0 + 1)
    }
}

/// The two parents and the pivot of a resolvent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub left: ClauseId,
    pub right: ClauseId,
    pub pivot: VarId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    Input,
    /// Produced while analysing a conflict among clauses over the exclude set.
    ConflictLearned(Derivation),
    /// Produced when pushing implied assignments out of a clause.
    NormalizeResolvent(Derivation),
    /// Produced when merging two branch results on the decision variable.
    ExclResolvent(Derivation),
}

impl Origin {
    pub fn derivation(&self) -> Option<Derivation> {
        match *self {
            Origin::Input => None,
            Origin::ConflictLearned(d) | Origin::NormalizeResolvent(d) | Origin::ExclResolvent(d) => Some(d),
        }
    }
}

/// Partition tag for interpolation (`A(X,Y) ∧ B(Y,Z)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub id: ClauseId,
    lits: Vec<Lit>,
    pub origin: Origin,
    pub side: Option<Side>,
}

impl Clause {
    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn has_var(&self, var: VarId) -> bool {
        self.lits.iter().any(|l| l.var() == var)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.lits.iter().map(|l| l.var())
    }

    /// Evaluates the clause under a dense assignment to the whole universe
    /// (`values[v.idx()]`).
    pub fn eval_dense(&self, values: &[bool]) -> bool {
        self.lits.iter().any(|l| l.eval(values[l.var().idx()]))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "()");
        }
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Literals of the resolvent of `c1` and `c2` on `pivot`.
pub fn resolve(c1: &Clause, c2: &Clause, pivot: VarId) -> Result<Vec<Lit>, FormulaError> {
    let (pos, neg) = if c1.contains(pivot.pos()) && c2.contains(pivot.neg()) {
        (c1, c2)
    } else if c1.contains(pivot.neg()) && c2.contains(pivot.pos()) {
        (c2, c1)
    } else {
        return Err(FormulaError::Pivot(pivot));
    };
    let lits = pos.lits.iter().chain(neg.lits.iter()).copied().filter(|l| l.var() != pivot).collect();
    normalize_lits(lits)
}

/// An ordered set of variables with a var -> position lookup.
///
/// Assignments over a domain store one bit per position, in ascending
/// variable order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    vars: Vec<VarId>,
    pos: Vec<u32>,
}

const NO_POS: u32 = u32::MAX;

impl Domain {
    pub fn new(mut vars: Vec<VarId>) -> Domain {
        vars.sort_unstable();
        vars.dedup();
        let max = vars.last().map_or(0, |v| v.get() as usize);
        let mut pos = vec![NO_POS; max];
        for (i, v) in vars.iter().enumerate() {
            pos[v.idx()] = i as u32;
        }
        Domain { vars, pos }
    }

    /// The domain `1..=n`.
    pub fn universe(n: u32) -> Domain {
        Domain::new((1..=n).map(VarId::new).collect())
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn position(&self, v: VarId) -> Option<usize> {
        match self.pos.get(v.idx()) {
            Some(&p) if p != NO_POS => Some(p as usize),
            _ => None,
        }
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.position(v).is_some()
    }
}

/// A full assignment stored as a fixed-width bit vector.
///
/// The variable set it ranges over is carried separately (see [`Domain`]);
/// bit `i` is the value of the `i`-th variable in ascending order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    words: Box<[u64]>,
    len: u32,
}

impl Assignment {
    pub fn zeros(len: usize) -> Assignment {
        Assignment { words: vec![0; len.div_ceil(64)].into_boxed_slice(), len: len as u32 }
    }

    pub fn from_bools(bits: &[bool]) -> Assignment {
        let mut a = Assignment::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            a.set(i, b);
        }
        a
    }

    /// Parses a `0`/`1` string, first character = first position.
    pub fn parse(s: &str) -> Option<Assignment> {
        let mut a = Assignment::zeros(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => a.set(i, true),
                _ => return None,
            }
        }
        Some(a)
    }

    /// Builds the assignment whose bits are the low `len` bits of `x`,
    /// position 0 taking the most significant of them (so `0b011` over three
    /// positions prints as `011`).
    pub fn from_index(x: u64, len: usize) -> Assignment {
        let mut a = Assignment::zeros(len);
        for i in 0..len {
            a.set(i, (x >> (len - 1 - i)) & 1 == 1);
        }
        a
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len());
        let mask = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn flipped(&self, i: usize) -> Assignment {
        let mut a = self.clone();
        a.flip(i);
        a
    }

    pub fn distance(&self, other: &Assignment) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(other.words.iter()).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Truth value of `c` under `a`, an assignment over `domain`.
pub fn eval_clause(c: &Clause, a: &Assignment, domain: &Domain) -> Result<bool, FormulaError> {
    let mut sat = false;
    for l in c.lits() {
        let p = domain.position(l.var()).ok_or(FormulaError::Domain(l.var()))?;
        sat |= l.eval(a.get(p));
    }
    Ok(sat)
}

/// A clause database over the universe `1..=num_vars`, split into a keep
/// set V and an exclude set W.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
    keep: Vec<bool>,
}

impl CnfFormula {
    pub fn new(num_vars: u32) -> CnfFormula {
        CnfFormula { num_vars, clauses: Vec::new(), keep: vec![false; num_vars as usize] }
    }

    /// Builds a formula from DIMACS-style integer clauses.
    pub fn from_dimacs_clauses(num_vars: u32, clauses: &[&[i64]]) -> Result<CnfFormula, FormulaError> {
        let mut f = CnfFormula::new(num_vars);
        for c in clauses {
            f.add_dimacs(c)?;
        }
        Ok(f)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Grows the universe; new variables join the exclude set.
    pub fn ensure_vars(&mut self, n: u32) {
        if n > self.num_vars {
            self.num_vars = n;
            self.keep.resize(n as usize, false);
        }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, id: ClauseId) -> &Clause {
        &self.clauses[id.idx()]
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ClauseId> {
        (0..self.clauses.len() as u32).map(ClauseId)
    }

    pub fn is_keep(&self, v: VarId) -> bool {
        self.keep[v.idx()]
    }

    pub fn set_keep(&mut self, vars: impl IntoIterator<Item = VarId>) -> Result<(), FormulaError> {
        self.keep.iter_mut().for_each(|k| *k = false);
        for v in vars {
            self.check_var(v)?;
            self.keep[v.idx()] = true;
        }
        Ok(())
    }

    pub fn keep_set(&self) -> Vec<VarId> {
        (0..self.num_vars as usize).filter(|&i| self.keep[i]).map(VarId::from_idx).collect()
    }

    pub fn exclude_set(&self) -> Vec<VarId> {
        (0..self.num_vars as usize).filter(|&i| !self.keep[i]).map(VarId::from_idx).collect()
    }

    fn check_var(&self, v: VarId) -> Result<(), FormulaError> {
        if v.get() > self.num_vars {
            Err(FormulaError::VarRange { var: v.get() as i64, num_vars: self.num_vars })
        } else {
            Ok(())
        }
    }

    pub fn add_clause(&mut self, lits: Vec<Lit>) -> Result<ClauseId, FormulaError> {
        self.push(lits, Origin::Input, None)
    }

    pub fn add_dimacs(&mut self, lits: &[i64]) -> Result<ClauseId, FormulaError> {
        for &x in lits {
            if x == 0 || x.unsigned_abs() > self.num_vars as u64 {
                return Err(FormulaError::VarRange { var: x, num_vars: self.num_vars });
            }
        }
        self.add_clause(lits.iter().map(|&x| Lit::from_dimacs(x)).collect())
    }

    pub fn add_tagged(&mut self, lits: Vec<Lit>, side: Side) -> Result<ClauseId, FormulaError> {
        self.push(lits, Origin::Input, Some(side))
    }

    /// Appends a clause with the given provenance.
    pub fn push(&mut self, lits: Vec<Lit>, origin: Origin, side: Option<Side>) -> Result<ClauseId, FormulaError> {
        let lits = normalize_lits(lits)?;
        for l in &lits {
            self.check_var(l.var())?;
        }
        let id = ClauseId(self.clauses.len() as u32);
        self.clauses.push(Clause { id, lits, origin, side });
        Ok(id)
    }

    /// Resolves two clauses of the database on `pivot` and appends the result.
    /// `kind` wraps the derivation into the origin tag.
    pub fn add_resolvent(
        &mut self,
        left: ClauseId,
        right: ClauseId,
        pivot: VarId,
        kind: fn(Derivation) -> Origin,
    ) -> Result<ClauseId, FormulaError> {
        let lits = resolve(self.clause(left), self.clause(right), pivot)?;
        let d = Derivation { left, right, pivot };
        self.push(lits, kind(d), None)
    }

    /// Ids of clauses falsified by a dense assignment to the whole universe.
    pub fn falsified_dense(&self, values: &[bool]) -> Vec<ClauseId> {
        self.clauses.iter().filter(|c| !c.eval_dense(values)).map(|c| c.id).collect()
    }

    /// Ids (ascending) of clauses falsified by `a`, an assignment over `domain`.
    pub fn falsified_clauses(&self, a: &Assignment, domain: &Domain) -> Result<Vec<ClauseId>, FormulaError> {
        let mut out = Vec::new();
        for c in &self.clauses {
            if !eval_clause(c, a, domain)? {
                out.push(c.id);
            }
        }
        Ok(out)
    }

    pub fn satisfied_by_dense(&self, values: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.eval_dense(values))
    }

    /// Input clauses only, renumbered, with the keep set preserved.
    pub fn inputs_only(&self) -> CnfFormula {
        let mut f = CnfFormula::new(self.num_vars);
        f.keep = self.keep.clone();
        for c in self.clauses.iter().filter(|c| c.origin == Origin::Input) {
            f.push(c.lits.clone(), Origin::Input, c.side).expect("already validated");
        }
        f
    }

    /// A new formula holding the given clauses (renumbered in order) as inputs.
    pub fn subset(&self, ids: &[ClauseId]) -> CnfFormula {
        let mut f = CnfFormula::new(self.num_vars);
        f.keep = self.keep.clone();
        for &id in ids {
            let c = self.clause(id);
            f.push(c.lits.clone(), Origin::Input, c.side).expect("already validated");
        }
        f
    }
}

/// Parses DIMACS CNF. A comment line `c keep 1 2 3` sets the keep set.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, FormulaError> {
    let mut formula: Option<CnfFormula> = None;
    let mut declared_clauses = 0usize;
    let mut keep: Vec<VarId> = Vec::new();
    let mut pending: Vec<i64> = Vec::new();
    let mut pending_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let perr = |msg: String| FormulaError::Parse { line: line_no, msg };
        if let Some(rest) = line.strip_prefix('c') {
            let mut toks = rest.split_whitespace();
            if rest.starts_with(char::is_whitespace) && toks.next() == Some("keep") {
                for t in toks {
                    let v: u32 = t.parse().map_err(|_| perr(format!("bad keep variable `{t}`")))?;
                    if v == 0 {
                        return Err(perr("keep variable 0".into()));
                    }
                    keep.push(VarId::new(v));
                }
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if formula.is_some() {
                return Err(perr("duplicate header".into()));
            }
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 3 || toks[0] != "cnf" {
                return Err(perr(format!("malformed header `{line}`")));
            }
            let n: u32 = toks[1].parse().map_err(|_| perr("bad variable count".into()))?;
            declared_clauses = toks[2].parse().map_err(|_| perr("bad clause count".into()))?;
            formula = Some(CnfFormula::new(n));
            continue;
        }
        let f = formula.as_mut().ok_or_else(|| perr("clause before header".into()))?;
        for tok in line.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| perr(format!("bad literal `{tok}`")))?;
            if pending.is_empty() {
                pending_line = line_no;
            }
            if x == 0 {
                let lits = std::mem::take(&mut pending);
                f.add_dimacs(&lits)?;
            } else {
                if x.unsigned_abs() > f.num_vars as u64 {
                    return Err(FormulaError::VarRange { var: x, num_vars: f.num_vars });
                }
                pending.push(x);
            }
        }
    }
    let mut f = formula.ok_or(FormulaError::Parse { line: 0, msg: "missing `p cnf` header".into() })?;
    if !pending.is_empty() {
        return Err(FormulaError::Parse { line: pending_line, msg: "clause not terminated by 0".into() });
    }
    if f.len() != declared_clauses {
        return Err(FormulaError::Parse {
            line: 0,
            msg: format!("header declares {declared_clauses} clauses, found {}", f.len()),
        });
    }
    f.set_keep(keep)?;
    Ok(f)
}

/// Writes DIMACS CNF, with a `c keep` line when the keep set is nonempty.
pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut out = String::new();
    let keep = f.keep_set();
    if !keep.is_empty() {
        out.push_str("c keep");
        for v in keep {
            out.push_str(&format!(" {}", v.get()));
        }
        out.push('\n');
    }
    out.push_str(&format!("p cnf {} {}\n", f.num_vars(), f.len()));
    for c in f.clauses() {
        for l in c.lits() {
            out.push_str(&format!("{} ", l.to_dimacs()));
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(xs: &[i64]) -> Vec<Lit> {
        xs.iter().map(|&x| Lit::from_dimacs(x)).collect()
    }

    fn clause(f: &mut CnfFormula, xs: &[i64]) -> ClauseId {
        f.add_dimacs(xs).unwrap()
    }

    // w1 = 1, w2 = 2, v1 = 3, v2 = 4
    fn trace_pairs() -> (CnfFormula, [ClauseId; 6]) {
        let mut f = CnfFormula::new(4);
        let ids = [
            clause(&mut f, &[1, 3]),
            clause(&mut f, &[1, 2]),
            clause(&mut f, &[-2, 4]),
            clause(&mut f, &[-3, -4]),
            clause(&mut f, &[-1, 3]),
            clause(&mut f, &[-1, 4]),
        ];
        (f, ids)
    }

    #[test]
    fn resolve_trace_pairs() {
        let (f, c) = trace_pairs();
        assert_eq!(resolve(f.clause(c[0]), f.clause(c[4]), VarId::new(1)).unwrap(), lits(&[3]));
        assert_eq!(resolve(f.clause(c[4]), f.clause(c[0]), VarId::new(1)).unwrap(), lits(&[3]));
        // (w1 ∨ v2) and (¬w1 ∨ v2)
        let mut g = f.clone();
        let c7 = clause(&mut g, &[1, 4]);
        assert_eq!(resolve(g.clause(c7), g.clause(c[5]), VarId::new(1)).unwrap(), lits(&[4]));
        // (¬w2 ∨ v2) with (w1 ∨ w2)
        assert_eq!(resolve(f.clause(c[2]), f.clause(c[1]), VarId::new(2)).unwrap(), lits(&[1, 4]));
    }

    #[test]
    fn resolve_errors() {
        let mut f = CnfFormula::new(3);
        let a = clause(&mut f, &[1, 2]);
        let b = clause(&mut f, &[-1, -2]);
        let c = clause(&mut f, &[1, 3]);
        assert_eq!(resolve(f.clause(a), f.clause(b), VarId::new(1)), Err(FormulaError::Tautology(VarId::new(2))));
        assert_eq!(resolve(f.clause(a), f.clause(c), VarId::new(1)), Err(FormulaError::Pivot(VarId::new(1))));
        assert_eq!(resolve(f.clause(a), f.clause(b), VarId::new(3)), Err(FormulaError::Pivot(VarId::new(3))));
    }

    #[test]
    fn add_resolvent_records_provenance() {
        let (mut f, c) = trace_pairs();
        let r = f.add_resolvent(c[2], c[1], VarId::new(2), Origin::NormalizeResolvent).unwrap();
        assert_eq!(r, ClauseId(6));
        let d = f.clause(r).origin.derivation().unwrap();
        assert_eq!((d.left, d.right, d.pivot), (c[2], c[1], VarId::new(2)));
    }

    #[test]
    fn eval_clause_examples() {
        let mut f = CnfFormula::new(4);
        let c = clause(&mut f, &[1, -3]);
        let e = f.push(vec![], Origin::Input, None).unwrap();
        let d = Domain::universe(4);
        let p = Assignment::parse("0110").unwrap();
        assert!(!eval_clause(f.clause(c), &p, &d).unwrap());
        assert!(eval_clause(f.clause(c), &Assignment::parse("1110").unwrap(), &d).unwrap());
        assert!(!eval_clause(f.clause(e), &p, &d).unwrap());
        let narrow = Domain::new(vec![VarId::new(1), VarId::new(2)]);
        assert_eq!(
            eval_clause(f.clause(c), &Assignment::parse("01").unwrap(), &narrow),
            Err(FormulaError::Domain(VarId::new(3)))
        );
    }

    #[test]
    fn falsified_clauses_or3_against_units() {
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, 2, 3], &[-1], &[-2], &[-3]]).unwrap();
        let d = Domain::universe(3);
        let at = |s| f.falsified_clauses(&Assignment::parse(s).unwrap(), &d).unwrap();
        assert_eq!(at("000"), vec![ClauseId(0)]);
        assert_eq!(at("100"), vec![ClauseId(1)]);
        let g = CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap();
        assert!(g.falsified_clauses(&Assignment::parse("10").unwrap(), &Domain::universe(2)).unwrap().is_empty());
    }

    #[test]
    fn dimacs_basic_and_errors() {
        let f = parse_dimacs("p cnf 2 1\n1 -2 0\n").unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.clauses()[0].lits(), &lits(&[1, -2])[..]);
        assert_eq!(parse_dimacs("p cnf 1 1\n1 -1 0\n"), Err(FormulaError::Tautology(VarId::new(1))));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 3 0\n"), Err(FormulaError::VarRange { var: 3, .. })));
        assert!(matches!(parse_dimacs("1 2 0\n"), Err(FormulaError::Parse { line: 1, .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 x 0\n"), Err(FormulaError::Parse { line: 2, .. })));
        assert!(matches!(parse_dimacs("p cnf 2 2\n1 2 0\n"), Err(FormulaError::Parse { .. })));
    }

    #[test]
    fn dimacs_keep_sidecar_and_round_trip() {
        let text = "c keep 3 4\np cnf 4 6\n1 3 0\n1 2 0\n-2 4 0\n-3 -4 0\n-1 3 0\n-1 4 0\n";
        let f = parse_dimacs(text).unwrap();
        assert_eq!(f.keep_set(), vec![VarId::new(3), VarId::new(4)]);
        assert_eq!(f.exclude_set(), vec![VarId::new(1), VarId::new(2)]);
        assert_eq!(write_dimacs(&f), text);
        let g = parse_dimacs(&write_dimacs(&f)).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn assignment_bits() {
        let a = Assignment::parse("0110").unwrap();
        assert_eq!(a.to_string(), "0110");
        assert_eq!(a.distance(&Assignment::zeros(4)), 2);
        assert_eq!(Assignment::from_index(0b011, 3).to_string(), "011");
        let wide = Assignment::zeros(130).flipped(129);
        assert!(wide.get(129));
        assert_eq!(wide.distance(&Assignment::zeros(130)), 1);
    }
}
