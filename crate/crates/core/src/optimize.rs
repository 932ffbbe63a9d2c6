//! Optimal α-values over all committees of size `k`.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::bitset::{binomial, CandidateSet, VoterSet};
use crate::error::{Error, Result};
use crate::instance::{Axiom, Committee, Instance};
use crate::rational::Rational;
use crate::verify::{self, EjrEvaluator};

pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;
pub const DEFAULT_COMMITTEE_BUDGET: u128 = 1_000_000;

/// Candidate optimal α-values: `α*` always lies on this grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlphaGrid {
    pub axiom: Axiom,
    pub values: Vec<Rational>,
}

/// JR: `{j·k/n : 0 <= j <= ⌈n/k⌉-1}`. EJR and EJR+: the union over
/// `ℓ in 1..=k` of `{j·k/(ℓ·n) : 0 <= j <= ⌈ℓ·n/k⌉-1}`.
pub fn alpha_grid(inst: &Instance, axiom: Axiom) -> AlphaGrid {
    let (n, k) = (inst.n(), inst.k());
    let levels = match axiom {
        Axiom::Jr => 1..=1,
        Axiom::Ejr | Axiom::EjrPlus => 1..=k,
    };
    let mut values: Vec<Rational> = levels
        .flat_map(|l| (0..(l * n).div_ceil(k)).map(move |j| Rational::ratio(j * k, l * n)))
        .collect();
    values.sort();
    values.dedup();
    AlphaGrid { axiom, values }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    IlpBnb,
    BruteForce,
    DomainSpecial,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::IlpBnb => "ilp_bnb",
            Method::BruteForce => "brute_force",
            Method::DomainSpecial => "domain_special",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptimizationOutcome {
    pub axiom: Axiom,
    pub alpha_star: Rational,
    pub committee: Committee,
    pub method: Method,
    /// Search nodes (branch and bound) or committees (enumeration) visited.
    pub explored: u64,
}

/// `⌈α·n/k⌉ - 1`: the most uncovered supporters any candidate may keep.
pub fn uncovered_bound(inst: &Instance, alpha: &Rational) -> Result<usize> {
    if !alpha.is_positive() {
        return Err(Error::Precondition(format!("alpha must be positive, got {alpha}")));
    }
    let scaled = alpha * &Rational::ratio(inst.n(), inst.k());
    let ceil = scaled.ceil();
    usize::try_from(ceil - 1u32).map_err(|_| Error::Precondition(format!("alpha {alpha} too large")))
}

/// Result of one feasibility search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Feasibility {
    pub committee: Option<Committee>,
    pub nodes: u64,
}

/// Whether some committee satisfies α-JR, via [`search_jr`] with the bound
/// `⌈α·n/k⌉ - 1`.
pub fn exists_committee_jr(inst: &Instance, alpha: &Rational) -> Result<Option<Committee>> {
    Ok(search_jr(inst, uncovered_bound(inst, alpha)?, DEFAULT_NODE_BUDGET)?.committee)
}

/// Branch and bound for a size-`k` committee in which every candidate has at
/// most `bound` supporters approving no member. Candidates are decided in
/// index order, inclusion first, so the first committee found is the
/// lexicographically smallest feasible one.
pub fn search_jr(inst: &Instance, bound: usize, node_budget: u64) -> Result<Feasibility> {
    let mut search = JrSearch::new(inst, bound, node_budget);
    let found = search.dfs(0, CandidateSet::EMPTY, &VoterSet::full(inst.n()))?;
    Ok(Feasibility { committee: found.map(Committee::new), nodes: search.nodes })
}

struct JrSearch<'a> {
    inst: &'a Instance,
    bound: usize,
    budget: u64,
    nodes: u64,
    /// Voters whose largest approved index is below `i`, for each `i`.
    settled_by: Vec<VoterSet>,
}

impl<'a> JrSearch<'a> {
    fn new(inst: &'a Instance, bound: usize, budget: u64) -> Self {
        let m = inst.m();
        let mut settled_by = vec![VoterSet::with_capacity(inst.n()); m + 1];
        for (v, a) in inst.approvals().iter().enumerate() {
            let from = a.last().map_or(0, |c| c + 1);
            for s in settled_by.iter_mut().skip(from) {
                s.insert(v);
            }
        }
        JrSearch { inst, bound, budget, nodes: 0, settled_by }
    }

    /// `unc` holds the voters not covered by `chosen`.
    fn dfs(&mut self, i: usize, chosen: CandidateSet, unc: &VoterSet) -> Result<Option<CandidateSet>> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { what: "JR feasibility search", budget: self.budget });
        }
        let (m, k) = (self.inst.m(), self.inst.k());
        let slots = k - chosen.len();
        if slots > m - i {
            return Ok(None);
        }
        if !self.can_still_succeed(i, chosen, unc, slots) {
            return Ok(None);
        }
        if slots == 0 {
            // every later candidate is excluded; `can_still_succeed` has
            // already checked the decided ones
            let ok = (i..m).all(|c| self.inst.supporters(c).intersection_len(unc) <= self.bound);
            return Ok(ok.then_some(chosen));
        }
        let mut covered = unc.clone();
        covered.difference_with(self.inst.supporters(i));
        if let Some(w) = self.dfs(i + 1, chosen.with(i), &covered)? {
            return Ok(Some(w));
        }
        self.dfs(i + 1, chosen, unc)
    }

    /// Necessary condition: each excluded candidate's uncovered supporters
    /// must be reducible to `bound` using the remaining slots.
    fn can_still_succeed(&self, i: usize, chosen: CandidateSet, unc: &VoterSet, slots: usize) -> bool {
        let settled = &self.settled_by[i];
        let mut gains = Vec::with_capacity(self.inst.m() - i);
        for c in CandidateSet::full(i).difference(chosen).iter() {
            let nc = self.inst.supporters(c);
            let open = nc.intersection_len(unc);
            if open <= self.bound {
                continue;
            }
            let stuck = nc.intersection3_len(unc, settled);
            if stuck > self.bound {
                return false;
            }
            gains.clear();
            gains.extend((i..self.inst.m()).map(|d| nc.intersection3_len(unc, self.inst.supporters(d))));
            gains.sort_unstable_by(|a, b| b.cmp(a));
            let reachable: usize = gains.iter().take(slots).sum();
            if reachable.min(open - stuck) + self.bound < open {
                return false;
            }
        }
        true
    }
}

/// Smallest `α_JR(W)` over all committees, by binary search on the number
/// of uncovered supporters allowed per candidate.
pub fn optimal_alpha_jr(inst: &Instance) -> Result<OptimizationOutcome> {
    optimal_alpha_jr_with_budget(inst, DEFAULT_NODE_BUDGET)
}

pub fn optimal_alpha_jr_with_budget(inst: &Instance, node_budget: u64) -> Result<OptimizationOutcome> {
    let (n, k) = (inst.n(), inst.k());
    let top = n.div_ceil(k) - 1;
    let mut explored = 0;
    let mut run = |bound: usize| -> Result<Option<Committee>> {
        let f = search_jr(inst, bound, node_budget)?;
        explored += f.nodes;
        Ok(f.committee)
    };
    let mut best = run(top)?.ok_or_else(|| {
        Error::Invariant(format!("no committee keeps uncovered groups below {}", top + 1))
    })?;
    let (mut lo, mut hi) = (0usize, top);
    // invariant: feasible at hi, and infeasible below lo
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match run(mid)? {
            Some(w) => {
                hi = mid;
                best = w;
            }
            None => lo = mid + 1,
        }
    }
    let alpha_star = Rational::ratio(hi * k, n);
    debug_assert_eq!(verify::alpha_jr(inst, best).alpha, alpha_star);
    Ok(OptimizationOutcome { axiom: Axiom::Jr, alpha_star, committee: best, method: Method::IlpBnb, explored })
}

fn check_enumeration(inst: &Instance, budget: u128) -> Result<()> {
    let count = binomial(inst.m(), inst.k());
    if count > budget {
        return Err(Error::InfeasibleScale { what: "committee enumeration", needed: count, budget });
    }
    Ok(())
}

/// Enumerates every committee and keeps the lexicographically first one
/// minimizing `value`. Stops early at zero.
pub(crate) fn enumerate_min(
    inst: &Instance,
    axiom: Axiom,
    budget: u128,
    mut value: impl FnMut(Committee, Option<&Rational>) -> Result<Rational>,
) -> Result<OptimizationOutcome> {
    check_enumeration(inst, budget)?;
    let mut best: Option<(Rational, Committee)> = None;
    let mut explored = 0;
    for w in inst.all_candidates().subsets_of_size(inst.k()) {
        explored += 1;
        let w = Committee::new(w);
        let v = value(w, best.as_ref().map(|b| &b.0))?;
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            let zero = v.is_zero();
            best = Some((v, w));
            if zero {
                break;
            }
        }
    }
    let (alpha_star, committee) = best.expect("k <= m so at least one committee exists");
    Ok(OptimizationOutcome { axiom, alpha_star, committee, method: Method::BruteForce, explored })
}

/// Smallest `α_JR(W)` by plain enumeration; a cross-check for the search.
pub fn optimal_alpha_jr_brute(inst: &Instance, budget: u128) -> Result<OptimizationOutcome> {
    enumerate_min(inst, Axiom::Jr, budget, |w, _| Ok(verify::alpha_jr(inst, w).alpha))
}

pub fn optimal_alpha_ejr(inst: &Instance) -> Result<OptimizationOutcome> {
    optimal_alpha_ejr_with_budget(inst, DEFAULT_COMMITTEE_BUDGET)
}

/// Smallest `α_EJR(W)` by enumeration. Each committee's scan is abandoned
/// as soon as its value reaches the incumbent, which cannot change the
/// minimum.
pub fn optimal_alpha_ejr_with_budget(inst: &Instance, budget: u128) -> Result<OptimizationOutcome> {
    check_enumeration(inst, budget)?;
    let eval = EjrEvaluator::new(inst)?;
    let (n, k) = (inst.n(), inst.k());
    let mut incumbent: Option<(usize, usize)> = None;
    enumerate_min(inst, Axiom::Ejr, budget, |w, _| {
        let (c, l) = eval.evaluate(w, incumbent);
        if incumbent.is_none_or(|(ic, il)| Rational::cmp_counts(c, l, ic, il).is_lt()) {
            incumbent = Some((c, l));
        }
        Ok(Rational::ratio(c * k, l * n))
    })
}

pub fn optimal_alpha_ejr_plus(inst: &Instance) -> Result<OptimizationOutcome> {
    optimal_alpha_ejr_plus_with_budget(inst, DEFAULT_COMMITTEE_BUDGET)
}

pub fn optimal_alpha_ejr_plus_with_budget(inst: &Instance, budget: u128) -> Result<OptimizationOutcome> {
    enumerate_min(inst, Axiom::EjrPlus, budget, |w, _| Ok(verify::alpha_ejr_plus(inst, w).alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Y(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(c) => write!(f, "x{c}"),
            Var::Y(v) => write!(f, "y{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(i64, Var)>,
    pub sense: Sense,
    pub rhs: i64,
}

/// The α-JR feasibility ILP: binary `x_c` (selected) and `y_v` (covered).
///
/// * `card`: `Σ x_c = k`
/// * `cover_v`: `y_v - Σ_{c in A_v} x_c <= 0`
/// * `quota_c`: `Σ_{v in N_c} (1 - y_v) <= bound`, written as
///   `Σ_{v in N_c} y_v >= |N_c| - bound`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IlpModel {
    pub num_x: usize,
    pub num_y: usize,
    pub bound: usize,
    pub rows: Vec<LpRow>,
}

impl IlpModel {
    pub fn new(inst: &Instance, alpha: &Rational) -> Result<Self> {
        let bound = uncovered_bound(inst, alpha)?;
        let mut rows = Vec::with_capacity(1 + inst.n() + inst.m());
        rows.push(LpRow {
            name: "card".into(),
            terms: (0..inst.m()).map(|c| (1, Var::X(c))).collect(),
            sense: Sense::Eq,
            rhs: inst.k() as i64,
        });
        for v in 0..inst.n() {
            let mut terms = vec![(1, Var::Y(v))];
            terms.extend(inst.approval(v).iter().map(|c| (-1, Var::X(c))));
            rows.push(LpRow { name: format!("cover_{v}"), terms, sense: Sense::Le, rhs: 0 });
        }
        for c in 0..inst.m() {
            let nc = inst.supporters(c);
            let mut terms: Vec<(i64, Var)> = nc.iter().map(|v| (1, Var::Y(v))).collect();
            if terms.is_empty() {
                terms.push((0, Var::X(c)));
            }
            rows.push(LpRow {
                name: format!("quota_{c}"),
                terms,
                sense: Sense::Ge,
                rhs: nc.len() as i64 - bound as i64,
            });
        }
        Ok(IlpModel { num_x: inst.m(), num_y: inst.n(), bound, rows })
    }

    /// Writes the model in the LP text format.
    pub fn write_lp(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "\\ alpha-JR feasibility, uncovered bound {}", self.bound)?;
        writeln!(out, "Minimize")?;
        writeln!(out, " obj: 0 x0")?;
        writeln!(out, "Subject To")?;
        for row in &self.rows {
            let mut line = format!(" {}:", row.name);
            for (i, (coef, var)) in row.terms.iter().enumerate() {
                let sign = if *coef < 0 { "-" } else if i == 0 { "" } else { "+" };
                let mag = coef.unsigned_abs();
                let sep = if sign.is_empty() { "" } else { " " };
                if mag == 1 {
                    line.push_str(&format!(" {sign}{sep}{var}"));
                } else {
                    line.push_str(&format!(" {sign}{sep}{mag} {var}"));
                }
            }
            line.push_str(&format!(" {} {}", row.sense, row.rhs));
            writeln!(out, "{line}")?;
        }
        writeln!(out, "Binary")?;
        for c in 0..self.num_x {
            writeln!(out, " {}", Var::X(c))?;
        }
        for v in 0..self.num_y {
            writeln!(out, " {}", Var::Y(v))?;
        }
        writeln!(out, "End")?;
        Ok(())
    }
}

pub fn export_lp(inst: &Instance, alpha: &Rational, out: &mut impl Write) -> Result<()> {
    IlpModel::new(inst, alpha)?.write_lp(out)
}
