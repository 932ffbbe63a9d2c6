//! Approval-based committee rules: CC, seq-CC, PAV, seq-Phragmén, MES,
//! α-MES, GJCR and α-GJCR.
//!
//! Sequential rules branch on ties. Branches are explored breadth-first with
//! the smallest candidate first, and at most `max_committees` distinct
//! committees are reported. In adversarial mode every branch is explored and
//! the committees with the largest `α_JR` come first.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Serialize;

use crate::bitset::CandidateSet;
use crate::error::{Error, Result};
use crate::instance::{Axiom, Committee, Instance};
use crate::optimize::alpha_grid;
use crate::rational::{harmonic, lcm_upto, Rational};
use crate::verify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Cc,
    SeqCc,
    Pav,
    SeqPhragmen,
    Mes,
    MesCompleted,
    AlphaMes,
    Gjcr,
    AlphaGjcr,
}

impl Rule {
    pub const ALL: [Rule; 9] = [
        Rule::Cc,
        Rule::SeqCc,
        Rule::Pav,
        Rule::SeqPhragmen,
        Rule::Mes,
        Rule::MesCompleted,
        Rule::AlphaMes,
        Rule::Gjcr,
        Rule::AlphaGjcr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Cc => "cc",
            Rule::SeqCc => "seqcc",
            Rule::Pav => "pav",
            Rule::SeqPhragmen => "seqphragmen",
            Rule::Mes => "mes",
            Rule::MesCompleted => "mescompleted",
            Rule::AlphaMes => "alphames",
            Rule::Gjcr => "gjcr",
            Rule::AlphaGjcr => "alphagjcr",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == key)
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

#[derive(Clone, Debug)]
pub struct RuleOptions {
    pub max_committees: usize,
    pub adversarial: bool,
    pub trace: bool,
    /// Cap on live branches per round.
    pub frontier_cap: usize,
    /// Node budget for the CC and PAV searches.
    pub node_budget: u64,
}

impl Default for RuleOptions {
    fn default() -> Self {
        RuleOptions {
            max_committees: 5,
            adversarial: false,
            trace: false,
            frontier_cap: 64,
            node_budget: 50_000_000,
        }
    }
}

const ADVERSARIAL_FRONTIER_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TraceStep {
    pub candidate: usize,
    /// What `value` measures: `gain`, `load`, `price`, `group_size` or
    /// `padding`.
    pub metric: &'static str,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleOutcome {
    pub rule: Rule,
    pub committees: Vec<Committee>,
    /// Optimal score (CC, PAV), budget per voter (α-MES) or α (α-GJCR).
    pub parameter: Option<Rational>,
    /// Steps leading to the first committee, when tracing is on.
    pub trace: Vec<TraceStep>,
    pub notes: Vec<String>,
}

impl RuleOutcome {
    pub fn first(&self) -> Committee {
        self.committees[0]
    }
}

pub fn run_rule(inst: &Instance, rule: Rule, opts: &RuleOptions) -> Result<RuleOutcome> {
    match rule {
        Rule::Cc => cc(inst, opts),
        Rule::SeqCc => Ok(seq_cc(inst, opts)),
        Rule::Pav => pav(inst, opts),
        Rule::SeqPhragmen => Ok(seq_phragmen(inst, opts)),
        Rule::Mes => Ok(mes_rule(inst, opts)),
        Rule::MesCompleted => Ok(mes_completed(inst, opts)),
        Rule::AlphaMes => alpha_mes(inst, opts),
        Rule::Gjcr => Ok(gjcr(inst, opts)),
        Rule::AlphaGjcr => Ok(alpha_gjcr(inst, opts)),
    }
}

// ---------------------------------------------------------------------------
// score-based rules

pub fn cc_score(inst: &Instance, w: Committee) -> usize {
    inst.approvals().iter().filter(|a| a.intersects(w.members())).count()
}

pub fn pav_score(inst: &Instance, w: Committee) -> Rational {
    inst.satisfaction(w.members()).into_iter().map(harmonic).sum()
}

/// Exact Thiele optimization with integer weights: `weights[t]` is the gain
/// of a voter's `t`-th approved member.
struct ThieleSearch<'a> {
    inst: &'a Instance,
    weights: Vec<u128>,
    sat: Vec<usize>,
    nodes: u64,
    budget: u64,
    best: Option<u128>,
    target: Option<u128>,
    found: Vec<CandidateSet>,
    limit: usize,
}

impl<'a> ThieleSearch<'a> {
    fn new(inst: &'a Instance, weights: Vec<u128>, budget: u64) -> Self {
        ThieleSearch {
            inst,
            weights,
            sat: vec![0; inst.n()],
            nodes: 0,
            budget,
            best: None,
            target: None,
            found: Vec::new(),
            limit: 0,
        }
    }

    fn gain(&self, c: usize) -> u128 {
        self.inst
            .supporters(c)
            .iter()
            .map(|v| self.weights.get(self.sat[v] + 1).copied().unwrap_or(0))
            .sum()
    }

    fn done(&self) -> bool {
        self.target.is_some() && self.found.len() >= self.limit
    }

    fn dfs(&mut self, i: usize, chosen: CandidateSet, score: u128) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { what: "Thiele score search", budget: self.budget });
        }
        let (m, k) = (self.inst.m(), self.inst.k());
        let slots = k - chosen.len();
        if slots == 0 {
            match self.target {
                None => {
                    if self.best.is_none_or(|b| score > b) {
                        self.best = Some(score);
                    }
                }
                Some(t) => {
                    if score == t {
                        self.found.push(chosen);
                    }
                }
            }
            return Ok(());
        }
        if m - i < slots {
            return Ok(());
        }
        let mut gains: Vec<u128> = (i..m).map(|d| self.gain(d)).collect();
        let gain_i = gains[0];
        gains.sort_unstable_by(|a, b| b.cmp(a));
        let ub = score + gains.iter().take(slots).sum::<u128>();
        let prune = match (self.target, self.best) {
            (Some(t), _) => ub < t,
            (None, Some(b)) => ub <= b,
            (None, None) => false,
        };
        if prune {
            return Ok(());
        }
        for v in self.inst.supporters(i).iter() {
            self.sat[v] += 1;
        }
        let res = self.dfs(i + 1, chosen.with(i), score + gain_i);
        for v in self.inst.supporters(i).iter() {
            self.sat[v] -= 1;
        }
        res?;
        if self.done() {
            return Ok(());
        }
        self.dfs(i + 1, chosen, score)
    }
}

/// Optimal score and up to `limit` optimal committees in lexicographic order.
fn thiele_optimum(inst: &Instance, weights: Vec<u128>, limit: usize, budget: u64) -> Result<(u128, Vec<CandidateSet>)> {
    let mut search = ThieleSearch::new(inst, weights, budget);
    search.dfs(0, CandidateSet::EMPTY, 0)?;
    let best = search.best.expect("k <= m");
    search.target = Some(best);
    search.limit = limit;
    search.dfs(0, CandidateSet::EMPTY, 0)?;
    Ok((best, search.found))
}

fn score_rule(inst: &Instance, rule: Rule, weights: Vec<u128>, scale: u128, opts: &RuleOptions) -> Result<RuleOutcome> {
    let limit = if opts.adversarial { ADVERSARIAL_FRONTIER_CAP } else { opts.max_committees };
    let (best, found) = thiele_optimum(inst, weights, limit, opts.node_budget)?;
    let mut committees: Vec<Committee> = found.into_iter().map(Committee::new).collect();
    if opts.adversarial {
        sort_adversarial(inst, &mut committees);
    }
    committees.truncate(opts.max_committees);
    let score = Rational::ratio_u128(best, scale);
    Ok(RuleOutcome { rule, committees, parameter: Some(score), trace: Vec::new(), notes: Vec::new() })
}

pub fn cc(inst: &Instance, opts: &RuleOptions) -> Result<RuleOutcome> {
    let mut weights = vec![0; inst.k() + 1];
    weights[1] = 1;
    score_rule(inst, Rule::Cc, weights, 1, opts)
}

/// Largest committee size for which PAV's integer-scaled scores fit in
/// `u128`.
pub const PAV_MAX_K: usize = 60;

pub fn pav(inst: &Instance, opts: &RuleOptions) -> Result<RuleOutcome> {
    if inst.k() > PAV_MAX_K {
        return Err(Error::Precondition(format!("PAV supports k <= {PAV_MAX_K}")));
    }
    let scale = lcm_upto(inst.k());
    let weights = (0..=inst.k()).map(|t| if t == 0 { 0 } else { scale / t as u128 }).collect();
    score_rule(inst, Rule::Pav, weights, scale, opts)
}

fn sort_adversarial(inst: &Instance, committees: &mut [Committee]) {
    let mut keyed: Vec<(Rational, Committee)> =
        committees.iter().map(|&w| (verify::alpha_jr(inst, w).alpha, w)).collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0));
    for (slot, (_, w)) in committees.iter_mut().zip(keyed) {
        *slot = w;
    }
}

// ---------------------------------------------------------------------------
// sequential rules

/// One branch of a sequential rule.
trait Greedy: Clone + Eq + Hash {
    fn members(&self) -> CandidateSet;
    /// The candidates tied for the next pick, in increasing order, and the
    /// value they tie on. Empty when the rule stops.
    fn moves(&self, inst: &Instance) -> (Vec<usize>, Rational);
    fn advance(&self, inst: &Instance, c: usize) -> Self;
    fn metric() -> &'static str;
}

struct Branch<S> {
    state: S,
    trace: Vec<TraceStep>,
    done: bool,
}

/// Breadth-first over tie branches. Returns finished branches in branch
/// order.
fn explore<S: Greedy>(inst: &Instance, starts: Vec<(S, Vec<TraceStep>)>, opts: &RuleOptions) -> Vec<(S, Vec<TraceStep>)> {
    let cap = if opts.adversarial { ADVERSARIAL_FRONTIER_CAP } else { opts.frontier_cap.max(opts.max_committees) };
    let mut frontier: Vec<Branch<S>> =
        starts.into_iter().map(|(state, trace)| Branch { state, trace, done: false }).collect();
    while frontier.iter().any(|b| !b.done) {
        let mut next: IndexMap<S, (Vec<TraceStep>, bool)> = IndexMap::new();
        for branch in frontier {
            if branch.done {
                next.entry(branch.state).or_insert((branch.trace, true));
                continue;
            }
            let (moves, value) = if branch.state.members().len() >= inst.k() {
                (Vec::new(), Rational::zero())
            } else {
                branch.state.moves(inst)
            };
            if moves.is_empty() {
                next.entry(branch.state).or_insert((branch.trace, true));
                continue;
            }
            for c in moves {
                let child = branch.state.advance(inst, c);
                if next.contains_key(&child) {
                    continue;
                }
                let mut trace = Vec::new();
                if opts.trace {
                    trace = branch.trace.clone();
                    trace.push(TraceStep { candidate: c, metric: S::metric(), value: value.clone() });
                }
                next.insert(child, (trace, false));
            }
        }
        next.truncate(cap);
        frontier = next.into_iter().map(|(state, (trace, done))| Branch { state, trace, done }).collect();
    }
    frontier.into_iter().map(|b| (b.state, b.trace)).collect()
}

/// Fills a short committee with the smallest unelected candidates.
fn pad(inst: &Instance, members: CandidateSet, trace: &mut Vec<TraceStep>) -> Committee {
    let mut w = members;
    let free = inst.all_candidates().difference(members);
    for c in free.iter().take(inst.k().saturating_sub(members.len())) {
        w.insert(c);
        trace.push(TraceStep { candidate: c, metric: "padding", value: Rational::zero() });
    }
    Committee::new(w)
}

fn finish<S: Greedy>(
    inst: &Instance,
    rule: Rule,
    branches: Vec<(S, Vec<TraceStep>)>,
    parameter: Option<Rational>,
    opts: &RuleOptions,
) -> RuleOutcome {
    let mut committees: Vec<Committee> = Vec::new();
    let mut first_trace = None;
    let mut padded = false;
    for (state, mut trace) in branches {
        let before = trace.len();
        let w = pad(inst, state.members(), &mut trace);
        padded |= trace.len() > before;
        if first_trace.is_none() {
            first_trace = Some(trace);
        }
        if !committees.contains(&w) {
            committees.push(w);
        }
    }
    if opts.adversarial {
        sort_adversarial(inst, &mut committees);
    }
    committees.truncate(opts.max_committees);
    let mut notes = Vec::new();
    if padded {
        notes.push("some branches selected fewer than k candidates and were padded".to_string());
    }
    let trace = if opts.trace { first_trace.unwrap_or_default() } else { Vec::new() };
    RuleOutcome { rule, committees, parameter, trace, notes }
}

/// Indices attaining the maximum (or minimum) key, in increasing order.
fn arg_best<K: Ord>(items: impl Iterator<Item = (usize, K)>, maximize: bool) -> (Vec<usize>, Option<K>) {
    let mut best: Option<K> = None;
    let mut ties = Vec::new();
    for (c, key) in items {
        let ord = match &best {
            None => std::cmp::Ordering::Greater,
            Some(b) if maximize => key.cmp(b),
            Some(b) => b.cmp(&key),
        };
        match ord {
            std::cmp::Ordering::Greater => {
                best = Some(key);
                ties.clear();
                ties.push(c);
            }
            std::cmp::Ordering::Equal => ties.push(c),
            std::cmp::Ordering::Less => {}
        }
    }
    (ties, best)
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct SeqCcState {
    members: CandidateSet,
}

impl Greedy for SeqCcState {
    fn members(&self) -> CandidateSet {
        self.members
    }

    fn moves(&self, inst: &Instance) -> (Vec<usize>, Rational) {
        let unc = verify::uncovered(inst, self.members);
        let free = inst.all_candidates().difference(self.members);
        let (ties, best) = arg_best(free.iter().map(|c| (c, inst.supporters(c).intersection_len(&unc))), true);
        (ties, Rational::from(best.unwrap_or(0)))
    }

    fn advance(&self, _: &Instance, c: usize) -> Self {
        SeqCcState { members: self.members.with(c) }
    }

    fn metric() -> &'static str {
        "gain"
    }
}

pub fn seq_cc(inst: &Instance, opts: &RuleOptions) -> RuleOutcome {
    let start = SeqCcState { members: CandidateSet::EMPTY };
    let branches = explore(inst, vec![(start, Vec::new())], opts);
    finish(inst, Rule::SeqCc, branches, None, opts)
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct PhragmenState {
    members: CandidateSet,
    loads: Vec<Rational>,
}

impl PhragmenState {
    fn load_if(&self, inst: &Instance, c: usize) -> Option<Rational> {
        let nc = inst.supporters(c);
        let size = nc.len();
        if size == 0 {
            return None;
        }
        let mut total = Rational::one();
        for v in nc.iter() {
            total += &self.loads[v];
        }
        Some(total / Rational::from(size))
    }
}

impl Greedy for PhragmenState {
    fn members(&self) -> CandidateSet {
        self.members
    }

    fn moves(&self, inst: &Instance) -> (Vec<usize>, Rational) {
        let free = inst.all_candidates().difference(self.members);
        let (ties, best) =
            arg_best(free.iter().filter_map(|c| self.load_if(inst, c).map(|t| (c, t))), false);
        (ties, best.unwrap_or_default())
    }

    fn advance(&self, inst: &Instance, c: usize) -> Self {
        let t = self.load_if(inst, c).expect("moves only offers supported candidates");
        let mut loads = self.loads.clone();
        for v in inst.supporters(c).iter() {
            loads[v] = t.clone();
        }
        PhragmenState { members: self.members.with(c), loads }
    }

    fn metric() -> &'static str {
        "load"
    }
}

pub fn seq_phragmen(inst: &Instance, opts: &RuleOptions) -> RuleOutcome {
    let start = PhragmenState { members: CandidateSet::EMPTY, loads: vec![Rational::zero(); inst.n()] };
    let branches = explore(inst, vec![(start, Vec::new())], opts);
    finish(inst, Rule::SeqPhragmen, branches, None, opts)
}

/// Voter loads after running seq-Phragmén along the smallest-index tie
/// branch; exposed for invariant checks.
pub fn seq_phragmen_loads(inst: &Instance) -> (Committee, Vec<Rational>) {
    let mut state = PhragmenState { members: CandidateSet::EMPTY, loads: vec![Rational::zero(); inst.n()] };
    while state.members.len() < inst.k() {
        let (moves, _) = state.moves(inst);
        let Some(&c) = moves.first() else { break };
        state = state.advance(inst, c);
    }
    (Committee::new(state.members), state.loads)
}

/// Smallest `q` with `Σ min(b_v, q) >= 1`, or `None` if the budgets sum to
/// less than one.
pub fn mes_price(budgets: &[Rational]) -> Option<Rational> {
    let mut sorted: Vec<&Rational> = budgets.iter().collect();
    sorted.sort();
    let total: Rational = sorted.iter().map(|&b| b.clone()).sum();
    if total < Rational::one() {
        return None;
    }
    let mut paid = Rational::zero();
    let s = sorted.len();
    for (i, b) in sorted.iter().enumerate() {
        let q = (Rational::one() - paid.clone()) / Rational::from(s - i);
        if q <= **b {
            return Some(q);
        }
        paid += *b;
    }
    unreachable!("budgets sum to at least one")
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct MesState {
    members: CandidateSet,
    budgets: Vec<Rational>,
}

impl MesState {
    fn new(inst: &Instance, b: &Rational) -> Self {
        MesState { members: CandidateSet::EMPTY, budgets: vec![b.clone(); inst.n()] }
    }

    fn price(&self, inst: &Instance, c: usize) -> Option<Rational> {
        let budgets: Vec<Rational> = inst.supporters(c).iter().map(|v| self.budgets[v].clone()).collect();
        mes_price(&budgets)
    }
}

impl Greedy for MesState {
    fn members(&self) -> CandidateSet {
        self.members
    }

    fn moves(&self, inst: &Instance) -> (Vec<usize>, Rational) {
        let free = inst.all_candidates().difference(self.members);
        let (ties, best) = arg_best(free.iter().filter_map(|c| self.price(inst, c).map(|q| (c, q))), false);
        (ties, best.unwrap_or_default())
    }

    fn advance(&self, inst: &Instance, c: usize) -> Self {
        let q = self.price(inst, c).expect("moves only offers affordable candidates");
        let mut budgets = self.budgets.clone();
        for v in inst.supporters(c).iter() {
            let pay = budgets[v].clone().min(q.clone());
            budgets[v] -= &pay;
        }
        MesState { members: self.members.with(c), budgets }
    }

    fn metric() -> &'static str {
        "price"
    }
}

/// Purchase sequence of MES with budget `b` per voter, breaking ties towards
/// the smallest index. Stops after `limit` purchases if given.
pub fn mes(inst: &Instance, b: &Rational, limit: Option<usize>) -> Vec<usize> {
    let mut state = MesState::new(inst, b);
    let mut bought = Vec::new();
    while limit.is_none_or(|l| bought.len() < l) {
        let (moves, _) = state.moves(inst);
        let Some(&c) = moves.first() else { break };
        state = state.advance(inst, c);
        bought.push(c);
    }
    bought
}

/// Remaining budgets after the smallest-index MES branch; exposed for
/// invariant checks.
pub fn mes_budgets(inst: &Instance, b: &Rational) -> (Vec<usize>, Vec<Rational>) {
    let mut state = MesState::new(inst, b);
    let mut bought = Vec::new();
    loop {
        let (moves, _) = state.moves(inst);
        let Some(&c) = moves.first() else { break };
        state = state.advance(inst, c);
        bought.push(c);
    }
    (bought, state.budgets)
}

fn mes_branches(inst: &Instance, b: &Rational, opts: &RuleOptions) -> Vec<(MesState, Vec<TraceStep>)> {
    explore(inst, vec![(MesState::new(inst, b), Vec::new())], opts)
}

/// MES with `b = k/n`, padded if it buys fewer than `k`.
pub fn mes_rule(inst: &Instance, opts: &RuleOptions) -> RuleOutcome {
    let b = Rational::ratio(inst.k(), inst.n());
    let branches = mes_branches(inst, &b, opts);
    finish(inst, Rule::Mes, branches, Some(b), opts)
}

/// MES with `b = k/n`, then seq-Phragmén for the remaining seats, starting
/// from the amounts each voter spent as loads.
pub fn mes_completed(inst: &Instance, opts: &RuleOptions) -> RuleOutcome {
    let b = Rational::ratio(inst.k(), inst.n());
    let starts: Vec<(PhragmenState, Vec<TraceStep>)> = mes_branches(inst, &b, opts)
        .into_iter()
        .map(|(state, trace)| {
            let loads = state.budgets.iter().map(|left| b.clone() - left.clone()).collect();
            (PhragmenState { members: state.members, loads }, trace)
        })
        .collect();
    let branches = explore(inst, starts, opts);
    finish(inst, Rule::MesCompleted, branches, Some(b), opts)
}

/// Number of purchases (capped at `k`) of the smallest-index MES branch.
fn mes_count(inst: &Instance, b: &Rational) -> usize {
    mes(inst, b, Some(inst.k())).len()
}

/// Smallest per-voter budget at which MES buys `k` candidates (or as many as
/// have supporters), found by doubling and exact bisection, then snapped to
/// the simplest rational in the final bracket.
pub fn alpha_mes_budget(inst: &Instance) -> Result<(Rational, Vec<String>)> {
    let supported = (0..inst.m()).filter(|&c| !inst.supporters(c).is_empty()).count();
    let target = supported.min(inst.k());
    if target == 0 {
        return Err(Error::Precondition("no voter approves any candidate".into()));
    }
    let cap = Rational::from(inst.m());
    let mut lo = Rational::zero();
    let mut hi = Rational::ratio(inst.k(), inst.n());
    while mes_count(inst, &hi) < target {
        lo = hi.clone();
        hi = (hi * Rational::from(2usize)).min(cap.clone());
        if lo == cap {
            return Err(Error::Invariant(format!("MES buys fewer than {target} candidates at budget {cap}")));
        }
    }
    // breakpoints have denominators below n^(2k+1); a bracket narrower than
    // 1/(2·D²) holds at most one such rational
    let inv_n = Rational::ratio(1, inst.n());
    let mut eps = Rational::ratio(1, 2);
    for _ in 0..2 * (2 * inst.k() + 1) {
        eps = eps * inv_n.clone();
    }
    while hi.clone() - lo.clone() >= eps {
        let mid = lo.midpoint(&hi);
        if mes_count(inst, &mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let snapped = Rational::simplest_in(&lo, &hi);
    let b = if mes_count(inst, &snapped) >= target { snapped } else { hi };
    let mut notes = Vec::new();
    for j in 1..16 {
        let probe = b.clone() * Rational::ratio(j, 16);
        if mes_count(inst, &probe) >= target {
            notes.push(format!("MES already buys {target} candidates at the smaller budget {probe}"));
            break;
        }
    }
    Ok((b, notes))
}

pub fn alpha_mes(inst: &Instance, opts: &RuleOptions) -> Result<RuleOutcome> {
    let (b, notes) = alpha_mes_budget(inst)?;
    let branches = mes_branches(inst, &b, opts);
    let mut out = finish(inst, Rule::AlphaMes, branches, Some(b), opts);
    out.notes.extend(notes);
    Ok(out)
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct GjcrState {
    members: CandidateSet,
    prices: Vec<Rational>,
    level: usize,
    /// α as `(p, q)`; a group qualifies when `|N(c)|·k·q >= p·ℓ·n`.
    alpha: (usize, usize),
}

impl GjcrState {
    fn new(inst: &Instance, alpha: (usize, usize)) -> Self {
        GjcrState { members: CandidateSet::EMPTY, prices: vec![Rational::zero(); inst.n()], level: inst.k(), alpha }
    }

    /// Level, tied candidates and their group size for the next addition.
    fn scan(&self, inst: &Instance) -> Option<(usize, Vec<usize>, usize)> {
        let (p, q) = self.alpha;
        let (n, k) = (inst.n(), inst.k());
        let sat = inst.satisfaction(self.members);
        let free = inst.all_candidates().difference(self.members);
        for level in (1..=self.level).rev() {
            let sizes = free.iter().map(|c| (c, inst.supporters(c).iter().filter(|&v| sat[v] < level).count()));
            let qualifying = sizes.filter(|&(_, s)| s >= 1 && s * k * q >= p * level * n);
            let (ties, best) = arg_best(qualifying, true);
            if let Some(size) = best {
                return Some((level, ties, size));
            }
        }
        None
    }
}

impl Greedy for GjcrState {
    fn members(&self) -> CandidateSet {
        self.members
    }

    fn moves(&self, inst: &Instance) -> (Vec<usize>, Rational) {
        match self.scan(inst) {
            Some((_, ties, size)) => (ties, Rational::from(size)),
            None => (Vec::new(), Rational::zero()),
        }
    }

    fn advance(&self, inst: &Instance, c: usize) -> Self {
        let (level, _, size) = self.scan(inst).expect("moves offered a candidate");
        let sat = inst.satisfaction(self.members);
        let share = Rational::ratio(1, size);
        let mut prices = self.prices.clone();
        for v in inst.supporters(c).iter().filter(|&v| sat[v] < level) {
            prices[v] += &share;
        }
        GjcrState { members: self.members.with(c), prices, level, alpha: self.alpha }
    }

    fn metric() -> &'static str {
        "group_size"
    }
}

/// GJCR selection along the smallest-index tie branch, without padding, and
/// the final voter prices.
pub fn gjcr_raw(inst: &Instance, alpha: &Rational) -> (Vec<usize>, Vec<Rational>) {
    let mut state = GjcrState::new(inst, alpha_counts(alpha));
    let mut picked = Vec::new();
    while picked.len() < inst.k() {
        let (moves, _) = state.moves(inst);
        let Some(&c) = moves.first() else { break };
        state = state.advance(inst, c);
        picked.push(c);
    }
    (picked, state.prices)
}

fn alpha_counts(alpha: &Rational) -> (usize, usize) {
    let p = usize::try_from(alpha.numer()).expect("α numerator fits in usize");
    let q = usize::try_from(alpha.denom()).expect("α denominator fits in usize");
    (p, q)
}

pub fn gjcr(inst: &Instance, opts: &RuleOptions) -> RuleOutcome {
    let branches = explore(inst, vec![(GjcrState::new(inst, (1, 1)), Vec::new())], opts);
    finish(inst, Rule::Gjcr, branches, None, opts)
}

/// Values of α at which some group size crosses a GJCR threshold:
/// `j·k/(ℓ·n)` for `1 <= j <= n`, in decreasing order.
fn gjcr_breakpoints(inst: &Instance) -> Vec<Rational> {
    let (n, k) = (inst.n(), inst.k());
    let mut values: Vec<Rational> = (1..=k)
        .flat_map(|l| (1..=n).map(move |j| Rational::ratio(j * k, l * n)))
        .collect();
    values.extend(alpha_grid(inst, Axiom::Ejr).values.into_iter().filter(|a| a.is_positive()));
    values.sort_by(|a, b| b.cmp(a));
    values.dedup();
    values
}

/// GJCR with thresholds `α·ℓ·n/k`, for the largest α at which the
/// smallest-index branch selects `k` candidates. Scans the breakpoints in
/// decreasing order rather than bisecting.
pub fn alpha_gjcr(inst: &Instance, opts: &RuleOptions) -> RuleOutcome {
    let breakpoints = gjcr_breakpoints(inst);
    let alpha = breakpoints
        .iter()
        .find(|a| gjcr_raw(inst, a).0.len() >= inst.k())
        .or(breakpoints.last())
        .cloned()
        .expect("n, k >= 1 give at least one breakpoint");
    let start = GjcrState::new(inst, alpha_counts(&alpha));
    let branches = explore(inst, vec![(start, Vec::new())], opts);
    finish(inst, Rule::AlphaGjcr, branches, Some(alpha), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn c(s: &str) -> Committee {
        s.parse().unwrap()
    }

    fn defaults() -> RuleOptions {
        RuleOptions::default()
    }

    #[test]
    fn rule_names_round_trip() {
        for rule in Rule::ALL {
            assert_eq!(rule.name().parse::<Rule>().unwrap(), rule);
        }
        assert_eq!("seq-phragmen".parse::<Rule>().unwrap(), Rule::SeqPhragmen);
        assert!("borda".parse::<Rule>().is_err());
    }

    #[test]
    fn cc_examples() {
        let inst = fixtures::bridged_pair();
        let out = cc(&inst, &defaults()).unwrap();
        assert_eq!(out.committees, vec![c("0,1")]);
        assert_eq!(out.parameter, Some(r("10")));

        let inst = fixtures::three_blocks();
        let out = cc(&inst, &defaults()).unwrap();
        assert_eq!(out.parameter, Some(r("10")));
        assert!(out.committees.contains(&c("0,3,5")));
        assert!(out.committees.iter().all(|&w| cc_score(&inst, w) == 10));

        let full = Instance::new(3, 3, vec![vec![0], vec![1, 2], vec![]]).unwrap();
        assert_eq!(cc(&full, &defaults()).unwrap().committees, vec![c("0,1,2")]);
    }

    #[test]
    fn pav_examples() {
        let inst = fixtures::bridged_pair();
        assert_eq!(pav_score(&inst, c("0,1")), r("10"));
        assert_eq!(pav_score(&inst, c("2,3")), r("3"));
        assert_eq!(pav(&inst, &defaults()).unwrap().committees, vec![c("0,1")]);

        let inst = fixtures::jr_ejr_gap(2, 2);
        assert_eq!(pav_score(&inst, c("0,1")), r("6"));
        assert_eq!(pav_score(&inst, c("0,2")), r("6"));
        let out = pav(&inst, &defaults()).unwrap();
        assert_eq!(out.committees, vec![c("0,1"), c("0,2"), c("1,2")]);
        assert_eq!(out.parameter, Some(r("6")));
    }

    #[test]
    fn seq_cc_examples() {
        let inst = fixtures::three_blocks();
        let out = seq_cc(&inst, &RuleOptions { trace: true, ..defaults() });
        assert_eq!(out.first(), c("0,3,5"));
        let gains: Vec<Rational> = out.trace.iter().map(|s| s.value.clone()).collect();
        assert_eq!(gains, vec![r("4"), r("3"), r("3")]);

        let inst = fixtures::block_grid(2);
        let out = seq_cc(&inst, &RuleOptions { adversarial: true, ..defaults() });
        assert_eq!(verify::alpha_jr(&inst, out.first()).alpha, r("2/3"));

        let single = Instance::new(1, 1, vec![vec![0], vec![]]).unwrap();
        assert_eq!(seq_cc(&single, &defaults()).committees, vec![c("0")]);
    }

    #[test]
    fn seq_phragmen_examples() {
        let inst = fixtures::bridged_pair();
        let out = seq_phragmen(&inst, &RuleOptions { trace: true, ..defaults() });
        assert_eq!(out.committees, vec![c("0,1")]);
        assert_eq!(out.trace[0].value, r("1/5"));

        let inst = fixtures::block_grid(2);
        let out = seq_phragmen(&inst, &RuleOptions { adversarial: true, ..defaults() });
        assert_eq!(out.first(), c("0,1"));
        assert_eq!(verify::alpha_jr(&inst, out.first()).alpha, r("2/3"));

        let (w, loads) = seq_phragmen_loads(&fixtures::three_blocks());
        assert_eq!(w.len(), 3);
        assert_eq!(loads.into_iter().sum::<Rational>(), r("3"));
    }

    #[test]
    fn mes_examples() {
        let inst = fixtures::bridged_pair();
        assert_eq!(mes(&inst, &r("1/5"), None), vec![0, 1]);
        assert!(mes(&inst, &Rational::zero(), None).is_empty());
        assert_eq!(mes_price(&[r("1/2"), r("1/4"), r("1/8")]), None);
        assert_eq!(mes_price(&[r("1/2"), r("1/2"), r("1/2")]), Some(r("1/3")));
        assert_eq!(mes_price(&[r("1/10"), r("1"), r("1")]), Some(r("9/20")));
        let (bought, left) = mes_budgets(&inst, &r("1/5"));
        let spent = r("2") - left.into_iter().sum::<Rational>();
        assert_eq!(spent, Rational::from(bought.len()));
    }

    #[test]
    fn alpha_mes_examples() {
        let inst = fixtures::bridged_pair();
        let out = alpha_mes(&inst, &defaults()).unwrap();
        assert_eq!(out.parameter, Some(r("1/5")));
        assert_eq!(out.committees, vec![c("0,1")]);

        let all = Instance::new(2, 1, vec![vec![0]; 4]).unwrap();
        assert_eq!(alpha_mes_budget(&all).unwrap().0, r("1/4"));

        let inst = fixtures::block_grid(2);
        let out = alpha_mes(&inst, &RuleOptions { adversarial: true, ..defaults() }).unwrap();
        assert_eq!(out.first(), c("0,1"));

        let empty = Instance::new(2, 1, vec![vec![]; 3]).unwrap();
        assert!(alpha_mes(&empty, &defaults()).is_err());
    }

    #[test]
    fn gjcr_examples() {
        let inst = fixtures::bridged_pair();
        let (picked, prices) = gjcr_raw(&inst, &Rational::one());
        assert_eq!(picked, vec![0, 1]);
        assert!(prices.iter().all(|p| *p == r("1/5")));

        let sparse = Instance::new(3, 2, vec![vec![0], vec![1], vec![2], vec![0]]).unwrap();
        assert!(gjcr_raw(&sparse, &Rational::one()).0.len() < 2);
        let out = gjcr(&sparse, &defaults());
        assert_eq!(out.first().len(), 2);
        assert!(!out.notes.is_empty());
    }

    #[test]
    fn alpha_gjcr_on_block_grid() {
        let inst = fixtures::block_grid(2);
        let out = alpha_gjcr(&inst, &RuleOptions { adversarial: true, ..defaults() });
        assert_eq!(out.parameter, Some(r("2/3")));
        assert_eq!(out.first(), c("0,1"));
    }

    #[test]
    fn tie_free_grid_defeats_every_rule() {
        let inst = fixtures::block_grid_tie_free(5);
        let blocks = CandidateSet::full(6);
        for rule in [Rule::Cc, Rule::SeqCc, Rule::SeqPhragmen, Rule::Pav, Rule::AlphaMes, Rule::AlphaGjcr] {
            let out = run_rule(&inst, rule, &defaults()).unwrap();
            for &w in &out.committees {
                assert!(w.members().is_subset(blocks), "{rule}: {w}");
                assert_eq!(verify::alpha_jr(&inst, w).alpha, r("5/6"), "{rule}");
            }
        }
    }
}
