//! Structured preference domains: party lists, voter intervals (VI) and
//! candidate intervals (CI).
//!
//! Orders are plain permutations. Functions taking an order check it with
//! [`verify_order`] and fail with a precondition error otherwise.

use std::collections::HashSet;

use serde::Serialize;

use crate::bitset::{CandidateSet, VoterSet};
use crate::error::{Error, Result};
use crate::instance::{Axiom, Committee, Instance, Violation};
use crate::optimize::{self, Method, OptimizationOutcome};
use crate::rational::Rational;
use crate::verify::{self, AxiomResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Party {
    pub voters: Vec<usize>,
    pub candidates: CandidateSet,
}

impl Party {
    pub fn size(&self) -> usize {
        self.voters.len()
    }
}

/// Voters grouped by ballot, in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartyStructure {
    pub parties: Vec<Party>,
}

impl PartyStructure {
    pub fn sizes(&self) -> Vec<usize> {
        self.parties.iter().map(Party::size).collect()
    }
}

/// Why a profile is not a party-list instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartyListViolation {
    /// Two voters whose ballots overlap without being equal.
    Overlap { voters: (usize, usize) },
    /// A non-empty ballot with fewer than `k` candidates.
    ShortBallot { voter: usize, size: usize },
}

impl std::fmt::Display for PartyListViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PartyListViolation::Overlap { voters: (a, b) } => {
                write!(f, "ballots of voters {a} and {b} overlap but differ")
            }
            PartyListViolation::ShortBallot { voter, size } => {
                write!(f, "voter {voter} approves only {size} candidates")
            }
        }
    }
}

pub fn detect_party_list(inst: &Instance) -> std::result::Result<PartyStructure, PartyListViolation> {
    let mut parties: Vec<Party> = Vec::new();
    for (v, &a) in inst.approvals().iter().enumerate() {
        if a.is_empty() {
            continue;
        }
        if let Some(p) = parties.iter_mut().find(|p| p.candidates == a) {
            p.voters.push(v);
            continue;
        }
        if let Some(p) = parties.iter().find(|p| p.candidates.intersects(a)) {
            return Err(PartyListViolation::Overlap { voters: (p.voters[0], v) });
        }
        parties.push(Party { voters: vec![v], candidates: a });
    }
    if let Some(p) = parties.iter().find(|p| p.candidates.len() < inst.k()) {
        return Err(PartyListViolation::ShortBallot { voter: p.voters[0], size: p.candidates.len() });
    }
    Ok(PartyStructure { parties })
}

/// Seats go one at a time to the party maximizing `s_p/(w_p+1)`, lower index
/// on ties. `α*` is the largest `s_p·k/((w_p+1)·n)` over parties that could
/// still claim another seat.
pub fn party_list_optimal_ejr(inst: &Instance, structure: &PartyStructure) -> Result<OptimizationOutcome> {
    let (n, k) = (inst.n(), inst.k());
    let available: usize = structure.parties.iter().map(|p| p.candidates.len()).sum();
    if available < k {
        return Err(Error::Precondition(format!(
            "parties offer {available} candidates but {k} seats must be filled"
        )));
    }
    let mut seats = vec![0usize; structure.parties.len()];
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for (i, p) in structure.parties.iter().enumerate() {
            if seats[i] >= p.candidates.len() {
                continue;
            }
            // s_i/(w_i+1) > s_b/(w_b+1)
            let better = best.is_none_or(|b| {
                Rational::cmp_counts(p.size(), seats[i] + 1, structure.parties[b].size(), seats[b] + 1).is_gt()
            });
            if better {
                best = Some(i);
            }
        }
        let b = best.expect("enough candidates checked above");
        seats[b] += 1;
    }
    let mut committee = CandidateSet::default();
    let mut alpha_star = Rational::zero();
    for (p, &w) in structure.parties.iter().zip(&seats) {
        committee = committee.union(p.candidates.smallest(w));
        if w < k.min(p.candidates.len()) {
            alpha_star = alpha_star.max(Rational::ratio(p.size() * k, (w + 1) * n));
        }
    }
    Ok(OptimizationOutcome {
        axiom: Axiom::Ejr,
        alpha_star,
        committee: Committee::new(committee),
        method: Method::DomainSpecial,
        explored: k as u64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    /// Permutation of voters; every candidate's supporters are contiguous.
    Vi,
    /// Permutation of candidates; every ballot is contiguous.
    Ci,
}

impl std::fmt::Display for OrderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OrderKind::Vi => "vi",
            OrderKind::Ci => "ci",
        })
    }
}

fn is_permutation(order: &[usize], size: usize) -> bool {
    let mut seen = vec![false; size];
    order.len() == size
        && order.iter().all(|&x| x < size && !std::mem::replace(&mut seen[x], true))
}

/// Whether every set occupies consecutive positions of `order`.
fn sets_contiguous<'a>(order: &[usize], sets: impl IntoIterator<Item = &'a VoterSet>) -> bool {
    sets.into_iter().all(|s| {
        let positions: Vec<usize> =
            order.iter().enumerate().filter(|&(_, &x)| s.contains(x)).map(|(i, _)| i).collect();
        positions.windows(2).all(|w| w[1] == w[0] + 1)
    })
}

/// Ballots as bit sets over candidate indices.
fn ballot_sets(inst: &Instance) -> Vec<VoterSet> {
    inst.approvals()
        .iter()
        .map(|a| {
            let mut s = VoterSet::with_capacity(inst.m());
            a.iter().for_each(|c| s.insert(c));
            s
        })
        .collect()
}

fn supporter_sets(inst: &Instance) -> Vec<VoterSet> {
    (0..inst.m()).map(|c| inst.supporters(c).clone()).collect()
}

pub fn verify_order(inst: &Instance, order: &[usize], kind: OrderKind) -> bool {
    match kind {
        OrderKind::Vi => is_permutation(order, inst.n()) && sets_contiguous(order, &supporter_sets(inst)),
        OrderKind::Ci => is_permutation(order, inst.m()) && sets_contiguous(order, &ballot_sets(inst)),
    }
}

fn require_order(inst: &Instance, order: &[usize], kind: OrderKind) -> Result<()> {
    if verify_order(inst, order, kind) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("order is not a valid {kind} order for this instance")))
    }
}

pub fn recognize_vi(inst: &Instance) -> Option<Vec<usize>> {
    consecutive_ones_order(inst.n(), &supporter_sets(inst))
}

pub fn recognize_ci(inst: &Instance) -> Option<Vec<usize>> {
    consecutive_ones_order(inst.m(), &ballot_sets(inst))
}

fn overlaps(a: &VoterSet, b: &VoterSet) -> bool {
    let common = a.intersection_len(b);
    common > 0 && common < a.len() && common < b.len()
}

fn is_subset(a: &VoterSet, b: &VoterSet) -> bool {
    a.intersection_len(b) == a.len()
}

fn minus(a: &VoterSet, b: &VoterSet) -> VoterSet {
    let mut out = a.clone();
    out.difference_with(b);
    out
}

/// An ordered partition of the union of an overlap component.
struct Component {
    union: VoterSet,
    classes: Vec<VoterSet>,
    single: bool,
}

impl Component {
    fn new(first: &VoterSet) -> Self {
        Component { union: first.clone(), classes: vec![first.clone()], single: true }
    }

    /// Refines the partition so `s` becomes a run of classes. `s` must
    /// overlap a set already placed.
    fn insert(&mut self, s: &VoterSet) -> Option<()> {
        self.single = false;
        let fresh = minus(s, &self.union);
        let touched: Vec<usize> =
            (0..self.classes.len()).filter(|&x| self.classes[x].intersection_len(s) > 0).collect();
        let (&i, &j) = (touched.first()?, touched.last()?);
        if touched.len() != j - i + 1 || (i + 1..j).any(|x| !is_subset(&self.classes[x], s)) {
            return None;
        }
        let last = self.classes.len() - 1;
        let full = |x: usize| is_subset(&self.classes[x], s);
        if fresh.is_empty() {
            if i == j {
                return None;
            }
            self.split(j, s, true);
            self.split(i, s, false);
        } else if j == last && (i == j || full(j)) {
            self.split(i, s, false);
            self.classes.push(fresh.clone());
        } else if i == 0 && (i == j || full(i)) {
            self.split(j, s, true);
            self.classes.insert(0, fresh.clone());
        } else {
            return None;
        }
        self.union.union_with(&fresh);
        Some(())
    }

    /// Splits class `x` by `s`, with the part inside `s` first when
    /// `inside_first`.
    fn split(&mut self, x: usize, s: &VoterSet, inside_first: bool) {
        let inside = self.classes[x].intersection(s);
        let outside = minus(&self.classes[x], s);
        if outside.is_empty() {
            return;
        }
        let (a, b) = if inside_first { (inside, outside) } else { (outside, inside) };
        self.classes[x] = a;
        self.classes.insert(x + 1, b);
    }

    fn class_containing(&self, s: &VoterSet) -> Option<usize> {
        self.classes.iter().position(|c| is_subset(s, c))
    }
}

/// Finds an ordering of `0..ground` in which every set is contiguous.
///
/// Sets are split into components of the overlap graph. Each component has
/// an order unique up to reversal, built by partition refinement. Unions of
/// different components are nested or disjoint, and a nested union lies
/// inside one class of its parent, so the component orders compose.
pub fn consecutive_ones_order(ground: usize, sets: &[VoterSet]) -> Option<Vec<usize>> {
    let mut seen = HashSet::new();
    let sets: Vec<&VoterSet> = sets.iter().filter(|s| s.len() > 1 && seen.insert((*s).clone())).collect();

    let mut comps: Vec<Component> = Vec::new();
    let mut placed = vec![false; sets.len()];
    for start in 0..sets.len() {
        if placed[start] {
            continue;
        }
        placed[start] = true;
        let mut comp = Component::new(sets[start]);
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for b in 0..sets.len() {
                if !placed[b] && overlaps(sets[a], sets[b]) {
                    placed[b] = true;
                    comp.insert(sets[b])?;
                    queue.push_back(b);
                }
            }
        }
        comps.push(comp);
    }

    let mut sorted: Vec<usize> = (0..comps.len()).collect();
    sorted.sort_by_key(|&x| (std::cmp::Reverse(comps[x].union.len()), !comps[x].single));
    // children[parent][class] lists nested components
    let mut children: Vec<Vec<Vec<usize>>> = comps.iter().map(|c| vec![Vec::new(); c.classes.len()]).collect();
    let mut roots = Vec::new();
    for (pos, &b) in sorted.iter().enumerate() {
        let parent = sorted[..pos].iter().rev().find(|&&a| is_subset(&comps[b].union, &comps[a].union));
        match parent {
            Some(&a) => {
                let class = comps[a].class_containing(&comps[b].union)?;
                children[a][class].push(b);
            }
            None => roots.push(b),
        }
    }

    fn emit(x: usize, comps: &[Component], children: &[Vec<Vec<usize>>], out: &mut Vec<usize>, used: &mut [bool]) {
        for (class, kids) in comps[x].classes.iter().zip(&children[x]) {
            for &kid in kids {
                emit(kid, comps, children, out, used);
            }
            for e in class.iter() {
                if !used[e] {
                    used[e] = true;
                    out.push(e);
                }
            }
        }
    }

    let mut order = Vec::with_capacity(ground);
    let mut used = vec![false; ground];
    for &r in &roots {
        emit(r, &comps, &children, &mut order, &mut used);
    }
    order.extend((0..ground).filter(|&e| !used[e]));
    (is_permutation(&order, ground) && sets_contiguous(&order, sets.iter().copied())).then_some(order)
}

/// Group size at which α-JR is violated, `⌈α·n/k⌉`.
fn jr_threshold(inst: &Instance, alpha: &Rational) -> Result<usize> {
    Ok(optimize::uncovered_bound(inst, alpha)? + 1)
}

/// Alg. 1 for a voter-interval profile: sweeps voters in `order` and, when the
/// prefix contains an uncovered group of `threshold` voters sharing a
/// non-member, adds the candidate of the current voter whose supporters
/// reach furthest right.
pub fn vi_greedy_jr(inst: &Instance, order: &[usize], alpha: &Rational) -> Result<CandidateSet> {
    require_order(inst, order, OrderKind::Vi)?;
    Ok(vi_greedy_threshold(inst, order, jr_threshold(inst, alpha)?))
}

/// The additions made by [`vi_greedy_jr`] as `(position in order, candidate)`
/// pairs.
pub fn vi_greedy_trace(inst: &Instance, order: &[usize], alpha: &Rational) -> Result<Vec<(usize, usize)>> {
    require_order(inst, order, OrderKind::Vi)?;
    Ok(vi_greedy_steps(inst, order, jr_threshold(inst, alpha)?))
}

fn vi_greedy_threshold(inst: &Instance, order: &[usize], threshold: usize) -> CandidateSet {
    vi_greedy_steps(inst, order, threshold).into_iter().map(|(_, c)| c).collect()
}

fn vi_greedy_steps(inst: &Instance, order: &[usize], threshold: usize) -> Vec<(usize, usize)> {
    let mut position = vec![0; inst.n()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let right: Vec<usize> =
        (0..inst.m()).map(|c| inst.supporters(c).iter().map(|v| position[v]).max().unwrap_or(0)).collect();

    let mut w = CandidateSet::default();
    let mut steps = Vec::new();
    // uncovered prefix voters approving each candidate
    let mut count = vec![0usize; inst.m()];
    let mut pending: Vec<usize> = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        let a = inst.approval(v);
        if a.is_empty() || a.intersects(w) {
            continue;
        }
        pending.push(v);
        for c in a.iter() {
            count[c] += 1;
        }
        while a.iter().any(|c| count[c] >= threshold) {
            let pick = a
                .iter()
                .max_by(|&x, &y| right[x].cmp(&right[y]).then(y.cmp(&x)))
                .expect("ballot is non-empty");
            w.insert(pick);
            steps.push((i, pick));
            pending.retain(|&u| {
                let covered = inst.approval(u).contains(pick);
                if covered {
                    inst.approval(u).iter().for_each(|c| count[c] -= 1);
                }
                !covered
            });
        }
    }
    steps
}

/// Alg. 2 for a candidate-interval profile: starts from every candidate and
/// drops each one, in `order`, whose removal keeps α-JR.
pub fn ci_greedy_jr(inst: &Instance, order: &[usize], alpha: &Rational) -> Result<CandidateSet> {
    require_order(inst, order, OrderKind::Ci)?;
    Ok(ci_greedy_threshold(inst, order, jr_threshold(inst, alpha)?))
}

fn ci_greedy_threshold(inst: &Instance, order: &[usize], threshold: usize) -> CandidateSet {
    let mut w = inst.all_candidates();
    for &c in order {
        let (s, _) = verify::s_max_jr(inst, Committee::new(w.without(c)));
        if s < threshold {
            w.remove(c);
        }
    }
    w
}

/// Binary search over the JR grid with `greedy(threshold)` as the
/// feasibility test, then pads the committee from `padding`.
fn grid_search(
    inst: &Instance,
    greedy: impl Fn(usize) -> CandidateSet,
    padding: impl Iterator<Item = usize>,
) -> Result<OptimizationOutcome> {
    let (n, k) = (inst.n(), inst.k());
    let top = n.div_ceil(k) - 1;
    let mut explored = 0u64;
    let mut run = |bound: usize| {
        explored += 1;
        Some(greedy(bound + 1)).filter(|w| w.len() <= k)
    };
    let mut best = run(top)
        .ok_or_else(|| Error::Invariant(format!("greedy needs more than {k} candidates at threshold {}", top + 1)))?;
    let (mut lo, mut hi) = (0usize, top);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match run(mid) {
            Some(w) => {
                hi = mid;
                best = w;
            }
            None => lo = mid + 1,
        }
    }
    for c in padding {
        if best.len() == k {
            break;
        }
        best.insert(c);
    }
    Ok(OptimizationOutcome {
        axiom: Axiom::Jr,
        alpha_star: Rational::ratio(hi * k, n),
        committee: Committee::new(best),
        method: Method::DomainSpecial,
        explored,
    })
}

/// Smallest α_JR over committees of a voter-interval profile.
pub fn vi_optimal_alpha_jr(inst: &Instance, order: &[usize]) -> Result<OptimizationOutcome> {
    require_order(inst, order, OrderKind::Vi)?;
    grid_search(inst, |t| vi_greedy_threshold(inst, order, t), 0..inst.m())
}

/// Smallest α_JR over committees of a candidate-interval profile; pads in
/// the candidate order.
pub fn ci_optimal_alpha_jr(inst: &Instance, order: &[usize]) -> Result<OptimizationOutcome> {
    require_order(inst, order, OrderKind::Ci)?;
    grid_search(inst, |t| ci_greedy_threshold(inst, order, t), order.iter().copied())
}

/// Running best `(count, level)` with its witness, compared exactly.
struct Best {
    count: usize,
    level: usize,
    witness: Option<(Vec<usize>, Vec<usize>)>,
}

impl Best {
    fn new() -> Self {
        Best { count: 0, level: 1, witness: None }
    }

    fn improves(&self, count: usize, level: usize) -> bool {
        count > 0 && Rational::cmp_counts(count, level, self.count, self.level).is_gt()
    }

    fn finish(self, inst: &Instance) -> AxiomResult {
        let witness = self.witness.map(|(voters, candidates)| Violation::new(inst, voters, candidates, self.level));
        let alpha = witness.as_ref().map_or_else(Rational::zero, |v| v.alpha.clone());
        AxiomResult { axiom: Axiom::Ejr, alpha, witness }
    }
}

/// α_EJR of `w` on a voter-interval profile by scanning voter intervals.
pub fn vi_alpha_ejr(inst: &Instance, order: &[usize], w: Committee) -> Result<AxiomResult> {
    require_order(inst, order, OrderKind::Vi)?;
    let k = inst.k();
    let sat = inst.satisfaction(w.members());
    let mut best = Best::new();
    for i in 0..order.len() {
        let mut common = inst.all_candidates();
        // deficient[l] = voters in the interval with satisfaction below l
        let mut deficient = vec![0usize; k + 1];
        for j in i..order.len() {
            let v = order[j];
            common = common.intersection(inst.approval(v));
            if common.is_empty() {
                break;
            }
            for d in &mut deficient[(sat[v] + 1).min(k + 1)..] {
                *d += 1;
            }
            for (level, &count) in deficient.iter().enumerate().take(k.min(common.len()) + 1).skip(1) {
                if best.improves(count, level) {
                    let voters = order[i..=j].iter().copied().filter(|&u| sat[u] < level).collect();
                    best = Best { count, level, witness: Some((voters, common.to_vec())) };
                }
            }
        }
    }
    Ok(best.finish(inst))
}

/// α_EJR of `w` on a candidate-interval profile by scanning candidate
/// intervals.
pub fn ci_alpha_ejr(inst: &Instance, order: &[usize], w: Committee) -> Result<AxiomResult> {
    require_order(inst, order, OrderKind::Ci)?;
    let k = inst.k();
    let sat = inst.satisfaction(w.members());
    let mut best = Best::new();
    for i in 0..order.len() {
        let mut block = CandidateSet::default();
        for (j, &c) in order.iter().enumerate().take(i + k).skip(i) {
            block.insert(c);
            let level = j - i + 1;
            let voters: Vec<usize> = (0..inst.n())
                .filter(|&v| sat[v] < level && block.is_subset(inst.approval(v)))
                .collect();
            if best.improves(voters.len(), level) {
                best = Best { count: voters.len(), level, witness: Some((voters, block.to_vec())) };
            }
        }
    }
    Ok(best.finish(inst))
}

/// α*_EJR by committee enumeration, evaluating each committee with the
/// interval scan for `kind`.
pub fn interval_optimal_alpha_ejr(
    inst: &Instance,
    order: &[usize],
    kind: OrderKind,
    budget: u128,
) -> Result<OptimizationOutcome> {
    require_order(inst, order, kind)?;
    optimize::enumerate_min(inst, Axiom::Ejr, budget, |w, _| {
        Ok(match kind {
            OrderKind::Vi => vi_alpha_ejr(inst, order, w)?.alpha,
            OrderKind::Ci => ci_alpha_ejr(inst, order, w)?.alpha,
        })
    })
}

/// Every structure detected in a profile.
#[derive(Clone, Debug, Serialize)]
pub struct DomainReport {
    pub party_list: std::result::Result<PartyStructure, PartyListViolation>,
    pub voter_interval: Option<Vec<usize>>,
    pub candidate_interval: Option<Vec<usize>>,
}

pub fn detect(inst: &Instance) -> DomainReport {
    DomainReport {
        party_list: detect_party_list(inst),
        voter_interval: recognize_vi(inst),
        candidate_interval: recognize_ci(inst),
    }
}
