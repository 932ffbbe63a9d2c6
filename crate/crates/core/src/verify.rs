//! α-values of a fixed committee for JR, EJR and EJR+.
//!
//! All functions accept committees of any size; the α-value semantics assume
//! `|W| = k`, which callers validate at the boundary.

use std::collections::HashMap;

use serde::Serialize;

use crate::bitset::{binomial, CandidateSet, VoterSet};
use crate::error::{Error, Result};
use crate::instance::{Axiom, Committee, Instance, Violation};
use crate::rational::Rational;

/// Default cap on the number of `ℓ`-subsets `s_max_ejr` may enumerate.
pub const DEFAULT_EJR_BUDGET: u128 = 10_000_000;

/// Default cap on the size of the intersection family built by
/// [`EjrEvaluator`].
pub const DEFAULT_FAMILY_BUDGET: usize = 1 << 18;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomResult {
    pub axiom: Axiom,
    pub alpha: Rational,
    pub witness: Option<Violation>,
}

impl AxiomResult {
    fn zero(axiom: Axiom) -> Self {
        AxiomResult { axiom, alpha: Rational::zero(), witness: None }
    }

    fn from_witness(axiom: Axiom, witness: Violation) -> Self {
        AxiomResult { axiom, alpha: witness.alpha.clone(), witness: Some(witness) }
    }
}

/// Voters approving no member of `w`.
pub fn uncovered(inst: &Instance, w: CandidateSet) -> VoterSet {
    let mut out = VoterSet::with_capacity(inst.n());
    for (v, a) in inst.approvals().iter().enumerate() {
        if !a.intersects(w) {
            out.insert(v);
        }
    }
    out
}

/// Largest number of uncovered voters sharing one non-member, with the
/// smallest such candidate.
pub fn s_max_jr(inst: &Instance, w: Committee) -> (usize, Option<usize>) {
    let free = uncovered(inst, w.members());
    let mut best = (0, None);
    for c in inst.all_candidates().difference(w.members()).iter() {
        let count = inst.supporters(c).intersection_len(&free);
        if count > best.0 {
            best = (count, Some(c));
        }
    }
    best
}

pub fn alpha_jr(inst: &Instance, w: Committee) -> AxiomResult {
    match s_max_jr(inst, w) {
        (_, None) => AxiomResult::zero(Axiom::Jr),
        (_, Some(c)) => {
            let mut group = uncovered(inst, w.members());
            group = group.intersection(inst.supporters(c));
            let witness = Violation::new(inst, group.to_vec(), vec![c], 1);
            AxiomResult::from_witness(Axiom::Jr, witness)
        }
    }
}

/// `|A_v ∩ W| < level`, per voter.
fn deficient(inst: &Instance, w: CandidateSet, level: usize) -> impl Iterator<Item = usize> + '_ {
    inst.approvals()
        .iter()
        .enumerate()
        .filter(move |(_, a)| a.intersection_len(w) < level)
        .map(|(v, _)| v)
}

/// Largest group of voters with fewer than `level` committee members that
/// jointly approve some `level`-subset `T`, together with the
/// lexicographically smallest such `T`.
pub fn s_max_ejr(
    inst: &Instance,
    w: Committee,
    level: usize,
    budget: u128,
) -> Result<(usize, Option<CandidateSet>)> {
    if level == 0 || level > inst.k() {
        return Err(Error::Precondition(format!(
            "level {level} outside 1..={}",
            inst.k()
        )));
    }
    let mut ballots: HashMap<CandidateSet, usize> = HashMap::new();
    for v in deficient(inst, w.members(), level) {
        let a = inst.approval(v);
        if a.len() >= level {
            *ballots.entry(a).or_default() += 1;
        }
    }
    if ballots.is_empty() {
        return Ok((0, None));
    }
    let from_ballots: u128 = ballots
        .keys()
        .map(|a| binomial(a.len(), level))
        .fold(0u128, |acc, x| acc.saturating_add(x));
    let pool = ballots.keys().fold(CandidateSet::EMPTY, |acc, &a| acc.union(a));
    let from_pool = binomial(pool.len(), level);
    let needed = from_ballots.min(from_pool);
    if needed > budget {
        return Err(Error::InfeasibleScale { what: "EJR subset enumeration", needed, budget });
    }

    let mut counts: HashMap<CandidateSet, usize> = HashMap::new();
    if from_ballots <= from_pool {
        for (&a, &mult) in &ballots {
            for t in a.subsets_of_size(level) {
                *counts.entry(t).or_default() += mult;
            }
        }
    } else {
        for t in pool.subsets_of_size(level) {
            let count: usize = ballots
                .iter()
                .filter(|(a, _)| t.is_subset(**a))
                .map(|(_, &mult)| mult)
                .sum();
            if count > 0 {
                counts.insert(t, count);
            }
        }
    }
    let best = counts
        .into_iter()
        .max_by(|(t1, c1), (t2, c2)| c1.cmp(c2).then_with(|| t2.lex_cmp(*t1)))
        .expect("at least one deficient ballot");
    Ok((best.1, Some(best.0)))
}

pub fn alpha_ejr(inst: &Instance, w: Committee) -> Result<AxiomResult> {
    alpha_ejr_with_budget(inst, w, DEFAULT_EJR_BUDGET)
}

pub fn alpha_ejr_with_budget(inst: &Instance, w: Committee, budget: u128) -> Result<AxiomResult> {
    let mut best: Option<(usize, usize, CandidateSet)> = None;
    for level in 1..=inst.k() {
        if let (count, Some(t)) = s_max_ejr(inst, w, level, budget)? {
            let better = match &best {
                None => true,
                Some((c, l, _)) => Rational::cmp_counts(count, level, *c, *l).is_gt(),
            };
            if better {
                best = Some((count, level, t));
            }
        }
    }
    Ok(match best {
        None => AxiomResult::zero(Axiom::Ejr),
        Some((_, level, t)) => {
            let voters: Vec<usize> = deficient(inst, w.members(), level)
                .filter(|&v| t.is_subset(inst.approval(v)))
                .collect();
            AxiomResult::from_witness(Axiom::Ejr, Violation::new(inst, voters, t.to_vec(), level))
        }
    })
}

/// Scans every non-member `c` and level `ℓ`, counting supporters of `c`
/// with fewer than `ℓ` committee members.
pub fn alpha_ejr_plus(inst: &Instance, w: Committee) -> AxiomResult {
    let k = inst.k();
    let sat: Vec<usize> = inst.satisfaction(w.members()).into_iter().map(|s| s.min(k)).collect();
    let mut best: Option<(usize, usize, usize)> = None;
    let mut hist = vec![0usize; k + 1];
    for c in inst.all_candidates().difference(w.members()).iter() {
        hist.iter_mut().for_each(|h| *h = 0);
        for v in inst.supporters(c).iter() {
            hist[sat[v]] += 1;
        }
        let mut count = 0;
        for level in 1..=k {
            count += hist[level - 1];
            if count == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bc, bl, _)) => Rational::cmp_counts(count, level, bc, bl).is_gt(),
            };
            if better {
                best = Some((count, level, c));
            }
        }
    }
    match best {
        None => AxiomResult::zero(Axiom::EjrPlus),
        Some((_, level, c)) => {
            let voters: Vec<usize> = inst.supporters(c).iter().filter(|&v| sat[v] < level).collect();
            AxiomResult::from_witness(Axiom::EjrPlus, Violation::new(inst, voters, vec![c], level))
        }
    }
}

pub fn alpha_value(inst: &Instance, w: Committee, axiom: Axiom) -> Result<AxiomResult> {
    match axiom {
        Axiom::Jr => Ok(alpha_jr(inst, w)),
        Axiom::Ejr => alpha_ejr(inst, w),
        Axiom::EjrPlus => Ok(alpha_ejr_plus(inst, w)),
    }
}

/// Whether `w` satisfies α-`axiom`, i.e. `alpha > α_axiom(w)`. Always false
/// at `alpha = 0`.
pub fn satisfies(inst: &Instance, w: Committee, alpha: &Rational, axiom: Axiom) -> Result<bool> {
    Ok(*alpha > alpha_value(inst, w, axiom)?.alpha)
}

struct FamilyEntry {
    size: usize,
    voters: VoterSet,
    support: usize,
}

/// Fast repeated evaluation of `α_EJR` on one instance.
///
/// Any violating group `S` can be widened to all deficient voters approving
/// `∩_{v∈S} A_v`, so it suffices to scan the family of nonempty
/// intersections of ballots. The family is built once and sorted by support
/// so that a scan can stop as soon as no remaining set can beat the best
/// ratio found.
pub struct EjrEvaluator<'a> {
    inst: &'a Instance,
    family: Vec<FamilyEntry>,
}

impl<'a> EjrEvaluator<'a> {
    pub fn new(inst: &'a Instance) -> Result<Self> {
        Self::with_budget(inst, DEFAULT_FAMILY_BUDGET)
    }

    pub fn with_budget(inst: &'a Instance, budget: usize) -> Result<Self> {
        let mut ballots: Vec<CandidateSet> =
            inst.approvals().iter().copied().filter(|a| !a.is_empty()).collect();
        ballots.sort();
        ballots.dedup();
        let mut seen: std::collections::HashSet<CandidateSet> = ballots.iter().copied().collect();
        let mut sets = ballots.clone();
        let mut next = 0;
        while next < sets.len() {
            let t = sets[next];
            next += 1;
            for &b in &ballots {
                let x = t.intersection(b);
                if !x.is_empty() && seen.insert(x) {
                    sets.push(x);
                    if sets.len() > budget {
                        return Err(Error::InfeasibleScale {
                            what: "ballot intersection family",
                            needed: sets.len() as u128,
                            budget: budget as u128,
                        });
                    }
                }
            }
        }
        let mut family: Vec<(CandidateSet, FamilyEntry)> = sets
            .into_iter()
            .map(|t| {
                let mut voters = VoterSet::with_capacity(inst.n());
                for (v, a) in inst.approvals().iter().enumerate() {
                    if t.is_subset(*a) {
                        voters.insert(v);
                    }
                }
                let support = voters.len();
                (t, FamilyEntry { size: t.len(), voters, support })
            })
            .collect();
        family.sort_by(|(t1, e1), (t2, e2)| e2.support.cmp(&e1.support).then_with(|| t1.lex_cmp(*t2)));
        Ok(EjrEvaluator { inst, family: family.into_iter().map(|(_, e)| e).collect() })
    }

    pub fn family_len(&self) -> usize {
        self.family.len()
    }

    /// `α_EJR(w)`.
    pub fn alpha(&self, w: Committee) -> Rational {
        let (count, level) = self.evaluate(w, None);
        Rational::ratio(count * self.inst.k(), level * self.inst.n())
    }

    /// Returns `(count, level)` with `α_EJR(w) = count·k/(level·n)`.
    ///
    /// With an incumbent `(c, l)`, the scan stops once the value reaches
    /// `c/l`; the returned pair is then only a lower bound, but one that is
    /// already at least the incumbent.
    pub fn evaluate(&self, w: Committee, incumbent: Option<(usize, usize)>) -> (usize, usize) {
        let k = self.inst.k();
        let n = self.inst.n();
        let sat = self.inst.satisfaction(w.members());
        // deficient[l] = voters with fewer than l members, for l in 1..=k
        let mut deficient = vec![VoterSet::with_capacity(n); k + 1];
        for (v, &s) in sat.iter().enumerate() {
            for d in deficient.iter_mut().take(k + 1).skip(s + 1) {
                d.insert(v);
            }
        }
        let mut best = (0usize, 1usize);
        for entry in &self.family {
            // |N_T ∩ D_l| / l <= support for every l
            if entry.support * best.1 <= best.0 {
                break;
            }
            for (level, d) in deficient.iter().enumerate().take(entry.size.min(k) + 1).skip(1) {
                if entry.support * best.1 <= best.0 * level {
                    break;
                }
                let count = entry.voters.intersection_len(d);
                if Rational::cmp_counts(count, level, best.0, best.1).is_gt() {
                    best = (count, level);
                }
            }
            if let Some((c, l)) = incumbent {
                if Rational::cmp_counts(best.0, best.1, c, l).is_ge() {
                    return best;
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn committee(s: &str) -> Committee {
        s.parse().unwrap()
    }

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn jr_on_bridged_pair() {
        let inst = fixtures::bridged_pair();
        assert_eq!(s_max_jr(&inst, committee("2,3")), (4, Some(0)));
        assert_eq!(s_max_jr(&inst, committee("0,1")), (0, None));
        let res = alpha_jr(&inst, committee("2,3"));
        assert_eq!(res.alpha, r("4/5"));
        let witness = res.witness.unwrap();
        assert_eq!(witness.voters, vec![0, 1, 2, 3]);
        assert_eq!(witness.candidates, vec![0]);
        assert!(witness.is_valid_for(&inst, committee("2,3"), Axiom::Jr));
        assert!(alpha_jr(&inst, committee("0,1")).alpha.is_zero());
        assert!(alpha_jr(&inst, committee("0,1")).witness.is_none());
    }

    #[test]
    fn satisfaction_is_strict() {
        let inst = fixtures::bridged_pair();
        let w = committee("2,3");
        assert!(satisfies(&inst, w, &Rational::one(), Axiom::Jr).unwrap());
        assert!(!satisfies(&inst, w, &r("4/5"), Axiom::Jr).unwrap());
        for axiom in [Axiom::Jr, Axiom::Ejr, Axiom::EjrPlus] {
            assert!(!satisfies(&inst, committee("0,1"), &Rational::zero(), axiom).unwrap());
        }
        assert!(satisfies(&inst, committee("0,1"), &r("1/1000"), Axiom::Jr).unwrap());
    }

    #[test]
    fn jr_on_three_blocks() {
        let inst = fixtures::three_blocks();
        assert_eq!(s_max_jr(&inst, committee("0,1,2")), (3, Some(3)));
        assert_eq!(alpha_jr(&inst, committee("0,1,2")).alpha, r("3/4"));
    }

    #[test]
    fn jr_on_block_grid() {
        let inst = fixtures::block_grid(2);
        assert_eq!(alpha_jr(&inst, committee("0,1")).alpha, r("2/3"));
        assert_eq!(alpha_jr(&inst, committee("3,4")).alpha, r("2/9"));
    }

    #[test]
    fn ejr_levels_on_gap_fixture() {
        let inst = fixtures::jr_ejr_gap(2, 2);
        let t01: CandidateSet = [0, 1].into_iter().collect();
        assert_eq!(s_max_ejr(&inst, committee("0,2"), 2, DEFAULT_EJR_BUDGET).unwrap(), (4, Some(t01)));
        assert_eq!(
            s_max_ejr(&inst, committee("0,1"), 1, DEFAULT_EJR_BUDGET).unwrap(),
            (2, Some(CandidateSet::singleton(2)))
        );
        let res = alpha_ejr(&inst, committee("0,2")).unwrap();
        assert_eq!(res.alpha, r("2/3"));
        let witness = res.witness.unwrap();
        assert_eq!((witness.level, witness.voters.len()), (2, 4));
        assert!(witness.is_valid_for(&inst, committee("0,2"), Axiom::Ejr));
        let res = alpha_ejr(&inst, committee("0,1")).unwrap();
        assert_eq!(res.alpha, r("2/3"));
        assert_eq!(res.witness.unwrap().level, 1);
    }

    #[test]
    fn ejr_zero_when_everyone_saturated() {
        let inst = Instance::new(4, 2, vec![vec![0, 1, 2], vec![0, 1], vec![3], vec![]]).unwrap();
        let inst2 = Instance::new(3, 2, vec![vec![0, 1, 2], vec![0, 1], vec![]]).unwrap();
        assert!(alpha_ejr(&inst2, committee("0,1")).unwrap().alpha.is_zero());
        assert!(alpha_ejr(&inst, committee("0,1")).unwrap().alpha.is_positive());
    }

    #[test]
    fn ejr_level_one_matches_jr() {
        let inst = fixtures::three_blocks();
        let w = committee("0,3,5");
        let (jr, _) = s_max_jr(&inst, w);
        let (ejr, _) = s_max_ejr(&inst, w, 1, DEFAULT_EJR_BUDGET).unwrap();
        assert_eq!(jr, ejr);
    }

    #[test]
    fn ejr_budget_is_enforced() {
        let inst = Instance::new(20, 10, vec![(0..20).collect(); 3]).unwrap();
        let w = Committee::from_indices(&[0]);
        let err = s_max_ejr(&inst, w, 10, 1000).unwrap_err();
        assert!(matches!(err, Error::InfeasibleScale { needed: 184756, budget: 1000, .. }), "{err}");
        assert!(s_max_ejr(&inst, w, 0, 1000).is_err());
    }

    #[test]
    fn ejr_plus_examples() {
        let inst = fixtures::jr_ejr_gap(2, 2);
        let res = alpha_ejr_plus(&inst, committee("0,2"));
        assert_eq!(res.alpha, r("2/3"));
        assert_eq!(res.witness.as_ref().unwrap().candidates, vec![1]);
        assert!(res.witness.unwrap().is_valid_for(&inst, committee("0,2"), Axiom::EjrPlus));

        let inst = fixtures::bridged_pair();
        let res = alpha_ejr_plus(&inst, committee("0,1"));
        assert_eq!(res.alpha, r("1/5"));
        assert_eq!(res.witness.unwrap().voters, vec![4, 5]);

        let inst = Instance::new(3, 3, vec![vec![0, 1], vec![2], vec![]]).unwrap();
        assert!(alpha_ejr_plus(&inst, committee("0,1,2")).alpha.is_zero());
    }

    #[test]
    fn evaluator_matches_direct_computation() {
        for inst in [
            fixtures::bridged_pair(),
            fixtures::three_blocks(),
            fixtures::jr_ejr_gap(2, 2),
            fixtures::jr_ejr_gap(3, 1),
            fixtures::block_grid(2),
            fixtures::voter_interval_chain(),
        ] {
            let eval = EjrEvaluator::new(&inst).unwrap();
            for w in inst.all_candidates().subsets_of_size(inst.k()) {
                let w = Committee::new(w);
                assert_eq!(eval.alpha(w), alpha_ejr(&inst, w).unwrap().alpha, "{inst:?} {w}");
            }
        }
    }

    #[test]
    fn evaluator_abort_reaches_incumbent() {
        let inst = fixtures::jr_ejr_gap(2, 2);
        let eval = EjrEvaluator::new(&inst).unwrap();
        let (c, l) = eval.evaluate(committee("0,2"), Some((1, 1)));
        assert!(Rational::cmp_counts(c, l, 1, 1).is_ge());
    }
}
