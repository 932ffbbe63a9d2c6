//! Brute-force oracles and generators shared by the integration tests.
#![allow(dead_code)]

use alphaquota::{CandidateSet, Committee, Instance, Rational};
use proptest::prelude::*;

/// α_EJR by enumerating every voter group `S`.
pub fn brute_alpha_ejr(inst: &Instance, w: Committee) -> Rational {
    let (n, k) = (inst.n(), inst.k());
    assert!(n <= 16, "oracle enumerates 2^n groups");
    let sat = inst.satisfaction(w.members());
    let mut best = Rational::zero();
    for mask in 1u32..(1 << n) {
        let group: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        let common = group.iter().fold(inst.all_candidates(), |acc, &v| acc.intersection(inst.approval(v)));
        let worst = group.iter().map(|&v| sat[v]).max().unwrap();
        for level in (worst + 1)..=k.min(common.len()) {
            best = best.max(Rational::ratio(group.len() * k, level * n));
        }
    }
    best
}

/// α_JR by enumerating every non-member and counting its uncovered
/// supporters directly from the ballots.
pub fn brute_alpha_jr(inst: &Instance, w: Committee) -> Rational {
    let s = (0..inst.m())
        .filter(|&c| !w.contains(c))
        .map(|c| {
            (0..inst.n())
                .filter(|&v| inst.approval(v).contains(c) && !inst.approval(v).intersects(w.members()))
                .count()
        })
        .max()
        .unwrap_or(0);
    Rational::ratio(s * inst.k(), inst.n())
}

/// α*_JR by enumerating every committee of size k.
pub fn brute_optimal_jr(inst: &Instance) -> Rational {
    committees(inst).map(|w| brute_alpha_jr(inst, w)).min().unwrap()
}

/// α*_EJR by enumerating every committee of size k with the group oracle.
pub fn brute_optimal_ejr(inst: &Instance) -> Rational {
    committees(inst).map(|w| brute_alpha_ejr(inst, w)).min().unwrap()
}

pub fn committees(inst: &Instance) -> impl Iterator<Item = Committee> + '_ {
    let (m, k) = (inst.m(), inst.k());
    (0u32..(1 << m)).filter(move |x| x.count_ones() as usize == k).map(|x| {
        Committee::new(CandidateSet::from_bits(x as u128))
    })
}

/// Size of the smallest candidate set (any size) leaving no uncovered group
/// of `threshold` voters behind a non-member.
pub fn min_jr_set_size(inst: &Instance, threshold: usize) -> usize {
    (0u32..(1 << inst.m()))
        .filter(|&x| {
            let w = CandidateSet::from_bits(x as u128);
            (0..inst.m()).filter(|&c| !w.contains(c)).all(|c| {
                (0..inst.n())
                    .filter(|&v| inst.approval(v).contains(c) && !inst.approval(v).intersects(w))
                    .count()
                    < threshold
            })
        })
        .map(|x| x.count_ones() as usize)
        .min()
        .unwrap()
}

/// Heap's algorithm over all permutations of `0..size`.
pub fn permutations(size: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k.is_multiple_of(2) { a.swap(i, k - 1) } else { a.swap(0, k - 1) }
            heap(k - 1, a, out);
        }
    }
    let mut out = Vec::new();
    heap(size, &mut (0..size).collect(), &mut out);
    out
}

/// Whether `members` occupy consecutive positions of `order`.
pub fn contiguous(order: &[usize], members: impl Fn(usize) -> bool) -> bool {
    let pos: Vec<usize> = order.iter().enumerate().filter(|(_, &x)| members(x)).map(|(i, _)| i).collect();
    pos.windows(2).all(|w| w[1] == w[0] + 1)
}

pub fn instance_from(m: usize, k: usize, ballots: Vec<Vec<usize>>) -> Instance {
    Instance::new(m, k, ballots).expect("generated instance is valid")
}

/// Arbitrary small profile.
pub fn arb_instance(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 2..=max_m).prop_flat_map(|(n, m)| {
        (1..=m, prop::collection::vec(prop::collection::btree_set(0..m, 0..=m), n))
            .prop_map(move |(k, ballots)| instance_from(m, k, ballots.into_iter().map(|b| b.into_iter().collect()).collect()))
    })
}

/// Voter-interval profile: each candidate is supported by a random interval
/// of a hidden voter permutation.
pub fn arb_vi_instance(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 2..=max_m).prop_flat_map(|(n, m)| {
        (
            1..=m,
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            prop::collection::vec((0..=n, 0..=n), m),
        )
            .prop_map(move |(k, perm, spans)| {
                let mut ballots = vec![Vec::new(); n];
                for (c, (a, b)) in spans.into_iter().enumerate() {
                    let (lo, hi) = (a.min(b), a.max(b));
                    for &v in &perm[lo..hi] {
                        ballots[v].push(c);
                    }
                }
                instance_from(m, k, ballots)
            })
    })
}

/// Candidate-interval profile: each ballot is a random interval of a hidden
/// candidate permutation.
pub fn arb_ci_instance(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 2..=max_m).prop_flat_map(|(n, m)| {
        (
            1..=m,
            Just((0..m).collect::<Vec<usize>>()).prop_shuffle(),
            prop::collection::vec((0..=m, 0..=m), n),
        )
            .prop_map(move |(k, perm, spans)| {
                let ballots = spans
                    .into_iter()
                    .map(|(a, b)| {
                        let mut ballot = perm[a.min(b)..a.max(b)].to_vec();
                        ballot.sort_unstable();
                        ballot
                    })
                    .collect();
                instance_from(m, k, ballots)
            })
    })
}

/// Party-list profile: parties own disjoint blocks of at least `k`
/// candidates; some voters abstain.
pub fn arb_party_instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=4usize, 1..=3usize).prop_flat_map(move |(parties, k)| {
        (
            prop::collection::vec(k..=k + 1, parties),
            prop::collection::vec(0..=parties, 1..=max_n),
        )
            .prop_map(move |(widths, votes)| {
                let mut starts = vec![0];
                for w in &widths {
                    starts.push(starts.last().unwrap() + w);
                }
                let m = *starts.last().unwrap();
                let ballots = votes
                    .into_iter()
                    .map(|p| if p == parties { Vec::new() } else { (starts[p]..starts[p + 1]).collect() })
                    .collect();
                instance_from(m, k, ballots)
            })
    })
}
