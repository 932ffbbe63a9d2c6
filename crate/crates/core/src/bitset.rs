//! Bit sets over candidates and voters.

use std::fmt;

/// Maximum number of candidates an [`Instance`](crate::Instance) may have.
pub const MAX_CANDIDATES: usize = 128;

/// A set of candidate indices stored as a single 128-bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateSet(u128);

impl CandidateSet {
    pub const EMPTY: CandidateSet = CandidateSet(0);

    pub fn from_bits(bits: u128) -> Self {
        CandidateSet(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    /// `{0, 1, ..., m-1}`.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_CANDIDATES);
        if m == MAX_CANDIDATES {
            CandidateSet(u128::MAX)
        } else {
            CandidateSet((1u128 << m) - 1)
        }
    }

    pub fn singleton(c: usize) -> Self {
        CandidateSet(1u128 << c)
    }

    pub fn contains(self, c: usize) -> bool {
        c < MAX_CANDIDATES && self.0 >> c & 1 == 1
    }

    pub fn insert(&mut self, c: usize) {
        self.0 |= 1u128 << c;
    }

    pub fn remove(&mut self, c: usize) {
        self.0 &= !(1u128 << c);
    }

    pub fn with(self, c: usize) -> Self {
        CandidateSet(self.0 | 1u128 << c)
    }

    pub fn without(self, c: usize) -> Self {
        CandidateSet(self.0 & !(1u128 << c))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersection(self, other: Self) -> Self {
        CandidateSet(self.0 & other.0)
    }

    pub fn union(self, other: Self) -> Self {
        CandidateSet(self.0 | other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        CandidateSet(self.0 & !other.0)
    }

    pub fn intersection_len(self, other: Self) -> usize {
        (self.0 & other.0).count_ones() as usize
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    /// Smallest member.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Largest member.
    pub fn last(self) -> Option<usize> {
        (self.0 != 0).then(|| 127 - self.0.leading_zeros() as usize)
    }

    /// Members in increasing order.
    pub fn iter(self) -> CandidateIter {
        CandidateIter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// The `count` smallest members.
    pub fn smallest(self, count: usize) -> CandidateSet {
        self.iter().take(count).collect()
    }

    /// Lexicographic comparison of the sorted member lists.
    pub fn lex_cmp(self, other: Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }

    /// All subsets of exactly `size` members, in lexicographic order of their
    /// sorted member lists.
    pub fn subsets_of_size(self, size: usize) -> Combinations {
        Combinations::new(self.to_vec(), size)
    }
}

/// `C(n, r)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) / (i + 1) stays integral at every step
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// Lexicographic `r`-combinations of a fixed member list.
pub struct Combinations {
    pool: Vec<usize>,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(pool: Vec<usize>, r: usize) -> Self {
        let done = r > pool.len();
        Combinations { pool, idx: (0..r).collect(), done }
    }
}

impl Iterator for Combinations {
    type Item = CandidateSet;

    fn next(&mut self) -> Option<CandidateSet> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| self.pool[i]).collect();
        let (n, r) = (self.pool.len(), self.idx.len());
        match (0..r).rev().find(|&i| self.idx[i] < n - r + i) {
            Some(i) => {
                self.idx[i] += 1;
                for j in i + 1..r {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
            }
            None => self.done = true,
        }
        Some(out)
    }
}

impl FromIterator<usize> for CandidateSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = CandidateSet::EMPTY;
        for c in iter {
            set.insert(c);
        }
        set
    }
}

/// Serialized as the sorted list of member indices.
impl serde::Serialize for CandidateSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct CandidateIter(u128);

impl Iterator for CandidateIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let c = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(c)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for CandidateIter {}

/// A growable bit set over voter indices.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct VoterSet {
    words: Vec<u64>,
}

impl VoterSet {
    /// An empty set able to hold voters `0..n`.
    pub fn with_capacity(n: usize) -> Self {
        VoterSet { words: vec![0; n.div_ceil(64)] }
    }

    /// `{0, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        let mut s = VoterSet::with_capacity(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn insert(&mut self, v: usize) {
        let w = v / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1u64 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        if let Some(word) = self.words.get_mut(v / 64) {
            *word &= !(1u64 << (v % 64));
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.words.get(v / 64).is_some_and(|w| w >> (v % 64) & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    /// `|self ∩ other|` without materializing the intersection.
    pub fn intersection_len(&self, other: &VoterSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self ∩ a ∩ b|`.
    pub fn intersection3_len(&self, a: &VoterSet, b: &VoterSet) -> usize {
        self.words
            .iter()
            .zip(&a.words)
            .zip(&b.words)
            .map(|((x, y), z)| (x & y & z).count_ones() as usize)
            .sum()
    }

    pub fn intersection(&self, other: &VoterSet) -> VoterSet {
        VoterSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn union_with(&mut self, other: &VoterSet) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &VoterSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for VoterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_set_basics() {
        let s: CandidateSet = [3, 0, 7].into_iter().collect();
        assert_eq!(s.to_vec(), vec![0, 3, 7]);
        assert_eq!(s.len(), 3);
        assert_eq!(s.first(), Some(0));
        assert_eq!(s.last(), Some(7));
        assert!(s.contains(3) && !s.contains(4));
        assert_eq!(s.smallest(2).to_vec(), vec![0, 3]);
        assert_eq!(CandidateSet::full(4).to_vec(), vec![0, 1, 2, 3]);
        assert_eq!(CandidateSet::full(128).len(), 128);
        let t: CandidateSet = [0, 4].into_iter().collect();
        assert_eq!(s.lex_cmp(t), std::cmp::Ordering::Less);
        assert_eq!(s.intersection_len(t), 1);
    }

    #[test]
    fn combinations_are_lexicographic_and_complete() {
        let pool: CandidateSet = [1, 3, 4, 6, 9].into_iter().collect();
        for r in 0..=6 {
            let all: Vec<CandidateSet> = pool.subsets_of_size(r).collect();
            assert_eq!(all.len() as u128, binomial(5, r));
            assert!(all.windows(2).all(|w| w[0].lex_cmp(w[1]).is_lt()));
            assert!(all.iter().all(|s| s.len() == r && s.is_subset(pool)));
        }
        assert_eq!(binomial(100, 50), 100891344545564193334812497256);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn voter_set_basics() {
        let mut s = VoterSet::with_capacity(70);
        s.insert(1);
        s.insert(65);
        assert!(s.contains(65) && !s.contains(64));
        assert_eq!(s.to_vec(), vec![1, 65]);
        let f = VoterSet::full(70);
        assert_eq!(f.len(), 70);
        assert_eq!(s.intersection_len(&f), 2);
        s.remove(1);
        assert_eq!(s.len(), 1);
    }
}
