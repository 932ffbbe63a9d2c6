//! Approval profiles, committees and their text formats.
//!
//! Two formats are supported, both 0-indexed:
//!
//! * JSON: `{"n": 3, "m": 2, "k": 1, "approvals": [[0], [0, 1], []]}`
//! * plain: a header line `n m k` followed by exactly `n` lines, each listing
//!   the space-separated candidate indices approved by one voter. A blank line
//!   is an empty ballot.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitset::{CandidateSet, VoterSet, MAX_CANDIDATES};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Plain,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "plain" | "txt" => Ok(Format::Plain),
            other => Err(format!("unknown instance format `{other}` (expected json or plain)")),
        }
    }
}

/// An approval-based committee election: `n` voters, `m` candidates and a
/// committee size `k`. Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    m: usize,
    k: usize,
    approvals: Vec<CandidateSet>,
    supporters: Vec<VoterSet>,
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("k", &self.k)
            .field("approvals", &self.approvals)
            .finish()
    }
}

impl Instance {
    /// Builds a validated instance from per-voter ballots given as index lists.
    pub fn new(m: usize, k: usize, ballots: Vec<Vec<usize>>) -> Result<Self> {
        let n = ballots.len();
        Self::validate_counts(n, m, k)?;
        let mut approvals = Vec::with_capacity(n);
        for (v, ballot) in ballots.iter().enumerate() {
            let mut set = CandidateSet::EMPTY;
            for (i, &c) in ballot.iter().enumerate() {
                if c >= m {
                    return Err(Error::validation(
                        format!("approvals[{v}][{i}]"),
                        format!("candidate {c} out of range 0..{m}"),
                    ));
                }
                if set.contains(c) {
                    return Err(Error::validation(
                        format!("approvals[{v}][{i}]"),
                        format!("candidate {c} listed twice in one ballot"),
                    ));
                }
                set.insert(c);
            }
            approvals.push(set);
        }
        Ok(Self::from_sets(m, k, approvals))
    }

    /// Builds an instance from ballots already in bit-set form. Panics if an
    /// invariant is broken; use [`Instance::new`] for untrusted input.
    pub fn from_sets(m: usize, k: usize, approvals: Vec<CandidateSet>) -> Self {
        let n = approvals.len();
        Self::validate_counts(n, m, k).expect("invalid instance dimensions");
        assert!(
            approvals.iter().all(|a| a.is_subset(CandidateSet::full(m))),
            "approval outside 0..m"
        );
        let mut supporters = vec![VoterSet::with_capacity(n); m];
        for (v, ballot) in approvals.iter().enumerate() {
            for c in ballot.iter() {
                supporters[c].insert(v);
            }
        }
        Instance { n, m, k, approvals, supporters }
    }

    fn validate_counts(n: usize, m: usize, k: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::validation("n", "at least one voter is required"));
        }
        if m == 0 {
            return Err(Error::validation("m", "at least one candidate is required"));
        }
        if m > MAX_CANDIDATES {
            return Err(Error::validation(
                "m",
                format!("{m} candidates exceeds the supported maximum of {MAX_CANDIDATES}"),
            ));
        }
        if k == 0 {
            return Err(Error::validation("k", "committee size must be positive"));
        }
        if k > m {
            return Err(Error::validation("k", format!("committee size {k} exceeds m = {m}")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Ballot `A_v`.
    pub fn approval(&self, v: usize) -> CandidateSet {
        self.approvals[v]
    }

    pub fn approvals(&self) -> &[CandidateSet] {
        &self.approvals
    }

    /// Supporters `N_c`.
    pub fn supporters(&self, c: usize) -> &VoterSet {
        &self.supporters[c]
    }

    pub fn all_candidates(&self) -> CandidateSet {
        CandidateSet::full(self.m)
    }

    /// A copy with a different committee size.
    pub fn with_k(&self, k: usize) -> Result<Instance> {
        Self::validate_counts(self.n, self.m, k)?;
        Ok(Instance { k, ..self.clone() })
    }

    /// Voters whose ballots meet `set`.
    pub fn covered_by(&self, set: CandidateSet) -> VoterSet {
        let mut covered = VoterSet::with_capacity(self.n);
        for (v, a) in self.approvals.iter().enumerate() {
            if a.intersects(set) {
                covered.insert(v);
            }
        }
        covered
    }

    /// `|A_v ∩ set|` for every voter.
    pub fn satisfaction(&self, set: CandidateSet) -> Vec<usize> {
        self.approvals.iter().map(|a| a.intersection_len(set)).collect()
    }

    pub fn ballots(&self) -> Vec<Vec<usize>> {
        self.approvals.iter().map(|a| a.to_vec()).collect()
    }

    pub fn parse(text: &str, format: Format) -> Result<Self> {
        match format {
            Format::Json => Self::parse_json(text),
            Format::Plain => Self::parse_plain(text),
        }
    }

    pub fn serialize(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Plain => self.to_plain(),
        }
    }

    fn parse_json(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text).map_err(|e| {
            Error::syntax(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        if raw.approvals.len() != raw.n {
            return Err(Error::validation(
                "approvals",
                format!("expected {} ballots, found {}", raw.n, raw.approvals.len()),
            ));
        }
        Self::new(raw.m, raw.k, raw.approvals)
    }

    fn to_json(&self) -> String {
        let raw = RawInstance { n: self.n, m: self.m, k: self.k, approvals: self.ballots() };
        serde_json::to_string(&raw).expect("instance serializes")
    }

    fn parse_plain(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::syntax("line 1", "missing `n m k` header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::syntax("line 1", format!("bad header `{header}`: {e}")))?;
        let [n, m, k] = dims[..] else {
            return Err(Error::syntax("line 1", format!("expected `n m k`, found `{header}`")));
        };
        let mut ballots = Vec::with_capacity(n);
        for v in 0..n {
            let line_no = v + 2;
            let line = lines.next().ok_or_else(|| {
                Error::syntax(format!("line {line_no}"), format!("expected {n} ballot lines, found {v}"))
            })?;
            let ballot = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::syntax(format!("line {line_no}"), format!("bad candidate index: {e}")))?;
            ballots.push(ballot);
        }
        if let Some((extra, line)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::syntax(
                format!("line {}", n + 2 + extra),
                format!("unexpected content after {n} ballots: `{line}`"),
            ));
        }
        Self::new(m, k, ballots)
    }

    fn to_plain(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.m, self.k);
        for a in &self.approvals {
            let line: Vec<String> = a.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    n: usize,
    m: usize,
    k: usize,
    approvals: Vec<Vec<usize>>,
}

/// The group-size threshold `α·ℓ·n/k` of an (α, ℓ)-cohesive group.
pub fn quota(inst: &Instance, alpha: &Rational, level: usize) -> Rational {
    alpha * &Rational::ratio(level * inst.n(), inst.k())
}

/// A set of candidates. Rule outputs have exactly `k` members; intermediate
/// greedy states may be smaller.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Committee(CandidateSet);

impl Committee {
    pub fn new(members: CandidateSet) -> Self {
        Committee(members)
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        Committee(indices.iter().copied().collect())
    }

    pub fn members(self) -> CandidateSet {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.len()
    }

    pub fn is_empty(self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(self, c: usize) -> bool {
        self.0.contains(c)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.0.to_vec()
    }

    /// Checks the committee against an instance: indices in range, and
    /// exactly `k` members.
    pub fn check_for(self, inst: &Instance) -> Result<()> {
        if !self.0.is_subset(inst.all_candidates()) {
            return Err(Error::validation(
                "committee",
                format!("member out of range 0..{}", inst.m()),
            ));
        }
        if self.len() != inst.k() {
            return Err(Error::validation(
                "committee",
                format!("has {} members, expected k = {}", self.len(), inst.k()),
            ));
        }
        Ok(())
    }

    /// Display with 1-based indices, for comparing against hand-drawn
    /// examples.
    pub fn one_indexed(self) -> String {
        self.0.iter().map(|c| (c + 1).to_string()).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for Committee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl fmt::Debug for Committee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for Committee {
    type Err = Error;

    /// Parses a comma-separated index list such as `0,2,5`. Duplicates are
    /// rejected.
    fn from_str(s: &str) -> Result<Self> {
        let mut set = CandidateSet::EMPTY;
        if s.trim().is_empty() {
            return Ok(Committee(set));
        }
        for (i, part) in s.split(',').enumerate() {
            let c: usize = part.trim().parse().map_err(|_| {
                Error::syntax(format!("committee entry {i}"), format!("`{part}` is not an index"))
            })?;
            if c >= MAX_CANDIDATES {
                return Err(Error::validation("committee", format!("index {c} too large")));
            }
            if set.contains(c) {
                return Err(Error::validation("committee", format!("index {c} listed twice")));
            }
            set.insert(c);
        }
        Ok(Committee(set))
    }
}

impl Serialize for Committee {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

/// The proportionality axioms whose α-values this crate computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    Jr,
    Ejr,
    #[serde(rename = "ejrplus")]
    EjrPlus,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Jr => "jr",
            Axiom::Ejr => "ejr",
            Axiom::EjrPlus => "ejrplus",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "jr" => Ok(Axiom::Jr),
            "ejr" => Ok(Axiom::Ejr),
            "ejrplus" | "ejr+" => Ok(Axiom::EjrPlus),
            other => Err(format!("unknown axiom `{other}` (expected jr, ejr or ejrplus)")),
        }
    }
}

/// A witness `(S, T, ℓ)`: every voter in `S` approves all of `T` and fewer
/// than `ℓ` members of the committee. `alpha` is the
/// largest α for which the witness is a violation, `|S|·k/(ℓ·n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub voters: Vec<usize>,
    pub candidates: Vec<usize>,
    pub level: usize,
    pub alpha: Rational,
}

impl Violation {
    pub fn new(inst: &Instance, voters: Vec<usize>, candidates: Vec<usize>, level: usize) -> Self {
        let alpha = Rational::ratio(voters.len() * inst.k(), level * inst.n());
        Violation { voters, candidates, level, alpha }
    }

    /// Re-checks the witness conditions against `inst` and `committee`. For
    /// EJR+ the candidate part is a single non-member instead of `ℓ` common
    /// candidates.
    pub fn is_valid_for(&self, inst: &Instance, committee: Committee, axiom: Axiom) -> bool {
        let t: CandidateSet = self.candidates.iter().copied().collect();
        let shape_ok = match axiom {
            Axiom::Jr => self.level == 1 && t.len() == 1,
            Axiom::Ejr => t.len() >= self.level,
            Axiom::EjrPlus => t.len() == 1 && !t.intersects(committee.members()),
        };
        shape_ok
            && !self.voters.is_empty()
            && self.level >= 1
            && self.voters.iter().all(|&v| {
                let a = inst.approval(v);
                t.is_subset(a) && a.intersection_len(committee.members()) < self.level
            })
            && self.alpha == Rational::ratio(self.voters.len() * inst.k(), self.level * inst.n())
    }
}
