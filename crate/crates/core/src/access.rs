//! Monotone access structures stored by their basis of minimal authorized
//! sets, and contraction at a participant set.
//!
//! Participants are 0-based internally. The textual form used by the CLI
//! (`n=4; basis={1,2,4},{1,3,4}`) is 1-based.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest participant count for which structures may be stored.
pub const MAX_PARTICIPANTS: usize = 64;

/// Largest basis [`AccessStructure::threshold`] will materialize.
pub const MAX_BASIS: u64 = 1 << 22;

/// A set of participants as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParticipantSet(u64);

impl ParticipantSet {
    pub const EMPTY: ParticipantSet = ParticipantSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ParticipantSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// `{0, .., n-1}`
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            ParticipantSet(u64::MAX)
        } else {
            ParticipantSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        ParticipantSet(1u64 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1u64 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: ParticipantSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: ParticipantSet) -> Self {
        ParticipantSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ParticipantSet) -> Self {
        ParticipantSet(self.0 & other.0)
    }

    pub fn difference(self, other: ParticipantSet) -> Self {
        ParticipantSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: ParticipantSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Highest member + 1, or 0 for the empty set.
    pub fn bound(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Relabels members through `map` (old index -> new index).
    pub fn remap(self, map: impl Fn(usize) -> usize) -> Self {
        self.iter().map(map).collect()
    }
}

impl FromIterator<usize> for ParticipantSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ParticipantSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for ParticipantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Formats 1-based, e.g. `{1,2,4}`.
impl fmt::Display for ParticipantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// Parses a 1-based list such as `1,2,4` or `{1,2,4}` (empty allowed).
pub fn parse_participant_list(s: &str) -> Result<ParticipantSet> {
    let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
    let mut set = ParticipantSet::EMPTY;
    for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let label: usize = tok
            .parse()
            .map_err(|_| Error::invalid(format!("`{tok}` is not a participant label")))?;
        if label == 0 || label > MAX_PARTICIPANTS {
            return Err(Error::invalid(format!(
                "participant label {label} outside 1..={MAX_PARTICIPANTS}"
            )));
        }
        set.insert(label - 1);
    }
    Ok(set)
}

/// A monotone access structure on participants `0..n`, given by its basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AccessStructure {
    n: usize,
    basis: Vec<ParticipantSet>,
}

/// Output of [`AccessStructure::contract`]: the contracted structure and the
/// map from its participant indices back to the original ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contracted {
    pub structure: AccessStructure,
    pub reindex: Vec<usize>,
}

fn minimal_sets(mut sets: Vec<ParticipantSet>) -> Vec<ParticipantSet> {
    sets.sort_by_key(|s| (s.len(), s.bits()));
    sets.dedup();
    let mut out: Vec<ParticipantSet> = Vec::new();
    for s in sets {
        if !out.iter().any(|m| m.is_subset(s)) {
            out.push(s);
        }
    }
    out.sort();
    out
}

impl AccessStructure {
    /// Builds a structure from any generating family; non-minimal members
    /// are dropped so the stored basis is an antichain.
    pub fn new(n: usize, sets: impl IntoIterator<Item = ParticipantSet>) -> Result<Self> {
        if n > MAX_PARTICIPANTS {
            return Err(Error::TooLarge(n));
        }
        let full = ParticipantSet::full(n);
        let sets: Vec<ParticipantSet> = sets.into_iter().collect();
        for s in &sets {
            if s.is_empty() {
                return Err(Error::invalid("access structures contain only nonempty sets"));
            }
            if !s.is_subset(full) {
                return Err(Error::ParticipantOutOfRange {
                    index: s.bound() - 1,
                    n,
                });
            }
        }
        Ok(AccessStructure {
            n,
            basis: minimal_sets(sets),
        })
    }

    /// The `t`-out-of-`n` threshold structure; the basis is materialized.
    pub fn threshold(t: usize, n: usize) -> Result<Self> {
        if t == 0 || t > n {
            return Err(Error::invalid(format!("threshold ({t},{n}) needs 1 <= t <= n")));
        }
        if n > MAX_PARTICIPANTS || binomial(n as u64, t as u64).is_none_or(|c| c > MAX_BASIS) {
            return Err(Error::TooLarge(n));
        }
        // t-subsets in increasing bitmask order (Gosper's hack).
        let mut basis = Vec::new();
        let mut mask: u128 = (1u128 << t) - 1;
        while mask < 1u128 << n {
            basis.push(ParticipantSet::from_bits(mask as u64));
            let low = mask & mask.wrapping_neg();
            let ripple = mask + low;
            mask = (((ripple ^ mask) >> 2) / low) | ripple;
        }
        Ok(AccessStructure { n, basis })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[ParticipantSet] {
        &self.basis
    }

    fn check_range(&self, a: ParticipantSet) -> Result<()> {
        if a.is_subset(ParticipantSet::full(self.n)) {
            Ok(())
        } else {
            Err(Error::ParticipantOutOfRange {
                index: a.bound() - 1,
                n: self.n,
            })
        }
    }

    pub fn is_authorized(&self, a: ParticipantSet) -> Result<bool> {
        self.check_range(a)?;
        Ok(self.basis.iter().any(|b| b.is_subset(a)))
    }

    /// Every participant lies in some minimal authorized set.
    pub fn is_connected(&self) -> bool {
        let covered = self
            .basis
            .iter()
            .fold(ParticipantSet::EMPTY, |acc, b| acc.union(*b));
        covered == ParticipantSet::full(self.n)
    }

    /// Recognizes a threshold structure, returning `t`.
    pub fn threshold_of(&self) -> Option<usize> {
        let t = self.basis.first()?.len();
        if !self.basis.iter().all(|b| b.len() == t) {
            return None;
        }
        let expected = binomial(self.n as u64, t as u64)?;
        (self.basis.len() as u64 == expected).then_some(t)
    }

    /// Contraction at `q`: `A` is authorized in the result iff `A ∪ q` is
    /// authorized here. Remaining participants are renumbered `0..n-|q|` in
    /// ascending original order.
    pub fn contract(&self, q: ParticipantSet) -> Result<Contracted> {
        self.check_range(q)?;
        let reindex: Vec<usize> = (0..self.n).filter(|&i| !q.contains(i)).collect();
        let mut forward = vec![usize::MAX; self.n];
        for (new, &old) in reindex.iter().enumerate() {
            forward[old] = new;
        }
        let n = reindex.len();
        let basis = if self.is_authorized(q)? {
            (0..n).map(ParticipantSet::singleton).collect()
        } else {
            let reduced = self
                .basis
                .iter()
                .map(|b| b.difference(q).remap(|i| forward[i]))
                .collect();
            minimal_sets(reduced)
        };
        Ok(Contracted {
            structure: AccessStructure { n, basis },
            reindex,
        })
    }

    /// Enumerates the full monotone family (exponential; `n <= 20`).
    pub fn authorized_sets(&self) -> Result<Vec<ParticipantSet>> {
        if self.n > 20 {
            return Err(Error::TooLarge(self.n));
        }
        Ok((0u64..1 << self.n)
            .map(ParticipantSet::from_bits)
            .filter(|a| self.basis.iter().any(|b| b.is_subset(*a)))
            .collect())
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

impl fmt::Display for AccessStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sets: Vec<String> = self.basis.iter().map(|b| b.to_string()).collect();
        write!(f, "n={}; basis={}", self.n, sets.join(","))
    }
}

/// Parses `n=4; basis={1,2,4},{1,3,4}`.
impl FromStr for AccessStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let perr = |column: usize, message: String| Error::Parse {
            line: 1,
            column,
            message,
        };
        let (head, tail) = s
            .split_once(';')
            .ok_or_else(|| perr(1, "expected `n=<count>; basis=...`".into()))?;
        let n_str = head
            .trim()
            .strip_prefix("n=")
            .ok_or_else(|| perr(1, "expected `n=`".into()))?;
        let n: usize = n_str
            .trim()
            .parse()
            .map_err(|_| perr(3, format!("`{n_str}` is not a participant count")))?;
        let basis_col = head.len() + 2;
        let body = tail
            .trim()
            .strip_prefix("basis=")
            .ok_or_else(|| perr(basis_col, "expected `basis=`".into()))?;
        let mut sets = Vec::new();
        let mut rest = body.trim();
        while !rest.is_empty() {
            let start = rest
                .find('{')
                .ok_or_else(|| perr(basis_col, format!("expected `{{` in `{rest}`")))?;
            let end = rest
                .find('}')
                .ok_or_else(|| perr(basis_col, format!("unterminated set in `{rest}`")))?;
            if end < start {
                return Err(perr(basis_col, format!("malformed set list `{rest}`")));
            }
            sets.push(parse_participant_list(&rest[start..=end])?);
            rest = rest[end + 1..].trim_start().trim_start_matches(',').trim();
        }
        AccessStructure::new(n, sets)
    }
}
