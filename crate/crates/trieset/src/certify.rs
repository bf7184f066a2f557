//! Intersection certificates: small interval partitions that prove a
//! result correct.
//!
//! A certificate partitions the universe `[0..u)` into consecutive
//! intervals, each carrying its own one-line proof: a member interval
//! lies entirely inside the intersection (checkable against every set),
//! and an eliminated interval names one witness set that contains none of
//! its values, so nothing in it can be in the intersection. Any partition
//! with those labels pins the intersection exactly.
//!
//! Two flavors differ only in what member intervals may look like. The
//! alternation certificate restricts them to singletons; its minimum size
//! is the classical difficulty measure for an intersection instance. The
//! run alternation certificate lets a run of consecutive result values
//! share one interval, so its minimum can drop below the result size when
//! the output is bursty.
//!
//! Both minima are computed by one greedy left-to-right sweep: starting
//! at `x`, either `x` is in every set (emit the member singleton or the
//! longest member run), or some set's successor of `x` jumps furthest,
//! eliminating everything up to that point in one interval. Each greedy
//! interval is the longest any valid certificate could use at that spot,
//! so the sweep is minimal; the tests check that against an exhaustive
//! dynamic program on small universes.

use serde::Serialize;

use crate::measures::SortedSet;
use crate::{Error, Result};

/// An inclusive interval of universe values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
}

impl Interval {
    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Why an interval is allowed in a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IntervalLabel {
    /// Every value in the interval belongs to the intersection.
    Members,
    /// The named query set (by position) has no value in the interval.
    Eliminated { witness: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    /// Member intervals are singletons.
    Alternation,
    /// Member intervals may cover runs of consecutive result values.
    RunAlternation,
}

/// A full interval partition of the universe with per-interval labels.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub universe: u64,
    pub intervals: Vec<(Interval, IntervalLabel)>,
}

impl Certificate {
    /// Number of intervals; minimal for the sweep-built certificates.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total size of the member intervals, i.e. the intersection size.
    pub fn member_count(&self) -> u64 {
        self.intervals
            .iter()
            .filter(|(_, label)| *label == IntervalLabel::Members)
            .map(|(iv, _)| iv.len())
            .sum()
    }

    /// The intersection itself, read off the member intervals.
    pub fn members(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for (iv, label) in &self.intervals {
            if *label == IntervalLabel::Members {
                out.extend(iv.lo..=iv.hi);
            }
        }
        out
    }

    /// Checks every claim the certificate makes against the sets: the
    /// intervals tile `[0..u)` in order, member intervals lie in every
    /// set, eliminated intervals miss their witness set entirely, and
    /// alternation member intervals are singletons.
    pub fn validate(&self, sets: &[&SortedSet]) -> Result<()> {
        let fail = |detail: String| {
            Err(Error::InvalidInput(format!("invalid certificate: {detail}")))
        };
        if sets.is_empty() {
            return Err(Error::TooFewSets);
        }
        if sets.iter().any(|s| s.universe() != self.universe) {
            return fail("universe mismatch with the query sets".into());
        }
        let mut next = 0u64;
        for (iv, label) in &self.intervals {
            if iv.lo != next {
                return fail(format!("interval starts at {} instead of {next}", iv.lo));
            }
            if iv.hi < iv.lo || iv.hi >= self.universe {
                return fail(format!("bad interval bounds [{}..{}]", iv.lo, iv.hi));
            }
            match label {
                IntervalLabel::Members => {
                    if self.kind == CertificateKind::Alternation && iv.hi != iv.lo {
                        return fail(format!(
                            "member interval [{}..{}] is not a singleton",
                            iv.lo, iv.hi
                        ));
                    }
                    for (i, s) in sets.iter().enumerate() {
                        if count_in(s, iv) != iv.len() {
                            return fail(format!(
                                "set {i} misses part of member interval [{}..{}]",
                                iv.lo, iv.hi
                            ));
                        }
                    }
                }
                IntervalLabel::Eliminated { witness } => {
                    let Some(s) = sets.get(*witness) else {
                        return fail(format!("witness {witness} out of range"));
                    };
                    if count_in(s, iv) != 0 {
                        return fail(format!(
                            "witness {witness} intersects eliminated interval [{}..{}]",
                            iv.lo, iv.hi
                        ));
                    }
                }
            }
            next = iv.hi + 1;
        }
        if next != self.universe {
            return fail(format!("intervals stop at {next}, universe is {}", self.universe));
        }
        Ok(())
    }
}

fn count_in(s: &SortedSet, iv: &Interval) -> u64 {
    let elems = s.elems();
    let hi = elems.partition_point(|&e| e <= iv.hi);
    let lo = elems.partition_point(|&e| e < iv.lo);
    (hi - lo) as u64
}

fn contains(s: &SortedSet, x: u64) -> bool {
    s.elems().binary_search(&x).is_ok()
}

/// Smallest alternation certificate (singleton member intervals).
pub fn compute_delta(sets: &[&SortedSet]) -> Result<Certificate> {
    sweep(sets, CertificateKind::Alternation)
}

/// Smallest run alternation certificate (member runs merged).
pub fn compute_xi(sets: &[&SortedSet]) -> Result<Certificate> {
    sweep(sets, CertificateKind::RunAlternation)
}

fn sweep(sets: &[&SortedSet], kind: CertificateKind) -> Result<Certificate> {
    if sets.is_empty() {
        return Err(Error::TooFewSets);
    }
    let u = sets[0].universe();
    if sets.iter().any(|s| s.universe() != u) {
        return Err(Error::InvalidInput(
            "certificate inputs must share one universe".into(),
        ));
    }
    let mut intervals = Vec::new();
    let mut x = 0u64;
    while x < u {
        // Successor of x per set, with the universe end standing in for
        // "no more elements". x is a member exactly when every successor
        // is x itself.
        let mut best_m = x;
        let mut witness = 0usize;
        let mut member = true;
        for (i, s) in sets.iter().enumerate() {
            let elems = s.elems();
            let idx = elems.partition_point(|&e| e < x);
            let m = elems.get(idx).copied().unwrap_or(u);
            if m != x {
                member = false;
                if m > best_m {
                    best_m = m;
                    witness = i;
                }
            }
        }
        if member {
            let mut hi = x;
            if kind == CertificateKind::RunAlternation {
                while hi + 1 < u && sets.iter().all(|s| contains(s, hi + 1)) {
                    hi += 1;
                }
            }
            intervals.push((Interval { lo: x, hi }, IntervalLabel::Members));
            x = hi + 1;
        } else {
            // The furthest-jumping set proves [x .. best_m - 1] empty of
            // results; ties keep the lowest set index.
            intervals.push((
                Interval {
                    lo: x,
                    hi: best_m - 1,
                },
                IntervalLabel::Eliminated { witness },
            ));
            x = best_m;
        }
    }
    Ok(Certificate {
        kind,
        universe: u,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(elems: &[u64], u: u64) -> SortedSet {
        SortedSet::new(elems.to_vec(), u).unwrap()
    }

    fn pair_query() -> Vec<SortedSet> {
        vec![
            set(&[1, 3, 7, 8, 9, 10, 11, 12], 16),
            set(&[2, 5, 7, 12, 15], 16),
        ]
    }

    fn run_query() -> Vec<SortedSet> {
        vec![
            set(&[7, 8, 9, 10, 11, 12, 13, 14, 15], 16),
            set(&[5, 6, 7, 8, 9, 10, 11, 12, 13, 14], 16),
            set(&[4, 5, 6, 7, 8, 9, 11, 12, 13, 14], 16),
            set(&[8, 9, 10, 11, 12, 13, 14, 15], 16),
        ]
    }

    fn refs(sets: &[SortedSet]) -> Vec<&SortedSet> {
        sets.iter().collect()
    }

    fn intersection(sets: &[SortedSet]) -> Vec<u64> {
        sets[0]
            .elems()
            .iter()
            .copied()
            .filter(|x| sets[1..].iter().all(|s| s.elems().binary_search(x).is_ok()))
            .collect()
    }

    /// Exhaustive minimum certificate size over a small universe.
    fn dp_minimum(sets: &[SortedSet], merge_members: bool) -> usize {
        let u = sets[0].universe() as usize;
        let member: Vec<bool> = (0..u as u64)
            .map(|x| sets.iter().all(|s| s.elems().binary_search(&x).is_ok()))
            .collect();
        let count_in = |s: &SortedSet, lo: usize, hi: usize| {
            let e = s.elems();
            e.partition_point(|&v| v < hi as u64) - e.partition_point(|&v| v < lo as u64)
        };
        // dp[j]: fewest intervals tiling [0..j)
        let mut dp = vec![usize::MAX; u + 1];
        dp[0] = 0;
        for j in 1..=u {
            for i in 0..j {
                if dp[i] == usize::MAX {
                    continue;
                }
                let all_members = member[i..j].iter().all(|&m| m);
                let member_ok = all_members && (merge_members || j - i == 1);
                let elim_ok = sets.iter().any(|s| count_in(s, i, j) == 0);
                if member_ok || elim_ok {
                    dp[j] = dp[j].min(dp[i] + 1);
                }
            }
        }
        dp[u]
    }

    fn xorshift(state: &mut u64) -> u64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        *state
    }

    #[test]
    fn alternation_certificate_matches_worked_example() {
        let sets = pair_query();
        let cert = compute_delta(&refs(&sets)).unwrap();
        assert_eq!(cert.len(), 8);
        let expect: Vec<(u64, u64, IntervalLabel)> = vec![
            (0, 1, IntervalLabel::Eliminated { witness: 1 }),
            (2, 2, IntervalLabel::Eliminated { witness: 0 }),
            (3, 4, IntervalLabel::Eliminated { witness: 1 }),
            (5, 6, IntervalLabel::Eliminated { witness: 0 }),
            (7, 7, IntervalLabel::Members),
            (8, 11, IntervalLabel::Eliminated { witness: 1 }),
            (12, 12, IntervalLabel::Members),
            (13, 15, IntervalLabel::Eliminated { witness: 0 }),
        ];
        let got: Vec<(u64, u64, IntervalLabel)> = cert
            .intervals
            .iter()
            .map(|(iv, l)| (iv.lo, iv.hi, *l))
            .collect();
        assert_eq!(got, expect);
        cert.validate(&refs(&sets)).unwrap();
        assert_eq!(cert.members(), vec![7, 12]);
    }

    #[test]
    fn run_certificate_matches_worked_example() {
        let sets = run_query();
        let xi = compute_xi(&refs(&sets)).unwrap();
        assert_eq!(xi.len(), 5);
        let got: Vec<(u64, u64, IntervalLabel)> = xi
            .intervals
            .iter()
            .map(|(iv, l)| (iv.lo, iv.hi, *l))
            .collect();
        let expect: Vec<(u64, u64, IntervalLabel)> = vec![
            (0, 7, IntervalLabel::Eliminated { witness: 3 }),
            (8, 9, IntervalLabel::Members),
            (10, 10, IntervalLabel::Eliminated { witness: 2 }),
            (11, 14, IntervalLabel::Members),
            (15, 15, IntervalLabel::Eliminated { witness: 1 }),
        ];
        assert_eq!(got, expect);
        xi.validate(&refs(&sets)).unwrap();
        let delta = compute_delta(&refs(&sets)).unwrap();
        assert_eq!(delta.len(), 9);
        delta.validate(&refs(&sets)).unwrap();
        assert_eq!(xi.member_count(), 6);
        assert_eq!(xi.members(), intersection(&sets));
    }

    #[test]
    fn sweep_is_minimal_against_exhaustive_search() {
        let mut state = 0x5eed_cafe_u64;
        for case in 0..60 {
            let u = 16 + (case % 3) * 16;
            let k = 2 + case % 3;
            let sets: Vec<SortedSet> = (0..k)
                .map(|_| {
                    let density = 1 + xorshift(&mut state) % 4;
                    let elems: Vec<u64> = (0..u as u64)
                        .filter(|_| xorshift(&mut state) % 4 < density)
                        .collect();
                    set(&elems, u as u64)
                })
                .collect();
            let delta = compute_delta(&refs(&sets)).unwrap();
            let xi = compute_xi(&refs(&sets)).unwrap();
            assert_eq!(delta.len(), dp_minimum(&sets, false), "case {case}");
            assert_eq!(xi.len(), dp_minimum(&sets, true), "case {case}");
            delta.validate(&refs(&sets)).unwrap();
            xi.validate(&refs(&sets)).unwrap();
            let result = intersection(&sets);
            assert_eq!(delta.members(), result);
            assert_eq!(xi.members(), result);
            assert!(xi.len() <= delta.len());
            assert!(result.len() <= delta.len());
        }
    }

    #[test]
    fn degenerate_queries() {
        // An empty set eliminates everything in one interval.
        let sets = vec![set(&[], 64), set(&[1, 2, 3], 64)];
        let delta = compute_delta(&refs(&sets)).unwrap();
        assert_eq!(delta.len(), 1);
        assert_eq!(
            delta.intervals[0],
            (
                Interval { lo: 0, hi: 63 },
                IntervalLabel::Eliminated { witness: 0 }
            )
        );
        delta.validate(&refs(&sets)).unwrap();
        // Identical full sets: one member run, but one singleton each for
        // the alternation flavor.
        let all: Vec<u64> = (0..16).collect();
        let sets = vec![set(&all, 16), set(&all, 16)];
        let xi = compute_xi(&refs(&sets)).unwrap();
        assert_eq!(xi.len(), 1);
        let delta = compute_delta(&refs(&sets)).unwrap();
        assert_eq!(delta.len(), 16);
        xi.validate(&refs(&sets)).unwrap();
        delta.validate(&refs(&sets)).unwrap();
    }

    #[test]
    fn validate_rejects_broken_certificates() {
        let sets = pair_query();
        let good = compute_delta(&refs(&sets)).unwrap();

        let mut hole = good.clone();
        hole.intervals.remove(3);
        assert!(hole.validate(&refs(&sets)).is_err());

        let mut overlap = good.clone();
        overlap.intervals[0].0.hi += 1;
        assert!(overlap.validate(&refs(&sets)).is_err());

        let mut bad_witness = good.clone();
        bad_witness.intervals[0].1 = IntervalLabel::Eliminated { witness: 0 };
        assert!(bad_witness.validate(&refs(&sets)).is_err());

        let mut false_member = good.clone();
        false_member.intervals[1].1 = IntervalLabel::Members;
        assert!(false_member.validate(&refs(&sets)).is_err());

        let mut wide_member = good.clone();
        wide_member.intervals[4].0.hi = 8;
        wide_member.intervals[5].0.lo = 9;
        assert!(wide_member.validate(&refs(&sets)).is_err());

        let mut out_of_range = good;
        out_of_range.intervals.last_mut().unwrap().0.hi = 16;
        assert!(out_of_range.validate(&refs(&sets)).is_err());
    }

    #[test]
    fn input_validation() {
        assert!(matches!(compute_delta(&[]), Err(Error::TooFewSets)));
        let a = set(&[1], 16);
        let b = set(&[1], 32);
        assert!(compute_delta(&[&a, &b]).is_err());
    }
}
