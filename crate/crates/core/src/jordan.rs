//! Jordan data: integer partitions under dominance, generic Jordan form
//! estimation by finite-field sampling, Jordan recoverability probes, and
//! the begin/end-set combinatorics of maximal canonically Jordan
//! recoverable subcategories.

use crate::closure::{gs, is_e_adapted};
use crate::error::{domain, internal, Error, Result};
use crate::exact::ExactStructure;
use crate::oracle::sample_generic_nilpotent;
use crate::quiver::{
    adjacency_and_crossing, all_intervals, side_relation, Interval, IntervalSet,
    Orientation,
};
use crate::tilting::{is_tilting, Tilting};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

/// An integer partition: weakly decreasing positive parts. The empty
/// partition is the Jordan type of the zero space.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Partition> {
        parts.retain(|&p| p > 0);
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(domain(format!("parts not weakly decreasing: {parts:?}")));
        }
        Ok(Partition(parts))
    }

    pub fn from_unsorted(mut parts: Vec<usize>) -> Partition {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", items.join(","))
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// One partition per vertex.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PartitionTuple(pub Vec<Partition>);

impl PartitionTuple {
    pub fn size_vector(&self) -> Vec<usize> {
        self.0.iter().map(|p| p.size()).collect()
    }
}

impl fmt::Display for PartitionTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", items.join(", "))
    }
}

impl fmt::Debug for PartitionTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn prefix_leq(x: &Partition, y: &Partition) -> bool {
    let mut sx = 0usize;
    let mut sy = 0usize;
    let len = x.len().max(y.len());
    for i in 0..len {
        sx += x.parts().get(i).copied().unwrap_or(0);
        sy += y.parts().get(i).copied().unwrap_or(0);
        if sx > sy {
            return false;
        }
    }
    true
}

/// Dominance comparison of two partitions of the same size. `None` means
/// incomparable.
pub fn dominance_leq(x: &Partition, y: &Partition) -> Result<Option<bool>> {
    if x.size() != y.size() {
        return Err(domain(format!("dominance needs equal sizes: |{x}| != |{y}|")));
    }
    let le = prefix_leq(x, y);
    let ge = prefix_leq(y, x);
    match (le, ge) {
        (true, _) => Ok(Some(true)),
        (false, true) => Ok(Some(false)),
        (false, false) => Ok(None),
    }
}

/// Componentwise dominance on tuples with matching size vectors.
pub fn dominance_leq_tuple(x: &PartitionTuple, y: &PartitionTuple) -> Result<Option<bool>> {
    if x.0.len() != y.0.len() || x.size_vector() != y.size_vector() {
        return Err(domain("tuple size vectors differ".to_string()));
    }
    let mut all_le = true;
    let mut all_ge = true;
    for (a, b) in x.0.iter().zip(&y.0) {
        if !prefix_leq(a, b) {
            all_le = false;
        }
        if !prefix_leq(b, a) {
            all_ge = false;
        }
    }
    match (all_le, all_ge) {
        (true, _) => Ok(Some(true)),
        (false, true) => Ok(Some(false)),
        (false, false) => Ok(None),
    }
}

/// Estimated generic Jordan form of the direct sum of the given interval
/// modules, as the dominance maximum over sampled nilpotent endomorphisms.
pub fn genjf_estimate(
    parts: &[Interval],
    q: &Orientation,
    prime: u64,
    trials: u64,
    seed: u64,
) -> Result<PartitionTuple> {
    Ok(sample_generic_nilpotent(parts, q, prime, trials, seed)?.jf)
}

/// No two members may abut end to start.
pub fn is_adjacency_avoiding(set: &IntervalSet) -> (bool, Option<(Interval, Interval)>) {
    let members: Vec<Interval> = set.iter().copied().collect();
    for (i, k) in members.iter().enumerate() {
        for l in &members[i..] {
            if adjacency_and_crossing(k, l).adjacent {
                return (false, Some((*k, *l)));
            }
        }
    }
    (true, None)
}

/// Canonical Jordan recoverability of the additive hull of `set`: every
/// non-split extension between members has decomposable middle. Checked as
/// adaptedness to the diamond structure, cross-checked against the
/// adjacency-avoiding characterization.
pub fn is_cjr(set: &IntervalSet, q: &Orientation) -> Result<bool> {
    let diamond = ExactStructure::diamond(q.clone())?;
    let (adapted, _) = is_e_adapted(set, &diamond)?;
    let (avoiding, _) = is_adjacency_avoiding(set);
    if adapted != avoiding {
        return Err(internal(format!(
            "CJR characterizations disagree on {set} over {q}: adapted={adapted}, adjacency-avoiding={avoiding}"
        )));
    }
    Ok(adapted)
}

/// A begin/end pair. Maximal pairs have (B, E+1) partitioning {1,..,n+1}.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CjrPair {
    pub begins: BTreeSet<usize>,
    pub ends: BTreeSet<usize>,
}

impl CjrPair {
    pub fn is_maximal(&self, n: usize) -> bool {
        let shifted: BTreeSet<usize> = self.ends.iter().map(|e| e + 1).collect();
        if self.begins.intersection(&shifted).next().is_some() {
            return false;
        }
        let union: BTreeSet<usize> = self.begins.union(&shifted).copied().collect();
        union == (1..=n + 1).collect()
    }

    /// All intervals beginning in B and ending in E.
    pub fn interval_set(&self, n: usize) -> IntervalSet {
        all_intervals(n)
            .iter()
            .filter(|k| self.begins.contains(&k.b) && self.ends.contains(&k.e))
            .copied()
            .collect()
    }
}

impl fmt::Display for CjrPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_set = |s: &BTreeSet<usize>| {
            let v: Vec<String> = s.iter().map(|x| x.to_string()).collect();
            v.join(",")
        };
        write!(f, "B={{{}}};E={{{}}}", fmt_set(&self.begins), fmt_set(&self.ends))
    }
}

/// All 2^(n-1) maximal pairs, in the subset order of B minus {1}.
pub fn maximal_cjr_pairs(n: usize) -> Vec<CjrPair> {
    assert!(n >= 1);
    let extra: Vec<usize> = (2..=n).collect();
    let mut out = Vec::new();
    for mask in 0..(1u64 << extra.len()) {
        let mut begins: BTreeSet<usize> = BTreeSet::from([1]);
        for (bit, &v) in extra.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                begins.insert(v);
            }
        }
        let ends: BTreeSet<usize> =
            (1..=n + 1).filter(|v| !begins.contains(v)).map(|v| v - 1).collect();
        let pair = CjrPair { begins, ends };
        debug_assert!(pair.is_maximal(n));
        out.push(pair);
    }
    out
}

/// The interval set of the maximal CJR subcategory for the pair, together
/// with the tilting object it contains: the initial intervals [1,e] for
/// e in E, and for every other begin point the shortest interval that
/// leaves the top/bottom region of the full interval (or [b,n] if none
/// does).
pub fn pair_constructions(pair: &CjrPair, q: &Orientation) -> Result<(IntervalSet, Tilting)> {
    let n = q.n();
    if !pair.is_maximal(n) {
        return Err(domain(format!("pair {pair} is not maximal for n={n}")));
    }
    let j = pair.interval_set(n);
    let full = Interval::new(1, n)?;
    let mut parts = IntervalSet::new();
    for &e in &pair.ends {
        parts.insert(Interval::new(1, e)?);
    }
    for &b in &pair.begins {
        if b == 1 {
            continue;
        }
        let mut chosen = None;
        for &e in pair.ends.iter().filter(|&&e| e >= b) {
            let k = Interval::new(b, e)?;
            let side = side_relation(&k, &full, q)?;
            if !side.above && !side.below {
                chosen = Some(k);
                break;
            }
        }
        parts.insert(chosen.unwrap_or(Interval::new(b, n)?));
    }
    if !parts.is_subset(&j) {
        return Err(internal(format!("tilting parts {parts} escape {j}")));
    }
    if !is_tilting(&parts, q) {
        return Err(internal(format!("constructed parts {parts} are not tilting on {q}")));
    }
    Ok((j, Tilting::new(parts, q)?))
}

#[derive(Serialize)]
pub struct JrProbeParams {
    pub quiver: Orientation,
    pub dmax: usize,
    pub prime: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct JrProbeObject {
    pub parts: Vec<Interval>,
    pub genjf: Option<PartitionTuple>,
}

/// Report of a Jordan recoverability probe: objects with equal estimated
/// generic Jordan forms are collisions; objects with inconclusive
/// estimates are excluded from collision logic and listed separately.
#[derive(Serialize)]
pub struct JrProbeReport {
    pub params: JrProbeParams,
    pub objects: Vec<JrProbeObject>,
    pub collisions: Vec<(usize, usize)>,
    pub inconclusive: Vec<usize>,
}

fn enumerate_multisets(
    members: &[Interval],
    q: &Orientation,
    dmax: usize,
) -> Vec<Vec<Interval>> {
    let n = q.n();
    let mut out = Vec::new();
    let mut current: Vec<Interval> = Vec::new();
    let mut budget = vec![dmax; n];
    fn go(
        members: &[Interval],
        idx: usize,
        budget: &mut Vec<usize>,
        current: &mut Vec<Interval>,
        out: &mut Vec<Vec<Interval>>,
    ) {
        if idx == members.len() {
            if !current.is_empty() {
                out.push(current.clone());
            }
            return;
        }
        let k = members[idx];
        let fits = |budget: &Vec<usize>| (k.b..=k.e).all(|v| budget[v - 1] >= 1);
        // multiplicity 0 first, then as many copies as the budget allows
        go(members, idx + 1, budget, current, out);
        let mut copies = 0;
        while fits(budget) {
            for v in k.b..=k.e {
                budget[v - 1] -= 1;
            }
            current.push(k);
            copies += 1;
            go(members, idx + 1, budget, current, out);
        }
        for _ in 0..copies {
            current.pop();
        }
        for v in k.b..=k.e {
            budget[v - 1] += copies;
        }
    }
    go(members, 0, &mut budget, &mut current, &mut out);
    out.sort();
    out
}

fn fnv64(seed: u64, parts: &[Interval]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325 ^ seed.wrapping_mul(0x9e3779b97f4a7c15);
    let mut eat = |x: u64| {
        h ^= x;
        h = h.wrapping_mul(0x100000001b3);
    };
    for k in parts {
        eat(k.b as u64);
        eat(k.e as u64);
    }
    h
}

/// Estimates generic Jordan forms for every multiset of intervals from
/// `set` whose dimension vector stays entrywise within `dmax`, and reports
/// pairs of distinct objects with equal estimates.
pub fn jr_probe(
    set: &IntervalSet,
    q: &Orientation,
    dmax: usize,
    prime: u64,
    trials: u64,
    seed: u64,
) -> Result<JrProbeReport> {
    if dmax == 0 {
        return Err(domain("dmax must be at least 1".to_string()));
    }
    let members: Vec<Interval> = set.iter().copied().collect();
    let multisets = enumerate_multisets(&members, q, dmax);
    let mut objects = Vec::with_capacity(multisets.len());
    let mut inconclusive = Vec::new();
    for (i, parts) in multisets.iter().enumerate() {
        let obj_seed = fnv64(seed, parts);
        match genjf_estimate(parts, q, prime, trials, obj_seed) {
            Ok(jf) => objects.push(JrProbeObject { parts: parts.clone(), genjf: Some(jf) }),
            Err(Error::Inconclusive(_)) => {
                objects.push(JrProbeObject { parts: parts.clone(), genjf: None });
                inconclusive.push(i);
            }
            Err(e) => return Err(e),
        }
    }
    let mut collisions = Vec::new();
    for i in 0..objects.len() {
        let Some(a) = &objects[i].genjf else { continue };
        for j in i + 1..objects.len() {
            let Some(b) = &objects[j].genjf else { continue };
            if a == b {
                collisions.push((i, j));
            }
        }
    }
    Ok(JrProbeReport {
        params: JrProbeParams { quiver: q.clone(), dmax, prime, trials, seed },
        objects,
        collisions,
        inconclusive,
    })
}

/// The diamond-structure Gen-Sub fixpoint of the pair's tilting object;
/// equals the pair's interval set.
pub fn mcjr_from_pair(pair: &CjrPair, q: &Orientation) -> Result<IntervalSet> {
    let (j, t) = pair_constructions(pair, q)?;
    let diamond = ExactStructure::diamond(q.clone())?;
    let fix = gs(t.parts(), &diamond)?.fixpoint().clone();
    if fix != j {
        return Err(internal(format!("GS fixpoint {fix} differs from {j}")));
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::iv;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn dominance_examples() {
        assert_eq!(dominance_leq(&p(&[2, 1]), &p(&[3])).unwrap(), Some(true));
        assert_eq!(dominance_leq(&p(&[2, 2]), &p(&[3, 1])).unwrap(), Some(true));
        assert_eq!(dominance_leq(&p(&[3, 1]), &p(&[2, 2])).unwrap(), Some(false));
        assert!(dominance_leq(&p(&[3]), &p(&[2, 2])).is_err());
        assert_eq!(
            dominance_leq(&p(&[3, 1, 1, 1]), &p(&[2, 2, 2])).unwrap(),
            None
        );
        let x = PartitionTuple(vec![p(&[2]), p(&[1])]);
        let y = PartitionTuple(vec![p(&[1, 1]), p(&[1])]);
        assert_eq!(dominance_leq_tuple(&x, &y).unwrap(), Some(false));
        assert_eq!(dominance_leq_tuple(&y, &x).unwrap(), Some(true));
    }

    #[test]
    fn adjacency_avoiding_witness() {
        let (ok, w) = is_adjacency_avoiding(&IntervalSet::from_iter([iv(1, 2), iv(3, 3)]));
        assert!(!ok);
        assert_eq!(w, Some((iv(1, 2), iv(3, 3))));
        let (ok, _) = is_adjacency_avoiding(&IntervalSet::from_iter([iv(2, 4)]));
        assert!(ok);
    }

    #[test]
    fn maximal_pairs_counts() {
        assert_eq!(maximal_cjr_pairs(2).len(), 2);
        assert_eq!(maximal_cjr_pairs(4).len(), 8);
        let pairs = maximal_cjr_pairs(7);
        assert_eq!(pairs.len(), 64);
        let target = CjrPair {
            begins: BTreeSet::from([1, 2, 3, 5]),
            ends: BTreeSet::from([3, 5, 6, 7]),
        };
        assert!(pairs.contains(&target));
        for pair in &pairs {
            assert!(pair.begins.contains(&1));
            assert!(pair.ends.contains(&7));
        }
    }

    #[test]
    fn pair_set_for_a7() {
        let pair = CjrPair {
            begins: BTreeSet::from([1, 2, 3, 5]),
            ends: BTreeSet::from([3, 5, 6, 7]),
        };
        let j = pair.interval_set(7);
        assert_eq!(j.len(), 15);
        assert!(j.contains(&iv(2, 5)));
        assert!(!j.contains(&iv(4, 5)));
    }
}
