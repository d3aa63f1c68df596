//! Combinatorics of type A quivers: orientations as direction words,
//! intervals as indecomposables, the above/below relations, Hom witnesses,
//! the Euler form, Ext dimensions and the classification of non-split
//! extensions by their middle terms.

use crate::error::{domain, internal, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// Direction of the arrow between vertices `i` and `i+1`.
/// `R` is `i -> i+1`, `L` is `i <- i+1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Dir {
    R,
    L,
}

/// A type A quiver on `n` vertices, encoded by its direction word of
/// length `n - 1`. The word forces the underlying graph to be a path.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Orientation {
    dirs: Vec<Dir>,
}

impl Orientation {
    pub fn parse(text: &str) -> Result<Orientation> {
        let mut dirs = Vec::with_capacity(text.len());
        for (i, ch) in text.chars().enumerate() {
            match ch {
                'R' => dirs.push(Dir::R),
                'L' => dirs.push(Dir::L),
                other => {
                    return Err(Error::Parse {
                        position: i,
                        message: format!("expected R or L, found {other:?}"),
                    })
                }
            }
        }
        Ok(Orientation { dirs })
    }

    pub fn n(&self) -> usize {
        self.dirs.len() + 1
    }

    /// Direction of the arrow between vertices `i` and `i+1`, 1-based.
    pub fn dir(&self, i: usize) -> Dir {
        self.dirs[i - 1]
    }

    pub fn dirs(&self) -> &[Dir] {
        &self.dirs
    }

    /// Arrow index range is `1..n`; source and target of arrow `i`.
    pub fn arrow(&self, i: usize) -> (usize, usize) {
        match self.dir(i) {
            Dir::R => (i, i + 1),
            Dir::L => (i + 1, i),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.dirs {
            f.write_str(match d {
                Dir::R => "R",
                Dir::L => "L",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Orientation({self})")
    }
}

impl FromStr for Orientation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Orientation::parse(s)
    }
}

impl Serialize for Orientation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Orientation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Orientation::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// An interval `b..e` of `{1, .., n}`, 1-based and inclusive.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub b: usize,
    pub e: usize,
}

impl Interval {
    pub fn new(b: usize, e: usize) -> Result<Interval> {
        if b == 0 || b > e {
            return Err(domain(format!("invalid interval {b}..{e}")));
        }
        Ok(Interval { b, e })
    }

    pub fn parse(text: &str) -> Result<Interval> {
        let (b, e) = text
            .split_once("..")
            .ok_or_else(|| Error::Parse { position: 0, message: format!("expected b..e, found {text:?}") })?;
        let parse_end = |s: &str| {
            s.trim().parse::<usize>().map_err(|_| Error::Parse {
                position: 0,
                message: format!("bad interval endpoint {s:?}"),
            })
        };
        Interval::new(parse_end(b)?, parse_end(e)?)
    }

    pub fn len(&self) -> usize {
        self.e - self.b + 1
    }

    pub fn contains(&self, q: usize) -> bool {
        self.b <= q && q <= self.e
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        other.b <= self.b && self.e <= other.e
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let b = self.b.max(other.b);
        let e = self.e.min(other.e);
        (b <= e).then_some(Interval { b, e })
    }

    /// Union when it is again an interval.
    pub fn union(&self, other: &Interval) -> Option<Interval> {
        let meets = self.intersect(other).is_some()
            || self.e + 1 == other.b
            || other.e + 1 == self.b;
        meets.then(|| Interval { b: self.b.min(other.b), e: self.e.max(other.e) })
    }

    pub fn valid_for(&self, q: &Orientation) -> bool {
        self.e <= q.n()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.b, self.e)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Interval::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Convenience constructor for code and tests.
pub fn iv(b: usize, e: usize) -> Interval {
    Interval::new(b, e).expect("interval endpoints")
}

/// A set of intervals without multiplicity, kept sorted.
#[derive(Clone, PartialEq, Eq, Default, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntervalSet(BTreeSet<Interval>);

impl IntervalSet {
    pub fn new() -> Self {
        IntervalSet(BTreeSet::new())
    }

    pub fn from_iter(items: impl IntoIterator<Item = Interval>) -> Self {
        IntervalSet(items.into_iter().collect())
    }

    pub fn parse(text: &str) -> Result<IntervalSet> {
        let mut set = BTreeSet::new();
        for token in text.split(',') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            set.insert(Interval::parse(token)?);
        }
        Ok(IntervalSet(set))
    }

    pub fn insert(&mut self, k: Interval) -> bool {
        self.0.insert(k)
    }

    pub fn contains(&self, k: &Interval) -> bool {
        self.0.contains(k)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interval> + '_ {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &IntervalSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union_with(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet(self.0.union(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn remove(&mut self, k: &Interval) -> bool {
        self.0.remove(k)
    }

    pub fn valid_for(&self, q: &Orientation) -> bool {
        self.iter().all(|k| k.valid_for(q))
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|k| k.to_string()).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

impl fmt::Debug for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromIterator<Interval> for IntervalSet {
    fn from_iter<T: IntoIterator<Item = Interval>>(items: T) -> Self {
        IntervalSet(items.into_iter().collect())
    }
}

pub type DimVector = Vec<usize>;

/// Shape of a non-split extension between interval modules.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtKind {
    Gluing,
    Diamond,
}

/// The classified middle term of the unique non-split extension class
/// `0 -> X_sub -> middle -> X_quot -> 0`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ExtShape {
    pub kind: ExtKind,
    pub sub: Interval,
    pub quot: Interval,
    pub middle: Vec<Interval>,
}

pub fn parse_orientation(text: &str) -> Result<Orientation> {
    Orientation::parse(text)
}

pub fn all_intervals(n: usize) -> IntervalSet {
    assert!(n >= 1);
    let mut set = BTreeSet::new();
    for b in 1..=n {
        for e in b..=n {
            set.insert(Interval { b, e });
        }
    }
    IntervalSet(set)
}

pub fn dim_vector(k: &Interval, q: &Orientation) -> DimVector {
    assert!(k.valid_for(q));
    (1..=q.n()).map(|v| k.contains(v) as usize).collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SideRelation {
    pub above: bool,
    pub below: bool,
}

/// The above/below relations for nested intervals K inside L. These govern
/// which canonical morphisms exist between interval modules.
pub fn side_relation(k: &Interval, l: &Interval, q: &Orientation) -> Result<SideRelation> {
    if !k.subset_of(l) {
        return Err(domain(format!("{k} is not contained in {l}")));
    }
    if !l.valid_for(q) {
        return Err(domain(format!("{l} is out of range for n={}", q.n())));
    }
    let above = (k.b == l.b || q.dir(k.b - 1) == Dir::L)
        && (k.e == l.e || q.dir(k.e) == Dir::R);
    let below = (k.b == l.b || q.dir(k.b - 1) == Dir::R)
        && (k.e == l.e || q.dir(k.e) == Dir::L);
    Ok(SideRelation { above, below })
}

/// Support of the canonical basis morphism `X_K -> X_L`, when the Hom space
/// is nonzero: the unique interval J inside both that is above K and below
/// L. Absent means the Hom space vanishes.
pub fn hom(k: &Interval, l: &Interval, q: &Orientation) -> Option<Interval> {
    let meet = k.intersect(l)?;
    let mut found = None;
    for b in meet.b..=meet.e {
        for e in b..=meet.e {
            let j = Interval { b, e };
            let in_k = side_relation(&j, k, q).expect("nested");
            if !in_k.above {
                continue;
            }
            let in_l = side_relation(&j, l, q).expect("nested");
            if in_l.below {
                debug_assert!(found.is_none(), "hom witness must be unique");
                found = Some(j);
                #[cfg(not(debug_assertions))]
                return found;
            }
        }
    }
    found
}

/// Hereditary Euler form on dimension vectors.
pub fn euler_form(a: &DimVector, b: &DimVector, q: &Orientation) -> Result<i64> {
    if a.len() != q.n() || b.len() != q.n() {
        return Err(domain("dimension vector length mismatch".to_string()));
    }
    let mut acc: i64 = 0;
    for v in 0..q.n() {
        acc += a[v] as i64 * b[v] as i64;
    }
    for i in 1..q.n() {
        let (s, t) = q.arrow(i);
        acc -= a[s - 1] as i64 * b[t - 1] as i64;
    }
    Ok(acc)
}

/// Ext^1 dimension for interval modules, quotient first: classes of
/// sequences `0 -> X_sub -> E -> X_quot -> 0`. Always 0 or 1 in type A.
pub fn ext_dim(quot: &Interval, sub: &Interval, q: &Orientation) -> Result<usize> {
    let h = hom(quot, sub, q).is_some() as i64;
    let e = h - euler_form(&dim_vector(quot, q), &dim_vector(sub, q), q)?;
    match e {
        0 => Ok(0),
        1 => Ok(1),
        other => Err(internal(format!(
            "ext dimension {other} out of range for quot={quot} sub={sub} on {q}"
        ))),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AdjacencyCrossing {
    pub adjacent: bool,
    pub crossing: bool,
}

pub fn adjacency_and_crossing(k: &Interval, l: &Interval) -> AdjacencyCrossing {
    let adjacent = k.b == l.e + 1 || l.b == k.e + 1;
    let crossing = match k.intersect(l) {
        None => false,
        Some(meet) => {
            let join = k.union(l).expect("overlapping intervals have interval union");
            let four = [*k, *l, meet, join];
            let distinct = (0..4).all(|i| (i + 1..4).all(|j| four[i] != four[j]));
            distinct
        }
    };
    AdjacencyCrossing { adjacent, crossing }
}

/// Shape of the unique non-split class with the given quotient and sub.
/// Gluing glues disjoint adjacent intervals into one; the diamond cases
/// have a two-part middle, either the meet/join of a crossing pair or the
/// crossing pair over a strictly nested one.
pub fn classify_nonsplit(quot: &Interval, sub: &Interval, q: &Orientation) -> Result<ExtShape> {
    if ext_dim(quot, sub, q)? != 1 {
        return Err(domain(format!(
            "no non-split class with quotient {quot} and sub {sub} on {q}"
        )));
    }
    let shape = match quot.intersect(sub) {
        None => {
            let join = quot
                .union(sub)
                .ok_or_else(|| internal(format!("gluing {quot},{sub} without interval union")))?;
            ExtShape { kind: ExtKind::Gluing, sub: *sub, quot: *quot, middle: vec![join] }
        }
        Some(meet) => {
            let join = quot.union(sub).expect("overlap");
            if adjacency_and_crossing(quot, sub).crossing {
                let mut middle = vec![meet, join];
                middle.sort();
                ExtShape { kind: ExtKind::Diamond, sub: *sub, quot: *quot, middle }
            } else {
                // strictly nested: the middle is the crossing pair whose
                // meet and join are the two ends
                let (inner, outer) = if quot.subset_of(sub) { (quot, sub) } else { (sub, quot) };
                if !(outer.b < inner.b && inner.e < outer.e) {
                    return Err(internal(format!(
                        "unexpected non-split shape for quot={quot} sub={sub} on {q}"
                    )));
                }
                let mut middle =
                    vec![Interval { b: outer.b, e: inner.e }, Interval { b: inner.b, e: outer.e }];
                middle.sort();
                ExtShape { kind: ExtKind::Diamond, sub: *sub, quot: *quot, middle }
            }
        }
    };
    Ok(shape)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(word: &str) -> Orientation {
        Orientation::parse(word).unwrap()
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        for word in ["", "R", "RLR", "RLRRLR"] {
            assert_eq!(q(word).to_string(), word);
        }
        assert_eq!(q("RR").n(), 3);
        assert_eq!(q("RLR").n(), 4);
        match Orientation::parse("RXR") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn interval_counts() {
        assert_eq!(all_intervals(2).len(), 3);
        assert_eq!(all_intervals(4).len(), 10);
        assert_eq!(all_intervals(7).len(), 28);
    }

    #[test]
    fn dim_vectors() {
        assert_eq!(dim_vector(&iv(2, 5), &q("RLRRLR")), vec![0, 1, 1, 1, 1, 0, 0]);
        assert_eq!(dim_vector(&iv(1, 1), &q("R")), vec![1, 0]);
        assert_eq!(dim_vector(&iv(1, 7), &q("RLRRLR")), vec![1; 7]);
    }

    #[test]
    fn above_below_examples() {
        let rr = q("RR");
        let r = side_relation(&iv(2, 2), &iv(2, 3), &rr).unwrap();
        assert!(r.above && !r.below);
        let r = side_relation(&iv(2, 2), &iv(1, 2), &rr).unwrap();
        assert!(!r.above && r.below);
        for k in all_intervals(3).iter() {
            let r = side_relation(k, k, &rr).unwrap();
            assert!(r.above && r.below);
        }
        assert!(side_relation(&iv(1, 2), &iv(2, 3), &rr).is_err());
    }

    #[test]
    fn hom_witnesses() {
        let rr = q("RR");
        assert_eq!(hom(&iv(2, 3), &iv(1, 2), &rr), Some(iv(2, 2)));
        assert_eq!(hom(&iv(1, 2), &iv(2, 3), &rr), None);
        assert_eq!(hom(&iv(1, 3), &iv(1, 3), &rr), Some(iv(1, 3)));
        // target side: components used by the A7 closure example
        let a7 = q("RLRRLR");
        assert_eq!(hom(&iv(5, 7), &iv(1, 6), &a7), Some(iv(5, 6)));
        assert_eq!(hom(&iv(5, 6), &iv(1, 6), &a7), Some(iv(5, 6)));
        assert_eq!(hom(&iv(1, 5), &iv(1, 6), &a7), Some(iv(1, 5)));
    }

    #[test]
    fn euler_values() {
        let rr = q("RR");
        assert_eq!(euler_form(&vec![1, 1, 0], &vec![0, 1, 1], &rr).unwrap(), -1);
        assert_eq!(euler_form(&vec![1, 0], &vec![1, 0], &q("R")).unwrap(), 1);
        assert_eq!(euler_form(&vec![1, 0], &vec![1, 0], &q("L")).unwrap(), 1);
        assert_eq!(euler_form(&vec![1, 1, 1], &vec![0, 1, 0], &rr).unwrap(), 0);
        assert!(euler_form(&vec![1, 0], &vec![1, 0, 0], &rr).is_err());
    }

    #[test]
    fn ext_values() {
        let rr = q("RR");
        assert_eq!(ext_dim(&iv(1, 1), &iv(2, 3), &rr).unwrap(), 1);
        assert_eq!(ext_dim(&iv(1, 2), &iv(2, 3), &rr).unwrap(), 1);
        assert_eq!(ext_dim(&iv(2, 3), &iv(1, 2), &rr).unwrap(), 0);
        for k in all_intervals(3).iter() {
            assert_eq!(ext_dim(k, k, &rr).unwrap(), 0);
        }
    }

    #[test]
    fn classify_shapes() {
        let rr = q("RR");
        let s = classify_nonsplit(&iv(1, 1), &iv(2, 3), &rr).unwrap();
        assert_eq!(s.kind, ExtKind::Gluing);
        assert_eq!(s.middle, vec![iv(1, 3)]);

        let s = classify_nonsplit(&iv(1, 2), &iv(2, 3), &rr).unwrap();
        assert_eq!(s.kind, ExtKind::Diamond);
        assert_eq!(s.middle, vec![iv(1, 3), iv(2, 2)]);

        assert!(classify_nonsplit(&iv(2, 2), &iv(1, 3), &rr).is_err());

        // nested diamond: quotient strictly contains the sub
        let rl = q("RL");
        assert_eq!(ext_dim(&iv(1, 3), &iv(2, 2), &rl).unwrap(), 1);
        let s = classify_nonsplit(&iv(1, 3), &iv(2, 2), &rl).unwrap();
        assert_eq!(s.kind, ExtKind::Diamond);
        assert_eq!(s.middle, vec![iv(1, 2), iv(2, 3)]);
    }

    #[test]
    fn adjacency_crossing_cases() {
        let r = adjacency_and_crossing(&iv(1, 2), &iv(3, 5));
        assert!(r.adjacent && !r.crossing);
        let r = adjacency_and_crossing(&iv(1, 3), &iv(2, 5));
        assert!(!r.adjacent && r.crossing);
        let r = adjacency_and_crossing(&iv(1, 3), &iv(2, 3));
        assert!(!r.adjacent && !r.crossing);
    }

    #[test]
    fn interval_set_parse() {
        let set = IntervalSet::parse("5..5, 5..7 ,5..6,2..3,1..3,1..5,3..5").unwrap();
        assert_eq!(set.len(), 7);
        assert!(set.contains(&iv(5, 7)));
        assert!(IntervalSet::parse("2..1").is_err());
    }
}
