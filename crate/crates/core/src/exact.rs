//! Exact structures encoded by their admissible non-split classes between
//! indecomposables, extended additively to arbitrary short exact
//! sequences. Built-ins: split only, everything, and the diamond
//! structure whose admissible classes are exactly the two-part middles.

use crate::error::{domain, Result};
use crate::oracle::{pullback, pushout, realize_nonsplit, ses_components, ses_splits, sum_morphism, SesWitness};
use crate::quiver::{all_intervals, classify_nonsplit, ExtKind, Interval, IntervalSet, Orientation};
use crate::tables::tables;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    Min,
    Max,
    Diamond,
    Custom,
}

/// An exact structure on the representations of a fixed orientation,
/// as a predicate on non-split classes (quotient, sub).
#[derive(Clone, PartialEq, Eq)]
pub struct ExactStructure {
    q: Orientation,
    kind: StructureKind,
    table: BTreeSet<(Interval, Interval)>,
}

impl fmt::Debug for ExactStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactStructure({:?} on {})", self.kind, self.q)
    }
}

impl fmt::Display for ExactStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StructureKind::Min => write!(f, "min"),
            StructureKind::Max => write!(f, "max"),
            StructureKind::Diamond => write!(f, "diamond"),
            StructureKind::Custom => {
                let pairs: Vec<String> =
                    self.table.iter().map(|(k, l)| format!("({k},{l})")).collect();
                write!(f, "custom[{}]", pairs.join(","))
            }
        }
    }
}

impl ExactStructure {
    pub fn min(q: Orientation) -> ExactStructure {
        ExactStructure { q, kind: StructureKind::Min, table: BTreeSet::new() }
    }

    pub fn max(q: Orientation) -> ExactStructure {
        ExactStructure { q, kind: StructureKind::Max, table: BTreeSet::new() }
    }

    pub fn diamond(q: Orientation) -> Result<ExactStructure> {
        Ok(ExactStructure { q, kind: StructureKind::Diamond, table: BTreeSet::new() })
    }

    /// A custom structure from its admissible pair table. Pairs without a
    /// non-split class are rejected.
    pub fn custom(
        q: Orientation,
        pairs: impl IntoIterator<Item = (Interval, Interval)>,
    ) -> Result<ExactStructure> {
        let t = tables(&q);
        let mut table = BTreeSet::new();
        for (quot, sub) in pairs {
            if !quot.valid_for(&q) || !sub.valid_for(&q) {
                return Err(domain(format!("pair ({quot},{sub}) out of range for {q}")));
            }
            if t.ext(&quot, &sub) != 1 {
                return Err(domain(format!(
                    "pair ({quot},{sub}) has no non-split class on {q}"
                )));
            }
            table.insert((quot, sub));
        }
        Ok(ExactStructure { q, kind: StructureKind::Custom, table })
    }

    pub fn make(q: Orientation, spec: &StructureSpec) -> Result<ExactStructure> {
        match spec {
            StructureSpec::Min => Ok(ExactStructure::min(q)),
            StructureSpec::Max => Ok(ExactStructure::max(q)),
            StructureSpec::Diamond => ExactStructure::diamond(q),
            StructureSpec::Custom(pairs) => ExactStructure::custom(q, pairs.iter().copied()),
        }
    }

    pub fn orientation(&self) -> &Orientation {
        &self.q
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    /// Whether the non-split class with the given quotient and sub is
    /// admissible. The pair must carry a class at all.
    pub fn admissible_class(&self, quot: &Interval, sub: &Interval) -> Result<bool> {
        let t = tables(&self.q);
        if t.ext(quot, sub) != 1 {
            return Err(domain(format!(
                "no non-split class with quotient {quot} and sub {sub} on {}",
                self.q
            )));
        }
        Ok(match self.kind {
            StructureKind::Min => false,
            StructureKind::Max => true,
            StructureKind::Diamond => {
                classify_nonsplit(quot, sub, &self.q)?.kind == ExtKind::Diamond
            }
            StructureKind::Custom => self.table.contains(&(*quot, *sub)),
        })
    }

    /// Additive extension to arbitrary witnesses: admissible iff every
    /// non-split component lies over an admissible pair.
    pub fn admissible_ses(&self, w: &SesWitness) -> Result<bool> {
        let comps = ses_components(w)?;
        for (a, row) in comps.iter().enumerate() {
            for (b, &nonsplit) in row.iter().enumerate() {
                if nonsplit && !self.admissible_class(&w.quot_parts[a], &w.sub_parts[b])? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// All pairs carrying an admissible non-split class.
    pub fn admissible_pairs(&self) -> Vec<(Interval, Interval)> {
        let t = tables(&self.q);
        let mut out = Vec::new();
        for quot in &t.intervals {
            for sub in &t.intervals {
                if t.ext(quot, sub) == 1 && self.admissible_class(quot, sub).expect("ext checked")
                {
                    out.push((*quot, *sub));
                }
            }
        }
        out
    }

    /// Relative projectives and injectives: an interval is projective when
    /// it is never the quotient of an admissible non-split class, and
    /// injective when never the sub.
    pub fn eproj_einj(&self) -> (IntervalSet, IntervalSet) {
        let pairs = self.admissible_pairs();
        let quots: BTreeSet<Interval> = pairs.iter().map(|(k, _)| *k).collect();
        let subs: BTreeSet<Interval> = pairs.iter().map(|(_, l)| *l).collect();
        let all = all_intervals(self.q.n());
        let projectives = all.iter().filter(|k| !quots.contains(k)).copied().collect();
        let injectives = all.iter().filter(|k| !subs.contains(k)).copied().collect();
        (projectives, injectives)
    }

    /// Finite necessary closure checks: every admissible class must stay
    /// admissible under pushout along canonical morphisms out of its sub
    /// and pullback along canonical morphisms into its quotient. The
    /// report is advisory; it cannot prove closure.
    pub fn validate_closure(&self) -> Result<ClosureReport> {
        let t = tables(&self.q);
        let mut violations = Vec::new();
        for (quot, sub) in self.admissible_pairs() {
            let w = realize_nonsplit(&quot, &sub, &self.q)?;
            for target in &t.intervals {
                if *target == sub || t.hom(&sub, target).is_none() {
                    continue;
                }
                let h = sum_morphism(&[sub], &[*target], &self.q, |_, _| 1);
                let pushed = pushout(&w, &h, &[*target])?;
                if !ses_splits(&pushed) && !self.admissible_class(&quot, target)? {
                    violations.push(ClosureViolation {
                        pair: (quot, sub),
                        direction: ClosureDirection::Pushout,
                        along: *target,
                        induced_pair: (quot, *target),
                    });
                }
            }
            for source in &t.intervals {
                if *source == quot || t.hom(source, &quot).is_none() {
                    continue;
                }
                let h = sum_morphism(&[*source], &[quot], &self.q, |_, _| 1);
                let pulled = pullback(&w, &h, &[*source])?;
                if !ses_splits(&pulled) && !self.admissible_class(source, &sub)? {
                    violations.push(ClosureViolation {
                        pair: (quot, sub),
                        direction: ClosureDirection::Pullback,
                        along: *source,
                        induced_pair: (*source, sub),
                    });
                }
            }
        }
        Ok(ClosureReport { violations })
    }
}

#[derive(Clone, Debug)]
pub enum StructureSpec {
    Min,
    Max,
    Diamond,
    Custom(Vec<(Interval, Interval)>),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosureDirection {
    Pushout,
    Pullback,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ClosureViolation {
    pub pair: (Interval, Interval),
    pub direction: ClosureDirection,
    pub along: Interval,
    pub induced_pair: (Interval, Interval),
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub violations: Vec<ClosureViolation>,
}

impl ClosureReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}
