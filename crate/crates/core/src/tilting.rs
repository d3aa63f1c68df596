//! Tilting objects and their mutation theory relative to an exact
//! structure: minimal approximations, single mutation steps, reachability
//! classes, the right-mutation order on tilting objects, lattice
//! congruence checking and Boolean quotient recognition.

use crate::closure::{
    candidates, cokernel_parts, covers, gen_sub, gs, kernel_parts, minimal_support, pick,
    redundancy_masks, sequence_admissible, GenSubSide,
};
use crate::error::{domain, internal, Result};
use crate::exact::ExactStructure;
use crate::oracle::{ses_from_epi, ses_from_mono, SesWitness};
use crate::quiver::{all_intervals, Interval, IntervalSet, Orientation};
use crate::tables::tables;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

/// A tilting object: a rigid interval set with exactly n members.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Tilting {
    parts: IntervalSet,
}

impl Tilting {
    pub fn new(parts: IntervalSet, q: &Orientation) -> Result<Tilting> {
        if !is_tilting(&parts, q) {
            return Err(domain(format!("{parts} is not tilting on {q}")));
        }
        Ok(Tilting { parts })
    }

    pub fn parts(&self) -> &IntervalSet {
        &self.parts
    }

    pub fn label(&self) -> String {
        let items: Vec<String> = self.parts.iter().map(|k| k.to_string()).collect();
        items.join("+")
    }
}

impl fmt::Display for Tilting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.parts)
    }
}

impl fmt::Debug for Tilting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tilting{}", self.parts)
    }
}

pub fn is_tilting(c: &IntervalSet, q: &Orientation) -> bool {
    if c.len() != q.n() || !c.valid_for(q) {
        return false;
    }
    let t = tables(q);
    c.iter().all(|k| c.iter().all(|l| t.ext(k, l) == 0))
}

/// All tilting objects, enumerated as n-cliques of the compatibility graph
/// in lexicographic order of their sorted parts.
pub fn enumerate_tiltings(q: &Orientation) -> Vec<Tilting> {
    let t = tables(q);
    let items: Vec<Interval> = all_intervals(q.n()).iter().copied().collect();
    let m = items.len();
    let compatible: Vec<Vec<bool>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| t.ext(&items[i], &items[j]) == 0 && t.ext(&items[j], &items[i]) == 0)
                .collect()
        })
        .collect();
    let n = q.n();
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    fn extend(
        items: &[Interval],
        compatible: &[Vec<bool>],
        n: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Tilting>,
    ) {
        if chosen.len() == n {
            out.push(Tilting { parts: chosen.iter().map(|&i| items[i]).collect() });
            return;
        }
        if items.len() - start < n - chosen.len() {
            return;
        }
        for i in start..items.len() {
            if chosen.iter().all(|&j| compatible[j][i]) {
                chosen.push(i);
                extend(items, compatible, n, i + 1, chosen, out);
                chosen.pop();
            }
        }
    }
    extend(&items, &compatible, n, 0, &mut chosen, &mut out);
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A minimal approximation of one interval module by the additive hull of
/// an interval set, with the data the mutation step needs.
#[derive(Clone, Debug)]
pub struct Approximation {
    pub at: Interval,
    pub side: Side,
    /// Minimal summand support of the approximation.
    pub targets: Vec<Interval>,
    /// Left approximations: a monomorphism. Right: an epimorphism.
    pub strict: bool,
    /// Whether the induced short exact sequence is admissible; false when
    /// not strict.
    pub admissible: bool,
    /// Cokernel (left) or kernel (right) parts, when strict.
    pub complement: Option<Vec<Interval>>,
}

/// Minimal left or right approximation of `u` in the additive hull of `m`,
/// built from the canonical components and minimized by factor-through
/// elimination. `None` when no nonzero component exists at all.
pub fn minimal_approximation(
    u: &Interval,
    m: &IntervalSet,
    side: Side,
    e: &ExactStructure,
) -> Result<Option<Approximation>> {
    let q = e.orientation();
    let t = tables(q);
    let gen_side = match side {
        Side::Left => GenSubSide::Sub,
        Side::Right => GenSubSide::Gen,
    };
    let cands = candidates(m, u, &t, gen_side);
    if cands.is_empty() {
        return Ok(None);
    }
    let masks = redundancy_masks(&cands, &t, gen_side);
    let support = minimal_support(&cands, &masks)?;
    let subset = pick(&cands, support);
    let strict = covers(&subset, u);
    let targets: Vec<Interval> = subset.iter().map(|(k, _)| *k).collect();
    let (admissible, complement) = if strict {
        let admissible = sequence_admissible(&targets, u, e, gen_side, None)?;
        let parts = match side {
            Side::Left => cokernel_parts(&targets, u, &t)?,
            Side::Right => kernel_parts(&targets, u, &t)?,
        };
        (admissible, Some(parts))
    } else {
        (false, None)
    };
    Ok(Some(Approximation { at: *u, side, targets, strict, admissible, complement }))
}

/// One mutation step at a summand.
#[derive(Clone, Debug)]
pub struct MutationStep {
    pub at: Interval,
    pub direction: Option<Side>,
    pub result: Tilting,
    pub exchange: Option<SesWitness>,
}

/// Exchanges `u` through the unique admissible approximation when one
/// exists; identity step otherwise. Left and right can never coexist.
pub fn mutate(t: &Tilting, u: &Interval, e: &ExactStructure) -> Result<MutationStep> {
    if !t.parts.contains(u) {
        return Err(domain(format!("{u} is not a summand of {t}")));
    }
    let q = e.orientation();
    let mut rest = t.parts.clone();
    rest.remove(u);
    let usable = |a: &Option<Approximation>| {
        a.as_ref().map_or(false, |ap| ap.strict && ap.admissible)
    };
    let left = minimal_approximation(u, &rest, Side::Left, e)?;
    let right = minimal_approximation(u, &rest, Side::Right, e)?;
    if usable(&left) && usable(&right) {
        return Err(internal(format!("left and right mutations coexist at {u} in {t}")));
    }
    let (direction, approx) = if usable(&left) {
        (Some(Side::Left), left)
    } else if usable(&right) {
        (Some(Side::Right), right)
    } else {
        return Ok(MutationStep { at: *u, direction: None, result: t.clone(), exchange: None });
    };
    let approx = approx.expect("usable");
    let mut parts = rest;
    for k in approx.complement.as_ref().expect("strict") {
        if !parts.insert(*k) {
            return Err(internal(format!("exchange collides with {k} in {t}")));
        }
    }
    if !is_tilting(&parts, q) {
        return Err(internal(format!("mutation of {t} at {u} gave non-tilting {parts}")));
    }
    let exchange = match direction.expect("chosen") {
        Side::Left => ses_from_mono(u, &approx.targets, q)?,
        Side::Right => ses_from_epi(&approx.targets, u, q)?,
    }
    .ok_or_else(|| internal("exchange sequence vanished".to_string()))?;
    Ok(MutationStep { at: *u, direction, result: Tilting { parts }, exchange: Some(exchange) })
}

/// Closure of `t` under mutation at all summands, sorted.
pub fn reachability_class(t: &Tilting, e: &ExactStructure) -> Result<Vec<Tilting>> {
    let mut seen = BTreeSet::new();
    seen.insert(t.clone());
    let mut queue = VecDeque::from([t.clone()]);
    while let Some(current) = queue.pop_front() {
        let summands: Vec<Interval> = current.parts.iter().copied().collect();
        for u in summands {
            let step = mutate(&current, &u, e)?;
            if step.direction.is_some() && seen.insert(step.result.clone()) {
                queue.push_back(step.result);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// The set of tilting objects ordered by right-mutation reachability.
/// Covers are the transitive reduction of single right mutations.
pub struct TiltingPoset {
    pub elements: Vec<Tilting>,
    pub covers: Vec<(usize, usize)>,
    leq: Vec<Vec<bool>>,
}

impl TiltingPoset {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, t: &Tilting) -> Option<usize> {
        self.elements.iter().position(|x| x == t)
    }

    /// Reflexive-transitive right-mutation reachability: `a <= b` when `a`
    /// is reachable from `b` by right mutations.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    fn bound(&self, a: usize, b: usize, lower: bool) -> Option<usize> {
        let n = self.elements.len();
        let bounds: Vec<usize> = (0..n)
            .filter(|&x| {
                if lower {
                    self.leq(x, a) && self.leq(x, b)
                } else {
                    self.leq(a, x) && self.leq(b, x)
                }
            })
            .collect();
        bounds
            .iter()
            .copied()
            .find(|&x| bounds.iter().all(|&y| if lower { self.leq(y, x) } else { self.leq(x, y) }))
    }

    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        self.bound(a, b, true)
    }

    pub fn join(&self, a: usize, b: usize) -> Option<usize> {
        self.bound(a, b, false)
    }
}

pub fn tilting_poset(e: &ExactStructure) -> Result<TiltingPoset> {
    let elements = enumerate_tiltings(e.orientation());
    let index: BTreeMap<Tilting, usize> =
        elements.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let n = elements.len();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (i, t) in elements.iter().enumerate() {
        let summands: Vec<Interval> = t.parts.iter().copied().collect();
        for u in summands {
            let step = mutate(t, &u, e)?;
            if step.direction == Some(Side::Right) {
                let j = *index
                    .get(&step.result)
                    .ok_or_else(|| internal("mutation left the tilting set".to_string()))?;
                edges.push((j, i));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut leq = vec![vec![false; n]; n];
    for i in 0..n {
        leq[i][i] = true;
    }
    for &(lo, up) in &edges {
        leq[lo][up] = true;
    }
    // transitive closure
    for k in 0..n {
        for i in 0..n {
            if leq[i][k] {
                for j in 0..n {
                    if leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && leq[i][j] && leq[j][i] {
                return Err(internal("right mutation order is not antisymmetric".to_string()));
            }
        }
    }
    let covers: Vec<(usize, usize)> = edges
        .iter()
        .copied()
        .filter(|&(lo, up)| {
            !(0..n).any(|mid| mid != lo && mid != up && leq[lo][mid] && leq[mid][up])
        })
        .collect();
    Ok(TiltingPoset { elements, covers, leq })
}

/// Class index per element for the mutation equivalence of `e`.
pub fn mutation_classes(elements: &[Tilting], e: &ExactStructure) -> Result<Vec<usize>> {
    let index: BTreeMap<Tilting, usize> =
        elements.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let mut class_of = vec![usize::MAX; elements.len()];
    let mut next = 0;
    for i in 0..elements.len() {
        if class_of[i] != usize::MAX {
            continue;
        }
        for member in reachability_class(&elements[i], e)? {
            let j = *index
                .get(&member)
                .ok_or_else(|| internal("class member outside enumeration".to_string()))?;
            class_of[j] = next;
        }
        next += 1;
    }
    Ok(class_of)
}

/// Minimum and maximum of one mutation class under right reachability.
/// Both are unique; anything else is a broken invariant. The closure
/// fixpoint of the class coincides with one-sided closures of the extrema.
pub fn class_extrema(class: &[Tilting], e: &ExactStructure) -> Result<(Tilting, Tilting)> {
    if class.is_empty() {
        return Err(domain("empty class".to_string()));
    }
    let index: BTreeMap<Tilting, usize> =
        class.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let n = class.len();
    let mut leq = vec![vec![false; n]; n];
    for i in 0..n {
        leq[i][i] = true;
        // everything right-reachable from i is below i
        let mut queue = VecDeque::from([class[i].clone()]);
        let mut seen = BTreeSet::from([class[i].clone()]);
        while let Some(current) = queue.pop_front() {
            let summands: Vec<Interval> = current.parts().iter().copied().collect();
            for u in summands {
                let step = mutate(&current, &u, e)?;
                if step.direction == Some(Side::Right) && seen.insert(step.result.clone()) {
                    let j = *index
                        .get(&step.result)
                        .ok_or_else(|| domain("class is not mutation-closed".to_string()))?;
                    leq[j][i] = true;
                    queue.push_back(step.result);
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if leq[i][k] {
                for j in 0..n {
                    if leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
    }
    let minima: Vec<usize> =
        (0..n).filter(|&i| (0..n).all(|j| j == i || !leq[j][i])).collect();
    let maxima: Vec<usize> =
        (0..n).filter(|&i| (0..n).all(|j| j == i || !leq[i][j])).collect();
    if minima.len() != 1 || maxima.len() != 1 {
        return Err(internal(format!(
            "class extrema not unique: {} minima, {} maxima",
            minima.len(),
            maxima.len()
        )));
    }
    let min = class[minima[0]].clone();
    let max = class[maxima[0]].clone();
    let fix = gs(min.parts(), e)?.fixpoint().clone();
    if fix != gen_sub(min.parts(), e, GenSubSide::Gen)? {
        return Err(internal("minimum does not generate the closure in one step".to_string()));
    }
    if fix != gen_sub(max.parts(), e, GenSubSide::Sub)? {
        return Err(internal("maximum does not cogenerate the closure in one step".to_string()));
    }
    Ok((min, max))
}

#[derive(Clone, Debug, Serialize)]
pub struct CongruenceFailure {
    pub a: usize,
    pub x: usize,
    pub b: usize,
    pub op: String,
}

/// Compatibility of an equivalence relation with meet and join. The poset
/// must be a lattice.
pub fn congruence_check(
    p: &TiltingPoset,
    class_of: &[usize],
) -> Result<(bool, Option<CongruenceFailure>)> {
    let n = p.len();
    if class_of.len() != n {
        return Err(domain("class vector length mismatch".to_string()));
    }
    let mut meet = vec![vec![0usize; n]; n];
    let mut join = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in 0..n {
            meet[a][b] = p
                .meet(a, b)
                .ok_or_else(|| domain(format!("not a lattice: no meet of {a}, {b}")))?;
            join[a][b] = p
                .join(a, b)
                .ok_or_else(|| domain(format!("not a lattice: no join of {a}, {b}")))?;
        }
    }
    for a in 0..n {
        for x in 0..n {
            if class_of[a] != class_of[x] {
                continue;
            }
            for b in 0..n {
                if class_of[join[a][b]] != class_of[join[x][b]] {
                    return Ok((false, Some(CongruenceFailure { a, x, b, op: "join".into() })));
                }
                if class_of[meet[a][b]] != class_of[meet[x][b]] {
                    return Ok((false, Some(CongruenceFailure { a, x, b, op: "meet".into() })));
                }
            }
        }
    }
    Ok((true, None))
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientReport {
    pub classes: usize,
    pub is_boolean: bool,
}

/// Builds the congruence quotient and tests isomorphism with the Boolean
/// lattice on n-1 atoms.
pub fn quotient_boolean_check(p: &TiltingPoset, class_of: &[usize]) -> Result<QuotientReport> {
    let (is_congruence, _) = congruence_check(p, class_of)?;
    if !is_congruence {
        return Err(domain("classes do not form a congruence".to_string()));
    }
    let n = p.len();
    let classes = class_of.iter().copied().max().map_or(0, |m| m + 1);
    // quotient order via joins of representatives
    let mut reps = vec![usize::MAX; classes];
    for i in 0..n {
        if reps[class_of[i]] == usize::MAX {
            reps[class_of[i]] = i;
        }
    }
    let mut leq_q = vec![vec![false; classes]; classes];
    for a in 0..classes {
        for b in 0..classes {
            let j = p
                .join(reps[a], reps[b])
                .ok_or_else(|| internal("lattice vanished after congruence check".to_string()))?;
            leq_q[a][b] = class_of[j] == b;
        }
    }
    let atoms = p.elements.first().map_or(0, |t| t.parts().len()) - 1;
    let is_boolean = boolean_isomorphic(&leq_q, atoms);
    Ok(QuotientReport { classes, is_boolean })
}

/// Backtracking isomorphism test against the Boolean lattice B_m, with
/// size, rank and degree invariants screened first.
fn boolean_isomorphic(leq: &[Vec<bool>], m: usize) -> bool {
    let n = leq.len();
    if n != 1usize << m {
        return false;
    }
    let target_leq = |a: usize, b: usize| a & b == a;
    let rank_of = |leq: &dyn Fn(usize, usize) -> bool, x: usize, n: usize| {
        // height: longest chain below x
        let mut heights = vec![0usize; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (0..n).filter(|&j| leq(j, i)).count());
        for &i in &order {
            let mut h = 0;
            for j in 0..n {
                if j != i && leq(j, i) {
                    h = h.max(heights[j] + 1);
                }
            }
            heights[i] = h;
        }
        heights[x]
    };
    let src = |a: usize, b: usize| leq[a][b];
    let src_ranks: Vec<usize> = (0..n).map(|x| rank_of(&src, x, n)).collect();
    let dst_ranks: Vec<usize> = (0..n).map(|x| rank_of(&target_leq, x, n)).collect();
    let mut src_by_rank = vec![0usize; m + 1];
    let mut dst_by_rank = vec![0usize; m + 1];
    for x in 0..n {
        if src_ranks[x] > m || dst_ranks[x] > m {
            return false;
        }
        src_by_rank[src_ranks[x]] += 1;
        dst_by_rank[dst_ranks[x]] += 1;
    }
    if src_by_rank != dst_by_rank {
        return false;
    }
    // backtracking over elements ordered by rank
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| (src_ranks[x], x));
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn assign(
        pos: usize,
        order: &[usize],
        leq: &[Vec<bool>],
        src_ranks: &[usize],
        dst_ranks: &[usize],
        image: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let x = order[pos];
        for y in 0..leq.len() {
            if used[y] || dst_ranks[y] != src_ranks[x] {
                continue;
            }
            let ok = order[..pos].iter().all(|&prev| {
                let py = image[prev];
                (leq[prev][x] == ((py & y) == py)) && (leq[x][prev] == ((y & py) == y))
            });
            if ok {
                image[x] = y;
                used[y] = true;
                if assign(pos + 1, order, leq, src_ranks, dst_ranks, image, used) {
                    return true;
                }
                image[x] = usize::MAX;
                used[y] = false;
            }
        }
        false
    }
    assign(0, &order, leq, &src_ranks, &dst_ranks, &mut image, &mut used)
}

fn fnv_label(label: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// DOT rendering of the cover diagram. Node identifiers are content
/// hashes, so diffs across runs line up. Classes, when given, become
/// fill colors.
pub fn poset_dot(p: &TiltingPoset, class_of: Option<&[usize]>) -> String {
    let mut out = String::from("digraph tiltings {\n  rankdir=BT;\n  node [shape=box];\n");
    for (i, t) in p.elements.iter().enumerate() {
        let label = t.label();
        let id = fnv_label(&label);
        let color = class_of
            .map(|c| format!(", style=filled, fillcolor=\"/set312/{}\"", c[i] % 12 + 1))
            .unwrap_or_default();
        out.push_str(&format!("  t{id:016x} [label=\"{label}\"{color}];\n"));
    }
    for &(lo, up) in &p.covers {
        let a = fnv_label(&p.elements[lo].label());
        let b = fnv_label(&p.elements[up].label());
        out.push_str(&format!("  t{a:016x} -> t{b:016x};\n"));
    }
    out.push_str("}\n");
    out
}
