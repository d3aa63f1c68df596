//! Exact-arithmetic backend: explicit representations with one rational
//! matrix per arrow, Hom-space solving, kernels and cokernels with induced
//! maps, Krull-Schmidt decomposition, short exact sequence witnesses with
//! componentwise splitness tests, Ext via projective resolutions, and
//! nilpotent endomorphism sampling over a prime field.
//!
//! Everything here is deliberately independent of the closed-form interval
//! combinatorics, so it doubles as the brute-force oracle for that layer.

use crate::error::{domain, internal, Result};
use crate::jordan::{dominance_leq_tuple, Partition, PartitionTuple};
use crate::matrix::{q_int, Mat, Q};
use crate::modp::{is_prime, ModMat};
use crate::quiver::{Interval, Orientation};
use crate::tables::tables;
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A representation of a type A quiver: a dimension per vertex and a
/// matrix per arrow, of shape `dims[target] x dims[source]`.
#[derive(Clone, PartialEq, Debug)]
pub struct MatrixRep {
    pub q: Orientation,
    pub dims: Vec<usize>,
    pub maps: Vec<Mat>,
}

impl MatrixRep {
    pub fn zero(q: &Orientation) -> MatrixRep {
        let n = q.n();
        let maps = (1..n).map(|_| Mat::zeros(0, 0)).collect();
        MatrixRep { q: q.clone(), dims: vec![0; n], maps }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn check_shapes(&self) -> bool {
        self.dims.len() == self.q.n()
            && self.maps.len() + 1 == self.q.n()
            && (1..self.q.n()).all(|a| {
                let (s, t) = self.q.arrow(a);
                self.maps[a - 1].rows() == self.dims[t - 1]
                    && self.maps[a - 1].cols() == self.dims[s - 1]
            })
    }
}

/// A morphism of representations, one block per vertex, target by source.
#[derive(Clone, Debug)]
pub struct Morphism {
    pub source: MatrixRep,
    pub target: MatrixRep,
    pub blocks: Vec<Mat>,
}

impl Morphism {
    pub fn zero(source: &MatrixRep, target: &MatrixRep) -> Morphism {
        let blocks = (0..source.q.n())
            .map(|v| Mat::zeros(target.dims[v], source.dims[v]))
            .collect();
        Morphism { source: source.clone(), target: target.clone(), blocks }
    }

    pub fn identity(rep: &MatrixRep) -> Morphism {
        let blocks = rep.dims.iter().map(|&d| Mat::identity(d)).collect();
        Morphism { source: rep.clone(), target: rep.clone(), blocks }
    }

    /// The commuting condition at every arrow.
    pub fn is_valid(&self) -> bool {
        let q = &self.source.q;
        (1..q.n()).all(|a| {
            let (s, t) = q.arrow(a);
            self.target.maps[a - 1]
                .mul(&self.blocks[s - 1])
                == self.blocks[t - 1].mul(&self.source.maps[a - 1])
        })
    }

    pub fn compose(&self, inner: &Morphism) -> Morphism {
        debug_assert_eq!(inner.target.dims, self.source.dims);
        let blocks =
            (0..self.blocks.len()).map(|v| self.blocks[v].mul(&inner.blocks[v])).collect();
        Morphism { source: inner.source.clone(), target: self.target.clone(), blocks }
    }

    pub fn add(&self, other: &Morphism) -> Morphism {
        let blocks =
            (0..self.blocks.len()).map(|v| self.blocks[v].add(&other.blocks[v])).collect();
        Morphism { source: self.source.clone(), target: self.target.clone(), blocks }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.is_zero())
    }

    pub fn injective_everywhere(&self) -> bool {
        self.blocks.iter().enumerate().all(|(v, b)| b.rank() == self.source.dims[v])
    }

    pub fn surjective_everywhere(&self) -> bool {
        self.blocks.iter().enumerate().all(|(v, b)| b.rank() == self.target.dims[v])
    }

    pub fn invert(&self) -> Result<Morphism> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (v, b) in self.blocks.iter().enumerate() {
            if !b.is_invertible() {
                return Err(internal(format!("block at vertex {} not invertible", v + 1)));
            }
            blocks.push(b.solve(&Mat::identity(b.rows())).expect("invertible"));
        }
        Ok(Morphism { source: self.target.clone(), target: self.source.clone(), blocks })
    }
}

/// Offsets of each summand inside the canonical direct sum at one vertex.
fn part_offsets(parts: &[Interval], n: usize) -> Vec<Vec<Option<usize>>> {
    let mut offsets = vec![vec![None; parts.len()]; n];
    for v in 1..=n {
        let mut next = 0usize;
        for (i, k) in parts.iter().enumerate() {
            if k.contains(v) {
                offsets[v - 1][i] = Some(next);
                next += 1;
            }
        }
    }
    offsets
}

pub fn canonical_parts_order(parts: &[Interval]) -> Vec<Interval> {
    let mut sorted = parts.to_vec();
    sorted.sort();
    sorted
}

/// Direct sum of interval modules in the canonical summand order (sorted
/// by endpoints, multiplicity kept).
pub fn build_rep(parts: &[Interval], q: &Orientation) -> MatrixRep {
    let parts = canonical_parts_order(parts);
    let n = q.n();
    for k in &parts {
        assert!(k.valid_for(q), "interval {k} out of range");
    }
    let offsets = part_offsets(&parts, n);
    let dims: Vec<usize> =
        (1..=n).map(|v| parts.iter().filter(|k| k.contains(v)).count()).collect();
    let mut maps = Vec::with_capacity(n.saturating_sub(1));
    for a in 1..n {
        let (s, t) = q.arrow(a);
        let mut m = Mat::zeros(dims[t - 1], dims[s - 1]);
        for (i, k) in parts.iter().enumerate() {
            if k.contains(s) && k.contains(t) {
                m.set(offsets[t - 1][i].unwrap(), offsets[s - 1][i].unwrap(), Q::one());
            }
        }
        maps.push(m);
    }
    MatrixRep { q: q.clone(), dims, maps }
}

/// Morphism between canonical direct sums given a scalar for each pair of
/// summands; the (i, j) component is that multiple of the canonical basis
/// morphism when Hom is nonzero.
pub fn sum_morphism(
    src_parts: &[Interval],
    dst_parts: &[Interval],
    q: &Orientation,
    coeff: impl Fn(usize, usize) -> i64,
) -> Morphism {
    let src_parts = canonical_parts_order(src_parts);
    let dst_parts = canonical_parts_order(dst_parts);
    let t = tables(q);
    let source = build_rep(&src_parts, q);
    let target = build_rep(&dst_parts, q);
    let src_off = part_offsets(&src_parts, q.n());
    let dst_off = part_offsets(&dst_parts, q.n());
    let mut blocks: Vec<Mat> = (0..q.n())
        .map(|v| Mat::zeros(target.dims[v], source.dims[v]))
        .collect();
    for (i, k) in src_parts.iter().enumerate() {
        for (j, l) in dst_parts.iter().enumerate() {
            let Some(witness) = t.hom(k, l) else { continue };
            let c = coeff(i, j);
            if c == 0 {
                continue;
            }
            for v in witness.b..=witness.e {
                let row = dst_off[v - 1][j].unwrap();
                let col = src_off[v - 1][i].unwrap();
                let cur = blocks[v - 1].at(row, col).clone();
                blocks[v - 1].set(row, col, cur + q_int(c));
            }
        }
    }
    let m = Morphism { source, target, blocks };
    debug_assert!(m.is_valid());
    m
}

/// A basis of Hom(M, N), solved from the commuting conditions with a fixed
/// variable order, so the output is deterministic.
pub fn hom_basis(m: &MatrixRep, n: &MatrixRep) -> Vec<Morphism> {
    assert_eq!(m.q, n.q);
    let nv = m.q.n();
    let var_offset: Vec<usize> = {
        let mut acc = 0;
        let mut out = Vec::with_capacity(nv);
        for v in 0..nv {
            out.push(acc);
            acc += n.dims[v] * m.dims[v];
        }
        out
    };
    let total_vars = var_offset.last().copied().unwrap_or(0)
        + n.dims.last().copied().unwrap_or(0) * m.dims.last().copied().unwrap_or(0);
    let var = |v: usize, r: usize, c: usize| var_offset[v] + r * m.dims[v] + c;

    let mut rows: Vec<Vec<Q>> = Vec::new();
    for a in 1..nv {
        let (s, t) = m.q.arrow(a);
        let (s, t) = (s - 1, t - 1);
        // N_a phi_s - phi_t M_a = 0, entry by entry
        for r in 0..n.dims[t] {
            for c in 0..m.dims[s] {
                let mut row = vec![Q::zero(); total_vars];
                for k in 0..n.dims[s] {
                    let coeff = n.maps[a - 1].at(r, k).clone();
                    if !coeff.is_zero() {
                        row[var(s, k, c)] = row[var(s, k, c)].clone() + coeff;
                    }
                }
                for k in 0..m.dims[t] {
                    let coeff = m.maps[a - 1].at(k, c).clone();
                    if !coeff.is_zero() {
                        row[var(t, r, k)] = row[var(t, r, k)].clone() - coeff;
                    }
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    let system = if rows.is_empty() {
        Mat::zeros(0, total_vars)
    } else {
        Mat::from_fn(rows.len(), total_vars, |r, c| rows[r][c].clone())
    };
    system
        .nullspace()
        .into_iter()
        .map(|vec| {
            let blocks = (0..nv)
                .map(|v| Mat::from_fn(n.dims[v], m.dims[v], |r, c| vec[var(v, r, c)].clone()))
                .collect();
            Morphism { source: m.clone(), target: n.clone(), blocks }
        })
        .collect()
}

/// Kernel with its inclusion and cokernel with its projection, with the
/// induced arrow maps on both sides.
pub fn kernel_cokernel(f: &Morphism) -> ((MatrixRep, Morphism), (MatrixRep, Morphism)) {
    (kernel(f), cokernel(f))
}

pub fn kernel(f: &Morphism) -> (MatrixRep, Morphism) {
    let q = &f.source.q;
    let nv = q.n();
    let incl_blocks: Vec<Mat> = (0..nv)
        .map(|v| {
            let basis = f.blocks[v].nullspace();
            Mat::from_fn(f.source.dims[v], basis.len(), |r, c| basis[c][r].clone())
        })
        .collect();
    let dims: Vec<usize> = incl_blocks.iter().map(|b| b.cols()).collect();
    let mut maps = Vec::with_capacity(nv.saturating_sub(1));
    for a in 1..nv {
        let (s, t) = q.arrow(a);
        let rhs = f.source.maps[a - 1].mul(&incl_blocks[s - 1]);
        let induced = incl_blocks[t - 1]
            .solve(&rhs)
            .expect("arrow maps restrict to kernels");
        maps.push(induced);
    }
    let rep = MatrixRep { q: q.clone(), dims, maps };
    let incl = Morphism { source: rep.clone(), target: f.source.clone(), blocks: incl_blocks };
    debug_assert!(incl.is_valid());
    (rep, incl)
}

pub fn cokernel(f: &Morphism) -> (MatrixRep, Morphism) {
    let q = &f.source.q;
    let nv = q.n();
    // rows of each projection block form a basis of the left nullspace
    let proj_blocks: Vec<Mat> = (0..nv)
        .map(|v| {
            let basis = f.blocks[v].transpose().nullspace();
            Mat::from_fn(basis.len(), f.target.dims[v], |r, c| basis[r][c].clone())
        })
        .collect();
    let dims: Vec<usize> = proj_blocks.iter().map(|b| b.rows()).collect();
    let mut maps = Vec::with_capacity(nv.saturating_sub(1));
    for a in 1..nv {
        let (s, t) = q.arrow(a);
        // solve C_a * P_s = P_t * N_a via transposes
        let lhs = proj_blocks[s - 1].transpose();
        let rhs = proj_blocks[t - 1].mul(&f.target.maps[a - 1]).transpose();
        let induced = lhs.solve(&rhs).expect("arrow maps descend to cokernels").transpose();
        maps.push(induced);
    }
    let rep = MatrixRep { q: q.clone(), dims, maps };
    let proj = Morphism { source: f.target.clone(), target: rep.clone(), blocks: proj_blocks };
    debug_assert!(proj.is_valid());
    (rep, proj)
}

/// Krull-Schmidt decomposition by Hom counting: multiplicities solve the
/// unitriangular system dim Hom(X_K, M) = sum_L m_L dim Hom(X_K, X_L) in a
/// topological order of the Hom relation. Returns the sorted multiset.
pub fn decompose(m: &MatrixRep) -> Result<Vec<Interval>> {
    let t = tables(&m.q);
    let order = t.topo_sorted();
    let mut mult: Vec<(Interval, usize)> = Vec::new();
    let mut residual: Vec<i64> = m.dims.iter().map(|&d| d as i64).collect();
    for k in order.iter().rev() {
        if residual.iter().all(|&d| d == 0) {
            break;
        }
        let measured = hom_basis(&build_rep(&[*k], &m.q), m).len() as i64;
        let mut known = 0i64;
        for (l, c) in &mult {
            if l != k && t.hom(k, l).is_some() {
                known += *c as i64;
            }
        }
        let m_k = measured - known;
        if m_k < 0 {
            return Err(internal(format!("negative multiplicity for {k}")));
        }
        if m_k > 0 {
            for v in k.b..=k.e {
                residual[v - 1] -= m_k;
            }
            mult.push((*k, m_k as usize));
        }
    }
    if residual.iter().any(|&d| d != 0) {
        return Err(internal("decomposition does not exhaust the dimension vector".to_string()));
    }
    let mut out = Vec::new();
    for (k, c) in mult {
        for _ in 0..c {
            out.push(k);
        }
    }
    out.sort();
    Ok(out)
}

/// An isomorphism from the canonical form of `parts` onto `m`, found as a
/// generic combination of a Hom basis.
pub fn iso_from_canonical(parts: &[Interval], m: &MatrixRep) -> Result<Morphism> {
    let p = build_rep(parts, &m.q);
    if p.dims != m.dims {
        return Err(internal("canonical form has wrong dimension vector".to_string()));
    }
    let basis = hom_basis(&p, m);
    let combine = |coeffs: &[i64]| -> Morphism {
        let mut acc = Morphism::zero(&p, m);
        for (f, &c) in basis.iter().zip(coeffs) {
            if c != 0 {
                let scaled = Morphism {
                    source: f.source.clone(),
                    target: f.target.clone(),
                    blocks: f.blocks.iter().map(|b| b.scale(&q_int(c))).collect(),
                };
                acc = acc.add(&scaled);
            }
        }
        acc
    };
    let ones = vec![1i64; basis.len()];
    let candidate = combine(&ones);
    if candidate.blocks.iter().all(|b| b.is_invertible()) {
        return Ok(candidate);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1501);
    for _ in 0..64 {
        let coeffs: Vec<i64> = (0..basis.len()).map(|_| rng.gen_range(1..=1_000_000)).collect();
        let candidate = combine(&coeffs);
        if candidate.blocks.iter().all(|b| b.is_invertible()) {
            return Ok(candidate);
        }
    }
    Err(internal("no isomorphism found between isomorphic representations".to_string()))
}

/// Surjection from the canonical sum onto a single interval module, when
/// the canonical Hom supports cover the target. All-ones coefficients are
/// tried first and verified by rank; distinct integers are the fallback.
pub fn epi_onto(parts: &[Interval], z: &Interval, q: &Orientation) -> Option<Morphism> {
    let t = tables(q);
    let parts = canonical_parts_order(parts);
    let mut covered = vec![false; z.len()];
    for k in &parts {
        if let Some(j) = t.hom(k, z) {
            for v in j.b..=j.e {
                covered[v - z.b] = true;
            }
        }
    }
    if covered.iter().any(|&c| !c) {
        return None;
    }
    let build = |coeff: &dyn Fn(usize) -> i64| {
        sum_morphism(&parts, &[*z], q, |i, _| coeff(i))
    };
    let ones = build(&|_| 1);
    if ones.surjective_everywhere() {
        return Some(ones);
    }
    let distinct = build(&|i| i as i64 + 1);
    if distinct.surjective_everywhere() {
        return Some(distinct);
    }
    None
}

/// A short exact sequence whose outer terms are kept in canonical
/// decomposed form, so part indices are meaningful and reproducible.
#[derive(Clone, Debug)]
pub struct SesWitness {
    pub sub: MatrixRep,
    pub mid: MatrixRep,
    pub quot: MatrixRep,
    pub incl: Morphism,
    pub proj: Morphism,
    pub sub_parts: Vec<Interval>,
    pub quot_parts: Vec<Interval>,
}

impl SesWitness {
    pub fn verify(&self) -> Result<()> {
        if !self.incl.is_valid() || !self.proj.is_valid() {
            return Err(internal("witness maps are not morphisms".to_string()));
        }
        if !self.incl.injective_everywhere() {
            return Err(internal("inclusion not injective".to_string()));
        }
        if !self.proj.surjective_everywhere() {
            return Err(internal("projection not surjective".to_string()));
        }
        if !self.proj.compose(&self.incl).is_zero() {
            return Err(internal("composite not zero".to_string()));
        }
        for v in 0..self.mid.dims.len() {
            if self.sub.dims[v] + self.quot.dims[v] != self.mid.dims[v] {
                return Err(internal("dimensions not additive".to_string()));
            }
        }
        Ok(())
    }

    /// Componentwise direct sum of two witnesses.
    pub fn direct_sum(&self, other: &SesWitness) -> Result<SesWitness> {
        let q = &self.mid.q;
        let mut sub_parts = self.sub_parts.clone();
        sub_parts.extend(other.sub_parts.iter().copied());
        let mut quot_parts = self.quot_parts.clone();
        quot_parts.extend(other.quot_parts.iter().copied());
        let sub_parts = canonical_parts_order(&sub_parts);
        let quot_parts = canonical_parts_order(&quot_parts);
        let sub = build_rep(&sub_parts, q);
        let quot = build_rep(&quot_parts, q);
        let mid = direct_sum_rep(&self.mid, &other.mid);
        // canonical reorder on both ends
        let reord_sub = reorder_iso(&self.sub_parts, &other.sub_parts, q)?;
        let reord_quot = reorder_iso(&self.quot_parts, &other.quot_parts, q)?;
        let incl_sum = direct_sum_morphism(&self.incl, &other.incl, &mid, None);
        let proj_sum = direct_sum_morphism(&self.proj, &other.proj, &mid, Some(&mid));
        let incl = Morphism {
            source: sub.clone(),
            target: mid.clone(),
            blocks: (0..q.n())
                .map(|v| incl_sum[v].mul(&reord_sub.1[v]))
                .collect(),
        };
        let proj = Morphism {
            source: mid.clone(),
            target: quot.clone(),
            blocks: (0..q.n())
                .map(|v| reord_quot.0[v].mul(&proj_sum[v]))
                .collect(),
        };
        let w = SesWitness { sub, mid, quot, incl, proj, sub_parts, quot_parts };
        w.verify()?;
        Ok(w)
    }
}

fn direct_sum_rep(a: &MatrixRep, b: &MatrixRep) -> MatrixRep {
    let q = &a.q;
    let dims: Vec<usize> = (0..q.n()).map(|v| a.dims[v] + b.dims[v]).collect();
    let maps = (1..q.n())
        .map(|ar| {
            let (s, t) = q.arrow(ar);
            let (s, t) = (s - 1, t - 1);
            let mut m = Mat::zeros(dims[t], dims[s]);
            for r in 0..a.dims[t] {
                for c in 0..a.dims[s] {
                    m.set(r, c, a.maps[ar - 1].at(r, c).clone());
                }
            }
            for r in 0..b.dims[t] {
                for c in 0..b.dims[s] {
                    m.set(a.dims[t] + r, a.dims[s] + c, b.maps[ar - 1].at(r, c).clone());
                }
            }
            m
        })
        .collect();
    MatrixRep { q: q.clone(), dims, maps }
}

/// Block-diagonal sum of two morphisms, as raw blocks. `mid_as_source`
/// selects whether the summed object is the source or the target.
fn direct_sum_morphism(
    f: &Morphism,
    g: &Morphism,
    mid: &MatrixRep,
    mid_as_source: Option<&MatrixRep>,
) -> Vec<Mat> {
    let nv = mid.q.n();
    (0..nv)
        .map(|v| {
            let (rows, cols) = if mid_as_source.is_some() {
                (f.target.dims[v] + g.target.dims[v], mid.dims[v])
            } else {
                (mid.dims[v], f.source.dims[v] + g.source.dims[v])
            };
            let mut m = Mat::zeros(rows, cols);
            let (r0, c0) = (0, 0);
            for r in 0..f.blocks[v].rows() {
                for c in 0..f.blocks[v].cols() {
                    m.set(r0 + r, c0 + c, f.blocks[v].at(r, c).clone());
                }
            }
            let (r1, c1) = (f.blocks[v].rows(), f.blocks[v].cols());
            for r in 0..g.blocks[v].rows() {
                for c in 0..g.blocks[v].cols() {
                    m.set(r1 + r, c1 + c, g.blocks[v].at(r, c).clone());
                }
            }
            m
        })
        .collect()
}

/// Permutation matrices that reorder the concatenation of two canonical
/// part lists into one canonical list: (to_canonical, from_canonical).
fn reorder_iso(
    first: &[Interval],
    second: &[Interval],
    q: &Orientation,
) -> Result<(Vec<Mat>, Vec<Mat>)> {
    let mut concat: Vec<Interval> = first.to_vec();
    concat.extend_from_slice(second);
    let merged = canonical_parts_order(&concat);
    // stable position of each concat part inside the merged order
    let mut taken = vec![false; merged.len()];
    let mut target_pos = Vec::with_capacity(concat.len());
    for k in &concat {
        let pos = merged
            .iter()
            .enumerate()
            .find(|(i, l)| !taken[*i] && *l == k)
            .map(|(i, _)| i)
            .ok_or_else(|| internal("reorder bookkeeping".to_string()))?;
        taken[pos] = true;
        target_pos.push(pos);
    }
    let concat_off = part_offsets(&concat, q.n());
    let merged_off = part_offsets(&merged, q.n());
    let mut to_canon = Vec::with_capacity(q.n());
    let mut from_canon = Vec::with_capacity(q.n());
    for v in 1..=q.n() {
        let dim = merged.iter().filter(|k| k.contains(v)).count();
        let mut p = Mat::zeros(dim, dim);
        for (i, k) in concat.iter().enumerate() {
            if k.contains(v) {
                let row = merged_off[v - 1][target_pos[i]].unwrap();
                let col = concat_off[v - 1][i].unwrap();
                p.set(row, col, Q::one());
            }
        }
        from_canon.push(p.transpose());
        to_canon.push(p);
    }
    Ok((to_canon, from_canon))
}

/// Solve for a morphism `phi: source -> target` subject to extra linear
/// constraints `phi . pre_i = rhs_i`.
fn solve_constrained_morphism(
    source: &MatrixRep,
    target: &MatrixRep,
    constraints: &[(&Morphism, &Morphism)],
) -> Option<Morphism> {
    let nv = source.q.n();
    let var_offset: Vec<usize> = {
        let mut acc = 0;
        let mut out = Vec::with_capacity(nv);
        for v in 0..nv {
            out.push(acc);
            acc += target.dims[v] * source.dims[v];
        }
        out
    };
    let total = var_offset.last().copied().unwrap_or(0)
        + target.dims.last().copied().unwrap_or(0) * source.dims.last().copied().unwrap_or(0);
    let var = |v: usize, r: usize, c: usize| var_offset[v] + r * source.dims[v] + c;
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut rhs: Vec<Q> = Vec::new();
    for a in 1..nv {
        let (s, t) = source.q.arrow(a);
        let (s, t) = (s - 1, t - 1);
        for r in 0..target.dims[t] {
            for c in 0..source.dims[s] {
                let mut row = vec![Q::zero(); total];
                for k in 0..target.dims[s] {
                    let coeff = target.maps[a - 1].at(r, k).clone();
                    if !coeff.is_zero() {
                        row[var(s, k, c)] = row[var(s, k, c)].clone() + coeff;
                    }
                }
                for k in 0..source.dims[t] {
                    let coeff = source.maps[a - 1].at(k, c).clone();
                    if !coeff.is_zero() {
                        row[var(t, r, k)] = row[var(t, r, k)].clone() - coeff;
                    }
                }
                rows.push(row);
                rhs.push(Q::zero());
            }
        }
    }
    for (pre, want) in constraints {
        for v in 0..nv {
            for r in 0..target.dims[v] {
                for c in 0..pre.source.dims[v] {
                    let mut row = vec![Q::zero(); total];
                    for k in 0..source.dims[v] {
                        let coeff = pre.blocks[v].at(k, c).clone();
                        if !coeff.is_zero() {
                            row[var(v, r, k)] = row[var(v, r, k)].clone() + coeff;
                        }
                    }
                    rows.push(row);
                    rhs.push(want.blocks[v].at(r, c).clone());
                }
            }
        }
    }
    let system = Mat::from_fn(rows.len(), total, |r, c| rows[r][c].clone());
    let rhs_m = Mat::from_fn(rhs.len(), 1, |r, _| rhs[r].clone());
    let sol = system.solve(&rhs_m)?;
    let blocks = (0..nv)
        .map(|v| Mat::from_fn(target.dims[v], source.dims[v], |r, c| sol.at(var(v, r, c), 0).clone()))
        .collect();
    Some(Morphism { source: source.clone(), target: target.clone(), blocks })
}

/// Block projection of a canonical sum onto one summand.
fn canonical_projection(parts: &[Interval], index: usize, q: &Orientation) -> Morphism {
    sum_morphism(parts, &[parts[index]], q, |i, _| (i == index) as i64)
}

/// Witness of the sequence induced by the canonical surjection of a sum of
/// interval modules onto one interval module; `None` when no surjection
/// exists.
pub fn ses_from_epi(parts: &[Interval], z: &Interval, q: &Orientation) -> Result<Option<SesWitness>> {
    let Some(proj) = epi_onto(parts, z, q) else {
        return Ok(None);
    };
    let (ker_rep, ker_incl) = kernel(&proj);
    let sub_parts = decompose(&ker_rep)?;
    let iso = iso_from_canonical(&sub_parts, &ker_rep)?;
    let incl = ker_incl.compose(&iso);
    let w = SesWitness {
        sub: incl.source.clone(),
        mid: proj.source.clone(),
        quot: proj.target.clone(),
        incl,
        proj,
        sub_parts,
        quot_parts: vec![*z],
    };
    w.verify()?;
    Ok(Some(w))
}

/// Dual construction: canonical injection of one interval module into a
/// sum, with the cokernel put in canonical form.
pub fn ses_from_mono(z: &Interval, parts: &[Interval], q: &Orientation) -> Result<Option<SesWitness>> {
    let t = tables(q);
    let parts = canonical_parts_order(parts);
    let mut covered = vec![false; z.len()];
    for k in &parts {
        if let Some(j) = t.hom(z, k) {
            for v in j.b..=j.e {
                covered[v - z.b] = true;
            }
        }
    }
    if covered.iter().any(|&c| !c) {
        return Ok(None);
    }
    let mut incl = sum_morphism(&[*z], &parts, q, |_, _| 1);
    if !incl.injective_everywhere() {
        incl = sum_morphism(&[*z], &parts, q, |_, j| j as i64 + 1);
        if !incl.injective_everywhere() {
            return Ok(None);
        }
    }
    let (coker_rep, coker_proj) = cokernel(&incl);
    let quot_parts = decompose(&coker_rep)?;
    let iso = iso_from_canonical(&quot_parts, &coker_rep)?;
    let proj = iso.invert()?.compose(&coker_proj);
    let w = SesWitness {
        sub: incl.source.clone(),
        mid: incl.target.clone(),
        quot: proj.target.clone(),
        incl,
        proj,
        sub_parts: vec![*z],
        quot_parts,
    };
    w.verify()?;
    Ok(Some(w))
}

/// Componentwise splitness of the extension class of a witness. Entry
/// (a, b) is true when the (quot_a, sub_b) component is non-split: the
/// projection of the sub onto part b fails to extend over the inclusion
/// after pulling back along quot part a.
pub fn ses_components(w: &SesWitness) -> Result<Vec<Vec<bool>>> {
    let q = &w.mid.q;
    let t = tables(q);
    let mut out = vec![vec![false; w.sub_parts.len()]; w.quot_parts.len()];
    for (a, quot_part) in w.quot_parts.iter().enumerate() {
        if w.sub_parts.iter().all(|s| t.ext(quot_part, s) == 0) {
            continue;
        }
        // pull back along the inclusion of quot part a: the kernel of the
        // projection onto the other quot parts
        let rest: Vec<Interval> = w
            .quot_parts
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != a)
            .map(|(_, k)| *k)
            .collect();
        let rest_proj = sum_morphism(&w.quot_parts, &rest, q, |i, j| {
            let src_idx = i;
            // canonical order of `rest` matches quot_parts with a removed
            let mapped = if src_idx < a { Some(src_idx) } else { src_idx.checked_sub(1) };
            (mapped == Some(j) && src_idx != a) as i64
        });
        let to_rest = rest_proj.compose(&w.proj);
        let (pb_rep, pb_incl) = kernel(&to_rest);
        // the sub factors through the pullback
        let kappa_blocks: Vec<Mat> = (0..q.n())
            .map(|v| pb_incl.blocks[v].solve(&w.incl.blocks[v]).expect("sub lands in pullback"))
            .collect();
        let kappa =
            Morphism { source: w.sub.clone(), target: pb_rep.clone(), blocks: kappa_blocks };
        debug_assert!(kappa.is_valid());
        for (b, sub_part) in w.sub_parts.iter().enumerate() {
            if t.ext(quot_part, sub_part) == 0 {
                continue;
            }
            let pi_b = canonical_projection(&w.sub_parts, b, q);
            let extends =
                solve_constrained_morphism(&pb_rep, &pi_b.target, &[(&kappa, &pi_b)]).is_some();
            out[a][b] = !extends;
        }
    }
    Ok(out)
}

/// Whether the witness splits globally: a retraction of the inclusion
/// exists.
pub fn ses_splits(w: &SesWitness) -> bool {
    let id = Morphism::identity(&w.sub);
    solve_constrained_morphism(&w.mid, &w.sub, &[(&w.incl, &id)]).is_some()
}

/// Explicit witness of the unique non-split class with the given quotient
/// and sub, built from the classified middle with a small sign search.
pub fn realize_nonsplit(quot: &Interval, sub: &Interval, q: &Orientation) -> Result<SesWitness> {
    let shape = crate::quiver::classify_nonsplit(quot, sub, q)?;
    let middle = canonical_parts_order(&shape.middle);
    let signs: &[&[i64]] = if middle.len() == 1 { &[&[1]] } else { &[&[1, 1], &[1, -1]] };
    for incl_sign in signs {
        for proj_sign in signs {
            let incl = sum_morphism(&[*sub], &middle, q, |_, j| incl_sign[j]);
            let proj = sum_morphism(&middle, &[*quot], q, |i, _| proj_sign[i]);
            let w = SesWitness {
                sub: incl.source.clone(),
                mid: incl.target.clone(),
                quot: proj.target.clone(),
                incl,
                proj,
                sub_parts: vec![*sub],
                quot_parts: vec![*quot],
            };
            if w.verify().is_ok() && !ses_splits(&w) {
                return Ok(w);
            }
        }
    }
    Err(internal(format!("could not realize the class quot={quot} sub={sub} on {q}")))
}

/// Pushout of the witness along a morphism out of its sub term. The result
/// replaces the sub by the target of `h`.
pub fn pushout(w: &SesWitness, h: &Morphism, new_sub_parts: &[Interval]) -> Result<SesWitness> {
    let q = &w.mid.q;
    // cokernel of (h, -incl): sub -> B (+) mid
    let bm = direct_sum_rep(&h.target, &w.mid);
    let stack_blocks: Vec<Mat> = (0..q.n())
        .map(|v| {
            let neg = w.incl.blocks[v].scale(&-Q::one());
            h.blocks[v].vstack(&neg)
        })
        .collect();
    let stacked = Morphism { source: w.sub.clone(), target: bm.clone(), blocks: stack_blocks };
    debug_assert!(stacked.is_valid());
    let (po_rep, po_proj) = cokernel(&stacked);
    // B -> PO
    let embed_b = Morphism {
        source: h.target.clone(),
        target: po_rep.clone(),
        blocks: (0..q.n())
            .map(|v| {
                let mut m = Mat::zeros(bm.dims[v], h.target.dims[v]);
                for r in 0..h.target.dims[v] {
                    m.set(r, r, Q::one());
                }
                po_proj.blocks[v].mul(&m)
            })
            .collect(),
    };
    // PO -> quot, induced by (0, proj)
    let proj_blocks: Vec<Mat> = (0..q.n())
        .map(|v| {
            let zero = Mat::zeros(w.quot.dims[v], h.target.dims[v]);
            let zero_proj = zero.hstack(&w.proj.blocks[v]);
            // solve X * po_proj = zero_proj
            po_proj.blocks[v]
                .transpose()
                .solve(&zero_proj.transpose())
                .expect("projection descends to the pushout")
                .transpose()
        })
        .collect();
    let proj = Morphism { source: po_rep.clone(), target: w.quot.clone(), blocks: proj_blocks };
    let w2 = SesWitness {
        sub: h.target.clone(),
        mid: po_rep,
        quot: w.quot.clone(),
        incl: embed_b,
        proj,
        sub_parts: new_sub_parts.to_vec(),
        quot_parts: w.quot_parts.clone(),
    };
    w2.verify()?;
    Ok(w2)
}

/// Pullback of the witness along a morphism into its quotient term.
pub fn pullback(w: &SesWitness, h: &Morphism, new_quot_parts: &[Interval]) -> Result<SesWitness> {
    let q = &w.mid.q;
    // kernel of (proj, -h): mid (+) A -> quot
    let ma = direct_sum_rep(&w.mid, &h.source);
    let glue_blocks: Vec<Mat> = (0..q.n())
        .map(|v| {
            let neg = h.blocks[v].scale(&-Q::one());
            w.proj.blocks[v].hstack(&neg)
        })
        .collect();
    let glue = Morphism { source: ma.clone(), target: w.quot.clone(), blocks: glue_blocks };
    debug_assert!(glue.is_valid());
    let (pb_rep, pb_incl) = kernel(&glue);
    // PB -> A
    let onto_a = Morphism {
        source: pb_rep.clone(),
        target: h.source.clone(),
        blocks: (0..q.n())
            .map(|v| {
                let mut pick = Mat::zeros(h.source.dims[v], ma.dims[v]);
                for r in 0..h.source.dims[v] {
                    pick.set(r, w.mid.dims[v] + r, Q::one());
                }
                pick.mul(&pb_incl.blocks[v])
            })
            .collect(),
    };
    // sub -> PB through (incl, 0)
    let incl_blocks: Vec<Mat> = (0..q.n())
        .map(|v| {
            let zero = Mat::zeros(h.source.dims[v], w.sub.dims[v]);
            let into_ma = w.incl.blocks[v].vstack(&zero);
            pb_incl.blocks[v].solve(&into_ma).expect("sub lands in pullback")
        })
        .collect();
    let incl = Morphism { source: w.sub.clone(), target: pb_rep.clone(), blocks: incl_blocks };
    let w2 = SesWitness {
        sub: w.sub.clone(),
        mid: pb_rep,
        quot: h.source.clone(),
        incl,
        proj: onto_a,
        sub_parts: w.sub_parts.clone(),
        quot_parts: new_quot_parts.to_vec(),
    };
    w2.verify()?;
    Ok(w2)
}

/// Interval of vertices reachable from `v` along arrows.
pub fn reachable_interval(v: usize, q: &Orientation) -> Interval {
    let mut lo = v;
    while lo > 1 && q.dir(lo - 1) == crate::quiver::Dir::L {
        lo -= 1;
    }
    let mut hi = v;
    while hi < q.n() && q.dir(hi) == crate::quiver::Dir::R {
        hi += 1;
    }
    Interval { b: lo, e: hi }
}

/// Projective cover: one projective per top generator, with the covering
/// morphism assembled from path maps.
pub fn projective_cover(m: &MatrixRep) -> Result<(Vec<Interval>, Morphism)> {
    let q = &m.q;
    let nv = q.n();
    // generators: a complement of the sum of incoming images at each vertex
    let mut gens: Vec<(usize, Vec<Q>)> = Vec::new();
    for v in 1..=nv {
        let incoming: Vec<&Mat> = (1..nv)
            .filter(|&a| q.arrow(a).1 == v)
            .map(|a| &m.maps[a - 1])
            .collect();
        let dim = m.dims[v - 1];
        let mut span = Mat::zeros(dim, 0);
        for inc in incoming {
            span = span.hstack(inc);
        }
        let mut rank = span.rank();
        for i in 0..dim {
            if rank == dim {
                break;
            }
            let mut e = Mat::zeros(dim, 1);
            e.set(i, 0, Q::one());
            let bigger = span.hstack(&e);
            if bigger.rank() > rank {
                rank = bigger.rank();
                span = bigger;
                gens.push((v, (0..dim).map(|r| if r == i { Q::one() } else { Q::zero() }).collect()));
            }
        }
    }
    // order the cover parts canonically, carrying their generators along
    let mut tagged: Vec<(Interval, usize, Vec<Q>)> =
        gens.into_iter().map(|(v, vec)| (reachable_interval(v, q), v, vec)).collect();
    tagged.sort_by_key(|(k, v, _)| (*k, *v));
    let parts: Vec<Interval> = tagged.iter().map(|(k, _, _)| *k).collect();
    let p0 = build_rep(&parts, q);
    let offsets = part_offsets(&parts, nv);
    let mut blocks: Vec<Mat> = (0..nv).map(|v| Mat::zeros(m.dims[v], p0.dims[v])).collect();
    for (i, (part, v0, gen)) in tagged.iter().enumerate() {
        // image of the generator at every vertex of the part
        let mut images: Vec<Option<Vec<Q>>> = vec![None; nv];
        images[v0 - 1] = Some(gen.clone());
        for v in (*v0 + 1)..=part.e {
            let prev = images[v - 2].clone().expect("walk order");
            let col = apply_map(&m.maps[v - 2], &prev);
            images[v - 1] = Some(col);
        }
        for v in (part.b..*v0).rev() {
            let prev = images[v].clone().expect("walk order");
            let col = apply_map(&m.maps[v - 1], &prev);
            images[v - 1] = Some(col);
        }
        for v in part.b..=part.e {
            let col = images[v - 1].as_ref().expect("covered vertex");
            let c = offsets[v - 1][i].expect("part contains vertex");
            for (r, val) in col.iter().enumerate() {
                blocks[v - 1].set(r, c, val.clone());
            }
        }
    }
    let cover = Morphism { source: p0, target: m.clone(), blocks };
    if !cover.is_valid() {
        return Err(internal("cover map does not commute".to_string()));
    }
    if !cover.surjective_everywhere() {
        return Err(internal("cover map not surjective".to_string()));
    }
    Ok((parts, cover))
}

fn apply_map(m: &Mat, v: &[Q]) -> Vec<Q> {
    (0..m.rows())
        .map(|r| {
            let mut acc = Q::zero();
            for (c, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    acc += m.at(r, c) * x;
                }
            }
            acc
        })
        .collect()
}

/// dim Ext^1(M, N) from a projective resolution of M. Hereditary, so one
/// step suffices.
pub fn ext_dim_resolution(m: &MatrixRep, n: &MatrixRep) -> Result<usize> {
    if m.total_dim() == 0 {
        return Ok(0);
    }
    let (_, cover) = projective_cover(m)?;
    let (p1, _) = kernel(&cover);
    let hom_p1 = hom_basis(&p1, n).len();
    let hom_p0 = hom_basis(&cover.source, n).len();
    let hom_m = hom_basis(m, n).len();
    let ext = hom_p1 as i64 - hom_p0 as i64 + hom_m as i64;
    if ext < 0 {
        return Err(internal("negative Ext dimension".to_string()));
    }
    Ok(ext as usize)
}

/// A sampled nilpotent endomorphism together with its Jordan data.
#[derive(Clone, Debug)]
pub struct NilpotentSample {
    pub rep: MatrixRep,
    pub blocks: Vec<ModMat>,
    pub jf: PartitionTuple,
}

fn jordan_partition(n: &ModMat) -> Partition {
    let d = n.rows();
    if d == 0 {
        return Partition::new(vec![]).expect("empty");
    }
    let mut ranks = vec![d];
    let mut power = n.clone();
    loop {
        let r = power.rank();
        ranks.push(r);
        if r == 0 {
            break;
        }
        power = power.mul(n);
    }
    // ranks[s] = rank(N^s); blocks of size >= s: ranks[s-1] - ranks[s]
    let mut counts = Vec::new();
    for s in 1..ranks.len() {
        counts.push(ranks[s - 1] - ranks[s]);
    }
    let mut parts = Vec::new();
    for (s, _) in counts.iter().enumerate() {
        let here = counts[s];
        let next = counts.get(s + 1).copied().unwrap_or(0);
        for _ in 0..(here - next) {
            parts.push(s + 1);
        }
    }
    Partition::from_unsorted(parts)
}

/// Samples nilpotent endomorphisms of the direct sum of the given interval
/// modules over F_p and returns the dominance maximum of the observed
/// Jordan forms. Each endomorphism is a random radical element plus random
/// strictly upper triangular parts inside each isotypic block; both kinds
/// together reach every Jordan form up to conjugacy.
pub fn sample_generic_nilpotent(
    parts: &[Interval],
    q: &Orientation,
    prime: u64,
    trials: u64,
    seed: u64,
) -> Result<NilpotentSample> {
    if prime < 97 {
        return Err(domain(format!("prime {prime} too small, need >= 97")));
    }
    if !is_prime(prime) {
        return Err(domain(format!("{prime} is not prime")));
    }
    if trials == 0 {
        return Err(domain("need at least one trial".to_string()));
    }
    let parts = canonical_parts_order(parts);
    let rep = build_rep(&parts, q);
    let t = tables(q);
    let nv = q.n();
    let offsets = part_offsets(&parts, nv);
    // basis of the nilpotent cone directions: all radical canonical maps,
    // plus upper triangular identifications between equal summands
    let mut directions: Vec<(usize, usize, Interval)> = Vec::new();
    for i in 0..parts.len() {
        for j in 0..parts.len() {
            if i == j {
                continue;
            }
            if parts[i] == parts[j] {
                if i < j {
                    directions.push((i, j, parts[i]));
                }
                continue;
            }
            if let Some(w) = t.hom(&parts[i], &parts[j]) {
                directions.push((i, j, w));
            }
        }
    }
    let arrow_maps: Vec<ModMat> = (1..nv)
        .map(|a| {
            let (s, tt) = q.arrow(a);
            let mut m = ModMat::zeros(prime, rep.dims[tt - 1], rep.dims[s - 1]);
            for (i, k) in parts.iter().enumerate() {
                if k.contains(s) && k.contains(tt) {
                    m.set(offsets[tt - 1][i].unwrap(), offsets[s - 1][i].unwrap(), 1);
                }
            }
            m
        })
        .collect();

    let mut best: Option<(PartitionTuple, Vec<ModMat>)> = None;
    let mut maxima: Vec<PartitionTuple> = Vec::new();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let mut blocks: Vec<ModMat> =
            (0..nv).map(|v| ModMat::zeros(prime, rep.dims[v], rep.dims[v])).collect();
        for (i, j, w) in &directions {
            let c = rng.gen_range(0..prime);
            if c == 0 {
                continue;
            }
            for v in w.b..=w.e {
                blocks[v - 1].add_at(
                    offsets[v - 1][*j].unwrap(),
                    offsets[v - 1][*i].unwrap(),
                    c,
                );
            }
        }
        // endomorphism and nilpotency checks
        for a in 1..nv {
            let (s, tt) = q.arrow(a);
            let left = arrow_maps[a - 1].mul(&blocks[s - 1]);
            let right = blocks[tt - 1].mul(&arrow_maps[a - 1]);
            if left != right {
                return Err(internal("sampled endomorphism does not commute".to_string()));
            }
        }
        for b in &blocks {
            let d = b.rows();
            if d == 0 {
                continue;
            }
            let mut pw = b.clone();
            for _ in 1..d {
                pw = pw.mul(b);
            }
            if !pw.is_zero() {
                return Err(internal("sampled endomorphism not nilpotent".to_string()));
            }
        }
        let jf = PartitionTuple(blocks.iter().map(jordan_partition).collect());
        // keep the set of dominance-maximal observations
        let mut dominated = false;
        maxima.retain(|m| {
            match dominance_leq_tuple(m, &jf).expect("same size vectors") {
                Some(true) => false,
                Some(false) => {
                    dominated = true;
                    true
                }
                None => true,
            }
        });
        if !dominated && !maxima.contains(&jf) {
            maxima.push(jf.clone());
            if best.as_ref().map_or(true, |(b, _)| b != &jf) {
                best = Some((jf, blocks));
            }
        }
    }
    if maxima.len() > 1 {
        let shown: Vec<String> = maxima.iter().map(|m| m.to_string()).collect();
        return Err(crate::error::Error::Inconclusive(format!(
            "dominance-incomparable maxima: {}; raise trials or the prime",
            shown.join(" vs ")
        )));
    }
    let target = maxima.pop().expect("at least one trial");
    let (jf, blocks) = match best {
        Some((b, blocks)) if b == target => (b, blocks),
        _ => return Err(internal("witness bookkeeping for the maximal trial".to_string())),
    };
    Ok(NilpotentSample { rep, blocks, jf })
}
