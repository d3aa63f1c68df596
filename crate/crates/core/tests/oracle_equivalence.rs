//! Cross-checks between the closed-form interval combinatorics and the
//! matrix backend, which must agree everywhere they overlap.

use qe_core::closure::{gen_sub, GenSubSide};
use qe_core::exact::ExactStructure;
use qe_core::oracle::{
    build_rep, decompose, epi_onto, ext_dim_resolution, hom_basis, realize_nonsplit,
    ses_components, ses_from_epi, ses_from_mono, ses_splits,
};
use qe_core::quiver::{all_intervals, ext_dim, hom, iv, Interval, IntervalSet, Orientation};

fn orientations(n: usize) -> Vec<Orientation> {
    if n == 1 {
        return vec![Orientation::parse("").unwrap()];
    }
    (0..(1u32 << (n - 1)))
        .map(|mask| {
            let word: String =
                (0..n - 1).map(|i| if mask >> i & 1 == 1 { 'L' } else { 'R' }).collect();
            Orientation::parse(&word).unwrap()
        })
        .collect()
}

#[test]
fn hom_and_ext_tables_match_matrices() {
    for n in 1..=5 {
        for q in orientations(n) {
            let intervals: Vec<Interval> = all_intervals(n).iter().copied().collect();
            for k in &intervals {
                let xk = build_rep(&[*k], &q);
                for l in &intervals {
                    let xl = build_rep(&[*l], &q);
                    let combinatorial = hom(k, l, &q).is_some() as usize;
                    let measured = hom_basis(&xk, &xl).len();
                    assert_eq!(combinatorial, measured, "hom {k} -> {l} on {q}");
                    let resolution = ext_dim_resolution(&xk, &xl).unwrap();
                    assert_eq!(
                        ext_dim(k, l, &q).unwrap(),
                        resolution,
                        "ext quot={k} sub={l} on {q}"
                    );
                }
            }
        }
    }
}

#[test]
fn hom_dimension_is_additive_over_sums() {
    let q = Orientation::parse("RLR").unwrap();
    let intervals: Vec<Interval> = all_intervals(4).iter().copied().collect();
    let sums = [
        vec![iv(1, 2), iv(2, 4)],
        vec![iv(1, 1), iv(1, 4), iv(3, 3)],
        vec![iv(2, 2), iv(2, 2), iv(2, 3)],
    ];
    for parts in &sums {
        let m = build_rep(parts, &q);
        for l in &intervals {
            let xl = build_rep(&[*l], &q);
            let expected: usize =
                parts.iter().map(|k| hom(k, l, &q).is_some() as usize).sum();
            assert_eq!(hom_basis(&m, &xl).len(), expected);
            let expected: usize =
                parts.iter().map(|k| hom(l, k, &q).is_some() as usize).sum();
            assert_eq!(hom_basis(&xl, &m).len(), expected);
        }
    }
}

#[test]
fn decompose_round_trips_multisets() {
    for n in 2..=5 {
        for q in orientations(n).into_iter().take(4) {
            let intervals: Vec<Interval> = all_intervals(n).iter().copied().collect();
            // a few deterministic multisets of total dimension <= 12
            let picks = [
                vec![0usize, 1, 2],
                vec![0, 0, 3 % intervals.len()],
                vec![1, 4 % intervals.len(), 2, 2],
            ];
            for pick in &picks {
                let mut parts: Vec<Interval> = pick.iter().map(|&i| intervals[i]).collect();
                parts.sort();
                let total: usize = parts.iter().map(|k| k.len()).sum();
                if total > 12 {
                    continue;
                }
                let m = build_rep(&parts, &q);
                assert_eq!(decompose(&m).unwrap(), parts);
            }
        }
    }
}

#[test]
fn epi_presence_matches_support_covering() {
    let q = Orientation::parse("RLRR").unwrap();
    let intervals: Vec<Interval> = all_intervals(5).iter().copied().collect();
    for z in &intervals {
        for a in &intervals {
            for b in &intervals {
                let parts = vec![*a, *b];
                let covered = (z.b..=z.e).all(|v| {
                    [a, b].iter().any(|k| {
                        hom(k, z, &q).map_or(false, |j| j.contains(v))
                    })
                });
                assert_eq!(epi_onto(&parts, z, &q).is_some(), covered, "{a},{b} onto {z}");
            }
        }
    }
}

#[test]
fn witnesses_split_iff_all_components_split() {
    let q = Orientation::parse("RLR").unwrap();
    let intervals: Vec<Interval> = all_intervals(4).iter().copied().collect();
    let mut checked = 0;
    for z in &intervals {
        for a in &intervals {
            for b in &intervals {
                if a > b {
                    continue;
                }
                let parts = vec![*a, *b];
                if let Some(w) = ses_from_epi(&parts, z, &q).unwrap() {
                    let comps = ses_components(&w).unwrap();
                    let all_split = comps.iter().all(|row| row.iter().all(|&x| !x));
                    assert_eq!(ses_splits(&w), all_split, "epi {a}+{b} onto {z}");
                    checked += 1;
                }
                if let Some(w) = ses_from_mono(z, &parts, &q).unwrap() {
                    let comps = ses_components(&w).unwrap();
                    let all_split = comps.iter().all(|row| row.iter().all(|&x| !x));
                    assert_eq!(ses_splits(&w), all_split, "mono {z} into {a}+{b}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn nonsplit_realizations_are_nonsplit() {
    for n in 2..=4 {
        for q in orientations(n) {
            let intervals: Vec<Interval> = all_intervals(n).iter().copied().collect();
            for k in &intervals {
                for l in &intervals {
                    if ext_dim(k, l, &q).unwrap() == 1 {
                        let w = realize_nonsplit(k, l, &q).unwrap();
                        assert!(!ses_splits(&w));
                        let middle_dim: usize = w.mid.dims.iter().sum();
                        assert_eq!(middle_dim, k.len() + l.len());
                    }
                }
            }
        }
    }
}

/// Brute-force enumeration of admissible one-sided sequences from a seed,
/// judged purely by the matrix witness, compared against `gen_sub`.
#[test]
fn gen_sub_agrees_with_enumeration() {
    let cases = [
        ("RR", vec![iv(2, 2), iv(1, 3)]),
        ("RR", vec![iv(2, 3), iv(1, 2)]),
        ("RLR", vec![iv(1, 2), iv(2, 2), iv(2, 4), iv(4, 4)]),
        ("RLR", vec![iv(1, 1), iv(2, 3), iv(1, 4)]),
        ("LRL", vec![iv(1, 2), iv(3, 4), iv(2, 3)]),
    ];
    for (word, seed) in &cases {
        let q = Orientation::parse(word).unwrap();
        let seed_set: IntervalSet = seed.iter().copied().collect();
        for spec in ["min", "max", "diamond"] {
            let e = match spec {
                "min" => ExactStructure::min(q.clone()),
                "max" => ExactStructure::max(q.clone()),
                _ => ExactStructure::diamond(q.clone()).unwrap(),
            };
            let fast_gen = gen_sub(&seed_set, &e, GenSubSide::Gen).unwrap();
            let fast_sub = gen_sub(&seed_set, &e, GenSubSide::Sub).unwrap();
            let mut slow_gen = seed_set.clone();
            let mut slow_sub = seed_set.clone();
            let members: Vec<Interval> = seed_set.iter().copied().collect();
            let multisets = bounded_multisets(&members, 14);
            for z in all_intervals(q.n()).iter() {
                'outer_gen: for parts in &multisets {
                    if let Some(w) = ses_from_epi(parts, z, &q).unwrap() {
                        if e.admissible_ses(&w).unwrap() {
                            slow_gen.insert(*z);
                            break 'outer_gen;
                        }
                    }
                }
                'outer_sub: for parts in &multisets {
                    if let Some(w) = ses_from_mono(z, parts, &q).unwrap() {
                        if e.admissible_ses(&w).unwrap() {
                            slow_sub.insert(*z);
                            break 'outer_sub;
                        }
                    }
                }
            }
            assert_eq!(fast_gen, slow_gen, "gen on {word} seed {seed_set} structure {spec}");
            assert_eq!(fast_sub, slow_sub, "sub on {word} seed {seed_set} structure {spec}");
        }
    }
}

fn bounded_multisets(members: &[Interval], max_dim: usize) -> Vec<Vec<Interval>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn go(
        members: &[Interval],
        idx: usize,
        room: usize,
        current: &mut Vec<Interval>,
        out: &mut Vec<Vec<Interval>>,
    ) {
        if idx == members.len() {
            if !current.is_empty() {
                out.push(current.clone());
            }
            return;
        }
        go(members, idx + 1, room, current, out);
        let cost = members[idx].len();
        let mut copies = 0;
        let mut left = room;
        while left >= cost {
            current.push(members[idx]);
            left -= cost;
            copies += 1;
            go(members, idx + 1, left, current, out);
        }
        for _ in 0..copies {
            current.pop();
        }
    }
    go(members, 0, max_dim, &mut current, &mut out);
    out
}
