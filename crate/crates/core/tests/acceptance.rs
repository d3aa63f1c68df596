//! Acceptance suite. Each test prints one pass/fail line; run with
//! `cargo test -p qe-core --test acceptance -- --nocapture` to see them
//! all. Runtime bounds are asserted alongside the mathematical content.

use qe_core::closure::{ck, gs, is_e_adapted, is_extension_closed};
use qe_core::exact::ExactStructure;
use qe_core::jordan::{genjf_estimate, jr_probe, maximal_cjr_pairs, pair_constructions, PartitionTuple};
use qe_core::oracle::{build_rep, ext_dim_resolution, hom_basis};
use qe_core::quiver::{all_intervals, ext_dim, hom, iv, Interval, IntervalSet, Orientation};
use qe_core::tilting::{
    congruence_check, enumerate_tiltings, mutation_classes, quotient_boolean_check,
    reachability_class, tilting_poset, Tilting,
};
use std::collections::BTreeSet;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

fn run(label: &str, bound: Duration, body: impl FnOnce() + std::panic::UnwindSafe) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    match outcome {
        Ok(()) if elapsed <= bound => {
            println!("criterion {label}: PASS ({elapsed:.2?}, bound {bound:.2?})");
        }
        Ok(()) => {
            println!("criterion {label}: FAIL (over time: {elapsed:.2?} > {bound:.2?})");
            panic!("criterion {label} exceeded its runtime bound");
        }
        Err(cause) => {
            println!("criterion {label}: FAIL ({elapsed:.2?})");
            resume_unwind(cause);
        }
    }
}

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

fn set(items: &[(usize, usize)]) -> IntervalSet {
    items.iter().map(|&(b, e)| iv(b, e)).collect()
}

fn catalan(n: usize) -> usize {
    let mut c = vec![0usize; n + 1];
    c[0] = 1;
    for i in 1..=n {
        for j in 0..i {
            c[i] += c[j] * c[i - 1 - j];
        }
    }
    c[n]
}

#[test]
fn criterion_01_gs_figure_a7() {
    run("1 (A7 closure trace)", Duration::from_secs(1), || {
        let q = Orientation::parse("RLRRLR").unwrap();
        let e = ExactStructure::diamond(q).unwrap();
        let seed = set(&[(5, 5), (5, 7), (5, 6), (2, 3), (1, 3), (1, 5), (3, 5)]);
        let trace = gs(&seed, &e).unwrap();
        assert_eq!(trace.stages.len(), 3);
        let added1 = trace.stages[1].difference(&trace.stages[0]);
        assert_eq!(added1, set(&[(2, 5), (3, 3), (1, 6), (1, 7), (3, 6), (3, 7)]));
        let added2 = trace.stages[2].difference(&trace.stages[1]);
        assert_eq!(added2, set(&[(2, 6), (2, 7)]));
        assert_eq!(trace.fixpoint().len(), 15);
    });
}

#[test]
fn criterion_02_tilting_counts() {
    run("2 (tilting counts)", Duration::from_secs(30), || {
        let rlr = Orientation::parse("RLR").unwrap();
        assert_eq!(enumerate_tiltings(&rlr).len(), 14);
        for n in 1..=6 {
            for q in orientations(n) {
                assert_eq!(enumerate_tiltings(&q).len(), catalan(n), "count on {q}");
            }
        }
    });
}

#[test]
fn criterion_03_class_counts_and_figure_grouping() {
    run("3 (mutation classes)", Duration::from_secs(120), || {
        for n in 1..=6 {
            for q in orientations(n) {
                let ed = ExactStructure::diamond(q.clone()).unwrap();
                let tiltings = enumerate_tiltings(&q);
                let classes = mutation_classes(&tiltings, &ed).unwrap();
                let count = classes.iter().copied().max().unwrap() + 1;
                assert_eq!(count, 1 << (n - 1), "classes on {q}");
            }
        }
        // the drawn grouping of the 14 tiltings on RLR
        let q = Orientation::parse("RLR").unwrap();
        let ed = ExactStructure::diamond(q.clone()).unwrap();
        let figure: Vec<Vec<IntervalSet>> = vec![
            vec![
                set(&[(2, 2), (1, 2), (2, 4), (4, 4)]),
                set(&[(1, 2), (2, 4), (4, 4), (1, 4)]),
            ],
            vec![
                set(&[(2, 2), (1, 2), (2, 4), (2, 3)]),
                set(&[(1, 2), (2, 4), (1, 4), (2, 3)]),
                set(&[(1, 2), (1, 4), (2, 3), (1, 3)]),
            ],
            vec![
                set(&[(2, 4), (1, 4), (2, 3), (3, 4)]),
                set(&[(1, 4), (2, 3), (3, 4), (1, 3)]),
                set(&[(2, 3), (3, 4), (1, 3), (3, 3)]),
            ],
            vec![
                set(&[(1, 4), (3, 4), (1, 3), (1, 1)]),
                set(&[(3, 4), (1, 3), (3, 3), (1, 1)]),
            ],
            vec![set(&[(2, 4), (4, 4), (1, 4), (3, 4)])],
            vec![set(&[(1, 2), (4, 4), (1, 4), (1, 1)])],
            vec![set(&[(4, 4), (1, 4), (3, 4), (1, 1)])],
            vec![set(&[(1, 2), (1, 4), (1, 3), (1, 1)])],
        ];
        let expected: BTreeSet<BTreeSet<IntervalSet>> = figure
            .into_iter()
            .map(|class| class.into_iter().collect())
            .collect();
        let tiltings = enumerate_tiltings(&q);
        assert_eq!(tiltings.len(), 14);
        let mut computed: BTreeSet<BTreeSet<IntervalSet>> = BTreeSet::new();
        let class_of = mutation_classes(&tiltings, &ed).unwrap();
        let class_count = class_of.iter().copied().max().unwrap() + 1;
        for c in 0..class_count {
            computed.insert(
                tiltings
                    .iter()
                    .zip(&class_of)
                    .filter(|(_, &cl)| cl == c)
                    .map(|(t, _)| t.parts().clone())
                    .collect(),
            );
        }
        assert_eq!(computed, expected, "grouping differs from the drawn partition");
    });
}

#[test]
fn criterion_04_mcjr_equals_gs_of_tilting() {
    run("4 (maximal CJR = closure of a tilting)", Duration::from_secs(300), || {
        for n in 1..=5 {
            for q in orientations(n) {
                let ed = ExactStructure::diamond(q.clone()).unwrap();
                let mut pair_sets: BTreeSet<IntervalSet> = BTreeSet::new();
                for pair in maximal_cjr_pairs(n) {
                    let (j, t) = pair_constructions(&pair, &q).unwrap();
                    let fix = gs(t.parts(), &ed).unwrap().fixpoint().clone();
                    assert_eq!(fix, j, "pair {pair} on {q}");
                    pair_sets.insert(j);
                }
                for t in enumerate_tiltings(&q) {
                    let fix = gs(t.parts(), &ed).unwrap().fixpoint().clone();
                    assert!(
                        pair_sets.contains(&fix),
                        "fixpoint of {t} on {q} is not a maximal CJR set"
                    );
                }
            }
        }
    });
}

#[test]
fn criterion_05_gs_is_class_hull_and_two_stages() {
    run("5 (closure = class hull, depth <= 2)", Duration::from_secs(300), || {
        for n in 1..=5 {
            for q in orientations(n) {
                let structures = [
                    ExactStructure::min(q.clone()),
                    ExactStructure::max(q.clone()),
                    ExactStructure::diamond(q.clone()).unwrap(),
                ];
                for e in &structures {
                    for t in enumerate_tiltings(&q) {
                        let trace = gs(t.parts(), e).unwrap();
                        assert!(trace.depth() <= 2, "{t} under {e} on {q}");
                        let hull: IntervalSet = reachability_class(&t, e)
                            .unwrap()
                            .iter()
                            .flat_map(|m| m.parts().iter().copied())
                            .collect();
                        assert_eq!(trace.fixpoint(), &hull, "{t} under {e} on {q}");
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_06_ck_vs_gs() {
    run("6 (internal closure vs full closure)", Duration::from_secs(300), || {
        for n in 1..=5 {
            for q in orientations(n) {
                let structures = [
                    ExactStructure::min(q.clone()),
                    ExactStructure::max(q.clone()),
                    ExactStructure::diamond(q.clone()).unwrap(),
                ];
                for e in &structures {
                    for t in enumerate_tiltings(&q) {
                        let a = ck(t.parts(), e).unwrap().fixpoint().clone();
                        let b = gs(t.parts(), e).unwrap().fixpoint().clone();
                        assert_eq!(a, b, "{t} under {e} on {q}");
                    }
                }
            }
        }
        // strict gap on the six-interval seed
        let q = Orientation::parse("RLRRLR").unwrap();
        let e = ExactStructure::diamond(q).unwrap();
        let seed = set(&[(5, 5), (5, 7), (5, 6), (2, 3), (1, 5), (3, 5)]);
        let ck_fix = ck(&seed, &e).unwrap().fixpoint().clone();
        assert_eq!(ck_fix.len(), 10);
        assert_eq!(
            ck_fix,
            set(&[
                (5, 5), (5, 7), (5, 6), (2, 3), (1, 5), (3, 5),
                (1, 6), (1, 7), (3, 6), (3, 7),
            ])
        );
        let gs_fix = gs(&seed, &e).unwrap().fixpoint().clone();
        assert!(ck_fix.is_subset(&gs_fix) && ck_fix != gs_fix);
        assert_eq!(gs_fix.len(), 15);
    });
}

#[test]
fn criterion_07_oracle_equivalence() {
    run("7 (combinatorics vs matrices)", Duration::from_secs(120), || {
        let mut pairs = 0usize;
        for n in 1..=6 {
            for q in orientations(n) {
                let intervals: Vec<Interval> = all_intervals(n).iter().copied().collect();
                let reps: Vec<_> = intervals.iter().map(|k| build_rep(&[*k], &q)).collect();
                for (i, k) in intervals.iter().enumerate() {
                    for (j, l) in intervals.iter().enumerate() {
                        let fast = hom(k, l, &q).is_some() as usize;
                        assert_eq!(fast, hom_basis(&reps[i], &reps[j]).len(), "hom {k},{l} on {q}");
                        assert_eq!(
                            ext_dim(k, l, &q).unwrap(),
                            ext_dim_resolution(&reps[i], &reps[j]).unwrap(),
                            "ext {k},{l} on {q}"
                        );
                        pairs += 1;
                    }
                }
            }
        }
        assert!(pairs > 10_000, "checked {pairs} pairs");
    });
}

#[test]
fn criterion_08_counterexample_figure() {
    run("8 (adapted, closure-fixed, not extension-closed)", Duration::from_secs(5), || {
        let q = Orientation::parse("RR").unwrap();
        let e = ExactStructure::diamond(q.clone()).unwrap();
        let c = set(&[(2, 3), (1, 2)]);
        assert!(is_e_adapted(&c, &e).unwrap().0);
        assert_eq!(gs(&c, &e).unwrap().fixpoint(), &c);
        assert!(!is_extension_closed(&c, &q));
    });
}

#[test]
fn criterion_09_congruence_experiment() {
    run("9 (congruence and Boolean quotient)", Duration::from_secs(300), || {
        for n in 1..=5 {
            for q in orientations(n) {
                let emax = ExactStructure::max(q.clone());
                let ed = ExactStructure::diamond(q.clone()).unwrap();
                let poset = tilting_poset(&emax).unwrap();
                let classes = mutation_classes(&poset.elements, &ed).unwrap();
                let (is_congruence, failure) = congruence_check(&poset, &classes).unwrap();
                assert!(is_congruence, "congruence failed on {q}: {failure:?}");
                let report = quotient_boolean_check(&poset, &classes).unwrap();
                assert_eq!(report.classes, 1 << (n - 1));
                assert!(report.is_boolean, "quotient on {q} is not Boolean");
            }
        }
    });
}

#[test]
fn criterion_10_jordan_sampling() {
    run("10 (sampling and recoverability probes)", Duration::from_secs(300), || {
        let r = Orientation::parse("R").unwrap();
        let expect = |parts: &[Interval], want: &str| {
            for seed in 0..100u64 {
                let jf: PartitionTuple =
                    genjf_estimate(parts, &r, 32003, 64, seed).unwrap();
                assert_eq!(jf.to_string(), want, "seed {seed} deviated for {parts:?}");
            }
        };
        expect(&[iv(1, 2)], "[(1), (1)]");
        expect(&[iv(1, 1), iv(1, 2)], "[(2), (1)]");
        expect(&[iv(2, 2), iv(1, 2)], "[(1), (2)]");

        // forced collision family in the full category
        let rr = Orientation::parse("RR").unwrap();
        let report = jr_probe(&all_intervals(3), &rr, 1, 32003, 64, 2024).unwrap();
        assert!(report.inconclusive.is_empty());
        let family: Vec<usize> = report
            .objects
            .iter()
            .enumerate()
            .filter(|(_, o)| {
                o.genjf.as_ref().map(|jf| jf.size_vector()) == Some(vec![1, 1, 1])
            })
            .map(|(i, _)| i)
            .collect();
        assert_eq!(family.len(), 4);
        for (a, &i) in family.iter().enumerate() {
            for &j in &family[a + 1..] {
                assert!(report.collisions.contains(&(i, j)));
            }
        }

        // no collisions inside any maximal CJR family at desk scale
        for n in 1..=4 {
            for q in orientations(n) {
                for pair in maximal_cjr_pairs(n) {
                    let (j, _t): (IntervalSet, Tilting) =
                        pair_constructions(&pair, &q).unwrap();
                    let report = jr_probe(&j, &q, 2, 32003, 64, 77).unwrap();
                    assert!(
                        report.collisions.is_empty(),
                        "collisions for pair {pair} on {q}: {:?}",
                        report.collisions
                    );
                    assert!(report.inconclusive.is_empty());
                }
            }
        }
    });
}
