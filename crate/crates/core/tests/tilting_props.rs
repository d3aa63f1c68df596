//! Mutation theory invariants: involutivity, enumeration counts, the
//! identification of closure fixpoints with mutation classes, and the
//! class count under the diamond structure.

use qe_core::closure::gs;
use qe_core::exact::ExactStructure;
use qe_core::quiver::{IntervalSet, Orientation};
use qe_core::tilting::{
    enumerate_tiltings, mutate, mutation_classes, reachability_class, Side,
};

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

fn structures(q: &Orientation) -> Vec<ExactStructure> {
    vec![
        ExactStructure::min(q.clone()),
        ExactStructure::max(q.clone()),
        ExactStructure::diamond(q.clone()).unwrap(),
    ]
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
fn counts_are_catalan_up_to_five() {
    for n in 1..=5 {
        for q in orientations(n) {
            assert_eq!(enumerate_tiltings(&q).len(), catalan(n), "count on {q}");
        }
    }
}

#[test]
fn mutation_is_an_involution() {
    // exchanging back at the new summand restores the original; left and
    // right never coexist (asserted inside mutate)
    for n in 2..=5 {
        for q in orientations(n).into_iter().take(8) {
            for e in structures(&q) {
                for t in enumerate_tiltings(&q) {
                    let summands: Vec<_> = t.parts().iter().copied().collect();
                    for u in summands {
                        let step = mutate(&t, &u, &e).unwrap();
                        if step.direction.is_none() {
                            assert_eq!(step.result, t);
                            continue;
                        }
                        let new_parts: Vec<_> = step
                            .result
                            .parts()
                            .difference(t.parts())
                            .iter()
                            .copied()
                            .collect();
                        assert_eq!(new_parts.len(), 1);
                        let back = mutate(&step.result, &new_parts[0], &e).unwrap();
                        assert_eq!(back.result, t, "mutation at {u} of {t} not involutive");
                        // opposite direction on the way back
                        match (step.direction, back.direction) {
                            (Some(Side::Left), Some(Side::Right))
                            | (Some(Side::Right), Some(Side::Left)) => {}
                            other => panic!("unexpected directions {other:?}"),
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn closure_fixpoint_is_the_class_hull() {
    for n in 2..=4 {
        for q in orientations(n) {
            for e in structures(&q) {
                for t in enumerate_tiltings(&q) {
                    let class = reachability_class(&t, &e).unwrap();
                    let hull: IntervalSet = class
                        .iter()
                        .flat_map(|m| m.parts().iter().copied())
                        .collect();
                    let fix = gs(t.parts(), &e).unwrap().fixpoint().clone();
                    assert_eq!(fix, hull, "tilting {t} under {e} on {q}");
                }
            }
        }
    }
}

#[test]
fn fixpoints_classify_equivalence() {
    for n in 2..=4 {
        for q in orientations(n) {
            let ed = ExactStructure::diamond(q.clone()).unwrap();
            let tiltings = enumerate_tiltings(&q);
            let fixes: Vec<IntervalSet> = tiltings
                .iter()
                .map(|t| gs(t.parts(), &ed).unwrap().fixpoint().clone())
                .collect();
            let classes = mutation_classes(&tiltings, &ed).unwrap();
            for i in 0..tiltings.len() {
                for j in 0..tiltings.len() {
                    assert_eq!(
                        fixes[i] == fixes[j],
                        classes[i] == classes[j],
                        "{} vs {}",
                        tiltings[i],
                        tiltings[j]
                    );
                }
            }
        }
    }
}

#[test]
fn diamond_class_count_to_five() {
    for n in 1..=5 {
        for q in orientations(n) {
            let ed = ExactStructure::diamond(q.clone()).unwrap();
            let tiltings = enumerate_tiltings(&q);
            let classes = mutation_classes(&tiltings, &ed).unwrap();
            let count = classes.iter().copied().max().unwrap() + 1;
            assert_eq!(count, 1 << (n - 1), "classes on {q}");
        }
    }
}

#[test]
fn min_structure_classes_are_singletons() {
    let q = Orientation::parse("RLR").unwrap();
    let emin = ExactStructure::min(q.clone());
    for t in enumerate_tiltings(&q) {
        assert_eq!(reachability_class(&t, &emin).unwrap(), vec![t]);
    }
}
