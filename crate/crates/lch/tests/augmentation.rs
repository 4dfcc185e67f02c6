use std::collections::BTreeSet;

use lch::augmentation::*;
use lch::dga::*;
use lch::diagram::LagrangianDiagram;
use lch::f2linalg::{F2Vec, Homology};

fn dga(name: &str) -> CeDga {
    let p = format!("{}/../../corpus/{name}.diagram", env!("CARGO_MANIFEST_DIR"));
    CeDga::from_diagram_default(&LagrangianDiagram::parse(&std::fs::read_to_string(p).unwrap()).unwrap()).unwrap()
}

/// Every assignment on degree-0 chords, kept when `ε∂ = 0` with `t = 1`.
fn brute_augmentations(g: &CeDga) -> BTreeSet<Vec<bool>> {
    let zero: Vec<usize> = (0..g.chords.len()).filter(|&i| g.reduce(g.chords[i].grading) == 0).collect();
    let mut out = BTreeSet::new();
    for mask in 0u32..1 << zero.len() {
        let mut v = vec![false; g.chords.len()];
        for (k, &i) in zero.iter().enumerate() {
            v[i] = mask >> k & 1 == 1;
        }
        let eval = |w: &Word| w.iter().all(|l| matches!(l, Letter::T(_) | Letter::TInv(_)) || matches!(l, Letter::Chord(c) if v[*c]));
        if g.differential.iter().all(|d| d.words().filter(|w| eval(w)).count() % 2 == 0) {
            out.insert(v);
        }
    }
    out
}

fn element(g: &CeDga, s: &str) -> AlgElement {
    g.parse_element(s).unwrap()
}

fn class_span(h: &Homology, degree: i64, reps: &[F2Vec]) -> bool {
    let group = &h.groups[&degree];
    let mut seen = lch::f2linalg::Span::new(group.dim());
    reps.iter().all(|r| group.class_of(r).is_some_and(|c| seen.insert(&c))) && seen.dim() == group.dim()
}

fn vec_of(n: usize, idx: &[usize]) -> F2Vec {
    F2Vec::from_indices(n, idx.iter().map(|i| i - 1))
}

#[test]
fn augmentations_match_enumeration() {
    for (k, count) in [("figure8", 2), ("trefoil", 5), ("unknot", 1)] {
        let g = dga(k);
        let augs = enumerate_augmentations(&g).unwrap();
        assert_eq!(augs.len(), count, "{k}");
        let got: BTreeSet<Vec<bool>> = augs.iter().map(|a| a.values.clone()).collect();
        assert_eq!(got, brute_augmentations(&g), "{k}");
        for a in &augs {
            a.check(&g).unwrap();
        }
    }
}

#[test]
fn figure_eight_augmentations_differ_on_a4() {
    let g = dga("figure8");
    let augs = enumerate_augmentations(&g).unwrap();
    let a4 = g.chord_index("a4").unwrap();
    let a5 = g.chord_index("a5").unwrap();
    assert!(!augs[0].values[a4] && augs[1].values[a4]);
    assert!(augs.iter().all(|a| a.values[a5]));
}

#[test]
fn twisted_differentials() {
    let g = dga("figure8");
    let want = [
        ("a4", "a2 + a3 + a2 a1 a3"),
        ("a6", "a5 + a1 a3 + a1 a3 a5"),
        ("a7", "a5 + a2 a1 + a5 a2 a1"),
    ];
    for eps in enumerate_augmentations(&g).unwrap() {
        let tw = twisted_differential(&g, &eps).unwrap();
        for (i, c) in g.chords.iter().enumerate() {
            let expected = want.iter().find(|(l, _)| *l == c.label).map_or(AlgElement::zero(), |(_, s)| element(&g, s));
            assert_eq!(tw.of_chord[i], expected, "∂^ε {}", c.label);
        }
    }
}

#[test]
fn linearized_homology_and_cohomology() {
    let g = dga("figure8");
    let n = g.chords.len();
    for eps in enumerate_augmentations(&g).unwrap() {
        let h = linearized_homology(&g, &eps).unwrap();
        assert_eq!(h.dims().into_iter().filter(|(_, d)| *d > 0).collect::<Vec<_>>(), vec![(-1, 1), (1, 2)]);
        assert!(class_span(&h, 1, &[vec_of(n, &[1]), vec_of(n, &[6, 7])]));
        assert!(class_span(&h, -1, &[vec_of(n, &[2])]));

        let co = linearized_cohomology(&g, &eps).unwrap();
        assert_eq!(co.dim(1), 2);
        assert_eq!(co.dim(-1), 1);
        assert_eq!(co.total_dim(), 3);
        assert!(class_span(&co, 1, &[vec_of(n, &[1]), vec_of(n, &[6])]));
        assert!(class_span(&co, -1, &[vec_of(n, &[2, 3])]));
    }
}

#[test]
fn linear_part_matches_word_filter() {
    for k in ["figure8", "trefoil"] {
        let g = dga(k);
        for eps in enumerate_augmentations(&g).unwrap() {
            let tw = twisted_differential(&g, &eps).unwrap();
            let cx = linearized_complex(&g, &eps).unwrap();
            for a in 0..g.chords.len() {
                let col: BTreeSet<usize> = cx.differential().column(a).ones().collect();
                let words: BTreeSet<usize> = tw.of_chord[a]
                    .words()
                    .filter_map(|w| match w.as_slice() {
                        [Letter::Chord(c)] => Some(*c),
                        _ => None,
                    })
                    .collect();
                assert_eq!(col, words, "{k} {}", g.chords[a].label);
            }
        }
    }
}

#[test]
fn cobar_table() {
    let g = dga("figure8");
    let want = [
        "δ^1(a2*) = a4*",
        "δ^1(a3*) = a4*",
        "δ^1(a5*) = a6* + a7*",
        "δ^2(a1*,a2*) = a7*",
        "δ^2(a3*,a1*) = a6*",
        "δ^3(a3*,a1*,a2*) = a4*",
        "δ^3(a5*,a3*,a1*) = a6*",
        "δ^3(a1*,a2*,a5*) = a7*",
    ];
    let want: BTreeSet<&str> = want.into_iter().collect();
    for eps in enumerate_augmentations(&g).unwrap() {
        let lines = cobar(&g, &eps).unwrap().format(&g);
        let got: BTreeSet<&str> = lines.iter().map(String::as_str).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn cobar_is_adjoint_and_squares_to_zero() {
    for k in ["figure8", "trefoil", "unknot"] {
        let g = dga(k);
        for eps in enumerate_augmentations(&g).unwrap() {
            assert!(check_adjointness(&g, &eps, 3).unwrap().is_empty(), "{k}");
            let cb = cobar(&g, &eps).unwrap();
            let n = g.chords.len();
            for x in (0..n).flat_map(|a| (0..n).map(move |b| vec![a, b])).chain((0..n).map(|a| vec![a])) {
                let mut twice: BTreeSet<Vec<usize>> = BTreeSet::new();
                for y in cb.coderivation(&x) {
                    for z in cb.coderivation(&y) {
                        if !twice.remove(&z) {
                            twice.insert(z);
                        }
                    }
                }
                assert!(twice.is_empty(), "{k}: δ² on {x:?}");
            }
        }
    }
}

#[test]
fn augmentation_text_round_trips() {
    let g = dga("trefoil");
    for eps in enumerate_augmentations(&g).unwrap() {
        let line = eps.format(&g);
        assert_eq!(Augmentation::parse(&g, &line), Some(eps));
    }
}
