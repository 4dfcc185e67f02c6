use lch::f2linalg::*;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize, bits: &[bool]) -> F2Matrix {
    let mut m = F2Matrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            if bits[(r * cols + c) % bits.len().max(1)] {
                m.set(r, c, true);
            }
        }
    }
    m
}

fn arb_matrix(max: usize) -> impl Strategy<Value = F2Matrix> {
    (1..=max, 1..=max, prop::collection::vec(any::<bool>(), 1..=max * max))
        .prop_map(|(r, c, bits)| matrix(r, c, &bits))
}

/// All vectors in the column span, by enumeration.
fn column_span(m: &F2Matrix) -> Vec<F2Vec> {
    let n = m.cols();
    (0u32..1 << n)
        .map(|mask| {
            let x = F2Vec::from_indices(n, (0..n).filter(|&i| mask >> i & 1 == 1));
            m.apply(&x)
        })
        .collect()
}

fn brute_rank(m: &F2Matrix) -> usize {
    let mut span = column_span(m);
    span.sort_by_key(|v| v.ones().collect::<Vec<_>>());
    span.dedup();
    span.len().trailing_zeros() as usize
}

fn space(grades: Vec<i64>) -> GradedF2Space {
    let labels = (0..grades.len()).map(|i| format!("g{i}")).collect();
    GradedF2Space::new(labels, grades, 0).unwrap()
}

/// A three-term complex `C₂ → C₁ → C₀` with random maps and `d² = 0`.
fn three_term(n: [usize; 3], b_bits: &[bool], r_bits: &[bool]) -> (ChainComplex, F2Matrix, F2Matrix) {
    let b = matrix(n[1], n[2], b_bits);
    let ann = b.transpose().kernel();
    let mut a = F2Matrix::zeros(n[0], n[1]);
    for r in 0..n[0] {
        let mut row = F2Vec::zeros(n[1]);
        for (k, v) in ann.iter().enumerate() {
            if r_bits[(r * 7 + k) % r_bits.len()] {
                row.xor_assign(v);
            }
        }
        for c in row.ones() {
            a.set(r, c, true);
        }
    }
    let total = n[0] + n[1] + n[2];
    let mut d = F2Matrix::zeros(total, total);
    for r in 0..n[0] {
        for c in 0..n[1] {
            d.set(r, n[0] + c, a.get(r, c));
        }
    }
    for r in 0..n[1] {
        for c in 0..n[2] {
            d.set(n[0] + r, n[0] + n[1] + c, b.get(r, c));
        }
    }
    let grades = std::iter::repeat_n(0, n[0]).chain(std::iter::repeat_n(1, n[1])).chain(std::iter::repeat_n(2, n[2])).collect();
    (ChainComplex::new(space(grades), d, -1).unwrap(), a, b)
}

#[test]
fn rank_of_known_matrices() {
    assert_eq!(F2Matrix::identity(5).rank(), 5);
    assert_eq!(F2Matrix::zeros(3, 4).rank(), 0);
    let m = F2Matrix::from_rows(3, vec![
        F2Vec::from_indices(3, [0, 1]),
        F2Vec::from_indices(3, [1, 2]),
        F2Vec::from_indices(3, [0, 2]),
    ]);
    assert_eq!(m.rank(), 2);
    assert!(!m.is_invertible());
    assert_eq!(m.kernel(), vec![F2Vec::from_indices(3, [0, 1, 2])]);
}

#[test]
fn homology_of_a_circle() {
    let mut d = F2Matrix::zeros(4, 4);
    for (r, c) in [(0, 2), (1, 2), (0, 3), (1, 3)] {
        d.set(r, c, true);
    }
    let cx = ChainComplex::new(space(vec![0, 0, 1, 1]), d, -1).unwrap();
    let h = cx.homology();
    assert_eq!(h.dim(0), 1);
    assert_eq!(h.dim(1), 1);
    assert_eq!(h.groups[&1].reps, vec![F2Vec::from_indices(4, [2, 3])]);
}

#[test]
fn complex_rejects_d_squared_nonzero() {
    let mut d = F2Matrix::zeros(3, 3);
    d.set(0, 1, true);
    d.set(1, 2, true);
    assert!(ChainComplex::new(space(vec![0, 1, 2]), d, -1).is_err());
}

#[test]
fn grades_reduce_modulo_rotation() {
    assert_eq!(reduce_grade(5, 2), 1);
    assert_eq!(reduce_grade(-3, 4), 5);
    assert_eq!(reduce_grade(-3, 0), -3);
}

proptest! {
    #[test]
    fn rank_matches_enumeration(m in arb_matrix(6)) {
        prop_assert_eq!(m.rank(), brute_rank(&m));
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn kernel_is_a_basis_of_the_null_space(m in arb_matrix(7)) {
        let k = m.kernel();
        prop_assert_eq!(k.len(), m.cols() - m.rank());
        for v in &k {
            prop_assert!(m.apply(v).is_zero());
        }
        prop_assert_eq!(F2Matrix::from_columns(m.cols(), &k).rank(), k.len());
    }

    #[test]
    fn solve_agrees_with_span(m in arb_matrix(6), b in prop::collection::vec(any::<bool>(), 6)) {
        let rhs = F2Vec::from_indices(m.rows(), (0..m.rows()).filter(|&i| b[i]));
        let in_span = column_span(&m).contains(&rhs);
        match m.solve(&rhs) {
            Some(x) => prop_assert_eq!(&m.apply(&x), &rhs),
            None => prop_assert!(!in_span),
        }
        prop_assert_eq!(m.solve(&rhs).is_some(), in_span);
    }

    #[test]
    fn products_associate(a in arb_matrix(5), bits in prop::collection::vec(any::<bool>(), 1..40)) {
        let b = matrix(a.cols(), 4, &bits);
        let c = matrix(4, 3, &bits[1..].iter().chain([&true]).copied().collect::<Vec<_>>());
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b).transpose(), b.transpose().mul(&a.transpose()));
    }

    #[test]
    fn span_insert_tracks_rank(m in arb_matrix(6)) {
        let mut s = Span::new(m.rows());
        for c in 0..m.cols() {
            s.insert(&m.column(c));
        }
        prop_assert_eq!(s.dim(), m.rank());
        for c in 0..m.cols() {
            prop_assert!(s.contains(&m.column(c)));
            prop_assert!(s.reduce(&m.column(c)).is_zero());
        }
    }

    #[test]
    fn homology_dimensions_match_ranks(
        n in prop::array::uniform3(1usize..5),
        b_bits in prop::collection::vec(any::<bool>(), 1..30),
        r_bits in prop::collection::vec(any::<bool>(), 1..30),
    ) {
        let (cx, a, b) = three_term(n, &b_bits, &r_bits);
        let h = cx.homology();
        prop_assert_eq!(h.dim(0), n[0] - a.rank());
        prop_assert_eq!(h.dim(1), n[1] - a.rank() - b.rank());
        prop_assert_eq!(h.dim(2), n[2] - b.rank());
        let co = cx.dual(|l| format!("{l}*"), false).homology();
        prop_assert_eq!(co.dims(), h.dims());
        for g in h.groups.values() {
            for r in &g.reps {
                prop_assert!(cx.differential().apply(r).is_zero());
                prop_assert!(g.class_of(r).is_some_and(|c| !c.is_zero()));
            }
        }
    }

    #[test]
    fn identity_is_a_quasi_iso(
        n in prop::array::uniform3(1usize..4),
        b_bits in prop::collection::vec(any::<bool>(), 1..20),
        r_bits in prop::collection::vec(any::<bool>(), 1..20),
    ) {
        let (cx, _, _) = three_term(n, &b_bits, &r_bits);
        let total = n.iter().sum();
        let id = ChainMap { source: &cx, target: &cx, matrix: F2Matrix::identity(total), degree: 0 };
        prop_assert!(id.check().is_ok());
        prop_assert!(id.is_quasi_iso().unwrap());
        let zero = ChainMap { source: &cx, target: &cx, matrix: F2Matrix::zeros(total, total), degree: 0 };
        prop_assert_eq!(zero.is_quasi_iso().unwrap(), cx.homology().total_dim() == 0);
    }
}
