use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use lch::ainfinity::{unit, Vec128};
use lch::augmentation::enumerate_augmentations;
use lch::bimodule::{self, *};
use lch::dga::CeDga;
use lch::diagram::LagrangianDiagram;
use lch::duality::{build_bimodules, AugBimoduleSet};
use proptest::prelude::*;

fn set() -> &'static AugBimoduleSet {
    static SET: OnceLock<AugBimoduleSet> = OnceLock::new();
    SET.get_or_init(|| {
        let p = format!("{}/../../corpus/figure8.diagram", env!("CARGO_MANIFEST_DIR"));
        let g = CeDga::from_diagram_default(&LagrangianDiagram::parse(&std::fs::read_to_string(p).unwrap()).unwrap()).unwrap();
        let augs = enumerate_augmentations(&g).unwrap();
        build_bimodules(&g, augs)
    })
}

fn mask(dim: usize) -> Vec128 {
    if dim == 128 { !0 } else { (1u128 << dim) - 1 }
}

fn noise(seed: u64, density: u64, key: impl Hash, dim: usize) -> Vec128 {
    let mut h = DefaultHasher::new();
    (seed, &key).hash(&mut h);
    let x = h.finish();
    if !x.is_multiple_of(density) {
        return 0;
    }
    let mut h2 = DefaultHasher::new();
    (x, 1u8).hash(&mut h2);
    ((h2.finish() as u128) << 64 | x as u128) & mask(dim)
}

/// A pseudo-random pre-morphism `src → tgt` with sparse components.
fn random_morphism(src: Bimod, tgt: Bimod, seed: u64) -> Morph {
    let dim = tgt.dim();
    from_fn(src, tgt, 0, move |c, pre, w, post| noise(seed, 3, (c, pre, w, post), dim))
}

/// A random bimodule structure on `dim` generators, not necessarily satisfying any relation.
fn random_bimodule(dim: usize, seed: u64) -> Bimod {
    Arc::new(Explicit {
        labels: (0..dim).map(|i| format!("g{i}")).collect(),
        grades: vec![0; dim],
        structure: Box::new(move |c, pre, w, post| noise(seed, 2, (c, pre, w, post), dim)),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn delta_squares_to_zero(seed in any::<u64>()) {
        let s = set();
        let f = random_morphism(s.m_plus.clone(), s.n.clone(), seed);
        let dd = delta(s.cat.clone(), delta(s.cat.clone(), f));
        let c = sweep(s.cat.as_ref(), s.m_plus.as_ref(), 2, "delta_squared", &|c, pre, w, post| dd.apply(c, pre, w, post), &|i| s.n.label(i));
        prop_assert!(c.passed(), "{:?}", c.failures);
    }

    #[test]
    fn dual_is_an_involution(seed in any::<u64>(), dim in 1usize..5) {
        let s = set();
        let m = random_bimodule(dim, seed);
        let c = check_same_structure(s.cat.as_ref(), &dual(dual(m.clone())), &m, 2, "double_dual");
        prop_assert!(c.passed(), "{:?}", c.failures);
        let f = random_morphism(m.clone(), m.clone(), seed ^ 1);
        let ff = dual_morphism(dual_morphism(f.clone()));
        let ff = reinterpret(ff, m.clone(), m.clone());
        let c = check_equal(s.cat.as_ref(), &ff, &f, 2, "double_dual_morphism");
        prop_assert!(c.passed(), "{:?}", c.failures);
    }

    #[test]
    fn pullback_commutes_with_dual(seed in any::<u64>(), dim in 1usize..4) {
        let s = set();
        let cat_dim = s.cat.dim();
        let functor = |salt: u64| -> Arc<dyn Functor> {
            Arc::new(LinearFunctor {
                objects: (0..s.cat.num_objects()).collect(),
                images: (0..cat_dim).map(|i| noise(seed ^ salt, 1, i, cat_dim)).collect(),
            })
        };
        let (f, g) = (functor(7), functor(11));
        let m = random_bimodule(dim, seed);
        let a = pullback(dual(m.clone()), f.clone(), g.clone());
        let b = dual(pullback(m, g, f));
        let c = check_same_structure(s.cat.as_ref(), &a, &b, 2, "pullback_dual");
        prop_assert!(c.passed(), "{:?}", c.failures);
    }
}

#[test]
fn diagonal_and_quotient_are_bimodules() {
    let s = set();
    for (name, m) in [("M+", &s.m_plus), ("M-", &s.m_minus), ("N", &s.n)] {
        assert!(check_bimodule(s.cat.as_ref(), m, 3).passed(), "{name}");
        assert!(check_bimodule_degree(s.cat.as_ref(), m, 3).passed(), "{name}");
    }
    assert!(check_unital(s.cat.as_ref(), &s.m_plus, s.y(), 3).passed());
    assert!(check_unital(s.cat.as_ref(), &s.n, s.y(), 3).passed());
}

#[test]
fn n_agrees_with_explicit_and_pullback_descriptions() {
    let s = set();
    assert!(check_same_structure(s.cat.as_ref(), &s.n, &s.n_explicit, 3, "explicit").passed());
    assert!(check_same_structure(s.cat.as_ref(), &s.n, &s.n_pullback, 3, "pullback").passed());
    assert!(check_same_structure(s.cat.as_ref(), &s.m_minus, &s.m_minus_disks, 3, "disks").passed());
}

#[test]
fn cylinder_is_homotopy_equivalent_to_the_target() {
    let s = set();
    let rho = s.rho();
    assert!(is_morphism(&s.cat, &rho, 3).passed());
    let cyl = cylinder(&rho);
    assert!(check_bimodule(s.cat.as_ref(), &cyl.cyl.module, 2).passed());
    let (inc, proj, h) = (cyl.include(), cyl.project(), cyl.homotopy());
    assert!(is_morphism(&s.cat, &inc, 2).passed());
    assert!(is_morphism(&s.cat, &proj, 2).passed());
    let id_n = identity(cyl.target_module().clone());
    assert!(check_equal(s.cat.as_ref(), &compose(proj.clone(), inc.clone()), &id_n, 2, "pi_i").passed());
    let id_cyl = identity(cyl.cyl.module.clone());
    let c = is_homotopy(&s.cat, &h, &id_cyl, &compose(inc, proj), 2);
    assert!(c.passed(), "{:?}", c.failures);
}

#[test]
fn mutated_morphism_is_caught() {
    let s = set();
    let (x, y) = (0, 1);
    let id = identity(s.n.clone());
    assert!(is_morphism(&s.cat, &id, 2).passed());
    let m: Morph = Arc::new(bimodule::Mutated { inner: id, chain: vec![0, 0], pre: vec![], w: y, post: vec![], flip: unit(x) });
    let c = is_morphism(&s.cat, &m, 1);
    assert!(c.failures.iter().any(|f| f == "^1|0(y+,y+) on (ε1,ε1,ε2) gives x+"), "{:?}", c.failures);
    assert!(!check_morphism_degree(s.cat.as_ref(), &m, 0).passed());
}

#[test]
fn mutated_module_breaks_the_relations() {
    let s = set();
    let inner = s.n.clone();
    let (x, y) = (0, 1);
    let px = s.x();
    let broken: Bimod = Arc::new(Explicit {
        labels: (0..inner.dim()).map(|i| inner.label(i)).collect(),
        grades: (0..inner.dim()).map(|i| inner.grade(i)).collect(),
        structure: Box::new(move |c, pre, w, post| {
            let v = inner.n(c, pre, w, post);
            if pre.is_empty() && post == [px] && w == y && c == [0, 0, 0] { v ^ unit(x) } else { v }
        }),
    });
    let c = check_bimodule(s.cat.as_ref(), &broken, 2);
    assert!(c.failures.iter().any(|f| f == "^2|0(y+,x+,y+) on (ε1,ε1,ε1,ε2) gives x+"), "{:?}", c.failures);
}
