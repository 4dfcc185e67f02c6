use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use lch::ainfinity::unit;
use lch::augmentation::enumerate_augmentations;
use lch::bimodule::{self, *};
use lch::dga::CeDga;
use lch::diagram::{LagrangianDiagram, DEFAULT_REGION_CAP};
use lch::duality::*;

struct Fixture {
    diagram: LagrangianDiagram,
    set: AugBimoduleSet,
    disks: TwoPositiveDisks,
    data: VeryWeakData,
}

fn load(name: &str) -> (LagrangianDiagram, CeDga) {
    let p = format!("{}/../../corpus/{name}.diagram", env!("CARGO_MANIFEST_DIR"));
    let d = LagrangianDiagram::parse(&std::fs::read_to_string(p).unwrap()).unwrap();
    let g = CeDga::from_diagram_default(&d).unwrap();
    (d, g)
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let (diagram, g) = load("figure8");
        let set = build_bimodules(&g, enumerate_augmentations(&g).unwrap());
        let disks = TwoPositiveDisks::enumerate(&diagram, DEFAULT_REGION_CAP).unwrap();
        let data = very_weak_data(&set, &disks);
        Fixture { diagram, set, disks, data }
    })
}

/// Table lines on chains through the first augmentation only.
fn diagonal(f: &dyn PreMorphism, k: usize) -> BTreeSet<String> {
    let s = &fixture().set;
    morphism_table(s.cat.as_ref(), f, k).into_iter().filter(|l| !l.contains("ε2")).collect()
}

fn set_of<'a>(lines: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
    lines.into_iter().map(String::from).collect()
}

fn chords() -> impl Iterator<Item = usize> {
    1..=7
}

#[test]
fn rho_dual_matches_the_formula() {
    let f = fixture();
    let mut want = set_of(["^0|0(a6∨) on (ε1,ε1)\tx∨"]);
    for i in chords() {
        want.insert(format!("^1|0(a{i}+,a{i}∨) on (ε1,ε1,ε1)\ty∨"));
        want.insert(format!("^0|1(a{i}∨,a{i}+) on (ε1,ε1,ε1)\ty∨"));
    }
    assert_eq!(diagonal(f.data.rho_dual.dual.as_ref(), 2), want);
    let c = check_equal(f.set.cat.as_ref(), &f.data.rho_dual.dual, &f.data.rho_dual.formula, 3, "rho_dual");
    assert!(c.passed(), "{:?}", c.failures);
}

#[test]
fn theta_table_and_quasi_iso() {
    let f = fixture();
    let want = set_of([
        "^0|0(x∨) on (ε1,ε1)\ty+",
        "^0|0(y∨) on (ε1,ε1)\tx+",
        "^0|1(x∨,x+) on (ε1,ε1,ε1)\ty+",
        "^0|1(y∨,x+) on (ε1,ε1,ε1)\tx+",
    ]);
    assert_eq!(diagonal(f.data.theta.as_ref(), 2), want);
    assert!(is_morphism(&f.set.cat, &f.data.theta, 3).passed());
    assert!(linear_quasi_iso(f.set.cat.as_ref(), &f.data.theta).is_ok());
}

#[test]
fn eta_components_on_the_first_augmentation() {
    let f = fixture();
    let got = diagonal(f.data.eta.as_ref(), 2);
    let has = |input: &str, chain: &str, out: &str| {
        got.iter().any(|l| {
            let (head, outputs) = l.split_once('\t').unwrap();
            head == format!("{input} on {chain}") && outputs.split(" + ").any(|o| o == out)
        })
    };
    let zero = [
        ("a1", "a2+ + a3+"),
        ("a2", "a1+ + a6+"),
        ("a3", "a1+ + a7+"),
        ("a4", "a5+"),
        ("a5", "a4+"),
        ("a6", "a2+ + y+"),
        ("a7", "a3+"),
    ];
    for (z, out) in zero {
        let line = format!("^0|0({z}∨) on (ε1,ε1)\t{out}");
        assert!(got.contains(&line), "{line}");
    }
    let (c2, c3) = ("(ε1,ε1,ε1)", "(ε1,ε1,ε1,ε1)");
    for (input, chain, out) in [
        ("^1|0(a4+,a2∨)", c2, "a6+"),
        ("^1|0(a4+,a7∨)", c2, "a3+"),
        ("^0|1(a6∨,a4+)", c2, "a2+"),
        ("^0|1(a3∨,a4+)", c2, "a7+"),
        ("^2|0(a5+,a4+,a2∨)", c3, "a6+"),
        ("^0|2(a3∨,a4+,a5+)", c3, "a7+"),
    ] {
        assert!(has(input, chain, out), "{input} {out}");
    }
    // The remaining two order-two disks are read with the opposite input order.
    assert!(has("^2|0(a4+,a5+,a7∨)", c3, "a3+"));
    assert!(has("^0|2(a6∨,a5+,a4+)", c3, "a2+"));
}

#[test]
fn eta_is_a_closed_quasi_iso_of_degree_zero() {
    let f = fixture();
    let cat = f.set.cat.as_ref();
    let c = is_morphism(&f.set.cat, &f.data.eta, 2);
    assert!(c.passed(), "{:?}", c.failures);
    assert!(check_morphism_degree(cat, &f.data.eta, 2).passed());
    assert!(linear_quasi_iso(cat, &f.data.eta).is_ok());
}

#[test]
fn eta_with_the_other_arc_convention_is_not_closed() {
    let f = fixture();
    let other = eta_with(&f.set, &f.disks, ArcConvention::FirstArcPost);
    assert!(!is_morphism(&f.set.cat, &other, 2).passed());
}

#[test]
fn pi_n_eta_sends_a6_to_y() {
    let f = fixture();
    let got = diagonal(f.data.pi_n_eta.as_ref(), 0);
    assert_eq!(got, set_of(["^0|0(a6∨) on (ε1,ε1)\ty+"]));
}

#[test]
fn h_is_a_homotopy() {
    let f = fixture();
    let v = &f.data;
    let c = check_equal(f.set.cat.as_ref(), &v.theta_rho_dual, &theta_rho_dual_table(&f.set), 3, "table");
    assert!(c.passed(), "{:?}", c.failures);
    let c = is_homotopy(&f.set.cat, &v.h, &v.theta_rho_dual, &v.pi_n_eta, 3);
    assert!(c.passed(), "{:?}", c.failures);
    assert!(check_morphism_degree(f.set.cat.as_ref(), &v.h, 3).passed());
}

#[test]
fn mutated_homotopy_is_caught() {
    let f = fixture();
    let v = &f.data;
    let y = (0..v.h.target().dim()).find(|&i| v.h.target().label(i) == "y+").unwrap();
    let (a1_plus, a1_dual) = (0, 0);
    let m: Morph = Arc::new(bimodule::Mutated { inner: v.h.clone(), chain: vec![0, 0, 0], pre: vec![a1_plus], w: a1_dual, post: vec![], flip: unit(y) });
    let c = is_homotopy(&f.set.cat, &m, &v.theta_rho_dual, &v.pi_n_eta, 2);
    assert!(!c.passed());
    assert!(c.failures.iter().any(|l| l.contains("a1∨")), "{:?}", c.failures);
}

#[test]
fn very_weak_certificate_passes() {
    let f = fixture();
    let cert = verify_very_weak_cy(&f.set, &f.diagram, &f.disks, 2);
    for c in &cert.checks {
        assert!(c.passed(), "{}: {:?}", c.check, c.failures.first());
    }
    assert_eq!(cert.corpus_hash.len(), 64);
}

#[test]
fn les_holds_on_the_corpus() {
    for k in ["figure8", "trefoil", "unknot"] {
        let (_, g) = load(k);
        let augs = enumerate_augmentations(&g).unwrap();
        for e in 0..augs.len() {
            let r = duality_les_check(&g, &augs, e).unwrap();
            assert!(r.passed(), "{k} ε{}: {:?}", e + 1, r.failures);
        }
    }
}

fn ranks(pairs: &[(i64, usize)]) -> std::collections::BTreeMap<i64, usize> {
    pairs.iter().copied().collect()
}

#[test]
fn les_check_rejects_inconsistent_ranks() {
    let good = LesData {
        h_lambda: ranks(&[(0, 1), (1, 1)]),
        lch_co: ranks(&[(1, 2), (-1, 1)]),
        lch: ranks(&[(1, 2), (-1, 1)]),
        sigma: ranks(&[(1, 1)]),
        eta: ranks(&[(1, 1), (-1, 1)]),
        rho: ranks(&[(-1, 1)]),
    };
    assert_eq!(check_les(&good), Vec::<String>::new());

    let acyclic = LesData { h_lambda: ranks(&[(0, 1), (1, 1)]), ..LesData::default() };
    assert!(!check_les(&acyclic).is_empty());

    let sigma_zero = LesData { sigma: ranks(&[(0, 1)]), ..good.clone() };
    assert!(check_les(&sigma_zero).iter().any(|l| l.contains("degree 0")));

    let sphere = LesData { h_lambda: ranks(&[(0, 1), (1, 1), (2, 1)]), ..good };
    assert!(!check_les(&sphere).is_empty());
}

#[test]
fn bimodule_checks_pass_on_the_trefoil() {
    let (_, g) = load("trefoil");
    let set = build_bimodules(&g, enumerate_augmentations(&g).unwrap());
    for c in check_bimodules(&set, 2) {
        assert!(c.passed(), "{}: {:?}", c.check, c.failures.first());
    }
}

#[test]
fn certificates_pass_on_the_unknot() {
    let (d, g) = load("unknot");
    let set = build_bimodules(&g, enumerate_augmentations(&g).unwrap());
    let disks = TwoPositiveDisks::enumerate(&d, DEFAULT_REGION_CAP).unwrap();
    let cert = verify_very_weak_cy(&set, &d, &disks, 2);
    assert!(cert.passed(), "{:?}", cert.checks.iter().find(|c| !c.passed()).map(|c| &c.check));
    let weak = build_weak_cy_certificate(&set, &d, &disks, 2).unwrap();
    assert!(weak.passed(), "{:?}", weak.checks.iter().find(|c| !c.passed()).map(|c| &c.check));
}
