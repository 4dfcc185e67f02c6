//! Acceptance criteria for the figure-eight knot and the controls, one line
//! per criterion with its wall-clock time.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};
use std::sync::Arc;
use std::time::{Duration, Instant};

use lch::ainfinity::{self, bits, check_ainfty_relations, check_degrees, table, tuples, unit, AugCategory, AugData, Cat, Category, Certificate, Vec128};
use lch::augmentation::*;
use lch::bimodule::{self, *};
use lch::dga::CeDga;
use lch::diagram::{LagrangianDiagram, DEFAULT_REGION_CAP};
use lch::duality::*;
use lch::f2linalg::{F2Vec, Homology, Span};
use rand::{rngs::StdRng, Rng, SeedableRng};

type Outcome = Result<(), String>;

struct Knot {
    diagram: LagrangianDiagram,
    dga: CeDga,
    augs: Vec<Augmentation>,
}

fn knot(name: &str) -> Knot {
    let p = format!("{}/../../corpus/{name}.diagram", env!("CARGO_MANIFEST_DIR"));
    let diagram = LagrangianDiagram::parse(&std::fs::read_to_string(p).unwrap()).unwrap();
    let dga = CeDga::from_diagram_default(&diagram).unwrap();
    let augs = enumerate_augmentations(&dga).unwrap();
    Knot { diagram, dga, augs }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok { Ok(()) } else { Err(msg()) }
}

fn cert(c: &Certificate) -> Outcome {
    ensure(c.passed(), || format!("{} (K={}): {}", c.check, c.k, c.failures.first().cloned().unwrap_or_default()))
}

fn strings<'a>(v: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
    v.into_iter().map(String::from).collect()
}

fn criterion_1(k: &Knot) -> Outcome {
    let g = &k.dga;
    let grades: Vec<i64> = g.chords.iter().map(|c| c.grading).collect();
    ensure(grades == [1, -1, -1, 0, 0, 1, 1], || format!("gradings {grades:?}"))?;
    let want = [("a4", "a2 + a3 + a2 a1 a3"), ("a6", "a5 + t + a1 a3 a5"), ("a7", "1 + a5 + a5 a2 a1")];
    for (i, c) in g.chords.iter().enumerate() {
        let expected = match want.iter().find(|(l, _)| *l == c.label) {
            Some((_, s)) => g.parse_element(s).ok_or_else(|| format!("cannot parse {s}"))?,
            None => lch::dga::AlgElement::zero(),
        };
        ensure(g.differential[i] == expected, || format!("∂{} = {}", c.label, g.format_element(&g.differential[i])))?;
    }
    ensure(g.check_d_squared().passed(), || "∂² ≠ 0".into())?;
    ensure(g.check_degree().passed(), || "∂ does not lower degree by one".into())
}

fn criterion_2(k: &Knot) -> Outcome {
    let g = &k.dga;
    ensure(k.augs.len() == 2, || format!("{} augmentations", k.augs.len()))?;
    let want = [("a4", "a2 + a3 + a2 a1 a3"), ("a6", "a5 + a1 a3 + a1 a3 a5"), ("a7", "a5 + a2 a1 + a5 a2 a1")];
    for eps in &k.augs {
        let tw = twisted_differential(g, eps).map_err(|e| e.to_string())?;
        for (i, c) in g.chords.iter().enumerate() {
            let expected = want.iter().find(|(l, _)| *l == c.label).map_or(lch::dga::AlgElement::zero(), |(_, s)| g.parse_element(s).unwrap());
            ensure(tw.of_chord[i] == expected, || format!("∂^ε {} = {}", c.label, g.format_element(&tw.of_chord[i])))?;
        }
    }
    Ok(())
}

fn class_span(h: &Homology, degree: i64, reps: &[F2Vec]) -> bool {
    let Some(group) = h.groups.get(&degree) else { return false };
    let mut seen = Span::new(group.dim());
    reps.iter().all(|r| group.class_of(r).is_some_and(|c| seen.insert(&c))) && seen.dim() == group.dim()
}

fn criterion_3(k: &Knot) -> Outcome {
    let g = &k.dga;
    let n = g.chords.len();
    let v = |idx: &[usize]| F2Vec::from_indices(n, idx.iter().map(|i| i - 1));
    for eps in &k.augs {
        let h = linearized_homology(g, eps).map_err(|e| e.to_string())?;
        let dims: Vec<(i64, usize)> = h.dims().into_iter().filter(|(_, d)| *d > 0).collect();
        ensure(dims == [(-1, 1), (1, 2)], || format!("LCH dims {dims:?}"))?;
        let co = linearized_cohomology(g, eps).map_err(|e| e.to_string())?;
        ensure(co.dim(1) == 2 && co.dim(-1) == 1 && co.total_dim() == 3, || "LCH^* dims".into())?;
        ensure(class_span(&co, 1, &[v(&[1]), v(&[6])]), || "[a1*], [a6*] do not span LCH^1".into())?;
        ensure(class_span(&co, -1, &[v(&[2, 3])]), || "[a2*+a3*] does not span LCH^-1".into())?;
    }
    Ok(())
}

fn criterion_4(k: &Knot) -> Outcome {
    let d = Arc::new(AugData::new(&k.dga, k.augs.clone()));
    let plus = AugCategory::plus(d.clone());
    let entries = table(&plus, 3);
    let diag: BTreeSet<String> = entries
        .iter()
        .filter(|e| e.objects.iter().all(|&o| o == 0) && !e.inputs.iter().any(|i| i == "y+"))
        .map(|e| e.display())
        .collect();
    let want = strings([
        "(ε1,ε1)\tm^1(a2+)\ta4+",
        "(ε1,ε1)\tm^1(a3+)\ta4+",
        "(ε1,ε1)\tm^1(a5+)\ta6+ + a7+",
        "(ε1,ε1)\tm^1(x+)\ta6+",
        "(ε1,ε1,ε1)\tm^2(a1+,a2+)\ta7+",
        "(ε1,ε1,ε1)\tm^2(a3+,a1+)\ta6+",
        "(ε1,ε1,ε1,ε1)\tm^3(a3+,a1+,a2+)\ta4+",
        "(ε1,ε1,ε1,ε1)\tm^3(a5+,a3+,a1+)\ta6+",
        "(ε1,ε1,ε1,ε1)\tm^3(a1+,a2+,a5+)\ta7+",
    ]);
    ensure(diag == want, || format!("Aug₊ table on (ε1,ε1) differs: {:?}", diag.symmetric_difference(&want).collect::<Vec<_>>()))?;
    ensure(entries.iter().any(|e| e.display() == "(ε1,ε2)\tm^1(y+)\ta4+"), || "m^1(y+) on (ε1,ε2) is not a4+".into())?;

    let minus = AugCategory::minus(d.clone());
    let n = k.dga.chords.len();
    for (o, eps) in d.augs.iter().enumerate() {
        let cb = cobar(&k.dga, eps).map_err(|e| e.to_string())?;
        for len in 1..=4 {
            for t in tuples(n, len) {
                let got: BTreeSet<usize> = bits(minus.m(&vec![o; len + 1], &t)).collect();
                ensure(got == cb.eval(&t), || format!("Aug₋ differs from cobar at ε{} {t:?}", o + 1))?;
            }
        }
    }
    for cat in [plus, minus] {
        cert(&check_ainfty_relations(&cat, 4))?;
        cert(&check_degrees(&cat, 4))?;
    }
    Ok(())
}

fn criterion_5(set: &AugBimoduleSet, data: &VeryWeakData) -> Outcome {
    for c in check_bimodules(set, 3) {
        cert(&c)?;
    }
    let got: BTreeSet<String> =
        morphism_table(set.cat.as_ref(), data.rho_dual.dual.as_ref(), 2).into_iter().filter(|l| !l.contains("ε2")).collect();
    let mut want = strings(["^0|0(a6∨) on (ε1,ε1)\tx∨"]);
    for i in 1..=7 {
        want.insert(format!("^1|0(a{i}+,a{i}∨) on (ε1,ε1,ε1)\ty∨"));
        want.insert(format!("^0|1(a{i}∨,a{i}+) on (ε1,ε1,ε1)\ty∨"));
    }
    ensure(got == want, || format!("ρ∨ components differ: {:?}", got.symmetric_difference(&want).collect::<Vec<_>>()))?;
    cert(&check_equal(set.cat.as_ref(), &data.rho_dual.dual, &data.rho_dual.formula, 3, "rho_dual_formula"))
}

/// The listed `η` components on `(ε1, ε1)` in printed order.
const ETA_TABLE: [(&str, &str); 15] = [
    ("^0|0(a1∨) on (ε1,ε1)", "a2+ + a3+"),
    ("^0|0(a2∨) on (ε1,ε1)", "a1+ + a6+"),
    ("^0|0(a3∨) on (ε1,ε1)", "a1+ + a7+"),
    ("^0|0(a4∨) on (ε1,ε1)", "a5+"),
    ("^0|0(a5∨) on (ε1,ε1)", "a4+"),
    ("^0|0(a6∨) on (ε1,ε1)", "a2+ + y+"),
    ("^0|0(a7∨) on (ε1,ε1)", "a3+"),
    ("^1|0(a4+,a2∨) on (ε1,ε1,ε1)", "a6+"),
    ("^1|0(a4+,a7∨) on (ε1,ε1,ε1)", "a3+"),
    ("^0|1(a6∨,a4+) on (ε1,ε1,ε1)", "a2+"),
    ("^0|1(a3∨,a4+) on (ε1,ε1,ε1)", "a7+"),
    ("^2|0(a5+,a4+,a2∨) on (ε1,ε1,ε1,ε1)", "a6+"),
    ("^2|0(a5+,a4+,a7∨) on (ε1,ε1,ε1,ε1)", "a3+"),
    ("^0|2(a3∨,a4+,a5+) on (ε1,ε1,ε1,ε1)", "a7+"),
    ("^0|2(a6∨,a4+,a5+) on (ε1,ε1,ε1,ε1)", "a2+"),
];

fn criterion_6(set: &AugBimoduleSet, data: &VeryWeakData) -> Outcome {
    let cat = set.cat.as_ref();
    cert(&renamed(is_morphism(&set.cat, &data.theta, 2), "theta_morphism"))?;
    linear_quasi_iso(cat, &data.theta).map_err(|e| format!("θ: {e}"))?;
    cert(&renamed(is_morphism(&set.cat, &data.eta, 2), "eta_morphism"))?;
    linear_quasi_iso(cat, &data.eta).map_err(|e| format!("cone(η^0|0): {e}"))?;

    let lines = morphism_table(cat, data.eta.as_ref(), 2);
    let outputs = |head: &str| -> Option<Vec<String>> {
        lines.iter().find_map(|l| l.split_once('\t').filter(|(h, _)| *h == head).map(|(_, o)| o.split(" + ").map(String::from).collect()))
    };
    let missing: Vec<String> = ETA_TABLE
        .iter()
        .filter(|(head, out)| match outputs(head) {
            None => true,
            Some(got) if head.starts_with("^0|0") => got.join(" + ") != *out,
            Some(got) => !got.iter().any(|o| o == out),
        })
        .map(|(head, out)| format!("{head} = {out}"))
        .collect();
    ensure(missing.is_empty(), || format!("{} of 15 η components reproduced; missing {}", 15 - missing.len(), missing.join("; ")))
}

fn renamed(mut c: Certificate, name: &str) -> Certificate {
    c.check = name.into();
    c
}

fn criterion_7(set: &AugBimoduleSet, data: &VeryWeakData) -> Outcome {
    cert(&check_equal(set.cat.as_ref(), &data.theta_rho_dual, &theta_rho_dual_table(set), 3, "theta_rho_dual_table"))?;
    cert(&renamed(is_homotopy(&set.cat, &data.h, &data.theta_rho_dual, &data.pi_n_eta, 3), "theta_rho_dual_homotopic_pi_n_eta"))?;
    let zero: Vec<String> =
        morphism_table(set.cat.as_ref(), data.pi_n_eta.as_ref(), 0).into_iter().filter(|l| l.contains("(ε1,ε1)")).collect();
    ensure(zero == ["^0|0(a6∨) on (ε1,ε1)\ty+"], || format!("(π_N η)^0|0 on (ε1,ε1) is {zero:?}"))
}

fn criterion_8(k: &Knot, set: &AugBimoduleSet, disks: &TwoPositiveDisks) -> Outcome {
    let w = build_weak_cy_certificate(set, &k.diagram, disks, 2).map_err(|e| e.to_string())?;
    for c in &w.checks {
        cert(c)?;
    }
    ensure(w.k == 2, || "certificate order".into())
}

fn criterion_9(knots: &[&Knot]) -> Outcome {
    for k in knots {
        for e in 0..k.augs.len() {
            let r = duality_les_check(&k.dga, &k.augs, e).map_err(|e| e.to_string())?;
            ensure(r.passed(), || format!("ε{}: {}", e + 1, r.failures.join("; ")))?;
            ensure(r.data.sigma.get(&1).copied().unwrap_or(0) == 1, || "σ not injective in degree 1".into())?;
            ensure(r.data.sigma.get(&0).copied().unwrap_or(0) == 0, || "σ nonzero in degree 0".into())?;
        }
    }
    Ok(())
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

fn random_bimodule(dim: usize, seed: u64) -> Bimod {
    Arc::new(Explicit {
        labels: (0..dim).map(|i| format!("g{i}")).collect(),
        grades: vec![0; dim],
        structure: Box::new(move |c, pre, w, post| noise(seed, 2, (c, pre, w, post), dim)),
    })
}

fn criterion_10(k: &Knot, set: &AugBimoduleSet) -> Outcome {
    let cat = set.cat.as_ref();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..16 {
        let seed: u64 = rng.gen();
        let dim_t = set.n.dim();
        let f = from_fn(set.m_plus.clone(), set.n.clone(), 0, move |c, pre, w, post| noise(seed, 3, (c, pre, w, post), dim_t));
        let dd = delta(set.cat.clone(), delta(set.cat.clone(), f));
        cert(&sweep(cat, set.m_plus.as_ref(), 2, "delta_squared", &|c, pre, w, post| dd.apply(c, pre, w, post), &|i| set.n.label(i)))?;

        let dim = rng.gen_range(1..5);
        let m = random_bimodule(dim, seed);
        cert(&check_same_structure(cat, &dual(dual(m.clone())), &m, 2, "double_dual"))?;
        let g = from_fn(m.clone(), m.clone(), 0, move |c, pre, w, post| noise(seed ^ 1, 3, (c, pre, w, post), dim));
        let gg = reinterpret(dual_morphism(dual_morphism(g.clone())), m.clone(), m.clone());
        cert(&check_equal(cat, &gg, &g, 2, "double_dual_morphism"))?;

        let cat_dim = cat.dim();
        let functor = |salt: u64| -> Arc<dyn Functor> {
            Arc::new(LinearFunctor { objects: (0..cat.num_objects()).collect(), images: (0..cat_dim).map(|i| noise(seed ^ salt, 1, i, cat_dim)).collect() })
        };
        let (fl, fr) = (functor(7), functor(11));
        let a = pullback(dual(m.clone()), fl.clone(), fr.clone());
        let b = dual(pullback(m, fr, fl));
        cert(&check_same_structure(cat, &a, &b, 2, "pullback_dual"))?;
    }

    let cyl = cylinder(&set.rho());
    let (inc, proj, h) = (cyl.include(), cyl.project(), cyl.homotopy());
    cert(&check_bimodule(cat, &cyl.cyl.module, 2))?;
    cert(&check_equal(cat, &compose(proj.clone(), inc.clone()), &identity(cyl.target_module().clone()), 2, "cylinder_retraction"))?;
    cert(&is_homotopy(&set.cat, &h, &identity(cyl.cyl.module.clone()), &compose(inc, proj), 2))?;

    let d = Arc::new(AugData::new(&k.dga, k.augs.clone()));
    let plus: Cat = Arc::new(AugCategory::plus(d));
    let (a1, a2, a6) = (0, 1, 5);
    let flipped = ainfinity::Mutated { inner: plus.clone(), chain: vec![0, 0, 0], inputs: vec![a2, a1], flip: unit(a6) };
    ensure(!check_ainfty_relations(&flipped, 3).passed(), || "mutated m² passes the A∞ relations".into())?;
    let flipped = ainfinity::Mutated { inner: plus, chain: vec![0, 0], inputs: vec![a1], flip: unit(a6) };
    ensure(!check_ainfty_relations(&flipped, 2).passed(), || "mutated m¹ passes the A∞ relations".into())?;

    let (x, y) = (0, 1);
    let id: Morph = Arc::new(bimodule::Mutated { inner: identity(set.n.clone()), chain: vec![0, 0], pre: vec![], w: y, post: vec![], flip: unit(x) });
    let c = is_morphism(&set.cat, &id, 1);
    ensure(c.failures.iter().any(|f| f == "^1|0(y+,y+) on (ε1,ε1,ε2) gives x+"), || format!("mutated identity: {:?}", c.failures))?;

    let mut les = LesData::default();
    les.h_lambda.extend([(0, 1), (1, 1)]);
    ensure(!check_les(&les).is_empty(), || "an acyclic sequence passes the exactness check".into())
}

fn main() {
    let started = Instant::now();
    let fig8 = knot("figure8");
    let unknot = knot("unknot");
    let set = build_bimodules(&fig8.dga, fig8.augs.clone());
    let disks = TwoPositiveDisks::enumerate(&fig8.diagram, DEFAULT_REGION_CAP).unwrap();
    let data = very_weak_data(&set, &disks);
    println!("setup: {:.2?}", started.elapsed());

    type Check<'a> = (&'a str, Duration, Box<dyn Fn() -> Outcome + 'a>);
    let checks: Vec<Check> = vec![
        ("figure-eight DGA, ∂² = 0, degree", Duration::from_secs(1), Box::new(|| criterion_1(&fig8))),
        ("two augmentations, twisted differentials", Duration::from_secs(1), Box::new(|| criterion_2(&fig8))),
        ("LCH and LCH^ with generators", Duration::from_secs(1), Box::new(|| criterion_3(&fig8))),
        ("Aug₊ and Aug₋ tables, A∞ relations at K=4", Duration::from_secs(30), Box::new(|| criterion_4(&fig8))),
        ("M₊, M₋, N at K=3, M₊ = cone(ρ), ρ∨", Duration::from_secs(60), Box::new(|| criterion_5(&set, &data))),
        ("θ and η morphisms, quasi-isos, η table", Duration::from_secs(120), Box::new(|| criterion_6(&set, &data))),
        ("θρ∨ + π_N η = δH at K=3", Duration::from_secs(120), Box::new(|| criterion_7(&set, &data))),
        ("weak Calabi-Yau certificate at K=2", Duration::from_secs(300), Box::new(|| criterion_8(&fig8, &set, &disks))),
        ("duality exact sequence", Duration::from_secs(10), Box::new(|| criterion_9(&[&fig8, &unknot]))),
        ("property suites and mutation controls", Duration::from_secs(600), Box::new(|| criterion_10(&fig8, &set))),
    ];

    let mut failed = 0;
    for (i, (name, budget, run)) in checks.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let elapsed = t.elapsed();
        let outcome = outcome.and_then(|()| ensure(elapsed <= *budget, || format!("took longer than {budget:?}")));
        match outcome {
            Ok(()) => println!("PASS criterion {:>2}: {name} ({elapsed:.2?})", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name} ({elapsed:.2?}): {e}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed in {:.2?}", checks.len() - failed, checks.len(), started.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
