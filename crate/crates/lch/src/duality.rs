//! The augmentation bimodules `M₊`, `M₋`, `N` over `Aug₊`, the duality maps
//! `ρ`, `ρ∨`, `θ`, `H`, `π_Nη` and `η`, and the relative Calabi-Yau
//! certificates assembled from them.
//!
//! Bimodule inputs follow [`crate::bimodule`]: composition order, with the
//! printed tuple reversed. A doubly enriched disk of `∂z` mixed at a letter
//! `L` is read counterclockwise from `L`: the arc after `L` carries the
//! `pre` inputs, then the module input `z`, then the arc before `L` carries
//! the `post` inputs. Two-positive disks for `η` are read the same way from
//! the output corner.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ainfinity::{enrichment_count, unit, AugCategory, AugData, Cat, Certificate, Sym, Vec128};
use crate::augmentation::{linearized_cohomology, linearized_homology, Augmentation, AugmentationError};
use crate::bimodule::{
    check_bimodule, check_equal, check_morphism_degree, check_same_structure, check_submodule, check_unital, compose,
    cocone, diagonal, dual, dual_morphism, from_fn, is_homotopy, is_morphism, linear_complex, linear_matrix,
    linear_quasi_iso, naive, naive_iso, permute, pullback, quasi_inverse, reinterpret, shift, submodule_cone_morphism,
    sum, zero, Bimod, BimoduleError, Explicit, LinearFunctor, Morph, SubmoduleCone,
};
use crate::dga::{word_from_boundary, CeDga, Letter, Word};
use crate::diagram::{BoundaryLetter, DiskPattern, LagrangianDiagram};
use crate::f2linalg::{reduce_grade, ChainMap, LinalgError};

#[derive(Debug, Error)]
pub enum DualityError {
    #[error("two-positive disk search from `{0}` was cut short by the region cap {1} times")]
    IncompleteDiskSearch(String, usize),
    #[error(transparent)]
    Bimodule(#[from] BimoduleError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Augmentation(#[from] AugmentationError),
}

/// Which `x⁺` runs a mixed base point may absorb: `m₀` at the end of `post`,
/// `n₀` at the start of `pre`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixedRule {
    /// `ρ∨`: none at `t`, any at `t⁻¹`.
    RhoDual,
    /// `π_Nη`: `m₀ ≤ 1, n₀ = 0` at `t`, `m₀ = 0` at `t⁻¹`.
    PiEta,
}

impl MixedRule {
    fn allows(self, inverse: bool, m0: usize, n0: usize) -> bool {
        match (self, inverse) {
            (MixedRule::RhoDual, false) => m0 == 0 && n0 == 0,
            (MixedRule::RhoDual, true) => true,
            (MixedRule::PiEta, false) => m0 <= 1 && n0 == 0,
            (MixedRule::PiEta, true) => m0 == 0,
        }
    }
}

/// Parity of doubly enriched disks of `word` mixed at a base point.
pub fn mixed_at_base(data: &AugData, word: &[Letter], pre: &[Sym], post: &[Sym], chain: &[usize], rule: MixedRule) -> bool {
    let (p, q) = (pre.len(), post.len());
    let end = chain.len() - 1;
    let lead = pre.iter().take_while(|&&s| s == Sym::X).count();
    let trail = post.iter().rev().take_while(|&&s| s == Sym::X).count();
    let mut parity = false;
    for (i, &l) in word.iter().enumerate() {
        let inverse = match l {
            Letter::T(_) => false,
            Letter::TInv(_) => true,
            Letter::Chord(_) => continue,
        };
        for n0 in 0..=lead {
            for m0 in 0..=trail {
                if rule.allows(inverse, m0, n0)
                    && enrichment_count(data, &word[i + 1..], &pre[n0..], &chain[n0..=p], true)
                    && enrichment_count(data, &word[..i], &post[..q - m0], &chain[p + 1..=end - m0], true)
                {
                    parity = !parity;
                }
            }
        }
    }
    parity
}

/// Parity of doubly enriched disks of `word` mixed at an occurrence of `w`.
pub fn mixed_at_chord(data: &AugData, word: &[Letter], w: usize, pre: &[Sym], post: &[Sym], chain: &[usize]) -> bool {
    let p = pre.len();
    let mut parity = false;
    for (i, &l) in word.iter().enumerate() {
        if l == Letter::Chord(w)
            && enrichment_count(data, &word[..i], pre, &chain[..=p], true)
            && enrichment_count(data, &word[i + 1..], post, &chain[p + 1..], true)
        {
            parity = !parity;
        }
    }
    parity
}

/// Action of a strict unit `y` among the category inputs, if present.
fn unit_action(y: usize, pre: &[usize], w: usize, post: &[usize]) -> Option<Vec128> {
    if !pre.contains(&y) && !post.contains(&y) {
        return None;
    }
    Some(if pre.len() + post.len() == 1 { unit(w) } else { 0 })
}

/// `M₊`, `M₋` and `N` over `Aug₊`, with the splitting `M₊ = cone(ρ)`.
pub struct AugBimoduleSet {
    pub data: Arc<AugData>,
    pub plus: Arc<AugCategory>,
    pub cat: Cat,
    pub chords: Vec<usize>,
    /// The diagonal bimodule of `Aug₊`.
    pub m_plus: Bimod,
    /// The chord submodule of `M₊`.
    pub m_minus: Bimod,
    /// `M₋` from disks of `∂z` mixed at a chord.
    pub m_minus_disks: Bimod,
    /// The quotient `M₊/M₋` on `x⁺, y⁺`.
    pub n: Bimod,
    /// `N` from unit laws and `n^{1|0}(x⁺, y⁺) = n^{0|1}(y⁺, x⁺) = x⁺`.
    pub n_explicit: Bimod,
    /// `π*C_Δ` for the projection onto the circle category.
    pub n_pullback: Bimod,
    pub split: SubmoduleCone,
    pub m_minus_dual: Bimod,
    pub n_dual: Bimod,
}

impl AugBimoduleSet {
    pub fn x(&self) -> usize {
        self.plus.x()
    }

    pub fn y(&self) -> usize {
        self.plus.y()
    }

    pub fn syms(&self, inputs: &[usize]) -> Vec<Sym> {
        inputs.iter().map(|&i| self.plus.sym(i)).collect()
    }

    /// `ρ: N[−1] → M₋`.
    pub fn rho(&self) -> Morph {
        self.split.phi.clone()
    }

    /// `cone(ρ)`, basis `x⁺, y⁺` then the chords.
    pub fn cone_module(&self) -> Bimod {
        self.split.cone.module.clone()
    }

    /// `M₋∨[−2]`, the source of `η` and `H`.
    pub fn eta_source(&self) -> Bimod {
        shift(self.m_minus_dual.clone(), -2)
    }

    /// `N∨[−1]`, the source of `θ`.
    pub fn theta_source(&self) -> Bimod {
        shift(self.n_dual.clone(), -1)
    }
}

pub fn build_bimodules(g: &CeDga, augs: Vec<Augmentation>) -> AugBimoduleSet {
    let data = Arc::new(AugData::new(g, augs));
    let plus = Arc::new(AugCategory::plus(data.clone()));
    let cat: Cat = plus.clone();
    let nc = data.n_chords();
    let chords: Vec<usize> = (0..nc).collect();
    let m_plus = diagonal(cat.clone());
    let split = submodule_cone_morphism(&m_plus, &chords);
    let (x, y) = (plus.x(), plus.y());

    let (d, pl) = (data.clone(), plus.clone());
    let m_minus_disks: Bimod = crate::bimodule::memo_bimodule(Arc::new(Explicit {
        labels: data.labels.iter().map(|l| format!("{l}-")).collect(),
        grades: data.grades.iter().map(|g| g + 1).collect(),
        structure: Box::new(move |chain, pre, w, post| {
            if let Some(v) = unit_action(y, pre, w, post) {
                return v;
            }
            let (ps, qs): (Vec<Sym>, Vec<Sym>) = (pre.iter().map(|&i| pl.sym(i)).collect(), post.iter().map(|&i| pl.sym(i)).collect());
            let mut out = 0;
            for (z, words) in d.words.iter().enumerate() {
                let c = words.iter().filter(|word| mixed_at_chord(&d, word, w, &ps, &qs, chain)).count();
                if c % 2 == 1 {
                    out ^= unit(z);
                }
            }
            out
        }),
    }));

    let n_explicit: Bimod = Arc::new(Explicit {
        labels: vec!["x+".into(), "y+".into()],
        grades: vec![1, 0],
        structure: Box::new(move |_, pre, w, post| {
            if let Some(v) = unit_action(y, pre, w, post) {
                return v;
            }
            let single_x = |v: &[usize]| v.len() == 1 && v[0] == x;
            if w == 1 && ((pre.is_empty() && single_x(post)) || (post.is_empty() && single_x(pre))) {
                unit(0)
            } else {
                0
            }
        }),
    });

    let circle: Cat = Arc::new(AugCategory::circle(data.clone()));
    let mut images = vec![0; nc + 2];
    images[x] = unit(0);
    images[y] = unit(1);
    let pi = Arc::new(LinearFunctor { objects: (0..data.augs.len()).collect(), images });
    let n_pullback = pullback(diagonal(circle), pi.clone(), pi);

    let m_minus_dual = dual(split.sub.clone());
    let n_dual = dual(split.quotient.clone());
    AugBimoduleSet {
        data,
        plus,
        cat,
        chords,
        m_plus,
        m_minus: split.sub.clone(),
        m_minus_disks,
        n: split.quotient.clone(),
        n_explicit,
        n_pullback,
        split,
        m_minus_dual,
        n_dual,
    }
}

/// `ρ∨: M₋∨ → N∨[1]` computed twice.
pub struct RhoDual {
    /// The adjoint of `ρ`.
    pub dual: Morph,
    /// Thin `y∨` terms plus disks mixed at a base point with output `x∨`.
    pub formula: Morph,
}

pub fn rho_dual(set: &AugBimoduleSet) -> RhoDual {
    let dual_map = dual_morphism(set.rho());
    let data = set.data.clone();
    let plus = set.plus.clone();
    let formula = from_fn(dual_map.source().clone(), dual_map.target().clone(), 0, move |chain, pre, z, post| {
        let mut out = 0;
        match (pre, post) {
            ([], []) if data.eps(chain[0], z) != data.eps(chain[1], z) => out ^= unit(1),
            ([a], []) | ([], [a]) if *a == z => out ^= unit(1),
            _ => {}
        }
        let ps: Vec<Sym> = pre.iter().map(|&i| plus.sym(i)).collect();
        let qs: Vec<Sym> = post.iter().map(|&i| plus.sym(i)).collect();
        let c = data.words[z].iter().filter(|w| mixed_at_base(&data, w, &ps, &qs, chain, MixedRule::RhoDual)).count();
        if c % 2 == 1 {
            out ^= unit(0);
        }
        out
    });
    RhoDual { dual: dual_map, formula }
}

/// `θ: N∨[−1] → N`: `y∨ ↦ x⁺`, `x∨ ↦ y⁺`, and the same with one `x⁺` on the right.
pub fn theta(set: &AugBimoduleSet) -> Morph {
    let x = set.x();
    from_fn(set.theta_source(), set.n.clone(), 0, move |_, pre, w, post| {
        let swapped = unit(1 - w);
        match (pre, post) {
            ([], []) => swapped,
            ([a], []) if *a == x => swapped,
            _ => 0,
        }
    })
}

/// `H: M₋∨[−2] → N` of degree −1.
pub fn homotopy_h(set: &AugBimoduleSet) -> Morph {
    let data = set.data.clone();
    from_fn(set.eta_source(), set.n.clone(), -1, move |chain, pre, z, post| match (pre, post) {
        ([], []) if data.eps(chain[0], z) != data.eps(chain[1], z) => unit(1),
        ([a], []) | ([], [a]) if *a == z => unit(1),
        _ => 0,
    })
}

/// The `x⁺, y⁺` components of `η`, as bits `0, 1`.
fn pi_n_eta_value(data: &AugData, plus: &AugCategory, chain: &[usize], pre: &[usize], z: usize, post: &[usize]) -> Vec128 {
    let x = plus.x();
    let mut out = 0;
    let thin = match (pre, post) {
        ([], []) => data.eps(chain[0], z) != data.eps(chain[1], z),
        ([], [a]) if *a == x => data.eps(chain[0], z) != data.eps(chain[1], z),
        ([], [a]) | ([a], []) => *a == z,
        ([a], [b]) => *a == z && *b == x,
        ([], [a, b]) => *a == z && *b == x,
        _ => false,
    };
    if thin {
        out ^= unit(0);
    }
    let ps: Vec<Sym> = pre.iter().map(|&i| plus.sym(i)).collect();
    let qs: Vec<Sym> = post.iter().map(|&i| plus.sym(i)).collect();
    let c = data.words[z].iter().filter(|w| mixed_at_base(data, w, &ps, &qs, chain, MixedRule::PiEta)).count();
    if c % 2 == 1 {
        out ^= unit(1);
    }
    out
}

/// `π_Nη: M₋∨[−2] → N` from thin disks and disks mixed at a base point.
pub fn pi_n_eta(set: &AugBimoduleSet) -> Morph {
    let (data, plus) = (set.data.clone(), set.plus.clone());
    from_fn(set.eta_source(), set.n.clone(), 0, move |chain, pre, z, post| pi_n_eta_value(&data, &plus, chain, pre, z, post))
}

/// One two-positive disk seen from its output corner: the other positive
/// corner `input`, the arc from the output to it and the arc back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoPositiveDisk {
    pub input: usize,
    pub first_arc: Word,
    pub second_arc: Word,
}

/// Two-positive disks grouped by output chord.
#[derive(Clone, Debug, Default)]
pub struct TwoPositiveDisks {
    pub by_output: Vec<Vec<TwoPositiveDisk>>,
}

impl TwoPositiveDisks {
    /// Two-positive disks of the diagram itself.
    pub fn thick(d: &LagrangianDiagram, region_cap: usize) -> Result<Self, DualityError> {
        let mut by_output = Vec::new();
        for o in 0..d.crossings.len() {
            let search = d.enumerate_disks(DiskPattern::TwoPositiveAt(o, None), region_cap);
            if !search.complete() {
                return Err(DualityError::IncompleteDiskSearch(d.crossings[o].label.clone(), search.cap_hits));
            }
            let mut disks = Vec::new();
            for disk in &search.disks {
                let split = disk.word.iter().position(|l| matches!(l, BoundaryLetter::Corner(c) if c.positive));
                let Some(i) = split else { continue };
                let BoundaryLetter::Corner(c) = disk.word[i] else { unreachable!() };
                disks.push(TwoPositiveDisk {
                    input: c.crossing,
                    first_arc: word_from_boundary(&disk.word[..i]),
                    second_arc: word_from_boundary(&disk.word[i + 1..]),
                });
            }
            by_output.push(disks);
        }
        Ok(TwoPositiveDisks { by_output })
    }

    /// Thick disks together with the thin disks of the 2-copy.
    pub fn enumerate(d: &LagrangianDiagram, region_cap: usize) -> Result<Self, DualityError> {
        let mut disks = Self::thick(d, region_cap)?;
        disks.add_thin(d, BandOutput::Later);
        Ok(disks)
    }

    /// Adds the thin disks of the 2-copy as two-positive disks whose arcs
    /// end on the pure corners. A band runs along the knot between two
    /// passages, never across a base point; a parallelogram sits inside
    /// every crossing whose over strand enters at slot 3.
    pub fn add_thin(&mut self, d: &LagrangianDiagram, side: BandOutput) {
        let ps = passages(d);
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                let ((oc, o_over), (ic, i_over)) = match side {
                    BandOutput::Later => (ps[j], ps[i]),
                    BandOutput::Earlier => (ps[i], ps[j]),
                };
                let mut first = Word::new();
                let mut second = Word::new();
                if !o_over {
                    first.push(Letter::Chord(oc));
                }
                if i_over {
                    first.push(Letter::Chord(ic));
                } else {
                    second.push(Letter::Chord(ic));
                }
                if o_over {
                    second.push(Letter::Chord(oc));
                }
                self.by_output[oc].push(TwoPositiveDisk { input: ic, first_arc: first, second_arc: second });
            }
        }
        for (c, crossing) in d.crossings.iter().enumerate() {
            if !crossing.over_enters_at_1 {
                let arc = vec![Letter::Chord(c)];
                self.by_output[c].push(TwoPositiveDisk { input: c, first_arc: arc.clone(), second_arc: arc });
            }
        }
    }
}

/// Which end of a band carries its output corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandOutput {
    Earlier,
    Later,
}

/// Crossings met along the knot from the first base point, each with
/// whether the knot passes over there.
fn passages(d: &LagrangianDiagram) -> Vec<(usize, bool)> {
    let Some(bp) = d.base_points.first() else { return Vec::new() };
    let mut out = Vec::new();
    let mut e = bp.edge;
    loop {
        let h = d.edges[e].head;
        out.push((h.crossing, h.slot % 2 == 1));
        e = d.crossings[h.crossing].edges[(h.slot + 2) % 4];
        if e == bp.edge {
            return out;
        }
    }
}

/// How the arcs of a two-positive disk carry the inputs of `η`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ArcConvention {
    /// The arc leaving the output corner carries `pre`.
    FirstArcPre,
    /// The arc leaving the output corner carries `post`.
    FirstArcPost,
}

pub const ETA_CONVENTION: ArcConvention = ArcConvention::FirstArcPre;

/// `η: M₋∨[−2] → M₊`: chord outputs from two-positive disks, `x⁺, y⁺`
/// outputs from [`pi_n_eta`].
pub fn eta(set: &AugBimoduleSet, disks: &TwoPositiveDisks) -> Morph {
    eta_with(set, disks, ETA_CONVENTION)
}

pub fn eta_with(set: &AugBimoduleSet, disks: &TwoPositiveDisks, convention: ArcConvention) -> Morph {
    let (data, plus) = (set.data.clone(), set.plus.clone());
    let disks = disks.clone();
    let nc = data.n_chords();
    from_fn(set.eta_source(), set.m_plus.clone(), 0, move |chain, pre, z, post| {
        let p = pre.len();
        let ps: Vec<Sym> = pre.iter().map(|&i| plus.sym(i)).collect();
        let qs: Vec<Sym> = post.iter().map(|&i| plus.sym(i)).collect();
        let mut out = pi_n_eta_value(&data, &plus, chain, pre, z, post) << nc;
        for (o, list) in disks.by_output.iter().enumerate() {
            let mut parity = false;
            for disk in list.iter().filter(|d| d.input == z) {
                let (a, b) = match convention {
                    ArcConvention::FirstArcPre => (&disk.first_arc, &disk.second_arc),
                    ArcConvention::FirstArcPost => (&disk.second_arc, &disk.first_arc),
                };
                if enrichment_count(&data, a, &ps, &chain[..=p], true) && enrichment_count(&data, b, &qs, &chain[p + 1..], true) {
                    parity = !parity;
                }
            }
            if parity {
                out ^= unit(o);
            }
        }
        out
    })
}

/// `η` followed by the relabelling `M₊ → cone(ρ)`.
pub fn eta_into_cone(set: &AugBimoduleSet, eta: &Morph) -> Morph {
    let nc = set.data.n_chords();
    let images: Vec<usize> = (0..nc + 2).map(|i| if i < nc { i + 2 } else { i - nc }).collect();
    compose(naive_iso(set.m_plus.clone(), set.cone_module(), &images), eta.clone())
}

/// Explicit `θρ∨`: thin `x⁺` terms, and `y⁺` wherever `ρ∨` has an `x∨`
/// term, directly or after one `x⁺` on the right.
pub fn theta_rho_dual_table(set: &AugBimoduleSet) -> Morph {
    let (data, plus) = (set.data.clone(), set.plus.clone());
    let x = set.x();
    from_fn(set.eta_source(), set.n.clone(), 0, move |chain, pre, z, post| {
        let thin = match (pre, post) {
            ([], []) => data.eps(chain[0], z) != data.eps(chain[1], z),
            ([a], []) if *a == x => data.eps(chain[1], z) != data.eps(chain[2], z),
            ([a], []) | ([], [a]) => *a == z,
            ([a], [b]) => *a == x && *b == z,
            ([a, b], []) => *a == x && *b == z,
            _ => false,
        };
        let mut out = if thin { unit(0) } else { 0 };
        let thick = |pre: &[usize], chain: &[usize]| {
            let ps: Vec<Sym> = pre.iter().map(|&i| plus.sym(i)).collect();
            let qs: Vec<Sym> = post.iter().map(|&i| plus.sym(i)).collect();
            data.words[z].iter().filter(|w| mixed_at_base(&data, w, &ps, &qs, chain, MixedRule::RhoDual)).count() % 2 == 1
        };
        let mut y = thick(pre, chain);
        if pre.first() == Some(&x) && thick(&pre[1..], &chain[1..]) {
            y = !y;
        }
        if y {
            out ^= unit(1);
        }
        out
    })
}

fn renamed(mut c: Certificate, name: &str) -> Certificate {
    c.check = name.into();
    c
}

/// A one-shot check recorded as a certificate with a single tuple.
fn single(check: &str, k: usize, failure: Option<String>) -> Certificate {
    Certificate { check: check.into(), k, tuples: 1, failures: failure.into_iter().collect() }
}

fn quasi_iso_certificate(set: &AugBimoduleSet, f: &Morph, check: &str, k: usize) -> Certificate {
    single(check, k, linear_quasi_iso(set.cat.as_ref(), f).err().map(|e| e.to_string()))
}

/// Sub-certificates of a Calabi-Yau verification, with provenance.
#[derive(Clone, Debug, Serialize)]
pub struct CyCertificate {
    #[serde(rename = "K")]
    pub k: usize,
    pub corpus_hash: String,
    pub conventions: BTreeMap<String, String>,
    pub checks: Vec<Certificate>,
}

impl CyCertificate {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Certificate::passed)
    }

    pub fn get(&self, check: &str) -> Option<&Certificate> {
        self.checks.iter().find(|c| c.check == check)
    }
}

/// SHA-256 of the canonical serialization of a diagram.
pub fn corpus_hash(d: &LagrangianDiagram) -> String {
    let digest = Sha256::digest(d.serialize().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn conventions() -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("coefficients".into(), "F2".into());
    m.insert("input_order".into(), "composition order; printed tuples reversed".into());
    m.insert("K".into(), "bounds p+q for bimodule checks".into());
    m.insert("eta_arcs".into(), format!("{ETA_CONVENTION:?}"));
    m.insert("unit".into(), "y+ acts as a strict unit on every object pair".into());
    m
}

/// The maps of the very weak structure on `ρ` and and the auxiliary maps `η′`, `K`.
pub struct VeryWeakData {
    pub rho: Morph,
    pub rho_dual: RhoDual,
    pub theta: Morph,
    pub h: Morph,
    pub eta: Morph,
    pub eta_cone: Morph,
    pub pi_n_eta: Morph,
    pub theta_rho_dual: Morph,
    pub eta_prime: Morph,
    pub k_homotopy: Morph,
}

/// `ρ∨` viewed as `M₋∨[−2] → N∨[−1]`.
pub fn rho_dual_shifted(set: &AugBimoduleSet, rd: &RhoDual) -> Morph {
    reinterpret(rd.dual.clone(), set.eta_source(), set.theta_source())
}

/// Naive projection `cone(ρ) → N`.
pub fn pi_n(set: &AugBimoduleSet) -> Morph {
    let a = set.cone_module();
    let cols = (0..a.dim()).map(|i| if i < 2 { unit(i) } else { 0 }).collect();
    naive(a, set.n.clone(), 0, cols)
}

pub fn very_weak_data(set: &AugBimoduleSet, disks: &TwoPositiveDisks) -> VeryWeakData {
    let rho = set.rho();
    let rd = rho_dual(set);
    let th = theta(set);
    let h = homotopy_h(set);
    let et = eta(set, disks);
    let eta_cone = eta_into_cone(set, &et);
    let pne = compose(pi_n(set), eta_cone.clone());
    let theta_rho_dual = compose(th.clone(), rho_dual_shifted(set, &rd));

    // cocone(ρ)[−1] = M₋∨[−1] ⊕ N∨[−1], mapped to M₋[1] and to cone(ρ).
    let cc = cocone(&rho);
    let src = shift(cc.module.clone(), -1);
    let nm = set.m_minus.dim();
    let eta_m = {
        let e = eta_cone.clone();
        move |c: &[usize], pre: &[usize], w: usize, post: &[usize]| e.apply(c, pre, w, post) >> 2
    };
    let rho_h = compose(rho.clone(), reinterpret(h.clone(), set.eta_source(), rho.source().clone()));
    let rho_theta = compose(rho.clone(), reinterpret(th.clone(), set.theta_source(), rho.source().clone()));
    let eta_prime = {
        let (rho_h, rho_theta) = (rho_h.clone(), rho_theta.clone());
        from_fn(src.clone(), shift(set.m_minus.clone(), 1), 0, move |c, pre, w, post| {
            if w < nm {
                eta_m(c, pre, w, post) ^ rho_h.apply(c, pre, w, post)
            } else {
                rho_theta.apply(c, pre, w - nm, post)
            }
        })
    };
    let k_homotopy = {
        let (h, th) = (h.clone(), th.clone());
        from_fn(src, set.cone_module(), 0, move |c, pre, w, post| {
            if w < nm { h.apply(c, pre, w, post) } else { th.apply(c, pre, w - nm, post) }
        })
    };
    VeryWeakData {
        rho,
        rho_dual: rd,
        theta: th,
        h,
        eta: et,
        eta_cone,
        pi_n_eta: pne,
        theta_rho_dual,
        eta_prime,
        k_homotopy,
    }
}

/// Module-level checks: relations, unitality, identifications, `cone(ρ) = M₊`.
pub fn check_bimodules(set: &AugBimoduleSet, k: usize) -> Vec<Certificate> {
    let cat = set.cat.as_ref();
    let y = set.y();
    let perm = set.split.cone_order(&set.m_plus, &set.chords);
    vec![
        renamed(check_bimodule(cat, &set.m_plus, k), "m_plus_relations"),
        renamed(check_bimodule(cat, &set.m_minus, k), "m_minus_relations"),
        renamed(check_bimodule(cat, &set.n, k), "n_relations"),
        renamed(check_submodule(cat, &set.m_plus, &set.chords, k), "m_minus_is_submodule"),
        check_same_structure(cat, &set.m_minus, &set.m_minus_disks, k, "m_minus_equals_disk_formula"),
        check_same_structure(cat, &set.n, &set.n_explicit, k, "n_equals_explicit"),
        check_same_structure(cat, &set.n, &set.n_pullback, k, "n_equals_pullback"),
        check_same_structure(cat, &permute(set.m_plus.clone(), perm), &set.cone_module(), k, "m_plus_equals_cone_rho"),
        renamed(check_unital(cat, &set.m_plus, y, k), "m_plus_strict_unit"),
        renamed(check_unital(cat, &set.m_minus, y, k), "m_minus_strict_unit"),
        renamed(check_unital(cat, &set.n, y, k), "n_strict_unit"),
    ]
}

/// The very weak relative Calabi-Yau structure on `ρ` up to order `K`.
pub fn verify_very_weak_cy(set: &AugBimoduleSet, d: &LagrangianDiagram, disks: &TwoPositiveDisks, k: usize) -> CyCertificate {
    let v = very_weak_data(set, disks);
    let cat = &set.cat;
    let c = cat.as_ref();
    let cc = cocone(&v.rho);
    let nm = set.m_minus.dim();
    let src = v.eta_prime.source().clone();
    let incl_n = {
        let cols = (0..2).map(|i| unit(nm + i)).collect();
        naive(set.theta_source(), src.clone(), 0, cols)
    };
    let i_m_dual = {
        let cols = (0..cc.module.dim()).map(|i| if i < nm { unit(i) } else { 0 }).collect();
        naive(src.clone(), set.eta_source(), 1, cols)
    };
    let i_m = {
        let cols = (0..nm).map(|i| unit(i + 2)).collect();
        naive(v.eta_prime.target().clone(), set.cone_module(), 1, cols)
    };
    let checks = vec![
        renamed(is_morphism(cat, &v.rho, k), "rho_morphism"),
        check_equal(c, &v.rho_dual.dual, &v.rho_dual.formula, k, "rho_dual_formula"),
        renamed(is_morphism(cat, &v.theta, k), "theta_morphism"),
        quasi_iso_certificate(set, &v.theta, "theta_quasi_iso", k),
        renamed(is_morphism(cat, &v.eta, k), "eta_morphism"),
        quasi_iso_certificate(set, &v.eta, "eta_quasi_iso", k),
        check_equal(c, &v.theta_rho_dual, &theta_rho_dual_table(set), k, "theta_rho_dual_table"),
        renamed(is_homotopy(cat, &v.h, &v.theta_rho_dual, &v.pi_n_eta, k), "theta_rho_dual_homotopic_pi_n_eta"),
        renamed(check_morphism_degree(c, &v.eta, k), "eta_degree"),
        renamed(check_morphism_degree(c, &v.theta, k), "theta_degree"),
        renamed(check_morphism_degree(c, &v.h, k), "h_degree"),
        renamed(check_morphism_degree(c, &v.rho, k), "rho_degree"),
        renamed(check_morphism_degree(c, &v.rho_dual.formula, k), "rho_dual_degree"),
        renamed(is_morphism(cat, &v.eta_prime, k), "eta_prime_morphism"),
        quasi_iso_certificate(set, &v.eta_prime, "eta_prime_quasi_iso", k),
        check_equal(
            c,
            &compose(v.eta_prime.clone(), incl_n),
            &reinterpret(compose(v.rho.clone(), reinterpret(v.theta.clone(), set.theta_source(), v.rho.source().clone())), set.theta_source(), v.eta_prime.target().clone()),
            k,
            "second_square_strict",
        ),
        renamed(
            is_homotopy(cat, &v.k_homotopy, &compose(v.eta_cone.clone(), i_m_dual), &compose(i_m, v.eta_prime.clone()), k),
            "third_square_homotopy",
        ),
    ];
    CyCertificate { k, corpus_hash: corpus_hash(d), conventions: conventions(), checks }
}

/// The weak right relative Calabi-Yau structure on `Aug₊ → C`: `κ`, `ξ`,
/// `H′`, `φ = (ξ, H′)` and `ζ = (κπ_N, ξ, H′)`, certified up to order `K`.
pub fn build_weak_cy_certificate(
    set: &AugBimoduleSet,
    d: &LagrangianDiagram,
    disks: &TwoPositiveDisks,
    k: usize,
) -> Result<CyCertificate, DualityError> {
    let v = very_weak_data(set, disks);
    let cat = &set.cat;
    let a = set.cone_module();
    let pn = pi_n(set);
    let qi_theta = quasi_inverse(cat, &v.theta)?;
    let qi_eta = quasi_inverse(cat, &v.eta_cone)?;
    let kappa = qi_theta.inverse.clone();
    let xi = qi_eta.inverse.clone();
    let rdv = rho_dual_shifted(set, &v.rho_dual);
    let kappa_pi = compose(kappa.clone(), pn.clone());
    let rho_dual_xi = compose(rdv.clone(), xi.clone());
    let h1 = compose(kappa.clone(), compose(pn.clone(), qi_eta.right.clone()));
    let h2 = compose(kappa.clone(), compose(v.h.clone(), xi.clone()));
    let h3 = compose(qi_theta.left.clone(), rho_dual_xi.clone());
    let h_prime = sum(vec![h1, h2, h3]);

    let cz = cocone(&pn);
    let target = shift(cz.module.clone(), -1);
    let zeta = {
        let (kp, hp, xi) = (kappa_pi.clone(), h_prime.clone(), xi.clone());
        from_fn(a.clone(), target, 0, move |c, pre, w, post| kp.apply(c, pre, w, post) | hp.apply(c, pre, w, post) << 2 | xi.apply(c, pre, w, post) << 4)
    };
    let a_dual = shift(dual(a.clone()), -2);
    let phi = {
        let (hp, xi) = (h_prime.clone(), xi.clone());
        from_fn(a.clone(), a_dual.clone(), 0, move |c, pre, w, post| hp.apply(c, pre, w, post) | xi.apply(c, pre, w, post) << 2)
    };
    let pn_dual = reinterpret(dual_morphism(pn.clone()), shift(dual(set.n.clone()), -1), a_dual.clone());
    let composite = compose(pn_dual, kappa_pi.clone());
    let zero_map = zero(a.clone(), a_dual, 1);

    let mut checks = Vec::new();
    let names = ["morphism", "left_homotopy", "right_homotopy"];
    for (cert, n) in qi_theta.certify(cat, k).into_iter().zip(names) {
        checks.push(renamed(cert, &format!("kappa_{n}")));
    }
    for (cert, n) in qi_eta.certify(cat, k).into_iter().zip(names) {
        checks.push(renamed(cert, &format!("xi_{n}")));
    }
    checks.push(renamed(is_homotopy(cat, &h_prime, &rho_dual_xi, &kappa_pi, k), "h_prime_homotopy"));
    checks.push(renamed(is_homotopy(cat, &phi, &composite, &zero_map, k), "phi_null_homotopy"));
    checks.push(renamed(is_morphism(cat, &zeta, k), "zeta_morphism"));
    checks.push(quasi_iso_certificate(set, &zeta, "zeta_quasi_iso", k));
    checks.push(renamed(check_morphism_degree(set.cat.as_ref(), &zeta, k), "zeta_degree"));
    Ok(CyCertificate { k, corpus_hash: corpus_hash(d), conventions: conventions(), checks })
}

/// Ranks of the duality exact sequence at one augmentation, by degree `k`:
/// `H^k(Λ) →σ LCH^k →η LCH_{−k} →ρ H^{k+1}(Λ)`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LesData {
    pub h_lambda: BTreeMap<i64, usize>,
    pub lch_co: BTreeMap<i64, usize>,
    pub lch: BTreeMap<i64, usize>,
    pub sigma: BTreeMap<i64, usize>,
    pub eta: BTreeMap<i64, usize>,
    pub rho: BTreeMap<i64, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LesReport {
    pub augmentation: usize,
    pub data: LesData,
    pub failures: Vec<String>,
}

impl LesReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn get(m: &BTreeMap<i64, usize>, k: i64) -> usize {
    m.get(&k).copied().unwrap_or(0)
}

/// Rank-exactness of the sequence, the circle cohomology and the behaviour
/// of `σ` in degrees 0 and 1.
pub fn check_les(data: &LesData) -> Vec<String> {
    let mut fails = Vec::new();
    let mut degrees: Vec<i64> = data.h_lambda.keys().chain(data.lch_co.keys()).chain(data.lch.keys()).copied().collect();
    degrees.extend(degrees.clone().iter().flat_map(|&k| [k - 1, k + 1, -k]));
    degrees.sort();
    degrees.dedup();
    for &k in &degrees {
        let at_h = get(&data.rho, k - 1) + get(&data.sigma, k);
        if at_h != get(&data.h_lambda, k) {
            fails.push(format!("not exact at H^{k}(Λ): ranks {} + {} vs dim {}", get(&data.rho, k - 1), get(&data.sigma, k), get(&data.h_lambda, k)));
        }
        let at_co = get(&data.sigma, k) + get(&data.eta, k);
        if at_co != get(&data.lch_co, k) {
            fails.push(format!("not exact at LCH^{k}: ranks {} + {} vs dim {}", get(&data.sigma, k), get(&data.eta, k), get(&data.lch_co, k)));
        }
        let at_lch = get(&data.eta, k) + get(&data.rho, k);
        if at_lch != get(&data.lch, -k) {
            fails.push(format!("not exact at LCH_{}: ranks {} + {} vs dim {}", -k, get(&data.eta, k), get(&data.rho, k), get(&data.lch, -k)));
        }
        let circle = usize::from(k == 0 || k == 1);
        if get(&data.h_lambda, k) != circle {
            fails.push(format!("H^{k}(Λ) has dimension {}, expected {circle}", get(&data.h_lambda, k)));
        }
    }
    if get(&data.sigma, 1) != get(&data.h_lambda, 1) {
        fails.push(format!("σ is not injective in degree 1 (rank {})", get(&data.sigma, 1)));
    }
    if get(&data.sigma, 0) != 0 {
        fails.push(format!("σ is nonzero in degree 0 (rank {})", get(&data.sigma, 0)));
    }
    fails
}

/// The duality sequence at augmentation `e`, from the homology-level maps
/// induced by `M₋ → M₊`, `π_N` and `ρ`, with the terms compared against
/// the linearized (co)homology of the DGA.
pub fn duality_les_check(g: &CeDga, augs: &[Augmentation], e: usize) -> Result<LesReport, DualityError> {
    let set = build_bimodules(g, augs.to_vec());
    let r = g.rotation;
    let cm = linear_complex(set.m_minus.as_ref(), e, e, r)?;
    let cp = linear_complex(set.m_plus.as_ref(), e, e, r)?;
    let cn = linear_complex(set.n.as_ref(), e, e, r)?;
    let nc = set.data.n_chords();
    let incl = naive(set.m_minus.clone(), set.m_plus.clone(), 0, (0..nc).map(unit).collect());
    let proj = naive(set.m_plus.clone(), set.n.clone(), 0, (0..nc + 2).map(|i| if i < nc { 0 } else { unit(i - nc) }).collect());
    let induced = |f: &Morph, s, t, degree| -> Result<BTreeMap<i64, usize>, DualityError> {
        let map = ChainMap { source: s, target: t, matrix: linear_matrix(f.as_ref(), e, e), degree };
        Ok(map.induced_on_homology()?.into_iter().map(|(k, m)| (k, m.rank())).collect())
    };
    // ρ^{0|0} read as N → M₋ raises degree by one.
    let sigma = induced(&set.rho(), &cn, &cm, 1)?;
    let eta_r = induced(&incl, &cm, &cp, 0)?;
    let rho_r = induced(&proj, &cp, &cn, 0)?;
    let hn = cn.homology();
    let hm = cm.homology();
    let hp = cp.homology();
    // H^{k+1}(M₋) = LCH^k and H^{k+1}(M₊) = LCH_{−k}.
    let mut data = LesData {
        h_lambda: hn.dims(),
        sigma,
        eta: eta_r.into_iter().map(|(k, v)| (k - 1, v)).collect(),
        rho: rho_r.into_iter().map(|(k, v)| (k - 1, v)).collect(),
        ..LesData::default()
    };
    data.lch_co = hm.dims().into_iter().map(|(k, v)| (k - 1, v)).collect();
    data.lch = hp.dims().into_iter().map(|(k, v)| (1 - k, v)).collect();
    let mut failures = check_les(&data);
    let co = linearized_cohomology(g, &augs[e])?;
    let ho = linearized_homology(g, &augs[e])?;
    for (k, v) in &data.lch_co {
        if co.dim(reduce_grade(*k, r)) != *v {
            failures.push(format!("H^{}(M₋) has dimension {v} but LCH^{k} has {}", k + 1, co.dim(*k)));
        }
    }
    for (k, v) in &data.lch {
        if ho.dim(reduce_grade(*k, r)) != *v {
            failures.push(format!("H^{}(M₊) has dimension {v} but LCH_{k} has {}", 1 - k, ho.dim(*k)));
        }
    }
    if co.total_dim() != data.lch_co.values().sum::<usize>() || ho.total_dim() != data.lch.values().sum::<usize>() {
        failures.push("linearized (co)homology has classes missing from the bimodule homology".into());
    }
    Ok(LesReport { augmentation: e, data, failures })
}
