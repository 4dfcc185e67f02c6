//! Augmentations, the twisted differential, the linearized complex and its
//! dual, and the cobar coderivation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::dga::{AlgElement, CeDga, Letter, Word};
use crate::f2linalg::{ChainComplex, F2Matrix, GradedF2Space, Homology};

/// An augmentation: values on chords; base points are sent to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Augmentation {
    pub values: Vec<bool>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AugmentationError {
    #[error("`{0}` is not an augmentation: ε∂{1} ≠ 0")]
    NotAugmentation(String, String),
    #[error("ε is nonzero on `{0}`, which has nonzero grading")]
    Grading(String),
    #[error("twisted differential of `{0}` has a constant term")]
    Constant(String),
    #[error("too many grading-0 chords for exhaustive search ({0})")]
    TooMany(usize),
}

impl Augmentation {
    pub fn value(&self, l: Letter) -> bool {
        match l {
            Letter::Chord(i) => self.values[i],
            Letter::T(_) | Letter::TInv(_) => true,
        }
    }

    pub fn eval(&self, e: &AlgElement) -> bool {
        e.words().filter(|w| w.iter().all(|&l| self.value(l))).count() % 2 == 1
    }

    pub fn check(&self, g: &CeDga) -> Result<(), AugmentationError> {
        for (i, v) in self.values.iter().enumerate() {
            if *v && g.chords[i].grading != 0 {
                return Err(AugmentationError::Grading(g.chords[i].label.clone()));
            }
        }
        for (a, d) in g.differential.iter().enumerate() {
            if self.eval(d) {
                return Err(AugmentationError::NotAugmentation(self.format(g), g.chords[a].label.clone()));
            }
        }
        Ok(())
    }

    /// `aug: a4=0 a5=1` over the grading-0 chords.
    pub fn format(&self, g: &CeDga) -> String {
        let mut s = String::from("aug:");
        for (i, c) in g.chords.iter().enumerate() {
            if c.grading == 0 {
                let _ = write!(s, " {}={}", c.label, u8::from(self.values[i]));
            }
        }
        s
    }

    pub fn parse(g: &CeDga, line: &str) -> Option<Augmentation> {
        let body = line.trim().strip_prefix("aug:")?;
        let mut values = vec![false; g.chords.len()];
        for tok in body.split_whitespace() {
            let (l, v) = tok.split_once('=')?;
            let i = g.chord_index(l)?;
            values[i] = match v {
                "0" => false,
                "1" => true,
                _ => return None,
            };
        }
        Some(Augmentation { values })
    }
}

/// All augmentations, in lexicographic order of their values on the
/// grading-0 chords (in chord order). Partial assignments are pruned as soon
/// as an equation `ε∂a = 0` involves only assigned chords.
pub fn enumerate_augmentations(g: &CeDga) -> Result<Vec<Augmentation>, AugmentationError> {
    let free: Vec<usize> = (0..g.chords.len()).filter(|&i| g.chords[i].grading == 0).collect();
    if free.len() > 24 {
        return Err(AugmentationError::TooMany(free.len()));
    }
    let pos: BTreeMap<usize, usize> = free.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    // Equation `ε∂a` becomes decidable once every grading-0 chord it
    // mentions has been assigned.
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); free.len() + 1];
    for (a, d) in g.differential.iter().enumerate() {
        let last = d
            .words()
            .flat_map(|w| w.iter())
            .filter_map(|l| match l {
                Letter::Chord(c) => pos.get(c).map(|&k| k + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        ready[last].push(a);
    }
    let mut out = Vec::new();
    let mut aug = Augmentation { values: vec![false; g.chords.len()] };
    fn rec(
        g: &CeDga,
        k: usize,
        free: &[usize],
        ready: &[Vec<usize>],
        aug: &mut Augmentation,
        out: &mut Vec<Augmentation>,
    ) {
        if ready[k].iter().any(|&a| aug.eval(&g.differential[a])) {
            return;
        }
        if k == free.len() {
            out.push(aug.clone());
            return;
        }
        for v in [false, true] {
            aug.values[free[k]] = v;
            rec(g, k + 1, free, ready, aug, out);
        }
        aug.values[free[k]] = false;
    }
    rec(g, 0, &free, &ready, &mut aug, &mut out);
    Ok(out)
}

/// The twisted differential `∂^ε = Φ_ε ∂ Φ_ε⁻¹` on chords, with base points
/// set to 1. Words contain chords only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedDifferential {
    pub of_chord: Vec<AlgElement>,
}

/// Substitutes `b ↦ b + ε(b)` and `t^{±1} ↦ 1` into every word.
pub fn conjugate(e: &AlgElement, eps: &Augmentation) -> AlgElement {
    let mut out = AlgElement::zero();
    for w in e.words() {
        let mut acc = AlgElement::one();
        for &l in w {
            match l {
                Letter::Chord(c) => {
                    let mut f = AlgElement::from_word(vec![l]);
                    if eps.values[c] {
                        f.add_word(Word::new());
                    }
                    acc = acc.mul(&f);
                }
                Letter::T(_) | Letter::TInv(_) => {}
            }
        }
        out.add(&acc);
    }
    out
}

pub fn twisted_differential(g: &CeDga, eps: &Augmentation) -> Result<TwistedDifferential, AugmentationError> {
    let mut of_chord = Vec::new();
    for (a, d) in g.differential.iter().enumerate() {
        let e = conjugate(d, eps);
        if e.contains(&[]) {
            return Err(AugmentationError::Constant(g.chords[a].label.clone()));
        }
        of_chord.push(e);
    }
    Ok(TwistedDifferential { of_chord })
}

impl TwistedDifferential {
    /// Leibniz extension to words in chords.
    pub fn apply(&self, e: &AlgElement) -> AlgElement {
        let mut out = AlgElement::zero();
        for w in e.words() {
            for (i, &l) in w.iter().enumerate() {
                if let Letter::Chord(c) = l {
                    for dw in self.of_chord[c].words() {
                        let mut nw = w[..i].to_vec();
                        nw.extend_from_slice(dw);
                        nw.extend_from_slice(&w[i + 1..]);
                        out.add_word(nw);
                    }
                }
            }
        }
        out
    }

    /// Length-`k` part of `∂^ε a` as a list of chord tuples in word order.
    pub fn part(&self, a: usize, k: usize) -> Vec<Vec<usize>> {
        self.of_chord[a]
            .words()
            .filter(|w| w.len() == k)
            .map(|w| {
                w.iter()
                    .map(|l| match l {
                        Letter::Chord(c) => *c,
                        _ => unreachable!("twisted words contain chords only"),
                    })
                    .collect()
            })
            .collect()
    }
}

/// The linearized complex `(A, ∂₁^ε)` on chords, differential of degree −1.
pub fn linearized_complex(g: &CeDga, eps: &Augmentation) -> Result<ChainComplex, AugmentationError> {
    let tw = twisted_differential(g, eps)?;
    let n = g.chords.len();
    let mut d = F2Matrix::zeros(n, n);
    for a in 0..n {
        for w in tw.part(a, 1) {
            d.flip(w[0], a);
        }
    }
    let space = GradedF2Space::new(
        g.chords.iter().map(|c| c.label.clone()).collect(),
        g.chords.iter().map(|c| c.grading).collect(),
        g.rotation,
    )
    .expect("chord labels are unique");
    Ok(ChainComplex::new(space, d, -1).expect("linearized differential squares to zero"))
}

/// The dual complex `(A*, δ₁)`, differential of degree +1, basis `a*`.
pub fn linearized_cocomplex(g: &CeDga, eps: &Augmentation) -> Result<ChainComplex, AugmentationError> {
    Ok(linearized_complex(g, eps)?.dual(|l| format!("{l}*"), false))
}

pub fn linearized_homology(g: &CeDga, eps: &Augmentation) -> Result<Homology, AugmentationError> {
    Ok(linearized_complex(g, eps)?.homology())
}

pub fn linearized_cohomology(g: &CeDga, eps: &Augmentation) -> Result<Homology, AugmentationError> {
    Ok(linearized_cocomplex(g, eps)?.homology())
}

/// Components of the cobar coderivation: `inputs ↦ outputs`, with inputs in
/// word order (the reverse of the displayed tuple `δ^k(b_k*, …, b_1*)`).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CobarData {
    pub entries: BTreeMap<Vec<usize>, BTreeSet<usize>>,
}

pub fn cobar(g: &CeDga, eps: &Augmentation) -> Result<CobarData, AugmentationError> {
    let tw = twisted_differential(g, eps)?;
    let mut entries: BTreeMap<Vec<usize>, BTreeSet<usize>> = BTreeMap::new();
    for a in 0..g.chords.len() {
        for w in tw.of_chord[a].words() {
            let key: Vec<usize> = w
                .iter()
                .map(|l| match l {
                    Letter::Chord(c) => *c,
                    _ => unreachable!("twisted words contain chords only"),
                })
                .collect();
            let set = entries.entry(key).or_default();
            if !set.remove(&a) {
                set.insert(a);
            }
        }
    }
    entries.retain(|_, v| !v.is_empty());
    Ok(CobarData { entries })
}

impl CobarData {
    pub fn eval(&self, inputs: &[usize]) -> BTreeSet<usize> {
        self.entries.get(inputs).cloned().unwrap_or_default()
    }

    /// The coderivation applied to a dual word given in word order; returns
    /// dual words (also in word order) with odd coefficient.
    pub fn coderivation(&self, x: &[usize]) -> BTreeSet<Vec<usize>> {
        let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
        for i in 0..x.len() {
            for j in i + 1..=x.len() {
                for &o in &self.eval(&x[i..j]) {
                    let mut w = x[..i].to_vec();
                    w.push(o);
                    w.extend_from_slice(&x[j..]);
                    if !out.remove(&w) {
                        out.insert(w);
                    }
                }
            }
        }
        out
    }

    /// Displayed form `δ^k(b_k*, …, b_1*) = a*`.
    pub fn format(&self, g: &CeDga) -> Vec<String> {
        let mut lines = Vec::new();
        for (k, outs) in &self.entries {
            let args: Vec<String> = k.iter().rev().map(|&c| format!("{}*", g.chords[c].label)).collect();
            let rhs: Vec<String> = outs.iter().map(|&c| format!("{}*", g.chords[c].label)).collect();
            lines.push(format!("δ^{}({}) = {}", k.len(), args.join(","), rhs.join(" + ")));
        }
        lines
    }
}

/// Checks `⟨δ x*, y⟩ = ⟨x*, ∂^ε y⟩` for all chord words `y` up to length
/// `max_len`; returns the failing words.
pub fn check_adjointness(g: &CeDga, eps: &Augmentation, max_len: usize) -> Result<Vec<Vec<usize>>, AugmentationError> {
    let tw = twisted_differential(g, eps)?;
    let cb = cobar(g, eps)?;
    let n = g.chords.len();
    let mut failures = Vec::new();
    let mut words: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &words {
            for c in 0..n {
                let mut v = w.clone();
                v.push(c);
                next.push(v);
            }
        }
        for y in &next {
            let ye = AlgElement::from_word(y.iter().map(|&c| Letter::Chord(c)).collect());
            let dy: BTreeSet<Vec<usize>> = tw
                .apply(&ye)
                .words()
                .map(|w| {
                    w.iter()
                        .map(|l| match l {
                            Letter::Chord(c) => *c,
                            _ => unreachable!(),
                        })
                        .collect()
                })
                .collect();
            let lhs = candidate_preimages(&cb, y);
            if lhs != dy {
                failures.push(y.clone());
            }
        }
        words = next;
    }
    Ok(failures)
}

/// Words `x` with `⟨δ x*, y⟩ = 1`: `x` arises from `y` by replacing one letter
/// with a block that the cobar table sends to it.
fn candidate_preimages(cb: &CobarData, y: &[usize]) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    for i in 0..y.len() {
        for (k, outs) in &cb.entries {
            if outs.contains(&y[i]) {
                let mut x = y[..i].to_vec();
                x.extend_from_slice(k);
                x.extend_from_slice(&y[i + 1..]);
                if cb.coderivation(&x).contains(y) {
                    out.insert(x);
                }
            }
        }
    }
    out
}
