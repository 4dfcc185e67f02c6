//! The augmentation categories `Aug₊`, `Aug₋` and the circle category,
//! computed from the DGA by enriched-word combinatorics.
//!
//! Objects are augmentations. All hom spaces between a pair of objects share
//! one basis: chords `a⁺` followed by `x⁺` and `y⁺` for `Aug₊`, chords `a⁻`
//! for `Aug₋`, and `x⁺, y⁺` for the circle category. Vectors are `u128`
//! bitmasks over that basis.
//!
//! Inputs are stored in composition order: `m^k(g_1, …, g_k)` with
//! `g_i ∈ Hom(c_{i-1}, c_i)` and output in `Hom(c_0, c_k)`. This is the word
//! order of the underlying disk boundary and the reverse of the tuple order
//! used in printed tables.

use std::sync::Arc;

use dashmap::DashMap;
use rayon::prelude::*;
use serde::Serialize;
use smallvec::SmallVec;

use crate::augmentation::Augmentation;
use crate::dga::{CeDga, Letter, Word};
use crate::f2linalg::reduce_grade;

pub type Vec128 = u128;

pub const MAX_DIM: usize = 128;

/// Iterates over the set bits of a vector.
pub fn bits(v: Vec128) -> impl Iterator<Item = usize> {
    let mut v = v;
    std::iter::from_fn(move || {
        if v == 0 {
            None
        } else {
            let i = v.trailing_zeros() as usize;
            v &= v - 1;
            Some(i)
        }
    })
}

pub fn unit(i: usize) -> Vec128 {
    1u128 << i
}

pub(crate) type Key = SmallVec<[u8; 32]>;

pub(crate) fn key(chain: &[usize], parts: &[&[usize]]) -> Key {
    let mut k: Key = chain.iter().map(|&c| c as u8).collect();
    for p in parts {
        k.push(255);
        k.extend(p.iter().map(|&i| i as u8));
    }
    k
}

/// A strictly finite A∞ category over F₂ with a uniform hom basis.
pub trait Category: Send + Sync {
    fn num_objects(&self) -> usize;
    fn dim(&self) -> usize;
    fn grade(&self, i: usize) -> i64;
    fn label(&self, i: usize) -> String;
    /// `m^k` on basis inputs; `chain` has `inputs.len() + 1` objects.
    fn m(&self, chain: &[usize], inputs: &[usize]) -> Vec128;
    fn object_label(&self, o: usize) -> String {
        format!("ε{}", o + 1)
    }
    /// Gradings are taken mod `2·rotation` (no reduction when zero).
    fn rotation(&self) -> i64 {
        0
    }
}

pub type Cat = Arc<dyn Category>;

/// Multilinear extension of `m` to vector inputs.
pub fn m_lin(cat: &dyn Category, chain: &[usize], inputs: &[Vec128]) -> Vec128 {
    let mut out = 0;
    let mut idx = vec![0usize; inputs.len()];
    multi_for_each(inputs, 0, &mut idx, &mut |basis| out ^= cat.m(chain, basis));
    out
}

/// Calls `f` on every basis tuple in the support of a product of vectors.
pub fn multi_for_each(inputs: &[Vec128], at: usize, idx: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if at == inputs.len() {
        f(idx);
        return;
    }
    for b in bits(inputs[at]) {
        idx[at] = b;
        multi_for_each(inputs, at + 1, idx, f);
    }
}

/// Left-hand side of the A∞ relation: `Σ m(…, m(g_{i+1}, …, g_j), …)`.
pub fn ainfty_relation(cat: &dyn Category, chain: &[usize], inputs: &[usize]) -> Vec128 {
    let k = inputs.len();
    let mut out = 0;
    for i in 0..k {
        for j in i + 1..=k {
            let inner = cat.m(&chain[i..=j], &inputs[i..j]);
            if inner == 0 {
                continue;
            }
            let outer_chain: Vec<usize> = chain[..=i].iter().chain(&chain[j..]).copied().collect();
            let mut outer_inputs: Vec<usize> = inputs[..i].to_vec();
            outer_inputs.push(0);
            outer_inputs.extend_from_slice(&inputs[j..]);
            for b in bits(inner) {
                outer_inputs[i] = b;
                out ^= cat.m(&outer_chain, &outer_inputs);
            }
        }
    }
    out
}

/// All object chains of a given length.
pub fn chains(num_objects: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|c| {
                (0..num_objects).map(move |o| {
                    let mut c = c.clone();
                    c.push(o);
                    c
                })
            })
            .collect();
    }
    out
}

/// All tuples over `0..dim` of length `len`.
pub fn tuples(dim: usize, len: usize) -> Vec<Vec<usize>> {
    chains(dim, len)
}

/// A machine-readable check record.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Certificate {
    pub check: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub tuples: usize,
    pub failures: Vec<String>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(check: &str, k: usize, parts: Vec<Certificate>) -> Certificate {
        let mut out = Certificate { check: check.into(), k, tuples: 0, failures: Vec::new() };
        for p in parts {
            out.tuples += p.tuples;
            out.failures.extend(p.failures.into_iter().map(|f| format!("{}: {f}", p.check)));
        }
        out
    }
}

pub(crate) const FAILURE_LIMIT: usize = 20;

pub fn format_vec(labels: &dyn Fn(usize) -> String, v: Vec128) -> String {
    if v == 0 {
        return "0".into();
    }
    bits(v).map(labels).collect::<Vec<_>>().join(" + ")
}

fn format_inputs(cat: &dyn Category, chain: &[usize], inputs: &[usize]) -> String {
    let objs: Vec<String> = chain.iter().map(|&o| cat.object_label(o)).collect();
    let args: Vec<String> = inputs.iter().rev().map(|&i| cat.label(i)).collect();
    format!("m^{}({}) on ({})", inputs.len(), args.join(","), objs.join(","))
}

/// Verifies the A∞ relations for all input tuples of length `1..=k_max`.
pub fn check_ainfty_relations(cat: &dyn Category, k_max: usize) -> Certificate {
    let mut tuples_checked = 0;
    let mut failures = Vec::new();
    for k in 1..=k_max {
        let cs = chains(cat.num_objects(), k + 1);
        let ts = tuples(cat.dim(), k);
        let fails: Vec<String> = cs
            .par_iter()
            .flat_map_iter(|c| {
                ts.iter().filter_map(move |t| {
                    let r = ainfty_relation(cat, c, t);
                    (r != 0).then(|| format!("{} gives {}", format_inputs(cat, c, t), format_vec(&|i| cat.label(i), r)))
                })
            })
            .collect();
        tuples_checked += cs.len() * ts.len();
        failures.extend(fails);
    }
    failures.truncate(FAILURE_LIMIT);
    Certificate { check: "ainfty_relations".into(), k: k_max, tuples: tuples_checked, failures }
}

/// Checks that each nonzero `m^k` output has degree `2 − k + Σ|g_i|`.
pub fn check_degrees(cat: &dyn Category, k_max: usize) -> Certificate {
    let mut failures = Vec::new();
    let mut count = 0;
    for k in 1..=k_max {
        for c in chains(cat.num_objects(), k + 1) {
            for t in tuples(cat.dim(), k) {
                count += 1;
                let want = 2 - k as i64 + t.iter().map(|&i| cat.grade(i)).sum::<i64>();
                for b in bits(cat.m(&c, &t)) {
                    let r = cat.rotation();
                    if reduce_grade(cat.grade(b), r) != reduce_grade(want, r) && failures.len() < FAILURE_LIMIT {
                        failures.push(format!("{} has output {} of degree {}", format_inputs(cat, &c, &t), cat.label(b), cat.grade(b)));
                    }
                }
            }
        }
    }
    Certificate { check: "degree".into(), k: k_max, tuples: count, failures }
}

/// One nonzero structure-map entry in printed (reversed) order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TableEntry {
    pub objects: Vec<usize>,
    pub inputs: Vec<String>,
    pub output: Vec<String>,
}

impl TableEntry {
    pub fn display(&self) -> String {
        let objs: Vec<String> = self.objects.iter().map(|o| format!("ε{}", o + 1)).collect();
        format!("({})\tm^{}({})\t{}", objs.join(","), self.inputs.len(), self.inputs.join(","), self.output.join(" + "))
    }
}

/// All nonzero `m^k` entries for `k ≤ k_max`, sorted.
pub fn table(cat: &dyn Category, k_max: usize) -> Vec<TableEntry> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        for c in chains(cat.num_objects(), k + 1) {
            for t in tuples(cat.dim(), k) {
                let v = cat.m(&c, &t);
                if v != 0 {
                    out.push(TableEntry {
                        objects: c.clone(),
                        inputs: t.iter().rev().map(|&i| cat.label(i)).collect(),
                        output: bits(v).map(|i| cat.label(i)).collect(),
                    });
                }
            }
        }
    }
    out.sort();
    out
}

/// The three categories built from one DGA.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Plus,
    Minus,
    Circle,
}

/// Shared DGA data: differential words in original form (with base points),
/// chord gradings and the augmentations serving as objects.
#[derive(Debug)]
pub struct AugData {
    pub rotation: i64,
    pub labels: Vec<String>,
    pub grades: Vec<i64>,
    pub words: Vec<Vec<Word>>,
    pub augs: Vec<Augmentation>,
}

impl AugData {
    pub fn new(g: &CeDga, augs: Vec<Augmentation>) -> Self {
        assert!(g.chords.len() + 2 <= MAX_DIM, "too many chords for 128-bit hom vectors");
        AugData {
            rotation: g.rotation,
            labels: g.chords.iter().map(|c| c.label.clone()).collect(),
            grades: g.chords.iter().map(|c| c.grading).collect(),
            words: g.differential.iter().map(|d| d.words().cloned().collect()).collect(),
            augs,
        }
    }

    pub fn n_chords(&self) -> usize {
        self.labels.len()
    }

    pub fn eps(&self, obj: usize, chord: usize) -> bool {
        self.augs[obj].values[chord]
    }
}

/// Input symbol fed to the enrichment matcher.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sym {
    Chord(usize),
    X,
    /// Never matches a letter (e.g. `y⁺`).
    Inert,
}

/// Enrichment DP over a word: counts mod 2 the ways to mark letters so the
/// algebraic lift equals `inputs`, weighting each unmarked chord by the
/// augmentation of its segment (`objects[i]` after `i` inputs consumed).
/// An enriched `t` consumes one `x`; an enriched `t⁻¹` consumes a run of one
/// or more `x`. With `t_enrichment` off, base points are never enriched.
pub fn enrichment_count(data: &AugData, word: &[Letter], inputs: &[Sym], objects: &[usize], t_enrichment: bool) -> bool {
    let k = inputs.len();
    debug_assert_eq!(objects.len(), k + 1);
    // Bit i of `dp` is the parity of ways having consumed i inputs.
    let mut dp: u128 = 1;
    for &l in word {
        let mut next: u128 = 0;
        for i in bits(dp) {
            match l {
                Letter::Chord(b) => {
                    if data.eps(objects[i], b) {
                        next ^= unit(i);
                    }
                    if i < k && inputs[i] == Sym::Chord(b) {
                        next ^= unit(i + 1);
                    }
                }
                Letter::T(_) => {
                    next ^= unit(i);
                    if t_enrichment && i < k && inputs[i] == Sym::X {
                        next ^= unit(i + 1);
                    }
                }
                Letter::TInv(_) => {
                    next ^= unit(i);
                    if t_enrichment {
                        let mut j = i;
                        while j < k && inputs[j] == Sym::X {
                            j += 1;
                            next ^= unit(j);
                        }
                    }
                }
            }
        }
        dp = next;
        if dp == 0 {
            return false;
        }
    }
    dp >> k & 1 == 1
}

pub struct AugCategory {
    pub variant: Variant,
    pub data: Arc<AugData>,
    memo: DashMap<Key, Vec128>,
}

impl AugCategory {
    pub fn new(variant: Variant, data: Arc<AugData>) -> Self {
        AugCategory { variant, data, memo: DashMap::new() }
    }

    pub fn plus(data: Arc<AugData>) -> Self {
        Self::new(Variant::Plus, data)
    }

    pub fn minus(data: Arc<AugData>) -> Self {
        Self::new(Variant::Minus, data)
    }

    pub fn circle(data: Arc<AugData>) -> Self {
        Self::new(Variant::Circle, data)
    }

    /// Index of `x⁺` in the basis (`Aug₊` and circle only).
    pub fn x(&self) -> usize {
        match self.variant {
            Variant::Plus => self.data.n_chords(),
            Variant::Circle => 0,
            Variant::Minus => panic!("Aug₋ has no x⁺"),
        }
    }

    pub fn y(&self) -> usize {
        self.x() + 1
    }

    pub fn sym(&self, i: usize) -> Sym {
        match self.variant {
            Variant::Minus => Sym::Chord(i),
            Variant::Plus if i < self.data.n_chords() => Sym::Chord(i),
            _ if i == self.x() => Sym::X,
            _ => Sym::Inert,
        }
    }

    fn unit_rules(&self, inputs: &[usize]) -> Option<Vec128> {
        let y = self.y();
        if !inputs.contains(&y) {
            return None;
        }
        Some(match inputs.len() {
            2 if inputs[0] == y => unit(inputs[1]),
            2 => unit(inputs[0]),
            _ => 0,
        })
    }

    fn compute(&self, chain: &[usize], inputs: &[usize]) -> Vec128 {
        let d = &self.data;
        match self.variant {
            Variant::Circle => self.unit_rules(inputs).unwrap_or(0),
            Variant::Plus => {
                if inputs.len() == 1 && inputs[0] == self.y() {
                    let mut out = 0;
                    for a in 0..d.n_chords() {
                        if d.eps(chain[0], a) != d.eps(chain[1], a) {
                            out ^= unit(a);
                        }
                    }
                    return out;
                }
                if let Some(v) = self.unit_rules(inputs) {
                    return v;
                }
                self.disk_terms(chain, inputs, true)
            }
            Variant::Minus => self.disk_terms(chain, inputs, false),
        }
    }

    fn disk_terms(&self, chain: &[usize], inputs: &[usize], t_enrichment: bool) -> Vec128 {
        let syms: Vec<Sym> = inputs.iter().map(|&i| self.sym(i)).collect();
        let mut out = 0;
        for (a, words) in self.data.words.iter().enumerate() {
            let c = words.iter().filter(|w| enrichment_count(&self.data, w, &syms, chain, t_enrichment)).count();
            if c % 2 == 1 {
                out ^= unit(a);
            }
        }
        out
    }
}

impl Category for AugCategory {
    fn num_objects(&self) -> usize {
        self.data.augs.len()
    }

    fn dim(&self) -> usize {
        match self.variant {
            Variant::Plus => self.data.n_chords() + 2,
            Variant::Minus => self.data.n_chords(),
            Variant::Circle => 2,
        }
    }

    fn grade(&self, i: usize) -> i64 {
        match self.variant {
            Variant::Plus if i < self.data.n_chords() => self.data.grades[i] + 1,
            Variant::Minus => self.data.grades[i] + 1,
            _ if i == self.x() => 1,
            _ => 0,
        }
    }

    fn label(&self, i: usize) -> String {
        match self.variant {
            Variant::Plus if i < self.data.n_chords() => format!("{}+", self.data.labels[i]),
            Variant::Minus => format!("{}-", self.data.labels[i]),
            _ if i == self.x() => "x+".into(),
            _ => "y+".into(),
        }
    }

    fn rotation(&self) -> i64 {
        self.data.rotation
    }

    fn m(&self, chain: &[usize], inputs: &[usize]) -> Vec128 {
        debug_assert_eq!(chain.len(), inputs.len() + 1);
        if inputs.is_empty() {
            return 0;
        }
        let k = key(chain, &[inputs]);
        if let Some(v) = self.memo.get(&k) {
            return *v;
        }
        let v = self.compute(chain, inputs);
        self.memo.insert(k, v);
        v
    }
}

/// A category with one structure map entry toggled, for mutation controls.
pub struct Mutated {
    pub inner: Cat,
    pub chain: Vec<usize>,
    pub inputs: Vec<usize>,
    pub flip: Vec128,
}

impl Category for Mutated {
    fn num_objects(&self) -> usize {
        self.inner.num_objects()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn grade(&self, i: usize) -> i64 {
        self.inner.grade(i)
    }
    fn label(&self, i: usize) -> String {
        self.inner.label(i)
    }
    fn rotation(&self) -> i64 {
        self.inner.rotation()
    }
    fn m(&self, chain: &[usize], inputs: &[usize]) -> Vec128 {
        let v = self.inner.m(chain, inputs);
        if chain == self.chain.as_slice() && inputs == self.inputs.as_slice() {
            v ^ self.flip
        } else {
            v
        }
    }
}
