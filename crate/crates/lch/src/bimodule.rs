//! A∞ bimodules over a [`Category`], pre-morphisms between them, and
//! order-bounded verification.
//!
//! A bimodule has one basis shared by all object pairs. Its structure map
//! `n(chain, pre, w, post)` takes `w ∈ M(c_p, c_{p+1})` with `p = pre.len()`
//! category inputs before it and `q = post.len()` after it, along a chain of
//! `p + q + 2` objects. Inputs are stored in composition order; printed
//! tuples reverse the whole sequence, so `n^{r|s}` has `r = q`, `s = p`.
//!
//! Checks sweep every input tuple with `p + q ≤ K` over all object chains.

use std::collections::BTreeMap;
use std::sync::Arc;

use dashmap::DashMap;
use rayon::prelude::*;
use smallvec::SmallVec;
use thiserror::Error;

use crate::ainfinity::{bits, chains, key, tuples, unit, Category, Certificate, Key, Vec128, FAILURE_LIMIT, MAX_DIM};
use crate::f2linalg::{reduce_grade, ChainComplex, ChainMap, F2Matrix, F2Vec, GradedF2Space, LinalgError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BimoduleError {
    #[error("bimodule too large for 128-bit vectors ({0} basis elements)")]
    TooLarge(usize),
    #[error("linear part is not a quasi-isomorphism on the object pair ({0}, {1})")]
    NotQuasiIso(usize, usize),
    #[error("pre-morphism has degree {0}; expected 0")]
    NotDegreeZero(i64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub trait Bimodule: Send + Sync {
    fn dim(&self) -> usize;
    fn grade(&self, i: usize) -> i64;
    fn label(&self, i: usize) -> String;
    fn n(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128;
}

pub type Bimod = Arc<dyn Bimodule>;

pub fn n_lin(m: &dyn Bimodule, chain: &[usize], pre: &[usize], v: Vec128, post: &[usize]) -> Vec128 {
    bits(v).fold(0, |acc, w| acc ^ m.n(chain, pre, w, post))
}

pub trait PreMorphism: Send + Sync {
    fn source(&self) -> &Bimod;
    fn target(&self) -> &Bimod;
    fn degree(&self) -> i64;
    fn apply(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128;
}

pub type Morph = Arc<dyn PreMorphism>;

pub fn apply_lin(f: &dyn PreMorphism, chain: &[usize], pre: &[usize], v: Vec128, post: &[usize]) -> Vec128 {
    bits(v).fold(0, |acc, w| acc ^ f.apply(chain, pre, w, post))
}

type Chain = SmallVec<[usize; 12]>;

/// Chain left after collapsing objects `i..=end` into one slot.
fn outer_chain(chain: &[usize], i: usize, end: usize) -> Chain {
    chain[..=i].iter().chain(&chain[end..]).copied().collect()
}

fn splice(v: &[usize], i: usize, j: usize, x: usize) -> Chain {
    v[..i].iter().copied().chain(std::iter::once(x)).chain(v[j..].iter().copied()).collect()
}

/// Calls `f(chain', pre', post')` for every replacement of a block of at
/// least `min_len` consecutive category inputs by a basis term of its `m`.
fn for_each_block(
    cat: &dyn Category,
    chain: &[usize],
    pre: &[usize],
    post: &[usize],
    min_len: usize,
    f: &mut dyn FnMut(&[usize], &[usize], &[usize]),
) {
    let p = pre.len();
    for i in 0..p {
        for j in i + min_len..=p {
            let v = cat.m(&chain[i..=j], &pre[i..j]);
            for b in bits(v) {
                f(&outer_chain(chain, i, j), &splice(pre, i, j, b), post);
            }
        }
    }
    let q = post.len();
    for i in 0..q {
        for j in i + min_len..=q {
            let (a, b) = (p + 1 + i, p + 1 + j);
            let v = cat.m(&chain[a..=b], &post[i..j]);
            for x in bits(v) {
                f(&outer_chain(chain, a, b), pre, &splice(post, i, j, x));
            }
        }
    }
}

/// Left-hand side of the bimodule relations.
pub fn bimodule_relation(cat: &dyn Category, m: &dyn Bimodule, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
    let (p, q) = (pre.len(), post.len());
    let mut out = 0;
    for i in 0..=p {
        for j in 0..=q {
            let inner = m.n(&chain[i..=p + 1 + j], &pre[i..], w, &post[..j]);
            if inner != 0 {
                out ^= n_lin(m, &outer_chain(chain, i, p + 1 + j), &pre[..i], inner, &post[j..]);
            }
        }
    }
    for_each_block(cat, chain, pre, post, 1, &mut |c, a, b| out ^= m.n(c, a, w, b));
    out
}

/// `δf = n_N ∘ f + f ∘ n_M + f ∘ m`.
pub fn delta_value(cat: &dyn Category, f: &dyn PreMorphism, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
    let (p, q) = (pre.len(), post.len());
    let (src, tgt) = (f.source(), f.target());
    let mut out = 0;
    for i in 0..=p {
        for j in 0..=q {
            let inner_chain = &chain[i..=p + 1 + j];
            let outer = outer_chain(chain, i, p + 1 + j);
            let v = f.apply(inner_chain, &pre[i..], w, &post[..j]);
            if v != 0 {
                out ^= n_lin(tgt.as_ref(), &outer, &pre[..i], v, &post[j..]);
            }
            let v = src.n(inner_chain, &pre[i..], w, &post[..j]);
            if v != 0 {
                out ^= apply_lin(f, &outer, &pre[..i], v, &post[j..]);
            }
        }
    }
    for_each_block(cat, chain, pre, post, 1, &mut |c, a, b| out ^= f.apply(c, a, w, b));
    out
}

/// `(g ∘ f)(pre, w, post) = Σ g(pre', f(pre'', w, post''), post')`.
pub fn compose_value(g: &dyn PreMorphism, f: &dyn PreMorphism, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
    let (p, q) = (pre.len(), post.len());
    let mut out = 0;
    for i in 0..=p {
        for j in 0..=q {
            let v = f.apply(&chain[i..=p + 1 + j], &pre[i..], w, &post[..j]);
            if v != 0 {
                out ^= apply_lin(g, &outer_chain(chain, i, p + 1 + j), &pre[..i], v, &post[j..]);
            }
        }
    }
    out
}

fn check_dim(d: usize) {
    assert!(d <= MAX_DIM, "{}", BimoduleError::TooLarge(d));
}

// ---------------------------------------------------------------------------
// Bimodule constructions

/// The diagonal bimodule: `n(pre, w, post) = m(pre, w, post)`.
pub struct Diagonal {
    pub cat: Arc<dyn Category>,
}

impl Bimodule for Diagonal {
    fn dim(&self) -> usize {
        self.cat.dim()
    }
    fn grade(&self, i: usize) -> i64 {
        self.cat.grade(i)
    }
    fn label(&self, i: usize) -> String {
        self.cat.label(i)
    }
    fn n(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        let inputs: Chain = pre.iter().copied().chain(std::iter::once(w)).chain(post.iter().copied()).collect();
        self.cat.m(chain, &inputs)
    }
}

pub fn diagonal(cat: Arc<dyn Category>) -> Bimod {
    Arc::new(Diagonal { cat })
}

/// Restriction to a subset of the basis with the other coordinates dropped.
/// This is the submodule when the span is closed under `n`, and the
/// quotient when the complement is.
pub struct Restrict {
    pub parent: Bimod,
    pub basis: Vec<usize>,
}

impl Restrict {
    fn project(&self, v: Vec128) -> Vec128 {
        self.basis.iter().enumerate().filter(|(_, &b)| v >> b & 1 == 1).fold(0, |acc, (i, _)| acc | unit(i))
    }
}

impl Bimodule for Restrict {
    fn dim(&self) -> usize {
        self.basis.len()
    }
    fn grade(&self, i: usize) -> i64 {
        self.parent.grade(self.basis[i])
    }
    fn label(&self, i: usize) -> String {
        self.parent.label(self.basis[i])
    }
    fn n(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        self.project(self.parent.n(chain, pre, self.basis[w], post))
    }
}

pub fn restrict(parent: Bimod, basis: Vec<usize>) -> Bimod {
    Arc::new(Restrict { parent, basis })
}

/// The span of `basis` is closed under all structure maps up to order `K`.
pub fn check_submodule(cat: &dyn Category, m: &Bimod, basis: &[usize], k_max: usize) -> Certificate {
    let mask = basis.iter().fold(0, |acc, &b| acc | unit(b));
    let sub = restrict(m.clone(), basis.to_vec());
    sweep(cat, sub.as_ref(), k_max, "submodule_closed", &|c, pre, w, post| m.n(c, pre, basis[w], post) & !mask, &|i| m.label(i))
}

pub struct Shift {
    pub inner: Bimod,
    pub by: i64,
}

impl Bimodule for Shift {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn grade(&self, i: usize) -> i64 {
        self.inner.grade(i) - self.by
    }
    fn label(&self, i: usize) -> String {
        self.inner.label(i)
    }
    fn n(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        self.inner.n(chain, pre, w, post)
    }
}

/// `M[by]`: same structure maps, degrees lowered by `by`.
pub fn shift(m: Bimod, by: i64) -> Bimod {
    if by == 0 {
        m
    } else {
        Arc::new(Shift { inner: m, by })
    }
}

fn dual_label(l: &str) -> String {
    let base = l.strip_suffix(['+', '-']).unwrap_or(l);
    format!("{base}∨")
}

/// Linear dual: `n_{M∨}(P, β, Q)(z) = β(n_M(Q, z, P))`, `|b∨| = −|b|`.
pub struct Dual {
    pub inner: Bimod,
}

impl Bimodule for Dual {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn grade(&self, i: usize) -> i64 {
        -self.inner.grade(i)
    }
    fn label(&self, i: usize) -> String {
        dual_label(&self.inner.label(i))
    }
    fn n(&self, chain: &[usize], pre: &[usize], beta: usize, post: &[usize]) -> Vec128 {
        let p = pre.len();
        let rotated: Chain = chain[p + 1..].iter().chain(&chain[..=p]).copied().collect();
        (0..self.inner.dim())
            .filter(|&z| self.inner.n(&rotated, post, z, pre) >> beta & 1 == 1)
            .fold(0, |acc, z| acc | unit(z))
    }
}

pub fn dual(m: Bimod) -> Bimod {
    memo_bimodule(Arc::new(Dual { inner: m }))
}

/// Basis `first ⊕ second` with `n = (n_first, n_second + link)`; `link`
/// maps `first → second` with degree 1. Cones, cocones and cylinders are
/// all of this form.
pub struct Extension {
    pub first: Bimod,
    pub second: Bimod,
    pub link: Option<Morph>,
}

impl Bimodule for Extension {
    fn dim(&self) -> usize {
        self.first.dim() + self.second.dim()
    }
    fn grade(&self, i: usize) -> i64 {
        let d = self.first.dim();
        if i < d {
            self.first.grade(i)
        } else {
            self.second.grade(i - d)
        }
    }
    fn label(&self, i: usize) -> String {
        let d = self.first.dim();
        if i < d {
            self.first.label(i)
        } else {
            self.second.label(i - d)
        }
    }
    fn n(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        let d = self.first.dim();
        if w < d {
            let mut v = self.first.n(chain, pre, w, post);
            if let Some(l) = &self.link {
                v |= l.apply(chain, pre, w, post) << d;
            }
            v
        } else {
            self.second.n(chain, pre, w - d, post) << d
        }
    }
}

/// A two-summand bimodule with its naive inclusions and projections.
#[derive(Clone)]
pub struct Summands {
    pub module: Bimod,
    pub first: Bimod,
    pub second: Bimod,
}

impl Summands {
    pub fn new(first: Bimod, second: Bimod, link: Option<Morph>) -> Self {
        check_dim(first.dim() + second.dim());
        let module = memo_bimodule(Arc::new(Extension { first: first.clone(), second: second.clone(), link }));
        Summands { module, first, second }
    }

    pub fn offset(&self) -> usize {
        self.first.dim()
    }

    pub fn i_first(&self) -> Morph {
        embed(identity(self.first.clone()), self.first.clone(), self.module.clone(), 0, 0)
    }

    pub fn i_second(&self) -> Morph {
        embed(identity(self.second.clone()), self.second.clone(), self.module.clone(), 0, self.offset())
    }

    pub fn pi_first(&self) -> Morph {
        embed(identity(self.first.clone()), self.module.clone(), self.first.clone(), 0, 0)
    }

    pub fn pi_second(&self) -> Morph {
        embed(identity(self.second.clone()), self.module.clone(), self.second.clone(), self.offset(), 0)
    }
}

/// `cone(f) = M[1] ⊕ N` for a degree-0 morphism `f: M → N`.
pub fn cone(f: &Morph) -> Summands {
    assert_eq!(f.degree(), 0, "cone of a morphism of nonzero degree");
    let first = shift(f.source().clone(), 1);
    let link = reinterpret(f.clone(), first.clone(), f.target().clone());
    Summands::new(first, f.target().clone(), Some(link))
}

/// `cocone(f) = cone(f∨)[−1] = N∨ ⊕ M∨[−1]`.
pub fn cocone(f: &Morph) -> Summands {
    assert_eq!(f.degree(), 0, "cocone of a morphism of nonzero degree");
    let fd = dual_morphism(f.clone());
    let second = shift(fd.target().clone(), -1);
    let link = reinterpret(fd.clone(), fd.source().clone(), second.clone());
    Summands::new(fd.source().clone(), second, Some(link))
}

/// `cyl(f) = cone(π_M)[−1] = cone(f) ⊕ M` with `π_M: cone(f) → M[1]`.
pub struct Cylinder {
    pub cone: Summands,
    pub cyl: Summands,
    pub f: Morph,
}

pub fn cylinder(f: &Morph) -> Cylinder {
    let c = cone(f);
    let m = f.source().clone();
    let link = reinterpret(c.pi_first(), c.module.clone(), m.clone());
    let cyl = Summands::new(c.module.clone(), m, Some(link));
    Cylinder { cone: c, cyl, f: f.clone() }
}

impl Cylinder {
    pub fn target_module(&self) -> &Bimod {
        self.f.target()
    }

    /// Naive inclusion `I_N: N → cyl(f)`.
    pub fn include(&self) -> Morph {
        let n = self.f.target().clone();
        embed(identity(n.clone()), n, self.cyl.module.clone(), 0, self.cone.offset())
    }

    /// `Π_N = (0, 1_N, f): cyl(f) → N`.
    pub fn project(&self) -> Morph {
        let n = self.f.target().clone();
        let cyl = self.cyl.module.clone();
        let id = embed(identity(n.clone()), cyl.clone(), n.clone(), self.cone.offset(), 0);
        let via_f = embed(self.f.clone(), cyl, n, self.cyl.offset(), 0);
        sum(vec![id, via_f])
    }

    /// Naive `M → M[1]` from the last summand to the first, a homotopy
    /// between the identity and `I_N Π_N`.
    pub fn homotopy(&self) -> Morph {
        let m = self.f.source().clone();
        let cyl = self.cyl.module.clone();
        let h = embed(identity(m), cyl.clone(), cyl, self.cyl.offset(), 0);
        debug_assert_eq!(h.degree(), -1);
        h
    }
}

/// A strict A∞ functor given on objects and by its components.
pub trait Functor: Send + Sync {
    fn object(&self, o: usize) -> usize;
    fn apply(&self, chain: &[usize], inputs: &[usize]) -> Vec128;
}

pub struct IdentityFunctor;

impl Functor for IdentityFunctor {
    fn object(&self, o: usize) -> usize {
        o
    }
    fn apply(&self, _: &[usize], inputs: &[usize]) -> Vec128 {
        if inputs.len() == 1 {
            unit(inputs[0])
        } else {
            0
        }
    }
}

/// A functor with only a linear component, given per basis element.
pub struct LinearFunctor {
    pub objects: Vec<usize>,
    pub images: Vec<Vec128>,
}

impl Functor for LinearFunctor {
    fn object(&self, o: usize) -> usize {
        self.objects[o]
    }
    fn apply(&self, _: &[usize], inputs: &[usize]) -> Vec128 {
        if inputs.len() == 1 {
            self.images[inputs[0]]
        } else {
            0
        }
    }
}

/// Pullback `(F, G)*M`: pre inputs pass through `F`, post inputs through
/// `G`, summed over all ways to group consecutive inputs.
pub struct Pullback {
    pub inner: Bimod,
    pub left: Arc<dyn Functor>,
    pub right: Arc<dyn Functor>,
}

/// All ways to cut `0..n` into consecutive nonempty blocks, as cut points.
fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![0]];
    }
    (0..1u32 << (n - 1))
        .map(|mask| {
            let mut cuts = vec![0];
            cuts.extend((1..n).filter(|&i| mask >> (i - 1) & 1 == 1));
            cuts.push(n);
            cuts
        })
        .collect()
}

impl Pullback {
    fn images(functor: &dyn Functor, chain: &[usize], inputs: &[usize], cuts: &[usize]) -> (Vec<Vec128>, Chain) {
        let mut objs: Chain = SmallVec::new();
        let mut vecs = Vec::new();
        for w in cuts.windows(2) {
            vecs.push(functor.apply(&chain[w[0]..=w[1]], &inputs[w[0]..w[1]]));
        }
        for &c in cuts {
            objs.push(functor.object(chain[c]));
        }
        (vecs, objs)
    }
}

impl Bimodule for Pullback {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn grade(&self, i: usize) -> i64 {
        self.inner.grade(i)
    }
    fn label(&self, i: usize) -> String {
        self.inner.label(i)
    }
    fn n(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        let p = pre.len();
        let mut out = 0;
        for lc in compositions(p) {
            let (lv, lo) = Self::images(self.left.as_ref(), &chain[..=p], pre, &lc);
            if lv.contains(&0) {
                continue;
            }
            for rc in compositions(post.len()) {
                let (rv, ro) = Self::images(self.right.as_ref(), &chain[p + 1..], post, &rc);
                if rv.contains(&0) {
                    continue;
                }
                let c: Chain = lo.iter().chain(&ro).copied().collect();
                let all: Vec<Vec128> = lv.iter().chain(&rv).copied().collect();
                let mut idx = vec![0; all.len()];
                crate::ainfinity::multi_for_each(&all, 0, &mut idx, &mut |basis| {
                    out ^= self.inner.n(&c, &basis[..lv.len()], w, &basis[lv.len()..]);
                });
            }
        }
        out
    }
}

pub fn pullback(inner: Bimod, left: Arc<dyn Functor>, right: Arc<dyn Functor>) -> Bimod {
    memo_bimodule(Arc::new(Pullback { inner, left, right }))
}

/// A bimodule given by explicit data.
pub struct Explicit {
    pub labels: Vec<String>,
    pub grades: Vec<i64>,
    pub structure: Box<dyn Fn(&[usize], &[usize], usize, &[usize]) -> Vec128 + Send + Sync>,
}

impl Bimodule for Explicit {
    fn dim(&self) -> usize {
        self.labels.len()
    }
    fn grade(&self, i: usize) -> i64 {
        self.grades[i]
    }
    fn label(&self, i: usize) -> String {
        self.labels[i].clone()
    }
    fn n(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        (self.structure)(chain, pre, w, post)
    }
}

pub struct MemoBimodule {
    inner: Bimod,
    memo: DashMap<Key, Vec128>,
}

impl Bimodule for MemoBimodule {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn grade(&self, i: usize) -> i64 {
        self.inner.grade(i)
    }
    fn label(&self, i: usize) -> String {
        self.inner.label(i)
    }
    fn n(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        let k = key(chain, &[pre, &[w], post]);
        if let Some(v) = self.memo.get(&k) {
            return *v;
        }
        let v = self.inner.n(chain, pre, w, post);
        self.memo.insert(k, v);
        v
    }
}

pub fn memo_bimodule(m: Bimod) -> Bimod {
    Arc::new(MemoBimodule { inner: m, memo: DashMap::new() })
}

// ---------------------------------------------------------------------------
// Pre-morphisms

/// A pre-morphism with only a linear component, given by its columns.
pub struct Naive {
    pub src: Bimod,
    pub tgt: Bimod,
    pub degree: i64,
    pub columns: Vec<Vec128>,
}

impl PreMorphism for Naive {
    fn source(&self) -> &Bimod {
        &self.src
    }
    fn target(&self) -> &Bimod {
        &self.tgt
    }
    fn degree(&self) -> i64 {
        self.degree
    }
    fn apply(&self, _: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        if pre.is_empty() && post.is_empty() {
            self.columns[w]
        } else {
            0
        }
    }
}

pub fn naive(src: Bimod, tgt: Bimod, degree: i64, columns: Vec<Vec128>) -> Morph {
    assert_eq!(columns.len(), src.dim());
    Arc::new(Naive { src, tgt, degree, columns })
}

pub fn identity(m: Bimod) -> Morph {
    let cols = (0..m.dim()).map(unit).collect();
    naive(m.clone(), m, 0, cols)
}

pub fn zero(src: Bimod, tgt: Bimod, degree: i64) -> Morph {
    let cols = vec![0; src.dim()];
    naive(src, tgt, degree, cols)
}

type Component = Box<dyn Fn(&[usize], &[usize], usize, &[usize]) -> Vec128 + Send + Sync>;

/// A pre-morphism given by a closure over basis inputs.
pub struct FnMorph {
    pub src: Bimod,
    pub tgt: Bimod,
    pub degree: i64,
    pub f: Component,
}

impl PreMorphism for FnMorph {
    fn source(&self) -> &Bimod {
        &self.src
    }
    fn target(&self) -> &Bimod {
        &self.tgt
    }
    fn degree(&self) -> i64 {
        self.degree
    }
    fn apply(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        (self.f)(chain, pre, w, post)
    }
}

pub fn from_fn(
    src: Bimod,
    tgt: Bimod,
    degree: i64,
    f: impl Fn(&[usize], &[usize], usize, &[usize]) -> Vec128 + Send + Sync + 'static,
) -> Morph {
    memo(Arc::new(FnMorph { src, tgt, degree, f: Box::new(f) }))
}

pub struct Compose {
    pub g: Morph,
    pub f: Morph,
}

impl PreMorphism for Compose {
    fn source(&self) -> &Bimod {
        self.f.source()
    }
    fn target(&self) -> &Bimod {
        self.g.target()
    }
    fn degree(&self) -> i64 {
        self.f.degree() + self.g.degree()
    }
    fn apply(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        compose_value(self.g.as_ref(), self.f.as_ref(), chain, pre, w, post)
    }
}

/// `g ∘ f`.
pub fn compose(g: Morph, f: Morph) -> Morph {
    assert_eq!(g.source().dim(), f.target().dim(), "composing incompatible pre-morphisms");
    memo(Arc::new(Compose { g, f }))
}

pub struct Sum {
    pub parts: Vec<Morph>,
}

impl PreMorphism for Sum {
    fn source(&self) -> &Bimod {
        self.parts[0].source()
    }
    fn target(&self) -> &Bimod {
        self.parts[0].target()
    }
    fn degree(&self) -> i64 {
        self.parts[0].degree()
    }
    fn apply(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        self.parts.iter().fold(0, |acc, f| acc ^ f.apply(chain, pre, w, post))
    }
}

pub fn sum(parts: Vec<Morph>) -> Morph {
    assert!(!parts.is_empty());
    for f in &parts[1..] {
        assert_eq!(f.source().dim(), parts[0].source().dim(), "summing pre-morphisms with different sources");
        assert_eq!(f.target().dim(), parts[0].target().dim(), "summing pre-morphisms with different targets");
    }
    if parts.len() == 1 {
        return parts.into_iter().next().expect("one part");
    }
    Arc::new(Sum { parts })
}

pub struct Delta {
    pub cat: Arc<dyn Category>,
    pub f: Morph,
}

impl PreMorphism for Delta {
    fn source(&self) -> &Bimod {
        self.f.source()
    }
    fn target(&self) -> &Bimod {
        self.f.target()
    }
    fn degree(&self) -> i64 {
        self.f.degree() + 1
    }
    fn apply(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        delta_value(self.cat.as_ref(), self.f.as_ref(), chain, pre, w, post)
    }
}

pub fn delta(cat: Arc<dyn Category>, f: Morph) -> Morph {
    memo(Arc::new(Delta { cat, f }))
}

/// `f∨: N∨ → M∨`, `f∨(P, β, Q)(z) = β(f(Q, z, P))`.
pub struct DualMorphism {
    pub f: Morph,
    src: Bimod,
    tgt: Bimod,
}

impl PreMorphism for DualMorphism {
    fn source(&self) -> &Bimod {
        &self.src
    }
    fn target(&self) -> &Bimod {
        &self.tgt
    }
    fn degree(&self) -> i64 {
        self.f.degree()
    }
    fn apply(&self, chain: &[usize], pre: &[usize], beta: usize, post: &[usize]) -> Vec128 {
        let p = pre.len();
        let rotated: Chain = chain[p + 1..].iter().chain(&chain[..=p]).copied().collect();
        (0..self.f.source().dim())
            .filter(|&z| self.f.apply(&rotated, post, z, pre) >> beta & 1 == 1)
            .fold(0, |acc, z| acc | unit(z))
    }
}

pub fn dual_morphism(f: Morph) -> Morph {
    let src = dual(f.target().clone());
    let tgt = dual(f.source().clone());
    dual_morphism_between(f, src, tgt)
}

/// `f∨` with explicitly supplied dual modules (same bases as `dual`).
pub fn dual_morphism_between(f: Morph, src: Bimod, tgt: Bimod) -> Morph {
    memo(Arc::new(DualMorphism { f, src, tgt }))
}

/// `f` read between other modules: source basis from `s_off`, target
/// basis shifted to `t_off`. Inputs outside the source block give 0.
pub struct Embed {
    pub f: Morph,
    src: Bimod,
    tgt: Bimod,
    s_off: usize,
    t_off: usize,
    degree: i64,
}

impl PreMorphism for Embed {
    fn source(&self) -> &Bimod {
        &self.src
    }
    fn target(&self) -> &Bimod {
        &self.tgt
    }
    fn degree(&self) -> i64 {
        self.degree
    }
    fn apply(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        let d = self.f.source().dim();
        if w < self.s_off || w >= self.s_off + d {
            return 0;
        }
        let v = self.f.apply(chain, pre, w - self.s_off, post);
        let t_dim = self.f.target().dim();
        let mask = if t_dim == 128 { u128::MAX } else { (1u128 << t_dim) - 1 };
        (v & mask) << self.t_off
    }
}

fn grade_offset(a: &dyn Bimodule, b: &dyn Bimodule, b_off: usize) -> i64 {
    if a.dim() == 0 {
        0
    } else {
        a.grade(0) - b.grade(b_off)
    }
}

pub fn embed(f: Morph, src: Bimod, tgt: Bimod, s_off: usize, t_off: usize) -> Morph {
    assert!(s_off + f.source().dim() <= src.dim() && t_off + f.target().dim() <= tgt.dim(), "block out of range");
    let degree = f.degree() + grade_offset(f.source().as_ref(), src.as_ref(), s_off) - grade_offset(f.target().as_ref(), tgt.as_ref(), t_off);
    Arc::new(Embed { f, src, tgt, s_off, t_off, degree })
}

/// The same maps viewed between shifts of the original modules.
pub fn reinterpret(f: Morph, src: Bimod, tgt: Bimod) -> Morph {
    assert_eq!(src.dim(), f.source().dim());
    assert_eq!(tgt.dim(), f.target().dim());
    embed(f, src, tgt, 0, 0)
}

pub struct MemoMorphism {
    inner: Morph,
    memo: DashMap<Key, Vec128>,
}

impl PreMorphism for MemoMorphism {
    fn source(&self) -> &Bimod {
        self.inner.source()
    }
    fn target(&self) -> &Bimod {
        self.inner.target()
    }
    fn degree(&self) -> i64 {
        self.inner.degree()
    }
    fn apply(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        let k = key(chain, &[pre, &[w], post]);
        if let Some(v) = self.memo.get(&k) {
            return *v;
        }
        let v = self.inner.apply(chain, pre, w, post);
        self.memo.insert(k, v);
        v
    }
}

pub fn memo(f: Morph) -> Morph {
    Arc::new(MemoMorphism { inner: f, memo: DashMap::new() })
}

/// `f` with one component toggled, for mutation controls.
pub struct Mutated {
    pub inner: Morph,
    pub chain: Vec<usize>,
    pub pre: Vec<usize>,
    pub w: usize,
    pub post: Vec<usize>,
    pub flip: Vec128,
}

impl PreMorphism for Mutated {
    fn source(&self) -> &Bimod {
        self.inner.source()
    }
    fn target(&self) -> &Bimod {
        self.inner.target()
    }
    fn degree(&self) -> i64 {
        self.inner.degree()
    }
    fn apply(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        let v = self.inner.apply(chain, pre, w, post);
        if chain == self.chain && pre == self.pre && w == self.w && post == self.post {
            v ^ self.flip
        } else {
            v
        }
    }
}

// ---------------------------------------------------------------------------
// Verification

/// Printed form of an input tuple: whole sequence reversed.
pub fn describe(cat: &dyn Category, m: &dyn Bimodule, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> String {
    let mut items: Vec<String> = pre.iter().map(|&a| cat.label(a)).collect();
    items.push(m.label(w));
    items.extend(post.iter().map(|&a| cat.label(a)));
    items.reverse();
    let objs: Vec<String> = chain.iter().map(|&o| cat.object_label(o)).collect();
    format!("^{}|{}({}) on ({})", post.len(), pre.len(), items.join(","), objs.join(","))
}

/// Nonzero components of `f` with `p + q ≤ k_max`, one `describe`d line each,
/// sorted.
pub fn morphism_table(cat: &dyn Category, f: &dyn PreMorphism, k_max: usize) -> Vec<String> {
    let (src, tgt) = (f.source().clone(), f.target().clone());
    let mut out = Vec::new();
    for total in 0..=k_max {
        for p in 0..=total {
            for c in chains(cat.num_objects(), total + 2) {
                for pre in tuples(cat.dim(), p) {
                    for post in tuples(cat.dim(), total - p) {
                        for w in 0..src.dim() {
                            let v = f.apply(&c, &pre, w, &post);
                            if v != 0 {
                                let o: Vec<String> = bits(v).map(|i| tgt.label(i)).collect();
                                out.push(format!("{}\t{}", describe(cat, src.as_ref(), &c, &pre, w, &post), o.join(" + ")));
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Evaluates `eval` on every input tuple with `p + q ≤ K` and records the
/// nonzero results as failures.
pub fn sweep(
    cat: &dyn Category,
    src: &dyn Bimodule,
    k_max: usize,
    check: &str,
    eval: &(dyn Fn(&[usize], &[usize], usize, &[usize]) -> Vec128 + Sync),
    out_label: &(dyn Fn(usize) -> String + Sync),
) -> Certificate {
    let objs = cat.num_objects();
    let mut tasks = Vec::new();
    for total in 0..=k_max {
        for p in 0..=total {
            for c in chains(objs, total + 2) {
                tasks.push((p, total - p, c));
            }
        }
    }
    let dim = cat.dim();
    let results: Vec<(usize, Vec<String>)> = tasks
        .par_iter()
        .map(|(p, q, c)| {
            let mut count = 0;
            let mut fails = Vec::new();
            let pres = tuples(dim, *p);
            let posts = tuples(dim, *q);
            for pre in &pres {
                for post in &posts {
                    for w in 0..src.dim() {
                        count += 1;
                        let v = eval(c, pre, w, post);
                        if v != 0 && fails.len() < FAILURE_LIMIT {
                            let out: Vec<String> = bits(v).map(out_label).collect();
                            fails.push(format!("{} gives {}", describe(cat, src, c, pre, w, post), out.join(" + ")));
                        }
                    }
                }
            }
            (count, fails)
        })
        .collect();
    let mut cert = Certificate { check: check.into(), k: k_max, tuples: 0, failures: Vec::new() };
    for (n, f) in results {
        cert.tuples += n;
        cert.failures.extend(f);
    }
    cert.failures.truncate(FAILURE_LIMIT);
    cert
}

/// The bimodule relations up to order `K`.
pub fn check_bimodule(cat: &dyn Category, m: &Bimod, k_max: usize) -> Certificate {
    sweep(cat, m.as_ref(), k_max, "bimodule_relations", &|c, pre, w, post| bimodule_relation(cat, m.as_ref(), c, pre, w, post), &|i| m.label(i))
}

/// `δf = 0` up to order `K`.
pub fn is_morphism(cat: &Arc<dyn Category>, f: &Morph, k_max: usize) -> Certificate {
    let d = delta(cat.clone(), f.clone());
    let t = f.target().clone();
    sweep(cat.as_ref(), f.source().as_ref(), k_max, "morphism", &|c, pre, w, post| d.apply(c, pre, w, post), &|i| t.label(i))
}

/// `f + g = δH` up to order `K`.
pub fn is_homotopy(cat: &Arc<dyn Category>, h: &Morph, f: &Morph, g: &Morph, k_max: usize) -> Certificate {
    let d = delta(cat.clone(), h.clone());
    let t = h.target().clone();
    sweep(
        cat.as_ref(),
        h.source().as_ref(),
        k_max,
        "homotopy",
        &|c, pre, w, post| d.apply(c, pre, w, post) ^ f.apply(c, pre, w, post) ^ g.apply(c, pre, w, post),
        &|i| t.label(i),
    )
}

/// `f = g` up to order `K`.
pub fn check_equal(cat: &dyn Category, f: &Morph, g: &Morph, k_max: usize, check: &str) -> Certificate {
    let t = f.target().clone();
    sweep(cat, f.source().as_ref(), k_max, check, &|c, pre, w, post| f.apply(c, pre, w, post) ^ g.apply(c, pre, w, post), &|i| t.label(i))
}

/// Two bimodules on the same basis have equal structure maps up to `K`.
pub fn check_same_structure(cat: &dyn Category, a: &Bimod, b: &Bimod, k_max: usize, check: &str) -> Certificate {
    sweep(cat, a.as_ref(), k_max, check, &|c, pre, w, post| a.n(c, pre, w, post) ^ b.n(c, pre, w, post), &|i| a.label(i))
}

fn degree_mismatch(cat: &dyn Category, tgt: &dyn Bimodule, want: i64, v: Vec128) -> Vec128 {
    let r = cat.rotation();
    bits(v).filter(|&b| reduce_grade(tgt.grade(b), r) != reduce_grade(want, r)).fold(0, |acc, b| acc | unit(b))
}

fn input_degree(cat: &dyn Category, src: &dyn Bimodule, pre: &[usize], w: usize, post: &[usize]) -> i64 {
    pre.iter().chain(post).map(|&a| cat.grade(a)).sum::<i64>() + src.grade(w) - (pre.len() + post.len()) as i64
}

/// Every nonzero component of `f` has degree `deg f − p − q`.
pub fn check_morphism_degree(cat: &dyn Category, f: &Morph, k_max: usize) -> Certificate {
    let (src, tgt) = (f.source().clone(), f.target().clone());
    sweep(
        cat,
        src.as_ref(),
        k_max,
        "degree",
        &|c, pre, w, post| {
            let want = input_degree(cat, src.as_ref(), pre, w, post) + f.degree();
            degree_mismatch(cat, tgt.as_ref(), want, f.apply(c, pre, w, post))
        },
        &|i| tgt.label(i),
    )
}

/// Every nonzero structure map output has degree `1 − p − q` above the inputs.
pub fn check_bimodule_degree(cat: &dyn Category, m: &Bimod, k_max: usize) -> Certificate {
    sweep(
        cat,
        m.as_ref(),
        k_max,
        "degree",
        &|c, pre, w, post| degree_mismatch(cat, m.as_ref(), input_degree(cat, m.as_ref(), pre, w, post) + 1, m.n(c, pre, w, post)),
        &|i| m.label(i),
    )
}

/// Strict unitality: `n^{1|0}` and `n^{0|1}` with the unit act as the
/// identity and every other component with a unit input vanishes.
pub fn check_unital(cat: &dyn Category, m: &Bimod, unit_elt: usize, k_max: usize) -> Certificate {
    sweep(
        cat,
        m.as_ref(),
        k_max,
        "strict_unit",
        &|c, pre, w, post| {
            let p = pre.len();
            let has_unit = pre.iter().enumerate().any(|(i, &a)| a == unit_elt && c[i] == c[i + 1])
                || post.iter().enumerate().any(|(j, &a)| a == unit_elt && c[p + 1 + j] == c[p + 2 + j]);
            if !has_unit {
                return 0;
            }
            let want = if pre.len() + post.len() == 1 { unit(w) } else { 0 };
            m.n(c, pre, w, post) ^ want
        },
        &|i| m.label(i),
    )
}

// ---------------------------------------------------------------------------
// Linear level

pub fn to_f2(v: Vec128, len: usize) -> F2Vec {
    F2Vec::from_indices(len, bits(v))
}

pub fn from_f2(v: &F2Vec) -> Vec128 {
    v.ones().fold(0, |acc, i| acc | unit(i))
}

fn unique_labels(m: &dyn Bimodule) -> Vec<String> {
    let mut seen = BTreeMap::new();
    (0..m.dim())
        .map(|i| {
            let l = m.label(i);
            let n = seen.entry(l.clone()).or_insert(0usize);
            *n += 1;
            if *n == 1 {
                l
            } else {
                format!("{l}#{n}")
            }
        })
        .collect()
}

/// The complex `(M(c0, c1), n^{0|0})`.
pub fn linear_complex(m: &dyn Bimodule, c0: usize, c1: usize, rotation: i64) -> Result<ChainComplex, LinalgError> {
    let d = m.dim();
    let cols: Vec<F2Vec> = (0..d).map(|w| to_f2(m.n(&[c0, c1], &[], w, &[]), d)).collect();
    let space = GradedF2Space::new(unique_labels(m), (0..d).map(|i| m.grade(i)).collect(), rotation)?;
    ChainComplex::new(space, F2Matrix::from_columns(d, &cols), 1)
}

pub fn linear_matrix(f: &dyn PreMorphism, c0: usize, c1: usize) -> F2Matrix {
    let rows = f.target().dim();
    let cols: Vec<F2Vec> = (0..f.source().dim()).map(|w| to_f2(f.apply(&[c0, c1], &[], w, &[]), rows)).collect();
    F2Matrix::from_columns(rows, &cols)
}

/// Whether `f^{0|0}` is a quasi-isomorphism on every object pair.
pub fn linear_quasi_iso(cat: &dyn Category, f: &Morph) -> Result<(), BimoduleError> {
    let r = cat.rotation();
    for c0 in 0..cat.num_objects() {
        for c1 in 0..cat.num_objects() {
            let s = linear_complex(f.source().as_ref(), c0, c1, r)?;
            let t = linear_complex(f.target().as_ref(), c0, c1, r)?;
            let map = ChainMap { source: &s, target: &t, matrix: linear_matrix(f.as_ref(), c0, c1), degree: f.degree() };
            if !map.is_quasi_iso()? {
                return Err(BimoduleError::NotQuasiIso(c0, c1));
            }
        }
    }
    Ok(())
}

/// Linear map `s` of degree −1 with `ds + sd = 1` on an acyclic complex,
/// as columns; `None` when the complex has homology.
pub fn linear_contraction(d_cols: &[Vec128]) -> Option<Vec<Vec128>> {
    let n = d_cols.len();
    let mut image = crate::f2linalg::Span::new(n);
    let mut us = Vec::new();
    let mut bs = Vec::new();
    for (j, &col) in d_cols.iter().enumerate() {
        if image.insert(&to_f2(col, n)) {
            us.push(j);
            bs.push(col);
        }
    }
    if 2 * us.len() != n {
        return None;
    }
    let r = us.len();
    let basis: Vec<F2Vec> = us.iter().map(|&j| to_f2(unit(j), n)).chain(bs.iter().map(|&b| to_f2(b, n))).collect();
    let p = F2Matrix::from_columns(n, &basis);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let c = p.solve(&to_f2(unit(k), n))?;
        let mut s = 0;
        for i in 0..r {
            if c.get(r + i) {
                s ^= unit(us[i]);
            }
        }
        out.push(s);
    }
    Some(out)
}

/// A degree −1 pre-morphism `S` on an acyclic bimodule with `δS = 1`,
/// built order by order from linear contractions.
pub struct Contraction {
    cat: Arc<dyn Category>,
    module: Bimod,
    linear: Vec<Vec<Vec<Vec128>>>,
    memo: DashMap<Key, Vec128>,
}

impl Contraction {
    pub fn new(cat: Arc<dyn Category>, module: Bimod) -> Result<Self, BimoduleError> {
        let objs = cat.num_objects();
        let mut linear = vec![Vec::new(); objs];
        for (c0, row) in linear.iter_mut().enumerate() {
            for c1 in 0..objs {
                let cols: Vec<Vec128> = (0..module.dim()).map(|w| module.n(&[c0, c1], &[], w, &[])).collect();
                row.push(linear_contraction(&cols).ok_or(BimoduleError::NotQuasiIso(c0, c1))?);
            }
        }
        Ok(Contraction { cat, module, linear, memo: DashMap::new() })
    }

    /// The part of `(δS + 1)(pre, w, post)` not involving this component.
    fn residual(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        let (p, q) = (pre.len(), post.len());
        let m = self.module.as_ref();
        let mut out = if p + q == 0 { unit(w) } else { 0 };
        for i in 0..=p {
            for j in 0..=q {
                let inner_chain = &chain[i..=p + 1 + j];
                let outer = outer_chain(chain, i, p + 1 + j);
                if !(i == 0 && j == q) {
                    let v = self.apply(inner_chain, &pre[i..], w, &post[..j]);
                    if v != 0 {
                        out ^= n_lin(m, &outer, &pre[..i], v, &post[j..]);
                    }
                }
                if !(i == p && j == 0) {
                    let v = m.n(inner_chain, &pre[i..], w, &post[..j]);
                    for b in bits(v) {
                        out ^= self.apply(&outer, &pre[..i], b, &post[j..]);
                    }
                }
            }
        }
        for_each_block(self.cat.as_ref(), chain, pre, post, 2, &mut |c, a, b| out ^= self.apply(c, a, w, b));
        out
    }

    fn apply(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        let k = key(chain, &[pre, &[w], post]);
        if let Some(v) = self.memo.get(&k) {
            return *v;
        }
        let e = self.residual(chain, pre, w, post);
        let s = &self.linear[chain[0]][chain[chain.len() - 1]];
        let v = bits(e).fold(0, |acc, b| acc ^ s[b]);
        self.memo.insert(k, v);
        v
    }
}

struct ContractionMorph {
    c: Contraction,
}

impl PreMorphism for ContractionMorph {
    fn source(&self) -> &Bimod {
        &self.c.module
    }
    fn target(&self) -> &Bimod {
        &self.c.module
    }
    fn degree(&self) -> i64 {
        -1
    }
    fn apply(&self, chain: &[usize], pre: &[usize], w: usize, post: &[usize]) -> Vec128 {
        self.c.apply(chain, pre, w, post)
    }
}

/// `S` with `δS = 1` on a bimodule whose linear complexes are acyclic.
pub fn contraction(cat: Arc<dyn Category>, module: Bimod) -> Result<Morph, BimoduleError> {
    Ok(Arc::new(ContractionMorph { c: Contraction::new(cat, module)? }))
}

/// A homotopy inverse `g` of `f: M → N` with homotopies
/// `δ(left) = gf + 1_M` and `δ(right) = fg + 1_N`.
pub struct QuasiInverse {
    pub f: Morph,
    pub inverse: Morph,
    pub left: Morph,
    pub right: Morph,
}

/// Reads `g`, `left` and `right` off a contraction of `cone(f)`.
pub fn quasi_inverse(cat: &Arc<dyn Category>, f: &Morph) -> Result<QuasiInverse, BimoduleError> {
    if f.degree() != 0 {
        return Err(BimoduleError::NotDegreeZero(f.degree()));
    }
    linear_quasi_iso(cat.as_ref(), f)?;
    let c = cone(f);
    let s = contraction(cat.clone(), c.module.clone())?;
    let (m, n) = (f.source().clone(), f.target().clone());
    let d = c.offset();
    let blk = |from: usize, from_mod: &Bimod, to: usize, to_mod: &Bimod| {
        let (fm, tm) = (from_mod.clone(), to_mod.clone());
        let s = s.clone();
        let td = tm.dim();
        let mask = if td == 128 { u128::MAX } else { (1u128 << td) - 1 };
        let degree = s.degree() + grade_offset(fm.as_ref(), c.module.as_ref(), from) - grade_offset(tm.as_ref(), c.module.as_ref(), to);
        from_fn(fm, tm, degree, move |ch, pre, w, post| (s.apply(ch, pre, w + from, post) >> to) & mask)
    };
    let inverse = blk(d, &n, 0, &m);
    let left = blk(0, &m, 0, &m);
    let right = blk(d, &n, d, &n);
    Ok(QuasiInverse { f: f.clone(), inverse, left, right })
}

impl QuasiInverse {
    /// Certifies `g` is a morphism and both homotopies up to order `K`.
    pub fn certify(&self, cat: &Arc<dyn Category>, k_max: usize) -> Vec<Certificate> {
        let gf = compose(self.inverse.clone(), self.f.clone());
        let fg = compose(self.f.clone(), self.inverse.clone());
        let id_m = identity(self.f.source().clone());
        let id_n = identity(self.f.target().clone());
        let mut a = is_morphism(cat, &self.inverse, k_max);
        a.check = "inverse_morphism".into();
        let mut b = is_homotopy(cat, &self.left, &gf, &id_m, k_max);
        b.check = "inverse_left_homotopy".into();
        let mut c = is_homotopy(cat, &self.right, &fg, &id_n, k_max);
        c.check = "inverse_right_homotopy".into();
        vec![a, b, c]
    }
}

/// For a submodule `Q` of `M` with quotient `P = M/Q` and the canonical
/// splitting `σ`, the morphism `φ = (1 − σπ) n_M σ: P[−1] → Q`, with
/// `M = cone(φ)`.
pub struct SubmoduleCone {
    pub quotient: Bimod,
    pub sub: Bimod,
    pub phi: Morph,
    pub cone: Summands,
}

pub fn submodule_cone_morphism(m: &Bimod, sub_basis: &[usize]) -> SubmoduleCone {
    let quot_basis: Vec<usize> = (0..m.dim()).filter(|i| !sub_basis.contains(i)).collect();
    let sub = restrict(m.clone(), sub_basis.to_vec());
    let quotient = restrict(m.clone(), quot_basis.clone());
    let src = shift(quotient.clone(), -1);
    let (mm, sb) = (m.clone(), sub_basis.to_vec());
    let phi = from_fn(src, sub.clone(), 0, move |c, pre, w, post| {
        let v = mm.n(c, pre, quot_basis[w], post);
        sb.iter().enumerate().filter(|(_, &b)| v >> b & 1 == 1).fold(0, |acc, (i, _)| acc | unit(i))
    });
    let cone = cone(&phi);
    SubmoduleCone { quotient, sub, phi, cone }
}

impl SubmoduleCone {
    /// Basis of `M` listed in cone order (quotient first, then submodule).
    pub fn cone_order(&self, m: &Bimod, sub_basis: &[usize]) -> Vec<usize> {
        (0..m.dim()).filter(|i| !sub_basis.contains(i)).chain(sub_basis.iter().copied()).collect()
    }
}

/// `M` relabelled by a basis permutation: element `i` is `perm[i]` of `M`.
pub fn permute(m: Bimod, perm: Vec<usize>) -> Bimod {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    let (mm, pp) = (m.clone(), perm.clone());
    let structure = move |c: &[usize], pre: &[usize], w: usize, post: &[usize]| {
        bits(mm.n(c, pre, pp[w], post)).fold(0, |acc, b| acc | unit(inv[b]))
    };
    memo_bimodule(Arc::new(Explicit {
        labels: perm.iter().map(|&p| m.label(p)).collect(),
        grades: perm.iter().map(|&p| m.grade(p)).collect(),
        structure: Box::new(structure),
    }))
}

/// Naive identification of two modules with the same structure maps.
pub fn naive_iso(src: Bimod, tgt: Bimod, images: &[usize]) -> Morph {
    let cols = images.iter().map(|&i| unit(i)).collect();
    naive(src, tgt, 0, cols)
}
