//! Exact linear algebra over F₂ with bit-packed rows, plus graded chain
//! complexes and their homology.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

const W: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(W)
}

/// A dense vector over F₂.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct F2Vec {
    len: usize,
    words: Vec<u64>,
}

impl F2Vec {
    pub fn zeros(len: usize) -> Self {
        F2Vec { len, words: vec![0; words_for(len)] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in idx {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / W] >> (i % W)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i % W);
        if b {
            self.words[i / W] |= m;
        } else {
            self.words[i / W] &= !m;
        }
    }

    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / W] ^= 1u64 << (i % W);
    }

    pub fn xor_assign(&mut self, other: &F2Vec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn first_one(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(k * W + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn dot(&self, other: &F2Vec) -> bool {
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        acc & 1 == 1
    }
}

impl fmt::Debug for F2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
        write!(f, "[{s}]")
    }
}

/// A dense F₂ matrix stored as bit rows.
#[derive(Clone, PartialEq, Eq)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<F2Vec>,
}

impl fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F2Matrix {}x{}", self.rows, self.cols)?;
        for r in &self.data {
            writeln!(f, "  {r:?}")?;
        }
        Ok(())
    }
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub matrix: F2Matrix,
    pub pivots: Vec<usize>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        F2Matrix { rows, cols, data: vec![F2Vec::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<F2Vec>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "row length mismatch");
        F2Matrix { rows: rows.len(), cols, data: rows }
    }

    /// Builds the matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(rows: usize, cols: &[F2Vec]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for i in c.ones() {
                m.set(i, j, true);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        self.data[r].set(c, b)
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        self.data[r].flip(c)
    }

    pub fn row(&self, r: usize) -> &F2Vec {
        &self.data[r]
    }

    pub fn column(&self, c: usize) -> F2Vec {
        let mut v = F2Vec::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(F2Vec::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.data[r].ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    pub fn mul(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in self.data[r].ones() {
                out.data[r].xor_assign(&other.data[k]);
            }
        }
        out
    }

    pub fn apply(&self, v: &F2Vec) -> F2Vec {
        assert_eq!(self.cols, v.len(), "dimension mismatch in apply");
        let mut out = F2Vec::zeros(self.rows);
        for r in 0..self.rows {
            if self.data[r].dot(v) {
                out.set(r, true);
            }
        }
        out
    }

    pub fn add(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            a.xor_assign(b);
        }
        out
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> F2Matrix {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    pub fn echelon(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| m.data[i].get(c)) else { continue };
            m.data.swap(r, p);
            let pivot_row = m.data[r].clone();
            for i in 0..self.rows {
                if i != r && m.data[i].get(c) {
                    m.data[i].xor_assign(&pivot_row);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Kernel basis: one vector per free column, in increasing column order.
    pub fn kernel(&self) -> Vec<F2Vec> {
        let e = self.echelon();
        let mut is_pivot = vec![false; self.cols];
        for &p in &e.pivots {
            is_pivot[p] = true;
        }
        let mut out = Vec::new();
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = F2Vec::unit(self.cols, f);
            for (i, &p) in e.pivots.iter().enumerate() {
                if e.matrix.get(i, f) {
                    v.set(p, true);
                }
            }
            out.push(v);
        }
        out
    }

    /// Some solution of `self · x = b`, or `None` when `b` is not in the image.
    pub fn solve(&self, b: &F2Vec) -> Option<F2Vec> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in self.data[r].ones() {
                aug.set(r, c, true);
            }
            if b.get(r) {
                aug.set(r, self.cols, true);
            }
        }
        let e = aug.echelon();
        if e.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = F2Vec::zeros(self.cols);
        for (i, &p) in e.pivots.iter().enumerate() {
            if e.matrix.get(i, self.cols) {
                x.set(p, true);
            }
        }
        Some(x)
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }
}

/// Incremental span used for greedy independence tests.
#[derive(Clone, Debug, Default)]
pub struct Span {
    len: usize,
    rows: Vec<(usize, F2Vec)>,
}

impl Span {
    pub fn new(len: usize) -> Self {
        Span { len, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &F2Vec) -> F2Vec {
        let mut v = v.clone();
        for (p, r) in &self.rows {
            if v.get(*p) {
                v.xor_assign(r);
            }
        }
        v
    }

    pub fn contains(&self, v: &F2Vec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &F2Vec) -> bool {
        assert_eq!(v.len(), self.len);
        let v = self.reduce(v);
        let Some(p) = v.first_one() else { return false };
        for (_, r) in self.rows.iter_mut() {
            if r.get(p) {
                r.xor_assign(&v);
            }
        }
        self.rows.push((p, v));
        true
    }
}

/// A graded F₂ vector space with labeled basis. Gradings live in ℤ when
/// `r == 0` and in ℤ/2r otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedF2Space {
    labels: Vec<String>,
    grades: Vec<i64>,
    r: i64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("duplicate basis label `{0}`")]
    DuplicateLabel(String),
    #[error("label and grading lists differ in length")]
    LengthMismatch,
    #[error("differential does not square to zero (first failure on basis vector `{0}`)")]
    NotAComplex(String),
    #[error("differential is not homogeneous of degree {degree} on `{label}`")]
    NotHomogeneous { label: String, degree: i64 },
    #[error("map does not commute with the differentials (basis vector `{0}`)")]
    NotAChainMap(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub fn reduce_grade(g: i64, r: i64) -> i64 {
    if r == 0 {
        g
    } else {
        g.rem_euclid(2 * r)
    }
}

impl GradedF2Space {
    pub fn new(labels: Vec<String>, grades: Vec<i64>, r: i64) -> Result<Self, LinalgError> {
        if labels.len() != grades.len() {
            return Err(LinalgError::LengthMismatch);
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(LinalgError::DuplicateLabel(l.clone()));
            }
        }
        let grades = grades.into_iter().map(|g| reduce_grade(g, r)).collect();
        Ok(GradedF2Space { labels, grades, r })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn grade(&self, i: usize) -> i64 {
        self.grades[i]
    }

    pub fn rotation(&self) -> i64 {
        self.r
    }

    pub fn reduce(&self, g: i64) -> i64 {
        reduce_grade(g, self.r)
    }

    pub fn degrees(&self) -> Vec<i64> {
        let mut d: Vec<i64> = self.grades.clone();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn indices_in_degree(&self, g: i64) -> Vec<usize> {
        let g = self.reduce(g);
        (0..self.dim()).filter(|&i| self.grades[i] == g).collect()
    }

    pub fn format_vec(&self, v: &F2Vec) -> String {
        let terms: Vec<&str> = v.ones().map(|i| self.labels[i].as_str()).collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

/// A finite-dimensional chain complex; `d` maps basis vector `j` to column `j`.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    space: GradedF2Space,
    d: F2Matrix,
    d_degree: i64,
}

/// Fully reduced echelon rows, each tagged with coordinates in some
/// auxiliary basis.
#[derive(Clone, Debug)]
struct TaggedEchelon {
    rows: Vec<(usize, F2Vec, F2Vec)>,
}

impl TaggedEchelon {
    fn insert(&mut self, v: &F2Vec, tag: &F2Vec) -> bool {
        let (mut v, mut tag) = (v.clone(), tag.clone());
        for (p, r, t) in &self.rows {
            if v.get(*p) {
                v.xor_assign(r);
                tag.xor_assign(t);
            }
        }
        let Some(p) = v.first_one() else { return false };
        for (_, r, t) in self.rows.iter_mut() {
            if r.get(p) {
                r.xor_assign(&v);
                t.xor_assign(&tag);
            }
        }
        self.rows.push((p, v, tag));
        true
    }

    fn reduce(&self, v: &F2Vec, tag_len: usize) -> (F2Vec, F2Vec) {
        let mut v = v.clone();
        let mut tag = F2Vec::zeros(tag_len);
        for (p, r, t) in &self.rows {
            if v.get(*p) {
                v.xor_assign(r);
                tag.xor_assign(t);
            }
        }
        (v, tag)
    }
}

/// Homology in one degree: dimension and chosen cycle representatives.
#[derive(Clone, Debug)]
pub struct HomologyGroup {
    pub degree: i64,
    pub reps: Vec<F2Vec>,
    classes: TaggedEchelon,
}

impl HomologyGroup {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Coordinates of the class of `z` in the representative basis, or
    /// `None` when `z` is not a cycle of this degree.
    pub fn class_of(&self, z: &F2Vec) -> Option<F2Vec> {
        let (rest, tag) = self.classes.reduce(z, self.reps.len());
        rest.is_zero().then_some(tag)
    }
}

/// Homology of a complex, degree by degree.
#[derive(Clone, Debug)]
pub struct Homology {
    pub groups: BTreeMap<i64, HomologyGroup>,
}

impl Homology {
    pub fn dim(&self, g: i64) -> usize {
        self.groups.get(&g).map_or(0, HomologyGroup::dim)
    }

    pub fn total_dim(&self) -> usize {
        self.groups.values().map(HomologyGroup::dim).sum()
    }

    /// Nonzero dimensions keyed by degree.
    pub fn dims(&self) -> BTreeMap<i64, usize> {
        self.groups.iter().filter(|(_, h)| h.dim() > 0).map(|(&g, h)| (g, h.dim())).collect()
    }
}

impl ChainComplex {
    pub fn new(space: GradedF2Space, d: F2Matrix, d_degree: i64) -> Result<Self, LinalgError> {
        let n = space.dim();
        if d.rows() != n || d.cols() != n {
            return Err(LinalgError::Dimension(format!("differential is {}x{}, space has dim {n}", d.rows(), d.cols())));
        }
        for j in 0..n {
            let col = d.column(j);
            for i in col.ones() {
                if space.grade(i) != space.reduce(space.grade(j) + d_degree) {
                    return Err(LinalgError::NotHomogeneous { label: space.label(j).to_string(), degree: d_degree });
                }
            }
        }
        let dd = d.mul(&d);
        if let Some(j) = (0..n).find(|&j| !dd.column(j).is_zero()) {
            return Err(LinalgError::NotAComplex(space.label(j).to_string()));
        }
        Ok(ChainComplex { space, d, d_degree })
    }

    pub fn space(&self) -> &GradedF2Space {
        &self.space
    }

    pub fn differential(&self) -> &F2Matrix {
        &self.d
    }

    pub fn d_degree(&self) -> i64 {
        self.d_degree
    }

    pub fn homology(&self) -> Homology {
        let n = self.space.dim();
        let mut groups = BTreeMap::new();
        for g in self.space.degrees() {
            let here = self.space.indices_in_degree(g);
            let up = self.space.indices_in_degree(g + self.d_degree);
            let down = self.space.indices_in_degree(g - self.d_degree);
            let lift = |local: &F2Vec| F2Vec::from_indices(n, local.ones().map(|i| here[i]));
            let d_out = self.d.select(&up, &here);
            let d_in = self.d.select(&here, &down);
            let mut boundary = Span::new(n);
            for j in 0..d_in.cols() {
                boundary.insert(&lift(&d_in.column(j)));
            }
            let mut taken = boundary.clone();
            let mut reps = Vec::new();
            for z in d_out.kernel() {
                let z = lift(&z);
                if taken.insert(&z) {
                    reps.push(z);
                }
            }
            let mut classes = TaggedEchelon { rows: Vec::new() };
            let none = F2Vec::zeros(reps.len());
            for j in 0..d_in.cols() {
                classes.insert(&lift(&d_in.column(j)), &none);
            }
            for (k, z) in reps.iter().enumerate() {
                classes.insert(z, &F2Vec::unit(reps.len(), k));
            }
            groups.insert(g, HomologyGroup { degree: g, reps, classes });
        }
        Homology { groups }
    }

    /// The dual complex on the dual basis with transposed differential.
    /// With `negate`, dual generators sit in degree `-|b|`; otherwise they
    /// keep `|b|` and the differential changes the sign of its degree.
    pub fn dual(&self, label: impl Fn(&str) -> String, negate: bool) -> ChainComplex {
        let labels = self.space.labels().iter().map(|l| label(l)).collect();
        let sign = if negate { -1 } else { 1 };
        let grades = (0..self.space.dim()).map(|i| sign * self.space.grade(i)).collect();
        let space = GradedF2Space::new(labels, grades, self.space.rotation()).expect("dual labels unique");
        ChainComplex { space, d: self.d.transpose(), d_degree: -sign * self.d_degree }
    }
}

/// A degree-homogeneous linear map between chain complexes.
#[derive(Clone, Debug)]
pub struct ChainMap<'a> {
    pub source: &'a ChainComplex,
    pub target: &'a ChainComplex,
    pub matrix: F2Matrix,
    pub degree: i64,
}

impl ChainMap<'_> {
    pub fn check(&self) -> Result<(), LinalgError> {
        let (s, t) = (self.source, self.target);
        if self.matrix.rows() != t.space.dim() || self.matrix.cols() != s.space.dim() {
            return Err(LinalgError::Dimension("chain map shape".into()));
        }
        let lhs = t.d.mul(&self.matrix);
        let rhs = self.matrix.mul(&s.d);
        if let Some(j) = (0..s.space.dim()).find(|&j| lhs.column(j) != rhs.column(j)) {
            return Err(LinalgError::NotAChainMap(s.space.label(j).to_string()));
        }
        for j in 0..s.space.dim() {
            for i in self.matrix.column(j).ones() {
                if t.space.grade(i) != t.space.reduce(s.space.grade(j) + self.degree) {
                    return Err(LinalgError::NotHomogeneous { label: s.space.label(j).to_string(), degree: self.degree });
                }
            }
        }
        Ok(())
    }

    /// Matrices of the induced map on homology, keyed by source degree.
    pub fn induced_on_homology(&self) -> Result<BTreeMap<i64, F2Matrix>, LinalgError> {
        self.check()?;
        let hs = self.source.homology();
        let ht = self.target.homology();
        let mut out = BTreeMap::new();
        for (&g, src) in &hs.groups {
            let tg = self.target.space.reduce(g + self.degree);
            let tgt = ht.groups.get(&tg);
            let rows = tgt.map_or(0, HomologyGroup::dim);
            let mut cols = Vec::new();
            for z in &src.reps {
                let img = self.matrix.apply(z);
                let c = match tgt {
                    Some(h) => h.class_of(&img).expect("image of a cycle is a cycle"),
                    None => F2Vec::zeros(0),
                };
                cols.push(c);
            }
            out.insert(g, F2Matrix::from_columns(rows, &cols));
        }
        for (&g, tgt) in &ht.groups {
            let sg = self.source.space.reduce(g - self.degree);
            if tgt.dim() > 0 && !out.contains_key(&sg) {
                out.insert(sg, F2Matrix::zeros(tgt.dim(), 0));
            }
        }
        Ok(out)
    }

    pub fn is_quasi_iso(&self) -> Result<bool, LinalgError> {
        Ok(self.induced_on_homology()?.values().all(F2Matrix::is_invertible))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rank() {
        assert_eq!(F2Matrix::identity(3).rank(), 3);
        assert_eq!(F2Matrix::zeros(4, 5).rank(), 0);
    }

    #[test]
    fn solve_and_kernel() {
        let m = F2Matrix::from_rows(3, vec![F2Vec::from_indices(3, [0, 1]), F2Vec::from_indices(3, [1, 2])]);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert!(m.apply(&k[0]).is_zero());
        let b = F2Vec::from_indices(2, [0]);
        let x = m.solve(&b).unwrap();
        assert_eq!(m.apply(&x), b);
    }
}
