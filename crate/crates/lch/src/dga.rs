//! The Chekanov-Eliashberg DGA over F₂: words in Reeb chords and invertible
//! base-point symbols, the differential counted by one-positive disks, and
//! the structural checks (∂² = 0, degree, action filtration, link grading).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_rational::Rational64;
use serde::Serialize;
use thiserror::Error;

use crate::diagram::{BoundaryLetter, DiskPattern, LagrangianDiagram, DEFAULT_REGION_CAP};
use crate::f2linalg::reduce_grade;

/// One letter of a word: a chord, or a base point `t_i^{±1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Chord(usize),
    T(usize),
    TInv(usize),
}

impl Letter {
    fn inverse(self) -> Option<Letter> {
        match self {
            Letter::T(i) => Some(Letter::TInv(i)),
            Letter::TInv(i) => Some(Letter::T(i)),
            Letter::Chord(_) => None,
        }
    }
}

/// A reduced word: no adjacent `t t⁻¹` or `t⁻¹ t`.
pub type Word = Vec<Letter>;

/// Appends a letter, cancelling against an inverse base-point symbol.
pub fn push_reduced(w: &mut Word, l: Letter) {
    if let (Some(&last), Some(inv)) = (w.last(), l.inverse()) {
        if last == inv {
            w.pop();
            return;
        }
    }
    w.push(l);
}

pub fn concat(parts: &[&[Letter]]) -> Word {
    let mut w = Word::new();
    for p in parts {
        for &l in *p {
            push_reduced(&mut w, l);
        }
    }
    w
}

/// An element of the algebra: a set of words, summed over F₂.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AlgElement {
    words: BTreeSet<Word>,
}

impl AlgElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_word(Word::new())
    }

    pub fn from_word(w: Word) -> Self {
        let mut e = Self::zero();
        e.add_word(w);
        e
    }

    pub fn add_word(&mut self, w: Word) {
        if !self.words.remove(&w) {
            self.words.insert(w);
        }
    }

    pub fn add(&mut self, other: &AlgElement) {
        for w in &other.words {
            self.add_word(w.clone());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.words.iter()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: &[Letter]) -> bool {
        self.words.contains(w)
    }

    /// Words sorted by length, then lexicographically.
    pub fn sorted_words(&self) -> Vec<&Word> {
        let mut v: Vec<&Word> = self.words.iter().collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        v
    }

    pub fn mul(&self, other: &AlgElement) -> AlgElement {
        let mut out = AlgElement::zero();
        for a in &self.words {
            for b in &other.words {
                out.add_word(concat(&[a, b]));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Chord,
    Basepoint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub label: String,
    pub kind: GeneratorKind,
    pub grading: i64,
}

/// Mishachev link grading: component indices `(o, υ)` per chord and per
/// base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkGrading {
    pub chord: Vec<(usize, usize)>,
    pub base: Vec<usize>,
}

impl LinkGrading {
    fn ends(&self, l: Letter) -> (usize, usize) {
        match l {
            Letter::Chord(i) => self.chord[i],
            Letter::T(i) | Letter::TInv(i) => (self.base[i], self.base[i]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CeDga {
    pub rotation: i64,
    pub chords: Vec<Generator>,
    pub base_points: Vec<String>,
    /// `∂` of each chord; base points have zero differential.
    pub differential: Vec<AlgElement>,
    pub link_grading: Option<LinkGrading>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DgaError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("disk search for `{0}` hit the traversal cap and may be incomplete")]
    Incomplete(String),
    #[error("differential fails validation: {0}")]
    Invalid(String),
}

fn perr(line: usize, message: impl Into<String>) -> DgaError {
    DgaError::Parse { line, message: message.into() }
}

/// A per-generator check outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckFailure {
    pub generator: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub checked: usize,
    pub failures: Vec<CheckFailure>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl CeDga {
    /// The DGA of a diagram: `∂a` is the mod-2 sum of the boundary words of
    /// the one-positive disks at `a`.
    pub fn from_diagram(d: &LagrangianDiagram, region_cap: usize) -> Result<Self, DgaError> {
        let grades = d.chord_gradings();
        let chords = d
            .crossings
            .iter()
            .zip(&grades)
            .map(|(c, &g)| Generator { label: c.label.clone(), kind: GeneratorKind::Chord, grading: g })
            .collect();
        let base_points = d.base_points.iter().map(|b| b.label.clone()).collect();
        let mut differential = Vec::new();
        for a in 0..d.crossings.len() {
            let search = d.enumerate_disks(DiskPattern::OnePositiveAt(a), region_cap);
            if !search.complete() {
                return Err(DgaError::Incomplete(d.crossings[a].label.clone()));
            }
            let mut e = AlgElement::zero();
            for disk in &search.disks {
                e.add_word(word_from_boundary(&disk.word));
            }
            differential.push(e);
        }
        let link_grading = (d.components > 1).then(|| LinkGrading {
            chord: d
                .crossings
                .iter()
                .map(|x| (d.component_of[x.edges[x.over_in_slot()]], d.component_of[x.edges[0]]))
                .collect(),
            base: d.base_points.iter().map(|b| d.component_of[b.edge]).collect(),
        });
        Ok(CeDga { rotation: d.rotation, chords, base_points, differential, link_grading })
    }

    pub fn from_diagram_default(d: &LagrangianDiagram) -> Result<Self, DgaError> {
        Self::from_diagram(d, DEFAULT_REGION_CAP)
    }

    pub fn chord_index(&self, label: &str) -> Option<usize> {
        self.chords.iter().position(|g| g.label == label)
    }

    pub fn grade(&self, l: Letter) -> i64 {
        match l {
            Letter::Chord(i) => self.chords[i].grading,
            _ => 0,
        }
    }

    pub fn word_grade(&self, w: &[Letter]) -> i64 {
        reduce_grade(w.iter().map(|&l| self.grade(l)).sum(), self.rotation)
    }

    pub fn reduce(&self, g: i64) -> i64 {
        reduce_grade(g, self.rotation)
    }

    /// Extends `∂` to all of the algebra by linearity and the Leibniz rule.
    pub fn apply_differential(&self, e: &AlgElement) -> AlgElement {
        let mut out = AlgElement::zero();
        for w in e.words() {
            for (i, &l) in w.iter().enumerate() {
                if let Letter::Chord(c) = l {
                    for dw in self.differential[c].words() {
                        out.add_word(concat(&[&w[..i], dw, &w[i + 1..]]));
                    }
                }
            }
        }
        out
    }

    pub fn check_d_squared(&self) -> CheckReport {
        let mut failures = Vec::new();
        for (a, d) in self.differential.iter().enumerate() {
            let dd = self.apply_differential(d);
            if !dd.is_zero() {
                failures.push(CheckFailure {
                    generator: self.chords[a].label.clone(),
                    detail: format!("∂∂ = {}", self.format_element(&dd)),
                });
            }
        }
        CheckReport { check: "d_squared".into(), checked: self.chords.len(), failures }
    }

    pub fn check_degree(&self) -> CheckReport {
        let mut failures = Vec::new();
        for (a, d) in self.differential.iter().enumerate() {
            let want = self.reduce(self.chords[a].grading - 1);
            for w in d.words() {
                if self.word_grade(w) != want {
                    failures.push(CheckFailure {
                        generator: self.chords[a].label.clone(),
                        detail: format!("word `{}` has degree {}", self.format_word(w), self.word_grade(w)),
                    });
                }
            }
        }
        CheckReport { check: "degree".into(), checked: self.chords.len(), failures }
    }

    /// Every word of `∂a` must have total chord length strictly below `a`'s.
    pub fn check_stokes(&self, heights: &[Rational64]) -> CheckReport {
        let mut failures = Vec::new();
        for (a, d) in self.differential.iter().enumerate() {
            for w in d.words() {
                let s: Rational64 = w
                    .iter()
                    .filter_map(|l| match l {
                        Letter::Chord(c) => Some(heights[*c]),
                        _ => None,
                    })
                    .sum();
                if s >= heights[a] {
                    failures.push(CheckFailure {
                        generator: self.chords[a].label.clone(),
                        detail: format!("word `{}` has length {s} >= {}", self.format_word(w), heights[a]),
                    });
                }
            }
        }
        CheckReport { check: "stokes".into(), checked: self.chords.len(), failures }
    }

    /// Chords whose length lies below `cutoff` span a sub-DGA.
    pub fn is_closed_below(&self, heights: &[Rational64], cutoff: Rational64) -> bool {
        (0..self.chords.len()).filter(|&a| heights[a] < cutoff).all(|a| {
            self.differential[a]
                .words()
                .all(|w| w.iter().all(|l| !matches!(l, Letter::Chord(c) if heights[*c] >= cutoff)))
        })
    }

    pub fn check_link_grading(&self) -> CheckReport {
        let mut failures = Vec::new();
        if let Some(lg) = &self.link_grading {
            for (a, d) in self.differential.iter().enumerate() {
                let (o, u) = lg.chord[a];
                for w in d.words() {
                    if w.is_empty() {
                        if o != u {
                            failures.push(CheckFailure {
                                generator: self.chords[a].label.clone(),
                                detail: "constant term on an off-diagonal chord".into(),
                            });
                        }
                        continue;
                    }
                    let composable = w.windows(2).all(|p| lg.ends(p[1]).0 == lg.ends(p[0]).1);
                    let ends = lg.ends(w[0]).0 == o && lg.ends(*w.last().expect("nonempty")).1 == u;
                    if !(composable && ends) {
                        failures.push(CheckFailure {
                            generator: self.chords[a].label.clone(),
                            detail: format!("word `{}` is not composable", self.format_word(w)),
                        });
                    }
                }
            }
        }
        CheckReport { check: "link_grading".into(), checked: self.chords.len(), failures }
    }

    pub fn validate(&self) -> Result<(), DgaError> {
        for r in [self.check_degree(), self.check_d_squared(), self.check_link_grading()] {
            if let Some(f) = r.failures.first() {
                return Err(DgaError::Invalid(format!("{} at `{}`: {}", r.check, f.generator, f.detail)));
            }
        }
        Ok(())
    }

    pub fn letter_label(&self, l: Letter) -> String {
        match l {
            Letter::Chord(i) => self.chords[i].label.clone(),
            Letter::T(i) => self.base_points[i].clone(),
            Letter::TInv(i) => format!("{}^-1", self.base_points[i]),
        }
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            "1".to_string()
        } else {
            w.iter().map(|&l| self.letter_label(l)).collect::<Vec<_>>().join(" ")
        }
    }

    pub fn format_element(&self, e: &AlgElement) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        e.sorted_words().into_iter().map(|w| self.format_word(w)).collect::<Vec<_>>().join(" + ")
    }

    /// Parses a word written as space-separated generator labels, `1` for
    /// the empty word.
    pub fn parse_word(&self, s: &str) -> Option<Word> {
        let s = s.trim();
        if s == "1" {
            return Some(Word::new());
        }
        let mut w = Word::new();
        for tok in s.split_whitespace() {
            let (name, inv) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (tok, false),
            };
            let l = if let Some(c) = self.chord_index(name) {
                if inv {
                    return None;
                }
                Letter::Chord(c)
            } else {
                let b = self.base_points.iter().position(|b| b == name)?;
                if inv {
                    Letter::TInv(b)
                } else {
                    Letter::T(b)
                }
            };
            push_reduced(&mut w, l);
        }
        Some(w)
    }

    pub fn parse_element(&self, s: &str) -> Option<AlgElement> {
        let mut e = AlgElement::zero();
        if s.trim() == "0" {
            return Some(e);
        }
        for part in s.split('+') {
            e.add_word(self.parse_word(part)?);
        }
        Some(e)
    }

    /// Parses the DGA text format and re-validates every invariant.
    pub fn parse(text: &str) -> Result<Self, DgaError> {
        #[derive(PartialEq)]
        enum Sec {
            None,
            Gens,
            Diff,
            Links,
        }
        let mut sec = Sec::None;
        let mut dga = CeDga {
            rotation: 0,
            chords: Vec::new(),
            base_points: Vec::new(),
            differential: Vec::new(),
            link_grading: None,
        };
        let mut raw_diff: Vec<(usize, String, String)> = Vec::new();
        let mut raw_links: Vec<(usize, String, usize, usize)> = Vec::new();
        let mut seen = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix("rotation:") {
                dga.rotation = rest.trim().parse().map_err(|_| perr(line, "bad rotation"))?;
                sec = Sec::None;
                continue;
            }
            match body {
                "generators:" => {
                    sec = Sec::Gens;
                    continue;
                }
                "diff:" => {
                    sec = Sec::Diff;
                    continue;
                }
                "links:" => {
                    sec = Sec::Links;
                    continue;
                }
                _ => {}
            }
            match sec {
                Sec::Gens => {
                    let tok: Vec<&str> = body.split_whitespace().collect();
                    let [label, grade, kind] = tok.as_slice() else {
                        return Err(perr(line, "expected `label grade kind`"));
                    };
                    let grading: i64 = grade.parse().map_err(|_| perr(line, format!("bad grading `{grade}`")))?;
                    if label.contains('^') || *label == "1" {
                        return Err(perr(line, format!("reserved label `{label}`")));
                    }
                    if seen.insert(label.to_string(), line).is_some() {
                        return Err(perr(line, format!("repeated generator `{label}`")));
                    }
                    match *kind {
                        "chord" => dga.chords.push(Generator {
                            label: label.to_string(),
                            kind: GeneratorKind::Chord,
                            grading: reduce_grade(grading, dga.rotation),
                        }),
                        "basepoint" => {
                            if grading != 0 {
                                return Err(perr(line, format!("base point `{label}` must have grading 0")));
                            }
                            dga.base_points.push(label.to_string());
                        }
                        k => return Err(perr(line, format!("unknown generator kind `{k}`"))),
                    }
                }
                Sec::Diff => {
                    let (lhs, rhs) = body.split_once('=').ok_or_else(|| perr(line, "expected `a = word + ...`"))?;
                    raw_diff.push((line, lhs.trim().to_string(), rhs.trim().to_string()));
                }
                Sec::Links => {
                    let tok: Vec<&str> = body.split_whitespace().collect();
                    let [label, o, u] = tok.as_slice() else {
                        return Err(perr(line, "expected `generator o u`"));
                    };
                    let o = o.parse().map_err(|_| perr(line, "bad component index"))?;
                    let u = u.parse().map_err(|_| perr(line, "bad component index"))?;
                    raw_links.push((line, label.to_string(), o, u));
                }
                Sec::None => return Err(perr(line, "data outside of a section")),
            }
        }
        dga.differential = vec![AlgElement::zero(); dga.chords.len()];
        let mut defined = vec![false; dga.chords.len()];
        for (line, lhs, rhs) in raw_diff {
            let a = dga.chord_index(&lhs).ok_or_else(|| perr(line, format!("unknown chord `{lhs}`")))?;
            if defined[a] {
                return Err(perr(line, format!("differential of `{lhs}` given twice")));
            }
            defined[a] = true;
            dga.differential[a] =
                dga.parse_element(&rhs).ok_or_else(|| perr(line, format!("cannot parse `{rhs}`")))?;
        }
        if !raw_links.is_empty() {
            let mut lg = LinkGrading { chord: vec![(0, 0); dga.chords.len()], base: vec![0; dga.base_points.len()] };
            for (line, label, o, u) in raw_links {
                if let Some(c) = dga.chord_index(&label) {
                    lg.chord[c] = (o, u);
                } else if let Some(b) = dga.base_points.iter().position(|x| *x == label) {
                    if o != u {
                        return Err(perr(line, format!("base point `{label}` must be diagonal")));
                    }
                    lg.base[b] = o;
                } else {
                    return Err(perr(line, format!("unknown generator `{label}`")));
                }
            }
            dga.link_grading = Some(lg);
        }
        dga.validate()?;
        Ok(dga)
    }

    /// Deterministic text form with sorted words.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rotation: {}", self.rotation);
        s.push_str("generators:\n");
        for g in &self.chords {
            let _ = writeln!(s, "  {} {} chord", g.label, g.grading);
        }
        for b in &self.base_points {
            let _ = writeln!(s, "  {b} 0 basepoint");
        }
        s.push_str("diff:\n");
        for (g, d) in self.chords.iter().zip(&self.differential) {
            if !d.is_zero() {
                let _ = writeln!(s, "  {} = {}", g.label, self.format_element(d));
            }
        }
        if let Some(lg) = &self.link_grading {
            s.push_str("links:\n");
            for (g, (o, u)) in self.chords.iter().zip(&lg.chord) {
                let _ = writeln!(s, "  {} {o} {u}", g.label);
            }
            for (b, c) in self.base_points.iter().zip(&lg.base) {
                let _ = writeln!(s, "  {b} {c} {c}");
            }
        }
        s
    }

    /// Differential table keyed by chord label, for reports.
    pub fn table(&self) -> BTreeMap<String, String> {
        self.chords
            .iter()
            .zip(&self.differential)
            .map(|(g, d)| (g.label.clone(), self.format_element(d)))
            .collect()
    }
}

/// Converts a disk boundary word into an algebra word; positive corners
/// other than the start do not occur in one-positive disks.
pub fn word_from_boundary(letters: &[BoundaryLetter]) -> Word {
    let mut w = Word::new();
    for l in letters {
        let x = match *l {
            BoundaryLetter::Corner(c) => Letter::Chord(c.crossing),
            BoundaryLetter::Base { index, with_orientation: true } => Letter::T(index),
            BoundaryLetter::Base { index, with_orientation: false } => Letter::TInv(index),
        };
        push_reduced(&mut w, x);
    }
    w
}
