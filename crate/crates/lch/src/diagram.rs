//! Lagrangian projections as oriented 4-valent planar maps, and the search
//! for immersed polygons with convex corners that defines the DGA
//! differential and the duality map.
//!
//! Each crossing lists its four incident edge ends counterclockwise, starting
//! at the incoming under-strand (slot 0). The under strand leaves at slot 2;
//! the over strand occupies slots 1 and 3. Quadrant `q` lies between slots
//! `q` and `q + 1`; the odd quadrants are the positive (Reeb-sign `+`) ones.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use num_rational::Rational64;
use thiserror::Error;

/// One end of an edge at a crossing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slot {
    pub crossing: usize,
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub label: String,
    /// Edge index at each slot.
    pub edges: [usize; 4],
    /// Whether the over strand enters at slot 1 (`2>4` in the file format).
    pub over_enters_at_1: bool,
}

impl Crossing {
    /// Whether the edge end at `slot` is the head of its edge.
    pub fn incoming(&self, slot: usize) -> bool {
        match slot % 4 {
            0 => true,
            2 => false,
            1 => self.over_enters_at_1,
            _ => !self.over_enters_at_1,
        }
    }

    pub fn over_in_slot(&self) -> usize {
        if self.over_enters_at_1 {
            1
        } else {
            3
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub label: String,
    pub tail: Slot,
    pub head: Slot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasePoint {
    pub edge: usize,
    pub offset: Rational64,
    pub label: String,
}

/// A traversal of an edge: `forward` follows the knot orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart {
    pub edge: usize,
    pub forward: bool,
}

impl Dart {
    fn index(self) -> usize {
        2 * self.edge + usize::from(!self.forward)
    }

    fn reversed(self) -> Dart {
        Dart { edge: self.edge, forward: !self.forward }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagrangianDiagram {
    pub rotation: i64,
    pub crossings: Vec<Crossing>,
    pub edges: Vec<Edge>,
    pub base_points: Vec<BasePoint>,
    /// Maslov potential per edge.
    pub potential: Vec<i64>,
    /// Explicit gradings that replace the potential formula.
    pub overrides: BTreeMap<usize, i64>,
    /// Face whose complement is bounded.
    pub outer_face: usize,
    /// Area per face, when supplied (the outer face has none).
    pub areas: Option<Vec<Rational64>>,
    /// Faces as dart cycles; the disk bounded by a cycle lies to its left.
    pub faces: Vec<Vec<Dart>>,
    face_of: Vec<usize>,
    /// Component index per edge.
    pub component_of: Vec<usize>,
    pub components: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge `{0}` is used more than twice or twice with the same direction")]
    RepeatedEdge(String),
    #[error("edge `{0}` has a dangling end")]
    DanglingEdge(String),
    #[error("the rotation system is not planar (V - E + F = {0}, expected 2)")]
    NotPlanar(i64),
    #[error("the diagram is not connected")]
    Disconnected,
    #[error("component containing edge `{0}` carries no base point")]
    MissingBasePoint(String),
    #[error("unknown face `{0}`")]
    UnknownFace(String),
    #[error("face `{0}` needs a positive area")]
    BadArea(String),
    #[error("missing area for face `{0}`")]
    MissingArea(String),
    #[error("areas do not close up the component containing edge `{0}`")]
    AreasDoNotClose(String),
}

fn perr(line: usize, message: impl Into<String>) -> DiagramError {
    DiagramError::Parse { line, message: message.into() }
}

fn parse_rational(s: &str) -> Option<Rational64> {
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        (d != 0).then(|| Rational64::new(n, d))
    } else {
        s.trim().parse::<i64>().ok().map(Rational64::from_integer)
    }
}

fn fmt_rational(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum Section {
    None,
    Crossings,
    BasePoints,
    Maslov,
    Areas,
}

impl LagrangianDiagram {
    /// Parses the line-oriented diagram format and validates the result.
    pub fn parse(text: &str) -> Result<Self, DiagramError> {
        let mut rotation = 0;
        let mut section = Section::None;
        let mut edge_ix: HashMap<String, usize> = HashMap::new();
        let mut edge_labels: Vec<String> = Vec::new();
        let mut crossings = Vec::new();
        let mut raw_bp = Vec::new();
        let mut raw_mu = Vec::new();
        let mut raw_over = Vec::new();
        let mut raw_outer = None;
        let mut raw_areas = Vec::new();
        let mut labels_seen = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some((key, rest)) = body.split_once(':') {
                let rest = rest.trim();
                match key.trim() {
                    "rotation" => {
                        rotation = rest.parse().map_err(|_| perr(line, format!("bad rotation `{rest}`")))?;
                        section = Section::None;
                        continue;
                    }
                    "crossings" => section = Section::Crossings,
                    "basepoints" => section = Section::BasePoints,
                    "maslov" => section = Section::Maslov,
                    "areas" => section = Section::Areas,
                    "outer" => {
                        raw_outer = Some((line, rest.to_string()));
                        section = Section::None;
                        continue;
                    }
                    other => return Err(perr(line, format!("unknown section `{other}`"))),
                }
                if !rest.is_empty() {
                    return Err(perr(line, "section header takes no inline data"));
                }
                continue;
            }
            let tok: Vec<&str> = body.split_whitespace().collect();
            match section {
                Section::Crossings => {
                    if tok.len() != 7 || tok[5] != "over" {
                        return Err(perr(line, "expected `label e0 e1 e2 e3 over 2>4|4>2`"));
                    }
                    let over_enters_at_1 = match tok[6] {
                        "2>4" => true,
                        "4>2" => false,
                        f => return Err(perr(line, format!("bad over-strand flag `{f}`"))),
                    };
                    if labels_seen.insert(tok[0].to_string(), line).is_some() {
                        return Err(perr(line, format!("repeated crossing label `{}`", tok[0])));
                    }
                    let mut edges = [0; 4];
                    for k in 0..4 {
                        let next = edge_labels.len();
                        let e = *edge_ix.entry(tok[1 + k].to_string()).or_insert(next);
                        if e == next {
                            edge_labels.push(tok[1 + k].to_string());
                        }
                        edges[k] = e;
                    }
                    crossings.push(Crossing { label: tok[0].to_string(), edges, over_enters_at_1 });
                }
                Section::BasePoints => {
                    if tok.len() != 3 {
                        return Err(perr(line, "expected `edge offset label`"));
                    }
                    let off = parse_rational(tok[1]).ok_or_else(|| perr(line, format!("bad offset `{}`", tok[1])))?;
                    if off <= Rational64::from_integer(0) || off >= Rational64::from_integer(1) {
                        return Err(perr(line, "base-point offset must lie strictly between 0 and 1"));
                    }
                    raw_bp.push((line, tok[0].to_string(), off, tok[2].to_string()));
                }
                Section::Maslov => {
                    let (lhs, rhs) = body.split_once('=').ok_or_else(|| perr(line, "expected `edge = int`"))?;
                    let v: i64 = rhs.trim().parse().map_err(|_| perr(line, format!("bad integer `{}`", rhs.trim())))?;
                    let lhs: Vec<&str> = lhs.split_whitespace().collect();
                    match lhs.as_slice() {
                        ["override", c] => raw_over.push((line, c.to_string(), v)),
                        [e] => raw_mu.push((line, e.to_string(), v)),
                        _ => return Err(perr(line, "expected `edge = int` or `override crossing = int`")),
                    }
                }
                Section::Areas => {
                    let (lhs, rhs) = body.split_once('=').ok_or_else(|| perr(line, "expected `face = rational`"))?;
                    let a = parse_rational(rhs).ok_or_else(|| perr(line, format!("bad area `{}`", rhs.trim())))?;
                    raw_areas.push((line, lhs.trim().to_string(), a));
                }
                Section::None => return Err(perr(line, "data outside of a section")),
            }
        }
        if crossings.is_empty() {
            return Err(perr(0, "no crossings"));
        }
        let edge_of = |line: usize, name: &str| {
            edge_ix.get(name).copied().ok_or_else(|| perr(line, format!("unknown edge `{name}`")))
        };
        let mut base_points = Vec::new();
        for (line, e, offset, label) in raw_bp {
            base_points.push(BasePoint { edge: edge_of(line, &e)?, offset, label });
        }
        let mut potential = vec![0; edge_labels.len()];
        for (line, e, v) in raw_mu {
            potential[edge_of(line, &e)?] = v;
        }
        let mut overrides = BTreeMap::new();
        for (line, c, v) in raw_over {
            let ix = crossings
                .iter()
                .position(|x: &Crossing| x.label == c)
                .ok_or_else(|| perr(line, format!("unknown crossing `{c}`")))?;
            overrides.insert(ix, v);
        }
        let mut d = Self::assemble(rotation, crossings, edge_labels, base_points, potential, overrides)?;
        let face_by_name = |d: &Self, line: usize, name: &str| -> Result<usize, DiagramError> {
            let (e, sign) = name.split_at(name.len().saturating_sub(1));
            let forward = match sign {
                "+" => true,
                "-" => false,
                _ => return Err(perr(line, format!("face name `{name}` must end in + or -"))),
            };
            let edge = edge_of(line, e).map_err(|_| DiagramError::UnknownFace(name.to_string()))?;
            Ok(d.face_of[Dart { edge, forward }.index()])
        };
        let (oline, oname) = raw_outer.ok_or_else(|| perr(0, "missing `outer:` face"))?;
        d.outer_face = face_by_name(&d, oline, &oname)?;
        if !raw_areas.is_empty() {
            let mut areas = vec![Rational64::from_integer(0); d.faces.len()];
            let mut given = vec![false; d.faces.len()];
            for (line, name, a) in raw_areas {
                let f = face_by_name(&d, line, &name)?;
                if a <= Rational64::from_integer(0) || f == d.outer_face {
                    return Err(DiagramError::BadArea(name));
                }
                areas[f] = a;
                given[f] = true;
            }
            if let Some(f) = (0..d.faces.len()).find(|&f| f != d.outer_face && !given[f]) {
                return Err(DiagramError::MissingArea(d.face_name(f)));
            }
            d.areas = Some(areas);
            d.check_area_closure()?;
        }
        Ok(d)
    }

    /// Builds the combinatorial data from crossings alone; the outer face
    /// defaults to face 0 until set.
    pub fn assemble(
        rotation: i64,
        crossings: Vec<Crossing>,
        edge_labels: Vec<String>,
        base_points: Vec<BasePoint>,
        potential: Vec<i64>,
        overrides: BTreeMap<usize, i64>,
    ) -> Result<Self, DiagramError> {
        let ne = edge_labels.len();
        let mut tails: Vec<Option<Slot>> = vec![None; ne];
        let mut heads: Vec<Option<Slot>> = vec![None; ne];
        for (c, x) in crossings.iter().enumerate() {
            for s in 0..4 {
                let e = x.edges[s];
                let place = if x.incoming(s) { &mut heads[e] } else { &mut tails[e] };
                if place.is_some() {
                    return Err(DiagramError::RepeatedEdge(edge_labels[e].clone()));
                }
                *place = Some(Slot { crossing: c, slot: s });
            }
        }
        let mut edges = Vec::with_capacity(ne);
        for e in 0..ne {
            match (tails[e], heads[e]) {
                (Some(tail), Some(head)) => edges.push(Edge { label: edge_labels[e].clone(), tail, head }),
                _ => return Err(DiagramError::DanglingEdge(edge_labels[e].clone())),
            }
        }
        let mut d = LagrangianDiagram {
            rotation,
            crossings,
            edges,
            base_points,
            potential,
            overrides,
            outer_face: 0,
            areas: None,
            faces: Vec::new(),
            face_of: Vec::new(),
            component_of: Vec::new(),
            components: 0,
        };
        d.trace_faces();
        d.trace_components();
        let v = d.crossings.len() as i64;
        let chi = v - ne as i64 + d.faces.len() as i64;
        if !d.connected() {
            return Err(DiagramError::Disconnected);
        }
        if chi != 2 {
            return Err(DiagramError::NotPlanar(chi));
        }
        for comp in 0..d.components {
            if !d.base_points.iter().any(|b| d.component_of[b.edge] == comp) {
                let e = (0..ne).find(|&e| d.component_of[e] == comp).expect("component has an edge");
                return Err(DiagramError::MissingBasePoint(d.edges[e].label.clone()));
            }
        }
        Ok(d)
    }

    pub fn edge_index(&self, label: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.label == label)
    }

    pub fn crossing_index(&self, label: &str) -> Option<usize> {
        self.crossings.iter().position(|c| c.label == label)
    }

    /// The dart leaving crossing `c` through `slot`.
    pub fn leave(&self, c: usize, slot: usize) -> Dart {
        let x = &self.crossings[c];
        Dart { edge: x.edges[slot % 4], forward: !x.incoming(slot % 4) }
    }

    /// Where a dart ends.
    pub fn arrive(&self, d: Dart) -> Slot {
        let e = &self.edges[d.edge];
        if d.forward {
            e.head
        } else {
            e.tail
        }
    }

    fn start_of(&self, d: Dart) -> Slot {
        self.arrive(d.reversed())
    }

    fn trace_faces(&mut self) {
        let nd = 2 * self.edges.len();
        let mut face_of = vec![usize::MAX; nd];
        let mut faces = Vec::new();
        for start in 0..nd {
            if face_of[start] != usize::MAX {
                continue;
            }
            let f = faces.len();
            let mut cyc = Vec::new();
            let mut x = Dart { edge: start / 2, forward: start % 2 == 0 };
            while face_of[x.index()] == usize::MAX {
                face_of[x.index()] = f;
                cyc.push(x);
                let s = self.arrive(x);
                x = self.leave(s.crossing, s.slot + 3);
            }
            faces.push(cyc);
        }
        self.faces = faces;
        self.face_of = face_of;
    }

    fn trace_components(&mut self) {
        let ne = self.edges.len();
        let mut comp = vec![usize::MAX; ne];
        let mut k = 0;
        for start in 0..ne {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut e = start;
            while comp[e] == usize::MAX {
                comp[e] = k;
                let h = self.edges[e].head;
                e = self.crossings[h.crossing].edges[(h.slot + 2) % 4];
            }
            k += 1;
        }
        self.component_of = comp;
        self.components = k;
    }

    fn connected(&self) -> bool {
        let n = self.crossings.len();
        let mut seen = vec![false; n];
        let mut q = VecDeque::from([0]);
        seen[0] = true;
        while let Some(c) = q.pop_front() {
            for &e in &self.crossings[c].edges {
                for s in [self.edges[e].head, self.edges[e].tail] {
                    if !seen[s.crossing] {
                        seen[s.crossing] = true;
                        q.push_back(s.crossing);
                    }
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// Face to the left of a dart.
    pub fn face_left_of(&self, d: Dart) -> usize {
        self.face_of[d.index()]
    }

    /// Canonical face name: the smallest dart on its boundary.
    pub fn face_name(&self, f: usize) -> String {
        let d = *self.faces[f].iter().min().expect("faces are nonempty");
        format!("{}{}", self.edges[d.edge].label, if d.forward { '+' } else { '-' })
    }

    /// Face occupying quadrant `q` of crossing `c`.
    pub fn quadrant_face(&self, c: usize, q: usize) -> usize {
        let x = &self.crossings[c];
        let s = (q + 1) % 4;
        let into = Dart { edge: x.edges[s], forward: x.incoming(s) };
        self.face_left_of(into)
    }

    pub fn quadrant_positive(q: usize) -> bool {
        q % 2 == 1
    }

    /// Winding number of a closed dart sequence around every face.
    pub fn winding(&self, darts: &[Dart]) -> Vec<i64> {
        let mut cnt = vec![0i64; 2 * self.edges.len()];
        for d in darts {
            cnt[d.index()] += 1;
        }
        let (w, _) = self.face_weights(&cnt);
        w
    }

    /// Face multiplicities from dart counts, propagated from the outer face;
    /// the flag reports whether propagation was consistent.
    fn face_weights(&self, cnt: &[i64]) -> (Vec<i64>, bool) {
        let nf = self.faces.len();
        let mut n: Vec<Option<i64>> = vec![None; nf];
        n[self.outer_face] = Some(0);
        let mut q = VecDeque::from([self.outer_face]);
        let mut ok = true;
        while let Some(f) = q.pop_front() {
            let nf_ = n[f].expect("visited");
            for &x in &self.faces[f] {
                let y = x.reversed();
                let g = self.face_left_of(y);
                let val = nf_ + cnt[y.index()] - cnt[x.index()];
                match n[g] {
                    None => {
                        n[g] = Some(val);
                        q.push_back(g);
                    }
                    Some(v) if v != val => ok = false,
                    _ => {}
                }
            }
        }
        (n.into_iter().map(|v| v.unwrap_or(0)).collect(), ok)
    }

    /// Strand loop at `c`: leave along the under strand and follow the knot
    /// until returning to `c` on the over strand.
    fn chord_loop(&self, c: usize) -> Option<Vec<Dart>> {
        let mut d = self.leave(c, 2);
        let mut out = Vec::new();
        for _ in 0..=self.edges.len() {
            out.push(d);
            let s = self.arrive(d);
            if s.crossing == c && s.slot % 2 == 1 {
                return Some(out);
            }
            if s.crossing == c && s.slot == 0 {
                return None;
            }
            d = self.leave(s.crossing, s.slot + 2);
        }
        None
    }

    /// Reeb chord lengths derived from the face areas, when the two strands
    /// of the crossing lie on one component.
    pub fn heights(&self) -> Option<Vec<Option<Rational64>>> {
        let areas = self.areas.as_ref()?;
        Some(
            (0..self.crossings.len())
                .map(|c| {
                    let lp = self.chord_loop(c)?;
                    let w = self.winding(&lp);
                    let s: Rational64 = w.iter().zip(areas).map(|(&k, &a)| a * k).sum();
                    Some(-s)
                })
                .collect(),
        )
    }

    fn check_area_closure(&self) -> Result<(), DiagramError> {
        let areas = self.areas.as_ref().expect("areas present");
        for comp in 0..self.components {
            let darts: Vec<Dart> = (0..self.edges.len())
                .filter(|&e| self.component_of[e] == comp)
                .map(|edge| Dart { edge, forward: true })
                .collect();
            let w = self.winding(&darts);
            let s: Rational64 = w.iter().zip(areas).map(|(&k, &a)| a * k).sum();
            if s != Rational64::from_integer(0) {
                return Err(DiagramError::AreasDoNotClose(self.edges[darts[0].edge].label.clone()));
            }
        }
        Ok(())
    }

    /// Grading of each crossing: override, or potential of the incoming
    /// over edge minus potential of the incoming under edge.
    pub fn chord_gradings(&self) -> Vec<i64> {
        (0..self.crossings.len())
            .map(|c| {
                let g = self.overrides.get(&c).copied().unwrap_or_else(|| {
                    let x = &self.crossings[c];
                    self.potential[x.edges[x.over_in_slot()]] - self.potential[x.edges[0]]
                });
                crate::f2linalg::reduce_grade(g, self.rotation)
            })
            .collect()
    }

    /// Serializes to the text format; `parse` of the result is a fixpoint.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rotation: {}", self.rotation);
        s.push_str("crossings:\n");
        for x in &self.crossings {
            let es: Vec<&str> = x.edges.iter().map(|&e| self.edges[e].label.as_str()).collect();
            let flag = if x.over_enters_at_1 { "2>4" } else { "4>2" };
            let _ = writeln!(s, "  {} {} over {flag}", x.label, es.join(" "));
        }
        s.push_str("basepoints:\n");
        for b in &self.base_points {
            let _ = writeln!(s, "  {} {} {}", self.edges[b.edge].label, fmt_rational(b.offset), b.label);
        }
        let nonzero: Vec<usize> = (0..self.edges.len()).filter(|&e| self.potential[e] != 0).collect();
        if !nonzero.is_empty() || !self.overrides.is_empty() {
            s.push_str("maslov:\n");
            for e in nonzero {
                let _ = writeln!(s, "  {} = {}", self.edges[e].label, self.potential[e]);
            }
            for (&c, &g) in &self.overrides {
                let _ = writeln!(s, "  override {} = {g}", self.crossings[c].label);
            }
        }
        let _ = writeln!(s, "outer: {}", self.face_name(self.outer_face));
        if let Some(areas) = &self.areas {
            s.push_str("areas:\n");
            let mut fs: Vec<usize> = (0..self.faces.len()).filter(|&f| f != self.outer_face).collect();
            fs.sort_by_key(|&f| *self.faces[f].iter().min().expect("nonempty"));
            for f in fs {
                let _ = writeln!(s, "  {} = {}", self.face_name(f), fmt_rational(areas[f]));
            }
        }
        s
    }
}

/// A corner of an immersed polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Corner {
    pub crossing: usize,
    pub quadrant: usize,
    pub positive: bool,
}

/// A letter of a boundary word read counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryLetter {
    Corner(Corner),
    /// Base point `index`; `with_orientation` is false for `t⁻¹`.
    Base { index: usize, with_orientation: bool },
}

/// An immersed disk, starting just after its first positive corner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiskBoundary {
    pub start: Corner,
    pub darts: Vec<Dart>,
    /// Corners and base-point passages after `start`, in boundary order.
    pub word: Vec<BoundaryLetter>,
    pub multiplicity: Vec<i64>,
}

impl DiskBoundary {
    pub fn corners(&self) -> Vec<Corner> {
        std::iter::once(self.start)
            .chain(self.word.iter().filter_map(|l| match l {
                BoundaryLetter::Corner(c) => Some(*c),
                _ => None,
            }))
            .collect()
    }

    pub fn positive_corners(&self) -> Vec<Corner> {
        self.corners().into_iter().filter(|c| c.positive).collect()
    }

    pub fn area(&self, areas: &[Rational64]) -> Rational64 {
        self.multiplicity.iter().zip(areas).map(|(&n, &a)| a * n).sum()
    }
}

/// Which positive corners a disk must have.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiskPattern {
    OnePositiveAt(usize),
    /// Start at the first crossing; the second positive corner is anywhere
    /// or at the given crossing.
    TwoPositiveAt(usize, Option<usize>),
}

/// Result of a disk search: the disks, and how often the per-edge
/// traversal cap cut the search short.
#[derive(Clone, Debug)]
pub struct DiskSearch {
    pub disks: Vec<DiskBoundary>,
    pub cap_hits: usize,
}

impl DiskSearch {
    pub fn complete(&self) -> bool {
        self.cap_hits == 0
    }
}

pub const DEFAULT_REGION_CAP: usize = 8;

struct Search<'a> {
    d: &'a LagrangianDiagram,
    start_c: usize,
    end_slot: usize,
    partner: Option<usize>,
    cap: usize,
    heights: Option<Vec<Option<Rational64>>>,
    budget: Option<Rational64>,
    max_height: Rational64,
    uses: Vec<usize>,
    path: Vec<Dart>,
    corners: Vec<(usize, Corner)>,
    found: Vec<(Vec<Dart>, Vec<(usize, Corner)>)>,
    cap_hits: usize,
}

impl Search<'_> {
    fn rec(&mut self, dart: Dart, pos_left: usize, spent: Rational64) {
        let d = self.d;
        if d.face_left_of(dart) == d.outer_face {
            return;
        }
        if self.uses[dart.index()] >= self.cap {
            self.cap_hits += 1;
            return;
        }
        if let Some(b) = self.budget {
            let extra = if pos_left > 0 { self.max_height } else { Rational64::from_integer(0) };
            if spent >= b + extra {
                return;
            }
        }
        self.uses[dart.index()] += 1;
        self.path.push(dart);
        let s = d.arrive(dart);
        let closing = s.crossing == self.start_c && s.slot == self.end_slot;
        if closing && pos_left == 0 {
            self.found.push((self.path.clone(), self.corners.clone()));
        }
        self.rec(d.leave(s.crossing, s.slot + 2), pos_left, spent);
        let q = (s.slot + 3) % 4;
        let corner = Corner { crossing: s.crossing, quadrant: q, positive: LagrangianDiagram::quadrant_positive(q) };
        let step = self.path.len();
        if corner.positive {
            let allowed = self.partner.is_none_or(|p| p == s.crossing);
            if pos_left > 0 && allowed && !closing {
                let h = self.height(s.crossing);
                self.corners.push((step, corner));
                self.rec(d.leave(s.crossing, q), pos_left - 1, spent - h);
                self.corners.pop();
            }
        } else {
            let h = self.height(s.crossing);
            self.corners.push((step, corner));
            self.rec(d.leave(s.crossing, q), pos_left, spent + h);
            self.corners.pop();
        }
        self.path.pop();
        self.uses[dart.index()] -= 1;
    }

    fn height(&self, c: usize) -> Rational64 {
        self.heights.as_ref().and_then(|h| h[c]).unwrap_or_default()
    }
}

impl LagrangianDiagram {
    /// All immersed disks with convex corners matching `pattern`, each
    /// validated as an immersion. `region_cap` bounds how often the boundary
    /// may traverse any edge in one direction.
    pub fn enumerate_disks(&self, pattern: DiskPattern, region_cap: usize) -> DiskSearch {
        let (a, npos, partner) = match pattern {
            DiskPattern::OnePositiveAt(a) => (a, 1, None),
            DiskPattern::TwoPositiveAt(a, p) => (a, 2, p),
        };
        let heights = self.heights().filter(|h| h.iter().all(Option::is_some));
        let budget = heights.as_ref().and_then(|h| h[a]);
        let max_height = heights.as_ref().map_or(Rational64::from_integer(0), |h| {
            h.iter().filter_map(|x| *x).max().unwrap_or_default()
        });
        let mut search = Search {
            d: self,
            start_c: a,
            end_slot: 0,
            partner,
            cap: region_cap,
            heights,
            budget,
            max_height,
            uses: vec![0; 2 * self.edges.len()],
            path: Vec::new(),
            corners: Vec::new(),
            found: Vec::new(),
            cap_hits: 0,
        };
        let mut disks = Vec::new();
        for q in (0..4).filter(|&q| Self::quadrant_positive(q)) {
            search.end_slot = (q + 1) % 4;
            search.found.clear();
            search.rec(self.leave(a, q), npos - 1, Rational64::from_integer(0));
            let start = Corner { crossing: a, quadrant: q, positive: true };
            for (path, corners) in std::mem::take(&mut search.found) {
                if let Some(mult) = self.validate_immersion(&path, start) {
                    let word = self.boundary_word(&path, &corners);
                    disks.push(DiskBoundary { start, darts: path, word, multiplicity: mult });
                }
            }
        }
        DiskSearch { disks, cap_hits: search.cap_hits }
    }

    /// Boundary letters after the starting corner: base-point passages on each
    /// dart and the corners between darts.
    fn boundary_word(&self, path: &[Dart], corners: &[(usize, Corner)]) -> Vec<BoundaryLetter> {
        let mut out = Vec::new();
        let mut ci = 0;
        for (i, &x) in path.iter().enumerate() {
            let mut bps: Vec<(Rational64, usize)> = self
                .base_points
                .iter()
                .enumerate()
                .filter(|(_, b)| b.edge == x.edge)
                .map(|(k, b)| (b.offset, k))
                .collect();
            bps.sort();
            if !x.forward {
                bps.reverse();
            }
            out.extend(bps.into_iter().map(|(_, index)| BoundaryLetter::Base { index, with_orientation: x.forward }));
            while ci < corners.len() && corners[ci].0 == i + 1 {
                if i + 1 < path.len() {
                    out.push(BoundaryLetter::Corner(corners[ci].1));
                }
                ci += 1;
            }
        }
        out
    }

    /// Independent immersion check: face multiplicities must be consistent
    /// and nonnegative, every edge and crossing must be covered as an
    /// immersed polygon would cover it, and the Euler characteristic must be 1.
    /// Returns the face multiplicities.
    pub fn validate_immersion(&self, path: &[Dart], start: Corner) -> Option<Vec<i64>> {
        let mut cnt = vec![0i64; 2 * self.edges.len()];
        for d in path {
            cnt[d.index()] += 1;
        }
        let (n, ok) = self.face_weights(&cnt);
        if !ok || n.iter().any(|&v| v < 0) {
            return None;
        }
        let mut e_count = 0;
        for e in 0..self.edges.len() {
            let f = Dart { edge: e, forward: true };
            let b = f.reversed();
            let l = n[self.face_left_of(f)];
            let r = n[self.face_left_of(b)];
            if l - cnt[f.index()] != r - cnt[b.index()] || l - cnt[f.index()] < 0 {
                return None;
            }
            e_count += l + cnt[b.index()];
        }
        let nc = self.crossings.len();
        let mut cover = vec![[0i64; 4]; nc];
        let mut passes = vec![0i64; nc];
        for i in 0..path.len() {
            let s = self.arrive(path[i]);
            let next = path[(i + 1) % path.len()];
            let t = self.start_of(next);
            if t.crossing != s.crossing {
                return None;
            }
            passes[s.crossing] += 1;
            if t.slot == (s.slot + 2) % 4 {
                cover[s.crossing][(s.slot + 2) % 4] += 1;
                cover[s.crossing][(s.slot + 3) % 4] += 1;
            } else if t.slot == (s.slot + 3) % 4 {
                cover[s.crossing][(s.slot + 3) % 4] += 1;
            } else {
                return None;
            }
        }
        let _ = start;
        let mut v_count = 0;
        for c in 0..nc {
            let inner: Vec<i64> = (0..4).map(|q| n[self.quadrant_face(c, q)] - cover[c][q]).collect();
            if inner.iter().any(|&k| k != inner[0]) || inner[0] < 0 {
                return None;
            }
            v_count += inner[0] + passes[c];
        }
        let f_count: i64 = (0..self.faces.len()).filter(|&f| f != self.outer_face).map(|f| n[f]).sum();
        (v_count - e_count + f_count == 1).then_some(n)
    }
}
