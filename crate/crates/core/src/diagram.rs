//! Planar knot diagrams: PD / signed Gauss parsing, orientation, faces,
//! traversal labeling, loops and winding numbers.
//!
//! PD tuples list the four arc labels counterclockwise starting at the
//! incoming under-strand. Position 2 is therefore the outgoing under-strand;
//! the crossing is positive when position 1 is the outgoing over-strand.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use regex::Regex;
use serde::Serialize;

use crate::error::{Error, Result};

/// Dart: a (crossing, position) slot.
pub type Slot = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub id: usize,
    pub sign: i8,
    /// Edge indices at positions 0..3 (counterclockwise from incoming under).
    pub slots: [usize; 4],
    pub incoming_over: usize,
    pub outgoing_over: usize,
    pub incoming_under: usize,
    pub outgoing_under: usize,
    pub over_label: usize,
    pub under_label: usize,
}

impl Crossing {
    /// Labels `(j, j')` with `j < j'`.
    pub fn labels(&self) -> (usize, usize) {
        (
            self.over_label.min(self.under_label),
            self.over_label.max(self.under_label),
        )
    }

    /// Whether the smaller label `j` is the overpass.
    pub fn j_is_over(&self) -> bool {
        self.over_label < self.under_label
    }

    /// Ray role at a position.
    pub fn role(&self, pos: usize) -> Role {
        match (self.sign > 0, pos % 4) {
            (_, 0) => Role::Li,
            (_, 2) => Role::Lo,
            (true, 1) | (false, 3) => Role::Uo,
            _ => Role::Ui,
        }
    }

    /// Ray angle (in eighths of a turn) in the upright picture.
    pub fn ray_angle(&self, pos: usize) -> i64 {
        match (self.sign > 0, self.role(pos)) {
            (true, Role::Li) => 7,
            (true, Role::Uo) => 1,
            (true, Role::Lo) => 3,
            (true, Role::Ui) => 5,
            (false, Role::Li) => 5,
            (false, Role::Ui) => 7,
            (false, Role::Lo) => 1,
            (false, Role::Uo) => 3,
        }
    }
}

/// Role of a ray at a crossing: upper/lower strand, in/out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Role {
    Ui,
    Uo,
    Li,
    Lo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Face {
    /// Corners `(crossing, p)`: the sector between rays `p` and `p+1`.
    pub corners: Vec<Slot>,
    /// Boundary edges with `true` when traversed along the knot orientation.
    pub edges: Vec<(usize, bool)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Pass {
    pub crossing: usize,
    pub over: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagram {
    pub crossings: Vec<Crossing>,
    /// Original PD label of each edge.
    pub edge_labels: Vec<i64>,
    pub edge_tail: Vec<Slot>,
    pub edge_head: Vec<Slot>,
    pub faces: Vec<Face>,
    pub outer_face: usize,
    pub left_face: Vec<usize>,
    pub right_face: Vec<usize>,
    /// Passes in traversal order; `passes[l-1]` carries label `l`.
    pub passes: Vec<Pass>,
    /// `arc_edges[l-1]` is the edge `[l, l+1]` (indices mod `2c`).
    pub arc_edges: Vec<usize>,
    /// Whether the base point satisfies the under-then-over rule.
    pub base_valid: bool,
    /// Integer number of full counterclockwise turns of each edge in the
    /// upright picture.
    pub turns: Vec<i64>,
}

impl Diagram {
    pub fn unknot() -> Self {
        Diagram {
            crossings: vec![],
            edge_labels: vec![],
            edge_tail: vec![],
            edge_head: vec![],
            faces: vec![
                Face { corners: vec![], edges: vec![] },
                Face { corners: vec![], edges: vec![] },
            ],
            outer_face: 0,
            left_face: vec![],
            right_face: vec![],
            passes: vec![],
            arc_edges: vec![],
            base_valid: false,
            turns: vec![],
        }
    }

    pub fn num_crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_tail.len()
    }

    pub fn writhe(&self) -> i64 {
        self.crossings.iter().map(|c| c.sign as i64).sum()
    }

    /// Edge carrying arc `[l, l+1]`, `l` in `1..=2c`.
    pub fn arc_edge(&self, l: usize) -> usize {
        self.arc_edges[(l - 1) % self.arc_edges.len()]
    }

    /// Pass carrying label `l`.
    pub fn pass(&self, l: usize) -> Pass {
        self.passes[(l - 1) % self.passes.len()]
    }

    /// Fails unless the base point obeys the labeling rule.
    pub fn require_base(&self) -> Result<()> {
        if self.crossings.is_empty() || !self.base_valid {
            return Err(Error::NoBasePoint);
        }
        Ok(())
    }

    /// Chooses a different outer face; recomputes rotation data.
    pub fn with_outer_face(&self, f: usize) -> Result<Diagram> {
        if f >= self.faces.len() {
            return Err(Error::BadInput(format!("no face {}", f)));
        }
        let mut d = self.clone();
        d.outer_face = f;
        if !d.crossings.is_empty() {
            d.turns = solve_turns(&d)?;
        }
        Ok(d)
    }

    /// Winding numbers of a 1-cycle given by edge multiplicities, relative
    /// to the outer face. `None` if the multiplicities are not a cycle.
    pub fn winding_of(&self, mult: &[i64]) -> Option<Vec<i64>> {
        let nf = self.faces.len();
        let mut w: Vec<Option<i64>> = vec![None; nf];
        w[self.outer_face] = Some(0);
        let mut adj: Vec<Vec<(usize, usize)>> = vec![vec![]; nf];
        for e in 0..self.num_edges() {
            adj[self.left_face[e]].push((e, self.right_face[e]));
            adj[self.right_face[e]].push((e, self.left_face[e]));
        }
        let mut queue = VecDeque::from([self.outer_face]);
        while let Some(f) = queue.pop_front() {
            let wf = w[f]?;
            for &(e, g) in &adj[f] {
                // w(left) - w(right) = mult
                let wg = if self.left_face[e] == f { wf - mult[e] } else { wf + mult[e] };
                match w[g] {
                    None => {
                        w[g] = Some(wg);
                        queue.push_back(g);
                    }
                    Some(x) if x != wg => return None,
                    _ => {}
                }
            }
        }
        w.into_iter().collect()
    }

    /// Edge multiplicities of the loop `gamma_c` (arcs `[j, j']`).
    pub fn loop_multiplicities(&self, c: Option<usize>) -> Vec<i64> {
        let mut m = vec![0; self.num_edges()];
        match c {
            None => m.iter_mut().for_each(|x| *x = 1),
            Some(c) => {
                let (j, jp) = self.crossings[c].labels();
                for l in j..jp {
                    m[self.arc_edge(l)] += 1;
                }
            }
        }
        m
    }

    pub fn loop_of_crossing(&self, c: Option<usize>) -> LoopClass {
        let arcs = match c {
            None => (1..=self.passes.len()).collect(),
            Some(c) => {
                let (j, jp) = self.crossings[c].labels();
                (j..jp).collect()
            }
        };
        let winding = self
            .winding_of(&self.loop_multiplicities(c))
            .expect("loop is a cycle");
        LoopClass { crossing: c, arcs, winding }
    }

    /// Computes the three sides of the writhe/linking lemma for crossing `c`.
    pub fn check_writhe_linking_lemma(&self, c: usize) -> LemmaReport {
        let (j, jp) = self.crossings[c].labels();
        let inside = |l: usize| l > j && l < jp;
        let mut under_sum = 0;
        let mut all_sum = 0;
        let mut self_sum = 0;
        let mut mixed_sum = 0;
        for (i, x) in self.crossings.iter().enumerate() {
            let e = x.sign as i64;
            let (a, b) = (x.over_label, x.under_label);
            if inside(b) {
                under_sum += e;
            }
            if inside(a) {
                all_sum += e;
            }
            if inside(b) {
                all_sum += e;
            }
            if i == c {
                continue;
            }
            match (inside(a), inside(b)) {
                (true, true) => self_sum += e,
                (true, false) | (false, true) => mixed_sum += e,
                _ => {}
            }
        }
        let twice_rhs = 2 * self_sum + mixed_sum;
        LemmaReport {
            crossing: c,
            lhs_under_sum: under_sum,
            twice_half_sign_sum: all_sum,
            twice_wr_gamma_plus_lk: twice_rhs,
            holds: 2 * under_sum == all_sum && all_sum == twice_rhs,
        }
    }

    /// PD code with the original labels, in the original crossing order.
    pub fn emit_pd(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.crossings.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let l: Vec<String> = c.slots.iter().map(|e| self.edge_labels[*e].to_string()).collect();
            let _ = write!(s, "X({})", l.join(","));
        }
        s
    }

    /// PD code relabeled along the traversal: edge `[l, l+1]` gets label `l`.
    pub fn emit_canonical_pd(&self) -> String {
        let mut lab = vec![0usize; self.num_edges()];
        for (i, e) in self.arc_edges.iter().enumerate() {
            lab[*e] = i + 1;
        }
        let mut s = String::new();
        for (i, c) in self.crossings.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let l: Vec<String> = c.slots.iter().map(|e| lab[*e].to_string()).collect();
            let _ = write!(s, "X({})", l.join(","));
        }
        s
    }

    /// Signed Gauss code along the traversal from label 1, crossings
    /// numbered by their PD order (1-based).
    pub fn emit_gauss(&self) -> String {
        self.passes
            .iter()
            .map(|p| {
                let c = &self.crossings[p.crossing];
                format!(
                    "{}{}{}",
                    if p.over { 'O' } else { 'U' },
                    p.crossing + 1,
                    if c.sign > 0 { '+' } else { '-' }
                )
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let crossings: Vec<_> = self
            .crossings
            .iter()
            .map(|c| {
                serde_json::json!({
                    "id": c.id,
                    "sign": c.sign,
                    "pd": c.slots.iter().map(|e| self.edge_labels[*e]).collect::<Vec<_>>(),
                    "incoming_over": self.edge_labels[c.incoming_over],
                    "outgoing_over": self.edge_labels[c.outgoing_over],
                    "incoming_under": self.edge_labels[c.incoming_under],
                    "outgoing_under": self.edge_labels[c.outgoing_under],
                    "over_label": c.over_label,
                    "under_label": c.under_label,
                })
            })
            .collect();
        let arcs: Vec<_> = self
            .arc_edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                serde_json::json!({
                    "arc": [i + 1, (i + 1) % self.arc_edges.len() + 1],
                    "pd_label": self.edge_labels[*e],
                    "turns": self.turns[*e],
                })
            })
            .collect();
        serde_json::json!({
            "crossings": crossings,
            "arcs": arcs,
            "faces": self.faces,
            "outer_face": self.outer_face,
            "writhe": self.writhe(),
            "base_valid": self.base_valid,
            "pd": self.emit_pd(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoopClass {
    /// `None` stands for the whole knot.
    pub crossing: Option<usize>,
    /// Arc start labels `l` of the arcs `[l, l+1]` along the loop.
    pub arcs: Vec<usize>,
    pub winding: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub crossing: usize,
    pub lhs_under_sum: i64,
    /// Twice the half-sum of signs over `(j, j')`.
    pub twice_half_sign_sum: i64,
    /// Twice `wr(gamma) + lk(gamma, gamma')`.
    pub twice_wr_gamma_plus_lk: i64,
    pub holds: bool,
}

fn parse_int_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::MalformedCode(format!("bad label '{}'", t.trim())))
        })
        .collect()
}

/// Parses `X(1,4,2,5) X(3,6,4,1) ...` (also `X[...]`, optionally wrapped
/// in `PD[...]`). The empty code is the crossingless unknot.
pub fn parse_pd(text: &str) -> Result<Diagram> {
    let re = Regex::new(r"X\s*[\(\[]([^\)\]]*)[\)\]]").unwrap();
    let mut tuples = vec![];
    for cap in re.captures_iter(text) {
        let v = parse_int_list(&cap[1])?;
        if v.len() != 4 {
            return Err(Error::MalformedCode(format!("crossing with {} labels", v.len())));
        }
        tuples.push([v[0], v[1], v[2], v[3]]);
    }
    let rest = re.replace_all(text, "");
    if rest.chars().any(|c| c.is_ascii_digit()) {
        return Err(Error::MalformedCode("stray labels outside crossings".into()));
    }
    from_pd_tuples(&tuples)
}

pub fn from_pd_tuples(tuples: &[[i64; 4]]) -> Result<Diagram> {
    if tuples.is_empty() {
        return Ok(Diagram::unknot());
    }
    let nc = tuples.len();
    let mut label_ix: BTreeMap<i64, usize> = BTreeMap::new();
    let mut occ: BTreeMap<i64, Vec<Slot>> = BTreeMap::new();
    for (c, t) in tuples.iter().enumerate() {
        for (p, l) in t.iter().enumerate() {
            occ.entry(*l).or_default().push((c, p));
        }
    }
    if occ.len() != 2 * nc {
        return Err(Error::MalformedCode(format!(
            "{} distinct labels for {} crossings",
            occ.len(),
            nc
        )));
    }
    for (l, v) in &occ {
        if v.len() != 2 {
            return Err(Error::MalformedCode(format!("label {} appears {} times", l, v.len())));
        }
    }
    for (i, l) in occ.keys().enumerate() {
        label_ix.insert(*l, i);
    }
    let ne = 2 * nc;
    let edge_labels: Vec<i64> = occ.keys().copied().collect();
    let slots: Vec<[usize; 4]> = tuples
        .iter()
        .map(|t| [label_ix[&t[0]], label_ix[&t[1]], label_ix[&t[2]], label_ix[&t[3]]])
        .collect();
    let ends: Vec<[Slot; 2]> = occ.values().map(|v| [v[0], v[1]]).collect();
    let other = |c: usize, p: usize| -> Slot {
        let e = slots[c][p];
        if ends[e][0] == (c, p) {
            ends[e][1]
        } else {
            ends[e][0]
        }
    };
    // head[c][p]: Some(true) if the slot is an incoming end
    let mut incoming: Vec<[Option<bool>; 4]> = vec![[Some(true), None, Some(false), None]; nc];
    loop {
        let mut changed = false;
        for c in 0..nc {
            for p in 0..4 {
                if let Some(inc) = incoming[c][p] {
                    let (c2, p2) = other(c, p);
                    match incoming[c2][p2] {
                        None => {
                            incoming[c2][p2] = Some(!inc);
                            incoming[c2][(p2 + 2) % 4] = Some(inc);
                            changed = true;
                        }
                        Some(x) if x == inc => {
                            return Err(Error::MalformedCode(format!(
                                "inconsistent orientation on label {}",
                                edge_labels[slots[c][p]]
                            )))
                        }
                        _ => {}
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    if incoming.iter().any(|r| r.iter().any(|x| x.is_none())) {
        return Err(Error::NotAKnot { covered: 0, total: ne });
    }
    let mut edge_tail = vec![(0, 0); ne];
    let mut edge_head = vec![(0, 0); ne];
    for c in 0..nc {
        for p in 0..4 {
            let e = slots[c][p];
            if incoming[c][p] == Some(true) {
                edge_head[e] = (c, p);
            } else {
                edge_tail[e] = (c, p);
            }
        }
    }
    let mut crossings = Vec::with_capacity(nc);
    for c in 0..nc {
        let s = slots[c];
        let pos1_out = incoming[c][1] == Some(false);
        let (io, oo) = if pos1_out { (s[3], s[1]) } else { (s[1], s[3]) };
        crossings.push(Crossing {
            id: c,
            sign: if pos1_out { 1 } else { -1 },
            slots: s,
            incoming_over: io,
            outgoing_over: oo,
            incoming_under: s[0],
            outgoing_under: s[2],
            over_label: 0,
            under_label: 0,
        });
    }
    // traversal from the edge with the smallest PD label
    let mut passes_from_edge0: Vec<(Pass, usize)> = vec![];
    let mut e = 0usize;
    loop {
        let (c, p) = edge_head[e];
        let over = p % 2 == 1;
        let out = slots[c][(p + 2) % 4];
        passes_from_edge0.push((Pass { crossing: c, over }, e));
        e = out;
        if e == 0 || passes_from_edge0.len() > ne {
            break;
        }
    }
    if passes_from_edge0.len() != ne {
        return Err(Error::NotAKnot {
            covered: passes_from_edge0.len(),
            total: ne,
        });
    }
    // faces: leave (c,p), arrive (c',p'), leave c' at p'-1
    let mut seen = vec![[false; 4]; nc];
    let mut faces = vec![];
    let mut left_face = vec![usize::MAX; ne];
    let mut right_face = vec![usize::MAX; ne];
    for c0 in 0..nc {
        for p0 in 0..4 {
            if seen[c0][p0] {
                continue;
            }
            let fi = faces.len();
            let mut face = Face { corners: vec![], edges: vec![] };
            let (mut c, mut p) = (c0, p0);
            while !seen[c][p] {
                seen[c][p] = true;
                let e = slots[c][p];
                let fwd = edge_tail[e] == (c, p);
                face.edges.push((e, fwd));
                if fwd {
                    left_face[e] = fi;
                } else {
                    right_face[e] = fi;
                }
                let (c2, p2) = other(c, p);
                let pn = (p2 + 3) % 4;
                face.corners.push((c2, pn));
                c = c2;
                p = pn;
            }
            faces.push(face);
        }
    }
    if faces.len() != nc + 2 {
        return Err(Error::NonPlanar {
            faces: faces.len(),
            crossings: nc,
        });
    }
    let outer_face = (0..faces.len())
        .max_by_key(|f| (faces[*f].corners.len(), std::cmp::Reverse(*f)))
        .unwrap();
    let mut d = Diagram {
        crossings,
        edge_labels,
        edge_tail,
        edge_head,
        faces,
        outer_face,
        left_face,
        right_face,
        passes: vec![],
        arc_edges: vec![],
        base_valid: false,
        turns: vec![],
    };
    label(&mut d, &passes_from_edge0);
    d.turns = solve_turns(&d)?;
    Ok(d)
}

/// Picks the base point and numbers the passes.
fn label(d: &mut Diagram, seq: &[(Pass, usize)]) {
    let m = seq.len();
    // candidate i: pass i under, pass i+1 over at another crossing; the
    // connecting edge is the incoming edge of pass i+1
    let mut best: Option<(i64, usize)> = None;
    for i in 0..m {
        let (a, _) = seq[i];
        let (b, eb) = seq[(i + 1) % m];
        if !a.over && b.over && a.crossing != b.crossing {
            let key = d.edge_labels[eb];
            if best.is_none_or(|(k, _)| key < k) {
                best = Some((key, i));
            }
        }
    }
    d.base_valid = best.is_some();
    let start = match best {
        Some((_, i)) => i,
        // fallback: an under-pass, again keyed by the label of the edge
        // leaving it, so relabeling from the result picks the same start
        None => (0..m)
            .filter(|i| !seq[*i].0.over)
            .min_by_key(|i| d.edge_labels[seq[(i + 1) % m].1])
            .unwrap_or(0),
    };
    d.passes = (0..m).map(|k| seq[(start + k) % m].0).collect();
    // arc [l, l+1] is the incoming edge of pass l+1
    d.arc_edges = (0..m).map(|k| seq[(start + k + 1) % m].1).collect();
    for (k, p) in d.passes.iter().enumerate() {
        let c = &mut d.crossings[p.crossing];
        if p.over {
            c.over_label = k + 1;
        } else {
            c.under_label = k + 1;
        }
    }
}

/// Same diagram relabeled: fails with `NoBasePoint` when the base
/// point rule cannot be met.
pub fn label_crossings(d: &Diagram) -> Result<Diagram> {
    d.require_base()?;
    Ok(d.clone())
}

fn rep_turn(x: i64) -> i64 {
    let r = x.rem_euclid(8);
    if r > 4 {
        r - 8
    } else {
        r
    }
}

/// Solves for integer full-turn counts of each edge so that every face has
/// total turning `+1` (bounded) or `-1` (outer) turn with upright crossings.
fn solve_turns(d: &Diagram) -> Result<Vec<i64>> {
    let ne = d.num_edges();
    let nf = d.faces.len();
    // fractional part of each edge's turning, in eighths
    let rep: Vec<i64> = (0..ne)
        .map(|e| {
            let (ct, pt) = d.edge_tail[e];
            let (ch, ph) = d.edge_head[e];
            let start = d.crossings[ct].ray_angle(pt);
            let end = d.crossings[ch].ray_angle(ph) + 4;
            rep_turn(end - start)
        })
        .collect();
    let rhs: Vec<i64> = (0..nf)
        .map(|f| {
            let target = if f == d.outer_face { -8 } else { 8 };
            let face = &d.faces[f];
            let s: i64 = face
                .edges
                .iter()
                .map(|(e, fwd)| if *fwd { rep[*e] } else { -rep[*e] })
                .sum();
            target - 2 * face.corners.len() as i64 - s
        })
        .collect();
    // dual BFS tree from the outer face
    let mut parent_edge = vec![usize::MAX; nf];
    let mut order = vec![d.outer_face];
    let mut visited = vec![false; nf];
    visited[d.outer_face] = true;
    let mut i = 0;
    while i < order.len() {
        let f = order[i];
        i += 1;
        for (e, _) in &d.faces[f].edges {
            let g = if d.left_face[*e] == f { d.right_face[*e] } else { d.left_face[*e] };
            if !visited[g] {
                visited[g] = true;
                parent_edge[g] = *e;
                order.push(g);
            }
        }
    }
    let mut m = vec![0i64; ne];
    for &f in order.iter().skip(1).rev() {
        let pe = parent_edge[f];
        let mut s = 0;
        let mut coef = 0;
        for (e, fwd) in &d.faces[f].edges {
            let sg = if *fwd { 1 } else { -1 };
            if *e == pe {
                coef += sg;
            } else {
                s += sg * m[*e];
            }
        }
        let need = rhs[f] - 8 * s;
        if coef == 0 || need % (8 * coef) != 0 {
            return Err(Error::NonPlanar {
                faces: nf,
                crossings: d.num_crossings(),
            });
        }
        m[pe] = need / (8 * coef);
    }
    for f in 0..nf {
        let s: i64 = d.faces[f]
            .edges
            .iter()
            .map(|(e, fwd)| if *fwd { 8 * m[*e] } else { -8 * m[*e] })
            .sum();
        if s != rhs[f] {
            return Err(Error::NonPlanar {
                faces: nf,
                crossings: d.num_crossings(),
            });
        }
    }
    Ok(m)
}

/// Parses signed Gauss code such as `O1+ U2+ O3+ U1+ O2+ U3+`.
pub fn parse_gauss(text: &str) -> Result<Diagram> {
    let tok = Regex::new(r"^([OUou])(\d+)([+-])$").unwrap();
    let mut events: Vec<(bool, i64, i8)> = vec![];
    for t in text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
        let cap = tok
            .captures(t)
            .ok_or_else(|| Error::MalformedCode(format!("bad token '{}'", t)))?;
        let over = cap[1].eq_ignore_ascii_case("o");
        let id: i64 = cap[2].parse().map_err(|_| Error::MalformedCode(t.into()))?;
        let sign = if &cap[3] == "+" { 1 } else { -1 };
        events.push((over, id, sign));
    }
    if events.is_empty() {
        return Ok(Diagram::unknot());
    }
    let mut seen: BTreeMap<i64, (Option<usize>, Option<usize>, i8)> = BTreeMap::new();
    for (i, (over, id, sign)) in events.iter().enumerate() {
        let ent = seen.entry(*id).or_insert((None, None, *sign));
        if ent.2 != *sign {
            return Err(Error::MalformedCode(format!("crossing {} has two signs", id)));
        }
        let slot = if *over { &mut ent.0 } else { &mut ent.1 };
        if slot.is_some() {
            return Err(Error::MalformedCode(format!("crossing {} repeated", id)));
        }
        *slot = Some(i);
    }
    let m = events.len() as i64;
    // arc i+1 runs from event i to event i+1
    let arc_in = |i: usize| if i == 0 { m } else { i as i64 };
    let arc_out = |i: usize| i as i64 + 1;
    let mut tuples = vec![];
    for (id, (o, u, sign)) in &seen {
        let (Some(o), Some(u)) = (o, u) else {
            return Err(Error::MalformedCode(format!("crossing {} visited once", id)));
        };
        tuples.push(if *sign > 0 {
            [arc_in(*u), arc_out(*o), arc_out(*u), arc_in(*o)]
        } else {
            [arc_in(*u), arc_in(*o), arc_out(*u), arc_out(*o)]
        });
    }
    from_pd_tuples(&tuples)
}

/// Closure of a braid word; generator `i` (1-based) is `+i` or `-i`.
pub fn from_braid(word: &[i64]) -> Result<Diagram> {
    from_pd_tuples(&braid_pd(word))
}

pub fn braid_pd(word: &[i64]) -> Vec<[i64; 4]> {
    let strands = word.iter().map(|g| g.unsigned_abs() as usize).max().unwrap_or(0) + 1;
    let mut cur: Vec<i64> = (1..=strands as i64).collect();
    let mut next = strands as i64 + 1;
    let mut tuples = vec![];
    for g in word {
        let i = g.unsigned_abs() as usize - 1;
        let (lin, rin) = (cur[i], cur[i + 1]);
        let (lout, rout) = (next, next + 1);
        next += 2;
        tuples.push(if *g > 0 {
            [rin, rout, lout, lin]
        } else {
            [lin, rin, rout, lout]
        });
        cur[i] = lout;
        cur[i + 1] = rout;
    }
    // close up: the final label on each strand becomes its initial label
    let mut map: BTreeMap<i64, i64> = BTreeMap::new();
    for (s, l) in cur.iter().enumerate() {
        map.insert(*l, s as i64 + 1);
    }
    for t in tuples.iter_mut() {
        for x in t.iter_mut() {
            if let Some(y) = map.get(x) {
                *x = *y;
            }
        }
    }
    tuples
}

/// Kink flavours for a Reidemeister-I move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kink {
    /// Positive, strand enters as the under-strand first.
    PosUnderFirst,
    NegUnderFirst,
    PosOverFirst,
    NegOverFirst,
}

impl Kink {
    pub const ALL: [Kink; 4] = [
        Kink::PosUnderFirst,
        Kink::NegUnderFirst,
        Kink::PosOverFirst,
        Kink::NegOverFirst,
    ];
}

/// Inserts a kink on the edge with PD label `x`.
pub fn add_kink(d: &Diagram, x: i64, kind: Kink) -> Result<Diagram> {
    let e = d
        .edge_labels
        .iter()
        .position(|l| *l == x)
        .ok_or_else(|| Error::BadInput(format!("no arc {}", x)))?;
    let head = d.edge_head[e];
    let mut tuples: Vec<[i64; 4]> = vec![];
    for (ci, c) in d.crossings.iter().enumerate() {
        let mut t = [0i64; 4];
        for p in 0..4 {
            let l = d.edge_labels[c.slots[p]];
            t[p] = if (ci, p) == head {
                x + 2
            } else if l > x {
                l + 2
            } else {
                l
            };
        }
        tuples.push(t);
    }
    tuples.push(match kind {
        Kink::PosUnderFirst => [x, x + 2, x + 1, x + 1],
        Kink::NegUnderFirst => [x, x + 1, x + 1, x + 2],
        Kink::PosOverFirst => [x + 1, x + 1, x + 2, x],
        Kink::NegOverFirst => [x + 1, x, x + 2, x + 1],
    });
    from_pd_tuples(&tuples)
}

/// A 0-crossing unknot needs a kink on nothing; this builds the 1-crossing
/// kinked unknot of the requested flavour.
pub fn kinked_unknot(kind: Kink) -> Result<Diagram> {
    let t = match kind {
        Kink::PosUnderFirst => [1, 1, 2, 2],
        Kink::NegUnderFirst => [1, 2, 2, 1],
        Kink::PosOverFirst => [2, 2, 1, 1],
        Kink::NegOverFirst => [2, 1, 1, 2],
    };
    from_pd_tuples(&[t])
}

#[cfg(test)]
mod tests {
    use super::*;

    const TREFOIL_L: &str = "X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)";
    const FIG8: &str = "X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)";

    #[test]
    fn parse_trefoil_counts() {
        let d = parse_pd(TREFOIL_L).unwrap();
        assert_eq!(d.num_crossings(), 3);
        assert_eq!(d.num_edges(), 6);
        assert_eq!(d.faces.len(), 5);
        assert_eq!(d.writhe(), -3);
    }

    #[test]
    fn malformed() {
        assert!(matches!(parse_pd("X(1,2,3)"), Err(Error::MalformedCode(_))));
        assert!(matches!(parse_pd("X(1,2,3,4)"), Err(Error::MalformedCode(_))));
        assert!(matches!(parse_gauss("O1+ U2+ O2+"), Err(Error::MalformedCode(_))));
    }

    #[test]
    fn figure8_labels() {
        let d = parse_pd(FIG8).unwrap();
        assert!(d.base_valid);
        let mut pairs: Vec<_> = d.crossings.iter().map(|c| c.labels()).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(1, 6), (2, 5), (3, 8), (4, 7)]);
        assert_eq!(d.writhe(), 0);
        assert!(!d.passes[0].over && d.passes[1].over);
    }

    #[test]
    fn gauss_trefoil() {
        let d = parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+").unwrap();
        assert_eq!(d.num_crossings(), 3);
        assert_eq!(d.writhe(), 3);
        let d = parse_gauss("U2+ O1+ U4- O3- U1+ O2+ U3- O4-").unwrap();
        assert_eq!(d.writhe(), 0);
    }

    #[test]
    fn kinked_unknot_has_no_base() {
        for k in Kink::ALL {
            let d = kinked_unknot(k).unwrap();
            assert_eq!(d.faces.len(), 3);
            assert!(matches!(label_crossings(&d), Err(Error::NoBasePoint)));
        }
    }

    #[test]
    fn kink_changes_writhe() {
        let d = from_braid(&[1, 1, 1]).unwrap();
        assert_eq!(d.writhe(), 3);
        let k = add_kink(&d, 1, Kink::PosUnderFirst).unwrap();
        assert_eq!(k.writhe(), 4);
        let k = add_kink(&d, 2, Kink::NegOverFirst).unwrap();
        assert_eq!(k.writhe(), 2);
    }

    #[test]
    fn label_parity() {
        for w in [vec![1, 1, 1], vec![1, -2, 1, -2], vec![1, 1, 1, 2, -1, 2]] {
            let d = from_braid(&w).unwrap();
            for c in &d.crossings {
                let (j, jp) = c.labels();
                assert_eq!((jp - j) % 2, 1);
            }
        }
    }

    #[test]
    fn roundtrip_pd() {
        let d = parse_pd(FIG8).unwrap();
        let e = parse_pd(&d.emit_pd()).unwrap();
        assert_eq!(d, e);
        let c = parse_pd(&d.emit_canonical_pd()).unwrap();
        assert_eq!(c.emit_canonical_pd(), d.emit_canonical_pd());
    }

    #[test]
    fn windings_anchor_and_jump() {
        let d = parse_pd(FIG8).unwrap();
        for c in (0..4).map(Some).chain([None]) {
            let l = d.loop_of_crossing(c);
            assert_eq!(l.winding[d.outer_face], 0);
            let m = d.loop_multiplicities(c);
            for e in 0..d.num_edges() {
                assert_eq!(l.winding[d.left_face[e]] - l.winding[d.right_face[e]], m[e]);
            }
        }
        let c = d.crossings.iter().position(|c| c.labels() == (1, 6)).unwrap();
        assert_eq!(d.loop_of_crossing(Some(c)).arcs.len(), 5);
    }

    #[test]
    fn lemma_figure8_trefoil() {
        for d in [parse_pd(FIG8).unwrap(), parse_pd(TREFOIL_L).unwrap()] {
            for c in 0..d.num_crossings() {
                assert!(d.check_writhe_linking_lemma(c).holds);
            }
        }
    }

    #[test]
    fn braid_closure_turns() {
        // closure arcs of a braid turn once clockwise; strand arcs do not turn
        // (two closure arcs, turning one way or the other depending on which
        // three-cornered face is unbounded)
        let d = from_braid(&[1, 1, 1]).unwrap();
        let totals: Vec<i64> = (0..d.faces.len())
            .filter(|f| d.faces[*f].corners.len() == 3)
            .map(|f| d.with_outer_face(f).unwrap().turns.iter().sum())
            .collect();
        assert_eq!(totals.len(), 2);
        assert!(totals.contains(&2) && totals.contains(&-2));
    }
}
