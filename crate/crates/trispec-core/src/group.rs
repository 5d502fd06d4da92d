//! The triangle T in the half-plane, its reflection group and the rotation
//! subgroup Γ(r,p,q): generators, words, balls, axes and conjugacy.
//!
//! Placement: V_r = i, V_p = i e^a on the imaginary axis, and V_q in the
//! half-plane x < 0. With counterclockwise rotations this is the placement
//! for which R·P·Q = ±1 holds; mirroring V_q to x > 0 yields R·Q·P = ±1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::forms::{contact_data, side_coshes, Order, Signature};
use crate::hyperbolic::{
    axis, classify, cosh_dist, reflect, Boundary, Geodesic, Motion, MotionClass, UhpPoint,
};

/// Default cap on word length for literal balls.
pub const MAX_WORD_CAP: usize = 16;
/// Default cap on the number of stored elements.
pub const MAX_BALL_ELEMENTS: usize = 6_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Vertex {
    Finite(UhpPoint),
    /// an ideal vertex on the real axis
    Ideal(f64),
}

impl Vertex {
    pub fn point(&self) -> Option<UhpPoint> {
        match self {
            Vertex::Finite(z) => Some(*z),
            Vertex::Ideal(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleRealization {
    pub sig: Signature,
    pub vr: UhpPoint,
    pub vp: UhpPoint,
    pub vq: Vertex,
    /// V_r V_p, on the imaginary axis
    pub side_a: Geodesic,
    /// V_p V_q
    pub side_b: Geodesic,
    /// V_q V_r
    pub side_c: Geodesic,
    pub incenter: UhpPoint,
    pub inradius: f64,
    /// contact point on side b
    pub r_star: UhpPoint,
    /// contact point on side c
    pub p_star: UhpPoint,
    /// contact point on side a
    pub q_star: UhpPoint,
}

/// Geodesic through an interior point and a boundary point.
fn geodesic_to_boundary(z: UhpPoint, u: f64) -> Result<Geodesic> {
    let dx = z.x - u;
    if dx.abs() <= 1e-15 * (1.0 + u.abs()) {
        return Ok(Geodesic::vertical(u));
    }
    let m = (z.x * z.x + z.y * z.y - u * u) / (2.0 * dx);
    Geodesic::new(Boundary::Finite(u), Boundary::Finite(2.0 * m - u))
}

fn reflect_point(g: &Geodesic, z: UhpPoint) -> UhpPoint {
    reflect(g).apply(z)
}

pub fn realize(sig: &Signature) -> TriangleRealization {
    let sides = side_coshes(sig);
    let a = sides.cosh_a.acosh();
    let vr = UhpPoint::I;
    let vp = UhpPoint::on_axis(a);
    let turn = Motion::rotation(vr, PI / sig.r as f64);
    let vq = match sig.q {
        Order::Finite(_) => Vertex::Finite(turn.apply(UhpPoint::on_axis(sides.cosh_c.acosh()))),
        Order::Infinite => match turn.apply_boundary(Boundary::Infinity) {
            Boundary::Finite(u) => Vertex::Ideal(u),
            Boundary::Infinity => unreachable!("rotation by less than π moves infinity"),
        },
    };
    let side_a = Geodesic::vertical(0.0);
    let (side_b, side_c) = match vq {
        Vertex::Finite(z) => (
            Geodesic::through(vp, z).expect("distinct vertices"),
            Geodesic::through(z, vr).expect("distinct vertices"),
        ),
        Vertex::Ideal(u) => (
            geodesic_to_boundary(vp, u).expect("distinct"),
            geodesic_to_boundary(vr, u).expect("distinct"),
        ),
    };

    let cd = contact_data(sig);
    let dr = cd.sinh2_dr.sqrt().asinh();
    let t = dr.exp();
    let q_star = UhpPoint::on_axis(dr);
    // right triangle V_r, q*, I with angle π/(2r) at V_r
    let half = 0.5 * PI / sig.r as f64;
    let inradius = (dr.sinh() * half.tan()).atanh();
    let sin_phi = 1.0 / inradius.cosh();
    let cos_phi = (1.0 - sin_phi * sin_phi).sqrt();
    let incenter = UhpPoint::new(-t * cos_phi, t * sin_phi);
    let bis_r = Geodesic::through(vr, incenter).expect("incenter off V_r");
    let bis_p = Geodesic::through(vp, incenter).expect("incenter off V_p");
    TriangleRealization {
        sig: *sig,
        vr,
        vp,
        vq,
        side_a,
        side_b,
        side_c,
        incenter,
        inradius,
        r_star: reflect_point(&bis_p, q_star),
        p_star: reflect_point(&bis_r, q_star),
        q_star,
    }
}

/// A rotation letter; lowercase prints the inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    R,
    RInv,
    P,
    PInv,
    Q,
    QInv,
}

impl Letter {
    pub const ALL: [Letter; 6] = [
        Letter::R,
        Letter::RInv,
        Letter::P,
        Letter::PInv,
        Letter::Q,
        Letter::QInv,
    ];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::R => Letter::RInv,
            Letter::RInv => Letter::R,
            Letter::P => Letter::PInv,
            Letter::PInv => Letter::P,
            Letter::Q => Letter::QInv,
            Letter::QInv => Letter::Q,
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        ['R', 'r', 'P', 'p', 'Q', 'q'][self.index()]
    }

    pub fn from_char(c: char) -> Option<Letter> {
        Some(match c {
            'R' => Letter::R,
            'r' => Letter::RInv,
            'P' => Letter::P,
            'p' => Letter::PInv,
            'Q' => Letter::Q,
            'q' => Letter::QInv,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        if s == "1" {
            return Ok(Word::empty());
        }
        s.chars()
            .map(|c| {
                Letter::from_char(c).ok_or_else(|| Error::Unsupported(format!("letter '{c}'")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub word: Word,
    pub motion: Motion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generators {
    /// reflections in sides a, b, c
    pub s1: Motion,
    pub s2: Motion,
    pub s3: Motion,
    pub r: Motion,
    pub p: Motion,
    pub q: Motion,
}

pub fn generators(real: &TriangleRealization) -> Generators {
    let s1 = reflect(&real.side_a);
    let s2 = reflect(&real.side_b);
    let s3 = reflect(&real.side_c);
    Generators {
        r: s3 * s1,
        p: s1 * s2,
        q: s2 * s3,
        s1,
        s2,
        s3,
    }
}

/// Γ(r,p,q) with its realization and letter motions.
#[derive(Clone, Debug)]
pub struct TriangleGroup {
    pub sig: Signature,
    pub real: TriangleRealization,
    pub gens: Generators,
    letters: [Motion; 6],
}

impl TriangleGroup {
    pub fn new(sig: &Signature) -> Self {
        let real = realize(sig);
        let gens = generators(&real);
        let letters = [
            gens.r,
            gens.r.inverse(),
            gens.p,
            gens.p.inverse(),
            gens.q,
            gens.q.inverse(),
        ];
        TriangleGroup {
            sig: *sig,
            real,
            gens,
            letters,
        }
    }

    pub fn letter(&self, l: Letter) -> &Motion {
        &self.letters[l.index()]
    }

    pub fn eval(&self, w: &Word) -> Motion {
        w.0.iter()
            .fold(Motion::identity(), |acc, l| acc.compose(self.letter(*l)))
    }

    pub fn element(&self, w: &Word) -> GroupElement {
        GroupElement {
            word: w.clone(),
            motion: self.eval(w),
        }
    }

    /// Membership in Γ(r,p,q) of a direct motion, by folding into T.
    pub fn contains(&self, m: &Motion) -> bool {
        let t = &self.real;
        let sides = [t.side_a, t.side_b, t.side_c];
        let refl = [self.gens.s1, self.gens.s2, self.gens.s3];
        match fold_into(&sides, &refl, t.incenter, m) {
            Some((w, spelled)) => m.is_direct() && w.len() % 2 == 0 && spelled.approx_eq(m, 1e-8),
            None => false,
        }
    }

    /// Finite vertices with their orders.
    pub fn finite_vertices(&self) -> Vec<(UhpPoint, u32)> {
        let mut v = vec![(self.real.vr, self.sig.r), (self.real.vp, self.sig.p)];
        if let (Vertex::Finite(z), Order::Finite(q)) = (self.real.vq, self.sig.q) {
            v.push((z, q));
        }
        v
    }
}

/// Hash index of motions up to sign with a matching tolerance.
#[derive(Clone, Debug, Default)]
pub struct MotionIndex {
    cells: HashMap<[i64; 4], Vec<u32>>,
    cell: f64,
}

const INDEX_CELL: f64 = 1e-7;
const MATCH_TOL: f64 = 1e-8;

impl MotionIndex {
    pub fn new() -> Self {
        MotionIndex {
            cells: HashMap::new(),
            cell: INDEX_CELL,
        }
    }

    fn key(&self, m: &[f64; 4]) -> [i64; 4] {
        let mut k = [0i64; 4];
        for i in 0..4 {
            k[i] = (m[i] / self.cell).floor() as i64;
        }
        k
    }

    pub fn insert(&mut self, m: &Motion, id: u32) {
        let k = self.key(&m.entries());
        self.cells.entry(k).or_default().push(id);
    }

    /// Ids stored near `m` or near `-m`; the caller confirms the match.
    pub fn candidates(&self, m: &Motion) -> Vec<u32> {
        let mut out = Vec::new();
        let e = m.entries();
        for sign in [1.0, -1.0] {
            let v = [sign * e[0], sign * e[1], sign * e[2], sign * e[3]];
            let base = self.key(&v);
            // probe the neighbouring cell in every coordinate close to a boundary
            let mut opts: [[i64; 2]; 4] = [[0; 2]; 4];
            let mut counts = [1usize; 4];
            for i in 0..4 {
                opts[i][0] = base[i];
                let tol = MATCH_TOL * (1.0 + v[i].abs());
                let frac = v[i] / self.cell - base[i] as f64;
                let slack = tol / self.cell;
                if frac < slack {
                    opts[i][1] = base[i] - 1;
                    counts[i] = 2;
                } else if frac > 1.0 - slack {
                    opts[i][1] = base[i] + 1;
                    counts[i] = 2;
                }
            }
            for a in 0..counts[0] {
                for b in 0..counts[1] {
                    for c in 0..counts[2] {
                        for d in 0..counts[3] {
                            let k = [opts[0][a], opts[1][b], opts[2][c], opts[3][d]];
                            if let Some(ids) = self.cells.get(&k) {
                                out.extend_from_slice(ids);
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A ball of group elements stored with shortest discovered words.
#[derive(Clone, Debug)]
pub struct Ball {
    motions: Vec<Motion>,
    parent: Vec<(u32, Option<Letter>)>,
    length: Vec<u8>,
    index: MotionIndex,
    /// true when the search ran out of new elements before the word bound
    pub exhausted: bool,
    /// longest word length actually used
    pub depth: usize,
}

impl Ball {
    fn with_identity() -> Self {
        let mut b = Ball {
            motions: Vec::new(),
            parent: Vec::new(),
            length: Vec::new(),
            index: MotionIndex::new(),
            exhausted: false,
            depth: 0,
        };
        b.push(Motion::identity(), u32::MAX, None, 0);
        b
    }

    fn push(&mut self, m: Motion, parent: u32, letter: Option<Letter>, len: u8) -> u32 {
        let id = self.motions.len() as u32;
        self.index.insert(&m, id);
        self.motions.push(m);
        self.parent.push((parent, letter));
        self.length.push(len);
        id
    }

    pub fn len(&self) -> usize {
        self.motions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motions.is_empty()
    }

    pub fn motion(&self, id: usize) -> &Motion {
        &self.motions[id]
    }

    pub fn motions(&self) -> &[Motion] {
        &self.motions
    }

    pub fn word_len(&self, id: usize) -> usize {
        self.length[id] as usize
    }

    pub fn word(&self, id: usize) -> Word {
        let mut v = Vec::with_capacity(self.length[id] as usize);
        let mut cur = id as u32;
        while let (p, Some(l)) = self.parent[cur as usize] {
            v.push(l);
            cur = p;
        }
        v.reverse();
        Word(v)
    }

    pub fn element(&self, id: usize) -> GroupElement {
        GroupElement {
            word: self.word(id),
            motion: self.motions[id],
        }
    }

    pub fn find(&self, m: &Motion) -> Option<usize> {
        if !m.is_direct() {
            return None;
        }
        self.index
            .candidates(m)
            .into_iter()
            .find(|&id| self.motions[id as usize].approx_eq(m, MATCH_TOL))
            .map(|id| id as usize)
    }

    pub fn contains(&self, m: &Motion) -> bool {
        self.find(m).is_some()
    }
}

#[derive(Clone, Debug)]
pub struct BallOptions {
    pub max_word: usize,
    pub word_cap: usize,
    pub max_elements: usize,
    pub letters: Vec<Letter>,
}

impl Default for BallOptions {
    fn default() -> Self {
        BallOptions {
            max_word: 8,
            word_cap: MAX_WORD_CAP,
            max_elements: MAX_BALL_ELEMENTS,
            letters: Letter::ALL.to_vec(),
        }
    }
}

/// Breadth-first expansion by right multiplication. `keep` decides whether
/// a new element is stored and expanded further.
fn grow_ball<F>(group: &TriangleGroup, opts: &BallOptions, keep: F) -> Result<Ball>
where
    F: Fn(&Motion) -> bool + Sync,
{
    if opts.max_word > opts.word_cap {
        return Err(Error::ResourceCap {
            what: "max_word",
            requested: opts.max_word,
            cap: opts.word_cap,
            estimate: 0,
        });
    }
    let mut ball = Ball::with_identity();
    let mut frontier: Vec<u32> = vec![0];
    let mut prev_layer = 1usize;
    for len in 1..=opts.max_word {
        // products are computed in parallel, insertion stays sequential in
        // frontier order so the result is deterministic
        let cands: Vec<(u32, Letter, Motion)> = frontier
            .par_iter()
            .flat_map_iter(|&id| {
                let g = ball.motions[id as usize];
                let last = ball.parent[id as usize].1;
                opts.letters.iter().filter_map(move |&l| {
                    if Some(l.inverse()) == last {
                        return None;
                    }
                    let h = g.compose(group.letter(l));
                    Some((id, l, h))
                })
            })
            .filter(|(_, _, h)| keep(h))
            .collect();
        let mut next = Vec::new();
        for (id, l, h) in cands {
            if ball.find(&h).is_some() {
                continue;
            }
            let nid = ball.push(h, id, Some(l), len as u8);
            next.push(nid);
            if ball.len() > opts.max_elements {
                let growth = next.len() as f64 / prev_layer.max(1) as f64;
                let est = ball.len() as f64 * growth.max(1.0).powi((opts.max_word - len) as i32);
                return Err(Error::ResourceCap {
                    what: "ball elements",
                    requested: opts.max_word,
                    cap: opts.max_elements,
                    estimate: est.min(usize::MAX as f64) as usize,
                });
            }
        }
        if next.is_empty() {
            ball.exhausted = true;
            return Ok(ball);
        }
        ball.depth = len;
        prev_layer = next.len();
        frontier = next;
    }
    Ok(ball)
}

/// All distinct motions given by rotation words of length ≤ `max_word`.
pub fn enumerate_ball(group: &TriangleGroup, max_word: usize) -> Result<Ball> {
    grow_ball(
        group,
        &BallOptions {
            max_word,
            ..BallOptions::default()
        },
        |_| true,
    )
}

pub fn enumerate_ball_with(group: &TriangleGroup, opts: &BallOptions) -> Result<Ball> {
    grow_ball(group, opts, |_| true)
}

/// Elements g with d(c, g c) ≤ bound, reached through elements that also
/// satisfy it. With `c` inside the fundamental quadrilateral and `bound`
/// enlarged by its circumradius, the search misses nothing below the
/// unenlarged bound once it exhausts.
pub fn displacement_ball(
    group: &TriangleGroup,
    center: UhpPoint,
    bound: f64,
    opts: &BallOptions,
) -> Result<Ball> {
    let cb = bound.cosh();
    grow_ball(group, opts, move |h| {
        cosh_dist(center, h.apply(center)) <= cb
    })
}

/// Whether some orbit point of an even-order vertex lies on the axis of `m`.
pub fn axis_through_even_vertex(
    group: &TriangleGroup,
    m: &Motion,
    search_radius: usize,
) -> Result<bool> {
    let ax = axis(m)?;
    let evens: Vec<UhpPoint> = group
        .finite_vertices()
        .into_iter()
        .filter(|(_, n)| n % 2 == 0)
        .map(|(z, _)| z)
        .collect();
    if evens.is_empty() {
        return Ok(false);
    }
    let ball = enumerate_ball(group, search_radius)?;
    Ok(ball
        .motions()
        .iter()
        .any(|g| evens.iter().any(|&v| ax.distance_to(g.apply(v)) <= 1e-8)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Conjugacy {
    Yes(Word),
    NoWithinDepth(usize),
}

impl Conjugacy {
    pub fn is_yes(&self) -> bool {
        matches!(self, Conjugacy::Yes(_))
    }
}

/// Bounded conjugacy search against a precomputed ball.
pub fn is_conjugate_in(ball: &Ball, g: &Motion, h: &Motion) -> Result<Conjugacy> {
    let lg = classify(g)?.length();
    let lh = classify(h)?.length();
    match (lg, lh) {
        (Some(a), Some(b)) if (a - b).abs() <= 1e-8 => {}
        (Some(_), Some(_)) => return Ok(Conjugacy::NoWithinDepth(ball.depth)),
        _ => return Err(Error::NotHyperbolicMotion),
    }
    for (id, w) in ball.motions().iter().enumerate() {
        if g.conjugate_by(w).approx_eq(h, 1e-8) {
            return Ok(Conjugacy::Yes(ball.word(id)));
        }
    }
    Ok(Conjugacy::NoWithinDepth(ball.depth))
}

pub fn is_conjugate(
    group: &TriangleGroup,
    g: &Motion,
    h: &Motion,
    depth: usize,
) -> Result<Conjugacy> {
    let ball = enumerate_ball(group, depth)?;
    let r = is_conjugate_in(&ball, g, h)?;
    Ok(match r {
        Conjugacy::NoWithinDepth(_) => Conjugacy::NoWithinDepth(depth),
        yes => yes,
    })
}

pub fn length(m: &Motion) -> Option<f64> {
    classify(m).ok().and_then(|c| match c {
        MotionClass::Hyperbolic { length } => Some(length),
        _ => None,
    })
}

/// Folds the image of `probe` under `m` back into the triangle bounded by
/// `sides` (with `probe` inside). Returns the reflection word and the
/// motion it spells when the image returns to `probe`.
pub fn fold_into(
    sides: &[Geodesic; 3],
    reflections: &[Motion; 3],
    probe: UhpPoint,
    m: &Motion,
) -> Option<(Vec<u8>, Motion)> {
    let separating = |z: UhpPoint| {
        sides.iter().position(|g| {
            let s = g.side(z);
            s * g.side(probe) < 0.0 && s.abs() > 1e-13 * (1.0 + z.x.abs() + z.y)
        })
    };
    let mut z = m.apply(probe);
    let mut word = Vec::new();
    let mut acc = Motion::identity();
    while let Some(i) = separating(z) {
        z = reflections[i].apply(z);
        acc = reflections[i].compose(&acc);
        word.push(i as u8);
        if word.len() > 10_000 {
            return None;
        }
    }
    if cosh_dist(z, probe) - 1.0 > 1e-14 {
        return None;
    }
    // acc · m fixes the probe, so m = acc⁻¹ = s_{w0} s_{w1} ... s_{wk}
    Some((word, acc.inverse()))
}

/// Γ(r,p,p) drawn inside Γ(2,p,2r): the small triangle T' has the right
/// angle at the midpoint A of side b, the p-angle at V_p and the angle
/// π/(2r) at V_r. Doubling T' across the bisector V_r A gives T.
#[derive(Clone, Debug)]
pub struct IndexTwoEmbedding {
    pub sub: TriangleGroup,
    /// the parent triangle: sides V_r V_p, V_p A, A V_r
    pub parent_sides: [Geodesic; 3],
    pub parent_reflections: [Motion; 3],
    pub vertex_a: UhpPoint,
    /// a generic interior point of T'
    pub probe: UhpPoint,
}

fn midpoint(a: UhpPoint, b: UhpPoint) -> UhpPoint {
    // move a to i and b onto the imaginary axis above it
    let g = Geodesic::through(a, b).expect("distinct points");
    let m = g.to_imaginary_axis();
    let (ma, mb) = (m.apply(a), m.apply(b));
    let mid = UhpPoint::new(0.0, (ma.y * mb.y).sqrt());
    m.inverse().apply(mid)
}

impl IndexTwoEmbedding {
    pub fn new(sig: &Signature) -> Result<Self> {
        let q = sig
            .q
            .finite()
            .ok_or_else(|| Error::Unsupported("q = inf".into()))?;
        if q != sig.p {
            return Err(Error::Unsupported(format!(
                "{sig} is not of the form (r,p,p)"
            )));
        }
        let sub = TriangleGroup::new(sig);
        let vq = sub.real.vq.point().expect("finite");
        let a = midpoint(sub.real.vp, vq);
        let sides = [
            sub.real.side_a,
            sub.real.side_b,
            Geodesic::through(a, sub.real.vr)?,
        ];
        let refl = [reflect(&sides[0]), reflect(&sides[1]), reflect(&sides[2])];
        let (vr, vp) = (sub.real.vr, sub.real.vp);
        let probe = UhpPoint::new(
            0.23 * vr.x + 0.41 * vp.x + 0.36 * a.x,
            0.23 * vr.y + 0.41 * vp.y + 0.36 * a.y,
        );
        Ok(IndexTwoEmbedding {
            sub,
            parent_sides: sides,
            parent_reflections: refl,
            vertex_a: a,
            probe,
        })
    }

    /// Angles of T' at A, V_p, V_r.
    pub fn parent_angles(&self) -> [f64; 3] {
        let ang = |m: Motion| match classify(&m) {
            Ok(MotionClass::Elliptic { angle }) => 0.5 * angle.min(2.0 * PI - angle),
            _ => f64::NAN,
        };
        let [s0, s1, s2] = self.parent_reflections;
        [ang(s1 * s2), ang(s0 * s1), ang(s2 * s0)]
    }

    /// Folds `m` back into the parent triangle by side reflections. Returns
    /// the reflection word (indices 0..3) and the parent element it spells,
    /// or `None` if the image of the probe does not return to itself.
    pub fn fold(&self, m: &Motion) -> Option<(Vec<u8>, Motion)> {
        fold_into(&self.parent_sides, &self.parent_reflections, self.probe, m)
    }

    /// True when `m` is a rotation of the parent group: folding succeeds
    /// with an even reflection word and the spelled motion matches `m`.
    pub fn contains(&self, m: &Motion) -> bool {
        match self.fold(m) {
            Some((w, spelled)) => w.len() % 2 == 0 && spelled.approx_eq(m, 1e-8),
            None => false,
        }
    }

    /// The parent element spelled by a reflection word.
    pub fn spell(&self, word: &[u8]) -> Motion {
        word.iter().fold(Motion::identity(), |acc, &i| {
            acc.compose(&self.parent_reflections[i as usize])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::Signature;
    use crate::hyperbolic::dist;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn elliptic_angle(m: &Motion) -> f64 {
        match classify(m).unwrap() {
            MotionClass::Elliptic { angle } => angle,
            c => panic!("not elliptic: {c:?}"),
        }
    }

    #[test]
    fn realization_geometry() {
        for (r, p, q) in [(4, 5, 6), (3, 3, 4), (2, 3, 7), (5, 5, 5), (3, 7, 9)] {
            let s = Signature::finite(r, p, q).unwrap();
            let t = realize(&s);
            let sc = side_coshes(&s);
            let vq = t.vq.point().unwrap();
            assert!(vq.x < 0.0);
            assert!(close(cosh_dist(t.vr, t.vp), sc.cosh_a, 1e-10 * sc.cosh_a));
            assert!(close(cosh_dist(t.vp, vq), sc.cosh_b, 1e-10 * sc.cosh_b));
            assert!(close(cosh_dist(vq, t.vr), sc.cosh_c, 1e-10 * sc.cosh_c));
            // contacts on the incircle and on their sides
            for (z, side) in [
                (t.q_star, &t.side_a),
                (t.p_star, &t.side_c),
                (t.r_star, &t.side_b),
            ] {
                assert!(close(dist(z, t.incenter), t.inradius, 1e-10));
                assert!(side.distance_to(z) < 1e-10);
            }
            for side in [&t.side_a, &t.side_b, &t.side_c] {
                assert!(close(side.distance_to(t.incenter), t.inradius, 1e-10));
            }
        }
        let s = Signature::finite(4, 5, 6).unwrap();
        assert!(close(dist(realize(&s).vr, realize(&s).vp), 1.9128478, 1e-4));
    }

    #[test]
    fn generators_and_relation() {
        for (r, p, q) in [(3, 4, 5), (4, 5, 6), (2, 3, 7), (3, 3, 4), (6, 6, 6)] {
            let s = Signature::finite(r, p, q).unwrap();
            let g = TriangleGroup::new(&s);
            let (rr, pp, qq) = (g.gens.r, g.gens.p, g.gens.q);
            assert!(close(elliptic_angle(&rr), 2.0 * PI / r as f64, 1e-10));
            assert!(close(elliptic_angle(&pp), 2.0 * PI / p as f64, 1e-10));
            assert!(close(elliptic_angle(&qq), 2.0 * PI / q as f64, 1e-10));
            assert!((rr * pp * qq).is_identity(1e-9));
            assert!(rr.approx_eq(&Motion::rotation(g.real.vr, 2.0 * PI / r as f64), 1e-10));
            let pow = |m: Motion, n: u32| (0..n).fold(Motion::identity(), |a, _| a * m);
            assert!(
                pow(rr, r).is_identity(1e-9)
                    && pow(pp, p).is_identity(1e-9)
                    && pow(qq, q).is_identity(1e-9)
            );
        }
    }

    #[test]
    fn ideal_vertex() {
        let s = Signature::new(3, 3, Order::Infinite).unwrap();
        let g = TriangleGroup::new(&s);
        match g.real.vq {
            Vertex::Ideal(u) => assert!(close(u, -1.0 / (PI / 6.0).tan(), 1e-12)),
            _ => panic!(),
        }
        assert_eq!(classify(&g.gens.q).unwrap(), MotionClass::Parabolic);
        assert!((g.gens.r * g.gens.p * g.gens.q).is_identity(1e-9));
    }

    #[test]
    fn ball_counts() {
        let g = TriangleGroup::new(&Signature::finite(3, 3, 4).unwrap());
        assert_eq!(enumerate_ball(&g, 0).unwrap().len(), 1);
        assert_eq!(enumerate_ball(&g, 1).unwrap().len(), 7);
        let mut last = 0;
        for n in 1..=8 {
            let b = enumerate_ball(&g, n).unwrap();
            assert!(b.len() > last);
            last = b.len();
            for id in 0..b.len() {
                assert!(b.word_len(id) <= n);
            }
        }
        assert!(matches!(
            enumerate_ball(&g, 17),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn words_reproduce_motions() {
        let g = TriangleGroup::new(&Signature::finite(3, 4, 5).unwrap());
        let b = enumerate_ball(&g, 5).unwrap();
        for id in (0..b.len()).step_by(7) {
            let w = b.word(id);
            assert!(g.eval(&w).approx_eq(b.motion(id), 1e-9));
        }
        let w: Word = "RpQq".parse().unwrap();
        assert_eq!(w.to_string(), "RpQq");
    }

    #[test]
    fn index_near_cell_boundaries() {
        let mut idx = MotionIndex::new();
        let m = Motion::new(
            1.0 + 3e-7 - 1e-12,
            0.5,
            0.0,
            1.0,
            crate::hyperbolic::Orientation::Direct,
        )
        .unwrap();
        idx.insert(&m, 0);
        let n = Motion::new(
            1.0 + 3e-7 + 1e-12,
            0.5,
            0.0,
            1.0,
            crate::hyperbolic::Orientation::Direct,
        )
        .unwrap();
        assert_eq!(idx.candidates(&n), vec![0]);
    }

    #[test]
    fn axis_of_conjugate() {
        let g = TriangleGroup::new(&Signature::finite(4, 5, 6).unwrap());
        let h = g.eval(&"Rp".parse().unwrap());
        let w = g.eval(&"PQq".parse().unwrap()) * g.eval(&"Q".parse().unwrap());
        let ax = axis(&h).unwrap();
        let moved = axis(&h.conjugate_by(&w)).unwrap();
        let (u, v) = ax.endpoints();
        let image = Geodesic::new(w.apply_boundary(u), w.apply_boundary(v)).unwrap();
        assert!(moved.approx_eq(&image, 1e-9));
    }

    #[test]
    fn conjugacy_planted_witness() {
        let g = TriangleGroup::new(&Signature::finite(3, 4, 5).unwrap());
        let h = g.eval(&"RRpp".parse().unwrap());
        assert_eq!(
            is_conjugate(&g, &h, &h, 2).unwrap(),
            Conjugacy::Yes(Word::empty())
        );
        let w = g.eval(&"PQR".parse().unwrap());
        let c = is_conjugate(&g, &h, &h.conjugate_by(&w), 3).unwrap();
        assert!(c.is_yes());
    }

    #[test]
    fn even_vertex_for_r2() {
        // R is a half-turn at V_r; R·s for a hyperbolic through V_r
        let g = TriangleGroup::new(&Signature::finite(2, 4, 6).unwrap());
        // two half-turns at V_r and V_p: the axis joins them
        let h = g.eval(&"RPP".parse().unwrap());
        assert!(classify(&h).unwrap().is_hyperbolic());
        assert!(axis_through_even_vertex(&g, &h, 2).unwrap());
        let g357 = TriangleGroup::new(&Signature::finite(3, 5, 7).unwrap());
        let h = g357.eval(&"Rp".parse().unwrap());
        assert!(!axis_through_even_vertex(&g357, &h, 3).unwrap());
    }

    #[test]
    fn embedding_parent_triangle() {
        for (r, p) in [(3, 4), (4, 4), (5, 5), (3, 5)] {
            let s = Signature::finite(r, p, p).unwrap();
            let e = IndexTwoEmbedding::new(&s).unwrap();
            let [a, b, c] = e.parent_angles();
            assert!(close(a, PI / 2.0, 1e-10), "{a}");
            assert!(close(b, PI / p as f64, 1e-10));
            assert!(close(c, PI / (2 * r) as f64, 1e-10));
            for w in ["R", "P", "Q", "RPq", "QQPr"] {
                let m = e.sub.eval(&w.parse().unwrap());
                assert!(e.contains(&m), "{w}");
                let (word, _) = e.fold(&m).unwrap();
                assert!(e.spell(&word).approx_eq(&m, 1e-8));
            }
            // a parent rotation that is not in the subgroup
            let half_turn = e.parent_reflections[1] * e.parent_reflections[2];
            assert!(e.fold(&half_turn).is_some());
            assert!(!e.sub.contains(&half_turn));
            assert!(e.sub.contains(&e.sub.eval(&"RRPq".parse().unwrap())));
        }
    }
}
