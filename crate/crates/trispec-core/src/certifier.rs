//! Interval branch-and-bound positivity certification on the parameter
//! region 1/2 ≤ X ≤ Y ≤ Z ≤ 1.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::combinatorics::EdgeType;
use crate::forms::{cos_params, Signature};

/// Closed interval with outward-rounded arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// A float value known only to a few ulps, widened to cover the exact one.
    pub fn around(x: f64) -> Self {
        Interval {
            lo: down(down(x)),
            hi: up(up(x)),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn sqr(self) -> Self {
        let (a, b) = (self.lo * self.lo, self.hi * self.hi);
        if self.lo >= 0.0 {
            Interval::new(down(a), up(b))
        } else if self.hi <= 0.0 {
            Interval::new(down(b), up(a))
        } else {
            Interval::new(0.0, up(a.max(b)))
        }
    }

    pub fn powi(self, n: u32) -> Self {
        match n {
            0 => Interval::point(1.0),
            1 => self,
            _ if n % 2 == 0 => self.powi(n / 2).sqr(),
            _ => self.powi(n - 1) * self,
        }
    }

    /// `None` when the interval reaches below zero.
    pub fn sqrt(self) -> Option<Self> {
        if self.lo < 0.0 {
            return None;
        }
        Some(Interval::new(
            down(self.lo.sqrt()).max(0.0),
            up(self.hi.sqrt()),
        ))
    }

    /// `None` (indeterminate) when the divisor contains zero.
    pub fn div(self, o: Interval) -> Option<Self> {
        if o.contains_zero() {
            return None;
        }
        let c = [
            self.lo / o.lo,
            self.lo / o.hi,
            self.hi / o.lo,
            self.hi / o.hi,
        ];
        Some(Interval::new(
            down(c.iter().cloned().fold(f64::INFINITY, f64::min)),
            up(c.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        ))
    }

    pub fn min(self, o: Interval) -> Self {
        Interval::new(self.lo.min(o.lo), self.hi.min(o.hi))
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(down(self.lo + o.lo), up(self.hi + o.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::new(down(self.lo - o.hi), up(self.hi - o.lo))
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        Interval::new(
            down(c.iter().cloned().fold(f64::INFINITY, f64::min)),
            up(c.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        )
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, k: f64) -> Interval {
        self * Interval::point(k)
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, k: f64) -> Interval {
        self + Interval::point(k)
    }
}

impl Sub<f64> for Interval {
    type Output = Interval;
    fn sub(self, k: f64) -> Interval {
        self - Interval::point(k)
    }
}

/// Enclosure of cos(kπ/n) (width a few ulps).
pub fn cos_pi_enclosure(k: u32, n: u32) -> Interval {
    if 2 * k == n {
        return Interval::point(0.0);
    }
    if k == 0 {
        return Interval::point(1.0);
    }
    if 3 * k == n {
        return Interval::point(0.5);
    }
    let v = (k as f64 * std::f64::consts::PI / n as f64).cos();
    Interval::around(v).min(Interval::point(1.0)).max_with(-1.0)
}

impl Interval {
    fn max_with(self, k: f64) -> Self {
        Interval::new(self.lo.max(k), self.hi.max(k))
    }
}

/// Axis-aligned box in (X, Y, Z).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub x: Interval,
    pub y: Interval,
    pub z: Interval,
}

impl Box3 {
    pub fn new(x: (f64, f64), y: (f64, f64), z: (f64, f64)) -> Self {
        Box3 {
            x: Interval::new(x.0, x.1),
            y: Interval::new(y.0, y.1),
            z: Interval::new(z.0, z.1),
        }
    }

    /// The parameter region with Z ≤ z_max.
    pub fn region(z_max: f64) -> Self {
        Box3::new((0.5, z_max), (0.5, z_max), (0.5, z_max))
    }

    pub fn around_point(p: [f64; 3], h: f64) -> Self {
        Box3::new(
            (p[0] - h, p[0] + h),
            (p[1] - h, p[1] + h),
            (p[2] - h, p[2] + h),
        )
    }

    pub fn coords(&self) -> [Interval; 3] {
        [self.x, self.y, self.z]
    }

    pub fn mid(&self) -> [f64; 3] {
        [self.x.mid(), self.y.mid(), self.z.mid()]
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        self.x.contains(p[0]) && self.y.contains(p[1]) && self.z.contains(p[2])
    }

    /// Intersect with 1/2 ≤ X ≤ Y ≤ Z; `None` if nothing remains.
    pub fn tighten(&self) -> Option<Box3> {
        let xlo = self.x.lo.max(0.5);
        let ylo = self.y.lo.max(xlo);
        let zlo = self.z.lo.max(ylo);
        let zhi = self.z.hi;
        let yhi = self.y.hi.min(zhi);
        let xhi = self.x.hi.min(yhi);
        if xlo > xhi || ylo > yhi || zlo > zhi {
            return None;
        }
        Some(Box3::new((xlo, xhi), (ylo, yhi), (zlo, zhi)))
    }

    fn split(&self) -> (Box3, Box3) {
        let w = [self.x.width(), self.y.width(), self.z.width()];
        let k = (0..3).fold(0, |best, i| if w[i] > w[best] { i } else { best });
        let mut a = *self;
        let mut b = *self;
        let c = self.coords()[k];
        let m = c.mid();
        let (lo, hi) = (Interval::new(c.lo, m), Interval::new(m, c.hi));
        match k {
            0 => {
                a.x = lo;
                b.x = hi
            }
            1 => {
                a.y = lo;
                b.y = hi
            }
            _ => {
                a.z = lo;
                b.z = hi
            }
        }
        (a, b)
    }
}

pub fn feasible_point(p: [f64; 3]) -> bool {
    0.5 <= p[0] && p[0] <= p[1] && p[1] <= p[2] && p[2] <= 1.0
}

/// Sparse trivariate polynomial with rational coefficients.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Poly3 {
    /// (i, j, k) exponents of X, Y, Z to (numerator, denominator), canonical order
    terms: BTreeMap<(u32, u32, u32), (i64, i64)>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Poly3::default()
    }

    pub fn constant(c: Ratio<i64>) -> Self {
        Poly3::zero().with_term((0, 0, 0), c)
    }

    pub fn var(k: usize) -> Self {
        let e = match k {
            0 => (1, 0, 0),
            1 => (0, 1, 0),
            _ => (0, 0, 1),
        };
        Poly3::zero().with_term(e, Ratio::from_integer(1))
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32, u32), Ratio<i64>)>>(it: I) -> Self {
        let mut p = Poly3::zero();
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    fn with_term(mut self, e: (u32, u32, u32), c: Ratio<i64>) -> Self {
        self.add_term(e, c);
        self
    }

    fn add_term(&mut self, e: (u32, u32, u32), c: Ratio<i64>) {
        let old = self.coeff(e);
        let v = old + c;
        if v == Ratio::from_integer(0) {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, (*v.numer(), *v.denom()));
        }
    }

    pub fn coeff(&self, e: (u32, u32, u32)) -> Ratio<i64> {
        self.terms
            .get(&e)
            .map(|&(n, d)| Ratio::new(n, d))
            .unwrap_or_else(|| Ratio::from_integer(0))
    }

    pub fn terms(&self) -> Vec<((u32, u32, u32), Ratio<i64>)> {
        self.terms
            .iter()
            .map(|(&e, &(n, d))| (e, Ratio::new(n, d)))
            .collect()
    }

    pub fn mul(&self, o: &Poly3) -> Poly3 {
        let mut p = Poly3::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in o.terms() {
                p.add_term((e1.0 + e2.0, e1.1 + e2.1, e1.2 + e2.2), c1 * c2);
            }
        }
        p
    }

    pub fn add(&self, o: &Poly3) -> Poly3 {
        let mut p = self.clone();
        for (e, c) in o.terms() {
            p.add_term(e, c);
        }
        p
    }

    pub fn scale(&self, k: Ratio<i64>) -> Poly3 {
        Poly3::from_terms(self.terms().into_iter().map(|(e, c)| (e, c * k)))
    }

    pub fn sub(&self, o: &Poly3) -> Poly3 {
        self.add(&o.scale(Ratio::from_integer(-1)))
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.terms()
            .iter()
            .map(|&((i, j, k), c)| {
                (*c.numer() as f64 / *c.denom() as f64)
                    * p[0].powi(i as i32)
                    * p[1].powi(j as i32)
                    * p[2].powi(k as i32)
            })
            .sum()
    }

    pub fn eval_interval(&self, b: &Box3) -> Interval {
        let mut acc = Interval::point(0.0);
        for ((i, j, k), c) in self.terms() {
            let ci = Interval::point(*c.numer() as f64)
                .div(Interval::point(*c.denom() as f64))
                .expect("nonzero denominator");
            acc = acc + ci * b.x.powi(i) * b.y.powi(j) * b.z.powi(k);
        }
        acc
    }
}

impl fmt::Display for Poly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((i, j, k), c) in self.terms().into_iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (v, e) in [("X", i), ("Y", j), ("Z", k)] {
                match e {
                    0 => {}
                    1 => write!(f, "{v}")?,
                    _ => write!(f, "{v}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

/// Expression tree; factored forms keep enclosures tight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Var(usize),
    Const(f64),
    Poly(Poly3),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn x() -> Expr {
        Expr::Var(0)
    }
    pub fn y() -> Expr {
        Expr::Var(1)
    }
    pub fn z() -> Expr {
        Expr::Var(2)
    }
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }
    pub fn plus(self, o: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(o))
    }
    pub fn minus(self, o: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(o))
    }
    pub fn times(self, o: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(o))
    }
    pub fn over(self, o: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(o))
    }
    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        match self {
            Expr::Var(k) => p[*k],
            Expr::Const(v) => *v,
            Expr::Poly(q) => q.eval(p),
            Expr::Add(a, b) => a.eval(p) + b.eval(p),
            Expr::Sub(a, b) => a.eval(p) - b.eval(p),
            Expr::Mul(a, b) => a.eval(p) * b.eval(p),
            Expr::Div(a, b) => a.eval(p) / b.eval(p),
            Expr::Sqrt(a) => a.eval(p).sqrt(),
        }
    }

    /// Enclosure of the range over the box; `None` is indeterminate.
    pub fn eval_interval(&self, b: &Box3) -> Option<Interval> {
        Some(match self {
            Expr::Var(k) => b.coords()[*k],
            Expr::Const(v) => Interval::point(*v),
            Expr::Poly(q) => q.eval_interval(b),
            Expr::Add(x, y) => x.eval_interval(b)? + y.eval_interval(b)?,
            Expr::Sub(x, y) => x.eval_interval(b)? - y.eval_interval(b)?,
            Expr::Mul(x, y) => x.eval_interval(b)? * y.eval_interval(b)?,
            Expr::Div(x, y) => x.eval_interval(b)?.div(y.eval_interval(b)?)?,
            Expr::Sqrt(x) => x.eval_interval(b)?.sqrt()?,
        })
    }
}

/// Anything the branch-and-bound can bound.
pub trait Bounded: Sync {
    fn bound(&self, b: &Box3) -> Option<Interval>;
    /// pointwise value; `None` when undefined or vacuous at the point
    fn at(&self, p: [f64; 3]) -> Option<f64>;
}

impl Bounded for Expr {
    fn bound(&self, b: &Box3) -> Option<Interval> {
        self.eval_interval(b)
    }
    fn at(&self, p: [f64; 3]) -> Option<f64> {
        let v = self.eval(p);
        v.is_finite().then_some(v)
    }
}

impl Bounded for Poly3 {
    fn bound(&self, b: &Box3) -> Option<Interval> {
        Some(self.eval_interval(b))
    }
    fn at(&self, p: [f64; 3]) -> Option<f64> {
        Some(self.eval(p))
    }
}

/// Declared zero locus, removed with an eps-neighbourhood.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Exclusion {
    /// L∞ cube of half-width eps about the point
    Point([f64; 3]),
    /// |a·(X,Y,Z) + b| ≤ eps |a|
    Plane { a: [f64; 3], b: f64 },
}

impl Exclusion {
    pub fn signature_point(sig: &Signature) -> Exclusion {
        let c = cos_params(sig);
        Exclusion::Point([c.x, c.y, c.z])
    }

    fn covers_box(&self, b: &Box3, eps: f64) -> bool {
        match self {
            Exclusion::Point(p) => {
                let c = b.coords();
                (0..3).all(|i| c[i].lo >= p[i] - eps && c[i].hi <= p[i] + eps)
            }
            Exclusion::Plane { a, b: k } => {
                let form = Interval::point(*k) + b.x * a[0] + b.y * a[1] + b.z * a[2];
                let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
                form.lo >= -eps * n && form.hi <= eps * n
            }
        }
    }

    fn covers_point(&self, p: [f64; 3], eps: f64) -> bool {
        match self {
            Exclusion::Point(q) => (0..3).all(|i| (p[i] - q[i]).abs() <= eps),
            Exclusion::Plane { a, b } => {
                let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
                (a[0] * p[0] + a[1] * p[1] + a[2] * p[2] + b).abs() <= eps * n
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Positive,
    FailsAt { point: [f64; 3], value: f64 },
    Inconclusive { depth: usize },
}

impl Verdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, Verdict::Positive)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertOutcome {
    pub verdict: Verdict,
    pub leaves: usize,
    pub excluded_leaves: usize,
    pub indeterminate_evals: usize,
    /// smallest interval lower bound over the positive leaves
    pub min_lower_bound: f64,
    /// leaf boxes at the failure or inconclusive boundary (capped)
    pub boundary: Vec<Box3>,
}

#[derive(Clone, Debug)]
pub struct CertOptions {
    pub eps: f64,
    pub max_depth: usize,
    /// give up after this many leaves
    pub max_leaves: usize,
    pub boundary_cap: usize,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions {
            eps: 1e-3,
            max_depth: 40,
            max_leaves: 20_000_000,
            boundary_cap: 64,
        }
    }
}

struct Pending {
    lo: f64,
    seq: u64,
    depth: usize,
    b: Box3,
}

impl PartialEq for Pending {
    fn eq(&self, o: &Self) -> bool {
        self.seq == o.seq
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Pending {
    // max-heap: smallest lower bound first, then oldest
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.lo.total_cmp(&self.lo).then(o.seq.cmp(&self.seq))
    }
}

/// Bisection, worst lower bound first. Positive only when every surviving
/// leaf has a lower bound > 0. Without an early failure the explored tree is
/// the same in any order, so leaf counts are reproducible.
pub fn certify_positive(
    f: &dyn Bounded,
    region: &Box3,
    exclusions: &[Exclusion],
    opts: &CertOptions,
) -> CertOutcome {
    let mut out = CertOutcome {
        verdict: Verdict::Positive,
        leaves: 0,
        excluded_leaves: 0,
        indeterminate_evals: 0,
        min_lower_bound: f64::INFINITY,
        boundary: Vec::new(),
    };
    let mut inconclusive = false;
    let mut seq = 0u64;
    let mut heap = std::collections::BinaryHeap::new();
    let mut push = |heap: &mut std::collections::BinaryHeap<Pending>,
                    out: &mut CertOutcome,
                    b: Box3,
                    depth: usize| {
        let Some(b) = b.tighten() else { return };
        if exclusions.iter().any(|e| e.covers_box(&b, opts.eps)) {
            out.excluded_leaves += 1;
            return;
        }
        let bound = f.bound(&b);
        match bound {
            None => out.indeterminate_evals += 1,
            Some(iv) if iv.lo > 0.0 => {
                out.leaves += 1;
                out.min_lower_bound = out.min_lower_bound.min(iv.lo);
                return;
            }
            _ => {}
        }
        seq += 1;
        heap.push(Pending {
            lo: bound.map(|i| i.lo).unwrap_or(f64::NEG_INFINITY),
            seq,
            depth,
            b,
        });
    };
    push(&mut heap, &mut out, *region, 0);
    while let Some(Pending { depth, b, .. }) = heap.pop() {
        let m = b.mid();
        if feasible_point(m) && !exclusions.iter().any(|e| e.covers_point(m, opts.eps)) {
            if let Some(v) = f.at(m) {
                if v < 0.0 {
                    out.leaves += 1;
                    out.boundary.push(b);
                    out.boundary.extend(
                        heap.into_sorted_vec()
                            .iter()
                            .rev()
                            .take(opts.boundary_cap.saturating_sub(1))
                            .map(|p| p.b),
                    );
                    out.verdict = Verdict::FailsAt { point: m, value: v };
                    return out;
                }
            }
        }
        if depth >= opts.max_depth || out.leaves >= opts.max_leaves {
            out.leaves += 1;
            inconclusive = true;
            if out.boundary.len() < opts.boundary_cap {
                out.boundary.push(b);
            }
            continue;
        }
        let (lo, hi) = b.split();
        push(&mut heap, &mut out, lo, depth + 1);
        push(&mut heap, &mut out, hi, depth + 1);
    }
    if inconclusive {
        out.verdict = Verdict::Inconclusive {
            depth: opts.max_depth,
        };
    }
    out
}

/// A combinatorial type of length 5 over {r, p}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeTuple(pub [EdgeType; 5]);

impl TypeTuple {
    pub fn parse(s: &str) -> Option<TypeTuple> {
        let v: Vec<EdgeType> = s
            .chars()
            .filter(|c| c.is_alphabetic())
            .map(|c| match c {
                'r' | 'R' => Some(EdgeType::R),
                'p' | 'P' => Some(EdgeType::P),
                _ => None,
            })
            .collect::<Option<_>>()?;
        Some(TypeTuple(v.try_into().ok()?))
    }

    pub fn reversed(&self) -> TypeTuple {
        let mut a = self.0;
        a.reverse();
        TypeTuple(a)
    }

    pub fn swapped(&self) -> TypeTuple {
        TypeTuple(self.0.map(|e| match e {
            EdgeType::R => EdgeType::P,
            EdgeType::P => EdgeType::R,
        }))
    }

    pub fn is_pure(&self) -> bool {
        self.0.iter().all(|e| *e == self.0[0])
    }

    pub fn all() -> Vec<TypeTuple> {
        (0..32u32)
            .map(|m| {
                TypeTuple(std::array::from_fn(|i| {
                    if m >> (4 - i) & 1 == 0 {
                        EdgeType::R
                    } else {
                        EdgeType::P
                    }
                }))
            })
            .collect()
    }
}

impl fmt::Display for TypeTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<&str> = self
            .0
            .iter()
            .map(|e| match e {
                EdgeType::R => "r",
                EdgeType::P => "p",
            })
            .collect();
        write!(f, "({})", s.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub studied: [TypeTuple; 2],
    pub associated: Option<[TypeTuple; 2]>,
}

/// The reduction table: studied types and the reversed types they stand for.
pub fn type_case_list() -> Vec<CaseRow> {
    let rows: [(&str, &str, Option<(&str, &str)>); 9] = [
        ("rrrrp", "ppppr", Some(("prrrr", "rpppp"))),
        ("rrrpp", "ppprr", Some(("pprrr", "rrppp"))),
        ("rpppr", "prrrp", None),
        ("rpprr", "prrpp", Some(("rrppr", "pprrp"))),
        ("rrrpr", "ppprp", Some(("rprrr", "prppp"))),
        ("rrprr", "pprpp", None),
        ("rprrp", "prppr", Some(("prrpr", "rpprp"))),
        ("rrprp", "pprpr", Some(("prprr", "rprpp"))),
        ("rprpr", "prprp", None),
    ];
    let t = |s: &str| TypeTuple::parse(s).expect("table entry");
    rows.iter()
        .map(|(a, b, assoc)| CaseRow {
            studied: [t(a), t(b)],
            associated: assoc.map(|(c, d)| [t(c), t(d)]),
        })
        .collect()
}

pub fn studied_types() -> Vec<TypeTuple> {
    type_case_list().iter().flat_map(|r| r.studied).collect()
}

/// Which sphere-5 vertex of a type the certificate bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexMode {
    /// minimum over every orientation pattern that can be geodesic on the box
    Geodesic,
    /// the vertex with every letter turning the same way
    Generic,
}

/// cosh d(q*, y) − cosh C*(l3) for the vertices y of a type.
#[derive(Clone, Debug)]
pub struct Rho5Expr {
    pub tau: TypeTuple,
    pub mode: VertexMode,
    patterns: Vec<Pattern>,
}

#[derive(Clone, Debug)]
struct Pattern {
    letters: [(EdgeType, i8); 5],
    /// (type, k) for each run
    runs: Vec<(EdgeType, usize)>,
    /// lengths of maximal same-sign alternations (≥ 2)
    alternations: Vec<usize>,
}

fn run_lengths(tau: &TypeTuple) -> Vec<(EdgeType, usize)> {
    let mut out: Vec<(EdgeType, usize)> = Vec::new();
    for &e in &tau.0 {
        match out.last_mut() {
            Some((t, k)) if *t == e => *k += 1,
            _ => out.push((e, 1)),
        }
    }
    out
}

fn alternation_segments(w: &[(EdgeType, i8); 5]) -> Vec<(usize, usize)> {
    let mut segs = Vec::new();
    let mut i = 0;
    while i < 5 {
        let mut j = i;
        while j + 1 < 5 && w[j + 1].0 != w[j].0 && w[j + 1].1 == w[j].1 {
            j += 1;
        }
        if j > i {
            segs.push((i, j));
            i = j + 1;
        } else {
            i += 1;
        }
    }
    segs
}

impl Pattern {
    fn all(tau: &TypeTuple) -> Vec<Pattern> {
        let runs = run_lengths(tau);
        let n = runs.len();
        (0..1u32 << n)
            .map(|mask| {
                let mut letters = [(EdgeType::R, 1i8); 5];
                let mut pos = 0;
                for (ri, &(t, k)) in runs.iter().enumerate() {
                    let s = if mask >> ri & 1 == 0 { 1 } else { -1 };
                    for _ in 0..k {
                        letters[pos] = (t, s);
                        pos += 1;
                    }
                }
                let alternations = alternation_segments(&letters)
                    .into_iter()
                    .map(|(i, j)| j - i + 1)
                    .collect();
                Pattern {
                    letters,
                    runs: runs.clone(),
                    alternations,
                }
            })
            .collect()
    }

    /// Could the word be geodesic somewhere in the box?
    fn possible_on(&self, b: &Box3) -> bool {
        let runs_ok = self.runs.iter().all(|&(t, k)| {
            let c = match t {
                EdgeType::R => b.x,
                EdgeType::P => b.y,
            };
            // order ≥ 2k  ⇔  cos(π/order) ≥ cos(π/2k)
            c.hi >= cos_pi_enclosure(1, 2 * k as u32).lo
        });
        runs_ok
            && self
                .alternations
                .iter()
                .all(|&m| b.z.hi >= cos_pi_enclosure(1, m as u32).lo)
    }

    /// Exact geodesic test at a point, real orders allowed.
    fn valid_at(&self, p: [f64; 3]) -> bool {
        let order = |c: f64| std::f64::consts::PI / c.clamp(-1.0, 1.0).acos();
        let (r, pp, q) = (order(p[0]), order(p[1]), order(p[2]));
        let ord = |t: EdgeType| if t == EdgeType::R { r } else { pp };
        let tol = 1e-9;
        if self
            .runs
            .iter()
            .any(|&(t, k)| 2.0 * k as f64 > ord(t) + tol)
        {
            return false;
        }
        let w = &self.letters;
        for (i, j) in alternation_segments(w) {
            let m = (j - i + 1) as f64;
            if m > q + tol {
                return false;
            }
            if (m - q).abs() <= tol {
                // a full half-face: the rewritten half turns the other way and
                // lengthens the neighbouring runs
                let s = w[i].1;
                for (nb, dir) in [(j as isize + 1, 1isize), (i as isize - 1, -1)] {
                    if !(0..5).contains(&nb) {
                        continue;
                    }
                    let nbu = nb as usize;
                    let prev = (nb - dir) as usize;
                    if w[nbu].1 == -s && w[nbu].0 != w[prev].0 {
                        let mut k = 0;
                        let mut x = nb;
                        while (0..5).contains(&x) && w[x as usize] == w[nbu] {
                            k += 1;
                            x += dir;
                        }
                        if 2.0 * (k + 1) as f64 > ord(w[nbu].0) + tol {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

type IMat = [Interval; 4];

fn imul(a: &IMat, b: &IMat) -> IMat {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// The generator matrices, q* = i t and cosh C*(l3) over a box.
struct Frame {
    r: IMat,
    ri: IMat,
    p: IMat,
    pi: IMat,
    t: Interval,
    c_star: Interval,
}

fn frame(b: &Box3) -> Option<Frame> {
    let (x, y, z) = (b.x, b.y, b.z);
    let one = Interval::point(1.0);
    let delta = x.sqr() + y.sqr() + z.sqr() + x * y * z * 2.0 - 1.0;
    let delta = Interval::new(delta.lo.max(0.0), delta.hi.max(0.0));
    let sx = (one - x.sqr()).sqrt()?;
    let sy = (one - y.sqr()).sqrt()?;
    let ca = (z + x * y).div(sx * sy)?;
    let ca = Interval::new(ca.lo.max(1.0), ca.hi.max(1.0));
    let ea = ca + (ca.sqr() - 1.0).max_with(0.0).sqrt()?;
    let sh2 = delta.div((one - x) * (one + y) * (one + z) * 2.0)?;
    let t = sh2.sqrt()? + (sh2 + 1.0).sqrt()?;
    let cc = delta.div((one + x) * (one + y) * 2.0)? + 1.0;
    let l3 = y * z * 2.0 + x;
    let c_star = cc.sqr() * (l3.sqr() * 2.0 - 2.0) + 1.0;
    let ps = ea * sy;
    let pt = sy.div(ea)?;
    Some(Frame {
        r: [x, sx, -sx, x],
        ri: [x, -sx, sx, x],
        p: [y, ps, -pt, y],
        pi: [y, -ps, pt, y],
        t,
        c_star,
    })
}

fn node_cosh(fr: &Frame, w: &[(EdgeType, i8); 5]) -> Option<Interval> {
    let mut m = match w[0] {
        (EdgeType::R, 1) => fr.r,
        (EdgeType::R, _) => fr.ri,
        (EdgeType::P, 1) => fr.p,
        (EdgeType::P, _) => fr.pi,
    };
    for &l in &w[1..] {
        let g = match l {
            (EdgeType::R, 1) => &fr.r,
            (EdgeType::R, _) => &fr.ri,
            (EdgeType::P, 1) => &fr.p,
            (EdgeType::P, _) => &fr.pi,
        };
        m = imul(&m, g);
    }
    let s = m[0].sqr() + m[1].div(fr.t)?.sqr() + (m[2] * fr.t).sqr() + m[3].sqr();
    Some(s * 0.5)
}

impl Rho5Expr {
    pub fn new(tau: TypeTuple, mode: VertexMode) -> Self {
        let patterns = match mode {
            VertexMode::Geodesic => Pattern::all(&tau),
            VertexMode::Generic => Pattern::all(&tau)
                .into_iter()
                .filter(|p| p.letters.iter().all(|l| l.1 == 1))
                .collect(),
        };
        Rho5Expr {
            tau,
            mode,
            patterns,
        }
    }

    /// Pointwise cosh of the nearest vertex of this type (no C* subtracted).
    pub fn vertex_cosh(&self, p: [f64; 3]) -> Option<f64> {
        let b = Box3::new((p[0], p[0]), (p[1], p[1]), (p[2], p[2]));
        let fr = frame(&b)?;
        self.patterns
            .iter()
            .filter(|pt| self.mode == VertexMode::Generic || pt.valid_at(p))
            .filter_map(|pt| node_cosh(&fr, &pt.letters).map(|v| v.mid()))
            .min_by(f64::total_cmp)
    }

    pub fn c_star_at(p: [f64; 3]) -> Option<f64> {
        let b = Box3::new((p[0], p[0]), (p[1], p[1]), (p[2], p[2]));
        frame(&b).map(|f| f.c_star.mid())
    }
}

impl Bounded for Rho5Expr {
    fn bound(&self, b: &Box3) -> Option<Interval> {
        let fr = frame(b)?;
        let mut acc: Option<Interval> = None;
        for pt in &self.patterns {
            if self.mode == VertexMode::Geodesic && !pt.possible_on(b) {
                continue;
            }
            let v = node_cosh(&fr, &pt.letters)?;
            acc = Some(match acc {
                None => v,
                Some(a) => a.min(v),
            });
        }
        match acc {
            // no vertex of this type on the box: vacuously fine
            None => Some(Interval::point(1.0)),
            Some(a) => Some(a - fr.c_star),
        }
    }

    fn at(&self, p: [f64; 3]) -> Option<f64> {
        Some(self.vertex_cosh(p)? - Rho5Expr::c_star_at(p)?)
    }
}

pub fn exceptional_signatures() -> [Signature; 3] {
    [
        Signature::finite(3, 4, 4).expect("hyperbolic"),
        Signature::finite(4, 4, 4).expect("hyperbolic"),
        Signature::finite(5, 5, 5).expect("hyperbolic"),
    ]
}

/// The exceptional points and the Euclidean corner (1/2, 1/2, 1/2).
pub fn default_exclusions() -> Vec<Exclusion> {
    let mut v: Vec<Exclusion> = exceptional_signatures()
        .iter()
        .map(Exclusion::signature_point)
        .collect();
    v.push(Exclusion::Point([0.5, 0.5, 0.5]));
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeVerdict {
    pub studied: String,
    pub associated: Option<String>,
    pub outcome: CertOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub mode: VertexMode,
    pub region: Box3,
    pub eps: f64,
    pub max_depth: usize,
    pub exclusions: Vec<Exclusion>,
    pub types: Vec<TypeVerdict>,
}

impl CertReport {
    pub fn all_positive(&self) -> bool {
        self.types.iter().all(|t| t.outcome.verdict.is_positive())
    }

    pub fn verdict_for(&self, tau: &str) -> Option<&Verdict> {
        let t = TypeTuple::parse(tau)?.to_string();
        self.types
            .iter()
            .find(|v| v.studied == t)
            .map(|v| &v.outcome.verdict)
    }
}

/// Certify cosh ρ*(5) > cosh C*(l3) type by type over `region`.
pub fn rho5_certificate(
    region: &Box3,
    mode: VertexMode,
    exclusions: &[Exclusion],
    opts: &CertOptions,
) -> CertReport {
    rho5_certificate_for(&studied_types(), region, mode, exclusions, opts)
}

pub fn rho5_certificate_for(
    types: &[TypeTuple],
    region: &Box3,
    mode: VertexMode,
    exclusions: &[Exclusion],
    opts: &CertOptions,
) -> CertReport {
    let table = type_case_list();
    let associated = |t: &TypeTuple| {
        table.iter().find_map(|row| {
            let k = row.studied.iter().position(|s| s == t)?;
            Some(row.associated.map(|a| a[k].to_string()))
        })
    };
    // collect preserves order, so the report is deterministic
    let types: Vec<TypeVerdict> = types
        .par_iter()
        .map(|t| {
            let e = Rho5Expr::new(*t, mode);
            TypeVerdict {
                studied: t.to_string(),
                associated: associated(t).flatten(),
                outcome: certify_positive(&e, region, exclusions, opts),
            }
        })
        .collect();
    CertReport {
        mode,
        region: *region,
        eps: opts.eps,
        max_depth: opts.max_depth,
        exclusions: exclusions.to_vec(),
        types,
    }
}

/// The default region: Z ≤ 1 − eps.
pub fn default_region(eps: f64) -> Box3 {
    Box3::region(1.0 - eps)
}

/// (2Y − 1)(Z − X) with zero set {Y = 1/2} ∪ {X = Z}.
pub fn l3_minus_l1_part() -> (Expr, Vec<Exclusion>) {
    let e = Expr::y()
        .times(Expr::c(2.0))
        .minus(Expr::c(1.0))
        .times(Expr::z().minus(Expr::x()));
    let ex = vec![
        Exclusion::Plane {
            a: [0.0, 1.0, 0.0],
            b: -0.5,
        },
        Exclusion::Plane {
            a: [-1.0, 0.0, 1.0],
            b: 0.0,
        },
    ];
    (e, ex)
}

/// (2Z − 1)(X − Y) with zero set {Z = 1/2} ∪ {X = Y}, as written.
pub fn l2_minus_l3_literal() -> (Expr, Vec<Exclusion>) {
    let e = Expr::z()
        .times(Expr::c(2.0))
        .minus(Expr::c(1.0))
        .times(Expr::x().minus(Expr::y()));
    (e, l3_l2_zero_set())
}

/// (2Z − 1)(Y − X) = L3 − L2, the sign-definite orientation.
pub fn l3_minus_l2() -> (Expr, Vec<Exclusion>) {
    let e = Expr::z()
        .times(Expr::c(2.0))
        .minus(Expr::c(1.0))
        .times(Expr::y().minus(Expr::x()));
    (e, l3_l2_zero_set())
}

fn l3_l2_zero_set() -> Vec<Exclusion> {
    vec![
        Exclusion::Plane {
            a: [0.0, 0.0, 1.0],
            b: -0.5,
        },
        Exclusion::Plane {
            a: [1.0, -1.0, 0.0],
            b: 0.0,
        },
    ]
}

/// L_i as a Poly3, in the order of the L-table.
pub fn l_poly(i: usize) -> Poly3 {
    let r = |n: i64| Ratio::from_integer(n);
    let t =
        |terms: &[((u32, u32, u32), i64)]| Poly3::from_terms(terms.iter().map(|&(e, c)| (e, r(c))));
    match i {
        0 => t(&[((2, 1, 0), 4), ((1, 0, 1), 2), ((0, 1, 0), -1)]),
        1 => t(&[((1, 1, 0), 2), ((0, 0, 1), 1)]),
        2 => t(&[((1, 0, 1), 2), ((0, 1, 0), 1)]),
        3 => t(&[((0, 1, 1), 2), ((1, 0, 0), 1)]),
        4 => t(&[((1, 2, 0), 4), ((0, 1, 1), 2), ((1, 0, 0), -1)]),
        5 => t(&[((2, 0, 1), 4), ((1, 1, 0), 2), ((0, 0, 1), -1)]),
        6 => t(&[
            ((3, 1, 0), 8),
            ((2, 0, 1), 4),
            ((1, 1, 0), -4),
            ((0, 0, 1), -1),
        ]),
        7 => t(&[((0, 2, 1), 4), ((1, 1, 0), 2), ((0, 0, 1), -1)]),
        8 => t(&[
            ((1, 3, 0), 8),
            ((0, 2, 1), 4),
            ((1, 1, 0), -4),
            ((0, 0, 1), -1),
        ]),
        9 => t(&[
            ((2, 2, 0), 8),
            ((1, 1, 1), 4),
            ((2, 0, 0), -2),
            ((0, 2, 0), -2),
            ((0, 0, 0), 1),
        ]),
        10 => t(&[
            ((1, 1, 1), 4),
            ((0, 0, 2), 2),
            ((0, 2, 0), 2),
            ((0, 0, 0), -1),
        ]),
        11 => t(&[
            ((1, 1, 1), 4),
            ((2, 0, 0), 2),
            ((0, 2, 0), 2),
            ((0, 0, 2), 2),
            ((0, 0, 0), -1),
        ]),
        12 => t(&[
            ((1, 1, 1), 4),
            ((2, 0, 0), 2),
            ((0, 0, 2), 2),
            ((0, 0, 0), -1),
        ]),
        13 => t(&[
            ((1, 1, 1), 4),
            ((2, 0, 0), 2),
            ((0, 2, 0), 2),
            ((0, 0, 0), -1),
        ]),
        _ => panic!("L-table index {i} out of range"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::rho_star;
    use crate::forms::{c_star_bound, canonical_l0, l_table_xyz, rprpr_vertex_cosh, CosTriple};

    #[test]
    fn interval_basics() {
        let one = Interval::point(1.0);
        assert!(one.lo <= 1.0 && one.hi >= 1.0);
        let b = Box3::new((0.0, 1.0), (0.0, 1.0), (0.0, 1.0));
        let xy = b.x * b.y;
        assert!(xy.lo <= 0.0 && xy.hi >= 1.0);
        assert!(Interval::new(-1.0, 1.0).sqr().lo == 0.0);
        assert!(one.div(Interval::new(-1.0, 1.0)).is_none());
        let s = Interval::point(2.0).sqrt().unwrap();
        assert!(s.lo < std::f64::consts::SQRT_2 && s.hi > std::f64::consts::SQRT_2);
    }

    #[test]
    fn factored_enclosure() {
        let (e, _) = l3_minus_l1_part();
        let b = Box3::new((0.5, 0.6), (0.6, 0.7), (0.7, 0.8));
        let iv = e.eval_interval(&b).unwrap();
        assert!(iv.lo >= 0.02 - 1e-12 && iv.hi <= 0.12 + 1e-12, "{iv:?}");
    }

    #[test]
    fn table_counts() {
        let t = type_case_list();
        assert_eq!(t.len(), 9);
        let studied: Vec<TypeTuple> = t.iter().flat_map(|r| r.studied).collect();
        let assoc: Vec<TypeTuple> = t.iter().filter_map(|r| r.associated).flatten().collect();
        assert_eq!(studied.len(), 18);
        assert_eq!(assoc.len(), 12);
        let pure = TypeTuple::all().into_iter().filter(|t| t.is_pure()).count();
        assert_eq!(assoc.len() + pure, 14);
        // every associated type is the reversal of its studied partner
        for row in &t {
            if let Some(a) = row.associated {
                assert_eq!(a[0], row.studied[0].reversed());
                assert_eq!(a[1], row.studied[1].reversed());
            } else {
                assert_eq!(row.studied[0], row.studied[0].reversed());
            }
        }
        let mut all: Vec<TypeTuple> = studied.iter().chain(assoc.iter()).cloned().collect();
        all.extend(TypeTuple::all().into_iter().filter(|t| t.is_pure()));
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 32);
    }

    #[test]
    fn l_poly_matches_table() {
        let p = [0.55, 0.7, 0.9];
        let t = l_table_xyz(CosTriple {
            x: p[0],
            y: p[1],
            z: p[2],
        });
        for i in 0..14 {
            assert!((l_poly(i).eval(p) - t.get(i)).abs() < 1e-13, "L{i}");
        }
        let d = l_poly(3).sub(&l_poly(2));
        let f = Poly3::from_terms([
            ((0, 1, 1), Ratio::from_integer(2)),
            ((1, 0, 1), Ratio::from_integer(-2)),
            ((0, 1, 0), Ratio::from_integer(-1)),
            ((1, 0, 0), Ratio::from_integer(1)),
        ]);
        assert_eq!(d, f);
    }

    #[test]
    fn generic_vertex_closed_form() {
        let e = Rho5Expr::new(TypeTuple::parse("rprpr").unwrap(), VertexMode::Generic);
        for p in [[0.5, 0.7, 0.8], [0.6, 0.75, 0.95], [0.7071, 0.8, 0.81]] {
            let v = e.vertex_cosh(p).unwrap();
            assert!((v - rprpr_vertex_cosh(p[0], p[1], p[2])).abs() < 1e-9 * v);
        }
    }

    #[test]
    fn geodesic_vertices_match_graph() {
        // min over all mixed types reproduces ρ*(5) from the star graph
        for (r, p, q) in [
            (3, 4, 5),
            (3, 5, 7),
            (4, 5, 6),
            (4, 4, 5),
            (3, 3, 7),
            (5, 6, 6),
        ] {
            let s = Signature::finite(r, p, q).unwrap();
            let c = cos_params(&s);
            let pt = [c.x, c.y, c.z];
            let m = TypeTuple::all()
                .into_iter()
                .filter(|t| !t.is_pure())
                .filter_map(|t| Rho5Expr::new(t, VertexMode::Geodesic).vertex_cosh(pt))
                .fold(f64::INFINITY, f64::min);
            let g = rho_star(&s, 5).unwrap().cosh;
            assert!((m - g).abs() < 1e-8 * g, "{s}: {m} vs {g}");
            let cs = Rho5Expr::c_star_at(pt).unwrap();
            assert!((cs - c_star_bound(&s, canonical_l0(&s))).abs() < 1e-9 * cs);
        }
    }

    #[test]
    fn small_certificates() {
        let (e, ex) = l3_minus_l1_part();
        let out = certify_positive(&e, &Box3::region(1.0), &ex, &CertOptions::default());
        assert!(out.verdict.is_positive(), "{:?}", out.verdict);
        let f = l_poly(1).sub(&Poly3::constant(Ratio::from_integer(1)));
        let out = certify_positive(
            &f,
            &Box3::region(1.0),
            &[Exclusion::Point([0.5, 0.5, 0.5])],
            &CertOptions::default(),
        );
        assert!(out.verdict.is_positive(), "{:?}", out.verdict);
        let (e, ex) = l2_minus_l3_literal();
        let out = certify_positive(&e, &Box3::region(1.0), &ex, &CertOptions::default());
        assert!(matches!(out.verdict, Verdict::FailsAt { .. }));
    }

    #[test]
    fn deterministic_leaves() {
        let f = l_poly(1).sub(&Poly3::constant(Ratio::from_integer(1)));
        let ex = [Exclusion::Point([0.5, 0.5, 0.5])];
        let a = certify_positive(&f, &Box3::region(1.0), &ex, &CertOptions::default());
        let b = certify_positive(&f, &Box3::region(1.0), &ex, &CertOptions::default());
        assert_eq!(a, b);
    }
}
