//! The graph E* of q*-contact points, its combinatorial distance D*,
//! the level λ*, the radii ρ*(n), the level ≤ 4 length catalog and the
//! r = 2 graph radii ρ(n).

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::forms::{
    contact_data, delta_fn, delta_prime, l_table, r2_quantities, side_coshes, Order, Signature,
};
use crate::group::{Letter, MotionIndex, TriangleGroup, Word};
use crate::hyperbolic::{classify, cosh_dist, Motion, MotionClass, UhpPoint};

pub const MAX_STAR_RADIUS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeType {
    R,
    P,
}

/// Which kinds of minimal paths from the base reach a node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathFlags {
    pub pure_r: bool,
    pub pure_p: bool,
    pub mixed: bool,
}

impl PathFlags {
    fn step(self, t: EdgeType, from_base: bool) -> PathFlags {
        if from_base {
            return PathFlags {
                pure_r: t == EdgeType::R,
                pure_p: t == EdgeType::P,
                mixed: false,
            };
        }
        PathFlags {
            pure_r: self.pure_r && t == EdgeType::R,
            pure_p: self.pure_p && t == EdgeType::P,
            mixed: self.mixed
                || (self.pure_r && t == EdgeType::P)
                || (self.pure_p && t == EdgeType::R),
        }
    }

    fn union(self, o: PathFlags) -> PathFlags {
        PathFlags {
            pure_r: self.pure_r || o.pure_r,
            pure_p: self.pure_p || o.pure_p,
            mixed: self.mixed || o.mixed,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarNode {
    pub id: usize,
    pub position: UhpPoint,
    /// the element g with position g·q*
    pub element: Motion,
    pub word: Word,
    pub d_star: usize,
    pub parent: Option<usize>,
    pub parent_edge: Option<EdgeType>,
    pub flags: PathFlags,
}

impl StarNode {
    /// Type sequence of the stored path from the base.
    pub fn type_path(&self) -> Vec<EdgeType> {
        self.word
            .0
            .iter()
            .map(|l| match l {
                Letter::R | Letter::RInv => EdgeType::R,
                _ => EdgeType::P,
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct StarBall {
    pub sig: Signature,
    pub radius: usize,
    pub nodes: Vec<StarNode>,
    /// neighbours inside the ball with edge types
    pub adjacency: Vec<Vec<(usize, EdgeType)>>,
    pub d_r: f64,
    pub d_p: f64,
    index: MotionIndex,
    group: TriangleGroup,
}

const STEPS: [(Letter, EdgeType); 4] = [
    (Letter::R, EdgeType::R),
    (Letter::RInv, EdgeType::R),
    (Letter::P, EdgeType::P),
    (Letter::PInv, EdgeType::P),
];

/// All q*-points within combinatorial distance `n` of the base q*.
pub fn build_star_ball(sig: &Signature, n: usize) -> Result<StarBall> {
    build_star_ball_capped(sig, n, MAX_STAR_RADIUS)
}

pub fn build_star_ball_capped(sig: &Signature, n: usize, cap: usize) -> Result<StarBall> {
    if n > cap {
        return Err(Error::ResourceCap {
            what: "star ball radius",
            requested: n,
            cap,
            estimate: 1 + 4 * (3usize.pow(n as u32) - 1) / 2,
        });
    }
    let group = TriangleGroup::new(sig);
    let base = group.real.q_star;
    let cd = contact_data(sig);
    let mut ball = StarBall {
        sig: *sig,
        radius: n,
        nodes: vec![StarNode {
            id: 0,
            position: base,
            element: Motion::identity(),
            word: Word::empty(),
            d_star: 0,
            parent: None,
            parent_edge: None,
            flags: PathFlags::default(),
        }],
        adjacency: vec![Vec::new()],
        d_r: cd.sinh2_dr.sqrt().asinh(),
        d_p: cd.sinh2_dp.sqrt().asinh(),
        index: MotionIndex::new(),
        group,
    };
    ball.index.insert(&Motion::identity(), 0);
    let mut frontier = vec![0usize];
    for depth in 1..=n {
        let mut next: Vec<usize> = Vec::new();
        for &id in &frontier {
            for (l, t) in STEPS {
                let g = ball.nodes[id].element.compose(ball.group.letter(l));
                let flags = ball.nodes[id].flags.step(t, id == 0);
                match ball.lookup(&g) {
                    Some(j) => {
                        // another minimal path into a node of this layer
                        if ball.nodes[j].d_star == depth {
                            ball.nodes[j].flags = ball.nodes[j].flags.union(flags);
                        }
                    }
                    None => {
                        let j = ball.nodes.len();
                        let mut word = ball.nodes[id].word.clone();
                        word.0.push(l);
                        ball.nodes.push(StarNode {
                            id: j,
                            position: g.apply(base),
                            element: g,
                            word,
                            d_star: depth,
                            parent: Some(id),
                            parent_edge: Some(t),
                            flags,
                        });
                        ball.adjacency.push(Vec::new());
                        ball.index.insert(&g, j as u32);
                        next.push(j);
                    }
                }
            }
        }
        frontier = next;
    }
    // adjacency among stored nodes
    for id in 0..ball.nodes.len() {
        for (l, t) in STEPS {
            let g = ball.nodes[id].element.compose(ball.group.letter(l));
            if let Some(j) = ball.lookup(&g) {
                ball.adjacency[id].push((j, t));
            }
        }
    }
    Ok(ball)
}

impl StarBall {
    fn lookup(&self, g: &Motion) -> Option<usize> {
        self.index
            .candidates(g)
            .into_iter()
            .find(|&j| self.nodes[j as usize].element.approx_eq(g, 1e-8))
            .map(|j| j as usize)
    }

    pub fn base(&self) -> &StarNode {
        &self.nodes[0]
    }

    pub fn group(&self) -> &TriangleGroup {
        &self.group
    }

    pub fn sphere(&self, n: usize) -> impl Iterator<Item = &StarNode> {
        self.nodes.iter().filter(move |x| x.d_star == n)
    }

    /// Node holding the q*-point `g·q*`, if inside the ball.
    pub fn node_of(&self, g: &Motion) -> Option<usize> {
        self.lookup(g)
    }

    /// D*(x, y), using invariance: D*(g q*, h q*) = D*(q*, g⁻¹h q*).
    pub fn d_star(&self, x: usize, y: usize) -> Result<usize> {
        let rel = self.nodes[x]
            .element
            .inverse()
            .compose(&self.nodes[y].element);
        self.lookup(&rel)
            .map(|j| self.nodes[j].d_star)
            .ok_or(Error::ExceedsBallRadius)
    }

    /// Breadth-first distance through edges stored in the ball.
    pub fn bfs_distance(&self, x: usize, y: usize) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.nodes.len()];
        let mut queue = std::collections::VecDeque::new();
        dist[x] = 0;
        queue.push_back(x);
        while let Some(u) = queue.pop_front() {
            if u == y {
                return Some(dist[u]);
            }
            for &(v, _) in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Longest edge length in E*.
    pub fn max_edge(&self) -> f64 {
        edge_lengths(&self.sig).into_iter().fold(0.0, f64::max)
    }

    /// Plain SVG drawing of the ball; r-edges red, p-edges blue.
    pub fn to_svg(&self) -> String {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for n in &self.nodes {
            xmin = xmin.min(n.position.x);
            xmax = xmax.max(n.position.x);
            ymin = ymin.min(n.position.y.ln());
            ymax = ymax.max(n.position.y.ln());
        }
        let w = 800.0;
        let sx = w / (xmax - xmin).max(1e-9);
        let sy = w / (ymax - ymin).max(1e-9);
        let px = |z: UhpPoint| ((z.x - xmin) * sx + 10.0, (ymax - z.y.ln()) * sy + 10.0);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">",
            w + 20.0,
            w + 20.0
        );
        for (i, adj) in self.adjacency.iter().enumerate() {
            for &(j, t) in adj {
                if j < i {
                    continue;
                }
                let (a, b) = (px(self.nodes[i].position), px(self.nodes[j].position));
                let color = if t == EdgeType::R { "#c33" } else { "#33c" };
                let _ = writeln!(
                    s,
                    "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\"/>",
                    a.0, a.1, b.0, b.1
                );
            }
        }
        for n in &self.nodes {
            let (x, y) = px(n.position);
            let _ = writeln!(
                s,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\"><title>D*={}</title></circle>",
                n.d_star
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Edge lengths of E* on r-circles and p-circles.
pub fn edge_lengths(sig: &Signature) -> [f64; 2] {
    let cd = contact_data(sig);
    let pi = std::f64::consts::PI;
    // chord of a circle of radius d subtending 2π/n: sinh(e/2) = sinh d sin(π/n)
    let e = |sh2: f64, n: u32| 2.0 * (sh2.sqrt() * (pi / n as f64).sin()).asinh();
    [e(cd.sinh2_dr, sig.r), e(cd.sinh2_dp, sig.p)]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaStar {
    pub value: usize,
    pub exact_within_ball: bool,
    /// certified lower bound from translation length and edge lengths
    pub lower_bound: usize,
}

/// λ*(m) restricted to the ball. The value found is always attained; it is
/// flagged exact when it meets the lower bound ⌈l/e_max⌉ (1 for elliptics).
pub fn lambda_star(ball: &StarBall, m: &Motion) -> Result<LambdaStar> {
    let class = classify(m)?;
    let lower = match class {
        MotionClass::Identity => 0,
        MotionClass::Hyperbolic { length } => {
            ((length / ball.max_edge() - 1e-9).ceil() as usize).max(1)
        }
        _ => 1,
    };
    let mut best = usize::MAX;
    for x in &ball.nodes {
        let rel = x.element.inverse().compose(m).compose(&x.element);
        if let Some(j) = ball.lookup(&rel) {
            best = best.min(ball.nodes[j].d_star);
        }
    }
    if best == usize::MAX {
        return Err(Error::ExceedsBallRadius);
    }
    Ok(LambdaStar {
        value: best,
        exact_within_ball: best == lower,
        lower_bound: lower,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhoStar {
    pub n: usize,
    pub cosh: f64,
    pub distance: f64,
    pub witness: Word,
}

/// ρ*(n) from a ball of radius ≥ n.
pub fn rho_star_in(ball: &StarBall, n: usize) -> Option<RhoStar> {
    let base = ball.base().position;
    ball.sphere(n)
        .filter(|x| x.flags.mixed)
        .map(|x| (cosh_dist(base, x.position), x))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(c, x)| RhoStar {
            n,
            cosh: c,
            distance: c.acosh(),
            witness: x.word.clone(),
        })
}

pub fn rho_star(sig: &Signature, n: usize) -> Result<RhoStar> {
    if !(2..=5).contains(&n) {
        return Err(Error::IndexOutOfRange(format!("n = {n} outside 2..=5")));
    }
    let ball = build_star_ball(sig, n)?;
    rho_star_in(&ball, n)
        .ok_or_else(|| Error::Unsupported(format!("no mixed node at distance {n}")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub types: String,
    pub tag: String,
    /// half-cosh value, when the form is defined
    pub half_cosh: Option<f64>,
    /// translation length, `None` when the element is elliptic or undefined
    pub length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCatalog {
    pub level: usize,
    pub entries: Vec<LevelEntry>,
}

impl LevelCatalog {
    pub fn lengths(&self) -> Vec<f64> {
        self.entries.iter().filter_map(|e| e.length).collect()
    }
}

enum Form {
    D(u32, u32),
    DSigned(i64, i64),
    DPrime(u32, u32),
    L(usize),
    Double(u32, u32),
}

pub fn level_catalog(sig: &Signature, level: usize) -> Result<LevelCatalog> {
    let p = sig.p as i64;
    let r = sig.r as i64;
    use Form::*;
    let rows: Vec<(&str, &str, Form)> = match level {
        1 => vec![],
        2 => vec![
            ("(r,p)", "δ(p-1,1)", DSigned(p - 1, 1)),
            ("(r,p)", "δ(1,r-1)", DSigned(1, r - 1)),
        ],
        3 => vec![
            ("(r,p,r)", "δ(1,r-2)", DSigned(1, r - 2)),
            ("(r,p,r)", "δ(p-1,r-2)", DSigned(p - 1, r - 2)),
            ("(p,r,p)", "δ(2,r-1)", DSigned(2, r - 1)),
            ("(p,r,p)", "δ(2,1)", D(2, 1)),
            ("(r,r,p)", "δ(1,2)", D(1, 2)),
            ("(r,r,p)", "δ(p-1,2)", DSigned(p - 1, 2)),
            ("(p,p,r)", "δ(2,1)", D(2, 1)),
            ("(p,p,r)", "δ(p-2,1)", DSigned(p - 2, 1)),
        ],
        4 => vec![
            ("(r,r,r,p)", "δ(1,3)", D(1, 3)),
            ("(r,r,r,p)", "δ(p-1,3)", DSigned(p - 1, 3)),
            ("(p,p,p,r)", "δ(p-3,1)", DSigned(p - 3, 1)),
            ("(p,p,p,r)", "δ(p-3,r-1)", DSigned(p - 3, r - 1)),
            ("(r,r,p,r)", "δ(p-1,r-3)", DSigned(p - 1, r - 3)),
            ("(r,r,p,r)", "δ(1,r-3)", DSigned(1, r - 3)),
            ("(r,r,p,r)", "δ(1,r-1)", DSigned(1, r - 1)),
            ("(p,p,r,p)", "δ(3,1)", D(3, 1)),
            ("(p,p,r,p)", "δ(3,r-1)", DSigned(3, r - 1)),
            ("(p,p,r,p)", "δ(1,r-1)", DSigned(1, r - 1)),
            ("(r,p,r,p)", "δ'(2,2) = L10", DPrime(2, 2)),
            ("(r,p,r,p)", "L11", L(11)),
            ("(r,p,r,p)", "L12", L(12)),
            (
                "(r,p,r,p)",
                "2 δ(1,r-1) doubled",
                Double(1, sig.r.saturating_sub(1)),
            ),
            ("(r,r,p,p)", "δ(2,2)", D(2, 2)),
            ("(r,r,p,p)", "δ(p-2,2)", DSigned(p - 2, 2)),
            ("(r,p,p,r)", "δ(p-2,r-2)", DSigned(p - 2, r - 2)),
            ("(r,p,p,r)", "δ(p-2,2)", DSigned(p - 2, 2)),
        ],
        _ => {
            return Err(Error::IndexOutOfRange(format!(
                "level {level} outside 1..=4"
            )))
        }
    };
    let table = l_table(sig);
    let d = |k1: i64, k2: i64| {
        if k1 < 1 || k2 < 1 {
            None
        } else {
            delta_fn(sig, k1 as u32, k2 as u32).ok()
        }
    };
    let entries = rows
        .into_iter()
        .map(|(types, tag, form)| {
            let (half_cosh, doubled) = match form {
                D(a, b) => (d(a as i64, b as i64), false),
                DSigned(a, b) => (d(a, b), false),
                // δ'(2,2) equals L10, which is also defined at q = ∞
                DPrime(a, b) => (delta_prime(sig, a, b).ok().or(Some(table.l[10])), false),
                L(i) => (Some(table.l[i]), false),
                Double(a, b) => (d(a as i64, b as i64), true),
            };
            let length = half_cosh.filter(|v| *v > 1.0 + 1e-12).map(|v| {
                let l = 2.0 * v.acosh();
                if doubled {
                    2.0 * l
                } else {
                    l
                }
            });
            LevelEntry {
                types: types.to_string(),
                tag: tag.to_string(),
                half_cosh,
                length,
            }
        })
        .collect();
    Ok(LevelCatalog { level, entries })
}

/// ρ(n) for the r = 2 graph P (order-q vertices, edges of length 2c).
/// n = 1 always; n = 2 needs p ≥ 4; n = 3 needs p ≥ 6.
pub fn p_graph_rho(sig: &Signature, n: usize) -> Result<f64> {
    if sig.r != 2 {
        return Err(Error::Unsupported(format!(
            "{sig} is not an r = 2 signature"
        )));
    }
    if sig.q == Order::Infinite {
        return Err(Error::UseClearedForm);
    }
    let cosh_c = side_coshes(sig).cosh_c;
    let c = cosh_c.acosh();
    let (cosh_2c, sinh_2c) = ((2.0 * c).cosh(), (2.0 * c).sinh());
    let q = sig.q.finite().expect("finite");
    match n {
        1 => Ok(2.0 * c),
        2 if sig.p >= 4 => {
            let angle = 2.0 * std::f64::consts::PI / q as f64;
            Ok((cosh_2c * cosh_2c - sinh_2c * sinh_2c * angle.cos()).acosh())
        }
        3 if sig.p >= 6 => Ok(r2_quantities(sig)?.rho3()?.acosh()),
        _ => Err(Error::Unsupported(format!(
            "closed form for ρ({n}) not available at p = {}",
            sig.p
        ))),
    }
}

/// ρ(n) by breadth-first search on the orbit of V_q. Test oracle for the
/// closed forms.
pub fn p_graph_rho_bfs(sig: &Signature, n: usize) -> Result<f64> {
    if sig.r != 2 {
        return Err(Error::Unsupported(format!(
            "{sig} is not an r = 2 signature"
        )));
    }
    let q = sig.q.finite().ok_or(Error::UseClearedForm)?;
    let g = TriangleGroup::new(sig);
    let v0 = g.real.vq.point().expect("finite vertex");
    // neighbours of g·V_q are g Q^k R V_q
    let steps: Vec<Motion> = (0..q)
        .map(|k| {
            (0..k)
                .fold(Motion::identity(), |a, _| a.compose(&g.gens.q))
                .compose(&g.gens.r)
        })
        .collect();
    let mut pts: Vec<(UhpPoint, Motion, usize)> = vec![(v0, Motion::identity(), 0)];
    let mut frontier = vec![0usize];
    let same = |a: UhpPoint, b: UhpPoint| cosh_dist(a, b) - 1.0 < 1e-12;
    for depth in 1..=n {
        let mut next = Vec::new();
        for &i in &frontier {
            for s in &steps {
                let h = pts[i].1.compose(s);
                let z = h.apply(v0);
                if pts.iter().any(|(w, _, _)| same(*w, z)) {
                    continue;
                }
                pts.push((z, h, depth));
                next.push(pts.len() - 1);
            }
        }
        frontier = next;
    }
    pts.iter()
        .filter(|(_, _, d)| *d == n)
        .map(|(z, _, _)| cosh_dist(v0, *z))
        .min_by(f64::total_cmp)
        .map(f64::acosh)
        .ok_or_else(|| Error::Unsupported("empty sphere".into()))
}

/// cosh of the nearest (r,p,r,p,r) vertex with all letters turning the
/// same way, computed geometrically; compare `forms::rprpr_vertex_cosh`.
pub fn rprpr_same_sign_cosh(sig: &Signature) -> f64 {
    let g = TriangleGroup::new(sig);
    let w: Word = "RPRPR".parse().expect("word");
    let base = g.real.q_star;
    let a = cosh_dist(base, g.eval(&w).apply(base));
    let b = cosh_dist(base, g.eval(&w.inverse()).apply(base));
    a.min(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{cos_params, rho5_33q_poly, rprpr_vertex_cosh};
    use crate::hyperbolic::dist;

    fn sig(r: u32, p: u32, q: u32) -> Signature {
        Signature::finite(r, p, q).unwrap()
    }

    #[test]
    fn sphere_one_and_degrees() {
        for s in [sig(3, 3, 6), sig(4, 5, 6), sig(2, 5, 7)] {
            let b = build_star_ball(&s, 3).unwrap();
            // R is an involution when r = 2: one r-neighbour only
            let degree = if s.r == 2 { 3 } else { 4 };
            assert_eq!(b.sphere(1).count(), degree);
            let cd = contact_data(&s);
            for x in b.nodes.iter().filter(|x| x.d_star < 3) {
                let mut nbrs: Vec<usize> = b.adjacency[x.id].iter().map(|a| a.0).collect();
                nbrs.dedup();
                assert_eq!(nbrs.len(), degree);
                // the r-circle through x has radius d_r about g V_r
                let c = x.element.apply(b.group().real.vr);
                assert!((dist(c, x.position) - cd.sinh2_dr.sqrt().asinh()).abs() < 1e-9);
                let c = x.element.apply(b.group().real.vp);
                assert!((dist(c, x.position) - cd.sinh2_dp.sqrt().asinh()).abs() < 1e-9);
            }
            for x in &b.nodes[1..] {
                let par = x.parent.unwrap();
                assert_eq!(b.nodes[par].d_star + 1, x.d_star);
            }
        }
    }

    #[test]
    fn d_star_matches_bfs() {
        let b = build_star_ball(&sig(3, 4, 5), 4).unwrap();
        for x in (0..b.nodes.len()).step_by(11) {
            assert_eq!(b.d_star(x, x).unwrap(), 0);
            for y in (0..b.nodes.len()).step_by(5) {
                if b.nodes[x].d_star + b.nodes[y].d_star <= 4 {
                    let d = b.d_star(x, y).unwrap();
                    assert_eq!(d, b.d_star(y, x).unwrap());
                    if x == 0 {
                        assert_eq!(Some(d), b.bfs_distance(x, y));
                    }
                }
            }
        }
        for nb in b.sphere(1) {
            assert_eq!(b.d_star(0, nb.id).unwrap(), 1);
        }
    }

    #[test]
    fn lambda_star_examples() {
        let s = sig(4, 5, 6);
        let b = build_star_ball(&s, 4).unwrap();
        let g = b.group().clone();
        assert_eq!(lambda_star(&b, &Motion::identity()).unwrap().value, 0);
        assert_eq!(lambda_star(&b, &g.gens.r).unwrap().value, 1);
        // R P⁻¹ realizes 2 arcosh δ(p-1,1)
        let h = g.eval(&"Rp".parse().unwrap());
        let l = classify(&h).unwrap().length().unwrap();
        let want = 2.0 * delta_fn(&s, 4, 1).unwrap().acosh();
        assert!((l - want).abs() < 1e-10, "{l} vs {want}");
        let ls = lambda_star(&b, &h).unwrap();
        assert_eq!(ls.value, 2);
    }

    #[test]
    fn rho_star_33q_polynomial() {
        for q in 6..=12 {
            let s = sig(3, 3, q);
            let z = cos_params(&s).z;
            let v = rho_star(&s, 5).unwrap().cosh;
            assert!((v - rho5_33q_poly(z)).abs() < 1e-9, "q={q}: {v}");
        }
        let s = sig(3, 3, 5);
        let z = cos_params(&s).z;
        assert!(rho_star(&s, 5).unwrap().cosh >= rho5_33q_poly(z) - 1e-9);
        assert!((rho5_33q_poly(z) - 4.2361448).abs() < 1e-4);
        assert!((rho_star(&sig(3, 3, 6), 5).unwrap().cosh - 6.0980762).abs() < 1e-6);
    }

    #[test]
    fn rho_star_monotone() {
        for (r, p, q) in [(3, 3, 7), (3, 4, 5), (4, 5, 6), (5, 6, 8), (3, 8, 8)] {
            let s = sig(r, p, q);
            let b = build_star_ball(&s, 5).unwrap();
            let v: Vec<f64> = (2..=5).map(|n| rho_star_in(&b, n).unwrap().cosh).collect();
            assert!(v.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{s}: {v:?}");
        }
    }

    #[test]
    fn rprpr_closed_form_matches_geometry() {
        for (r, p, q) in [(4, 5, 5), (3, 4, 4), (5, 5, 5), (4, 6, 7), (3, 5, 8)] {
            let s = sig(r, p, q);
            let c = cos_params(&s);
            let geo = rprpr_same_sign_cosh(&s);
            assert!(
                (geo - rprpr_vertex_cosh(c.x, c.y, c.z)).abs() < 1e-9 * geo,
                "{s}"
            );
        }
    }

    #[test]
    fn level_catalog_examples() {
        let s = sig(4, 5, 6);
        assert!(level_catalog(&s, 1).unwrap().lengths().is_empty());
        let l2 = level_catalog(&s, 2).unwrap();
        let want = 2.0 * l_table(&s).l[1].acosh();
        assert!(l2.lengths().iter().all(|l| (l - want).abs() < 1e-12));
        let t = l_table(&s);
        let c = cos_params(&s);
        assert!(
            (t.l[11]
                - (4.0 * c.x * c.y * c.z + 2.0 * c.x * c.x + 2.0 * c.y * c.y + 2.0 * c.z * c.z
                    - 1.0))
                .abs()
                < 1e-15
        );
        let l4 = level_catalog(&s, 4).unwrap();
        assert!(l4
            .entries
            .iter()
            .any(|e| e.tag == "L11" && e.types == "(r,p,r,p)"));
        assert!(level_catalog(&s, 5).is_err());
    }

    #[test]
    fn p_graph_closed_forms_match_bfs() {
        for (p, q) in [(4, 5), (4, 6), (5, 5), (6, 7), (7, 7), (10, 10), (8, 12)] {
            let s = Signature::finite(2, p, q).unwrap();
            for n in 1..=3 {
                if let Ok(v) = p_graph_rho(&s, n) {
                    let b = p_graph_rho_bfs(&s, n).unwrap();
                    assert!((v - b).abs() < 1e-9, "(2,{p},{q}) n={n}: {v} vs {b}");
                }
            }
        }
        let s = Signature::finite(2, 4, 6).unwrap();
        let c = side_coshes(&s).cosh_c.acosh();
        assert!((p_graph_rho(&s, 1).unwrap() - 2.0 * c).abs() < 1e-15);
    }
}
