//! Spectrum heads: the predicted pattern from the closed forms, an
//! enumeration oracle with conjugacy-class multiplicities, and the
//! comparison of the two.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::combinatorics::{build_star_ball, rho_star_in};
use crate::error::{Error, Result};
use crate::forms::{
    c_star_bound, canonical_l0, cos_params, head_formulas, length_from_half_cosh, r2_l1_half_cosh,
    r2_l2_1_qm1_half_cosh, r2_l2_half_cosh, Order, Signature,
};
use crate::group::{
    displacement_ball, BallOptions, Letter, MotionIndex, TriangleGroup, Vertex, Word,
};
use crate::hyperbolic::{axis, classify, cosh_dist, dist, Motion, MotionClass, UhpPoint};

/// Lengths closer than this are one spectral value.
pub const LENGTH_BUCKET: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exactness {
    Exact,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub label: String,
    pub length: f64,
    pub multiplicity: usize,
    pub exactness: Exactness,
    /// unknown spectral values may sit between the previous entry and this one
    pub open_before: bool,
    /// shortest words of one element per class (oracle heads only)
    pub representatives: Vec<String>,
}

impl SpectrumEntry {
    fn predicted(label: &str, length: f64, multiplicity: usize, exactness: Exactness) -> Self {
        SpectrumEntry {
            label: label.to_string(),
            length,
            multiplicity,
            exactness,
            open_before: false,
            representatives: Vec::new(),
        }
    }

    fn open(mut self) -> Self {
        self.open_before = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Predicted,
    BruteForce { max_word: usize, conj_depth: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumHead {
    pub sig: Signature,
    pub entries: Vec<SpectrumEntry>,
    pub cutoff: f64,
    pub provenance: Provenance,
    pub completeness_note: String,
}

impl SpectrumHead {
    pub fn lengths(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.length).collect()
    }

    /// Entry whose length matches `l` within the bucket tolerance.
    pub fn find(&self, l: f64) -> Option<&SpectrumEntry> {
        self.entries
            .iter()
            .find(|e| (e.length - l).abs() <= LENGTH_BUCKET)
    }
}

fn len_of(v: f64) -> f64 {
    length_from_half_cosh(v).unwrap_or(0.0)
}

/// The head pattern stated for the signature.
pub fn predicted_head(sig: &Signature) -> Result<SpectrumHead> {
    use Exactness::*;
    let h = head_formulas(sig);
    let (r, p) = (sig.r, sig.p);
    let q = sig.q;
    let mut note = String::new();
    let entries: Vec<SpectrumEntry> = if r == 2 {
        let l1 = |k| len_of(r2_l1_half_cosh(sig, k).expect("k in range"));
        let l12 = len_of(r2_l2_half_cosh(sig, 1, 2).expect("k in range"));
        let l1qm1 = len_of(r2_l2_1_qm1_half_cosh(sig));
        let e_l12 = || SpectrumEntry::predicted("l1(2)", l1(2), 2, Exact);
        let qn = q.finite();
        match p {
            3 => {
                let mut v = vec![SpectrumEntry::predicted("l2(1,q-1)", l1qm1, 1, Exact)];
                if qn != Some(7) {
                    v.push(SpectrumEntry::predicted("l1(4)", l1(4), 1, AtLeast));
                }
                v
            }
            4 if matches!(qn, Some(6) | Some(7)) => vec![
                e_l12(),
                SpectrumEntry::predicted("l1(3)", l1(3), 1, AtLeast),
                SpectrumEntry::predicted("l2(1,q-1)", l1qm1, 1, Exact).open(),
            ],
            4 => vec![
                e_l12(),
                SpectrumEntry::predicted("l2(1,q-1)", l1qm1, 1, Exact),
            ],
            5 if qn == Some(5) => {
                vec![
                    e_l12(),
                    SpectrumEntry::predicted("l2(1,q-1)", l1qm1, 1, Exact),
                ]
            }
            5 => vec![
                e_l12(),
                SpectrumEntry::predicted("l2(1,2)", l12, 1, AtLeast),
            ],
            6..=10 if q == Order::Infinite || (p == 10 && qn == Some(10)) => {
                vec![
                    e_l12(),
                    SpectrumEntry::predicted("l2(1,2)", l12, 1, AtLeast),
                ]
            }
            6..=10 => {
                note.push_str("next value after l1(2) left open");
                vec![e_l12()]
            }
            _ => vec![
                e_l12(),
                SpectrumEntry::predicted("l2(1,2)", l12, 1, AtLeast),
            ],
        }
    } else if r == 3 && p == 3 {
        let mut v = vec![SpectrumEntry::predicted("l1", h.l1, 2, AtLeast)];
        if matches!(q, Order::Finite(5) | Order::Finite(6)) {
            v.push(SpectrumEntry::predicted("l'2", h.l2_prime, 2, AtLeast));
        } else {
            note.push_str("next value after l1 left open");
        }
        v
    } else if r == 3 && p == 4 && q == Order::Finite(4) {
        vec![
            SpectrumEntry::predicted("l1", h.l1, 2, AtLeast),
            SpectrumEntry::predicted("l3", h.l3, 1, AtLeast),
        ]
    } else if r == 3 {
        vec![
            SpectrumEntry::predicted("l1", h.l1, 2, Exact),
            SpectrumEntry::predicted("l3", h.l3, 1, AtLeast),
        ]
    } else {
        let rp = r == p;
        let pq = q == Order::Finite(p);
        match (rp, pq) {
            (true, true) => vec![SpectrumEntry::predicted("l1=l2=l3", h.l1, 5, AtLeast)],
            (true, false) => vec![
                SpectrumEntry::predicted("l1", h.l1, 2, Exact),
                SpectrumEntry::predicted("l2=l3", h.l2, 3, AtLeast),
            ],
            (false, true) => vec![
                SpectrumEntry::predicted("l1=l2", h.l1, 4, Exact),
                SpectrumEntry::predicted("l3", h.l3, 1, AtLeast),
            ],
            (false, false) => vec![
                SpectrumEntry::predicted("l1", h.l1, 2, Exact),
                SpectrumEntry::predicted("l2", h.l2, 2, Exact),
                SpectrumEntry::predicted("l3", h.l3, 1, AtLeast),
            ],
        }
    };
    let cutoff = entries.iter().map(|e| e.length).fold(0.0, f64::max);
    Ok(SpectrumHead {
        sig: *sig,
        entries,
        cutoff,
        provenance: Provenance::Predicted,
        completeness_note: note,
    })
}

/// The second listed value of the predicted head, or the first if only one.
pub fn second_listed_length(sig: &Signature) -> Result<f64> {
    let h = predicted_head(sig)?;
    Ok(h.entries.get(1).unwrap_or(&h.entries[0]).length)
}

#[derive(Clone, Debug)]
pub struct BruteOptions {
    pub cutoff: f64,
    pub max_word: usize,
    pub conj_depth: usize,
}

impl BruteOptions {
    pub fn new(cutoff: f64, max_word: usize, conj_depth: usize) -> Self {
        BruteOptions {
            cutoff,
            max_word,
            conj_depth,
        }
    }
}

/// The fundamental quadrilateral F = T ∪ s_a T and its centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrilateral {
    pub vertices: [UhpPoint; 4],
    pub center: UhpPoint,
    pub circumradius: f64,
}

pub fn fundamental_quadrilateral(group: &TriangleGroup) -> Result<Quadrilateral> {
    let t = &group.real;
    let vq = match t.vq {
        Vertex::Finite(z) => z,
        Vertex::Ideal(_) => return Err(Error::Unsupported("oracle needs q finite".into())),
    };
    let vertices = [t.vr, vq, t.vp, vq.mirror()];
    let a = t.vp.y.ln();
    let radius = |s: f64| {
        let c = UhpPoint::on_axis(s);
        vertices.iter().map(|v| dist(c, *v)).fold(0.0, f64::max)
    };
    // golden-section search; the max of distances is convex along the axis
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0, a);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (radius(x1), radius(x2));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = radius(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = radius(x2);
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    Ok(Quadrilateral {
        vertices,
        center: UhpPoint::on_axis(s),
        circumradius: radius(s),
    })
}

fn axis_meets(q: &Quadrilateral, m: &Motion) -> bool {
    let ax = match axis(m) {
        Ok(a) => a,
        Err(_) => return false,
    };
    let sides: Vec<f64> = q
        .vertices
        .iter()
        .map(|v| {
            // signed distance
            let s = ax.side(*v);
            s.signum() * ax.distance_to(*v)
        })
        .collect();
    let all_pos = sides.iter().all(|s| *s > 1e-9);
    let all_neg = sides.iter().all(|s| *s < -1e-9);
    !(all_pos || all_neg)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut k: usize) -> usize {
        while self.0[k] != k {
            self.0[k] = self.0[self.0[k]];
            k = self.0[k];
        }
        k
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            // keep the smaller root for determinism
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi] = lo;
        }
    }
}

/// One conjugacy class found by the oracle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleClass {
    pub length: f64,
    pub representative: Word,
    pub members: usize,
    /// whether the inverse of the representative lies in the same class
    pub inverse_in_class: bool,
    pub members_words: Vec<Word>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleRun {
    pub head: SpectrumHead,
    pub classes: Vec<OracleClass>,
    pub ball_size: usize,
    pub depth_used: usize,
    pub exhausted: bool,
    pub circumradius: f64,
    pub displacement_bound: f64,
}

/// Enumeration oracle for the spectrum below `cutoff`.
///
/// Every class of hyperbolics with length ≤ L has a member whose axis
/// meets F. Such a member moves the centre c by at most D with
/// cosh D = 1 + cosh²ρ_F (cosh L − 1). The displacement-pruned search with
/// bound D + ρ_F finds all of them once it exhausts. Classes are the
/// components of g ~ n⁻¹gn with n moving c by at most 2ρ_F (tiles meeting F).
pub fn brute_force_run(sig: &Signature, opts: &BruteOptions) -> Result<OracleRun> {
    let group = TriangleGroup::new(sig);
    let quad = fundamental_quadrilateral(&group)?;
    let rho = quad.circumradius;
    let c = quad.center;
    let l = opts.cutoff;
    let cosh_d = 1.0 + (rho + 1e-6).cosh().powi(2) * (l.cosh() - 1.0);
    let d = cosh_d.acosh().max(2.0 * rho + 1e-3);
    let ball = displacement_ball(
        &group,
        c,
        d + rho + 1e-6,
        &BallOptions {
            max_word: opts.max_word,
            letters: Letter::ALL.to_vec(),
            ..BallOptions::default()
        },
    )?;

    // hyperbolics below the cutoff with axis meeting F
    let mut s_ids: Vec<usize> = Vec::new();
    let mut s_len: Vec<f64> = Vec::new();
    let mut s_index = MotionIndex::new();
    for id in 0..ball.len() {
        let m = ball.motion(id);
        if let Ok(MotionClass::Hyperbolic { length }) = classify(m) {
            if length <= l + LENGTH_BUCKET && axis_meets(&quad, m) {
                s_index.insert(m, s_ids.len() as u32);
                s_ids.push(id);
                s_len.push(length);
            }
        }
    }
    let cosh_near = (2.0 * rho + 1e-3).cosh();
    let near: Vec<Motion> = (0..ball.len())
        .filter(|&id| {
            ball.word_len(id) <= opts.conj_depth.max(1)
                && cosh_dist(c, ball.motion(id).apply(c)) <= cosh_near
        })
        .map(|id| *ball.motion(id))
        .collect();
    let lookup = |m: &Motion| {
        s_index
            .candidates(m)
            .into_iter()
            .find(|&k| ball.motion(s_ids[k as usize]).approx_eq(m, 1e-8))
            .map(|k| k as usize)
    };
    let mut uf = UnionFind((0..s_ids.len()).collect());
    for k in 0..s_ids.len() {
        let g = ball.motion(s_ids[k]);
        for n in &near {
            let h = n.inverse().compose(g).compose(n);
            if let Some(j) = lookup(&h) {
                uf.union(k, j);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for k in 0..s_ids.len() {
        let root = uf.find(k);
        groups.entry(root).or_default().push(k);
    }
    let mut roots: Vec<usize> = groups.keys().copied().collect();
    roots.sort_unstable();
    let mut classes: Vec<OracleClass> = roots
        .into_iter()
        .map(|root| {
            let mem = &groups[&root];
            // shortest word, then lexicographic, as the representative
            let mut words: Vec<(usize, Word)> =
                mem.iter().map(|&k| (k, ball.word(s_ids[k]))).collect();
            words.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then(a.1.cmp(&b.1)));
            let rep_k = words[0].0;
            let g = ball.motion(s_ids[rep_k]).inverse();
            let inverse_in_class = inverse_among(&g, mem, &s_ids, &ball);
            OracleClass {
                length: s_len[rep_k],
                representative: words[0].1.clone(),
                members: mem.len(),
                inverse_in_class,
                members_words: words.into_iter().map(|w| w.1).collect(),
            }
        })
        .collect();
    classes.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.representative.len().cmp(&b.representative.len()))
            .then(a.representative.cmp(&b.representative))
    });

    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for cl in &classes {
        match entries.last_mut() {
            Some(e) if (cl.length - e.length).abs() <= LENGTH_BUCKET => {
                e.multiplicity += 1;
                e.representatives.push(cl.representative.to_string());
            }
            _ => entries.push(SpectrumEntry {
                label: String::new(),
                length: cl.length,
                multiplicity: 1,
                exactness: if ball.exhausted {
                    Exactness::Exact
                } else {
                    Exactness::AtLeast
                },
                open_before: !ball.exhausted,
                representatives: vec![cl.representative.to_string()],
            }),
        }
    }
    let note = if ball.exhausted {
        format!(
            "complete below cutoff: displacement-pruned search (bound {:.6}) exhausted at word length {}",
            d + rho,
            ball.depth
        )
    } else {
        format!(
            "word-limited: pruned search stopped at max_word {} before exhausting bound {:.6}",
            opts.max_word,
            d + rho
        )
    };
    Ok(OracleRun {
        head: SpectrumHead {
            sig: *sig,
            entries,
            cutoff: l,
            provenance: Provenance::BruteForce {
                max_word: opts.max_word,
                conj_depth: opts.conj_depth,
            },
            completeness_note: note,
        },
        classes,
        ball_size: ball.len(),
        depth_used: ball.depth,
        exhausted: ball.exhausted,
        circumradius: rho,
        displacement_bound: d,
    })
}

/// The inverse shares the axis, so it lies in S_meets; the class contains
/// it iff it is one of the members.
fn inverse_among(
    g_inv: &Motion,
    mem: &[usize],
    s_ids: &[usize],
    ball: &crate::group::Ball,
) -> bool {
    mem.iter()
        .any(|&k| ball.motion(s_ids[k]).approx_eq(g_inv, 1e-8))
}

pub fn brute_force_head(sig: &Signature, opts: &BruteOptions) -> Result<SpectrumHead> {
    Ok(brute_force_run(sig, opts)?.head)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    Info,
}

/// What a check compares. Only pattern checks count as head mismatches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckKind {
    Pattern,
    Bound,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub status: CheckStatus,
    pub details: String,
}

impl Check {
    fn new(
        kind: CheckKind,
        name: impl Into<String>,
        status: CheckStatus,
        details: impl Into<String>,
    ) -> Self {
        Check {
            name: name.into(),
            kind,
            status,
            details: details.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhoComparison {
    pub cosh_rho5: f64,
    pub cosh_c_star: f64,
    pub l0: f64,
    /// cosh ρ*(5) − cosh C*(l0)
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub sig: Signature,
    pub predicted: SpectrumHead,
    pub brute: Option<SpectrumHead>,
    pub checks: Vec<Check>,
    pub rho_comparison: Option<RhoComparison>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    /// Failed pattern checks (lengths and multiplicities of the head).
    pub fn exact_mismatches(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.kind == CheckKind::Pattern && c.status == CheckStatus::Fail)
            .count()
    }

    pub fn failures(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .count()
    }
}

#[derive(Clone, Debug)]
pub struct ValidateOptions {
    /// cutoff; defaults to the last predicted value + 1e-6
    pub cutoff: Option<f64>,
    pub max_word: usize,
    pub conj_depth: usize,
    pub run_brute: bool,
    pub compare_rho: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            cutoff: None,
            max_word: 12,
            conj_depth: 10,
            run_brute: true,
            compare_rho: true,
        }
    }
}

pub fn is_exceptional(sig: &Signature) -> bool {
    matches!(
        (sig.r, sig.p, sig.q),
        (3, 4, Order::Finite(4)) | (4, 4, Order::Finite(4)) | (5, 5, Order::Finite(5))
    )
}

/// Alternative l0 for Γ(3,3,5) and Γ(3,3,6).
pub fn l0_33q(sig: &Signature) -> Option<f64> {
    if sig.r != 3 || sig.p != 3 {
        return None;
    }
    let pi = std::f64::consts::PI;
    match sig.q {
        Order::Finite(5) => {
            let z = (pi / 5.0).cos();
            Some(2.0 * (4.0 * z * z - 1.0).acosh())
        }
        Order::Finite(6) => {
            let v = 2.0 * (pi / 12.0).cos().powi(2) + 2.0 * (pi / 4.0).cos().powi(2) - 1.0;
            Some(2.0 * v.acosh())
        }
        _ => None,
    }
}

/// Compares the predicted head to the brute-force head. Also reports
/// cosh ρ*(5) against cosh C*(l0).
pub fn compare_heads(predicted: &SpectrumHead, brute: &SpectrumHead, checks: &mut Vec<Check>) {
    let cutoff = brute.cutoff;
    // predicted entries that coincide numerically are one spectral value
    let mut groups: Vec<Vec<&SpectrumEntry>> = Vec::new();
    for e in predicted
        .entries
        .iter()
        .filter(|e| e.length <= cutoff + LENGTH_BUCKET)
    {
        match groups.last_mut() {
            Some(g) if (g[0].length - e.length).abs() <= LENGTH_BUCKET => g.push(e),
            _ => groups.push(vec![e]),
        }
    }
    for g in &groups {
        let labels: Vec<&str> = g.iter().map(|e| e.label.as_str()).collect();
        let name = format!("value {}", labels.join(" & "));
        let want: usize = g.iter().map(|e| e.multiplicity).sum();
        let exact = g.iter().all(|e| e.exactness == Exactness::Exact);
        let length = g[0].length;
        let coincide = if g.len() > 1 {
            " (listed as distinct values but numerically equal)"
        } else {
            ""
        };
        match brute.find(length) {
            None => checks.push(Check::new(
                CheckKind::Pattern,
                name,
                CheckStatus::Fail,
                format!("length {length:.12} not found by the oracle"),
            )),
            Some(b) => {
                let ok = if exact {
                    b.multiplicity == want
                } else {
                    b.multiplicity >= want
                };
                checks.push(Check::new(
                    CheckKind::Pattern,
                    name,
                    if ok {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    },
                    format!(
                        "length {length:.12}: observed multiplicity {} (want {} {}){coincide}",
                        b.multiplicity,
                        if exact { "==" } else { ">=" },
                        want
                    ),
                ));
            }
        }
    }
    // oracle values below the last predicted value must be listed or fall in an open gap
    let last = predicted
        .entries
        .iter()
        .map(|e| e.length)
        .filter(|l| *l <= cutoff + LENGTH_BUCKET)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut stray = Vec::new();
    for b in &brute.entries {
        if b.length > last + LENGTH_BUCKET || predicted.find(b.length).is_some() {
            continue;
        }
        let next = predicted.entries.iter().find(|e| e.length > b.length);
        let allowed = next.map(|e| e.open_before).unwrap_or(true);
        if !allowed {
            stray.push(format!("{:.12}", b.length));
        }
    }
    checks.push(Check::new(
        CheckKind::Pattern,
        "no unlisted values inside the head",
        if stray.is_empty() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        if stray.is_empty() {
            "none".to_string()
        } else {
            format!("unlisted lengths {}", stray.join(", "))
        },
    ));
}

pub fn rho_comparison(sig: &Signature, l0: f64) -> Result<RhoComparison> {
    let ball = build_star_ball(sig, 5)?;
    let rho = rho_star_in(&ball, 5).ok_or_else(|| Error::Unsupported("empty sphere".into()))?;
    let cs = c_star_bound(sig, l0);
    Ok(RhoComparison {
        cosh_rho5: rho.cosh,
        cosh_c_star: cs,
        l0,
        margin: rho.cosh - cs,
    })
}

pub fn cross_validate(sig: &Signature, opts: &ValidateOptions) -> Result<ValidationReport> {
    let predicted = predicted_head(sig)?;
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    if !predicted.completeness_note.is_empty() {
        notes.push(predicted.completeness_note.clone());
    }
    let brute = if opts.run_brute && sig.is_compact() {
        let cutoff = opts.cutoff.unwrap_or(predicted.cutoff + 1e-6);
        let run = brute_force_run(
            sig,
            &BruteOptions::new(cutoff, opts.max_word, opts.conj_depth),
        )?;
        if !run.exhausted {
            checks.push(Check::new(
                CheckKind::Oracle,
                "oracle completeness",
                CheckStatus::Info,
                run.head.completeness_note.clone(),
            ));
        }
        compare_heads(&predicted, &run.head, &mut checks);
        Some(run.head)
    } else {
        None
    };
    let mut rho_cmp = None;
    if opts.compare_rho && sig.r >= 3 && sig.is_compact() {
        if let Some(l0) = l0_33q(sig) {
            let c = rho_comparison(sig, l0)?;
            let holds = c.margin > 0.0;
            let z = cos_params(sig).z;
            notes.push(format!(
                "second-length bound for (3,3,{}): cosh rho*(5) = {:.7} vs cosh C*(l0) = {:.7}; the claimed inequality cosh rho*(5) > cosh C*(l0) {} (Z = {:.7})",
                sig.q,
                c.cosh_rho5,
                c.cosh_c_star,
                if holds { "holds" } else { "does not hold" },
                z
            ));
            checks.push(Check::new(
                CheckKind::Bound,
                "rho*(5) vs C*(l0), second-length choice",
                CheckStatus::Info,
                format!("margin {:+.7}", c.margin),
            ));
            rho_cmp = Some(c);
        } else {
            let c = rho_comparison(sig, canonical_l0(sig))?;
            let status = if is_exceptional(sig) {
                CheckStatus::Info
            } else if c.margin > 0.0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            checks.push(Check::new(
                CheckKind::Bound,
                "rho*(5) > C*(l3)",
                status,
                format!(
                    "cosh rho*(5) = {:.10}, cosh C*(l3) = {:.10}, margin {:+.3e}",
                    c.cosh_rho5, c.cosh_c_star, c.margin
                ),
            ));
            rho_cmp = Some(c);
        }
    }
    Ok(ValidationReport {
        sig: *sig,
        predicted,
        brute,
        checks,
        rho_comparison: rho_cmp,
        notes,
    })
}

/// Signatures 3 ≤ r ≤ p ≤ q ≤ qmax with r ≤ rmax.
pub fn grid(rmin: u32, rmax: u32, qmax: u32) -> Vec<Signature> {
    let mut v = Vec::new();
    for r in rmin..=rmax {
        for p in r..=qmax {
            for q in p..=qmax {
                if let Ok(s) = Signature::finite(r, p, q) {
                    v.push(s);
                }
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(r: u32, p: u32, q: u32) -> Signature {
        Signature::finite(r, p, q).unwrap()
    }

    #[test]
    fn predicted_456() {
        let h = predicted_head(&sig(4, 5, 6)).unwrap();
        let m: Vec<(usize, Exactness)> = h
            .entries
            .iter()
            .map(|e| (e.multiplicity, e.exactness))
            .collect();
        assert_eq!(
            m,
            vec![
                (2, Exactness::Exact),
                (2, Exactness::Exact),
                (1, Exactness::AtLeast)
            ]
        );
        assert!((h.entries[0].length - 2.6456).abs() < 5e-4);
        assert!((h.entries[1].length - 2.6725).abs() < 5e-4);
        assert!((h.entries[2].length - 2.7548).abs() < 5e-4);
    }

    #[test]
    fn predicted_special_patterns() {
        let h = predicted_head(&sig(4, 4, 6)).unwrap();
        assert_eq!(h.entries[1].multiplicity, 3);
        let h = predicted_head(&sig(3, 3, 6)).unwrap();
        assert_eq!(h.entries.len(), 2);
        assert_eq!(h.entries[1].label, "l'2");
        let h = predicted_head(&sig(3, 3, 7)).unwrap();
        assert_eq!(h.entries.len(), 1);
        assert!(!h.completeness_note.is_empty());
        let h = predicted_head(&Signature::finite(2, 10, 10).unwrap()).unwrap();
        assert_eq!(h.entries[1].label, "l2(1,2)");
        let h = predicted_head(&sig(5, 5, 5)).unwrap();
        assert_eq!(
            (h.entries[0].multiplicity, h.entries[0].exactness),
            (5, Exactness::AtLeast)
        );
    }

    #[test]
    fn quadrilateral_center() {
        let g = TriangleGroup::new(&sig(4, 5, 6));
        let q = fundamental_quadrilateral(&g).unwrap();
        // the centre balances the farthest vertices
        let d: Vec<f64> = q.vertices.iter().map(|v| dist(q.center, *v)).collect();
        let max = d.iter().cloned().fold(0.0, f64::max);
        assert!((max - q.circumradius).abs() < 1e-12);
        assert!(d.iter().filter(|x| (max - **x).abs() < 1e-6).count() >= 2);
    }

    #[test]
    fn oracle_237_systole() {
        let s = Signature::finite(2, 3, 7).unwrap();
        let head = brute_force_head(&s, &BruteOptions::new(1.0, 16, 10)).unwrap();
        let y = 0.5f64;
        let z = (std::f64::consts::PI / 7.0).cos();
        let want = 2.0 * (2.0 * y * y + 2.0 * z * z - 1.0).acosh();
        assert!((head.entries[0].length - want).abs() < 1e-9);
        assert!((want - 0.9840).abs() < 1e-3);
        assert_eq!(head.entries[0].multiplicity, 1);
    }

    #[test]
    fn oracle_lengths_match_traces() {
        let s = sig(3, 4, 5);
        let g = TriangleGroup::new(&s);
        let cutoff = head_formulas(&s).l3 + 1e-6;
        let run = brute_force_run(&s, &BruteOptions::new(cutoff, 12, 10)).unwrap();
        assert!(run.exhausted);
        for cl in &run.classes {
            let m = g.eval(&cl.representative);
            let l = 2.0 * (0.5 * m.trace().abs()).acosh();
            assert!((l - cl.length).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_monotone_in_cutoff() {
        let s = sig(4, 5, 6);
        let l3 = head_formulas(&s).l3;
        let a = brute_force_head(&s, &BruteOptions::new(l3 - 0.05, 12, 10)).unwrap();
        let b = brute_force_head(&s, &BruteOptions::new(l3 + 1e-6, 12, 10)).unwrap();
        for e in &a.entries {
            let f = b.find(e.length).unwrap();
            assert!(f.multiplicity >= e.multiplicity);
        }
    }
}
