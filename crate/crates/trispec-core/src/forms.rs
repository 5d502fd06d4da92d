//! Scalar closed forms of the signature: cosines, Δ, side lengths,
//! incircle contact data, the δ functionals, the L-table, head lengths and
//! the displacement bound C*.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(n) => Some(n),
            Order::Infinite => None,
        }
    }

    pub fn recip(self) -> f64 {
        match self {
            Order::Finite(n) => 1.0 / n as f64,
            Order::Infinite => 0.0,
        }
    }

    /// cos(π/n), exactly 1 at infinity.
    pub fn cos_pi(self) -> f64 {
        match self {
            Order::Finite(n) => cos_pi_over(n),
            Order::Infinite => 1.0,
        }
    }

    /// sin(π/n), exactly 0 at infinity.
    pub fn sin_pi(self) -> f64 {
        match self {
            Order::Finite(n) => sin_pi_over(n),
            Order::Infinite => 0.0,
        }
    }

    pub fn is_even(self) -> bool {
        matches!(self, Order::Finite(n) if n % 2 == 0)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(Order::Infinite);
        }
        t.parse::<u32>()
            .map(Order::Finite)
            .map_err(|_| Error::InvalidSignature(format!("cannot parse order '{s}'")))
    }
}

/// cos(π/n) with exact values where f64 can hold them.
pub fn cos_pi_over(n: u32) -> f64 {
    match n {
        1 => -1.0,
        2 => 0.0,
        3 => 0.5,
        _ => (PI / n as f64).cos(),
    }
}

pub fn sin_pi_over(n: u32) -> f64 {
    match n {
        1 => 0.0,
        2 => 1.0,
        6 => 0.5,
        _ => (PI / n as f64).sin(),
    }
}

/// A triangle group signature `(r, p, q)` with `r <= p <= q`, only `q`
/// allowed to be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub r: u32,
    pub p: u32,
    pub q: Order,
}

impl Signature {
    pub fn new(r: u32, p: u32, q: Order) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidSignature(format!(
                "r = {r} must be at least 2"
            )));
        }
        let ordered = match q {
            Order::Finite(qn) => r <= p && p <= qn,
            Order::Infinite => r <= p,
        };
        if !ordered {
            return Err(Error::InvalidSignature(format!(
                "({r},{p},{q}) must satisfy r <= p <= q"
            )));
        }
        // 1/r + 1/p + 1/q < 1  <=>  pq + rq + rp < rpq, in integers
        let hyperbolic = match q {
            Order::Finite(qn) => {
                let (r, p, qn) = (r as u64, p as u64, qn as u64);
                p * qn + r * qn + r * p < r * p * qn
            }
            Order::Infinite => {
                let (r, p) = (r as u64, p as u64);
                r + p < r * p
            }
        };
        if !hyperbolic {
            return Err(Error::NotHyperbolic {
                r,
                p,
                q: q.to_string(),
            });
        }
        Ok(Signature { r, p, q })
    }

    pub fn finite(r: u32, p: u32, q: u32) -> Result<Self> {
        Signature::new(r, p, Order::Finite(q))
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.q, Order::Finite(_))
    }

    pub fn cos(&self) -> CosTriple {
        cos_params(self)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.r, self.p, self.q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosTriple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CosTriple {
    pub fn delta(&self) -> f64 {
        delta_xyz(self.x, self.y, self.z)
    }
}

pub fn cos_params(sig: &Signature) -> CosTriple {
    CosTriple {
        x: cos_pi_over(sig.r),
        y: cos_pi_over(sig.p),
        z: sig.q.cos_pi(),
    }
}

pub fn delta_xyz(x: f64, y: f64, z: f64) -> f64 {
    x * x + y * y + z * z + 2.0 * x * y * z - 1.0
}

/// Δ = X² + Y² + Z² + 2XYZ − 1.
pub fn big_delta(sig: &Signature) -> f64 {
    cos_params(sig).delta()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideCoshes {
    /// side joining V_r and V_p
    pub cosh_a: f64,
    /// side joining V_p and V_q
    pub cosh_b: f64,
    /// side joining V_q and V_r
    pub cosh_c: f64,
}

pub fn side_coshes(sig: &Signature) -> SideCoshes {
    let CosTriple { x, y, z } = cos_params(sig);
    let (sr, sp, sq) = (sin_pi_over(sig.r), sin_pi_over(sig.p), sig.q.sin_pi());
    let over = |num: f64, den: f64| if den == 0.0 { f64::INFINITY } else { num / den };
    SideCoshes {
        cosh_a: (z + x * y) / (sp * sr),
        cosh_b: over(x + y * z, sp * sq),
        cosh_c: over(y + z * x, sq * sr),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactData {
    pub sinh2_dr: f64,
    pub sinh2_dp: f64,
    /// infinite when q = ∞
    pub sinh2_dq: f64,
    pub cosh_pq_star: f64,
    pub cosh_rp_star: f64,
    pub cosh_qr_star: f64,
    pub cosh_c_star: f64,
}

pub fn contact_data(sig: &Signature) -> ContactData {
    contact_data_xyz(cos_params(sig))
}

pub fn contact_data_xyz(c: CosTriple) -> ContactData {
    let CosTriple { x, y, z } = c;
    let d = c.delta();
    let sinh2_dq = if z >= 1.0 {
        f64::INFINITY
    } else {
        d / (2.0 * (1.0 - z) * (1.0 + x) * (1.0 + y))
    };
    let cosh_pq_star = d / (2.0 * (1.0 + y) * (1.0 + z)) + 1.0;
    let cosh_rp_star = d / (2.0 * (1.0 + x) * (1.0 + y)) + 1.0;
    let cosh_qr_star = d / (2.0 * (1.0 + z) * (1.0 + x)) + 1.0;
    ContactData {
        sinh2_dr: d / (2.0 * (1.0 - x) * (1.0 + y) * (1.0 + z)),
        sinh2_dp: d / (2.0 * (1.0 - y) * (1.0 + z) * (1.0 + x)),
        sinh2_dq,
        cosh_pq_star,
        cosh_rp_star,
        cosh_qr_star,
        cosh_c_star: cosh_pq_star.max(cosh_rp_star).max(cosh_qr_star),
    }
}

fn sin_k(k: u32, n: Order) -> f64 {
    match n {
        Order::Finite(n) => (k as f64 * PI / n as f64).sin(),
        Order::Infinite => 0.0,
    }
}

fn cos_k(k: u32, n: Order) -> f64 {
    match n {
        Order::Finite(n) => (k as f64 * PI / n as f64).cos(),
        Order::Infinite => 1.0,
    }
}

fn check_range(name: &str, k: u32, n: Order) -> Result<()> {
    let ok = match n {
        Order::Finite(n) => (1..=n).contains(&k),
        Order::Infinite => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange(format!(
            "{name} = {k} outside 1..={n}"
        )))
    }
}

/// δ(k1,k2) = sin(k1π/p) sin(k2π/r) cosh a − cos(k1π/p) cos(k2π/r).
pub fn delta_fn(sig: &Signature, k1: u32, k2: u32) -> Result<f64> {
    let (p, r) = (Order::Finite(sig.p), Order::Finite(sig.r));
    check_range("k1", k1, p)?;
    check_range("k2", k2, r)?;
    let ca = side_coshes(sig).cosh_a;
    Ok(sin_k(k1, p) * sin_k(k2, r) * ca - cos_k(k1, p) * cos_k(k2, r))
}

/// δ′(k1,k2) over (p, q) with cosh b.
pub fn delta_prime(sig: &Signature, k1: u32, k2: u32) -> Result<f64> {
    let p = Order::Finite(sig.p);
    check_range("k1", k1, p)?;
    if sig.q == Order::Infinite {
        return Err(Error::UseClearedForm);
    }
    check_range("k2", k2, sig.q)?;
    let cb = side_coshes(sig).cosh_b;
    Ok(sin_k(k1, p) * sin_k(k2, sig.q) * cb - cos_k(k1, p) * cos_k(k2, sig.q))
}

/// δ″(k1,k2) over (q, r) with cosh c.
pub fn delta_second(sig: &Signature, k1: u32, k2: u32) -> Result<f64> {
    let r = Order::Finite(sig.r);
    if sig.q == Order::Infinite {
        return Err(Error::UseClearedForm);
    }
    check_range("k1", k1, sig.q)?;
    check_range("k2", k2, r)?;
    let cc = side_coshes(sig).cosh_c;
    Ok(sin_k(k1, sig.q) * sin_k(k2, r) * cc - cos_k(k1, sig.q) * cos_k(k2, r))
}

/// The fourteen quantities L0..L13, indexed as printed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LTable {
    pub l: [f64; 14],
}

impl LTable {
    pub fn get(&self, i: usize) -> f64 {
        self.l[i]
    }
}

pub fn l_table(sig: &Signature) -> LTable {
    l_table_xyz(cos_params(sig))
}

pub fn l_table_xyz(c: CosTriple) -> LTable {
    let CosTriple { x, y, z } = c;
    let xyz4 = 4.0 * x * y * z;
    LTable {
        l: [
            4.0 * x * x * y + 2.0 * x * z - y,
            2.0 * x * y + z,
            2.0 * x * z + y,
            2.0 * y * z + x,
            4.0 * y * y * x + 2.0 * y * z - x,
            4.0 * x * x * z + 2.0 * x * y - z,
            8.0 * x.powi(3) * y + 4.0 * x * x * z - 4.0 * x * y - z,
            4.0 * y * y * z + 2.0 * x * y - z,
            8.0 * y.powi(3) * x + 4.0 * y * y * z - 4.0 * x * y - z,
            8.0 * x * x * y * y + xyz4 - 2.0 * x * x - 2.0 * y * y + 1.0,
            xyz4 + 2.0 * z * z + 2.0 * y * y - 1.0,
            xyz4 + 2.0 * x * x + 2.0 * y * y + 2.0 * z * z - 1.0,
            xyz4 + 2.0 * x * x + 2.0 * z * z - 1.0,
            xyz4 + 2.0 * x * x + 2.0 * y * y - 1.0,
        ],
    }
}

/// The "other writing" column of the L-table, as δ-values where printed.
pub fn l_table_alternative(sig: &Signature) -> [Option<f64>; 14] {
    let (p, r) = (sig.p, sig.r);
    let d = |k1: u32, k2: u32| delta_fn(sig, k1, k2).ok();
    [
        d(p - 1, 2),
        d(p - 1, 1),
        d(1, 2),
        d(2, 1),
        d(2, r - 1),
        d(1, 3),
        if r > 3 { d(1, r - 3) } else { None },
        d(3, 1),
        d(3, r - 1),
        d(2, r - 2),
        delta_prime(sig, 2, 2).ok(),
        None,
        None,
        d(2, 2),
    ]
}

/// 2 arcosh(v) when v > 1.
pub fn length_from_half_cosh(v: f64) -> Option<f64> {
    if v > 1.0 {
        Some(2.0 * v.acosh())
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeadFormulas {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// 2 arcosh(2Z² + Z − 1/2)
    pub l2_prime: f64,
}

pub fn head_formulas(sig: &Signature) -> HeadFormulas {
    let t = l_table(sig);
    let z = cos_params(sig).z;
    let len = |v: f64| 2.0 * v.max(1.0).acosh();
    HeadFormulas {
        l1: len(t.l[1]),
        l2: len(t.l[2]),
        l3: len(t.l[3]),
        l2_prime: len(2.0 * z * z + z - 0.5),
    }
}

/// Chebyshev polynomial of the first kind, T_k(z) = cos(kθ) for z = cos θ.
pub fn cheb_t(k: u32, z: f64) -> f64 {
    let (mut a, mut b) = (1.0, z);
    if k == 0 {
        return a;
    }
    for _ in 1..k {
        let c = 2.0 * z * b - a;
        a = b;
        b = c;
    }
    b
}

/// Chebyshev polynomial of the second kind, U_k(z) = sin((k+1)θ)/sin θ.
pub fn cheb_u(k: u32, z: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * z);
    if k == 0 {
        return a;
    }
    for _ in 1..k {
        let c = 2.0 * z * b - a;
        a = b;
        b = c;
    }
    b
}

fn r2_check(sig: &Signature, k: u32) -> Result<()> {
    if sig.r != 2 {
        return Err(Error::Unsupported(format!(
            "{sig} is not an r = 2 signature"
        )));
    }
    match sig.q {
        Order::Finite(q) if !(1..q).contains(&k) => {
            Err(Error::IndexOutOfRange(format!("k = {k} outside 1..{q}")))
        }
        _ if k == 0 => Err(Error::IndexOutOfRange("k = 0".into())),
        _ => Ok(()),
    }
}

/// cosh(l1(k)/2) = sin(kπ/q) cos(π/p) / sin(π/q), written as Y·U_{k−1}(Z)
/// so that it stays finite at q = ∞.
pub fn r2_l1_half_cosh(sig: &Signature, k: u32) -> Result<f64> {
    r2_check(sig, k)?;
    let c = cos_params(sig);
    Ok(c.y * cheb_u(k - 1, c.z))
}

/// cosh(l2(k,k′)/2) = |sin(k′π/q) sin(kπ/q) cosh 2c − cos(kπ/q) cos(k′π/q)|,
/// with sin² (π/q) cosh 2c = 2Y² + Z² − 1.
pub fn r2_l2_half_cosh(sig: &Signature, k: u32, k2: u32) -> Result<f64> {
    r2_check(sig, k)?;
    r2_check(sig, k2)?;
    let c = cos_params(sig);
    let (y, z) = (c.y, c.z);
    let s = cheb_u(k - 1, z) * cheb_u(k2 - 1, z) * (2.0 * y * y + z * z - 1.0);
    Ok((s - cheb_t(k, z) * cheb_t(k2, z)).abs())
}

pub fn r2_l1(sig: &Signature, k: u32) -> Result<Option<f64>> {
    Ok(length_from_half_cosh(r2_l1_half_cosh(sig, k)?))
}

pub fn r2_l2(sig: &Signature, k: u32, k2: u32) -> Result<Option<f64>> {
    Ok(length_from_half_cosh(r2_l2_half_cosh(sig, k, k2)?))
}

/// cosh(l2(1,q−1)/2) = 2Y² + 2Z² − 1, valid at q = ∞ as well.
pub fn r2_l2_1_qm1_half_cosh(sig: &Signature) -> f64 {
    let c = cos_params(sig);
    2.0 * c.y * c.y + 2.0 * c.z * c.z - 1.0
}

/// l0 = l3 = 2 arcosh(2YZ + X).
pub fn canonical_l0(sig: &Signature) -> f64 {
    head_formulas(sig).l3
}

/// cosh C*(l0) = cosh² c* (cosh l0 − 1) + 1.
pub fn c_star_bound(sig: &Signature, l0: f64) -> f64 {
    let cc = contact_data(sig).cosh_c_star;
    cc * cc * (l0.cosh() - 1.0) + 1.0
}

/// cosh C*(l0) for l0 = 2 arcosh(L), avoiding the arcosh round trip.
pub fn c_star_bound_half_cosh(sig: &Signature, half_cosh: f64) -> f64 {
    let cc = contact_data(sig).cosh_c_star;
    cc * cc * (2.0 * half_cosh * half_cosh - 2.0) + 1.0
}

/// The Δ-expanded form of cosh C*(l3):
/// [Δ + 2(1+X)(1+Y)]² [2(2YZ+X)² − 2] / (4(1+X)²(1+Y)²) + 1.
pub fn c_star_expanded(x: f64, y: f64, z: f64) -> f64 {
    let d = delta_xyz(x, y, z);
    let s = 2.0 * (1.0 + x) * (1.0 + y);
    let l3 = 2.0 * y * z + x;
    (d + s).powi(2) * (2.0 * l3 * l3 - 2.0) / (4.0 * (1.0 + x).powi(2) * (1.0 + y).powi(2)) + 1.0
}

/// Closed-form cosh of the nearest (r,p,r,p,r) sphere-5 vertex, with all
/// letters oriented the same way.
pub fn rprpr_vertex_cosh(x: f64, y: f64, z: f64) -> f64 {
    let d = delta_xyz(x, y, z);
    let k = 2.0 * z * (1.0 + y + z + x * z) + (2.0 * z * z - 1.0) * (1.0 + x);
    d * k * k / ((1.0 + x) * (1.0 + y) * (1.0 + z)) + 1.0
}

/// cosh ρ*(5) for Γ(3,3,q), q ≥ 6: 16Z⁵+8Z⁴−12Z³−2Z²+3Z+1/2.
pub fn rho5_33q_poly(z: f64) -> f64 {
    16.0 * z.powi(5) + 8.0 * z.powi(4) - 12.0 * z.powi(3) - 2.0 * z * z + 3.0 * z + 0.5
}

/// The r = 2 quantities in Y = cos(π/p), Z = cos(π/q). Uncleared values
/// are `None` at q = ∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct R2Quantities {
    pub y: f64,
    pub z: f64,
    /// cos(π/p)/sin(π/q); infinite at q = ∞
    pub cosh_c: f64,
    /// (1−Z²)·cosh ρ(3)
    pub rho3_cleared: f64,
    /// (1−Z²)·cosh C(l2(1,q−1))
    pub c_l2_1_qm1_cleared: f64,
    /// (1−Z²)·cosh C(l2(1,2))
    pub c_l2_12_cleared: f64,
    pub rho3: Option<f64>,
    pub c_l2_1_qm1: Option<f64>,
    pub c_l2_12: Option<f64>,
    /// (1−Z²)·(cosh ρ(3) − cosh C(l2(1,2))), equal to 2Y² at q = ∞
    pub gap_cleared: f64,
}

impl R2Quantities {
    pub fn rho3(&self) -> Result<f64> {
        self.rho3.ok_or(Error::UseClearedForm)
    }
}

pub fn r2_quantities(sig: &Signature) -> Result<R2Quantities> {
    if sig.r != 2 {
        return Err(Error::Unsupported(format!(
            "{sig} is not an r = 2 signature"
        )));
    }
    let c = cos_params(sig);
    let (y, z) = (c.y, c.z);
    let y2 = y * y;
    let z2 = z * z;
    let w = 1.0 - z2;
    let rho3_cleared = 16.0 * y2 * (y2 + z2 - 1.0) * (2.0 * y2 - 1.0) + 2.0 * y2 + z2 - 1.0;
    let c_l2_1_qm1_cleared = 8.0 * y2 * (y2 + z2 - 1.0) * (z2 + y2) + w;
    let c_l2_12_cleared = 2.0 * y2 * (4.0 * z * y2 - z - 1.0) * (4.0 * z * y2 - z + 1.0) + w;
    let finite = sig.q != Order::Infinite;
    let over = |v: f64| if finite { Some(v / w) } else { None };
    Ok(R2Quantities {
        y,
        z,
        cosh_c: if finite {
            y / sig.q.sin_pi()
        } else {
            f64::INFINITY
        },
        rho3_cleared,
        c_l2_1_qm1_cleared,
        c_l2_12_cleared,
        rho3: over(rho3_cleared),
        c_l2_1_qm1: over(c_l2_1_qm1_cleared),
        c_l2_12: over(c_l2_12_cleared),
        gap_cleared: rho3_cleared - c_l2_12_cleared,
    })
}
