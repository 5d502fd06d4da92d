use num_rational::Ratio;
use proptest::prelude::*;

use trispec_core::certifier::{Bounded, Rho5Expr};
use trispec_core::hyperbolic::{cosh_dist, UhpPoint};
use trispec_core::spectrum::{brute_force_run, predicted_head, BruteOptions};
use trispec_core::{
    Box3, Interval, Motion, Orientation, Poly3, Signature, SpectrumHead, TypeTuple, VertexMode,
};

fn interval() -> impl Strategy<Value = (Interval, f64)> {
    (-50.0f64..50.0, 0.0f64..10.0, 0.0f64..=1.0)
        .prop_map(|(lo, w, t)| (Interval::new(lo, lo + w), lo + t * w))
}

proptest! {
    #[test]
    fn interval_ops_enclose((a, x) in interval(), (b, y) in interval()) {
        prop_assert!((a + b).contains(x + y));
        prop_assert!((a - b).contains(x - y));
        prop_assert!((a * b).contains(x * y));
        prop_assert!(a.sqr().contains(x * x));
        if let Some(q) = a.div(b) {
            prop_assert!(q.contains(x / y));
        }
        if let Some(s) = a.sqrt() {
            prop_assert!(s.contains(x.max(0.0).sqrt()));
        }
    }

    #[test]
    fn poly_enclosure(c in prop::collection::vec(-9i64..9, 6), t in prop::array::uniform3(0.0f64..=1.0)) {
        let exps = [(0, 0, 0), (1, 0, 0), (0, 2, 0), (1, 1, 1), (0, 0, 3), (2, 0, 1)];
        let p = Poly3::from_terms(exps.iter().zip(&c).map(|(&e, &k)| (e, Ratio::new(k, 3))));
        let b = Box3::new((0.5, 0.7), (0.6, 0.8), (0.8, 0.95));
        let pt = [
            0.5 + 0.2 * t[0],
            0.6 + 0.2 * t[1],
            0.8 + 0.15 * t[2],
        ];
        prop_assert!(p.eval_interval(&b).contains(p.eval(pt)));
    }

    #[test]
    fn motions_are_isometries(
        a in 0.2f64..3.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
        z1 in (-3.0f64..3.0, 0.1f64..3.0), z2 in (-3.0f64..3.0, 0.1f64..3.0),
    ) {
        // choose d so that ad - bc = 1
        let d = (1.0 + b * c) / a;
        let m = Motion::new(a, b, c, d, Orientation::Direct).unwrap();
        let (p, q) = (UhpPoint::new(z1.0, z1.1), UhpPoint::new(z2.0, z2.1));
        let before = cosh_dist(p, q);
        let after = cosh_dist(m.apply(p), m.apply(q));
        prop_assert!((before - after).abs() <= 1e-8 * before.max(1.0));
        let back = m.inverse().apply(m.apply(p));
        prop_assert!(cosh_dist(back, p) - 1.0 < 1e-9);
    }
}

#[test]
fn rho5_bound_is_sound_on_random_boxes() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let f = Rho5Expr::new(TypeTuple::parse("rrrrp").unwrap(), VertexMode::Geodesic);
    for _ in 0..400 {
        let x0 = rng.gen_range(0.55..0.9);
        let w = rng.gen_range(0.001..0.05);
        let b = Box3::new(
            (x0, x0 + w),
            (x0 + w, x0 + 2.0 * w),
            (x0 + 2.0 * w, x0 + 3.0 * w),
        );
        let Some(bound) = f.bound(&b) else { continue };
        for _ in 0..8 {
            let p = [
                rng.gen_range(b.x.lo..=b.x.hi),
                rng.gen_range(b.y.lo..=b.y.hi),
                rng.gen_range(b.z.lo..=b.z.hi),
            ];
            if let Some(v) = f.at(p) {
                assert!(bound.contains(v), "{v} outside {bound:?} at {p:?}");
            }
        }
    }
}

#[test]
fn head_round_trips_through_json() {
    for (r, p, q) in [(3, 3, 6), (4, 5, 6), (2, 4, 7)] {
        let h = predicted_head(&Signature::finite(r, p, q).unwrap()).unwrap();
        let s = serde_json::to_string(&h).unwrap();
        let back: SpectrumHead = serde_json::from_str(&s).unwrap();
        assert_eq!(h, back);
    }
}

#[test]
fn oracle_is_monotone_in_word_length() {
    let sig = Signature::finite(3, 4, 5).unwrap();
    let cutoff = predicted_head(&sig).unwrap().cutoff + 1e-6;
    let mut prev: Option<Vec<(f64, usize)>> = None;
    for mw in [6, 9, 12] {
        let run = brute_force_run(&sig, &BruteOptions::new(cutoff, mw, 10)).unwrap();
        let cur: Vec<(f64, usize)> = run
            .head
            .entries
            .iter()
            .map(|e| (e.length, e.multiplicity))
            .collect();
        if let Some(p) = &prev {
            // every value found with shorter words survives with no fewer classes
            for (l, m) in p {
                let hit = cur.iter().find(|(l2, _)| (l - l2).abs() < 1e-9);
                assert!(
                    hit.is_some_and(|(_, m2)| m2 >= m),
                    "lost {l} x{m} at max_word {mw}"
                );
            }
        }
        prev = Some(cur);
    }
}
