//! Independent reference computations checked against the library.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use arczero::arith::{coprime_pairs_of_norm, decompose_weight, m_of, PiMultiple};
use arczero::eisenstein::NormTable;
use arczero::forms::{check_condition, ArcEvaluator, CoefficientFamily, Condition, Truncation};
use arczero::zeros::{isolate_zeros, ZeroOptions};
use arczero::Certified;
use num_complex::Complex64;
use num_rational::Ratio;
use proptest::prelude::*;

const EPS: f64 = 0.0048076;

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Kahan-Babuska accumulator.
#[derive(Default)]
struct Kb {
    s: f64,
    c: f64,
}

impl Kb {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn total(&self) -> f64 {
        self.s + self.c
    }
}

/// Plain double loop over the square `|c|, |d| ≤ √A`, returning the real
/// part and the sum of term magnitudes.
fn brute_f(k: u32, theta: f64, a: i64) -> (f64, f64) {
    let r = (a as f64).sqrt() as i64 + 1;
    let e = Complex64::from_polar(1.0, theta / 2.0);
    let mut re = Kb::default();
    let mut abs = 0.0;
    for c in -r..=r {
        for d in -r..=r {
            if c * c + d * d > a || gcd(c, d) != 1 {
                continue;
            }
            let w = e * c as f64 + e.conj() * d as f64;
            let t = 0.5 * w.powi(-(k as i32));
            re.add(t.re);
            abs += t.norm();
        }
    }
    (re.total(), abs)
}

fn arc_points(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| PI / 2.0 + (PI / 6.0) * (i as f64 + 0.5) / n as f64)
        .chain([PI / 2.0, 2.0 * PI / 3.0])
        .collect()
}

#[test]
fn bucketed_sum_matches_double_loop() {
    let a = 10_000;
    let table = NormTable::new(a as u64);
    for k in (4..=24).step_by(2) {
        for &t in &arc_points(7) {
            let got = table.eval(k, t).unwrap().value;
            let (want, abs) = brute_f(k, t, a);
            if want.abs() >= 1e-3 {
                let rel = ((got - want) / want).abs();
                assert!(rel <= 1e-12, "k = {k}, θ = {t}: rel {rel:e}");
            } else {
                assert!((got - want).abs() <= 1e-12 * abs, "k = {k}, θ = {t}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn pair_enumeration_matches_square_scan() {
    let mut by_norm: BTreeMap<u64, Vec<(i64, i64)>> = BTreeMap::new();
    for c in -40i64..=40 {
        for d in -40i64..=40 {
            let n = (c * c + d * d) as u64;
            if n <= 1600 && gcd(c, d) == 1 {
                by_norm.entry(n).or_default().push((c, d));
            }
        }
    }
    for n in 1..=1600u64 {
        let mut got: Vec<_> = coprime_pairs_of_norm(n).iter().map(|p| (p.c, p.d)).collect();
        got.sort();
        let mut want = by_norm.remove(&n).unwrap_or_default();
        want.sort();
        assert_eq!(got, want, "n = {n}");
    }
}

/// Bernoulli numbers `B_0..=B_n` from the usual recurrence.
fn bernoulli(n: usize) -> Vec<Ratio<i128>> {
    let mut b = vec![Ratio::from_integer(1i128)];
    for m in 1..=n {
        let mut s = Ratio::from_integer(0i128);
        let mut binom: i128 = 1;
        for (j, bj) in b.iter().enumerate().take(m) {
            s += *bj * binom;
            binom = binom * (m as i128 + 1 - j as i128) / (j as i128 + 1);
        }
        b.push(-s / (m as i128 + 1));
    }
    b
}

fn divisor_power_sum(n: u64, p: u32) -> f64 {
    (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| (d as f64).powi(p as i32)).sum()
}

/// `e^{ikθ/2} E_k(e^{iθ})` from the q-expansion.
fn q_series_f(k: u32, theta: f64, bk: Ratio<i128>) -> Complex64 {
    let z = Complex64::from_polar(1.0, theta);
    let q = (Complex64::i() * 2.0 * PI * z).exp();
    let coef = -(2.0 * k as f64) / (*bk.numer() as f64 / *bk.denom() as f64);
    let mut s = Complex64::new(1.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..=80u64 {
        qn *= q;
        s += coef * divisor_power_sum(n, k - 1) * qn;
    }
    Complex64::from_polar(1.0, k as f64 * theta / 2.0) * s
}

#[test]
fn certificates_contain_q_series_values() {
    let b = bernoulli(30);
    let ev = ArcEvaluator::new(Truncation::default());
    for k in (4..=30).step_by(2) {
        for &t in &arc_points(9) {
            let want = q_series_f(k, t, b[k as usize]);
            assert!(want.im.abs() < 1e-10, "k = {k}: imaginary part {}", want.im);
            let got = ev.f(k, t).unwrap();
            let slack = 1e-13 * (1.0 + want.re.abs());
            assert!(
                (got.value - want.re).abs() <= got.radius + slack,
                "k = {k}, θ = {t}: {} ± {} vs {}",
                got.value,
                got.radius,
                want.re
            );
        }
    }
}

#[test]
fn delta_matches_q_product() {
    let ev = ArcEvaluator::new(Truncation::default());
    for &t in &arc_points(25) {
        let z = Complex64::from_polar(1.0, t);
        let q = (Complex64::i() * 2.0 * PI * z).exp();
        let mut prod = q;
        let mut qn = Complex64::new(1.0, 0.0);
        for _ in 1..=60 {
            qn *= q;
            prod *= (Complex64::new(1.0, 0.0) - qn).powi(24);
        }
        let want = Complex64::from_polar(1.0, 6.0 * t) * prod;
        assert!(want.im.abs() < 1e-15);
        let got = ev.delta(t).unwrap();
        assert!(
            (got.value - want.re).abs() <= got.radius + 1e-16,
            "θ = {t}: {} ± {} vs {}",
            got.value,
            got.radius,
            want.re
        );
    }
}

/// Illinois variant of regula falsi on a sign change.
fn secant_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let (mut fa, mut fb) = (f(a), f(b));
    assert!(fa * fb < 0.0);
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < 1e-15 {
            return c;
        }
        if fc * fb < 0.0 {
            (a, fa) = (b, fb);
            (b, fb) = (c, fc);
            side = 0;
        } else {
            (b, fb) = (c, fc);
            if side == 1 {
                fa /= 2.0;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

#[test]
fn zeros_match_sign_scan_oracle() {
    let ev = ArcEvaluator::new(Truncation::default());
    let fam = CoefficientFamily::zero();
    let a = 2000;
    let n = 800;
    for k in (12..=60).step_by(2) {
        let f = |t: f64| brute_f(k, t, a).0;
        // open arc: some weights vanish at the endpoints
        let (lo, hi) = (PI / 2.0 + 1e-7, 2.0 * PI / 3.0 - 1e-7);
        let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
        let oracle: Vec<f64> = (0..n)
            .filter(|&i| vals[i] * vals[i + 1] < 0.0)
            .map(|i| secant_root(f, grid[i], grid[i + 1]))
            .collect();
        let zs = isolate_zeros(&ev, k, &fam, EPS, &ZeroOptions::default()).unwrap();
        assert_eq!(oracle.len(), m_of(k).unwrap() as usize, "k = {k}");
        assert_eq!(zs.count, oracle.len(), "k = {k}");
        for (b, r) in zs.brackets.iter().zip(&oracle) {
            assert!((b.refined_root - r).abs() <= 1e-8, "k = {k}: {} vs {r}", b.refined_root);
            assert!(b.lo - 1e-12 <= *r && *r <= b.hi + 1e-12, "k = {k}: {r} outside bracket");
        }
    }
}

fn family_at(k: u32, coeffs: Vec<f64>) -> CoefficientFamily {
    CoefficientFamily::new("prop", BTreeMap::from([(k, coeffs)])).unwrap()
}

fn even_weight(lo: u32, hi: u32) -> impl Strategy<Value = u32> {
    (lo / 2..=hi / 2).prop_map(|h| 2 * h)
}

proptest! {
    #[test]
    fn weight_decomposition_reassembles(k in even_weight(4, 2000)) {
        let w = decompose_weight(k).unwrap();
        prop_assert_eq!(12 * w.m + w.s, k);
        prop_assert!([0, 4, 6, 8, 10, 14].contains(&w.s));
    }

    #[test]
    fn certified_mul_encloses(
        x in -10.0f64..10.0, rx in 0.0f64..1.0, ux in -1.0f64..=1.0,
        y in -10.0f64..10.0, ry in 0.0f64..1.0, uy in -1.0f64..=1.0,
    ) {
        let (a, b) = (Certified::new(x, rx), Certified::new(y, ry));
        let (xs, ys) = (x + ux * rx, y + uy * ry);
        let p = a.mul(b);
        let s = a.add(b);
        let tol = 1e-12;
        prop_assert!(p.lo() - tol <= xs * ys && xs * ys <= p.hi() + tol);
        prop_assert!(s.lo() - tol <= xs + ys && xs + ys <= s.hi() + tol);
    }

    #[test]
    fn certified_powi_encloses(x in -3.0f64..3.0, r in 0.0f64..0.5, u in -1.0f64..=1.0, n in 0u32..12) {
        let c = Certified::new(x, r).powi(n);
        let v = (x + u * r).powi(n as i32);
        let tol = 1e-12 * (1.0 + v.abs());
        prop_assert!(c.lo() - tol <= v && v <= c.hi() + tol);
    }

    #[test]
    fn pi_multiple_order_matches_radians(a in 1i64..500, b in 1i64..500, c in 1i64..500, d in 1i64..500) {
        let (p, q) = (PiMultiple::new(a, b), PiMultiple::new(c, d));
        if p < q {
            prop_assert!(p.radians() <= q.radians());
        }
    }

    #[test]
    fn conditions_are_monotone_under_scaling(
        k in even_weight(24, 120),
        raw in proptest::collection::vec(-1e3f64..1e3, 10),
        lam in 1.0f64..10.0,
    ) {
        let m = m_of(k).unwrap() as usize;
        let coeffs: Vec<f64> = raw.into_iter().cycle().take(m).collect();
        let scaled: Vec<f64> = coeffs.iter().map(|a| a * lam).collect();
        for which in [Condition::Cond1, Condition::Cond2] {
            let base = check_condition(&family_at(k, coeffs.clone()), k, which, EPS).unwrap();
            let big = check_condition(&family_at(k, scaled.clone()), k, which, EPS).unwrap();
            prop_assert!(big.lhs >= base.lhs);
            prop_assert!(!big.satisfied || base.satisfied);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zeros_are_ordered_and_inside_the_arc(k in even_weight(12, 240), frac in 0.0f64..0.5) {
        let fam = CoefficientFamily::scaled_cond2(k, k, frac, EPS).unwrap();
        let ev = ArcEvaluator::new(Truncation::default());
        let zs = isolate_zeros(&ev, k, &fam, EPS, &ZeroOptions::default()).unwrap();
        prop_assert!(zs.certified);
        prop_assert_eq!(zs.count, m_of(k).unwrap() as usize);
        let roots = zs.roots();
        prop_assert!(roots.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(roots.iter().all(|&r| PI / 2.0 < r && r < 2.0 * PI / 3.0));
        for b in &zs.brackets {
            prop_assert!(b.g_lo.sign().unwrap() != b.g_hi.sign().unwrap());
            prop_assert!(b.contains(b.refined_root) || b.width() == 0.0);
        }
    }
}
