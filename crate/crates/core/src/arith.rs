//! Integer-level scaffolding.
//!
//! Weights `k = 12 m(k) + s`, the constants `δ_t`, coprime lattice pairs of a
//! given norm, and the zeros of `cos(kθ/2)`, `cos((k+12)θ/2)` and
//! `sin((k+6)θ/2) sin(3θ)` on the arc. Grid points are kept as exact
//! rational multiples of π so spacing identities can be checked without
//! rounding.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Allowed residues `s` in `k = 12 m + s`.
pub const WEIGHT_RESIDUES: [u32; 6] = [0, 4, 6, 8, 10, 14];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub k: u32,
    pub m: u32,
    pub s: u32,
    pub delta_s: f64,
}

impl WeightProfile {
    pub fn new(k: u32) -> Result<Self> {
        decompose_weight(k)
    }
}

/// Splits an even weight `k ≥ 4` as `12 m + s` with `s ∈ {0,4,6,8,10,14}`.
pub fn decompose_weight(k: u32) -> Result<WeightProfile> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::domain(format!("weight must be even and >= 4, got {k}")));
    }
    let s = match k % 12 {
        2 => 14,
        r => r,
    };
    let m = (k - s) / 12;
    Ok(WeightProfile {
        k,
        m,
        s,
        delta_s: delta_t(s)?,
    })
}

/// Number of zeros of `E_k` in the open arc.
pub fn m_of(k: u32) -> Result<u32> {
    decompose_weight(k).map(|w| w.m)
}

/// The table `δ_t`: `-2` at 0, then 1.009, 0.304, 0.122, 0.051 at 4..10 and
/// 0.022 from 12 on.
pub fn delta_t(t: u32) -> Result<f64> {
    match t {
        0 => Ok(-2.0),
        4 => Ok(1.009),
        6 => Ok(0.304),
        8 => Ok(0.122),
        10 => Ok(0.051),
        t if t >= 12 && t % 2 == 0 => Ok(0.022),
        _ => Err(Error::domain(format!("delta_t undefined for t = {t}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticePair {
    pub c: i64,
    pub d: i64,
}

impl LatticePair {
    pub fn norm(&self) -> i64 {
        self.c * self.c + self.d * self.d
    }
}

/// Integer square root, exact for all `u64`.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// All `(c, d)` with `c² + d² = n` and `gcd(c, d) = 1`, in lexicographic order.
pub fn coprime_pairs_of_norm(n: u64) -> Vec<LatticePair> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let r = isqrt(n) as i64;
    for c in -r..=r {
        let rest = n - (c * c) as u64;
        let d = isqrt(rest);
        if d * d != rest {
            continue;
        }
        let d = d as i64;
        if c.gcd(&d) != 1 {
            continue;
        }
        if d == 0 {
            out.push(LatticePair { c, d });
        } else {
            out.push(LatticePair { c, d: -d });
            out.push(LatticePair { c, d });
        }
    }
    out
}

/// Whether `n` is the norm of some coprime pair.
pub fn is_coprime_norm(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let r = isqrt(n);
    (0..=r).any(|c| {
        let rest = n - c * c;
        let d = isqrt(rest);
        d * d == rest && c.gcd(&d) == 1
    })
}

/// Least coprime norm strictly larger than `a`.
pub fn next_coprime_norm(a: u64) -> u64 {
    (a + 1..)
        .find(|&n| is_coprime_norm(n))
        .expect("coprime norms are unbounded")
}

/// An exact rational multiple of π.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PiMultiple(pub Ratio<i64>);

impl PiMultiple {
    pub fn new(num: i64, den: i64) -> Self {
        PiMultiple(Ratio::new(num, den))
    }

    pub fn radians(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64 * std::f64::consts::PI
    }

    pub fn coeff(&self) -> Ratio<i64> {
        self.0
    }
}

impl fmt::Display for PiMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}π/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for PiMultiple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (*self.0.numer(), *self.0.denom()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiMultiple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (n, m) = <(i64, i64)>::deserialize(d)?;
        if m == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(PiMultiple::new(n, m))
    }
}

/// Arc endpoints as π-coefficients.
pub fn arc_lo() -> Ratio<i64> {
    Ratio::new(1, 2)
}

pub fn arc_hi() -> Ratio<i64> {
    Ratio::new(2, 3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// Zeros of `cos(kθ/2)`.
    Alpha,
    /// Zeros of `cos((k+12)θ/2)`.
    Beta,
    /// Zeros of `sin((k+6)θ/2) sin(3θ)` lying between consecutive β and α.
    Gamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosZeroGrid {
    pub kind: GridKind,
    pub k: u32,
    pub points: Vec<PiMultiple>,
}

impl CosZeroGrid {
    pub fn radians(&self) -> Vec<f64> {
        self.points.iter().map(PiMultiple::radians).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// 1-based access matching the usual `α_j` labelling.
    pub fn get(&self, j: usize) -> Option<PiMultiple> {
        j.checked_sub(1).and_then(|i| self.points.get(i).copied())
    }
}

/// The closed-form grid of the given kind for weight `k ≥ 12`.
///
/// The γ grid is extended to `j = m(k) + 1`; for `s ∈ {0, 6}` that last
/// point is exactly `2π/3`.
pub fn cosine_zero_grid(kind: GridKind, k: u32) -> Result<CosZeroGrid> {
    let w = decompose_weight(k)?;
    if k < 12 {
        return Err(Error::domain(format!("cosine grids need k >= 12, got {k}")));
    }
    let (count, den) = match kind {
        GridKind::Alpha => (w.m, k),
        GridKind::Beta => (w.m + 1, k + 12),
        GridKind::Gamma => (w.m + 1, k + 6),
    };
    let points = (1..=count as i64)
        .map(|j| {
            let odd = if k.is_multiple_of(4) { 2 * j - 1 } else { 2 * j };
            PiMultiple(arc_lo() + Ratio::new(odd, den as i64))
        })
        .collect();
    Ok(CosZeroGrid { kind, k, points })
}

/// Outcome of the exact spacing identities for one weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridIdentities {
    pub k: u32,
    /// `β_j < α_j < β_{j+1}` for all j.
    pub interlaced: bool,
    /// `min(α_j - β_j, β_{j+1} - α_j) ≥ 12π/(k(k+12))`.
    pub min_gap_ok: bool,
    /// The exact minimum gap, as a multiple of π.
    pub min_gap: Option<PiMultiple>,
    /// `α_{j+1} - α_j = 2π/k`.
    pub alpha_spacing_ok: bool,
    /// All α and β points strictly inside the open arc.
    pub inside_arc: bool,
}

impl GridIdentities {
    pub fn all_hold(&self) -> bool {
        self.interlaced && self.min_gap_ok && self.alpha_spacing_ok && self.inside_arc
    }
}

/// Checks the interlacing and spacing identities in exact arithmetic.
pub fn check_grid_identities(k: u32) -> Result<GridIdentities> {
    let alpha = cosine_zero_grid(GridKind::Alpha, k)?;
    let beta = cosine_zero_grid(GridKind::Beta, k)?;
    let kk = k as i64;
    let bound = Ratio::new(12, kk * (kk + 12));
    let mut interlaced = beta.len() == alpha.len() + 1;
    let mut min_gap: Option<Ratio<i64>> = None;
    for (j, a) in alpha.points.iter().enumerate() {
        let (b0, b1) = (beta.points[j].0, beta.points[j + 1].0);
        interlaced &= b0 < a.0 && a.0 < b1;
        let g = (a.0 - b0).min(b1 - a.0);
        min_gap = Some(min_gap.map_or(g, |m| m.min(g)));
    }
    let min_gap_ok = min_gap.is_none_or(|g| g >= bound);
    let step = Ratio::new(2, kk);
    let alpha_spacing_ok = alpha.points.windows(2).all(|p| p[1].0 - p[0].0 == step);
    let inside_arc = alpha
        .points
        .iter()
        .chain(beta.points.iter())
        .all(|p| arc_lo() < p.0 && p.0 < arc_hi());
    Ok(GridIdentities {
        k,
        interlaced,
        min_gap_ok,
        min_gap: min_gap.map(PiMultiple),
        alpha_spacing_ok,
        inside_arc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn decomposition_examples() {
        let w = decompose_weight(12).unwrap();
        assert_eq!((w.m, w.s, w.delta_s), (1, 0, -2.0));
        let w = decompose_weight(14).unwrap();
        assert_eq!((w.m, w.s, w.delta_s), (0, 14, 0.022));
        let w = decompose_weight(16).unwrap();
        assert_eq!((w.m, w.s, w.delta_s), (1, 4, 1.009));
        assert!(decompose_weight(13).is_err());
        assert!(decompose_weight(2).is_err());
    }

    #[test]
    fn decomposition_invariants() {
        for k in (4..=1000).step_by(2) {
            let w = decompose_weight(k).unwrap();
            assert_eq!(12 * w.m + w.s, k);
            assert!(WEIGHT_RESIDUES.contains(&w.s));
            let w12 = decompose_weight(k + 12).unwrap();
            assert_eq!(w12.m, w.m + 1);
        }
    }

    #[test]
    fn delta_table() {
        assert_eq!(delta_t(4).unwrap(), 1.009);
        assert_eq!(delta_t(10).unwrap(), 0.051);
        assert_eq!(delta_t(100).unwrap(), 0.022);
        assert!(delta_t(2).is_err());
        assert!(delta_t(7).is_err());
    }

    #[test]
    fn coprime_pair_examples() {
        let one = coprime_pairs_of_norm(1);
        assert_eq!(one.len(), 4);
        assert!(one.contains(&LatticePair { c: 0, d: -1 }));
        assert!(coprime_pairs_of_norm(3).is_empty());
        // |c|, |d| <= 3 brute force for N = 5
        let mut five = Vec::new();
        for c in -3i64..=3 {
            for d in -3i64..=3 {
                if c * c + d * d == 5 && c.gcd(&d) == 1 {
                    five.push(LatticePair { c, d });
                }
            }
        }
        assert_eq!(coprime_pairs_of_norm(5), five);
        assert_eq!(five.len(), 8);
        // 25 = 0² + 5² is not coprime, 3² + 4² is
        assert_eq!(coprime_pairs_of_norm(25).len(), 8);
        assert!(coprime_pairs_of_norm(0).is_empty());
    }

    #[test]
    fn coprime_pairs_match_brute_force() {
        let limit = 10_000u64;
        let r = isqrt(limit) as i64 + 1;
        let mut brute: Vec<Vec<LatticePair>> = vec![Vec::new(); limit as usize + 1];
        for c in -r..=r {
            for d in -r..=r {
                let n = (c * c + d * d) as u64;
                if (1..=limit).contains(&n) && c.gcd(&d) == 1 {
                    brute[n as usize].push(LatticePair { c, d });
                }
            }
        }
        for n in 1..=limit {
            let got = coprime_pairs_of_norm(n);
            assert_eq!(got, brute[n as usize], "N = {n}");
            let cap = 2.0 * (2.0 * (n as f64).sqrt() + 1.0);
            assert!(got.len() as f64 <= cap);
            assert_eq!(is_coprime_norm(n), !got.is_empty());
        }
    }

    #[test]
    fn next_norm_scan() {
        assert_eq!(next_coprime_norm(20), 25);
        assert_eq!(next_coprime_norm(23), 25);
        assert_eq!(next_coprime_norm(14), 17);
        assert_eq!(next_coprime_norm(536), 538);
        assert_eq!(next_coprime_norm(4), 5);
    }

    #[test]
    fn grid_examples() {
        let a = cosine_zero_grid(GridKind::Alpha, 12).unwrap();
        assert_eq!(a.points, vec![PiMultiple::new(7, 12)]);
        let b = cosine_zero_grid(GridKind::Beta, 12).unwrap();
        assert_eq!(b.points, vec![PiMultiple::new(13, 24), PiMultiple::new(5, 8)]);
        let g = cosine_zero_grid(GridKind::Gamma, 14).unwrap();
        assert_eq!(g.points, vec![PiMultiple::new(3, 5)]);
        assert!(cosine_zero_grid(GridKind::Alpha, 10).is_err());
    }

    #[test]
    fn grids_are_zeros_of_their_functions() {
        for k in (12..=400u32).step_by(2) {
            let kf = k as f64;
            for a in cosine_zero_grid(GridKind::Alpha, k).unwrap().radians() {
                assert!((kf * a / 2.0).cos().abs() < 1e-12, "alpha k={k}");
            }
            for b in cosine_zero_grid(GridKind::Beta, k).unwrap().radians() {
                assert!(((kf + 12.0) * b / 2.0).cos().abs() < 1e-12, "beta k={k}");
            }
            for g in cosine_zero_grid(GridKind::Gamma, k).unwrap().radians() {
                let v = ((kf + 6.0) * g / 2.0).sin() * (3.0 * g).sin();
                assert!(v.abs() < 1e-12, "gamma k={k}");
                assert!(g > PI / 2.0 && g <= 2.0 * PI / 3.0 + 1e-15);
            }
        }
    }

    #[test]
    fn gamma_separates_beta_and_alpha() {
        for k in (12..=400u32).step_by(2) {
            let a = cosine_zero_grid(GridKind::Alpha, k).unwrap();
            let b = cosine_zero_grid(GridKind::Beta, k).unwrap();
            let g = cosine_zero_grid(GridKind::Gamma, k).unwrap();
            assert_eq!(g.len(), a.len() + 1);
            for j in 0..a.len() {
                assert!(b.points[j] < g.points[j] && g.points[j] < a.points[j], "k={k} j={j}");
            }
            let w = decompose_weight(k).unwrap();
            let last = g.points.last().unwrap().0;
            if matches!(w.s, 0 | 6) {
                assert_eq!(last, arc_hi());
            } else {
                assert!(last < arc_hi());
            }
        }
    }

    #[test]
    fn identities_hold_exactly() {
        for k in (12..=400u32).step_by(2) {
            let id = check_grid_identities(k).unwrap();
            assert!(id.all_hold(), "{id:?}");
        }
    }
}
