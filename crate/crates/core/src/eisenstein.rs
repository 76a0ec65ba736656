//! Norm-bucketed lattice sums for `F_k(θ) = e^{ikθ/2} E_k(e^{iθ})`.
//!
//! With `E_k(z) = ½ Σ_{(c,d)=1} (cz+d)^{-k}` one has
//! `F_k(θ) = Σ_N σ_N(θ)` where `σ_N` collects the coprime pairs of norm
//! `c² + d² = N`:
//!
//! ```text
//! σ_N(θ) = ½ Σ (c e^{iθ/2} + d e^{-iθ/2})^{-k}
//! ```
//!
//! `σ_1 = 2cos(kθ/2)` and `σ_2 = (2cos(θ/2))^{-k} + (2i sin(θ/2))^{-k}`.
//! Everything beyond norm 2 is `P_k`, bounded uniformly on the arc by a
//! finite head sum plus the closed-form tail
//! `(2 + 1/√B) 2^{(k+2)/2}/(k-3) (B-1)^{-(k-3)/2}`.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{self, isqrt, LatticePair};
use crate::par::{self, Execution};
use crate::sum::{DoubleDouble, Neumaier};
use crate::{on_arc, Certified, Error, Result, UNIT_ROUNDOFF};

fn check_weight(k: u32) -> Result<()> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::domain(format!("weight must be even and >= 4, got {k}")));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !on_arc(theta) {
        return Err(Error::domain(format!(
            "theta = {theta} lies outside the arc [pi/2, 2pi/3]"
        )));
    }
    Ok(())
}

/// `½ (c e^{iθ/2} + d e^{-iθ/2})^{-k}` for one pair.
#[inline]
fn lattice_term(k: u32, c: f64, d: f64, half_cos: f64, half_sin: f64) -> Complex64 {
    let w = Complex64::new((c + d) * half_cos, (c - d) * half_sin);
    let inv = w.conj() / w.norm_sqr();
    0.5 * inv.powu(k)
}

/// Relative error allowance for a single lattice term of weight `k`.
fn term_rel_error(k: u32) -> f64 {
    let kf = k as f64;
    (3.0 * kf + 8.0 * kf.log2().ceil() + 16.0) * UNIT_ROUNDOFF
}

/// `σ_N(θ)`, straight from the pair enumeration. Zero when `N` has no
/// coprime representation.
pub fn sigma_n(k: u32, n: u64, theta: f64) -> Result<Complex64> {
    check_weight(k)?;
    check_theta(theta)?;
    let (hs, hc) = (theta / 2.0).sin_cos();
    let mut re = Neumaier::new();
    let mut im = Neumaier::new();
    for p in arith::coprime_pairs_of_norm(n) {
        let t = lattice_term(k, p.c as f64, p.d as f64, hc, hs);
        re.add(t.re);
        im.add(t.im);
    }
    Ok(Complex64::new(re.total(), im.total()))
}

/// `2cos(kθ/2) + (2cos(θ/2))^{-k} + (2i sin(θ/2))^{-k}`, the norm-1 and
/// norm-2 contributions in real arithmetic. `(2i sin)^{-k}` equals
/// `(-1)^{k/2} (2 sin)^{-k}` for even `k`.
pub fn leading_terms(k: u32, theta: f64) -> f64 {
    let (hs, hc) = (theta / 2.0).sin_cos();
    let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    2.0 * (k as f64 * theta / 2.0).cos()
        + (2.0 * hc).powi(-(k as i32))
        + sign * (2.0 * hs).powi(-(k as i32))
}

/// Closed-form bound on `|Σ_{N ≥ B} σ_N(θ)|`, uniform on the arc.
pub fn tail_bound(k: u32, b: u64) -> f64 {
    assert!(k >= 4 && b >= 2, "tail_bound needs k >= 4 and B >= 2");
    let kf = k as f64;
    let bf = b as f64;
    let log = (2.0 + 1.0 / bf.sqrt()).ln() + (kf + 2.0) / 2.0 * std::f64::consts::LN_2
        - (kf - 3.0).ln()
        - (kf - 3.0) / 2.0 * (bf - 1.0).ln();
    // exp/ln rounding scales with the size of the exponent
    log.exp() * (1.0 + (log.abs() + 8.0) * 4.0 * UNIT_ROUNDOFF)
}

/// Arithmetic mode for the head sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// `f64` terms with Neumaier accumulation.
    #[default]
    Double,
    /// Double-double terms and accumulation.
    Extended,
}

/// `½ Σ_{5 ≤ N ≤ A} Σ_{c²+d²=N, (c,d)=1} (c² + d² - |cd|)^{-k/2}`.
///
/// The summand depends on `|c|, |d|` only and pairs on the axes have norm 1,
/// so the sum is `2 Σ` over the open first quadrant.
pub fn head_bound(k: u32, a_trunc: u64, precision: Precision, exec: Execution) -> f64 {
    if a_trunc < 5 {
        return 0.0;
    }
    let r = isqrt(a_trunc);
    let half_k = (k / 2) as i32;
    let rows: Vec<DoubleDouble> = par::map_range(exec, 1..(r as usize + 1), |c| {
        let c = c as u64;
        let dmax = isqrt(a_trunc - c * c);
        match precision {
            Precision::Double => {
                let mut acc = Neumaier::new();
                for d in 1..=dmax {
                    let n = c * c + d * d;
                    if n < 5 || c.gcd(&d) != 1 {
                        continue;
                    }
                    acc.add(((n - c * d) as f64).powi(-half_k));
                }
                DoubleDouble::from_f64(acc.total())
            }
            Precision::Extended => {
                let mut acc = DoubleDouble::ZERO;
                for d in 1..=dmax {
                    let n = c * c + d * d;
                    if n < 5 || c.gcd(&d) != 1 {
                        continue;
                    }
                    acc += DoubleDouble::from_f64((n - c * d) as f64).powi(-half_k);
                }
                acc
            }
        }
    });
    let total: DoubleDouble = rows.into_iter().sum();
    2.0 * total.to_f64()
}

/// Where the closed-form tail starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailAnchor {
    /// `B` = least coprime norm above `A` (the sharpest valid choice).
    #[default]
    NextCoprimeNorm,
    /// `B = A + 1`; coarser but also valid, since `σ_N = 0` for
    /// non-representable `N`. This is the convention under which the
    /// published table of `p_k` values is reproduced digit for digit.
    NextInteger,
}

impl TailAnchor {
    pub fn b_for(self, a_trunc: u64) -> u64 {
        match self {
            TailAnchor::NextCoprimeNorm => arith::next_coprime_norm(a_trunc),
            TailAnchor::NextInteger => a_trunc + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundParams {
    pub k: u32,
    pub a_trunc: u64,
    pub b: u64,
}

impl TailBoundParams {
    pub fn new(k: u32, a_trunc: u64) -> Result<Self> {
        check_weight(k)?;
        if a_trunc < 5 {
            return Err(Error::domain(format!("truncation level must be >= 5, got {a_trunc}")));
        }
        Ok(TailBoundParams {
            k,
            a_trunc,
            b: arith::next_coprime_norm(a_trunc),
        })
    }
}

/// A computed uniform bound `p_k ≥ sup |P_k|` on the arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PkBound {
    pub k: u32,
    pub a_trunc: u64,
    pub b: u64,
    pub head: f64,
    pub tail: f64,
    pub total: f64,
}

pub fn p_k(k: u32, a_trunc: u64) -> Result<PkBound> {
    p_k_with(k, a_trunc, TailAnchor::NextCoprimeNorm, Precision::Double, Execution::default())
}

pub fn p_k_with(
    k: u32,
    a_trunc: u64,
    anchor: TailAnchor,
    precision: Precision,
    exec: Execution,
) -> Result<PkBound> {
    check_weight(k)?;
    if a_trunc < 5 {
        return Err(Error::domain(format!("truncation level must be >= 5, got {a_trunc}")));
    }
    let b = anchor.b_for(a_trunc);
    let head = head_bound(k, a_trunc, precision, exec);
    let tail = tail_bound(k, b);
    Ok(PkBound {
        k,
        a_trunc,
        b,
        head,
        tail,
        total: head + tail,
    })
}

/// The published uniform bounds on `|P_k|` (0.759, 0.179, 0.059, 0.019,
/// then `0.359 (1/2)^{k/2}`).
pub fn published_p_bound(k: u32) -> Result<f64> {
    check_weight(k)?;
    Ok(match k {
        4 => 0.759,
        6 => 0.179,
        8 => 0.059,
        10 => 0.019,
        _ => 0.359 * 0.5f64.powi((k / 2) as i32),
    })
}

/// Truncation levels used for the published table.
pub const TABLE1_ROWS: [(u32, u64); 5] = [(4, 3_000_000), (6, 536), (8, 23), (10, 14), (12, 20)];

/// Bounds on `sup |F_k|` over the arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupBound {
    /// `3 + δ_k`.
    pub coarse: f64,
    /// 4.009, 3.304, 3.122, 3.051, then `3 + 1.359 (1/2)^{k/2}`.
    pub sharp: f64,
}

pub fn sup_f_bound(k: u32) -> Result<SupBound> {
    check_weight(k)?;
    let coarse = 3.0 + arith::delta_t(k)?;
    let sharp = match k {
        4 => 4.009,
        6 => 3.304,
        8 => 3.122,
        10 => 3.051,
        _ => 3.0 + 1.359 * 0.5f64.powi((k / 2) as i32),
    };
    Ok(SupBound { coarse, sharp })
}

/// A truncated lattice sum with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeriesValue {
    pub value: f64,
    /// Bound on the omitted norms `N ≥ B`.
    pub tail_radius: f64,
    /// Floating-point allowance for the included terms.
    pub rounding_radius: f64,
    /// Imaginary part of the computed sum; zero in exact arithmetic.
    pub imag_residue: f64,
    pub a_trunc: u64,
    pub b: u64,
}

impl TruncatedSeriesValue {
    pub fn radius(&self) -> f64 {
        self.tail_radius + self.rounding_radius
    }

    pub fn certified(&self) -> Certified {
        Certified::new(self.value, self.radius())
    }
}

/// All coprime pairs with norm up to `a_trunc`, sorted by norm and then
/// lexicographically, stored flat for fast evaluation.
#[derive(Debug, Clone)]
pub struct NormTable {
    a_trunc: u64,
    b: u64,
    norms: Vec<u64>,
    /// `offsets[i]..offsets[i+1]` indexes the pairs of `norms[i]`.
    offsets: Vec<usize>,
    cs: Vec<f64>,
    ds: Vec<f64>,
}

impl NormTable {
    pub fn new(a_trunc: u64) -> Self {
        let r = isqrt(a_trunc) as i64;
        let mut pairs: Vec<(u64, LatticePair)> = Vec::new();
        for c in -r..=r {
            let dmax = isqrt(a_trunc - (c * c) as u64) as i64;
            for d in -dmax..=dmax {
                if c.gcd(&d) == 1 {
                    pairs.push(((c * c + d * d) as u64, LatticePair { c, d }));
                }
            }
        }
        pairs.sort_unstable();
        let mut norms = Vec::new();
        let mut offsets = Vec::new();
        let mut cs = Vec::with_capacity(pairs.len());
        let mut ds = Vec::with_capacity(pairs.len());
        for (i, (n, p)) in pairs.iter().enumerate() {
            if norms.last() != Some(n) {
                norms.push(*n);
                offsets.push(i);
            }
            cs.push(p.c as f64);
            ds.push(p.d as f64);
        }
        offsets.push(cs.len());
        NormTable {
            a_trunc,
            b: arith::next_coprime_norm(a_trunc),
            norms,
            offsets,
            cs,
            ds,
        }
    }

    pub fn a_trunc(&self) -> u64 {
        self.a_trunc
    }

    /// Least coprime norm beyond the table.
    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn pair_count(&self) -> usize {
        self.cs.len()
    }

    /// Representable norms present in the table, increasing.
    pub fn norms(&self) -> &[u64] {
        &self.norms
    }

    /// Pairs of the given norm, lexicographic.
    pub fn pairs_of(&self, n: u64) -> Vec<LatticePair> {
        match self.norms.binary_search(&n) {
            Ok(i) => (self.offsets[i]..self.offsets[i + 1])
                .map(|j| LatticePair {
                    c: self.cs[j] as i64,
                    d: self.ds[j] as i64,
                })
                .collect(),
            Err(_) => Vec::new(),
        }
    }

    /// `Σ_{N ≤ A} σ_N(θ)` as a complex number plus `Σ |terms|`.
    fn raw_sum(&self, k: u32, theta: f64, min_norm: u64) -> (Complex64, f64, usize) {
        let (hs, hc) = (theta / 2.0).sin_cos();
        let start = self.norms.partition_point(|&n| n < min_norm);
        let from = self.offsets[start];
        let mut re = Neumaier::new();
        let mut im = Neumaier::new();
        let mut abs = 0.0;
        for (&c, &d) in self.cs[from..].iter().zip(&self.ds[from..]) {
            let t = lattice_term(k, c, d, hc, hs);
            re.add(t.re);
            im.add(t.im);
            abs += t.norm();
        }
        (Complex64::new(re.total(), im.total()), abs, self.cs.len() - from)
    }

    /// Per-norm partial sums `σ_N(θ)` for every norm in the table.
    pub fn sigmas(&self, k: u32, theta: f64) -> Vec<(u64, Complex64)> {
        let (hs, hc) = (theta / 2.0).sin_cos();
        self.norms
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut re = Neumaier::new();
                let mut im = Neumaier::new();
                for j in self.offsets[i]..self.offsets[i + 1] {
                    let t = lattice_term(k, self.cs[j], self.ds[j], hc, hs);
                    re.add(t.re);
                    im.add(t.im);
                }
                (n, Complex64::new(re.total(), im.total()))
            })
            .collect()
    }

    /// `F_k(θ)` truncated at this table's level, with certificate.
    pub fn eval(&self, k: u32, theta: f64) -> Result<TruncatedSeriesValue> {
        check_weight(k)?;
        check_theta(theta)?;
        let (sum, abs, n) = self.raw_sum(k, theta, 1);
        let rounding = (term_rel_error(k) + 2.0 * UNIT_ROUNDOFF + n as f64 * UNIT_ROUNDOFF * UNIT_ROUNDOFF) * abs;
        debug_assert!(
            sum.im.abs() <= rounding + 1e-300,
            "imaginary residue {} above rounding {}",
            sum.im,
            rounding
        );
        Ok(TruncatedSeriesValue {
            value: sum.re,
            tail_radius: tail_bound(k, self.b),
            rounding_radius: rounding,
            imag_residue: sum.im,
            a_trunc: self.a_trunc,
            b: self.b,
        })
    }

    /// The truncated remainder `Σ_{5 ≤ N ≤ A} σ_N(θ)`; its distance to the
    /// true `P_k(θ)` is at most the tail radius.
    pub fn eval_remainder(&self, k: u32, theta: f64) -> Result<TruncatedSeriesValue> {
        check_weight(k)?;
        check_theta(theta)?;
        let (sum, abs, n) = self.raw_sum(k, theta, 5);
        let rounding = (term_rel_error(k) + 2.0 * UNIT_ROUNDOFF + n as f64 * UNIT_ROUNDOFF * UNIT_ROUNDOFF) * abs;
        Ok(TruncatedSeriesValue {
            value: sum.re,
            tail_radius: tail_bound(k, self.b),
            rounding_radius: rounding,
            imag_residue: sum.im,
            a_trunc: self.a_trunc,
            b: self.b,
        })
    }
}

/// Shared cache of norm tables keyed by truncation level.
#[derive(Debug, Default)]
pub struct TableCache {
    tables: RwLock<BTreeMap<u64, Arc<NormTable>>>,
}

impl TableCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, a_trunc: u64) -> Arc<NormTable> {
        if let Some(t) = self.tables.read().expect("table cache poisoned").get(&a_trunc) {
            return Arc::clone(t);
        }
        let table = Arc::new(NormTable::new(a_trunc));
        self.tables
            .write()
            .expect("table cache poisoned")
            .entry(a_trunc)
            .or_insert(table)
            .clone()
    }
}

/// `F_k(θ)` summed over norms `N ≤ a_trunc`.
#[allow(non_snake_case)]
pub fn eval_F(k: u32, theta: f64, a_trunc: u64) -> Result<TruncatedSeriesValue> {
    if a_trunc < 5 {
        return Err(Error::domain(format!("truncation level must be >= 5, got {a_trunc}")));
    }
    NormTable::new(a_trunc).eval(k, theta)
}

/// Evaluates `F_k` over many angles with one table.
pub fn eval_f_many(
    table: &NormTable,
    k: u32,
    thetas: &[f64],
    exec: Execution,
) -> Result<Vec<TruncatedSeriesValue>> {
    par::map(exec, thetas, |&t| table.eval(k, t))
        .into_iter()
        .collect()
}
