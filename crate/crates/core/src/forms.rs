//! Normalized forms `f_k = E_k + Σ_j a_j E_{k-12j} Δ^j` on the arc.
//!
//! On the arc everything is real after the phase `e^{ikθ/2}`:
//!
//! ```text
//! G_k(θ) = F_k(θ) + Σ_j a_j F_{k-12j}(θ) D(θ)^j,   D(θ) = (F_4³ - F_6²)/1728
//! ```
//!
//! with `F_0 = 1`. `S_k = G_k - 2cos(kθ/2)` and
//! `Q_k = S_k - (2cos(θ/2))^{-k}`. All values carry certificate radii.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::{self, decompose_weight, GridKind, WeightProfile};
use crate::eisenstein::{self, TableCache};
use crate::par::{self, Execution};
use crate::{on_arc, Certified, Error, Result, ARC_HI, ARC_LO, UNIT_ROUNDOFF};

/// `δ_12`, used for every intermediate weight `k - 12j ≥ 12`.
pub const DELTA_12: f64 = 0.022;

/// Truncation levels: `high` for weights `≥ 12`, `low` for weights 4..10.
///
/// Low weights converge slowly in the rigorous tail bound, so they get a
/// much deeper table by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub high: u64,
    pub low: u64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            high: 20,
            low: 10_000,
        }
    }
}

impl Truncation {
    pub fn for_weight(&self, k: u32) -> u64 {
        if k >= 12 {
            self.high
        } else {
            self.low
        }
    }

    pub fn doubled(&self) -> Truncation {
        Truncation {
            high: self.high * 2,
            low: self.low * 2,
        }
    }

    /// `high` doubled `level` times; `low` at most twice, since its tail
    /// only shrinks like `A^{-1/2}` at weight 4.
    pub fn escalated(&self, level: u32) -> Truncation {
        Truncation {
            high: self.high << level,
            low: self.low << level.min(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFamily {
    pub label: String,
    /// `k ↦ (a_1, …, a_{m(k)})`.
    pub entries: BTreeMap<u32, Vec<f64>>,
    /// Whether weights without an entry are treated as all-zero tuples.
    pub implicit_zero: bool,
}

impl CoefficientFamily {
    /// `a_j^{(k)} = 0` for every weight: the Eisenstein series themselves.
    pub fn zero() -> Self {
        CoefficientFamily {
            label: "zero".to_string(),
            entries: BTreeMap::new(),
            implicit_zero: true,
        }
    }

    /// A family with explicit entries; weights without one are an error.
    pub fn new(label: impl Into<String>, entries: BTreeMap<u32, Vec<f64>>) -> Result<Self> {
        let fam = CoefficientFamily {
            label: label.into(),
            entries,
            implicit_zero: false,
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn with_implicit_zero(mut self, on: bool) -> Self {
        self.implicit_zero = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (&k, coeffs) in &self.entries {
            let w = decompose_weight(k)?;
            if k < 12 {
                return Err(Error::config(format!("family entry for weight {k} < 12")));
            }
            if coeffs.len() != w.m as usize {
                return Err(Error::config(format!(
                    "weight {k} needs {} coefficients, got {}",
                    w.m,
                    coeffs.len()
                )));
            }
            if let Some(x) = coeffs.iter().find(|x| !x.is_finite()) {
                return Err(Error::config(format!("non-finite coefficient {x} at weight {k}")));
            }
        }
        Ok(())
    }

    pub fn coefficients(&self, k: u32) -> Result<Cow<'_, [f64]>> {
        let w = decompose_weight(k)?;
        match self.entries.get(&k) {
            Some(c) => Ok(Cow::Borrowed(c.as_slice())),
            None if self.implicit_zero => Ok(Cow::Owned(vec![0.0; w.m as usize])),
            None => Err(Error::config(format!(
                "family '{}' has no entry for weight {k}",
                self.label
            ))),
        }
    }

    pub fn is_zero_at(&self, k: u32) -> bool {
        self.coefficients(k)
            .map(|c| c.iter().all(|&x| x == 0.0))
            .unwrap_or(false)
    }

    /// A family spending `fraction` of the (cond2) budget at every even
    /// weight in `k_min..=k_max`, split evenly over the `m(k)` terms with
    /// alternating signs.
    pub fn scaled_cond2(k_min: u32, k_max: u32, fraction: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !(0.0..=1.0).contains(&fraction) {
            return Err(Error::config("need epsilon > 0 and fraction in [0, 1]"));
        }
        let mut entries = BTreeMap::new();
        for k in (k_min.max(12)..=k_max).filter(|k| k % 2 == 0) {
            let w = decompose_weight(k)?;
            let budget = fraction * cond2_rhs(k);
            let coeffs = (1..=w.m)
                .map(|j| {
                    let weight = term_weight(&w, j);
                    let sign = if (j + k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * budget / w.m as f64 / (weight * epsilon.powi(j as i32))
                })
                .collect();
            entries.insert(k, coeffs);
        }
        CoefficientFamily::new(format!("cond2x{fraction}"), entries)
    }
}

/// `3 + δ` multiplier of `|a_j| ε^j` in (cond1)/(cond2).
fn term_weight(w: &WeightProfile, j: u32) -> f64 {
    if j == w.m {
        3.0 + w.delta_s
    } else {
        3.0 + DELTA_12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    /// Right side `1 - δ_12`: all zeros on the arc.
    Cond1,
    /// Right side `20 (1/2)^{k/2}`: interlacing.
    Cond2,
}

pub fn cond1_rhs() -> f64 {
    1.0 - DELTA_12
}

pub fn cond2_rhs(k: u32) -> f64 {
    20.0 * 0.5f64.powi((k / 2) as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub k: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub condition: Condition,
    pub satisfied: bool,
}

pub fn check_condition(
    family: &CoefficientFamily,
    k: u32,
    which: Condition,
    epsilon: f64,
) -> Result<ConditionReport> {
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let w = decompose_weight(k)?;
    let coeffs = family.coefficients(k)?;
    let lhs: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let j = i as u32 + 1;
            term_weight(&w, j) * a.abs() * epsilon.powi(j as i32)
        })
        .sum();
    let rhs = match which {
        Condition::Cond1 => cond1_rhs(),
        Condition::Cond2 => cond2_rhs(k),
    };
    Ok(ConditionReport {
        k,
        lhs,
        rhs,
        condition: which,
        satisfied: lhs <= rhs,
    })
}

/// Per-angle cache of `D` and the low-weight `F_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSample {
    pub theta: f64,
    pub delta: Certified,
    pub f4: Certified,
    pub f6: Certified,
    pub f8: Option<Certified>,
    pub f10: Option<Certified>,
}

/// `S_k`, `Q_k` and `G_k` at one angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GDecomposition {
    pub k: u32,
    pub theta: f64,
    pub g: Certified,
    pub s: Certified,
    pub q: Certified,
}

/// Evaluates `F_k`, `D` and `G_k` with shared norm tables.
#[derive(Debug, Clone)]
pub struct ArcEvaluator {
    cache: Arc<TableCache>,
    truncation: Truncation,
}

impl Default for ArcEvaluator {
    fn default() -> Self {
        ArcEvaluator::new(Truncation::default())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if on_arc(theta) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "theta = {theta} lies outside the arc [pi/2, 2pi/3]"
        )))
    }
}

/// `2cos(kθ/2)` with a rounding allowance.
fn main_cosine(k: u32, theta: f64) -> Certified {
    let arg = k as f64 * theta / 2.0;
    Certified::new(2.0 * arg.cos(), 4.0 * (arg.abs() + 1.0) * UNIT_ROUNDOFF)
}

/// `(2cos(θ/2))^{-k}` with a rounding allowance.
fn cos_power(k: u32, theta: f64) -> Certified {
    let v = (2.0 * (theta / 2.0).cos()).powi(-(k as i32));
    Certified::new(v, (k as f64 + 8.0) * 2.0 * UNIT_ROUNDOFF * v.abs())
}

impl ArcEvaluator {
    pub fn new(truncation: Truncation) -> Self {
        ArcEvaluator {
            cache: Arc::new(TableCache::new()),
            truncation,
        }
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Same tables, different truncation.
    pub fn with_truncation(&self, truncation: Truncation) -> Self {
        ArcEvaluator {
            cache: Arc::clone(&self.cache),
            truncation,
        }
    }

    /// `F_k(θ)`; `F_0 = 1` exactly.
    pub fn f(&self, k: u32, theta: f64) -> Result<Certified> {
        if k == 0 {
            check_theta(theta)?;
            return Ok(Certified::ONE);
        }
        let table = self.cache.get(self.truncation.for_weight(k));
        Ok(table.eval(k, theta)?.certified())
    }

    /// `D(θ) = Δ(e^{iθ}) e^{6iθ}` with the propagated radius.
    pub fn delta(&self, theta: f64) -> Result<Certified> {
        Ok(self.sample(theta, false)?.delta)
    }

    /// `D`, `F_4`, `F_6` and optionally `F_8`, `F_10` at one angle.
    pub fn sample(&self, theta: f64, with_f8_f10: bool) -> Result<ArcSample> {
        let f4 = self.f(4, theta)?;
        let f6 = self.f(6, theta)?;
        let delta = f4.powi(3).sub(f6.powi(2)).scale(1.0 / 1728.0);
        let (f8, f10) = if with_f8_f10 {
            (Some(self.f(8, theta)?), Some(self.f(10, theta)?))
        } else {
            (None, None)
        };
        Ok(ArcSample {
            theta,
            delta,
            f4,
            f6,
            f8,
            f10,
        })
    }

    fn low_weight(&self, s: u32, sample: &ArcSample) -> Result<Certified> {
        match s {
            0 => Ok(Certified::ONE),
            4 => Ok(sample.f4),
            6 => Ok(sample.f6),
            8 => sample.f8.map_or_else(|| self.f(8, sample.theta), Ok),
            10 => sample.f10.map_or_else(|| self.f(10, sample.theta), Ok),
            s => self.f(s, sample.theta),
        }
    }

    /// `Σ_j a_j F_{k-12j} D^j`.
    fn correction(&self, w: &WeightProfile, coeffs: &[f64], sample: &ArcSample) -> Result<Certified> {
        let mut acc = Certified::ZERO;
        for (i, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let j = i as u32 + 1;
            let f = self.low_weight(w.k - 12 * j, sample)?;
            acc = acc.add(f.mul(sample.delta.powi(j)).scale(a));
        }
        Ok(acc)
    }

    /// `G_k`, `S_k`, `Q_k` at `θ`, computing `D` only when needed.
    pub fn decompose(&self, k: u32, theta: f64, family: &CoefficientFamily) -> Result<GDecomposition> {
        check_theta(theta)?;
        let coeffs = family.coefficients(k)?;
        let sample = if coeffs.iter().any(|&a| a != 0.0) {
            Some(self.sample(theta, false)?)
        } else {
            None
        };
        self.decompose_inner(k, theta, &coeffs, sample.as_ref())
    }

    /// Same as [`decompose`](Self::decompose) with a precomputed sample.
    pub fn decompose_with(
        &self,
        k: u32,
        family: &CoefficientFamily,
        sample: &ArcSample,
    ) -> Result<GDecomposition> {
        let coeffs = family.coefficients(k)?;
        self.decompose_inner(k, sample.theta, &coeffs, Some(sample))
    }

    fn decompose_inner(
        &self,
        k: u32,
        theta: f64,
        coeffs: &[f64],
        sample: Option<&ArcSample>,
    ) -> Result<GDecomposition> {
        let w = decompose_weight(k)?;
        if k < 12 {
            return Err(Error::domain(format!("G_k needs k >= 12, got {k}")));
        }
        let table = self.cache.get(self.truncation.for_weight(k));
        // S from norms >= 2 and Q from norms >= 5 avoid cancelling 2cos(kθ/2)
        let rem = table.eval_remainder(k, theta)?.certified();
        let (hs, _) = (theta / 2.0).sin_cos();
        let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        let sin_v = sign * (2.0 * hs).powi(-(k as i32));
        let sin_term = Certified::new(sin_v, (k as f64 + 8.0) * 2.0 * UNIT_ROUNDOFF * sin_v.abs());
        let corr = match sample {
            Some(s) if coeffs.iter().any(|&a| a != 0.0) => self.correction(&w, coeffs, s)?,
            _ => Certified::ZERO,
        };
        let q = rem.add(sin_term).add(corr);
        let s = q.add(cos_power(k, theta));
        let g = s.add(main_cosine(k, theta));
        Ok(GDecomposition { k, theta, g, s, q })
    }

    pub fn g(&self, k: u32, theta: f64, family: &CoefficientFamily) -> Result<Certified> {
        Ok(self.decompose(k, theta, family)?.g)
    }

    /// Samples on a θ grid, in grid order.
    pub fn samples(&self, thetas: &[f64], with_f8_f10: bool, exec: Execution) -> Result<Vec<ArcSample>> {
        par::map(exec, thetas, |&t| self.sample(t, with_f8_f10))
            .into_iter()
            .collect()
    }
}

/// `D(θ)` with `F_4`, `F_6` truncated at `a_trunc`.
pub fn delta_on_arc(theta: f64, a_trunc: u64) -> Result<Certified> {
    ArcEvaluator::new(Truncation {
        high: a_trunc,
        low: a_trunc,
    })
    .delta(theta)
}

/// `G_k(θ)` with all weights truncated at `a_trunc`.
#[allow(non_snake_case)]
pub fn eval_G(k: u32, theta: f64, family: &CoefficientFamily, a_trunc: u64) -> Result<Certified> {
    ArcEvaluator::new(Truncation {
        high: a_trunc,
        low: a_trunc,
    })
    .g(k, theta, family)
}

/// `S_k(θ) = G_k(θ) - 2cos(kθ/2)`.
#[allow(non_snake_case)]
pub fn eval_S(k: u32, theta: f64, family: &CoefficientFamily, a_trunc: u64) -> Result<Certified> {
    ArcEvaluator::new(Truncation {
        high: a_trunc,
        low: a_trunc,
    })
    .decompose(k, theta, family)
    .map(|d| d.s)
}

/// `n` equally spaced points on `[lo, hi]`, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
            v[n - 1] = hi;
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonEstimate {
    /// Largest `|D|` found (grid plus local refinement).
    pub value: f64,
    /// Where it was found.
    pub argmax: f64,
    /// `max(|D| + radius)` over every evaluated angle; at least `value`.
    pub certified: f64,
    pub resolution: usize,
    pub a_trunc: u64,
}

impl EpsilonEstimate {
    /// The certificate slack added on top of the point value.
    pub fn slack(&self) -> f64 {
        self.certified - self.value
    }
}

/// `sup |D|` over the arc: a uniform grid followed by golden-section
/// refinement on the cell pair around the best grid point.
pub fn epsilon_on_arc(resolution: usize, a_trunc: u64, exec: Execution) -> Result<EpsilonEstimate> {
    let ev = ArcEvaluator::new(Truncation {
        high: a_trunc.max(20),
        low: a_trunc,
    });
    epsilon_with(&ev, resolution, exec)
}

pub fn epsilon_with(ev: &ArcEvaluator, resolution: usize, exec: Execution) -> Result<EpsilonEstimate> {
    if resolution < 2 {
        return Err(Error::domain("epsilon grid needs at least 2 points"));
    }
    let grid = uniform_grid(ARC_LO, ARC_HI, resolution);
    let values: Vec<Certified> = par::map(exec, &grid, |&t| ev.delta(t))
        .into_iter()
        .collect::<Result<_>>()?;
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |(bi, bv), (i, v)| {
            if v.value.abs() > bv {
                (i, v.value.abs())
            } else {
                (bi, bv)
            }
        });
    let mut certified = values.iter().map(Certified::mag).fold(0.0, f64::max);
    let mut value = values[best].value.abs();
    let mut argmax = grid[best];

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    if hi > lo {
        let (t, v) = golden_max(lo, hi, 60, |t| ev.delta(t))?;
        certified = certified.max(v.mag());
        if v.value.abs() > value {
            value = v.value.abs();
            argmax = t;
        }
    }
    Ok(EpsilonEstimate {
        value,
        argmax,
        certified: certified.max(value),
        resolution,
        a_trunc: ev.truncation().low,
    })
}

/// Golden-section search for the maximum of `|f|`; returns the best point
/// seen, endpoints included.
fn golden_max<F>(mut a: f64, mut b: f64, iters: usize, f: F) -> Result<(f64, Certified)>
where
    F: Fn(f64) -> Result<Certified>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = {
        let fa = f(a)?;
        let fb = f(b)?;
        if fa.value.abs() >= fb.value.abs() {
            (a, fa)
        } else {
            (b, fb)
        }
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..iters {
        for (t, v) in [(c, fc), (d, fd)] {
            if v.value.abs() > best.1.value.abs() {
                best = (t, v);
            }
        }
        if fc.value.abs() > fd.value.abs() {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    Ok(best)
}

/// `0.877/1.192^k - 24.919/1.414^k`.
pub fn auxiliary_gap(k: u32) -> f64 {
    0.877 / 1.192f64.powi(k as i32) - 24.919 / 1.414f64.powi(k as i32)
}

/// `(2cos(θ/2))^{-k} - (2cos(θ/2))^{-(k+12)}`.
pub fn g_gap(k: u32, theta: f64) -> f64 {
    let x = 2.0 * (theta / 2.0).cos();
    x.powi(-(k as i32)) - x.powi(-(k as i32 + 12))
}

/// One grid point where a bound fails beyond its certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// `None` for checks that do not depend on θ.
    pub theta: Option<f64>,
    /// Lower end of the certified quantity.
    pub observed: f64,
    pub limit: f64,
}

/// A grid check of `quantity < limit`.
///
/// A point counts as a violation only when the whole certified interval
/// reaches the limit; points where the interval straddles it are counted
/// as unresolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub k: u32,
    pub points: usize,
    /// Smallest `limit - (value + radius)` over the grid.
    pub worst_margin: f64,
    pub unresolved: usize,
    pub violations: Vec<Violation>,
}

impl BoundCheck {
    fn new(name: &str, k: u32) -> Self {
        BoundCheck {
            name: name.to_string(),
            k,
            points: 0,
            worst_margin: f64::MAX,
            unresolved: 0,
            violations: Vec::new(),
        }
    }

    fn record(&mut self, theta: impl Into<Option<f64>>, quantity: Certified, limit: f64) {
        self.points += 1;
        self.worst_margin = self.worst_margin.min(limit - quantity.hi());
        if quantity.lo() >= limit {
            self.violations.push(Violation {
                theta: theta.into(),
                observed: quantity.lo(),
                limit,
            });
        } else if !(quantity.hi() < limit) {
            self.unresolved += 1;
        }
    }

    /// No certain violations.
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Every point certainly satisfies the bound.
    pub fn certified(&self) -> bool {
        self.passed() && self.unresolved == 0
    }
}

/// `|x|` as a certified quantity.
fn abs_of(x: Certified) -> Certified {
    Certified::new(x.value.abs(), x.radius)
}

fn neg(x: Certified) -> Certified {
    Certified::new(-x.value, x.radius)
}

/// Bound checks for one weight on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k: u32,
    pub family: String,
    pub resolution: usize,
    pub checks: Vec<BoundCheck>,
    /// Whether all verdicts matched between the final grid and the one
    /// before it.
    pub stable: bool,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(BoundCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_TO_SHOW: &str = "g-minus-cos-below-2";
pub const CHECK_Q_BOUND: &str = "q-bound";
pub const CHECK_S_RANGE: &str = "s-in-unit-interval";
pub const CHECK_S_MONOTONE: &str = "s-decreases-in-k";
pub const CHECK_AUX: &str = "auxiliary-gap";
pub const CHECK_SUP_F: &str = "sup-f";
pub const CHECK_SUP_F_SHARP: &str = "sup-f-sharp";

/// Grid sweep of the bounds satisfied by `G_k` on the arc.
///
/// Checks run on `arc` (a full-arc grid with its samples) restricted to each
/// bound's interval:
///
/// * `|S_k| < 2` whenever (cond1) holds;
/// * `|Q_k| < 21.359 (1/2)^{k/2}` whenever (cond2) holds;
/// * for `k ≥ 24`: `0 < S_k < 1` on `[19π/32, 2π/3 - 2π/(3k)]`,
///   `S_k > S_{k+12}` on `[19π/32, α_{m(k)}]` (needs (cond2) at `k + 12`),
///   and the scalar gap `0.877/1.192^k - 24.919/1.414^k > 0`.
pub fn sweep_bounds(
    ev: &ArcEvaluator,
    k: u32,
    family: &CoefficientFamily,
    epsilon: f64,
    arc: &[ArcSample],
) -> Result<Vec<BoundCheck>> {
    let w = decompose_weight(k)?;
    if k < 12 {
        return Err(Error::domain(format!("bound sweep needs k >= 12, got {k}")));
    }
    let cond1 = check_condition(family, k, Condition::Cond1, epsilon)?.satisfied;
    let cond2 = check_condition(family, k, Condition::Cond2, epsilon)?.satisfied;
    let mut checks = Vec::new();

    let decomps: Vec<GDecomposition> = arc
        .iter()
        .map(|s| ev.decompose_with(k, family, s))
        .collect::<Result<_>>()?;

    if cond1 {
        let mut c = BoundCheck::new(CHECK_TO_SHOW, k);
        for d in &decomps {
            c.record(d.theta, abs_of(d.s), 2.0);
        }
        checks.push(c);
    }
    if cond2 {
        let mut c = BoundCheck::new(CHECK_Q_BOUND, k);
        let limit = 21.359 * 0.5f64.powi((k / 2) as i32);
        for d in &decomps {
            c.record(d.theta, abs_of(d.q), limit);
        }
        checks.push(c);
    }
    if k >= 24 && cond2 {
        let left = 19.0 * PI / 32.0;
        let right = ARC_HI - 2.0 * PI / (3.0 * k as f64);
        let mut c = BoundCheck::new(CHECK_S_RANGE, k);
        let mut extra = |t: f64| -> Result<()> {
            let d = ev.decompose(k, t, family)?;
            c.record(t, neg(d.s), 0.0);
            c.record(t, d.s, 1.0);
            Ok(())
        };
        extra(left)?;
        extra(right)?;
        for d in decomps.iter().filter(|d| (left..=right).contains(&d.theta)) {
            c.record(d.theta, neg(d.s), 0.0);
            c.record(d.theta, d.s, 1.0);
        }
        checks.push(c);

        let k12 = k + 12;
        if check_condition(family, k12, Condition::Cond2, epsilon)?.satisfied {
            let alpha_m = arith::cosine_zero_grid(GridKind::Alpha, k)?
                .get(w.m as usize)
                .map(|p| p.radians())
                .unwrap_or(left);
            let mut c = BoundCheck::new(CHECK_S_MONOTONE, k);
            let mut diff = |s: Option<&ArcSample>, t: f64| -> Result<()> {
                let (a, b) = match s {
                    Some(s) => (ev.decompose_with(k, family, s)?, ev.decompose_with(k12, family, s)?),
                    None => (ev.decompose(k, t, family)?, ev.decompose(k12, t, family)?),
                };
                let gap = a.s.sub(b.s);
                c.record(t, neg(gap), 0.0);
                Ok(())
            };
            if alpha_m >= left {
                diff(None, left)?;
                diff(None, alpha_m)?;
            }
            for s in arc.iter().filter(|s| (left..=alpha_m).contains(&s.theta)) {
                diff(Some(s), s.theta)?;
            }
            checks.push(c);
        }

        let mut c = BoundCheck::new(CHECK_AUX, k);
        c.record(None, Certified::exact(-auxiliary_gap(k)), 0.0);
        checks.push(c);
    }
    Ok(checks)
}

/// `|F_k| < 3 + δ_k` and the sharper published bound, on a grid.
pub fn sweep_sup_f(ev: &ArcEvaluator, k: u32, thetas: &[f64]) -> Result<[BoundCheck; 2]> {
    let bound = eisenstein::sup_f_bound(k)?;
    let mut coarse = BoundCheck::new(CHECK_SUP_F, k);
    let mut sharp = BoundCheck::new(CHECK_SUP_F_SHARP, k);
    for &t in thetas {
        let f = abs_of(ev.f(k, t)?);
        coarse.record(t, f, bound.coarse);
        sharp.record(t, f, bound.sharp);
    }
    Ok([coarse, sharp])
}

fn bare_samples(grid: &[f64]) -> Vec<ArcSample> {
    grid.iter()
        .map(|&t| ArcSample {
            theta: t,
            delta: Certified::ZERO,
            f4: Certified::ZERO,
            f6: Certified::ZERO,
            f8: None,
            f10: None,
        })
        .collect()
}

/// Samples on the nested grid with `2n - 1` points, reusing `coarse`.
fn refine_samples(
    ev: &ArcEvaluator,
    coarse: &[ArcSample],
    with_delta: bool,
    exec: Execution,
) -> Result<Vec<ArcSample>> {
    let n = coarse.len();
    let grid = uniform_grid(ARC_LO, ARC_HI, 2 * n - 1);
    let odd: Vec<f64> = grid.iter().skip(1).step_by(2).copied().collect();
    let fresh = if with_delta {
        ev.samples(&odd, true, exec)?
    } else {
        bare_samples(&odd)
    };
    let mut out = Vec::with_capacity(2 * n - 1);
    for (i, s) in coarse.iter().enumerate() {
        out.push(s.clone());
        if let Some(f) = fresh.get(i) {
            out.push(f.clone());
        }
    }
    Ok(out)
}

/// The bound sweep for every weight in `ks` on a shared grid of
/// `resolution` points, plus `sup |F_k|`. The grid is refined to
/// `2n - 1` points (nested) until two successive grids agree on every
/// verdict, at most `max_doublings` times.
pub fn verify_bounds(
    ev: &ArcEvaluator,
    ks: &[u32],
    family: &CoefficientFamily,
    epsilon: f64,
    resolution: usize,
    max_doublings: usize,
    exec: Execution,
) -> Result<Vec<BoundReport>> {
    if resolution < 2 {
        return Err(Error::config(format!("resolution must be >= 2, got {resolution}")));
    }
    let with_delta = ks
        .iter()
        .any(|&k| !(family.is_zero_at(k) && family.is_zero_at(k + 12)));
    let sweep = |arc: &[ArcSample]| -> Result<Vec<Vec<BoundCheck>>> {
        par::map(exec, ks, |&k| {
            let mut checks = sweep_bounds(ev, k, family, epsilon, arc)?;
            let thetas: Vec<f64> = arc.iter().map(|s| s.theta).collect();
            checks.extend(sweep_sup_f(ev, k, &thetas)?);
            Ok(checks)
        })
        .into_iter()
        .collect()
    };
    let verdicts = |c: &[BoundCheck]| c.iter().map(BoundCheck::passed).collect::<Vec<_>>();

    let grid = uniform_grid(ARC_LO, ARC_HI, resolution);
    let mut arc = if with_delta {
        ev.samples(&grid, true, exec)?
    } else {
        bare_samples(&grid)
    };
    let mut checks = sweep(&arc)?;
    let mut stable = vec![max_doublings == 0; ks.len()];
    for _ in 0..max_doublings {
        arc = refine_samples(ev, &arc, with_delta, exec)?;
        let finer = sweep(&arc)?;
        for (i, (old, new)) in checks.iter().zip(&finer).enumerate() {
            stable[i] = verdicts(old) == verdicts(new);
        }
        checks = finer;
        if stable.iter().all(|&s| s) {
            break;
        }
    }
    Ok(ks
        .iter()
        .zip(checks)
        .zip(stable)
        .map(|((&k, checks), stable)| BoundReport {
            k,
            family: family.label.clone(),
            resolution: arc.len(),
            checks,
            stable,
        })
        .collect())
}

/// The remainder bounds for `k ≥ 24` on a given grid, requiring (cond2)
/// at `k` and `k + 12`.
pub fn verify_remainder_bounds(
    ev: &ArcEvaluator,
    k: u32,
    family: &CoefficientFamily,
    epsilon: f64,
    thetas: &[f64],
    exec: Execution,
) -> Result<BoundReport> {
    if k % 2 == 1 || k < 24 {
        return Err(Error::domain(format!("needs even k >= 24, got {k}")));
    }
    for kk in [k, k + 12] {
        if !check_condition(family, kk, Condition::Cond2, epsilon)?.satisfied {
            return Err(Error::config(format!("family violates (cond2) at weight {kk}")));
        }
    }
    let arc = ev.samples(thetas, true, exec)?;
    let checks = sweep_bounds(ev, k, family, epsilon, &arc)?
        .into_iter()
        .filter(|c| c.name != CHECK_TO_SHOW)
        .collect();
    Ok(BoundReport {
        k,
        family: family.label.clone(),
        resolution: thetas.len(),
        checks,
        stable: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn conditions_for_zero_family() {
        let z = CoefficientFamily::zero();
        let r = check_condition(&z, 24, Condition::Cond1, 0.0048).unwrap();
        assert_eq!((r.lhs, r.rhs, r.satisfied), (0.0, 0.978, true));
        let r = check_condition(&z, 12, Condition::Cond2, 0.0048).unwrap();
        assert_eq!((r.lhs, r.rhs, r.satisfied), (0.0, 0.3125, true));
        assert!(check_condition(&z, 12, Condition::Cond2, 0.0).is_err());
    }

    #[test]
    fn cond2_threshold_at_24() {
        let eps = 0.004808;
        let threshold = cond2_rhs(24) / ((3.0 + DELTA_12) * eps);
        let fam = |a: f64| {
            CoefficientFamily::new("t", BTreeMap::from([(24, vec![a, 0.0])])).unwrap()
        };
        assert!(check_condition(&fam(0.99 * threshold), 24, Condition::Cond2, eps).unwrap().satisfied);
        assert!(!check_condition(&fam(1.01 * threshold), 24, Condition::Cond2, eps).unwrap().satisfied);
    }

    #[test]
    fn family_validation() {
        assert!(CoefficientFamily::new("x", BTreeMap::from([(24, vec![1.0])])).is_err());
        assert!(CoefficientFamily::new("x", BTreeMap::from([(24, vec![1.0, f64::NAN])])).is_err());
        assert!(CoefficientFamily::new("x", BTreeMap::from([(10, vec![])])).is_err());
        let f = CoefficientFamily::new("x", BTreeMap::from([(14, vec![])])).unwrap();
        assert!(f.coefficients(26).is_err());
        assert_eq!(f.clone().with_implicit_zero(true).coefficients(36).unwrap().len(), 3);
    }

    #[test]
    fn scaled_family_spends_the_requested_budget() {
        let eps = 0.0048;
        let fam = CoefficientFamily::scaled_cond2(12, 72, 0.5, eps).unwrap();
        for k in (12..=72).step_by(2) {
            let r = check_condition(&fam, k, Condition::Cond2, eps).unwrap();
            if arith::m_of(k).unwrap() > 0 {
                assert_relative_eq!(r.lhs, 0.5 * r.rhs, max_relative = 1e-12);
            }
            assert!(r.satisfied);
        }
    }

    #[test]
    fn condition_is_monotone_in_scale() {
        let eps = 0.0048;
        let base = CoefficientFamily::scaled_cond2(36, 36, 0.3, eps).unwrap();
        let mut prev = true;
        for s in [0.5, 1.0, 2.0, 3.0, 3.2, 3.4, 5.0, 10.0] {
            let mut f = base.clone();
            for c in f.entries.values_mut() {
                c.iter_mut().for_each(|x| *x *= s);
            }
            let now = check_condition(&f, 36, Condition::Cond2, eps).unwrap().satisfied;
            assert!(prev || !now);
            prev = now;
        }
        assert!(!prev);
    }

    #[test]
    fn delta_endpoint_values() {
        let ev = ArcEvaluator::default();
        let at_i = ev.sample(ARC_LO, false).unwrap();
        assert!(at_i.f6.value.abs() < 1e-12);
        assert_relative_eq!(at_i.delta.value, at_i.f4.value.powi(3) / 1728.0, max_relative = 1e-9);
        let at_rho = ev.sample(ARC_HI, false).unwrap();
        assert!(at_rho.delta.value < 0.0);
        assert_relative_eq!(at_rho.delta.value, -at_rho.f6.value.powi(2) / 1728.0, max_relative = 1e-6);
        assert!(delta_on_arc(3.0, 100).is_err());
    }

    #[test]
    fn delta_has_one_sign_on_the_arc() {
        let ev = ArcEvaluator::default();
        for t in uniform_grid(ARC_LO, ARC_HI, 64) {
            let d = ev.delta(t).unwrap();
            assert!(d.is_certainly_negative(), "theta = {t}: {d:?}");
        }
    }

    #[test]
    fn g_of_zero_family_is_f() {
        let ev = ArcEvaluator::default();
        let z = CoefficientFamily::zero();
        for t in uniform_grid(ARC_LO, ARC_HI, 9) {
            let g = ev.g(24, t, &z).unwrap();
            let f = ev.f(24, t).unwrap();
            assert!((g.value - f.value).abs() < 1e-14);
        }
    }

    #[test]
    fn g_at_24_expands_with_delta_and_constant_term() {
        let ev = ArcEvaluator::default();
        let (a1, a2) = (0.3, -2.0);
        let fam = CoefficientFamily::new("t", BTreeMap::from([(24, vec![a1, a2])])).unwrap();
        let t = 1.8;
        let d = ev.delta(t).unwrap().value;
        let expect = ev.f(24, t).unwrap().value + a1 * ev.f(12, t).unwrap().value * d + a2 * d * d;
        let g = ev.g(24, t, &fam).unwrap();
        assert!((g.value - expect).abs() < 1e-13);
        assert!(g.radius > 0.0);
    }

    #[test]
    fn s_is_g_minus_cosine() {
        let ev = ArcEvaluator::default();
        let z = CoefficientFamily::zero();
        let t = 19.0 * PI / 32.0;
        let d = ev.decompose(48, t, &z).unwrap();
        assert!((d.g.value - 2.0 * (24.0 * t).cos() - d.s.value).abs() < 1e-13);
        assert!(d.s.is_certainly_positive() && d.s.hi() < 1.0);
        let s = eval_S(48, t, &z, 20).unwrap();
        assert_relative_eq!(s.value, d.s.value, max_relative = 1e-12);
    }

    #[test]
    fn auxiliary_gap_positive_from_24() {
        assert!(auxiliary_gap(24) > 0.0);
        assert!(0.877 / 1.192f64.powi(24) > 24.919 / 1.414f64.powi(24));
        for k in (24..=400).step_by(2) {
            assert!(auxiliary_gap(k) > 0.0, "k = {k}");
        }
    }

    #[test]
    fn g_gap_minimised_at_left_end() {
        let left = 19.0 * PI / 32.0;
        for k in (24..=120u32).step_by(2) {
            let m = arith::m_of(k).unwrap() as usize;
            let alpha_m = arith::cosine_zero_grid(GridKind::Alpha, k).unwrap().get(m).unwrap().radians();
            if alpha_m < left {
                continue;
            }
            let at_left = g_gap(k, left);
            for t in uniform_grid(left, alpha_m, 512) {
                assert!(g_gap(k, t) >= at_left * (1.0 - 1e-12), "k={k} t={t}");
            }
        }
    }

    #[test]
    fn epsilon_lower_bound_from_endpoints() {
        let e2 = epsilon_on_arc(2, 2000, Execution::Sequential).unwrap();
        let ev = ArcEvaluator::new(Truncation { high: 20, low: 2000 });
        let ends = ev.delta(ARC_LO).unwrap().value.abs().max(ev.delta(ARC_HI).unwrap().value.abs());
        assert!(e2.value >= ends);
        assert!(e2.value < 0.00481);
        assert!(epsilon_on_arc(1, 2000, Execution::Sequential).is_err());
    }

    #[test]
    fn remainder_bounds_precondition() {
        let ev = ArcEvaluator::default();
        let z = CoefficientFamily::zero();
        let grid = uniform_grid(ARC_LO, ARC_HI, 16);
        assert!(verify_remainder_bounds(&ev, 23, &z, 0.0048, &grid, Execution::Sequential).is_err());
        assert!(verify_remainder_bounds(&ev, 12, &z, 0.0048, &grid, Execution::Sequential).is_err());
        let r = verify_remainder_bounds(&ev, 24, &z, 0.0048, &grid, Execution::Sequential).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.checks.len(), 4);
    }
}
