//! Certified isolation of the zeros of `G_k` on the open arc.
//!
//! `G_k` stays within 2 of `2cos(kθ/2)`, so it takes the sign of `cos(kθ/2)`
//! at the extrema `2πn/k` (`k/4 ≤ n ≤ k/3`); each of the `m(k)` gaps holds a
//! zero. Every sign used is decided by a certificate, never by a point value.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{self, decompose_weight, GridKind, PiMultiple};
use crate::forms::{check_condition, ArcEvaluator, CoefficientFamily, Condition, ConditionReport};
use crate::par::{self, Execution};
use crate::{Certified, Error, Result, ARC_HI, ARC_LO};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_NUDGE: f64 = 1e-6 * (ARC_HI - ARC_LO);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroOptions {
    /// Target bracket width in θ.
    pub tol: f64,
    /// Inward shift for extrema sitting on an arc endpoint.
    pub nudge: f64,
    /// How many times the truncation may double when a sign is undecided.
    pub max_escalations: u32,
    pub exec: Execution,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        ZeroOptions {
            tol: DEFAULT_TOL,
            nudge: DEFAULT_NUDGE,
            max_escalations: 6,
            exec: Execution::default(),
        }
    }
}

impl ZeroOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.nudge > 0.0) || self.nudge >= (ARC_HI - ARC_LO) / 4.0 {
            return Err(Error::config(format!(
                "need tol > 0 and 0 < nudge < pi/24 (tol = {}, nudge = {})",
                self.tol, self.nudge
            )));
        }
        Ok(())
    }
}

/// `2πn/k` for `k/4 ≤ n ≤ k/3`, as exact multiples of π.
pub fn extremum_points(k: u32) -> Result<Vec<PiMultiple>> {
    let w = decompose_weight(k)?;
    if k < 12 {
        return Err(Error::domain(format!("extremum grid needs k >= 12, got {k}")));
    }
    let lo = k.div_ceil(4);
    let hi = k / 3;
    let pts: Vec<PiMultiple> = (lo..=hi)
        .map(|n| PiMultiple(Ratio::new(2 * n as i64, k as i64)))
        .collect();
    debug_assert_eq!(pts.len(), w.m as usize + 1);
    Ok(pts)
}

/// The extremum points of `cos(kθ/2)` on the closed arc, increasing.
pub fn extremum_grid(k: u32) -> Result<Vec<f64>> {
    Ok(extremum_points(k)?.iter().map(PiMultiple::radians).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroBracket {
    /// 1-based index `j`.
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub g_lo: Certified,
    pub g_hi: Certified,
    pub refined_root: f64,
    pub width_at_refinement: f64,
    /// Whether the width went below `tol`; otherwise refinement stopped at
    /// an undecidable midpoint.
    pub tol_reached: bool,
    /// Largest truncation level needed for a sign in this bracket.
    pub a_trunc: u64,
}

impl ZeroBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo < theta && theta < self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub k: u32,
    pub family: String,
    pub m: u32,
    pub count: usize,
    pub brackets: Vec<ZeroBracket>,
    pub cond1: ConditionReport,
    /// `G_k` at `π/2` and `2π/3`, for the record only.
    pub arc_endpoints: [Certified; 2],
    /// Count matches and (cond1) holds.
    pub certified: bool,
}

impl ZeroSet {
    pub fn roots(&self) -> Vec<f64> {
        self.brackets.iter().map(|b| b.refined_root).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.brackets.iter().map(ZeroBracket::width).fold(0.0, f64::max)
    }
}

/// Sign evaluation with truncation escalation.
struct Signer<'a> {
    ev: &'a ArcEvaluator,
    k: u32,
    family: &'a CoefficientFamily,
    max_escalations: u32,
}

impl Signer<'_> {
    /// `G_k(θ)` at the lowest level `≥ *level` whose certificate decides the
    /// sign; `Ok(Err(last))` if none up to the cap does.
    fn eval(&self, theta: f64, level: &mut u32) -> Result<std::result::Result<(Certified, u64), (Certified, u64)>> {
        loop {
            let t = self.ev.truncation().escalated(*level);
            let g = self.ev.with_truncation(t).g(self.k, theta, self.family)?;
            if g.sign().is_some() {
                return Ok(Ok((g, t.high)));
            }
            if *level >= self.max_escalations {
                return Ok(Err((g, t.high)));
            }
            *level += 1;
        }
    }

    fn certain(&self, theta: f64, level: &mut u32) -> Result<(Certified, u64)> {
        match self.eval(theta, level)? {
            Ok(v) => Ok(v),
            Err((g, a)) => Err(Error::Uncertified {
                theta,
                value: g.value,
                radius: g.radius,
                a_trunc: a,
            }),
        }
    }
}

/// Brackets and refines the `m(k)` zeros of `G_k` on `(π/2, 2π/3)`.
///
/// If (cond1) fails at `k` the result is computed anyway but `certified` is
/// false.
pub fn isolate_zeros(
    ev: &ArcEvaluator,
    k: u32,
    family: &CoefficientFamily,
    epsilon: f64,
    opts: &ZeroOptions,
) -> Result<ZeroSet> {
    opts.validate()?;
    let w = decompose_weight(k)?;
    let cond1 = check_condition(family, k, Condition::Cond1, epsilon)?;
    let points = extremum_points(k)?;
    let mut ext: Vec<f64> = points.iter().map(PiMultiple::radians).collect();
    if let (Some(p), Some(t)) = (points.first(), ext.first_mut()) {
        if p.0 == arith::arc_lo() {
            *t = ARC_LO + opts.nudge;
        }
    }
    if let (Some(p), Some(t)) = (points.last(), ext.last_mut()) {
        if p.0 == arith::arc_hi() {
            *t = ARC_HI - opts.nudge;
        }
    }
    let signer = Signer {
        ev,
        k,
        family,
        max_escalations: opts.max_escalations,
    };

    let ends: Vec<(Certified, u64)> = par::map(opts.exec, &ext, |&t| signer.certain(t, &mut 0))
        .into_iter()
        .collect::<Result<_>>()?;
    for (i, pair) in ends.windows(2).enumerate() {
        if pair[0].0.sign() == pair[1].0.sign() {
            return Err(Error::Structural(format!(
                "G_{k} has the same sign at consecutive extrema {} and {} (bracket {})",
                ext[i],
                ext[i + 1],
                i + 1
            )));
        }
    }

    let brackets: Vec<ZeroBracket> = par::map_range(opts.exec, 0..w.m as usize, |i| {
        refine(&signer, i + 1, (ext[i], ends[i]), (ext[i + 1], ends[i + 1]), opts.tol)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    if brackets.len() != w.m as usize {
        return Err(Error::Structural(format!(
            "found {} brackets for k = {k}, expected {}",
            brackets.len(),
            w.m
        )));
    }
    let arc_endpoints = [ev.g(k, ARC_LO, family)?, ev.g(k, ARC_HI, family)?];
    Ok(ZeroSet {
        k,
        family: family.label.clone(),
        m: w.m,
        count: brackets.len(),
        certified: cond1.satisfied,
        brackets,
        cond1,
        arc_endpoints,
    })
}

fn refine(
    signer: &Signer<'_>,
    index: usize,
    (mut lo, (mut g_lo, a_lo)): (f64, (Certified, u64)),
    (mut hi, (mut g_hi, a_hi)): (f64, (Certified, u64)),
    tol: f64,
) -> Result<ZeroBracket> {
    let lo_sign = g_lo.sign();
    let mut level = 0;
    let mut a_max = a_lo.max(a_hi);
    let mut tol_reached = true;
    while hi - lo >= tol {
        let w = hi - lo;
        let mut step = None;
        for frac in [0.5, 0.25, 0.75, 0.375, 0.625] {
            let t = lo + frac * w;
            if t <= lo || t >= hi {
                continue;
            }
            if let Ok((g, a)) = signer.eval(t, &mut level)? {
                a_max = a_max.max(a);
                step = Some((t, g));
                break;
            }
        }
        match step {
            Some((t, g)) if g.sign() == lo_sign => {
                lo = t;
                g_lo = g;
            }
            Some((t, g)) => {
                hi = t;
                g_hi = g;
            }
            None => {
                tol_reached = false;
                break;
            }
        }
    }
    Ok(ZeroBracket {
        index,
        lo,
        hi,
        g_lo,
        g_hi,
        refined_root: lo + (hi - lo) / 2.0,
        width_at_refinement: hi - lo,
        tol_reached,
        a_trunc: a_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationEntry {
    pub j: usize,
    pub alpha: PiMultiple,
    /// `α_j + 6π/(k(k+12)) ≤ 23π/36`.
    pub fine_regime: bool,
    /// `α_j ≥ 19π/32 + π/(3k)`.
    pub upper_regime: bool,
    pub coarse_ok: bool,
    /// Distance from the bracket to the edge of the coarse interval.
    pub coarse_margin: f64,
    pub fine_ok: Option<bool>,
    pub fine_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub k: u32,
    pub entries: Vec<LocalizationEntry>,
    pub all_covered: bool,
    pub all_ok: bool,
}

/// `6/(k(k+12))`, the fine half-width in units of π.
pub fn fine_radius(k: u32) -> PiMultiple {
    PiMultiple(Ratio::new(6, k as i64 * (k as i64 + 12)))
}

/// `1/(3k)`, the coarse half-width in units of π.
pub fn coarse_radius(k: u32) -> PiMultiple {
    PiMultiple(Ratio::new(1, 3 * k as i64))
}

/// `23/36`, the upper edge of the fine regime.
pub fn fine_ceiling() -> PiMultiple {
    PiMultiple(Ratio::new(23, 36))
}

/// `19/32`, the lower edge of the positivity interval for `S_k`.
pub fn upper_floor() -> PiMultiple {
    PiMultiple(Ratio::new(19, 32))
}

/// `α_j + 6π/(k(k+12)) ≤ 23π/36`, exactly.
pub fn in_fine_regime(alpha: PiMultiple, k: u32) -> bool {
    alpha.0 + fine_radius(k).0 <= fine_ceiling().0
}

/// `α_j ≥ 19π/32 + π/(3k)`, exactly.
pub fn in_upper_regime(alpha: PiMultiple, k: u32) -> bool {
    alpha.0 >= upper_floor().0 + coarse_radius(k).0
}

/// Membership of every bracket (not just its midpoint) in the coarse
/// `±π/(3k)` interval and, where it applies, the fine `±6π/(k(k+12))` one.
pub fn check_localization(zero_set: &ZeroSet) -> Result<LocalizationReport> {
    let k = zero_set.k;
    let alphas = arith::cosine_zero_grid(GridKind::Alpha, k)?;
    if alphas.len() != zero_set.brackets.len() {
        return Err(Error::Structural(format!(
            "{} brackets but {} zeros of cos(k theta/2) for k = {k}",
            zero_set.brackets.len(),
            alphas.len()
        )));
    }
    let margin = |b: &ZeroBracket, centre: f64, r: f64| (centre + r - b.hi).min(b.lo - (centre - r));
    let entries: Vec<LocalizationEntry> = alphas
        .points
        .iter()
        .zip(&zero_set.brackets)
        .enumerate()
        .map(|(i, (&alpha, b))| {
            let a = alpha.radians();
            let coarse_margin = margin(b, a, coarse_radius(k).radians());
            let fine_regime = in_fine_regime(alpha, k);
            let fine_margin = fine_regime.then(|| margin(b, a, fine_radius(k).radians()));
            LocalizationEntry {
                j: i + 1,
                alpha,
                fine_regime,
                upper_regime: in_upper_regime(alpha, k),
                coarse_ok: coarse_margin > 0.0,
                coarse_margin,
                fine_ok: fine_margin.map(|m| m > 0.0),
                fine_margin,
            }
        })
        .collect();
    let all_covered = entries.iter().all(|e| e.fine_regime || e.upper_regime);
    let all_ok = entries.iter().all(|e| e.coarse_ok && e.fine_ok != Some(false));
    Ok(LocalizationReport {
        k,
        entries,
        all_covered,
        all_ok,
    })
}

/// Whether `cos(nθ/2)` is increasing at its zero `z`.
pub fn cos_increasing_at(n: u32, z: PiMultiple) -> bool {
    (n as f64 * z.radians() / 2.0).sin() < 0.0
}
