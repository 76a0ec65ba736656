//! Interlacing of the zeros of `G_k` and `G_{k+12}`.
//!
//! Verdicts compare bracket boundaries: `β*_j < α*_j` holds when the
//! bracket of `β*_j` ends before the bracket of `α*_j` starts.

use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{self, decompose_weight, GridKind, PiMultiple};
use crate::forms::{check_condition, uniform_grid, ArcEvaluator, CoefficientFamily, Condition, ConditionReport};
use crate::zeros::{
    coarse_radius, cos_increasing_at, in_fine_regime, in_upper_regime, isolate_zeros, upper_floor, ZeroBracket,
    ZeroOptions, ZeroSet,
};
use crate::{Error, Result, ARC_HI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    I,
    IIa,
    IIb,
    V,
    VI,
    Uncovered,
}

/// Which argument governs each inequality at index `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTags {
    pub k: u32,
    pub j: usize,
    /// `α_j ≤ 23π/36 - 6π/(k(k+12))`.
    pub case_i: bool,
    /// `α_j ≥ 19π/32 + π/(3k)`.
    pub case_ii: bool,
    /// `cos(kθ/2)` increasing at `α_j`.
    pub increasing: bool,
    /// `β_j ≥ 19π/32 + π/(3(k+12))`.
    pub beta_upper: bool,
    /// `β_{j+1} + 6π/((k+12)(k+24)) ≤ 23π/36`.
    pub beta_next_fine: bool,
    /// Tag for `β*_j < α*_j`.
    pub left: CaseTag,
    /// Tag for `α*_j < β*_{j+1}`.
    pub right: CaseTag,
}

fn grids(k: u32) -> Result<(arith::CosZeroGrid, arith::CosZeroGrid, arith::CosZeroGrid)> {
    Ok((
        arith::cosine_zero_grid(GridKind::Alpha, k)?,
        arith::cosine_zero_grid(GridKind::Beta, k)?,
        arith::cosine_zero_grid(GridKind::Gamma, k)?,
    ))
}

/// Case tags from the closed-form grids alone.
pub fn classify_cases(k: u32, j: usize) -> Result<CaseTags> {
    let w = decompose_weight(k)?;
    if j == 0 || j > w.m as usize {
        return Err(Error::domain(format!("index j = {j} outside 1..={} for k = {k}", w.m)));
    }
    let (alphas, betas, _) = grids(k)?;
    let a = alphas.get(j).expect("index checked");
    let b = betas.get(j).expect("m(k+12) = m(k) + 1");
    let b_next = betas.get(j + 1).expect("m(k+12) = m(k) + 1");
    classify(k, j, a, b, b_next)
}

fn classify(k: u32, j: usize, a: PiMultiple, b: PiMultiple, b_next: PiMultiple) -> Result<CaseTags> {
    let case_i = in_fine_regime(a, k);
    let case_ii = in_upper_regime(a, k);
    let increasing = cos_increasing_at(k, a);
    let beta_upper = in_upper_regime(b, k + 12);
    let beta_next_fine = in_fine_regime(b_next, k + 12);
    let ii = if increasing { CaseTag::IIa } else { CaseTag::IIb };
    let left = match (case_ii, case_i) {
        (true, _) if beta_upper => ii,
        (true, _) => CaseTag::VI,
        (false, true) => CaseTag::I,
        (false, false) => CaseTag::Uncovered,
    };
    let right = match (case_i, case_ii) {
        (true, _) if beta_next_fine => CaseTag::I,
        (true, _) => CaseTag::V,
        (false, true) => ii,
        (false, false) => CaseTag::Uncovered,
    };
    Ok(CaseTags {
        k,
        j,
        case_i,
        case_ii,
        increasing,
        beta_upper,
        beta_next_fine,
        left,
        right,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    /// Brackets overlap; tighten `tol`.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub verdict: Verdict,
    /// `lo` of the later bracket minus `hi` of the earlier one.
    pub margin: f64,
    /// Margin exceeds twice the wider bracket.
    pub strict: bool,
    pub case: CaseTag,
}

fn compare(first: &ZeroBracket, second: &ZeroBracket, case: CaseTag) -> Comparison {
    let margin = second.lo - first.hi;
    let verdict = if margin > 0.0 {
        Verdict::Holds
    } else if first.lo > second.hi {
        Verdict::Fails
    } else {
        Verdict::Indeterminate
    };
    Comparison {
        verdict,
        margin,
        strict: margin > 2.0 * first.width().max(second.width()),
        case,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexVerdict {
    pub j: usize,
    /// `β*_j < α*_j`.
    pub left: Comparison,
    /// `α*_j < β*_{j+1}`.
    pub right: Comparison,
}

impl IndexVerdict {
    pub fn holds(&self) -> bool {
        self.left.verdict == Verdict::Holds && self.right.verdict == Verdict::Holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingCertificate {
    pub k: u32,
    pub family: String,
    pub zeros_k: ZeroSet,
    pub zeros_k12: ZeroSet,
    pub cond2_k: ConditionReport,
    pub cond2_k12: ConditionReport,
    pub verdicts: Vec<IndexVerdict>,
    /// Every verdict holds.
    pub interlaced: bool,
    /// `interlaced`, (cond2) at both weights, and both zero sets certified.
    pub certified: bool,
}

impl InterlacingCertificate {
    pub fn min_margin(&self) -> f64 {
        self.verdicts
            .iter()
            .flat_map(|v| [v.left.margin, v.right.margin])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn all_strict(&self) -> bool {
        self.verdicts.iter().all(|v| v.left.strict && v.right.strict)
    }
}

/// Isolates the zeros at `k` and `k + 12` and compares them index by index.
pub fn verify_interlacing(
    ev: &ArcEvaluator,
    k: u32,
    family: &CoefficientFamily,
    epsilon: f64,
    opts: &ZeroOptions,
) -> Result<InterlacingCertificate> {
    let w = decompose_weight(k)?;
    let cond2_k = check_condition(family, k, Condition::Cond2, epsilon)?;
    let cond2_k12 = check_condition(family, k + 12, Condition::Cond2, epsilon)?;
    let zeros_k = isolate_zeros(ev, k, family, epsilon, opts)?;
    let zeros_k12 = isolate_zeros(ev, k + 12, family, epsilon, opts)?;
    if zeros_k12.count != zeros_k.count + 1 {
        return Err(Error::Structural(format!(
            "{} zeros at k = {k} but {} at k + 12",
            zeros_k.count, zeros_k12.count
        )));
    }
    let (alphas, betas, _) = grids(k)?;
    let verdicts: Vec<IndexVerdict> = (1..=w.m as usize)
        .map(|j| {
            let tags = classify(
                k,
                j,
                alphas.points[j - 1],
                betas.points[j - 1],
                betas.points[j],
            )?;
            let a = &zeros_k.brackets[j - 1];
            Ok(IndexVerdict {
                j,
                left: compare(&zeros_k12.brackets[j - 1], a, tags.left),
                right: compare(a, &zeros_k12.brackets[j], tags.right),
            })
        })
        .collect::<Result<_>>()?;
    let interlaced = verdicts.iter().all(IndexVerdict::holds);
    let certified =
        interlaced && cond2_k.satisfied && cond2_k12.satisfied && zeros_k.certified && zeros_k12.certified;
    Ok(InterlacingCertificate {
        k,
        family: family.label.clone(),
        zeros_k,
        zeros_k12,
        cond2_k,
        cond2_k12,
        verdicts,
        interlaced,
        certified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanicsCheck {
    pub j: Option<usize>,
    pub name: String,
    pub holds: bool,
    /// The quantity whose sign decides the check.
    pub detail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMechanicsReport {
    pub k: u32,
    /// True below weight 24, where the intermediate bounds do not apply.
    pub skipped: bool,
    pub tags: Vec<CaseTags>,
    pub checks: Vec<MechanicsCheck>,
}

impl CaseMechanicsReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &MechanicsCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// `2sin(π/6 - 4π/k) < 1 - 4√3π/k`.
pub fn tangent_line_gap(k: u32) -> f64 {
    let k = k as f64;
    1.0 - 4.0 * 3f64.sqrt() * PI / k - 2.0 * (PI / 6.0 - 4.0 * PI / k).sin()
}

/// `12/k - 12/(k+12) + (4√3π - 12)/k - 42.718 (1/2)^{k/2}`.
pub fn closing_gap(k: u32) -> f64 {
    let kf = k as f64;
    12.0 / kf - 12.0 / (kf + 12.0) + (4.0 * 3f64.sqrt() * PI - 12.0) / kf - 42.718 * 0.5f64.powi((k / 2) as i32)
}

/// `j > (5k+24)/72` (`k ≡ 0 mod 4`) or `j > (5k-12)/72`, exactly.
pub fn j_condition(k: u32, j: usize) -> bool {
    let k = k as i64;
    let rhs = if k % 4 == 0 { 5 * k + 24 } else { 5 * k - 12 };
    72 * j as i64 > rhs
}

/// The intermediate facts behind each case, checked numerically against a
/// computed certificate. Diagnostic only: the verdict does not depend on it.
pub fn verify_case_mechanics(
    ev: &ArcEvaluator,
    cert: &InterlacingCertificate,
    family: &CoefficientFamily,
    samples: usize,
) -> Result<CaseMechanicsReport> {
    let k = cert.k;
    let (alphas, betas, gammas) = grids(k)?;
    let tags: Vec<CaseTags> = (1..=alphas.len())
        .map(|j| classify(k, j, alphas.points[j - 1], betas.points[j - 1], betas.points[j]))
        .collect::<Result<_>>()?;
    if k < 24 {
        return Ok(CaseMechanicsReport {
            k,
            skipped: true,
            tags,
            checks: Vec::new(),
        });
    }
    let mut checks = Vec::new();
    let mut push = |j: Option<usize>, name: &str, detail: f64, holds: bool| {
        checks.push(MechanicsCheck {
            j,
            name: name.to_string(),
            holds,
            detail,
        })
    };
    push(None, "tangent-line", tangent_line_gap(k), tangent_line_gap(k) > 0.0);
    push(None, "closing-chain", closing_gap(k), closing_gap(k) > 0.0);

    // S_k > 0 on [19π/32, 2π/3 - 2π/(3k)], so zeros there shift with the slope
    let s_positive = |z: PiMultiple, n: u32| {
        z.0 >= upper_floor().0 && z.0 <= arith::arc_hi() - Ratio::new(2, 3 * n as i64)
    };
    // increasing ⇒ the zero of G sits left of the cosine zero. Bracket
    // ends have certified nonzero G, so touching the cosine zero is enough.
    let shift = |b: &ZeroBracket, z: PiMultiple, n: u32| -> (f64, bool) {
        let zr = z.radians();
        if cos_increasing_at(n, z) {
            (zr - b.hi, b.hi <= zr)
        } else {
            (b.lo - zr, b.lo >= zr)
        }
    };

    for t in &tags {
        let j = t.j;
        let covered = t.left != CaseTag::Uncovered && t.right != CaseTag::Uncovered;
        push(Some(j), "covered", 0.0, covered);
        if t.right == CaseTag::V {
            push(Some(j), "v-falls-in-case-ii", 0.0, t.case_ii);
        }
        if t.left == CaseTag::VI {
            push(Some(j), "vi-falls-in-case-i", 0.0, t.case_i);
        }
        if !t.case_ii {
            continue;
        }
        let a = alphas.points[j - 1];
        let b = betas.points[j - 1];
        let b_next = betas.points[j];
        let za = &cert.zeros_k.brackets[j - 1];
        let zb = &cert.zeros_k12.brackets[j - 1];
        let zb_next = &cert.zeros_k12.brackets[j];

        let parity = cos_increasing_at(k, a) != cos_increasing_at(k + 12, b);
        push(Some(j), "slope-parity", 0.0, parity);
        push(
            Some(j),
            "slope-parity-next",
            0.0,
            cos_increasing_at(k, a) == cos_increasing_at(k + 12, b_next),
        );
        if s_positive(a, k) {
            let (d, ok) = shift(za, a, k);
            push(Some(j), "alpha-shift", d, ok);
        }
        if s_positive(b_next, k + 12) {
            let (d, ok) = shift(zb_next, b_next, k + 12);
            push(Some(j), "beta-next-shift", d, ok);
        }
        if t.beta_upper && s_positive(b, k + 12) {
            let (d, ok) = shift(zb, b, k + 12);
            push(Some(j), "beta-shift", d, ok);
        }

        if t.increasing {
            let g = gammas.get(j).expect("gamma grid covers 1..=m");
            if g.0 >= upper_floor().0 {
                let gr = g.radians();
                let gk = ev.g(k, gr, family)?;
                let gk12 = ev.g(k + 12, gr, family)?;
                push(Some(j), "gamma-sign-k", gk.hi(), gk.is_certainly_negative());
                push(Some(j), "gamma-sign-k12", gk12.hi(), gk12.is_certainly_negative());
            }
        } else if b_next.0 < a.0 + coarse_radius(k).0 {
            push(Some(j), "j-condition", j as f64, j_condition(k, j));
            let lo = b_next.radians();
            let hi = (a.0 + coarse_radius(k).0).min(arith::arc_hi());
            let hi = PiMultiple(hi).radians().min(ARC_HI);
            let grid = uniform_grid(lo, hi, samples.max(2));
            let r = |t: f64| 2.0 * ((k + 12) as f64 * t / 2.0).cos() - 2.0 * (k as f64 * t / 2.0).cos();
            let worst_step = grid
                .windows(2)
                .map(|p| r(p[0]) - r(p[1]))
                .fold(f64::INFINITY, f64::min);
            push(Some(j), "r-decreasing", worst_step, worst_step > -1e-12);
            let mut worst = f64::INFINITY;
            for &th in &grid {
                let diff = ev.g(k + 12, th, family)?.sub(ev.g(k, th, family)?);
                worst = worst.min(diff.lo());
            }
            push(Some(j), "g-ineq", worst, worst > 0.0);
        }
    }
    Ok(CaseMechanicsReport {
        k,
        skipped: false,
        tags,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_index_is_covered() {
        for k in (12..=400u32).step_by(2) {
            for j in 1..=arith::m_of(k).unwrap() as usize {
                let t = classify_cases(k, j).unwrap();
                assert!(t.case_i || t.case_ii, "k={k} j={j}");
                assert_ne!(t.left, CaseTag::Uncovered);
                assert_ne!(t.right, CaseTag::Uncovered);
                if t.right == CaseTag::V {
                    assert!(t.case_ii && k >= 24);
                }
                if t.left == CaseTag::VI {
                    assert!(t.case_i);
                }
            }
        }
    }

    #[test]
    fn small_and_top_indices() {
        let t = classify_cases(120, 1).unwrap();
        assert_eq!((t.left, t.right), (CaseTag::I, CaseTag::I));
        let m = arith::m_of(120).unwrap() as usize;
        let t = classify_cases(120, m).unwrap();
        assert!(t.case_ii && matches!(t.left, CaseTag::IIa | CaseTag::IIb));
        assert!(classify_cases(120, 0).is_err());
        assert!(classify_cases(120, m + 1).is_err());
    }

    #[test]
    fn tangent_and_closing_gaps() {
        for k in (24..=400).step_by(2) {
            assert!(tangent_line_gap(k) > 0.0, "k={k}");
            assert!(closing_gap(k) > 0.0, "k={k}");
        }
    }

    #[test]
    fn nozaki_case_k12() {
        let ev = ArcEvaluator::default();
        let fam = CoefficientFamily::zero();
        let c = verify_interlacing(&ev, 12, &fam, 0.0048, &ZeroOptions::default()).unwrap();
        assert!(c.interlaced && c.certified);
        assert_eq!(c.zeros_k12.count, 2);
        let mech = verify_case_mechanics(&ev, &c, &fam, 32).unwrap();
        assert!(mech.skipped);
    }

    #[test]
    fn k14_is_vacuous() {
        let ev = ArcEvaluator::default();
        let c = verify_interlacing(&ev, 14, &CoefficientFamily::zero(), 0.0048, &ZeroOptions::default()).unwrap();
        assert!(c.verdicts.is_empty() && c.interlaced);
    }

    #[test]
    fn mechanics_hold_for_k36() {
        let ev = ArcEvaluator::default();
        let fam = CoefficientFamily::zero();
        let c = verify_interlacing(&ev, 36, &fam, 0.0048, &ZeroOptions::default()).unwrap();
        assert!(c.certified && c.all_strict());
        let mech = verify_case_mechanics(&ev, &c, &fam, 64).unwrap();
        let bad: Vec<_> = mech.failures().collect();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn uncertified_when_cond2_fails() {
        let ev = ArcEvaluator::default();
        let eps = 0.0048;
        let mut fam = CoefficientFamily::scaled_cond2(24, 36, 1.0, eps).unwrap();
        for c in fam.entries.values_mut() {
            c.iter_mut().for_each(|x| *x *= 1.5);
        }
        if let Ok(c) = verify_interlacing(&ev, 24, &fam, eps, &ZeroOptions::default()) {
            assert!(!c.certified);
        }
    }
}
