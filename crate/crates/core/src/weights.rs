//! Weight families on ℤ and ℤ⁺, norms of shift powers, boundedness of the
//! shifts and their spectral radii.
//!
//! On a weighted ℓᵖ space the k-th power of the shift `(Sx)(n) = x(n-1)` has
//! norm `sup_n ω(n+k)/ω(n)`, the supremum running over indices with both
//! `n` and `n+k` in the domain. Negative `k` is the backward direction. All
//! ratio computations run on `ln ω` so that fast-growing families such as
//! `e^{n²}` never overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::spaces::{NormFamily, SpaceSpec};

/// Half-width of the brute-force window used for suprema without closed form.
pub const DEFAULT_WINDOW: i64 = 1024;
/// Divergence rule: this many trailing window ratios must increase ...
pub const DIVERGENCE_RUN: usize = 64;
/// ... and the last one must exceed this value.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// ℤ
    Bilateral,
    /// ℤ⁺ = {0, 1, 2, ...}
    Unilateral,
}

impl Domain {
    pub fn contains(&self, n: i64) -> bool {
        match self {
            Domain::Bilateral => true,
            Domain::Unilateral => n >= 0,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Domain::Bilateral => "Z",
            Domain::Unilateral => "Z+",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(&self) -> i64 {
        match self {
            Direction::Forward => 1,
            Direction::Backward => -1,
        }
    }
}

/// How a [`WeightKind::Table`] continues past its stored entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum TableTail {
    /// Repeat the boundary entry.
    Constant,
    /// Continue with ratio `a` between consecutive indices on both ends.
    Geometric { a: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// ω ≡ 1
    Constant,
    /// ω(n) = aⁿ
    Geometric { a: f64 },
    /// ω(n) = e^{α|n|}
    TwoSidedExp { alpha: f64 },
    /// ω(n) = (1+|n|)^s
    Polynomial { s: f64 },
    /// ω(n) = e^{n²} for n ≥ 0 and 1 for n < 0
    PiecewiseSuperExp,
    /// Stored entries for indices `offset .. offset + entries.len()`.
    Table {
        #[serde(default)]
        offset: i64,
        entries: Vec<f64>,
        tail: TableTail,
    },
}

/// A positive weight on ℤ or ℤ⁺.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFamily {
    pub kind: WeightKind,
    pub domain: Domain,
}

/// A shift-power norm together with whether it is exact or only the
/// supremum over a finite window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftNorm {
    pub value: ExtReal,
    pub window_limited: bool,
}

impl ShiftNorm {
    fn exact(v: f64) -> Self {
        ShiftNorm {
            value: ExtReal::from_f64(v),
            window_limited: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusBracket {
    pub lower: ExtReal,
    pub upper: ExtReal,
}

impl RadiusBracket {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundednessCertificate {
    /// Supremum of ω(n±1)/ω(n), with the window index where it is attained
    /// (absent when it is only approached in a tail).
    SupRatio { sup: f64, attained_at: Option<i64> },
    /// Trailing `(n, ln(ω(n±1)/ω(n)))` values of an unbounded ratio sequence.
    Divergent { log_ratios: Vec<(i64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundedness {
    pub bounded: bool,
    pub certificate: BoundednessCertificate,
}

struct WindowScan {
    log_sup: f64,
    argmax: Option<i64>,
    log_ratios: Vec<(i64, f64)>,
}

impl WindowScan {
    fn diverges(&self) -> bool {
        let n = self.log_ratios.len();
        if n < DIVERGENCE_RUN {
            return false;
        }
        let tail = &self.log_ratios[n - DIVERGENCE_RUN..];
        let increasing = tail.windows(2).all(|w| w[1].1 > w[0].1);
        increasing && tail[DIVERGENCE_RUN - 1].1 > DIVERGENCE_THRESHOLD.ln()
    }
}

impl WeightFamily {
    pub fn new(kind: WeightKind, domain: Domain) -> Result<Self> {
        let w = WeightFamily { kind, domain };
        w.validate()?;
        Ok(w)
    }

    pub fn constant(domain: Domain) -> Self {
        WeightFamily {
            kind: WeightKind::Constant,
            domain,
        }
    }

    pub fn geometric(a: f64, domain: Domain) -> Result<Self> {
        Self::new(WeightKind::Geometric { a }, domain)
    }

    pub fn two_sided_exp(alpha: f64, domain: Domain) -> Result<Self> {
        Self::new(WeightKind::TwoSidedExp { alpha }, domain)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Construction(m));
        match &self.kind {
            WeightKind::Geometric { a } if !(a.is_finite() && *a > 0.0) => {
                bad(format!("geometric ratio must be positive and finite, got {a}"))
            }
            WeightKind::TwoSidedExp { alpha } if !alpha.is_finite() => {
                bad(format!("exponent must be finite, got {alpha}"))
            }
            WeightKind::Polynomial { s } if !s.is_finite() => {
                bad(format!("polynomial degree must be finite, got {s}"))
            }
            WeightKind::Table {
                offset,
                entries,
                tail,
            } => {
                if entries.is_empty() {
                    return bad("weight table is empty".into());
                }
                if let Some(e) = entries.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
                    return bad(format!("weight table entries must be positive, got {e}"));
                }
                if let TableTail::Geometric { a } = tail {
                    if !(a.is_finite() && *a > 0.0) {
                        return bad(format!("geometric tail ratio must be positive, got {a}"));
                    }
                }
                if self.domain == Domain::Unilateral && *offset != 0 {
                    return bad("a weight table on Z+ must start at index 0".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn check(&self, n: i64) -> Result<()> {
        if self.domain.contains(n) {
            Ok(())
        } else {
            Err(Error::Domain {
                index: n,
                domain: self.domain.name(),
            })
        }
    }

    /// ω(n).
    pub fn eval(&self, n: i64) -> Result<f64> {
        self.check(n)?;
        Ok(match &self.kind {
            WeightKind::Constant => 1.0,
            WeightKind::Geometric { a } => a.powf(n as f64),
            WeightKind::TwoSidedExp { alpha } => (alpha * n.unsigned_abs() as f64).exp(),
            WeightKind::Polynomial { s } => (1.0 + n.unsigned_abs() as f64).powf(*s),
            WeightKind::PiecewiseSuperExp => {
                if n >= 0 {
                    ((n as f64) * (n as f64)).exp()
                } else {
                    1.0
                }
            }
            WeightKind::Table {
                offset,
                entries,
                tail,
            } => {
                let last = *offset + entries.len() as i64 - 1;
                let a = match tail {
                    TableTail::Constant => 1.0,
                    TableTail::Geometric { a } => *a,
                };
                if n < *offset {
                    entries[0] * a.powf((n - offset) as f64)
                } else if n > last {
                    entries[entries.len() - 1] * a.powf((n - last) as f64)
                } else {
                    entries[(n - offset) as usize]
                }
            }
        })
    }

    /// ln ω(n).
    pub fn log_eval(&self, n: i64) -> Result<f64> {
        self.check(n)?;
        Ok(self.log_eval_unchecked(n))
    }

    fn log_eval_unchecked(&self, n: i64) -> f64 {
        match &self.kind {
            WeightKind::Constant => 0.0,
            WeightKind::Geometric { a } => n as f64 * a.ln(),
            WeightKind::TwoSidedExp { alpha } => alpha * n.unsigned_abs() as f64,
            WeightKind::Polynomial { s } => s * (1.0 + n.unsigned_abs() as f64).ln(),
            WeightKind::PiecewiseSuperExp => {
                if n >= 0 {
                    (n as f64) * (n as f64)
                } else {
                    0.0
                }
            }
            WeightKind::Table {
                offset,
                entries,
                tail,
            } => {
                let last = *offset + entries.len() as i64 - 1;
                let log_ratio = match tail {
                    TableTail::Constant => 0.0,
                    TableTail::Geometric { a } => a.ln(),
                };
                if n < *offset {
                    entries[0].ln() + (n - offset) as f64 * log_ratio
                } else if n > last {
                    entries[entries.len() - 1].ln() + (n - last) as f64 * log_ratio
                } else {
                    entries[(n - offset) as usize].ln()
                }
            }
        }
    }

    /// Range of `n` for which both `n` and `n+k` lie in the domain, clipped
    /// to `[-half_width, half_width]`.
    fn ratio_range(&self, k: i64, lo: i64, hi: i64) -> std::ops::RangeInclusive<i64> {
        let lo = match self.domain {
            Domain::Bilateral => lo,
            Domain::Unilateral => lo.max(0).max(-k),
        };
        lo..=hi
    }

    fn scan(&self, k: i64, lo: i64, hi: i64) -> WindowScan {
        let mut log_sup = f64::NEG_INFINITY;
        let mut argmax = None;
        let mut log_ratios = Vec::new();
        for n in self.ratio_range(k, lo, hi) {
            let lr = self.log_eval_unchecked(n + k) - self.log_eval_unchecked(n);
            if lr > log_sup {
                log_sup = lr;
                argmax = Some(n);
            }
            log_ratios.push((n, lr));
        }
        WindowScan {
            log_sup,
            argmax,
            log_ratios,
        }
    }

    /// ‖Sᵏ‖ on a weighted ℓᵖ space with this weight.
    pub fn shift_norm(&self, k: i64) -> ShiftNorm {
        if k == 0 {
            return ShiftNorm::exact(1.0);
        }
        let kf = k as f64;
        let bilateral = self.domain == Domain::Bilateral;
        match &self.kind {
            WeightKind::Constant => ShiftNorm::exact(1.0),
            WeightKind::Geometric { a } => ShiftNorm::exact(a.powf(kf)),
            WeightKind::TwoSidedExp { alpha } => {
                if bilateral {
                    ShiftNorm::exact((alpha.abs() * kf.abs()).exp())
                } else {
                    ShiftNorm::exact((alpha * kf).exp())
                }
            }
            WeightKind::Polynomial { s } => {
                let grow = (1.0 + kf.abs()).powf(s.abs());
                if bilateral || s * kf > 0.0 {
                    ShiftNorm::exact(grow)
                } else {
                    // ratios increase towards 1 without attaining it
                    ShiftNorm::exact(1.0)
                }
            }
            WeightKind::PiecewiseSuperExp => {
                if k < 0 {
                    if bilateral {
                        ShiftNorm::exact(1.0)
                    } else {
                        ShiftNorm::exact((-kf * kf).exp())
                    }
                } else {
                    // closed-form tail e^{2nk+k²} is unbounded; let the
                    // window decide
                    self.window_shift_norm(k, DEFAULT_WINDOW, true)
                }
            }
            WeightKind::Table {
                offset, entries, ..
            } => {
                // beyond this window both n and n+k sit in the same analytic
                // tail where the ratio is constant, so the scan is exact
                let lo = offset - k.abs() - 2;
                let hi = offset + entries.len() as i64 + k.abs() + 2;
                let scan = self.scan(k, lo, hi);
                ShiftNorm::exact(scan.log_sup.exp())
            }
        }
    }

    /// Brute-force supremum over `|n| ≤ half_width`, applying the divergence
    /// rule when `unbounded_tail` says the family's closed-form tail grows
    /// without bound.
    pub fn window_shift_norm(&self, k: i64, half_width: i64, unbounded_tail: bool) -> ShiftNorm {
        let scan = self.scan(k, -half_width, half_width);
        if unbounded_tail && scan.diverges() {
            ShiftNorm {
                value: ExtReal::Infinite,
                window_limited: false,
            }
        } else {
            ShiftNorm {
                value: ExtReal::from_f64(scan.log_sup.exp()),
                window_limited: true,
            }
        }
    }

    /// Exact spectral radius of the forward (S) or backward (S⁻¹ / 𝐒₋₁)
    /// shift when the family determines it in closed form.
    pub fn closed_form_radius(&self, direction: Direction) -> Option<ExtReal> {
        let fwd = direction == Direction::Forward;
        let bilateral = self.domain == Domain::Bilateral;
        let v = match &self.kind {
            WeightKind::Constant | WeightKind::Polynomial { .. } => ExtReal::ONE,
            WeightKind::Geometric { a } => ExtReal::Finite(if fwd { *a } else { 1.0 / a }),
            WeightKind::TwoSidedExp { alpha } => {
                let r = if bilateral {
                    alpha.abs()
                } else if fwd {
                    *alpha
                } else {
                    -alpha
                };
                ExtReal::Finite(r.exp())
            }
            WeightKind::PiecewiseSuperExp => match (fwd, bilateral) {
                (true, _) => ExtReal::Infinite,
                (false, true) => ExtReal::ONE,
                (false, false) => ExtReal::ZERO,
            },
            WeightKind::Table { .. } => return None,
        };
        Some(v)
    }

    /// Spectral radius implied by the analytic tails of a table weight; a
    /// lower bound that is in fact the exact radius.
    fn table_tail_radius(&self, direction: Direction) -> Option<ExtReal> {
        match &self.kind {
            WeightKind::Table { tail, .. } => {
                let a = match tail {
                    TableTail::Constant => 1.0,
                    TableTail::Geometric { a } => *a,
                };
                Some(ExtReal::Finite(match direction {
                    Direction::Forward => a,
                    Direction::Backward => 1.0 / a,
                }))
            }
            _ => None,
        }
    }

    /// True when the closed-form growth of ω(n+k)/ω(n) is unbounded.
    pub fn has_unbounded_tail(&self, k: i64) -> bool {
        matches!(self.kind, WeightKind::PiecewiseSuperExp) && k > 0
    }
}

fn weighted_lp_weight(space: &SpaceSpec) -> Result<&WeightFamily> {
    match &space.norm {
        NormFamily::WeightedLp { weight, .. } => Ok(weight),
        other => Err(Error::UnsupportedNorm(format!(
            "shift norms need a weighted lp space, got {}",
            other.name()
        ))),
    }
}

/// ‖Sᵏ‖ with the window-limited flag.
pub fn shift_norm_detail(space: &SpaceSpec, k: i64) -> Result<ShiftNorm> {
    Ok(weighted_lp_weight(space)?.shift_norm(k))
}

/// ‖Sᵏ‖ on a weighted ℓᵖ space, `+∞` when the power is unbounded.
pub fn shift_norm(space: &SpaceSpec, k: i64) -> Result<ExtReal> {
    Ok(shift_norm_detail(space, k)?.value)
}

/// Bracket for the spectral radius of the forward or backward shift from
/// the Gelfand formula `ρ = inf_n ‖Sⁿ‖^{1/n}` over `1 ≤ n ≤ horizon`.
pub fn spectral_radius_shift(
    space: &SpaceSpec,
    direction: Direction,
    horizon: usize,
) -> Result<RadiusBracket> {
    if horizon == 0 {
        return Err(Error::Argument("horizon must be at least 1".into()));
    }
    let weight = weighted_lp_weight(space)?;
    let sign = direction.sign();
    if !weight.shift_norm(sign).value.is_finite() {
        return Ok(RadiusBracket {
            lower: ExtReal::Infinite,
            upper: ExtReal::Infinite,
        });
    }
    if let Some(rho) = weight.closed_form_radius(direction) {
        return Ok(RadiusBracket {
            lower: rho,
            upper: rho,
        });
    }
    // min over every computed n: ‖Sⁿ‖^{1/n} need not be monotone
    let mut upper = ExtReal::Infinite;
    let mut last = ExtReal::Infinite;
    for n in 1..=horizon as i64 {
        let norm = weight.shift_norm(sign * n).value;
        let root = ExtReal::from_f64(norm.to_f64().powf(1.0 / n as f64));
        upper = upper.min(root);
        last = root;
    }
    let lower = weight.table_tail_radius(direction).unwrap_or(last).min(upper);
    Ok(RadiusBracket { lower, upper })
}

/// Whether the forward or backward shift is bounded, with a witness.
pub fn boundedness(space: &SpaceSpec, direction: Direction) -> Result<Boundedness> {
    let weight = weighted_lp_weight(space)?;
    let k = direction.sign();
    let norm = weight.shift_norm(k);
    let scan = weight.scan(k, -DEFAULT_WINDOW, DEFAULT_WINDOW);
    if norm.value.is_finite() {
        let sup = norm.value.to_f64();
        // report the window index only if the window actually attains the sup
        let attained_at = scan
            .argmax
            .filter(|_| (scan.log_sup.exp() - sup).abs() <= 1e-12 * sup.max(1.0));
        Ok(Boundedness {
            bounded: true,
            certificate: BoundednessCertificate::SupRatio { sup, attained_at },
        })
    } else {
        let n = scan.log_ratios.len();
        let log_ratios = scan.log_ratios[n.saturating_sub(8)..].to_vec();
        Ok(Boundedness {
            bounded: false,
            certificate: BoundednessCertificate::Divergent { log_ratios },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn lp(kind: WeightKind, domain: Domain) -> SpaceSpec {
        SpaceSpec::weighted_lp(2.0, WeightFamily::new(kind, domain).unwrap()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let z = Domain::Bilateral;
        assert_eq!(WeightFamily::constant(z).eval(7).unwrap(), 1.0);
        assert_eq!(WeightFamily::geometric(2.0, z).unwrap().eval(3).unwrap(), 8.0);
        let w = WeightFamily::two_sided_exp(1.0, z).unwrap();
        assert!((w.eval(-2).unwrap() - 7.3890560989).abs() < 1e-9);
    }

    #[test]
    fn unilateral_rejects_negative_index() {
        let w = WeightFamily::constant(Domain::Unilateral);
        assert!(matches!(w.eval(-1), Err(Error::Domain { index: -1, .. })));
    }

    #[test]
    fn table_extension_rules() {
        let w = WeightFamily::new(
            WeightKind::Table {
                offset: -1,
                entries: vec![1.0, 2.0, 3.0],
                tail: TableTail::Geometric { a: 2.0 },
            },
            Domain::Bilateral,
        )
        .unwrap();
        assert!((w.eval(3).unwrap() - 12.0).abs() < 1e-12);
        assert!((w.eval(-3).unwrap() - 0.25).abs() < 1e-12);
        let c = WeightFamily::new(
            WeightKind::Table {
                offset: 0,
                entries: vec![1.0, 5.0],
                tail: TableTail::Constant,
            },
            Domain::Unilateral,
        )
        .unwrap();
        assert_eq!(c.eval(100).unwrap(), 5.0);
        assert!(WeightFamily::new(
            WeightKind::Table {
                offset: 0,
                entries: vec![1.0, -5.0],
                tail: TableTail::Constant,
            },
            Domain::Unilateral,
        )
        .is_err());
    }

    #[test]
    fn shift_norm_examples() {
        let c = lp(WeightKind::Constant, Domain::Bilateral);
        assert_eq!(shift_norm(&c, 5).unwrap(), ExtReal::ONE);
        let g = lp(WeightKind::Geometric { a: 2.0 }, Domain::Bilateral);
        assert_eq!(shift_norm(&g, 3).unwrap(), ExtReal::Finite(8.0));
        let p = lp(WeightKind::PiecewiseSuperExp, Domain::Bilateral);
        assert_eq!(shift_norm(&p, 1).unwrap(), ExtReal::Infinite);
        assert_eq!(shift_norm(&p, -1).unwrap(), ExtReal::ONE);
    }

    #[test]
    fn table_shift_norm_is_exact() {
        let s = lp(
            WeightKind::Table {
                offset: -2,
                entries: vec![1.0, 4.0, 1.0, 1.0],
                tail: TableTail::Constant,
            },
            Domain::Bilateral,
        );
        let d = shift_norm_detail(&s, 1).unwrap();
        assert_eq!(d.value, ExtReal::Finite(4.0));
        assert!(!d.window_limited);
        assert_eq!(shift_norm(&s, -1).unwrap(), ExtReal::Finite(4.0));
    }

    #[test]
    fn radius_examples() {
        let c = lp(WeightKind::Constant, Domain::Bilateral);
        let b = spectral_radius_shift(&c, Direction::Forward, 16).unwrap();
        assert_eq!((b.lower, b.upper), (ExtReal::ONE, ExtReal::ONE));
        let g = lp(WeightKind::Geometric { a: 2.0 }, Domain::Bilateral);
        let b = spectral_radius_shift(&g, Direction::Forward, 16).unwrap();
        assert_eq!((b.lower, b.upper), (ExtReal::Finite(2.0), ExtReal::Finite(2.0)));
        let p = lp(WeightKind::PiecewiseSuperExp, Domain::Bilateral);
        let b = spectral_radius_shift(&p, Direction::Forward, 8).unwrap();
        assert_eq!((b.lower, b.upper), (ExtReal::Infinite, ExtReal::Infinite));
        assert!(spectral_radius_shift(&p, Direction::Forward, 0).is_err());
    }

    #[test]
    fn table_radius_bracket_narrows() {
        let s = lp(
            WeightKind::Table {
                offset: 0,
                entries: vec![1.0, 9.0, 1.0],
                tail: TableTail::Geometric { a: 1.5 },
            },
            Domain::Bilateral,
        );
        let mut prev = spectral_radius_shift(&s, Direction::Forward, 1).unwrap();
        for h in [2, 4, 8, 16, 32, 64] {
            let b = spectral_radius_shift(&s, Direction::Forward, h).unwrap();
            assert!(b.lower >= prev.lower && b.upper <= prev.upper);
            assert_eq!(b.lower, ExtReal::Finite(1.5));
            prev = b;
        }
        assert!(prev.upper.to_f64() - 1.5 < 0.1);
    }

    #[test]
    fn boundedness_examples() {
        let t = lp(WeightKind::TwoSidedExp { alpha: 1.0 }, Domain::Bilateral);
        let b = boundedness(&t, Direction::Forward).unwrap();
        assert!(b.bounded);
        match b.certificate {
            BoundednessCertificate::SupRatio { sup, attained_at } => {
                assert!((sup - E).abs() < 1e-12);
                assert!(attained_at.is_some());
            }
            _ => panic!("expected a sup ratio"),
        }
        let p = lp(WeightKind::PiecewiseSuperExp, Domain::Bilateral);
        let b = boundedness(&p, Direction::Forward).unwrap();
        assert!(!b.bounded);
        assert!(matches!(b.certificate, BoundednessCertificate::Divergent { .. }));
        let b = boundedness(&p, Direction::Backward).unwrap();
        assert!(b.bounded);
        assert!(matches!(b.certificate, BoundednessCertificate::SupRatio { sup, .. } if sup == 1.0));
    }

    #[test]
    fn unsupported_norm_family() {
        let s = SpaceSpec::variable_exponent(
            Domain::Bilateral,
            crate::spaces::ExponentRule::Constant { p: 2.0 },
        )
        .unwrap();
        assert!(matches!(shift_norm(&s, 1), Err(Error::UnsupportedNorm(_))));
        assert!(matches!(
            boundedness(&s, Direction::Forward),
            Err(Error::UnsupportedNorm(_))
        ));
    }
}
