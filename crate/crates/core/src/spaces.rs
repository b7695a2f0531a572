//! Sequence-space norms (weighted ℓᵖ, weighted Orlicz, variable exponent)
//! on finitely supported sequences, and the scaling map `(a)_r(n) = a(n)rⁿ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::FiniteSeq;
use crate::weights::{Domain, WeightFamily, WeightKind};

/// Grid size of the convexity check for tabulated Orlicz functions.
pub const CONVEXITY_GRID: usize = 512;
/// Relative bracket width at which the Luxemburg bisection stops.
pub const LUXEMBURG_REL_TOL: f64 = 1e-12;
const BRACKET_EXPANSIONS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum OrliczFunction {
    /// K(x) = xᵖ
    Power { p: f64 },
    /// Piecewise-linear through `values[i] = K(i·xmax/(len-1))`, continued
    /// past `xmax` with the last slope.
    TableSpline { xmax: f64, values: Vec<f64> },
}

impl OrliczFunction {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Construction(m));
        match self {
            OrliczFunction::Power { p } if !(p.is_finite() && *p >= 1.0) => {
                bad(format!("Orlicz power must be >= 1, got {p}"))
            }
            OrliczFunction::Power { .. } => Ok(()),
            OrliczFunction::TableSpline { xmax, values } => {
                if !(xmax.is_finite() && *xmax > 0.0) {
                    return bad(format!("xmax must be positive, got {xmax}"));
                }
                if values.len() < 2 {
                    return bad("an Orlicz table needs at least two samples".into());
                }
                if values[0] != 0.0 {
                    return bad("an Orlicz function must vanish at 0".into());
                }
                if values[1..].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return bad("an Orlicz function must be positive away from 0".into());
                }
                let h = xmax / (CONVEXITY_GRID - 1) as f64;
                let g: Vec<f64> = (0..CONVEXITY_GRID).map(|i| self.eval(i as f64 * h)).collect();
                let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if g.windows(2).any(|w| w[1] < w[0] - 1e-12 * scale) {
                    return bad("Orlicz function is not nondecreasing".into());
                }
                if g
                    .windows(3)
                    .any(|w| w[2] - 2.0 * w[1] + w[0] < -1e-12 * scale)
                {
                    return bad("Orlicz function is not convex".into());
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            OrliczFunction::Power { p } => x.powf(*p),
            OrliczFunction::TableSpline { xmax, values } => {
                let n = values.len() - 1;
                let h = xmax / n as f64;
                if x >= *xmax {
                    let slope = (values[n] - values[n - 1]) / h;
                    return values[n] + slope * (x - xmax);
                }
                let pos = x / h;
                let i = (pos.floor() as usize).min(n - 1);
                let t = pos - i as f64;
                values[i] * (1.0 - t) + values[i + 1] * t
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ExponentRule {
    Constant {
        p: f64,
    },
    /// `values[i]` is q(offset + i); every other index uses `outside`.
    Table {
        #[serde(default)]
        offset: i64,
        values: Vec<f64>,
        outside: f64,
    },
}

impl ExponentRule {
    pub fn eval(&self, n: i64) -> f64 {
        match self {
            ExponentRule::Constant { p } => *p,
            ExponentRule::Table {
                offset,
                values,
                outside,
            } => {
                let i = n - offset;
                if i >= 0 && (i as usize) < values.len() {
                    values[i as usize]
                } else {
                    *outside
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |q: f64| q.is_finite() && q >= 1.0;
        let fine = match self {
            ExponentRule::Constant { p } => ok(*p),
            ExponentRule::Table {
                values, outside, ..
            } => ok(*outside) && values.iter().all(|&q| ok(q)),
        };
        if fine {
            Ok(())
        } else {
            Err(Error::Construction("variable exponent must satisfy q(n) >= 1".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NormFamily {
    WeightedLp { p: f64, weight: WeightFamily },
    Orlicz { k: OrliczFunction, weight: WeightFamily },
    VariableExponent { q: ExponentRule },
}

impl NormFamily {
    pub fn name(&self) -> &'static str {
        match self {
            NormFamily::WeightedLp { .. } => "weighted_lp",
            NormFamily::Orlicz { .. } => "orlicz",
            NormFamily::VariableExponent { .. } => "variable_exponent",
        }
    }
}

/// A sequence space: index domain plus norm family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub domain: Domain,
    pub norm: NormFamily,
}

impl SpaceSpec {
    pub fn new(domain: Domain, norm: NormFamily) -> Result<Self> {
        let s = SpaceSpec { domain, norm };
        s.validate()?;
        Ok(s)
    }

    pub fn weighted_lp(p: f64, weight: WeightFamily) -> Result<Self> {
        Self::new(weight.domain, NormFamily::WeightedLp { p, weight })
    }

    pub fn orlicz(k: OrliczFunction, weight: WeightFamily) -> Result<Self> {
        Self::new(weight.domain, NormFamily::Orlicz { k, weight })
    }

    pub fn variable_exponent(domain: Domain, q: ExponentRule) -> Result<Self> {
        Self::new(domain, NormFamily::VariableExponent { q })
    }

    /// Unweighted ℓ² on the given domain.
    pub fn l2(domain: Domain) -> Self {
        SpaceSpec {
            domain,
            norm: NormFamily::WeightedLp {
                p: 2.0,
                weight: WeightFamily::constant(domain),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.norm {
            NormFamily::WeightedLp { p, weight } => {
                if !(p.is_finite() && *p >= 1.0) {
                    return Err(Error::Construction(format!("p must be >= 1, got {p}")));
                }
                self.check_weight(weight)
            }
            NormFamily::Orlicz { k, weight } => {
                k.validate()?;
                self.check_weight(weight)
            }
            NormFamily::VariableExponent { q } => q.validate(),
        }
    }

    fn check_weight(&self, weight: &WeightFamily) -> Result<()> {
        weight.validate()?;
        if weight.domain != self.domain {
            return Err(Error::Construction(
                "weight domain does not match space domain".into(),
            ));
        }
        Ok(())
    }

    pub fn weight(&self) -> Option<&WeightFamily> {
        match &self.norm {
            NormFamily::WeightedLp { weight, .. } | NormFamily::Orlicz { weight, .. } => {
                Some(weight)
            }
            NormFamily::VariableExponent { .. } => None,
        }
    }

    /// The exponent p of a weighted ℓᵖ space.
    pub fn lp_exponent(&self) -> Option<f64> {
        match &self.norm {
            NormFamily::WeightedLp { p, .. } => Some(*p),
            _ => None,
        }
    }

    pub fn is_hilbert(&self) -> bool {
        self.lp_exponent() == Some(2.0)
    }

    /// Weight kind when the family is weighted ℓ².
    pub fn hilbert_weight(&self) -> Result<&WeightFamily> {
        match &self.norm {
            NormFamily::WeightedLp { p, weight } if *p == 2.0 => Ok(weight),
            other => Err(Error::UnsupportedNorm(format!(
                "operation needs a weighted l2 space, got {}{}",
                other.name(),
                self.lp_exponent().map(|p| format!(" with p = {p}")).unwrap_or_default()
            ))),
        }
    }

    pub fn weight_kind(&self) -> Option<&WeightKind> {
        self.weight().map(|w| &w.kind)
    }

    pub(crate) fn check_support(&self, f: &FiniteSeq) -> Result<()> {
        if self.domain == Domain::Unilateral {
            if let Some(lo) = f.min_index() {
                if lo < 0 {
                    return Err(Error::Domain {
                        index: lo,
                        domain: "Z+",
                    });
                }
            }
        }
        Ok(())
    }
}

/// Norm of a finitely supported sequence.
pub fn space_norm(space: &SpaceSpec, f: &FiniteSeq) -> Result<f64> {
    space.check_support(f)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    match &space.norm {
        NormFamily::WeightedLp { p, weight } => {
            let terms: Vec<f64> = f
                .iter()
                .map(|(n, c)| {
                    if c.norm() == 0.0 {
                        Ok(0.0)
                    } else {
                        Ok((c.norm().ln() + weight.log_eval(n)?).exp())
                    }
                })
                .collect::<Result<_>>()?;
            Ok(scaled_p_sum(&terms, *p))
        }
        NormFamily::Orlicz { k, weight } => {
            let data: Vec<(f64, f64)> = f
                .iter()
                .map(|(n, c)| Ok((c.norm(), weight.eval(n)?)))
                .collect::<Result<_>>()?;
            luxemburg(&data, |t| {
                data.iter().map(|&(a, w)| k.eval(a / t) * w).sum()
            })
        }
        NormFamily::VariableExponent { q } => {
            let data: Vec<(f64, f64, f64)> = f.iter().map(|(n, c)| (c.norm(), 1.0, q.eval(n))).collect();
            let pairs: Vec<(f64, f64)> = data.iter().map(|&(a, w, _)| (a, w)).collect();
            luxemburg(&pairs, |t| {
                data.iter().map(|&(a, _, qn)| (a / t).powf(qn)).sum()
            })
        }
    }
}

/// (Σ xᵢᵖ)^{1/p} without overflow.
fn scaled_p_sum(terms: &[f64], p: f64) -> f64 {
    let m = terms.iter().fold(0.0f64, |m, &x| m.max(x));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: f64 = terms.iter().map(|&x| (x / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// Luxemburg norm `inf{t > 0 : modular(t) ≤ 1}` by bisection. The modular
/// is strictly decreasing in `t` on a nonzero support.
fn luxemburg(
    data: &[(f64, f64)],
    modular: impl Fn(f64) -> f64,
) -> Result<f64> {
    let amax = data.iter().fold(0.0f64, |m, &(a, _)| m.max(a));
    let wmax = data
        .iter()
        .filter(|&&(a, _)| a > 0.0)
        .fold(0.0f64, |m, &(_, w)| m.max(w));
    let mut hi: f64 = data.iter().map(|&(a, w)| a * w.max(1.0)).sum();
    let mut lo = amax * 1e-6 / (1.0 + wmax);
    for _ in 0..BRACKET_EXPANSIONS {
        if modular(hi) <= 1.0 {
            break;
        }
        hi *= 10.0;
    }
    for _ in 0..BRACKET_EXPANSIONS {
        if modular(lo) > 1.0 {
            break;
        }
        lo /= 10.0;
    }
    if !(modular(hi) <= 1.0 && modular(lo) > 1.0) {
        return Err(Error::Argument(
            "Luxemburg bracket does not straddle modular value 1".into(),
        ));
    }
    while hi - lo > LUXEMBURG_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if modular(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `(f)_r(n) = f(n)·rⁿ` on the same support window.
pub fn scale_seq(f: &FiniteSeq, r: Complex64) -> Result<FiniteSeq> {
    if r.norm() == 0.0 {
        return Err(Error::Argument("scaling factor must be nonzero".into()));
    }
    let coeffs = f.iter().map(|(n, c)| c * complex_pow(r, n)).collect();
    Ok(FiniteSeq::new(f.offset(), coeffs))
}

pub(crate) fn complex_pow(z: Complex64, n: i64) -> Complex64 {
    if n >= 0 {
        z.powi(n as i32)
    } else {
        z.inv().powi((-n) as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn l2_two_atoms() {
        let s = SpaceSpec::l2(Domain::Bilateral);
        let f = FiniteSeq::delta(0).add(&FiniteSeq::delta(1));
        assert!((space_norm(&s, &f).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn orlicz_square_matches_l2() {
        let s = SpaceSpec::orlicz(
            OrliczFunction::Power { p: 2.0 },
            WeightFamily::constant(Domain::Bilateral),
        )
        .unwrap();
        let f = FiniteSeq::from_real(0, &[3.0, 4.0]);
        assert!((space_norm(&s, &f).unwrap() - 5.0).abs() < 1e-10);
    }

    #[test]
    fn variable_exponent_single_atom() {
        let s = SpaceSpec::variable_exponent(Domain::Bilateral, ExponentRule::Constant { p: 3.0 }).unwrap();
        let f = FiniteSeq::atom(0, c(2.0));
        assert!((space_norm(&s, &f).unwrap() - 2.0).abs() < 1e-11);
    }

    #[test]
    fn zero_sequence_has_zero_norm() {
        let s = SpaceSpec::variable_exponent(Domain::Bilateral, ExponentRule::Constant { p: 3.0 }).unwrap();
        assert_eq!(space_norm(&s, &FiniteSeq::zero()).unwrap(), 0.0);
    }

    #[test]
    fn unilateral_rejects_negative_support() {
        let s = SpaceSpec::l2(Domain::Unilateral);
        assert!(matches!(
            space_norm(&s, &FiniteSeq::delta(-1)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn table_spline_validation() {
        let ok = OrliczFunction::TableSpline {
            xmax: 2.0,
            values: vec![0.0, 0.5, 2.0, 4.5],
        };
        ok.validate().unwrap();
        assert!((ok.eval(3.0) - 8.25).abs() < 1e-12);
        assert!((ok.eval(1.0) - 1.25).abs() < 1e-12);
        let concave = OrliczFunction::TableSpline {
            xmax: 1.0,
            values: vec![0.0, 1.0, 1.5, 1.75],
        };
        assert!(matches!(concave.validate(), Err(Error::Construction(_))));
        let nonzero = OrliczFunction::TableSpline {
            xmax: 1.0,
            values: vec![0.1, 1.0],
        };
        assert!(nonzero.validate().is_err());
    }

    #[test]
    fn table_spline_orlicz_norm() {
        // K(x) = x² sampled exactly at the nodes; linear interpolation is an
        // upper bound of x², so the norm can only grow relative to l2
        let k = OrliczFunction::TableSpline {
            xmax: 4.0,
            values: (0..=64).map(|i| (i as f64 / 16.0).powi(2)).collect(),
        };
        let s = SpaceSpec::orlicz(k, WeightFamily::constant(Domain::Bilateral)).unwrap();
        let f = FiniteSeq::from_real(0, &[0.3, -0.4]);
        let n = space_norm(&s, &f).unwrap();
        assert!(n >= 0.5 - 1e-12 && n < 0.51);
    }

    #[test]
    fn scale_seq_examples() {
        let f = FiniteSeq::from_real(-1, &[1.0, 2.0, 3.0]);
        assert_eq!(scale_seq(&f, c(1.0)).unwrap(), f);
        let e = scale_seq(&FiniteSeq::delta(3), c(2.0)).unwrap();
        assert_eq!(e, FiniteSeq::atom(3, c(8.0)));
        assert!(matches!(scale_seq(&f, c(0.0)), Err(Error::Argument(_))));
    }
}
