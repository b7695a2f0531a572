//! Convolution multipliers, the projection P⁺, Toeplitz operators and their
//! finite sections.
//!
//! Finite sections are built in the coordinates `y(n) = x(n)ω(n)` in which
//! weighted ℓ² is isometric to plain ℓ², so an operator with kernel `φ(i−j)`
//! becomes the matrix `φ(i−j)·ω(i)/ω(j)`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::{largest_singular_value, DenseMatrix};
use crate::seq::FiniteSeq;
use crate::spaces::SpaceSpec;
use crate::weights::{shift_norm, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    /// M_φ f = φ ∗ f on ℤ.
    Multiplier { phi: FiniteSeq },
    /// T_φ u = P⁺(φ ∗ u) on ℤ⁺.
    Toeplitz { phi: FiniteSeq },
    /// Sᵏ on ℤ; on ℤ⁺ the power 𝐒ᵏ (k > 0) or 𝐒₋₁^{−k} (k < 0).
    ShiftPower { k: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub space: SpaceSpec,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind, space: SpaceSpec) -> Result<Self> {
        match (&kind, space.domain) {
            (OperatorKind::Toeplitz { .. }, Domain::Bilateral) => Err(Error::Construction(
                "Toeplitz operators live on a unilateral space".into(),
            )),
            (OperatorKind::Multiplier { .. }, Domain::Unilateral) => Err(Error::Construction(
                "multipliers live on a bilateral space".into(),
            )),
            _ => Ok(OperatorSpec { kind, space }),
        }
    }

    pub fn multiplier(phi: FiniteSeq, space: SpaceSpec) -> Result<Self> {
        Self::new(OperatorKind::Multiplier { phi }, space)
    }

    pub fn toeplitz(phi: FiniteSeq, space: SpaceSpec) -> Result<Self> {
        Self::new(OperatorKind::Toeplitz { phi }, space)
    }

    pub fn shift_power(k: i64, space: SpaceSpec) -> Result<Self> {
        Self::new(OperatorKind::ShiftPower { k }, space)
    }

    /// Convolution kernel; `e_k` for shift powers.
    pub fn kernel(&self) -> FiniteSeq {
        match &self.kind {
            OperatorKind::Multiplier { phi } | OperatorKind::Toeplitz { phi } => phi.clone(),
            OperatorKind::ShiftPower { k } => FiniteSeq::delta(*k),
        }
    }

    pub fn domain(&self) -> Domain {
        self.space.domain
    }
}

/// Exact finite convolution.
pub fn convolve(phi: &FiniteSeq, f: &FiniteSeq) -> FiniteSeq {
    if phi.is_zero() || f.is_zero() {
        return FiniteSeq::zero();
    }
    let a = phi.coeffs();
    let b = f.coeffs();
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    FiniteSeq::new(phi.offset() + f.offset(), out)
}

/// P⁺: drop the coefficients at negative indices.
pub fn project_plus(u: &FiniteSeq) -> FiniteSeq {
    match u.support() {
        None => FiniteSeq::zero(),
        Some((_, hi)) if hi < 0 => FiniteSeq::zero(),
        Some((lo, hi)) => {
            let lo = lo.max(0);
            FiniteSeq::new(lo, (lo..=hi).map(|n| u.get(n)).collect())
        }
    }
}

pub fn apply_operator(op: &OperatorSpec, f: &FiniteSeq) -> Result<FiniteSeq> {
    op.space.check_support(f)?;
    let out = convolve(&op.kernel(), f);
    Ok(match op.domain() {
        Domain::Bilateral => out,
        Domain::Unilateral => project_plus(&out),
    })
}

/// Compression of an operator to the index window `lo..=hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSection {
    pub lo: i64,
    pub hi: i64,
    pub matrix: DenseMatrix,
}

impl FiniteSection {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Matrix position of index `n`, if it lies in the window.
    pub fn position(&self, n: i64) -> Option<usize> {
        (self.lo..=self.hi).contains(&n).then(|| (n - self.lo) as usize)
    }

    /// Row-major CSV, one matrix row per line as `re,im` pairs.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.dim() {
            let row = self.matrix.row(i);
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{},{}", v.re, v.im);
            }
            s.push('\n');
        }
        s
    }
}

/// Section on `[−N, N]` (bilateral) or `[0, N]` (unilateral).
pub fn finite_section(op: &OperatorSpec, n: usize) -> Result<FiniteSection> {
    let n = n as i64;
    match op.domain() {
        Domain::Bilateral => finite_section_window(op, -n, n),
        Domain::Unilateral => finite_section_window(op, 0, n),
    }
}

/// Section on an arbitrary window `lo..=hi` inside the domain.
pub fn finite_section_window(op: &OperatorSpec, lo: i64, hi: i64) -> Result<FiniteSection> {
    let weight = op.space.hilbert_weight()?;
    if hi < lo {
        return Err(Error::Argument(format!("empty window [{lo}, {hi}]")));
    }
    if !op.domain().contains(lo) {
        return Err(Error::Domain {
            index: lo,
            domain: "Z+",
        });
    }
    let phi = op.kernel();
    let dim = (hi - lo + 1) as usize;
    let logw: Vec<f64> = (lo..=hi)
        .map(|n| weight.log_eval(n))
        .collect::<Result<_>>()?;
    let mut matrix = DenseMatrix::zeros(dim);
    if let Some((pmin, pmax)) = phi.support() {
        for i in 0..dim {
            for d in pmin..=pmax {
                let j = i as i64 - d;
                if j < 0 || j >= dim as i64 {
                    continue;
                }
                let c = phi.get(d);
                if c.norm() == 0.0 {
                    continue;
                }
                let j = j as usize;
                matrix.set(i, j, c * (logw[i] - logw[j]).exp());
            }
        }
    }
    Ok(FiniteSection { lo, hi, matrix })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    /// Largest singular value of the finite section; absent for p ≠ 2.
    pub lower: Option<f64>,
    /// Σ |φ(k)|·‖Sᵏ‖.
    pub upper: ExtReal,
}

/// Σ_k |φ(k)|·‖Sᵏ‖ on a weighted ℓᵖ space.
pub fn norm_upper_bound(phi: &FiniteSeq, space: &SpaceSpec) -> Result<ExtReal> {
    let mut total = ExtReal::ZERO;
    for (k, c) in phi.iter() {
        if c.norm() == 0.0 {
            continue;
        }
        total = total.add(ExtReal::Finite(c.norm()).mul(shift_norm(space, k)?));
    }
    Ok(total)
}

pub fn operator_norm_bracket(op: &OperatorSpec, n: usize) -> Result<NormBracket> {
    let upper = norm_upper_bound(&op.kernel(), &op.space)?;
    let lower = if op.space.is_hilbert() {
        Some(largest_singular_value(&finite_section(op, n)?.matrix))
    } else {
        None
    };
    Ok(NormBracket { lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{WeightFamily, WeightKind};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn l2(kind: WeightKind, domain: Domain) -> SpaceSpec {
        SpaceSpec::weighted_lp(2.0, WeightFamily::new(kind, domain).unwrap()).unwrap()
    }

    #[test]
    fn convolution_basics() {
        let f = FiniteSeq::from_real(-2, &[1.0, 2.0, 3.0]);
        assert_eq!(convolve(&FiniteSeq::delta(0), &f), f);
        assert_eq!(convolve(&FiniteSeq::delta(1), &FiniteSeq::delta(1)), FiniteSeq::delta(2));
        assert!(convolve(&FiniteSeq::zero(), &f).is_zero());
    }

    #[test]
    fn projection() {
        let u = FiniteSeq::delta(-1).add(&FiniteSeq::delta(2));
        assert_eq!(project_plus(&u), FiniteSeq::delta(2));
        assert!(project_plus(&FiniteSeq::delta(-3)).is_zero());
        let f = FiniteSeq::from_real(0, &[1.0, 0.0, 4.0]);
        assert_eq!(project_plus(&f), f);
    }

    #[test]
    fn toeplitz_backward_shift() {
        let s = SpaceSpec::l2(Domain::Unilateral);
        let t = OperatorSpec::toeplitz(FiniteSeq::delta(-1), s.clone()).unwrap();
        assert!(apply_operator(&t, &FiniteSeq::delta(0)).unwrap().is_zero());
        assert_eq!(apply_operator(&t, &FiniteSeq::delta(1)).unwrap(), FiniteSeq::delta(0));
        let fwd = OperatorSpec::shift_power(1, s.clone()).unwrap();
        let bwd = OperatorSpec::shift_power(-1, s).unwrap();
        let f = FiniteSeq::from_real(0, &[1.0, -2.0, 0.5]);
        let back = apply_operator(&bwd, &apply_operator(&fwd, &f).unwrap()).unwrap();
        assert_eq!(back, f);
        let e0 = FiniteSeq::delta(0);
        let lost = apply_operator(&fwd, &apply_operator(&bwd, &e0).unwrap()).unwrap();
        assert!(lost.is_zero());
    }

    #[test]
    fn invariants_on_spaces() {
        let s = SpaceSpec::l2(Domain::Bilateral);
        assert!(OperatorSpec::toeplitz(FiniteSeq::delta(0), s).is_err());
        let u = SpaceSpec::l2(Domain::Unilateral);
        assert!(OperatorSpec::multiplier(FiniteSeq::delta(0), u.clone()).is_err());
        let t = OperatorSpec::toeplitz(FiniteSeq::delta(0), u).unwrap();
        assert!(matches!(
            apply_operator(&t, &FiniteSeq::delta(-1)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn section_examples() {
        let g = l2(WeightKind::Geometric { a: 3.0 }, Domain::Bilateral);
        let id = finite_section(&OperatorSpec::multiplier(FiniteSeq::delta(0), g).unwrap(), 4).unwrap();
        assert_eq!(id.matrix, DenseMatrix::identity(9));
        let s = finite_section(
            &OperatorSpec::shift_power(1, SpaceSpec::l2(Domain::Bilateral)).unwrap(),
            1,
        )
        .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j + 1 { 1.0 } else { 0.0 };
                assert_eq!(s.matrix.get(i, j), c(expect));
            }
        }
        let g2 = l2(WeightKind::Geometric { a: 2.0 }, Domain::Bilateral);
        let w = WeightFamily::geometric(2.0, Domain::Bilateral).unwrap();
        let s = finite_section(&OperatorSpec::shift_power(1, g2).unwrap(), 2).unwrap();
        for i in 1..5 {
            let (ni, nj) = (i as i64 - 2, i as i64 - 3);
            let oracle = w.eval(ni).unwrap() / w.eval(nj).unwrap();
            assert!((s.matrix.get(i, i - 1).re - oracle).abs() < 1e-12);
            assert!((s.matrix.get(i, i - 1).re - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn section_needs_hilbert_norm() {
        let s = SpaceSpec::weighted_lp(3.0, WeightFamily::constant(Domain::Bilateral)).unwrap();
        let op = OperatorSpec::shift_power(1, s).unwrap();
        assert!(matches!(finite_section(&op, 3), Err(Error::UnsupportedNorm(_))));
        let b = operator_norm_bracket(&op, 3).unwrap();
        assert_eq!(b.lower, None);
        assert_eq!(b.upper, ExtReal::ONE);
    }

    #[test]
    fn csv_export() {
        let op = OperatorSpec::shift_power(1, SpaceSpec::l2(Domain::Unilateral)).unwrap();
        let csv = finite_section(&op, 1).unwrap().to_csv();
        assert_eq!(csv, "0,0,0,0\n1,0,0,0\n");
    }

    #[test]
    fn norm_bracket_examples() {
        let s = SpaceSpec::l2(Domain::Bilateral);
        let b = operator_norm_bracket(&OperatorSpec::multiplier(FiniteSeq::delta(1), s.clone()).unwrap(), 128)
            .unwrap();
        assert_eq!(b.upper, ExtReal::ONE);
        assert!(b.lower.unwrap() >= 0.99 && b.lower.unwrap() <= 1.0 + 1e-9);
        let phi = FiniteSeq::delta(1).add(&FiniteSeq::delta(-1));
        let b = operator_norm_bracket(&OperatorSpec::multiplier(phi, s).unwrap(), 256).unwrap();
        assert_eq!(b.upper, ExtReal::Finite(2.0));
        assert!(b.lower.unwrap() >= 1.99);
        let g = l2(WeightKind::Geometric { a: 2.0 }, Domain::Bilateral);
        let b = operator_norm_bracket(&OperatorSpec::multiplier(FiniteSeq::delta(1), g).unwrap(), 256).unwrap();
        assert_eq!(b.upper, ExtReal::Finite(2.0));
        assert!(b.lower.unwrap() >= 1.99);
    }
}
