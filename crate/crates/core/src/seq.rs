//! Finitely supported complex sequences on ℤ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A finitely supported sequence stored as a contiguous window starting at
/// `offset`. Leading and trailing zeros are always trimmed, so the first and
/// last stored coefficients are nonzero; the empty window is the zero sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "SeqRepr", into = "SeqRepr")]
pub struct FiniteSeq {
    offset: i64,
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct SeqRepr {
    offset: i64,
    coeffs: Vec<Complex64>,
}

impl From<SeqRepr> for FiniteSeq {
    fn from(r: SeqRepr) -> Self {
        FiniteSeq::new(r.offset, r.coeffs)
    }
}

impl From<FiniteSeq> for SeqRepr {
    fn from(s: FiniteSeq) -> Self {
        SeqRepr {
            offset: s.offset,
            coeffs: s.coeffs,
        }
    }
}

impl FiniteSeq {
    pub fn new(offset: i64, coeffs: Vec<Complex64>) -> Self {
        let mut s = FiniteSeq { offset, coeffs };
        s.trim();
        s
    }

    pub fn from_real(offset: i64, coeffs: &[f64]) -> Self {
        Self::new(offset, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        FiniteSeq {
            offset: 0,
            coeffs: Vec::new(),
        }
    }

    /// The unit atom e_k.
    pub fn delta(k: i64) -> Self {
        FiniteSeq {
            offset: k,
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn atom(k: i64, c: Complex64) -> Self {
        Self::new(k, vec![c])
    }

    fn trim(&mut self) {
        let zero = Complex64::new(0.0, 0.0);
        let lead = self.coeffs.iter().take_while(|&&c| c == zero).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.offset = 0;
            return;
        }
        let trail = self.coeffs.iter().rev().take_while(|&&c| c == zero).count();
        self.coeffs.truncate(self.coeffs.len() - trail);
        self.coeffs.drain(..lead);
        self.offset += lead as i64;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Inclusive support bounds, `None` for the zero sequence.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.is_zero() {
            None
        } else {
            Some((self.offset, self.offset + self.coeffs.len() as i64 - 1))
        }
    }

    pub fn min_index(&self) -> Option<i64> {
        self.support().map(|s| s.0)
    }

    pub fn max_index(&self) -> Option<i64> {
        self.support().map(|s| s.1)
    }

    pub fn get(&self, n: i64) -> Complex64 {
        let i = n - self.offset;
        if i < 0 || i >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[i as usize]
        }
    }

    /// `(index, value)` pairs over the stored window, zeros included.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.offset + i as i64, c))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.offset, self.coeffs.iter().map(|&x| x * c).collect())
    }

    pub fn add(&self, other: &FiniteSeq) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &FiniteSeq) -> Self {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &FiniteSeq, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        match (self.support(), other.support()) {
            (None, None) => FiniteSeq::zero(),
            _ => {
                let lo = self.min_index().into_iter().chain(other.min_index()).min().unwrap();
                let hi = self.max_index().into_iter().chain(other.max_index()).max().unwrap();
                let coeffs = (lo..=hi).map(|n| f(self.get(n), other.get(n))).collect();
                FiniteSeq::new(lo, coeffs)
            }
        }
    }

    /// Coefficients at negative indices present.
    pub fn has_negative_support(&self) -> bool {
        self.min_index().is_some_and(|m| m < 0)
    }

    pub fn has_positive_support(&self) -> bool {
        self.max_index().is_some_and(|m| m > 0)
    }

    /// Index reflection n ↦ −n.
    pub fn reflect(&self) -> Self {
        match self.support() {
            None => FiniteSeq::zero(),
            Some((_, hi)) => {
                let coeffs = self.coeffs.iter().rev().copied().collect();
                FiniteSeq::new(-hi, coeffs)
            }
        }
    }

    /// Largest absolute coefficient-wise difference.
    pub fn max_abs_diff(&self, other: &FiniteSeq) -> f64 {
        self.sub(other).max_abs()
    }
}
