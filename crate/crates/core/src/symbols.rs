//! Laurent-polynomial symbols φ̃(z) = Σ φ(n)zⁿ: evaluation, suprema over
//! circles and images of annuli and disks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::FiniteSeq;
use crate::spectra::{Cloud, CloudMeta, ImageGrid, SpectralRegion, Truncation};

/// Golden-section iterations used to refine a grid extremum.
const GOLDEN_ITERS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LaurentSymbol {
    pub coeffs: FiniteSeq,
}

impl From<FiniteSeq> for LaurentSymbol {
    fn from(coeffs: FiniteSeq) -> Self {
        LaurentSymbol { coeffs }
    }
}

/// Σ_{n=lo}^{hi} c(n)·wⁿ for `0 ≤ lo ≤ hi`, by Horner.
fn horner(c: impl Fn(i64) -> Complex64, lo: i64, hi: i64, w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in (lo..=hi).rev() {
        acc = acc * w + c(n);
    }
    acc * w.powi(lo as i32)
}

impl LaurentSymbol {
    pub fn new(coeffs: FiniteSeq) -> Self {
        LaurentSymbol { coeffs }
    }

    pub fn has_negative_powers(&self) -> bool {
        self.coeffs.has_negative_support()
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let Some((lo, hi)) = self.coeffs.support() else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        let mut total = Complex64::new(0.0, 0.0);
        if hi >= 0 {
            total += horner(|n| self.coeffs.get(n), lo.max(0), hi, z);
        }
        if lo < 0 {
            if z.norm() == 0.0 {
                return Err(Error::Pole { coordinate: 0 });
            }
            let w = z.inv();
            total += horner(|m| self.coeffs.get(-m), (-hi).max(1), -lo, w);
        }
        Ok(total)
    }

    /// Σ |n|·|φ(n)|·rⁿ, a Lipschitz constant of θ ↦ φ̃(re^{iθ}).
    pub fn angular_lipschitz(&self, r: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(n, c)| n.unsigned_abs() as f64 * c.norm() * r.powf(n as f64))
            .sum()
    }

    /// Symbol of the reflected sequence, ψ̃(ζ) = φ̃(1/ζ).
    pub fn reflect(&self) -> Self {
        LaurentSymbol::new(self.coeffs.reflect())
    }
}

pub fn eval_symbol(s: &LaurentSymbol, z: Complex64) -> Result<Complex64> {
    s.eval(z)
}

/// Maximizes `f` on `[a, b]` by golden-section search, returning `(x, f(x))`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Grid maximum of a periodic function on `[0, 2π)`, refined by one golden
/// pass around the best grid point. Returns `(θ, value)`.
pub(crate) fn periodic_max(f: impl Fn(f64) -> f64, m: usize) -> (f64, f64) {
    let h = 2.0 * PI / m as f64;
    let (j, best) = (0..m)
        .map(|j| (j, f(j as f64 * h)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let t = j as f64 * h;
    let (tr, fr) = golden_max(&f, t - h, t + h);
    if fr > best {
        (tr.rem_euclid(2.0 * PI), fr)
    } else {
        (t, best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleSup {
    /// Largest |φ̃| found (an attained value, hence a lower estimate).
    pub value: f64,
    pub theta: f64,
    /// The true supremum lies in `[value, value + slack]`.
    pub slack: f64,
}

pub fn sup_on_circle(s: &LaurentSymbol, r: f64, m: usize) -> Result<CircleSup> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Argument(format!("radius must be positive, got {r}")));
    }
    if m < 16 {
        return Err(Error::Argument(format!("grid size must be at least 16, got {m}")));
    }
    let f = |t: f64| {
        s.eval(Complex64::from_polar(r, t))
            .map(|v| v.norm())
            .unwrap_or(f64::INFINITY)
    };
    let (theta, value) = periodic_max(f, m);
    Ok(CircleSup {
        value,
        theta,
        slack: s.angular_lipschitz(r) * PI / m as f64,
    })
}

/// Radii sampled for a base region, after truncation.
pub(crate) fn sample_radii(
    region: &SpectralRegion,
    radial: usize,
    truncation: &Truncation,
    needs_inner_cut: bool,
) -> Result<Vec<f64>> {
    let (rmin, rmax) = match region {
        SpectralRegion::Circle { r } => return Ok(vec![*r]),
        SpectralRegion::Annulus { rmin, rmax } => (rmin.to_f64(), rmax.to_f64()),
        SpectralRegion::Disk { r } => (0.0, r.to_f64()),
        _ => {
            return Err(Error::Configuration(
                "symbol images need an annulus, disk or circle as base".into(),
            ))
        }
    };
    let rmax = if rmax.is_finite() {
        rmax
    } else {
        truncation.outer.ok_or_else(|| {
            Error::Configuration("unbounded region needs an outer radial truncation".into())
        })?
    };
    let rmin = if rmin == 0.0 && needs_inner_cut {
        truncation.inner.ok_or_else(|| {
            Error::Configuration("symbol has a pole at 0; an inner truncation is required".into())
        })?
    } else {
        rmin
    };
    if rmax < rmin {
        return Err(Error::Configuration(format!(
            "truncated radii are inverted: [{rmin}, {rmax}]"
        )));
    }
    if rmin == rmax || radial <= 1 {
        return Ok(vec![rmax]);
    }
    Ok((0..radial)
        .map(|i| {
            if i + 1 == radial {
                rmax
            } else {
                rmin + (rmax - rmin) * i as f64 / (radial - 1) as f64
            }
        })
        .collect())
}

/// `{φ̃(ρe^{iθ})}` over the tensor grid of the region.
pub fn image_of_region(
    s: &LaurentSymbol,
    region: &SpectralRegion,
    grid: ImageGrid,
    truncation: Truncation,
) -> Result<Cloud> {
    if grid.angular == 0 {
        return Err(Error::Argument("angular grid must be nonempty".into()));
    }
    let radii = sample_radii(region, grid.radial, &truncation, s.has_negative_powers())?;
    let h = 2.0 * PI / grid.angular as f64;
    let rows: Vec<Vec<Complex64>> = radii
        .par_iter()
        .map(|&r| {
            (0..grid.angular)
                .map(|j| s.eval(Complex64::from_polar(r, j as f64 * h)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut pitch = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        for j in 0..row.len() {
            pitch = pitch.max((row[(j + 1) % row.len()] - row[j]).norm());
            if let Some(next) = rows.get(i + 1) {
                pitch = pitch.max((next[j] - row[j]).norm());
            }
        }
    }
    Ok(Cloud {
        points: rows.into_iter().flatten().collect(),
        meta: CloudMeta {
            radial: radii.len(),
            angular: grid.angular,
            radii,
            truncation,
            pitch,
        },
    })
}
