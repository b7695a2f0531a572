//! Numerical witnesses for predicted spectra.
//!
//! * approximate eigenvectors `z^{−n}` on a window give residual tables for
//!   points on the boundary circles,
//! * finite-section resolvents `(A_N − λI)⁻¹e₀` give growth tables for
//!   interior points,
//! * Laurent inversion of `φ̃ − λ` on two circles, or a Neumann series, gives
//!   an explicit bound on the resolvent for points outside.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::vec_norm;
use crate::operators::{
    apply_operator, convolve, finite_section, norm_upper_bound, operator_norm_bracket,
    project_plus, OperatorKind, OperatorSpec,
};
use crate::seq::FiniteSeq;
use crate::spaces::{complex_pow, scale_seq, space_norm, SpaceSpec};
use crate::spectra::{
    nearest_sample, predicted_sigma_multiplier_with, predicted_sigma_shift,
    predicted_sigma_toeplitz_with, region_contains, unilateral_annulus, ImageGrid, Membership,
    SpectralRegion, ToeplitzSide,
};
use crate::symbols::{periodic_max, sup_on_circle, LaurentSymbol};
use crate::weights::{shift_norm, spectral_radius_shift, Direction, Domain, WeightKind};

/// Angular grid of the δ-margin scan.
pub const MARGIN_GRID: usize = 4096;
/// Required margin `min|φ̃ − λ| / sup|φ̃|`.
pub const MARGIN_REL: f64 = 1e-3;
/// Circles scanned strictly between the two transform radii.
pub const INTERMEDIATE_CIRCLES: usize = 8;
/// Scaled coefficients below this fraction of the largest are dropped.
pub const TRIM_REL: f64 = 1e-14;
/// Tolerance on the reconstructed identity `c ∗ (φ − λe₀) = e₀`.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Tail estimates must stay below this fraction of `max(1, B)`.
pub const TAIL_TOL: f64 = 1e-6;
/// A growth table counts as blow-up once it has grown by this factor.
pub const BLOWUP_FACTOR: f64 = 10.0;
/// Largest final residual accepted as an inside witness.
pub const INSIDE_RESIDUAL_MAX: f64 = 0.25;
/// Residuals at or below this are exact eigenvectors up to round-off.
pub const EXACT_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// `z` is the base point, `mu = φ̃(z)` the witnessed spectral value.
    InsideWitness {
        z: Complex64,
        mu: Complex64,
        residuals: Vec<(usize, f64)>,
    },
    BlowupWitness {
        growth: Vec<(usize, ExtReal)>,
    },
    /// `‖(A − λ)⁻¹‖ ≤ bound + tail`.
    OutsideBound {
        bound: f64,
        tail: f64,
        decay_ratio: f64,
        identity_residual: Option<f64>,
        margin: Option<f64>,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    EigenResidual,
    Blowup,
    Laurent,
    AnalyticToeplitz,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub lambda: Complex64,
    pub method: Method,
    pub verdict: Verdict,
    pub params: serde_json::Value,
}

impl Certificate {
    pub(crate) fn new(lambda: Complex64, method: Method, verdict: Verdict, params: serde_json::Value) -> Self {
        Certificate {
            lambda,
            method,
            verdict,
            params,
        }
    }

    fn inconclusive(lambda: Complex64, method: Method, reason: impl Into<String>, params: serde_json::Value) -> Self {
        Self::new(
            lambda,
            method,
            Verdict::Inconclusive {
                reason: reason.into(),
            },
            params,
        )
    }

    pub fn is_outside(&self) -> bool {
        matches!(self.verdict, Verdict::OutsideBound { .. })
    }

    pub fn is_inside(&self) -> bool {
        matches!(
            self.verdict,
            Verdict::InsideWitness { .. } | Verdict::BlowupWitness { .. }
        )
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self.verdict, Verdict::Inconclusive { .. })
    }

    /// Residual at the largest N of an inside witness.
    pub fn final_residual(&self) -> Option<f64> {
        match &self.verdict {
            Verdict::InsideWitness { residuals, .. } => residuals.last().map(|r| r.1),
            _ => None,
        }
    }
}

fn symbol_of(op: &OperatorSpec) -> LaurentSymbol {
    LaurentSymbol::new(op.kernel())
}

/// Relative residual `‖A f_N − μ f_N‖ / ‖f_N‖` of the truncated geometric
/// vector `f_N(n) = z^{−n}`, with `μ = φ̃(z)`.
pub fn approx_eigen_residual(op: &OperatorSpec, z: Complex64, n: usize) -> Result<f64> {
    op.space.hilbert_weight()?;
    if z.norm() == 0.0 {
        return Err(Error::Argument("eigenvector base point must be nonzero".into()));
    }
    let mu = symbol_of(op).eval(z)?;
    let n = n as i64;
    let lo = match op.domain() {
        Domain::Bilateral => -n,
        Domain::Unilateral => 0,
    };
    let f = FiniteSeq::new(lo, (lo..=n).map(|k| complex_pow(z, -k)).collect());
    let image = apply_operator(op, &f)?;
    let defect = image.sub(&f.scale(mu));
    Ok(space_norm(&op.space, &defect)? / space_norm(&op.space, &f)?)
}

/// Growth table `N ↦ ‖(A_N − λI)⁻¹e₀‖` over finite sections; singular
/// sections give `+∞`.
pub fn blowup_witness(op: &OperatorSpec, lambda: Complex64, ns: &[usize]) -> Result<Vec<(usize, ExtReal)>> {
    op.space.hilbert_weight()?;
    ns.par_iter()
        .map(|&n| {
            let section = finite_section(op, n)?;
            let a = section.matrix.shifted(lambda);
            let mut rhs = vec![Complex64::new(0.0, 0.0); section.dim()];
            rhs[section.position(0).expect("window contains 0")] = Complex64::new(1.0, 0.0);
            let norm = match a.solve(&rhs) {
                Some(x) => ExtReal::from_f64(vec_norm(&x)),
                None => ExtReal::Infinite,
            };
            Ok((n, norm))
        })
        .collect()
}

/// Blow-up verdict: monotone nondecreasing and grown by [`BLOWUP_FACTOR`].
pub fn blowup_verdict(growth: &[(usize, ExtReal)]) -> Verdict {
    let monotone = growth
        .windows(2)
        .all(|w| w[1].1.to_f64() >= w[0].1.to_f64() * (1.0 - 1e-12));
    let grown = match (growth.first(), growth.last()) {
        (Some(a), Some(b)) if growth.len() >= 2 => {
            b.1.to_f64() >= BLOWUP_FACTOR * a.1.to_f64() && a.1.to_f64() > 0.0
        }
        _ => false,
    };
    if monotone && grown {
        Verdict::BlowupWitness {
            growth: growth.to_vec(),
        }
    } else {
        Verdict::Inconclusive {
            reason: format!(
                "growth table is {} and grew by a factor {:.3}",
                if monotone { "monotone" } else { "not monotone" },
                growth.last().map_or(0.0, |b| b.1.to_f64()) / growth.first().map_or(1.0, |a| a.1.to_f64())
            ),
        }
    }
}

/// Per-unit-N growth factors `(v_{i+1}/v_i)^{1/(N_{i+1}−N_i)}`.
pub fn growth_factors(growth: &[(usize, ExtReal)]) -> Vec<f64> {
    growth
        .windows(2)
        .map(|w| (w[1].1.to_f64() / w[0].1.to_f64()).powf(1.0 / (w[1].0 - w[0].0) as f64))
        .collect()
}

/// Residual table on an approximate eigenvector.
pub fn inside_witness(op: &OperatorSpec, z: Complex64, lambda: Complex64, ns: &[usize]) -> Result<Certificate> {
    let residuals: Vec<(usize, f64)> = ns
        .par_iter()
        .map(|&n| Ok((n, approx_eigen_residual(op, z, n)?)))
        .collect::<Result<_>>()?;
    let mu = symbol_of(op).eval(z)?;
    let params = json!({ "ns": ns, "z": [z.re, z.im] });
    let last = residuals.last().map_or(f64::INFINITY, |r| r.1);
    let decreasing = residuals.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
    if last <= EXACT_RESIDUAL || (decreasing && last <= INSIDE_RESIDUAL_MAX) {
        Ok(Certificate::new(
            lambda,
            Method::EigenResidual,
            Verdict::InsideWitness { z, mu, residuals },
            params,
        ))
    } else {
        Ok(Certificate::inconclusive(
            lambda,
            Method::EigenResidual,
            format!("residuals do not decay (last {last:.3e})"),
            params,
        ))
    }
}

/// Scaled coefficients `c_k r^k` of `g` on `C_r`: entry `j` holds `k = j`
/// for `j < m/2` and `k = j − m` otherwise.
fn circle_transform(g: impl Fn(Complex64) -> Complex64, r: f64, m: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = (0..m)
        .map(|j| g(Complex64::from_polar(r, 2.0 * PI * j as f64 / m as f64)))
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// One side (k ≥ 0 or k < 0) of a Laurent expansion after trimming.
struct Side {
    kept: Vec<(i64, Complex64)>,
    sum: f64,
    tail: f64,
    decay: f64,
}

/// Trims, weights and tail-bounds one side. `entries` run outward from the
/// origin as `(k, c_k, |c_k r^k|)`.
fn weigh_side(
    entries: &[(i64, Complex64, f64)],
    floor: f64,
    norm: &dyn Fn(i64) -> Result<ExtReal>,
) -> Result<std::result::Result<Side, String>> {
    let last = entries.iter().rposition(|e| e.2 > floor);
    let Some(last) = last else {
        return Ok(Ok(Side {
            kept: Vec::new(),
            sum: 0.0,
            tail: 0.0,
            decay: 0.0,
        }));
    };
    if last >= entries.len() * 3 / 4 {
        return Ok(Err("coefficients are not resolved by the transform size".into()));
    }
    let mut terms = Vec::with_capacity(last + 1);
    for &(k, c, _) in &entries[..=last] {
        let w = norm(k)?;
        if !w.is_finite() && c.norm() > 0.0 {
            return Ok(Err(format!("shift power {k} is unbounded")));
        }
        terms.push(c.norm() * w.to_f64());
    }
    let mut window_tail = 0.0;
    for &(k, c, _) in &entries[last + 1..] {
        if let ExtReal::Finite(w) = norm(k)? {
            window_tail += c.norm() * w;
        }
    }
    let (k0, t0) = terms
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, &t)| if t > acc.1 { (i, t) } else { acc });
    let t_last = terms[last];
    let decay = if last > k0 && t_last > 0.0 {
        (t_last / t0).powf(1.0 / (last - k0) as f64)
    } else {
        0.0
    };
    if decay >= 1.0 {
        return Ok(Err(format!("coefficients do not decay (ratio {decay:.4})")));
    }
    Ok(Ok(Side {
        kept: entries[..=last].iter().map(|e| (e.0, e.1)).collect(),
        sum: terms.iter().sum(),
        tail: window_tail + t_last * decay / (1.0 - decay),
        decay,
    }))
}

/// `min |φ̃ − λ|` and `max |φ̃|` over a circle.
fn circle_margin(s: &LaurentSymbol, lambda: Complex64, r: f64) -> Result<(f64, f64)> {
    let eval = |t: f64| s.eval(Complex64::from_polar(r, t));
    eval(0.0)?;
    let (_, neg_min) = periodic_max(|t| -(eval(t).unwrap() - lambda).norm(), MARGIN_GRID);
    let sup = sup_on_circle(s, r, MARGIN_GRID)?.value;
    Ok((-neg_min, sup))
}

/// Radii of the margin scan: both ends and geometric intermediates.
fn scan_radii(r_minus: f64, r_plus: f64) -> Vec<f64> {
    if r_minus == r_plus {
        return vec![r_plus];
    }
    let steps = INTERMEDIATE_CIRCLES + 1;
    (0..=steps)
        .map(|i| r_minus * (r_plus / r_minus).powf(i as f64 / steps as f64))
        .collect()
}

fn is_power_of_two_at_least(m: usize, min: usize) -> bool {
    m >= min && m.is_power_of_two()
}

/// Max over the window of `|(c ∗ (φ − λe₀))(n) − δ_{n0}| · r(n)ⁿ`, with
/// `r(n) = r₊` for n ≥ 0 and `r₋` for n < 0.
fn identity_residual(c: &FiniteSeq, phi: &FiniteSeq, lambda: Complex64, r_minus: f64, r_plus: f64) -> f64 {
    let shifted = phi.sub(&FiniteSeq::atom(0, lambda));
    let defect = convolve(c, &shifted).sub(&FiniteSeq::delta(0));
    defect
        .iter()
        .map(|(n, v)| {
            let r: f64 = if n >= 0 { r_plus } else { r_minus };
            v.norm() * r.powf(n as f64)
        })
        .fold(0.0, f64::max)
}

/// Certificate that λ ∉ σ(M_φ) by Laurent inversion of `φ̃ − λ` on the
/// annulus `r₋ ≤ |z| ≤ r₊`.
pub fn outside_certificate(
    phi: &FiniteSeq,
    lambda: Complex64,
    space: &SpaceSpec,
    radii: (f64, f64),
    m: usize,
) -> Result<Certificate> {
    if space.domain != Domain::Bilateral {
        return Err(Error::Precondition("Laurent certificates need a bilateral space".into()));
    }
    if !is_power_of_two_at_least(m, 256) {
        return Err(Error::Argument(format!("transform size must be a power of two >= 256, got {m}")));
    }
    let (r_minus, r_plus) = radii;
    let (lo, hi) = predicted_sigma_shift(space)?.radii().expect("shift regions have radii");
    let slack = 1e-9;
    let fits = r_minus > 0.0
        && r_plus.is_finite()
        && r_minus <= r_plus
        && r_minus >= lo.to_f64() * (1.0 - slack)
        && r_plus <= hi.to_f64() * (1.0 + slack);
    if !fits {
        return Err(Error::Precondition(format!(
            "radii [{r_minus}, {r_plus}] are not inside the annulus [{lo}, {hi}]"
        )));
    }
    let params = json!({
        "radii": [r_minus, r_plus],
        "transform_size": m,
        "margin_grid": MARGIN_GRID,
        "intermediate_circles": INTERMEDIATE_CIRCLES,
    });
    let cert = |v: Verdict| Certificate::new(lambda, Method::Laurent, v, params.clone());
    let incon = |reason: String| {
        cert(Verdict::Inconclusive { reason })
    };
    let symbol = LaurentSymbol::new(phi.clone());

    // (i) margin
    let mut delta = f64::INFINITY;
    let mut sup = 0.0f64;
    for r in scan_radii(r_minus, r_plus) {
        let (d, s) = circle_margin(&symbol, lambda, r)?;
        delta = delta.min(d);
        sup = sup.max(s);
    }
    if !(delta > 0.0 && delta >= MARGIN_REL * sup) {
        return Ok(incon(format!(
            "margin min|phi - lambda| = {delta:.3e} is below {MARGIN_REL} * sup|phi| = {:.3e}",
            MARGIN_REL * sup
        )));
    }

    // (ii) coefficients
    let g = |z: Complex64| (symbol.eval(z).unwrap() - lambda).inv();
    let plus = circle_transform(g, r_plus, m);
    let minus = if r_minus == r_plus {
        plus.clone()
    } else {
        circle_transform(g, r_minus, m)
    };
    let half = m / 2;
    let pos: Vec<(i64, Complex64, f64)> = (0..half)
        .map(|k| (k as i64, plus[k] / r_plus.powi(k as i32), plus[k].norm()))
        .collect();
    let neg: Vec<(i64, Complex64, f64)> = (1..=half)
        .map(|j| (-(j as i64), minus[m - j] * r_minus.powi(j as i32), minus[m - j].norm()))
        .collect();
    let floor = TRIM_REL * pos.iter().chain(&neg).map(|e| e.2).fold(0.0, f64::max);
    let norm = |k: i64| shift_norm(space, k);
    let pos = match weigh_side(&pos, floor, &norm)? {
        Ok(s) => s,
        Err(reason) => return Ok(incon(reason)),
    };
    let neg = match weigh_side(&neg, floor, &norm)? {
        Ok(s) => s,
        Err(reason) => return Ok(incon(reason)),
    };
    let lo_k = neg.kept.last().map_or(0, |e| e.0);
    let hi_k = pos.kept.last().map_or(-1, |e| e.0);
    if hi_k < lo_k {
        return Ok(incon("no significant coefficients".into()));
    }
    let coeffs: Vec<Complex64> = (lo_k..=hi_k)
        .map(|k| {
            if k >= 0 {
                pos.kept[k as usize].1
            } else {
                neg.kept[(-k - 1) as usize].1
            }
        })
        .collect();
    let c = FiniteSeq::new(lo_k, coeffs);

    // (iii) validation
    let residual = identity_residual(&c, phi, lambda, r_minus, r_plus);
    if residual > IDENTITY_TOL {
        return Ok(incon(format!(
            "inverse identity residual {residual:.3e} exceeds {IDENTITY_TOL:.0e}"
        )));
    }

    // (iv) bound
    let bound = pos.sum + neg.sum;
    let tail = pos.tail + neg.tail;
    if !(bound.is_finite() && tail <= TAIL_TOL * bound.max(1.0)) {
        return Ok(incon(format!("bound {bound:.3e} with tail {tail:.3e}")));
    }
    Ok(cert(Verdict::OutsideBound {
        bound,
        tail,
        decay_ratio: pos.decay.max(neg.decay),
        identity_residual: Some(residual),
        margin: Some(delta),
    }))
}

/// Laurent coefficients of `1/(φ̃ − λ)` as found by [`outside_certificate`]
/// steps (ii) and trimming; exposed for cross-checks.
pub fn laurent_inverse_coefficients(
    phi: &FiniteSeq,
    lambda: Complex64,
    radii: (f64, f64),
    m: usize,
) -> Result<FiniteSeq> {
    let (r_minus, r_plus) = radii;
    if !(r_minus > 0.0 && r_minus <= r_plus && r_plus.is_finite()) {
        return Err(Error::Argument(format!("invalid radii [{r_minus}, {r_plus}]")));
    }
    let symbol = LaurentSymbol::new(phi.clone());
    let g = |z: Complex64| (symbol.eval(z).unwrap() - lambda).inv();
    let plus = circle_transform(g, r_plus, m);
    let minus = circle_transform(g, r_minus, m);
    let half = m as i64 / 2;
    let coeffs: Vec<Complex64> = (-half..half)
        .map(|k| {
            if k >= 0 {
                plus[k as usize] / r_plus.powi(k as i32)
            } else {
                minus[(m as i64 + k) as usize] * r_minus.powi((-k) as i32)
            }
        })
        .collect();
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Argument(format!("phi - {lambda} vanishes on a transform circle")));
    }
    let floor = TRIM_REL * coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let trimmed = coeffs.into_iter().map(|c| if c.norm() > floor { c } else { Complex64::new(0.0, 0.0) }).collect();
    Ok(FiniteSeq::new(-half, trimmed))
}

/// Upper bounds `b_n ≥ ‖Aⁿ‖` for `n = 0..=horizon`.
fn power_norm_bounds(op: &OperatorSpec, horizon: usize) -> Result<Vec<ExtReal>> {
    let mut out = vec![ExtReal::ONE];
    match &op.kind {
        OperatorKind::ShiftPower { k } => {
            for n in 1..=horizon as i64 {
                out.push(shift_norm(&op.space, k * n)?);
            }
        }
        OperatorKind::Multiplier { phi } | OperatorKind::Toeplitz { phi } => {
            let one_sided = !phi.has_negative_support() || !phi.has_positive_support();
            if matches!(op.kind, OperatorKind::Toeplitz { .. }) && !one_sided {
                let b1 = norm_upper_bound(phi, &op.space)?;
                for n in 1..=horizon as i32 {
                    out.push(ExtReal::from_f64(b1.to_f64().powi(n)));
                }
            } else {
                let mut power = FiniteSeq::delta(0);
                for _ in 0..horizon {
                    power = convolve(&power, phi);
                    out.push(norm_upper_bound(&power, &op.space)?);
                }
            }
        }
    }
    Ok(out)
}

/// Certificate that λ lies outside the spectrum by summing the Neumann
/// series `Σ Aⁿ/λ^{n+1}` with bounds on `‖Aⁿ‖`.
pub fn neumann_outside_certificate(op: &OperatorSpec, lambda: Complex64, horizon: usize) -> Result<Certificate> {
    let params = json!({ "horizon": horizon });
    let incon = |reason: String| Certificate::inconclusive(lambda, Method::Neumann, reason, params.clone());
    let l = lambda.norm();
    if horizon == 0 {
        return Err(Error::Argument("horizon must be at least 1".into()));
    }
    if l == 0.0 {
        return Ok(incon("lambda = 0 has no Neumann series".into()));
    }
    let b = power_norm_bounds(op, horizon)?;
    if !b[1].is_finite() {
        return Ok(incon("operator is unbounded".into()));
    }
    let (t, nu) = (1..=horizon)
        .map(|n| (n, b[n].to_f64().powf(1.0 / n as f64)))
        .fold((1, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let ratio = nu / l;
    if ratio >= 1.0 {
        return Ok(incon(format!("tail ratio {ratio:.4} >= 1")));
    }
    let c = (0..t)
        .map(|r| b[r].to_f64() / nu.powi(r as i32))
        .fold(1.0f64, f64::max);
    let bound: f64 = b
        .iter()
        .enumerate()
        .map(|(n, bn)| bn.to_f64() / l.powi(n as i32 + 1))
        .sum();
    let tail = c * ratio.powi(horizon as i32 + 1) / (l - nu);
    if !(bound.is_finite() && tail <= TAIL_TOL * bound.max(1.0)) {
        return Ok(incon(format!("bound {bound:.3e} with tail {tail:.3e}")));
    }
    Ok(Certificate::new(
        lambda,
        Method::Neumann,
        Verdict::OutsideBound {
            bound,
            tail,
            decay_ratio: ratio,
            identity_residual: None,
            margin: None,
        },
        params,
    ))
}

/// Certificate that λ ∉ σ(T_φ) for a one-sided symbol: `1/(φ̃ − λ)` is
/// expanded on the boundary of σ(𝐒) (or σ(𝐒₋₁) after reflection) and must
/// come out analytic, so that it is the symbol of a bounded inverse.
pub fn toeplitz_outside_certificate(
    phi: &FiniteSeq,
    lambda: Complex64,
    space: &SpaceSpec,
    m: usize,
) -> Result<Certificate> {
    if space.domain != Domain::Unilateral {
        return Err(Error::Precondition("Toeplitz certificates need a unilateral space".into()));
    }
    if !is_power_of_two_at_least(m, 256) {
        return Err(Error::Argument(format!("transform size must be a power of two >= 256, got {m}")));
    }
    let (psi, direction, sign) = if !phi.has_negative_support() {
        (phi.clone(), Direction::Forward, 1)
    } else if !phi.has_positive_support() {
        (phi.reflect(), Direction::Backward, -1)
    } else {
        return Err(Error::Precondition(
            "analytic inversion needs a one-sided symbol".into(),
        ));
    };
    let r = spectral_radius_shift(space, direction, crate::spectra::RADIUS_HORIZON)?.lower;
    let params = json!({ "radius": r, "transform_size": m, "side": direction });
    let cert = |v: Verdict| Certificate::new(lambda, Method::AnalyticToeplitz, v, params.clone());
    let incon = |reason: String| cert(Verdict::Inconclusive { reason });
    let r = match r {
        ExtReal::Finite(r) if r > 0.0 => r,
        _ => return Ok(incon(format!("spectral radius {r} admits no transform circle"))),
    };
    let symbol = LaurentSymbol::new(psi.clone());
    let (delta, sup) = circle_margin(&symbol, lambda, r)?;
    if !(delta > 0.0 && delta >= MARGIN_REL * sup) {
        return Ok(incon(format!("margin {delta:.3e} on the boundary circle is too small")));
    }
    let a = circle_transform(|z| (symbol.eval(z).unwrap() - lambda).inv(), r, m);
    let half = m / 2;
    let max = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let negative = (1..half).map(|j| a[m - j].norm()).fold(0.0, f64::max);
    if negative > 1e-10 * max {
        return Ok(incon(
            "inverse symbol has negative powers: phi - lambda vanishes inside the disk".into(),
        ));
    }
    let pos: Vec<(i64, Complex64, f64)> = (0..half)
        .map(|k| (k as i64, a[k] / r.powi(k as i32), a[k].norm()))
        .collect();
    let norm = |k: i64| shift_norm(space, sign * k);
    let side = match weigh_side(&pos, TRIM_REL * max, &norm)? {
        Ok(s) => s,
        Err(reason) => return Ok(incon(reason)),
    };
    let c = FiniteSeq::new(0, side.kept.iter().map(|e| e.1).collect());
    let residual = identity_residual(&c, &psi, lambda, r, r);
    if residual > IDENTITY_TOL {
        return Ok(incon(format!("inverse identity residual {residual:.3e}")));
    }
    if !(side.tail <= TAIL_TOL * side.sum.max(1.0)) {
        return Ok(incon(format!("tail {:.3e} too large", side.tail)));
    }
    Ok(cert(Verdict::OutsideBound {
        bound: side.sum,
        tail: side.tail,
        decay_ratio: side.decay,
        identity_residual: Some(residual),
        margin: Some(delta),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolBoundRow {
    pub r: f64,
    pub sup: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolBoundReport {
    pub rows: Vec<SymbolBoundRow>,
    pub max_sup: f64,
    pub upper: ExtReal,
    pub lower: Option<f64>,
    /// `upper − max_sup`, nonnegative when the bound holds.
    pub gap_to_upper: f64,
    pub gap_to_lower: Option<f64>,
    pub bound_holds: bool,
    /// `|lower − max_sup|` where the norm equals the symbol supremum.
    pub isometric_gap: Option<f64>,
    pub passed: bool,
}

/// Checks `sup_{C_r} |φ̃| ≤ ‖M_φ‖` (or `‖T_φ‖`) over a grid of radii.
pub fn check_symbol_bound(
    phi: &FiniteSeq,
    space: &SpaceSpec,
    radii: &[f64],
    section_n: usize,
) -> Result<SymbolBoundReport> {
    let (op, region) = match space.domain {
        Domain::Bilateral => (
            OperatorSpec::multiplier(phi.clone(), space.clone())?,
            predicted_sigma_shift(space)?,
        ),
        Domain::Unilateral => (
            OperatorSpec::toeplitz(phi.clone(), space.clone())?,
            unilateral_annulus(space)?,
        ),
    };
    let (lo, hi) = region.radii().expect("annulus radii");
    for &r in radii {
        if !(r > 0.0 && r >= lo.to_f64() * (1.0 - 1e-9) && r <= hi.to_f64() * (1.0 + 1e-9)) {
            return Err(Error::Precondition(format!(
                "radius {r} outside the annulus [{lo}, {hi}]"
            )));
        }
    }
    let symbol = LaurentSymbol::new(phi.clone());
    let rows: Vec<SymbolBoundRow> = radii
        .iter()
        .map(|&r| {
            let s = sup_on_circle(&symbol, r, MARGIN_GRID)?;
            Ok(SymbolBoundRow {
                r,
                sup: s.value,
                slack: s.slack,
            })
        })
        .collect::<Result<_>>()?;
    let max_sup = rows.iter().map(|r| r.sup).fold(0.0, f64::max);
    let bracket = operator_norm_bracket(&op, section_n)?;
    let bound_holds = ExtReal::Finite(max_sup) <= bracket.upper.add(ExtReal::Finite(1e-9));
    let isometric = space.is_hilbert()
        && matches!(
            space.weight_kind(),
            Some(WeightKind::Constant | WeightKind::Geometric { .. })
        );
    let isometric_gap = bracket
        .lower
        .filter(|_| isometric)
        .map(|lower| (lower - max_sup).abs());
    Ok(SymbolBoundReport {
        max_sup,
        upper: bracket.upper,
        lower: bracket.lower,
        gap_to_upper: bracket.upper.to_f64() - max_sup,
        gap_to_lower: bracket.lower.map(|l| max_sup - l),
        bound_holds,
        passed: bound_holds && isometric_gap.is_none_or(|g| g <= 0.05),
        isometric_gap,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingDeviation {
    pub absolute: f64,
    /// Absolute deviation over the larger sup-norm of the two sides.
    pub relative: f64,
}

/// Deviation between `(Mf)_r` and `(φ)_r ∗ (f)_r` (bilateral), or between
/// `(T_φ u)_r` and `P⁺((φ)_r ∗ (u)_r)` (unilateral).
pub fn check_scaling_identity(domain: Domain, phi: &FiniteSeq, f: &FiniteSeq, r: f64) -> Result<ScalingDeviation> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Argument(format!("scaling radius must be positive, got {r}")));
    }
    let rc = Complex64::new(r, 0.0);
    let direct = convolve(&scale_seq(phi, rc)?, &scale_seq(f, rc)?);
    let (lhs, rhs) = match domain {
        Domain::Bilateral => (scale_seq(&convolve(phi, f), rc)?, direct),
        Domain::Unilateral => (
            scale_seq(&project_plus(&convolve(phi, f)), rc)?,
            project_plus(&direct),
        ),
    };
    let absolute = lhs.max_abs_diff(&rhs);
    let scale = lhs.max_abs().max(rhs.max_abs());
    Ok(ScalingDeviation {
        absolute,
        relative: if scale > 0.0 { absolute / scale } else { absolute },
    })
}

/// Numerical knobs of [`verify_point`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    /// Window sizes of the eigenvector residual table.
    pub residual_ns: Vec<usize>,
    /// Window sizes of the blow-up table.
    pub blowup_ns: Vec<usize>,
    pub transform_size: usize,
    pub horizon: usize,
    /// Membership tolerance against the predicted region.
    pub tol: f64,
    pub grid: ImageGrid,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            residual_ns: vec![50, 100, 200],
            blowup_ns: vec![20, 30, 40, 50, 60],
            transform_size: 1024,
            horizon: 64,
            tol: 1e-2,
            grid: ImageGrid::default(),
        }
    }
}

fn first_outside(certs: Vec<Certificate>) -> Certificate {
    let fallback = certs[0].clone();
    certs.into_iter().find(|c| c.is_outside()).unwrap_or(fallback)
}

fn blowup_certificate(op: &OperatorSpec, lambda: Complex64, ns: &[usize]) -> Result<Certificate> {
    let growth = blowup_witness(op, lambda, ns)?;
    Ok(Certificate::new(
        lambda,
        Method::Blowup,
        blowup_verdict(&growth),
        json!({ "ns": ns }),
    ))
}

/// Picks a witness for λ: certificates outside the predicted region,
/// eigenvector residuals on its boundary circles, resolvent blow-up in
/// its interior.
pub fn verify_point(op: &OperatorSpec, lambda: Complex64, p: &VerifyParams) -> Result<Certificate> {
    match op.domain() {
        Domain::Bilateral => verify_bilateral(op, lambda, p),
        Domain::Unilateral => verify_unilateral(op, lambda, p),
    }
}

fn on_circle(r: f64, radius: ExtReal) -> bool {
    radius.is_finite() && (r - radius.to_f64()).abs() <= 1e-12 * r.max(1.0)
}

fn verify_bilateral(op: &OperatorSpec, lambda: Complex64, p: &VerifyParams) -> Result<Certificate> {
    let phi = op.kernel();
    let base = predicted_sigma_shift(&op.space)?;
    let (rmin, rmax) = base.radii().expect("annulus radii");
    let region = predicted_sigma_multiplier_with(&phi, &op.space, p.grid)?;
    if region_contains(&region, lambda, p.tol) == Membership::Outside {
        let mut certs = Vec::new();
        if rmin.to_f64() > 0.0 && rmax.is_finite() {
            certs.push(outside_certificate(
                &phi,
                lambda,
                &op.space,
                (rmin.to_f64(), rmax.to_f64()),
                p.transform_size,
            )?);
        }
        if !certs.iter().any(|c| c.is_outside()) {
            certs.push(neumann_outside_certificate(op, lambda, p.horizon)?);
        }
        return Ok(first_outside(certs));
    }
    let cloud = region.cloud().expect("image regions carry a cloud");
    let (idx, _) = nearest_sample(&cloud.points, lambda).expect("nonempty cloud");
    let (r, theta) = cloud.grid_coordinates(idx).expect("grid cloud");
    if on_circle(r, rmin) || on_circle(r, rmax) {
        inside_witness(op, Complex64::from_polar(r, theta), lambda, &p.residual_ns)
    } else {
        blowup_certificate(op, lambda, &p.blowup_ns)
    }
}

fn verify_unilateral(op: &OperatorSpec, lambda: Complex64, p: &VerifyParams) -> Result<Certificate> {
    let phi = op.kernel();
    let side = if !phi.has_negative_support() {
        ToeplitzSide::Forward
    } else if !phi.has_positive_support() {
        ToeplitzSide::Backward
    } else {
        let n = neumann_outside_certificate(op, lambda, p.horizon)?;
        if n.is_outside() {
            return Ok(n);
        }
        return Ok(Certificate::inconclusive(
            lambda,
            Method::Neumann,
            "no prediction for a two-sided Toeplitz symbol",
            json!({ "horizon": p.horizon }),
        ));
    };
    let region = predicted_sigma_toeplitz_with(&phi, &op.space, side, p.grid)?;
    if region_contains(&region, lambda, p.tol) == Membership::Outside {
        let analytic = toeplitz_outside_certificate(&phi, lambda, &op.space, p.transform_size)?;
        if analytic.is_outside() {
            return Ok(analytic);
        }
        let n = neumann_outside_certificate(op, lambda, p.horizon)?;
        return Ok(first_outside(vec![analytic, n]));
    }
    let SpectralRegion::Image { base, cloud, .. } = &region else {
        unreachable!("Toeplitz predictions are images")
    };
    let radius = base.radii().expect("disk radius").1;
    let (idx, _) = nearest_sample(&cloud.points, lambda).expect("nonempty cloud");
    let (r, theta) = cloud.grid_coordinates(idx).expect("grid cloud");
    match side {
        ToeplitzSide::Forward if on_circle(r, radius) => {
            inside_witness(op, Complex64::from_polar(r, theta), lambda, &p.residual_ns)
        }
        ToeplitzSide::Forward => blowup_certificate(op, lambda, &p.blowup_ns),
        ToeplitzSide::Backward => {
            // ζⁿ with |ζ| < ρ(𝐒₋₁) is a genuine eigenvector; keep ζ off 0
            let r = r.max(1e-3 * radius.to_f64());
            let zeta = Complex64::from_polar(r, theta);
            inside_witness(op, zeta.inv(), lambda, &p.residual_ns)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightFamily;
    use std::f64::consts::E;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn l2(kind: WeightKind, domain: Domain) -> SpaceSpec {
        SpaceSpec::weighted_lp(2.0, WeightFamily::new(kind, domain).unwrap()).unwrap()
    }

    fn cosine() -> FiniteSeq {
        FiniteSeq::delta(1).add(&FiniteSeq::delta(-1))
    }

    #[test]
    fn eigen_residual_examples() {
        let s = SpaceSpec::l2(Domain::Bilateral);
        let shift = OperatorSpec::shift_power(1, s.clone()).unwrap();
        let r = approx_eigen_residual(&shift, Complex64::i(), 100).unwrap();
        assert!(r <= 0.1);
        assert!((r - (2.0f64 / 201.0).sqrt()).abs() < 1e-12);
        let back = OperatorSpec::toeplitz(FiniteSeq::delta(-1), SpaceSpec::l2(Domain::Unilateral)).unwrap();
        assert!(approx_eigen_residual(&back, c(2.5), 40).unwrap() <= 1e-6);
        let m = OperatorSpec::multiplier(cosine(), s).unwrap();
        let z = Complex64::from_polar(1.0, PI / 3.0);
        assert!(approx_eigen_residual(&m, z, 200).unwrap() <= 0.2);
    }

    #[test]
    fn blowup_examples() {
        let u = OperatorSpec::shift_power(1, SpaceSpec::l2(Domain::Unilateral)).unwrap();
        let ns: Vec<usize> = (20..=60).step_by(10).collect();
        let g = blowup_witness(&u, c(0.5), &ns).unwrap();
        for f in growth_factors(&g) {
            assert!((f - 2.0).abs() < 1e-6);
        }
        assert!(matches!(blowup_verdict(&g), Verdict::BlowupWitness { .. }));
        let g = blowup_witness(&u, c(3.0), &ns).unwrap();
        assert!(g.iter().all(|e| e.1.to_f64() <= 0.51));
        assert!(matches!(blowup_verdict(&g), Verdict::Inconclusive { .. }));
        let t = OperatorSpec::shift_power(1, l2(WeightKind::TwoSidedExp { alpha: 1.0 }, Domain::Bilateral)).unwrap();
        let g = blowup_witness(&t, c(1.0), &ns).unwrap();
        assert!(matches!(blowup_verdict(&g), Verdict::BlowupWitness { .. }));
    }

    #[test]
    fn singular_section_is_infinite() {
        let u = OperatorSpec::shift_power(1, SpaceSpec::l2(Domain::Unilateral)).unwrap();
        let g = blowup_witness(&u, c(0.0), &[5]).unwrap();
        assert_eq!(g[0].1, ExtReal::Infinite);
    }

    #[test]
    fn laurent_certificates() {
        let s = SpaceSpec::l2(Domain::Bilateral);
        let cert = outside_certificate(&FiniteSeq::delta(1), c(0.0), &s, (1.0, 1.0), 256).unwrap();
        match cert.verdict {
            Verdict::OutsideBound { bound, .. } => assert!((bound - 1.0).abs() < 1e-12),
            v => panic!("{v:?}"),
        }
        let cert = outside_certificate(&cosine(), c(3.0), &s, (1.0, 1.0), 1024).unwrap();
        match cert.verdict {
            Verdict::OutsideBound { bound, identity_residual, .. } => {
                assert!((bound - 1.0).abs() < 1e-9);
                assert!(identity_residual.unwrap() <= 1e-8);
            }
            v => panic!("{v:?}"),
        }
        let cert = outside_certificate(&cosine(), c(1.0), &s, (1.0, 1.0), 1024).unwrap();
        assert!(cert.is_inconclusive());
        assert!(matches!(
            outside_certificate(&cosine(), c(3.0), &s, (0.5, 1.0), 1024),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            outside_certificate(&cosine(), c(3.0), &s, (1.0, 1.0), 300),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn laurent_coefficients_match_partial_fractions() {
        let a = (3.0 - 5f64.sqrt()) / 2.0;
        let coeffs = laurent_inverse_coefficients(&cosine(), c(3.0), (1.0, 1.0), 512).unwrap();
        for k in -20..=20i64 {
            let oracle = -a.powi(k.abs() as i32) / 5f64.sqrt();
            assert!((coeffs.get(k) - c(oracle)).norm() < 1e-13);
        }
    }

    #[test]
    fn two_radius_transform_on_weighted_annulus() {
        let t = l2(WeightKind::TwoSidedExp { alpha: 1.0 }, Domain::Bilateral);
        // ellipse of semi-axes e + 1/e ≈ 3.086 and e − 1/e; 4 is outside
        let cert = outside_certificate(&cosine(), c(4.0), &t, (1.0 / E, E), 1024).unwrap();
        assert!(cert.is_outside(), "{cert:?}");
        let cert = outside_certificate(&cosine(), c(2.5), &t, (1.0 / E, E), 1024).unwrap();
        assert!(cert.is_inconclusive());
    }

    #[test]
    fn neumann_examples() {
        let u = SpaceSpec::l2(Domain::Unilateral);
        let s = OperatorSpec::shift_power(1, u.clone()).unwrap();
        match neumann_outside_certificate(&s, c(1.5), 64).unwrap().verdict {
            Verdict::OutsideBound { bound, tail, .. } => {
                assert!(bound <= 2.001 && tail < 1e-6);
            }
            v => panic!("{v:?}"),
        }
        let g = OperatorSpec::shift_power(1, l2(WeightKind::Geometric { a: 0.5 }, Domain::Unilateral)).unwrap();
        match neumann_outside_certificate(&g, c(1.0), 64).unwrap().verdict {
            Verdict::OutsideBound { bound, .. } => assert!(bound <= 2.001),
            v => panic!("{v:?}"),
        }
        assert!(neumann_outside_certificate(&s, c(0.9), 64).unwrap().is_inconclusive());
    }

    #[test]
    fn analytic_toeplitz_certificate() {
        let u = SpaceSpec::l2(Domain::Unilateral);
        let cert = toeplitz_outside_certificate(&FiniteSeq::delta(1), c(1.5), &u, 256).unwrap();
        match cert.verdict {
            Verdict::OutsideBound { bound, .. } => assert!((bound - 2.0).abs() < 1e-9),
            v => panic!("{v:?}"),
        }
        let inside = toeplitz_outside_certificate(&FiniteSeq::delta(1), c(0.5), &u, 256).unwrap();
        assert!(inside.is_inconclusive());
        let back = toeplitz_outside_certificate(&FiniteSeq::delta(-1), c(2.0), &u, 256).unwrap();
        assert!(back.is_outside());
    }

    #[test]
    fn symbol_bound_examples() {
        let g = l2(WeightKind::Geometric { a: 2.0 }, Domain::Bilateral);
        let rep = check_symbol_bound(&FiniteSeq::delta(1), &g, &[2.0], 256).unwrap();
        assert!((rep.max_sup - 2.0).abs() < 1e-12);
        assert_eq!(rep.upper, ExtReal::Finite(2.0));
        assert!((rep.lower.unwrap() - 2.0).abs() < 0.01);
        assert!(rep.passed);
        let t = l2(WeightKind::TwoSidedExp { alpha: 1.0 }, Domain::Bilateral);
        let radii: Vec<f64> = (0..9).map(|i| (-1.0 + i as f64 / 4.0).exp()).collect();
        let rep = check_symbol_bound(&cosine(), &t, &radii, 32).unwrap();
        assert!((rep.max_sup - (E + 1.0 / E)).abs() < 1e-9);
        assert!((rep.upper.to_f64() - 2.0 * E).abs() < 1e-12);
        assert!(rep.bound_holds && rep.isometric_gap.is_none());
        assert!(check_symbol_bound(&cosine(), &t, &[3.0], 32).is_err());
    }

    #[test]
    fn scaling_identity_examples() {
        let d = check_scaling_identity(Domain::Bilateral, &cosine(), &FiniteSeq::delta(0), 2.0).unwrap();
        assert_eq!(d.absolute, 0.0);
        let d = check_scaling_identity(Domain::Unilateral, &FiniteSeq::delta(-1), &FiniteSeq::delta(0), 3.0).unwrap();
        assert_eq!(d.absolute, 0.0);
        assert!(check_scaling_identity(Domain::Bilateral, &cosine(), &cosine(), 0.0).is_err());
    }

    #[test]
    fn dispatcher_on_unilateral_shift() {
        let u = SpaceSpec::l2(Domain::Unilateral);
        let s = OperatorSpec::shift_power(1, u).unwrap();
        let p = VerifyParams {
            grid: ImageGrid {
                radial: 65,
                angular: 256,
            },
            ..VerifyParams::default()
        };
        assert!(matches!(
            verify_point(&s, c(0.5), &p).unwrap().verdict,
            Verdict::BlowupWitness { .. }
        ));
        assert!(matches!(
            verify_point(&s, c(0.9), &p).unwrap().verdict,
            Verdict::BlowupWitness { .. }
        ));
        assert!(verify_point(&s, c(1.5), &p).unwrap().is_outside());
    }

    #[test]
    fn dispatcher_on_laurent_operator() {
        let m = OperatorSpec::multiplier(cosine(), SpaceSpec::l2(Domain::Bilateral)).unwrap();
        let p = VerifyParams::default();
        let inside = verify_point(&m, c(1.0), &p).unwrap();
        assert!(matches!(inside.verdict, Verdict::InsideWitness { .. }), "{inside:?}");
        assert!(verify_point(&m, Complex64::new(1.0, 1.0), &p).unwrap().is_outside());
    }
}
