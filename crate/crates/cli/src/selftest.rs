use std::f64::consts::{E, PI};

use num_complex::Complex64;
use shiftspec::linalg::tridiagonal_eigenvalues;
use shiftspec::multidim::{joint_exclusion_test, ExclusionFamily};
use shiftspec::operators::finite_section_window;
use shiftspec::spectra::predicted_sigma_shift;
use shiftspec::verify::{
    approx_eigen_residual, blowup_witness, growth_factors, neumann_outside_certificate,
    outside_certificate, Verdict,
};
use shiftspec::weights::spectral_radius_shift;
use shiftspec::{Direction, Domain, FiniteSeq, OperatorSpec, SpaceSpec, WeightFamily, WeightKind};

use crate::run::Check;

fn space(kind: WeightKind, domain: Domain) -> shiftspec::Result<SpaceSpec> {
    SpaceSpec::weighted_lp(2.0, WeightFamily::new(kind, domain)?)
}

fn cosine() -> FiniteSeq {
    FiniteSeq::delta(1).add(&FiniteSeq::delta(-1))
}

fn check(name: &str, f: impl FnOnce() -> shiftspec::Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check::new(name, passed, detail),
        Err(e) => Check::new(name, false, e.to_string()),
    }
}

/// Closed-form oracles over every module, small enough to run in seconds.
pub fn run() -> Vec<Check> {
    let c = |x: f64| Complex64::new(x, 0.0);
    vec![
        check("geometric radius", || {
            let s = space(WeightKind::Geometric { a: 2.0 }, Domain::Bilateral)?;
            let b = spectral_radius_shift(&s, Direction::Forward, 64)?;
            Ok(((b.lower.to_f64() - 2.0).abs() <= 1e-12, format!("{b:?}")))
        }),
        check("two-sided exponential annulus", || {
            let s = space(WeightKind::TwoSidedExp { alpha: 1.0 }, Domain::Bilateral)?;
            let (a, b) = predicted_sigma_shift(&s)?.radii().unwrap();
            let ok = (a.to_f64() - 1.0 / E).abs() <= 1e-9 && (b.to_f64() - E).abs() <= 1e-9;
            Ok((ok, format!("[{a}, {b}]")))
        }),
        check("laurent certificate", || {
            let cert = outside_certificate(&cosine(), c(3.0), &SpaceSpec::l2(Domain::Bilateral), (1.0, 1.0), 1024)?;
            Ok(match cert.verdict {
                Verdict::OutsideBound { bound, .. } => ((bound - 1.0).abs() <= 1e-9, format!("B = {bound}")),
                v => (false, format!("{v:?}")),
            })
        }),
        check("unilateral blow-up rate", || {
            let op = OperatorSpec::shift_power(1, SpaceSpec::l2(Domain::Unilateral))?;
            let g = blowup_witness(&op, c(0.5), &[10, 20, 30])?;
            let f = growth_factors(&g);
            Ok((f.iter().all(|x| (x - 2.0).abs() <= 1e-6), format!("{f:?}")))
        }),
        check("neumann bound", || {
            let op = OperatorSpec::shift_power(1, SpaceSpec::l2(Domain::Unilateral))?;
            Ok(match neumann_outside_certificate(&op, c(1.5), 64)?.verdict {
                Verdict::OutsideBound { bound, tail, .. } => (bound <= 2.001 && tail < 1e-6, format!("B = {bound}")),
                v => (false, format!("{v:?}")),
            })
        }),
        check("tridiagonal section", || {
            let op = OperatorSpec::multiplier(cosine(), SpaceSpec::l2(Domain::Bilateral))?;
            let a = finite_section_window(&op, -5, 4)?.matrix;
            let diag: Vec<f64> = (0..10).map(|i| a.get(i, i).re).collect();
            let off: Vec<f64> = (0..9).map(|i| a.get(i + 1, i).re).collect();
            let ev = tridiagonal_eigenvalues(&diag, &off);
            let err = (1..=10)
                .map(|k| 2.0 * (k as f64 * PI / 11.0).cos())
                .rev()
                .zip(&ev)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            Ok((err <= 1e-8, format!("max error {err:.2e}")))
        }),
        check("eigenvector residual", || {
            let op = OperatorSpec::multiplier(cosine(), SpaceSpec::l2(Domain::Bilateral))?;
            let r = approx_eigen_residual(&op, Complex64::from_polar(1.0, PI / 3.0), 200)?;
            Ok((r <= 0.2, format!("{r:.4e}")))
        }),
        check("joint exclusion", || {
            let spaces = [
                space(WeightKind::Geometric { a: 2.0 }, Domain::Bilateral)?,
                space(WeightKind::Constant, Domain::Bilateral)?,
            ];
            let e = joint_exclusion_test(&[c(3.0), c(1.0)], &spaces, &ExclusionFamily::default())?;
            Ok((e.is_excluded(), format!("{e:?}")))
        }),
    ]
}
