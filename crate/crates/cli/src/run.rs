use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use shiftspec::multidim::{
    approx_eigen_residual_multi, joint_exclusion_test, outside_certificate_multi,
    predicted_sigma_multiplier_multi, Exclusion, JointRegion,
};
use shiftspec::spectra::{
    nearest_sample, predicted_sigma_multiplier_with, predicted_sigma_shift,
    predicted_sigma_toeplitz_with, predicted_sigma_unilateral, region_contains, Cloud, Semantics,
    ToeplitzSide,
};
use shiftspec::verify::{
    neumann_outside_certificate, toeplitz_outside_certificate, verify_point, Verdict,
};
use shiftspec::weights::{boundedness, spectral_radius_shift, Boundedness, RadiusBracket};
use shiftspec::{Certificate, Direction, Domain, Membership, SpectralRegion};

use crate::config::{Resolved, Task};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusResult {
    pub forward: RadiusBracket,
    pub backward: RadiusBracket,
    pub forward_boundedness: Boundedness,
    pub backward_boundedness: Boundedness,
    /// `shift` on ℤ; `forward` and `backward` disks on ℤ⁺.
    pub predictions: BTreeMap<String, SpectralRegion>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictResult {
    pub region: SpectralRegion,
    pub semantics: Semantics,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyResult {
    pub certificates: Vec<Certificate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualSample {
    pub z: Vec<Complex64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointExclusion {
    pub z: Vec<Complex64>,
    pub result: Exclusion,
}

#[derive(Debug, Clone, Serialize)]
pub struct InRegionSummary {
    pub samples: usize,
    pub excluded: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct JointResult {
    pub region: JointRegion,
    pub cloud: Cloud,
    pub min_modulus: f64,
    pub max_modulus: f64,
    pub residuals: Vec<ResidualSample>,
    pub certificates: Vec<Certificate>,
    pub exclusions: Vec<PointExclusion>,
    pub in_region: InRegionSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapClass {
    /// Inside the inner (inclusion-only) prediction.
    Predicted,
    CertifiedOutside,
    Uncertified,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapPoint {
    pub lambda: Complex64,
    pub class: GapClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapResult {
    pub side: ToeplitzSide,
    pub predicted: usize,
    pub certified_outside: usize,
    pub uncertified: usize,
    /// Largest distance from an uncertified λ to the prediction cloud.
    pub band_width: Option<f64>,
    pub points: Vec<GapPoint>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskResult {
    Radius(RadiusResult),
    Predict(PredictResult),
    Verify(VerifyResult),
    Joint(JointResult),
    ConjectureGap(GapResult),
    Selftest,
}

pub fn run(task: Task, r: &Resolved) -> Result<(TaskResult, Vec<Check>), CliError> {
    match task {
        Task::Radius => radius(r),
        Task::Predict => predict(r),
        Task::Verify => verify(r),
        Task::Joint => joint(r),
        Task::ConjectureGap => conjecture_gap(r),
        Task::Selftest => Ok((TaskResult::Selftest, crate::selftest::run())),
    }
}

fn radius(r: &Resolved) -> Result<(TaskResult, Vec<Check>), CliError> {
    let space = r.space();
    let forward = spectral_radius_shift(space, Direction::Forward, r.params.horizon)?;
    let backward = spectral_radius_shift(space, Direction::Backward, r.params.horizon)?;
    let mut predictions = BTreeMap::new();
    match space.domain {
        Domain::Bilateral => {
            predictions.insert("shift".into(), predicted_sigma_shift(space)?);
        }
        Domain::Unilateral => {
            for (name, dir) in [("forward", Direction::Forward), ("backward", Direction::Backward)] {
                predictions.insert(name.into(), predicted_sigma_unilateral(space, dir)?);
            }
        }
    }
    let checks = [("forward", forward), ("backward", backward)]
        .iter()
        .map(|(name, b)| {
            Check::new(
                format!("{name} radius bracket is ordered"),
                b.lower <= b.upper,
                format!("[{}, {}]", b.lower, b.upper),
            )
        })
        .collect();
    Ok((
        TaskResult::Radius(RadiusResult {
            forward,
            backward,
            forward_boundedness: boundedness(space, Direction::Forward)?,
            backward_boundedness: boundedness(space, Direction::Backward)?,
            predictions,
        }),
        checks,
    ))
}

fn toeplitz_side(phi: &shiftspec::FiniteSeq) -> Result<ToeplitzSide, CliError> {
    if !phi.has_negative_support() {
        Ok(ToeplitzSide::Forward)
    } else if !phi.has_positive_support() {
        Ok(ToeplitzSide::Backward)
    } else {
        Err(CliError::Hypothesis(
            "Toeplitz predictions need a one-sided symbol".into(),
        ))
    }
}

fn predict(r: &Resolved) -> Result<(TaskResult, Vec<Check>), CliError> {
    let op = r.operator();
    let phi = op.kernel();
    let region = match op.domain() {
        Domain::Bilateral => predicted_sigma_multiplier_with(&phi, &op.space, r.params.grid)?,
        Domain::Unilateral => {
            predicted_sigma_toeplitz_with(&phi, &op.space, toeplitz_side(&phi)?, r.params.grid)?
        }
    };
    Ok((
        TaskResult::Predict(PredictResult {
            semantics: region.semantics(),
            region,
        }),
        Vec::new(),
    ))
}

fn verify(r: &Resolved) -> Result<(TaskResult, Vec<Check>), CliError> {
    let op = r.operator();
    let p = r.params.verify_params();
    let certificates = r
        .lambdas
        .par_iter()
        .map(|&l| verify_point(op, l, &p))
        .collect::<Result<Vec<_>, _>>()?;
    let checks = certificates
        .iter()
        .map(|c| {
            let detail = match &c.verdict {
                Verdict::Inconclusive { reason } => reason.clone(),
                v => verdict_name(v).to_string(),
            };
            Check::new(format!("lambda {} is decided", fmt_complex(c.lambda)), !c.is_inconclusive(), detail)
        })
        .collect();
    Ok((TaskResult::Verify(VerifyResult { certificates }), checks))
}

pub fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::InsideWitness { .. } => "inside_witness",
        Verdict::BlowupWitness { .. } => "blowup_witness",
        Verdict::OutsideBound { .. } => "outside_bound",
        Verdict::Inconclusive { .. } => "inconclusive",
    }
}

pub fn fmt_complex(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// Quasi-random points on the product of boundary circles.
fn boundary_samples(region: &JointRegion, count: usize) -> Vec<Vec<Complex64>> {
    let steps = [(5f64.sqrt() - 1.0) / 2.0, 2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0];
    (0..count)
        .map(|j| {
            (0..region.k())
                .map(|i| {
                    let (a, b) = region.radii(i);
                    let r = if j % 2 == 0 { b } else { a };
                    let t = ((j as f64 + 0.5) * steps[i % steps.len()]).fract();
                    Complex64::from_polar(r, 2.0 * PI * t)
                })
                .collect()
        })
        .collect()
}

fn joint(r: &Resolved) -> Result<(TaskResult, Vec<Check>), CliError> {
    let symbol = r.symbol.as_ref().expect("validated");
    let spaces = &r.spaces;
    let pred = predicted_sigma_multiplier_multi(symbol, spaces, r.params.joint_grid)?;
    let moduli = pred.cloud.points.iter().map(|p| p.norm());
    let min_modulus = moduli.clone().fold(f64::INFINITY, f64::min);
    let max_modulus = moduli.fold(0.0, f64::max);
    let residuals = boundary_samples(&pred.joint, r.params.boundary_samples)
        .into_par_iter()
        .map(|z| {
            let residual = approx_eigen_residual_multi(symbol, spaces, &z, r.params.multi_residual_n)?;
            Ok(ResidualSample { z, residual })
        })
        .collect::<Result<Vec<_>, shiftspec::Error>>()?;
    let certificates = r
        .lambdas
        .iter()
        .map(|&l| outside_certificate_multi(symbol, l, spaces, r.params.multi_transform_size))
        .collect::<Result<Vec<_>, _>>()?;
    let seed = r.seed.unwrap_or(0);
    let family = r.params.exclusion(seed);
    let exclusions = r
        .points
        .par_iter()
        .map(|z| {
            Ok(PointExclusion {
                z: z.clone(),
                result: joint_exclusion_test(z, spaces, &family)?,
            })
        })
        .collect::<Result<Vec<_>, shiftspec::Error>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<Complex64>> = (0..r.params.in_region_samples)
        .map(|_| {
            (0..spaces.len())
                .map(|i| {
                    let (a, b) = pred.joint.radii(i);
                    let rad = if a == b { a } else { rng.gen_range(a..=b) };
                    Complex64::from_polar(rad, rng.gen_range(0.0..2.0 * PI))
                })
                .collect()
        })
        .collect();
    let verdicts = samples
        .par_iter()
        .map(|z| joint_exclusion_test(z, spaces, &family))
        .collect::<Result<Vec<_>, _>>()?;
    let excluded: Vec<Vec<Complex64>> = samples
        .into_iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.is_excluded())
        .map(|(z, _)| z)
        .collect();

    let worst = residuals.iter().map(|s| s.residual).fold(0.0, f64::max);
    let mut checks = vec![Check::new(
        "boundary residuals",
        worst <= r.params.residual_max,
        format!("max {worst:.4e} against {}", r.params.residual_max),
    )];
    if r.params.in_region_samples > 0 {
        checks.push(Check::new(
            "in-region samples are never excluded",
            excluded.is_empty(),
            format!("{} of {} excluded", excluded.len(), r.params.in_region_samples),
        ));
    }
    for c in &certificates {
        // a certified λ must also sit away from the sampled image
        if c.is_outside() {
            let m = region_contains(
                &SpectralRegion::Cloud { cloud: pred.cloud.clone() },
                c.lambda,
                pred.cloud.meta.pitch,
            );
            checks.push(Check::new(
                format!("certified lambda {} is off the image", fmt_complex(c.lambda)),
                m == Membership::Outside,
                format!("{m:?}"),
            ));
        }
    }
    Ok((
        TaskResult::Joint(JointResult {
            region: pred.joint,
            cloud: pred.cloud,
            min_modulus,
            max_modulus,
            residuals,
            certificates,
            exclusions,
            in_region: InRegionSummary {
                samples: r.params.in_region_samples,
                excluded,
            },
        }),
        checks,
    ))
}

fn conjecture_gap(r: &Resolved) -> Result<(TaskResult, Vec<Check>), CliError> {
    let op = r.operator();
    let phi = op.kernel();
    let side = toeplitz_side(&phi)?;
    let region = predicted_sigma_toeplitz_with(&phi, &op.space, side, r.params.grid)?;
    let cloud = region.cloud().expect("image region");
    let p = &r.params;
    let points = r
        .lambdas
        .par_iter()
        .map(|&lambda| {
            let class = if region_contains(&region, lambda, p.tol) != Membership::Outside {
                GapClass::Predicted
            } else {
                let analytic = toeplitz_outside_certificate(&phi, lambda, &op.space, p.transform_size)?;
                let outside = analytic.is_outside()
                    || neumann_outside_certificate(op, lambda, p.horizon)?.is_outside();
                if outside {
                    GapClass::CertifiedOutside
                } else {
                    GapClass::Uncertified
                }
            };
            Ok(GapPoint { lambda, class })
        })
        .collect::<Result<Vec<_>, shiftspec::Error>>()?;
    let count = |c: GapClass| points.iter().filter(|p| p.class == c).count();
    let band_width = points
        .iter()
        .filter(|p| p.class == GapClass::Uncertified)
        .map(|p| nearest_sample(&cloud.points, p.lambda).expect("nonempty cloud").1)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
    Ok((
        TaskResult::ConjectureGap(GapResult {
            side,
            predicted: count(GapClass::Predicted),
            certified_outside: count(GapClass::CertifiedOutside),
            uncertified: count(GapClass::Uncertified),
            band_width,
            points,
        }),
        Vec::new(),
    ))
}
