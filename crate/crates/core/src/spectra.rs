//! Predicted spectral regions, membership queries and Hausdorff distances
//! between sampled clouds.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::seq::FiniteSeq;
use crate::spaces::SpaceSpec;
use crate::symbols::{image_of_region, LaurentSymbol};
use crate::weights::{shift_norm, spectral_radius_shift, Direction, Domain};

/// Horizon of the Gelfand evaluation behind every predicted radius.
pub const RADIUS_HORIZON: usize = 64;
/// Unbounded radii are cut at this multiple of the largest finite radius.
pub const TRUNCATION_FACTOR: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageGrid {
    pub radial: usize,
    pub angular: usize,
}

impl Default for ImageGrid {
    fn default() -> Self {
        ImageGrid {
            radial: 257,
            angular: 4096,
        }
    }
}

/// Radial cut-offs applied before sampling an unbounded or punctured region.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Truncation {
    pub inner: Option<f64>,
    pub outer: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudMeta {
    pub radial: usize,
    pub angular: usize,
    /// Sampled radii; point `i·angular + j` sits at radius `radii[i]`.
    pub radii: Vec<f64>,
    pub truncation: Truncation,
    /// Largest distance between grid-adjacent samples.
    pub pitch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cloud {
    pub points: Vec<Complex64>,
    pub meta: CloudMeta,
}

impl Cloud {
    /// A cloud with no grid structure.
    pub fn from_points(points: Vec<Complex64>) -> Self {
        let n = points.len();
        Cloud {
            points,
            meta: CloudMeta {
                radial: 1,
                angular: n,
                radii: Vec::new(),
                truncation: Truncation::default(),
                pitch: 0.0,
            },
        }
    }

    /// Base-region polar coordinates `(radius, θ)` of sample `idx`, when the
    /// cloud came from a tensor grid.
    pub fn grid_coordinates(&self, idx: usize) -> Option<(f64, f64)> {
        let r = *self.meta.radii.get(idx / self.meta.angular)?;
        let j = idx % self.meta.angular;
        Some((r, 2.0 * std::f64::consts::PI * j as f64 / self.meta.angular as f64))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.points.len() * 32);
        for p in &self.points {
            s.push_str(&format!("{},{}\n", p.re, p.im));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    /// The image is the whole spectrum.
    Equality,
    /// The image is only known to lie inside the spectrum.
    InclusionOnly,
}

/// Which variable the base region of an image is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageVariable {
    /// Samples are φ̃(z) for z in the base region.
    Z,
    /// Samples are φ̃(1/ζ) for ζ in the base region.
    InverseZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToeplitzSide {
    /// T commutes with 𝐒; φ supported in ℤ⁺.
    Forward,
    /// T commutes with 𝐒₋₁; φ supported in ℤ⁻.
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SpectralRegion {
    Annulus {
        rmin: ExtReal,
        rmax: ExtReal,
    },
    Disk {
        r: ExtReal,
    },
    Circle {
        r: f64,
    },
    Cloud {
        cloud: Cloud,
    },
    Image {
        symbol: LaurentSymbol,
        base: Box<SpectralRegion>,
        variable: ImageVariable,
        semantics: Semantics,
        /// Sampled over the interior of the base only.
        open_base: bool,
        cloud: Cloud,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

impl SpectralRegion {
    /// `(inner, outer)` radii of annuli, disks and circles.
    pub fn radii(&self) -> Option<(ExtReal, ExtReal)> {
        match self {
            SpectralRegion::Annulus { rmin, rmax } => Some((*rmin, *rmax)),
            SpectralRegion::Disk { r } => Some((ExtReal::ZERO, *r)),
            SpectralRegion::Circle { r } => Some((ExtReal::Finite(*r), ExtReal::Finite(*r))),
            _ => None,
        }
    }

    pub fn cloud(&self) -> Option<&Cloud> {
        match self {
            SpectralRegion::Cloud { cloud } | SpectralRegion::Image { cloud, .. } => Some(cloud),
            _ => None,
        }
    }

    pub fn semantics(&self) -> Semantics {
        match self {
            SpectralRegion::Image { semantics, .. } => *semantics,
            _ => Semantics::Equality,
        }
    }

    /// Annulus from radii, collapsed to a circle when they coincide.
    fn annulus(rmin: ExtReal, rmax: ExtReal) -> Self {
        match (rmin, rmax) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) if (a - b).abs() <= 1e-12 * b.max(1.0) && b > 0.0 => {
                SpectralRegion::Circle { r: b }
            }
            _ => SpectralRegion::Annulus { rmin, rmax },
        }
    }
}

/// Default cut-offs for sampling a region: unbounded outer radii become
/// 4 × the largest finite radius; a punctured centre is cut at a quarter of
/// the outer radius when the symbol has a pole there.
pub fn default_truncation(region: &SpectralRegion, pole_at_zero: bool) -> Truncation {
    let Some((rmin, rmax)) = region.radii() else {
        return Truncation::default();
    };
    let outer = if rmax.is_finite() {
        None
    } else {
        Some(TRUNCATION_FACTOR * rmin.to_f64().max(1.0))
    };
    let outer_value = outer.unwrap_or(rmax.to_f64());
    let inner = (rmin == ExtReal::ZERO && pole_at_zero).then(|| outer_value / TRUNCATION_FACTOR);
    Truncation { inner, outer }
}

fn radius(space: &SpaceSpec, direction: Direction) -> Result<ExtReal> {
    Ok(spectral_radius_shift(space, direction, RADIUS_HORIZON)?.lower)
}

fn both_bounded(space: &SpaceSpec) -> Result<(bool, bool)> {
    Ok((
        shift_norm(space, 1)?.is_finite(),
        shift_norm(space, -1)?.is_finite(),
    ))
}

/// σ(S) = {1/ρ(S⁻¹) ≤ |z| ≤ ρ(S)} on a bilateral space.
pub fn predicted_sigma_shift(space: &SpaceSpec) -> Result<SpectralRegion> {
    if space.domain != Domain::Bilateral {
        return Err(Error::Precondition("the shift annulus needs a bilateral space".into()));
    }
    let (fwd, bwd) = both_bounded(space)?;
    if !fwd && !bwd {
        return Err(Error::Hypothesis(
            "neither S nor its inverse is bounded on this space".into(),
        ));
    }
    let rmax = radius(space, Direction::Forward)?;
    let rmin = radius(space, Direction::Backward)?.recip();
    Ok(SpectralRegion::annulus(rmin, rmax))
}

/// σ(𝐒) or σ(𝐒₋₁) on a unilateral space: a closed disk.
pub fn predicted_sigma_unilateral(space: &SpaceSpec, direction: Direction) -> Result<SpectralRegion> {
    if space.domain != Domain::Unilateral {
        return Err(Error::Precondition("disk spectra need a unilateral space".into()));
    }
    let (fwd, bwd) = both_bounded(space)?;
    if !(fwd && bwd) {
        return Err(Error::Hypothesis(
            "both unilateral shifts must be bounded".into(),
        ));
    }
    Ok(SpectralRegion::Disk {
        r: radius(space, direction)?,
    })
}

/// Inner radius and outer radius of the unilateral annulus
/// {1/ρ(𝐒₋₁) ≤ |z| ≤ ρ(𝐒)}.
pub fn unilateral_annulus(space: &SpaceSpec) -> Result<SpectralRegion> {
    let rmax = radius(space, Direction::Forward)?;
    let rmin = radius(space, Direction::Backward)?.recip();
    Ok(SpectralRegion::annulus(rmin, rmax))
}

pub fn predicted_sigma_multiplier(phi: &FiniteSeq, space: &SpaceSpec) -> Result<SpectralRegion> {
    predicted_sigma_multiplier_with(phi, space, ImageGrid::default())
}

/// σ(M_φ) = closure of φ̃(σ(S)).
pub fn predicted_sigma_multiplier_with(
    phi: &FiniteSeq,
    space: &SpaceSpec,
    grid: ImageGrid,
) -> Result<SpectralRegion> {
    let base = predicted_sigma_shift(space)?;
    let symbol = LaurentSymbol::new(phi.clone());
    let truncation = default_truncation(&base, symbol.has_negative_powers());
    let cloud = image_of_region(&symbol, &base, grid, truncation)?;
    Ok(SpectralRegion::Image {
        symbol,
        base: Box::new(base),
        variable: ImageVariable::Z,
        semantics: Semantics::Equality,
        open_base: false,
        cloud,
    })
}

pub fn predicted_sigma_toeplitz(
    phi: &FiniteSeq,
    space: &SpaceSpec,
    side: ToeplitzSide,
) -> Result<SpectralRegion> {
    predicted_sigma_toeplitz_with(phi, space, side, ImageGrid::default())
}

/// Inner prediction for a Toeplitz operator commuting with 𝐒 or 𝐒₋₁:
/// the symbol image of the open disk σ(𝐒)° or σ(𝐒₋₁)°, the latter written
/// in the variable ζ = 1/z.
pub fn predicted_sigma_toeplitz_with(
    phi: &FiniteSeq,
    space: &SpaceSpec,
    side: ToeplitzSide,
    grid: ImageGrid,
) -> Result<SpectralRegion> {
    let (direction, variable, symbol) = match side {
        ToeplitzSide::Forward => {
            if phi.has_negative_support() {
                return Err(Error::Precondition(
                    "a Toeplitz operator commuting with S has symbol support in Z+".into(),
                ));
            }
            (Direction::Forward, ImageVariable::Z, LaurentSymbol::new(phi.clone()))
        }
        ToeplitzSide::Backward => {
            if phi.has_positive_support() {
                return Err(Error::Precondition(
                    "a Toeplitz operator commuting with S_-1 has symbol support in Z-".into(),
                ));
            }
            (
                Direction::Backward,
                ImageVariable::InverseZ,
                LaurentSymbol::new(phi.reflect()),
            )
        }
    };
    let base = predicted_sigma_unilateral(space, direction)?;
    let cloud = image_of_region(&symbol, &base, grid, Truncation::default())?;
    Ok(SpectralRegion::Image {
        symbol,
        base: Box::new(base),
        variable,
        semantics: Semantics::InclusionOnly,
        open_base: true,
        cloud,
    })
}

/// Index and distance of the sample nearest to `z`.
pub fn nearest_sample(points: &[Complex64], z: Complex64) -> Option<(usize, f64)> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, (p - z).norm()))
        .fold(None, |acc, x| match acc {
            Some((_, d)) if d <= x.1 => acc,
            _ => Some(x),
        })
}

/// Membership by radius comparison for annuli, disks and circles, and by
/// distance to the nearest sample for clouds. Cloud answers are only as
/// fine as the sampling pitch.
pub fn region_contains(region: &SpectralRegion, lambda: Complex64, tol: f64) -> Membership {
    let m = lambda.norm();
    match region {
        SpectralRegion::Circle { r } => {
            if (m - r).abs() <= tol {
                Membership::Boundary
            } else {
                Membership::Outside
            }
        }
        SpectralRegion::Annulus { .. } | SpectralRegion::Disk { .. } => {
            let (rmin, rmax) = region.radii().unwrap();
            let (rmin, rmax) = (rmin.to_f64(), rmax.to_f64());
            let near_inner = rmin > 0.0 && (m - rmin).abs() <= tol;
            let near_outer = rmax.is_finite() && (m - rmax).abs() <= tol;
            if near_inner || near_outer {
                Membership::Boundary
            } else if m > rmin && m < rmax {
                Membership::Inside
            } else {
                Membership::Outside
            }
        }
        SpectralRegion::Cloud { cloud } | SpectralRegion::Image { cloud, .. } => {
            match nearest_sample(&cloud.points, lambda) {
                Some((_, d)) if d <= tol => Membership::Inside,
                Some((_, d)) if d <= 2.0 * tol => Membership::Boundary,
                _ => Membership::Outside,
            }
        }
    }
}

/// Uniform bucket grid over a point cloud for nearest-neighbour queries.
struct PointIndex<'a> {
    points: &'a [Complex64],
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> PointIndex<'a> {
    fn new(points: &'a [Complex64]) -> Self {
        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.re);
            y0 = y0.min(p.im);
            x1 = x1.max(p.re);
            y1 = y1.max(p.im);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-300);
        let side = (points.len() as f64).sqrt().ceil().max(1.0);
        let cell = span / side;
        let nx = (((x1 - x0) / cell).floor() as usize + 1).max(1);
        let ny = (((y1 - y0) / cell).floor() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (i, p) in points.iter().enumerate() {
            let cx = (((p.re - x0) / cell) as usize).min(nx - 1);
            let cy = (((p.im - y0) / cell) as usize).min(ny - 1);
            buckets[cy * nx + cx].push(i as u32);
        }
        PointIndex {
            points,
            x0,
            y0,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn nearest_distance(&self, z: Complex64) -> f64 {
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1) as i64;
        let cx = clamp((z.re - self.x0) / self.cell, self.nx);
        let cy = clamp((z.im - self.y0) / self.cell, self.ny);
        let mut best = f64::INFINITY;
        let max_ring = self.nx.max(self.ny) as i64;
        for ring in 0..=max_ring {
            if ring > 0 && (ring - 1) as f64 * self.cell > best {
                break;
            }
            for gy in cy - ring..=cy + ring {
                if gy < 0 || gy >= self.ny as i64 {
                    continue;
                }
                let edge_row = gy == cy - ring || gy == cy + ring;
                let step = if edge_row { 1 } else { (2 * ring).max(1) };
                let mut gx = cx - ring;
                while gx <= cx + ring {
                    if gx >= 0 && gx < self.nx as i64 {
                        for &i in &self.buckets[gy as usize * self.nx + gx as usize] {
                            best = best.min((self.points[i as usize] - z).norm());
                        }
                    }
                    gx += step;
                }
            }
        }
        best
    }
}

fn directed_hausdorff(from: &[Complex64], to: &[Complex64]) -> f64 {
    let index = PointIndex::new(to);
    from.par_iter()
        .map(|&p| index.nearest_distance(p))
        .reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance between two point clouds.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("Hausdorff distance of an empty cloud".into()));
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{WeightFamily, WeightKind};
    use std::f64::consts::{E, PI};

    fn l2(kind: WeightKind, domain: Domain) -> SpaceSpec {
        SpaceSpec::weighted_lp(2.0, WeightFamily::new(kind, domain).unwrap()).unwrap()
    }

    fn circle(n: usize, r: f64) -> Vec<Complex64> {
        (0..n)
            .map(|j| Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64))
            .collect()
    }

    #[test]
    fn shift_regions() {
        let c = predicted_sigma_shift(&SpaceSpec::l2(Domain::Bilateral)).unwrap();
        assert_eq!(c, SpectralRegion::Circle { r: 1.0 });
        let t = predicted_sigma_shift(&l2(WeightKind::TwoSidedExp { alpha: 1.0 }, Domain::Bilateral)).unwrap();
        let (a, b) = t.radii().unwrap();
        assert!((a.to_f64() - 1.0 / E).abs() < 1e-12 && (b.to_f64() - E).abs() < 1e-12);
        let p = predicted_sigma_shift(&l2(WeightKind::PiecewiseSuperExp, Domain::Bilateral)).unwrap();
        assert_eq!(
            p,
            SpectralRegion::Annulus {
                rmin: ExtReal::ONE,
                rmax: ExtReal::Infinite
            }
        );
        assert!(matches!(
            predicted_sigma_shift(&SpaceSpec::l2(Domain::Unilateral)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn unilateral_disks() {
        let u = SpaceSpec::l2(Domain::Unilateral);
        assert_eq!(
            predicted_sigma_unilateral(&u, Direction::Forward).unwrap(),
            SpectralRegion::Disk { r: ExtReal::ONE }
        );
        assert_eq!(
            predicted_sigma_unilateral(&u, Direction::Backward).unwrap(),
            SpectralRegion::Disk { r: ExtReal::ONE }
        );
        let g = l2(WeightKind::Geometric { a: 0.5 }, Domain::Unilateral);
        assert_eq!(
            predicted_sigma_unilateral(&g, Direction::Forward).unwrap(),
            SpectralRegion::Disk {
                r: ExtReal::Finite(0.5)
            }
        );
        let p = l2(WeightKind::PiecewiseSuperExp, Domain::Unilateral);
        assert!(matches!(
            predicted_sigma_unilateral(&p, Direction::Forward),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn multiplier_segment() {
        let phi = FiniteSeq::delta(1).add(&FiniteSeq::delta(-1));
        let r = predicted_sigma_multiplier(&phi, &SpaceSpec::l2(Domain::Bilateral)).unwrap();
        assert_eq!(r.semantics(), Semantics::Equality);
        let cloud = r.cloud().unwrap();
        assert!(cloud.points.iter().all(|p| p.im.abs() < 1e-12 && p.re.abs() <= 2.0 + 1e-12));
        assert_eq!(region_contains(&r, Complex64::new(1.0, 1.0), 1e-3), Membership::Outside);
        assert_eq!(region_contains(&r, Complex64::new(0.5, 0.0), 1e-2), Membership::Inside);
    }

    #[test]
    fn multiplier_on_unbounded_annulus_is_truncated() {
        let p = l2(WeightKind::PiecewiseSuperExp, Domain::Bilateral);
        let grid = ImageGrid {
            radial: 4,
            angular: 32,
        };
        let r = predicted_sigma_multiplier_with(&FiniteSeq::delta(1), &p, grid).unwrap();
        let cloud = r.cloud().unwrap();
        assert_eq!(cloud.meta.truncation.outer, Some(4.0));
        assert_eq!(cloud.meta.radii, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn toeplitz_predictions() {
        let u = SpaceSpec::l2(Domain::Unilateral);
        let grid = ImageGrid {
            radial: 33,
            angular: 256,
        };
        let f = predicted_sigma_toeplitz_with(&FiniteSeq::delta(1), &u, ToeplitzSide::Forward, grid).unwrap();
        assert_eq!(f.semantics(), Semantics::InclusionOnly);
        let pts = &f.cloud().unwrap().points;
        assert!(pts.iter().all(|p| p.norm() <= 1.0 + 1e-12));
        assert!(pts.iter().any(|p| (p.norm() - 1.0).abs() < 1e-12));
        let b = predicted_sigma_toeplitz_with(&FiniteSeq::delta(-1), &u, ToeplitzSide::Backward, grid).unwrap();
        assert!(b.cloud().unwrap().points.iter().all(|p| p.norm() <= 1.0 + 1e-12));
        let shifted = FiniteSeq::from_real(0, &[1.0, 1.0]);
        let d = predicted_sigma_toeplitz_with(&shifted, &u, ToeplitzSide::Forward, grid).unwrap();
        let one = Complex64::new(1.0, 0.0);
        assert!(d.cloud().unwrap().points.iter().all(|p| (p - one).norm() <= 1.0 + 1e-12));
        let two_sided = FiniteSeq::delta(1).add(&FiniteSeq::delta(-1));
        assert!(matches!(
            predicted_sigma_toeplitz_with(&two_sided, &u, ToeplitzSide::Forward, grid),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            predicted_sigma_toeplitz_with(&two_sided, &u, ToeplitzSide::Backward, grid),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn membership_examples() {
        let a = SpectralRegion::Annulus {
            rmin: ExtReal::Finite(1.0 / E),
            rmax: ExtReal::Finite(E),
        };
        assert_eq!(region_contains(&a, Complex64::new(1.0, 0.0), 0.0), Membership::Inside);
        let d = SpectralRegion::Disk { r: ExtReal::ONE };
        assert_eq!(region_contains(&d, Complex64::new(1.0, 0.0), 1e-9), Membership::Boundary);
        assert_eq!(region_contains(&d, Complex64::new(1.1, 0.0), 1e-9), Membership::Outside);
        let c = SpectralRegion::Circle { r: 2.0 };
        assert_eq!(region_contains(&c, Complex64::new(0.0, 2.0), 1e-9), Membership::Boundary);
        assert_eq!(region_contains(&c, Complex64::new(0.0, 1.0), 1e-9), Membership::Outside);
        let inf = SpectralRegion::Annulus {
            rmin: ExtReal::ONE,
            rmax: ExtReal::Infinite,
        };
        assert_eq!(region_contains(&inf, Complex64::new(1e6, 0.0), 1e-9), Membership::Inside);
    }

    #[test]
    fn hausdorff_examples() {
        let a = circle(1000, 1.0);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        let b = circle(1000, 2.0);
        assert!((hausdorff(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let mut c = a.clone();
        c.push(Complex64::new(5.0, 0.0));
        assert!((hausdorff(&a, &c).unwrap() - 4.0).abs() < 1e-12);
        assert!(hausdorff(&a, &[]).is_err());
    }

    #[test]
    fn bucketed_nearest_matches_brute_force() {
        let pts: Vec<Complex64> = (0..500)
            .map(|i| {
                let t = i as f64 * 0.37;
                Complex64::new(t.sin() * (1.0 + 0.3 * (3.0 * t).cos()), (1.7 * t).cos())
            })
            .collect();
        let idx = PointIndex::new(&pts);
        for k in 0..200 {
            let z = Complex64::new(-3.0 + 0.031 * k as f64, 2.5 - 0.027 * k as f64);
            let brute = nearest_sample(&pts, z).unwrap().1;
            assert_eq!(idx.nearest_distance(z), brute);
        }
    }
}
