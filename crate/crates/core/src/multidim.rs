//! Multipliers on ℤᵏ with separable weights: multi-indexed sequences,
//! symbols in k variables, the joint region ℤᵏ_𝓔 and its numerical checks.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::spaces::{complex_pow, SpaceSpec};
use crate::spectra::{predicted_sigma_shift, Cloud, CloudMeta, Membership, Semantics, SpectralRegion, Truncation};
use crate::symbols::golden_max;
use crate::verify::{Certificate, Method, Verdict, IDENTITY_TOL, MARGIN_REL, TAIL_TOL, TRIM_REL};
use crate::weights::{shift_norm, Domain, WeightKind};

/// Largest lattice dimension handled by tensor grids and transforms.
pub const MAX_DIM: usize = 3;
/// Per-axis angular grid of the margin scan.
pub const MULTI_MARGIN_GRID: usize = 256;
/// Relative slack of the exclusion inequality.
pub const EXCLUSION_SLACK: f64 = 1e-10;
const MARGIN_SWEEPS: usize = 3;

/// Finitely supported sequence on ℤᵏ, k ≥ 2, with no stored zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MultiRepr", into = "MultiRepr")]
pub struct MultiIndexSeq {
    k: usize,
    entries: BTreeMap<Vec<i64>, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MultiRepr {
    k: usize,
    entries: Vec<(Vec<i64>, Complex64)>,
}

impl TryFrom<MultiRepr> for MultiIndexSeq {
    type Error = Error;
    fn try_from(r: MultiRepr) -> Result<Self> {
        MultiIndexSeq::from_entries(r.k, r.entries)
    }
}

impl From<MultiIndexSeq> for MultiRepr {
    fn from(s: MultiIndexSeq) -> Self {
        MultiRepr {
            k: s.k,
            entries: s.entries.into_iter().collect(),
        }
    }
}

impl MultiIndexSeq {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Argument(format!("lattice dimension must be at least 2, got {k}")));
        }
        Ok(MultiIndexSeq {
            k,
            entries: BTreeMap::new(),
        })
    }

    /// Builds from `(index, value)` pairs, summing repeated indices.
    pub fn from_entries(k: usize, entries: impl IntoIterator<Item = (Vec<i64>, Complex64)>) -> Result<Self> {
        let mut s = Self::new(k)?;
        for (n, v) in entries {
            s.accumulate(n, v)?;
        }
        Ok(s)
    }

    /// `e_n`.
    pub fn monomial(n: &[i64]) -> Result<Self> {
        Self::from_entries(n.len(), [(n.to_vec(), Complex64::new(1.0, 0.0))])
    }

    /// The sequence `f` placed along `axis`, zero off that axis.
    pub fn embed(f: &crate::seq::FiniteSeq, k: usize, axis: usize) -> Result<Self> {
        if axis >= k {
            return Err(Error::Argument(format!("axis {axis} out of range for k = {k}")));
        }
        Self::from_entries(
            k,
            f.iter().map(|(n, v)| {
                let mut idx = vec![0; k];
                idx[axis] = n;
                (idx, v)
            }),
        )
    }

    fn accumulate(&mut self, n: Vec<i64>, v: Complex64) -> Result<()> {
        if n.len() != self.k {
            return Err(Error::Argument(format!(
                "index of length {} in a {}-dimensional sequence",
                n.len(),
                self.k
            )));
        }
        let zero = Complex64::new(0.0, 0.0);
        match self.entries.entry(n) {
            Entry::Vacant(e) => {
                if v != zero {
                    e.insert(v);
                }
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += v;
                if *e.get() == zero {
                    e.remove();
                }
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, n: &[i64]) -> Complex64 {
        self.entries.get(n).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], Complex64)> + '_ {
        self.entries.iter().map(|(n, v)| (n.as_slice(), *v))
    }

    /// Per-axis `(min, max)` of the support.
    pub fn bounds(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut it = self.entries.keys();
        let first = it.next()?;
        let (mut lo, mut hi) = (first.clone(), first.clone());
        for n in it {
            for i in 0..self.k {
                lo[i] = lo[i].min(n[i]);
                hi[i] = hi[i].max(n[i]);
            }
        }
        Some((lo, hi))
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).sum()
    }

    pub fn add(&self, other: &MultiIndexSeq) -> Result<Self> {
        let mut s = self.clone();
        for (n, v) in other.iter() {
            s.accumulate(n.to_vec(), v)?;
        }
        Ok(s)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let entries = if c == Complex64::new(0.0, 0.0) {
            BTreeMap::new()
        } else {
            self.entries.iter().map(|(n, v)| (n.clone(), v * c)).collect()
        };
        MultiIndexSeq { k: self.k, entries }
    }
}

/// `(φ ⋆ f)(n) = Σ_m φ(m) f(n − m)`.
pub fn multi_convolve(phi: &MultiIndexSeq, f: &MultiIndexSeq) -> Result<MultiIndexSeq> {
    if phi.k != f.k {
        return Err(Error::Argument(format!("dimensions {} and {} differ", phi.k, f.k)));
    }
    let mut out = MultiIndexSeq::new(phi.k)?;
    for (m, a) in phi.iter() {
        for (n, b) in f.iter() {
            out.accumulate(m.iter().zip(n).map(|(x, y)| x + y).collect(), a * b)?;
        }
    }
    Ok(out)
}

fn check_point(k: usize, z: &[Complex64]) -> Result<()> {
    if z.len() != k {
        return Err(Error::Argument(format!("point has {} coordinates, expected {k}", z.len())));
    }
    Ok(())
}

/// `φ̃(z) = Σ φ(n) z₁^{n₁}⋯zₖ^{nₖ}`.
pub fn eval_symbol_multi(phi: &MultiIndexSeq, z: &[Complex64]) -> Result<Complex64> {
    check_point(phi.k, z)?;
    if let Some((lo, _)) = phi.bounds() {
        for i in 0..phi.k {
            if lo[i] < 0 && z[i] == Complex64::new(0.0, 0.0) {
                return Err(Error::Pole { coordinate: i });
            }
        }
    }
    Ok(phi
        .iter()
        .map(|(n, v)| n.iter().zip(z).fold(v, |acc, (&e, &zi)| acc * complex_pow(zi, e)))
        .sum())
}

/// Product of annuli `σ(S₁) × ⋯ × σ(Sₖ)`; `exact` when it is the joint
/// region itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointRegion {
    pub factors: Vec<SpectralRegion>,
    pub exact: bool,
}

/// Per-axis sampling: `radial` radii across annulus factors (circles take
/// one) times `angular` angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointGrid {
    pub radial: usize,
    pub angular: usize,
}

impl Default for JointGrid {
    fn default() -> Self {
        JointGrid {
            radial: 9,
            angular: 256,
        }
    }
}

/// Tensor grid in ℂᵏ; point `idx` is read in mixed radix, last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytorus {
    pub axes: Vec<Vec<Complex64>>,
}

impl Polytorus {
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, mut idx: usize) -> Vec<Complex64> {
        let mut z = vec![Complex64::new(0.0, 0.0); self.axes.len()];
        for (i, axis) in self.axes.iter().enumerate().rev() {
            z[i] = axis[idx % axis.len()];
            idx /= axis.len();
        }
        z
    }
}

impl JointRegion {
    pub fn k(&self) -> usize {
        self.factors.len()
    }

    /// `(inner, outer)` radii of factor `i`.
    pub fn radii(&self, i: usize) -> (f64, f64) {
        let (a, b) = self.factors[i].radii().expect("annulus factors");
        (a.to_f64(), b.to_f64())
    }

    /// Product membership with per-coordinate modulus tolerance.
    pub fn contains(&self, z: &[Complex64], tol: f64) -> Result<Membership> {
        check_point(self.k(), z)?;
        let mut boundary = false;
        for (i, zi) in z.iter().enumerate() {
            let (a, b) = self.radii(i);
            let m = zi.norm();
            if (m - a).abs() <= tol || (m - b).abs() <= tol {
                boundary = true;
            } else if m < a || m > b {
                return Ok(Membership::Outside);
            }
        }
        Ok(if boundary {
            Membership::Boundary
        } else {
            Membership::Inside
        })
    }

    fn axis_radii(&self, i: usize, radial: usize) -> Vec<f64> {
        let (a, b) = self.radii(i);
        if a == b || radial < 2 {
            return vec![b];
        }
        (0..radial)
            .map(|j| a + (b - a) * j as f64 / (radial - 1) as f64)
            .collect()
    }

    /// Tensor samples of the region, radius-major on each axis.
    pub fn polytorus(&self, grid: JointGrid) -> Polytorus {
        let axes = (0..self.k())
            .map(|i| {
                self.axis_radii(i, grid.radial)
                    .into_iter()
                    .flat_map(|r| {
                        (0..grid.angular)
                            .map(move |j| Complex64::from_polar(r, 2.0 * PI * j as f64 / grid.angular as f64))
                    })
                    .collect()
            })
            .collect();
        Polytorus { axes }
    }

    /// Product of the boundary circles only.
    pub fn distinguished_boundary(&self, angular: usize) -> Polytorus {
        let axes = (0..self.k())
            .map(|i| {
                let (a, b) = self.radii(i);
                let radii = if a == b { vec![b] } else { vec![a, b] };
                radii
                    .into_iter()
                    .flat_map(|r| {
                        (0..angular).map(move |j| Complex64::from_polar(r, 2.0 * PI * j as f64 / angular as f64))
                    })
                    .collect()
            })
            .collect();
        Polytorus { axes }
    }
}

fn check_spaces(spaces: &[SpaceSpec]) -> Result<()> {
    if spaces.len() < 2 {
        return Err(Error::Argument(format!(
            "lattice dimension must be at least 2, got {}",
            spaces.len()
        )));
    }
    let p = spaces[0].lp_exponent();
    for s in spaces {
        if s.domain != Domain::Bilateral {
            return Err(Error::Unsupported("lattice factors must be bilateral".into()));
        }
        if s.lp_exponent().is_none() || s.lp_exponent() != p {
            return Err(Error::UnsupportedNorm(
                "lattice factors must share one weighted-lp exponent".into(),
            ));
        }
    }
    Ok(())
}

/// ℤᵏ_𝓔 for a product weight whose factors are Constant, Geometric or
/// TwoSidedExp on weighted ℓ².
pub fn joint_region_separable(spaces: &[SpaceSpec]) -> Result<JointRegion> {
    check_spaces(spaces)?;
    let factors = spaces
        .iter()
        .map(|s| {
            let w = s.hilbert_weight()?;
            match w.kind {
                WeightKind::Constant | WeightKind::Geometric { .. } | WeightKind::TwoSidedExp { .. } => {
                    predicted_sigma_shift(s)
                }
                _ => Err(Error::Unsupported(format!(
                    "no exact joint region for {:?} weights",
                    w.kind
                ))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if factors.len() > MAX_DIM {
        return Err(Error::Unsupported(format!("dimension above {MAX_DIM}")));
    }
    Ok(JointRegion { factors, exact: true })
}

/// `Σ_n |φ(n)| Π ‖S_i^{n_i}‖ ≥ ‖M_φ‖`.
pub fn norm_bound_multi(phi: &MultiIndexSeq, spaces: &[SpaceSpec]) -> Result<ExtReal> {
    check_spaces(spaces)?;
    if phi.k != spaces.len() {
        return Err(Error::Argument("symbol and space dimensions differ".into()));
    }
    let mut total = ExtReal::ZERO;
    for (n, v) in phi.iter() {
        let mut w = ExtReal::Finite(v.norm());
        for (s, &ni) in spaces.iter().zip(n) {
            w = w.mul(shift_norm(s, ni)?);
        }
        total = total.add(w);
    }
    Ok(total)
}

/// Test polynomials of the exclusion test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionFamily {
    /// Monomials with every `|n_i|` up to this.
    pub monomial_degree: i64,
    pub random_count: usize,
    pub random_degree: i64,
    pub seed: u64,
}

impl Default for ExclusionFamily {
    fn default() -> Self {
        ExclusionFamily {
            monomial_degree: 4,
            random_count: 64,
            random_degree: 2,
            seed: 0,
        }
    }
}

impl ExclusionFamily {
    pub fn polynomials(&self, k: usize) -> Result<Vec<MultiIndexSeq>> {
        let d = self.monomial_degree;
        let side = (2 * d + 1) as usize;
        let mut indices: Vec<Vec<i64>> = (0..side.pow(k as u32))
            .map(|idx| {
                let mut rest = idx;
                let mut n = vec![0; k];
                for slot in n.iter_mut().rev() {
                    *slot = (rest % side) as i64 - d;
                    rest /= side;
                }
                n
            })
            .collect();
        // lowest total degree first, so witnesses are as simple as possible
        indices.sort_by_key(|n| (n.iter().map(|j| j.abs()).sum::<i64>(), n.clone()));
        let mut out = indices
            .iter()
            .map(|n| MultiIndexSeq::monomial(n))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let e = self.random_degree;
        for _ in 0..self.random_count {
            let terms = rng.gen_range(2..=5);
            let entries: Vec<(Vec<i64>, Complex64)> = (0..terms)
                .map(|_| {
                    let n = (0..k).map(|_| rng.gen_range(-e..=e)).collect();
                    let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    (n, v)
                })
                .collect();
            let p = MultiIndexSeq::from_entries(k, entries)?;
            if !p.is_empty() {
                out.push(p);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Exclusion {
    /// `|φ̃(z)| > ‖M_φ‖` for the witness, so z ∉ ℤᵏ_𝓔.
    Excluded {
        witness: MultiIndexSeq,
        value: ExtReal,
        bound: f64,
    },
    /// No test separated z; membership is not implied.
    Unknown { tests: usize },
}

impl Exclusion {
    pub fn is_excluded(&self) -> bool {
        matches!(self, Exclusion::Excluded { .. })
    }
}

/// Searches the test family for `φ` with `|φ̃(z)| > Σ|φ(n)| Π ‖S_i^{n_i}‖`.
pub fn joint_exclusion_test(z: &[Complex64], spaces: &[SpaceSpec], family: &ExclusionFamily) -> Result<Exclusion> {
    check_spaces(spaces)?;
    check_point(spaces.len(), z)?;
    let tests = family.polynomials(spaces.len())?;
    for phi in &tests {
        let ExtReal::Finite(bound) = norm_bound_multi(phi, spaces)? else {
            continue;
        };
        let value = match eval_symbol_multi(phi, z) {
            Ok(v) => ExtReal::Finite(v.norm()),
            Err(Error::Pole { .. }) => ExtReal::Infinite,
            Err(e) => return Err(e),
        };
        if value > ExtReal::Finite(bound * (1.0 + EXCLUSION_SLACK)) {
            return Ok(Exclusion::Excluded {
                witness: phi.clone(),
                value,
                bound,
            });
        }
    }
    Ok(Exclusion::Unknown { tests: tests.len() })
}

/// Image of the sampled joint region under φ̃, with the region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPrediction {
    pub cloud: Cloud,
    pub semantics: Semantics,
    pub joint: JointRegion,
}

/// `σ(M_φ) = φ̃(ℤᵏ_𝓔)` sampled on the joint tensor grid.
pub fn predicted_sigma_multiplier_multi(
    phi: &MultiIndexSeq,
    spaces: &[SpaceSpec],
    grid: JointGrid,
) -> Result<MultiPrediction> {
    let joint = joint_region_separable(spaces)?;
    if phi.k != joint.k() {
        return Err(Error::Argument("symbol and space dimensions differ".into()));
    }
    if grid.angular < 4 || grid.radial < 1 {
        return Err(Error::Argument("joint grid is too coarse".into()));
    }
    let poly = joint.polytorus(grid);
    let points: Vec<Complex64> = (0..poly.len())
        .into_par_iter()
        .map(|i| eval_symbol_multi(phi, &poly.point(i)))
        .collect::<Result<_>>()?;
    let pitch = tensor_pitch(&points, &poly, grid.angular);
    let n = points.len();
    Ok(MultiPrediction {
        cloud: Cloud {
            points,
            meta: CloudMeta {
                radial: 1,
                angular: n,
                radii: Vec::new(),
                truncation: Truncation::default(),
                pitch,
            },
        },
        semantics: Semantics::Equality,
        joint,
    })
}

/// Largest image distance between grid-adjacent samples.
fn tensor_pitch(values: &[Complex64], poly: &Polytorus, angular: usize) -> f64 {
    let sizes: Vec<usize> = poly.axes.iter().map(|a| a.len()).collect();
    let mut strides = vec![1usize; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }
    (0..values.len())
        .into_par_iter()
        .map(|idx| {
            let mut best = 0.0f64;
            for (i, &size) in sizes.iter().enumerate() {
                let c = (idx / strides[i]) % size;
                let (ring, j) = (c / angular, c % angular);
                let next_angle = ring * angular + (j + 1) % angular;
                let mut neighbours = vec![next_angle];
                if (ring + 1) * angular < size {
                    neighbours.push(c + angular);
                }
                for nb in neighbours {
                    let other = idx - c * strides[i] + nb * strides[i];
                    best = best.max((values[idx] - values[other]).norm());
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Dense complex array over a box of ℤᵏ, last axis fastest.
struct Tensor {
    lo: Vec<i64>,
    shape: Vec<usize>,
    data: Vec<Complex64>,
}

impl Tensor {
    fn zeros(lo: Vec<i64>, shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Tensor {
            lo,
            shape,
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    fn index_of(&self, flat: usize) -> Vec<i64> {
        let mut rest = flat;
        let mut n = vec![0; self.shape.len()];
        for i in (0..self.shape.len()).rev() {
            n[i] = self.lo[i] + (rest % self.shape[i]) as i64;
            rest /= self.shape[i];
        }
        n
    }

    fn flat_of(&self, n: &[i64]) -> Option<usize> {
        let mut flat = 0;
        for i in 0..self.shape.len() {
            let d = n[i] - self.lo[i];
            if d < 0 || d >= self.shape[i] as i64 {
                return None;
            }
            flat = flat * self.shape[i] + d as usize;
        }
        Some(flat)
    }

    /// `φ ⋆ self` on a box covering both the input and the image.
    fn convolve(&self, phi: &MultiIndexSeq) -> Tensor {
        let (mut plo, mut phi_hi) = phi.bounds().unwrap_or((vec![0; self.lo.len()], vec![0; self.lo.len()]));
        // keep the input box inside the output box
        plo.iter_mut().for_each(|v| *v = (*v).min(0));
        phi_hi.iter_mut().for_each(|v| *v = (*v).max(0));
        let lo: Vec<i64> = self.lo.iter().zip(&plo).map(|(a, b)| a + b).collect();
        let shape: Vec<usize> = (0..self.lo.len())
            .map(|i| self.shape[i] + (phi_hi[i] - plo[i]) as usize)
            .collect();
        let mut out = Tensor::zeros(lo, shape);
        for flat in 0..self.data.len() {
            let v = self.data[flat];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let n = self.index_of(flat);
            for (m, c) in phi.iter() {
                let t: Vec<i64> = n.iter().zip(m).map(|(a, b)| a + b).collect();
                let idx = out.flat_of(&t).expect("output box covers the support");
                out.data[idx] += c * v;
            }
        }
        out
    }
}

/// Relative residual of the tensor vector `f_N(n) = Π z_i^{−n_i}` on
/// `[−N, N]ᵏ` against `μ = φ̃(z)`.
pub fn approx_eigen_residual_multi(
    phi: &MultiIndexSeq,
    spaces: &[SpaceSpec],
    z: &[Complex64],
    n: usize,
) -> Result<f64> {
    check_spaces(spaces)?;
    check_point(spaces.len(), z)?;
    if phi.k != spaces.len() {
        return Err(Error::Argument("symbol and space dimensions differ".into()));
    }
    let weights = spaces.iter().map(|s| s.hilbert_weight()).collect::<Result<Vec<_>>>()?;
    if z.iter().any(|zi| zi.norm() == 0.0) {
        return Err(Error::Argument("eigenvector base point must have nonzero coordinates".into()));
    }
    let k = spaces.len();
    let n = n as i64;
    let width = (2 * n + 1) as usize;
    let mut f = Tensor::zeros(vec![-n; k], vec![width; k]);
    let axes: Vec<Vec<Complex64>> = z.iter().map(|&zi| (-n..=n).map(|j| complex_pow(zi, -j)).collect()).collect();
    for flat in 0..f.data.len() {
        let idx = f.index_of(flat);
        f.data[flat] = idx
            .iter()
            .enumerate()
            .map(|(i, &j)| axes[i][(j + n) as usize])
            .product();
    }
    let mu = eval_symbol_multi(phi, z)?;
    let mut g = f.convolve(phi);
    for flat in 0..f.data.len() {
        let idx = f.index_of(flat);
        let t = g.flat_of(&idx).expect("image box contains the window");
        g.data[t] -= mu * f.data[flat];
    }
    let norm = |t: &Tensor| -> Result<f64> {
        let mut acc = 0.0;
        for flat in 0..t.data.len() {
            let idx = t.index_of(flat);
            let mut w = 1.0;
            for (wi, &j) in weights.iter().zip(&idx) {
                w *= wi.eval(j)?;
            }
            acc += (t.data[flat].norm() * w).powi(2);
        }
        Ok(acc.sqrt())
    };
    Ok(norm(&g)? / norm(&f)?)
}

/// In-place k-dimensional forward FFT of an `mᵏ` array, last axis fastest.
fn fft_nd(data: &mut [Complex64], m: usize, k: usize) {
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..k {
        let stride = m.pow((k - 1 - axis) as u32);
        let outer = m.pow(axis as u32);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * m * stride + inner;
                for (t, v) in line.iter_mut().enumerate() {
                    *v = data[base + t * stride];
                }
                fft.process(&mut line);
                for (t, v) in line.iter().enumerate() {
                    data[base + t * stride] = *v;
                }
            }
        }
    }
}

fn scan_radii(a: f64, b: f64) -> Vec<f64> {
    if a == b {
        return vec![b];
    }
    let steps = crate::verify::INTERMEDIATE_CIRCLES + 1;
    (0..=steps).map(|i| a * (b / a).powf(i as f64 / steps as f64)).collect()
}

/// `(min |φ̃ − λ|, max |φ̃|)` over the joint region, grid scan refined by
/// coordinatewise golden search in the angles.
fn joint_margin(phi: &MultiIndexSeq, lambda: Complex64, radii: &[(f64, f64)]) -> Result<(f64, f64)> {
    let k = radii.len();
    let grid = MULTI_MARGIN_GRID;
    let h = 2.0 * PI / grid as f64;
    let axis_radii: Vec<Vec<f64>> = radii.iter().map(|&(a, b)| scan_radii(a, b)).collect();
    let sizes: Vec<usize> = axis_radii.iter().map(|r| r.len() * grid).collect();
    let total: usize = sizes.iter().product();
    let coords = |mut idx: usize| -> Vec<(f64, f64)> {
        let mut c = vec![(0.0, 0.0); k];
        for i in (0..k).rev() {
            let j = idx % sizes[i];
            idx /= sizes[i];
            c[i] = (axis_radii[i][j / grid], (j % grid) as f64 * h);
        }
        c
    };
    let point = |c: &[(f64, f64)]| -> Vec<Complex64> { c.iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect() };
    let (best_idx, best, sup) = (0..total)
        .into_par_iter()
        .map(|idx| {
            let v = eval_symbol_multi(phi, &point(&coords(idx))).unwrap();
            (idx, (v - lambda).norm(), v.norm())
        })
        .reduce(
            || (0, f64::INFINITY, 0.0),
            |a, b| {
                let (idx, d) = if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { (b.0, b.1) } else { (a.0, a.1) };
                (idx, d, a.2.max(b.2))
            },
        );
    let mut c = coords(best_idx);
    let mut delta = best;
    for _ in 0..MARGIN_SWEEPS {
        for i in 0..k {
            let t0 = c[i].1;
            let f = |t: f64| {
                let mut cc = c.clone();
                cc[i].1 = t;
                -(eval_symbol_multi(phi, &point(&cc)).unwrap() - lambda).norm()
            };
            let (t, v) = golden_max(f, t0 - h, t0 + h);
            if -v < delta {
                delta = -v;
                c[i].1 = t;
            }
        }
    }
    Ok((delta, sup))
}

/// Certificate that λ ∉ σ(M_φ) on ℤᵏ by a k-dimensional Laurent inversion
/// of `φ̃ − λ` over the joint region.
pub fn outside_certificate_multi(
    phi: &MultiIndexSeq,
    lambda: Complex64,
    spaces: &[SpaceSpec],
    m: usize,
) -> Result<Certificate> {
    let joint = joint_region_separable(spaces)?;
    let k = joint.k();
    if phi.k != k {
        return Err(Error::Argument("symbol and space dimensions differ".into()));
    }
    if !(m >= 64 && m.is_power_of_two()) {
        return Err(Error::Argument(format!("transform size must be a power of two >= 64, got {m}")));
    }
    let radii: Vec<(f64, f64)> = (0..k).map(|i| joint.radii(i)).collect();
    let params = json!({ "radii": radii, "transform_size": m, "margin_grid": MULTI_MARGIN_GRID });
    let cert = |v: Verdict| Certificate::new(lambda, Method::Laurent, v, params.clone());
    let incon = |reason: String| cert(Verdict::Inconclusive { reason });

    let (delta, sup) = joint_margin(phi, lambda, &radii)?;
    if !(delta > 0.0 && delta >= MARGIN_REL * sup) {
        return Ok(incon(format!(
            "margin min|phi - lambda| = {delta:.3e} is below {MARGIN_REL} * sup|phi| = {:.3e}",
            MARGIN_REL * sup
        )));
    }

    // one transform per choice of inner/outer radius on the split axes
    let split: Vec<usize> = (0..k).filter(|&i| radii[i].0 != radii[i].1).collect();
    let total = m.pow(k as u32);
    let half = (m / 2) as i64;
    let transforms: Vec<Vec<Complex64>> = (0..1usize << split.len())
        .map(|mask| {
            let r: Vec<f64> = (0..k)
                .map(|i| match split.iter().position(|&s| s == i) {
                    Some(bit) if mask >> bit & 1 == 1 => radii[i].0,
                    _ => radii[i].1,
                })
                .collect();
            let mut data: Vec<Complex64> = (0..total)
                .into_par_iter()
                .map(|flat| {
                    let mut rest = flat;
                    let mut z = vec![Complex64::new(0.0, 0.0); k];
                    for i in (0..k).rev() {
                        let j = rest % m;
                        rest /= m;
                        z[i] = Complex64::from_polar(r[i], 2.0 * PI * j as f64 / m as f64);
                    }
                    (eval_symbol_multi(phi, &z).unwrap() - lambda).inv()
                })
                .collect();
            fft_nd(&mut data, m, k);
            let scale = 1.0 / total as f64;
            data.iter_mut().for_each(|v| *v *= scale);
            data
        })
        .collect();

    let norms: Vec<Vec<ExtReal>> = spaces
        .iter()
        .map(|s| (-half..half).map(|j| shift_norm(s, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    struct Coef {
        n: Vec<i64>,
        c: Complex64,
        scaled: f64,
    }
    let coefs: Vec<Coef> = (0..total)
        .map(|flat| {
            let mut rest = flat;
            let mut n = vec![0i64; k];
            for i in (0..k).rev() {
                let j = (rest % m) as i64;
                rest /= m;
                n[i] = if j < half { j } else { j - m as i64 };
            }
            let mask = split
                .iter()
                .enumerate()
                .fold(0usize, |acc, (bit, &i)| if n[i] < 0 { acc | 1 << bit } else { acc });
            let a = transforms[mask][flat];
            let r_pow: f64 = (0..k)
                .map(|i| {
                    let r = if n[i] < 0 { radii[i].0 } else { radii[i].1 };
                    r.powi(n[i] as i32)
                })
                .product();
            Coef {
                c: a / r_pow,
                scaled: a.norm(),
                n,
            }
        })
        .collect();
    let floor = TRIM_REL * coefs.iter().map(|c| c.scaled).fold(0.0, f64::max);
    let limit = 3 * m as i64 / 8;
    let weight = |n: &[i64]| -> ExtReal {
        n.iter()
            .enumerate()
            .fold(ExtReal::ONE, |acc, (i, &j)| acc.mul(norms[i][(j + half) as usize]))
    };
    let mut bound = 0.0;
    let mut window_tail = 0.0;
    let mut marginals = vec![vec![0.0f64; half as usize + 1]; k];
    let mut reach = vec![0usize; k];
    let mut kept = Vec::new();
    for coef in &coefs {
        let w = weight(&coef.n);
        if coef.scaled > floor {
            if coef.n.iter().any(|j| j.abs() >= limit) {
                return Ok(incon("coefficients are not resolved by the transform size".into()));
            }
            let ExtReal::Finite(w) = w else {
                return Ok(incon(format!("shift power {:?} is unbounded", coef.n)));
            };
            let t = coef.c.norm() * w;
            bound += t;
            for i in 0..k {
                let j = coef.n[i].unsigned_abs() as usize;
                marginals[i][j] += t;
                reach[i] = reach[i].max(j);
            }
            kept.push((coef.n.clone(), coef.c));
        } else if let ExtReal::Finite(w) = w {
            window_tail += coef.c.norm() * w;
        }
    }
    let mut decay = 0.0f64;
    let mut tail = window_tail;
    for i in 0..k {
        let t = &marginals[i][..=reach[i]];
        let (j0, t0) = t
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
        let last = t[reach[i]];
        let q = if reach[i] > j0 && last > 0.0 {
            (last / t0).powf(1.0 / (reach[i] - j0) as f64)
        } else {
            0.0
        };
        if q >= 1.0 {
            return Ok(incon(format!("coefficients do not decay along axis {i} (ratio {q:.4})")));
        }
        decay = decay.max(q);
        tail += last * q / (1.0 - q);
    }

    // identity check on the window
    let c = MultiIndexSeq::from_entries(k, kept)?;
    let shifted = phi.add(&MultiIndexSeq::from_entries(
        k,
        [(vec![0; k], -lambda)],
    )?)?;
    let (clo, chi) = c.bounds().unwrap_or((vec![0; k], vec![0; k]));
    let mut ct = Tensor::zeros(clo.clone(), (0..k).map(|i| (chi[i] - clo[i] + 1) as usize).collect());
    for (n, v) in c.iter() {
        let idx = ct.flat_of(n).unwrap();
        ct.data[idx] = v;
    }
    let mut product = ct.convolve(&shifted);
    if let Some(o) = product.flat_of(&vec![0; k]) {
        product.data[o] -= Complex64::new(1.0, 0.0);
    }
    let residual = (0..product.data.len())
        .map(|flat| {
            let n = product.index_of(flat);
            let s: f64 = (0..k)
                .map(|i| {
                    let r = if n[i] < 0 { radii[i].0 } else { radii[i].1 };
                    r.powi(n[i] as i32)
                })
                .product();
            product.data[flat].norm() * s
        })
        .fold(0.0, f64::max);
    if residual > IDENTITY_TOL {
        return Ok(incon(format!("inverse identity residual {residual:.3e} exceeds {IDENTITY_TOL:.0e}")));
    }
    if !(bound.is_finite() && tail <= TAIL_TOL * bound.max(1.0)) {
        return Ok(incon(format!("bound {bound:.3e} with tail {tail:.3e}")));
    }
    Ok(cert(Verdict::OutsideBound {
        bound,
        tail,
        decay_ratio: decay,
        identity_residual: Some(residual),
        margin: Some(delta),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightFamily;
    use std::f64::consts::E;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn l2(kind: WeightKind) -> SpaceSpec {
        SpaceSpec::weighted_lp(2.0, WeightFamily::new(kind, Domain::Bilateral).unwrap()).unwrap()
    }

    fn geo_const() -> Vec<SpaceSpec> {
        vec![l2(WeightKind::Geometric { a: 2.0 }), l2(WeightKind::Constant)]
    }

    fn sum_phi() -> MultiIndexSeq {
        MultiIndexSeq::monomial(&[1, 0])
            .unwrap()
            .add(&MultiIndexSeq::monomial(&[0, 1]).unwrap())
            .unwrap()
    }

    #[test]
    fn sequence_invariants() {
        assert!(MultiIndexSeq::new(1).is_err());
        let s = MultiIndexSeq::from_entries(2, [(vec![1, 0], c(1.0)), (vec![1, 0], c(-1.0))]).unwrap();
        assert!(s.is_empty());
        assert!(MultiIndexSeq::from_entries(2, [(vec![1], c(1.0))]).is_err());
        let json = serde_json::to_string(&sum_phi()).unwrap();
        let back: MultiIndexSeq = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sum_phi());
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(eval_symbol_multi(&sum_phi(), &[c(1.0), c(1.0)]).unwrap(), c(2.0));
        let p = MultiIndexSeq::monomial(&[1, -1]).unwrap();
        assert_eq!(eval_symbol_multi(&p, &[c(2.0), c(4.0)]).unwrap(), c(0.5));
        let one = MultiIndexSeq::monomial(&[0, 0]).unwrap();
        assert_eq!(eval_symbol_multi(&one, &[c(0.0), Complex64::i()]).unwrap(), c(1.0));
        assert!(matches!(
            eval_symbol_multi(&p, &[c(1.0), c(0.0)]),
            Err(Error::Pole { coordinate: 1 })
        ));
    }

    #[test]
    fn joint_region_examples() {
        let j = joint_region_separable(&[l2(WeightKind::Constant), l2(WeightKind::Constant)]).unwrap();
        assert_eq!(j.radii(0), (1.0, 1.0));
        assert_eq!(j.radii(1), (1.0, 1.0));
        let j = joint_region_separable(&geo_const()).unwrap();
        assert!((j.radii(0).0 - 2.0).abs() < 1e-12 && (j.radii(0).1 - 2.0).abs() < 1e-12);
        let j = joint_region_separable(&[l2(WeightKind::TwoSidedExp { alpha: 1.0 }), l2(WeightKind::Geometric { a: 2.0 })]).unwrap();
        let (a, b) = j.radii(0);
        assert!((a - 1.0 / E).abs() < 1e-12 && (b - E).abs() < 1e-12);
        assert!(matches!(
            joint_region_separable(&[l2(WeightKind::Polynomial { s: 1.0 }), l2(WeightKind::Constant)]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn exclusion_examples() {
        let spaces = geo_const();
        let fam = ExclusionFamily::default();
        match joint_exclusion_test(&[c(3.0), c(1.0)], &spaces, &fam).unwrap() {
            Exclusion::Excluded { witness, bound, .. } => {
                assert_eq!(witness, MultiIndexSeq::monomial(&[1, 0]).unwrap());
                assert!((bound - 2.0).abs() < 1e-12);
            }
            e => panic!("{e:?}"),
        }
        let z = [Complex64::from_polar(2.0, PI / 4.0), Complex64::from_polar(1.0, 1.0)];
        assert!(!joint_exclusion_test(&z, &spaces, &fam).unwrap().is_excluded());
        match joint_exclusion_test(&[c(2.0), c(0.5)], &spaces, &fam).unwrap() {
            Exclusion::Excluded { witness, .. } => {
                assert_eq!(witness, MultiIndexSeq::monomial(&[0, -1]).unwrap())
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn prediction_examples() {
        let grid = JointGrid { radial: 3, angular: 128 };
        let e10 = MultiIndexSeq::monomial(&[1, 0]).unwrap();
        let pred = predicted_sigma_multiplier_multi(&e10, &geo_const(), grid).unwrap();
        assert!(pred.cloud.points.iter().all(|p| (p.norm() - 2.0).abs() < 1e-12));
        let pred = predicted_sigma_multiplier_multi(&sum_phi(), &geo_const(), grid).unwrap();
        let moduli: Vec<f64> = pred.cloud.points.iter().map(|p| p.norm()).collect();
        let lo = moduli.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = moduli.iter().cloned().fold(0.0, f64::max);
        assert!((lo - 1.0).abs() < 1e-9 && (hi - 3.0).abs() < 1e-9);
        assert!(pred.cloud.meta.pitch > 0.0 && pred.cloud.meta.pitch < 0.1);
        let flat = [l2(WeightKind::Constant), l2(WeightKind::Constant)];
        let e11 = MultiIndexSeq::monomial(&[1, 1]).unwrap();
        let pred = predicted_sigma_multiplier_multi(&e11, &flat, grid).unwrap();
        assert!(pred.cloud.points.iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn residual_examples() {
        let flat = [l2(WeightKind::Constant), l2(WeightKind::Constant)];
        let r = approx_eigen_residual_multi(&sum_phi(), &flat, &[Complex64::i(), c(1.0)], 60).unwrap();
        assert!(r <= 0.3, "{r}");
        let one = MultiIndexSeq::monomial(&[0, 0]).unwrap();
        assert_eq!(approx_eigen_residual_multi(&one, &flat, &[c(0.7), c(3.0)], 10).unwrap(), 0.0);
        let e10 = MultiIndexSeq::monomial(&[1, 0]).unwrap();
        let r = approx_eigen_residual_multi(&e10, &geo_const(), &[c(2.0), c(1.0)], 60).unwrap();
        // conjugate to 2S on the first axis: twice the unweighted defect √(2/121)
        assert!((r - 2.0 * (2.0f64 / 121.0).sqrt()).abs() < 1e-9);
        assert!(r <= 0.3);
    }

    #[test]
    fn multi_certificates() {
        let spaces = geo_const();
        for lambda in [3.5, 0.5] {
            let cert = outside_certificate_multi(&sum_phi(), c(lambda), &spaces, 512).unwrap();
            match cert.verdict {
                Verdict::OutsideBound { identity_residual, margin, .. } => {
                    assert!(identity_residual.unwrap() <= 1e-8);
                    assert!((margin.unwrap() - 0.5).abs() < 1e-9);
                }
                v => panic!("{lambda}: {v:?}"),
            }
        }
        let cert = outside_certificate_multi(&sum_phi(), c(2.0), &spaces, 512).unwrap();
        assert!(cert.is_inconclusive());
    }

    #[test]
    fn symbol_of_product_is_product_of_symbols() {
        let f = MultiIndexSeq::from_entries(2, [(vec![-1, 2], c(0.5)), (vec![0, 0], Complex64::new(1.0, -2.0))]).unwrap();
        let prod = multi_convolve(&sum_phi(), &f).unwrap();
        let z = [Complex64::new(0.3, 1.1), Complex64::new(-0.8, 0.4)];
        let lhs = eval_symbol_multi(&prod, &z).unwrap();
        let rhs = eval_symbol_multi(&sum_phi(), &z).unwrap() * eval_symbol_multi(&f, &z).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }
}
