//! Finsler metric kernels and the tensors read off them.
//!
//! A [`MetricKernel`] evaluates the generator F²(x, y) on jets. From that
//! single entry point come the fundamental tensor g_ij = ½ ∂²F²/∂yⁱ∂yʲ, the
//! Cartan tensor C_ijk = ¼ ∂³F²/∂yⁱ∂yʲ∂yᵏ, inner products at a reference
//! element, and Gram–Schmidt frames with respect to g. All built-in kernels
//! are positively 1-homogeneous in y and strongly convex on their documented
//! domains.

mod kernels;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet, MAX_ORDER};
use crate::linalg::{dot, norm, Tensor3};

/// Minimum ‖y‖ for a usable reference element.
pub const MIN_REFERENCE_NORM: f64 = 1e-8;

/// Metric-tensor field callback for custom Riemannian kernels: maps chart
/// coordinates (as jets) to the symmetric matrix g_ij(x) (as jets).
pub type MetricField = dyn Fn(&[Jet]) -> Result<Vec<Vec<Jet>>> + Send + Sync;

/// A point of the slit tangent bundle: position `x` and direction `y ≠ 0`.
/// Every direction-dependent tensor is evaluated at such an element.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceElement {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl ReferenceElement {
    /// Validate dimensions, ‖y‖ ≥ 1e-8, and the kernel's domain predicate.
    pub fn new(kernel: &MetricKernel, x: Vec<f64>, y: Vec<f64>) -> Result<ReferenceElement> {
        let n = kernel.dim();
        if x.len() != n {
            return Err(Error::Dimension { expected: n, got: x.len() });
        }
        if y.len() != n {
            return Err(Error::Dimension { expected: n, got: y.len() });
        }
        if norm(&y) < MIN_REFERENCE_NORM {
            return Err(Error::OutOfDomain(format!(
                "direction norm {:.3e} below {MIN_REFERENCE_NORM:.0e}",
                norm(&y)
            )));
        }
        kernel.check_domain(&x, &y)?;
        Ok(ReferenceElement { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// A Finsler structure, specified by its generator F².
#[derive(Clone)]
pub enum MetricKernel {
    /// Flat Euclidean space.
    Euclidean { dim: usize },
    /// Round sphere of radius `r`, as a Riemannian chart metric (stereographic).
    Sphere { dim: usize, radius: f64 },
    /// Ellipsoid with the given semi-axes (and an implicit final axis of 1),
    /// as a Riemannian chart metric. Non-constant curvature: the standard
    /// negative control.
    Ellipsoid { semi_axes: Vec<f64> },
    /// F = |y| + b⟨x,y⟩/|x| with 0 < |b| < 1; x = 0 excluded.
    RandersExample { dim: usize, b: f64 },
    /// Funk metric of the unit ball (flag curvature −1/4).
    FunkBall { dim: usize },
    /// Klein metric of the unit ball (flag curvature −1).
    KleinBall { dim: usize },
    /// F = (Σ (yᵏ)⁴)^(1/4); flat but non-Riemannian. Directions with a zero
    /// component are excluded (the fundamental tensor degenerates there).
    QuarticMinkowski { dim: usize },
    /// Arbitrary Riemannian metric from a chart metric-tensor field.
    Riemannian { dim: usize, name: String, field: Arc<MetricField> },
}

impl MetricKernel {
    pub fn euclidean(dim: usize) -> MetricKernel {
        MetricKernel::Euclidean { dim }
    }

    pub fn sphere(dim: usize, radius: f64) -> MetricKernel {
        assert!(radius > 0.0, "sphere radius must be positive");
        MetricKernel::Sphere { dim, radius }
    }

    pub fn ellipsoid(semi_axes: Vec<f64>) -> MetricKernel {
        assert!(
            semi_axes.len() >= 2 && semi_axes.iter().all(|&a| a > 0.0),
            "ellipsoid needs at least two positive semi-axes"
        );
        MetricKernel::Ellipsoid { semi_axes }
    }

    pub fn randers_example(dim: usize, b: f64) -> MetricKernel {
        assert!(b != 0.0 && b.abs() < 1.0, "randers parameter needs 0 < |b| < 1");
        MetricKernel::RandersExample { dim, b }
    }

    pub fn funk_ball(dim: usize) -> MetricKernel {
        MetricKernel::FunkBall { dim }
    }

    pub fn klein_ball(dim: usize) -> MetricKernel {
        MetricKernel::KleinBall { dim }
    }

    pub fn quartic_minkowski(dim: usize) -> MetricKernel {
        MetricKernel::QuarticMinkowski { dim }
    }

    pub fn riemannian(
        dim: usize,
        name: impl Into<String>,
        field: Arc<MetricField>,
    ) -> MetricKernel {
        MetricKernel::Riemannian { dim, name: name.into(), field }
    }

    pub fn dim(&self) -> usize {
        match self {
            MetricKernel::Euclidean { dim }
            | MetricKernel::Sphere { dim, .. }
            | MetricKernel::RandersExample { dim, .. }
            | MetricKernel::FunkBall { dim }
            | MetricKernel::KleinBall { dim }
            | MetricKernel::QuarticMinkowski { dim }
            | MetricKernel::Riemannian { dim, .. } => *dim,
            MetricKernel::Ellipsoid { semi_axes } => semi_axes.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MetricKernel::Euclidean { .. } => "euclidean",
            MetricKernel::Sphere { .. } => "sphere",
            MetricKernel::Ellipsoid { .. } => "ellipsoid",
            MetricKernel::RandersExample { .. } => "randers_example",
            MetricKernel::FunkBall { .. } => "funk_ball",
            MetricKernel::KleinBall { .. } => "klein_ball",
            MetricKernel::QuarticMinkowski { .. } => "quartic_minkowski",
            MetricKernel::Riemannian { .. } => "riemannian",
        }
    }

    /// Does g depend on the direction y? False exactly for the quadratic
    /// (Riemannian) kernels.
    pub fn is_riemannian(&self) -> bool {
        matches!(
            self,
            MetricKernel::Euclidean { .. }
                | MetricKernel::Sphere { .. }
                | MetricKernel::Ellipsoid { .. }
                | MetricKernel::Riemannian { .. }
        )
    }

    /// Domain predicate for (x, y), beyond y ≠ 0.
    pub fn check_domain(&self, x: &[f64], y: &[f64]) -> Result<()> {
        match self {
            MetricKernel::RandersExample { .. } => {
                if norm(x) < 1e-8 {
                    return Err(Error::OutOfDomain("randers kernel excludes x = 0".into()));
                }
            }
            MetricKernel::FunkBall { .. } | MetricKernel::KleinBall { .. } => {
                if 1.0 - dot(x, x) <= 1e-12 {
                    return Err(Error::OutOfDomain(format!(
                        "|x| = {:.6} is outside the open unit ball",
                        norm(x)
                    )));
                }
            }
            MetricKernel::QuarticMinkowski { .. } => {
                let max = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let min = y.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
                if min <= 1e-9 * max {
                    return Err(Error::OutOfDomain(
                        "quartic kernel needs every direction component nonzero".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Evaluate F²(x, y) on jets. `x` and `y` must share one jet shape; the
    /// caller decides which jet variables (if any) feed them.
    pub fn f_squared_jets(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        match self {
            MetricKernel::Euclidean { .. } => Ok(kernels::euclidean(y)),
            MetricKernel::Sphere { radius, .. } => kernels::sphere(*radius, x, y),
            MetricKernel::Ellipsoid { semi_axes } => kernels::ellipsoid(semi_axes, x, y),
            MetricKernel::RandersExample { b, .. } => kernels::randers(*b, x, y),
            MetricKernel::FunkBall { .. } => kernels::funk_ball(x, y),
            MetricKernel::KleinBall { .. } => kernels::klein_ball(x, y),
            MetricKernel::QuarticMinkowski { .. } => kernels::quartic_minkowski(y),
            MetricKernel::Riemannian { field, .. } => {
                let g = field(x)?;
                Ok(kernels::riemannian(&g, y))
            }
        }
    }

    /// Expand F² around an element, treating the first `dim` jet variables as
    /// x and the next `dim` as y.
    pub(crate) fn lift_f_squared(&self, x: &[f64], y: &[f64], order: usize) -> Result<Jet> {
        debug_assert!(order <= MAX_ORDER);
        let n = self.dim();
        let point: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
        let vars = Jet::variables(2 * n, order, &point);
        self.f_squared_jets(&vars[..n], &vars[n..])
    }

    /// The Finsler norm F(x, y).
    pub fn f(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let n = self.dim();
        let xj: Vec<Jet> = x.iter().map(|&v| Jet::constant(1, 0, v)).collect();
        let yj: Vec<Jet> = y.iter().map(|&v| Jet::constant(1, 0, v)).collect();
        debug_assert_eq!(xj.len(), n);
        let f2 = self.f_squared_jets(&xj, &yj)?.value();
        if f2 <= 0.0 {
            return Err(Error::OutOfDomain(format!("F² = {f2:.3e} is not positive")));
        }
        Ok(f2.sqrt())
    }
}

impl fmt::Debug for MetricKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKernel::Sphere { dim, radius } => {
                write!(f, "sphere(dim={dim}, r={radius})")
            }
            MetricKernel::Ellipsoid { semi_axes } => write!(f, "ellipsoid({semi_axes:?})"),
            MetricKernel::RandersExample { dim, b } => {
                write!(f, "randers_example(dim={dim}, b={b})")
            }
            MetricKernel::Riemannian { dim, name, .. } => {
                write!(f, "riemannian(dim={dim}, {name})")
            }
            other => write!(f, "{}(dim={})", other.kind_name(), other.dim()),
        }
    }
}

/// g and its inverse at one reference element.
#[derive(Clone, Debug)]
pub struct FundamentalTensor {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub at: ReferenceElement,
}

impl FundamentalTensor {
    /// g_z(a, b).
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let av = DVector::from_column_slice(a);
        let bv = DVector::from_column_slice(b);
        (av.transpose() * &self.g * bv)[(0, 0)]
    }

    /// ‖a‖ with respect to g_z.
    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }
}

/// g_ij = ½ ∂²(generator)/∂yⁱ∂yʲ and its inverse, read off a generator jet
/// whose direction variables occupy the block starting at `dim`. Positive
/// definiteness is enforced by Cholesky factorization (the smallest
/// eigenvalue is computed only to report a failure).
pub(crate) fn generator_matrices(f2: &Jet, dim: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let mut g = DMatrix::zeros(dim, dim);
    let mut m = vec![0usize; f2.num_vars()];
    for i in 0..dim {
        for j in i..dim {
            m.iter_mut().for_each(|e| *e = 0);
            m[dim + i] += 1;
            m[dim + j] += 1;
            let value = 0.5 * f2.partial(&m)?;
            g[(i, j)] = value;
            g[(j, i)] = value;
        }
    }
    let g_inv = match nalgebra::Cholesky::new(g.clone()) {
        Some(chol) => chol.inverse(),
        None => {
            let min_eigen = g
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |m, &v| m.min(v));
            return Err(Error::NotPositiveDefinite { min_eigen });
        }
    };
    Ok((g, g_inv))
}

/// Fundamental tensor g_ij = ½ ∂²F²/∂yⁱ∂yʲ at `z`.
pub fn fundamental_tensor(kernel: &MetricKernel, z: &ReferenceElement) -> Result<FundamentalTensor> {
    let f2 = kernel.lift_f_squared(&z.x, &z.y, 2)?;
    let (g, g_inv) = generator_matrices(&f2, kernel.dim())?;
    Ok(FundamentalTensor { g, g_inv, at: z.clone() })
}

/// Cartan tensor C_ijk = ¼ ∂³F²/∂yⁱ∂yʲ∂yᵏ at `z`. Zero exactly when the
/// kernel is Riemannian; always satisfies C(y, ·, ·) = 0.
pub fn cartan_tensor(kernel: &MetricKernel, z: &ReferenceElement) -> Result<Tensor3> {
    let n = kernel.dim();
    if kernel.is_riemannian() {
        return Ok(Tensor3::zeros(n));
    }
    let f2 = kernel.lift_f_squared(&z.x, &z.y, 3)?;
    let mut c = Tensor3::zeros(n);
    let mut m = vec![0usize; 2 * n];
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                m.iter_mut().for_each(|e| *e = 0);
                m[n + i] += 1;
                m[n + j] += 1;
                m[n + k] += 1;
                let value = 0.25 * f2.partial(&m)?;
                // Fully symmetric: write every permutation.
                for (a, b, c_) in [
                    (i, j, k),
                    (i, k, j),
                    (j, i, k),
                    (j, k, i),
                    (k, i, j),
                    (k, j, i),
                ] {
                    c[(a, b, c_)] = value;
                }
            }
        }
    }
    Ok(c)
}

/// Orthonormalize `vectors` against the inner product `g` (modified
/// Gram–Schmidt with one re-orthogonalization pass). The first output stays
/// parallel to the first input. Fails if the inputs are dependent.
pub fn gram_schmidt(g: &DMatrix<f64>, vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = g.nrows();
    let inner = |a: &[f64], b: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += a[i] * g[(i, j)] * b[j];
            }
        }
        acc
    };
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.len() != n {
            return Err(Error::Dimension { expected: n, got: v.len() });
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            for u in &out {
                let c = inner(u, &w);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= c * ui;
                }
            }
        }
        let pivot = inner(&w, &w).max(0.0).sqrt();
        if pivot < 1e-12 {
            return Err(Error::DependentVectors { pivot });
        }
        for wi in &mut w {
            *wi /= pivot;
        }
        out.push(w);
    }
    Ok(out)
}

/// Extend a g-orthonormal family to a full g-orthonormal basis of the chart
/// space, returning only the added vectors. Candidates are drawn from the
/// coordinate axes; axes nearly dependent on the span so far are skipped.
pub fn complete_frame(g: &DMatrix<f64>, frame: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = g.nrows();
    let mut basis: Vec<Vec<f64>> = frame.to_vec();
    let mut added = Vec::with_capacity(n.saturating_sub(frame.len()));
    for axis in 0..n {
        if basis.len() == n {
            break;
        }
        let mut candidate = basis.clone();
        let mut e = vec![0.0; n];
        e[axis] = 1.0;
        candidate.push(e);
        match gram_schmidt(g, &candidate) {
            Ok(mut done) => {
                let w = done.pop().expect("candidate list is nonempty");
                added.push(w.clone());
                basis.push(w);
            }
            Err(Error::DependentVectors { .. }) => continue,
            Err(err) => return Err(err),
        }
    }
    if basis.len() < n {
        return Err(Error::RankDeficient);
    }
    Ok(added)
}

/// Largest deviation of the Gram matrix of `vectors` from the identity.
pub fn orthonormality_deviation(g: &DMatrix<f64>, vectors: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let mut acc = 0.0;
            for p in 0..g.nrows() {
                for q in 0..g.ncols() {
                    acc += a[p] * g[(p, q)] * b[q];
                }
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - expect).abs());
        }
    }
    worst
}

// ─── JSON metric specs ─────────────────────────────────────────────────────

/// Serialized form of a kernel: `{"kind": ..., "dim": ..., "params": {...}}`.
/// Custom Riemannian callbacks are API-only and have no JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub kind: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "MetricParams::is_empty")]
    pub params: MetricParams,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_axes: Option<Vec<f64>>,
}

impl MetricParams {
    pub fn is_empty(&self) -> bool {
        self.b.is_none() && self.r.is_none() && self.semi_axes.is_none()
    }
}

impl MetricSpec {
    pub fn from_json(text: &str) -> Result<MetricSpec> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_kernel(&self) -> Result<MetricKernel> {
        if self.dim < 2 {
            return Err(Error::Spec(format!("dim must be at least 2, got {}", self.dim)));
        }
        let no_params = |kind: &str| -> Result<()> {
            if self.params.is_empty() {
                Ok(())
            } else {
                Err(Error::Spec(format!("kind \"{kind}\" takes no params")))
            }
        };
        match self.kind.as_str() {
            "euclidean" => {
                no_params("euclidean")?;
                Ok(MetricKernel::euclidean(self.dim))
            }
            "sphere" => {
                let r = self.params.r.unwrap_or(1.0);
                if r <= 0.0 {
                    return Err(Error::Spec(format!("params.r must be positive, got {r}")));
                }
                if self.params.b.is_some() || self.params.semi_axes.is_some() {
                    return Err(Error::Spec("kind \"sphere\" takes only params.r".into()));
                }
                Ok(MetricKernel::sphere(self.dim, r))
            }
            "ellipsoid" => {
                let axes = self
                    .params
                    .semi_axes
                    .clone()
                    .ok_or_else(|| Error::Spec("kind \"ellipsoid\" needs params.semi_axes".into()))?;
                if axes.len() != self.dim {
                    return Err(Error::Spec(format!(
                        "params.semi_axes has {} entries but dim = {}",
                        axes.len(),
                        self.dim
                    )));
                }
                if axes.iter().any(|&a| a <= 0.0) {
                    return Err(Error::Spec("params.semi_axes must all be positive".into()));
                }
                Ok(MetricKernel::ellipsoid(axes))
            }
            "randers_example" => {
                let b = self
                    .params
                    .b
                    .ok_or_else(|| Error::Spec("kind \"randers_example\" needs params.b".into()))?;
                if b == 0.0 || b.abs() >= 1.0 {
                    return Err(Error::Spec(format!("params.b needs 0 < |b| < 1, got {b}")));
                }
                Ok(MetricKernel::randers_example(self.dim, b))
            }
            "funk_ball" => {
                no_params("funk_ball")?;
                Ok(MetricKernel::funk_ball(self.dim))
            }
            "klein_ball" => {
                no_params("klein_ball")?;
                Ok(MetricKernel::klein_ball(self.dim))
            }
            "quartic_minkowski" => {
                no_params("quartic_minkowski")?;
                Ok(MetricKernel::quartic_minkowski(self.dim))
            }
            other => Err(Error::Spec(format!(
                "unknown metric kind \"{other}\" (expected euclidean, sphere, ellipsoid, \
                 randers_example, funk_ball, klein_ball, or quartic_minkowski)"
            ))),
        }
    }
}
