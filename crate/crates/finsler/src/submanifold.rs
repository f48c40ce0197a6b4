//! Immersed submanifolds: induced metric, tangent/normal splitting, second
//! fundamental form, shape operator, mean curvature, and the residuals that
//! detect umbilic and parallel-mean-curvature geometry.
//!
//! Every operation is anchored at a [`SubReferenceElement`]: a parameter
//! point u together with a nonzero parameter direction v, which fixes the
//! ambient reference element z = (x(u), dx(v)) at which all ambient tensors
//! are read. Fields that must be differentiated are extended along the
//! parameter chart — tangent fields by holding their frame components
//! constant, normal fields by re-projecting a constant vector onto the
//! moving normal space.
//!
//! Covariant derivatives along a tangent direction X use the horizontal
//! coefficients Γ* together with the metric's vertical term: ∇_X V =
//! V̇ + Γ*(V, X) + C♯(V, δy), where δy is the covariant velocity of the
//! reference element along the differentiation curve. Because g is parallel
//! for this connection in every direction, d/ds g(Ŵ, Ŷ) telescopes exactly
//! for any δy, and the Weingarten duality g(α(X,Y), W) = g(A_W X, Y) holds
//! to machine precision. The reference element itself rides with δy =
//! −N(z)·X. That choice is load-bearing: with it, the extrinsic operators
//! of a hypersurface whose induced metric is Riemannian collapse to their
//! classical values (the vertical term reproduces the difference between
//! Γ* and the y-independent derivative of the spray), so round spheres come
//! out exactly umbilic with unit mean curvature even when the ambient
//! metric is genuinely asymmetric. The mean-curvature field is
//! differentiated with v held parameter-constant — a curve whose δy is
//! J̇·v + N·X — which is the convention [`normal_parallelism_residual`]
//! documents and tests.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::connection::ElementJets;
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::linalg::{jet_sq_norm, norm, Tensor3};
use crate::metric::{
    complete_frame, fundamental_tensor, generator_matrices, gram_schmidt, MetricKernel,
    MetricSpec, ReferenceElement, MIN_REFERENCE_NORM,
};

/// Largest g-norm of the "wrong" projection (normal part of a tangent
/// input, tangential part of a normal input) before the input is rejected.
pub const PROJECTION_TOL: f64 = 1e-8;

/// Chart map of an immersion: parameter jets in, ambient-coordinate jets
/// out. The map must accept any jet shape so that callers can choose how
/// many variables ride along.
pub type ChartMap = dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync;

// ─── immersions ─────────────────────────────────────────────────────────────

/// A parameterized submanifold u ↦ x(u) of an ambient Finsler space. The
/// differential must have full rank k at every evaluated parameter; rank is
/// checked whenever a Jacobian is formed.
#[derive(Clone)]
pub struct Immersion {
    pub ambient: MetricKernel,
    pub dim_sub: usize,
    kind: String,
    /// Anchor for orienting hypersurface normals: the first normal frame
    /// vector points away from this chart point (the center for spheres).
    orientation_center: Option<Vec<f64>>,
    map: Arc<ChartMap>,
}

impl fmt::Debug for Immersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Immersion")
            .field("kind", &self.kind)
            .field("dim_sub", &self.dim_sub)
            .field("ambient", &self.ambient.kind_name())
            .finish()
    }
}

impl Immersion {
    /// Sphere |x| = r about the chart origin, in inverse-stereographic
    /// parameterization (k = n − 1 parameters, missing one pole):
    /// x(u) = (2r²u, r(|u|² − r²)) / (r² + |u|²).
    pub fn sphere(ambient: MetricKernel, radius: f64) -> Immersion {
        let center = vec![0.0; ambient.dim()];
        Immersion::sphere_at(ambient, radius, center)
    }

    /// Sphere |x − center| = r, same parameterization.
    pub fn sphere_at(ambient: MetricKernel, radius: f64, center: Vec<f64>) -> Immersion {
        let n = ambient.dim();
        assert!(n >= 2, "a sphere needs an ambient dimension of at least 2");
        assert!(radius > 0.0, "sphere radius must be positive");
        assert_eq!(center.len(), n, "center length must match the ambient dimension");
        let r = radius;
        let c = center.clone();
        let map = move |u: &[Jet]| -> Result<Vec<Jet>> {
            let d_inv = jet_sq_norm(u).plus(r * r).recip()?;
            let mut out = Vec::with_capacity(u.len() + 1);
            for (a, ua) in u.iter().enumerate() {
                out.push((&ua.scale(2.0 * r * r) * &d_inv).plus(c[a]));
            }
            let last = &jet_sq_norm(u).plus(-r * r).scale(r) * &d_inv;
            out.push(last.plus(c[u.len()]));
            Ok(out)
        };
        Immersion {
            ambient,
            dim_sub: n - 1,
            kind: "sphere".into(),
            orientation_center: Some(center),
            map: Arc::new(map),
        }
    }

    /// Affine plane x(u) = origin + Σ uᵃ·basisᵃ.
    pub fn plane(ambient: MetricKernel, origin: Vec<f64>, basis: Vec<Vec<f64>>) -> Immersion {
        let n = ambient.dim();
        let k = basis.len();
        assert!(k >= 1 && k < n, "a plane needs 1 ≤ k < n basis vectors, got {k}");
        assert_eq!(origin.len(), n, "origin length must match the ambient dimension");
        assert!(
            basis.iter().all(|b| b.len() == n),
            "every basis vector must have the ambient dimension"
        );
        let map = move |u: &[Jet]| -> Result<Vec<Jet>> {
            let (nv, ord) = (u[0].num_vars(), u[0].order());
            let mut out = Vec::with_capacity(origin.len());
            for i in 0..origin.len() {
                let mut acc = Jet::constant(nv, ord, origin[i]);
                for (a, ua) in u.iter().enumerate() {
                    acc = &acc + &ua.scale(basis[a][i]);
                }
                out.push(acc);
            }
            Ok(out)
        };
        Immersion {
            ambient,
            dim_sub: k,
            kind: "plane".into(),
            orientation_center: None,
            map: Arc::new(map),
        }
    }

    /// Circular cylinder x₁² + x₂² = r² in a 3-dimensional ambient chart:
    /// x(u) = (r cos u₁, r sin u₁, u₂). The standard non-umbilic control.
    pub fn cylinder(ambient: MetricKernel, radius: f64) -> Immersion {
        assert_eq!(ambient.dim(), 3, "the cylinder immersion lives in dimension 3");
        assert!(radius > 0.0, "cylinder radius must be positive");
        let r = radius;
        let map = move |u: &[Jet]| -> Result<Vec<Jet>> {
            Ok(vec![u[0].cos().scale(r), u[0].sin().scale(r), u[1].clone()])
        };
        Immersion {
            ambient,
            dim_sub: 2,
            kind: "cylinder".into(),
            orientation_center: None,
            map: Arc::new(map),
        }
    }

    /// Immersion from an arbitrary chart map.
    pub fn custom(
        ambient: MetricKernel,
        dim_sub: usize,
        name: impl Into<String>,
        map: Arc<ChartMap>,
    ) -> Immersion {
        assert!(
            dim_sub >= 1 && dim_sub < ambient.dim(),
            "dim_sub must satisfy 1 ≤ k < n"
        );
        Immersion { ambient, dim_sub, kind: name.into(), orientation_center: None, map }
    }

    pub fn kind_name(&self) -> &str {
        &self.kind
    }

    /// Evaluate the chart map on caller-built parameter jets.
    pub fn chart_jets(&self, u_jets: &[Jet]) -> Result<Vec<Jet>> {
        if u_jets.len() != self.dim_sub {
            return Err(Error::Dimension { expected: self.dim_sub, got: u_jets.len() });
        }
        let x = (self.map)(u_jets)?;
        if x.len() != self.ambient.dim() {
            return Err(Error::Dimension { expected: self.ambient.dim(), got: x.len() });
        }
        Ok(x)
    }

    /// Chart jets in the k parameter variables, expanded at `u`.
    pub fn chart(&self, u: &[f64], order: usize) -> Result<Vec<Jet>> {
        if u.len() != self.dim_sub {
            return Err(Error::Dimension { expected: self.dim_sub, got: u.len() });
        }
        self.chart_jets(&Jet::variables(self.dim_sub, order, u))
    }

    /// Ambient position x(u).
    pub fn position(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(self.chart(u, 0)?.iter().map(Jet::value).collect())
    }

    /// Differential dx at `u` as an n×k matrix, with the rank-k immersion
    /// condition enforced.
    pub fn jacobian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let x = self.chart(u, 1)?;
        let (n, k) = (self.ambient.dim(), self.dim_sub);
        let jac = DMatrix::from_fn(n, k, |i, a| x[i].derivative(a).value());
        if jac.clone().rank(1e-10) < k {
            return Err(Error::RankDeficient);
        }
        Ok(jac)
    }
}

// ─── reference elements on the submanifold ──────────────────────────────────

/// A parameter point with a tangent parameter direction, plus the derived
/// ambient element z = (x(u), dx(v)) at which ambient tensors are read.
#[derive(Clone, Debug)]
pub struct SubReferenceElement {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub z: ReferenceElement,
    /// dx at u (n×k), columns J_a = ∂x/∂uᵃ.
    pub jacobian: DMatrix<f64>,
}

impl SubReferenceElement {
    pub fn new(imm: &Immersion, u: Vec<f64>, v: Vec<f64>) -> Result<SubReferenceElement> {
        let k = imm.dim_sub;
        if u.len() != k {
            return Err(Error::Dimension { expected: k, got: u.len() });
        }
        if v.len() != k {
            return Err(Error::Dimension { expected: k, got: v.len() });
        }
        if norm(&v) < MIN_REFERENCE_NORM {
            return Err(Error::OutOfDomain(format!(
                "parameter direction norm {:.3e} below {MIN_REFERENCE_NORM:.0e}",
                norm(&v)
            )));
        }
        let jacobian = imm.jacobian(&u)?;
        let x = imm.position(&u)?;
        let y = (&jacobian * DVector::from_column_slice(&v)).iter().copied().collect();
        let z = ReferenceElement::new(&imm.ambient, x, y)?;
        Ok(SubReferenceElement { u, v, z, jacobian })
    }
}

// ─── induced metric ──────────────────────────────────────────────────────────

/// Fundamental tensor of the pulled-back structure F̄(u, v) = F(x(u), dx(v))
/// on the parameter chart, evaluated at (u, v).
#[derive(Clone, Debug)]
pub struct InducedMetric {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Pulled-back one-form β̄_a = β(x(u))[J_a] when the ambient kernel is
    /// of Randers type; `None` otherwise.
    pub beta_bar: Option<Vec<f64>>,
}

pub fn induced_metric(imm: &Immersion, u: &[f64], v: &[f64]) -> Result<InducedMetric> {
    let sub_z = SubReferenceElement::new(imm, u.to_vec(), v.to_vec())?;
    let (n, k) = (imm.ambient.dim(), imm.dim_sub);

    // Lift F̄² in 2k variables (u block, then v block): two v-derivatives
    // of the composite give ḡ, so the chart rides at order 3 and drops to
    // 2 through the differential.
    let point: Vec<f64> = u.iter().chain(v.iter()).copied().collect();
    let vars = Jet::variables(2 * k, 3, &point);
    let x = (imm.map)(&vars[..k])?;
    let xt: Vec<Jet> = x.iter().map(|c| c.truncated(2)).collect();
    let mut y = vec![Jet::constant(2 * k, 2, 0.0); n];
    for a in 0..k {
        let va = vars[k + a].truncated(2);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = &*yi + &(&va * &x[i].derivative(a));
        }
    }
    let f2 = imm.ambient.f_squared_jets(&xt, &y)?;
    let (g, g_inv) = generator_matrices(&f2, k)?;

    let beta_bar = match &imm.ambient {
        MetricKernel::RandersExample { b, .. } => {
            let pos = &sub_z.z.x;
            let scale = b / norm(pos);
            let bb = (0..k)
                .map(|a| scale * (0..n).map(|i| pos[i] * sub_z.jacobian[(i, a)]).sum::<f64>())
                .collect();
            Some(bb)
        }
        _ => None,
    };
    Ok(InducedMetric { g, g_inv, u: u.to_vec(), v: v.to_vec(), beta_bar })
}

// ─── tangent / normal splitting ──────────────────────────────────────────────

/// g_z-orthonormal frames spanning the tangent space dx(T_uS) and its
/// g_z-orthogonal complement.
#[derive(Clone, Debug)]
pub struct SplitFrame {
    pub tangent: Vec<Vec<f64>>,
    pub normal: Vec<Vec<f64>>,
}

pub fn split_frame(imm: &Immersion, sub_z: &SubReferenceElement) -> Result<SplitFrame> {
    let ft = fundamental_tensor(&imm.ambient, &sub_z.z)?;
    split_frame_from(imm, sub_z, &ft.g)
}

fn split_frame_from(
    imm: &Immersion,
    sub_z: &SubReferenceElement,
    g: &DMatrix<f64>,
) -> Result<SplitFrame> {
    let (n, k) = (imm.ambient.dim(), imm.dim_sub);
    let cols: Vec<Vec<f64>> =
        (0..k).map(|a| (0..n).map(|i| sub_z.jacobian[(i, a)]).collect()).collect();
    let tangent = gram_schmidt(g, &cols)?;
    let mut normal = complete_frame(g, &tangent)?;
    if normal.len() == 1 {
        // Hypersurface orientation: point the normal away from the anchor.
        let anchor: Vec<f64> = match &imm.orientation_center {
            Some(c) => sub_z.z.x.iter().zip(c).map(|(xi, ci)| xi - ci).collect(),
            None => sub_z.z.x.clone(),
        };
        let mut inner = 0.0;
        for i in 0..n {
            for j in 0..n {
                inner += normal[0][i] * g[(i, j)] * anchor[j];
            }
        }
        if inner < 0.0 {
            for e in &mut normal[0] {
                *e = -*e;
            }
        }
    }
    Ok(SplitFrame { tangent, normal })
}

// ─── the geometry cache behind the extrinsic operators ──────────────────────

/// Everything the extrinsic operators need at one sub-element, computed from
/// a single order-4 generator lift plus one order-2 chart lift: the ambient
/// tensors g, ∂g, Γ*, N at z, the chart differential and Hessian at u, and
/// the split frame.
struct SubGeometry {
    n: usize,
    k: usize,
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    dg_dx: Vec<DMatrix<f64>>,
    dg_dy: Vec<DMatrix<f64>>,
    gamma: Tensor3,
    nonlinear: DMatrix<f64>,
    jac: DMatrix<f64>,
    /// hess[i][(a, b)] = ∂²xⁱ/∂uᵃ∂uᵇ.
    hess: Vec<DMatrix<f64>>,
    gbar_inv: DMatrix<f64>,
    frame: SplitFrame,
}

impl SubGeometry {
    fn new(imm: &Immersion, sub_z: &SubReferenceElement) -> Result<SubGeometry> {
        let (n, k) = (imm.ambient.dim(), imm.dim_sub);
        let e = ElementJets::new(&imm.ambient, &sub_z.z.x, &sub_z.z.y, 4)?;
        let g = DMatrix::from_fn(n, n, |i, j| e.g[i][j].value());
        let g_inv = DMatrix::from_fn(n, n, |i, j| e.g_inv[i][j].value());
        let dg_dx: Vec<DMatrix<f64>> = (0..n)
            .map(|m| DMatrix::from_fn(n, n, |i, j| e.g[i][j].derivative(m).value()))
            .collect();
        let dg_dy: Vec<DMatrix<f64>> = (0..n)
            .map(|m| DMatrix::from_fn(n, n, |i, j| e.g[i][j].derivative(n + m).value()))
            .collect();
        let gamma = e.connection()?.gamma_values();
        let nj = e.nonlinear_jets();
        let nonlinear = DMatrix::from_fn(n, n, |i, j| nj[i][j].value());

        let x = imm.chart(&sub_z.u, 2)?;
        let hess: Vec<DMatrix<f64>> = (0..n)
            .map(|i| DMatrix::from_fn(k, k, |a, b| x[i].derivative(a).derivative(b).value()))
            .collect();
        let jac = sub_z.jacobian.clone();
        let gbar = jac.transpose() * &g * &jac;
        let gbar_inv = Cholesky::new(gbar).ok_or(Error::RankDeficient)?.inverse();
        let frame = split_frame_from(imm, sub_z, &g)?;
        Ok(SubGeometry {
            n,
            k,
            g,
            g_inv,
            dg_dx,
            dg_dy,
            gamma,
            nonlinear,
            jac,
            hess,
            gbar_inv,
            frame,
        })
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += a[i] * self.g[(i, j)] * b[j];
            }
        }
        acc
    }

    fn g_norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// Parameter components ξ of a tangent vector t = Σ ξᵃ J_a, by solving
    /// the normal equations of the g-orthogonal projection.
    fn param_coords(&self, t: &[f64]) -> Vec<f64> {
        let rhs = self.jac.transpose() * &self.g * DVector::from_column_slice(t);
        (&self.gbar_inv * rhs).iter().copied().collect()
    }

    /// g-orthogonal projection onto the tangent space, J ḡ⁻¹ Jᵀ g w.
    fn tangential(&self, w: &[f64]) -> Vec<f64> {
        let coords = DVector::from_column_slice(&self.param_coords(w));
        (&self.jac * coords).iter().copied().collect()
    }

    fn normal(&self, w: &[f64]) -> Vec<f64> {
        let t = self.tangential(w);
        w.iter().zip(&t).map(|(wi, ti)| wi - ti).collect()
    }

    /// (Γ* a b)ⁱ = Γ*ⁱ_jk aʲ bᵏ.
    fn gamma_apply(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..self.n {
                for m in 0..self.n {
                    acc += self.gamma[(i, j, m)] * a[j] * b[m];
                }
            }
            *slot = acc;
        }
        out
    }

    /// Vertical connection term (C♯ a d)ⁱ = gⁱˡ C_ljm aʲ dᵐ, with
    /// C_ljm = ½ ∂g_lj/∂yᵐ; d is the covariant velocity δy of the
    /// reference element along the differentiation direction.
    fn cartan_vertical(&self, a: &[f64], d: &[f64]) -> Vec<f64> {
        let av = DVector::from_column_slice(a);
        let mut low = DVector::zeros(self.n);
        for m in 0..self.n {
            if d[m] != 0.0 {
                low += &self.dg_dy[m] * &av * (0.5 * d[m]);
            }
        }
        (&self.g_inv * low).iter().copied().collect()
    }

    /// Covariant velocity of the reference element along a tangent
    /// direction: δy = −N·X, the transport that makes the extrinsic
    /// operators reduce to their classical values whenever the induced
    /// metric is Riemannian.
    fn reference_velocity(&self, x_vec: &[f64]) -> Vec<f64> {
        (-(&self.nonlinear * DVector::from_column_slice(x_vec))).iter().copied().collect()
    }

    fn require_tangent(&self, v: &[f64]) -> Result<()> {
        let magnitude = self.g_norm(&self.normal(v));
        if magnitude > PROJECTION_TOL {
            return Err(Error::NotTangent { magnitude });
        }
        Ok(())
    }

    /// Pre-projection covariant derivative ∇_X Ŷ of the parameter-constant
    /// tangent extension of Y along X: H(ξ, c) + Γ*(Y, X) + C♯(Y, −N·X),
    /// with ξ, c the parameter components of X, Y.
    fn covariant_of_tangent_extension(&self, x_vec: &[f64], y_vec: &[f64]) -> Vec<f64> {
        let xi = DVector::from_column_slice(&self.param_coords(x_vec));
        let c = DVector::from_column_slice(&self.param_coords(y_vec));
        let mut d = self.gamma_apply(y_vec, x_vec);
        let vert = self.cartan_vertical(y_vec, &self.reference_velocity(x_vec));
        for i in 0..self.n {
            d[i] += (xi.transpose() * &self.hess[i] * &c)[(0, 0)] + vert[i];
        }
        d
    }

    /// Second fundamental form α(X, Y): normal part of ∇_X Ŷ.
    fn alpha(&self, x_vec: &[f64], y_vec: &[f64]) -> Result<Vec<f64>> {
        self.require_tangent(x_vec)?;
        self.require_tangent(y_vec)?;
        Ok(self.normal(&self.covariant_of_tangent_extension(x_vec, y_vec)))
    }

    /// Mean curvature η = (1/k) tr_ḡ α, assembled frame-free as
    /// (1/k)·Nproj(ḡᵃᵇ (H_ab + Γ*(J_b, J_a) + C♯(J_b, −N·J_a))).
    fn eta(&self) -> Vec<f64> {
        let cols: Vec<Vec<f64>> = (0..self.k)
            .map(|a| (0..self.n).map(|i| self.jac[(i, a)]).collect())
            .collect();
        let mut acc = vec![0.0; self.n];
        for a in 0..self.k {
            let delta_y = self.reference_velocity(&cols[a]);
            for b in 0..self.k {
                let w = self.gbar_inv[(a, b)];
                let corr = self.gamma_apply(&cols[b], &cols[a]);
                let vert = self.cartan_vertical(&cols[b], &delta_y);
                for i in 0..self.n {
                    acc[i] += w * (self.hess[i][(a, b)] + corr[i] + vert[i]);
                }
            }
        }
        let mut eta = self.normal(&acc);
        for e in &mut eta {
            *e /= self.k as f64;
        }
        eta
    }

    /// Shape operator of the normal vector w on the tangent frame:
    /// entry (j, i) = g(A_w tᵢ, tⱼ). The extension Ŵ(s) re-projects w onto
    /// the normal space along the parameter line through tᵢ while the
    /// reference element rides with covariant velocity δy = −N·tᵢ (chart
    /// velocity ẏ = δy − N·ẋ = −2N·tᵢ).
    fn shape(&self, w: &[f64]) -> Result<DMatrix<f64>> {
        let magnitude = self.g_norm(&self.tangential(w));
        if magnitude > PROJECTION_TOL {
            return Err(Error::NotNormal { magnitude });
        }
        let w0 = DVector::from_column_slice(&self.normal(w));
        let w0_slice: Vec<f64> = w0.iter().copied().collect();
        let jt = self.jac.transpose();
        let mut out = DMatrix::zeros(self.k, self.k);
        for i in 0..self.k {
            let ti = &self.frame.tangent[i];
            let xi = self.param_coords(ti);
            let delta_y = self.reference_velocity(ti);

            // First-order data along u(s) = u + s·ξ.
            let jdot = DMatrix::from_fn(self.n, self.k, |p, a| {
                (0..self.k).map(|b| self.hess[p][(a, b)] * xi[b]).sum::<f64>()
            });
            let ydot: Vec<f64> = delta_y.iter().map(|d| 2.0 * d).collect();
            let mut gdot = DMatrix::zeros(self.n, self.n);
            for m in 0..self.n {
                gdot += &self.dg_dx[m] * ti[m] + &self.dg_dy[m] * ydot[m];
            }

            // Ŵ(s) = (I − M(s))·w with M = J ḡ⁻¹ Jᵀ g, differentiated by
            // the product rule; Ŵ′(0) = −Ṁ·w.
            let gbar_dot =
                jdot.transpose() * &self.g * &self.jac + &jt * &gdot * &self.jac + &jt * &self.g * &jdot;
            let gbar_inv_dot = -(&self.gbar_inv * gbar_dot * &self.gbar_inv);
            let m_dot = &jdot * &self.gbar_inv * &jt * &self.g
                + &self.jac * gbar_inv_dot * &jt * &self.g
                + &self.jac * &self.gbar_inv * jdot.transpose() * &self.g
                + &self.jac * &self.gbar_inv * &jt * &gdot;
            let wdot = -(m_dot * &w0);

            let corr = self.gamma_apply(&w0_slice, ti);
            let vert = self.cartan_vertical(&w0_slice, &delta_y);
            let nabla: Vec<f64> = (0..self.n).map(|p| wdot[p] + corr[p] + vert[p]).collect();
            let a_ti: Vec<f64> = self.tangential(&nabla).iter().map(|v| -v).collect();
            for j in 0..self.k {
                out[(j, i)] = self.inner(&a_ti, &self.frame.tangent[j]);
            }
        }
        Ok(out)
    }
}

// ─── extrinsic operators ─────────────────────────────────────────────────────

/// Second fundamental form α(X, Y): the g_z-normal part of the ambient
/// covariant derivative of a tangent extension of Y along X (horizontal
/// coefficients plus the vertical term of the reference transport).
/// Symmetric and tensorial; the extension drops out because any two tangent
/// extensions differ by a tangent field, whose contribution the normal
/// projection kills.
pub fn second_fundamental_form(
    imm: &Immersion,
    sub_z: &SubReferenceElement,
    x_vec: &[f64],
    y_vec: &[f64],
) -> Result<Vec<f64>> {
    let n = imm.ambient.dim();
    if x_vec.len() != n {
        return Err(Error::Dimension { expected: n, got: x_vec.len() });
    }
    if y_vec.len() != n {
        return Err(Error::Dimension { expected: n, got: y_vec.len() });
    }
    SubGeometry::new(imm, sub_z)?.alpha(x_vec, y_vec)
}

/// Shape operator A_W on the tangent frame, entry (j, i) = g(A_W tᵢ, tⱼ).
/// Satisfies the duality g(α(tᵢ, tⱼ), W) = g(A_W tᵢ, tⱼ).
pub fn shape_operator(
    imm: &Immersion,
    sub_z: &SubReferenceElement,
    w: &[f64],
) -> Result<DMatrix<f64>> {
    let n = imm.ambient.dim();
    if w.len() != n {
        return Err(Error::Dimension { expected: n, got: w.len() });
    }
    SubGeometry::new(imm, sub_z)?.shape(w)
}

/// Mean curvature vector η = (1/k)·Σᵢ α(tᵢ, tᵢ) over a g_z-orthonormal
/// tangent frame; normalized by the submanifold dimension so a Euclidean
/// r-sphere has ‖η‖ = 1/r in any codimension.
pub fn mean_curvature(imm: &Immersion, sub_z: &SubReferenceElement) -> Result<Vec<f64>> {
    Ok(SubGeometry::new(imm, sub_z)?.eta())
}

/// Max over orthonormal tangent pairs of ‖α(tᵢ, tⱼ) − δ_ij·η‖_g. Zero
/// exactly on totally umbilical submanifolds.
pub fn umbilicity_residual(imm: &Immersion, sub_z: &SubReferenceElement) -> Result<f64> {
    let geo = SubGeometry::new(imm, sub_z)?;
    let eta = geo.eta();
    let mut worst = 0.0f64;
    for i in 0..geo.k {
        for j in i..geo.k {
            let a = geo.alpha(&geo.frame.tangent[i], &geo.frame.tangent[j])?;
            let diff: Vec<f64> = if i == j {
                a.iter().zip(&eta).map(|(ai, ei)| ai - ei).collect()
            } else {
                a
            };
            worst = worst.max(geo.g_norm(&diff));
        }
    }
    Ok(worst)
}

/// Max over the tangent frame of ‖∇̄⊥_tᵢ η‖_g, where η is extended along the
/// parameter chart with the reference direction's parameter components held
/// constant, differentiated by Richardson-extrapolated central differences,
/// and corrected by Γ* and the vertical term of that curve (whose reference
/// element has covariant velocity δy = J̇·v + N·tᵢ) before the normal
/// projection.
pub fn normal_parallelism_residual(imm: &Immersion, sub_z: &SubReferenceElement) -> Result<f64> {
    let geo = SubGeometry::new(imm, sub_z)?;
    let eta0 = geo.eta();
    let h = 1e-3;
    let mut worst = 0.0f64;
    for ti in &geo.frame.tangent {
        let xi = geo.param_coords(ti);
        let eta_at = |s: f64| -> Result<Vec<f64>> {
            let us: Vec<f64> = sub_z.u.iter().zip(&xi).map(|(u0, d)| u0 + s * d).collect();
            let sz = SubReferenceElement::new(imm, us, sub_z.v.clone())?;
            Ok(SubGeometry::new(imm, &sz)?.eta())
        };
        let coarse = central_difference(&eta_at, h)?;
        let fine = central_difference(&eta_at, h / 2.0)?;
        let mut delta_y: Vec<f64> = (0..geo.n)
            .map(|p| {
                (0..geo.k)
                    .map(|a| {
                        (0..geo.k)
                            .map(|b| geo.hess[p][(a, b)] * sub_z.v[a] * xi[b])
                            .sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .collect();
        let n_ti = &geo.nonlinear * DVector::from_column_slice(ti);
        for (d, nv) in delta_y.iter_mut().zip(n_ti.iter()) {
            *d += nv;
        }
        let corr = geo.gamma_apply(&eta0, ti);
        let vert = geo.cartan_vertical(&eta0, &delta_y);
        let nabla: Vec<f64> = (0..geo.n)
            .map(|p| (4.0 * fine[p] - coarse[p]) / 3.0 + corr[p] + vert[p])
            .collect();
        worst = worst.max(geo.g_norm(&geo.normal(&nabla)));
    }
    Ok(worst)
}

fn central_difference<F>(f: &F, h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let plus = f(h)?;
    let minus = f(-h)?;
    Ok(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect())
}

// ─── JSON immersion specs ────────────────────────────────────────────────────

/// Serialized form of an immersion:
/// `{"kind": ..., "params": {...}, "ambient": metric-spec}`.
/// Custom chart-map callbacks are API-only and have no JSON form; the
/// `custom-polynomial` kind covers arbitrary polynomial charts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImmersionSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "ImmersionParams::is_empty")]
    pub params: ImmersionParams,
    pub ambient: MetricSpec,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImmersionParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_sub: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<PolyTerm>>>,
}

/// One monomial of a polynomial chart component: coeff · Π uᵃ^powers[a].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub coeff: f64,
    pub powers: Vec<usize>,
}

impl ImmersionParams {
    pub fn is_empty(&self) -> bool {
        self.radius.is_none()
            && self.center.is_none()
            && self.origin.is_none()
            && self.basis.is_none()
            && self.dim_sub.is_none()
            && self.components.is_none()
    }
}

impl ImmersionSpec {
    pub fn from_json(text: &str) -> Result<ImmersionSpec> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_immersion(&self) -> Result<Immersion> {
        let ambient = self.ambient.to_kernel()?;
        let n = ambient.dim();
        match self.kind.as_str() {
            "sphere" => {
                let r = self
                    .params
                    .radius
                    .ok_or_else(|| Error::Spec("kind \"sphere\" needs params.radius".into()))?;
                if r <= 0.0 {
                    return Err(Error::Spec(format!("params.radius must be positive, got {r}")));
                }
                let center = self.params.center.clone().unwrap_or_else(|| vec![0.0; n]);
                if center.len() != n {
                    return Err(Error::Spec(format!(
                        "params.center has {} entries but the ambient dim = {n}",
                        center.len()
                    )));
                }
                Ok(Immersion::sphere_at(ambient, r, center))
            }
            "plane" => {
                let origin = self
                    .params
                    .origin
                    .clone()
                    .ok_or_else(|| Error::Spec("kind \"plane\" needs params.origin".into()))?;
                let basis = self
                    .params
                    .basis
                    .clone()
                    .ok_or_else(|| Error::Spec("kind \"plane\" needs params.basis".into()))?;
                if origin.len() != n {
                    return Err(Error::Spec(format!(
                        "params.origin has {} entries but the ambient dim = {n}",
                        origin.len()
                    )));
                }
                if basis.is_empty() || basis.len() >= n {
                    return Err(Error::Spec(format!(
                        "params.basis needs 1 ≤ k < {n} vectors, got {}",
                        basis.len()
                    )));
                }
                if basis.iter().any(|b| b.len() != n) {
                    return Err(Error::Spec(
                        "every params.basis vector needs the ambient dimension".into(),
                    ));
                }
                Ok(Immersion::plane(ambient, origin, basis))
            }
            "cylinder" => {
                let r = self
                    .params
                    .radius
                    .ok_or_else(|| Error::Spec("kind \"cylinder\" needs params.radius".into()))?;
                if r <= 0.0 {
                    return Err(Error::Spec(format!("params.radius must be positive, got {r}")));
                }
                if n != 3 {
                    return Err(Error::Spec(format!(
                        "kind \"cylinder\" needs a 3-dimensional ambient, got {n}"
                    )));
                }
                Ok(Immersion::cylinder(ambient, r))
            }
            "custom-polynomial" => {
                let k = self.params.dim_sub.ok_or_else(|| {
                    Error::Spec("kind \"custom-polynomial\" needs params.dim_sub".into())
                })?;
                let components = self.params.components.clone().ok_or_else(|| {
                    Error::Spec("kind \"custom-polynomial\" needs params.components".into())
                })?;
                if k == 0 || k >= n {
                    return Err(Error::Spec(format!(
                        "params.dim_sub needs 1 ≤ k < {n}, got {k}"
                    )));
                }
                if components.len() != n {
                    return Err(Error::Spec(format!(
                        "params.components has {} entries but the ambient dim = {n}",
                        components.len()
                    )));
                }
                for comp in &components {
                    if comp.iter().any(|t| t.powers.len() != k) {
                        return Err(Error::Spec(format!(
                            "every term's powers list needs dim_sub = {k} entries"
                        )));
                    }
                }
                Ok(Immersion::custom(ambient, k, "custom-polynomial", polynomial_map(components)))
            }
            other => Err(Error::Spec(format!(
                "unknown immersion kind \"{other}\" (expected sphere, plane, cylinder, or \
                 custom-polynomial)"
            ))),
        }
    }
}

fn polynomial_map(components: Vec<Vec<PolyTerm>>) -> Arc<ChartMap> {
    Arc::new(move |u: &[Jet]| {
        let (nv, ord) = (u[0].num_vars(), u[0].order());
        let mut out = Vec::with_capacity(components.len());
        for comp in &components {
            let mut acc = Jet::constant(nv, ord, 0.0);
            for term in comp {
                let mut t = Jet::constant(nv, ord, term.coeff);
                for (a, &p) in term.powers.iter().enumerate() {
                    if p > 0 {
                        t = &t * &u[a].powi(p as i32)?;
                    }
                }
                acc = &acc + &t;
            }
            out.push(acc);
        }
        Ok(out)
    })
}
