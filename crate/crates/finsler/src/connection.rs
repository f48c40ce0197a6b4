//! Geodesic spray, nonlinear connection, horizontal Cartan coefficients, and
//! transport along geodesics.
//!
//! Every quantity is evaluated at a single reference element (x, y); the
//! crate never interpolates tensors between elements. One jet expansion of
//! F² in the 2n chart-and-direction variables feeds the whole pipeline, so
//! each derivative below is exact — the only discretization anywhere is the
//! fixed-step geodesic integrator.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::linalg::{jet_matrix_inverse, norm, Tensor3};
use crate::metric::{MetricKernel, ReferenceElement, MIN_REFERENCE_NORM};

// ─── jet pipeline at one element ───────────────────────────────────────────

/// Jets of g, g⁻¹, and the spray around one element, in 2n variables (x
/// first, then y). A lift of F² at order k leaves g and G at jet order
/// k − 2: k = 2 serves plain spray values, k = 3 adds the nonlinear
/// connection and Γ*, and k = 4 keeps one order in hand for the horizontal
/// derivatives of Γ* that curvature needs.
pub(crate) struct ElementJets {
    pub n: usize,
    pub y: Vec<f64>,
    pub f2: Jet,
    pub g: Vec<Vec<Jet>>,
    pub g_inv: Vec<Vec<Jet>>,
    pub spray: Vec<Jet>,
}

impl ElementJets {
    pub(crate) fn new(
        kernel: &MetricKernel,
        x: &[f64],
        y: &[f64],
        order: usize,
    ) -> Result<ElementJets> {
        debug_assert!(order >= 2, "spray extraction needs a second-order lift");
        let n = kernel.dim();
        let f2 = kernel.lift_f_squared(x, y, order)?;
        let gk = order - 2;
        // ∂F²/∂yⁱ, then g_ij = ½ ∂²F²/∂yⁱ∂yʲ.
        let dy: Vec<Jet> = (0..n).map(|i| f2.derivative(n + i)).collect();
        let g: Vec<Vec<Jet>> = (0..n)
            .map(|i| (0..n).map(|j| dy[i].derivative(n + j).scale(0.5)).collect())
            .collect();
        let g_inv = jet_matrix_inverse(&g)?;
        // Gⁱ = ¼ gⁱˡ (yᵏ ∂²F²/∂yˡ∂xᵏ − ∂F²/∂xˡ), with yᵏ entering as a jet
        // variable so that y-derivatives of G see it.
        let y_jets: Vec<Jet> = (0..n).map(|k| Jet::variable(2 * n, gk, n + k, y[k])).collect();
        let rhs: Vec<Jet> = (0..n)
            .map(|l| {
                let mut acc = f2.derivative(l).truncated(gk).scale(-1.0);
                for k in 0..n {
                    acc = &acc + &(&y_jets[k] * &dy[l].derivative(k));
                }
                acc
            })
            .collect();
        let spray: Vec<Jet> = (0..n)
            .map(|i| {
                let mut acc = Jet::constant(2 * n, gk, 0.0);
                for l in 0..n {
                    acc = &acc + &(&g_inv[i][l] * &rhs[l]);
                }
                acc.scale(0.25)
            })
            .collect();
        Ok(ElementJets { n, y: y.to_vec(), f2, g, g_inv, spray })
    }

    pub(crate) fn spray_values(&self) -> Vec<f64> {
        self.spray.iter().map(Jet::value).collect()
    }

    /// Nⁱ_j = ∂Gⁱ/∂yʲ, one jet order below the spray.
    pub(crate) fn nonlinear_jets(&self) -> Vec<Vec<Jet>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.spray[i].derivative(self.n + j)).collect())
            .collect()
    }

    /// Horizontal coefficients at order k − 3:
    /// Γ*ⁱ_jk = ½ gⁱˡ (δ_j g_lk + δ_k g_jl − δ_l g_jk), where the horizontal
    /// derivative of g is δ_j g_kl = ∂g_kl/∂xʲ − Nᵐ_j · 2C_klm with the
    /// Cartan tensor C_klm = ¼ ∂³F²/∂yᵏ∂yˡ∂yᵐ.
    pub(crate) fn connection(&self) -> Result<ConnectionJets> {
        let n = self.n;
        let nonlinear = self.nonlinear_jets();
        let ord = nonlinear[0][0].order();

        // C_ijk = ¼ ∂³F²/∂yⁱ∂yʲ∂yᵏ, fully symmetric.
        let mut cartan_lower = vec![vec![vec![Jet::constant(2 * n, ord, 0.0); n]; n]; n];
        for i in 0..n {
            let di = self.f2.derivative(n + i);
            for j in i..n {
                let dij = di.derivative(n + j);
                for k in j..n {
                    let c = dij.derivative(n + k).scale(0.25);
                    for (a, b, c_) in
                        [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]
                    {
                        cartan_lower[a][b][c_] = c.clone();
                    }
                }
            }
        }

        let g_inv_t: Vec<Vec<Jet>> = self
            .g_inv
            .iter()
            .map(|row| row.iter().map(|e| e.truncated(ord)).collect())
            .collect();

        // δ_j g_lk for all (j, l, k), l ≤ k mirrored.
        let mut delta_g = vec![vec![vec![Jet::constant(2 * n, ord, 0.0); n]; n]; n];
        for j in 0..n {
            for l in 0..n {
                for k in l..n {
                    let mut acc = self.g[l][k].derivative(j);
                    for m in 0..n {
                        acc = &acc - &(&nonlinear[m][j] * &cartan_lower[l][k][m]).scale(2.0);
                    }
                    delta_g[j][l][k] = acc.clone();
                    delta_g[j][k][l] = acc;
                }
            }
        }

        let zero = Jet::constant(2 * n, ord, 0.0);
        let mut gamma = vec![vec![vec![zero; n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let mut acc = Jet::constant(2 * n, ord, 0.0);
                    for l in 0..n {
                        let sum = &(&delta_g[j][l][k] + &delta_g[k][j][l]) - &delta_g[l][j][k];
                        acc = &acc + &(&g_inv_t[i][l] * &sum);
                    }
                    let acc = acc.scale(0.5);
                    gamma[i][j][k] = acc.clone();
                    gamma[i][k][j] = acc;
                }
            }
        }
        Ok(ConnectionJets { gamma })
    }
}

/// Γ* as jets, ready for value extraction or one more derivative.
pub(crate) struct ConnectionJets {
    pub gamma: Vec<Vec<Vec<Jet>>>,
}

impl ConnectionJets {
    pub(crate) fn gamma_values(&self) -> Tensor3 {
        let n = self.gamma.len();
        let mut out = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[(i, j, k)] = self.gamma[i][j][k].value();
                }
            }
        }
        out
    }
}

// ─── public element-level data ─────────────────────────────────────────────

/// Spray coefficients Gⁱ and nonlinear connection Nⁱ_j = ∂Gⁱ/∂yʲ at one
/// reference element. Geodesics solve ẍ = −2G(x, ẋ); N defines the
/// horizontal directions δ/δxʲ = ∂/∂xʲ − Nᵐ_j ∂/∂yᵐ.
#[derive(Clone, Debug)]
pub struct SprayData {
    pub coefficients: Vec<f64>,
    pub nonlinear: DMatrix<f64>,
    pub at: ReferenceElement,
}

/// Horizontal coefficients Γ*ⁱ_jk of the metric-compatible connection,
/// symmetric in the lower index pair by construction.
#[derive(Clone, Debug)]
pub struct CartanCoefficients {
    pub gamma: Tensor3,
    pub at: ReferenceElement,
}

pub fn spray(kernel: &MetricKernel, z: &ReferenceElement) -> Result<SprayData> {
    let e = ElementJets::new(kernel, &z.x, &z.y, 3)?;
    let nj = e.nonlinear_jets();
    let nonlinear = DMatrix::from_fn(e.n, e.n, |i, j| nj[i][j].value());
    Ok(SprayData { coefficients: e.spray_values(), nonlinear, at: z.clone() })
}

pub fn cartan_coefficients(kernel: &MetricKernel, z: &ReferenceElement) -> Result<CartanCoefficients> {
    let e = ElementJets::new(kernel, &z.x, &z.y, 3)?;
    let gamma = e.connection()?.gamma_values();
    Ok(CartanCoefficients { gamma, at: z.clone() })
}

/// Horizontal covariant derivative of a base vector field:
/// (∇_X Y)ⁱ = Xʲ ∂Yⁱ/∂xʲ + Γ*ⁱ_jk Xʲ Yᵏ, all coefficients held at `z`.
///
/// `y_field` gives the components of Y as jets in the n chart variables
/// (order ≥ 1), expanded at z.x.
pub fn covariant_derivative_h(
    kernel: &MetricKernel,
    z: &ReferenceElement,
    x_vec: &[f64],
    y_field: &[Jet],
) -> Result<Vec<f64>> {
    let n = kernel.dim();
    if x_vec.len() != n {
        return Err(Error::Dimension { expected: n, got: x_vec.len() });
    }
    if y_field.len() != n {
        return Err(Error::Dimension { expected: n, got: y_field.len() });
    }
    for comp in y_field {
        if comp.num_vars() != n {
            return Err(Error::Dimension { expected: n, got: comp.num_vars() });
        }
        if comp.order() < 1 {
            return Err(Error::DegreeExceedsOrder { degree: 1, order: comp.order() });
        }
    }
    let gamma = cartan_coefficients(kernel, z)?.gamma;
    let mut m = vec![0usize; n];
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..n {
            m.iter_mut().for_each(|e| *e = 0);
            m[j] = 1;
            acc += x_vec[j] * y_field[i].partial(&m)?;
            for k in 0..n {
                acc += gamma[(i, j, k)] * x_vec[j] * y_field[k].value();
            }
        }
        *slot = acc;
    }
    Ok(out)
}

// ─── geodesics and transport ───────────────────────────────────────────────

/// Discretized geodesic: node times, positions, and velocities.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

impl GeodesicPath {
    pub fn nodes(&self) -> usize {
        self.t.len()
    }

    pub fn endpoint(&self) -> (&[f64], &[f64]) {
        (self.x.last().unwrap(), self.y.last().unwrap())
    }
}

/// One classical Runge–Kutta step of ṡ = f(s); `f` may reject states that
/// leave the kernel domain.
fn rk4_step(f: &dyn Fn(&[f64]) -> Result<Vec<f64>>, s: &[f64], h: f64) -> Result<Vec<f64>> {
    let k1 = f(s)?;
    let s2: Vec<f64> = s.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
    let k2 = f(&s2)?;
    let s3: Vec<f64> = s.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
    let k3 = f(&s3)?;
    let s4: Vec<f64> = s.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
    let k4 = f(&s4)?;
    Ok(s.iter()
        .enumerate()
        .map(|(i, a)| a + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Fold evaluation failures mid-path into a domain exit at the offending
/// time; structural errors keep their identity.
fn domain_exit(e: Error, t: f64) -> Error {
    match e {
        Error::OutOfDomain(_)
        | Error::NotPositiveDefinite { .. }
        | Error::BadFunctionDomain { .. }
        | Error::DivisionByZeroJet
        | Error::SingularMatrix { .. } => Error::DomainExit { t },
        other => other,
    }
}

/// Integrate ẍⁱ = −2Gⁱ(x, ẋ) from (x0, y0) over [0, t_end] with a fixed-step
/// 4th-order scheme. F(x, ẋ) is a first integral; the integrator's only
/// drift is the O(h⁴) truncation error.
pub fn integrate_geodesic(
    kernel: &MetricKernel,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<GeodesicPath> {
    if steps < 16 {
        return Err(Error::Spec(format!("geodesic integration needs >= 16 steps, got {steps}")));
    }
    if !(t_end > 0.0) {
        return Err(Error::Spec(format!("t_end must be positive, got {t_end}")));
    }
    ReferenceElement::new(kernel, x0.to_vec(), y0.to_vec())?;
    let n = kernel.dim();
    let h = t_end / steps as f64;
    let rhs = |s: &[f64]| -> Result<Vec<f64>> {
        let (x, y) = s.split_at(n);
        if norm(y) < MIN_REFERENCE_NORM {
            return Err(Error::OutOfDomain("velocity collapsed to zero".into()));
        }
        kernel.check_domain(x, y)?;
        let accel = ElementJets::new(kernel, x, y, 2)?.spray_values();
        let mut ds = y.to_vec();
        ds.extend(accel.iter().map(|g| -2.0 * g));
        Ok(ds)
    };
    let mut state: Vec<f64> = x0.iter().chain(y0.iter()).copied().collect();
    let mut path = GeodesicPath {
        t: vec![0.0],
        x: vec![x0.to_vec()],
        y: vec![y0.to_vec()],
    };
    for step in 0..steps {
        let t0 = step as f64 * h;
        state = rk4_step(&rhs, &state, h).map_err(|e| domain_exit(e, t0))?;
        let (x, y) = state.split_at(n);
        kernel.check_domain(x, y).map_err(|e| domain_exit(e, t0 + h))?;
        path.t.push((step + 1) as f64 * h);
        path.x.push(x.to_vec());
        path.y.push(y.to_vec());
    }
    Ok(path)
}

/// Transport `v0` along a geodesic: solves V̇ⁱ + Γ*ⁱ_jk(x, ẋ) ẋʲ Vᵏ = 0 with
/// the reference direction pinned to the velocity. The geodesic is
/// re-integrated jointly with V on the path's own step grid, so the returned
/// field aligns with `path` node for node; g_(x,ẋ)(V, V) is conserved up to
/// integrator truncation.
pub fn parallel_transport(
    kernel: &MetricKernel,
    path: &GeodesicPath,
    v0: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n = kernel.dim();
    if v0.len() != n {
        return Err(Error::Dimension { expected: n, got: v0.len() });
    }
    if path.nodes() < 2 {
        return Err(Error::Spec("transport needs a path with at least two nodes".into()));
    }
    let steps = path.nodes() - 1;
    let h = (path.t[steps] - path.t[0]) / steps as f64;
    let rhs = |s: &[f64]| -> Result<Vec<f64>> {
        let x = &s[..n];
        let y = &s[n..2 * n];
        let v = &s[2 * n..];
        if norm(y) < MIN_REFERENCE_NORM {
            return Err(Error::OutOfDomain("velocity collapsed to zero".into()));
        }
        kernel.check_domain(x, y)?;
        let e = ElementJets::new(kernel, x, y, 3)?;
        let gamma = e.connection()?.gamma_values();
        let mut ds = y.to_vec();
        ds.extend(e.spray_values().iter().map(|g| -2.0 * g));
        for i in 0..n {
            let mut dv = 0.0;
            for j in 0..n {
                for k in 0..n {
                    dv -= gamma[(i, j, k)] * y[j] * v[k];
                }
            }
            ds.push(dv);
        }
        Ok(ds)
    };
    let mut state: Vec<f64> = path.x[0]
        .iter()
        .chain(path.y[0].iter())
        .chain(v0.iter())
        .copied()
        .collect();
    let mut out = vec![v0.to_vec()];
    for step in 0..steps {
        let t0 = path.t[0] + step as f64 * h;
        state = rk4_step(&rhs, &state, h).map_err(|e| domain_exit(e, t0))?;
        out.push(state[2 * n..].to_vec());
    }
    Ok(out)
}
