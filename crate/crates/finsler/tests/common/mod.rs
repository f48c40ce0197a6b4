//! Shared oracles for integration tests.
//!
//! Everything here deliberately avoids the crate's jet pipeline: derivatives
//! come from Richardson-extrapolated central differences and metrics from
//! hand-written closed forms, so agreement with the library is evidence, not
//! circularity.

#![allow(dead_code)]

use rand::Rng;

/// Hybrid absolute/relative comparison: `|a - b| <= tol * max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1.0_f64.max(b.abs())
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        close(a, b, tol),
        "{what}: {a} vs {b} (diff {:.3e}, tol {:.1e})",
        (a - b).abs(),
        tol
    );
}

// ─── Finite-difference derivative oracle ─────────────────────────────────

/// Nested central difference for the mixed partial `∂^m f` at `point`,
/// all legs using the same step `h`. Error is O(h²).
fn central(f: &dyn Fn(&[f64]) -> f64, point: &[f64], m: &[usize], h: f64) -> f64 {
    match m.iter().position(|&e| e > 0) {
        None => f(point),
        Some(i) => {
            let mut lower = m.to_vec();
            lower[i] -= 1;
            let mut p = point.to_vec();
            p[i] = point[i] + h;
            let plus = central(f, &p, &lower, h);
            p[i] = point[i] - h;
            let minus = central(f, &p, &lower, h);
            (plus - minus) / (2.0 * h)
        }
    }
}

/// Mixed partial `∂^m f` by central differences with three levels of
/// Richardson extrapolation (leading error O(h⁸)).
pub fn fd_partial(f: &dyn Fn(&[f64]) -> f64, point: &[f64], m: &[usize], h: f64) -> f64 {
    let r1 = |h: f64| (4.0 * central(f, point, m, h / 2.0) - central(f, point, m, h)) / 3.0;
    let r2 = |h: f64| (16.0 * r1(h / 2.0) - r1(h)) / 15.0;
    (64.0 * r2(h / 2.0) - r2(h)) / 63.0
}

// ─── Random smooth scalar fields ─────────────────────────────────────────

/// Expression tree evaluable both on plain floats and on jets, restricted to
/// combinators that stay smooth and domain-safe on the whole of R^n.
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    /// exp(u / 4): damped so random towers cannot overflow.
    ExpQuarter(Box<Expr>),
    /// sqrt(1 + u²): smooth everywhere, no branch point to dodge.
    SqrtOnePlusSq(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::ExpQuarter(a) => (a.eval(x) / 4.0).exp(),
            Expr::SqrtOnePlusSq(a) => {
                let u = a.eval(x);
                (1.0 + u * u).sqrt()
            }
        }
    }

    pub fn eval_jet(&self, x: &[finsler::jets::Jet]) -> finsler::Result<finsler::jets::Jet> {
        use finsler::jets::Jet;
        let (nv, ord) = (x[0].num_vars(), x[0].order());
        Ok(match self {
            Expr::Const(c) => Jet::constant(nv, ord, *c),
            Expr::Var(i) => x[*i].clone(),
            Expr::Add(a, b) => &a.eval_jet(x)? + &b.eval_jet(x)?,
            Expr::Mul(a, b) => &a.eval_jet(x)? * &b.eval_jet(x)?,
            Expr::Sin(a) => a.eval_jet(x)?.sin(),
            Expr::Cos(a) => a.eval_jet(x)?.cos(),
            Expr::ExpQuarter(a) => a.eval_jet(x)?.scale(0.25).exp(),
            Expr::SqrtOnePlusSq(a) => {
                let u = a.eval_jet(x)?;
                (&u * &u).plus(1.0).sqrt()?
            }
        })
    }

    /// Random tree over `num_vars` variables with bounded depth.
    pub fn random<R: Rng>(rng: &mut R, num_vars: usize, depth: usize) -> Expr {
        if depth == 0 {
            return if rng.gen_bool(0.7) {
                Expr::Mul(
                    Box::new(Expr::Const(rng.gen_range(-1.5..1.5))),
                    Box::new(Expr::Var(rng.gen_range(0..num_vars))),
                )
            } else {
                Expr::Const(rng.gen_range(-1.5..1.5))
            };
        }
        let next = |rng: &mut R| Box::new(Expr::random(rng, num_vars, depth - 1));
        match rng.gen_range(0..6) {
            0 => Expr::Add(next(rng), next(rng)),
            1 => Expr::Mul(next(rng), next(rng)),
            2 => Expr::Sin(next(rng)),
            3 => Expr::Cos(next(rng)),
            4 => Expr::ExpQuarter(next(rng)),
            _ => Expr::SqrtOnePlusSq(next(rng)),
        }
    }
}

/// All multi-indices over `num_vars` variables with `1 <= |m| <= max_degree`.
pub fn multi_indices(num_vars: usize, max_degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; num_vars]];
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for m in &out {
            for i in 0..num_vars {
                let mut bumped = m.clone();
                bumped[i] += 1;
                if !next.contains(&bumped) {
                    next.push(bumped);
                }
            }
        }
        out.extend(next.clone());
    }
    out.retain(|m| m.iter().sum::<usize>() > 0);
    out.sort();
    out.dedup();
    out
}

// ─── Chart-metric geometry oracles ───────────────────────────────────────

/// Stereographic chart metric of the round sphere of radius `r`:
/// g_ij(x) = 4r⁴ δ_ij / (r² + |x|²)².
pub fn sphere_chart_metric(r: f64, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let s: f64 = x.iter().map(|v| v * v).sum();
    let factor = 4.0 * r.powi(4) / (r * r + s).powi(2);
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { factor } else { 0.0 }).collect())
        .collect()
}

/// Chart metric of the ellipsoid Σ (wᵏ/Aᵏ)² = 1 in R^(n+1) (implicit final
/// semi-axis 1) under the stretched inverse-stereographic parameterization
/// w = diag(A)·σ(x), σ(x) = (2x, |x|² − 1)/(1 + |x|²). Computed as JᵀJ with
/// the Jacobian J = ∂w/∂x written out by hand.
pub fn ellipsoid_chart_metric(axes: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    assert_eq!(axes.len(), n);
    let s: f64 = x.iter().map(|v| v * v).sum();
    let d = 1.0 + s;
    let d2 = d * d;
    // J[a][b] = A_a ∂σᵃ/∂xᵇ, a = 0..n+1, with A_n = 1.
    let mut jac = vec![vec![0.0; n]; n + 1];
    for a in 0..n {
        for b in 0..n {
            let delta = if a == b { 2.0 * d } else { 0.0 };
            jac[a][b] = axes[a] * (delta - 4.0 * x[a] * x[b]) / d2;
        }
    }
    for b in 0..n {
        jac[n][b] = 4.0 * x[b] / d2;
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..=n).map(|a| jac[a][i] * jac[a][j]).sum())
                .collect()
        })
        .collect()
}

/// Christoffel symbols Γⁱ_jk = ½ gⁱˡ(∂_j g_lk + ∂_k g_jl − ∂_l g_jk) of a
/// chart metric, with metric derivatives from `fd_partial`. Indexed
/// `[i][j][k]`.
pub fn christoffel(
    g_fn: &dyn Fn(&[f64]) -> Vec<Vec<f64>>,
    x: &[f64],
) -> Vec<Vec<Vec<f64>>> {
    let n = x.len();
    let g = g_fn(x);
    let g_inv = {
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| g[i][j]);
        m.try_inverse().expect("oracle metric must be invertible")
    };
    // dg[j][l][k] = ∂g_lk/∂xʲ
    let mut dg = vec![vec![vec![0.0; n]; n]; n];
    for j in 0..n {
        let mut m = vec![0usize; n];
        m[j] = 1;
        for l in 0..n {
            for k in l..n {
                let component = |xx: &[f64]| g_fn(xx)[l][k];
                let v = fd_partial(&component, x, &m, 0.04);
                dg[j][l][k] = v;
                dg[j][k][l] = v;
            }
        }
    }
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += g_inv[(i, l)] * (dg[j][l][k] + dg[k][j][l] - dg[l][j][k]);
                }
                gamma[i][j][k] = 0.5 * acc;
            }
        }
    }
    gamma
}

/// Riemann tensor Rⁱ_jkl = ∂_k Γⁱ_jl − ∂_l Γⁱ_jk + Γᵐ_jl Γⁱ_mk − Γᵐ_jk Γⁱ_ml
/// of a chart metric, with ∂Γ from one Richardson level of central
/// differences over `christoffel`. Indexed `[i][j][k][l]`.
pub fn riemann_from_christoffel(
    g_fn: &dyn Fn(&[f64]) -> Vec<Vec<f64>>,
    x: &[f64],
) -> Vec<Vec<Vec<Vec<f64>>>> {
    let n = x.len();
    let gamma = christoffel(g_fn, x);
    // dgamma[k][i][j][l] = ∂Γⁱ_jl/∂xᵏ
    let central_gamma = |k: usize, h: f64| -> Vec<Vec<Vec<f64>>> {
        let mut plus = x.to_vec();
        plus[k] += h;
        let mut minus = x.to_vec();
        minus[k] -= h;
        let gp = christoffel(g_fn, &plus);
        let gm = christoffel(g_fn, &minus);
        let mut out = vec![vec![vec![0.0; n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    out[i][j][l] = (gp[i][j][l] - gm[i][j][l]) / (2.0 * h);
                }
            }
        }
        out
    };
    let mut dgamma = Vec::with_capacity(n);
    for k in 0..n {
        let (h1, h2) = (2e-3, 1e-3);
        let coarse = central_gamma(k, h1);
        let fine = central_gamma(k, h2);
        let mut out = vec![vec![vec![0.0; n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    out[i][j][l] = (4.0 * fine[i][j][l] - coarse[i][j][l]) / 3.0;
                }
            }
        }
        dgamma.push(out);
    }
    let mut r = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = dgamma[k][i][j][l] - dgamma[l][i][j][k];
                    for m in 0..n {
                        acc += gamma[m][j][l] * gamma[i][m][k] - gamma[m][j][k] * gamma[i][m][l];
                    }
                    r[i][j][k][l] = acc;
                }
            }
        }
    }
    r
}
