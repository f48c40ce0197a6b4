//! Generator formulas for the built-in kernels: each evaluates F²(x, y) on
//! jets, so every derivative the tensor pipeline needs falls out exactly.

use crate::error::Result;
use crate::jets::Jet;
use crate::linalg::{jet_dot, jet_sq_norm};

/// Flat metric: F² = Σ (yᵏ)².
pub(super) fn euclidean(y: &[Jet]) -> Jet {
    jet_sq_norm(y)
}

/// Round sphere of radius `r` in the stereographic chart:
/// g_ij = 4r⁴ δ_ij / (r² + |x|²)², so F² = 4r⁴ |y|² / (r² + |x|²)².
pub(super) fn sphere(r: f64, x: &[Jet], y: &[Jet]) -> Result<Jet> {
    let denom = jet_sq_norm(x).plus(r * r);
    let factor = (&denom * &denom).recip()?.scale(4.0 * r.powi(4));
    Ok(&jet_sq_norm(y) * &factor)
}

/// Induced metric of the ellipsoid Σ (wᵏ/Aᵏ)² = 1 in R^(p+1) with
/// A = (semi_axes..., 1), in the chart w = diag(A)·σ(x) where σ is the
/// inverse stereographic map σ(x) = (2x, |x|² − 1)/(1 + |x|²). With all
/// semi-axes equal to 1 this reduces exactly to the unit sphere above.
pub(super) fn ellipsoid(semi_axes: &[f64], x: &[Jet], y: &[Jet]) -> Result<Jet> {
    let p = x.len();
    let (nv, ord) = (x[0].num_vars(), x[0].order());
    let d = jet_sq_norm(x).plus(1.0); // D = 1 + |x|²
    let d2_inv = (&d * &d).recip()?;
    let xy = jet_dot(x, y);

    // F² = Σ_k A_k² (dσᵏ(x)[y])², with the Jacobian of σ in closed form:
    //   dσᵏ[y] = (2 yᵏ D − 4 xᵏ ⟨x,y⟩)/D²  for k < p,
    //   dσᵖ[y] = 4 ⟨x,y⟩ / D².
    let mut f2 = Jet::constant(nv, ord, 0.0);
    for k in 0..p {
        let numer = &(&y[k].scale(2.0) * &d) - &(&x[k] * &xy).scale(4.0);
        let dsig = &numer * &d2_inv;
        f2 = &f2 + &(&dsig * &dsig).scale(semi_axes[k] * semi_axes[k]);
    }
    let dsig_last = &xy.scale(4.0) * &d2_inv;
    Ok(&f2 + &(&dsig_last * &dsig_last))
}

/// Randers-type metric F = α̃ + β̃ with α̃ = |y| (Euclidean) and
/// β̃ = b ⟨x,y⟩ / |x|. Positivity needs |b| < 1; x = 0 is excluded.
pub(super) fn randers(b: f64, x: &[Jet], y: &[Jet]) -> Result<Jet> {
    let alpha = jet_sq_norm(y).sqrt()?;
    let beta = &jet_dot(x, y) * &jet_sq_norm(x).sqrt()?.recip()?.scale(b);
    let f = &alpha + &beta;
    Ok(&f * &f)
}

/// Funk metric of the unit ball:
/// F = (√((1 − |x|²)|y|² + ⟨x,y⟩²) + ⟨x,y⟩) / (1 − |x|²).
pub(super) fn funk_ball(x: &[Jet], y: &[Jet]) -> Result<Jet> {
    let one_minus = (-&jet_sq_norm(x)).plus(1.0);
    let xy = jet_dot(x, y);
    let s = (&(&one_minus * &jet_sq_norm(y)) + &(&xy * &xy)).sqrt()?;
    let f = (&s + &xy).div(&one_minus)?;
    Ok(&f * &f)
}

/// Klein metric of the unit ball:
/// F² = ((1 − |x|²)|y|² + ⟨x,y⟩²) / (1 − |x|²)².
pub(super) fn klein_ball(x: &[Jet], y: &[Jet]) -> Result<Jet> {
    let one_minus = (-&jet_sq_norm(x)).plus(1.0);
    let xy = jet_dot(x, y);
    let numer = &(&one_minus * &jet_sq_norm(y)) + &(&xy * &xy);
    numer.div(&(&one_minus * &one_minus))
}

/// Quartic Minkowski norm F = (Σ (yᵏ)⁴)^(1/4), i.e. F² = √(Σ (yᵏ)⁴).
/// Locally Minkowski: no x-dependence at all.
pub(super) fn quartic_minkowski(y: &[Jet]) -> Result<Jet> {
    let mut quartic = {
        let sq = &y[0] * &y[0];
        &sq * &sq
    };
    for yk in &y[1..] {
        let sq = yk * yk;
        quartic = &quartic + &(&sq * &sq);
    }
    quartic.sqrt()
}

/// F² = Σ g_ij(x) yⁱ yʲ for a caller-supplied Riemannian metric field.
pub(super) fn riemannian(g: &[Vec<Jet>], y: &[Jet]) -> Jet {
    let n = y.len();
    let mut f2 = (&g[0][0] * &y[0]) * y[0].clone();
    for i in 0..n {
        for j in 0..n {
            if i == 0 && j == 0 {
                continue;
            }
            f2 = &f2 + &(&(&g[i][j] * &y[i]) * &y[j]);
        }
    }
    f2
}
