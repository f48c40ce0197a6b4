//! Connection pipeline versus hand-built oracles: Christoffel symbols from
//! finite differences of closed-form chart metrics, closed-form sprays of the
//! ball metrics, and classical great-circle geodesics.

mod common;

use common::{assert_close, christoffel, ellipsoid_chart_metric, sphere_chart_metric};
use finsler::connection::{
    cartan_coefficients, covariant_derivative_h, integrate_geodesic, parallel_transport, spray,
};
use finsler::jets::Jet;
use finsler::metric::{fundamental_tensor, MetricKernel, ReferenceElement};

fn element(kernel: &MetricKernel, x: &[f64], y: &[f64]) -> ReferenceElement {
    ReferenceElement::new(kernel, x.to_vec(), y.to_vec()).unwrap()
}

#[test]
fn riemannian_sprays_contract_the_christoffel_symbols() {
    let cases: Vec<(MetricKernel, Box<dyn Fn(&[f64]) -> Vec<Vec<f64>>>)> = vec![
        (
            MetricKernel::sphere(3, 1.4),
            Box::new(|x: &[f64]| sphere_chart_metric(1.4, x)),
        ),
        (
            MetricKernel::ellipsoid(vec![1.3, 0.8, 1.1]),
            Box::new(|x: &[f64]| ellipsoid_chart_metric(&[1.3, 0.8, 1.1], x)),
        ),
    ];
    let points = [
        (vec![0.3, -0.1, 0.2], vec![0.7, 0.5, -0.4]),
        (vec![-0.25, 0.4, 0.05], vec![0.2, -0.8, 0.55]),
    ];
    for (kernel, g_fn) in &cases {
        for (x, y) in &points {
            let z = element(kernel, x, y);
            let data = spray(kernel, &z).unwrap();
            let gamma = christoffel(g_fn.as_ref(), x);
            for i in 0..3 {
                let mut half_gyy = 0.0;
                for j in 0..3 {
                    let mut gy = 0.0;
                    for k in 0..3 {
                        half_gyy += 0.5 * gamma[i][j][k] * y[j] * y[k];
                        gy += gamma[i][j][k] * y[k];
                    }
                    // For quadratic F², N reduces to Γ contracted with y.
                    assert_close(data.nonlinear[(i, j)], gy, 1e-8, &format!("{kernel:?} N[{i}{j}]"));
                }
                assert_close(
                    data.coefficients[i],
                    half_gyy,
                    1e-8,
                    &format!("{kernel:?} G[{i}] = half Christoffel contraction"),
                );
            }
        }
    }
}

#[test]
fn cartan_coefficients_reduce_to_christoffel_symbols() {
    let axes = [1.3, 0.8, 1.1];
    let cases: Vec<(MetricKernel, Box<dyn Fn(&[f64]) -> Vec<Vec<f64>>>)> = vec![
        (
            MetricKernel::sphere(3, 2.0),
            Box::new(|x: &[f64]| sphere_chart_metric(2.0, x)),
        ),
        (
            MetricKernel::ellipsoid(axes.to_vec()),
            Box::new(move |x: &[f64]| ellipsoid_chart_metric(&axes, x)),
        ),
    ];
    for (kernel, g_fn) in &cases {
        let x = [0.2, 0.35, -0.15];
        let z = element(kernel, &x, &[0.4, -0.6, 0.3]);
        let got = cartan_coefficients(kernel, &z).unwrap().gamma;
        let want = christoffel(g_fn.as_ref(), &x);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_close(
                        got[(i, j, k)],
                        want[i][j][k],
                        1e-8,
                        &format!("{kernel:?} Gamma[{i}{j}{k}]"),
                    );
                }
            }
        }
    }
}

#[test]
fn ball_metric_sprays_match_their_closed_forms() {
    // Funk: the generator solves F_x = F·F_y, which collapses the spray to
    // G = ½·F·y. Klein: G = (⟨x,y⟩ / (1 − |x|²))·y.
    let x = [0.3, -0.2, 0.4];
    let y = [0.5, 0.7, -0.1];
    let funk = MetricKernel::funk_ball(3);
    let f = funk.f(&x, &y).unwrap();
    let data = spray(&funk, &element(&funk, &x, &y)).unwrap();
    for i in 0..3 {
        assert_close(data.coefficients[i], 0.5 * f * y[i], 1e-10, &format!("funk G[{i}]"));
    }
    let klein = MetricKernel::klein_ball(3);
    let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let xx: f64 = x.iter().map(|a| a * a).sum();
    let data = spray(&klein, &element(&klein, &x, &y)).unwrap();
    for i in 0..3 {
        assert_close(
            data.coefficients[i],
            xy / (1.0 - xx) * y[i],
            1e-10,
            &format!("klein G[{i}]"),
        );
    }
}

#[test]
fn covariant_derivative_matches_the_levi_civita_oracle() {
    let r = 1.4;
    let kernel = MetricKernel::sphere(3, r);
    let x = [0.3, -0.1, 0.2];
    let z = element(&kernel, &x, &[0.7, 0.5, -0.4]);
    // Y(x) = (x₁², 1 + x₀, x₀x₂) as first-order jets; X arbitrary.
    let vars = Jet::variables(3, 1, &x);
    let y_field = [
        &vars[1] * &vars[1],
        vars[0].plus(1.0),
        &vars[0] * &vars[2],
    ];
    let x_dir = [0.6, -0.2, 0.9];
    let got = covariant_derivative_h(&kernel, &z, &x_dir, &y_field).unwrap();
    let gamma = christoffel(&|p: &[f64]| sphere_chart_metric(r, p), &x);
    let y_values = [x[1] * x[1], 1.0 + x[0], x[0] * x[2]];
    let dy = [
        [0.0, 2.0 * x[1], 0.0],
        [1.0, 0.0, 0.0],
        [x[2], 0.0, x[0]],
    ];
    for i in 0..3 {
        let mut want = 0.0;
        for j in 0..3 {
            want += x_dir[j] * dy[i][j];
            for k in 0..3 {
                want += gamma[i][j][k] * x_dir[j] * y_values[k];
            }
        }
        assert_close(got[i], want, 1e-8, &format!("covariant derivative [{i}]"));
    }
}

#[test]
fn great_circles_close_after_a_full_period() {
    // On the ring |x| = r the stereographic factor is exactly 1, so the unit
    // circle traversed at unit speed is a unit-speed geodesic of period 2π.
    let kernel = MetricKernel::sphere(3, 1.0);
    let x0 = [1.0, 0.0, 0.0];
    let y0 = [0.0, 1.0, 0.0];
    let path = integrate_geodesic(&kernel, &x0, &y0, 2.0 * std::f64::consts::PI, 1024).unwrap();
    let (x, y) = path.endpoint();
    for i in 0..3 {
        assert_close(x[i], x0[i], 1e-4, &format!("closure x[{i}]"));
        assert_close(y[i], y0[i], 1e-4, &format!("closure y[{i}]"));
    }
}

#[test]
fn geodesic_integrator_converges_at_fourth_order() {
    let kernel = MetricKernel::sphere(3, 1.0);
    let x0 = [1.0, 0.0, 0.0];
    let y0 = [0.0, 1.0, 0.0];
    let quarter = std::f64::consts::FRAC_PI_2;
    let exact = [quarter.cos(), quarter.sin(), 0.0];
    let endpoint_error = |steps: usize| -> f64 {
        let path = integrate_geodesic(&kernel, &x0, &y0, quarter, steps).unwrap();
        let (x, _) = path.endpoint();
        x.iter()
            .zip(&exact)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let coarse = endpoint_error(16);
    let fine = endpoint_error(32);
    let ratio = coarse / fine;
    assert!(
        (10.0..25.0).contains(&ratio),
        "error ratio {ratio:.2} (coarse {coarse:.3e}, fine {fine:.3e}) not ~16"
    );
}

#[test]
fn equator_transport_matches_the_classical_rotation() {
    // Along the equator of the 2-sphere chart (where the conformal factor is
    // 1), parallel transport keeps components constant in the moving frame
    // (T, N) with T = (−sin t, cos t), N = (cos t, sin t).
    let kernel = MetricKernel::sphere(2, 1.0);
    let quarter = std::f64::consts::FRAC_PI_2;
    let path = integrate_geodesic(&kernel, &[1.0, 0.0], &[0.0, 1.0], quarter, 1024).unwrap();
    let v0 = [1.0, 2.0]; // = 2·T(0) + 1·N(0)
    let field = parallel_transport(&kernel, &path, &v0).unwrap();
    let v_end = field.last().unwrap();
    assert_close(v_end[0], -2.0, 1e-5, "transported component along T");
    assert_close(v_end[1], 1.0, 1e-5, "transported component along N");
    // Norm conservation as well: the factor is 1 on the whole ring.
    let z = element(&kernel, path.x.last().unwrap(), path.y.last().unwrap());
    let ft = fundamental_tensor(&kernel, &z).unwrap();
    assert_close(ft.inner(v_end, v_end), 5.0, 1e-6, "transported norm");
}
