//! Fixed-order Gauss quadrature: a 4-point Gauss-Legendre rule on [0,1] and
//! its Duffy-transformed tensor products on triangles and tetrahedra. The
//! tensor rules integrate polynomials well past degree 4, which is more than
//! the flux discretization can resolve.

/// 4-point Gauss-Legendre nodes and weights on [0, 1].
pub(crate) const GL4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_9),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_1),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_1),
    (0.930_568_155_797_026_2, 0.173_927_422_568_726_9),
];

/// Integrate `f` over a simplex given by `k+1` vertex coordinate slices and
/// its unsigned volume. Supports edges (k=1), triangles (k=2) and
/// tetrahedra (k=3); the collapsed-coordinate map keeps everything inside
/// the element.
pub(crate) fn integrate_simplex(
    points: &[&[f64]],
    volume: f64,
    mut f: impl FnMut(&[f64]) -> f64,
) -> f64 {
    let nd = points[0].len();
    let mut x = [0.0f64; 3];
    let mut sum = 0.0;
    match points.len() {
        2 => {
            for &(u, wu) in &GL4 {
                for d in 0..nd {
                    x[d] = points[0][d] + u * (points[1][d] - points[0][d]);
                }
                sum += wu * f(&x[..nd]);
            }
            sum * volume
        }
        3 => {
            // reference coords (a, b) = (u(1-v), uv), Jacobian u
            for &(u, wu) in &GL4 {
                for &(v, wv) in &GL4 {
                    let a = u * (1.0 - v);
                    let b = u * v;
                    for d in 0..nd {
                        x[d] = points[0][d]
                            + a * (points[1][d] - points[0][d])
                            + b * (points[2][d] - points[0][d]);
                    }
                    sum += wu * wv * u * f(&x[..nd]);
                }
            }
            2.0 * volume * sum
        }
        4 => {
            for &(u, wu) in &GL4 {
                for &(v, wv) in &GL4 {
                    for &(w, ww) in &GL4 {
                        let a = u * (1.0 - v);
                        let b = u * v * (1.0 - w);
                        let c = u * v * w;
                        for d in 0..nd {
                            x[d] = points[0][d]
                                + a * (points[1][d] - points[0][d])
                                + b * (points[2][d] - points[0][d])
                                + c * (points[3][d] - points[0][d]);
                        }
                        sum += wu * wv * ww * u * u * v * f(&x[..nd]);
                    }
                }
            }
            6.0 * volume * sum
        }
        _ => unreachable!("quadrature supports simplices with 2..=4 vertices"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_rule_is_exact_for_quartics() {
        // reference triangle (0,0), (1,0), (0,1): integral of x^p y^q is
        // p! q! / (p+q+2)!
        let pts: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]];
        let cases = [
            (0usize, 0usize, 0.5),
            (1, 0, 1.0 / 6.0),
            (2, 1, 1.0 / 60.0),
            (2, 2, 1.0 / 180.0),
            (4, 0, 1.0 / 30.0),
        ];
        for (p, q, exact) in cases {
            let got = integrate_simplex(&pts, 0.5, |x| {
                let mut v = 1.0;
                for _ in 0..p {
                    v *= x[0];
                }
                for _ in 0..q {
                    v *= x[1];
                }
                v
            });
            assert!((got - exact).abs() < 1e-15, "x^{p} y^{q}: {got} vs {exact}");
        }
    }

    #[test]
    fn tet_rule_is_exact_for_quartics() {
        let pts: [&[f64]; 4] = [
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
        ];
        // integral of x^p y^q z^r over the reference tet: p! q! r! / (p+q+r+3)!
        let cases = [
            (0usize, 0usize, 0usize, 1.0 / 6.0),
            (1, 0, 0, 1.0 / 24.0),
            (1, 1, 1, 1.0 / 720.0),
            (2, 2, 0, 1.0 / 1260.0),
            (4, 0, 0, 1.0 / 210.0),
        ];
        for (p, q, r, exact) in cases {
            let got = integrate_simplex(&pts, 1.0 / 6.0, |x| {
                let mut v = 1.0;
                for _ in 0..p {
                    v *= x[0];
                }
                for _ in 0..q {
                    v *= x[1];
                }
                for _ in 0..r {
                    v *= x[2];
                }
                v
            });
            assert!(
                (got - exact).abs() < 1e-15,
                "x^{p} y^{q} z^{r}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn edge_rule_integrates_cubics() {
        let pts: [&[f64]; 2] = [&[1.0, 1.0], &[3.0, 1.0]];
        // f(x) = x^3 along y=1 from x=1 to 3: mean value = (3^4-1)/(4*2) = 10
        let got = integrate_simplex(&pts, 2.0, |x| x[0] * x[0] * x[0]);
        assert!((got - 20.0).abs() < 1e-13);
    }
}
