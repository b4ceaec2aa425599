//! Tensor-product quadrature grids on S^{n−1} for moderate n (≤ 8).
//!
//! Polar-angle directions use Gauss–Legendre nodes with the sin-power
//! measure folded into the weight; the final azimuth uses the periodic
//! trapezoid rule. Intended for black-box integrands (curvature
//! residual norms); exact moments handle the polyradial case instead.

use crate::error::CoreError;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_deriv(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(m, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // ascending order
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| nodes[a].partial_cmp(&nodes[b]).unwrap());
    (
        idx.iter().map(|&i| nodes[i]).collect(),
        idx.iter().map(|&i| weights[i]).collect(),
    )
}

fn legendre_with_deriv(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Quadrature nodes (unit vectors) and weights on S^{n−1}; the weights
/// sum to the sphere area. `level` controls points per angle.
pub fn sphere_grid(n: usize, level: usize) -> Result<Vec<(Vec<f64>, f64)>, CoreError> {
    if n < 2 {
        return Err(CoreError::Unsupported(format!(
            "sphere grid needs n >= 2, got {n}"
        )));
    }
    if n > 8 {
        return Err(CoreError::Unsupported(format!(
            "tensor sphere grid not feasible for n = {n} (use moments or radial paths)"
        )));
    }
    let m_polar = level.max(4);
    let m_azimuth = 2 * level.max(4);

    // start from the azimuth circle
    let mut pts: Vec<(Vec<f64>, f64)> = (0..m_azimuth)
        .map(|j| {
            let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m_azimuth as f64;
            (
                vec![phi.cos(), phi.sin()],
                2.0 * std::f64::consts::PI / m_azimuth as f64,
            )
        })
        .collect();

    // prepend polar angles: at stage m (building S^{m-1} -> S^m),
    // x = (cos t, sin t * y) with weight sin^{m-1}(t); Gauss–Legendre in
    // the angle itself keeps the weight smooth for odd powers too.
    for m in 2..n {
        let (gl_nodes, gl_weights) = gauss_legendre(m_polar + 2 * m);
        let mut next = Vec::with_capacity(pts.len() * gl_nodes.len());
        for (i, &u) in gl_nodes.iter().enumerate() {
            let t = 0.5 * std::f64::consts::PI * (u + 1.0);
            let (st, ct) = t.sin_cos();
            let w_polar =
                gl_weights[i] * 0.5 * std::f64::consts::PI * st.powi(m as i32 - 1);
            for (y, wy) in &pts {
                let mut x = Vec::with_capacity(m + 1);
                x.push(ct);
                x.extend(y.iter().map(|v| v * st));
                next.push((x, w_polar * wy));
            }
        }
        pts = next;
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gammafn::sphere_area;
    use crate::quad::moments::{sphere_moment, MultiIndex};
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let int: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(10)).sum();
        assert_relative_eq!(int, 2.0 / 11.0, max_relative = 1e-13);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn grid_weights_sum_to_area_and_match_moments() {
        for n in [3usize, 5, 6] {
            let grid = sphere_grid(n, 10).unwrap();
            let total: f64 = grid.iter().map(|(_, w)| w).sum();
            assert_relative_eq!(total, sphere_area(n), max_relative = 1e-10);

            let alpha = MultiIndex::from_pairs(&[(0, 2), (1, 2)]);
            let exact = sphere_moment(&alpha, n).unwrap();
            let num: f64 = grid
                .iter()
                .map(|(x, w)| w * x[0] * x[0] * x[1] * x[1])
                .sum();
            assert_relative_eq!(num, exact, max_relative = 1e-9);
        }
    }
}
