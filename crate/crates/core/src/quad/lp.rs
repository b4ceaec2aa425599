//! L^p norms over balls, annuli, and unions of balls.

use rayon::prelude::*;

use crate::error::CoreError;
use crate::quad::radial::{radial_integrate_interval, QuadratureSpec};
use crate::quad::spheregrid::sphere_grid;

#[derive(Debug, Clone)]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, r_in: f64, r_out: f64 },
    UnionBalls(Vec<(Vec<f64>, f64)>),
}

/// Norm result with the quadrature error propagated through the 1/p power.
#[derive(Debug, Clone, Copy)]
pub struct LpResult {
    pub norm: f64,
    pub error: f64,
}

/// L^p norm of a radial profile about the region center (1-D reduction).
pub fn lp_norm_radial(
    f: &(dyn Fn(f64) -> f64 + Sync),
    p: f64,
    n: usize,
    r_lo: f64,
    r_hi: f64,
    spec: &QuadratureSpec,
) -> Result<LpResult, CoreError> {
    if p <= 0.0 {
        return Err(CoreError::Unsupported(format!("p = {p} must be positive")));
    }
    let area = crate::quad::gammafn::sphere_area(n);
    let g = |r: f64| f(r).abs().powf(p);
    let (v, e) = radial_integrate_interval(&g, n, r_lo, r_hi, spec)?;
    let total = area * v;
    let err = area * e;
    Ok(power_result(total, err, p))
}

/// L^p norm of a black-box field over a region via tensor-grid quadrature
/// (radial panels × sphere grid). Error estimated by comparing two
/// angular resolutions.
pub fn lp_norm_grid(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    p: f64,
    region: &Region,
    n: usize,
    spec: &QuadratureSpec,
    angular_level: usize,
    radial_points: usize,
) -> Result<LpResult, CoreError> {
    if p <= 0.0 {
        return Err(CoreError::Unsupported(format!("p = {p} must be positive")));
    }
    match region {
        Region::Ball { center, radius } => {
            let coarse = pth_power_over_ball(f, p, center, 0.0, *radius, n, angular_level, radial_points)?;
            let fine = pth_power_over_ball(
                f,
                p,
                center,
                0.0,
                *radius,
                n,
                angular_level + angular_level / 2 + 1,
                radial_points + radial_points / 2,
            )?;
            let err = (fine - coarse).abs();
            let _ = spec;
            Ok(power_result(fine, err, p))
        }
        Region::Annulus { center, r_in, r_out } => {
            let coarse = pth_power_over_ball(f, p, center, *r_in, *r_out, n, angular_level, radial_points)?;
            let fine = pth_power_over_ball(
                f,
                p,
                center,
                *r_in,
                *r_out,
                n,
                angular_level + angular_level / 2 + 1,
                radial_points + radial_points / 2,
            )?;
            let err = (fine - coarse).abs();
            Ok(power_result(fine, err, p))
        }
        Region::UnionBalls(balls) => {
            // p-th powers add over disjoint balls
            let mut total = 0.0;
            let mut err = 0.0;
            for (c, r) in balls {
                let sub = lp_norm_grid(
                    f,
                    p,
                    &Region::Ball {
                        center: c.clone(),
                        radius: *r,
                    },
                    n,
                    spec,
                    angular_level,
                    radial_points,
                )?;
                total += sub.norm.powf(p);
                err += sub.error * p * sub.norm.powf(p - 1.0).max(f64::MIN_POSITIVE);
            }
            Ok(power_result(total, err, p))
        }
    }
}

fn pth_power_over_ball(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    p: f64,
    center: &[f64],
    r_in: f64,
    r_out: f64,
    n: usize,
    angular_level: usize,
    radial_points: usize,
) -> Result<f64, CoreError> {
    let grid = sphere_grid(n, angular_level)?;
    let (rx, rw) = crate::quad::spheregrid::gauss_legendre(radial_points);
    // map [-1,1] -> [r_in, r_out]
    let half = 0.5 * (r_out - r_in);
    let mid = 0.5 * (r_out + r_in);
    let radial: Vec<(f64, f64)> = rx
        .iter()
        .zip(&rw)
        .map(|(&x, &w)| (mid + half * x, w * half))
        .collect();

    let total: f64 = radial
        .par_iter()
        .map(|&(r, wr)| {
            let mut x = vec![0.0; n];
            let mut s = 0.0;
            for (theta, wa) in &grid {
                for i in 0..n {
                    x[i] = center[i] + r * theta[i];
                }
                s += wa * f(&x).abs().powf(p);
            }
            wr * r.powi(n as i32 - 1) * s
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total)
}

fn power_result(total_pth: f64, err_pth: f64, p: f64) -> LpResult {
    let norm = total_pth.max(0.0).powf(1.0 / p);
    // d(norm)/d(total) = norm / (p * total)
    let error = if total_pth > 0.0 {
        err_pth * norm / (p * total_pth)
    } else {
        err_pth.powf(1.0 / p)
    };
    LpResult { norm, error }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gammafn::ball_volume;
    use approx::assert_relative_eq;

    #[test]
    fn constant_on_unit_ball() {
        let n = 5;
        let spec = QuadratureSpec::default();
        let f = |_: &[f64]| 1.0;
        let r = lp_norm_grid(
            &f,
            2.0,
            &Region::Ball {
                center: vec![0.0; n],
                radius: 1.0,
            },
            n,
            &spec,
            8,
            16,
        )
        .unwrap();
        assert_relative_eq!(r.norm, ball_volume(n).sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn radial_path_matches_grid_path() {
        let n = 5;
        let spec = QuadratureSpec::default();
        let prof = |r: f64| (-r * r).exp();
        let via_radial = lp_norm_radial(&prof, 2.0, n, 0.0, 2.0, &spec).unwrap();
        let f = |x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>()).exp();
        let via_grid = lp_norm_grid(
            &f,
            2.0,
            &Region::Ball {
                center: vec![0.0; n],
                radius: 2.0,
            },
            n,
            &spec,
            8,
            24,
        )
        .unwrap();
        assert_relative_eq!(via_radial.norm, via_grid.norm, max_relative = 1e-8);
    }

    #[test]
    fn union_of_disjoint_balls_is_p_additive() {
        let n = 3;
        let spec = QuadratureSpec::default();
        let f = |x: &[f64]| 1.0 + x[0];
        let b1 = (vec![0.0, 0.0, 0.0], 0.5);
        let b2 = (vec![10.0, 0.0, 0.0], 0.5);
        let p = 1.5;
        let u = lp_norm_grid(&f, p, &Region::UnionBalls(vec![b1.clone(), b2.clone()]), n, &spec, 8, 12).unwrap();
        let n1 = lp_norm_grid(&f, p, &Region::Ball { center: b1.0, radius: b1.1 }, n, &spec, 8, 12).unwrap();
        let n2 = lp_norm_grid(&f, p, &Region::Ball { center: b2.0, radius: b2.1 }, n, &spec, 8, 12).unwrap();
        assert_relative_eq!(
            u.norm.powf(p),
            n1.norm.powf(p) + n2.norm.powf(p),
            max_relative = 1e-10
        );
    }
}
