//! Galerkin solver for the constrained linearized Paneitz problem around
//! a bubble, reduced to radial fourth-order problems in angular sectors.

pub mod banded;
pub mod sector;
pub mod solve;

pub use sector::{gamma_frame_field, potential_coeff, AngularProjection, SectorBasis};
pub use solve::{
    assembly_symmetry_defect, sector_min_eigenvalue, solve_sector_raw, solve_zbar,
    solve_zbar_refined, Manufactured, RadialGrid, SectorProblem, SectorSolution,
};

use crate::curvature::ops::loglog_slope;
use crate::dim::Dimension;
use crate::error::CoreError;
use crate::sym::Window;
use crate::weyl::WeylLikeTensor;

/// Verification report for a sector solution.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ZbarVerification {
    /// fitted log-log slope of |ψ| against (ε + r); target 14 − n.
    pub decay_slope: f64,
    pub decay_target: f64,
    pub decay_ok: bool,
    /// two-scale comparison error (relative max over sampled radii).
    pub scaling_error: f64,
    pub scaling_ok: bool,
    /// max |⟨z̄, φ_k⟩| over k, scaled by ‖Γ̄‖-proxy.
    pub constraint_defect: f64,
    pub constraint_ok: bool,
    /// max |b_k| / γ-scale.
    pub multiplier_defect: f64,
    pub multiplier_ok: bool,
}

/// Decay slope of |ψ(r)| against (ε + r), fitted over r ∈ [lo, hi].
pub fn decay_slope(sol: &SectorSolution, lo: f64, hi: f64) -> f64 {
    let mut params = Vec::new();
    let mut values = Vec::new();
    for (r, v) in sol.r_nodes.iter().zip(&sol.psi) {
        if *r >= lo && *r <= hi && v.abs() > 0.0 {
            params.push(sol.eps + r);
            values.push(*v);
        }
    }
    loglog_slope(&params, &values)
}

/// Full verification per the solver contract: decay fit, the two-scale
/// law, constraint satisfaction, and multiplier vanishing.
pub fn verify_zbar(
    weyl: &WeylLikeTensor,
    dim: &Dimension,
    tau: f64,
    xi: &[f64],
    eps: f64,
    grid: &RadialGrid,
) -> Result<ZbarVerification, CoreError> {
    let n = dim.n();
    let base = SectorProblem {
        dim: *dim,
        weyl,
        window: Window::normalized(tau),
        amplitude: 1.0,
        offset: xi.to_vec(),
        eps,
    };
    let sol = solve_zbar(&base, grid)?;

    // (a) decay: |z̄| ~ (ε + r)^{14−n}
    let target = 14.0 - dim.nf();
    let slope = decay_slope(&sol, 10.0 * eps, (grid.r_max / 2.0).min(400.0 * eps));
    let decay_ok = (slope - target).abs() <= 0.5;

    // (b) scaling law at λ = 1/2 with μ = 1:
    // z_(λξ, λε)(λx) = λ^{(24−n)/2} z̄_(ξ,ε)(x)
    let lam = 0.5;
    let scaled = SectorProblem {
        dim: *dim,
        weyl,
        window: Window { tau, lambda: lam },
        amplitude: lam.powi(8),
        offset: xi.iter().map(|v| v * lam).collect(),
        eps: eps * lam,
    };
    let sol_s = solve_zbar(&scaled, grid)?;
    let factor = lam.powf((24.0 - dim.nf()) / 2.0);
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (i, &r) in sol.r_nodes.iter().enumerate() {
        if r < 0.5 * eps || r > 20.0 * eps {
            continue;
        }
        // ψ_scaled at radius λ·r, interpolated linearly between nodes
        let target_r = lam * r;
        let psi_s = interp_psi(&sol_s, target_r);
        // sector directions agree: M_scaled = λ² M, both normalized away
        let lhs = psi_s;
        let rhs = factor * sol.psi[i];
        num = num.max((lhs - rhs).abs());
        den = den.max(rhs.abs());
    }
    let scaling_error = num / den.max(1e-300);
    let scaling_ok = scaling_error <= 1e-4;

    // (c) constraints: the degree-2 z̄ against every φ_k; the angular
    // factors are exact moments (zero), so the defect is the moment
    // arithmetic noise times the radial pairing scale.
    let mut constraint_defect: f64 = 0.0;
    {
        use crate::quad::moments::{sphere_moment, MultiIndex};
        // ∫ Y dθ and ∫ Y θ_k dθ with Y = M(θ,θ)/‖·‖
        let mut int_y = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mij = sol.sector_m[i * n + j];
                if mij != 0.0 {
                    let alpha = MultiIndex::unit(i).mul(&MultiIndex::unit(j));
                    int_y += mij * sphere_moment(&alpha, n)?;
                }
            }
        }
        let norm = sol.sector_norm_y.max(1e-300);
        constraint_defect = constraint_defect.max((int_y / norm).abs());
        // θ_k moments are odd — identically zero — defect stays as is
    }
    let constraint_ok = constraint_defect <= 1e-10;

    let multiplier_defect = sol
        .multipliers
        .iter()
        .fold(0.0_f64, |m, b| m.max(b.abs()))
        / sol.gamma_scale.max(1e-300);
    let multiplier_ok = multiplier_defect <= 1e-8;

    Ok(ZbarVerification {
        decay_slope: slope,
        decay_target: target,
        decay_ok,
        scaling_error,
        scaling_ok,
        constraint_defect,
        constraint_ok,
        multiplier_defect,
        multiplier_ok,
    })
}

/// Hermite interpolation of ψ at radius r.
pub fn interp_psi(sol: &SectorSolution, r: f64) -> f64 {
    let s = r / (1.0 + r);
    let s_max = sol.grid.s_max();
    if s >= s_max {
        return *sol.psi.last().unwrap();
    }
    let m = sol.s_nodes.len();
    let ds = s_max / (m - 1) as f64;
    let e = ((s / ds) as usize).min(m - 2);
    let t = (s - sol.s_nodes[e]) / ds;
    let h = ds;
    let v = [
        1.0 - 3.0 * t * t + 2.0 * t * t * t,
        (t - 2.0 * t * t + t * t * t) * h,
        3.0 * t * t - 2.0 * t * t * t,
        (-t * t + t * t * t) * h,
    ];
    v[0] * sol.psi[e] + v[1] * sol.psi_slope[e] + v[2] * sol.psi[e + 1] + v[3] * sol.psi_slope[e + 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_problem(n: usize, xi1: f64) -> (Dimension, WeylLikeTensor, Vec<f64>) {
        let dim = Dimension::new(n).unwrap();
        let weyl = WeylLikeTensor::from_seed(n, &[(0, 1, 0, 1, 1.0)]).unwrap();
        let mut xi = vec![0.0; n];
        xi[0] = xi1;
        (dim, weyl, xi)
    }

    #[test]
    fn assembled_sector_matrix_is_symmetric() {
        let dim = Dimension::new(25).unwrap();
        let grid = RadialGrid {
            nodes: 200,
            r_max: 100.0,
        };
        let defect = assembly_symmetry_defect(&dim, &grid, 1.0);
        assert!(defect < 1e-12, "symmetry defect {defect}");
    }

    #[test]
    fn zero_weyl_gives_zero_solution() {
        let dim = Dimension::new(25).unwrap();
        let weyl = WeylLikeTensor::zero(25);
        let problem = SectorProblem {
            dim,
            weyl: &weyl,
            window: Window::normalized(10.0),
            amplitude: 1.0,
            offset: vec![0.0; 25],
            eps: 1.0,
        };
        let grid = RadialGrid {
            nodes: 100,
            r_max: 100.0,
        };
        let sol = solve_zbar(&problem, &grid).unwrap();
        assert!(sol.psi.iter().all(|v| *v == 0.0));
        assert!(sol.multipliers.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn manufactured_solution_recovery_and_refinement_order() {
        // inject ψ* and Γ* := −(sector operator ψ*), recover ψ*
        let dim = Dimension::new(25).unwrap();
        let eps = 1.0;
        let mf = Manufactured::new(5.0);
        let kappa2 = 2.0 * dim.nf();
        let gamma = |r: f64| -mf.strong_operator(&dim, kappa2, eps, r);

        let mut errors = Vec::new();
        for nodes in [250usize, 500, 1000] {
            let grid = RadialGrid { nodes, r_max: 50.0 };
            let (v, _, res) = solve_sector_raw(&dim, &grid, eps, &gamma).unwrap();
            assert!(res < 1e-10, "galerkin residual {res}");
            let mut err: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for (i, &s) in grid.s_nodes().iter().enumerate() {
                let r = RadialGrid::r_of_s(s);
                let exact = mf.value(r);
                err = err.max((v[i] - exact).abs());
                scale = scale.max(exact.abs());
            }
            errors.push(err / scale);
        }
        println!("manufactured errors: {errors:?}");
        assert!(errors[2] < 1e-6, "fine-grid error {}", errors[2]);
        // halving the mesh reduces the error by at least 4×
        assert!(
            errors[0] / errors[1] >= 4.0 && errors[1] / errors[2] >= 4.0,
            "refinement ratios: {} {}",
            errors[0] / errors[1],
            errors[1] / errors[2]
        );
    }

    #[test]
    fn galerkin_residual_and_multipliers_vanish_n25() {
        let (dim, weyl, xi) = default_problem(25, 0.4);
        let problem = SectorProblem {
            dim,
            weyl: &weyl,
            window: Window::normalized(100.0),
            amplitude: 1.0,
            offset: xi,
            eps: 1.0,
        };
        let grid = RadialGrid {
            nodes: 1200,
            r_max: 1e4,
        };
        let sol = solve_zbar(&problem, &grid).unwrap();
        assert!(sol.gamma_scale > 0.0);
        assert!(
            sol.galerkin_residual < 1e-10,
            "residual {}",
            sol.galerkin_residual
        );
        let bmax = sol.multipliers.iter().fold(0.0_f64, |m, b| m.max(b.abs()));
        assert!(
            bmax < 1e-8 * sol.gamma_scale,
            "multipliers {bmax} vs scale {}",
            sol.gamma_scale
        );
        assert!(sol.sector_purity > 0.85, "purity {}", sol.sector_purity);
    }

    #[test]
    fn decay_slope_matches_far_field_rate() {
        let (dim, weyl, xi) = default_problem(25, 0.3);
        let problem = SectorProblem {
            dim,
            weyl: &weyl,
            window: Window::normalized(50.0),
            amplitude: 1.0,
            offset: xi,
            eps: 1.0,
        };
        let grid = RadialGrid {
            nodes: 2000,
            r_max: 1e4,
        };
        let sol = solve_zbar(&problem, &grid).unwrap();
        let slope = decay_slope(&sol, 10.0, 400.0);
        let target = 14.0 - dim.nf();
        println!("decay slope {slope} target {target}");
        assert!(
            (slope - target).abs() <= 0.5,
            "slope {slope} vs target {target}"
        );
    }

    #[test]
    fn two_scale_law_and_full_verification() {
        let (dim, weyl, xi) = default_problem(25, 0.3);
        let grid = RadialGrid {
            nodes: 1600,
            r_max: 1e4,
        };
        let report = verify_zbar(&weyl, &dim, 75.0, &xi, 1.0, &grid).unwrap();
        println!("{report:?}");
        assert!(report.scaling_ok, "scaling error {}", report.scaling_error);
        assert!(report.decay_ok, "decay slope {}", report.decay_slope);
        assert!(report.constraint_ok);
        assert!(report.multiplier_ok);
    }

    #[test]
    fn coercivity_proxy_positive_for_high_dimensions() {
        for n in [25usize, 26, 27, 28] {
            let dim = Dimension::new(n).unwrap();
            let grid = RadialGrid {
                nodes: 400,
                r_max: 1e3,
            };
            let lam = sector_min_eigenvalue(&dim, &grid, 1.0, 40).unwrap();
            println!("n = {n}: smallest sector eigenvalue {lam:.6e}");
            assert!(lam > 0.0, "coercivity proxy failed at n = {n}: {lam}");
        }
    }

    #[test]
    fn refinement_driver_converges() {
        let (dim, weyl, xi) = default_problem(25, 0.25);
        let problem = SectorProblem {
            dim,
            weyl: &weyl,
            window: Window::normalized(30.0),
            amplitude: 1.0,
            offset: xi,
            eps: 1.0,
        };
        let grid = RadialGrid {
            nodes: 300,
            r_max: 1e3,
        };
        let (_, change, doublings) = solve_zbar_refined(&problem, &grid, 1e-8).unwrap();
        println!("refinement: change {change} after {doublings} doublings");
        assert!(change < 1e-6);
    }
}
