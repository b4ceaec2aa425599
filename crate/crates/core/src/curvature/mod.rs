//! Tensor calculus for metrics g = exp(h) on coordinate patches of ℝⁿ:
//! metric jets, Ricci and scalar curvature, ΔR, Q-curvature, and the
//! Paneitz operator at a point, with analytic-jet and finite-difference
//! derivative strategies.

pub mod jets;
pub mod metric;
pub mod ops;

pub use jets::{JetSpace, MJet};
pub use metric::{JetMatrix, MetricInput, MetricSample, MetricWorkspace};
pub use ops::{
    bubble_mjet, conformal_q, flat_bilaplacian, h_jets_from_spec, loglog_slope, radial_mjet,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubbles::Bubble;
    use crate::dim::Dimension;
    use crate::perturb::{PerturbSite, PerturbationSpec};
    use crate::weyl::WeylLikeTensor;
    use approx::assert_relative_eq;

    fn flat_input<'a>() -> MetricInput<'a> {
        MetricInput::ExpTensor {
            h_jets: Box::new(|_x, space, ord| {
                let n = space.n;
                (0..n * n).map(|_| MJet::zeros(space, ord)).collect()
            }),
        }
    }

    #[test]
    fn flat_metric_has_zero_curvature() {
        let dim = Dimension::new(5).unwrap();
        let ws = MetricWorkspace::new(dim);
        let x = vec![0.3; 5];
        let sample = ws.curvature_at(&flat_input(), &x).unwrap();
        assert!(sample.ric.iter().all(|v| v.abs() < 1e-12));
        assert!(sample.scal.abs() < 1e-12);
        assert!(sample.q.abs() < 1e-12);
        // g = id
        for a in 0..5 {
            for b in 0..5 {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert_relative_eq!(sample.g.at(a, b).d0, expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn exp_of_commuting_diagonal_tensor() {
        // h = diag(a, −a, 0, …) → g = diag(e^a, e^{−a}, 1, …)
        let n = 6;
        let dim = Dimension::new(n).unwrap();
        let ws = MetricWorkspace::new(dim);
        let a = 0.4;
        let input = MetricInput::ExpTensor {
            h_jets: Box::new(move |_x, space, ord| {
                let n = space.n;
                let mut v: Vec<MJet> = (0..n * n).map(|_| MJet::zeros(space, ord)).collect();
                v[0].d0 = a;
                v[n + 1].d0 = -a;
                v
            }),
        };
        let x = vec![0.0; n];
        let (g, ginv, _) = ws.metric_jets(&input, &x).unwrap();
        assert_relative_eq!(g.at(0, 0).d0, a.exp(), max_relative = 1e-14);
        assert_relative_eq!(g.at(1, 1).d0, (-a).exp(), max_relative = 1e-14);
        assert_relative_eq!(g.at(2, 2).d0, 1.0, max_relative = 1e-14);
        // g · g⁻¹ = I
        let prod = g.mul(&ginv, &ws.space);
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(prod.at(i, j).d0, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn det_exp_trace_free_is_one() {
        // trace-free model h: det(exp(h)) = 1 at sampled points
        let n = 5;
        let dim = Dimension::new(n).unwrap();
        let ws = MetricWorkspace::new(dim);
        let weyl = WeylLikeTensor::from_seed(n, &[(0, 1, 0, 1, 1.0)]).unwrap();
        let spec = PerturbationSpec {
            weyl,
            tau: 20.0,
            sites: vec![PerturbSite {
                mu: 1.0,
                lambda: 0.01,
                rho: 0.05,
                y: vec![0.0; n],
            }],
            big_r: 0.9,
            alpha: 0.3,
        };
        let hj = ops::h_jets_from_spec(&spec);
        let input = MetricInput::ExpTensor { h_jets: Box::new(hj) };
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.05..0.05)).collect();
            let (g, _, _) = ws.metric_jets(&input, &x).unwrap();
            let m = nalgebra::DMatrix::from_fn(n, n, |a, b| g.at(a, b).d0);
            assert_relative_eq!(m.determinant(), 1.0, max_relative = 1e-12);
        }
    }

    fn sphere_conformal_input<'a>(n: usize) -> MetricInput<'a> {
        MetricInput::Conformal {
            phi: Box::new(move |x: &[f64], space: &JetSpace, ord: usize| {
                // φ = 2/(1+|x|²) as a radial jet
                let s: f64 = x.iter().map(|v| v * v).sum();
                let q = 1.0 + s;
                let fjet = crate::jet::Jet4 {
                    d: [
                        2.0 / q,
                        -2.0 / (q * q),
                        4.0 / (q * q * q),
                        -12.0 / (q * q * q * q),
                        48.0 / (q * q * q * q * q),
                    ],
                };
                let rd = crate::tensor::RadialDerivs {
                    fjet,
                    z: x.to_vec(),
                };
                let mut j = radial_mjet(&rd, space);
                j.truncate(ord);
                let _ = n;
                j
            }),
        }
    }

    #[test]
    fn round_sphere_scalar_and_q_curvature() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 5..=8 {
            let dim = Dimension::new(n).unwrap();
            let ws = MetricWorkspace::new(dim);
            let input = sphere_conformal_input(n);
            for _ in 0..3 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.8..0.8)).collect();
                let sample = ws.curvature_at(&input, &x).unwrap();
                let nf = n as f64;
                assert_relative_eq!(
                    sample.scal,
                    nf * (nf - 1.0),
                    max_relative = 1e-8
                );
                assert_relative_eq!(sample.q, dim.sphere_q(), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn paneitz_flat_is_bilaplacian_and_bubble_identity() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 6;
        let dim = Dimension::new(n).unwrap();
        let ws = MetricWorkspace::new(dim);
        let input = flat_input();
        // Gaussian u
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s: f64 = x.iter().map(|v| v * v).sum();
            let e = (-s).exp();
            let fjet = crate::jet::Jet4 {
                d: [e, -e, e, -e, e],
            };
            let rd = crate::tensor::RadialDerivs { fjet, z: x.clone() };
            let u = radial_mjet(&rd, &ws.space);
            let pu = ws.paneitz_apply(&input, &u, &x).unwrap();
            let flat = flat_bilaplacian(&u, &ws.space);
            assert_relative_eq!(pu, flat, max_relative = 1e-10, epsilon = 1e-12);
        }
        // bubble: P u = d(n) u^{(n+4)/(n−4)} on the flat background
        let b = Bubble::new(vec![0.0; n], 1.0).unwrap();
        for _ in 0..10 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let u = bubble_mjet(&b, &dim, &ws.space, &x);
            let pu = ws.paneitz_apply(&input, &u, &x).unwrap();
            let rhs = dim.d() * u.d0.powf(dim.nl_exp());
            assert_relative_eq!(pu, rhs, max_relative = 1e-8);
        }
    }

    #[test]
    fn paneitz_constant_gives_cn_q() {
        // P(1) = c(n) Q for any metric
        let n = 5;
        let dim = Dimension::new(n).unwrap();
        let ws = MetricWorkspace::new(dim);
        let input = sphere_conformal_input(n);
        let x = vec![0.2, -0.1, 0.4, 0.0, 0.3];
        let one = MJet::constant(&ws.space, 4, 1.0);
        let pu = ws.paneitz_apply(&input, &one, &x).unwrap();
        let sample = ws.curvature_at(&input, &x).unwrap();
        assert_relative_eq!(pu, dim.c() * sample.q, max_relative = 1e-9);
    }

    #[test]
    fn conformal_q_of_bubble_is_sphere_constant() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [5usize, 7, 10] {
            let dim = Dimension::new(n).unwrap();
            let space = JetSpace::new(n);
            // any center and scale: conformal-group invariance
            for _ in 0..10 {
                let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let eps: f64 = rng.gen_range(0.3..2.0);
                let b = Bubble::new(center, eps).unwrap();
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let u = bubble_mjet(&b, &dim, &space, &x);
                let q = conformal_q(&u, &dim, &space).unwrap();
                assert_relative_eq!(q, dim.sphere_q(), max_relative = 1e-10);
            }
            // constant u → 0
            let u = MJet::constant(&space, 4, 3.0);
            assert_eq!(conformal_q(&u, &dim, &space).unwrap(), 0.0);
        }
    }

    #[test]
    fn fd_path_matches_analytic_on_sphere() {
        let n = 5;
        let dim = Dimension::new(n).unwrap();
        let ws = MetricWorkspace::new(dim);
        let x = vec![0.25, -0.15, 0.05, 0.3, -0.2];
        let analytic = ws.curvature_at(&sphere_conformal_input(n), &x).unwrap();
        let fd_input = MetricInput::RawFd {
            g: Box::new(move |y: &[f64]| {
                let s: f64 = y.iter().map(|v| v * v).sum();
                let phi2 = (2.0 / (1.0 + s)).powi(2);
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = phi2;
                }
                m
            }),
            base_step: 1e-2,
            target: 1e-5,
        };
        let fd = ws.curvature_at(&fd_input, &x).unwrap();
        assert_relative_eq!(fd.scal, analytic.scal, max_relative = 1e-4);
        assert_relative_eq!(fd.q, analytic.q, max_relative = 1e-3);
    }

    #[test]
    fn paneitz_linearity() {
        let n = 5;
        let dim = Dimension::new(n).unwrap();
        let ws = MetricWorkspace::new(dim);
        let input = sphere_conformal_input(n);
        let x = vec![0.1, 0.2, -0.3, 0.05, 0.15];
        let b1 = Bubble::new(vec![0.0; n], 1.0).unwrap();
        let b2 = Bubble::new(vec![0.3; n], 0.7).unwrap();
        let u = bubble_mjet(&b1, &dim, &ws.space, &x);
        let v = bubble_mjet(&b2, &dim, &ws.space, &x);
        let mut combo = u.scaled(2.0);
        combo.add_assign(&v.scaled(-3.0));
        let p_combo = ws.paneitz_apply(&input, &combo, &x).unwrap();
        let p_u = ws.paneitz_apply(&input, &u, &x).unwrap();
        let p_v = ws.paneitz_apply(&input, &v, &x).unwrap();
        assert_relative_eq!(p_combo, 2.0 * p_u - 3.0 * p_v, max_relative = 1e-10);
    }

    #[test]
    fn conformal_covariance_identity() {
        // P_{u^{4/(n−4)}δ}(v) = u^{−(n+4)/(n−4)} Δ²(u v)
        let n = 6;
        let dim = Dimension::new(n).unwrap();
        let ws = MetricWorkspace::new(dim);
        let b = Bubble::new(vec![0.0; n], 1.0).unwrap();
        // conformal factor φ with g = u^{4/(n−4)} δ = φ² δ, φ = u^{2/(n−4)}
        let bb = b.clone();
        let dd = dim;
        let input = MetricInput::Conformal {
            phi: Box::new(move |x: &[f64], space: &JetSpace, ord: usize| {
                let u = bubble_mjet(&bb, &dd, space, x);
                let v = u.d0;
                let p = 2.0 / (dd.nf() - 4.0);
                let mut c = 1.0;
                let mut outer = [0.0; 5];
                for (k, o) in outer.iter_mut().enumerate() {
                    *o = c * v.powf(p - k as f64);
                    c *= p - k as f64;
                }
                let mut j = u.compose(&outer, space);
                j.truncate(ord);
                j
            }),
        };
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            // v = Gaussian bump
            let s: f64 = x.iter().map(|t| t * t).sum();
            let e = (-0.7 * s).exp();
            let fjet = crate::jet::Jet4 {
                d: [
                    e,
                    -0.7 * e,
                    0.49 * e,
                    -0.343 * e,
                    0.2401 * e,
                ],
            };
            let v = radial_mjet(&crate::tensor::RadialDerivs { fjet, z: x.clone() }, &ws.space);
            let lhs = ws.paneitz_apply(&input, &v, &x).unwrap();
            let u = bubble_mjet(&b, &dim, &ws.space, &x);
            let uv = u.mul(&v, &ws.space);
            let rhs = u.d0.powf(-dim.nl_exp()) * flat_bilaplacian(&uv, &ws.space);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
        }
    }
}
