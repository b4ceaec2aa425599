//! Angular reduction: the symbolic Γ̄ field about the bubble center, its
//! projection onto the trace-free degree-2 sector spanned by M = H(ξ),
//! and the low-degree projections that feed the constraint blocks.

use crate::dim::Dimension;
use crate::error::CoreError;
use crate::quad::moments::{sphere_moment, MultiIndex};
use crate::sym::{radial_key_eval, radial_key_growth, BubbleSide, Poly, RadialKey, SymField, TensorSide, Window};
use crate::weyl::WeylLikeTensor;

/// The potential coefficient of the linearized problem,
/// ((n+4)/(n−4))·d(n), kept in one place.
pub fn potential_coeff(dim: &Dimension) -> f64 {
    dim.nl_exp() * dim.d()
}

/// Γ̄ as a symbolic field in the bubble frame: Σ P(z)·f-slots·g-slots.
/// `xi` is the bubble center (the window sits at the origin).
pub fn gamma_frame_field(
    weyl: &WeylLikeTensor,
    dim: &Dimension,
    xi: &[f64],
) -> Result<SymField, CoreError> {
    let n = dim.n();
    let nf = dim.nf();
    let ts = TensorSide::build(weyl);
    let bs = BubbleSide::new(n);

    let mut acc_x = SymField::zero();
    // assemble in the x-frame first where the tensor side lives; bubble
    // factors are z-frame native, so the contraction must happen after
    // translation. Translate per component of the tensor side instead.
    let mut out = SymField::zero();
    for k in 0..n {
        for j in 0..n {
            // 2 T_{kj} ∂_k∂_j Δw
            let t = ts.t(k, j);
            if !t.is_zero() {
                let tz = t.translate(xi)?;
                out.add_assign(&tz.mul(&bs.dd_lap_w(dim, k, j)).scale(2.0));
            }
            // (n/(n−2)) ΔT_{kj} ∂_k∂_j w
            let lt = ts.lap_t(k, j);
            if !lt.is_zero() {
                let ltz = lt.translate(xi)?;
                out.add_assign(&ltz.mul(&bs.ddw(k, j)).scale(nf / (nf - 2.0)));
            }
            // 2 Σ_s ∂_s T_{kj} ∂_k∂_j∂_s w
            for s_ in 0..n {
                let dt = ts.dt(s_, k, j);
                if !dt.is_zero() {
                    let dtz = dt.translate(xi)?;
                    out.add_assign(&dtz.mul(&bs.dddw(k, j, s_)).scale(2.0));
                }
            }
        }
        // (2/(n−2)) Σ_j ∂_j ΔT_{kj} ∂_k w (identically zero for the
        // divergence-free model; assembled anyway so the cancellation is
        // computed, not assumed)
        for j in 0..n {
            let dlt = ts.dlap_t(j, k, j);
            if !dlt.is_zero() {
                let dltz = dlt.translate(xi)?;
                out.add_assign(&dltz.mul(&bs.dw(k)).scale(2.0 / (nf - 2.0)));
            }
        }
    }
    acc_x.add_assign(&out);
    acc_x.prune(1e-300);
    Ok(acc_x)
}

/// Sector data: the normalized degree-2 direction Y = M(θ,θ)/‖M(θ,θ)‖
/// with M = H(ξ), plus cached angular weights.
pub struct SectorBasis {
    pub n: usize,
    /// M = H(ξ) (symmetric trace-free); zero when ξ = 0.
    pub m: Vec<f64>,
    /// ‖M(θ,θ)‖_{L²(S^{n−1})}
    pub norm_y: f64,
}

impl SectorBasis {
    pub fn build(weyl: &WeylLikeTensor, xi: &[f64]) -> Result<Self, CoreError> {
        let n = weyl.n;
        let m = weyl.h_matrix(xi);
        // ∫ (M(θ,θ))² dθ = ω/(n(n+2)) ((tr M)² + 2|M|²), tr M = 0
        let frob: f64 = m.iter().map(|v| v * v).sum();
        let omega = crate::quad::gammafn::sphere_area(n);
        let norm_y = (2.0 * frob * omega / (n as f64 * (n as f64 + 2.0))).sqrt();
        Ok(Self { n, m, norm_y })
    }

    pub fn is_degenerate(&self) -> bool {
        self.norm_y == 0.0
    }

    /// Y(θ) for a unit vector θ.
    pub fn y_value(&self, theta: &[f64]) -> f64 {
        let n = self.n;
        let mut v = 0.0;
        for i in 0..n {
            for j in 0..n {
                v += self.m[i * n + j] * theta[i] * theta[j];
            }
        }
        v / self.norm_y
    }
}

/// Radial profiles of the angular projections of a symbolic field:
/// evaluates p_Y(r) = ∫ F(ξ+rθ) Y(θ) dθ (and the degree-0/1 analogues)
/// by precontracting every polynomial monomial with exact moments.
pub struct AngularProjection {
    /// per (radial key, degree): the moment-weighted coefficient
    terms: Vec<(RadialKey, usize, f64)>,
}

impl AngularProjection {
    /// Projection onto the normalized Y of the sector basis.
    pub fn onto_y(field: &SymField, basis: &SectorBasis, n: usize) -> Result<Self, CoreError> {
        let mut terms = Vec::new();
        for (key, poly) in &field.terms {
            let mut by_degree: std::collections::HashMap<usize, f64> = Default::default();
            for (alpha, &c) in &poly.terms {
                if c == 0.0 {
                    continue;
                }
                // ∫ θ^α Y dθ = Σ_{ij} M_ij moment(α+e_i+e_j) / ‖Y‖
                let mut w = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let mij = basis.m[i * n + j];
                        if mij == 0.0 {
                            continue;
                        }
                        let shifted = alpha
                            .mul(&MultiIndex::unit(i))
                            .mul(&MultiIndex::unit(j));
                        w += mij * sphere_moment(&shifted, n)?;
                    }
                }
                if w != 0.0 {
                    *by_degree.entry(alpha.degree()).or_insert(0.0) += c * w / basis.norm_y;
                }
            }
            for (deg, w) in by_degree {
                terms.push((key.clone(), deg, w));
            }
        }
        Ok(Self { terms })
    }

    /// Projection onto the constant direction 1/√ω (degree 0).
    pub fn onto_constant(field: &SymField, n: usize) -> Result<Self, CoreError> {
        let omega = crate::quad::gammafn::sphere_area(n);
        let mut terms = Vec::new();
        for (key, poly) in &field.terms {
            let mut by_degree: std::collections::HashMap<usize, f64> = Default::default();
            for (alpha, &c) in &poly.terms {
                let w = sphere_moment(alpha, n)?;
                if w != 0.0 && c != 0.0 {
                    *by_degree.entry(alpha.degree()).or_insert(0.0) += c * w / omega.sqrt();
                }
            }
            for (deg, w) in by_degree {
                terms.push((key.clone(), deg, w));
            }
        }
        Ok(Self { terms })
    }

    /// Projection onto the normalized coordinate direction θ_k.
    pub fn onto_coordinate(field: &SymField, k: usize, n: usize) -> Result<Self, CoreError> {
        let omega = crate::quad::gammafn::sphere_area(n);
        let norm = (omega / n as f64).sqrt();
        let mut terms = Vec::new();
        for (key, poly) in &field.terms {
            let mut by_degree: std::collections::HashMap<usize, f64> = Default::default();
            for (alpha, &c) in &poly.terms {
                let shifted = alpha.mul(&MultiIndex::unit(k));
                let w = sphere_moment(&shifted, n)?;
                if w != 0.0 && c != 0.0 {
                    *by_degree.entry(alpha.degree()).or_insert(0.0) += c * w / norm;
                }
            }
            for (deg, w) in by_degree {
                terms.push((key.clone(), deg, w));
            }
        }
        Ok(Self { terms })
    }

    pub fn eval(&self, r: f64, window: &Window, bubble_jet: &dyn Fn(f64) -> [f64; 5]) -> f64 {
        self.terms
            .iter()
            .map(|(key, deg, w)| w * radial_key_eval(key, r, window, bubble_jet) * r.powi(*deg as i32))
            .sum()
    }

    /// Worst decay hint over the projection's terms (profile power of r).
    pub fn decay_hint(&self, dim: &Dimension) -> f64 {
        self.terms
            .iter()
            .map(|(key, deg, _)| -(radial_key_growth(key, dim) + *deg as f64))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.iter().all(|&(_, _, w)| w == 0.0)
    }

    pub fn max_weight(&self) -> f64 {
        self.terms.iter().map(|&(_, _, w)| w.abs()).fold(0.0, f64::max)
    }
}

/// ∫ F(ξ+rθ)² dθ at radius r: the total angular L² content, used for the
/// sector-purity diagnostic.
pub fn angular_l2_sq(
    field: &SymField,
    dim: &Dimension,
    r: f64,
    window: &Window,
    bubble_jet: &dyn Fn(f64) -> [f64; 5],
) -> Result<f64, CoreError> {
    let sq = field.mul(field);
    let n = dim.n();
    let mut total = 0.0;
    for (key, poly) in &sq.terms {
        let kv = radial_key_eval(key, r, window, bubble_jet);
        for (alpha, &c) in &poly.terms {
            if c == 0.0 {
                continue;
            }
            let m = sphere_moment(alpha, n)?;
            if m != 0.0 {
                total += c * kv * m * r.powi(alpha.degree() as i32);
            }
        }
    }
    Ok(total)
}

/// Poly helper: the polynomial |z|² (used in tests).
pub fn norm_sq_poly(n: usize) -> Poly {
    let mut p = Poly::zero();
    for i in 0..n {
        p.add_term(MultiIndex::from_pairs(&[(i, 2)]), 1.0);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubbles::Bubble;
    use crate::perturb::gamma_bar_eval;
    use crate::sym::bubble_sjet_fn;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gamma_bar_field_matches_pointwise_contraction() {
        let n = 7;
        let dim = Dimension::new(n).unwrap();
        let weyl = WeylLikeTensor::from_seed(n, &[(0, 1, 0, 1, 1.0)]).unwrap();
        let tau = 23.0;
        let mut xi = vec![0.0; n];
        xi[0] = 0.4;
        xi[1] = -0.25;
        let b = Bubble::new(xi.clone(), 0.9).unwrap();
        let field = gamma_frame_field(&weyl, &dim, &xi).unwrap();
        let window = Window::normalized(tau);
        let bj = bubble_sjet_fn(&b, &dim);
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..25 {
            let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let x: Vec<f64> = z.iter().zip(&xi).map(|(a, c)| a + c).collect();
            let sym = field.eval(&z, &window, &bj);
            let direct = gamma_bar_eval(&weyl, tau, &b, &dim, &x);
            assert_relative_eq!(sym, direct, max_relative = 1e-9, epsilon = 1e-10);
        }
    }

    #[test]
    fn gamma_bar_vanishes_at_centered_bubble() {
        let n = 6;
        let dim = Dimension::new(n).unwrap();
        let weyl = WeylLikeTensor::from_seed(n, &[(0, 1, 0, 1, 1.0)]).unwrap();
        let xi = vec![0.0; n];
        let b = Bubble::new(xi.clone(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..50 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let v = gamma_bar_eval(&weyl, 31.0, &b, &dim, &x);
            assert!(v.abs() < 1e-12, "Γ̄(0,ε) must vanish identically, got {v}");
        }
        let field = gamma_frame_field(&weyl, &dim, &xi).unwrap();
        let window = Window::normalized(31.0);
        let bj = bubble_sjet_fn(&b, &dim);
        for _ in 0..20 {
            let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(field.eval(&z, &window, &bj).abs() < 1e-12);
        }
    }

    #[test]
    fn low_degree_projections_vanish_and_sector_dominates() {
        let n = 8;
        let dim = Dimension::new(n).unwrap();
        let weyl = WeylLikeTensor::from_seed(n, &[(0, 1, 0, 1, 1.0)]).unwrap();
        let mut xi = vec![0.0; n];
        xi[0] = 0.3;
        let b = Bubble::new(xi.clone(), 1.0).unwrap();
        let field = gamma_frame_field(&weyl, &dim, &xi).unwrap();
        let basis = SectorBasis::build(&weyl, &xi).unwrap();
        assert!(!basis.is_degenerate());
        let window = Window::normalized(17.0);
        let bj = bubble_sjet_fn(&b, &dim);

        let p0 = AngularProjection::onto_constant(&field, n).unwrap();
        let py = AngularProjection::onto_y(&field, &basis, n).unwrap();
        let mut max_p0: f64 = 0.0;
        let mut max_py: f64 = 0.0;
        for j in 1..40 {
            let r = j as f64 * 0.25;
            max_p0 = max_p0.max(p0.eval(r, &window, &bj).abs());
            max_py = max_py.max(py.eval(r, &window, &bj).abs());
        }
        assert!(max_py > 0.0, "sector content must be nonzero for off-center bubble");
        assert!(
            max_p0 <= 1e-10 * max_py,
            "degree-0 projection {max_p0} vs sector {max_py}"
        );
        for k in 0..n {
            let p1 = AngularProjection::onto_coordinate(&field, k, n).unwrap();
            let mut max_p1: f64 = 0.0;
            for j in 1..40 {
                let r = j as f64 * 0.25;
                max_p1 = max_p1.max(p1.eval(r, &window, &bj).abs());
            }
            assert!(
                max_p1 <= 1e-10 * max_py,
                "degree-1 projection {max_p1} vs sector {max_py} at k={k}"
            );
        }

        // sector purity at a handful of radii: the degree-2 Y-content
        // carries most of the angular L² mass for small |ξ|
        for &r in &[0.5, 1.0, 2.0] {
            let total = angular_l2_sq(&field, &dim, r, &window, &bj).unwrap();
            let y = py.eval(r, &window, &bj);
            let purity = y * y / total.max(1e-300);
            assert!(purity > 0.9, "purity {purity} at r = {r}");
        }
    }
}
