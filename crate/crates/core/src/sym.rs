//! Sparse symbolic layer: multivariate polynomials with attached radial
//! slots, used to reduce every ℝⁿ integral of the energy machinery to
//! exact sphere moments times 1-D radial quadrature.
//!
//! A `SymField` is Σ_terms P(z) · Π f^{(a)}(u) · Π g^{(b)}(u) · u^p with
//! u = |z|², where f is the perturbation window polynomial and g the
//! bubble radial part. Tensor-side fields are built and differentiated
//! in the x-frame (window centered at the origin), contracted there, and
//! translated once into the bubble frame z = x − ξ; bubble-side fields
//! are native to the z-frame. Products never mix differentiation frames.

use std::collections::HashMap;

use crate::bubbles::Bubble;
use crate::dim::Dimension;
use crate::error::CoreError;
use crate::quad::moments::MultiIndex;
use crate::quad::{self, QuadratureSpec, RadialProfile};
use crate::weyl::WeylLikeTensor;

// ---------------------------------------------------------------------------
// Sparse polynomials
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct Poly {
    pub terms: HashMap<MultiIndex, f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::default();
        if c != 0.0 {
            p.terms.insert(MultiIndex::empty(), c);
        }
        p
    }

    pub fn var(i: usize) -> Self {
        let mut p = Self::default();
        p.terms.insert(MultiIndex::unit(i), 1.0);
        p
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        *self.terms.entry(alpha).or_insert(0.0) += c;
    }

    pub fn add(&mut self, other: &Poly) {
        for (a, &c) in &other.terms {
            self.add_term(a.clone(), c);
        }
    }

    pub fn scale(&self, c: f64) -> Poly {
        let mut p = Poly::zero();
        for (a, &v) in &self.terms {
            p.add_term(a.clone(), c * v);
        }
        p
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                p.add_term(a.mul(b), ca * cb);
            }
        }
        p
    }

    /// Multiply by the single variable z_i.
    pub fn mul_var(&self, i: usize) -> Poly {
        let unit = MultiIndex::unit(i);
        let mut p = Poly::zero();
        for (a, &c) in &self.terms {
            p.add_term(a.mul(&unit), c);
        }
        p
    }

    pub fn derivative(&self, i: usize) -> Poly {
        let mut p = Poly::zero();
        for (a, &c) in &self.terms {
            let pow = a.power(i);
            if pow == 0 {
                continue;
            }
            let mut rest: Vec<(usize, u32)> = a
                .0
                .iter()
                .filter(|&&(v, _)| v as usize != i)
                .map(|&(v, pw)| (v as usize, pw as u32))
                .collect();
            if pow > 1 {
                rest.push((i, pow as u32 - 1));
            }
            p.add_term(MultiIndex::from_pairs(&rest), c * pow as f64);
        }
        p
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.terms.iter().map(|(a, &c)| c * a.eval(z)).sum()
    }

    /// Substitute z → z + c.
    pub fn shift(&self, c: &[f64]) -> Poly {
        let mut out = Poly::zero();
        for (a, &coef) in &self.terms {
            let mut parts: Vec<(MultiIndex, f64)> = vec![(MultiIndex::empty(), coef)];
            for &(v, p) in &a.0 {
                let v = v as usize;
                let cv = c[v];
                let mut next = Vec::with_capacity(parts.len() * (p as usize + 1));
                for (alpha, w) in &parts {
                    let mut binom = 1.0;
                    for k in 0..=p {
                        let term_c = w * binom * cv.powi((p - k) as i32);
                        if term_c != 0.0 {
                            let alpha_k = if k > 0 {
                                alpha.mul(&MultiIndex::from_pairs(&[(v, k as u32)]))
                            } else {
                                alpha.clone()
                            };
                            next.push((alpha_k, term_c));
                        }
                        binom *= (p - k) as f64 / (k as f64 + 1.0);
                    }
                }
                parts = next;
            }
            for (alpha, w) in parts {
                out.add_term(alpha, w);
            }
        }
        out.prune(0.0);
        out
    }

    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, v| v.abs() > tol);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|v| *v == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, v| v.abs().max(m))
    }
}

// ---------------------------------------------------------------------------
// Radial slots
// ---------------------------------------------------------------------------

/// Radial factor Π f^{(a)} · Π g^{(b)} · u^p attached to a polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RadialKey {
    pub f_orders: Vec<u8>,
    pub g_orders: Vec<u8>,
    pub u_pow: u8,
}

impl RadialKey {
    pub fn new(mut f_orders: Vec<u8>, mut g_orders: Vec<u8>, u_pow: u8) -> Self {
        f_orders.sort_unstable();
        g_orders.sort_unstable();
        Self {
            f_orders,
            g_orders,
            u_pow,
        }
    }

    pub fn merge(&self, other: &RadialKey) -> RadialKey {
        let mut f = self.f_orders.clone();
        f.extend_from_slice(&other.f_orders);
        let mut g = self.g_orders.clone();
        g.extend_from_slice(&other.g_orders);
        RadialKey::new(f, g, self.u_pow + other.u_pow)
    }
}

/// The window polynomial f(s) = τ − 1200 s + 2411 s² − 135 s³ + s⁴,
/// evaluated as f(s/λ²) with the scale folded into the derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub tau: f64,
    pub lambda: f64,
}

impl Window {
    pub fn normalized(tau: f64) -> Self {
        Self { tau, lambda: 1.0 }
    }

    /// d^a/ds^a [ f(s/λ²) ] at s.
    pub fn eval(&self, a: u8, s: f64) -> f64 {
        let t = s / (self.lambda * self.lambda);
        let base = match a {
            0 => self.tau - 1200.0 * t + 2411.0 * t * t - 135.0 * t * t * t + t * t * t * t,
            1 => -1200.0 + 4822.0 * t - 405.0 * t * t + 4.0 * t * t * t,
            2 => 4822.0 - 810.0 * t + 12.0 * t * t,
            3 => -810.0 + 24.0 * t,
            4 => 24.0,
            _ => 0.0,
        };
        base / self.lambda.powi(2 * a as i32)
    }
}

pub fn radial_key_eval(
    key: &RadialKey,
    r: f64,
    window: &Window,
    bubble_jet: &dyn Fn(f64) -> [f64; 5],
) -> f64 {
    let u = r * r;
    let mut v = u.powi(key.u_pow as i32);
    for &a in &key.f_orders {
        v *= window.eval(a, u);
    }
    if !key.g_orders.is_empty() {
        let g = bubble_jet(u);
        for &b in &key.g_orders {
            v *= g[b as usize];
        }
    }
    v
}

/// Growth exponent of the radial key (power of r as r → ∞):
/// f^{(a)} ~ r^{2(4−a)}, g^{(b)} ~ r^{−(n−4)−2b}, u^p ~ r^{2p}.
pub fn radial_key_growth(key: &RadialKey, dim: &Dimension) -> f64 {
    let mut p = 2.0 * key.u_pow as f64;
    for &a in &key.f_orders {
        p += 2.0 * (4.0 - a as f64);
    }
    for &b in &key.g_orders {
        p += -(dim.nf() - 4.0) - 2.0 * b as f64;
    }
    p
}

// ---------------------------------------------------------------------------
// SymField
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct SymField {
    pub terms: HashMap<RadialKey, Poly>,
}

impl SymField {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A bare polynomial with no radial slots.
    pub fn from_poly(poly: Poly) -> Self {
        let mut f = Self::zero();
        f.add_part(RadialKey::new(vec![], vec![], 0), poly);
        f
    }

    pub fn add_assign(&mut self, other: &SymField) {
        for (k, p) in &other.terms {
            self.terms
                .entry(k.clone())
                .or_insert_with(Poly::zero)
                .add(p);
        }
    }

    pub fn add_part(&mut self, key: RadialKey, poly: Poly) {
        if poly.is_zero() {
            return;
        }
        self.terms.entry(key).or_insert_with(Poly::zero).add(&poly);
    }

    pub fn scale(&self, c: f64) -> SymField {
        let mut out = SymField::zero();
        for (k, p) in &self.terms {
            out.add_part(k.clone(), p.scale(c));
        }
        out
    }

    pub fn mul(&self, other: &SymField) -> SymField {
        let mut out = SymField::zero();
        for (ka, pa) in &self.terms {
            for (kb, pb) in &other.terms {
                out.add_part(ka.merge(kb), pa.mul(pb));
            }
        }
        out
    }

    /// x-frame derivative ∂_m: valid only for fields with no g-slots
    /// (tensor side), where every f-slot has argument u = |x|².
    pub fn derivative_x(&self, m: usize) -> SymField {
        let mut out = SymField::zero();
        for (key, p) in &self.terms {
            debug_assert!(key.g_orders.is_empty() && key.u_pow == 0);
            // polynomial part
            let dp = p.derivative(m);
            if !dp.is_zero() {
                out.add_part(key.clone(), dp);
            }
            // chain rule per f-slot
            for (idx, &a) in key.f_orders.iter().enumerate() {
                if a >= 4 {
                    continue; // f^{(5)} = 0
                }
                let mut orders = key.f_orders.clone();
                orders[idx] = a + 1;
                out.add_part(
                    RadialKey::new(orders, vec![], 0),
                    p.mul_var(m).scale(2.0),
                );
            }
        }
        out
    }

    /// Translate a tensor-side (x-frame) field to the bubble frame
    /// z = x − center: shifts polynomials and expands every f-slot as
    /// f^{(a)}(u+v) = Σ_i f^{(a+i)}(u) v^i / i!, v = 2 c·z + |c|².
    pub fn translate(&self, center: &[f64]) -> Result<SymField, CoreError> {
        let nnz = center.iter().filter(|&&c| c != 0.0).count();
        if nnz == 0 {
            return Ok(self.clone());
        }
        if nnz > 4 {
            return Err(CoreError::Unsupported(format!(
                "offset with {nnz} nonzero components: symbolic assembly caps at 4"
            )));
        }
        let mut v_poly = Poly::constant(center.iter().map(|c| c * c).sum());
        for (i, &c) in center.iter().enumerate() {
            if c != 0.0 {
                v_poly.add_term(MultiIndex::unit(i), 2.0 * c);
            }
        }
        let mut out = SymField::zero();
        for (key, p) in &self.terms {
            debug_assert!(key.g_orders.is_empty() && key.u_pow == 0);
            let pz = p.shift(center);
            // expand the multiset of f-slots jointly
            let mut parts: Vec<(Vec<u8>, Poly)> = vec![(vec![], pz)];
            for &a in &key.f_orders {
                let mut next: Vec<(Vec<u8>, Poly)> = Vec::new();
                for (orders, poly) in &parts {
                    let mut vpow = Poly::constant(1.0);
                    let mut fact = 1.0;
                    for i in 0..=(4u8.saturating_sub(a)) {
                        if i > 0 {
                            vpow = vpow.mul(&v_poly);
                            fact *= i as f64;
                        }
                        let mut o = orders.clone();
                        o.push(a + i);
                        next.push((o, poly.mul(&vpow).scale(1.0 / fact)));
                    }
                }
                parts = next;
            }
            for (orders, poly) in parts {
                out.add_part(RadialKey::new(orders, vec![], 0), poly);
            }
        }
        out.prune(0.0);
        Ok(out)
    }

    pub fn prune(&mut self, tol: f64) {
        for p in self.terms.values_mut() {
            p.prune(tol);
        }
        self.terms.retain(|_, p| !p.is_zero());
    }

    pub fn eval(&self, z: &[f64], window: &Window, bubble_jet: &dyn Fn(f64) -> [f64; 5]) -> f64 {
        let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.terms
            .iter()
            .map(|(k, p)| radial_key_eval(k, r, window, bubble_jet) * p.eval(z))
            .sum()
    }

    pub fn term_count(&self) -> usize {
        self.terms.values().map(|p| p.terms.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|p| p.is_zero())
    }

    /// ∫_{ℝⁿ} field dz via sphere moments × radial quadrature; every
    /// term must pass the convergence gate.
    pub fn integrate(
        &self,
        dim: &Dimension,
        window: &Window,
        bubble: &Bubble,
        spec: &QuadratureSpec,
    ) -> Result<(f64, f64), CoreError> {
        let n = dim.n();
        let mut total = 0.0;
        let mut err = 0.0;
        let bj = bubble_sjet_fn(bubble, dim);
        for (key, poly) in &self.terms {
            let mut weight_by_degree: HashMap<usize, f64> = HashMap::new();
            for (alpha, &c) in &poly.terms {
                let m = quad::sphere_moment(alpha, n)?;
                if m != 0.0 && c != 0.0 {
                    *weight_by_degree.entry(alpha.degree()).or_insert(0.0) += c * m;
                }
            }
            let growth = radial_key_growth(key, dim);
            for (deg, wgt) in weight_by_degree {
                if wgt == 0.0 {
                    continue;
                }
                let hint = -(growth + deg as f64);
                if hint <= n as f64 {
                    return Err(CoreError::ConvergenceGate { hint, n });
                }
                let prof = RadialProfile::new(
                    |r: f64| radial_key_eval(key, r, window, &bj) * r.powi(deg as i32),
                    hint,
                );
                let (v, e) = quad::radial_integrate(&prof, n, spec)?;
                total += wgt * v;
                err += wgt.abs() * e;
            }
        }
        Ok((total, err))
    }

    /// Worst-case decay gate of the whole field: the minimum over terms
    /// of the effective hint (pass requires > n).
    pub fn min_decay_hint(&self, dim: &Dimension) -> f64 {
        let mut hint = f64::INFINITY;
        for (key, poly) in &self.terms {
            let growth = radial_key_growth(key, dim);
            for alpha in poly.terms.keys() {
                hint = hint.min(-(growth + alpha.degree() as f64));
            }
        }
        hint
    }
}

/// Bubble radial jet [g, g', g'', g''', g''''](u) about the bubble's own
/// center, u = ρ².
pub fn bubble_sjet_fn(bubble: &Bubble, dim: &Dimension) -> impl Fn(f64) -> [f64; 5] + Sync + Clone {
    let eps = bubble.eps;
    let m = (dim.nf() - 4.0) / 2.0;
    move |u: f64| {
        let q = eps * eps + u;
        let amp = (2.0 * eps).powf(m);
        let mut out = [0.0; 5];
        let mut rising = 1.0;
        let mut sign = 1.0;
        for (p, o) in out.iter_mut().enumerate() {
            *o = sign * rising * amp * q.powf(-m - p as f64);
            rising *= m + p as f64;
            sign = -sign;
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Tensor side: H̄ components in the x-frame
// ---------------------------------------------------------------------------

/// x-frame components T_{kj} = f(|x|²) Σ_{pq} W_{kpjq} x_p x_q and the
/// derivative tables the energy terms consume. All fields carry only
/// f-slots; contract here, translate once.
pub struct TensorSide {
    pub n: usize,
    /// T_{kj}, n².
    pub d0: Vec<SymField>,
    /// ∂_m T_{kj}, n³ (index (m,k,j)).
    pub d1: Vec<SymField>,
    /// Δ T_{kj}, n².
    pub lap: Vec<SymField>,
    /// ∂_m Δ T_{kj}, n³ (index (m,k,j)).
    pub dlap: Vec<SymField>,
}

impl TensorSide {
    pub fn build(w: &WeylLikeTensor) -> Self {
        let n = w.n;
        let mut d0: Vec<SymField> = vec![SymField::zero(); n * n];
        for (&(i, p, k, q), &v) in &w.entries {
            let (i, p, k, q) = (i as usize, p as usize, k as usize, q as usize);
            let mut poly = Poly::zero();
            poly.add_term(MultiIndex::from_pairs(&[(p, 1), (q, 1)]), v);
            d0[i * n + k].add_part(RadialKey::new(vec![0], vec![], 0), poly);
        }
        let mut d1: Vec<SymField> = vec![SymField::zero(); n * n * n];
        for m in 0..n {
            for k in 0..n {
                for j in 0..n {
                    d1[(m * n + k) * n + j] = d0[k * n + j].derivative_x(m);
                }
            }
        }
        let mut lap: Vec<SymField> = vec![SymField::zero(); n * n];
        for k in 0..n {
            for j in 0..n {
                let mut acc = SymField::zero();
                for m in 0..n {
                    acc.add_assign(&d1[(m * n + k) * n + j].derivative_x(m));
                }
                acc.prune(0.0);
                lap[k * n + j] = acc;
            }
        }
        let mut dlap: Vec<SymField> = vec![SymField::zero(); n * n * n];
        for m in 0..n {
            for k in 0..n {
                for j in 0..n {
                    dlap[(m * n + k) * n + j] = lap[k * n + j].derivative_x(m);
                }
            }
        }
        Self { n, d0, d1, lap, dlap }
    }

    #[inline]
    pub fn t(&self, k: usize, j: usize) -> &SymField {
        &self.d0[k * self.n + j]
    }
    #[inline]
    pub fn dt(&self, m: usize, k: usize, j: usize) -> &SymField {
        &self.d1[(m * self.n + k) * self.n + j]
    }
    #[inline]
    pub fn lap_t(&self, k: usize, j: usize) -> &SymField {
        &self.lap[k * self.n + j]
    }
    #[inline]
    pub fn dlap_t(&self, m: usize, k: usize, j: usize) -> &SymField {
        &self.dlap[(m * self.n + k) * self.n + j]
    }
}

// ---------------------------------------------------------------------------
// Bubble side: derivative patterns of w about its own center (z-frame)
// ---------------------------------------------------------------------------

pub struct BubbleSide {
    pub n: usize,
}

impl BubbleSide {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// w itself.
    pub fn w(&self) -> SymField {
        let mut f = SymField::zero();
        f.add_part(RadialKey::new(vec![], vec![0], 0), Poly::constant(1.0));
        f
    }

    /// ∂_i w = 2 g' z_i.
    pub fn dw(&self, i: usize) -> SymField {
        let mut f = SymField::zero();
        f.add_part(RadialKey::new(vec![], vec![1], 0), Poly::var(i).scale(2.0));
        f
    }

    /// ∂_i∂_j w = 2 g' δ_ij + 4 g'' z_i z_j.
    pub fn ddw(&self, i: usize, j: usize) -> SymField {
        let mut f = SymField::zero();
        if i == j {
            f.add_part(RadialKey::new(vec![], vec![1], 0), Poly::constant(2.0));
        }
        f.add_part(
            RadialKey::new(vec![], vec![2], 0),
            Poly::var(i).mul(&Poly::var(j)).scale(4.0),
        );
        f
    }

    /// ∂_i∂_j∂_k w.
    pub fn dddw(&self, i: usize, j: usize, k: usize) -> SymField {
        let mut f = SymField::zero();
        let mut p2 = Poly::zero();
        if i == j {
            p2.add(&Poly::var(k).scale(4.0));
        }
        if i == k {
            p2.add(&Poly::var(j).scale(4.0));
        }
        if j == k {
            p2.add(&Poly::var(i).scale(4.0));
        }
        if !p2.is_zero() {
            f.add_part(RadialKey::new(vec![], vec![2], 0), p2);
        }
        f.add_part(
            RadialKey::new(vec![], vec![3], 0),
            Poly::var(i).mul(&Poly::var(j)).mul(&Poly::var(k)).scale(8.0),
        );
        f
    }

    /// ∂_i Δw = 2 A' z_i, A' = (2n+4) g'' + 4 u g'''.
    pub fn d_lap_w(&self, dim: &Dimension, i: usize) -> SymField {
        let mut f = SymField::zero();
        let zi = Poly::var(i);
        f.add_part(
            RadialKey::new(vec![], vec![2], 0),
            zi.scale(2.0 * (2.0 * dim.nf() + 4.0)),
        );
        f.add_part(RadialKey::new(vec![], vec![3], 1), zi.scale(8.0));
        f
    }

    /// ∂_i∂_j Δw = 2 A' δ_ij + 4 A'' z_i z_j, A'' = (2n+8) g''' + 4 u g''''.
    pub fn dd_lap_w(&self, dim: &Dimension, i: usize, j: usize) -> SymField {
        let mut f = SymField::zero();
        if i == j {
            f.add_part(
                RadialKey::new(vec![], vec![2], 0),
                Poly::constant(2.0 * (2.0 * dim.nf() + 4.0)),
            );
            f.add_part(RadialKey::new(vec![], vec![3], 1), Poly::constant(8.0));
        }
        let zz = Poly::var(i).mul(&Poly::var(j));
        f.add_part(
            RadialKey::new(vec![], vec![3], 0),
            zz.scale(4.0 * (2.0 * dim.nf() + 8.0)),
        );
        f.add_part(RadialKey::new(vec![], vec![4], 1), zz.scale(16.0));
        f
    }
}
