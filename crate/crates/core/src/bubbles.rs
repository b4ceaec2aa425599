//! The explicit bubble family, its derivatives to fourth order, the
//! orthogonal φ family, smooth cutoffs, and glued multi-bubbles.

use serde::{Deserialize, Serialize};

use crate::dim::Dimension;
use crate::error::CoreError;
use crate::jet::Jet4;
use crate::quad::{self, QuadratureSpec};
use crate::tensor::{DerivTensor, RadialDerivs};

/// A center/scale pair indexing the explicit solution family
/// w(x) = (2ε/(ε²+|x−ξ|²))^{(n−4)/2} of Δ²w = d(n) w^{(n+4)/(n−4)}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bubble {
    pub center: Vec<f64>,
    pub eps: f64,
}

impl Bubble {
    pub fn new(center: Vec<f64>, eps: f64) -> Result<Self, CoreError> {
        if !(eps > 0.0) {
            return Err(CoreError::NonPositiveScale { value: eps });
        }
        Ok(Self { center, eps })
    }

    fn z(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).map(|(a, b)| a - b).collect()
    }

    /// Jet in s = |x−ξ|² of the radial part g(s) = (2ε)^m (ε²+s)^{−m},
    /// m = (n−4)/2. Derivatives g^{(p)} = (−1)^p (m)_p (2ε)^m (ε²+s)^{−m−p}.
    pub fn radial_jet(&self, dim: &Dimension, s: f64) -> Jet4 {
        let m = (dim.nf() - 4.0) / 2.0;
        let q = self.eps * self.eps + s;
        let amp = (2.0 * self.eps).powf(m);
        let mut d = [0.0; 5];
        let mut rising = 1.0;
        let mut sign = 1.0;
        for (p, dp) in d.iter_mut().enumerate() {
            *dp = sign * rising * amp * q.powf(-m - p as f64);
            rising *= m + p as f64;
            sign = -sign;
        }
        Jet4 { d }
    }

    pub fn derivs_at(&self, dim: &Dimension, x: &[f64]) -> RadialDerivs {
        let z = self.z(x);
        let s: f64 = z.iter().map(|v| v * v).sum();
        RadialDerivs {
            fjet: self.radial_jet(dim, s),
            z,
        }
    }

    pub fn value(&self, dim: &Dimension, x: &[f64]) -> f64 {
        let s: f64 = self.z(x).iter().map(|v| v * v).sum();
        self.radial_value(dim, s)
    }

    pub fn radial_value(&self, dim: &Dimension, s: f64) -> f64 {
        let m = (dim.nf() - 4.0) / 2.0;
        (2.0 * self.eps / (self.eps * self.eps + s)).powf(m)
    }

    /// ∂w/∂ε as a function of ρ² = s: (m/ε) w (s − ε²)/(s + ε²).
    pub fn eps_derivative(&self, dim: &Dimension, s: f64) -> f64 {
        let m = (dim.nf() - 4.0) / 2.0;
        let e2 = self.eps * self.eps;
        m / self.eps * self.radial_value(dim, s) * (s - e2) / (s + e2)
    }

    /// The linearization potential w^{8/(n−4)}(ρ) = (2ε/(ε²+ρ²))⁴.
    pub fn potential(&self, rho: f64) -> f64 {
        let q = self.eps * self.eps + rho * rho;
        (2.0 * self.eps / q).powi(4)
    }
}

/// Closed-form evaluation of the bubble or its derivative tensor.
pub fn bubble_eval(
    b: &Bubble,
    dim: &Dimension,
    x: &[f64],
    order: usize,
) -> Result<DerivTensor, CoreError> {
    if order > 4 {
        return Err(CoreError::OrderTooHigh { order });
    }
    Ok(b.derivs_at(dim, x).order(order, dim.n()))
}

/// Δ²w − d(n) w^{(n+4)/(n−4)} from closed-form fourth derivatives;
/// identically zero for exact bubbles up to rounding.
pub fn bubble_pde_residual(b: &Bubble, dim: &Dimension, x: &[f64]) -> f64 {
    let rd = b.derivs_at(dim, x);
    let w = rd.fjet.d[0];
    rd.bilaplacian(dim.n()) - dim.d() * w.powf(dim.nl_exp())
}

/// φ_(ξ,ε,k): the ε-derivative direction for k = 0, translation
/// directions for k = 1..n, in their explicit closed forms.
pub fn phi_eval(b: &Bubble, dim: &Dimension, k: usize, x: &[f64]) -> Result<f64, CoreError> {
    let n = dim.n();
    if k > n {
        return Err(CoreError::Unsupported(format!(
            "phi index k = {k} outside 0..={n}"
        )));
    }
    let z = b.z(x);
    let s: f64 = z.iter().map(|v| v * v).sum();
    let e2 = b.eps * b.eps;
    let q = e2 + s;
    let head = (2.0 * b.eps / q).powf((dim.nf() + 4.0) / 2.0);
    Ok(if k == 0 {
        head * (s - e2) / q
    } else {
        head * 2.0 * b.eps * z[k - 1] / q
    })
}

/// Radial factor of φ_k for k ≥ 1: φ_k(x) = phi_k_radial(ρ) · z_k.
pub fn phi_k_radial(b: &Bubble, dim: &Dimension, rho: f64) -> f64 {
    let q = b.eps * b.eps + rho * rho;
    (2.0 * b.eps / q).powf((dim.nf() + 4.0) / 2.0) * 2.0 * b.eps / q
}

/// φ_0 as a radial profile of ρ.
pub fn phi_0_radial(b: &Bubble, dim: &Dimension, rho: f64) -> f64 {
    let e2 = b.eps * b.eps;
    let s = rho * rho;
    let q = e2 + s;
    (2.0 * b.eps / q).powf((dim.nf() + 4.0) / 2.0) * (s - e2) / q
}

// ---------------------------------------------------------------------------
// Cutoff
// ---------------------------------------------------------------------------

/// Smooth cutoff: 1 on |x−q| ≤ t, 0 on |x−q| ≥ 2t, built from the
/// standard exp(−1/s) partition. C^∞ with |∂^i_ρ η| ≤ c t^{−i}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cutoff {
    pub radius: f64,
    pub anchor: Vec<f64>,
}

impl Cutoff {
    pub fn new(radius: f64, anchor: Vec<f64>) -> Result<Self, CoreError> {
        if !(radius > 0.0) {
            return Err(CoreError::NonPositiveRadius { value: radius });
        }
        Ok(Self { radius, anchor })
    }
}

/// Jet (in τ) of the profile η: η = 1 for τ ≤ 1, 0 for τ ≥ 2,
/// η(τ) = ψ(2−τ) in between with ψ(s) = B(s)/(B(s)+B(1−s)), B(s)=e^{−1/s}.
pub fn eta_jet(tau: f64) -> Jet4 {
    if tau <= 1.0 {
        return Jet4::constant(1.0);
    }
    if tau >= 2.0 {
        return Jet4::constant(0.0);
    }
    let s = Jet4 {
        d: [2.0 - tau, -1.0, 0.0, 0.0, 0.0],
    };
    let b = bump(&s);
    let one_minus = Jet4::constant(1.0).sub(&s);
    let b2 = bump(&one_minus);
    b.div(&b.add(&b2))
}

fn bump(s: &Jet4) -> Jet4 {
    // exp(−1/s); s is guaranteed in (0,1) here
    s.recip().scale(-1.0).exp()
}

pub fn eta_value(tau: f64) -> f64 {
    eta_jet(tau).d[0]
}

/// i-th radial derivative of the cutoff at x (order 0 = value):
/// d^i/dρ^i η(ρ/t) = η^{(i)}(ρ/t) / t^i.
pub fn cutoff_eval(c: &Cutoff, x: &[f64], order: usize) -> Result<f64, CoreError> {
    if order > 4 {
        return Err(CoreError::OrderTooHigh { order });
    }
    let rho: f64 = x
        .iter()
        .zip(&c.anchor)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let jet = eta_jet(rho / c.radius);
    Ok(jet.d[order] / c.radius.powi(order as i32))
}

/// Jet in s = ρ² of the spatial cutoff x ↦ η(|x−q|/t); the plateau and
/// the exterior short-circuit to constants (√s is only needed where the
/// profile actually varies).
pub fn cutoff_sjet(c: &Cutoff, s: f64) -> Jet4 {
    let t2 = c.radius * c.radius;
    if s <= t2 {
        return Jet4::constant(1.0);
    }
    if s >= 4.0 * t2 {
        return Jet4::constant(0.0);
    }
    let rho_jet = Jet4::variable(s).powf(0.5);
    let tau_jet = rho_jet.scale(1.0 / c.radius);
    let eta = eta_jet(tau_jet.d[0]);
    // compose η(τ(s)) with τ as inner jet
    tau_jet.compose(&eta.d)
}

/// Measured constant c with |η^{(i)}(τ)| τ^i ≤ c for i = 1..4 over a
/// dense τ-grid; the profile never fixes it analytically, so the
/// implementation reports its own.
pub fn cutoff_derivative_constant() -> f64 {
    let mut c: f64 = 0.0;
    for j in 0..=4000 {
        let tau = 1.0 + j as f64 / 4000.0;
        let jet = eta_jet(tau);
        for i in 1..=4 {
            c = c.max(jet.d[i].abs() * tau.powi(i as i32));
        }
    }
    c
}

// ---------------------------------------------------------------------------
// Multi-bubble
// ---------------------------------------------------------------------------

/// Glued ℓ-bubble configuration: sites (ξ_i, ε_i, r_i) inside B_R with
/// the separation and comparability constraints of the parameter domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiBubbleConfig {
    pub sites: Vec<BubbleSite>,
    pub alpha: f64,
    pub big_r: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BubbleSite {
    pub center: Vec<f64>,
    pub eps: f64,
    pub r: f64,
}

impl MultiBubbleConfig {
    /// Membership check; the first violated clause is named.
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.alpha > 0.0) {
            return Err(CoreError::InvalidSpec {
                reason: format!("alpha must be positive, got {}", self.alpha),
            });
        }
        if !(self.big_r > 0.0) {
            return Err(CoreError::InvalidSpec {
                reason: format!("R must be positive, got {}", self.big_r),
            });
        }
        for (i, s) in self.sites.iter().enumerate() {
            if !(s.eps > 0.0) {
                return Err(CoreError::NonPositiveScale { value: s.eps });
            }
            if !(s.r > 0.0) {
                return Err(CoreError::NonPositiveRadius { value: s.r });
            }
            if s.eps / s.r >= self.alpha {
                return Err(CoreError::DomainViolation {
                    clause: format!("eps_i/r_i < alpha (site {i}: {} >= {})", s.eps / s.r, self.alpha),
                });
            }
            let norm: f64 = s.center.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm >= self.big_r - 2.0 * s.r {
                return Err(CoreError::DomainViolation {
                    clause: format!("|xi_i| < R - 2 r_i (site {i}: {norm} >= {})", self.big_r - 2.0 * s.r),
                });
            }
        }
        for i in 0..self.sites.len() {
            for j in 0..self.sites.len() {
                if i != j {
                    let d: f64 = self.sites[i]
                        .center
                        .iter()
                        .zip(&self.sites[j].center)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    let gap = 2.0 * (self.sites[i].r + self.sites[j].r);
                    if d <= gap {
                        return Err(CoreError::DomainViolation {
                            clause: format!(
                                "|xi_i - xi_j| > 2(r_i + r_j) (sites {i},{j}: {d} <= {gap})"
                            ),
                        });
                    }
                }
                let ratio = self.sites[i].eps / self.sites[j].eps;
                if !(0.5 < ratio && ratio < 2.0) {
                    return Err(CoreError::DomainViolation {
                        clause: format!("1/2 < eps_i/eps_j < 2 (sites {i},{j}: ratio {ratio})"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// W(x) = Σ_i η_(r_i,ξ_i)(x) w_(ξ_i,ε_i)(x), evaluated with its
/// derivative tensor of the requested order; zero outside ∪ B_{2r_i}.
pub fn multibubble_eval(
    cfg: &MultiBubbleConfig,
    dim: &Dimension,
    x: &[f64],
    order: usize,
) -> Result<DerivTensor, CoreError> {
    if order > 4 {
        return Err(CoreError::OrderTooHigh { order });
    }
    cfg.validate()?;
    let n = dim.n();
    let mut acc: Option<DerivTensor> = None;
    for site in &cfg.sites {
        let z: Vec<f64> = x.iter().zip(&site.center).map(|(a, b)| a - b).collect();
        let s: f64 = z.iter().map(|v| v * v).sum();
        if s >= 4.0 * site.r * site.r {
            continue;
        }
        let bubble = Bubble {
            center: site.center.clone(),
            eps: site.eps,
        };
        let cut = Cutoff {
            radius: site.r,
            anchor: site.center.clone(),
        };
        let fjet = bubble.radial_jet(dim, s).mul(&cutoff_sjet(&cut, s));
        let rd = RadialDerivs { fjet, z };
        let t = rd.order(order, n);
        acc = Some(match acc {
            None => t,
            Some(prev) => add_tensors(prev, t),
        });
    }
    Ok(acc.unwrap_or_else(|| zero_tensor(order, n)))
}

fn zero_tensor(order: usize, n: usize) -> DerivTensor {
    match order {
        0 => DerivTensor::Scalar(0.0),
        1 => DerivTensor::Grad(vec![0.0; n]),
        2 => DerivTensor::Hess(vec![0.0; n * n]),
        3 => DerivTensor::Third(vec![0.0; n * n * n]),
        _ => DerivTensor::Fourth(vec![0.0; n * n * n * n]),
    }
}

fn add_tensors(a: DerivTensor, b: DerivTensor) -> DerivTensor {
    use DerivTensor::*;
    match (a, b) {
        (Scalar(x), Scalar(y)) => Scalar(x + y),
        (Grad(mut x), Grad(y)) => {
            x.iter_mut().zip(y).for_each(|(u, v)| *u += v);
            Grad(x)
        }
        (Hess(mut x), Hess(y)) => {
            x.iter_mut().zip(y).for_each(|(u, v)| *u += v);
            Hess(x)
        }
        (Third(mut x), Third(y)) => {
            x.iter_mut().zip(y).for_each(|(u, v)| *u += v);
            Third(x)
        }
        (Fourth(mut x), Fourth(y)) => {
            x.iter_mut().zip(y).for_each(|(u, v)| *u += v);
            Fourth(x)
        }
        _ => panic!("tensor order mismatch"),
    }
}

// ---------------------------------------------------------------------------
// β-matrix
// ---------------------------------------------------------------------------

/// β_{ikjm} = ε_j ∫ φ̄_(ξ_i,ε_i,r_i,k) ∂_m w̄_(ξ_j,ε_j,r_j) dx over the
/// glued supports, with the structural decomposition: cross-site entries
/// vanish by disjoint supports, same-site off-diagonal entries by odd
/// angular moments.
pub struct BetaReport {
    /// Entries [(i,k,j,m), value].
    pub entries: Vec<((usize, usize, usize, usize), f64)>,
    pub max_diag: f64,
    pub min_diag_abs: f64,
    pub max_offdiag: f64,
}

pub fn beta_matrix(
    cfg: &MultiBubbleConfig,
    dim: &Dimension,
    spec: &QuadratureSpec,
) -> Result<BetaReport, CoreError> {
    cfg.validate()?;
    let n = dim.n();
    let ell = cfg.sites.len();
    let area = quad::gammafn::sphere_area(n);
    let mut entries = Vec::new();
    let mut max_diag: f64 = 0.0;
    let mut min_diag_abs = f64::INFINITY;
    let mut max_offdiag: f64 = 0.0;

    for i in 0..ell {
        let site = &cfg.sites[i];
        let b = Bubble {
            center: site.center.clone(),
            eps: site.eps,
        };
        let cut = Cutoff {
            radius: site.r,
            anchor: site.center.clone(),
        };
        // diagonal (k = m = 0)
        let f00 = |rho: f64| {
            let s = rho * rho;
            let eta = cutoff_sjet(&cut, s).d[0];
            eta * eta * phi_0_radial(&b, dim, rho) * b.eps_derivative(dim, s)
        };
        let (v00, _) =
            quad::radial_integrate_interval(&f00, n, 0.0, 2.0 * site.r, spec)?;
        let beta00 = site.eps * area * v00;
        entries.push(((i, 0, i, 0), beta00));
        max_diag = max_diag.max(beta00.abs());
        min_diag_abs = min_diag_abs.min(beta00.abs());

        // diagonal (k = m >= 1): ε (ω/n) ∫ η φ̂ ζ ρ^{n+1} dρ where
        // ∂_m w̄ = ζ(ρ) z_m, ζ = −2 g' η − g η'(ρ/r)/(r ρ)
        let fkk = |rho: f64| {
            let s = rho * rho;
            let gj = b.radial_jet(dim, s);
            let eta_tau = eta_jet(rho / site.r);
            let eta = eta_tau.d[0];
            let zeta = -2.0 * gj.d[1] * eta - gj.d[0] * eta_tau.d[1] / (site.r * rho);
            eta * phi_k_radial(&b, dim, rho) * zeta * rho * rho
        };
        let (vkk, _) =
            quad::radial_integrate_interval(&fkk, n, 1e-300, 2.0 * site.r, spec)?;
        let betakk = site.eps * area / dim.nf() * vkk;
        for k in 1..=n {
            entries.push(((i, k, i, k), betakk));
        }
        max_diag = max_diag.max(betakk.abs());
        min_diag_abs = min_diag_abs.min(betakk.abs());

        // same-site off-diagonal: (k,0) and (0,m) pairs are odd in the
        // angular variable, (k,m) with k≠m carries a θ_k θ_m moment;
        // all integrate to zero exactly. Recorded as computed zeros.
        for k in 0..=n {
            for m in 0..=n {
                if k != m {
                    entries.push(((i, k, i, m), 0.0));
                }
            }
        }
        // cross-site: disjoint supports
        for j in 0..ell {
            if j == i {
                continue;
            }
            for k in 0..=n {
                for m in 0..=n {
                    entries.push(((i, k, j, m), 0.0));
                }
            }
        }
    }
    for &((i, k, j, m), v) in &entries {
        if !(i == j && k == m) {
            max_offdiag = max_offdiag.max(v.abs());
        }
    }
    Ok(BetaReport {
        entries,
        max_diag,
        min_diag_abs,
        max_offdiag,
    })
}
