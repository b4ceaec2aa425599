//! The model perturbation tensor h, the Γ correction tensor, and the
//! parameter-domain predicates.

use serde::{Deserialize, Serialize};

use crate::bubbles::{Bubble, BubbleSite, Cutoff, MultiBubbleConfig};
use crate::dim::Dimension;
use crate::error::CoreError;
use crate::jet::Jet4;
use crate::sym::Window;
use crate::weyl::WeylLikeTensor;

/// Per-site parameters (μ_t, λ_t, ρ_t, y_t).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbSite {
    pub mu: f64,
    pub lambda: f64,
    pub rho: f64,
    pub y: Vec<f64>,
}

/// Full data defining h and g = exp(h): the Weyl-like tensor, the window
/// constant τ, the site list, the outer radius R, and the size bound α.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub weyl: WeylLikeTensor,
    pub tau: f64,
    pub sites: Vec<PerturbSite>,
    pub big_r: f64,
    pub alpha: f64,
}

impl PerturbationSpec {
    /// Parameter constraints of the construction; the first violated
    /// clause is named.
    pub fn validate(&self) -> Result<(), CoreError> {
        let reject = |reason: String| Err(CoreError::InvalidSpec { reason });
        if !(self.big_r > 0.0) {
            return reject(format!("R must be positive, got {}", self.big_r));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return reject(format!("alpha must lie in (0,1), got {}", self.alpha));
        }
        if self.big_r / 2.0 > 1.0 {
            return reject(format!("R/2 <= 1 violated (R = {})", self.big_r));
        }
        for (t, s) in self.sites.iter().enumerate() {
            if !(s.mu > 0.0 && s.mu <= 1.0) {
                return reject(format!("mu_t <= 1 violated at site {t}: {}", s.mu));
            }
            if !(s.lambda > 0.0) || !(s.rho > 0.0) {
                return reject(format!("lambda_t, rho_t must be positive at site {t}"));
            }
            if 2.0 * s.lambda > s.rho {
                return reject(format!(
                    "2 lambda_t <= rho_t violated at site {t}: 2*{} > {}",
                    s.lambda, s.rho
                ));
            }
            if s.rho > self.big_r / 2.0 {
                return reject(format!(
                    "rho_t <= R/2 violated at site {t}: {} > {}",
                    s.rho,
                    self.big_r / 2.0
                ));
            }
            if (1.5 - self.alpha) * s.lambda >= self.alpha * s.rho {
                return reject(format!(
                    "(3/2 - alpha) lambda_t < alpha rho_t violated at site {t} \
                     (the epsilon-window of the glue domain would exceed the bubble domain)"
                ));
            }
            if 2.0 * s.rho + 3.0 * s.lambda >= self.big_r / 2.0 {
                return reject(format!("2 rho_t + 3 lambda_t < R/2 violated at site {t}"));
            }
            let ynorm: f64 = s.y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if ynorm >= self.big_r / 2.0 {
                return reject(format!("y_t in B_(R/2)(0) violated at site {t}"));
            }
        }
        for i in 0..self.sites.len() {
            for j in (i + 1)..self.sites.len() {
                let a = &self.sites[i];
                let b = &self.sites[j];
                let d: f64 = a
                    .y
                    .iter()
                    .zip(&b.y)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt();
                let need = 3.0 * (a.lambda + b.lambda) + 2.0 * (a.rho + b.rho);
                if d < need {
                    return reject(format!(
                        "|y_i - y_j| >= 3(lambda_i+lambda_j) + 2(rho_i+rho_j) violated \
                         for sites {i},{j}: {d} < {need}"
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn window(&self, t: usize) -> Window {
        Window {
            tau: self.tau,
            lambda: self.sites[t].lambda,
        }
    }

    /// The scalar radial factor of h at site t, including the cutoff:
    /// jet in s = |x−y_t|² of η_(ρ_t,y_t) · μ_t λ_t⁸ f(λ_t^{−2} s).
    pub fn site_scalar_jet(&self, t: usize, s: f64) -> Jet4 {
        let site = &self.sites[t];
        let cut = Cutoff {
            radius: site.rho,
            anchor: site.y.clone(),
        };
        let eta = crate::bubbles::cutoff_sjet(&cut, s);
        let w = self.window(t);
        let amp = site.mu * site.lambda.powi(8);
        let f = Jet4 {
            d: [
                w.eval(0, s) * amp,
                w.eval(1, s) * amp,
                w.eval(2, s) * amp,
                w.eval(3, s) * amp,
                w.eval(4, s) * amp,
            ],
        };
        eta.mul(&f)
    }

    /// The model factor without the cutoff (used by Γ, which is defined
    /// from the pure model, not the glued h).
    pub fn site_model_jet(&self, t: usize, s: f64) -> Jet4 {
        let site = &self.sites[t];
        let w = self.window(t);
        let amp = site.mu * site.lambda.powi(8);
        Jet4 {
            d: [
                w.eval(0, s) * amp,
                w.eval(1, s) * amp,
                w.eval(2, s) * amp,
                w.eval(3, s) * amp,
                w.eval(4, s) * amp,
            ],
        }
    }
}

// ---------------------------------------------------------------------------
// h evaluation
// ---------------------------------------------------------------------------

/// h(x) as a symmetric n×n matrix: Σ_t η_(ρ_t,y_t)(x) μ_t λ_t⁸
/// f(λ_t^{−2}|x−y_t|²) H(x−y_t).
pub fn h_matrix(spec: &PerturbationSpec, x: &[f64]) -> Vec<f64> {
    let n = spec.weyl.n;
    let mut h = vec![0.0; n * n];
    for t in 0..spec.sites.len() {
        let site = &spec.sites[t];
        let z: Vec<f64> = x.iter().zip(&site.y).map(|(a, b)| a - b).collect();
        let s: f64 = z.iter().map(|v| v * v).sum();
        if s >= 4.0 * site.rho * site.rho {
            continue;
        }
        let c = spec.site_scalar_jet(t, s).d[0];
        if c == 0.0 {
            continue;
        }
        let hz = spec.weyl.h_matrix(&z);
        for (dst, src) in h.iter_mut().zip(&hz) {
            *dst += c * src;
        }
    }
    h
}

/// Entry of the derivative tensor ∂_{dirs} h_{ab}(x) (dirs lists the
/// derivative directions, |dirs| ≤ 4), computed by the Leibniz rule
/// between the radial scalar factor and the quadratic polynomial H.
pub fn h_deriv_entry(spec: &PerturbationSpec, x: &[f64], dirs: &[usize], a: usize, b: usize) -> f64 {
    assert!(dirs.len() <= 4);
    let mut total = 0.0;
    for t in 0..spec.sites.len() {
        let site = &spec.sites[t];
        let z: Vec<f64> = x.iter().zip(&site.y).map(|(p, q)| p - q).collect();
        let s: f64 = z.iter().map(|v| v * v).sum();
        if s >= 4.0 * site.rho * site.rho {
            continue;
        }
        let cjet = spec.site_scalar_jet(t, s);
        total += product_deriv_entry(&cjet, &spec.weyl, &z, dirs, a, b);
    }
    total
}

/// Leibniz entry for one site: ∂_{dirs} [ c(s) H_{ab}(z) ] with H
/// quadratic, so at most two derivatives land on H.
pub(crate) fn product_deriv_entry(
    cjet: &Jet4,
    w: &WeylLikeTensor,
    z: &[f64],
    dirs: &[usize],
    a: usize,
    b: usize,
) -> f64 {
    let k = dirs.len();
    let mut total = 0.0;
    // subsets of dirs of size <= 2 hitting H
    for mask in 0..(1u32 << k) {
        let hits = mask.count_ones() as usize;
        if hits > 2 {
            continue;
        }
        let mut hdirs = [0usize; 2];
        let mut cdirs: Vec<usize> = Vec::with_capacity(k);
        let mut hi = 0;
        for (idx, &d) in dirs.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                hdirs[hi] = d;
                hi += 1;
            } else {
                cdirs.push(d);
            }
        }
        let hval = match hits {
            0 => h_poly(w, z, a, b),
            1 => dh_poly(w, z, hdirs[0], a, b),
            _ => ddh_poly(w, hdirs[0], hdirs[1], a, b),
        };
        if hval == 0.0 {
            continue;
        }
        total += radial_entry(cjet, z, &cdirs) * hval;
    }
    total
}

fn h_poly(w: &WeylLikeTensor, z: &[f64], a: usize, b: usize) -> f64 {
    let mut v = 0.0;
    for (&(i, p, k, q), &c) in &w.entries {
        if i as usize == a && k as usize == b {
            v += c * z[p as usize] * z[q as usize];
        }
    }
    v
}

fn dh_poly(w: &WeylLikeTensor, z: &[f64], m: usize, a: usize, b: usize) -> f64 {
    let mut v = 0.0;
    for (&(i, p, k, q), &c) in &w.entries {
        if i as usize == a && k as usize == b {
            if p as usize == m {
                v += c * z[q as usize];
            }
            if q as usize == m {
                v += c * z[p as usize];
            }
        }
    }
    v
}

fn ddh_poly(w: &WeylLikeTensor, m1: usize, m2: usize, a: usize, b: usize) -> f64 {
    let mut v = 0.0;
    for (&(i, p, k, q), &c) in &w.entries {
        if i as usize == a && k as usize == b {
            if p as usize == m1 && q as usize == m2 {
                v += c;
            }
            if p as usize == m2 && q as usize == m1 {
                v += c;
            }
        }
    }
    v
}

/// Entry of ∂_{dirs} c(|z|²) for a radial scalar with jet `cjet` in s.
pub(crate) fn radial_entry(cjet: &Jet4, z: &[f64], dirs: &[usize]) -> f64 {
    let f = &cjet.d;
    match dirs.len() {
        0 => f[0],
        1 => 2.0 * f[1] * z[dirs[0]],
        2 => {
            let (i, j) = (dirs[0], dirs[1]);
            let mut v = 4.0 * f[2] * z[i] * z[j];
            if i == j {
                v += 2.0 * f[1];
            }
            v
        }
        3 => {
            let (i, j, l) = (dirs[0], dirs[1], dirs[2]);
            let mut v = 8.0 * f[3] * z[i] * z[j] * z[l];
            if i == j {
                v += 4.0 * f[2] * z[l];
            }
            if i == l {
                v += 4.0 * f[2] * z[j];
            }
            if j == l {
                v += 4.0 * f[2] * z[i];
            }
            v
        }
        4 => {
            let (i, j, l, m) = (dirs[0], dirs[1], dirs[2], dirs[3]);
            let mut v = 16.0 * f[4] * z[i] * z[j] * z[l] * z[m];
            if i == j && l == m {
                v += 4.0 * f[2];
            }
            if i == l && j == m {
                v += 4.0 * f[2];
            }
            if j == l && i == m {
                v += 4.0 * f[2];
            }
            if i == j {
                v += 8.0 * f[3] * z[l] * z[m];
            }
            if i == l {
                v += 8.0 * f[3] * z[j] * z[m];
            }
            if j == l {
                v += 8.0 * f[3] * z[i] * z[m];
            }
            if i == m {
                v += 8.0 * f[3] * z[j] * z[l];
            }
            if j == m {
                v += 8.0 * f[3] * z[i] * z[l];
            }
            if l == m {
                v += 8.0 * f[3] * z[i] * z[j];
            }
            v
        }
        _ => panic!("radial entry order > 4"),
    }
}

/// Frobenius-type pointwise size Σ_{k=0..4} |∂^k h|(x), the quantity the
/// size bound α controls. Loops over index tuples without materializing
/// the dense derivative arrays.
pub fn h_c4_norm_at(spec: &PerturbationSpec, x: &[f64]) -> f64 {
    let n = spec.weyl.n;
    let mut total = 0.0;
    for k in 0..=4usize {
        let mut sq = 0.0;
        let mut dirs = vec![0usize; k];
        loop {
            // multiplicity of the sorted tuple as an unordered derivative
            for a in 0..n {
                for b in a..n {
                    let v = h_deriv_entry(spec, x, &dirs, a, b);
                    let w = if a == b { 1.0 } else { 2.0 };
                    sq += w * v * v * tuple_multiplicity(&dirs) as f64;
                }
            }
            if !advance_sorted(&mut dirs, n) {
                break;
            }
        }
        total += sq.sqrt();
    }
    total
}

fn advance_sorted(dirs: &mut [usize], n: usize) -> bool {
    let k = dirs.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if dirs[i] + 1 < n {
            let v = dirs[i] + 1;
            for d in dirs.iter_mut().skip(i) {
                *d = v;
            }
            return true;
        }
    }
    false
}

fn tuple_multiplicity(dirs: &[usize]) -> usize {
    // number of distinct orderings of the sorted tuple
    let k = dirs.len();
    let mut fact = vec![1usize; k + 1];
    for i in 1..=k {
        fact[i] = fact[i - 1] * i;
    }
    let mut denom = 1usize;
    let mut run = 1usize;
    for i in 1..k {
        if dirs[i] == dirs[i - 1] {
            run += 1;
        } else {
            denom *= fact[run];
            run = 1;
        }
    }
    denom *= fact[run.min(k.max(1))];
    if k == 0 {
        return 1;
    }
    fact[k] / denom
}

// ---------------------------------------------------------------------------
// Γ tensor
// ---------------------------------------------------------------------------

/// Γ_(y_t,ξ_t,ε_t)(x): the four-term contraction of the model tensor
/// G_{kj}(x−y_t) = f(λ_t^{−2}|x−y_t|²) H_{kj}(x−y_t) against bubble
/// derivatives, with coefficients (2, 2, n/(n−2), 2/(n−2)) and the
/// μ_t λ_t⁸ amplitude.
pub fn gamma_eval(
    spec: &PerturbationSpec,
    t: usize,
    bubble: &Bubble,
    dim: &Dimension,
    x: &[f64],
) -> f64 {
    let n = dim.n();
    let site = &spec.sites[t];
    let zg: Vec<f64> = x.iter().zip(&site.y).map(|(p, q)| p - q).collect();
    let sg: f64 = zg.iter().map(|v| v * v).sum();
    let cjet = spec.site_model_jet(t, sg);

    gamma_contraction(&cjet, &spec.weyl, &zg, bubble, dim, x, n)
}

/// Normalized Γ̄_(ξ,ε)(x): model window at the origin with μ = λ = 1 and
/// amplitude 1, i.e. G = H̄ = f(|x|²) H(x).
pub fn gamma_bar_eval(
    weyl: &WeylLikeTensor,
    tau: f64,
    bubble: &Bubble,
    dim: &Dimension,
    x: &[f64],
) -> f64 {
    let n = dim.n();
    let s: f64 = x.iter().map(|v| v * v).sum();
    let w = Window::normalized(tau);
    let cjet = Jet4 {
        d: [
            w.eval(0, s),
            w.eval(1, s),
            w.eval(2, s),
            w.eval(3, s),
            w.eval(4, s),
        ],
    };
    gamma_contraction(&cjet, weyl, x, bubble, dim, x, n)
}

fn gamma_contraction(
    cjet: &Jet4,
    weyl: &WeylLikeTensor,
    zg: &[f64],
    bubble: &Bubble,
    dim: &Dimension,
    x: &[f64],
    n: usize,
) -> f64 {
    let nf = dim.nf();
    let rd = bubble.derivs_at(dim, x);
    let zb = &rd.z;
    let g = &rd.fjet.d;
    let a = rd.laplacian_jet(n);

    // G-side scalars
    let sg: f64 = zg.iter().map(|v| v * v).sum();
    let c = &cjet.d;
    // ΔG_{kj} = [(2n+8) c' + 4 s c''] H_{kj}
    let lap_g_factor = (2.0 * nf + 8.0) * c[1] + 4.0 * sg * c[2];
    // ∂_j ΔG_{kj} contracts to zero for divergence-free H; kept explicit
    // via the polynomial identities (z·H = 0, div H = 0).

    let mut term1 = 0.0; // 2 G_{kj} ∂_k∂_j Δw
    let mut term2 = 0.0; // 2 ∂_s G_{kj} ∂_k∂_j∂_s w
    let mut term3 = 0.0; // n/(n−2) ΔG_{kj} ∂_k∂_j w
    let term4 = 0.0; // 2/(n−2) ∂_jΔG_{kj} ∂_k w ≡ 0 (div-free model)

    for (&(i, p, k, q), &wv) in &weyl.entries {
        let (kk, pp, jj, qq) = (i as usize, p as usize, k as usize, q as usize);
        // H_{kk,jj} += wv z_pp z_qq; iterate the sparse W directly.
        let h_kj = wv * zg[pp] * zg[qq];

        // term 1: ∂_k∂_jΔw = 2A'δ_kj + 4A'' z_k z_j
        let ddlap = if kk == jj { 2.0 * a.d[1] } else { 0.0 } + 4.0 * a.d[2] * zb[kk] * zb[jj];
        term1 += 2.0 * c[0] * h_kj * ddlap;

        // term 3: ΔG_{kj} ∂_k∂_jw
        let ddw = if kk == jj { 2.0 * g[1] } else { 0.0 } + 4.0 * g[2] * zb[kk] * zb[jj];
        term3 += nf / (nf - 2.0) * lap_g_factor * h_kj * ddw;

        // term 2: Σ_s ∂_s G_{kj} ∂_k∂_j∂_s w with
        // ∂_s G = 2 c' z_s H_{kj} + c (W_{k s j q} z_q + W_{k p j s} z_p)
        // (a) radial part: 2 c' H_{kj} Σ_s zg_s ∂_k∂_j∂_s w
        let mut third_rad = 0.0;
        for s_ in 0..n {
            let mut t3 = 8.0 * g[3] * zb[kk] * zb[jj] * zb[s_];
            if kk == jj {
                t3 += 4.0 * g[2] * zb[s_];
            }
            if kk == s_ {
                t3 += 4.0 * g[2] * zb[jj];
            }
            if jj == s_ {
                t3 += 4.0 * g[2] * zb[kk];
            }
            third_rad += zg[s_] * t3;
        }
        term2 += 2.0 * 2.0 * c[1] * h_kj * third_rad;
        // (b) polynomial part: s = pp and s = qq contributions
        for (s_, other) in [(pp, qq), (qq, pp)] {
            let mut t3 = 8.0 * g[3] * zb[kk] * zb[jj] * zb[s_];
            if kk == jj {
                t3 += 4.0 * g[2] * zb[s_];
            }
            if kk == s_ {
                t3 += 4.0 * g[2] * zb[jj];
            }
            if jj == s_ {
                t3 += 4.0 * g[2] * zb[kk];
            }
            term2 += 2.0 * c[0] * wv * zg[other] * t3;
        }
    }
    term1 + term2 + term3 + term4
}

// ---------------------------------------------------------------------------
// Glue window and domain checks
// ---------------------------------------------------------------------------

/// Ω(λ, y) membership (the glue window of bubble parameters).
pub fn omega_check(
    spec: &PerturbationSpec,
    centers: &[Vec<f64>],
    epsilons: &[f64],
) -> Result<(), CoreError> {
    if centers.len() != spec.sites.len() || epsilons.len() != spec.sites.len() {
        return Err(CoreError::InvalidSpec {
            reason: "bubble count must match site count".into(),
        });
    }
    for (t, site) in spec.sites.iter().enumerate() {
        let d: f64 = centers[t]
            .iter()
            .zip(&site.y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if d >= site.lambda {
            return Err(CoreError::DomainViolation {
                clause: format!("|xi_t - y_t| < lambda_t (site {t}: {d} >= {})", site.lambda),
            });
        }
        if !(epsilons[t] > site.lambda / 2.0 && epsilons[t] < 1.5 * site.lambda) {
            return Err(CoreError::DomainViolation {
                clause: format!(
                    "lambda_t/2 < eps_t < (3/2) lambda_t (site {t}: eps = {})",
                    epsilons[t]
                ),
            });
        }
    }
    for i in 0..epsilons.len() {
        for j in 0..epsilons.len() {
            let ratio = epsilons[i] / epsilons[j];
            if !(0.5 < ratio && ratio < 2.0) {
                return Err(CoreError::DomainViolation {
                    clause: format!("1/2 < eps_t/eps_i < 2 (sites {i},{j}: {ratio})"),
                });
            }
        }
    }
    Ok(())
}

/// The multi-bubble configuration induced by Ω-parameters under
/// r_t = ρ_t + λ_t; Ω ⊂ D is asserted by validating it.
pub fn omega_to_bubble_config(
    spec: &PerturbationSpec,
    centers: &[Vec<f64>],
    epsilons: &[f64],
) -> MultiBubbleConfig {
    MultiBubbleConfig {
        sites: centers
            .iter()
            .zip(epsilons)
            .zip(&spec.sites)
            .map(|((c, &e), s)| BubbleSite {
                center: c.clone(),
                eps: e,
                r: s.rho + s.lambda,
            })
            .collect(),
        alpha: spec.alpha,
        big_r: spec.big_r,
    }
}

/// The final parameter sequence: for index N,
/// y = (1/N, 0, …), λ = 2^{−N}, μ = 2^{−N/3}, ρ = 1/(4N²).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinalSequenceStep {
    pub n_index: u32,
    pub y_first: f64,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    /// μ^{−2} ρ^{4−n} λ^{n−24}, the smallness quantity, evaluated in
    /// exact exponent arithmetic.
    pub smallness: f64,
    /// log2 of the smallness quantity (exact rational + (n−4)·log2(4N²)).
    pub smallness_log2: f64,
}

/// Exact-exponent evaluation of the sequence and the identity
/// μ_N^{−2} ρ_N^{4−n} λ_N^{n−24} = 2^{(74/3−n)N} (4N²)^{n−4}.
/// The rational parts of both exponents are compared exactly in thirds.
pub fn final_sequence(n: usize, big_n: u32) -> Result<FinalSequenceStep, CoreError> {
    if big_n == 0 {
        return Err(CoreError::InvalidSpec {
            reason: "sequence index N must be positive".into(),
        });
    }
    let nf = n as f64;
    let big_nf = big_n as f64;
    // exponents in thirds of a power of two:
    //   μ^{−2} = 2^{2N/3}            → 2N thirds
    //   λ^{n−24} = 2^{(24−n)N}       → 3(24−n)N thirds
    let lhs_thirds: i64 = 2 * big_n as i64 + 3 * (24 - n as i64) * big_n as i64;
    // closed form 2^{(74/3−n)N}: (74 − 3n)N thirds
    let rhs_thirds: i64 = (74 - 3 * n as i64) * big_n as i64;
    if lhs_thirds != rhs_thirds {
        return Err(CoreError::Unsupported(format!(
            "exact exponent mismatch: {lhs_thirds} vs {rhs_thirds} thirds"
        )));
    }
    // both sides carry the same (4N²)^{n−4} factor
    let log2 = lhs_thirds as f64 / 3.0 + (nf - 4.0) * (4.0 * big_nf * big_nf).log2();
    Ok(FinalSequenceStep {
        n_index: big_n,
        y_first: 1.0 / big_nf,
        lambda: 2.0_f64.powf(-big_nf),
        mu: 2.0_f64.powf(-big_nf / 3.0),
        rho: 1.0 / (4.0 * big_nf * big_nf),
        smallness: log2.exp2(),
        smallness_log2: log2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn spec_for(n: usize, sites: usize) -> PerturbationSpec {
        let weyl = WeylLikeTensor::from_seed(n, &[(0, 1, 0, 1, 1.0)]).unwrap();
        let mut list = Vec::new();
        for t in 0..sites {
            let mut y = vec![0.0; n];
            y[0] = -0.6 + 0.6 * t as f64;
            list.push(PerturbSite {
                mu: 0.5,
                lambda: 0.004,
                rho: 0.08,
                y,
            });
        }
        PerturbationSpec {
            weyl,
            tau: 50.0,
            sites: list,
            big_r: 2.0,
            alpha: 0.2,
        }
    }

    #[test]
    fn spec_validation_passes_and_names_violations() {
        let n = 6;
        let spec = spec_for(n, 2);
        spec.validate().unwrap();

        let mut bad = spec.clone();
        bad.sites[0].lambda = 0.05; // violates 2λ ≤ ρ
        match bad.validate() {
            Err(CoreError::InvalidSpec { reason }) => assert!(reason.contains("2 lambda_t")),
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn h_is_trace_free_tangential_and_divergence_free_in_model_ball() {
        let n = 7;
        let spec = spec_for(n, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            // sample inside the model ball |x−y| ≤ ρ
            let site = &spec.sites[0];
            let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = site.rho * rng.gen::<f64>();
            let x: Vec<f64> = site
                .y
                .iter()
                .zip(&dir)
                .map(|(c, d)| c + d / norm * r)
                .collect();
            let h = h_matrix(&spec, &x);
            let trace: f64 = (0..n).map(|i| h[i * n + i]).sum();
            assert!(trace.abs() < 1e-14, "trace {trace}");
            // Σ_i (x_i − y_i) h_{ik} = 0
            for k in 0..n {
                let c: f64 = (0..n).map(|i| (x[i] - site.y[i]) * h[i * n + k]).sum();
                assert!(c.abs() < 1e-14, "tangential contraction {c}");
            }
            // Σ_i ∂_i h_{ik} = 0
            for k in 0..n {
                let mut div = 0.0;
                for i in 0..n {
                    div += h_deriv_entry(&spec, &x, &[i], i, k);
                }
                assert!(div.abs() < 1e-12, "divergence {div}");
            }
        }
    }

    #[test]
    fn h_vanishes_outside_big_r() {
        let n = 6;
        let spec = spec_for(n, 2);
        let mut x = vec![0.0; n];
        x[1] = spec.big_r + 0.1;
        let h = h_matrix(&spec, &x);
        assert!(h.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn h_derivs_match_finite_differences() {
        let n = 5;
        let spec = spec_for(n, 1);
        let site = &spec.sites[0];
        // sample in the cutoff transition annulus where all factors vary
        let mut x = site.y.clone();
        x[0] += 1.3 * site.rho;
        x[1] += 0.2 * site.rho;
        let fd_step = 1e-5;
        for (a, b) in [(0, 1), (2, 3), (1, 1)] {
            for m in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[m] += fd_step;
                xm[m] -= fd_step;
                let hp = h_matrix(&spec, &xp)[a * n + b];
                let hm = h_matrix(&spec, &xm)[a * n + b];
                let fd = (hp - hm) / (2.0 * fd_step);
                let an = h_deriv_entry(&spec, &x, &[m], a, b);
                assert_relative_eq!(an, fd, max_relative = 1e-5, epsilon = 1e-10);
            }
            // one second derivative
            let mut xpp = x.clone();
            xpp[0] += fd_step;
            let mut xmm = x.clone();
            xmm[0] -= fd_step;
            let f0 = h_matrix(&spec, &x)[a * n + b];
            let fd2 = (h_matrix(&spec, &xpp)[a * n + b] - 2.0 * f0
                + h_matrix(&spec, &xmm)[a * n + b])
                / (fd_step * fd_step);
            let an2 = h_deriv_entry(&spec, &x, &[0, 0], a, b);
            assert_relative_eq!(an2, fd2, max_relative = 1e-3, epsilon = 1e-7);
        }
    }

    #[test]
    fn gamma_zero_for_zero_weyl() {
        let n = 6;
        let dimn = Dimension::new(n).unwrap();
        let mut spec = spec_for(n, 1);
        spec.weyl = WeylLikeTensor::zero(n);
        let b = Bubble::new(spec.sites[0].y.clone(), 0.003).unwrap();
        let x: Vec<f64> = (0..n).map(|i| 0.01 * i as f64).collect();
        assert_eq!(gamma_eval(&spec, 0, &b, &dimn, &x), 0.0);
    }

    #[test]
    fn gamma_scaling_law() {
        // Γ_(y, λξ+y, λε)(λx + y) = μ λ^{(16−n)/2} Γ̄_(ξ,ε)(x)
        let n = 9;
        let dimn = Dimension::new(n).unwrap();
        let weyl = WeylLikeTensor::from_seed(n, &[(0, 1, 0, 1, 1.0), (1, 2, 1, 2, -0.3)]).unwrap();
        let tau = 42.0;
        let mu = 0.37;
        let lambda = 0.008;
        let mut y = vec![0.0; n];
        y[2] = -0.3;
        let spec = PerturbationSpec {
            weyl: weyl.clone(),
            tau,
            sites: vec![PerturbSite {
                mu,
                lambda,
                rho: 0.1,
                y: y.clone(),
            }],
            big_r: 2.0,
            alpha: 0.2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let eps = 0.8;
        let scaled_center: Vec<f64> = xi.iter().zip(&y).map(|(v, c)| lambda * v + c).collect();
        let b_scaled = Bubble::new(scaled_center, lambda * eps).unwrap();
        let b_norm = Bubble::new(xi.clone(), eps).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let x_scaled: Vec<f64> = x.iter().zip(&y).map(|(v, c)| lambda * v + c).collect();
            let lhs = gamma_eval(&spec, 0, &b_scaled, &dimn, &x_scaled);
            let rhs = mu
                * lambda.powf((16.0 - n as f64) / 2.0)
                * gamma_bar_eval(&weyl, tau, &b_norm, &dimn, &x);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn gamma_bound_quantity_is_finite() {
        // sup |Γ| (λ + |x−y|)^{n−10} / (μ λ^{(n−4)/2}) over samples
        let n = 12;
        let dimn = Dimension::new(n).unwrap();
        let spec = spec_for(n, 1);
        let site = &spec.sites[0];
        let b = Bubble::new(site.y.clone(), site.lambda).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut sup: f64 = 0.0;
        for _ in 0..1000 {
            let x: Vec<f64> = site
                .y
                .iter()
                .map(|c| c + rng.gen_range(-1.0..1.0))
                .collect();
            let d: f64 = x
                .iter()
                .zip(&site.y)
                .map(|(a, c)| (a - c) * (a - c))
                .sum::<f64>()
                .sqrt();
            let g = gamma_eval(&spec, 0, &b, &dimn, &x);
            let q = g.abs() * (site.lambda + d).powf(n as f64 - 10.0)
                / (site.mu * site.lambda.powf((n as f64 - 4.0) / 2.0));
            sup = sup.max(q);
        }
        assert!(sup.is_finite() && sup > 0.0);
    }

    #[test]
    fn omega_samples_lie_in_bubble_domain() {
        let n = 6;
        let spec = spec_for(n, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..1000 {
            let mut centers = Vec::new();
            let mut eps = Vec::new();
            let e0: f64 = rng.gen_range(0.9..1.1);
            for site in &spec.sites {
                let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                let d = site.lambda * 0.99 * rng.gen::<f64>();
                centers.push(
                    site.y
                        .iter()
                        .zip(&dir)
                        .map(|(c, v)| c + v / norm * d)
                        .collect::<Vec<f64>>(),
                );
                eps.push(site.lambda * e0 * rng.gen_range(0.75..1.3));
            }
            if omega_check(&spec, &centers, &eps).is_ok() {
                let cfg = omega_to_bubble_config(&spec, &centers, &eps);
                cfg.validate()
                    .expect("Omega sample must satisfy the bubble domain");
            }
        }
    }

    #[test]
    fn final_sequence_closed_form_and_decay() {
        let n = 25;
        for big_n in [40u32, 50, 100, 200, 500, 1000, 3000] {
            let step = final_sequence(n, big_n).unwrap();
            // closed form 2^{(74/3−n)N} (4N²)^{n−4}
            let nf = n as f64;
            let bn = big_n as f64;
            let closed_log2 = (74.0 / 3.0 - nf) * bn + (nf - 4.0) * (4.0 * bn * bn).log2();
            assert_relative_eq!(step.smallness_log2, closed_log2, max_relative = 1e-14);
        }
        // the quantity tends to zero, with the turnover where the
        // derivative −(ln2)/3 + 2(n−4)/N changes sign (N ≈ 182 at n = 25)
        let turnover = (2.0 * 21.0 / (2.0_f64.ln() / 3.0)).ceil() as u32;
        let mut prev = final_sequence(n, turnover).unwrap().smallness_log2;
        for big_n in (turnover + 1)..(turnover + 40) {
            let cur = final_sequence(n, big_n).unwrap().smallness_log2;
            assert!(cur < prev, "not decreasing past turnover at N = {big_n}");
            prev = cur;
        }
        assert!(final_sequence(n, 40).unwrap().smallness_log2
            < final_sequence(n, 50).unwrap().smallness_log2,
            "the quantity grows on [40,50]; the eventual decay starts near N = 182");
        assert!(final_sequence(n, 5000).unwrap().smallness_log2 < 0.0);
    }
}
