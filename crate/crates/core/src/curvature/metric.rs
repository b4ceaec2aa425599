//! Metric jets for g = exp(h) (or a conformal factor), curvature
//! quantities through Q, and the Paneitz operator at a point.

use std::sync::Arc;

use crate::curvature::jets::{JetSpace, MJet};
use crate::dim::Dimension;
use crate::error::CoreError;

/// Square matrix of scalar jets (row-major n×n).
#[derive(Debug, Clone)]
pub struct JetMatrix {
    pub n: usize,
    pub e: Vec<MJet>,
}

impl JetMatrix {
    pub fn zeros(space: &JetSpace, ord: usize) -> Self {
        let n = space.n;
        Self {
            n,
            e: (0..n * n).map(|_| MJet::zeros(space, ord)).collect(),
        }
    }

    pub fn identity(space: &JetSpace, ord: usize) -> Self {
        let mut m = Self::zeros(space, ord);
        for i in 0..m.n {
            m.e[i * m.n + i] = MJet::constant(space, ord, 1.0);
        }
        m
    }

    #[inline]
    pub fn at(&self, a: usize, b: usize) -> &MJet {
        &self.e[a * self.n + b]
    }

    pub fn mul(&self, other: &JetMatrix, s: &JetSpace) -> JetMatrix {
        let n = self.n;
        let ord = self.e[0].ord.min(other.e[0].ord);
        let mut out = JetMatrix::zeros(s, ord);
        for a in 0..n {
            for b in 0..n {
                let mut acc = MJet::zeros(s, ord);
                for c in 0..n {
                    acc.add_assign(&self.at(a, c).mul(other.at(c, b), s));
                }
                out.e[a * n + b] = acc;
            }
        }
        out
    }

    pub fn scale_assign(&mut self, c: f64) {
        for j in &mut self.e {
            j.scale_assign(c);
        }
    }

    pub fn add_assign(&mut self, other: &JetMatrix) {
        for (a, b) in self.e.iter_mut().zip(&other.e) {
            a.add_assign(b);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.e.iter().map(|j| j.max_abs()).fold(0.0, f64::max)
    }

    /// Matrix exponential by the power series with adaptive truncation;
    /// the term norm bound gives a remainder below 1e−15 of the result.
    pub fn expm(&self, s: &JetSpace) -> JetMatrix {
        let ord = self.e[0].ord;
        let mut result = JetMatrix::identity(s, ord);
        let mut term = JetMatrix::identity(s, ord);
        for k in 1..=40 {
            term = term.mul(self, s);
            term.scale_assign(1.0 / k as f64);
            result.add_assign(&term);
            if term.max_abs() < 1e-17 * result.max_abs().max(1.0) {
                break;
            }
        }
        result
    }
}

/// How the metric is supplied.
pub enum MetricInput<'a> {
    /// g = exp(h) with analytic jets of the symmetric tensor h.
    ExpTensor {
        h_jets: Box<dyn Fn(&[f64], &JetSpace, usize) -> Vec<MJet> + Sync + 'a>,
    },
    /// Conformally flat g = φ² δ with analytic jets of φ.
    Conformal {
        phi: Box<dyn Fn(&[f64], &JetSpace, usize) -> MJet + Sync + 'a>,
    },
    /// Black-box metric values; derivatives by central differences with
    /// one Richardson level and auto-halving.
    RawFd {
        g: Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + 'a>,
        base_step: f64,
        target: f64,
    },
}

/// Curvature data at one point.
#[derive(Debug, Clone)]
pub struct MetricSample {
    pub n: usize,
    pub g: JetMatrix,
    pub ginv: JetMatrix,
    pub ric: Vec<f64>,
    pub scal: f64,
    pub grad_scal: Vec<f64>,
    pub lap_scal: f64,
    pub ric_norm_sq: f64,
    pub q: f64,
    /// achieved FD tolerance when the FD path produced the jets
    pub fd_error: Option<f64>,
}

pub struct MetricWorkspace {
    pub space: Arc<JetSpace>,
    pub dim: Dimension,
}

impl MetricWorkspace {
    pub fn new(dim: Dimension) -> Self {
        Self {
            space: JetSpace::new(dim.n()),
            dim,
        }
    }

    /// Metric jets (g, g⁻¹) of order 4 from the input description.
    pub fn metric_jets(&self, input: &MetricInput, x: &[f64]) -> Result<(JetMatrix, JetMatrix, Option<f64>), CoreError> {
        let s = &self.space;
        let n = self.dim.n();
        match input {
            MetricInput::ExpTensor { h_jets } => {
                let h = h_jets(x, s, 4);
                let hm = JetMatrix { n, e: h };
                let norm0: f64 = (0..n * n).map(|i| hm.e[i].d0.abs()).fold(0.0, f64::max);
                if norm0 >= 1.0 {
                    return Err(CoreError::MetricGate { norm: norm0 });
                }
                let g = hm.expm(s);
                let mut neg = hm;
                neg.scale_assign(-1.0);
                let ginv = neg.expm(s);
                Ok((g, ginv, None))
            }
            MetricInput::Conformal { phi } => {
                let p = phi(x, s, 4);
                if p.d0 <= 0.0 {
                    return Err(CoreError::NonPositiveField { value: p.d0 });
                }
                let p2 = p.mul(&p, s);
                let v = p.d0;
                let inv2 = p.compose(
                    &[
                        v.powi(-2),
                        -2.0 * v.powi(-3),
                        6.0 * v.powi(-4),
                        -24.0 * v.powi(-5),
                        120.0 * v.powi(-6),
                    ],
                    s,
                );
                let mut g = JetMatrix::zeros(s, 4);
                let mut ginv = JetMatrix::zeros(s, 4);
                for i in 0..n {
                    g.e[i * n + i] = p2.clone();
                    ginv.e[i * n + i] = inv2.clone();
                }
                Ok((g, ginv, None))
            }
            MetricInput::RawFd { g, base_step, target } => {
                let (gm, err) = fd_metric_jets(g, x, s, *base_step, *target)?;
                let ginv = invert_jet_matrix(&gm, s)?;
                Ok((gm, ginv, Some(err)))
            }
        }
    }

    /// Full curvature sample: Ricci, scalar curvature, ΔR, and Q.
    pub fn curvature_at(&self, input: &MetricInput, x: &[f64]) -> Result<MetricSample, CoreError> {
        let (g, ginv, fd_error) = self.metric_jets(input, x)?;
        Ok(self.curvature_from_jets(g, ginv, fd_error))
    }

    pub fn curvature_from_jets(
        &self,
        g: JetMatrix,
        ginv: JetMatrix,
        fd_error: Option<f64>,
    ) -> MetricSample {
        let s = &self.space;
        let n = self.dim.n();
        let nf = self.dim.nf();

        // Christoffel jets (order 3): Γ^k_{ij} = ½ g^{kl}(∂_i g_lj + ∂_j g_li − ∂_l g_ij)
        let gamma = christoffel(&g, &ginv, s);

        // Ricci jets (order 2):
        // R_ij = ∂_k Γ^k_ij − ∂_i Γ^k_kj + Γ^k_kl Γ^l_ij − Γ^k_il Γ^l_kj
        let mut ric_j: Vec<MJet> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = MJet::zeros(s, 2);
                for k in 0..n {
                    acc.add_assign(&gamma[(k * n + i) * n + j].derivative(k, s));
                    let mut t2 = gamma[(k * n + k) * n + j].derivative(i, s);
                    t2.scale_assign(-1.0);
                    acc.add_assign(&t2);
                    for l in 0..n {
                        acc.add_assign(
                            &gamma[(k * n + k) * n + l].mul(&gamma[(l * n + i) * n + j], s),
                        );
                        let mut m =
                            gamma[(k * n + i) * n + l].mul(&gamma[(l * n + k) * n + j], s);
                        m.scale_assign(-1.0);
                        acc.add_assign(&m);
                    }
                }
                ric_j.push(acc);
            }
        }

        // scalar curvature jet (order 2)
        let mut scal_j = MJet::zeros(s, 2);
        for i in 0..n {
            for j in 0..n {
                let mut gj = ginv.at(i, j).clone();
                gj.truncate(2);
                scal_j.add_assign(&gj.mul(&ric_j[i * n + j], s));
            }
        }

        // ΔR = g^{ij}(∂_i∂_j R − Γ^k_{ij} ∂_k R)
        let mut lap_scal = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut v = scal_j.e2(s, i, j);
                for k in 0..n {
                    v -= gamma[(k * n + i) * n + j].d0 * scal_j.d1[k];
                }
                lap_scal += ginv.at(i, j).d0 * v;
            }
        }

        // |Ric|²_g = g^{ik} g^{jl} Ric_ij Ric_kl
        let ric: Vec<f64> = ric_j.iter().map(|j| j.d0).collect();
        let mut ric_norm_sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        ric_norm_sq += ginv.at(i, k).d0
                            * ginv.at(j, l).d0
                            * ric[i * n + j]
                            * ric[k * n + l];
                    }
                }
            }
        }

        let scal = scal_j.d0;
        let q = -lap_scal / (2.0 * (nf - 1.0))
            + (nf * nf * nf - 4.0 * nf * nf + 16.0 * nf - 16.0)
                / (8.0 * (nf - 1.0) * (nf - 1.0) * (nf - 2.0) * (nf - 2.0))
                * scal
                * scal
            - 2.0 / ((nf - 2.0) * (nf - 2.0)) * ric_norm_sq;

        MetricSample {
            n,
            grad_scal: scal_j.d1.clone(),
            g,
            ginv,
            ric,
            scal,
            lap_scal,
            ric_norm_sq,
            q,
            fd_error,
        }
    }

    /// Paneitz operator applied to u (supplied as an order-4 jet):
    /// Δ_g²u + a(n)⟨Ric, ∇²u⟩ − b(n) R Δ_g u
    /// + ((6−n)/(2(n−1)))⟨∇R, ∇u⟩ + c(n) Q u.
    pub fn paneitz_apply(&self, input: &MetricInput, u: &MJet, x: &[f64]) -> Result<f64, CoreError> {
        let sample = self.curvature_at(input, x)?;
        Ok(self.paneitz_from_sample(&sample, u))
    }

    pub fn paneitz_from_sample(&self, sample: &MetricSample, u: &MJet) -> f64 {
        let s = &self.space;
        let n = self.dim.n();
        let nf = self.dim.nf();
        let g = &sample.g;
        let ginv = &sample.ginv;
        let gamma = christoffel(g, ginv, s);

        // Δ_g u as an order-2 jet
        let lap_u = covariant_laplacian(u, ginv, &gamma, s, 2);

        // Δ_g² u (value)
        let bilap = covariant_laplacian(&lap_u, ginv, &gamma, s, 0).d0;

        // ⟨Ric, ∇²u⟩ = g^{ik}g^{jl} Ric_kl (∇²u)_ij
        let mut ric_hess = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut hess_ij = u.e2(s, i, j);
                for k in 0..n {
                    hess_ij -= gamma[(k * n + i) * n + j].d0 * u.d1[k];
                }
                for k in 0..n {
                    for l in 0..n {
                        ric_hess += ginv.at(i, k).d0
                            * ginv.at(j, l).d0
                            * sample.ric[k * n + l]
                            * hess_ij;
                    }
                }
            }
        }

        // ⟨∇R, ∇u⟩_g
        let mut grad_pair = 0.0;
        for i in 0..n {
            for j in 0..n {
                grad_pair += ginv.at(i, j).d0 * sample.grad_scal[i] * u.d1[j];
            }
        }

        bilap + self.dim.a() * ric_hess - self.dim.b() * sample.scal * lap_u.d0
            + (6.0 - nf) / (2.0 * (nf - 1.0)) * grad_pair
            + self.dim.c() * sample.q * u.d0
    }
}

/// Γ^k_{ij} jets of order (g.ord − 1), indexed (k·n + i)·n + j.
pub fn christoffel(g: &JetMatrix, ginv: &JetMatrix, s: &JetSpace) -> Vec<MJet> {
    let n = g.n;
    let ord = g.e[0].ord - 1;
    let mut dg: Vec<MJet> = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for l in 0..n {
            for j in 0..n {
                dg.push(g.at(l, j).derivative(i, s));
            }
        }
    }
    let dg_at = |i: usize, l: usize, j: usize| &dg[(i * n + l) * n + j];
    let mut gamma = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = MJet::zeros(s, ord);
                for l in 0..n {
                    let mut sum = dg_at(i, l, j).clone();
                    sum.add_assign(dg_at(j, l, i));
                    let mut neg = dg_at(l, i, j).clone();
                    neg.scale_assign(-1.0);
                    sum.add_assign(&neg);
                    let mut gkl = ginv.at(k, l).clone();
                    gkl.truncate(ord);
                    acc.add_assign(&gkl.mul(&sum, s));
                }
                acc.scale_assign(0.5);
                gamma.push(acc);
            }
        }
    }
    gamma
}

/// Δ_g u = g^{ij}(∂_i∂_j u − Γ^k_{ij} ∂_k u) as a jet of order `out_ord`.
fn covariant_laplacian(
    u: &MJet,
    ginv: &JetMatrix,
    gamma: &[MJet],
    s: &JetSpace,
    out_ord: usize,
) -> MJet {
    let n = ginv.n;
    let mut acc = MJet::zeros(s, out_ord);
    for i in 0..n {
        for j in 0..n {
            let mut hess = u.derivative(i, s).derivative(j, s);
            hess.truncate(out_ord);
            for k in 0..n {
                let mut gk = gamma[(k * n + i) * n + j].clone();
                gk.truncate(out_ord);
                let mut du = u.derivative(k, s);
                du.truncate(out_ord);
                let mut t = gk.mul(&du, s);
                t.scale_assign(-1.0);
                hess.add_assign(&t);
            }
            let mut gij = ginv.at(i, j).clone();
            gij.truncate(out_ord);
            acc.add_assign(&gij.mul(&hess, s));
        }
    }
    acc
}

/// Jet-matrix inverse: X = g₀⁻¹ Σ_k (−(g − g₀) g₀⁻¹)^k, exact at order 4
/// because (g − g₀) has no constant part.
pub fn invert_jet_matrix(g: &JetMatrix, s: &JetSpace) -> Result<JetMatrix, CoreError> {
    let n = g.n;
    let ord = g.e[0].ord;
    // constant-part inverse by dense LU
    let g0 = nalgebra::DMatrix::from_fn(n, n, |a, b| g.at(a, b).d0);
    let g0inv = g0
        .clone()
        .try_inverse()
        .ok_or_else(|| CoreError::SingularSystem {
            reason: "metric matrix not invertible".into(),
        })?;
    let mut x0 = JetMatrix::zeros(s, ord);
    for a in 0..n {
        for b in 0..n {
            x0.e[a * n + b] = MJet::constant(s, ord, g0inv[(a, b)]);
        }
    }
    // delta = g − g0 (zero constant part)
    let mut delta = g.clone();
    for a in 0..n {
        delta.e[a * n + a].d0 -= g0[(a, a)];
        for b in 0..n {
            if a != b {
                delta.e[a * n + b].d0 -= g0[(a, b)];
            }
        }
    }
    let m = delta.mul(&x0, s); // (g − g0) g0⁻¹
    let mut out = JetMatrix::identity(s, ord);
    let mut term = JetMatrix::identity(s, ord);
    for _ in 0..4 {
        term = {
            let mut t = m.mul(&term, s);
            t.scale_assign(-1.0);
            t
        };
        out.add_assign(&term);
    }
    Ok(x0.mul(&out, s))
}

/// Metric jets by nested central differences with one Richardson level
/// and auto-halving until two successive estimates agree to `target`.
fn fd_metric_jets(
    g: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    x: &[f64],
    s: &JetSpace,
    base_step: f64,
    target: f64,
) -> Result<(JetMatrix, f64), CoreError> {
    let n = s.n;
    let build = |h: f64| -> JetMatrix {
        let mut m = JetMatrix::zeros(s, 4);
        let gv = g(x);
        for a in 0..n {
            for b in 0..n {
                m.e[a * n + b].d0 = gv[a * n + b];
            }
        }
        // order 1..4 on compressed tuples with Richardson per entry
        let entry = |dirs: &[usize], ab: (usize, usize), h: f64| -> f64 {
            fd_entry(g, x, dirs, ab, h)
        };
        for i in 0..n {
            for a in 0..n {
                for b in 0..n {
                    m.e[a * n + b].d1[i] = richardson(|hh| entry(&[i], (a, b), hh), h, 2);
                }
            }
        }
        for (r, t) in s.tup2.iter().enumerate() {
            let dirs = [t[0] as usize, t[1] as usize];
            for a in 0..n {
                for b in 0..n {
                    m.e[a * n + b].d2[r] = richardson(|hh| entry(&dirs, (a, b), hh), h, 2);
                }
            }
        }
        for (r, t) in s.tup3.iter().enumerate() {
            let dirs = [t[0] as usize, t[1] as usize, t[2] as usize];
            for a in 0..n {
                for b in 0..n {
                    m.e[a * n + b].d3[r] = richardson(|hh| entry(&dirs, (a, b), hh), h, 2);
                }
            }
        }
        for (r, t) in s.tup4.iter().enumerate() {
            let dirs = [t[0] as usize, t[1] as usize, t[2] as usize, t[3] as usize];
            for a in 0..n {
                for b in 0..n {
                    m.e[a * n + b].d4[r] = richardson(|hh| entry(&dirs, (a, b), hh), h, 2);
                }
            }
        }
        m
    };
    let mut h = base_step;
    let mut prev = build(h);
    for _ in 0..4 {
        h *= 0.5;
        let next = build(h);
        //比较 the two estimates
        let mut err: f64 = 0.0;
        let mut scale: f64 = 1e-300;
        for (a, b) in prev.e.iter().zip(&next.e) {
            for (u, v) in a
                .d1
                .iter()
                .chain(&a.d2)
                .chain(&a.d3)
                .chain(&a.d4)
                .zip(b.d1.iter().chain(&b.d2).chain(&b.d3).chain(&b.d4))
            {
                err = err.max((u - v).abs());
                scale = scale.max(v.abs());
            }
        }
        let rel = err / scale;
        if rel <= target {
            return Ok((next, rel));
        }
        prev = next;
    }
    Err(CoreError::StepTuning {
        achieved: f64::NAN,
        target,
    })
}

/// Central-difference entry ∂_{dirs} g_{ab} with product stencils.
fn fd_entry(
    g: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    x: &[f64],
    dirs: &[usize],
    ab: (usize, usize),
    h: f64,
) -> f64 {
    let n = x.len();
    let k = dirs.len();
    let mut total = 0.0;
    for mask in 0..(1u32 << k) {
        let mut xp = x.to_vec();
        let mut sign = 1.0;
        for (idx, &d) in dirs.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                xp[d] += h;
            } else {
                xp[d] -= h;
                sign = -sign;
            }
        }
        total += sign * g(&xp)[ab.0 * n + ab.1];
    }
    total / (2.0 * h).powi(k as i32)
}

fn richardson(f: impl Fn(f64) -> f64, h: f64, order: usize) -> f64 {
    let coarse = f(h);
    let fine = f(h * 0.5);
    let p = 2.0_f64.powi(order as i32);
    (p * fine - coarse) / (p - 1.0)
}
