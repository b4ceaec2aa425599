//! Dense symmetric derivative tensors up to order 4, plus the radial
//! chain-rule builder used by every radial field in the crate.
//!
//! For F(x) = f(s) with s = |x−c|², the derivative tensors are
//!   ∂_i F      = 2 f' z_i
//!   ∂_ij F     = 2 f' δ_ij + 4 f'' z_i z_j
//!   ∂_ijk F    = 4 f''(δ_ij z_k + δ_ik z_j + δ_jk z_i) + 8 f''' z_i z_j z_k
//!   ∂_ijkl F   = 4 f''(δ_ij δ_kl + δ_ik δ_jl + δ_jk δ_il)
//!              + 8 f'''(six δ z z terms) + 16 f'''' z_i z_j z_k z_l
//! with z = x − c.

use crate::jet::Jet4;

/// Derivative data of a scalar field at a point, orders 0..=4.
#[derive(Debug, Clone)]
pub enum DerivTensor {
    Scalar(f64),
    Grad(Vec<f64>),
    /// Row-major n×n, symmetric.
    Hess(Vec<f64>),
    /// Dense n³, fully symmetric.
    Third(Vec<f64>),
    /// Dense n⁴, fully symmetric.
    Fourth(Vec<f64>),
}

impl DerivTensor {
    pub fn scalar(&self) -> f64 {
        match self {
            DerivTensor::Scalar(v) => *v,
            _ => panic!("expected scalar tensor"),
        }
    }

    pub fn grad(&self) -> &[f64] {
        match self {
            DerivTensor::Grad(v) => v,
            _ => panic!("expected gradient"),
        }
    }

    pub fn hess(&self) -> &[f64] {
        match self {
            DerivTensor::Hess(v) => v,
            _ => panic!("expected hessian"),
        }
    }
}

/// All derivatives (orders 0..=4) of a radial field at one point,
/// kept in the factored radial form for cheap contractions.
#[derive(Debug, Clone)]
pub struct RadialDerivs {
    /// f(s), f'(s), …, f''''(s) at s = |z|².
    pub fjet: Jet4,
    pub z: Vec<f64>,
}

impl RadialDerivs {
    pub fn order(&self, k: usize, n: usize) -> DerivTensor {
        let f = &self.fjet.d;
        let z = &self.z;
        match k {
            0 => DerivTensor::Scalar(f[0]),
            1 => DerivTensor::Grad((0..n).map(|i| 2.0 * f[1] * z[i]).collect()),
            2 => {
                let mut h = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        let mut v = 4.0 * f[2] * z[i] * z[j];
                        if i == j {
                            v += 2.0 * f[1];
                        }
                        h[i * n + j] = v;
                    }
                }
                DerivTensor::Hess(h)
            }
            3 => {
                let mut t = vec![0.0; n * n * n];
                for i in 0..n {
                    for j in 0..n {
                        for l in 0..n {
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
                            t[(i * n + j) * n + l] = v;
                        }
                    }
                }
                DerivTensor::Third(t)
            }
            4 => {
                let mut t = vec![0.0; n * n * n * n];
                for i in 0..n {
                    for j in 0..n {
                        for l in 0..n {
                            for m in 0..n {
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
                                t[((i * n + j) * n + l) * n + m] = v;
                            }
                        }
                    }
                }
                DerivTensor::Fourth(t)
            }
            _ => panic!("derivative order {k} > 4"),
        }
    }

    /// Laplacian Δ F = 2n f' + 4 s f''.
    pub fn laplacian(&self, n: usize) -> f64 {
        let s: f64 = self.z.iter().map(|v| v * v).sum();
        2.0 * n as f64 * self.fjet.d[1] + 4.0 * s * self.fjet.d[2]
    }

    /// Jet of ΔF as a radial function of s: A = 2n f' + 4 s f''
    /// (usable only to order 2 since f itself stops at order 4).
    pub fn laplacian_jet(&self, n: usize) -> Jet4 {
        let s: f64 = self.z.iter().map(|v| v * v).sum();
        let f = &self.fjet.d;
        let nf = n as f64;
        Jet4 {
            d: [
                2.0 * nf * f[1] + 4.0 * s * f[2],
                (2.0 * nf + 4.0) * f[2] + 4.0 * s * f[3],
                (2.0 * nf + 8.0) * f[3] + 4.0 * s * f[4],
                0.0,
                0.0,
            ],
        }
    }

    /// Bilaplacian Δ²F = 2n A' + 4 s A'' with A = ΔF.
    pub fn bilaplacian(&self, n: usize) -> f64 {
        let s: f64 = self.z.iter().map(|v| v * v).sum();
        let a = self.laplacian_jet(n);
        2.0 * n as f64 * a.d[1] + 4.0 * s * a.d[2]
    }
}
