//! Constant four-tensors with the algebraic symmetries of the Weyl
//! curvature tensor, and the seed-symmetrize-project builder.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Sparse constant tensor W_{ijkl} with the Weyl symmetries:
/// antisymmetric in (i,j) and (k,l), symmetric under pair swap,
/// first Bianchi identity, and trace-free on (i,k).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylLikeTensor {
    pub n: usize,
    /// All nonzero components, fully materialized.
    pub entries: BTreeMap<(u16, u16, u16, u16), f64>,
}

/// Validation outcome per symmetry family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylReport {
    pub antisymmetry_ok: bool,
    pub pair_symmetry_ok: bool,
    pub bianchi_ok: bool,
    pub trace_free_ok: bool,
    pub nondegenerate: bool,
    /// First violating index tuple per failed family.
    pub first_violation: Option<(String, (usize, usize, usize, usize))>,
}

impl WeylReport {
    pub fn all_ok(&self) -> bool {
        self.antisymmetry_ok
            && self.pair_symmetry_ok
            && self.bianchi_ok
            && self.trace_free_ok
            && self.nondegenerate
    }
}

impl WeylLikeTensor {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.entries
            .get(&(i as u16, j as u16, k as u16, l as u16))
            .copied()
            .unwrap_or(0.0)
    }

    fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        if v != 0.0 {
            self.entries
                .insert((i as u16, j as u16, k as u16, l as u16), v);
        }
    }

    /// Build from raw seed components: symmetrize over the Riemann
    /// symmetry group, project out the Bianchi-violating part, then
    /// remove the Ricci trace by the Kulkarni–Nomizu correction.
    pub fn from_seed(n: usize, seed: &[(usize, usize, usize, usize, f64)]) -> Result<Self, CoreError> {
        for &(i, j, k, l, _) in seed {
            if i >= n || j >= n || k >= n || l >= n {
                return Err(CoreError::InvalidSpec {
                    reason: format!("seed index ({i},{j},{k},{l}) outside dimension {n}"),
                });
            }
        }
        // dense scratch over the index set touched by seeds plus traces:
        // use a map-based representation throughout (n can be 25).
        let mut t: BTreeMap<(u16, u16, u16, u16), f64> = BTreeMap::new();
        let addt = |m: &mut BTreeMap<(u16, u16, u16, u16), f64>,
                        i: usize,
                        j: usize,
                        k: usize,
                        l: usize,
                        v: f64| {
            if v != 0.0 {
                *m.entry((i as u16, j as u16, k as u16, l as u16)).or_insert(0.0) += v;
            }
        };
        // Riemann symmetrization of the seed
        for &(i, j, k, l, v) in seed {
            let w = v / 8.0;
            addt(&mut t, i, j, k, l, w);
            addt(&mut t, j, i, k, l, -w);
            addt(&mut t, i, j, l, k, -w);
            addt(&mut t, j, i, l, k, w);
            addt(&mut t, k, l, i, j, w);
            addt(&mut t, l, k, i, j, -w);
            addt(&mut t, k, l, j, i, -w);
            addt(&mut t, l, k, j, i, w);
        }
        // Bianchi projection: subtract the cyclic average over (j,k,l)
        let get_t = |m: &BTreeMap<(u16, u16, u16, u16), f64>, i: usize, j: usize, k: usize, l: usize| {
            m.get(&(i as u16, j as u16, k as u16, l as u16)).copied().unwrap_or(0.0)
        };
        let keys: Vec<(u16, u16, u16, u16)> = t.keys().copied().collect();
        let mut touched: std::collections::BTreeSet<(u16, u16, u16, u16)> = std::collections::BTreeSet::new();
        for &(i, j, k, l) in &keys {
            let (i, j, k, l) = (i as usize, j as usize, k as usize, l as usize);
            touched.insert((i as u16, j as u16, k as u16, l as u16));
            touched.insert((i as u16, k as u16, l as u16, j as u16));
            touched.insert((i as u16, l as u16, j as u16, k as u16));
        }
        let mut r: BTreeMap<(u16, u16, u16, u16), f64> = BTreeMap::new();
        for &(i, j, k, l) in &touched {
            let (i, j, k, l) = (i as usize, j as usize, k as usize, l as usize);
            let cyc = (get_t(&t, i, j, k, l) + get_t(&t, i, k, l, j) + get_t(&t, i, l, j, k)) / 3.0;
            let v = get_t(&t, i, j, k, l) - cyc;
            if v != 0.0 {
                r.insert((i as u16, j as u16, k as u16, l as u16), v);
            }
        }
        // Ricci trace and scalar
        let mut ric = vec![0.0; n * n];
        for (&(i, j, k, l), &v) in &r {
            if i == k {
                ric[j as usize * n + l as usize] += v;
            }
        }
        let scal: f64 = (0..n).map(|j| ric[j * n + j]).sum();
        // B = Ric − s/(2(n−1)) δ; subtract the Kulkarni–Nomizu part
        let mut b = ric.clone();
        for j in 0..n {
            b[j * n + j] -= scal / (2.0 * (n as f64 - 1.0));
        }
        let mut w = WeylLikeTensor::zero(n);
        let bval = |p: usize, q: usize| b[p * n + q];
        // assemble W = R − C over all indices where either term lives
        let mut all_keys: std::collections::BTreeSet<(u16, u16, u16, u16)> =
            r.keys().copied().collect();
        let nz_b: Vec<(usize, usize)> = (0..n)
            .flat_map(|p| (0..n).map(move |q| (p, q)))
            .filter(|&(p, q)| bval(p, q) != 0.0)
            .collect();
        for &(p, q) in &nz_b {
            for m in 0..n {
                // the four δ-patterns of the KN product touch these tuples
                all_keys.insert((m as u16, p as u16, m as u16, q as u16));
                all_keys.insert((m as u16, p as u16, q as u16, m as u16));
                all_keys.insert((p as u16, m as u16, q as u16, m as u16));
                all_keys.insert((p as u16, m as u16, m as u16, q as u16));
            }
        }
        let nm2 = n as f64 - 2.0;
        for &(i, j, k, l) in &all_keys {
            let (i, j, k, l) = (i as usize, j as usize, k as usize, l as usize);
            let rv = r
                .get(&(i as u16, j as u16, k as u16, l as u16))
                .copied()
                .unwrap_or(0.0);
            let mut c = 0.0;
            if i == k {
                c += bval(j, l);
            }
            if i == l {
                c -= bval(j, k);
            }
            if j == l {
                c += bval(i, k);
            }
            if j == k {
                c -= bval(i, l);
            }
            let v = rv - c / nm2;
            if v.abs() > 0.0 {
                w.set(i, j, k, l, v);
            }
        }
        // drop numerically-dead entries
        let top = w
            .entries
            .values()
            .fold(0.0_f64, |acc, &v| acc.max(v.abs()));
        w.entries.retain(|_, v| v.abs() > 1e-14 * top);
        Ok(w)
    }

    /// Check all four invariant families plus non-degeneracy.
    pub fn validate(&self) -> WeylReport {
        let n = self.n;
        let mut report = WeylReport {
            antisymmetry_ok: true,
            pair_symmetry_ok: true,
            bianchi_ok: true,
            trace_free_ok: true,
            nondegenerate: false,
            first_violation: None,
        };
        let scale = self
            .entries
            .values()
            .fold(0.0_f64, |acc, &v| acc.max(v.abs()))
            .max(1e-300);
        let tol = 1e-12 * scale;

        let keys: Vec<(usize, usize, usize, usize)> = self
            .entries
            .keys()
            .map(|&(i, j, k, l)| (i as usize, j as usize, k as usize, l as usize))
            .collect();
        for &(i, j, k, l) in &keys {
            let v = self.get(i, j, k, l);
            if (v + self.get(j, i, k, l)).abs() > tol || (v + self.get(i, j, l, k)).abs() > tol {
                report.antisymmetry_ok = false;
                report
                    .first_violation
                    .get_or_insert(("antisymmetry".into(), (i, j, k, l)));
                break;
            }
        }
        for &(i, j, k, l) in &keys {
            let v = self.get(i, j, k, l);
            if (v - self.get(k, l, i, j)).abs() > tol {
                report.pair_symmetry_ok = false;
                report
                    .first_violation
                    .get_or_insert(("pair-symmetry".into(), (i, j, k, l)));
                break;
            }
        }
        for &(i, j, k, l) in &keys {
            let c = self.get(i, j, k, l) + self.get(i, k, l, j) + self.get(i, l, j, k);
            if c.abs() > tol {
                report.bianchi_ok = false;
                report
                    .first_violation
                    .get_or_insert(("bianchi".into(), (i, j, k, l)));
                break;
            }
        }
        'outer: for p in 0..n {
            for q in 0..n {
                let tr: f64 = (0..n).map(|i| self.get(i, p, i, q)).sum();
                if tr.abs() > tol * n as f64 {
                    report.trace_free_ok = false;
                    report
                        .first_violation
                        .get_or_insert(("trace-free".into(), (p, q, 0, 0)));
                    break 'outer;
                }
            }
        }
        let nd: f64 = self
            .entries
            .keys()
            .map(|&(i, j, k, l)| {
                let v = self.get(i as usize, j as usize, k as usize, l as usize)
                    + self.get(i as usize, l as usize, k as usize, j as usize);
                v * v
            })
            .sum();
        report.nondegenerate = nd > 0.0;
        report
    }

    /// H_{ik}(x) = Σ_{p,q} W_{ipkq} x_p x_q as a dense symmetric matrix.
    pub fn h_matrix(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut h = vec![0.0; n * n];
        for (&(i, p, k, q), &v) in &self.entries {
            h[i as usize * n + k as usize] += v * x[p as usize] * x[q as usize];
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_tensor_fails_only_nondegeneracy() {
        let w = WeylLikeTensor::zero(6);
        let rep = w.validate();
        assert!(rep.antisymmetry_ok && rep.pair_symmetry_ok && rep.bianchi_ok && rep.trace_free_ok);
        assert!(!rep.nondegenerate);
    }

    #[test]
    fn seed_builder_passes_all_families() {
        for n in [5usize, 9, 25] {
            let w = WeylLikeTensor::from_seed(n, &[(0, 1, 0, 1, 1.0)]).unwrap();
            let rep = w.validate();
            assert!(rep.all_ok(), "n = {n}: {rep:?}");
        }
        // richer seed
        let w = WeylLikeTensor::from_seed(7, &[(0, 1, 0, 1, 1.0), (2, 3, 4, 5, 0.5), (0, 2, 1, 3, -0.25)])
            .unwrap();
        assert!(w.validate().all_ok());
    }

    #[test]
    fn sign_violation_detected() {
        let mut w = WeylLikeTensor::zero(5);
        w.set(0, 1, 0, 1, 1.0);
        w.set(1, 0, 0, 1, 1.0); // should be −1
        let rep = w.validate();
        assert!(!rep.antisymmetry_ok);
        assert_eq!(rep.first_violation.as_ref().unwrap().0, "antisymmetry");
    }

    #[test]
    fn h_matrix_is_symmetric_trace_free_and_annihilates_x() {
        let n = 8;
        let w = WeylLikeTensor::from_seed(n, &[(0, 1, 0, 1, 2.0), (1, 2, 3, 4, 1.0)]).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let h = w.h_matrix(&x);
        let mut trace = 0.0;
        for i in 0..n {
            trace += h[i * n + i];
            for k in 0..n {
                assert!((h[i * n + k] - h[k * n + i]).abs() < 1e-12);
            }
        }
        assert!(trace.abs() < 1e-12);
        for k in 0..n {
            let contraction: f64 = (0..n).map(|i| x[i] * h[i * n + k]).sum();
            assert!(contraction.abs() < 1e-12, "x·H ≠ 0 at column {k}");
        }
    }
}
