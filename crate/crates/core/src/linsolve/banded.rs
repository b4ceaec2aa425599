//! Banded LU with partial pivoting and a bordered (Schur-complement)
//! solver for the constrained systems.

use crate::error::CoreError;

/// Banded matrix in LAPACK-style storage with `kl` sub- and `ku`
/// superdiagonals. Factorization keeps `kl` extra fill rows.
pub struct BandedMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    /// (2*kl + ku + 1) × n storage, row = band index, col = column.
    pub data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; (2 * kl + ku + 1) * n],
        }
    }

    #[inline]
    fn band_row(&self, i: usize, j: usize) -> usize {
        // entry (i,j) lives at band row kl + ku + i − j
        self.kl + self.ku + i - j
    }

    /// Physical band (includes pivoting fill): j ≤ i + ku + kl, i ≤ j + kl.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i + self.ku + self.kl || i > j + self.kl {
            return 0.0;
        }
        self.data[self.band_row(i, j) * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i + self.ku + self.kl && i <= j + self.kl);
        let r = self.band_row(i, j);
        self.data[r * self.n + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i + self.ku + self.kl && i <= j + self.kl);
        let r = self.band_row(i, j);
        self.data[r * self.n + j] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let jlo = i.saturating_sub(self.kl);
            let jhi = (i + self.ku + self.kl).min(self.n - 1);
            let mut s = 0.0;
            for j in jlo..=jhi {
                s += self.get(i, j) * x[j];
            }
            y[i] = s;
        }
        y
    }

    /// In-place LU with partial pivoting (Givens-free row swaps within the
    /// band). Returns the factorization.
    pub fn lu(mut self) -> Result<BandedLu, CoreError> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let mut piv = vec![0usize; n];
        let mut growth: f64 = 0.0;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            // pivot search in column k, rows k..=min(k+kl, n−1)
            let imax = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in (k + 1)..=imax {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(CoreError::SingularSystem {
                    reason: format!("zero pivot at column {k}"),
                });
            }
            piv[k] = p;
            if p != k {
                // swap rows k and p within the physical band
                let jhi = (k + ku + kl).min(n - 1);
                for j in k..=jhi {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
            }
            let pivot = self.get(k, k);
            min_pivot = min_pivot.min(pivot.abs());
            growth = growth.max(pivot.abs());
            for i in (k + 1)..=imax {
                let m = self.get(i, k) / pivot;
                if m != 0.0 {
                    let r = self.band_row(i, k);
                    self.data[r * self.n + k] = m;
                    let jhi = (k + ku + kl).min(n - 1);
                    for j in (k + 1)..=jhi {
                        let delta = -m * self.get(k, j);
                        if delta != 0.0 {
                            self.add(i, j, delta);
                        }
                    }
                }
            }
        }
        Ok(BandedLu {
            mat: self,
            piv,
            condition_proxy: growth / min_pivot.max(f64::MIN_POSITIVE),
        })
    }
}

pub struct BandedLu {
    mat: BandedMatrix,
    piv: Vec<usize>,
    /// max pivot / min pivot — a cheap conditioning indicator.
    pub condition_proxy: f64,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.mat.n;
        let kl = self.mat.kl;
        let ku = self.mat.ku;
        let mut x = b.to_vec();
        // forward
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let imax = (k + kl).min(n - 1);
            for i in (k + 1)..=imax {
                let m = self.mat.get(i, k);
                if m != 0.0 {
                    x[i] -= m * x[k];
                }
            }
        }
        // back substitution
        for k in (0..n).rev() {
            let jhi = (k + ku + kl).min(n - 1);
            let mut s = x[k];
            for j in (k + 1)..=jhi {
                s -= self.mat.get(k, j) * x[j];
            }
            x[k] = s / self.mat.get(k, k);
        }
        x
    }
}

/// Solve the bordered system [A Cᵀ; C 0][x; b] = [f; d] by the Schur
/// complement on the border (C is m×n with small m).
pub fn solve_bordered(
    a: BandedMatrix,
    c_rows: &[Vec<f64>],
    f: &[f64],
    d: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, f64), CoreError> {
    let m = c_rows.len();
    let lu = a.lu()?;
    let x0 = lu.solve(f);
    if m == 0 {
        return Ok((x0, Vec::new(), lu.condition_proxy));
    }
    // Y = A⁻¹ Cᵀ (column per constraint)
    let cols: Vec<Vec<f64>> = c_rows.iter().map(|c| lu.solve(c)).collect();
    // S = C A⁻¹ Cᵀ ; rhs = C x0 − d
    let mut s = nalgebra::DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            s[(i, j)] = c_rows[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
        }
    }
    let mut rhs = nalgebra::DVector::zeros(m);
    for i in 0..m {
        rhs[i] = c_rows[i].iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>() - d[i];
    }
    let mult = s.lu().solve(&rhs).ok_or_else(|| CoreError::SingularSystem {
        reason: "bordered Schur complement singular".into(),
    })?;
    let mut x = x0;
    for j in 0..m {
        for (xi, yi) in x.iter_mut().zip(&cols[j]) {
            *xi -= mult[j] * yi;
        }
    }
    Ok((x, mult.iter().copied().collect(), lu.condition_proxy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn banded_lu_matches_dense_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let n = 40;
            let kl = 3;
            let ku = 3;
            let mut a = BandedMatrix::zeros(n, kl, ku);
            let mut dense = nalgebra::DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    let v: f64 = rng.gen_range(-1.0..1.0)
                        + if i == j { 4.0 } else { 0.0 };
                    a.set(i, j, v);
                    dense[(i, j)] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = a.lu().unwrap().solve(&b);
            let xd = dense
                .lu()
                .solve(&nalgebra::DVector::from_column_slice(&b))
                .unwrap();
            for i in 0..n {
                assert_relative_eq!(x[i], xd[i], max_relative = 1e-9, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn pivoting_handles_indefinite_band() {
        // symmetric indefinite with small diagonal entries
        let n = 30;
        let mut a = BandedMatrix::zeros(n, 2, 2);
        for i in 0..n {
            a.set(i, i, if i % 3 == 0 { 1e-8 } else { -2.0 });
            if i + 1 < n {
                a.set(i, i + 1, 1.5);
                a.set(i + 1, i, 1.5);
            }
        }
        let b = vec![1.0; n];
        let mat2 = {
            let mut m = BandedMatrix::zeros(n, 2, 2);
            m.data.copy_from_slice(&a.data);
            m
        };
        let x = a.lu().unwrap().solve(&b);
        let r = mat2.matvec(&x);
        for i in 0..n {
            assert_relative_eq!(r[i], 1.0, max_relative = 1e-8, epsilon = 1e-9);
        }
    }

    #[test]
    fn bordered_solve_enforces_constraints() {
        let n = 25;
        let mut a = BandedMatrix::zeros(n, 2, 2);
        for i in 0..n {
            a.set(i, i, 3.0);
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
                a.set(i + 1, i, -1.0);
            }
        }
        let c = vec![vec![1.0; n], (0..n).map(|i| i as f64).collect()];
        let f = vec![1.0; n];
        let d = vec![0.0, 0.0];
        let (x, mult, _) = solve_bordered(a, &c, &f, &d).unwrap();
        assert_eq!(mult.len(), 2);
        let c0: f64 = x.iter().sum();
        let c1: f64 = x.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
        assert!(c0.abs() < 1e-10);
        assert!(c1.abs() < 1e-9);
    }
}
