//! Multivariate scalar jets to order 4 with symmetric-compressed
//! storage, the workhorse of the metric/curvature calculus.

use std::sync::Arc;

/// Ranking tables for symmetric index tuples of orders 2..4 in n
/// variables: any index tuple maps to the rank of its sorted form.
pub struct JetSpace {
    pub n: usize,
    pub idx2: Vec<u32>,
    pub tup2: Vec<[u8; 2]>,
    pub idx3: Vec<u32>,
    pub tup3: Vec<[u8; 3]>,
    pub idx4: Vec<u32>,
    pub tup4: Vec<[u8; 4]>,
}

impl JetSpace {
    pub fn new(n: usize) -> Arc<Self> {
        assert!(n <= 16, "jet space intended for small dimensions");
        let mut tup2 = Vec::new();
        for i in 0..n {
            for j in i..n {
                tup2.push([i as u8, j as u8]);
            }
        }
        let mut idx2 = vec![0u32; n * n];
        for (r, t) in tup2.iter().enumerate() {
            let (i, j) = (t[0] as usize, t[1] as usize);
            idx2[i * n + j] = r as u32;
            idx2[j * n + i] = r as u32;
        }
        let mut tup3 = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    tup3.push([i as u8, j as u8, k as u8]);
                }
            }
        }
        let mut idx3 = vec![0u32; n * n * n];
        for (r, t) in tup3.iter().enumerate() {
            let mut perm = [t[0] as usize, t[1] as usize, t[2] as usize];
            permute3(&mut perm, |p| {
                idx3[(p[0] * n + p[1]) * n + p[2]] = r as u32;
            });
        }
        let mut tup4 = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    for l in k..n {
                        tup4.push([i as u8, j as u8, k as u8, l as u8]);
                    }
                }
            }
        }
        let mut idx4 = vec![0u32; n * n * n * n];
        for (r, t) in tup4.iter().enumerate() {
            let mut perm = [t[0] as usize, t[1] as usize, t[2] as usize, t[3] as usize];
            permute4(&mut perm, |p| {
                idx4[((p[0] * n + p[1]) * n + p[2]) * n + p[3]] = r as u32;
            });
        }
        Arc::new(Self {
            n,
            idx2,
            tup2,
            idx3,
            tup3,
            idx4,
            tup4,
        })
    }

    #[inline]
    pub fn r2(&self, i: usize, j: usize) -> usize {
        self.idx2[i * self.n + j] as usize
    }
    #[inline]
    pub fn r3(&self, i: usize, j: usize, k: usize) -> usize {
        self.idx3[(i * self.n + j) * self.n + k] as usize
    }
    #[inline]
    pub fn r4(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        self.idx4[((i * self.n + j) * self.n + k) * self.n + l] as usize
    }
}

fn permute3(p: &mut [usize; 3], mut f: impl FnMut(&[usize; 3])) {
    let orig = *p;
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    for perm in perms {
        let q = [orig[perm[0]], orig[perm[1]], orig[perm[2]]];
        *p = q;
        f(p);
    }
}

fn permute4(p: &mut [usize; 4], mut f: impl FnMut(&[usize; 4])) {
    let orig = *p;
    // all 24 permutations
    let mut idx = [0usize; 4];
    for a in 0..4 {
        for b in 0..4 {
            if b == a {
                continue;
            }
            for c in 0..4 {
                if c == a || c == b {
                    continue;
                }
                let d = 6 - a - b - c;
                idx = [a, b, c, d];
                let q = [orig[idx[0]], orig[idx[1]], orig[idx[2]], orig[idx[3]]];
                *p = q;
                f(p);
            }
        }
    }
    let _ = idx;
}

/// Scalar jet: value and symmetric derivative tensors up to `ord`.
#[derive(Debug, Clone)]
pub struct MJet {
    pub ord: usize,
    pub d0: f64,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
    pub d4: Vec<f64>,
}

impl MJet {
    pub fn zeros(space: &JetSpace, ord: usize) -> Self {
        Self {
            ord,
            d0: 0.0,
            d1: vec![0.0; if ord >= 1 { space.n } else { 0 }],
            d2: vec![0.0; if ord >= 2 { space.tup2.len() } else { 0 }],
            d3: vec![0.0; if ord >= 3 { space.tup3.len() } else { 0 }],
            d4: vec![0.0; if ord >= 4 { space.tup4.len() } else { 0 }],
        }
    }

    pub fn constant(space: &JetSpace, ord: usize, v: f64) -> Self {
        let mut j = Self::zeros(space, ord);
        j.d0 = v;
        j
    }

    pub fn add_assign(&mut self, other: &MJet) {
        let ord = self.ord.min(other.ord);
        self.truncate(ord);
        self.d0 += other.d0;
        for (a, b) in self.d1.iter_mut().zip(&other.d1) {
            *a += b;
        }
        for (a, b) in self.d2.iter_mut().zip(&other.d2) {
            *a += b;
        }
        for (a, b) in self.d3.iter_mut().zip(&other.d3) {
            *a += b;
        }
        for (a, b) in self.d4.iter_mut().zip(&other.d4) {
            *a += b;
        }
    }

    pub fn truncate(&mut self, ord: usize) {
        if ord < 4 {
            self.d4.clear();
        }
        if ord < 3 {
            self.d3.clear();
        }
        if ord < 2 {
            self.d2.clear();
        }
        if ord < 1 {
            self.d1.clear();
        }
        self.ord = self.ord.min(ord);
    }

    pub fn scale_assign(&mut self, c: f64) {
        self.d0 *= c;
        self.d1.iter_mut().for_each(|v| *v *= c);
        self.d2.iter_mut().for_each(|v| *v *= c);
        self.d3.iter_mut().for_each(|v| *v *= c);
        self.d4.iter_mut().for_each(|v| *v *= c);
    }

    pub fn scaled(&self, c: f64) -> MJet {
        let mut out = self.clone();
        out.scale_assign(c);
        out
    }

    #[inline]
    pub fn e1(&self, i: usize) -> f64 {
        self.d1[i]
    }
    #[inline]
    pub fn e2(&self, s: &JetSpace, i: usize, j: usize) -> f64 {
        self.d2[s.r2(i, j)]
    }
    #[inline]
    pub fn e3(&self, s: &JetSpace, i: usize, j: usize, k: usize) -> f64 {
        self.d3[s.r3(i, j, k)]
    }
    #[inline]
    pub fn e4(&self, s: &JetSpace, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.d4[s.r4(i, j, k, l)]
    }

    /// Leibniz product; result order = min of the operand orders.
    pub fn mul(&self, other: &MJet, s: &JetSpace) -> MJet {
        let ord = self.ord.min(other.ord);
        let mut out = MJet::zeros(s, ord);
        out.d0 = self.d0 * other.d0;
        if ord >= 1 {
            for i in 0..s.n {
                out.d1[i] = self.d1[i] * other.d0 + self.d0 * other.d1[i];
            }
        }
        if ord >= 2 {
            for (r, t) in s.tup2.iter().enumerate() {
                let (i, j) = (t[0] as usize, t[1] as usize);
                out.d2[r] = self.e2(s, i, j) * other.d0
                    + self.d1[i] * other.d1[j]
                    + self.d1[j] * other.d1[i]
                    + self.d0 * other.e2(s, i, j);
            }
        }
        if ord >= 3 {
            for (r, t) in s.tup3.iter().enumerate() {
                let (i, j, k) = (t[0] as usize, t[1] as usize, t[2] as usize);
                out.d3[r] = self.e3(s, i, j, k) * other.d0
                    + self.e2(s, i, j) * other.d1[k]
                    + self.e2(s, i, k) * other.d1[j]
                    + self.e2(s, j, k) * other.d1[i]
                    + self.d1[i] * other.e2(s, j, k)
                    + self.d1[j] * other.e2(s, i, k)
                    + self.d1[k] * other.e2(s, i, j)
                    + self.d0 * other.e3(s, i, j, k);
            }
        }
        if ord >= 4 {
            for (r, t) in s.tup4.iter().enumerate() {
                let (i, j, k, l) = (
                    t[0] as usize,
                    t[1] as usize,
                    t[2] as usize,
                    t[3] as usize,
                );
                out.d4[r] = self.e4(s, i, j, k, l) * other.d0
                    + self.d0 * other.e4(s, i, j, k, l)
                    + self.e3(s, i, j, k) * other.d1[l]
                    + self.e3(s, i, j, l) * other.d1[k]
                    + self.e3(s, i, k, l) * other.d1[j]
                    + self.e3(s, j, k, l) * other.d1[i]
                    + self.d1[l] * other.e3(s, i, j, k)
                    + self.d1[k] * other.e3(s, i, j, l)
                    + self.d1[j] * other.e3(s, i, k, l)
                    + self.d1[i] * other.e3(s, j, k, l)
                    + self.e2(s, i, j) * other.e2(s, k, l)
                    + self.e2(s, i, k) * other.e2(s, j, l)
                    + self.e2(s, i, l) * other.e2(s, j, k)
                    + self.e2(s, k, l) * other.e2(s, i, j)
                    + self.e2(s, j, l) * other.e2(s, i, k)
                    + self.e2(s, j, k) * other.e2(s, i, l);
            }
        }
        out
    }

    /// Jet of ∂_m f (order drops by one).
    pub fn derivative(&self, m: usize, s: &JetSpace) -> MJet {
        assert!(self.ord >= 1);
        let ord = self.ord - 1;
        let mut out = MJet::zeros(s, ord);
        out.d0 = self.d1[m];
        if ord >= 1 {
            for i in 0..s.n {
                out.d1[i] = self.e2(s, i, m);
            }
        }
        if ord >= 2 {
            for (r, t) in s.tup2.iter().enumerate() {
                out.d2[r] = self.e3(s, t[0] as usize, t[1] as usize, m);
            }
        }
        if ord >= 3 {
            for (r, t) in s.tup3.iter().enumerate() {
                out.d3[r] = self.e4(s, t[0] as usize, t[1] as usize, t[2] as usize, m);
            }
        }
        out
    }

    /// Compose with a univariate outer function given by its derivatives
    /// u = [u(f₀), u'(f₀), …, u''''(f₀)] (Faà di Bruno).
    pub fn compose(&self, u: &[f64; 5], s: &JetSpace) -> MJet {
        let ord = self.ord;
        let mut out = MJet::zeros(s, ord);
        out.d0 = u[0];
        if ord >= 1 {
            for i in 0..s.n {
                out.d1[i] = u[1] * self.d1[i];
            }
        }
        if ord >= 2 {
            for (r, t) in s.tup2.iter().enumerate() {
                let (i, j) = (t[0] as usize, t[1] as usize);
                out.d2[r] = u[2] * self.d1[i] * self.d1[j] + u[1] * self.e2(s, i, j);
            }
        }
        if ord >= 3 {
            for (r, t) in s.tup3.iter().enumerate() {
                let (i, j, k) = (t[0] as usize, t[1] as usize, t[2] as usize);
                out.d3[r] = u[3] * self.d1[i] * self.d1[j] * self.d1[k]
                    + u[2]
                        * (self.e2(s, i, j) * self.d1[k]
                            + self.e2(s, i, k) * self.d1[j]
                            + self.e2(s, j, k) * self.d1[i])
                    + u[1] * self.e3(s, i, j, k);
            }
        }
        if ord >= 4 {
            for (r, t) in s.tup4.iter().enumerate() {
                let (i, j, k, l) = (
                    t[0] as usize,
                    t[1] as usize,
                    t[2] as usize,
                    t[3] as usize,
                );
                let f1 = [self.d1[i], self.d1[j], self.d1[k], self.d1[l]];
                out.d4[r] = u[4] * f1[0] * f1[1] * f1[2] * f1[3]
                    + u[3]
                        * (self.e2(s, i, j) * f1[2] * f1[3]
                            + self.e2(s, i, k) * f1[1] * f1[3]
                            + self.e2(s, i, l) * f1[1] * f1[2]
                            + self.e2(s, j, k) * f1[0] * f1[3]
                            + self.e2(s, j, l) * f1[0] * f1[2]
                            + self.e2(s, k, l) * f1[0] * f1[1])
                    + u[2]
                        * (self.e2(s, i, j) * self.e2(s, k, l)
                            + self.e2(s, i, k) * self.e2(s, j, l)
                            + self.e2(s, i, l) * self.e2(s, j, k)
                            + self.e3(s, i, j, k) * f1[3]
                            + self.e3(s, i, j, l) * f1[2]
                            + self.e3(s, i, k, l) * f1[1]
                            + self.e3(s, j, k, l) * f1[0])
                    + u[1] * self.e4(s, i, j, k, l);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = self.d0.abs();
        for v in self.d1.iter().chain(&self.d2).chain(&self.d3).chain(&self.d4) {
            m = m.max(v.abs());
        }
        m
    }
}
