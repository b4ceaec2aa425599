//! Forward-mode derivative arithmetic in one variable up to order 4.
//!
//! A `Jet4` carries (f, f', f'', f''', f'''') at a point and propagates
//! them through arithmetic; this is how the cutoff and every hand-written
//! radial profile expose exact derivatives without finite differences.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet4 {
    /// d[k] = k-th derivative (not divided by k!).
    pub d: [f64; 5],
}

impl Jet4 {
    pub const fn constant(v: f64) -> Self {
        Self {
            d: [v, 0.0, 0.0, 0.0, 0.0],
        }
    }

    /// The identity function evaluated at `v`.
    pub const fn variable(v: f64) -> Self {
        Self {
            d: [v, 1.0, 0.0, 0.0, 0.0],
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.d[0]
    }

    pub fn add(&self, o: &Jet4) -> Jet4 {
        let mut d = [0.0; 5];
        for k in 0..5 {
            d[k] = self.d[k] + o.d[k];
        }
        Jet4 { d }
    }

    pub fn sub(&self, o: &Jet4) -> Jet4 {
        let mut d = [0.0; 5];
        for k in 0..5 {
            d[k] = self.d[k] - o.d[k];
        }
        Jet4 { d }
    }

    pub fn scale(&self, c: f64) -> Jet4 {
        let mut d = self.d;
        for v in &mut d {
            *v *= c;
        }
        Jet4 { d }
    }

    /// Leibniz product rule.
    pub fn mul(&self, o: &Jet4) -> Jet4 {
        const BINOM: [[f64; 5]; 5] = [
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 0.0, 0.0],
            [1.0, 2.0, 1.0, 0.0, 0.0],
            [1.0, 3.0, 3.0, 1.0, 0.0],
            [1.0, 4.0, 6.0, 4.0, 1.0],
        ];
        let mut d = [0.0; 5];
        for k in 0..5 {
            let mut s = 0.0;
            for j in 0..=k {
                s += BINOM[k][j] * self.d[j] * o.d[k - j];
            }
            d[k] = s;
        }
        Jet4 { d }
    }

    /// Compose a univariate function (given by its derivatives at
    /// `self.value()`) with this jet: Faà di Bruno to order 4.
    pub fn compose(&self, f: &[f64; 5]) -> Jet4 {
        let g1 = self.d[1];
        let g2 = self.d[2];
        let g3 = self.d[3];
        let g4 = self.d[4];
        let mut d = [0.0; 5];
        d[0] = f[0];
        d[1] = f[1] * g1;
        d[2] = f[2] * g1 * g1 + f[1] * g2;
        d[3] = f[3] * g1 * g1 * g1 + 3.0 * f[2] * g1 * g2 + f[1] * g3;
        d[4] = f[4] * g1 * g1 * g1 * g1
            + 6.0 * f[3] * g1 * g1 * g2
            + f[2] * (3.0 * g2 * g2 + 4.0 * g1 * g3)
            + f[1] * g4;
        Jet4 { d }
    }

    pub fn recip(&self) -> Jet4 {
        let v = self.d[0];
        let iv = 1.0 / v;
        let f = [
            iv,
            -iv * iv,
            2.0 * iv * iv * iv,
            -6.0 * iv * iv * iv * iv,
            24.0 * iv * iv * iv * iv * iv,
        ];
        self.compose(&f)
    }

    pub fn div(&self, o: &Jet4) -> Jet4 {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Jet4 {
        let e = self.d[0].exp();
        self.compose(&[e, e, e, e, e])
    }

    /// Real power x^p (requires positive base for non-integer p).
    pub fn powf(&self, p: f64) -> Jet4 {
        let v = self.d[0];
        let mut f = [0.0; 5];
        let mut c = 1.0;
        for (k, fk) in f.iter_mut().enumerate() {
            *fk = c * v.powf(p - k as f64);
            c *= p - k as f64;
        }
        self.compose(&f)
    }

    pub fn powi(&self, p: i32) -> Jet4 {
        let v = self.d[0];
        let mut f = [0.0; 5];
        let mut c = 1.0;
        for (k, fk) in f.iter_mut().enumerate() {
            *fk = c * v.powi(p - k as i32);
            c *= (p - k as i32) as f64;
        }
        self.compose(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_and_compose_match_closed_forms() {
        // f(x) = x^2 * exp(x) at x = 0.7
        let x = Jet4::variable(0.7);
        let f = x.mul(&x).mul(&x.exp());
        let e = 0.7_f64.exp();
        // f = x^2 e^x, f' = (x^2+2x)e^x, f'' = (x^2+4x+2)e^x,
        // f''' = (x^2+6x+6)e^x, f'''' = (x^2+8x+12)e^x
        let x0: f64 = 0.7;
        assert_relative_eq!(f.d[0], x0 * x0 * e, max_relative = 1e-14);
        assert_relative_eq!(f.d[1], (x0 * x0 + 2.0 * x0) * e, max_relative = 1e-14);
        assert_relative_eq!(f.d[2], (x0 * x0 + 4.0 * x0 + 2.0) * e, max_relative = 1e-14);
        assert_relative_eq!(f.d[3], (x0 * x0 + 6.0 * x0 + 6.0) * e, max_relative = 1e-14);
        assert_relative_eq!(f.d[4], (x0 * x0 + 8.0 * x0 + 12.0) * e, max_relative = 1e-14);
    }

    #[test]
    fn reciprocal_and_powf() {
        let x = Jet4::variable(1.3);
        let r = x.recip();
        let p = x.powf(-1.0);
        for k in 0..5 {
            assert_relative_eq!(r.d[k], p.d[k], max_relative = 1e-12);
        }
    }
}
