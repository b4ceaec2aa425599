//! Log-space Gamma/Beta helpers. Everything that could overflow at
//! n = 25 (sphere areas, Beta closed forms, moment products) goes
//! through `ln_gamma`.

use statrs::function::gamma::ln_gamma;

/// ln Γ(x) for x > 0.
pub fn lgamma(x: f64) -> f64 {
    ln_gamma(x)
}

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a+b).
pub fn lbeta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Surface area of the unit sphere S^{m-1} ⊂ ℝ^m: 2 π^{m/2} / Γ(m/2).
pub fn sphere_area(m: usize) -> f64 {
    let mf = m as f64;
    (std::f64::consts::PI.ln() * (mf / 2.0) + 2.0_f64.ln() - ln_gamma(mf / 2.0)).exp()
}

/// Volume of the unit ball in ℝ^m: π^{m/2} / Γ(m/2 + 1).
pub fn ball_volume(m: usize) -> f64 {
    let mf = m as f64;
    (std::f64::consts::PI.ln() * (mf / 2.0) - ln_gamma(mf / 2.0 + 1.0)).exp()
}

/// The Beta-function closed form for the bubble-type radial integral
/// ∫_0^∞ (2/(1+r²))^n r^{n-1} dr = 2^{n-1} B(n/2, n/2).
pub fn bubble_radial_closed_form(n: usize) -> f64 {
    let nf = n as f64;
    ((nf - 1.0) * 2.0_f64.ln() + lbeta(nf / 2.0, nf / 2.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas_match_known_values() {
        assert_relative_eq!(sphere_area(2), 2.0 * std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(
            sphere_area(4),
            2.0 * std::f64::consts::PI * std::f64::consts::PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(ball_volume(3), 4.0 / 3.0 * std::f64::consts::PI, max_relative = 1e-14);
    }

    #[test]
    fn bubble_mass_equals_sphere_volume() {
        // ω_{n-1} · 2^{n-1} B(n/2,n/2) = Vol(S^n) by the Legendre duplication
        // formula; check it numerically across the working range.
        for n in 5..=30 {
            let mass = sphere_area(n) * bubble_radial_closed_form(n);
            let vol_sn = sphere_area(n + 1);
            assert_relative_eq!(mass, vol_sn, max_relative = 1e-12);
        }
    }
}
