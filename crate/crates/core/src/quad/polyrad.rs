//! Integration over ℝⁿ of integrands factored as
//! Σ_α x^α f_α(|x|): exact sphere moments × adaptive radial quadrature.

use crate::error::CoreError;
use crate::quad::moments::{sphere_moment, MultiIndex};
use crate::quad::radial::{radial_integrate, QuadratureSpec, RadialProfile};

/// One term x^α f_α(|x|) of a polynomial-times-radial integrand.
pub struct PolyRadialTerm<'a> {
    pub alpha: MultiIndex,
    pub profile: RadialProfile<'a>,
}

/// Σ_α x^α f_α(|x|) with a finite term list.
pub struct PolyRadialIntegrand<'a> {
    pub terms: Vec<PolyRadialTerm<'a>>,
}

impl<'a> PolyRadialIntegrand<'a> {
    pub fn new(terms: Vec<PolyRadialTerm<'a>>) -> Self {
        Self { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.terms
            .iter()
            .map(|t| t.alpha.eval(x) * (t.profile.eval)(r))
            .sum()
    }
}

/// ∫_{ℝⁿ} Σ_α x^α f_α(|x|) dx = Σ_α S_α · ∫_0^∞ f_α(r) r^{|α|+n−1} dr,
/// with S_α the exact sphere moment. Every term is convergence-gated.
pub fn polyradial_integrate(
    g: &PolyRadialIntegrand,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<(f64, f64), CoreError> {
    let mut total = 0.0;
    let mut err = 0.0;
    for term in &g.terms {
        let moment = sphere_moment(&term.alpha, n)?;
        let shift = term.alpha.degree() as f64;
        // convergence gate on the shifted profile f_α(r) r^{|α|}
        let hint = term.profile.decay_hint - shift;
        if hint <= n as f64 {
            return Err(CoreError::ConvergenceGate {
                hint: term.profile.decay_hint - shift,
                n,
            });
        }
        if moment == 0.0 {
            continue;
        }
        let shifted = RadialProfile::new(|r: f64| (term.profile.eval)(r) * r.powf(shift), hint);
        let (v, e) = radial_integrate(&shifted, n, spec)?;
        total += moment * v;
        err += moment.abs() * e;
    }
    Ok((total, err))
}
