//! Adaptive Gauss–Kronrod quadrature on finite intervals.
//!
//! 15-point Kronrod rule with embedded 7-point Gauss rule; the panel
//! error is the classical rescaled |K15 − G7| estimate. Panels are
//! bisected worst-first. Summation order is fixed (panels sorted by
//! left endpoint) so results are bit-reproducible.

use crate::error::CoreError;

/// Kronrod abscissae on [0,1] side (symmetric rule).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_2,
    0.949_107_912_342_758_524_5,
    0.864_864_423_359_769_072_8,
    0.741_531_185_599_394_439_9,
    0.586_087_235_467_691_130_3,
    0.405_845_151_377_397_166_9,
    0.207_784_955_007_898_467_6,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_96,
    0.063_092_092_629_978_553_29,
    0.104_790_010_322_250_183_8,
    0.140_653_259_715_525_918_7,
    0.169_004_726_639_267_902_8,
    0.190_350_578_064_785_409_9,
    0.204_432_940_075_298_892_4,
    0.209_482_141_084_727_828_0,
];

/// Gauss weights for the embedded 7-point rule (odd Kronrod indices).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_3,
    0.279_705_391_489_276_667_9,
    0.381_830_050_505_118_944_95,
    0.417_959_183_673_469_387_8,
];

/// One K15/G7 evaluation over [a,b]: returns (integral, error estimate,
/// integral of |f|).
pub fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_kronrod = f_center * WGK[7];
    let mut res_gauss = f_center * WG[3];
    let mut res_abs = res_kronrod.abs();

    let mut fv = [0.0_f64; 15];
    fv[7] = f_center;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let result = res_kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err, res_abs)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Adaptive integration of `f` over [a,b] to relative tolerance `rel_tol`
/// (with an absolute floor `abs_floor` for integrals near zero), using at
/// most `max_panels` panels. Returns (value, error estimate).
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
    max_panels: usize,
) -> Result<(f64, f64), CoreError> {
    let (v, e, _) = qk15(f, a, b);
    let mut panels = vec![Panel {
        a,
        b,
        value: v,
        err: e,
    }];

    loop {
        let total: f64 = sum_sorted(panels.iter().map(|p| p.value), &panels);
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let target = (rel_tol * total.abs()).max(abs_floor);
        if err <= target {
            return Ok((total, err));
        }
        if panels.len() >= max_panels {
            return Err(CoreError::ToleranceNotMet {
                tol: rel_tol,
                err,
                panels: panels.len(),
            });
        }
        // bisect the worst panel
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, p)| {
                if p.err > be {
                    (i, p.err)
                } else {
                    (bi, be)
                }
            });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // interval at floating-point resolution; give up on refining it
            let err_rest: f64 = panels.iter().map(|q| q.err).sum::<f64>() + p.err;
            let total2 = sum_sorted(
                panels.iter().map(|q| q.value).chain(std::iter::once(p.value)),
                &panels,
            );
            return Ok((total2, err_rest));
        }
        let (v1, e1, _) = qk15(f, p.a, mid);
        let (v2, e2, _) = qk15(f, mid, p.b);
        panels.push(Panel {
            a: p.a,
            b: mid,
            value: v1,
            err: e1,
        });
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            err: e2,
        });
    }
}

/// Deterministic summation: accumulate in ascending order of |value| is
/// overkill here; sorting panels by left endpoint is enough to fix the
/// order independent of the refinement history.
fn sum_sorted<I: Iterator<Item = f64>>(_vals: I, panels: &[Panel]) -> f64 {
    let mut idx: Vec<usize> = (0..panels.len()).collect();
    idx.sort_by(|&i, &j| panels[i].a.partial_cmp(&panels[j].a).unwrap());
    idx.iter().map(|&i| panels[i].value).sum()
}
