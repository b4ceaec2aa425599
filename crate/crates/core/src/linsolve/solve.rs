//! Galerkin solver for the constrained linearized problem around a
//! bubble, reduced to radial fourth-order problems per angular sector:
//! cubic Hermite elements on the mapped grid r = s/(1−s), natural
//! boundary handling at the far end, and Lagrange-multiplier bordering
//! for the n+1 constraints.

use crate::bubbles::{phi_0_radial, phi_k_radial, Bubble};
use crate::dim::Dimension;
use crate::error::CoreError;
use crate::linsolve::banded::{solve_bordered, BandedMatrix};
use crate::linsolve::sector::{
    angular_l2_sq, gamma_frame_field, potential_coeff, AngularProjection, SectorBasis,
};
use crate::quad::spheregrid::gauss_legendre;
use crate::sym::{bubble_sjet_fn, Window};
use crate::weyl::WeylLikeTensor;

/// Radial mesh: uniform in s on [0, s_max], r = s/(1−s).
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct RadialGrid {
    pub nodes: usize,
    pub r_max: f64,
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self {
            nodes: 2000,
            r_max: 1e4,
        }
    }
}

impl RadialGrid {
    pub fn s_max(&self) -> f64 {
        self.r_max / (1.0 + self.r_max)
    }
    pub fn s_nodes(&self) -> Vec<f64> {
        let m = self.s_max();
        (0..self.nodes)
            .map(|i| m * i as f64 / (self.nodes - 1) as f64)
            .collect()
    }
    pub fn r_of_s(s: f64) -> f64 {
        s / (1.0 - s)
    }
}

/// One sector problem: the linearized operator in harmonic degree d with
/// the bubble potential, Γ-side data in the given frame.
pub struct SectorProblem<'a> {
    pub dim: Dimension,
    pub weyl: &'a WeylLikeTensor,
    /// window (τ and scale λ) of the perturbation
    pub window: Window,
    /// μ λ⁸ amplitude (1 for the normalized problem)
    pub amplitude: f64,
    /// bubble center − window center
    pub offset: Vec<f64>,
    /// bubble scale ε
    pub eps: f64,
}

/// Solution of the sector-reduced constrained problem.
pub struct SectorSolution {
    pub grid: RadialGrid,
    pub s_nodes: Vec<f64>,
    pub r_nodes: Vec<f64>,
    /// ψ values at nodes (degree-2 sector profile, Y-normalized).
    pub psi: Vec<f64>,
    /// dψ/ds at nodes.
    pub psi_slope: Vec<f64>,
    /// Lagrange multipliers b_0..b_n.
    pub multipliers: Vec<f64>,
    /// ‖A x + Cᵀ b − F‖_∞ / max(‖F‖_∞, ε)
    pub galerkin_residual: f64,
    /// ‖γ_Y‖-scale: max |sector RHS| over the grid.
    pub gamma_scale: f64,
    /// min over sampled radii of (Y-sector energy)/(total angular L²).
    pub sector_purity: f64,
    /// conditioning proxy of the factored degree-2 block.
    pub condition_proxy: f64,
    /// ∫ Γ̄ z̄ with the far-field tail correction.
    pub gamma_z_pairing: f64,
    pub gamma_z_tail_error: f64,
    /// the sector direction M = H(offset) and its angular norm.
    pub sector_m: Vec<f64>,
    pub sector_norm_y: f64,
    /// bubble scale used.
    pub eps: f64,
}

/// Assembled block for one harmonic degree.
struct Block {
    a: BandedMatrix,
    mass: BandedMatrix,
    f: Vec<f64>,
    scale: Vec<f64>,
    free: Vec<bool>,
    n_dof: usize,
}

const KL: usize = 3;
const KU: usize = 3;

fn hermite_shapes(t: f64, h: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    // value/slope basis on [0,1] scaled by element length h for slopes
    let v = [
        1.0 - 3.0 * t * t + 2.0 * t * t * t,
        (t - 2.0 * t * t + t * t * t) * h,
        3.0 * t * t - 2.0 * t * t * t,
        (-t * t + t * t * t) * h,
    ];
    let d1 = [
        (-6.0 * t + 6.0 * t * t) / h,
        1.0 - 4.0 * t + 3.0 * t * t,
        (6.0 * t - 6.0 * t * t) / h,
        -2.0 * t + 3.0 * t * t,
    ];
    let d2 = [
        (-6.0 + 12.0 * t) / (h * h),
        (-4.0 + 6.0 * t) / h,
        (6.0 - 12.0 * t) / (h * h),
        (-2.0 + 6.0 * t) / h,
    ];
    // d1 entries: derivative wrt s of the basis (slope dofs carry h)
    (v, d1, d2)
}

/// Essential boundary conditions at r = 0 per harmonic degree.
#[derive(Clone, Copy, PartialEq)]
enum BcKind {
    /// degree 0: slope(0) = 0
    SlopeOnly,
    /// degree 1: value(0) = 0
    ValueOnly,
    /// degree ≥ 2: value(0) = slope(0) = 0
    Both,
}

fn assemble_block(
    dim: &Dimension,
    grid: &RadialGrid,
    kappa: f64,
    eps: f64,
    rhs: Option<&dyn Fn(f64) -> f64>,
    bc: BcKind,
) -> Block {
    let n_nodes = grid.nodes;
    let n_dof = 2 * n_nodes;
    let s_nodes = grid.s_nodes();
    let mut a = BandedMatrix::zeros(n_dof, KL, KU);
    let mut mass = BandedMatrix::zeros(n_dof, KL, KU);
    let mut f = vec![0.0; n_dof];
    let (qx, qw) = gauss_legendre(6);
    let nf = dim.nf();
    let cpot = potential_coeff(dim);
    let bubble = Bubble {
        center: vec![],
        eps,
    };

    for e in 0..n_nodes - 1 {
        let sa = s_nodes[e];
        let sb = s_nodes[e + 1];
        let h = sb - sa;
        let dofs = [2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3];
        let mut aloc = [[0.0; 4]; 4];
        let mut mloc = [[0.0; 4]; 4];
        let mut floc = [0.0; 4];
        for (xq, wq) in qx.iter().zip(&qw) {
            let t = 0.5 * (xq + 1.0);
            let wq = wq * 0.5 * h;
            let s = sa + t * h;
            let r = RadialGrid::r_of_s(s);
            if r == 0.0 {
                continue;
            }
            let one_ms = 1.0 - s;
            let s_r = one_ms * one_ms; // ds/dr
            let s_rr = -2.0 * one_ms * one_ms * one_ms; // d²s/dr²
            let dr_ds = 1.0 / s_r;
            let (v, d1, d2) = hermite_shapes(t, h);
            // L φ = φ_rr + (n−1)/r φ_r − κ/r² φ
            let mut lphi = [0.0; 4];
            let mut phi = [0.0; 4];
            for p in 0..4 {
                let phi_s = d1[p];
                let phi_ss = d2[p];
                let phi_r = phi_s * s_r;
                let phi_rr = phi_ss * s_r * s_r + phi_s * s_rr;
                lphi[p] = phi_rr + (nf - 1.0) / r * phi_r - kappa / (r * r) * v[p];
                phi[p] = v[p];
            }
            let weight = wq * r.powf(nf - 1.0) * dr_ds;
            let pot = cpot * bubble.potential(r);
            for p in 0..4 {
                for q in 0..4 {
                    aloc[p][q] += weight * (lphi[p] * lphi[q] - pot * phi[p] * phi[q]);
                    mloc[p][q] += weight * phi[p] * phi[q];
                }
            }
            if let Some(g) = rhs {
                let gv = g(r);
                for p in 0..4 {
                    floc[p] -= weight * gv * phi[p];
                }
            }
        }
        for p in 0..4 {
            for q in 0..4 {
                a.add(dofs[p], dofs[q], aloc[p][q]);
                mass.add(dofs[p], dofs[q], mloc[p][q]);
            }
            f[dofs[p]] += floc[p];
        }
    }

    // essential BCs at the origin node, symmetric elimination
    let mut free = vec![true; n_dof];
    match bc {
        BcKind::SlopeOnly => free[1] = false,
        BcKind::ValueOnly => free[0] = false,
        BcKind::Both => {
            free[0] = false;
            free[1] = false;
        }
    }
    for d in 0..n_dof {
        if !free[d] {
            // zero row/column within band, unit diagonal
            for j in d.saturating_sub(KL + KU)..=(d + KL + KU).min(n_dof - 1) {
                if j != d {
                    if j <= d + KU + KL && d <= j + KL {
                        a.set(d, j, 0.0);
                    }
                    if d <= j + KU + KL && j <= d + KL {
                        a.set(j, d, 0.0);
                    }
                }
            }
            a.set(d, d, 1.0);
            f[d] = 0.0;
        }
    }

    // symmetric equilibration
    let mut scale = vec![1.0; n_dof];
    for d in 0..n_dof {
        let v = a.get(d, d).abs();
        if v > 0.0 {
            scale[d] = 1.0 / v.sqrt();
        }
    }
    let mut a_s = BandedMatrix::zeros(n_dof, KL, KU);
    for i in 0..n_dof {
        for j in i.saturating_sub(KL)..=(i + KU).min(n_dof - 1) {
            let v = a.get(i, j);
            if v != 0.0 {
                a_s.set(i, j, v * scale[i] * scale[j]);
            }
        }
    }
    let f_s: Vec<f64> = f.iter().zip(&scale).map(|(v, s)| v * s).collect();
    Block {
        a: a_s,
        mass,
        f: f_s,
        scale,
        free,
        n_dof,
    }
}

/// Symmetry defect of the assembled degree-2 block before bordering.
pub fn assembly_symmetry_defect(dim: &Dimension, grid: &RadialGrid, eps: f64) -> f64 {
    let block = assemble_block(dim, grid, 2.0 * dim.nf(), eps, None, BcKind::Both);
    let mut defect: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..block.n_dof {
        for j in i.saturating_sub(KL)..=(i + KU).min(block.n_dof - 1) {
            let a = block.a.get(i, j);
            let b = block.a.get(j, i);
            defect = defect.max((a - b).abs());
            scale = scale.max(a.abs());
        }
    }
    defect / scale.max(1e-300)
}

/// Solve one sector block with optional constraint rows; returns node
/// values/slopes, multipliers, and the scaled algebraic residual.
fn solve_block(
    block: Block,
    constraints: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, f64, f64), CoreError> {
    let n_dof = block.n_dof;
    // scale constraint rows; zero constrained dofs
    let c_scaled: Vec<Vec<f64>> = constraints
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(d, v)| if block.free[d] { v * block.scale[d] } else { 0.0 })
                .collect()
        })
        .collect();
    let d = vec![0.0; c_scaled.len()];
    let a_copy = {
        let mut m = BandedMatrix::zeros(n_dof, KL, KU);
        m.data.copy_from_slice(&block.a.data);
        m
    };
    let (y, mult, cond) = solve_bordered(block.a, &c_scaled, &block.f, &d)?;
    // algebraic residual in the scaled system
    let mut r = a_copy.matvec(&y);
    for (row, &b) in c_scaled.iter().zip(&mult) {
        for (ri, ci) in r.iter_mut().zip(row) {
            *ri += ci * b;
        }
    }
    let fscale = block
        .f
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let res = r
        .iter()
        .zip(&block.f)
        .fold(0.0_f64, |m, (ri, fi)| m.max((ri - fi).abs()))
        / fscale;
    // unscale
    let x: Vec<f64> = y.iter().zip(&block.scale).map(|(v, s)| v * s).collect();
    let values: Vec<f64> = x.iter().step_by(2).copied().collect();
    let slopes: Vec<f64> = x.iter().skip(1).step_by(2).copied().collect();
    Ok((values, slopes, mult, res, cond))
}

/// Constraint row ∫ φ(r) χ_dof(r) r^{n−1+shift} dr over the grid, for a
/// radial profile φ (shift = 1 for the degree-1 sector pairing r·θ_k).
fn constraint_row(
    dim: &Dimension,
    grid: &RadialGrid,
    profile: &dyn Fn(f64) -> f64,
    shift: f64,
    prefactor: f64,
) -> Vec<f64> {
    let n_nodes = grid.nodes;
    let s_nodes = grid.s_nodes();
    let mut row = vec![0.0; 2 * n_nodes];
    let (qx, qw) = gauss_legendre(6);
    let nf = dim.nf();
    for e in 0..n_nodes - 1 {
        let sa = s_nodes[e];
        let sb = s_nodes[e + 1];
        let h = sb - sa;
        let dofs = [2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3];
        for (xq, wq) in qx.iter().zip(&qw) {
            let t = 0.5 * (xq + 1.0);
            let wq = wq * 0.5 * h;
            let s = sa + t * h;
            let r = RadialGrid::r_of_s(s);
            if r == 0.0 {
                continue;
            }
            let one_ms = 1.0 - s;
            let dr_ds = 1.0 / (one_ms * one_ms);
            let (v, _, _) = hermite_shapes(t, h);
            let weight = prefactor * wq * profile(r) * r.powf(nf - 1.0 + shift) * dr_ds;
            for p in 0..4 {
                row[dofs[p]] += weight * v[p];
            }
        }
    }
    row
}

/// Solve the constrained linearized problem in the degree-2 sector
/// spanned by M = H(offset), with the degree-0/1 constraint blocks kept
/// in the system (their multipliers are the b_k).
pub fn solve_zbar(problem: &SectorProblem, grid: &RadialGrid) -> Result<SectorSolution, CoreError> {
    let dim = problem.dim;
    let n = dim.n();
    let nf = dim.nf();
    let s_nodes = grid.s_nodes();
    let r_nodes: Vec<f64> = s_nodes.iter().map(|&s| RadialGrid::r_of_s(s)).collect();

    let basis = SectorBasis::build(problem.weyl, &problem.offset)?;
    let bubble = Bubble {
        center: problem.offset.clone(),
        eps: problem.eps,
    };
    let bj = bubble_sjet_fn(&bubble, &dim);

    // trivial case: Γ ≡ 0 (zero W or centered bubble)
    if basis.is_degenerate() {
        return Ok(SectorSolution {
            grid: *grid,
            s_nodes,
            psi: vec![0.0; grid.nodes],
            psi_slope: vec![0.0; grid.nodes],
            r_nodes,
            multipliers: vec![0.0; n + 1],
            galerkin_residual: 0.0,
            gamma_scale: 0.0,
            sector_purity: 1.0,
            condition_proxy: 0.0,
            gamma_z_pairing: 0.0,
            gamma_z_tail_error: 0.0,
            sector_m: basis.m,
            sector_norm_y: 0.0,
            eps: problem.eps,
        });
    }

    let field = gamma_frame_field(problem.weyl, &dim, &problem.offset)?;
    let proj_y = AngularProjection::onto_y(&field, &basis, n)?;
    let proj_0 = AngularProjection::onto_constant(&field, n)?;
    let window = problem.window;
    let amp = problem.amplitude;
    let gamma_y = |r: f64| amp * proj_y.eval(r, &window, &bj);
    let gamma_0 = |r: f64| amp * proj_0.eval(r, &window, &bj);

    let gamma_scale = r_nodes
        .iter()
        .skip(1)
        .map(|&r| gamma_y(r).abs())
        .fold(0.0_f64, f64::max);

    // purity diagnostic at a few radii around the bubble scale
    let mut purity = f64::INFINITY;
    for &mult in &[0.5, 1.0, 2.0, 4.0] {
        let r = problem.eps * mult + problem.offset.iter().map(|v| v * v).sum::<f64>().sqrt();
        let total = angular_l2_sq(&field, &dim, r, &window, &bj)? * amp * amp;
        let y = gamma_y(r);
        if total > 0.0 {
            purity = purity.min(y * y / total);
        }
    }
    if !purity.is_finite() {
        purity = 1.0;
    }

    // degree-2 sector solve (unconstrained: the φ's live in degrees 0/1)
    let kappa2 = 2.0 * (2.0 + nf - 2.0);
    let block2 = assemble_block(&dim, grid, kappa2, problem.eps, Some(&gamma_y), BcKind::Both);
    let (psi, psi_slope, _, res2, cond) = solve_block(block2, &[])?;

    // degree-0 block with the φ_0 constraint; RHS is the (identically
    // vanishing) degree-0 projection of Γ
    let area = crate::quad::gammafn::sphere_area(n);
    let b0 = {
        let phi0 = |r: f64| phi_0_radial(&bubble, &dim, r);
        let row = constraint_row(&dim, grid, &phi0, 0.0, area);
        let block0 = assemble_block(&dim, grid, 0.0, problem.eps, Some(&gamma_0), BcKind::SlopeOnly);
        let (_, _, mult, res0, _) = solve_block(block0, &[row])?;
        let _ = res0;
        mult[0]
    };

    // degree-1 block: same operator for every k; φ_k constraint row
    let phi_hat = |r: f64| phi_k_radial(&bubble, &dim, r);
    let row1 = constraint_row(&dim, grid, &phi_hat, 1.0, area / nf);
    let kappa1 = nf - 1.0;
    let mut multipliers = vec![b0];
    for k in 0..n {
        let proj_k = AngularProjection::onto_coordinate(&field, k, n)?;
        let gamma_k = |r: f64| amp * proj_k.eval(r, &window, &bj);
        let block1 = assemble_block(&dim, grid, kappa1, problem.eps, Some(&gamma_k), BcKind::ValueOnly);
        let (_, _, mult, _, _) = solve_block(block1, &[row1.clone()])?;
        multipliers.push(mult[0]);
    }

    // pairing ∫ Γ̄ z̄ = ∫ γ_Y ψ r^{n−1} dr with algebraic tail estimate
    let (pairing, tail) = {
        let (qx, qw) = gauss_legendre(6);
        let mut total = 0.0;
        for e in 0..grid.nodes - 1 {
            let sa = s_nodes[e];
            let sb = s_nodes[e + 1];
            let h = sb - sa;
            for (xq, wq) in qx.iter().zip(&qw) {
                let t = 0.5 * (xq + 1.0);
                let wq = wq * 0.5 * h;
                let s = sa + t * h;
                let r = RadialGrid::r_of_s(s);
                if r == 0.0 {
                    continue;
                }
                let (v, _, _) = hermite_shapes(t, h);
                let psi_q = v[0] * psi[e] + v[1] * psi_slope[e] + v[2] * psi[e + 1] + v[3] * psi_slope[e + 1];
                let one_ms = 1.0 - s;
                total += wq * gamma_y(r) * psi_q * r.powf(nf - 1.0) / (one_ms * one_ms);
            }
        }
        // tail beyond r_max: integrand ~ r^{23−n}, |∫| ≤ I(rm)·rm/(n−24)
        let rm = grid.r_max;
        let integrand_rm = gamma_y(rm).abs()
            * psi.last().copied().unwrap_or(0.0).abs()
            * rm.powf(nf - 1.0);
        let tail = if nf > 24.0 {
            integrand_rm * rm / (nf - 24.0)
        } else {
            f64::INFINITY
        };
        (total, tail)
    };

    Ok(SectorSolution {
        grid: *grid,
        s_nodes,
        r_nodes,
        psi,
        psi_slope,
        multipliers,
        galerkin_residual: res2,
        gamma_scale,
        sector_purity: purity,
        condition_proxy: cond,
        gamma_z_pairing: pairing,
        gamma_z_tail_error: tail,
        sector_m: basis.m,
        sector_norm_y: basis.norm_y,
        eps: problem.eps,
    })
}

/// Doubling refinement driver: doubles the node count until the relative
/// change at shared radii drops below `tol` (max 4 doublings).
pub fn solve_zbar_refined(
    problem: &SectorProblem,
    grid: &RadialGrid,
    tol: f64,
) -> Result<(SectorSolution, f64, usize), CoreError> {
    let mut g = *grid;
    let mut sol = solve_zbar(problem, &g)?;
    let mut change = f64::INFINITY;
    for doubling in 0..4 {
        let finer = RadialGrid {
            nodes: g.nodes * 2 - 1,
            r_max: g.r_max,
        };
        let sol_f = solve_zbar(problem, &finer)?;
        // coarse node i maps to fine node 2i
        let scale = sol
            .psi
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(1e-300);
        change = sol
            .psi
            .iter()
            .enumerate()
            .map(|(i, v)| (v - sol_f.psi[2 * i]).abs())
            .fold(0.0_f64, f64::max)
            / scale;
        sol = sol_f;
        g = finer;
        if change < tol {
            return Ok((sol, change, doubling + 1));
        }
    }
    Ok((sol, change, 4))
}

/// Manufactured-solution machinery: ψ*(r) = r² (1 − (r/R)²)⁶ on [0, R],
/// a compactly supported degree-2 sector profile with polynomial closed
/// forms under the sector operator (L r^m = (m(m+n−2) − κ) r^{m−2}).
pub struct Manufactured {
    pub r0: f64,
    /// coefficients of powers r^{2+2k}, k = 0..6
    pub coeffs: Vec<(f64, i32)>,
}

impl Manufactured {
    pub fn new(r0: f64) -> Self {
        // r²(1 − t)⁶ with t = (r/R)²: binomial expansion
        let mut coeffs = Vec::new();
        let mut binom = 1.0;
        for k in 0..=6i32 {
            coeffs.push((binom * (-1.0f64).powi(k) / r0.powi(2 * k), 2 + 2 * k));
            binom *= (6 - k) as f64 / (k as f64 + 1.0);
        }
        Self { r0, coeffs }
    }

    pub fn value(&self, r: f64) -> f64 {
        if r >= self.r0 {
            return 0.0;
        }
        self.coeffs.iter().map(|&(c, m)| c * r.powi(m)).sum()
    }

    /// L² ψ* − c_pot V ψ* (the strong operator), so that feeding
    /// γ = −(that) reproduces ψ*.
    pub fn strong_operator(&self, dim: &Dimension, kappa: f64, eps: f64, r: f64) -> f64 {
        if r >= self.r0 {
            return 0.0;
        }
        let nf = dim.nf();
        let ell = |m: f64| m * (m + nf - 2.0) - kappa;
        let mut l2 = 0.0;
        for &(c, m) in &self.coeffs {
            let mf = m as f64;
            l2 += c * ell(mf) * ell(mf - 2.0) * r.powi(m - 4);
        }
        let b = Bubble {
            center: vec![],
            eps,
        };
        l2 - potential_coeff(dim) * b.potential(r) * self.value(r)
    }
}

/// Solve the degree-2 block against a raw sector RHS (test entry point
/// for manufactured solutions).
pub fn solve_sector_raw(
    dim: &Dimension,
    grid: &RadialGrid,
    eps: f64,
    gamma: &dyn Fn(f64) -> f64,
) -> Result<(Vec<f64>, Vec<f64>, f64), CoreError> {
    let kappa2 = 2.0 * dim.nf();
    let block = assemble_block(dim, grid, kappa2, eps, Some(gamma), BcKind::Both);
    let (v, sl, _, res, _) = solve_block(block, &[])?;
    Ok((v, sl, res))
}

/// Smallest eigenvalue of the degree-2 sector form (generalized problem
/// A x = λ M x) by inverse iteration; reported, not asserted.
pub fn sector_min_eigenvalue(
    dim: &Dimension,
    grid: &RadialGrid,
    eps: f64,
    iters: usize,
) -> Result<f64, CoreError> {
    let kappa2 = 2.0 * dim.nf();
    let block = assemble_block(dim, grid, kappa2, eps, None, BcKind::Both);
    let n_dof = block.n_dof;
    let a_copy = {
        let mut m = BandedMatrix::zeros(n_dof, KL, KU);
        m.data.copy_from_slice(&block.a.data);
        m
    };
    let lu = block.a.lu()?;
    let mut x: Vec<f64> = (0..n_dof)
        .map(|i| if block.free[i] { (i as f64 * 0.37).sin() + 0.5 } else { 0.0 })
        .collect();
    // scaled mass: M' = D M D to match the equilibrated A
    let mass_vec = |v: &[f64]| -> Vec<f64> {
        let unscaled: Vec<f64> = v.iter().zip(&block.scale).map(|(a, s)| a * s).collect();
        let mv = block.mass.matvec(&unscaled);
        mv.iter()
            .zip(&block.scale)
            .enumerate()
            .map(|(i, (a, s))| if block.free[i] { a * s } else { 0.0 })
            .collect()
    };
    let mut lambda = 0.0;
    for _ in 0..iters {
        let b = mass_vec(&x);
        let mut y = lu.solve(&b);
        for (i, v) in y.iter_mut().enumerate() {
            if !block.free[i] {
                *v = 0.0;
            }
        }
        let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        for v in &mut y {
            *v /= norm;
        }
        // Rayleigh quotient in the scaled system
        let ay = a_copy.matvec(&y);
        let my = mass_vec(&y);
        let num: f64 = y.iter().zip(&ay).map(|(a, b)| a * b).sum();
        let den: f64 = y.iter().zip(&my).map(|(a, b)| a * b).sum();
        lambda = num / den;
        x = y;
    }
    Ok(lambda)
}
