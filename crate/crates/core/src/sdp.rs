//! A small primal-dual interior-point solver for real semidefinite programs.
//!
//! Problems are stated in the standard block form
//!
//! ```text
//! primal:  min <C, X>   s.t.  <A_j, X> = b_j,  X in S_+^{n_1} x ... x S_+^{n_p} x R_+^l
//! dual:    max b^T y    s.t.  Z = C - sum_j y_j A_j,  Z in the same cone
//! ```
//!
//! and solved through the homogeneous self-dual embedding, so infeasible or
//! unbounded instances terminate with a certificate instead of diverging.
//! Search directions are HKM directions with a Mehrotra predictor-corrector.
//! Everything is dense; the engine targets the few-dozen-row blocks produced
//! by the cone problems in [`crate::cone`].

use crate::error::{Error, Result};
use crate::linalg;

/// An element of the product cone: dense symmetric blocks plus a nonnegative orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    /// Row-major symmetric blocks.
    pub psd: Vec<Vec<f64>>,
    pub lp: Vec<f64>,
}

impl BlockVector {
    pub fn zeros(structure: &Structure) -> Self {
        Self {
            psd: structure.psd.iter().map(|&n| vec![0.0; n * n]).collect(),
            lp: vec![0.0; structure.lp],
        }
    }

    pub fn identity(structure: &Structure) -> Self {
        Self {
            psd: structure.psd.iter().map(|&n| linalg::identity(n)).collect(),
            lp: vec![1.0; structure.lp],
        }
    }

    pub fn inner(&self, other: &Self) -> f64 {
        let psd: f64 = self.psd.iter().zip(&other.psd).map(|(a, b)| linalg::dot(a, b)).sum();
        psd + linalg::dot(&self.lp, &other.lp)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &Self) {
        for (a, b) in self.psd.iter_mut().zip(&other.psd) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        self.lp.iter_mut().zip(&other.lp).for_each(|(x, y)| *x += c * y);
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.psd.iter_mut().for_each(|b| b.iter_mut().for_each(|x| *x *= c));
        out.lp.iter_mut().for_each(|x| *x *= c);
        out
    }

    fn is_finite(&self) -> bool {
        self.psd.iter().flatten().chain(&self.lp).all(|x| x.is_finite())
    }
}

/// Block sizes of the product cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub psd: Vec<usize>,
    pub lp: usize,
}

impl Structure {
    /// Barrier parameter of the cone (sum of block orders).
    pub fn degree(&self) -> usize {
        self.psd.iter().sum::<usize>() + self.lp
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub structure: Structure,
    pub c: BlockVector,
    pub constraints: Vec<BlockVector>,
    pub b: Vec<f64>,
}

impl SdpProblem {
    fn validate(&self) -> Result<()> {
        if self.constraints.len() != self.b.len() {
            return Err(Error::DimensionMismatch { expected: self.constraints.len(), found: self.b.len() });
        }
        let check = |v: &BlockVector| -> Result<()> {
            if v.psd.len() != self.structure.psd.len() {
                return Err(Error::DimensionMismatch { expected: self.structure.psd.len(), found: v.psd.len() });
            }
            for (blk, &n) in v.psd.iter().zip(&self.structure.psd) {
                if blk.len() != n * n {
                    return Err(Error::DimensionMismatch { expected: n * n, found: blk.len() });
                }
            }
            if v.lp.len() != self.structure.lp {
                return Err(Error::DimensionMismatch { expected: self.structure.lp, found: v.lp.len() });
            }
            if !v.is_finite() {
                return Err(Error::InvalidInput("non-finite problem data".into()));
            }
            Ok(())
        };
        check(&self.c)?;
        self.constraints.iter().try_for_each(check)?;
        if self.b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite right-hand side".into()));
        }
        Ok(())
    }

    /// `(<A_1, X>, ..., <A_m, X>)`.
    pub fn apply(&self, x: &BlockVector) -> Vec<f64> {
        self.constraints.iter().map(|a| a.inner(x)).collect()
    }

    /// `sum_j y_j A_j`.
    pub fn apply_adjoint(&self, y: &[f64]) -> BlockVector {
        let mut out = BlockVector::zeros(&self.structure);
        for (a, &yj) in self.constraints.iter().zip(y) {
            if yj != 0.0 {
                out.axpy(yj, a);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SdpSettings {
    pub max_iter: usize,
    /// Target for the scaled residuals and relative gap.
    pub tol: f64,
    /// Looser level accepted when progress stalls before `tol` is reached.
    pub accept_tol: f64,
    pub infeasibility_tol: f64,
    /// Record one trace line per iteration.
    pub verbose: bool,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-10, accept_tol: 1e-7, infeasibility_tol: 1e-8, verbose: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    /// `y` is a ray with `b^T y > 0` and `-sum y_j A_j` in the cone.
    PrimalInfeasible,
    /// `x` is a ray in the cone with `A x = 0` and `<C, x> < 0`.
    DualInfeasible,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: BlockVector,
    pub y: Vec<f64>,
    pub z: BlockVector,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    /// `iter, gap, primal-res, dual-res` lines when `verbose` is set.
    pub trace: Vec<String>,
}

/// Per-block factorizations of the current iterate.
struct Factors {
    x_chol: Vec<Vec<f64>>,
    z_chol: Vec<Vec<f64>>,
    z_inv: Vec<Vec<f64>>,
}

struct Direction {
    dx: BlockVector,
    dy: Vec<f64>,
    dz: BlockVector,
    dtau: f64,
    dkappa: f64,
}

struct Engine<'a> {
    p: &'a SdpProblem,
    nu: f64,
}

impl<'a> Engine<'a> {
    fn factor(&self, x: &BlockVector, z: &BlockVector) -> Option<Factors> {
        let mut f = Factors { x_chol: vec![], z_chol: vec![], z_inv: vec![] };
        for ((xb, zb), &n) in x.psd.iter().zip(&z.psd).zip(&self.p.structure.psd) {
            let lx = linalg::cholesky(xb, n)?;
            let lz = linalg::cholesky(zb, n)?;
            f.z_inv.push(linalg::chol_inverse(&lz, n));
            f.x_chol.push(lx);
            f.z_chol.push(lz);
        }
        Some(f)
    }

    /// `sym(X S Z^{-1})` blockwise; on the orthant `x s / z`.
    fn hkm_product(&self, x: &BlockVector, s: &BlockVector, z: &BlockVector, f: &Factors) -> BlockVector {
        let mut out = BlockVector::zeros(&self.p.structure);
        for (k, &n) in self.p.structure.psd.iter().enumerate() {
            let xs = linalg::matmul(&x.psd[k], &s.psd[k], n);
            let mut v = linalg::matmul(&xs, &f.z_inv[k], n);
            linalg::symmetrize(&mut v, n);
            out.psd[k] = v;
        }
        for i in 0..self.p.structure.lp {
            out.lp[i] = x.lp[i] * s.lp[i] / z.lp[i];
        }
        out
    }

    /// `sym(A B Z^{-1})` for two arbitrary block vectors (second-order correction term).
    fn correction(&self, a: &BlockVector, b: &BlockVector, z: &BlockVector, f: &Factors) -> BlockVector {
        let mut out = BlockVector::zeros(&self.p.structure);
        for (k, &n) in self.p.structure.psd.iter().enumerate() {
            let ab = linalg::matmul(&a.psd[k], &b.psd[k], n);
            let mut v = linalg::matmul(&ab, &f.z_inv[k], n);
            linalg::symmetrize(&mut v, n);
            out.psd[k] = v;
        }
        for i in 0..self.p.structure.lp {
            out.lp[i] = a.lp[i] * b.lp[i] / z.lp[i];
        }
        out
    }

    fn z_inverse(&self, z: &BlockVector, f: &Factors) -> BlockVector {
        BlockVector { psd: f.z_inv.clone(), lp: z.lp.iter().map(|v| 1.0 / v).collect() }
    }

    /// Schur complement `M_ij = <A_i, X A_j Z^{-1}>` with its Cholesky factor.
    fn schur(&self, x: &BlockVector, z: &BlockVector, f: &Factors) -> Option<Schur> {
        let m = self.p.constraints.len();
        let mut mat = vec![0.0; m * m];
        let prods: Vec<BlockVector> = self.p.constraints.iter().map(|a| self.hkm_product(x, a, z, f)).collect();
        for i in 0..m {
            for j in i..m {
                let v = self.p.constraints[i].inner(&prods[j]);
                mat[i * m + j] = v;
                mat[j * m + i] = v;
            }
        }
        if m == 0 {
            return Some(Schur { chol: vec![], mat });
        }
        if let Some(chol) = linalg::cholesky(&mat, m) {
            return Some(Schur { chol, mat });
        }
        let scale = (0..m).map(|i| mat[i * m + i].abs()).fold(0.0, f64::max).max(1e-300);
        for reg in [1e-14, 1e-12, 1e-10] {
            let mut r = mat.clone();
            for i in 0..m {
                r[i * m + i] += reg * scale;
            }
            if let Some(chol) = linalg::cholesky(&r, m) {
                return Some(Schur { chol, mat });
            }
        }
        None
    }

    /// Largest `alpha` keeping `v + alpha dv` in the cone.
    fn max_step(&self, v: &BlockVector, chol: &[Vec<f64>], dv: &BlockVector) -> Result<f64> {
        let mut alpha = f64::INFINITY;
        for (k, &n) in self.p.structure.psd.iter().enumerate() {
            let s = linalg::congruence_by_inverse(&chol[k], &dv.psd[k], n);
            let (vals, _) = linalg::sym_eigen(&s, n)?;
            if vals[0] < 0.0 {
                alpha = alpha.min(-1.0 / vals[0]);
            }
        }
        for (x, dx) in v.lp.iter().zip(&dv.lp) {
            if *dx < 0.0 {
                alpha = alpha.min(-x / dx);
            }
        }
        Ok(alpha)
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        st: &State,
        f: &Factors,
        l_m: &Schur,
        sigma: f64,
        eta: f64,
        mu: f64,
        second_order: Option<&Direction>,
    ) -> Direction {
        let p = self.p;
        let m = p.constraints.len();
        let (x, y, z, tau, kappa) = (&st.x, &st.y, &st.z, st.tau, st.kappa);

        let ax = p.apply(x);
        let r_p: Vec<f64> = p.b.iter().zip(&ax).map(|(b, a)| b * tau - a).collect();
        let mut r_d = p.c.scaled(tau);
        r_d.axpy(-1.0, &p.apply_adjoint(y));
        r_d.axpy(-1.0, z);
        let r_g = linalg::dot(&p.b, y) - p.c.inner(x) - kappa;

        // T_X = sigma mu Z^{-1} - X - eta sym(X R_d Z^{-1}) - sym(dXa dZa Z^{-1})
        let mut t_x = self.z_inverse(z, f).scaled(sigma * mu);
        t_x.axpy(-1.0, x);
        t_x.axpy(-eta, &self.hkm_product(x, &r_d, z, f));
        let mut rhs_kappa = sigma * mu - tau * kappa;
        if let Some(a) = second_order {
            t_x.axpy(-1.0, &self.correction(&a.dx, &a.dz, z, f));
            rhs_kappa -= a.dtau * a.dkappa;
        }

        let xcz = self.hkm_product(x, &p.c, z, f);
        let u = p.apply(&xcz);
        let rhs1: Vec<f64> = p.b.iter().zip(&u).map(|(b, u)| b + u).collect();
        let at_x = p.apply(&t_x);
        let rhs2: Vec<f64> = r_p.iter().zip(&at_x).map(|(r, a)| eta * r - a).collect();
        let (dy1, dy2) = if m == 0 {
            (vec![], vec![])
        } else {
            (l_m.solve(&rhs1), l_m.solve(&rhs2))
        };

        let mut dx0 = t_x;
        dx0.axpy(1.0, &self.hkm_product(x, &p.apply_adjoint(&dy2), z, f));
        let mut dx1 = self.hkm_product(x, &p.apply_adjoint(&dy1), z, f);
        dx1.axpy(-1.0, &xcz);

        let num = eta * r_g + linalg::dot(&p.b, &dy2) - p.c.inner(&dx0) - rhs_kappa / tau;
        let den = p.c.inner(&dx1) - linalg::dot(&p.b, &dy1) - kappa / tau;
        let dtau = num / den;

        let dy: Vec<f64> = dy1.iter().zip(&dy2).map(|(a, b)| a * dtau + b).collect();
        let mut dx = dx0;
        dx.axpy(dtau, &dx1);
        let mut dz = r_d.scaled(eta);
        dz.axpy(-1.0, &p.apply_adjoint(&dy));
        dz.axpy(dtau, &p.c);
        let dkappa = (rhs_kappa - kappa * dtau) / tau;
        Direction { dx, dy, dz, dtau, dkappa }
    }

    fn step_length(&self, st: &State, f: &Factors, d: &Direction) -> Result<f64> {
        let mut a = self.max_step(&st.x, &f.x_chol, &d.dx)?;
        a = a.min(self.max_step(&st.z, &f.z_chol, &d.dz)?);
        if d.dtau < 0.0 {
            a = a.min(-st.tau / d.dtau);
        }
        if d.dkappa < 0.0 {
            a = a.min(-st.kappa / d.dkappa);
        }
        Ok(a)
    }

    fn mu(&self, x: &BlockVector, z: &BlockVector, tau: f64, kappa: f64) -> f64 {
        (x.inner(z) + tau * kappa) / (self.nu + 1.0)
    }
}

struct Schur {
    chol: Vec<f64>,
    mat: Vec<f64>,
}

impl Schur {
    /// Cholesky solve followed by two rounds of iterative refinement.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = rhs.len();
        let mut x = linalg::chol_solve(&self.chol, m, rhs);
        for _ in 0..2 {
            let r: Vec<f64> = (0..m)
                .map(|i| rhs[i] - (0..m).map(|j| self.mat[i * m + j] * x[j]).sum::<f64>())
                .collect();
            let dx = linalg::chol_solve(&self.chol, m, &r);
            x.iter_mut().zip(&dx).for_each(|(v, d)| *v += d);
        }
        x
    }
}

#[derive(Clone)]
struct State {
    x: BlockVector,
    y: Vec<f64>,
    z: BlockVector,
    tau: f64,
    kappa: f64,
}

struct Measures {
    pres: f64,
    dres: f64,
    gap: f64,
    pobj: f64,
    dobj: f64,
}

fn measures(p: &SdpProblem, st: &State, bnorm: f64, cnorm: f64) -> Measures {
    let tau = st.tau;
    let ax = p.apply(&st.x);
    let pres = ax.iter().zip(&p.b).map(|(a, b)| (a / tau - b).powi(2)).sum::<f64>().sqrt() / (1.0 + bnorm);
    let mut rd = p.c.clone();
    rd.axpy(-1.0 / tau, &p.apply_adjoint(&st.y));
    rd.axpy(-1.0 / tau, &st.z);
    let dres = rd.norm() / (1.0 + cnorm);
    let pobj = p.c.inner(&st.x) / tau;
    let dobj = linalg::dot(&p.b, &st.y) / tau;
    let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
    Measures { pres, dres, gap, pobj, dobj }
}

/// Iterations without improvement after which an acceptable best iterate is returned.
const STALL_ACCEPT_ITERS: usize = 6;
/// Iterations without improvement after which the solve is abandoned.
const STALL_FAIL_ITERS: usize = 40;

/// Solve the problem; deterministic for identical inputs.
pub fn solve_sdp(problem: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution> {
    problem.validate()?;
    let engine = Engine { p: problem, nu: problem.structure.degree() as f64 };
    let m = problem.constraints.len();
    let bnorm = problem.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let cnorm = problem.c.norm();

    let mut st = State {
        x: BlockVector::identity(&problem.structure),
        y: vec![0.0; m],
        z: BlockVector::identity(&problem.structure),
        tau: 1.0,
        kappa: 1.0,
    };
    let mut trace = Vec::new();
    let mut best: Option<(State, f64)> = None;
    let mut best_iter = 0;

    let finish = |st: &State, status: SdpStatus, iterations: usize, trace: Vec<String>| -> SdpSolution {
        let ms = measures(problem, st, bnorm, cnorm);
        let (x, y, z) = match status {
            SdpStatus::Optimal => (st.x.scaled(1.0 / st.tau), st.y.iter().map(|v| v / st.tau).collect(), st.z.scaled(1.0 / st.tau)),
            _ => (st.x.clone(), st.y.clone(), st.z.clone()),
        };
        SdpSolution {
            status,
            x,
            y,
            z,
            primal_objective: ms.pobj,
            dual_objective: ms.dobj,
            primal_residual: ms.pres,
            dual_residual: ms.dres,
            gap: ms.gap,
            iterations,
            trace,
        }
    };

    for iter in 0..settings.max_iter {
        let ms = measures(problem, &st, bnorm, cnorm);
        if settings.verbose {
            trace.push(format!("{iter}, {:.3e}, {:.3e}, {:.3e}", ms.gap, ms.pres, ms.dres));
        }
        let worst = ms.pres.max(ms.dres).max(ms.gap);
        if worst <= settings.tol {
            return Ok(finish(&st, SdpStatus::Optimal, iter, trace));
        }
        if best.as_ref().is_none_or(|(_, w)| worst < *w) {
            best = Some((st.clone(), worst));
            best_iter = iter;
        }
        let since = iter - best_iter;
        let best_worst = best.as_ref().map_or(f64::INFINITY, |(_, w)| *w);
        if (since >= STALL_ACCEPT_ITERS && best_worst <= settings.accept_tol) || (since >= STALL_FAIL_ITERS && st.tau > st.kappa) {
            return stalled(problem, settings, best, iter, trace, bnorm, cnorm, &finish);
        }

        // Infeasibility certificates from the unnormalised iterate.
        let by = linalg::dot(&problem.b, &st.y);
        if by > 0.0 {
            let mut r = problem.apply_adjoint(&st.y);
            r.axpy(1.0, &st.z);
            if r.norm() <= settings.infeasibility_tol * by && st.tau <= 1e-2 * st.kappa.max(1e-300) {
                return Ok(finish(&st, SdpStatus::PrimalInfeasible, iter, trace));
            }
        }
        let cx = problem.c.inner(&st.x);
        if cx < 0.0 {
            let ax = problem.apply(&st.x);
            let axn = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
            if axn <= settings.infeasibility_tol * (-cx) && st.tau <= 1e-2 * st.kappa.max(1e-300) {
                return Ok(finish(&st, SdpStatus::DualInfeasible, iter, trace));
            }
        }

        let step = (|| -> Result<Option<State>> {
            let Some(f) = engine.factor(&st.x, &st.z) else { return Ok(None) };
            let Some(l_m) = engine.schur(&st.x, &st.z, &f) else { return Ok(None) };
            let mu = engine.mu(&st.x, &st.z, st.tau, st.kappa);

            let aff = engine.direction(&st, &f, &l_m, 0.0, 1.0, mu, None);
            let Ok(a_aff) = engine.step_length(&st, &f, &aff) else { return Ok(None) };
            let a_aff = a_aff.min(1.0);
            let mut xa = st.x.clone();
            xa.axpy(a_aff, &aff.dx);
            let mut za = st.z.clone();
            za.axpy(a_aff, &aff.dz);
            let mu_aff = engine.mu(&xa, &za, st.tau + a_aff * aff.dtau, st.kappa + a_aff * aff.dkappa);
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            let d = engine.direction(&st, &f, &l_m, sigma, 1.0 - sigma, mu, Some(&aff));
            let Ok(alpha) = engine.step_length(&st, &f, &d) else { return Ok(None) };
            let alpha = (0.98 * alpha).min(1.0);
            if !(alpha > 1e-12) {
                return Ok(None);
            }
            let mut next = st.clone();
            next.x.axpy(alpha, &d.dx);
            next.z.axpy(alpha, &d.dz);
            next.y.iter_mut().zip(&d.dy).for_each(|(v, dv)| *v += alpha * dv);
            next.tau += alpha * d.dtau;
            next.kappa += alpha * d.dkappa;
            for (blk, &n) in next.x.psd.iter_mut().zip(&problem.structure.psd) {
                linalg::symmetrize(blk, n);
            }
            for (blk, &n) in next.z.psd.iter_mut().zip(&problem.structure.psd) {
                linalg::symmetrize(blk, n);
            }
            if !next.x.is_finite() || !next.z.is_finite() || !next.tau.is_finite() || !next.kappa.is_finite() {
                return Ok(None);
            }
            // Rescale the homogeneous iterate to keep magnitudes moderate.
            let s = next.tau + next.kappa;
            if !(1e-6..=1e6).contains(&s) {
                next.x = next.x.scaled(1.0 / s);
                next.z = next.z.scaled(1.0 / s);
                next.y.iter_mut().for_each(|v| *v /= s);
                next.tau /= s;
                next.kappa /= s;
            }
            Ok(Some(next))
        })()?;

        match step {
            Some(next) => st = next,
            None => return stalled(problem, settings, best, iter, trace, bnorm, cnorm, &finish),
        }
    }
    let iterations = settings.max_iter;
    if let Some((b, worst)) = &best {
        if *worst <= settings.accept_tol {
            return Ok(finish(b, SdpStatus::Optimal, iterations, trace));
        }
    }
    let ms = measures(problem, &st, bnorm, cnorm);
    Err(Error::IterationLimit { iterations, gap: ms.gap, primal_res: ms.pres, dual_res: ms.dres })
}

type Finish<'a> = dyn Fn(&State, SdpStatus, usize, Vec<String>) -> SdpSolution + 'a;

#[allow(clippy::too_many_arguments)]
fn stalled(
    problem: &SdpProblem,
    settings: &SdpSettings,
    best: Option<(State, f64)>,
    iterations: usize,
    trace: Vec<String>,
    bnorm: f64,
    cnorm: f64,
    finish: &Finish,
) -> Result<SdpSolution> {
    if let Some((st, worst)) = best {
        if worst <= settings.accept_tol {
            return Ok(finish(&st, SdpStatus::Optimal, iterations, trace));
        }
        let ms = measures(problem, &st, bnorm, cnorm);
        return Err(Error::SolverNumericalFailure {
            reason: "no further progress".into(),
            gap: ms.gap,
            primal_res: ms.pres,
            dual_res: ms.dres,
        });
    }
    Err(Error::SolverNumericalFailure {
        reason: "iterate left the cone interior".into(),
        gap: f64::NAN,
        primal_res: f64::NAN,
        dual_res: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn single_block(n: usize) -> Structure {
        Structure { psd: vec![n], lp: 0 }
    }

    fn block(v: Vec<f64>) -> BlockVector {
        BlockVector { psd: vec![v], lp: vec![] }
    }

    #[test]
    fn smallest_eigenvalue_problem() {
        // min Tr(CX), Tr X = 1, C = diag(1, 2)
        let p = SdpProblem {
            structure: single_block(2),
            c: block(vec![1.0, 0.0, 0.0, 2.0]),
            constraints: vec![block(vec![1.0, 0.0, 0.0, 1.0])],
            b: vec![1.0],
        };
        let s = solve_sdp(&p, &SdpSettings::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(s.primal_objective, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.x.psd[0][0], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(s.x.psd[0][3], 0.0, epsilon = 1e-7);
    }

    #[test]
    fn trace_bound_violation_is_infeasible() {
        // Tr X = 1, Tr(diag(1,-1) X) = 2 has no PSD solution.
        let p = SdpProblem {
            structure: single_block(2),
            c: block(vec![0.0; 4]),
            constraints: vec![block(vec![1.0, 0.0, 0.0, 1.0]), block(vec![1.0, 0.0, 0.0, -1.0])],
            b: vec![1.0, 2.0],
        };
        let s = solve_sdp(&p, &SdpSettings::default()).unwrap();
        assert_eq!(s.status, SdpStatus::PrimalInfeasible);
        // The ray certifies infeasibility: b^T y > 0 and -A^T y is PSD.
        assert!(linalg::dot(&p.b, &s.y) > 0.0);
        let neg = p.apply_adjoint(&s.y).scaled(-1.0);
        let (vals, _) = linalg::sym_eigen(&neg.psd[0], 2).unwrap();
        assert!(vals[0] >= -1e-8 * linalg::dot(&p.b, &s.y));
    }

    #[test]
    fn unbounded_is_dual_infeasible() {
        // min -x s.t. x - s = 0 over the orthant: unbounded below.
        let p = SdpProblem {
            structure: Structure { psd: vec![], lp: 2 },
            c: BlockVector { psd: vec![], lp: vec![-1.0, 0.0] },
            constraints: vec![BlockVector { psd: vec![], lp: vec![1.0, -1.0] }],
            b: vec![0.0],
        };
        let s = solve_sdp(&p, &SdpSettings::default()).unwrap();
        assert_eq!(s.status, SdpStatus::DualInfeasible);
    }

    #[test]
    fn mixed_block_lp() {
        // min x_lp + Tr(X) s.t. Tr(X) + x_lp = 1 and X_00 - X_11 = 0.5
        let p = SdpProblem {
            structure: Structure { psd: vec![2], lp: 1 },
            c: BlockVector { psd: vec![vec![2.0, 0.0, 0.0, 1.0]], lp: vec![3.0] },
            constraints: vec![
                BlockVector { psd: vec![vec![1.0, 0.0, 0.0, 1.0]], lp: vec![1.0] },
                BlockVector { psd: vec![vec![1.0, 0.0, 0.0, -1.0]], lp: vec![0.0] },
            ],
            b: vec![1.0, 0.5],
        };
        let s = solve_sdp(&p, &SdpSettings { verbose: true, ..Default::default() }).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        // X = diag(0.75, 0.25), x_lp = 0 gives 1.75; cheaper to move mass to X.
        assert_abs_diff_eq!(s.primal_objective, 1.75, epsilon = 1e-8);
        assert!(!s.trace.is_empty());
    }
}
