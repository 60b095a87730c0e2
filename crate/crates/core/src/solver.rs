//! ADMM for the adversarial similarity/dissimilarity problem
//!
//! ```text
//! min  tr(S*ᵀ D*) + tr(S*ᵀ L S*) + tr(D*ᵀ L D*)
//! s.t. S* = E, D* = F, E and F symmetric in [0, 1],
//!      E = S on supp(S), F = D on supp(D)
//! ```
//!
//! One sweep updates S*, E, D*, F in that order, each using the most recent
//! value of the others, then the multipliers and penalties.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ShiftedLaplacianSolver;
use crate::matrix::SymMatrix;

/// Which similarity enters the right-hand side of the D* update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DUpdateSimilarity {
    /// The S* iterate from the same sweep.
    #[default]
    LatestIterate,
    /// The fixed similarity matrix S.
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub rho: f64,
    pub gamma_max: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    pub gamma_init: f64,
    /// Keep `tr(S*ᵀ L S*)` in the objective.
    pub use_s_manifold: bool,
    /// Keep `tr(D*ᵀ L D*)` in the objective.
    pub use_d_manifold: bool,
    pub d_update_similarity: DUpdateSimilarity,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: 1.1,
            gamma_max: 1e6,
            epsilon: 1e-3,
            max_iters: 200,
            gamma_init: 1.0,
            use_s_manifold: true,
            use_d_manifold: true,
            d_update_similarity: DUpdateSimilarity::LatestIterate,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 1.0) {
            return Err(Error::Config(format!("rho must exceed 1, got {}", self.rho)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.gamma_init > 0.0) || !(self.gamma_max >= self.gamma_init) {
            return Err(Error::Config(format!(
                "need 0 < gamma_init <= gamma_max, got {} and {}",
                self.gamma_init, self.gamma_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub sigma_s_star: f64,
    pub sigma_d_star: f64,
    pub sigma_e: f64,
    pub sigma_f: f64,
    /// `‖S* − E‖_F / n`
    pub gap_s: f64,
    /// `‖D* − F‖_F / n`
    pub gap_d: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
}

impl SolverTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("iter\tsigma_s_star\tsigma_d_star\tsigma_e\tsigma_f\tgap_s\tgap_d\tgamma1\tgamma2\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{}\t{}",
                r.iter, r.sigma_s_star, r.sigma_d_star, r.sigma_e, r.sigma_f, r.gap_s, r.gap_d, r.gamma1, r.gamma2
            );
        }
        out
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_tsv().as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Fixed data of one solve.
#[derive(Debug, Clone)]
pub struct Problem {
    pub s: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
}

impl Problem {
    pub fn new(s: &SymMatrix, d: &SymMatrix, laplacian: &DMatrix<f64>) -> Result<Self> {
        let n = s.order();
        if d.order() != n || laplacian.nrows() != n || laplacian.ncols() != n {
            return Err(Error::Dimension(format!(
                "S is {n}x{n}, D is {o}x{o}, L is {}x{}",
                laplacian.nrows(),
                laplacian.ncols(),
                o = d.order()
            )));
        }
        Ok(Problem {
            s: s.to_dense(),
            d: d.to_dense(),
            laplacian: laplacian.clone(),
        })
    }

    pub fn order(&self) -> usize {
        self.s.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub s_star: DMatrix<f64>,
    pub d_star: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub lambda_mult: DMatrix<f64>,
    pub gamma_mult: DMatrix<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    pub iter: usize,
}

impl SolverState {
    pub fn zeros(n: usize, gamma_init: f64) -> Self {
        let z = DMatrix::zeros(n, n);
        SolverState {
            s_star: z.clone(),
            d_star: z.clone(),
            e: z.clone(),
            f: z.clone(),
            lambda_mult: z.clone(),
            gamma_mult: z,
            gamma1: gamma_init,
            gamma2: gamma_init,
            iter: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    /// Symmetric part of the final S* iterate.
    pub s_star: SymMatrix,
    /// Symmetric part of the final D* iterate.
    pub d_star: SymMatrix,
    pub trace: SolverTrace,
    pub state: SolverState,
}

/// `(2L + γ₁I) S* = γ₁E − D* − Λ`
pub fn update_s_star(state: &SolverState, solver: &ShiftedLaplacianSolver) -> Result<DMatrix<f64>> {
    let g = state.gamma1;
    let mut rhs = state.e.clone();
    rhs.zip_zip_apply(&state.d_star, &state.lambda_mult, |r, d, l| *r = g * *r - d - l);
    solver.solve(g, &rhs)
}

/// Symmetrize and clamp `S* + Λ/γ₁`, then pin the entries on `supp(S)`.
pub fn update_e(state: &SolverState, s: &DMatrix<f64>) -> DMatrix<f64> {
    let p = &state.s_star + &state.lambda_mult / state.gamma1;
    project(&p, s)
}

/// `(2L + γ₂I) D* = γ₂F − S_latest − Γ`
pub fn update_d_star(
    state: &SolverState,
    solver: &ShiftedLaplacianSolver,
    s_latest: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let g = state.gamma2;
    let mut rhs = state.f.clone();
    rhs.zip_zip_apply(s_latest, &state.gamma_mult, |r, s, m| *r = g * *r - s - m);
    solver.solve(g, &rhs)
}

/// Mirror of [`update_e`] with `D* + Γ/γ₂` and `supp(D)`.
pub fn update_f(state: &SolverState, d: &DMatrix<f64>) -> DMatrix<f64> {
    let q = &state.d_star + &state.gamma_mult / state.gamma2;
    project(&q, d)
}

/// Dual ascent on both multipliers followed by penalty growth.
pub fn update_multipliers(state: &mut SolverState, cfg: &SolverConfig) {
    let (g1, g2) = (state.gamma1, state.gamma2);
    state.lambda_mult.zip_zip_apply(&state.s_star, &state.e, |l, s, e| *l += g1 * (s - e));
    state.gamma_mult.zip_zip_apply(&state.d_star, &state.f, |m, d, f| *m += g2 * (d - f));
    state.gamma1 = (cfg.rho * state.gamma1).min(cfg.gamma_max);
    state.gamma2 = (cfg.rho * state.gamma2).min(cfg.gamma_max);
}

fn project(p: &DMatrix<f64>, fixed: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    let (ps, fs) = (p.as_slice(), fixed.as_slice());
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        for i in j..n {
            let (ij, ji) = (j * n + i, i * n + j);
            let v = if fs[ij] != 0.0 {
                fs[ij]
            } else {
                (0.5 * (ps[ij] + ps[ji])).clamp(0.0, 1.0)
            };
            out[ij] = v;
            out[ji] = v;
        }
    }
    DMatrix::from_vec(n, n, out)
}

/// `‖X_new − X_old‖² / ‖X_old‖²`. No change at all counts as 0; any change
/// from a zero matrix counts as infinite.
pub fn relative_change(new: &DMatrix<f64>, old: &DMatrix<f64>) -> f64 {
    let num = diff_norm_squared(new, old);
    if num < 1e-30 {
        return 0.0;
    }
    let den = old.norm_squared();
    if den < 1e-30 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn diff_norm_squared(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Augmented Lagrangian at `state`. Manifold terms follow the config flags.
pub fn augmented_lagrangian(problem: &Problem, state: &SolverState, cfg: &SolverConfig) -> f64 {
    let l = &problem.laplacian;
    let mut value = state.s_star.dot(&state.d_star);
    if cfg.use_s_manifold {
        value += state.s_star.dot(&(l * &state.s_star));
    }
    if cfg.use_d_manifold {
        value += state.d_star.dot(&(l * &state.d_star));
    }
    let rs = &state.s_star - &state.e;
    let rd = &state.d_star - &state.f;
    value += state.lambda_mult.dot(&rs) + 0.5 * state.gamma1 * rs.norm_squared();
    value += state.gamma_mult.dot(&rd) + 0.5 * state.gamma2 * rd.norm_squared();
    value
}

/// Stationarity residuals `(‖D* + Λ + 2LS*‖_F / n, ‖S* + Γ + 2LD*‖_F / n)`.
pub fn kkt_residuals(problem: &Problem, state: &SolverState) -> (f64, f64) {
    let n = problem.order().max(1) as f64;
    let l2 = &problem.laplacian * 2.0;
    let rs = &state.d_star + &state.lambda_mult + &l2 * &state.s_star;
    let rd = &state.s_star + &state.gamma_mult + &l2 * &state.d_star;
    (rs.norm() / n, rd.norm() / n)
}

/// Linear solvers for the S* and D* updates under `cfg`'s manifold flags.
pub fn build_solvers(
    laplacian: &DMatrix<f64>,
    cfg: &SolverConfig,
) -> Result<(ShiftedLaplacianSolver, ShiftedLaplacianSolver)> {
    let n = laplacian.nrows();
    let full = if cfg.use_s_manifold || cfg.use_d_manifold {
        Some(ShiftedLaplacianSolver::new(laplacian)?)
    } else {
        None
    };
    let pick = |on: bool| match (&full, on) {
        (Some(s), true) => s.clone(),
        _ => ShiftedLaplacianSolver::identity(n),
    };
    Ok((pick(cfg.use_s_manifold), pick(cfg.use_d_manifold)))
}

/// Relative changes of one primal pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigmas {
    pub s_star: f64,
    pub e: f64,
    pub d_star: f64,
    pub f: f64,
}

/// The four primal updates of a sweep, leaving multipliers and penalties
/// untouched.
pub fn primal_sweep(
    state: &mut SolverState,
    problem: &Problem,
    solvers: &(ShiftedLaplacianSolver, ShiftedLaplacianSolver),
    cfg: &SolverConfig,
) -> Result<Sigmas> {
    let s_star = update_s_star(state, &solvers.0)?;
    let sigma_s_star = relative_change(&s_star, &state.s_star);
    state.s_star = s_star;

    let e = update_e(state, &problem.s);
    let sigma_e = relative_change(&e, &state.e);
    state.e = e;
    debug_assert!(box_and_projection_hold(&state.e, &problem.s));

    let d_star = match cfg.d_update_similarity {
        DUpdateSimilarity::LatestIterate => update_d_star(state, &solvers.1, &state.s_star)?,
        DUpdateSimilarity::Original => update_d_star(state, &solvers.1, &problem.s)?,
    };
    let sigma_d_star = relative_change(&d_star, &state.d_star);
    state.d_star = d_star;

    let f = update_f(state, &problem.d);
    let sigma_f = relative_change(&f, &state.f);
    state.f = f;
    debug_assert!(box_and_projection_hold(&state.f, &problem.d));

    if state.s_star.iter().chain(state.d_star.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite iterate at sweep {}", state.iter + 1)));
    }
    Ok(Sigmas {
        s_star: sigma_s_star,
        e: sigma_e,
        d_star: sigma_d_star,
        f: sigma_f,
    })
}

/// One full sweep: primal updates, then multipliers and penalty growth.
pub fn sweep(
    state: &mut SolverState,
    problem: &Problem,
    solvers: &(ShiftedLaplacianSolver, ShiftedLaplacianSolver),
    cfg: &SolverConfig,
) -> Result<IterationRecord> {
    let n = problem.order().max(1) as f64;
    let sigma = primal_sweep(state, problem, solvers, cfg)?;
    let gap_s = diff_norm_squared(&state.s_star, &state.e).sqrt() / n;
    let gap_d = diff_norm_squared(&state.d_star, &state.f).sqrt() / n;
    let (gamma1, gamma2) = (state.gamma1, state.gamma2);
    update_multipliers(state, cfg);
    state.iter += 1;

    Ok(IterationRecord {
        iter: state.iter,
        sigma_s_star: sigma.s_star,
        sigma_d_star: sigma.d_star,
        sigma_e: sigma.e,
        sigma_f: sigma.f,
        gap_s,
        gap_d,
        gamma1,
        gamma2,
    })
}

/// `x` is symmetric, inside `[0, 1]`, and equals `fixed` wherever `fixed`
/// is nonzero.
pub fn box_and_projection_hold(x: &DMatrix<f64>, fixed: &DMatrix<f64>) -> bool {
    let n = x.nrows();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let v = x[(i, j)];
            (0.0..=1.0).contains(&v) && v == x[(j, i)] && (fixed[(i, j)] == 0.0 || v == fixed[(i, j)])
        })
    })
}

pub fn solve(s: &SymMatrix, d: &SymMatrix, laplacian: &DMatrix<f64>, cfg: &SolverConfig) -> Result<SolveOutput> {
    cfg.validate()?;
    let problem = Problem::new(s, d, laplacian)?;
    let solvers = build_solvers(laplacian, cfg)?;
    let mut state = SolverState::zeros(problem.order(), cfg.gamma_init);
    let mut trace = SolverTrace::default();
    while state.iter < cfg.max_iters {
        let rec = sweep(&mut state, &problem, &solvers, cfg)?;
        trace.records.push(rec);
        let eps = cfg.epsilon;
        if rec.sigma_s_star <= eps && rec.sigma_d_star <= eps && rec.sigma_e <= eps && rec.sigma_f <= eps {
            trace.converged = true;
            break;
        }
    }
    Ok(SolveOutput {
        s_star: SymMatrix::from_dense_symmetrized(&state.s_star),
        d_star: SymMatrix::from_dense_symmetrized(&state.d_star),
        trace,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state3() -> SolverState {
        let mut st = SolverState::zeros(3, 2.0);
        st.e = DMatrix::from_fn(3, 3, |i, j| 0.1 * (i + j) as f64);
        st.d_star = DMatrix::from_fn(3, 3, |i, j| 0.05 * (i * j) as f64);
        st.lambda_mult = DMatrix::from_fn(3, 3, |i, j| 0.01 * (i as f64 - j as f64));
        st
    }

    fn lap3() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 1.5, -0.5, 0.0, -0.5, 0.5])
    }

    #[test]
    fn s_star_with_zero_laplacian_is_diagonal_solve() {
        let st = state3();
        let x = update_s_star(&st, &ShiftedLaplacianSolver::identity(3)).unwrap();
        let expect = &st.e - (&st.d_star + &st.lambda_mult) / st.gamma1;
        assert!((x - expect).amax() < 1e-15);
    }

    #[test]
    fn s_star_matches_dense_inverse() {
        let st = state3();
        let l = lap3();
        let x = update_s_star(&st, &ShiftedLaplacianSolver::new(&l).unwrap()).unwrap();
        let a = &l * 2.0 + DMatrix::identity(3, 3) * st.gamma1;
        let rhs = &st.e * st.gamma1 - &st.d_star - &st.lambda_mult;
        let expect = a.clone().try_inverse().unwrap() * &rhs;
        assert!((&x - expect).amax() < 1e-10);
        assert!((a * x - &rhs).norm() <= 1e-8 * rhs.norm());
    }

    #[test]
    fn s_star_tracks_e_under_large_penalty() {
        let mut st = state3();
        st.gamma1 = 1e6;
        let x = update_s_star(&st, &ShiftedLaplacianSolver::new(&lap3()).unwrap()).unwrap();
        assert!((x - &st.e).amax() < 1e-5);
    }

    #[test]
    fn e_update_clamps_and_pins() {
        let mut st = SolverState::zeros(2, 1.0);
        st.s_star = DMatrix::from_row_slice(2, 2, &[1.7, 0.2, 0.4, -0.5]);
        let none = DMatrix::zeros(2, 2);
        let e = update_e(&st, &none);
        assert_eq!(e[(0, 0)], 1.0);
        assert!((e[(0, 1)] - 0.3).abs() < 1e-15);
        assert_eq!(e[(1, 0)], e[(0, 1)]);
        assert_eq!(e[(1, 1)], 0.0);
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 0.9, 0.9, 0.0]);
        let e = update_e(&st, &s);
        assert_eq!(e[(0, 1)], 0.9);
        assert_eq!(e[(1, 0)], 0.9);
    }

    #[test]
    fn e_update_is_identity_inside_box() {
        let mut st = SolverState::zeros(3, 1.0);
        st.s_star = DMatrix::from_fn(3, 3, |i, j| 0.1 * (i + j) as f64 + 0.05);
        assert_eq!(update_e(&st, &DMatrix::zeros(3, 3)), st.s_star);
    }

    #[test]
    fn f_update_clamps_negative_and_pins() {
        let mut st = SolverState::zeros(2, 1.0);
        st.d_star = DMatrix::from_row_slice(2, 2, &[-0.3, 0.6, 0.6, 0.2]);
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 0.4, 0.4, 0.0]);
        let f = update_f(&st, &d);
        assert_eq!(f[(0, 0)], 0.0);
        assert_eq!(f[(0, 1)], 0.4);
        assert_eq!(f[(1, 1)], 0.2);
    }

    #[test]
    fn d_star_mirrors_s_star() {
        let l = lap3();
        let solver = ShiftedLaplacianSolver::new(&l).unwrap();
        let st = state3();
        let mirrored = SolverState {
            f: st.e.clone(),
            gamma_mult: st.lambda_mult.clone(),
            gamma2: st.gamma1,
            ..SolverState::zeros(3, 1.0)
        };
        let s = update_s_star(&st, &solver).unwrap();
        let d = update_d_star(&mirrored, &solver, &st.d_star).unwrap();
        assert_eq!(s, d);
    }

    #[test]
    fn multipliers_and_penalty_growth() {
        let cfg = SolverConfig::default();
        let mut st = state3();
        st.gamma1 = 1.0;
        st.gamma2 = 1e6;
        st.s_star = st.e.clone();
        st.f = st.d_star.clone();
        let (lam, gam) = (st.lambda_mult.clone(), st.gamma_mult.clone());
        update_multipliers(&mut st, &cfg);
        assert_eq!(st.lambda_mult, lam);
        assert_eq!(st.gamma_mult, gam);
        assert!((st.gamma1 - 1.1).abs() < 1e-15);
        assert_eq!(st.gamma2, 1e6);
    }

    #[test]
    fn zero_problem_converges_immediately() {
        let z = SymMatrix::zeros(4);
        let out = solve(&z, &z, &DMatrix::zeros(4, 4), &SolverConfig::default()).unwrap();
        assert!(out.trace.converged);
        assert_eq!(out.trace.iterations(), 1);
        assert_eq!(out.s_star, z);
        assert_eq!(out.d_star, z);
    }

    #[test]
    fn relative_change_edge_cases() {
        let z = DMatrix::<f64>::zeros(2, 2);
        let one = DMatrix::from_element(2, 2, 1.0);
        assert_eq!(relative_change(&z, &z), 0.0);
        assert_eq!(relative_change(&one, &z), f64::INFINITY);
        assert!((relative_change(&(&one * 2.0), &one) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            rho: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn trace_tsv_has_row_per_iteration() {
        let s = SymMatrix::from_rows(&[vec![0.0, 0.9], vec![0.9, 0.0]]).unwrap();
        let d = SymMatrix::zeros(2);
        let out = solve(&s, &d, &DMatrix::zeros(2, 2), &SolverConfig::default()).unwrap();
        let tsv = out.trace.to_tsv();
        assert_eq!(tsv.lines().count(), out.trace.iterations() + 1);
        assert!(tsv.starts_with("iter\t"));
    }
}
