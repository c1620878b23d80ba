//! The concave SDP-cone subproblem shared by the outer solvers.
//!
//! One kernel serves three callers: the linearized iteration subproblem
//! of the DC outer loop (`linear_slope = 1/β_c`), the unconstrained cap
//! problem (`linear_slope = 0`, no box), and the per-segment convex-hull
//! problems of the upper bound (chord slope plus a `β` box). After
//! eliminating the auxiliary scalars analytically, all of them are
//!
//! ```text
//!   maximize  log tr(A₁X) + log tr(A₂X) − slope·tr(B₂X)
//!   subject to  tr(B₁X) = 1,  lo ≤ tr(B₂X) ≤ hi,  X ⪰ 0
//! ```
//!
//! solved by log-barrier path following: maximize the objective plus
//! `μ·log det X` (and box barriers) under the trace equality with Newton
//! steps over the real parametrization of Hermitian `X`, decreasing `μ`
//! geometrically. Newton systems are solved with the closed-form inverse
//! of the `log det` Hessian (`E ↦ X·E·X`) plus a low-rank Woodbury
//! correction, so a step costs a handful of `n×n` multiplies.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, HermitianMatrix};
use crate::problem::ProblemMatrices;

const MU_INIT: f64 = 1.0;
const MU_MIN: f64 = 1e-9;
const MU_FACTOR: f64 = 0.1;
const MAX_NEWTON_STEPS: usize = 500;
/// Newton decrement (λ²/2) targets: loose while following the path,
/// tight at the final barrier stage.
const STAGE_TOL: f64 = 1e-4;
const FINAL_TOL: f64 = 1e-10;
const ARMIJO: f64 = 1e-4;
/// Relative box width below which β is held by an equality constraint
/// instead of barrier terms.
const PIN_WIDTH: f64 = 1e-9;
/// Relative spread of the (B₂, B₁) pencil below which β is a constant
/// of the feasible set and the box becomes vacuous.
const DEP_TOL: f64 = 1e-9;

/// Specification of one subproblem instance.
#[derive(Debug, Clone)]
pub struct SubproblemSpec {
    pub a1: HermitianMatrix,
    pub a2: HermitianMatrix,
    pub b1: HermitianMatrix,
    pub b2: HermitianMatrix,
    /// Coefficient of the `−tr(B₂X)` term; `0` disables it.
    pub linear_slope: f64,
    /// Optional bounds on `tr(B₂X)`.
    pub beta_box: Option<(f64, f64)>,
    /// Keep the `log tr(A₂X)` term (true for every caller in this crate).
    pub include_log_tau: bool,
}

impl SubproblemSpec {
    pub fn new(
        a1: HermitianMatrix,
        a2: HermitianMatrix,
        b1: HermitianMatrix,
        b2: HermitianMatrix,
        linear_slope: f64,
        beta_box: Option<(f64, f64)>,
    ) -> Result<Self> {
        let n = a1.dim();
        if [a2.dim(), b1.dim(), b2.dim()].iter().any(|&d| d != n) {
            return Err(Error::InvalidInput("subproblem matrices must share a dimension".into()));
        }
        if !(linear_slope >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "linear_slope must be nonnegative, got {linear_slope}"
            )));
        }
        if let Some((lo, hi)) = beta_box {
            if !(lo <= hi) {
                return Err(Error::InvalidInput(format!("empty beta box [{lo}, {hi}]")));
            }
        }
        if !b1.is_positive_definite() {
            return Err(Error::InvalidInput("B₁ must be positive definite".into()));
        }
        Ok(Self {
            a1,
            a2,
            b1,
            b2,
            linear_slope,
            beta_box,
            include_log_tau: true,
        })
    }

    /// Spec taken directly from the problem matrices.
    pub fn from_problem(
        pm: &ProblemMatrices,
        linear_slope: f64,
        beta_box: Option<(f64, f64)>,
    ) -> Result<Self> {
        Self::new(
            pm.a1.clone(),
            pm.a2.clone(),
            pm.b1.clone(),
            pm.b2.clone(),
            linear_slope,
            beta_box,
        )
    }

    fn dim(&self) -> usize {
        self.a1.dim()
    }
}

/// Primal solution plus the dual certificate assembled from the final
/// barrier state.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub x: HermitianMatrix,
    /// `tr(A₂X)`.
    pub tau: f64,
    /// `tr(B₂X)`.
    pub beta: f64,
    /// Objective at `x`.
    pub value: f64,
    /// Scaled Frobenius norm of the stationarity residual.
    pub kkt_residual: f64,
    /// Total complementarity slack of the certificate.
    pub duality_gap: f64,
    /// Multiplier of the trace equality.
    pub dual_eq: f64,
    /// Multipliers of the lower/upper box bounds (zero when absent).
    pub dual_box: (f64, f64),
    /// PSD-cone dual matrix `Z ⪰ 0`.
    pub dual_psd: HermitianMatrix,
    pub newton_steps: usize,
}

/// Real parametrization of Hermitian matrices: `n` diagonal entries,
/// then (Re, Im) of each strict upper-triangle entry, column by row.
struct HermBasis {
    n: usize,
}

#[derive(Clone, Copy)]
enum BasisKind {
    Diag(usize),
    Re(usize, usize),
    Im(usize, usize),
}

impl HermBasis {
    fn new(n: usize) -> Self {
        Self { n }
    }

    fn len(&self) -> usize {
        self.n * self.n
    }

    fn kinds(&self) -> impl Iterator<Item = BasisKind> + '_ {
        let diag = (0..self.n).map(BasisKind::Diag);
        let off = (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).flat_map(move |j| [BasisKind::Re(i, j), BasisKind::Im(i, j)])
        });
        diag.chain(off)
    }

    fn mat(&self, p: &DVector<f64>) -> HermitianMatrix {
        let mut m = DMatrix::<Complex64>::zeros(self.n, self.n);
        for (k, kind) in self.kinds().enumerate() {
            match kind {
                BasisKind::Diag(i) => m[(i, i)].re = p[k],
                BasisKind::Re(i, j) => {
                    m[(i, j)].re = p[k];
                    m[(j, i)].re = p[k];
                }
                BasisKind::Im(i, j) => {
                    m[(i, j)].im = p[k];
                    m[(j, i)].im = -p[k];
                }
            }
        }
        HermitianMatrix::symmetrized(m)
    }

    fn param_coords(&self, h: &HermitianMatrix) -> DVector<f64> {
        let mut p = DVector::zeros(self.len());
        for (k, kind) in self.kinds().enumerate() {
            p[k] = match kind {
                BasisKind::Diag(i) => h.entry(i, i).re,
                BasisKind::Re(i, j) => h.entry(i, j).re,
                BasisKind::Im(i, j) => h.entry(i, j).im,
            };
        }
        p
    }

    /// Coordinates of the linear functional `X ↦ tr(C·X)`, so that
    /// `tr(C·X) = func_coords(C)·param_coords(X)`.
    fn func_coords(&self, c: &HermitianMatrix) -> DVector<f64> {
        let mut v = DVector::zeros(self.len());
        for (k, kind) in self.kinds().enumerate() {
            v[k] = match kind {
                BasisKind::Diag(i) => c.entry(i, i).re,
                BasisKind::Re(i, j) => 2.0 * c.entry(i, j).re,
                BasisKind::Im(i, j) => 2.0 * c.entry(i, j).im,
            };
        }
        v
    }

    /// Applies `M⁻¹` where `M` is the Hessian of `−log det X`, i.e.
    /// `M_kl = tr(X⁻¹·E_k·X⁻¹·E_l)`. In operator form `M` represents
    /// `E ↦ X⁻¹·E·X⁻¹`, so its inverse is `E ↦ X·E·X` up to the basis
    /// Gram factors, which reduce to halving the off-diagonal entries.
    fn solve_log_det_hessian(&self, x: &HermitianMatrix, r: &DVector<f64>) -> DVector<f64> {
        let mut scaled = r.clone();
        for (k, kind) in self.kinds().enumerate() {
            if !matches!(kind, BasisKind::Diag(_)) {
                scaled[k] *= 0.5;
            }
        }
        let r_mat = self.mat(&scaled);
        let prod = x.as_matrix() * r_mat.as_matrix() * x.as_matrix();
        self.param_coords(&HermitianMatrix::symmetrized(prod))
    }
}

/// How the β bounds are enforced in the barrier problem.
enum BoxMode {
    /// No box requested, or β is a constant of the feasible set.
    None,
    /// Barrier terms `−μ·log(hi−β) − μ·log(β−lo)`.
    Barrier { lo: f64, hi: f64 },
    /// Width below resolution: hold `tr(B₂X) = target` exactly.
    Pinned { target: f64 },
}

struct BarrierProblem<'a> {
    spec: &'a SubproblemSpec,
    basis: HermBasis,
    a1c: DVector<f64>,
    a2c: DVector<f64>,
    b1c: DVector<f64>,
    b2c: DVector<f64>,
    box_mode: BoxMode,
}

struct EvalState {
    x: HermitianMatrix,
    chol: DMatrix<Complex64>,
    t1: f64,
    t2: f64,
    beta: f64,
    /// Barrier objective (minimization sign).
    f: f64,
}

impl<'a> BarrierProblem<'a> {
    fn new(spec: &'a SubproblemSpec, box_mode: BoxMode) -> Self {
        let basis = HermBasis::new(spec.dim());
        Self {
            a1c: basis.func_coords(&spec.a1),
            a2c: basis.func_coords(&spec.a2),
            b1c: basis.func_coords(&spec.b1),
            b2c: basis.func_coords(&spec.b2),
            basis,
            spec,
            box_mode,
        }
    }

    /// Objective of the original problem (maximization sign).
    fn objective(&self, t1: f64, t2: f64, beta: f64) -> f64 {
        let mut v = t1.ln() - self.spec.linear_slope * beta;
        if self.spec.include_log_tau {
            v += t2.ln();
        }
        v
    }

    /// Evaluates the barrier objective at `p`; `None` if `X(p)` leaves
    /// the cone or β leaves the box interior.
    fn eval(&self, p: &DVector<f64>, mu: f64) -> Option<EvalState> {
        let x = self.basis.mat(p);
        let chol = x.try_cholesky()?;
        let t1 = self.a1c.dot(p);
        let t2 = self.a2c.dot(p);
        let beta = self.b2c.dot(p);
        if t1 <= 0.0 || (self.spec.include_log_tau && t2 <= 0.0) {
            return None;
        }
        let log_det: f64 = (0..x.dim()).map(|i| chol[(i, i)].re.ln()).sum::<f64>() * 2.0;
        let mut f = -self.objective(t1, t2, beta) - mu * log_det;
        if let BoxMode::Barrier { lo, hi } = self.box_mode {
            if beta <= lo || beta >= hi {
                return None;
            }
            f -= mu * ((hi - beta).ln() + (beta - lo).ln());
        }
        Some(EvalState { x, chol, t1, t2, beta, f })
    }

    fn gradient(&self, st: &EvalState, w_coords: &DVector<f64>, mu: f64) -> DVector<f64> {
        let mut g = -&self.a1c / st.t1 + &self.b2c * self.spec.linear_slope - w_coords * mu;
        if self.spec.include_log_tau {
            g -= &self.a2c / st.t2;
        }
        if let BoxMode::Barrier { lo, hi } = self.box_mode {
            g += &self.b2c * (mu / (hi - st.beta));
            g -= &self.b2c * (mu / (st.beta - lo));
        }
        g
    }

    /// Columns and coefficients of the low-rank Hessian part
    /// `∇²F = μ·M + Σ d_i·v_i·v_iᵀ`.
    fn low_rank_terms(&self, st: &EvalState, mu: f64) -> (Vec<&DVector<f64>>, Vec<f64>) {
        let mut cols = vec![&self.a1c];
        let mut coefs = vec![1.0 / (st.t1 * st.t1)];
        if self.spec.include_log_tau {
            cols.push(&self.a2c);
            coefs.push(1.0 / (st.t2 * st.t2));
        }
        if let BoxMode::Barrier { lo, hi } = self.box_mode {
            let d = mu / ((hi - st.beta) * (hi - st.beta)) + mu / ((st.beta - lo) * (st.beta - lo));
            cols.push(&self.b2c);
            coefs.push(d);
        }
        (cols, coefs)
    }

    fn constraint_rows(&self) -> Vec<(&DVector<f64>, f64)> {
        let mut rows = vec![(&self.b1c, 1.0)];
        if let BoxMode::Pinned { target } = self.box_mode {
            rows.push((&self.b2c, target));
        }
        rows
    }

    /// Exact Hessian-vector product, used for iterative refinement:
    /// `∇²F·v = μ·M·v + Σ d_i·(v_iᵀv)·v_i` with
    /// `M·v = func_coords(W·mat(v)·W)`.
    fn apply_hessian(
        &self,
        st: &EvalState,
        w: &HermitianMatrix,
        mu: f64,
        v: &DVector<f64>,
    ) -> DVector<f64> {
        let v_mat = self.basis.mat(v);
        let prod = w.as_matrix() * v_mat.as_matrix() * w.as_matrix();
        let mut out = self
            .basis
            .func_coords(&HermitianMatrix::symmetrized(prod))
            * mu;
        let (cols, coefs) = self.low_rank_terms(st, mu);
        for (col, d) in cols.iter().zip(&coefs) {
            out += *col * (d * col.dot(v));
        }
        out
    }

    /// Applies `(∇²F)⁻¹` via Woodbury on top of the closed-form
    /// `(μM)⁻¹`.
    fn solve_hessian(&self, st: &EvalState, mu: f64, rhs: &DVector<f64>) -> DVector<f64> {
        let m_inv = |v: &DVector<f64>| self.basis.solve_log_det_hessian(&st.x, v) / mu;
        let (cols, coefs) = self.low_rank_terms(st, mu);
        let r = cols.len();
        let base = m_inv(rhs);
        if r == 0 {
            return base;
        }
        let s: Vec<DVector<f64>> = cols.iter().map(|v| m_inv(v)).collect();
        let mut small = DMatrix::<f64>::zeros(r, r);
        for i in 0..r {
            small[(i, i)] = 1.0 / coefs[i];
            for j in 0..r {
                small[(i, j)] += cols[i].dot(&s[j]);
            }
        }
        let vt_base = DVector::from_iterator(r, cols.iter().map(|v| v.dot(&base)));
        let corr = small
            .lu()
            .solve(&vt_base)
            .expect("woodbury inner system is positive definite");
        let mut out = base;
        for i in 0..r {
            out -= &s[i] * corr[i];
        }
        out
    }
}

struct KktStep {
    delta: DVector<f64>,
    lambda: Vec<f64>,
    /// Signed Newton decrement `λ²/2`; a clearly negative value flags
    /// that the Newton system has fallen below f64 resolution.
    dec: f64,
}

impl<'a> BarrierProblem<'a> {
    /// Equality-constrained Newton step with iterative refinement of the
    /// bordered KKT system; refinement buys roughly two extra decades of
    /// barrier path before f64 runs out.
    fn newton_step(&self, st: &EvalState, p: &DVector<f64>, mu: f64) -> KktStep {
        let w = st.x.pd_inverse().expect("iterate stays positive definite");
        let w_coords = self.basis.func_coords(&w);
        let grad = self.gradient(st, &w_coords, mu);

        let rows = self.constraint_rows();
        let m = rows.len();
        let hinv_rows: Vec<DVector<f64>> =
            rows.iter().map(|(c, _)| self.solve_hessian(st, mu, c)).collect();
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                schur[(i, j)] = rows[i].0.dot(&hinv_rows[j]);
            }
        }
        let schur_lu = schur.lu();

        // Solves [H Cᵀ; C 0]·[x; y] = [b; c].
        let solve_bordered = |b: &DVector<f64>, c: &DVector<f64>| {
            let x0 = self.solve_hessian(st, mu, b);
            let mut rhs = DVector::<f64>::zeros(m);
            for i in 0..m {
                rhs[i] = rows[i].0.dot(&x0) - c[i];
            }
            let y = schur_lu.solve(&rhs).expect("constraint gram is nonsingular");
            let mut x = x0;
            for i in 0..m {
                x -= &hinv_rows[i] * y[i];
            }
            (x, y)
        };

        let b = -&grad;
        let c = DVector::from_iterator(m, rows.iter().map(|(r, tgt)| tgt - r.dot(p)));
        let (mut delta, mut lambda) = solve_bordered(&b, &c);
        for _ in 0..2 {
            let mut rb = &b - self.apply_hessian(st, &w, mu, &delta);
            for i in 0..m {
                rb -= rows[i].0 * lambda[i];
            }
            let rc = DVector::from_iterator(m, rows.iter().map(|(r, _)| r.dot(&delta)));
            let rc = &c - rc;
            if rb.norm() <= 1e-14 * b.norm().max(1.0) && rc.norm() <= 1e-14 {
                break;
            }
            let (dx, dy) = solve_bordered(&rb, &rc);
            delta += dx;
            lambda += dy;
        }

        let mut dec = -grad.dot(&delta);
        for i in 0..m {
            dec -= c[i] * lambda[i];
        }
        KktStep {
            delta,
            lambda: lambda.iter().copied().collect(),
            dec: 0.5 * dec,
        }
    }
}

/// Strictly feasible start `X₀`.
///
/// Without a box this is `B₁⁻¹/n`. With one, a point with
/// `tr(B₂X₀) = target` is assembled from the eigenbasis of the whitened
/// pencil `(B₂, B₁)`: a two-point spectral weight profile hits the
/// target exactly and a uniform admixture keeps `X₀` well conditioned.
fn feasible_start(spec: &SubproblemSpec, target_beta: Option<f64>) -> Result<HermitianMatrix> {
    let n = spec.dim();
    let b1_inv = spec.b1.pd_inverse()?;
    let Some(target) = target_beta else {
        return Ok(b1_inv.scale(1.0 / n as f64));
    };

    let l = spec
        .b1
        .try_cholesky()
        .ok_or_else(|| Error::SingularPencil("B₁ must be positive definite".into()))?;
    let t1 = l
        .solve_lower_triangular(spec.b2.as_matrix())
        .ok_or_else(|| Error::SingularPencil("triangular solve failed".into()))?;
    let whitened = l
        .solve_lower_triangular(&t1.adjoint())
        .ok_or_else(|| Error::SingularPencil("triangular solve failed".into()))?;
    let eig = hermitian_eig(&HermitianMatrix::symmetrized(whitened));
    let lam = &eig.eigenvalues;
    let (lam_min, lam_max) = (lam[0], lam[n - 1]);
    if target < lam_min - 1e-9 * lam_min.abs().max(1.0)
        || target > lam_max + 1e-9 * lam_max.abs().max(1.0)
    {
        return Err(Error::Infeasible(format!(
            "β target {target} outside the pencil range [{lam_min}, {lam_max}]"
        )));
    }

    // Two-point weights on a bracketing eigenvalue pair, blended with a
    // uniform profile as long as the blend keeps the target reachable.
    let mean: f64 = lam.iter().sum::<f64>() / n as f64;
    let mut alpha = 0.1;
    let mut weights = DVector::<f64>::zeros(n);
    for _ in 0..200 {
        let tp_target = (target - alpha * mean) / (1.0 - alpha);
        if tp_target >= lam_min && tp_target <= lam_max {
            let hi_idx = (0..n)
                .find(|&k| lam[k] >= tp_target)
                .unwrap_or(n - 1);
            let lo_idx = if hi_idx == 0 { 0 } else { hi_idx - 1 };
            weights.fill(alpha / n as f64);
            if hi_idx == lo_idx || (lam[hi_idx] - lam[lo_idx]).abs() < f64::EPSILON {
                weights[hi_idx] += 1.0 - alpha;
            } else {
                let t = (tp_target - lam[lo_idx]) / (lam[hi_idx] - lam[lo_idx]);
                weights[lo_idx] += (1.0 - alpha) * (1.0 - t);
                weights[hi_idx] += (1.0 - alpha) * t;
            }
            break;
        }
        alpha *= 0.5;
    }
    if weights.iter().all(|&w| w == 0.0) {
        // Target sits at an extreme eigenvalue; fall back to a nearly
        // two-point profile with a vanishing uniform floor.
        let idx = if (target - lam_min).abs() < (target - lam_max).abs() {
            0
        } else {
            n - 1
        };
        weights.fill(1e-12);
        weights[idx] = 1.0 - 1e-12 * (n as f64 - 1.0);
    }

    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let u = eig.eigenvectors.column(k);
        y += u * u.adjoint() * Complex64::new(weights[k], 0.0);
    }
    // Undo the whitening: X = L⁻ᴴ·Y·L⁻¹.
    let linv = l
        .solve_lower_triangular(&DMatrix::<Complex64>::identity(n, n))
        .ok_or_else(|| Error::SingularPencil("triangular solve failed".into()))?;
    Ok(HermitianMatrix::symmetrized(linv.adjoint() * y * linv))
}

/// Classifies the requested box against the reachable β range.
fn plan_box(spec: &SubproblemSpec) -> Result<(BoxMode, Option<f64>)> {
    let Some((lo, hi)) = spec.beta_box else {
        return Ok((BoxMode::None, None));
    };
    let ext = crate::linalg::gen_eig_extremes(&spec.b2, &spec.b1)?;
    let (lam_min, lam_max) = (ext.lambda_min, ext.lambda_max);
    let scale = lam_max.abs().max(1.0);
    let w_lo = lo.max(lam_min);
    let w_hi = hi.min(lam_max);
    if w_lo > w_hi + 1e-9 * scale {
        return Err(Error::Infeasible(format!(
            "beta box [{lo}, {hi}] misses the reachable range [{lam_min}, {lam_max}]"
        )));
    }
    if lam_max - lam_min <= DEP_TOL * scale {
        // β is a constant of the feasible set; the box is vacuous.
        return Ok((BoxMode::None, None));
    }
    if hi - lo <= PIN_WIDTH * scale {
        let target = 0.5 * (w_lo + w_hi);
        return Ok((BoxMode::Pinned { target }, Some(target)));
    }
    let target = 0.5 * (w_lo + w_hi);
    Ok((BoxMode::Barrier { lo, hi }, Some(target)))
}

/// Solves the subproblem to the stated KKT accuracy.
///
/// Follows the barrier path `μ = 1, 0.1, …, 1e-9`. Each stage is
/// terminated on the Newton decrement; the point and multipliers of the
/// last properly centered stage are what the certificate is built from,
/// so if the final decades of the path fall below f64 resolution the
/// reported solution remains self-consistent at the μ it reached.
pub fn solve_subproblem(spec: &SubproblemSpec) -> Result<SubproblemSolution> {
    if spec.dim() == 1 {
        return solve_scalar(spec);
    }
    let (box_mode, start_target) = plan_box(spec)?;
    let problem = BarrierProblem::new(spec, box_mode);
    let x0 = feasible_start(spec, start_target)?;
    let mut p = problem.basis.param_coords(&x0);

    let mut mu = MU_INIT;
    let mut steps = 0usize;
    let mut snapshot: Option<(DVector<f64>, f64, Vec<f64>)> = None;
    'path: loop {
        let stage_tol = if mu <= MU_MIN * 1.0001 { FINAL_TOL } else { STAGE_TOL };
        let mut centered = None;
        loop {
            let Some(st) = problem.eval(&p, mu) else {
                break;
            };
            let step = problem.newton_step(&st, &p, mu);
            if step.dec <= stage_tol {
                if step.dec.abs() <= stage_tol || step.dec >= 0.0 {
                    centered = Some(step.lambda);
                }
                break;
            }
            if steps >= MAX_NEWTON_STEPS {
                if snapshot.is_some() {
                    break 'path;
                }
                return Err(Error::NoConvergence {
                    iterations: steps,
                    residual: step.dec,
                });
            }
            steps += 1;

            // Backtracking line search: stay in the cone and the box,
            // then require Armijo decrease of the barrier objective.
            let mut t = 1.0;
            let slope_f = -2.0 * step.dec;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &p + &step.delta * t;
                if let Some(next) = problem.eval(&cand, mu) {
                    if next.f <= st.f + ARMIJO * t * slope_f {
                        p = cand;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        match centered {
            Some(lambda) => snapshot = Some((p.clone(), mu, lambda)),
            // Progress stopped mid-stage: fall back to the last center.
            None => break 'path,
        }
        if mu <= MU_MIN * 1.0001 {
            break;
        }
        mu = (mu * MU_FACTOR).max(MU_MIN);
    }

    let (p_final, mu_final, multipliers) = snapshot.ok_or(Error::NoConvergence {
        iterations: steps,
        residual: f64::NAN,
    })?;
    let st = problem.eval(&p_final, mu_final).ok_or(Error::NoConvergence {
        iterations: steps,
        residual: f64::NAN,
    })?;
    Ok(assemble_solution(&problem, &st, &multipliers, mu_final, steps))
}

/// Builds the reported solution and dual certificate at the final
/// barrier center: `Z = μ·X⁻¹` and box multipliers `μ/(β−lo)`,
/// `μ/(hi−β)`; the equality multiplier is the least-squares fit that
/// minimizes the stationarity residual.
fn assemble_solution(
    problem: &BarrierProblem<'_>,
    st: &EvalState,
    multipliers: &[f64],
    mu: f64,
    steps: usize,
) -> SubproblemSolution {
    let spec = problem.spec;
    let z = st.x.pd_inverse().expect("final iterate is interior").scale(mu);

    let (eta_lo, eta_hi) = match problem.box_mode {
        BoxMode::None => (0.0, 0.0),
        BoxMode::Barrier { lo, hi } => (mu / (st.beta - lo), mu / (hi - st.beta)),
        BoxMode::Pinned { .. } => {
            let kappa = multipliers.get(1).copied().unwrap_or(0.0);
            (kappa.max(0.0), (-kappa).max(0.0))
        }
    };

    // Stationarity: ∇f(X) + Z − ν·B₁ + (η_lo − η_hi)·B₂ = 0.
    let mut lhs = spec.a1.scale(1.0 / st.t1).add_scaled(&z, 1.0);
    if spec.include_log_tau {
        lhs = lhs.add_scaled(&spec.a2, 1.0 / st.t2);
    }
    lhs = lhs.add_scaled(&spec.b2, eta_lo - eta_hi - spec.linear_slope);
    let nu = lhs.trace_product(&spec.b1) / spec.b1.trace_product(&spec.b1);
    let resid = lhs.add_scaled(&spec.b1, -nu);
    let scale = spec.a1.frobenius_norm() / st.t1
        + if spec.include_log_tau {
            spec.a2.frobenius_norm() / st.t2
        } else {
            0.0
        }
        + z.frobenius_norm()
        + nu.abs() * spec.b1.frobenius_norm()
        + (eta_lo - eta_hi - spec.linear_slope).abs() * spec.b2.frobenius_norm();
    let kkt_residual = resid.frobenius_norm() / scale.max(1e-300);

    let mut gap = z.trace_product(&st.x);
    if let BoxMode::Barrier { lo, hi } = problem.box_mode {
        gap += eta_lo * (st.beta - lo) + eta_hi * (hi - st.beta);
    }

    SubproblemSolution {
        x: st.x.clone(),
        tau: st.t2,
        beta: st.beta,
        value: problem.objective(st.t1, st.t2, st.beta),
        kkt_residual,
        duality_gap: gap,
        dual_eq: nu,
        dual_box: (eta_lo, eta_hi),
        dual_psd: z,
        newton_steps: steps,
    }
}

/// One-dimensional instances are fully determined by the equality
/// constraint: `X = 1/B₁`.
fn solve_scalar(spec: &SubproblemSpec) -> Result<SubproblemSolution> {
    let b1 = spec.b1.entry(0, 0).re;
    let x = 1.0 / b1;
    let t1 = spec.a1.entry(0, 0).re * x;
    let tau = spec.a2.entry(0, 0).re * x;
    let beta = spec.b2.entry(0, 0).re * x;
    if let Some((lo, hi)) = spec.beta_box {
        let scale = hi.abs().max(1.0);
        if beta < lo - 1e-9 * scale || beta > hi + 1e-9 * scale {
            return Err(Error::Infeasible(format!(
                "forced β = {beta} lies outside the box [{lo}, {hi}]"
            )));
        }
    }
    if t1 <= 0.0 || (spec.include_log_tau && tau <= 0.0) {
        return Err(Error::InvalidInput("nonpositive trace functional".into()));
    }
    let mut value = t1.ln() - spec.linear_slope * beta;
    if spec.include_log_tau {
        value += tau.ln();
    }
    // Stationarity holds with Z = 0 and the equality multiplier below.
    let mut grad = spec.a1.entry(0, 0).re / t1 - spec.linear_slope * spec.b2.entry(0, 0).re;
    if spec.include_log_tau {
        grad += spec.a2.entry(0, 0).re / tau;
    }
    let nu = grad / b1;
    Ok(SubproblemSolution {
        x: HermitianMatrix::identity(1).scale(x),
        tau,
        beta,
        value,
        kkt_residual: 0.0,
        duality_gap: 0.0,
        dual_eq: nu,
        dual_box: (0.0, 0.0),
        dual_psd: HermitianMatrix::zeros(1),
        newton_steps: 0,
    })
}
