//! Dense revised simplex over an abstract column source.
//!
//! The basis inverse is kept dense (problems here have few rows) while
//! constraint columns are visited through a trait, so structured problems
//! with millions of columns never materialize their matrix. Dantzig
//! pricing with a Bland fallback after a degenerate stall guards against
//! cycling.

use super::SolverError;
use rayon::prelude::*;

/// Column access for `min c'x  s.t.  A_eq x = b_eq, A_ub x <= b_ub, x >= 0`.
/// Rows are stacked equality-first; `visit` reports a column's nonzeros.
pub trait LpColumns: Sync {
    fn n_vars(&self) -> usize;
    fn cost(&self, j: usize) -> f64;
    fn visit(&self, j: usize, f: &mut dyn FnMut(usize, f64));
}

/// Plain sparse storage, built with [`LpBuilder`].
#[derive(Debug, Clone)]
pub struct SparseColumns {
    pub c: Vec<f64>,
    pub cols: Vec<Vec<(usize, f64)>>,
}

impl LpColumns for SparseColumns {
    fn n_vars(&self) -> usize {
        self.c.len()
    }
    fn cost(&self, j: usize) -> f64 {
        self.c[j]
    }
    fn visit(&self, j: usize, f: &mut dyn FnMut(usize, f64)) {
        for &(r, v) in &self.cols[j] {
            f(r, v);
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpProblem<C: LpColumns> {
    pub columns: C,
    pub n_eq: usize,
    pub b_eq: Vec<f64>,
    pub b_ub: Vec<f64>,
}

pub type SparseLp = LpProblem<SparseColumns>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    /// dual values for the stacked rows (valid when optimal)
    pub duals: Vec<f64>,
}

pub struct LpBuilder {
    n_vars: usize,
    c: Vec<f64>,
    b_eq: Vec<f64>,
    b_ub: Vec<f64>,
    eq_rows: Vec<Vec<(usize, f64)>>,
    ub_rows: Vec<Vec<(usize, f64)>>,
}

impl LpBuilder {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            c: vec![0.0; n_vars],
            b_eq: Vec::new(),
            b_ub: Vec::new(),
            eq_rows: Vec::new(),
            ub_rows: Vec::new(),
        }
    }

    pub fn objective(mut self, c: Vec<f64>) -> Self {
        assert_eq!(c.len(), self.n_vars);
        self.c = c;
        self
    }

    pub fn eq(mut self, entries: Vec<(usize, f64)>, rhs: f64) -> Self {
        self.eq_rows.push(entries);
        self.b_eq.push(rhs);
        self
    }

    pub fn le(mut self, entries: Vec<(usize, f64)>, rhs: f64) -> Self {
        self.ub_rows.push(entries);
        self.b_ub.push(rhs);
        self
    }

    pub fn build(self) -> SparseLp {
        let n_eq = self.b_eq.len();
        let mut cols = vec![Vec::new(); self.n_vars];
        for (r, row) in self.eq_rows.iter().enumerate() {
            for &(j, v) in row {
                cols[j].push((r, v));
            }
        }
        for (r, row) in self.ub_rows.iter().enumerate() {
            for &(j, v) in row {
                cols[j].push((n_eq + r, v));
            }
        }
        LpProblem {
            columns: SparseColumns { c: self.c, cols },
            n_eq,
            b_eq: self.b_eq,
            b_ub: self.b_ub,
        }
    }
}

const EPS: f64 = 1e-9;

// Column index layout inside the tableau:
//   [0, n_struct)                     structural variables
//   [n_struct, n_struct + n_ub)       slacks, one per inequality row
//   [n_struct + n_ub, ... + m)        artificials, one per row
struct Tableau<'a, C: LpColumns> {
    cols: &'a C,
    m: usize,
    n_eq: usize,
    n_struct: usize,
    n_ub: usize,
    rhs: Vec<f64>,
    binv: Vec<f64>,
    basis: Vec<usize>,
    xb: Vec<f64>,
}

impl<'a, C: LpColumns> Tableau<'a, C> {
    fn total_vars(&self) -> usize {
        self.n_struct + self.n_ub + self.m
    }

    fn visit_col(&self, j: usize, f: &mut dyn FnMut(usize, f64)) {
        if j < self.n_struct {
            self.cols.visit(j, f);
        } else if j < self.n_struct + self.n_ub {
            f(self.n_eq + (j - self.n_struct), 1.0);
        } else {
            let r = j - self.n_struct - self.n_ub;
            f(r, if self.rhs[r] >= 0.0 { 1.0 } else { -1.0 });
        }
    }

    fn binv_col(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        self.visit_col(j, &mut |r, v| {
            for i in 0..self.m {
                out[i] += self.binv[i * self.m + r] * v;
            }
        });
        out
    }

    fn duals(&self, costs: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = costs(bj);
            if cb != 0.0 {
                for r in 0..self.m {
                    y[r] += cb * self.binv[i * self.m + r];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, costs: &(dyn Fn(usize) -> f64 + Sync), y: &[f64]) -> f64 {
        let mut rc = costs(j);
        self.visit_col(j, &mut |r, v| rc -= y[r] * v);
        rc
    }

    fn pivot(&mut self, enter: usize, leave_row: usize, col: &[f64]) {
        let piv = col[leave_row];
        let m = self.m;
        for r in 0..m {
            self.binv[leave_row * m + r] /= piv;
        }
        for i in 0..m {
            if i != leave_row && col[i] != 0.0 {
                let f = col[i];
                for r in 0..m {
                    self.binv[i * m + r] -= f * self.binv[leave_row * m + r];
                }
            }
        }
        let xb_piv = self.xb[leave_row] / piv;
        for i in 0..m {
            if i != leave_row {
                self.xb[i] -= col[i] * xb_piv;
            }
        }
        self.xb[leave_row] = xb_piv;
        self.basis[leave_row] = enter;
    }

    /// Simplex iterations under the cost functional; `allow_art` keeps
    /// artificials eligible (phase 1 only).
    fn run(
        &mut self,
        costs: &(dyn Fn(usize) -> f64 + Sync),
        struct_costs: Option<&[f64]>,
        allow_art: bool,
    ) -> Result<LpStatus, SolverError> {
        let n_total = self.total_vars();
        let art_start = self.n_struct + self.n_ub;
        let mut stall = 0usize;
        for _iter in 0..400_000 {
            let y = self.duals(costs);
            let bland = stall > 60;

            let candidate = if bland {
                let mut found = None;
                for j in 0..n_total {
                    if j >= art_start && !allow_art {
                        continue;
                    }
                    if self.reduced_cost(j, costs, &y) < -EPS {
                        found = Some(j);
                        break;
                    }
                }
                found
            } else {
                // Dantzig pricing; parallel over structural columns when wide
                let best_struct = if self.n_struct >= 65_536 {
                    let cols = self.cols;
                    let yv = &y;
                    let n_eqv = self.n_eq;
                    let _ = n_eqv;
                    (0..self.n_struct)
                        .into_par_iter()
                        .with_min_len(16_384)
                        .fold(
                            || (f64::INFINITY, usize::MAX),
                            |acc, j| {
                                let mut rc = match struct_costs {
                                    Some(cv) => cv[j],
                                    None => costs(j),
                                };
                                cols.visit(j, &mut |r, v| rc -= yv[r] * v);
                                if rc < acc.0 || (rc == acc.0 && j < acc.1) {
                                    (rc, j)
                                } else {
                                    acc
                                }
                            },
                        )
                        .reduce(
                            || (f64::INFINITY, usize::MAX),
                            |a, b| {
                                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                                    b
                                } else {
                                    a
                                }
                            },
                        )
                } else {
                    let mut best = (f64::INFINITY, usize::MAX);
                    for j in 0..self.n_struct {
                        let rc = self.reduced_cost(j, costs, &y);
                        if rc < best.0 {
                            best = (rc, j);
                        }
                    }
                    best
                };
                let mut best = best_struct;
                for j in self.n_struct..n_total {
                    if j >= art_start && !allow_art {
                        continue;
                    }
                    let rc = self.reduced_cost(j, costs, &y);
                    if rc < best.0 {
                        best = (rc, j);
                    }
                }
                if best.0 < -EPS {
                    Some(best.1)
                } else {
                    None
                }
            };

            let enter = match candidate {
                Some(j) => j,
                None => return Ok(LpStatus::Optimal),
            };

            let col = self.binv_col(enter);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if col[i] > EPS {
                    let ratio = self.xb[i] / col[i];
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12
                                || ((ratio - lr).abs() <= 1e-12 && self.basis[i] < self.basis[li])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let (leave_row, ratio) = match leave {
                Some(v) => v,
                None => return Ok(LpStatus::Unbounded),
            };
            self.pivot(enter, leave_row, &col);
            stall = if ratio.abs() <= 1e-12 { stall + 1 } else { 0 };
        }
        Err(SolverError::NumericalFailure("simplex iteration cap hit".into()))
    }
}

/// Solve the LP from a cold start (phase 1 as needed).
pub fn solve_lp<C: LpColumns>(prob: &LpProblem<C>) -> Result<LpSolution, SolverError> {
    solve_lp_with_basis(prob, None)
}

/// Solve the LP, optionally warm-started from a proposed feasible basis.
/// Basis indices use the tableau layout: structural `0..n_vars`, slack for
/// inequality row i at `n_vars + i`.
pub fn solve_lp_with_basis<C: LpColumns>(
    prob: &LpProblem<C>,
    warm_basis: Option<&[usize]>,
) -> Result<LpSolution, SolverError> {
    let n_eq = prob.n_eq;
    let n_ub = prob.b_ub.len();
    let m = n_eq + n_ub;
    let n_struct = prob.columns.n_vars();
    if prob.b_eq.len() != n_eq {
        return Err(SolverError::InvalidArgument("b_eq length".into()));
    }

    let rhs: Vec<f64> = prob.b_eq.iter().chain(&prob.b_ub).copied().collect();
    let mut t = Tableau {
        cols: &prob.columns,
        m,
        n_eq,
        n_struct,
        n_ub,
        rhs: rhs.clone(),
        binv: {
            let mut id = vec![0.0; m * m];
            for i in 0..m {
                id[i * m + i] = 1.0;
            }
            id
        },
        basis: Vec::new(),
        xb: Vec::new(),
    };

    let mut warm_ok = false;
    if let Some(basis) = warm_basis {
        if basis.len() == m && basis.iter().all(|&j| j < n_struct + n_ub) {
            if let Some((binv, xb)) = try_basis(&t, basis, &rhs) {
                if xb.iter().all(|&v| v >= -1e-7) {
                    t.binv = binv;
                    t.xb = xb.iter().map(|&v| v.max(0.0)).collect();
                    t.basis = basis.to_vec();
                    warm_ok = true;
                }
            }
        }
    }

    if !warm_ok {
        // cold start: slack basis on inequality rows with nonnegative rhs,
        // artificials elsewhere
        let mut basis = Vec::with_capacity(m);
        let mut xb = vec![0.0; m];
        let mut needs_phase1 = false;
        for r in 0..m {
            let is_ub = r >= n_eq;
            if is_ub && rhs[r] >= 0.0 {
                basis.push(n_struct + (r - n_eq));
                xb[r] = rhs[r];
            } else {
                basis.push(n_struct + n_ub + r);
                xb[r] = rhs[r].abs();
                needs_phase1 = true;
            }
        }
        t.basis = basis;
        t.xb = xb;
        for r in 0..m {
            if t.basis[r] >= n_struct + n_ub && rhs[r] < 0.0 {
                for c in 0..m {
                    t.binv[r * m + c] = -t.binv[r * m + c];
                }
            }
        }

        if needs_phase1 {
            let art_start = n_struct + n_ub;
            let phase1 = move |j: usize| if j >= art_start { 1.0 } else { 0.0 };
            t.run(&phase1, None, true)?;
            let infeas: f64 = t
                .basis
                .iter()
                .zip(&t.xb)
                .filter(|(&j, _)| j >= art_start)
                .map(|(_, &v)| v.max(0.0))
                .sum();
            if infeas > 1e-7 {
                return Ok(LpSolution {
                    x: vec![0.0; n_struct],
                    objective: f64::NAN,
                    status: LpStatus::Infeasible,
                    duals: vec![0.0; m],
                });
            }
        }
    }

    let columns = &prob.columns;
    let n_total_nonart = n_struct + n_ub;
    let phase2 = move |j: usize| {
        if j < n_struct {
            columns.cost(j)
        } else if j < n_total_nonart {
            0.0
        } else {
            // artificials barred from phase 2 via a prohibitive cost
            f64::INFINITY
        }
    };
    // artificials may linger in the basis at level ~0 after phase 1; give
    // them zero cost for pricing but never let them re-enter
    let phase2_safe = move |j: usize| {
        let c = phase2(j);
        if c.is_finite() {
            c
        } else {
            0.0
        }
    };
    let status = t.run(&phase2_safe, None, false)?;
    if status == LpStatus::Unbounded {
        return Ok(LpSolution {
            x: vec![0.0; n_struct],
            objective: f64::NEG_INFINITY,
            status,
            duals: vec![0.0; m],
        });
    }

    let mut x = vec![0.0; n_struct];
    for (i, &j) in t.basis.iter().enumerate() {
        if j < n_struct {
            x[j] = t.xb[i].max(0.0);
        }
    }
    let objective = x.iter().enumerate().map(|(j, &v)| v * prob.columns.cost(j)).sum();
    let duals = t.duals(&phase2_safe);
    Ok(LpSolution { x, objective, status: LpStatus::Optimal, duals })
}

fn try_basis<C: LpColumns>(
    t: &Tableau<C>,
    basis: &[usize],
    rhs: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let m = t.m;
    let mut aug = vec![0.0; m * 2 * m];
    for (i, &j) in basis.iter().enumerate() {
        t.visit_col(j, &mut |r, v| aug[r * 2 * m + i] = v);
    }
    for i in 0..m {
        aug[i * 2 * m + m + i] = 1.0;
    }
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if aug[r * 2 * m + col].abs() > aug[piv * 2 * m + col].abs() {
                piv = r;
            }
        }
        if aug[piv * 2 * m + col].abs() < 1e-11 {
            return None;
        }
        if piv != col {
            for c in 0..2 * m {
                aug.swap(col * 2 * m + c, piv * 2 * m + c);
            }
        }
        let d = aug[col * 2 * m + col];
        for c in 0..2 * m {
            aug[col * 2 * m + c] /= d;
        }
        for r in 0..m {
            if r != col {
                let f = aug[r * 2 * m + col];
                if f != 0.0 {
                    for c in 0..2 * m {
                        aug[r * 2 * m + c] -= f * aug[col * 2 * m + c];
                    }
                }
            }
        }
    }
    let mut binv = vec![0.0; m * m];
    for r in 0..m {
        for c in 0..m {
            binv[r * m + c] = aug[r * 2 * m + m + c];
        }
    }
    let mut xb = vec![0.0; m];
    for i in 0..m {
        for r in 0..m {
            xb[i] += binv[i * m + r] * rhs[r];
        }
    }
    Some((binv, xb))
}

/// Max primal/dual/complementarity residual of a solution; the solver's
/// internal dual certificate makes this an end-to-end optimality check.
pub fn complementary_slackness_residual<C: LpColumns>(
    prob: &LpProblem<C>,
    sol: &LpSolution,
) -> f64 {
    let m = prob.n_eq + prob.b_ub.len();
    let mut ax = vec![0.0; m];
    for j in 0..prob.columns.n_vars() {
        let xj = sol.x[j];
        if xj != 0.0 {
            prob.columns.visit(j, &mut |r, v| ax[r] += v * xj);
        }
    }
    let mut res: f64 = 0.0;
    for r in 0..prob.n_eq {
        res = res.max((ax[r] - prob.b_eq[r]).abs());
    }
    for (i, &b) in prob.b_ub.iter().enumerate() {
        let slack = b - ax[prob.n_eq + i];
        res = res.max((-slack).max(0.0));
        res = res.max((sol.duals[prob.n_eq + i] * slack).abs());
    }
    for j in 0..prob.columns.n_vars() {
        let mut rc = prob.columns.cost(j);
        prob.columns.visit(j, &mut |r, v| rc -= sol.duals[r] * v);
        res = res.max((-rc).max(0.0));
        res = res.max((sol.x[j] * rc).abs().min(1.0));
    }
    res
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn scalar_lower_bound() {
        // min x s.t. x >= 3, written as x - s = 3 with s >= 0
        let prob = LpBuilder::new(2)
            .objective(vec![1.0, 0.0])
            .eq(vec![(0, 1.0), (1, -1.0)], 3.0)
            .build();
        let sol = solve_lp(&prob).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 3.0).abs() < 1e-9);
        assert!((sol.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn negative_ub_rhs_supported() {
        // min x s.t. -x <= -3  (x >= 3)
        let prob = LpBuilder::new(1).objective(vec![1.0]).le(vec![(0, -1.0)], -3.0).build();
        let sol = solve_lp(&prob).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 3.0).abs() < 1e-9, "{:?}", sol.x);
    }

    #[test]
    fn infeasible_detected() {
        let prob = LpBuilder::new(1)
            .objective(vec![1.0])
            .eq(vec![(0, 1.0)], 1.0)
            .eq(vec![(0, 1.0)], 2.0)
            .build();
        assert_eq!(solve_lp(&prob).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let prob = LpBuilder::new(1).objective(vec![-1.0]).build();
        assert_eq!(solve_lp(&prob).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn small_textbook_instance() {
        let prob = LpBuilder::new(2)
            .objective(vec![-3.0, -5.0])
            .le(vec![(0, 1.0)], 4.0)
            .le(vec![(1, 2.0)], 12.0)
            .le(vec![(0, 3.0), (1, 2.0)], 18.0)
            .build();
        let sol = solve_lp(&prob).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
        assert!((sol.x[1] - 6.0).abs() < 1e-9);
        assert!((sol.objective + 36.0).abs() < 1e-9);
        assert!(complementary_slackness_residual(&prob, &sol) < 1e-6);
    }

    // Full dense-tableau simplex, the independent reference implementation
    // (min c'x, Ax <= b, x >= 0, b >= 0).
    fn dense_tableau_reference(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
        let m = a.len();
        let n = c.len();
        let width = n + m + 1;
        let mut t = vec![vec![0.0; width]; m + 1];
        for i in 0..m {
            for j in 0..n {
                t[i][j] = a[i][j];
            }
            t[i][n + i] = 1.0;
            t[i][width - 1] = b[i];
        }
        for j in 0..n {
            t[m][j] = c[j];
        }
        for _ in 0..40_000 {
            let mut enter = None;
            let mut best = -1e-9;
            for j in 0..n + m {
                if t[m][j] < best {
                    best = t[m][j];
                    enter = Some(j);
                }
            }
            let enter = match enter {
                Some(j) => j,
                None => return Some(-t[m][width - 1]),
            };
            let mut leave = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..m {
                if t[i][enter] > 1e-9 {
                    let r = t[i][width - 1] / t[i][enter];
                    if r < best_ratio - 1e-12 {
                        best_ratio = r;
                        leave = Some(i);
                    }
                }
            }
            let leave = leave?;
            let piv = t[leave][enter];
            for j in 0..width {
                t[leave][j] /= piv;
            }
            for i in 0..m + 1 {
                if i != leave && t[i][enter] != 0.0 {
                    let f = t[i][enter];
                    for j in 0..width {
                        t[i][j] -= f * t[leave][j];
                    }
                }
            }
        }
        None
    }

    #[test]
    fn random_instances_match_dense_tableau_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for case in 0..40 {
            let n = 50;
            let m = 12;
            let c: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let a: Vec<Vec<f64>> =
                (0..m).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
            let b: Vec<f64> = (0..m).map(|_| 1.0 + 4.0 * rng.gen::<f64>()).collect();
            let mut builder = LpBuilder::new(n).objective(c.clone());
            for (row, rhs) in a.iter().zip(&b) {
                let entries: Vec<(usize, f64)> =
                    row.iter().enumerate().map(|(j, &v)| (j, v)).collect();
                builder = builder.le(entries, *rhs);
            }
            for j in 0..n {
                builder = builder.le(vec![(j, 1.0)], 3.0);
            }
            let prob = builder.build();
            let sol = solve_lp(&prob).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal, "case {case}");

            let mut a_full = a.clone();
            let mut b_full = b.clone();
            for j in 0..n {
                let mut row = vec![0.0; n];
                row[j] = 1.0;
                a_full.push(row);
                b_full.push(3.0);
            }
            let reference = dense_tableau_reference(&c, &a_full, &b_full).unwrap();
            assert!(
                (sol.objective - reference).abs() < 1e-7 * (1.0 + reference.abs()),
                "case {case}: {} vs {reference}",
                sol.objective
            );
            assert!(complementary_slackness_residual(&prob, &sol) < 1e-6, "case {case}");
        }
    }

    #[test]
    fn warm_start_matches_cold_start() {
        // simplex over a 3-point simplex plus a window row, warm-started
        // from a feasible vertex
        let prob = LpBuilder::new(3)
            .objective(vec![3.0, 1.0, 2.0])
            .eq(vec![(0, 1.0), (1, 1.0), (2, 1.0)], 1.0)
            .le(vec![(0, 2.0), (1, 1.0), (2, 4.0)], 2.5)
            .build();
        let cold = solve_lp(&prob).unwrap();
        // basis: structural var 0 + the slack (index n_vars + 0 = 3)
        let warm = solve_lp_with_basis(&prob, Some(&[0, 3])).unwrap();
        assert_eq!(cold.status, LpStatus::Optimal);
        assert!((cold.objective - warm.objective).abs() < 1e-9);
        assert!((cold.objective - 1.0).abs() < 1e-9);
    }
}
