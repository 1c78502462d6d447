//! Cutting-plane training of the 1-slack structural objective
//!
//! ```text
//! min ½‖w‖² + C·ξ   s.t.  wᵀδΨₖ ≥ Δₖ − ξ  for every constraint k in the working set
//! ```
//!
//! and its restricted dual, solved by an active-set method polished with
//! pairwise coordinate ascent.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::inference::{most_violated, ConstraintRecord};
use crate::measures::{contingency, Measure};

/// Constraints whose multiplier stays at zero this many outer iterations in a
/// row are dropped from the working set.
pub const PRUNE_AFTER: usize = 50;

/// Budgets per working-set constraint for one restricted solve.
const ACTIVE_SET_CHANGES_PER_CONSTRAINT: usize = 4;
const PAIRWISE_STEPS_PER_CONSTRAINT: usize = 20;

/// Pairwise steps after an active-set solve that ended optimal. The face
/// solves carry a tiny ridge, so a few steps remove its bias.
const POLISH_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Trade-off between margin and training loss.
    pub c: f64,
    /// Stopping tolerance on the 0–100 loss scale.
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon: 0.1,
            max_iterations: 5000,
        }
    }
}

impl Hyperparams {
    pub fn with_c(c: f64) -> Self {
        Self { c, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Parameter(format!("C must be positive, got {}", self.c)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Parameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Active constraints, their dual multipliers and the cached Gram matrix
/// `H(k, l) = δΨₖᵀ δΨₗ`.
#[derive(Debug, Clone, Default)]
pub struct WorkingSet {
    constraints: Vec<ConstraintRecord>,
    alphas: Vec<f64>,
    gram: Vec<Vec<f64>>,
    idle: Vec<usize>,
}

impl WorkingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraints(&self) -> &[ConstraintRecord] {
        &self.constraints
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Adds a constraint with multiplier zero, extending the Gram matrix by
    /// one row and column.
    pub fn push(&mut self, record: ConstraintRecord) {
        let row: Vec<f64> = self
            .constraints
            .iter()
            .map(|c| c.feature_delta.dot(&record.feature_delta))
            .chain(std::iter::once(record.feature_delta.norm_sq()))
            .collect();
        for (existing, &h) in self.gram.iter_mut().zip(&row) {
            existing.push(h);
        }
        self.gram.push(row);
        self.constraints.push(record);
        self.alphas.push(0.0);
        self.idle.push(0);
    }

    /// `Σ αₖ δΨₖ` as a dense vector of length `dimension`.
    pub fn weights(&self, dimension: usize) -> Vec<f64> {
        let mut w = vec![0.0; dimension];
        for (c, &a) in self.constraints.iter().zip(&self.alphas) {
            if a != 0.0 {
                c.feature_delta.add_scaled_to(&mut w, a);
            }
        }
        w
    }

    fn h_alpha(&self) -> Vec<f64> {
        self.gram
            .iter()
            .map(|row| row.iter().zip(&self.alphas).map(|(h, a)| h * a).sum())
            .collect()
    }

    /// `Σ αₖ Δₖ − ½ αᵀHα`.
    pub fn dual_objective(&self) -> f64 {
        self.h_alpha()
            .iter()
            .zip(&self.alphas)
            .zip(&self.constraints)
            .map(|((ha, a), c)| a * (c.loss - 0.5 * ha))
            .sum()
    }

    fn record_idle(&mut self) {
        for (idle, &a) in self.idle.iter_mut().zip(&self.alphas) {
            *idle = if a == 0.0 { *idle + 1 } else { 0 };
        }
    }

    fn prune(&mut self, after: usize) {
        let keep: Vec<bool> = self.idle.iter().map(|&i| i < after).collect();
        if keep.iter().all(|&k| k) {
            return;
        }
        retain_by(&mut self.constraints, &keep);
        retain_by(&mut self.alphas, &keep);
        retain_by(&mut self.idle, &keep);
        retain_by(&mut self.gram, &keep);
        for row in &mut self.gram {
            retain_by(row, &keep);
        }
    }
}

fn retain_by<T>(v: &mut Vec<T>, keep: &[bool]) {
    let mut it = keep.iter();
    v.retain(|_| *it.next().unwrap());
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub alphas: Vec<f64>,
    pub w: Vec<f64>,
    pub xi: f64,
    pub dual_objective: f64,
    /// Face solves plus pairwise steps taken.
    pub steps: usize,
    /// Whether the optimality gap reached `1e-6·C` within the step budgets.
    pub solved: bool,
}

/// Maximizes `−½αᵀHα + Σ αₖΔₖ` subject to `α ≥ 0`, `Σα ≤ C`, warm-started
/// from the multipliers already in `working_set`.
///
/// The inequality is handled with an extra slack coordinate (zero gradient,
/// zero curvature) that absorbs `C − Σα`, which turns the feasible set into a
/// simplex. An active-set phase first solves the problem restricted to the
/// current support exactly, adding the coordinate with the largest gradient
/// and dropping coordinates that reach zero. Pairwise coordinate ascent then
/// polishes the result: each step moves mass onto the coordinate with the
/// highest gradient from the active partner with the best second-order gain,
/// until the largest gradient gap between a growable and a shrinkable
/// coordinate is at most `1e-6·C` or the step budget runs out.
pub fn solve_restricted_qp(working_set: &mut WorkingSet, c: f64, dimension: usize) -> QpSolution {
    let k = working_set.len();
    let mut steps = 0;
    let mut solved = true;
    if k > 0 {
        let total: f64 = working_set.alphas.iter().sum();
        if total > c {
            // C changed between solves; rescale onto the feasible set
            let f = c / total;
            working_set.alphas.iter_mut().for_each(|a| *a *= f);
        }
        let before = working_set.alphas.clone();
        let start = working_set.dual_objective();
        let (changes, optimal) = active_set(working_set, c, ACTIVE_SET_CHANGES_PER_CONSTRAINT * k + 50);
        steps += changes;
        let kept = working_set.dual_objective() >= start;
        if !kept {
            // rounding in a near-singular face solve; fall back on pure ascent
            working_set.alphas = before;
        }
        let budget = if kept && optimal {
            POLISH_STEPS
        } else {
            PAIRWISE_STEPS_PER_CONSTRAINT * k + 100
        };
        let (pair_steps, ok) = pairwise_ascent(working_set, c, budget);
        steps += pair_steps;
        solved = ok || (kept && optimal);
    }
    let w = working_set.weights(dimension);
    let xi = working_set
        .constraints
        .iter()
        .map(|r| r.violation(&w))
        .fold(0.0f64, f64::max);
    QpSolution {
        alphas: working_set.alphas.clone(),
        w,
        xi,
        dual_objective: working_set.dual_objective(),
        steps,
        solved,
    }
}

/// Pairwise coordinate ascent alone, up to `max_steps` steps.
pub fn solve_restricted_qp_pairwise(
    working_set: &mut WorkingSet,
    c: f64,
    dimension: usize,
    max_steps: usize,
) -> QpSolution {
    let total: f64 = working_set.alphas.iter().sum();
    if total > c {
        let f = c / total;
        working_set.alphas.iter_mut().for_each(|a| *a *= f);
    }
    let (steps, solved) = pairwise_ascent(working_set, c, max_steps);
    let w = working_set.weights(dimension);
    let xi = working_set
        .constraints
        .iter()
        .map(|r| r.violation(&w))
        .fold(0.0f64, f64::max);
    QpSolution {
        alphas: working_set.alphas.clone(),
        w,
        xi,
        dual_objective: working_set.dual_objective(),
        steps,
        solved,
    }
}

const SLACK: usize = usize::MAX;

/// Returns the number of steps taken and whether the tolerance was met.
fn pairwise_ascent(working_set: &mut WorkingSet, c: f64, max_steps: usize) -> (usize, bool) {
    let tol = 1e-6 * c;
    let gram = &working_set.gram;
    let alphas = &mut working_set.alphas;
    let mut slack = (c - alphas.iter().sum::<f64>()).max(0.0);
    // gradient of the dual objective, Δₖ − (Hα)ₖ
    let mut grad: Vec<f64> = gram
        .iter()
        .zip(&working_set.constraints)
        .map(|(row, rec)| rec.loss - row.iter().zip(alphas.iter()).map(|(h, a)| h * a).sum::<f64>())
        .collect();
    let h = |a: usize, b: usize| if a == SLACK || b == SLACK { 0.0 } else { gram[a][b] };
    let mut steps = 0;
    while steps < max_steps {
        // coordinate to grow: highest gradient (slack has gradient 0)
        let mut up = (SLACK, 0.0);
        // lowest gradient among coordinates that can shrink
        let mut lowest = if slack > 0.0 { 0.0 } else { f64::INFINITY };
        for (i, (&g, &a)) in grad.iter().zip(alphas.iter()).enumerate() {
            if g > up.1 {
                up = (i, g);
            }
            if a > 0.0 && g < lowest {
                lowest = g;
            }
        }
        if !(up.1 - lowest > tol) {
            return (steps, true);
        }
        // partner to shrink: largest second-order gain (g_up − g_j)² / curvature
        let i = up.0;
        let gain = |j: usize, g: f64| {
            let d = up.1 - g;
            let curvature = h(i, i) + h(j, j) - 2.0 * h(i, j);
            d * d / curvature.max(1e-12)
        };
        let mut down = (SLACK, f64::NEG_INFINITY);
        if slack > 0.0 && i != SLACK {
            down = (SLACK, gain(SLACK, 0.0));
        }
        for (j, (&g, &a)) in grad.iter().zip(alphas.iter()).enumerate() {
            if a > 0.0 && g < up.1 && j != i {
                let v = gain(j, g);
                if v > down.1 {
                    down = (j, v);
                }
            }
        }
        if down.1 == f64::NEG_INFINITY {
            return (steps, true);
        }
        let j = down.0;
        let gap = up.1 - if j == SLACK { 0.0 } else { grad[j] };
        let curvature = h(i, i) + h(j, j) - 2.0 * h(i, j);
        let available = if j == SLACK { slack } else { alphas[j] };
        let step = if curvature > 0.0 {
            (gap / curvature).min(available)
        } else {
            available
        };
        if step <= 0.0 {
            return (steps, true);
        }
        if i == SLACK {
            slack += step;
        } else {
            alphas[i] += step;
        }
        if j == SLACK {
            slack = if step == available { 0.0 } else { slack - step };
        } else {
            alphas[j] = if step == available { 0.0 } else { alphas[j] - step };
        }
        // H is symmetric, so rows i and j give the columns needed here
        match (i == SLACK, j == SLACK) {
            (false, false) => {
                for ((g, hi), hj) in grad.iter_mut().zip(&gram[i]).zip(&gram[j]) {
                    *g -= step * (hi - hj);
                }
            }
            (false, true) => {
                for (g, hi) in grad.iter_mut().zip(&gram[i]) {
                    *g -= step * hi;
                }
            }
            (true, false) => {
                for (g, hj) in grad.iter_mut().zip(&gram[j]) {
                    *g += step * hj;
                }
            }
            (true, true) => unreachable!(),
        }
        steps += 1;
    }
    (steps, false)
}

/// Primal active-set method on the simplex `{z ≥ 0, Σz = C}` where `z` is
/// `α` followed by the slack. Returns the number of face solves and whether
/// pricing certified optimality (up to the ridge).
fn active_set(working_set: &mut WorkingSet, c: f64, max_changes: usize) -> (usize, bool) {
    let k = working_set.len();
    let gram = &working_set.gram;
    let losses: Vec<f64> = working_set.constraints.iter().map(|r| r.loss).collect();
    let h = |a: usize, b: usize| if a == k || b == k { 0.0 } else { gram[a][b] };
    let loss = |a: usize| if a == k { 0.0 } else { losses[a] };
    // a tiny ridge keeps face systems solvable when H is rank deficient
    let ridge = 1e-12 * (0..k).map(|i| gram[i][i]).fold(1.0, f64::max);
    let tol = 1e-6 * c;

    let mut z: Vec<f64> = working_set.alphas.clone();
    z.push((c - z.iter().sum::<f64>()).max(0.0));
    let mut face: Vec<usize> = (0..=k).filter(|&j| z[j] > 0.0).collect();
    if face.is_empty() {
        face.push(k);
        z[k] = c;
    }
    let mut chol = Cholesky::default();
    for (pos, &j) in face.iter().enumerate() {
        let row: Vec<f64> = face[..pos].iter().map(|&b| h(j, b)).collect();
        chol.push(&row, h(j, j) + ridge, ridge);
    }
    let mut changes = 0;
    let mut just_added = None;
    while changes < max_changes {
        // move to the minimizer on the current face, dropping blockers
        loop {
            changes += 1;
            let Some(target) = chol.solve_on_face(face.iter().map(|&j| loss(j)).collect(), c) else {
                write_back(working_set, &z, c);
                return (changes, false);
            };
            let mut t = 1.0f64;
            let mut blocker = None;
            for (a, &j) in face.iter().enumerate() {
                if target[a] < 0.0 {
                    let r = z[j] / (z[j] - target[a]);
                    if r < t {
                        t = r;
                        blocker = Some(a);
                    }
                }
            }
            for (a, &j) in face.iter().enumerate() {
                z[j] = (z[j] + t * (target[a] - z[j])).max(0.0);
            }
            let Some(b) = blocker else { break };
            if t == 0.0 && just_added == Some(face[b]) {
                // the entering coordinate cannot grow: numerically optimal
                write_back(working_set, &z, c);
                return (changes, true);
            }
            z[face[b]] = 0.0;
            face.remove(b);
            chol.remove(b);
            if face.is_empty() || changes >= max_changes {
                write_back(working_set, &z, c);
                return (changes, false);
            }
        }
        // price the coordinates outside the face
        let weighted: Vec<(usize, f64)> = face.iter().filter(|&&b| b < k).map(|&b| (b, z[b])).collect();
        let grad = |j: usize| {
            if j == k {
                return 0.0;
            }
            let row = &gram[j];
            losses[j] - weighted.iter().map(|&(b, v)| row[b] * v).sum::<f64>()
        };
        let mut in_face = vec![false; k + 1];
        face.iter().for_each(|&j| in_face[j] = true);
        let lowest = face.iter().map(|&j| grad(j)).fold(f64::INFINITY, f64::min);
        let mut best = None;
        let mut best_grad = lowest + tol;
        for (j, _) in in_face.iter().enumerate().filter(|(_, &inside)| !inside) {
            let g = grad(j);
            if g > best_grad {
                best_grad = g;
                best = Some(j);
            }
        }
        let Some(j) = best else {
            write_back(working_set, &z, c);
            return (changes, true);
        };
        let row: Vec<f64> = face.iter().map(|&b| h(j, b)).collect();
        chol.push(&row, h(j, j) + ridge, ridge);
        face.push(j);
        just_added = Some(j);
    }
    write_back(working_set, &z, c);
    (changes, false)
}

/// Lower Cholesky factor of a face Gram matrix, updated one row at a time.
#[derive(Default)]
struct Cholesky {
    /// Row `i` holds `L[i][0..=i]`.
    rows: Vec<Vec<f64>>,
}

impl Cholesky {
    /// Appends a row/column with off-diagonal entries `cross` and diagonal
    /// `diag`. Pivots are floored at `floor` to survive rank deficiency.
    fn push(&mut self, cross: &[f64], diag: f64, floor: f64) {
        let mut row = self.forward(cross);
        let sq = diag - row.iter().map(|v| v * v).sum::<f64>();
        row.push(sq.max(floor).sqrt());
        self.rows.push(row);
    }

    /// Deletes row/column `pos`, folding its column into the trailing block
    /// with a rank-one update.
    fn remove(&mut self, pos: usize) {
        let mut v: Vec<f64> = self.rows[pos + 1..].iter().map(|r| r[pos]).collect();
        self.rows.remove(pos);
        for row in &mut self.rows[pos..] {
            row.remove(pos);
        }
        let m = v.len();
        for t in 0..m {
            let i = pos + t;
            let d = self.rows[i][i];
            let r = d.hypot(v[t]);
            let (cos, sin) = (r / d, v[t] / d);
            self.rows[i][i] = r;
            for u in t + 1..m {
                let l = &mut self.rows[pos + u][i];
                *l = (*l + sin * v[u]) / cos;
                v[u] = cos * v[u] - sin * *l;
            }
        }
    }

    /// Solves `L y = b`.
    fn forward(&self, b: &[f64]) -> Vec<f64> {
        let mut y = Vec::with_capacity(b.len());
        for (i, row) in self.rows.iter().enumerate().take(b.len()) {
            let s: f64 = row[..i].iter().zip(&y).map(|(l, v)| l * v).sum();
            y.push((b[i] - s) / row[i]);
        }
        y
    }

    /// Solves `L Lᵀ x = b` in place for each right-hand side.
    fn solve_many(&self, rhs: &mut [Vec<f64>]) {
        for b in rhs.iter_mut() {
            for (i, row) in self.rows.iter().enumerate() {
                let s: f64 = row[..i].iter().zip(&b[..i]).map(|(l, v)| l * v).sum();
                b[i] = (b[i] - s) / row[i];
            }
            // back substitution by rows of L, i.e. columns of Lᵀ
            for (i, row) in self.rows.iter().enumerate().rev() {
                b[i] /= row[i];
                let v = b[i];
                for (x, l) in b[..i].iter_mut().zip(&row[..i]) {
                    *x -= l * v;
                }
            }
        }
    }

    /// Minimizer of `½zᵀAz − lᵀz` subject to `Σz = c`, where `A = L Lᵀ`.
    fn solve_on_face(&self, l: Vec<f64>, c: f64) -> Option<Vec<f64>> {
        let n = l.len();
        let mut rhs = [l, vec![1.0; n]];
        self.solve_many(&mut rhs);
        let [x, y] = rhs;
        let denom: f64 = y.iter().sum();
        let nu = (x.iter().sum::<f64>() - c) / denom;
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - nu * b).collect();
        z.iter().all(|v| v.is_finite()).then_some(z)
    }
}

fn write_back(working_set: &mut WorkingSet, z: &[f64], c: f64) {
    let k = working_set.alphas.len();
    working_set.alphas.copy_from_slice(&z[..k]);
    // face solves can overshoot the budget by rounding when the slack
    // coordinate is on the face
    let total: f64 = working_set.alphas.iter().sum();
    if total > c {
        let f = c / total;
        working_set.alphas.iter_mut().for_each(|a| *a *= f);
    }
}

/// One outer iteration, as emitted to trace observers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub dual_objective: f64,
    pub xi: f64,
    pub violation: f64,
    pub inference_count: usize,
    pub working_set: usize,
    /// Whether the constraint found in this iteration was added.
    pub added: bool,
}

impl fmt::Display for IterationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iteration={} dual={:.9e} xi={:.9e} violation={:.9e} inference_count={} working_set={} added={}",
            self.iteration,
            self.dual_objective,
            self.xi,
            self.violation,
            self.inference_count,
            self.working_set,
            self.added
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub iterations: usize,
    pub inference_count: usize,
    pub final_violation: f64,
    pub dual_objective: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearModel {
    pub w: Vec<f64>,
    /// Slack at termination.
    pub xi: f64,
    pub measure: Measure,
    pub hyperparams: Hyperparams,
    pub stats: TrainStats,
    #[serde(skip)]
    pub working_set: WorkingSet,
}

impl LinearModel {
    pub fn decision(&self, x: &crate::sparse::SparseVector) -> f64 {
        x.dot_dense(&self.w)
    }

    pub fn scores(&self, data: &Dataset, exec: Execution) -> Vec<f64> {
        data.scores(&self.w, exec)
    }

    /// Primal objective `½‖w‖² + C·ξ`.
    pub fn primal_objective(&self) -> f64 {
        0.5 * self.w.iter().map(|v| v * v).sum::<f64>() + self.hyperparams.c * self.xi
    }
}

/// Trains on `data` for `measure` using the built-in inference routines.
pub fn cutting_plane_train(data: &Dataset, measure: Measure, hp: &Hyperparams, exec: Execution) -> Result<LinearModel> {
    cutting_plane_train_with(data, measure, hp, exec, |_| {})
}

/// [`cutting_plane_train`] with a per-iteration observer.
pub fn cutting_plane_train_with(
    data: &Dataset,
    measure: Measure,
    hp: &Hyperparams,
    exec: Execution,
    observe: impl FnMut(&IterationRecord),
) -> Result<LinearModel> {
    if data.len() < 2 {
        return Err(Error::Training(format!("need at least 2 examples, got {}", data.len())));
    }
    measure.check_defined(data.positives(), data.negatives())?;
    cutting_plane(
        data.dimension(),
        measure,
        hp,
        |w| most_violated(measure, w, data, exec),
        observe,
    )
}

/// The cutting-plane loop with a caller-supplied inference oracle.
///
/// Each iteration re-solves the restricted QP, asks `infer` for the most
/// violated constraint at the new `w`, and stops once that constraint is
/// violated by at most `ξ + ε`. Reaching `max_iterations` returns the current
/// model with `converged = false`.
pub fn cutting_plane(
    dimension: usize,
    measure: Measure,
    hp: &Hyperparams,
    mut infer: impl FnMut(&[f64]) -> Result<ConstraintRecord>,
    mut observe: impl FnMut(&IterationRecord),
) -> Result<LinearModel> {
    hp.validate()?;
    let mut ws = WorkingSet::new();
    let mut inference_count = 0;
    let mut iteration = 0;
    loop {
        iteration += 1;
        let qp = solve_restricted_qp(&mut ws, hp.c, dimension);
        let record = infer(&qp.w)?;
        inference_count += 1;
        let violation = record.violation(&qp.w);
        let converged = violation <= qp.xi + hp.epsilon;
        let stop = converged || iteration >= hp.max_iterations;
        observe(&IterationRecord {
            iteration,
            dual_objective: qp.dual_objective,
            xi: qp.xi,
            violation,
            inference_count,
            working_set: ws.len(),
            added: !stop,
        });
        if stop {
            return Ok(LinearModel {
                w: qp.w,
                xi: qp.xi,
                measure,
                hyperparams: *hp,
                stats: TrainStats {
                    iterations: iteration,
                    inference_count,
                    final_violation: violation,
                    dual_objective: qp.dual_objective,
                    converged,
                },
                working_set: ws,
            });
        }
        ws.record_idle();
        ws.prune(PRUNE_AFTER);
        ws.push(record);
    }
}

/// `max over admissible ȳ′ of F(ȳ′) − F(ȳ) + Δ(ȳ, ȳ′)`, a convex upper bound
/// on the training loss of `sign(wᵀx)`.
pub fn convex_upper_bound(w: &[f64], data: &Dataset, measure: Measure, exec: Execution) -> Result<f64> {
    Ok(most_violated(measure, w, data, exec)?.violation(w))
}

/// Training loss (0–100) of the predictions a score vector implies for the
/// measure: `sign` for contingency measures, the score ranking for AUC.
pub fn prediction_loss(measure: Measure, truth: &[Label], scores: &[f64]) -> Result<f64> {
    match measure {
        Measure::Prbep => {
            let p = truth.iter().filter(|l| l.is_pos()).count();
            let pred = crate::measures::prbep_predictions(scores, p);
            measure.loss(&contingency(truth, &pred)?)
        }
        Measure::Auc => Ok(100.0 * (1.0 - crate::measures::evaluate(measure, truth, scores)?)),
        _ => {
            let pred: Vec<Label> = scores.iter().map(|&s| Label::from_score(s)).collect();
            measure.loss(&contingency(truth, &pred)?)
        }
    }
}
