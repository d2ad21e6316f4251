//! Discrete p-energy `sum_e c_e |u_i - u_j|^p` and its constrained
//! minimization under Dirichlet data and point charges.
//!
//! The minimizer of `energy(u)/p - sum_i q_i u_i` over fields matching the
//! fixed values is characterized by the stationarity condition
//! `sum_j c_ij phi_p(u_j - u_i) + q_i = 0` at every free vertex, with
//! `phi_p(t) = |t|^(p-2) t`. The energy is not twice differentiable at zero
//! differences (p < 2) and its Hessian degenerates there (p > 2), so the
//! solver runs damped Newton on the smoothed energy
//! `sum_e c_e (|u_i - u_j|^2 + eps^2)^(p/2)`, shrinking `eps` tenfold per
//! stage, and finishes with a Newton polish at `eps = 0`.

use std::collections::BTreeMap;
use std::io::Write;

use log::debug;

use crate::error::{Error, Result};
use crate::linalg::Skyline;
use crate::space::{VertexSet, WeightedGraphSpace};

/// `|t|^(p-2) t`, with `phi_p(0) = 0`.
#[inline]
pub fn phi_p(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.abs().powf(p - 1.0).copysign(t)
    }
}

pub fn energy(space: &WeightedGraphSpace, u: &[f64]) -> f64 {
    let p = space.p();
    space
        .edges()
        .iter()
        .map(|e| e.conductance * (u[e.i] - u[e.j]).abs().powf(p))
        .sum()
}

/// Energy restricted to edges with both endpoints in `region`.
pub fn local_energy(space: &WeightedGraphSpace, u: &[f64], region: &VertexSet) -> f64 {
    let p = space.p();
    let inside = region.mask(space.vertex_count());
    space
        .edges()
        .iter()
        .filter(|e| inside[e.i] && inside[e.j])
        .map(|e| e.conductance * (u[e.i] - u[e.j]).abs().powf(p))
        .sum()
}

/// `|u_i - u_j| / l_ij` per edge, in edge order.
pub fn edge_gradients(space: &WeightedGraphSpace, u: &[f64]) -> Vec<f64> {
    space.edges().iter().map(|e| (u[e.i] - u[e.j]).abs() / e.length).collect()
}

/// Net flux `sum_j c_ij phi_p(u_i - u_j)` out of every vertex.
pub fn flux(space: &WeightedGraphSpace, u: &[f64]) -> Vec<f64> {
    let p = space.p();
    let mut out = vec![0.0; space.vertex_count()];
    for e in space.edges() {
        let f = e.conductance * phi_p(u[e.i] - u[e.j], p);
        out[e.i] += f;
        out[e.j] -= f;
    }
    out
}

/// `max_{i in free} |sum_j c_ij phi_p(u_j - u_i) + q_i|`.
pub fn kkt_residual(space: &WeightedGraphSpace, u: &[f64], free: &VertexSet, charges: &BTreeMap<usize, f64>) -> f64 {
    let out = flux(space, u);
    free.iter()
        .map(|i| (charges.get(&i).copied().unwrap_or(0.0) - out[i]).abs())
        .fold(0.0, f64::max)
}

/// `sum_e c_e phi_p(u_i - u_j) (test_i - test_j)`: the discrete weak form.
pub fn weak_form(space: &WeightedGraphSpace, u: &[f64], test: &[f64]) -> f64 {
    let p = space.p();
    space
        .edges()
        .iter()
        .map(|e| e.conductance * phi_p(u[e.i] - u[e.j], p) * (test[e.i] - test[e.j]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Absolute bound on the stationarity residual. For `p < 2` the bound
    /// actually used is never below the residual change caused by one
    /// rounding step of the field.
    pub tolerance: f64,
    /// Newton iterations allowed per continuation stage.
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 500 }
    }
}

/// Dirichlet data plus point charges. A fixed vertex ignores its charge.
#[derive(Debug, Clone, Default)]
pub struct SolveSpec {
    pub fixed: BTreeMap<usize, f64>,
    pub charges: BTreeMap<usize, f64>,
    pub settings: SolverSettings,
    /// Starting values for free vertices; a linear (p = 2) solve otherwise.
    pub initial: Option<Vec<f64>>,
}

impl SolveSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fix(mut self, v: usize, value: f64) -> Self {
        self.fixed.insert(v, value);
        self
    }

    pub fn fix_set(mut self, set: &VertexSet, value: f64) -> Self {
        for v in set.iter() {
            self.fixed.insert(v, value);
        }
        self
    }

    pub fn charge(mut self, v: usize, q: f64) -> Self {
        *self.charges.entry(v).or_insert(0.0) += q;
        self
    }

    pub fn settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn initial(mut self, values: Vec<f64>) -> Self {
        self.initial = Some(values);
        self
    }

    /// Charges on free vertices only.
    pub fn active_charges(&self) -> BTreeMap<usize, f64> {
        self.charges
            .iter()
            .filter(|(v, _)| !self.fixed.contains_key(v))
            .map(|(&v, &q)| (v, q))
            .collect()
    }
}

/// One continuation stage of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageLog {
    pub stage: usize,
    pub epsilon: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub values: Vec<f64>,
    pub energy: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub log: Vec<StageLog>,
}

impl PotentialField {
    /// Wraps values that did not come out of a solve.
    pub fn from_values(space: &WeightedGraphSpace, values: Vec<f64>) -> Self {
        let energy = energy(space, &values);
        Self { values, energy, kkt_residual: 0.0, iterations: 0, log: Vec::new() }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with header `index,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{k},{v:e}")?;
        }
        Ok(())
    }

    /// Solver log with header `stage,epsilon,iter,residual`.
    pub fn write_log_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "stage,epsilon,iter,residual")?;
        for s in &self.log {
            writeln!(out, "{},{:e},{},{:e}", s.stage, s.epsilon, s.iterations, s.residual)?;
        }
        Ok(())
    }
}

/// Minimizes `energy/p - sum charges * u` subject to the fixed values.
pub fn solve(space: &WeightedGraphSpace, spec: &SolveSpec) -> Result<PotentialField> {
    let n = space.vertex_count();
    let settings = spec.settings;
    if !(settings.tolerance > 0.0) || settings.max_iterations == 0 {
        return Err(Error::InvalidArgument("tolerance and max_iterations must be positive".into()));
    }
    for (&v, &x) in spec.fixed.iter().chain(spec.charges.iter()) {
        space.check_vertex(v)?;
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite data {x} at vertex {v}")));
        }
    }

    let mut u = vec![0.0; n];
    let mut local = vec![usize::MAX; n];
    let mut free = Vec::new();
    for v in 0..n {
        match spec.fixed.get(&v) {
            Some(&x) => u[v] = x,
            None => {
                local[v] = free.len();
                free.push(v);
            }
        }
    }
    if free.is_empty() {
        let field = PotentialField::from_values(space, u);
        return Ok(field);
    }
    check_coercive(space, &free, &local)?;

    let charges: Vec<f64> = free.iter().map(|v| spec.charges.get(v).copied().unwrap_or(0.0)).collect();
    let mut newton = Newton::new(space, free, local, charges, settings);

    match &spec.initial {
        Some(init) => {
            if init.len() != n {
                return Err(Error::InvalidArgument("initial field has wrong length".into()));
            }
            for &v in &newton.free {
                u[v] = init[v];
            }
        }
        None => newton.linear_guess(&mut u)?,
    }

    let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        // zero data and no charges: the zero field is optimal
        let mut field = PotentialField::from_values(space, u);
        field.log.push(StageLog { stage: 0, epsilon: 0.0, iterations: 0, residual: 0.0 });
        return Ok(field);
    }

    let p = space.p();
    let tolerance = settings.tolerance.max(rounding_floor(space, p, scale));
    newton.settings.tolerance = tolerance;
    let mut log = Vec::new();
    let mut total = 0;
    if p != 2.0 {
        let mut eps = 1e-2 * scale;
        while eps >= 1e-9 * scale {
            let (iters, res) = newton.run(&mut u, eps, scale, false)?;
            total += iters;
            debug!("stage={},epsilon={eps:e},iter={iters},residual={res:e}", log.len());
            log.push(StageLog { stage: log.len(), epsilon: eps, iterations: iters, residual: res });
            eps /= 10.0;
        }
    }
    let (iters, res) = newton.run(&mut u, 0.0, scale, true)?;
    total += iters;
    debug!("stage={},epsilon=0,iter={iters},residual={res:e}", log.len());
    log.push(StageLog { stage: log.len(), epsilon: 0.0, iterations: iters, residual: res });

    let free_set = VertexSet::from_sorted_unchecked(newton.free.clone());
    let residual = kkt_residual(space, &u, &free_set, &spec.active_charges());
    if !(residual <= tolerance) {
        return Err(Error::NonConvergence { residual, iterations: total });
    }
    Ok(PotentialField { energy: energy(space, &u), values: u, kkt_residual: residual, iterations: total, log })
}

fn check_coercive(space: &WeightedGraphSpace, free: &[usize], local: &[usize]) -> Result<()> {
    let mut seen = vec![false; space.vertex_count()];
    for &start in free {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut anchored = false;
        while let Some(v) = stack.pop() {
            for &(w, _) in space.neighbors(v) {
                if local[w] == usize::MAX {
                    anchored = true;
                } else if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if !anchored {
            return Err(Error::Unbounded { vertex: start });
        }
    }
    Ok(())
}

/// Damped Newton on the smoothed energy over the free vertices.
struct Newton<'a> {
    space: &'a WeightedGraphSpace,
    free: Vec<usize>,
    local: Vec<usize>,
    charges: Vec<f64>,
    /// Edges with at least one free endpoint.
    active: Vec<usize>,
    matrix: Skyline,
    settings: SolverSettings,
}

impl<'a> Newton<'a> {
    fn new(
        space: &'a WeightedGraphSpace,
        free: Vec<usize>,
        local: Vec<usize>,
        charges: Vec<f64>,
        settings: SolverSettings,
    ) -> Self {
        let mut active = Vec::new();
        let mut pairs = Vec::new();
        for (k, e) in space.edges().iter().enumerate() {
            let (a, b) = (local[e.i], local[e.j]);
            if a != usize::MAX || b != usize::MAX {
                active.push(k);
            }
            if a != usize::MAX && b != usize::MAX {
                pairs.push((a, b));
            }
        }
        let matrix = Skyline::new(free.len(), &pairs);
        Self { space, free, local, charges, active, matrix, settings }
    }

    /// Solves the p = 2 problem with the same data as a starting point.
    fn linear_guess(&mut self, u: &mut [f64]) -> Result<()> {
        let mut rhs = self.charges.clone();
        self.matrix.clear();
        for &k in &self.active {
            let e = self.space.edges()[k];
            let (a, b) = (self.local[e.i], self.local[e.j]);
            let c = e.conductance;
            match (a != usize::MAX, b != usize::MAX) {
                (true, true) => {
                    self.matrix.add_diagonal(a, c);
                    self.matrix.add_diagonal(b, c);
                    self.matrix.add_coupling(a, b, -c);
                }
                (true, false) => {
                    self.matrix.add_diagonal(a, c);
                    rhs[a] += c * u[e.j];
                }
                (false, true) => {
                    self.matrix.add_diagonal(b, c);
                    rhs[b] += c * u[e.i];
                }
                (false, false) => unreachable!(),
            }
        }
        self.matrix
            .factor()
            .map_err(|_| Error::InvalidArgument("singular linear system".into()))?;
        let x = self.matrix.solve(&rhs);
        for (k, &v) in self.free.iter().enumerate() {
            u[v] = x[k];
        }
        Ok(())
    }

    /// Change of the smoothed objective `sum c (d^2 + eps^2)^(p/2) / p - q.u`
    /// along `step` (indexed by vertex, zero on fixed vertices). Each edge
    /// term is evaluated from its own increment, so tiny steps are not lost
    /// to cancellation against the size of the objective.
    fn objective_change(&self, u: &[f64], step: &[f64], eps: f64) -> f64 {
        let p = self.space.p();
        let eps2 = eps * eps;
        let edges = self.space.edges();
        let mut change = 0.0;
        for &k in &self.active {
            let e = &edges[k];
            let d = u[e.i] - u[e.j];
            let delta = step[e.i] - step[e.j];
            change += e.conductance * smoothed_pow_change(d, delta, eps2, p) / p;
        }
        for (&v, q) in self.free.iter().zip(&self.charges) {
            change -= q * step[v];
        }
        change
    }

    /// Gradient of the smoothed objective over free vertices and its max-norm.
    fn gradient(&self, u: &[f64], eps: f64) -> (Vec<f64>, f64) {
        let p = self.space.p();
        let eps2 = eps * eps;
        let mut g: Vec<f64> = self.charges.iter().map(|q| -q).collect();
        for &k in &self.active {
            let e = &self.space.edges()[k];
            let d = u[e.i] - u[e.j];
            let f = e.conductance * smoothed_phi(d, eps2, p);
            let (a, b) = (self.local[e.i], self.local[e.j]);
            if a != usize::MAX {
                g[a] += f;
            }
            if b != usize::MAX {
                g[b] -= f;
            }
        }
        let norm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        (g, norm)
    }

    fn assemble_hessian(&mut self, u: &[f64], eps: f64, scale: f64) {
        let p = self.space.p();
        let eps2 = eps * eps;
        let floor = 1e-10 * scale;
        self.matrix.clear();
        for &k in &self.active {
            let e = self.space.edges()[k];
            let d = u[e.i] - u[e.j];
            let w = e.conductance * smoothed_curvature(d, eps2, p, floor);
            let (a, b) = (self.local[e.i], self.local[e.j]);
            if a != usize::MAX {
                self.matrix.add_diagonal(a, w);
            }
            if b != usize::MAX {
                self.matrix.add_diagonal(b, w);
            }
            if a != usize::MAX && b != usize::MAX {
                self.matrix.add_coupling(a, b, -w);
            }
        }
    }

    fn newton_direction(&mut self, u: &[f64], g: &[f64], eps: f64, scale: f64) -> Result<Vec<f64>> {
        self.assemble_hessian(u, eps, scale);
        let mut shift = 1e-14 * self.matrix.max_diagonal().max(f64::MIN_POSITIVE);
        loop {
            let mut trial = self.matrix.clone();
            for a in 0..self.free.len() {
                trial.add_diagonal(a, shift);
            }
            if trial.factor().is_ok() {
                let mut d = trial.solve(g);
                d.iter_mut().for_each(|x| *x = -*x);
                return Ok(d);
            }
            shift *= 100.0;
            if !shift.is_finite() {
                return Err(Error::NonConvergence { residual: f64::NAN, iterations: 0 });
            }
        }
    }

    /// Runs Newton at fixed `eps`; returns (iterations, final gradient norm).
    fn run(&mut self, u: &mut [f64], eps: f64, scale: f64, polish: bool) -> Result<(usize, f64)> {
        let tol = self.settings.tolerance;
        let step_target = if polish { 1e-13 * scale } else { 1e-8 * scale };
        let (mut g, mut res) = self.gradient(u, eps);
        let mut stalled = 0;
        for iter in 0..self.settings.max_iterations {
            if res == 0.0 || (!polish && res <= tol) {
                return Ok((iter, res));
            }
            let d = self.newton_direction(u, &g, eps, scale)?;
            let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            let mut t = 1.0;
            let mut trial = u.to_vec();
            let mut step = vec![0.0; u.len()];
            let accepted = loop {
                for (k, &v) in self.free.iter().enumerate() {
                    step[v] = t * d[k];
                    trial[v] = u[v] + step[v];
                }
                let change = self.objective_change(u, &step, eps);
                if change <= 1e-4 * t * slope {
                    break true;
                }
                if change <= 0.0 {
                    // decrease too small for the Armijo test to resolve: use the residual
                    let (_, r1) = self.gradient(&trial, eps);
                    if r1 < res {
                        break true;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    break false;
                }
            };
            if !accepted {
                // no further progress possible at this precision
                return Ok((iter, res));
            }
            let step = t * d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            u.copy_from_slice(&trial);
            let previous = res;
            (g, res) = self.gradient(u, eps);
            if step <= step_target && (res <= tol || !polish) {
                return Ok((iter + 1, res));
            }
            if polish && res <= tol {
                stalled = if res > 0.5 * previous { stalled + 1 } else { 0 };
                if stalled >= 3 {
                    return Ok((iter + 1, res));
                }
            }
        }
        if polish && res > tol {
            return Err(Error::NonConvergence { residual: res, iterations: self.settings.max_iterations });
        }
        Ok((self.settings.max_iterations, res))
    }
}

/// Residual uncertainty caused by rounding a field of size `scale`: every
/// edge difference carries up to two ulps, and for `p < 2` the flux is only
/// Hölder in the differences, which on fine graphs exceeds small absolute
/// tolerances.
fn rounding_floor(space: &WeightedGraphSpace, p: f64, scale: f64) -> f64 {
    if p >= 2.0 {
        return 0.0;
    }
    let mut load = vec![0.0f64; space.vertex_count()];
    for e in space.edges() {
        load[e.i] += e.conductance;
        load[e.j] += e.conductance;
    }
    let heaviest = load.into_iter().fold(0.0, f64::max);
    heaviest * (2.0 * f64::EPSILON * scale).powf(p - 1.0)
}

#[inline]
fn smoothed_pow(d: f64, eps2: f64, p: f64) -> f64 {
    if eps2 == 0.0 {
        d.abs().powf(p)
    } else {
        (d * d + eps2).powf(0.5 * p)
    }
}

/// `((d + delta)^2 + eps2)^(p/2) - (d^2 + eps2)^(p/2)` without cancellation.
fn smoothed_pow_change(d: f64, delta: f64, eps2: f64, p: f64) -> f64 {
    let s0 = d * d + eps2;
    if s0 == 0.0 {
        return delta.abs().powf(p);
    }
    let ds = delta * (2.0 * d + delta);
    let ratio = ds / s0;
    if ratio > -1.0 {
        s0.powf(0.5 * p) * (0.5 * p * ratio.ln_1p()).exp_m1()
    } else {
        smoothed_pow(d + delta, eps2, p) - smoothed_pow(d, eps2, p)
    }
}

#[inline]
fn smoothed_phi(d: f64, eps2: f64, p: f64) -> f64 {
    if eps2 == 0.0 {
        phi_p(d, p)
    } else {
        (d * d + eps2).powf(0.5 * p - 1.0) * d
    }
}

#[inline]
fn smoothed_curvature(d: f64, eps2: f64, p: f64, floor: f64) -> f64 {
    if eps2 == 0.0 {
        let a = d.abs();
        if p < 2.0 {
            (p - 1.0) * a.max(floor).powf(p - 2.0)
        } else {
            (p - 1.0) * a.powf(p - 2.0)
        }
    } else {
        let s = d * d + eps2;
        s.powf(0.5 * p - 2.0) * ((p - 1.0) * d * d + eps2)
    }
}
