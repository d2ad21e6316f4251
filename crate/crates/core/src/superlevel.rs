//! Superlevel sets of potentials and the capacity identities they satisfy.
//!
//! For the capacitary potential `u` of `(E, A)` and levels `0 <= a < b <= 1`,
//! the band condenser `({u >= b}, {u > a})` (sets taken inside `A`) has
//! capacity `(b - a)^(1-p) cap(E, A)`; the rescaled truncation
//! `min(max((u - a)/(b - a), 0), 1)` is its potential. On a graph this is
//! exact when no edge jumps across a level, which is the case for monotone
//! potentials on paths at levels attained at vertices.

use std::io::Write;

use rayon::prelude::*;

use crate::capacity::{capacity_with, CapacityResult, Condenser};
use crate::error::{Error, Result};
use crate::penergy::SolverSettings;
use crate::space::{VertexSet, WeightedGraphSpace};

/// Values closer than `LEVEL_TIE * max |u|` count as the same level, so
/// that rounding twins from symmetric configurations do not split a level.
pub const LEVEL_TIE: f64 = 1e-12;

fn tie_width<I: Iterator<Item = f64>>(values: I) -> f64 {
    LEVEL_TIE * values.fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn above(x: f64, a: f64, strict: bool, tie: f64) -> bool {
    if strict {
        x > a + tie
    } else {
        x >= a - tie
    }
}

/// `{i : u_i >= a}`, or `{i : u_i > a}` when `strict`, up to the level tie.
pub fn superlevel_set(u: &[f64], a: f64, strict: bool) -> VertexSet {
    let tie = tie_width(u.iter().copied());
    u.iter()
        .enumerate()
        .filter(|(_, &x)| above(x, a, strict, tie))
        .map(|(k, _)| k)
        .collect()
}

/// Superlevel set restricted to `within`.
pub fn superlevel_within(u: &[f64], within: &VertexSet, a: f64, strict: bool) -> VertexSet {
    let tie = tie_width(within.iter().map(|v| u[v]));
    VertexSet::from_sorted_unchecked(within.iter().filter(|&v| above(u[v], a, strict, tie)).collect())
}

/// Sorted distinct values of `u` on `within`; values within the level tie
/// of the previous kept value are dropped.
pub fn achieved_levels(u: &[f64], within: &VertexSet) -> Vec<f64> {
    let tie = tie_width(within.iter().map(|v| u[v]));
    let mut values: Vec<f64> = within.iter().map(|v| u[v]).collect();
    values.sort_by(f64::total_cmp);
    let mut levels: Vec<f64> = Vec::new();
    for x in values {
        match levels.last() {
            Some(&last) if x - last <= tie => {}
            _ => levels.push(x),
        }
    }
    levels
}

/// Splits `u` into `u1 = min(u/a, 1)` and `u2 = (u - a u1)/(1 - a)`, so
/// that `u = a u1 + (1 - a) u2`.
pub fn split_potentials(u: &[f64], a: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidArgument(format!("split level {a} must lie in (0, 1)")));
    }
    let u1: Vec<f64> = u.iter().map(|x| (x / a).min(1.0)).collect();
    let u2 = u.iter().zip(&u1).map(|(x, y)| (x - a * y) / (1.0 - a)).collect();
    Ok((u1, u2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelReport {
    pub a: f64,
    pub b: f64,
    pub strict_b: bool,
    pub strict_a: bool,
    pub set_b_size: usize,
    pub set_a_size: usize,
    /// `cap(set_b, set_a)`.
    pub measured: f64,
    /// `(b - a)^(1-p) cap(E, A)`.
    pub predicted: f64,
    /// NaN when the report is degenerate.
    pub relative_error: f64,
    /// `set_b` came out empty.
    pub degenerate: bool,
}

impl LevelReport {
    pub fn csv_header() -> &'static str {
        "a,b,strict_b,strict_a,measured,predicted,rel_error"
    }

    pub fn write_csv_row<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{:e},{:e},{},{},{:e},{:e},{:e}",
            self.a, self.b, self.strict_b, self.strict_a, self.measured, self.predicted, self.relative_error
        )?;
        Ok(())
    }
}

/// Computes the capacitary potential of `condenser` and checks the band
/// identity at levels `(a, b)`.
pub fn verify_identity(
    space: &WeightedGraphSpace,
    condenser: &Condenser,
    a: f64,
    b: f64,
    strict_b: bool,
    strict_a: bool,
) -> Result<LevelReport> {
    let settings = SolverSettings::default();
    let base = capacity_with(space, condenser, settings)?;
    verify_identity_with(space, condenser, &base, a, b, strict_b, strict_a, settings)
}

/// As [`verify_identity`], reusing an already computed potential.
#[allow(clippy::too_many_arguments)]
pub fn verify_identity_with(
    space: &WeightedGraphSpace,
    condenser: &Condenser,
    base: &CapacityResult,
    a: f64,
    b: f64,
    strict_b: bool,
    strict_a: bool,
    settings: SolverSettings,
) -> Result<LevelReport> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::InvalidArgument(format!("levels must satisfy 0 <= a < b <= 1, got a={a}, b={b}")));
    }
    if !(base.value > 0.0 && base.value.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "condenser capacity {} is not finite and positive",
            base.value
        )));
    }
    let u = &base.potential.values;
    let outer = condenser.outer();
    let set_b = superlevel_within(u, outer, b, strict_b);
    let set_a = superlevel_within(u, outer, a, strict_a);
    let predicted = (b - a).powf(1.0 - space.p()) * base.value;
    let mut report = LevelReport {
        a,
        b,
        strict_b,
        strict_a,
        set_b_size: set_b.len(),
        set_a_size: set_a.len(),
        measured: 0.0,
        predicted,
        relative_error: f64::NAN,
        degenerate: set_b.is_empty(),
    };
    if report.degenerate {
        return Ok(report);
    }
    let band = Condenser::new(space, set_b, set_a)?;
    report.measured = capacity_with(space, &band, settings)?.value;
    report.relative_error = (report.measured - predicted).abs() / predicted;
    Ok(report)
}

/// Runs [`verify_identity_with`] over level pairs in parallel; output order
/// follows `pairs`.
pub fn identity_sweep(
    space: &WeightedGraphSpace,
    condenser: &Condenser,
    base: &CapacityResult,
    pairs: &[(f64, f64)],
    strict_b: bool,
    strict_a: bool,
    settings: SolverSettings,
) -> Result<Vec<LevelReport>> {
    pairs
        .par_iter()
        .map(|&(a, b)| verify_identity_with(space, condenser, base, a, b, strict_b, strict_a, settings))
        .collect()
}

/// Default sweep levels: distinct node values of the potential on `A`,
/// without 0 and 1 (which reproduce the original condenser).
pub fn default_levels(base: &CapacityResult, condenser: &Condenser) -> Vec<f64> {
    achieved_levels(&base.potential.values, condenser.outer())
        .into_iter()
        .filter(|&x| x > 0.0 && x < 1.0)
        .collect()
}

/// Result of testing a capacity against the window
/// `[((p-1)/p)^(2(p-1)) (b-a)^(1-p), p^2 (b-a)^(1-p)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsWindow {
    pub a: f64,
    pub b: f64,
    pub lower: f64,
    pub upper: f64,
    pub measured: f64,
    pub pass: bool,
    /// Distance to the nearer bound.
    pub margin: f64,
}

pub fn hs_window(p: f64, a: f64, b: f64, measured: f64) -> HsWindow {
    let base = (b - a).powf(1.0 - p);
    let lower = ((p - 1.0) / p).powf(2.0 * (p - 1.0)) * base;
    let upper = p * p * base;
    let pass = lower <= measured && measured <= upper;
    let margin = (measured - lower).abs().min((upper - measured).abs());
    HsWindow { a, b, lower, upper, measured, pass, margin }
}

/// Measures `cap({x in omega : u >= b}, {x in omega : u > a})` and tests it
/// against the window.
pub fn hs_window_check(
    space: &WeightedGraphSpace,
    u: &[f64],
    omega: &VertexSet,
    a: f64,
    b: f64,
    settings: SolverSettings,
) -> Result<HsWindow> {
    let top = omega.iter().map(|v| u[v]).fold(f64::NEG_INFINITY, f64::max);
    if !(0.0 <= a && a < b && b <= top) {
        return Err(Error::InvalidArgument(format!(
            "levels must satisfy 0 <= a < b <= sup u = {top}, got a={a}, b={b}"
        )));
    }
    let set_b = superlevel_within(u, omega, b, false);
    let set_a = superlevel_within(u, omega, a, true);
    let measured = capacity_with(space, &Condenser::new(space, set_b, set_a)?, settings)?.value;
    Ok(hs_window(space.p(), a, b, measured))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaRow {
    pub level: f64,
    pub capacity: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaEstimate {
    /// Mean over levels.
    pub lambda: f64,
    /// `(max - min) / mean` over levels.
    pub dispersion: f64,
    pub rows: Vec<LambdaRow>,
}

/// `Λ_b = b^(p-1) cap({x in omega : u >= b}, omega)` at every positive
/// value `u` attains on `omega`.
pub fn lambda_estimate(
    space: &WeightedGraphSpace,
    u: &[f64],
    omega: &VertexSet,
    settings: SolverSettings,
) -> Result<LambdaEstimate> {
    let levels: Vec<f64> = achieved_levels(u, omega).into_iter().filter(|&b| b > 0.0).collect();
    lambda_estimate_at(space, u, omega, &levels, settings)
}

pub fn lambda_estimate_at(
    space: &WeightedGraphSpace,
    u: &[f64],
    omega: &VertexSet,
    levels: &[f64],
    settings: SolverSettings,
) -> Result<LambdaEstimate> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("no interior levels".into()));
    }
    let p = space.p();
    let rows = levels
        .par_iter()
        .map(|&b| {
            let set = superlevel_within(u, omega, b, false);
            let capacity = capacity_with(space, &Condenser::new(space, set, omega.clone())?, settings)?.value;
            Ok(LambdaRow { level: b, capacity, lambda: b.powf(p - 1.0) * capacity })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = rows.iter().map(|r| r.lambda).sum::<f64>() / rows.len() as f64;
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.lambda), hi.max(r.lambda)));
    Ok(LambdaEstimate { lambda: mean, dispersion: (hi - lo) / mean, rows })
}
