//! Singular and Green functions on a domain `omega` with pole `x0`.
//!
//! A Green function is positive on `omega`, zero outside, p-harmonic on
//! `omega \ {x0}`, maximal at `x0`, and normalized so that
//! `cap({u >= b}, omega) = b^(1-p)` for `0 < b <= u(x0)`. On a finite graph
//! every vertex has positive capacity, so the normalized field is
//! `cap({x0}, omega)^(1/(1-p))` times the capacitary potential of
//! `({x0}, omega)`; equivalently it solves the problem with a unit charge
//! at `x0`. Both constructions are provided, plus the shrinking-ball limit.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::capacity::{capacity_with, Condenser};
use crate::error::{Error, Result};
use crate::penergy::{self, PotentialField, SolveSpec, SolverSettings};
use crate::space::{build_grid, ball_from_distances, sphere_from_distances, GridBox, GridWeight, VertexSet, WeightedGraphSpace};
use crate::superlevel::superlevel_within;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Capacitary,
    Delta,
    BallLimit,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Capacitary => "capacitary",
            Route::Delta => "delta",
            Route::BallLimit => "ball-limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenFunction {
    pub field: PotentialField,
    pub x0: usize,
    pub omega: VertexSet,
    /// Factor turning the unit-pole capacitary potential into this field.
    pub alpha: f64,
    pub pole_value: f64,
    pub route: Route,
}

impl GreenFunction {
    pub fn values(&self) -> &[f64] {
        &self.field.values
    }

    /// Header block `x0,alpha,pole,route` followed by the `index,value` table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x0,alpha,pole,route")?;
        writeln!(out, "{},{:e},{:e},{}", self.x0, self.alpha, self.pole_value, self.route)?;
        self.field.write_csv(out)
    }
}

/// Checks that `omega` can carry a singular function with pole `x0`.
pub fn check_domain(space: &WeightedGraphSpace, omega: &VertexSet, x0: usize) -> Result<()> {
    space.check_vertex(x0)?;
    space.check_set(omega)?;
    if !omega.contains(x0) {
        return Err(Error::InvalidArgument(format!("pole {x0} lies outside the domain")));
    }
    if omega.len() == space.vertex_count() {
        return Err(Error::NoSingularFunction);
    }
    if !space.is_connected_subset(omega) {
        return Err(Error::DisconnectedDomain { x0 });
    }
    Ok(())
}

pub fn green_capacitary(space: &WeightedGraphSpace, omega: &VertexSet, x0: usize) -> Result<GreenFunction> {
    green_capacitary_with(space, omega, x0, SolverSettings::default())
}

/// Scales the capacitary potential of `({x0}, omega)` by
/// `cap({x0}, omega)^(1/(1-p))`.
pub fn green_capacitary_with(
    space: &WeightedGraphSpace,
    omega: &VertexSet,
    x0: usize,
    settings: SolverSettings,
) -> Result<GreenFunction> {
    check_domain(space, omega, x0)?;
    let p = space.p();
    let cap = capacity_with(space, &Condenser::new(space, VertexSet::singleton(x0), omega.clone())?, settings)?;
    let alpha = cap.value.powf(1.0 / (1.0 - p));
    let mut field = cap.potential;
    for v in field.values.iter_mut() {
        *v *= alpha;
    }
    field.energy = penergy::energy(space, &field.values);
    field.kkt_residual *= alpha.powf(p - 1.0);
    let pole_value = field.values[x0];
    Ok(GreenFunction { field, x0, omega: omega.clone(), alpha, pole_value, route: Route::Capacitary })
}

pub fn green_delta(space: &WeightedGraphSpace, omega: &VertexSet, x0: usize) -> Result<GreenFunction> {
    green_delta_with(space, omega, x0, SolverSettings::default())
}

/// Minimizes `energy/p - u(x0)` over fields vanishing off `omega`.
pub fn green_delta_with(
    space: &WeightedGraphSpace,
    omega: &VertexSet,
    x0: usize,
    settings: SolverSettings,
) -> Result<GreenFunction> {
    check_domain(space, omega, x0)?;
    let field = charged_field(space, omega, &BTreeMap::from([(x0, 1.0)]), settings)?;
    let pole_value = field.values[x0];
    Ok(GreenFunction { field, x0, omega: omega.clone(), alpha: pole_value, pole_value, route: Route::Delta })
}

/// Field vanishing off `omega` with the given point charges inside it.
pub fn charged_field(
    space: &WeightedGraphSpace,
    omega: &VertexSet,
    charges: &BTreeMap<usize, f64>,
    settings: SolverSettings,
) -> Result<PotentialField> {
    space.check_set(omega)?;
    if omega.len() == space.vertex_count() {
        return Err(Error::NoSingularFunction);
    }
    let mut spec = SolveSpec::new().fix_set(&omega.complement(space.vertex_count()), 0.0).settings(settings);
    for (&v, &q) in charges {
        if !omega.contains(v) {
            return Err(Error::InvalidArgument(format!("charge at {v} lies outside the domain")));
        }
        spec = spec.charge(v, q);
    }
    penergy::solve(space, &spec)
}

/// One shrinking-ball approximant: the capacitary potential of the closed
/// ball `B_r(x0)` in `omega`, divided by its maximum `m_r` on the sphere of
/// radius `r0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallLimitStep {
    pub radius: f64,
    pub ball_size: usize,
    pub sphere_max: f64,
    pub values: Vec<f64>,
}

pub fn green_ball_limit(
    space: &WeightedGraphSpace,
    omega: &VertexSet,
    x0: usize,
    radii: &[f64],
    r0: f64,
    settings: SolverSettings,
) -> Result<Vec<BallLimitStep>> {
    check_domain(space, omega, x0)?;
    if radii.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
    }
    if radii.iter().any(|&r| !(r >= 0.0 && r < r0)) {
        return Err(Error::InvalidArgument(format!("radii must lie in [0, r0) with r0 = {r0}")));
    }
    let dist = space.distances_from(x0);
    let sphere = sphere_from_distances(&dist, r0, space.sphere_width());
    if sphere.is_empty() {
        return Err(Error::EmptySphere { r: r0 });
    }
    radii
        .par_iter()
        .map(|&r| {
            let ball = ball_from_distances(&dist, r, true);
            if !ball.is_subset(omega) {
                return Err(Error::InvalidArgument(format!("ball of radius {r} leaves the domain")));
            }
            let ball_size = ball.len();
            let cap = capacity_with(space, &Condenser::new(space, ball, omega.clone())?, settings)?;
            let u = cap.potential.values;
            let sphere_max = sphere.iter().map(|v| u[v]).fold(f64::NEG_INFINITY, f64::max);
            if !(sphere_max > 0.0) {
                return Err(Error::InvalidArgument(format!("potential vanishes on the sphere of radius {r0}")));
            }
            Ok(BallLimitStep { radius: r, ball_size, sphere_max, values: u.iter().map(|x| x / sphere_max).collect() })
        })
        .collect()
}

/// Which normalization formula to apply to a singular function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleCapacity {
    /// `alpha = cap({x0}, omega)^(1/(1-p)) / v(x0)`.
    Positive,
    /// `alpha = cap({v >= 1}, omega)^(1/(1-p))`, meant for refined-grid
    /// fields whose pole value exceeds 1.
    Zero,
}

/// Factor `alpha` making `alpha * v` a Green function.
pub fn normalization_constant(
    space: &WeightedGraphSpace,
    v: &[f64],
    omega: &VertexSet,
    x0: usize,
    branch: PoleCapacity,
    settings: SolverSettings,
) -> Result<f64> {
    check_domain(space, omega, x0)?;
    let p = space.p();
    match branch {
        PoleCapacity::Positive => {
            let cap = capacity_with(space, &Condenser::new(space, VertexSet::singleton(x0), omega.clone())?, settings)?;
            Ok(cap.value.powf(1.0 / (1.0 - p)) / v[x0])
        }
        PoleCapacity::Zero => {
            let top = superlevel_within(v, omega, 1.0, false);
            if top.is_empty() {
                return Err(Error::InvalidArgument("field never reaches level 1".into()));
            }
            let cap = capacity_with(space, &Condenser::new(space, top, omega.clone())?, settings)?;
            Ok(cap.value.powf(1.0 / (1.0 - p)))
        }
    }
}

/// Discrete form of the singular-function conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularReport {
    /// `u > 0` on omega.
    pub positive: bool,
    /// Nonnegative outward flux at every vertex of omega (S1).
    pub superharmonic: bool,
    /// Zero stationarity residual on `omega \ {x0}` (S2).
    pub harmonic_off_pole: bool,
    /// `u(x0) = max_omega u` (S3).
    pub pole_is_max: bool,
    /// `u = 0` on the vertex boundary of omega, where the infimum is attained (S4).
    pub vanishes_on_boundary: bool,
    /// `u = 0` everywhere off omega, so the zero extension is `u` itself (S5).
    pub zero_extension: bool,
    pub max_harmonic_residual: f64,
}

impl SingularReport {
    pub fn all_pass(&self) -> bool {
        self.positive
            && self.superharmonic
            && self.harmonic_off_pole
            && self.pole_is_max
            && self.vanishes_on_boundary
            && self.zero_extension
    }
}

pub fn is_singular(space: &WeightedGraphSpace, u: &[f64], omega: &VertexSet, x0: usize, tolerance: f64) -> SingularReport {
    let n = space.vertex_count();
    let out = penergy::flux(space, u);
    let positive = omega.iter().all(|v| u[v] > 0.0);
    let superharmonic = omega.iter().all(|v| out[v] >= -tolerance);
    let max_harmonic_residual = omega.iter().filter(|&v| v != x0).map(|v| out[v].abs()).fold(0.0, f64::max);
    let top = omega.iter().map(|v| u[v]).fold(f64::NEG_INFINITY, f64::max);
    let pole_is_max = omega.contains(x0) && u[x0] >= top - tolerance * top.abs().max(1.0);
    let vanishes_on_boundary = match space.boundary_of(omega) {
        Ok(b) => !b.is_empty() && b.iter().all(|v| u[v].abs() <= tolerance),
        Err(_) => false,
    };
    let zero_extension = omega.len() < n && omega.complement(n).iter().all(|v| u[v].abs() <= tolerance);
    SingularReport {
        positive,
        superharmonic,
        harmonic_off_pole: max_harmonic_residual <= tolerance,
        pole_is_max,
        vanishes_on_boundary,
        zero_extension,
        max_harmonic_residual,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub r: f64,
    pub sphere_size: usize,
    pub min_sphere: f64,
    pub max_sphere: f64,
    /// `cap(B_r, G)^(1/(1-p))` for the closed ball.
    pub cap_inv: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// The ball of radius `margin * r` stays inside omega.
    pub within_margin: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityProfile {
    pub rows: Vec<ProfileRow>,
    /// Radii whose sphere was empty.
    pub skipped: Vec<f64>,
}

impl SingularityProfile {
    pub fn csv_header() -> &'static str {
        "r,min_sphere,max_sphere,cap_inv,ratio_min,ratio_max"
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::csv_header())?;
        for r in &self.rows {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                r.r, r.min_sphere, r.max_sphere, r.cap_inv, r.ratio_min, r.ratio_max
            )?;
        }
        Ok(())
    }

    /// `max ratio_max / min ratio_min` over rows inside the margin.
    pub fn bracket_width(&self) -> f64 {
        let rows = self.rows.iter().filter(|r| r.within_margin);
        let (lo, hi) = rows.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.ratio_min), hi.max(r.ratio_max))
        });
        hi / lo
    }
}

/// Compares `u` on spheres around the pole with `cap(B_r, G)^(1/(1-p))`,
/// `G` defaulting to omega. Default `margin` is 2.
pub fn singularity_profile(
    space: &WeightedGraphSpace,
    green: &GreenFunction,
    radii: &[f64],
    enclosing: Option<&VertexSet>,
    margin: f64,
    settings: SolverSettings,
) -> Result<SingularityProfile> {
    let outer = enclosing.unwrap_or(&green.omega);
    space.check_set(outer)?;
    let p = space.p();
    let u = green.values();
    let dist = space.distances_from(green.x0);
    let width = space.sphere_width();
    let results = radii
        .par_iter()
        .map(|&r| {
            let sphere = sphere_from_distances(&dist, r, width);
            if sphere.is_empty() {
                return Ok(None);
            }
            let ball = ball_from_distances(&dist, r, true);
            if !ball.is_subset(outer) {
                return Err(Error::InvalidArgument(format!("ball of radius {r} leaves the enclosing set")));
            }
            let within_margin = ball_from_distances(&dist, margin * r, true).is_subset(&green.omega);
            let cap = capacity_with(space, &Condenser::new(space, ball, outer.clone())?, settings)?;
            let cap_inv = cap.value.powf(1.0 / (1.0 - p));
            let (lo, hi) = sphere
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(u[v]), hi.max(u[v])));
            Ok(Some(ProfileRow {
                r,
                sphere_size: sphere.len(),
                min_sphere: lo,
                max_sphere: hi,
                cap_inv,
                ratio_min: lo / cap_inv,
                ratio_max: hi / cap_inv,
                within_margin,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut profile = SingularityProfile { rows: Vec::new(), skipped: Vec::new() };
    for (r, row) in radii.iter().zip(results) {
        match row {
            Some(row) => profile.rows.push(row),
            None => profile.skipped.push(*r),
        }
    }
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnackReport {
    /// `max_K u / min_K u` on `K = closed B_r minus open B_{tau r}`.
    pub constant: f64,
    pub max_annulus: f64,
    pub min_annulus: f64,
    pub min_sphere: f64,
    /// The annulus minimum is attained on the outer sphere.
    pub min_on_sphere: bool,
}

pub fn sphere_harnack(space: &WeightedGraphSpace, u: &[f64], x0: usize, r: f64, tau: f64) -> Result<HarnackReport> {
    space.check_vertex(x0)?;
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must lie in (0, 1]")));
    }
    let dist = space.distances_from(x0);
    let annulus = ball_from_distances(&dist, r, true).difference(&ball_from_distances(&dist, tau * r, false));
    if annulus.is_empty() {
        return Err(Error::EmptySphere { r });
    }
    let sphere = sphere_from_distances(&dist, r, space.sphere_width()).intersection(&annulus);
    let (lo, hi) = annulus
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(u[v]), hi.max(u[v])));
    if !(lo > 0.0) {
        return Err(Error::InvalidArgument("field must be positive on the annulus".into()));
    }
    let min_sphere = sphere.iter().map(|v| u[v]).fold(f64::INFINITY, f64::min);
    Ok(HarnackReport {
        constant: hi / lo,
        max_annulus: hi,
        min_annulus: lo,
        min_sphere,
        min_on_sphere: (min_sphere - lo).abs() <= 1e-12 * lo,
    })
}

/// Extremes of `u / v` over `region`.
pub fn compare_fields(u: &[f64], v: &[f64], region: &VertexSet) -> Result<(f64, f64)> {
    if region.is_empty() {
        return Err(Error::InvalidArgument("empty comparison region".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in region.iter() {
        if k >= u.len() || k >= v.len() {
            return Err(Error::VertexOutOfRange { index: k, len: u.len().min(v.len()) });
        }
        if !(u[k] > 0.0 && v[k] > 0.0) {
            return Err(Error::InvalidArgument(format!("nonpositive value at vertex {k}")));
        }
        let q = u[k] / v[k];
        lo = lo.min(q);
        hi = hi.max(q);
    }
    Ok((lo, hi))
}

/// Green function of the interior of the unit cube `[0,1]^dim` with pole
/// at the center, on a lattice of spacing `h` with unit weight.
pub fn unit_cube_green(dim: usize, h: f64, p: f64, settings: SolverSettings) -> Result<(WeightedGraphSpace, GreenFunction)> {
    let space = build_grid(&GridBox::unit(dim), h, &GridWeight::Constant(1.0), p)?;
    let omega = lattice_interior(&space)?;
    let x0 = nearest_vertex(&space, &vec![0.5; dim])?;
    let green = green_capacitary_with(&space, &omega, x0, settings)?;
    Ok((space, green))
}

/// Grid vertices off the faces of the bounding box.
pub fn lattice_interior(space: &WeightedGraphSpace) -> Result<VertexSet> {
    let coords = space
        .coordinates()
        .ok_or_else(|| Error::InvalidArgument("space has no coordinates".into()))?;
    let dim = coords[0].len();
    let (mut lo, mut hi) = (vec![f64::INFINITY; dim], vec![f64::NEG_INFINITY; dim]);
    for x in coords {
        for d in 0..dim {
            lo[d] = lo[d].min(x[d]);
            hi[d] = hi[d].max(x[d]);
        }
    }
    Ok(coords
        .iter()
        .enumerate()
        .filter(|(_, x)| (0..dim).all(|d| x[d] > lo[d] && x[d] < hi[d]))
        .map(|(k, _)| k)
        .collect())
}

pub fn nearest_vertex(space: &WeightedGraphSpace, point: &[f64]) -> Result<usize> {
    let coords = space
        .coordinates()
        .ok_or_else(|| Error::InvalidArgument("space has no coordinates".into()))?;
    let d2 = |x: &Vec<f64>| x.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    Ok((0..coords.len()).min_by(|&a, &b| d2(&coords[a]).total_cmp(&d2(&coords[b]))).unwrap())
}

/// Pole value and energy near the pole at one lattice spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementRow {
    pub h: f64,
    pub pole: f64,
    /// Energy on edges inside the closed ball of radius `local_radius`.
    pub local_energy: f64,
}

/// Unit-cube Green functions over a sequence of spacings.
pub fn pole_refinement(dim: usize, p: f64, spacings: &[f64], local_radius: f64, settings: SolverSettings) -> Result<Vec<RefinementRow>> {
    spacings
        .par_iter()
        .map(|&h| {
            let (space, green) = unit_cube_green(dim, h, p, settings)?;
            let ball = space.metric_ball(green.x0, local_radius, true)?;
            Ok(RefinementRow { h, pole: green.pole_value, local_energy: penergy::local_energy(&space, green.values(), &ball) })
        })
        .collect()
}

/// Reads a refinement sequence (ordered by decreasing `h`) as divergent when
/// its increments stop shrinking: the last increment is at least `0.9`
/// times the one before it. Convergent sequences have geometrically
/// decaying increments.
pub fn increments_diverge(values: &[f64]) -> bool {
    if values.len() < 3 {
        return false;
    }
    let k = values.len();
    let last = values[k - 1] - values[k - 2];
    let prev = values[k - 2] - values[k - 3];
    last > 1e-9 * values[k - 1].abs() && prev > 0.0 && last >= 0.9 * prev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::unit_path;

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    fn path3() -> WeightedGraphSpace {
        unit_path(&[1.0, 1.0], 2.0).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn capacitary_route_on_three_path() {
        let g = path3();
        let green = green_capacitary(&g, &set(&[0, 1]), 0).unwrap();
        assert!(close(green.values(), &[2.0, 1.0, 0.0], 1e-12));
        assert!((green.alpha - 2.0).abs() < 1e-12);
        assert!((green.pole_value - 2.0).abs() < 1e-12);
        let omega = set(&[0, 1]);
        let top = Condenser::new(&g, set(&[0]), omega.clone()).unwrap();
        let cap = capacity_with(&g, &top, SolverSettings::default()).unwrap().value;
        assert!((cap - 0.5).abs() < 1e-12);
        let all = Condenser::new(&g, omega.clone(), omega).unwrap();
        assert!((capacity_with(&g, &all, SolverSettings::default()).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_route_on_three_path() {
        let g = path3();
        let green = green_delta(&g, &set(&[0, 1]), 0).unwrap();
        assert!(close(green.values(), &[2.0, 1.0, 0.0], 1e-12));
        assert_eq!(green.route, Route::Delta);
    }

    #[test]
    fn domain_errors() {
        let g = path3();
        assert!(matches!(green_capacitary(&g, &set(&[0, 1, 2]), 0), Err(Error::NoSingularFunction)));
        assert!(matches!(green_delta(&g, &set(&[0, 1, 2]), 0), Err(Error::NoSingularFunction)));
        assert!(green_capacitary(&g, &set(&[0, 1]), 2).is_err());
        let g5 = unit_path(&[1.0; 4], 2.0).unwrap();
        assert!(matches!(green_capacitary(&g5, &set(&[0, 2]), 0), Err(Error::DisconnectedDomain { .. })));
    }

    #[test]
    fn singular_checklist() {
        let g = unit_path(&[1.0, 2.0, 0.5, 1.0], 3.0).unwrap();
        let omega = set(&[0, 1, 2, 3]);
        let green = green_capacitary(&g, &omega, 1).unwrap();
        assert!(is_singular(&g, green.values(), &omega, 1, 1e-8).all_pass());
        let ones = vec![1.0; 5];
        let r = is_singular(&g, &ones, &omega, 1, 1e-8);
        assert!(!r.vanishes_on_boundary && !r.zero_extension);
    }

    #[test]
    fn double_pole_is_not_singular() {
        let g = unit_path(&[1.0; 6], 2.0).unwrap();
        let omega = set(&[1, 2, 3, 4, 5]);
        let charges = BTreeMap::from([(2, 1.0), (4, 3.0)]);
        let u = charged_field(&g, &omega, &charges, SolverSettings::default()).unwrap();
        let r = is_singular(&g, &u.values, &omega, 2, 1e-8);
        assert!(!r.harmonic_off_pole);
        assert!(!r.pole_is_max);
        assert!(!r.all_pass());
    }

    #[test]
    fn profile_on_three_path() {
        let g = path3();
        let green = green_capacitary(&g, &set(&[0, 1]), 0).unwrap();
        let prof = singularity_profile(&g, &green, &[1.0], None, 1.0, SolverSettings::default()).unwrap();
        let row = prof.rows[0];
        assert!((row.min_sphere - 1.0).abs() < 1e-12);
        assert!((row.cap_inv - 1.0).abs() < 1e-12);
        assert!((row.ratio_min - 1.0).abs() < 1e-12);
        assert!(row.within_margin);
        let prof = singularity_profile(&g, &green, &[1.0], None, 2.0, SolverSettings::default()).unwrap();
        assert!(!prof.rows[0].within_margin);
    }

    #[test]
    fn harnack_of_constant_is_one() {
        let g = unit_path(&[1.0; 6], 2.0).unwrap();
        let r = sphere_harnack(&g, &[1.0; 7], 3, 2.0, 0.5).unwrap();
        assert_eq!(r.constant, 1.0);
        assert!(r.min_on_sphere);
        assert!(sphere_harnack(&g, &[1.0; 7], 3, 0.5, 0.5).is_err());
    }

    #[test]
    fn comparisons() {
        let u = [1.0, 2.0, 3.0];
        let v = [0.5, 1.0, 1.5];
        let all = set(&[0, 1, 2]);
        assert_eq!(compare_fields(&u, &u, &all).unwrap(), (1.0, 1.0));
        assert_eq!(compare_fields(&u, &v, &all).unwrap(), (2.0, 2.0));
        assert!(compare_fields(&u, &[0.0, 1.0, 1.0], &all).is_err());
    }

    #[test]
    fn zero_branch_normalization() {
        // v = G / G(2) reaches level 1 exactly on {0, 1, 2}, so alpha = G(2)
        let g = unit_path(&[1.0, 3.0, 2.0, 0.5], 2.5).unwrap();
        let omega = set(&[0, 1, 2, 3]);
        let green = green_delta(&g, &omega, 0).unwrap();
        let level = green.values()[2];
        let v: Vec<f64> = green.values().iter().map(|x| x / level).collect();
        let alpha = normalization_constant(&g, &v, &omega, 0, PoleCapacity::Zero, SolverSettings::default()).unwrap();
        assert!((alpha - level).abs() < 1e-9 * level);
        let alpha_pos =
            normalization_constant(&g, &v, &omega, 0, PoleCapacity::Positive, SolverSettings::default()).unwrap();
        assert!((alpha_pos - level).abs() < 1e-9 * level);
    }

    #[test]
    fn increments() {
        assert!(increments_diverge(&[1.0, 2.0, 3.0, 4.0]));
        assert!(increments_diverge(&[1.0, 3.0, 9.0, 27.0]));
        assert!(!increments_diverge(&[1.0, 1.5, 1.75, 1.875]));
        assert!(!increments_diverge(&[1.0, 1.0, 1.0]));
    }
}
