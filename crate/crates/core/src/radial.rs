//! Closed-form and quadrature oracles for radially symmetric weighted `R^n`.
//!
//! With radial weight `w`, the capacity of the annulus condenser
//! `(B_r, B_R)` is `S (int_r^R (w(s) s^(n-1))^(-1/(p-1)) ds)^(1-p)` where
//! `S` is the area of the unit sphere; the radial Green function of `B_R`
//! is `g(rho) = cap(B_rho, B_R)^(1/(1-p))`.

use std::cell::RefCell;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadSettings};
use crate::space::{build_path, WeightedGraphSpace};

/// Weight as a function of the distance to the origin.
#[derive(Clone)]
pub enum RadialWeight {
    Constant(f64),
    /// `scale * rho^exponent`.
    Power { scale: f64, exponent: f64 },
    Custom { label: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl RadialWeight {
    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom { label: label.into(), f: Arc::new(f) }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        match self {
            RadialWeight::Constant(c) => *c,
            RadialWeight::Power { scale, exponent } => scale * rho.powf(*exponent),
            RadialWeight::Custom { f, .. } => f(rho),
        }
    }

    /// `(scale, exponent)` for pure power laws.
    pub fn power_law(&self) -> Option<(f64, f64)> {
        match self {
            RadialWeight::Constant(c) => Some((*c, 0.0)),
            RadialWeight::Power { scale, exponent } => Some((*scale, *exponent)),
            RadialWeight::Custom { .. } => None,
        }
    }
}

impl fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialWeight::Constant(c) => write!(f, "const:{c}"),
            RadialWeight::Power { scale, exponent } => write!(f, "power:{scale}:{exponent}"),
            RadialWeight::Custom { label, .. } => write!(f, "custom:{label}"),
        }
    }
}

/// Area of the unit sphere in `R^n` (2 for `n = 1`: both rays).
pub fn unit_sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * unit_sphere_area(n - 2) / (n as f64 - 2.0),
    }
}

#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub n: usize,
    pub p: f64,
    pub weight: RadialWeight,
    pub sphere_area: f64,
}

impl RadialProfile {
    pub fn new(n: usize, p: f64, weight: RadialWeight) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("exponent p = {p} must lie in (1, inf)")));
        }
        Ok(Self { n, p, weight, sphere_area: unit_sphere_area(n) })
    }

    pub fn unweighted(n: usize, p: f64) -> Result<Self> {
        Self::new(n, p, RadialWeight::Constant(1.0))
    }

    /// Counts a single ray in one dimension (half line instead of a line).
    pub fn one_sided(mut self) -> Self {
        if self.n == 1 {
            self.sphere_area = 1.0;
        }
        self
    }

    fn radial_density(&self, s: f64) -> Result<f64> {
        let w = self.weight.eval(s);
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight {w} at radius {s} is not positive")));
        }
        Ok(w * s.powi(self.n as i32 - 1))
    }

    /// `int_a^b (w(s) s^(n-1))^power ds`.
    fn density_integral(&self, a: f64, b: f64, power: f64, settings: QuadSettings) -> Result<f64> {
        let failure = RefCell::new(None);
        let value = integrate(
            |s| match self.radial_density(s) {
                Ok(d) => d.powf(power),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            a,
            b,
            settings,
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => value,
        }
    }

    /// `int_r^R (w(s) s^(n-1))^(-1/(p-1)) ds`.
    fn resistance(&self, r: f64, big_r: f64) -> Result<f64> {
        self.density_integral(r, big_r, -1.0 / (self.p - 1.0), QuadSettings::default())
    }

    /// `mu(B_rho) = S int_0^rho w(s) s^(n-1) ds`.
    pub fn ball_measure(&self, rho: f64) -> Result<f64> {
        Ok(self.sphere_area * self.density_integral(0.0, rho, 1.0, QuadSettings::relative(1e-12))?)
    }
}

fn check_radii(r: f64, big_r: f64) -> Result<()> {
    if !(r > 0.0 && r < big_r && big_r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radii must satisfy 0 < r < R, got r={r}, R={big_r}")));
    }
    Ok(())
}

/// Capacity of `(B_r, B_R)`.
pub fn annulus_capacity(profile: &RadialProfile, r: f64, big_r: f64) -> Result<f64> {
    check_radii(r, big_r)?;
    let resistance = profile.resistance(r, big_r)?;
    Ok(profile.sphere_area * resistance.powf(1.0 - profile.p))
}

/// `g(rho) = cap(B_rho, B_R)^(1/(1-p))`, or the bare radial integral
/// `int_rho^R (w s^(n-1))^(-1/(p-1)) ds` when `normalize` is false.
pub fn radial_green_profile(profile: &RadialProfile, big_r: f64, normalize: bool, samples: &[f64]) -> Result<Vec<f64>> {
    let factor = if normalize { profile.sphere_area.powf(-1.0 / (profile.p - 1.0)) } else { 1.0 };
    samples
        .iter()
        .map(|&rho| {
            if rho == big_r {
                return Ok(0.0);
            }
            check_radii(rho, big_r)?;
            Ok(factor * profile.resistance(rho, big_r)?)
        })
        .collect()
}

/// CSV `rho,g,cap_annulus` for a sampled normalized profile.
pub fn write_profile_csv<W: Write>(profile: &RadialProfile, big_r: f64, samples: &[f64], mut out: W) -> Result<()> {
    let g = radial_green_profile(profile, big_r, true, samples)?;
    writeln!(out, "rho,g,cap_annulus")?;
    for (rho, g) in samples.iter().zip(g) {
        let cap = if *rho < big_r { annulus_capacity(profile, *rho, big_r)? } else { f64::INFINITY };
        writeln!(out, "{rho:e},{g:e},{cap:e}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointCapacityClass {
    Zero,
    Positive,
    Unknown,
}

impl fmt::Display for PointCapacityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointCapacityClass::Zero => "zero",
            PointCapacityClass::Positive => "positive",
            PointCapacityClass::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassMethod {
    Symbolic,
    Fitted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class: PointCapacityClass,
    /// Power-law exponent of `(rho / mu(B_rho))^(1/(p-1))` near 0.
    pub exponent: f64,
    pub method: ClassMethod,
    pub delta: f64,
}

impl ClassReport {
    /// `n,p,weight_spec,delta,class,exponent`.
    pub fn report_line(&self, profile: &RadialProfile) -> String {
        format!("{},{},{},{},{},{}", profile.n, profile.p, profile.weight, self.delta, self.class, self.exponent)
    }
}

/// Half-width of the undecided band around exponent -1.
pub const EXPONENT_MARGIN: f64 = 0.05;

/// Decides whether the origin has zero capacity by testing divergence of
/// `int_0^delta (rho / mu(B_rho))^(1/(p-1)) drho`.
///
/// Power-law weights are decided from the exact exponent. Other weights
/// get a log-log slope fit of the integrand on the ladder
/// `delta 2^-k`; exponents below `-1 - 0.05` diverge, above `-1 + 0.05`
/// converge, and a fit that sits on -1 itself (logarithmic divergence) is
/// read as divergent. Anything else is reported as unknown.
pub fn point_capacity_class(profile: &RadialProfile, delta: f64) -> Result<ClassReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    if let Some((scale, beta)) = profile.weight.power_law() {
        if !(scale > 0.0) || profile.n as f64 + beta <= 0.0 {
            return Err(Error::InvalidArgument("power weight does not give finite positive ball measures".into()));
        }
        let exponent = (1.0 - profile.n as f64 - beta) / (profile.p - 1.0);
        let class = if exponent <= -1.0 { PointCapacityClass::Zero } else { PointCapacityClass::Positive };
        return Ok(ClassReport { class, exponent, method: ClassMethod::Symbolic, delta });
    }

    let integrand = |rho: f64| -> Result<f64> {
        Ok((rho / profile.ball_measure(rho)?).powf(1.0 / (profile.p - 1.0)))
    };
    let ladder: Vec<(f64, f64)> = (24..=40)
        .map(|k| {
            let rho = delta * 0.5f64.powi(k);
            integrand(rho).map(|f| (rho.ln(), f.ln()))
        })
        .collect::<Result<_>>()?;
    let slopes: Vec<f64> = ladder.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let exponent = least_squares_slope(&ladder);
    let spread = slopes.iter().map(|s| (s - exponent).abs()).fold(0.0, f64::max);
    let class = if !exponent.is_finite() || spread > 0.01 {
        PointCapacityClass::Unknown
    } else if exponent < -1.0 - EXPONENT_MARGIN {
        PointCapacityClass::Zero
    } else if exponent > -1.0 + EXPONENT_MARGIN {
        PointCapacityClass::Positive
    } else if (exponent + 1.0).abs() <= 1e-3 {
        PointCapacityClass::Zero
    } else {
        PointCapacityClass::Unknown
    };
    Ok(ClassReport { class, exponent, method: ClassMethod::Fitted, delta })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Path graph of radial shells together with the shell radii.
#[derive(Debug, Clone)]
pub struct RadialPath {
    pub space: WeightedGraphSpace,
    /// `radii[k]` is the radius of vertex `k`; vertex 0 sits at `r_min`.
    pub radii: Vec<f64>,
}

/// Splits `[r_min, R]` into `shells` equal shells; shell `k` becomes the
/// edge `k - k+1` with the annulus capacity of the shell as conductance,
/// and each vertex carries half the volume of its adjacent shells.
pub fn radial_to_path(profile: &RadialProfile, r_min: f64, big_r: f64, shells: usize) -> Result<RadialPath> {
    check_radii(r_min, big_r)?;
    if shells == 0 {
        return Err(Error::InvalidArgument("need at least one shell".into()));
    }
    let step = (big_r - r_min) / shells as f64;
    let radii: Vec<f64> = (0..=shells)
        .map(|k| if k == shells { big_r } else { r_min + k as f64 * step })
        .collect();
    let mut conductances = Vec::with_capacity(shells);
    let mut volumes = Vec::with_capacity(shells);
    for w in radii.windows(2) {
        conductances.push(annulus_capacity(profile, w[0], w[1])?);
        let v = profile.density_integral(w[0], w[1], 1.0, QuadSettings::default())?;
        volumes.push(profile.sphere_area * v);
    }
    let lengths: Vec<f64> = radii.windows(2).map(|w| w[1] - w[0]).collect();
    let measures: Vec<f64> = (0..=shells)
        .map(|k| {
            let left = if k > 0 { volumes[k - 1] } else { 0.0 };
            let right = if k < shells { volumes[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect();
    let space = build_path(&conductances, &lengths, &measures, profile.p)?;
    Ok(RadialPath { space, radii })
}
