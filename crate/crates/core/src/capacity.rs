//! Variational capacity of condensers `(E, A)`: the least energy of a field
//! that is `>= 1` on `E` and vanishes off `A`, together with the field
//! realizing it.

use std::io::Write;

use crate::error::{Error, Result};
use crate::penergy::{self, PotentialField, SolveSpec, SolverSettings};
use crate::space::{VertexSet, WeightedGraphSpace};

/// Pair `E ⊆ A` of vertex sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Condenser {
    e: VertexSet,
    a: VertexSet,
}

impl Condenser {
    pub fn new(space: &WeightedGraphSpace, e: VertexSet, a: VertexSet) -> Result<Self> {
        space.check_set(&e)?;
        space.check_set(&a)?;
        if !e.is_subset(&a) {
            return Err(Error::InvalidArgument("condenser needs E ⊆ A".into()));
        }
        Ok(Self { e, a })
    }

    pub fn inner(&self) -> &VertexSet {
        &self.e
    }

    pub fn outer(&self) -> &VertexSet {
        &self.a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub value: f64,
    /// Capacitary potential, clamped to `[0, 1]`.
    pub potential: PotentialField,
    /// `E` was empty; the value 0 is a convention, not a computation.
    pub empty_inner: bool,
    /// `A` was the whole vertex set, so `u ≡ 1` is admissible.
    pub whole_outer: bool,
}

impl CapacityResult {
    pub fn csv_header() -> &'static str {
        "E_size,A_size,p,capacity,iterations,residual"
    }

    pub fn write_csv_row<W: Write>(&self, mut out: W, condenser: &Condenser, p: f64) -> Result<()> {
        writeln!(
            out,
            "{},{},{},{:e},{},{:e}",
            condenser.inner().len(),
            condenser.outer().len(),
            p,
            self.value,
            self.potential.iterations,
            self.potential.kkt_residual
        )?;
        Ok(())
    }
}

pub fn capacity(space: &WeightedGraphSpace, condenser: &Condenser) -> Result<CapacityResult> {
    capacity_with(space, condenser, SolverSettings::default())
}

pub fn capacity_with(
    space: &WeightedGraphSpace,
    condenser: &Condenser,
    settings: SolverSettings,
) -> Result<CapacityResult> {
    let n = space.vertex_count();
    if condenser.e.is_empty() {
        return Ok(CapacityResult {
            value: 0.0,
            potential: PotentialField::from_values(space, vec![0.0; n]),
            empty_inner: true,
            whole_outer: condenser.a.len() == n,
        });
    }
    if condenser.a.len() == n {
        return Ok(CapacityResult {
            value: 0.0,
            potential: PotentialField::from_values(space, vec![1.0; n]),
            empty_inner: false,
            whole_outer: true,
        });
    }
    let spec = SolveSpec::new()
        .fix_set(&condenser.e, 1.0)
        .fix_set(&condenser.a.complement(n), 0.0)
        .settings(settings);
    let mut field = penergy::solve(space, &spec)?;
    for v in field.values.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    field.energy = penergy::energy(space, &field.values);
    Ok(CapacityResult { value: field.energy, potential: field, empty_inner: false, whole_outer: false })
}

/// Capacity of a chain of conductances in series under a unit drop:
/// `(sum_k c_k^(-1/(p-1)))^(1-p)`.
pub fn series_capacity(conductances: &[f64], p: f64) -> Result<f64> {
    if conductances.is_empty() {
        return Err(Error::InvalidArgument("series capacity of an empty chain".into()));
    }
    if let Some(c) = conductances.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::InvalidArgument(format!("nonpositive conductance {c}")));
    }
    let resistance: f64 = conductances.iter().map(|c| c.powf(-1.0 / (p - 1.0))).sum();
    Ok(resistance.powf(1.0 - p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub at_least_one_on_inner: bool,
    pub zero_off_outer: bool,
    pub within_unit_range: bool,
    /// Stationarity residual on `A \ E`.
    pub harmonic_residual: f64,
    pub harmonic: bool,
}

impl AdmissibilityReport {
    pub fn all_pass(&self) -> bool {
        self.at_least_one_on_inner && self.zero_off_outer && self.within_unit_range && self.harmonic
    }
}

/// Checks admissibility of `u` for `(E, A)` and whether it is a capacitary
/// potential: `u >= 1` on `E`, `u = 0` off `A`, `0 <= u <= 1`, and zero
/// stationarity residual on `A \ E`.
pub fn admissibility_check(
    space: &WeightedGraphSpace,
    u: &[f64],
    condenser: &Condenser,
    tolerance: f64,
) -> AdmissibilityReport {
    let n = space.vertex_count();
    let at_least_one_on_inner = condenser.e.iter().all(|v| u[v] >= 1.0 - tolerance);
    let zero_off_outer = condenser.a.complement(n).iter().all(|v| u[v].abs() <= tolerance);
    let within_unit_range = u.iter().all(|&x| (-tolerance..=1.0 + tolerance).contains(&x));
    let free = condenser.a.difference(&condenser.e);
    let harmonic_residual = penergy::kkt_residual(space, u, &free, &Default::default());
    AdmissibilityReport {
        at_least_one_on_inner,
        zero_off_outer,
        within_unit_range,
        harmonic_residual,
        harmonic: harmonic_residual <= tolerance,
    }
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

    #[test]
    fn path_capacity() {
        let g = path3();
        let k = Condenser::new(&g, set(&[0]), set(&[0, 1])).unwrap();
        let r = capacity(&g, &k).unwrap();
        assert!((r.value - 0.5).abs() < 1e-14);
        for (a, b) in r.potential.values.iter().zip([1.0, 0.5, 0.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let k = Condenser::new(&g, set(&[0, 1]), set(&[0, 1])).unwrap();
        assert!((capacity(&g, &k).unwrap().value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_condensers() {
        let g = path3();
        let all = Condenser::new(&g, set(&[0]), set(&[0, 1, 2])).unwrap();
        let r = capacity(&g, &all).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.whole_outer);
        assert_eq!(r.potential.values, vec![1.0; 3]);
        let empty = Condenser::new(&g, set(&[]), set(&[0, 1])).unwrap();
        let r = capacity(&g, &empty).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.empty_inner);
        assert!(Condenser::new(&g, set(&[2]), set(&[0, 1])).is_err());
    }

    #[test]
    fn series_examples() {
        assert_eq!(series_capacity(&[1.0, 1.0], 2.0).unwrap(), 0.5);
        for p in [1.2, 2.0, 3.5] {
            assert!((series_capacity(&[3.7], p).unwrap() - 3.7).abs() < 1e-14);
        }
        assert!((series_capacity(&[1.0, 1.0], 3.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(series_capacity(&[], 2.0).is_err());
    }

    #[test]
    fn series_formula_matches_solver() {
        let g = unit_path(&[1.0, 1.0], 3.0).unwrap();
        let k = Condenser::new(&g, set(&[0]), set(&[0, 1])).unwrap();
        assert!((capacity(&g, &k).unwrap().value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn admissibility() {
        let g = path3();
        let k = Condenser::new(&g, set(&[0]), set(&[0, 1])).unwrap();
        let u = capacity(&g, &k).unwrap().potential.values;
        assert!(admissibility_check(&g, &u, &k, 1e-10).all_pass());
        let r = admissibility_check(&g, &[0.0; 3], &k, 1e-10);
        assert!(!r.at_least_one_on_inner);
        let r = admissibility_check(&g, &[1.0, 1.2, 0.0], &k, 1e-10);
        assert!(!r.within_unit_range);
    }
}
