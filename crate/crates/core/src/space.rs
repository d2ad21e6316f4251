//! Finite weighted graphs standing in for bounded domains of a metric measure
//! space: per-vertex measures, edge lengths (the metric), edge conductances
//! (the energy weights) and the exponent `p`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::RadialWeight;

/// Undirected edge stored once with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
    pub conductance: f64,
}

/// Sorted, duplicate-free list of vertex indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn singleton(v: usize) -> Self {
        Self(vec![v])
    }

    /// All vertices `0..n`.
    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn from_sorted_unchecked(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        Self(v)
    }

    /// Collects `indices` and checks them against a vertex count.
    pub fn checked(indices: impl IntoIterator<Item = usize>, n: usize) -> Result<Self> {
        let set: Self = indices.into_iter().collect();
        if let Some(&last) = set.0.last() {
            if last >= n {
                return Err(Error::VertexOutOfRange { index: last, len: n });
            }
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        Self(self.iter().filter(|&v| other.contains(v)).collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        Self(self.iter().filter(|&v| !other.contains(v)).collect())
    }

    /// Complement within `0..n`.
    pub fn complement(&self, n: usize) -> VertexSet {
        Self((0..n).filter(|&v| !self.contains(v)).collect())
    }

    /// Membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for v in self.iter() {
            m[v] = true;
        }
        m
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

/// Axis-aligned box `[lower, upper]` in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl GridBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidArgument(format!(
                "box corners have dimensions {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(u > l) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidArgument("box must have lower < upper on every axis".into()));
        }
        Ok(Self { lower, upper })
    }

    /// Unit cube `[0,1]^n`.
    pub fn unit(n: usize) -> Self {
        Self { lower: vec![0.0; n], upper: vec![1.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }
}

/// Weight function for grid discretizations of weighted `R^n`.
#[derive(Debug, Clone)]
pub enum GridWeight {
    Constant(f64),
    /// `w(x) = f(|x - center|)`.
    Radial { center: Vec<f64>, weight: RadialWeight },
}

impl GridWeight {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            GridWeight::Constant(c) => *c,
            GridWeight::Radial { center, weight } => {
                let rho = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                weight.eval(rho)
            }
        }
    }
}

/// Finite metric measure space on a connected weighted graph.
///
/// Immutable once built. Vertex indices follow construction order; every
/// set-valued query returns indices in ascending order.
#[derive(Debug, Clone)]
pub struct WeightedGraphSpace {
    p: f64,
    measure: Vec<f64>,
    edges: Vec<Edge>,
    coordinates: Option<Vec<Vec<f64>>>,
    spacing: Option<f64>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl WeightedGraphSpace {
    /// Validates and assembles a space from raw parts. Edges given with
    /// `i > j` are flipped to canonical orientation.
    pub fn from_parts(
        p: f64,
        measure: Vec<f64>,
        edges: Vec<Edge>,
        coordinates: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("exponent p = {p} must lie in (1, inf)")));
        }
        let n = measure.len();
        if n == 0 {
            return Err(Error::InvalidGraph("no vertices".into()));
        }
        if let Some((k, m)) = measure.iter().enumerate().find(|(_, m)| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidGraph(format!("vertex {k} has nonpositive measure {m}")));
        }
        if let Some(c) = &coordinates {
            if c.len() != n {
                return Err(Error::InvalidGraph("coordinate count differs from vertex count".into()));
            }
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (k, e) in edges.into_iter().enumerate() {
            let (i, j) = if e.i < e.j { (e.i, e.j) } else { (e.j, e.i) };
            if i == j {
                return Err(Error::InvalidGraph(format!("edge {k} is a loop at vertex {i}")));
            }
            if j >= n {
                return Err(Error::VertexOutOfRange { index: j, len: n });
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::InvalidGraph(format!("edge {k} has nonpositive length {}", e.length)));
            }
            if !(e.conductance > 0.0 && e.conductance.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} has nonpositive conductance {}",
                    e.conductance
                )));
            }
            canon.push(Edge { i, j, ..e });
        }
        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in canon.iter().enumerate() {
            adjacency[e.i].push((e.j, k));
            adjacency[e.j].push((e.i, k));
        }
        let space = Self { p, measure, edges: canon, coordinates, spacing: None, adjacency };
        if !space.is_connected_subset(&VertexSet::full(n)) {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(space)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn vertex_count(&self) -> usize {
        self.measure.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn coordinates(&self) -> Option<&[Vec<f64>]> {
        self.coordinates.as_deref()
    }

    /// Lattice spacing for grid-built spaces.
    pub fn spacing(&self) -> Option<f64> {
        self.spacing
    }

    /// `(neighbor, edge index)` pairs of vertex `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet::full(self.vertex_count())
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { index: v, len: self.vertex_count() })
        }
    }

    pub fn check_set(&self, set: &VertexSet) -> Result<()> {
        match set.as_slice().last() {
            Some(&v) => self.check_vertex(v),
            None => Ok(()),
        }
    }

    /// Shortest edge length; the sphere half-width on non-grid graphs.
    pub fn min_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    /// Same graph with a different exponent. Grid conductances depend on
    /// `p`, so grid-built spaces must be rebuilt instead.
    pub fn with_exponent(&self, p: f64) -> Result<Self> {
        if self.spacing.is_some() {
            return Err(Error::InvalidArgument(
                "grid conductances depend on p; rebuild the grid instead".into(),
            ));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("exponent p = {p} must lie in (1, inf)")));
        }
        Ok(Self { p, ..self.clone() })
    }

    /// Whether the subgraph induced on `set` is connected (empty sets are not).
    pub fn is_connected_subset(&self, set: &VertexSet) -> bool {
        let Some(start) = set.iter().next() else {
            return false;
        };
        let inside = set.mask(self.vertex_count());
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if inside[w] && !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == set.len()
    }

    /// Shortest-path distances from `center` over edge lengths.
    pub fn distances_from(&self, center: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
            }
        }

        let mut dist = vec![f64::INFINITY; self.vertex_count()];
        dist[center] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Item(0.0, center));
        while let Some(Item(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(w, k) in &self.adjacency[v] {
                let nd = d + self.edges[k].length;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Item(nd, w));
                }
            }
        }
        dist
    }

    /// Metric ball around `center`: `d < r` (open) or `d <= r` (closed).
    ///
    /// Distances equal to `r` up to accumulated rounding count as lying on
    /// the sphere, so they are excluded from open balls and included in
    /// closed ones.
    pub fn metric_ball(&self, center: usize, r: f64, closed: bool) -> Result<VertexSet> {
        self.check_vertex(center)?;
        Ok(ball_from_distances(&self.distances_from(center), r, closed))
    }

    /// Discrete sphere `{y : r - w/2 <= d(center, y) < r + w/2}` where `w`
    /// is the lattice spacing (grids) or the shortest edge length.
    pub fn sphere(&self, center: usize, r: f64) -> Result<VertexSet> {
        self.check_vertex(center)?;
        Ok(sphere_from_distances(&self.distances_from(center), r, self.sphere_width()))
    }

    pub(crate) fn sphere_width(&self) -> f64 {
        self.spacing.unwrap_or_else(|| self.min_edge_length())
    }

    /// Vertices outside `omega` joined by an edge to `omega`.
    pub fn boundary_of(&self, omega: &VertexSet) -> Result<VertexSet> {
        self.check_set(omega)?;
        if omega.is_empty() {
            return Err(Error::InvalidArgument("boundary of an empty set".into()));
        }
        let inside = omega.mask(self.vertex_count());
        Ok(omega
            .iter()
            .flat_map(|v| self.adjacency[v].iter().map(|&(w, _)| w))
            .filter(|&w| !inside[w])
            .collect())
    }

    /// Vertex table as CSV: `index,measure,x,y,...`.
    pub fn write_vertex_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let dim = self.coordinates.as_ref().and_then(|c| c.first()).map_or(0, Vec::len);
        let mut header = String::from("index,measure");
        for d in 0..dim {
            header.push(',');
            header.push_str(&axis_name(d));
        }
        writeln!(out, "{header}")?;
        for (k, m) in self.measure.iter().enumerate() {
            write!(out, "{k},{m}")?;
            if let Some(c) = &self.coordinates {
                for x in &c[k] {
                    write!(out, ",{x}")?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_file_format(&self) -> GraphFile {
        GraphFile {
            p: self.p,
            spacing: self.spacing,
            vertices: self
                .measure
                .iter()
                .enumerate()
                .map(|(index, &measure)| VertexRecord {
                    index,
                    measure,
                    coordinates: self.coordinates.as_ref().map(|c| c[index].clone()),
                })
                .collect(),
            edges: self.edges.clone(),
        }
    }

    pub fn from_file_format(file: GraphFile) -> Result<Self> {
        for (k, v) in file.vertices.iter().enumerate() {
            if v.index != k {
                return Err(Error::InvalidGraph(format!(
                    "vertex records must be listed in index order (found {} at position {k})",
                    v.index
                )));
            }
        }
        let has_coords = file.vertices.first().is_some_and(|v| v.coordinates.is_some());
        if file.vertices.iter().any(|v| v.coordinates.is_some() != has_coords) {
            return Err(Error::InvalidGraph("coordinates must be given for all vertices or none".into()));
        }
        let measure = file.vertices.iter().map(|v| v.measure).collect();
        let coordinates =
            has_coords.then(|| file.vertices.into_iter().map(|v| v.coordinates.unwrap()).collect());
        let mut space = Self::from_parts(file.p, measure, file.edges, coordinates)?;
        if let Some(h) = file.spacing {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidGraph(format!("invalid spacing {h}")));
            }
            space.spacing = Some(h);
        }
        Ok(space)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file_format())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file_format(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn axis_name(d: usize) -> String {
    match d {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        _ => format!("x{d}"),
    }
}

fn slack(r: f64) -> f64 {
    1e-12 * r.abs().max(1e-300)
}

pub(crate) fn ball_from_distances(dist: &[f64], r: f64, closed: bool) -> VertexSet {
    let filter = |d: f64| {
        if r == f64::INFINITY {
            d.is_finite()
        } else if closed {
            d <= r + slack(r)
        } else {
            d < r - slack(r)
        }
    };
    VertexSet(dist.iter().enumerate().filter(|(_, &d)| filter(d)).map(|(k, _)| k).collect())
}

pub(crate) fn sphere_from_distances(dist: &[f64], r: f64, width: f64) -> VertexSet {
    let (lo, hi) = (r - 0.5 * width, r + 0.5 * width);
    VertexSet(
        dist.iter()
            .enumerate()
            .filter(|(_, &d)| d >= lo - slack(lo) && d < hi - slack(hi))
            .map(|(k, _)| k)
            .collect(),
    )
}

/// On-disk graph document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub index: usize,
    pub measure: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<f64>>,
}

/// Lattice discretization of a weighted box.
///
/// Vertices sit at `lower + k h`, first axis varying fastest; each vertex
/// carries measure `w(x) h^n` and nearest-neighbour edges get length `h`
/// and conductance `(w_i + w_j)/2 * h^(n-p)`, so the edge energy is the
/// axis-direction Riemann sum of `int w |grad u|^p dx`.
pub fn build_grid(bounds: &GridBox, h: f64, weight: &GridWeight, p: f64) -> Result<WeightedGraphSpace> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("spacing h = {h} must be positive")));
    }
    let dim = bounds.dim();
    let counts: Vec<usize> = bounds
        .lower
        .iter()
        .zip(&bounds.upper)
        .map(|(l, u)| ((u - l) / h + 1e-9).floor() as usize + 1)
        .collect();
    if let Some((axis, &count)) = counts.iter().enumerate().find(|(_, &c)| c < 2) {
        return Err(Error::DegenerateGrid { axis, count });
    }
    let total: usize = counts.iter().product();
    let mut strides = vec![1usize; dim];
    for d in 1..dim {
        strides[d] = strides[d - 1] * counts[d - 1];
    }

    let mut coords = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for v in 0..total {
        let x: Vec<f64> = (0..dim)
            .map(|d| bounds.lower[d] + ((v / strides[d]) % counts[d]) as f64 * h)
            .collect();
        let w = weight.eval(&x);
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::NonPositiveWeight { vertex: v, value: w });
        }
        weights.push(w);
        coords.push(x);
    }

    let cell = h.powi(dim as i32);
    let scale = h.powf(dim as f64 - p);
    let mut edges = Vec::with_capacity(total * dim);
    for v in 0..total {
        for d in 0..dim {
            if (v / strides[d]) % counts[d] + 1 < counts[d] {
                let w = v + strides[d];
                edges.push(Edge {
                    i: v,
                    j: w,
                    length: h,
                    conductance: 0.5 * (weights[v] + weights[w]) * scale,
                });
            }
        }
    }
    let measure = weights.iter().map(|w| w * cell).collect();
    let mut space = WeightedGraphSpace::from_parts(p, measure, edges, Some(coords))?;
    space.spacing = Some(h);
    Ok(space)
}

/// Path graph `0 - 1 - ... - N` with edge `k` joining `k` and `k+1`.
pub fn build_path(conductances: &[f64], lengths: &[f64], measures: &[f64], p: f64) -> Result<WeightedGraphSpace> {
    if conductances.is_empty() {
        return Err(Error::InvalidGraph("path needs at least one edge".into()));
    }
    if lengths.len() != conductances.len() || measures.len() != conductances.len() + 1 {
        return Err(Error::InvalidGraph(format!(
            "path with {} conductances needs as many lengths (got {}) and one more measure (got {})",
            conductances.len(),
            lengths.len(),
            measures.len()
        )));
    }
    let edges = conductances
        .iter()
        .zip(lengths)
        .enumerate()
        .map(|(k, (&c, &l))| Edge { i: k, j: k + 1, length: l, conductance: c })
        .collect();
    WeightedGraphSpace::from_parts(p, measures.to_vec(), edges, None)
}

/// Path with unit lengths and unit measures.
pub fn unit_path(conductances: &[f64], p: f64) -> Result<WeightedGraphSpace> {
    let n = conductances.len();
    build_path(conductances, &vec![1.0; n], &vec![1.0; n + 1], p)
}
