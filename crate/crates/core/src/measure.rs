//! Atomic surrogates for singular measures: self-similar (IFS) attractors, spheres,
//! circles, Lipschitz graphs, unions and weighted variants, together with an empirical
//! estimate of the Ahlfors regularity constants.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Cap on the number of atoms a discretization may produce.
pub const MAX_ATOMS: usize = 1 << 22;

/// Function values of a Lipschitz graph map ℝ^d → ℝ^{N-d} on a uniform grid over the base box.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphTable {
    /// Grid nodes per base axis, each ≥ 2; node (i_1, …, i_d) is stored with i_1 fastest.
    pub nodes_per_axis: Vec<usize>,
    /// `N - d` values per node, node after node.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    /// Equal-ratio similitudes x ↦ ratio·x + offset, with total mass `mass`.
    Ifs { ratio: f64, offsets: Vec<Vec<f64>>, mass: f64 },
    /// Surface measure on the sphere of given radius centered at the origin.
    Sphere { ambient_dim: usize, radius: f64 },
    /// Arclength on a circle centered at the origin in the coordinate plane `plane`.
    Circle { ambient_dim: usize, radius: f64, plane: (usize, usize) },
    /// Surface measure on the graph y = f(x) over the box `domain` ⊂ ℝ^d.
    LipschitzGraph { base_dim: usize, ambient_dim: usize, table: GraphTable, domain: Vec<(f64, f64)> },
    /// Disjoint union; parts must be at least `separation` apart.
    Union { parts: Vec<MeasureSpec>, separation: f64 },
    /// `base` with atom weights multiplied by a positive density table.
    Weighted { base: Box<MeasureSpec>, density: Vec<f64> },
}

impl MeasureSpec {
    /// Middle-thirds Cantor set on [0, 1] with unit mass.
    pub fn middle_thirds_cantor() -> Self {
        MeasureSpec::Ifs { ratio: 1.0 / 3.0, offsets: vec![vec![0.0], vec![2.0 / 3.0]], mass: 1.0 }
    }

    /// Four-corner planar Cantor dust in [0, 1]² with ratio 1/3 and unit mass.
    pub fn cantor_dust() -> Self {
        let o = 2.0 / 3.0;
        MeasureSpec::Ifs {
            ratio: 1.0 / 3.0,
            offsets: vec![vec![0.0, 0.0], vec![o, 0.0], vec![0.0, o], vec![o, o]],
            mass: 1.0,
        }
    }

    pub fn unit_sphere() -> Self {
        MeasureSpec::Sphere { ambient_dim: 3, radius: 1.0 }
    }

    pub fn unit_circle() -> Self {
        MeasureSpec::Circle { ambient_dim: 2, radius: 1.0, plane: (0, 1) }
    }

    pub fn ambient_dim(&self) -> Result<usize> {
        match self {
            MeasureSpec::Ifs { offsets, .. } => offsets
                .first()
                .map(Vec::len)
                .ok_or_else(|| invalid("IFS needs at least one map")),
            MeasureSpec::Sphere { ambient_dim, .. }
            | MeasureSpec::Circle { ambient_dim, .. }
            | MeasureSpec::LipschitzGraph { ambient_dim, .. } => Ok(*ambient_dim),
            MeasureSpec::Union { parts, .. } => parts
                .first()
                .ok_or_else(|| invalid("union needs at least one part"))?
                .ambient_dim(),
            MeasureSpec::Weighted { base, .. } => base.ambient_dim(),
        }
    }

    /// Hausdorff dimension s of the support.
    pub fn nominal_dim(&self) -> Result<f64> {
        match self {
            MeasureSpec::Ifs { ratio, offsets, .. } => {
                Ok((offsets.len() as f64).ln() / (1.0 / ratio).ln())
            }
            MeasureSpec::Sphere { ambient_dim, .. } => Ok(*ambient_dim as f64 - 1.0),
            MeasureSpec::Circle { .. } => Ok(1.0),
            MeasureSpec::LipschitzGraph { base_dim, .. } => Ok(*base_dim as f64),
            MeasureSpec::Union { parts, .. } => {
                let mut s: f64 = 0.0;
                for p in parts {
                    s = s.max(p.nominal_dim()?);
                }
                Ok(s)
            }
            MeasureSpec::Weighted { base, .. } => base.nominal_dim(),
        }
    }

    /// Total mass when it is known independently of the discretization.
    pub fn declared_mass(&self) -> Option<f64> {
        match self {
            MeasureSpec::Ifs { mass, .. } => Some(*mass),
            MeasureSpec::Sphere { ambient_dim, radius } => {
                let d = *ambient_dim;
                Some(crate::special::unit_sphere_area(d) * radius.powi(d as i32 - 1))
            }
            MeasureSpec::Circle { radius, .. } => Some(2.0 * PI * radius),
            MeasureSpec::Union { parts, .. } => {
                parts.iter().map(MeasureSpec::declared_mass).sum::<Option<f64>>()
            }
            MeasureSpec::LipschitzGraph { .. } | MeasureSpec::Weighted { .. } => None,
        }
    }
}

/// Finite weighted point cloud standing in for a singular measure.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    ambient_dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    nominal_dim: f64,
    level: usize,
    diam: f64,
}

impl AtomicMeasure {
    pub fn new(
        ambient_dim: usize,
        positions: Vec<Vec<f64>>,
        weights: Vec<f64>,
        nominal_dim: f64,
        level: usize,
    ) -> Result<Self> {
        if positions.len() != weights.len() {
            return Err(Error::Dimension("positions and weights differ in length".into()));
        }
        if positions.iter().any(|p| p.len() != ambient_dim) {
            return Err(Error::Dimension(format!("positions must have {ambient_dim} coordinates")));
        }
        let coords = positions.concat();
        Self::from_flat(ambient_dim, coords, weights, nominal_dim, level)
    }

    fn from_flat(
        ambient_dim: usize,
        coords: Vec<f64>,
        weights: Vec<f64>,
        nominal_dim: f64,
        level: usize,
    ) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(invalid("ambient dimension must be positive"));
        }
        if weights.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(invalid(format!("atom weights must be positive and finite, got {w}")));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("atom position".into()));
        }
        if !(nominal_dim > 0.0 && nominal_dim <= ambient_dim as f64) {
            return Err(invalid(format!("nominal dimension {nominal_dim} outside (0, {ambient_dim}]")));
        }
        let mut m = AtomicMeasure { ambient_dim, coords, weights, nominal_dim, level, diam: 0.0 };
        m.diam = m.compute_diam();
        Ok(m)
    }

    fn compute_diam(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0_f64;
        for i in 0..n {
            for j in 0..i {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn positions(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.ambient_dim)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn nominal_dim(&self) -> f64 {
        self.nominal_dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn diam(&self) -> f64 {
        self.diam
    }

    /// Sum of weights in atom order.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(self.position(i), self.position(j))
    }

    /// Distance from each atom to its nearest other atom (infinite for a single atom).
    pub fn nearest_neighbor_distances(&self) -> Vec<f64> {
        let n = self.len();
        let mut nn = vec![f64::INFINITY; n];
        for i in 0..n {
            for j in 0..i {
                let d = self.distance(i, j);
                nn[i] = nn[i].min(d);
                nn[j] = nn[j].min(d);
            }
        }
        nn
    }

    /// Integral of a function table against the measure, ∫ f dμ.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.len() {
            return Err(Error::Dimension("table length differs from atom count".into()));
        }
        Ok(self.weights.iter().zip(f).map(|(w, v)| w * v).sum())
    }

    /// Bounding box as (lower, upper) corners.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.ambient_dim];
        let mut hi = vec![f64::NEG_INFINITY; self.ambient_dim];
        for p in self.positions() {
            for k in 0..self.ambient_dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Concatenate two measures living in the same ambient space.
    pub fn union(&self, other: &AtomicMeasure) -> Result<AtomicMeasure> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::Dimension("union of measures in different ambient spaces".into()));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        Self::from_flat(
            self.ambient_dim,
            coords,
            weights,
            self.nominal_dim.max(other.nominal_dim),
            self.level.max(other.level),
        )
    }

    /// CSV with header `x1,...,xN,weight`, full round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for k in 1..=self.ambient_dim {
            let _ = write!(out, "x{k},");
        }
        out.push_str("weight\n");
        for (p, w) in self.positions().zip(&self.weights) {
            for x in p {
                let _ = write!(out, "{x:?},");
            }
            let _ = writeln!(out, "{w:?}");
        }
        out
    }

    /// Parse the CSV written by [`AtomicMeasure::to_csv`].
    pub fn from_csv(text: &str, nominal_dim: f64, level: usize) -> Result<AtomicMeasure> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(Error::EmptyMeasure)?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.last() != Some(&"weight") || cols.len() < 2 {
            return Err(Error::Config(format!("bad atom CSV header: {header}")));
        }
        let dim = cols.len() - 1;
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for line in lines {
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad atom CSV row `{line}`: {e}")))?;
            if vals.len() != dim + 1 {
                return Err(Error::Config(format!("row has {} fields, expected {}", vals.len(), dim + 1)));
            }
            coords.extend_from_slice(&vals[..dim]);
            weights.push(vals[dim]);
        }
        Self::from_flat(dim, coords, weights, nominal_dim, level)
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Build the atomic surrogate of `spec` at construction depth `level`.
///
/// For IFS specs `level` is the cylinder depth; for spheres and circles it is the atom
/// count; for Lipschitz graphs each base axis is split into 2^level cells.
pub fn discretize(spec: &MeasureSpec, level: usize) -> Result<AtomicMeasure> {
    let s = spec.nominal_dim()?;
    let n_dim = spec.ambient_dim()?;
    if !(s > 0.0 && s <= n_dim as f64) {
        return Err(Error::UnsupportedMeasure(format!("dimension {s} outside (0, {n_dim}]")));
    }
    match spec {
        MeasureSpec::Ifs { ratio, offsets, mass } => discretize_ifs(*ratio, offsets, *mass, level),
        MeasureSpec::Sphere { ambient_dim, radius } => discretize_sphere(*ambient_dim, *radius, level),
        MeasureSpec::Circle { ambient_dim, radius, plane } => {
            discretize_circle(*ambient_dim, *radius, *plane, level)
        }
        MeasureSpec::LipschitzGraph { base_dim, ambient_dim, table, domain } => {
            discretize_graph(*base_dim, *ambient_dim, table, domain, level)
        }
        MeasureSpec::Union { parts, separation } => {
            if parts.is_empty() {
                return Err(Error::UnsupportedMeasure("empty union".into()));
            }
            let pieces = parts.iter().map(|p| discretize(p, level)).collect::<Result<Vec<_>>>()?;
            for (a, pa) in pieces.iter().enumerate() {
                for pb in &pieces[..a] {
                    if pa.ambient_dim() != pb.ambient_dim() {
                        return Err(Error::UnsupportedMeasure("union parts in different spaces".into()));
                    }
                    let gap = set_distance(pa, pb);
                    if gap < *separation {
                        return Err(Error::UnsupportedMeasure(format!(
                            "union parts are {gap} apart, below the declared separation {separation}"
                        )));
                    }
                }
            }
            let mut out = pieces[0].clone();
            for p in &pieces[1..] {
                out = out.union(p)?;
            }
            out.level = level;
            Ok(out)
        }
        MeasureSpec::Weighted { base, density } => {
            let m = discretize(base, level)?;
            transform(&m, &Transform::Weight(density.clone()))
        }
    }
}

fn set_distance(a: &AtomicMeasure, b: &AtomicMeasure) -> f64 {
    let mut best = f64::INFINITY;
    for p in a.positions() {
        for q in b.positions() {
            best = best.min(dist(p, q));
        }
    }
    best
}

fn discretize_ifs(ratio: f64, offsets: &[Vec<f64>], mass: f64, level: usize) -> Result<AtomicMeasure> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::UnsupportedMeasure(format!("IFS ratio {ratio} outside (0, 1)")));
    }
    if !(mass > 0.0) {
        return Err(Error::UnsupportedMeasure("IFS mass must be positive".into()));
    }
    let m = offsets.len();
    let dim = offsets.first().map(Vec::len).unwrap_or(0);
    if m == 0 || dim == 0 || offsets.iter().any(|o| o.len() != dim) {
        return Err(Error::UnsupportedMeasure("IFS offsets must be nonempty with equal dimension".into()));
    }
    let count = (m as u128).checked_pow(level as u32).filter(|c| *c <= MAX_ATOMS as u128);
    let count = count.ok_or_else(|| {
        Error::UnsupportedMeasure(format!("{m}^{level} atoms exceeds the cap of {MAX_ATOMS}"))
    })? as usize;

    // the attractor's bounding box is spanned by the maps' fixed points
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for o in offsets {
        for k in 0..dim {
            let fixed = o[k] / (1.0 - ratio);
            lo[k] = lo[k].min(fixed);
            hi[k] = hi[k].max(fixed);
        }
    }
    let mut pts: Vec<f64> = (0..dim).map(|k| 0.5 * (lo[k] + hi[k])).collect();
    for _ in 0..level {
        let mut next = Vec::with_capacity(pts.len() * m);
        for o in offsets {
            for p in pts.chunks_exact(dim) {
                next.extend(p.iter().zip(o).map(|(x, b)| ratio * x + b));
            }
        }
        pts = next;
    }
    debug_assert_eq!(pts.len(), count * dim);
    let w = mass / count as f64;
    let s = (m as f64).ln() / (1.0 / ratio).ln();
    AtomicMeasure::from_flat(dim, pts, vec![w; count], s, level)
}

fn discretize_sphere(ambient_dim: usize, radius: f64, n: usize) -> Result<AtomicMeasure> {
    if !(radius > 0.0) {
        return Err(Error::UnsupportedMeasure("sphere radius must be positive".into()));
    }
    match ambient_dim {
        2 => discretize_circle(2, radius, (0, 1), n),
        3 => {
            if n == 0 {
                return Err(Error::EmptyMeasure);
            }
            let golden = PI * (3.0 - 5f64.sqrt());
            let mut coords = Vec::with_capacity(3 * n);
            for i in 0..n {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                coords.extend([radius * r * phi.cos(), radius * r * phi.sin(), radius * z]);
            }
            let w = 4.0 * PI * radius * radius / n as f64;
            AtomicMeasure::from_flat(3, coords, vec![w; n], 2.0, n)
        }
        d => Err(Error::UnsupportedMeasure(format!("sphere discretization in dimension {d}"))),
    }
}

fn discretize_circle(ambient_dim: usize, radius: f64, plane: (usize, usize), n: usize) -> Result<AtomicMeasure> {
    if ambient_dim < 2 || plane.0 >= ambient_dim || plane.1 >= ambient_dim || plane.0 == plane.1 {
        return Err(Error::UnsupportedMeasure(format!(
            "circle plane {plane:?} invalid in dimension {ambient_dim}"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::UnsupportedMeasure("circle radius must be positive".into()));
    }
    if n == 0 {
        return Err(Error::EmptyMeasure);
    }
    let mut coords = vec![0.0; ambient_dim * n];
    for k in 0..n {
        let angle = 2.0 * PI * k as f64 / n as f64;
        coords[k * ambient_dim + plane.0] = radius * angle.cos();
        coords[k * ambient_dim + plane.1] = radius * angle.sin();
    }
    let w = 2.0 * PI * radius / n as f64;
    AtomicMeasure::from_flat(ambient_dim, coords, vec![w; n], 1.0, n)
}

fn discretize_graph(
    base_dim: usize,
    ambient_dim: usize,
    table: &GraphTable,
    domain: &[(f64, f64)],
    level: usize,
) -> Result<AtomicMeasure> {
    if base_dim == 0 || base_dim >= ambient_dim {
        return Err(Error::UnsupportedMeasure(format!(
            "Lipschitz graph needs 0 < d < N, got d = {base_dim}, N = {ambient_dim}"
        )));
    }
    let codim = ambient_dim - base_dim;
    if domain.len() != base_dim || table.nodes_per_axis.len() != base_dim {
        return Err(Error::UnsupportedMeasure("graph domain/table dimension mismatch".into()));
    }
    if domain.iter().any(|(a, b)| !(b > a)) || table.nodes_per_axis.iter().any(|n| *n < 2) {
        return Err(Error::UnsupportedMeasure("degenerate graph domain or table".into()));
    }
    let nodes: usize = table.nodes_per_axis.iter().product();
    if table.values.len() != nodes * codim {
        return Err(Error::UnsupportedMeasure(format!(
            "graph table needs {} values, has {}",
            nodes * codim,
            table.values.len()
        )));
    }
    let per_axis = 1usize << level;
    let count = per_axis.checked_pow(base_dim as u32).filter(|c| *c <= MAX_ATOMS);
    let count = count.ok_or_else(|| Error::UnsupportedMeasure("graph level too deep".into()))?;
    let h: Vec<f64> = domain.iter().map(|(a, b)| (b - a) / per_axis as f64).collect();
    let cell_volume: f64 = h.iter().product();

    let mut coords = Vec::with_capacity(count * ambient_dim);
    let mut weights = Vec::with_capacity(count);
    let mut idx = vec![0usize; base_dim];
    for _ in 0..count {
        let x: Vec<f64> =
            (0..base_dim).map(|k| domain[k].0 + (idx[k] as f64 + 0.5) * h[k]).collect();
        let y = interpolate(table, domain, &x, codim);
        // secant Jacobian across the cell, columns ∂f/∂x_k
        let mut jac = vec![0.0; codim * base_dim];
        for k in 0..base_dim {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += 0.5 * h[k];
            xm[k] -= 0.5 * h[k];
            let (yp, ym) = (interpolate(table, domain, &xp, codim), interpolate(table, domain, &xm, codim));
            for c in 0..codim {
                jac[c * base_dim + k] = (yp[c] - ym[c]) / h[k];
            }
        }
        // area element sqrt(det(I + JᵀJ))
        let mut gram = vec![0.0; base_dim * base_dim];
        for a in 0..base_dim {
            for b in 0..base_dim {
                let mut g = if a == b { 1.0 } else { 0.0 };
                for c in 0..codim {
                    g += jac[c * base_dim + a] * jac[c * base_dim + b];
                }
                gram[a * base_dim + b] = g;
            }
        }
        weights.push(cell_volume * determinant(&mut gram, base_dim).sqrt());
        coords.extend_from_slice(&x);
        coords.extend_from_slice(&y);
        for k in 0..base_dim {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
        }
    }
    AtomicMeasure::from_flat(ambient_dim, coords, weights, base_dim as f64, level)
}

/// Multilinear interpolation of the table at base point `x` (clamped into the domain).
fn interpolate(table: &GraphTable, domain: &[(f64, f64)], x: &[f64], codim: usize) -> Vec<f64> {
    let d = x.len();
    let mut base = vec![0usize; d];
    let mut frac = vec![0.0; d];
    for k in 0..d {
        let nk = table.nodes_per_axis[k];
        let t = ((x[k] - domain[k].0) / (domain[k].1 - domain[k].0)).clamp(0.0, 1.0) * (nk - 1) as f64;
        let i = (t.floor() as usize).min(nk - 2);
        base[k] = i;
        frac[k] = t - i as f64;
    }
    let mut out = vec![0.0; codim];
    for corner in 0..(1usize << d) {
        let mut weight = 1.0;
        let mut flat = 0;
        let mut stride = 1;
        for k in 0..d {
            let bit = (corner >> k) & 1;
            weight *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
            flat += (base[k] + bit) * stride;
            stride *= table.nodes_per_axis[k];
        }
        if weight == 0.0 {
            continue;
        }
        for c in 0..codim {
            out[c] += weight * table.values[flat * codim + c];
        }
    }
    out
}

fn determinant(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs())).unwrap();
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for i in col + 1..n {
            let f = a[i * n + col] / p;
            for k in col..n {
                a[i * n + k] -= f * a[col * n + k];
            }
        }
    }
    det
}

/// Geometric operations on an atomic measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    /// x ↦ t·x with weights w ↦ t^s·w.
    Scale { t: f64, weight_exponent: f64 },
    Translate(Vec<f64>),
    /// Keep atoms inside the closed box [lower, upper].
    Restrict { lower: Vec<f64>, upper: Vec<f64> },
    /// Multiply weights by a strictly positive table.
    Weight(Vec<f64>),
}

pub fn transform(m: &AtomicMeasure, op: &Transform) -> Result<AtomicMeasure> {
    let dim = m.ambient_dim;
    match op {
        Transform::Scale { t, weight_exponent } => {
            if !(*t > 0.0) || !t.is_finite() {
                return Err(invalid(format!("scale factor must be positive, got {t}")));
            }
            let factor = t.powf(*weight_exponent);
            let mut out = m.clone();
            out.coords.iter_mut().for_each(|x| *x *= t);
            out.weights.iter_mut().for_each(|w| *w *= factor);
            out.diam = m.diam * t;
            if out.weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
                return Err(Error::NonFinite("scaled weight".into()));
            }
            Ok(out)
        }
        Transform::Translate(v) => {
            if v.len() != dim {
                return Err(Error::Dimension("translation vector dimension".into()));
            }
            let mut out = m.clone();
            for p in out.coords.chunks_exact_mut(dim) {
                p.iter_mut().zip(v).for_each(|(x, d)| *x += d);
            }
            Ok(out)
        }
        Transform::Restrict { lower, upper } => {
            if lower.len() != dim || upper.len() != dim {
                return Err(Error::Dimension("restriction box dimension".into()));
            }
            let mut coords = Vec::new();
            let mut weights = Vec::new();
            for (p, w) in m.positions().zip(&m.weights) {
                if p.iter().enumerate().all(|(k, x)| *x >= lower[k] && *x <= upper[k]) {
                    coords.extend_from_slice(p);
                    weights.push(*w);
                }
            }
            AtomicMeasure::from_flat(dim, coords, weights, m.nominal_dim, m.level)
        }
        Transform::Weight(v) => {
            if v.len() != m.len() {
                return Err(Error::Dimension("density table length differs from atom count".into()));
            }
            if let Some(bad) = v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
                return Err(invalid(format!(
                    "density values must be positive (signed densities belong to the operator), got {bad}"
                )));
            }
            let mut out = m.clone();
            out.weights.iter_mut().zip(v).for_each(|(w, x)| *w *= x);
            Ok(out)
        }
    }
}

/// Which atoms serve as ball centers in [`ahlfors_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterRule {
    All,
    /// Every ⌈n/max⌉-th atom when there are more than `max` atoms.
    Subsample(usize),
}

impl Default for CenterRule {
    fn default() -> Self {
        CenterRule::Subsample(256)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AhlforsReport {
    pub s: f64,
    /// Largest sampled μ(B(X, r))/r^s.
    pub a_hat: f64,
    /// Smallest sampled μ(B(X, r))/r^s.
    pub b_hat: f64,
    pub radii_sampled: Vec<f64>,
    /// Set when, at the smallest radius, some ball's mass is ≥ 99% one atom.
    pub degenerate_flag: bool,
}

/// Geometric grid of `count` radii from the minimal atom spacing up to the diameter.
pub fn default_radii(m: &AtomicMeasure, count: usize) -> Vec<f64> {
    let lo = m.nearest_neighbor_distances().into_iter().fold(f64::INFINITY, f64::min);
    let hi = m.diam();
    if !(lo.is_finite() && hi > lo) || count < 2 {
        return vec![hi.max(lo.min(1.0)).max(f64::MIN_POSITIVE)];
    }
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Empirical Ahlfors constants: extreme values of μ(B(X, r))/r^s over sampled centers and radii.
pub fn ahlfors_estimate(
    m: &AtomicMeasure,
    s: f64,
    radii: &[f64],
    centers: CenterRule,
) -> Result<AhlforsReport> {
    if m.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    if radii.is_empty() {
        return Err(invalid("at least one radius is required"));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(invalid(format!("radii must be positive, got {r}")));
    }
    if m.diam() > 0.0 {
        if let Some(r) = radii.iter().find(|r| **r > m.diam() * (1.0 + 1e-12)) {
            return Err(invalid(format!("radius {r} exceeds the diameter {}", m.diam())));
        }
    }
    let n = m.len();
    let stride = match centers {
        CenterRule::All => 1,
        CenterRule::Subsample(max) => n.div_ceil(max.max(1)),
    };
    let r_min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let mut a_hat = f64::NEG_INFINITY;
    let mut b_hat = f64::INFINITY;
    let mut degenerate = false;
    let mut order: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut prefix = Vec::with_capacity(n);
    for c in (0..n).step_by(stride) {
        order.clear();
        order.extend((0..n).map(|j| (m.distance(c, j), m.weight(j))));
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        prefix.clear();
        let mut acc = 0.0;
        for (_, w) in &order {
            acc += w;
            prefix.push(acc);
        }
        for &r in radii {
            let inside = order.partition_point(|(d, _)| *d <= r);
            let mass = prefix[inside - 1];
            let ratio = mass / r.powf(s);
            a_hat = a_hat.max(ratio);
            b_hat = b_hat.min(ratio);
            if r == r_min {
                let heaviest = order[..inside].iter().map(|x| x.1).fold(0.0, f64::max);
                if heaviest >= 0.99 * mass {
                    degenerate = true;
                }
            }
        }
    }
    Ok(AhlforsReport { s, a_hat, b_hat, radii_sampled: radii.to_vec(), degenerate_flag: degenerate })
}
