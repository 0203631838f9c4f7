//! Stopping-time cubes of equal J-mass and their splitting into families of pairwise
//! disjoint cubes (the constructive Besicovitch step), with audits of the covering bounds.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::measure::AtomicMeasure;

/// Slack used when deciding that two open cubes are disjoint or that a point lies in a cube.
pub const GEOMETRY_SLACK: f64 = 1e-12;

/// Ceiling on the number of families observed for the greedy construction, per dimension.
pub fn kappa_impl(dim: usize) -> Option<usize> {
    match dim {
        1 => Some(2),
        2 => Some(6),
        3 => Some(20),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub edge: f64,
    pub family_id: Option<usize>,
}

impl Cube {
    pub fn new(center: Vec<f64>, edge: f64) -> Self {
        Cube { center, edge, family_id: None }
    }

    /// Closed-cube membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        let h = 0.5 * self.edge;
        self.center.iter().zip(x).all(|(c, xi)| (xi - c).abs() <= h + GEOMETRY_SLACK * h.max(1.0))
    }

    /// Whether the open cubes are disjoint (some axis separates them).
    pub fn disjoint_from(&self, other: &Cube) -> bool {
        let reach = 0.5 * (self.edge + other.edge);
        self.center
            .iter()
            .zip(&other.center)
            .any(|(a, b)| (a - b).abs() >= reach - GEOMETRY_SLACK)
    }

    fn lower_corner(&self) -> Vec<f64> {
        self.center.iter().map(|c| c - 0.5 * self.edge).collect()
    }
}

/// Which set function J drives the stopping rule; both are normalized to J(𝓜) = 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JRegime {
    /// J(E) ∝ ∫_E V^θ dμ.
    Subcritical { theta: f64 },
    /// J(E) ∝ (∫_E V dμ)^θ μ(E)^{1−θ}; the constant factor drops out in the normalization.
    Supercritical { theta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingCube {
    pub cube: Cube,
    pub j_value: f64,
    /// Zero-edge cube on an atom whose own J-mass reaches the quota.
    pub degenerate: bool,
    /// Whether `j_value` lies in [(1−tol)/N, (1+tol)/N].
    pub in_band: bool,
}

struct JMass<'a> {
    regime: JRegime,
    w: &'a [f64],
    v: &'a [f64],
    norm: f64,
}

impl JMass<'_> {
    fn raw(&self, mass: f64, vmass: f64) -> f64 {
        match self.regime {
            JRegime::Subcritical { .. } => vmass,
            JRegime::Supercritical { theta } => {
                if mass == 0.0 {
                    0.0
                } else {
                    vmass.powf(theta) * mass.powf(1.0 - theta)
                }
            }
        }
    }

    /// (μ-weight, V-weight) contribution of atom i to the running sums.
    fn parts(&self, i: usize) -> (f64, f64) {
        match self.regime {
            JRegime::Subcritical { theta } => (self.w[i], self.w[i] * self.v[i].powf(theta)),
            JRegime::Supercritical { .. } => (self.w[i], self.w[i] * self.v[i]),
        }
    }

    fn value(&self, mass: f64, vmass: f64) -> f64 {
        self.raw(mass, vmass) / self.norm
    }
}

/// For each atom Y, the smallest cube centered at Y with J(Q) ≥ 1/N.
///
/// Cube growth is exact on the atom list: the edge is twice the sup-distance of the atom
/// whose inclusion first reaches the quota, so J lands in [1/N, 1/N + jump]. Cubes with
/// identical center and edge (coincident atoms) are reported once.
pub fn stopping_cubes(
    m: &AtomicMeasure,
    v: &[f64],
    regime: JRegime,
    target_n: usize,
    tol: f64,
) -> Result<Vec<StoppingCube>> {
    let n = m.len();
    if v.len() != n {
        return Err(Error::Dimension("density table length differs from atom count".into()));
    }
    if let Some(x) = v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(invalid(format!("covering densities must be nonnegative, got {x}")));
    }
    if target_n == 0 || !(tol > 0.0 && tol < 0.5) {
        return Err(invalid("need target_N >= 1 and tol in (0, 1/2)"));
    }
    let theta = match regime {
        JRegime::Subcritical { theta } | JRegime::Supercritical { theta } => theta,
    };
    if !(theta > 0.0) {
        return Err(invalid("theta must be positive"));
    }
    let mut jm = JMass { regime, w: m.weights(), v, norm: 1.0 };
    let (tm, tv) = (0..n).map(|i| jm.parts(i)).fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let total = jm.raw(tm, tv);
    if !(total > 0.0) {
        return Err(invalid("J-mass of the whole support vanishes"));
    }
    jm.norm = total / 2.0;
    let quota = 1.0 / target_n as f64;
    let upper = (1.0 + tol) * quota;
    let lower = (1.0 - tol) * quota;

    let mut out: Vec<StoppingCube> = Vec::new();
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(n);
    for c in 0..n {
        let center = m.position(c);
        let (cm, cv) = jm.parts(c);
        let own = jm.value(cm, cv);
        if own > upper {
            match regime {
                JRegime::Subcritical { .. } => return Err(Error::HeavyAtom { index: c, mass: own }),
                JRegime::Supercritical { .. } => {
                    out.push(StoppingCube { cube: Cube::new(center.to_vec(), 0.0), j_value: own, degenerate: true, in_band: false });
                    continue;
                }
            }
        }
        order.clear();
        order.extend((0..n).map(|j| {
            let d = center.iter().zip(m.position(j)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (d, j)
        }));
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (mut am, mut av) = (0.0, 0.0);
        let mut idx = 0;
        let mut found = None;
        while idx < n {
            // atoms at equal distance enter the closed cube together
            let d = order[idx].0;
            while idx < n && order[idx].0 == d {
                let p = jm.parts(order[idx].1);
                am += p.0;
                av += p.1;
                idx += 1;
            }
            let j = jm.value(am, av);
            if j >= quota * (1.0 - 1e-12) {
                found = Some((d, j));
                break;
            }
        }
        // J(𝓜) = 2 ≥ 1/N, so the loop always stops
        let (d, j) = found.expect("total J-mass exceeds every quota");
        let cube = Cube::new(center.to_vec(), 2.0 * d);
        let duplicate = out.iter().any(|s| {
            s.cube.center == cube.center && (s.cube.edge - cube.edge).abs() <= tol * cube.edge.max(f64::MIN_POSITIVE)
        });
        if !duplicate {
            out.push(StoppingCube { cube, j_value: j, degenerate: d == 0.0, in_band: j >= lower && j <= upper });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Covering {
    pub cubes: Vec<Cube>,
    pub kappa: usize,
    pub target_n: usize,
    pub j_values: Vec<f64>,
}

impl Covering {
    /// `cx1..cxN,edge,family,J` rows.
    pub fn to_csv(&self) -> String {
        let dim = self.cubes.first().map_or(0, |c| c.center.len());
        let mut out = String::new();
        for k in 1..=dim {
            let _ = write!(out, "cx{k},");
        }
        out.push_str("edge,family,J\n");
        for (c, j) in self.cubes.iter().zip(&self.j_values) {
            for x in &c.center {
                let _ = write!(out, "{x:?},");
            }
            let fam = c.family_id.map_or(String::new(), |f| f.to_string());
            let _ = writeln!(out, "{:?},{fam},{j:?}", c.edge);
        }
        out
    }
}

/// Besicovitch-type subcover of `cubes` split into families of pairwise disjoint cubes.
///
/// The cube centers stand for the support. Cubes are scanned by decreasing edge and kept when
/// their center is not yet covered; a kept cube is then dropped (smallest first) when every
/// center it contains is covered at least twice. The survivors are coloured first-fit in
/// order of their lower corners.
pub fn besicovitch_families(cubes: &[StoppingCube], target_n: usize) -> Covering {
    let points: Vec<&[f64]> = cubes.iter().map(|c| c.cube.center.as_slice()).collect();
    let mut by_size: Vec<usize> = (0..cubes.len()).collect();
    by_size.sort_by(|&a, &b| cubes[b].cube.edge.total_cmp(&cubes[a].cube.edge).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for &i in &by_size {
        let c = &cubes[i].cube;
        if !kept.iter().any(|&k| cubes[k].cube.contains(&c.center)) {
            kept.push(i);
        }
    }

    let members: Vec<Vec<usize>> = kept
        .iter()
        .map(|&k| (0..points.len()).filter(|&p| cubes[k].cube.contains(points[p])).collect())
        .collect();
    let mut count = vec![0usize; points.len()];
    for mem in &members {
        for &p in mem {
            count[p] += 1;
        }
    }
    let mut alive = vec![true; kept.len()];
    let mut small_first: Vec<usize> = (0..kept.len()).collect();
    small_first.sort_by(|&a, &b| cubes[kept[a]].cube.edge.total_cmp(&cubes[kept[b]].cube.edge).then(a.cmp(&b)));
    for s in small_first {
        if members[s].iter().all(|&p| count[p] >= 2) {
            alive[s] = false;
            for &p in &members[s] {
                count[p] -= 1;
            }
        }
    }
    let mut chosen: Vec<usize> = kept.iter().zip(&alive).filter(|(_, a)| **a).map(|(k, _)| *k).collect();
    chosen.sort_by(|&a, &b| {
        let (la, lb) = (cubes[a].cube.lower_corner(), cubes[b].cube.lower_corner());
        la.iter()
            .zip(&lb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let plain: Vec<Cube> = chosen.iter().map(|&i| cubes[i].cube.clone()).collect();
    let mut out = assign_families(plain, target_n);
    out.j_values = chosen.iter().map(|&i| cubes[i].j_value).collect();
    out
}

/// First-fit family assignment in the given order: each cube joins the lowest-indexed family
/// none of whose cubes it meets.
pub fn assign_families(mut cubes: Vec<Cube>, target_n: usize) -> Covering {
    let mut families: Vec<Vec<usize>> = Vec::new();
    for i in 0..cubes.len() {
        let slot = families
            .iter()
            .position(|f| f.iter().all(|&j| cubes[i].disjoint_from(&cubes[j])));
        match slot {
            Some(f) => {
                families[f].push(i);
                cubes[i].family_id = Some(f);
            }
            None => {
                cubes[i].family_id = Some(families.len());
                families.push(vec![i]);
            }
        }
    }
    let n = cubes.len();
    Covering { cubes, kappa: families.len().max(1), target_n, j_values: vec![f64::NAN; n] }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoveringAudit {
    pub max_multiplicity: usize,
    pub all_covered: bool,
    pub family_disjoint: bool,
    pub count_bound_ok: bool,
}

pub fn covering_audit(c: &Covering, m: &AtomicMeasure) -> CoveringAudit {
    let mut max_multiplicity = 0;
    let mut all_covered = true;
    for x in m.positions() {
        let k = c.cubes.iter().filter(|q| q.contains(x)).count();
        max_multiplicity = max_multiplicity.max(k);
        all_covered &= k > 0;
    }
    let mut family_disjoint = true;
    for (i, a) in c.cubes.iter().enumerate() {
        for b in &c.cubes[..i] {
            if a.family_id.is_none() || (a.family_id == b.family_id && !a.disjoint_from(b)) {
                family_disjoint = false;
            }
        }
    }
    if c.cubes.iter().any(|q| q.family_id.is_none()) {
        family_disjoint = false;
    }
    CoveringAudit {
        max_multiplicity,
        all_covered,
        family_disjoint,
        count_bound_ok: c.cubes.len() <= 2 * c.kappa * c.target_n,
    }
}
