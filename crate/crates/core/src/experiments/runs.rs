use std::fmt::Write as _;

use rand::Rng;

use crate::asymptotics::{
    bound_ratio_signed, exponent_theta, fit_decreasing, predict, theta_from_gap, FitResult, Regime, TheoryPrediction,
    WindowRule,
};
use crate::clr::{birman_schwinger_check, clr_scan};
use crate::covering::{besicovitch_families, covering_audit, kappa_impl, stopping_cubes, JRegime};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::linalg::{self, Matrix};
use crate::measure::{
    ahlfors_estimate, default_radii, discretize, transform, AhlforsReport, AtomicMeasure, CenterRule, Transform,
};
use crate::operators::{
    assemble_nonselfadjoint, assemble_selfadjoint, galerkin_pair, singular_values, symmetric_eigenvalues,
    weighted_kernel, NonsaShape, PeriodicBox, Sign, SpectralResult,
};

use super::config::{ExperimentConfig, ExperimentKind, ShapeConfig};
use super::report::{Flag, Report};

/// Largest atom count handed to the dense eigensolver.
pub const MAX_DENSE_ATOMS: usize = 6000;

const EIGEN_TOL: f64 = 1e-9;

/// sup_k λ_k·k^{1/θ} over a decreasing positive sequence.
pub fn sup_decay(branch: &[f64], theta: f64) -> f64 {
    branch
        .iter()
        .enumerate()
        .map(|(i, v)| v * ((i + 1) as f64).powf(1.0 / theta))
        .fold(0.0, f64::max)
}

/// Mean of (k − ½)·λ_k^θ over the window, the midpoint form of n(λ)λ^θ.
pub fn weyl_window_mean(branch: &[f64], window: (usize, usize), theta: f64) -> f64 {
    let (lo, hi) = window;
    let sum: f64 = (lo..=hi).map(|k| (k as f64 - 0.5) * branch[k - 1].powf(theta)).sum();
    sum / (hi - lo + 1) as f64
}

/// `log_k,log_lambda` rows for the positive entries of a decreasing sequence.
pub fn loglog_csv(branch: &[f64]) -> String {
    let mut out = String::from("log_k,log_lambda\n");
    for (i, v) in branch.iter().enumerate().filter(|(_, v)| **v > 0.0) {
        let _ = writeln!(out, "{:?},{:?}", ((i + 1) as f64).ln(), v.ln());
    }
    out
}

/// `count` points from `lo` to `hi`, equally spaced in log scale.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64)).collect(),
    }
}

/// |n₊(λ, T_union) − Σ n₊(λ, T_part)|·λ^θ at each λ of the grid.
pub fn localization_defect(union: &SpectralResult, parts: &[&SpectralResult], grid: &[f64], theta: f64) -> Vec<f64> {
    let count = |sr: &SpectralResult, lam: f64| sr.values.iter().filter(|v| **v > lam).count() as f64;
    grid.iter()
        .map(|&lam| {
            let split: f64 = parts.iter().map(|p| count(p, lam)).sum();
            (count(union, lam) - split).abs() * lam.powf(theta)
        })
        .collect()
}

/// (∫|V|^r dμ)^{1/r}.
pub fn lr_norm(m: &AtomicMeasure, v: &[f64], r: f64) -> Result<f64> {
    Ok(m.integrate(&v.iter().map(|x| x.abs().powf(r)).collect::<Vec<_>>())?.powf(1.0 / r))
}

/// max over k of s_{2k−1}(AB) − s_k(A)·s_k(B), all sequences descending.
pub fn ky_fan_excess(product: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (1..=a.len().min(b.len()))
        .take_while(|k| 2 * k - 1 <= product.len())
        .map(|k| product[2 * k - 2] - a[k - 1] * b[k - 1])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn ahlfors_for(m: &AtomicMeasure) -> Result<AhlforsReport> {
    ahlfors_estimate(m, m.nominal_dim(), &default_radii(m, 16), CenterRule::default())
}

fn build_measure(cfg: &ExperimentConfig, level: usize) -> Result<AtomicMeasure> {
    let m = discretize(&cfg.measure.to_spec()?, level)?;
    if m.len() > MAX_DENSE_ATOMS {
        return Err(Error::Config(format!(
            "{} atoms exceed the dense solver budget of {MAX_DENSE_ATOMS}",
            m.len()
        )));
    }
    Ok(m)
}

struct SpectrumRun {
    m: AtomicMeasure,
    sr: SpectralResult,
    branch: Vec<f64>,
    sign: Sign,
    theory: TheoryPrediction,
    fit: Option<FitResult>,
    bound_plus: Option<f64>,
    bound_minus: Option<f64>,
    row_sums: (f64, f64),
    ahlfors: AhlforsReport,
}

fn spectrum_run(cfg: &ExperimentConfig, k: &KernelSpec, level: usize, window: WindowRule) -> Result<SpectrumRun> {
    let m = build_measure(cfg, level)?;
    let v = cfg.density.table(&m, cfg.seed, 0)?;
    let op = assemble_selfadjoint(k, &m, &v, cfg.diagonal_rule())?;
    let sr = symmetric_eigenvalues(&op, EIGEN_TOL)?;
    let one_sign = v.iter().all(|x| *x >= 0.0) || v.iter().all(|x| *x <= 0.0);
    let ahlfors = ahlfors_for(&m)?;
    let theory = predict(k, &m, &v, cfg.measure.is_surface() && one_sign, Some(&ahlfors))?;
    let sign = if v.iter().any(|x| *x > 0.0) { Sign::Plus } else { Sign::Minus };
    let branch = sr.branch(sign);
    let fit = fit_decreasing(&branch, window).ok();
    let ratio = |s: Sign, b: Option<&crate::asymptotics::BoundInputs>| {
        b.map(|b| bound_ratio_signed(&sr, s, theory.theta, b.bound_k)).transpose()
    };
    let bound_plus = ratio(Sign::Plus, theory.bound_plus.as_ref())?;
    let bound_minus = ratio(Sign::Minus, theory.bound_minus.as_ref())?;
    let mat = op.matrix();
    let sums: Vec<f64> = (0..mat.rows()).map(|i| mat.row(i).iter().sum()).collect();
    let row_sums = (sums.iter().copied().fold(f64::INFINITY, f64::min), sums.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    Ok(SpectrumRun { m, sr, branch, sign, theory, fit, bound_plus, bound_minus, row_sums, ahlfors })
}

impl SpectrumRun {
    fn coefficient(&self) -> Option<f64> {
        match self.sign {
            Sign::Plus => self.theory.a_plus,
            Sign::Minus => self.theory.a_minus,
        }
        .filter(|a| *a > 0.0)
    }

    /// Whether the fitted exponent is a claim of the theory rather than a diagnostic.
    fn asymptotic(&self) -> bool {
        self.coefficient().is_some() || self.theory.regime == Regime::Supercritical
    }
}

/// Spectrum, power-law fit and comparison with theory, optionally against one coarser level.
pub fn run_spectrum_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let k = cfg.kernel_spec()?;
    let window = cfg.window()?;
    let run = spectrum_run(cfg, &k, cfg.measure.level, window)?;
    let theta = run.theory.theta;
    let checks = &cfg.checks;
    let mut r = Report::new(cfg.config_hash(), ExperimentKind::Spectrum);
    r.theory.theta = Some(theta);
    r.theory.coefficient = run.coefficient();
    r.theory.regime = Some(run.theory.regime);
    r.fit = run.fit.clone();

    r.diag("atoms", run.m.len() as f64);
    r.diag("level", run.m.level() as f64);
    r.diag("total_mass", run.m.total_mass());
    r.diag("row_sum_min", run.row_sums.0);
    r.diag("row_sum_max", run.row_sums.1);
    r.diag("ahlfors_a", run.ahlfors.a_hat);
    r.diag("ahlfors_b", run.ahlfors.b_hat);
    r.diag("lambda_max", run.branch.first().copied().unwrap_or(0.0));
    r.diag("branch_len", run.branch.len() as f64);
    let sup = sup_decay(&run.branch, theta);
    r.ratio("sup_decay", sup);
    if let Some(b) = run.bound_plus {
        r.ratio("bound_plus", b);
        r.flag("bound_plus_finite", Flag::at_least(b, 0.0));
    }
    if let Some(b) = run.bound_minus {
        r.ratio("bound_minus", b);
        r.flag("bound_minus_finite", Flag::at_least(b, 0.0));
    }
    if run.asymptotic() {
        let theta_hat = run.fit.as_ref().map_or(f64::NAN, |f| f.theta_hat);
        r.flag("theta", Flag::relative(theta_hat, theta, checks.theta_rel_tol));
    }
    if let (Some(a), Some(fit)) = (run.coefficient(), &run.fit) {
        let mean = weyl_window_mean(&run.branch, fit.window, theta);
        r.ratio("weyl_window_mean", mean);
        r.ratio("weyl_ratio", mean / a);
        r.flag("coefficient", Flag::relative(mean, a, checks.coefficient_rel_tol));
    }

    if checks.refine {
        let coarse = spectrum_run(cfg, &k, cfg.measure.coarser_level(), window)?;
        r.diag("coarse_atoms", coarse.m.len() as f64);
        let coarse_sup = sup_decay(&coarse.branch, theta);
        r.ratio("sup_decay_coarse", coarse_sup);
        if run.theory.regime == Regime::Supercritical {
            r.flag("stability_sup_decay", Flag::relative(sup, coarse_sup, checks.stability_rel_tol));
        }
        if let (Some(fine), Some(c)) = (run.bound_plus, coarse.bound_plus) {
            r.ratio("bound_plus_coarse", c);
            if run.theory.regime == Regime::Subcritical {
                r.flag("stability_bound", Flag::relative(fine, c, checks.stability_rel_tol));
            }
        }
        if run.asymptotic() {
            let hat = |f: &Option<FitResult>| f.as_ref().map_or(f64::NAN, |f| f.theta_hat);
            r.diag("theta_hat_coarse", hat(&coarse.fit));
            r.flag("stability_theta", Flag::relative(hat(&run.fit), hat(&coarse.fit), checks.stability_rel_tol));
        }
    }

    r.table("spectrum.csv", run.sr.to_csv());
    r.table("loglog.csv", loglog_csv(&run.branch));
    Ok(r)
}

/// Defect profile of one two-copy configuration.
struct LocalizationRun {
    grid: Vec<f64>,
    defect: Vec<f64>,
    n_union: Vec<usize>,
    n_parts: Vec<usize>,
    separation: f64,
}

fn localization_run(
    cfg: &ExperimentConfig,
    k: &KernelSpec,
    p1: &AtomicMeasure,
    offset: &[f64],
    theta: f64,
    points: usize,
) -> Result<LocalizationRun> {
    if offset.len() != p1.ambient_dim() {
        return Err(Error::Config(format!("offset needs {} coordinates", p1.ambient_dim())));
    }
    let p2 = transform(p1, &Transform::Translate(offset.to_vec()))?;
    let spacing = p1.nearest_neighbor_distances().into_iter().fold(0.0, f64::max);
    let mut separation = f64::INFINITY;
    for x in p1.positions() {
        for y in p2.positions() {
            separation = separation.min(crate::measure::dist(x, y));
        }
    }
    if !(separation > spacing) {
        return Err(Error::Config(format!(
            "supports overlap: separation {separation} does not exceed the atom spacing {spacing}"
        )));
    }
    let union = p1.union(&p2)?;
    if union.len() > MAX_DENSE_ATOMS {
        return Err(Error::Config(format!("{} atoms exceed the dense solver budget", union.len())));
    }
    let v1 = cfg.density.table(p1, cfg.seed, 0)?;
    let v2 = cfg.density.table(&p2, cfg.seed, 1)?;
    let v12: Vec<f64> = v1.iter().chain(&v2).copied().collect();
    let rule = cfg.diagonal_rule();
    let sr1 = symmetric_eigenvalues(&assemble_selfadjoint(k, p1, &v1, rule)?, EIGEN_TOL)?;
    let sr2 = symmetric_eigenvalues(&assemble_selfadjoint(k, &p2, &v2, rule)?, EIGEN_TOL)?;
    let sr12 = symmetric_eigenvalues(&assemble_selfadjoint(k, &union, &v12, rule)?, EIGEN_TOL)?;
    let pos = sr12.positive_branch();
    let idx = ((union.len() as f64).powf(0.6).floor() as usize).clamp(1, pos.len().max(1));
    let lam0 = *pos.get(idx - 1).ok_or_else(|| Error::Inconsistent("union operator has no positive spectrum".into()))?;
    let grid = geometric_grid(lam0, 10.0 * lam0, points);
    let defect = localization_defect(&sr12, &[&sr1, &sr2], &grid, theta);
    let count = |sr: &SpectralResult, lam: f64| sr.values.iter().filter(|v| **v > lam).count();
    let n_union = grid.iter().map(|l| count(&sr12, *l)).collect();
    let n_parts = grid.iter().map(|l| count(&sr1, *l) + count(&sr2, *l)).collect();
    Ok(LocalizationRun { grid, defect, n_union, n_parts, separation })
}

impl LocalizationRun {
    fn max(&self) -> f64 {
        self.defect.iter().copied().fold(0.0, f64::max)
    }

    fn mean(&self) -> f64 {
        self.defect.iter().sum::<f64>() / self.defect.len().max(1) as f64
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("lambda,n_union,n_parts,defect\n");
        for i in 0..self.grid.len() {
            let _ = writeln!(out, "{:?},{},{},{:?}", self.grid[i], self.n_union[i], self.n_parts[i], self.defect[i]);
        }
        out
    }
}

/// Additivity defect of the counting function for a measure and its translate.
pub fn run_localization_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let lc = cfg.localization.as_ref().expect("validated");
    let k = cfg.kernel_spec()?;
    let p1 = build_measure(cfg, cfg.measure.level)?;
    let theta = theta_from_gap(k.order_gap(), p1.nominal_dim())?;
    let main = localization_run(cfg, &k, &p1, &lc.offset, theta, lc.grid_points)?;
    let mut r = Report::new(cfg.config_hash(), ExperimentKind::Localization);
    r.theory.theta = Some(theta);
    r.diag("atoms_per_part", p1.len() as f64);
    r.diag("separation", main.separation);
    r.diag("lambda_low", main.grid[0]);
    r.diag("lambda_high", *main.grid.last().expect("grid"));
    r.ratio("defect_max", main.max());
    r.ratio("defect_mean", main.mean());
    r.flag("defect", Flag::at_most(main.max(), cfg.checks.defect_max));
    r.table("localization.csv", main.to_csv());
    if let Some(off) = &lc.compare_offset {
        let near = localization_run(cfg, &k, &p1, off, theta, lc.grid_points)?;
        r.diag("separation_compare", near.separation);
        r.ratio("defect_max_compare", near.max());
        r.ratio("defect_mean_compare", near.mean());
        r.flag("defect_trend", Flag::at_least(near.mean() - main.mean(), 0.0));
        r.table("localization_compare.csv", near.to_csv());
    }
    Ok(r)
}

/// The two factors A, B with G = A·B used for the Ky Fan chain.
fn nonsa_factors(
    k: &KernelSpec,
    second: Option<&KernelSpec>,
    m: &AtomicMeasure,
    v1: &[f64],
    v2: &[f64],
    cfg: &ExperimentConfig,
) -> Result<(Matrix, Matrix)> {
    let n = m.len();
    let rule = cfg.diagonal_rule();
    let l1 = linalg::cholesky(&weighted_kernel(k, m, rule)?)?;
    Ok(match second {
        None => (
            Matrix::from_fn(n, n, |i, j| v2[i] * l1[(i, j)]),
            Matrix::from_fn(n, n, |i, j| l1[(j, i)] * v1[j]),
        ),
        Some(k2) => {
            let l2 = linalg::cholesky(&weighted_kernel(k2, m, rule)?)?;
            (
                Matrix::from_fn(n, n, |i, j| l2[(j, i)] * v2[j]),
                Matrix::from_fn(n, n, |i, j| v1[i] * l1[(i, j)]),
            )
        }
    })
}

/// Normalized singular-number constant sup_k s_k k^{1/θ}/(‖V₁‖_{r₁}‖V₂‖_{r₂}) on one measure.
fn nonsa_constant(
    k: &KernelSpec,
    second: Option<&KernelSpec>,
    m: &AtomicMeasure,
    v1: &[f64],
    v2: &[f64],
    r1: f64,
    r2: f64,
    theta: f64,
    cfg: &ExperimentConfig,
) -> Result<(SpectralResult, f64)> {
    let shape = match second {
        None => NonsaShape::WeightsOutside,
        Some(k2) => NonsaShape::KernelsOutside { second: k2 },
    };
    let op = assemble_nonselfadjoint(k, m, v1, v2, shape, cfg.diagonal_rule())?;
    let sv = singular_values(&op)?;
    let c = sup_decay(&sv.values, theta) / (lr_norm(m, v1, r1)? * lr_norm(m, v2, r2)?);
    Ok((sv, c))
}

/// Singular numbers of a non-self-adjoint assembly, the Ky Fan chain and a dilation probe.
pub fn run_nonsa_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let nc = cfg.nonsa.as_ref().expect("validated");
    let k = cfg.kernel_spec()?;
    let m = build_measure(cfg, cfg.measure.level)?;
    let s = m.nominal_dim();
    let second = match nc.shape {
        ShapeConfig::WeightsOutside => None,
        ShapeConfig::KernelsOutside => {
            let text = nc
                .second_kernel
                .as_ref()
                .ok_or_else(|| Error::Config("kernels-outside needs `second_kernel`".into()))?;
            Some(text.parse::<KernelSpec>().map_err(|e| Error::Config(e.to_string()))?)
        }
    };
    let theta = match &second {
        None => theta_from_gap(k.order_gap(), s)?,
        Some(k2) => {
            // each factor √V·𝔄_j has singular numbers of order k^{−1/(2θ_j)}
            let t1 = theta_from_gap(k.order_gap(), s).map_err(|e| Error::Config(e.to_string()))?;
            let t2 = theta_from_gap(k2.order_gap(), s).map_err(|e| Error::Config(e.to_string()))?;
            2.0 / (1.0 / t1 + 1.0 / t2)
        }
    };
    if !(nc.r1 > 0.0 && nc.r2 > 0.0) || (1.0 / nc.r1 + 1.0 / nc.r2 - 1.0 / theta).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "exponents need 1/r1 + 1/r2 = 1/theta = {}, got 1/{} + 1/{}",
            1.0 / theta,
            nc.r1,
            nc.r2
        )));
    }
    let v1 = nc.v1.table(&m, cfg.seed, 1)?;
    let v2 = nc.v2.table(&m, cfg.seed, 2)?;
    let (sv, constant) = nonsa_constant(&k, second.as_ref(), &m, &v1, &v2, nc.r1, nc.r2, theta, cfg)?;

    let (a, b) = nonsa_factors(&k, second.as_ref(), &m, &v1, &v2, cfg)?;
    let sa = linalg::singular_values(&a)?;
    let sb = linalg::singular_values(&b)?;
    let excess = ky_fan_excess(&sv.values, &sa, &sb);

    let mt = transform(&m, &Transform::Scale { t: nc.dilation, weight_exponent: s })?;
    let (_, constant_t) = nonsa_constant(&k, second.as_ref(), &mt, &v1, &v2, nc.r1, nc.r2, theta, cfg)?;

    let mut r = Report::new(cfg.config_hash(), ExperimentKind::Nonsa);
    r.theory.theta = Some(theta);
    r.diag("atoms", m.len() as f64);
    r.diag("s_max", sv.values[0]);
    r.diag("v1_norm", lr_norm(&m, &v1, nc.r1)?);
    r.diag("v2_norm", lr_norm(&m, &v2, nc.r2)?);
    r.diag("dilation", nc.dilation);
    r.ratio("constant", constant);
    r.ratio("constant_dilated", constant_t);
    r.ratio("ky_fan_excess", excess);
    r.flag("constant_finite", Flag::at_least(constant, 0.0));
    r.flag("ky_fan", Flag::at_most(excess, 1e-10));
    r.flag("dilation", Flag::relative(constant_t, constant, cfg.checks.dilation_rel_tol));
    r.table("singular.csv", sv.to_csv());
    r.table("loglog.csv", loglog_csv(&sv.values));
    Ok(r)
}

/// Uniform random points in the unit cube with weights in [1/2, 3/2).
pub fn random_cube_measure(dim: usize, atoms: usize, seed: u64, stream: u64) -> Result<AtomicMeasure> {
    let mut rng = super::config::rng_for(seed, stream);
    let pts: Vec<Vec<f64>> = (0..atoms).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
    let w: Vec<f64> = (0..atoms).map(|_| rng.gen_range(0.5..1.5)).collect();
    AtomicMeasure::new(dim, pts, w, dim as f64, 0)
}

/// Stopping cubes and Besicovitch families on seeded random measures, with audits.
pub fn run_covering_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let cc = cfg.covering.as_ref().expect("validated");
    let mut r = Report::new(cfg.config_hash(), ExperimentKind::Covering);
    let (mut disjoint, mut covered, mut counted) = (true, true, true);
    for &dim in &cc.dims {
        let ceiling =
            kappa_impl(dim).ok_or_else(|| Error::Config(format!("no family ceiling for dimension {dim}")))?;
        let (mut kappa_max, mut mult_max, mut cubes_max) = (0, 0, 0);
        for trial in 0..cc.trials {
            let stream = ((dim as u64) << 32) | trial as u64;
            let m = random_cube_measure(dim, cc.atoms, cfg.seed, stream)?;
            let v = vec![1.0; m.len()];
            let cubes = stopping_cubes(&m, &v, JRegime::Subcritical { theta: cc.theta }, cc.target_n, cc.tol)?;
            let cover = besicovitch_families(&cubes, cc.target_n);
            let audit = covering_audit(&cover, &m);
            disjoint &= audit.family_disjoint;
            covered &= audit.all_covered;
            counted &= cover.cubes.len() <= 2 * ceiling * cc.target_n;
            kappa_max = kappa_max.max(cover.kappa);
            mult_max = mult_max.max(audit.max_multiplicity);
            cubes_max = cubes_max.max(cover.cubes.len());
            if trial == 0 {
                r.table(&format!("covering_d{dim}.csv"), cover.to_csv());
            }
        }
        r.diag(&format!("kappa_max_d{dim}"), kappa_max as f64);
        r.diag(&format!("multiplicity_max_d{dim}"), mult_max as f64);
        r.diag(&format!("cubes_max_d{dim}"), cubes_max as f64);
        r.flag(&format!("kappa_d{dim}"), Flag::at_most(kappa_max as f64, ceiling as f64));
    }
    r.diag("trials", cc.trials as f64);
    r.flag("family_disjoint", Flag::holds(disjoint));
    r.flag("all_covered", Flag::holds(covered));
    r.flag("count_bound", Flag::holds(counted));
    Ok(r)
}

/// N₋(g) scans at the configured mode cutoff and at half of it.
pub fn run_clr_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let cc = cfg.clr.as_ref().expect("validated");
    let m = build_measure(cfg, cfg.measure.level)?;
    let v = cfg.density.table(&m, cfg.seed, 0)?;
    let n = m.ambient_dim();
    let theta = exponent_theta(n, cc.l, m.nominal_dim()).map_err(|e| Error::Config(e.to_string()))?;
    let ahlfors = ahlfors_for(&m)?;
    let vint = m.integrate(&v.iter().map(|x| x.powf(theta)).collect::<Vec<_>>())?;
    let bound_k = ahlfors.a_hat.powf(theta - 1.0) * vint;
    let bx = PeriodicBox::centered_on(&m, cc.box_factor * m.diam());
    if cc.cutoff < 2 {
        return Err(Error::Config("clr cutoff must be at least 2".into()));
    }
    let full = clr_scan(cc.l, &bx, cc.cutoff, &m, &v, &cc.g, theta, bound_k)?;
    let half = clr_scan(cc.l, &bx, cc.cutoff / 2, &m, &v, &cc.g, theta, bound_k)?;

    let pair = galerkin_pair(cc.l, &bx, cc.cutoff / 2, &m, &v)?;
    let a = pair.a_matrix();
    let (mut agree, mut boundary) = (0usize, 0usize);
    for &g in &cc.g {
        match birman_schwinger_check(&a, &pair.b, g) {
            Ok(c) => agree += usize::from(c.equal),
            Err(Error::BoundaryCoupling { .. }) => boundary += 1,
            Err(e) => return Err(e),
        }
    }

    let mut r = Report::new(cfg.config_hash(), ExperimentKind::Clr);
    r.theory.theta = Some(theta);
    r.theory.regime = Some(if 2.0 * cc.l < n as f64 { Regime::Subcritical } else { Regime::Supercritical });
    r.diag("modes", full.modes as f64);
    r.diag("modes_half", half.modes as f64);
    r.diag("bound_k", bound_k);
    r.diag("bs_boundary_skips", boundary as f64);
    r.ratio("max_ratio", full.max_ratio);
    r.ratio("max_ratio_half", half.max_ratio);
    let change = (full.max_ratio / half.max_ratio).max(half.max_ratio / full.max_ratio);
    r.ratio("refinement_change", change);
    r.flag("monotone", Flag::holds(full.monotone() && half.monotone()));
    r.flag("max_ratio_finite", Flag::at_least(full.max_ratio, 0.0));
    r.flag("refinement", Flag::at_most(change, cfg.checks.clr_refinement_factor));
    r.flag("birman_schwinger", Flag::at_least(agree as f64, (cc.g.len() - boundary) as f64));
    r.table("clr_scan.csv", full.to_csv());
    r.table("clr_scan_half.csv", half.to_csv());
    Ok(r)
}

/// Dispatch on the configured experiment kind.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.experiment {
        ExperimentKind::Spectrum => run_spectrum_experiment(cfg),
        ExperimentKind::Localization => run_localization_experiment(cfg),
        ExperimentKind::Nonsa => run_nonsa_experiment(cfg),
        ExperimentKind::Covering => run_covering_experiment(cfg),
        ExperimentKind::Clr => run_clr_experiment(cfg),
    }
}
