//! Executes the requested checks and assembles the report body.

use std::collections::BTreeMap;
use std::path::Path;

use carleson_core::checkers::{
    boundary_ball_probes, default_boundary_radii, equivalence_report, square_probes, whitney_probes, Probe,
    WhitneySampling,
};
use carleson_core::disc::WHITNEY_C;
use carleson_core::embedding::{default_family, embedding_constant, Carrier, Space};
use carleson_core::measure::{weighted_pullback_with_tol, Pullback};
use carleson_core::qns::{qns_constant, BallRule, QnsCandidate};
use carleson_core::stopping::{
    build_generations, decay_ratio, generation_decay, pullback_via_regions, region_oscillation, sampling_slack,
};
use carleson_core::suite::{run_equivalence_suite, SuiteConfig};
use carleson_core::{carleson_box, CircleArc, Complex64, ConformalMap, Domain, PlanarMeasure, StoppingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Check, ConfigError, RunConfig};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// Headline value compared against the declared bracket.
    pub value: Option<f64>,
    pub details: BTreeMap<String, f64>,
    pub bracket: Option<[f64; 2]>,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub config: RunConfig,
    pub seed: u64,
    pub boundary_samples: usize,
    pub sagitta: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportBody {
    pub checks: Vec<CheckResult>,
    pub provenance: Provenance,
}

/// Side files produced by checks (name, contents).
pub type SideFiles = Vec<(String, Vec<u8>)>;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numeric(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl ReportBody {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Context {
    map: ConformalMap,
    domain: Domain,
    mu: PlanarMeasure,
    pulled: Pullback,
}

fn max_ratio(probes: &[Probe]) -> f64 {
    probes.iter().map(|p| p.ratio).fold(0.0, f64::max)
}

fn probes_csv(probes: &[Probe]) -> carleson_core::Result<Vec<u8>> {
    let mut buf = Vec::new();
    carleson_core::io::write_probes(&mut buf, probes)?;
    Ok(buf)
}

type Outcome = carleson_core::Result<(f64, BTreeMap<String, f64>)>;

/// Runs `checks` in dependency order: domain, measure and pullback first,
/// then each check; a failing check does not stop the others.
pub fn run(config: &RunConfig, checks: &[Check]) -> Result<(ReportBody, SideFiles), RunError> {
    let map = config.map();
    let domain = config
        .domain()
        .map_err(|e| RunError::Config(ConfigError::new("domain", e)))?;
    let mu = config.measure()?;
    let params = config
        .params()
        .map_err(|e| RunError::Config(ConfigError::new("params", e)))?;
    let pulled = weighted_pullback_with_tol(&map, &mu, params.hardy_exponent(), config.knobs.inversion_tol)
        .map_err(|e| RunError::Numeric(format!("pullback: {e}")))?;
    let mut warnings = Vec::new();
    if !pulled.rejected.is_empty() {
        warnings.push(format!(
            "{} atoms (mass {}) outside the domain were dropped by the pullback",
            pulled.rejected.len(),
            pulled.rejected_mass
        ));
    }
    if pulled.near_boundary > 0 {
        warnings.push(format!(
            "{} pulled-back atoms lie within 1e-6 of the circle",
            pulled.near_boundary
        ));
    }
    let ctx = Context {
        map,
        domain,
        mu,
        pulled,
    };

    let mut sorted = checks.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut files = SideFiles::new();
    let mut results = Vec::new();
    for check in sorted {
        let outcome = run_check(config, &ctx, check, &mut files, &mut warnings);
        results.push(finish(config, check.name(), outcome));
    }
    let body = ReportBody {
        checks: results,
        provenance: Provenance {
            config: config.clone(),
            seed: config.seed,
            boundary_samples: config.domain.boundary_samples,
            sagitta: ctx.domain.sagitta(),
            warnings,
        },
    };
    Ok((body, files))
}

fn finish(config: &RunConfig, name: &str, outcome: Outcome) -> CheckResult {
    let bracket = config.brackets.get(name).copied();
    match outcome {
        Ok((value, details)) => CheckResult {
            name: name.into(),
            value: Some(value),
            details,
            bracket,
            passed: bracket.is_none_or(|[lo, hi]| value >= lo && value <= hi),
            error: None,
        },
        Err(e) => CheckResult {
            name: name.into(),
            value: None,
            details: BTreeMap::new(),
            bracket,
            passed: false,
            error: Some(e.to_string()),
        },
    }
}

fn run_check(
    config: &RunConfig,
    ctx: &Context,
    check: Check,
    files: &mut SideFiles,
    warnings: &mut Vec<String>,
) -> Outcome {
    let k = &config.knobs;
    let params = config.params()?;
    let beta = k.beta.unwrap_or(params.hardy_exponent());
    let nu = &ctx.pulled.measure;
    let mut details = BTreeMap::new();
    match check {
        Check::Square => {
            let probes = square_probes(nu, beta, k.depth)?;
            files.push(("square_probes.csv".into(), probes_csv(&probes)?));
            details.insert("beta".into(), beta);
            details.insert("probes".into(), probes.len() as f64);
            Ok((max_ratio(&probes), details))
        }
        Check::Whitney => {
            let probes = whitney_probes(nu, beta, &WhitneySampling::new(k.depth as u32), WHITNEY_C)?;
            files.push(("whitney_probes.csv".into(), probes_csv(&probes)?));
            details.insert("beta".into(), beta);
            details.insert("probes".into(), probes.len() as f64);
            Ok((max_ratio(&probes), details))
        }
        Check::Boundary => {
            let centres: Vec<Complex64> = ctx.domain.curve().vertices().to_vec();
            let radii = default_boundary_radii(&ctx.domain);
            let probes = boundary_ball_probes(&ctx.mu, &ctx.domain, k.boundary_beta, &centres, &radii)?;
            files.push(("boundary_probes.csv".into(), probes_csv(&probes)?));
            details.insert("beta".into(), k.boundary_beta);
            details.insert("radii".into(), radii.len() as f64);
            Ok((max_ratio(&probes), details))
        }
        Check::Equivalence => {
            let r = equivalence_report(nu, k.equivalence_beta, k.depth)?;
            details.insert("beta".into(), k.equivalence_beta);
            details.insert("square_c".into(), r.square_c);
            details.insert("ball_c".into(), r.ball_c);
            Ok((r.ratio, details))
        }
        Check::Embed => {
            let space = Space::Hardy { p: params.p };
            let family = default_family(space, k.family_levels, k.family_bits, k.max_degree);
            let est = embedding_constant(nu, space, params.q, &family, &Carrier::disc())?;
            let mut buf = Vec::new();
            carleson_core::io::write_embedding_ratios(&mut buf, &family, &est.ratios)?;
            files.push(("embed_ratios.csv".into(), buf));
            details.insert("family_size".into(), family.len() as f64);
            Ok((est.value, details))
        }
        Check::Stopping => {
            let m = match k.m {
                Some(m) => m,
                None => StoppingConfig::default_threshold(&ctx.map)?,
            };
            let stop = StoppingConfig::new(m, k.stopping_depth, k.top_samples)?;
            let root = carleson_box(CircleArc::new(k.root_center, k.root_length)?);
            let tree = build_generations(&ctx.map, root, stop)?;
            let mut worst = 0.0f64;
            for id in 0..tree.region_count() {
                worst = worst.max(region_oscillation(&ctx.map, &tree, id, 4 * k.top_samples)?.total);
            }
            let slack = sampling_slack(&ctx.map, &tree);
            let totals = generation_decay(&tree);
            let pb = pullback_via_regions(&ctx.map, &ctx.mu, &tree, params)?;
            if pb.failures > 0 {
                warnings.push(format!("stopping: {} atoms could not be pulled back", pb.failures));
            }
            files.push(("stopping_tree.txt".into(), tree.to_text().into_bytes()));
            details.insert("m".into(), m);
            details.insert("generations".into(), totals.len() as f64);
            details.insert("regions".into(), tree.region_count() as f64);
            details.insert("max_oscillation".into(), worst);
            details.insert("slack".into(), slack);
            details.insert("decay_ratio".into(), decay_ratio(&totals));
            details.insert("unresolved_area".into(), tree.unresolved_area());
            details.insert("pullback_via_regions".into(), pb.via_regions);
            details.insert("pullback_direct".into(), pb.direct);
            Ok((worst - m.ln(), details))
        }
        Check::Qns => {
            let candidate = config.qns.clone().unwrap_or(QnsCandidate::Constant { value: 1.0 });
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            // centres are images of random disc points, radii a fraction of the boundary distance
            let balls: Vec<(Complex64, f64)> = (0..k.qns_balls)
                .map(|_| {
                    let z =
                        Complex64::from_polar(0.9 * rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>());
                    let w = ctx.map.eval(z);
                    let t = rng.gen_range(0.1..0.5);
                    (w, t * carleson_core::domain::boundary_distance(&ctx.domain, w))
                })
                .collect();
            let report = qns_constant(&candidate, &ctx.domain, &balls, BallRule::default())?;
            let mut buf = Vec::new();
            carleson_core::io::write_ball_ratios(&mut buf, &report.balls)?;
            files.push(("qns_balls.csv".into(), buf));
            details.insert("balls".into(), report.balls.len() as f64);
            details.insert("skipped".into(), report.skipped as f64);
            details.insert("rejected".into(), report.rejected as f64);
            Ok((report.constant, details))
        }
    }
}

/// Seeded square/ball comparison suite.
pub fn run_suite(config: &RunConfig, depth: Option<usize>) -> Result<ReportBody, RunError> {
    let suite = SuiteConfig {
        depth: depth.unwrap_or(SuiteConfig::default().depth),
        beta: config.knobs.equivalence_beta,
        ..SuiteConfig::with_seed(config.seed)
    };
    let outcome = run_equivalence_suite(&suite).map(|r| {
        let mut details = BTreeMap::new();
        details.insert("min_ratio".into(), r.min_ratio);
        details.insert("max_ratio".into(), r.max_ratio);
        details.insert("measures".into(), r.reports.len() as f64);
        details.insert("depth".into(), suite.depth as f64);
        (r.bracket, details)
    });
    Ok(ReportBody {
        checks: vec![finish(config, "suite", outcome)],
        provenance: Provenance {
            config: config.clone(),
            seed: config.seed,
            boundary_samples: config.domain.boundary_samples,
            sagitta: 0.0,
            warnings: Vec::new(),
        },
    })
}

/// Writes the side files into `dir`.
pub fn write_side_files(dir: &Path, files: &SideFiles) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}
