//! Config-driven experiments that write CSV/JSON/SVG artifacts and a
//! manifest.
//!
//! A run writes its artifacts, `manifest.json` (resolved config, its hash,
//! artifact digests) and `timing.json` (wall time). Everything except
//! `timing.json` is byte-identical across reruns with the same config.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{
    bernoulli_convolution_dim_lower, grid_slack, minkowski_dim_estimate, oracle_exact_cover_expectation,
    oracle_grid_alpha, oracle_min_square, slope_fit,
};
use crate::carpet::{
    alpha_of_q, dim_measure, dim_set, lift_q_to_p, max_local_dimension, mcmullen_vector, min_square_measure,
    optimize, reduce_params, threshold_a_k, vector_big_q_k, vector_q_k, CarpetSpec, LevelConvention,
    ReducedParams, Regime,
};
use crate::engine::{
    ball_hitting_time_mc, cover_time_mc, cover_time_trial, hitting_time_mc, orbit_points, trial_rng,
    two_dim_cover_time_mc, CarpetSquareTracker, CellTracker, GridTracker, PackingTracker, Tracker,
    TrialStats, DEFAULT_STEP_CEILING,
};
use crate::error::{invalid, Error, Result};
use crate::measures::{estimate_decay_constants, BernoulliDriver, Driver};
use crate::svg::{render_svg, SvgStyle};
use crate::symbolic::{build_packing, natural_project, AffineMap, IfsModel, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Dim,
    Optimize,
    CoverTime,
    HittingTime,
    Slope,
    Orbit,
    Table1,
    Table2,
    Oracle,
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown experiment kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub linear: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    Carpet {
        m: usize,
        n: usize,
        /// Column heights, filled from the top.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        heights: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        digits: Option<Vec<(usize, usize)>>,
    },
    Cantor,
    BernoulliConvolution {
        lambda: f64,
    },
    Ifs {
        maps: Vec<MapSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diameter: Option<f64>,
    },
}

impl Default for SystemSpec {
    fn default() -> Self {
        SystemSpec::Carpet {
            m: 2,
            n: 3,
            heights: Some(vec![1, 2]),
            digits: None,
        }
    }
}

/// A resolved system.
#[derive(Clone, Debug)]
pub struct System {
    pub ifs: IfsModel,
    pub carpet: Option<(CarpetSpec, ReducedParams)>,
    pub lambda: Option<f64>,
}

impl SystemSpec {
    pub fn build(&self) -> Result<System> {
        match self {
            SystemSpec::Carpet {
                m,
                n,
                heights,
                digits,
            } => {
                let spec = match (heights, digits) {
                    (Some(h), None) => CarpetSpec::from_column_heights(*m, *n, h)?,
                    (None, Some(d)) => CarpetSpec::new(*m, *n, d.clone())?,
                    _ => {
                        return Err(Error::Config(
                            "carpet needs exactly one of heights or digits".into(),
                        ))
                    }
                };
                let rp = reduce_params(&spec)?;
                Ok(System {
                    ifs: spec.ifs(),
                    carpet: Some((spec, rp)),
                    lambda: None,
                })
            }
            SystemSpec::Cantor => Ok(System {
                ifs: IfsModel::middle_thirds_cantor(),
                carpet: None,
                lambda: None,
            }),
            SystemSpec::BernoulliConvolution { lambda } => Ok(System {
                ifs: IfsModel::bernoulli_convolution(*lambda)?,
                carpet: None,
                lambda: Some(*lambda),
            }),
            SystemSpec::Ifs { maps, diameter } => {
                let maps = maps
                    .iter()
                    .map(|m| AffineMap::new(m.linear.clone(), m.translation.clone()))
                    .collect::<Result<Vec<_>>>()?;
                let mut ifs = IfsModel::new(maps)?;
                if let Some(d) = diameter {
                    ifs = ifs.with_diameter_bound(*d)?;
                }
                Ok(System {
                    ifs,
                    carpet: None,
                    lambda: None,
                })
            }
        }
    }
}

/// How to choose the driving measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
#[derive(Default)]
pub enum DriverSpec {
    #[default]
    Uniform,
    Bernoulli {
        weights: Vec<f64>,
    },
    Markov {
        transition: Vec<Vec<f64>>,
    },
    /// Height-class vector lifted uniformly into the columns.
    Lift {
        q: Vec<f64>,
    },
    /// The vertex vector `q_K`, lifted.
    Vertex {
        k: usize,
    },
    /// The interior vector `Q_K`, lifted.
    Interior {
        k: usize,
    },
    /// The minimiser of the measure's Minkowski dimension.
    Optimal,
    /// The Hausdorff-dimension maximising weights.
    Mcmullen,
}

impl DriverSpec {
    fn carpet<'a>(&self, sys: &'a System) -> Result<&'a ReducedParams> {
        sys.carpet
            .as_ref()
            .map(|c| &c.1)
            .ok_or_else(|| Error::Config(format!("driver {} needs a carpet system", self.label())))
    }

    pub fn label(&self) -> String {
        match self {
            DriverSpec::Uniform => "uniform".into(),
            DriverSpec::Bernoulli { weights } => format!("bernoulli{weights:?}"),
            DriverSpec::Markov { .. } => "markov".into(),
            DriverSpec::Lift { q } => format!("lift{q:?}"),
            DriverSpec::Vertex { k } => format!("q_{k}"),
            DriverSpec::Interior { k } => format!("Q_{k}"),
            DriverSpec::Optimal => "optimal".into(),
            DriverSpec::Mcmullen => "mcmullen".into(),
        }
    }

    pub fn build(&self, sys: &System) -> Result<Driver> {
        let n = sys.ifs.len();
        let drv = match self {
            DriverSpec::Uniform => Driver::Bernoulli(BernoulliDriver::uniform(n)),
            DriverSpec::Bernoulli { weights } => Driver::bernoulli(weights.clone())?,
            DriverSpec::Markov { transition } => Driver::markov(transition.clone())?,
            DriverSpec::Lift { q } => {
                let rp = self.carpet(sys)?;
                alpha_of_q(rp, q)?;
                Driver::bernoulli(lift_q_to_p(rp, q))?
            }
            DriverSpec::Vertex { k } => {
                let rp = self.carpet(sys)?;
                Driver::bernoulli(lift_q_to_p(rp, &vector_q_k(rp, *k)?))?
            }
            DriverSpec::Interior { k } => {
                let rp = self.carpet(sys)?;
                Driver::bernoulli(lift_q_to_p(rp, &vector_big_q_k(rp, *k)?))?
            }
            DriverSpec::Optimal => Driver::bernoulli(optimize(self.carpet(sys)?).p_star)?,
            DriverSpec::Mcmullen => Driver::bernoulli(mcmullen_vector(self.carpet(sys)?))?,
        };
        if drv.alphabet_size() != n {
            return Err(Error::Config(format!(
                "driver has {} symbols but the system has {n} maps",
                drv.alphabet_size()
            )));
        }
        Ok(drv)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TrackerSpec {
    CarpetSquares {
        level: usize,
        #[serde(default)]
        convention: LevelConvention,
    },
    Packing {
        radius: f64,
    },
    Grid {
        side: f64,
        #[serde(default = "default_pilot")]
        pilot: usize,
    },
}

fn default_pilot() -> usize {
    200_000
}

impl TrackerSpec {
    fn build(&self, sys: &System, drv: &Driver, seed: u64) -> Result<Tracker> {
        Ok(match self {
            TrackerSpec::CarpetSquares { level, convention } => {
                let (_, rp) = sys
                    .carpet
                    .as_ref()
                    .ok_or_else(|| Error::Config("carpet-squares tracker needs a carpet system".into()))?;
                Tracker::CarpetSquares(CarpetSquareTracker::new(rp, *level, *convention)?)
            }
            TrackerSpec::Packing { radius } => {
                Tracker::Packing(PackingTracker::new(build_packing(&sys.ifs, *radius)?))
            }
            TrackerSpec::Grid { side, pilot } => {
                // pilot orbits use a stream disjoint from the trials
                let mut rng = trial_rng(seed ^ 0x5EED_F00D, u64::MAX);
                Tracker::Grid(GridTracker::from_pilot(&sys.ifs, drv, *side, *pilot, &mut rng)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    /// A packing word.
    Cell {
        word: Vec<usize>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
}

/// A carpet row for the `table1` experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarpetEntry {
    pub m: usize,
    pub n: usize,
    pub heights: Vec<usize>,
}

/// Constants for the cover-time bound evaluators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundSpec {
    pub c0: f64,
    pub d: f64,
}

impl Default for BoundSpec {
    fn default() -> Self {
        BoundSpec { c0: 1.0, d: 1.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Worker threads; does not affect results.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    /// Output directory; does not affect results.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub system: SystemSpec,
    #[serde(default)]
    pub driver: DriverSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tracker: Option<TrackerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    /// Coding of the start point; padded by repeating its last symbol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<usize>>,
    /// Column weights for the two-dimensional game.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    /// Trials per level, overriding `trials` level by level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_trials: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<DriverSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carpets: Option<Vec<CarpetEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_ceiling: Option<u64>,
    #[serde(default)]
    pub bounds: BoundSpec,
    #[serde(default)]
    pub svg: SvgStyle,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Canonical JSON of the result-affecting fields.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn ceiling(&self) -> u64 {
        self.step_ceiling.unwrap_or(DEFAULT_STEP_CEILING)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub config_hash: String,
    pub config: Value,
    /// Attractor diameter bound and how it was obtained.
    pub diameter: Value,
    pub artifacts: Vec<ArtifactRecord>,
}

/// Collects artifact bytes before anything is written.
struct Artifacts {
    hash: String,
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    /// One JSON object per line, each stamped with the config hash.
    fn add_records(&mut self, name: &str, records: &[Value]) {
        let mut out = String::new();
        for r in records {
            let mut r = r.clone();
            if let Value::Object(map) = &mut r {
                map.insert("config_hash".into(), Value::String(self.hash.clone()));
            }
            out.push_str(&serde_json::to_string(&r).expect("json"));
            out.push('\n');
        }
        self.add(name, out);
    }
}

/// CSV text with a header; every data row ends in a provenance cell.
fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| invalid(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn fmt5(x: f64) -> String {
    format!("{x:.5}")
}

pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

/// Validate, run and write all artifacts of one experiment.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let kind = config
        .experiment
        .ok_or_else(|| Error::Config("no experiment kind given".into()))?;
    let out_dir = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let started = Instant::now();
    let sys = config.system.build()?;
    let mut arts = Artifacts {
        hash: config.hash(),
        files: Vec::new(),
    };
    let mut work = || -> Result<()> {
        match kind {
            ExperimentKind::Dim => run_dim(config, &sys, &mut arts),
            ExperimentKind::Optimize => run_optimize(&sys, &mut arts),
            ExperimentKind::CoverTime => run_cover_time(config, &sys, &mut arts),
            ExperimentKind::HittingTime => run_hitting_time(config, &sys, &mut arts),
            ExperimentKind::Slope => run_slope(config, &sys, &mut arts),
            ExperimentKind::Orbit => run_orbit(config, &sys, &mut arts),
            ExperimentKind::Table1 => run_table1(config, &mut arts),
            ExperimentKind::Table2 => run_table2(config, &sys, &mut arts),
            ExperimentKind::Oracle => run_oracle(config, &sys, &mut arts),
        }
    };
    match config.threads {
        Some(t) if t > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| invalid(e.to_string()))?
            .install(work)?,
        _ => work()?,
    }

    std::fs::create_dir_all(&out_dir)?;
    let mut records = Vec::new();
    for (name, bytes) in &arts.files {
        std::fs::write(out_dir.join(name), bytes)?;
        records.push(ArtifactRecord {
            file: name.clone(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: kind,
        seed: config.seed(),
        config_hash: arts.hash.clone(),
        config: serde_json::from_str(&config.canonical_json())?,
        diameter: json!({
            "bound": sys.ifs.diameter_bound(),
            "source": sys.ifs.diameter_source(),
        }),
        artifacts: records,
    };
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    std::fs::write(
        out_dir.join("timing.json"),
        serde_json::to_string(&json!({
            "config_hash": arts.hash,
            "wall_seconds": started.elapsed().as_secs_f64(),
        }))? + "\n",
    )?;
    Ok(RunReport { out_dir, manifest })
}

fn start_word(config: &ExperimentConfig, sys: &System) -> Word {
    match &config.start {
        Some(w) => Word::new(w.clone()),
        None => Word::constant(sys.ifs.len() - 1, 1),
    }
}

fn start_point(sys: &System, w: &Word) -> Result<Vec<f64>> {
    let last = w.symbols().last().copied().unwrap_or(0);
    let mut s = w.symbols().to_vec();
    s.resize(s.len() + 64, last);
    Ok(natural_project(&sys.ifs, &Word::new(s), &sys.ifs.base_point())?.0)
}

fn default_tracker(config: &ExperimentConfig, sys: &System) -> Result<TrackerSpec> {
    match (&config.tracker, &sys.carpet) {
        (Some(t), _) => Ok(t.clone()),
        (None, Some(_)) => Ok(TrackerSpec::CarpetSquares {
            level: 6,
            convention: LevelConvention::Floor,
        }),
        (None, None) => Err(Error::Config("this system needs a [tracker] table".into())),
    }
}

fn trials_csv(stats: &TrialStats, op: &str, master: u64) -> Result<String> {
    let rows: Vec<Vec<String>> = stats
        .steps
        .iter()
        .zip(&stats.seeds)
        .enumerate()
        .map(|(i, (s, seed))| {
            vec![
                i.to_string(),
                seed.to_string(),
                s.to_string(),
                format!("{op}(master_seed={master},trial={i})"),
            ]
        })
        .collect();
    csv_table(&["trial", "seed", "steps", "provenance"], &rows)
}

fn stats_record(stats: &TrialStats) -> Value {
    json!({
        "trials": stats.trials,
        "mean": stats.mean,
        "stderr": stats.stderr,
        "min": stats.min,
        "max": stats.max,
    })
}

fn run_dim(config: &ExperimentConfig, sys: &System, arts: &mut Artifacts) -> Result<()> {
    let drv = config.driver.build(sys)?;
    let mut records = Vec::new();
    if let Some((_, rp)) = &sys.carpet {
        let p = match &drv {
            Driver::Bernoulli(b) => b.weights().to_vec(),
            Driver::Markov(_) => {
                return Err(Error::Config("carpet dimensions need a Bernoulli driver".into()))
            }
        };
        records.push(json!({
            "operation": "dim_measure",
            "driver": config.driver.label(),
            "p": p,
            "dim_measure": dim_measure(rp, &p)?,
            "dim_set": dim_set(rp),
            "max_local_dimension": max_local_dimension(rp, &p)?,
        }));
    } else {
        let radii = config
            .radii
            .clone()
            .unwrap_or_else(|| (3..=5).map(|k| 3f64.powi(-k)).collect());
        let mut rng = trial_rng(config.seed(), 0);
        let est = minkowski_dim_estimate(
            &sys.ifs,
            &drv,
            &radii,
            config.samples.unwrap_or(200_000),
            config.probes.unwrap_or(200),
            &mut rng,
        )?;
        for e in est {
            records.push(json!({
                "operation": "minkowski_dim_estimate",
                "driver": config.driver.label(),
                "radius": e.radius,
                "estimate": e.value,
                "min_count": e.min_count,
                "reliable": e.reliable,
            }));
        }
        if let (Some(lambda), Driver::Bernoulli(b)) = (sys.lambda, &drv) {
            records.push(json!({
                "operation": "bernoulli_convolution_dim_lower",
                "lambda": lambda,
                "p": b.weights(),
                "lower_bound": bernoulli_convolution_dim_lower(b.weights(), lambda)?,
            }));
        }
    }
    if let Driver::Markov(m) = &drv {
        let dc = estimate_decay_constants(m, 10, 3)?;
        records.push(json!({ "operation": "estimate_decay_constants", "decay": dc }));
    }
    arts.add_records("dim.json", &records);
    Ok(())
}

fn optimization_record(rp: &ReducedParams) -> Result<Value> {
    let res = optimize(rp);
    let thresholds = (1..rp.classes())
        .map(|k| threshold_a_k(rp, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "operation": "optimize",
        "m": rp.m,
        "n": rp.n,
        "heights": rp.heights,
        "multiplicities": rp.multiplicities,
        "thresholds": thresholds,
        "regime": res.regime,
        "k": res.k,
        "label": res.label(),
        "q_star": res.q_star,
        "p_star": res.p_star,
        "alpha": res.alpha,
        "dim_measure_at_p_star": dim_measure(rp, &res.p_star)?,
        "dim_set": dim_set(rp),
    }))
}

fn run_optimize(sys: &System, arts: &mut Artifacts) -> Result<()> {
    let (_, rp) = sys
        .carpet
        .as_ref()
        .ok_or_else(|| Error::Config("optimize needs a carpet system".into()))?;
    arts.add_records("optimize.json", &[optimization_record(rp)?]);
    Ok(())
}

fn run_cover_time(config: &ExperimentConfig, sys: &System, arts: &mut Artifacts) -> Result<()> {
    let drv = config.driver.build(sys)?;
    let spec = default_tracker(config, sys)?;
    let tracker = spec.build(sys, &drv, config.seed())?;
    let x0 = start_word(config, sys);
    let trials = config.trials_or(100);
    let (op, stats) = match (&config.columns, &tracker) {
        (Some(qc), Tracker::CarpetSquares(t)) => {
            let qc = Driver::bernoulli(qc.clone())?;
            let s = two_dim_cover_time_mc(t, &drv, &qc, &x0, trials, config.seed(), config.ceiling())?;
            ("two_dim_cover_time_mc", s)
        }
        (Some(_), _) => return Err(Error::Config("columns need a carpet-squares tracker".into())),
        (None, t) => (
            "cover_time_mc",
            cover_time_mc(&drv, t, &x0, trials, config.seed(), config.ceiling())?,
        ),
    };
    arts.add("trials.csv", trials_csv(&stats, op, config.seed())?);
    let mut rec = stats_record(&stats);
    rec["operation"] = json!(op);
    rec["tracker"] = serde_json::to_value(&spec)?;
    rec["cells"] = json!(tracker.cell_count());
    rec["burn_in"] = json!(tracker.burn_in());
    rec["driver"] = json!(config.driver.label());
    arts.add_records("summary.json", &[rec]);
    Ok(())
}

fn run_hitting_time(config: &ExperimentConfig, sys: &System, arts: &mut Artifacts) -> Result<()> {
    let drv = config.driver.build(sys)?;
    let x0 = start_word(config, sys);
    let trials = config.trials_or(1000);
    let target = config
        .target
        .as_ref()
        .ok_or_else(|| Error::Config("hitting-time needs a [target] table".into()))?;
    let stats = match target {
        TargetSpec::Cell { word } => {
            let spec = default_tracker(config, sys)?;
            let Tracker::Packing(t) = spec.build(sys, &drv, config.seed())? else {
                return Err(Error::Config("cell targets need a packing tracker".into()));
            };
            let cell = t
                .packing()
                .id_of(&Word::new(word.clone()))
                .ok_or_else(|| Error::Config(format!("{word:?} is not a packing word")))?;
            if drv.reversed_cylinder_measure(&Word::new(word.clone())) <= 0.0 {
                return Err(invalid("target has zero measure"));
            }
            hitting_time_mc(&drv, &t, cell, &x0, trials, config.seed(), config.ceiling())?
        }
        TargetSpec::Ball { center, radius } => ball_hitting_time_mc(
            &sys.ifs,
            &drv,
            center,
            *radius,
            &start_point(sys, &x0)?,
            trials,
            config.seed(),
            config.ceiling(),
        )?,
    };
    arts.add(
        "trials.csv",
        trials_csv(&stats, "hitting_time_mc", config.seed())?,
    );
    let mut rec = stats_record(&stats);
    rec["operation"] = json!("hitting_time_mc");
    rec["target"] = serde_json::to_value(target)?;
    arts.add_records("summary.json", &[rec]);
    Ok(())
}

fn run_slope(config: &ExperimentConfig, sys: &System, arts: &mut Artifacts) -> Result<()> {
    let drv = config.driver.build(sys)?;
    let x0 = start_word(config, sys);
    let trials = config.trials_or(100);
    let mut samples = Vec::new();
    let mut rows = Vec::new();
    let mut reference = Value::Null;
    let scales: Vec<(f64, Tracker, String)> = match &sys.carpet {
        Some((_, rp)) => {
            let conv = match &config.tracker {
                Some(TrackerSpec::CarpetSquares { convention, .. }) => *convention,
                _ => LevelConvention::Floor,
            };
            if let Driver::Bernoulli(b) = &drv {
                reference = json!(dim_measure(rp, b.weights())?);
            }
            config
                .levels
                .clone()
                .unwrap_or_else(|| (4..=8).collect())
                .into_iter()
                .map(|k| {
                    let t = CarpetSquareTracker::new(rp, k, conv)?;
                    Ok((
                        (rp.m as f64).powi(-(k as i32)),
                        Tracker::CarpetSquares(t),
                        format!("level {k}"),
                    ))
                })
                .collect::<Result<_>>()?
        }
        None => config
            .radii
            .clone()
            .unwrap_or_else(|| (4..=9).map(|k| 3f64.powi(-k)).collect())
            .into_iter()
            .map(|r| {
                Ok((
                    r,
                    Tracker::Packing(PackingTracker::new(build_packing(&sys.ifs, r)?)),
                    format!("radius {r}"),
                ))
            })
            .collect::<Result<_>>()?,
    };
    for (i, (r, tracker, label)) in scales.iter().enumerate() {
        let seed = config.seed().wrapping_add(i as u64);
        let s = cover_time_mc(&drv, tracker, &x0, trials, seed, config.ceiling())?;
        samples.push((*r, s.mean));
        rows.push(vec![
            label.clone(),
            fmt(*r),
            tracker.cell_count().to_string(),
            s.trials.to_string(),
            fmt(s.mean),
            fmt(s.stderr),
            format!("cover_time_mc(master_seed={seed})"),
        ]);
    }
    let fit = slope_fit(&samples)?;
    arts.add(
        "slope.csv",
        csv_table(
            &[
                "scale",
                "radius",
                "cells",
                "trials",
                "mean",
                "stderr",
                "provenance",
            ],
            &rows,
        )?,
    );
    arts.add_records(
        "slope.json",
        &[json!({
            "operation": "slope_fit",
            "driver": config.driver.label(),
            "fit": fit,
            "reference_dimension": reference,
        })],
    );
    Ok(())
}

fn points_csv(points: &[Vec<f64>]) -> Result<String> {
    let dim = points.first().map_or(2, Vec::len);
    let mut header = vec!["step"];
    header.extend(["x", "y", "z"].iter().take(dim));
    let rows: Vec<Vec<String>> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            std::iter::once((i + 1).to_string())
                .chain(p.iter().map(|x| format!("{x:.9}")))
                .collect()
        })
        .collect();
    csv_table(&header, &rows)
}

fn run_orbit(config: &ExperimentConfig, sys: &System, arts: &mut Artifacts) -> Result<()> {
    let vectors = config.vectors.clone().unwrap_or_else(|| {
        vec![
            DriverSpec::Interior { k: 1 },
            DriverSpec::Vertex { k: 1 },
            DriverSpec::Bernoulli {
                weights: vec![0.6, 0.25, 0.15],
            },
        ]
    });
    if vectors.is_empty() {
        return Err(Error::Config("orbit needs at least one vector".into()));
    }
    let drivers = vectors.iter().map(|v| v.build(sys)).collect::<Result<Vec<_>>>()?;
    let spec = match (&config.tracker, &sys.carpet) {
        (Some(t), _) => t.clone(),
        (None, Some(_)) => TrackerSpec::CarpetSquares {
            level: 7,
            convention: LevelConvention::Floor,
        },
        (None, None) => return Err(Error::Config("orbit needs a [tracker] table".into())),
    };
    let tracker = spec.build(sys, &drivers[0], config.seed())?;
    let x0 = start_word(config, sys);
    let steps = cover_time_trial(
        &drivers[0],
        &tracker,
        &x0,
        config.ceiling(),
        &mut trial_rng(config.seed(), 0),
    )?;
    let start = start_point(sys, &x0)?;
    let mut records = Vec::new();
    for (i, (v, drv)) in vectors.iter().zip(&drivers).enumerate() {
        let mut rng = trial_rng(config.seed(), i as u64);
        let pts = orbit_points(&sys.ifs, drv, &start, steps as usize, &mut rng)?;
        let name = format!("orbit_{i}");
        arts.add(format!("{name}.csv"), points_csv(&pts)?);
        if sys.ifs.dim() == 2 {
            let xy: Vec<(f64, f64)> = pts.iter().map(|p| (p[0], p[1])).collect();
            arts.add(format!("{name}.svg"), render_svg(&xy, &config.svg));
        }
        records.push(json!({
            "operation": "orbit_points",
            "index": i,
            "driver": v.label(),
            "steps": steps,
            "start": start,
        }));
    }
    arts.add_records("orbit.json", &records);
    Ok(())
}

/// The three two-height carpets used by default in `table1`.
pub fn default_table1_carpets() -> Vec<CarpetEntry> {
    vec![
        CarpetEntry {
            m: 2,
            n: 3,
            heights: vec![2, 3],
        },
        CarpetEntry {
            m: 2,
            n: 3,
            heights: vec![1, 2],
        },
        CarpetEntry {
            m: 2,
            n: 5,
            heights: vec![2, 3],
        },
    ]
}

fn run_table1(config: &ExperimentConfig, arts: &mut Artifacts) -> Result<()> {
    let carpets = config.carpets.clone().unwrap_or_else(default_table1_carpets);
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for c in &carpets {
        let rp = reduce_params(&CarpetSpec::from_column_heights(c.m, c.n, &c.heights)?)?;
        if rp.classes() != 2 {
            return Err(Error::Config(format!(
                "table1 rows need exactly two column heights, {:?} has {}",
                c.heights,
                rp.classes()
            )));
        }
        let res = optimize(&rp);
        let a1 = threshold_a_k(&rp, 1)?;
        let aq1 = alpha_of_q(&rp, &vector_q_k(&rp, 1)?)?;
        let aq2 = alpha_of_q(&rp, &vector_q_k(&rp, 2)?)?;
        let big = (res.regime == Regime::Interior).then(|| alpha_of_q(&rp, &vector_big_q_k(&rp, 1).unwrap()));
        let big = big.transpose()?;
        let regime = if a1 < rp.heights[0] as f64 {
            "A_1<N_1"
        } else if a1 > rp.heights[1] as f64 {
            "A_1>N_2"
        } else {
            "N_1<=A_1<=N_2"
        };
        rows.push(vec![
            regime.to_string(),
            rp.multiplicities[0].to_string(),
            rp.multiplicities[1].to_string(),
            rp.heights[0].to_string(),
            rp.heights[1].to_string(),
            c.m.to_string(),
            c.n.to_string(),
            fmt5(aq1),
            big.map_or_else(|| "-".to_string(), fmt5),
            fmt5(aq2),
            fmt5(dim_set(&rp)),
            "optimize+alpha_of_q+dim_set".to_string(),
        ]);
        let mut rec = optimization_record(&rp)?;
        rec["alpha_q1"] = json!(aq1);
        rec["alpha_Q1"] = json!(big);
        rec["alpha_q2"] = json!(aq2);
        records.push(rec);
    }
    arts.add(
        "table1.csv",
        csv_table(
            &[
                "regime",
                "R1",
                "R2",
                "N1",
                "N2",
                "m",
                "n",
                "alpha_q1",
                "alpha_Q1",
                "alpha_q2",
                "dim_set",
                "provenance",
            ],
            &rows,
        )?,
    );
    arts.add_records("table1.json", &records);
    Ok(())
}

/// Driving vectors compared in `table2`, by label.
pub fn table2_vectors(rp: &ReducedParams) -> Result<Vec<(String, Vec<f64>)>> {
    Ok(vec![
        ("p_1".into(), lift_q_to_p(rp, &vector_q_k(rp, 1)?)),
        ("P_1".into(), lift_q_to_p(rp, &vector_big_q_k(rp, 1)?)),
        ("p_2".into(), lift_q_to_p(rp, &vector_q_k(rp, 2)?)),
        ("mcmullen".into(), mcmullen_vector(rp)),
    ])
}

fn run_table2(config: &ExperimentConfig, sys: &System, arts: &mut Artifacts) -> Result<()> {
    let (_, rp) = sys
        .carpet
        .as_ref()
        .ok_or_else(|| Error::Config("table2 needs a carpet system".into()))?;
    if rp.classes() != 2 {
        return Err(Error::Config(
            "table2 needs a carpet with two column heights".into(),
        ));
    }
    let levels = config.levels.clone().unwrap_or_else(|| vec![6, 9]);
    let level_trials: Vec<usize> = match (&config.trials, &config.level_trials) {
        (Some(t), _) => vec![*t; levels.len()],
        (None, Some(lt)) if lt.len() == levels.len() => lt.clone(),
        (None, Some(_)) => return Err(Error::Config("level_trials must match levels".into())),
        (None, None) if levels == [6, 9] => vec![400, 100],
        (None, None) => vec![100; levels.len()],
    };
    let x0 = start_word(config, sys);
    let vectors = table2_vectors(rp)?;
    let uniform_p = Driver::bernoulli(vec![1.0 / rp.maps() as f64; rp.maps()])?;
    let uniform_q = Driver::bernoulli(vec![1.0 / rp.columns() as f64; rp.columns()])?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (li, (&level, &trials)) in levels.iter().zip(&level_trials).enumerate() {
        for conv in [LevelConvention::Floor, LevelConvention::Ceil] {
            let tracker = CarpetSquareTracker::new(rp, level, conv)?;
            let seed = config.seed().wrapping_add(li as u64);
            let mut push = |name: &str, op: &str, stats: &TrialStats, min_sq: Option<f64>| {
                rows.push(vec![
                    level.to_string(),
                    conv.to_string(),
                    tracker.prefix_len().to_string(),
                    tracker.cell_count().to_string(),
                    name.to_string(),
                    stats.trials.to_string(),
                    fmt(stats.mean),
                    fmt(stats.stderr),
                    stats.min.to_string(),
                    stats.max.to_string(),
                    min_sq.map_or_else(String::new, fmt),
                    format!("{op}(master_seed={seed})"),
                ]);
                let mut rec = stats_record(stats);
                rec["operation"] = json!(op);
                rec["level"] = json!(level);
                rec["convention"] = json!(conv);
                rec["vector"] = json!(name);
                rec["min_square_measure"] = json!(min_sq);
                records.push(rec);
            };
            for (name, p) in &vectors {
                let drv = Driver::bernoulli(p.clone())?;
                let stats = cover_time_mc(&drv, &tracker, &x0, trials, seed, config.ceiling())?;
                let min_sq = min_square_measure(rp, p, level, conv)?;
                push(name, "cover_time_mc", &stats, Some(min_sq));
            }
            let stats = two_dim_cover_time_mc(
                &tracker,
                &uniform_p,
                &uniform_q,
                &x0,
                trials,
                seed,
                config.ceiling(),
            )?;
            push("two_dim_uniform", "two_dim_cover_time_mc", &stats, None);
        }
    }
    arts.add(
        "table2.csv",
        csv_table(
            &[
                "level",
                "convention",
                "prefix_len",
                "squares",
                "vector",
                "trials",
                "mean",
                "stderr",
                "min",
                "max",
                "min_square_measure",
                "provenance",
            ],
            &rows,
        )?,
    );
    arts.add_records("table2.json", &records);
    Ok(())
}

/// Random probability vector with entries bounded away from zero.
pub fn random_probability_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

fn run_oracle(config: &ExperimentConfig, sys: &System, arts: &mut Artifacts) -> Result<()> {
    let mut records = Vec::new();
    match &sys.carpet {
        Some((_, rp)) => {
            let levels = config.levels.clone().unwrap_or_else(|| (1..=8).collect());
            let count = config.samples.unwrap_or(50);
            let mut rng = trial_rng(config.seed(), 0);
            let mut vectors = vec![vec![1.0 / rp.maps() as f64; rp.maps()]];
            vectors.extend((0..count).map(|_| random_probability_vector(rp.maps(), &mut rng)));
            let mut mismatches = 0usize;
            for p in &vectors {
                for &k in &levels {
                    let closed = min_square_measure(rp, p, k, LevelConvention::Floor)?;
                    let (_, brute) = oracle_min_square(rp, p, k, LevelConvention::Floor)?;
                    if closed != brute {
                        mismatches += 1;
                    }
                }
            }
            records.push(json!({
                "operation": "oracle_min_square",
                "vectors": vectors.len(),
                "levels": levels,
                "mismatches": mismatches,
            }));
            if rp.classes() <= 4 {
                let delta = config.grid_step.unwrap_or(1e-3);
                let g = oracle_grid_alpha(rp, delta)?;
                let best = optimize(rp).alpha;
                records.push(json!({
                    "operation": "oracle_grid_alpha",
                    "grid_step": delta,
                    "grid_alpha": g.alpha,
                    "grid_q": g.q,
                    "optimize_alpha": best,
                    "slack": grid_slack(rp, delta),
                    "consistent": g.alpha >= best - 1e-12 && g.alpha <= best + g.slack,
                }));
            }
        }
        None => {
            let drv = config.driver.build(sys)?;
            let Driver::Bernoulli(b) = &drv else {
                return Err(Error::Config(
                    "the exact cover oracle needs a Bernoulli driver".into(),
                ));
            };
            let Some(TrackerSpec::Packing { radius }) = &config.tracker else {
                return Err(Error::Config(
                    "the exact cover oracle needs a packing tracker".into(),
                ));
            };
            let pk = build_packing(&sys.ifs, *radius)?;
            let x0 = start_word(config, sys);
            let exact = oracle_exact_cover_expectation(b, &pk, &x0)?;
            let tracker = PackingTracker::new(pk);
            let stats = cover_time_mc(
                &drv,
                &tracker,
                &x0,
                config.trials_or(10_000),
                config.seed(),
                config.ceiling(),
            )?;
            let (t, big_t) = exact.hitting_extremes();
            records.push(json!({
                "operation": "oracle_exact_cover_expectation",
                "cells": tracker.cell_count(),
                "exact": exact.expectation,
                "mc_mean": stats.mean,
                "mc_stderr": stats.stderr,
                "z": (stats.mean - exact.expectation) / stats.stderr.max(f64::MIN_POSITIVE),
                "hitting_min": t,
                "hitting_max": big_t,
                "cover_from": exact.cover_from,
            }));
        }
    }
    arts.add_records("oracle.json", &records);
    Ok(())
}

/// Render a short text summary of a manifest for the terminal.
pub fn describe(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:?} -> {} (config {})",
        report.manifest.experiment,
        report.out_dir.display(),
        &report.manifest.config_hash[..12]
    );
    for a in &report.manifest.artifacts {
        let _ = writeln!(s, "  {} ({} bytes)", a.file, a.bytes);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_parse() {
        assert_eq!(
            "cover-time".parse::<ExperimentKind>().unwrap(),
            ExperimentKind::CoverTime
        );
        assert_eq!(
            "table1".parse::<ExperimentKind>().unwrap(),
            ExperimentKind::Table1
        );
        assert!("nope".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn config_roundtrip_and_hash() {
        let text = r#"
            experiment = "cover-time"
            seed = 5
            trials = 10
            out = "somewhere"
            [system]
            kind = "cantor"
            [tracker]
            kind = "packing"
            radius = 0.012345679
        "#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(c.trials, Some(10));
        let mut moved = c.clone();
        moved.out = Some("elsewhere".into());
        moved.threads = Some(3);
        assert_eq!(c.hash(), moved.hash());
        let mut other = c.clone();
        other.seed = Some(6);
        assert_ne!(c.hash(), other.hash());
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
    }
}
