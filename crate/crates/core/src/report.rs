//! Instance ingestion, the end-to-end analysis pipeline, and emission of
//! machine-readable stability reports and figure data.
//!
//! Instances are TOML (human-writable, schema-versioned), reports are JSON
//! with deterministic field order, figure data is CSV. Floats are printed
//! with nine significant digits and infinity serializes as the string
//! `"inf"`, so any plotting tool can consume the output directly.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dynamics::blocking_graph;
use crate::model::{ModelError, Partition, RewardModel, StrategyProfile, DEFAULT_EPSILON};
use crate::stability::{analyze, direct_blocking_oracle, StabilityAnalysis};
use crate::theory::{classify_regime, verify_all, BullyCheck, Verdict};

/// Version stamp of both the instance format and the report schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Cap on cycles listed per blocking graph.
const MAX_CYCLES: usize = 64;

/// Cap on explicit beta-grid points.
const MAX_GRID_POINTS: usize = 10_001;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("failed to read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("instance parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported schema version {got}; this build reads version {expected}")]
    Schema { got: u32, expected: u32 },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("config declares a mu1 sweep; run it through the sweep entry point")]
    SweepConfig,
    #[error("config has no sweep section")]
    NotSweepConfig,
}

/// Congestion rule of the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    EquiDivisible,
    Tabular,
}

/// Link rewards: solo means for equi-divisible instances, a full
/// per-congestion table otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LinksSpec {
    Solo(Vec<f64>),
    Table(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolicBeta {
    pub symbolic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// Cost treatment: symbolic (interval output only) or an explicit grid on
/// which every partition's stability is also evaluated pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Symbolic(SymbolicBeta),
    Grid(BetaGrid),
}

impl Default for BetaSpec {
    fn default() -> Self {
        BetaSpec::Symbolic(SymbolicBeta { symbolic: true })
    }
}

/// A mu1 scan: the instance `links` hold the fixed tail `(mu_2, ..., mu_M)`
/// and each listed value becomes the major link's solo reward in turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub mu1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Checks {
    /// Run the regime predicates and closed-form verdicts.
    pub theory: bool,
    /// Build blocking graphs and list cycles.
    pub cycles: bool,
    /// Costs at which the blocking graph is built.
    pub cycle_betas: Vec<f64>,
}

impl Default for Checks {
    fn default() -> Self {
        Checks { theory: true, cycles: false, cycle_betas: vec![0.0] }
    }
}

/// A parsed, validated instance description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub schema: u32,
    pub players: usize,
    pub mode: Mode,
    pub links: LinksSpec,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub beta: BetaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub checks: Checks,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl InstanceConfig {
    /// Serializes back to instance TOML (the inverse of [`parse_instance`]).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// A validated config plus any normalization warnings.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub config: InstanceConfig,
    pub warnings: Vec<String>,
}

/// Parses and validates instance TOML; unsorted links are auto-sorted with
/// a warning, nonpositive rewards are a hard error.
pub fn parse_instance(text: &str) -> Result<LoadedInstance, ReportError> {
    let mut config: InstanceConfig = toml::from_str(text)?;
    if config.schema != SCHEMA_VERSION {
        return Err(ReportError::Schema { got: config.schema, expected: SCHEMA_VERSION });
    }
    if config.players == 0 {
        return Err(ReportError::Invalid("players must be at least 1".into()));
    }
    if !(config.epsilon > 0.0 && config.epsilon.is_finite()) {
        return Err(ReportError::Invalid(format!("epsilon must be positive, got {}", config.epsilon)));
    }
    let mut warnings = Vec::new();
    validate_links(&mut config, &mut warnings)?;
    validate_beta(&config)?;
    validate_sweep(&config)?;
    for &b in &config.checks.cycle_betas {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(ReportError::Invalid(format!("cycle beta must be finite and nonnegative, got {b}")));
        }
    }
    Ok(LoadedInstance { config, warnings })
}

/// Reads and parses an instance file.
pub fn load_instance(path: &Path) -> Result<LoadedInstance, ReportError> {
    let text = fs::read_to_string(path)
        .map_err(|source| ReportError::Io { path: path.display().to_string(), source })?;
    parse_instance(&text)
}

fn validate_links(config: &mut InstanceConfig, warnings: &mut Vec<String>) -> Result<(), ReportError> {
    match (&mut config.links, config.mode) {
        (LinksSpec::Solo(solo), Mode::EquiDivisible) => {
            if solo.is_empty() {
                return Err(ReportError::Invalid("links must be nonempty".into()));
            }
            for &mu in solo.iter() {
                if !(mu > 0.0 && mu.is_finite()) {
                    return Err(ReportError::Invalid(format!(
                        "link rewards must be strictly positive and finite, got {mu}"
                    )));
                }
            }
            if solo.windows(2).any(|w| w[0] < w[1]) {
                solo.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
                warnings.push("links were not sorted by solo reward; auto-sorted nonincreasing".into());
            }
        }
        (LinksSpec::Table(table), Mode::Tabular) => {
            if config.sweep.is_some() {
                return Err(ReportError::Invalid("mu1 sweeps require equi-divisible mode".into()));
            }
            if table.is_empty() {
                return Err(ReportError::Invalid("links must be nonempty".into()));
            }
            for row in table.iter() {
                if row.len() != config.players {
                    return Err(ReportError::Invalid(format!(
                        "each tabular link needs {} entries (one per congestion level), got {}",
                        config.players,
                        row.len()
                    )));
                }
                for &mu in row {
                    if !(mu > 0.0 && mu.is_finite()) {
                        return Err(ReportError::Invalid(format!(
                            "link rewards must be strictly positive and finite, got {mu}"
                        )));
                    }
                }
            }
            if table.windows(2).any(|w| w[0][0] < w[1][0]) {
                table.sort_by(|a, b| b[0].partial_cmp(&a[0]).expect("finite"));
                warnings.push("links were not sorted by solo reward; auto-sorted nonincreasing".into());
            }
        }
        _ => {
            return Err(ReportError::Invalid(
                "mode and links disagree: equi-divisible takes a list of solo rewards, tabular a list of reward rows".into(),
            ))
        }
    }
    Ok(())
}

fn validate_beta(config: &InstanceConfig) -> Result<(), ReportError> {
    if let BetaSpec::Grid(grid) = config.beta {
        let ok = grid.start >= 0.0
            && grid.start <= grid.stop
            && grid.step > 0.0
            && grid.start.is_finite()
            && grid.stop.is_finite();
        if !ok {
            return Err(ReportError::Invalid(format!(
                "beta grid needs 0 <= start <= stop and step > 0, got start={} stop={} step={}",
                grid.start, grid.stop, grid.step
            )));
        }
        // count arithmetically; materializing first could run away on a
        // tiny step
        let span = (grid.stop - grid.start) / grid.step;
        if !span.is_finite() || span >= MAX_GRID_POINTS as f64 {
            return Err(ReportError::Invalid(format!(
                "beta grid has more than {MAX_GRID_POINTS} points"
            )));
        }
    }
    Ok(())
}

fn validate_sweep(config: &InstanceConfig) -> Result<(), ReportError> {
    let Some(sweep) = &config.sweep else { return Ok(()) };
    if sweep.mu1.is_empty() {
        return Err(ReportError::Invalid("sweep.mu1 must list at least one value".into()));
    }
    for &mu in &sweep.mu1 {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(ReportError::Invalid(format!("sweep mu1 values must be positive, got {mu}")));
        }
    }
    let LinksSpec::Solo(tail) = &config.links else {
        return Err(ReportError::Invalid("mu1 sweeps require equi-divisible mode".into()));
    };
    if tail.len() + 1 < config.players {
        return Err(ReportError::Invalid(format!(
            "sweep needs at least as many links as players: tail has {} entries + mu1 < {} players",
            tail.len(),
            config.players
        )));
    }
    Ok(())
}

fn grid_points(grid: BetaGrid) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let b = grid.start + f64::from(i) * grid.step;
        if b > grid.stop + grid.step * 1e-9 {
            break;
        }
        out.push(b);
        i += 1;
    }
    out
}

/// Builds the reward model of a non-sweep config.
pub fn build_model(config: &InstanceConfig) -> Result<RewardModel, ReportError> {
    if config.sweep.is_some() {
        return Err(ReportError::SweepConfig);
    }
    let model = match &config.links {
        LinksSpec::Solo(solo) => RewardModel::equi_divisible(config.players, solo.clone())?,
        LinksSpec::Table(table) => RewardModel::tabular(config.players, table.clone())?,
    };
    Ok(model)
}

// ---------------------------------------------------------------------------
// float formatting

/// Rounds to nine significant decimal digits (infinities pass through).
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("scientific notation round-trips")
}

/// Formats with nine significant digits, using `inf` for infinities.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{}", round_sig9(x))
    }
}

/// Report float: serialized as a number rounded to nine significant
/// digits, or as the string `"inf"` when infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F9(pub f64);

impl Serialize for F9 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str(if self.0 > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(round_sig9(self.0))
        }
    }
}

struct F9Visitor;

impl Visitor<'_> for F9Visitor {
    type Value = F9;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a number or \"inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<F9, E> {
        Ok(F9(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<F9, E> {
        Ok(F9(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<F9, E> {
        Ok(F9(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<F9, E> {
        match v {
            "inf" => Ok(F9(f64::INFINITY)),
            "-inf" => Ok(F9(f64::NEG_INFINITY)),
            _ => v.parse().map(F9).map_err(E::custom),
        }
    }
}

impl<'de> Deserialize<'de> for F9 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<F9, D::Error> {
        d.deserialize_any(F9Visitor)
    }
}

// ---------------------------------------------------------------------------
// report schema

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LinksOut {
    Solo(Vec<F9>),
    Table(Vec<Vec<F9>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceEcho {
    pub players: usize,
    pub mode: Mode,
    pub links: LinksOut,
    pub epsilon: F9,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeOut {
    pub severe: bool,
    pub gc_unstable_band: bool,
    pub major_rank: Option<usize>,
    pub crowd_rank: Option<usize>,
    pub limited_resources: bool,
    pub mu_bar: F9,
    pub bully_condition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcOut {
    pub unique: bool,
    pub profile: Vec<Vec<usize>>,
    pub worth0: F9,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessOut {
    pub partition: String,
    pub profile: Vec<Vec<usize>>,
    pub coalition: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PessimalOut {
    pub size: usize,
    pub worth0: F9,
    pub witness: Option<WitnessOut>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    Interval,
    UnstableAllBeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOut {
    pub profile: Vec<Vec<usize>>,
    pub worths0: Vec<F9>,
    pub classification: PairKind,
    pub interval: Option<[F9; 2]>,
    pub beta_d: F9,
    pub beta_u: F9,
    /// Some candidate blocks this pair at every cost.
    pub has_always_blocker: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionStatus {
    Analyzed,
    NoPureNe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionOut {
    pub sizes: Vec<usize>,
    pub label: String,
    pub status: PartitionStatus,
    pub equilibria: Vec<PairOut>,
    /// Union of the pair intervals: the exact stable cost set.
    pub stability_set: Vec<[F9; 2]>,
    /// Closed-form upper bound on stable costs (max pair `beta_u`);
    /// derived statistic, the union above is authoritative.
    pub upper_bound: Option<F9>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub label: String,
    pub stable: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOut {
    pub betas: Vec<F9>,
    pub partitions: Vec<GridRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BullyOut {
    pub condition: bool,
    pub witness: Vec<Vec<usize>>,
    pub confirmed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryOut {
    pub severe: Verdict,
    pub gc_band: Verdict,
    pub major_rank: Verdict,
    pub crowd_rank: Verdict,
    pub bully: Option<BullyOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleNodeOut {
    pub partition: String,
    pub profile: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CyclesOut {
    pub beta: F9,
    pub nodes: usize,
    pub edges: usize,
    pub cycles: Vec<Vec<CycleNodeOut>>,
    pub truncated: bool,
}

/// Full machine-readable stability report of one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub schema_version: u32,
    pub instance: InstanceEcho,
    pub regime: Option<RegimeOut>,
    pub gc: GcOut,
    pub pessimal: Vec<PessimalOut>,
    pub partitions: Vec<PartitionOut>,
    pub grid: Option<GridOut>,
    pub theory: Option<TheoryOut>,
    pub cycles: Option<Vec<CyclesOut>>,
    /// Degenerate-instance conditions (non-unique optimizer, games without
    /// pure NEs) that callers should surface.
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

impl StabilityReport {
    /// Deterministic pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

// ---------------------------------------------------------------------------
// pipeline

/// Runs the full pipeline on a non-sweep config: NE cache, pessimal table,
/// stability sets, optional theory verdicts, grid evaluation, and cycles.
///
/// Revalidates the beta treatment, since callers may override it after
/// parsing.
pub fn run_analysis(config: &InstanceConfig) -> Result<StabilityReport, ReportError> {
    validate_beta(config)?;
    let model = build_model(config)?;
    Ok(report_for_model(config, &model, Vec::new()))
}

fn blocks(profile: &StrategyProfile, partition: &Partition) -> Vec<Vec<usize>> {
    profile.blocks_one_based(partition)
}

fn report_for_model(
    config: &InstanceConfig,
    model: &RewardModel,
    mut warnings: Vec<String>,
) -> StabilityReport {
    let eps = config.epsilon;
    let analysis = analyze(model, eps);
    let cache = &analysis.cache;
    let n = model.players();

    let gc_partition = Partition::grand(n);
    let gc_nes = cache.equilibria(0);
    let gc = GcOut {
        unique: cache.gc_unique(),
        profile: blocks(&gc_nes[0].profile, &gc_partition),
        worth0: F9(gc_nes[0].worths[0].worth0),
    };
    if !cache.gc_unique() {
        warnings.push(format!(
            "grand coalition optimizer is not unique ({} tied profiles kept as its equilibria)",
            gc_nes.len()
        ));
    }

    let regime = classify_regime(model, eps).ok().map(|r| RegimeOut {
        severe: r.severe,
        gc_unstable_band: r.gc_unstable_band,
        major_rank: r.major_rank,
        crowd_rank: r.crowd_rank,
        limited_resources: r.limited_resources,
        mu_bar: F9(r.mu_bar),
        bully_condition: r.bully_condition,
    });

    let pessimal: Vec<PessimalOut> = (1..=n)
        .map(|size| PessimalOut {
            size,
            worth0: F9(analysis.pessimal.worth0(size)),
            witness: analysis.pessimal.witness(size).map(|w| {
                let partition = &cache.partitions()[w.partition];
                WitnessOut {
                    partition: partition.label(),
                    profile: blocks(&cache.equilibria(w.partition)[w.equilibrium].profile, partition),
                    coalition: w.coalition,
                }
            }),
        })
        .collect();
    for size in analysis.pessimal.degenerate_sizes() {
        warnings.push(format!(
            "no arrangement with a size-{size} coalition has a pure NE; its pessimal worth is +inf"
        ));
    }

    let mut any_no_pure_ne = false;
    let mut partitions = Vec::with_capacity(analysis.partitions.len());
    for (pi, result) in analysis.partitions.iter().enumerate() {
        if result.no_pure_ne {
            any_no_pure_ne = true;
            warnings.push(format!(
                "partition {} has no pure NE; excluded from stability claims",
                result.partition.label()
            ));
        }
        let equilibria: Vec<PairOut> = cache
            .equilibria(pi)
            .iter()
            .zip(&result.pairs)
            .map(|(ne, pair)| PairOut {
                profile: blocks(&ne.profile, &result.partition),
                worths0: ne.worths.iter().map(|w| F9(w.worth0)).collect(),
                classification: if pair.interval.is_some() {
                    PairKind::Interval
                } else {
                    PairKind::UnstableAllBeta
                },
                interval: pair.interval.map(|(lo, hi)| [F9(lo), F9(hi)]),
                beta_d: F9(pair.beta_d),
                beta_u: F9(pair.beta_u),
                has_always_blocker: pair.has_minus_minus,
            })
            .collect();
        if let (Some(bound), Some(sup)) = (result.cost_ceiling, result.set.supremum()) {
            let agree = (bound.is_infinite() && sup.is_infinite()) || (bound - sup).abs() <= eps;
            if !agree {
                warnings.push(format!(
                    "partition {}: closed-form upper bound {} exceeds the stability set supremum {}",
                    result.partition.label(),
                    fmt_sig9(bound),
                    fmt_sig9(sup)
                ));
            }
        }
        partitions.push(PartitionOut {
            sizes: result.partition.sizes().to_vec(),
            label: result.partition.label(),
            status: if result.no_pure_ne { PartitionStatus::NoPureNe } else { PartitionStatus::Analyzed },
            equilibria,
            stability_set: result.set.intervals().iter().map(|&(lo, hi)| [F9(lo), F9(hi)]).collect(),
            upper_bound: result.cost_ceiling.map(F9),
        });
    }

    let grid = match config.beta {
        BetaSpec::Grid(g) => Some(evaluate_grid(&analysis, g)),
        BetaSpec::Symbolic(_) => None,
    };

    let theory = if config.checks.theory {
        match verify_all(&analysis) {
            Ok(verdicts) => Some(TheoryOut {
                severe: verdicts.severe,
                gc_band: verdicts.gc_band,
                major_rank: verdicts.major_rank,
                crowd_rank: verdicts.crowd_rank,
                bully: verdicts.bully.map(|b: BullyCheck| BullyOut {
                    condition: b.condition,
                    witness: blocks(&b.witness, &Partition::new(vec![n - 1, 1]).expect("n >= 2")),
                    confirmed: b.confirmed,
                }),
            }),
            Err(e) => {
                warnings.push(format!("theory checks skipped: {e}"));
                None
            }
        }
    } else {
        None
    };

    let cycles = if config.checks.cycles {
        Some(
            config
                .checks
                .cycle_betas
                .iter()
                .map(|&beta| cycles_at(&analysis, beta))
                .collect(),
        )
    } else {
        None
    };

    let degenerate =
        !cache.gc_unique() || any_no_pure_ne || !analysis.pessimal.degenerate_sizes().is_empty();

    StabilityReport {
        schema_version: SCHEMA_VERSION,
        instance: InstanceEcho {
            players: n,
            mode: if model.is_equi_divisible() { Mode::EquiDivisible } else { Mode::Tabular },
            links: echo_links(model),
            epsilon: F9(eps),
        },
        regime,
        gc,
        pessimal,
        partitions,
        grid,
        theory,
        cycles,
        degenerate,
        warnings,
    }
}

fn echo_links(model: &RewardModel) -> LinksOut {
    if model.is_equi_divisible() {
        LinksOut::Solo(model.solo_rewards().into_iter().map(F9).collect())
    } else {
        LinksOut::Table(
            (0..model.links())
                .map(|a| (1..=model.players()).map(|k| F9(model.reward_unchecked(a, k))).collect())
                .collect(),
        )
    }
}

/// Pointwise stability per grid cost, via the direct blocking oracle: a
/// partition is stable at `beta` when at least one of its equilibria admits
/// an unblocked fair configuration.
fn evaluate_grid(analysis: &StabilityAnalysis, grid: BetaGrid) -> GridOut {
    let betas = grid_points(grid);
    let partitions = analysis
        .partitions
        .iter()
        .enumerate()
        .map(|(pi, result)| GridRow {
            label: result.partition.label(),
            stable: betas
                .iter()
                .map(|&beta| {
                    analysis.cache.equilibria(pi).iter().any(|ne| {
                        direct_blocking_oracle(&result.partition, ne, beta, &analysis.pessimal, analysis.eps)
                            .stable
                    })
                })
                .collect(),
        })
        .collect();
    GridOut { betas: betas.into_iter().map(F9).collect(), partitions }
}

fn cycles_at(analysis: &StabilityAnalysis, beta: f64) -> CyclesOut {
    let graph = blocking_graph(analysis, beta);
    let (cycles, truncated) = graph.detect_cycles(MAX_CYCLES);
    CyclesOut {
        beta: F9(beta),
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        cycles: cycles
            .into_iter()
            .map(|cycle| {
                cycle
                    .into_iter()
                    .map(|node| {
                        let partition = &analysis.cache.partitions()[node.partition];
                        CycleNodeOut {
                            partition: partition.label(),
                            profile: blocks(
                                &analysis.cache.equilibria(node.partition)[node.equilibrium].profile,
                                partition,
                            ),
                        }
                    })
                    .collect()
            })
            .collect(),
        truncated,
    }
}

// ---------------------------------------------------------------------------
// sweeps and figure data

/// Reports of a mu1 scan, in the order the values were listed.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub mu1: Vec<f64>,
    pub reports: Vec<StabilityReport>,
}

/// Runs the analysis once per sweep value, prepending it to the fixed tail.
pub fn run_sweep(config: &InstanceConfig) -> Result<SweepOutcome, ReportError> {
    let Some(sweep) = &config.sweep else {
        return Err(ReportError::NotSweepConfig);
    };
    let LinksSpec::Solo(tail) = &config.links else {
        return Err(ReportError::Invalid("mu1 sweeps require equi-divisible mode".into()));
    };
    let mut reports = Vec::with_capacity(sweep.mu1.len());
    for &mu1 in &sweep.mu1 {
        let mut solo = Vec::with_capacity(tail.len() + 1);
        solo.push(mu1);
        solo.extend_from_slice(tail);
        let mut warnings = Vec::new();
        if solo.windows(2).any(|w| w[0] < w[1]) {
            solo.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
            warnings.push(format!(
                "sweep value mu1 = {mu1} is below a tail value; links auto-sorted nonincreasing"
            ));
        }
        let model = RewardModel::equi_divisible(config.players, solo)?;
        reports.push(report_for_model(config, &model, warnings));
    }
    Ok(SweepOutcome { mu1: sweep.mu1.clone(), reports })
}

/// One bar of the figure data: a stability interval of one partition at one
/// mu1 value. Partitions unstable at every cost contribute no rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub mu1: f64,
    pub mu1_half_minus_mubar: f64,
    pub partition: String,
    pub interval_lo: f64,
    pub interval_hi: f64,
}

/// Projects figure rows out of a finished report (no recomputation).
pub fn figure_rows(report: &StabilityReport) -> Result<Vec<FigureRow>, ReportError> {
    let mu1 = match &report.instance.links {
        LinksOut::Solo(solo) => solo[0].0,
        LinksOut::Table(table) => table[0][0].0,
    };
    let Some(regime) = &report.regime else {
        return Err(ReportError::Invalid(
            "figure data needs the regime block (at least as many links as players)".into(),
        ));
    };
    let offset = mu1 / 2.0 - regime.mu_bar.0;
    let mut rows = Vec::new();
    for partition in &report.partitions {
        for interval in &partition.stability_set {
            rows.push(FigureRow {
                mu1,
                mu1_half_minus_mubar: offset,
                partition: partition.label.clone(),
                interval_lo: interval[0].0,
                interval_hi: interval[1].0,
            });
        }
    }
    Ok(rows)
}

/// CSV emission of a whole sweep: one row per (mu1, partition, interval).
pub fn figure_csv(outcome: &SweepOutcome) -> Result<String, ReportError> {
    let mut out = String::from("mu1,mu1_half_minus_mubar,partition,interval_lo,interval_hi\n");
    for report in &outcome.reports {
        for row in figure_rows(report)? {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_sig9(row.mu1),
                fmt_sig9(row.mu1_half_minus_mubar),
                row.partition,
                fmt_sig9(row.interval_lo),
                fmt_sig9(row.interval_hi)
            ));
        }
    }
    Ok(out)
}
