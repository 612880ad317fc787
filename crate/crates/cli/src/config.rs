use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use failslow_core::detector::{BocdConfig, DetectorConfig};
use failslow_core::mitigator::{OverheadConfig, StrategyOverheads};
use failslow_core::model::{Link, LinkId, ParallelTopology, TrafficModel};
use failslow_core::sim::{
    BenchmarkConfig, ClusterScenario, InjectionEvent, InjectionTarget, LadderToggles, LoopConfig,
    MitigationConfig, DEFAULT_JITTER_SIGMA,
};

use crate::CliError;

/// One structured scenario document; unknown keys are rejected so config
/// drift fails loudly.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    pub horizon: usize,
    pub topology: TopologySection,
    pub model: ModelSection,
    #[serde(default)]
    pub compute: ComputeSection,
    #[serde(default)]
    pub injections: Vec<InjectionSection>,
    #[serde(default)]
    pub detector: DetectorSection,
    #[serde(default)]
    pub mitigator: MitigatorSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub tp: usize,
    pub dp: usize,
    pub pp: usize,
    pub gpus_per_node: usize,
    pub inter_node_bandwidth: f64,
    pub intra_node_bandwidth: f64,
    /// Explicit link inventory; defaults to a full mesh at
    /// `inter_node_bandwidth`.
    #[serde(default)]
    pub links: Option<Vec<LinkSection>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub a: usize,
    pub b: usize,
    pub bandwidth: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub layers: u64,
    pub hidden: u64,
    pub heads: u64,
    pub head_dim: u64,
    pub vocab: u64,
    pub context: u64,
    pub micro_batch: u64,
    pub num_micro_batches: u64,
    #[serde(default = "default_grad_bytes_factor")]
    pub grad_bytes_factor: f64,
    #[serde(default = "default_element_bytes")]
    pub element_bytes: u64,
}

fn default_grad_bytes_factor() -> f64 {
    TrafficModel::DEFAULT_GRAD_BYTES_FACTOR
}

fn default_element_bytes() -> u64 {
    TrafficModel::DEFAULT_ELEMENT_BYTES
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeSection {
    pub base_compute_s: f64,
    /// Baseline relative speed per GPU id.
    #[serde(default)]
    pub gpu_speeds: BTreeMap<String, f64>,
    #[serde(default = "default_jitter")]
    pub jitter_sigma: f64,
}

fn default_jitter() -> f64 {
    DEFAULT_JITTER_SIGMA
}

impl Default for ComputeSection {
    fn default() -> Self {
        Self {
            base_compute_s: 0.05,
            gpu_speeds: BTreeMap::new(),
            jitter_sigma: DEFAULT_JITTER_SIGMA,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectionSection {
    /// `gpu_slowdown` or `link_congestion`.
    pub kind: String,
    /// GPU id, for `gpu_slowdown`.
    #[serde(default)]
    pub target: Option<usize>,
    /// Link endpoints, for `link_congestion`.
    #[serde(default)]
    pub a: Option<usize>,
    #[serde(default)]
    pub b: Option<usize>,
    pub factor: f64,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSection {
    pub acf_threshold: f64,
    pub bocd_threshold: f64,
    pub hazard_lambda: f64,
    pub verify_margin: f64,
    pub verify_window: usize,
    pub burn_in: usize,
}

impl Default for DetectorSection {
    fn default() -> Self {
        let d = DetectorConfig::default();
        Self {
            acf_threshold: d.acf_threshold,
            bocd_threshold: d.bocd.threshold,
            hazard_lambda: d.bocd.hazard_lambda,
            verify_margin: d.verify_margin,
            verify_window: d.verify_window,
            burn_in: d.burn_in,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MitigatorSection {
    pub enable_s2: bool,
    pub enable_s3: bool,
    pub enable_s4: bool,
    pub s3_pause_s: f64,
    pub storage_bandwidth: f64,
    pub restart_fixed_s: f64,
    /// Explicit overhead overrides; unset entries derive from the model.
    pub s2_overhead_s: Option<f64>,
    pub s3_overhead_s: Option<f64>,
    pub s4_overhead_s: Option<f64>,
    pub min_improvement: f64,
    pub impact_noise_band: f64,
}

impl Default for MitigatorSection {
    fn default() -> Self {
        let o = OverheadConfig::default();
        Self {
            enable_s2: true,
            enable_s3: true,
            enable_s4: true,
            s3_pause_s: o.s3_pause_s,
            storage_bandwidth: o.storage_bandwidth,
            restart_fixed_s: o.restart_fixed_s,
            s2_overhead_s: None,
            s3_overhead_s: None,
            s4_overhead_s: None,
            min_improvement: failslow_core::mitigator::DEFAULT_MIN_IMPROVEMENT,
            impact_noise_band: failslow_core::mitigator::DEFAULT_IMPACT_NOISE_BAND,
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<String>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Input(format!(
                "invalid config {} (line {}, column {}): {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })
    }

    pub fn scenario(&self) -> Result<ClusterScenario, CliError> {
        let t = &self.topology;
        let total = t.tp * t.dp * t.pp;
        if t.gpus_per_node == 0 || !total.is_multiple_of(t.gpus_per_node) {
            return Err(CliError::Input(format!(
                "topology.gpus_per_node: {} must divide total rank count {total}",
                t.gpus_per_node
            )));
        }
        let node_count = total / t.gpus_per_node;
        let links = match &t.links {
            Some(list) => list
                .iter()
                .map(|l| Link {
                    id: LinkId::new(l.a, l.b),
                    bandwidth: l.bandwidth,
                })
                .collect(),
            None => ParallelTopology::full_mesh_links(node_count, t.inter_node_bandwidth),
        };
        let topo = ParallelTopology::canonical(
            t.tp,
            t.dp,
            t.pp,
            t.gpus_per_node,
            links,
            t.intra_node_bandwidth,
        )
        .map_err(|e| CliError::Input(format!("topology: {e}")))?;

        let m = &self.model;
        let model = TrafficModel {
            layers: m.layers,
            hidden: m.hidden,
            heads: m.heads,
            head_dim: m.head_dim,
            vocab: m.vocab,
            context: m.context,
            micro_batch: m.micro_batch,
            num_micro_batches: m.num_micro_batches,
            grad_bytes_factor: m.grad_bytes_factor,
            element_bytes: m.element_bytes,
        };

        let mut gpu_speed = BTreeMap::new();
        for (key, &speed) in &self.compute.gpu_speeds {
            let gpu: usize = key.parse().map_err(|_| {
                CliError::Input(format!("compute.gpu_speeds: bad gpu id {key:?}"))
            })?;
            gpu_speed.insert(gpu, speed);
        }

        let mut injections = Vec::new();
        for (i, inj) in self.injections.iter().enumerate() {
            let target = match inj.kind.as_str() {
                "gpu_slowdown" => {
                    let gpu = inj.target.ok_or_else(|| {
                        CliError::Input(format!("injections[{i}].target: required for gpu_slowdown"))
                    })?;
                    InjectionTarget::Gpu(gpu)
                }
                "link_congestion" => {
                    let (a, b) = match (inj.a, inj.b) {
                        (Some(a), Some(b)) => (a, b),
                        _ => {
                            return Err(CliError::Input(format!(
                                "injections[{i}].a/b: required for link_congestion"
                            )))
                        }
                    };
                    InjectionTarget::Link(LinkId::new(a, b))
                }
                other => {
                    return Err(CliError::Input(format!(
                        "injections[{i}].kind: unknown kind {other:?}"
                    )))
                }
            };
            injections.push(InjectionEvent {
                target,
                factor: inj.factor,
                start_iter: inj.start,
                end_iter: inj.end,
            });
        }

        let scenario = ClusterScenario {
            topo,
            model,
            gpu_speed,
            base_compute: self.compute.base_compute_s,
            injections,
            horizon: self.horizon,
            seed: self.seed,
            jitter_sigma: self.compute.jitter_sigma,
        };
        scenario
            .validate()
            .map_err(|e| CliError::Input(e.to_string()))?;
        Ok(scenario)
    }

    pub fn loop_config(&self, mitigate: bool) -> LoopConfig {
        let d = &self.detector;
        let detector = DetectorConfig {
            acf_threshold: d.acf_threshold,
            bocd: BocdConfig {
                hazard_lambda: d.hazard_lambda,
                threshold: d.bocd_threshold,
                ..BocdConfig::default()
            },
            burn_in: d.burn_in,
            verify_margin: d.verify_margin,
            verify_window: d.verify_window,
        };
        let m = &self.mitigator;
        let overheads = OverheadConfig {
            s3_pause_s: m.s3_pause_s,
            storage_bandwidth: m.storage_bandwidth,
            restart_fixed_s: m.restart_fixed_s,
        };
        let explicit = if m.s2_overhead_s.is_some()
            || m.s3_overhead_s.is_some()
            || m.s4_overhead_s.is_some()
        {
            let model = TrafficModel {
                layers: self.model.layers,
                hidden: self.model.hidden,
                heads: self.model.heads,
                head_dim: self.model.head_dim,
                vocab: self.model.vocab,
                context: self.model.context,
                micro_batch: self.model.micro_batch,
                num_micro_batches: self.model.num_micro_batches,
                grad_bytes_factor: self.model.grad_bytes_factor,
                element_bytes: self.model.element_bytes,
            };
            let base =
                failslow_core::mitigator::strategy_overheads(&model, self.topology.dp, &overheads);
            Some(StrategyOverheads {
                s1: 0.0,
                s2: m.s2_overhead_s.unwrap_or(base.s2),
                s3: m.s3_overhead_s.unwrap_or(base.s3),
                s4: m.s4_overhead_s.unwrap_or(base.s4),
            })
        } else {
            None
        };
        LoopConfig {
            detector,
            mitigation: MitigationConfig {
                enabled: mitigate,
                toggles: LadderToggles {
                    s2: m.enable_s2,
                    s3: m.enable_s3,
                    s4: m.enable_s4,
                },
                overheads,
                explicit_overheads: explicit,
                min_improvement: m.min_improvement,
                impact_noise_band: m.impact_noise_band,
                benchmarks: BenchmarkConfig::default(),
            },
        }
    }
}
