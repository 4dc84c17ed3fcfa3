//! Scenario configuration: a single TOML file with nested sections.
//! Unknown keys are rejected so typos fail loudly instead of silently
//! running a different experiment.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use afd_core::distfit::PdfFamily;
use afd_core::inputdesign::DesignOptions;
use afd_core::sysmodel::three_tank::{builtin_bank, ThreeTankConfig};
use afd_core::sysmodel::{InitState, ModelBank};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Benchmark-parity scale: 10000 Monte Carlo samples.
    Paper,
    /// Desk scale: 2000 samples.
    Desk,
}

impl Profile {
    pub fn mc_count(self) -> usize {
        match self {
            Profile::Paper => 10_000,
            Profile::Desk => 2_000,
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            other => Err(format!(
                "unknown profile `{other}` (expected `paper` or `desk`)"
            )),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub horizon: HorizonSection,
    pub robustness: RobustnessSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub init: Option<InitSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    /// Builtin bank name; `three-tank` is provided.
    pub bank: String,
    /// Parameter table: `nominal` or `true`.
    pub table: String,
    pub seed: u64,
    pub mc_count: Option<usize>,
    #[serde(default = "default_family")]
    pub fit_family: String,
    pub out_dir: Option<PathBuf>,
    pub noise_std: Option<f64>,
}

fn default_family() -> String {
    "normal".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonSection {
    pub t_final: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub measurement_interval: Option<f64>,
    pub measurement_times: Option<Vec<f64>>,
}

fn default_dt() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessSection {
    /// TV radius per model.
    pub radius: Vec<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub grid_points: Option<usize>,
    pub nm_max_evals: Option<usize>,
    pub nm_f_tol: Option<f64>,
    pub inner_max_iters: Option<usize>,
    pub inner_tol: Option<f64>,
    pub clamp_quantile: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub fixed: Option<Vec<f64>>,
    pub uniform: Option<Vec<[f64; 2]>>,
}

/// A validated, resolved configuration ready to drive a run.
pub struct Resolved {
    pub bank: ModelBank,
    pub measurement_times: Vec<f64>,
    pub horizon: f64,
    pub design: DesignOptions,
    pub family: PdfFamily,
    pub out_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }

    /// Validates and resolves the configuration. CLI overrides win over the
    /// config file, which wins over profile defaults.
    pub fn resolve(
        &self,
        profile: Profile,
        seed_override: Option<u64>,
        mc_override: Option<usize>,
        out_override: Option<PathBuf>,
    ) -> Result<Resolved, String> {
        let family = match self.scenario.fit_family.as_str() {
            "normal" => PdfFamily::Normal,
            "gamma" => PdfFamily::Gamma,
            "beta" => PdfFamily::Beta,
            other => return Err(format!("scenario.fit_family: unknown family `{other}`")),
        };

        let mut tank_cfg = match self.scenario.table.as_str() {
            "nominal" => ThreeTankConfig::nominal(),
            "true" => ThreeTankConfig::true_system(),
            other => {
                return Err(format!(
                    "scenario.table: expected `nominal` or `true`, got `{other}`"
                ))
            }
        };
        if let Some(std) = self.scenario.noise_std {
            if std.is_nan() || std < 0.0 || !std.is_finite() {
                return Err(format!("scenario.noise_std must be nonnegative, got {std}"));
            }
            tank_cfg.noise_std = std;
        }
        if let Some(init) = &self.init {
            tank_cfg.init = match (&init.fixed, &init.uniform) {
                (Some(x0), None) => InitState::Fixed(x0.clone()),
                (None, Some(ranges)) => {
                    InitState::Uniform(ranges.iter().map(|r| (r[0], r[1])).collect())
                }
                _ => return Err("init: set exactly one of `fixed` or `uniform`".into()),
            };
        }
        let bank = builtin_bank(&self.scenario.bank, &tank_cfg)
            .map_err(|e| format!("scenario.bank: {e}"))?;

        let radii = &self.robustness.radius;
        if radii.len() != bank.model_count() {
            return Err(format!(
                "robustness.radius: need {} entries (one per model), got {}",
                bank.model_count(),
                radii.len()
            ));
        }
        for (j, r) in radii.iter().enumerate() {
            if !(0.0..=1.0).contains(r) {
                return Err(format!(
                    "robustness.radius[{j}]: TV radius must lie in [0, 1], got {r}"
                ));
            }
        }

        let t_final = self.horizon.t_final;
        if t_final.is_nan() || t_final <= 0.0 {
            return Err(format!("horizon.t_final must be positive, got {t_final}"));
        }
        if self.horizon.dt.is_nan() || self.horizon.dt <= 0.0 {
            return Err(format!(
                "horizon.dt must be positive, got {}",
                self.horizon.dt
            ));
        }
        let times = match (
            &self.horizon.measurement_times,
            self.horizon.measurement_interval,
        ) {
            (Some(times), None) => times.clone(),
            (None, Some(step)) => {
                if step.is_nan() || step <= 0.0 || step > t_final {
                    return Err(format!(
                        "horizon.measurement_interval must lie in (0, t_final], got {step}"
                    ));
                }
                let count = (t_final / step).round() as usize;
                (1..=count).map(|k| k as f64 * step).collect()
            }
            _ => {
                return Err(
                    "horizon: set exactly one of `measurement_interval` or `measurement_times`"
                        .into(),
                )
            }
        };
        if times.is_empty()
            || times[0] <= 0.0
            || times.windows(2).any(|w| w[1] <= w[0])
            || *times.last().unwrap() > t_final + 1e-9
        {
            return Err(
                "horizon.measurement_times must be strictly increasing within (0, t_final]".into(),
            );
        }

        let seed = seed_override.unwrap_or(self.scenario.seed);
        let mc_count = mc_override
            .or(self.scenario.mc_count)
            .unwrap_or_else(|| profile.mc_count());
        if mc_count < 100 {
            return Err(format!("mc_count must be at least 100, got {mc_count}"));
        }

        let mut design = DesignOptions::new(seed, radii.clone());
        design.mc_count = mc_count;
        design.family = family;
        design.dt = self.horizon.dt;
        if let Some(g) = self.solver.grid_points {
            if g < 2 {
                return Err(format!("solver.grid_points must be at least 2, got {g}"));
            }
            design.grid_points = g;
        }
        if let Some(m) = self.solver.nm_max_evals {
            design.nm.max_evals = m;
        }
        if let Some(t) = self.solver.nm_f_tol {
            design.nm.f_tol = t;
        }
        if let Some(m) = self.solver.inner_max_iters {
            design.inner.max_iters = m;
        }
        if let Some(t) = self.solver.inner_tol {
            design.inner.tol = t;
        }
        if let Some(q) = self.solver.clamp_quantile {
            if !(0.0..1.0).contains(&q) {
                return Err(format!("solver.clamp_quantile must lie in [0, 1), got {q}"));
            }
            design.clamp_quantile = if q == 0.0 { None } else { Some(q) };
        }

        let out_dir = out_override
            .or_else(|| self.scenario.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("afd-run"));
        let out_dir = match std::env::var_os("AFD_OUT_ROOT") {
            Some(root) if out_dir.is_relative() => PathBuf::from(root).join(out_dir),
            _ => out_dir,
        };

        Ok(Resolved {
            bank,
            measurement_times: times,
            horizon: t_final,
            design,
            family,
            out_dir,
        })
    }
}
