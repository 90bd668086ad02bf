//! Experiment configuration and its validation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rejection of a configuration field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid `{field}`: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhyMode {
    Sinr,
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    RandomPush,
    MobilePush,
}

/// Boundary behavior of the subsquare walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mobility {
    /// Moves off the grid are replaced by staying put.
    EdgeStay,
    /// The grid wraps around as a discrete torus.
    TorusWrap,
    /// Nodes never move.
    Static,
}

/// When the k messages enter the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InjectionSchedule {
    /// All k sources hold their message at t = 0.
    Simultaneous,
    /// Messages 0..k-1 start at t = 0; message k-1 (the late message) is
    /// injected once every node holds at least `w` distinct messages.
    LateStar { w: usize },
}

/// Earliest-satisfied halting rule. The slot budget always applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StopCondition {
    AllComplete,
    MessageComplete(usize),
    SlotBudget,
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl TryFrom<String> for $ty {
            type Error = ConfigError;
            fn try_from(s: String) -> Result<Self, Self::Error> {
                s.parse()
            }
        }

        impl From<$ty> for String {
            fn from(v: $ty) -> String {
                v.to_string()
            }
        }
    };
}

string_serde!(InjectionSchedule);
string_serde!(StopCondition);

impl fmt::Display for InjectionSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InjectionSchedule::Simultaneous => f.write_str("simultaneous"),
            InjectionSchedule::LateStar { w } => write!(f, "late:{w}"),
        }
    }
}

impl FromStr for InjectionSchedule {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "simultaneous" {
            return Ok(InjectionSchedule::Simultaneous);
        }
        if let Some(w) = s.strip_prefix("late:") {
            let w = w
                .parse()
                .map_err(|_| ConfigError::new("injection", format!("bad threshold in `{s}`")))?;
            return Ok(InjectionSchedule::LateStar { w });
        }
        Err(ConfigError::new(
            "injection",
            format!("expected `simultaneous` or `late:<w>`, got `{s}`"),
        ))
    }
}

impl fmt::Display for StopCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopCondition::AllComplete => f.write_str("all_complete"),
            StopCondition::MessageComplete(i) => write!(f, "message_complete:{i}"),
            StopCondition::SlotBudget => f.write_str("slot_budget"),
        }
    }
}

impl FromStr for StopCondition {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "all_complete" => Ok(StopCondition::AllComplete),
            "slot_budget" => Ok(StopCondition::SlotBudget),
            other => other
                .strip_prefix("message_complete:")
                .and_then(|i| i.parse().ok())
                .map(StopCondition::MessageComplete)
                .ok_or_else(|| {
                    ConfigError::new(
                        "stop",
                        format!(
                            "expected `all_complete`, `message_complete:<i>` or `slot_budget`, got `{other}`"
                        ),
                    )
                }),
        }
    }
}

macro_rules! enum_from_str {
    ($ty:ty, $field:literal, { $($name:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = ConfigError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim() {
                    $($name => Ok($variant),)+
                    other => Err(ConfigError::new(
                        $field,
                        format!("unknown value `{}` (expected one of: {})", other, [$($name),+].join(", ")),
                    )),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $variant { return f.write_str($name); })+
                unreachable!()
            }
        }
    };
}

enum_from_str!(PhyMode, "phy_mode", { "sinr" => PhyMode::Sinr, "bernoulli" => PhyMode::Bernoulli });
enum_from_str!(Protocol, "protocol", {
    "random_push" => Protocol::RandomPush,
    "mobile_push" => Protocol::MobilePush,
});
enum_from_str!(Mobility, "mobility", {
    "edge_stay" => Mobility::EdgeStay,
    "torus_wrap" => Mobility::TorusWrap,
    "static" => Mobility::Static,
});

pub const DEFAULT_THETA: f64 = 0.3;
pub const DEFAULT_ALPHA: f64 = 4.0;
pub const DEFAULT_BETA: f64 = 2.0;
pub const DEFAULT_ETA: f64 = 1.0;
pub const DEFAULT_C_SUCCESS: f64 = 0.5;
pub const DEFAULT_MAX_SLOTS: u64 = 100_000;
/// Target SINR margin of a lone pair at the typical nearest-receiver distance.
pub const POWER_MARGIN: f64 = 10.0;

fn default_theta() -> f64 {
    DEFAULT_THETA
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_beta() -> f64 {
    DEFAULT_BETA
}
fn default_eta() -> f64 {
    DEFAULT_ETA
}
fn default_c_success() -> f64 {
    DEFAULT_C_SUCCESS
}
fn default_max_slots() -> u64 {
    DEFAULT_MAX_SLOTS
}
fn default_phy() -> PhyMode {
    PhyMode::Bernoulli
}
fn default_protocol() -> Protocol {
    Protocol::MobilePush
}
fn default_mobility() -> Mobility {
    Mobility::EdgeStay
}
fn default_injection() -> InjectionSchedule {
    InjectionSchedule::Simultaneous
}
fn default_stop() -> StopCondition {
    StopCondition::AllComplete
}

/// Full description of one simulation run.
///
/// After [`validate`], `v` holds the snapped velocity `1/s` and `P` holds a
/// concrete transmit power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub k: usize,
    pub v: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_phy")]
    pub phy_mode: PhyMode,
    /// Transmit power. `None` selects the density-calibrated rule.
    #[serde(rename = "P", default)]
    pub power: Option<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_c_success")]
    pub c_success: f64,
    #[serde(default = "default_protocol")]
    pub protocol: Protocol,
    #[serde(default = "default_mobility")]
    pub mobility: Mobility,
    #[serde(default = "default_injection")]
    pub injection: InjectionSchedule,
    #[serde(default = "default_stop")]
    pub stop: StopCondition,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_slots")]
    pub max_slots: u64,
    /// Metric sampling stride; `None` means `max(1, max_slots / 2048)`.
    #[serde(default)]
    pub sample_stride: Option<u64>,
}

impl SimConfig {
    /// A config with every optional field at its default.
    pub fn new(n: usize, k: usize, v: f64) -> Self {
        SimConfig {
            n,
            k,
            v,
            theta: DEFAULT_THETA,
            phy_mode: default_phy(),
            power: None,
            eta: DEFAULT_ETA,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            c_success: DEFAULT_C_SUCCESS,
            protocol: default_protocol(),
            mobility: default_mobility(),
            injection: default_injection(),
            stop: default_stop(),
            seed: 0,
            max_slots: DEFAULT_MAX_SLOTS,
            sample_stride: None,
        }
    }

    /// Grid side `s = round(1/v)`.
    pub fn grid_side(&self) -> usize {
        (1.0 / self.v).round().max(1.0) as usize
    }

    /// Number of subsquares `m = s²`.
    pub fn cells(&self) -> usize {
        let s = self.grid_side();
        s * s
    }

    /// Snapped velocity `1/s`.
    pub fn v_eff(&self) -> f64 {
        1.0 / self.grid_side() as f64
    }

    pub fn stride(&self) -> u64 {
        self.sample_stride
            .unwrap_or_else(|| (self.max_slots / 2048).max(1))
    }

    /// Transmit power actually used (calibrated when unset).
    pub fn effective_power(&self) -> f64 {
        self.power.unwrap_or_else(|| {
            calibrated_power(self.n, self.theta, self.alpha, self.beta, self.eta)
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Typical distance from a sender to its nearest potential receiver.
pub fn typical_pair_distance(n: usize, theta: f64) -> f64 {
    (1.0 / (theta * n as f64)).sqrt()
}

/// Power that gives a lone pair at [`typical_pair_distance`] an SINR of
/// `POWER_MARGIN * beta`. With zero noise any power works; 1 is returned.
pub fn calibrated_power(n: usize, theta: f64, alpha: f64, beta: f64, eta: f64) -> f64 {
    if eta <= 0.0 {
        return 1.0;
    }
    POWER_MARGIN * beta * eta * typical_pair_distance(n, theta).powf(alpha)
}

fn check(
    cond: bool,
    field: &'static str,
    reason: impl FnOnce() -> String,
) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(ConfigError::new(field, reason()))
    }
}

/// Checks every field and returns the normalized config: `v` snapped to
/// `1/round(1/v)` and `P` resolved. Validating a normalized config is the
/// identity.
pub fn validate(config: &SimConfig) -> Result<SimConfig, ConfigError> {
    let c = config;
    check(c.n >= 1, "n", || "must be a positive integer".into())?;
    check(c.k >= 1 && c.k <= c.n, "k", || {
        format!("must satisfy 1 <= k <= n (k = {}, n = {})", c.k, c.n)
    })?;
    check(c.v.is_finite() && c.v > 0.0, "v", || {
        format!("must be a positive real, got {}", c.v)
    })?;
    let s = (1.0 / c.v).round();
    check(c.v <= 1.0 / 3.0 + 1e-9, "v", || {
        format!("must lie in (0, 1/3], got {}", c.v)
    })?;
    check((1.0..=1e6).contains(&s), "v", || {
        format!("grid side round(1/v) = {s} out of range")
    })?;
    check(c.theta > 0.0 && c.theta < 0.5, "theta", || {
        format!("sender probability must lie in (0, 0.5), got {}", c.theta)
    })?;
    check(c.alpha.is_finite() && c.alpha > 2.0, "alpha", || {
        format!("path-loss exponent must exceed 2, got {}", c.alpha)
    })?;
    check(c.beta.is_finite() && c.beta > 0.0, "beta", || {
        format!("SINR threshold must be positive, got {}", c.beta)
    })?;
    check(c.eta.is_finite() && c.eta >= 0.0, "eta", || {
        format!("noise power must be non-negative, got {}", c.eta)
    })?;
    if let Some(p) = c.power {
        check(p.is_finite() && p > 0.0, "P", || {
            format!("transmit power must be positive, got {p}")
        })?;
    }
    check(c.c_success > 0.0 && c.c_success <= 1.0, "c_success", || {
        format!(
            "success probability must lie in (0, 1], got {}",
            c.c_success
        )
    })?;
    if let InjectionSchedule::LateStar { w } = c.injection {
        check(c.k >= 2, "injection", || {
            "late injection needs k >= 2".into()
        })?;
        check(w >= 1 && w < c.k, "injection", || {
            format!(
                "threshold w must lie in [1, k-1] = [1, {}], got {w}",
                c.k - 1
            )
        })?;
    }
    if let StopCondition::MessageComplete(i) = c.stop {
        check(i < c.k, "stop", || {
            format!("message {i} does not exist (k = {})", c.k)
        })?;
    }
    if let Some(stride) = c.sample_stride {
        check(stride >= 1, "sample_stride", || "must be at least 1".into())?;
    }

    let mut out = c.clone();
    out.v = 1.0 / s;
    out.power = Some(out.effective_power());
    Ok(out)
}
