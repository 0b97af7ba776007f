//! Scenario configuration. Logarithmic units are converted to linear SI
//! here and nowhere else.

use std::path::Path;
use std::time::Duration;

use etcrb_conic::IpmSettings;
use etcrb_core::design::{DesignProblem, Solver};
use etcrb_core::fisher::{EtResponses, FisherOperators, SensingConfig};
use etcrb_core::geometry::{ellipse_cloud, user_channel, ArrayGeometry, EllipseLayout, EtParams, EtPointCloud, UserSpec};
use etcrb_core::subspace::SubspaceBasis;
use etcrb_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub elements: usize,
    pub carrier_hz: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self { elements: 64, carrier_hz: 4.9e9 }
    }
}

/// Scattering coefficients of the cloud points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    /// The same coefficient at every point.
    Uniform { re: f64, im: f64 },
    /// Fixed amplitude, phases drawn from the scenario seed.
    RandomPhase { amplitude: f64 },
    /// One `[re, im]` pair per point, in cloud order.
    Values { values: Vec<[f64; 2]> },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Uniform { re: 1.0, im: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetConfig {
    pub xc: f64,
    pub yc: f64,
    pub phi_deg: f64,
    /// Semi-major axis, m.
    pub length: f64,
    /// Semi-minor axis, m.
    pub width: f64,
    pub layout: EllipseLayout,
    pub profile: Profile,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self { xc: 0.0, yc: 20.0, phi_deg: 30.0, length: 3.0, width: 0.8, layout: EllipseLayout::default(), profile: Profile::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserConfig {
    pub range: f64,
    pub angle_deg: f64,
    /// Complex channel gain `[re, im]`.
    pub gain: [f64; 2],
    pub sinr_db: f64,
}

impl Default for UserConfig {
    fn default() -> Self {
        Self { range: 15.0, angle_deg: -25.0, gain: [1.0, 0.0], sinr_db: 15.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerConfig {
    pub pmax_dbw: f64,
    pub comm_noise_dbm: f64,
    pub sensing_noise_dbm: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self { pmax_dbw: 0.0, comm_noise_dbm: -30.0, sensing_noise_dbm: -30.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Per-solve wall-clock budget in seconds.
    pub time_limit_s: Option<f64>,
    pub whiten: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { feas_tol: 1e-7, gap_tol: 1e-7, max_iter: 500, time_limit_s: None, whiten: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub array: ArrayConfig,
    pub target: TargetConfig,
    pub users: Vec<UserConfig>,
    pub power: PowerConfig,
    pub snapshots: usize,
    pub subspace_tol: f64,
    pub solver: SolverConfig,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            array: ArrayConfig::default(),
            target: TargetConfig::default(),
            users: vec![UserConfig::default(), UserConfig { range: 18.0, angle_deg: 35.0, ..UserConfig::default() }],
            power: PowerConfig::default(),
            snapshots: 16,
            subspace_tol: 1e-6,
            solver: SolverConfig::default(),
            seed: 0,
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    check(v.is_finite(), || format!("{name} must be finite, got {v}"))
}

impl ScenarioConfig {
    /// The larger-target geometry used for power sweeps.
    pub fn power_sweep_default() -> Self {
        let mut c = Self::default();
        c.target.length = 5.0;
        c.target.width = 1.5;
        c
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Config(format!("{}: {j}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        check(self.array.elements >= 2, || format!("array.elements must be >= 2, got {}", self.array.elements))?;
        check(self.array.carrier_hz.is_finite() && self.array.carrier_hz > 0.0, || "array.carrier_hz must be positive".into())?;
        let t = &self.target;
        for (name, v) in [("target.xc", t.xc), ("target.yc", t.yc), ("target.phi_deg", t.phi_deg)] {
            finite(name, v)?;
        }
        check(t.length.is_finite() && t.width.is_finite() && t.length >= t.width && t.width > 0.0, || {
            format!("target axes need length >= width > 0, got {} and {}", t.length, t.width)
        })?;
        check(t.yc > 0.0, || "target must lie in front of the array (yc > 0)".into())?;
        check(t.layout.num_points() > 0, || "target.layout has no points".into())?;
        match &t.profile {
            Profile::Uniform { re, im } => {
                finite("profile.re", *re)?;
                finite("profile.im", *im)?;
            }
            Profile::RandomPhase { amplitude } => {
                check(amplitude.is_finite() && *amplitude > 0.0, || "profile.amplitude must be positive".into())?
            }
            Profile::Values { values } => {
                check(values.len() == t.layout.num_points(), || {
                    format!("profile has {} values for {} points", values.len(), t.layout.num_points())
                })?;
                check(values.iter().flatten().all(|v| v.is_finite()), || "profile values must be finite".into())?;
            }
        }
        for (k, u) in self.users.iter().enumerate() {
            check(u.range.is_finite() && u.range > 0.0, || format!("users[{k}].range must be positive"))?;
            check(u.angle_deg.abs() < 90.0, || format!("users[{k}].angle_deg must lie in (-90, 90)"))?;
            finite("user gain", u.gain[0])?;
            finite("user gain", u.gain[1])?;
            check(u.gain != [0.0, 0.0], || format!("users[{k}].gain is zero"))?;
            finite("users.sinr_db", u.sinr_db)?;
        }
        for (name, v) in [
            ("power.pmax_dbw", self.power.pmax_dbw),
            ("power.comm_noise_dbm", self.power.comm_noise_dbm),
            ("power.sensing_noise_dbm", self.power.sensing_noise_dbm),
        ] {
            finite(name, v)?;
        }
        check(self.snapshots > 0, || "snapshots must be positive".into())?;
        check(self.subspace_tol > 0.0 && self.subspace_tol < 1.0, || "subspace_tol must lie in (0, 1)".into())?;
        let s = &self.solver;
        check(s.feas_tol > 0.0 && s.gap_tol > 0.0, || "solver tolerances must be positive".into())?;
        check(s.max_iter > 0, || "solver.max_iter must be positive".into())?;
        if let Some(t) = s.time_limit_s {
            check(t.is_finite() && t > 0.0, || "solver.time_limit_s must be positive".into())?;
        }
        Ok(())
    }

    /// Short stable digest of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn solver(&self) -> Solver {
        let settings = IpmSettings {
            feas_tol: self.solver.feas_tol,
            gap_tol: self.solver.gap_tol,
            max_iter: self.solver.max_iter,
            time_limit: self.solver.time_limit_s.map(Duration::from_secs_f64),
            ..IpmSettings::default()
        };
        Solver { settings, whiten: self.solver.whiten, ..Solver::default() }
    }

    pub fn eta(&self) -> Result<EtParams<f64>> {
        let t = &self.target;
        Ok(EtParams::new(t.xc, t.yc, t.phi_deg.to_radians(), t.length, t.width)?)
    }

    fn profile(&self, m: usize) -> Vec<C64> {
        match &self.target.profile {
            Profile::Uniform { re, im } => vec![C64::new(*re, *im); m],
            Profile::RandomPhase { amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..m).map(|_| C64::from_polar(*amplitude, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))).collect()
            }
            Profile::Values { values } => values.iter().map(|v| C64::new(v[0], v[1])).collect(),
        }
    }

    /// Builds every model object the solvers need.
    pub fn build(&self) -> Result<Scenario> {
        self.validate()?;
        let ctx = |what: &str| {
            let what = what.to_string();
            move |source| Error::Scenario { context: format!("building {what}"), source }
        };
        let array = ArrayGeometry::ula(self.array.elements, self.array.carrier_hz).map_err(ctx("array"))?;
        let eta = self.eta()?;
        let cloud = ellipse_cloud(&eta, &self.target.layout).map_err(ctx("target cloud"))?;
        let cloud = cloud.with_profile(self.profile(self.target.layout.num_points())).map_err(ctx("target profile"))?;
        let resp = EtResponses::build(&cloud, &array).map_err(ctx("target responses"))?;
        let ops = FisherOperators::build(&resp);
        let mut channels = Vec::with_capacity(self.users.len());
        for (k, u) in self.users.iter().enumerate() {
            let spec = UserSpec {
                range: u.range,
                angle: u.angle_deg.to_radians(),
                gain: C64::new(u.gain[0], u.gain[1]),
                sinr_target: db_to_linear(u.sinr_db),
            };
            channels.push(user_channel(&array, &spec).map_err(ctx(&format!("user {k}")))?);
        }
        let sensing = SensingConfig::new(self.snapshots, dbm_to_watts(self.power.sensing_noise_dbm))?;
        let problem = DesignProblem::new(
            channels,
            self.users.iter().map(|u| db_to_linear(u.sinr_db)).collect(),
            dbm_to_watts(self.power.comm_noise_dbm),
            db_to_linear(self.power.pmax_dbw),
            sensing,
            ops.q().clone(),
        )
        .map_err(ctx("design problem"))?;
        Ok(Scenario { array, eta, cloud, resp, ops, problem, subspace_tol: self.subspace_tol })
    }
}

/// Model objects derived from one config.
pub struct Scenario {
    pub array: ArrayGeometry<f64>,
    pub eta: EtParams<f64>,
    pub cloud: EtPointCloud<f64>,
    pub resp: EtResponses<f64>,
    pub ops: FisherOperators<f64>,
    pub problem: DesignProblem,
    pub subspace_tol: f64,
}

impl Scenario {
    pub fn basis(&self) -> Result<SubspaceBasis<f64>> {
        self.basis_with_tol(self.subspace_tol)
    }

    pub fn basis_with_tol(&self, tol: f64) -> Result<SubspaceBasis<f64>> {
        SubspaceBasis::build(&self.problem.channels, &self.resp, tol)
            .map_err(|source| Error::Scenario { context: "building subspace basis".into(), source })
    }
}
