//! Scenario files: JSON documents describing a network, its sources, their
//! internal-mode overlaps, the detectors and the photon cutoff.
//!
//! ```json
//! {
//!   "network": { "preset": "hadamard-bs" },
//!   "sources": [
//!     { "type": "fock", "params": { "n": 1 }, "mode_vector": [[1, 0], [0, 0]] },
//!     { "type": "fock", "params": { "n": 1 }, "mode_vector": [[0.6, 0], [0.8, 0]] }
//!   ],
//!   "detectors": [1.0, 1.0]
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs. Exactly one of per-source
//! `mode_vector` and a top-level `gram` matrix must be given.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::path::Path;

use photocount::distinguishability::{GramMatrix, ModeVector};
use photocount::engine::{DetectorBank, Scenario};
use photocount::linalg::ComplexMatrix;
use photocount::multimode::{HusimiMode, MultimodeScenario, SamplableHusimiSource};
use photocount::sources::{SingleModeSource, DEFAULT_TRUNCATION_TOLERANCE};
use photocount::{Error, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub type Pair = [f64; 2];
pub type MatrixSpec = Vec<Vec<Pair>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub network: NetworkSpec,
    pub sources: Vec<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<MatrixSpec>,
    pub detectors: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multimode: Option<MultimodeSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Identity,
    Beamsplitter,
    HadamardBs,
    Dft,
}

/// Either a named preset with its parameters or an explicit matrix.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceType {
    Vacuum,
    Fock,
    Coherent,
    Thermal,
    Custom,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cut: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(rename = "type")]
    pub kind: SourceType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<SourceParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_vector: Option<Vec<Pair>>,
}

/// Settings for the Monte-Carlo zero-count estimate. When `sources` is
/// absent, `d` must be 1 and the top-level sources are used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultimodeSpec {
    pub d: usize,
    pub sample_count: usize,
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<Vec<SourceSpec>>>,
}

fn c(z: Pair) -> C64 {
    C64::new(z[0], z[1])
}

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

pub fn matrix(spec: &MatrixSpec, what: &str) -> photocount::Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = spec.iter().map(|r| r.iter().copied().map(c).collect()).collect();
    ComplexMatrix::from_rows(rows).map_err(|e| invalid(format!("{what}: {e}")))
}

fn matrix_spec(m: &ComplexMatrix) -> MatrixSpec {
    m.to_rows().into_iter().map(|r| r.into_iter().map(pair).collect()).collect()
}

pub fn beamsplitter(theta: f64, phi: f64) -> ComplexMatrix {
    let (s, co) = theta.sin_cos();
    let e = C64::from_polar(1.0, phi);
    ComplexMatrix::from_rows(vec![
        vec![C64::new(co, 0.0), e * s],
        vec![-e.conj() * s, C64::new(co, 0.0)],
    ])
    .expect("2x2 rows")
}

pub fn dft(m: usize) -> ComplexMatrix {
    let norm = 1.0 / (m as f64).sqrt();
    ComplexMatrix::from_fn(m, m, |k, l| {
        let phase = 2.0 * PI * ((k * l) % m) as f64 / m as f64;
        C64::from_polar(norm, phase)
    })
}

impl NetworkSpec {
    /// The network matrix; `identity` and `dft` default to one port per source.
    pub fn resolve(&self, default_size: usize) -> photocount::Result<ComplexMatrix> {
        let preset_only = |name: &str, allowed: &[&str]| -> photocount::Result<()> {
            let given = [
                ("size", self.size.is_some()),
                ("theta", self.theta.is_some()),
                ("phi", self.phi.is_some()),
                ("matrix", self.matrix.is_some()),
            ];
            match given.iter().find(|(field, set)| *set && !allowed.contains(field)) {
                Some((field, _)) => Err(invalid(format!("network: preset {name} does not take `{field}`"))),
                None => Ok(()),
            }
        };
        match self.preset {
            None => {
                let spec = self.matrix.as_ref().ok_or_else(|| invalid("network: give either `preset` or `matrix`"))?;
                preset_only("(none)", &["matrix"])?;
                matrix(spec, "network")
            }
            Some(Preset::Identity) => {
                preset_only("identity", &["size"])?;
                Ok(ComplexMatrix::identity(self.size.unwrap_or(default_size)))
            }
            Some(Preset::Dft) => {
                preset_only("dft", &["size"])?;
                let m = self.size.unwrap_or(default_size);
                if m == 0 {
                    return Err(invalid("network: dft size must be positive"));
                }
                Ok(dft(m))
            }
            Some(Preset::Beamsplitter) => {
                preset_only("beamsplitter", &["theta", "phi"])?;
                Ok(beamsplitter(self.theta.unwrap_or(FRAC_PI_4), self.phi.unwrap_or(0.0)))
            }
            Some(Preset::HadamardBs) => {
                preset_only("hadamard-bs", &[])?;
                let r = FRAC_1_SQRT_2;
                ComplexMatrix::from_real_rows(&[&[r, r], &[r, -r]])
            }
        }
    }
}

impl SourceSpec {
    fn params(&self) -> SourceParams {
        self.params.clone().unwrap_or_default()
    }

    fn build(&self, index: usize, tol: f64) -> photocount::Result<SingleModeSource> {
        let p = self.params();
        let ctx = |msg: &str| invalid(format!("sources[{index}]: {msg}"));
        let unexpected = |allowed: &[&str]| -> photocount::Result<()> {
            let given = [
                ("n", p.n.is_some()),
                ("alpha", p.alpha.is_some()),
                ("nbar", p.nbar.is_some()),
                ("rho", p.rho.is_some()),
                ("n_cut", p.n_cut.is_some()),
            ];
            match given.iter().find(|(f, set)| *set && !allowed.contains(f)) {
                Some((f, _)) => Err(ctx(&format!("{:?} source does not take `{f}`", self.kind))),
                None => Ok(()),
            }
        };
        let built = match self.kind {
            SourceType::Vacuum => {
                unexpected(&[])?;
                Ok(SingleModeSource::vacuum())
            }
            SourceType::Fock => {
                unexpected(&["n", "n_cut"])?;
                let n = p.n.ok_or_else(|| ctx("fock source needs `n`"))?;
                SingleModeSource::fock(n, p.n_cut.unwrap_or(n))
            }
            SourceType::Coherent => {
                unexpected(&["alpha", "n_cut"])?;
                let alpha = c(p.alpha.ok_or_else(|| ctx("coherent source needs `alpha`"))?);
                match p.n_cut {
                    Some(n_cut) => SingleModeSource::coherent_with_tolerance(alpha, n_cut, tol),
                    None => SingleModeSource::coherent_auto(alpha, tol),
                }
            }
            SourceType::Thermal => {
                unexpected(&["nbar", "n_cut"])?;
                let nbar = p.nbar.ok_or_else(|| ctx("thermal source needs `nbar`"))?;
                match p.n_cut {
                    Some(n_cut) => SingleModeSource::thermal_with_tolerance(nbar, n_cut, tol),
                    None => SingleModeSource::thermal_auto(nbar, tol),
                }
            }
            SourceType::Custom => {
                unexpected(&["rho"])?;
                let rho = matrix(p.rho.as_ref().ok_or_else(|| ctx("custom source needs `rho`"))?, "rho")?;
                SingleModeSource::custom_with_tolerance(rho, tol)
            }
        };
        built.map_err(|e| prefix(e, &format!("sources[{index}]")))
    }

    fn husimi_mode(&self, ctx: &str) -> photocount::Result<HusimiMode> {
        let p = self.params();
        if self.mode_vector.is_some() {
            return Err(invalid(format!("{ctx}: multimode sources take no `mode_vector`")));
        }
        match self.kind {
            SourceType::Vacuum => Ok(HusimiMode::Vacuum),
            SourceType::Coherent => Ok(HusimiMode::Coherent {
                alpha: c(p.alpha.ok_or_else(|| invalid(format!("{ctx}: coherent source needs `alpha`")))?),
            }),
            SourceType::Thermal => {
                let nbar = p.nbar.ok_or_else(|| invalid(format!("{ctx}: thermal source needs `nbar`")))?;
                if !(nbar >= 0.0 && nbar.is_finite()) {
                    return Err(Error::Domain(format!("{ctx}: mean photon number {nbar} must be non-negative")));
                }
                Ok(HusimiMode::Thermal { nbar })
            }
            kind => Err(invalid(format!(
                "{ctx}: {kind:?} sources have no Gaussian Husimi function; use vacuum, coherent or thermal"
            ))),
        }
    }
}

/// Prepends field context to a core error while keeping its kind.
fn prefix(e: Error, ctx: &str) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("{ctx}: {m}")),
        Error::Dimension(m) => Error::Dimension(format!("{ctx}: {m}")),
        Error::Domain(m) => Error::Domain(format!("{ctx}: {m}")),
        other => other,
    }
}

impl ScenarioFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_owned(), message: e.to_string() })
    }

    pub fn tolerance(&self) -> f64 {
        self.truncation_tolerance.unwrap_or(DEFAULT_TRUNCATION_TOLERANCE)
    }

    pub fn network_matrix(&self) -> photocount::Result<ComplexMatrix> {
        let u = self.network.resolve(self.sources.len())?;
        if !u.is_square() {
            return Err(Error::Dimension(format!("network must be square, got {}x{}", u.rows(), u.cols())));
        }
        Ok(u)
    }

    /// Builds and validates the single-mode scenario.
    pub fn scenario(&self) -> photocount::Result<Scenario> {
        let tol = self.tolerance();
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Domain(format!("truncation_tolerance {tol} must lie in (0, 1)")));
        }
        let network = self.network_matrix()?;
        let sources = self
            .sources
            .iter()
            .enumerate()
            .map(|(k, s)| s.build(k, tol))
            .collect::<photocount::Result<Vec<_>>>()?;
        let detectors = DetectorBank::new(self.detectors.clone()).map_err(|e| prefix(e, "detectors"))?;
        let with_vectors = self.sources.iter().filter(|s| s.mode_vector.is_some()).count();
        let scenario = match (&self.gram, with_vectors) {
            (Some(g), 0) => {
                let gram = GramMatrix::from_matrix(matrix(g, "gram")?).map_err(|e| prefix(e, "gram"))?;
                Scenario::new(network, sources, gram, detectors)?
            }
            (None, n) if n == self.sources.len() && n > 0 => {
                let modes = self
                    .sources
                    .iter()
                    .enumerate()
                    .map(|(k, s)| {
                        let v = s.mode_vector.as_ref().expect("counted above");
                        ModeVector::new(v.iter().copied().map(c).collect())
                            .map_err(|e| prefix(e, &format!("sources[{k}].mode_vector")))
                    })
                    .collect::<photocount::Result<Vec<_>>>()?;
                if modes.iter().any(|m| m.dim() != modes[0].dim()) {
                    return Err(Error::Dimension("all mode vectors must have the same length".into()));
                }
                Scenario::with_mode_vectors(network, sources, modes, detectors)?
            }
            (Some(_), _) => return Err(invalid("give either `gram` or per-source `mode_vector`, not both")),
            (None, _) => {
                return Err(invalid("every source needs a `mode_vector` unless a `gram` matrix is given"));
            }
        };
        match self.cutoff {
            Some(p_max) => scenario.with_cutoff(p_max),
            None => Ok(scenario),
        }
    }

    /// Builds the Monte-Carlo scenario from the `multimode` section.
    pub fn multimode_scenario(&self) -> photocount::Result<MultimodeScenario> {
        let spec = self.multimode.as_ref().ok_or_else(|| invalid("the scenario has no `multimode` section"))?;
        if spec.d == 0 {
            return Err(invalid("multimode.d must be positive"));
        }
        let sources = match &spec.sources {
            Some(per_port) => per_port
                .iter()
                .enumerate()
                .map(|(k, modes)| {
                    if modes.len() != spec.d {
                        return Err(Error::Dimension(format!(
                            "multimode.sources[{k}] lists {} internal modes, expected d = {}",
                            modes.len(),
                            spec.d
                        )));
                    }
                    let modes = modes
                        .iter()
                        .enumerate()
                        .map(|(s, m)| m.husimi_mode(&format!("multimode.sources[{k}][{s}]")))
                        .collect::<photocount::Result<Vec<_>>>()?;
                    SamplableHusimiSource::new(modes)
                })
                .collect::<photocount::Result<Vec<_>>>()?,
            None => {
                if spec.d != 1 {
                    return Err(invalid("multimode.sources is required when d > 1"));
                }
                self.sources
                    .iter()
                    .enumerate()
                    .map(|(k, s)| {
                        let ctx = format!("sources[{k}]");
                        let params = s.params();
                        let mode = SourceSpec { mode_vector: None, kind: s.kind, params: Some(params) };
                        SamplableHusimiSource::new(vec![mode.husimi_mode(&ctx)?])
                    })
                    .collect::<photocount::Result<Vec<_>>>()?
            }
        };
        let detectors = DetectorBank::new(self.detectors.clone()).map_err(|e| prefix(e, "detectors"))?;
        MultimodeScenario::new(self.network_matrix()?, sources, detectors, spec.sample_count, spec.rng_seed)
    }

    /// Canonical form: presets expanded to matrices and defaults filled in,
    /// so files that describe the same experiment serialize identically.
    pub fn canonical(&self) -> photocount::Result<ScenarioFile> {
        let mut canon = self.clone();
        canon.network = NetworkSpec { matrix: Some(matrix_spec(&self.network_matrix()?)), ..Default::default() };
        canon.truncation_tolerance = Some(self.tolerance());
        for s in canon.sources.iter_mut() {
            if s.params == Some(SourceParams::default()) {
                s.params = None;
            }
        }
        Ok(canon)
    }

    /// SHA-256 of the canonical serialization, as lowercase hex.
    pub fn digest(&self) -> photocount::Result<String> {
        let bytes = serde_json::to_vec(&self.canonical()?).expect("scenario files always serialize");
        Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use photocount::linalg::check_unitary;

    fn parse(json: &str) -> ScenarioFile {
        serde_json::from_str(json).unwrap()
    }

    const HOM: &str = r#"{
        "network": { "preset": "hadamard-bs" },
        "sources": [ { "type": "fock", "params": { "n": 1 } }, { "type": "fock", "params": { "n": 1 } } ],
        "gram": [ [[1, 0], [0.5, 0]], [[0.5, 0], [1, 0]] ],
        "detectors": [1, 1]
    }"#;

    #[test]
    fn presets_are_unitary() {
        for m in 1..6 {
            assert!(check_unitary(&dft(m), 1e-12));
        }
        assert!(check_unitary(&beamsplitter(0.3, 1.1), 1e-12));
        let bs = beamsplitter(FRAC_PI_4, 0.0);
        assert!((bs[(1, 0)].re + FRAC_1_SQRT_2).abs() < 1e-15);
        let f = dft(3);
        assert!((f[(1, 2)] - C64::from_polar(1.0 / 3f64.sqrt(), 4.0 * PI / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn hom_file_builds() {
        let s = parse(HOM).scenario().unwrap();
        assert_eq!(s.ports(), 2);
        assert_eq!(s.p_max(), 2);
        assert!((s.gram().get(0, 1).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gram_and_mode_vectors_are_exclusive() {
        let mut f = parse(HOM);
        f.sources[0].mode_vector = Some(vec![[1.0, 0.0]]);
        assert!(matches!(f.scenario(), Err(Error::Validation(_))));
        f.gram = None;
        assert!(matches!(f.scenario(), Err(Error::Validation(_))));
        f.sources[1].mode_vector = Some(vec![[1.0, 0.0]]);
        assert!(f.scenario().is_ok());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = HOM.replace("\"detectors\"", "\"detector\"");
        let err = serde_json::from_str::<ScenarioFile>(&bad).unwrap_err().to_string();
        assert!(err.contains("detector") && err.contains("line"), "{err}");
    }

    #[test]
    fn missing_parameters_are_named() {
        let f = parse(&HOM.replace(r#"{ "n": 1 } }, {"#, r#"{ "nbar": 1 } }, {"#));
        let msg = f.scenario().unwrap_err().to_string();
        assert!(msg.contains("sources[0]") && msg.contains("nbar"), "{msg}");
    }

    #[test]
    fn digest_tracks_semantics() {
        let base = parse(HOM);
        let mut same = base.clone();
        same.network = NetworkSpec { matrix: Some(matrix_spec(&base.network_matrix().unwrap())), ..Default::default() };
        same.truncation_tolerance = Some(DEFAULT_TRUNCATION_TOLERANCE);
        assert_eq!(base.digest().unwrap(), same.digest().unwrap());
        let mut changed = base.clone();
        changed.detectors[1] = 0.9;
        assert_ne!(base.digest().unwrap(), changed.digest().unwrap());
        let mut changed = base.clone();
        changed.gram.as_mut().unwrap()[0][1] = [0.4, 0.0];
        assert_ne!(base.digest().unwrap(), changed.digest().unwrap());
    }

    #[test]
    fn multimode_section_defaults_to_top_level_sources() {
        let json = r#"{
            "network": { "preset": "beamsplitter" },
            "sources": [ { "type": "coherent", "params": { "alpha": [0.5, 0] } }, { "type": "vacuum" } ],
            "gram": [ [[1, 0], [0, 0]], [[0, 0], [1, 0]] ],
            "detectors": [0.5, 0.5],
            "multimode": { "d": 1, "sample_count": 1000, "rng_seed": 4 }
        }"#;
        let ms = parse(json).multimode_scenario().unwrap();
        assert_eq!(ms.d(), 1);
        let mut f = parse(json);
        f.multimode.as_mut().unwrap().d = 2;
        assert!(f.multimode_scenario().is_err());
    }
}
