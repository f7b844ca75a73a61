//! Suite configuration: JSON ingestion, structural validation and the
//! hypothesis checks that decide between exit codes 64 and 2.

use std::fs;
use std::path::{Path, PathBuf};

use jessen_core::{
    Error, ExponentSet, FamilyKind, Generator, GeneratorSpec, LatticeElement, OperatorFamily, OrderTolerance,
};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

const DEFAULT_CONFIG: &str = include_str!("../configs/default.json");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub generators: Vec<GeneratorEntry>,
    #[serde(default = "default_families")]
    pub families: Vec<OperatorFamily>,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    /// Exponent sets for the power/log family.
    #[serde(default)]
    pub p_sets: Vec<Vec<f64>>,
    /// Exponent sets for the exponential family.
    #[serde(default)]
    pub h_p_sets: Vec<Vec<f64>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Random quadratic-form probes per Gram matrix.
    #[serde(default = "default_n_xi")]
    pub n_xi: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// One generator, inline (`q`) or loaded from a JSON file (`file`) holding
/// `{"q": [[...]], "name": "..."}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub file: Option<PathBuf>,
    /// Accept a non-conservative generator; its results are reported as
    /// observations only.
    #[serde(default)]
    pub override_normalization: bool,
    /// Fixed test vectors used in addition to the random samples.
    #[serde(default)]
    pub test_vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_psd")]
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            atol: default_atol(),
            rtol: default_rtol(),
            psd: default_psd(),
        }
    }
}

fn default_families() -> Vec<OperatorFamily> {
    vec![
        OperatorFamily::PowerF { t: 2.0 },
        OperatorFamily::NegLog,
        OperatorFamily::HalfSquare,
    ]
}

fn default_t_grid() -> Vec<f64> {
    vec![1.0]
}

fn default_samples() -> usize {
    4
}

fn default_n_xi() -> usize {
    1000
}

fn default_atol() -> f64 {
    1e-9
}

fn default_rtol() -> f64 {
    1e-12
}

fn default_psd() -> f64 {
    1e-8
}

/// A validated generator with its display name.
#[derive(Debug, Clone)]
pub struct NamedGenerator {
    pub name: String,
    pub gen: Generator,
    pub override_normalization: bool,
    pub test_vectors: Vec<LatticeElement>,
}

impl NamedGenerator {
    /// Conservative generators are subject to the asserted suites.
    pub fn asserted(&self) -> bool {
        self.gen.is_conservative()
    }
}

/// A fully validated suite.
#[derive(Debug, Clone)]
pub struct Suite {
    pub generators: Vec<NamedGenerator>,
    pub families: Vec<OperatorFamily>,
    pub t_grid: Vec<f64>,
    pub exponent_sets: Vec<ExponentSet>,
    pub samples: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub n_xi: usize,
    pub output_dir: Option<PathBuf>,
}

impl Suite {
    pub fn order_tolerance(&self) -> OrderTolerance {
        OrderTolerance {
            atol: self.tolerances.atol,
            rtol: self.tolerances.rtol,
        }
    }
}

/// Reads `path`, or the bundled default config when `path` is `None`.
pub fn load(path: Option<&Path>) -> Result<Suite, Failure> {
    let (text, base) = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", p.display())))?;
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (text, base)
        }
        None => (DEFAULT_CONFIG.to_owned(), PathBuf::new()),
    };
    parse(&text, &base)
}

pub fn parse(text: &str, base: &Path) -> Result<Suite, Failure> {
    let cfg: SuiteConfig = serde_json::from_str(text).map_err(|e| Failure::Usage(format!("malformed config: {e}")))?;
    cfg.validate(base)
}

impl SuiteConfig {
    pub fn validate(self, base: &Path) -> Result<Suite, Failure> {
        if self.generators.is_empty() {
            return Err(Failure::Usage("config lists no generators".into()));
        }
        if self.samples < 1 {
            return Err(Failure::Usage("samples must be at least 1".into()));
        }
        if self.families.is_empty() {
            return Err(Failure::Usage("config lists no families".into()));
        }
        for fam in &self.families {
            fam.validate()
                .map_err(|e| Failure::Usage(format!("family {}: {e}", fam.name())))?;
        }
        if self.t_grid.is_empty() {
            return Err(Failure::Usage("t_grid is empty".into()));
        }
        if let Some(t) = self.t_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Failure::Usage(format!(
                "t_grid entry {t} must be finite and nonnegative"
            )));
        }
        let tol = self.tolerances;
        if ![tol.atol, tol.rtol, tol.psd].iter().all(|x| x.is_finite() && *x >= 0.0) {
            return Err(Failure::Usage("tolerances must be finite and nonnegative".into()));
        }

        let generators = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, entry)| entry.resolve(i, base))
            .collect::<Result<Vec<_>, _>>()?;

        let mut exponent_sets = Vec::new();
        for (sets, kind) in [(&self.p_sets, FamilyKind::F), (&self.h_p_sets, FamilyKind::H)] {
            for p in sets {
                exponent_sets.push(exponent_set(p, kind)?);
            }
        }

        for g in &generators {
            for v in &g.test_vectors {
                for fam in &self.families {
                    fam.check_domain(v).map_err(|e| {
                        Failure::Usage(format!(
                            "test vector {:?} of generator '{}' is outside the domain of {}: {e}",
                            v.values(),
                            g.name,
                            fam.name()
                        ))
                    })?;
                }
            }
        }

        Ok(Suite {
            generators,
            families: self.families,
            t_grid: self.t_grid,
            exponent_sets,
            samples: self.samples,
            seed: self.seed,
            tolerances: self.tolerances,
            n_xi: self.n_xi.max(1),
            output_dir: self.output_dir,
        })
    }
}

fn exponent_set(p: &[f64], kind: FamilyKind) -> Result<ExponentSet, Failure> {
    if p.is_empty() {
        return Err(Failure::Usage("empty exponent set".into()));
    }
    ExponentSet::new(p.to_vec(), kind).map_err(|e| match e {
        Error::IllConditionedMidpoint { p: mid } => Failure::Hypothesis(format!(
            "exponent set {p:?}: midpoint {mid} is within 1e-6 of a singular parameter (0 or 1)"
        )),
        other => Failure::Usage(format!("exponent set {p:?}: {other}")),
    })
}

impl GeneratorEntry {
    fn resolve(&self, index: usize, base: &Path) -> Result<NamedGenerator, Failure> {
        let (spec, origin) = match (&self.q, &self.file) {
            (Some(q), None) => (
                GeneratorSpec {
                    q: q.clone(),
                    name: None,
                },
                None,
            ),
            (None, Some(file)) => {
                let path = base.join(file);
                let text = fs::read_to_string(&path)
                    .map_err(|e| Failure::Usage(format!("cannot read generator file {}: {e}", path.display())))?;
                let spec: GeneratorSpec = serde_json::from_str(&text)
                    .map_err(|e| Failure::Usage(format!("malformed generator file {}: {e}", path.display())))?;
                (spec, Some(path))
            }
            _ => {
                return Err(Failure::Usage(format!(
                    "generator #{index} must give exactly one of \"q\" or \"file\""
                )))
            }
        };
        let name = self
            .name
            .clone()
            .or_else(|| spec.name.clone())
            .or_else(|| {
                origin
                    .as_ref()
                    .and_then(|p| p.file_stem())
                    .map(|s| s.to_string_lossy().into_owned())
            })
            .unwrap_or_else(|| format!("generator_{index}"));

        let gen = spec.validate().map_err(|e| match e {
            Error::NegativeOffDiagonal { .. } => Failure::Hypothesis(format!("generator '{name}': {e}")),
            other => Failure::Usage(format!("generator '{name}': {other}")),
        })?;
        if !gen.is_conservative() && !self.override_normalization {
            return Err(Failure::Hypothesis(format!(
                "generator '{name}': {}",
                Error::NotNormalized {
                    max_row_sum: gen.max_abs_row_sum()
                }
            )));
        }
        let test_vectors = self
            .test_vectors
            .iter()
            .map(|v| {
                let e = LatticeElement::new(v.clone())
                    .map_err(|e| Failure::Usage(format!("generator '{name}' test vector: {e}")))?;
                if e.dim() != gen.dim() {
                    return Err(Failure::Usage(format!(
                        "generator '{name}' test vector has length {}, expected {}",
                        e.dim(),
                        gen.dim()
                    )));
                }
                Ok(e)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NamedGenerator {
            gen: gen.with_name(name.clone()),
            name,
            override_normalization: self.override_normalization,
            test_vectors,
        })
    }
}
