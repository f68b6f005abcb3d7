//! JSON configuration schema for curves and command runs, with validation
//! errors carrying JSON-pointer-style field paths.

use crate::boxes::IndicatorSet;
use crate::curve::{BuiltinName, Curve, Perturbation, ReparamMap};
use crate::error::{Error, Result};
use crate::gi::Sampler;
use crate::operators::WeightSpec;
use crate::quad::QuadOpts;
use crate::xray::{XrayKind, XrayMapSpec};
use serde::{Deserialize, Serialize};

/// Curve description as read from config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    Monomial {
        exponents: Vec<f64>,
        coeffs: Vec<f64>,
        domain: [f64; 2],
    },
    Polynomial {
        coeff_matrix: Vec<Vec<f64>>,
        domain: [f64; 2],
    },
    MonomialLike {
        exponents: Vec<f64>,
        perturbations: Vec<Perturbation>,
        domain: [f64; 2],
    },
    Builtin {
        name: String,
        #[serde(default)]
        params: serde_json::Map<String, serde_json::Value>,
        domain: [f64; 2],
    },
    Reparam {
        map: ReparamMap,
        inner: Box<CurveConfig>,
    },
    AffineImage {
        matrix: Vec<Vec<f64>>,
        shift: Vec<f64>,
        inner: Box<CurveConfig>,
    },
}

fn at(path: &str, err: Error) -> Error {
    match err {
        Error::Config { field, message } => Error::Config {
            field: format!("{path}{field}"),
            message,
        },
        other => Error::Config {
            field: path.to_string(),
            message: other.to_string(),
        },
    }
}

impl CurveConfig {
    pub fn build(&self) -> Result<Curve> {
        self.build_at("/curve")
    }

    fn build_at(&self, path: &str) -> Result<Curve> {
        match self {
            CurveConfig::Monomial {
                exponents,
                coeffs,
                domain,
            } => Curve::monomial(exponents.clone(), coeffs.clone(), domain[0], domain[1])
                .map_err(|e| at(path, e)),
            CurveConfig::Polynomial {
                coeff_matrix,
                domain,
            } => Curve::polynomial(coeff_matrix.clone(), domain[0], domain[1])
                .map_err(|e| at(path, e)),
            CurveConfig::MonomialLike {
                exponents,
                perturbations,
                domain,
            } => {
                if domain[0] != 0.0 {
                    return Err(Error::Config {
                        field: format!("{path}/domain"),
                        message: "monomial-like curves live on (0, T); domain must start at 0"
                            .into(),
                    });
                }
                Curve::monomial_like(exponents.clone(), perturbations.clone(), domain[1])
                    .map_err(|e| at(path, e))
            }
            CurveConfig::Builtin {
                name,
                params,
                domain,
            } => {
                let builtin = match name.as_str() {
                    "sjolin" => {
                        let k = params
                            .get("k")
                            .and_then(|v| v.as_u64())
                            .ok_or_else(|| Error::Config {
                                field: format!("{path}/params/k"),
                                message: "sjolin needs an integer parameter k ≥ 1".into(),
                            })?;
                        BuiltinName::Sjolin { k: k as u32 }
                    }
                    "slow_spiral" => BuiltinName::SlowSpiral,
                    "helix" => BuiltinName::Helix,
                    "flat_exp" => BuiltinName::FlatExp,
                    "flat_exp_pair" => BuiltinName::FlatExpPair,
                    other => {
                        return Err(Error::Config {
                            field: format!("{path}/name"),
                            message: format!("unknown builtin curve '{other}'"),
                        })
                    }
                };
                Curve::builtin(builtin, domain[0], domain[1]).map_err(|e| at(path, e))
            }
            CurveConfig::Reparam { map, inner } => {
                let inner_curve = inner.build_at(&format!("{path}/inner"))?;
                inner_curve.reparametrize(*map).map_err(|e| at(path, e))
            }
            CurveConfig::AffineImage {
                matrix,
                shift,
                inner,
            } => {
                let inner_curve = inner.build_at(&format!("{path}/inner"))?;
                inner_curve
                    .affine_image(matrix.clone(), shift.clone())
                    .map_err(|e| at(path, e))
            }
        }
    }
}

fn default_samples() -> usize {
    200
}
fn default_n() -> usize {
    1000
}
fn default_budget() -> usize {
    2000
}
fn default_tol() -> f64 {
    1e-9
}
fn default_monotone_c() -> f64 {
    2.0
}
fn default_logconcave_m() -> f64 {
    2.0
}
fn default_inj_tol() -> f64 {
    1e-2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub curve: CurveConfig,
    #[serde(default)]
    pub region: Option<[f64; 2]>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// constant C in the almost-monotonicity check
    #[serde(default = "default_monotone_c")]
    pub monotone_c: f64,
    /// constant M in the almost-log-concavity check
    #[serde(default = "default_logconcave_m")]
    pub logconcave_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GiConfig {
    pub curve: CurveConfig,
    #[serde(default)]
    pub region: Option<[f64; 2]>,
    #[serde(default)]
    pub sampler: Sampler,
    #[serde(default = "default_n")]
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XrayKindConfig {
    Phi,
    Psi,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XrayMapConfig {
    pub kind: XrayKindConfig,
    pub base_scalar: f64,
    pub base_point: Vec<f64>,
}

impl XrayMapConfig {
    pub fn build(&self) -> XrayMapSpec {
        XrayMapSpec {
            kind: match self.kind {
                XrayKindConfig::Phi => XrayKind::Phi,
                XrayKindConfig::Psi => XrayKind::Psi,
            },
            base_scalar: self.base_scalar,
            base_point: self.base_point.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XrayGiConfig {
    pub curve: CurveConfig,
    pub map: XrayMapConfig,
    /// per-parameter sampling ranges, d+1 entries
    pub param_box: Vec<[f64; 2]>,
    #[serde(default = "default_n")]
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectivityConfig {
    pub curve: CurveConfig,
    pub map: XrayMapConfig,
    pub param_box: Vec<[f64; 2]>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_inj_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityCheckConfig {
    pub curve: CurveConfig,
    #[serde(default)]
    pub region: Option<[f64; 2]>,
    #[serde(default = "default_n")]
    pub tuples: usize,
    #[serde(default = "default_tol")]
    pub quad_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetPairConfig {
    #[serde(rename = "E")]
    pub e: IndicatorSet,
    #[serde(rename = "F")]
    pub f: IndicatorSet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    pub curve: CurveConfig,
    pub weight: WeightSpec,
    pub p: f64,
    pub q: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// when given, evaluate this single pair instead of searching
    #[serde(default)]
    pub sets: Option<SetPairConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullProbeConfig {
    pub curve: CurveConfig,
    #[serde(default)]
    pub region: Option<[f64; 2]>,
    #[serde(default = "default_n")]
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeConfig {
    pub curve: CurveConfig,
    #[serde(default)]
    pub region: Option<[f64; 2]>,
    #[serde(default = "default_n")]
    pub verify_samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentRegionConfig {
    pub curve: CurveConfig,
}

/// Resolve an optional region against the curve domain, requiring finite
/// bounds.
pub fn resolve_region(curve: &Curve, region: Option<[f64; 2]>) -> Result<(f64, f64)> {
    match region {
        Some([lo, hi]) => {
            if !(lo < hi) {
                return Err(Error::Config {
                    field: "/region".into(),
                    message: format!("need lo < hi, got [{lo}, {hi}]"),
                });
            }
            let dom = curve.domain();
            if lo < dom.lo || hi > dom.hi {
                return Err(Error::Config {
                    field: "/region".into(),
                    message: format!(
                        "region [{lo}, {hi}] not inside the curve domain ({}, {})",
                        dom.lo, dom.hi
                    ),
                });
            }
            Ok((lo, hi))
        }
        None => {
            let dom = curve.domain();
            if !dom.lo.is_finite() || !dom.hi.is_finite() {
                return Err(Error::Config {
                    field: "/region".into(),
                    message: "curve domain is unbounded; an explicit region is required".into(),
                });
            }
            Ok((dom.lo, dom.hi))
        }
    }
}

/// Default quadrature options used by CLI commands.
pub fn cli_quad_opts() -> QuadOpts {
    QuadOpts::default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_schema_round_trip() {
        let json = r#"{"kind":"monomial","exponents":[1.0,2.0],"coeffs":[1.0,1.0],"domain":[0.0,1.0]}"#;
        let cfg: CurveConfig = serde_json::from_str(json).unwrap();
        let curve = cfg.build().unwrap();
        assert_eq!(curve.dim(), 2);
        let g = curve.eval(0.5, 0).unwrap();
        assert_eq!(g, vec![0.5, 0.25]);
    }

    #[test]
    fn polynomial_schema() {
        let json = r#"{"kind":"polynomial","coeff_matrix":[[0.0,1.0],[0.0,0.0,1.0]],"domain":[-1.0,1.0]}"#;
        let curve: CurveConfig = serde_json::from_str(json).unwrap();
        let c = curve.build().unwrap();
        assert_eq!(c.eval(0.5, 0).unwrap(), vec![0.5, 0.25]);
    }

    #[test]
    fn monomial_like_schema() {
        let json = r#"{"kind":"monomial_like","exponents":[1.0,2.0],
            "perturbations":[{"family":"power","c":0.1,"p":1.0},{"family":"power","c":0.1,"p":1.0}],
            "domain":[0.0,1.0]}"#;
        let cfg: CurveConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.build().unwrap().dim(), 2);
    }

    #[test]
    fn builtin_schema() {
        let json = r#"{"kind":"builtin","name":"helix","params":{},"domain":[0.0,6.283]}"#;
        let cfg: CurveConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.build().unwrap().dim(), 3);
        let bad = r#"{"kind":"builtin","name":"nope","domain":[0.0,1.0]}"#;
        let cfg: CurveConfig = serde_json::from_str(bad).unwrap();
        match cfg.build().unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "/curve/name"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sjolin_requires_k() {
        let json = r#"{"kind":"builtin","name":"sjolin","domain":[0.0,1.0]}"#;
        let cfg: CurveConfig = serde_json::from_str(json).unwrap();
        match cfg.build().unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "/curve/params/k"),
            other => panic!("{other:?}"),
        }
        let json = r#"{"kind":"builtin","name":"sjolin","params":{"k":3},"domain":[0.1,1.0]}"#;
        let cfg: CurveConfig = serde_json::from_str(json).unwrap();
        assert!(cfg.build().is_ok());
    }

    #[test]
    fn reparam_schema_variants() {
        for map in [r#""exponential""#, r#"{"power":2.0}"#, r#"{"affine":[2.0,1.0]}"#] {
            let json = format!(
                r#"{{"kind":"reparam","map":{map},
                    "inner":{{"kind":"monomial","exponents":[1.0,2.0],"coeffs":[1.0,1.0],"domain":[0.5,4.0]}}}}"#
            );
            let cfg: CurveConfig = serde_json::from_str(&json).unwrap();
            cfg.build().unwrap_or_else(|e| panic!("{map}: {e}"));
        }
    }

    #[test]
    fn affine_image_schema() {
        let json = r#"{"kind":"affine_image","matrix":[[0.0,1.0],[1.0,0.0]],"shift":[1.0,0.0],
            "inner":{"kind":"monomial","exponents":[1.0,2.0],"coeffs":[1.0,1.0],"domain":[0.0,1.0]}}"#;
        let cfg: CurveConfig = serde_json::from_str(json).unwrap();
        let c = cfg.build().unwrap();
        // (t, t²) swapped and shifted: (t² + 1, t)
        assert_eq!(c.eval(0.5, 0).unwrap(), vec![1.25, 0.5]);
    }

    #[test]
    fn norms_config_schema() {
        let json = r#"{
            "curve": {"kind":"monomial","exponents":[1.0,2.0],"coeffs":[1.0,1.0],"domain":[-1.0,1.0]},
            "weight": {"variant":"affine"},
            "p": 1.5, "q": 3.0, "budget": 10,
            "sets": {"E":{"dim":2,"boxes":[[[0.0,1.0],[0.0,1.0]]]},
                     "F":{"dim":2,"boxes":[[[0.0,1.0],[0.0,1.0]]]}}
        }"#;
        let cfg: NormsConfig = serde_json::from_str(json).unwrap();
        assert!(cfg.sets.is_some());
        assert_eq!(cfg.budget, 10);
    }

    #[test]
    fn region_validation() {
        let c = Curve::moment(2, 0.0, 1.0).unwrap();
        assert_eq!(resolve_region(&c, None).unwrap(), (0.0, 1.0));
        assert!(resolve_region(&c, Some([0.2, 0.8])).is_ok());
        assert!(resolve_region(&c, Some([0.8, 0.2])).is_err());
        assert!(resolve_region(&c, Some([-0.5, 0.5])).is_err());
    }
}
