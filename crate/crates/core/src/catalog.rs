//! Machine-readable catalog of the eleven systems: inverse mass, potential,
//! parameter domains, symmetry generators, and the interior boxes the
//! verification grids live on.
//!
//! The catalog is built once from the embedded manifest (assets/systems.toml)
//! and is immutable afterwards; every accessor hands out shared references.

use crate::error::{CoreError, Result};
use crate::expr::{self, Expr, Param, ParamValues, Var};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

pub const MANIFEST_SCHEMA: u32 = 1;
pub const EMBEDDED_MANIFEST: &str = include_str!("../assets/systems.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationScheme {
    Spherical,
    Cylindrical,
    /// Plane-wave separation transverse to `axis` (0-based).
    Cartesian { axis: usize },
}

/// When a row is exactly solvable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solvability {
    Always,
    KappaZero,
    SigmaLambdaZero,
}

/// First-order operator S = ct d_t + c1 d_1 + c2 d_2 + c3 d_3 + c0.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub name: String,
    pub ct: Option<Expr>,
    pub c1: Expr,
    pub c2: Expr,
    pub c3: Expr,
    pub c0: Expr,
}

impl GeneratorSpec {
    pub fn momentum(name: &str, axis: usize) -> GeneratorSpec {
        let mi = Expr::imag(-1.0);
        let zero = Expr::zero;
        GeneratorSpec {
            name: name.to_string(),
            ct: None,
            c1: if axis == 0 { mi.clone() } else { zero() },
            c2: if axis == 1 { mi.clone() } else { zero() },
            c3: if axis == 2 { mi.clone() } else { zero() },
            c0: Expr::zero(),
        }
    }

    pub fn unit() -> GeneratorSpec {
        GeneratorSpec {
            name: "1".into(),
            ct: None,
            c1: Expr::zero(),
            c2: Expr::zero(),
            c3: Expr::zero(),
            c0: Expr::one(),
        }
    }

    pub fn time_translation() -> GeneratorSpec {
        GeneratorSpec {
            name: "P0".into(),
            ct: Some(Expr::imag(1.0)),
            c1: Expr::zero(),
            c2: Expr::zero(),
            c3: Expr::zero(),
            c0: Expr::zero(),
        }
    }

    /// Coefficient-wise time derivative (how the `*_2` partners are defined).
    pub fn dt(&self) -> GeneratorSpec {
        GeneratorSpec {
            name: format!("dt({})", self.name),
            ct: self.ct.as_ref().map(|e| e.diff(Var::T)),
            c1: self.c1.diff(Var::T),
            c2: self.c2.diff(Var::T),
            c3: self.c3.diff(Var::T),
            c0: self.c0.diff(Var::T),
        }
    }

    pub fn subst(&self, vals: &ParamValues) -> GeneratorSpec {
        GeneratorSpec {
            name: self.name.clone(),
            ct: self.ct.as_ref().map(|e| e.subst(vals)),
            c1: self.c1.subst(vals),
            c2: self.c2.subst(vals),
            c3: self.c3.subst(vals),
            c0: self.c0.subst(vals),
        }
    }

    pub fn is_time_independent(&self) -> bool {
        self.ct.is_none()
            && !self.c1.depends_on(Var::T)
            && !self.c2.depends_on(Var::T)
            && !self.c3.depends_on(Var::T)
            && !self.c0.depends_on(Var::T)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub id: u32,
    pub name: String,
    pub inverse_mass: Expr,
    pub potential: Expr,
    pub scheme: SeparationScheme,
    pub solvability: Solvability,
    pub params: Vec<Param>,
    pub sigma_excluded: Vec<f64>,
    /// Interior box away from the row's coordinate singularities.
    pub box_lo: [f64; 3],
    pub box_hi: [f64; 3],
    pub generators: Vec<GeneratorSpec>,
}

impl SystemSpec {
    pub fn generator(&self, name: &str) -> Result<&GeneratorSpec> {
        self.generators
            .iter()
            .find(|g| g.name == name)
            .ok_or_else(|| CoreError::Unsupported(format!("no generator `{name}` in system {}", self.id)))
    }

    pub fn time_independent_generators(&self) -> Vec<&GeneratorSpec> {
        self.generators
            .iter()
            .filter(|g| g.is_time_independent())
            .collect()
    }

    /// Table generators plus P0 and the unit operator (the two auxiliary
    /// operators every row admits; closure tests may include them).
    pub fn extended_generators(&self) -> Vec<GeneratorSpec> {
        let mut out = self.generators.clone();
        out.push(GeneratorSpec::time_translation());
        out.push(GeneratorSpec::unit());
        out
    }

    pub fn is_solvable(&self, vals: &ParamValues) -> bool {
        match self.solvability {
            Solvability::Always => true,
            Solvability::KappaZero => vals.kappa.unwrap_or(0.0) == 0.0,
            Solvability::SigmaLambdaZero => {
                let s = vals.sigma.unwrap_or(0.0);
                let l = vals.lambda.unwrap_or_default();
                s * l.norm() == 0.0
            }
        }
    }
}

/// Result of parameter validation: concrete values plus degeneracy flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedParams {
    pub values: ParamValues,
    pub flags: Vec<String>,
}

pub fn validate_params(spec: &SystemSpec, values: &ParamValues) -> Result<ValidatedParams> {
    let mut flags: Vec<String> = Vec::new();
    for p in &spec.params {
        if values.get(*p).is_none() {
            return Err(CoreError::MissingParam(p.name()));
        }
    }
    if spec.params.contains(&Param::Sigma) {
        let s = values.sigma.unwrap();
        for bad in &spec.sigma_excluded {
            if (s - bad).abs() < 1e-12 {
                return Err(CoreError::ParamConstraint(format!(
                    "system {} excludes sigma = {bad}",
                    spec.id
                )));
            }
        }
    }
    // potential-only parameters all zero: the degenerate scale-invariant
    // sub-case (more symmetries than the table lists)
    let pot_params = spec.potential.params();
    if !pot_params.is_empty() {
        let all_zero = pot_params
            .iter()
            .all(|p| values.get(*p).map(|z| z.norm() == 0.0).unwrap_or(false));
        if all_zero {
            flags.push("scale-invariant sub-case".into());
        }
    }
    if spec.id == 3 && values.nu == Some(0.0) {
        if !flags.iter().any(|f| f.contains("scale-invariant")) {
            flags.push("scale-invariant sub-case".into());
        }
    }
    if matches!(spec.id, 8 | 10) && values.lambda.map(|z| z.norm() == 0.0).unwrap_or(false) {
        flags.push("free-fall sub-case (lambda = 0)".into());
    }
    if spec.id == 11 {
        let (s, k) = (values.sigma.unwrap(), values.kappa.unwrap());
        if (2.0 * k + s * s + 3.0 * s + 2.0).abs() < 1e-12 {
            flags.push("undeformed-oscillator constraint holds".into());
        }
    }
    if !spec.is_solvable(values) {
        flags.push("not separable for these parameters".into());
    }
    Ok(ValidatedParams {
        values: *values,
        flags,
    })
}

// ---------------------------------------------------------------------------
// manifest (de)serialization
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct RawManifest {
    schema: u32,
    #[serde(rename = "system")]
    systems: Vec<RawSystem>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSystem {
    id: u32,
    name: String,
    inverse_mass: String,
    potential: String,
    scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axis: Option<u32>,
    solvable: String,
    params: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    sigma_excluded: Vec<f64>,
    #[serde(rename = "box")]
    bbox: RawBox,
    generators: Vec<RawGenerator>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawBox {
    lo: [f64; 3],
    hi: [f64; 3],
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawGenerator {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ct: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c3: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c0: Option<String>,
    /// Defined as the coefficient-wise d/dt of another generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dt_of: Option<String>,
}

fn param_from_name(s: &str) -> Result<Param> {
    Param::ALL
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| CoreError::Manifest(format!("unknown parameter `{s}`")))
}

fn parse_opt(src: &Option<String>) -> Result<Expr> {
    match src {
        Some(s) => expr::parse(s),
        None => Ok(Expr::zero()),
    }
}

pub fn load_manifest(text: &str) -> Result<Vec<SystemSpec>> {
    let raw: RawManifest =
        toml::from_str(text).map_err(|e| CoreError::Manifest(e.to_string()))?;
    if raw.schema != MANIFEST_SCHEMA {
        return Err(CoreError::Manifest(format!(
            "manifest schema {} unsupported (expected {MANIFEST_SCHEMA})",
            raw.schema
        )));
    }
    let mut out = Vec::new();
    for rs in &raw.systems {
        let scheme = match rs.scheme.as_str() {
            "spherical" => SeparationScheme::Spherical,
            "cylindrical" => SeparationScheme::Cylindrical,
            "cartesian" => SeparationScheme::Cartesian {
                axis: rs.axis.unwrap_or(3) as usize - 1,
            },
            other => {
                return Err(CoreError::Manifest(format!("unknown scheme `{other}`")))
            }
        };
        let solvability = match rs.solvable.as_str() {
            "always" => Solvability::Always,
            "kappa-zero" => Solvability::KappaZero,
            "sigma-lambda-zero" => Solvability::SigmaLambdaZero,
            other => {
                return Err(CoreError::Manifest(format!(
                    "unknown solvability `{other}`"
                )))
            }
        };
        let mut gens: Vec<GeneratorSpec> = Vec::new();
        for rg in &rs.generators {
            let g = if let Some(base) = &rg.dt_of {
                let base = gens
                    .iter()
                    .find(|g| &g.name == base)
                    .ok_or_else(|| {
                        CoreError::Manifest(format!(
                            "dt_of target `{base}` not defined before `{}`",
                            rg.name
                        ))
                    })?;
                let mut d = base.dt();
                d.name = rg.name.clone();
                d
            } else {
                GeneratorSpec {
                    name: rg.name.clone(),
                    ct: match &rg.ct {
                        Some(s) => Some(expr::parse(s)?),
                        None => None,
                    },
                    c1: parse_opt(&rg.c1)?,
                    c2: parse_opt(&rg.c2)?,
                    c3: parse_opt(&rg.c3)?,
                    c0: parse_opt(&rg.c0)?,
                }
            };
            gens.push(g);
        }
        out.push(SystemSpec {
            id: rs.id,
            name: rs.name.clone(),
            inverse_mass: expr::parse(&rs.inverse_mass)?,
            potential: expr::parse(&rs.potential)?,
            scheme,
            solvability,
            params: rs
                .params
                .iter()
                .map(|s| param_from_name(s))
                .collect::<Result<_>>()?,
            sigma_excluded: rs.sigma_excluded.clone(),
            box_lo: rs.bbox.lo,
            box_hi: rs.bbox.hi,
            generators: gens,
        });
    }
    if out.len() != 11 {
        return Err(CoreError::Manifest(format!(
            "expected 11 systems, manifest has {}",
            out.len()
        )));
    }
    Ok(out)
}

/// Serialize specs back to the manifest grammar. Derivative-defined partners
/// are written out explicitly (the closed forms), so a re-read compares the
/// same trees.
pub fn to_manifest(specs: &[SystemSpec]) -> String {
    let systems = specs
        .iter()
        .map(|s| RawSystem {
            id: s.id,
            name: s.name.clone(),
            inverse_mass: s.inverse_mass.to_string(),
            potential: s.potential.to_string(),
            scheme: match s.scheme {
                SeparationScheme::Spherical => "spherical".into(),
                SeparationScheme::Cylindrical => "cylindrical".into(),
                SeparationScheme::Cartesian { .. } => "cartesian".into(),
            },
            axis: match s.scheme {
                SeparationScheme::Cartesian { axis } => Some(axis as u32 + 1),
                _ => None,
            },
            solvable: match s.solvability {
                Solvability::Always => "always".into(),
                Solvability::KappaZero => "kappa-zero".into(),
                Solvability::SigmaLambdaZero => "sigma-lambda-zero".into(),
            },
            params: s.params.iter().map(|p| p.name().to_string()).collect(),
            sigma_excluded: s.sigma_excluded.clone(),
            bbox: RawBox {
                lo: s.box_lo,
                hi: s.box_hi,
            },
            generators: s
                .generators
                .iter()
                .map(|g| RawGenerator {
                    name: g.name.clone(),
                    ct: g.ct.as_ref().map(|e| e.to_string()),
                    c1: Some(g.c1.to_string()),
                    c2: Some(g.c2.to_string()),
                    c3: Some(g.c3.to_string()),
                    c0: Some(g.c0.to_string()),
                    dt_of: None,
                })
                .collect(),
        })
        .collect();
    let raw = RawManifest {
        schema: MANIFEST_SCHEMA,
        systems,
    };
    toml::to_string_pretty(&raw).expect("manifest serialization cannot fail")
}

fn catalog() -> &'static Vec<SystemSpec> {
    static CATALOG: OnceLock<Vec<SystemSpec>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        load_manifest(EMBEDDED_MANIFEST).expect("embedded manifest must be valid")
    })
}

pub fn all_systems() -> &'static [SystemSpec] {
    catalog()
}

pub fn get_system(id: u32) -> Result<&'static SystemSpec> {
    catalog()
        .iter()
        .find(|s| s.id == id)
        .ok_or(CoreError::UnknownSystem(id))
}

/// The four B1_1 readings left open by the garbled printed formula; the
/// verifier's candidate scan adjudicates which one commutes.
pub fn b11_candidates() -> Vec<GeneratorSpec> {
    let make = |name: &str, sign: f64, sym: &str| GeneratorSpec {
        name: name.to_string(),
        ct: None,
        c1: expr::parse("i*lambda*sin(lambda*t)*x2").unwrap(),
        c2: expr::parse("-i*lambda*sin(lambda*t)*x1").unwrap(),
        c3: Expr::zero(),
        c0: expr::parse(&format!(
            "{}(lambda^2*phi + {sym})*cos(lambda*t)",
            if sign < 0.0 { "-" } else { "" }
        ))
        .unwrap(),
    };
    vec![
        make("B1_1[-,mu]", -1.0, "mu"),
        make("B1_1[+,mu]", 1.0, "mu"),
        make("B1_1[-,nu]", -1.0, "nu"),
        make("B1_1[+,nu]", 1.0, "nu"),
    ]
}
