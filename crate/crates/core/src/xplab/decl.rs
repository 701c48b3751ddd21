//! JSON declarations of states, projection systems, sources and models.

use serde::{Deserialize, Serialize};

use crate::estim::{example_state, uniform_grid, GeneralizedModel, ParamModel, DEFAULT_GRID_POINTS};
use crate::opcore::{Density, MatrixLiteral, Op, SemiDensity};
use crate::projlat::ProjSystem;
use crate::qsource::{
    ClassLaw, Component, MixtureSource, QuadratureSource, QuantumSource, SourceKind,
    UniformPriorSource, DEFAULT_NODES,
};
use crate::{Error, Result};

fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(path, other.to_string()),
    })
}

fn missing(path: &str, what: &str) -> Error {
    Error::config(path, format!("missing `{what}`"))
}

/// A state: `{"model": "example", "theta": θ, "c": c}`, `{"matrix": …}` or
/// `{"probabilities": [...]}` (diagonal).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixLiteral>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
}

impl StateDecl {
    pub fn example(theta: f64, c: f64) -> Self {
        StateDecl {
            model: Some("example".into()),
            theta: Some(theta),
            c: Some(c),
            ..StateDecl::default()
        }
    }

    pub fn matrix(op: &Op) -> Self {
        StateDecl {
            matrix: Some(MatrixLiteral::from(op)),
            ..StateDecl::default()
        }
    }

    fn op(&self, path: &str) -> Result<Op> {
        match (&self.model, &self.matrix, &self.probabilities) {
            (Some(m), None, None) => {
                if m != "example" {
                    return Err(Error::config(format!("{path}.model"), format!("unknown model {m:?}")));
                }
                let theta = self.theta.ok_or_else(|| missing(path, "theta"))?;
                let c = self.c.unwrap_or(0.0);
                at(path, example_state(theta, c)).map(|d| d.into_semi().as_op().clone())
            }
            (None, Some(lit), None) => at(&format!("{path}.matrix"), lit.to_op()),
            (None, None, Some(p)) => Ok(Op::diag(p)),
            _ => Err(Error::config(
                path,
                "declare exactly one of `model`, `matrix` or `probabilities`",
            )),
        }
    }

    pub fn density(&self, path: &str) -> Result<Density> {
        at(path, Density::new(self.op(path)?))
    }

    pub fn semi_density(&self, path: &str) -> Result<SemiDensity> {
        at(path, SemiDensity::new(self.op(path)?))
    }
}

/// `"computational"`, `"hadamard"`, `{"projectors": [...]}` or
/// `{"basis": unitary, "groups": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QDecl {
    Named(String),
    Projectors {
        projectors: Vec<MatrixLiteral>,
    },
    Basis {
        basis: MatrixLiteral,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        groups: Option<Vec<Vec<usize>>>,
    },
}

impl Default for QDecl {
    fn default() -> Self {
        QDecl::Named("computational".into())
    }
}

impl QDecl {
    pub fn build(&self, dim: usize, path: &str) -> Result<ProjSystem> {
        let q = match self {
            QDecl::Named(name) => match name.as_str() {
                "computational" => ProjSystem::computational(dim),
                "hadamard" if dim == 2 => at(path, ProjSystem::from_basis(&Op::hadamard()))?,
                _ => return Err(Error::config(path, format!("unknown system {name:?} for dimension {dim}"))),
            },
            QDecl::Projectors { projectors } => at(path, ProjSystem::from_literals(projectors))?,
            QDecl::Basis { basis, groups } => {
                let u = at(&format!("{path}.basis"), basis.to_op())?;
                match groups {
                    Some(g) => at(path, ProjSystem::from_basis_groups(&u, g))?,
                    None => at(path, ProjSystem::from_basis(&u))?,
                }
            }
        };
        if q.dim() != dim {
            return Err(Error::config(path, format!("system has dimension {} but states have {dim}", q.dim())));
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDecl {
    pub weight: f64,
    #[serde(flatten)]
    pub state: StateDecl,
}

/// Prior family for a declared quadrature or closed-form source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorDecl {
    pub model: String,
    #[serde(default)]
    pub c: f64,
    #[serde(default = "uniform")]
    pub prior: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

fn uniform() -> String {
    "uniform".into()
}

impl PriorDecl {
    fn check(&self, path: &str) -> Result<()> {
        if self.model != "example" {
            return Err(Error::config(format!("{path}.model"), format!("unknown model {:?}", self.model)));
        }
        if self.prior != "uniform" {
            return Err(Error::config(format!("{path}.prior"), format!("unknown prior {:?}", self.prior)));
        }
        Ok(())
    }
}

/// `{"kind": ..., "components": [...]}`, `{"quadrature": {...}}` or
/// `{"exact": {...}}` (closed-form uniform prior).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SourceKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<ComponentDecl>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<PriorDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<PriorDecl>,
}

/// A declared source, kept concrete so mixture-only operations stay
/// available.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltSource {
    Mixture(MixtureSource),
    Quadrature(QuadratureSource),
    Uniform(UniformPriorSource),
}

impl BuiltSource {
    pub fn as_source(&self) -> &dyn QuantumSource {
        match self {
            BuiltSource::Mixture(s) => s,
            BuiltSource::Quadrature(s) => s,
            BuiltSource::Uniform(s) => s,
        }
    }

    pub fn as_mixture(&self) -> Option<&MixtureSource> {
        match self {
            BuiltSource::Mixture(s) => Some(s),
            BuiltSource::Quadrature(s) => Some(s.mixture()),
            BuiltSource::Uniform(_) => None,
        }
    }

    pub fn class_law(&self, q: &ProjSystem) -> Result<ClassLaw> {
        self.as_source().class_law(q)
    }
}

impl SourceDecl {
    pub fn build(&self, path: &str) -> Result<BuiltSource> {
        match (&self.components, &self.quadrature, &self.exact) {
            (Some(comps), None, None) => {
                let kind = self.kind.unwrap_or(SourceKind::Source);
                let components = comps
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        Ok(Component {
                            weight: c.weight,
                            state: c.state.semi_density(&format!("{path}.components[{i}]"))?,
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok(BuiltSource::Mixture(at(path, MixtureSource::new(components, kind))?))
            }
            (None, Some(p), None) => {
                let p_path = format!("{path}.quadrature");
                p.check(&p_path)?;
                let nodes = p.nodes.unwrap_or(DEFAULT_NODES);
                Ok(BuiltSource::Quadrature(at(&p_path, QuadratureSource::example_uniform(p.c, nodes))?))
            }
            (None, None, Some(p)) => {
                let p_path = format!("{path}.exact");
                p.check(&p_path)?;
                Ok(BuiltSource::Uniform(at(&p_path, UniformPriorSource::new(p.c))?))
            }
            _ => Err(Error::config(path, "declare exactly one of `components`, `quadrature` or `exact`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberDecl {
    pub code_weight: f64,
    #[serde(flatten)]
    pub state: StateDecl,
}

/// Either the built-in family on a grid, `{"c": c, "thetas": [...]}` or
/// `{"c": c, "grid_points": m}`, or explicit `{"members": [...]}`. Code
/// weights default to uniform.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<MemberDecl>>,
}

impl ModelDecl {
    pub fn param(&self, path: &str) -> Result<ParamModel> {
        if let Some(members) = &self.members {
            let states = members
                .iter()
                .enumerate()
                .map(|(i, m)| m.state.density(&format!("{path}.members[{i}]")))
                .collect::<Result<_>>()?;
            return at(path, ParamModel::explicit(states));
        }
        let c = self.c.unwrap_or(0.0);
        let grid = match (&self.thetas, self.grid_points) {
            (Some(t), None) => t.clone(),
            (None, Some(m)) => uniform_grid(m),
            (None, None) => uniform_grid(DEFAULT_GRID_POINTS),
            _ => return Err(Error::config(path, "declare at most one of `thetas` and `grid_points`")),
        };
        at(path, ParamModel::example(c, grid))
    }

    pub fn generalized(&self, path: &str) -> Result<GeneralizedModel> {
        let param = self.param(path)?;
        let weights = match (&self.members, &self.code_weights) {
            (Some(m), None) => m.iter().map(|m| m.code_weight).collect(),
            (None, Some(w)) => w.clone(),
            (None, None) => vec![1.0 / param.len() as f64; param.len()],
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    format!("{path}.code_weights"),
                    "explicit members carry their own code weights",
                ))
            }
        };
        at(&format!("{path}.code_weights"), GeneralizedModel::from_param_model(&param, &weights))
    }
}
