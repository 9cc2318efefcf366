//! Self-maps on a box and the JSON mapping corpus.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value,
};
use serde::{Deserialize, Serialize};

use crate::conditions::{GaugeFunction, ZamfirescuConstants};
use crate::error::{Error, Result};
use crate::geometry::{all_finite, BoxDomain, Point};
use crate::norm::Norm;

/// Tolerance on `‖T(p) − p‖` for a declared fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-12;

type MapFn = dyn Fn(&[f64]) -> Point + Send + Sync;

/// How `T` is evaluated.
#[derive(Clone)]
pub enum MapKind {
    /// `x ↦ M x + b`.
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    /// One-dimensional map given as an expression in `x`.
    ScalarFormula {
        expression: String,
        tree: Arc<Node<DefaultNumericTypes>>,
    },
    /// One-dimensional piecewise-linear interpolation through `(x, T x)` knots.
    Piecewise { knots: Vec<(f64, f64)> },
    /// Arbitrary closure, for programmatic use.
    Custom(Arc<MapFn>),
}

impl fmt::Debug for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::Affine { matrix, offset } => f
                .debug_struct("Affine")
                .field("matrix", matrix)
                .field("offset", offset)
                .finish(),
            MapKind::ScalarFormula { expression, .. } => f
                .debug_struct("ScalarFormula")
                .field("expression", expression)
                .finish(),
            MapKind::Piecewise { knots } => f.debug_struct("Piecewise").field("knots", knots).finish(),
            MapKind::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl MapKind {
    pub fn formula(expression: &str) -> Result<Self> {
        let tree = build_operator_tree::<DefaultNumericTypes>(expression)
            .map_err(|e| Error::InvalidMap(format!("cannot parse `{expression}`: {e}")))?;
        Ok(MapKind::ScalarFormula {
            expression: expression.to_string(),
            tree: Arc::new(tree),
        })
    }

    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> Point + Send + Sync + 'static,
    {
        MapKind::Custom(Arc::new(f))
    }

    fn apply(&self, x: &[f64]) -> Result<Point, String> {
        match self {
            MapKind::Affine { matrix, offset } => Ok(matrix
                .iter()
                .zip(offset)
                .map(|(row, b)| row.iter().zip(x).map(|(m, v)| m * v).sum::<f64>() + b)
                .collect()),
            MapKind::ScalarFormula { tree, .. } => {
                let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
                ctx.set_value("x".into(), Value::from_float(x[0]))
                    .map_err(|e| e.to_string())?;
                let v = tree.eval_number_with_context(&ctx).map_err(|e| e.to_string())?;
                Ok(vec![v])
            }
            MapKind::Piecewise { knots } => Ok(vec![interpolate(knots, x[0])]),
            MapKind::Custom(f) => Ok(f(x)),
        }
    }
}

fn interpolate(knots: &[(f64, f64)], t: f64) -> f64 {
    let last = knots.len() - 1;
    if t <= knots[0].0 {
        return knots[0].1;
    }
    if t >= knots[last].0 {
        return knots[last].1;
    }
    let j = knots.partition_point(|(x, _)| *x <= t);
    let (x0, y0) = knots[j - 1];
    let (x1, y1) = knots[j];
    y0 + (t - x0) / (x1 - x0) * (y1 - y0)
}

/// Contractive constants a corpus entry proposes for certification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposedConstants {
    pub zamfirescu: ZamfirescuConstants,
    /// δ for the Osilike–Udomene and contractive-like checks; defaults to
    /// the δ induced by the Zamfirescu constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// `L` of the Osilike–Udomene bound; defaults to `2δ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    /// φ of the contractive-like bound; defaults to `t ↦ L t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeFunction>,
}

impl ProposedConstants {
    pub fn delta(&self) -> Result<f64> {
        match self.delta {
            Some(d) => Ok(d),
            None => self.zamfirescu.delta(),
        }
    }

    pub fn lipschitz(&self) -> Result<f64> {
        match self.lipschitz {
            Some(l) => Ok(l),
            None => Ok(2.0 * self.delta()?),
        }
    }

    pub fn gauge(&self) -> Result<GaugeFunction> {
        match &self.gauge {
            Some(g) => Ok(g.clone()),
            None => GaugeFunction::linear(self.lipschitz()?),
        }
    }
}

impl Default for ProposedConstants {
    fn default() -> Self {
        Self {
            zamfirescu: ZamfirescuConstants {
                a: 0.9,
                b: 0.3,
                c: 0.3,
            },
            delta: None,
            lipschitz: None,
            gauge: None,
        }
    }
}

/// A self-map `T` on a box `E`.
#[derive(Debug, Clone)]
pub struct MappingSpec {
    pub label: String,
    pub domain: BoxDomain,
    pub kind: MapKind,
    pub known_fixed_point: Option<Point>,
    pub constants: Option<ProposedConstants>,
}

impl MappingSpec {
    /// Builds a map and checks that a declared fixed point satisfies
    /// `‖T(p) − p‖∞ ≤ 1e−12`.
    pub fn new(
        label: impl Into<String>,
        domain: BoxDomain,
        kind: MapKind,
        known_fixed_point: Option<Point>,
    ) -> Result<Self> {
        let spec = Self {
            label: label.into(),
            domain,
            kind,
            known_fixed_point: None,
            constants: None,
        };
        spec.check_kind()?;
        if let Some(p) = known_fixed_point {
            let tp = spec.evaluate(&p)?;
            let err = Norm::max().dist(&tp, &p);
            if err > FIXED_POINT_TOL {
                return Err(Error::InvalidMap(format!(
                    "declared fixed point {p:?} of `{}` has residual {err:e}",
                    spec.label
                )));
            }
            return Ok(Self {
                known_fixed_point: Some(p),
                ..spec
            });
        }
        Ok(spec)
    }

    pub fn with_constants(mut self, constants: ProposedConstants) -> Self {
        self.constants = Some(constants);
        self
    }

    /// Convenience: `x ↦ M x + b` on a box.
    pub fn affine(
        label: impl Into<String>,
        domain: BoxDomain,
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
        known_fixed_point: Option<Point>,
    ) -> Result<Self> {
        Self::new(
            label,
            domain,
            MapKind::Affine { matrix, offset },
            known_fixed_point,
        )
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    fn check_kind(&self) -> Result<()> {
        let d = self.dimension();
        match &self.kind {
            MapKind::Affine { matrix, offset } => {
                if offset.len() != d || matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
                    return Err(Error::InvalidMap(format!(
                        "affine map `{}` must have a {d}x{d} matrix and length-{d} offset",
                        self.label
                    )));
                }
            }
            MapKind::ScalarFormula { .. } if d != 1 => {
                return Err(Error::InvalidMap(
                    "scalar_formula maps are one-dimensional".into(),
                ));
            }
            MapKind::Piecewise { knots } => {
                if d != 1 {
                    return Err(Error::InvalidMap("piecewise maps are one-dimensional".into()));
                }
                if knots.len() < 2 || knots.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::InvalidMap(
                        "piecewise knots need >= 2 entries with strictly increasing x".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// `T(x)`. The argument must lie in `E` and the image must too; there is
    /// no projection.
    pub fn evaluate(&self, x: &[f64]) -> Result<Point> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: x.len(),
            });
        }
        if !all_finite(x) {
            return Err(Error::NonFiniteValue {
                label: self.label.clone(),
                point: x.to_vec(),
            });
        }
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain {
                label: self.label.clone(),
                point: x.to_vec(),
            });
        }
        let tx = self
            .kind
            .apply(x)
            .map_err(|msg| Error::InvalidMap(format!("evaluating `{}`: {msg}", self.label)))?;
        if tx.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: tx.len(),
            });
        }
        if !all_finite(&tx) {
            return Err(Error::NonFiniteValue {
                label: self.label.clone(),
                point: x.to_vec(),
            });
        }
        if !self.domain.contains(&tx) {
            return Err(Error::DomainEscape {
                label: self.label.clone(),
                point: tx,
            });
        }
        Ok(tx)
    }

    /// `‖x − T x‖`.
    pub fn residual(&self, norm: &Norm, x: &[f64]) -> Result<f64> {
        let tx = self.evaluate(x)?;
        Ok(norm.dist(x, &tx))
    }
}

/// One entry of the JSON mapping corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub label: String,
    pub dimension: usize,
    pub domain: BoxDomain,
    pub kind: CorpusKind,
    pub parameters: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_fixed_point: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ProposedConstants>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    Affine,
    ScalarFormula,
    Piecewise,
}

#[derive(Deserialize)]
struct AffineParams {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

#[derive(Deserialize)]
struct FormulaParams {
    expression: String,
}

#[derive(Deserialize)]
struct PiecewiseParams {
    knots: Vec<(f64, f64)>,
}

impl CorpusEntry {
    pub fn to_mapping(&self) -> Result<MappingSpec> {
        let ctx = |e: serde_json::Error| Error::Corpus(format!("entry `{}`: {e}", self.label));
        let domain = BoxDomain::new(self.domain.lo.clone(), self.domain.hi.clone())?;
        if domain.dimension() != self.dimension {
            return Err(Error::Corpus(format!(
                "entry `{}`: dimension {} disagrees with domain of dimension {}",
                self.label,
                self.dimension,
                domain.dimension()
            )));
        }
        let kind = match self.kind {
            CorpusKind::Affine => {
                let p: AffineParams = serde_json::from_value(self.parameters.clone()).map_err(ctx)?;
                MapKind::Affine {
                    matrix: p.matrix,
                    offset: p.offset,
                }
            }
            CorpusKind::ScalarFormula => {
                let p: FormulaParams = serde_json::from_value(self.parameters.clone()).map_err(ctx)?;
                MapKind::formula(&p.expression)?
            }
            CorpusKind::Piecewise => {
                let p: PiecewiseParams = serde_json::from_value(self.parameters.clone()).map_err(ctx)?;
                MapKind::Piecewise { knots: p.knots }
            }
        };
        let spec = MappingSpec::new(self.label.clone(), domain, kind, self.known_fixed_point.clone())?;
        Ok(match &self.constants {
            Some(c) => spec.with_constants(c.clone()),
            None => spec,
        })
    }
}

/// The mapping corpus: a JSON array of [`CorpusEntry`].
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn from_json(text: &str) -> Result<Self> {
        let entries: Vec<CorpusEntry> = serde_json::from_str(text)?;
        let mut seen = std::collections::HashSet::new();
        for e in &entries {
            if !seen.insert(e.label.as_str()) {
                return Err(Error::Corpus(format!("duplicate label `{}`", e.label)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn get(&self, label: &str) -> Result<MappingSpec> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .ok_or_else(|| Error::Corpus(format!("no map labelled `{label}`")))?
            .to_mapping()
    }

    pub fn mappings(&self) -> Result<Vec<MappingSpec>> {
        self.entries.iter().map(CorpusEntry::to_mapping).collect()
    }
}
