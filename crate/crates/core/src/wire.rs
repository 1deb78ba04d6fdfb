//! JSON interchange formats.
//!
//! Each wire type mirrors a library value field by field and converts with
//! `From` (to the wire) and `TryFrom` (back, revalidating every invariant).
//! Exact scalars travel as strings `a/b+c/di`; floats as `[re, im]`.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::analysis::GrowthFit;
use crate::error::{Error, Result};
use crate::matrix::{AnyMatrix, Matrix};
use crate::modgroup::UnimodularMatrix;
use crate::poly::Poly;
use crate::qexp::{LogBlock, PureQSeries};
use crate::repspace::{AnyRepresentation, Representation};
use crate::scalar::{GaussRat, C64};
use crate::vvmf::{Body, Classification, PolyVector, Verdict, VvmfForm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixWire {
    Exact(Vec<Vec<String>>),
    Float(Vec<Vec<C64>>),
}

fn exact_rows(m: &Matrix<GaussRat>) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
}

fn parse_exact(field: &str, rows: &[Vec<String>]) -> Result<Matrix<GaussRat>> {
    let parsed = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, s)| {
                    s.parse::<GaussRat>()
                        .map_err(|_| Error::parse(format!("{field}[{i}][{j}]"), format!("cannot parse `{s}` as a/b+c/di")))
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<GaussRat>>>>()?;
    Matrix::from_rows(parsed).map_err(|e| Error::parse(field, e.to_string()))
}

impl From<&AnyMatrix> for MatrixWire {
    fn from(m: &AnyMatrix) -> Self {
        match m {
            AnyMatrix::Exact(m) => MatrixWire::Exact(exact_rows(m)),
            AnyMatrix::Float(m) => MatrixWire::Float(m.to_rows()),
        }
    }
}

impl MatrixWire {
    pub fn into_matrix(self, field: &str) -> Result<AnyMatrix> {
        match self {
            MatrixWire::Exact(rows) => parse_exact(field, &rows).map(AnyMatrix::Exact),
            MatrixWire::Float(rows) => Matrix::from_rows(rows)
                .map(AnyMatrix::Float)
                .map_err(|e| Error::parse(field, e.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationWire {
    pub p: usize,
    pub backend: Backend,
    #[serde(rename = "S")]
    pub s: MatrixWire,
    #[serde(rename = "T")]
    pub t: MatrixWire,
}

impl From<&AnyRepresentation> for RepresentationWire {
    fn from(r: &AnyRepresentation) -> Self {
        RepresentationWire {
            p: r.p(),
            backend: if r.is_exact() { Backend::Exact } else { Backend::Float },
            s: (&r.s()).into(),
            t: (&r.t()).into(),
        }
    }
}

impl TryFrom<RepresentationWire> for AnyRepresentation {
    type Error = Error;

    fn try_from(w: RepresentationWire) -> Result<Self> {
        let s = w.s.into_matrix("S")?;
        let t = w.t.into_matrix("T")?;
        for (name, m) in [("S", &s), ("T", &t)] {
            if m.rows() != w.p || m.cols() != w.p {
                return Err(Error::parse(name, format!("expected {0}x{0}, found {1}x{2}", w.p, m.rows(), m.cols())));
            }
        }
        let rep = match (w.backend, s, t) {
            (Backend::Exact, AnyMatrix::Exact(s), AnyMatrix::Exact(t)) => Representation::new(s, t).map(AnyRepresentation::Exact),
            (Backend::Float, s, t) => Representation::new(s.to_c64(), t.to_c64()).map(AnyRepresentation::Float),
            (Backend::Exact, _, _) => return Err(Error::parse("backend", "exact backend needs string entries")),
        };
        rep.map_err(|e| Error::parse("S", e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesWire {
    pub mu: String,
    pub nu: i64,
    pub coeffs: Vec<C64>,
    pub exact: bool,
}

impl From<&PureQSeries> for SeriesWire {
    fn from(s: &PureQSeries) -> Self {
        SeriesWire {
            mu: s.mu().to_string(),
            nu: s.nu(),
            coeffs: s.coeffs().to_vec(),
            exact: s.is_exact(),
        }
    }
}

fn parse_mu(field: &str, s: &str) -> Result<Rational64> {
    s.trim()
        .parse::<Rational64>()
        .map_err(|_| Error::parse(field, format!("cannot parse `{s}` as a rational a/b")))
}

impl SeriesWire {
    pub fn into_series(self, field: &str) -> Result<PureQSeries> {
        let mu = parse_mu(&format!("{field}.mu"), &self.mu)?;
        PureQSeries::new(mu, self.nu, self.coeffs, self.exact).map_err(|e| Error::parse(field, e.to_string()))
    }
}

impl TryFrom<SeriesWire> for PureQSeries {
    type Error = Error;

    fn try_from(w: SeriesWire) -> Result<Self> {
        w.into_series("series")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockWire {
    pub mu: String,
    pub h: Vec<SeriesWire>,
}

impl From<&LogBlock> for BlockWire {
    fn from(b: &LogBlock) -> Self {
        BlockWire {
            mu: b.mu().to_string(),
            h: b.h().iter().map(Into::into).collect(),
        }
    }
}

impl BlockWire {
    fn into_block(self, field: &str) -> Result<LogBlock> {
        let mu = parse_mu(&format!("{field}.mu"), &self.mu)?;
        let h = self
            .h
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.into_series(&format!("{field}.h[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        LogBlock::new(mu, h).map_err(|e| Error::parse(field, e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodyWire {
    /// Ascending coefficients per component.
    Poly { components: Vec<Vec<String>> },
    Logblocks {
        blocks: Vec<BlockWire>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frame: Option<MatrixWire>,
    },
    Scalars {
        series: Vec<SeriesWire>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frame: Option<MatrixWire>,
    },
}

impl From<&Body> for BodyWire {
    fn from(b: &Body) -> Self {
        match b {
            Body::Poly(v) => BodyWire::Poly {
                components: v.0.iter().map(|p| p.coeffs().iter().map(ToString::to_string).collect()).collect(),
            },
            Body::LogBlocks { blocks, frame } => BodyWire::Logblocks {
                blocks: blocks.iter().map(Into::into).collect(),
                frame: frame.as_ref().map(Into::into),
            },
            Body::Scalars { series, frame } => BodyWire::Scalars {
                series: series.iter().map(Into::into).collect(),
                frame: frame.as_ref().map(Into::into),
            },
        }
    }
}

impl TryFrom<BodyWire> for Body {
    type Error = Error;

    fn try_from(w: BodyWire) -> Result<Self> {
        let frame = |f: Option<MatrixWire>| f.map(|m| m.into_matrix("body.frame")).transpose();
        Ok(match w {
            BodyWire::Poly { components } => {
                let polys = components
                    .iter()
                    .enumerate()
                    .map(|(i, cs)| {
                        cs.iter()
                            .enumerate()
                            .map(|(j, s)| {
                                s.parse::<GaussRat>().map_err(|_| {
                                    Error::parse(format!("body.components[{i}][{j}]"), format!("cannot parse `{s}` as a/b+c/di"))
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                            .map(Poly::new)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Body::Poly(PolyVector(polys))
            }
            BodyWire::Logblocks { blocks, frame: f } => Body::LogBlocks {
                blocks: blocks
                    .into_iter()
                    .enumerate()
                    .map(|(i, b)| b.into_block(&format!("body.blocks[{i}]")))
                    .collect::<Result<_>>()?,
                frame: frame(f)?,
            },
            BodyWire::Scalars { series, frame: f } => Body::Scalars {
                series: series
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| s.into_series(&format!("body.series[{i}]")))
                    .collect::<Result<_>>()?,
                frame: frame(f)?,
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormWire {
    pub k: i64,
    pub rep: RepresentationWire,
    pub body: BodyWire,
}

impl From<&VvmfForm> for FormWire {
    fn from(f: &VvmfForm) -> Self {
        FormWire {
            k: f.k(),
            rep: f.rep().into(),
            body: f.body().into(),
        }
    }
}

impl TryFrom<FormWire> for VvmfForm {
    type Error = Error;

    fn try_from(w: FormWire) -> Result<Self> {
        let rep = AnyRepresentation::try_from(w.rep).map_err(|e| prefix("rep", e))?;
        let body = Body::try_from(w.body)?;
        VvmfForm::new(w.k, rep, body).map_err(|e| Error::parse("body", e.to_string()))
    }
}

fn prefix(scope: &str, e: Error) -> Error {
    match e {
        Error::Parse { field, message } => Error::parse(format!("{scope}.{field}"), message),
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateWire {
    pub block: usize,
    pub s: usize,
    pub n: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationWire {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<String>>>,
    pub basis: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateWire>,
    pub polynomial_components: Vec<Option<bool>>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub funceq_residual: Option<f64>,
}

impl From<&Classification> for ClassificationWire {
    fn from(c: &Classification) -> Self {
        ClassificationWire {
            verdict: c.verdict,
            span: c.span,
            witness: c.witness.as_ref().map(exact_rows),
            basis: c.basis.clone(),
            reduction: c.reduction.as_ref().map(exact_rows),
            certificate: c.certificate.map(|x| CertificateWire {
                block: x.block,
                s: x.s,
                n: x.n,
            }),
            polynomial_components: c.polynomial_components.clone(),
            warnings: c.warnings.clone(),
            funceq_residual: c.funceq_residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFitWire {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub n_range: (u64, u64),
    pub points: usize,
    pub y0: Option<f64>,
    pub gamma: UnimodularMatrix,
    pub tau0: C64,
    pub component: usize,
}

impl From<&GrowthFit> for GrowthFitWire {
    fn from(g: &GrowthFit) -> Self {
        GrowthFitWire {
            slope: g.slope,
            intercept: g.intercept,
            stderr: g.stderr,
            n_range: g.n_range,
            points: g.points,
            y0: g.y0,
            gamma: g.gamma.clone(),
            tau0: g.tau0,
            component: g.component,
        }
    }
}

/// Serializes a form as JSON.
pub fn form_to_json(form: &VvmfForm) -> String {
    serde_json::to_string(&FormWire::from(form)).expect("wire types serialize")
}

/// Parses and validates a form; errors name the offending field.
pub fn form_from_json(s: &str) -> Result<VvmfForm> {
    let de = &mut serde_json::Deserializer::from_str(s);
    let w: FormWire = serde_path_to_error::deserialize(de).map_err(|e| Error::parse(e.path().to_string(), e.inner().to_string()))?;
    w.try_into()
}
