//! JSON documents exchanged by the command-line tools. Every document
//! carries a `kind` tag naming the object it holds.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::body3::Body3;
use crate::error::{Error, Result};
use crate::even3d::{EvenValuation3, KlainFunction, KlainJson};
use crate::functorial::MeasureValuation;
use crate::linmap::{LinearMapJson, LinearMapSpec};
use crate::planar::{PlanarBody, PlanarBodyJson};
use crate::polytope::{Body, Polytope};
use crate::trig::TrigPolyJson;
use crate::val1::Valuation1;
use crate::val2::{Valuation2, Valuation2Json};

/// Body of a measure-type term: a planar body or a polytope in R¹..R³.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TermBodyJson {
    Support {
        #[serde(flatten)]
        h: TrigPolyJson,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
}

impl TermBodyJson {
    pub fn into_body(self) -> Result<Body> {
        match self {
            TermBodyJson::Support { h } => Body::planar(PlanarBodyJson::Support { h }.into_body()?),
            TermBodyJson::Polygon { vertices } => Body::planar(PlanarBodyJson::Polygon { vertices }.into_body()?),
            TermBodyJson::Polytope { vertices } => {
                let dim = vertices.first().map(Vec::len).unwrap_or(0);
                Ok(Body::Polytope(Polytope::from_rows(dim, &vertices)?))
            }
        }
    }
}

impl From<&Body> for TermBodyJson {
    fn from(b: &Body) -> Self {
        match b {
            Body::Smooth(p) => match PlanarBodyJson::from(p) {
                PlanarBodyJson::Support { h } => TermBodyJson::Support { h },
                PlanarBodyJson::Polygon { vertices } => TermBodyJson::Polygon { vertices },
            },
            Body::Polytope(p) => TermBodyJson::Polytope {
                vertices: p.vertices().iter().map(|v| v.iter().copied().collect()).collect(),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub c: f64,
    pub body: TermBodyJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum Even3Json {
    Intrinsic { coefficients: [f64; 4] },
    Brightness { vertices: Vec<[f64; 3]>, radius: f64 },
}

impl Even3Json {
    pub fn into_valuation(self) -> Result<EvenValuation3> {
        match self {
            Even3Json::Intrinsic { coefficients } => Ok(EvenValuation3::Intrinsic(coefficients)),
            Even3Json::Brightness { vertices, radius } => {
                let pts = vertices.iter().map(|v| DVector::from_column_slice(v)).collect();
                EvenValuation3::brightness(Body3::new(Polytope::new(3, pts)?, radius)?)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Document {
    Valuation1 {
        c0: f64,
        c1: f64,
    },
    Valuation2 {
        #[serde(flatten)]
        v: Valuation2Json,
    },
    Body {
        #[serde(flatten)]
        body: PlanarBodyJson,
    },
    Map {
        #[serde(flatten)]
        map: LinearMapJson,
    },
    Measure {
        dim: usize,
        terms: Vec<TermJson>,
    },
    Even3 {
        valuation: Even3Json,
    },
    Klain {
        #[serde(flatten)]
        klain: KlainJson,
    },
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Document::Valuation1 { .. } => "valuation1",
            Document::Valuation2 { .. } => "valuation2",
            Document::Body { .. } => "body",
            Document::Map { .. } => "map",
            Document::Measure { .. } => "measure",
            Document::Even3 { .. } => "even3",
            Document::Klain { .. } => "klain",
        }
    }

    fn wrong(&self, want: &str) -> Error {
        Error::Format(format!("expected a {want} document, got {}", self.kind()))
    }

    pub fn valuation1(v: &Valuation1) -> Self {
        Document::Valuation1 { c0: v.c0, c1: v.c1 }
    }

    pub fn valuation2(v: &Valuation2) -> Self {
        Document::Valuation2 { v: v.into() }
    }

    pub fn body(b: &PlanarBody) -> Self {
        Document::Body { body: b.into() }
    }

    pub fn map(f: &LinearMapSpec) -> Self {
        Document::Map { map: f.into() }
    }

    pub fn measure(m: &MeasureValuation) -> Self {
        use crate::functorial::Valuation;
        Document::Measure {
            dim: m.dim(),
            terms: m
                .terms()
                .iter()
                .map(|(c, b)| TermJson { c: *c, body: b.into() })
                .collect(),
        }
    }

    pub fn klain(k: &KlainFunction) -> Self {
        Document::Klain { klain: k.into() }
    }

    pub fn into_valuation1(self) -> Result<Valuation1> {
        match self {
            Document::Valuation1 { c0, c1 } => Ok(Valuation1 { c0, c1 }),
            d => Err(d.wrong("valuation1")),
        }
    }

    pub fn into_valuation2(self) -> Result<Valuation2> {
        match self {
            Document::Valuation2 { v } => v.into_valuation(),
            d => Err(d.wrong("valuation2")),
        }
    }

    pub fn into_body(self) -> Result<PlanarBody> {
        match self {
            Document::Body { body } => body.into_body(),
            d => Err(d.wrong("body")),
        }
    }

    pub fn into_map(self) -> Result<LinearMapSpec> {
        match self {
            Document::Map { map } => map.into_map(),
            d => Err(d.wrong("map")),
        }
    }

    pub fn into_measure(self) -> Result<MeasureValuation> {
        match self {
            Document::Measure { dim, terms } => MeasureValuation::new(
                dim,
                terms
                    .into_iter()
                    .map(|t| Ok((t.c, t.body.into_body()?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            d => Err(d.wrong("measure")),
        }
    }

    pub fn into_even3(self) -> Result<EvenValuation3> {
        match self {
            Document::Even3 { valuation } => valuation.into_valuation(),
            d => Err(d.wrong("even3")),
        }
    }

    pub fn into_klain(self) -> Result<KlainFunction> {
        match self {
            Document::Klain { klain } => klain.into_klain(),
            d => Err(d.wrong("klain")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::TrigPoly;

    #[test]
    fn valuation_roundtrip() {
        let v = Valuation2::new(1.5, TrigPoly::new(vec![0.5, 0.0, 0.25], vec![0.0, -0.125]), 2.0);
        let text = Document::valuation2(&v).to_json();
        assert!(text.contains("\"kind\": \"valuation2\""));
        assert_eq!(Document::parse(&text).unwrap().into_valuation2().unwrap(), v);
    }

    #[test]
    fn body_documents_match_the_body_format() {
        let d = Document::parse(r#"{"kind":"body","type":"support","N":2,"a":[1.0,0.0,0.1],"b":[0.0,0.0]}"#).unwrap();
        let b = d.into_body().unwrap();
        assert!(b.is_smooth());
        let d = Document::parse(r#"{"kind":"body","type":"polygon","vertices":[[0,0],[1,0],[1,1],[0,1]]}"#).unwrap();
        assert!((d.into_body().unwrap().area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn measure_and_map_documents() {
        let m = Document::parse(
            r#"{"kind":"measure","dim":2,"terms":[
                {"c":1.0,"body":{"type":"polygon","vertices":[[0,0],[1,0],[0,1]]}},
                {"c":-0.5,"body":{"type":"polytope","vertices":[[0,0]]}}]}"#,
        )
        .unwrap()
        .into_measure()
        .unwrap();
        assert_eq!(m.terms().len(), 2);
        let back = Document::parse(&Document::measure(&m).to_json()).unwrap().into_measure().unwrap();
        assert_eq!(back, m);
        let f = Document::parse(r#"{"kind":"map","rows":1,"cols":2,"data":[1,0]}"#).unwrap().into_map().unwrap();
        assert!(f.is_surjective());
        assert!(Document::parse(r#"{"kind":"map","rows":1,"cols":2,"data":[1]}"#).unwrap().into_map().is_err());
    }

    #[test]
    fn wrong_kind_is_reported() {
        let d = Document::valuation1(&Valuation1::chi());
        let err = d.into_valuation2().unwrap_err();
        assert!(err.to_string().contains("valuation1"));
        assert!(Document::parse("{\"kind\":\"nothing\"}").is_err());
    }

    #[test]
    fn even3_documents() {
        let d = Document::parse(r#"{"kind":"even3","valuation":{"variant":"intrinsic","coefficients":[0,1,0,0]}}"#).unwrap();
        assert_eq!(d.into_even3().unwrap().degree(), Some(1));
        let d = Document::parse(
            r#"{"kind":"even3","valuation":{"variant":"brightness","radius":0,
                "vertices":[[0,0,0],[1,0,0],[0,1,0],[0,0,1]]}}"#,
        )
        .unwrap();
        assert_eq!(d.into_even3().unwrap().degree(), Some(1));
    }
}
