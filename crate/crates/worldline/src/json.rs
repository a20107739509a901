//! Versioned JSON document formats for models, evolutions, curves, curve
//! measures and observer frames.
//!
//! Weights travel as strings — `"p/q"` rationals or plain decimals — and
//! parse exactly. Top-level documents carry `"schema": 1`. Emission is
//! deterministic: field order is fixed by the structs and floats print in
//! shortest round-trip form, so identical inputs produce byte-identical
//! files.

use serde::{Deserialize, Serialize};

use crate::curve_measures::CurveMeasure;
use crate::curves::CausalCurve;
use crate::measures::{Evolution, SliceMeasure};
use crate::rational;
use crate::spacetime::{Event, SpacetimeModel, TemporalFunction};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDoc {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleDoc {
    pub eps: f64,
}

impl ModelDoc {
    pub fn from_model(model: &SpacetimeModel) -> Self {
        match model {
            SpacetimeModel::Minkowski => ModelDoc {
                kind: "minkowski".into(),
                scale: None,
            },
            SpacetimeModel::Cylinder => ModelDoc {
                kind: "cylinder".into(),
                scale: None,
            },
            SpacetimeModel::Flrw { eps } => ModelDoc {
                kind: "flrw".into(),
                scale: Some(ScaleDoc { eps: *eps }),
            },
        }
    }

    pub fn to_model(&self) -> Result<SpacetimeModel> {
        match self.kind.as_str() {
            "minkowski" => Ok(SpacetimeModel::Minkowski),
            "cylinder" => Ok(SpacetimeModel::Cylinder),
            "flrw" => {
                let eps = self.scale.as_ref().map(|s| s.eps).unwrap_or(0.0);
                let model = SpacetimeModel::Flrw { eps };
                model.validate_event(&Event::new(0.0, 0.0))?;
                Ok(model)
            }
            other => Err(Error::Parse(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomDoc {
    pub event: [f64; 2],
    pub w: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceDoc {
    pub time: f64,
    pub atoms: Vec<AtomDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionDoc {
    pub schema: u32,
    pub model: ModelDoc,
    pub times: Vec<f64>,
    pub slices: Vec<SliceDoc>,
}

impl EvolutionDoc {
    pub fn from_evolution(model: &SpacetimeModel, ev: &Evolution) -> Self {
        EvolutionDoc {
            schema: SCHEMA_VERSION,
            model: ModelDoc::from_model(model),
            times: ev.times().to_vec(),
            slices: ev
                .slices()
                .iter()
                .map(|s| SliceDoc {
                    time: s.time(),
                    atoms: s
                        .atoms()
                        .iter()
                        .map(|(p, w)| AtomDoc {
                            event: [p.t, p.x],
                            w: rational::format(w),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_evolution(&self) -> Result<(SpacetimeModel, Evolution)> {
        let model = self.model.to_model()?;
        let slices = self
            .slices
            .iter()
            .map(|s| {
                let atoms = s
                    .atoms
                    .iter()
                    .map(|a| {
                        let p = Event::new(a.event[0], a.event[1]);
                        model.validate_event(&p)?;
                        Ok((p, rational::parse(&a.w)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                SliceMeasure::new(s.time, atoms)
            })
            .collect::<Result<Vec<_>>>()?;
        let ev = Evolution::new(slices)?;
        if self.times != ev.times() {
            return Err(Error::Parse(
                "evolution `times` disagree with slice times".into(),
            ));
        }
        Ok((model, ev))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveDoc {
    pub times: Vec<f64>,
    pub points: Vec<[f64; 2]>,
}

impl CurveDoc {
    pub fn from_curve(curve: &CausalCurve) -> Self {
        CurveDoc {
            times: curve.times().to_vec(),
            points: curve.points().iter().map(|p| [p.t, p.x]).collect(),
        }
    }

    pub fn to_curve(&self) -> Result<CausalCurve> {
        CausalCurve::new(
            self.times.clone(),
            self.points.iter().map(|p| Event::new(p[0], p[1])).collect(),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedCurveDoc {
    pub w: String,
    pub curve: CurveDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaDoc {
    pub schema: u32,
    pub interval: [f64; 2],
    pub atoms: Vec<WeightedCurveDoc>,
}

impl SigmaDoc {
    pub fn from_sigma(sigma: &CurveMeasure) -> Self {
        let (a, b) = sigma.interval();
        SigmaDoc {
            schema: SCHEMA_VERSION,
            interval: [a, b],
            atoms: sigma
                .atoms()
                .iter()
                .map(|(c, w)| WeightedCurveDoc {
                    w: rational::format(w),
                    curve: CurveDoc::from_curve(c),
                })
                .collect(),
        }
    }

    /// Rebuilds the canonical-frame curve measure (curve slack `1e-12` for
    /// serialized lattice instances).
    pub fn to_sigma(&self, model: &SpacetimeModel) -> Result<CurveMeasure> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok((a.curve.to_curve()?, rational::parse(&a.w)?)))
            .collect::<Result<Vec<_>>>()?;
        CurveMeasure::new(model, atoms, 1e-12)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameDoc {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl FrameDoc {
    pub fn from_clock(clock: &TemporalFunction) -> Self {
        match clock {
            TemporalFunction::Canonical => FrameDoc {
                kind: "canonical".into(),
                v: None,
                lambda: None,
            },
            TemporalFunction::Boost { v } => FrameDoc {
                kind: "boost".into(),
                v: Some(*v),
                lambda: None,
            },
            TemporalFunction::Sheared { lambda } => FrameDoc {
                kind: "sheared".into(),
                v: None,
                lambda: Some(*lambda),
            },
        }
    }

    pub fn to_clock(&self) -> Result<TemporalFunction> {
        match self.kind.as_str() {
            "canonical" => Ok(TemporalFunction::Canonical),
            "boost" => Ok(TemporalFunction::Boost {
                v: self
                    .v
                    .ok_or_else(|| Error::Parse("boost frame needs \"v\"".into()))?,
            }),
            "sheared" => Ok(TemporalFunction::Sheared {
                lambda: self
                    .lambda
                    .ok_or_else(|| Error::Parse("sheared frame needs \"lambda\"".into()))?,
            }),
            other => Err(Error::Parse(format!("unknown frame kind {other:?}"))),
        }
    }

    /// Parses a compact spec like `canonical`, `boost:0.5`, `sheared:0.3`.
    pub fn parse_compact(s: &str) -> Result<TemporalFunction> {
        let s = s.trim();
        if s == "canonical" {
            return Ok(TemporalFunction::Canonical);
        }
        if let Some(v) = s.strip_prefix("boost:") {
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("bad boost speed in {s:?}")))?;
            return Ok(TemporalFunction::Boost { v });
        }
        if let Some(l) = s.strip_prefix("sheared:") {
            let lambda: f64 = l
                .parse()
                .map_err(|_| Error::Parse(format!("bad shear in {s:?}")))?;
            return Ok(TemporalFunction::Sheared { lambda });
        }
        Err(Error::Parse(format!("unknown frame spec {s:?}")))
    }
}

pub fn to_json_string<T: Serialize>(doc: &T) -> Result<String> {
    serde_json::to_string_pretty(doc).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_json_str<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}
