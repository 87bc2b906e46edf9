//! JSON forms of measures and isometry descriptors.
//!
//! Measures serialize as
//! `{"domain":"real"|"unit","type":"discrete","atoms":[[pos,w],...]}` when
//! every quantile segment is flat, and otherwise as
//! `{"domain":...,"type":"pl_quantile","breaks":[...],"segments":[[a,b],...]}`.
//! Numbers are written in shortest round-trip decimal form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometries::IsometryDescriptor;
use crate::measure::{Domain, Measure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DomainJson {
    Real,
    Unit,
}

impl From<Domain> for DomainJson {
    fn from(d: Domain) -> Self {
        match d {
            Domain::RealLine => Self::Real,
            Domain::UnitInterval => Self::Unit,
        }
    }
}

impl From<DomainJson> for Domain {
    fn from(d: DomainJson) -> Self {
        match d {
            DomainJson::Real => Domain::RealLine,
            DomainJson::Unit => Domain::UnitInterval,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindJson {
    Discrete,
    PlQuantile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureJson {
    domain: DomainJson,
    #[serde(rename = "type")]
    kind: KindJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    breaks: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    segments: Option<Vec<[f64; 2]>>,
}

impl MeasureJson {
    fn from_measure(mu: &Measure<f64>) -> Self {
        let domain = mu.domain().into();
        match mu.atoms() {
            Some(atoms) => Self {
                domain,
                kind: KindJson::Discrete,
                atoms: Some(atoms.into_iter().map(|(x, w)| [x, w]).collect()),
                breaks: None,
                segments: None,
            },
            None => Self {
                domain,
                kind: KindJson::PlQuantile,
                atoms: None,
                breaks: Some(mu.breaks().to_vec()),
                segments: Some(mu.segments().into_iter().map(|(a, b)| [a, b]).collect()),
            },
        }
    }

    fn into_measure(self) -> Result<Measure<f64>> {
        let domain = self.domain.into();
        let missing = |f: &str| Error::InvalidRepresentation(format!("missing field `{f}`"));
        match self.kind {
            KindJson::Discrete => {
                if self.breaks.is_some() || self.segments.is_some() {
                    return Err(Error::InvalidRepresentation("discrete measure with quantile fields".into()));
                }
                let atoms: Vec<(f64, f64)> = self.atoms.ok_or_else(|| missing("atoms"))?.into_iter().map(|[x, w]| (x, w)).collect();
                Measure::from_atoms(domain, &atoms)
            }
            KindJson::PlQuantile => {
                if self.atoms.is_some() {
                    return Err(Error::InvalidRepresentation("pl_quantile measure with atoms".into()));
                }
                let breaks = self.breaks.ok_or_else(|| missing("breaks"))?;
                let segments = self.segments.ok_or_else(|| missing("segments"))?.into_iter().map(|[a, b]| (a, b)).collect();
                Measure::from_quantile(domain, breaks, segments)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DescriptorJson {
    Trivial { orientation: i8, offset: f64 },
    Flip,
    Translation { nu: MeasureJson },
    BarycentricReflection,
    Exotic { q: f64 },
    Compose { items: Vec<DescriptorJson> },
}

impl DescriptorJson {
    fn from_descriptor(d: &IsometryDescriptor<f64>) -> Self {
        match d {
            IsometryDescriptor::Trivial { orientation, offset } => Self::Trivial { orientation: *orientation, offset: *offset },
            IsometryDescriptor::Flip => Self::Flip,
            IsometryDescriptor::Translation { nu } => Self::Translation { nu: MeasureJson::from_measure(nu) },
            IsometryDescriptor::BarycentricReflection => Self::BarycentricReflection,
            IsometryDescriptor::Exotic { q } => Self::Exotic { q: *q },
            IsometryDescriptor::Compose(items) => Self::Compose { items: items.iter().map(Self::from_descriptor).collect() },
        }
    }

    fn into_descriptor(self) -> Result<IsometryDescriptor<f64>> {
        Ok(match self {
            Self::Trivial { orientation, offset } => IsometryDescriptor::Trivial { orientation, offset },
            Self::Flip => IsometryDescriptor::Flip,
            Self::Translation { nu } => IsometryDescriptor::Translation { nu: nu.into_measure()? },
            Self::BarycentricReflection => IsometryDescriptor::BarycentricReflection,
            Self::Exotic { q } => IsometryDescriptor::Exotic { q },
            Self::Compose { items } => {
                IsometryDescriptor::Compose(items.into_iter().map(Self::into_descriptor).collect::<Result<_>>()?)
            }
        })
    }
}

fn syntax(e: serde_json::Error) -> Error {
    Error::InvalidRepresentation(format!("json: {e}"))
}

pub fn measure_to_value(mu: &Measure<f64>) -> serde_json::Value {
    serde_json::to_value(MeasureJson::from_measure(mu)).expect("measures serialize")
}

pub fn measure_to_json(mu: &Measure<f64>) -> String {
    serde_json::to_string(&MeasureJson::from_measure(mu)).expect("measures serialize")
}

pub fn measures_to_json(mus: &[Measure<f64>]) -> String {
    let list: Vec<MeasureJson> = mus.iter().map(MeasureJson::from_measure).collect();
    serde_json::to_string(&list).expect("measures serialize")
}

pub fn measure_from_json(text: &str) -> Result<Measure<f64>> {
    serde_json::from_str::<MeasureJson>(text).map_err(syntax)?.into_measure()
}

pub fn descriptor_to_json(d: &IsometryDescriptor<f64>) -> String {
    serde_json::to_string(&DescriptorJson::from_descriptor(d)).expect("descriptors serialize")
}

pub fn descriptor_from_json(text: &str) -> Result<IsometryDescriptor<f64>> {
    serde_json::from_str::<DescriptorJson>(text).map_err(syntax)?.into_descriptor()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_round_trip() {
        let mu = Measure::from_atoms(Domain::UnitInterval, &[(0.0, 0.3), (1.0, 0.7)]).unwrap();
        let text = measure_to_json(&mu);
        assert_eq!(text, r#"{"domain":"unit","type":"discrete","atoms":[[0.0,0.3],[1.0,0.7]]}"#);
        assert_eq!(measure_from_json(&text).unwrap(), mu);
    }

    #[test]
    fn quantile_round_trip() {
        let mu = Measure::uniform(Domain::RealLine, -1.0, 2.0).unwrap();
        let text = measure_to_json(&mu);
        assert_eq!(text, r#"{"domain":"real","type":"pl_quantile","breaks":[0.0,1.0],"segments":[[-1.0,3.0]]}"#);
        assert_eq!(measure_from_json(&text).unwrap(), mu);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(measure_from_json("{").is_err());
        assert!(measure_from_json(r#"{"domain":"real","type":"discrete"}"#).is_err());
        assert!(measure_from_json(r#"{"domain":"real","type":"discrete","atoms":[[0,-1]]}"#).is_err());
        assert!(measure_from_json(r#"{"domain":"unit","type":"discrete","atoms":[[2,1]]}"#).is_err());
    }

    #[test]
    fn descriptors() {
        let d = descriptor_from_json(r#"{"kind":"compose","items":[{"kind":"flip"},{"kind":"trivial","orientation":-1,"offset":1.0}]}"#).unwrap();
        assert_eq!(
            d,
            IsometryDescriptor::Compose(vec![
                IsometryDescriptor::Flip,
                IsometryDescriptor::Trivial { orientation: -1, offset: 1.0 }
            ])
        );
        assert_eq!(descriptor_from_json(&descriptor_to_json(&d)).unwrap(), d);
        let t = descriptor_from_json(r#"{"kind":"translation","nu":{"domain":"real","type":"discrete","atoms":[[1,1]]}}"#).unwrap();
        assert!(matches!(t, IsometryDescriptor::Translation { .. }));
        assert!(descriptor_from_json(r#"{"kind":"rotation"}"#).is_err());
    }
}
