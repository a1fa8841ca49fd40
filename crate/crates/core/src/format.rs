//! JSON and CSV representations of complexes.

use std::fmt::{self, Write as _};

use serde::de::{self, Deserializer, Visitor};
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::continuation::{MarkerKind, ParetoComplex, Stratum};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0}")]
    Version(u32),
}

/// A float written with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = F17;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or null")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<F17, E> {
                Ok(F17(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<F17, E> {
                Ok(F17(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<F17, E> {
                Ok(F17(v as f64))
            }
            fn visit_unit<E: de::Error>(self) -> Result<F17, E> {
                Ok(F17(f64::NAN))
            }
            fn visit_none<E: de::Error>(self) -> Result<F17, E> {
                Ok(F17(f64::NAN))
            }
        }
        d.deserialize_any(V)
    }
}

fn f17s(v: &[f64]) -> Vec<F17> {
    v.iter().copied().map(F17).collect()
}

fn floats(v: &[F17]) -> Vec<f64> {
    v.iter().map(|f| f.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub x: Vec<F17>,
    pub u: Vec<F17>,
    pub lambda: Option<Vec<F17>>,
    pub sigma: Option<Vec<F17>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexRecord {
    pub vertex_ids: Vec<usize>,
    pub stratum: Stratum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerRecord {
    pub x: Vec<F17>,
    pub kind: MarkerKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub problem: String,
    pub grid: String,
    pub iterations: usize,
}

/// Version 1 of the complex file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFileV1 {
    pub version: u32,
    pub ambient_dim: usize,
    pub objectives: usize,
    pub vertices: Vec<VertexRecord>,
    pub simplices: Vec<SimplexRecord>,
    pub markers: Vec<MarkerRecord>,
    pub provenance: Provenance,
}

impl ComplexFileV1 {
    pub fn from_complex(c: &ParetoComplex, provenance: Provenance) -> Self {
        ComplexFileV1 {
            version: FORMAT_VERSION,
            ambient_dim: c.ambient_dim,
            objectives: c.objectives,
            vertices: c
                .vertices
                .iter()
                .enumerate()
                .map(|(id, v)| VertexRecord {
                    id,
                    x: f17s(&v.x),
                    u: f17s(&v.u),
                    lambda: v.lambda.as_deref().map(f17s),
                    sigma: v.sigma.as_deref().map(f17s),
                })
                .collect(),
            simplices: c
                .simplices
                .iter()
                .map(|s| SimplexRecord { vertex_ids: s.vertices.clone(), stratum: s.stratum })
                .collect(),
            markers: c.markers.iter().map(|m| MarkerRecord { x: f17s(&m.x), kind: m.kind }).collect(),
            provenance,
        }
    }

    pub fn to_json(&self) -> Result<String, FormatError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, FormatError> {
        let file: ComplexFileV1 = serde_json::from_str(s)?;
        if file.version != FORMAT_VERSION {
            return Err(FormatError::Version(file.version));
        }
        Ok(file)
    }

    /// A complex carrying the file's geometry and labels (no source-cell data).
    pub fn to_complex(&self) -> ParetoComplex {
        use crate::continuation::{ComplexSimplex, ComplexVertex, Diagnostics, Marker, VertexKey};
        let vertices: Vec<ComplexVertex> = self
            .vertices
            .iter()
            .map(|v| ComplexVertex {
                key: VertexKey::Support(vec![v.id]),
                x: floats(&v.x),
                u: floats(&v.u),
                lambda: v.lambda.as_deref().map(floats),
                sigma: v.sigma.as_deref().map(floats),
                source_cell: 0,
            })
            .collect();
        let markers = self
            .markers
            .iter()
            .map(|m| {
                let x = floats(&m.x);
                let vertex = vertices.iter().position(|v| v.x == x);
                Marker { x, kind: m.kind, vertex }
            })
            .collect();
        ParetoComplex {
            ambient_dim: self.ambient_dim,
            objectives: self.objectives,
            simplices: self
                .simplices
                .iter()
                .map(|s| ComplexSimplex { vertices: s.vertex_ids.clone(), stratum: s.stratum, source_cell: 0 })
                .collect(),
            vertices,
            markers,
            diagnostics: Diagnostics::default(),
        }
    }
}

/// Which coordinates plot files carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotSpace {
    Input,
    Output,
    Both,
}

/// One CSV table per requested stratum; strata without simplices give an
/// empty table.
///
/// Rows follow the polylines of each stratum (closed ones repeat their first
/// vertex) for curves, or list the vertices of each component otherwise.
pub fn plot_tables(c: &ParetoComplex, space: PlotSpace, stable_only: bool) -> Vec<(Stratum, String)> {
    let strata: &[Stratum] = if stable_only { &[Stratum::CriticalStable] } else { &Stratum::ALL };
    let mut out = Vec::new();
    for &stratum in strata {
        if c.count_stratum(stratum) == 0 {
            out.push((stratum, String::new()));
            continue;
        }
        let mut header = vec!["component_id".to_string(), "vertex_index".to_string()];
        if space != PlotSpace::Output {
            header.extend((1..=c.ambient_dim).map(|i| format!("x{i}")));
        }
        if space != PlotSpace::Input {
            header.extend((1..=c.objectives).map(|j| format!("u{j}")));
        }
        header.push("stratum".into());
        let mut csv = header.join(",");
        csv.push('\n');
        let mut row = |comp: usize, idx: usize, v: usize| {
            let vx = &c.vertices[v];
            let mut cells = vec![comp.to_string(), idx.to_string()];
            if space != PlotSpace::Output {
                cells.extend(vx.x.iter().map(|x| format!("{x:.16e}")));
            }
            if space != PlotSpace::Input {
                cells.extend(vx.u.iter().map(|u| format!("{u:.16e}")));
            }
            cells.push(stratum.as_str().into());
            let _ = writeln!(csv, "{}", cells.join(","));
        };
        if c.simplex_dim() == Some(1) {
            for (comp, line) in c.polylines(&[stratum]).iter().enumerate() {
                let mut ids = line.vertices.clone();
                if line.closed {
                    ids.push(ids[0]);
                }
                for (i, &v) in ids.iter().enumerate() {
                    row(comp, i, v);
                }
            }
        } else {
            for (comp, group) in c.components(&[stratum]).iter().enumerate() {
                let mut vs: Vec<usize> = group.iter().flat_map(|&s| c.simplices[s].vertices.iter().copied()).collect();
                vs.sort_unstable();
                vs.dedup();
                for (i, &v) in vs.iter().enumerate() {
                    row(comp, i, v);
                }
            }
        }
        out.push((stratum, csv));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f17_round_trip_and_nulls() {
        let s = serde_json::to_string(&vec![F17(0.1), F17(f64::NAN), F17(-3.0)]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,null,-3.0000000000000000e0]");
        let back: Vec<F17> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0].0, 0.1);
        assert!(back[1].0.is_nan());
        assert_eq!(back[2].0, -3.0);
    }

    #[test]
    fn complex_file_round_trips_exactly() {
        let p = crate::problems::registry_get("smale").unwrap().unconstrained().unwrap();
        let tess = crate::tessellation::Tessellation::build_delaunay(crate::tessellation::structured_grid(
            p.domain(),
            &[12, 12],
        ))
        .unwrap();
        let (c, _) = crate::continuation::analyze(p.as_ref(), &tess, &Default::default()).unwrap();
        let file = ComplexFileV1::from_complex(&c, Provenance { problem: "smale".into(), grid: "12x12".into(), iterations: 1 });
        let json = file.to_json().unwrap();
        let back = ComplexFileV1::from_json(&json).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_json().unwrap(), json);
        let rebuilt = back.to_complex();
        assert_eq!(rebuilt.simplices.len(), c.simplices.len());
        assert!(rebuilt.vertices.iter().zip(&c.vertices).all(|(a, b)| a.x == b.x && a.u == b.u));
    }

    #[test]
    fn plot_tables_follow_polylines() {
        let p = crate::problems::registry_get("triv").unwrap().unconstrained().unwrap();
        let tess = crate::tessellation::Tessellation::build_delaunay(crate::tessellation::structured_grid(
            p.domain(),
            &[15, 14],
        ))
        .unwrap();
        let (c, _) = crate::continuation::analyze(p.as_ref(), &tess, &Default::default()).unwrap();
        let tables = plot_tables(&c, PlotSpace::Output, true);
        assert_eq!(tables.len(), 1);
        let (stratum, csv) = &tables[0];
        assert_eq!(*stratum, Stratum::CriticalStable);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("component_id,vertex_index,u1,u2,stratum"));
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert!(rows.len() >= 2);
        assert!(rows.iter().all(|r| r.len() == 5 && r[4] == "critical_stable"));
        let empty = ParetoComplex { simplices: vec![], vertices: vec![], markers: vec![], ..c };
        assert!(plot_tables(&empty, PlotSpace::Both, false).iter().all(|(_, t)| t.is_empty()));
    }

    #[test]
    fn rejects_other_versions() {
        let json = r#"{"version":2,"ambient_dim":2,"objectives":2,"vertices":[],"simplices":[],"markers":[],"provenance":{"problem":"x","grid":"","iterations":0}}"#;
        assert!(matches!(ComplexFileV1::from_json(json), Err(FormatError::Version(2))));
    }
}
