//! JSON persistence of critical maps.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{validate_critical, Color, CriticalMap, Vertex};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexJson {
    pub id: usize,
    pub re: f64,
    pub im: f64,
    pub color: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    pub delta: f64,
    pub origin: usize,
    pub vertices: Vec<VertexJson>,
    pub faces: Vec<[usize; 4]>,
}

impl From<&CriticalMap> for MapJson {
    fn from(map: &CriticalMap) -> Self {
        let vertices = map
            .vertices()
            .iter()
            .enumerate()
            .map(|(id, v)| VertexJson {
                id,
                re: v.pos.re,
                im: v.pos.im,
                color: match v.color {
                    Color::Gamma => "G".into(),
                    Color::GammaStar => "G*".into(),
                },
            })
            .collect();
        MapJson {
            delta: map.delta(),
            origin: map.origin(),
            vertices,
            faces: map.faces().to_vec(),
        }
    }
}

impl MapJson {
    /// Converts to a map and validates it.
    pub fn into_map(self) -> Result<CriticalMap> {
        let mut slots: Vec<Option<Vertex>> = vec![None; self.vertices.len()];
        for v in self.vertices {
            let color = match v.color.as_str() {
                "G" => Color::Gamma,
                "G*" => Color::GammaStar,
                other => return Err(Error::Parse(format!("unknown colour {other:?}"))),
            };
            let slot = slots
                .get_mut(v.id)
                .ok_or_else(|| Error::Parse(format!("vertex id {} is not dense", v.id)))?;
            if slot.is_some() {
                return Err(Error::Parse(format!("duplicate vertex id {}", v.id)));
            }
            *slot = Some(Vertex {
                pos: Complex64::new(v.re, v.im),
                color,
            });
        }
        let vertices = slots.into_iter().map(|v| v.unwrap()).collect();
        let map = CriticalMap::from_parts(self.delta, self.origin, vertices, self.faces).map_err(
            |e| match e {
                Error::Parse(_) => e,
                other => Error::Parse(other.to_string()),
            },
        )?;
        let report = validate_critical(&map);
        if !report.is_valid() {
            return Err(Error::InvalidMap(report.violations));
        }
        Ok(map)
    }
}

pub fn to_json(map: &CriticalMap) -> String {
    serde_json::to_string_pretty(&MapJson::from(map)).expect("map serializes")
}

pub fn from_json(text: &str) -> Result<CriticalMap> {
    let raw: MapJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    raw.into_map()
}

pub fn save(map: &CriticalMap, path: &Path) -> Result<()> {
    fs::write(path, to_json(map) + "\n").map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

pub fn load(path: &Path) -> Result<CriticalMap> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::build_square;

    #[test]
    fn round_trip() {
        let map = build_square(2, 2, 1.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save(&map, &path).unwrap();
        assert_eq!(load(&path).unwrap(), map);
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let text = to_json(&build_square(2, 2, 1.0));
        let cut = &text[..text.len() / 2];
        assert!(matches!(from_json(cut), Err(Error::Parse(_))));
    }

    #[test]
    fn wrong_delta_is_invalid() {
        let mut raw = MapJson::from(&build_square(2, 2, 1.0));
        raw.delta = 0.9;
        let text = serde_json::to_string(&raw).unwrap();
        assert!(matches!(from_json(&text), Err(Error::InvalidMap(_))));
    }

    #[test]
    fn keys_are_exact() {
        let text = to_json(&build_square(1, 1, 1.0));
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let mut keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["delta", "faces", "origin", "vertices"]);
        let v0 = &value["vertices"][0];
        assert_eq!(v0["color"], "G");
        assert!(v0.get("re").is_some() && v0.get("im").is_some() && v0.get("id").is_some());
    }
}
