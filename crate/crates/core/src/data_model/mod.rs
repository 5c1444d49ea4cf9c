//! Feature geometry with numeric attributes, uncertainty statistics and binning.

mod binning;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use geojson::{Feature as GeoFeature, FeatureCollection, GeoJson, GeometryValue, JsonObject};
use serde::{Deserialize, Serialize};

use crate::knowledge_base::Implantation;

pub use binning::{
    bin_quantile, bin_threshold, normalize_continuous, quantile_cuts, validate_binning,
    BinnedAttribute, BinningScheme, BinningViolation, Classes,
};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("geometry document could not be parsed: {0}")]
    GeometryParse(String),
    #[error("attribute table could not be parsed: {0}")]
    AttributeParse(String),
    #[error("join column `{0}` is not present")]
    JoinColumnMissing(String),
    #[error("no attribute row for feature ids: {}", .0.join(", "))]
    JoinKeyMissing(Vec<String>),
    #[error("dataset mixes polygon and point geometries")]
    MixedGeometryKinds,
    #[error("unsupported geometry type {0}")]
    UnsupportedGeometry(String),
    #[error("duplicate feature id `{0}`")]
    DuplicateId(String),
    #[error("feature {index} has no id")]
    MissingId { index: usize },
    #[error("feature `{id}` has no value for attribute `{attribute}`")]
    MissingValue { id: String, attribute: String },
    #[error("feature `{id}` has a different attribute set than the first feature")]
    InconsistentAttributes { id: String },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("dataset has no features")]
    Empty,
    #[error("mean is zero, coefficient of variation is undefined")]
    ZeroMean,
    #[error("standard deviation must be non-negative")]
    NegativeSd,
    #[error("threshold edges must be strictly increasing")]
    NonMonotonicEdges,
    #[error("quantile count must be at least 2, got {0}")]
    BadK(usize),
    #[error("no values to classify")]
    EmptyValues,
    #[error("values must be finite")]
    NonFinite,
}

pub type Ring = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    Polygon(Vec<Ring>),
    MultiPolygon(Vec<Vec<Ring>>),
    Point([f64; 2]),
}

impl Geometry {
    pub fn implantation(&self) -> Implantation {
        match self {
            Geometry::Polygon(_) | Geometry::MultiPolygon(_) => Implantation::Area,
            Geometry::Point(_) => Implantation::Point,
        }
    }

    /// All polygons making up an areal geometry (empty for points).
    pub fn polygons(&self) -> Vec<&[Ring]> {
        match self {
            Geometry::Polygon(rings) => vec![rings.as_slice()],
            Geometry::MultiPolygon(polys) => polys.iter().map(Vec::as_slice).collect(),
            Geometry::Point(_) => Vec::new(),
        }
    }

    pub fn positions(&self) -> Box<dyn Iterator<Item = [f64; 2]> + '_> {
        match self {
            Geometry::Polygon(rings) => Box::new(rings.iter().flatten().copied()),
            Geometry::MultiPolygon(polys) => Box::new(polys.iter().flatten().flatten().copied()),
            Geometry::Point(p) => Box::new(std::iter::once(*p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub id: String,
    pub geometry: Geometry,
    pub attributes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Feature>,
    pub implantation: Implantation,
}

/// Comma-separated attribute table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl AttributeTable {
    pub fn from_csv(text: &str) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let columns = reader
            .headers()
            .map_err(|e| DataError::AttributeParse(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = reader
            .records()
            .map(|r| {
                r.map(|rec| rec.iter().map(str::to_string).collect())
                    .map_err(|e| DataError::AttributeParse(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { columns, rows })
    }
}

pub fn coefficient_of_variation(mean: f64, sd: f64) -> Result<f64, DataError> {
    if sd < 0.0 {
        return Err(DataError::NegativeSd);
    }
    if mean == 0.0 {
        return Err(DataError::ZeroMean);
    }
    Ok(sd / mean)
}

fn json_id(value: &serde_json::Value) -> Option<String> {
    match value {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn ring(positions: &[geojson::Position]) -> Ring {
    positions.iter().map(|p| [p[0], p[1]]).collect()
}

fn convert_geometry(value: &GeometryValue) -> Result<Geometry, DataError> {
    match value {
        GeometryValue::Polygon { coordinates } => Ok(Geometry::Polygon(
            coordinates.iter().map(|r| ring(r)).collect(),
        )),
        GeometryValue::MultiPolygon { coordinates } => Ok(Geometry::MultiPolygon(
            coordinates
                .iter()
                .map(|poly| poly.iter().map(|r| ring(r)).collect())
                .collect(),
        )),
        GeometryValue::Point { coordinates } => {
            Ok(Geometry::Point([coordinates[0], coordinates[1]]))
        }
        other => Err(DataError::UnsupportedGeometry(
            other.type_name().to_string(),
        )),
    }
}

/// Parses a GeoJSON feature collection and optionally joins a CSV attribute table.
///
/// Feature ids come from the `join_key` property when given (falling back to the
/// GeoJSON `id` member), otherwise from the `id` member or an `id` property.
pub fn load_dataset(
    geometry_doc: &str,
    attribute_table: Option<&AttributeTable>,
    join_key: Option<&str>,
) -> Result<Dataset, DataError> {
    let collection = match geometry_doc
        .parse::<GeoJson>()
        .map_err(|e| DataError::GeometryParse(e.to_string()))?
    {
        GeoJson::FeatureCollection(fc) => fc,
        GeoJson::Feature(f) => FeatureCollection {
            bbox: None,
            features: vec![f],
            foreign_members: None,
        },
        GeoJson::Geometry(_) => {
            return Err(DataError::GeometryParse(
                "expected a FeatureCollection".to_string(),
            ))
        }
    };

    let key = join_key.unwrap_or("id");
    let mut features = Vec::with_capacity(collection.features.len());
    let mut seen = BTreeSet::new();
    for (index, f) in collection.features.iter().enumerate() {
        let props = f.properties.clone().unwrap_or_default();
        let id = props
            .get(key)
            .and_then(json_id)
            .or_else(|| {
                f.id.as_ref().map(|id| match id {
                    geojson::feature::Id::String(s) => s.clone(),
                    geojson::feature::Id::Number(n) => n.to_string(),
                })
            })
            .ok_or(DataError::MissingId { index })?;
        if !seen.insert(id.clone()) {
            return Err(DataError::DuplicateId(id));
        }
        let geometry = f
            .geometry
            .as_ref()
            .ok_or_else(|| DataError::GeometryParse(format!("feature `{id}` has no geometry")))?;
        let geometry = convert_geometry(&geometry.value)?;

        let mut attributes = BTreeMap::new();
        for (name, value) in &props {
            if name == key || name == "id" {
                continue;
            }
            match value {
                serde_json::Value::Number(n) => {
                    attributes.insert(name.clone(), n.as_f64().unwrap_or(f64::NAN));
                }
                serde_json::Value::Null => {
                    return Err(DataError::MissingValue {
                        id,
                        attribute: name.clone(),
                    })
                }
                _ => {}
            }
        }
        features.push(Feature {
            id,
            geometry,
            attributes,
        });
    }

    if let Some(table) = attribute_table {
        join_attributes(&mut features, table, key)?;
    }

    Dataset::new(features)
}

fn join_attributes(
    features: &mut [Feature],
    table: &AttributeTable,
    key: &str,
) -> Result<(), DataError> {
    let key_col = table
        .columns
        .iter()
        .position(|c| c == key)
        .ok_or_else(|| DataError::JoinColumnMissing(key.to_string()))?;
    let by_key: HashMap<&str, &Vec<String>> = table
        .rows
        .iter()
        .filter_map(|r| r.get(key_col).map(|k| (k.as_str(), r)))
        .collect();

    let missing: Vec<String> = features
        .iter()
        .filter(|f| !by_key.contains_key(f.id.as_str()))
        .map(|f| f.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(DataError::JoinKeyMissing(missing));
    }

    for feature in features.iter_mut() {
        let row = by_key[feature.id.as_str()];
        for (col, name) in table.columns.iter().enumerate() {
            if col == key_col {
                continue;
            }
            let raw = row.get(col).map(String::as_str).unwrap_or("");
            if raw.is_empty() {
                return Err(DataError::MissingValue {
                    id: feature.id.clone(),
                    attribute: name.clone(),
                });
            }
            let value: f64 = raw.parse().map_err(|_| {
                DataError::AttributeParse(format!(
                    "feature `{}` column `{name}`: `{raw}` is not a number",
                    feature.id
                ))
            })?;
            feature.attributes.insert(name.clone(), value);
        }
    }
    Ok(())
}

impl Dataset {
    /// Validates id uniqueness, attribute-set consistency and geometry kind.
    pub fn new(features: Vec<Feature>) -> Result<Self, DataError> {
        let first = features.first().ok_or(DataError::Empty)?;
        let implantation = first.geometry.implantation();
        let names: Vec<&String> = first.attributes.keys().collect();
        let mut seen = BTreeSet::new();
        for f in &features {
            if !seen.insert(f.id.as_str()) {
                return Err(DataError::DuplicateId(f.id.clone()));
            }
            if f.geometry.implantation() != implantation {
                return Err(DataError::MixedGeometryKinds);
            }
            if f.attributes.keys().collect::<Vec<_>>() != names {
                return Err(DataError::InconsistentAttributes { id: f.id.clone() });
            }
        }
        Ok(Self {
            features,
            implantation,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn attribute_names(&self) -> Vec<&str> {
        self.features[0]
            .attributes
            .keys()
            .map(String::as_str)
            .collect()
    }

    pub fn values(&self, attribute: &str) -> Result<Vec<f64>, DataError> {
        self.features
            .iter()
            .map(|f| {
                f.attributes
                    .get(attribute)
                    .copied()
                    .ok_or_else(|| DataError::UnknownAttribute(attribute.to_string()))
            })
            .collect()
    }

    /// Adds `name = sd / mean` computed per feature.
    pub fn with_coefficient_of_variation(
        mut self,
        name: &str,
        mean_attribute: &str,
        sd_attribute: &str,
    ) -> Result<Self, DataError> {
        let means = self.values(mean_attribute)?;
        let sds = self.values(sd_attribute)?;
        for ((f, mean), sd) in self.features.iter_mut().zip(means).zip(sds) {
            let cv = coefficient_of_variation(mean, sd)?;
            f.attributes.insert(name.to_string(), cv);
        }
        Ok(self)
    }

    pub fn classify(
        &self,
        attribute: &str,
        scheme: &BinningScheme,
    ) -> Result<BinnedAttribute, DataError> {
        BinnedAttribute::classify(attribute, &self.values(attribute)?, scheme)
    }

    /// Bounding box `[min_x, min_y, max_x, max_y]` over all coordinates.
    pub fn bbox(&self) -> [f64; 4] {
        let mut b = [
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        ];
        for p in self.features.iter().flat_map(|f| f.geometry.positions()) {
            b[0] = b[0].min(p[0]);
            b[1] = b[1].min(p[1]);
            b[2] = b[2].max(p[0]);
            b[3] = b[3].max(p[1]);
        }
        b
    }

    pub fn to_geojson(&self) -> String {
        let features = self
            .features
            .iter()
            .map(|f| {
                let value = match &f.geometry {
                    Geometry::Polygon(rings) => GeometryValue::Polygon {
                        coordinates: rings
                            .iter()
                            .map(|r| r.iter().map(|p| geojson::Position::from(*p)).collect())
                            .collect(),
                    },
                    Geometry::MultiPolygon(polys) => GeometryValue::MultiPolygon {
                        coordinates: polys
                            .iter()
                            .map(|poly| {
                                poly.iter()
                                    .map(|r| {
                                        r.iter().map(|p| geojson::Position::from(*p)).collect()
                                    })
                                    .collect()
                            })
                            .collect(),
                    },
                    Geometry::Point(p) => GeometryValue::Point {
                        coordinates: geojson::Position::from(*p),
                    },
                };
                let mut props = JsonObject::new();
                props.insert("id".to_string(), f.id.clone().into());
                for (k, v) in &f.attributes {
                    props.insert(k.clone(), serde_json::json!(v));
                }
                GeoFeature {
                    bbox: None,
                    geometry: Some(geojson::Geometry::new(value)),
                    id: Some(geojson::feature::Id::String(f.id.clone())),
                    properties: Some(props),
                    foreign_members: None,
                }
            })
            .collect();
        GeoJson::FeatureCollection(FeatureCollection {
            bbox: None,
            features,
            foreign_members: None,
        })
        .to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(id: &str, x: f64) -> String {
        format!(
            r#"{{"type":"Feature","properties":{{"id":"{id}","tss":{v}}},"geometry":{{"type":"Polygon","coordinates":[[[{x},0],[{x1},0],[{x1},1],[{x},1],[{x},0]]]}}}}"#,
            v = x * 10.0 + 1.0,
            x1 = x + 1.0
        )
    }

    fn collection(features: &[String]) -> String {
        format!(
            r#"{{"type":"FeatureCollection","features":[{}]}}"#,
            features.join(",")
        )
    }

    fn ten_squares() -> String {
        collection(
            &(0..10)
                .map(|i| square(&format!("f{i}"), f64::from(i)))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn cv_examples() {
        assert_eq!(coefficient_of_variation(200.0, 50.0).unwrap(), 0.25);
        assert_eq!(coefficient_of_variation(100.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            coefficient_of_variation(0.0, 5.0),
            Err(DataError::ZeroMean)
        ));
    }

    #[test]
    fn loads_and_joins_ten_polygons() {
        let mut csv = String::from("id,sd\n");
        for i in 0..10 {
            csv.push_str(&format!("f{i},{}\n", i + 1));
        }
        let table = AttributeTable::from_csv(&csv).unwrap();
        let ds = load_dataset(&ten_squares(), Some(&table), Some("id")).unwrap();
        assert_eq!(ds.len(), 10);
        assert_eq!(ds.implantation, Implantation::Area);
        assert_eq!(ds.features[3].id, "f3");
        assert_eq!(ds.features[3].attributes["sd"], 4.0);
        assert_eq!(ds.features[3].attributes["tss"], 31.0);
        assert_eq!(ds.attribute_names(), vec!["sd", "tss"]);
    }

    #[test]
    fn join_reports_exactly_the_missing_ids() {
        let mut csv = String::from("id,sd\n");
        for i in [0, 1, 2, 4, 5, 6, 8, 9] {
            csv.push_str(&format!("f{i},1\n"));
        }
        let table = AttributeTable::from_csv(&csv).unwrap();
        match load_dataset(&ten_squares(), Some(&table), Some("id")) {
            Err(DataError::JoinKeyMissing(ids)) => assert_eq!(ids, vec!["f3", "f7"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn join_column_must_exist() {
        let table = AttributeTable::from_csv("code,sd\nf0,1\n").unwrap();
        assert!(matches!(
            load_dataset(&ten_squares(), Some(&table), Some("id")),
            Err(DataError::JoinColumnMissing(_))
        ));
    }

    #[test]
    fn mixed_geometry_is_rejected() {
        let point = r#"{"type":"Feature","properties":{"id":"p","tss":1},"geometry":{"type":"Point","coordinates":[0.5,0.5]}}"#;
        let doc = collection(&[square("a", 0.0), point.to_string()]);
        assert!(matches!(
            load_dataset(&doc, None, None),
            Err(DataError::MixedGeometryKinds)
        ));
    }

    #[test]
    fn missing_values_are_an_error() {
        let doc = collection(&[
            square("a", 0.0),
            r#"{"type":"Feature","properties":{"id":"b","tss":null},"geometry":{"type":"Point","coordinates":[0,0]}}"#.to_string(),
        ]);
        assert!(matches!(
            load_dataset(&doc, None, None),
            Err(DataError::MissingValue { .. })
        ));
        let table = AttributeTable::from_csv("id,sd\nf0,\n").unwrap();
        let doc = collection(&[square("f0", 0.0)]);
        assert!(matches!(
            load_dataset(&doc, Some(&table), None),
            Err(DataError::MissingValue { .. })
        ));
    }

    #[test]
    fn inconsistent_attributes_and_duplicates() {
        let other = r#"{"type":"Feature","properties":{"id":"b","other":1},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}"#;
        let doc = collection(&[square("a", 0.0), other.to_string()]);
        assert!(matches!(
            load_dataset(&doc, None, None),
            Err(DataError::InconsistentAttributes { .. })
        ));
        let doc = collection(&[square("a", 0.0), square("a", 1.0)]);
        assert!(matches!(
            load_dataset(&doc, None, None),
            Err(DataError::DuplicateId(_))
        ));
        assert!(matches!(
            load_dataset("{not json", None, None),
            Err(DataError::GeometryParse(_))
        ));
    }

    #[test]
    fn numeric_geojson_ids() {
        let doc = r#"{"type":"FeatureCollection","features":[{"type":"Feature","id":17,"properties":{"v":2.5},"geometry":{"type":"Point","coordinates":[1,2]}}]}"#;
        let ds = load_dataset(doc, None, None).unwrap();
        assert_eq!(ds.features[0].id, "17");
        assert_eq!(ds.implantation, Implantation::Point);
    }

    #[test]
    fn cv_attribute() {
        let doc = collection(&[square("a", 0.0), square("b", 1.0)]);
        let ds = load_dataset(&doc, None, None)
            .unwrap()
            .with_coefficient_of_variation("cv", "tss", "tss")
            .unwrap();
        assert_eq!(ds.values("cv").unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn geojson_round_trip_is_lossless() {
        let doc = collection(&[
            r#"{"type":"Feature","properties":{"id":"x","a":0.1234567890123456,"b":-3e-7},"geometry":{"type":"MultiPolygon","coordinates":[[[[0,0],[1,0],[1,1],[0,0]]],[[[2,2],[3,2],[3,3],[2,2]]]]}}"#.to_string(),
            r#"{"type":"Feature","properties":{"id":"y","a":12345.678901234567,"b":1}, "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}"#.to_string(),
        ]);
        let ds = load_dataset(&doc, None, None).unwrap();
        let again = load_dataset(&ds.to_geojson(), None, None).unwrap();
        assert_eq!(ds, again);
    }
}
