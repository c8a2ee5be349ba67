//! Finite samples of `E` with nonnegative values, neighbor queries and the
//! radius schedule used to discretize the refinement quantifiers.

mod kdtree;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kdtree::KdTree;
#[cfg(test)]
pub(crate) use kdtree::point_box_distance;

/// Default merge tolerance for duplicate points, in input length units.
pub const DEFAULT_MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("negative value at row {row}")]
    NegativeValue { row: usize },
    #[error("non-finite entry at row {row}")]
    NonFinite { row: usize },
    #[error("conflicting duplicate: row {row} repeats the point of row {first} with a different value")]
    ConflictingDuplicate { row: usize, first: usize },
    #[error("row {row} has {got} coordinates, expected {expected}")]
    Dimension { row: usize, expected: usize, got: usize },
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("cannot infer dimension: {0}")]
    NoDimension(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Point cloud `E` with values `f ≥ 0` and a kd-tree index.
#[derive(Clone, Debug)]
pub struct SampleSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    tree: KdTree,
    diameter: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonSamples {
    n: usize,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl SampleSet {
    /// Validates rows and merges points closer than `merge_tol`.
    pub fn new(dim: usize, points: Vec<Vec<f64>>, values: Vec<f64>, merge_tol: f64) -> Result<Self, SampleError> {
        if dim == 0 {
            return Err(SampleError::NoDimension("dimension must be at least 1".into()));
        }
        if points.len() != values.len() {
            return Err(SampleError::Parse {
                row: points.len().min(values.len()),
                message: format!("{} points but {} values", points.len(), values.len()),
            });
        }
        for (row, (p, &v)) in points.iter().zip(&values).enumerate() {
            if p.len() != dim {
                return Err(SampleError::Dimension { row, expected: dim, got: p.len() });
            }
            if !v.is_finite() || p.iter().any(|x| !x.is_finite()) {
                return Err(SampleError::NonFinite { row });
            }
            if v < 0.0 {
                return Err(SampleError::NegativeValue { row });
            }
        }
        let raw = KdTree::build(dim, &points);
        let mut keep = vec![true; points.len()];
        for row in 0..points.len() {
            if !keep[row] {
                continue;
            }
            for other in raw.within(&points[row], merge_tol, true) {
                if other <= row || !keep[other] {
                    continue;
                }
                if values[other] != values[row] {
                    return Err(SampleError::ConflictingDuplicate { row: other, first: row });
                }
                keep[other] = false;
            }
        }
        let (points, values): (Vec<_>, Vec<_>) =
            points.into_iter().zip(values).zip(&keep).filter(|(_, &k)| k).map(|(pv, _)| pv).unzip();
        let tree = KdTree::build(dim, &points);
        let mut diameter = 0.0f64;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                diameter = diameter.max(crate::jet::distance(&points[i], &points[j]));
            }
        }
        Ok(Self { dim, points, values, tree, diameter })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Largest value, or 1 when every value is zero.
    pub fn value_scale(&self) -> f64 {
        let m = self.values.iter().cloned().fold(0.0, f64::max);
        if m > 0.0 {
            m
        } else {
            1.0
        }
    }

    /// Diameter, or 1 for fewer than two points.
    pub fn length_scale(&self) -> f64 {
        if self.diameter > 0.0 {
            self.diameter
        } else {
            1.0
        }
    }

    /// Samples in the open ball `B(center, radius)`, excluding `center` itself.
    pub fn neighbors(&self, center: &[f64], radius: f64) -> Vec<usize> {
        let mut out = self.tree.within(center, radius, false);
        out.retain(|&i| self.points[i].as_slice() != center);
        out
    }

    /// Nearest sample to `y`, ties to the lowest index.
    pub fn nearest(&self, y: &[f64]) -> Option<(usize, f64)> {
        self.tree.nearest(y, None)
    }

    /// Distance from sample `i` to the nearest other sample.
    pub fn nearest_other(&self, i: usize) -> Option<(usize, f64)> {
        self.tree.nearest(&self.points[i], Some(i))
    }

    /// Nearest sample to the closed box `[lo, hi]`.
    pub fn nearest_to_box(&self, lo: &[f64], hi: &[f64]) -> Option<(usize, f64)> {
        self.tree.nearest_to_box(lo, hi)
    }

    /// Samples within closed distance `radius` of `y` (the center included).
    pub fn within_closed(&self, y: &[f64], radius: f64) -> Vec<usize> {
        self.tree.within(y, radius, true)
    }

    /// Axis-aligned bounding box of the points, `None` when empty.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.points.is_empty() {
            return None;
        }
        let mut lo = self.points[0].clone();
        let mut hi = self.points[0].clone();
        for p in &self.points {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some((lo, hi))
    }

    pub fn parse_csv(text: &str, merge_tol: f64) -> Result<Self, SampleError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut dim: Option<usize> = None;
        let mut points = Vec::new();
        let mut values = Vec::new();
        let mut row = 0usize;
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| SampleError::Parse { row, message: e.to_string() })?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let parsed: Result<Vec<f64>, _> = record.iter().map(|f| f.parse::<f64>()).collect();
            let fields = match parsed {
                Ok(v) => v,
                Err(e) if line == 0 => {
                    if record.len() < 2 {
                        return Err(SampleError::NoDimension("header needs at least two columns".into()));
                    }
                    let _ = e;
                    dim = Some(record.len() - 1);
                    continue;
                }
                Err(e) => return Err(SampleError::Parse { row, message: e.to_string() }),
            };
            if fields.len() < 2 {
                return Err(SampleError::Parse { row, message: "need at least one coordinate and a value".into() });
            }
            let n = *dim.get_or_insert(fields.len() - 1);
            if fields.len() != n + 1 {
                return Err(SampleError::Dimension { row, expected: n, got: fields.len() - 1 });
            }
            values.push(fields[n]);
            points.push(fields[..n].to_vec());
            row += 1;
        }
        let dim = dim.ok_or_else(|| SampleError::NoDimension("empty CSV without header".into()))?;
        Self::new(dim, points, values, merge_tol)
    }

    pub fn parse_json(text: &str, merge_tol: f64) -> Result<Self, SampleError> {
        let raw: JsonSamples =
            serde_json::from_str(text).map_err(|e| SampleError::Parse { row: e.line(), message: e.to_string() })?;
        Self::new(raw.n, raw.points, raw.values, merge_tol)
    }

    /// Loads CSV, or JSON when the extension is `.json`.
    pub fn load(path: &Path, merge_tol: f64) -> Result<Self, SampleError> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::parse_json(&text, merge_tol)
        } else {
            Self::parse_csv(&text, merge_tol)
        }
    }

    /// Canonical CSV with a header row and shortest round-trip floats.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.dim).map(|k| format!("x{k}")).chain(["f".to_string()]).collect();
        writeln!(w, "{}", header.join(","))?;
        for (p, v) in self.points.iter().zip(&self.values) {
            let row: Vec<String> = p.iter().chain(std::iter::once(v)).map(|x| format!("{x:?}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Geometric radii `δ_k = delta_max · ratio^k`, `k = 0..levels`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub delta_max: f64,
    pub ratio: f64,
    pub levels: usize,
}

impl ScaleSchedule {
    pub fn new(delta_max: f64, ratio: f64, levels: usize) -> Result<Self, String> {
        if !(delta_max > 0.0 && delta_max.is_finite()) {
            return Err(format!("delta_max must be positive, got {delta_max}"));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(format!("ratio must lie in (0,1), got {ratio}"));
        }
        if levels < 3 {
            return Err(format!("levels must be at least 3, got {levels}"));
        }
        Ok(Self { delta_max, ratio, levels })
    }

    pub fn radius(&self, k: usize) -> f64 {
        self.delta_max * self.ratio.powi(k as i32)
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.levels).map(|k| self.radius(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(xs: &[f64], fs: &[f64]) -> SampleSet {
        SampleSet::new(1, xs.iter().map(|&x| vec![x]).collect(), fs.to_vec(), DEFAULT_MERGE_TOL).unwrap()
    }

    #[test]
    fn load_examples() {
        let s = SampleSet::parse_csv("0,0.0\n0.5,0.25\n1,1.0\n", DEFAULT_MERGE_TOL).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.dim(), 1);

        let err = SampleSet::parse_csv("x,f\n0,1\n1,-0.1\n", DEFAULT_MERGE_TOL).unwrap_err();
        assert!(matches!(err, SampleError::NegativeValue { row: 1 }));
        assert_eq!(err.to_string(), "negative value at row 1");

        let err = SampleSet::parse_csv("0,1.0\n1e-15,2.0\n", DEFAULT_MERGE_TOL).unwrap_err();
        assert!(matches!(err, SampleError::ConflictingDuplicate { row: 1, first: 0 }));
        assert!(err.to_string().contains("conflicting duplicate"));

        assert!(matches!(
            SampleSet::parse_csv("0,nan\n", DEFAULT_MERGE_TOL),
            Err(SampleError::NonFinite { row: 0 })
        ));
        assert!(matches!(
            SampleSet::parse_csv("0,inf\n", DEFAULT_MERGE_TOL),
            Err(SampleError::NonFinite { row: 0 })
        ));
    }

    #[test]
    fn equal_duplicates_merge() {
        let s = SampleSet::parse_csv("0,1\n1e-15,1\n1,2\n", DEFAULT_MERGE_TOL).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.point(1), &[1.0]);
    }

    #[test]
    fn json_and_header() {
        let s = SampleSet::parse_json(r#"{"n":2,"points":[[0,0],[1,1]],"values":[1,2]}"#, 0.0).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.value(1), 2.0);
        let empty = SampleSet::parse_csv("x,y,f\n", 0.0).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.dim(), 2);
        let empty = SampleSet::parse_json(r#"{"n":3,"points":[],"values":[]}"#, 0.0).unwrap();
        assert_eq!(empty.dim(), 3);
        assert!(matches!(
            SampleSet::parse_csv("0,0,1\n1,2\n", 0.0),
            Err(SampleError::Dimension { row: 1, .. })
        ));
    }

    #[test]
    fn neighbor_examples() {
        let s = line(&[0.0, 0.5, 1.0], &[1.0, 1.0, 1.0]);
        assert_eq!(s.neighbors(&[0.0], 0.6), vec![1]);
        assert!(s.neighbors(&[0.0], 0.4).is_empty());
        assert_eq!(s.neighbors(&[5.0], 7.0), vec![0, 1, 2]);
        assert_eq!(s.diameter(), 1.0);
    }

    #[test]
    fn schedule_validation() {
        let sch = ScaleSchedule::new(1.0, 0.5, 12).unwrap();
        let r = sch.radii();
        assert!(r.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(r[3], 0.125);
        assert!(ScaleSchedule::new(1.0, 1.0, 12).is_err());
        assert!(ScaleSchedule::new(1.0, 0.5, 2).is_err());
        assert!(ScaleSchedule::new(0.0, 0.5, 5).is_err());
    }

    proptest! {
        #[test]
        fn neighbors_match_brute_force(
            pts in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 1..200),
            c in prop::collection::vec(-1.2..1.2f64, 2),
            r in 0.01..1.5f64,
        ) {
            let vals = vec![1.0; pts.len()];
            let s = SampleSet::new(2, pts, vals, 0.0).unwrap();
            let brute: Vec<usize> = (0..s.len())
                .filter(|&i| {
                    let d = crate::jet::distance(s.point(i), &c);
                    d < r && d > 0.0
                })
                .collect();
            prop_assert_eq!(s.neighbors(&c, r), brute);
        }

        #[test]
        fn csv_round_trip(
            pts in prop::collection::vec(prop::collection::vec(-1e3..1e3f64, 3), 1..40),
            vals in prop::collection::vec(0.0..1e3f64, 40),
        ) {
            let vals = vals[..pts.len()].to_vec();
            let s = SampleSet::new(3, pts, vals, 0.0).unwrap();
            let text = s.to_csv_string();
            let back = SampleSet::parse_csv(&text, 0.0).unwrap();
            prop_assert_eq!(back.points(), s.points());
            prop_assert_eq!(back.values(), s.values());
            prop_assert_eq!(back.to_csv_string(), text);
        }
    }
}
