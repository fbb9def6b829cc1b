//! MOTChallenge text files and the in-memory track set.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::boxes::BoundingBox;
use crate::error::{FogError, Result};

/// Class id of pedestrians in MOT17 ground truth.
pub const PEDESTRIAN_CLASS: i32 = 1;

/// Identity used for detections that carry no track id.
pub const NO_ID: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRecord {
    pub frame: u32,
    pub id: i64,
    pub bbox: BoundingBox,
    pub confidence: f64,
    pub class: i32,
    pub visibility: f64,
}

impl TrackRecord {
    pub fn new(frame: u32, id: i64, bbox: BoundingBox) -> Self {
        Self {
            frame,
            id,
            bbox,
            confidence: 1.0,
            class: PEDESTRIAN_CLASS,
            visibility: 1.0,
        }
    }
}

/// Column layout of a MOTChallenge file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotSchema {
    /// `frame,id,left,top,width,height,conf,class,visibility`
    GroundTruth,
    /// `frame,id,left,top,width,height,conf,x,y,z`
    Results,
}

/// Frame-indexed collection of boxes with identities.
///
/// `(frame, id)` is unique among records with `id >= 0`; records with
/// [`NO_ID`] are anonymous detections.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSet {
    records: Vec<TrackRecord>,
    schema: MotSchema,
}

impl TrackSet {
    pub fn new(records: Vec<TrackRecord>, schema: MotSchema) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if r.frame < 1 {
                return Err(FogError::InvalidTrackSet(format!(
                    "frame numbers start at 1, got {}",
                    r.frame
                )));
            }
            if r.id >= 0 && !seen.insert((r.frame, r.id)) {
                return Err(FogError::InvalidTrackSet(format!(
                    "duplicate (frame={}, id={})",
                    r.frame, r.id
                )));
            }
        }
        Ok(Self { records, schema })
    }

    pub fn empty(schema: MotSchema) -> Self {
        Self {
            records: Vec::new(),
            schema,
        }
    }

    pub fn records(&self) -> &[TrackRecord] {
        &self.records
    }

    pub fn schema(&self) -> MotSchema {
        self.schema
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records grouped by frame, each group sorted by id then position.
    pub fn by_frame(&self) -> BTreeMap<u32, Vec<TrackRecord>> {
        let mut frames: BTreeMap<u32, Vec<TrackRecord>> = BTreeMap::new();
        for r in &self.records {
            frames.entry(r.frame).or_default().push(*r);
        }
        for group in frames.values_mut() {
            group.sort_by(|a, b| {
                a.id.cmp(&b.id)
                    .then(a.bbox.left.total_cmp(&b.bbox.left))
                    .then(a.bbox.top.total_cmp(&b.bbox.top))
            });
        }
        frames
    }

    /// Sorted distinct non-anonymous ids.
    pub fn ids(&self) -> Vec<i64> {
        let mut ids: Vec<i64> = self
            .records
            .iter()
            .map(|r| r.id)
            .filter(|&i| i >= 0)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Ground truth restricted to what MOT17 evaluates: active pedestrian
    /// boxes. Result files pass through unchanged.
    pub fn for_evaluation(&self) -> TrackSet {
        match self.schema {
            MotSchema::Results => self.clone(),
            MotSchema::GroundTruth => TrackSet {
                records: self
                    .records
                    .iter()
                    .filter(|r| r.confidence != 0.0 && r.class == PEDESTRIAN_CLASS)
                    .copied()
                    .collect(),
                schema: self.schema,
            },
        }
    }

    /// Replaces every id by `f(id)`.
    pub fn relabel(&self, f: impl Fn(i64) -> i64) -> Result<TrackSet> {
        let records = self
            .records
            .iter()
            .map(|r| TrackRecord { id: f(r.id), ..*r })
            .collect();
        TrackSet::new(records, self.schema)
    }

    pub fn to_mot_string(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let b = r.bbox;
            let _ = write!(
                out,
                "{},{},{},{},{},{},{}",
                r.frame, r.id, b.left, b.top, b.width, b.height, r.confidence
            );
            let _ = match self.schema {
                MotSchema::GroundTruth => writeln!(out, ",{},{}", r.class, r.visibility),
                MotSchema::Results => writeln!(out, ",-1,-1,-1"),
            };
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_mot_string()).map_err(|e| FogError::io(path, e))
    }
}

/// Loads a MOTChallenge file. Nine columns select the ground-truth schema;
/// anything from six to ten columns otherwise is read as tracker output.
pub fn load_mot_file(path: &Path) -> Result<TrackSet> {
    let text = fs::read_to_string(path).map_err(|e| FogError::io(path, e))?;
    parse_mot(path, &text)
}

pub fn parse_mot(path: &Path, text: &str) -> Result<TrackSet> {
    let mut records = Vec::new();
    let mut schema = None;
    let mut seen = HashSet::new();

    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: String| FogError::MalformedMotLine {
            path: path.to_path_buf(),
            line: line_no,
            reason,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(6..=10).contains(&fields.len()) {
            return Err(bad(format!(
                "expected 6 to 10 fields, found {}",
                fields.len()
            )));
        }
        let line_schema = if fields.len() == 9 {
            MotSchema::GroundTruth
        } else {
            MotSchema::Results
        };
        match schema {
            None => schema = Some(line_schema),
            Some(s) if s != line_schema => {
                return Err(bad("column count differs from earlier lines".into()))
            }
            _ => {}
        }

        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("field {} ({:?}) is not a number", i + 1, fields[i])))
        };
        let frame = fields[0]
            .parse::<f64>()
            .ok()
            .filter(|f| f.fract() == 0.0 && *f >= 1.0 && *f <= u32::MAX as f64)
            .ok_or_else(|| bad(format!("frame {:?} is not a positive integer", fields[0])))?
            as u32;
        let id = fields[1]
            .parse::<f64>()
            .ok()
            .filter(|f| f.fract() == 0.0)
            .ok_or_else(|| bad(format!("id {:?} is not an integer", fields[1])))?
            as i64;
        let bbox =
            BoundingBox::new(num(2)?, num(3)?, num(4)?, num(5)?).map_err(|e| bad(e.to_string()))?;
        let confidence = if fields.len() > 6 { num(6)? } else { 1.0 };
        let (class, visibility) = match line_schema {
            MotSchema::GroundTruth => (num(7)? as i32, num(8)?),
            MotSchema::Results => (-1, -1.0),
        };

        if id >= 0 && !seen.insert((frame, id)) {
            return Err(FogError::DuplicateRecord {
                path: path.to_path_buf(),
                line: line_no,
                frame,
                id,
            });
        }
        records.push(TrackRecord {
            frame,
            id,
            bbox,
            confidence,
            class,
            visibility,
        });
    }

    TrackSet::new(records, schema.unwrap_or(MotSchema::Results))
}
