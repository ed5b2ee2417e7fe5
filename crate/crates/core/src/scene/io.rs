//! Dataset directory layout:
//!
//! ```text
//! root/
//!   manifest.json              {"scenes": [ {scene_id, pause_time, window_len, frame_rate,
//!                                            units, pixels_per_degree, vanishing_point,
//!                                            regions?}, ... ]}
//!   objects.jsonl              one object per line, boxes as [t, xmin, ymin, xmax, ymax]
//!   labels.csv                 participant,scene,object,aware
//!   gaze/<participant>/<scene>.csv   t,x,y,valid
//! ```
//!
//! `units` is `"px"` or `"deg"` per scene and applies to the vanishing point,
//! regions, boxes and gaze of that scene. Loading always yields degrees;
//! writing always emits degrees.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::types::*;

pub const MANIFEST: &str = "manifest.json";
pub const OBJECTS: &str = "objects.jsonl";
pub const LABELS: &str = "labels.csv";
pub const GAZE_DIR: &str = "gaze";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Px,
    Deg,
}

fn default_window() -> f64 {
    DEFAULT_WINDOW_LEN
}

fn default_rate() -> f64 {
    DEFAULT_FRAME_RATE
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    scenes: Vec<ManifestScene>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestScene {
    scene_id: String,
    pause_time: f64,
    #[serde(default = "default_window")]
    window_len: f64,
    #[serde(default = "default_rate")]
    frame_rate: f64,
    units: Units,
    pixels_per_degree: f64,
    vanishing_point: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    regions: Option<Vec<RegionPolygon>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectLine {
    scene_id: String,
    object_id: String,
    is_target: bool,
    boxes: Vec<[f64; 5]>,
    properties: ObjectProperties,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRecord {
    participant: String,
    scene: String,
    object: String,
    aware: String,
}

#[derive(Debug, Deserialize)]
struct GazeRecord {
    t: f64,
    x: f64,
    y: f64,
    valid: String,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn require(path: PathBuf) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingFile(path))
    }
}

fn parse_bool(file: &str, line: usize, field: &str, raw: &str) -> Result<bool> {
    match raw.trim() {
        "1" | "true" | "True" | "TRUE" => Ok(true),
        "0" | "false" | "False" | "FALSE" => Ok(false),
        other => Err(Error::Schema {
            file: file.to_owned(),
            line,
            message: format!("field `{field}`: expected boolean, got `{other}`"),
        }),
    }
}

fn csv_schema(file: &str, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Schema {
        file: file.to_owned(),
        line,
        message: err.to_string(),
    }
}

fn check_header(
    file: &str,
    reader: &mut csv::Reader<impl std::io::Read>,
    want: &[&str],
) -> Result<()> {
    let header = reader.headers().map_err(|e| csv_schema(file, e))?;
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != want {
        return Err(Error::Schema {
            file: file.to_owned(),
            line: 1,
            message: format!(
                "header must be `{}`, got `{}`",
                want.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

/// Loads and validates a dataset directory.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Dataset> {
    let root = root.as_ref();
    let manifest_path = require(root.join(MANIFEST))?;
    let objects_path = require(root.join(OBJECTS))?;
    let labels_path = require(root.join(LABELS))?;

    let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Schema {
        file: MANIFEST.into(),
        line: e.line(),
        message: e.to_string(),
    })?;

    let mut scenes = Vec::with_capacity(manifest.scenes.len());
    let mut scale: HashMap<String, f64> = HashMap::new();
    for m in manifest.scenes {
        if !(m.pixels_per_degree > 0.0 && m.pixels_per_degree.is_finite()) {
            return Err(Error::invalid(
                "pixels_per_degree",
                format!(
                    "scene `{}`: must be > 0, got {}",
                    m.scene_id, m.pixels_per_degree
                ),
            ));
        }
        let f = match m.units {
            Units::Deg => 1.0,
            Units::Px => 1.0 / m.pixels_per_degree,
        };
        if scale.insert(m.scene_id.clone(), f).is_some() {
            return Err(Error::Integrity(format!(
                "duplicate scene id `{}`",
                m.scene_id
            )));
        }
        let regions = m.regions.map(|rs| {
            rs.into_iter()
                .map(|r| RegionPolygon {
                    region_id: r.region_id,
                    polygon: r.polygon.iter().map(|p| [p[0] * f, p[1] * f]).collect(),
                })
                .collect()
        });
        scenes.push(SceneRecord {
            scene_id: m.scene_id,
            pause_time: m.pause_time,
            window_len: m.window_len,
            frame_rate: m.frame_rate,
            vanishing_point: [m.vanishing_point[0] * f, m.vanishing_point[1] * f],
            pixels_per_degree: m.pixels_per_degree,
            objects: Vec::new(),
            regions,
        });
    }

    let file = fs::File::open(&objects_path).map_err(io_err(&objects_path))?;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(&objects_path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ObjectLine = serde_json::from_str(&line).map_err(|e| Error::Schema {
            file: OBJECTS.into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        let f = *scale.get(&rec.scene_id).ok_or_else(|| {
            Error::Integrity(format!(
                "object `{}` references unknown scene `{}`",
                rec.object_id, rec.scene_id
            ))
        })?;
        let scene = scenes
            .iter_mut()
            .find(|s| s.scene_id == rec.scene_id)
            .expect("scene ids indexed above");
        scene.objects.push(ObjectTrack {
            object_id: rec.object_id,
            is_target: rec.is_target,
            boxes: rec
                .boxes
                .iter()
                .map(|b| TimedBox {
                    t: b[0],
                    bbox: BoundingBox::new(b[1], b[2], b[3], b[4]).scaled(f),
                })
                .collect(),
            properties: rec.properties,
        });
    }

    let mut gaze = Vec::new();
    let gaze_root = root.join(GAZE_DIR);
    if gaze_root.is_dir() {
        let mut files = Vec::new();
        for entry in fs::read_dir(&gaze_root).map_err(io_err(&gaze_root))? {
            let dir = entry.map_err(io_err(&gaze_root))?.path();
            if !dir.is_dir() {
                continue;
            }
            for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
                let path = entry.map_err(io_err(&dir))?.path();
                if path.extension().is_some_and(|e| e == "csv") {
                    files.push(path);
                }
            }
        }
        let key = |p: &PathBuf| -> (String, String) {
            let participant = p
                .parent()
                .and_then(Path::file_name)
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let scene = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (participant, scene)
        };
        files.sort_by_key(key);
        for path in files {
            let (participant_id, scene_id) = key(&path);
            let f = *scale.get(&scene_id).ok_or_else(|| {
                Error::Integrity(format!(
                    "gaze file {} references unknown scene `{scene_id}`",
                    path.display()
                ))
            })?;
            gaze.push(GazeTrack {
                samples: read_gaze(&path, f)?,
                participant_id,
                scene_id,
            });
        }
    }

    let mut labels = Vec::new();
    let mut reader = csv::Reader::from_path(&labels_path)?;
    check_header(
        LABELS,
        &mut reader,
        &["participant", "scene", "object", "aware"],
    )?;
    for rec in reader.deserialize::<LabelRecord>() {
        let rec = rec.map_err(|e| csv_schema(LABELS, e))?;
        let line = labels.len() + 2;
        labels.push(AwarenessLabel {
            aware: parse_bool(LABELS, line, "aware", &rec.aware)?,
            participant_id: rec.participant,
            scene_id: rec.scene,
            object_id: rec.object,
        });
    }

    let ds = Dataset {
        scenes,
        gaze,
        labels,
    };
    ds.validate()?;
    Ok(ds)
}

fn read_gaze(path: &Path, f: f64) -> Result<Vec<GazeSample>> {
    let name = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_schema(&name, e))?;
    check_header(&name, &mut reader, &["t", "x", "y", "valid"])?;
    let mut out = Vec::new();
    for rec in reader.deserialize::<GazeRecord>() {
        let rec = rec.map_err(|e| csv_schema(&name, e))?;
        let line = out.len() + 2;
        out.push(GazeSample {
            t: rec.t,
            x: rec.x * f,
            y: rec.y * f,
            valid: parse_bool(&name, line, "valid", &rec.valid)?,
        });
    }
    Ok(out)
}

/// Writes `ds` in the directory layout read by [`load_dataset`], in degrees.
pub fn write_dataset(ds: &Dataset, root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    fs::create_dir_all(root).map_err(io_err(root))?;

    let manifest = Manifest {
        scenes: ds
            .scenes
            .iter()
            .map(|s| ManifestScene {
                scene_id: s.scene_id.clone(),
                pause_time: s.pause_time,
                window_len: s.window_len,
                frame_rate: s.frame_rate,
                units: Units::Deg,
                pixels_per_degree: s.pixels_per_degree,
                vanishing_point: s.vanishing_point,
                regions: s.regions.clone(),
            })
            .collect(),
    };
    let path = root.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;

    let path = root.join(OBJECTS);
    let mut out = BufWriter::new(fs::File::create(&path).map_err(io_err(&path))?);
    for scene in &ds.scenes {
        for obj in &scene.objects {
            let line = ObjectLine {
                scene_id: scene.scene_id.clone(),
                object_id: obj.object_id.clone(),
                is_target: obj.is_target,
                boxes: obj
                    .boxes
                    .iter()
                    .map(|b| [b.t, b.bbox.xmin, b.bbox.ymin, b.bbox.xmax, b.bbox.ymax])
                    .collect(),
                properties: obj.properties,
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n").map_err(io_err(&path))?;
        }
    }
    out.flush().map_err(io_err(&path))?;

    let path = root.join(LABELS);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["participant", "scene", "object", "aware"])?;
    for l in &ds.labels {
        w.write_record([
            l.participant_id.as_str(),
            l.scene_id.as_str(),
            l.object_id.as_str(),
            if l.aware { "1" } else { "0" },
        ])?;
    }
    w.flush().map_err(io_err(&path))?;

    for track in &ds.gaze {
        let dir = root.join(GAZE_DIR).join(&track.participant_id);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = dir.join(format!("{}.csv", track.scene_id));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["t", "x", "y", "valid"])?;
        for s in &track.samples {
            w.write_record([
                s.t.to_string(),
                s.x.to_string(),
                s.y.to_string(),
                (if s.valid { "1" } else { "0" }).to_owned(),
            ])?;
        }
        w.flush().map_err(io_err(&path))?;
    }
    Ok(())
}
