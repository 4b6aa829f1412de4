//! Dataset manifests: CSV files with header `path,pitch,yaw,roll,subject`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pose::PoseLabel;

const HEADER: [&str; 5] = ["path", "pitch", "yaw", "roll", "subject"];

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestRow {
    /// As written in the CSV; relative paths resolve against the manifest's
    /// directory.
    pub path: String,
    pub pose: PoseLabel,
    pub subject: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
    /// Directory relative image paths are resolved against.
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn new(rows: Vec<ManifestRow>, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let m = Self {
            rows,
            base_dir: base_dir.into(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, row) in self.rows.iter().enumerate() {
            row.pose.validate().map_err(|e| Error::ManifestRow {
                row: i + 1,
                reason: e.to_string(),
            })?;
            if !seen.insert(row.path.as_str()) {
                return Err(Error::ManifestRow {
                    row: i + 1,
                    reason: format!("duplicate path {:?}", row.path),
                });
            }
        }
        Ok(())
    }

    pub fn resolve(&self, row: &ManifestRow) -> PathBuf {
        let p = Path::new(&row.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Distinct subject ids in order of first appearance.
    pub fn subjects(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.rows
            .iter()
            .filter_map(|r| r.subject.as_deref())
            .filter(|s| seen.insert(*s))
            .map(str::to_owned)
            .collect()
    }

    fn subset(&self, rows: Vec<ManifestRow>) -> Manifest {
        Manifest {
            rows,
            base_dir: self.base_dir.clone(),
        }
    }

    pub fn from_reader<R: Read>(reader: R, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::format("manifest", e.to_string()))?
            .clone();
        let names: Vec<&str> = headers.iter().collect();
        if names.len() < 4 || names.len() > 5 || names[..] != HEADER[..names.len()] {
            return Err(Error::format(
                "manifest",
                format!(
                    "header must be `{}`, got `{}`",
                    HEADER.join(","),
                    names.join(",")
                ),
            ));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row_no = i + 1;
            let row_err = |reason: String| Error::ManifestRow {
                row: row_no,
                reason,
            };
            let rec = rec.map_err(|e| row_err(e.to_string()))?;
            if rec.len() < 4 || rec.len() > names.len() {
                return Err(row_err(format!(
                    "expected {} fields, found {}",
                    names.len(),
                    rec.len()
                )));
            }
            let path = rec[0].to_owned();
            if path.is_empty() {
                return Err(row_err("empty path".into()));
            }
            let angle = |idx: usize| {
                rec[idx].parse::<f64>().map_err(|_| {
                    row_err(format!(
                        "{} {:?} is not a decimal angle",
                        HEADER[idx], &rec[idx]
                    ))
                })
            };
            let pose = PoseLabel {
                pitch: angle(1)?,
                yaw: angle(2)?,
                roll: angle(3)?,
            };
            let subject = rec.get(4).filter(|s| !s.is_empty()).map(str::to_owned);
            rows.push(ManifestRow {
                path,
                pose,
                subject,
            });
        }
        Manifest::new(rows, base_dir)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        File::open(path)
            .map_err(Error::from)
            .and_then(|f| Self::from_reader(f, base))
            .map_err(|e| e.at_path(path))
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::format("manifest", e.to_string());
        wtr.write_record(HEADER).map_err(io)?;
        for r in &self.rows {
            wtr.write_record([
                r.path.clone(),
                r.pose.pitch.to_string(),
                r.pose.yaw.to_string(),
                r.pose.roll.to_string(),
                r.subject.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        File::create(path)
            .map_err(Error::from)
            .and_then(|f| self.write_to(f))
            .map_err(|e| e.at_path(path))
    }
}

/// Holds out every row of `subject`; the rest form the model.
pub fn split_leave_one_subject_out(
    manifest: &Manifest,
    subject: &str,
) -> Result<(Manifest, Manifest)> {
    let (test, model): (Vec<_>, Vec<_>) = manifest
        .rows
        .iter()
        .cloned()
        .partition(|r| r.subject.as_deref() == Some(subject));
    if test.is_empty() {
        return Err(Error::invalid(format!("subject {subject:?} has no rows")));
    }
    Ok((manifest.subset(model), manifest.subset(test)))
}

/// Index form of [`split_random`]: `(model, test)` row indices, each in
/// ascending order.
pub fn random_split_indices(
    len: usize,
    model_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(model_fraction > 0.0 && model_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "model fraction must lie strictly between 0 and 1, got {model_fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    // Guard against products like 0.8 * 10 landing a hair above an integer.
    let cut = ((model_fraction * len as f64) - 1e-9).ceil().max(0.0) as usize;
    let (model, test) = order.split_at(cut.min(len));
    let (mut model, mut test) = (model.to_vec(), test.to_vec());
    model.sort_unstable();
    test.sort_unstable();
    Ok((model, test))
}

/// Seeded shuffle, then the first `⌈fraction·n⌉` rows become the model.
/// Both halves keep manifest order.
pub fn split_random(
    manifest: &Manifest,
    model_fraction: f64,
    seed: u64,
) -> Result<(Manifest, Manifest)> {
    let (model, test) = random_split_indices(manifest.len(), model_fraction, seed)?;
    let pick =
        |idx: &[usize]| manifest.subset(idx.iter().map(|&i| manifest.rows[i].clone()).collect());
    Ok((pick(&model), pick(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(path: &str, subject: Option<&str>) -> ManifestRow {
        ManifestRow {
            path: path.into(),
            pose: PoseLabel {
                pitch: 1.0,
                yaw: 2.0,
                roll: 3.0,
            },
            subject: subject.map(Into::into),
        }
    }

    fn manifest(n: usize, subjects: usize) -> Manifest {
        let rows = (0..n)
            .map(|i| row(&format!("img{i}.pgm"), Some(&format!("s{}", i % subjects))))
            .collect();
        Manifest::new(rows, "").unwrap()
    }

    #[test]
    fn parses_csv() {
        let text = "path,pitch,yaw,roll,subject\na.pgm,1.5,-2,3,s1\nb.pgm, 0 ,0,0,\n";
        let m = Manifest::from_reader(text.as_bytes(), "/data").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(
            m.rows[0].pose,
            PoseLabel {
                pitch: 1.5,
                yaw: -2.0,
                roll: 3.0
            }
        );
        assert_eq!(m.rows[0].subject.as_deref(), Some("s1"));
        assert_eq!(m.rows[1].subject, None);
        assert_eq!(m.resolve(&m.rows[0]), PathBuf::from("/data/a.pgm"));
    }

    #[test]
    fn subject_column_is_optional() {
        let m = Manifest::from_reader("path,pitch,yaw,roll\nx.pgm,0,0,0\n".as_bytes(), "").unwrap();
        assert_eq!(m.rows[0].subject, None);
    }

    #[test]
    fn malformed_rows_are_named() {
        let err = Manifest::from_reader(
            "path,pitch,yaw,roll,subject\na,0,0,0,\nb,zero,0,0,\n".as_bytes(),
            "",
        )
        .unwrap_err();
        assert!(matches!(err, Error::ManifestRow { row: 2, .. }), "{err}");
        let err = Manifest::from_reader("path,pitch,yaw,roll\na,0,0,0\na,1,1,1\n".as_bytes(), "")
            .unwrap_err();
        assert!(matches!(err, Error::ManifestRow { row: 2, .. }));
        let err =
            Manifest::from_reader("path,pitch,yaw,roll\na,0,0,300\n".as_bytes(), "").unwrap_err();
        assert!(matches!(err, Error::ManifestRow { row: 1, .. }));
        assert!(Manifest::from_reader("file,pitch,yaw,roll\n".as_bytes(), "").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = manifest(5, 2);
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        assert_eq!(Manifest::from_reader(buf.as_slice(), "").unwrap(), m);
    }

    #[test]
    fn loo_split() {
        let m = manifest(30, 10);
        let (model, test) = split_leave_one_subject_out(&m, "s3").unwrap();
        assert_eq!(test.len(), 3);
        assert!(test.rows.iter().all(|r| r.subject.as_deref() == Some("s3")));
        assert_eq!(model.len(), 27);
        assert!(split_leave_one_subject_out(&m, "nobody").is_err());
        assert_eq!(m.subjects().len(), 10);
        assert_eq!(m.subjects()[0], "s0");
    }

    #[test]
    fn random_split() {
        let m = manifest(10, 1);
        let (model, test) = split_random(&m, 0.8, 7).unwrap();
        assert_eq!((model.len(), test.len()), (8, 2));
        assert_eq!(split_random(&m, 0.8, 7).unwrap(), (model, test));
        for bad in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(split_random(&m, bad, 1).is_err());
        }
    }

    #[test]
    fn seeds_change_split() {
        let a = random_split_indices(40, 0.8, 1).unwrap();
        let b = random_split_indices(40, 0.8, 2).unwrap();
        assert_ne!(a, b);
    }
}
