//! The labelled reference model and nearest-neighbour pose lookup.

use std::fs;
use std::path::Path;

use crate::codevec::{raw_distance, vectorize, CodeVector, HammingMode};
use crate::error::{Error, Result};
use crate::image::{resize_to_256, GrayImage};
use crate::manifest::Manifest;
use crate::par::{map_indexed, try_map_indexed, Exec};
use crate::pgm::read_pgm;
use crate::pifs::{encode_with, EncoderConfig};
use crate::pose::PoseLabel;

pub const GALLERY_MAGIC: &[u8; 4] = b"HPGL";
pub const GALLERY_VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct GalleryEntry {
    pub vector: CodeVector,
    pub label: PoseLabel,
    pub source_id: String,
    pub subject_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gallery {
    config: EncoderConfig,
    entries: Vec<GalleryEntry>,
}

/// Best gallery match for a query.
#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    pub index: usize,
    pub label: PoseLabel,
    pub distance: usize,
    pub source_id: String,
}

/// The query-side pipeline: resize, encode, vectorise.
pub fn image_vector(img: &GrayImage, cfg: &EncoderConfig) -> Result<CodeVector> {
    // Parallelism lives at the image level in batch paths; a single query
    // still uses it inside the encoder.
    image_vector_with(img, cfg, Exec::default())
}

fn image_vector_with(img: &GrayImage, cfg: &EncoderConfig, exec: Exec) -> Result<CodeVector> {
    let resized = resize_to_256(img);
    Ok(vectorize(&encode_with(&resized, cfg, exec)?.code))
}

/// Loads and encodes every manifest row, in order. The first failing row
/// (by position) is reported.
pub fn encode_manifest(
    manifest: &Manifest,
    cfg: &EncoderConfig,
    exec: Exec,
) -> Result<Vec<GalleryEntry>> {
    cfg.validate()?;
    try_map_indexed(exec, manifest.len(), |i| {
        let row = &manifest.rows[i];
        let path = manifest.resolve(row);
        let wrap = |e: Error| Error::ManifestRow {
            row: i + 1,
            reason: e.at_path(&path).to_string(),
        };
        let img = read_pgm(&path).map_err(|e| match e {
            Error::Path { source, .. } => wrap(*source),
            other => wrap(other),
        })?;
        let vector = image_vector_with(&img, cfg, Exec::Sequential).map_err(wrap)?;
        Ok(GalleryEntry {
            vector,
            label: row.pose,
            source_id: row.path.clone(),
            subject_id: row.subject.clone(),
        })
    })
}

/// Builds a gallery from every manifest row. Fails as a whole if any row
/// fails.
pub fn build_gallery(manifest: &Manifest, cfg: &EncoderConfig) -> Result<Gallery> {
    build_gallery_with(manifest, cfg, Exec::default())
}

pub fn build_gallery_with(manifest: &Manifest, cfg: &EncoderConfig, exec: Exec) -> Result<Gallery> {
    Gallery::new(*cfg, encode_manifest(manifest, cfg, exec)?)
}

/// Nearest neighbour for an image.
pub fn query(g: &Gallery, img: &GrayImage) -> Result<Match> {
    query_with(g, img, HammingMode::Symbol)
}

pub fn query_with(g: &Gallery, img: &GrayImage, mode: HammingMode) -> Result<Match> {
    if g.is_empty() {
        return Err(Error::EmptyModel);
    }
    let v = image_vector(img, &g.config)?;
    g.nearest(&v, mode)
}

impl Gallery {
    pub fn new(config: EncoderConfig, entries: Vec<GalleryEntry>) -> Result<Self> {
        config.validate()?;
        let fp = config.fingerprint();
        let len = entries.first().map(|e| e.vector.len());
        for (i, e) in entries.iter().enumerate() {
            if e.vector.fingerprint() != fp || Some(e.vector.len()) != len {
                return Err(Error::IncomparableCodes(format!(
                    "gallery entry {i} ({}) was encoded with different settings",
                    e.source_id
                )));
            }
            e.label.validate()?;
        }
        Ok(Self { config, entries })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn entries(&self) -> &[GalleryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry with the smallest distance to `v`; the lowest index wins ties.
    pub fn nearest(&self, v: &CodeVector, mode: HammingMode) -> Result<Match> {
        let first = self.entries.first().ok_or(Error::EmptyModel)?;
        if v.fingerprint() != first.vector.fingerprint() || v.len() != first.vector.len() {
            return Err(Error::IncomparableCodes(
                "query was encoded with settings different from the gallery".into(),
            ));
        }
        let (index, distance) = self
            .entries
            .iter()
            .map(|e| raw_distance(v.symbols(), e.vector.symbols(), mode))
            .enumerate()
            .min_by_key(|&(i, d)| (d, i))
            .expect("non-empty");
        let e = &self.entries[index];
        Ok(Match {
            index,
            label: e.label,
            distance,
            source_id: e.source_id.clone(),
        })
    }

    /// Nearest neighbours for many vectors, in input order.
    pub fn nearest_batch(
        &self,
        queries: &[CodeVector],
        mode: HammingMode,
        exec: Exec,
    ) -> Result<Vec<Match>> {
        map_indexed(exec, queries.len(), |i| self.nearest(&queries[i], mode))
            .into_iter()
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(GALLERY_MAGIC);
        out.push(GALLERY_VERSION);
        out.extend_from_slice(&self.config.header_bytes());
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        let vlen = self.entries.first().map_or(0, |e| e.vector.len());
        out.extend_from_slice(&(vlen as u32).to_le_bytes());
        for e in &self.entries {
            for v in [e.label.pitch, e.label.yaw, e.label.roll] {
                out.extend_from_slice(&v.to_le_bytes());
            }
            for s in [e.source_id.as_str(), e.subject_id.as_deref().unwrap_or("")] {
                out.extend_from_slice(&(s.len() as u32).to_le_bytes());
                out.extend_from_slice(s.as_bytes());
            }
            for sym in e.vector.symbols() {
                out.extend_from_slice(&sym.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader { bytes, pos: 0 };
        if r.take(4)? != GALLERY_MAGIC {
            return Err(Error::format("gallery", "missing HPGL magic"));
        }
        let version = r.take(1)?[0];
        if version != GALLERY_VERSION {
            return Err(Error::format(
                "gallery",
                format!("unsupported version {version}"),
            ));
        }
        let config = EncoderConfig::from_header_bytes(r.take(10)?.try_into().expect("10 bytes"))?;
        let fp = config.fingerprint();
        let count = r.u32()? as usize;
        let vlen = r.u32()? as usize;
        let mut entries = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let label = PoseLabel {
                pitch: r.f64()?,
                yaw: r.f64()?,
                roll: r.f64()?,
            };
            let source_id = r.string()?;
            let subject = r.string()?;
            let raw = r.take(
                vlen.checked_mul(4)
                    .ok_or_else(|| Error::format("gallery", "vector too long"))?,
            )?;
            let symbols = raw
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect();
            entries.push(GalleryEntry {
                vector: CodeVector::new(symbols, fp),
                label,
                source_id,
                subject_id: (!subject.is_empty()).then_some(subject),
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::format("gallery", "trailing bytes after last entry"));
        }
        Gallery::new(config, entries).map_err(|e| Error::format("gallery", e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::from(e).at_path(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        fs::read(path)
            .map_err(Error::from)
            .and_then(|b| Self::from_bytes(&b))
            .map_err(|e| e.at_path(path))
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::format("gallery", "unexpected end of file"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::format("gallery", "invalid UTF-8 string"))
    }
}
