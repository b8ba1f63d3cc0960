//! Labeled datasets: synthesis presets, a balanced builder, and the binary
//! on-disk format.
//!
//! Each record is one chunk of one synthesized capture: `chunk_len` complex
//! bins stored as `(I, Q)` `f32` pairs, plus the chunk-local class label
//! (`0 .. subcarriers_per_chunk` name jammed local positions, the final
//! class is "clean"), the signed global subcarrier index (−1 for clean),
//! and the drawn SNR.
//!
//! File layout (little-endian): magic `DSWP`, `version: u32`, `n_fft: u32`,
//! `chunk_len: u32`, `num_classes: u32`, `num_records: u64`, then per
//! record `label: u16`, `global_subcarrier: i16`, `snr_db: f32`, and
//! `chunk_len` interleaved `(I: f32, Q: f32)` pairs. A human-readable
//! `<file>.meta.json` sidecar records how the data was made.

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::{fft_stage, partition, SweepConfig};
use crate::rng::{derive_seed, unit_from_seed};
use crate::synth::{
    apply_channel, generate_ofdm_burst, inject_interference, shifted_index, ChannelSpec,
    InterferenceSpec, InterferenceWaveform, OfdmConfig,
};

pub const DATASET_MAGIC: [u8; 4] = *b"DSWP";
pub const DATASET_VERSION: u32 = 1;

/// One labeled chunk.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    /// Chunk-local class: jammed local position, or `num_classes - 1` for clean.
    pub label: u16,
    /// Signed subcarrier index of the jammer, −1 for clean records.
    pub global_subcarrier: i16,
    /// SNR drawn for this record's channel, dB.
    pub snr_db: f32,
    /// `chunk_len` complex bins as `(I, Q)`.
    pub iq: Vec<(f32, f32)>,
}

/// Fixed-size header of a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub n_fft: u32,
    pub chunk_len: u32,
    pub num_classes: u32,
    pub num_records: u64,
}

/// How a candidate subcarrier maps onto the chunk grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateInfo {
    /// Signed subcarrier index.
    pub subcarrier: i32,
    /// Chunk that sees it.
    pub chunk: usize,
    /// Class label it trains as within that chunk.
    pub local_class: usize,
}

/// Everything the builder needs to synthesize a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub ofdm: OfdmConfig,
    /// Bins per spectrum frame (our record source); a multiple of
    /// `ofdm.fft_size` so each subcarrier owns a whole number of bins.
    pub n_fft: usize,
    /// Chunks per frame; one of {1, 2, 4, 8}.
    pub g: usize,
    pub waveform: InterferenceWaveform,
    /// Subcarriers the jammer cycles through.
    pub candidate_set: Vec<i32>,
    /// When set, every record is cut from this chunk (single-band watch);
    /// all candidates must fall inside it. When `None`, jam records are cut
    /// from the jammed chunk and clean records from a uniformly drawn one.
    pub monitored_chunk: Option<usize>,
    /// Uniform draw range for interference power, dB rel. per-subcarrier power.
    pub power_db_rel: (f64, f64),
    /// Uniform draw range for channel SNR, dB.
    pub snr_db: (f64, f64),
    /// Uniform draw range for channel gain, dB (a per-day offset in ±3 dB
    /// is added on top).
    pub gain_db: (f64, f64),
    /// Distinct collection days; records rotate through them in label-cycle
    /// blocks so every day sees every class.
    pub n_days: u32,
    /// Fraction of clean records that are dead air (all-zero captures), so
    /// the clean class also covers an idle band.
    pub idle_fraction: f64,
    pub seed: u64,
}

impl DatasetSpec {
    /// Watch one 8-subcarrier chunk (chunk 5 of 8) with the jammer cycling
    /// through all eight of its data subcarriers, +8..=+15.
    pub fn chunk8(seed: u64) -> DatasetSpec {
        DatasetSpec {
            ofdm: OfdmConfig::default(),
            n_fft: 256,
            g: 8,
            waveform: InterferenceWaveform::Tone,
            candidate_set: (8..=15).collect(),
            monitored_chunk: Some(5),
            power_db_rel: (10.0, 20.0),
            snr_db: (10.0, 30.0),
            gain_db: (-1.0, 1.0),
            n_days: 20,
            idle_fraction: 0.05,
            seed,
        }
    }

    /// Watch the whole band with one candidate in every chunk, each at a
    /// distinct local position (so labels stay balanced at every chunk
    /// count). All candidates are data subcarriers.
    pub fn fullband8(seed: u64) -> DatasetSpec {
        DatasetSpec {
            candidate_set: vec![-25, -18, -16, -3, 2, 11, 20, 25],
            monitored_chunk: None,
            ..DatasetSpec::chunk8(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        let frame_cfg = self.frame_config();
        frame_cfg.validate()?;
        if self.n_fft % self.ofdm.fft_size != 0 {
            return Err(Error::config(format!(
                "n_fft ({}) must be a multiple of the OFDM grid size ({})",
                self.n_fft, self.ofdm.fft_size
            )));
        }
        if self.ofdm.fft_size % self.g != 0 {
            return Err(Error::config(format!(
                "chunk count {} must divide the {}-subcarrier grid",
                self.g, self.ofdm.fft_size
            )));
        }
        // Candidate geometry (ranges, duplicates) is the interference
        // spec's own validation.
        self.interference_spec(None, 0.0).validate(&self.ofdm)?;
        if self.candidate_set.contains(&-1) {
            return Err(Error::config(
                "subcarrier -1 cannot be a candidate: it is the record \
                 encoding for \"clean\"",
            ));
        }
        if let Some(chunk) = self.monitored_chunk {
            if chunk >= self.g {
                return Err(Error::config(format!(
                    "monitored_chunk {chunk} out of range for g = {}",
                    self.g
                )));
            }
            for &k in &self.candidate_set {
                if self.chunk_of(k) != chunk {
                    return Err(Error::config(format!(
                        "candidate {k} lies in chunk {} but chunk {chunk} is monitored",
                        self.chunk_of(k)
                    )));
                }
            }
        }
        for (name, (lo, hi)) in [
            ("power_db_rel", self.power_db_rel),
            ("snr_db", self.snr_db),
            ("gain_db", self.gain_db),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::config(format!("{name} range ({lo}, {hi}) is invalid")));
            }
        }
        if self.n_days == 0 {
            return Err(Error::config("n_days must be positive"));
        }
        if !(0.0..=1.0).contains(&self.idle_fraction) {
            return Err(Error::config("idle_fraction must be in [0, 1]"));
        }
        Ok(())
    }

    /// Geometry of the frames records are cut from (one frame per capture).
    pub fn frame_config(&self) -> SweepConfig {
        SweepConfig {
            n_time: self.n_fft,
            n_fft: self.n_fft,
            g: self.g,
            sample_rate_hz: self.ofdm.sample_rate_hz,
        }
    }

    /// Subcarriers per chunk — the jam-position class count.
    pub fn subcarriers_per_chunk(&self) -> usize {
        self.ofdm.fft_size / self.g
    }

    /// Local jam positions plus the clean class.
    pub fn num_classes(&self) -> usize {
        self.subcarriers_per_chunk() + 1
    }

    pub fn chunk_len(&self) -> usize {
        self.n_fft / self.g
    }

    /// Records per label cycle: every candidate once, then one clean.
    pub fn cycle_len(&self) -> usize {
        self.candidate_set.len() + 1
    }

    /// Chunk index covering signed subcarrier `k` under this chunking.
    pub fn chunk_of(&self, k: i32) -> usize {
        shifted_index(k, self.ofdm.fft_size) / self.subcarriers_per_chunk()
    }

    fn local_of(&self, k: i32) -> usize {
        shifted_index(k, self.ofdm.fft_size) % self.subcarriers_per_chunk()
    }

    pub fn candidates_info(&self) -> Vec<CandidateInfo> {
        self.candidate_set
            .iter()
            .map(|&k| CandidateInfo {
                subcarrier: k,
                chunk: self.chunk_of(k),
                local_class: self.local_of(k),
            })
            .collect()
    }

    fn interference_spec(&self, target: Option<i32>, power_db_rel: f64) -> InterferenceSpec {
        InterferenceSpec {
            target_subcarrier: target,
            waveform: self.waveform,
            bandwidth_hz: self.ofdm.subcarrier_spacing_hz(),
            power_db_rel,
            candidate_set: self.candidate_set.clone(),
        }
    }

    fn class_names(&self) -> Vec<String> {
        let spc = self.subcarriers_per_chunk();
        let infos = self.candidates_info();
        let mut names: Vec<String> = (0..spc)
            .map(|local| {
                let hits: Vec<&CandidateInfo> =
                    infos.iter().filter(|c| c.local_class == local).collect();
                match hits.as_slice() {
                    [] => format!("unused_{local}"),
                    [one] => format!("jam_sc{:+}", one.subcarrier),
                    _ => format!("jam_local_{local}"),
                }
            })
            .collect();
        names.push("clean".to_string());
        names
    }
}

/// Sidecar metadata describing how a dataset was synthesized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format_version: u32,
    pub preset: String,
    pub spec: DatasetSpec,
    pub cycle_len: u32,
    pub candidates: Vec<CandidateInfo>,
    pub class_names: Vec<String>,
    pub per_class_counts: Vec<u64>,
    pub idle_records: u64,
}

/// Build statistics returned alongside in-memory records.
#[derive(Debug, Clone, Default)]
pub struct BuildStats {
    pub per_class_counts: Vec<u64>,
    pub day_counts: Vec<u64>,
    pub idle_records: u64,
}

/// CLI-facing summary of a written dataset.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub path: String,
    pub records: u64,
    pub n_fft: u32,
    pub g: u32,
    pub chunk_len: u32,
    pub num_classes: u32,
    pub per_class_counts: Vec<u64>,
    pub idle_records: u64,
    pub n_days: u32,
}

/// Collection day of record `index` under the builder's rotation: days
/// advance once per full label cycle, wrapping at `n_days`.
pub fn day_of_record(index: usize, cycle_len: usize, n_days: u32) -> u32 {
    ((index / cycle_len.max(1)) % n_days.max(1) as usize) as u32
}

fn draw_uniform(seed: u64, (lo, hi): (f64, f64)) -> f64 {
    lo + unit_from_seed(seed) * (hi - lo)
}

/// Per-day gain offset in ±3 dB, fixed by (dataset seed, day).
fn day_gain_offset_db(dataset_seed: u64, day: u32) -> f64 {
    (unit_from_seed(derive_seed(dataset_seed ^ 0x4441_5953, day as u64)) - 0.5) * 6.0
}

// Stream labels for a record's independent random draws.
const STREAM_BURST: u64 = 1;
const STREAM_POWER: u64 = 2;
const STREAM_SNR: u64 = 3;
const STREAM_GAIN: u64 = 4;
const STREAM_NOISE: u64 = 5;
const STREAM_IDLE: u64 = 6;
const STREAM_CHUNK: u64 = 7;
const STREAM_JAM: u64 = 8;

/// Synthesize `n_records` labeled records in memory.
///
/// Labels follow a strict cycle (each candidate, then clean) so classes are
/// balanced to within one record; days rotate per cycle so every day sees
/// every class and splits by day stay stratified.
pub fn build_records(
    spec: &DatasetSpec,
    n_records: usize,
) -> Result<(Vec<LabeledRecord>, BuildStats)> {
    spec.validate()?;
    let cycle = spec.cycle_len();
    if n_records < cycle {
        return Err(Error::data(format!(
            "need at least {cycle} records (one full label cycle), got {n_records}"
        )));
    }
    let frame_cfg = spec.frame_config();
    let spc = spec.subcarriers_per_chunk();
    let n_symbols = spec.n_fft.div_ceil(spec.ofdm.symbol_len());
    let mut stats = BuildStats {
        per_class_counts: vec![0; spec.num_classes()],
        day_counts: vec![0; spec.n_days as usize],
        idle_records: 0,
    };
    let mut records = Vec::with_capacity(n_records);
    for i in 0..n_records {
        let slot = i % cycle;
        let day = day_of_record(i, cycle, spec.n_days);
        let rec_seed = derive_seed(spec.seed, i as u64);
        let target = spec.candidate_set.get(slot).copied();
        let snr_db = draw_uniform(derive_seed(rec_seed, STREAM_SNR), spec.snr_db);
        let chunk = match (target, spec.monitored_chunk) {
            (Some(k), _) => spec.chunk_of(k),
            (None, Some(c)) => c,
            (None, None) => (derive_seed(rec_seed, STREAM_CHUNK) % spec.g as u64) as usize,
        };
        let idle = target.is_none()
            && unit_from_seed(derive_seed(rec_seed, STREAM_IDLE)) < spec.idle_fraction;
        let iq: Vec<(f32, f32)> = if idle {
            stats.idle_records += 1;
            vec![(0.0, 0.0); spec.chunk_len()]
        } else {
            let burst = generate_ofdm_burst(
                &spec.ofdm,
                n_symbols,
                derive_seed(rec_seed, STREAM_BURST),
            )?;
            let capture = &burst[..spec.n_fft];
            let power = draw_uniform(derive_seed(rec_seed, STREAM_POWER), spec.power_db_rel);
            let jammed = inject_interference(
                capture,
                &spec.interference_spec(target, power),
                &spec.ofdm,
                derive_seed(rec_seed, STREAM_JAM),
            )?;
            let ch = ChannelSpec {
                snr_db,
                gain_db: draw_uniform(derive_seed(rec_seed, STREAM_GAIN), spec.gain_db)
                    + day_gain_offset_db(spec.seed, day),
                seed: derive_seed(rec_seed, STREAM_NOISE),
                day_tag: day,
            };
            let rx = apply_channel(&jammed, &ch)?;
            let frames = fft_stage(&rx, &frame_cfg, i as u64)?;
            let batch = partition(&frames[0], spec.g)?;
            batch.chunks()[chunk]
                .iter()
                .map(|v| (v.re as f32, v.im as f32))
                .collect()
        };
        let label = target.map(|k| spec.local_of(k)).unwrap_or(spc) as u16;
        stats.per_class_counts[label as usize] += 1;
        stats.day_counts[day as usize] += 1;
        records.push(LabeledRecord {
            label,
            global_subcarrier: target.map(|k| k as i16).unwrap_or(-1),
            snr_db: snr_db as f32,
            iq,
        });
    }
    check_balance(&stats.per_class_counts)?;
    Ok((records, stats))
}

/// Occurring classes must stay within 5% of each other.
fn check_balance(counts: &[u64]) -> Result<()> {
    let occurring: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    let max = occurring.iter().max().copied().unwrap_or(0);
    let min = occurring.iter().min().copied().unwrap_or(0);
    if min == 0 || max as f64 / min as f64 > 1.05 {
        return Err(Error::data(format!(
            "classes are imbalanced beyond 5% (min {min}, max {max})"
        )));
    }
    Ok(())
}

/// Build a dataset fully in memory (records plus header and sidecar-style
/// metadata). The sweep over chunk sizes uses this to avoid temp files.
pub fn build_dataset_in_memory(
    spec: &DatasetSpec,
    n_records: usize,
    preset_name: &str,
) -> Result<Dataset> {
    let (records, stats) = build_records(spec, n_records)?;
    let header = DatasetHeader {
        n_fft: spec.n_fft as u32,
        chunk_len: spec.chunk_len() as u32,
        num_classes: spec.num_classes() as u32,
        num_records: records.len() as u64,
    };
    let meta = DatasetMeta {
        format_version: DATASET_VERSION,
        preset: preset_name.to_string(),
        spec: spec.clone(),
        cycle_len: spec.cycle_len() as u32,
        candidates: spec.candidates_info(),
        class_names: spec.class_names(),
        per_class_counts: stats.per_class_counts.clone(),
        idle_records: stats.idle_records,
    };
    Ok(Dataset {
        header,
        records,
        meta: Some(meta),
    })
}

/// Build a dataset and write it (plus sidecar) to `path`.
pub fn build_dataset(
    spec: &DatasetSpec,
    n_records: usize,
    path: &Path,
    preset_name: &str,
) -> Result<DatasetSummary> {
    let ds = build_dataset_in_memory(spec, n_records, preset_name)?;
    let meta = ds.meta.as_ref().expect("in-memory build always carries meta");
    write_dataset(path, &ds.header, &ds.records, Some(meta))?;
    Ok(DatasetSummary {
        path: path.display().to_string(),
        records: ds.header.num_records,
        n_fft: ds.header.n_fft,
        g: spec.g as u32,
        chunk_len: ds.header.chunk_len,
        num_classes: ds.header.num_classes,
        per_class_counts: meta.per_class_counts.clone(),
        idle_records: meta.idle_records,
        n_days: spec.n_days,
    })
}

/// Sidecar path for a dataset file: `<path>.meta.json`.
pub fn meta_path(dataset_path: &Path) -> PathBuf {
    let mut os = dataset_path.as_os_str().to_owned();
    os.push(".meta.json");
    PathBuf::from(os)
}

/// Write records in the binary format (and the sidecar when `meta` given).
pub fn write_dataset(
    path: &Path,
    header: &DatasetHeader,
    records: &[LabeledRecord],
    meta: Option<&DatasetMeta>,
) -> Result<()> {
    if header.num_records != records.len() as u64 {
        return Err(Error::contract(format!(
            "header says {} records, got {}",
            header.num_records,
            records.len()
        )));
    }
    if header.chunk_len == 0 {
        return Err(Error::contract("chunk_len must be positive"));
    }
    for (i, rec) in records.iter().enumerate() {
        if rec.iq.len() != header.chunk_len as usize {
            return Err(Error::contract(format!(
                "record {i} has {} bins, header says {}",
                rec.iq.len(),
                header.chunk_len
            )));
        }
        if u32::from(rec.label) >= header.num_classes {
            return Err(Error::contract(format!(
                "record {i} label {} out of range for {} classes",
                rec.label, header.num_classes
            )));
        }
    }
    crate::fsio::replace_file(path, |w| {
        w.write_all(&DATASET_MAGIC)?;
        w.write_u32::<LittleEndian>(DATASET_VERSION)?;
        w.write_u32::<LittleEndian>(header.n_fft)?;
        w.write_u32::<LittleEndian>(header.chunk_len)?;
        w.write_u32::<LittleEndian>(header.num_classes)?;
        w.write_u64::<LittleEndian>(header.num_records)?;
        for rec in records {
            w.write_u16::<LittleEndian>(rec.label)?;
            w.write_i16::<LittleEndian>(rec.global_subcarrier)?;
            w.write_f32::<LittleEndian>(rec.snr_db)?;
            for &(i, q) in &rec.iq {
                w.write_f32::<LittleEndian>(i)?;
                w.write_f32::<LittleEndian>(q)?;
            }
        }
        Ok(())
    })?;
    if let Some(meta) = meta {
        crate::fsio::replace_file(&meta_path(path), |w| {
            serde_json::to_writer_pretty(w, meta)
                .map_err(|e| Error::format(format!("could not write sidecar: {e}")))
        })?;
    }
    Ok(())
}

/// A dataset loaded back from disk.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub records: Vec<LabeledRecord>,
    /// Sidecar contents, when the `.meta.json` file exists.
    pub meta: Option<DatasetMeta>,
}

/// Read a dataset file, validating magic, version, structure, and labels.
pub fn read_dataset(path: &Path) -> Result<(DatasetHeader, Vec<LabeledRecord>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::format("file too short for a dataset header"))?;
    if magic != DATASET_MAGIC {
        return Err(Error::format(format!(
            "bad magic {magic:?}; not a dataset file"
        )));
    }
    let version = read_u32(&mut r)?;
    if version != DATASET_VERSION {
        return Err(Error::format(format!(
            "unsupported dataset version {version} (expected {DATASET_VERSION})"
        )));
    }
    let header = DatasetHeader {
        n_fft: read_u32(&mut r)?,
        chunk_len: read_u32(&mut r)?,
        num_classes: read_u32(&mut r)?,
        num_records: {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf)
                .map_err(|_| Error::format("truncated dataset header"))?;
            u64::from_le_bytes(buf)
        },
    };
    if header.chunk_len == 0 || header.num_classes < 2 {
        return Err(Error::format(format!(
            "implausible header: chunk_len {}, num_classes {}",
            header.chunk_len, header.num_classes
        )));
    }
    let mut records = Vec::with_capacity(header.num_records.min(1 << 20) as usize);
    for i in 0..header.num_records {
        let truncated = |_| Error::format(format!("dataset truncated inside record {i}"));
        let label = r.read_u16::<LittleEndian>().map_err(truncated)?;
        let global_subcarrier = r.read_i16::<LittleEndian>().map_err(truncated)?;
        let snr_db = r.read_f32::<LittleEndian>().map_err(truncated)?;
        if u32::from(label) >= header.num_classes {
            return Err(Error::format(format!(
                "record {i} label {label} out of range for {} classes",
                header.num_classes
            )));
        }
        let mut iq = Vec::with_capacity(header.chunk_len as usize);
        for _ in 0..header.chunk_len {
            let re = r.read_f32::<LittleEndian>().map_err(truncated)?;
            let im = r.read_f32::<LittleEndian>().map_err(truncated)?;
            iq.push((re, im));
        }
        records.push(LabeledRecord {
            label,
            global_subcarrier,
            snr_db,
            iq,
        });
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::format(
            "trailing bytes after the declared record count",
        ));
    }
    Ok((header, records))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    r.read_u32::<LittleEndian>()
        .map_err(|_| Error::format("truncated dataset header"))
}

/// Read a dataset and its sidecar (when present).
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let (header, records) = read_dataset(path)?;
    let mp = meta_path(path);
    let meta = if mp.exists() {
        let file = File::open(&mp)?;
        Some(
            serde_json::from_reader(BufReader::new(file))
                .map_err(|e| Error::format(format!("invalid sidecar: {e}")))?,
        )
    } else {
        None
    };
    Ok(Dataset {
        header,
        records,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("deepsweep-dataset-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn presets_validate_and_map_candidates_sensibly() {
        let c8 = DatasetSpec::chunk8(1);
        c8.validate().unwrap();
        assert_eq!(c8.num_classes(), 9);
        assert_eq!(c8.chunk_len(), 32);
        assert_eq!(c8.cycle_len(), 9);
        for info in c8.candidates_info() {
            assert_eq!(info.chunk, 5);
            assert_eq!(info.local_class, (info.subcarrier - 8) as usize);
        }

        let fb = DatasetSpec::fullband8(1);
        fb.validate().unwrap();
        let infos = fb.candidates_info();
        let chunks: Vec<usize> = infos.iter().map(|c| c.chunk).collect();
        assert_eq!(chunks, (0..8).collect::<Vec<_>>(), "one candidate per chunk");
        let mut locals: Vec<usize> = infos.iter().map(|c| c.local_class).collect();
        locals.sort_unstable();
        locals.dedup();
        assert_eq!(locals.len(), 8, "locals must be distinct for balance");
        // +11 sits in chunk 5 at local 3 → global grid 43: the worked
        // example of the combine stage.
        let c11 = infos.iter().find(|c| c.subcarrier == 11).unwrap();
        assert_eq!((c11.chunk, c11.local_class), (5, 3));
        // And none of them are pilots or the clean sentinel −1.
        for info in &infos {
            assert!(![-21, -7, 7, 21, 0, -1].contains(&info.subcarrier));
        }
    }

    #[test]
    fn spec_validation_rejects_bad_combinations() {
        let mut s = DatasetSpec::chunk8(0);
        s.candidate_set.push(20); // chunk 6, but chunk 5 is monitored
        assert!(matches!(s.validate(), Err(Error::Config(_))));

        let mut s = DatasetSpec::chunk8(0);
        s.monitored_chunk = Some(9);
        assert!(matches!(s.validate(), Err(Error::Config(_))));

        let mut s = DatasetSpec::fullband8(0);
        s.candidate_set[0] = -1;
        assert!(matches!(s.validate(), Err(Error::Config(_))));

        let mut s = DatasetSpec::chunk8(0);
        s.n_fft = 200;
        assert!(s.validate().is_err());

        let mut s = DatasetSpec::chunk8(0);
        s.snr_db = (30.0, 10.0);
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn builder_balances_classes_and_rotates_days() {
        let spec = DatasetSpec::chunk8(7);
        let n = 900; // 100 full cycles
        let (records, stats) = build_records(&spec, n).unwrap();
        assert_eq!(records.len(), n);
        assert_eq!(stats.per_class_counts, vec![100; 9]);
        // Day rotation: 100 cycles over 20 days → 5 cycles × 9 records each.
        assert_eq!(stats.day_counts, vec![45; 20]);
        for (i, rec) in records.iter().enumerate() {
            assert_eq!(rec.iq.len(), 32);
            let slot = i % 9;
            if slot < 8 {
                assert_eq!(rec.label as usize, slot);
                assert_eq!(rec.global_subcarrier as i32, 8 + slot as i32);
            } else {
                assert_eq!(rec.label, 8);
                assert_eq!(rec.global_subcarrier, -1);
            }
            assert!(rec.snr_db >= 10.0 && rec.snr_db <= 30.0);
        }
    }

    #[test]
    fn builder_is_deterministic_and_seed_sensitive() {
        let spec = DatasetSpec::chunk8(3);
        let (a, _) = build_records(&spec, 45).unwrap();
        let (b, _) = build_records(&spec, 45).unwrap();
        assert_eq!(a, b);
        let (c, _) = build_records(&DatasetSpec::chunk8(4), 45).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn too_few_records_is_a_data_error() {
        let spec = DatasetSpec::chunk8(0);
        assert!(matches!(build_records(&spec, 8), Err(Error::Data(_))));
    }

    #[test]
    fn jam_energy_lands_in_the_labeled_bin_group() {
        // Spectral-placement oracle: with a strong tone, the record's peak
        // bin must fall in the 4-bin group of the labeled local position.
        let mut spec = DatasetSpec::chunk8(5);
        spec.power_db_rel = (15.0, 20.0);
        spec.snr_db = (25.0, 30.0);
        let (records, _) = build_records(&spec, 450).unwrap();
        let bins_per_sc = spec.n_fft / spec.ofdm.fft_size;
        let mut hits = 0;
        let mut jams = 0;
        for rec in &records {
            if rec.label == 8 {
                continue;
            }
            jams += 1;
            let peak = rec
                .iq
                .iter()
                .enumerate()
                .max_by(|a, b| {
                    let pa = a.1 .0 as f64 * a.1 .0 as f64 + a.1 .1 as f64 * a.1 .1 as f64;
                    let pb = b.1 .0 as f64 * b.1 .0 as f64 + b.1 .1 as f64 * b.1 .1 as f64;
                    pa.total_cmp(&pb)
                })
                .unwrap()
                .0;
            let group = rec.label as usize * bins_per_sc;
            if (group..group + bins_per_sc).contains(&peak) {
                hits += 1;
            }
        }
        assert!(jams >= 400);
        assert!(
            hits as f64 / jams as f64 > 0.98,
            "only {hits}/{jams} peaks in the labeled group"
        );
    }

    #[test]
    fn some_clean_records_are_dead_air() {
        let spec = DatasetSpec::chunk8(11);
        let (records, stats) = build_records(&spec, 4500).unwrap();
        assert!(stats.idle_records > 0, "idle fraction should produce some");
        let zero_recs = records
            .iter()
            .filter(|r| r.iq.iter().all(|&(i, q)| i == 0.0 && q == 0.0))
            .count() as u64;
        assert_eq!(zero_recs, stats.idle_records);
        // All idle records must be labeled clean.
        for r in &records {
            if r.iq.iter().all(|&(i, q)| i == 0.0 && q == 0.0) {
                assert_eq!(r.label, 8);
            }
        }
        // Roughly idle_fraction of the 500 clean records.
        assert!(stats.idle_records >= 5 && stats.idle_records <= 60);
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let spec = DatasetSpec::chunk8(13);
        let path = tmp("roundtrip.ds");
        let summary = build_dataset(&spec, 90, &path, "chunk8").unwrap();
        assert_eq!(summary.records, 90);
        let loaded = load_dataset(&path).unwrap();
        assert_eq!(loaded.header.num_records, 90);
        assert_eq!(loaded.header.chunk_len, 32);
        assert_eq!(loaded.header.num_classes, 9);
        let (rebuilt, _) = build_records(&spec, 90).unwrap();
        assert_eq!(loaded.records, rebuilt, "disk round trip must be bit-exact");
        let meta = loaded.meta.expect("sidecar present");
        assert_eq!(meta.preset, "chunk8");
        assert_eq!(meta.class_names.last().unwrap(), "clean");
        assert_eq!(meta.spec, spec);
    }

    #[test]
    fn corrupt_files_give_format_errors() {
        let spec = DatasetSpec::chunk8(17);
        let path = tmp("corrupt.ds");
        build_dataset(&spec, 45, &path, "chunk8").unwrap();
        let bytes = std::fs::read(&path).unwrap();

        // Bad magic.
        let mut bad = bytes.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Format(_))));

        // Wrong version.
        let mut bad = bytes.clone();
        bad[4] = 9;
        std::fs::write(&path, &bad).unwrap();
        let err = read_dataset(&path).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");

        // Truncated mid-record.
        std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Format(_))));

        // Trailing garbage.
        let mut bad = bytes.clone();
        bad.extend_from_slice(&[1, 2, 3]);
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Format(_))));

        // Out-of-range label inside a record (offset: header 28 bytes, first
        // record's label is the next u16).
        let mut bad = bytes;
        bad[28] = 200;
        bad[29] = 0;
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Format(_))));

        assert!(matches!(
            read_dataset(Path::new("/nonexistent/data.ds")),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn day_of_record_rotates_in_cycle_blocks() {
        assert_eq!(day_of_record(0, 9, 20), 0);
        assert_eq!(day_of_record(8, 9, 20), 0);
        assert_eq!(day_of_record(9, 9, 20), 1);
        assert_eq!(day_of_record(9 * 20, 9, 20), 0); // wraps
    }
}
