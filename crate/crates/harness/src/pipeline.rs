//! Stage execution, resumability and the single artifact writer.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use featbounds_core::bounds::BoundsCurves;
use featbounds_core::detectors::{
    detect_dog, detect_harris, emit_csv, ingest_keypoints, parse_csv, DetectorError, KeypointFormat,
};
use featbounds_core::imaging::{encode_pgm, load_image, synthesize_sequence_with, JPEG_CODEC_ID};
use featbounds_core::mcnemar::z_grid;
use featbounds_core::repeatability::{build_matrix, KeypointStore};
use featbounds_core::{Dims, ImageRef, KeypointSet, RepeatabilityMatrix, TransformKind, TransformSpec, ZScoreGrid};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Detector, RunConfig};
use crate::error::{rt, HarnessError, Result};
use crate::heatmap::{heatmap_pgm, legend};
use crate::layout::{
    compare_dir, external_keypoints, image_path, keypoints_path, result_dir, sequence_path, variant_dir, RESULTS_DIR,
    SEQUENCE_FILE,
};
use crate::manifest::{
    json_bytes, load_timings, save_timings, sha256_hex, EvaluationSummary, Manifest, StageRecord, StageTiming,
};
use crate::sequence::SequenceRecord;
use crate::synthetic::{synthetic_scene_id, textured_scene};

pub const TOOL: &str = concat!("featbounds ", env!("CARGO_PKG_VERSION"));
const IMAGE_EXTENSIONS: [&str; 4] = ["pgm", "png", "jpg", "jpeg"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Synthesize,
    Detect,
    Ingest,
    Evaluate,
    Compare,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Self::Synthesize,
        Self::Detect,
        Self::Ingest,
        Self::Evaluate,
        Self::Compare,
        Self::Report,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Synthesize => "synthesize",
            Self::Detect => "detect",
            Self::Ingest => "ingest",
            Self::Evaluate => "evaluate",
            Self::Compare => "compare",
            Self::Report => "report",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageOutcome {
    Ran,
    Skipped,
}

type Artifacts = BTreeMap<String, Vec<u8>>;

/// Writes artifacts in the order it is handed them and records checksums.
struct Emitter {
    out: PathBuf,
    files: BTreeMap<String, String>,
}

impl Emitter {
    fn emit(&mut self, rel: String, bytes: &[u8]) -> Result<()> {
        let path = self.out.join(&rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(HarnessError::io(parent))?;
        }
        std::fs::write(&path, bytes).map_err(HarnessError::io(&path))?;
        self.files.insert(rel, sha256_hex(bytes));
        Ok(())
    }

    fn emit_all(&mut self, artifacts: Artifacts) -> Result<()> {
        for (rel, bytes) in artifacts {
            self.emit(rel, &bytes)?;
        }
        Ok(())
    }
}

enum SceneSource {
    Synthetic(usize),
    File(PathBuf),
}

struct Scene {
    id: String,
    source: SceneSource,
}

fn list_reference_images(root: &Path) -> Result<Vec<Scene>> {
    let mut scenes = Vec::new();
    for entry in std::fs::read_dir(root).map_err(HarnessError::io(root))? {
        let path = entry.map_err(HarnessError::io(root))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        if !path.is_file() || !IMAGE_EXTENSIONS.contains(&ext.as_str()) {
            continue;
        }
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        if !crate::config::valid_id(&id) {
            return Err(HarnessError::Validation(format!(
                "{}: file stem is not a usable scene id",
                path.display()
            )));
        }
        scenes.push(Scene {
            id,
            source: SceneSource::File(path),
        });
    }
    scenes.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = scenes.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(HarnessError::Validation(format!(
            "two reference images share scene id {:?}",
            w[0].id
        )));
    }
    if scenes.is_empty() {
        return Err(HarnessError::Validation(format!(
            "no reference images in {}",
            root.display()
        )));
    }
    Ok(scenes)
}

fn files_intact(out: &Path, files: &BTreeMap<String, String>) -> bool {
    files
        .iter()
        .all(|(rel, hash)| std::fs::read(out.join(rel)).is_ok_and(|b| sha256_hex(&b) == *hash))
}

fn read(out: &Path, rel: &str) -> Result<Vec<u8>> {
    let path = out.join(rel);
    std::fs::read(&path).map_err(HarnessError::io(path))
}

pub struct Session {
    config: RunConfig,
    out: PathBuf,
    jobs: usize,
    pool: rayon::ThreadPool,
    manifest: Manifest,
    timings: BTreeMap<String, StageTiming>,
}

impl Session {
    /// Validates the configuration and picks up an existing manifest, if any.
    /// Nothing is written until a stage runs.
    pub fn open(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let jobs = config
            .output
            .jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(rt("thread pool"))?;
        let out = config.output.dir.clone();
        let mut manifest = Manifest::load(&out)?.unwrap_or_default();
        manifest.tool = TOOL.to_string();
        manifest.codec = JPEG_CODEC_ID.to_string();
        manifest.config = config.echo();
        let timings = load_timings(&out);
        Ok(Self {
            config,
            out,
            jobs,
            pool,
            manifest,
            timings,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn out(&self) -> &Path {
        &self.out
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn timings(&self) -> &BTreeMap<String, StageTiming> {
        &self.timings
    }

    /// Every stage in order.
    pub fn run_all(&mut self) -> Result<Vec<(Stage, StageOutcome)>> {
        Stage::ALL.iter().map(|&s| self.run_stage(s).map(|o| (s, o))).collect()
    }

    fn has_builtin(&self) -> bool {
        self.config.detectors.iter().any(|d| !d.is_external())
    }

    fn has_external(&self) -> bool {
        self.config.detectors.iter().any(|d| d.is_external())
    }

    fn upstream(&self, stage: Stage) -> Vec<Stage> {
        match stage {
            Stage::Synthesize => vec![],
            Stage::Detect | Stage::Ingest => vec![Stage::Synthesize],
            Stage::Evaluate => {
                let mut v = vec![Stage::Synthesize];
                if self.has_builtin() {
                    v.push(Stage::Detect);
                }
                if self.has_external() {
                    v.push(Stage::Ingest);
                }
                v
            }
            Stage::Compare => vec![Stage::Evaluate],
            Stage::Report => vec![Stage::Evaluate, Stage::Compare],
        }
    }

    fn record(&self, stage: Stage) -> Result<&StageRecord> {
        self.manifest
            .stages
            .get(stage.name())
            .ok_or_else(|| HarnessError::Runtime(format!("stage `{}` has not run yet", stage.name())))
    }

    fn specs(&self) -> Result<Vec<TransformSpec>> {
        self.config
            .transforms
            .kinds
            .iter()
            .map(|&k| self.config.transforms.spec(k))
            .collect()
    }

    fn scenes(&self) -> Result<Vec<Scene>> {
        let db = &self.config.database;
        match &db.scenes_root {
            Some(root) => list_reference_images(root),
            None => Ok((0..db.synthetic_scenes)
                .map(|i| Scene {
                    id: synthetic_scene_id(i),
                    source: SceneSource::Synthetic(i),
                })
                .collect()),
        }
    }

    fn chunk_len(&self) -> usize {
        self.jobs * 2
    }

    /// Stage-specific parameters that feed the resumability digest.
    fn stage_params(&self, stage: Stage) -> Result<serde_json::Value> {
        let kinds = &self.config.transforms.kinds;
        let ids: Vec<&str> = self.config.detectors.iter().map(|d| d.id.as_str()).collect();
        Ok(match stage {
            Stage::Synthesize => {
                let mut references = Vec::new();
                for s in self.scenes()? {
                    references.push(match &s.source {
                        SceneSource::Synthetic(i) => json!({"id": s.id, "synthetic": i}),
                        SceneSource::File(p) => {
                            let bytes = std::fs::read(p).map_err(HarnessError::io(p))?;
                            json!({"id": s.id, "sha256": sha256_hex(&bytes)})
                        }
                    });
                }
                let specs: Vec<_> = self
                    .specs()?
                    .iter()
                    .map(|s| json!({"kind": s.kind(), "amounts": s.amounts()}))
                    .collect();
                json!({
                    "database": self.config.database,
                    "references": references,
                    "transforms": specs,
                    "blur_mode": self.config.transforms.blur_mode,
                })
            }
            Stage::Detect => {
                let builtin: Vec<_> = self.config.detectors.iter().filter(|d| !d.is_external()).collect();
                json!({"detectors": builtin})
            }
            Stage::Ingest => {
                let mut inputs = BTreeMap::new();
                let externals = self.externals()?;
                let seqs = if externals.is_empty() {
                    vec![]
                } else {
                    self.sequences()?
                };
                for (id, dir, format) in externals {
                    for seq in &seqs {
                        for v in &seq.variants {
                            let path = external_keypoints(&dir, &seq.scene_id, seq.transform, v.amount, format);
                            let hash = std::fs::read(&path).ok().map(|b| sha256_hex(&b));
                            inputs.insert(format!("{id}:{}", path.display()), hash);
                        }
                    }
                }
                let external: Vec<_> = self.config.detectors.iter().filter(|d| d.is_external()).collect();
                json!({"detectors": external, "inputs": inputs})
            }
            Stage::Evaluate => json!({"evaluation": self.config.evaluation, "detectors": ids, "kinds": kinds}),
            Stage::Compare => json!({
                "thresholds": self.config.comparison.thresholds,
                "pairs": self.config.pairs(),
                "kinds": kinds,
            }),
            Stage::Report => json!({"detectors": ids, "kinds": kinds, "pairs": self.config.pairs()}),
        })
    }

    fn inputs_digest(&self, stage: Stage) -> Result<String> {
        let mut upstream = BTreeMap::new();
        for u in self.upstream(stage) {
            let rec = self.record(u).map_err(|_| {
                HarnessError::Runtime(format!(
                    "stage `{}` needs `{}` to have run first",
                    stage.name(),
                    u.name()
                ))
            })?;
            let inventory = serde_json::to_vec(&rec.files).expect("inventory serializes");
            upstream.insert(u.name(), sha256_hex(&inventory));
        }
        let inputs = json!({
            "stage": stage.name(),
            "tool": TOOL,
            "codec": JPEG_CODEC_ID,
            "params": self.stage_params(stage)?,
            "upstream": upstream,
        });
        Ok(sha256_hex(
            &serde_json::to_vec(&inputs).expect("digest inputs serialize"),
        ))
    }

    /// Runs one stage unless its recorded inputs digest matches and every
    /// file it produced is still intact.
    pub fn run_stage(&mut self, stage: Stage) -> Result<StageOutcome> {
        let start = Instant::now();
        let digest = self.inputs_digest(stage)?;
        if let Some(prev) = self.manifest.stages.get(stage.name()) {
            if prev.inputs_digest == digest && files_intact(&self.out, &prev.files) {
                log::info!("{}: up to date", stage.name());
                self.finish(stage, start, true)?;
                return Ok(StageOutcome::Skipped);
            }
        }
        log::info!("{}: running", stage.name());
        std::fs::create_dir_all(&self.out).map_err(HarnessError::io(&self.out))?;
        let mut em = Emitter {
            out: self.out.clone(),
            files: BTreeMap::new(),
        };
        let mut evaluations = BTreeMap::new();
        match stage {
            Stage::Synthesize => self.synthesize(&mut em)?,
            Stage::Detect => self.detect(&mut em)?,
            Stage::Ingest => self.ingest(&mut em)?,
            Stage::Evaluate => self.evaluate(&mut em, &mut evaluations)?,
            Stage::Compare => self.compare(&mut em)?,
            Stage::Report => self.report(&mut em)?,
        }
        if let Some(prev) = self.manifest.stages.get(stage.name()) {
            for stale in prev.files.keys().filter(|p| !em.files.contains_key(*p)) {
                let path = self.out.join(stale);
                match std::fs::remove_file(&path) {
                    Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(HarnessError::io(path)(e)),
                    _ => {}
                }
            }
        }
        self.manifest.stages.insert(
            stage.name().to_string(),
            StageRecord {
                inputs_digest: digest,
                files: em.files,
                evaluations,
            },
        );
        self.finish(stage, start, false)?;
        Ok(StageOutcome::Ran)
    }

    fn finish(&mut self, stage: Stage, start: Instant, skipped: bool) -> Result<()> {
        self.timings.insert(
            stage.name().to_string(),
            StageTiming {
                seconds: start.elapsed().as_secs_f64(),
                skipped,
            },
        );
        std::fs::create_dir_all(&self.out).map_err(HarnessError::io(&self.out))?;
        self.manifest.save(&self.out)?;
        save_timings(&self.out, &self.timings)
    }

    /// Sequence records for the configured transforms, ordered by scene then transform.
    fn sequences(&self) -> Result<Vec<SequenceRecord>> {
        let rec = self.record(Stage::Synthesize)?;
        let mut seqs = Vec::new();
        for rel in rec.files.keys().filter(|p| p.ends_with(SEQUENCE_FILE)) {
            let seq = SequenceRecord::parse(&read(&self.out, rel)?, rel)?;
            if self.config.transforms.kinds.contains(&seq.transform) {
                seqs.push(seq);
            }
        }
        for &kind in &self.config.transforms.kinds {
            if !seqs.iter().any(|s| s.transform == kind) {
                return Err(HarnessError::Runtime(format!(
                    "no {kind} sequences on disk; rerun `synthesize`"
                )));
            }
        }
        Ok(seqs)
    }

    fn externals(&self) -> Result<Vec<(String, PathBuf, KeypointFormat)>> {
        let mut out = Vec::new();
        for d in &self.config.detectors {
            if let Detector::External { dir, format } = d.resolve()? {
                out.push((d.id.clone(), dir, format));
            }
        }
        Ok(out)
    }

    /// Runs `work` over `items` on the pool, a bounded chunk at a time, and
    /// hands each result to the writer in input order.
    fn fan_out<I: Sync>(
        &self,
        items: &[I],
        em: &mut Emitter,
        work: impl Fn(&I) -> Result<Artifacts> + Sync,
    ) -> Result<()> {
        for group in items.chunks(self.chunk_len()) {
            let produced: Vec<Artifacts> = self
                .pool
                .install(|| group.par_iter().map(&work).collect::<Result<_>>())?;
            for artifacts in produced {
                em.emit_all(artifacts)?;
            }
        }
        Ok(())
    }

    fn synthesize(&self, em: &mut Emitter) -> Result<()> {
        let specs = self.specs()?;
        let db = &self.config.database;
        let mode = self.config.transforms.blur_mode;
        self.fan_out(&self.scenes()?, em, |scene| {
            let reference = match &scene.source {
                SceneSource::Synthetic(i) => textured_scene(db.seed, *i, db.width, db.height),
                SceneSource::File(p) => load_image(p).map_err(rt(p.display()))?,
            };
            let mut artifacts = Artifacts::new();
            for spec in &specs {
                let kind = spec.kind();
                let seq = synthesize_sequence_with(&reference, spec, &scene.id, mode)
                    .map_err(rt(format!("{}/{kind}", scene.id)))?;
                for v in &seq.variants {
                    let bytes = match &v.jpeg_bytes {
                        Some(b) => b.clone(),
                        None => encode_pgm(&v.image),
                    };
                    artifacts.insert(image_path(&scene.id, kind, v.amount), bytes);
                }
                let record = SequenceRecord::from_sequence(&seq, mode);
                artifacts.insert(sequence_path(&scene.id, kind), json_bytes(&record));
            }
            Ok(artifacts)
        })
    }

    fn detect(&self, em: &mut Emitter) -> Result<()> {
        let mut builtin = Vec::new();
        for d in &self.config.detectors {
            match d.resolve()? {
                Detector::External { .. } => {}
                det => builtin.push((d.id.clone(), det)),
            }
        }
        if builtin.is_empty() {
            return Ok(());
        }
        self.fan_out(&self.sequences()?, em, |seq| {
            let mut artifacts = Artifacts::new();
            for (k, v) in seq.variants.iter().enumerate() {
                let rel = format!("{}/{}", variant_dir(&seq.scene_id, seq.transform, v.amount), v.image);
                let img = load_image(self.out.join(&rel)).map_err(rt(&rel))?;
                if img.dims() != Dims::new(v.width, v.height) {
                    return Err(HarnessError::Invariant(format!(
                        "{rel} is {}x{}, sequence record says {}x{}",
                        img.width(),
                        img.height(),
                        v.width,
                        v.height
                    )));
                }
                let image_ref = ImageRef {
                    scene_id: seq.scene_id.clone(),
                    variant: k,
                };
                for (id, det) in &builtin {
                    let set: KeypointSet<f64> = match det {
                        Detector::Harris(p) => detect_harris(&img, p, image_ref.clone()),
                        Detector::Dog(p) => detect_dog(&img, p, image_ref.clone()),
                        Detector::External { .. } => unreachable!("filtered above"),
                    }
                    .map_err(rt(format!("{id} on {rel}")))?;
                    artifacts.insert(
                        keypoints_path(&seq.scene_id, seq.transform, v.amount, id),
                        emit_csv(&set.points).into_bytes(),
                    );
                }
            }
            Ok(artifacts)
        })
    }

    fn ingest(&self, em: &mut Emitter) -> Result<()> {
        let externals = self.externals()?;
        if externals.is_empty() {
            return Ok(());
        }
        self.fan_out(&self.sequences()?, em, |seq| {
            let mut artifacts = Artifacts::new();
            for (id, dir, format) in &externals {
                for (k, v) in seq.variants.iter().enumerate() {
                    let path = external_keypoints(dir, &seq.scene_id, seq.transform, v.amount, *format);
                    let image_ref = ImageRef {
                        scene_id: seq.scene_id.clone(),
                        variant: k,
                    };
                    let set = ingest_keypoints::<f64>(&path, *format, image_ref, id).map_err(|e| match e {
                        DetectorError::Io { .. } => {
                            HarnessError::Validation(format!("detector {id}: missing keypoint file {}", path.display()))
                        }
                        other => HarnessError::Validation(format!("detector {id}: {other}")),
                    })?;
                    set.check_bounds(Dims::new(v.width, v.height))
                        .map_err(|e| HarnessError::Validation(format!("detector {id}: {}: {e}", path.display())))?;
                    artifacts.insert(
                        keypoints_path(&seq.scene_id, seq.transform, v.amount, id),
                        emit_csv(&set.points).into_bytes(),
                    );
                }
            }
            Ok(artifacts)
        })
    }

    fn load_keypoints(&self, seqs: &[&SequenceRecord], detector_id: &str) -> Result<KeypointStore<f64>> {
        let per_scene: Vec<Vec<(ImageRef, KeypointSet<f64>)>> = self.pool.install(|| {
            seqs.par_iter()
                .map(|seq| {
                    seq.variants
                        .iter()
                        .enumerate()
                        .map(|(k, v)| {
                            let rel = keypoints_path(&seq.scene_id, seq.transform, v.amount, detector_id);
                            let text = String::from_utf8(read(&self.out, &rel)?).map_err(rt(&rel))?;
                            let points = parse_csv(&text).map_err(rt(&rel))?;
                            let image_ref = ImageRef {
                                scene_id: seq.scene_id.clone(),
                                variant: k,
                            };
                            Ok((image_ref.clone(), KeypointSet::new(image_ref, detector_id, points)))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()
        })?;
        Ok(per_scene.into_iter().flatten().collect())
    }

    fn evaluate(&self, em: &mut Emitter, summaries: &mut BTreeMap<String, EvaluationSummary>) -> Result<()> {
        let criterion = self.config.evaluation.criterion()?;
        let seqs = self.sequences()?;
        for &kind in &self.config.transforms.kinds {
            let kind_seqs: Vec<&SequenceRecord> = seqs.iter().filter(|s| s.transform == kind).collect();
            let geometry = kind_seqs.iter().map(|s| s.geometry()).collect::<Result<Vec<_>>>()?;
            for det in &self.config.detectors {
                let key = format!("{kind}/{}", det.id);
                let store = self.load_keypoints(&kind_seqs, &det.id)?;
                let matrix = self
                    .pool
                    .install(|| build_matrix(&geometry, &store, &criterion, &det.id, kind))
                    .map_err(rt(&key))?;
                if let Some(i) = (0..matrix.n_scenes()).find(|&i| matrix.get(i, 0) != 1.0) {
                    return Err(HarnessError::Invariant(format!(
                        "{key}: scene {} scores {} against itself",
                        matrix.scene_ids()[i],
                        matrix.get(i, 0)
                    )));
                }
                let curves = BoundsCurves::from_matrix(&matrix).map_err(rt(&key))?;
                let dir = result_dir(kind, &det.id);
                let summary = EvaluationSummary {
                    transform: kind.to_string(),
                    detector: det.id.clone(),
                    scenes: matrix.n_scenes(),
                    excluded: matrix.excluded().to_vec(),
                    operating_area: curves.operating_area,
                    guarantee_area: curves.guarantee_area,
                };
                em.emit(format!("{dir}/matrix.csv"), matrix.to_csv().as_bytes())?;
                em.emit(format!("{dir}/excluded.json"), &json_bytes(&matrix.excluded()))?;
                em.emit(format!("{dir}/curves.csv"), curves.to_csv().as_bytes())?;
                em.emit(format!("{dir}/summary.json"), &json_bytes(&summary))?;
                if !summary.excluded.is_empty() {
                    log::warn!(
                        "{key}: excluded scenes without reference points: {:?}",
                        summary.excluded
                    );
                }
                summaries.insert(key, summary);
            }
        }
        Ok(())
    }

    fn load_matrix(&self, kind: TransformKind, detector_id: &str) -> Result<RepeatabilityMatrix<f64>> {
        let dir = result_dir(kind, detector_id);
        let excluded_rel = format!("{dir}/excluded.json");
        let excluded: Vec<String> =
            serde_json::from_slice(&read(&self.out, &excluded_rel)?).map_err(rt(&excluded_rel))?;
        let matrix_rel = format!("{dir}/matrix.csv");
        let text = String::from_utf8(read(&self.out, &matrix_rel)?).map_err(rt(&matrix_rel))?;
        RepeatabilityMatrix::from_csv(&text, detector_id, kind, excluded).map_err(rt(&matrix_rel))
    }

    fn grids(&self) -> Result<Vec<ZScoreGrid<f64>>> {
        let mut grids = Vec::new();
        for &kind in &self.config.transforms.kinds {
            for (a, b) in self.config.pairs() {
                let ma = self.load_matrix(kind, &a)?;
                let mb = self.load_matrix(kind, &b)?;
                let grid =
                    z_grid(&ma, &mb, &self.config.comparison.thresholds).map_err(rt(format!("{kind}: {a} vs {b}")))?;
                grids.push(grid);
            }
        }
        Ok(grids)
    }

    fn compare(&self, em: &mut Emitter) -> Result<()> {
        for grid in self.grids()? {
            let dir = compare_dir(grid.kind, &grid.detector_a, &grid.detector_b);
            em.emit(format!("{dir}/grid.csv"), grid.to_csv().as_bytes())?;
            em.emit(format!("{dir}/heatmap.pgm"), &heatmap_pgm(&grid))?;
            em.emit(format!("{dir}/heatmap.json"), &json_bytes(&legend(&grid)))?;
        }
        Ok(())
    }

    fn report(&self, em: &mut Emitter) -> Result<()> {
        let evaluations = &self.record(Stage::Evaluate)?.evaluations;
        let mut areas = String::from("transform,detector,scenes,excluded,operating_area,guarantee_area\n");
        for &kind in &self.config.transforms.kinds {
            for det in &self.config.detectors {
                let s = evaluations.get(&format!("{kind}/{}", det.id)).ok_or_else(|| {
                    HarnessError::Runtime(format!("no evaluation for {kind}/{}; rerun `evaluate`", det.id))
                })?;
                let _ = writeln!(
                    areas,
                    "{kind},{},{},{},{},{}",
                    det.id,
                    s.scenes,
                    s.excluded.len(),
                    s.operating_area,
                    s.guarantee_area
                );
            }
        }
        em.emit(format!("{RESULTS_DIR}/report.csv"), areas.as_bytes())?;

        let mut comparisons = String::from("transform,detector_a,detector_b,scenes,cells,reliable,a_better,b_better\n");
        for g in self.grids()? {
            let reliable: Vec<_> = g.cells().iter().filter(|c| c.reliable).collect();
            let _ = writeln!(
                comparisons,
                "{},{},{},{},{},{},{},{}",
                g.kind,
                g.detector_a,
                g.detector_b,
                g.scene_ids.len(),
                g.cells().len(),
                reliable.len(),
                reliable.iter().filter(|c| c.z > 0.0).count(),
                reliable.iter().filter(|c| c.z < 0.0).count()
            );
        }
        em.emit(format!("{RESULTS_DIR}/comparisons.csv"), comparisons.as_bytes())
    }
}
