//! Monte Carlo runner: frames per channel point, every requested detector
//! scored on the same frames, aggregated into per-point records.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use icacdma_core::channel::{synthesize, LinkScenario, NoiseKind};
use icacdma_core::codes::GoldCodeSet;
use icacdma_core::detectors::{
    combine, ica_detect, sud_detect_users, symbol_error_rate, MIN_PILOTS,
};
use icacdma_core::ica::{Algorithm, IcaConfig};
use icacdma_core::rng::{derive, mix64};
use icacdma_core::{Error, Result};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Detector {
    Sud,
    Ica,
    SudIca,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::Sud, Detector::Ica, Detector::SudIca];

    pub fn name(self) -> &'static str {
        match self {
            Detector::Sud => "sud",
            Detector::Ica => "ica",
            Detector::SudIca => "sudica",
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sud" => Ok(Detector::Sud),
            "ica" => Ok(Detector::Ica),
            "sudica" | "sud-ica" | "ica-sud" => Ok(Detector::SudIca),
            _ => Err(Error::InvalidConfig(format!("unknown detector {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    /// One scenario per (channel point, algorithm); `seed` and the ICA seed
    /// are replaced per run.
    pub scenarios: Vec<LinkScenario>,
    pub runs_per_point: usize,
    pub detectors: Vec<Detector>,
    pub base_seed: u64,
    pub pilot_symbols: usize,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.runs_per_point == 0 {
            return Err(Error::InvalidConfig("runs_per_point must be at least 1".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::InvalidConfig("the plan has no scenarios".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::InvalidConfig("the plan has no detectors".into()));
        }
        if self.pilot_symbols < MIN_PILOTS {
            return Err(Error::InvalidConfig(format!(
                "pilot_symbols must be at least {MIN_PILOTS}, got {}",
                self.pilot_symbols
            )));
        }
        for sc in &self.scenarios {
            sc.validate()?;
            if self.pilot_symbols >= sc.symbols {
                return Err(Error::InvalidConfig(format!(
                    "{} pilot symbols leave nothing to score in a {}-symbol frame",
                    self.pilot_symbols, sc.symbols
                )));
            }
        }
        Ok(())
    }
}

/// The part of a scenario that determines the frames.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelKey {
    pub noise: NoiseKind,
    pub snr_db: f64,
    pub symbols: usize,
    pub users: usize,
    pub chips: usize,
}

impl ChannelKey {
    pub fn of(sc: &LinkScenario) -> Self {
        Self {
            noise: sc.noise,
            snr_db: sc.snr_db,
            symbols: sc.symbols,
            users: sc.users,
            chips: sc.chips,
        }
    }

    /// Canonical order: noise, frame length, users, chips, SNR.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.noise
            .name()
            .cmp(other.noise.name())
            .then(self.symbols.cmp(&other.symbols))
            .then(self.users.cmp(&other.users))
            .then(self.chips.cmp(&other.chips))
            .then(self.snr_db.total_cmp(&other.snr_db))
    }

    fn same(&self, other: &Self) -> bool {
        self.canonical_cmp(other) == Ordering::Equal
    }

    /// Seed of frame `run` at this point. Depends only on the channel, so
    /// every algorithm and detector sees the same frames, and adding points
    /// never moves the streams of existing ones.
    pub fn frame_seed(&self, base_seed: u64, run: usize) -> u64 {
        let mut h = mix64(base_seed);
        for word in [
            self.noise as u64,
            self.snr_db.to_bits(),
            self.symbols as u64,
            self.users as u64,
            self.chips as u64,
            run as u64,
        ] {
            h = mix64(h ^ word);
        }
        h
    }
}

const ICA_INIT_TAG: u64 = 0x1CA_5EED;

#[derive(Clone, Debug, PartialEq)]
pub struct PointRecord {
    pub key: ChannelKey,
    pub detector: Detector,
    /// `None` for the matched filter, which no separation algorithm touches.
    pub algorithm: Option<Algorithm>,
    pub runs: usize,
    /// Runs whose SER entered the mean.
    pub scored_runs: usize,
    /// ICA runs that failed and were left out of the ICA mean.
    pub failed_runs: usize,
    /// SUD-ICA runs that fell back to the matched filter.
    pub fallback_runs: usize,
    pub mean_ser: Option<f64>,
    pub ser_stderr: Option<f64>,
    pub mean_iterations: Option<f64>,
    /// Summed compute time of this point's runs. Work shared between
    /// records (frame synthesis, separation) is booked on one of them, so
    /// the report total is the plan's compute time.
    pub wallclock_s: f64,
}

impl PointRecord {
    pub fn algorithm_name(&self) -> &'static str {
        self.algorithm.map_or("none", Algorithm::name)
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.key
            .canonical_cmp(&other.key)
            .then(self.algorithm_name().cmp(other.algorithm_name()))
            .then(self.detector.name().cmp(other.detector.name()))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SerReport {
    pub records: Vec<PointRecord>,
}

impl SerReport {
    /// The record for a point, if present. SUD ignores `algorithm`.
    pub fn find(
        &self,
        noise: NoiseKind,
        snr_db: f64,
        symbols: usize,
        detector: Detector,
        algorithm: Option<Algorithm>,
    ) -> Option<&PointRecord> {
        let algorithm = if detector == Detector::Sud { None } else { algorithm };
        self.records.iter().find(|r| {
            r.key.noise == noise
                && r.key.snr_db == snr_db
                && r.key.symbols == symbols
                && r.detector == detector
                && r.algorithm == algorithm
        })
    }

    pub fn total_wallclock_s(&self) -> f64 {
        self.records.iter().map(|r| r.wallclock_s).sum()
    }
}

/// Sample mean and standard error `s/√n` (`None` below two samples).
pub fn mean_and_stderr(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

/// Outcome of one frame at one channel point.
struct FrameOutcome {
    sud_ser: f64,
    sud_seconds: f64,
    /// Per requested algorithm, in plan order.
    ica: Vec<IcaOutcome>,
}

struct IcaOutcome {
    failed: bool,
    ica_ser: f64,
    sudica_ser: f64,
    iterations: Option<f64>,
    separation_seconds: f64,
    combine_seconds: f64,
}

struct Point {
    template: LinkScenario,
    algorithms: Vec<IcaConfig>,
}

fn group_points(plan: &ExperimentPlan) -> Vec<Point> {
    let mut points: Vec<Point> = Vec::new();
    for sc in &plan.scenarios {
        let key = ChannelKey::of(sc);
        match points.iter_mut().find(|p| ChannelKey::of(&p.template).same(&key)) {
            Some(p) => {
                if !p.algorithms.iter().any(|a| a.algorithm == sc.algorithm.algorithm) {
                    p.algorithms.push(sc.algorithm);
                }
            }
            None => points.push(Point {
                template: sc.clone(),
                algorithms: vec![sc.algorithm],
            }),
        }
    }
    points.sort_by(|a, b| ChannelKey::of(&a.template).canonical_cmp(&ChannelKey::of(&b.template)));
    points
}

fn run_frame(
    point: &Point,
    run: usize,
    plan: &ExperimentPlan,
    codes: &GoldCodeSet,
    need_ica: bool,
) -> Result<FrameOutcome> {
    let started = Instant::now();
    let key = ChannelKey::of(&point.template);
    let seed = key.frame_seed(plan.base_seed, run);
    let scenario = LinkScenario {
        seed,
        ..point.template.clone()
    };
    let frame = synthesize(&scenario, codes)?;
    let skip = plan.pilot_symbols;
    let sud = sud_detect_users(&frame.received, codes, scenario.users)?;
    let sud_ser = symbol_error_rate(&sud.hard_symbols, &frame.symbols, skip)?;
    let sud_seconds = started.elapsed().as_secs_f64();

    let mut ica = Vec::new();
    if need_ica {
        let pilots = frame.symbols.column_range(0, skip);
        for cfg in &point.algorithms {
            let started = Instant::now();
            let cfg = cfg.with_seed(derive(seed, ICA_INIT_TAG));
            let out = ica_detect(&frame.received, codes, &cfg, &pilots)?;
            let ica_ser = symbol_error_rate(&out.hard_symbols, &frame.symbols, skip)?;
            let separation_seconds = started.elapsed().as_secs_f64();
            let started = Instant::now();
            let merged = combine(&sud, &out)?;
            let sudica_ser = symbol_error_rate(&merged.hard_symbols, &frame.symbols, skip)?;
            ica.push(IcaOutcome {
                failed: out.failed,
                ica_ser,
                sudica_ser,
                iterations: out.ica_iterations,
                separation_seconds,
                combine_seconds: started.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(FrameOutcome {
        sud_ser,
        sud_seconds,
        ica,
    })
}

fn aggregate(point: &Point, outcomes: &[FrameOutcome], detectors: &[Detector]) -> Vec<PointRecord> {
    let key = ChannelKey::of(&point.template);
    let runs = outcomes.len();
    let mut records = Vec::new();
    let base = |detector, algorithm| PointRecord {
        key,
        detector,
        algorithm,
        runs,
        scored_runs: 0,
        failed_runs: 0,
        fallback_runs: 0,
        mean_ser: None,
        ser_stderr: None,
        mean_iterations: None,
        wallclock_s: 0.0,
    };

    if detectors.contains(&Detector::Sud) {
        let sers: Vec<f64> = outcomes.iter().map(|o| o.sud_ser).collect();
        let (mean, se) = mean_and_stderr(&sers);
        records.push(PointRecord {
            scored_runs: runs,
            mean_ser: mean,
            ser_stderr: se,
            wallclock_s: outcomes.iter().map(|o| o.sud_seconds).sum(),
            ..base(Detector::Sud, None)
        });
    }
    let with_separation = detectors.iter().any(|d| *d != Detector::Sud);
    for (a, cfg) in point.algorithms.iter().enumerate() {
        if !with_separation {
            break;
        }
        let per_run: Vec<&IcaOutcome> = outcomes.iter().map(|o| &o.ica[a]).collect();
        let failed = per_run.iter().filter(|o| o.failed).count();
        let iterations: Vec<f64> = per_run.iter().filter_map(|o| o.iterations).collect();
        let mean_iterations = mean_and_stderr(&iterations).0;
        let separation: f64 = per_run.iter().map(|o| o.separation_seconds).sum();
        let merging: f64 = per_run.iter().map(|o| o.combine_seconds).sum();
        let with_ica = detectors.contains(&Detector::Ica);
        if with_ica {
            let sers: Vec<f64> = per_run.iter().filter(|o| !o.failed).map(|o| o.ica_ser).collect();
            let (mean, se) = mean_and_stderr(&sers);
            records.push(PointRecord {
                scored_runs: sers.len(),
                failed_runs: failed,
                mean_ser: mean,
                ser_stderr: se,
                mean_iterations,
                wallclock_s: separation,
                ..base(Detector::Ica, Some(cfg.algorithm))
            });
        }
        if detectors.contains(&Detector::SudIca) {
            let sers: Vec<f64> = per_run.iter().map(|o| o.sudica_ser).collect();
            let (mean, se) = mean_and_stderr(&sers);
            records.push(PointRecord {
                scored_runs: runs,
                fallback_runs: failed,
                mean_ser: mean,
                ser_stderr: se,
                mean_iterations,
                // Separation is booked once, on the ICA record when there is one.
                wallclock_s: if with_ica { merging } else { separation + merging },
                ..base(Detector::SudIca, Some(cfg.algorithm))
            });
        }
    }
    if !detectors.contains(&Detector::Sud) {
        // Frame synthesis is otherwise booked on the SUD record.
        if let Some(first) = records.first_mut() {
            first.wallclock_s += outcomes.iter().map(|o| o.sud_seconds).sum::<f64>();
        }
    }
    records
}

/// Run every point of `plan`. The frames of a point run in parallel on the
/// current rayon pool; the report is identical for any thread count.
pub fn run_plan(plan: &ExperimentPlan) -> Result<SerReport> {
    plan.validate()?;
    let codes = GoldCodeSet::standard();
    let points = group_points(plan);
    let need_ica = plan.detectors.iter().any(|d| *d != Detector::Sud);
    let runs = plan.runs_per_point;

    let mut records = Vec::new();
    for point in &points {
        let outcomes: Vec<FrameOutcome> = (0..runs)
            .into_par_iter()
            .map(|r| run_frame(point, r, plan, &codes, need_ica))
            .collect::<Result<_>>()?;
        let point_records = aggregate(point, &outcomes, &plan.detectors);
        for r in &point_records {
            log::info!(
                "{} snr={} M={} {}/{}: ser={} failed={} ({:.1}s)",
                r.key.noise,
                r.key.snr_db,
                r.key.symbols,
                r.detector,
                r.algorithm_name(),
                r.mean_ser.map_or("n/a".to_string(), |v| format!("{v:.5}")),
                r.failed_runs,
                r.wallclock_s
            );
        }
        records.extend(point_records);
    }
    records.sort_by(PointRecord::canonical_cmp);
    Ok(SerReport { records })
}

/// Run a single scenario (one algorithm). Frames match those [`run_plan`]
/// draws for the same channel point and base seed.
pub fn run_point(
    scenario: &LinkScenario,
    runs: usize,
    detectors: &[Detector],
    base_seed: u64,
    pilot_symbols: usize,
) -> Result<Vec<PointRecord>> {
    let plan = ExperimentPlan {
        scenarios: vec![scenario.clone()],
        runs_per_point: runs,
        detectors: detectors.to_vec(),
        base_seed,
        pilot_symbols,
    };
    Ok(run_plan(&plan)?.records)
}
