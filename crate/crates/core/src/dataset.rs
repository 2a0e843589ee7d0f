//! Labeled dataset construction, min-max scaling, stratified splitting and
//! the on-disk CSV / manifest formats.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    Baseline, FeatureExtractor, FeatureVector, MachineSignals, Observation, SpectralSettings,
    FEATURE_NAMES,
};
use crate::mlc::{MachineClass, Severity, SeverityChart};
use crate::sigsim::{
    derive_seed, gen_current, gen_vibration, inject_disturbances, FaultCondition, MachineConfig,
    NoiseSpec, Timebase,
};

pub const LABEL_NAMES: [&str; 2] = ["isUnbalance", "isMisalignment"];
pub const SEVERITY_COLUMN: &str = "Severity";
pub const VIBRATION_COLUMNS: [&str; 2] = ["vibRmsGen", "vibRmsMot"];
pub const DEFAULT_PER_CONDITION: usize = 15;
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub id: usize,
    pub features: FeatureVector,
    pub is_unbalance: u8,
    pub is_misalignment: u8,
    pub severity: Severity,
    /// Time-domain vibration RMS of both machines, mm/s, when known.
    #[serde(default)]
    pub vibration_rms_mm_s: Option<[f64; 2]>,
}

impl LabeledSample {
    pub fn labels(&self) -> Vec<u8> {
        vec![self.is_unbalance, self.is_misalignment]
    }

    fn joint_label(&self) -> u8 {
        self.is_unbalance * 2 + self.is_misalignment
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(samples: Vec<LabeledSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("dataset has no samples"));
        }
        let mut ids = HashSet::new();
        for s in &samples {
            if !ids.insert(s.id) {
                return Err(Error::invalid(format!("duplicate sample id {}", s.id)));
            }
            if s.is_unbalance > 1 || s.is_misalignment > 1 {
                return Err(Error::invalid(format!(
                    "sample {}: labels must be 0 or 1",
                    s.id
                )));
            }
        }
        Ok(Self {
            samples,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn x(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| s.features.values.clone())
            .collect()
    }

    pub fn y(&self) -> Vec<Vec<u8>> {
        self.samples.iter().map(LabeledSample::labels).collect()
    }

    pub fn severities(&self) -> Vec<Severity> {
        self.samples.iter().map(|s| s.severity).collect()
    }

    /// Vibration RMS rows for the severity tree.
    pub fn vibration_matrix(&self) -> Result<Vec<Vec<f64>>> {
        self.samples
            .iter()
            .map(|s| {
                s.vibration_rms_mm_s
                    .map(|v| v.to_vec())
                    .ok_or_else(|| Error::invalid(format!("sample {} has no vibration RMS", s.id)))
            })
            .collect()
    }

    /// Samples with the given ids, in the order given.
    pub fn subset(&self, ids: &[usize]) -> Result<Dataset> {
        let by_id: BTreeMap<usize, &LabeledSample> =
            self.samples.iter().map(|s| (s.id, s)).collect();
        let samples = ids
            .iter()
            .map(|id| {
                by_id
                    .get(id)
                    .map(|s| (*s).clone())
                    .ok_or_else(|| Error::invalid(format!("no sample with id {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            samples,
            feature_names: self.feature_names.clone(),
        })
    }

    pub fn ids(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.id).collect()
    }
}

/// One simulated operating condition. Current amplitudes are relative to the
/// supply fundamental; vibration amplitudes are mm/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub current_fault: FaultCondition,
    pub vibration_fault: FaultCondition,
}

impl Scenario {
    pub fn is_unbalance(&self) -> u8 {
        u8::from(self.current_fault.unbalance_on)
    }

    pub fn is_misalignment(&self) -> u8 {
        u8::from(self.current_fault.misalignment_on)
    }

    /// Healthy, unbalance, misalignment and combined conditions.
    pub fn default_set() -> Vec<Scenario> {
        let (ui, mi, w) = (0.05, 0.04, 0.5);
        let (uv, mv) = (2.0, 1.2);
        vec![
            Scenario {
                name: "healthy".into(),
                current_fault: FaultCondition::healthy(),
                vibration_fault: FaultCondition::healthy(),
            },
            Scenario {
                name: "unbalance".into(),
                current_fault: FaultCondition::unbalance(ui),
                vibration_fault: FaultCondition::unbalance(uv),
            },
            Scenario {
                name: "misalignment".into(),
                current_fault: FaultCondition::misalignment(mi, w),
                vibration_fault: FaultCondition::misalignment(mv, w),
            },
            Scenario {
                name: "combined".into(),
                current_fault: FaultCondition::combined(ui, mi, w),
                vibration_fault: FaultCondition::combined(uv, mv, w),
            },
        ]
    }

    fn validate(&self) -> Result<()> {
        self.current_fault.validate()?;
        self.vibration_fault.validate()?;
        if self.current_fault.unbalance_on != self.vibration_fault.unbalance_on
            || self.current_fault.misalignment_on != self.vibration_fault.misalignment_on
        {
            return Err(Error::invalid(format!(
                "scenario `{}`: current and vibration faults must agree on which faults are present",
                self.name
            )));
        }
        Ok(())
    }
}

/// Everything needed to simulate and featurize observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationSetup {
    pub machines: [MachineConfig; 2],
    pub scenarios: Vec<Scenario>,
    pub current_noise: NoiseSpec,
    pub vibration_noise: NoiseSpec,
    pub timebase: Timebase,
    pub spectral: SpectralSettings,
    pub machine_class: MachineClass,
    pub severity_chart: SeverityChart,
}

impl Default for SimulationSetup {
    fn default() -> Self {
        Self {
            machines: [MachineConfig::generator(), MachineConfig::motor()],
            scenarios: Scenario::default_set(),
            current_noise: NoiseSpec {
                white_sigma: 0.02,
                disturb_count_min: 10,
                disturb_count_max: 20,
                disturb_freq_lo_hz: 5.0,
                disturb_freq_hi_hz: 500.0,
                disturb_amp_lo: 0.05,
                disturb_amp_hi: 0.6,
            },
            vibration_noise: NoiseSpec {
                white_sigma: 0.05,
                disturb_count_min: 10,
                disturb_count_max: 20,
                disturb_freq_lo_hz: 5.0,
                disturb_freq_hi_hz: 500.0,
                disturb_amp_lo: 0.0,
                disturb_amp_hi: 0.15,
            },
            timebase: Timebase::default(),
            spectral: SpectralSettings::default(),
            machine_class: MachineClass::II,
            severity_chart: SeverityChart::default(),
        }
    }
}

impl SimulationSetup {
    pub fn validate(&self) -> Result<()> {
        self.timebase.validate()?;
        for m in &self.machines {
            m.validate()?;
        }
        self.current_noise.validate(self.timebase.fs_hz)?;
        self.vibration_noise.validate(self.timebase.fs_hz)?;
        self.severity_chart.validate()?;
        for s in &self.scenarios {
            s.validate()?;
        }
        let mut joint: Vec<(u8, u8)> = self
            .scenarios
            .iter()
            .map(|s| (s.is_unbalance(), s.is_misalignment()))
            .collect();
        joint.sort_unstable();
        if joint != [(0, 0), (0, 1), (1, 0), (1, 1)] {
            return Err(Error::invalid(
                "scenarios must cover healthy, unbalance, misalignment and combined exactly once each",
            ));
        }
        Ok(())
    }

    pub fn scenario(&self, name: &str) -> Result<&Scenario> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::invalid(format!("no scenario named `{name}`")))
    }

    fn healthy_scenario(&self) -> &Scenario {
        self.scenarios
            .iter()
            .find(|s| s.is_unbalance() == 0 && s.is_misalignment() == 0)
            .expect("validated scenario set has a healthy condition")
    }

    pub fn extractor(&self) -> Result<FeatureExtractor> {
        FeatureExtractor::new(self.timebase.len(), self.spectral)
    }

    /// Seed of replicate `rep` of condition `cond`; replicate 0 is the
    /// undisturbed original.
    pub fn observation_seed(seed: u64, cond: usize, rep: usize) -> u64 {
        derive_seed(seed, ((cond as u64) << 32) | rep as u64)
    }

    pub fn simulate(
        &self,
        scenario: &Scenario,
        obs_seed: u64,
        disturbed: bool,
    ) -> Result<Observation> {
        let machine = |idx: usize| -> Result<MachineSignals> {
            let cfg = &self.machines[idx];
            let mseed = derive_seed(obs_seed, idx as u64 + 1);
            let phase = |p: u8| -> Result<_> {
                let sig = gen_current(
                    cfg,
                    &scenario.current_fault,
                    &self.current_noise,
                    self.timebase,
                    mseed,
                    p,
                )?;
                if disturbed {
                    inject_disturbances(
                        &sig,
                        &self.current_noise,
                        derive_seed(mseed, 10 + u64::from(p)),
                    )
                } else {
                    Ok(sig)
                }
            };
            let mut vib = gen_vibration(
                cfg,
                &scenario.vibration_fault,
                &self.vibration_noise,
                self.timebase,
                mseed,
            )?;
            if disturbed {
                vib = inject_disturbances(&vib, &self.vibration_noise, derive_seed(mseed, 20))?;
            }
            Ok(MachineSignals {
                currents: [phase(1)?, phase(2)?, phase(3)?],
                vibration: vib,
            })
        };
        Ok(Observation {
            machines: [machine(0)?, machine(1)?],
        })
    }

    /// The fault-free reference: the undisturbed healthy original.
    pub fn baseline(&self, extractor: &FeatureExtractor, seed: u64) -> Result<Baseline> {
        let cond = self
            .scenarios
            .iter()
            .position(|s| std::ptr::eq(s, self.healthy_scenario()))
            .expect("healthy scenario is in the list");
        let obs = self.simulate(
            self.healthy_scenario(),
            Self::observation_seed(seed, cond, 0),
            false,
        )?;
        extractor.baseline(&obs, [&self.machines[0], &self.machines[1]])
    }

    pub fn vibration_rms(obs: &Observation) -> [f64; 2] {
        [
            obs.machines[0].vibration.rms(),
            obs.machines[1].vibration.rms(),
        ]
    }

    pub fn severity_of(&self, vib_rms: [f64; 2]) -> Result<Severity> {
        self.severity_chart
            .lookup(vib_rms[0].max(vib_rms[1]), self.machine_class)
    }
}

#[derive(Debug, Clone)]
pub struct BuiltDataset {
    pub dataset: Dataset,
    pub baseline: Baseline,
}

/// Simulates `4 × (1 + per_condition)` labeled samples: one undisturbed
/// original per condition plus `per_condition` disturbed replicates.
pub fn build_dataset(
    setup: &SimulationSetup,
    per_condition: usize,
    seed: u64,
) -> Result<BuiltDataset> {
    setup.validate()?;
    let extractor = setup.extractor()?;
    let baseline = setup.baseline(&extractor, seed)?;
    let cfgs = [&setup.machines[0], &setup.machines[1]];
    let plan: Vec<(usize, usize)> = (0..setup.scenarios.len())
        .flat_map(|c| (0..=per_condition).map(move |r| (c, r)))
        .collect();
    let samples = plan
        .par_iter()
        .enumerate()
        .map(|(id, &(cond, rep))| {
            let sample = || -> Result<LabeledSample> {
                let scenario = &setup.scenarios[cond];
                let obs = setup.simulate(
                    scenario,
                    SimulationSetup::observation_seed(seed, cond, rep),
                    rep > 0,
                )?;
                let features = extractor.extract(&obs, &baseline, cfgs)?;
                let vib = SimulationSetup::vibration_rms(&obs);
                Ok(LabeledSample {
                    id,
                    features,
                    is_unbalance: scenario.is_unbalance(),
                    is_misalignment: scenario.is_misalignment(),
                    severity: setup.severity_of(vib)?,
                    vibration_rms_mm_s: Some(vib),
                })
            };
            sample().map_err(|e| Error::Sample {
                index: id,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = samples.len();
    let unbalanced = samples.iter().filter(|s| s.is_unbalance == 1).count();
    let misaligned = samples.iter().filter(|s| s.is_misalignment == 1).count();
    assert!(
        2 * unbalanced == n && 2 * misaligned == n,
        "each fault label must be present in exactly half of the samples"
    );
    Ok(BuiltDataset {
        dataset: Dataset::new(samples)?,
        baseline,
    })
}

/// Per-feature min-max scaling fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaler {
    pub fn fit(train: &Dataset) -> Result<Self> {
        let first = train
            .samples
            .first()
            .ok_or_else(|| Error::invalid("cannot fit a scaler on no samples"))?;
        let d = first.features.values.len();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for s in &train.samples {
            for (j, &v) in s.features.values.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    /// Affine map onto `[0, 1]` for training ranges; constant features map to 0.
    /// Values outside the training range are not clamped.
    pub fn transform(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(v, (lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        let samples = ds
            .samples
            .iter()
            .map(|s| {
                Ok(LabeledSample {
                    features: FeatureVector::new(self.transform(&s.features.values))?,
                    ..s.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            samples,
            feature_names: ds.feature_names.clone(),
        })
    }
}

pub fn normalize(train: &Dataset) -> Result<(Scaler, Dataset)> {
    let scaler = Scaler::fit(train)?;
    let scaled = scaler.apply(train)?;
    Ok((scaler, scaled))
}

/// Shuffled train/test split stratified on the joint fault-label combination.
///
/// Every combination with at least two members lands in both partitions.
/// The train size is `round(fraction × n)`.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = ds.len();
    let target = (train_fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5350_4c54));

    let mut groups: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for s in &ds.samples {
        groups.entry(s.joint_label()).or_default().push(s.id);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    for g in groups.iter_mut() {
        g.shuffle(&mut rng);
    }

    let (train_ids, test_ids) = match allocate(&groups, train_fraction, target) {
        Some(alloc) => {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (g, a) in groups.iter().zip(alloc) {
                train.extend_from_slice(&g[..a]);
                test.extend_from_slice(&g[a..]);
            }
            (train, test)
        }
        None => {
            log::warn!(
                "cannot stratify {n} samples at fraction {train_fraction}; using a plain shuffle"
            );
            let mut all = ds.ids();
            all.shuffle(&mut rng);
            let test = all.split_off(target);
            (all, test)
        }
    };
    let mut train_ids = train_ids;
    let mut test_ids = test_ids;
    train_ids.sort_unstable();
    test_ids.sort_unstable();
    Ok((ds.subset(&train_ids)?, ds.subset(&test_ids)?))
}

// Largest-remainder allocation with per-group bounds.
fn allocate(groups: &[Vec<usize>], fraction: f64, target: usize) -> Option<Vec<usize>> {
    let bounds: Vec<(usize, usize)> = groups
        .iter()
        .map(|g| {
            if g.len() >= 2 {
                (1, g.len() - 1)
            } else {
                (0, g.len())
            }
        })
        .collect();
    let quota: Vec<f64> = groups.iter().map(|g| fraction * g.len() as f64).collect();
    let mut alloc: Vec<usize> = quota
        .iter()
        .zip(&bounds)
        .map(|(q, &(lo, hi))| (q.floor() as usize).clamp(lo, hi))
        .collect();
    loop {
        let total: usize = alloc.iter().sum();
        if total == target {
            return Some(alloc);
        }
        let pick = if total < target {
            (0..groups.len())
                .filter(|&i| alloc[i] < bounds[i].1)
                .max_by(|&a, &b| {
                    (quota[a] - alloc[a] as f64)
                        .total_cmp(&(quota[b] - alloc[b] as f64))
                        .then(b.cmp(&a))
                })
        } else {
            (0..groups.len())
                .filter(|&i| alloc[i] > bounds[i].0)
                .min_by(|&a, &b| {
                    (quota[a] - alloc[a] as f64)
                        .total_cmp(&(quota[b] - alloc[b] as f64))
                        .then(a.cmp(&b))
                })
        }?;
        if total < target {
            alloc[pick] += 1;
        } else {
            alloc[pick] -= 1;
        }
    }
}

fn csv_header() -> Vec<String> {
    std::iter::once("id".to_string())
        .chain(FEATURE_NAMES.iter().map(|s| s.to_string()))
        .chain(LABEL_NAMES.iter().map(|s| s.to_string()))
        .chain(std::iter::once(SEVERITY_COLUMN.to_string()))
        .collect()
}

/// Writes `id,<27 features>,isUnbalance,isMisalignment,Severity` with six
/// fractional digits.
pub fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(csv_header())?;
    for s in &ds.samples {
        let mut rec = vec![s.id.to_string()];
        rec.extend(s.features.values.iter().map(|v| format!("{v:.6}")));
        rec.push(s.is_unbalance.to_string());
        rec.push(s.is_misalignment.to_string());
        rec.push(s.severity.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn(name.to_owned()))
}

fn parse_cell<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    row: usize,
    name: &str,
) -> Result<T> {
    let text = rec.get(idx).ok_or_else(|| Error::CsvRow {
        row,
        message: format!("missing `{name}`"),
    })?;
    text.trim().parse().map_err(|_| Error::CsvRow {
        row,
        message: format!("cannot parse `{name}` from `{text}`"),
    })
}

fn row_number(rec: &csv::StringRecord, fallback: usize) -> usize {
    rec.position().map_or(fallback, |p| p.line() as usize)
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let id_col = column_index(&headers, "id")?;
    let feature_cols = FEATURE_NAMES
        .iter()
        .map(|n| column_index(&headers, n))
        .collect::<Result<Vec<_>>>()?;
    let label_cols = LABEL_NAMES
        .iter()
        .map(|n| column_index(&headers, n))
        .collect::<Result<Vec<_>>>()?;
    let severity_col = column_index(&headers, SEVERITY_COLUMN)?;

    let mut samples = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = row_number(&rec, i + 2);
        let values = feature_cols
            .iter()
            .zip(FEATURE_NAMES)
            .map(|(&c, n)| parse_cell::<f64>(&rec, c, row, n))
            .collect::<Result<Vec<_>>>()?;
        let features = FeatureVector::new(values).map_err(|e| Error::CsvRow {
            row,
            message: e.to_string(),
        })?;
        let label = |j: usize| -> Result<u8> {
            let v: u8 = parse_cell(&rec, label_cols[j], row, LABEL_NAMES[j])?;
            if v > 1 {
                return Err(Error::CsvRow {
                    row,
                    message: format!("`{}` must be 0 or 1", LABEL_NAMES[j]),
                });
            }
            Ok(v)
        };
        let severity_text = rec.get(severity_col).ok_or_else(|| Error::CsvRow {
            row,
            message: "missing `Severity`".into(),
        })?;
        samples.push(LabeledSample {
            id: parse_cell(&rec, id_col, row, "id")?,
            features,
            is_unbalance: label(0)?,
            is_misalignment: label(1)?,
            severity: severity_text.parse()?,
            vibration_rms_mm_s: None,
        });
    }
    Dataset::new(samples)
}

/// Companion file `id,vibRmsGen,vibRmsMot` carrying the severity-tree inputs.
pub fn save_vibration_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(std::iter::once("id").chain(VIBRATION_COLUMNS))?;
    for s in &ds.samples {
        let v = s
            .vibration_rms_mm_s
            .ok_or_else(|| Error::invalid(format!("sample {} has no vibration RMS", s.id)))?;
        w.write_record([
            s.id.to_string(),
            format!("{:.6}", v[0]),
            format!("{:.6}", v[1]),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Attaches vibration RMS values from a companion file to matching ids.
pub fn load_vibration_csv(ds: &mut Dataset, path: &Path) -> Result<()> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let id_col = column_index(&headers, "id")?;
    let cols = [
        column_index(&headers, VIBRATION_COLUMNS[0])?,
        column_index(&headers, VIBRATION_COLUMNS[1])?,
    ];
    let mut by_id = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = row_number(&rec, i + 2);
        let id: usize = parse_cell(&rec, id_col, row, "id")?;
        let a: f64 = parse_cell(&rec, cols[0], row, VIBRATION_COLUMNS[0])?;
        let b: f64 = parse_cell(&rec, cols[1], row, VIBRATION_COLUMNS[1])?;
        by_id.insert(id, [a, b]);
    }
    for s in ds.samples.iter_mut() {
        s.vibration_rms_mm_s =
            Some(*by_id.get(&s.id).ok_or_else(|| {
                Error::invalid(format!("vibration file has no row for id {}", s.id))
            })?);
    }
    Ok(())
}

/// Reproducibility record written next to the dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub seed: u64,
    pub per_condition: usize,
    pub setup: SimulationSetup,
    pub split_fraction: f64,
    pub train_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
    /// Fitted on the training partition; the CSV holds scaled features.
    pub scaler: Scaler,
    pub baseline: Baseline,
}

impl Manifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.format_version != MANIFEST_VERSION {
            return Err(Error::invalid(format!(
                "manifest version {} is not supported (expected {MANIFEST_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }
}
