use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::evaluate::{evaluate_sweep, Reference, SweepEvaluation};
use super::layout::Layout;
use super::tables::{
    pretty_table, read_csv, write_csv, CalibrationRow, DecisionRow, RmseRow, ThroughputRow,
    TrainLogRow,
};
use crate::awgn_ref::{build_awgn_curve, curve_from_fn, load_curve, save_curve, AwgnCurve};
use crate::channel::{compute_sinrs, draw_channel, ChannelRealization};
use crate::dataset;
use crate::eesm::{calibrate_beta, load_predictor, save_predictor, EesmEntry, EesmPredictor};
use crate::error::{Error, Result};
use crate::link::LinkChain;
use crate::neural::{
    load_model, save_model, train, Activation, InputNormalizer, MlpModel, TrainLog,
};
use crate::oracle::{sample_events, OracleSpec};
use crate::rng::{derive_named, derive_seed, rng_from_seed};
use crate::textfmt::quantize_sig;
use crate::types::{ConfigSet, Dataset, FrameObservation};

/// A validated configuration plus the objects every stage needs.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub config_set: ConfigSet,
    pub chain: LinkChain,
    pub oracle: Option<OracleSpec>,
    pub layout: Layout,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config_set: config.config_set()?,
            chain: config.link_chain()?,
            oracle: config.oracle_spec()?,
            layout: Layout::new(&config.out_dir),
            config,
        })
    }

    fn ensure_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
    }

    /// One frame at average SNR `avg_snr_db`: channel draw, quantized
    /// SINRs, and an event for every configuration on that channel.
    pub fn generate_frame(&self, avg_snr_db: f64, seed: u64) -> Result<FrameObservation> {
        let c = &self.config.channel;
        let ch = draw_channel(
            &c.profile,
            self.config_set.subcarriers(),
            c.subcarrier_spacing_hz,
            avg_snr_db,
            derive_seed(seed, 1),
        )?;
        let sinr = compute_sinrs(&ch).quantized();
        let events: Vec<Option<bool>> = match &self.oracle {
            Some(spec) => sample_events(spec, &sinr, derive_seed(seed, 2))
                .into_iter()
                .map(Some)
                .collect(),
            None => {
                let eq = ChannelRealization::from_sinrs(&sinr);
                self.config_set
                    .iter()
                    .map(|cfg| {
                        self.chain
                            .simulate_frame(cfg, &eq, derive_seed(seed, 100 + cfg.id as u64))
                            .map(Some)
                    })
                    .collect::<Result<_>>()?
            }
        };
        FrameObservation::new(sinr, events, seed, avg_snr_db)
    }

    /// Training frames at SNRs drawn uniformly from the sweep range.
    pub fn training_dataset(&self) -> Result<Dataset> {
        let base = derive_named(self.config.seeds.generate(), "train");
        let sweep = &self.config.sweep;
        let records = (0..self.config.generate.train_frames)
            .into_par_iter()
            .map(|n| {
                let seed = derive_seed(base, n as u64);
                let snr: f64 =
                    rng_from_seed(derive_seed(seed, 0)).random_range(sweep.min_db..sweep.max_db);
                self.generate_frame(quantize_sig(snr, 6), seed)
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(self.config_set.clone(), records)
    }

    pub fn test_dataset(&self, point: usize) -> Result<Dataset> {
        let snr = self.config.sweep.snr_points()[point];
        let base = derive_seed(
            derive_named(self.config.seeds.generate(), "test"),
            point as u64,
        );
        let records = (0..self.config.generate.test_frames)
            .into_par_iter()
            .map(|n| self.generate_frame(snr, derive_seed(base, n as u64)))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(self.config_set.clone(), records)
    }

    /// Records the effective configuration without the output directory,
    /// so the artifacts of a run do not depend on where they were written.
    fn write_config(&self) -> Result<()> {
        self.ensure_dir(self.layout.root())?;
        let p = self.layout.config();
        let recorded = ExperimentConfig {
            out_dir: Default::default(),
            ..self.config.clone()
        };
        std::fs::write(&p, recorded.to_toml()).map_err(|e| Error::io(&p, e))
    }

    pub fn cmd_generate(&self) -> Result<()> {
        self.write_config()?;
        dataset::save(&self.training_dataset()?, &self.layout.train_dataset())?;
        self.ensure_dir(&self.layout.test_dir())?;
        for i in 0..self.config.sweep.points {
            dataset::save(&self.test_dataset(i)?, &self.layout.test_dataset(i))?;
        }
        Ok(())
    }

    /// Flat-channel reference curve for configuration `k`.
    pub fn build_curve(&self, k: usize) -> Result<AwgnCurve> {
        let cfg = self
            .config_set
            .get(k)
            .ok_or_else(|| Error::InvalidArgument(format!("no configuration {k}")))?;
        let grid = self.config.curves.grid();
        match &self.oracle {
            Some(spec) => curve_from_fn(cfg, &grid, |snr| spec.flat_fep(k, snr)),
            None => build_awgn_curve(
                &self.chain,
                cfg,
                &grid,
                self.config.curves.frames_per_point,
                derive_seed(self.config.seeds.curves(), k as u64),
            ),
        }
    }

    pub fn cmd_curves(&self) -> Result<Vec<AwgnCurve>> {
        self.ensure_dir(&self.layout.curve_dir())?;
        (1..=self.config_set.len())
            .map(|k| {
                let c = self.build_curve(k)?;
                save_curve(&c, &self.layout.curve(k))?;
                Ok(c)
            })
            .collect()
    }

    fn curve_for(&self, k: usize) -> Result<AwgnCurve> {
        let path = self.layout.curve(k);
        if !path.exists() {
            self.ensure_dir(&self.layout.curve_dir())?;
            let c = self.build_curve(k)?;
            save_curve(&c, &path)?;
            return Ok(c);
        }
        let c = load_curve(&path)?;
        let cfg = self.config_set.get(k).expect("k within config set");
        if c.config_id != k || (c.code_rate - cfg.code_rate).abs() > 1e-9 {
            return Err(Error::Data(format!(
                "{}: curve is for k={} rate={}, expected k={k} rate={}",
                path.display(),
                c.config_id,
                c.code_rate,
                cfg.code_rate
            )));
        }
        Ok(c)
    }

    fn load_training(&self) -> Result<Dataset> {
        let path = self.layout.train_dataset();
        if !path.exists() {
            return Err(Error::Data(format!(
                "{} not found; run `generate` first",
                path.display()
            )));
        }
        let ds = dataset::load(&path)?;
        if ds.config_set.rates() != self.config_set.rates()
            || ds.config_set.subcarriers() != self.config_set.subcarriers()
        {
            return Err(Error::Data(format!(
                "{}: dataset configuration does not match the experiment config",
                path.display()
            )));
        }
        Ok(ds)
    }

    pub fn calibrate(&self, ds: &Dataset) -> Result<(EesmPredictor, Vec<CalibrationRow>)> {
        let curves = (1..=self.config_set.len())
            .map(|k| self.curve_for(k))
            .collect::<Result<Vec<_>>>()?;
        let search = self.config.eesm.search();
        let sign = self.config.eesm.sign;
        let fits = curves
            .par_iter()
            .enumerate()
            .map(|(i, curve)| {
                let samples: Vec<_> = ds.observations_for(i + 1).collect();
                calibrate_beta(&samples, curve, sign, &search).map(|c| (c, samples.len()))
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = fits
            .iter()
            .zip(self.config_set.iter())
            .map(|((c, n), cfg)| CalibrationRow {
                k: cfg.id,
                code_rate: cfg.code_rate,
                beta: c.beta,
                objective: c.objective,
                observations: *n,
            })
            .collect();
        let entries = fits
            .into_iter()
            .zip(curves)
            .map(|((c, _), curve)| EesmEntry {
                beta: c.beta,
                curve,
            })
            .collect();
        Ok((EesmPredictor::new(sign, entries)?, rows))
    }

    pub fn cmd_calibrate(&self) -> Result<EesmPredictor> {
        let ds = self.load_training()?;
        let (pred, rows) = self.calibrate(&ds)?;
        let manifest = self.layout.eesm_manifest();
        self.ensure_dir(manifest.parent().expect("manifest has a parent"))?;
        save_predictor(&pred, &manifest)?;
        write_csv(&self.layout.calibration_csv(), &rows)?;
        load_predictor(&manifest)
    }

    pub fn initial_model(&self) -> Result<MlpModel> {
        let mut dims = vec![self.config_set.subcarriers()];
        dims.extend(&self.config.neural.hidden);
        dims.push(self.config_set.len());
        MlpModel::new_random(
            &dims,
            Activation::Relu,
            InputNormalizer::default(),
            self.config.seeds.init(),
        )
    }

    pub fn train(&self, ds: &Dataset) -> Result<(MlpModel, TrainLog)> {
        let (model, log) = train(&self.initial_model()?, ds, &self.config.train_config())?;
        Ok((model.quantized(), log))
    }

    pub fn cmd_train(&self) -> Result<(MlpModel, TrainLog)> {
        let ds = self.load_training()?;
        let (model, log) = self.train(&ds)?;
        save_model(&model, &self.layout.model())?;
        let rows: Vec<TrainLogRow> = log
            .epochs
            .iter()
            .map(|e| TrainLogRow {
                epoch: e.epoch,
                train_ce: e.train_ce,
                validation_ce: e.validation_ce,
            })
            .collect();
        write_csv(&self.layout.train_log(), &rows)?;
        Ok((model, log))
    }

    pub fn load_test_sets(&self) -> Result<Vec<Dataset>> {
        (0..self.config.sweep.points)
            .map(|i| {
                let p = self.layout.test_dataset(i);
                if !p.exists() {
                    return Err(Error::Data(format!(
                        "{} not found; run `generate` first",
                        p.display()
                    )));
                }
                dataset::load(&p)
            })
            .collect()
    }

    pub fn reference(&self) -> Reference<'_> {
        match &self.oracle {
            Some(spec) => Reference::Oracle(spec),
            None => Reference::MonteCarlo {
                chain: &self.chain,
                trials: self.config.evaluate.reference_trials,
                seed: self.config.seeds.evaluate(),
            },
        }
    }

    pub fn cmd_evaluate(&self) -> Result<SweepEvaluation> {
        let manifest = self.layout.eesm_manifest();
        let model_path = self.layout.model();
        for (p, cmd) in [(&manifest, "calibrate"), (&model_path, "train")] {
            if !p.exists() {
                return Err(Error::Data(format!(
                    "{} not found; run `{cmd}` first",
                    p.display()
                )));
            }
        }
        let eesm = load_predictor(&manifest)?;
        let model = load_model(&model_path)?;
        let tests = self.load_test_sets()?;
        let eval = evaluate_sweep(&eesm, &model, &tests, &self.config_set, &self.reference())?;
        write_csv(&self.layout.rmse_csv(), &eval.rmse_rows())?;
        write_csv(&self.layout.throughput_csv(), &eval.throughput_rows())?;
        write_csv(&self.layout.decisions_csv(), &eval.decisions)?;
        Ok(eval)
    }

    /// Every stage in order.
    pub fn cmd_run(&self) -> Result<SweepEvaluation> {
        self.cmd_generate()?;
        self.cmd_curves()?;
        self.cmd_calibrate()?;
        self.cmd_train()?;
        self.cmd_evaluate()
    }
}

/// Pretty-prints the CSV artifacts found in `out_dir`, checking the schema
/// of each.
pub fn cmd_report(out_dir: &Path) -> Result<String> {
    let layout = Layout::new(out_dir);
    let mut out = String::new();
    let mut found = false;
    type Check = fn(&Path) -> Result<()>;
    let tables: [(std::path::PathBuf, Check, bool); 5] = [
        (
            layout.calibration_csv(),
            |p| read_csv::<CalibrationRow>(p).map(drop),
            true,
        ),
        (
            layout.train_log(),
            |p| read_csv::<TrainLogRow>(p).map(drop),
            true,
        ),
        (
            layout.rmse_csv(),
            |p| read_csv::<RmseRow>(p).map(drop),
            true,
        ),
        (
            layout.throughput_csv(),
            |p| read_csv::<ThroughputRow>(p).map(drop),
            true,
        ),
        (
            layout.decisions_csv(),
            |p| read_csv::<DecisionRow>(p).map(drop),
            false,
        ),
    ];
    for (path, check, show) in tables {
        if !path.exists() {
            continue;
        }
        check(&path)?;
        found = true;
        if show {
            out.push_str(&format!(
                "== {}\n",
                path.file_name().unwrap().to_string_lossy()
            ));
            out.push_str(&pretty_table(&path)?);
            out.push('\n');
        }
    }
    if !found {
        return Err(Error::Data(format!(
            "no result tables in {}",
            out_dir.display()
        )));
    }
    Ok(out)
}
