//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use statrs::function::erf::erfc;

use feplab::channel::{draw_channel, ChannelRealization, TapProfile};
use feplab::dataset::{read_dataset, write_dataset};
use feplab::harness::{
    Experiment, ExperimentConfig, OracleFamily, OraclePreset, OracleSetting, SweepEvaluation,
};
use feplab::link::{
    derate_match, estimate_fep_mc, rate_match, uncoded_bit_errors, Interleaver, LinkChain,
};
use feplab::metrics::bernoulli_nll;
use feplab::neural::{grad_check, read_model, write_model, Activation, InputNormalizer, MlpModel};
use feplab::oracle::{kl_to_oracle, oracle_entropy, OracleSpec};
use feplab::rng::{derive_seed, rng_from_seed};
use feplab::types::{db_to_linear, Dataset, FrameObservation, LinkConfig, SinrVector};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!(
        "{}; {:.1}s of {}s budget",
        o.detail,
        took.as_secs_f64(),
        budget.as_secs()
    );
    o.pass &= took <= budget;
    o
}

fn oracle_config(dir: &Path, family: OracleFamily, test_frames: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        out_dir: dir.to_path_buf(),
        oracle: Some(OracleSetting::Preset(OraclePreset { family })),
        ..ExperimentConfig::default()
    };
    cfg.generate.train_frames = 20_000;
    cfg.generate.test_frames = test_frames;
    cfg
}

fn random_observations(m: usize, k: usize, n: usize, seed: u64) -> Vec<FrameObservation> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|i| {
            let db: Vec<f64> = (0..m).map(|_| rng.random_range(-10.0..25.0)).collect();
            let events = (0..k).map(|_| Some(rng.random_bool(0.5))).collect();
            FrameObservation::new(SinrVector::from_db(&db).unwrap(), events, i as u64, 0.0).unwrap()
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let model = MlpModel::new_random(
            &[8, 5, 3],
            Activation::Relu,
            InputNormalizer::default(),
            seed,
        )
        .unwrap();
        let batch = random_observations(8, 3, 16, derive_seed(seed, 99));
        worst = worst.max(grad_check(&model, &batch, 1e-6).unwrap());
    }
    outcome(
        worst <= 1e-5,
        format!("max relative discrepancy {worst:.2e} (limit 1e-5)"),
    )
}

fn empirical_ce(model: &MlpModel, records: &[FrameObservation]) -> f64 {
    let mut total = 0.0;
    for r in records {
        let p = model.predict(&r.sinr).unwrap();
        let obs: Vec<(f64, bool)> = p
            .iter()
            .zip(&r.events)
            .filter_map(|(p, e)| e.map(|e| (*p, e)))
            .collect();
        total += obs.iter().map(|(p, e)| bernoulli_nll(*e, *p)).sum::<f64>() / obs.len() as f64;
    }
    total / records.len() as f64
}

/// Criteria 2 and 3 on one in-family run.
fn criteria_2_and_3(dir: &Path) -> (Outcome, Outcome) {
    let exp = Experiment::new(oracle_config(dir, OracleFamily::InFamily, 1_000)).unwrap();
    let spec = exp.oracle.clone().unwrap();
    let start = Instant::now();
    exp.cmd_generate().unwrap();
    let gen_time = start.elapsed();

    let c3 = timed(Duration::from_secs(120), || {
        let pred = exp.cmd_calibrate().unwrap();
        let betas = pred.betas();
        let worst = betas
            .iter()
            .map(|b| (b / 2.0 - 1.0).abs())
            .fold(0.0, f64::max);
        let shown: Vec<String> = betas.iter().map(|b| format!("{b:.3}")).collect();
        outcome(
            worst <= 0.15,
            format!(
                "β = [{}], worst deviation {:.1}% (limit 15%)",
                shown.join(", "),
                100.0 * worst
            ),
        )
    });

    let c2 = timed(Duration::from_secs(300).saturating_sub(gen_time), || {
        let (model, _) = exp.cmd_train().unwrap();
        let tests: Vec<FrameObservation> = exp
            .load_test_sets()
            .unwrap()
            .into_iter()
            .flat_map(Dataset::into_records)
            .collect();
        let ce = empirical_ce(&model, &tests);
        let h = oracle_entropy(&spec, &tests).unwrap();
        let channels: Vec<SinrVector> = tests.iter().map(|r| r.sinr.clone()).collect();
        let predictor = |g: &SinrVector| model.predict(g).unwrap();
        let kl = kl_to_oracle(&predictor, &spec, &channels).unwrap().average;
        outcome(
            ce - h <= 0.02 && kl <= 0.02,
            format!(
                "test CE − oracle entropy = {:.4} nats, KL = {kl:.4} nats (limits 0.02)",
                ce - h
            ),
        )
    });
    (c2, c3)
}

/// Criteria 4 and 5 on one out-of-family run.
fn criteria_4_and_5(dir: &Path) -> (Outcome, Outcome) {
    let exp = Experiment::new(oracle_config(dir, OracleFamily::OutFamily, 10_000)).unwrap();
    let mut eval: Option<SweepEvaluation> = None;
    let c4 = timed(Duration::from_secs(600), || {
        let e = exp.cmd_run().unwrap();
        let (r_eesm, r_nn) = e.mean_rmse();
        eval = Some(e);
        outcome(
            r_nn <= 0.9 * r_eesm,
            format!(
                "mean RMSE NN {r_nn:.4} vs EESM {r_eesm:.4}, ratio {:.3} (limit 0.9)",
                r_nn / r_eesm
            ),
        )
    });
    let e = eval.unwrap();
    let ordered = e
        .points
        .iter()
        .filter(|p| p.tput_genie >= p.tput_nn && p.tput_nn >= p.tput_eesm)
        .count();
    let genie_ok = e
        .points
        .iter()
        .all(|p| p.tput_genie >= p.tput_nn && p.tput_genie >= p.tput_eesm);
    let c5 = outcome(
        ordered >= 8 && genie_ok,
        format!(
            "Genie ≥ NN ≥ EESM at {ordered}/{} points (need 8), Genie dominant everywhere: {genie_ok}",
            e.points.len()
        ),
    );
    (c4, c5)
}

fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    for gb_db in [2.0, 4.0, 6.0] {
        let gb = db_to_linear(gb_db);
        let ch = ChannelRealization::flat(64, 2.0 * gb).unwrap();
        let (errors, n) = uncoded_bit_errors(&ch, 100_000, 17 + gb_db as u64).unwrap();
        let expected = q_function((2.0 * gb).sqrt());
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        let measured = errors as f64 / n as f64;
        let ok = (measured - expected).abs() <= 3.0 * sigma;
        pass &= ok;
        notes.push(format!("BER@{gb_db}dB {measured:.5}/{expected:.5}"));
    }

    let chain = LinkChain::from_codec_name("conv_k7_r13", 5).unwrap();
    let rates = [0.04, 0.12, 0.2, 0.28, 0.32];
    let snrs: Vec<f64> = (0..8).map(|i| -14.0 + 2.0 * i as f64).collect();
    let trials = 2000;
    let mut fep = vec![vec![0.0; snrs.len()]; rates.len()];
    for (ri, &r) in rates.iter().enumerate() {
        let cfg = LinkConfig::new(ri + 1, 64, 4, 2, r).unwrap();
        for (si, &s) in snrs.iter().enumerate() {
            let ch = ChannelRealization::flat(64, db_to_linear(s)).unwrap();
            fep[ri][si] =
                estimate_fep_mc(&chain, &cfg, &ch, trials, derive_seed(ri as u64, si as u64))
                    .unwrap()
                    .estimate;
        }
    }
    let slack = |a: f64, b: f64| 3.0 * ((a * (1.0 - a) + b * (1.0 - b)) / trials as f64).sqrt();
    let mut violations = 0;
    for row in &fep {
        for w in row.windows(2) {
            if w[1] > w[0] + slack(w[0], w[1]) {
                violations += 1;
            }
        }
    }
    for pair in fep.windows(2) {
        for (&lo, &hi) in pair[0].iter().zip(&pair[1]) {
            if hi + slack(lo, hi) < lo {
                violations += 1;
            }
        }
    }
    pass &= violations == 0;
    notes.push(format!("FEP monotonicity violations {violations}"));

    let mut failures = 0;
    for n in 0..1000u64 {
        let cfg = LinkConfig::new(1, 64, 4, 2, rates[n as usize % rates.len()]).unwrap();
        let ch = draw_channel(
            &TapProfile::epa(),
            64,
            140_625.0,
            10.0,
            derive_seed(1000, n),
        )
        .unwrap();
        let clean = ChannelRealization::new(ch.h, 1e-20, "clean").unwrap();
        if chain.simulate_frame(&cfg, &clean, n).unwrap() {
            failures += 1;
        }
    }
    pass &= failures == 0;
    notes.push(format!("noiseless failures {failures}/1000"));
    outcome(pass, notes.join(", "))
}

fn collect_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

fn small_config(dir: &Path, oracle: bool) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        out_dir: dir.to_path_buf(),
        ..ExperimentConfig::default()
    };
    cfg.seeds.root = 2024;
    cfg.sweep.points = 3;
    cfg.generate.train_frames = if oracle { 2_000 } else { 300 };
    cfg.generate.test_frames = 30;
    cfg.curves.step_db = 2.0;
    cfg.curves.frames_per_point = 100;
    cfg.neural.hidden = vec![16, 8];
    cfg.neural.max_epochs = 4;
    cfg.evaluate.reference_trials = 10;
    if oracle {
        cfg.oracle = Some(OracleSetting::Preset(OraclePreset {
            family: OracleFamily::OutFamily,
        }));
    }
    cfg
}

fn criterion_7(dir: &Path) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for (name, oracle) in [("link", false), ("oracle", true)] {
        let runs: Vec<BTreeMap<PathBuf, Vec<u8>>> = ["a", "b"]
            .iter()
            .map(|r| {
                let out = dir.join(format!("{name}_{r}"));
                Experiment::new(small_config(&out, oracle))
                    .unwrap()
                    .cmd_run()
                    .unwrap();
                collect_files(&out)
            })
            .collect();
        let differing: Vec<String> = runs[0]
            .iter()
            .filter(|(p, bytes)| runs[1].get(*p) != Some(bytes))
            .map(|(p, _)| p.display().to_string())
            .collect();
        let same = differing.is_empty() && runs[0].len() == runs[1].len();
        pass &= same && runs[0].len() >= 10;
        if same {
            notes.push(format!("{name}: {} files byte-identical", runs[0].len()));
        } else {
            notes.push(format!("{name}: differing {}", differing.join(" ")));
        }
    }
    outcome(pass, notes.join(", "))
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let interleave_ok = [1usize, 7, 78, 510, 1000].iter().all(|&len| {
        let il = Interleaver::from_seed(len, len as u64);
        let x: Vec<u32> = (0..len as u32).collect();
        il.deinterleave(&il.interleave(&x).unwrap()).unwrap() == x
    });
    pass &= interleave_ok;
    notes.push(format!("interleaver {interleave_ok}"));

    let l: Vec<u8> = vec![1, 0, 1, 1, 0];
    let r = rate_match(&l, 13);
    let pattern_ok = r.iter().enumerate().all(|(i, b)| *b == l[i % l.len()]) && r.len() == 13;
    let llr: Vec<f64> = r.iter().map(|b| if *b == 1 { -1.0 } else { 1.0 }).collect();
    let acc = derate_match(&llr, l.len());
    let acc_ok = acc == vec![-3.0, 3.0, -3.0, -2.0, 2.0];
    pass &= pattern_ok && acc_ok;
    notes.push(format!(
        "rate-match pattern {pattern_ok}, accumulation {acc_ok}"
    ));

    let cs = feplab::ConfigSet::new(64, 4, 2, &[0.04, 0.08, 0.12]).unwrap();
    let spec = OracleSpec::default_out_family(3);
    let records: Vec<FrameObservation> = (0..200u64)
        .map(|n| {
            let ch =
                draw_channel(&TapProfile::epa(), 64, 140_625.0, -5.0 + 0.1 * n as f64, n).unwrap();
            let sinr = feplab::channel::compute_sinrs(&ch).quantized();
            let mut obs =
                feplab::oracle::sample_observation(&spec, &sinr, n, -5.0 + 0.1 * n as f64).unwrap();
            obs.avg_snr_db = feplab::textfmt::quantize_sig(obs.avg_snr_db, 6);
            if n % 7 == 0 {
                obs.events[1] = None;
            }
            obs
        })
        .collect();
    let ds = Dataset::new(cs, records).unwrap();
    let mut bytes = Vec::new();
    write_dataset(&ds, &mut bytes).unwrap();
    let back = read_dataset(bytes.as_slice()).unwrap();
    let mut again = Vec::new();
    write_dataset(&back, &mut again).unwrap();
    let ds_ok = back == ds && again == bytes;
    pass &= ds_ok;
    notes.push(format!("dataset {ds_ok}"));

    let model = MlpModel::new_random(
        &[64, 60, 10, 60, 8],
        Activation::Relu,
        InputNormalizer::default(),
        3,
    )
    .unwrap()
    .quantized();
    let mut mbytes = Vec::new();
    write_model(&model, &mut mbytes).unwrap();
    let mback = read_model(mbytes.as_slice()).unwrap();
    let mut magain = Vec::new();
    write_model(&mback, &mut magain).unwrap();
    let model_ok = mback == model && magain == mbytes;
    pass &= model_ok;
    notes.push(format!("model {model_ok}"));
    outcome(pass, notes.join(", "))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();

    results.push((
        1,
        "gradient correctness",
        timed(Duration::from_secs(10), criterion_1),
    ));
    let (c2, c3) = criteria_2_and_3(&dir.path().join("in_family"));
    results.push((2, "ML consistency on the in-family oracle", c2));
    results.push((3, "EESM β recovery", c3));
    let (c4, c5) = criteria_4_and_5(&dir.path().join("out_family"));
    results.push((4, "NN beats EESM on FEP RMSE", c4));
    results.push((5, "throughput ordering", c5));
    results.push((
        6,
        "link-chain physics",
        timed(Duration::from_secs(300), criterion_6),
    ));
    results.push((
        7,
        "determinism",
        criterion_7(&dir.path().join("determinism")),
    ));
    results.push((8, "round trips", criterion_8()));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, o) in &results {
        println!(
            "criterion {n} {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
