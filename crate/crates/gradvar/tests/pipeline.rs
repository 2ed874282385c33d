use gradvar::ablation::run_ablation;
use gradvar::config::TrainConfig;
use gradvar::core::metrics::psnr;
use gradvar::core::synthetic::{max_abs_gx, SyntheticSetSpec};
use gradvar::core::{CompositeLossSpec, Scalar};
use gradvar::dataset::{make_synthetic_dataset, Dataset};
use gradvar::evaluate::{bicubic_predictor, evaluate_dir, model_predictor, write_eval_outputs};
use gradvar::io::load_png;
use gradvar::trainer::{run_training, train};
use gradvar::{checkpoint, core};

fn tiny(loss: &str, epochs: usize) -> TrainConfig {
    let mut c = TrainConfig::default();
    c.apply_text(&format!(
        "loss = {loss}\nepochs = {epochs}\nsynthetic_count = 12\nsynthetic_size = 32\n\
         val_count = 4\ncrop = 32\nbatch_size = 4\nwidth = 6\nseed = 3\n"
    ))
    .unwrap();
    c
}

#[test]
fn zero_epochs_returns_initial_params() {
    let cfg = tiny("l2", 0);
    let data = Dataset::load(&cfg).unwrap();
    let out = train(&cfg, &data, |_| {}).unwrap();
    assert!(out.reports.is_empty());
    assert_eq!(out.params.step, 0);
    let fresh = core::model::ModelParams::init(gradvar::trainer::architecture(&cfg, 3), cfg.seed);
    assert_eq!(out.params, fresh);
}

#[test]
fn training_is_bit_reproducible() {
    let cfg = tiny("l2+gv", 2);
    let data = Dataset::load(&cfg).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_training(&cfg, &data, d.path()).unwrap();
    }
    for f in ["checkpoint.bin", "epochs.csv", "manifest.txt"] {
        let a = std::fs::read(dirs[0].path().join(f)).unwrap();
        let b = std::fs::read(dirs[1].path().join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
    let p = checkpoint::load(&dirs[0].path().join("checkpoint.bin")).unwrap();
    assert_eq!(p.step, 2 * 2);
}

#[test]
fn l2_training_lowers_validation_mse_by_epoch_five() {
    let mut cfg = tiny("l2", 5);
    cfg.apply_text("synthetic_count = 24\nwidth = 16\n").unwrap();
    let data = Dataset::load(&cfg).unwrap();
    let out = train(&cfg, &data, |_| {}).unwrap();
    let last = out.reports.last().unwrap();
    assert!(last.val.mse < out.initial.mse, "{} !< {}", last.val.mse, out.initial.mse);
    assert!(out.reports.iter().all(|r| r.train_loss.is_finite()));
}

#[test]
fn invalid_config_is_rejected_before_training() {
    let mut cfg = tiny("l2", 1);
    cfg.crop = 30;
    let data = Dataset::load(&tiny("l2", 1)).unwrap();
    let err = train(&cfg, &data, |_| {}).unwrap_err();
    assert_eq!(err.error.exit_code(), 2);
}

#[test]
fn synthetic_export_is_deterministic_and_edged() {
    let spec = SyntheticSetSpec {
        count: 6,
        height: 40,
        width: 40,
        seed: 5,
        ..SyntheticSetSpec::default()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = make_synthetic_dataset(&spec, a.path()).unwrap();
    make_synthetic_dataset(&spec, b.path()).unwrap();
    assert_eq!(ma.files.len(), 6);
    for f in &ma.files {
        let name = f.file_name().unwrap();
        assert_eq!(std::fs::read(f).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        assert!(max_abs_gx(&load_png(f).unwrap()).unwrap() >= 1.0);
    }
    assert_eq!(
        std::fs::read(&ma.manifest).unwrap(),
        std::fs::read(b.path().join("manifest.txt")).unwrap()
    );
}

#[test]
fn empty_synthetic_export() {
    let spec = SyntheticSetSpec {
        count: 0,
        ..SyntheticSetSpec::default()
    };
    let d = tempfile::tempdir().unwrap();
    let m = make_synthetic_dataset(&spec, d.path()).unwrap();
    assert!(m.files.is_empty());
    let text = std::fs::read_to_string(m.manifest).unwrap();
    assert!(!text.contains("file ="));
}

fn write_set(count: usize) -> tempfile::TempDir {
    let d = tempfile::tempdir().unwrap();
    let spec = SyntheticSetSpec {
        count,
        height: 40,
        width: 36,
        seed: 1,
        ..SyntheticSetSpec::default()
    };
    make_synthetic_dataset(&spec, d.path()).unwrap();
    d
}

#[test]
fn identity_oracle_evaluation() {
    let d = write_set(3);
    let s = core::ScaleFactor::new(2).unwrap();
    let report = evaluate_dir(d.path(), s, 8, 2, &|_, hr| Ok(hr.clone())).unwrap();
    assert_eq!(report.rows.len(), 3);
    for r in &report.rows {
        assert_eq!(r.psnr_db, Scalar::INFINITY);
        assert_eq!(r.ssim, 1.0);
        assert_eq!(r.sr_profile, r.hr_profile);
    }
}

#[test]
fn bicubic_baseline_and_csv_layout() {
    let d = write_set(3);
    std::fs::write(d.path().join("zz_broken.png"), b"junk").unwrap();
    let s = core::ScaleFactor::new(2).unwrap();
    let report = evaluate_dir(d.path(), s, 8, 2, &bicubic_predictor(s)).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.skipped.len(), 1);
    for r in &report.rows {
        assert!(r.psnr_db.is_finite() && r.psnr_db > 0.0);
        // 40×36 is cropped to 40×32 for s=2, n=8.
        assert_eq!(r.hr_profile.vx.len(), 5 * 4);
    }
    let out = tempfile::tempdir().unwrap();
    write_eval_outputs(&report, out.path()).unwrap();
    let csv = std::fs::read_to_string(out.path().join("metrics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "path,psnr_db,ssim");
    assert_eq!(lines.len(), 1 + 3 + 1);
    assert!(lines[4].starts_with("MEAN,"));
    let hist = std::fs::read_to_string(out.path().join("hist_sr.csv")).unwrap();
    assert_eq!(hist.lines().next().unwrap(), "bin_lo,bin_hi,count_x,count_y");
    let total: usize = hist
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 3 * 20);
    let prof = std::fs::read_to_string(out.path().join("variance").join("img_0000_sr.csv")).unwrap();
    assert_eq!(prof.lines().next().unwrap(), "patch_index,vx,vy");
    assert_eq!(prof.lines().count(), 21);
    assert!(std::fs::read_to_string(out.path().join("hist.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn model_predictor_matches_validation_psnr() {
    let cfg = tiny("l2", 1);
    let data = Dataset::load(&cfg).unwrap();
    let out = train(&cfg, &data, |_| {}).unwrap();
    let d = write_set(1);
    let s = cfg.scale;
    let report = evaluate_dir(d.path(), s, 8, 2, &model_predictor(&out.params)).unwrap();
    let hr = gradvar::trainer::validation_target(&load_png(&report.rows[0].path).unwrap(), 2, 8).unwrap();
    let sr = core::model::predict(&out.params, &core::resample::make_lr(&hr, s).unwrap()).unwrap();
    assert_eq!(report.rows[0].psnr_db, psnr(&sr, &hr, 2).unwrap());
}

#[test]
fn ablation_rows_share_initial_weights() {
    let cfg = tiny("l2", 1);
    let data = Dataset::load(&cfg).unwrap();
    let grid: Vec<CompositeLossSpec> = ["l2", "l2+tv", "l2+gv"].iter().map(|l| l.parse().unwrap()).collect();
    let out = tempfile::tempdir().unwrap();
    let table = run_ablation(&cfg, &grid, &data, Some(out.path())).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(table.rows.iter().all(|r| r.init_sha256 == table.rows[0].init_sha256));
    let csv = std::fs::read_to_string(out.path().join("ablation.csv")).unwrap();
    let labels: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["L2", "L2+TV", "L2+GV"]);
    assert!(csv.starts_with("loss,psnr_db,ssim,mean_vx,mean_vy\n"));
    assert!(table.hr_mean_vx > 0.0 && table.hr_mean_vy > 0.0);
}

#[test]
fn failed_ablation_leaves_partial_table() {
    // 8×8 training crops are too small for the SSIM window, so the second
    // row fails after the first one completed.
    let mut cfg = tiny("l2", 1);
    cfg.crop = 8;
    let data = Dataset::load(&cfg).unwrap();
    let grid: Vec<CompositeLossSpec> = vec!["l2".parse().unwrap(), "ssim".parse().unwrap()];
    let out = tempfile::tempdir().unwrap();
    let err = run_ablation(&cfg, &grid, &data, Some(out.path())).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let csv = std::fs::read_to_string(out.path().join("ablation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("L2,"));
}
