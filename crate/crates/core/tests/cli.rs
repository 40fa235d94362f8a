use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fwlog(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwlog"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn write_log(dir: &Path) {
    fs::write(dir.join("log.csv"), fwlog::synth::firewall_log(1200, 3).render_csv().unwrap()).unwrap();
}

#[test]
fn train_evaluate_predict_round() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_log(dir);

    let out = fwlog(dir, &["train", "--data", "log.csv", "--algo", "lr", "--seed", "7", "--model", "m/lr.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("train 840 / test 360"), "{stdout}");
    let artifact = fwlog::model_store::load(dir.join("m/lr.json")).unwrap();
    assert_eq!(artifact.training_meta.seed, 7);

    let out = fwlog(dir, &["evaluate", "--data", "log.csv", "--model", "m/lr.json", "--held-out", "--out-dir", "ev"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("weighted avg"));
    for f in ["lr_report.txt", "lr_report.json", "lr_confusion.csv"] {
        assert!(dir.join("ev").join(f).exists(), "{f}");
    }

    let features = "Source Port,Destination Port,NAT Source Port,NAT Destination Port,Bytes,Bytes Sent,\
                    Bytes Received,Packets,Elapsed Time (sec),pkts_sent,pkts_received\n\
                    50000,443,40000,443,5000,1000,4000,20,30,8,12\n";
    fs::write(dir.join("in.csv"), features).unwrap();
    let out = fwlog(dir, &["predict", "--model", "m/lr.json", "--input", "in.csv", "--output", "pred.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pred = fs::read_to_string(dir.join("pred.csv")).unwrap();
    assert_eq!(pred.lines().count(), 2);
}

#[test]
fn experiment_honours_config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_log(dir);
    fs::write(
        dir.join("exp.conf"),
        "data = log.csv\nseed = 1\nalgorithms = lr, knn\nlr.epochs = 50\nout_dir = from-file\n",
    )
    .unwrap();
    let out = fwlog(dir, &["experiment", "--config", "exp.conf", "--seed", "2", "--out-dir", "from-flag"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.join("from-file").exists());
    let json = fs::read_to_string(dir.join("from-flag/comparison.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["config"]["seed"], "2");
    assert_eq!(v["config"]["lr.epochs"], "50");
    assert_eq!(v["methods"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes_distinguish_usage_data_and_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_log(dir);

    let out = fwlog(dir, &["ingest", "--data", "missing.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));

    let out = fwlog(dir, &["experiment", "--data", "log.csv", "--algo", "gbm"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rf, lr, knn, svm"));

    let out = fwlog(dir, &["experiment", "--data", "log.csv", "--cv-folds", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = fwlog(dir, &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(dir.join("bad.csv"), "a,b\n1,2\n").unwrap();
    let out = fwlog(dir, &["ingest", "--data", "bad.csv"]);
    assert_eq!(out.status.code(), Some(3));

    let out = fwlog(dir, &["ingest", "--data", "log.csv", "--report", "ingest.json"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("accepted 1200"));
}
