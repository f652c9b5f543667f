//! Command behavior: exit-code discipline, artifact reproducibility, and
//! the small end-to-end examples each subcommand must handle.

use std::fs;
use std::path::Path;
use std::process::Command;

fn rfmap(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_rfmap"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().unwrap_or(-1),
    )
}

fn read_artifact_hashes(dir: &Path) -> serde_json::Value {
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    manifest["artifacts"].clone()
}

#[test]
fn exit_codes_by_failure_class() {
    // config error: config file missing a section
    let dir = tempfile::tempdir().unwrap();
    let bad_cfg = dir.path().join("bad.toml");
    fs::write(&bad_cfg, "seed = 1\n").unwrap();
    let (_, err, code) = rfmap(&["simulate", "--config", bad_cfg.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("region"), "message should name a field: {err}");

    // degenerate scenario: no sensors drawn
    let (_, err, code) = rfmap(&[
        "simulate",
        "--lambda-s",
        "0",
        "--out",
        dir.path().join("d").to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "{err}");

    // io error: record file does not exist
    let (_, err, code) = rfmap(&[
        "map",
        "--records",
        dir.path().join("nope.jsonl").to_str().unwrap(),
        "--f-lo-hz",
        "1e9",
        "--f-hi-hz",
        "2e9",
        "--region",
        "0:1:0:1",
    ]);
    assert_eq!(code, 4, "{err}");

    // usage error from an invalid value
    let (_, _, code) = rfmap(&["density", "--beta", "1.5"]);
    assert_eq!(code, 2);
    let (_, _, code) = rfmap(&["density"]);
    assert_eq!(code, 2);
}

#[test]
fn rerun_reproduces_artifacts_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let (_, err, code) = rfmap(&[
            "simulate",
            "--lambda-s",
            "94",
            "--seed",
            "5",
            "--grid",
            "41",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    for name in [
        "truth.csv",
        "truth.pgm",
        "truth.json",
        "recon.csv",
        "recon.pgm",
        "recon.json",
        "sites.json",
        "records.jsonl",
    ] {
        let fa = fs::read(a.join(name)).unwrap();
        let fb = fs::read(b.join(name)).unwrap();
        assert_eq!(fa, fb, "{name} differs between identical runs");
    }
    // manifests agree on every artifact hash (timestamps excluded)
    assert_eq!(read_artifact_hashes(&a), read_artifact_hashes(&b));
}

#[test]
fn ensemble_writes_per_seed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (out, err, code) = rfmap(&[
        "simulate",
        "--lambda-s",
        "80",
        "--grid",
        "31",
        "--seeds",
        "6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("mean mse"), "{out}");
    let csv = fs::read_to_string(dir.path().join("mse_per_seed.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7); // header + 6 seeds
    assert!(csv.starts_with("seed,lambda_sensors_per_km2,mse_db2,nodes,status"));
}

#[test]
fn map_three_records_single_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("three.jsonl");
    let mut lines = String::new();
    for (id, x, y, z) in [
        ("a", 0.1, 0.1, -90.0),
        ("b", 0.9, 0.2, -95.0),
        ("c", 0.4, 0.8, -100.0),
    ] {
        lines.push_str(&format!(
            "{}\n",
            serde_json::json!({
                "sensor_id": id,
                "timestamp": 10.0,
                "lat": y,
                "lon": x,
                "f_start_hz": 1.0e9,
                "bin_hz": 1.0,
                "psd_dbm_per_hz": [z],
                "gain_db": 0.0,
            })
        ));
    }
    fs::write(&records, lines).unwrap();
    let out_dir = dir.path().join("out");
    let (out, err, code) = rfmap(&[
        "map",
        "--records",
        records.to_str().unwrap(),
        "--f-lo-hz",
        "0.9e9",
        "--f-hi-hz",
        "1.1e9",
        "--region",
        "0:1:0:1",
        "--grid",
        "21",
        "--fill",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("3 fused sites"), "{out}");
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("recon.json")).unwrap()).unwrap();
    // one triangle spans well under the full square
    let unmasked = sidecar["unmasked_nodes"].as_u64().unwrap();
    assert!(unmasked > 0 && unmasked < 21 * 21);
    assert!(out_dir.join("recon_filled.pgm").exists());
}

#[test]
fn map_drops_off_band_records_with_count() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("mixed.jsonl");
    let mut lines = String::new();
    for (x, y, f_start) in [
        (0.1, 0.1, 1.0e9),
        (0.9, 0.2, 1.0e9),
        (0.4, 0.8, 1.0e9),
        (0.5, 0.5, 5.0e9), // off band
        (0.6, 0.6, 5.0e9), // off band
    ] {
        lines.push_str(&format!(
            "{}\n",
            serde_json::json!({
                "sensor_id": "s",
                "timestamp": 10.0,
                "lat": y,
                "lon": x,
                "f_start_hz": f_start,
                "bin_hz": 1.0,
                "psd_dbm_per_hz": [-90.0],
                "gain_db": 0.0,
            })
        ));
    }
    fs::write(&records, lines).unwrap();
    let (out, err, code) = rfmap(&[
        "map",
        "--records",
        records.to_str().unwrap(),
        "--f-lo-hz",
        "0.9e9",
        "--f-hi-hz",
        "1.1e9",
        "--region",
        "0:1:0:1",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(
        out.contains("2 dropped (2 off-band, 0 off-window, 0 off-region)"),
        "{out}"
    );
}

#[test]
fn welch_on_cu8_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let iq = dir.path().join("capture.cu8");
    // constant-envelope rotation at fs/4: power (127.5/127.5)^2-ish
    let mut bytes = Vec::new();
    for i in 0..4096 {
        let phase = std::f64::consts::FRAC_PI_2 * i as f64;
        let re = (127.5 + 127.0 * phase.cos()).round() as u8;
        let im = (127.5 + 127.0 * phase.sin()).round() as u8;
        bytes.push(re);
        bytes.push(im);
    }
    fs::write(&iq, bytes).unwrap();
    let psd_path = dir.path().join("psd.json");
    let (out, err, code) = rfmap(&[
        "welch",
        "--input",
        iq.to_str().unwrap(),
        "--format",
        "cu8",
        "--rate-hz",
        "2e6",
        "--center-hz",
        "1e9",
        "--band",
        "1.0e9:1.001e9",
        "--out",
        psd_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("band power"), "{out}");
    let psd: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&psd_path).unwrap()).unwrap();
    assert_eq!(psd["values_dbm_per_hz"].as_array().unwrap().len(), 256);
    // the tone sits at center + fs/4
    let band = out.lines().find(|l| l.contains("band power")).unwrap();
    let dbm: f64 = band
        .split('=')
        .nth(1)
        .unwrap()
        .trim()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(dbm.abs() < 0.5, "tone power should be near 0 dBm: {dbm}");

    // bad format flag is a usage error
    let (_, _, code) = rfmap(&[
        "welch",
        "--input",
        iq.to_str().unwrap(),
        "--format",
        "wav",
        "--rate-hz",
        "2e6",
        "--center-hz",
        "1e9",
    ]);
    assert_eq!(code, 2);
}
