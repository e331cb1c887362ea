use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn slowlight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slowlight"))
        .args(args)
        .output()
        .unwrap()
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        sub,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    slowlight(&args)
}

const SMALL: &str = r#"
[optics]
wavelength = "795 nm"

[design]
feature_scale = "100 um"
diffusion = "11 cm^2/s"

[grid]
n = 128
pitch = "12.5 um"

[source.row]
count = 2
waist_over_feature = 1
separation_waists = 3

[run]
modes = ["free_space", "eit"]
z_rayleigh = 1
slices = 4
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn metadata(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap()
}

fn assert_checksums(out: &Path) {
    let meta = metadata(out);
    let artifacts = meta["artifacts"].as_array().unwrap();
    assert!(!artifacts.is_empty());
    for a in artifacts {
        let bytes = fs::read(out.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(
            hex::encode(Sha256::digest(&bytes)),
            a["sha256"].as_str().unwrap()
        );
    }
}

#[test]
fn chi_scan_writes_one_csv_per_detuning() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("chi");
    let o = run(
        "chi-scan",
        &repo().join("configs/chi_scan.toml"),
        &out,
        &["--strict"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for label in ["p0.00", "p1.00", "m1.00", "p2.00", "m2.00"] {
        let text = fs::read_to_string(out.join(format!("chi_delta_{label}.csv"))).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "k_over_k0[-],im_chi_over_alpha[-],re_chi_over_alpha[-]"
        );
        assert_eq!(text.lines().count(), 402);
    }
    assert_checksums(&out);
    assert_eq!(metadata(&out)["command"], "chi-scan");
}

#[test]
fn design_reports_derived_quantities() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("design");
    let o = run("design", &repo().join("configs/design.toml"), &out, &[]);
    assert!(o.status.success());
    let d: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("design.json")).unwrap()).unwrap();
    assert!(d["cancellation_residual"].as_f64().unwrap().abs() <= 1e-12);
    let k0 = d["k0"].as_f64().unwrap();
    assert!((k0 - std::f64::consts::PI * 1e4).abs() < 1e-8 * k0);
    let kz = d["kappa_z_r"].as_f64().unwrap();
    // (2 − g)/(2g)·π² at Γ = 2Γp, w₀ = π/k₀
    assert!((kz - 1.5 * std::f64::consts::PI.powi(2)).abs() < 1e-9 * kz);
    assert_checksums(&out);
}

#[test]
fn propagate_writes_artifacts_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "small.toml",
        &format!(
            "{SMALL}outputs = [\"heatmaps\", \"raw\", \"widths\", \"cross_section\", \"report\"]\n"
        ),
    );
    let out = tmp.path().join("run");
    let o = run("propagate", &cfg, &out, &["--threads", "2", "--strict"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for mode in ["free_space", "eit"] {
        let d = out.join(mode);
        for f in [
            "heatmap_000.pgm",
            "heatmap_004.pgm",
            "xz_map.pgm",
            "field_input.bin",
            "field_input.json",
            "field_final.bin",
            "field_final.json",
            "widths.csv",
            "cross_section.csv",
            "report.json",
        ] {
            assert!(d.join(f).is_file(), "{mode}/{f}");
        }
        assert_eq!(
            fs::metadata(d.join("field_final.bin")).unwrap().len(),
            128 * 128 * 8
        );
        assert_eq!(
            fs::read_to_string(d.join("widths.csv"))
                .unwrap()
                .lines()
                .count(),
            6
        );
    }
    assert_checksums(&out);
    let meta = metadata(&out);
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
    assert!(meta["derived"]["rayleigh_length"].as_f64().unwrap() > 0.0);
    assert!(meta["resolved"]["grid"]["nx"] == 128);

    // same config, same hash and identical CSVs
    let again = tmp.path().join("again");
    assert!(run("propagate", &cfg, &again, &["--threads", "1"])
        .status
        .success());
    assert_eq!(metadata(&again)["config_hash"], meta["config_hash"]);
    assert_eq!(
        fs::read(out.join("eit/widths.csv")).unwrap(),
        fs::read(again.join("eit/widths.csv")).unwrap()
    );
}

#[test]
fn sweep_keeps_config_order_and_records_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "{SMALL}outputs = [\"widths\"]\n[sweep]\nparameter = \"source.row.waist_over_feature\"\nvalues = [1.5, 0.1, 1]\n"
    );
    let cfg = write_config(tmp.path(), "sweep.toml", &text);
    let out = tmp.path().join("sweep");
    let o = run("sweep", &cfg, &out, &["--threads", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("0,1.5,free_space,ok"));
    assert!(rows[1].starts_with("0,1.5,eit,ok"));
    // a 10 μm waist violates the resolution guard on a 12.5 μm grid
    assert!(rows[2].starts_with("1,0.1,,error,"), "{}", rows[2]);
    assert!(rows[2].contains("resolution guard"));
    assert!(rows[3].starts_with("2,1,free_space,ok"));
    assert_checksums(&out);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");

    // 1: configuration errors
    let missing = run("propagate", &tmp.path().join("nope.toml"), &out, &[]);
    assert_eq!(missing.status.code(), Some(1));
    let bad_unit = write_config(
        tmp.path(),
        "unit.toml",
        &SMALL.replace("\"795 nm\"", "\"795 m/s\""),
    );
    let o = run("propagate", &bad_unit, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("optics.wavelength"));
    let unknown = write_config(
        tmp.path(),
        "unknown.toml",
        &format!("{SMALL}colour = \"blue\"\n"),
    );
    let o = run("propagate", &unknown, &out, &["--strict"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.colour"));
    // without --strict the unknown key is only a warning
    let o = run("propagate", &unknown, &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.colour"));

    // 2: runtime error (output path is a regular file)
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, b"x").unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    assert_eq!(
        run("propagate", &cfg, &blocker.join("sub"), &[])
            .status
            .code(),
        Some(2)
    );

    // 3: band-limit warning escalated by --strict
    let narrow = write_config(
        tmp.path(),
        "narrow.toml",
        &SMALL.replace("waist_over_feature = 1", "waist_over_feature = 0.5"),
    );
    let o = run("propagate", &narrow, &tmp.path().join("n1"), &["--strict"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("band_limit_exceeded"));
    assert_eq!(
        run("propagate", &narrow, &tmp.path().join("n2"), &[])
            .status
            .code(),
        Some(0)
    );
}
