use std::fs;
use std::path::Path;
use std::process::Command;

fn eprsim(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_eprsim")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    v.sort();
    v
}

#[test]
fn infer_prints_the_inferred_level() {
    let (code, out, _) = eprsim(&["infer", "--measured-db", "-0.76", "--eta", "0.5"]);
    assert_eq!(code, 0);
    let line = out.lines().find(|l| l.starts_with("inferred_db = ")).unwrap();
    let v: f64 = line["inferred_db = ".len()..].parse().unwrap();
    assert!((v + 1.68).abs() < 0.02);
}

#[test]
fn validation_errors_exit_2_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[hbs]\ntransmittance = 1.5\n[paths]\neta = [0.5, 2.0]\n").unwrap();
    let out = dir.path().join("out");
    let (code, _, err) = eprsim(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "epr-spectrum",
    ]);
    assert_eq!(code, 2, "{err}");
    assert!(
        err.contains("hbs.transmittance") && err.contains("paths.eta[1]"),
        "{err}"
    );
    assert!(!out.exists());

    let (code, _, err) = eprsim(&["infer", "--measured-db", "-5", "--eta", "0.5"]);
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = eprsim(&[
        "--preset",
        "phasematch-12mm",
        "--out",
        out.to_str().unwrap(),
        "squeeze-spectrum",
    ]);
    assert_eq!(code, 2);
    assert!(!out.exists());
}

#[test]
fn corrupted_oracle_path_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = eprsim_cli::config::PRESETS
        .iter()
        .find(|(n, _)| *n == "paper-fig3")
        .unwrap()
        .1
        .replace("[mc]\n", "[mc]\neta_override = [0.8836, 0.4]\n");
    let cfg = dir.path().join("corrupt.toml");
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    let (code, stdout, _) = eprsim(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "validate",
    ]);
    assert_eq!(code, 3);
    assert!(stdout.contains("delta_epr.status = FAIL"), "{stdout}");
    assert!(out.join("validate.csv").exists());
}

#[test]
fn commands_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("squeeze");
    let (code, _, err) = eprsim(&[
        "--preset",
        "paper-fig2",
        "--out",
        out.to_str().unwrap(),
        "squeeze-spectrum",
    ]);
    assert_eq!(code, 0, "{err}");
    let files = listing(&out);
    for kind in ["raw", "norm"] {
        for trace in ["vacuum", "squeezed", "antisqueezed", "dark"] {
            let name = format!("squeeze_rbw100000_{kind}_{trace}.csv");
            assert!(files.contains(&name), "{name} in {files:?}");
        }
    }
    assert!(files.contains(&"squeeze_summary.txt".to_string()));
    assert!(!files.iter().any(|f| f.starts_with('.')), "{files:?}");

    let out = dir.path().join("pm");
    let (code, stdout, _) = eprsim(&[
        "--preset",
        "phasematch-12mm",
        "--out",
        out.to_str().unwrap(),
        "phasematch",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("fwhm_thz = "));
    assert!(fs::read_to_string(out.join("pm_curve.csv"))
        .unwrap()
        .starts_with("signal_wavelength_m,efficiency\n"));
}

#[test]
fn sample_dump_has_the_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = eprsim(&[
        "--preset",
        "lossless",
        "--out",
        dir.path().to_str().unwrap(),
        "validate",
        "--dump-samples",
    ]);
    assert_eq!(code, 0, "{err}");
    let bytes = fs::read(dir.path().join("mc_samples.bin")).unwrap();
    assert_eq!(&bytes[..8], b"EPRMC001");
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 0);
    assert_eq!(bytes.len(), 16 + 100_000 * 4 * 8);
}

#[test]
fn same_seed_gives_identical_bytes_and_other_seeds_differ() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let (code, _, err) = eprsim(&[
            "--preset",
            "paper-fig3",
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
            "epr-spectrum",
        ]);
        assert_eq!(code, 0, "{err}");
        out
    };
    let (a, b, c) = (run("a", "9"), run("b", "9"), run("c", "10"));
    let names = listing(&a);
    assert_eq!(names, listing(&b));
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n}");
    }
    let raw = "epr_rbw100000_raw_xminus.csv";
    assert_ne!(fs::read(a.join(raw)).unwrap(), fs::read(c.join(raw)).unwrap());
}

#[test]
fn sequential_flag_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("par"), dir.path().join("seq"));
    eprsim(&[
        "--preset",
        "paper-fig2",
        "--out",
        pa.to_str().unwrap(),
        "squeeze-spectrum",
    ]);
    eprsim(&[
        "--preset",
        "paper-fig2",
        "--out",
        pb.to_str().unwrap(),
        "--sequential",
        "squeeze-spectrum",
    ]);
    for n in listing(&pa) {
        assert_eq!(fs::read(pa.join(&n)).unwrap(), fs::read(pb.join(&n)).unwrap(), "{n}");
    }
}
