use std::path::Path;
use std::process::{Command, Output};

fn waterslide(args: &[&str], jobs: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_waterslide"));
    cmd.args(args).env_remove("WATERSLIDE_JOBS");
    if let Some(j) = jobs {
        cmd.env("WATERSLIDE_JOBS", j);
    }
    cmd.output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: [&str; 4] = [
    "--override",
    "sweep.power.points=6",
    "--override",
    "sweep.pe.points=3",
];

#[test]
fn exit_codes_follow_the_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = path_str(&out);

    let bad_key = waterslide(&["point", "--override", "link.distanse=3"], None);
    assert_eq!(bad_key.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_key.stderr).contains("link.distanse: unknown key"));

    assert_eq!(waterslide(&["point", "--override", "oops"], None).status.code(), Some(2));
    assert_eq!(waterslide(&["no-such-command"], None).status.code(), Some(2));

    let missing = dir.path().join("absent.toml");
    assert_eq!(waterslide(&["point", "-c", path_str(&missing)], None).status.code(), Some(4));

    let nowhere = dir.path().join("no/dir/x.csv");
    let r = waterslide(&["density-finite", "-o", path_str(&nowhere), SMALL[0], SMALL[1]], None);
    assert_eq!(r.status.code(), Some(4));

    // 7 Gbps over 3 GHz exceeds what a binary channel can carry.
    let r = waterslide(&["point", "--channel", "bsc", "--override", "link.data_rate=7e9"], None);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));

    let r = waterslide(&["density-finite", "-o", o, SMALL[0], SMALL[1]], None);
    assert_eq!(r.status.code(), Some(0));
    assert!(out.exists());
    assert!(dir.path().join("x.csv.meta").exists());
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    for command in ["density-upper-bound", "waterslide-awgn"] {
        let a = dir.path().join(format!("{command}-1.csv"));
        let b = dir.path().join(format!("{command}-3.csv"));
        let mut args = vec![command, "-o", path_str(&a)];
        args.extend(SMALL);
        assert!(waterslide(&args, Some("1")).status.success());
        args[2] = path_str(&b);
        assert!(waterslide(&args, Some("3")).status.success());
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{command}");
    }
}

#[test]
fn practical_curve_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let r = waterslide(
        &[
            "density-practical",
            "-c",
            concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/density_finite.toml"),
            "-o",
            path_str(&out),
            "--override",
            "sweep.power.points=6",
        ],
        None,
    );
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let got = std::fs::read_to_string(&out).unwrap();
    let golden = include_str!("golden/density_practical.csv");
    assert_eq!(got, golden);
}

#[test]
fn point_prints_key_value_lines() {
    let r = waterslide(&["point", "--override", "link.target_pe=1e-9"], None);
    assert!(r.status.success());
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.starts_with("channel = awgn\ntarget_pe = 1.0000000000000001e-9\n"), "{text}");
    let total: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("total_power = "))
        .unwrap()
        .parse()
        .unwrap();
    let transmit: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("transmit_power = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(total > transmit && transmit > 0.04118);
}
