use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use distexp_cli::read_table;

fn distexp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distexp"))
        .args(args)
        .current_dir(dir)
        .env_remove("DISTEXP_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn single_seed_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.cfg"), "# tiny run\nalgorithm=dfpl\nadversary=markov\nT=2000\nk=4\nseeds=1\n").unwrap();
    let o = distexp(&["run", "--config", "exp.cfg", "--out", "one.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("one.csv")).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.header.join(","), "algo,adversary,params,T,k,n,seed,regret,messages,reals_sent");
    assert_eq!(t.rows[0][..7].join(","), "dfpl,markov,epsilon=0.1;lambda=20,2000,4,2,0");
    assert!(String::from_utf8_lossy(&o.stdout).contains("regret"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["run", "--algorithm", "minibatch", "--adversary", "zigzag", "--mu", "50", "--T", "3000", "--k", "5", "--seeds", "6", "--p-sync", "0.05", "--out", out]
    };
    assert!(distexp(&args("a.csv"), dir.path()).status.success());
    let mut b = args("b.csv");
    b.extend(["--threads", "1"]);
    assert!(distexp(&b, dir.path()).status.success());
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert!(a.starts_with(b"# distexp-csv v1\n"));
}

#[test]
fn echoed_config_reproduces_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = distexp(
        &["run", "--algorithm", "counter", "--adversary", "block_coin", "--T", "1024", "--k", "4", "--seeds", "3", "--out", "a.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let cfg: String = text
        .lines()
        .skip(1)
        .filter_map(|l| l.strip_prefix("# "))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(dir.path().join("echo.cfg"), cfg).unwrap();
    assert!(distexp(&["run", "--config", "echo.cfg", "--out", "b.csv"], dir.path()).status.success());
    assert_eq!(text, fs::read_to_string(dir.path().join("b.csv")).unwrap());
}

#[test]
fn missing_algorithm_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "adversary=markov\n").unwrap();
    let o = distexp(&["run", "--config", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`algorithm`"), "{}", stderr(&o));
    assert!(!dir.path().join("run.csv").exists());
}

#[test]
fn bad_lines_and_values_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.cfg"), "algorithm=full\nadversary=markov\ncolour=red\n").unwrap();
    let o = distexp(&["run", "--config", "a.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3") && stderr(&o).contains("colour"));
    fs::write(dir.path().join("b.cfg"), "algorithm=full\nadversary=markov\nT=many\n").unwrap();
    let o = distexp(&["run", "--config", "b.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3") && stderr(&o).contains("`T`"));
    let o = distexp(&["run", "--algorithm", "counter", "--adversary", "markov", "--beta", "-1"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = distexp(&["run", "--algorithm", "full", "--adversary", "markov", "--set", "seeds"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_rows_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let o = distexp(
        &["sweep", "--param", "epsilon", "--values", "0.05,0.1,0.15", "--algorithm", "dfpl", "--adversary", "markov", "--T", "4000", "--k", "4", "--seeds", "4", "--out", "s.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("s.csv")).unwrap();
    assert_eq!(t.rows.len(), 3 * 4);
    assert_eq!(&t.header[..2], ["sweep_param", "sweep_value"]);
    let values: Vec<&str> = t.rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(values, ["0.05", "0.05", "0.05", "0.05", "0.1", "0.1", "0.1", "0.1", "0.15", "0.15", "0.15", "0.15"]);

    let o = distexp(&["sweep", "--param", "T", "--values", "", "--algorithm", "full", "--adversary", "markov"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = distexp(&["sweep", "--param", "colour", "--values", "1", "--algorithm", "full", "--adversary", "markov"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    // a bad grid point is caught before anything runs
    let o = distexp(
        &["sweep", "--param", "beta", "--values", "4,0", "--algorithm", "counter", "--adversary", "markov", "--out", "never.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("never.csv").exists());
}

#[test]
fn figure_smoke_variants() {
    let dir = tempfile::tempdir().unwrap();
    let o = distexp(&["figure", "fig_a", "--T", "2000", "--seeds", "3", "--out", "a.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("a.csv")).unwrap();
    assert_eq!(t.rows.len(), 5 * 6);
    let algos: Vec<&str> = t.rows.iter().step_by(6).map(|r| r[0].as_str()).collect();
    assert_eq!(algos, ["full", "none", "minibatch", "counter", "dfpl"]);

    let o = distexp(&["figure", "fig_b", "--T", "2000", "--seeds", "3", "--out", "b.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("b.csv")).unwrap();
    assert_eq!(t.rows.len(), 3 * 3);

    let o = distexp(&["figure", "fig_a", "--algorithm", "full"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
