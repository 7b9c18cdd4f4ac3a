//! Runs every suite manifest under `suites/` at its shipped settings and
//! prints one line per criterion.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use fracpoin_cli::manifest::ExperimentManifest;
use fracpoin_cli::suites;

const CRITERIA: [(&str, u64); 12] = [
    ("reduction_identity", 1),
    ("strip_normalization", 1),
    ("scaling_law", 30),
    ("cutoff_vanishing", 120),
    ("strip_p1", 900),
    ("tensor_split", 600),
    ("strip_p2", 900),
    ("picone", 10),
    ("symmetrization", 300),
    ("annuli_windows", 600),
    ("angle_bound", 300),
    ("loss_sloane", 300),
];

fn manifest_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../suites").join(format!("{name}.json"))
}

#[test]
fn acceptance() {
    let out = tempfile::tempdir().unwrap();
    let mut failed = Vec::new();
    for (k, (name, limit)) in CRITERIA.iter().enumerate() {
        let mut m = ExperimentManifest::load(&manifest_path(name)).unwrap();
        m.outputs.json = Some(out.path().join(format!("{name}.json")));
        m.outputs.csv = Some(out.path().join(format!("{name}.csv")));
        let start = Instant::now();
        let result = suites::run(&m);
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*limit);
        let (pass, detail) = match result {
            Ok(rep) => {
                rep.write(m.outputs.json.as_deref(), m.outputs.csv.as_deref()).unwrap();
                let bad: Vec<String> = rep.failing().iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
                (rep.pass, if bad.is_empty() { format!("{} checks", rep.checks.len()) } else { bad.join("; ") })
            }
            Err(e) => (false, format!("error: {e}")),
        };
        let ok = pass && in_time;
        // written past the test harness capture so the summary always shows
        let mut stdout = std::io::stdout().lock();
        writeln!(
            stdout,
            "criterion {:>2} {:<20} {}  {:.1} s / {} s  {}",
            k + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit,
            detail
        )
        .unwrap();
        if !ok {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
