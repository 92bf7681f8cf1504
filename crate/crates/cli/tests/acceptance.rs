//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails. Built without the libtest harness so the lines are
//! always shown.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use kmpp::oracle::{bound_constant, enumerate_seedings, exact_expected_cost, expected_prefix_costs};
use kmpp::seeding::{plusplus_indices, seed_with};
use kmpp::{lloyd_refine, rng, Dataset, LloydConfig, Strategy};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

const BIN: &str = env!("CARGO_BIN_EXE_kmpp");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn kmpp(out: &Path, threads: usize, args: &[&str]) -> String {
    let res = Command::new(BIN)
        .arg("--out")
        .arg(out)
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .env_remove("KMPP_OUT_DIR")
        .output()
        .expect("binary runs");
    assert!(
        res.status.success(),
        "kmpp {args:?} failed: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    String::from_utf8(res.stdout).unwrap()
}

fn read_json(path: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_records(path: impl AsRef<Path>) -> Vec<HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            headers
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

// ---- criterion 1 -------------------------------------------------------------

fn toy() -> Dataset<f64> {
    Dataset::from_values(&[0.0, 1.0, 3.0]).unwrap()
}

fn criterion_1(dir: &Path) -> Outcome {
    let started = Instant::now();
    let exact = exact_expected_cost(&toy(), 2).unwrap();
    let target = 1.3 / 3.0;

    let input = dir.join("toy.csv");
    fs::write(&input, "0\n1\n3\n").unwrap();
    let out = dir.join("c1");
    kmpp(
        &out,
        1,
        &[
            "enumerate",
            "--input",
            input.to_str().unwrap(),
            "--k",
            "2",
            "--mc-reps",
            "100000",
            "--seed",
            "1",
        ],
    );
    let elapsed = started.elapsed();
    let summary = read_json(out.join("summary.json"));
    let outcomes = summary["outcomes"].as_u64().unwrap();
    let mc = &summary["monte_carlo"];
    let (mean, se) = (mc["mean"].as_f64().unwrap(), mc["stderr"].as_f64().unwrap());
    let cli_exact = summary["expected_cost"].as_f64().unwrap();

    let pass = (exact - target).abs() <= 1e-12
        && (cli_exact - target).abs() <= 1e-12
        && outcomes == 6
        && (mean - target).abs() <= 3.0 * se
        && elapsed < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "exact {exact:.15} (|d| {:.1e}), {outcomes} outcomes, mc {mean:.6} +- {se:.6} ({:.2} se), {:.2}s",
            (exact - target).abs(),
            (mean - target).abs() / se,
            elapsed.as_secs_f64()
        ),
    )
}

// ---- criterion 2 -------------------------------------------------------------

fn criterion_2(dir: &Path) -> Outcome {
    let started = Instant::now();
    let out = dir.join("c2");
    kmpp(
        &out,
        1,
        &[
            "bound-suite",
            "--preset",
            "small-random",
            "--instances",
            "200",
            "--seed",
            "1",
        ],
    );
    let elapsed = started.elapsed();
    let rows = csv_records(out.join("bounds.csv"));
    let mut violations = 0;
    let mut degenerate = 0;
    let mut errors = 0;
    let mut worst: f64 = 0.0;
    for r in &rows {
        let k: f64 = r["k"].parse().unwrap();
        let bound = 8.0 * (k.ln() + 2.0);
        match r["status"].as_str() {
            "degenerate" => degenerate += 1,
            "pass" | "fail" => {
                let expected: f64 = r["expected"].parse().unwrap();
                let optimum: f64 = r["optimum"].parse().unwrap();
                worst = worst.max(expected / optimum);
                if expected > bound * optimum || r["status"] == "fail" {
                    violations += 1;
                }
            }
            _ => errors += 1,
        }
    }
    let c3 = bound_constant(3);
    let pass = rows.len() >= 200
        && violations == 0
        && errors == 0
        && (c3 - 24.79).abs() < 0.005
        && c3 > 24.0
        && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "{} instances, {violations} violations, {degenerate} degenerate, worst ratio {worst:.3}, 8(ln 3 + 2) = {c3:.4}, {:.1}s",
            rows.len(),
            elapsed.as_secs_f64()
        ),
    )
}

// ---- criterion 3 -------------------------------------------------------------

fn criterion_3() -> Outcome {
    let instances = kmpp::experiments::small_random_instances(200, 1);
    let mut violations = 0;
    let mut steps = 0;
    for (d, k) in &instances {
        let prefix = expected_prefix_costs(d, *k).unwrap();
        for w in prefix.windows(2) {
            steps += 1;
            if w[1] >= w[0] {
                violations += 1;
            }
        }
        // the last prefix is the full seeding
        let full = exact_expected_cost(d, *k).unwrap();
        if (prefix[k - 1] - full).abs() > 1e-12 * full.max(1.0) {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!(
            "{} instances, {steps} prefix steps, {violations} violations",
            instances.len()
        ),
    )
}

// ---- criterion 4 -------------------------------------------------------------

const SIZES: [usize; 4] = [100, 330, 1000, 3300];

fn run_figure_study(out: &Path, threads: usize) -> Duration {
    let started = Instant::now();
    kmpp(
        out,
        threads,
        &[
            "converge",
            "--grid",
            "4x4",
            "--k",
            "16",
            "--sizes",
            "100,330,1000,3300",
            "--reps",
            "50",
            "--ref",
            "100000",
            "--seed",
            "3",
        ],
    );
    started.elapsed()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &t in &idx[i..=j] {
            r[t] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn criterion_4(out: &Path, elapsed: Duration) -> Outcome {
    let rows = csv_records(out.join("study.csv"));
    let track: Vec<_> = rows
        .iter()
        .filter(|r| r["strategy"] == "plusplus" && r["refine"] == "false")
        .collect();
    let ms: Vec<f64> = track.iter().map(|r| r["m"].parse().unwrap()).collect();
    let gaps: Vec<f64> = track.iter().map(|r| r["gap"].parse().unwrap()).collect();
    let sizes_ok = ms == SIZES.map(|m| m as f64);
    // recompute each gap from the reported columns
    let study = read_json(out.join("study.json"));
    let ref_expectation = study["tracks"][0]["ref_expectation"].as_f64().unwrap();
    let gaps_consistent = track
        .iter()
        .zip(&gaps)
        .all(|(r, g)| ((r["ref_cost"].parse::<f64>().unwrap() - ref_expectation).abs() - g).abs() <= 1e-12);
    let rho = pearson(&ranks(&ms), &ranks(&gaps));
    let ratio = gaps[gaps.len() - 1] / gaps[0];
    let pass = sizes_ok && gaps_consistent && ratio <= 0.5 && rho < 0.0 && elapsed < Duration::from_secs(600);
    let shown: Vec<String> = gaps.iter().map(|g| format!("{g:.5}")).collect();
    outcome(
        pass,
        format!(
            "gaps [{}], final/initial {ratio:.3}, rank correlation {rho:.2}, ref expectation {ref_expectation:.5}, {:.0}s",
            shown.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

// ---- criterion 5 -------------------------------------------------------------

fn criterion_5() -> Outcome {
    let mut worst_rise: f64 = 0.0;
    let mut violations = 0;
    let mut iterations = 0;
    for pair in 0..1000u64 {
        let mut r = rng::child(55, rng::domain::PLAIN, pair);
        let m = r.random_range(5..=150);
        let blobs = r.random_range(1..=6);
        let centers: Vec<[f64; 2]> = (0..blobs)
            .map(|_| [r.random_range(-5.0..5.0), r.random_range(-5.0..5.0)])
            .collect();
        let spread: f64 = r.random_range(0.05..1.5);
        let pts: Vec<[f64; 2]> = (0..m)
            .map(|_| {
                let c = centers[r.random_range(0..blobs)];
                let dx: f64 = StandardNormal.sample(&mut r);
                let dy: f64 = StandardNormal.sample(&mut r);
                [c[0] + spread * dx, c[1] + spread * dy]
            })
            .collect();
        let d = Dataset::from_rows(&pts).unwrap();
        let k = r.random_range(1..=8.min(m));
        let strategy = if pair % 2 == 0 {
            Strategy::PlusPlus
        } else {
            Strategy::UniformRandom
        };
        let start = seed_with(strategy, &d, k, &mut r).unwrap();
        let seeded = kmpp::cost_empirical(&d, &start).unwrap();
        let trace = lloyd_refine(&d, &start, &LloydConfig::default()).unwrap();
        let mut last = trace.initial_cost;
        for it in &trace.iterations {
            iterations += 1;
            if it.cost > last + 1e-12 {
                violations += 1;
                worst_rise = worst_rise.max(it.cost - last);
            }
            last = it.cost;
        }
        if trace.final_cost() > seeded + 1e-12 {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("1000 pairs, {iterations} iterations, {violations} violations (largest rise {worst_rise:.1e})"),
    )
}

// ---- criterion 6 -------------------------------------------------------------

fn criterion_6() -> Outcome {
    let d = toy();
    let runs = 100_000u64;
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for r in 0..runs {
        let idx = plusplus_indices(&d, 2, &mut rng::child(6, rng::domain::MC_SEEDING, r)).unwrap();
        *counts.entry(idx).or_default() += 1;
    }
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for o in enumerate_seedings(&d, 2).unwrap() {
        let seen = counts.get(&o.indices).copied().unwrap_or(0) as f64 / runs as f64;
        let se = (o.probability * (1.0 - o.probability) / runs as f64).sqrt();
        let z = (seen - o.probability).abs() / se;
        worst = worst.max(z);
        pass &= z <= 4.0;
    }
    pass &= counts.len() == 6;
    // conditional P(second = 3 | first = 0) = 9/10
    let first_zero = counts.get(&vec![0, 1]).unwrap_or(&0) + counts.get(&vec![0, 2]).unwrap_or(&0);
    let cond = *counts.get(&vec![0, 2]).unwrap_or(&0) as f64 / first_zero as f64;
    let cond_se = (0.9 * 0.1 / first_zero as f64).sqrt();
    let cond_z = (cond - 0.9).abs() / cond_se;
    pass &= cond_z <= 4.0;
    outcome(
        pass,
        format!("6 outcomes, largest deviation {worst:.2} se, P(3 | first 0) = {cond:.4} ({cond_z:.2} se from 0.9)"),
    )
}

// ---- criterion 7 -------------------------------------------------------------

#[derive(Debug)]
struct Svg {
    cells: Vec<(usize, String, Vec<[f64; 2]>)>,
    centers: Vec<(usize, [f64; 2])>,
    points: Vec<([f64; 2], String)>,
}

fn parse_points(s: &str) -> Vec<[f64; 2]> {
    s.split_whitespace()
        .map(|pair| {
            let (x, y) = pair.split_once(',').unwrap();
            [x.parse().unwrap(), y.parse().unwrap()]
        })
        .collect()
}

fn parse_svg(path: &Path) -> Result<Svg, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let doc = roxmltree::Document::parse(&text).map_err(|e| e.to_string())?;
    let root = doc.root_element();
    if root.tag_name().name() != "svg" || root.attribute("version") != Some("1.1") {
        return Err("root is not an SVG 1.1 element".into());
    }
    let mut svg = Svg {
        cells: Vec::new(),
        centers: Vec::new(),
        points: Vec::new(),
    };
    let num = |n: &roxmltree::Node, a: &str| n.attribute(a).unwrap().parse::<f64>().unwrap();
    for n in doc.descendants().filter(|n| n.is_element()) {
        match (n.tag_name().name(), n.attribute("class")) {
            ("polygon", Some("voronoi-cell")) => svg.cells.push((
                n.attribute("data-center").unwrap().parse().unwrap(),
                n.attribute("fill").unwrap().to_string(),
                parse_points(n.attribute("points").unwrap()),
            )),
            ("circle", Some("center")) => svg.centers.push((
                n.attribute("data-center").unwrap().parse().unwrap(),
                [num(&n, "cx"), num(&n, "cy")],
            )),
            ("circle", Some("point")) => svg
                .points
                .push(([num(&n, "cx"), num(&n, "cy")], n.attribute("fill").unwrap().to_string())),
            _ => {}
        }
    }
    Ok(svg)
}

fn inside(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut c = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0] {
            c = !c;
        }
        j = i;
    }
    c
}

/// Nearest center index and the gap to the runner-up, in pixel space (the
/// drawing uses one scale for both axes, so nearness is preserved).
fn nearest(centers: &[(usize, [f64; 2])], p: [f64; 2]) -> (usize, f64) {
    let mut d: Vec<(f64, usize)> = centers
        .iter()
        .map(|(j, c)| (((c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2)).sqrt(), *j))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    (d[0].1, d.get(1).map_or(f64::INFINITY, |s| s.0 - d[0].0))
}

/// Returns the number of checks made, or a description of the first problem.
fn check_figure(path: &Path, k: usize) -> Result<usize, String> {
    let svg = parse_svg(path)?;
    if svg.cells.len() != k || svg.centers.len() != k {
        return Err(format!("{} cells and {} centers", svg.cells.len(), svg.centers.len()));
    }
    let fill: HashMap<usize, &str> = svg.cells.iter().map(|(j, f, _)| (*j, f.as_str())).collect();
    // Coordinates are printed to 0.001 px; skip anything closer to a boundary.
    let slack = 0.01;
    let mut checks = 0;

    // probe grid over the cells' bounding box
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for (_, _, poly) in &svg.cells {
        for v in poly {
            for a in 0..2 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
    }
    let n = 60;
    for i in 0..n {
        for j in 0..n {
            let p = [
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / n as f64,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / n as f64,
            ];
            let (best, margin) = nearest(&svg.centers, p);
            if margin < slack {
                continue;
            }
            let owners: Vec<usize> = svg.cells.iter().filter(|c| inside(&c.2, p)).map(|c| c.0).collect();
            if owners != [best] {
                return Err(format!(
                    "probe {p:?} lies in cells {owners:?}, nearest center is {best}"
                ));
            }
            checks += 1;
        }
    }

    // every drawn point: its color is the color of the nearest center's cell
    for (p, color) in &svg.points {
        let (best, margin) = nearest(&svg.centers, *p);
        if margin < slack {
            continue;
        }
        if fill[&best] != color {
            return Err(format!(
                "point {p:?} has color {color}, nearest cell {best} is {}",
                fill[&best]
            ));
        }
        checks += 1;
    }
    Ok(checks)
}

fn criterion_7(out: &Path) -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for m in SIZES {
        let path = out.join(format!("clusters_plusplus_m{m}.svg"));
        match check_figure(&path, 16) {
            Ok(checks) => detail.push(format!("m={m}: 16 cells, {checks} checks")),
            Err(e) => {
                pass = false;
                detail.push(format!("m={m}: {e}"));
            }
        }
    }
    outcome(pass, detail.join("; "))
}

// ---- criterion 8 -------------------------------------------------------------

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "svg")))
        .collect();
    v.sort();
    v
}

fn same_outputs(a: &Path, b: &Path) -> Result<usize, String> {
    let (fa, fb) = (files(a), files(b));
    let names = |v: &[PathBuf]| v.iter().map(|p| p.file_name().unwrap().to_owned()).collect::<Vec<_>>();
    if names(&fa) != names(&fb) {
        return Err(format!("file sets differ in {}", a.display()));
    }
    for (x, y) in fa.iter().zip(&fb) {
        if fs::read(x).unwrap() != fs::read(y).unwrap() {
            return Err(format!("{} differs", x.file_name().unwrap().to_string_lossy()));
        }
    }
    Ok(fa.len())
}

fn criterion_8(dir: &Path, study_one: &Path) -> Outcome {
    let input = dir.join("toy.csv");
    let c1_four = dir.join("c1_threads4");
    kmpp(
        &c1_four,
        4,
        &[
            "enumerate",
            "--input",
            input.to_str().unwrap(),
            "--k",
            "2",
            "--mc-reps",
            "100000",
            "--seed",
            "1",
        ],
    );
    let study_four = dir.join("c4_threads4");
    run_figure_study(&study_four, 4);
    let mut compared = 0;
    for (a, b) in [(dir.join("c1"), c1_four), (study_one.to_path_buf(), study_four)] {
        match same_outputs(&a, &b) {
            Ok(n) => compared += n,
            Err(e) => return outcome(false, e),
        }
    }
    outcome(
        compared > 0,
        format!("{compared} CSV/SVG files byte-identical between 1 and 4 threads"),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let mut results = Vec::new();
    results.push(("1 oracle agreement", criterion_1(dir)));
    results.push(("2 approximation bound", criterion_2(dir)));
    results.push(("3 prefix monotonicity", criterion_3()));
    let study = dir.join("c4");
    let elapsed = run_figure_study(&study, 1);
    results.push(("4 consistency trend", criterion_4(&study, elapsed)));
    results.push(("5 lloyd descent", criterion_5()));
    results.push(("6 sampler exactness", criterion_6()));
    results.push(("7 figure structure", criterion_7(&study)));
    results.push(("8 determinism", criterion_8(dir, &study)));

    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
