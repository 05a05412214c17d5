//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test --release --test acceptance -- 7 8`. The exit status is
//! nonzero on failures only when `ACCEPTANCE_STRICT` is set.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regpart::cli::{self, benchmark_entries, block_distance_matrix, noise_sweep, planted_fit, planted_instance, search_quality};
use regpart::generators::{erdos_renyi, synth_graph_gen, NoisyCliqueSpec, PlantedPartitionSpec};
use regpart::regdecomp::{
    bfs_distances, distance_matrix, estimate_k, expected_planted_distances, sample_references, FitConfig, ReferenceScheme,
};
use regpart::regularity::{check_all_pairs, index_of_partition, summarize, Partition, SummarizationConfig};
use regpart::search::{laplacian_spectrum, spectral_distance, IndexOptions};
use regpart::summary::{blow_up, build_reduced_graph, reconstruction_error, WeightRule};
use regpart::{Graph, VertexClass};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Check = fn() -> Outcome;

fn index_monotonicity() -> Outcome {
    let mut good = 0;
    let mut notes = Vec::new();
    for run in 0..10u64 {
        let n = 1000 + 100 * run as usize;
        let spec = NoisyCliqueSpec { n, num_c: 3 + run as usize % 5, eta1: 0.1 + 0.02 * run as f64, eta2: 0.1, seed: 100 + run };
        let g = synth_graph_gen(&spec).unwrap().graph;
        let cfg = SummarizationConfig { rng_seed: run, ..SummarizationConfig::default() };
        let trace = summarize(&g, &cfg).unwrap().trace;
        let ind: Vec<f64> = trace.iter().take(5).map(|r| r.ind).collect();
        if ind.windows(2).all(|w| w[1] >= w[0]) {
            good += 1;
        } else {
            notes.push(format!("run {run}: {ind:?}"));
        }
    }
    outcome(good >= 9, format!("{good}/10 runs non-decreasing {}", notes.join("; ")))
}

fn index_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for trial in 0..1000u64 {
        let n = rng.gen_range(8..120);
        let g = erdos_renyi(n, rng.gen_range(0.0..1.0), trial).unwrap();
        let k = rng.gen_range(2..=n / 2);
        let size = rng.gen_range(1..=n / k);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let classes = (0..k).map(|c| VertexClass::new(order[c * size..(c + 1) * size].to_vec(), n).unwrap()).collect();
        let exceptional = VertexClass::new(order[k * size..].to_vec(), n).unwrap();
        let p = Partition { classes, exceptional, epsilon: 0.05 };
        let ind = index_of_partition(&g, &p);
        lo = lo.min(ind);
        hi = hi.max(ind);
    }
    outcome((0.0..=0.5).contains(&lo) && (0.0..=0.5).contains(&hi), format!("ind range [{lo}, {hi}] over 1000 partitions"))
}

fn noise_separation() -> Outcome {
    let etas = [0.1, 0.2, 0.3, 0.4, 0.5];
    let rows = noise_sweep(&[2000], 5, &etas, &IndexOptions::default(), 0).unwrap();
    let wins = rows.iter().filter(|r| r.l2_summary < r.l2_noisy).count();
    let losses: Vec<String> = rows
        .iter()
        .filter(|r| r.l2_summary >= r.l2_noisy)
        .map(|r| format!("({}, {}): {:.0} vs {:.0}", r.eta1, r.eta2, r.l2_summary, r.l2_noisy))
        .collect();
    outcome(wins * 5 >= rows.len() * 4, format!("summary beats noisy input in {wins}/{} settings; losses {}", rows.len(), losses.join(", ")))
}

fn block_recovery() -> Outcome {
    let (k, size) = (6, 25);
    let n = k * size;
    let linked = |i: usize, j: usize| (i + j) % 3 == 0 || j == i + 1;
    let mut edges = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            if linked(i, j) {
                for u in i * size..(i + 1) * size {
                    for v in j * size..(j + 1) * size {
                        edges.push((u, v));
                    }
                }
            }
        }
    }
    let g = Graph::from_unweighted_edges(n, edges).unwrap();
    let classes = (0..k).map(|c| VertexClass::new((c * size..(c + 1) * size).collect(), n).unwrap()).collect();
    let p = Partition { classes, exceptional: VertexClass::new(Vec::new(), n).unwrap(), epsilon: 0.05 };
    let verdicts = check_all_pairs(&g, &p).unwrap();
    let mut errors = Vec::new();
    for rule in [WeightRule::Dense, WeightRule::RegularAndDense] {
        let r = build_reduced_graph(&g, &p, &verdicts, 0.05, rule).unwrap();
        let kept = r.retained_vertices().unwrap();
        errors.push(reconstruction_error(&blow_up(&r), &g.induced_subgraph(&kept).unwrap(), 2.0).unwrap());
    }
    outcome(errors.iter().all(|&e| e == 0.0), format!("l2 = {errors:?} (dense, regular-and-dense)"))
}

fn spectral_oracle() -> Outcome {
    let mut graphs = Vec::new();
    for n in 1..=5usize {
        for mask in 0..1u32 << (n * (n - 1) / 2) {
            let exact = common::symmetric_eigenvalues(&common::laplacian_from_mask(n, mask));
            let numeric = laplacian_spectrum(&common::graph_from_mask(n, mask)).unwrap();
            graphs.push((exact, numeric));
        }
    }
    let mut worst: f64 = 0.0;
    let mut pairs = 0usize;
    for (ea, na) in &graphs {
        for (eb, nb) in &graphs {
            let got = spectral_distance(na, nb, None).unwrap();
            let want = common::brute_spectral_distance(ea, eb, ea.len().min(eb.len()) / 2);
            worst = worst.max((got - want).abs());
            pairs += 1;
        }
    }
    outcome(worst <= 1e-8, format!("max |SD − oracle| = {worst:.2e} over {pairs} ordered pairs of {} graphs", graphs.len()))
}

fn search_quality_check() -> Outcome {
    let entries = benchmark_entries(1500, &[4, 8, 12, 16, 20], &[0.05, 0.1, 0.15, 0.2, 0.25, 0.3], &IndexOptions::default(), 0).unwrap();
    let q = search_quality(&entries, 5, 3, 36, 0).unwrap();
    outcome(q.map_summary > q.map_raw, format!("MAP@36 summary {:.4} vs raw {:.4}", q.map_summary, q.map_raw))
}

fn fit(seed: u64) -> FitConfig {
    FitConfig { k: 2, restarts: 20, iterations: 50, seed }
}

struct PlantedResults {
    full: regpart::cli::PlantedRun,
    sampled: regpart::cli::PlantedRun,
    below: regpart::cli::PlantedRun,
}

fn planted_results() -> &'static PlantedResults {
    static CELL: std::sync::OnceLock<PlantedResults> = std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        let spec = PlantedPartitionSpec { n: 2000, a: 20.0, b: 2.0, seed: 7 };
        let (g, truth) = planted_instance(&spec).unwrap();
        let all: Vec<usize> = (0..g.n()).collect();
        let full = planted_fit(&distance_matrix(&g, &all, &all).unwrap(), &truth, "all", &fit(7)).unwrap();
        let refs = sample_references(&g, ReferenceScheme::Uniform(400), 7).unwrap();
        let sampled = planted_fit(&distance_matrix(&g, &refs, &all).unwrap(), &truth, "uniform:400", &fit(7)).unwrap();
        let spec = PlantedPartitionSpec { n: 2000, a: 11.0, b: 11.0, seed: 7 };
        let (g, truth) = planted_instance(&spec).unwrap();
        let all: Vec<usize> = (0..g.n()).collect();
        let below = planted_fit(&distance_matrix(&g, &all, &all).unwrap(), &truth, "all", &fit(7)).unwrap();
        PlantedResults { full, sampled, below }
    })
}

fn planted_full() -> Outcome {
    let r = &planted_results().full;
    outcome(r.misclassification <= 0.05, format!("misclassification {:.4} on {} vertices", r.misclassification, r.targets))
}

fn planted_sampled() -> Outcome {
    let r = &planted_results().sampled;
    outcome(r.misclassification <= 0.05, format!("misclassification {:.4} with {} references", r.misclassification, r.m))
}

fn planted_below_threshold() -> Outcome {
    let r = &planted_results().below;
    outcome((0.4..=0.6).contains(&r.misclassification), format!("misclassification {:.4} at a = b = 11", r.misclassification))
}

fn em_monotonicity() -> Outcome {
    let p = planted_results();
    let runs = [&p.full, &p.sampled, &p.below];
    let increases: usize = runs.iter().map(|r| r.cost_increases).sum();
    let reseeds: usize = runs.iter().map(|r| r.reseeds).sum();
    let iterations: usize = runs.iter().flat_map(|r| &r.traces).map(|t| t.costs.len().saturating_sub(1)).sum();
    outcome(increases == 0, format!("{increases} cost increases over {iterations} iterations, {reseeds} re-seed events exempt"))
}

fn knee() -> Outcome {
    let (d, _) = block_distance_matrix(&[20, 20, 20], 2, 5).unwrap();
    let est = estimate_k(&d, 10, &FitConfig { k: 1, restarts: 20, iterations: 50, seed: 0 }, 0.01).unwrap();
    let c = &est.curve;
    let flat = (2..c.len() - 1).all(|i| ((c[i] - c[i + 1]) / c[i].abs()).abs() < 0.01);
    outcome(est.k_star == 3 && flat, format!("k* = {}, curve {:?}", est.k_star, c.iter().map(|x| (x * 10.0).round() / 10.0).collect::<Vec<_>>()))
}

fn distance_ordering() -> Outcome {
    let spec = PlantedPartitionSpec { n: 10_000, a: 20.0, b: 2.0, seed: 11 };
    let (g, truth) = planted_instance(&spec).unwrap();
    let sources = sample_references(&g, ReferenceScheme::Uniform(200), 11).unwrap();
    let (mut intra, mut inter) = ((0.0, 0usize), (0.0, 0usize));
    for &s in &sources {
        for (v, &d) in bfs_distances(&g, s).iter().enumerate() {
            if v == s || d == u32::MAX {
                continue;
            }
            let slot = if truth[v] == truth[s] { &mut intra } else { &mut inter };
            slot.0 += f64::from(d);
            slot.1 += 1;
        }
    }
    let (mi, mo) = (intra.0 / intra.1 as f64, inter.0 / inter.1 as f64);
    let (d1, d2) = expected_planted_distances(10_000, 20.0, 2.0).unwrap();
    let pass = mi < mo && (mo - mi).signum() == (d2 - d1).signum();
    outcome(pass, format!("empirical intra {mi:.3} inter {mo:.3}; expected {d1:.3} {d2:.3}"))
}

fn run_cli(args: &[String]) -> regpart::Result<()> {
    cli::run(args)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();
    let s = |x: &str| x.to_string();
    let commands: Vec<(Vec<String>, String)> = vec![
        (vec![s("generate"), s("noisy-clique"), s("--n"), s("200"), s("--clusters"), s("4"), s("--eta1"), s("0.1"), s("--eta2"), s("0.2"), s("--seed"), s("3"), s("--out"), p("nc.txt"), s("--labels-out"), p("nc.csv")], p("nc.txt")),
        (vec![s("generate"), s("er"), s("--n"), s("100"), s("--p"), s("0.1"), s("--seed"), s("3"), s("--out"), p("er.txt")], p("er.txt")),
        (vec![s("generate"), s("planted"), s("--n"), s("300"), s("--a"), s("20"), s("--b"), s("2"), s("--seed"), s("3"), s("--out"), p("pl.txt"), s("--labels-out"), p("pl.csv")], p("pl.txt")),
        (vec![s("summarize"), s("--input"), p("nc.txt"), s("--seed"), s("4"), s("--output"), p("sum.json"), s("--trace-out"), p("trace.csv")], p("sum.json")),
        (vec![s("blowup"), s("--summary"), p("sum.json"), s("--out"), p("blow.txt")], p("blow.txt")),
        (vec![s("eval-error"), s("--original"), p("nc.txt"), s("--reconstructed"), p("blow.txt"), s("--ground-truth"), p("nc.txt.gt"), s("--out"), p("err.csv")], p("err.csv")),
        (vec![s("db"), s("add"), s("--db"), p("db"), s("--id"), s("nc"), s("--input"), p("nc.txt"), s("--raw-spectrum")], p("db/add-nc")),
        (vec![s("db"), s("query"), s("--db"), p("db"), s("--input"), p("nc.txt"), s("--k"), s("1"), s("--csv"), s("--out"), p("rank.csv")], p("rank.csv")),
        (vec![s("decompose"), s("--input"), p("pl.txt"), s("--k"), s("2"), s("--refs"), s("uniform:50"), s("--restarts"), s("4"), s("--seed"), s("5"), s("--labels-out"), p("dec.csv"), s("--curve-out"), p("dec-curve.csv"), s("--rest"), s("classify"), s("--targets"), s("uniform:150")], p("dec.csv")),
        (vec![s("estimate-k"), s("--input"), p("pl.txt"), s("--k-max"), s("4"), s("--refs"), s("paths:10"), s("--restarts"), s("3"), s("--curve-out"), p("knee.csv")], p("knee.csv")),
        (vec![s("distances"), s("--input"), p("pl.txt"), s("--refs"), s("uniform:20"), s("--out"), p("dist.bin"), s("--csv-out"), p("dist.csv")], p("dist.bin")),
        (vec![s("reproduce"), s("noise-sweep"), s("--sizes"), s("200"), s("--etas"), s("0.1,0.3"), s("--out-dir"), p("rep")], p("rep/noise-sweep")),
        (vec![s("reproduce"), s("search-quality"), s("--n"), s("120"), s("--clusters"), s("2,4"), s("--noise"), s("0.1,0.2"), s("--k"), s("4"), s("--query-seeds"), s("2"), s("--out-dir"), p("rep")], p("rep/search-quality")),
        (vec![s("reproduce"), s("planted"), s("--n"), s("400"), s("--refs"), s("all,uniform:50"), s("--restarts"), s("4"), s("--out-dir"), p("rep")], p("rep/planted")),
        (vec![s("reproduce"), s("knee"), s("--k-max"), s("5"), s("--restarts"), s("4"), s("--out-dir"), p("rep")], p("rep/knee")),
    ];
    let mut failures = Vec::new();
    for (argv, primary) in &commands {
        let name = argv[..2].join(" ");
        if let Err(e) = run_cli(argv) {
            failures.push(format!("{name}: run failed: {e}"));
            continue;
        }
        let manifest = format!("{primary}.manifest.json");
        let recorded = cli::RunManifest::read(std::path::Path::new(&manifest)).unwrap();
        if recorded.outputs.is_empty() {
            failures.push(format!("{name}: no outputs recorded"));
        }
        if let Err(e) = run_cli(&[s("replay"), manifest]) {
            failures.push(format!("{name}: {e}"));
        }
    }
    outcome(failures.is_empty(), format!("{} commands replayed; {}", commands.len(), failures.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 13] = [
        ("index monotonicity", index_monotonicity),
        ("index bound", index_bound),
        ("noise separation", noise_separation),
        ("exact block recovery", block_recovery),
        ("spectral-distance oracle", spectral_oracle),
        ("search quality", search_quality_check),
        ("planted partition recovery", planted_full),
        ("sampled references", planted_sampled),
        ("below-threshold sanity", planted_below_threshold),
        ("EM monotonicity", em_monotonicity),
        ("knee detection", knee),
        ("distance ordering", distance_ordering),
        ("determinism", determinism),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        ran += 1;
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!("criterion {number:>2} {verdict} {name} ({:.1}s): {}", start.elapsed().as_secs_f64(), result.detail);
    }
    println!("{}/{ran} criteria passed", ran - failed);
    // Failures are reported, not hidden. Set ACCEPTANCE_STRICT=1 to turn them into a failing exit status.
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
