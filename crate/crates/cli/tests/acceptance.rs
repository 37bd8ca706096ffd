//! Acceptance criteria, one line each. Run with
//! `cargo test -p chronocycle-cli --test acceptance`.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use chronocycle::lp::{build_lp, oracle_optimal, restrict_sets, solve, CycleLp};
use chronocycle::optimizer::{significant_classes, weights_for};
use chronocycle::reduction::{reduce_with, ReductionOptions, VTracking};
use chronocycle::weights::{length_weights, vertex_weights};
use chronocycle::{
    build_rips, BoundaryMatrix, F2Chain, FieldMode, Filtration, LabeledPointCloud, MaxRadius, Optimizer,
    RelaxationPolicy, RevisedSimplex, RipsConfig, Significance, Simplex, WeightKind,
};
use chronocycle_cli::config::PipelineConfig;
use chronocycle_cli::pipeline::{embed, Complex};
use chronocycle_cli::synth::{double_sine, noisy_sine};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed of the committed noisy-sine fixture.
const NOISY_SINE_SEED: u64 = 7;

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 oracle equivalence", oracle_equivalence, Duration::from_secs(60)),
        ("2 motivating example", motivating_example, Duration::MAX),
        ("3 bent cylinder diagram", bent_cylinder, Duration::MAX),
        ("4 noisy sine dispersion", noisy_sine_dispersion, Duration::from_secs(120)),
        ("5 double sine diagrams", double_sine_diagrams, Duration::from_secs(600)),
        ("6 relaxation monotonicity", relaxation_monotonicity, Duration::MAX),
        ("7 structural invariants", structural_invariants, Duration::from_secs(30)),
        ("8 determinism", determinism, Duration::MAX),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let mut result = run();
        let elapsed = start.elapsed();
        if elapsed > budget {
            result.pass = false;
            result.detail += &format!("; over time budget {budget:?}");
        }
        failed += usize::from(!result.pass);
        println!(
            "criterion {name}: {} ({:.1}s) {}",
            if result.pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            result.detail
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn filtration(entries: &[(&[usize], f64)]) -> Filtration {
    Filtration::new(entries.iter().map(|(v, x)| (Simplex::new(v.iter().copied()).unwrap(), *x)).collect()).unwrap()
}

fn random_rips(rng: &mut ChaCha8Rng, n: usize) -> Filtration {
    let points: Vec<Vec<f64>> =
        (0..n).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    let labels = (0..n).map(|i| i as f64).collect();
    build_rips(&LabeledPointCloud::new(points, labels).unwrap(), &RipsConfig::new(1, MaxRadius::Enclosing)).unwrap()
}

fn edge_set(f: &Filtration, c: &F2Chain) -> BTreeSet<Vec<usize>> {
    c.support().map(|i| f.simplex(i).vertices().to_vec()).collect()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let backend = RevisedSimplex::default();
    let (mut instances, mut mismatches, mut attempts) = (0, Vec::new(), 0);
    while instances < 60 && attempts < 10_000 {
        attempts += 1;
        let n = rng.random_range(5..=10);
        let f = random_rips(&mut rng, n);
        let dec = reduce_with(&f, ReductionOptions::for_filtration(&f));
        // integer sample times keep every cost sum exact
        let labels: Vec<f64> = (0..n).map(|_| rng.random_range(0..40) as f64).collect();
        for pair in dec.diagram(&f, 1).unwrap().iter().filter(|p| !p.is_essential()) {
            // latest alive value with a nontrivial but enumerable set of free directions
            let candidates: Vec<f64> =
                f.values().iter().copied().filter(|&v| v >= pair.birth && v < pair.death).collect();
            let Some(sets) = candidates.iter().rev().find_map(|&b| {
                let s = restrict_sets(&f, &dec, 1, b).unwrap();
                (!s.q_set.is_empty() && s.q_set.len() <= 18).then_some(s)
            }) else {
                continue;
            };
            let simplices: Vec<Simplex> = sets.p_set.iter().map(|&i| f.simplex(i).clone()).collect();
            for (kind, weights) in
                [("identity", length_weights(simplices.len())), ("vertex", vertex_weights(&simplices, &labels))]
            {
                let lp: CycleLp = build_lp(&f, sets.clone(), &pair.initial_rep, weights).unwrap();
                let sol = solve(&lp, &backend, 1e-6).unwrap();
                let oracle = oracle_optimal(&lp).unwrap();
                if sol.fractional || sol.rounded_objective != oracle.objective {
                    mismatches.push(format!(
                        "{kind}: lp {} rounded {} oracle {}{}",
                        sol.objective,
                        sol.rounded_objective,
                        oracle.objective,
                        if sol.fractional { " (fractional)" } else { "" }
                    ));
                }
            }
            instances += 1;
        }
    }
    outcome(
        instances >= 50 && mismatches.is_empty(),
        format!(
            "{instances} instances, {} mismatches {:?}",
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

/// Vertices 0..8 carry the labels 4/3 pi, pi, 3 pi, 2/3 pi, pi/3, 0, 2 pi, 5/3 pi.
fn motivating_complex() -> (Filtration, Vec<f64>) {
    let labels = vec![4.0 * PI / 3.0, PI, 3.0 * PI, 2.0 * PI / 3.0, PI / 3.0, 0.0, 2.0 * PI, 5.0 * PI / 3.0];
    let mut entries: Vec<(&[usize], f64)> = (0..8).map(|v| (&[0usize, 1, 2, 3, 4, 5, 6, 7][v..=v], 0.0)).collect();
    let edges: [&[usize]; 12] =
        [&[0, 1], &[1, 3], &[3, 4], &[4, 5], &[5, 7], &[0, 7], &[1, 2], &[0, 2], &[2, 3], &[6, 7], &[4, 6], &[5, 6]];
    entries.extend(edges.iter().map(|e| (*e, 1.0)));
    let triangles: [&[usize]; 4] = [&[0, 1, 2], &[1, 2, 3], &[5, 6, 7], &[4, 5, 6]];
    entries.extend(triangles.iter().map(|t| (*t, 2.0)));
    (filtration(&entries), labels)
}

fn motivating_example() -> Outcome {
    let (f, labels) = motivating_complex();
    let dec = reduce_with(&f, ReductionOptions { track_v: VTracking::All });
    let diagram = dec.diagram(&f, 1).unwrap();
    let Some(class) = diagram.iter().find(|p| p.is_essential()) else {
        return outcome(false, "no essential class");
    };
    let figure: BTreeSet<Vec<usize>> =
        [[0, 1], [1, 3], [3, 4], [4, 6], [6, 7], [0, 7]].iter().map(|e| e.to_vec()).collect();
    let backend = RevisedSimplex::default();
    let opt = Optimizer::new(&f, &dec, &labels, &backend);
    let mut pass = true;
    let mut detail = Vec::new();
    let edges = f.indices_of_dim(1);
    let cost_of = |costs: &[f64], cycle: &BTreeSet<Vec<usize>>| -> f64 {
        edges.iter().zip(costs).filter(|(&i, _)| cycle.contains(f.simplex(i).vertices())).map(|(_, c)| c).sum()
    };
    for kind in [WeightKind::VertexBased, WeightKind::SimplexBased] {
        let r = opt.optimize_class(class, RelaxationPolicy::Full, kind).unwrap();
        let got = edge_set(&f, &r.representative());
        let hit = got == figure;
        pass &= hit;
        let weights = weights_for(kind, &f, edges, &labels);
        let (mine, theirs) = (cost_of(weights.column_costs(), &got), cost_of(weights.column_costs(), &figure));
        detail.push(format!(
            "{}: {} {:?}, cost {mine:.4} vs figure cycle {theirs:.4}{}",
            kind.name(),
            if hit { "figure cycle" } else { "other cycle" },
            got,
            if !hit && (mine - theirs).abs() <= 1e-9 * theirs { " (tied optimum)" } else { "" },
        ));
    }
    outcome(pass, detail.join("; "))
}

fn bent_cylinder() -> Outcome {
    // a b c a' b' c' = 0..6
    let mut entries: Vec<(&[usize], f64)> =
        vec![(&[0], 0.0), (&[1], 0.0), (&[2], 0.0), (&[3], 0.0), (&[4], 0.0), (&[5], 0.0)];
    entries.extend([&[0, 1][..], &[1, 2], &[0, 2], &[3, 4], &[4, 5], &[3, 5]].map(|e| (e, 1.0)));
    entries.extend([&[0, 3][..], &[0, 4], &[1, 4], &[1, 5], &[2, 5], &[2, 3]].map(|e| (e, 2.0)));
    entries.extend([&[0, 3, 4][..], &[0, 1, 4], &[1, 4, 5], &[1, 2, 5], &[2, 3, 5], &[0, 2, 3]].map(|t| (t, 2.0)));
    let f = filtration(&entries);
    let dec = reduce_with(&f, ReductionOptions { track_v: VTracking::All });
    let mut points: Vec<(f64, f64)> = dec.diagram(&f, 1).unwrap().iter().map(|p| (p.birth, p.death)).collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    outcome(points == vec![(1.0, 2.0), (1.0, f64::INFINITY)], format!("{points:?}"))
}

struct SineClass {
    complex: Complex,
    threshold: f64,
    significant: usize,
}

fn noisy_sine_class() -> SineClass {
    let cfg = PipelineConfig::default();
    let ts = noisy_sine(200, 0.1, 4.0, NOISY_SINE_SEED).unwrap();
    let emb = embed(&cfg, &ts).unwrap();
    let complex = Complex::build(&emb, cfg.ph_subsample, &cfg).unwrap();
    let diagram = complex.diagram(1).unwrap();
    let sig = Significance::default();
    let significant = significant_classes(&diagram, sig).len();
    SineClass { threshold: sig.resolve(&diagram), significant, complex }
}

fn noisy_sine_dispersion() -> Outcome {
    let sine = noisy_sine_class();
    let c = &sine.complex;
    let diagram = c.diagram(1).unwrap();
    if sine.significant != 1 {
        return outcome(false, format!("{} significant classes", sine.significant));
    }
    let backend = RevisedSimplex::default();
    let opt = Optimizer::new(&c.filtration, &c.decomposition, &c.labels, &backend);
    // the significance bound doubles as the minimum persistence
    let policy = RelaxationPolicy::AbsoluteBound(sine.threshold);
    let reps = opt
        .optimize_all(
            &diagram,
            policy,
            &[WeightKind::VertexBased, WeightKind::SimplexBased, WeightKind::Length],
            Significance::default(),
        )
        .unwrap();
    let disp = |k: WeightKind| reps.iter().find(|r| r.kind == k).unwrap().dispersion;
    let (v, s, l) = (disp(WeightKind::VertexBased), disp(WeightKind::SimplexBased), disp(WeightKind::Length));
    let period = 2.0 * PI;
    let pass = v <= l && v <= 1.5 * period && s <= 1.5 * period && l > period;
    let flags: Vec<String> =
        reps.iter().filter(|r| r.solution.fractional).map(|r| format!("{} fractional", r.kind.name())).collect();
    outcome(
        pass,
        format!("dispersion vertex {v:.3}, simplex {s:.3}, length {l:.3}, 1.5 period {:.3} {flags:?}", 1.5 * period),
    )
}

fn double_sine_diagrams() -> Outcome {
    let cap = 2.5;
    let cfg = PipelineConfig { max_dim: 2, max_radius: Some(cap), ..Default::default() };
    let ts = double_sine(1000, 0.0, 0).unwrap();
    let emb = embed(&cfg, &ts).unwrap();
    let complex = Complex::build(&emb, 500, &cfg).unwrap();
    // essential classes persist until the cap
    let sig = Significance::capped_at(cap);
    let count = |dim: usize| {
        let diagram = complex.diagram(dim).unwrap();
        let t = sig.resolve(&diagram);
        diagram.iter().filter(|p| p.persistence_capped(cap) > t).count()
    };
    let (h1, h2) = (count(1), count(2));
    outcome(
        emb.d == 4 && complex.point_indices.len() == 500 && h1 >= 2 && h2 == 1,
        format!("d = {}, significant H1 {h1}, significant H2 {h2}, {} simplices", emb.d, complex.filtration.len()),
    )
}

fn relaxation_monotonicity() -> Outcome {
    let sine = noisy_sine_class();
    let c = &sine.complex;
    let diagram = c.diagram(1).unwrap();
    let class = significant_classes(&diagram, Significance::default())[0].clone();
    let backend = RevisedSimplex::default();
    let opt = Optimizer::new(&c.filtration, &c.decomposition, &c.labels, &backend);
    let objectives: Vec<f64> = [0.5, 0.7, 0.9, 1.0]
        .iter()
        .map(|&rho| {
            opt.optimize_class(&class, RelaxationPolicy::Fraction(rho), WeightKind::VertexBased)
                .unwrap()
                .solution
                .objective
        })
        .collect();
    // a larger eps moves the birth earlier, shrinking the feasible set
    let pass = objectives.windows(2).all(|w| w[0] <= w[1]);
    outcome(pass, format!("objectives at eps = 0.5, 0.7, 0.9, 1.0 (d - b): {objectives:?}, non-decreasing"))
}

fn f2_in_span(f: &Filtration, c: &F2Chain, max_value: f64) -> bool {
    let mut basis: Vec<BTreeSet<usize>> = Vec::new();
    let reduce = |basis: &[BTreeSet<usize>], mut v: BTreeSet<usize>| {
        while let Some(&top) = v.iter().next_back() {
            match basis.iter().find(|b| b.iter().next_back() == Some(&top)) {
                Some(b) => v = v.symmetric_difference(b).copied().collect(),
                None => break,
            }
        }
        v
    };
    for &i in f.indices_of_dim(c.dim() + 1) {
        if f.value(i) <= max_value {
            let v = reduce(&basis, f.boundary_of(i).into_iter().map(|(j, _)| j).collect());
            if !v.is_empty() {
                basis.push(v);
            }
        }
    }
    reduce(&basis, c.support().collect()).is_empty()
}

fn structural_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let backend = RevisedSimplex::default();
    let mut failures: Vec<String> = Vec::new();
    let mut checked = 0;
    for trial in 0..150 {
        let n = rng.random_range(4..=9);
        let f = random_rips(&mut rng, n);
        for mode in [FieldMode::F2, FieldMode::Real] {
            let d = BoundaryMatrix::new(&f, mode);
            for j in 0..d.len() {
                let mut acc = vec![0i64; f.len()];
                for &(i, a) in d.column(j) {
                    for &(k, b) in d.column(i) {
                        acc[k] += (a as i64) * (b as i64);
                    }
                }
                let ok = match mode {
                    FieldMode::F2 => acc.iter().all(|v| v % 2 == 0),
                    FieldMode::Real => acc.iter().all(|&v| v == 0),
                };
                if !ok {
                    failures.push(format!("trial {trial}: boundary of boundary in {mode:?}"));
                }
            }
        }
        let dec = reduce_with(&f, ReductionOptions::for_filtration(&f));
        if !dec.is_reduced() || !dec.verify(&f) {
            failures.push(format!("trial {trial}: reduction"));
        }
        let labels: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        let opt = Optimizer::new(&f, &dec, &labels, &backend);
        for dim in 0..=1 {
            for pair in dec.diagram(&f, dim).unwrap() {
                checked += 1;
                if dim > 0 && !f.boundary(&pair.initial_rep).unwrap().is_zero() {
                    failures.push(format!("trial {trial}: initial representative"));
                }
                if dim == 0 || pair.is_essential() {
                    continue;
                }
                for kind in [WeightKind::VertexBased, WeightKind::Length] {
                    let r = opt
                        .optimize_class(&pair, RelaxationPolicy::Fraction(rng.random_range(0.05..=1.0)), kind)
                        .unwrap();
                    let rounded = &r.solution.rounded;
                    let mut diff = rounded.clone();
                    diff.add_assign(&pair.initial_rep);
                    let cycle = f.boundary(rounded).unwrap().is_zero();
                    if !(cycle && f2_in_span(&f, &diff, r.relaxed_birth)) {
                        failures.push(format!(
                            "trial {trial}: {} optimum not homologous{}",
                            kind.name(),
                            if r.solution.fractional { " (fractional)" } else { "" }
                        ));
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checked} classes, failures {:?}", failures.iter().take(3).collect::<Vec<_>>()),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_chronocycle"))
        .args(args)
        .arg("--config")
        .arg(dir.join("config.toml"))
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut snapshots = Vec::new();
    for run in ["a", "b"] {
        let dir = root.path().join(run);
        fs::create_dir_all(&dir).unwrap();
        let config = format!(
            "out_dir = {:?}\nseed = 11\nph_subsample = 90\noptimize_subsample = 70\nkinds = [\"vertex\", \"simplex\", \"length\"]\n\n[synth]\nkind = \"noisy_sine\"\nsamples = 120\n",
            dir.join("out")
        );
        fs::write(dir.join("config.toml"), config).unwrap();
        for cmd in ["synth", "embed", "ph", "optimize", "export"] {
            if !run_cli(&dir, &[cmd]) {
                return outcome(false, format!("run {run}: {cmd} failed"));
            }
        }
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir.join("out"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
            .collect();
        files.sort();
        snapshots.push(files);
    }
    let names: Vec<&str> = snapshots[0].iter().map(|f| f.0.as_str()).collect();
    outcome(snapshots[0] == snapshots[1] && names.len() >= 8, format!("{} files identical: {names:?}", names.len()))
}
