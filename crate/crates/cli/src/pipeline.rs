//! The stages behind each subcommand, usable without the binary.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use chronocycle::embedding::{
    default_tau_grid, embedding_dimension, optimal_delay, orthogonality_curve, sliding_window, spectrum,
    subsample_indices, MeanAbsInnerProduct, Peak,
};
use chronocycle::reduction::{reduce_with, ReductionOptions};
use chronocycle::{
    build_rips, EmbeddingParams, F2Chain, Filtration, LabeledPointCloud, MaxRadius, OptimizedRepresentative, Optimizer,
    PersistencePair, ReducedDecomposition, RelaxationPolicy, RevisedSimplex, RipsConfig, Significance, TimeSeries,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, TauGrid};
use crate::pca;

pub const SCHEMA: u32 = 1;
pub const EMBEDDING_FILE: &str = "embedding.json";
pub const DIAGRAM_FILE: &str = "diagram.json";
pub const REPRESENTATIVES_FILE: &str = "representatives.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tau: f64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub schema: u32,
    pub t0: f64,
    pub dt: f64,
    pub samples: usize,
    pub threshold_fraction: f64,
    pub peaks: Vec<Peak>,
    pub d: usize,
    pub tau: f64,
    pub curve: Vec<CurvePoint>,
    /// Window start time of each point.
    pub labels: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl EmbeddingReport {
    pub fn cloud(&self) -> chronocycle::Result<LabeledPointCloud> {
        LabeledPointCloud::new(self.points.clone(), self.labels.clone())
    }
}

/// Vertex ids in every record below are indices into the embedding's points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub dim: usize,
    pub birth: f64,
    /// `None` for classes that never die.
    pub death: Option<f64>,
    pub birth_simplex: Vec<usize>,
    pub death_simplex: Option<Vec<usize>>,
    pub initial_representative: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionSummary {
    pub dim: usize,
    pub pairs: usize,
    pub significance_threshold: f64,
    pub significant: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramReport {
    pub schema: u32,
    pub point_indices: Vec<usize>,
    pub max_dim: usize,
    pub max_radius: Option<f64>,
    pub simplices: usize,
    pub summary: Vec<DimensionSummary>,
    pub pairs: Vec<PairRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub pair: PairRecord,
    pub kind: String,
    pub policy: RelaxationPolicy,
    pub relaxed_birth: f64,
    pub simplices_alive: usize,
    pub free_directions: usize,
    pub support: Vec<Vec<usize>>,
    pub coefficients: Vec<f64>,
    pub objective: f64,
    pub rounded_objective: f64,
    /// Some coefficient is not an integer; `support` then lists every
    /// simplex with a nonzero coefficient.
    pub fractional: bool,
    pub is_cycle: bool,
    pub homologous: bool,
    pub persists: Option<bool>,
    pub dispersion: f64,
    pub initial_dispersion: f64,
    pub residual: f64,
    pub pivots: usize,
    /// Sorted distinct time labels of the support vertices.
    pub time_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentativesReport {
    pub schema: u32,
    pub diagram: DiagramReport,
    pub classes: Vec<ClassRecord>,
}

pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let file = File::open(path).with_context(|| format!("opening series {}", path.display()))?;
    Ok(TimeSeries::read_csv(BufReader::new(file))?)
}

pub fn write_series(ts: &TimeSeries, path: &Path) -> Result<()> {
    let file = create(path)?;
    ts.write_csv(BufWriter::new(file))?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

/// Picks the dimension from the spectrum and the delay from the grid.
pub fn embed(cfg: &PipelineConfig, ts: &TimeSeries) -> chronocycle::Result<EmbeddingReport> {
    let support = spectrum(ts, cfg.threshold_fraction)?;
    let d = embedding_dimension(&support);
    let grid = match &cfg.tau_grid {
        TauGrid::Count(n) => default_tau_grid(&support, *n),
        TauGrid::Values(v) => v.clone(),
    };
    let tau = optimal_delay(&support, d, &grid)?;
    let curve = orthogonality_curve(&MeanAbsInnerProduct, &support, d, &grid)
        .into_iter()
        .map(|(tau, score)| CurvePoint { tau, score })
        .collect();
    let cloud = sliding_window(ts, EmbeddingParams { d, tau })?;
    Ok(EmbeddingReport {
        schema: SCHEMA,
        t0: ts.t0(),
        dt: ts.dt(),
        samples: ts.len(),
        threshold_fraction: cfg.threshold_fraction,
        peaks: support.peaks,
        d,
        tau,
        curve,
        labels: cloud.labels().to_vec(),
        points: cloud.points().to_vec(),
    })
}

/// A reduced Rips filtration over a subsample of the embedding.
pub struct Complex {
    /// Embedding index of each local vertex.
    pub point_indices: Vec<usize>,
    /// Time label of each local vertex.
    pub labels: Vec<f64>,
    pub filtration: Filtration,
    pub decomposition: ReducedDecomposition,
    pub max_dim: usize,
    pub max_radius: Option<f64>,
}

impl Complex {
    pub fn build(emb: &EmbeddingReport, subsample: usize, cfg: &PipelineConfig) -> chronocycle::Result<Self> {
        let n = emb.points.len();
        if n < 2 {
            return Err(chronocycle::Error::EmptyCloud);
        }
        let point_indices = subsample_indices(n, subsample.min(n))?;
        let labels: Vec<f64> = point_indices.iter().map(|&i| emb.labels[i]).collect();
        let cloud =
            LabeledPointCloud::new(point_indices.iter().map(|&i| emb.points[i].clone()).collect(), labels.clone())?;
        let radius = cfg.max_radius.map_or(MaxRadius::Enclosing, MaxRadius::Value);
        let rips = RipsConfig { max_dim: cfg.max_dim, max_radius: radius, max_simplices: Some(cfg.max_simplices) };
        let filtration = build_rips(&cloud, &rips)?;
        let decomposition = reduce_with(&filtration, ReductionOptions::for_filtration(&filtration));
        Ok(Complex {
            point_indices,
            labels,
            filtration,
            decomposition,
            max_dim: cfg.max_dim,
            max_radius: cfg.max_radius,
        })
    }

    pub fn significance(&self, cfg: &PipelineConfig) -> Significance {
        Significance { threshold: cfg.significance, essential_death: self.max_radius.unwrap_or(f64::INFINITY) }
    }

    fn vertices(&self, i: usize) -> Vec<usize> {
        self.filtration.simplex(i).vertices().iter().map(|&v| self.point_indices[v]).collect()
    }

    fn chain_vertices(&self, c: &F2Chain) -> Vec<Vec<usize>> {
        c.support().map(|i| self.vertices(i)).collect()
    }

    pub fn pair_record(&self, p: &PersistencePair) -> PairRecord {
        PairRecord {
            dim: p.dim,
            birth: p.birth,
            death: p.death.is_finite().then_some(p.death),
            birth_simplex: self.vertices(p.birth_simplex),
            death_simplex: p.death_simplex.map(|i| self.vertices(i)),
            initial_representative: self.chain_vertices(&p.initial_rep),
        }
    }

    pub fn diagram(&self, dim: usize) -> chronocycle::Result<Vec<PersistencePair>> {
        self.decomposition.diagram(&self.filtration, dim)
    }

    pub fn report(&self, cfg: &PipelineConfig) -> chronocycle::Result<DiagramReport> {
        let sig = self.significance(cfg);
        let mut summary = Vec::new();
        let mut pairs = Vec::new();
        for dim in 0..=self.max_dim {
            let diagram = self.diagram(dim)?;
            summary.push(DimensionSummary {
                dim,
                pairs: diagram.len(),
                significance_threshold: sig.resolve(&diagram),
                significant: chronocycle::optimizer::significant_classes(&diagram, sig).len(),
            });
            pairs.extend(diagram.iter().map(|p| self.pair_record(p)));
        }
        Ok(DiagramReport {
            schema: SCHEMA,
            point_indices: self.point_indices.clone(),
            max_dim: self.max_dim,
            max_radius: self.max_radius,
            simplices: self.filtration.len(),
            summary,
            pairs,
        })
    }

    pub fn class_record(&self, r: &OptimizedRepresentative) -> ClassRecord {
        let s = &r.solution;
        let mut trace: Vec<f64> = s
            .support
            .iter()
            .flat_map(|&i| self.filtration.simplex(i).vertices().iter().map(|&v| self.labels[v]))
            .collect();
        trace.sort_by(f64::total_cmp);
        trace.dedup();
        ClassRecord {
            pair: self.pair_record(&r.pair),
            kind: r.kind.name().to_string(),
            policy: r.policy,
            relaxed_birth: r.relaxed_birth,
            simplices_alive: r.num_p,
            free_directions: r.num_q,
            support: s.support.iter().map(|&i| self.vertices(i)).collect(),
            coefficients: s.coefficients.clone(),
            objective: s.objective,
            rounded_objective: s.rounded_objective,
            fractional: s.fractional,
            is_cycle: r.is_cycle,
            homologous: r.homologous,
            persists: r.persists,
            dispersion: r.dispersion,
            initial_dispersion: r.initial_dispersion,
            residual: s.residual,
            pivots: s.pivots,
            time_trace: trace,
        }
    }

    /// Optimizes the significant classes of every configured dimension.
    pub fn optimize(&self, cfg: &PipelineConfig) -> Result<Vec<OptimizedRepresentative>> {
        let kinds = cfg.weight_kinds()?;
        let backend = RevisedSimplex::default();
        let mut optimizer = Optimizer::new(&self.filtration, &self.decomposition, &self.labels, &backend);
        optimizer.round_tol = cfg.round_tol;
        let mut out = Vec::new();
        for &dim in &cfg.dims {
            let diagram = self.diagram(dim)?;
            out.extend(optimizer.optimize_all(&diagram, cfg.policy, &kinds, self.significance(cfg))?);
        }
        Ok(out)
    }
}

pub fn representatives(complex: &Complex, cfg: &PipelineConfig) -> Result<RepresentativesReport> {
    let reps = complex.optimize(cfg)?;
    Ok(RepresentativesReport {
        schema: SCHEMA,
        diagram: complex.report(cfg)?,
        classes: reps.iter().map(|r| complex.class_record(r)).collect(),
    })
}

/// Writes the plot tables and returns the paths written.
pub fn export(cfg: &PipelineConfig) -> Result<Vec<std::path::PathBuf>> {
    let dir = &cfg.out_dir;
    let emb: EmbeddingReport = read_json(&dir.join(EMBEDDING_FILE))?;
    let reps: Option<RepresentativesReport> = optional_json(&dir.join(REPRESENTATIVES_FILE))?;
    let diagram: Option<DiagramReport> = optional_json(&dir.join(DIAGRAM_FILE))?;
    let mut written = Vec::new();

    if let Some(diagram) = diagram.as_ref().or(reps.as_ref().map(|r| &r.diagram)) {
        let path = dir.join("diagram.csv");
        let mut w = csv::Writer::from_writer(create(&path)?);
        w.write_record(["dim", "birth", "death"])?;
        for p in &diagram.pairs {
            let death = p.death.map_or_else(|| "inf".to_string(), |d| d.to_string());
            w.write_record([p.dim.to_string(), p.birth.to_string(), death])?;
        }
        w.flush()?;
        written.push(path);
    }

    let path = dir.join("pca.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["pc1", "pc2", "pc3", "label"])?;
    for (coords, label) in pca::project(&emb.points, 3).iter().zip(&emb.labels) {
        let mut row: Vec<String> = coords.iter().map(f64::to_string).collect();
        row.push(label.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    written.push(path);

    if let Some(reps) = &reps {
        let ts = read_series(&cfg.input_path())?;
        for (k, class) in reps.classes.iter().enumerate() {
            let mut starts = vec![false; ts.len()];
            for &v in class.support.iter().flatten() {
                if let Some(s) = starts.get_mut(v) {
                    *s = true;
                }
            }
            let path = dir.join(format!("overlay_{k}_{}.csv", class.kind));
            let mut w = csv::Writer::from_writer(create(&path)?);
            w.write_record(["t", "value", "in_support"])?;
            for (j, (value, start)) in ts.values().iter().zip(&starts).enumerate() {
                w.write_record([ts.time(j).to_string(), value.to_string(), u8::from(*start).to_string()])?;
            }
            w.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

fn optional_json<T: DeserializeOwned>(path: &Path) -> Result<Option<T>> {
    if path.exists() {
        read_json(path).map(Some)
    } else {
        Ok(None)
    }
}
