//! Named experiments that write CSV files, and their verification suites.
//!
//! Every CSV starts with `# experiment=<name> seed=<seed> params=<canonical>` where the
//! canonical form lists every resolved parameter as `key=value` joined by `;` in key
//! order. Reals are written with 17 significant digits. Each run appends a line to
//! `manifest.csv` next to its output.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::adversary::{
    self, AnswerUnqueried, BlackBoxSearch, EarlyStop, LinearScan, RandomPrefix,
};
use crate::concentration::{self, DomainFamily, FamilyKind, NnCurveConfig, QueryMode};
use crate::domain::{self, Dataset, Domain, Point};
use crate::error::{Error, Result};
use crate::graph;
use crate::pivot::{PivotStrategy, PivotTable};
use crate::reduce::{self, DistortionMode};
use crate::rng;
use crate::scan;
use crate::stats;
use crate::tree::{self, MetricTree, Splitter, TreeConfig};
use crate::vc::{self, UnitIntervals};

/// Environment variable naming the NASA vector file.
pub const NASA_ENV: &str = "NASA_VECTORS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentName {
    Fig2NnCurve,
    Fig3PivotHist,
    Fig4HammingAlpha,
    Fig5CubeScatter,
    Fig8BitsampleHist,
    Fig9SphereDistortion,
    PivotCurse,
    TreeCurse,
    GraphDegrees,
    AdversaryGame,
    DimsReport,
    UgcCheck,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 12] = [
        ExperimentName::Fig2NnCurve,
        ExperimentName::Fig3PivotHist,
        ExperimentName::Fig4HammingAlpha,
        ExperimentName::Fig5CubeScatter,
        ExperimentName::Fig8BitsampleHist,
        ExperimentName::Fig9SphereDistortion,
        ExperimentName::PivotCurse,
        ExperimentName::TreeCurse,
        ExperimentName::GraphDegrees,
        ExperimentName::AdversaryGame,
        ExperimentName::DimsReport,
        ExperimentName::UgcCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Fig2NnCurve => "fig2_nn_curve",
            ExperimentName::Fig3PivotHist => "fig3_pivot_hist",
            ExperimentName::Fig4HammingAlpha => "fig4_hamming_alpha",
            ExperimentName::Fig5CubeScatter => "fig5_cube_scatter",
            ExperimentName::Fig8BitsampleHist => "fig8_bitsample_hist",
            ExperimentName::Fig9SphereDistortion => "fig9_sphere_distortion",
            ExperimentName::PivotCurse => "pivot_curse",
            ExperimentName::TreeCurse => "tree_curse",
            ExperimentName::GraphDegrees => "graph_degrees",
            ExperimentName::AdversaryGame => "adversary_game",
            ExperimentName::DimsReport => "dims_report",
            ExperimentName::UgcCheck => "ugc_check",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentName::Fig2NnCurve => {
                "normalized mean nearest-neighbour distance against dimension"
            }
            ExperimentName::Fig3PivotHist => {
                "histogram of distances to one random pivot, with mean ± ε_NN bars"
            }
            ExperimentName::Fig4HammingAlpha => {
                "exact concentration function of the Hamming cube against the Chernoff bound"
            }
            ExperimentName::Fig5CubeScatter => {
                "projections of the unit cube and a uniform sample onto a random plane"
            }
            ExperimentName::Fig8BitsampleHist => {
                "histogram of additive distortions under coordinate sampling"
            }
            ExperimentName::Fig9SphereDistortion => {
                "mean distortion of a one-dimensional projection of the sphere"
            }
            ExperimentName::PivotCurse => "pivot-table candidate fraction against dimension",
            ExperimentName::TreeCurse => "metric-tree branching fraction against dimension",
            ExperimentName::GraphDegrees => {
                "witness Delaunay graph degrees and greedy search success"
            }
            ExperimentName::AdversaryGame => {
                "black-box search algorithms against the adversarial oracle"
            }
            ExperimentName::DimsReport => {
                "distance-variance and concentration dimensions of a vector file"
            }
            ExperimentName::UgcCheck => {
                "sup deviation of empirical interval measures at the sample bound"
            }
        }
    }

    /// Built-in parameter defaults. Keys outside this list are rejected.
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            ExperimentName::Fig2NnCurve => &[
                ("family", "gaussian"),
                ("d", "1,2,3,5,10,20,50,100,200,500,1000"),
                ("n", "1000"),
                ("trials", "100"),
                ("queries", "10"),
                ("mode", "fresh"),
                ("char_pairs", "100000"),
            ],
            ExperimentName::Fig3PivotHist => &[
                ("d", "14"),
                ("n", "100000"),
                ("bins", "100"),
                ("queries", "100"),
            ],
            ExperimentName::Fig4HammingAlpha => &[("d", "100"), ("grid", "100")],
            ExperimentName::Fig5CubeScatter => &[("d", "3,10,100,1000"), ("n", "1000")],
            ExperimentName::Fig8BitsampleHist => {
                &[("d", "500"), ("n", "3000"), ("k", "25"), ("bins", "50")]
            }
            ExperimentName::Fig9SphereDistortion => &[
                ("d", "2,4,8,16,32,64,128,256,512,1024"),
                ("pairs", "100000"),
            ],
            ExperimentName::PivotCurse => &[
                ("d", "2,8,32,128"),
                ("n", "4096"),
                ("k", "8"),
                ("queries", "100"),
                ("strategy", "random_data"),
            ],
            ExperimentName::TreeCurse => &[
                ("d", "2,8,32"),
                ("n", "4096"),
                ("leaf", "16"),
                ("queries", "100"),
                ("splitter", "ball_shell"),
            ],
            ExperimentName::GraphDegrees => &[
                ("d", "2,8,64"),
                ("n", "100"),
                ("witnesses", "100000"),
                ("queries", "1000"),
            ],
            ExperimentName::AdversaryGame => &[("n", "4,8,16,32"), ("seeds", "100")],
            ExperimentName::DimsReport => &[
                ("vectors", ""),
                ("dim", "20"),
                ("n", "10000"),
                ("pairs", "100000"),
                ("grid", "101"),
                ("witnesses", "20"),
            ],
            ExperimentName::UgcCheck => &[
                ("vc", "2"),
                ("eps", "0.1"),
                ("delta", "0.05"),
                ("n", "0"),
                ("trials", "100"),
                ("grid", "45"),
            ],
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| usage("name", format!("unknown experiment `{s}`; try `list`")))
    }
}

fn usage(key: &str, message: impl Into<String>) -> Error {
    Error::Usage {
        key: key.into(),
        message: message.into(),
    }
}

/// Splits `key=value`.
pub fn parse_kv(s: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(usage(s, "expected key=value")),
    }
}

/// `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(parse_kv)
        .collect()
}

/// Fully resolved parameters of one experiment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    /// Defaults, then the config file, then flags.
    pub fn resolve(
        name: ExperimentName,
        config: &[(String, String)],
        flags: &[(String, String)],
    ) -> Result<Self> {
        let mut map: BTreeMap<String, String> = name
            .defaults()
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        for (k, v) in config.iter().chain(flags) {
            if !map.contains_key(k) {
                let known: Vec<&str> = name.defaults().iter().map(|(k, _)| *k).collect();
                return Err(usage(
                    k,
                    format!("not a parameter of {name}; known: {}", known.join(", ")),
                ));
            }
            map.insert(k.clone(), v.clone());
        }
        Ok(Params(map))
    }

    pub fn canonical(&self) -> String {
        self.0
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn str(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).unwrap_or("")
    }

    fn parse<T: FromStr>(&self, key: &str, what: &str) -> Result<T> {
        self.str(key)
            .parse()
            .map_err(|_| usage(key, format!("`{}` is not {what}", self.str(key))))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.parse(key, "a nonnegative integer")
    }

    pub fn positive(&self, key: &str) -> Result<usize> {
        match self.usize(key)? {
            0 => Err(usage(key, "must be positive")),
            v => Ok(v),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.parse(key, "a real number")
    }

    pub fn usizes(&self, key: &str) -> Result<Vec<usize>> {
        let v: Vec<usize> = self
            .str(key)
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| usage(key, format!("`{s}` is not a positive integer")))
            })
            .collect::<Result<_>>()?;
        if v.is_empty() || v.contains(&0) {
            return Err(usage(key, "need a nonempty list of positive integers"));
        }
        Ok(v)
    }
}

/// An experiment with its parameters, seed and output path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub params: Params,
    pub seed: u64,
    pub out: PathBuf,
}

impl ExperimentSpec {
    pub fn new(
        name: ExperimentName,
        seed: u64,
        out: Option<PathBuf>,
        config: &[(String, String)],
        flags: &[(String, String)],
    ) -> Result<Self> {
        Ok(ExperimentSpec {
            name,
            params: Params::resolve(name, config, flags)?,
            seed,
            out: out.unwrap_or_else(|| PathBuf::from(format!("{name}.csv"))),
        })
    }

    pub fn defaults(name: ExperimentName, seed: u64) -> Self {
        Self::new(name, seed, None, &[], &[]).expect("defaults are valid")
    }

    fn header(&self) -> String {
        format!(
            "# experiment={} seed={} params={}\n",
            self.name,
            self.seed,
            self.params.canonical()
        )
    }
}

/// A CSV table with string cells.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, header: &str) -> String {
        let mut s = String::from(header);
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Seventeen significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn int(x: usize) -> String {
    x.to_string()
}

/// Additional file written next to the main CSV, named `<stem><suffix>`.
#[derive(Clone, Debug, PartialEq)]
pub enum SideFile {
    Csv(Table),
    Json(String),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExperimentOutput {
    pub main: Table,
    pub sides: Vec<(String, SideFile)>,
}

/// Files written by [`run`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub rows: usize,
}

/// Computes the experiment without touching the filesystem.
pub fn compute(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let p = &spec.params;
    let seed = spec.seed;
    match spec.name {
        ExperimentName::Fig2NnCurve => fig2_output(p, seed),
        ExperimentName::Fig3PivotHist => fig3_output(p, seed),
        ExperimentName::Fig4HammingAlpha => fig4_output(p),
        ExperimentName::Fig5CubeScatter => fig5_output(p, seed),
        ExperimentName::Fig8BitsampleHist => fig8_output(p, seed),
        ExperimentName::Fig9SphereDistortion => fig9_output(p, seed),
        ExperimentName::PivotCurse => pivot_curse_output(p, seed),
        ExperimentName::TreeCurse => tree_curse_output(p, seed),
        ExperimentName::GraphDegrees => graph_degrees_output(p, seed),
        ExperimentName::AdversaryGame => adversary_output(p, seed),
        ExperimentName::DimsReport => dims_output(p, seed),
        ExperimentName::UgcCheck => ugc_output(p, seed),
    }
}

/// Computes, writes the CSV and side files, and appends to the manifest.
pub fn run(spec: &ExperimentSpec) -> Result<RunSummary> {
    let out = compute(spec)?;
    let header = spec.header();
    if let Some(dir) = spec.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&spec.out, out.main.render(&header))?;
    let mut files = vec![spec.out.clone()];
    let stem = spec.out.with_extension("");
    for (suffix, side) in &out.sides {
        let path = PathBuf::from(format!("{}{suffix}", stem.display()));
        match side {
            SideFile::Csv(t) => fs::write(&path, t.render(&header))?,
            SideFile::Json(s) => fs::write(&path, s)?,
        }
        files.push(path);
    }
    append_manifest(spec, out.main.rows.len())?;
    Ok(RunSummary {
        files,
        rows: out.main.rows.len(),
    })
}

fn append_manifest(spec: &ExperimentSpec, rows: usize) -> Result<()> {
    let dir = spec
        .out
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let path = dir.join("manifest.csv");
    let fresh = !path.exists();
    let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
    if fresh {
        writeln!(f, "name,params,seed,version,rows,file")?;
    }
    writeln!(
        f,
        "{},\"{}\",{},{},{},{}",
        spec.name,
        spec.params.canonical(),
        spec.seed,
        env!("CARGO_PKG_VERSION"),
        rows,
        spec.out
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    )?;
    Ok(())
}

fn family(p: &Params) -> Result<DomainFamily> {
    let kind = match p.str("family") {
        "gaussian" => FamilyKind::Gaussian,
        "hamming" => FamilyKind::Hamming,
        "cube" => FamilyKind::UnitCube,
        "sphere" => FamilyKind::Sphere,
        other => {
            return Err(usage(
                "family",
                format!("`{other}` is not gaussian, hamming, cube or sphere"),
            ))
        }
    };
    Ok(DomainFamily::new(kind))
}

pub fn fig2_rows(p: &Params, seed: u64) -> Result<Vec<concentration::CurveRow>> {
    let mode = match p.str("mode") {
        "fresh" => QueryMode::Fresh,
        "loo" => QueryMode::LeaveOneOut,
        other => return Err(usage("mode", format!("`{other}` is not fresh or loo"))),
    };
    let cfg = NnCurveConfig {
        n: p.positive("n")?,
        trials: p.positive("trials")?,
        queries_per_trial: p.positive("queries")?,
        mode,
        char_size_pairs: p.usize("char_pairs")?,
    };
    if cfg.n < 2 {
        return Err(usage("n", "need at least two points"));
    }
    concentration::nn_distance_curve(family(p)?, &p.usizes("d")?, &cfg, seed)
}

fn fig2_output(p: &Params, seed: u64) -> Result<ExperimentOutput> {
    let mut t = Table::new(&["d", "value", "stderr"]);
    for r in fig2_rows(p, seed)? {
        t.push(vec![int(r.d), real(r.value), real(r.stderr)]);
    }
    Ok(ExperimentOutput {
        main: t,
        sides: vec![],
    })
}

/// Pivot histogram data.
#[derive(Clone, Debug, PartialEq)]
pub struct Fig3Data {
    pub histogram: Vec<stats::HistogramBin>,
    pub mean_distance: f64,
    pub mean_eps_nn: f64,
    pub mean_overhead_fraction: f64,
}

pub fn fig3_data(p: &Params, seed: u64) -> Result<Fig3Data> {
    let (d, n, bins, queries) = (
        p.positive("d")?,
        p.positive("n")?,
        p.positive("bins")?,
        p.positive("queries")?,
    );
    let dom = Domain::gaussian(d);
    let ds = dom.sample(n, rng::derive(seed, "data"))?;
    let pivot = dom.random_point(&mut rng::child(seed, "pivot"));
    let pt = PivotTable::build(&ds, vec![pivot])?;
    let dists = pt.column(0);
    let lo = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = dists.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let qs = fresh_queries(&dom, queries, seed);
    let eps_nn = stats::mean(&scan::nn_distances(&ds, &qs));
    let overhead: Vec<f64> = pt
        .range_batch(&qs, eps_nn)?
        .iter()
        .map(|(_, st)| st.access_overhead() as f64 / n as f64)
        .collect();
    Ok(Fig3Data {
        histogram: stats::histogram(&dists, lo, hi, bins),
        mean_distance: stats::mean(&dists),
        mean_eps_nn: eps_nn,
        mean_overhead_fraction: stats::mean(&overhead),
    })
}

fn fig3_output(p: &Params, seed: u64) -> Result<ExperimentOutput> {
    let data = fig3_data(p, seed)?;
    let mut t = Table::new(&["bin_left", "bin_right", "count"]);
    for b in &data.histogram {
        t.push(vec![real(b.left), real(b.right), int(b.count)]);
    }
    let mut bars = Table::new(&["label", "value"]);
    for (label, v) in [
        ("mean_distance", data.mean_distance),
        ("eps_nn", data.mean_eps_nn),
        ("bar_left", data.mean_distance - data.mean_eps_nn),
        ("bar_right", data.mean_distance + data.mean_eps_nn),
        ("mean_overhead_fraction", data.mean_overhead_fraction),
    ] {
        bars.push(vec![label.into(), real(v)]);
    }
    Ok(ExperimentOutput {
        main: t,
        sides: vec![("_bars.csv".into(), SideFile::Csv(bars))],
    })
}

/// `(ε, exact α, Chernoff bound)` rows.
pub fn fig4_rows(p: &Params) -> Result<Vec<(f64, f64, f64)>> {
    let d = p.positive("d")?;
    let grid = p.usize("grid")?;
    if grid < 2 {
        return Err(usage("grid", "need at least two grid points"));
    }
    let tails = concentration::HammingTails::new(d);
    Ok(concentration::unit_grid(grid)
        .into_iter()
        .map(|e| {
            let exact = if e == 0.0 { 0.5 } else { tails.alpha(e) };
            (e, exact, concentration::chernoff_alpha_bound(e, d))
        })
        .collect())
}

fn fig4_output(p: &Params) -> Result<ExperimentOutput> {
    let mut t = Table::new(&["eps", "exact", "chernoff"]);
    for (e, a, c) in fig4_rows(p)? {
        t.push(vec![real(e), real(a), real(c)]);
    }
    Ok(ExperimentOutput {
        main: t,
        sides: vec![],
    })
}

pub fn fig5_scatters(p: &Params, seed: u64) -> Result<Vec<reduce::CubeScatter>> {
    let n = p.positive("n")?;
    p.usizes("d")?
        .into_iter()
        .map(|d| reduce::cube_projection_scatter(d, n, rng::derive_indexed(seed, "cube", d as u64)))
        .collect()
}

fn fig5_output(p: &Params, seed: u64) -> Result<ExperimentOutput> {
    let mut t = Table::new(&["d", "x", "y", "tag"]);
    for s in fig5_scatters(p, seed)? {
        for (pts, tag) in [(&s.points, "point"), (&s.outline, "outline")] {
            for q in pts {
                t.push(vec![int(s.d), real(q[0]), real(q[1]), tag.into()]);
            }
        }
    }
    Ok(ExperimentOutput {
        main: t,
        sides: vec![],
    })
}

pub fn fig8_report(p: &Params, seed: u64) -> Result<reduce::DistortionReport> {
    let (d, n, k, bins) = (
        p.positive("d")?,
        p.positive("n")?,
        p.positive("k")?,
        p.positive("bins")?,
    );
    let ds = Domain::hamming(d).sample(n, rng::derive(seed, "data"))?;
    let map = reduce::bit_sample_map(d, k, rng::derive(seed, "map"))
        .map_err(|e| usage("k", e.to_string()))?;
    let img = map.apply_dataset(&ds)?;
    reduce::distortion_histogram(&ds, &img, DistortionMode::Additive, bins)
}

fn fig8_output(p: &Params, seed: u64) -> Result<ExperimentOutput> {
    let rep = fig8_report(p, seed)?;
    let mut t = Table::new(&["bin_left", "bin_right", "count"]);
    for b in &rep.histogram {
        t.push(vec![real(b.left), real(b.right), int(b.count)]);
    }
    let mut s = Table::new(&["stat", "value"]);
    for (k, v) in rep.summary.rows() {
        s.push(vec![k.into(), real(v)]);
    }
    s.push(vec!["within_0.2".into(), real(rep.fraction_in(-0.2, 0.2))]);
    Ok(ExperimentOutput {
        main: t,
        sides: vec![("_summary.csv".into(), SideFile::Csv(s))],
    })
}

/// `(d, mean ratio)` rows.
pub fn fig9_rows(p: &Params, seed: u64) -> Result<Vec<(usize, f64)>> {
    let pairs = p.positive("pairs")?;
    p.usizes("d")?
        .into_iter()
        .map(|d| {
            if d < 2 {
                return Err(usage("d", "sphere dimensions must be at least 2"));
            }
            let m = reduce::sphere_projection_distortion(
                d,
                pairs,
                rng::derive_indexed(seed, "sphere", d as u64),
            )?;
            Ok((d, m))
        })
        .collect()
}

fn fig9_output(p: &Params, seed: u64) -> Result<ExperimentOutput> {
    let mut t = Table::new(&["d", "value", "value_sqrt_d"]);
    for (d, m) in fig9_rows(p, seed)? {
        t.push(vec![int(d), real(m), real(m * (d as f64).sqrt())]);
    }
    Ok(ExperimentOutput {
        main: t,
        sides: vec![],
    })
}

fn fresh_queries(dom: &Domain, count: usize, seed: u64) -> Vec<Point> {
    let mut r = rng::child(seed, "queries");
    (0..count).map(|_| dom.random_point(&mut r)).collect()
}

/// Per-query statistics of one index at one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct CurseRow {
    pub d: usize,
    pub eps: f64,
    /// Candidate fraction (pivots) or bins-scanned fraction (trees) per query.
    pub fractions: Vec<f64>,
    pub per_query: Vec<(usize, usize, usize)>,
}

impl CurseRow {
    pub fn mean(&self) -> f64 {
        stats::mean(&self.fractions)
    }
}

fn pivot_strategy(p: &Params) -> Result<PivotStrategy> {
    match p.str("strategy") {
        "random_data" => Ok(PivotStrategy::RandomFromData),
        "random_domain" => Ok(PivotStrategy::RandomFromDomain),
        "farthest" => Ok(PivotStrategy::FarthestFirst { start: None }),
        other => Err(usage(
            "strategy",
            format!("`{other}` is not random_data, random_domain or farthest"),
        )),
    }
}

/// Candidate fractions for pivot range queries at `ε` = median `ε_NN`.
pub fn pivot_curse_rows(p: &Params, seed: u64) -> Result<Vec<CurseRow>> {
    let (n, k, queries) = (p.positive("n")?, p.positive("k")?, p.positive("queries")?);
    let strategy = pivot_strategy(p)?;
    p.usizes("d")?
        .into_iter()
        .map(|d| {
            let dseed = rng::derive_indexed(seed, "pivot_curse", d as u64);
            let dom = Domain::gaussian(d);
            let ds = dom.sample(n, rng::derive(dseed, "data"))?;
            let qs = fresh_queries(&dom, queries, dseed);
            let eps = scan::median_nn_distance(&ds, &qs);
            let pivots = crate::pivot::select_pivots(&ds, k, strategy, dseed)?;
            let pt = PivotTable::build(&ds, pivots)?;
            let res = pt.range_batch(&qs, eps)?;
            Ok(CurseRow {
                d,
                eps,
                fractions: res
                    .iter()
                    .map(|(_, st)| st.candidates as f64 / n as f64)
                    .collect(),
                per_query: res
                    .iter()
                    .map(|(_, st)| (st.candidates, st.true_hits, st.distance_computations))
                    .collect(),
            })
        })
        .collect()
}

fn pivot_curse_output(p: &Params, seed: u64) -> Result<ExperimentOutput> {
    let rows = pivot_curse_rows(p, seed)?;
    let (n, k) = (p.positive("n")?, p.positive("k")?);
    let mut t = Table::new(&[
        "d",
        "candidate_fraction",
        "stderr",
        "eps",
        "corollary_fraction",
    ]);
    let mut q = Table::new(&[
        "d",
        "query",
        "candidates",
        "true_hits",
        "distance_computations",
    ]);
    for r in &rows {
        let corollary = r
            .per_query
            .iter()
            .filter(|(c, h, _)| *c + k + h >= n)
            .count() as f64
            / r.per_query.len() as f64;
        t.push(vec![
            int(r.d),
            real(r.mean()),
            real(stats::std_err(&r.fractions)),
            real(r.eps),
            real(corollary),
        ]);
        for (i, (c, h, dc)) in r.per_query.iter().enumerate() {
            q.push(vec![int(r.d), int(i), int(*c), int(*h), int(*dc)]);
        }
    }
    Ok(ExperimentOutput {
        main: t,
        sides: vec![("_queries.csv".into(), SideFile::Csv(q))],
    })
}

fn splitter(p: &Params) -> Result<Splitter> {
    match p.str("splitter") {
        "ball_shell" => Ok(Splitter::BallShell),
        "gh" => Ok(Splitter::GeneralizedHyperplane),
        other => Err(usage(
            "splitter",
            format!("`{other}` is not ball_shell or gh"),
        )),
    }
}

/// Bins-scanned fractions for tree range queries at `ε` = median `ε_NN`.
pub fn tree_curse_rows(p: &Params, seed: u64) -> Result<Vec<CurseRow>> {
    let (n, leaf, queries) = (
        p.positive("n")?,
        p.positive("leaf")?,
        p.positive("queries")?,
    );
    let split = splitter(p)?;
    p.usizes("d")?
        .into_iter()
        .map(|d| {
            let dseed = rng::derive_indexed(seed, "tree_curse", d as u64);
            let dom = Domain::gaussian(d);
            let ds = dom.sample(n, rng::derive(dseed, "data"))?;
            let qs = fresh_queries(&dom, queries, dseed);
            let eps = scan::median_nn_distance(&ds, &qs);
            let mut cfg = TreeConfig::new(split, leaf);
            cfg.seed = rng::derive(dseed, "tree");
            let t = MetricTree::build(&ds, &cfg)?;
            let res: Vec<tree::TreeQueryStats> = qs
                .par_iter()
                .map(|q| t.range_query(q, eps).map(|r| r.1))
                .collect::<Result<_>>()?;
            Ok(CurseRow {
                d,
                eps,
                fractions: res.iter().map(|st| st.branching()).collect(),
                per_query: res
                    .iter()
                    .map(|st| (st.bins_scanned, st.leaf_count, st.distance_computations))
                    .collect(),
            })
        })
        .collect()
}

fn tree_curse_output(p: &Params, seed: u64) -> Result<ExperimentOutput> {
    let split = splitter(p)?;
    let mut t = Table::new(&[
        "d",
        "branching",
        "stderr",
        "eps",
        "gj_s",
        "gj_t",
        "gj_bound",
    ]);
    for r in tree_curse_rows(p, seed)? {
        let (s, ops) = split.goldberg_jerrum_params(r.d as u64);
        t.push(vec![
            int(r.d),
            real(r.mean()),
            real(stats::std_err(&r.fractions)),
            real(r.eps),
            s.to_string(),
            ops.to_string(),
            vc::goldberg_jerrum_bound(s, ops).to_string(),
        ]);
    }
    Ok(ExperimentOutput {
        main: t,
        sides: vec![],
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphRow {
    pub d: usize,
    pub degrees: graph::DegreeStats,
    pub greedy_exact_rate: f64,
}

/// Witness-graph degrees and greedy exact-NN rate per Gaussian dimension.
pub fn graph_rows(
    dims: &[usize],
    n: usize,
    witnesses: usize,
    queries: usize,
    seed: u64,
) -> Result<Vec<GraphRow>> {
    dims.iter()
        .map(|&d| {
            let dseed = rng::derive_indexed(seed, "graph", d as u64);
            let dom = Domain::gaussian(d);
            let ds = dom.sample(n, rng::derive(dseed, "data"))?;
            let g = graph::build_witness_graph(&ds, witnesses, rng::derive(dseed, "witnesses"))?;
            let qs = fresh_queries(&dom, queries, dseed);
            let exact = qs
                .par_iter()
                .map(|q| {
                    let (nn, dnn) = scan::nearest(&ds, q, None).expect("nonempty");
                    let r = graph::greedy_nn(&g, &ds, q, 0)?;
                    Ok(usize::from(r.answer == nn || r.distance == dnn))
                })
                .collect::<Result<Vec<usize>>>()?
                .iter()
                .sum::<usize>();
            Ok(GraphRow {
                d,
                degrees: g.degree_stats(),
                greedy_exact_rate: exact as f64 / queries as f64,
            })
        })
        .collect()
}

fn graph_degrees_output(p: &Params, seed: u64) -> Result<ExperimentOutput> {
    let rows = graph_rows(
        &p.usizes("d")?,
        p.positive("n")?,
        p.positive("witnesses")?,
        p.positive("queries")?,
        seed,
    )?;
    let mut t = Table::new(&["d", "mean_degree", "max_degree", "greedy_exact_rate"]);
    for r in rows {
        t.push(vec![
            int(r.d),
            real(r.degrees.mean),
            int(r.degrees.max),
            real(r.greedy_exact_rate),
        ]);
    }
    Ok(ExperimentOutput {
        main: t,
        sides: vec![],
    })
}

/// Aggregated games for one algorithm at one size.
#[derive(Clone, Debug, PartialEq)]
pub struct GameRow {
    pub n: usize,
    pub algorithm: String,
    pub games: usize,
    pub mean_calls: f64,
    pub fooled: usize,
}

/// The algorithm zoo used by the game experiment.
pub fn zoo(n: usize, seed: u64) -> Vec<Box<dyn BlackBoxSearch>> {
    vec![
        Box::new(LinearScan),
        Box::new(EarlyStop { calls: 1 }),
        Box::new(EarlyStop { calls: n / 2 }),
        Box::new(EarlyStop { calls: n - 2 }),
        Box::new(RandomPrefix { calls: n - 2, seed }),
        Box::new(AnswerUnqueried),
    ]
}

pub fn adversary_rows(
    sizes: &[usize],
    seeds: usize,
    seed: u64,
) -> Result<(Vec<GameRow>, Option<adversary::GameTranscript>)> {
    let mut rows = Vec::new();
    let mut example = None;
    for &n in sizes {
        if n < 4 {
            return Err(usage("n", "game sizes must be at least 4"));
        }
        let per_seed: Vec<Vec<adversary::GameTranscript>> = (0..seeds)
            .into_par_iter()
            .map(|s| {
                let sseed = rng::derive_indexed(
                    rng::derive_indexed(seed, "game_n", n as u64),
                    "space",
                    s as u64,
                );
                let space = adversary::random_space(n, sseed)?;
                zoo(n, sseed)
                    .iter_mut()
                    .map(|a| adversary::run_adversary_game(&space, a.as_mut()))
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (ai, name) in zoo(n, 0).iter().map(|a| a.name()).enumerate() {
            let games: Vec<&adversary::GameTranscript> = per_seed.iter().map(|g| &g[ai]).collect();
            rows.push(GameRow {
                n,
                algorithm: name,
                games: games.len(),
                mean_calls: stats::mean(
                    &games
                        .iter()
                        .map(|g| g.calls.len() as f64)
                        .collect::<Vec<_>>(),
                ),
                fooled: games.iter().filter(|g| g.fooled).count(),
            });
        }
        if example.is_none() {
            example = per_seed.first().and_then(|g| g.get(1).cloned());
        }
    }
    Ok((rows, example))
}

fn adversary_output(p: &Params, seed: u64) -> Result<ExperimentOutput> {
    let (rows, example) = adversary_rows(&p.usizes("n")?, p.positive("seeds")?, seed)?;
    let mut t = Table::new(&["n", "algorithm", "games", "mean_calls", "fooled"]);
    for r in rows {
        t.push(vec![
            int(r.n),
            r.algorithm,
            int(r.games),
            real(r.mean_calls),
            int(r.fooled),
        ]);
    }
    let sides = match example {
        Some(e) => vec![("_transcript.json".into(), SideFile::Json(e.to_json()?))],
        None => vec![],
    };
    Ok(ExperimentOutput { main: t, sides })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimsReport {
    pub source: String,
    pub points: usize,
    pub dim: usize,
    pub char_size: f64,
    pub dim_dist: f64,
    pub dim_alpha: f64,
}

/// The vector file named by the `vectors` parameter or, failing that, by `NASA_VECTORS`.
pub fn vectors_path(p: &Params) -> Option<PathBuf> {
    let explicit = p.str("vectors");
    if !explicit.is_empty() {
        return Some(PathBuf::from(explicit));
    }
    std::env::var_os(NASA_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// Intrinsic dimensions of a vector file, or of a Gaussian sample when no file is given.
pub fn dims_report(p: &Params, seed: u64) -> Result<DimsReport> {
    let dim = p.positive("dim")?;
    let pairs = p.positive("pairs")?;
    let (ds, source) = match vectors_path(p) {
        Some(path) => (
            domain::load_vectors(&path, dim)?,
            path.display().to_string(),
        ),
        None => (
            Domain::gaussian(dim).sample(p.positive("n")?, rng::derive(seed, "data"))?,
            format!("gaussian({dim})"),
        ),
    };
    dims_of(
        &ds,
        source,
        pairs,
        p.usize("grid")?,
        p.positive("witnesses")?,
        seed,
    )
}

pub fn dims_of(
    ds: &Dataset,
    source: String,
    pairs: usize,
    grid: usize,
    witnesses: usize,
    seed: u64,
) -> Result<DimsReport> {
    let char_size = concentration::empirical_char_size(ds, pairs, rng::derive(seed, "char_size"))?;
    let dim_dist = concentration::dim_dist(ds, pairs, rng::derive(seed, "dim_dist"))?;
    let normalized = ds.with_domain(
        ds.domain()
            .clone()
            .with_norm_factor(ds.domain().norm_factor() / char_size)?,
    )?;
    let profile = concentration::estimate_alpha_dataset(
        &normalized,
        &concentration::unit_grid(grid.max(2)),
        witnesses,
        rng::derive(seed, "alpha"),
    )?;
    Ok(DimsReport {
        source,
        points: ds.len(),
        dim: ds.domain().dimension(),
        char_size,
        dim_dist,
        dim_alpha: concentration::dim_alpha(&profile)?,
    })
}

fn dims_output(p: &Params, seed: u64) -> Result<ExperimentOutput> {
    let r = dims_report(p, seed)?;
    let mut t = Table::new(&["estimator", "value"]);
    t.push(vec!["points".into(), int(r.points)]);
    t.push(vec!["dim".into(), int(r.dim)]);
    t.push(vec!["char_size".into(), real(r.char_size)]);
    t.push(vec!["dim_dist".into(), real(r.dim_dist)]);
    t.push(vec!["dim_alpha".into(), real(r.dim_alpha)]);
    Ok(ExperimentOutput {
        main: t,
        sides: vec![],
    })
}

pub fn ugc_report(p: &Params, seed: u64) -> Result<vc::SupDeviationReport> {
    let bound = vc::ugc_sample_bound(p.positive("vc")?, p.f64("eps")?, p.f64("delta")?)
        .map_err(|e| usage("eps", e.to_string()))?;
    let n = match p.usize("n")? {
        0 => bound as usize,
        n => n,
    };
    let fam = UnitIntervals {
        grid: p.positive("grid")?,
    };
    vc::empirical_sup_deviation(&fam, n, p.positive("trials")?, seed)
}

fn ugc_output(p: &Params, seed: u64) -> Result<ExperimentOutput> {
    let r = ugc_report(p, seed)?;
    let mut t = Table::new(&["trial", "n", "sup_deviation"]);
    for (i, v) in r.per_trial.iter().enumerate() {
        t.push(vec![int(i), int(r.n), real(*v)]);
    }
    Ok(ExperimentOutput {
        main: t,
        sides: vec![],
    })
}

/// One assertion of a verification suite.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: String,
    pub threshold: String,
    /// `None` means skipped.
    pub pass: Option<bool>,
}

impl Check {
    fn new(
        label: impl Into<String>,
        measured: impl Into<String>,
        threshold: impl Into<String>,
        pass: bool,
    ) -> Self {
        Check {
            label: label.into(),
            measured: measured.into(),
            threshold: threshold.into(),
            pass: Some(pass),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match self.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        write!(
            f,
            "{}: {} [{}]: {verdict}",
            self.label, self.measured, self.threshold
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub name: ExperimentName,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass != Some(false))
    }
}

fn nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

fn list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.4}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn with(name: ExperimentName, overrides: &[(&str, &str)]) -> Params {
    let flags: Vec<(String, String)> = overrides
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    Params::resolve(name, &[], &flags).expect("verification overrides are valid keys")
}

/// Re-runs the invariants tied to one experiment.
pub fn verify(name: ExperimentName, seed: u64) -> Result<VerifyReport> {
    let p = |o: &[(&str, &str)]| with(name, o);
    let checks = match name {
        ExperimentName::Fig2NnCurve => {
            let rows = fig2_rows(&p(&[("d", "3,10,100,1000"), ("trials", "20")]), seed)?;
            let v: Vec<f64> = rows.iter().map(|r| r.value).collect();
            vec![
                Check::new(
                    "normalized ε_NN nondecreasing in d",
                    list(&v),
                    "d = 3, 10, 100, 1000",
                    nondecreasing(&v),
                ),
                Check::new(
                    "normalized ε_NN at d = 1000",
                    format!("{:.4}", v[3]),
                    "≥ 0.85",
                    v[3] >= 0.85,
                ),
            ]
        }
        ExperimentName::Fig3PivotHist => {
            let data = fig3_data(&p(&[]), seed)?;
            let total: usize = data.histogram.iter().map(|b| b.count).sum();
            vec![
                Check::new(
                    "histogram counts",
                    total.to_string(),
                    "= n = 100000",
                    total == 100_000,
                ),
                Check::new(
                    "mean access overhead / n at ε = mean ε_NN",
                    format!("{:.4}", data.mean_overhead_fraction),
                    "≥ 0.9",
                    data.mean_overhead_fraction >= 0.9,
                ),
            ]
        }
        ExperimentName::Fig4HammingAlpha => {
            let mut checks = Vec::new();
            for d in ["10", "100", "1000"] {
                let rows = fig4_rows(&p(&[("d", d)]))?;
                let ok = rows.iter().filter(|(_, a, c)| a <= c).count();
                checks.push(Check::new(
                    format!("exact ≤ chernoff at d = {d}"),
                    format!("{ok}/{} grid points", rows.len()),
                    "all",
                    ok == rows.len(),
                ));
            }
            let spot = concentration::exact_hamming_alpha(100, 0.1);
            checks.push(Check::new(
                "α(0.1) at d = 100",
                format!("{spot:.9}"),
                "0.0176001 ± 1e-6",
                (spot - 0.0176001).abs() < 1e-6,
            ));
            checks
        }
        ExperimentName::Fig5CubeScatter => {
            let s = fig5_scatters(&p(&[("d", "3,1000")]), seed)?;
            let (a, b) = (s[0].radius_ratio(), s[1].radius_ratio());
            vec![Check::new(
                "radius spread / outline radius, d = 1000 vs d = 3",
                format!("{b:.4} vs {a:.4}"),
                "smaller at d = 1000",
                b < a,
            )]
        }
        ExperimentName::Fig8BitsampleHist => {
            let rep = fig8_report(&p(&[]), seed)?;
            let within = rep.fraction_in(-0.2, 0.2);
            vec![
                Check::new(
                    "additive distortions within ±0.2",
                    format!("{within:.4}"),
                    "≥ 0.9",
                    within >= 0.9,
                ),
                Check::new(
                    "additive distortion std",
                    format!("{:.4}", rep.summary.std),
                    "in [0.05, 0.15]",
                    (0.05..=0.15).contains(&rep.summary.std),
                ),
            ]
        }
        ExperimentName::Fig9SphereDistortion => {
            let rows = fig9_rows(&p(&[("d", "16,64,256")]), seed)?;
            let scaled: Vec<f64> = rows.iter().map(|(d, m)| m * (*d as f64).sqrt()).collect();
            let c = stats::mean(&scaled);
            let spread = scaled
                .iter()
                .map(|s| (s / c - 1.0).abs())
                .fold(0.0, f64::max);
            let target = (2.0 / std::f64::consts::PI).sqrt();
            let rel = (scaled[2] / target - 1.0).abs();
            vec![
                Check::new(
                    "mean·√d relative spread over d = 16, 64, 256",
                    format!("{spread:.4}"),
                    "≤ 0.25",
                    spread <= 0.25,
                ),
                Check::new(
                    "mean·√d at d = 256 vs √(2/π)",
                    format!("{:.4}", scaled[2]),
                    "within 10%",
                    rel <= 0.10,
                ),
            ]
        }
        ExperimentName::PivotCurse => {
            let rows = pivot_curse_rows(&p(&[]), seed)?;
            let v: Vec<f64> = rows.iter().map(CurseRow::mean).collect();
            let last = *v.last().expect("four dimensions");
            vec![
                Check::new(
                    "candidate fraction nondecreasing over d",
                    list(&v),
                    "d = 2, 8, 32, 128",
                    nondecreasing(&v),
                ),
                Check::new(
                    "candidate fraction at d = 128",
                    format!("{last:.4}"),
                    "≥ 0.9",
                    last >= 0.9,
                ),
            ]
        }
        ExperimentName::TreeCurse => {
            let rows = tree_curse_rows(&p(&[]), seed)?;
            let v: Vec<f64> = rows.iter().map(CurseRow::mean).collect();
            let last = *v.last().expect("three dimensions");
            vec![
                Check::new(
                    "bins-scanned fraction nondecreasing over d",
                    list(&v),
                    "d = 2, 8, 32",
                    nondecreasing(&v),
                ),
                Check::new(
                    "bins-scanned fraction at d = 32",
                    format!("{last:.4}"),
                    "≥ 0.5",
                    last >= 0.5,
                ),
            ]
        }
        ExperimentName::GraphDegrees => {
            let deg = graph_rows(&[2, 64], 100, 100_000, 1, seed)?;
            let planar = graph_rows(&[2], 200, 100_000, 1000, rng::derive(seed, "planar"))?;
            let ratio = deg[1].degrees.mean / deg[0].degrees.mean;
            vec![
                Check::new(
                    "mean degree d = 64 / d = 2",
                    format!("{ratio:.3}"),
                    "≥ 2",
                    ratio >= 2.0,
                ),
                Check::new(
                    "greedy exact-NN rate, 2-D, n = 200",
                    format!("{:.4}", planar[0].greedy_exact_rate),
                    "≥ 0.99",
                    planar[0].greedy_exact_rate >= 0.99,
                ),
            ]
        }
        ExperimentName::AdversaryGame => {
            let (rows, _) = adversary_rows(&[4, 8, 16, 32], 100, seed)?;
            let early: Vec<&GameRow> = rows
                .iter()
                .filter(|r| r.algorithm != "linear_scan" && r.algorithm != "answer_unqueried")
                .collect();
            let fooled: usize = early.iter().map(|r| r.fooled).sum();
            let games: usize = early.iter().map(|r| r.games).sum();
            let scans: usize = rows
                .iter()
                .filter(|r| r.algorithm == "linear_scan")
                .map(|r| r.fooled)
                .sum();
            vec![
                Check::new(
                    "early-stop runs fooled",
                    format!("{fooled}/{games}"),
                    "all",
                    fooled == games,
                ),
                Check::new("full scans fooled", scans.to_string(), "0", scans == 0),
            ]
        }
        ExperimentName::DimsReport => {
            let params = p(&[]);
            match vectors_path(&params) {
                Some(path) => {
                    let r = dims_report(&params, seed)?;
                    vec![Check::new(
                        format!("dim_dist of {}", path.display()),
                        format!("{:.3}", r.dim_dist),
                        "5.18 ± 0.5",
                        (r.dim_dist - 5.18).abs() <= 0.5,
                    )]
                }
                None => vec![Check {
                    label: "dim_dist of the NASA vectors".into(),
                    measured: format!("{NASA_ENV} not set"),
                    threshold: "5.18 ± 0.5".into(),
                    pass: None,
                }],
            }
        }
        ExperimentName::UgcCheck => {
            let r = ugc_report(&p(&[]), seed)?;
            let ok = r.per_trial.iter().filter(|&&v| v <= 0.1).count();
            vec![Check::new(
                format!("sup deviation ≤ 0.1 at n = {}", r.n),
                format!("{ok}/{} trials", r.per_trial.len()),
                "≥ 95",
                ok >= 95,
            )]
        }
    };
    Ok(VerifyReport { name, checks })
}
