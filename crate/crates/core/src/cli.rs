//! Command-line experiment runner.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;

use crate::branching::{analyze, tune_poisson};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::figures::{figure, num, opt, FigureOptions, FIGURES};
use crate::netgen::{build_network, rewire};
use crate::netprops::{empirical_clustering, empirical_degree_corr, local_props, rewired_clustering};
use crate::rng::derive_seed;
use crate::simulate::estimate;

#[derive(Debug, Parser)]
#[command(name = "clustnet", version, about = "Clustered household networks and SIR epidemics")]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for simulation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic properties and epidemic quantities per parameter point.
    Analyze,
    /// Generate networks and measure their properties.
    Generate,
    /// Monte Carlo estimates of p_maj and z.
    Simulate,
    /// Plot data for fig1..fig5.
    Figure { name: String },
    /// Poisson-template (mu, r) for a target clustering and correlation.
    Tune {
        #[arg(long, default_value_t = 10.0)]
        gamma: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 10)]
        n_q: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Generate => "generate",
            Command::Simulate => "simulate",
            Command::Figure { .. } => "figure",
            Command::Tune { .. } => "tune",
        }
    }
}

/// Runs a parsed command and returns the files written.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    if let Some(threads) = cli.threads {
        // Only the first call in a process can set the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let needs_config = matches!(cli.command, Command::Analyze | Command::Generate | Command::Simulate);
    if needs_config && cli.config.is_none() {
        return Err(Error::Config(format!("`{}` requires --config", cli.command.name())));
    }
    if let Command::Figure { name } = &cli.command {
        if !FIGURES.contains(&name.as_str()) {
            return Err(Error::UnknownFigure(name.clone()));
        }
    }
    let loaded = cli.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let mut cfg = loaded.clone().unwrap_or_default();
    if let Some(seed) = cli.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    fs::create_dir_all(&cfg.output.dir)?;
    match cli.command {
        Command::Analyze => cmd_analyze(&cfg),
        Command::Generate => cmd_generate(&cfg),
        Command::Simulate => cmd_simulate(&cfg),
        Command::Figure { name } => {
            let opts = FigureOptions {
                n_sims: cfg.simulation.n_sims,
                sizes: if loaded.is_some() {
                    vec![cfg.simulation.n]
                } else {
                    FigureOptions::default().sizes
                },
                seed: cfg.simulation.seed,
                cutoff: cfg.simulation.cutoff,
            };
            cmd_figure(&cfg, &name, &opts)
        }
        Command::Tune { gamma, c, rho, n_q } => cmd_tune(&cfg, gamma, c, rho, n_q),
    }
}

fn csv_file(path: &Path, header: &str, columns: &[&str]) -> Result<csv::Writer<BufWriter<File>>> {
    let mut file = BufWriter::new(File::create(path)?);
    file.write_all(header.as_bytes())?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(columns)?;
    Ok(w)
}

fn finish(w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<PathBuf> {
    let mut inner = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    inner.flush()?;
    info!("wrote {}", path.display());
    Ok(path.to_path_buf())
}

pub fn cmd_analyze(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let path = cfg.output.dir.join("analyze.csv");
    let mut w = csv_file(
        &path,
        &cfg.header("analyze"),
        &[
            "point", "mu", "r", "p_rw", "p_i", "mean_d", "var_d", "c", "rho", "p_g", "r_star", "p_maj", "z",
        ],
    )?;
    for (k, point) in cfg.points()?.iter().enumerate() {
        let p = &point.params;
        let props = local_props(&p.household, &p.global, p.r, p.n_q)?;
        let rep = analyze(p)?;
        w.write_record([
            k.to_string(),
            opt(point.mu),
            num(point.r),
            num(point.p_rw),
            num(point.p_i),
            num(props.degree_dist.mean()),
            num(props.degree_dist.variance()),
            num(rewired_clustering(props.clustering, p.p_rw)),
            num(props.degree_corr),
            num(props.p_g),
            num(rep.r_star),
            opt(rep.p_maj),
            num(rep.z),
        ])?;
    }
    Ok(vec![finish(w, &path)?])
}

pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let header = cfg.header("generate");
    let props_path = cfg.output.dir.join("properties.csv");
    let mut w = csv_file(
        &props_path,
        &header,
        &[
            "point",
            "file",
            "mu",
            "r",
            "p_rw",
            "n",
            "edges",
            "mean_degree",
            "mean_degree_analytic",
            "c",
            "c_analytic",
            "rho",
            "rho_analytic",
            "imperfection_fraction",
        ],
    )?;
    let mut written = Vec::new();
    for (k, point) in cfg.points()?.iter().enumerate() {
        let seed = derive_seed(cfg.simulation.seed, k as u64);
        let mut net = build_network(&point.gen_spec(cfg.simulation.n, derive_seed(seed, 0)))?;
        if point.p_rw > 0.0 {
            net = rewire(&net, point.p_rw, derive_seed(seed, 1))?;
        }
        let name = format!("network_{k}.txt");
        let path = cfg.output.dir.join(&name);
        let mut file = BufWriter::new(File::create(&path)?);
        file.write_all(header.as_bytes())?;
        net.write_to(&mut file)?;
        file.flush()?;
        written.push(path);

        let p = &point.params;
        let props = local_props(&p.household, &p.global, p.r, p.n_q)?;
        let degrees = net.degrees();
        let mean_degree = degrees.iter().sum::<usize>() as f64 / net.n() as f64;
        w.write_record([
            k.to_string(),
            name,
            opt(point.mu),
            num(point.r),
            num(point.p_rw),
            net.n().to_string(),
            net.edges().len().to_string(),
            num(mean_degree),
            num(props.degree_dist.mean()),
            num(empirical_clustering(&net)?),
            num(rewired_clustering(props.clustering, p.p_rw)),
            empirical_degree_corr(&net).map(num).unwrap_or_default(),
            num(props.degree_corr),
            num(net.imperfection_fraction()),
        ])?;
    }
    written.push(finish(w, &props_path)?);
    Ok(written)
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let header = cfg.header("simulate");
    let dir = &cfg.output.dir;
    let (runs_path, summary_path, hist_path) = (
        dir.join("runs.csv"),
        dir.join("summary.csv"),
        dir.join("histogram.csv"),
    );
    let mut runs = csv_file(&runs_path, &header, &["point", "run", "seed", "final_size", "major"])?;
    let mut summary = csv_file(
        &summary_path,
        &header,
        &[
            "point", "mu", "r", "p_rw", "p_i", "n", "n_sims", "n_major", "p_hat", "p_se", "z_hat", "z_se",
            "cutoff_used", "ambiguous", "p_maj", "z",
        ],
    )?;
    let mut hist = csv_file(&hist_path, &header, &["point", "bin_lo", "bin_hi", "count"])?;
    for (k, point) in cfg.points()?.iter().enumerate() {
        info!("simulating point {k}");
        let est = estimate(&cfg.estimate_spec(point, k))?;
        let rep = analyze(&point.params)?;
        for r in &est.runs {
            runs.write_record([
                k.to_string(),
                r.run.to_string(),
                r.seed.to_string(),
                r.final_size.to_string(),
                r.major.to_string(),
            ])?;
        }
        summary.write_record([
            k.to_string(),
            opt(point.mu),
            num(point.r),
            num(point.p_rw),
            num(point.p_i),
            est.n.to_string(),
            est.n_sims.to_string(),
            est.n_major.to_string(),
            num(est.p_hat),
            num(est.p_se),
            opt(est.z_hat),
            opt(est.z_se),
            est.cutoff_used.to_string(),
            est.ambiguous.to_string(),
            opt(rep.p_maj),
            num(rep.z),
        ])?;
        let width = est.histogram.bin_width;
        for (b, count) in est.histogram.counts.iter().enumerate() {
            hist.write_record([
                k.to_string(),
                (b * width).to_string(),
                ((b + 1) * width - 1).to_string(),
                count.to_string(),
            ])?;
        }
    }
    Ok(vec![
        finish(runs, &runs_path)?,
        finish(summary, &summary_path)?,
        finish(hist, &hist_path)?,
    ])
}

pub fn cmd_figure(cfg: &ExperimentConfig, name: &str, opts: &FigureOptions) -> Result<Vec<PathBuf>> {
    let table = figure(name, opts)?;
    let header = format!(
        "{}# figure = {name}, n_sims = {}, sizes = {:?}, seed = {}, cutoff = {:?}\n",
        cfg.header("figure"),
        opts.n_sims,
        opts.sizes,
        opts.seed,
        opts.cutoff
    );
    let path = cfg.output.dir.join(format!("{name}.csv"));
    let mut w = csv_file(&path, &header, &table.columns)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    Ok(vec![finish(w, &path)?])
}

pub fn cmd_tune(cfg: &ExperimentConfig, gamma: f64, c: f64, rho: f64, n_q: usize) -> Result<Vec<PathBuf>> {
    let (mu, r) = tune_poisson(gamma, c, rho, n_q)?;
    println!("mu = {mu}\nr = {r}");
    let path = cfg.output.dir.join("tune.csv");
    let header = format!("# clustnet {} tune\n", env!("CARGO_PKG_VERSION"));
    let mut w = csv_file(&path, &header, &["gamma", "c", "rho", "n_q", "mu", "r"])?;
    w.write_record([num(gamma), num(c), num(rho), n_q.to_string(), num(mu), num(r)])?;
    Ok(vec![finish(w, &path)?])
}
