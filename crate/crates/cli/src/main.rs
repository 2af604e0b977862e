//! `slit-homology`: cell lists, boundary matrices, homology tables, the
//! fundamental class and slit pictures for moduli spaces with one boundary curve.

mod cache;
mod render;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use slit_core::complex::{
    assemble_matrices, generate_basis, generate_numbered_basis, BoundaryMatrices, CellBasis, ComplexCell, ComplexError,
    MAX_H,
};
use slit_core::exactlin::SnfConfig;
use slit_core::homology::{
    homology_euler_characteristic, matrices_for, mod2_from_integral, moduli_homology_from, Coefficient, HomologyJob,
    Method, ModuliHomology,
};
use slit_core::orientation::build_fundamental_cycle_with;

use cache::{CacheKey, JobCache, MatrixKind};

#[derive(Parser)]
#[command(name = "slit-homology", version, about = "Homology of moduli spaces from parallel slit cells")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    /// Cache root for cell lists and matrices.
    #[arg(long, global = true, env = "SLIT_CACHE")]
    cache: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Entry size in bits above which elimination switches to lattice reduction.
    #[arg(long, global = true, default_value_t = 64)]
    lll_threshold: u64,
    /// Allow h = 5 and larger.
    #[arg(long, global = true, env = "SLIT_LONG")]
    long: bool,
}

#[derive(Args, Clone)]
struct TypeArgs {
    /// Genus.
    #[arg(long)]
    g: Option<usize>,
    /// Number of punctures.
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Number of slit pairs, 2g + m.
    #[arg(long)]
    h: Option<usize>,
    /// Numbered punctures instead of permutable ones.
    #[arg(long)]
    non_permutable: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoeffArg {
    Z,
    Q,
    F2,
    Twisted,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Spectral,
    Total,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the cell basis and print counts per bi-degree.
    Cells(TypeArgs),
    /// Assemble and check the boundary matrices.
    Matrices(TypeArgs),
    /// Compute the homology of the moduli space.
    Homology {
        #[command(flatten)]
        ty: TypeArgs,
        #[arg(long, value_enum, default_value = "z")]
        coeff: CoeffArg,
        #[arg(long, value_enum, default_value = "spectral")]
        method: MethodArg,
        /// Print result records instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Build and check the fundamental cycle.
    FundamentalClass {
        #[command(flatten)]
        ty: TypeArgs,
        /// Where to write the cycle (default: the cache directory, if any).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Draw the slit domain of a cell as SVG.
    Render {
        /// Cell text `p q : σ_q ; … ; σ_0` with one-line permutations.
        #[arg(long)]
        cell: String,
        /// Row heights, barycentric coordinates in Δ^p.
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<f64>>,
        /// Column widths, barycentric coordinates in Δ^q.
        #[arg(long, value_delimiter = ',')]
        b: Option<Vec<f64>>,
        /// Write here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recompute the published tables and compare.
    Tables {
        /// Largest h = 2g + m to recompute.
        #[arg(long, default_value_t = 3)]
        max_h: usize,
    },
}

/// A resolved `(g, m)` job description.
#[derive(Clone, Copy, Debug)]
pub struct JobType {
    pub g: usize,
    pub m: usize,
    pub permutable: bool,
}

impl JobType {
    pub fn h(&self) -> usize {
        2 * self.g + self.m
    }
}

fn resolve(ty: &TypeArgs, global: &GlobalOpts) -> Result<JobType> {
    let m = ty.m;
    let g = match (ty.g, ty.h) {
        (Some(g), Some(h)) if 2 * g + m != h => bail!("--h {h} does not equal 2g + m = {}", 2 * g + m),
        (Some(g), _) => g,
        (None, Some(h)) => {
            if h < m || !(h - m).is_multiple_of(2) {
                bail!("h = {h} and m = {m} leave no integral genus");
            }
            (h - m) / 2
        }
        (None, None) => bail!("give --g or --h"),
    };
    let job = JobType { g, m, permutable: !ty.non_permutable };
    check_size(job.h(), global.long)?;
    Ok(job)
}

fn check_size(h: usize, long: bool) -> Result<()> {
    if h == 0 {
        bail!("2g + m must be positive");
    }
    if h > MAX_H {
        bail!("h = {h} exceeds the supported maximum {MAX_H}");
    }
    if h >= 5 && !long {
        bail!("h = {h} runs for hours and needs a lot of memory; pass --long to proceed");
    }
    Ok(())
}

fn snf_config(global: &GlobalOpts) -> SnfConfig {
    SnfConfig { lll_threshold_bits: global.lll_threshold, ..SnfConfig::default() }
}

fn open_cache(global: &GlobalOpts, job: JobType) -> Result<Option<JobCache>> {
    match &global.cache {
        Some(root) => Ok(Some(JobCache::open(root, CacheKey { h: job.h(), m: job.m, permutable: job.permutable })?)),
        None => Ok(None),
    }
}

fn basis<C: ComplexCell>(
    job: JobType,
    cache: Option<&JobCache>,
    generate: fn(usize, usize) -> Result<CellBasis<C>, ComplexError>,
) -> Result<CellBasis<C>> {
    if let Some(c) = cache {
        if let Some(b) = c.load_cells::<C>()? {
            return Ok(b);
        }
    }
    let b = generate(job.h(), job.m)?;
    if let Some(c) = cache {
        c.store_cells(&b)?;
    }
    Ok(b)
}

/// Matrices for `kind`, from the cache when present.
fn matrices(job: JobType, kind: MatrixKind, cache: Option<&JobCache>) -> Result<BoundaryMatrices> {
    if let Some(c) = cache {
        if let Some(m) = c.load_matrices(kind, job.h())? {
            return Ok(m);
        }
    }
    let mats = if job.permutable {
        let b = basis(job, cache, generate_basis)?;
        match kind {
            MatrixKind::Plain => assemble_matrices(&b)?,
            MatrixKind::Twisted => {
                let twisted_job = HomologyJob { permutable: true, ..HomologyJob::new(job.g, job.m) };
                matrices_for(&twisted_job, &b)?
            }
        }
    } else {
        assemble_matrices(&basis(job, cache, generate_numbered_basis)?)?
    };
    if let Some(c) = cache {
        c.store_matrices(kind, &mats)?;
    }
    Ok(mats)
}

fn kind_for(job: &HomologyJob) -> MatrixKind {
    if job.twisted() {
        MatrixKind::Twisted
    } else {
        MatrixKind::Plain
    }
}

fn cmd_cells(job: JobType, global: &GlobalOpts) -> Result<()> {
    let cache = open_cache(global, job)?;
    let h = job.h();
    let (sizes, total): (Vec<Vec<usize>>, usize) = if job.permutable {
        let b = basis(job, cache.as_ref(), generate_basis)?;
        ((0..=h).map(|q| (0..=2 * h).map(|p| b.size(p, q)).collect()).collect(), b.total())
    } else {
        let b = basis(job, cache.as_ref(), generate_numbered_basis)?;
        ((0..=h).map(|q| (0..=2 * h).map(|p| b.size(p, q)).collect()).collect(), b.total())
    };
    println!("cells for g={} m={} h={h} ({})", job.g, job.m, if job.permutable { "permutable" } else { "numbered" });
    let header: Vec<String> = (0..=2 * h).map(|p| format!("{p:>8}")).collect();
    println!("{:>6}{}", "q\\p", header.join(""));
    for q in (0..=h).rev() {
        let row: Vec<String> = sizes[q].iter().map(|n| format!("{n:>8}")).collect();
        println!("{q:>6}{}", row.join(""));
    }
    println!("total {total}");
    Ok(())
}

fn cmd_matrices(job: JobType, global: &GlobalOpts) -> Result<()> {
    let cache = open_cache(global, job)?;
    let mut kinds = vec![MatrixKind::Plain];
    if job.permutable && job.m >= 2 {
        kinds.push(MatrixKind::Twisted);
    }
    for kind in kinds {
        let t = Instant::now();
        let mats = matrices(job, kind, cache.as_ref())?;
        mats.verify()?;
        let nnz: usize = mats.dprime.values().chain(mats.dsecond.values()).map(|m| m.nnz()).sum();
        println!(
            "{} matrices: {} blocks, {nnz} non-zero entries, identities hold ({:.1?})",
            kind.name(),
            mats.dprime.len() + mats.dsecond.len(),
            t.elapsed()
        );
    }
    Ok(())
}

fn homology_job(job: JobType, coeff: Coefficient, method: Method, global: &GlobalOpts) -> HomologyJob {
    HomologyJob { g: job.g, m: job.m, permutable: job.permutable, coeff, method, snf: snf_config(global) }
}

fn print_table(r: &ModuliHomology, method: MethodArg) {
    let tilde = if r.permutable { "" } else { " (numbered punctures)" };
    let how = match method {
        MethodArg::Spectral => "spectral",
        MethodArg::Total => "total",
        MethodArg::Both => "spectral and total",
    };
    println!("H_*(Mod_{{{},1}}^{}; {}){tilde} via {how}", r.g, r.m, r.coeff);
    for k in 0..r.groups.len() {
        println!("  H_{k} = {}", r.describe(k));
    }
}

/// Cross-coefficient checks used when several coefficient systems are computed.
fn consistency(results: &[ModuliHomology]) -> Result<()> {
    let find = |c: Coefficient| results.iter().find(|r| r.coeff == c);
    if let (Some(z), Some(q)) = (find(Coefficient::Z), find(Coefficient::Q)) {
        let free: Vec<usize> = z.groups.iter().map(|g| g.free_rank).collect();
        let rational: Vec<usize> = q.groups.iter().map(|g| g.free_rank).collect();
        if free != rational {
            bail!("rational Betti numbers {rational:?} differ from free ranks {free:?}");
        }
    }
    if let (Some(z), Some(f)) = (find(Coefficient::Z), find(Coefficient::F2)) {
        let mod2: Vec<usize> = f.groups.iter().map(|g| g.free_rank).collect();
        if mod2 != mod2_from_integral(&z.groups) {
            bail!("mod 2 Betti numbers {mod2:?} contradict universal coefficients");
        }
    }
    if let (Some(z), Some(t)) = (find(Coefficient::Z), find(Coefficient::Twisted)) {
        if z.groups != t.groups {
            bail!("twisted result differs from the integral one");
        }
    }
    for r in results {
        let chi = homology_euler_characteristic(&r.pair_homology);
        if results.iter().any(|o| homology_euler_characteristic(&o.pair_homology) != chi && o.coeff != r.coeff) {
            bail!("Euler characteristics disagree across coefficients");
        }
    }
    Ok(())
}

fn cmd_homology(job: JobType, coeff: CoeffArg, method: MethodArg, json: bool, global: &GlobalOpts) -> Result<()> {
    let method_core = match method {
        MethodArg::Spectral => Method::Spectral,
        MethodArg::Total => Method::Total,
        MethodArg::Both => Method::Both,
    };
    let coeffs: Vec<Coefficient> = match coeff {
        CoeffArg::Z => vec![Coefficient::Z],
        CoeffArg::Q => vec![Coefficient::Q],
        CoeffArg::F2 => vec![Coefficient::F2],
        CoeffArg::Twisted => {
            if !job.permutable && job.m >= 2 {
                bail!("the orientation twist applies to permutable punctures only");
            }
            vec![Coefficient::Twisted]
        }
        CoeffArg::All => {
            let mut v = vec![Coefficient::Z, Coefficient::Q, Coefficient::F2];
            if job.permutable || job.m <= 1 {
                v.push(Coefficient::Twisted);
            }
            v
        }
    };
    let cache = open_cache(global, job)?;
    let mut results = Vec::new();
    for c in coeffs {
        let hjob = homology_job(job, c, method_core, global);
        let mats = matrices(job, kind_for(&hjob), cache.as_ref())?;
        let r = moduli_homology_from(&hjob, &mats).with_context(|| format!("coefficients {c}"))?;
        if let Some(cache) = &cache {
            cache.store_record(&r.record())?;
        }
        results.push(r);
    }
    consistency(&results)?;
    for r in &results {
        if json {
            println!("{}", serde_json::to_string(&r.record())?);
        } else {
            print_table(r, method);
        }
    }
    Ok(())
}

fn cmd_fundamental(job: JobType, output: Option<PathBuf>, global: &GlobalOpts) -> Result<()> {
    if !job.permutable {
        bail!("the fundamental cycle is built on the permutable complex");
    }
    let cache = open_cache(global, job)?;
    let b = basis(job, cache.as_ref(), generate_basis)?;
    let kind = if job.m >= 2 { MatrixKind::Twisted } else { MatrixKind::Plain };
    let mats = matrices(job, kind, cache.as_ref())?;
    let mu = build_fundamental_cycle_with(job.g, job.m, &b, &mats)?;
    println!("fundamental cycle for g={} m={}: {} terms", job.g, job.m, mu.len());
    println!("verified: vertical and horizontal boundaries vanish");
    let target = output.or_else(|| cache.as_ref().map(|c| c.path("fundamental.txt")));
    if let Some(path) = target {
        std::fs::write(&path, mu.to_text()).with_context(|| format!("writing {}", path.display()))?;
        println!("written to {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring threads")?;
    }
    let global = &cli.global;
    match cli.command {
        Command::Cells(ty) => cmd_cells(resolve(&ty, global)?, global),
        Command::Matrices(ty) => cmd_matrices(resolve(&ty, global)?, global),
        Command::Homology { ty, coeff, method, json } => {
            cmd_homology(resolve(&ty, global)?, coeff, method, json, global)
        }
        Command::FundamentalClass { ty, output } => cmd_fundamental(resolve(&ty, global)?, output, global),
        Command::Render { cell, a, b, output } => {
            let svg = render::render_cell(&cell, a.as_deref(), b.as_deref())?;
            match output {
                Some(path) => {
                    std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{svg}"),
            }
            Ok(())
        }
        Command::Tables { max_h } => {
            check_size(max_h, global.long)?;
            tables::run(max_h, &snf_config(global))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
