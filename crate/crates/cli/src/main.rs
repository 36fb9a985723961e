use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sabmis::bench::{load_image, run_bench};
use sabmis::raster::{write_pgm, write_srf};
use sabmis::{
    embed_images, evaluate, extract_images, read_key, write_key, CodecConfig, Error, PgmDepth, RasterF64,
    StegoKey, StegoParams,
};

#[derive(Parser)]
#[command(name = "sabmis", version, about = "Hide up to four gray-scale images in one cover and recover them blindly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a stego key file.
    Keygen(KeygenArgs),
    /// Embed secrets into a cover; prints a JSON report.
    Embed(EmbedArgs),
    /// Recover the secrets of a stego image.
    Extract(ExtractArgs),
    /// Compare a reference and a test image; prints a JSON report.
    Metrics(MetricsArgs),
    /// Run the corpus benchmark.
    Bench(BenchArgs),
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1024)]
    cover_size: usize,
    #[arg(long, default_value_t = 512)]
    secret_size: usize,
    /// Cover block side.
    #[arg(long, default_value_t = 8)]
    block: usize,
    /// Secret block side.
    #[arg(long, default_value_t = 8)]
    secret_block: usize,
    #[arg(long, default_value_t = 32)]
    p1: usize,
    /// m = m_factor * p2.
    #[arg(long, default_value_t = 10)]
    m_factor: usize,
    #[arg(long, default_value_t = 32)]
    p3: usize,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 8)]
    c: usize,
    #[arg(long, default_value_t = 4)]
    num_secrets: usize,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-3)]
    lambda_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> CodecConfig {
        let mut cfg = CodecConfig { lambda_scale: self.lambda_scale, ..CodecConfig::default() };
        cfg.solver.rho = self.rho;
        cfg.solver.max_iter = self.max_iter;
        cfg
    }
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    cover: PathBuf,
    /// Secret image; repeat for up to four secrets.
    #[arg(long = "secret", required = true)]
    secrets: Vec<PathBuf>,
    #[arg(long)]
    key: PathBuf,
    /// Lossless stego output (SRF).
    #[arg(long)]
    out: PathBuf,
    /// Also write an 8-bit PGM of the stego image.
    #[arg(long)]
    export_pgm8: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    stego: PathBuf,
    #[arg(long)]
    key: PathBuf,
    /// Secrets are written to `<prefix><i>.pgm`.
    #[arg(long)]
    out_prefix: String,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Also write the JSON report to this file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    covers: PathBuf,
    #[arg(long)]
    secrets: PathBuf,
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Lib(e) => match e {
                Error::Io(_) | Error::Format { .. } | Error::Truncated { .. } => 3,
                Error::Numerical(_) => 4,
                _ => 2,
            },
        }
    }
}

fn keygen(a: KeygenArgs) -> Result<(), Failure> {
    let p2 = (a.block * a.block).checked_sub(a.p1).ok_or_else(|| {
        Failure::Lib(Error::Invariant { field: "p1", msg: "p1+p2 != b^2 (p1 exceeds b^2)".into() })
    })?;
    let params = StegoParams {
        cover_side: a.cover_size,
        secret_side: a.secret_size,
        cover_block: a.block,
        secret_block: a.secret_block,
        p1: a.p1,
        p2,
        p3: a.p3,
        m: a.m_factor * p2,
        alpha: a.alpha,
        beta: a.beta,
        gamma: a.gamma,
        c: a.c,
        num_secrets: a.num_secrets,
    };
    let key = StegoKey::new(a.seed, params)?;
    write_key(&key, &a.out)?;
    Ok(())
}

fn embed(a: EmbedArgs) -> Result<(), Failure> {
    if a.secrets.len() > 4 {
        return Err(Failure::Usage(format!("at most 4 secrets, got {}", a.secrets.len())));
    }
    let key = read_key(&a.key)?;
    let cover = load_image(&a.cover)?;
    let secrets = a.secrets.iter().map(|p| load_image(p)).collect::<Result<Vec<RasterF64>, _>>()?;
    let (stego, report) = embed_images(&cover, &secrets, &key, &a.solver.config())?;
    write_srf(&stego, &a.out)?;
    if let Some(path) = &a.export_pgm8 {
        write_pgm(&stego, path, PgmDepth::Eight)?;
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<(), Failure> {
    let key = read_key(&a.key)?;
    let stego = load_image(&a.stego)?;
    for (i, secret) in extract_images(&stego, &key)?.iter().enumerate() {
        let path = format!("{}{}.pgm", a.out_prefix, i + 1);
        write_pgm(secret, Path::new(&path), PgmDepth::Eight)?;
        println!("{path}");
    }
    Ok(())
}

fn metrics(a: MetricsArgs) -> Result<(), Failure> {
    let report = evaluate(&load_image(&a.reference)?, &load_image(&a.test)?)?;
    let json = report.to_json();
    if let Some(path) = &a.json {
        std::fs::write(path, &json).map_err(Error::from)?;
    }
    println!("{json}");
    Ok(())
}

fn bench(a: BenchArgs) -> Result<(), Failure> {
    let key = read_key(&a.key)?;
    let report = run_bench(&a.covers, &a.secrets, &key, &a.solver.config(), &a.report, a.csv.as_deref())?;
    for entry in &report.covers {
        let curve: Vec<String> = entry.mean_psnr_curve().iter().map(|v| format!("{v:.2}")).collect();
        println!("{}: psnr by secret count [{}] ({:.1}s)", entry.cover, curve.join(", "), entry.seconds);
    }
    for f in &report.failures {
        eprintln!("{}: {}", f.item, f.error);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Keygen(a) => keygen(a),
        Command::Embed(a) => embed(a),
        Command::Extract(a) => extract(a),
        Command::Metrics(a) => metrics(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.exit_code();
            match f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Lib(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(code)
        }
    }
}
