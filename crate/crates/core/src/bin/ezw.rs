use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ezw::bench::{self, BenchPlan, SchemeSpec};
use ezw::codec::{self, EncoderConfig, Scheme};
use ezw::imageio::{self, GrayImage};
use ezw::metrics;
use ezw::wavelet::BankId;

#[derive(Parser)]
#[command(name = "ezw", version, about = "Embedded zerotree wavelet codec for grayscale PGM images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BankArg {
    Haar,
    Daub4,
}

impl From<BankArg> for BankId {
    fn from(b: BankArg) -> Self {
        match b {
            BankArg::Haar => BankId::Haar,
            BankArg::Daub4 => BankId::Daub4,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Encode a binary PGM into an EZW1 stream.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        /// Detail retaining pass (required for scheme C).
        #[arg(long)]
        drp: Option<usize>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..))]
        passes: u8,
        /// Decomposition depth; defaults to min(5, what the image size allows).
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, value_enum, default_value = "haar")]
        bank: BankArg,
    },
    /// Decode an EZW1 stream, optionally stopping after K passes.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        max_passes: Option<usize>,
        /// Original image; prints the PSNR of the result against it.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Compare schemes on one image and write per-pass CSV rows.
    Bench {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated scheme list, e.g. A,B,C3,C4,C5.
        #[arg(long, value_delimiter = ',', value_parser = parse_spec, default_value = "A,B,C3,C4,C5")]
        schemes: Vec<SchemeSpec>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..), default_value_t = 10)]
        passes: u8,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, value_enum, default_value = "haar")]
        bank: BankArg,
    },
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: ezw::Error| e.to_string())
}

fn parse_spec(s: &str) -> Result<SchemeSpec, String> {
    s.parse().map_err(|e: ezw::Error| e.to_string())
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<ezw::Error> for Failure {
    fn from(e: ezw::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn read_image(path: &Path) -> Result<GrayImage, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
    imageio::read_pgm(&bytes).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn default_levels(image: &GrayImage) -> Result<usize, Failure> {
    let depth = image
        .width()
        .trailing_zeros()
        .min(image.height().trailing_zeros())
        .min(5) as usize;
    if depth == 0 {
        return Err(Failure::Run(format!(
            "{}x{} image cannot be decomposed (odd dimension)",
            image.width(),
            image.height()
        )));
    }
    Ok(depth)
}

fn encode(
    input: &Path,
    out: &Path,
    scheme: Scheme,
    drp: Option<usize>,
    passes: u8,
    levels: Option<usize>,
    bank: BankId,
) -> Result<(), Failure> {
    let drp = match (scheme, drp) {
        (Scheme::C, None) => return Err(Failure::Usage("--scheme C requires --drp".into())),
        (Scheme::C, Some(d)) if d == 0 || d > passes as usize => {
            return Err(Failure::Usage(format!("--drp must be in 1..={passes}")))
        }
        (_, d) => d.unwrap_or(0),
    };
    let image = read_image(input)?;
    let levels = match levels {
        Some(l) => l,
        None => default_levels(&image)?,
    };
    let cfg = EncoderConfig::new(scheme, drp, passes as usize, levels, bank)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let (stream, stats) = codec::encode(&image, &cfg)?;
    for s in &stats.passes {
        println!(
            "pass {:>2}  T={:<10} visits={:<9} ztr={:<7} iz={:<7} pos={:<6} neg={:<6} sub_bits={:<7} bytes={:<8} dominant={:.6}s",
            s.pass_index,
            s.threshold,
            s.coefficient_visits,
            s.symbols.ztr,
            s.symbols.iz,
            s.symbols.pos,
            s.symbols.neg,
            s.subordinate_bits,
            s.cumulative_stream_bytes,
            s.dominant_wall_time.as_secs_f64()
        );
    }
    let bytes = stream.to_bytes();
    write_file(out, &bytes)?;
    let ratio = metrics::compression_ratio(image.samples().len(), bytes.len())?;
    println!(
        "wrote {} ({} passes, {} bytes, ratio {:.3})",
        out.display(),
        stream.passes.len(),
        bytes.len(),
        ratio
    );
    Ok(())
}

fn decode(input: &Path, out: &Path, max_passes: Option<usize>, reference: Option<&Path>) -> Result<(), Failure> {
    let bytes = fs::read(input).map_err(|e| Failure::Run(format!("{}: {e}", input.display())))?;
    let decoded = codec::decode(&bytes, max_passes)
        .map_err(|e| Failure::Run(format!("{}: {e}", input.display())))?;
    if decoded.truncated {
        eprintln!(
            "warning: stream ends inside pass {}; decoded {} complete passes",
            decoded.passes_decoded + 1,
            decoded.passes_decoded
        );
    }
    if let Some(k) = max_passes {
        if k > decoded.passes_decoded {
            eprintln!("warning: requested {k} passes, stream holds {}", decoded.passes_decoded);
        }
    }
    write_file(out, &imageio::write_pgm(&decoded.image))?;
    println!("wrote {} ({} passes)", out.display(), decoded.passes_decoded);
    if let Some(path) = reference {
        let original = read_image(path)?;
        let psnr = metrics::psnr(&original, &decoded.image)?;
        println!("psnr {} dB", metrics::format_psnr(psnr));
    }
    Ok(())
}

fn run_bench(plan: BenchPlan) -> Result<(), Failure> {
    plan.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let image = read_image(&plan.image)?;
    let file = fs::File::create(&plan.output)
        .map_err(|e| Failure::Run(format!("{}: {e}", plan.output.display())))?;
    let mut writer = csv::Writer::from_writer(file);
    bench::write_csv_header(&mut writer)?;
    let runs = bench::run_plan(&plan, &image, |run| bench::write_csv_rows(&mut writer, run))?;
    println!("{}", bench::visits_table(&runs, plan.num_passes));
    println!("{}", bench::wall_time_table(&runs, plan.num_passes));
    println!("{}", bench::psnr_table(&runs, plan.num_passes));
    for run in &runs {
        println!(
            "{:>4}: {} bytes, ratio {:.3}",
            run.spec.to_string(),
            run.stream_bytes,
            metrics::compression_ratio(image.samples().len(), run.stream_bytes)?
        );
    }
    println!("wrote {}", plan.output.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encode {
            input,
            out,
            scheme,
            drp,
            passes,
            levels,
            bank,
        } => encode(&input, &out, scheme, drp, passes, levels, bank.into()),
        Command::Decode {
            input,
            out,
            max_passes,
            reference,
        } => decode(&input, &out, max_passes, reference.as_deref()),
        Command::Bench {
            input,
            out,
            schemes,
            passes,
            levels,
            bank,
        } => {
            let levels = match levels {
                Some(l) => Ok(l),
                None => read_image(&input).and_then(|img| default_levels(&img)),
            };
            levels.and_then(|levels| {
                run_bench(BenchPlan {
                    image: input,
                    schemes,
                    num_passes: passes as usize,
                    levels,
                    bank: bank.into(),
                    output: out,
                })
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
