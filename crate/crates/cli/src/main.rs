//! `fracpose` command-line interface.
//!
//! Exit status: 0 on success, 1 when an evaluation completed with warnings,
//! 2 on any input or usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracpose::eval::{run_protocol, Protocol, ProtocolReport};
use fracpose::gallery::{build_gallery_with, query_with};
use fracpose::pifs::{decode, encode_with, read_code, write_code};
use fracpose::{pgm, EncoderConfig, Exec, FractalCode, Gallery, HammingMode, Manifest};

#[derive(Parser, Debug)]
#[command(
    name = "fracpose",
    version,
    about = "Head pose estimation by fractal image coding"
)]
struct Cli {
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a PGM image into a fractal code file.
    Encode {
        image: PathBuf,
        code: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Reconstruct an image from a fractal code file.
    Decode {
        code: PathBuf,
        output: PathBuf,
        /// Decoder iterations [default: 10].
        #[arg(long)]
        iterations: Option<usize>,
        /// Starting image (default: flat gray 128).
        #[arg(long)]
        initial: Option<PathBuf>,
    },
    /// Encode every manifest image into a gallery file.
    BuildGallery {
        manifest: PathBuf,
        gallery: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Estimate the pose of one or more images against a gallery.
    Estimate {
        gallery: PathBuf,
        #[arg(required = true)]
        images: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = HammingArg::Symbol)]
        hamming: HammingArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run an evaluation protocol over a labelled manifest.
    Evaluate {
        manifest: PathBuf,
        #[arg(long, value_enum, default_value_t = ProtocolArg::Loo)]
        protocol: ProtocolArg,
        /// Model fraction for the random protocol [default: 0.8].
        #[arg(long)]
        fraction: Option<f64>,
        /// Shuffle seed for the random protocol [default: 7].
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluate only this held-out subject (loo protocol).
        #[arg(long)]
        subject: Option<String>,
        #[arg(long, value_enum, default_value_t = HammingArg::Symbol)]
        hamming: HammingArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Directory receiving report.json, report.txt and the CSV tables.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        codec: CodecArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct CodecArgs {
    /// Range block side N.
    #[arg(long, default_value_t = 8)]
    range_size: usize,
    /// Domain lattice stride [default: range size].
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long, default_value_t = 5)]
    s_bits: u8,
    #[arg(long, default_value_t = 7)]
    o_bits: u8,
    #[arg(long, default_value_t = 0.99)]
    s_max: f64,
    /// Decoder iterations stored in the configuration.
    #[arg(long, default_value_t = 10)]
    iterations: usize,
}

impl CodecArgs {
    fn config(&self) -> fracpose::Result<EncoderConfig> {
        let cfg = EncoderConfig {
            range_size: self.range_size,
            domain_stride: self.stride.unwrap_or(self.range_size),
            s_max: self.s_max,
            s_bits: self.s_bits,
            o_bits: self.o_bits,
            decode_iterations: self.iterations,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum HammingArg {
    Symbol,
    Bit,
}

impl From<HammingArg> for HammingMode {
    fn from(h: HammingArg) -> Self {
        match h {
            HammingArg::Symbol => HammingMode::Symbol,
            HammingArg::Bit => HammingMode::Bit,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ProtocolArg {
    Loo,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Text,
    Csv,
}

enum Failure {
    Usage(String),
    Lib(fracpose::Error),
}

impl From<fracpose::Error> for Failure {
    fn from(e: fracpose::Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads(cli.threads) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: usize) -> Result<(), String> {
    Ok(())
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Encode { image, code, codec } => cmd_encode(&image, &code, &codec),
        Command::Decode {
            code,
            output,
            iterations,
            initial,
        } => cmd_decode(&code, &output, iterations, initial.as_deref()),
        Command::BuildGallery {
            manifest,
            gallery,
            codec,
        } => cmd_build_gallery(&manifest, &gallery, &codec),
        Command::Estimate {
            gallery,
            images,
            hamming,
            format,
        } => cmd_estimate(&gallery, &images, hamming.into(), format),
        Command::Evaluate {
            manifest,
            protocol,
            fraction,
            seed,
            subject,
            hamming,
            format,
            out,
            codec,
        } => {
            let protocol = match protocol {
                ProtocolArg::Loo => {
                    if fraction.is_some() || seed.is_some() {
                        return Err(Failure::Usage(
                            "--fraction and --seed only apply to --protocol random".into(),
                        ));
                    }
                    Protocol::LeaveOneSubjectOut
                }
                ProtocolArg::Random => {
                    if subject.is_some() {
                        return Err(Failure::Usage(
                            "--subject only applies to --protocol loo".into(),
                        ));
                    }
                    Protocol::RandomSplit {
                        fraction: fraction.unwrap_or(0.8),
                        seed: seed.unwrap_or(7),
                    }
                }
            };
            cmd_evaluate(
                &manifest,
                protocol,
                subject.as_deref(),
                hamming.into(),
                format,
                out.as_deref(),
                &codec,
            )
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> fracpose::Result<()> {
    fs::write(path, bytes).map_err(|e| fracpose::Error::from(e).at_path(path))
}

fn cmd_encode(image: &Path, code_path: &Path, codec: &CodecArgs) -> CmdResult {
    let cfg = codec.config()?;
    let img = pgm::read_pgm(image)?;
    let start = Instant::now();
    let enc = encode_with(&img, &cfg, Exec::default()).map_err(|e| e.at_path(image))?;
    let elapsed = start.elapsed();
    let mut bytes = Vec::new();
    write_code(&enc.code, &mut bytes)?;
    write_file(code_path, &bytes)?;
    println!("range size:       {}", cfg.range_size);
    println!("domain pool:      {}", enc.pool_size);
    println!("range blocks:     {}", enc.code.entries().len());
    println!("mean distortion:  {:.3}", enc.mean_distortion());
    println!("wall time:        {:.3}s", elapsed.as_secs_f64());
    Ok(ExitCode::SUCCESS)
}

fn load_code(path: &Path) -> fracpose::Result<FractalCode> {
    fs::File::open(path)
        .map_err(fracpose::Error::from)
        .and_then(read_code)
        .map_err(|e| e.at_path(path))
}

fn cmd_decode(
    code_path: &Path,
    output: &Path,
    iterations: Option<usize>,
    initial: Option<&Path>,
) -> CmdResult {
    let code = load_code(code_path)?;
    let initial = initial.map(pgm::read_pgm).transpose()?;
    let iterations = iterations.unwrap_or(code.config().decode_iterations);
    let img = decode(&code, initial.as_ref(), iterations)?;
    pgm::write_pgm(&img, output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_build_gallery(manifest: &Path, gallery: &Path, codec: &CodecArgs) -> CmdResult {
    let cfg = codec.config()?;
    let m = Manifest::load(manifest)?;
    let start = Instant::now();
    let g = build_gallery_with(&m, &cfg, Exec::default()).map_err(|e| e.at_path(manifest))?;
    g.save(gallery)?;
    eprintln!(
        "{} entries written to {} in {:.1}s",
        g.len(),
        gallery.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_estimate(
    gallery: &Path,
    images: &[PathBuf],
    mode: HammingMode,
    format: Format,
) -> CmdResult {
    let g = Gallery::load(gallery)?;
    let mut rows = Vec::with_capacity(images.len());
    for path in images {
        let img = pgm::read_pgm(path)?;
        let m = query_with(&g, &img, mode).map_err(|e| e.at_path(path))?;
        rows.push((path.display().to_string(), m));
    }
    match format {
        Format::Text => {
            for (src, m) in &rows {
                println!(
                    "{} {} {} {} {}",
                    src, m.label.pitch, m.label.yaw, m.label.roll, m.distance
                );
            }
        }
        Format::Csv => {
            println!("source_id,pitch,yaw,roll,distance,match");
            for (src, m) in &rows {
                println!(
                    "{},{},{},{},{},{}",
                    src, m.label.pitch, m.label.yaw, m.label.roll, m.distance, m.source_id
                );
            }
        }
        Format::Json => {
            let items: Vec<String> = rows
                .iter()
                .map(|(src, m)| {
                    format!(
                        "  {{\"source_id\": {:?}, \"pitch\": {}, \"yaw\": {}, \"roll\": {}, \"distance\": {}, \"match\": {:?}}}",
                        src, m.label.pitch, m.label.yaw, m.label.roll, m.distance, m.source_id
                    )
                })
                .collect();
            println!("[\n{}\n]", items.join(",\n"));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_evaluate(
    manifest: &Path,
    protocol: Protocol,
    subject: Option<&str>,
    mode: HammingMode,
    format: Format,
    out: Option<&Path>,
    codec: &CodecArgs,
) -> CmdResult {
    let cfg = codec.config()?;
    let mut m = Manifest::load(manifest)?;
    if let Some(s) = subject {
        // Keep the held-out subject as the only one carrying an id so the
        // protocol runs a single fold.
        if !m.rows.iter().any(|r| r.subject.as_deref() == Some(s)) {
            return Err(Failure::Lib(fracpose::Error::InvalidArgument(format!(
                "subject {s:?} has no rows in the manifest"
            ))));
        }
        for r in &mut m.rows {
            if r.subject.as_deref() != Some(s) {
                r.subject = None;
            }
        }
    }
    let report =
        run_protocol(&m, &cfg, protocol, mode, Exec::default()).map_err(|e| e.at_path(manifest))?;
    if let Some(dir) = out {
        write_report_files(&report, dir)?;
    }
    let text = match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
        Format::Csv => report.mae_csv(),
    };
    print!("{text}");
    if report.warnings.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        Ok(ExitCode::from(1))
    }
}

fn write_report_files(report: &ProtocolReport, dir: &Path) -> fracpose::Result<()> {
    fs::create_dir_all(dir).map_err(|e| fracpose::Error::from(e).at_path(dir))?;
    let files = [
        ("report.json", report.to_json()),
        ("report.txt", report.to_text()),
        ("mae.csv", report.mae_csv()),
        ("curves.csv", report.curves_csv()),
        ("error_by_angle.csv", report.error_by_angle_csv()),
        ("predictions.csv", report.predictions_csv()),
    ];
    for (name, body) in files {
        write_file(&dir.join(name), body.as_bytes())?;
    }
    Ok(())
}
