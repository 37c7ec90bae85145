//! Command-line front end. Artifacts flow through files: designs as JSON,
//! graphs as edge lists, campaign results as CSV. No verb rewrites its
//! inputs. Exit codes: 0 success, 1 domain error, 2 usage error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecc::channels::{qsc_capacity, qsc_shannon_limit, qsce_capacity, ChannelError, ChannelModel};
use ecc::gf::{Field, GfError, Sym};
use ecc::gfft::GfftError;
use ecc::montecarlo::{
    run_campaign, sweep, system_label, CampaignConfig, ConfigError, DecoderKind, Metric,
    SystemConfig,
};
use ecc::polar_codec::{
    binary_decode_erasure, binary_encode, Codec, CodecError, ProbVector,
};
use ecc::polar_design::{monte_carlo_design, DesignError, PolarDesign};
use ecc::scldpc::{
    error_floor, n2h_mean, p_vector, rbc_bound, report, sample_graph, spbc_bound,
    EnsembleParams, Flavor, ScldpcError,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("GfError: {0}")]
    Gf(#[from] GfError),
    #[error("GfftError: {0}")]
    Gfft(#[from] GfftError),
    #[error("ChannelError: {0}")]
    Channel(#[from] ChannelError),
    #[error("DesignError: {0}")]
    Design(#[from] DesignError),
    #[error("CodecError: {0}")]
    Codec(#[from] CodecError),
    #[error("ScldpcError: {0}")]
    Scldpc(#[from] ScldpcError),
    #[error("ConfigError: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(String),
    #[error("JsonError: {0}")]
    Json(#[from] serde_json::Error),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser)]
#[command(
    name = "ecc",
    version,
    about = "Cyclic polar codes over GF(q) and spatially coupled LDPC burst tools"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Build a frozen-set design over an erasure channel; optionally estimate
    /// per-coordinate channels by simulation.
    Design(DesignArgs),
    /// Encode a message with a stored design.
    Encode(EncodeArgs),
    /// Decode one observed block with a stored design.
    Decode(DecodeArgs),
    /// Run seeded simulation campaigns and report failure rates.
    Simulate(SimulateArgs),
    /// Evaluate closed-form burst and floor bounds.
    Bounds(BoundsArgs),
    /// Channel capacity and inverse rate limits.
    Capacity(CapacityArgs),
    /// Draw one ensemble member and print its edge list.
    SampleGraph(SampleGraphArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatOpt {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DecoderOpt {
    Erasure,
    Hard,
    Soft,
}

impl From<DecoderOpt> for DecoderKind {
    fn from(d: DecoderOpt) -> DecoderKind {
        match d {
            DecoderOpt::Erasure => DecoderKind::Erasure,
            DecoderOpt::Hard => DecoderKind::Hard,
            DecoderOpt::Soft => DecoderKind::Soft,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemOpt {
    CyclicPolar,
    BinaryPolar,
    Scldpc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FlavorOpt {
    Random,
    Poisson,
    RandomMultiedge,
    Expurgated,
}

impl From<FlavorOpt> for Flavor {
    fn from(f: FlavorOpt) -> Flavor {
        match f {
            FlavorOpt::Random => Flavor::Random,
            FlavorOpt::Poisson => Flavor::Poisson,
            FlavorOpt::RandomMultiedge => Flavor::RandomMultiedge,
            FlavorOpt::Expurgated => Flavor::Expurgated,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricOpt {
    Block,
    Bit,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyOpt {
    Scldpc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundModel {
    Spbc,
    SpbcExpurgated,
    Rbc,
    N2h,
    Floor,
    Lambda,
}

/// Factor list for the transform; wrapped so clap takes the whole list as one
/// value.
#[derive(Clone)]
struct Factors(Vec<u32>);

fn parse_factors(s: &str) -> Result<Factors, String> {
    if let Some((f, k)) = s.split_once('x') {
        let f: u32 = f.trim().parse().map_err(|_| format!("bad factor in {s:?}"))?;
        let k: usize = k.trim().parse().map_err(|_| format!("bad repeat in {s:?}"))?;
        if k == 0 {
            return Err("repeat count must be positive".into());
        }
        return Ok(Factors(vec![f; k]));
    }
    s.split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|_| format!("bad factor {p:?}")))
        .collect::<Result<Vec<u32>, String>>()
        .map(Factors)
}

fn parse_channel(s: &str) -> Result<ChannelModel, String> {
    ChannelModel::parse(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct DesignArgs {
    /// Field size: a prime, or a power of two up to 2^16.
    #[arg(long)]
    q: u32,
    /// Block length; must equal the product of --factors.
    #[arg(long)]
    n: u64,
    /// `3,5,17` or `2x8` (eight 2s). Input-side first: the LAST factor faces
    /// the channel.
    #[arg(long, value_parser = parse_factors)]
    factors: Factors,
    /// Design channel, e.g. qec:0.5 or bec:0.5.
    #[arg(long, value_parser = parse_channel)]
    channel: ChannelModel,
    /// Union-bound budget on block error rate.
    #[arg(long)]
    delta: f64,
    /// Write the design JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatOpt::Text)]
    format: FormatOpt,
    /// Instead of the design summary, estimate per-coordinate error and
    /// erasure rates on this channel with a genie-aided decoder.
    #[arg(long, value_parser = parse_channel)]
    mc_channel: Option<ChannelModel>,
    #[arg(long, default_value_t = 1000)]
    mc_trials: u64,
    /// Needed with --mc-channel.
    #[arg(long, env = "ECC_SEED")]
    seed: Option<u64>,
}

#[derive(Args)]
struct EncodeArgs {
    /// Design JSON produced by `ecc design`.
    #[arg(long)]
    design: PathBuf,
    /// Comma-separated message symbols, e.g. 7,1,14,3.
    #[arg(long)]
    message: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatOpt::Text)]
    format: FormatOpt,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    design: PathBuf,
    /// Comma-separated received symbols; `?` marks an erasure.
    #[arg(long)]
    observation: String,
    #[arg(long, value_enum, default_value_t = DecoderOpt::Erasure)]
    decoder: DecoderOpt,
    /// Channel the block was observed on; required by the soft decoder.
    #[arg(long, value_parser = parse_channel)]
    channel: Option<ChannelModel>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatOpt::Text)]
    format: FormatOpt,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    system: SystemOpt,
    /// Design JSON (polar systems).
    #[arg(long)]
    design: Option<PathBuf>,
    /// Decoder for cyclic-polar systems.
    #[arg(long, value_enum)]
    decoder: Option<DecoderOpt>,
    /// Channel spec; repeat the flag to sweep.
    #[arg(long = "channel", value_parser = parse_channel, required = true, action = clap::ArgAction::Append)]
    channels: Vec<ChannelModel>,
    #[arg(long)]
    dv: Option<u32>,
    #[arg(long)]
    dc: Option<u32>,
    #[arg(long)]
    w: Option<u32>,
    #[arg(long)]
    l: Option<u32>,
    /// Nodes per position; comma list sweeps, e.g. 200,400.
    #[arg(long, value_delimiter = ',')]
    m: Vec<u32>,
    #[arg(long, value_enum)]
    flavor: Option<FlavorOpt>,
    /// Stop after this many failed trials.
    #[arg(long)]
    target_failures: Option<u64>,
    /// Stop after this many trials.
    #[arg(long)]
    max_trials: Option<u64>,
    #[arg(long, env = "ECC_SEED")]
    seed: u64,
    #[arg(long, value_enum, default_value_t = MetricOpt::Block)]
    metric: MetricOpt,
    /// Cap on parallel workers; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatOpt::Text)]
    format: FormatOpt,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    family: FamilyOpt,
    #[arg(long, value_enum)]
    model: BoundModel,
    #[arg(long)]
    dv: u32,
    #[arg(long)]
    dc: u32,
    #[arg(long)]
    w: u32,
    #[arg(long)]
    m: u32,
    /// Spatial length; the single-position bounds do not depend on it.
    #[arg(long, default_value_t = 20)]
    l: u32,
    /// Burst length (rbc model).
    #[arg(long, required_if_eq("model", "rbc"))]
    b: Option<u32>,
    /// Channel erasure rate (floor model).
    #[arg(long, required_if_eq("model", "floor"))]
    eps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatOpt::Text)]
    format: FormatOpt,
}

#[derive(Args)]
struct CapacityArgs {
    /// Channel spec with explicit q, e.g. qsce:q=256,beta=0.5,eps=0.
    #[arg(long, value_parser = parse_channel)]
    channel: Option<ChannelModel>,
    /// With --rate: invert capacity to the largest usable beta.
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, value_enum, default_value_t = FormatOpt::Text)]
    format: FormatOpt,
}

#[derive(Args)]
struct SampleGraphArgs {
    #[arg(long)]
    dv: u32,
    #[arg(long)]
    dc: u32,
    #[arg(long)]
    w: u32,
    #[arg(long)]
    l: u32,
    #[arg(long)]
    m: u32,
    #[arg(long, value_enum, default_value_t = FlavorOpt::Random)]
    flavor: FlavorOpt,
    #[arg(long, env = "ECC_SEED")]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Six significant digits for human-readable probabilities.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if !(-4..=8).contains(&e) {
        return format!("{:.5e}", x);
    }
    format!("{:.*}", (5 - e).max(0) as usize, x)
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let data = if body.ends_with('\n') { body.to_string() } else { format!("{body}\n") };
            std::fs::write(path, data)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            use std::io::Write;
            // Tolerate downstream pipes closing early (e.g. `| head`).
            match writeln!(std::io::stdout(), "{}", body.trim_end_matches('\n')) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Io(format!("stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn read_design(path: &Path) -> Result<PolarDesign, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    PolarDesign::from_json(&text)
        .map_err(|e| CliError::Io(format!("{}: not a design artifact: {e}", path.display())))
}

fn parse_syms(s: &str) -> Result<Vec<Sym>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<Sym>()
                .map_err(|_| usage(format!("bad symbol {:?}", p.trim())))
        })
        .collect()
}

fn parse_observation(s: &str) -> Result<Vec<Option<Sym>>, CliError> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            if p == "?" {
                Ok(None)
            } else {
                p.parse::<Sym>()
                    .map(Some)
                    .map_err(|_| usage(format!("bad symbol {p:?} (use ? for erasures)")))
            }
        })
        .collect()
}

fn render_obs(xs: &[Option<Sym>]) -> String {
    xs.iter()
        .map(|x| x.map_or("?".to_string(), |v| v.to_string()))
        .collect::<Vec<_>>()
        .join(",")
}

fn render_syms(xs: &[Sym]) -> String {
    xs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Pads a CSV table into aligned columns for terminal reading.
fn align_csv(raw: &str) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(raw.as_bytes());
    for rec in rdr.records().flatten() {
        rows.push(rec.iter().map(str::to_string).collect());
    }
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; cols];
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    rows.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(i, cell)| format!("{:w$}", cell, w = widths[i]))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(verb: Verb) -> Result<(), CliError> {
    match verb {
        Verb::Design(a) => cmd_design(a),
        Verb::Encode(a) => cmd_encode(a),
        Verb::Decode(a) => cmd_decode(a),
        Verb::Simulate(a) => cmd_simulate(a),
        Verb::Bounds(a) => cmd_bounds(a),
        Verb::Capacity(a) => cmd_capacity(a),
        Verb::SampleGraph(a) => cmd_sample_graph(a),
    }
}

fn cmd_design(a: DesignArgs) -> Result<(), CliError> {
    let factors = a.factors.0;
    let product: u64 = factors.iter().map(|&f| f as u64).product();
    if product != a.n {
        return Err(usage(format!("--n {} but factors multiply to {product}", a.n)));
    }
    let field = Field::new(a.q)?;
    let design = PolarDesign::design(&field, &factors, &a.channel, a.delta)?;
    if let Some(path) = &a.out {
        std::fs::write(path, design.to_json())
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    if let Some(mc_channel) = &a.mc_channel {
        let seed = a.seed.ok_or_else(|| usage("--mc-channel needs --seed"))?;
        let plan = design.plan()?;
        let stats = monte_carlo_design(&plan, mc_channel, a.mc_trials, seed)?;
        let frozen: std::collections::HashSet<usize> =
            design.frozen_indices.iter().copied().collect();
        return match a.format {
            FormatOpt::Json => {
                let rows: Vec<serde_json::Value> = stats
                    .iter()
                    .enumerate()
                    .map(|(i, &(pe, px))| {
                        json!({"coord": i, "p_error": pe, "p_erasure": px,
                               "frozen": frozen.contains(&i)})
                    })
                    .collect();
                emit(&None, &serde_json::to_string_pretty(&rows)?)
            }
            _ => {
                let mut lines = vec!["coord,p_error,p_erasure,frozen".to_string()];
                for (i, &(pe, px)) in stats.iter().enumerate() {
                    lines.push(format!("{i},{pe},{px},{}", frozen.contains(&i)));
                }
                let csv = lines.join("\n");
                let body =
                    if a.format == FormatOpt::Csv { csv } else { align_csv(&csv) };
                emit(&None, &body)
            }
        };
    }
    match a.format {
        FormatOpt::Json => emit(&None, &design.to_json()),
        FormatOpt::Text => {
            let body = format!(
                "field: GF({})\nn: {}\nfactors: {}\nk: {}\nrate: {}\nunion bound: {}\nfrozen: {} coordinates",
                design.field.q,
                design.n,
                render_syms(&design.factors),
                design.k(),
                sig6(design.rate),
                sig6(design.union_bound),
                design.frozen_indices.len(),
            );
            emit(&None, &body)
        }
        FormatOpt::Csv => Err(usage("design prints text or json")),
    }
}

fn cmd_encode(a: EncodeArgs) -> Result<(), CliError> {
    let design = read_design(&a.design)?;
    let message = parse_syms(&a.message)?;
    let codeword = if design.is_binary() {
        binary_encode(&design, &message)?
    } else {
        Codec::from_design(&design)?.encode(&message)?
    };
    match a.format {
        FormatOpt::Json => emit(&a.out, &serde_json::to_string(&json!({"codeword": codeword}))?),
        FormatOpt::Text => emit(&a.out, &render_syms(&codeword)),
        FormatOpt::Csv => Err(usage("encode prints text or json")),
    }
}

fn cmd_decode(a: DecodeArgs) -> Result<(), CliError> {
    let design = read_design(&a.design)?;
    let obs = parse_observation(&a.observation)?;
    let mut underflow = None;
    let (spectrum, message): (Vec<Option<Sym>>, Option<Vec<Sym>>) = if design.is_binary() {
        if a.decoder != DecoderOpt::Erasure {
            return Err(usage("binary designs decode erasures only"));
        }
        let decoded = binary_decode_erasure(&design, &obs)?;
        let message: Option<Vec<Sym>> =
            design.info_indices.iter().map(|&i| decoded[i]).collect();
        (decoded, message)
    } else {
        let codec = Codec::from_design(&design)?;
        let decoded = match a.decoder {
            DecoderOpt::Erasure => codec.decode_erasure(&obs)?,
            DecoderOpt::Hard => codec.decode_hard(&obs)?,
            DecoderOpt::Soft => {
                let channel =
                    a.channel.as_ref().ok_or_else(|| usage("soft decoding needs --channel"))?;
                let q = design.field.q;
                let posteriors: Result<Vec<ProbVector>, CodecError> = obs
                    .iter()
                    .map(|&o| ProbVector::from_observation(channel, q, o))
                    .collect();
                let soft = codec.decode_soft(&posteriors?)?;
                underflow = Some(soft.underflow);
                soft.spectrum.iter().map(|&v| Some(v)).collect()
            }
        };
        let message = codec.extract_message(&decoded);
        (decoded, message)
    };
    match a.format {
        FormatOpt::Json => {
            let mut obj = json!({"spectrum": spectrum, "message": message});
            if let Some(u) = underflow {
                obj["underflow"] = json!(u);
            }
            emit(&a.out, &serde_json::to_string(&obj)?)
        }
        FormatOpt::Text => {
            let mut body = format!("spectrum: {}", render_obs(&spectrum));
            match &message {
                Some(m) => body.push_str(&format!("\nmessage: {}", render_syms(m))),
                None => body.push_str("\nmessage: unresolved erasures remain"),
            }
            if let Some(u) = underflow {
                body.push_str(&format!("\nunderflow: {u}"));
            }
            emit(&a.out, &body)
        }
        FormatOpt::Csv => Err(usage("decode prints text or json")),
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CliError> {
    if a.target_failures.is_none() && a.max_trials.is_none() {
        return Err(usage("need --target-failures or --max-trials"));
    }
    if let Some(k) = a.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let scldpc_flags =
        a.dv.is_some() || a.dc.is_some() || a.w.is_some() || a.l.is_some() || !a.m.is_empty();
    let systems: Vec<SystemConfig> = match a.system {
        SystemOpt::CyclicPolar | SystemOpt::BinaryPolar => {
            if scldpc_flags || a.flavor.is_some() {
                return Err(usage("graph flags need --system scldpc"));
            }
            let path = a.design.as_ref().ok_or_else(|| usage("polar systems need --design"))?;
            let design = read_design(path)?;
            vec![match a.system {
                SystemOpt::CyclicPolar => SystemConfig::CyclicPolar {
                    design,
                    decoder: a.decoder.unwrap_or(DecoderOpt::Erasure).into(),
                },
                _ => SystemConfig::BinaryPolar { design },
            }]
        }
        SystemOpt::Scldpc => {
            if a.design.is_some() || a.decoder.is_some() {
                return Err(usage("--design/--decoder do not apply to scldpc"));
            }
            let need = |v: Option<u32>, name: &str| {
                v.ok_or_else(|| usage(format!("scldpc needs --{name}")))
            };
            let (dv, dc, w, l) =
                (need(a.dv, "dv")?, need(a.dc, "dc")?, need(a.w, "w")?, need(a.l, "l")?);
            if a.m.is_empty() {
                return Err(usage("scldpc needs --m"));
            }
            let flavor: Flavor = a.flavor.unwrap_or(FlavorOpt::Random).into();
            a.m.iter()
                .map(|&m| SystemConfig::Scldpc {
                    params: EnsembleParams { dv, dc, w, l, m, flavor },
                })
                .collect()
        }
    };
    let mut cfgs = Vec::new();
    for system in &systems {
        for channel in &a.channels {
            cfgs.push(CampaignConfig {
                system: system.clone(),
                channel: channel.clone(),
                target_failures: a.target_failures,
                max_trials: a.max_trials,
                master_seed: a.seed,
                metric: match a.metric {
                    MetricOpt::Block => Metric::Block,
                    MetricOpt::Bit => Metric::Bit,
                },
            });
        }
    }
    match a.format {
        FormatOpt::Csv => emit(&a.out, &sweep(&cfgs)?),
        FormatOpt::Text => emit(&a.out, &align_csv(&sweep(&cfgs)?)),
        FormatOpt::Json => {
            let rows: Vec<serde_json::Value> = cfgs
                .iter()
                .map(|cfg| {
                    let mut row = json!({
                        "system": system_label(&cfg.system),
                        "channel": cfg.channel.to_string(),
                    });
                    match run_campaign(cfg) {
                        Ok(rep) => row["report"] = serde_json::to_value(rep).expect("serializes"),
                        Err(e) => row["error"] = json!(e.to_string()),
                    }
                    row
                })
                .collect();
            emit(&a.out, &serde_json::to_string_pretty(&rows)?)
        }
    }
}

fn cmd_bounds(a: BoundsArgs) -> Result<(), CliError> {
    let FamilyOpt::Scldpc = a.family;
    let params = EnsembleParams {
        dv: a.dv,
        dc: a.dc,
        w: a.w,
        l: a.l,
        m: a.m,
        flavor: Flavor::Random,
    };
    let (formula, value, components) = match a.model {
        BoundModel::Spbc => {
            ("spbc-union", spbc_bound(&params, false)?, json!({"expurgated": false}))
        }
        BoundModel::SpbcExpurgated => {
            ("spbc-union", spbc_bound(&params, true)?, json!({"expurgated": true}))
        }
        BoundModel::Rbc => {
            let b = a.b.expect("clap enforces --b");
            ("rbc-union", rbc_bound(&params, b)?, json!({"b": b}))
        }
        BoundModel::N2h => {
            let lambda = n2h_mean(&params)?;
            ("size2-count-mean", lambda, json!({"p_zero": (-lambda).exp()}))
        }
        BoundModel::Floor => {
            let eps = a.eps.expect("clap enforces --eps");
            ("error-floor", error_floor(&params, eps)?, json!({"eps": eps, "lambda": n2h_mean(&params)?}))
        }
        BoundModel::Lambda => {
            let (ps, lambdas) = p_vector(&params)?;
            ("size2-rate-vector", lambdas.iter().sum(), json!({"p": ps, "lambda": lambdas}))
        }
    };
    let rep = report(formula, &params, value, components);
    match a.format {
        FormatOpt::Json => emit(&a.out, &serde_json::to_string_pretty(&rep)?),
        FormatOpt::Text => {
            let body = format!(
                "{}: {}\ninputs: {}\ncomponents: {}",
                rep.formula,
                sig6(rep.value),
                rep.inputs,
                rep.components
            );
            emit(&a.out, &body)
        }
        FormatOpt::Csv => Err(usage("bounds prints text or json")),
    }
}

fn cmd_capacity(a: CapacityArgs) -> Result<(), CliError> {
    let (label, value) = match (&a.channel, a.q, a.rate) {
        (Some(ch), None, None) => {
            let cap = match *ch {
                ChannelModel::Qec { eps } | ChannelModel::Bec { eps } => 1.0 - eps,
                ChannelModel::Qsc { beta, q: Some(q) } => qsc_capacity(q, beta)?,
                ChannelModel::Qsce { beta, eps, q: Some(q) } => qsce_capacity(q, beta, eps)?,
                ChannelModel::Qsc { q: None, .. } | ChannelModel::Qsce { q: None, .. } => {
                    return Err(usage("capacity needs q in the channel spec, e.g. qsc:q=256,beta=0.5"));
                }
                ref other => {
                    return Err(usage(format!("no single-parameter capacity for {other}")));
                }
            };
            ("capacity", cap)
        }
        (None, Some(q), Some(rate)) => ("beta_limit", qsc_shannon_limit(q, rate)?),
        _ => return Err(usage("pass --channel, or --q with --rate")),
    };
    match a.format {
        FormatOpt::Json => emit(&None, &serde_json::to_string(&json!({ label: value }))?),
        FormatOpt::Text => emit(&None, &sig6(value)),
        FormatOpt::Csv => Err(usage("capacity prints text or json")),
    }
}

fn cmd_sample_graph(a: SampleGraphArgs) -> Result<(), CliError> {
    let params = EnsembleParams {
        dv: a.dv,
        dc: a.dc,
        w: a.w,
        l: a.l,
        m: a.m,
        flavor: a.flavor.into(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let graph = sample_graph(&params, &mut rng)?.with_seed_label(a.seed);
    emit(&a.out, &graph.to_edge_list())
}
