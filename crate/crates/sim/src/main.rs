use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gvif_core::analysis::ImportanceSource;
use gvif_core::channel::ChannelState;
use gvif_core::filter::ClassModel;
use gvif_core::gsm::{CoderProfile, ProfileTable};
use gvif_core::metric::{gvif, mask_psnr, PixelMask};
use gvif_core::optimizer::select_profile;
use gvif_core::ScalingField;
use gvif_sim::appendix::{dataset_mask, validate_generation_independence};
use gvif_sim::dataset::{synthetic_dataset, Dataset, SyntheticSpec};
use gvif_sim::formats::{class_model, ppm, profiles};
use gvif_sim::oracle::DatasetOracle;
use gvif_sim::payload::Payload;
use gvif_sim::pipeline::{decode_payload, encode_image, Encoded};
use gvif_sim::report::{self, GvifRow};
use gvif_sim::sweep::{run_snr_sweep, Scheme};
use gvif_sim::SimConfig;

#[derive(Parser)]
#[command(name = "gvif", version, about = "Semantic image coding simulator with GVIF-driven rate control")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Code one image into a GVSC payload.
    Encode(EncodeArgs),
    /// Decode a payload into the anchored and the completed image.
    Decode(DecodeArgs),
    /// GVIF, mask PSNR and rate of coding images at one operating point.
    Gvif(GvifArgs),
    /// Choose a profile and threshold for one channel state.
    Optimize(OptimizeArgs),
    /// Run the optimizer over a grid of SNRs.
    Sweep(SweepArgs),
    /// Correlation of completed and encoder features inside and outside a mask.
    ValidateAppendixA(AppendixArgs),
    /// Write the seeded synthetic scene set.
    GenSynthetic(GenArgs),
}

#[derive(Args)]
struct ProfileArgs {
    /// Profile table (`id,r,nominal_psnr_db,description` lines).
    #[arg(long)]
    profiles: Option<PathBuf>,
}

impl ProfileArgs {
    fn table(&self) -> Result<ProfileTable> {
        Ok(match &self.profiles {
            Some(p) => profiles::read(p)?,
            None => ProfileTable::default_table(),
        })
    }

    fn profile(&self, id: u16) -> Result<CoderProfile> {
        self.table()?.get(id).cloned().ok_or_else(|| anyhow!("no profile with id {id}"))
    }
}

#[derive(Args)]
struct ImportanceArgs {
    /// Class feature maps (GVTF); importance is the activation of the top class.
    #[arg(long, requires = "class_weights")]
    class_maps: Option<PathBuf>,
    /// Class weights, one `label,w_1,...` line per class.
    #[arg(long, requires = "class_maps")]
    class_weights: Option<PathBuf>,
}

impl ImportanceArgs {
    fn load(&self) -> Result<Option<ClassModel>> {
        match (&self.class_maps, &self.class_weights) {
            (Some(m), Some(w)) => Ok(Some(class_model::read(m, w)?)),
            _ => Ok(None),
        }
    }
}

fn source(model: &Option<ClassModel>) -> ImportanceSource<'_> {
    model.as_ref().map_or(ImportanceSource::Saliency, ImportanceSource::ClassModel)
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    profile_id: u16,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Text carried with the payload.
    #[arg(long, default_value = "")]
    prompt: String,
    #[command(flatten)]
    profiles: ProfileArgs,
    #[command(flatten)]
    importance: ImportanceArgs,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Reconstruction from the received features only.
    #[arg(long)]
    out_hat: Option<PathBuf>,
    /// Reconstruction after completing the missing features.
    #[arg(long)]
    out_tilde: Option<PathBuf>,
}

#[derive(Args)]
struct DatasetArgs {
    /// Image directory; the seeded synthetic scenes are used when absent.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Scene count of the synthetic set.
    #[arg(long, default_value_t = 32)]
    synthetic_count: usize,
}

impl DatasetArgs {
    fn load(&self, cfg: &SimConfig) -> Result<Dataset> {
        Ok(match &self.dataset {
            Some(dir) => Dataset::load_dir(dir)?,
            None => synthetic_dataset(
                &SyntheticSpec { count: self.synthetic_count, seed: cfg.seed, ..SyntheticSpec::default() },
                &cfg.extractor,
            )?,
        })
    }
}

#[derive(Args)]
struct GvifArgs {
    /// Single image; otherwise every image of the dataset.
    #[arg(long, conflicts_with = "dataset")]
    input: Option<PathBuf>,
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, default_value_t = 1)]
    profile_id: u16,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// CSV output; key=value lines on stdout for a single image otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    profiles: ProfileArgs,
    #[command(flatten)]
    importance: ImportanceArgs,
}

#[derive(Args)]
struct ChannelArgs {
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Linear SNR; alternative to `--snr-db`.
    #[arg(long, conflicts_with = "snr_db")]
    snr: Option<f64>,
    #[arg(long)]
    bandwidth_hz: Option<f64>,
    #[arg(long)]
    t_max_ms: Option<f64>,
    /// Minimum nominal PSNR of an admissible profile.
    #[arg(long)]
    d0_psnr: Option<f64>,
}

impl ChannelArgs {
    fn apply(&self, cfg: &mut SimConfig) {
        if let Some(b) = self.bandwidth_hz {
            cfg.bandwidth_hz = b;
        }
        if let Some(t) = self.t_max_ms {
            cfg.optimizer.t_max = t / 1e3;
        }
        if let Some(d) = self.d0_psnr {
            cfg.optimizer.d0_psnr_db = d;
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    profiles: ProfileArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated SNR grid in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-10,-8,-6,-4,-2,0")]
    snr_db: Vec<f64>,
    #[arg(long)]
    bandwidth_hz: Option<f64>,
    #[arg(long)]
    t_max_ms: Option<f64>,
    #[arg(long)]
    d0_psnr: Option<f64>,
    /// Only run the optimizer-driven scheme.
    #[arg(long)]
    adaptive_only: bool,
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    profiles: ProfileArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AppendixArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Threshold applied to the dataset-mean importance.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Completions drawn per image.
    #[arg(long, default_value_t = 8)]
    draws: usize,
    #[arg(long, default_value_t = 1)]
    profile_id: u16,
    #[command(flatten)]
    profiles: ProfileArgs,
    /// Per-position correlation CSV.
    #[arg(long)]
    out_map: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 32)]
    count: usize,
    #[arg(long, default_value_t = 128)]
    width: usize,
    #[arg(long, default_value_t = 128)]
    height: usize,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn candidates(table: &ProfileTable) -> Vec<CoderProfile> {
    table.lossy().cloned().collect()
}

fn gvif_row(
    image_id: String,
    alpha: f64,
    x: &gvif_core::ImageTensor,
    enc: &Encoded,
    cfg: &SimConfig,
) -> Result<GvifRow> {
    let a = &enc.analysis;
    let beta = ScalingField::from_ratio(&enc.theta_c, &a.theta_r)?;
    let g = gvif(&a.theta_r, &beta, &enc.set, &cfg.hvs()?)?;
    let (num_c, den_c) = g.channel_averages();
    let mask_psnr_db = if enc.set.is_empty() {
        None
    } else {
        let dec = decode_payload(&enc.payload, cfg.seed)?;
        let mask = PixelMask::from_filter_set(&dec.set, cfg.extractor.block_size, x.width(), x.height())?;
        Some(mask_psnr(x, &dec.x_hat, &mask)?)
    };
    Ok(GvifRow {
        image_id,
        profile_id: enc.payload.profile_id,
        alpha,
        gvif: g.value,
        numerator_bits: g.numerator_bits,
        denominator_bits: g.denominator_bits,
        numerator_bits_per_channel: num_c,
        denominator_bits_per_channel: den_c,
        mask_psnr_db,
        rate_bits: enc.payload.rate_bits(),
    })
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.optimizer.seed = cfg.seed;
    match cli.command {
        Command::Encode(args) => {
            let x = ppm::read(&args.input)?;
            let model = args.importance.load()?;
            let profile = args.profiles.profile(args.profile_id)?;
            let enc = encode_image(&x, &profile, args.alpha, &cfg, &source(&model), &args.prompt)?;
            let bytes = enc.payload.to_bytes()?;
            fs::write(&args.out, &bytes).with_context(|| format!("writing {}", args.out.display()))?;
            let r = enc.rate;
            println!(
                "feature_bits={}\nside_info_bits={}\nmask_bits={}\nmask_included={}\nrate_bits={}\n\
                 ideal_feature_bits={}\nselected_positions={}\npayload_bytes={}",
                r.feature_bits,
                r.side_info_bits,
                r.mask_bits,
                r.mask_included,
                r.total_bits,
                r.ideal_feature_bits,
                enc.set.selected_positions(),
                bytes.len()
            );
        }
        Command::Decode(args) => {
            let bytes = fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
            let payload = Payload::from_bytes(&bytes)?;
            let dec = decode_payload(&payload, cfg.seed)?;
            if let Some(p) = &args.out_hat {
                ppm::write(p, &dec.x_hat)?;
            }
            if let Some(p) = &args.out_tilde {
                ppm::write(p, &dec.x_tilde)?;
            }
            println!(
                "width={}\nheight={}\nprofile_id={}\nalpha={}\nselected_positions={}\nrate_bits={}\nprompt={}",
                payload.width,
                payload.height,
                payload.profile_id,
                payload.alpha,
                dec.set.selected_positions(),
                payload.rate_bits(),
                payload.prompt
            );
        }
        Command::Gvif(args) => {
            let profile = args.profiles.profile(args.profile_id)?;
            if let Some(input) = &args.input {
                let x = ppm::read(input)?;
                let model = args.importance.load()?;
                let enc = encode_image(&x, &profile, args.alpha, &cfg, &source(&model), "")?;
                let id = input.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_string();
                let row = gvif_row(id, args.alpha, &x, &enc, &cfg)?;
                match &args.out {
                    Some(out) => write(out, &report::gvif_csv(&[row]))?,
                    None => print!("{}", row.key_values()),
                }
            } else {
                let data = args.data.load(&cfg)?;
                let mut rows = Vec::with_capacity(data.len());
                for s in &data.scenes {
                    let enc = encode_image(&s.image, &profile, args.alpha, &cfg, &s.importance_source(), "")?;
                    rows.push(gvif_row(s.name.clone(), args.alpha, &s.image, &enc, &cfg)?);
                }
                let csv = report::gvif_csv(&rows);
                match &args.out {
                    Some(out) => write(out, &csv)?,
                    None => print!("{csv}"),
                }
            }
        }
        Command::Optimize(args) => {
            args.channel.apply(&mut cfg);
            cfg.validate()?;
            let ch = match (args.channel.snr_db, args.channel.snr) {
                (Some(db), _) => ChannelState::from_db(db, cfg.bandwidth_hz)?,
                (None, Some(lin)) => ChannelState::new(lin, cfg.bandwidth_hz)?,
                (None, None) => bail!("one of --snr-db or --snr is required"),
            };
            let data = args.data.load(&cfg)?;
            let cands = candidates(&args.profiles.table()?);
            let oracle = DatasetOracle::new(&data, &cands, &cfg)?;
            let sel = select_profile(&cands, &oracle, &ch, &cfg.optimizer)?;
            write(&args.out, &report::optimize_csv(&sel))?;
            let c = &sel.chosen;
            println!(
                "profile_id={}\nalpha_star={}\nexpected_gvif={}\nexpected_bits={}\nbudget_bits={}\nfeasible={}",
                c.profile.id, c.alpha_star, c.expected_gvif, c.expected_bits, sel.budget_bits, c.feasible
            );
        }
        Command::Sweep(args) => {
            let channel = ChannelArgs {
                snr_db: None,
                snr: None,
                bandwidth_hz: args.bandwidth_hz,
                t_max_ms: args.t_max_ms,
                d0_psnr: args.d0_psnr,
            };
            channel.apply(&mut cfg);
            cfg.validate()?;
            let data = args.data.load(&cfg)?;
            let cands = candidates(&args.profiles.table()?);
            let oracle = DatasetOracle::new(&data, &cands, &cfg)?;
            let schemes: &[Scheme] =
                if args.adaptive_only { &[Scheme::Adaptive] } else { &[Scheme::Adaptive, Scheme::NoFilter] };
            let rows = run_snr_sweep(&data, &oracle, &cands, &args.snr_db, schemes, &cfg);
            write(&args.out, &report::sweep_csv(&rows))?;
            for r in rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("cell {} {} dB failed: {}", r.scheme.name(), r.snr_db, r.error.as_deref().unwrap_or(""));
            }
        }
        Command::ValidateAppendixA(args) => {
            let data = args.data.load(&cfg)?;
            let profile = args.profiles.profile(args.profile_id)?;
            let mask = dataset_mask(&data, args.alpha, &cfg)?;
            let rep = validate_generation_independence(&data, &mask, args.draws, &profile, &cfg)?;
            print!("{}", report::correlation_key_values(&rep));
            if let Some(out) = &args.out_map {
                write(out, &report::correlation_map_csv(&rep))?;
            }
        }
        Command::GenSynthetic(args) => {
            let spec = SyntheticSpec { count: args.count, width: args.width, height: args.height, seed: cfg.seed };
            let data = synthetic_dataset(&spec, &cfg.extractor)?;
            data.save_dir(&args.out)?;
            println!("wrote {} scenes to {}", data.len(), args.out.display());
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
