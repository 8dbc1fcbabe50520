use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use otfs_core::channel::{doppler_from_speed, DopplerMode, NoiseSpec, TdlProfile};
use otfs_core::frame::Waveform;
use otfs_core::link::ChannelModel;
use otfs_sim::harness::{self, SweepRow, SweepSpec};
use otfs_sim::io;
use otfs_sim::presets::{preset, SimConfig};

#[derive(Parser)]
#[command(name = "otfs-sim", version, about = "OTFS vs OFDM link-level simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one link at a single Doppler value.
    Simulate(SimArgs),
    /// Sweep the maximum Doppler and write one CSV row per value.
    Sweep(SweepArgs),
    /// Write the PSD of a preset waveform as CSV.
    Psd(PsdArgs),
    /// Print payload, overhead and timing numbers of a preset.
    Info(InfoArgs),
    /// Print a preset's configuration as JSON.
    Config(ConfigArgs),
    /// Write the LDPC parity-check matrix of a preset waveform (alist).
    Code(CodeArgs),
}

#[derive(Args)]
struct Common {
    /// Named preset: table1-15khz, table1-30khz or fig4-grid.
    #[arg(long, default_value = "table1-15khz")]
    preset: String,
    /// JSON configuration file; overrides --preset.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> anyhow::Result<SimConfig> {
        Ok(match &self.config {
            Some(p) => SimConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => preset(&self.preset)?,
        })
    }
}

#[derive(Args)]
struct ChannelArgs {
    /// SNR in dB; defaults to the preset value.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Channel profile (`delay_ns power_db` per line) instead of the built-in TDL.
    #[arg(long)]
    channel_file: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    frames: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl ChannelArgs {
    fn profile(&self, cfg: &SimConfig) -> anyhow::Result<TdlProfile> {
        Ok(match &self.channel_file {
            Some(p) => io::read_channel_profile(p).with_context(|| format!("reading {}", p.display()))?,
            None => TdlProfile::tdl_a(cfg.rms_delay_spread, 0.0),
        })
    }
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, default_value = "otfs")]
    waveform: Waveform,
    /// Maximum Doppler shift, Hz.
    #[arg(long, conflicts_with = "speed_kmh")]
    doppler: Option<f64>,
    /// User speed, converted to Doppler at the preset carrier.
    #[arg(long)]
    speed_kmh: Option<f64>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump the first received slot as cf32.
    #[arg(long)]
    dump_iq: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    channel: ChannelArgs,
    /// otfs, ofdm or both.
    #[arg(long, default_value = "both")]
    waveform: String,
    /// Comma-separated Doppler values in Hz; defaults to the preset grid.
    #[arg(long, value_delimiter = ',', conflicts_with = "speed_kmh")]
    doppler: Option<Vec<f64>>,
    /// Comma-separated speeds in km/h.
    #[arg(long, value_delimiter = ',')]
    speed_kmh: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON mirror with the configuration echoed.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct PsdArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "otfs")]
    waveform: Waveform,
    #[arg(long, default_value_t = 20)]
    frames: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InfoArgs {
    #[command(flatten)]
    common: Common,
    /// Restrict to one waveform.
    #[arg(long)]
    waveform: Option<Waveform>,
}

#[derive(Args)]
struct ConfigArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CodeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "otfs")]
    waveform: Waveform,
    #[arg(long)]
    out: PathBuf,
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => harness::write_text(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn simulate(a: SimArgs) -> anyhow::Result<()> {
    let cfg = a.common.load()?;
    let nu = match (a.doppler, a.speed_kmh) {
        (Some(d), _) => d,
        (None, Some(v)) => doppler_from_speed(v, cfg.otfs.carrier_freq),
        (None, None) => 0.0,
    };
    if !(nu >= 0.0) {
        bail!("Doppler must be non-negative");
    }
    let snr = a.channel.snr_db.unwrap_or(cfg.snr_db);
    let profile = a.channel.profile(&cfg)?;
    let link = cfg.build_link(a.waveform)?;
    let channel = ChannelModel::Tdl {
        profile: TdlProfile {
            max_doppler: nu,
            ..profile
        },
        mode: DopplerMode::Jakes,
    };
    if let Some(p) = &a.dump_iq {
        let mut rng = harness::frame_rng(a.channel.seed, 0);
        let tx = link.transmit(&mut rng)?;
        let taps = channel.realize(&mut rng);
        let rx = otfs_core::channel::apply_channel(&tx.samples, &taps, 0.0)?;
        let rx = otfs_core::channel::add_awgn_with_power(&rx, NoiseSpec::new(snr), tx.frame_power, &mut rng)?;
        io::write_cf32(p, &rx.samples)?;
    }
    let r = harness::run_link(&link, &channel, NoiseSpec::new(snr), a.channel.frames, a.channel.seed)?;
    let row = SweepRow {
        waveform: a.waveform,
        scs: cfg.subcarrier_spacing,
        doppler_hz: nu,
        snr_db: snr,
        frames: r.frames_sent,
        frames_ok: r.frames_ok,
        ber: r.ber(),
        throughput_bps: r.throughput_bps,
        normalized_throughput: r.normalized_throughput,
    };
    emit(&a.out, &harness::sweep_csv(&[row]))
}

fn sweep(a: SweepArgs) -> anyhow::Result<()> {
    let cfg = a.common.load()?;
    let waveforms = match a.waveform.to_ascii_lowercase().as_str() {
        "both" => vec![Waveform::Otfs, Waveform::Ofdm],
        w => vec![w.parse::<Waveform>()?],
    };
    let doppler = match (&a.doppler, &a.speed_kmh) {
        (Some(d), _) => d.clone(),
        (None, Some(v)) => v.iter().map(|s| doppler_from_speed(*s, cfg.otfs.carrier_freq)).collect(),
        (None, None) => cfg.doppler_grid.clone(),
    };
    if doppler.iter().any(|d| !(*d >= 0.0)) {
        bail!("Doppler values must be non-negative");
    }
    let profile = a.channel.profile(&cfg)?;
    let snr = a.channel.snr_db.unwrap_or(cfg.snr_db);
    let mut rows = Vec::new();
    let mut specs = Vec::new();
    for w in waveforms {
        let spec = SweepSpec {
            waveform: w,
            preset: cfg.name.clone(),
            doppler_values: doppler.clone(),
            snr_db: snr,
            n_frames: a.channel.frames,
            seed: a.channel.seed,
        };
        rows.extend(harness::sweep_doppler(&cfg, &profile, &spec)?);
        specs.push(spec);
    }
    if let Some(p) = &a.json {
        let v = serde_json::json!({ "config": cfg, "sweeps": specs, "rows": rows });
        harness::write_text(p, &serde_json::to_string_pretty(&v)?)?;
    }
    emit(&a.out, &harness::sweep_csv(&rows))
}

fn psd(a: PsdArgs) -> anyhow::Result<()> {
    let cfg = a.common.load()?;
    let link = cfg.build_link(a.waveform)?;
    let p = harness::waveform_psd(&link, a.frames.max(1), a.seed)?;
    emit(&a.out, &harness::psd_csv(&p))
}

fn info(a: InfoArgs) -> anyhow::Result<()> {
    let cfg = a.common.load()?;
    let waveforms = match a.waveform {
        Some(w) => vec![w],
        None => vec![Waveform::Otfs, Waveform::Ofdm],
    };
    println!("preset: {}", cfg.name);
    for w in waveforms {
        let size = cfg.payload(w)?;
        let fc = cfg.frame_config(w);
        let sync = cfg.preamble.len() + cfg.slot.guard;
        let ov = fc.overhead(sync);
        let t = fc.timing(sync);
        let unit = match w {
            Waveform::Otfs => "data bins",
            Waveform::Ofdm => "data REs",
        };
        println!("[{w}]");
        println!("  {unit}: {}", size.data_units);
        println!("  coded bits: {}", size.coded_bits);
        println!("  code: ({}, {})", size.coded_bits, size.code_info_bits);
        println!("  payload bits: {}", size.payload_bits);
        println!("  frame samples: {}", fc.frame_samples());
        println!("  slot samples: {}", ov.total);
        println!("  cp samples: {}", ov.cp);
        println!("  cp overhead: {:.6}", ov.cp_fraction());
        println!("  total overhead: {:.6}", ov.fraction());
        println!("  slot duration: {:.9} s", t.t_slot);
        println!("  peak throughput: {:.1} bit/s", size.payload_bits as f64 / t.t_slot);
    }
    Ok(())
}

fn code(a: CodeArgs) -> anyhow::Result<()> {
    let cfg = a.common.load()?;
    let size = cfg.payload(a.waveform)?;
    let code = otfs_core::fec::LdpcCode::ira(size.coded_bits, size.code_info_bits, cfg.code_seed)?;
    io::write_alist(&a.out, code.parity_check())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::Sweep(a) => sweep(a),
        Cmd::Psd(a) => psd(a),
        Cmd::Info(a) => info(a),
        Cmd::Config(a) => a.common.load().map(|c| println!("{}", c.to_json())),
        Cmd::Code(a) => code(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
