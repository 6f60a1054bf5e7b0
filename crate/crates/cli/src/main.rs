use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use tis_core::ensemble::{fuse_sequence, EnsembleFrameInput, FusionStrategy};
use tis_core::io::{self, open_sequence, read_mask_dir, FrameSequence};
use tis_core::metrics::evaluate_dataset;
use tis_core::refine::{refine_sequence, ConsensusMode, RefineConfig};
use tis_core::segments::Connectivity;
use tis_core::tis0::{run_tis0, Tis0Config, Tis0Frame, COMPONENT_NAMES};
use tis_core::BinaryMask;

#[derive(Parser)]
#[command(name = "tis", version, about = "Tukey-fence video object segmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a video from optical flow and visual saliency.
    Tis0(Tis0Args),
    /// Segment, then refine masks with supervoxel consensus.
    Refine(RefineArgs),
    /// Fuse the masks of several methods found under <input>/masks/.
    Combine(CombineArgs),
    /// Score predicted masks against ground truth.
    Eval(EvalArgs),
}

#[derive(Args)]
struct Common {
    /// Worker threads for the parallel stages (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct Tis0Flags {
    /// Tukey fence multiplier.
    #[arg(long, default_value_t = 1.5)]
    k_fences: f64,
    /// Minimum outlierness for a flow measure to add motion saliency.
    #[arg(long, default_value_t = 0.5)]
    min_flow_scale: f64,
    /// Exponents applied to the visual saliency map.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 0.5, 1.0 / 3.0])]
    vs_exponents: Vec<f64>,
    /// Pixel connectivity used for segment selection (4 or 8).
    #[arg(long, default_value_t = 8)]
    connectivity: u8,
}

impl Tis0Flags {
    fn config(&self) -> Result<Tis0Config> {
        let cfg = Tis0Config {
            k_fences: self.k_fences,
            vs_exponents: self.vs_exponents.clone(),
            min_flow_scale: self.min_flow_scale,
            connectivity: Connectivity::try_from(self.connectivity)?,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct Tis0Args {
    /// Sequence directory (frames/, flow/, saliency/).
    #[arg(long)]
    input: PathBuf,
    /// Directory for the masks and alpha.csv.
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    tis0: Tis0Flags,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RefineArgs {
    /// Sequence directory (frames/, flow/, saliency/, svx/).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Consensus mode: local or nonlocal.
    #[arg(long, default_value = "nonlocal")]
    mode: String,
    /// Override the weight of a supervoxel's own vote.
    #[arg(long)]
    w0: Option<f64>,
    /// Masks feeding the consensus; defaults to the segmenter's own output.
    #[arg(long)]
    masks: Option<PathBuf>,
    #[command(flatten)]
    tis0: Tis0Flags,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CombineArgs {
    /// Sequence directory holding masks/<method>/%05d.pgm.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Fusion strategy: tism, mean or median.
    #[arg(long, default_value = "tism")]
    strategy: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EvalArgs {
    /// Prediction root: <sequence>/%05d.pgm.
    #[arg(long)]
    input: PathBuf,
    /// Ground-truth root with the same layout.
    #[arg(long)]
    gt: PathBuf,
    /// Optional CSV destination; the table is always printed.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Contour match tolerance in pixels (default: 0.75% of the diagonal, rounded up).
    #[arg(long)]
    tolerance: Option<f64>,
    #[command(flatten)]
    common: Common,
}

/// Files written so far; removed again if the command fails.
#[derive(Default)]
struct Outputs {
    written: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn masks(&mut self, dir: &Path, masks: &[BinaryMask]) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, m) in masks.iter().enumerate() {
            self.file(&dir.join(io::sequence::frame_file_name(i, "pgm")), &io::write_mask(m))?;
        }
        Ok(())
    }

    fn file(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        self.written.push(path.to_path_buf());
        fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
    }

    fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building thread pool")?;
    pool.install(f)
}

fn load(input: &Path) -> Result<FrameSequence> {
    if !input.is_dir() {
        bail!("input directory {} does not exist", input.display());
    }
    Ok(open_sequence(input)?)
}

fn alpha_csv(frames: &[Tis0Frame]) -> String {
    let mut out = String::from("frame,component,q1,q2,q3,alpha\n");
    for (t, f) in frames.iter().enumerate() {
        for (name, s) in COMPONENT_NAMES.iter().zip(&f.analysis.stats) {
            let q = s.quartiles;
            out.push_str(&format!(
                "{t},{name},{:.6},{:.6},{:.6},{:.6}\n",
                q.q1,
                q.q2,
                q.q3,
                s.alpha.value()
            ));
        }
    }
    out
}

fn cmd_tis0(args: Tis0Args) -> Result<()> {
    let cfg = args.tis0.config()?;
    let seq = load(&args.input)?;
    let frames = with_pool(args.common.jobs, || Ok(run_tis0(&seq, &cfg)?))?;
    let masks: Vec<BinaryMask> = frames.iter().map(|f| f.mask.clone()).collect();
    let mut out = Outputs::default();
    out.masks(&args.output, &masks)?;
    out.file(&args.output.join("alpha.csv"), alpha_csv(&frames).as_bytes())?;
    out.commit();
    info!("{}: wrote {} masks", seq.name, masks.len());
    Ok(())
}

fn cmd_refine(args: RefineArgs) -> Result<()> {
    let mode: ConsensusMode = args.mode.parse()?;
    let mut rcfg = RefineConfig::for_mode(mode);
    if let Some(w0) = args.w0 {
        rcfg.w0 = w0;
    }
    rcfg.validate()?;
    let tcfg = args.tis0.config()?;
    let seq = load(&args.input)?;
    if seq.frames.iter().any(|f| f.labels.is_none()) {
        bail!(
            "{}: supervoxel labels (svx/) are required for refinement",
            args.input.display()
        );
    }
    let external = match &args.masks {
        Some(dir) => {
            let m = read_mask_dir(dir)?;
            if m.len() != seq.len() {
                bail!(
                    "{} holds {} masks but the sequence has {} frames",
                    dir.display(),
                    m.len(),
                    seq.len()
                );
            }
            Some(m)
        }
        None => None,
    };
    let result = with_pool(args.common.jobs, || {
        let frames = run_tis0(&seq, &tcfg)?;
        let f: Vec<_> = frames.iter().map(|fr| fr.analysis.foregroundness.clone()).collect();
        let masks = external.unwrap_or_else(|| frames.iter().map(|fr| fr.mask.clone()).collect());
        Ok(refine_sequence(&seq, &f, &masks, &rcfg)?)
    })?;

    let mut csv = String::from("id,pixels,foreground,local,nonlocal\n");
    for s in &result.stats {
        let c = result
            .consensus
            .get(s.id)
            .expect("every supervoxel has a consensus entry");
        csv.push_str(&format!(
            "{},{},{},{:.6},{:.6}\n",
            s.id, s.pixel_count, s.label_sum, c.local, c.nonlocal
        ));
    }
    let mut out = Outputs::default();
    out.masks(&args.output, &result.masks)?;
    out.file(&args.output.join("consensus.csv"), csv.as_bytes())?;
    out.commit();
    info!(
        "{}: refined {} frames over {} supervoxels",
        seq.name,
        result.masks.len(),
        result.stats.len()
    );
    Ok(())
}

fn cmd_combine(args: CombineArgs) -> Result<()> {
    let strategy: FusionStrategy = args.strategy.parse()?;
    let seq = load(&args.input)?;
    if seq.methods.is_empty() {
        bail!("{}: no method directories under masks/", args.input.display());
    }
    let inputs = seq
        .frames
        .iter()
        .map(|f| EnsembleFrameInput::new(f.masks.clone()))
        .collect::<tis_core::Result<Vec<_>>>()?;
    let (masks, report) = with_pool(args.common.jobs, || Ok(fuse_sequence(&inputs, &seq.methods, strategy)?))?;
    let mut out = Outputs::default();
    out.masks(&args.output, &masks)?;
    out.file(&args.output.join("alpha.csv"), report.to_csv().as_bytes())?;
    out.commit();
    info!(
        "{}: fused {} methods over {} frames",
        seq.name,
        seq.methods.len(),
        masks.len()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    if !args.input.is_dir() {
        bail!("prediction directory {} does not exist", args.input.display());
    }
    let report = with_pool(args.common.jobs, || {
        Ok(evaluate_dataset(&args.input, &args.gt, args.tolerance)?)
    })?;
    let csv = report.to_csv();
    if let Some(path) = &args.output {
        let mut out = Outputs::default();
        out.file(path, csv.as_bytes())?;
        out.commit();
    }
    print!("{csv}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TIS_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tis0(a) => cmd_tis0(a),
        Command::Refine(a) => cmd_refine(a),
        Command::Combine(a) => cmd_combine(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
