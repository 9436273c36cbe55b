//! The `museum` command line.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use curation_core::analytics::{read_groups, read_sus_responses, sus_summary, ExactMode, MwuOptions};
use curation_core::exec::Exec;
use curation_core::game::GameRules;
use curation_core::geometry::{
    load_mesh, mesh_stats, normalize_orientation, simplify, write_glb, write_ply, Mesh, MeshFormat,
    SimplifyOptions, DEFAULT_TARGET_FACES,
};
use curation_core::scene::{demo_scene, load_scene, missing_assets, to_json, validate_scene, MuseumScene};
use curation_core::sessionlog::{replay, SessionLog};

use crate::app::{router, AppState};
use crate::report::{compare, Group};

#[derive(Debug, Parser)]
#[command(name = "museum", version, about = "Bronze-ware virtual museum: assets, scenes, sessions and statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mesh decimation, upright normalization and statistics.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
    /// Scene documents.
    #[command(subcommand)]
    Scene(SceneCmd),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Session logs.
    #[command(subcommand)]
    Session(SessionCmd),
    /// Questionnaire and test-score statistics.
    #[command(subcommand)]
    Analytics(AnalyticsCmd),
}

#[derive(Debug, Subcommand)]
pub enum PipelineCmd {
    /// Decimate a PLY/OBJ mesh; writes PLY or GLB by output extension.
    Simplify {
        #[arg(long, default_value_t = DEFAULT_TARGET_FACES)]
        target: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Keep open boundaries fixed.
        #[arg(long)]
        preserve_boundary: bool,
        /// Stop once the cheapest collapse costs more than this.
        #[arg(long)]
        max_error: Option<f64>,
    },
    /// Rotate so the fitted bottom plane sits on y = 0.
    Orient {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum SceneCmd {
    /// Check a scene document; exits 1 when there are findings.
    Validate {
        scene: PathBuf,
        /// Also check that every referenced asset exists here.
        #[arg(long)]
        assets: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write the bundled demo museum.
    Demo {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Scene document; the bundled demo museum when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub assets: Option<PathBuf>,
    #[arg(long, env = "MUSEUM_LOG_DIR", default_value = "sessions")]
    pub logs: PathBuf,
    #[arg(long, env = "MUSEUM_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
}

#[derive(Debug, Subcommand)]
pub enum SessionCmd {
    /// Replay a log through the game rules.
    Replay {
        #[arg(long)]
        scene: Option<PathBuf>,
        log: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum AnalyticsCmd {
    /// Score a SUS questionnaire CSV (id, q1..q10).
    Sus {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Compare two groups from a (group_label, score) CSV.
    Compare {
        file: PathBuf,
        #[arg(long, default_value = "auto")]
        exact: ExactMode,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
        #[arg(long)]
        json: bool,
    },
}

fn read_mesh(path: &Path) -> Result<Mesh> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    let format = MeshFormat::from_extension(ext)
        .with_context(|| format!("{}: expected a .ply or .obj file", path.display()))?;
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let name = path.file_stem().map_or("mesh".into(), |s| s.to_string_lossy().into_owned());
    Ok(load_mesh(&bytes, format, &name)?)
}

fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    let bytes = match path.extension().and_then(|e| e.to_str()) {
        Some("glb") => write_glb(mesh),
        Some("ply") => write_ply(mesh),
        _ => bail!("{}: output must end in .glb or .ply", path.display()),
    };
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_scene(path: Option<&Path>) -> Result<MuseumScene> {
    match path {
        None => Ok(demo_scene()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(load_scene(&text)?)
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Pipeline(cmd) => pipeline(cmd),
        Command::Scene(cmd) => scene(cmd),
        Command::Serve(args) => serve(args),
        Command::Session(SessionCmd::Replay { scene, log, json }) => {
            let rules = GameRules::from_scene(Arc::new(read_scene(scene.as_deref())?))?;
            let text = fs::read_to_string(&log).with_context(|| format!("reading {}", log.display()))?;
            let log = SessionLog::from_jsonl(&text)?;
            let result = replay(&log, &rules)?;
            if json {
                print_json(&result)?;
            } else {
                for f in &result.findings {
                    println!("{f}");
                }
                let s = &result.session;
                println!("phase {:?}, level {}, passed {:?}", s.phase, s.current_level, s.passed_levels);
                if let (Some(end), Some(first)) = (result.finished_at, log.events.first()) {
                    println!("clearance time {} ms", end - first.t);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Analytics(cmd) => analytics(cmd),
    }
}

fn pipeline(cmd: PipelineCmd) -> Result<ExitCode> {
    match cmd {
        PipelineCmd::Simplify { target, input, out, preserve_boundary, max_error } => {
            let mesh = read_mesh(&input)?;
            let opts = SimplifyOptions { preserve_boundary, max_error };
            let s = simplify(&mesh, target, opts)?;
            write_mesh(&s.mesh, &out)?;
            eprintln!(
                "{} -> {} faces, {} collapses, {} edges skipped",
                mesh.face_count(),
                s.mesh.face_count(),
                s.collapses,
                s.skipped_edges
            );
        }
        PipelineCmd::Orient { input, out } => {
            let (mesh, fix) = normalize_orientation(&read_mesh(&input)?)?;
            write_mesh(&mesh, &out)?;
            print_json(&fix)?;
        }
        PipelineCmd::Stats { input, json } => {
            let st = mesh_stats(&read_mesh(&input)?);
            if json {
                print_json(&st)?;
            } else {
                println!("faces {}  vertices {}  boundary loops {}", st.face_count, st.vertex_count, st.boundary_loop_count);
                println!("bbox {:?} .. {:?}  max extent {:.4} m", st.bbox_min, st.bbox_max, st.max_extent);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn scene(cmd: SceneCmd) -> Result<ExitCode> {
    match cmd {
        SceneCmd::Validate { scene, assets, json } => {
            let scene = read_scene(Some(&scene))?;
            let report = validate_scene(&scene);
            let missing = assets.map(|d| missing_assets(&scene, &d)).unwrap_or_default();
            if json {
                print_json(&serde_json::json!({ "findings": report.findings, "missing_assets": missing }))?;
            } else {
                for f in &report.findings {
                    println!("{f}");
                }
                for m in &missing {
                    println!("missing asset {m}");
                }
                if report.is_clean() && missing.is_empty() {
                    println!("ok: {} rooms, {} exhibits", scene.rooms.len(), scene.exhibits.len());
                }
            }
            Ok(if report.is_clean() && missing.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        SceneCmd::Demo { out } => {
            let text = to_json(&demo_scene());
            match out {
                Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => println!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn serve(args: ServeArgs) -> Result<ExitCode> {
    let scene = read_scene(args.config.as_deref())?;
    let (state, restored) = match AppState::new(scene, args.assets, &args.logs) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("refusing to start: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    tracing::info!(
        restored = restored.restored.len(),
        skipped = restored.skipped.len(),
        truncated = restored.truncated.len(),
        "session logs loaded from {}",
        args.logs.display()
    );
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(args.listen).await?;
        tracing::info!("listening on {}", listener.local_addr()?);
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })?;
    Ok(ExitCode::SUCCESS)
}

fn analytics(cmd: AnalyticsCmd) -> Result<ExitCode> {
    match cmd {
        AnalyticsCmd::Sus { file, json } => {
            let rs = read_sus_responses(fs::File::open(&file).with_context(|| format!("opening {}", file.display()))?)?;
            let s = sus_summary(&rs)?;
            if json {
                print_json(&s)?;
            } else {
                println!("respondents    {}", s.n);
                println!("SUS            {:.1}", s.mean_sus);
                println!("learnability   {:.1}", s.learnability);
                println!("usability      {:.1}", s.usability);
                println!("percentile     {:.0}  grade {}  ({})", s.percentile, s.grade, s.adjective);
            }
        }
        AnalyticsCmd::Compare { file, exact, seed, draws, json } => {
            let [(l1, v1), (l2, v2)] =
                read_groups(fs::File::open(&file).with_context(|| format!("opening {}", file.display()))?)?;
            let opts = MwuOptions { exact, seed, draws: draws.max(1), exec: Exec::Parallel };
            let r = compare(&Group { label: l1, values: v1 }, &Group { label: l2, values: v2 }, &opts)?;
            if json {
                print_json(&r)?;
            } else {
                print!("{r}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
