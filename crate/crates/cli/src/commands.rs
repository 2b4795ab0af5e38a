use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use dpflab_core::audit::audit;
use dpflab_core::controllers::{extract_dpf, make_fc, make_of_with, make_sf, report_signal_dims};
use dpflab_core::format::{parse_controller, parse_delay_mask, parse_plant, write_controller, ControllerArtifact};
use dpflab_core::sim::{lqg_cost, lyapunov_cost, simulate as run_sim, Noise, DEFAULT_HORIZON, DEFAULT_ROLLOUTS};
use dpflab_core::sls::{make_sls_controller, report_signal_dims as sls_dims, synthesize};
use dpflab_core::stabilizability::max_stabilizable_a;
use dpflab_core::{
    delay_chain_plant, scalar_delay_gains, ControllerKind, ControllerParams, ControllerRealization, DelaySpec,
    Direction, Error, LabeledPlant, Matrix, OfOptions, SignalRole, StateSpace,
};

use crate::config::Config;
use crate::error::CliError;
use crate::svg;
use crate::{CheckArgs, DynamicsArg, Fig5Args, Fig7Args, KindArg, NoiseArg, SimulateArgs, SynthArgs};

const DEFAULT_OUT: &str = "dpflab-out";
const FIG5_A: [f64; 3] = [0.5, 1.0, 1.5];
const FIG5_POINTS: usize = 25;

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// `points` values spaced evenly in log10 between 0.1 and 10.
fn logspace(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..points)
            .map(|i| 10f64.powf(-1.0 + 2.0 * i as f64 / (points - 1) as f64))
            .collect(),
    }
}

pub fn fig5(args: &Fig5Args, cfg: Option<&Path>) -> Result<()> {
    let cfg = Config::load(cfg, "fig5", &["a", "sigma_w", "sigma_v", "points", "out"])?;
    let points = args.points.or(cfg.usize("points")?).unwrap_or(FIG5_POINTS);
    let a_list = args.a.clone().or(cfg.f64_list("a")?).unwrap_or(FIG5_A.to_vec());
    let sw_list = args.sigma_w.clone().or(cfg.f64_list("sigma_w")?).unwrap_or_else(|| logspace(points));
    let sv_list = args.sigma_v.clone().or(cfg.f64_list("sigma_v")?).unwrap_or_else(|| logspace(points));
    let out = args.out.clone().or(cfg.path("out")).unwrap_or(DEFAULT_OUT.into());
    if a_list.is_empty() || sw_list.is_empty() || sv_list.is_empty() {
        return Err(CliError::Usage("fig5 grids must be nonempty".into()));
    }

    let mut grid = Vec::with_capacity(a_list.len() * sw_list.len() * sv_list.len());
    for &a in &a_list {
        for &sw in &sw_list {
            for &sv in &sv_list {
                grid.push((a, sw, sv));
            }
        }
    }
    let rows = grid
        .par_iter()
        .map(|&(a, sw, sv)| {
            scalar_delay_gains(a, sw, sv).map_err(|e| {
                CliError::Usage(format!("grid point a={a}, sigma_w={sw}, sigma_v={sv}: {e}"))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    out_dir(&out)?;
    let csv_path = out.join("fig5.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::file(&csv_path, e.into()))?;
    let io = |e: csv::Error| CliError::file(&csv_path, e.into());
    w.write_record(["a", "sigma_w", "sigma_v", "l1", "l2", "p2", "limit_case"]).map_err(io)?;
    for (&(a, sw, sv), g) in grid.iter().zip(&rows) {
        w.write_record([
            a.to_string(),
            sw.to_string(),
            sv.to_string(),
            g.l1.to_string(),
            g.l2.to_string(),
            g.p2.to_string(),
            g.limit_case.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(&csv_path, e))?;

    let per_a = sw_list.len() * sv_list.len();
    for (ia, &a) in a_list.iter().enumerate() {
        // values[iy = sigma_v][ix = sigma_w]
        let values: Vec<Vec<f64>> = (0..sv_list.len())
            .map(|iv| {
                (0..sw_list.len())
                    .map(|iw| rows[ia * per_a + iw * sv_list.len() + iv].l2)
                    .collect()
            })
            .collect();
        let plot = svg::heatmap(&format!("l2 at a = {a}"), &sw_list, &sv_list, &values, "sigma_w", "sigma_v");
        write(&out.join(format!("fig5_a{a}.svg")), &plot)?;
    }
    println!("wrote {} rows to {}", rows.len(), csv_path.display());
    Ok(())
}

pub fn fig7(args: &Fig7Args, cfg: Option<&Path>) -> Result<()> {
    let cfg = Config::load(cfg, "fig7", &["td_max", "tol", "out"])?;
    let td_max = args.td_max.or(cfg.usize("td_max")?).unwrap_or(6);
    let tol = args.tol.or(cfg.f64("tol")?).unwrap_or(1e-3);
    let out = args.out.clone().or(cfg.path("out")).unwrap_or(DEFAULT_OUT.into());
    if td_max == 0 {
        return Err(CliError::Usage("td-max must be at least 1".into()));
    }
    let results = (1..=td_max)
        .into_par_iter()
        .map(|td| max_stabilizable_a(td, tol))
        .collect::<std::result::Result<Vec<_>, Error>>()?;

    out_dir(&out)?;
    let csv_path = out.join("fig7.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::file(&csv_path, e.into()))?;
    let io = |e: csv::Error| CliError::file(&csv_path, e.into());
    w.write_record(["td", "max_abs_a", "witness_gain"]).map_err(io)?;
    for r in &results {
        w.write_record([r.td.to_string(), r.max_abs_a.to_string(), r.witness_gain.to_string()])
            .map_err(io)?;
        println!("td = {}: max |a| = {:.4}", r.td, r.max_abs_a);
    }
    w.flush().map_err(|e| CliError::io(&csv_path, e))?;
    let xs: Vec<f64> = results.iter().map(|r| r.td as f64).collect();
    let ys: Vec<f64> = results.iter().map(|r| r.max_abs_a).collect();
    let plot = svg::line_plot("Maximum |a| stabilizable without internal feedback", &xs, &ys, "Td", "max |a|");
    write(&out.join("fig7.svg"), &plot)?;
    Ok(())
}

fn kind_from_str(s: &str) -> Result<KindArg> {
    match s {
        "sf" => Ok(KindArg::Sf),
        "fc" => Ok(KindArg::Fc),
        "of" => Ok(KindArg::Of),
        "sls" => Ok(KindArg::Sls),
        other => Err(CliError::Usage(format!("unknown controller '{other}' (expected sf, fc, of or sls)"))),
    }
}

fn synth_plant(args: &SynthArgs, cfg: &Config, kind: KindArg) -> Result<LabeledPlant> {
    let a = args.a.or(cfg.f64("a")?);
    let sigma_w = args.sigma_w.or(cfg.f64("sigma_w")?);
    let sigma_v = args.sigma_v.or(cfg.f64("sigma_v")?);
    let td = args.td.or(cfg.usize("td")?);
    if let Some(path) = args.plant.clone().or(cfg.path("plant")) {
        if a.is_some() || sigma_w.is_some() || sigma_v.is_some() || td.is_some() {
            return Err(CliError::Usage("--plant cannot be combined with --a/--sigma-w/--sigma-v/--td".into()));
        }
        return parse_plant(&read(&path)?).map_err(|e| CliError::file(&path, e));
    }
    let a = a.ok_or_else(|| CliError::Usage("synth needs --plant or --a".into()))?;
    let spec = DelaySpec::new(td.unwrap_or(0), a, sigma_w.unwrap_or(1.0), sigma_v.unwrap_or(1.0))
        .with_full_actuation(kind == KindArg::Fc);
    Ok(delay_chain_plant(&spec)?)
}

pub fn synth(args: &SynthArgs, cfg: Option<&Path>) -> Result<()> {
    let cfg = Config::load(
        cfg,
        "synth",
        &["plant", "a", "sigma_w", "sigma_v", "td", "controller", "T", "mask", "no_dpf", "estimator_dynamics", "out"],
    )?;
    let kind = match (args.controller, cfg.string("controller")) {
        (Some(k), _) => k,
        (None, Some(s)) => kind_from_str(&s)?,
        (None, None) => return Err(CliError::Usage("synth needs --controller".into())),
    };
    let horizon = args.horizon.or(cfg.usize("T")?).unwrap_or(3);
    let no_dpf = args.no_dpf || cfg.bool("no_dpf")?.unwrap_or(false);
    let out = args.out.clone().or(cfg.path("out")).unwrap_or(DEFAULT_OUT.into());
    let mask_path = args.mask.clone().or(cfg.path("mask"));
    let dynamics = match (args.estimator_dynamics, cfg.string("estimator_dynamics").as_deref()) {
        (Some(DynamicsArg::Feedback), _) | (None, Some("feedback")) => Direction::Feedback,
        (Some(DynamicsArg::Lateral), _) | (None, Some("lateral")) | (None, None) => Direction::Lateral,
        (None, Some(other)) => {
            return Err(CliError::Usage(format!("estimator_dynamics must be lateral or feedback, got '{other}'")))
        }
    };
    if no_dpf && kind != KindArg::Fc {
        return Err(CliError::Usage("--no-dpf applies to the fc controller only".into()));
    }
    if mask_path.is_some() && kind != KindArg::Sls {
        return Err(CliError::Usage("--mask applies to the sls controller only".into()));
    }

    let mut plant = synth_plant(args, &cfg, kind)?;
    let (q, r) = plant.default_weights();
    let mut dims = None;
    let controller = match kind {
        KindArg::Sf => make_sf(&plant.plant, &q, &r)?,
        KindArg::Fc => {
            let ctrl = make_fc(&plant)?;
            if no_dpf {
                strip_internal_gains(&ctrl, &plant)?
            } else {
                ctrl
            }
        }
        KindArg::Of => make_of_with(&plant.plant, &q, &r, OfOptions { estimator_dynamics: dynamics })?,
        KindArg::Sls => {
            // state feedback: the controller reads the full state
            let p = &plant.plant;
            let n = p.n();
            plant.plant = StateSpace::new(p.a.clone(), p.b.clone(), Matrix::identity(n, n), p.w.clone(), Matrix::zeros(n, n))?;
            let mask = match &mask_path {
                Some(path) => Some(parse_delay_mask(&read(path)?).map_err(|e| CliError::file(path, e))?),
                None => None,
            };
            let resp = synthesize(&plant.plant, horizon, &q, &r, mask.as_ref())?;
            dims = Some(sls_dims(&resp));
            make_sls_controller(&resp)?
        }
    };
    let dims = dims.unwrap_or_else(|| report_signal_dims(&controller));
    let dpf = extract_dpf(&controller);

    out_dir(&out)?;
    let art = ControllerArtifact {
        plant,
        q,
        r,
        controller,
    };
    write(&out.join("controller.txt"), &write_controller(&art))?;
    write(&out.join("wiring.dot"), &art.controller.to_dot())?;
    write(&out.join("dims.txt"), &format!("{}\n", dims.to_json()))?;
    if let ControllerParams::Sls(resp) = art.controller.params() {
        write_spectral_csv(&out.join("spectral.csv"), resp)?;
    }

    println!("controller = {}", art.controller.kind().as_str());
    match art.controller.params() {
        ControllerParams::StaticGain { gain } => println!("gain = {}", dpflab_core::format::format_matrix(gain)),
        ControllerParams::Observer { k, l, .. } => {
            println!("K = {}", dpflab_core::format::format_matrix(k));
            println!("L = {}", dpflab_core::format::format_matrix(l));
        }
        ControllerParams::Sls(resp) => {
            for (k, phi_u) in resp.phi_u.iter().enumerate() {
                println!("phi_u.{} = {}", k + 1, dpflab_core::format::format_matrix(phi_u));
            }
        }
    }
    println!("dpf_edges = {}", dpf.len());
    for e in &dpf {
        println!("  {} -> {}", e.source, e.dest);
    }
    println!("dims = {}", dims.to_json());
    println!("wrote {}", out.display());
    Ok(())
}

/// The FC controller with every internal-wire row of the gain set to zero.
fn strip_internal_gains(ctrl: &ControllerRealization, plant: &LabeledPlant) -> Result<ControllerRealization> {
    let ControllerParams::StaticGain { gain } = ctrl.params() else {
        unreachable!("FC controllers are static gains")
    };
    let mut gain = gain.clone();
    for (i, role) in plant.input_roles.iter().enumerate() {
        if *role == SignalRole::InternalWire {
            gain.row_mut(i).fill(0.0);
        }
    }
    Ok(ControllerRealization::from_params(
        ControllerKind::FullControl,
        ControllerParams::StaticGain { gain },
        Some(&plant.input_roles),
        OfOptions::default(),
    )?)
}

fn write_spectral_csv(path: &Path, resp: &dpflab_core::SlsResponse) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::file(path, e.into()))?;
    let io = |e: csv::Error| CliError::file(path, e.into());
    w.write_record(["k", "map", "row", "col", "value"]).map_err(io)?;
    for k in 0..resp.horizon() {
        for (name, m) in [("x", &resp.phi_x[k]), ("u", &resp.phi_u[k])] {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    w.write_record([
                        (k + 1).to_string(),
                        name.to_string(),
                        i.to_string(),
                        j.to_string(),
                        m[(i, j)].to_string(),
                    ])
                    .map_err(io)?;
                }
            }
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn simulate(args: &SimulateArgs, cfg: Option<&Path>) -> Result<()> {
    let cfg = Config::load(
        cfg,
        "simulate",
        &["controller", "plant", "horizon", "rollouts", "seed", "noise", "channel", "time", "no_cost", "out"],
    )?;
    let ctrl_path: PathBuf = args
        .controller
        .clone()
        .or(cfg.path("controller"))
        .ok_or_else(|| CliError::Usage("simulate needs --controller".into()))?;
    let horizon = args.horizon.or(cfg.usize("horizon")?).unwrap_or(DEFAULT_HORIZON);
    let rollouts = args.rollouts.or(cfg.usize("rollouts")?).unwrap_or(DEFAULT_ROLLOUTS);
    let seed = args.seed.or(cfg.u64("seed")?).unwrap_or(0);
    let no_cost = args.no_cost || cfg.bool("no_cost")?.unwrap_or(false);
    let out = args
        .out
        .clone()
        .or(cfg.path("out"))
        .unwrap_or_else(|| PathBuf::from("trajectory.csv"));
    let noise_kind = match (args.noise, cfg.string("noise").as_deref()) {
        (Some(k), _) => k,
        (None, None) | (None, Some("gaussian")) => NoiseArg::Gaussian,
        (None, Some("impulse")) => NoiseArg::Impulse,
        (None, Some("zero")) => NoiseArg::Zero,
        (None, Some(other)) => return Err(CliError::Usage(format!("noise must be gaussian, impulse or zero, got '{other}'"))),
    };
    let noise = match noise_kind {
        NoiseArg::Gaussian => Noise::gaussian(seed),
        NoiseArg::Impulse => Noise::Impulse {
            channel: args.channel.or(cfg.usize("channel")?).unwrap_or(0),
            time: args.time.or(cfg.usize("time")?).unwrap_or(0),
        },
        NoiseArg::Zero => Noise::Zero,
    };
    if horizon == 0 {
        return Err(CliError::Usage("horizon must be positive".into()));
    }

    let art = parse_controller(&read(&ctrl_path)?).map_err(|e| CliError::file(&ctrl_path, e))?;
    let plant = match args.plant.clone().or(cfg.path("plant")) {
        Some(path) => parse_plant(&read(&path)?).map_err(|e| CliError::file(&path, e))?.plant,
        None => art.plant.plant.clone(),
    };
    let ctrl = &art.controller;
    let traj = run_sim(&plant, ctrl, horizon, noise)?;

    let file = fs::File::create(&out).map_err(|e| CliError::io(&out, e))?;
    let mut w = BufWriter::new(file);
    traj.write_csv(&mut w).map_err(|e| CliError::file(&out, e))?;
    let mut footer = |line: String| writeln!(w, "# {line}").map_err(|e| CliError::io(&out, e));
    if let Noise::Gaussian { seed, .. } = noise {
        footer(format!("seed = {seed}"))?;
    }
    if let Some(t) = traj.diverged {
        footer(format!("diverged_at = {t}"))?;
        eprintln!("warning: state became non-finite at step {t}");
    }
    let mut outcome = Ok(());
    if !no_cost {
        match lqg_cost(&plant, ctrl, &art.q, &art.r, horizon, rollouts, seed) {
            Ok(est) => {
                footer(format!("cost_mean = {}", est.mean))?;
                footer(format!("cost_std_err = {}", est.std_err))?;
                footer(format!("rollouts = {}", est.rollouts))?;
                footer(format!("horizon = {horizon}"))?;
                if let Ok(exact) = lyapunov_cost(&plant, ctrl, &art.q, &art.r) {
                    footer(format!("cost_stationary = {exact}"))?;
                }
                println!("cost = {} +/- {} ({} rollouts)", est.mean, est.std_err, est.rollouts);
            }
            Err(e @ Error::Unstable { spectral_radius }) => {
                footer(format!("cost = refused: closed loop unstable (spectral radius {spectral_radius})"))?;
                outcome = Err(e.into());
            }
            Err(e) => outcome = Err(e.into()),
        }
    }
    w.flush().map_err(|e| CliError::io(&out, e))?;
    println!("wrote {} steps to {}", traj.len(), out.display());
    outcome
}

pub fn check(args: &CheckArgs) -> Result<()> {
    let mut failed = Vec::new();
    for path in &args.files {
        let art = parse_controller(&read(path)?).map_err(|e| CliError::file(path, e))?;
        let rep = audit(&art).map_err(|e| CliError::file(path, e))?;
        println!("{}:", path.display());
        for item in &rep.items {
            println!("  {item}");
        }
        if !rep.passed() {
            failed.push(path.display().to_string());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(failed.join(", ")))
    }
}
