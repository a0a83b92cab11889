//! `rosdyn gallery`: every standard scenario, written into one directory.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use rosdyn::analysis::{bistability_scan_from, classify_orbit, lambda_sweep, random_projection, random_starts};
use rosdyn::export::{write_orbit_svg, write_trajectory_csv};
use rosdyn::gallery::{gallery, Scenario, START_BOX};
use rosdyn::seed::derive_seed;
use rosdyn::{fundamental_identity_residual, integrate, save_instance, Settings, Trajectory};

/// Horizon of the first-price runs.
const FIRST_PRICE_HORIZON: f64 = 200.0;
const SWEEP_GRID: [f64; 8] = [0.0, 0.5, 0.7, 0.8, 0.85, 0.9, 0.95, 1.0];

pub fn run(out: &Path, seed: u64, scale: f64) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let scenarios = gallery(seed, scale)?;
    let mut summary = csv::Writer::from_path(out.join("summary.csv"))?;
    summary.write_record(["scenario", "bidders", "class", "period", "identity_residual", "min_m", "seconds"])?;
    let mut report = String::new();
    for s in &scenarios {
        let t0 = Instant::now();
        let traj = integrate(&s.instance, &s.m0, &s.settings)?;
        let class = classify_orbit(&traj, &s.orbit);
        let residual = fundamental_identity_residual(&traj).map_or(f64::NAN, |r| r.iter().fold(0.0, |a: f64, x| a.max(x.abs())));
        let min_m = traj.states.iter().flatten().fold(f64::INFINITY, |a, &x| a.min(x));
        save_instance(&s.instance, out.join(format!("{}.json", s.name)))?;
        write_trajectory_csv(&traj, &out.join(format!("{}.csv", s.name)))?;
        write_orbit_svg(&plot(s, &traj, seed), &out.join(format!("{}.svg", s.name)))?;
        let secs = t0.elapsed().as_secs_f64();
        let period = class.period().map_or(String::new(), |p| p.to_string());
        summary.write_record([
            s.name.to_string(),
            s.instance.n_bidders().to_string(),
            class.label().to_string(),
            period,
            residual.to_string(),
            min_m.to_string(),
            format!("{secs:.1}"),
        ])?;
        let _ = writeln!(report, "== {} ({})\n{class}identity_residual: {residual:e}\n", s.name, s.description);
        println!("{:<12} {:<28} residual {residual:.1e}  {secs:.1}s", s.name, class.label());
    }
    summary.flush()?;

    four_cycle_scan(out, &scenarios, seed, scale, &mut report)?;
    sweep(out, seed, scale, &mut report)?;
    first_price(out, &scenarios, scale)?;
    fs::write(out.join("report.txt"), report)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn plot(s: &Scenario, traj: &Trajectory, seed: u64) -> Vec<[f64; 2]> {
    match s.plot {
        Some((i, j)) => traj.states.iter().map(|m| [m[i], m[j]]).collect(),
        None => random_projection(traj, derive_seed(seed, &format!("gallery.{}.projection", s.name))),
    }
}

fn four_cycle_scan(out: &Path, scenarios: &[Scenario], seed: u64, scale: f64, report: &mut String) -> Result<()> {
    let s = scenarios.iter().find(|s| s.name == "four-cycle").expect("gallery has a four-cycle");
    let starts = random_starts(4, 20, START_BOX.0, START_BOX.1, derive_seed(seed, "gallery.four-cycle.scan"));
    let settings = Settings::new((200.0 * scale).max(20.0)).dt(0.01).sample_every(0.05);
    let scan = bistability_scan_from(&s.instance, &starts, &settings, 1e-6, 10.0)?;
    let mut w = csv::Writer::from_path(out.join("four-cycle-clusters.csv"))?;
    w.write_record(["count", "m_1", "m_2", "m_3", "m_4"])?;
    let _ = writeln!(report, "== four-cycle bistability scan (20 starts)");
    for c in &scan.clusters {
        let mut row = vec![c.count.to_string()];
        row.extend(c.point.iter().map(f64::to_string));
        w.write_record(&row)?;
        let _ = writeln!(report, "{} starts -> {:?}", c.count, c.point);
    }
    let _ = writeln!(report, "unconverged: {}\n", scan.unconverged);
    println!("four-cycle scan: {} clusters, {} unconverged", scan.clusters.len(), scan.unconverged);
    w.flush()?;
    Ok(())
}

fn sweep(out: &Path, seed: u64, scale: f64, report: &mut String) -> Result<()> {
    let inst = rosdyn::build_coupled(&rosdyn::CouplingSpec::preset_a(), rosdyn::gallery::SHARPNESS)?;
    let m0 = random_starts(inst.n_bidders(), 1, START_BOX.0, START_BOX.1, derive_seed(seed, "gallery.sweep")).remove(0);
    let settings = Settings::new((300.0 * scale).max(20.0)).dt(0.01).sample_every(0.05);
    let rows = lambda_sweep(|l| Ok(inst.clone().with_lambda(l)), &SWEEP_GRID, &m0, &settings, 0.5)?;
    let mut w = csv::Writer::from_path(out.join("lambda-sweep.csv"))?;
    w.write_record(["lambda", "min", "max", "width", "converged"])?;
    let _ = writeln!(report, "== lambda sweep on coupling-a");
    for r in &rows {
        w.write_record([r.lambda.to_string(), r.min.to_string(), r.max.to_string(), r.width().to_string(), r.converged.to_string()])?;
        let _ = writeln!(report, "lambda {}: width {:e}, converged {}", r.lambda, r.width(), r.converged);
    }
    report.push('\n');
    println!("lambda sweep: {} points", rows.len());
    w.flush()?;
    Ok(())
}

/// Every gallery instance under first-price payments.
fn first_price(out: &Path, scenarios: &[Scenario], scale: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(out.join("first-price.csv"))?;
    w.write_record(["scenario", "max_distance_from_one"])?;
    for s in scenarios {
        let inst = s.instance.clone().with_lambda(0.0);
        let settings = Settings::new((FIRST_PRICE_HORIZON * scale).max(20.0)).dt(s.settings.dt).sample_every(0.1);
        let traj = integrate(&inst, &s.m0, &settings)?;
        let last = traj.last_state().expect("integration records the start");
        let d = last.iter().fold(0.0, |a: f64, x| a.max((x - 1.0).abs()));
        w.write_record([s.name.to_string(), d.to_string()])?;
        println!("first price {:<12} max |m - 1| = {d:.2e}", s.name);
    }
    w.flush()?;
    Ok(())
}
