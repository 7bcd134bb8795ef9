use std::fs;
use std::path::Path;

use kinoplan::bench::{
    emit_phase_grid, hardware_info, nn_accuracy_experiment, run_trial_on, run_trials, summarize,
    sweep_params, write_csv, write_metrics, Budget, NnProtocol, ScenarioConfig,
};
use kinoplan::planners::{solution_query, PlannerKind, SstStarParams};
use kinoplan::systems::make_system;
use kinoplan::{Error, Result, Trajectory};

use crate::{NnArgs, PhaseArgs, Scenario, SweepArgs};

fn scenario_config(s: &Scenario) -> Result<ScenarioConfig> {
    if let Some(system) = &s.system {
        make_system(system)?;
    }
    let env = s
        .env
        .as_ref()
        .or(s.system.as_ref())
        .ok_or_else(|| Error::InvalidConfig("pass --env or --system".into()))?;
    let planner: PlannerKind = s.planner.parse()?;
    let budget = match (s.iters, s.seconds) {
        (_, Some(seconds)) => Budget::Seconds(seconds),
        (Some(n), None) => Budget::Iterations(n),
        (None, None) => Budget::Iterations(10_000),
    };
    let mut config = ScenarioConfig::new(env, planner, budget)?
        .with_trials(s.trials)
        .with_seed(s.seed);
    config.system = s.system.clone();
    config.dt = s.dt;
    config.out_dir = Some(s.out.clone());
    let pc = &mut config.planner_config;
    if let Some(v) = s.delta_s {
        pc.delta_s = v;
    }
    if let Some(v) = s.delta_bn {
        pc.delta_bn = v;
    }
    if let Some(v) = s.tprop {
        pc.t_prop = v;
    }
    if planner == PlannerKind::SstStar {
        pc.sststar = Some(SstStarParams { xi: s.xi, n0: s.n0 });
    }
    config.resolve()?;
    Ok(config)
}

fn write_key_values(path: &Path, rows: &[(String, String)]) -> Result<()> {
    #[derive(serde::Serialize)]
    struct Row<'a> {
        key: &'a str,
        value: &'a str,
    }
    let rows: Vec<Row> = rows
        .iter()
        .map(|(key, value)| Row { key, value })
        .collect();
    write_csv(path, &rows)
}

fn write_solution(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut out = csv::Writer::from_path(dir.join("solution.csv")).map_err(Error::from)?;
    let mut header = vec!["index".to_string()];
    header.extend((0..traj.dim()).map(|i| format!("x{i}")));
    out.write_record(&header).map_err(Error::from)?;
    for (i, x) in traj.states().enumerate() {
        let mut record = vec![i.to_string()];
        record.extend(x.iter().map(f64::to_string));
        out.write_record(&record).map_err(Error::from)?;
    }
    out.flush()?;

    let mut out = csv::Writer::from_path(dir.join("controls.csv")).map_err(Error::from)?;
    let dim = traj.control.segments().first().map_or(0, |s| s.control.dim());
    let mut header = vec!["segment".to_string(), "duration".to_string()];
    header.extend((0..dim).map(|i| format!("u{i}")));
    out.write_record(&header).map_err(Error::from)?;
    for (i, seg) in traj.control.segments().iter().enumerate() {
        let mut record = vec![i.to_string(), seg.duration.to_string()];
        record.extend(seg.control.iter().map(f64::to_string));
        out.write_record(&record).map_err(Error::from)?;
    }
    out.flush()?;
    Ok(())
}

pub fn plan(s: &Scenario) -> Result<()> {
    let config = scenario_config(s)?;
    let (system, env) = config.resolve()?;
    let (record, tree) = run_trial_on(&config, &system, &env, 0)?;
    write_metrics(&s.out, &record.rows)?;
    let last = record.last();
    match solution_query(&tree, &system, &env)? {
        Some(traj) => {
            write_solution(&s.out, &traj)?;
            println!(
                "{} on {}: {} iterations, {} nodes, solution cost {:.4}",
                config.planner, env.name, last.iteration, last.nodes, traj.cost
            );
        }
        None => println!(
            "{} on {}: {} iterations, {} nodes, no solution",
            config.planner, env.name, last.iteration, last.nodes
        ),
    }
    Ok(())
}

pub fn bench(s: &Scenario) -> Result<()> {
    let config = scenario_config(s)?;
    let records = run_trials(&config)?;
    let rows: Vec<_> = records.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    write_metrics(&s.out, &rows)?;
    let summary = summarize(&records);
    write_csv(&s.out.join("summary.csv"), &summary)?;
    write_key_values(&s.out.join("hardware.csv"), &hardware_info())?;
    let solved = records.iter().filter(|r| r.last().best_cost.is_some()).count();
    println!(
        "{} trials of {}: {solved} solved",
        records.len(),
        config.planner
    );
    if let Some(last) = summary.last() {
        if let Some(mean) = last.best_cost_mean {
            println!("mean final cost {mean:.4} at iteration {}", last.iteration);
        }
    }
    Ok(())
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let config = scenario_config(&a.scenario)?;
    if a.ds_values.is_empty() || a.bn_values.is_empty() {
        return Err(Error::InvalidConfig("empty sweep grid".into()));
    }
    let table = sweep_params(&config, &a.ds_values, &a.bn_values)?;
    write_csv(&a.scenario.out.join("sweep.csv"), &table.cells)?;
    write_key_values(&a.scenario.out.join("hardware.csv"), &hardware_info())?;
    print!("{}", table.to_text());
    Ok(())
}

pub fn nnbench(a: &NnArgs) -> Result<()> {
    let structures: Vec<&str> = match a.structure.as_str() {
        "both" => vec!["brute", "graph"],
        s => vec![s],
    };
    let protocol = NnProtocol {
        points: a.points,
        queries: a.queries,
        k: a.k,
        radius: a.radius,
        seed: a.seed,
    };
    let mut reports = Vec::new();
    for s in structures {
        let report = nn_accuracy_experiment(&protocol, s)?;
        println!(
            "{:>6}: single {:.2}%  k={} {:.2}%  range {:.2}%",
            report.structure, report.single, report.k, report.k_close, report.range
        );
        reports.push(report);
    }
    write_csv(&a.out.join("nn.csv"), &reports)
}

pub fn phase(a: &PhaseArgs) -> Result<()> {
    let config = scenario_config(&a.scenario)?;
    let dims: [usize; 2] = a
        .dims
        .as_slice()
        .try_into()
        .map_err(|_| Error::InvalidConfig("--dims takes exactly two indices".into()))?;
    let (system, env) = config.resolve()?;
    let (record, tree) = run_trial_on(&config, &system, &env, 0)?;
    write_metrics(&a.scenario.out, &record.rows)?;
    let grid = emit_phase_grid(&tree, &system, config.planner, dims, a.resolution, &a.scenario.out)?;
    println!(
        "{} of {} cells populated from {} nodes",
        grid.populated(),
        a.resolution * a.resolution,
        tree.len()
    );
    Ok(())
}
