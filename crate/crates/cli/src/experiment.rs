//! Seeded execution of the three experiments.
//!
//! Jobs are the `(method, repeat)` pairs. They run on the rayon pool and
//! their rows are merged in method-major, repeat-minor order, so the output
//! does not depend on scheduling. Per-repeat material shared by all methods
//! (bandit instances, hv-check point sets, Monte-Carlo weights) is drawn
//! from reserved seed streams.

use std::time::Instant;

use hvscal_core::bandit::{
    explore_ucb, make_anticorrelated, BanditInstance, ExploreUcbConfig, LinUcbConfig, Perturbation,
};
use hvscal_core::hypervolume::{hv_exact, CumulativeHypervolume, HvMode, DEFAULT_NUM_WEIGHTS};
use hvscal_core::whitebox::{build_frontier, run_whitebox_observed};
use hvscal_core::{pareto_front, ObjectiveSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::method::Method;
use crate::output::{
    curves_csv, snapshot_csv, write_atomically, CurveRecord, JobManifest, Layer, Manifest,
    RepeatManifest, SnapshotRow, CURVES_FILE, MANIFEST_FILE, MANIFEST_SCHEMA, SNAPSHOT_FILE,
};
use crate::seed::{seed_derivation, HV_WEIGHT_STREAM, INSTANCE_STREAM};

/// Everything a run produces, before anything touches the file system.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<CurveRecord>,
    /// Empty unless the config asks for a snapshot.
    pub snapshot: Vec<SnapshotRow>,
    pub manifest: Manifest,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<std::path::PathBuf>,
    pub rows: usize,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    method: usize,
    repeat: usize,
    seed: u64,
}

struct JobOutput {
    records: Vec<CurveRecord>,
    /// Objective vector of every trial's selection, in trial order.
    selected: Vec<Vec<f64>>,
}

/// Per-repeat data shared by all methods.
struct RepeatContext {
    instance_seed: u64,
    /// Points the selection rule can reach; used for snapshots and totals.
    candidates: Option<ObjectiveSet>,
    bandit: Option<BanditInstance>,
    total_hypervolume: Option<f64>,
    candidate_front_size: Option<usize>,
}

/// Runs every job and assembles the rows, snapshot and manifest.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let methods = config.parsed_methods()?;
    let jobs: Vec<Job> = (0..methods.len())
        .flat_map(|m| (0..config.repeats).map(move |r| (m, r)))
        .map(|(method, repeat)| Job {
            method,
            repeat,
            seed: seed_derivation(config.seed, repeat as u64, method as u64),
        })
        .collect();

    let repeats: Vec<RepeatContext> = (0..config.repeats)
        .into_par_iter()
        .map(|r| repeat_context(config, r))
        .collect::<Result<_>>()?;

    let whitebox_grid = match config.experiment {
        Experiment::Whitebox => Some(build_frontier(&config.frontier_spec())?),
        _ => None,
    };

    let outputs: Vec<JobOutput> = jobs
        .par_iter()
        .map(|job| {
            let method = &methods[job.method];
            let ctx = &repeats[job.repeat];
            match config.experiment {
                Experiment::Whitebox => {
                    run_whitebox_job(config, method, job, whitebox_grid.as_ref().expect("grid built"))
                }
                Experiment::Bandit => run_bandit_job(config, method, job, ctx),
                Experiment::HvCheck => run_hv_check_job(config, method, job, ctx),
            }
        })
        .collect::<Result<_>>()?;

    let snapshot = if config.snapshot {
        build_snapshot(config, &methods, &jobs, &outputs, &repeats, whitebox_grid.as_ref())?
    } else {
        Vec::new()
    };
    let mut files = vec![CURVES_FILE.to_string(), MANIFEST_FILE.to_string()];
    if config.snapshot {
        files.push(SNAPSHOT_FILE.to_string());
    }
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        jobs: jobs
            .iter()
            .map(|j| JobManifest {
                method: methods[j.method].label().to_string(),
                method_index: j.method as u64,
                repeat: j.repeat,
                seed: j.seed,
            })
            .collect(),
        repeats: repeats
            .iter()
            .enumerate()
            .map(|(r, c)| RepeatManifest {
                repeat: r,
                instance_seed: c.instance_seed,
                total_hypervolume: c.total_hypervolume,
                candidate_front_size: c.candidate_front_size,
            })
            .collect(),
        files,
    };
    Ok(RunOutput {
        records: outputs.into_iter().flat_map(|o| o.records).collect(),
        snapshot,
        manifest,
    })
}

/// [`execute`] and write the results into `config.out`.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary> {
    let output = execute(config)?;
    let manifest = serde_json::to_string_pretty(&output.manifest)
        .map_err(|e| CliError::Runtime(format!("cannot serialize manifest: {e}")))?;
    let mut files = vec![
        (CURVES_FILE, curves_csv(&output.records)),
        (MANIFEST_FILE, manifest + "\n"),
    ];
    if config.snapshot {
        files.push((SNAPSHOT_FILE, snapshot_csv(config.k, &output.snapshot)));
    }
    let files = write_atomically(&config.out, &files)?;
    Ok(RunSummary {
        files,
        rows: output.records.len(),
    })
}

fn repeat_context(config: &ExperimentConfig, repeat: usize) -> Result<RepeatContext> {
    let instance_seed = seed_derivation(config.seed, repeat as u64, INSTANCE_STREAM);
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
    let mut ctx = RepeatContext {
        instance_seed,
        candidates: None,
        bandit: None,
        total_hypervolume: None,
        candidate_front_size: None,
    };
    match config.experiment {
        Experiment::Whitebox => {}
        Experiment::Bandit => {
            let perturbation = if config.perturb_relative {
                Perturbation::RelativeToNorm(config.perturb_std)
            } else {
                Perturbation::Absolute(config.perturb_std)
            };
            let instance = make_anticorrelated(config.k, config.d, perturbation, config.n_actions, &mut rng)?;
            // Exploration actions are playable too, so they belong to the
            // action set the regret is measured against.
            let mut actions = instance.candidate_rewards();
            for e in instance.exploration_basis().row_iter() {
                let e: Vec<f64> = e.iter().copied().collect();
                actions.push(&instance.expected_reward(&e))?;
            }
            let front = pareto_front(&actions)?;
            let feasible = config.k <= 3 || front.len() <= config.regret_front_limit;
            if config.hv_mode.0 == HvMode::Exact && feasible {
                ctx.total_hypervolume = Some(hv_exact(&actions.select(&front), &config.reference)?);
            }
            ctx.candidate_front_size = Some(front.len());
            ctx.candidates = Some(actions);
            ctx.bandit = Some(instance);
        }
        Experiment::HvCheck => {
            let rows = (0..config.trials).map(|_| {
                (0..config.k)
                    .map(|_| 1.0 - rng.random::<f64>())
                    .collect::<Vec<f64>>()
            });
            let points = ObjectiveSet::from_rows(rows)?;
            ctx.candidate_front_size = Some(pareto_front(&points)?.len());
            ctx.candidates = Some(points);
        }
    }
    Ok(ctx)
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn record(config: &ExperimentConfig, method: &Method, repeat: usize, trial: usize) -> CurveRecord {
    CurveRecord {
        experiment: config.experiment,
        method: method.label().to_string(),
        repeat,
        trial,
        hypervolume: None,
        regret: None,
        elapsed_ms: None,
    }
}

fn scalarized(method: &Method) -> (&hvscal_core::ScalarizerSpec, &hvscal_core::WeightSampler) {
    match method {
        Method::Scalarized { spec, sampler, .. } => (spec, sampler),
        _ => unreachable!("scalarized experiments only accept scalarizer methods"),
    }
}

fn run_whitebox_job(config: &ExperimentConfig, method: &Method, job: &Job, grid: &ObjectiveSet) -> Result<JobOutput> {
    let (spec, sampler) = scalarized(method);
    let mut rng = ChaCha8Rng::seed_from_u64(job.seed);
    let start = Instant::now();
    let mut times = Vec::with_capacity(config.trials);
    let run = run_whitebox_observed(
        &config.frontier_spec(),
        spec,
        sampler,
        config.trials,
        config.hv_mode.0,
        &mut rng,
        |_| times.push(elapsed_ms(start)),
    )?;
    let records = (0..config.trials)
        .map(|t| {
            let mut r = record(config, method, job.repeat, t);
            if config.is_checkpoint(t) {
                r.hypervolume = Some(run.hypervolume[t]);
                r.regret = Some(run.regret[t]);
            }
            r.elapsed_ms = config.timing.then(|| times[t]);
            r
        })
        .collect();
    Ok(JobOutput {
        records,
        selected: run.selected.iter().map(|&i| grid.point(i).to_vec()).collect(),
    })
}

/// Hypervolume at each checkpoint of the growing prefix of `points`.
///
/// Exact mode with `hv_every = 1` adds exclusive volumes incrementally;
/// with sparser checkpoints each one is computed from scratch, which is
/// cheaper for long runs in many objectives. Monte-Carlo mode shares one
/// weight set per repeat across all methods.
fn prefix_hypervolumes(
    config: &ExperimentConfig,
    points: &ObjectiveSet,
    repeat: usize,
    start: Instant,
) -> Result<Vec<(Option<f64>, f64)>> {
    let z = &config.reference;
    let weights_seed = seed_derivation(config.seed, repeat as u64, HV_WEIGHT_STREAM);
    let mut weights_rng = ChaCha8Rng::seed_from_u64(weights_seed);
    let mode = config.hv_mode.0;
    let incremental = config.hv_every == 1 || mode != HvMode::Exact;
    let mut tracker = CumulativeHypervolume::new(mode, z, &mut weights_rng)?;
    let mut out = Vec::with_capacity(points.len());
    for (t, y) in points.iter().enumerate() {
        let hv = if incremental {
            let v = tracker.push(y)?;
            config.is_checkpoint(t).then_some(v)
        } else if config.is_checkpoint(t) {
            Some(hv_exact(&points.prefix(t + 1), z)?)
        } else {
            None
        };
        out.push((hv, elapsed_ms(start)));
    }
    Ok(out)
}

fn run_bandit_job(config: &ExperimentConfig, method: &Method, job: &Job, ctx: &RepeatContext) -> Result<JobOutput> {
    let (spec, sampler) = scalarized(method);
    let instance = ctx.bandit.as_ref().expect("bandit repeat has an instance");
    let mut rng = ChaCha8Rng::seed_from_u64(job.seed);
    let start = Instant::now();
    let run_config = ExploreUcbConfig {
        horizon: config.trials,
        scalarizer: *spec,
        sampler: *sampler,
        reference: config.reference.clone(),
        noise_std: config.noise_std,
        ucb_scale: config.ucb_scale,
        linucb: LinUcbConfig::default(),
    };
    let trace = explore_ucb(instance, &run_config, &mut rng)?;
    let hvs = prefix_hypervolumes(config, &trace.expected_rewards, job.repeat, start)?;
    let records = hvs
        .iter()
        .enumerate()
        .map(|(t, &(hv, ms))| {
            let mut r = record(config, method, job.repeat, t);
            r.hypervolume = hv;
            r.regret = hv.zip(ctx.total_hypervolume).map(|(v, total)| (total - v).max(0.0));
            r.elapsed_ms = config.timing.then_some(ms);
            r
        })
        .collect();
    Ok(JobOutput {
        records,
        selected: trace.expected_rewards.to_rows(),
    })
}

fn run_hv_check_job(config: &ExperimentConfig, method: &Method, job: &Job, ctx: &RepeatContext) -> Result<JobOutput> {
    let points = ctx.candidates.as_ref().expect("hv-check repeat has points");
    let start = Instant::now();
    let mut local = config.clone();
    local.hv_mode.0 = match (method, config.hv_mode.0) {
        (Method::HvExact, _) => HvMode::Exact,
        (_, HvMode::MonteCarlo { num_weights }) => HvMode::MonteCarlo { num_weights },
        (_, HvMode::Exact) => HvMode::MonteCarlo {
            num_weights: DEFAULT_NUM_WEIGHTS,
        },
    };
    let hvs = prefix_hypervolumes(&local, points, job.repeat, start)?;
    let final_value = hvs.last().and_then(|h| h.0).expect("last trial is a checkpoint");
    let records = hvs
        .iter()
        .enumerate()
        .map(|(t, &(hv, ms))| {
            let mut r = record(config, method, job.repeat, t);
            r.hypervolume = hv;
            r.regret = hv.map(|v| (final_value - v).max(0.0));
            r.elapsed_ms = config.timing.then_some(ms);
            r
        })
        .collect();
    Ok(JobOutput {
        records,
        selected: Vec::new(),
    })
}

/// Distinct Pareto-optimal points of `selected` with the first trial that
/// reached each.
fn discovered(selected: &[Vec<f64>]) -> Result<Vec<(usize, Vec<f64>)>> {
    if selected.is_empty() {
        return Ok(Vec::new());
    }
    let set = ObjectiveSet::from_rows(selected)?;
    let mut out: Vec<(usize, Vec<f64>)> = Vec::new();
    for i in pareto_front(&set)? {
        if !out.iter().any(|(_, p)| p.as_slice() == set.point(i)) {
            out.push((i, set.point(i).to_vec()));
        }
    }
    Ok(out)
}

fn candidate_rows(points: &ObjectiveSet, repeat: Option<usize>) -> Result<Vec<SnapshotRow>> {
    let row = |layer, p: &[f64]| SnapshotRow {
        layer,
        method: None,
        repeat,
        trial: None,
        point: p.to_vec(),
    };
    let mut rows: Vec<SnapshotRow> = points.iter().map(|p| row(Layer::Candidate, p)).collect();
    rows.extend(pareto_front(points)?.into_iter().map(|i| row(Layer::TrueFrontier, points.point(i))));
    Ok(rows)
}

fn build_snapshot(
    config: &ExperimentConfig,
    methods: &[Method],
    jobs: &[Job],
    outputs: &[JobOutput],
    repeats: &[RepeatContext],
    grid: Option<&ObjectiveSet>,
) -> Result<Vec<SnapshotRow>> {
    let mut rows = Vec::new();
    match (config.experiment, grid) {
        (Experiment::Whitebox, Some(grid)) => rows.extend(candidate_rows(grid, None)?),
        _ => {
            for (r, ctx) in repeats.iter().enumerate() {
                if let Some(points) = &ctx.candidates {
                    rows.extend(candidate_rows(points, Some(r))?);
                }
            }
        }
    }
    for (job, out) in jobs.iter().zip(outputs) {
        let method = Some(methods[job.method].label().to_string());
        for (t, p) in out.selected.iter().enumerate() {
            rows.push(SnapshotRow {
                layer: Layer::Selected,
                method: method.clone(),
                repeat: Some(job.repeat),
                trial: Some(t),
                point: p.clone(),
            });
        }
        for (t, p) in discovered(&out.selected)? {
            rows.push(SnapshotRow {
                layer: Layer::Discovered,
                method: method.clone(),
                repeat: Some(job.repeat),
                trial: Some(t),
                point: p,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;

    fn config(experiment: Experiment, o: Overrides) -> ExperimentConfig {
        ExperimentConfig::resolve(experiment, &o).unwrap()
    }

    #[test]
    fn whitebox_rows_are_ordered_and_complete() {
        let c = config(
            Experiment::Whitebox,
            Overrides {
                trials: Some(20),
                repeats: Some(2),
                grid_n: Some(8),
                ..Default::default()
            },
        );
        let out = execute(&c).unwrap();
        assert_eq!(out.records.len(), 3 * 2 * 20);
        let keys: Vec<(String, usize, usize)> = out
            .records
            .iter()
            .map(|r| (r.method.clone(), r.repeat, r.trial))
            .collect();
        let mut expected = Vec::new();
        for m in ["linear", "chebyshev", "hypervolume"] {
            for r in 0..2 {
                for t in 0..20 {
                    expected.push((m.to_string(), r, t));
                }
            }
        }
        assert_eq!(keys, expected);
        assert!(out.records.iter().all(|r| r.elapsed_ms.is_none() && r.regret.unwrap() >= 0.0));
        assert_eq!(out.manifest.jobs.len(), 6);
    }

    #[test]
    fn checkpoints_thin_the_hypervolume_column() {
        let c = config(
            Experiment::HvCheck,
            Overrides {
                trials: Some(10),
                repeats: Some(1),
                hv_every: Some(4),
                hv_mode: Some("mc:500".parse().unwrap()),
                ..Default::default()
            },
        );
        let out = execute(&c).unwrap();
        for method in ["exact", "mc"] {
            let filled: Vec<usize> = out
                .records
                .iter()
                .filter(|r| r.method == method && r.hypervolume.is_some())
                .map(|r| r.trial)
                .collect();
            assert_eq!(filled, vec![3, 7, 9]);
        }
    }

    #[test]
    fn sparse_exact_checkpoints_match_incremental() {
        let base = Overrides {
            trials: Some(12),
            repeats: Some(1),
            methods: Some(vec!["exact".into()]),
            ..Default::default()
        };
        let dense = execute(&config(Experiment::HvCheck, base.clone())).unwrap();
        let sparse = execute(&config(
            Experiment::HvCheck,
            Overrides {
                hv_every: Some(3),
                ..base
            },
        ))
        .unwrap();
        for (d, s) in dense.records.iter().zip(&sparse.records) {
            if let Some(v) = s.hypervolume {
                assert!((v - d.hypervolume.unwrap()).abs() <= 1e-12 * v.max(1.0));
            }
        }
    }

    #[test]
    fn bandit_regret_uses_action_set_total() {
        let c = config(
            Experiment::Bandit,
            Overrides {
                trials: Some(30),
                repeats: Some(2),
                n_actions: Some(100),
                methods: Some(vec!["hypervolume-uniform".into(), "linear-boxed".into()]),
                snapshot: Some(true),
                ..Default::default()
            },
        );
        let out = execute(&c).unwrap();
        assert_eq!(out.records.len(), 2 * 2 * 30);
        for rep in &out.manifest.repeats {
            assert!(rep.total_hypervolume.is_some());
        }
        for r in &out.records {
            let total = out.manifest.repeats[r.repeat].total_hypervolume.unwrap();
            let hv = r.hypervolume.unwrap();
            assert!(hv <= total * (1.0 + 1e-12), "{hv} > {total}");
            assert!((r.regret.unwrap() - (total - hv).max(0.0)).abs() < 1e-12);
        }
        let discovered = out.snapshot.iter().filter(|s| s.layer == Layer::Discovered).count();
        assert!(discovered > 0);
    }

    #[test]
    fn bandit_regret_is_blank_when_total_is_out_of_reach() {
        let c = config(
            Experiment::Bandit,
            Overrides {
                k: Some(6),
                trials: Some(10),
                repeats: Some(1),
                n_actions: Some(200),
                regret_front_limit: Some(5),
                methods: Some(vec!["chebyshev-uniform".into()]),
                ..Default::default()
            },
        );
        let out = execute(&c).unwrap();
        assert!(out.manifest.repeats[0].total_hypervolume.is_none());
        assert!(out.records.iter().all(|r| r.regret.is_none() && r.hypervolume.is_some()));

        let mc = ExperimentConfig {
            k: 2,
            reference: vec![-2.0; 2],
            hv_mode: "mc:100".parse().unwrap(),
            ..c
        };
        let out = execute(&mc).unwrap();
        assert!(out.records.iter().all(|r| r.regret.is_none()));
    }

    #[test]
    fn monte_carlo_bandit_runs_repeat_exactly() {
        let c = config(
            Experiment::Bandit,
            Overrides {
                trials: Some(10),
                repeats: Some(1),
                n_actions: Some(50),
                hv_mode: Some("mc:300".parse().unwrap()),
                methods: Some(vec!["linear".into()]),
                ..Default::default()
            },
        );
        let a = execute(&c).unwrap();
        let b = execute(&c).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn discovered_points_are_unique_front_members() {
        let selected = vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![1.0, 0.0], vec![0.2, 0.2], vec![0.0, 1.0]];
        let d = discovered(&selected).unwrap();
        assert_eq!(d, vec![(0, vec![1.0, 0.0]), (1, vec![0.5, 0.5]), (4, vec![0.0, 1.0])]);
    }
}
