use alignmarket::hull::{
    generate_noisy_agents, hoeffding_committee_size, k_scaling_experiment, load_scores, validate_alignment_probability,
    AgentModel, MetricStats, NoiseModel, ValidationConfig,
};
use alignmarket::optim::{least_squares_baselines, nnls, simplex_fit};
use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{usage, Ctx};
use crate::args::{FitArgs, FitMethod, GenAgentsArgs, HoeffdingArgs, ScalingArgs, ValidateArgs};
use crate::output::{Cell, Table};

/// Splits `kind:value` into its parts.
fn tagged(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once(':') {
        Some((k, v)) => (k, Some(v)),
        None => (spec, None),
    }
}

fn number(flag: &'static str, v: Option<&str>) -> Result<f64> {
    v.and_then(|s| s.parse::<f64>().ok())
        .ok_or_else(|| usage(flag, format!("expected a number after ':', got {v:?}")))
}

fn noise_model(spec: &str) -> Result<NoiseModel> {
    match tagged(spec) {
        ("uniform", v) => Ok(NoiseModel::Uniform {
            half_width: number("noise", v)?,
        }),
        ("gaussian", v) => Ok(NoiseModel::TruncatedGaussian {
            sigma: number("noise", v)?,
        }),
        _ => Err(usage(
            "noise",
            format!("{spec:?}; expected uniform:<w> or gaussian:<sigma>"),
        )),
    }
}

fn agent_model(spec: &str) -> Result<AgentModel> {
    match tagged(spec) {
        ("bernoulli", None) => Ok(AgentModel::Bernoulli),
        ("exact", None) => Ok(AgentModel::Exact),
        ("uniform", v) => Ok(AgentModel::Uniform {
            half_width: number("model", v)?,
        }),
        _ => Err(usage(
            "model",
            format!("{spec:?}; expected bernoulli, exact or uniform:<w>"),
        )),
    }
}

pub fn fit(a: FitArgs, mut ctx: Ctx) -> Result<(&'static str, Ctx)> {
    let scores = load_scores(&a.scores)?;
    let design = scores.design();
    let truth = scores.truth();
    let mut fits = Vec::new();
    if matches!(a.method, FitMethod::Nnls | FitMethod::Both) {
        fits.push(("nnls", nnls(design, truth)?));
    }
    if matches!(a.method, FitMethod::Simplex | FitMethod::Both) {
        fits.push(("simplex", simplex_fit(design, truth)?));
    }
    let mut header = vec!["agent".to_string()];
    header.extend(fits.iter().map(|(m, _)| format!("{m}_weight")));
    let mut weights = Table::new(header);
    for (i, name) in scores.agents().iter().enumerate() {
        let mut row: Vec<Cell> = vec![name.as_str().into()];
        row.extend(fits.iter().map(|(_, f)| f.weights[i].into()));
        weights.push(row);
    }
    ctx.out.table("fit_weights", &weights)?;

    let base = least_squares_baselines(design, truth)?;
    let mut summary = Table::new(["method", "mse", "support"]);
    for (m, f) in &fits {
        summary.push(vec![(*m).into(), f.objective.into(), f.support_size.into()]);
        println!("{m}: mse={} support={}", f.objective, f.support_size);
    }
    let (best, best_mse) = base.best_individual;
    summary.push(vec![
        format!("best_individual:{}", scores.agents()[best]).into(),
        best_mse.into(),
        1usize.into(),
    ]);
    summary.push(vec![
        "simple_average".into(),
        base.simple_average.into(),
        scores.num_agents().into(),
    ]);
    ctx.out.table("fit", &summary)?;
    println!("best_individual={} mse={best_mse}", scores.agents()[best]);
    Ok(("fit", ctx))
}

const DEFAULT_GRID: [usize; 7] = [1, 2, 5, 10, 20, 50, 100];

pub fn scaling(a: ScalingArgs, mut ctx: Ctx) -> Result<(&'static str, Ctx)> {
    let scores = load_scores(&a.scores)?;
    let n = scores.num_agents();
    let grid: Vec<usize> = if a.k.is_empty() {
        DEFAULT_GRID.iter().copied().filter(|&k| k <= n).chain([n]).collect()
    } else {
        if let Some(&k) = a.k.iter().find(|&&k| k == 0 || k > n) {
            return Err(usage("k", format!("{k} is outside 1..={n}")));
        }
        a.k.clone()
    };
    let curve = k_scaling_experiment(&scores, &grid, a.permutations, a.folds, ctx.seed)?;

    let stats = |name: &str| [format!("{name}_mean"), format!("{name}_std")];
    let push = |row: &mut Vec<Cell>, s: &MetricStats| row.extend([s.mean.into(), s.std.into()]);

    let mse_names = [
        "best_individual_mse",
        "simple_average_mse",
        "nnls_mse",
        "simplex_mse",
        "train_best_individual_mse",
        "train_simple_average_mse",
        "train_nnls_mse",
        "train_simplex_mse",
    ];
    let mut fig1 = Table::new(std::iter::once("k".to_string()).chain(mse_names.iter().flat_map(|m| stats(m))));
    let mut fig2 = Table::new(
        std::iter::once("k".to_string()).chain(["nnls_support", "simplex_support"].iter().flat_map(|m| stats(m))),
    );
    for r in &curve.records {
        let mut row: Vec<Cell> = vec![r.k.into()];
        for s in [
            &r.best_individual_mse,
            &r.simple_average_mse,
            &r.nnls_mse,
            &r.simplex_mse,
            &r.train_best_individual_mse,
            &r.train_simple_average_mse,
            &r.train_nnls_mse,
            &r.train_simplex_mse,
        ] {
            push(&mut row, s);
        }
        fig1.push(row);
        let mut row: Vec<Cell> = vec![r.k.into()];
        push(&mut row, &r.nnls_support);
        push(&mut row, &r.simplex_support);
        fig2.push(row);
        println!(
            "k={} best={:.6} average={:.6} nnls={:.6} simplex={:.6}",
            r.k, r.best_individual_mse.mean, r.simple_average_mse.mean, r.nnls_mse.mean, r.simplex_mse.mean
        );
    }
    ctx.out.table("fig1", &fig1)?;
    ctx.out.table("fig2", &fig2)?;
    Ok(("scaling", ctx))
}

pub fn gen_agents(a: GenAgentsArgs, mut ctx: Ctx) -> Result<(&'static str, Ctx)> {
    let model = noise_model(&a.noise)?;
    let truth: Vec<f64> = match &a.truth {
        Some(path) => load_scores(path)?.truth().to_vec(),
        None => {
            if a.items == 0 {
                return Err(usage("items", "must be at least 1"));
            }
            // separate stream from the agents' noise
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x7275_7468);
            (0..a.items).map(|_| rng.gen::<f64>()).collect()
        }
    };
    let g = generate_noisy_agents(&truth, a.agents, model, ctx.seed)?;
    let mut bytes = Vec::new();
    g.scores.to_csv_writer(&mut bytes)?;
    ctx.out.raw("scores.csv", &bytes)?;
    let mut bias = Table::new(["agent", "bias"]);
    for (name, &b) in g.scores.agents().iter().zip(&g.bias) {
        bias.push(vec![name.as_str().into(), b.into()]);
    }
    ctx.out.table("bias", &bias)?;
    println!("items={} agents={}", truth.len(), a.agents);
    Ok(("gen-agents", ctx))
}

pub fn hoeffding(a: HoeffdingArgs, mut ctx: Ctx) -> Result<(&'static str, Ctx)> {
    let k = hoeffding_committee_size(a.actions, a.states, a.eps, a.delta)?;
    let mut t = Table::new(["actions", "states", "epsilon", "delta", "committee_size"]);
    t.push(vec![
        a.actions.into(),
        a.states.into(),
        a.eps.into(),
        a.delta.into(),
        k.into(),
    ]);
    ctx.out.table("hoeffding", &t)?;
    println!("{k}");
    Ok(("hoeffding", ctx))
}

pub fn validate(a: ValidateArgs, mut ctx: Ctx) -> Result<(&'static str, Ctx)> {
    let mut cfg = ValidationConfig::new(a.actions, a.states, a.eps, a.delta, a.trials, ctx.seed);
    cfg.model = agent_model(&a.model)?;
    cfg.committee_size = a.committee_size;
    let r = validate_alignment_probability(&cfg)?;
    let mut t = Table::new([
        "committee_size",
        "trials",
        "failures",
        "failure_rate",
        "threshold",
        "passed",
    ]);
    let passed = r.failure_rate <= r.threshold;
    t.push(vec![
        r.committee_size.into(),
        r.trials.into(),
        r.failures.into(),
        r.failure_rate.into(),
        r.threshold.into(),
        passed.into(),
    ]);
    ctx.out.table("validation", &t)?;
    println!(
        "k={} failure_rate={} threshold={} passed={passed}",
        r.committee_size, r.failure_rate, r.threshold
    );
    Ok(("validate-prop-a1", ctx))
}
