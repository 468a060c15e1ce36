//! Subcommand implementations. Each returns a JSON summary that also goes
//! into the manifest.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, NamedMeasure, RateFunction, SimMode};
use super::output::{header, raw, sci, OutputDir};
use crate::error::{Error, Result};
use crate::lagrange::{
    min_rate_given_association, min_rate_given_mass_single_temp, right_well, table_experiments, RootOptions,
    TableConfig,
};
use crate::ldp::{rate_i_unsym, rate_j, symmetry_discrepancy, AssociationLaw};
use crate::measure::total_variation;
use crate::model::{glauber_rates, mass_right};
use crate::simulate::{simulate_ins_with, simulate_pt, simulate_uncoupled, SimOptions, SimOutput};
use crate::swapchain::ProductChain;

fn section<'a, T>(cfg: &'a Option<T>, name: &str) -> Result<&'a T> {
    cfg.as_ref()
        .ok_or_else(|| Error::Config(format!("missing [{name}] section")))
}

/// Mass the lowest-temperature marginal of a product measure puts on `x >= 0`.
fn lowest_temp_right_mass(chain: &ProductChain, probs: &[f64]) -> f64 {
    let stride = chain.n().pow(chain.k() as u32 - 1);
    let region = right_well(chain.grid());
    probs
        .iter()
        .enumerate()
        .filter(|(x, _)| region[x / stride])
        .map(|(_, p)| p)
        .sum()
}

pub fn simulate(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value> {
    let sim = section(&cfg.simulate, "simulate")?;
    let (_, chain) = cfg.build_chain()?;
    let k = chain.k();
    let ins = match sim.mode {
        SimMode::Ins => Some(chain.ins_generator()?),
        _ => None,
    };
    let runs: Vec<SimOutput> = (0..sim.replicas as u64)
        .into_par_iter()
        .map(|stream| {
            let opts = SimOptions {
                stream,
                record_path: sim.record_path,
                checkpoints: sim.checkpoints,
            };
            match sim.mode {
                SimMode::Ins => {
                    let rates = &ins.as_ref().expect("built above").rates;
                    simulate_ins_with(&chain, rates, &sim.initial, sim.horizon, cfg.seed, opts)
                }
                SimMode::Pt => simulate_pt(&chain, sim.swap_rate, &sim.initial, sim.horizon, cfg.seed, opts),
                SimMode::Uncoupled => simulate_uncoupled(&chain, &sim.initial, sim.horizon, cfg.seed, opts),
            }
        })
        .collect::<Result<_>>()?;

    let mu = chain.mu();
    let mu_bar = chain.mu_bar();
    let mut cols = vec!["replica", "time", "tv_eta_mu", "tv_nu_mu_bar", "right_mass_eta"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    cols.extend((1..=k).map(|i| format!("beta_{i}")));
    cols.extend((1..=chain.num_permutations()).map(|i| format!("rho_{i}")));
    let mut rows = Vec::new();
    let mut measure_rows = Vec::new();
    for run in &runs {
        let stream = run.trajectory.stream.to_string();
        for cp in &run.checkpoints {
            let mut row = vec![
                stream.clone(),
                raw(cp.time),
                raw(total_variation(&cp.eta, mu)),
                raw(total_variation(&cp.nu, mu_bar)),
                raw(lowest_temp_right_mass(&chain, &cp.eta)),
            ];
            row.extend(cp.beta.iter().map(|b| raw(*b)));
            row.extend(cp.rho.iter().map(|r| raw(*r)));
            rows.push(row);
            for x in 0..chain.size() {
                measure_rows.push(vec![stream.clone(), raw(cp.time), x.to_string(), raw(cp.nu[x]), raw(cp.eta[x])]);
            }
        }
    }
    out.csv("simulate-checkpoints.csv", &cols, &rows)?;
    out.csv(
        "simulate-checkpoint-measures.csv",
        &header(&["replica", "time", "state", "nu", "eta"]),
        &measure_rows,
    )?;

    let mut pooled = runs[0].accumulators.clone();
    for run in &runs[1..] {
        pooled.merge(&run.accumulators);
    }
    let (nu, eta) = (pooled.nu_t(), pooled.eta_t());
    let mut cols: Vec<String> = vec!["state".into()];
    cols.extend((1..=k).map(|i| format!("x_{i}")));
    cols.extend(header(&["mu", "mu_bar", "nu", "eta"]));
    let rows: Vec<Vec<String>> = (0..chain.size())
        .map(|x| {
            let mut row = vec![x.to_string()];
            row.extend(chain.positions(x).into_iter().map(raw));
            row.extend([raw(mu[x]), raw(mu_bar[x]), raw(nu[x]), raw(eta[x])]);
            row
        })
        .collect();
    out.csv("simulate-measures.csv", &cols, &rows)?;

    if sim.record_path {
        for run in &runs {
            let tr = &run.trajectory;
            let mut cols: Vec<String> = header(&["time", "state"]);
            cols.extend((1..=k).map(|i| format!("x_{i}")));
            let labelled = !tr.labels.is_empty();
            if labelled {
                cols.push("assignment".into());
            }
            let rows: Vec<Vec<String>> = (0..tr.states.len())
                .map(|i| {
                    let mut row = vec![raw(tr.times[i]), tr.states[i].to_string()];
                    row.extend(chain.positions(tr.states[i]).into_iter().map(raw));
                    if labelled {
                        row.push(tr.labels[i].to_string());
                    }
                    row
                })
                .collect();
            out.csv(&format!("simulate-path-{}.csv", tr.stream), &cols, &rows)?;
        }
    }

    let replicas: Vec<Value> = runs
        .iter()
        .map(|r| {
            json!({
                "stream": r.trajectory.stream,
                "jumps": r.trajectory.jumps,
                "beta": r.accumulators.beta_t(),
                "rho": r.accumulators.rho_t(),
                "nu": r.accumulators.nu_t(),
                "eta": r.accumulators.eta_t(),
                "tv_eta_mu": total_variation(&r.accumulators.eta_t(), mu),
            })
        })
        .collect();
    let summary = json!({
        "mode": sim.mode,
        "horizon": sim.horizon,
        "replicas": replicas,
        "pooled": {
            "time": pooled.time,
            "beta": pooled.beta_t(),
            "rho": pooled.rho_t(),
            "tv_eta_mu": total_variation(&eta, mu),
            "tv_nu_mu_bar": total_variation(&nu, mu_bar),
            "right_mass_eta": lowest_temp_right_mass(&chain, &eta),
            "right_mass_mu": lowest_temp_right_mass(&chain, mu),
        },
    });
    out.json("simulate-summary.json", &summary)?;
    println!(
        "{} replica(s) to T = {}: pooled TV(eta, mu) = {:.4}, beta = {:?}",
        sim.replicas,
        sim.horizon,
        total_variation(&eta, mu),
        pooled.beta_t()
    );
    Ok(summary)
}

pub fn tables(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value> {
    let t = section(&cfg.tables, "tables")?;
    let data = table_experiments(&TableConfig {
        lo: cfg.grid.lo,
        hi: cfg.grid.hi,
        n: cfg.grid.n,
        temperatures: cfg.temperatures.clone(),
        alphas: t.alphas.clone(),
        deltas: t.deltas.clone(),
        root: RootOptions {
            tolerance: t.tolerance,
            max_iterations: t.max_iterations,
        },
    })?;
    let rows: Vec<Vec<String>> = data
        .alphas
        .iter()
        .zip(&data.kappa)
        .map(|(a, kappa)| vec![raw(*a), format!("{kappa:.4}"), raw(*kappa)])
        .collect();
    out.csv("tables-kappa.csv", &header(&["alpha", "kappa", "kappa_raw"]), &rows)?;

    let na = data.alphas.len();
    let rows: Vec<Vec<String>> = data
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let normalized = data.normalized[i / na][i % na];
            vec![
                raw(c.delta),
                raw(c.alpha),
                raw(c.target),
                raw(c.achieved),
                sci(c.rate),
                raw(c.rate),
                format!("{normalized:.4}"),
                raw(c.lambda),
                c.iterations.to_string(),
                raw(c.bellman_residual),
            ]
        })
        .collect();
    let cols = header(&[
        "delta",
        "alpha",
        "target",
        "achieved",
        "rate",
        "rate_raw",
        "normalized",
        "lambda",
        "iterations",
        "bellman_residual",
    ]);
    out.csv("tables-rates.csv", &cols, &rows)?;

    let mut cols: Vec<String> = vec!["delta".into()];
    cols.extend(data.alphas.iter().map(|a| format!("alpha_{a}")));
    let rows: Vec<Vec<String>> = data
        .deltas
        .iter()
        .zip(&data.normalized)
        .map(|(d, row)| {
            let mut r = vec![raw(*d)];
            r.extend(row.iter().map(|v| format!("{v:.4}")));
            r
        })
        .collect();
    out.csv("tables-normalized.csv", &cols, &rows)?;

    println!("{:>8} {}", "delta", data.alphas.iter().map(|a| format!("{a:>11}")).collect::<String>());
    for (d, row) in data.deltas.iter().zip(&data.rates) {
        println!("{d:>8} {}", row.iter().map(|r| format!("{r:>11.4e}")).collect::<String>());
    }
    let summary = json!({
        "grid_points": data.grid_points,
        "kappa": data.kappa,
        "rates": data.rates,
        "normalized": data.normalized,
        "max_bellman_residual": data.cells.iter().map(|c| c.bellman_residual).fold(0.0, f64::max),
    });
    out.json("tables-metadata.json", &summary)?;
    Ok(summary)
}

pub fn value_function(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value> {
    let v = section(&cfg.value_function, "value_function")?;
    let grid = cfg.build_grid()?;
    let potential = cfg.build_potential(&grid)?;
    let tau = cfg.temperatures[0];
    let chain = glauber_rates(&potential, &grid, tau)?;
    let region = right_well(&grid);
    let kappa = mass_right(&chain.stationary.probs, &grid)?;
    let target = kappa * (1.0 - v.delta);
    let res = min_rate_given_mass_single_temp(
        &chain,
        &region,
        target,
        RootOptions {
            tolerance: v.tolerance,
            ..RootOptions::default()
        },
    )?;
    let sol = &res.result.solution;
    let nu = res.result.nu.probs();
    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|i| {
            vec![
                raw(grid.points()[i]),
                raw(sol.w[i]),
                raw(res.right_tilt[i]),
                raw(res.left_tilt[i]),
                raw(1.0 / res.right_tilt[i]),
                raw(1.0 / res.left_tilt[i]),
                raw(nu[i]),
                raw(chain.stationary.probs[i]),
            ]
        })
        .collect();
    let cols = header(&[
        "x",
        "w",
        "right_tilt",
        "left_tilt",
        "right_rate_factor",
        "left_rate_factor",
        "nu",
        "mu",
    ]);
    out.csv("value-function.csv", &cols, &rows)?;
    println!(
        "tau = {tau}, delta = {}: rate = {:.4e}, lambda = {:.6e}",
        v.delta, res.result.rate, res.result.lambda
    );
    Ok(json!({
        "temperature": tau,
        "delta": v.delta,
        "kappa": kappa,
        "target": target,
        "achieved": res.result.achieved,
        "rate": res.result.rate,
        "lambda": res.result.lambda,
        "iterations": res.result.iterations,
        "bellman_residual": res.result.bellman_residual,
    }))
}

pub fn diagnose(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value> {
    let d = section(&cfg.diagnose, "diagnose")?;
    let (_, chain) = cfg.build_chain()?;
    let opts = RootOptions {
        tolerance: d.tolerance,
        ..RootOptions::default()
    };
    let results = d
        .w1
        .par_iter()
        .map(|&w| min_rate_given_association(&chain, &AssociationLaw::pair(w)?, opts))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = d
        .w1
        .iter()
        .zip(&results)
        .map(|(w, r)| {
            let dist = r.distance.expect("product-chain result carries a distance");
            vec![
                raw(*w),
                sci(r.rate),
                raw(r.rate),
                sci(dist),
                raw(dist),
                raw(r.lambda),
                raw(r.bellman_residual),
            ]
        })
        .collect();
    let cols = header(&[
        "w1",
        "rate",
        "rate_raw",
        "distance",
        "distance_raw",
        "lambda",
        "bellman_residual",
    ]);
    out.csv("diagnose.csv", &cols, &rows)?;
    for (w, r) in d.w1.iter().zip(&results) {
        println!(
            "w1 = {w}: rate = {:.4e}, distance to product measure = {:.4e}",
            r.rate,
            r.distance.unwrap_or(f64::NAN)
        );
    }
    Ok(json!({
        "w1": d.w1,
        "rates": results.iter().map(|r| r.rate).collect::<Vec<_>>(),
        "distances": results.iter().map(|r| r.distance).collect::<Vec<_>>(),
    }))
}

pub fn rate(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value> {
    let r = section(&cfg.rate, "rate")?;
    let (_, chain) = cfg.build_chain()?;
    let (label, measure) = match (&r.measure, &r.values) {
        (Some(NamedMeasure::Uniform), _) => ("uniform", vec![1.0 / chain.size() as f64; chain.size()]),
        (Some(NamedMeasure::Product), _) => ("product", chain.mu().to_vec()),
        (Some(NamedMeasure::Symmetrized), _) => ("symmetrized", chain.mu_bar().to_vec()),
        (None, Some(v)) => {
            let s: f64 = v.iter().sum();
            ("values", v.iter().map(|x| x / s).collect())
        }
        (None, None) => return Err(Error::Config("rate: set one of measure, values".into())),
    };
    let discrepancy = symmetry_discrepancy(&chain, &measure)?;
    let value = match r.function {
        RateFunction::Symmetric => {
            let ins = chain.ins_generator()?;
            rate_j(&ins.rates, chain.mu_bar(), &measure)
        }
        RateFunction::Weighted => rate_i_unsym(&chain, &measure, crate::ldp::SYMMETRY_TOL)?,
    };
    let function = match r.function {
        RateFunction::Symmetric => "symmetric",
        RateFunction::Weighted => "weighted",
    };
    out.csv(
        "rate.csv",
        &header(&["function", "measure", "rate", "rate_raw", "symmetry_discrepancy"]),
        &[vec![
            function.into(),
            label.into(),
            sci(value),
            raw(value),
            raw(discrepancy),
        ]],
    )?;
    println!("{function} rate of {label} measure: {value:.4e}");
    Ok(json!({
        "function": function,
        "measure": label,
        "rate": if value.is_finite() { json!(value) } else { json!("inf") },
        "symmetry_discrepancy": discrepancy,
    }))
}
