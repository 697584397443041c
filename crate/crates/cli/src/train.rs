use std::path::Path;

use bqc::datasets::{bas_patterns, BasGrid};
use bqc::trainer::{learn_prior, train_bas, train_qcbm, Metrics, Run};
use serde::Serialize;

use crate::artifacts::{distribution_csv, loss_history_csv, write_file, ModelFile, RunPaths};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::CliResult;

#[derive(Debug, Serialize)]
struct PatternProbability {
    pattern: usize,
    probability: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    experiment: ExperimentKind,
    iterations: usize,
    converged: bool,
    final_loss: f64,
    metrics: Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pattern_probabilities: Option<Vec<PatternProbability>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pretrain_component_tv: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pretrain_iterations: Option<usize>,
}

fn pattern_probabilities(grid: &BasGrid, run: &Run) -> CliResult<Vec<PatternProbability>> {
    let probs = run.report.final_data_marginal.probs();
    Ok(bas_patterns(grid)?
        .into_iter()
        .map(|pattern| PatternProbability {
            pattern,
            probability: probs[pattern],
        })
        .collect())
}

pub fn cmd_train(config_path: &Path) -> CliResult<()> {
    let config = ExperimentConfig::load(config_path)?;
    let (run, report) = match config.experiment {
        ExperimentKind::BasGenerate => {
            let grid = config.grid.expect("resolved");
            let layout = config.layout.expect("resolved");
            let objective = config.objective.expect("resolved");
            let run = train_bas(&grid, &layout, objective, &config.train)?;
            let mut report = base_report(&config, &run);
            report.pattern_probabilities = Some(pattern_probabilities(&grid, &run)?);
            (run, report)
        }
        ExperimentKind::QcbmBaseline => {
            let grid = config.grid.expect("resolved");
            let run = train_qcbm(&grid, config.qcbm_layers.expect("resolved"), &config.train)?;
            let mut report = base_report(&config, &run);
            report.pattern_probabilities = Some(pattern_probabilities(&grid, &run)?);
            (run, report)
        }
        ExperimentKind::LearnPrior => {
            let layout = config.layout.expect("resolved");
            let mixture = config.mixture.as_ref().expect("resolved");
            let pretrain = config.pretrain.as_ref().expect("resolved");
            let prior_run = learn_prior(&layout, mixture, pretrain, &config.train)?;
            let mut report = base_report(&config, &prior_run.run);
            report.pretrain_component_tv = Some(prior_run.pretrain.component_tv.clone());
            report.pretrain_iterations = Some(prior_run.pretrain.report.iterations());
            (prior_run.run, report)
        }
    };

    let paths = RunPaths::new(&config.output_dir);
    let model = ModelFile::new(config.layout, &run.circuit, &run.report.final_params);
    write_file(&paths.config, config.to_json().as_bytes())?;
    write_file(&paths.model, model.to_json().as_bytes())?;
    write_file(&paths.distribution, &distribution_csv(&run.report.final_data_marginal))?;
    write_file(&paths.loss_history, &loss_history_csv(&run.report.loss_history))?;
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_file(&paths.report, report_json.as_bytes())?;

    println!(
        "{}: {} iterations, final loss {:.6e}, valid_mass {:.6}, tv {:.6}",
        if run.report.converged { "converged" } else { "finished" },
        run.report.iterations(),
        run.report.final_loss(),
        run.report.metrics.valid_mass,
        run.report.metrics.total_variation
    );
    if config.experiment == ExperimentKind::LearnPrior {
        println!("learned prior: {:?}", run.report.final_prior.probs());
    }
    println!("artifacts written to {}", config.output_dir.display());
    Ok(())
}

fn base_report(config: &ExperimentConfig, run: &Run) -> Report {
    Report {
        experiment: config.experiment,
        iterations: run.report.iterations(),
        converged: run.report.converged,
        final_loss: run.report.final_loss(),
        metrics: run.report.metrics.clone(),
        pattern_probabilities: None,
        pretrain_component_tv: None,
        pretrain_iterations: None,
    }
}
