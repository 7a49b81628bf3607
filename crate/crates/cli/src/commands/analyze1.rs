//! `analyze1`: expertise grouping and the direction of prediction errors
//! for the baseline evaluation.

use serde::{Deserialize, Serialize};

use crossind_core::analysis::{error_stats, search_grouping, ErrorStats, GroupingResult, GroupingSearch, TestResult};
use crossind_core::CompetitiveLevel;

use super::baseline::BaselineReport;
use crate::config::RunConfig;
use crate::error::{describe, CliError};
use crate::output::{num, opt_num, write_atomic, write_json, CsvOut};
use crate::svg;

pub const GROUPING_FILE: &str = "grouping.csv";
pub const GROUPING_SCHEMA: &str = "grouping-v1";
pub const ERRORS_FILE: &str = "pitcher_errors.csv";
pub const ERRORS_SCHEMA: &str = "pitcher-errors-v1";
pub const TABLE_FILE: &str = "analysis1.csv";
pub const TABLE_SCHEMA: &str = "analysis1-v1";
pub const REPORT_FILE: &str = "analysis1.json";
pub const FIGURE_FILE: &str = "group_errors.svg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis1Report {
    pub schema: String,
    pub spec: String,
    /// Baseline repeat whose predictions are analyzed.
    pub repeat: usize,
    pub grouping: GroupingSearch,
    pub errors: ErrorStats,
    pub mae_test: TestResult,
    pub signed_test: TestResult,
}

fn levels(set: &[CompetitiveLevel]) -> String {
    set.iter().map(|l| l.name()).collect::<Vec<_>>().join("+")
}

fn grouping_row(csv: &mut CsvOut, index: usize, g: &GroupingResult, selected: bool) {
    csv.row([
        GROUPING_SCHEMA.to_string(),
        index.to_string(),
        levels(&g.intermediate),
        levels(&g.expert),
        g.n_intermediate.to_string(),
        g.n_expert.to_string(),
        num(g.d_ie),
        num(g.sigma_i),
        num(g.sigma_e),
        opt_num(g.eta),
        selected.to_string(),
    ]);
}

pub fn figure(errors: &ErrorStats) -> String {
    let (i, e) = (&errors.intermediate, &errors.expert);
    svg::bars(
        "Prediction error by expertise group",
        "error (mph)",
        &["absolute".into(), "signed".into()],
        &[
            svg::BarSeries {
                name: format!("intermediate (n={})", i.n),
                values: vec![(i.mae_mean, i.mae_sd), (i.signed_mean, i.signed_sd)],
            },
            svg::BarSeries {
                name: format!("expert (n={})", e.n),
                values: vec![(e.mae_mean, e.mae_sd), (e.signed_mean, e.signed_sd)],
            },
        ],
    )
}

pub fn run(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let baseline = BaselineReport::load(&config.out)?;
    let repeat = 0;
    let evaluation = baseline.best_evaluation(repeat)?;
    let speeds: Vec<(CompetitiveLevel, f64)> = evaluation.folds.iter().map(|f| (f.level, f.mean_truth)).collect();
    let grouping = search_grouping(&speeds)?;
    let errors = error_stats(evaluation, &grouping.best, None)?;
    let test = |name: &str, r: crossind_core::Result<TestResult>| {
        r.map_err(|e| CliError::Runtime(format!("{name} error t-test: {}", describe(&e))))
    };
    let mae_test = test("absolute", errors.mae_test())?;
    let signed_test = test("signed", errors.signed_test())?;
    log::info!(
        "analyze1: intermediate = {} (n={}), signed t({}) = {:.3}",
        levels(&grouping.best.intermediate),
        grouping.best.n_intermediate,
        signed_test.df,
        signed_test.t
    );

    let mut groups = CsvOut::new(&[
        "schema",
        "candidate",
        "intermediate",
        "expert",
        "n_intermediate",
        "n_expert",
        "d_ie",
        "sigma_i",
        "sigma_e",
        "eta",
        "selected",
    ]);
    for (k, g) in grouping.candidates.iter().enumerate() {
        grouping_row(&mut groups, k, g, *g == grouping.best);
    }

    let mut per_pitcher = CsvOut::new(&[
        "schema",
        "pitcher",
        "level",
        "group",
        "true_mean",
        "pred_mean",
        "mae",
        "signed",
    ]);
    for (p, f) in errors.pitchers.iter().zip(&evaluation.folds) {
        per_pitcher.row([
            ERRORS_SCHEMA.to_string(),
            p.pitcher_id.clone(),
            p.level.to_string(),
            p.group.name().to_string(),
            num(f.mean_truth),
            num(f.mean_prediction),
            num(p.mae),
            num(p.signed),
        ]);
    }

    let mut table = CsvOut::new(&[
        "schema",
        "metric",
        "n_intermediate",
        "n_expert",
        "mean_intermediate",
        "sd_intermediate",
        "mean_expert",
        "sd_expert",
        "t",
        "df",
        "p",
        "cohen_d",
    ]);
    let (i, e) = (&errors.intermediate, &errors.expert);
    for (metric, t, (mi, si, me, se)) in [
        ("absolute", &mae_test, (i.mae_mean, i.mae_sd, e.mae_mean, e.mae_sd)),
        (
            "signed",
            &signed_test,
            (i.signed_mean, i.signed_sd, e.signed_mean, e.signed_sd),
        ),
    ] {
        table.row([
            TABLE_SCHEMA.to_string(),
            metric.to_string(),
            i.n.to_string(),
            e.n.to_string(),
            num(mi),
            num(si),
            num(me),
            num(se),
            num(t.t),
            t.df.to_string(),
            num(t.p),
            num(t.cohen_d),
        ]);
    }

    let figure = figure(&errors);
    let report = Analysis1Report {
        schema: TABLE_SCHEMA.into(),
        spec: baseline.best.clone(),
        repeat,
        grouping,
        errors,
        mae_test,
        signed_test,
    };
    groups.finish(&config.out.join(GROUPING_FILE))?;
    per_pitcher.finish(&config.out.join(ERRORS_FILE))?;
    table.finish(&config.out.join(TABLE_FILE))?;
    write_atomic(&config.out.join(FIGURE_FILE), figure.as_bytes())?;
    write_json(&config.out.join(REPORT_FILE), &report)?;
    Ok(vec![
        GROUPING_FILE.into(),
        ERRORS_FILE.into(),
        TABLE_FILE.into(),
        FIGURE_FILE.into(),
        REPORT_FILE.into(),
    ])
}
