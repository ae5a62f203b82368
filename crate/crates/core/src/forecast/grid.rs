use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::{point_metrics, PointMetrics};
use super::walk::{walk_forward, WalkForwardConfig};
use super::window::build_windows;
use super::{FeatureSet, Family, ForecasterSpec, PredictionSeries};
use crate::error::ForecastError;
use crate::par;
use crate::sentiment::fill_empty_months_neutral;
use crate::series::MonthlySeries;

/// One family with fixed parameters plus the parameters it sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTemplate {
    pub family: Family,
    #[serde(default)]
    pub base: BTreeMap<String, f64>,
    #[serde(default)]
    pub sweep: BTreeMap<String, Vec<f64>>,
}

impl GridTemplate {
    fn combinations(&self) -> Vec<BTreeMap<String, f64>> {
        let mut combos = vec![self.base.clone()];
        for (key, values) in &self.sweep {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |v| {
                        let mut next = c.clone();
                        next.insert(key.clone(), *v);
                        next
                    })
                })
                .collect();
        }
        combos
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub templates: Vec<GridTemplate>,
    pub feature_sets: Vec<FeatureSet>,
    pub windows: Vec<usize>,
}

impl GridSpec {
    /// Every (family, feature set, window, hyperparameters) cell in a fixed order.
    pub fn cells(&self) -> Vec<ForecasterSpec> {
        let mut out = Vec::new();
        for t in &self.templates {
            let combos = t.combinations();
            for fs in &self.feature_sets {
                for &w in &self.windows {
                    for params in &combos {
                        out.push(ForecasterSpec {
                            family: t.family.clone(),
                            hyperparams: params.clone(),
                            feature_set: fs.clone(),
                            window_len: w,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Scores one grid cell.
pub trait CellEvaluator: Sync {
    fn evaluate(&self, spec: &ForecasterSpec) -> Result<(PredictionSeries, Vec<String>), ForecastError>;

    /// True close series the predictions are scored against.
    fn truth(&self) -> &MonthlySeries;
}

/// Monthly inputs shared by all cells.
#[derive(Debug, Clone, Default)]
pub struct ForecastData {
    pub close: MonthlySeries,
    /// Tabular inputs, typically the close itself plus exogenous indicators.
    pub tabular: Vec<MonthlySeries>,
    /// Monthly sentiment score per source.
    pub sentiment: BTreeMap<String, MonthlySeries>,
}

impl ForecastData {
    /// Input series for a feature set. Months without sentiment count as neutral.
    pub fn features(&self, feature_set: &FeatureSet) -> Result<Vec<MonthlySeries>, ForecastError> {
        let mut out = self.tabular.clone();
        if let FeatureSet::WithSentiment(src) = feature_set {
            let s = self
                .sentiment
                .get(src)
                .ok_or_else(|| ForecastError::InvalidSpec(format!("no sentiment series for source `{src}`")))?;
            let mut filled = fill_empty_months_neutral(s, self.close.months());
            filled.label = format!("sentiment_{src}");
            out.push(filled);
        }
        Ok(out)
    }
}

/// Windows the data, walks forward and scores against the close.
pub struct WalkForwardEvaluator<'a> {
    pub data: &'a ForecastData,
    pub config: WalkForwardConfig,
    /// External predictions keyed by [`ForecasterSpec::cell_key`].
    pub replays: BTreeMap<String, MonthlySeries>,
}

impl CellEvaluator for WalkForwardEvaluator<'_> {
    fn evaluate(&self, spec: &ForecasterSpec) -> Result<(PredictionSeries, Vec<String>), ForecastError> {
        let features = self.data.features(&spec.feature_set)?;
        let dataset = build_windows(&features, &self.data.close, spec.window_len)?;
        let model = spec.build(self.replays.get(&spec.cell_key()))?;
        let run = walk_forward(spec, model.as_ref(), &dataset, &self.config)?;
        Ok((run.predictions, run.warnings))
    }

    fn truth(&self) -> &MonthlySeries {
        &self.data.close
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastRun {
    pub spec: ForecasterSpec,
    pub metrics: Option<PointMetrics>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    #[serde(skip)]
    pub predictions: Option<PredictionSeries>,
}

impl ForecastRun {
    fn r2(&self) -> Option<f64> {
        self.metrics.and_then(|m| m.r2)
    }

    fn group_key(&self) -> (String, String, usize) {
        (
            self.spec.family.id().to_string(),
            self.spec.feature_set.to_string(),
            self.spec.window_len,
        )
    }
}

/// R² descending, then RMSE ascending, then hyperparameters; failed cells last.
pub fn run_cmp(a: &ForecastRun, b: &ForecastRun) -> Ordering {
    fn desc(a: Option<f64>, b: Option<f64>) -> Ordering {
        match (a, b) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        }
    }
    let rmse = |r: &ForecastRun| r.metrics.map(|m| m.rmse);
    desc(a.r2(), b.r2())
        .then_with(|| desc(rmse(b), rmse(a)))
        .then_with(|| a.spec.hyperparam_key().cmp(&b.spec.hyperparam_key()))
        .then_with(|| a.spec.cell_key().cmp(&b.spec.cell_key()))
}

#[derive(Debug, Clone, Serialize)]
pub struct GridResult {
    pub total_cells: usize,
    /// All cells, best first.
    pub ranked: Vec<ForecastRun>,
    /// Best cell of each (family, feature set, window) group, best first.
    pub best: Vec<ForecastRun>,
}

impl GridResult {
    /// `family,source,window,hyperparams,r2,rmse,mae`.
    pub fn to_csv(runs: &[ForecastRun]) -> String {
        let mut out = String::from("family,source,window,hyperparams,r2,rmse,mae\n");
        for r in runs {
            let (r2, rmse, mae) = match r.metrics {
                Some(m) => (
                    m.r2.map(|v| v.to_string()).unwrap_or_default(),
                    m.rmse.to_string(),
                    m.mae.to_string(),
                ),
                None => Default::default(),
            };
            out.push_str(&format!(
                "{},{},{},{},{r2},{rmse},{mae}\n",
                r.spec.family,
                r.spec.feature_set,
                r.spec.window_len,
                r.spec.hyperparam_key()
            ));
        }
        out
    }
}

pub fn grid_search(grid: &GridSpec, evaluator: &dyn CellEvaluator) -> GridResult {
    let cells = grid.cells();
    let mut ranked = par::map(&cells, |spec| match evaluator.evaluate(spec) {
        Ok((predictions, warnings)) => match point_metrics(evaluator.truth(), &predictions) {
            Ok(m) => ForecastRun {
                spec: spec.clone(),
                metrics: Some(m),
                warnings,
                error: None,
                predictions: Some(predictions),
            },
            Err(e) => ForecastRun {
                spec: spec.clone(),
                metrics: None,
                warnings,
                error: Some(e.to_string()),
                predictions: Some(predictions),
            },
        },
        Err(e) => ForecastRun {
            spec: spec.clone(),
            metrics: None,
            warnings: Vec::new(),
            error: Some(e.to_string()),
            predictions: None,
        },
    });
    ranked.sort_by(run_cmp);

    let mut groups: BTreeMap<(String, String, usize), ForecastRun> = BTreeMap::new();
    for run in &ranked {
        // ranked is sorted, so the first run seen per group is its best
        groups.entry(run.group_key()).or_insert_with(|| run.clone());
    }
    let mut best: Vec<ForecastRun> = groups.into_values().collect();
    best.sort_by(run_cmp);

    GridResult {
        total_cells: cells.len(),
        ranked,
        best,
    }
}
