//! Batch comparison of voting rules against the optimal α-values on sampled
//! profiles, with CSV output and per-row summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains;
use crate::error::{Error, Result};
use crate::instance::{Axiom, Instance};
use crate::optimize::{self, DEFAULT_COMMITTEE_BUDGET, DEFAULT_NODE_BUDGET};
use crate::rational::Rational;
use crate::rules::{self, Rule, RuleOptions};
use crate::sampling::{self, CandidateLayout, ModelKind, SamplerConfig, DEFAULT_SIGMA};
use crate::verify::{self, EjrEvaluator};

/// Rules compared in every experiment, in column order.
pub const EXPERIMENT_RULES: [Rule; 4] = [Rule::MesCompleted, Rule::SeqPhragmen, Rule::Cc, Rule::Pav];

/// Committees per rule that enter the mean.
pub const COMMITTEES_PER_RULE: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentGrid {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    /// Only pairs with `k < m` are used.
    pub k: Vec<usize>,
    /// IC approval probabilities.
    pub ic: Vec<f64>,
    /// Euclidean distance thresholds.
    pub euclidean: Vec<f64>,
    pub instances_per_cell: usize,
    pub sigma: f64,
    pub layout: CandidateLayout,
    pub committee_budget: u64,
    pub node_budget: u64,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        ExperimentGrid {
            n: vec![11, 12, 29, 59],
            m: vec![5, 9, 15],
            k: vec![3, 5, 8, 11],
            ic: vec![0.3, 0.5],
            euclidean: vec![1.7, 2.3],
            instances_per_cell: 100,
            sigma: DEFAULT_SIGMA,
            layout: CandidateLayout::Uniform,
            committee_budget: DEFAULT_COMMITTEE_BUDGET as u64,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// One `(k, m, n)` combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Row {
    pub k: usize,
    pub m: usize,
    pub n: usize,
}

/// A row under one model and parameter; replicates are drawn per cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub row: Row,
    pub model: ModelKind,
    pub param: f64,
}

impl ExperimentGrid {
    pub fn from_toml(text: &str) -> Result<Self> {
        let grid: ExperimentGrid =
            toml::from_str(text).map_err(|e| Error::syntax("config", e.message().to_string()))?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows().is_empty() {
            return Err(Error::validation("grid", "no (k, m, n) combination with k < m"));
        }
        if self.n.contains(&0) {
            return Err(Error::validation("n", "voter counts must be positive"));
        }
        if self.ic.is_empty() && self.euclidean.is_empty() {
            return Err(Error::validation("models", "no model parameters given"));
        }
        if self.instances_per_cell == 0 {
            return Err(Error::validation("instances_per_cell", "must be positive"));
        }
        Ok(())
    }

    /// Rows ordered by `k`, then `m`, then `n`.
    pub fn rows(&self) -> Vec<Row> {
        let mut rows = Vec::new();
        for &k in &self.k {
            for &m in self.m.iter().filter(|&&m| k >= 1 && k < m) {
                for &n in &self.n {
                    rows.push(Row { k, m, n });
                }
            }
        }
        rows
    }

    pub fn models(&self) -> Vec<(ModelKind, f64)> {
        let ic = self.ic.iter().map(|&p| (ModelKind::Ic, p));
        ic.chain(self.euclidean.iter().map(|&t| (ModelKind::Euclidean, t))).collect()
    }

    pub fn cells(&self) -> Vec<Cell> {
        let models = self.models();
        self.rows()
            .into_iter()
            .flat_map(|row| models.iter().map(move |&(model, param)| (row, model, param)))
            .enumerate()
            .map(|(index, (row, model, param))| Cell { index, row, model, param })
            .collect()
    }

    /// Replicates per cell after scaling, at least one.
    pub fn replicates(&self, scale: f64) -> usize {
        ((self.instances_per_cell as f64 * scale).round() as usize).max(1)
    }

    fn contains(&self, record: &ExperimentRecord) -> bool {
        let row = Row { k: record.k, m: record.m, n: record.n };
        self.rows().contains(&row) && self.models().contains(&(record.model, record.param))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleStats {
    pub rule: Rule,
    pub jr_mean: Option<Rational>,
    pub ejr_mean: Option<Rational>,
    pub committees: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub model: ModelKind,
    pub param: f64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub alpha_jr_opt: Option<Rational>,
    pub alpha_ejr_opt: Option<Rational>,
    /// One entry per [`EXPERIMENT_RULES`] member, same order.
    pub rules: Vec<RuleStats>,
    pub flags: Vec<String>,
}

impl ExperimentRecord {
    /// Rows with any missing value are left out of summaries.
    pub fn is_excluded(&self) -> bool {
        self.alpha_jr_opt.is_none()
            || self.alpha_ejr_opt.is_none()
            || self.rules.iter().any(|r| r.jr_mean.is_none() || r.ejr_mean.is_none())
    }

    pub fn row(&self) -> Row {
        Row { k: self.k, m: self.m, n: self.n }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    /// Multiplies `instances_per_cell`.
    pub scale: f64,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: 0, scale: 0.1, jobs: 0 }
    }
}

fn is_budget_error(e: &Error) -> bool {
    matches!(e, Error::InfeasibleScale { .. } | Error::BudgetExceeded { .. })
}

/// Keeps a value unless its computation ran out of budget, in which case
/// `flag` is recorded.
fn budgeted<T>(result: Result<T>, flag: &str, flags: &mut Vec<String>) -> Result<Option<T>> {
    match result {
        Ok(v) => Ok(Some(v)),
        Err(e) if is_budget_error(&e) => {
            flags.push(flag.to_string());
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn mean(values: impl Iterator<Item = Rational>) -> Option<Rational> {
    let values: Vec<Rational> = values.collect();
    let count = values.len();
    (count > 0).then(|| values.into_iter().sum::<Rational>() / Rational::from(count))
}

/// `α*_JR`, routed to the interval algorithms when the profile has that
/// structure.
fn optimal_jr(inst: &Instance, grid: &ExperimentGrid, flags: &mut Vec<String>) -> Result<Option<Rational>> {
    if let Some(order) = domains::recognize_vi(inst) {
        flags.push("jr_vi".into());
        return Ok(Some(domains::vi_optimal_alpha_jr(inst, &order)?.alpha_star));
    }
    if let Some(order) = domains::recognize_ci(inst) {
        flags.push("jr_ci".into());
        return Ok(Some(domains::ci_optimal_alpha_jr(inst, &order)?.alpha_star));
    }
    let out = optimize::optimal_alpha_jr_with_budget(inst, grid.node_budget);
    Ok(budgeted(out, "jr_budget", flags)?.map(|o| o.alpha_star))
}

/// Computes one record. Budget overruns become flags; a value above the
/// Droop ceiling `k/(k+1)` is reported as an invariant violation.
pub fn evaluate_instance(inst: &Instance, cell: &Cell, seed: u64, grid: &ExperimentGrid) -> Result<ExperimentRecord> {
    let k = inst.k();
    let mut flags = Vec::new();
    let alpha_jr_opt = optimal_jr(inst, grid, &mut flags)?;
    let ejr = optimize::optimal_alpha_ejr_with_budget(inst, grid.committee_budget as u128);
    let alpha_ejr_opt = budgeted(ejr, "ejr_budget", &mut flags)?.map(|o| o.alpha_star);
    if let Some(a) = &alpha_ejr_opt {
        if *a > Rational::ratio(k, k + 1) {
            return Err(Error::Invariant(format!("alpha*_EJR = {a} exceeds k/(k+1) for seed {seed}")));
        }
    }
    let evaluator = budgeted(EjrEvaluator::new(inst), "ejr_family_budget", &mut flags)?;
    let opts = RuleOptions { max_committees: COMMITTEES_PER_RULE, node_budget: grid.node_budget, ..Default::default() };
    let mut rules_out = Vec::with_capacity(EXPERIMENT_RULES.len());
    for rule in EXPERIMENT_RULES {
        let outcome = budgeted(rules::run_rule(inst, rule, &opts), &format!("{rule}_budget"), &mut flags)?;
        let committees = outcome.map(|o| o.committees).unwrap_or_default();
        let jr_mean = mean(committees.iter().map(|&w| verify::alpha_jr(inst, w).alpha));
        let ejr_mean = evaluator.as_ref().and_then(|ev| mean(committees.iter().map(|&w| ev.alpha(w))));
        rules_out.push(RuleStats { rule, jr_mean, ejr_mean, committees: committees.len() });
    }
    Ok(ExperimentRecord {
        model: cell.model,
        param: cell.param,
        n: inst.n(),
        m: inst.m(),
        k,
        seed,
        alpha_jr_opt,
        alpha_ejr_opt,
        rules: rules_out,
        flags,
    })
}

/// Samples and evaluates every replicate of every cell. Records come back
/// ordered by `(cell, replicate)` whatever the worker count.
pub fn run_grid(grid: &ExperimentGrid, opts: &RunOptions) -> Result<Vec<ExperimentRecord>> {
    grid.validate()?;
    if !(opts.scale > 0.0 && opts.scale <= 1.0) {
        return Err(Error::validation("scale", format!("{} is outside (0, 1]", opts.scale)));
    }
    let replicates = grid.replicates(opts.scale);
    let tasks: Vec<(Cell, usize)> =
        grid.cells().into_iter().flat_map(|c| (0..replicates).map(move |r| (c, r))).collect();
    let run = |&(cell, replicate): &(Cell, usize)| -> Result<ExperimentRecord> {
        let seed = sampling::instance_seed(opts.seed, cell.index, replicate);
        let cfg = SamplerConfig {
            model: cell.model.with_param(cell.param),
            n: cell.row.n,
            m: cell.row.m,
            k: cell.row.k,
            sigma: grid.sigma,
            layout: grid.layout,
            seed,
        };
        evaluate_instance(&sampling::sample(&cfg)?, &cell, seed, grid)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?;
    pool.install(|| tasks.par_iter().map(run).collect())
}

pub fn csv_header() -> Vec<String> {
    let mut header: Vec<String> = ["model", "param", "n", "m", "k", "seed"].map(String::from).to_vec();
    for name in ["alpha_jr_opt", "alpha_ejr_opt"] {
        header.push(name.into());
        header.push(format!("{name}_f"));
    }
    for rule in EXPERIMENT_RULES {
        for axiom in ["jr", "ejr"] {
            header.push(format!("{rule}_{axiom}_mean"));
            header.push(format!("{rule}_{axiom}_mean_f"));
        }
        header.push(format!("{rule}_committees"));
    }
    header.push("flags".into());
    header
}

fn push_rational(fields: &mut Vec<String>, value: &Option<Rational>) {
    match value {
        Some(r) => {
            fields.push(r.to_string());
            fields.push(format!("{:.6}", r.to_f64()));
        }
        None => fields.extend([String::new(), String::new()]),
    }
}

pub fn write_csv(records: &[ExperimentRecord], out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(csv_header())?;
    for r in records {
        let mut fields = vec![
            r.model.to_string(),
            r.param.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
        ];
        push_rational(&mut fields, &r.alpha_jr_opt);
        push_rational(&mut fields, &r.alpha_ejr_opt);
        for s in &r.rules {
            push_rational(&mut fields, &s.jr_mean);
            push_rational(&mut fields, &s.ejr_mean);
            fields.push(s.committees.to_string());
        }
        fields.push(r.flags.join(";"));
        writer.write_record(&fields)?;
    }
    writer.flush()?;
    Ok(())
}

/// Parses a CSV produced by [`write_csv`]. The exact `p/q` columns are
/// authoritative; float columns are ignored.
pub fn read_csv(input: impl Read) -> Result<Vec<ExperimentRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    if header != csv_header() {
        return Err(Error::validation("header", "CSV header does not match the experiment schema"));
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let field = |j: usize| row.get(j).unwrap_or("");
        let bad = |name: &str| Error::syntax(format!("line {line}"), format!("bad {name} field"));
        let int = |j: usize, name: &str| field(j).parse::<usize>().map_err(|_| bad(name));
        let rational = |j: usize| -> Result<Option<Rational>> {
            match field(j) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(&header[j])),
            }
        };
        let mut rules_out = Vec::new();
        for (r, rule) in EXPERIMENT_RULES.into_iter().enumerate() {
            let base = 10 + 5 * r;
            rules_out.push(RuleStats {
                rule,
                jr_mean: rational(base)?,
                ejr_mean: rational(base + 2)?,
                committees: int(base + 4, "committees")?,
            });
        }
        let flags = field(header.len() - 1);
        records.push(ExperimentRecord {
            model: field(0).parse().map_err(|_| bad("model"))?,
            param: field(1).parse().map_err(|_| bad("param"))?,
            n: int(2, "n")?,
            m: int(3, "m")?,
            k: int(4, "k")?,
            seed: field(5).parse().map_err(|_| bad("seed"))?,
            alpha_jr_opt: rational(6)?,
            alpha_ejr_opt: rational(8)?,
            rules: rules_out,
            flags: if flags.is_empty() { Vec::new() } else { flags.split(';').map(String::from).collect() },
        });
    }
    Ok(records)
}

/// Mean additive distance between a rule's α and the optimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleDistance {
    pub rule: Rule,
    pub jr: Rational,
    pub ejr: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowSummary {
    pub row: Row,
    pub instances: usize,
    pub excluded: usize,
    pub distances: Vec<RuleDistance>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub rows: Vec<RowSummary>,
    /// Over every included record of every row.
    pub pooled: Vec<RuleDistance>,
    pub excluded: usize,
}

fn mean_distances<'a>(records: impl Iterator<Item = &'a ExperimentRecord> + Clone) -> Vec<RuleDistance> {
    EXPERIMENT_RULES
        .iter()
        .enumerate()
        .map(|(i, &rule)| {
            let dist = |axiom: Axiom| {
                mean(records.clone().map(|r| {
                    let (opt, got) = match axiom {
                        Axiom::Jr => (&r.alpha_jr_opt, &r.rules[i].jr_mean),
                        _ => (&r.alpha_ejr_opt, &r.rules[i].ejr_mean),
                    };
                    got.clone().expect("excluded records are filtered") - opt.clone().expect("excluded records are filtered")
                }))
                .unwrap_or_else(Rational::zero)
            };
            RuleDistance { rule, jr: dist(Axiom::Jr), ejr: dist(Axiom::Ejr) }
        })
        .collect()
}

/// Per-row mean distances, pooling models and parameters. Records must all
/// come from `grid` with the same number of replicates per cell.
pub fn summarize(grid: &ExperimentGrid, records: &[ExperimentRecord]) -> Result<Summary> {
    let mut per_cell: BTreeMap<(Row, ModelKind, u64), usize> = BTreeMap::new();
    for r in records {
        if !grid.contains(r) {
            return Err(Error::validation(
                "records",
                format!("record (k={}, m={}, n={}, {} {}) is not part of the grid", r.k, r.m, r.n, r.model, r.param),
            ));
        }
        *per_cell.entry((r.row(), r.model, r.param.to_bits())).or_default() += 1;
    }
    let mut counts = per_cell.values();
    if let Some(first) = counts.next() {
        if counts.any(|c| c != first) || per_cell.len() != grid.cells().len() {
            return Err(Error::validation("records", "records mix runs with different replicate counts"));
        }
    }
    let included = || records.iter().filter(|r| !r.is_excluded());
    let rows = grid
        .rows()
        .into_iter()
        .map(|row| {
            let in_row = records.iter().filter(|r| r.row() == row);
            let kept = in_row.clone().filter(|r| !r.is_excluded());
            RowSummary {
                row,
                instances: kept.clone().count(),
                excluded: in_row.filter(|r| r.is_excluded()).count(),
                distances: mean_distances(kept),
            }
        })
        .collect();
    Ok(Summary {
        rows,
        pooled: mean_distances(included()),
        excluded: records.iter().filter(|r| r.is_excluded()).count(),
    })
}

impl Summary {
    /// Fixed-width table of per-row EJR and JR distances.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:>3} {:>3} {:>3} {:>5} {:>5}", "k", "m", "n", "count", "excl");
        for axiom in ["ejr", "jr"] {
            for rule in EXPERIMENT_RULES {
                let _ = write!(out, " {:>16}", format!("{rule}_{axiom}"));
            }
        }
        out.push('\n');
        let line = |out: &mut String, label: String, distances: &[RuleDistance]| {
            out.push_str(&label);
            for d in distances {
                let _ = write!(out, " {:>16.6}", d.ejr.to_f64());
            }
            for d in distances {
                let _ = write!(out, " {:>16.6}", d.jr.to_f64());
            }
            out.push('\n');
        };
        for r in &self.rows {
            let label = format!("{:>3} {:>3} {:>3} {:>5} {:>5}", r.row.k, r.row.m, r.row.n, r.instances, r.excluded);
            line(&mut out, label, &r.distances);
        }
        let total: usize = self.rows.iter().map(|r| r.instances).sum();
        line(&mut out, format!("{:>11} {:>5} {:>5}", "all", total, self.excluded), &self.pooled);
        out
    }
}

/// Counts of `α*` values in `bins` equal-width bins over `[0, 1]`; the
/// value 1 falls in the last bin.
pub fn histogram(records: &[ExperimentRecord], axiom: Axiom, model: Option<ModelKind>, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    for r in records.iter().filter(|r| model.is_none_or(|m| r.model == m)) {
        let value = match axiom {
            Axiom::Jr => &r.alpha_jr_opt,
            _ => &r.alpha_ejr_opt,
        };
        if let Some(v) = value {
            let bin = ((v.to_f64() * bins as f64) as usize).min(bins - 1);
            counts[bin] += 1;
        }
    }
    counts
}

/// Sorted values per series, the optimum first, for empirical CDFs.
pub fn ecdf(records: &[ExperimentRecord], axiom: Axiom, model: Option<ModelKind>) -> Vec<(String, Vec<f64>)> {
    let kept: Vec<&ExperimentRecord> =
        records.iter().filter(|r| !r.is_excluded() && model.is_none_or(|m| r.model == m)).collect();
    let sorted = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v
    };
    let pick = |r: &ExperimentRecord, i: Option<usize>| {
        let value = match (axiom, i) {
            (Axiom::Jr, None) => &r.alpha_jr_opt,
            (_, None) => &r.alpha_ejr_opt,
            (Axiom::Jr, Some(i)) => &r.rules[i].jr_mean,
            (_, Some(i)) => &r.rules[i].ejr_mean,
        };
        value.as_ref().map_or(f64::NAN, Rational::to_f64)
    };
    let mut series = vec![("optimum".to_string(), sorted(kept.iter().map(|r| pick(r, None)).collect()))];
    for (i, rule) in EXPERIMENT_RULES.iter().enumerate() {
        series.push((rule.to_string(), sorted(kept.iter().map(|r| pick(r, Some(i))).collect())));
    }
    series
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_grid() -> ExperimentGrid {
        ExperimentGrid {
            n: vec![7, 9],
            m: vec![5],
            k: vec![2, 3],
            instances_per_cell: 3,
            ..Default::default()
        }
    }

    #[test]
    fn default_grid_has_32_rows() {
        let grid = ExperimentGrid::default();
        assert_eq!(grid.rows().len(), 32);
        assert_eq!(grid.cells().len(), 128);
        assert_eq!(grid.replicates(1.0) * grid.cells().len() / 2, 6400);
        assert_eq!(grid.replicates(0.1), 10);
    }

    #[test]
    fn parses_partial_toml() {
        let grid = ExperimentGrid::from_toml("n = [11]\ninstances_per_cell = 4\n").unwrap();
        assert_eq!(grid.n, vec![11]);
        assert_eq!(grid.k, vec![3, 5, 8, 11]);
        assert!(ExperimentGrid::from_toml("bogus = 1").is_err());
        assert!(ExperimentGrid::from_toml("k = [9]\nm = [5]").is_err());
    }

    #[test]
    fn csv_round_trip_and_summary() {
        let grid = tiny_grid();
        let records = run_grid(&grid, &RunOptions { seed: 5, scale: 1.0, jobs: 2 }).unwrap();
        assert_eq!(records.len(), 4 * 4 * 3);
        let mut bytes = Vec::new();
        write_csv(&records, &mut bytes).unwrap();
        let back = read_csv(bytes.as_slice()).unwrap();
        assert_eq!(back, records);
        assert_eq!(summarize(&grid, &back).unwrap(), summarize(&grid, &records).unwrap());
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let grid = tiny_grid();
        let one = run_grid(&grid, &RunOptions { seed: 9, scale: 1.0, jobs: 1 }).unwrap();
        let four = run_grid(&grid, &RunOptions { seed: 9, scale: 1.0, jobs: 4 }).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn summary_rejects_foreign_records() {
        let grid = tiny_grid();
        let records = run_grid(&grid, &RunOptions { seed: 1, scale: 1.0, jobs: 0 }).unwrap();
        let other = ExperimentGrid { n: vec![7], ..tiny_grid() };
        assert!(summarize(&other, &records).is_err());
        assert!(summarize(&grid, &records[1..]).is_err());
    }

    #[test]
    fn histogram_counts_every_value() {
        let grid = tiny_grid();
        let records = run_grid(&grid, &RunOptions { seed: 2, scale: 1.0, jobs: 0 }).unwrap();
        let h = histogram(&records, Axiom::Jr, None, 20);
        assert_eq!(h.iter().sum::<usize>(), records.len());
        let series = ecdf(&records, Axiom::Ejr, Some(ModelKind::Ic));
        assert_eq!(series.len(), 5);
        assert_eq!(series[0].0, "optimum");
    }
}
