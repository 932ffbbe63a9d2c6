use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use alphaquota::domains::{self, OrderKind, PartyListViolation};
use alphaquota::experiments::{self, ExperimentGrid, RunOptions};
use alphaquota::optimize::{self, OptimizationOutcome, DEFAULT_COMMITTEE_BUDGET, DEFAULT_NODE_BUDGET};
use alphaquota::rules::{self, RuleOptions};
use alphaquota::sampling::{self, Model, ModelKind, SamplerConfig};
use alphaquota::{verify, Axiom, Format, Instance, Rule};
use serde_json::json;

use crate::render::{self, alpha_json, print_json};
use crate::{Cli, Command, DomainArg, EvalArgs, ExperimentArgs, ExportArgs, InstanceArg, MethodArg, OptArgs, RuleArgs, SampleArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] alphaquota::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_domain_error() => 1,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Eval(args) => eval(cli, args),
        Command::Opt(args) => opt(cli, args),
        Command::Rule(args) => rule(cli, args),
        Command::Domain(args) => domain(cli, args),
        Command::Sample(args) => sample(cli, args),
        Command::Experiment(args) => experiment(cli, args),
        Command::ExportIlp(args) => export_ilp(cli, args),
    }
}

fn load(input: &InstanceArg) -> Result<Instance> {
    let text = fs::read_to_string(&input.instance).map_err(io_error(&input.instance))?;
    let format = input.format.unwrap_or_else(|| {
        let ext = input.instance.extension().and_then(|e| e.to_str()).unwrap_or("");
        match ext {
            "json" => Format::Json,
            "txt" | "plain" => Format::Plain,
            _ if text.trim_start().starts_with('{') => Format::Json,
            _ => Format::Plain,
        }
    });
    Ok(Instance::parse(&text, format)?)
}

fn eval(cli: &Cli, args: &EvalArgs) -> Result<()> {
    let inst = load(&args.input)?;
    args.committee.check_for(&inst)?;
    let result = verify::alpha_value(&inst, args.committee, args.axiom)?;
    if cli.json {
        print_json(&json!({
            "axiom": args.axiom,
            "committee": args.committee,
            "alpha": alpha_json(&result.alpha),
            "witness": result.witness,
        }));
    } else {
        println!("alpha_{} = {}", args.axiom.name(), render::alpha(&result.alpha));
        match &result.witness {
            Some(w) => println!("witness: {}", render::witness(w, cli.one_indexed)),
            None => println!("witness: none"),
        }
    }
    Ok(())
}

fn generic_opt(inst: &Instance, axiom: Axiom, method: MethodArg, budget: Option<u64>) -> Result<OptimizationOutcome> {
    let committees = budget.map_or(DEFAULT_COMMITTEE_BUDGET, u128::from);
    Ok(match (axiom, method) {
        (Axiom::Jr, MethodArg::Brute) => optimize::optimal_alpha_jr_brute(inst, committees)?,
        (Axiom::Jr, _) => optimize::optimal_alpha_jr_with_budget(inst, budget.unwrap_or(DEFAULT_NODE_BUDGET))?,
        (_, MethodArg::Bnb) => {
            return Err(CliError::Usage("--method bnb is only available for --axiom jr".into()));
        }
        (Axiom::Ejr, _) => optimize::optimal_alpha_ejr_with_budget(inst, committees)?,
        (Axiom::EjrPlus, _) => optimize::optimal_alpha_ejr_plus_with_budget(inst, committees)?,
    })
}

fn party_opt(inst: &Instance, axiom: Axiom) -> Result<OptimizationOutcome> {
    if axiom == Axiom::Jr {
        return Err(CliError::Usage("party-list routing optimizes ejr or ejrplus".into()));
    }
    let structure = domains::detect_party_list(inst)
        .map_err(|v| alphaquota::Error::Precondition(format!("not a party-list profile: {v}")))?;
    // EJR and EJR+ coincide on party lists
    let mut out = domains::party_list_optimal_ejr(inst, &structure)?;
    out.axiom = axiom;
    Ok(out)
}

fn interval_opt(
    inst: &Instance,
    axiom: Axiom,
    kind: OrderKind,
    order: Option<&Vec<usize>>,
    budget: Option<u64>,
) -> Result<OptimizationOutcome> {
    let order = match order {
        Some(o) => o.clone(),
        None => match kind {
            OrderKind::Vi => domains::recognize_vi(inst),
            OrderKind::Ci => domains::recognize_ci(inst),
        }
        .ok_or_else(|| alphaquota::Error::Precondition(format!("profile has no {kind} order")))?,
    };
    Ok(match (axiom, kind) {
        (Axiom::Jr, OrderKind::Vi) => domains::vi_optimal_alpha_jr(inst, &order)?,
        (Axiom::Jr, OrderKind::Ci) => domains::ci_optimal_alpha_jr(inst, &order)?,
        (Axiom::Ejr, _) => {
            let budget = budget.map_or(DEFAULT_COMMITTEE_BUDGET, u128::from);
            domains::interval_optimal_alpha_ejr(inst, &order, kind, budget)?
        }
        (Axiom::EjrPlus, _) => {
            return Err(CliError::Usage(format!("{kind} routing optimizes jr or ejr")));
        }
    })
}

fn auto_opt(inst: &Instance, axiom: Axiom, budget: Option<u64>) -> Result<(OptimizationOutcome, &'static str)> {
    if axiom != Axiom::Jr && domains::detect_party_list(inst).is_ok() {
        return Ok((party_opt(inst, axiom)?, "partylist"));
    }
    if axiom != Axiom::EjrPlus {
        if domains::recognize_vi(inst).is_some() {
            return Ok((interval_opt(inst, axiom, OrderKind::Vi, None, budget)?, "vi"));
        }
        if domains::recognize_ci(inst).is_some() {
            return Ok((interval_opt(inst, axiom, OrderKind::Ci, None, budget)?, "ci"));
        }
    }
    Ok((generic_opt(inst, axiom, MethodArg::Auto, budget)?, "none"))
}

fn opt(cli: &Cli, args: &OptArgs) -> Result<()> {
    let inst = load(&args.input)?;
    let domain = args.domain.unwrap_or(DomainArg::None);
    if args.order.is_some() && !matches!(domain, DomainArg::Vi | DomainArg::Ci) {
        return Err(CliError::Usage("--order needs --domain vi or --domain ci".into()));
    }
    let (out, route) = match domain {
        DomainArg::None => (generic_opt(&inst, args.axiom, args.method.unwrap_or(MethodArg::Auto), args.budget)?, "none"),
        DomainArg::Auto => auto_opt(&inst, args.axiom, args.budget)?,
        DomainArg::Partylist => (party_opt(&inst, args.axiom)?, "partylist"),
        DomainArg::Vi => (interval_opt(&inst, args.axiom, OrderKind::Vi, args.order.as_ref(), args.budget)?, "vi"),
        DomainArg::Ci => (interval_opt(&inst, args.axiom, OrderKind::Ci, args.order.as_ref(), args.budget)?, "ci"),
    };
    if cli.json {
        print_json(&json!({
            "axiom": out.axiom,
            "alpha_star": alpha_json(&out.alpha_star),
            "committee": out.committee,
            "method": out.method,
            "domain": route,
            "explored": out.explored,
        }));
    } else {
        println!("alpha*_{} = {}", out.axiom.name(), render::alpha(&out.alpha_star));
        println!("committee: {}", render::committee(out.committee, cli.one_indexed));
        println!("method: {} (domain {route}, explored {})", out.method, out.explored);
    }
    Ok(())
}

fn rule(cli: &Cli, args: &RuleArgs) -> Result<()> {
    let inst = load(&args.input)?;
    if args.max_committees == 0 {
        return Err(CliError::Usage("--max-committees must be at least 1".into()));
    }
    let opts = RuleOptions {
        max_committees: args.max_committees,
        adversarial: args.adversarial,
        trace: args.trace,
        frontier_cap: args.frontier_cap.max(1),
        ..Default::default()
    };
    let out = rules::run_rule(&inst, args.rule, &opts)?;
    let jr: Vec<_> = out.committees.iter().map(|&w| verify::alpha_jr(&inst, w).alpha).collect();
    if cli.json {
        print_json(&json!({
            "rule": out.rule,
            "committees": out.committees,
            "alpha_jr": jr.iter().map(alpha_json).collect::<Vec<_>>(),
            "parameter": out.parameter.as_ref().map(alpha_json),
            "trace": out.trace,
            "notes": out.notes,
        }));
        return Ok(());
    }
    println!("rule: {}", out.rule);
    if let Some(p) = &out.parameter {
        let label = match out.rule {
            Rule::Cc | Rule::Pav => "optimal score",
            Rule::AlphaMes => "budget per voter",
            _ => "alpha",
        };
        println!("{label}: {}", render::alpha(p));
    }
    for (i, (&w, a)) in out.committees.iter().zip(&jr).enumerate() {
        println!("committee {}: {}  alpha_jr = {}", i + 1, render::committee(w, cli.one_indexed), render::alpha(a));
    }
    if args.trace && out.trace.is_empty() {
        println!("trace: not recorded for {}", out.rule);
    } else if args.trace {
        println!("trace:");
        for (i, step) in out.trace.iter().enumerate() {
            let c = step.candidate + usize::from(cli.one_indexed);
            println!("  {}: c{c} ({} {})", i + 1, step.metric, render::alpha(&step.value));
        }
    }
    for note in &out.notes {
        println!("note: {note}");
    }
    Ok(())
}

fn domain(cli: &Cli, args: &InstanceArg) -> Result<()> {
    let inst = load(args)?;
    let report = domains::detect(&inst);
    if cli.json {
        print_json(&serde_json::to_value(&report).expect("report serializes"));
        return Ok(());
    }
    let shift = usize::from(cli.one_indexed);
    match &report.party_list {
        Ok(s) => println!(
            "party-list: yes, {} parties, sizes {}",
            s.parties.len(),
            s.sizes().iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        ),
        Err(PartyListViolation::Overlap { voters: (a, b) }) => {
            println!("party-list: no (ballots of voters {} and {} overlap but differ)", a + shift, b + shift)
        }
        Err(PartyListViolation::ShortBallot { voter, size }) => {
            println!("party-list: no (voter {} approves {size} < k candidates)", voter + shift)
        }
    }
    let show = |name: &str, order: &Option<Vec<usize>>| match order {
        Some(o) => println!("{name}: yes, order {}", render::indices(o.iter().copied(), cli.one_indexed)),
        None => println!("{name}: no"),
    };
    show("voter-interval", &report.voter_interval);
    show("candidate-interval", &report.candidate_interval);
    Ok(())
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(io_error(p)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(io_error(Path::new("<stdout>")))
        }
    }
}

fn sample(cli: &Cli, args: &SampleArgs) -> Result<()> {
    let model = match (args.model, args.p, args.t) {
        (ModelKind::Ic, Some(p), None) => Model::Ic { p },
        (ModelKind::Euclidean, None, Some(t)) => Model::Euclidean { t },
        (ModelKind::Ic, _, _) => return Err(CliError::Usage("--model ic needs --p and no --t".into())),
        (ModelKind::Euclidean, _, _) => return Err(CliError::Usage("--model euclidean needs --t and no --p".into())),
    };
    let cfg = SamplerConfig {
        model,
        n: args.n,
        m: args.m,
        k: args.k,
        sigma: args.sigma,
        layout: args.layout,
        seed: args.seed,
    };
    let inst = sampling::sample(&cfg)?;
    let format = if cli.json && args.out.is_none() { Format::Json } else { args.format };
    let mut text = inst.serialize(format);
    if !text.ends_with('\n') {
        text.push('\n');
    }
    write_output(args.out.as_ref(), &text)?;
    if let Some(path) = &args.out {
        if cli.json {
            print_json(&json!({ "path": path, "n": inst.n(), "m": inst.m(), "k": inst.k(), "seed": args.seed }));
        } else {
            println!("wrote {} ({} voters, {} candidates, k = {})", path.display(), inst.n(), inst.m(), inst.k());
        }
    }
    Ok(())
}

fn experiment(cli: &Cli, args: &ExperimentArgs) -> Result<()> {
    let grid = match &args.config {
        Some(path) => ExperimentGrid::from_toml(&fs::read_to_string(path).map_err(io_error(path))?)?,
        None => ExperimentGrid::default(),
    };
    let opts = RunOptions { seed: args.seed, scale: args.scale, jobs: args.jobs };
    let records = experiments::run_grid(&grid, &opts)?;
    let file = fs::File::create(&args.out).map_err(io_error(&args.out))?;
    experiments::write_csv(&records, std::io::BufWriter::new(file))?;
    let summary = experiments::summarize(&grid, &records)?;
    if cli.json {
        print_json(&json!({ "path": args.out, "records": records.len(), "summary": summary }));
    } else {
        println!("wrote {} records to {}", records.len(), args.out.display());
        println!("mean distance to the optimum (rule minus optimal alpha):");
        print!("{}", summary.to_table());
    }
    Ok(())
}

fn export_ilp(cli: &Cli, args: &ExportArgs) -> Result<()> {
    let inst = load(&args.input)?;
    let mut lp = Vec::new();
    optimize::export_lp(&inst, &args.alpha, &mut lp)?;
    let text = String::from_utf8(lp).expect("LP text is ASCII");
    write_output(args.out.as_ref(), &text)?;
    if let Some(path) = &args.out {
        if cli.json {
            print_json(&json!({ "path": path, "alpha": alpha_json(&args.alpha), "variables": inst.m() + inst.n() }));
        } else {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
