use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use plq_core::arith::{check_certificate, emit_etr, parse_certificate, Budget, CertVerdict};
use plq_core::canonical::{canonicalize, to_poly};
use plq_core::decide::{
    al_entails_with, al_sat_with, leaf_systems, parse_verdicts, pl_entails_with, pl_sat_with,
    EntailVerdict, ExternalVerdicts, SatVerdict,
};
use plq_core::poly::Poly;
use plq_core::proofs::{audit_corrupted_lolli2, audit_rules, check_proof, parse_proof};
use plq_core::reduction::{trace_reduction, Logic, Mode, MoveSet};
use plq_core::semantics::{eval, parse_model, satisfies};
use plq_core::syntax::{collapse, parse_formula, parse_judgement, parse_problem, Judgement, Problem};

const OK: u8 = 0;
const NEGATIVE: u8 = 1;
const UNKNOWN: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "plq", version, about = "Affine and polynomial Lawvere logic toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a formula or problem in fully parenthesised primitive syntax.
    Parse(Source),
    /// Evaluate a formula, or check a judgement, in a model.
    Eval {
        /// Model file with `name = value` lines.
        model: PathBuf,
        /// Formula or judgement text.
        expr: String,
    },
    /// Print the canonical form of each formula.
    Canon(Source),
    /// Decide satisfiability of a hypothesis set.
    Sat(DecideArgs),
    /// Decide semantic consequence of the goal line.
    Entails(DecideArgs),
    /// Check a proof script.
    CheckProof {
        proof: PathBuf,
        /// Problem file whose judgements may be cited with `hyp`.
        #[arg(long)]
        hyps: Option<PathBuf>,
    },
    /// Sample random instances of every rule and report counterexamples.
    AuditRules {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        models: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write one SMT-LIB file per reduction leaf.
    EmitEtr {
        problem: PathBuf,
        #[arg(long)]
        emit_dir: PathBuf,
        #[arg(long, value_enum)]
        logic: Option<LogicArg>,
        #[arg(long, value_enum, default_value_t = MovesArg::Efficient)]
        moves: MovesArg,
    },
    /// Verify a Positivstellensatz certificate for a polynomial-form problem.
    VerifyCert { problem: PathBuf, certificate: PathBuf },
}

#[derive(Args)]
struct Source {
    /// Input file.
    file: Option<PathBuf>,
    /// Inline formula.
    #[arg(short = 'e', long = "expr", conflicts_with = "file")]
    expr: Option<String>,
}

#[derive(Args)]
struct DecideArgs {
    problem: PathBuf,
    #[arg(long, value_enum)]
    logic: Option<LogicArg>,
    #[arg(long, value_enum, default_value_t = MovesArg::Efficient)]
    moves: MovesArg,
    /// Search effort for polynomial leaves.
    #[arg(long)]
    budget: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for per-leaf SMT-LIB files and a manifest.
    #[arg(long)]
    emit_dir: Option<PathBuf>,
    /// File of `<leaf-id> sat|unsat` answers.
    #[arg(long)]
    verdicts: Option<PathBuf>,
    /// Print the reduction trace before the verdict.
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogicArg {
    Al,
    Pl,
}

#[derive(Clone, Copy, ValueEnum)]
enum MovesArg {
    Naive,
    Efficient,
}

impl From<MovesArg> for MoveSet {
    fn from(m: MovesArg) -> Self {
        match m {
            MovesArg::Naive => MoveSet::Naive,
            MovesArg::Efficient => MoveSet::Efficient,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: USAGE,
        message: message.into(),
    }
}

type Outcome = Result<(u8, String), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_err(path: &str, e: impl std::fmt::Display) -> Failure {
    usage(format!("{path}: {e}"))
}

fn source_text(src: &Source) -> Result<(String, String), Failure> {
    match (&src.file, &src.expr) {
        (Some(f), None) => Ok((f.display().to_string(), read(f)?)),
        (None, Some(e)) => Ok(("<expr>".to_string(), e.clone())),
        _ => Err(usage("give either a file or -e <formula>")),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
}

fn run_parse(src: &Source) -> Outcome {
    let (name, text) = source_text(src)?;
    if src.expr.is_some() {
        let out = if text.contains("|-") {
            parse_judgement(&text).map_err(|e| parse_err(&name, e))?.to_string()
        } else {
            parse_formula(&text).map_err(|e| parse_err(&name, e))?.to_string()
        };
        return Ok((OK, out + "\n"));
    }
    let problem = parse_problem(&text).map_err(|e| parse_err(&name, e))?;
    Ok((OK, problem.to_string()))
}

fn run_eval(model: &Path, expr: &str) -> Outcome {
    let m = parse_model(&read(model)?).map_err(|e| parse_err(&model.display().to_string(), e))?;
    if expr.contains("|-") {
        let j = parse_judgement(expr).map_err(|e| parse_err("<expr>", e))?;
        let ok = satisfies(&m, &j).map_err(|e| usage(e.to_string()))?;
        Ok(if ok {
            (OK, "satisfied\n".to_string())
        } else {
            (NEGATIVE, "violated\n".to_string())
        })
    } else {
        let f = parse_formula(expr).map_err(|e| parse_err("<expr>", e))?;
        let v = eval(&m, &f).map_err(|e| usage(e.to_string()))?;
        Ok((OK, format!("{v}\n")))
    }
}

fn run_canon(src: &Source) -> Outcome {
    let (name, text) = source_text(src)?;
    let mut out = String::new();
    let lines: Vec<&str> = if src.expr.is_some() {
        vec![text.as_str()]
    } else {
        content_lines(&text).collect()
    };
    for line in lines {
        let f = parse_formula(line).map_err(|e| parse_err(&name, e))?;
        writeln!(out, "{}", canonicalize(&f)).expect("write to string");
    }
    Ok((OK, out))
}

fn load_problem(path: &Path) -> Result<Problem, Failure> {
    parse_problem(&read(path)?).map_err(|e| parse_err(&path.display().to_string(), e))
}

fn choose_logic(arg: Option<LogicArg>, problem: &Problem) -> Result<Logic, Failure> {
    match arg {
        Some(LogicArg::Pl) => Ok(Logic::Pl),
        Some(LogicArg::Al) if problem.contains_mult() => {
            Err(usage("--logic al given but the problem uses multiplication"))
        }
        Some(LogicArg::Al) => Ok(Logic::Al),
        None if problem.contains_mult() => Ok(Logic::Pl),
        None => Ok(Logic::Al),
    }
}

fn write_leaves(problem: &Problem, logic: Logic, moves: MoveSet, dir: &Path) -> Result<String, Failure> {
    let leaves = leaf_systems(problem, logic, moves).map_err(|e| usage(e.to_string()))?;
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let mut manifest = String::new();
    for (id, _, sys) in &leaves {
        let name = format!("{id}.smt2");
        let path = dir.join(&name);
        fs::write(&path, emit_etr(sys)).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        writeln!(manifest, "{id}\t{name}").expect("write to string");
    }
    let path = dir.join("manifest.tsv");
    fs::write(&path, &manifest).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(format!("emitted {} leaf file(s) to {}\n", leaves.len(), dir.display()))
}

fn run_decide(args: &DecideArgs, entails: bool) -> Outcome {
    let problem = load_problem(&args.problem)?;
    match (&problem.goal, entails) {
        (None, true) => return Err(usage("entails needs a `goal:` line")),
        (Some(_), false) => return Err(usage("sat takes no `goal:` line; use entails")),
        _ => {}
    }
    let logic = choose_logic(args.logic, &problem)?;
    if logic == Logic::Al && (args.budget.is_some() || args.verdicts.is_some()) {
        return Err(usage("--budget and --verdicts apply to polynomial problems only"));
    }
    let moves = MoveSet::from(args.moves);
    let verdicts: Option<ExternalVerdicts> = match &args.verdicts {
        Some(p) => Some(parse_verdicts(&read(p)?).map_err(|e| parse_err(&p.display().to_string(), e))?),
        None => None,
    };
    let budget = match args.budget {
        Some(level) => Budget::with_level(level, args.seed),
        None => Budget {
            seed: args.seed,
            ..Budget::default()
        },
    };
    let mut out = String::new();
    if args.trace {
        let (_, lines) = trace_reduction(&problem, Mode::decision(logic, moves)).map_err(|e| usage(e.to_string()))?;
        for l in lines {
            writeln!(out, "{l}").expect("write to string");
        }
    }
    if let Some(dir) = &args.emit_dir {
        if logic == Logic::Al {
            return Err(usage("--emit-dir applies to polynomial problems only; use emit-etr"));
        }
        out.push_str(&write_leaves(&problem, logic, moves, dir)?);
    }
    let hyps = &problem.hypotheses;
    let code = if let Some(goal) = &problem.goal {
        let v = match logic {
            Logic::Al => al_entails_with(hyps, goal, moves),
            Logic::Pl => pl_entails_with(hyps, goal, &budget, verdicts.as_ref(), moves),
        }
        .map_err(|e| usage(e.to_string()))?;
        out.push_str(&v.to_string());
        match v {
            EntailVerdict::Entailed => OK,
            EntailVerdict::Countermodel(_) => NEGATIVE,
            EntailVerdict::Unknown => UNKNOWN,
        }
    } else {
        let v = match logic {
            Logic::Al => al_sat_with(hyps, moves),
            Logic::Pl => pl_sat_with(hyps, &budget, verdicts.as_ref(), moves),
        }
        .map_err(|e| usage(e.to_string()))?;
        out.push_str(&v.to_string());
        match v {
            SatVerdict::Sat(_) => OK,
            SatVerdict::Unsat => NEGATIVE,
            SatVerdict::Unknown => UNKNOWN,
        }
    };
    Ok((code, out))
}

fn run_check_proof(proof: &Path, hyps: Option<&Path>) -> Outcome {
    let script = parse_proof(&read(proof)?).map_err(|e| parse_err(&proof.display().to_string(), e))?;
    let hypotheses = match hyps {
        Some(p) => load_problem(p)?.hypotheses,
        None => Vec::new(),
    };
    Ok(match check_proof(&script, &hypotheses) {
        Ok(()) => (OK, format!("ok: {} line(s) checked\n", script.lines.len())),
        Err(f) => (
            NEGATIVE,
            format!("line {}: {}: {}\n", f.line, f.error.class(), f.error),
        ),
    })
}

fn run_audit(samples: usize, models: usize, seed: u64) -> Outcome {
    let report = audit_rules(samples, models, seed);
    let control = audit_corrupted_lolli2(samples, models, seed);
    let mut out = report.to_string();
    writeln!(
        out,
        "control {}: violations={}",
        control.target.name(),
        control.violations
    )
    .expect("write to string");
    let code = if report.total_violations() == 0 { OK } else { NEGATIVE };
    Ok((code, out))
}

fn run_emit(problem: &Path, dir: &Path, logic: Option<LogicArg>, moves: MovesArg) -> Outcome {
    let problem = load_problem(problem)?;
    let logic = choose_logic(logic, &problem)?;
    Ok((OK, write_leaves(&problem, logic, moves.into(), dir)?))
}

fn side_polys(j: &Judgement, vars: &[plq_core::PropLetter]) -> Result<(Poly, Poly), Failure> {
    let c = collapse(j);
    let conv = |f| to_poly(f, vars).map_err(|e| usage(format!("`{j}`: {e}")));
    Ok((conv(&c.antecedents[0])?, conv(&c.consequent)?))
}

fn run_verify(problem: &Path, cert: &Path) -> Outcome {
    let problem = load_problem(problem)?;
    let goal = problem
        .goal
        .as_ref()
        .ok_or_else(|| usage("the problem needs a `goal:` line"))?;
    let vars = problem.letters();
    let hyps = problem
        .hypotheses
        .iter()
        .map(|j| side_polys(j, &vars))
        .collect::<Result<Vec<_>, _>>()?;
    let goal = side_polys(goal, &vars)?;
    let cert = parse_certificate(&read(cert)?, &vars).map_err(|e| parse_err(&cert.display().to_string(), e))?;
    match check_certificate(&hyps, &goal, &cert).map_err(|e| usage(e.to_string()))? {
        CertVerdict::Valid => Ok((OK, "valid\n".to_string())),
        CertVerdict::Invalid(reason) => Ok((NEGATIVE, format!("invalid: {reason}\n"))),
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Parse(src) => run_parse(src),
        Command::Eval { model, expr } => run_eval(model, expr),
        Command::Canon(src) => run_canon(src),
        Command::Sat(args) => run_decide(args, false),
        Command::Entails(args) => run_decide(args, true),
        Command::CheckProof { proof, hyps } => run_check_proof(proof, hyps.as_deref()),
        Command::AuditRules {
            samples,
            models,
            seed,
        } => run_audit(*samples, *models, *seed),
        Command::EmitEtr {
            problem,
            emit_dir,
            logic,
            moves,
        } => run_emit(problem, emit_dir, *logic, *moves),
        Command::VerifyCert {
            problem,
            certificate,
        } => run_verify(problem, certificate),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    match run(&cli) {
        Ok((code, out)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
