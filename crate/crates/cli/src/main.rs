//! `meadow`: parse, evaluate, flatten, normalize and decide equations of
//! common meadows from the command line.
//!
//! Exit status: 0 for valid / pass, 1 for invalid / fail, 2 for usage and
//! input errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use meadow::decide::Budget;
use meadow::harness::{differential_run_with, soundness_suite_with, DiffConfig, GenConfig, SoundnessConfig};
use meadow::terms::parse_equation_file;
use meadow::{
    canonicalize, decide_with, denominator_annex_shift, eval, flatten, parse, parse_equation, reduce_wcr, CarrierSpec,
    Equation, SignatureTag, Valuation,
};

#[derive(Parser, Debug)]
#[command(name = "meadow", version, about = "Equational reasoning in common meadows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a term or equation and print it in canonical form
    Parse { input: String },
    /// Evaluate a term in Enl_bot(F)
    Eval {
        term: String,
        /// Carrier: `q` for the rationals, `fp:<p>` for the prime field F_p
        #[arg(long, default_value = "q", value_parser = parse_carrier)]
        carrier: CarrierSpec,
        /// Variable binding `var=value`; the value is any closed term, e.g. `1/2`, `-3`, `bot`
        #[arg(long = "set", value_name = "VAR=VALUE")]
        bindings: Vec<String>,
    },
    /// Rewrite a term into a single fraction of ring terms
    Flatten {
        term: String,
        /// Print the axiom applied at each step
        #[arg(long)]
        trace: bool,
        /// Also move the denominator annex into the numerator
        #[arg(long)]
        shift: bool,
    },
    /// Print the quasi-polynomial normal form of a division-free term, or `bot`
    Normalize { term: String },
    /// Decide whether an equation holds in all common meadows
    Decide {
        /// `lhs = rhs`; omit when using --file
        equation: Option<String>,
        /// Read one equation per line (`#` starts a comment)
        #[arg(long, conflicts_with = "equation")]
        file: Option<PathBuf>,
        /// Also print both canonical fracterms
        #[arg(long)]
        explain: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Differential campaign: random equations against the oracle battery
    Fuzz {
        /// Number of equations
        #[arg(short = 'n', long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Signature::CommonMeadow)]
        signature: Signature,
        /// Print only mismatching records and the summary
        #[arg(long)]
        summary: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check every axiom against the finite-field and rational oracles
    Axioms {
        /// Random rational valuations per axiom
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(clap::Args, Debug)]
struct SearchArgs {
    /// Seed for all random search
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random rational valuations tried
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// Largest variable count searched exhaustively over F_2, F_3, F_5 (fuzz: generated variables)
    #[arg(long, default_value_t = 3)]
    max_vars: usize,
    /// Random valuations per prime field once exhaustive search is out of range
    #[arg(long, default_value_t = 500)]
    budget: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Signature {
    Ring,
    RingBot,
    Meadow,
    CommonMeadow,
}

impl From<Signature> for SignatureTag {
    fn from(s: Signature) -> SignatureTag {
        match s {
            Signature::Ring => SignatureTag::Ring,
            Signature::RingBot => SignatureTag::RingBot,
            Signature::Meadow => SignatureTag::Meadow,
            Signature::CommonMeadow => SignatureTag::CommonMeadow,
        }
    }
}

fn parse_carrier(s: &str) -> Result<CarrierSpec, String> {
    if s == "q" {
        return Ok(CarrierSpec::Rationals);
    }
    let p = s
        .strip_prefix("fp:")
        .ok_or_else(|| format!("expected `q` or `fp:<prime>`, got `{s}`"))?;
    let p: u64 = p.parse().map_err(|e| format!("bad prime `{p}`: {e}"))?;
    CarrierSpec::prime_field(p).map_err(|e| e.to_string())
}

/// Failure that maps to exit status 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

/// Output text and whether the command "passed".
type Outcome = Result<(String, bool), UsageError>;

fn run_parse(input: &str) -> Outcome {
    let text = if input.contains('=') {
        parse_equation(input)?.to_string()
    } else {
        parse(input)?.to_string()
    };
    Ok((text + "\n", true))
}

fn run_eval(term: &str, carrier: CarrierSpec, bindings: &[String]) -> Outcome {
    let t = parse(term)?;
    let mut valuation = Valuation::new();
    for b in bindings {
        let (var, value) = b
            .split_once('=')
            .ok_or_else(|| UsageError(format!("binding `{b}` is not of the form var=value")))?;
        let value = parse(value.trim())?;
        if !value.free_vars().is_empty() {
            return Err(UsageError(format!("value of `{var}` must be a closed term")));
        }
        valuation.insert(var.trim().to_string(), eval(&value, &Valuation::new(), carrier)?);
    }
    Ok((format!("{}\n", eval(&t, &valuation, carrier)?), true))
}

fn run_flatten(term: &str, trace: bool, shift: bool) -> Outcome {
    let t = parse(term)?;
    let (mut flat, steps) = flatten(&t);
    let mut out = String::new();
    if trace {
        for (i, step) in steps.steps.iter().enumerate() {
            writeln!(out, "step {}: {step}", i + 1).expect("write to string");
        }
    }
    if shift {
        match denominator_annex_shift(&flat) {
            Ok(shifted) => flat = shifted,
            Err(e) => writeln!(out, "# {e}").expect("write to string"),
        }
    }
    writeln!(out, "{flat}").expect("write to string");
    Ok((out, true))
}

fn run_normalize(term: &str) -> Outcome {
    let q = reduce_wcr(&parse(term)?)?;
    Ok((format!("{q}\n"), true))
}

fn budget(search: &SearchArgs) -> Budget {
    Budget {
        max_vars: search.max_vars,
        rational_samples: search.samples,
        prime_samples: search.budget,
        seed: search.seed,
        ..Budget::default()
    }
}

fn decide_one(e: &Equation, budget: &Budget, explain: bool) -> (String, bool) {
    let verdict = decide_with(e, budget);
    let mut out = String::new();
    if explain {
        writeln!(out, "lhs={}", canonicalize(&e.lhs)).expect("write to string");
        writeln!(out, "rhs={}", canonicalize(&e.rhs)).expect("write to string");
    }
    out.push_str(&verdict.machine_block());
    (out, verdict.is_valid())
}

fn run_decide(equation: Option<&str>, file: Option<&PathBuf>, explain: bool, search: &SearchArgs) -> Outcome {
    let budget = budget(search);
    match (equation, file) {
        (Some(text), None) => Ok(decide_one(&parse_equation(text)?, &budget, explain)),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            let mut out = String::new();
            let mut all_valid = true;
            for (line, e) in parse_equation_file(&text)? {
                let (block, valid) = decide_one(&e, &budget, explain);
                writeln!(out, "line={line}\nequation={e}").expect("write to string");
                out.push_str(&block);
                out.push('\n');
                all_valid &= valid;
            }
            Ok((out, all_valid))
        }
        _ => Err(UsageError("give an equation or --file".to_string())),
    }
}

fn run_fuzz(count: usize, depth: usize, signature: Signature, summary: bool, search: &SearchArgs) -> Outcome {
    if count == 0 {
        return Err(UsageError("--count must be at least 1".to_string()));
    }
    let gen = GenConfig::default()
        .with_seed(search.seed)
        .with_depth(depth)
        .with_max_vars(search.max_vars)
        .with_signature(signature.into());
    let mut cfg = DiffConfig::new(gen);
    cfg.budget = budget(search);
    cfg.oracle.rational_samples = search.samples;
    cfg.oracle.prime_samples = search.budget;
    let report = differential_run_with(count, &cfg);
    let out = if summary {
        let mut out = String::new();
        for r in report.records.iter().filter(|r| r.mismatch.is_some()) {
            writeln!(out, "{r}").expect("write to string");
        }
        writeln!(out, "summary {}", report.summary()).expect("write to string");
        out
    } else {
        report.to_string()
    };
    Ok((out, report.passed()))
}

fn run_axioms(samples: usize, seed: u64) -> Outcome {
    let report = soundness_suite_with(&SoundnessConfig {
        rational_samples: samples,
        seed,
        ..SoundnessConfig::default()
    });
    Ok((report.to_string(), report.passed()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Parse { input } => run_parse(input),
        Command::Eval {
            term,
            carrier,
            bindings,
        } => run_eval(term, *carrier, bindings),
        Command::Flatten { term, trace, shift } => run_flatten(term, *trace, *shift),
        Command::Normalize { term } => run_normalize(term),
        Command::Decide {
            equation,
            file,
            explain,
            search,
        } => run_decide(equation.as_deref(), file.as_ref(), *explain, search),
        Command::Fuzz {
            count,
            depth,
            signature,
            summary,
            search,
        } => run_fuzz(*count, *depth, *signature, *summary, search),
        Command::Axioms { samples, seed } => run_axioms(*samples, *seed),
    };
    match outcome {
        Ok((text, passed)) => {
            print!("{text}");
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
