//! Command-line front end: `rome check`, `rome run`, and `rome repl`.
//!
//! Exit codes: 0 success, 1 language error, 2 I/O error, 3 out of fuel.

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rome::entail::EntailConfig;
use rome::eval;
use rome::program::{Checked, Program};
use rome::resolve::GlobalRef;
use rome::syntax::{Evidence, Term};

#[derive(Parser)]
#[command(name = "rome", version, about = "A row-type calculus with complements and evidence")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Skip loading the standard prelude.
    #[arg(long)]
    no_prelude: bool,
    /// Bound on transitivity chains during predicate solving.
    #[arg(long, default_value_t = 4)]
    entail_depth: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse, kind-check, and type-check source files.
    Check {
        paths: Vec<PathBuf>,
        /// Print each declaration's checked type or kind.
        #[arg(long)]
        dump_types: bool,
        /// Print the evidence solved for each definition.
        #[arg(long)]
        explain_evidence: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Evaluate a named entry point from a file and print its value.
    Run {
        path: PathBuf,
        entry: String,
        /// Maximum number of reduction steps.
        #[arg(long, default_value_t = eval::DEFAULT_FUEL)]
        fuel: usize,
        /// Print each reduction step and the rule that fired.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Interactive loop: type `:help` for commands.
    Repl {
        #[arg(long, default_value_t = eval::DEFAULT_FUEL)]
        fuel: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn make_program(common: &CommonOpts) -> Result<Program, ExitCode> {
    let cfg = EntailConfig { max_depth: common.entail_depth };
    if common.no_prelude {
        Ok(Program::new(cfg))
    } else {
        Program::with_prelude(cfg).map_err(|e| {
            eprintln!("{}", e);
            ExitCode::from(1)
        })
    }
}

/// Collect the evidence trees applied inside an elaborated term.
fn collect_evidence(t: &Term, out: &mut Vec<Evidence>) {
    match t {
        Term::Var(_) | Term::Global(_) | Term::Const(_) | Term::Sing(_, _) => {}
        Term::Lam(_, b) | Term::TyLam(_, b) | Term::EvLam(_, b) => collect_evidence(b, out),
        Term::App(f, a) => {
            collect_evidence(f, out);
            collect_evidence(a, out);
        }
        Term::TyApp(f, _, _) => collect_evidence(f, out),
        Term::EvApp(f, q) => {
            collect_evidence(f, out);
            out.push(q.clone());
        }
        Term::Intro(_, l, m, _) => {
            collect_evidence(l, out);
            collect_evidence(m, out);
        }
        Term::Elim(_, m, l) => {
            collect_evidence(m, out);
            collect_evidence(l, out);
        }
        Term::RecordLit { fields, .. } => fields.iter().for_each(|f| collect_evidence(f, out)),
        Term::VariantLit { payload, .. } => collect_evidence(payload, out),
    }
}

fn cmd_check(
    paths: &[PathBuf],
    dump_types: bool,
    explain_evidence: bool,
    common: &CommonOpts,
) -> ExitCode {
    let mut program = match make_program(common) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let mut clean = true;
    for path in paths {
        let src = match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("{}: error: {}", path.display(), e);
                return ExitCode::from(2);
            }
        };
        match program.load_source(&path.display().to_string(), &src) {
            Ok(checked) => {
                for c in &checked {
                    if dump_types {
                        println!("{}", c.render());
                    }
                    if explain_evidence {
                        if let Checked::TermDef { name, .. } = c {
                            if let Some(GlobalRef::Term(i)) = program.globals.lookup(name) {
                                if let Some(def) = &program.globals.terms[i].def {
                                    let mut evs = Vec::new();
                                    collect_evidence(def, &mut evs);
                                    for q in evs {
                                        println!(
                                            "{}: evidence {}",
                                            name,
                                            rome::pretty::evidence(&q)
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
            Err(e) => {
                eprintln!("{}", e);
                clean = false;
            }
        }
    }
    if clean {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_run(path: &PathBuf, entry: &str, fuel: usize, trace: bool, common: &CommonOpts) -> ExitCode {
    let mut program = match make_program(common) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: error: {}", path.display(), e);
            return ExitCode::from(2);
        }
    };
    if let Err(e) = program.load_source(&path.display().to_string(), &src) {
        eprintln!("{}", e);
        return ExitCode::from(1);
    }
    let ix = match program.globals.lookup(entry) {
        Some(GlobalRef::Term(i)) if program.globals.terms[i].def.is_some() => i,
        _ => {
            eprintln!("error: no definition named {}", entry);
            return ExitCode::from(1);
        }
    };
    let names = program.term_names();
    let term = Term::Global(ix);
    let result = if trace {
        eval::eval_trace(&program.globals, &term, fuel, |t, rule| {
            println!("[{}] {}", rule, rome::pretty::term(t, &names));
        })
    } else {
        eval::eval_to_value(&program.globals, &term, fuel)
    };
    match result {
        Ok(v) => {
            println!("{}", rome::pretty::value(&v, &names));
            ExitCode::SUCCESS
        }
        Err(eval::EvalError::OutOfFuel) => {
            eprintln!("error: out of fuel after {} steps", fuel);
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}

fn repl(fuel: usize, common: &CommonOpts) -> ExitCode {
    let mut program = match make_program(common) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    println!("rome repl -- :t <expr>, :k <type>, :load <file>, :quit");
    loop {
        print!("> ");
        let _ = out.flush();
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => return ExitCode::SUCCESS,
            Ok(_) => {}
            Err(e) => {
                eprintln!("error: {}", e);
                return ExitCode::from(2);
            }
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == ":q" || line == ":quit" {
            return ExitCode::SUCCESS;
        }
        if let Some(rest) = line.strip_prefix(":t ") {
            let rest = rest.trim();
            // Bare names print their recorded scheme, alpha-renamed.
            let scheme = program.scheme_of(rest).or_else(|| program.const_scheme(rest));
            match scheme {
                Some(s) => println!("{} : {}", rest, rome::pretty::normal_type(&s)),
                None => match program.check_term_str(rest) {
                    Ok((_, ty)) => println!("{} : {}", rest, rome::pretty::normal_type(&ty)),
                    Err(e) => println!("error: {}", e),
                },
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix(":k ") {
            match program.kind_of_str(rest.trim()) {
                Ok(k) => println!("{} : {}", rest.trim(), rome::pretty::kind(&k)),
                Err(e) => println!("error: {}", e),
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix(":load ") {
            let path = rest.trim();
            match std::fs::read_to_string(path) {
                Ok(src) => match program.load_source(path, &src) {
                    Ok(checked) => println!("loaded {} declarations", checked.len()),
                    Err(e) => println!("{}", e),
                },
                Err(e) => println!("{}: error: {}", path, e),
            }
            continue;
        }
        if line == ":help" {
            println!(":t <expr>   infer and print a type");
            println!(":k <type>   infer and print a kind");
            println!(":load <f>   load declarations from a file");
            println!(":quit       leave");
            continue;
        }
        match program.check_term_str(line) {
            Ok((term, _ty)) => {
                let names = program.term_names();
                match eval::eval_to_value(&program.globals, &term, fuel) {
                    Ok(v) => println!("{}", rome::pretty::value(&v, &names)),
                    Err(e) => println!("error: {}", e),
                }
            }
            Err(e) => println!("error: {}", e),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Check { paths, dump_types, explain_evidence, common } => {
            cmd_check(paths, *dump_types, *explain_evidence, common)
        }
        Cmd::Run { path, entry, fuel, trace, common } => {
            cmd_run(path, entry, *fuel, *trace, common)
        }
        Cmd::Repl { fuel, common } => repl(*fuel, common),
    }
}
