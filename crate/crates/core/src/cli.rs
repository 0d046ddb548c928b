//! Command-line front end.
//!
//! Every subcommand prints a plain table by default and a JSON document with `--json`.
//! Exit codes: 0 for a computed answer (negative answers included), 1 when a
//! verification run records failures, 2 for invalid input.

use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::dsl::{parse_element, parse_field, parse_form, parse_quadratic_symbol, parse_symbol, PfisterInput};
use crate::error::{Error, Result};
use crate::fields::{self, FieldTower};
use crate::linkage::{self, CertificateBudget, VerificationReport};
use crate::localglobal::{find_isotropic_vector, isotropy_report};
use crate::pfister::{good_slot_presentation, normalize_last_slot, pfister_residues};
use crate::qforms::witt::{shape, Shape};
use crate::qforms::{is_isotropic, witt_decompose_with, WittOptions};
use crate::valuation::{residue_form, springer_decompose, ValuationCtx};

#[derive(Debug, Parser)]
#[command(name = "quadlink", version, about = "Quadratic and Pfister forms over field towers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Emit a JSON report instead of a table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Record wall-clock time in verification reports.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct FieldArg {
    /// Field tower, e.g. `GF(9)((t))((u))` or `GF(5)(X)`.
    #[arg(long)]
    pub field: String,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Largest coordinate degree tried by explicit searches over `GF(q)(X)`.
    #[arg(long)]
    pub budget_degree: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SearchArgs {
    fn options(&self) -> WittOptions {
        let mut opts = match self.budget_degree {
            Some(cap) => WittOptions::with_max_degree(cap.max(1)),
            None => WittOptions::default(),
        };
        opts.seed ^= self.seed;
        opts
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide isotropy of a diagonal form.
    Isotropy {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        form: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Witt index and anisotropic kernel.
    Witt {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        form: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Residue forms of a diagonal form, or residues of a quadratic Pfister symbol.
    Residue {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, conflicts_with = "p1", required_unless_present = "p1")]
        form: Option<String>,
        #[arg(long)]
        p1: Option<String>,
        /// Single residue form at this uniformizer product.
        #[arg(long, requires = "form")]
        pi: Option<String>,
        /// Rank of the valuation: the number of outer Laurent levels used.
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Decide whether an element is a square.
    Square {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        element: String,
    },
    /// Expand a Pfister symbol to a diagonal form.
    PfisterExpand {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        p1: String,
    },
    /// Rewrite a Pfister symbol so that its last slot is a unit.
    PfisterNormalize {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        p1: String,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Decide whether two quadratic Pfister symbols are linked.
    Link {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Search for a common-slot presentation of two quadratic Pfister symbols.
    Certify {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 20_000)]
        max_checks: usize,
    },
    /// Seeded verification runs.
    #[command(subcommand)]
    Verify(Verify),
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    ResidueTransfer {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[command(flatten)]
        run: SampleArgs,
    },
    LiftingEquivalence {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[command(flatten)]
        run: SampleArgs,
    },
    HigherLocalD1 {
        #[arg(long)]
        q: u64,
        #[command(flatten)]
        run: SampleArgs,
        #[arg(long)]
        budget_degree: Option<usize>,
    },
    TopLinked {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        run: SampleArgs,
    },
}

/// A finished command: its report and exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
    pub table: String,
}

impl Outcome {
    fn ok(report: Value, table: String) -> Self {
        Outcome { code: 0, report, table }
    }
}

/// Parses `args` (program name first), runs the command and writes its output.
pub fn main_with<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match run(&cli) {
        Ok(o) => {
            let text = if cli.json {
                serde_json::to_string_pretty(&o.report).expect("report serializes") + "\n"
            } else {
                o.table
            };
            let _ = out.write_all(text.as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn field(f: &FieldArg) -> Result<FieldTower> {
    parse_field(&f.field)
}

fn ctx_for(k: &FieldTower, rank: Option<usize>) -> Result<ValuationCtx> {
    match rank {
        Some(r) => ValuationCtx::new(k, r),
        None if k.laurent_rank() == 0 => Err(Error::UnsupportedTower(format!(
            "{k} has no outer Laurent level"
        ))),
        None => ValuationCtx::composed(k),
    }
}

/// Runs a parsed command. Errors are input errors.
pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Isotropy { field: f, form, search } => {
            let k = field(f)?;
            let q = parse_form(&k, form)?;
            let mut report = json!({"field": k.to_string(), "form": q.display()});
            let isotropic = if shape(&k) == Shape::Global {
                let r = isotropy_report(&q)?;
                report["rule"] = json!(r.rule);
                report["places"] = json!(r.places);
                if r.isotropic {
                    let w = find_isotropic_vector(&q, &search.options(), 0)?
                        .ok_or_else(|| Error::BudgetExceeded("no witness found".into()))?;
                    report["witness"] = json!(w.iter().map(|x| k.display(x)).collect::<Vec<_>>());
                }
                r.isotropic
            } else {
                is_isotropic(&q)?
            };
            report["isotropic"] = json!(isotropic);
            let mut table = format!("form      {}\nfield     {k}\n", q.display());
            if let Some(w) = report.get("witness") {
                table += &format!("witness   {}\n", w.as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect::<Vec<_>>().join(", "));
            }
            table += if isotropic { "isotropic\n" } else { "anisotropic\n" };
            Ok(Outcome::ok(report, table))
        }
        Command::Witt { field: f, form, search } => {
            let k = field(f)?;
            let q = parse_form(&k, form)?;
            let w = witt_decompose_with(&q, &search.options())?;
            let report = json!({
                "field": k.to_string(),
                "form": q.display(),
                "witt_index": w.witt_index,
                "anisotropic_kernel": w.anisotropic_kernel.display(),
            });
            let table = format!(
                "form              {}\nwitt index        {}\nanisotropic part  {}\n",
                q.display(),
                w.witt_index,
                w.anisotropic_kernel.display()
            );
            Ok(Outcome::ok(report, table))
        }
        Command::Residue { field: f, form, p1, pi, rank } => {
            let k = field(f)?;
            let ctx = ctx_for(&k, *rank)?;
            if let Some(s) = p1 {
                let s = parse_quadratic_symbol(&k, s)?;
                let r = pfister_residues(&s, &ctx)?;
                let mut table = format!(
                    "presentation    {}\nfirst residue   {}\n",
                    r.presentation.display(),
                    r.first_residue.display()
                );
                for c in &r.classes {
                    table += &format!(
                        "class {:?}  pi {}  multiplier {}\n",
                        c.subset,
                        k.display(&c.pi),
                        ctx.residue_tower().display(&c.multiplier)
                    );
                }
                return Ok(Outcome::ok(r.to_json(), table));
            }
            let q = parse_form(&k, form.as_deref().unwrap_or_default())?;
            if let Some(pi) = pi {
                let pi = parse_element(&k, pi)?;
                let r = residue_form(&q, &ctx, &pi)?;
                let report = json!({"pi": k.display(&pi), "form": r.diag().iter().map(|e| r.tower().display(e)).collect::<Vec<_>>()});
                return Ok(Outcome::ok(report, format!("{}  {}\n", k.display(&pi), r.display())));
            }
            let d = springer_decompose(&q, &ctx)?;
            let mut table = String::new();
            for (rep, part) in d.coset_reps.iter().zip(&d.parts) {
                table += &format!("{:<12}{}\n", k.display(rep), part.display());
            }
            Ok(Outcome::ok(d.to_json(&k), table))
        }
        Command::Square { field: f, element } => {
            let k = field(f)?;
            let a = parse_element(&k, element)?;
            let sq = fields::is_square(&k, &a)?;
            let report = json!({"field": k.to_string(), "element": k.display(&a), "square": sq});
            let table = format!("{}  {}\n", k.display(&a), if sq { "square" } else { "not a square" });
            Ok(Outcome::ok(report, table))
        }
        Command::PfisterExpand { field: f, p1 } => {
            let k = field(f)?;
            let (display, form) = match parse_symbol(&k, p1)? {
                PfisterInput::Quadratic(s) => (s.display(), s.expand()),
                PfisterInput::Bilinear(s) => (s.display(), s.expand()),
            };
            let report = json!({"symbol": display, "form": form.display(), "dim": form.dim()});
            Ok(Outcome::ok(report, format!("{display}\n{}\n", form.display())))
        }
        Command::PfisterNormalize { field: f, p1, rank } => {
            let k = field(f)?;
            let ctx = ctx_for(&k, *rank)?;
            match parse_symbol(&k, p1)? {
                PfisterInput::Bilinear(s) => {
                    let (out, trace) = normalize_last_slot(&s, &ctx)?;
                    let mut table = format!("{}\n", s.display());
                    for step in &trace.steps {
                        let after: Vec<String> = step.after.iter().map(|a| k.display(a)).collect();
                        table += &format!("  {:<24} <<{}>>\n", step.rule.describe(&k), after.join(", "));
                    }
                    table += &format!("{}\n", out.display());
                    let report = json!({"input": s.display(), "output": out.display(), "trace": trace.to_json(&k)});
                    Ok(Outcome::ok(report, table))
                }
                PfisterInput::Quadratic(s) => {
                    let out = good_slot_presentation(&s, Some(&ctx))?;
                    let report = json!({"input": s.display(), "output": out.display()});
                    Ok(Outcome::ok(report, format!("{}\n{}\n", s.display(), out.display())))
                }
            }
        }
        Command::Link { field: f, p1, p2, search } => {
            let k = field(f)?;
            let (q1, q2) = (parse_quadratic_symbol(&k, p1)?, parse_quadratic_symbol(&k, p2)?);
            let linked = linkage::is_linked_pair_with(&q1, &q2, &search.options())?;
            let report = json!({"field": k.to_string(), "p1": q1.display(), "p2": q2.display(), "linked": linked});
            let table = format!("{}\n{}\n{}\n", q1.display(), q2.display(), if linked { "linked" } else { "not linked" });
            Ok(Outcome::ok(report, table))
        }
        Command::Certify { field: f, p1, p2, search, max_checks } => {
            let k = field(f)?;
            let (q1, q2) = (parse_quadratic_symbol(&k, p1)?, parse_quadratic_symbol(&k, p2)?);
            let budget = CertificateBudget {
                max_checks: *max_checks,
                witt: search.options(),
                salt: search.seed,
            };
            let mut report = json!({"field": k.to_string(), "p1": q1.display(), "p2": q2.display()});
            let found = match linkage::find_certificate(&q1, &q2, &budget) {
                Ok(c) => c,
                Err(Error::BudgetExceeded(_)) => {
                    report["certificate"] = Value::Null;
                    report["status"] = json!("budget exceeded");
                    return Ok(Outcome::ok(report, "no certificate: budget exceeded\n".into()));
                }
                Err(e) => return Err(e),
            };
            let Some(c) = found else {
                report["certificate"] = Value::Null;
                report["status"] = json!("not found");
                return Ok(Outcome::ok(report, "no certificate found\n".into()));
            };
            let verified = c.verify_with(&q1, &q2, &budget.witt)?;
            report["certificate"] = c.to_json();
            report["status"] = json!(if verified { "verified" } else { "verification failed" });
            let table = format!(
                "{}\n  ~ {}\n{}\n  ~ {}\n{}\n",
                q1.display(),
                c.first()?.display(),
                q2.display(),
                c.second()?.display(),
                if verified { "verified" } else { "verification failed" }
            );
            Ok(Outcome {
                code: if verified { 0 } else { 1 },
                report,
                table,
            })
        }
        Command::Verify(v) => {
            let start = Instant::now();
            let mut r = run_verify(v)?;
            r.elapsed_ms = cli.timing.then(|| start.elapsed().as_millis() as u64);
            let mut table = format!("{}\n", r.summary());
            for (key, n) in &r.stats {
                table += &format!("  {key:<28}{n}\n");
            }
            for f in &r.failures {
                table += &format!("  sample {:>5}  {:<20}{}\n", f.sample, f.check, f.detail);
            }
            if let Some(ms) = r.elapsed_ms {
                table += &format!("  elapsed {ms} ms\n");
            }
            table += if r.passed() { "PASS\n" } else { "FAIL\n" };
            Ok(Outcome {
                code: if r.passed() { 0 } else { 1 },
                report: serde_json::to_value(&r).expect("report serializes"),
                table,
            })
        }
    }
}

fn run_verify(v: &Verify) -> Result<VerificationReport> {
    match v {
        Verify::ResidueTransfer { field: f, n, m, run } => {
            linkage::verify_residue_transfer(&field(f)?, *n, *m, run.samples, run.seed)
        }
        Verify::LiftingEquivalence { field: f, d, m, run } => {
            linkage::verify_lifting_equivalence(&field(f)?, *d, *m, run.samples, run.seed)
        }
        Verify::HigherLocalD1 { q, run, budget_degree } => {
            let opts = match budget_degree {
                Some(cap) => WittOptions::with_max_degree((*cap).max(1)),
                None => WittOptions::default(),
            };
            linkage::verify_higher_local_d1(*q, run.samples, run.seed, &opts)
        }
        Verify::TopLinked { field: f, d, run } => {
            let k = field(f)?;
            if *d == 0 {
                return Err(Error::ConfigUnsupported("d must be at least 1".into()));
            }
            Ok(linkage::check_top_d_linked(&k, *d, run.samples, run.seed))
        }
    }
}
