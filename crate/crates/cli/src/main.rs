use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use ceqss::compiler::{compile_plan, compile_uk, program_cost};
use ceqss::encoder::{encode_symbolic, SecretSpec, ShareLayout};
use ceqss::error::Error;
use ceqss::io::{matrix_from_json, netlist_to_json, state_to_json, trace_to_json, TraceStep};
use ceqss::params::{build_m_layout, derive_params, SchemeParams};
use ceqss::recovery::{
    accessed_determines_secret, combinations, cost_table, execute_observed, plan_recovery,
    sample_subsets, sweep,
};
use ceqss::secrecy::{default_secret_set, secrecy_dense, secrecy_structural};
use ceqss::state::AffineLabel;
use ceqss::verify::{dense_recovery_check, symbolic_dense_deviation};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const DEFAULT_SEED: u64 = 0xCE55;
const TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "ceqss", version, about = "Communication-efficient quantum secret sharing toolkit")]
struct Cli {
    /// Field prime (default: smallest prime above 2k - 1)
    #[arg(long, global = true)]
    q: Option<u64>,
    /// Seed for sampled subsets and random secrets
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for sweeps (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write a per-step label trace (recover only)
    #[arg(long, global = true, value_name = "FILE")]
    trace: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived scheme parameters and the layout of M
    Params {
        #[arg(long)]
        k: usize,
    },
    /// Encode symbolically and print or save the share labels
    Encode {
        #[arg(long)]
        k: usize,
        /// Substitute a basis secret, e.g. 1,2,3,4,5,6
        #[arg(long, value_delimiter = ',')]
        secret: Option<Vec<u64>>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Plan, execute and verify recovery from one party set
    Recover {
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        parties: Vec<usize>,
        #[arg(long, value_name = "FILE")]
        netlist: Option<PathBuf>,
    },
    /// Sweep recovery over party sets for every d in [k, n]
    Verify {
        #[arg(long)]
        k: usize,
        /// Every subset, however many
        #[arg(long, conflicts_with = "samples")]
        all_subsets: bool,
        /// Subsets per d (default: all when at most 64, else 64 sampled)
        #[arg(long)]
        samples: Option<usize>,
        /// Also replay recovery on the dense simulator
        #[arg(long)]
        dense: bool,
    },
    /// Dense and structural secrecy checks
    Secrecy {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SubsetChoice::Maximal)]
        subsets: SubsetChoice,
    },
    /// Communication cost per d
    Cost {
        #[arg(long)]
        k: usize,
    },
    /// Compile a matrix file into an elementary netlist
    Compile {
        #[arg(long, value_name = "FILE")]
        matrix: PathBuf,
        /// Target qudits (default: 0, 1, ..., size - 1)
        #[arg(long, value_delimiter = ',')]
        qudits: Option<Vec<usize>>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SubsetChoice {
    /// Every set of exactly k - 1 parties
    Maximal,
    /// Every nonempty set of at most k - 1 parties
    All,
}

/// Treat an exceeded dense budget as "skipped" rather than an error.
trait SkipTooLarge<T> {
    fn too_large_as_none(self) -> Result<Option<T>, Error>;
}

impl<T> SkipTooLarge<T> for Result<T, Error> {
    fn too_large_as_none(self) -> Result<Option<T>, Error> {
        match self {
            Ok(v) => Ok(Some(v)),
            Err(Error::TooLarge { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// How a command that ran to completion ended; hard errors go through `Err`.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Params { k } => params(cli, *k),
        Command::Encode { k, secret, out } => encode(cli, *k, secret.as_deref(), out.as_ref()),
        Command::Recover { k, parties, netlist } => recover(cli, *k, parties, netlist.as_ref()),
        Command::Verify {
            k,
            all_subsets,
            samples,
            dense,
        } => verify(cli, *k, *all_subsets, *samples, *dense),
        Command::Secrecy { k, subsets } => secrecy(cli, *k, *subsets),
        Command::Cost { k } => cost(cli, *k),
        Command::Compile { matrix, qudits, out } => compile(cli, matrix, qudits.as_deref(), out.as_ref()),
    }
}

fn scheme(cli: &Cli, k: usize) -> anyhow::Result<SchemeParams> {
    Ok(derive_params(k, cli.q)?)
}

fn tuple(v: &[impl ToString]) -> String {
    let items: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", items.join(","))
}

fn write_file(path: &PathBuf, text: &str) -> anyhow::Result<()> {
    fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))
}

fn params(cli: &Cli, k: usize) -> anyhow::Result<Outcome> {
    let p = scheme(cli, k)?;
    if cli.json {
        let v = json!({
            "k": p.k, "n": p.n, "q": p.q, "d": p.d, "m_vec": p.m_vec, "m": p.m,
            "a": p.a, "b": p.b, "points": p.points,
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("k={} n={} q={}", p.k, p.n, p.q);
        println!("d={}", tuple(&p.d));
        println!("m_vec={}", tuple(&p.m_vec));
        println!("m={}", p.m);
        println!("a={}", tuple(&p.a));
        println!("b={}", tuple(&p.b));
        println!("points={}", tuple(&p.points));
        println!("M =\n{}", build_m_layout(&p));
    }
    Ok(Outcome::Pass)
}

fn encode(cli: &Cli, k: usize, secret: Option<&[u64]>, out: Option<&PathBuf>) -> anyhow::Result<Outcome> {
    let p = scheme(cli, k)?;
    let st = encode_symbolic(&p);
    if let Some(path) = out {
        write_file(path, &state_to_json(&st))?;
        eprintln!("wrote {} qudit labels to {}", st.num_qudits(), path.display());
    }
    let f = st.field();
    let shown: Vec<AffineLabel> = match secret {
        None => st.labels().to_vec(),
        Some(s) => {
            SecretSpec::Basis(s.to_vec()).validate(&p)?;
            st.labels()
                .iter()
                .map(|l| {
                    let shift = l
                        .terms()
                        .filter(|&(v, _)| v < p.m)
                        .fold(0, |acc, (v, c)| f.add(acc, f.mul(c, s[v])));
                    AffineLabel::from_terms(f, l.terms().filter(|&(v, _)| v >= p.m), shift)
                })
                .collect()
        }
    };
    let shares = ShareLayout::new(&p);
    if cli.json {
        if out.is_none() && secret.is_none() {
            println!("{}", state_to_json(&st));
        } else if out.is_none() {
            let rows: Vec<_> = shown
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    let (u, j) = shares.party_pos(i);
                    json!({"party": u, "pos": j, "label": l.display(p.m)})
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows)?);
        }
    } else if out.is_none() || secret.is_some() {
        for (i, l) in shown.iter().enumerate() {
            let (u, j) = shares.party_pos(i);
            println!("c_{u},{j} = {}", l.display(p.m));
        }
    }
    Ok(Outcome::Pass)
}

fn recover(cli: &Cli, k: usize, parties: &[usize], netlist: Option<&PathBuf>) -> anyhow::Result<Outcome> {
    let p = scheme(cli, k)?;
    let plan = match plan_recovery(&p, parties) {
        Ok(plan) => plan,
        Err(Error::InvariantViolation(msg)) => {
            let determined = accessed_determines_secret(&p, parties)?;
            eprintln!("recovery failed: {msg}");
            eprintln!(
                "downloaded qudits {} the secret over F_{}",
                if determined { "determine" } else { "do not determine" },
                p.q
            );
            return Ok(Outcome::Fail);
        }
        Err(e) => return Err(e.into()),
    };
    let prog = compile_plan(&plan)?;
    let pc = program_cost(&prog);
    if let Some(path) = netlist {
        write_file(path, &netlist_to_json(&prog))?;
    }
    let mut trace = Vec::new();
    let result = execute_observed(&plan, encode_symbolic(&p), |n, step, st| {
        if cli.trace.is_some() {
            trace.push(TraceStep {
                step: n,
                gate: format!("{} on column {} qudits {:?}", step.kind, step.column + 1, step.qudits),
                state: st.clone(),
            });
        }
    });
    if let Some(path) = &cli.trace {
        write_file(path, &trace_to_json(&trace))?;
    }
    let (report, ok) = match result {
        Ok(r) => (r.report, true),
        Err(Error::VerificationFailed(rep)) => (*rep, false),
        Err(e) => return Err(e.into()),
    };
    let downloaded = plan.accessed.len();
    let per = p.cost_per_secret_qudit(plan.d())?;
    if cli.json {
        let v = json!({
            "parties": plan.parties,
            "d": plan.d(),
            "steps": plan.steps.len(),
            "secret_register": plan.secret_register,
            "secret_exact": report.secret_exact,
            "residual_factorizes": report.residual_factorizes,
            "qudits_downloaded": downloaded,
            "cost_per_secret_qudit": per,
            "netlist": pc,
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("{plan}");
        println!(
            "secret_exact={} residual_factorizes={}",
            report.secret_exact, report.residual_factorizes
        );
        println!("qudits downloaded: {downloaded} ({per} per secret qudit)");
        println!(
            "netlist: {} gates, depth {}, {} two-qudit",
            pc.gate_count, pc.depth, pc.two_qudit_count
        );
    }
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

fn verify(cli: &Cli, k: usize, all: bool, samples: Option<usize>, dense: bool) -> anyhow::Result<Outcome> {
    let p = scheme(cli, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut rows = Vec::new();
    let mut all_ok = true;
    for d in p.k..=p.n {
        let subsets = match (all, samples) {
            (true, _) => combinations(p.n, d),
            (false, Some(n)) => sample_subsets(p.n, d, n, &mut rng),
            (false, None) => sample_subsets(p.n, d, 64, &mut rng),
        };
        let outcomes = sweep(&p, &subsets);
        let failures: Vec<_> = outcomes.iter().filter(|o| !o.passed()).collect();
        let mut dense_worst: Option<(f64, f64, f64)> = None;
        if dense {
            for o in outcomes.iter().filter(|o| o.passed()) {
                let plan = plan_recovery(&p, &o.parties)?;
                let secrets = default_secret_set(&p, 2, cli.seed);
                let zero = vec![0; p.m];
                let dev = symbolic_dense_deviation(&p, &plan, &zero).too_large_as_none()?;
                let Some(dev) = dev else {
                    eprintln!("dense replay skipped: state exceeds the amplitude budget");
                    break;
                };
                let (mut fid, mut pur) = (1.0f64, 1.0f64);
                for s in secrets.iter().rev().take(3) {
                    let c = dense_recovery_check(&p, &plan, s)?;
                    fid = fid.min(c.fidelity);
                    pur = pur.min(c.purity);
                }
                let w = dense_worst.get_or_insert((0.0, 1.0, 1.0));
                *w = (w.0.max(dev), w.1.min(fid), w.2.min(pur));
            }
        }
        let dense_ok = dense_worst.is_none_or(|(dev, fid, pur)| dev < TOL && fid > 1.0 - TOL && pur > 1.0 - TOL);
        all_ok &= failures.is_empty() && dense_ok;
        if !cli.json {
            let mut line = format!(
                "d={d}: {}/{} subsets recovered, {} qudits downloaded each",
                outcomes.len() - failures.len(),
                outcomes.len(),
                p.qudits_downloaded(d)?
            );
            if let Some((dev, fid, pur)) = dense_worst {
                line += &format!("; dense: max deviation {dev:.2e}, min fidelity {fid:.12}, min purity {pur:.12}");
            }
            println!("{line}");
            for f in &failures {
                if let Err(e) = &f.outcome {
                    println!("  FAIL {:?}: {e}", f.parties);
                }
            }
        }
        rows.push(json!({
            "d": d,
            "checked": outcomes.len(),
            "passed": outcomes.len() - failures.len(),
            "failures": failures.iter().map(|f| &f.parties).collect::<Vec<_>>(),
            "dense": dense_worst.map(|(dev, fid, pur)| json!({"max_deviation": dev, "min_fidelity": fid, "min_purity": pur})),
        }));
    }
    if cli.json {
        let v = json!({"k": p.k, "q": p.q, "seed": cli.seed, "passed": all_ok, "rows": rows});
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("{}", if all_ok { "all checks passed" } else { "some checks FAILED" });
    }
    Ok(if all_ok { Outcome::Pass } else { Outcome::Fail })
}

fn secrecy(cli: &Cli, k: usize, choice: SubsetChoice) -> anyhow::Result<Outcome> {
    let p = scheme(cli, k)?;
    let sets: Vec<Vec<usize>> = match choice {
        SubsetChoice::Maximal => combinations(p.n, p.k - 1),
        SubsetChoice::All => (1..p.k).flat_map(|s| combinations(p.n, s)).collect(),
    };
    let secrets = default_secret_set(&p, 10, cli.seed);
    let mut worst: Option<f64> = Some(0.0);
    for a in &sets {
        match secrecy_dense(&p, a, &secrets).too_large_as_none()? {
            Some(d) => worst = worst.map(|w| w.max(d)),
            None => {
                worst = None;
                break;
            }
        }
    }
    let structural = secrecy_structural(&p);
    let dense_ok = worst.is_none_or(|w| w < TOL);
    let ok = dense_ok && structural.passed();
    if cli.json {
        let v = json!({
            "k": p.k, "q": p.q, "subsets": sets, "max_trace_distance": worst,
            "structural": structural, "passed": ok,
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        match worst {
            Some(w) => println!(
                "max trace distance over {} sets x {} secrets: {w:.3e}",
                sets.len(),
                secrets.len()
            ),
            None => println!("dense check skipped: state exceeds the amplitude budget"),
        }
        println!(
            "structural: complements authorized={}, {}/{} threshold sets recover",
            structural.complements_authorized,
            structural.threshold_sets_recovered,
            structural.threshold_sets_checked
        );
        if let Some(c) = &structural.counterexample {
            println!("  counterexample {:?}: {}", c.parties, c.reason);
        }
        println!("{}", if ok { "secrecy checks passed" } else { "secrecy checks FAILED" });
    }
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

fn cost(cli: &Cli, k: usize) -> anyhow::Result<Outcome> {
    let p = scheme(cli, k)?;
    let rows = cost_table(&p);
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        println!("{:>4} {:>10} {:>12} {:>9}", "d", "downloaded", "per secret", "baseline");
        for r in rows {
            println!(
                "{:>4} {:>10} {:>12} {:>9}",
                r.d,
                r.qudits_downloaded,
                r.per_secret_qudit.to_string(),
                r.baseline
            );
        }
    }
    Ok(Outcome::Pass)
}

fn compile(cli: &Cli, matrix: &PathBuf, qudits: Option<&[usize]>, out: Option<&PathBuf>) -> anyhow::Result<Outcome> {
    let text = fs::read_to_string(matrix).with_context(|| format!("reading {}", matrix.display()))?;
    let k = matrix_from_json(&text)?;
    let default: Vec<usize> = (0..k.rows()).collect();
    let qudits = qudits.unwrap_or(&default);
    if qudits.len() != k.rows() {
        bail!("{} qudits given for a {}x{} matrix", qudits.len(), k.rows(), k.cols());
    }
    let prog = compile_uk(&k, qudits)?;
    let pc = program_cost(&prog);
    match out {
        Some(path) => {
            write_file(path, &netlist_to_json(&prog))?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&pc)?);
            } else {
                println!(
                    "{} gates (depth {}, {} two-qudit) written to {}",
                    pc.gate_count,
                    pc.depth,
                    pc.two_qudit_count,
                    path.display()
                );
            }
        }
        None => println!("{}", netlist_to_json(&prog)),
    }
    Ok(Outcome::Pass)
}
