//! Command-line surface for the Alexandrov 3-space calculus.
//!
//! Exit status: 0 on success, 1 on domain errors (unknown atoms, parse
//! errors, invalid descriptions), 2 on usage errors. Output is computed in
//! full before anything is printed, so failures never leave partial output.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use alex3_core::catalog::{Catalog, Entry};
use alex3_core::homology::h1;
use alex3_core::normalizer::{
    equivalent, graph_of, normal_form, normal_form_with, Equivalence, RuleOrder,
};
use alex3_core::surgery::{filling_4d, realize, surgery_skeleton, validate};
use alex3_core::testkit::{random_expr, reshuffle};
use alex3_core::{cover, expr, io};

#[derive(Parser)]
#[command(name = "alex3", version, about = "Calculus for closed Alexandrov 3-spaces")]
struct Cli {
    /// Merge additional catalog entries from a file (built-ins cannot be redefined)
    #[arg(long, global = true, value_name = "PATH")]
    catalog: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Seed for the randomized self-tests
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Print the normal prime decomposition of an expression
    Normalize { expr: String },
    /// Decide equivalence of two expressions: Yes, No with a certificate, or Unknown
    Compare { left: String, right: String },
    /// Print singular count, first homology, and flags
    Invariants { expr: String },
    /// Emit the colored P2-graph of the normal form
    Graph { expr: String },
    /// Print the double branched cover of a singular expression
    Cover { expr: String },
    /// Check a two-sheeted piece-cover description
    VerifyCover { file: PathBuf },
    /// Generalized Dehn surgery commands
    Surgery {
        #[command(subcommand)]
        action: SurgeryAction,
    },
    /// List the gluings of the five non-negatively curved blocks
    EnumerateGluings,
    /// List the catalog
    Catalog,
    /// Run the seeded randomized checks
    SelfTest,
}

#[derive(Subcommand)]
enum SurgeryAction {
    /// Validate a surgery description file
    Check { file: PathBuf },
    /// Realize a surgery description file as a closed expression
    Realize { file: PathBuf },
    /// Print a surgery description whose realization has the expression's singular count
    Skeleton { expr: String },
    /// Print the 4-dimensional filling recipe for an expression
    Fill4d { expr: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn load_catalog(cli: &Cli) -> Result<Catalog, String> {
    let mut catalog = Catalog::builtin();
    if let Some(path) = &cli.catalog {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let entries = io::catalog_text::parse_catalog(&text).map_err(|e| e.to_string())?;
        catalog.merge(entries).map_err(|e| e.to_string())?;
    }
    Ok(catalog)
}

fn run(cli: &Cli) -> Result<String, String> {
    let catalog = load_catalog(cli)?;
    let parse = |text: &str| io::parse_expr(&catalog, text).map_err(|e| e.to_string());
    let machine = cli.format == Format::Machine;
    let mut out = String::new();

    match &cli.command {
        Command::Normalize { expr } => {
            let nf = normal_form(&parse(expr)?).map_err(|e| e.to_string())?;
            if machine {
                writeln!(out, "normal_form: {nf}").unwrap();
                writeln!(out, "clusters: {}", nf.clusters.len()).unwrap();
                writeln!(out, "manifold_summands: {}", nf.manifold_summands.len()).unwrap();
                writeln!(out, "s2_bundles: {}", nf.s2_bundle_count()).unwrap();
            } else {
                writeln!(out, "{nf}").unwrap();
            }
        }
        Command::Compare { left, right } => {
            let (l, r) = (parse(left)?, parse(right)?);
            let verdict = equivalent(&catalog, &l, &r).map_err(|e| e.to_string())?;
            match verdict {
                Equivalence::Yes => {
                    if machine {
                        writeln!(out, "verdict: yes").unwrap();
                    } else {
                        writeln!(out, "Yes").unwrap();
                    }
                }
                Equivalence::No(cert) => {
                    let (lv, rv) = cert.sides();
                    if machine {
                        writeln!(out, "verdict: no").unwrap();
                        writeln!(out, "certificate: {}", cert.kind()).unwrap();
                        writeln!(out, "left: {lv}").unwrap();
                        writeln!(out, "right: {rv}").unwrap();
                    } else {
                        writeln!(out, "No: {} certificate", cert.kind()).unwrap();
                        writeln!(out, "  left:  {lv}").unwrap();
                        writeln!(out, "  right: {rv}").unwrap();
                    }
                }
                Equivalence::Unknown => {
                    if machine {
                        writeln!(out, "verdict: unknown").unwrap();
                    } else {
                        writeln!(out, "Unknown").unwrap();
                    }
                }
            }
        }
        Command::Invariants { expr: text } => {
            let e = parse(text)?;
            writeln!(out, "expr: {}", io::format_expr(&e)).unwrap();
            writeln!(out, "singular_count: {}", e.singular_count()).unwrap();
            let homology = h1(&e).map_err(|e| e.to_string())?;
            writeln!(
                out,
                "h1: {}",
                homology.map_or("unknown".to_string(), |g| g.to_string())
            )
            .unwrap();
            let tri = |v: Option<bool>| v.map_or("unknown".to_string(), |b| b.to_string());
            writeln!(out, "manifold: {}", e.is_manifold_expr()).unwrap();
            writeln!(out, "orientable: {}", tri(e.orientable())).unwrap();
            writeln!(out, "prime: {}", tri(expr::is_prime(&e).map_err(|e| e.to_string())?))
                .unwrap();
            writeln!(
                out,
                "irreducible: {}",
                tri(expr::is_irreducible(&e).map_err(|e| e.to_string())?)
            )
            .unwrap();
        }
        Command::Graph { expr } => {
            match graph_of(&parse(expr)?).map_err(|e| e.to_string())? {
                Some(g) => {
                    out.push_str(&g.to_adjacency_text());
                    if !machine {
                        out.push('\n');
                        out.push_str(&g.to_dot());
                    }
                }
                None => writeln!(out, "unknown: a cluster member has no declared graph").unwrap(),
            }
        }
        Command::Cover { expr } => {
            let e = parse(expr)?;
            match cover::double_branched_cover(&catalog, &e).map_err(|e| e.to_string())? {
                Some(cover) => writeln!(out, "{}", io::format_expr(&cover)).unwrap(),
                None => {
                    writeln!(out, "unknown: a singular atom has no cover entry").unwrap()
                }
            }
        }
        Command::VerifyCover { file } => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
            let pc = io::files::parse_piece_cover(&text).map_err(|e| e.to_string())?;
            writeln!(out, "valid: {}", cover::verify_two_sheeted(&pc)).unwrap();
        }
        Command::Surgery { action } => run_surgery(&catalog, action, &mut out)?,
        Command::EnumerateGluings => {
            for ((a, b), result) in catalog.enumerate_gluings() {
                let nf = normal_form(&result).map_err(|e| e.to_string())?;
                if machine {
                    writeln!(out, "{a}+{b}: {nf}").unwrap();
                } else {
                    writeln!(out, "{a} + {b} -> {nf}").unwrap();
                }
            }
        }
        Command::Catalog => {
            for entry in catalog.entries() {
                match entry {
                    Entry::Atom(a) => {
                        let h1 = a
                            .h1
                            .as_ref()
                            .map_or("unknown".to_string(), |g| g.to_string());
                        writeln!(
                            out,
                            "atom {}: sites={} h1={h1}{}",
                            a.name,
                            a.singular_sites.len(),
                            a.double_branched_cover
                                .as_deref()
                                .map(|c| format!(" cover={c}"))
                                .unwrap_or_default()
                        )
                        .unwrap();
                    }
                    Entry::Block(b) => {
                        let boundary: Vec<&str> =
                            b.boundary.iter().map(|c| c.kind.as_str()).collect();
                        writeln!(
                            out,
                            "block {}: boundary={} sites={}{}",
                            b.name,
                            boundary.join(","),
                            b.singular_sites.len(),
                            b.double_cover
                                .as_deref()
                                .map(|c| format!(" cover={c}"))
                                .unwrap_or_default()
                        )
                        .unwrap();
                    }
                }
            }
        }
        Command::SelfTest => run_self_test(&catalog, cli.seed, &mut out)?,
    }
    Ok(out)
}

fn run_surgery(catalog: &Catalog, action: &SurgeryAction, out: &mut String) -> Result<(), String> {
    let read_description = |path: &PathBuf| -> Result<_, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        io::files::parse_surgery(&text).map_err(|e| e.to_string())
    };
    match action {
        SurgeryAction::Check { file } => {
            let d = read_description(file)?;
            validate(&d).map_err(|e| e.to_string())?;
            writeln!(out, "ok").unwrap();
        }
        SurgeryAction::Realize { file } => {
            let d = read_description(file)?;
            let e = realize(catalog, &d).map_err(|e| e.to_string())?;
            writeln!(out, "{}", io::format_expr(&e)).unwrap();
        }
        SurgeryAction::Skeleton { expr } => {
            let e = io::parse_expr(catalog, expr).map_err(|e| e.to_string())?;
            let d = surgery_skeleton(&e).map_err(|e| e.to_string())?;
            out.push_str(&d.to_string());
        }
        SurgeryAction::Fill4d { expr } => {
            let e = io::parse_expr(catalog, expr).map_err(|e| e.to_string())?;
            let recipe = filling_4d(&e).map_err(|e| e.to_string())?;
            writeln!(out, "two_handles: {}", recipe.two_handles).unwrap();
            writeln!(out, "y_pieces: {}", recipe.y_pieces).unwrap();
            writeln!(out, "boundary: {}", io::format_expr(&recipe.boundary)).unwrap();
        }
    }
    Ok(())
}

fn run_self_test(catalog: &Catalog, seed: u64, out: &mut String) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    const PARITY_CASES: usize = 500;
    for _ in 0..PARITY_CASES {
        let e = random_expr(catalog, &mut rng, 8);
        if !e.singular_count().is_multiple_of(2) {
            return Err(format!("parity violated by {}", io::format_expr(&e)));
        }
    }
    writeln!(out, "parity: ok ({PARITY_CASES} expressions)").unwrap();

    const CONFLUENCE_CASES: usize = 200;
    for i in 0..CONFLUENCE_CASES as u64 {
        let e = random_expr(catalog, &mut rng, 10);
        let reference = normal_form(&e).map_err(|e| e.to_string())?.to_string();
        let shuffled = reshuffle(&e, &mut rng);
        let variant = normal_form_with(&shuffled, RuleOrder::Seeded(seed ^ i))
            .map_err(|e| e.to_string())?
            .to_string();
        if reference != variant {
            return Err(format!(
                "confluence violated by {}: `{reference}` vs `{variant}`",
                io::format_expr(&e)
            ));
        }
    }
    writeln!(out, "confluence: ok ({CONFLUENCE_CASES} expressions)").unwrap();

    const ROUND_TRIP_CASES: usize = 300;
    for _ in 0..ROUND_TRIP_CASES {
        let e = random_expr(catalog, &mut rng, 8);
        let printed = io::format_expr(&e);
        let reparsed = io::parse_expr(catalog, &printed).map_err(|e| e.to_string())?;
        if reparsed != e {
            return Err(format!("round trip changed `{printed}`"));
        }
    }
    writeln!(out, "round-trip: ok ({ROUND_TRIP_CASES} expressions)").unwrap();

    const EQUIVALENCE_CASES: usize = 100;
    for _ in 0..EQUIVALENCE_CASES {
        let e = random_expr(catalog, &mut rng, 8);
        let variant = reshuffle(&e, &mut rng);
        match equivalent(catalog, &e, &variant).map_err(|e| e.to_string())? {
            Equivalence::Yes => {}
            other => {
                return Err(format!(
                    "reshuffled expression not recognized: {other:?} for {}",
                    io::format_expr(&e)
                ))
            }
        }
    }
    writeln!(out, "equivalence: ok ({EQUIVALENCE_CASES} expressions)").unwrap();

    writeln!(out, "self-test passed (seed {seed})").unwrap();
    Ok(())
}
