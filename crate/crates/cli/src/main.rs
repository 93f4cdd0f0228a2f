//! `dpl` — command-line front end for the DPL workbench: model checking,
//! postulate/schema audits, dynamic-equivalence partitions, and random
//! model generation.

use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dpl_core::equivalence::dynamic_equivalence;
use dpl_core::harness::{
    build_registry, random_model, run_audit, AuditConfig, AuditItem, EnumerateSpec, RandomSpec,
    TableOpSpec, ValuationScheme,
};
use dpl_core::model::{self, model_to_json};
use dpl_core::postulates::{check_schema, SchemaId, Verdict};
use dpl_core::semantics::{satisfies, valid_in_model};
use dpl_core::{DplError, DynamicModel, PreferenceModel};

#[derive(Parser)]
#[command(name = "dpl", about = "Dynamic preference logic workbench", version)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Model-check a formula, at one world or for validity in the model.
    Check {
        #[command(flatten)]
        target: Target,
        /// Formula text.
        #[arg(long)]
        formula: String,
        /// Evaluate at this world instead of checking validity.
        #[arg(long)]
        world: Option<String>,
    },
    /// Run postulate/schema/fact checks over a universe of models.
    Audit {
        /// JSON config file; inline flags extend or replace it.
        #[arg(long)]
        config: Option<String>,
        /// Enumerate all preorders on this many worlds.
        #[arg(long)]
        enumerate: Option<usize>,
        /// Atoms for enumerated or random universes (comma separated).
        #[arg(long, value_delimiter = ',')]
        atoms: Vec<String>,
        /// Named fixture to include (repeatable).
        #[arg(long)]
        fixture: Vec<String>,
        /// Model file to include (repeatable).
        #[arg(long)]
        model: Vec<String>,
        /// Random universe: number of worlds.
        #[arg(long)]
        random: Option<usize>,
        /// Random universe: number of models.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Random universe seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Operator to audit (repeatable).
        #[arg(long = "op")]
        ops: Vec<String>,
        /// Table operator as NAME=PATH or NAME@SEED (repeatable).
        #[arg(long = "table-op")]
        table_ops: Vec<String>,
        /// Postulates to check (comma separated).
        #[arg(long, value_delimiter = ',')]
        postulates: Vec<String>,
        /// Axiom schemata to check (comma separated).
        #[arg(long, value_delimiter = ',')]
        schemas: Vec<String>,
        /// Conditional-belief facts to check (comma separated).
        #[arg(long, value_delimiter = ',')]
        facts: Vec<String>,
        /// Write the JSON-lines report here as well.
        #[arg(long)]
        output: Option<String>,
    },
    /// Check one axiom schema on one model.
    Schema {
        #[command(flatten)]
        target: Target,
        /// Schema identifier, e.g. dp1ax or lexrevsystem.
        #[arg(long)]
        schema: SchemaId,
    },
    /// Print the dynamic-equivalence partition of a model.
    Equiv {
        #[command(flatten)]
        target: Target,
    },
    /// Generate a seeded random model as JSON.
    Gen {
        #[arg(long)]
        worlds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "p,q")]
        atoms: Vec<String>,
    },
}

#[derive(Args)]
struct Target {
    /// Model file path, or a fixture name (e1, f1_identity, f1_total).
    #[arg(long)]
    model: String,
    /// Operator name (rev, ctr, id, star, or a table operator).
    #[arg(long, default_value = "rev")]
    op: String,
}

fn load_model(name: &str) -> Result<PreferenceModel, DplError> {
    if let Some(m) = model::fixture(name) {
        return Ok(m);
    }
    model::model_from_json(&std::fs::read_to_string(name)?)
}

fn dynamic(target: &Target) -> Result<DynamicModel, DplError> {
    let m = load_model(&target.model)?;
    // Audit-style registry so `star` and the builtins resolve by name.
    let registry = Arc::new(build_registry(&AuditConfig::default(), &[])?);
    registry.get(&target.op)?;
    Ok(DynamicModel::with_registry(m, target.op.clone(), registry))
}

fn emit_item(format: Format, item: &AuditItem) {
    match format {
        Format::Json => println!("{}", serde_json::to_string(item).unwrap()),
        Format::Text => {
            let tag = match item.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
            };
            let mut line = format!("{tag} {}", item.check);
            if let Some(phi) = &item.phi {
                line.push_str(&format!("  phi={phi}"));
            }
            if let Some(w) = &item.witness {
                if !w.worlds.is_empty() {
                    line.push_str(&format!("  worlds={}", w.worlds.join(",")));
                }
                if !w.detail.is_empty() {
                    line.push_str(&format!("  {}", w.detail));
                }
            }
            println!("{line}");
        }
    }
}

fn parse_table_op(text: &str) -> Result<TableOpSpec, DplError> {
    if let Some((name, path)) = text.split_once('=') {
        Ok(TableOpSpec {
            name: name.to_string(),
            path: Some(path.to_string()),
            seed: None,
        })
    } else if let Some((name, seed)) = text.split_once('@') {
        let seed = seed
            .parse()
            .map_err(|_| DplError::Config(format!("bad table operator seed in `{text}`")))?;
        Ok(TableOpSpec {
            name: name.to_string(),
            path: None,
            seed: Some(seed),
        })
    } else {
        Err(DplError::Config(format!(
            "table operator `{text}` must be NAME=PATH or NAME@SEED"
        )))
    }
}

fn run(cli: Cli) -> Result<bool, DplError> {
    match cli.command {
        Command::Check {
            target,
            formula,
            world,
        } => {
            let d = dynamic(&target)?;
            let f = dpl_core::formula::parse(&formula)?;
            let (verdict, witness_world) = match &world {
                Some(w) => (satisfies(&d, w, &f)?, None),
                None => {
                    let (ok, counter) = valid_in_model(&d, &f)?;
                    (ok, counter)
                }
            };
            let item = AuditItem {
                check: match &world {
                    Some(w) => format!("{}:satisfies@{w}", target.op),
                    None => format!("{}:valid", target.op),
                },
                model: d.base.fingerprint(),
                phi: Some(dpl_core::formula::render(&f)),
                verdict: if verdict { Verdict::Pass } else { Verdict::Fail },
                witness: witness_world.map(|w| dpl_core::postulates::Witness {
                    model: d.base.fingerprint(),
                    phi: None,
                    worlds: vec![w],
                    formulas: vec![],
                    detail: "countermodel world".to_string(),
                }),
            };
            emit_item(cli.format, &item);
            Ok(verdict)
        }
        Command::Audit {
            config,
            enumerate,
            atoms,
            fixture,
            model,
            random,
            count,
            seed,
            ops,
            table_ops,
            postulates,
            schemas,
            facts,
            output,
        } => {
            let mut cfg: AuditConfig = match config {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                None => AuditConfig::default(),
            };
            if let Some(worlds) = enumerate {
                cfg.enumerate = Some(EnumerateSpec {
                    worlds,
                    atoms: atoms.clone(),
                    scheme: ValuationScheme::All,
                });
            }
            if let Some(worlds) = random {
                cfg.random = Some(RandomSpec {
                    worlds,
                    atoms: atoms.clone(),
                    count,
                    seed,
                });
            }
            cfg.fixtures.extend(fixture);
            cfg.files.extend(model);
            cfg.operators.extend(ops);
            for t in &table_ops {
                cfg.table_operators.push(parse_table_op(t)?);
            }
            cfg.postulates.extend(postulates);
            cfg.schemas.extend(schemas);
            cfg.facts.extend(facts);
            let report = run_audit(&cfg)?;
            for item in &report.items {
                emit_item(cli.format, item);
            }
            if cli.format == Format::Text {
                println!(
                    "{} checks: {} passed, {} failed ({} instances)",
                    report.items.len(),
                    report.passed,
                    report.failed,
                    report.checks
                );
            }
            if let Some(path) = output {
                std::fs::write(path, report.to_json_lines() + "\n")?;
            }
            Ok(report.all_passed())
        }
        Command::Schema { target, schema } => {
            let d = dynamic(&target)?;
            let r = check_schema(&d, schema, None)?;
            let ok = r.holds();
            let witness = r.witnesses.into_iter().next();
            let item = AuditItem {
                check: format!("{}:schema:{schema}", target.op),
                model: d.base.fingerprint(),
                phi: witness.as_ref().and_then(|w| w.phi.clone()),
                verdict: r.verdict,
                witness,
            };
            emit_item(cli.format, &item);
            Ok(ok)
        }
        Command::Equiv { target } => {
            let d = dynamic(&target)?;
            let partition = dynamic_equivalence(&d)?;
            match cli.format {
                Format::Json => {
                    let blocks: Vec<Vec<String>> = partition
                        .blocks
                        .iter()
                        .map(|b| d.base.world_names(*b))
                        .collect();
                    let separators: Vec<String> = partition
                        .separators
                        .iter()
                        .map(dpl_core::formula::render)
                        .collect();
                    println!(
                        "{}",
                        serde_json::json!({ "blocks": blocks, "separators": separators })
                    );
                }
                Format::Text => {
                    for (b, sep) in partition.blocks.iter().zip(&partition.separators) {
                        println!(
                            "{{{}}}  {}",
                            d.base.world_names(*b).join(", "),
                            dpl_core::formula::render(sep)
                        );
                    }
                }
            }
            Ok(true)
        }
        Command::Gen {
            worlds,
            seed,
            atoms,
        } => {
            let m = random_model(worlds, &atoms, seed)?;
            println!("{}", model_to_json(&m));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
