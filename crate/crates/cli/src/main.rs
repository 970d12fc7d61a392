//! Command-line surface: verify machines against claimed maskable sets,
//! classify target-set structures, and reproduce the catalog examples.
//!
//! Exit codes: 0 success/pass, 2 verification failure, 1 usage or input
//! error. Reports are JSON on stdout and byte-identical across runs with the
//! same seed and inputs; the seed comes from `--seed`, falling back to the
//! `MASKDISK_SEED` environment variable and then a fixed default.

mod schema;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use maskdisk_core::catalog::{self, CatalogItem, ExampleId};
use maskdisk_core::classify::{classify_qubit_maskable_set, classify_qutrit_target_set};
use maskdisk_core::masking::{verify_condition1, verify_condition2};
use maskdisk_core::optimize::SearchConfig;
use maskdisk_core::{MarginalSpec, Tolerance};

use schema::{
    parse_params, ClaimedSetFile, Diagnostics, DiskFile, MachineFile, Report, SpecFile, StateFile,
    SubspaceFile, TolerancesOut, Witness,
};

/// Default seed when neither `--seed` nor `MASKDISK_SEED` is set
/// (the bytes of "maskdisk").
const DEFAULT_SEED: u64 = 0x6d61_736b_6469_736b;

#[derive(Parser)]
#[command(
    name = "maskdisk",
    version,
    about = "Verify and classify quantum-information masking machines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Qubit,
    Qutrit,
}

#[derive(Subcommand)]
enum Command {
    /// Check both masking conditions of a machine against a claimed set
    Verify {
        /// Machine JSON file ({"dims": [dA, dB], "columns": [...]})
        machine: PathBuf,
        /// Claimed maskable set JSON file ({"states": [...], "disks": [...]})
        claimed: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Algebraic tolerance (default 1e-9)
        #[arg(long = "tol-alg")]
        tol_alg: Option<f64>,
        /// Optimization tolerance (default 1e-6)
        #[arg(long = "tol-opt")]
        tol_opt: Option<f64>,
    },
    /// Classify the structure of a maskable or target set
    Classify {
        /// Machine JSON (qubit mode) or subspace JSON (qutrit mode)
        subspace: PathBuf,
        /// Marginal spec JSON; required in qutrit mode
        spec: Option<PathBuf>,
        #[arg(long)]
        mode: Mode,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "tol-alg")]
        tol_alg: Option<f64>,
        #[arg(long = "tol-opt")]
        tol_opt: Option<f64>,
    },
    /// Print a catalog example (optionally a family member) as JSON
    Example {
        /// Example id; see `list-examples`
        id: String,
        /// Family parameters as a JSON object, e.g. '{"xi": 0.4, "eta": 1.0}'
        #[arg(long)]
        params: Option<String>,
        /// Also write the artifact files into this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the catalog example ids
    ListExamples,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

type CliResult<T> = Result<T, String>;

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Verify {
            machine,
            claimed,
            seed,
            tol_alg,
            tol_opt,
        } => cmd_verify(
            &machine,
            &claimed,
            resolve_seed(seed)?,
            tolerance(tol_alg, tol_opt)?,
        ),
        Command::Classify {
            subspace,
            spec,
            mode,
            seed,
            tol_alg,
            tol_opt,
        } => cmd_classify(
            &subspace,
            spec.as_deref(),
            mode,
            resolve_seed(seed)?,
            tolerance(tol_alg, tol_opt)?,
        ),
        Command::Example { id, params, out } => cmd_example(&id, params.as_deref(), out.as_deref()),
        Command::ListExamples => {
            for id in ExampleId::ALL {
                println!("{id}");
            }
            Ok(0)
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("MASKDISK_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| format!("MASKDISK_SEED is not a valid u64: {v:?}")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn tolerance(alg: Option<f64>, opt: Option<f64>) -> CliResult<Tolerance> {
    let defaults = Tolerance::default();
    Tolerance::new(
        alg.unwrap_or(defaults.algebraic),
        opt.unwrap_or(defaults.optimization),
    )
    .map_err(|e| e.to_string())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn emit(report: &Report) -> CliResult<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    println!("{text}");
    Ok(())
}

fn cmd_verify(
    machine_path: &Path,
    claimed_path: &Path,
    seed: u64,
    tol: Tolerance,
) -> CliResult<u8> {
    let machine_file: MachineFile = read_json(machine_path)?;
    let machine = machine_file
        .to_machine(&tol)
        .map_err(|e| format!("machine: {e}"))?;
    let claimed_file: ClaimedSetFile = read_json(claimed_path)?;
    let claimed = claimed_file
        .to_claimed(&tol)
        .map_err(|e| format!("claimed set: {e}"))?;
    if claimed.is_empty() {
        return Err("claimed set is empty; nothing to verify against".into());
    }
    for state in claimed
        .states
        .iter()
        .chain(claimed.disks.iter().flat_map(|d| d.basis()))
    {
        if state.dim() != machine.n() {
            return Err(format!(
                "claimed set lives in dimension {}, machine input is {}",
                state.dim(),
                machine.n()
            ));
        }
    }

    let samples = claimed
        .sample_states(48)
        .map_err(|e| format!("claimed set: {e}"))?;
    let cond1 = verify_condition1(&machine, &samples, &tol).map_err(|e| e.to_string())?;
    if !cond1.passed {
        let report = Report {
            verdict: "fail".into(),
            witnesses: vec![],
            diagnostics: diagnostics(cond1.max_deviation, 0, seed, &tol, 0, 0),
        };
        emit(&report)?;
        return Ok(2);
    }

    let cfg = SearchConfig::projective(seed);
    let cond2 =
        verify_condition2(&machine, &claimed, &cond1, &cfg, &tol).map_err(|e| e.to_string())?;
    let report = Report {
        verdict: if cond2.passed { "pass" } else { "fail" }.into(),
        witnesses: cond2
            .counterexamples
            .iter()
            .map(|s| Witness::State {
                state: StateFile::from_state(s),
            })
            .collect(),
        diagnostics: diagnostics(
            cond1.max_deviation,
            0,
            seed,
            &tol,
            cond2.matches,
            cond2.counterexamples.len(),
        ),
    };
    emit(&report)?;
    Ok(if cond2.passed { 0 } else { 2 })
}

fn cmd_classify(
    subspace_path: &Path,
    spec_path: Option<&Path>,
    mode: Mode,
    seed: u64,
    tol: Tolerance,
) -> CliResult<u8> {
    let structure = match mode {
        Mode::Qubit => {
            let machine_file: MachineFile = read_json(subspace_path)?;
            let machine = machine_file
                .to_machine(&tol)
                .map_err(|e| format!("machine: {e}"))?;
            if let Some(path) = spec_path {
                let spec_file: SpecFile = read_json(path)?;
                let spec = spec_file.to_spec().map_err(|e| e.to_string())?;
                check_spec_against_machine(&machine, &spec, &tol)?;
            }
            let cfg = SearchConfig::projective(seed);
            classify_qubit_maskable_set(&machine, &cfg, &tol).map_err(|e| e.to_string())?
        }
        Mode::Qutrit => {
            let spec_path = spec_path.ok_or("qutrit mode requires a spec file")?;
            let subspace: SubspaceFile = read_json(subspace_path)?;
            let spec_file: SpecFile = read_json(spec_path)?;
            let spec = spec_file.to_spec().map_err(|e| e.to_string())?;
            let states = subspace
                .states
                .iter()
                .map(|s| s.to_state())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("subspace: {e}"))?;
            let cfg = SearchConfig::block_unitary(seed);
            classify_qutrit_target_set(&states, &spec, &cfg, &tol).map_err(|e| e.to_string())?
        }
    };

    let mut witnesses: Vec<Witness> = structure
        .disk_witnesses
        .iter()
        .map(|d| Witness::Disk {
            disk: DiskFile::from_disk(d),
        })
        .collect();
    witnesses.extend(structure.state_witnesses.iter().map(|s| Witness::State {
        state: StateFile::from_state(s),
    }));
    let report = Report {
        verdict: structure.tag.to_string(),
        witnesses,
        diagnostics: diagnostics(
            structure.diagnostics.max_witness_residual,
            structure.diagnostics.disks_found,
            seed,
            &tol,
            structure.diagnostics.solutions_found,
            structure.diagnostics.uncovered,
        ),
    };
    emit(&report)?;
    Ok(0)
}

fn check_spec_against_machine(
    machine: &maskdisk_core::MaskingMachine,
    spec: &MarginalSpec,
    tol: &Tolerance,
) -> CliResult<()> {
    use maskdisk_core::linalg::eig_hermitian;
    use maskdisk_core::masking::marginals_of;
    let image = machine
        .image(0)
        .and_then(|s| marginals_of(&s))
        .map_err(|e| e.to_string())?;
    let (values, _) = eig_hermitian(&image.0, tol).map_err(|e| e.to_string())?;
    let expected = spec.eigenvalues();
    let support: Vec<f64> = values.into_iter().filter(|&l| l > 1e-9).collect();
    if support.len() != expected.len()
        || support
            .iter()
            .zip(&expected)
            .any(|(a, b)| (a - b).abs() > 1e-6)
    {
        return Err("spec eigenvalues do not match the machine's marginals".into());
    }
    Ok(())
}

/// Everything `example` can print, in one envelope.
#[derive(serde::Serialize)]
struct ExampleDoc {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    machine: Option<MachineFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    claimed_set: Option<ClaimedSetFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_set: Option<SubspaceFile>,
    spec: SpecFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<StateFile>,
}

fn cmd_example(id: &str, params: Option<&str>, out: Option<&Path>) -> CliResult<u8> {
    let id: ExampleId = id.parse().map_err(|e| format!("{e}"))?;
    let item = catalog::build(id).map_err(|e| e.to_string())?;
    let mut doc = match &item {
        CatalogItem::Machine { machine, claimed } => ExampleDoc {
            id: id.to_string(),
            machine: Some(MachineFile::from_machine(machine)),
            claimed_set: claimed.as_ref().map(ClaimedSetFile::from_claimed),
            target_set: None,
            spec: SpecFile::from_spec(
                machine
                    .claimed_spec()
                    .ok_or("catalog machine carries no spec")?,
            ),
            params: None,
            state: None,
        },
        CatalogItem::TargetSet { states, spec } => ExampleDoc {
            id: id.to_string(),
            machine: None,
            claimed_set: None,
            target_set: Some(SubspaceFile {
                states: states.iter().map(StateFile::from_state).collect(),
            }),
            spec: SpecFile::from_spec(spec),
            params: None,
            state: None,
        },
    };

    if let Some(json) = params {
        let parsed = parse_params(id, json).map_err(|e| e.to_string())?;
        let state = catalog::family_state(id, &parsed).map_err(|e| e.to_string())?;
        doc.params = Some(serde_json::to_value(&parsed).map_err(|e| e.to_string())?);
        doc.state = Some(StateFile::from_state(&state));
    }

    let text = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
    println!("{text}");

    if let Some(dir) = out {
        std::fs::create_dir_all(dir)
            .map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        let write = |name: String, value: String| -> CliResult<()> {
            let path = dir.join(name);
            std::fs::write(&path, value + "\n")
                .map_err(|e| format!("cannot write {}: {e}", path.display()))
        };
        fn pretty<T: serde::Serialize>(v: &T) -> CliResult<String> {
            serde_json::to_string_pretty(v).map_err(|e| e.to_string())
        }
        if let Some(machine) = &doc.machine {
            write(format!("{id}.machine.json"), pretty(machine)?)?;
        }
        if let Some(claimed) = &doc.claimed_set {
            write(format!("{id}.claimed.json"), pretty(claimed)?)?;
        }
        if let Some(target) = &doc.target_set {
            write(format!("{id}.target.json"), pretty(target)?)?;
        }
        write(format!("{id}.spec.json"), pretty(&doc.spec)?)?;
        if let Some(state) = &doc.state {
            write(format!("{id}.state.json"), pretty(state)?)?;
        }
    }
    Ok(0)
}

fn diagnostics(
    max_marginal_deviation: f64,
    disks_found: usize,
    seed: u64,
    tol: &Tolerance,
    solutions_found: usize,
    counterexamples: usize,
) -> Diagnostics {
    Diagnostics {
        max_marginal_deviation,
        disks_found,
        seed,
        tolerances: TolerancesOut {
            algebraic: tol.algebraic,
            optimization: tol.optimization,
        },
        solutions_found,
        counterexamples,
    }
}
