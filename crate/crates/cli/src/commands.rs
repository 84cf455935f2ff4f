//! Command-line definition and the command runner.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use prodform::equilibria::EquilibriumReport;
use prodform::normal_form::DEFAULT_PROFILE_CAP;
use prodform::wmodel::{
    PlayabilityOptions, PlayabilityReport, PlayabilityWitness, ProfileSelection,
};
use prodform::{
    nash_equilibria, nash_stackelberg, normal_form_matrix, stackelberg_strategies, Error,
    Evaluator, Execution, SolveOptions, StackelbergMode, Strategy, WGame,
};

use crate::gamefile::{export_custom, load_game, LoadError, LoadErrorKind};
use crate::report::{
    nums, AgentCount, AgentStrategy, CommandEcho, Counts, ErrorReport, Format, Num,
    PlayabilityVerdict, PlayerCount, ProfileReport, Report, Status, StrategyRef, ValidationSummary,
    Verdict, WitnessReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

/// Above this many strategies a player's strategies are counted, not listed.
const LIST_LIMIT: u128 = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "prodform",
    version,
    about = "Build, validate and solve finite games in product form"
)]
pub struct Cli {
    /// Game-definition file (JSON).
    #[arg(long, global = true)]
    pub game: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Maximum number of profiles enumerated by one solve.
    #[arg(long, global = true, default_value_t = DEFAULT_PROFILE_CAP)]
    pub cap: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Evaluate profiles on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Add wall-clock time to the report (makes it run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Load the game and report self-information, ordering and playability.
    Validate,
    /// Strategy counts per agent and player, with labels for small sets.
    Strategies,
    /// Check that the closed-loop equation has a unique solution.
    Playability {
        /// `all`, or `sample=N,seed=S`.
        #[arg(long, default_value = "all", value_parser = parse_selection)]
        mode: Selection,
    },
    /// Two-player normal-form matrix.
    NormalForm {
        /// Also write the matrix as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Pure Nash equilibria.
    Nash,
    /// Stackelberg strategies of the leaders.
    Stackelberg {
        /// optimistic, pessimistic, theta=T, risk:expectation, risk:worst-case or risk:cvar=A.
        #[arg(long, value_parser = parse_mode)]
        mode: StackelbergMode,
    },
    /// Stackelberg strategies paired with the followers' equilibrium responses.
    NashStackelberg {
        #[arg(long, value_parser = parse_mode)]
        mode: StackelbergMode,
    },
    /// Write the game in the custom schema.
    Export,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    Sample { n: usize, seed: u64 },
}

impl Selection {
    fn name(self) -> String {
        match self {
            Selection::All => "all".into(),
            Selection::Sample { n, seed } => format!("sample={n},seed={seed}"),
        }
    }

    fn to_core(self) -> ProfileSelection {
        match self {
            Selection::All => ProfileSelection::All,
            Selection::Sample { n, seed } => ProfileSelection::Sample { n, seed },
        }
    }
}

pub fn parse_selection(s: &str) -> Result<Selection, String> {
    if s == "all" {
        return Ok(Selection::All);
    }
    let bad = || format!("`{s}`: expected `all` or `sample=N,seed=S`");
    let rest = s.strip_prefix("sample=").ok_or_else(bad)?;
    let (n, seed) = rest.split_once(",seed=").ok_or_else(bad)?;
    Ok(Selection::Sample {
        n: n.parse().map_err(|_| bad())?,
        seed: seed.parse().map_err(|_| bad())?,
    })
}

/// Parses a mode, folding θ = 1 into optimistic and θ = 0 into pessimistic
/// so equivalent requests give identical reports.
pub fn parse_mode(s: &str) -> Result<StackelbergMode, String> {
    let mode = StackelbergMode::from_str(s).map_err(|e| e.to_string())?;
    Ok(canonical_mode(mode))
}

pub fn canonical_mode(mode: StackelbergMode) -> StackelbergMode {
    match mode {
        StackelbergMode::Theta(1.0) => StackelbergMode::Optimistic,
        StackelbergMode::Theta(0.0) => StackelbergMode::Pessimistic,
        m => m,
    }
}

/// What a run produced: the rendered document and the process exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
    /// One-line summary for standard error when the run failed.
    pub diagnostic: Option<String>,
}

struct Failure {
    status: Status,
    code: i32,
    error: ErrorReport,
}

impl Failure {
    fn from_core(e: Error, location: &str) -> Self {
        let (status, code) = match e {
            Error::CapacityExceeded { .. } => (Status::CapacityExceeded, EXIT_CAPACITY),
            Error::NotPlayable { .. } => (Status::NotPlayable, EXIT_INVALID),
            _ => (Status::Error, EXIT_INVALID),
        };
        Failure {
            status,
            code,
            error: ErrorReport {
                kind: error_kind(&e).into(),
                location: location.into(),
                message: e.to_string(),
                witnesses: Vec::new(),
            },
        }
    }

    fn from_load(e: LoadError) -> Self {
        let capacity = e.is_capacity();
        let kind = match &e.kind {
            LoadErrorKind::Io(_) => "io-error".to_string(),
            LoadErrorKind::Parse(_) => "parse-error".to_string(),
            LoadErrorKind::Schema(_) => "schema-error".to_string(),
            LoadErrorKind::Model(m) => error_kind(m).to_string(),
        };
        Failure {
            status: if capacity {
                Status::CapacityExceeded
            } else {
                Status::ValidationError
            },
            code: if capacity {
                EXIT_CAPACITY
            } else {
                EXIT_INVALID
            },
            error: ErrorReport {
                kind,
                location: e.location.clone(),
                message: e.detail(),
                witnesses: Vec::new(),
            },
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::SelfInformationViolation { .. } => "self-information-violation",
        Error::CapacityExceeded { .. } => "capacity-exceeded",
        Error::NotPlayable { .. } => "not-playable",
        Error::NoRoles => "no-roles",
        Error::IndeterminateValue => "indeterminate-value",
        Error::InvalidParameter { .. } => "invalid-parameter",
        Error::InvalidDistribution { .. } => "invalid-distribution",
        _ => "model-error",
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate => "validate",
        Command::Strategies => "strategies",
        Command::Playability { .. } => "playability",
        Command::NormalForm { .. } => "normal-form",
        Command::Nash => "nash",
        Command::Stackelberg { .. } => "stackelberg",
        Command::NashStackelberg { .. } => "nash-stackelberg",
        Command::Export => "export",
    }
}

fn echo(cli: &Cli) -> CommandEcho {
    let mut args = serde_json::Map::new();
    match &cli.command {
        Command::Playability { mode } => {
            args.insert("mode".into(), Value::String(mode.name()));
        }
        Command::NormalForm { csv: Some(p) } => {
            args.insert("csv".into(), Value::String(p.display().to_string()));
        }
        Command::Stackelberg { mode } | Command::NashStackelberg { mode } => {
            args.insert("mode".into(), Value::String(mode.to_string()));
        }
        _ => {}
    }
    CommandEcho {
        name: command_name(&cli.command).into(),
        game: cli.game.as_ref().map(|p| p.display().to_string()),
        cap: cli.cap,
        execution: if cli.sequential {
            "sequential"
        } else {
            "parallel"
        }
        .into(),
        args,
    }
}

fn execution(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

/// Runs one command and renders its report; never panics on bad input.
pub fn run(cli: &Cli) -> Outcome {
    let start = Instant::now();
    let mut report = Report {
        command: echo(cli),
        status: Status::Ok,
        validation: None,
        counts: None,
        result: None,
        error: None,
        timing_ms: None,
    };
    let mut export = None;
    let code = match execute(cli, &mut report, &mut export) {
        Ok(code) => code,
        Err(f) => {
            report.status = f.status;
            report.error = Some(f.error);
            f.code
        }
    };
    if cli.timing {
        report.timing_ms = Some(Num(start.elapsed().as_secs_f64() * 1e3));
    }
    let diagnostic = report
        .error
        .as_ref()
        .map(|e| format!("{} at {}: {}", e.kind, e.location, e.message))
        .or_else(|| (code != EXIT_OK).then(|| format!("{:?}", report.status)));
    let output = match export {
        Some(text) if code == EXIT_OK => text,
        _ => report.render(cli.format),
    };
    Outcome {
        code,
        output,
        diagnostic,
    }
}

fn execute(cli: &Cli, report: &mut Report, export: &mut Option<String>) -> Result<i32, Failure> {
    let path = cli.game.as_ref().ok_or_else(|| Failure {
        status: Status::ValidationError,
        code: EXIT_INVALID,
        error: ErrorReport {
            kind: "usage".into(),
            location: "--game".into(),
            message: "a game file is required".into(),
            witnesses: Vec::new(),
        },
    })?;
    let game = load_game(path).map_err(Failure::from_load)?;

    if let Command::Export = cli.command {
        let file = export_custom(&game);
        let mut text = serde_json::to_string_pretty(&file).expect("game files serialize");
        text.push('\n');
        *export = Some(text);
        return Ok(EXIT_OK);
    }

    report.counts = Some(counts(&game));
    let selection = match cli.command {
        Command::Playability { mode } => mode,
        _ => Selection::All,
    };
    let options = PlayabilityOptions {
        cap: cli.cap,
        sequential_shortcut: true,
        max_witnesses: 16,
        execution: execution(cli),
    };
    let check = game.model.check_playability(&selection.to_core(), &options);
    let (verdict, play) = match check {
        Ok(r) => (verdict_of(&r, selection), Some(r)),
        Err(Error::CapacityExceeded { .. })
            if !matches!(cli.command, Command::Playability { .. }) =>
        {
            (
                PlayabilityVerdict {
                    verdict: Verdict::Undetermined,
                    mode: selection.name(),
                    profiles_checked: 0,
                    failures: 0,
                },
                None,
            )
        }
        Err(e) => return Err(Failure::from_core(e, "--mode")),
    };
    report.validation = Some(ValidationSummary {
        self_information: "satisfied",
        sequential_ordering: game.model.check_sequential().map(|o| {
            o.iter()
                .map(|&a| game.model.agents()[a].to_string())
                .collect()
        }),
        playability: verdict.clone(),
    });

    if verdict.verdict == Verdict::NotPlayable {
        let r = play.expect("a verdict of not playable comes from a report");
        let witnesses = r.witnesses.iter().map(|w| witness(&game, w)).collect();
        if let Command::Playability { .. } = cli.command {
            report.result = Some(json!({ "playable": false }));
        }
        return Err(Failure {
            status: Status::NotPlayable,
            code: EXIT_INVALID,
            error: ErrorReport {
                kind: "not-playable".into(),
                location: "game".into(),
                message: format!(
                    "{} of {} checked profiles lack a unique solution",
                    r.failures, r.profiles_checked
                ),
                witnesses,
            },
        });
    }

    let opts = SolveOptions {
        cap: cli.cap,
        execution: execution(cli),
    };
    let solve = |f: &dyn Fn(&Evaluator<'_>) -> prodform::Result<Value>| -> Result<Value, Failure> {
        let eval = Evaluator::new(&game, opts).map_err(|e| Failure::from_core(e, "--cap"))?;
        f(&eval).map_err(|e| Failure::from_core(e, command_name(&cli.command)))
    };

    report.result = match &cli.command {
        Command::Validate | Command::Export => None,
        Command::Playability { .. } => Some(to_value(&json!({
            "playable": verdict.verdict != Verdict::NotPlayable,
            "verdict": verdict.verdict,
        }))),
        Command::Strategies => Some(strategies(&game)),
        Command::NormalForm { csv } => Some(solve(&|eval| {
            let m = normal_form_matrix(eval)?;
            if let Some(p) = csv {
                std::fs::write(p, m.to_csv()).map_err(|e| Error::InvalidParameter {
                    name: "--csv".into(),
                    reason: format!("{}: {e}", p.display()),
                })?;
            }
            let cells: Vec<Vec<[Num; 2]>> = m
                .cells
                .iter()
                .map(|row| row.iter().map(|&(a, b)| [Num(a), Num(b)]).collect())
                .collect();
            Ok(to_value(&json!({
                "players": m.players,
                "rows": m.row_labels,
                "columns": m.col_labels,
                "cells": to_value(&cells),
            })))
        })?),
        Command::Nash => Some(solve(&|eval| {
            Ok(equilibrium_value(eval, &nash_equilibria(eval)?))
        })?),
        Command::NashStackelberg { mode } => Some(solve(&|eval| {
            Ok(equilibrium_value(eval, &nash_stackelberg(eval, *mode)?))
        })?),
        Command::Stackelberg { mode } => Some(solve(&|eval| {
            let set = stackelberg_strategies(eval, *mode)?;
            let roles = eval.game().roles.clone().ok_or(Error::NoRoles)?;
            let outcomes: Vec<Value> = set
                .outcomes
                .iter()
                .map(|o| {
                    json!({
                        "leaders": refs(eval, &roles.leaders, &o.leaders),
                        "leader_values": to_value(&nums(&o.leader_values)),
                        "follower_responses": o
                            .responses
                            .iter()
                            .map(|f| refs(eval, &roles.followers, f))
                            .collect::<Vec<_>>(),
                    })
                })
                .collect();
            Ok(json!({
                "mode": set.mode.to_string(),
                "outcomes": outcomes,
                "diagnostics": {
                    "leader_profiles_enumerated": set.leader_profiles_enumerated,
                    "infeasible_leader_profiles": set
                        .infeasible
                        .iter()
                        .map(|l| refs(eval, &roles.leaders, l))
                        .collect::<Vec<_>>(),
                },
            }))
        })?),
    };
    Ok(EXIT_OK)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report parts serialize")
}

fn verdict_of(r: &PlayabilityReport, selection: Selection) -> PlayabilityVerdict {
    let shortcut = r.profiles_checked == 0 && r.sequential_ordering.is_some() && r.playable;
    PlayabilityVerdict {
        verdict: match (r.playable, selection) {
            (false, _) => Verdict::NotPlayable,
            (true, Selection::All) => Verdict::Playable,
            (true, Selection::Sample { .. }) => Verdict::NoFailureInSample,
        },
        mode: if shortcut {
            "sequential-ordering".into()
        } else {
            r.mode.clone()
        },
        profiles_checked: r.profiles_checked,
        failures: r.failures,
    }
}

fn witness(game: &WGame, w: &PlayabilityWitness) -> WitnessReport {
    let model = &game.model;
    let nature = model.nature();
    WitnessReport {
        omega: w
            .omega
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let f = nature.factor(i);
                format!("{}={}", f.id, f.elements[c])
            })
            .collect(),
        profile: w
            .profile
            .iter()
            .enumerate()
            .map(|(a, table)| AgentStrategy {
                agent: model.agents()[a].to_string(),
                strategy: model.strategy_label(&Strategy {
                    agent: a,
                    table: table.clone(),
                }),
            })
            .collect(),
        fixed_points: w.solutions.len(),
        solutions: w
            .solutions
            .iter()
            .map(|s| {
                s.iter()
                    .enumerate()
                    .map(|(a, &u)| model.action_factor(a).elements[u].clone())
                    .collect()
            })
            .collect(),
    }
}

fn product(counts: impl IntoIterator<Item = Option<u128>>) -> Option<u128> {
    counts
        .into_iter()
        .try_fold(1u128, |acc, c| acc.checked_mul(c?))
}

fn count_string(c: Option<u128>) -> String {
    c.map_or_else(|| "overflow".into(), |v| v.to_string())
}

fn counts(game: &WGame) -> Counts {
    let model = &game.model;
    let agents = (0..model.agent_count())
        .map(|a| AgentCount {
            agent: model.agents()[a].to_string(),
            actions: model.action_size(a),
            info_atoms: model.info(a).atom_count(),
            strategies: count_string(model.count_strategies(a)),
        })
        .collect();
    let per_player: Vec<Option<u128>> = (0..game.player_count())
        .map(|p| {
            product(
                game.players
                    .agents_of(p)
                    .iter()
                    .map(|&a| model.count_strategies(a)),
            )
        })
        .collect();
    let players = (0..game.player_count())
        .map(|p| PlayerCount {
            player: game.players.players()[p].clone(),
            sense: game.sense(p),
            agents: game
                .players
                .agents_of(p)
                .iter()
                .map(|&a| model.agents()[a].to_string())
                .collect(),
            strategies: count_string(per_player[p]),
        })
        .collect();
    Counts {
        nature_points: model.nature().len(),
        configurations: model.configuration().len(),
        agents,
        players,
        profiles: count_string(product(per_player.iter().copied())),
    }
}

fn strategies(game: &WGame) -> Value {
    let model = &game.model;
    let agents: Vec<Value> = (0..model.agent_count())
        .map(|a| {
            let count = model.count_strategies(a);
            let atoms: Vec<String> = (0..model.info(a).atom_count())
                .map(|k| model.atom_label(a, k))
                .collect();
            let listed = count.is_some_and(|c| c <= LIST_LIMIT);
            let labels: Vec<String> = if listed {
                (0..count.unwrap() as u64)
                    .map(|i| model.strategy_label(&model.strategy_from_index(a, i)))
                    .collect()
            } else {
                Vec::new()
            };
            json!({
                "agent": model.agents()[a].to_string(),
                "atoms": atoms,
                "count": count_string(count),
                "listed": listed,
                "strategies": labels,
            })
        })
        .collect();
    json!({ "agents": agents })
}

fn refs(eval: &Evaluator<'_>, players: &[usize], indices: &[u64]) -> Vec<StrategyRef> {
    players
        .iter()
        .zip(indices)
        .map(|(&p, &i)| StrategyRef {
            player: eval.game().players.players()[p].clone(),
            index: i,
            label: eval.strategy_label(p, i),
        })
        .collect()
}

fn equilibrium_value(eval: &Evaluator<'_>, r: &EquilibriumReport) -> Value {
    let all: Vec<usize> = (0..eval.player_count()).collect();
    let roles = eval.game().roles.clone();
    let profiles: Vec<ProfileReport> = r
        .profiles
        .iter()
        .map(|p| ProfileReport {
            strategies: refs(eval, &all, &p.strategies),
            values: nums(&p.values),
        })
        .collect();
    let infeasible: Vec<Vec<StrategyRef>> = match &roles {
        Some(roles) => r
            .diagnostics
            .infeasible_leader_profiles
            .iter()
            .map(|l| refs(eval, &roles.leaders, l))
            .collect(),
        None => Vec::new(),
    };
    json!({
        "kind": r.kind,
        "mode": r.mode.map(|m| m.to_string()),
        "players": eval.game().players.players(),
        "profiles": to_value(&profiles),
        "diagnostics": {
            "profiles_enumerated": r.diagnostics.profiles_enumerated,
            "tied_best_responses": r.diagnostics.tied_best_responses,
            "all_adverse": r.diagnostics.all_adverse,
            "infeasible_leader_profiles": to_value(&infeasible),
        },
    })
}
