//! Normal-form values J^p(λ) and two-player matrix export.
//!
//! A player's strategy is the tuple of its agents' strategies. Player
//! strategies are indexed in mixed radix over its agents (first agent most
//! significant), and a profile is one player-strategy index per player.

use std::sync::Arc;

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::preferences::WGame;
use crate::wmodel::{decode_mixed_radix, Strategy, StrategyProfile};

/// Default cap on enumerated strategy profiles per solve.
pub const DEFAULT_PROFILE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub cap: u64,
    pub execution: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            cap: DEFAULT_PROFILE_CAP,
            execution: Execution::default(),
        }
    }
}

impl SolveOptions {
    pub fn with_cap(cap: u64) -> Self {
        SolveOptions {
            cap,
            ..Default::default()
        }
    }

    pub fn sequential(mut self) -> Self {
        self.execution = Execution::Sequential;
        self
    }
}

/// A profile as one strategy index per player.
pub type PlayerProfile = Vec<u64>;

/// Evaluation session over one game, memoizing normal-form values.
pub struct Evaluator<'g> {
    game: &'g WGame,
    options: SolveOptions,
    agent_counts: Vec<u64>,
    player_agents: Vec<Vec<usize>>,
    player_counts: Vec<u64>,
    cache: DashMap<PlayerProfile, Arc<[f64]>>,
}

impl<'g> Evaluator<'g> {
    pub fn new(game: &'g WGame, options: SolveOptions) -> Result<Self> {
        let model = &game.model;
        let agent_counts = (0..model.agent_count())
            .map(|a| model.capped_strategy_count(a, options.cap))
            .collect::<Result<Vec<_>>>()?;
        let player_agents: Vec<Vec<usize>> = (0..game.player_count())
            .map(|p| game.players.agents_of(p))
            .collect();
        let mut player_counts = Vec::with_capacity(player_agents.len());
        for (p, agents) in player_agents.iter().enumerate() {
            let c = agents
                .iter()
                .try_fold(1u128, |acc, &a| acc.checked_mul(agent_counts[a] as u128))
                .unwrap_or(u128::MAX);
            if c > options.cap as u128 {
                return Err(Error::CapacityExceeded {
                    what: format!("strategies of player `{}`", game.players.players()[p]),
                    count: c,
                    cap: options.cap,
                });
            }
            player_counts.push(c as u64);
        }
        Ok(Evaluator {
            game,
            options,
            agent_counts,
            player_agents,
            player_counts,
            cache: DashMap::new(),
        })
    }

    pub fn game(&self) -> &'g WGame {
        self.game
    }

    pub fn options(&self) -> &SolveOptions {
        &self.options
    }

    pub fn execution(&self) -> Execution {
        self.options.execution
    }

    pub fn player_count(&self) -> usize {
        self.player_counts.len()
    }

    /// |Λ^p|.
    pub fn strategy_count(&self, player: usize) -> u64 {
        self.player_counts[player]
    }

    pub fn agent_strategy_count(&self, agent: usize) -> u64 {
        self.agent_counts[agent]
    }

    pub fn player_agents(&self, player: usize) -> &[usize] {
        &self.player_agents[player]
    }

    /// Number of profiles of the given players, checked against the cap.
    pub fn count_joint(&self, players: &[usize], what: &str) -> Result<u64> {
        let c = players
            .iter()
            .try_fold(1u128, |acc, &p| {
                acc.checked_mul(self.player_counts[p] as u128)
            })
            .unwrap_or(u128::MAX);
        if c > self.options.cap as u128 {
            return Err(Error::CapacityExceeded {
                what: what.to_string(),
                count: c,
                cap: self.options.cap,
            });
        }
        Ok(c as u64)
    }

    /// Decodes a joint index over `players` into their strategy indices.
    pub fn decode(&self, players: &[usize], index: u64) -> Vec<u64> {
        let radices: Vec<u64> = players.iter().map(|&p| self.player_counts[p]).collect();
        decode_mixed_radix(index, &radices)
    }

    /// Agent strategies making up player strategy `index`.
    pub fn player_strategy(&self, player: usize, index: u64) -> Vec<Strategy> {
        let agents = &self.player_agents[player];
        let radices: Vec<u64> = agents.iter().map(|&a| self.agent_counts[a]).collect();
        decode_mixed_radix(index, &radices)
            .into_iter()
            .zip(agents)
            .map(|(i, &a)| self.game.model.strategy_from_index(a, i))
            .collect()
    }

    pub fn strategy_profile(&self, profile: &[u64]) -> StrategyProfile {
        let mut slots: Vec<Option<Strategy>> = vec![None; self.game.model.agent_count()];
        for (p, &idx) in profile.iter().enumerate() {
            for s in self.player_strategy(p, idx) {
                let a = s.agent;
                slots[a] = Some(s);
            }
        }
        StrategyProfile::new(
            slots
                .into_iter()
                .map(|s| s.expect("every agent has a player"))
                .collect(),
        )
    }

    /// Label of a player strategy; multi-agent strategies list each agent.
    pub fn strategy_label(&self, player: usize, index: u64) -> String {
        let model = &self.game.model;
        let parts = self.player_strategy(player, index);
        if parts.len() == 1 {
            model.strategy_label(&parts[0])
        } else {
            parts
                .iter()
                .map(|s| format!("{}:{}", model.agents()[s.agent], model.strategy_label(s)))
                .collect::<Vec<_>>()
                .join("; ")
        }
    }

    fn compute(&self, profile: &[u64]) -> Result<Arc<[f64]>> {
        let model = &self.game.model;
        let sp = self.strategy_profile(profile);
        let map = model.solve_tables(&sp.tables())?;
        let values = (0..self.player_count())
            .map(|p| {
                let data = &self.game.data[p];
                let table: Vec<f64> = map
                    .outcomes
                    .iter()
                    .map(|&c| data.objective.values[c])
                    .collect();
                data.risk
                    .apply_with_masses(self.game.masses(p), &table, data.objective.sense)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(values.into())
    }

    /// Normal-form values of all players at `profile`.
    pub fn values(&self, profile: &[u64]) -> Result<Arc<[f64]>> {
        if profile.len() != self.player_count() {
            return Err(Error::DimensionMismatch {
                what: "player profile".into(),
                expected: self.player_count(),
                got: profile.len(),
            });
        }
        for (p, &i) in profile.iter().enumerate() {
            if i >= self.player_counts[p] {
                return Err(Error::OutOfRange {
                    what: format!("strategy of player `{}`", self.game.players.players()[p]),
                    index: i as usize,
                    size: self.player_counts[p] as usize,
                });
            }
        }
        if let Some(v) = self.cache.get(profile) {
            return Ok(v.clone());
        }
        let v = self.compute(profile)?;
        self.cache.insert(profile.to_vec(), v.clone());
        Ok(v)
    }

    /// J^p(λ).
    pub fn value(&self, player: usize, profile: &[u64]) -> Result<f64> {
        Ok(self.values(profile)?[player])
    }

    pub fn cached_profiles(&self) -> usize {
        self.cache.len()
    }
}

/// J^p at a profile given per player; convenience wrapper over [`Evaluator`].
pub fn normal_form_value(game: &WGame, player: usize, profile: &[u64]) -> Result<f64> {
    Evaluator::new(game, SolveOptions::default())?.value(player, profile)
}

/// Two-player normal form: rows are player 0's strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormMatrix {
    pub players: [String; 2],
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub cells: Vec<Vec<(f64, f64)>>,
}

impl NormalFormMatrix {
    /// CSV: header = empty corner + column labels; cells `v1;v2`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.col_labels.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (label, row) in self.row_labels.iter().zip(&self.cells) {
            let mut rec = vec![label.clone()];
            rec.extend(
                row.iter()
                    .map(|(a, b)| format!("{};{}", format_ext(*a), format_ext(*b))),
            );
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

pub fn normal_form_matrix(eval: &Evaluator<'_>) -> Result<NormalFormMatrix> {
    if eval.player_count() != 2 {
        return Err(Error::NotTwoPlayers(eval.player_count()));
    }
    let total = eval.count_joint(&[0, 1], "normal-form matrix cells")?;
    let cols = eval.strategy_count(1);
    let flat = eval.execution().try_map(total as usize, |i| {
        let i = i as u64;
        eval.values(&[i / cols, i % cols]).map(|v| (v[0], v[1]))
    })?;
    let players = eval.game().players.players();
    Ok(NormalFormMatrix {
        players: [players[0].clone(), players[1].clone()],
        row_labels: (0..eval.strategy_count(0))
            .map(|i| eval.strategy_label(0, i))
            .collect(),
        col_labels: (0..cols).map(|j| eval.strategy_label(1, j)).collect(),
        cells: flat.chunks(cols as usize).map(<[_]>::to_vec).collect(),
    })
}

/// Extended real as text: `inf`, `-inf`, or decimal with at most 12
/// significant digits.
pub fn format_ext(v: f64) -> String {
    if v == f64::INFINITY {
        return "inf".into();
    }
    if v == f64::NEG_INFINITY {
        return "-inf".into();
    }
    let r = round_sig(v);
    format!("{r}")
}

/// Rounds to 12 significant digits; `-0` becomes `0`.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    let r: f64 = format!("{v:.11e}").parse().expect("valid float");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Parses `inf`, `-inf`, `+inf` or a decimal number.
pub fn parse_ext(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        t => t.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}
