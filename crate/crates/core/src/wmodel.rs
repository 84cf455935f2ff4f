//! Witsenhausen intrinsic models on finite sets.
//!
//! A [`WModel`] is a list of Nature factors, a list of agents each with one
//! action factor, and one information partition per agent over the
//! configuration space (Nature factors first, then action factors in agent
//! order). Strategies are stored per information atom, so every strategy is
//! measurable by construction.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::finite::{FactorKind, FiniteFactor, Partition, ProductSpace};

/// Default cap on enumerated strategies or profiles.
pub const DEFAULT_STRATEGY_CAP: u64 = 10_000_000;

/// An agent is a (player, optional stage) pair taking exactly one decision.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId {
    pub player: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<u32>,
}

impl AgentId {
    pub fn new(player: &str) -> Self {
        AgentId {
            player: player.to_string(),
            stage: None,
        }
    }

    pub fn staged(player: &str, stage: u32) -> Self {
        AgentId {
            player: player.to_string(),
            stage: Some(stage),
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stage {
            Some(t) => write!(f, "({},{})", self.player, t),
            None => write!(f, "{}", self.player),
        }
    }
}

/// How an agent's information field is given.
#[derive(Debug, Clone, PartialEq)]
pub enum InfoSpec {
    /// The agent sees exactly these factors (Nature or action ids).
    Cylinder(Vec<String>),
    /// One atom label per configuration point, row-major.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct AgentSpec {
    pub id: AgentId,
    pub action: FiniteFactor,
    pub info: InfoSpec,
}

impl AgentSpec {
    pub fn new(id: AgentId, action: FiniteFactor, info: InfoSpec) -> Self {
        AgentSpec { id, action, info }
    }
}

/// A validated W-model.
#[derive(Debug, Clone)]
pub struct WModel {
    nature: Arc<ProductSpace>,
    agents: Vec<AgentId>,
    configuration: Arc<ProductSpace>,
    info: Vec<Partition>,
    info_specs: Vec<InfoSpec>,
    action_len: usize,
    sequential: OnceLock<Option<Vec<usize>>>,
}

impl WModel {
    /// Builds and validates a model, rejecting any information field that
    /// depends on the agent's own action.
    pub fn new(nature_factors: Vec<FiniteFactor>, agents: Vec<AgentSpec>) -> Result<Self> {
        for f in &nature_factors {
            if !f.kind.is_nature() {
                return Err(Error::InvalidParameter {
                    name: f.id.clone(),
                    reason: "Nature factor declared with kind `action`".into(),
                });
            }
        }
        if agents.is_empty() {
            return Err(Error::InvalidParameter {
                name: "agents".into(),
                reason: "a model needs at least one agent".into(),
            });
        }
        let mut ids: Vec<AgentId> = Vec::with_capacity(agents.len());
        for a in &agents {
            if ids.contains(&a.id) {
                return Err(Error::DuplicateAgent(a.id.to_string()));
            }
            if a.action.kind != FactorKind::Action {
                return Err(Error::InvalidParameter {
                    name: a.action.id.clone(),
                    reason: "action factor must have kind `action`".into(),
                });
            }
            ids.push(a.id.clone());
        }

        // Nature may be empty in the abstract; represent it as one point.
        let nature_factors = if nature_factors.is_empty() {
            vec![FiniteFactor::new(
                "nature",
                FactorKind::NatureExogenous,
                ["*"],
            )]
        } else {
            nature_factors
        };
        let nature = Arc::new(ProductSpace::new(nature_factors.clone())?);
        let mut all = nature_factors;
        all.extend(agents.iter().map(|a| a.action.clone()));
        let configuration = Arc::new(ProductSpace::new(all)?);
        let action_len = configuration.len() / nature.len();

        let mut info = Vec::with_capacity(agents.len());
        let mut info_specs = Vec::with_capacity(agents.len());
        for a in agents {
            let p = match &a.info {
                InfoSpec::Cylinder(visible) => Partition::cylinder(configuration.clone(), visible)?,
                InfoSpec::Explicit(labels) => {
                    Partition::from_labels(configuration.clone(), labels)?
                }
            };
            info.push(p);
            info_specs.push(a.info);
        }

        let model = WModel {
            nature,
            agents: ids,
            configuration,
            info,
            info_specs,
            action_len,
            sequential: OnceLock::new(),
        };
        for k in 0..model.agents.len() {
            model.check_self_information(k)?;
        }
        Ok(model)
    }

    fn check_self_information(&self, agent: usize) -> Result<()> {
        let pos = self.action_position(agent);
        let stride = self.configuration.stride(pos);
        let size = self.configuration.factor(pos).size();
        let part = &self.info[agent];
        for idx in 0..self.configuration.len() {
            if self.configuration.coord(idx, pos) != 0 {
                continue;
            }
            let a = part.atom_of(idx);
            for v in 1..size {
                let other = idx + v * stride;
                if part.atom_of(other) != a {
                    return Err(Error::SelfInformationViolation {
                        agent: self.agents[agent].to_string(),
                        first: self.configuration.point(idx),
                        second: self.configuration.point(other),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn nature(&self) -> &Arc<ProductSpace> {
        &self.nature
    }

    pub fn configuration(&self) -> &Arc<ProductSpace> {
        &self.configuration
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn agent_index(&self, id: &AgentId) -> Option<usize> {
        self.agents.iter().position(|a| a == id)
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn info(&self, agent: usize) -> &Partition {
        &self.info[agent]
    }

    pub fn info_spec(&self, agent: usize) -> &InfoSpec {
        &self.info_specs[agent]
    }

    /// Position of the agent's action factor in the configuration space.
    pub fn action_position(&self, agent: usize) -> usize {
        self.nature.dims() + agent
    }

    pub fn action_factor(&self, agent: usize) -> &FiniteFactor {
        self.configuration.factor(self.action_position(agent))
    }

    pub fn action_size(&self, agent: usize) -> usize {
        self.action_factor(agent).size()
    }

    /// Number of joint action tuples.
    pub fn action_len(&self) -> usize {
        self.action_len
    }

    /// Configuration index of (ω, u) given as flat indices.
    pub fn configuration_index(&self, omega: usize, actions: usize) -> usize {
        omega * self.action_len + actions
    }

    /// |U_a|^{atoms(info[a])}, or `None` on overflow.
    pub fn count_strategies(&self, agent: usize) -> Option<u128> {
        let base = self.action_size(agent) as u128;
        let mut acc: u128 = 1;
        for _ in 0..self.info[agent].atom_count() {
            acc = acc.checked_mul(base)?;
        }
        Some(acc)
    }

    pub(crate) fn capped_strategy_count(&self, agent: usize, cap: u64) -> Result<u64> {
        match self.count_strategies(agent) {
            Some(c) if c <= cap as u128 => Ok(c as u64),
            c => Err(Error::CapacityExceeded {
                what: format!("strategies of agent {}", self.agents[agent]),
                count: c.unwrap_or(u128::MAX),
                cap,
            }),
        }
    }

    /// Product of all agents' strategy counts.
    pub fn count_profiles(&self) -> Option<u128> {
        (0..self.agent_count()).try_fold(1u128, |acc, a| acc.checked_mul(self.count_strategies(a)?))
    }

    /// The `index`-th strategy in lexicographic order (atom 0 most significant).
    pub fn strategy_from_index(&self, agent: usize, index: u64) -> Strategy {
        let base = self.action_size(agent) as u64;
        let atoms = self.info[agent].atom_count();
        let mut table = vec![0usize; atoms];
        let mut rest = index;
        for slot in table.iter_mut().rev() {
            *slot = (rest % base) as usize;
            rest /= base;
        }
        Strategy { agent, table }
    }

    /// All measurable strategies of `agent`, in lexicographic order.
    pub fn enumerate_strategies(
        &self,
        agent: usize,
        cap: u64,
    ) -> Result<impl Iterator<Item = Strategy> + '_> {
        let n = self.capped_strategy_count(agent, cap)?;
        Ok((0..n).map(move |i| self.strategy_from_index(agent, i)))
    }

    pub fn constant_strategy(&self, agent: usize, action: usize) -> Strategy {
        Strategy {
            agent,
            table: vec![action; self.info[agent].atom_count()],
        }
    }

    /// Human-readable description of one information atom.
    pub fn atom_label(&self, agent: usize, atom: usize) -> String {
        match &self.info_specs[agent] {
            InfoSpec::Cylinder(visible) if visible.is_empty() => "*".to_string(),
            InfoSpec::Cylinder(_) => {
                let rep = self.info[agent].representatives()[atom];
                let mut positions: Vec<usize> = match &self.info_specs[agent] {
                    InfoSpec::Cylinder(v) => v
                        .iter()
                        .filter_map(|id| self.configuration.position(id).ok())
                        .collect(),
                    InfoSpec::Explicit(_) => unreachable!(),
                };
                positions.sort_unstable();
                positions.dedup();
                positions
                    .iter()
                    .map(|&p| {
                        let f = self.configuration.factor(p);
                        format!("{}={}", f.id, f.elements[self.configuration.coord(rep, p)])
                    })
                    .collect::<Vec<_>>()
                    .join(",")
            }
            InfoSpec::Explicit(_) => format!("#{atom}"),
        }
    }

    /// Label of a strategy: the action of a single-atom strategy, otherwise
    /// the per-atom actions joined by `|`.
    pub fn strategy_label(&self, strategy: &Strategy) -> String {
        let f = self.action_factor(strategy.agent);
        strategy
            .table
            .iter()
            .map(|&u| f.elements[u].as_str())
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Greedy agent ordering in which every agent observes only Nature and
    /// the actions of earlier agents. `None` if no such ordering exists.
    pub fn check_sequential(&self) -> Option<Vec<usize>> {
        self.sequential
            .get_or_init(|| self.compute_sequential())
            .clone()
    }

    fn compute_sequential(&self) -> Option<Vec<usize>> {
        let n = self.agent_count();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut known: Vec<usize> = (0..self.nature.dims()).collect();
        while order.len() < n {
            let visible = Partition::cylinder_positions(self.configuration.clone(), &known);
            let next = (0..n).find(|&a| {
                !placed[a]
                    && visible
                        .refines(&self.info[a])
                        .expect("same configuration space")
            })?;
            placed[next] = true;
            order.push(next);
            known.push(self.action_position(next));
        }
        Some(order)
    }

    fn validate_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.strategies.len() != self.agent_count() {
            return Err(Error::DimensionMismatch {
                what: "strategy profile".into(),
                expected: self.agent_count(),
                got: profile.strategies.len(),
            });
        }
        for (k, s) in profile.strategies.iter().enumerate() {
            if s.agent != k {
                return Err(Error::InvalidParameter {
                    name: "strategy profile".into(),
                    reason: format!("slot {k} holds a strategy of agent {}", s.agent),
                });
            }
            s.validate(self)?;
        }
        Ok(())
    }

    /// Joint action tuples u with u = λ(ω, u), as flat action indices.
    pub fn fixed_points(&self, omega: usize, tables: &[&[usize]]) -> Vec<usize> {
        let n = self.agent_count();
        let base = omega * self.action_len;
        (0..self.action_len)
            .filter(|&u| {
                let idx = base + u;
                (0..n).all(|k| {
                    let pos = self.action_position(k);
                    tables[k][self.info[k].atom_of(idx)] == self.configuration.coord(idx, pos)
                })
            })
            .collect()
    }

    /// Configuration index per ω by forward substitution along `order`.
    fn forward_substitution(&self, order: &[usize], tables: &[&[usize]]) -> Vec<usize> {
        (0..self.nature.len())
            .map(|omega| {
                // unset actions sit at 0; measurability wrt predecessors makes
                // their value irrelevant for the lookup
                let mut idx = omega * self.action_len;
                for &k in order {
                    let u = tables[k][self.info[k].atom_of(idx)];
                    idx += u * self.configuration.stride(self.action_position(k));
                }
                idx
            })
            .collect()
    }

    /// Solution map computed by enumerating all action tuples at every ω.
    pub fn solution_map_brute_force(&self, profile: &StrategyProfile) -> Result<SolutionMap> {
        self.validate_profile(profile)?;
        let tables = profile.tables();
        self.solve_brute_force(&tables)
    }

    fn solve_brute_force(&self, tables: &[&[usize]]) -> Result<SolutionMap> {
        let mut outcomes = Vec::with_capacity(self.nature.len());
        for omega in 0..self.nature.len() {
            let fp = self.fixed_points(omega, tables);
            if fp.len() != 1 {
                return Err(Error::NotPlayable {
                    omega: self.nature.point(omega),
                    solutions: fp.len(),
                });
            }
            outcomes.push(self.configuration_index(omega, fp[0]));
        }
        Ok(SolutionMap { outcomes })
    }

    /// S_λ: forward substitution when the model is sequential, otherwise
    /// brute-force enumeration with a uniqueness check at every ω.
    pub fn solution_map(&self, profile: &StrategyProfile) -> Result<SolutionMap> {
        self.validate_profile(profile)?;
        let tables = profile.tables();
        self.solve_tables(&tables)
    }

    pub(crate) fn solve_tables(&self, tables: &[&[usize]]) -> Result<SolutionMap> {
        match self.check_sequential() {
            Some(order) => Ok(SolutionMap {
                outcomes: self.forward_substitution(&order, tables),
            }),
            None => self.solve_brute_force(tables),
        }
    }

    /// Checks the closed-loop equation over the selected profiles.
    pub fn check_playability(
        &self,
        selection: &ProfileSelection,
        options: &PlayabilityOptions,
    ) -> Result<PlayabilityReport> {
        let ordering = self.check_sequential();
        let mode = selection.mode_name();
        if matches!(selection, ProfileSelection::All) && options.sequential_shortcut {
            if let Some(order) = &ordering {
                return Ok(PlayabilityReport {
                    playable: true,
                    mode,
                    profiles_checked: 0,
                    failures: 0,
                    witnesses: Vec::new(),
                    sequential_ordering: Some(order.clone()),
                });
            }
        }

        let profiles: Vec<StrategyProfile> = match selection {
            ProfileSelection::All => {
                let total = self.count_profiles().unwrap_or(u128::MAX);
                if total > options.cap as u128 {
                    return Err(Error::CapacityExceeded {
                        what: "strategy profiles for playability".into(),
                        count: total,
                        cap: options.cap,
                    });
                }
                let counts: Vec<u64> = (0..self.agent_count())
                    .map(|a| self.count_strategies(a).unwrap() as u64)
                    .collect();
                (0..total as u64)
                    .map(|i| {
                        let digits = decode_mixed_radix(i, &counts);
                        StrategyProfile::new(
                            digits
                                .iter()
                                .enumerate()
                                .map(|(a, &d)| self.strategy_from_index(a, d))
                                .collect(),
                        )
                    })
                    .collect()
            }
            ProfileSelection::Sample { n, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*n)
                    .map(|_| {
                        StrategyProfile::new(
                            (0..self.agent_count())
                                .map(|a| Strategy {
                                    agent: a,
                                    table: (0..self.info[a].atom_count())
                                        .map(|_| rng.gen_range(0..self.action_size(a)))
                                        .collect(),
                                })
                                .collect(),
                        )
                    })
                    .collect()
            }
            ProfileSelection::Explicit(list) => {
                for p in list {
                    self.validate_profile(p)?;
                }
                list.clone()
            }
        };

        let per_profile: Vec<Vec<PlayabilityWitness>> =
            options.execution.map(profiles.len(), |i| {
                let p = &profiles[i];
                let tables = p.tables();
                (0..self.nature.len())
                    .filter_map(|omega| {
                        let fp = self.fixed_points(omega, &tables);
                        (fp.len() != 1).then(|| PlayabilityWitness {
                            omega: self.nature.point(omega),
                            profile: p.strategies.iter().map(|s| s.table.clone()).collect(),
                            solutions: fp
                                .iter()
                                .map(|&u| {
                                    let idx = self.configuration_index(omega, u);
                                    (0..self.agent_count())
                                        .map(|k| {
                                            self.configuration.coord(idx, self.action_position(k))
                                        })
                                        .collect()
                                })
                                .collect(),
                        })
                    })
                    .collect()
            });
        let failures: u64 = per_profile.iter().map(|w| w.len() as u64).sum();
        let witnesses: Vec<PlayabilityWitness> = per_profile
            .into_iter()
            .flatten()
            .take(options.max_witnesses)
            .collect();
        Ok(PlayabilityReport {
            playable: failures == 0,
            mode,
            profiles_checked: profiles.len() as u64,
            failures,
            witnesses,
            sequential_ordering: ordering,
        })
    }
}

/// Mixed-radix digits of `index`, first digit most significant.
pub fn decode_mixed_radix(mut index: u64, radices: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    out
}

/// Inverse of [`decode_mixed_radix`].
pub fn encode_mixed_radix(digits: &[u64], radices: &[u64]) -> u64 {
    digits
        .iter()
        .zip(radices)
        .fold(0u64, |acc, (&d, &r)| acc * r + d)
}

/// A measurable strategy: one action per information atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strategy {
    pub agent: usize,
    pub table: Vec<usize>,
}

impl Strategy {
    fn validate(&self, model: &WModel) -> Result<()> {
        let atoms = model.info(self.agent).atom_count();
        if self.table.len() != atoms {
            return Err(Error::DimensionMismatch {
                what: format!("strategy table of agent {}", model.agents()[self.agent]),
                expected: atoms,
                got: self.table.len(),
            });
        }
        let size = model.action_size(self.agent);
        if let Some(&bad) = self.table.iter().find(|&&u| u >= size) {
            return Err(Error::OutOfRange {
                what: format!("action of agent {}", model.agents()[self.agent]),
                index: bad,
                size,
            });
        }
        Ok(())
    }

    /// λ_a as a map on the whole configuration space.
    pub fn on_configurations(&self, model: &WModel) -> Vec<usize> {
        let part = model.info(self.agent);
        (0..model.configuration().len())
            .map(|i| self.table[part.atom_of(i)])
            .collect()
    }

    /// Index of this strategy in lexicographic enumeration.
    pub fn index(&self, model: &WModel) -> u64 {
        let base = model.action_size(self.agent) as u64;
        self.table
            .iter()
            .fold(0u64, |acc, &u| acc * base + u as u64)
    }
}

/// One strategy per agent, in agent order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyProfile {
    pub strategies: Vec<Strategy>,
}

impl StrategyProfile {
    pub fn new(strategies: Vec<Strategy>) -> Self {
        StrategyProfile { strategies }
    }

    pub fn from_tables(tables: Vec<Vec<usize>>) -> Self {
        StrategyProfile {
            strategies: tables
                .into_iter()
                .enumerate()
                .map(|(agent, table)| Strategy { agent, table })
                .collect(),
        }
    }

    pub fn tables(&self) -> Vec<&[usize]> {
        self.strategies.iter().map(|s| s.table.as_slice()).collect()
    }
}

/// Configuration reached at every Nature point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionMap {
    /// Configuration index per Nature point.
    pub outcomes: Vec<usize>,
}

impl SolutionMap {
    pub fn configuration(&self, model: &WModel, omega: usize) -> Vec<usize> {
        model.configuration().point(self.outcomes[omega])
    }

    /// Action index of every agent at ω.
    pub fn actions(&self, model: &WModel, omega: usize) -> Vec<usize> {
        let idx = self.outcomes[omega];
        (0..model.agent_count())
            .map(|k| model.configuration().coord(idx, model.action_position(k)))
            .collect()
    }
}

/// Which profiles a playability check looks at.
#[derive(Debug, Clone)]
pub enum ProfileSelection {
    All,
    Sample { n: usize, seed: u64 },
    Explicit(Vec<StrategyProfile>),
}

impl ProfileSelection {
    fn mode_name(&self) -> String {
        match self {
            ProfileSelection::All => "all".into(),
            ProfileSelection::Sample { n, seed } => format!("sample={n},seed={seed}"),
            ProfileSelection::Explicit(l) => format!("explicit({})", l.len()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlayabilityOptions {
    pub cap: u64,
    /// In `All` mode, accept a sequential ordering as proof of playability.
    pub sequential_shortcut: bool,
    pub max_witnesses: usize,
    pub execution: Execution,
}

impl Default for PlayabilityOptions {
    fn default() -> Self {
        PlayabilityOptions {
            cap: DEFAULT_STRATEGY_CAP,
            sequential_shortcut: true,
            max_witnesses: 16,
            execution: Execution::default(),
        }
    }
}

/// A (ω, profile) pair where the closed-loop equation has 0 or ≥ 2 solutions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayabilityWitness {
    pub omega: Vec<usize>,
    pub profile: Vec<Vec<usize>>,
    /// Each solution lists one action index per agent.
    pub solutions: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayabilityReport {
    pub playable: bool,
    pub mode: String,
    pub profiles_checked: u64,
    pub failures: u64,
    pub witnesses: Vec<PlayabilityWitness>,
    pub sequential_ordering: Option<Vec<usize>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(id: &str) -> FiniteFactor {
        FiniteFactor::new(id, FactorKind::Action, ["0", "1"])
    }

    fn omega2() -> FiniteFactor {
        FiniteFactor::new("omega", FactorKind::NatureExogenous, ["-", "+"])
    }

    fn mutual() -> WModel {
        WModel::new(
            vec![],
            vec![
                AgentSpec::new(
                    AgentId::new("a"),
                    binary("u_a"),
                    InfoSpec::Cylinder(vec!["u_b".into()]),
                ),
                AgentSpec::new(
                    AgentId::new("b"),
                    binary("u_b"),
                    InfoSpec::Cylinder(vec!["u_a".into()]),
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn figure_two_setting_is_valid() {
        let m = WModel::new(
            vec![omega2()],
            vec![
                AgentSpec::new(AgentId::new("a"), binary("u_a"), InfoSpec::Cylinder(vec![])),
                AgentSpec::new(
                    AgentId::new("b"),
                    binary("u_b"),
                    InfoSpec::Cylinder(vec!["u_a".into()]),
                ),
            ],
        )
        .unwrap();
        assert_eq!(m.configuration().len(), 8);
        assert_eq!(m.info(1).atom_count(), 2);
        assert_eq!(m.check_sequential(), Some(vec![0, 1]));
    }

    #[test]
    fn own_action_in_info_is_rejected() {
        let err = WModel::new(
            vec![omega2()],
            vec![AgentSpec::new(
                AgentId::new("a"),
                binary("u_a"),
                InfoSpec::Cylinder(vec!["u_a".into()]),
            )],
        )
        .unwrap_err();
        match err {
            Error::SelfInformationViolation {
                agent,
                first,
                second,
            } => {
                assert_eq!(agent, "a");
                assert_eq!(first[0], second[0]);
                assert_ne!(first[1], second[1]);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn explicit_info_violation_detected() {
        // labels depend on u_a's coordinate (last factor)
        let labels = vec![0, 1, 0, 1];
        let err = WModel::new(
            vec![omega2()],
            vec![AgentSpec::new(
                AgentId::new("a"),
                binary("u_a"),
                InfoSpec::Explicit(labels),
            )],
        )
        .unwrap_err();
        assert!(matches!(err, Error::SelfInformationViolation { .. }));
    }

    #[test]
    fn strategy_counts() {
        let m = WModel::new(
            vec![omega2()],
            vec![
                AgentSpec::new(
                    AgentId::new("a"),
                    FiniteFactor::new("u_a", FactorKind::Action, ["x", "y", "z"]),
                    InfoSpec::Cylinder(vec![]),
                ),
                AgentSpec::new(
                    AgentId::new("b"),
                    binary("u_b"),
                    InfoSpec::Cylinder(vec!["omega".into()]),
                ),
            ],
        )
        .unwrap();
        let s: Vec<Strategy> = m.enumerate_strategies(0, 100).unwrap().collect();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|s| s.table.len() == 1));
        assert_eq!(m.count_strategies(1), Some(4));
        let tables: Vec<Vec<usize>> = m
            .enumerate_strategies(1, 100)
            .unwrap()
            .map(|s| s.table)
            .collect();
        assert_eq!(tables, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert!(matches!(
            m.enumerate_strategies(1, 3),
            Err(Error::CapacityExceeded { .. })
        ));
        for (i, s) in m.enumerate_strategies(1, 100).unwrap().enumerate() {
            assert_eq!(s.index(&m), i as u64);
        }
    }

    #[test]
    fn mutual_observation_is_not_sequential() {
        assert_eq!(mutual().check_sequential(), None);
    }

    #[test]
    fn copy_copy_has_two_fixed_points() {
        let m = mutual();
        // atoms of a's info are u_b = 0,1; copy maps atom k to action k
        let p = StrategyProfile::from_tables(vec![vec![0, 1], vec![0, 1]]);
        let fp = m.fixed_points(0, &p.tables());
        assert_eq!(fp.len(), 2);
        let r = m
            .check_playability(
                &ProfileSelection::Explicit(vec![p.clone()]),
                &Default::default(),
            )
            .unwrap();
        assert!(!r.playable);
        assert_eq!(r.witnesses[0].solutions, vec![vec![0, 0], vec![1, 1]]);
        assert!(matches!(
            m.solution_map(&p),
            Err(Error::NotPlayable { solutions: 2, .. })
        ));
    }

    #[test]
    fn copy_flip_has_no_fixed_point() {
        let m = mutual();
        let p = StrategyProfile::from_tables(vec![vec![0, 1], vec![1, 0]]);
        assert!(m.fixed_points(0, &p.tables()).is_empty());
        assert!(matches!(
            m.solution_map(&p),
            Err(Error::NotPlayable { solutions: 0, .. })
        ));
    }

    #[test]
    fn all_mode_on_mutual_model_enumerates_sixteen_profiles() {
        let r = mutual()
            .check_playability(&ProfileSelection::All, &Default::default())
            .unwrap();
        assert_eq!(r.profiles_checked, 16);
        assert!(!r.playable);
        assert!(r.failures > 0);
    }

    #[test]
    fn sequential_shortcut_and_sampling() {
        let m = WModel::new(
            vec![omega2()],
            vec![
                AgentSpec::new(
                    AgentId::new("a"),
                    binary("u_a"),
                    InfoSpec::Cylinder(vec!["omega".into()]),
                ),
                AgentSpec::new(
                    AgentId::new("b"),
                    binary("u_b"),
                    InfoSpec::Cylinder(vec!["u_a".into()]),
                ),
            ],
        )
        .unwrap();
        let r = m
            .check_playability(&ProfileSelection::All, &Default::default())
            .unwrap();
        assert!(r.playable);
        assert_eq!(r.profiles_checked, 0);
        assert_eq!(r.sequential_ordering, Some(vec![0, 1]));

        let opts = PlayabilityOptions {
            sequential_shortcut: false,
            ..Default::default()
        };
        let r = m.check_playability(&ProfileSelection::All, &opts).unwrap();
        assert!(r.playable);
        assert_eq!(r.profiles_checked, 16);

        let s = m
            .check_playability(&ProfileSelection::Sample { n: 5, seed: 7 }, &opts)
            .unwrap();
        assert!(s.playable);
        assert_eq!(s.profiles_checked, 5);
        assert_eq!(s.mode, "sample=5,seed=7");
    }

    #[test]
    fn constant_strategy_solution_map() {
        let m = WModel::new(
            vec![omega2()],
            vec![AgentSpec::new(
                AgentId::new("a"),
                FiniteFactor::new("u", FactorKind::Action, ["p", "q", "r"]),
                InfoSpec::Cylinder(vec![]),
            )],
        )
        .unwrap();
        let p = StrategyProfile::new(vec![m.constant_strategy(0, 2)]);
        let s = m.solution_map(&p).unwrap();
        for omega in 0..2 {
            assert_eq!(s.configuration(&m, omega), vec![omega, 2]);
        }
    }

    #[test]
    fn mixed_radix_roundtrip() {
        let r = [3u64, 1, 4, 2];
        for i in 0..24 {
            assert_eq!(encode_mixed_radix(&decode_mixed_radix(i, &r), &r), i);
        }
    }
}
