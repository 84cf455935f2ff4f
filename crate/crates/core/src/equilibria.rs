//! Best responses, Nash equilibria, Stackelberg strategies and
//! Nash-Stackelberg equilibria by exhaustive enumeration.
//!
//! Every search enumerates profiles in mixed-radix order and returns results
//! in that order, independent of the [`Execution`](crate::exec::Execution)
//! mode. Two finite values within [`TIE_TOLERANCE`](crate::preferences::TIE_TOLERANCE)
//! (relative) are treated as equal, so all near-ties are kept in argsets.
//!
//! Stackelberg modes are oriented by the leader's sense: *optimistic* picks
//! the follower response best for the leader (max of a payoff, min of a
//! cost), *pessimistic* the worst one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal_form::{Evaluator, PlayerProfile};
use crate::preferences::{approx_eq, cvar, expectation, worst_case, Roles, Sense};

/// Λ̂^p(λ^{-p}): the argmin/argmax of a player's normal-form value.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseSet {
    pub player: usize,
    /// Opponents' strategies, with the player's own slot as passed in.
    pub context: PlayerProfile,
    pub strategies: Vec<u64>,
    pub value: f64,
    /// Every strategy evaluates to the adverse infinity.
    pub all_adverse: bool,
}

/// Indices of the best values, the best value, and the all-adverse flag.
pub(crate) fn select_best(sense: Sense, values: &[f64]) -> (Vec<usize>, f64, bool) {
    let adverse = sense.adverse_infinity();
    let candidates: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] != adverse)
        .collect();
    if candidates.is_empty() {
        return ((0..values.len()).collect(), adverse, true);
    }
    let best = candidates
        .iter()
        .map(|&i| values[i])
        .reduce(|a, b| sense.best(a, b))
        .expect("nonempty");
    let members = candidates
        .into_iter()
        .filter(|&i| approx_eq(values[i], best))
        .collect();
    (members, best, false)
}

/// Best responses of `player` when the others play `others` (the player's
/// own entry in `others` is ignored).
pub fn best_responses(
    eval: &Evaluator<'_>,
    player: usize,
    others: &[u64],
) -> Result<BestResponseSet> {
    let n = eval.strategy_count(player);
    let values = eval.execution().try_map(n as usize, |k| {
        let mut prof = others.to_vec();
        prof[player] = k as u64;
        eval.value(player, &prof)
    })?;
    let (members, value, all_adverse) = select_best(eval.game().sense(player), &values);
    Ok(BestResponseSet {
        player,
        context: others.to_vec(),
        strategies: members.into_iter().map(|i| i as u64).collect(),
        value,
        all_adverse,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumKind {
    Nash,
    NashStackelberg,
}

/// Risk functional applied to the leader's values over the followers'
/// response set, weighting every response uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseRisk {
    ExpectationUniform,
    WorstCase,
    CVaR(f64),
}

/// How a leader evaluates a non-singleton follower response set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StackelbergMode {
    Optimistic,
    Pessimistic,
    /// θ·optimistic + (1−θ)·pessimistic.
    Theta(f64),
    LeaderRisk(ResponseRisk),
}

impl StackelbergMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StackelbergMode::Theta(t) if !(0.0..=1.0).contains(&t) => {
                Err(Error::InvalidParameter {
                    name: "theta".into(),
                    reason: format!("{t} not in [0, 1]"),
                })
            }
            StackelbergMode::LeaderRisk(ResponseRisk::CVaR(a)) if !(a > 0.0 && a <= 1.0) => {
                Err(Error::InvalidParameter {
                    name: "alpha".into(),
                    reason: format!("{a} not in (0, 1]"),
                })
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for StackelbergMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackelbergMode::Optimistic => write!(f, "optimistic"),
            StackelbergMode::Pessimistic => write!(f, "pessimistic"),
            StackelbergMode::Theta(t) => write!(f, "theta={t}"),
            StackelbergMode::LeaderRisk(ResponseRisk::ExpectationUniform) => {
                write!(f, "risk:expectation")
            }
            StackelbergMode::LeaderRisk(ResponseRisk::WorstCase) => write!(f, "risk:worst-case"),
            StackelbergMode::LeaderRisk(ResponseRisk::CVaR(a)) => write!(f, "risk:cvar={a}"),
        }
    }
}

impl FromStr for StackelbergMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidParameter {
            name: "mode".into(),
            reason: format!(
                "`{s}`: expected optimistic, pessimistic, theta=T, risk:expectation, risk:worst-case or risk:cvar=A"
            ),
        }
        };
        let parse_num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        let mode = match s {
            "optimistic" => StackelbergMode::Optimistic,
            "pessimistic" => StackelbergMode::Pessimistic,
            "risk:expectation" => StackelbergMode::LeaderRisk(ResponseRisk::ExpectationUniform),
            "risk:worst-case" => StackelbergMode::LeaderRisk(ResponseRisk::WorstCase),
            _ => {
                if let Some(t) = s.strip_prefix("theta=") {
                    StackelbergMode::Theta(parse_num(t)?)
                } else if let Some(a) = s.strip_prefix("risk:cvar=") {
                    StackelbergMode::LeaderRisk(ResponseRisk::CVaR(parse_num(a)?))
                } else {
                    return Err(bad());
                }
            }
        };
        mode.validate()?;
        Ok(mode)
    }
}

/// Combines the leader's values over a nonempty response set.
pub fn combine_responses(mode: StackelbergMode, sense: Sense, values: &[f64]) -> Result<f64> {
    mode.validate()?;
    assert!(!values.is_empty(), "response set must be nonempty");
    let opt = || {
        values
            .iter()
            .copied()
            .reduce(|a, b| sense.best(a, b))
            .unwrap()
    };
    let pess = || {
        values
            .iter()
            .copied()
            .reduce(|a, b| sense.worst(a, b))
            .unwrap()
    };
    match mode {
        StackelbergMode::Optimistic => Ok(opt()),
        StackelbergMode::Pessimistic => Ok(pess()),
        StackelbergMode::Theta(t) => {
            let (o, p) = (opt(), pess());
            if t == 1.0 || o == p {
                Ok(o)
            } else if t == 0.0 {
                Ok(p)
            } else if o.is_infinite() && p.is_infinite() {
                Err(Error::IndeterminateValue)
            } else if o.is_infinite() {
                Ok(o)
            } else if p.is_infinite() {
                Ok(p)
            } else {
                Ok(t * o + (1.0 - t) * p)
            }
        }
        StackelbergMode::LeaderRisk(r) => {
            let masses = vec![1.0 / values.len() as f64; values.len()];
            match r {
                ResponseRisk::ExpectationUniform => expectation(&masses, values),
                ResponseRisk::WorstCase => worst_case(&masses, values, sense),
                ResponseRisk::CVaR(a) => cvar(a, &masses, values, sense),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumProfile {
    /// One strategy index per player.
    pub strategies: PlayerProfile,
    /// Normal-form value of every player.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub profiles_enumerated: u64,
    /// (profile, player) pairs in the result whose best-response set is not a singleton.
    pub tied_best_responses: u64,
    /// (profile, player) pairs where every strategy is adverse-infinite.
    pub all_adverse: u64,
    /// Leader profiles with no follower equilibrium response.
    pub infeasible_leader_profiles: Vec<PlayerProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    pub mode: Option<StackelbergMode>,
    pub profiles: Vec<EquilibriumProfile>,
    pub diagnostics: Diagnostics,
}

/// Checks unilateral deviations one by one; independent of the batched
/// tables used by the searches.
pub fn verify_nash(eval: &Evaluator<'_>, profile: &[u64]) -> Result<bool> {
    for p in 0..eval.player_count() {
        if !is_best_response(eval, p, profile)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn is_best_response(eval: &Evaluator<'_>, p: usize, profile: &[u64]) -> Result<bool> {
    let sense = eval.game().sense(p);
    let own = eval.value(p, profile)?;
    for k in 0..eval.strategy_count(p) {
        let mut dev = profile.to_vec();
        dev[p] = k;
        if sense.strictly_better(eval.value(p, &dev)?, own) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Membership flags and tie/adverse counts for a full joint table over
/// `players`, where `values[i]` holds the values of joint index `i`.
struct JointAnalysis {
    in_equilibrium: Vec<bool>,
    ties: Vec<u64>,
    adverse: Vec<u64>,
}

fn analyse_joint(
    eval: &Evaluator<'_>,
    players: &[usize],
    values: &[std::sync::Arc<[f64]>],
) -> JointAnalysis {
    let counts: Vec<u64> = players.iter().map(|&p| eval.strategy_count(p)).collect();
    let mut strides = vec![1u64; players.len()];
    for k in (0..players.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * counts[k + 1];
    }
    let results = eval.execution().map(values.len(), |i| {
        let i = i as u64;
        let mut ok = true;
        let (mut ties, mut adverse) = (0u64, 0u64);
        for (k, &p) in players.iter().enumerate() {
            let digit = (i / strides[k]) % counts[k];
            let base = i - digit * strides[k];
            let devs: Vec<f64> = (0..counts[k])
                .map(|d| values[(base + d * strides[k]) as usize][p])
                .collect();
            let (members, _, all_adv) = select_best(eval.game().sense(p), &devs);
            if !members.contains(&(digit as usize)) {
                ok = false;
                break;
            }
            ties += (members.len() > 1) as u64;
            adverse += all_adv as u64;
        }
        (ok, ties, adverse)
    });
    let mut out = JointAnalysis {
        in_equilibrium: Vec::with_capacity(values.len()),
        ties: Vec::with_capacity(values.len()),
        adverse: Vec::with_capacity(values.len()),
    };
    for (ok, t, a) in results {
        out.in_equilibrium.push(ok);
        out.ties.push(t);
        out.adverse.push(a);
    }
    out
}

/// All pure Nash equilibria.
pub fn nash_equilibria(eval: &Evaluator<'_>) -> Result<EquilibriumReport> {
    let players: Vec<usize> = (0..eval.player_count()).collect();
    let total = eval.count_joint(&players, "strategy profiles")?;
    let values = eval.execution().try_map(total as usize, |i| {
        eval.values(&eval.decode(&players, i as u64))
    })?;
    let analysis = analyse_joint(eval, &players, &values);
    let mut report = EquilibriumReport {
        kind: EquilibriumKind::Nash,
        mode: None,
        profiles: Vec::new(),
        diagnostics: Diagnostics {
            profiles_enumerated: total,
            ..Default::default()
        },
    };
    let members: Vec<usize> = (0..total as usize)
        .filter(|&i| analysis.in_equilibrium[i])
        .collect();
    let verified = eval.execution().try_map(members.len(), |j| {
        verify_nash(eval, &eval.decode(&players, members[j] as u64))
    })?;
    assert!(verified.iter().all(|&v| v), "Nash re-verification failed");
    for i in members {
        let profile = eval.decode(&players, i as u64);
        report.diagnostics.tied_best_responses += analysis.ties[i];
        report.diagnostics.all_adverse += analysis.adverse[i];
        report.profiles.push(EquilibriumProfile {
            strategies: profile,
            values: values[i].to_vec(),
        });
    }
    Ok(report)
}

fn roles(eval: &Evaluator<'_>) -> Result<Roles> {
    eval.game().roles.clone().ok_or(Error::NoRoles)
}

/// Full player profile from leader and follower strategy indices.
pub fn assemble(roles: &Roles, leaders: &[u64], followers: &[u64]) -> PlayerProfile {
    let mut out = vec![0u64; roles.leaders.len() + roles.followers.len()];
    for (&p, &s) in roles.leaders.iter().zip(leaders) {
        out[p] = s;
    }
    for (&p, &s) in roles.followers.iter().zip(followers) {
        out[p] = s;
    }
    out
}

/// Follower profiles (in role order) forming a Nash equilibrium among the
/// followers when the leaders play `leaders`.
pub fn followers_nash(eval: &Evaluator<'_>, leaders: &[u64]) -> Result<Vec<PlayerProfile>> {
    let roles = roles(eval)?;
    followers_nash_with(eval, &roles, leaders)
}

fn followers_nash_with(
    eval: &Evaluator<'_>,
    roles: &Roles,
    leaders: &[u64],
) -> Result<Vec<PlayerProfile>> {
    let total = eval.count_joint(&roles.followers, "follower profiles")?;
    let values = (0..total)
        .map(|j| eval.values(&assemble(roles, leaders, &eval.decode(&roles.followers, j))))
        .collect::<Result<Vec<_>>>()?;
    let counts: Vec<u64> = roles
        .followers
        .iter()
        .map(|&p| eval.strategy_count(p))
        .collect();
    let mut strides = vec![1u64; counts.len()];
    for k in (0..counts.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * counts[k + 1];
    }
    let mut out = Vec::new();
    'profiles: for j in 0..total {
        for (k, &p) in roles.followers.iter().enumerate() {
            let digit = (j / strides[k]) % counts[k];
            let base = j - digit * strides[k];
            let devs: Vec<f64> = (0..counts[k])
                .map(|d| values[(base + d * strides[k]) as usize][p])
                .collect();
            let (members, _, _) = select_best(eval.game().sense(p), &devs);
            if !members.contains(&(digit as usize)) {
                continue 'profiles;
            }
        }
        out.push(eval.decode(&roles.followers, j));
    }
    Ok(out)
}

/// Value a leader assigns to a leader profile under `mode`.
pub fn leader_value(
    eval: &Evaluator<'_>,
    leader: usize,
    leaders: &[u64],
    mode: StackelbergMode,
) -> Result<f64> {
    let roles = roles(eval)?;
    let responses = followers_nash_with(eval, &roles, leaders)?;
    leader_value_over(eval, &roles, leader, leaders, &responses, mode)
}

fn leader_value_over(
    eval: &Evaluator<'_>,
    roles: &Roles,
    leader: usize,
    leaders: &[u64],
    responses: &[PlayerProfile],
    mode: StackelbergMode,
) -> Result<f64> {
    if responses.is_empty() {
        return Err(Error::EmptyFollowerResponse {
            leader_profile: leaders.to_vec(),
        });
    }
    let vals = responses
        .iter()
        .map(|f| eval.value(leader, &assemble(roles, leaders, f)))
        .collect::<Result<Vec<f64>>>()?;
    combine_responses(mode, eval.game().sense(leader), &vals)
}

/// One leader profile of a Stackelberg set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaderOutcome {
    /// Strategy index per leader, in role order.
    pub leaders: PlayerProfile,
    /// Mode-combined value of each leader, in role order.
    pub leader_values: Vec<f64>,
    /// Followers' equilibrium responses, in role order.
    pub responses: Vec<PlayerProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackelbergSet {
    pub mode: StackelbergMode,
    pub outcomes: Vec<LeaderOutcome>,
    pub infeasible: Vec<PlayerProfile>,
    pub leader_profiles_enumerated: u64,
}

impl StackelbergSet {
    pub fn leader_profiles(&self) -> Vec<PlayerProfile> {
        self.outcomes.iter().map(|o| o.leaders.clone()).collect()
    }
}

/// Stackelberg strategies: with one leader the argbest of its value; with
/// several, the leader profiles where no leader can improve its value by a
/// unilateral deviation to another feasible profile.
pub fn stackelberg_strategies(
    eval: &Evaluator<'_>,
    mode: StackelbergMode,
) -> Result<StackelbergSet> {
    mode.validate()?;
    let roles = roles(eval)?;
    let all: Vec<usize> = (0..eval.player_count()).collect();
    eval.count_joint(&all, "strategy profiles")?;
    let total = eval.count_joint(&roles.leaders, "leader profiles")?;

    let evaluated: Vec<Option<(Vec<f64>, Vec<PlayerProfile>)>> =
        eval.execution().try_map(total as usize, |i| {
            let leaders = eval.decode(&roles.leaders, i as u64);
            let responses = followers_nash_with(eval, &roles, &leaders)?;
            if responses.is_empty() {
                return Ok(None);
            }
            let vals = roles
                .leaders
                .iter()
                .map(|&l| leader_value_over(eval, &roles, l, &leaders, &responses, mode))
                .collect::<Result<Vec<f64>>>()?;
            Ok(Some((vals, responses)))
        })?;

    let counts: Vec<u64> = roles
        .leaders
        .iter()
        .map(|&p| eval.strategy_count(p))
        .collect();
    let mut strides = vec![1u64; counts.len()];
    for k in (0..counts.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * counts[k + 1];
    }

    let mut set = StackelbergSet {
        mode,
        outcomes: Vec::new(),
        infeasible: Vec::new(),
        leader_profiles_enumerated: total,
    };
    for i in 0..total {
        let Some((vals, responses)) = &evaluated[i as usize] else {
            set.infeasible.push(eval.decode(&roles.leaders, i));
            continue;
        };
        let mut stable = true;
        for (k, &l) in roles.leaders.iter().enumerate() {
            let digit = (i / strides[k]) % counts[k];
            let base = i - digit * strides[k];
            let sense = eval.game().sense(l);
            let improves = (0..counts[k]).any(|d| {
                evaluated[(base + d * strides[k]) as usize]
                    .as_ref()
                    .is_some_and(|(v, _)| sense.strictly_better(v[k], vals[k]))
            });
            if improves {
                stable = false;
                break;
            }
        }
        if stable {
            set.outcomes.push(LeaderOutcome {
                leaders: eval.decode(&roles.leaders, i),
                leader_values: vals.clone(),
                responses: responses.clone(),
            });
        }
    }
    Ok(set)
}

/// Profiles where the leaders play a Stackelberg strategy and the followers
/// an equilibrium response to it.
pub fn nash_stackelberg(eval: &Evaluator<'_>, mode: StackelbergMode) -> Result<EquilibriumReport> {
    let roles = roles(eval)?;
    let set = stackelberg_strategies(eval, mode)?;
    let mut report = EquilibriumReport {
        kind: EquilibriumKind::NashStackelberg,
        mode: Some(mode),
        profiles: Vec::new(),
        diagnostics: Diagnostics {
            profiles_enumerated: set.leader_profiles_enumerated
                * eval.count_joint(&roles.followers, "follower profiles")?,
            infeasible_leader_profiles: set.infeasible.clone(),
            ..Default::default()
        },
    };
    for outcome in &set.outcomes {
        for f in &outcome.responses {
            let profile = assemble(&roles, &outcome.leaders, f);
            for &p in &roles.followers {
                assert!(
                    is_best_response(eval, p, &profile)?,
                    "follower re-verification failed"
                );
                let br = best_responses(eval, p, &profile)?;
                report.diagnostics.tied_best_responses += (br.strategies.len() > 1) as u64;
                report.diagnostics.all_adverse += br.all_adverse as u64;
            }
            report.profiles.push(EquilibriumProfile {
                values: eval.values(&profile)?.to_vec(),
                strategies: profile,
            });
        }
    }
    Ok(report)
}

/// Actions the followers' agents actually take at every Nature point
/// under `profile`: one row per ω, one entry per follower agent.
pub fn follower_outcomes(eval: &Evaluator<'_>, profile: &[u64]) -> Result<Vec<Vec<usize>>> {
    let roles = roles(eval)?;
    let model = &eval.game().model;
    let agents: Vec<usize> = roles
        .followers
        .iter()
        .flat_map(|&p| eval.player_agents(p).to_vec())
        .collect();
    let sp = eval.strategy_profile(profile);
    let map = model.solution_map(&sp)?;
    Ok((0..model.nature().len())
        .map(|w| {
            let acts = map.actions(model, w);
            agents.iter().map(|&a| acts[a]).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn select_best_rules() {
        let (m, v, a) = select_best(Sense::Cost, &[3.0, 1.0, 1.0, 2.0]);
        assert_eq!((m, v, a), (vec![1, 2], 1.0, false));
        let (m, v, _) = select_best(Sense::Payoff, &[3.0, 1.0, 3.0 + 1e-12]);
        assert_eq!(m, vec![0, 2]);
        assert!(v >= 3.0);
        let inf = f64::INFINITY;
        let (m, v, a) = select_best(Sense::Cost, &[inf, inf]);
        assert_eq!((m, v, a), (vec![0, 1], inf, true));
        let (m, _, a) = select_best(Sense::Cost, &[inf, 4.0]);
        assert_eq!((m, a), (vec![1], false));
        // favourable infinity is a legitimate optimum
        let (m, v, _) = select_best(Sense::Cost, &[f64::NEG_INFINITY, 4.0]);
        assert_eq!((m, v), (vec![0], f64::NEG_INFINITY));
    }

    #[test]
    fn mode_parsing_roundtrip() {
        for s in [
            "optimistic",
            "pessimistic",
            "theta=0.25",
            "risk:expectation",
            "risk:worst-case",
            "risk:cvar=0.5",
        ] {
            let m: StackelbergMode = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("theta=1.5".parse::<StackelbergMode>().is_err());
        assert!("risk:cvar=0".parse::<StackelbergMode>().is_err());
        assert!("greedy".parse::<StackelbergMode>().is_err());
    }

    #[test]
    fn combine_modes() {
        let v = [1.0, 4.0, 2.0];
        let pay = Sense::Payoff;
        assert_eq!(
            combine_responses(StackelbergMode::Optimistic, pay, &v).unwrap(),
            4.0
        );
        assert_eq!(
            combine_responses(StackelbergMode::Pessimistic, pay, &v).unwrap(),
            1.0
        );
        assert_eq!(
            combine_responses(StackelbergMode::Theta(0.5), pay, &v).unwrap(),
            2.5
        );
        assert_eq!(
            combine_responses(StackelbergMode::Optimistic, Sense::Cost, &v).unwrap(),
            1.0
        );
        let e = combine_responses(
            StackelbergMode::LeaderRisk(ResponseRisk::ExpectationUniform),
            pay,
            &v,
        )
        .unwrap();
        assert!((e - 7.0 / 3.0).abs() < 1e-12);
        let w = combine_responses(
            StackelbergMode::LeaderRisk(ResponseRisk::WorstCase),
            pay,
            &v,
        )
        .unwrap();
        assert_eq!(w, 1.0);
        // singleton: every mode agrees
        for m in [
            StackelbergMode::Optimistic,
            StackelbergMode::Pessimistic,
            StackelbergMode::Theta(0.3),
            StackelbergMode::LeaderRisk(ResponseRisk::CVaR(0.4)),
        ] {
            assert_eq!(combine_responses(m, pay, &[7.5]).unwrap(), 7.5);
        }
        let inf = [f64::NEG_INFINITY, f64::INFINITY];
        assert_eq!(
            combine_responses(StackelbergMode::Theta(0.5), pay, &inf),
            Err(Error::IndeterminateValue)
        );
        assert_eq!(
            combine_responses(StackelbergMode::Theta(0.0), pay, &inf).unwrap(),
            f64::NEG_INFINITY
        );
    }
}
