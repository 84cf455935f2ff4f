//! The game-definition file: a `builtin` model with parameters, or a
//! `custom` game spelled out factor by factor.

use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use prodform::finite::{FactorKind, FiniteFactor};
use prodform::models;
use prodform::preferences::{Objective, PlayerData, PlayerPartition, RiskMeasure, Sense, WGame};
use prodform::wmodel::{AgentId, AgentSpec, InfoSpec, WModel};
use prodform::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<BuiltinDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomGame>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinDef {
    pub model: String,
    /// Model parameters; the model's small reference instance when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomGame {
    #[serde(default)]
    pub nature: Vec<FactorDef>,
    pub agents: Vec<AgentDef>,
    pub players: Vec<PlayerDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roles: Option<RolesDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDef {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "default_kind")]
    pub kind: FactorKind,
    pub elements: Vec<String>,
}

fn default_kind() -> FactorKind {
    FactorKind::NatureExogenous
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDef {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub elements: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDef {
    pub player: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<u32>,
    pub action: ActionDef,
    pub info: InfoDef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum InfoDef {
    /// Ids of the observed factors.
    Cylinder(Vec<String>),
    /// One atom label per configuration point, row-major.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerDef {
    pub name: String,
    pub sense: Sense,
    /// One value per configuration point, row-major; `"inf"`/`"-inf"` allowed.
    pub objective: Vec<ExtReal>,
    pub risk: RiskMeasure,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolesDef {
    pub leaders: Vec<String>,
    pub followers: Vec<String>,
}

/// An extended real: a JSON number, or one of the strings `inf`, `+inf`, `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            v if v == f64::INFINITY => s.serialize_str("inf"),
            v if v == f64::NEG_INFINITY => s.serialize_str("-inf"),
            v => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, \"inf\" or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                Ok(ExtReal(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" => Ok(ExtReal(f64::INFINITY)),
                    "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Why a game file could not be loaded, and where.
#[derive(Debug)]
pub struct LoadError {
    /// Path into the document, such as `custom.agents[1].info`.
    pub location: String,
    pub kind: LoadErrorKind,
}

#[derive(Debug)]
pub enum LoadErrorKind {
    Io(String),
    Parse(String),
    Schema(String),
    Model(Error),
}

impl LoadError {
    fn at(location: impl Into<String>, kind: LoadErrorKind) -> Self {
        LoadError {
            location: location.into(),
            kind,
        }
    }

    fn schema(location: impl Into<String>, msg: impl Into<String>) -> Self {
        Self::at(location, LoadErrorKind::Schema(msg.into()))
    }

    pub fn is_capacity(&self) -> bool {
        matches!(
            self.kind,
            LoadErrorKind::Model(Error::CapacityExceeded { .. })
        )
    }
}

impl LoadError {
    /// The message without the location.
    pub fn detail(&self) -> String {
        match &self.kind {
            LoadErrorKind::Io(m) => format!("cannot read file: {m}"),
            LoadErrorKind::Parse(m) => format!("parse error: {m}"),
            LoadErrorKind::Schema(m) => format!("schema error: {m}"),
            LoadErrorKind::Model(e) => e.to_string(),
        }
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let loc = if self.location.is_empty() {
            "."
        } else {
            &self.location
        };
        write!(f, "{loc}: {}", self.detail())
    }
}

impl std::error::Error for LoadError {}

fn parse_located<T: serde::de::DeserializeOwned>(
    value: serde_json::Value,
    prefix: &str,
) -> Result<T, LoadError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let loc = match (prefix.is_empty(), inner.as_str()) {
            (_, ".") => prefix.to_string(),
            (true, p) => p.to_string(),
            (false, p) => format!("{prefix}.{p}"),
        };
        LoadError::schema(loc, e.inner().to_string())
    })
}

pub fn read_game_file(path: &Path) -> Result<GameFile, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LoadError::at("", LoadErrorKind::Io(format!("{}: {e}", path.display()))))?;
    parse_game_file(&text)
}

pub fn parse_game_file(text: &str) -> Result<GameFile, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: GameFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        let kind = if inner.is_syntax() || inner.is_eof() {
            LoadErrorKind::Parse(inner.to_string())
        } else {
            LoadErrorKind::Schema(inner.to_string())
        };
        LoadError::at(e.path().to_string(), kind)
    })?;
    if file.version != FORMAT_VERSION {
        return Err(LoadError::schema(
            "version",
            format!(
                "unsupported version {}, expected {FORMAT_VERSION}",
                file.version
            ),
        ));
    }
    match (&file.builtin, &file.custom) {
        (Some(_), None) | (None, Some(_)) => Ok(file),
        _ => Err(LoadError::schema(
            "",
            "exactly one of `builtin` and `custom` is required",
        )),
    }
}

pub fn load_game(path: &Path) -> Result<WGame, LoadError> {
    build_game(&read_game_file(path)?)
}

pub fn build_game(file: &GameFile) -> Result<WGame, LoadError> {
    match (&file.builtin, &file.custom) {
        (Some(b), None) => build_builtin(b),
        (None, Some(c)) => build_custom(c),
        _ => Err(LoadError::schema(
            "",
            "exactly one of `builtin` and `custom` is required",
        )),
    }
}

pub const BUILTIN_MODELS: [&str; 6] = [
    "prisoners_dilemma",
    "tou",
    "thai_slsf_st",
    "thai_slsf_mt",
    "thai_slmf_mt",
    "mutual_observation",
];

fn build_builtin(b: &BuiltinDef) -> Result<WGame, LoadError> {
    let model_err = |e: Error| LoadError::at("builtin.params", LoadErrorKind::Model(e));
    let thai = |p: &Option<serde_json::Value>| -> Result<models::ThaiParams, LoadError> {
        match p {
            Some(v) => parse_located(v.clone(), "builtin.params"),
            None => Ok(models::ThaiParams::small_instance()),
        }
    };
    let no_params = || -> Result<(), LoadError> {
        match &b.params {
            Some(_) => Err(LoadError::schema(
                "builtin.params",
                format!("model `{}` takes no parameters", b.model),
            )),
            None => Ok(()),
        }
    };
    match b.model.as_str() {
        "prisoners_dilemma" => {
            no_params()?;
            models::build_prisoners_dilemma().map_err(model_err)
        }
        "mutual_observation" => {
            no_params()?;
            models::mutual_observation_game().map_err(model_err)
        }
        "tou" => {
            let params = match &b.params {
                Some(v) => parse_located(v.clone(), "builtin.params")?,
                None => models::TouParams::small_instance(),
            };
            models::build_tou_game(&params).map_err(model_err)
        }
        "thai_slsf_st" => models::build_thai_slsf_st(&thai(&b.params)?).map_err(model_err),
        "thai_slsf_mt" => models::build_thai_slsf_mt(&thai(&b.params)?).map_err(model_err),
        "thai_slmf_mt" => models::build_thai_slmf_mt(&thai(&b.params)?).map_err(model_err),
        other => Err(LoadError::schema(
            "builtin.model",
            format!(
                "unknown model `{other}`; expected one of {}",
                BUILTIN_MODELS.join(", ")
            ),
        )),
    }
}

fn build_custom(c: &CustomGame) -> Result<WGame, LoadError> {
    // ids first, so references can be checked with locations
    let mut ids: Vec<&str> = Vec::new();
    for (i, f) in c.nature.iter().enumerate() {
        if !f.kind.is_nature() {
            return Err(LoadError::schema(
                format!("custom.nature[{i}].kind"),
                "Nature factors cannot have kind `action`",
            ));
        }
        if ids.contains(&f.id.as_str()) {
            return Err(LoadError::schema(
                format!("custom.nature[{i}].id"),
                format!("duplicate factor id `{}`", f.id),
            ));
        }
        ids.push(&f.id);
    }
    if c.agents.is_empty() {
        return Err(LoadError::schema(
            "custom.agents",
            "at least one agent is required",
        ));
    }
    for (i, a) in c.agents.iter().enumerate() {
        if ids.contains(&a.action.id.as_str()) {
            return Err(LoadError::schema(
                format!("custom.agents[{i}].action.id"),
                format!("duplicate factor id `{}`", a.action.id),
            ));
        }
        ids.push(&a.action.id);
    }
    let nature_len: usize = c.nature.iter().map(|f| f.elements.len()).product();
    let config_len = nature_len
        * c.agents
            .iter()
            .map(|a| a.action.elements.len())
            .product::<usize>();
    for (i, a) in c.agents.iter().enumerate() {
        match &a.info {
            InfoDef::Cylinder(v) => {
                for (j, id) in v.iter().enumerate() {
                    if !ids.contains(&id.as_str()) {
                        return Err(LoadError::schema(
                            format!("custom.agents[{i}].info.cylinder[{j}]"),
                            format!("unknown factor id `{id}`"),
                        ));
                    }
                }
            }
            InfoDef::Explicit(v) if v.len() != config_len => {
                return Err(LoadError::schema(
                    format!("custom.agents[{i}].info.explicit"),
                    format!("{} labels for {config_len} configuration points", v.len()),
                ))
            }
            InfoDef::Explicit(_) => {}
        }
    }

    let nature: Vec<FiniteFactor> = c
        .nature
        .iter()
        .map(|f| factor(&f.id, f.label.as_deref(), f.kind, &f.elements))
        .collect();
    let agents: Vec<AgentSpec> = c
        .agents
        .iter()
        .map(|a| {
            AgentSpec::new(
                AgentId {
                    player: a.player.clone(),
                    stage: a.stage,
                },
                factor(
                    &a.action.id,
                    a.action.label.as_deref(),
                    FactorKind::Action,
                    &a.action.elements,
                ),
                match &a.info {
                    InfoDef::Cylinder(v) => InfoSpec::Cylinder(v.clone()),
                    InfoDef::Explicit(v) => InfoSpec::Explicit(v.clone()),
                },
            )
        })
        .collect();
    let model = WModel::new(nature, agents).map_err(|e| model_error_location(c, e))?;

    let partition = PlayerPartition::by_agent_player(&model);
    for name in partition.players() {
        if !c.players.iter().any(|p| &p.name == name) {
            return Err(LoadError::schema(
                "custom.players",
                format!("no entry for player `{name}`"),
            ));
        }
    }
    let mut data = Vec::with_capacity(c.players.len());
    for (i, p) in c.players.iter().enumerate() {
        if partition.index_of(&p.name).is_none() {
            return Err(LoadError::schema(
                format!("custom.players[{i}].name"),
                format!("player `{}` owns no agent", p.name),
            ));
        }
        if c.players[..i].iter().any(|q| q.name == p.name) {
            return Err(LoadError::schema(
                format!("custom.players[{i}].name"),
                format!("duplicate player `{}`", p.name),
            ));
        }
        let n = model.configuration().len();
        if p.objective.len() != n {
            return Err(LoadError::schema(
                format!("custom.players[{i}].objective"),
                format!("{} values for {n} configuration points", p.objective.len()),
            ));
        }
        if let Err(e) = p.risk.validate(model.nature()) {
            return Err(LoadError::at(
                format!("custom.players[{i}].risk"),
                LoadErrorKind::Model(e),
            ));
        }
        data.push(PlayerData {
            player: p.name.clone(),
            objective: Objective::new(p.sense, p.objective.iter().map(|v| v.0).collect()),
            risk: p.risk.clone(),
        });
    }
    let game = WGame::new(model, partition, data)
        .map_err(|e| LoadError::at("custom.players", LoadErrorKind::Model(e)))?;
    match &c.roles {
        None => Ok(game),
        Some(r) => {
            let l: Vec<&str> = r.leaders.iter().map(String::as_str).collect();
            let f: Vec<&str> = r.followers.iter().map(String::as_str).collect();
            game.with_roles(&l, &f)
                .map_err(|e| LoadError::at("custom.roles", LoadErrorKind::Model(e)))
        }
    }
}

fn factor(id: &str, label: Option<&str>, kind: FactorKind, elements: &[String]) -> FiniteFactor {
    let f = FiniteFactor::new(id, kind, elements.iter().cloned());
    match label {
        Some(l) => f.with_label(l),
        None => f,
    }
}

fn model_error_location(c: &CustomGame, e: Error) -> LoadError {
    let loc = match &e {
        Error::SelfInformationViolation { agent, .. } => c
            .agents
            .iter()
            .position(|a| {
                AgentId {
                    player: a.player.clone(),
                    stage: a.stage,
                }
                .to_string()
                    == *agent
            })
            .map(|i| format!("custom.agents[{i}].info"))
            .unwrap_or_else(|| "custom.agents".into()),
        Error::DuplicateAgent(_) => "custom.agents".into(),
        Error::EmptyFactor(_) | Error::DuplicateElement { .. } => "custom".into(),
        _ => "custom".into(),
    };
    LoadError::at(loc, LoadErrorKind::Model(e))
}

/// The game spelled out in the custom schema.
pub fn export_custom(game: &WGame) -> GameFile {
    let model = &game.model;
    let nature = model
        .nature()
        .factors()
        .iter()
        .map(|f| FactorDef {
            id: f.id.clone(),
            label: (f.label != f.id).then(|| f.label.clone()),
            kind: f.kind,
            elements: f.elements.clone(),
        })
        .collect();
    let agents = (0..model.agent_count())
        .map(|a| {
            let f = model.action_factor(a);
            let id = &model.agents()[a];
            AgentDef {
                player: id.player.clone(),
                stage: id.stage,
                action: ActionDef {
                    id: f.id.clone(),
                    label: (f.label != f.id).then(|| f.label.clone()),
                    elements: f.elements.clone(),
                },
                info: match model.info_spec(a) {
                    InfoSpec::Cylinder(v) => InfoDef::Cylinder(v.clone()),
                    InfoSpec::Explicit(v) => InfoDef::Explicit(v.clone()),
                },
            }
        })
        .collect();
    let players = game
        .data
        .iter()
        .map(|d| PlayerDef {
            name: d.player.clone(),
            sense: d.objective.sense,
            objective: d.objective.values.iter().map(|&v| ExtReal(v)).collect(),
            risk: d.risk.clone(),
        })
        .collect();
    let names = game.players.players();
    let roles = game.roles.as_ref().map(|r| RolesDef {
        leaders: r.leaders.iter().map(|&p| names[p].clone()).collect(),
        followers: r.followers.iter().map(|&p| names[p].clone()).collect(),
    });
    GameFile {
        version: FORMAT_VERSION,
        builtin: None,
        custom: Some(CustomGame {
            nature,
            agents,
            players,
            roles,
        }),
    }
}
