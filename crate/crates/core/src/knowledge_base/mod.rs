//! Queryable encoding of the symbology rule tables.
//!
//! The tables live in a versioned TOML document (`rules/bivariate_rules.toml`)
//! that mirrors the printed grids cell for cell. [`KnowledgeBase`] is loaded once
//! and is immutable afterwards; every query is a pure lookup.

mod rules_file;
mod vocabulary;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use vocabulary::{
    Evidence, Implantation, OperationalTask, Pairing, PairingVariant, PerceptionRequirement,
    PerceptionSet, SeparabilityClass, TaskArity, VisualVariable,
};

/// The rule tables shipped with the crate.
pub const BUNDLED_RULES: &str = include_str!("../../rules/bivariate_rules.toml");

#[derive(Debug, thiserror::Error)]
pub enum KnowledgeBaseError {
    #[error("rule file is not valid TOML: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("rule file schema error: {0}")]
    Schema(String),
    #[error("bad cell `{value}` in {table} row {row} column {column}")]
    Cell {
        table: String,
        row: String,
        column: String,
        value: String,
    },
    #[error("pairing {pairing} is not available at {implantation} implantation")]
    NotAvailable {
        pairing: Pairing,
        implantation: Implantation,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyCell {
    pub observed: bool,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyRow {
    pub variable: VisualVariable,
    pub selective: PropertyCell,
    pub associative: PropertyCell,
    pub ordered: PropertyCell,
    pub quantitative: PropertyCell,
}

impl PropertyRow {
    pub fn perception_set(&self) -> PerceptionSet {
        PerceptionSet {
            selective: self.selective.observed,
            associative: self.associative.observed,
            ordered: self.ordered.observed,
            quantitative: self.quantitative.observed,
        }
    }

    fn cells(&self) -> [PropertyCell; 4] {
        [
            self.selective,
            self.associative,
            self.ordered,
            self.quantitative,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectiveLength {
    Levels(u32),
    Unavailable,
}

impl SelectiveLength {
    pub fn levels(self) -> Option<u32> {
        match self {
            SelectiveLength::Levels(n) => Some(n),
            SelectiveLength::Unavailable => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectiveLengthEntry {
    pub variable: VisualVariable,
    pub implantation: Implantation,
    pub length: SelectiveLength,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvailabilityEntry {
    pub thematic: VisualVariable,
    pub uncertainty: VisualVariable,
    pub implantation: Implantation,
    pub available: bool,
    pub variant: Option<PairingVariant>,
}

impl AvailabilityEntry {
    pub fn pairing(&self) -> Pairing {
        Pairing::new(self.thematic, self.uncertainty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparabilityEntry {
    pub thematic: VisualVariable,
    pub uncertainty: VisualVariable,
    pub implantation: Implantation,
    pub class: SeparabilityClass,
    pub evidence: Evidence,
    pub uncertain_not_recommended: bool,
}

impl SeparabilityEntry {
    pub fn pairing(&self) -> Pairing {
        Pairing::new(self.thematic, self.uncertainty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskEntry {
    pub task: OperationalTask,
    pub arity: TaskArity,
    pub requirement: PerceptionRequirement,
}

/// Identifier of one of the five exposed tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableId {
    Availability,
    Properties,
    Lengths,
    Separability,
    Tasks,
}

impl TableId {
    pub const ALL: [TableId; 5] = [
        TableId::Availability,
        TableId::Properties,
        TableId::Lengths,
        TableId::Separability,
        TableId::Tasks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableId::Availability => "availability",
            TableId::Properties => "properties",
            TableId::Lengths => "lengths",
            TableId::Separability => "separability",
            TableId::Tasks => "tasks",
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TableId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown table `{s}`"))
    }
}

/// Serialized form of a single table, as exposed by the service and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "table", content = "rows", rename_all = "lowercase")]
pub enum TableDump {
    Availability(Vec<AvailabilityEntry>),
    Properties(Vec<PropertyRow>),
    Lengths(Vec<SelectiveLengthEntry>),
    Separability(Vec<SeparabilityEntry>),
    Tasks(Vec<TaskEntry>),
}

impl TableDump {
    pub fn len(&self) -> usize {
        match self {
            TableDump::Availability(r) => r.len(),
            TableDump::Properties(r) => r.len(),
            TableDump::Lengths(r) => r.len(),
            TableDump::Separability(r) => r.len(),
            TableDump::Tasks(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Immutable rule tables plus the checksum of their canonical serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    revision: u32,
    properties: [PropertyRow; 7],
    lengths: [[SelectiveLengthEntry; 3]; 7],
    availability: BTreeMap<(Implantation, Pairing), AvailabilityEntry>,
    separability: BTreeMap<(Implantation, Pairing), SeparabilityEntry>,
    tasks: Vec<TaskEntry>,
    checksum: String,
}

impl KnowledgeBase {
    /// Parses a rule document. The checksum is taken over the canonical form,
    /// so formatting-only edits keep it stable.
    pub fn from_toml_str(text: &str) -> Result<Self, KnowledgeBaseError> {
        let mut kb = rules_file::parse(text)?;
        kb.checksum = hex::encode(Sha256::digest(kb.to_canonical_toml().as_bytes()));
        Ok(kb)
    }

    /// The tables bundled with the crate, parsed once per process.
    pub fn bundled() -> &'static KnowledgeBase {
        static KB: OnceLock<KnowledgeBase> = OnceLock::new();
        KB.get_or_init(|| {
            KnowledgeBase::from_toml_str(BUNDLED_RULES).expect("bundled rule tables are valid")
        })
    }

    pub fn to_canonical_toml(&self) -> String {
        rules_file::write_canonical(self)
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn revision(&self) -> u32 {
        self.revision
    }

    pub fn variable_properties(&self, variable: VisualVariable) -> PerceptionSet {
        self.properties[variable.index()].perception_set()
    }

    pub fn property_row(&self, variable: VisualVariable) -> &PropertyRow {
        &self.properties[variable.index()]
    }

    pub fn selective_length(
        &self,
        variable: VisualVariable,
        implantation: Implantation,
    ) -> SelectiveLengthEntry {
        self.lengths[variable.index()][implantation.index()]
    }

    /// Looks up a pairing cell. Pairings outside the printed grid (for example an
    /// uncertainty-only variable in the thematic slot) are reported as unavailable.
    pub fn pairing_available(
        &self,
        thematic: VisualVariable,
        uncertainty: VisualVariable,
        implantation: Implantation,
    ) -> AvailabilityEntry {
        let pairing = Pairing::new(thematic, uncertainty);
        self.availability
            .get(&(implantation, pairing))
            .copied()
            .unwrap_or(AvailabilityEntry {
                thematic,
                uncertainty,
                implantation,
                available: false,
                variant: None,
            })
    }

    pub fn separability_class(
        &self,
        thematic: VisualVariable,
        uncertainty: VisualVariable,
        implantation: Implantation,
    ) -> Result<SeparabilityEntry, KnowledgeBaseError> {
        let pairing = Pairing::new(thematic, uncertainty);
        self.separability
            .get(&(implantation, pairing))
            .copied()
            .ok_or(KnowledgeBaseError::NotAvailable {
                pairing,
                implantation,
            })
    }

    pub fn task_requirement(&self, task: OperationalTask) -> PerceptionRequirement {
        self.tasks
            .iter()
            .find(|e| e.task == task)
            .map(|e| e.requirement)
            .expect("every task has a row")
    }

    /// Available pairings for one implantation, thematic row-major in printed order.
    pub fn enumerate_pairings(&self, implantation: Implantation) -> Vec<AvailabilityEntry> {
        let mut out = Vec::new();
        for thematic in VisualVariable::THEMATIC_ROWS {
            for uncertainty in VisualVariable::ALL {
                let entry = self.pairing_available(thematic, uncertainty, implantation);
                if entry.available {
                    out.push(entry);
                }
            }
        }
        out
    }

    /// Every separability cell for one implantation, thematic row-major.
    pub fn separability_entries(&self, implantation: Implantation) -> Vec<SeparabilityEntry> {
        let mut out = Vec::new();
        for thematic in VisualVariable::THEMATIC_ROWS {
            for uncertainty in VisualVariable::ALL {
                if let Ok(e) = self.separability_class(thematic, uncertainty, implantation) {
                    out.push(e);
                }
            }
        }
        out
    }

    pub fn tasks(&self) -> &[TaskEntry] {
        &self.tasks
    }

    pub fn table(&self, id: TableId) -> TableDump {
        match id {
            TableId::Availability => TableDump::Availability(
                Implantation::ALL
                    .into_iter()
                    .flat_map(|i| {
                        VisualVariable::THEMATIC_ROWS
                            .into_iter()
                            .flat_map(move |t| {
                                VisualVariable::ALL
                                    .into_iter()
                                    .map(move |u| self.pairing_available(t, u, i))
                            })
                    })
                    .collect(),
            ),
            TableId::Properties => TableDump::Properties(
                VisualVariable::PROPERTY_ROWS
                    .into_iter()
                    .map(|v| *self.property_row(v))
                    .collect(),
            ),
            TableId::Lengths => TableDump::Lengths(
                VisualVariable::PROPERTY_ROWS
                    .into_iter()
                    .flat_map(|v| {
                        Implantation::ALL
                            .into_iter()
                            .map(move |i| self.selective_length(v, i))
                    })
                    .collect(),
            ),
            TableId::Separability => TableDump::Separability(
                Implantation::ALL
                    .into_iter()
                    .flat_map(|i| self.separability_entries(i))
                    .collect(),
            ),
            TableId::Tasks => TableDump::Tasks(self.tasks.clone()),
        }
    }
}
