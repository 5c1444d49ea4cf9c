use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use toml::{Table, Value};

use super::*;

pub(super) const SCHEMA: &str = "bivmap-rules/1";

const HEADER: &str = "\
# Rule tables for bivariate estimate/uncertainty symbology.
#
# Cell markup:
#   \"[X]\"  established in the literature
#   \"X\"    author estimate
#   \"X*\"   classification uncertain, not recommended for use
#   \"\"     blank cell (not available)
#   \"-\"    property not observed
# Availability cells are \"Y\" with an optional variant suffix:
#   ^A bivariate choropleth, ^B size as line width,
#   ^C size with size as line width and dash length, ^D crosshatch.
# Pairing grids are keyed by the thematic variable; columns are the
# uncertainty variables listed in [variables].
";

const PROPERTY_COLUMNS: [&str; 4] = ["Selective", "Associative", "Ordered", "Quantitative"];
const LENGTH_COLUMNS: [&str; 3] = ["Point", "Line", "Area"];
const TASK_COLUMNS: [&str; 2] = ["Arity", "Requirement"];

fn schema_err(msg: impl Into<String>) -> KnowledgeBaseError {
    KnowledgeBaseError::Schema(msg.into())
}

fn cell_err(table: &str, row: &str, column: &str, value: &str) -> KnowledgeBaseError {
    KnowledgeBaseError::Cell {
        table: table.to_string(),
        row: row.to_string(),
        column: column.to_string(),
        value: value.to_string(),
    }
}

fn section<'a>(root: &'a Table, key: &str) -> Result<&'a Table, KnowledgeBaseError> {
    root.get(key)
        .and_then(Value::as_table)
        .ok_or_else(|| schema_err(format!("missing table [{key}]")))
}

fn string_list(value: &Value, what: &str) -> Result<Vec<String>, KnowledgeBaseError> {
    value
        .as_array()
        .ok_or_else(|| schema_err(format!("{what} must be an array")))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| schema_err(format!("{what} must contain strings")))
        })
        .collect()
}

fn expect_columns(table: &Table, name: &str, expected: &[&str]) -> Result<(), KnowledgeBaseError> {
    let cols = table
        .get("columns")
        .ok_or_else(|| schema_err(format!("[{name}] is missing `columns`")))?;
    if string_list(cols, name)? != expected {
        return Err(schema_err(format!("[{name}] columns must be {expected:?}")));
    }
    Ok(())
}

/// Grid rows keyed by name, excluding the `columns` header, each checked for width.
fn rows<'a>(
    table: &'a Table,
    name: &str,
    width: usize,
) -> Result<Vec<(&'a str, Vec<String>)>, KnowledgeBaseError> {
    let mut out = Vec::new();
    for (key, value) in table {
        if key == "columns" {
            continue;
        }
        let cells = string_list(value, &format!("{name}.{key}"))?;
        if cells.len() != width {
            return Err(schema_err(format!(
                "{name}.{key} has {} cells, expected {width}",
                cells.len()
            )));
        }
        out.push((key.as_str(), cells));
    }
    Ok(out)
}

/// Splits `[X]` markup into (inner, established).
fn unbracket(cell: &str) -> (&str, bool) {
    match cell.strip_prefix('[').and_then(|c| c.strip_suffix(']')) {
        Some(inner) => (inner, true),
        None => (cell, false),
    }
}

fn evidence(established: bool) -> Evidence {
    if established {
        Evidence::Established
    } else {
        Evidence::AuthorEstimate
    }
}

fn parse_variable(name: &str, table: &str) -> Result<VisualVariable, KnowledgeBaseError> {
    name.parse()
        .map_err(|_| schema_err(format!("unknown variable `{name}` in [{table}]")))
}

pub(super) fn parse(text: &str) -> Result<KnowledgeBase, KnowledgeBaseError> {
    let root: Table = text.parse()?;

    match root.get("schema").and_then(Value::as_str) {
        Some(SCHEMA) => {}
        other => {
            return Err(schema_err(format!(
                "expected schema `{SCHEMA}`, found {other:?}"
            )))
        }
    }
    let revision = root
        .get("revision")
        .and_then(Value::as_integer)
        .and_then(|r| u32::try_from(r).ok())
        .ok_or_else(|| schema_err("`revision` must be a non-negative integer"))?;

    let variables = section(&root, "variables")?;
    let columns: Vec<&str> = VisualVariable::ALL.iter().map(|v| v.name()).collect();
    expect_columns(variables, "variables", &columns)?;
    let declared: BTreeSet<String> = string_list(
        variables
            .get("uncertainty_only")
            .ok_or_else(|| schema_err("[variables] is missing `uncertainty_only`"))?,
        "variables.uncertainty_only",
    )?
    .into_iter()
    .collect();
    let intrinsic: BTreeSet<String> = VisualVariable::ALL
        .into_iter()
        .filter(|v| v.is_uncertainty_only())
        .map(|v| v.name().to_string())
        .collect();
    if declared != intrinsic {
        return Err(schema_err(format!(
            "uncertainty_only must be {intrinsic:?}, found {declared:?}"
        )));
    }

    let properties = parse_properties(section(&root, "properties")?)?;
    let lengths = parse_lengths(section(&root, "lengths")?)?;

    let mut availability = BTreeMap::new();
    let avail_root = section(&root, "availability")?;
    for implantation in Implantation::ALL {
        let grid = section(avail_root, implantation.name())?;
        parse_availability(grid, implantation, &mut availability)?;
    }

    let mut separability = BTreeMap::new();
    let sep_root = section(&root, "separability")?;
    for implantation in Implantation::ALL {
        let grid = section(sep_root, implantation.name())?;
        parse_separability(grid, implantation, &mut separability)?;
    }

    let tasks = parse_tasks(section(&root, "tasks")?)?;

    Ok(KnowledgeBase {
        revision,
        properties,
        lengths,
        availability,
        separability,
        tasks,
        checksum: String::new(),
    })
}

fn parse_properties(table: &Table) -> Result<[PropertyRow; 7], KnowledgeBaseError> {
    expect_columns(table, "properties", &PROPERTY_COLUMNS)?;
    let mut found: BTreeMap<VisualVariable, PropertyRow> = BTreeMap::new();
    for (name, cells) in rows(table, "properties", 4)? {
        let variable = parse_variable(name, "properties")?;
        let mut parsed = [PropertyCell {
            observed: false,
            evidence: Evidence::AuthorEstimate,
        }; 4];
        for (slot, (cell, column)) in parsed.iter_mut().zip(cells.iter().zip(PROPERTY_COLUMNS)) {
            let (inner, established) = unbracket(cell);
            let observed = match inner {
                "Y" => true,
                "-" => false,
                _ => return Err(cell_err("properties", name, column, cell)),
            };
            *slot = PropertyCell {
                observed,
                evidence: evidence(established),
            };
        }
        found.insert(
            variable,
            PropertyRow {
                variable,
                selective: parsed[0],
                associative: parsed[1],
                ordered: parsed[2],
                quantitative: parsed[3],
            },
        );
    }
    let rows: Vec<PropertyRow> = VisualVariable::ALL
        .into_iter()
        .map(|v| {
            found
                .get(&v)
                .copied()
                .ok_or_else(|| schema_err(format!("[properties] is missing row {v}")))
        })
        .collect::<Result<_, _>>()?;
    Ok(rows.try_into().expect("seven rows"))
}

fn parse_lengths(table: &Table) -> Result<[[SelectiveLengthEntry; 3]; 7], KnowledgeBaseError> {
    expect_columns(table, "lengths", &LENGTH_COLUMNS)?;
    let mut found: BTreeMap<VisualVariable, [SelectiveLengthEntry; 3]> = BTreeMap::new();
    for (name, cells) in rows(table, "lengths", 3)? {
        let variable = parse_variable(name, "lengths")?;
        let mut entries = Vec::with_capacity(3);
        for (cell, implantation) in cells.iter().zip(Implantation::ALL) {
            let (inner, established) = unbracket(cell);
            let length = if inner.is_empty() {
                SelectiveLength::Unavailable
            } else {
                match inner.parse::<u32>() {
                    Ok(n) if n > 0 => SelectiveLength::Levels(n),
                    _ => return Err(cell_err("lengths", name, implantation.name(), cell)),
                }
            };
            entries.push(SelectiveLengthEntry {
                variable,
                implantation,
                length,
                evidence: evidence(established),
            });
        }
        found.insert(variable, entries.try_into().expect("three cells"));
    }
    let rows: Vec<_> = VisualVariable::ALL
        .into_iter()
        .map(|v| {
            found
                .get(&v)
                .copied()
                .ok_or_else(|| schema_err(format!("[lengths] is missing row {v}")))
        })
        .collect::<Result<_, _>>()?;
    Ok(rows.try_into().expect("seven rows"))
}

fn parse_availability(
    table: &Table,
    implantation: Implantation,
    out: &mut BTreeMap<(Implantation, Pairing), AvailabilityEntry>,
) -> Result<(), KnowledgeBaseError> {
    let name = format!("availability.{implantation}");
    for (row, cells) in rows(table, &name, 7)? {
        let thematic = parse_variable(row, &name)?;
        for (cell, uncertainty) in cells.iter().zip(VisualVariable::ALL) {
            if cell.is_empty() {
                continue;
            }
            let variant = match cell.as_str() {
                "Y" => None,
                other => {
                    let footnote = other
                        .strip_prefix("Y^")
                        .filter(|s| s.chars().count() == 1)
                        .and_then(|s| s.chars().next())
                        .and_then(PairingVariant::from_footnote);
                    match footnote {
                        Some(v) => Some(v),
                        None => return Err(cell_err(&name, row, uncertainty.name(), cell)),
                    }
                }
            };
            if thematic.is_uncertainty_only() {
                return Err(schema_err(format!(
                    "{thematic} may not hold the thematic dimension ({name})"
                )));
            }
            if matches!(
                variant,
                Some(PairingVariant::LineWidth | PairingVariant::WidthWithDashLength)
            ) && implantation != Implantation::Line
            {
                return Err(schema_err(format!(
                    "line-width variant outside line implantation at {name}.{row}"
                )));
            }
            out.insert(
                (implantation, Pairing::new(thematic, uncertainty)),
                AvailabilityEntry {
                    thematic,
                    uncertainty,
                    implantation,
                    available: true,
                    variant,
                },
            );
        }
    }
    Ok(())
}

fn parse_separability(
    table: &Table,
    implantation: Implantation,
    out: &mut BTreeMap<(Implantation, Pairing), SeparabilityEntry>,
) -> Result<(), KnowledgeBaseError> {
    let name = format!("separability.{implantation}");
    for (row, cells) in rows(table, &name, 7)? {
        let thematic = parse_variable(row, &name)?;
        for (cell, uncertainty) in cells.iter().zip(VisualVariable::ALL) {
            if cell.is_empty() {
                continue;
            }
            let (body, uncertain) = match cell.strip_suffix('*') {
                Some(rest) => (rest, true),
                None => (cell.as_str(), false),
            };
            let (inner, established) = unbracket(body);
            let mut chars = inner.chars();
            let class = match (
                chars.next().and_then(SeparabilityClass::from_letter),
                chars.next(),
            ) {
                (Some(c), None) => c,
                _ => return Err(cell_err(&name, row, uncertainty.name(), cell)),
            };
            out.insert(
                (implantation, Pairing::new(thematic, uncertainty)),
                SeparabilityEntry {
                    thematic,
                    uncertainty,
                    implantation,
                    class,
                    evidence: evidence(established),
                    uncertain_not_recommended: uncertain,
                },
            );
        }
    }
    Ok(())
}

fn parse_tasks(table: &Table) -> Result<Vec<TaskEntry>, KnowledgeBaseError> {
    expect_columns(table, "tasks", &TASK_COLUMNS)?;
    let mut found = BTreeMap::new();
    for (row, cells) in rows(table, "tasks", 2)? {
        let task: OperationalTask = row
            .parse()
            .map_err(|_| schema_err(format!("unknown task `{row}`")))?;
        let arity = match cells[0].as_str() {
            "Univariate" => TaskArity::Univariate,
            "Bivariate" => TaskArity::Bivariate,
            other => return Err(cell_err("tasks", row, "Arity", other)),
        };
        if arity != task.arity() {
            return Err(schema_err(format!(
                "task {task} is listed with the wrong arity"
            )));
        }
        let requirement: PerceptionRequirement = cells[1]
            .parse()
            .map_err(|_| cell_err("tasks", row, "Requirement", &cells[1]))?;
        if !requirement.allowed_for(arity) {
            return Err(schema_err(format!(
                "{requirement} is not a valid requirement for a {arity:?} task ({task})"
            )));
        }
        found.insert(
            task,
            TaskEntry {
                task,
                arity,
                requirement,
            },
        );
    }
    OperationalTask::ALL
        .into_iter()
        .map(|t| {
            found
                .get(&t)
                .copied()
                .ok_or_else(|| schema_err(format!("[tasks] is missing row {t}")))
        })
        .collect()
}

fn bracket(inner: &str, evidence: Evidence) -> String {
    match evidence {
        Evidence::Established => format!("[{inner}]"),
        Evidence::AuthorEstimate => inner.to_string(),
    }
}

fn write_row(out: &mut String, key: &str, cells: &[String]) {
    let quoted: Vec<String> = cells.iter().map(|c| format!("\"{c}\"")).collect();
    let _ = writeln!(out, "{key} = [{}]", quoted.join(", "));
}

fn quoted_list(items: &[&str]) -> String {
    let quoted: Vec<String> = items.iter().map(|c| format!("\"{c}\"")).collect();
    format!("[{}]", quoted.join(", "))
}

pub(super) fn write_canonical(kb: &KnowledgeBase) -> String {
    let mut out = String::from(HEADER);
    let _ = writeln!(out, "\nschema = \"{SCHEMA}\"\nrevision = {}\n", kb.revision);

    let columns: Vec<&str> = VisualVariable::ALL.iter().map(|v| v.name()).collect();
    let only: Vec<&str> = VisualVariable::ALL
        .iter()
        .filter(|v| v.is_uncertainty_only())
        .map(|v| v.name())
        .collect();
    let _ = writeln!(out, "[variables]\ncolumns = {}", quoted_list(&columns));
    let _ = writeln!(out, "uncertainty_only = {}\n", quoted_list(&only));

    let _ = writeln!(
        out,
        "[properties]\ncolumns = {}",
        quoted_list(&PROPERTY_COLUMNS)
    );
    for v in VisualVariable::PROPERTY_ROWS {
        let cells: Vec<String> = kb
            .property_row(v)
            .cells()
            .iter()
            .map(|c| bracket(if c.observed { "Y" } else { "-" }, c.evidence))
            .collect();
        write_row(&mut out, v.name(), &cells);
    }

    let _ = writeln!(
        out,
        "\n[lengths]\ncolumns = {}",
        quoted_list(&LENGTH_COLUMNS)
    );
    for v in VisualVariable::PROPERTY_ROWS {
        let cells: Vec<String> = Implantation::ALL
            .into_iter()
            .map(|i| {
                let e = kb.selective_length(v, i);
                match e.length {
                    SelectiveLength::Levels(n) => bracket(&n.to_string(), e.evidence),
                    SelectiveLength::Unavailable => String::new(),
                }
            })
            .collect();
        write_row(&mut out, v.name(), &cells);
    }

    for i in Implantation::ALL {
        let _ = writeln!(out, "\n[availability.{i}]");
        for t in VisualVariable::THEMATIC_ROWS {
            let cells: Vec<String> = VisualVariable::ALL
                .into_iter()
                .map(|u| {
                    let e = kb.pairing_available(t, u, i);
                    match (e.available, e.variant) {
                        (false, _) => String::new(),
                        (true, None) => "Y".to_string(),
                        (true, Some(v)) => format!("Y^{}", v.footnote()),
                    }
                })
                .collect();
            write_row(&mut out, t.name(), &cells);
        }
    }

    for i in Implantation::ALL {
        let _ = writeln!(out, "\n[separability.{i}]");
        for t in VisualVariable::THEMATIC_ROWS {
            let cells: Vec<String> = VisualVariable::ALL
                .into_iter()
                .map(|u| match kb.separability_class(t, u, i) {
                    Ok(e) => {
                        let mut s = bracket(&e.class.letter().to_string(), e.evidence);
                        if e.uncertain_not_recommended {
                            s.push('*');
                        }
                        s
                    }
                    Err(_) => String::new(),
                })
                .collect();
            write_row(&mut out, t.name(), &cells);
        }
    }

    let _ = writeln!(out, "\n[tasks]\ncolumns = {}", quoted_list(&TASK_COLUMNS));
    for e in &kb.tasks {
        let arity = match e.arity {
            TaskArity::Univariate => "Univariate",
            TaskArity::Bivariate => "Bivariate",
        };
        write_row(
            &mut out,
            e.task.name(),
            &[arity.to_string(), e.requirement.name().to_string()],
        );
    }
    out
}
