//! Reader and canonical writer for the numeric tables of MATPOWER case files.
//!
//! Only `mpc.<name> = [ ... ];` blocks are read. Rows end at `;` or at a line
//! break, `%` starts a comment, and cell arrays (`{ ... }`) and scalar
//! assignments are skipped. Every table is kept verbatim so that
//! [`write_matpower`] can reproduce it; the bus, branch and gen tables are
//! additionally interpreted into a [`GridCase`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Role of a bus after classification by generator-table membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BusKind {
    Generator,
    Load,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    /// Series reactance in per-unit.
    pub x: f64,
}

/// A numeric table with the source line of each row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub rows: Vec<Vec<f64>>,
    pub lines: Vec<usize>,
}

/// Parsed case: interpreted topology plus every raw table in file order.
#[derive(Clone, Debug)]
pub struct GridCase {
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    /// Generator bus ids in gen-table order, without repeats.
    pub gens: Vec<usize>,
    pub tables: Vec<(String, Table)>,
}

impl GridCase {
    /// Builds a case from topology alone and validates it.
    pub fn new(bus_ids: &[usize], branches: Vec<Branch>, gen_buses: &[usize]) -> Result<Self> {
        let gens = dedup(gen_buses);
        let gen_set: BTreeSet<usize> = gens.iter().copied().collect();
        let buses = bus_ids
            .iter()
            .map(|&id| Bus { id, kind: if gen_set.contains(&id) { BusKind::Generator } else { BusKind::Load } })
            .collect();
        let case = GridCase { buses, branches, gens, tables: Vec::new() };
        case.validate(|_| None)?;
        Ok(case)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Position of a bus id in `buses`.
    pub fn bus_index(&self, id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn generator_count(&self) -> usize {
        self.buses.iter().filter(|b| b.kind == BusKind::Generator).count()
    }

    pub fn load_count(&self) -> usize {
        self.buses.len() - self.generator_count()
    }

    /// Branch positions joining `i` and `j` in either orientation.
    pub fn find_branches(&self, i: usize, j: usize) -> Vec<usize> {
        self.branches
            .iter()
            .enumerate()
            .filter(|(_, b)| (b.from == i && b.to == j) || (b.from == j && b.to == i))
            .map(|(k, _)| k)
            .collect()
    }

    /// `line_of(kind, row)` supplies a source line for error messages.
    fn validate(&self, line_of: impl Fn((&str, usize)) -> Option<usize>) -> Result<()> {
        let fail = |what: (&str, usize), message: String| match line_of(what) {
            Some(line) => Error::Parse { line, message },
            None => Error::Validation(message),
        };
        let mut seen = BTreeSet::new();
        for (k, b) in self.buses.iter().enumerate() {
            if !seen.insert(b.id) {
                return Err(fail(("bus", k), format!("duplicate bus id {}", b.id)));
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            for end in [br.from, br.to] {
                if !seen.contains(&end) {
                    return Err(fail(("branch", k), format!("branch references unknown bus {end}")));
                }
            }
            if br.from == br.to {
                return Err(fail(("branch", k), format!("branch connects bus {} to itself", br.from)));
            }
            if !(br.x > 0.0 && br.x.is_finite()) {
                return Err(fail(
                    ("branch", k),
                    format!("branch {}-{} has nonpositive reactance {}", br.from, br.to, br.x),
                ));
            }
        }
        for (k, g) in self.gens.iter().enumerate() {
            if !seen.contains(g) {
                return Err(fail(("gen", k), format!("generator at unknown bus {g}")));
            }
        }
        if self.gens.is_empty() {
            return Err(fail(("gen", 0), "case has no generators".into()));
        }
        Ok(())
    }
}

fn dedup(ids: &[usize]) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    ids.iter().copied().filter(|g| seen.insert(*g)).collect()
}

enum Block {
    Outside,
    Matrix { name: String, start: usize, table: Table, row: Vec<f64>, row_line: usize },
    Cell { start: usize },
}

/// Parses MATPOWER case text.
pub fn parse_matpower(text: &str) -> Result<GridCase> {
    let tables = parse_tables(text)?;
    interpret(tables)
}

/// Reads every numeric table without interpreting it.
pub fn parse_tables(text: &str) -> Result<Vec<(String, Table)>> {
    let mut tables: Vec<(String, Table)> = Vec::new();
    let mut block = Block::Outside;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut rest = strip_comment(raw).trim();
        if let Block::Outside = block {
            if rest.is_empty() {
                continue;
            }
            let Some((lhs, rhs)) = rest.split_once('=') else { continue };
            let lhs = lhs.trim();
            let rhs = rhs.trim_start();
            let Some(name) = lhs.strip_prefix("mpc.") else { continue };
            if let Some(after) = rhs.strip_prefix('[') {
                if tables.iter().any(|(n, _)| n == name) {
                    return Err(Error::Parse { line: line_no, message: format!("table {name} defined twice") });
                }
                block = Block::Matrix {
                    name: name.to_string(),
                    start: line_no,
                    table: Table { rows: Vec::new(), lines: Vec::new() },
                    row: Vec::new(),
                    row_line: line_no,
                };
                rest = after;
            } else if let Some(after) = rhs.strip_prefix('{') {
                block = Block::Cell { start: line_no };
                rest = after;
            } else {
                continue;
            }
        }
        match &mut block {
            Block::Outside => {}
            Block::Cell { .. } => {
                if rest.contains('}') {
                    block = Block::Outside;
                }
            }
            Block::Matrix { name, table, row, row_line, .. } => {
                let (body, closed) = match rest.find(']') {
                    Some(end) => (&rest[..end], true),
                    None => (rest, false),
                };
                for (k, segment) in body.split(';').enumerate() {
                    if k > 0 {
                        finish_row(name, table, row, *row_line)?;
                    }
                    for token in segment.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                        if row.is_empty() {
                            *row_line = line_no;
                        }
                        let value = parse_number(token).ok_or_else(|| Error::Parse {
                            line: line_no,
                            message: format!("non-numeric token {token:?} in table {name}"),
                        })?;
                        row.push(value);
                    }
                }
                // a line break also ends a row inside brackets
                finish_row(name, table, row, *row_line)?;
                if closed {
                    let Block::Matrix { name, table, .. } = std::mem::replace(&mut block, Block::Outside) else {
                        unreachable!()
                    };
                    tables.push((name, table));
                }
            }
        }
    }
    match block {
        Block::Outside => Ok(tables),
        Block::Matrix { name, start, .. } => {
            Err(Error::Parse { line: start, message: format!("unterminated matrix block mpc.{name}") })
        }
        Block::Cell { start } => Err(Error::Parse { line: start, message: "unterminated cell block".into() }),
    }
}

fn strip_comment(line: &str) -> &str {
    // quotes only appear in scalar string assignments, which are skipped
    match line.find('%') {
        Some(k) => &line[..k],
        None => line,
    }
}

fn parse_number(token: &str) -> Option<f64> {
    match token {
        "Inf" | "inf" => Some(f64::INFINITY),
        "-Inf" | "-inf" => Some(f64::NEG_INFINITY),
        "NaN" | "nan" => Some(f64::NAN),
        _ => token.parse().ok().filter(|v: &f64| v.is_finite()),
    }
}

fn finish_row(name: &str, table: &mut Table, row: &mut Vec<f64>, line: usize) -> Result<()> {
    if row.is_empty() {
        return Ok(());
    }
    if let Some(first) = table.rows.first() {
        if first.len() != row.len() {
            return Err(Error::Parse {
                line,
                message: format!("table {name} row has {} columns, expected {}", row.len(), first.len()),
            });
        }
    }
    table.rows.push(std::mem::take(row));
    table.lines.push(line);
    Ok(())
}

fn interpret(tables: Vec<(String, Table)>) -> Result<GridCase> {
    let get = |name: &str| -> Result<&Table> {
        tables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::Parse { line: 0, message: format!("missing required table mpc.{name}") })
    };
    let (bus, branch, gen) = (get("bus")?, get("branch")?, get("gen")?);
    let id_at = |t: &Table, k: usize, col: usize, what: &str| -> Result<usize> {
        let line = t.lines[k];
        let v = *t.rows[k].get(col).ok_or_else(|| Error::Parse {
            line,
            message: format!("{what} row needs at least {} columns", col + 1),
        })?;
        if v >= 1.0 && v.fract() == 0.0 && v < usize::MAX as f64 {
            Ok(v as usize)
        } else {
            Err(Error::Parse { line, message: format!("{what} id {v} is not a positive integer") })
        }
    };

    let bus_ids = (0..bus.rows.len()).map(|k| id_at(bus, k, 0, "bus")).collect::<Result<Vec<_>>>()?;
    let mut branches = Vec::with_capacity(branch.rows.len());
    for k in 0..branch.rows.len() {
        let from = id_at(branch, k, 0, "branch from-bus")?;
        let to = id_at(branch, k, 1, "branch to-bus")?;
        let x = *branch.rows[k].get(3).ok_or_else(|| Error::Parse {
            line: branch.lines[k],
            message: "branch row needs at least 4 columns".into(),
        })?;
        branches.push(Branch { from, to, x });
    }
    let gen_buses = (0..gen.rows.len()).map(|k| id_at(gen, k, 0, "gen bus")).collect::<Result<Vec<_>>>()?;
    let gens = dedup(&gen_buses);
    let gen_set: BTreeSet<usize> = gens.iter().copied().collect();
    let buses = bus_ids
        .iter()
        .map(|&id| Bus { id, kind: if gen_set.contains(&id) { BusKind::Generator } else { BusKind::Load } })
        .collect();

    // error lines for gen rows refer to the first row naming that bus
    let mut gen_lines = BTreeMap::new();
    for (k, g) in gen_buses.iter().enumerate() {
        gen_lines.entry(*g).or_insert(gen.lines[k]);
    }
    let case = GridCase { buses, branches, gens, tables: Vec::new() };
    case.validate(|(kind, k)| match kind {
        "bus" => bus.lines.get(k).copied(),
        "branch" => branch.lines.get(k).copied(),
        "gen" => case.gens.get(k).and_then(|g| gen_lines.get(g).copied()).or(Some(0)),
        _ => None,
    })?;
    Ok(GridCase { tables, ..case })
}

/// Canonical text form of every table; parsing it yields identical tables.
pub fn write_matpower(case: &GridCase) -> String {
    let mut out = String::from("function mpc = case\n");
    let emit = |out: &mut String, name: &str, rows: &[Vec<f64>]| {
        let _ = writeln!(out, "mpc.{name} = [");
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
            let _ = writeln!(out, "\t{};", cells.join("\t"));
        }
        out.push_str("];\n");
    };
    if case.tables.is_empty() {
        let bus: Vec<Vec<f64>> = case
            .buses
            .iter()
            .map(|b| vec![b.id as f64, if b.kind == BusKind::Generator { 2.0 } else { 1.0 }])
            .collect();
        let branch: Vec<Vec<f64>> =
            case.branches.iter().map(|b| vec![b.from as f64, b.to as f64, 0.0, b.x]).collect();
        let gen: Vec<Vec<f64>> = case.gens.iter().map(|g| vec![*g as f64]).collect();
        emit(&mut out, "bus", &bus);
        emit(&mut out, "gen", &gen);
        emit(&mut out, "branch", &branch);
    } else {
        for (name, table) in &case.tables {
            emit(&mut out, name, &table.rows);
        }
    }
    out
}

fn format_number(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "Inf".into() } else { "-Inf".into() }
    } else if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str = "\
function mpc = tiny
mpc.baseMVA = 100;
mpc.bus = [
\t1\t3\t0;
\t2\t1\t50;  % load
];
mpc.gen = [
\t1\t0;
];
mpc.branch = [
\t1\t2\t0.01\t0.1;
];
mpc.bus_name = {
\t'one';
\t'two';
};
";

    #[test]
    fn two_bus_fixture() {
        let case = parse_matpower(TWO_BUS).unwrap();
        assert_eq!(case.buses.len(), 2);
        assert_eq!(case.branches, vec![Branch { from: 1, to: 2, x: 0.1 }]);
        assert_eq!(case.gens, vec![1]);
        assert_eq!(case.buses[1].kind, BusKind::Load);
        assert_eq!(case.table("bus").unwrap().lines, vec![4, 5]);
    }

    #[test]
    fn rows_on_one_line_and_commas() {
        let text = "mpc.bus = [1 1; 2 1];\nmpc.gen = [1, 0];\nmpc.branch = [1 2 0 0.5\n];";
        let case = parse_matpower(text).unwrap();
        assert_eq!(case.buses.len(), 2);
        assert_eq!(case.branches[0].x, 0.5);
    }

    #[test]
    fn dangling_block_names_its_line() {
        let text = "mpc.bus = [1 1;];\nmpc.gen = [1];\n\nmpc.branch = [\n 1 1 0 1;\n";
        match parse_matpower(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("branch"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_token_and_unknown_bus() {
        let text = "mpc.bus = [\n1 1;\n2 x;\n];";
        assert!(matches!(parse_matpower(text), Err(Error::Parse { line: 3, .. })));
        let text = "mpc.bus = [1 1; 2 1];\nmpc.gen = [1];\nmpc.branch = [\n1 2 0 0.1;\n1 7 0 0.1;\n];";
        match parse_matpower(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains('7'));
            }
            other => panic!("{other:?}"),
        }
        let missing = "mpc.bus = [1 1];\nmpc.branch = [];";
        assert!(matches!(parse_matpower(missing), Err(Error::Parse { .. })));
    }

    #[test]
    fn ragged_rows_and_bad_reactance() {
        assert!(parse_matpower("mpc.bus = [\n1 1;\n2;\n];").is_err());
        let text = "mpc.bus = [1; 2];\nmpc.gen = [1];\nmpc.branch = [\n1 2 0 0;\n];";
        assert!(matches!(parse_matpower(text), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn canonical_round_trip() {
        let case = parse_matpower(TWO_BUS).unwrap();
        let text = write_matpower(&case);
        let again = parse_matpower(&text).unwrap();
        let strip = |c: &GridCase| c.tables.iter().map(|(n, t)| (n.clone(), t.rows.clone())).collect::<Vec<_>>();
        assert_eq!(strip(&case), strip(&again));
        assert_eq!(write_matpower(&again), text);
    }

    #[test]
    fn topology_only_case_writes_parseable_text() {
        let case = GridCase::new(&[1, 2, 3], vec![Branch { from: 1, to: 3, x: 0.2 }], &[3, 3]).unwrap();
        assert_eq!(case.gens, vec![3]);
        let again = parse_matpower(&write_matpower(&case)).unwrap();
        assert_eq!(again.branches, case.branches);
        assert_eq!(again.gens, case.gens);
    }
}
