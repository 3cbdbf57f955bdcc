//! File formats: graph documents (text and JSON), maximal-independent-set
//! listings, long-form contingency-table CSV, and numeric data-matrix CSV.

use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::gaussian::DataMatrix;
use crate::graph::{UndirectedGraph, VertexSet};
use crate::loglinear::{ContingencyTable, Variable};

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_error(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses a graph document. JSON (`{"vertices":[...],"edges":[["X","Y"],...]}`)
/// is detected by a leading `{`; anything else is the text format: one
/// `vertices:` line of comma-separated labels followed by `edge: X Y` lines.
/// Blank lines and `#` comments are allowed.
pub fn parse_graph(text: &str, source: &str) -> Result<UndirectedGraph> {
    if text.trim_start().starts_with('{') {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| parse_error(source, e.line(), e.to_string()))?;
        return graph_from_json(&value, source);
    }
    let mut graph: Option<UndirectedGraph> = None;
    let mut pending_edges: Vec<(String, String, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("vertices:") {
            if graph.is_some() {
                return Err(parse_error(source, line_no, "second vertices: line"));
            }
            let labels: Vec<String> = rest
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if labels.is_empty() {
                return Err(parse_error(source, line_no, "vertices: line lists no labels"));
            }
            graph = Some(UndirectedGraph::new(labels).map_err(|e| {
                parse_error(source, line_no, e.to_string())
            })?);
        } else if let Some(rest) = line.strip_prefix("edge:") {
            let ends: Vec<&str> = rest.split_whitespace().collect();
            if ends.len() != 2 {
                return Err(parse_error(
                    source,
                    line_no,
                    format!("edge: needs exactly two labels, got {}", ends.len()),
                ));
            }
            pending_edges.push((ends[0].to_string(), ends[1].to_string(), line_no));
        } else {
            return Err(parse_error(
                source,
                line_no,
                format!("expected `vertices:` or `edge:`, got `{line}`"),
            ));
        }
    }
    let mut graph = graph.ok_or_else(|| parse_error(source, 1, "missing vertices: line"))?;
    for (a, b, line_no) in pending_edges {
        graph
            .add_edge(&a, &b)
            .map_err(|e| parse_error(source, line_no, e.to_string()))?;
    }
    Ok(graph)
}

fn string_array(value: &Value, what: &str, source: &str) -> Result<Vec<String>> {
    value
        .as_array()
        .ok_or_else(|| parse_error(source, 1, format!("{what} must be an array")))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| parse_error(source, 1, format!("{what} entries must be strings")))
        })
        .collect()
}

fn graph_from_json(value: &Value, source: &str) -> Result<UndirectedGraph> {
    let object = value
        .as_object()
        .ok_or_else(|| parse_error(source, 1, "graph JSON must be an object"))?;
    let vertices = object
        .get("vertices")
        .ok_or_else(|| parse_error(source, 1, "graph JSON needs a \"vertices\" key"))?;
    let mut graph = UndirectedGraph::new(string_array(vertices, "vertices", source)?)
        .map_err(|e| parse_error(source, 1, e.to_string()))?;
    if let Some(edges) = object.get("edges") {
        let edges = edges
            .as_array()
            .ok_or_else(|| parse_error(source, 1, "edges must be an array"))?;
        for edge in edges {
            let pair = string_array(edge, "edge", source)?;
            if pair.len() != 2 {
                return Err(parse_error(source, 1, "each edge must hold two labels"));
            }
            graph
                .add_edge(&pair[0], &pair[1])
                .map_err(|e| parse_error(source, 1, e.to_string()))?;
        }
    }
    Ok(graph)
}

pub fn load_graph(path: &Path) -> Result<UndirectedGraph> {
    parse_graph(&read_file(path)?, &path.display().to_string())
}

/// Renders a graph in the text format, canonical order throughout.
pub fn graph_to_text(g: &UndirectedGraph) -> String {
    let mut out = format!("vertices: {}\n", g.vertices().join(","));
    for (a, b) in g.edges() {
        out.push_str(&format!("edge: {a} {b}\n"));
    }
    out
}

pub fn graph_to_json(g: &UndirectedGraph) -> Value {
    serde_json::json!({
        "vertices": g.vertices(),
        "edges": g.edges().into_iter().map(|(a, b)| vec![a, b]).collect::<Vec<_>>(),
    })
}

/// Parses a listing of vertex sets: either one comma-separated set per line
/// (the `amis` command's text output), or JSON — a bare array of arrays or
/// an object with a `"sets"` key.
pub fn parse_vertex_sets(text: &str, source: &str) -> Result<Vec<VertexSet>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| parse_error(source, e.line(), e.to_string()))?;
        let sets = match &value {
            Value::Array(_) => &value,
            Value::Object(o) => o
                .get("sets")
                .ok_or_else(|| parse_error(source, 1, "set JSON needs a \"sets\" key"))?,
            _ => return Err(parse_error(source, 1, "expected an array or object")),
        };
        let arrays = sets
            .as_array()
            .ok_or_else(|| parse_error(source, 1, "\"sets\" must be an array"))?;
        return arrays
            .iter()
            .map(|a| Ok(VertexSet::from_labels(string_array(a, "set", source)?)))
            .collect();
    }
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let labels: Vec<String> = line
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if labels.is_empty() {
            return Err(parse_error(source, idx + 1, "empty set"));
        }
        out.push(VertexSet::from_labels(labels));
    }
    Ok(out)
}

pub fn load_vertex_sets(path: &Path) -> Result<Vec<VertexSet>> {
    parse_vertex_sets(&read_file(path)?, &path.display().to_string())
}

/// Loads a long-form contingency table: header row naming the variables with
/// a final `count` column; one row per cell; missing cells are 0; duplicate
/// rows accumulate. Level order follows first appearance in the file.
pub fn load_contingency_csv(path: &Path) -> Result<ContingencyTable> {
    let source = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_error(&source, 1, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| parse_error(&source, 1, e.to_string()))?
        .clone();
    if headers.len() < 2 || headers.iter().next_back() != Some("count") {
        return Err(parse_error(
            &source,
            1,
            "need at least one variable column and a final `count` column",
        ));
    }
    let names: Vec<String> = headers.iter().take(headers.len() - 1).map(str::to_string).collect();

    let mut levels: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    let mut rows: Vec<(Vec<usize>, f64)> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let line_no = row_idx + 2;
        let record = record.map_err(|e| parse_error(&source, line_no, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(parse_error(
                &source,
                line_no,
                format!("expected {} fields, got {}", headers.len(), record.len()),
            ));
        }
        let mut assignment = Vec::with_capacity(names.len());
        for (col, field) in record.iter().take(names.len()).enumerate() {
            let idx = match levels[col].iter().position(|l| l == field) {
                Some(idx) => idx,
                None => {
                    levels[col].push(field.to_string());
                    levels[col].len() - 1
                }
            };
            assignment.push(idx);
        }
        let count: f64 = record[names.len()]
            .parse()
            .map_err(|_| parse_error(&source, line_no, format!("bad count `{}`", &record[names.len()])))?;
        if !count.is_finite() || count < 0.0 {
            return Err(parse_error(&source, line_no, "counts must be nonnegative"));
        }
        rows.push((assignment, count));
    }

    let variables: Vec<Variable> = names
        .into_iter()
        .zip(&levels)
        .map(|(name, levels)| Variable::new(name, levels.iter().cloned()))
        .collect();
    let cells: usize = variables.iter().map(|v| v.levels.len()).product();
    let mut counts = vec![0.0f64; cells];
    let strides = {
        let mut s = vec![1usize; variables.len()];
        for i in (0..variables.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * variables[i + 1].levels.len();
        }
        s
    };
    for (assignment, count) in rows {
        let idx: usize = assignment.iter().zip(&strides).map(|(&a, &s)| a * s).sum();
        counts[idx] += count;
    }
    ContingencyTable::new(variables, counts)
}

/// Loads a numeric data matrix. Fields may be separated by commas or
/// whitespace (sniffed from the first line). A non-numeric first row is
/// taken as the header; otherwise columns are named V1..Vp. A column named
/// `class` (any case) is dropped with a warning, as is the eighth column of
/// a headerless eight-column file (the seeds-data class label).
pub fn load_data_matrix(path: &Path) -> Result<(DataMatrix, Vec<String>)> {
    let source = path.display().to_string();
    let text = read_file(path)?;
    let mut warnings = Vec::new();

    let split = |line: &str| -> Vec<String> {
        if line.contains(',') {
            line.split(',').map(|f| f.trim().to_string()).collect()
        } else {
            line.split_whitespace().map(str::to_string).collect()
        }
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (first_no, first_line) = lines
        .next()
        .ok_or_else(|| parse_error(&source, 1, "empty data file"))?;
    let first = split(first_line);
    let all_numeric = first.iter().all(|f| f.parse::<f64>().is_ok());
    let (mut names, mut data, mut rows) = if all_numeric {
        let names = (1..=first.len()).map(|i| format!("V{i}")).collect::<Vec<_>>();
        let row: Vec<f64> = first.iter().map(|f| f.parse().expect("checked numeric")).collect();
        (names, row, 1usize)
    } else {
        (first, Vec::new(), 0usize)
    };
    let width = names.len();
    if all_numeric && width == 8 {
        warnings.push(
            "headerless 8-column file: dropping the 8th column (class label), keeping V1..V7"
                .to_string(),
        );
    }
    let _ = first_no;

    for (line_no, line) in lines {
        let fields = split(line);
        if fields.len() != width {
            return Err(parse_error(
                &source,
                line_no,
                format!("expected {width} fields, got {}", fields.len()),
            ));
        }
        for field in &fields {
            let value: f64 = field
                .parse()
                .map_err(|_| parse_error(&source, line_no, format!("bad number `{field}`")))?;
            data.push(value);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_error(&source, 1, "no data rows"));
    }

    // column drops: named `class`, or the headerless seeds shape
    let mut drop: Option<usize> = names
        .iter()
        .position(|n| n.eq_ignore_ascii_case("class"));
    if let Some(col) = drop {
        warnings.push(format!("dropping column `{}`", names[col]));
    } else if all_numeric && width == 8 {
        drop = Some(7);
    }
    if let Some(col) = drop {
        names.remove(col);
        let mut kept = Vec::with_capacity(rows * names.len());
        for row in 0..rows {
            for c in 0..width {
                if c != col {
                    kept.push(data[row * width + c]);
                }
            }
        }
        data = kept;
    }

    Ok((DataMatrix::new(names, data)?, warnings))
}
