//! Plain-text graph files.
//!
//! ```text
//! n L M source_id
//! label_0 label_1 ... label_{n-1}
//! u v
//! ...
//! ```

use std::path::Path;

use super::{GraphError, Label, LabeledGraph};

#[derive(Debug, thiserror::Error)]
pub enum GraphParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> GraphParseError {
    GraphParseError::Syntax { line, msg: msg.into() }
}

fn numbers(line_no: usize, line: &str) -> Result<Vec<u64>, GraphParseError> {
    line.split_whitespace()
        .map(|t| t.parse::<u64>().map_err(|_| syntax(line_no, format!("bad integer {t:?}"))))
        .collect()
}

impl LabeledGraph {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.n, self.label_space, self.message_space, self.source
        );
        let labels: Vec<String> = self.labels.iter().map(|l| l.0.to_string()).collect();
        out.push_str(&labels.join(" "));
        out.push('\n');
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GraphParseError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (no, header) = lines.next().ok_or_else(|| syntax(1, "missing header"))?;
        let h = numbers(no, header)?;
        let [n, l, m, source] = h[..] else {
            return Err(syntax(no, "header must be `n L M source_id`"));
        };
        let (no, label_line) = lines.next().ok_or_else(|| syntax(2, "missing label line"))?;
        let labels: Vec<Label> = numbers(no, label_line)?.into_iter().map(Label).collect();
        let mut edges = Vec::new();
        for (no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            match numbers(no, line)?[..] {
                [u, v] => edges.push((u as usize, v as usize)),
                _ => return Err(syntax(no, "edge line must be `u v`")),
            }
        }
        Ok(LabeledGraph::new(n as usize, edges, labels, source as usize, l, m)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), GraphParseError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, GraphParseError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
