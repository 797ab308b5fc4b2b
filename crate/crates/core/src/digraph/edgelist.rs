use std::fmt::Write as _;

use thiserror::Error;

use super::{Digraph, GraphError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing node count line")]
    MissingHeader,
    #[error("line {line}: {source}")]
    Graph {
        line: usize,
        #[source]
        source: GraphError,
    },
}

/// Parses the edge-list format: a node count, then one `u v` pair per line.
/// `#` starts a comment; blank lines are ignored.
pub fn parse_edge_list(text: &str) -> Result<Digraph, ParseError> {
    let mut n: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<usize>().map_err(|_| ParseError::Syntax {
                line,
                msg: format!("expected a non-negative integer, found {s:?}"),
            })
        };
        match (n, fields.as_slice()) {
            (None, [count]) => n = Some((num(count)?, line)),
            (None, _) => {
                return Err(ParseError::Syntax {
                    line,
                    msg: "first line must hold only the node count".into(),
                })
            }
            (Some((count, _)), [u, v]) => {
                let (u, v) = (num(u)?, num(v)?);
                if u >= count || v >= count {
                    return Err(ParseError::Graph {
                        line,
                        source: GraphError::NodeOutOfRange(u, v, count),
                    });
                }
                if u == v {
                    return Err(ParseError::Graph {
                        line,
                        source: GraphError::SelfLoop(u),
                    });
                }
                edges.push((u, v));
            }
            (Some(_), _) => {
                return Err(ParseError::Syntax {
                    line,
                    msg: format!("expected `u v`, found {content:?}"),
                })
            }
        }
    }
    let (count, line) = n.ok_or(ParseError::MissingHeader)?;
    Digraph::new(count, edges).map_err(|source| ParseError::Graph { line, source })
}

/// Canonical text form: node count then edges in ascending order.
pub fn format_edge_list(g: &Digraph) -> String {
    let mut s = format!("{}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}
