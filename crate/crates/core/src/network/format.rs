//! Line-oriented network file format.
//!
//! ```text
//! # comment
//! node <id> <kappa> <tau>
//! link <u> <v> <level> <throughput> <fidelity>
//! ```

use std::fmt::Write as _;

use super::{LinkSpec, NodeId, QuantumNetwork, QuantumNode};
use crate::error::{Error, Result};

fn parse_field<T: std::str::FromStr>(line: usize, name: &str, token: &str) -> Result<T> {
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {name} `{token}`"),
    })
}

pub fn parse_network(text: &str) -> Result<QuantumNetwork> {
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match tokens[0] {
            "node" => {
                if tokens.len() != 4 {
                    return Err(Error::Parse {
                        line,
                        message: format!("node record takes 3 fields, got {}", tokens.len() - 1),
                    });
                }
                nodes.push(QuantumNode {
                    id: NodeId::new(tokens[1]),
                    observation_rate: parse_field(line, "kappa", tokens[2])?,
                    decay_rate: parse_field(line, "tau", tokens[3])?,
                });
            }
            "link" => {
                if tokens.len() != 6 {
                    return Err(Error::Parse {
                        line,
                        message: format!("link record takes 5 fields, got {}", tokens.len() - 1),
                    });
                }
                links.push(LinkSpec {
                    u: NodeId::new(tokens[1]),
                    v: NodeId::new(tokens[2]),
                    level: parse_field(line, "level", tokens[3])?,
                    throughput: parse_field(line, "throughput", tokens[4])?,
                    fidelity: parse_field(line, "fidelity", tokens[5])?,
                });
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown record `{other}`"),
                })
            }
        }
    }
    QuantumNetwork::new(nodes, links)
}

/// Serializes `net`; `parse_network` reads the output back to an equal network.
pub fn write_network(net: &QuantumNetwork) -> String {
    let mut out = String::new();
    for n in net.nodes() {
        let _ = writeln!(out, "node {} {} {}", n.id, n.observation_rate, n.decay_rate);
    }
    for l in net.links() {
        let _ = writeln!(
            out,
            "link {} {} {} {} {}",
            net.id_of(l.u),
            net.id_of(l.v),
            l.level,
            l.throughput,
            l.fidelity
        );
    }
    out
}
