//! JSON description of a network, in compact or subsystem form.
//!
//! Compact form:
//!
//! ```json
//! {"a": [[0.5, 0.1], [0.0, 0.3]],
//!  "links": [{"id": "L1", "b": [1, 0], "c": [0, 1], "sigma": 0.1}]}
//! ```
//!
//! Subsystem form (node indices are 1-based):
//!
//! ```json
//! {"subsystems": [{"a": [[0.3]], "b": [1], "c": [1]}, {"a": [[0.3]], "b": [1], "c": [1]}],
//!  "couplings": [{"from": 1, "to": 2, "mu": 0.2, "a": 0, "b": 1}],
//!  "uncertain": [{"from": 1, "to": 2, "sigma": 0.1}]}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::network::{
    assemble_network, network_from_directions, AssembledNetwork, CouplingLink, Direction, Subsystem, UncertainLink,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetworkSpec {
    Compact {
        a: Vec<Vec<f64>>,
        links: Vec<LinkSpec>,
    },
    Subsystems {
        subsystems: Vec<SubsystemSpec>,
        #[serde(default)]
        couplings: Vec<CouplingSpec>,
        #[serde(default)]
        uncertain: Vec<UncertainSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub id: String,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default = "unit")]
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemSpec {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub from: usize,
    pub to: usize,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertainSpec {
    pub from: usize,
    pub to: usize,
    #[serde(default = "unit")]
    pub sigma: f64,
}

fn unit() -> f64 {
    1.0
}

impl NetworkSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<AssembledNetwork> {
        match self {
            NetworkSpec::Compact { a, links } => {
                let links = links.iter().map(|l| Direction::new(l.id.as_str(), l.b.clone(), l.c.clone(), l.sigma)).collect();
                network_from_directions(DenseMatrix::from_rows(a)?, links)
            }
            NetworkSpec::Subsystems { subsystems, couplings, uncertain } => {
                let subs = subsystems
                    .iter()
                    .map(|s| Subsystem::new(DenseMatrix::from_rows(&s.a)?, s.b.clone(), s.c.clone()))
                    .collect::<Result<Vec<_>>>()?;
                let couplings: Vec<CouplingLink> = couplings
                    .iter()
                    .map(|c| CouplingLink { from: c.from, to: c.to, mu: c.mu, a: c.a, b: c.b })
                    .collect();
                let uncertain: Vec<UncertainLink> =
                    uncertain.iter().map(|u| UncertainLink { from: u.from, to: u.to, sigma: u.sigma }).collect();
                assemble_network(&subs, &couplings, &uncertain)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn compact_form() {
        let spec = NetworkSpec::from_json(
            r#"{"a": [[0.5, 0.1], [0.0, 0.3]], "links": [{"id": "L1", "b": [1, 0], "c": [0, 1]}]}"#,
        )
        .unwrap();
        let net = spec.build().unwrap();
        assert_eq!(net.dim(), 2);
        assert_eq!(net.sigmas(), vec![1.0]);
    }

    #[test]
    fn subsystem_form() {
        let text = r#"{"subsystems": [{"a": [[0.3]], "b": [1], "c": [1]}, {"a": [[0.3]], "b": [1], "c": [1]}],
            "couplings": [{"from": 1, "to": 2, "mu": 0.2, "a": 0, "b": 1}],
            "uncertain": [{"from": 1, "to": 2, "sigma": 0.1}]}"#;
        let net = NetworkSpec::from_json(text).unwrap().build().unwrap();
        assert_eq!(net.state_map().to_row_major(), vec![0.3, 0.2, 0.0, 0.3]);
        assert_eq!(net.link_ids()[0].as_str(), "1-2");
    }

    #[test]
    fn malformed_json_is_an_input_error() {
        let err = NetworkSpec::from_json(r#"{"a": 3}"#).unwrap_err();
        assert!(err.is_input_error());
        let ragged = NetworkSpec::from_json(r#"{"a": [[1, 0], [0]], "links": []}"#).unwrap();
        assert!(matches!(ragged.build(), Err(Error::Dimension(_)) | Err(Error::Validation(_))));
    }
}
