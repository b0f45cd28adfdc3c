//! Line-delimited JSON wire protocol between the harness and provider
//! processes.
//!
//! ```text
//! child  -> {"protocol": 1, "props": ["sascore", ...]}          (handshake)
//! parent -> {"id": "r-1", "smiles": "CCO", "props": ["sascore"]}
//! child  -> {"id": "r-1", "status": "ok", "values": {"sascore": {"v": 1.9, "u": "dimensionless"}}}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Handshake {
    pub protocol: u32,
    pub props: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: String,
    pub smiles: String,
    pub props: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedValue {
    pub v: f64,
    pub u: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: String,
    pub status: ResponseStatus,
    #[serde(default)]
    pub values: BTreeMap<String, TaggedValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Serializes one message as a single line without the trailing newline.
pub fn to_line<T: Serialize>(msg: &T) -> String {
    serde_json::to_string(msg).expect("protocol messages serialize")
}
