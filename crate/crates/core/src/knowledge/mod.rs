//! Persona, background, and ConceptNet knowledge for debate instances.
//!
//! Knowledge is elicited from a completion client (real or mock) behind a
//! content-addressed cache, parsed into structured records, and persisted
//! as JSONL. All parsing and grounding is pure; only the client talks to
//! the network.

mod client;
mod conceptnet;
mod persona;

pub use client::{
    CachedClient, CachedResponse, CompletionClient, FsCache, MemoryCache, MockClient,
    ResponseCache, RetryPolicy,
};
pub use conceptnet::{
    ground_conceptnet, render_triples, ConceptTriple, KnowledgeForm, TripleStore,
    RELATION_TEMPLATES,
};
pub use persona::{
    build_persona_prompt, generate_background_knowledge, generate_personae, parse_personae,
    persona_set_to_text, personae_to_jsonl, sample_personae, GenerationRequest, PersonaFailure,
    PersonaGenConfig, PersonaGenOutcome, PoolExample, Pools, RawGeneration,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KnowledgeError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("transport failure after {attempts} attempt(s): {last}")]
    Transport { attempts: u32, last: String },
    #[error("cache-only client has no entry for request {hash}")]
    CacheMiss { hash: String },
    #[error("model returned an empty generation")]
    EmptyGeneration,
    #[error("persona {index}: {message}")]
    PersonaParse { index: usize, message: String },
    #[error("persona {index}: unrecognized stance {value:?}")]
    Stance { index: usize, value: String },
    #[error("no language template for relation {relation}")]
    MissingTemplate { relation: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Version tag of the stance synonym table below. Bump when the table
/// changes so persisted personae can be traced to the normalization used.
pub const STANCE_SYNONYMS_VERSION: &str = "1";

/// An audience stance toward the argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stance {
    Pro,
    Con,
    Neutral,
}

impl Stance {
    /// Normalizes a free-text stance word through the synonym table.
    pub fn normalize(raw: &str) -> Option<Stance> {
        let word = raw.trim().trim_end_matches(['.', ',', ';', '!']).to_lowercase();
        match word.as_str() {
            "pro" | "support" | "for" | "agree" => Some(Stance::Pro),
            "con" | "against" | "oppose" => Some(Stance::Con),
            "neutral" | "mixed" | "undecided" => Some(Stance::Neutral),
            _ => None,
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stance::Pro => write!(f, "Pro"),
            Stance::Con => write!(f, "Con"),
            Stance::Neutral => write!(f, "Neutral"),
        }
    }
}

/// One audience persona across the five dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaRecord {
    pub role: String,
    pub stance: Stance,
    pub argument: String,
    pub characters: String,
    pub intent: String,
}

/// The personae generated for one instance, in generation order, with
/// provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaSet {
    pub instance_id: String,
    pub personae: Vec<PersonaRecord>,
    pub model: String,
    pub prompt_hash: String,
}

/// A non-persona knowledge record (background text or rendered ConceptNet
/// knowledge) tied to an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeRecord {
    pub instance_id: String,
    pub kind: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_hash: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stance_synonyms() {
        assert_eq!(Stance::normalize("Support"), Some(Stance::Pro));
        assert_eq!(Stance::normalize("AGAINST"), Some(Stance::Con));
        assert_eq!(Stance::normalize("undecided."), Some(Stance::Neutral));
        assert_eq!(Stance::normalize("banana"), None);
    }
}
