//! Shipped JSON schemas and validation against them.

use std::sync::OnceLock;

use jsonschema::{Registry, Validator};
use serde_json::Value;

use crate::failure::Failure;

const BASE: &str = "https://bladegauge.example/schemas/";

const SOURCES: [(&str, &str); 6] = [
    ("config.schema.json", include_str!("../../../schemas/config.schema.json")),
    ("darboux.schema.json", include_str!("../../../schemas/darboux.schema.json")),
    ("grid.schema.json", include_str!("../../../schemas/grid.schema.json")),
    ("scenario.schema.json", include_str!("../../../schemas/scenario.schema.json")),
    ("sigma_init.schema.json", include_str!("../../../schemas/sigma_init.schema.json")),
    ("tolerances.schema.json", include_str!("../../../schemas/tolerances.schema.json")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Config,
    Darboux,
    Grid,
    Scenario,
    SigmaInit,
}

impl Schema {
    fn file(self) -> &'static str {
        match self {
            Schema::Config => "config.schema.json",
            Schema::Darboux => "darboux.schema.json",
            Schema::Grid => "grid.schema.json",
            Schema::Scenario => "scenario.schema.json",
            Schema::SigmaInit => "sigma_init.schema.json",
        }
    }
}

fn parse(src: &str) -> Value {
    serde_json::from_str(src).expect("shipped schema is valid JSON")
}

fn registry() -> &'static Registry<'static> {
    static REGISTRY: OnceLock<Registry<'static>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut builder = Registry::new();
        for (name, src) in SOURCES {
            builder = builder.add(format!("{BASE}{name}"), parse(src)).expect("schema registers");
        }
        builder.prepare().expect("schema registry resolves")
    })
}

fn validator(schema: Schema) -> Validator {
    let root = serde_json::json!({ "$ref": format!("{BASE}{}", schema.file()) });
    jsonschema::options()
        .with_registry(registry())
        .build(&root)
        .expect("shipped schema compiles")
}

/// Rejects `value` with the instance path of the first violation.
pub fn validate(schema: Schema, value: &Value, origin: &str) -> Result<(), Failure> {
    let v = validator(schema);
    let first = v.iter_errors(value).next();
    match first {
        None => Ok(()),
        Some(err) => {
            let path = err.instance_path().to_string();
            let path = if path.is_empty() { "/".to_string() } else { path };
            Err(Failure::Usage(format!(
                "{origin}: schema violation at {path} ({}): {err}",
                schema.file()
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn shipped_schemas_compile() {
        for s in [Schema::Config, Schema::Darboux, Schema::Grid, Schema::Scenario, Schema::SigmaInit] {
            validator(s);
        }
    }

    #[test]
    fn scenario_examples() {
        let ok = json!({"scenario": "plane_wave", "k": [1, 0, 0, 1], "n": [0, 1, 0, 0]});
        assert!(validate(Schema::Scenario, &ok, "t").is_ok());
        let darboux = json!({"scenario": "darboux", "pairs": [{"pi": "x0", "phi": "x1"}]});
        assert!(validate(Schema::Scenario, &darboux, "t").is_ok());
        let bad = json!({"scenario": "plane_wave", "k": [1, 0, 0, 1], "n": "up"});
        let Err(Failure::Usage(msg)) = validate(Schema::Scenario, &bad, "t") else {
            panic!("accepted")
        };
        assert!(msg.contains("/n"), "{msg}");
        assert!(validate(Schema::Scenario, &json!({"scenario": "nope"}), "t").is_err());
    }

    #[test]
    fn config_rejects_unknown_keys_and_foreign_step() {
        assert!(validate(Schema::Config, &json!({"scenario": "monopole", "g": 0.5}), "t").is_ok());
        assert!(validate(Schema::Config, &json!({"scenario": "monopole", "colour": 1}), "t").is_err());
        let step = json!({"tolerances": {"fd_step": 0.01}});
        assert!(validate(Schema::Config, &step, "t").is_err());
    }

    #[test]
    fn sigma_init_needs_exactly_one_source() {
        let axes = json!({"lower": [0.0], "upper": [1.0], "points": [2], "periodic": [false]});
        assert!(validate(Schema::SigmaInit, &axes, "t").is_err());
        let mut with_sites = axes.clone();
        with_sites["sites"] = json!([[[[1, 0]]], [[[1, 0]]]]);
        assert!(validate(Schema::SigmaInit, &with_sites, "t").is_ok());
    }
}
