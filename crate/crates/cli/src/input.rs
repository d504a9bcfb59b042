use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses `text` into `T`, reporting the failing field path and position.
pub fn parse<T: DeserializeOwned>(text: &str, path: &str) -> Result<T, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        CliError::Schema {
            path: path.to_string(),
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| CliError::Schema {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        field: ".".into(),
        message: e.to_string(),
    })?;
    Ok(value)
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<(T, serde_json::Value), CliError> {
    let text = read_text(path)?;
    let display = path.display().to_string();
    let echo: serde_json::Value = parse(&text, &display)?;
    Ok((parse(&text, &display)?, echo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use asymlab::constructor::TargetSpectrum;

    #[test]
    fn schema_error_names_the_field() {
        let text = "{\n  \"atoms\": [{\"lambda\": 0.5, \"mult\": \"lots\"}]\n}";
        match parse::<TargetSpectrum>(text, "t.json") {
            Err(CliError::Schema { line, field, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(field, "atoms[0].mult");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
