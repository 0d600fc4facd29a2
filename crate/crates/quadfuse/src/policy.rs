//! Line-oriented resolution-policy format.
//!
//! ```text
//! # conflicts resolve to all values unless configured otherwise
//! default function=ALL on-error=RETURN_ALL agree-coefficient=4
//! property <http://www.w3.org/2000/01/rdf-schema#label> function=BEST
//! property <http://example.org/tags> function=ALL cardinality=MANYVALUED
//! property <http://example.org/rank> function=TOPN n=3
//! property <http://example.org/note> function=CONCAT separator="; "
//! ```
//!
//! One `default` line at most; one `property` line per IRI. Everything not
//! recognized as `function`, `cardinality`, `on-error` or
//! `agree-coefficient` is passed to the resolution function as a string
//! parameter. Values may be double-quoted to carry spaces.

use thiserror::Error;

use crate::engine::{Cardinality, ErrorStrategy, ResolutionPolicy, ResolutionStrategy};
use crate::functions::{validate_strategy, FunctionError};
use crate::model::Uri;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("policy line {line}: {source}")]
    Function {
        line: usize,
        #[source]
        source: FunctionError,
    },
}

/// Parses the policy text. Unspecified fields inherit the built-in
/// defaults (function=ALL, cardinality=SINGLEVALUED, on-error=RETURN_ALL,
/// agree-coefficient=4); an empty file yields the default policy.
pub fn parse_policy(text: &str) -> Result<ResolutionPolicy, PolicyError> {
    let mut policy = ResolutionPolicy::default();
    let mut saw_default = false;

    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let tokens = tokenize(raw_line, line)?;
        let Some(head) = tokens.first() else { continue };
        match head.as_str() {
            "default" => {
                if saw_default {
                    return Err(syntax(line, "duplicate default line"));
                }
                saw_default = true;
                let mut strategy = ResolutionStrategy::default();
                apply_pairs(&mut strategy, &tokens[1..], line)?;
                validate_strategy(&strategy)
                    .map_err(|source| PolicyError::Function { line, source })?;
                policy.default_strategy = strategy;
            }
            "property" => {
                let Some(iri_token) = tokens.get(1) else {
                    return Err(syntax(line, "property line needs an <IRI>"));
                };
                let iri = iri_token
                    .strip_prefix('<')
                    .and_then(|s| s.strip_suffix('>'))
                    .filter(|s| !s.is_empty() && !s.chars().any(char::is_whitespace))
                    .ok_or_else(|| syntax(line, "property IRI must be written as <IRI>"))?;
                let property = Uri::new(iri);
                if policy.per_property.contains_key(&property) {
                    return Err(syntax(line, &format!("duplicate property <{iri}>")));
                }
                let mut strategy = ResolutionStrategy::default();
                apply_pairs(&mut strategy, &tokens[2..], line)?;
                validate_strategy(&strategy)
                    .map_err(|source| PolicyError::Function { line, source })?;
                policy.per_property.insert(property, strategy);
            }
            other => {
                return Err(syntax(
                    line,
                    &format!("expected 'default' or 'property', found {other:?}"),
                ));
            }
        }
    }
    Ok(policy)
}

fn syntax(line: usize, message: &str) -> PolicyError {
    PolicyError::Syntax {
        line,
        message: message.to_owned(),
    }
}

fn apply_pairs(
    strategy: &mut ResolutionStrategy,
    pairs: &[String],
    line: usize,
) -> Result<(), PolicyError> {
    for token in pairs {
        let Some((key, value)) = token.split_once('=') else {
            return Err(syntax(
                line,
                &format!("expected key=value, found {token:?}"),
            ));
        };
        match key {
            "function" => strategy.function = value.to_owned(),
            "cardinality" => {
                strategy.cardinality = match value.to_ascii_uppercase().as_str() {
                    "SINGLEVALUED" => Cardinality::SingleValued,
                    "MANYVALUED" => Cardinality::ManyValued,
                    _ => return Err(syntax(line, &format!("unknown cardinality {value:?}"))),
                }
            }
            "on-error" => {
                strategy.on_error = match value.to_ascii_uppercase().as_str() {
                    "RETURN_ALL" => ErrorStrategy::ReturnAll,
                    "IGNORE" => ErrorStrategy::Ignore,
                    _ => return Err(syntax(line, &format!("unknown on-error value {value:?}"))),
                }
            }
            "agree-coefficient" => {
                let parsed: f64 = value.parse().map_err(|_| {
                    syntax(
                        line,
                        &format!("agree-coefficient {value:?} is not a number"),
                    )
                })?;
                if !parsed.is_finite() || parsed <= 0.0 {
                    return Err(syntax(line, "agree-coefficient must be positive"));
                }
                strategy.agree_coefficient = parsed;
            }
            _ => {
                strategy.params.insert(key.to_owned(), value.to_owned());
            }
        }
    }
    Ok(())
}

/// Whitespace-separated tokens; double quotes group spaces into one token
/// and `\"` / `\\` escape inside quotes. `#` starts a comment.
fn tokenize(line: &str, line_no: usize) -> Result<Vec<String>, PolicyError> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    'outer: loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.peek() {
            None | Some('#') => break 'outer,
            _ => {}
        }
        let mut token = String::new();
        let mut quoted = false;
        loop {
            let Some(&c) = chars.peek() else {
                if quoted {
                    return Err(syntax(line_no, "unterminated quote"));
                }
                break;
            };
            if quoted {
                chars.next();
                match c {
                    '"' => quoted = false,
                    '\\' => match chars.next() {
                        Some(escaped) => token.push(escaped),
                        None => return Err(syntax(line_no, "dangling escape")),
                    },
                    _ => token.push(c),
                }
            } else if c.is_whitespace() {
                break;
            } else if c == '"' {
                chars.next();
                quoted = true;
            } else {
                chars.next();
                token.push(c);
            }
        }
        tokens.push(token);
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_defaults() {
        let policy = parse_policy("").unwrap();
        assert_eq!(policy.default_strategy.function, "ALL");
        assert_eq!(
            policy.default_strategy.cardinality,
            Cardinality::SingleValued
        );
        assert_eq!(policy.default_strategy.on_error, ErrorStrategy::ReturnAll);
        assert_eq!(policy.default_strategy.agree_coefficient, 4.0);
        assert!(policy.per_property.is_empty());
    }

    #[test]
    fn default_and_property_lines() {
        let policy = parse_policy(
            "default function=ALL\nproperty <http://www.w3.org/2000/01/rdf-schema#label> function=BEST\n",
        )
        .unwrap();
        assert_eq!(policy.default_strategy.function, "ALL");
        let label = &policy.per_property[&Uri::new("http://www.w3.org/2000/01/rdf-schema#label")];
        assert_eq!(label.function, "BEST");
    }

    #[test]
    fn function_params_are_collected() {
        let policy = parse_policy("property <urn:p> function=TOPN n=3\n").unwrap();
        let strategy = &policy.per_property[&Uri::new("urn:p")];
        assert_eq!(strategy.function, "TOPN");
        assert_eq!(strategy.params["n"], "3");
    }

    #[test]
    fn quoted_values_keep_spaces() {
        let policy = parse_policy("property <urn:p> function=CONCAT separator=\"; and \"").unwrap();
        assert_eq!(
            policy.per_property[&Uri::new("urn:p")].params["separator"],
            "; and "
        );
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let policy =
            parse_policy("# top\n\n  # indented\ndefault function=VOTE # trailing\n").unwrap();
        assert_eq!(policy.default_strategy.function, "VOTE");
    }

    #[test]
    fn cardinality_and_error_strategy_and_coefficient() {
        let policy = parse_policy(
            "default function=AVG cardinality=MANYVALUED on-error=IGNORE agree-coefficient=2.5",
        )
        .unwrap();
        let s = &policy.default_strategy;
        assert_eq!(s.cardinality, Cardinality::ManyValued);
        assert_eq!(s.on_error, ErrorStrategy::Ignore);
        assert_eq!(s.agree_coefficient, 2.5);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_policy("default function=ALL\nnonsense here\n").unwrap_err();
        match err {
            PolicyError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_function_surfaces_at_parse_time() {
        let err = parse_policy("default function=FROBNICATE").unwrap_err();
        match err {
            PolicyError::Function {
                line: 1,
                source: FunctionError::UnknownFunction(name),
            } => {
                assert_eq!(name, "FROBNICATE");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_required_param_surfaces_at_parse_time() {
        let err = parse_policy("property <urn:p> function=TOPN").unwrap_err();
        assert!(matches!(
            err,
            PolicyError::Function {
                source: FunctionError::MissingParam { .. },
                ..
            }
        ));
    }

    #[test]
    fn duplicates_are_rejected() {
        assert!(parse_policy("default function=ALL\ndefault function=ANY").is_err());
        assert!(
            parse_policy("property <urn:p> function=ALL\nproperty <urn:p> function=ANY").is_err()
        );
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(parse_policy("default function=ALL agree-coefficient=0").is_err());
        assert!(parse_policy("default function=ALL agree-coefficient=x").is_err());
        assert!(parse_policy("default cardinality=THREE").is_err());
        assert!(parse_policy("property urn:p function=ALL").is_err());
        assert!(parse_policy("property <urn:p> separator").is_err());
    }
}
