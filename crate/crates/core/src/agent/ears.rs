//! Keyword-driven classification of EARS requirements.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EarsPattern {
    Ubiquitous,
    EventDriven,
    StateDriven,
    OptionalFeature,
    UnwantedBehavior,
    Complex,
}

impl EarsPattern {
    pub fn name(self) -> &'static str {
        match self {
            EarsPattern::Ubiquitous => "ubiquitous",
            EarsPattern::EventDriven => "event-driven",
            EarsPattern::StateDriven => "state-driven",
            EarsPattern::OptionalFeature => "optional-feature",
            EarsPattern::UnwantedBehavior => "unwanted-behavior",
            EarsPattern::Complex => "complex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EarsRequirement {
    pub pattern: EarsPattern,
    /// Event after `When` or condition after `If`.
    pub trigger: Option<String>,
    /// State after `While` or feature after `Where`.
    pub precondition: Option<String>,
    pub system_name: Option<String>,
    pub response: Option<String>,
    pub raw: String,
    /// Set when the text does not follow any EARS template.
    pub warning: Option<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Clause {
    When,
    While,
    Where,
    If,
}

fn keyword(word: &str) -> Option<Clause> {
    match word.to_ascii_lowercase().as_str() {
        "when" => Some(Clause::When),
        "while" => Some(Clause::While),
        "where" => Some(Clause::Where),
        "if" => Some(Clause::If),
        _ => None,
    }
}

/// Splits `"<kw> a, <kw> b, rest"` into leading clauses and the remainder.
fn leading_clauses(text: &str) -> (Vec<(Clause, String)>, String) {
    let mut clauses = Vec::new();
    let mut rest = text.trim();
    loop {
        let word = rest.split_whitespace().next().unwrap_or("");
        let Some(kw) = keyword(word) else { break };
        let body = rest[word.len()..].trim_start();
        // `If ... then ...` may use `then` instead of a comma.
        let cut = if kw == Clause::If {
            let lower = body.to_ascii_lowercase();
            match (body.find(','), lower.find(" then ")) {
                (Some(c), Some(t)) => Some(if t < c { (t, t + 6) } else { (c, c + 1) }),
                (Some(c), None) => Some((c, c + 1)),
                (None, Some(t)) => Some((t, t + 6)),
                (None, None) => None,
            }
        } else {
            body.find(',').map(|c| (c, c + 1))
        };
        match cut {
            Some((end, next)) => {
                clauses.push((kw, body[..end].trim().to_string()));
                rest = body[next..].trim_start();
                let lower = rest.to_ascii_lowercase();
                if let Some(stripped) = lower.strip_prefix("then ") {
                    rest = &rest[rest.len() - stripped.len()..];
                }
            }
            None => {
                clauses.push((kw, body.trim().to_string()));
                rest = "";
                break;
            }
        }
    }
    (clauses, rest.to_string())
}

fn split_shall(response: &str) -> (Option<String>, String) {
    let lower = response.to_ascii_lowercase();
    match lower.find(" shall ") {
        Some(i) => {
            let subject = response[..i].trim();
            let system = subject
                .strip_prefix("the ")
                .or_else(|| subject.strip_prefix("The "))
                .unwrap_or(subject)
                .to_string();
            (Some(system), response[i + 7..].trim().to_string())
        }
        None => (None, response.trim().to_string()),
    }
}

pub fn classify_ears(text: &str) -> EarsRequirement {
    let raw = text.to_string();
    let trimmed = text.trim().trim_end_matches('.');
    let (clauses, rest) = leading_clauses(trimmed);
    let has_shall = trimmed.to_ascii_lowercase().split_whitespace().any(|w| w == "shall");
    let (system_name, response) = split_shall(&rest);
    let response = (!response.is_empty()).then_some(response);

    let mut req = EarsRequirement {
        pattern: EarsPattern::Ubiquitous,
        trigger: None,
        precondition: None,
        system_name,
        response,
        raw,
        warning: None,
    };
    for (kw, body) in &clauses {
        match kw {
            Clause::When | Clause::If => req.trigger = req.trigger.take().or(Some(body.clone())),
            Clause::While | Clause::Where => req.precondition = req.precondition.take().or(Some(body.clone())),
        }
    }
    let if_then = clauses.first().is_some_and(|(k, _)| *k == Clause::If)
        && (trimmed.to_ascii_lowercase().contains(" then ") || req.response.is_some());
    req.pattern = match clauses.as_slice() {
        [] if has_shall => EarsPattern::Ubiquitous,
        [] => {
            req.warning = Some("requirement does not follow an EARS template".into());
            EarsPattern::Ubiquitous
        }
        [_, _, ..] => EarsPattern::Complex,
        [(Clause::When, _)] => EarsPattern::EventDriven,
        [(Clause::While, _)] => EarsPattern::StateDriven,
        [(Clause::Where, _)] => EarsPattern::OptionalFeature,
        [(Clause::If, _)] if if_then => EarsPattern::UnwantedBehavior,
        [(Clause::If, _)] => {
            req.warning = Some("'If' clause without a response".into());
            EarsPattern::Ubiquitous
        }
    };
    req
}
