use thiserror::Error;

/// Errors raised while reading formulas, judgements, problems, models and
/// the other text formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("name error at column {pos}: `{name}` is in the reserved `_` namespace")]
    Name { pos: usize, name: String },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<ParseError>,
    },
}

impl ParseError {
    pub fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        ParseError::Syntax {
            pos,
            msg: msg.into(),
        }
    }

    pub fn at_line(self, line: usize) -> Self {
        ParseError::AtLine {
            line,
            source: Box::new(self),
        }
    }

    /// Strips line wrappers.
    pub fn root(&self) -> &ParseError {
        match self {
            ParseError::AtLine { source, .. } => source.root(),
            other => other,
        }
    }
}
