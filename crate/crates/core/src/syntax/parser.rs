use crate::error::ParseError;
use crate::numeric::{parse_rat, Rat};

use super::{Formula, Judgement, Problem, PropLetter};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Bot,
    Top,
    One,
    Tilde,
    Tensor,
    Lolli,
    Iff,
    And,
    Or,
    Dot,
    Star,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Turnstile,
    Rat(Rat),
    Ident(PropLetter),
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Rat(r) => format!("rational `{r}`"),
        Tok::Ident(p) => format!("identifier `{p}`"),
        Tok::End => "end of input".to_string(),
        other => format!("{other:?}"),
    }
}

fn lex(text: &str, allow_fresh: bool) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let rest = &text[i..];
        let fixed: &[(&str, Tok)] = &[
            ("(+)", Tok::Tensor),
            ("o-o", Tok::Iff),
            ("-o", Tok::Lolli),
            ("/\\", Tok::And),
            ("\\/", Tok::Or),
            ("|-", Tok::Turnstile),
        ];
        if let Some((s, t)) = fixed.iter().find(|(s, _)| rest.starts_with(s)) {
            out.push((t.clone(), i));
            i += s.len();
            continue;
        }
        let single = match c {
            b'~' => Some(Tok::Tilde),
            b'.' => Some(Tok::Dot),
            b'*' => Some(Tok::Star),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBracket),
            b']' => Some(Tok::RBracket),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, i));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'/' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let r = parse_rat(&text[start..i]).map_err(|e| match e {
                ParseError::Syntax { msg, .. } => ParseError::syntax(start, msg),
                other => other,
            })?;
            out.push((Tok::Rat(r), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            let tok = match word {
                "bot" => Tok::Bot,
                "top" => Tok::Top,
                "I" => Tok::One,
                w if w.starts_with('_') => {
                    let idx = w[1..].parse::<u32>().ok().filter(|_| {
                        w.len() > 1 && w[1..].bytes().all(|b| b.is_ascii_digit())
                    });
                    match idx {
                        Some(k) if allow_fresh => Tok::Ident(PropLetter::Fresh(k)),
                        _ => {
                            return Err(ParseError::Name {
                                pos: start,
                                name: w.to_string(),
                            })
                        }
                    }
                }
                w => Tok::Ident(PropLetter::user(w)),
            };
            out.push((tok, start));
            continue;
        }
        let ch = rest.chars().next().unwrap_or('?');
        return Err(ParseError::syntax(i, format!("unexpected character `{ch}`")));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn new(text: &str, allow_fresh: bool) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text, allow_fresh)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {}", describe(t))))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        ParseError::syntax(self.pos(), format!("{what}, found {}", describe(self.peek())))
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.imp()
    }

    // imp := "~" imp | lat (("-o" | "o-o") operand)*
    fn imp(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Tilde) {
            return Ok(Formula::neg(self.imp()?));
        }
        let mut acc = self.lat()?;
        loop {
            let op = self.peek().clone();
            if op != Tok::Lolli && op != Tok::Iff {
                return Ok(acc);
            }
            self.bump();
            // a negation on the right of an implication extends to the end
            let rhs = if self.peek() == &Tok::Tilde {
                self.imp()?
            } else {
                self.lat()?
            };
            acc = if op == Tok::Lolli {
                Formula::lolli(acc, rhs)
            } else {
                Formula::iff(acc, rhs)
            };
        }
    }

    fn lat(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.tens()?;
        loop {
            if self.eat(&Tok::And) {
                acc = Formula::and(acc, self.tens()?);
            } else if self.eat(&Tok::Or) {
                acc = Formula::or(acc, self.tens()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn tens(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.prod()?;
        while self.eat(&Tok::Tensor) {
            acc = Formula::tensor(acc, self.prod()?);
        }
        Ok(acc)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Bot | Tok::Top | Tok::One | Tok::Rat(_) | Tok::Ident(_) | Tok::LParen
        )
    }

    // prod := atom (("." atom) | atom)*
    fn prod(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.atom()?;
        loop {
            if self.eat(&Tok::Dot) {
                acc = Formula::mult(acc, self.atom()?);
            } else if self.starts_atom() {
                acc = Formula::mult(acc, self.atom()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bot => {
                self.bump();
                Ok(Formula::Bot)
            }
            Tok::Top => {
                self.bump();
                Ok(Formula::top())
            }
            Tok::One => {
                self.bump();
                Ok(Formula::One)
            }
            Tok::Ident(p) => {
                self.bump();
                Ok(Formula::Prop(p))
            }
            Tok::Rat(r) => {
                self.bump();
                if self.eat(&Tok::Star) {
                    Ok(Formula::scalar(r, self.prod()?))
                } else {
                    Ok(Formula::constant(r))
                }
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            _ => Err(self.unexpected("expected a formula")),
        }
    }

    fn formula_list_until(&mut self, stop: &Tok) -> Result<Vec<Formula>, ParseError> {
        let mut out = Vec::new();
        if self.peek() == stop {
            return Ok(out);
        }
        loop {
            out.push(self.formula()?);
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn judgement(&mut self) -> Result<Judgement, ParseError> {
        let ants = self.formula_list_until(&Tok::Turnstile)?;
        self.expect(&Tok::Turnstile)?;
        let cons = self.formula()?;
        Ok(Judgement::new(ants, cons))
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.peek() == &Tok::End {
            Ok(())
        } else {
            Err(self.unexpected("expected end of input"))
        }
    }
}

/// Parses user formula text. Identifiers starting with `_` are rejected.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_with(text, false)
}

/// Like [`parse_formula`] but accepts fresh letters `_<n>`.
pub fn parse_formula_internal(text: &str) -> Result<Formula, ParseError> {
    parse_formula_with(text, true)
}

fn parse_formula_with(text: &str, allow_fresh: bool) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, allow_fresh)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

/// Parses `[f1, f2, ...]` (brackets optional); used by proof substitutions.
pub fn parse_formula_list(text: &str) -> Result<Vec<Formula>, ParseError> {
    let mut p = Parser::new(text, false)?;
    let bracketed = p.eat(&Tok::LBracket);
    let stop = if bracketed { Tok::RBracket } else { Tok::End };
    let list = p.formula_list_until(&stop)?;
    if bracketed {
        p.expect(&Tok::RBracket)?;
    }
    p.finish()?;
    Ok(list)
}

pub fn parse_judgement(text: &str) -> Result<Judgement, ParseError> {
    parse_judgement_with(text, false)
}

pub fn parse_judgement_internal(text: &str) -> Result<Judgement, ParseError> {
    parse_judgement_with(text, true)
}

fn parse_judgement_with(text: &str, allow_fresh: bool) -> Result<Judgement, ParseError> {
    let mut p = Parser::new(text, allow_fresh)?;
    let j = p.judgement()?;
    p.finish()?;
    Ok(j)
}

/// One judgement per line, `#` comments, optional final `goal: <judgement>`.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut problem = Problem::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if problem.goal.is_some() {
            return Err(ParseError::syntax(0, "judgements may not follow the goal line").at_line(line_no));
        }
        if let Some(rest) = line.strip_prefix("goal:") {
            problem.goal = Some(parse_judgement(rest).map_err(|e| e.at_line(line_no))?);
        } else {
            problem
                .hypotheses
                .push(parse_judgement(line).map_err(|e| e.at_line(line_no))?);
        }
    }
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};

    fn p() -> Formula {
        Formula::prop("p")
    }
    fn q() -> Formula {
        Formula::prop("q")
    }

    #[test]
    fn precedence_follows_notation() {
        let f = parse_formula("1/2 * phi (+) psi /\\ 3 * psi -o theta").unwrap();
        let phi = Formula::prop("phi");
        let psi = Formula::prop("psi");
        let expected = Formula::lolli(
            Formula::and(
                Formula::tensor(Formula::scalar(rat(1, 2), phi), psi.clone()),
                Formula::scalar(rat_int(3), psi),
            ),
            Formula::prop("theta"),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn derived_connectives_expand() {
        assert_eq!(parse_formula("~bot").unwrap(), Formula::lolli(Formula::Bot, Formula::Bot));
        assert_eq!(
            parse_formula("p /\\ q").unwrap(),
            Formula::tensor(p(), Formula::lolli(p(), q()))
        );
        assert_eq!(parse_formula("top").unwrap(), Formula::top());
        assert_eq!(parse_formula("p o-o q").unwrap(), Formula::iff(p(), q()));
        assert_eq!(parse_formula("p \\/ q").unwrap(), Formula::or(p(), q()));
    }

    #[test]
    fn literals_and_products() {
        assert_eq!(parse_formula("2").unwrap(), Formula::constant(rat_int(2)));
        assert_eq!(
            parse_formula("3p").unwrap(),
            Formula::mult(Formula::constant(rat_int(3)), p())
        );
        assert_eq!(
            parse_formula("p . q . p").unwrap(),
            Formula::mult(Formula::mult(p(), q()), p())
        );
        assert_eq!(
            parse_formula("2 * p . q").unwrap(),
            Formula::scalar(rat_int(2), Formula::mult(p(), q()))
        );
        assert_eq!(
            parse_formula("p -o q -o p").unwrap(),
            Formula::lolli(Formula::lolli(p(), q()), p())
        );
        assert_eq!(parse_formula("~p -o q").unwrap(), Formula::neg(Formula::lolli(p(), q())));
        assert_eq!(parse_formula("p -o ~q").unwrap(), Formula::lolli(p(), Formula::neg(q())));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_formula("p (+)"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_formula("(p"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_formula("p $ q"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_formula("_3 (+) p"), Err(ParseError::Name { pos: 0, .. })));
        assert!(matches!(parse_formula("_x"), Err(ParseError::Name { .. })));
        assert_eq!(
            parse_formula_internal("_3 (+) p").unwrap(),
            Formula::tensor(Formula::Prop(PropLetter::Fresh(3)), p())
        );
    }

    #[test]
    fn judgements() {
        let j = parse_judgement("p, q |- r").unwrap();
        assert_eq!(j.antecedents, vec![p(), q()]);
        assert_eq!(j.consequent, Formula::prop("r"));
        let t = parse_judgement("|- p -o p").unwrap();
        assert!(t.antecedents.is_empty());
        assert_eq!(t.consequent, Formula::lolli(p(), p()));
        let s = parse_judgement("2 * p |- q").unwrap();
        assert_eq!(s.antecedents, vec![Formula::scalar(rat_int(2), p())]);
        assert!(parse_judgement("p q").is_err());
        assert!(parse_judgement("p |- q |- r").is_err());
    }

    #[test]
    fn problems() {
        let text = "# comment\n2 * p |- q\n\n3 * p |- 2 * q  # trailing\ngoal: p |- q\n";
        let pr = parse_problem(text).unwrap();
        assert_eq!(pr.hypotheses.len(), 2);
        assert_eq!(pr.goal, Some(parse_judgement("p |- q").unwrap()));
        let err = parse_problem("p |- q\ngoal: p |- q\nq |- p").unwrap_err();
        assert!(matches!(err, ParseError::AtLine { line: 3, .. }));
        let err = parse_problem("p |- q\np |-").unwrap_err();
        assert!(matches!(err, ParseError::AtLine { line: 2, .. }));
    }

    #[test]
    fn formula_lists() {
        assert_eq!(parse_formula_list("[p, q]").unwrap(), vec![p(), q()]);
        assert_eq!(parse_formula_list("[]").unwrap(), vec![]);
        assert_eq!(parse_formula_list("p").unwrap(), vec![p()]);
    }
}
