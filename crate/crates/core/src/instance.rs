//! Text format for markets.
//!
//! ```text
//! # two firms, two workers
//! [firms]
//! f1
//! f2
//! [workers]
//! w1
//! w2
//! [firm_utils]
//! f1 w1 2
//! f1 w2 1
//! [worker_utils]
//! w1 f1 0.5
//! [discounts]
//! f1 1/2
//! * 9/10
//! ```
//!
//! Values are integers, fractions `p/q` or decimals, all read exactly. In
//! `[discounts]` the name `*` sets the factor of every agent not listed
//! explicitly. An agent that does not list a partner finds it unacceptable:
//! omitted partners receive `−1, −2, …` in name order, shifted below the
//! agent's lowest listed utility so utilities stay distinct.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::market::{MarketError, MarketInstance, RawMarket, Utility};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownSection,
    DuplicateEntry,
    BadNumber,
    UnknownAgent,
    DiscountOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        kind: ParseErrorKind,
        message: String,
    },
    #[error(transparent)]
    Market(#[from] MarketError),
}

impl InstanceError {
    pub fn kind(&self) -> Option<ParseErrorKind> {
        match self {
            InstanceError::Parse { kind, .. } => Some(*kind),
            InstanceError::Market(_) => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Firms,
    Workers,
    FirmUtils,
    WorkerUtils,
    Discounts,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token { text: &line[s..i], column: line[..s].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], column: line[..s].chars().count() + 1 });
    }
    out
}

/// Parses `p/q`, an integer, or a decimal such as `-0.25` exactly.
pub fn parse_rational(text: &str) -> Option<Utility> {
    if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.parse().ok()?;
        let d: i64 = d.parse().ok()?;
        return (d != 0).then(|| Utility::new(n, d));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let denom = 10i64.checked_pow(frac.len() as u32)?;
    let digits = format!("{int}{frac}");
    let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let value = Utility::new(numer, denom);
    Some(if neg { -value } else { value })
}

pub fn format_rational(r: &Utility) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn err(line: usize, column: usize, kind: ParseErrorKind, message: impl Into<String>) -> InstanceError {
    InstanceError::Parse {
        line,
        column,
        kind,
        message: message.into(),
    }
}

pub fn parse_instance(text: &str) -> Result<MarketInstance, InstanceError> {
    let mut section: Option<Section> = None;
    let mut firms: Vec<String> = Vec::new();
    let mut workers: Vec<String> = Vec::new();
    // (agent, partner) -> (value, line) for both utility sections.
    let mut firm_utils: BTreeMap<(String, String), (Utility, usize, usize)> = BTreeMap::new();
    let mut worker_utils: BTreeMap<(String, String), (Utility, usize, usize)> = BTreeMap::new();
    let mut discounts: BTreeMap<String, Utility> = BTreeMap::new();
    let mut default_discount: Option<Utility> = None;
    let mut seen_names: BTreeSet<String> = BTreeSet::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(first) = toks.first() else { continue };

        if first.text.starts_with('[') {
            if toks.len() != 1 || !first.text.ends_with(']') {
                return Err(err(line_no, first.column, ParseErrorKind::Syntax, "malformed section header"));
            }
            section = Some(match &first.text[1..first.text.len() - 1] {
                "firms" => Section::Firms,
                "workers" => Section::Workers,
                "firm_utils" => Section::FirmUtils,
                "worker_utils" => Section::WorkerUtils,
                "discounts" => Section::Discounts,
                other => {
                    return Err(err(
                        line_no,
                        first.column,
                        ParseErrorKind::UnknownSection,
                        format!("unknown section `[{other}]`"),
                    ))
                }
            });
            continue;
        }
        let Some(current) = section else {
            return Err(err(line_no, first.column, ParseErrorKind::Syntax, "entry before any section header"));
        };
        match current {
            Section::Firms | Section::Workers => {
                if toks.len() != 1 {
                    return Err(err(line_no, toks[1].column, ParseErrorKind::Syntax, "expected one name per line"));
                }
                let name = first.text.to_string();
                if name == "*" || !seen_names.insert(name.clone()) {
                    return Err(err(
                        line_no,
                        first.column,
                        ParseErrorKind::DuplicateEntry,
                        format!("agent name `{name}` is already taken"),
                    ));
                }
                if current == Section::Firms {
                    firms.push(name);
                } else {
                    workers.push(name);
                }
            }
            Section::FirmUtils | Section::WorkerUtils => {
                if toks.len() != 3 {
                    return Err(err(
                        line_no,
                        first.column,
                        ParseErrorKind::Syntax,
                        "expected `agent partner value`",
                    ));
                }
                let (own, other) = if current == Section::FirmUtils {
                    (&firms, &workers)
                } else {
                    (&workers, &firms)
                };
                for (tok, list) in [(&toks[0], own), (&toks[1], other)] {
                    if !list.iter().any(|n| n == tok.text) {
                        return Err(err(
                            line_no,
                            tok.column,
                            ParseErrorKind::UnknownAgent,
                            format!("`{}` is not declared on that side", tok.text),
                        ));
                    }
                }
                let value = parse_rational(toks[2].text).ok_or_else(|| {
                    err(line_no, toks[2].column, ParseErrorKind::BadNumber, format!("bad number `{}`", toks[2].text))
                })?;
                let table = if current == Section::FirmUtils {
                    &mut firm_utils
                } else {
                    &mut worker_utils
                };
                let key = (toks[0].text.to_string(), toks[1].text.to_string());
                if let Some(&(_, prev_line, _)) = table.get(&key) {
                    return Err(err(
                        line_no,
                        first.column,
                        ParseErrorKind::DuplicateEntry,
                        format!("`{} {}` already set on line {prev_line}", key.0, key.1),
                    ));
                }
                table.insert(key, (value, line_no, toks[2].column));
            }
            Section::Discounts => {
                let toks: Vec<&Token> = toks.iter().filter(|t| t.text != "=").collect();
                if toks.len() != 2 {
                    return Err(err(line_no, first.column, ParseErrorKind::Syntax, "expected `agent value`"));
                }
                let value = parse_rational(toks[1].text).ok_or_else(|| {
                    err(line_no, toks[1].column, ParseErrorKind::BadNumber, format!("bad number `{}`", toks[1].text))
                })?;
                if value <= Utility::zero() || value >= Utility::one() {
                    return Err(err(
                        line_no,
                        toks[1].column,
                        ParseErrorKind::DiscountOutOfRange,
                        format!("discount factor {} is outside (0, 1)", toks[1].text),
                    ));
                }
                let name = toks[0].text;
                if name == "*" {
                    if default_discount.replace(value).is_some() {
                        return Err(err(line_no, toks[0].column, ParseErrorKind::DuplicateEntry, "default discount set twice"));
                    }
                    continue;
                }
                if !firms.iter().chain(workers.iter()).any(|n| n == name) {
                    return Err(err(
                        line_no,
                        toks[0].column,
                        ParseErrorKind::UnknownAgent,
                        format!("`{name}` is not a declared agent"),
                    ));
                }
                if discounts.insert(name.to_string(), value).is_some() {
                    return Err(err(
                        line_no,
                        toks[0].column,
                        ParseErrorKind::DuplicateEntry,
                        format!("discount of `{name}` set twice"),
                    ));
                }
            }
        }
    }

    let mut raw = RawMarket::new(firms.clone(), workers.clone());
    fill(&firms, &workers, &firm_utils, &mut raw.firm_utils);
    fill(&workers, &firms, &worker_utils, &mut raw.worker_utils);
    raw.discounts = discounts;
    if let Some(d) = default_discount {
        raw = raw.default_discount(d);
    }
    Ok(raw.validate()?)
}

/// Copies listed utilities and gives every omitted partner a distinct
/// negative value.
fn fill(
    own: &[String],
    other: &[String],
    listed: &BTreeMap<(String, String), (Utility, usize, usize)>,
    out: &mut BTreeMap<String, BTreeMap<String, Utility>>,
) {
    for a in own {
        let row: BTreeMap<String, Utility> = other
            .iter()
            .filter_map(|b| listed.get(&(a.clone(), b.clone())).map(|v| (b.clone(), v.0)))
            .collect();
        let floor = row.values().copied().fold(Utility::zero(), Utility::min);
        let mut missing: Vec<&String> = other.iter().filter(|b| !row.contains_key(*b)).collect();
        missing.sort();
        let mut full = row;
        for (i, b) in missing.into_iter().enumerate() {
            full.insert(b.clone(), floor - Utility::from_integer(i as i64 + 1));
        }
        out.insert(a.clone(), full);
    }
}

/// Canonical text form: names sorted, every utility and discount explicit.
pub fn serialize_instance(m: &MarketInstance) -> String {
    let mut out = String::new();
    out.push_str("[firms]\n");
    for f in m.firms() {
        writeln!(out, "{}", m.firm_name(f)).unwrap();
    }
    out.push_str("[workers]\n");
    for w in m.workers() {
        writeln!(out, "{}", m.worker_name(w)).unwrap();
    }
    out.push_str("[firm_utils]\n");
    for f in m.firms() {
        for w in m.workers() {
            let u = m.firm_utility(f, Some(w));
            writeln!(out, "{} {} {}", m.firm_name(f), m.worker_name(w), format_rational(&u)).unwrap();
        }
    }
    out.push_str("[worker_utils]\n");
    for w in m.workers() {
        for f in m.firms() {
            let u = m.worker_utility(w, Some(f));
            writeln!(out, "{} {} {}", m.worker_name(w), m.firm_name(f), format_rational(&u)).unwrap();
        }
    }
    out.push_str("[discounts]\n");
    for a in m.agents() {
        writeln!(out, "{} {}", m.agent_name(a), format_rational(&m.discount(a))).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::tests::m2;
    use crate::market::{FirmId, WorkerId};

    const M2: &str = "\
# the two-by-two market with opposed preferences
[firms]
f1
f2
[workers]
w1
w2
[firm_utils]
f1 w1 2
f1 w2 1
f2 w1 1
f2 w2 2
[worker_utils]
w1 f1 1
w1 f2 2
w2 f1 2
w2 f2 1
[discounts]
* 1/2
";

    #[test]
    fn parses_m2() {
        assert_eq!(parse_instance(M2).unwrap(), m2());
    }

    #[test]
    fn round_trip() {
        let m = m2();
        assert_eq!(parse_instance(&serialize_instance(&m)).unwrap(), m);
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_rational("3/4"), Some(Utility::new(3, 4)));
        assert_eq!(parse_rational("-0.25"), Some(Utility::new(-1, 4)));
        assert_eq!(parse_rational("7"), Some(Utility::from_integer(7)));
        assert_eq!(parse_rational(".5"), Some(Utility::new(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("-"), None);
        assert_eq!(format_rational(&Utility::new(-3, 4)), "-3/4");
    }

    #[test]
    fn discount_of_one_is_rejected_at_its_line() {
        let text = M2.replace("* 1/2", "f1 = 1\n* 1/2");
        match parse_instance(&text).unwrap_err() {
            InstanceError::Parse { line, column, kind, .. } => {
                assert_eq!(kind, ParseErrorKind::DiscountOutOfRange);
                assert_eq!((line, column), (19, 6));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_utility_line() {
        let text = M2.replace("f1 w2 1\n", "f1 w2 1\nf1 w2 3\n");
        let e = parse_instance(&text).unwrap_err();
        assert_eq!(e.kind(), Some(ParseErrorKind::DuplicateEntry));
        assert!(e.to_string().starts_with("line 11, column 1"));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            parse_instance("[bogus]\n").unwrap_err().kind(),
            Some(ParseErrorKind::UnknownSection)
        );
        assert_eq!(parse_instance("f1\n").unwrap_err().kind(), Some(ParseErrorKind::Syntax));
        let text = M2.replace("f1 w1 2", "f1 w9 2");
        assert_eq!(parse_instance(&text).unwrap_err().kind(), Some(ParseErrorKind::UnknownAgent));
        let text = M2.replace("f1 w1 2", "f1 w1 two");
        assert_eq!(parse_instance(&text).unwrap_err().kind(), Some(ParseErrorKind::BadNumber));
        let text = M2.replace("* 1/2", "");
        assert!(matches!(
            parse_instance(&text),
            Err(InstanceError::Market(MarketError::MissingDiscount(_)))
        ));
        let text = M2.replace("f1 w1 2", "f1 w1 1");
        assert!(matches!(
            parse_instance(&text),
            Err(InstanceError::Market(MarketError::DuplicateUtility { .. }))
        ));
    }

    #[test]
    fn omitted_pairs_are_unacceptable_and_distinct() {
        let text = "[firms]\nf1\n[workers]\nw1\nw2\nw3\n[firm_utils]\nf1 w2 -1\n[worker_utils]\n[discounts]\n* 0.9\n";
        let m = parse_instance(text).unwrap();
        assert_eq!(m.firm_utility(FirmId(0), Some(WorkerId(0))), Utility::from_integer(-2));
        assert_eq!(m.firm_utility(FirmId(0), Some(WorkerId(1))), Utility::from_integer(-1));
        assert_eq!(m.firm_utility(FirmId(0), Some(WorkerId(2))), Utility::from_integer(-3));
        assert_eq!(m.worker_utility(WorkerId(2), Some(FirmId(0))), Utility::from_integer(-1));
        assert_eq!(m.discount(crate::market::Agent::Firm(FirmId(0))), Utility::new(9, 10));
    }
}
