use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::FtaError;
use crate::chc::ClauseId;

/// A ranked tree over clause identifiers: the skeleton of a derivation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TraceTerm {
    pub symbol: ClauseId,
    pub children: Vec<TraceTerm>,
}

impl TraceTerm {
    pub fn new(symbol: ClauseId, children: Vec<TraceTerm>) -> Self {
        TraceTerm { symbol, children }
    }

    pub fn leaf(symbol: ClauseId) -> Self {
        TraceTerm::new(symbol, Vec::new())
    }

    /// A leaf has depth 1.
    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(TraceTerm::depth)
            .max()
            .unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(TraceTerm::size).sum::<usize>()
    }

    /// Replaces every symbol by `f(symbol)`.
    pub fn map_symbols<E>(
        &self,
        f: &mut impl FnMut(&ClauseId) -> Result<ClauseId, E>,
    ) -> Result<TraceTerm, E> {
        let symbol = f(&self.symbol)?;
        let children = self
            .children
            .iter()
            .map(|c| c.map_symbols(f))
            .collect::<Result<_, _>>()?;
        Ok(TraceTerm { symbol, children })
    }

    /// Nodes in preorder.
    pub fn preorder(&self) -> Vec<&TraceTerm> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            stack.extend(t.children.iter().rev());
        }
        out
    }

    /// The order used to pick a canonical smallest term: depth first, then the
    /// root symbol, then children left to right.
    pub fn cmp_minimal(&self, other: &TraceTerm) -> Ordering {
        self.depth()
            .cmp(&other.depth())
            .then_with(|| self.symbol.cmp(&other.symbol))
            .then_with(|| {
                for (a, b) in self.children.iter().zip(&other.children) {
                    match a.cmp_minimal(b) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                self.children.len().cmp(&other.children.len())
            })
    }
}

impl fmt::Display for TraceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl FromStr for TraceTerm {
    type Err = FtaError;

    /// Parses `c3(c2(c1,c1))`; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let t = parse_term(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(FtaError::Malformed(format!("trailing input in term {s:?}")));
        }
        Ok(t)
    }
}

fn parse_term(chars: &[char], pos: &mut usize) -> Result<TraceTerm, FtaError> {
    let start = *pos;
    while *pos < chars.len() && (chars[*pos].is_alphanumeric() || chars[*pos] == '_') {
        *pos += 1;
    }
    if start == *pos {
        return Err(FtaError::Malformed(format!(
            "expected a symbol at offset {start}"
        )));
    }
    let symbol = ClauseId::new(chars[start..*pos].iter().collect::<String>());
    let mut children = Vec::new();
    if chars.get(*pos) == Some(&'(') {
        *pos += 1;
        loop {
            children.push(parse_term(chars, pos)?);
            match chars.get(*pos) {
                Some(',') => *pos += 1,
                Some(')') => {
                    *pos += 1;
                    break;
                }
                _ => {
                    return Err(FtaError::Malformed(format!(
                        "expected `,` or `)` at offset {pos}"
                    )))
                }
            }
        }
    }
    Ok(TraceTerm::new(symbol, children))
}
