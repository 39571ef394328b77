//! Human-writable description of single-mode input states.
//!
//! Grammar (whitespace between tokens is ignored):
//!
//! ```text
//! spec     := "fock(" uint ")"
//!           | "vacuum"
//!           | "coherent(" complex ")"
//!           | "phase_averaged_coherent(" real ")"
//!           | "thermal(" real ")"
//!           | "number_diagonal(" real ("," real)* ")"
//!           | "mix(" real ":" spec ("," real ":" spec)* ")"
//! complex  := real | real ("+"|"-") real? "i" | real? "i"
//! ```
//!
//! `Display` writes the canonical form, which parses back to an identical spec.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classicality {
    Classical,
    Nonclassical,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    Fock(usize),
    Coherent(Complex64),
    PhaseAveragedCoherent(f64),
    Thermal(f64),
    NumberDiagonal(Vec<f64>),
    Mixture(Vec<(f64, StateSpec)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub kind: StateKind,
}

impl StateSpec {
    pub fn fock(n: usize) -> Self {
        Self {
            kind: StateKind::Fock(n),
        }
    }

    pub fn vacuum() -> Self {
        Self::fock(0)
    }

    pub fn coherent(alpha: Complex64) -> Self {
        Self {
            kind: StateKind::Coherent(alpha),
        }
    }

    pub fn phase_averaged_coherent(amplitude: f64) -> Self {
        Self {
            kind: StateKind::PhaseAveragedCoherent(amplitude),
        }
    }

    pub fn thermal(nbar: f64) -> Self {
        Self {
            kind: StateKind::Thermal(nbar),
        }
    }

    pub fn number_diagonal(probabilities: Vec<f64>) -> Self {
        Self {
            kind: StateKind::NumberDiagonal(probabilities),
        }
    }

    pub fn mixture(components: Vec<(f64, StateSpec)>) -> Self {
        Self {
            kind: StateKind::Mixture(components),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |x: f64, what: &str| {
            if x.is_finite() && x >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "{what} must be finite and nonnegative, got {x}"
                )))
            }
        };
        match &self.kind {
            StateKind::Fock(_) => Ok(()),
            StateKind::Coherent(alpha) => {
                if alpha.re.is_finite() && alpha.im.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!("non-finite coherent amplitude {alpha}")))
                }
            }
            StateKind::PhaseAveragedCoherent(r) => finite_nonneg(*r, "amplitude"),
            StateKind::Thermal(nbar) => finite_nonneg(*nbar, "mean photon number"),
            StateKind::NumberDiagonal(p) => {
                if p.is_empty() {
                    return Err(Error::InvalidSpec("empty probability list".into()));
                }
                for &x in p {
                    finite_nonneg(x, "probability")?;
                }
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > SUM_TOL {
                    return Err(Error::InvalidSpec(format!("probabilities sum to {total}")));
                }
                Ok(())
            }
            StateKind::Mixture(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidSpec("empty mixture".into()));
                }
                for (w, s) in parts {
                    finite_nonneg(*w, "mixture weight")?;
                    s.validate()?;
                }
                let total: f64 = parts.iter().map(|(w, _)| w).sum();
                if (total - 1.0).abs() > SUM_TOL {
                    return Err(Error::InvalidSpec(format!("mixture weights sum to {total}")));
                }
                Ok(())
            }
        }
    }

    /// Structural tag: how the state is built, not what its moments say.
    pub fn classicality(&self) -> Classicality {
        match &self.kind {
            StateKind::Fock(0) => Classicality::Classical,
            StateKind::Fock(_) => Classicality::Nonclassical,
            StateKind::Coherent(_) | StateKind::PhaseAveragedCoherent(_) | StateKind::Thermal(_) => {
                Classicality::Classical
            }
            StateKind::NumberDiagonal(p) => {
                let nbar: f64 = p.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
                let g2: f64 = p
                    .iter()
                    .enumerate()
                    .map(|(n, w)| (n * n.saturating_sub(1)) as f64 * w)
                    .sum();
                if nbar == 0.0 {
                    Classicality::Classical
                } else if g2 < nbar * nbar {
                    Classicality::Nonclassical
                } else {
                    Classicality::Unknown
                }
            }
            StateKind::Mixture(parts) => {
                let nonzero: Vec<_> = parts.iter().filter(|(w, _)| *w > 0.0).collect();
                if nonzero.len() == 1 {
                    nonzero[0].1.classicality()
                } else if nonzero.iter().all(|(_, s)| s.classicality() == Classicality::Classical) {
                    Classicality::Classical
                } else {
                    Classicality::Unknown
                }
            }
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            StateKind::Fock(n) => write!(f, "fock({n})"),
            StateKind::Coherent(a) => {
                let sign = if a.im.is_sign_negative() { '-' } else { '+' };
                write!(f, "coherent({:?}{sign}{:?}i)", a.re, a.im.abs())
            }
            StateKind::PhaseAveragedCoherent(r) => write!(f, "phase_averaged_coherent({r:?})"),
            StateKind::Thermal(n) => write!(f, "thermal({n:?})"),
            StateKind::NumberDiagonal(p) => {
                write!(f, "number_diagonal(")?;
                for (i, x) in p.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x:?}")?;
                }
                write!(f, ")")
            }
            StateKind::Mixture(parts) => {
                write!(f, "mix(")?;
                for (i, (w, s)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{w:?}: {s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        let spec = p.spec()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.error("trailing input"));
        }
        spec.validate()?;
        Ok(spec)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::InvalidSpec(format!("{msg} at byte {} in `{}`", self.pos, self.src))
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn ident(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest().len());
        self.pos += len;
        &self.src[start..self.pos]
    }

    fn number_token(&mut self) -> Result<&str> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-' | 'i')))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error("expected a number"));
        }
        self.pos += len;
        Ok(&self.src[start..self.pos])
    }

    fn real(&mut self) -> Result<f64> {
        let tok = self.number_token()?;
        tok.parse::<f64>()
            .map_err(|_| Error::InvalidSpec(format!("invalid number `{tok}`")))
    }

    fn complex(&mut self) -> Result<Complex64> {
        let tok = self.number_token()?.to_string();
        parse_complex(&tok).ok_or_else(|| Error::InvalidSpec(format!("invalid complex number `{tok}`")))
    }

    fn spec(&mut self) -> Result<StateSpec> {
        let name = self.ident().to_string();
        if name == "vacuum" {
            return Ok(StateSpec::vacuum());
        }
        self.eat('(')?;
        let spec = match name.as_str() {
            "fock" => {
                let tok = self.number_token()?;
                let n = tok
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSpec(format!("invalid photon number `{tok}`")))?;
                StateSpec::fock(n)
            }
            "coherent" => StateSpec::coherent(self.complex()?),
            "phase_averaged_coherent" => StateSpec::phase_averaged_coherent(self.real()?),
            "thermal" => StateSpec::thermal(self.real()?),
            "number_diagonal" => {
                let mut p = vec![self.real()?];
                while self.peek() == Some(',') {
                    self.eat(',')?;
                    p.push(self.real()?);
                }
                StateSpec::number_diagonal(p)
            }
            "mix" => {
                let mut parts = Vec::new();
                loop {
                    let w = self.real()?;
                    self.eat(':')?;
                    parts.push((w, self.spec()?));
                    if self.peek() == Some(',') {
                        self.eat(',')?;
                    } else {
                        break;
                    }
                }
                StateSpec::mixture(parts)
            }
            "" => return Err(self.error("expected a state name")),
            other => return Err(Error::InvalidSpec(format!("unknown state kind `{other}`"))),
        };
        self.eat(')')?;
        Ok(spec)
    }
}

fn parse_complex(tok: &str) -> Option<Complex64> {
    let Some(body) = tok.strip_suffix('i') else {
        return tok.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    // split at the last sign that is not an exponent sign
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |s: &str| match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse::<f64>().ok(),
    };
    match split {
        Some(i) => Some(Complex64::new(body[..i].parse().ok()?, imag(&body[i..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_examples() {
        assert_eq!("thermal(0.5)".parse::<StateSpec>().unwrap(), StateSpec::thermal(0.5));
        let mix: StateSpec = "mix(0.3: fock(1), 0.7: coherent(1.0+0.0i))".parse().unwrap();
        assert_eq!(
            mix,
            StateSpec::mixture(vec![
                (0.3, StateSpec::fock(1)),
                (0.7, StateSpec::coherent(Complex64::new(1.0, 0.0))),
            ])
        );
        assert_eq!(
            " number_diagonal( 0.4 ,0.2, 0.4 ) ".parse::<StateSpec>().unwrap(),
            StateSpec::number_diagonal(vec![0.4, 0.2, 0.4])
        );
        assert_eq!("vacuum".parse::<StateSpec>().unwrap(), StateSpec::fock(0));
    }

    #[test]
    fn complex_literals() {
        let c = |s: &str| parse_complex(s).unwrap();
        assert_eq!(c("1.5"), Complex64::new(1.5, 0.0));
        assert_eq!(c("2i"), Complex64::new(0.0, 2.0));
        assert_eq!(c("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(c("1-0.5i"), Complex64::new(1.0, -0.5));
        assert_eq!(c("1e-3+2e+1i"), Complex64::new(1e-3, 20.0));
        assert_eq!(c("-1+i"), Complex64::new(-1.0, 1.0));
        assert!(parse_complex("1+2").is_none());
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "fock(-1)",
            "fock(1",
            "thermal(-0.5)",
            "squeezed(0.1)",
            "number_diagonal(0.5, 0.4)",
            "mix(0.5: fock(1))",
            "mix(0.5 fock(1), 0.5: fock(2))",
            "fock(1) extra",
        ] {
            assert!(bad.parse::<StateSpec>().is_err(), "accepted `{bad}`");
        }
    }

    #[test]
    fn classicality_tags() {
        use Classicality::*;
        assert_eq!(StateSpec::fock(0).classicality(), Classical);
        assert_eq!(StateSpec::fock(1).classicality(), Nonclassical);
        assert_eq!(StateSpec::thermal(0.3).classicality(), Classical);
        assert_eq!(StateSpec::phase_averaged_coherent(1.0).classicality(), Classical);
        assert_eq!(
            StateSpec::number_diagonal(vec![0.4, 0.2, 0.4]).classicality(),
            Nonclassical
        );
        // g2 = 2 * 0.5 / 1 = 1 for this distribution: not flagged
        assert_eq!(StateSpec::number_diagonal(vec![0.5, 0.0, 0.5]).classicality(), Unknown);
        let classical_mix = StateSpec::mixture(vec![
            (0.5, StateSpec::thermal(1.0)),
            (0.5, StateSpec::coherent(Complex64::new(0.0, 1.0))),
        ]);
        assert_eq!(classical_mix.classicality(), Classical);
        let mixed = StateSpec::mixture(vec![(0.5, StateSpec::fock(1)), (0.5, StateSpec::fock(0))]);
        assert_eq!(mixed.classicality(), Unknown);
        let single = StateSpec::mixture(vec![(1.0, StateSpec::fock(2))]);
        assert_eq!(single.classicality(), Nonclassical);
    }

    fn leaf() -> impl Strategy<Value = StateSpec> {
        prop_oneof![
            (0usize..6).prop_map(StateSpec::fock),
            (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| StateSpec::coherent(Complex64::new(re, im))),
            (0.0f64..3.0).prop_map(StateSpec::phase_averaged_coherent),
            (0.0f64..3.0).prop_map(StateSpec::thermal),
            proptest::collection::vec(0.01f64..1.0, 1..5).prop_map(|w| {
                let t: f64 = w.iter().sum();
                let mut p: Vec<f64> = w.iter().map(|x| x / t).collect();
                let rest: f64 = p[1..].iter().sum();
                p[0] = 1.0 - rest;
                StateSpec::number_diagonal(p)
            }),
        ]
    }

    fn spec_tree() -> impl Strategy<Value = StateSpec> {
        leaf().prop_recursive(2, 8, 3, |inner| {
            proptest::collection::vec(inner, 1..4).prop_map(|parts| {
                let n = parts.len() as f64;
                let mut weighted: Vec<(f64, StateSpec)> = parts.into_iter().map(|s| (1.0 / n, s)).collect();
                let rest: f64 = weighted[1..].iter().map(|(w, _)| w).sum();
                weighted[0].0 = 1.0 - rest;
                StateSpec::mixture(weighted)
            })
        })
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(spec in spec_tree()) {
            prop_assume!(spec.validate().is_ok());
            let text = spec.to_string();
            let back: StateSpec = text.parse().unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}
