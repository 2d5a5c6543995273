use serde::Serialize;

/// Absolute tolerance applied when deciding whether a bound holds.
pub const HOLD_TOL: f64 = 1e-9;

/// One named summand of a bound expression.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

/// A secondary bound on the same observed quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AltBound {
    pub name: String,
    pub value: f64,
    /// `true` when the bound is an upper bound.
    pub upper: bool,
    pub holds: bool,
}

/// Observed value of a theorem's quantity against its envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: String,
    pub observed: f64,
    pub lower: f64,
    pub upper: f64,
    pub slack_lower: f64,
    pub slack_upper: f64,
    pub holds: bool,
    pub terms: Vec<Term>,
    pub hot_truncated: bool,
    pub alternates: Vec<AltBound>,
}

impl BoundReport {
    /// Upper bound given as the sum of `terms`.
    pub fn new(theorem: &str, observed: f64, lower: f64, terms: Vec<(String, f64)>, hot_truncated: bool) -> Self {
        let upper = terms.iter().map(|t| t.1).sum();
        Self::from_parts(theorem, observed, lower, upper, terms, hot_truncated)
    }

    pub fn from_parts(
        theorem: &str,
        observed: f64,
        lower: f64,
        upper: f64,
        terms: Vec<(String, f64)>,
        hot_truncated: bool,
    ) -> Self {
        let slack_lower = observed - lower;
        let slack_upper = upper - observed;
        Self {
            theorem: theorem.to_string(),
            observed,
            lower,
            upper,
            slack_lower,
            slack_upper,
            holds: slack_lower >= -HOLD_TOL && slack_upper >= -HOLD_TOL,
            terms: terms.into_iter().map(|(name, value)| Term { name, value }).collect(),
            hot_truncated,
            alternates: Vec::new(),
        }
    }

    pub fn with_alternate(mut self, name: &str, value: f64, upper: bool) -> Self {
        let holds = if upper { self.observed <= value + HOLD_TOL } else { self.observed >= value - HOLD_TOL };
        self.alternates.push(AltBound { name: name.to_string(), value, upper, holds });
        self
    }

    /// Main envelope and every alternate hold.
    pub fn all_hold(&self) -> bool {
        self.holds && self.alternates.iter().all(|a| a.holds)
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

