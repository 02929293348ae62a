//! Pass/fail results of the exhaustive checkers.

use serde::Serialize;

/// Version of the JSON verdict schema.
pub const SCHEMA_VERSION: u32 = 1;

/// A concrete violation of a checked inclusion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Family member the violation was found in, when checking a family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub member: Option<String>,
    /// Indices of the congruences involved, in the member's canonical order.
    pub indices: Vec<usize>,
    /// The violating pair `(x, y)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<(usize, usize)>,
    /// Intermediate elements witnessing membership on the larger side.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<usize>,
    /// Order (`n` or `j`) at which the violation occurs, for multi-order checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

impl Counterexample {
    pub fn indices(indices: Vec<usize>) -> Self {
        Counterexample {
            member: None,
            indices,
            pair: None,
            witnesses: Vec::new(),
            order: None,
        }
    }

    pub fn with_pair(mut self, pair: (usize, usize), witnesses: Vec<usize>) -> Self {
        self.pair = Some(pair);
        self.witnesses = witnesses;
        self
    }

    pub fn in_member(mut self, member: impl Into<String>) -> Self {
        self.member = Some(member.into());
        self
    }

    pub fn at_order(mut self, order: usize) -> Self {
        self.order = Some(order);
        self
    }
}

/// Outcome of an exhaustive check. `counterexample` is present iff `holds` is false.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    pub triples_checked: usize,
    pub skipped_vacuous: usize,
}

impl Verdict {
    pub fn pass(check: impl Into<String>, triples_checked: usize, skipped_vacuous: usize) -> Self {
        Verdict {
            check: check.into(),
            holds: true,
            counterexample: None,
            triples_checked,
            skipped_vacuous,
        }
    }

    pub fn fail(
        check: impl Into<String>,
        counterexample: Counterexample,
        triples_checked: usize,
        skipped_vacuous: usize,
    ) -> Self {
        Verdict {
            check: check.into(),
            holds: false,
            counterexample: Some(counterexample),
            triples_checked,
            skipped_vacuous,
        }
    }

    /// Combines verdicts over several algebras; the first failure wins.
    pub fn merge(check: impl Into<String>, parts: impl IntoIterator<Item = Verdict>) -> Self {
        let mut out = Verdict::pass(check, 0, 0);
        for part in parts {
            out.triples_checked += part.triples_checked;
            out.skipped_vacuous += part.skipped_vacuous;
            if out.holds && !part.holds {
                out.holds = false;
                out.counterexample = part.counterexample;
            }
        }
        out
    }

    /// The versioned JSON document emitted by the CLI.
    pub fn report<'a>(&'a self, algebra: &'a str, n: Option<usize>) -> VerdictReport<'a> {
        VerdictReport {
            schema: SCHEMA_VERSION,
            check: &self.check,
            algebra,
            n,
            holds: self.holds,
            counterexample: self.counterexample.as_ref(),
            triples_checked: self.triples_checked,
            skipped_vacuous: self.skipped_vacuous,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerdictReport<'a> {
    pub schema: u32,
    pub check: &'a str,
    pub algebra: &'a str,
    pub n: Option<usize>,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<&'a Counterexample>,
    pub triples_checked: usize,
    pub skipped_vacuous: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_keeps_first_failure() {
        let a = Verdict::pass("x", 3, 1);
        let b = Verdict::fail("x", Counterexample::indices(vec![1, 2, 3]), 2, 0);
        let c = Verdict::fail("x", Counterexample::indices(vec![0, 0, 0]), 5, 0);
        let m = Verdict::merge("x", [a, b, c]);
        assert!(!m.holds);
        assert_eq!(m.triples_checked, 10);
        assert_eq!(m.skipped_vacuous, 1);
        assert_eq!(m.counterexample.unwrap().indices, vec![1, 2, 3]);
    }

    #[test]
    fn report_schema() {
        let v = Verdict::fail(
            "trapezoid",
            Counterexample::indices(vec![1, 2, 3]).with_pair((0, 2), vec![1, 3]),
            7,
            2,
        );
        let json = serde_json::to_value(v.report("z2z2", None)).unwrap();
        assert_eq!(json["schema"], 1);
        assert_eq!(json["check"], "trapezoid");
        assert_eq!(json["algebra"], "z2z2");
        assert_eq!(json["holds"], false);
        assert_eq!(json["triples_checked"], 7);
        assert_eq!(json["skipped_vacuous"], 2);
        assert_eq!(json["counterexample"]["pair"], serde_json::json!([0, 2]));
        let ok = Verdict::pass("freyd", 1, 0);
        let json = serde_json::to_value(ok.report("a", Some(2))).unwrap();
        assert!(json.get("counterexample").is_none());
        assert_eq!(json["n"], 2);
    }
}
