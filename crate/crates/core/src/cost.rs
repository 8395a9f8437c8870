//! Edit-operation costs as exact scaled integers.
//!
//! Every cost is an integer numerator over a common positive `scale`, so a
//! cost of `3` with scale `2` means 1.5. Distances and IP objectives are
//! computed in the same scaled units and only divided out for display.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::mapping::Mapping;
use crate::tree::{Label, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cost function is not a metric: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    NotMetric(Vec<MetricViolation>),
    #[error("mapping pair ({0}, {1}) references a node outside the trees")]
    PairOutOfRange(usize, usize),
    #[error("mapping is not one-to-one at pair ({0}, {1})")]
    NotOneToOne(usize, usize),
    #[error("total weight {weight} exceeds the delete+insert total {total}")]
    NegativeDistance { weight: i64, total: i64 },
}

/// Costs for substitution, deletion and insertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostFunction {
    scale: i64,
    sub: HashMap<(Label, Label), i64>,
    del: HashMap<Label, i64>,
    ins: HashMap<Label, i64>,
    default_sub: i64,
    default_del: i64,
    default_ins: i64,
    clamp_weights: bool,
}

/// Pair weight `del(x) + ins(y) - sub(x, y)`: the gain of mapping `x` to `y`
/// instead of deleting one and inserting the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Weight(pub i64);

/// Unit costs: every deletion, insertion and label change costs 1.
pub fn unit_cost() -> CostFunction {
    CostFunction::uniform(1, 1, 1)
}

impl CostFunction {
    /// Scale 1, the given default costs and no per-label overrides.
    pub fn uniform(sub: i64, del: i64, ins: i64) -> Self {
        CostFunction {
            scale: 1,
            sub: HashMap::new(),
            del: HashMap::new(),
            ins: HashMap::new(),
            default_sub: sub,
            default_del: del,
            default_ins: ins,
            clamp_weights: false,
        }
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn with_scale(mut self, scale: i64) -> Self {
        assert!(scale > 0, "scale must be positive");
        self.scale = scale;
        self
    }

    pub fn set_sub(&mut self, a: Label, b: Label, cost: i64) {
        self.sub.insert((a, b), cost);
    }

    pub fn set_del(&mut self, a: Label, cost: i64) {
        self.del.insert(a, cost);
    }

    pub fn set_ins(&mut self, a: Label, cost: i64) {
        self.ins.insert(a, cost);
    }

    /// Clamp negative pair weights to zero instead of trusting the metric
    /// axioms. Only meaningful for cost functions that failed validation.
    pub fn allow_nonmetric(mut self) -> Self {
        self.clamp_weights = true;
        self
    }

    pub fn sub(&self, a: &Label, b: &Label) -> i64 {
        if let Some(&c) = self.sub.get(&(a.clone(), b.clone())) {
            return c;
        }
        if a == b {
            0
        } else {
            self.default_sub
        }
    }

    pub fn del(&self, a: &Label) -> i64 {
        self.del.get(a).copied().unwrap_or(self.default_del)
    }

    pub fn ins(&self, b: &Label) -> i64 {
        self.ins.get(b).copied().unwrap_or(self.default_ins)
    }

    /// Labels mentioned explicitly anywhere in the table.
    pub fn mentioned_labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for (a, b) in self.sub.keys() {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        out.extend(self.del.keys().cloned());
        out.extend(self.ins.keys().cloned());
        out
    }

    /// Parses the cost file format:
    ///
    /// ```text
    /// scale 2
    /// default-sub 2
    /// default-del 2
    /// default-ins 2
    /// sub a b 1
    /// del a 3
    /// ins b 3
    /// ```
    ///
    /// `#` starts a comment. Unspecified defaults are one scaled unit each.
    pub fn parse(text: &str) -> Result<Self, CostError> {
        let mut cost = CostFunction::uniform(1, 1, 1);
        let mut seen_scale = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| CostError::Parse { line, message };
            let fields: Vec<&str> = content.split_whitespace().collect();
            let int = |s: &str| -> Result<i64, CostError> {
                s.parse::<i64>().map_err(|_| err(format!("expected an integer, found {s:?}")))
            };
            let label = |s: &str| Label::new(s).map_err(|e| err(e.to_string()));
            let arity = |n: usize| -> Result<(), CostError> {
                if fields.len() == n {
                    Ok(())
                } else {
                    Err(err(format!("`{}` takes {} argument(s)", fields[0], n - 1)))
                }
            };
            match fields[0] {
                "scale" => {
                    arity(2)?;
                    if seen_scale {
                        return Err(err("duplicate `scale`".into()));
                    }
                    let s = int(fields[1])?;
                    if s <= 0 {
                        return Err(err("scale must be positive".into()));
                    }
                    cost.scale = s;
                    seen_scale = true;
                }
                "sub" => {
                    arity(4)?;
                    cost.set_sub(label(fields[1])?, label(fields[2])?, int(fields[3])?);
                }
                "del" => {
                    arity(3)?;
                    cost.set_del(label(fields[1])?, int(fields[2])?);
                }
                "ins" => {
                    arity(3)?;
                    cost.set_ins(label(fields[1])?, int(fields[2])?);
                }
                "default-sub" => {
                    arity(2)?;
                    cost.default_sub = int(fields[1])?;
                }
                "default-del" => {
                    arity(2)?;
                    cost.default_del = int(fields[1])?;
                }
                "default-ins" => {
                    arity(2)?;
                    cost.default_ins = int(fields[1])?;
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        Ok(cost)
    }

    /// Converts a scaled value to an exact rational in reduced form.
    pub fn to_ratio(&self, scaled: i64) -> Ratio<i64> {
        Ratio::new(scaled, self.scale)
    }

    /// Renders a scaled value as `p/q` or an integer.
    pub fn render(&self, scaled: i64) -> String {
        self.to_ratio(scaled).to_string()
    }
}

/// A failed metric axiom, with the offending labels (`None` = blank).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricViolation {
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.rule, self.detail)
    }
}

/// Checks the metric axioms over the alphabet extended with the blank symbol.
/// Returns every violation found; an empty list means the costs are a metric
/// on `alphabet`.
pub fn validate_metric<'a, I>(cost: &CostFunction, alphabet: I) -> Vec<MetricViolation>
where
    I: IntoIterator<Item = &'a Label>,
{
    let labels: Vec<&Label> = alphabet.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    let mut out = Vec::new();
    let mut push = |rule: &'static str, detail: String| out.push(MetricViolation { rule, detail });

    for &a in &labels {
        if cost.del(a) < 0 {
            push("del(a) >= 0", format!("a={a}"));
        }
        if cost.ins(a) < 0 {
            push("ins(a) >= 0", format!("a={a}"));
        }
        if cost.sub(a, a) != 0 {
            push("sub(a,a) = 0", format!("a={a}"));
        }
    }
    for &a in &labels {
        for &b in &labels {
            let ab = cost.sub(a, b);
            if ab < 0 {
                push("sub(a,b) >= 0", format!("a={a}, b={b}"));
            }
            if a < b && ab != cost.sub(b, a) {
                push("sub(a,b) = sub(b,a)", format!("a={a}, b={b}"));
            }
            if ab > cost.del(a) + cost.ins(b) {
                push("sub(a,b) <= del(a)+ins(b)", format!("a={a}, b={b}"));
            }
            if cost.del(a) > ab + cost.del(b) {
                push("del(a) <= sub(a,b)+del(b)", format!("a={a}, b={b}"));
            }
            if cost.ins(b) > cost.ins(a) + ab {
                push("ins(b) <= ins(a)+sub(a,b)", format!("a={a}, b={b}"));
            }
            for &c in &labels {
                if cost.sub(a, c) > ab + cost.sub(b, c) {
                    push("sub(a,c) <= sub(a,b)+sub(b,c)", format!("a={a}, b={b}, c={c}"));
                }
            }
        }
    }
    out
}

/// `del(x) + ins(y) - sub(x, y)`. Nonnegative for metric costs; cost
/// functions built with [`CostFunction::allow_nonmetric`] clamp at zero.
pub fn pair_weight(cost: &CostFunction, x: &Label, y: &Label) -> Weight {
    let w = cost.del(x) + cost.ins(y) - cost.sub(x, y);
    if cost.clamp_weights {
        Weight(w.max(0))
    } else {
        Weight(w)
    }
}

/// Σ del over `t1` plus Σ ins over `t2`: the cost of the empty mapping.
pub fn total_indel(cost: &CostFunction, t1: &Tree, t2: &Tree) -> i64 {
    t1.labels().iter().map(|a| cost.del(a)).sum::<i64>() + t2.labels().iter().map(|b| cost.ins(b)).sum::<i64>()
}

/// Cost of a one-to-one mapping: substitutions for mapped pairs, deletions
/// and insertions for everything unmapped.
pub fn mapping_cost(cost: &CostFunction, t1: &Tree, t2: &Tree, m: &Mapping) -> Result<i64, CostError> {
    let mut used1 = vec![false; t1.len()];
    let mut used2 = vec![false; t2.len()];
    let mut total = 0;
    for (x, y) in m.iter() {
        if x >= t1.len() || y >= t2.len() {
            return Err(CostError::PairOutOfRange(x, y));
        }
        if used1[x] || used2[y] {
            return Err(CostError::NotOneToOne(x, y));
        }
        used1[x] = true;
        used2[y] = true;
        total += cost.sub(t1.label(x), t2.label(y));
    }
    total += t1.nodes().filter(|&x| !used1[x]).map(|x| cost.del(t1.label(x))).sum::<i64>();
    total += t2.nodes().filter(|&y| !used2[y]).map(|y| cost.ins(t2.label(y))).sum::<i64>();
    Ok(total)
}

/// Converts a maximum total pair weight into a distance.
pub fn distance_from_weight(cost: &CostFunction, t1: &Tree, t2: &Tree, total_weight: i64) -> Result<i64, CostError> {
    let total = total_indel(cost, t1, t2);
    if total_weight > total {
        return Err(CostError::NegativeDistance { weight: total_weight, total });
    }
    Ok(total - total_weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_bracket;

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    #[test]
    fn unit_cost_values() {
        let c = unit_cost();
        assert_eq!(c.sub(&l("a"), &l("a")), 0);
        assert_eq!(c.sub(&l("a"), &l("b")), 1);
        assert_eq!(c.del(&l("a")), 1);
        assert_eq!(c.ins(&l("a")), 1);
        assert_eq!(c.scale(), 1);
    }

    #[test]
    fn unit_cost_is_metric() {
        let alphabet = [l("a"), l("b"), l("c"), l("d")];
        assert!(validate_metric(&unit_cost(), &alphabet).is_empty());
    }

    #[test]
    fn detects_metric_violations() {
        let mut c = unit_cost();
        c.set_sub(l("a"), l("b"), 5);
        c.set_sub(l("b"), l("a"), 5);
        let v = validate_metric(&c, &[l("a"), l("b")]);
        assert!(v.iter().any(|v| v.rule == "sub(a,b) <= del(a)+ins(b)"), "{v:?}");

        let mut asym = unit_cost();
        asym.set_sub(l("a"), l("b"), 2);
        let v = validate_metric(&asym, &[l("a"), l("b")]);
        assert!(v.iter().any(|v| v.rule == "sub(a,b) = sub(b,a)"), "{v:?}");
    }

    #[test]
    fn pair_weights() {
        let c = unit_cost();
        assert_eq!(pair_weight(&c, &l("a"), &l("a")), Weight(2));
        assert_eq!(pair_weight(&c, &l("a"), &l("b")), Weight(1));
        let boundary = CostFunction::uniform(2, 1, 1);
        assert_eq!(pair_weight(&boundary, &l("a"), &l("b")), Weight(0));
        let bad = CostFunction::uniform(5, 1, 1);
        assert_eq!(pair_weight(&bad, &l("a"), &l("b")), Weight(-3));
        assert_eq!(pair_weight(&bad.allow_nonmetric(), &l("a"), &l("b")), Weight(0));
    }

    #[test]
    fn mapping_costs() {
        let c = unit_cost();
        let t1 = parse_bracket("a(b,c)").unwrap();
        let t2 = parse_bracket("a(b,d)").unwrap();
        assert_eq!(mapping_cost(&c, &t1, &t2, &Mapping::new()).unwrap(), 6);
        let m = Mapping::from_pairs([(0, 0), (1, 1), (2, 2)]);
        assert_eq!(mapping_cost(&c, &t1, &t2, &m).unwrap(), 1);
        let id = Mapping::from_pairs([(0, 0), (1, 1), (2, 2)]);
        assert_eq!(mapping_cost(&c, &t1, &t1, &id).unwrap(), 0);
        assert_eq!(
            mapping_cost(&c, &t1, &t2, &Mapping::from_pairs([(0, 0), (0, 1)])),
            Err(CostError::NotOneToOne(0, 1))
        );
        assert_eq!(mapping_cost(&c, &t1, &t2, &Mapping::from_pairs([(9, 0)])), Err(CostError::PairOutOfRange(9, 0)));
    }

    #[test]
    fn weight_to_distance() {
        let c = unit_cost();
        let t1 = parse_bracket("a(b,c)").unwrap();
        let t2 = parse_bracket("a(b,d)").unwrap();
        assert_eq!(distance_from_weight(&c, &t1, &t2, 0).unwrap(), 6);
        assert_eq!(distance_from_weight(&c, &t1, &t1, 6).unwrap(), 0);
        assert_eq!(distance_from_weight(&c, &t1, &t2, 5).unwrap(), 1);
        assert!(distance_from_weight(&c, &t1, &t2, 7).is_err());
    }

    #[test]
    fn parses_cost_files() {
        let text =
            "# costs\nscale 2\ndefault-sub 2\ndefault-del 2\ndefault-ins 2\nsub a b 1\nsub b a 1\ndel a 3 # heavier\n";
        let c = CostFunction::parse(text).unwrap();
        assert_eq!(c.scale(), 2);
        assert_eq!(c.sub(&l("a"), &l("b")), 1);
        assert_eq!(c.sub(&l("a"), &l("c")), 2);
        assert_eq!(c.sub(&l("c"), &l("c")), 0);
        assert_eq!(c.del(&l("a")), 3);
        assert_eq!(c.ins(&l("a")), 2);
        assert_eq!(c.render(3), "3/2");
        assert_eq!(c.render(4), "2");

        assert!(matches!(CostFunction::parse("scale 0"), Err(CostError::Parse { line: 1, .. })));
        assert!(matches!(CostFunction::parse("\nsub a b"), Err(CostError::Parse { line: 2, .. })));
        assert!(matches!(CostFunction::parse("del a x"), Err(CostError::Parse { line: 1, .. })));
        assert!(matches!(CostFunction::parse("frobnicate"), Err(CostError::Parse { .. })));
    }
}
