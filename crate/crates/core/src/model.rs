//! Hypothesis, context, and dataset types.
//!
//! A [`MilpModel`] is the learnable triple `(A, b, c)` together with the
//! integrality mask and a finite bounding box that every solver and
//! generator treats as implicit constraints. A [`Context`] is an extra block
//! of rows `S x <= t` conjoined to a model for one query.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` for one variable.
pub type Bounds = (f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub integer_mask: Vec<bool>,
    pub domain_box: Vec<Bounds>,
}

impl MilpModel {
    pub fn new(
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        integer_mask: Vec<bool>,
        domain_box: Vec<Bounds>,
    ) -> Self {
        Self {
            a,
            b,
            c,
            integer_mask,
            domain_box,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        dot(&self.c, x)
    }

    pub fn is_all_integer(&self) -> bool {
        self.integer_mask.iter().all(|&v| v)
    }

    /// Returns `Err(Error::InvalidModel)` carrying every violation found.
    pub fn validate(&self) -> Result<()> {
        let violations = validate_model(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(violations))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    Empty,
    DimensionMismatch(String),
    NonFinite(String),
    ZeroCost,
    InvertedBounds(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "model must have at least one row and one variable"),
            Violation::DimensionMismatch(what) => write!(f, "dimension mismatch: {what}"),
            Violation::NonFinite(what) => write!(f, "non-finite entry in {what}"),
            Violation::ZeroCost => write!(f, "zero cost vector"),
            Violation::InvertedBounds(i) => write!(f, "domain_box lo > hi for variable {i}"),
        }
    }
}

/// Lists every invariant violation of `model`. An empty list means the model
/// is well formed.
pub fn validate_model(model: &MilpModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = model.c.len();
    let m = model.a.len();
    if n == 0 || m == 0 {
        out.push(Violation::Empty);
    }
    if model.b.len() != m {
        out.push(Violation::DimensionMismatch(format!(
            "b has length {} but A has {m} rows",
            model.b.len()
        )));
    }
    for (j, row) in model.a.iter().enumerate() {
        if row.len() != n {
            out.push(Violation::DimensionMismatch(format!(
                "row {j} of A has length {} but c has length {n}",
                row.len()
            )));
        }
    }
    if model.integer_mask.len() != n {
        out.push(Violation::DimensionMismatch(format!(
            "integer_mask has length {} but c has length {n}",
            model.integer_mask.len()
        )));
    }
    if model.domain_box.len() != n {
        out.push(Violation::DimensionMismatch(format!(
            "domain_box has length {} but c has length {n}",
            model.domain_box.len()
        )));
    }
    if model.a.iter().flatten().any(|v| !v.is_finite()) {
        out.push(Violation::NonFinite("A".into()));
    }
    if model.b.iter().any(|v| !v.is_finite()) {
        out.push(Violation::NonFinite("b".into()));
    }
    if model.c.iter().any(|v| !v.is_finite()) {
        out.push(Violation::NonFinite("c".into()));
    }
    if model
        .domain_box
        .iter()
        .any(|(lo, hi)| !lo.is_finite() || !hi.is_finite())
    {
        out.push(Violation::NonFinite("domain_box".into()));
    }
    for (i, (lo, hi)) in model.domain_box.iter().enumerate() {
        if lo > hi {
            out.push(Violation::InvertedBounds(i));
        }
    }
    if n > 0 && model.c.iter().all(|&v| v == 0.0) {
        out.push(Violation::ZeroCost);
    }
    out
}

/// Scales every row `(a_j, b_j)` and the cost vector to unit Euclidean norm.
///
/// The feasible set is unchanged because each half-space is divided by a
/// positive scalar; the optimizer set is unchanged because `c` is.
pub fn normalize_model(model: &MilpModel) -> Result<MilpModel> {
    model.validate()?;
    let mut out = model.clone();
    for (j, (row, bj)) in out.a.iter_mut().zip(out.b.iter_mut()).enumerate() {
        let norm = l2_norm(row);
        if norm == 0.0 {
            return Err(Error::DegenerateRow(j));
        }
        row.iter_mut().for_each(|v| *v /= norm);
        *bj /= norm;
    }
    let norm = l2_norm(&out.c);
    out.c.iter_mut().for_each(|v| *v /= norm);
    Ok(out)
}

/// Conjoins the context rows below the model rows.
pub fn apply_context(model: &MilpModel, ctx: &Context) -> Result<MilpModel> {
    ctx.check_dims(model.num_vars())?;
    let mut out = model.clone();
    out.a.extend(ctx.s.iter().cloned());
    out.b.extend(ctx.t.iter().copied());
    Ok(out)
}

/// Extra linear restriction `S x <= t`. Zero rows encode the empty context.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Context {
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    pub t: Vec<f64>,
}

impl Context {
    pub fn new(s: Vec<Vec<f64>>, t: Vec<f64>) -> Self {
        Self { s, t }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn num_rows(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Concatenates the rows of `other` after the rows of `self`.
    pub fn stack(&self, other: &Context) -> Context {
        let mut out = self.clone();
        out.s.extend(other.s.iter().cloned());
        out.t.extend(other.t.iter().copied());
        out
    }

    pub fn check_dims(&self, n: usize) -> Result<()> {
        if self.s.len() != self.t.len() {
            return Err(Error::DimensionMismatch(format!(
                "context has {} rows but {} offsets",
                self.s.len(),
                self.t.len()
            )));
        }
        if let Some((k, row)) = self.s.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "context row {k} has length {} but the model has {n} variables",
                row.len()
            )));
        }
        if self.s.iter().flatten().chain(&self.t).any(|v| !v.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite context entry".into()));
        }
        Ok(())
    }

    /// Bit-level key used to group examples sharing a context.
    fn key(&self) -> Vec<u64> {
        let mut key = Vec::with_capacity(self.s.len() * (self.s.first().map_or(0, Vec::len) + 1));
        for (row, t) in self.s.iter().zip(&self.t) {
            key.extend(row.iter().map(|v| v.to_bits()));
            key.push(t.to_bits());
        }
        key
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextualExample {
    #[serde(flatten)]
    pub context: Context,
    #[serde(rename = "x")]
    pub point: Vec<f64>,
    #[serde(rename = "y", with = "label_bit")]
    pub label: bool,
}

impl ContextualExample {
    pub fn new(context: Context, point: Vec<f64>, label: bool) -> Self {
        Self {
            context,
            point,
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub n: usize,
    pub integer_mask: Vec<bool>,
    pub domain_box: Vec<Bounds>,
    pub examples: Vec<ContextualExample>,
}

/// Examples sharing one context, in order of first appearance.
#[derive(Debug, Clone)]
pub struct ContextGroup {
    pub representative: usize,
    pub members: Vec<usize>,
}

impl Dataset {
    pub fn new(
        n: usize,
        integer_mask: Vec<bool>,
        domain_box: Vec<Bounds>,
        examples: Vec<ContextualExample>,
    ) -> Self {
        Self {
            n,
            integer_mask,
            domain_box,
            examples,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn positives(&self) -> impl Iterator<Item = &ContextualExample> {
        self.examples.iter().filter(|e| e.label)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDataset(msg));
        if self.examples.is_empty() {
            return bad("dataset has no examples".into());
        }
        if self.integer_mask.len() != self.n || self.domain_box.len() != self.n {
            return bad(format!(
                "integer_mask/domain_box lengths ({}, {}) differ from n = {}",
                self.integer_mask.len(),
                self.domain_box.len(),
                self.n
            ));
        }
        if self.domain_box.iter().any(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
            return bad("domain_box must be finite with lo <= hi".into());
        }
        for (k, ex) in self.examples.iter().enumerate() {
            ex.context
                .check_dims(self.n)
                .map_err(|e| Error::InvalidDataset(format!("example {k}: {e}")))?;
            if ex.point.len() != self.n {
                return bad(format!("example {k}: point has length {}", ex.point.len()));
            }
            let inside = ex
                .point
                .iter()
                .zip(&self.domain_box)
                .all(|(v, (lo, hi))| v.is_finite() && lo <= v && v <= hi);
            if !inside {
                return bad(format!("example {k}: point lies outside domain_box"));
            }
        }
        if self.positives().next().is_none() {
            return Err(Error::NoPositiveExamples);
        }
        Ok(())
    }

    /// Groups examples by bitwise-identical context.
    pub fn context_groups(&self) -> Vec<ContextGroup> {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut groups: Vec<ContextGroup> = Vec::new();
        for (k, ex) in self.examples.iter().enumerate() {
            let slot = *index.entry(ex.context.key()).or_insert_with(|| {
                groups.push(ContextGroup {
                    representative: k,
                    members: Vec::new(),
                });
                groups.len() - 1
            });
            groups[slot].members.push(k);
        }
        groups
    }
}

mod label_bit {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(label: &bool, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_u8(u8::from(*label))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<bool, D::Error> {
        match u8::deserialize(de)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(D::Error::custom(format!("label must be 0 or 1, got {other}"))),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
