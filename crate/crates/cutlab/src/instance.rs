//! Integer linear programs in the canonical form
//!
//! ```text
//!   max c'x   subject to   A x <= b,  x >= 0,  x integer
//! ```
//!
//! with every coefficient an exact [`Rational`]. The JSON document layout is
//! `{"id", "n", "m", "A", "b", "c"}` with rationals encoded as `"p"` or
//! `"p/q"` strings, so serialization round-trips bit-exactly.

use serde::{Deserialize, Serialize};

use crate::rational::{dot, Rational};

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("instance {id:?}: {detail}")]
    Shape { id: String, detail: String },
}

/// One ILP instance. `a` holds the `m` constraint rows, each of length `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct IlpInstance {
    pub id: String,
    #[serde(rename = "n")]
    pub num_vars: usize,
    #[serde(rename = "m")]
    pub num_cons: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
}

#[derive(Deserialize)]
struct RawInstance {
    id: String,
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    c: Vec<Rational>,
}

impl TryFrom<RawInstance> for IlpInstance {
    type Error = InstanceError;

    fn try_from(raw: RawInstance) -> Result<Self, InstanceError> {
        let inst = IlpInstance {
            id: raw.id,
            num_vars: raw.n,
            num_cons: raw.m,
            a: raw.a,
            b: raw.b,
            c: raw.c,
        };
        inst.validate()?;
        Ok(inst)
    }
}

impl IlpInstance {
    /// Builds an instance from its matrix data, deriving `n` and `m`.
    pub fn new(
        id: impl Into<String>,
        a: Vec<Vec<Rational>>,
        b: Vec<Rational>,
        c: Vec<Rational>,
    ) -> Result<Self, InstanceError> {
        let inst = IlpInstance {
            id: id.into(),
            num_vars: c.len(),
            num_cons: a.len(),
            a,
            b,
            c,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let fail = |detail: String| {
            Err(InstanceError::Shape {
                id: self.id.clone(),
                detail,
            })
        };
        if self.num_vars == 0 {
            return fail("no variables (n >= 1 required)".into());
        }
        if self.num_cons == 0 {
            return fail("no constraints (m >= 1 required)".into());
        }
        if self.a.len() != self.num_cons {
            return fail(format!("A has {} rows, m = {}", self.a.len(), self.num_cons));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != self.num_vars {
                return fail(format!("A row {} has {} entries, n = {}", i, row.len(), self.num_vars));
            }
        }
        if self.b.len() != self.num_cons {
            return fail(format!("b has {} entries, m = {}", self.b.len(), self.num_cons));
        }
        if self.c.len() != self.num_vars {
            return fail(format!("c has {} entries, n = {}", self.c.len(), self.num_vars));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, InstanceError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization cannot fail")
    }

    /// True when `x` satisfies `A x <= b` and `x >= 0` exactly.
    pub fn satisfies(&self, x: &[Rational]) -> bool {
        debug_assert_eq!(x.len(), self.num_vars);
        if x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.a
            .iter()
            .zip(&self.b)
            .all(|(row, rhs)| &dot(row, x) <= rhs)
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.c, x)
    }
}

/// The two-variable worked example used throughout the docs and tests:
/// maximize `5 x1 + 8 x2` subject to `x1 + x2 <= 6`, `5 x1 + 9 x2 <= 45`.
/// Its LP optimum is `(9/4, 15/4)` with value `165/4`; its integer optimum
/// is `(0, 5)` with value `40`.
pub const TWO_VAR_DOC: &str = r#"{
    "id": "paper-example-2d",
    "n": 2,
    "m": 2,
    "A": [["1", "1"], ["5", "9"]],
    "b": ["6", "45"],
    "c": ["5", "8"]
}"#;

/// A single extra inequality `coeffs' x <= rhs` over the structural variables.
/// Used for Chvátal-Gomory cuts and for branch bounds inside the tree search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl Cut {
    pub fn new(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Cut { coeffs, rhs }
    }

    /// True when `x` satisfies the inequality.
    pub fn satisfies(&self, x: &[Rational]) -> bool {
        dot(&self.coeffs, x) <= self.rhs
    }
}
