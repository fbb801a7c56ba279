//! Bipartite graph encoding of an (instance, cut) pair.

use serde::{Deserialize, Serialize};

use crate::instance::{Cut, IlpInstance};

/// One weighted edge between a constraint vertex and a variable vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub cons: usize,
    pub var: usize,
    pub weight: f64,
}

/// A bipartite graph with three-dimensional vertex features.
///
/// Variable vertex `j` carries `(c_j, alpha_j, beta)` — its objective entry,
/// its cut coefficient, and the cut right-hand side (shared by all
/// variables). Constraint vertices carry the constant `(1, 1, 1)`. One edge
/// per nonzero `A[i][j]`, weighted by that coefficient, listed row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutGraph {
    pub var_features: Vec<[f64; 3]>,
    pub cons_features: Vec<[f64; 3]>,
    pub edges: Vec<GraphEdge>,
}

impl CutGraph {
    pub fn num_vars(&self) -> usize {
        self.var_features.len()
    }

    pub fn num_cons(&self) -> usize {
        self.cons_features.len()
    }
}

/// Encodes an instance together with one candidate cut.
///
/// This is the boundary where rationals become `f64`. The cut must have one
/// coefficient per instance variable.
pub fn encode(inst: &IlpInstance, cut: &Cut) -> CutGraph {
    assert_eq!(
        cut.coeffs.len(),
        inst.num_vars,
        "cut arity {} does not match instance {} with {} variables",
        cut.coeffs.len(),
        inst.id,
        inst.num_vars,
    );
    let beta = cut.rhs.to_f64();
    let var_features = inst
        .c
        .iter()
        .zip(&cut.coeffs)
        .map(|(c, alpha)| [c.to_f64(), alpha.to_f64(), beta])
        .collect();
    let cons_features = vec![[1.0, 1.0, 1.0]; inst.num_cons];
    let mut edges = Vec::new();
    for (i, row) in inst.a.iter().enumerate() {
        for (j, coeff) in row.iter().enumerate() {
            if !coeff.is_zero() {
                edges.push(GraphEdge { cons: i, var: j, weight: coeff.to_f64() });
            }
        }
    }
    CutGraph { var_features, cons_features, edges }
}
