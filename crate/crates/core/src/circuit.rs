//! Layered linear circuits: addition gates with per-wire field coefficients.
//!
//! Layer 0 holds the inputs; `layers[k]` holds the gates of layer `k + 1`.
//! Every wire points to a node in a strictly earlier layer.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gf::{BitVector, Field, GfError, Matrix};

pub const DEFAULT_PATH_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("expected {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("field mismatch")]
    FieldMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("collapse needs depth at least 2, circuit has depth {0}")]
    DepthTooSmall(usize),
    #[error("more than {0} paths enumerated")]
    PathBudgetExceeded(u64),
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error(transparent)]
    Gf(#[from] GfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef {
    pub layer: usize,
    pub index: usize,
}

impl NodeRef {
    pub fn new(layer: usize, index: usize) -> Self {
        NodeRef { layer, index }
    }

    pub fn input(index: usize) -> Self {
        NodeRef { layer: 0, index }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Wire {
    pub src: NodeRef,
    pub coeff: u64,
}

impl Wire {
    pub fn new(layer: usize, index: usize, coeff: u64) -> Self {
        Wire {
            src: NodeRef { layer, index },
            coeff,
        }
    }
}

pub type Gate = Vec<Wire>;

/// Merge parallel wires, drop zero coefficients, sort by source.
fn normalize_gate(field: Field, wires: impl IntoIterator<Item = Wire>) -> Gate {
    let mut acc: BTreeMap<NodeRef, u64> = BTreeMap::new();
    for w in wires {
        let e = acc.entry(w.src).or_insert(0);
        *e = field.add(*e, w.coeff);
    }
    acc.into_iter()
        .filter(|&(_, c)| c != 0)
        .map(|(src, coeff)| Wire { src, coeff })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCircuit {
    field: Field,
    num_inputs: usize,
    layers: Vec<Vec<Gate>>,
    outputs: Vec<NodeRef>,
}

impl LinearCircuit {
    /// Validated constructor. Parallel wires are merged and zero
    /// coefficients are rejected.
    pub fn new(
        field: Field,
        num_inputs: usize,
        layers: Vec<Vec<Gate>>,
        outputs: Vec<NodeRef>,
    ) -> Result<Self, CircuitError> {
        for layer in &layers {
            for gate in layer {
                if gate.iter().any(|w| w.coeff == 0) {
                    return Err(CircuitError::Invalid("zero coefficient stored".into()));
                }
            }
        }
        let layers = layers
            .into_iter()
            .map(|l| l.into_iter().map(|g| normalize_gate(field, g)).collect())
            .collect();
        let c = Self::new_uncanonical(field, num_inputs, layers, outputs)?;
        Ok(c)
    }

    /// Constructor that keeps wires exactly as given, zero coefficients
    /// included.
    pub fn new_uncanonical(
        field: Field,
        num_inputs: usize,
        layers: Vec<Vec<Gate>>,
        outputs: Vec<NodeRef>,
    ) -> Result<Self, CircuitError> {
        let c = LinearCircuit {
            field,
            num_inputs,
            layers,
            outputs,
        };
        c.validate()?;
        Ok(c)
    }

    fn layer_width(&self, layer: usize) -> usize {
        if layer == 0 {
            self.num_inputs
        } else {
            self.layers[layer - 1].len()
        }
    }

    fn node_exists(&self, r: NodeRef) -> bool {
        r.layer <= self.layers.len() && r.index < self.layer_width(r.layer)
    }

    fn validate(&self) -> Result<(), CircuitError> {
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.is_empty() {
                return Err(CircuitError::Invalid(format!("layer {} is empty", k + 1)));
            }
            for (g, gate) in layer.iter().enumerate() {
                for w in gate {
                    if w.src.layer > k || !self.node_exists(w.src) {
                        return Err(CircuitError::Invalid(format!(
                            "gate ({}, {g}) has bad source ({}, {})",
                            k + 1,
                            w.src.layer,
                            w.src.index
                        )));
                    }
                    if !self.field.contains(w.coeff) {
                        return Err(GfError::EntryOutOfRange {
                            value: w.coeff,
                            order: self.field.order(),
                        }
                        .into());
                    }
                }
            }
        }
        for o in &self.outputs {
            if !self.node_exists(*o) {
                return Err(CircuitError::Invalid(format!(
                    "output ({}, {}) does not exist",
                    o.layer, o.index
                )));
            }
        }
        Ok(())
    }

    /// One layer, gate `i` reads input `i`.
    pub fn identity(field: Field, n: usize) -> Self {
        let layer = (0..n).map(|i| vec![Wire::new(0, i, 1)]).collect();
        let outputs = (0..n).map(|i| NodeRef::new(1, i)).collect();
        LinearCircuit {
            field,
            num_inputs: n,
            layers: vec![layer],
            outputs,
        }
    }

    /// Depth-1 circuit whose generator matrix is `m`.
    pub fn from_matrix(m: &Matrix) -> Self {
        let layer = (0..m.cols())
            .map(|j| {
                (0..m.rows())
                    .filter(|&i| m.get(i, j) != 0)
                    .map(|i| Wire::new(0, i, m.get(i, j)))
                    .collect()
            })
            .collect();
        let outputs = (0..m.cols()).map(|j| NodeRef::new(1, j)).collect();
        LinearCircuit {
            field: m.field(),
            num_inputs: m.rows(),
            layers: vec![layer],
            outputs,
        }
    }

    /// Depth-1 circuit from per-output `(input, coeff)` lists.
    pub fn depth1(
        field: Field,
        num_inputs: usize,
        gates: Vec<Vec<(usize, u64)>>,
    ) -> Result<Self, CircuitError> {
        let outputs = (0..gates.len()).map(|j| NodeRef::new(1, j)).collect();
        let layer = gates
            .into_iter()
            .map(|g| g.into_iter().map(|(i, c)| Wire::new(0, i, c)).collect())
            .collect();
        Self::new(field, num_inputs, vec![layer], outputs)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn outputs(&self) -> &[NodeRef] {
        &self.outputs
    }

    pub fn gate(&self, r: NodeRef) -> Option<&Gate> {
        if r.layer == 0 {
            None
        } else {
            self.layers.get(r.layer - 1).and_then(|l| l.get(r.index))
        }
    }

    /// Number of stored wires.
    pub fn size(&self) -> usize {
        self.layers.iter().flatten().map(Vec::len).sum()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Largest fan-in among output gates; an output aliasing an input counts 1.
    pub fn output_fanin(&self) -> usize {
        self.outputs
            .iter()
            .map(|&o| self.gate(o).map_or(1, Vec::len))
            .max()
            .unwrap_or(0)
    }

    /// Largest fan-in over all gates of the given layer (1-based).
    pub fn layer_fanin(&self, layer: usize) -> usize {
        self.layers[layer - 1]
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }

    pub fn has_zero_coefficients(&self) -> bool {
        self.layers.iter().flatten().flatten().any(|w| w.coeff == 0)
    }

    /// Drops zero-coefficient wires and merges parallel ones.
    pub fn canonicalize(&self) -> LinearCircuit {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                l.iter()
                    .map(|g| normalize_gate(self.field, g.iter().copied()))
                    .collect()
            })
            .collect();
        LinearCircuit {
            layers,
            ..self.clone()
        }
    }

    pub fn eval(&self, x: &[u64]) -> Result<Vec<u64>, CircuitError> {
        if x.len() != self.num_inputs {
            return Err(CircuitError::ArityMismatch {
                expected: self.num_inputs,
                got: x.len(),
            });
        }
        if x.iter().any(|&v| !self.field.contains(v)) {
            return Err(CircuitError::FieldMismatch);
        }
        let f = self.field;
        let mut values: Vec<Vec<u64>> = Vec::with_capacity(self.layers.len() + 1);
        values.push(x.to_vec());
        for layer in &self.layers {
            let row = layer
                .iter()
                .map(|gate| {
                    gate.iter().fold(0u64, |acc, w| {
                        f.add(acc, f.mul(w.coeff, values[w.src.layer][w.src.index]))
                    })
                })
                .collect();
            values.push(row);
        }
        Ok(self
            .outputs
            .iter()
            .map(|o| values[o.layer][o.index])
            .collect())
    }

    pub fn eval_bits(&self, x: &BitVector) -> Result<BitVector, CircuitError> {
        if !self.field.is_gf2() {
            return Err(CircuitError::FieldMismatch);
        }
        let y = self.eval(&x.to_elements())?;
        Ok(BitVector::from_elements(&y))
    }

    /// For each node, its linear form as a coefficient vector over the inputs.
    fn node_forms(&self) -> Vec<Vec<Vec<u64>>> {
        let f = self.field;
        let n = self.num_inputs;
        let mut forms: Vec<Vec<Vec<u64>>> = Vec::with_capacity(self.layers.len() + 1);
        forms.push(
            (0..n)
                .map(|i| {
                    let mut e = vec![0u64; n];
                    e[i] = 1;
                    e
                })
                .collect(),
        );
        for layer in &self.layers {
            let row = layer
                .iter()
                .map(|gate| {
                    let mut acc = vec![0u64; n];
                    for w in gate {
                        let src = &forms[w.src.layer][w.src.index];
                        for (a, &s) in acc.iter_mut().zip(src) {
                            if s != 0 {
                                *a = f.add(*a, f.mul(w.coeff, s));
                            }
                        }
                    }
                    acc
                })
                .collect();
            forms.push(row);
        }
        forms
    }

    /// `num_inputs × num_outputs` matrix whose row `i` is the image of `e_i`.
    pub fn generator_matrix(&self) -> Matrix {
        let forms = self.node_forms();
        let mut m = Matrix::zeros(self.field, self.num_inputs, self.outputs.len());
        for (j, o) in self.outputs.iter().enumerate() {
            for (i, &v) in forms[o.layer][o.index].iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Generator rows packed as bit vectors of length `num_outputs`.
    pub fn binary_generator_rows(&self) -> Result<Vec<BitVector>, CircuitError> {
        if !self.field.is_gf2() {
            return Err(CircuitError::FieldMismatch);
        }
        let m = self.generator_matrix();
        Ok((0..m.rows())
            .map(|i| BitVector::from_elements(m.row(i)))
            .collect())
    }

    /// Sum over all paths from input `i` to output `j` of the product of
    /// wire coefficients, by explicit enumeration.
    pub fn path_sum_entry(&self, i: usize, j: usize, cap: u64) -> Result<u64, CircuitError> {
        if i >= self.num_inputs || j >= self.outputs.len() {
            return Err(CircuitError::ShapeMismatch(format!(
                "entry ({i}, {j}) out of range"
            )));
        }
        let f = self.field;
        let mut total = 0u64;
        let mut paths = 0u64;
        let mut stack: Vec<(NodeRef, u64)> = vec![(self.outputs[j], 1)];
        while let Some((node, prod)) = stack.pop() {
            if node.layer == 0 {
                paths += 1;
                if paths > cap {
                    return Err(CircuitError::PathBudgetExceeded(cap));
                }
                if node.index == i {
                    total = f.add(total, prod);
                }
                continue;
            }
            for w in &self.layers[node.layer - 1][node.index] {
                stack.push((w.src, f.mul(prod, w.coeff)));
            }
        }
        Ok(total)
    }

    /// Removes gates that no output depends on, then drops layers left empty.
    pub fn prune_dead_gates(&self) -> LinearCircuit {
        let depth = self.layers.len();
        let mut live: Vec<Vec<bool>> = self.layers.iter().map(|l| vec![false; l.len()]).collect();
        for o in &self.outputs {
            if o.layer > 0 {
                live[o.layer - 1][o.index] = true;
            }
        }
        for k in (0..depth).rev() {
            for g in 0..self.layers[k].len() {
                if live[k][g] {
                    for w in &self.layers[k][g] {
                        if w.src.layer > 0 {
                            live[w.src.layer - 1][w.src.index] = true;
                        }
                    }
                }
            }
        }
        // New layer numbers skip layers with no live gate.
        let mut layer_map = vec![0usize; depth + 1];
        let mut next = 0;
        for k in 0..depth {
            if live[k].iter().any(|&b| b) {
                next += 1;
                layer_map[k + 1] = next;
            }
        }
        let mut index_map: Vec<Vec<usize>> = Vec::with_capacity(depth);
        for row in &live {
            let mut c = 0;
            index_map.push(
                row.iter()
                    .map(|&b| {
                        let v = c;
                        if b {
                            c += 1;
                        }
                        v
                    })
                    .collect(),
            );
        }
        let remap = |r: NodeRef| -> NodeRef {
            if r.layer == 0 {
                r
            } else {
                NodeRef::new(layer_map[r.layer], index_map[r.layer - 1][r.index])
            }
        };
        let mut layers: Vec<Vec<Gate>> = Vec::new();
        for k in 0..depth {
            let gates: Vec<Gate> = self.layers[k]
                .iter()
                .zip(&live[k])
                .filter(|(_, &l)| l)
                .map(|(g, _)| {
                    g.iter()
                        .map(|w| Wire {
                            src: remap(w.src),
                            coeff: w.coeff,
                        })
                        .collect()
                })
                .collect();
            if !gates.is_empty() {
                layers.push(gates);
            }
        }
        LinearCircuit {
            field: self.field,
            num_inputs: self.num_inputs,
            layers,
            outputs: self.outputs.iter().map(|&o| remap(o)).collect(),
        }
    }

    /// The wires that realize node `r` as a sum over earlier nodes.
    fn wires_of(&self, r: NodeRef) -> Gate {
        match self.gate(r) {
            Some(g) => g.clone(),
            None => vec![Wire { src: r, coeff: 1 }],
        }
    }

    /// Output `j` of the result is `Σ_i coeffs[i][j]·(output j of circuit i)`.
    ///
    /// Each member's output gates are folded into a single shared gate per
    /// output, placed on the deepest member's last layer.
    pub fn merge_outputs(
        circuits: &[LinearCircuit],
        coeffs: &[Vec<u64>],
    ) -> Result<LinearCircuit, CircuitError> {
        if circuits.len() < 2 {
            return Err(CircuitError::ShapeMismatch(
                "merge needs at least two circuits".into(),
            ));
        }
        let first = &circuits[0];
        let (field, n, m) = (first.field, first.num_inputs, first.num_outputs());
        if coeffs.len() != circuits.len() {
            return Err(CircuitError::ShapeMismatch(
                "one coefficient row per circuit".into(),
            ));
        }
        for (c, row) in circuits.iter().zip(coeffs) {
            if c.field != field {
                return Err(CircuitError::FieldMismatch);
            }
            if c.num_inputs != n || c.num_outputs() != m || row.len() != m {
                return Err(CircuitError::ShapeMismatch(
                    "members differ in input or output count".into(),
                ));
            }
            if row.iter().any(|&v| !field.contains(v)) {
                return Err(CircuitError::FieldMismatch);
            }
        }
        let depth = circuits
            .iter()
            .map(LinearCircuit::depth)
            .max()
            .unwrap_or(0)
            .max(1);
        // Gate offsets of each member within each combined layer.
        let mut layers: Vec<Vec<Gate>> = vec![Vec::new(); depth];
        let mut offsets: Vec<Vec<usize>> = Vec::with_capacity(circuits.len());
        for c in circuits {
            let offs: Vec<usize> = (0..depth).map(|k| layers[k].len()).collect();
            for (k, layer) in c.layers.iter().enumerate() {
                for gate in layer {
                    let g = gate
                        .iter()
                        .map(|w| Wire {
                            src: shift(w.src, &offs),
                            coeff: w.coeff,
                        })
                        .collect();
                    layers[k].push(g);
                }
            }
            offsets.push(offs);
        }
        let merged_start = layers[depth - 1].len();
        for j in 0..m {
            let mut wires = Vec::new();
            for (ci, c) in circuits.iter().enumerate() {
                let a = coeffs[ci][j];
                if a == 0 {
                    continue;
                }
                for w in c.wires_of(c.outputs[j]) {
                    wires.push(Wire {
                        src: shift(w.src, &offsets[ci]),
                        coeff: field.mul(a, w.coeff),
                    });
                }
            }
            layers[depth - 1].push(normalize_gate(field, wires));
        }
        let outputs = (0..m)
            .map(|j| NodeRef::new(depth, merged_start + j))
            .collect();
        let merged = LinearCircuit {
            field,
            num_inputs: n,
            layers,
            outputs,
        };
        Ok(merged.prune_dead_gates())
    }

    /// Function composition: the result computes `bottom(top(x))`.
    pub fn stack(
        top: &LinearCircuit,
        bottom: &LinearCircuit,
    ) -> Result<LinearCircuit, CircuitError> {
        if top.field != bottom.field {
            return Err(CircuitError::FieldMismatch);
        }
        if top.num_outputs() != bottom.num_inputs {
            return Err(CircuitError::ShapeMismatch(format!(
                "top has {} outputs, bottom has {} inputs",
                top.num_outputs(),
                bottom.num_inputs
            )));
        }
        let base = top.depth();
        let remap = |r: NodeRef| -> NodeRef {
            if r.layer == 0 {
                top.outputs[r.index]
            } else {
                NodeRef::new(r.layer + base, r.index)
            }
        };
        let mut layers = top.layers.clone();
        for layer in &bottom.layers {
            layers.push(
                layer
                    .iter()
                    .map(|g| {
                        g.iter()
                            .map(|w| Wire {
                                src: remap(w.src),
                                coeff: w.coeff,
                            })
                            .collect()
                    })
                    .collect(),
            );
        }
        Ok(LinearCircuit {
            field: top.field,
            num_inputs: top.num_inputs,
            layers,
            outputs: bottom.outputs.iter().map(|&o| remap(o)).collect(),
        })
    }

    /// Substitutes each last-layer gate through its penultimate-layer
    /// sources without changing the computed map. Depth drops by one, or
    /// more when pruning leaves whole layers dead.
    pub fn collapse_last_layer(&self) -> Result<LinearCircuit, CircuitError> {
        let depth = self.depth();
        if depth < 2 {
            return Err(CircuitError::DepthTooSmall(depth));
        }
        let f = self.field;
        let pen = depth - 1;
        let mut layers = self.layers[..depth - 1].to_vec();
        let start = layers[pen - 1].len();
        for gate in &self.layers[depth - 1] {
            let mut wires = Vec::new();
            for w in gate {
                if w.src.layer == pen {
                    for inner in &self.layers[pen - 1][w.src.index] {
                        wires.push(Wire {
                            src: inner.src,
                            coeff: f.mul(w.coeff, inner.coeff),
                        });
                    }
                } else {
                    wires.push(*w);
                }
            }
            layers[pen - 1].push(normalize_gate(f, wires));
        }
        let outputs = self
            .outputs
            .iter()
            .map(|&o| {
                if o.layer == depth {
                    NodeRef::new(pen, start + o.index)
                } else {
                    o
                }
            })
            .collect();
        let collapsed = LinearCircuit {
            field: f,
            num_inputs: self.num_inputs,
            layers,
            outputs,
        };
        Ok(collapsed.prune_dead_gates())
    }

    pub fn skeleton(&self) -> CircuitSkeleton {
        CircuitSkeleton {
            num_inputs: self.num_inputs,
            layers: self
                .layers
                .iter()
                .map(|l| {
                    l.iter()
                        .map(|g| g.iter().map(|w| w.src).collect())
                        .collect()
                })
                .collect(),
            outputs: self.outputs.clone(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph circuit {\n  rankdir=TB;\n");
        let _ = writeln!(s, "  subgraph layer0 {{\n    rank=same;");
        for i in 0..self.num_inputs {
            let _ = writeln!(s, "    n0_{i} [label=\"x{i}\", shape=box];");
        }
        s.push_str("  }\n");
        for (k, layer) in self.layers.iter().enumerate() {
            let _ = writeln!(s, "  subgraph layer{} {{\n    rank=same;", k + 1);
            for g in 0..layer.len() {
                let _ = writeln!(s, "    n{}_{g} [label=\"+\"];", k + 1);
            }
            s.push_str("  }\n");
        }
        for (k, layer) in self.layers.iter().enumerate() {
            for (g, gate) in layer.iter().enumerate() {
                for w in gate {
                    let _ = writeln!(
                        s,
                        "  n{}_{} -> n{}_{g} [label=\"{}\"];",
                        w.src.layer,
                        w.src.index,
                        k + 1,
                        w.coeff
                    );
                }
            }
        }
        for (j, o) in self.outputs.iter().enumerate() {
            let _ = writeln!(s, "  y{j} [label=\"y{j}\", shape=doublecircle];");
            let _ = writeln!(s, "  n{}_{} -> y{j} [style=dashed];", o.layer, o.index);
        }
        s.push_str("}\n");
        s
    }
}

fn shift(r: NodeRef, offsets: &[usize]) -> NodeRef {
    if r.layer == 0 {
        r
    } else {
        NodeRef::new(r.layer, r.index + offsets[r.layer - 1])
    }
}

/// Circuit wiring without coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitSkeleton {
    pub num_inputs: usize,
    /// `layers[k][g]` lists the sources of gate `g` on layer `k + 1`.
    pub layers: Vec<Vec<Vec<NodeRef>>>,
    pub outputs: Vec<NodeRef>,
}

impl CircuitSkeleton {
    pub fn wire_count(&self) -> usize {
        self.layers.iter().flatten().map(Vec::len).sum()
    }

    /// Draws an i.i.d. uniform coefficient for every wire; zero draws
    /// delete the wire.
    pub fn assign_with<R: Rng + ?Sized>(
        &self,
        field: Field,
        rng: &mut R,
    ) -> Result<LinearCircuit, CircuitError> {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                l.iter()
                    .map(|g| {
                        let wires = g.iter().map(|&src| Wire {
                            src,
                            coeff: rng.gen_range(0..field.order()),
                        });
                        normalize_gate(field, wires.collect::<Vec<_>>())
                    })
                    .collect()
            })
            .collect();
        LinearCircuit::new_uncanonical(field, self.num_inputs, layers, self.outputs.clone())
    }
}

pub fn assign_random_coefficients(
    s: &CircuitSkeleton,
    field: Field,
    seed: u64,
) -> Result<LinearCircuit, CircuitError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    s.assign_with(field, &mut rng)
}

#[derive(Serialize, Deserialize)]
struct CircuitRepr {
    field: Field,
    num_inputs: usize,
    layers: Vec<Vec<Vec<(usize, usize, u64)>>>,
    outputs: Vec<(usize, usize)>,
}

impl Serialize for LinearCircuit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CircuitRepr {
            field: self.field,
            num_inputs: self.num_inputs,
            layers: self
                .layers
                .iter()
                .map(|l| {
                    l.iter()
                        .map(|g| {
                            g.iter()
                                .map(|w| (w.src.layer, w.src.index, w.coeff))
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            outputs: self.outputs.iter().map(|o| (o.layer, o.index)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearCircuit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = CircuitRepr::deserialize(d)?;
        let layers = repr
            .layers
            .into_iter()
            .map(|l| {
                l.into_iter()
                    .map(|g| {
                        g.into_iter()
                            .map(|(layer, index, coeff)| Wire::new(layer, index, coeff))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let outputs = repr
            .outputs
            .into_iter()
            .map(|(l, i)| NodeRef::new(l, i))
            .collect();
        LinearCircuit::new_uncanonical(repr.field, repr.num_inputs, layers, outputs)
            .map_err(serde::de::Error::custom)
    }
}

/// Random layered circuit for property tests: each gate draws a random
/// subset of sources from all earlier layers.
pub fn random_circuit<R: Rng + ?Sized>(
    rng: &mut R,
    field: Field,
    num_inputs: usize,
    widths: &[usize],
    num_outputs: usize,
    wire_prob: f64,
) -> LinearCircuit {
    let mut layers: Vec<Vec<Gate>> = Vec::new();
    let mut prev_widths = vec![num_inputs];
    for &w in widths {
        let mut layer = Vec::with_capacity(w);
        for _ in 0..w {
            let mut seen = HashSet::new();
            let mut gate = Vec::new();
            for (l, &pw) in prev_widths.iter().enumerate() {
                for i in 0..pw {
                    if rng.gen_bool(wire_prob) && seen.insert((l, i)) {
                        let c = rng.gen_range(1..field.order());
                        gate.push(Wire::new(l, i, c));
                    }
                }
            }
            layer.push(gate);
        }
        prev_widths.push(w);
        layers.push(layer);
    }
    let depth = widths.len();
    let last = *widths.last().unwrap_or(&num_inputs);
    let outputs = (0..num_outputs)
        .map(|_| NodeRef::new(depth, rng.gen_range(0..last)))
        .collect();
    LinearCircuit::new(field, num_inputs, layers, outputs).expect("random circuit is well formed")
}
