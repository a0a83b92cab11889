//! NOR constraint networks.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Variables `X_i` with constraints `X_i = NOR(inputs_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BooleanNetwork {
    pub variables: Vec<String>,
    /// `inputs[i]` are the variable indices feeding `X_i`'s gate.
    pub inputs: Vec<Vec<usize>>,
}

impl BooleanNetwork {
    pub fn new(variables: Vec<String>, inputs: Vec<Vec<usize>>) -> Result<Self> {
        if variables.len() != inputs.len() {
            return Err(Error::InvalidArgument("every variable needs exactly one constraint".into()));
        }
        for (i, ins) in inputs.iter().enumerate() {
            if let Some(&bad) = ins.iter().find(|&&j| j >= variables.len()) {
                return Err(Error::InvalidArgument(format!("constraint {i} references unknown variable {bad}")));
            }
        }
        Ok(BooleanNetwork { variables, inputs })
    }

    /// Parses lines `X = NOR(A, B, ...)` or `X = NOT(A)`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut outputs: Vec<(usize, String, Vec<String>)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("line {}: {msg}: '{line}'", lineno + 1));
            let (lhs, rhs) = line.split_once('=').ok_or_else(|| err("expected 'X = NOR(...)'"))?;
            let name = lhs.trim();
            if !is_identifier(name) {
                return Err(err("variable names must be alphanumeric"));
            }
            let rhs = rhs.trim();
            let open = rhs.find('(').ok_or_else(|| err("missing '('"))?;
            if !rhs.ends_with(')') {
                return Err(err("missing ')'"));
            }
            let op = rhs[..open].trim().to_ascii_uppercase();
            let args: Vec<String> = rhs[open + 1..rhs.len() - 1]
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if let Some(bad) = args.iter().find(|a| !is_identifier(a)) {
                return Err(err(&format!("bad input name '{bad}'")));
            }
            match op.as_str() {
                "NOR" => {}
                "NOT" if args.len() == 1 => {}
                "NOT" => return Err(err("NOT takes exactly one input")),
                _ => return Err(err(&format!("unknown gate '{op}'"))),
            }
            if outputs.iter().any(|(_, n, _)| n == name) {
                return Err(err(&format!("variable '{name}' has two constraints")));
            }
            outputs.push((lineno + 1, name.to_string(), args));
        }
        let index: BTreeMap<&str, usize> = outputs.iter().enumerate().map(|(i, (_, n, _))| (n.as_str(), i)).collect();
        let mut inputs = Vec::with_capacity(outputs.len());
        for (lineno, _, args) in &outputs {
            let mut ins = Vec::with_capacity(args.len());
            for a in args {
                let j = index
                    .get(a.as_str())
                    .ok_or_else(|| Error::Parse(format!("line {lineno}: '{a}' has no constraint of its own")))?;
                ins.push(*j);
            }
            inputs.push(ins);
        }
        Self::new(outputs.into_iter().map(|(_, n, _)| n).collect(), inputs)
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// Variables in dependency order, or `None` when there is a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indegree: Vec<usize> = self.inputs.iter().map(Vec::len).collect();
        let mut order: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut head = 0;
        while head < order.len() {
            let done = order[head];
            head += 1;
            for (i, ins) in self.inputs.iter().enumerate() {
                for _ in ins.iter().filter(|&&j| j == done) {
                    indegree[i] -= 1;
                    if indegree[i] == 0 {
                        order.push(i);
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// The unique assignment of an acyclic network.
    pub fn evaluate(&self) -> Option<Vec<bool>> {
        let order = self.topological_order()?;
        let mut val = vec![false; self.len()];
        for i in order {
            val[i] = !self.inputs[i].iter().any(|&j| val[j]);
        }
        Some(val)
    }

    pub fn satisfies(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.len()
            && self
                .inputs
                .iter()
                .enumerate()
                .all(|(i, ins)| assignment[i] == !ins.iter().any(|&j| assignment[j]))
    }

    /// Every satisfying assignment, by enumeration (small networks only).
    pub fn satisfying_assignments(&self) -> Vec<Vec<bool>> {
        assert!(self.len() <= 20, "enumeration limited to 20 variables");
        (0u32..(1 << self.len()))
            .map(|bits| (0..self.len()).map(|i| bits >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|a| self.satisfies(a))
            .collect()
    }

    /// `X_i = NOT(X_{i+1})` around a cycle of length `n`.
    pub fn not_cycle(n: usize) -> Self {
        BooleanNetwork {
            variables: (1..=n).map(|i| format!("X{i}")).collect(),
            inputs: (0..n).map(|i| vec![(i + 1) % n]).collect(),
        }
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_NOR: &str = "X = NOR(Y, Z)\nY = NOR(Z, X)\nZ = NOR(X, Y)\n";

    #[test]
    fn parse_three_nor() {
        let net = BooleanNetwork::parse(THREE_NOR).unwrap();
        assert_eq!(net.variables, vec!["X", "Y", "Z"]);
        assert_eq!(net.inputs, vec![vec![1, 2], vec![2, 0], vec![0, 1]]);
        assert!(!net.is_acyclic());
        let sat = net.satisfying_assignments();
        assert_eq!(sat.len(), 3);
        assert!(sat.iter().all(|a| a.iter().filter(|&&x| x).count() == 1));
    }

    #[test]
    fn not_cycle_unsatisfiable() {
        let net = BooleanNetwork::parse("X = NOT(Y)\nY = NOT(Z)\nZ = NOT(X)").unwrap();
        assert!(net.satisfying_assignments().is_empty());
        assert_eq!(net, BooleanNetwork { variables: vec!["X".into(), "Y".into(), "Z".into()], inputs: vec![vec![1], vec![2], vec![0]] });
    }

    #[test]
    fn acyclic_evaluation() {
        let net = BooleanNetwork::parse("A = NOR()\nB = NOT(A)\nC = NOR(A, B)").unwrap();
        assert_eq!(net.evaluate(), Some(vec![true, false, false]));
        let net = BooleanNetwork::parse("C = NOR(B)\nB = NOR(A)\nA = NOR()").unwrap();
        assert_eq!(net.evaluate(), Some(vec![true, false, true]));
    }

    #[test]
    fn parse_errors() {
        assert!(BooleanNetwork::parse("X = AND(Y)\nY = NOR()").is_err());
        assert!(BooleanNetwork::parse("X = NOR(Q)").unwrap_err().to_string().contains("'Q'"));
        assert!(BooleanNetwork::parse("X = NOT(A, B)\nA = NOR()\nB = NOR()").is_err());
        assert!(BooleanNetwork::parse("X = NOR()\nX = NOR()").is_err());
        assert!(BooleanNetwork::parse("X-1 = NOR()").is_err());
        assert!(BooleanNetwork::parse("").unwrap().is_empty());
    }
}
