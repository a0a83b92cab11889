//! Repressilator instances built from repression digraphs.
//!
//! An edge `a -> b` becomes one item that `b` usually wins with `a` setting
//! the price, so raising `m_a` lowers `U_b`.

use crate::error::{Error, Result};
use crate::market::{ItemSpec, MarketInstance, ValueSpec};

pub const DEFAULT_SHARPNESS: u32 = 7;

/// Nodes are 1-based in graphs and edge lists; bidder `k` is node `k + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepressionGraph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub sharpness: u32,
}

impl RepressionGraph {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>, sharpness: u32) -> Result<Self> {
        let g = RepressionGraph { nodes, edges, sharpness };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        if self.sharpness < 1 {
            return Err(Error::InvalidArgument("sharpness c must be at least 1".into()));
        }
        for &(a, b) in &self.edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on node {a}")));
            }
            if a < 1 || b < 1 || a > self.nodes || b > self.nodes {
                return Err(Error::InvalidArgument(format!(
                    "edge {a} -> {b} is outside nodes 1..={}",
                    self.nodes
                )));
            }
        }
        Ok(())
    }

    /// The directed cycle `1 -> 2 -> ... -> n -> 1`.
    pub fn cycle(n: usize, sharpness: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("a cycle needs at least 2 nodes, got {n}")));
        }
        Self::new(n, (1..=n).map(|i| (i, i % n + 1)).collect(), sharpness)
    }

    /// Parses `a b` lines (1-based; `#` starts a comment). The node count is the largest label.
    pub fn parse_edge_list(text: &str, sharpness: u32) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {}: '{s}' is not a node label", lineno + 1)))
            };
            if nums.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected 'a b', got '{line}'", lineno + 1)));
            }
            edges.push((parse(nums[0])?, parse(nums[1])?));
        }
        let nodes = edges.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
        Self::new(nodes, edges, sharpness)
    }
}

/// `a` values Beta(c, 2c), `b` values Beta(2c, c); bidders are 0-based here.
pub fn build_edge_item(a: usize, b: usize, c: u32) -> Result<ItemSpec> {
    if a == b {
        return Err(Error::InvalidArgument(format!("self-loop on bidder {a}")));
    }
    if c < 1 {
        return Err(Error::InvalidArgument("sharpness c must be at least 1".into()));
    }
    Ok(ItemSpec::new([
        (a, ValueSpec::Beta { a: c, b: 2 * c, scale: 1.0 }),
        (b, ValueSpec::Beta { a: 2 * c, b: c, scale: 1.0 }),
    ]))
}

pub fn build_repressilator(g: &RepressionGraph) -> Result<MarketInstance> {
    g.check()?;
    let items = g
        .edges
        .iter()
        .map(|&(a, b)| build_edge_item(a - 1, b - 1, g.sharpness))
        .collect::<Result<Vec<_>>>()?;
    Ok(MarketInstance::numbered(g.nodes, items, 1.0))
}

pub fn build_cycle(n: usize, c: u32) -> Result<MarketInstance> {
    build_repressilator(&RepressionGraph::cycle(n, c)?)
}

/// Several repressilator groups (each a list of 1-based nodes forming a
/// directed cycle in list order) plus extra repression edges between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingSpec {
    pub groups: Vec<Vec<usize>>,
    pub inter: Vec<(usize, usize)>,
}

impl CouplingSpec {
    /// Three 3-cycles 1->2->3, 4->5->6, 9->7->8 with edges 3->4, 5->7, 8->5.
    pub fn preset_a() -> Self {
        CouplingSpec {
            groups: vec![vec![1, 2, 3], vec![4, 5, 6], vec![9, 7, 8]],
            inter: vec![(3, 4), (5, 7), (8, 5)],
        }
    }

    /// Same groups with edges 3->4, 5->7, 8->4.
    pub fn preset_b() -> Self {
        CouplingSpec {
            groups: vec![vec![1, 2, 3], vec![4, 5, 6], vec![9, 7, 8]],
            inter: vec![(3, 4), (5, 7), (8, 4)],
        }
    }

    /// Two 3-cycles joined by the single edge 3->4.
    pub fn two_cycles() -> Self {
        CouplingSpec {
            groups: vec![vec![1, 2, 3], vec![4, 5, 6]],
            inter: vec![(3, 4)],
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "coupling-A" | "A" | "a" => Ok(Self::preset_a()),
            "coupling-B" | "B" | "b" => Ok(Self::preset_b()),
            "two-cycles" => Ok(Self::two_cycles()),
            other => Err(Error::InvalidArgument(format!(
                "unknown coupling preset '{other}' (expected coupling-A, coupling-B or two-cycles)"
            ))),
        }
    }

    pub fn graph(&self, sharpness: u32) -> Result<RepressionGraph> {
        let mut edges = Vec::new();
        for g in &self.groups {
            if g.len() < 2 {
                return Err(Error::InvalidArgument("each group needs at least 2 nodes".into()));
            }
            for k in 0..g.len() {
                edges.push((g[k], g[(k + 1) % g.len()]));
            }
        }
        edges.extend(self.inter.iter().copied());
        let nodes = edges.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
        RepressionGraph::new(nodes, edges, sharpness)
    }
}

pub fn build_coupled(spec: &CouplingSpec, c: u32) -> Result<MarketInstance> {
    build_repressilator(&spec.graph(c)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_item_shapes() {
        let it = build_edge_item(0, 1, 7).unwrap();
        assert_eq!(it.values[&0], ValueSpec::Beta { a: 7, b: 14, scale: 1.0 });
        assert_eq!(it.values[&1], ValueSpec::Beta { a: 14, b: 7, scale: 1.0 });
        assert!((it.values[&0].mean() - 1.0 / 3.0).abs() < 1e-15);
        assert!((it.values[&1].mean() - 2.0 / 3.0).abs() < 1e-15);
        let it = build_edge_item(0, 1, 1).unwrap();
        assert_eq!(it.values[&0], ValueSpec::Beta { a: 1, b: 2, scale: 1.0 });
        assert!(build_edge_item(2, 2, 7).is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(build_cycle(2, 7).unwrap().items.len(), 2);
        let c4 = build_cycle(4, 7).unwrap();
        assert_eq!((c4.n_bidders(), c4.items.len()), (4, 4));
        let c5 = build_cycle(5, 7).unwrap();
        assert_eq!((c5.n_bidders(), c5.items.len()), (5, 5));
        let a = build_coupled(&CouplingSpec::preset_a(), 7).unwrap();
        assert_eq!((a.n_bidders(), a.items.len()), (9, 12));
        let b = build_coupled(&CouplingSpec::preset_b(), 7).unwrap();
        assert_eq!((b.n_bidders(), b.items.len()), (9, 12));
        assert!(build_cycle(1, 7).is_err());
        let empty = build_repressilator(&RepressionGraph::new(3, vec![], 7).unwrap()).unwrap();
        assert_eq!((empty.n_bidders(), empty.items.len()), (3, 0));
    }

    #[test]
    fn three_cycle_pattern() {
        // Bidder k wins the item on edge (k-1 -> k) with the high-mean value.
        let inst = build_cycle(3, 2).unwrap();
        for (j, it) in inst.items.iter().enumerate() {
            let winner = (j + 1) % 3;
            assert_eq!(it.values[&winner], ValueSpec::Beta { a: 4, b: 2, scale: 1.0 });
            assert_eq!(it.values[&j], ValueSpec::Beta { a: 2, b: 4, scale: 1.0 });
            assert_eq!(it.values.len(), 2);
        }
    }

    #[test]
    fn edge_list_parsing() {
        let g = RepressionGraph::parse_edge_list("# cycle\n1 2\n2 3\n3 1\n", 7).unwrap();
        assert_eq!(g.nodes, 3);
        assert_eq!(g.edges, vec![(1, 2), (2, 3), (3, 1)]);
        assert!(RepressionGraph::parse_edge_list("1 1\n", 7).is_err());
        let err = RepressionGraph::parse_edge_list("1 2\nx 3\n", 7).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn built_instances_validate() {
        for inst in [
            build_cycle(2, 7).unwrap(),
            build_cycle(3, 7).unwrap(),
            build_coupled(&CouplingSpec::preset_a(), 7).unwrap(),
            build_coupled(&CouplingSpec::two_cycles(), 7).unwrap(),
        ] {
            assert!(inst.validate().is_empty());
        }
    }
}
