//! Connected labelled graphs on a handful of vertices.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Largest vertex count handled by brute-force enumeration.
pub const MAX_VERTICES: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEnumeration {
    pub n: usize,
    /// Vertex pairs `(i, j)` with `i < j`, in the order used by the masks.
    pub pairs: Vec<(usize, usize)>,
    /// Edge subsets of the complete graph that are connected, as bit masks
    /// over `pairs`.
    pub graphs: Vec<u32>,
}

impl GraphEnumeration {
    pub fn count(&self) -> usize {
        self.graphs.len()
    }

    pub fn edges(&self, mask: u32) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs
            .iter()
            .enumerate()
            .filter(move |(k, _)| mask >> k & 1 == 1)
            .map(|(_, &p)| p)
    }
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

fn connected(n: usize, pairs: &[(usize, usize)], mask: u32) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    let mut components = n;
    for (k, &(i, j)) in pairs.iter().enumerate() {
        if mask >> k & 1 == 1 {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
                components -= 1;
            }
        }
    }
    components == 1
}

/// All connected graphs on vertices `0..n`, found by testing every edge
/// subset.
pub fn enumerate_connected_graphs(n: usize) -> Result<GraphEnumeration> {
    if !(2..=MAX_VERTICES).contains(&n) {
        return domain(format!(
            "graph enumeration supports 2..={MAX_VERTICES} vertices, got {n}"
        ));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let graphs = (0..1u32 << pairs.len())
        .filter(|&m| connected(n, &pairs, m))
        .collect();
    Ok(GraphEnumeration { n, pairs, graphs })
}
