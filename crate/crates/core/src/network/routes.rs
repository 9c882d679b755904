use std::collections::HashMap;

use super::{Route, Topology};
use crate::{Error, Result};

/// All simple paths between two processors, as link-index sequences sorted
/// lexicographically. Paths may pass through switches and other processors
/// but never visit a node twice.
pub fn enumerate_routes(topology: &Topology, src: usize, dst: usize) -> Result<Vec<Route>> {
    let p = topology.processors.len();
    if src >= p || dst >= p {
        return Err(Error::Parameter(format!(
            "processor index out of range ({src}, {dst})"
        )));
    }
    if src == dst {
        return Err(Error::Parameter("route endpoints must differ".into()));
    }

    let mut node_index: HashMap<&str, usize> = HashMap::new();
    for (i, id) in topology
        .processors
        .iter()
        .map(|x| &x.id)
        .chain(topology.switches.iter().map(|s| &s.id))
        .enumerate()
    {
        node_index.insert(id.as_str(), i);
    }
    let node_count = node_index.len();
    // adjacency: node -> (link, other end)
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); node_count];
    for (li, link) in topology.links.iter().enumerate() {
        let (Some(&a), Some(&b)) = (
            node_index.get(link.a.as_str()),
            node_index.get(link.b.as_str()),
        ) else {
            return Err(Error::InvalidTopology(format!(
                "link `{}` has an unknown endpoint",
                link.id
            )));
        };
        adj[a].push((li, b));
        adj[b].push((li, a));
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    let mut found = Vec::new();
    let mut on_path = vec![false; node_count];
    let mut path = Vec::new();
    on_path[src] = true;
    dfs(&adj, src, dst, &mut on_path, &mut path, &mut found);
    if found.is_empty() {
        return Err(Error::NoRoute {
            src: topology.processors[src].id.clone(),
            dst: topology.processors[dst].id.clone(),
        });
    }
    found.sort();
    Ok(found)
}

fn dfs(
    adj: &[Vec<(usize, usize)>],
    at: usize,
    dst: usize,
    on_path: &mut [bool],
    path: &mut Vec<usize>,
    found: &mut Vec<Route>,
) {
    if at == dst {
        found.push(path.clone());
        return;
    }
    for &(link, next) in &adj[at] {
        if on_path[next] {
            continue;
        }
        on_path[next] = true;
        path.push(link);
        dfs(adj, next, dst, on_path, path, found);
        path.pop();
        on_path[next] = false;
    }
}
