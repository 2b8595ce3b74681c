//! Graph division: independent components, low-degree peeling, biconnected
//! blocks and Gomory-Hu cut removal, plus the matching reassembly.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::ghtree::{self, CutRecord, GomoryHuTree};
use crate::graph::{check_k, Color, Coloring, DecompositionGraph, EdgeKind, SubColoring, Vertex};

/// A connected piece of a larger graph. `graph` uses local ids; local `i`
/// is `vertices[i]` in the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub vertices: Vec<Vertex>,
    pub graph: DecompositionGraph,
}

/// Connected components of CE ∪ SE, ordered by smallest vertex.
pub fn independent_components(graph: &DecompositionGraph) -> Vec<Component> {
    let n = graph.vertex_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for inc in graph.incident(x) {
                if !seen[inc.to] {
                    seen[inc.to] = true;
                    members.push(inc.to);
                    stack.push(inc.to);
                }
            }
        }
        members.sort_unstable();
        let sub = graph.induced(&members);
        out.push(Component { vertices: members, graph: sub });
    }
    out
}

/// Which vertices may be set aside before coloring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeelRule {
    /// `d_conf < K` and `d_stit < 2`. Reinsertion never adds a conflict and
    /// adds at most one stitch edge's worth of cost.
    #[default]
    Strict,
    /// `d_conf + d_stit < K`.
    Literal,
}

impl PeelRule {
    pub fn admits(self, conf: usize, stit: usize, k: usize) -> bool {
        match self {
            PeelRule::Strict => conf < k && stit < 2,
            PeelRule::Literal => conf + stit < k,
        }
    }
}

impl std::str::FromStr for PeelRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(PeelRule::Strict),
            "literal" => Ok(PeelRule::Literal),
            _ => Err(Error::Parameter(format!("unknown peel rule '{s}' (strict|literal)"))),
        }
    }
}

/// A peeled vertex and its degrees in the reduced graph at removal time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeelEntry {
    pub vertex: Vertex,
    pub conflict_degree: usize,
    pub stitch_degree: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Peeled {
    /// Surviving vertices, ascending.
    pub remaining: Vec<Vertex>,
    /// Subgraph induced by `remaining`.
    pub reduced: DecompositionGraph,
    /// Removal order; reinsert from the back.
    pub stack: Vec<PeelEntry>,
}

/// Repeatedly remove vertices admitted by `rule`, tracking degrees in the
/// shrinking graph. Candidates are taken in ascending id order within each
/// wave so the stack is deterministic.
pub fn peel_low_degree(graph: &DecompositionGraph, k: usize, rule: PeelRule) -> Result<Peeled> {
    check_k(k)?;
    let n = graph.vertex_count();
    let mut deg: Vec<(usize, usize)> = (0..n).map(|v| graph.degrees_unchecked(v)).collect();
    let mut removed = vec![false; n];
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    for v in 0..n {
        if rule.admits(deg[v].0, deg[v].1, k) {
            queued[v] = true;
            queue.push_back(v);
        }
    }
    let mut stack = Vec::new();
    while let Some(v) = queue.pop_front() {
        removed[v] = true;
        stack.push(PeelEntry { vertex: v, conflict_degree: deg[v].0, stitch_degree: deg[v].1 });
        for inc in graph.incident(v) {
            let u = inc.to;
            if removed[u] {
                continue;
            }
            match inc.kind {
                EdgeKind::Conflict => deg[u].0 -= inc.weight as usize,
                EdgeKind::Stitch => deg[u].1 -= inc.weight as usize,
            }
            if !queued[u] && rule.admits(deg[u].0, deg[u].1, k) {
                queued[u] = true;
                queue.push_back(u);
            }
        }
    }
    let remaining: Vec<Vertex> = (0..n).filter(|&v| !removed[v]).collect();
    let reduced = graph.induced(&remaining);
    Ok(Peeled { remaining, reduced, stack })
}

/// Pop peeled vertices in LIFO order, giving each a color with no conflict
/// against colored neighbors and, among those, the fewest stitches. Ties
/// prefer the most common color among colored friendly neighbors, then the
/// smallest index.
/// Conflict weight and stitch weight `v` would pay under each color, counting
/// only colored neighbors.
fn neighbor_colors(
    graph: &DecompositionGraph,
    partial: &[Option<Color>],
    v: Vertex,
    conf: &mut [u64],
    stit: &mut [u64],
) {
    conf.iter_mut().for_each(|x| *x = 0);
    stit.iter_mut().for_each(|x| *x = 0);
    let mut stitch_total = 0u64;
    for inc in graph.incident(v) {
        if let Some(c) = partial[inc.to] {
            match inc.kind {
                EdgeKind::Conflict => conf[c as usize] += inc.weight as u64,
                EdgeKind::Stitch => {
                    stitch_total += inc.weight as u64;
                    stit[c as usize] += inc.weight as u64;
                }
            }
        }
    }
    stit.iter_mut().for_each(|x| *x = stitch_total - *x);
}

pub fn reinsert_peeled(
    graph: &DecompositionGraph,
    stack: &[PeelEntry],
    mut partial: Vec<Option<Color>>,
    k: usize,
) -> Result<Coloring> {
    check_k(k)?;
    if partial.len() != graph.vertex_count() {
        return Err(Error::Dimension { expected: graph.vertex_count(), actual: partial.len() });
    }
    let mut conf = vec![0u64; k];
    let mut stit = vec![0u64; k];
    let mut friendly = vec![0u64; k];
    for entry in stack.iter().rev() {
        let v = entry.vertex;
        neighbor_colors(graph, &partial, v, &mut conf, &mut stit);
        friendly.iter_mut().for_each(|x| *x = 0);
        for &f in graph.friends(v) {
            if let Some(c) = partial[f] {
                friendly[c as usize] += 1;
            }
        }
        let best = (0..k)
            .filter(|&c| conf[c] == 0)
            .min_by_key(|&c| (stit[c], std::cmp::Reverse(friendly[c]), c))
            .ok_or_else(|| Error::Internal(format!("no conflict-free color for peeled vertex {v}")))?;
        partial[v] = Some(best as Color);
    }
    // An early pick only saw part of its stitch neighbors; revisit with all
    // of them colored. Each move strictly lowers the stitch count.
    let mut changed = true;
    while changed {
        changed = false;
        for entry in stack.iter().rev() {
            let v = entry.vertex;
            let cur = partial[v].map_or(0, |c| c as usize);
            neighbor_colors(graph, &partial, v, &mut conf, &mut stit);
            if let Some(c) = (0..k).filter(|&c| conf[c] == 0 && stit[c] < stit[cur]).min_by_key(|&c| (stit[c], c)) {
                partial[v] = Some(c as Color);
                changed = true;
            }
        }
    }
    let colors = partial
        .into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| Error::Internal(format!("vertex {v} left uncolored"))))
        .collect::<Result<Vec<_>>>()?;
    Coloring::new(colors, k)
}

/// A cut vertex shared by two blocks. For a vertex in several blocks one
/// link is recorded from its first block to each other block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArticulationLink {
    pub vertex: Vertex,
    pub blocks: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSplit {
    /// Vertex sets of the biconnected blocks, each sorted; isolated
    /// vertices form singleton blocks.
    pub blocks: Vec<Vec<Vertex>>,
    pub links: Vec<ArticulationLink>,
}

/// Biconnected blocks of CE ∪ SE (iterative Tarjan). Parallel CE/SE edges
/// on one pair count as one adjacency.
pub fn biconnected_split(graph: &DecompositionGraph) -> BlockSplit {
    let n = graph.vertex_count();
    let mut nbrs: Vec<Vec<Vertex>> = (0..n).map(|v| graph.incident(v).iter().map(|i| i.to).collect()).collect();
    for list in &mut nbrs {
        list.sort_unstable();
        list.dedup();
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    let mut blocks: Vec<Vec<Vertex>> = Vec::new();
    let mut edge_stack: Vec<(Vertex, Vertex)> = Vec::new();

    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        if nbrs[root].is_empty() {
            blocks.push(vec![root]);
            continue;
        }
        // (vertex, parent, next neighbor index)
        let mut stack: Vec<(Vertex, Vertex, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (v, parent, ref mut idx)) = stack.last_mut() {
            if *idx < nbrs[v].len() {
                let w = nbrs[v][*idx];
                *idx += 1;
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    edge_stack.push((v, w));
                    stack.push((w, v, 0));
                } else if w != parent && disc[w] < disc[v] {
                    edge_stack.push((v, w));
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        let mut members = Vec::new();
                        while let Some((a, b)) = edge_stack.pop() {
                            members.push(a);
                            members.push(b);
                            if (a, b) == (p, v) {
                                break;
                            }
                        }
                        members.sort_unstable();
                        members.dedup();
                        blocks.push(members);
                    }
                }
            }
        }
    }
    blocks.sort();

    let mut first_block = vec![usize::MAX; n];
    let mut links = Vec::new();
    for (b, members) in blocks.iter().enumerate() {
        for &v in members {
            if first_block[v] == usize::MAX {
                first_block[v] = b;
            } else {
                links.push(ArticulationLink { vertex: v, blocks: (first_block[v], b) });
            }
        }
    }
    BlockSplit { blocks, links }
}

/// Rotate whole blocks so every articulation vertex gets one color. Blocks
/// are attached depth-first from the largest; each attaching block takes
/// the unique rotation matching its copy of the shared vertex.
pub fn merge_at_articulations(colorings: &[SubColoring], links: &[ArticulationLink], k: usize) -> Result<SubColoring> {
    check_k(k)?;
    let m = colorings.len();
    let mut adj: Vec<Vec<(usize, Vertex)>> = vec![Vec::new(); m];
    for l in links {
        let (a, b) = l.blocks;
        if a >= m || b >= m {
            return Err(Error::Parameter(format!("link references block {a} or {b} of {m}")));
        }
        adj[a].push((b, l.vertex));
        adj[b].push((a, l.vertex));
    }
    let mut max_v = 0;
    for c in colorings {
        if let Some(&v) = c.vertices.iter().max() {
            max_v = max_v.max(v + 1);
        }
    }
    let mut color: Vec<Option<Color>> = vec![None; max_v];
    let mut placed = vec![false; m];
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(colorings[i].len()), i));

    for &root in &order {
        if placed[root] {
            continue;
        }
        placed[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((b, rot)) = stack.pop() {
            for (v, c) in colorings[b].iter() {
                let rc = ((c as usize + rot) % k) as Color;
                match color[v] {
                    Some(existing) if existing != rc => {
                        return Err(Error::Internal(format!("articulation vertex {v} misaligned")));
                    }
                    _ => color[v] = Some(rc),
                }
            }
            for &(nb, v) in adj[b].iter().rev() {
                if placed[nb] {
                    continue;
                }
                placed[nb] = true;
                let fixed = color[v].ok_or_else(|| Error::Internal(format!("vertex {v} not in block {b}")))?;
                let local = colorings[nb]
                    .iter()
                    .find(|&(x, _)| x == v)
                    .map(|(_, c)| c)
                    .ok_or_else(|| Error::Internal(format!("vertex {v} not in block {nb}")))?;
                let shift = (fixed as usize + k - local as usize) % k;
                stack.push((nb, shift));
            }
        }
    }
    let vertices: Vec<Vertex> = (0..max_v).filter(|&v| color[v].is_some()).collect();
    let colors = vertices.iter().map(|&v| color[v].unwrap()).collect();
    Ok(SubColoring { vertices, colors })
}

/// Stage toggles for [`divide`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisionOptions {
    pub peel: bool,
    pub peel_rule: PeelRule,
    pub components: bool,
    pub bcc: bool,
    pub ghtree: bool,
    pub stitch_weight: f64,
    /// Blocks larger than this skip the cut tree (flagged in the plan).
    pub ghtree_max_vertices: usize,
}

impl Default for DivisionOptions {
    fn default() -> Self {
        DivisionOptions {
            peel: true,
            peel_rule: PeelRule::Strict,
            components: true,
            bcc: true,
            ghtree: true,
            stitch_weight: ghtree::DEFAULT_STITCH_WEIGHT,
            ghtree_max_vertices: 2000,
        }
    }
}

/// Smallest unit handed to a solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub vertices: Vec<Vertex>,
    pub graph: DecompositionGraph,
}

/// A biconnected block split into pieces along removed cut-tree edges.
/// Vertex ids in `cuts` are global; part indices are positions in `pieces`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPlan {
    pub vertices: Vec<Vertex>,
    pub pieces: Vec<usize>,
    pub cuts: Vec<CutRecord>,
    pub tree: Option<GomoryHuTree>,
    pub ghtree_skipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentPlan {
    pub vertices: Vec<Vertex>,
    pub blocks: Vec<BlockPlan>,
    /// Block indices are positions in `blocks`.
    pub articulation_links: Vec<ArticulationLink>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivisionPlan {
    pub vertex_count: usize,
    pub k: usize,
    pub peel_stack: Vec<PeelEntry>,
    pub components: Vec<ComponentPlan>,
    pub pieces: Vec<Piece>,
}

impl DivisionPlan {
    pub fn removed_cuts(&self) -> usize {
        self.components.iter().flat_map(|c| &c.blocks).map(|b| b.cuts.len()).sum()
    }

    pub fn ghtree_skipped(&self) -> bool {
        self.components.iter().flat_map(|c| &c.blocks).any(|b| b.ghtree_skipped)
    }

    /// `ghtree <u> <v> <weight>` lines for every built tree, external ids.
    pub fn dump_ghtrees(&self, ids: &[u64]) -> String {
        let mut out = String::new();
        for block in self.components.iter().flat_map(|c| &c.blocks) {
            if let Some(tree) = &block.tree {
                let block_ids: Vec<u64> = block.vertices.iter().map(|&v| ids[v]).collect();
                out.push_str(&tree.dump(&block_ids));
            }
        }
        out
    }
}

/// Split `graph` into pieces per `opts`. Every vertex lands in the peel
/// stack or in at least one piece (articulation vertices in several).
pub fn divide(graph: &DecompositionGraph, k: usize, opts: &DivisionOptions) -> Result<DivisionPlan> {
    check_k(k)?;
    let n = graph.vertex_count();
    let (core, peel_stack) = if opts.peel {
        let p = peel_low_degree(graph, k, opts.peel_rule)?;
        (p.remaining, p.stack)
    } else {
        ((0..n).collect::<Vec<_>>(), Vec::new())
    };
    let core_graph = graph.induced(&core);
    let comps: Vec<Component> = if opts.components {
        independent_components(&core_graph)
    } else {
        vec![Component { vertices: (0..core.len()).collect(), graph: core_graph.clone() }]
    };

    let mut plan = DivisionPlan { vertex_count: n, k, peel_stack, components: Vec::new(), pieces: Vec::new() };
    for comp in comps {
        let comp_global: Vec<Vertex> = comp.vertices.iter().map(|&v| core[v]).collect();
        let split = if opts.bcc && opts.components {
            biconnected_split(&comp.graph)
        } else {
            BlockSplit { blocks: vec![(0..comp_global.len()).collect()], links: Vec::new() }
        };
        let mut blocks = Vec::new();
        for block_local in &split.blocks {
            let block_global: Vec<Vertex> = block_local.iter().map(|&v| comp_global[v]).collect();
            let block_graph = graph.induced(&block_global);
            blocks.push(plan_block(block_global, block_graph, k, opts, &mut plan.pieces)?);
        }
        let links =
            split.links.iter().map(|l| ArticulationLink { vertex: comp_global[l.vertex], blocks: l.blocks }).collect();
        plan.components.push(ComponentPlan { vertices: comp_global, blocks, articulation_links: links });
    }
    Ok(plan)
}

fn plan_block(
    vertices: Vec<Vertex>,
    graph: DecompositionGraph,
    k: usize,
    opts: &DivisionOptions,
    pieces: &mut Vec<Piece>,
) -> Result<BlockPlan> {
    let whole = |vertices: Vec<Vertex>, graph: DecompositionGraph, pieces: &mut Vec<Piece>, skipped: bool| {
        pieces.push(Piece { vertices: vertices.clone(), graph });
        BlockPlan { vertices, pieces: vec![pieces.len() - 1], cuts: Vec::new(), tree: None, ghtree_skipped: skipped }
    };
    let connected = opts.components;
    if !opts.ghtree || !connected || vertices.len() < 2 {
        return Ok(whole(vertices, graph, pieces, false));
    }
    if vertices.len() > opts.ghtree_max_vertices {
        return Ok(whole(vertices, graph, pieces, true));
    }
    let net = ghtree::weighted_network(&graph, opts.stitch_weight)?;
    let tree = ghtree::build_gomory_hu(&net)?;
    let rounded = ghtree::refine_and_round(&tree);
    let partition = ghtree::remove_kcuts(&rounded, &graph, k)?;
    let base = pieces.len();
    let mut ids = Vec::new();
    for (i, part) in partition.parts.iter().enumerate() {
        let global: Vec<Vertex> = part.iter().map(|&v| vertices[v]).collect();
        pieces.push(Piece { vertices: global, graph: graph.induced(part) });
        ids.push(base + i);
    }
    let cuts = partition
        .cuts
        .into_iter()
        .map(|mut c| {
            c.tree_edge.u = vertices[c.tree_edge.u];
            c.tree_edge.v = vertices[c.tree_edge.v];
            for e in &mut c.crossing {
                e.u = vertices[e.u];
                e.v = vertices[e.v];
            }
            c
        })
        .collect();
    Ok(BlockPlan { vertices, pieces: ids, cuts, tree: Some(tree), ghtree_skipped: false })
}

/// Rebuild a total coloring from per-piece colorings (local ids, one per
/// entry of `plan.pieces`): cut rotations, articulation alignment, then
/// peel reinsertion.
pub fn assemble(plan: &DivisionPlan, graph: &DecompositionGraph, piece_colorings: &[Coloring]) -> Result<Coloring> {
    if piece_colorings.len() != plan.pieces.len() {
        return Err(Error::Dimension { expected: plan.pieces.len(), actual: piece_colorings.len() });
    }
    let k = plan.k;
    let mut partial: Vec<Option<Color>> = vec![None; plan.vertex_count];
    for comp in &plan.components {
        let mut block_colorings = Vec::with_capacity(comp.blocks.len());
        for block in &comp.blocks {
            let parts: Vec<SubColoring> = block
                .pieces
                .iter()
                .map(|&p| SubColoring::new(plan.pieces[p].vertices.clone(), &piece_colorings[p]))
                .collect();
            let merged = if parts.len() == 1 {
                parts.into_iter().next().unwrap()
            } else {
                ghtree::merge_with_rotation(&parts, &block.cuts, k)?.merged
            };
            block_colorings.push(merged);
        }
        let merged = merge_at_articulations(&block_colorings, &comp.articulation_links, k)?;
        for (v, c) in merged.iter() {
            partial[v] = Some(c);
        }
    }
    reinsert_peeled(graph, &plan.peel_stack, partial, k)
}
