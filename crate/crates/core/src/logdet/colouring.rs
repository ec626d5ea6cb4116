use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::operators::{LinearOperator, SparseOperator};

/// Partition of `0..n` into colour classes such that two indices in the same
/// class are more than `power` edges apart in the graph of `Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColouredProbeSet {
    colours: Vec<usize>,
    classes: Vec<Vec<usize>>,
    power: usize,
}

impl ColouredProbeSet {
    /// One class holding every index; the coloured estimator then coincides
    /// with plain Hutchinson.
    pub fn single(n: usize) -> Self {
        ColouredProbeSet {
            colours: vec![0; n],
            classes: vec![(0..n).collect()],
            power: 0,
        }
    }

    /// Builds from explicit colour ids, which must be `0..k` with every id used.
    pub fn from_colours(colours: Vec<usize>, power: usize) -> Result<Self> {
        let k = colours.iter().max().map_or(0, |m| m + 1);
        let mut classes = vec![Vec::new(); k];
        for (i, &c) in colours.iter().enumerate() {
            classes[c].push(i);
        }
        if classes.iter().any(|c| c.is_empty()) {
            return Err(Error::InvalidArgument("colour ids must be contiguous".into()));
        }
        Ok(ColouredProbeSet {
            colours,
            classes,
            power,
        })
    }

    pub fn dim(&self) -> usize {
        self.colours.len()
    }

    pub fn colours(&self) -> &[usize] {
        &self.colours
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn num_colours(&self) -> usize {
        self.classes.len()
    }

    pub fn power(&self) -> usize {
        self.power
    }
}

/// Vertices within `depth` edges of `source` in the graph of `q`, with their
/// distances, in BFS order (the source first).
pub fn neighbourhood(q: &SparseOperator, source: usize, depth: usize) -> Vec<(usize, usize)> {
    let mut seen = std::collections::HashMap::new();
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    seen.insert(source, 0usize);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let d = seen[&v];
        out.push((v, d));
        if d == depth {
            continue;
        }
        for &w in q.row_pattern(v) {
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(w) {
                e.insert(d + 1);
                queue.push_back(w);
            }
        }
    }
    out
}

/// Graph distance between `i` and `j` (`None` if disconnected).
pub fn graph_distance(q: &SparseOperator, i: usize, j: usize) -> Option<usize> {
    all_distances_from(q, i)[j]
}

/// Distances from `source` to every vertex.
pub fn all_distances_from(q: &SparseOperator, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; q.dim()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        for &w in q.row_pattern(v) {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Greedy colouring, in natural vertex order with the smallest free colour,
/// of the graph joining vertices at distance `1..=p` in the graph of `q`
/// (the sparsity graph of `Q^p`).
pub fn colour_graph(q: &SparseOperator, p: usize) -> Result<ColouredProbeSet> {
    if p == 0 {
        return Err(Error::InvalidArgument("colouring power must be at least 1".into()));
    }
    let n = q.dim();
    const NONE: usize = usize::MAX;
    let mut colours = vec![NONE; n];
    let mut forbidden: Vec<usize> = Vec::new();
    for v in 0..n {
        for (w, _) in neighbourhood(q, v, p) {
            let c = colours[w];
            if w != v && c != NONE {
                if c >= forbidden.len() {
                    forbidden.resize(c + 1, NONE);
                }
                forbidden[c] = v;
            }
        }
        let c = (0..).find(|&c| forbidden.get(c).is_none_or(|&m| m != v)).unwrap();
        colours[v] = c;
    }
    ColouredProbeSet::from_colours(colours, p)
}
