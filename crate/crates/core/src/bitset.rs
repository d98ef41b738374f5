//! Fixed-width bitsets over `0..len`, used for adjacency rows and candidate
//! sets in the exact searches.

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = BitSet::new(len);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        if len % 64 != 0 {
            if let Some(last) = s.words.last_mut() {
                *last = (1u64 << (len % 64)) - 1;
            }
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn and(&self, other: &BitSet) -> BitSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn and_count(&self, other: &BitSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Clears every index below `i`.
    pub fn clear_below(&mut self, i: usize) {
        let w = i / 64;
        for x in self.words.iter_mut().take(w) {
            *x = 0;
        }
        if w < self.words.len() && i % 64 != 0 {
            self.words[w] &= !((1u64 << (i % 64)) - 1);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }
}

impl FromIterator<usize> for BitSet {
    /// Builds a set sized to fit the largest index; prefer [`BitSet::new`]
    /// plus inserts when the width matters.
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let items: Vec<usize> = iter.into_iter().collect();
        let len = items.iter().max().map_or(0, |m| m + 1);
        let mut s = BitSet::new(len);
        for i in items {
            s.insert(i);
        }
        s
    }
}

/// Greedy sequential colouring of `cand` restricted to `adj`.
///
/// Returns vertices in colour order with their colour numbers (1-based,
/// nondecreasing). Any clique inside `cand` has at most as many members as
/// the colour number of its last vertex.
pub fn colour_sort(cand: &BitSet, adj: &[BitSet]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(cand.count());
    let mut rest = cand.clone();
    let mut colour = 0;
    while !rest.is_empty() {
        colour += 1;
        let mut avail = rest.clone();
        while let Some(v) = avail.first() {
            avail.remove(v);
            avail.difference_with(&adj[v]);
            rest.remove(v);
            out.push((v, colour));
        }
    }
    out
}

/// Outcome of [`max_clique`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueResult {
    pub clique: Vec<usize>,
    pub nodes: u64,
    pub complete: bool,
}

/// Exact maximum clique by colour-bounded branch and bound, deterministic.
/// Stops after `node_cap` nodes with `complete = false`.
pub fn max_clique(adj: &[BitSet], node_cap: Option<u64>) -> CliqueResult {
    let n = adj.len();
    let mut best = Vec::new();
    let mut cur = Vec::new();
    let mut nodes = 0u64;
    let mut complete = true;
    fn rec(
        adj: &[BitSet],
        cand: BitSet,
        cur: &mut Vec<usize>,
        best: &mut Vec<usize>,
        nodes: &mut u64,
        cap: Option<u64>,
        complete: &mut bool,
    ) {
        *nodes += 1;
        if cap.is_some_and(|c| *nodes > c) {
            *complete = false;
            return;
        }
        let order = colour_sort(&cand, adj);
        let mut cand = cand;
        for &(v, colour) in order.iter().rev() {
            if cur.len() + colour <= best.len() {
                return;
            }
            cur.push(v);
            let next = cand.and(&adj[v]);
            if next.is_empty() {
                if cur.len() > best.len() {
                    *best = cur.clone();
                }
            } else {
                rec(adj, next, cur, best, nodes, cap, complete);
            }
            cur.pop();
            cand.remove(v);
            if !*complete {
                return;
            }
        }
    }
    if n > 0 {
        rec(adj, BitSet::full(n), &mut cur, &mut best, &mut nodes, node_cap, &mut complete);
    }
    best.sort_unstable();
    CliqueResult {
        clique: best,
        nodes,
        complete,
    }
}

/// The clique of size `size` that is lexicographically first as a sorted
/// index tuple, if one exists.
pub fn first_clique_of_size(adj: &[BitSet], size: usize) -> Option<Vec<usize>> {
    first_clique_within(adj, &BitSet::full(adj.len()), size)
}

/// As [`first_clique_of_size`], restricted to vertices in `cand`.
pub fn first_clique_within(adj: &[BitSet], cand: &BitSet, size: usize) -> Option<Vec<usize>> {
    fn rec(adj: &[BitSet], cand: &BitSet, cur: &mut Vec<usize>, size: usize) -> bool {
        if cur.len() == size {
            return true;
        }
        if cur.len() + cand.count() < size {
            return false;
        }
        let need = size - cur.len();
        if need > 1 {
            let colours = colour_sort(cand, adj).last().map_or(0, |&(_, c)| c);
            if colours < need {
                return false;
            }
        }
        for v in cand.iter() {
            let mut next = cand.and(&adj[v]);
            next.clear_below(v + 1);
            cur.push(v);
            if rec(adj, &next, cur, size) {
                return true;
            }
            cur.pop();
        }
        false
    }
    let mut cur = Vec::new();
    if size == 0 {
        return Some(cur);
    }
    rec(adj, cand, &mut cur, size).then_some(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Vec<BitSet> {
        let mut adj = vec![BitSet::new(n); n];
        for &(a, b) in edges {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        adj
    }

    #[test]
    fn basic_ops() {
        let mut s = BitSet::new(130);
        for i in [0, 63, 64, 129] {
            s.insert(i);
        }
        assert_eq!(s.count(), 4);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        s.clear_below(64);
        assert_eq!(s.first(), Some(64));
        assert_eq!(BitSet::full(130).count(), 130);
        assert_eq!(BitSet::full(64).count(), 64);
        s.remove(64);
        assert!(s.contains(129) && !s.contains(64));
    }

    #[test]
    fn clique_on_small_graphs() {
        // Two triangles sharing vertex 2, plus a K4 on 3..7.
        let adj = graph(
            7,
            &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (3, 5), (3, 6), (4, 5), (4, 6), (5, 6)],
        );
        let r = max_clique(&adj, None);
        assert!(r.complete);
        assert_eq!(r.clique, vec![3, 4, 5, 6]);
        assert_eq!(first_clique_of_size(&adj, 3), Some(vec![0, 1, 2]));
        assert_eq!(first_clique_of_size(&adj, 5), None);
        assert_eq!(max_clique(&[], None).clique, Vec::<usize>::new());
    }

    #[test]
    fn clique_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..12);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.5) {
                        edges.push((a, b));
                    }
                }
            }
            let adj = graph(n, &edges);
            let mut best = 0;
            for mask in 0u32..1 << n {
                let vs: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let ok = vs.iter().all(|&a| vs.iter().all(|&b| a == b || adj[a].contains(b)));
                if ok {
                    best = best.max(vs.len());
                }
            }
            assert_eq!(max_clique(&adj, None).clique.len(), best);
        }
    }
}
