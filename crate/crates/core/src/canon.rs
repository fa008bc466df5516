//! Canonical labeling of designs.
//!
//! Points are colored by iterated refinement over the incidence structure
//! (a line's color is the multiset of its point colors, a point's color is
//! its old color plus the multiset of its line colors) until the point
//! partition stops splitting. When refinement stalls short of a discrete
//! partition, a point of the largest nonsingleton cell is individualized
//! and the search branches. Each leaf relabels the block list; the
//! certificate is the lexicographically least relabeled list over all
//! leaves. Automorphisms discovered from equal leaves prune sibling
//! branches in the same orbit and cut off subtrees equivalent to ones
//! already explored.

use std::cmp::Ordering;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::designs::Design;
use crate::error::{Error, Result};
use crate::perm::{self, Perm};

pub const MAX_POINTS: usize = 2000;
pub const MAX_BLOCKS: usize = 25_000;

/// Canonical block list plus the relabeling that produces it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub v: usize,
    pub k: usize,
    pub blocks: Vec<Vec<u32>>,
    /// `relabeling[p]` is the canonical label of input point `p`.
    pub relabeling: Vec<u32>,
}

impl Certificate {
    /// Compares only the canonical structure, ignoring the relabeling.
    pub fn same_class(&self, other: &Certificate) -> bool {
        self.v == other.v && self.k == other.k && self.blocks == other.blocks
    }

    pub fn canonical_design(&self) -> Design {
        Design::new(self.v, self.k, self.blocks.clone())
    }
}

struct Incidence {
    v: usize,
    blocks: Vec<Vec<u32>>,
    point_blocks: Vec<Vec<u32>>,
}

impl Incidence {
    fn new(design: &Design) -> Self {
        let mut point_blocks = vec![Vec::new(); design.v];
        for (i, b) in design.blocks.iter().enumerate() {
            for &x in b {
                point_blocks[x as usize].push(i as u32);
            }
        }
        Self { v: design.v, blocks: design.blocks.clone(), point_blocks }
    }

    /// Ranks `sigs` densely by sorted order.
    fn rank<T: Ord>(sigs: &[T]) -> (Vec<u32>, usize) {
        let mut order: Vec<usize> = (0..sigs.len()).collect();
        order.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]));
        let mut out = vec![0u32; sigs.len()];
        let mut next = 0u32;
        for (i, &j) in order.iter().enumerate() {
            if i > 0 && sigs[order[i - 1]] != sigs[j] {
                next += 1;
            }
            out[j] = next;
        }
        let count = if sigs.is_empty() { 0 } else { next as usize + 1 };
        (out, count)
    }

    /// Refines a point coloring to a fixpoint. Colors are dense ranks and the
    /// relative order of existing colors is preserved.
    fn refine(&self, colors: &mut Vec<u32>) {
        let mut cells = count_colors(colors);
        loop {
            let block_sigs: Vec<Vec<u32>> = self
                .blocks
                .iter()
                .map(|b| {
                    let mut s: Vec<u32> = b.iter().map(|&x| colors[x as usize]).collect();
                    s.sort_unstable();
                    s
                })
                .collect();
            let (bcol, _) = Self::rank(&block_sigs);
            let point_sigs: Vec<(u32, Vec<u32>)> = (0..self.v)
                .map(|p| {
                    let mut s: Vec<u32> =
                        self.point_blocks[p].iter().map(|&b| bcol[b as usize]).collect();
                    s.sort_unstable();
                    (colors[p], s)
                })
                .collect();
            let (next, n) = Self::rank(&point_sigs);
            *colors = next;
            if n == cells || n == self.v {
                return;
            }
            cells = n;
        }
    }

    fn relabeled_blocks(&self, labels: &[u32]) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = self
            .blocks
            .iter()
            .map(|b| {
                let mut s: Vec<u32> = b.iter().map(|&x| labels[x as usize]).collect();
                s.sort_unstable();
                s
            })
            .collect();
        out.sort();
        out
    }
}

fn count_colors(colors: &[u32]) -> usize {
    colors.iter().max().map_or(0, |&m| m as usize + 1)
}

fn individualize(colors: &[u32], w: u32) -> Vec<u32> {
    let doubled: Vec<u64> = colors
        .iter()
        .enumerate()
        .map(|(p, &c)| 2 * c as u64 + u64::from(p as u32 != w))
        .collect();
    Incidence::rank(&doubled).0
}

struct Leaf {
    path: Vec<u32>,
    labels: Vec<u32>,
    blocks: Vec<Vec<u32>>,
}

struct Search<'a> {
    inc: &'a Incidence,
    first: Option<Leaf>,
    best: Option<Leaf>,
    automorphisms: Vec<Perm>,
    leaves: usize,
    deadline: Option<Instant>,
    expired: bool,
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl Search<'_> {
    /// Returns `Some(level)` to unwind until the path has length `level`.
    fn visit(&mut self, mut colors: Vec<u32>, path: &mut Vec<u32>) -> Option<usize> {
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.expired = true;
            return Some(0);
        }
        self.inc.refine(&mut colors);
        let n_cells = count_colors(&colors);
        if n_cells == self.inc.v {
            return self.leaf(colors, path);
        }
        let mut sizes = vec![0usize; n_cells];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        let target = (0..n_cells)
            .filter(|&c| sizes[c] > 1)
            .max_by_key(|&c| (sizes[c], std::cmp::Reverse(c)))
            .expect("non-discrete partition has a nonsingleton cell") as u32;
        let cell: Vec<u32> =
            (0..self.inc.v as u32).filter(|&p| colors[p as usize] == target).collect();

        let depth = path.len();
        let mut explored: Vec<u32> = Vec::new();
        let mut orbits: Option<(usize, Vec<u32>)> = None;
        for &w in &cell {
            if !explored.is_empty() {
                // orbit representatives under automorphisms fixing the path
                if orbits.as_ref().is_none_or(|(n, _)| *n != self.automorphisms.len()) {
                    orbits = Some((self.automorphisms.len(), self.stabilizer_orbits(path)));
                }
                let root = &orbits.as_ref().expect("computed").1;
                if explored.iter().any(|&u| root[u as usize] == root[w as usize]) {
                    continue;
                }
            }
            explored.push(w);
            path.push(w);
            let jump = self.visit(individualize(&colors, w), path);
            path.pop();
            if self.expired {
                return Some(0);
            }
            if let Some(level) = jump {
                if level < depth {
                    return Some(level);
                }
            }
        }
        None
    }

    fn stabilizer_orbits(&self, path: &[u32]) -> Vec<u32> {
        let n = self.inc.v;
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        for a in &self.automorphisms {
            if path.iter().all(|&p| a[p as usize] == p) {
                for x in 0..n as u32 {
                    let (rx, ry) = (find(&mut parent, x), find(&mut parent, a[x as usize]));
                    if rx != ry {
                        parent[rx.max(ry) as usize] = rx.min(ry);
                    }
                }
            }
        }
        (0..n as u32).map(|x| find(&mut parent, x)).collect()
    }

    fn leaf(&mut self, labels: Vec<u32>, path: &[u32]) -> Option<usize> {
        self.leaves += 1;
        let blocks = self.inc.relabeled_blocks(&labels);
        let leaf = Leaf { path: path.to_vec(), labels, blocks };
        let Some(first) = &self.first else {
            self.first = Some(leaf);
            return None;
        };
        if leaf.blocks == first.blocks {
            let level = common_prefix(&leaf.path, &first.path);
            let gamma = automorphism(&leaf.labels, &first.labels);
            self.automorphisms.push(gamma);
            return Some(level);
        }
        let best = self.best.as_ref().unwrap_or(first);
        match leaf.blocks.cmp(&best.blocks) {
            Ordering::Equal => {
                let level = common_prefix(&leaf.path, &best.path);
                let gamma = automorphism(&leaf.labels, &best.labels);
                self.automorphisms.push(gamma);
                Some(level)
            }
            Ordering::Less => {
                self.best = Some(leaf);
                None
            }
            Ordering::Greater => None,
        }
    }
}

/// The automorphism taking the leaf labeled `from` to the leaf labeled `to`.
fn automorphism(from: &[u32], to: &[u32]) -> Perm {
    let to_inv = perm::inverse(to);
    from.iter().map(|&l| to_inv[l as usize]).collect()
}

/// Computes the canonical certificate of a design. Two designs are
/// isomorphic iff their certificates agree on `(v, k, blocks)`.
pub fn canonical_form(design: &Design) -> Result<Certificate> {
    Ok(canonical_form_with_stats(design)?.0)
}

/// As [`canonical_form`], also returning the automorphisms found and the
/// number of leaves visited.
pub fn canonical_form_with_stats(design: &Design) -> Result<(Certificate, Vec<Perm>, usize)> {
    Ok(canonize(design, None)?.expect("no deadline"))
}

/// As [`canonical_form`], giving up with `Ok(None)` once `deadline` passes.
pub fn canonical_form_until(design: &Design, deadline: Instant) -> Result<Option<Certificate>> {
    Ok(canonize(design, Some(deadline))?.map(|r| r.0))
}

fn canonize(
    design: &Design,
    deadline: Option<Instant>,
) -> Result<Option<(Certificate, Vec<Perm>, usize)>> {
    if design.v > MAX_POINTS || design.b() > MAX_BLOCKS {
        return Err(Error::TooLarge(format!(
            "canonical form supports v <= {MAX_POINTS}, b <= {MAX_BLOCKS} (got v = {}, b = {})",
            design.v,
            design.b()
        )));
    }
    if design.blocks.iter().flatten().any(|&x| x as usize >= design.v) {
        return Err(Error::InvalidArgument("block point out of range".into()));
    }
    let inc = Incidence::new(design);
    if design.v == 0 {
        return Ok(Some((
            Certificate { v: 0, k: design.k, blocks: inc.relabeled_blocks(&[]), relabeling: vec![] },
            vec![],
            0,
        )));
    }
    let mut search = Search {
        inc: &inc,
        first: None,
        best: None,
        automorphisms: Vec::new(),
        leaves: 0,
        deadline,
        expired: false,
    };
    let mut path = Vec::new();
    search.visit(vec![0; design.v], &mut path);
    let Search { first, best, automorphisms, leaves, expired, .. } = search;
    if expired {
        return Ok(None);
    }
    let best = best.or(first).expect("search reaches at least one leaf");
    Ok(Some((
        Certificate { v: design.v, k: design.k, blocks: best.blocks, relabeling: best.labels },
        automorphisms,
        leaves,
    )))
}
