//! Linear spaces as block lists: verification against the axioms, group
//! invariance, intersection types against a point partition, and the
//! classical Singer planes.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arith::{pairs, IntersectionType};
use crate::error::{Error, Result};
use crate::field::singer_difference_set;
use crate::groups::{point_orbits, GroupAction, GroupSpec, Partition};
use crate::perm::Perm;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub group: GroupSpec,
    pub base_block: Vec<u32>,
}

/// A point count and a list of lines (blocks), each a sorted point set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub v: usize,
    pub k: usize,
    pub blocks: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Design {
    /// Sorts each block and the block list.
    pub fn new(v: usize, k: usize, blocks: Vec<Vec<u32>>) -> Self {
        let mut blocks: Vec<Vec<u32>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort();
        Self { v, k, blocks, provenance: None }
    }

    /// The orbit of `base` under every element of `g`.
    pub fn from_base_block(g: &GroupAction, base: &[u32]) -> Self {
        let mut blocks: Vec<Vec<u32>> = (0..g.order())
            .map(|e| {
                let mut b: Vec<u32> = base.iter().map(|&x| g.apply(e, x)).collect();
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort();
        blocks.dedup();
        let mut base = base.to_vec();
        base.sort_unstable();
        Self {
            v: g.degree(),
            k: base.len(),
            blocks,
            provenance: Some(Provenance { group: g.spec().clone(), base_block: base }),
        }
    }

    pub fn b(&self) -> usize {
        self.blocks.len()
    }

    /// Image under the point permutation `p`.
    pub fn relabel(&self, p: &[u32]) -> Self {
        Design::new(
            self.v,
            self.k,
            self.blocks
                .iter()
                .map(|b| b.iter().map(|&x| p[x as usize]).collect())
                .collect(),
        )
    }

    /// The Fano plane as the translates of `{0, 1, 3}` in `Z_7`.
    pub fn fano() -> Self {
        Design::new(7, 3, (0..7).map(|t| vec![t, (t + 1) % 7, (t + 3) % 7]).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Failure {
    MalformedBlock { block: usize },
    UncoveredPair { a: u32, b: u32 },
    MultiplyCoveredPair { a: u32, b: u32, count: u32 },
    NonConstantR { point: u32, lines: usize },
}

/// Failures listed individually before the list is truncated.
pub const MAX_LISTED_FAILURES: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSpaceReport {
    pub valid: bool,
    /// Lines per point, when constant.
    pub r: Option<usize>,
    pub b: usize,
    pub uncovered_pairs: usize,
    pub multiply_covered_pairs: usize,
    pub failures: Vec<Failure>,
}

/// Checks that every pair of distinct points lies on exactly one line.
pub fn verify_linear_space(design: &Design) -> LinearSpaceReport {
    let v = design.v;
    let mut failures = Vec::new();
    let push = |f: Failure, failures: &mut Vec<Failure>| {
        if failures.len() < MAX_LISTED_FAILURES {
            failures.push(f);
        }
    };
    let mut cover = vec![0u32; v * v];
    let mut degree = vec![0usize; v];
    let mut malformed = false;
    for (i, block) in design.blocks.iter().enumerate() {
        let ok = block.len() == design.k
            && block.len() >= 2
            && block.iter().all(|&x| (x as usize) < v)
            && block.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            malformed = true;
            push(Failure::MalformedBlock { block: i }, &mut failures);
            continue;
        }
        for (j, &a) in block.iter().enumerate() {
            degree[a as usize] += 1;
            for &b in &block[j + 1..] {
                cover[a as usize * v + b as usize] += 1;
            }
        }
    }
    let (mut uncovered, mut multiple) = (0, 0);
    for a in 0..v {
        for b in a + 1..v {
            match cover[a * v + b] {
                1 => {}
                0 => {
                    uncovered += 1;
                    push(Failure::UncoveredPair { a: a as u32, b: b as u32 }, &mut failures);
                }
                c => {
                    multiple += 1;
                    push(
                        Failure::MultiplyCoveredPair { a: a as u32, b: b as u32, count: c },
                        &mut failures,
                    );
                }
            }
        }
    }
    let r0 = degree.first().copied().unwrap_or(0);
    let mut r = Some(r0);
    for (p, &d) in degree.iter().enumerate() {
        if d != r0 {
            r = None;
            push(Failure::NonConstantR { point: p as u32, lines: d }, &mut failures);
        }
    }
    LinearSpaceReport {
        valid: !malformed && uncovered == 0 && multiple == 0 && r.is_some(),
        r,
        b: design.b(),
        uncovered_pairs: uncovered,
        multiply_covered_pairs: multiple,
        failures,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupActionReport {
    pub invariant: bool,
    pub line_transitive: bool,
    pub line_regular: bool,
    /// Sizes of the group's orbits on lines (empty when not invariant).
    pub orbit_lengths: Vec<usize>,
}

pub fn verify_group_action(design: &Design, g: &GroupAction) -> Result<GroupActionReport> {
    if g.degree() != design.v {
        return Err(Error::DegreeMismatch { design: design.v, group: g.degree() });
    }
    let index: HashMap<&[u32], usize> =
        design.blocks.iter().enumerate().map(|(i, b)| (b.as_slice(), i)).collect();
    let gens = g.generators();
    // generator action on block indices
    let mut block_perms: Vec<Perm> = Vec::with_capacity(gens.len());
    for p in &gens {
        let mut img = Vec::with_capacity(design.b());
        for block in &design.blocks {
            let mut im: Vec<u32> = block.iter().map(|&x| p[x as usize]).collect();
            im.sort_unstable();
            match index.get(im.as_slice()) {
                Some(&j) => img.push(j as u32),
                None => {
                    return Ok(GroupActionReport {
                        invariant: false,
                        line_transitive: false,
                        line_regular: false,
                        orbit_lengths: Vec::new(),
                    })
                }
            }
        }
        block_perms.push(img);
    }
    let mut orbit_lengths: Vec<usize> =
        point_orbits(design.b(), &block_perms).iter().map(Vec::len).collect();
    orbit_lengths.sort_unstable();
    let line_transitive = orbit_lengths.len() == 1;
    Ok(GroupActionReport {
        invariant: true,
        line_transitive,
        line_regular: line_transitive && g.order() == design.b(),
        orbit_lengths,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub c: usize,
    pub d: usize,
    /// The common type of every line, if there is one.
    pub constant_type: Option<IntersectionType>,
    /// Two lines with different types, when the type is not constant.
    pub witness_lines: Option<(usize, usize)>,
    /// Distinct types with the number of lines of each.
    pub type_counts: Vec<(IntersectionType, usize)>,
    /// `Σ C(i,2)·d_i` of the constant type.
    pub x: Option<u64>,
    /// `(C(k,2) - x) / c`, when integral.
    pub y: Option<u64>,
    /// Whether `c = (C(k,2)-x)/y` and `d = (C(k,2)-y)/x` hold with integral `y`.
    pub dd_consistent: bool,
}

/// Class-intersection type of every line against `partition`.
pub fn intersection_type_of(design: &Design, partition: &Partition) -> Result<IntersectionReport> {
    if partition.degree() != design.v {
        return Err(Error::DegreeMismatch { design: design.v, group: partition.degree() });
    }
    let class_of = partition.class_index();
    let mut counts: HashMap<IntersectionType, (usize, usize)> = HashMap::new();
    let mut hits = vec![0usize; partition.num_classes()];
    let mut line_types = Vec::with_capacity(design.b());
    for (i, block) in design.blocks.iter().enumerate() {
        for &x in block {
            hits[class_of[x as usize] as usize] += 1;
        }
        let t = IntersectionType::from_class_sizes(design.k, block.iter().map(|&x| {
            std::mem::take(&mut hits[class_of[x as usize] as usize])
        }));
        counts.entry(t.clone()).or_insert((0, i)).0 += 1;
        line_types.push(t);
    }
    let mut type_counts: Vec<(IntersectionType, usize)> =
        counts.iter().map(|(t, &(n, _))| (t.clone(), n)).collect();
    type_counts.sort();
    let (c, d) = (partition.class_size(), partition.num_classes());
    let kk = pairs(design.k as u64);
    let mut report = IntersectionReport {
        c,
        d,
        constant_type: None,
        witness_lines: None,
        type_counts,
        x: None,
        y: None,
        dd_consistent: false,
    };
    if counts.len() == 1 {
        let t = line_types[0].clone();
        let x = t.intra_pairs();
        report.x = Some(x);
        if x > 0 && x < kk && (kk - x).is_multiple_of(c as u64) {
            let y = (kk - x) / c as u64;
            report.y = Some(y);
            report.dd_consistent = y >= 1 && kk >= y && (kk - y).is_multiple_of(x) && (kk - y) / x == d as u64;
        }
        report.constant_type = Some(t);
    } else if counts.len() > 1 {
        let first = &line_types[0];
        let other = line_types.iter().position(|t| t != first).expect("two types");
        report.witness_lines = Some((0, other));
    }
    Ok(report)
}

/// PG(2, q) as the development of a Singer difference set in `Z_{q²+q+1}`.
pub fn singer_plane(q: u64) -> Result<Design> {
    let base = singer_difference_set(q)?;
    let n = (q * q + q + 1) as u32;
    let blocks = (0..n).map(|t| base.iter().map(|&x| (x + t) % n).collect()).collect();
    let mut design = Design::new(n as usize, q as usize + 1, blocks);
    design.provenance = Some(Provenance { group: GroupSpec::cyclic(n as u64), base_block: base });
    Ok(design)
}
