//! Exact-integer feasibility arithmetic for line-transitive, point-imprimitive
//! linear spaces.
//!
//! A linear space with line size `k` whose automorphism group preserves a
//! partition of the `v` points into `d` classes of size `c` must satisfy
//! the Delandtsheer–Doyen relations
//!
//! ```text
//! c = (C(k,2) - x) / y        d = (C(k,2) - y) / x
//! ```
//!
//! for positive integers `x, y`. Here `x` is the number of point pairs of a
//! line that lie inside a single class. This module enumerates every `(x, y)`
//! that survives the integrality conditions, together with the admissible
//! class-intersection types of a line.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n choose 2`.
pub fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// How a line meets the classes of a partition: `counts[i - 1]` is the number
/// of classes met in exactly `i` points.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntersectionType {
    counts: Vec<u64>,
}

impl IntersectionType {
    /// Builds a type from `(d_1, ..., d_k)`. Trailing zeros are kept so that the
    /// vector length equals the line size.
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    /// Builds a type from a list of per-class intersection sizes of one line,
    /// e.g. `[3, 3, 2, 1]`.
    pub fn from_class_sizes(k: usize, sizes: impl IntoIterator<Item = usize>) -> Self {
        let mut counts = vec![0; k];
        for s in sizes {
            if s > 0 {
                counts[s - 1] += 1;
            }
        }
        Self { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `Σ i·d_i`, the number of points on the line.
    pub fn points(&self) -> u64 {
        self.terms().map(|(i, n)| i * n).sum()
    }

    /// `Σ C(i,2)·d_i`, the number of intra-class pairs on the line.
    pub fn intra_pairs(&self) -> u64 {
        self.terms().map(|(i, n)| pairs(i) * n).sum()
    }

    /// `Σ d_i`, the number of classes the line meets.
    pub fn classes_met(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Nonzero `(i, d_i)` terms.
    pub fn terms(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &n)| (i as u64 + 1, n))
    }

    /// Parses the `"1^2,2^4"` rendering. A bare `"3"` means `3^1`, which is
    /// also how `Display` writes it.
    pub fn parse(k: usize, s: &str) -> Result<Self> {
        let mut counts = vec![0; k];
        for term in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (i, n) = match term.split_once('^') {
                Some((i, n)) => (i.trim(), n.trim()),
                None => (term, "1"),
            };
            let bad = || Error::InvalidArgument(format!("bad intersection type term `{term}`"));
            let i: usize = i.parse().map_err(|_| bad())?;
            let n: u64 = n.parse().map_err(|_| bad())?;
            if i == 0 || i > k {
                return Err(bad());
            }
            counts[i - 1] += n;
        }
        Ok(Self { counts })
    }
}

impl fmt::Display for IntersectionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, n) in self.terms() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            if n == 1 {
                write!(f, "{i}")?;
            } else {
                write!(f, "{i}^{n}")?;
            }
        }
        Ok(())
    }
}

/// Whether a row is one of the published parameter sets or an arithmetic-only
/// survivor that needs group-theoretic elimination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowTag {
    InTable,
    Extra,
    Untagged,
}

/// One feasible `(k, x, y, c, d)` parameter set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterRow {
    pub k: u64,
    pub x: u64,
    pub y: u64,
    pub c: u64,
    pub d: u64,
    pub v: u64,
    pub r: u64,
    pub b: u64,
    pub types: Vec<IntersectionType>,
    pub tag: RowTag,
}

impl ParameterRow {
    /// `b / v` as a reduced fraction `(num, den)`.
    pub fn b_over_v(&self) -> (u64, u64) {
        let g = gcd(self.b, self.v);
        (self.b / g, self.v / g)
    }

    /// Checks `b·x = d·C(c,2)`. Never used as a filter.
    pub fn identity_holds(&self) -> bool {
        self.b * self.x == self.d * pairs(self.c)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowOptions {
    /// Keep only rows with `gcd(k, v) = 1`.
    pub require_gcd_one: bool,
    /// Reject `k` outside `9..=12` (the range the bundled table covers).
    pub k_range_check: bool,
}

/// `(r, b)` for a 2-`(v, k, 1)` design.
pub fn design_counts(v: u64, k: u64) -> Result<(u64, u64)> {
    if !(2 < k && k < v) {
        return Err(Error::InvalidArgument(format!(
            "design counts need 2 < k < v, got v={v}, k={k}"
        )));
    }
    if !(v - 1).is_multiple_of(k - 1) {
        return Err(Error::Integrality {
            count: "r",
            detail: format!("(v-1)/(k-1) = {}/{}", v - 1, k - 1),
        });
    }
    let r = (v - 1) / (k - 1);
    if !(v * r).is_multiple_of(k) {
        return Err(Error::Integrality {
            count: "b",
            detail: format!("v*r/k = {}/{}", v * r, k),
        });
    }
    Ok((r, v * r / k))
}

/// Every intersection type `(d_1, ..., d_k)` with `Σ i·d_i = k`,
/// `Σ C(i,2)·d_i = x`, `Σ d_i ≤ d` and `d_i = 0` for `i > c`, in
/// lexicographic order of the count vector.
pub fn intersection_types(k: u64, x: u64, c: u64, d: u64) -> Result<Vec<IntersectionType>> {
    if k < 2 || x < 1 || c < 2 || d < 2 {
        return Err(Error::InvalidArgument(format!(
            "intersection types need k >= 2, x >= 1, c >= 2, d >= 2 (got k={k}, x={x}, c={c}, d={d})"
        )));
    }
    let mut out = Vec::new();
    let mut counts = vec![0u64; k as usize];
    types_rec(1, k, x, d, c, &mut counts, &mut out);
    out.sort();
    Ok(out)
}

fn types_rec(
    i: u64,
    points_left: u64,
    pairs_left: u64,
    classes_left: u64,
    c: u64,
    counts: &mut Vec<u64>,
    out: &mut Vec<IntersectionType>,
) {
    if points_left == 0 {
        if pairs_left == 0 {
            out.push(IntersectionType::new(counts.clone()));
        }
        return;
    }
    if i as usize > counts.len() || i > c {
        return;
    }
    let mut n = 0;
    while n * i <= points_left && n * pairs(i) <= pairs_left && n <= classes_left {
        counts[i as usize - 1] = n;
        types_rec(
            i + 1,
            points_left - n * i,
            pairs_left - n * pairs(i),
            classes_left - n,
            c,
            counts,
            out,
        );
        n += 1;
    }
    counts[i as usize - 1] = 0;
}

/// All arithmetically feasible parameter rows for line size `k`, sorted by
/// `(v, x)`. Rows come back [`RowTag::Untagged`]; see
/// [`crate::catalog::tag_rows`] for tagging against the bundled table.
pub fn dd_parameter_rows(k: u64, opts: RowOptions) -> Result<Vec<ParameterRow>> {
    if k < 3 {
        return Err(Error::InvalidArgument(format!("line size must be >= 3, got {k}")));
    }
    if opts.k_range_check && !(9..=12).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside the checked range 9..=12"
        )));
    }
    let kk = pairs(k);
    let mut rows = Vec::new();
    for x in 1..kk {
        for y in 1..kk {
            if !(kk - x).is_multiple_of(y) || !(kk - y).is_multiple_of(x) {
                continue;
            }
            let c = (kk - x) / y;
            let d = (kk - y) / x;
            if c < 2 || d < 2 {
                continue;
            }
            let v = c * d;
            if k >= v {
                continue;
            }
            let Ok((r, b)) = design_counts(v, k) else {
                continue;
            };
            if opts.require_gcd_one && gcd(k, v) != 1 {
                continue;
            }
            let types = intersection_types(k, x, c, d)?;
            if types.is_empty() {
                continue;
            }
            let row = ParameterRow { k, x, y, c, d, v, r, b, types, tag: RowTag::Untagged };
            assert!(row.identity_holds(), "b*x = d*C(c,2) violated for {row:?}");
            rows.push(row);
        }
    }
    rows.sort_by_key(|r| (r.v, r.x));
    Ok(rows)
}

/// CSV rendering, one line per `(row, type)` pair.
pub fn rows_to_csv(rows: &[ParameterRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "x", "y", "c", "d", "v", "r", "b", "type", "tag"])
        .expect("in-memory write");
    for row in rows {
        let tag = match row.tag {
            RowTag::InTable => "in-table",
            RowTag::Extra => "extra",
            RowTag::Untagged => "",
        };
        let nums = [row.k, row.x, row.y, row.c, row.d, row.v, row.r, row.b].map(|n| n.to_string());
        for t in &row.types {
            let mut rec: Vec<String> = nums.to_vec();
            rec.push(t.to_string());
            rec.push(tag.to_string());
            w.write_record(&rec).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(k: usize, s: &str) -> IntersectionType {
        IntersectionType::parse(k, s).unwrap()
    }

    #[test]
    fn design_counts_examples() {
        assert_eq!(design_counts(145, 9).unwrap(), (18, 290));
        assert_eq!(design_counts(7, 3).unwrap(), (3, 7));
        match design_counts(10, 4) {
            Err(Error::Integrality { count, .. }) => assert_eq!(count, "b"),
            other => panic!("expected integrality failure, got {other:?}"),
        }
        assert!(matches!(design_counts(9, 4), Err(Error::Integrality { count: "r", .. })));
        assert!(design_counts(5, 5).is_err());
    }

    #[test]
    fn types_for_published_rows() {
        assert_eq!(
            intersection_types(10, 4, 41, 11).unwrap(),
            vec![ty(10, "1^2,2^4"), ty(10, "1^5,2,3")]
        );
        let mut got = intersection_types(9, 7, 29, 5).unwrap();
        got.sort();
        let mut want = vec![ty(9, "1,2,3^2"), ty(9, "1^3,2,4")];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(intersection_types(9, 36, 29, 5).unwrap(), vec![ty(9, "9")]);
    }

    #[test]
    fn types_are_lexicographic() {
        let t = intersection_types(12, 9, 19, 7).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.windows(2).all(|w| w[0].counts() < w[1].counts()));
    }

    #[test]
    fn class_size_caps_intersections() {
        // c = 2 forbids any class meeting a line in 3 points
        let t = intersection_types(6, 3, 2, 10).unwrap();
        assert_eq!(t, vec![ty(6, "2^3")]);
    }

    #[test]
    fn argument_validation() {
        assert!(dd_parameter_rows(2, RowOptions::default()).is_err());
        assert!(intersection_types(9, 0, 5, 5).is_err());
        assert!(intersection_types(9, 1, 1, 5).is_err());
        let opts = RowOptions { k_range_check: true, ..Default::default() };
        assert!(dd_parameter_rows(8, opts).is_err());
        assert!(dd_parameter_rows(9, opts).is_ok());
    }

    #[test]
    fn k3_has_no_rows() {
        // x = y = 1 gives c = d = 2, v = 4, r = 3/2
        assert!(dd_parameter_rows(3, RowOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn k9_contains_published_rows() {
        let rows = dd_parameter_rows(9, RowOptions { require_gcd_one: true, ..Default::default() })
            .unwrap();
        let r = rows.iter().find(|r| r.x == 7 && r.y == 1).unwrap();
        assert_eq!((r.c, r.d, r.v, r.r, r.b), (29, 5, 145, 18, 290));
        let r = rows.iter().find(|r| r.x == 2 && r.y == 2).unwrap();
        assert_eq!((r.c, r.d, r.v), (17, 17, 289));
        assert_eq!(r.b_over_v(), (4, 1));
        // arithmetic-only survivor
        assert!(rows.iter().any(|r| r.x == 1 && r.y == 1 && r.v == 1225));
    }

    #[test]
    fn type_rendering_round_trips() {
        let t = ty(10, "1^4, 3^2");
        assert_eq!(t.to_string(), "1^4,3^2");
        assert_eq!(t.points(), 10);
        assert_eq!(t.intra_pairs(), 6);
        assert_eq!(t.classes_met(), 6);
        assert!(IntersectionType::parse(3, "4^1").is_err());
        assert!(IntersectionType::parse(3, "a^1").is_err());
    }

    #[test]
    fn csv_has_one_line_per_type() {
        let rows = dd_parameter_rows(10, RowOptions { require_gcd_one: true, ..Default::default() })
            .unwrap();
        let csv = rows_to_csv(&rows);
        let n: usize = rows.iter().map(|r| r.types.len()).sum();
        assert_eq!(csv.lines().count(), n + 1);
        assert!(csv.starts_with("k,x,y,c,d,v,r,b,type"));
    }
}
