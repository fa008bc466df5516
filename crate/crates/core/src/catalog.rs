//! Bundled fixtures: the line-regular group specs (`table1-*`), the parameter
//! rows for 9 <= k <= 12 (`table3-*`), small cyclic planes and the 91- and
//! 729-point configurations, plus a runner that re-executes entries and
//! compares against the stored expectations.
//!
//! Expected values live here rather than in test code so that the CLI's
//! `reproduce` command and the test suite agree on one source of truth.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::arith::{dd_parameter_rows, IntersectionType, ParameterRow, RowOptions, RowTag};
use crate::canon::canonical_form;
use crate::designs::{singer_plane, Design};
use crate::error::{Error, Result};
use crate::groups::{
    build_group, fixed_point_free_multiplier_subgroups, smallest_fixed_point_free_matrix,
    GroupSpec,
};
use crate::search::{classify_with, find_line_regular_designs, SearchConfig};

pub const CATALOG_VERSION: u32 = 1;

const BUNDLED: &str = include_str!("../data/catalog.json");

/// Group orders allowed for `table1-*` fixtures.
pub const TABLE1_ORDERS: [usize; 5] = [651, 91, 2255, 18603, 133];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Fast,
    Extended,
    OutOfScope,
}

/// One line of the parameter table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub line: u32,
    pub v: u64,
    pub d: u64,
    pub c: u64,
    pub x: u64,
    pub y: u64,
    pub k: u64,
    pub b_over_v: u64,
    #[serde(rename = "type")]
    pub ty: String,
}

impl TableRow {
    pub fn intersection_type(&self) -> Result<IntersectionType> {
        IntersectionType::parse(self.k as usize, &self.ty)
    }

    fn key(&self) -> (u64, u64, u64, u64) {
        (self.k, self.v, self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expected {
    /// Number of isomorphism classes over all listed groups; optionally the
    /// single class must be the cyclic plane of this order.
    Classes {
        count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        singer_order: Option<u64>,
    },
    Rows { rows: Vec<TableRow> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub claim: String,
    /// Every group searched for the entry. Empty for parameter rows.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    pub expected: Expected,
    pub scale: Scale,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Display-only table; never interpreted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplayTable {
    pub id: String,
    pub caption: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub version: u32,
    pub entries: Vec<CatalogEntry>,
    pub display_tables: Vec<DisplayTable>,
}

impl Catalog {
    pub fn entry(&self, id: &str) -> Result<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownEntry(id.to_string()))
    }

    /// The parameter-table lines, in line order.
    pub fn table_rows(&self) -> Result<&[TableRow]> {
        match &self.entry("table3-all")?.expected {
            Expected::Rows { rows } => Ok(rows),
            _ => Err(Error::CorruptData("table3-all does not hold rows".into())),
        }
    }

    /// Resolves `builtin:<id>` (first group) or `builtin:<id>/<i>`.
    pub fn builtin_group(&self, name: &str) -> Result<GroupSpec> {
        let rest = name.strip_prefix("builtin:").unwrap_or(name);
        let (id, idx) = match rest.split_once('/') {
            Some((id, i)) => {
                let i = i
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad group index in `{name}`")))?;
                (id, i)
            }
            None => (rest, 0),
        };
        self.entry(id)?
            .groups
            .get(idx)
            .cloned()
            .ok_or_else(|| Error::UnknownEntry(format!("{id} has no group {idx}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cat: Catalog = serde_json::from_str(s)
            .map_err(|e| Error::CorruptData(format!("catalog JSON: {e}")))?;
        cat.validate()?;
        Ok(cat)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::CorruptData(msg));
        if self.version != CATALOG_VERSION {
            return bad(format!("catalog version {} (expected {CATALOG_VERSION})", self.version));
        }
        let mut ids = BTreeSet::new();
        for e in &self.entries {
            if !ids.insert(e.id.as_str()) {
                return bad(format!("duplicate entry {}", e.id));
            }
            for spec in &e.groups {
                let g = build_group(spec)
                    .map_err(|err| Error::CorruptData(format!("{}: {err}", e.id)))?;
                if e.group_order.is_some_and(|o| o != g.order()) {
                    return bad(format!("{}: group order {} != {:?}", e.id, g.order(), e.group_order));
                }
                if e.id.starts_with("table1-") && !TABLE1_ORDERS.contains(&g.order()) {
                    return bad(format!("{}: order {} not an expected group order", e.id, g.order()));
                }
            }
            if !e.groups.is_empty() && e.k.is_none() {
                return bad(format!("{}: search entry without k", e.id));
            }
            if let Expected::Rows { rows } = &e.expected {
                for r in rows {
                    if r.c * r.d != r.v {
                        return bad(format!("{}: line {} has v != c*d", e.id, r.line));
                    }
                    let t = r.intersection_type().map_err(|err| {
                        Error::CorruptData(format!("{}: line {}: {err}", e.id, r.line))
                    })?;
                    if t.points() != r.k || t.intra_pairs() != r.x {
                        return bad(format!("{}: line {} type does not fit k, x", e.id, r.line));
                    }
                }
            }
            check_multiplier_family(e)?;
        }
        Ok(())
    }
}

/// Cyclic `Z_n:Z_s` families must list exactly the fixed-point-free
/// multiplier subgroups, and vector components the least order-`s` matrix.
fn check_multiplier_family(e: &CatalogEntry) -> Result<()> {
    let mut cyclic: BTreeMap<(u64, u64), Vec<u64>> = BTreeMap::new();
    for spec in &e.groups {
        let GroupSpec::AffineSemidirect { cyclic_moduli, vector, top_order, multipliers, matrix } =
            spec
        else {
            continue;
        };
        if *top_order == 1 {
            continue;
        }
        match (vector, cyclic_moduli.as_slice()) {
            (None, [n]) => cyclic.entry((*n, *top_order)).or_default().push(multipliers[0]),
            (Some(vc), _) => {
                let expect = smallest_fixed_point_free_matrix(vc.p, 3, *top_order);
                let m = matrix.as_ref();
                let matches = match (m, expect) {
                    (Some(m), Some(a)) if vc.e == 3 => *m == a,
                    // block-diagonal copies of the 3x3 matrix
                    (Some(m), Some(a)) if vc.e % 3 == 0 => (0..vc.e).all(|i| {
                        (0..vc.e).all(|j| {
                            let want = if i / 3 == j / 3 { a[i % 3][j % 3] } else { 0 };
                            m[i][j] == want
                        })
                    }),
                    _ => false,
                };
                if !matches {
                    return Err(Error::CorruptData(format!(
                        "{}: matrix is not the least fixed-point-free one of order {top_order}",
                        e.id
                    )));
                }
            }
            _ => {}
        }
    }
    for ((n, s), mut ts) in cyclic {
        ts.sort_unstable();
        if ts != fixed_point_free_multiplier_subgroups(n, s) {
            return Err(Error::CorruptData(format!(
                "{}: multipliers {ts:?} are not the order-{s} subgroups of Z{n}",
                e.id
            )));
        }
    }
    Ok(())
}

/// Parses and validates the bundled catalog.
pub fn load_catalog() -> Result<Catalog> {
    Catalog::from_json(BUNDLED)
}

/// Tags rows with `k` in 9..=12 as in-table or extra by `(k, v, x, y)`.
pub fn tag_rows(rows: &mut [ParameterRow], catalog: &Catalog) -> Result<()> {
    let known: BTreeSet<_> = catalog.table_rows()?.iter().map(TableRow::key).collect();
    for row in rows.iter_mut() {
        if !(9..=12).contains(&row.k) {
            continue;
        }
        row.tag = if known.contains(&(row.k, row.v, row.x, row.y)) {
            RowTag::InTable
        } else {
            RowTag::Extra
        };
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

/// One search run inside an entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub group_order: usize,
    pub solutions: usize,
    pub complete: bool,
    pub nodes_visited: u64,
    pub elapsed_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryResult {
    pub id: String,
    pub scale: Scale,
    pub outcome: Outcome,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows_matched: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub searches: Vec<SearchSummary>,
    /// True when every search and the classification ran to completion.
    pub complete: bool,
    pub elapsed_secs: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ManifestReport {
    pub entries: Vec<EntryResult>,
}

impl ManifestReport {
    pub fn count(&self, o: Outcome) -> usize {
        self.entries.iter().filter(|e| e.outcome == o).count()
    }

    /// Markdown table; the seconds column only with `timings`, so that the
    /// default rendering is deterministic.
    pub fn to_markdown(&self, timings: bool) -> String {
        let mut s = String::from("| entry | scale | outcome | detail |");
        s.push_str(if timings { " secs |\n|---|---|---|---|---|\n" } else { "\n|---|---|---|---|\n" });
        for e in &self.entries {
            let _ = write!(
                s,
                "| {} | {} | {} | {} |",
                e.id,
                scale_name(e.scale),
                outcome_name(e.outcome),
                e.detail
            );
            if timings {
                let _ = write!(s, " {:.2} |", e.elapsed_secs);
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "\n{} pass, {} fail, {} inconclusive",
            self.count(Outcome::Pass),
            self.count(Outcome::Fail),
            self.count(Outcome::Inconclusive)
        );
        s
    }
}

pub fn scale_name(s: Scale) -> &'static str {
    match s {
        Scale::Fast => "fast",
        Scale::Extended => "extended",
        Scale::OutOfScope => "out-of-scope",
    }
}

pub fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Fail => "fail",
        Outcome::Inconclusive => "inconclusive",
    }
}

/// Expands `all-fast` and checks that every id exists.
pub fn resolve_ids(catalog: &Catalog, ids: &[String]) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for id in ids {
        if id == "all-fast" {
            out.extend(
                catalog.entries.iter().filter(|e| e.scale == Scale::Fast).map(|e| e.id.clone()),
            );
        } else {
            catalog.entry(id)?;
            out.push(id.clone());
        }
    }
    Ok(out)
}

/// Runs each entry with its own `budget` and compares with the stored
/// expectation. Running out of time gives `inconclusive`, never `fail`.
pub fn run_manifest(
    catalog: &Catalog,
    ids: &[String],
    budget: Option<Duration>,
) -> Result<ManifestReport> {
    let ids = resolve_ids(catalog, ids)?;
    let mut report = ManifestReport::default();
    for id in ids {
        let entry = catalog.entry(&id)?;
        let start = Instant::now();
        let mut result = match &entry.expected {
            Expected::Rows { rows } => run_rows(entry, rows, catalog)?,
            Expected::Classes { count, singer_order } => {
                run_classes(entry, *count, *singer_order, budget.map(|b| start + b))?
            }
        };
        result.elapsed_secs = start.elapsed().as_secs_f64();
        report.entries.push(result);
    }
    Ok(report)
}

fn blank(entry: &CatalogEntry) -> EntryResult {
    EntryResult {
        id: entry.id.clone(),
        scale: entry.scale,
        outcome: Outcome::Fail,
        detail: String::new(),
        classes: None,
        rows_matched: None,
        searches: Vec::new(),
        complete: true,
        elapsed_secs: 0.0,
    }
}

/// Checks each expected line against the arithmetic rows: same
/// `(v, c, d, x, y, b/v)` and a type list equal to the table's list for
/// that parameter set.
fn run_rows(entry: &CatalogEntry, expected: &[TableRow], catalog: &Catalog) -> Result<EntryResult> {
    let all_lines = catalog.table_rows()?;
    let mut by_k: BTreeMap<u64, Vec<ParameterRow>> = BTreeMap::new();
    let mut matched = 0;
    let mut misses = Vec::new();
    for line in expected {
        let rows = match by_k.entry(line.k) {
            std::collections::btree_map::Entry::Occupied(o) => o.into_mut(),
            std::collections::btree_map::Entry::Vacant(v) => v.insert(dd_parameter_rows(
                line.k,
                RowOptions { require_gcd_one: true, k_range_check: true },
            )?),
        };
        let table_types: BTreeSet<IntersectionType> = all_lines
            .iter()
            .filter(|l| l.key() == line.key())
            .map(TableRow::intersection_type)
            .collect::<Result<_>>()?;
        let ok = rows.iter().any(|r| {
            (r.v, r.c, r.d, r.x, r.y) == (line.v, line.c, line.d, line.x, line.y)
                && r.b_over_v() == (line.b_over_v, 1)
                && r.types.iter().cloned().collect::<BTreeSet<_>>() == table_types
        });
        if ok {
            matched += 1;
        } else {
            misses.push(line.line);
        }
    }
    let mut res = blank(entry);
    res.rows_matched = Some((matched, expected.len()));
    if misses.is_empty() {
        res.outcome = Outcome::Pass;
        res.detail = format!("{matched}/{} rows matched", expected.len());
    } else {
        res.detail = format!("{matched}/{} rows matched; lines {misses:?} differ", expected.len());
    }
    Ok(res)
}

fn run_classes(
    entry: &CatalogEntry,
    count: usize,
    singer_order: Option<u64>,
    deadline: Option<Instant>,
) -> Result<EntryResult> {
    let k = entry.k.ok_or_else(|| Error::CorruptData(format!("{}: no k", entry.id)))? as usize;
    let mut res = blank(entry);
    let mut groups = Vec::new();
    let mut found: Vec<(usize, Vec<u32>)> = Vec::new();
    for spec in &entry.groups {
        let g = build_group(spec)?;
        let mut cfg = SearchConfig::new(k);
        if let Some(d) = deadline {
            // zero remaining time still runs the (cheap) setup and reports incomplete
            cfg.time_budget = Some(d.saturating_duration_since(Instant::now()));
        }
        let rep = find_line_regular_designs(&g, &cfg)?;
        res.complete &= rep.complete;
        res.searches.push(SearchSummary {
            group_order: rep.group_order,
            solutions: rep.solutions.len(),
            complete: rep.complete,
            nodes_visited: rep.nodes_visited,
            elapsed_secs: rep.elapsed_secs,
        });
        found.extend(rep.solutions.into_iter().map(|b| (groups.len(), b)));
        groups.push(g);
    }
    if !res.complete {
        res.outcome = Outcome::Inconclusive;
        res.detail = format!("budget exhausted after {} designs found", found.len());
        return Ok(res);
    }
    let make = |i: usize| Design::from_base_block(&groups[found[i].0], &found[i].1);
    let Some(classes) = classify_with(found.len(), make, deadline)? else {
        res.complete = false;
        res.outcome = Outcome::Inconclusive;
        res.detail = format!("budget exhausted while classifying {} designs", found.len());
        return Ok(res);
    };
    res.classes = Some(classes.len());
    let mut ok = classes.len() == count;
    res.detail = format!("{} class(es), expected {count}", classes.len());
    if let (Some(q), true) = (singer_order, ok) {
        let plane = canonical_form(&singer_plane(q)?)?;
        let same = classes.iter().all(|c| c.certificate.same_class(&plane));
        ok &= same;
        res.detail.push_str(if same { "; matches the cyclic plane" } else { "; differs from the cyclic plane" });
    }
    res.outcome = if ok { Outcome::Pass } else { Outcome::Fail };
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalog_loads() {
        let cat = load_catalog().unwrap();
        for line in 1..=5 {
            assert!(cat.entry(&format!("table1-line{line}")).is_ok());
        }
        assert_eq!(cat.table_rows().unwrap().len(), 38);
        for line in 1..=38 {
            assert!(cat.entry(&format!("table3-line{line}")).is_ok());
        }
        let e = cat.entry("table1-line4").unwrap();
        assert_eq!(e.scale, Scale::OutOfScope);
        assert_eq!(e.k, Some(11));
        assert_eq!(e.expected, Expected::Classes { count: 0, singer_order: None });
    }

    #[test]
    fn line_24_row() {
        let cat = load_catalog().unwrap();
        let Expected::Rows { rows } = &cat.entry("table3-line24").unwrap().expected else {
            panic!("rows expected");
        };
        let r = &rows[0];
        assert_eq!((r.v, r.x, r.y, r.k, r.b_over_v), (1431, 2, 1, 11, 13));
        assert_eq!(r.intersection_type().unwrap().to_string(), "1^7,2^2");
    }

    #[test]
    fn corrupt_catalog_fails_loudly() {
        let mut cat = load_catalog().unwrap();
        if let GroupSpec::AffineSemidirect { multipliers, .. } =
            &mut cat.entries.iter_mut().find(|e| e.id == "z91-z3-k6").unwrap().groups[1]
        {
            multipliers[0] = 74;
        }
        let err = Catalog::from_json(&cat.to_json().unwrap()).unwrap_err();
        assert!(matches!(err, Error::CorruptData(_)), "{err}");
        assert!(matches!(Catalog::from_json("{"), Err(Error::CorruptData(_))));
    }

    #[test]
    fn builtin_groups() {
        let cat = load_catalog().unwrap();
        assert_eq!(cat.builtin_group("builtin:table1-line2").unwrap(), GroupSpec::cyclic(91));
        assert_eq!(
            cat.builtin_group("builtin:z91-z3-k6/1").unwrap(),
            GroupSpec::cyclic_with_multiplier(91, 3, 16)
        );
        assert!(cat.builtin_group("builtin:nope").is_err());
    }

    #[test]
    fn empty_manifest() {
        let cat = load_catalog().unwrap();
        assert!(run_manifest(&cat, &[], None).unwrap().entries.is_empty());
    }
}
