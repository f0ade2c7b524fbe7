//! Translation-invariant multi-variable stencils and the plain-text golden format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lattice::{Location, SubgridId};

/// Key of one stencil entry: equation variable, unknown variable, lattice offset.
pub type EntryKey = (usize, usize, i32, i32);

/// `s[(i, r, kk, ll)]` couples the equation of variable `i` at the origin with the
/// unknown of variable `r` at lattice index `(kk, ll)`. Edge unknowns are indexed by
/// their start vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiStencil {
    pub m: usize,
    pub kinds: Vec<Location>,
    pub entries: BTreeMap<EntryKey, f64>,
    pub h: f64,
}

impl MultiStencil {
    pub fn new(kinds: Vec<Location>, h: f64) -> Self {
        Self {
            m: kinds.len(),
            kinds,
            entries: BTreeMap::new(),
            h,
        }
    }

    pub fn get(&self, i: usize, r: usize, kk: i32, ll: i32) -> f64 {
        self.entries.get(&(i, r, kk, ll)).copied().unwrap_or(0.0)
    }

    pub fn add(&mut self, i: usize, r: usize, kk: i32, ll: i32, value: f64) {
        *self.entries.entry((i, r, kk, ll)).or_insert(0.0) += value;
    }

    /// Entries of equation `i` as `(r, kk, ll, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, i32, i32, f64)> + '_ {
        self.entries
            .range((i, 0, i32::MIN, i32::MIN)..=(i, usize::MAX, i32::MAX, i32::MAX))
            .map(|(&(_, r, kk, ll), &v)| (r, kk, ll, v))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Removes entries whose magnitude is below `tol * max_abs`.
    pub fn pruned(mut self, tol: f64) -> Self {
        let cut = tol * self.max_abs();
        self.entries.retain(|_, v| v.abs() > cut);
        self
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v *= factor;
        }
        out
    }

    /// `self + factor * other`; both stencils must share variable layout.
    pub fn axpy(&self, factor: f64, other: &MultiStencil) -> Self {
        let mut out = self.clone();
        for (&(i, r, kk, ll), &v) in &other.entries {
            out.add(i, r, kk, ll, factor * v);
        }
        out
    }

    /// Largest `|s(i,r,kk,ll) - s(r,i,-kk,-ll)|`.
    pub fn adjoint_defect(&self) -> f64 {
        let keys: BTreeSet<EntryKey> = self
            .entries
            .keys()
            .flat_map(|&(i, r, kk, ll)| [(i, r, kk, ll), (r, i, -kk, -ll)])
            .collect();
        keys.iter()
            .map(|&(i, r, kk, ll)| (self.get(i, r, kk, ll) - self.get(r, i, -kk, -ll)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise difference relative to the larger of the two max norms.
    pub fn relative_difference(&self, other: &MultiStencil) -> f64 {
        let keys: BTreeSet<EntryKey> = self
            .entries
            .keys()
            .chain(other.entries.keys())
            .copied()
            .collect();
        let scale = self.max_abs().max(other.max_abs()).max(f64::MIN_POSITIVE);
        keys.iter()
            .map(|&(i, r, kk, ll)| (self.get(i, r, kk, ll) - other.get(i, r, kk, ll)).abs())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn support_radius(&self) -> i32 {
        self.entries
            .keys()
            .map(|&(_, _, kk, ll)| kk.abs().max(ll.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// Stencil data stored at `h = 1`, `beta = 1` together with how each block scales.
///
/// Block `(i, r)` is multiplied by `h^hpow(i, r)`, and additionally by `beta` when
/// listed in `beta_blocks`.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenStencil {
    pub name: String,
    pub base: MultiStencil,
    pub hpow: BTreeMap<(usize, usize), i32>,
    pub beta_blocks: BTreeSet<(usize, usize)>,
}

fn location_name(loc: Location) -> &'static str {
    match loc {
        Location::Node => "node",
        Location::Edge(SubgridId::First) => "edge1",
        Location::Edge(SubgridId::Second) => "edge2",
        Location::Edge(SubgridId::Third) => "edge3",
    }
}

fn parse_location(s: &str) -> Option<Location> {
    match s {
        "node" => Some(Location::Node),
        "edge1" => Some(Location::Edge(SubgridId::First)),
        "edge2" => Some(Location::Edge(SubgridId::Second)),
        "edge3" => Some(Location::Edge(SubgridId::Third)),
        _ => None,
    }
}

impl GoldenStencil {
    pub fn instantiate(&self, h: f64, beta: f64) -> MultiStencil {
        let mut st = MultiStencil::new(self.base.kinds.clone(), h);
        for (&(i, r, kk, ll), &v) in &self.base.entries {
            let p = self.hpow.get(&(i, r)).copied().unwrap_or(0);
            let mut s = v * h.powi(p);
            if self.beta_blocks.contains(&(i, r)) {
                s *= beta;
            }
            st.add(i, r, kk, ll, s);
        }
        st
    }

    /// Renders the text format:
    ///
    /// ```text
    /// # name <name>
    /// # kinds <loc> <loc> ...
    /// # hpow <i> <r> <p>
    /// # beta <i> <r>
    /// <i> <r> <kk> <ll> <coefficient>
    /// ```
    ///
    /// Coefficients are written with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# name {}", self.name).unwrap();
        let kinds: Vec<&str> = self.base.kinds.iter().map(|&k| location_name(k)).collect();
        writeln!(out, "# kinds {}", kinds.join(" ")).unwrap();
        for (&(i, r), &p) in &self.hpow {
            writeln!(out, "# hpow {i} {r} {p}").unwrap();
        }
        for &(i, r) in &self.beta_blocks {
            writeln!(out, "# beta {i} {r}").unwrap();
        }
        for (&(i, r, kk, ll), &v) in &self.base.entries {
            writeln!(out, "{i} {r} {kk} {ll} {v:.16e}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::StencilParse {
            line,
            msg: msg.to_string(),
        };
        let mut name = String::new();
        let mut kinds: Option<Vec<Location>> = None;
        let mut hpow = BTreeMap::new();
        let mut beta_blocks = BTreeSet::new();
        let mut rows: Vec<(usize, EntryKey, f64)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                match it.next() {
                    Some("name") => name = it.collect::<Vec<_>>().join(" "),
                    Some("kinds") => {
                        let ks: Option<Vec<Location>> = it.map(parse_location).collect();
                        kinds = Some(ks.ok_or_else(|| err(line_no, "unknown location kind"))?);
                    }
                    Some("hpow") => {
                        let v: Vec<i32> = it
                            .map(|t| t.parse::<i32>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| err(line_no, "bad hpow"))?;
                        if v.len() != 3 || v[0] < 0 || v[1] < 0 {
                            return Err(err(line_no, "hpow needs: i r p"));
                        }
                        hpow.insert((v[0] as usize, v[1] as usize), v[2]);
                    }
                    Some("beta") => {
                        let v: Vec<usize> = it
                            .map(|t| t.parse::<usize>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| err(line_no, "bad beta"))?;
                        if v.len() != 2 {
                            return Err(err(line_no, "beta needs: i r"));
                        }
                        beta_blocks.insert((v[0], v[1]));
                    }
                    _ => {}
                }
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 5 {
                return Err(err(line_no, "expected 5 fields: i r kk ll coefficient"));
            }
            let i = tok[0].parse().map_err(|_| err(line_no, "bad i"))?;
            let r = tok[1].parse().map_err(|_| err(line_no, "bad r"))?;
            let kk = tok[2].parse().map_err(|_| err(line_no, "bad kk"))?;
            let ll = tok[3].parse().map_err(|_| err(line_no, "bad ll"))?;
            let v: f64 = tok[4].parse().map_err(|_| err(line_no, "bad coefficient"))?;
            if !v.is_finite() {
                return Err(err(line_no, "non-finite coefficient"));
            }
            rows.push((line_no, (i, r, kk, ll), v));
        }

        let kinds = kinds.ok_or_else(|| err(0, "missing '# kinds' header"))?;
        let mut base = MultiStencil::new(kinds, 1.0);
        for (line_no, (i, r, kk, ll), v) in rows {
            if i >= base.m || r >= base.m {
                return Err(err(line_no, "variable index out of range"));
            }
            if base.entries.contains_key(&(i, r, kk, ll)) {
                return Err(err(line_no, "duplicate entry"));
            }
            base.add(i, r, kk, ll, v);
        }
        Ok(Self {
            name,
            base,
            hpow,
            beta_blocks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GoldenStencil {
        let mut base = MultiStencil::new(vec![Location::Node, Location::Node], 1.0);
        base.add(0, 0, 0, 0, 2.0);
        base.add(0, 1, 1, 0, 0.1);
        base.add(1, 0, -1, 0, 0.1);
        base.add(1, 1, 0, 0, -1.0 / 3.0);
        GoldenStencil {
            name: "sample".into(),
            base,
            hpow: [((0, 1), 1), ((1, 0), 1), ((1, 1), 2)].into_iter().collect(),
            beta_blocks: [(1, 1)].into_iter().collect(),
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let g = sample();
        let back = GoldenStencil::parse(&g.to_text()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_text(), g.to_text());
    }

    #[test]
    fn instantiate_scales_blocks() {
        let st = sample().instantiate(0.5, 0.25);
        assert_eq!(st.get(0, 0, 0, 0), 2.0);
        assert_eq!(st.get(0, 1, 1, 0), 0.05);
        assert!((st.get(1, 1, 0, 0) + 0.25 * 0.25 / 3.0).abs() < 1e-17);
        assert_eq!(st.adjoint_defect(), 0.0);
    }

    #[test]
    fn malformed_lines_are_reported() {
        let bad = "# kinds node\n0 0 0 0 1.0\n0 0 1\n";
        match GoldenStencil::parse(bad) {
            Err(Error::StencilParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(GoldenStencil::parse("0 0 0 0 1.0\n").is_err());
        assert!(GoldenStencil::parse("# kinds node\n0 1 0 0 1.0\n").is_err());
    }
}
