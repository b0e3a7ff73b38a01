//! Truncated simplicial sets, simplicial abelian groups given by matrices
//! over `Z/m`, twisting functions, principal bundles and simplicial
//! distributions on them.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::category::FiniteCategory;
use crate::distribution::{convex_combine, Distribution};
use crate::error::{Error, Result};
use crate::lp::FeasibilityProblem;
use crate::semiring::{q, qi, Rational};
use crate::tensor::{product, tuple_name};

/// A simplicial set truncated at dimension `N`: simplices of each level
/// with face and degeneracy tables indexing into neighbouring levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSimplicialSet {
    levels: Vec<Vec<String>>,
    index: Vec<BTreeMap<String, usize>>,
    /// `faces[n][i][x]` for `1 ≤ n ≤ N`; `faces[0]` is empty.
    faces: Vec<Vec<Vec<usize>>>,
    /// `degeneracies[n][i][x]` for `0 ≤ n < N`.
    degeneracies: Vec<Vec<Vec<usize>>>,
}

#[derive(Serialize, Deserialize)]
struct SimplicialJson {
    #[serde(rename = "N")]
    n: usize,
    levels: Vec<Vec<String>>,
    faces: BTreeMap<String, Vec<Vec<String>>>,
    degeneracies: BTreeMap<String, Vec<Vec<String>>>,
}

impl TruncatedSimplicialSet {
    /// Builds and checks all simplicial identities exhaustively.
    pub fn new(
        levels: Vec<Vec<String>>,
        faces: Vec<Vec<Vec<usize>>>,
        degeneracies: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let bad = |msg: String| Error::InvalidSimplicial(msg);
        if levels.is_empty() {
            return Err(bad("no levels".into()));
        }
        let top = levels.len() - 1;
        let mut index = Vec::with_capacity(levels.len());
        for (n, level) in levels.iter().enumerate() {
            let map: BTreeMap<String, usize> = level.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
            if map.len() != level.len() {
                return Err(bad(format!("duplicate simplex at level {n}")));
            }
            index.push(map);
        }
        if faces.len() != levels.len() || degeneracies.len() != top {
            return Err(bad("face or degeneracy tables have the wrong number of levels".into()));
        }
        for n in 0..=top {
            let expected = if n == 0 { 0 } else { n + 1 };
            if faces[n].len() != expected {
                return Err(bad(format!("level {n} needs {expected} face maps")));
            }
            for d in &faces[n] {
                if d.len() != levels[n].len() || d.iter().any(|&y| y >= levels[n - 1].len()) {
                    return Err(bad(format!("a face map at level {n} is not a function")));
                }
            }
        }
        for n in 0..top {
            if degeneracies[n].len() != n + 1 {
                return Err(bad(format!("level {n} needs {} degeneracies", n + 1)));
            }
            for s in &degeneracies[n] {
                if s.len() != levels[n].len() || s.iter().any(|&y| y >= levels[n + 1].len()) {
                    return Err(bad(format!("a degeneracy at level {n} is not a function")));
                }
            }
        }
        let set = TruncatedSimplicialSet { levels, index, faces, degeneracies };
        let violations = set.identity_violations();
        if let Some(v) = violations.first() {
            return Err(bad(format!("{} identity failures, first: {v}", violations.len())));
        }
        Ok(set)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SimplicialJson = serde_json::from_str(text)?;
        if raw.levels.len() != raw.n + 1 {
            return Err(Error::InvalidSimplicial(format!("N = {} but {} levels given", raw.n, raw.levels.len())));
        }
        let lookup = |n: usize, name: &str| {
            raw.levels[n]
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::InvalidSimplicial(format!("unknown simplex {name} at level {n}")))
        };
        let table = |tables: &BTreeMap<String, Vec<Vec<String>>>, n: usize, into: usize| -> Result<Vec<Vec<usize>>> {
            tables
                .get(&n.to_string())
                .map(|maps| maps.iter().map(|m| m.iter().map(|s| lookup(into, s)).collect()).collect())
                .unwrap_or_else(|| Ok(Vec::new()))
        };
        let faces = (0..=raw.n).map(|n| if n == 0 { Ok(Vec::new()) } else { table(&raw.faces, n, n - 1) }).collect::<Result<_>>()?;
        let degeneracies = (0..raw.n).map(|n| table(&raw.degeneracies, n, n + 1)).collect::<Result<_>>()?;
        Self::new(raw.levels.clone(), faces, degeneracies)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let names = |n: usize, map: &[usize]| map.iter().map(|&y| self.levels[n][y].clone()).collect::<Vec<_>>();
        let raw = SimplicialJson {
            n: self.dim(),
            levels: self.levels.clone(),
            faces: (1..=self.dim())
                .map(|n| (n.to_string(), self.faces[n].iter().map(|d| names(n - 1, d)).collect()))
                .collect(),
            degeneracies: (0..self.dim())
                .map(|n| (n.to_string(), self.degeneracies[n].iter().map(|s| names(n + 1, s)).collect()))
                .collect(),
        };
        serde_json::to_value(raw).expect("simplicial set serializes")
    }

    /// The truncation dimension `N`.
    pub fn dim(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &[String] {
        &self.levels[n]
    }

    pub fn size(&self, n: usize) -> usize {
        self.levels[n].len()
    }

    pub fn name(&self, n: usize, x: usize) -> &str {
        &self.levels[n][x]
    }

    pub fn index_of(&self, n: usize, name: &str) -> Option<usize> {
        self.index.get(n)?.get(name).copied()
    }

    pub fn face(&self, n: usize, i: usize, x: usize) -> usize {
        self.faces[n][i][x]
    }

    pub fn degeneracy(&self, n: usize, i: usize, x: usize) -> usize {
        self.degeneracies[n][i][x]
    }

    /// Every failing instance of the simplicial identities, as text.
    pub fn identity_violations(&self) -> Vec<String> {
        let top = self.dim();
        let mut out = Vec::new();
        let d = |n: usize, i: usize, x: usize| self.faces[n][i][x];
        let s = |n: usize, i: usize, x: usize| self.degeneracies[n][i][x];
        for n in 2..=top {
            for x in 0..self.size(n) {
                for j in 0..=n {
                    for i in 0..j {
                        if d(n - 1, i, d(n, j, x)) != d(n - 1, j - 1, d(n, i, x)) {
                            out.push(format!("d{i} d{j} != d{} d{i} at {}", j - 1, self.levels[n][x]));
                        }
                    }
                }
            }
        }
        for n in 0..top {
            for x in 0..self.size(n) {
                for j in 0..=n {
                    let sx = s(n, j, x);
                    for i in 0..=n + 1 {
                        let lhs = d(n + 1, i, sx);
                        let rhs = if i == j || i == j + 1 {
                            x
                        } else if i < j {
                            s(n - 1, j - 1, d(n, i, x))
                        } else {
                            s(n - 1, j, d(n, i - 1, x))
                        };
                        if lhs != rhs {
                            out.push(format!("d{i} s{j} fails at {}", self.levels[n][x]));
                        }
                    }
                }
            }
        }
        for n in 0..top.saturating_sub(1) {
            for x in 0..self.size(n) {
                for j in 0..=n {
                    for i in 0..=j {
                        if s(n + 1, i, s(n, j, x)) != s(n + 1, j + 1, s(n, i, x)) {
                            out.push(format!("s{i} s{j} != s{} s{i} at {}", j + 1, self.levels[n][x]));
                        }
                    }
                }
            }
        }
        out
    }

    /// The nerve of a finite category truncated at `top`: `n`-simplices
    /// are composable strings `c_0 → … → c_n`, named by their morphisms.
    pub fn nerve(cat: &FiniteCategory, top: usize) -> Result<Self> {
        let mut strings: Vec<Vec<Vec<String>>> = vec![Vec::new(); top + 1];
        for n in 1..=top {
            if n == 1 {
                strings[1] = cat.morphisms().map(|m| vec![m.id.clone()]).collect();
            } else {
                let prev = strings[n - 1].clone();
                for s in &prev {
                    let end = &cat.morphism(s.last().expect("nonempty")).expect("known").tgt;
                    for m in cat.morphisms().filter(|m| &m.src == end) {
                        let mut t = s.clone();
                        t.push(m.id.clone());
                        strings[n].push(t);
                    }
                }
            }
        }
        let name = |n: usize, s: &[String]| if n == 0 { s[0].clone() } else { tuple_name(s) };
        let mut levels: Vec<Vec<String>> = vec![cat.objects().to_vec()];
        levels.extend((1..=top).map(|n| strings[n].iter().map(|s| name(n, s)).collect()));
        let index: Vec<BTreeMap<String, usize>> =
            levels.iter().map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()).collect();
        let src = |f: &String| cat.morphism(f).expect("known").src.clone();
        let tgt = |f: &String| cat.morphism(f).expect("known").tgt.clone();
        let mut faces = vec![Vec::new()];
        for n in 1..=top {
            let mut level_faces = Vec::new();
            for i in 0..=n {
                let map = strings[n]
                    .iter()
                    .map(|s| {
                        let face: Vec<String> = if n == 1 {
                            vec![if i == 0 { tgt(&s[0]) } else { src(&s[0]) }]
                        } else if i == 0 {
                            s[1..].to_vec()
                        } else if i == n {
                            s[..n - 1].to_vec()
                        } else {
                            let mut t = s[..i - 1].to_vec();
                            t.push(cat.compose(&s[i], &s[i - 1]).expect("composable").to_string());
                            t.extend(s[i + 1..].iter().cloned());
                            t
                        };
                        index[n - 1][&name(n - 1, &face)]
                    })
                    .collect();
                level_faces.push(map);
            }
            faces.push(level_faces);
        }
        let mut degeneracies = Vec::new();
        for n in 0..top {
            let mut level_degs = Vec::new();
            for i in 0..=n {
                let map = (0..levels[n].len())
                    .map(|x| {
                        let t: Vec<String> = if n == 0 {
                            vec![cat.identity(&levels[0][x]).to_string()]
                        } else {
                            let s = &strings[n][x];
                            let vertex = if i == 0 { src(&s[0]) } else { tgt(&s[i - 1]) };
                            let mut t = s[..i].to_vec();
                            t.push(cat.identity(&vertex).to_string());
                            t.extend(s[i..].iter().cloned());
                            t
                        };
                        index[n + 1][&name(n + 1, &t)]
                    })
                    .collect();
                level_degs.push(map);
            }
            degeneracies.push(level_degs);
        }
        Self::new(levels, faces, degeneracies)
    }

    /// The standard `k`-simplex truncated at `top`.
    pub fn standard_simplex(k: usize, top: usize) -> Result<Self> {
        let rel = (0..=k).flat_map(|i| (i..=k).map(move |j| (i, j))).collect();
        Self::nerve(&FiniteCategory::preorder(k + 1, &rel)?, top)
    }

    /// The nerve of the cyclic group of order `m`, `BZ/m`.
    pub fn classifying(m: usize, top: usize) -> Result<Self> {
        Self::nerve(&FiniteCategory::cyclic_monoid(0, m)?, top)
    }
}

/// A simplicial abelian group with `K_n = (Z/m)^{dims[n]}` and linear
/// structure maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialAbelianGroup {
    modulus: u64,
    elements: Vec<Vec<Vec<u64>>>,
    index: Vec<BTreeMap<Vec<u64>, usize>>,
    set: TruncatedSimplicialSet,
}

type LinearMap = Vec<Vec<u64>>;

fn apply_linear(m: &LinearMap, v: &[u64], modulus: u64) -> Vec<u64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum::<u64>() % modulus).collect()
}

impl SimplicialAbelianGroup {
    /// `faces[n][i]` is a `dims[n-1] × dims[n]` matrix, `degeneracies[n][i]`
    /// a `dims[n+1] × dims[n]` matrix.
    pub fn new(modulus: u64, dims: &[usize], faces: &[Vec<LinearMap>], degeneracies: &[Vec<LinearMap>]) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidSimplicial("modulus must be at least 2".into()));
        }
        let elements: Vec<Vec<Vec<u64>>> =
            dims.iter().map(|&d| product(&vec![(0..modulus).collect::<Vec<_>>(); d])).collect();
        let index: Vec<BTreeMap<Vec<u64>, usize>> =
            elements.iter().map(|l| l.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect()).collect();
        let levels = elements.iter().map(|l| l.iter().map(|v| Self::label(v)).collect()).collect();
        let table = |maps: &[LinearMap], from: usize, to: usize| -> Vec<Vec<usize>> {
            maps.iter()
                .map(|m| elements[from].iter().map(|v| index[to][&apply_linear(m, v, modulus)]).collect())
                .collect()
        };
        let top = dims.len() - 1;
        if faces.len() != dims.len() || degeneracies.len() != top {
            return Err(Error::InvalidSimplicial("structure maps for the wrong number of levels".into()));
        }
        for n in 0..=top {
            let shapes_ok = faces[n].iter().all(|m| m.len() == if n == 0 { 0 } else { dims[n - 1] } && m.iter().all(|r| r.len() == dims[n]))
                && (n == top
                    || degeneracies[n].iter().all(|m| m.len() == dims[n + 1] && m.iter().all(|r| r.len() == dims[n])));
            if !shapes_ok {
                return Err(Error::InvalidSimplicial(format!("structure matrix with the wrong shape at level {n}")));
            }
        }
        let face_tables = (0..=top).map(|n| if n == 0 { Vec::new() } else { table(&faces[n], n, n - 1) }).collect();
        let deg_tables = (0..top).map(|n| table(&degeneracies[n], n, n + 1)).collect();
        let set = TruncatedSimplicialSet::new(levels, face_tables, deg_tables)?;
        Ok(SimplicialAbelianGroup { modulus, elements, index, set })
    }

    fn label(v: &[u64]) -> String {
        tuple_name(&v.iter().map(u64::to_string).collect::<Vec<_>>())
    }

    /// The constant group `Z/m`.
    pub fn constant(modulus: u64, top: usize) -> Result<Self> {
        let id = vec![vec![1]];
        let faces: Vec<Vec<LinearMap>> = (0..=top).map(|n| if n == 0 { Vec::new() } else { vec![id.clone(); n + 1] }).collect();
        let degs: Vec<Vec<LinearMap>> = (0..top).map(|n| vec![id.clone(); n + 1]).collect();
        Self::new(modulus, &vec![1; top + 1], &faces, &degs)
    }

    /// The nerve of `Z/m` as a simplicial group: `K_n = (Z/m)^n`, outer
    /// faces drop a coordinate, inner faces add neighbours, degeneracies
    /// insert a zero.
    pub fn nerve_of_cyclic(modulus: u64, top: usize) -> Result<Self> {
        let dims: Vec<usize> = (0..=top).collect();
        let mut faces = vec![Vec::new()];
        for n in 1..=top {
            let mut maps = Vec::new();
            for i in 0..=n {
                let mut m = vec![vec![0; n]; n - 1];
                for (r, row) in m.iter_mut().enumerate() {
                    if i == 0 {
                        row[r + 1] = 1;
                    } else if i == n {
                        row[r] = 1;
                    } else if r + 1 < i {
                        row[r] = 1;
                    } else if r + 1 == i {
                        row[r] = 1;
                        row[r + 1] = 1;
                    } else {
                        row[r + 1] = 1;
                    }
                }
                maps.push(m);
            }
            faces.push(maps);
        }
        let mut degs = Vec::new();
        for n in 0..top {
            let mut maps = Vec::new();
            for i in 0..=n {
                let mut m = vec![vec![0; n]; n + 1];
                for (r, row) in m.iter_mut().enumerate() {
                    if r < i {
                        row[r] = 1;
                    } else if r > i {
                        row[r - 1] = 1;
                    }
                }
                maps.push(m);
            }
            degs.push(maps);
        }
        Self::new(modulus, &dims, &faces, &degs)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn set(&self) -> &TruncatedSimplicialSet {
        &self.set
    }

    pub fn order(&self, n: usize) -> usize {
        self.elements[n].len()
    }

    pub fn zero(&self, n: usize) -> usize {
        self.index[n][&vec![0; self.elements[n][0].len()]]
    }

    pub fn add(&self, n: usize, a: usize, b: usize) -> usize {
        let v: Vec<u64> = self.elements[n][a].iter().zip(&self.elements[n][b]).map(|(x, y)| (x + y) % self.modulus).collect();
        self.index[n][&v]
    }

    pub fn neg(&self, n: usize, a: usize) -> usize {
        let v: Vec<u64> = self.elements[n][a].iter().map(|x| (self.modulus - x) % self.modulus).collect();
        self.index[n][&v]
    }
}

/// `η_n: X_n → K_{n-1}` for `1 ≤ n ≤ N`, as element indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TwistingFunction {
    values: Vec<Vec<usize>>,
}

impl TwistingFunction {
    pub fn values(&self) -> &[Vec<usize>] {
        &self.values
    }

    pub fn at(&self, n: usize, x: usize) -> usize {
        self.values[n][x]
    }

    pub fn zero(k: &SimplicialAbelianGroup, x: &TruncatedSimplicialSet) -> Self {
        let values = (0..=x.dim()).map(|n| if n == 0 { Vec::new() } else { vec![k.zero(n - 1); x.size(n)] }).collect();
        TwistingFunction { values }
    }

    pub fn add(&self, other: &TwistingFunction, k: &SimplicialAbelianGroup) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(n, (a, b))| a.iter().zip(b).map(|(&u, &v)| k.add(n - 1, u, v)).collect())
            .collect();
        TwistingFunction { values }
    }

    /// Builds and checks a twisting function.
    pub fn new(values: Vec<Vec<usize>>, k: &SimplicialAbelianGroup, x: &TruncatedSimplicialSet) -> Result<Self> {
        let eta = TwistingFunction { values };
        let v = twist_violations(&eta, k, x);
        if let Some(first) = v.first() {
            return Err(Error::InvalidTwist(format!("{} violations, first: {first}", v.len())));
        }
        Ok(eta)
    }

    /// `{"values": {"1": [element labels aligned with X_1], ...}}`
    pub fn from_json(text: &str, k: &SimplicialAbelianGroup, x: &TruncatedSimplicialSet) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            values: BTreeMap<String, Vec<String>>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        let mut values = vec![Vec::new()];
        for n in 1..=x.dim() {
            let labels = raw.values.get(&n.to_string()).ok_or_else(|| Error::InvalidTwist(format!("no values at level {n}")))?;
            if labels.len() != x.size(n) {
                return Err(Error::InvalidTwist(format!("level {n} needs {} values", x.size(n))));
            }
            values.push(
                labels
                    .iter()
                    .map(|l| k.set.index_of(n - 1, l).ok_or_else(|| Error::InvalidTwist(format!("unknown group element {l}"))))
                    .collect::<Result<_>>()?,
            );
        }
        Self::new(values, k, x)
    }

    pub fn to_json(&self, k: &SimplicialAbelianGroup) -> serde_json::Value {
        let values: BTreeMap<String, Vec<String>> = (1..self.values.len())
            .map(|n| (n.to_string(), self.values[n].iter().map(|&g| k.set.name(n - 1, g).to_string()).collect()))
            .collect();
        serde_json::json!({ "values": values })
    }
}

/// Failures of the twisting identities, in additive notation:
/// (T1) `d_0 η(x) = η(d_1 x) − η(d_0 x)`, (T2) `d_i η(x) = η(d_{i+1} x)`
/// for `i ≥ 1`, (T3) `s_i η(x) = η(s_{i+1} x)`, (T4) `η(s_0 x) = 0`.
pub fn twist_violations(eta: &TwistingFunction, k: &SimplicialAbelianGroup, x: &TruncatedSimplicialSet) -> Vec<String> {
    let mut out = Vec::new();
    let top = x.dim();
    if k.set.dim() + 1 < top || eta.values.len() != top + 1 {
        out.push("group or twisting function truncated below the base".into());
        return out;
    }
    for n in 1..=top {
        if eta.values[n].len() != x.size(n) || eta.values[n].iter().any(|&g| g >= k.order(n - 1)) {
            out.push(format!("level {n} values do not match the base"));
            return out;
        }
    }
    let ks = &k.set;
    for n in 2..=top {
        for s in 0..x.size(n) {
            let e = eta.at(n, s);
            let rhs = k.add(n - 2, eta.at(n - 1, x.face(n, 1, s)), k.neg(n - 2, eta.at(n - 1, x.face(n, 0, s))));
            if ks.face(n - 1, 0, e) != rhs {
                out.push(format!("T1 at {}", x.name(n, s)));
            }
            for i in 1..n {
                if ks.face(n - 1, i, e) != eta.at(n - 1, x.face(n, i + 1, s)) {
                    out.push(format!("T2 (i = {i}) at {}", x.name(n, s)));
                }
            }
        }
    }
    for n in 1..top {
        for s in 0..x.size(n) {
            for i in 0..n {
                if ks.degeneracy(n - 1, i, eta.at(n, s)) != eta.at(n + 1, x.degeneracy(n, i + 1, s)) {
                    out.push(format!("T3 (i = {i}) at {}", x.name(n, s)));
                }
            }
        }
    }
    for n in 0..top {
        for s in 0..x.size(n) {
            if eta.at(n + 1, x.degeneracy(n, 0, s)) != k.zero(n) {
                out.push(format!("T4 at {}", x.name(n, s)));
            }
        }
    }
    out
}

/// Twisting functions found by depth-first search over level values, in
/// random order when `rng` is given, at most `limit` of them.
pub fn search_twisting_functions<R: Rng>(
    k: &SimplicialAbelianGroup,
    x: &TruncatedSimplicialSet,
    mut rng: Option<&mut R>,
    limit: usize,
) -> Vec<TwistingFunction> {
    let slots: Vec<(usize, usize)> = (1..=x.dim()).flat_map(|n| (0..x.size(n)).map(move |s| (n, s))).collect();
    let mut values: Vec<Vec<Option<usize>>> =
        (0..=x.dim()).map(|n| if n == 0 { Vec::new() } else { vec![None; x.size(n)] }).collect();
    let mut out = Vec::new();
    fn consistent(values: &[Vec<Option<usize>>], k: &SimplicialAbelianGroup, x: &TruncatedSimplicialSet) -> bool {
        let get = |n: usize, s: usize| values.get(n).and_then(|l| l.get(s)).copied().flatten();
        let ks = &k.set;
        for n in 2..values.len() {
            for s in 0..values[n].len() {
                let Some(e) = get(n, s) else { continue };
                if let (Some(a), Some(b)) = (get(n - 1, x.face(n, 1, s)), get(n - 1, x.face(n, 0, s))) {
                    if ks.face(n - 1, 0, e) != k.add(n - 2, a, k.neg(n - 2, b)) {
                        return false;
                    }
                }
                for i in 1..n {
                    if let Some(v) = get(n - 1, x.face(n, i + 1, s)) {
                        if ks.face(n - 1, i, e) != v {
                            return false;
                        }
                    }
                }
            }
        }
        for n in 0..values.len() - 1 {
            for s in 0..x.size(n) {
                if let Some(v) = get(n + 1, x.degeneracy(n, 0, s)) {
                    if v != k.zero(n) {
                        return false;
                    }
                }
                if n >= 1 {
                    for i in 0..n {
                        if let (Some(e), Some(v)) = (get(n, s), get(n + 1, x.degeneracy(n, i + 1, s))) {
                            if ks.degeneracy(n - 1, i, e) != v {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }
    #[allow(clippy::too_many_arguments)]
    fn go<R: Rng>(
        pos: usize,
        slots: &[(usize, usize)],
        values: &mut Vec<Vec<Option<usize>>>,
        k: &SimplicialAbelianGroup,
        x: &TruncatedSimplicialSet,
        rng: &mut Option<&mut R>,
        limit: usize,
        out: &mut Vec<TwistingFunction>,
    ) {
        if out.len() >= limit {
            return;
        }
        if pos == slots.len() {
            let vals = values.iter().map(|l| l.iter().map(|v| v.expect("assigned")).collect()).collect();
            out.push(TwistingFunction { values: vals });
            return;
        }
        let (n, s) = slots[pos];
        let mut candidates: Vec<usize> = (0..k.order(n - 1)).collect();
        if let Some(r) = rng.as_deref_mut() {
            candidates.shuffle(r);
        }
        for c in candidates {
            values[n][s] = Some(c);
            if consistent(values, k, x) {
                go(pos + 1, slots, values, k, x, rng, limit, out);
            }
            values[n][s] = None;
        }
    }
    go(0, &slots, &mut values, k, x, &mut rng, limit, &mut out);
    out
}

/// How a bundle was built, kept so that canonical maps can be written down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    /// `E_n = K_n × X_n` with element index `k · |X_n| + x`.
    Twisted(TwistingFunction),
    /// Orbits of pairs; `orbit_of[n]` sends a pair of element indices to its orbit.
    Tensor {
        left: Arc<Bundle>,
        right: Arc<Bundle>,
        orbit_of: Vec<BTreeMap<(usize, usize), usize>>,
    },
}

/// A principal `K`-bundle `π: E → X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bundle {
    base: Arc<TruncatedSimplicialSet>,
    group: Arc<SimplicialAbelianGroup>,
    total: TruncatedSimplicialSet,
    /// `action[n][g][e]`.
    action: Vec<Vec<Vec<usize>>>,
    projection: Vec<Vec<usize>>,
    origin: Origin,
}

impl Bundle {
    pub fn base(&self) -> &Arc<TruncatedSimplicialSet> {
        &self.base
    }

    pub fn group(&self) -> &Arc<SimplicialAbelianGroup> {
        &self.group
    }

    pub fn total(&self) -> &TruncatedSimplicialSet {
        &self.total
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn project(&self, n: usize, e: usize) -> usize {
        self.projection[n][e]
    }

    pub fn act(&self, n: usize, g: usize, e: usize) -> usize {
        self.action[n][g][e]
    }

    pub fn fibre(&self, n: usize, x: usize) -> Vec<usize> {
        (0..self.total.size(n)).filter(|&e| self.projection[n][e] == x).collect()
    }

    /// Failures of: simplicial action, action laws, freeness, simplicial
    /// projection, invariance, and orbits matching base simplices.
    pub fn principal_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (e, k, x) = (&self.total, &self.group, &self.base);
        for n in 0..=e.dim() {
            for g in 0..k.order(n) {
                for s in 0..e.size(n) {
                    let ge = self.act(n, g, s);
                    if n >= 1 {
                        for i in 0..=n {
                            if e.face(n, i, ge) != self.act(n - 1, k.set.face(n, i, g), e.face(n, i, s)) {
                                out.push(format!("action does not commute with d{i} at level {n}"));
                            }
                        }
                    }
                    if n < e.dim() {
                        for i in 0..=n {
                            if e.degeneracy(n, i, ge) != self.act(n + 1, k.set.degeneracy(n, i, g), e.degeneracy(n, i, s)) {
                                out.push(format!("action does not commute with s{i} at level {n}"));
                            }
                        }
                    }
                    if ge == s && g != k.zero(n) {
                        out.push(format!("action is not free at {}", e.name(n, s)));
                    }
                    if self.projection[n][ge] != self.projection[n][s] {
                        out.push(format!("projection is not invariant at {}", e.name(n, s)));
                    }
                    for h in 0..k.order(n) {
                        if self.act(n, h, ge) != self.act(n, k.add(n, h, g), s) {
                            out.push(format!("action law fails at level {n}"));
                        }
                    }
                }
            }
            for s in 0..e.size(n) {
                if n >= 1 {
                    for i in 0..=n {
                        if x.face(n, i, self.projection[n][s]) != self.projection[n - 1][e.face(n, i, s)] {
                            out.push(format!("projection does not commute with d{i} at {}", e.name(n, s)));
                        }
                    }
                }
                if n < e.dim() {
                    for i in 0..=n {
                        if x.degeneracy(n, i, self.projection[n][s]) != self.projection[n + 1][e.degeneracy(n, i, s)] {
                            out.push(format!("projection does not commute with s{i} at {}", e.name(n, s)));
                        }
                    }
                }
            }
            for b in 0..x.size(n) {
                let fibre = self.fibre(n, b);
                let Some(&first) = fibre.first() else {
                    out.push(format!("empty fibre over {}", x.name(n, b)));
                    continue;
                };
                let mut orbit: Vec<usize> = (0..k.order(n)).map(|g| self.act(n, g, first)).collect();
                orbit.sort_unstable();
                if orbit != fibre {
                    out.push(format!("fibre over {} is not a single orbit", x.name(n, b)));
                }
            }
        }
        out
    }
}

/// `K ×_η X` with `d_0(k, x) = (η(x) + d_0 k, d_0 x)` and all other
/// structure maps componentwise.
pub fn twisted_product(
    k: &Arc<SimplicialAbelianGroup>,
    eta: &TwistingFunction,
    x: &Arc<TruncatedSimplicialSet>,
) -> Result<Bundle> {
    let v = twist_violations(eta, k, x);
    if let Some(first) = v.first() {
        return Err(Error::InvalidTwist(format!("{} violations, first: {first}", v.len())));
    }
    let top = x.dim();
    let idx = |n: usize, g: usize, s: usize| g * x.size(n) + s;
    let levels: Vec<Vec<String>> = (0..=top)
        .map(|n| {
            (0..k.order(n))
                .flat_map(|g| (0..x.size(n)).map(move |s| (g, s)))
                .map(|(g, s)| tuple_name(&[k.set.name(n, g), x.name(n, s)]))
                .collect()
        })
        .collect();
    let mut faces = vec![Vec::new()];
    for n in 1..=top {
        let mut maps = Vec::new();
        for i in 0..=n {
            let mut map = vec![0; levels[n].len()];
            for g in 0..k.order(n) {
                for s in 0..x.size(n) {
                    let dg = k.set.face(n, i, g);
                    let g2 = if i == 0 { k.add(n - 1, eta.at(n, s), dg) } else { dg };
                    map[idx(n, g, s)] = idx(n - 1, g2, x.face(n, i, s));
                }
            }
            maps.push(map);
        }
        faces.push(maps);
    }
    let degeneracies = (0..top)
        .map(|n| {
            (0..=n)
                .map(|i| {
                    let mut map = vec![0; levels[n].len()];
                    for g in 0..k.order(n) {
                        for s in 0..x.size(n) {
                            map[idx(n, g, s)] = idx(n + 1, k.set.degeneracy(n, i, g), x.degeneracy(n, i, s));
                        }
                    }
                    map
                })
                .collect()
        })
        .collect();
    let total = TruncatedSimplicialSet::new(levels, faces, degeneracies)?;
    let action = (0..=top)
        .map(|n| {
            (0..k.order(n))
                .map(|h| {
                    (0..k.order(n)).flat_map(|g| (0..x.size(n)).map(move |s| (g, s))).map(|(g, s)| idx(n, k.add(n, h, g), s)).collect()
                })
                .collect()
        })
        .collect();
    let projection = (0..=top).map(|n| (0..k.order(n) * x.size(n)).map(|e| e % x.size(n)).collect()).collect();
    Ok(Bundle { base: x.clone(), group: k.clone(), total, action, projection, origin: Origin::Twisted(eta.clone()) })
}

/// `E ⊗_K F`: pairs over the same base simplex modulo `(e, f) ~ (k e, −k f)`.
pub fn bundle_tensor(e: &Arc<Bundle>, f: &Arc<Bundle>) -> Result<Bundle> {
    if e.base != f.base || e.group != f.group {
        return Err(Error::BaseMismatch);
    }
    let (k, x) = (&e.group, &e.base);
    let top = x.dim();
    let mut reps: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut orbit_of: Vec<BTreeMap<(usize, usize), usize>> = Vec::new();
    for n in 0..=top {
        let mut level_reps = Vec::new();
        let mut lookup = BTreeMap::new();
        for a in 0..e.total.size(n) {
            for b in f.fibre(n, e.project(n, a)) {
                if lookup.contains_key(&(a, b)) {
                    continue;
                }
                let id = level_reps.len();
                level_reps.push((a, b));
                for g in 0..k.order(n) {
                    lookup.insert((e.act(n, g, a), f.act(n, k.neg(n, g), b)), id);
                }
            }
        }
        reps.push(level_reps);
        orbit_of.push(lookup);
    }
    let levels = reps
        .iter()
        .enumerate()
        .map(|(n, l)| l.iter().map(|&(a, b)| tuple_name(&[e.total.name(n, a), f.total.name(n, b)])).collect())
        .collect();
    let faces = (0..=top)
        .map(|n| {
            if n == 0 {
                return Vec::new();
            }
            (0..=n)
                .map(|i| reps[n].iter().map(|&(a, b)| orbit_of[n - 1][&(e.total.face(n, i, a), f.total.face(n, i, b))]).collect())
                .collect()
        })
        .collect();
    let degeneracies = (0..top)
        .map(|n| {
            (0..=n)
                .map(|i| {
                    reps[n].iter().map(|&(a, b)| orbit_of[n + 1][&(e.total.degeneracy(n, i, a), f.total.degeneracy(n, i, b))]).collect()
                })
                .collect()
        })
        .collect();
    let total = TruncatedSimplicialSet::new(levels, faces, degeneracies)?;
    let action = (0..=top)
        .map(|n| (0..k.order(n)).map(|g| reps[n].iter().map(|&(a, b)| orbit_of[n][&(e.act(n, g, a), b)]).collect()).collect())
        .collect();
    let projection = (0..=top).map(|n| reps[n].iter().map(|&(a, _)| e.project(n, a)).collect()).collect();
    let bundle = Bundle {
        base: x.clone(),
        group: k.clone(),
        total,
        action,
        projection,
        origin: Origin::Tensor { left: e.clone(), right: f.clone(), orbit_of },
    };
    let v = bundle.principal_violations();
    if let Some(first) = v.first() {
        return Err(Error::InvalidSimplicial(format!("tensor is not principal: {first}")));
    }
    Ok(bundle)
}

/// A levelwise map of total spaces, `maps[n][e]`.
pub type BundleMap = Vec<Vec<usize>>;

/// Checks that `map` is a bijective simplicial, equivariant map over the base.
pub fn is_bundle_isomorphism(src: &Bundle, tgt: &Bundle, map: &BundleMap) -> bool {
    if src.base != tgt.base || src.group != tgt.group || map.len() != src.total.dim() + 1 {
        return false;
    }
    let (a, b, k) = (&src.total, &tgt.total, &src.group);
    (0..=a.dim()).all(|n| {
        let m = &map[n];
        let mut seen = vec![false; b.size(n)];
        m.len() == a.size(n)
            && a.size(n) == b.size(n)
            && m.iter().all(|&y| y < b.size(n) && !std::mem::replace(&mut seen[y], true))
            && (0..a.size(n)).all(|e| {
                tgt.project(n, m[e]) == src.project(n, e)
                    && (0..k.order(n)).all(|g| m[src.act(n, g, e)] == tgt.act(n, g, m[e]))
                    && (n == 0 || (0..=n).all(|i| b.face(n, i, m[e]) == map[n - 1][a.face(n, i, e)]))
                    && (n == a.dim() || (0..=n).all(|i| b.degeneracy(n, i, m[e]) == map[n + 1][a.degeneracy(n, i, e)]))
            })
    })
}

fn twisted_coords(bundle: &Bundle, n: usize, e: usize) -> Option<(usize, usize)> {
    match bundle.origin {
        Origin::Twisted(_) => Some((e / bundle.base.size(n), e % bundle.base.size(n))),
        _ => None,
    }
}

/// `(K ×_{η₁} X) ⊗_K (K ×_{η₂} X) → K ×_{η₁+η₂} X`, `[(k₁, x), (k₂, x)] ↦ (k₁ + k₂, x)`.
pub fn twisted_sum_map(tensor: &Bundle, target: &Bundle) -> Result<BundleMap> {
    let Origin::Tensor { left, right, orbit_of } = &tensor.origin else {
        return Err(Error::InvalidInput("source is not a bundle tensor".into()));
    };
    let k = &tensor.group;
    let x = &tensor.base;
    let mut map: BundleMap = (0..=x.dim()).map(|n| vec![usize::MAX; tensor.total.size(n)]).collect();
    for (n, lookup) in orbit_of.iter().enumerate() {
        for (&(a, b), &orbit) in lookup {
            let (ka, xa) = twisted_coords(left, n, a).ok_or_else(|| Error::InvalidInput("left factor is not twisted".into()))?;
            let (kb, _) = twisted_coords(right, n, b).ok_or_else(|| Error::InvalidInput("right factor is not twisted".into()))?;
            if twisted_coords(target, n, 0).is_none() {
                return Err(Error::InvalidInput("target is not twisted".into()));
            }
            map[n][orbit] = k.add(n, ka, kb) * x.size(n) + xa;
        }
    }
    Ok(map)
}

/// `[e, f] ↦ [f, e]`.
pub fn braiding_map(ef: &Bundle, fe: &Bundle) -> Result<BundleMap> {
    let (Origin::Tensor { orbit_of: from, .. }, Origin::Tensor { orbit_of: to, .. }) = (&ef.origin, &fe.origin) else {
        return Err(Error::InvalidInput("braiding needs two bundle tensors".into()));
    };
    let mut map: BundleMap = from.iter().map(|l| vec![0; l.values().max().map_or(0, |m| m + 1)]).collect();
    for (n, lookup) in from.iter().enumerate() {
        for (&(a, b), &orbit) in lookup {
            map[n][orbit] = *to[n].get(&(b, a)).ok_or_else(|| Error::InvalidInput("tensors of different bundles".into()))?;
        }
    }
    Ok(map)
}

/// `E ⊗_K (K ×_0 X) → E`, `[e, (k, x)] ↦ k e`.
pub fn right_unit_map(tensor: &Bundle) -> Result<BundleMap> {
    let Origin::Tensor { left, right, orbit_of } = &tensor.origin else {
        return Err(Error::InvalidInput("source is not a bundle tensor".into()));
    };
    let mut map: BundleMap = (0..orbit_of.len()).map(|n| vec![0; tensor.total.size(n)]).collect();
    for (n, lookup) in orbit_of.iter().enumerate() {
        for (&(a, b), &orbit) in lookup {
            let (kb, _) = twisted_coords(right, n, b).ok_or_else(|| Error::InvalidInput("right factor is not twisted".into()))?;
            map[n][orbit] = left.act(n, kb, a);
        }
    }
    Ok(map)
}

/// `p_n(x) ∈ D(E_n)` for every simplex of the base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialDistribution {
    pub levels: Vec<Vec<Distribution<usize>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SDistReport {
    pub failures: Vec<String>,
}

impl SDistReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Naturality with respect to faces and degeneracies, and the section
/// condition `D(π) ∘ p = δ`, checked exactly.
pub fn check_simplicial_distribution(p: &SimplicialDistribution, bundle: &Bundle) -> SDistReport {
    let mut report = SDistReport::default();
    let (x, e) = (&bundle.base, &bundle.total);
    if p.levels.len() != x.dim() + 1 || (0..=x.dim()).any(|n| p.levels[n].len() != x.size(n)) {
        report.failures.push("levels do not match the base".into());
        return report;
    }
    for n in 0..=x.dim() {
        for s in 0..x.size(n) {
            let ps = &p.levels[n][s];
            if ps.support().any(|&a| a >= e.size(n)) {
                report.failures.push(format!("support outside the total space at {}", x.name(n, s)));
                continue;
            }
            if ps.map(|&a| bundle.project(n, a)) != Distribution::delta(s) {
                report.failures.push(format!("section condition fails at {}", x.name(n, s)));
            }
            if n >= 1 {
                for i in 0..=n {
                    if ps.map(|&a| e.face(n, i, a)) != p.levels[n - 1][x.face(n, i, s)] {
                        report.failures.push(format!("face d{i} fails at {}", x.name(n, s)));
                    }
                }
            }
            if n < x.dim() {
                for i in 0..=n {
                    if ps.map(|&a| e.degeneracy(n, i, a)) != p.levels[n + 1][x.degeneracy(n, i, s)] {
                        report.failures.push(format!("degeneracy s{i} fails at {}", x.name(n, s)));
                    }
                }
            }
        }
    }
    report
}

/// Simplicial sections `X → E` of the projection, at most `limit`.
pub fn sections(bundle: &Bundle, limit: usize) -> Vec<Vec<Vec<usize>>> {
    let x = &bundle.base;
    let slots: Vec<(usize, usize)> = (0..=x.dim()).flat_map(|n| (0..x.size(n)).map(move |s| (n, s))).collect();
    let mut current: Vec<Vec<Option<usize>>> = (0..=x.dim()).map(|n| vec![None; x.size(n)]).collect();
    let mut out = Vec::new();
    fn go(
        pos: usize,
        slots: &[(usize, usize)],
        bundle: &Bundle,
        current: &mut Vec<Vec<Option<usize>>>,
        limit: usize,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if out.len() >= limit {
            return;
        }
        if pos == slots.len() {
            out.push(current.iter().map(|l| l.iter().map(|v| v.expect("assigned")).collect()).collect());
            return;
        }
        let (n, s) = slots[pos];
        let (x, e) = (&bundle.base, &bundle.total);
        for cand in bundle.fibre(n, s) {
            let faces_ok = n == 0 || (0..=n).all(|i| current[n - 1][x.face(n, i, s)] == Some(e.face(n, i, cand)));
            let degs_ok = n == 0
                || (0..n).all(|i| {
                    (0..x.size(n - 1)).filter(|&y| x.degeneracy(n - 1, i, y) == s).all(|y| {
                        current[n - 1][y].map(|sy| e.degeneracy(n - 1, i, sy)) == Some(cand)
                    })
                });
            if faces_ok && degs_ok {
                current[n][s] = Some(cand);
                go(pos + 1, slots, bundle, current, limit, out);
                current[n][s] = None;
            }
        }
    }
    go(0, &slots, bundle, &mut current, limit, &mut out);
    out
}

pub fn deterministic(section: &[Vec<usize>]) -> SimplicialDistribution {
    SimplicialDistribution { levels: section.iter().map(|l| l.iter().map(|&e| Distribution::delta(e)).collect()).collect() }
}

/// A vertex of the polytope of simplicial distributions, or `None` when
/// the bundle carries none.
pub fn some_distribution(bundle: &Bundle) -> Option<SimplicialDistribution> {
    let (x, e) = (&bundle.base, &bundle.total);
    let mut vars: Vec<BTreeMap<(usize, usize), usize>> = vec![BTreeMap::new(); x.dim() + 1];
    let mut count = 0;
    for n in 0..=x.dim() {
        for a in 0..e.size(n) {
            vars[n].insert((bundle.project(n, a), a), count);
            count += 1;
        }
    }
    let mut lp = FeasibilityProblem::new(count);
    for n in 0..=x.dim() {
        for s in 0..x.size(n) {
            let fibre = bundle.fibre(n, s);
            lp.add_equality(fibre.iter().map(|&a| (vars[n][&(s, a)], qi(1))).collect(), qi(1));
            let mut push = |lower: usize, ty: usize, map: &dyn Fn(usize) -> usize, target: usize| {
                for b in bundle.fibre(lower, target) {
                    let mut row: Vec<(usize, Rational)> =
                        fibre.iter().filter(|&&a| map(a) == b).map(|&a| (vars[n][&(s, a)], qi(1))).collect();
                    row.push((vars[lower][&(target, b)], qi(-1)));
                    let _ = ty;
                    lp.add_equality(row, qi(0));
                }
            };
            if n >= 1 {
                for i in 0..=n {
                    push(n - 1, 0, &|a| e.face(n, i, a), x.face(n, i, s));
                }
            }
            if n < x.dim() {
                for i in 0..=n {
                    push(n + 1, 1, &|a| e.degeneracy(n, i, a), x.degeneracy(n, i, s));
                }
            }
        }
    }
    let sol = lp.solve()?;
    let levels = (0..=x.dim())
        .map(|n| {
            (0..x.size(n))
                .map(|s| {
                    Distribution::new(bundle.fibre(n, s).into_iter().map(|a| (a, sol[vars[n][&(s, a)]].clone())))
                        .expect("feasible point is normalized")
                })
                .collect()
        })
        .collect();
    Some(SimplicialDistribution { levels })
}

/// Levelwise convex combination.
pub fn mix_distributions(alpha: &[Rational], ps: &[SimplicialDistribution]) -> Result<SimplicialDistribution> {
    let first = ps.first().ok_or(Error::EmptyFactorList)?;
    let levels = (0..first.levels.len())
        .map(|n| {
            (0..first.levels[n].len())
                .map(|s| convex_combine(alpha, &ps.iter().map(|p| p.levels[n][s].clone()).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(SimplicialDistribution { levels })
}

/// A random point: a random rational mixture of sections and the LP
/// vertex, whichever exist.
pub fn random_distribution<R: Rng>(bundle: &Bundle, rng: &mut R) -> Option<SimplicialDistribution> {
    let mut points: Vec<SimplicialDistribution> = sections(bundle, 16).iter().map(|s| deterministic(s)).collect();
    points.extend(some_distribution(bundle));
    if points.is_empty() {
        return None;
    }
    let raw: Vec<i64> = points.iter().map(|_| rng.gen_range(0..=5)).collect();
    let total: i64 = raw.iter().sum();
    let alpha: Vec<Rational> = if total == 0 {
        let mut a = vec![qi(0); points.len()];
        a[0] = qi(1);
        a
    } else {
        raw.iter().map(|&w| q(w, total)).collect()
    };
    mix_distributions(&alpha, &points).ok()
}

/// `μ(p, q)`: the product measure `p(x)(e) q(x)(f)` pushed to orbits.
pub fn mu_product(p: &SimplicialDistribution, q: &SimplicialDistribution, tensor: &Bundle) -> Result<SimplicialDistribution> {
    let Origin::Tensor { orbit_of, .. } = &tensor.origin else {
        return Err(Error::InvalidInput("μ needs a bundle tensor".into()));
    };
    let x = &tensor.base;
    if p.levels.len() != x.dim() + 1 || q.levels.len() != x.dim() + 1 {
        return Err(Error::InvalidInput("distributions do not match the base".into()));
    }
    let levels = (0..=x.dim())
        .map(|n| {
            (0..x.size(n))
                .map(|s| {
                    let pairs = p.levels[n][s].iter().flat_map(|(&a, wa)| {
                        q.levels[n][s].iter().map(move |(&b, wb)| ((a, b), wa * wb))
                    });
                    let mut out = Vec::new();
                    for (pair, w) in pairs {
                        let orbit = orbit_of[n].get(&pair).ok_or_else(|| Error::InvalidInput("pair off the fibre product".into()))?;
                        out.push((*orbit, w));
                    }
                    Distribution::new(out)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(SimplicialDistribution { levels })
}

/// Transport along a bundle map.
pub fn push_distribution(p: &SimplicialDistribution, map: &BundleMap) -> SimplicialDistribution {
    SimplicialDistribution {
        levels: p.levels.iter().enumerate().map(|(n, l)| l.iter().map(|d| d.map(|&a| map[n][a])).collect()).collect(),
    }
}

/// An element of the graded monoid: a twisting function with a
/// distribution on its twisted product.
#[derive(Clone, Debug)]
pub struct Graded {
    pub eta: TwistingFunction,
    pub bundle: Arc<Bundle>,
    pub p: SimplicialDistribution,
}

/// The monoid `∐_η sDist(π_η)` over the twisting functions.
#[derive(Clone, Debug)]
pub struct TwistMonoid {
    group: Arc<SimplicialAbelianGroup>,
    base: Arc<TruncatedSimplicialSet>,
}

impl TwistMonoid {
    pub fn new(group: Arc<SimplicialAbelianGroup>, base: Arc<TruncatedSimplicialSet>) -> Self {
        TwistMonoid { group, base }
    }

    pub fn bundle(&self, eta: &TwistingFunction) -> Result<Arc<Bundle>> {
        Ok(Arc::new(twisted_product(&self.group, eta, &self.base)?))
    }

    /// The zero twist with the section `x ↦ (0, x)`.
    pub fn unit(&self) -> Result<Graded> {
        let eta = TwistingFunction::zero(&self.group, &self.base);
        let bundle = self.bundle(&eta)?;
        let section: Vec<Vec<usize>> =
            (0..=self.base.dim()).map(|n| (0..self.base.size(n)).map(|s| self.group.zero(n) * self.base.size(n) + s).collect()).collect();
        Ok(Graded { eta, bundle, p: deterministic(&section) })
    }

    /// `(η₁, p) · (η₂, q) = (η₁ + η₂, μ(p, q))`, transported to the twisted product.
    pub fn multiply(&self, a: &Graded, b: &Graded) -> Result<Graded> {
        let tensor = bundle_tensor(&a.bundle, &b.bundle)?;
        let eta = a.eta.add(&b.eta, &self.group);
        let bundle = self.bundle(&eta)?;
        let map = twisted_sum_map(&tensor, &bundle)?;
        let p = push_distribution(&mu_product(&a.p, &b.p, &tensor)?, &map);
        Ok(Graded { eta, bundle, p })
    }

    pub fn same(a: &Graded, b: &Graded) -> bool {
        a.eta == b.eta && a.p == b.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bz2() -> Arc<TruncatedSimplicialSet> {
        Arc::new(TruncatedSimplicialSet::classifying(2, 2).unwrap())
    }

    #[test]
    fn standard_objects_satisfy_identities() {
        for top in 1..=3 {
            assert!(TruncatedSimplicialSet::standard_simplex(2, top).is_ok());
            assert!(TruncatedSimplicialSet::classifying(3, top).is_ok());
            assert!(SimplicialAbelianGroup::constant(2, top).is_ok());
            assert!(SimplicialAbelianGroup::nerve_of_cyclic(2, top).is_ok());
        }
        let d1 = TruncatedSimplicialSet::standard_simplex(1, 2).unwrap();
        assert_eq!((d1.size(0), d1.size(1), d1.size(2)), (2, 3, 4));
    }

    #[test]
    fn broken_face_table_is_rejected() {
        let x = TruncatedSimplicialSet::standard_simplex(1, 1).unwrap();
        let mut raw = x.to_json();
        // Point d0 of the degenerate edge at vertex 0 to vertex 1.
        let degenerate = x.degeneracy(0, 0, 0);
        raw["faces"]["1"][0][degenerate] = serde_json::json!(x.name(0, 1));
        assert!(matches!(TruncatedSimplicialSet::from_json(&raw.to_string()), Err(Error::InvalidSimplicial(_))));
        assert_eq!(TruncatedSimplicialSet::from_json(&x.to_json().to_string()).unwrap(), x);
    }

    #[test]
    fn twisting_functions_on_bz2_are_homomorphisms() {
        let k = SimplicialAbelianGroup::constant(2, 2).unwrap();
        let found = search_twisting_functions::<ChaCha8Rng>(&k, &bz2(), None, 10);
        assert_eq!(found.len(), 2);
        for eta in &found {
            assert!(twist_violations(eta, &k, &bz2()).is_empty());
        }
    }

    #[test]
    fn twisted_products_are_principal() {
        let k = Arc::new(SimplicialAbelianGroup::constant(2, 2).unwrap());
        let x = bz2();
        for eta in search_twisting_functions::<ChaCha8Rng>(&k, &x, None, 10) {
            let e = twisted_product(&k, &eta, &x).unwrap();
            assert!(e.principal_violations().is_empty());
        }
    }

    #[test]
    fn nontrivial_twist_has_no_section_but_a_distribution() {
        let k = Arc::new(SimplicialAbelianGroup::constant(2, 2).unwrap());
        let x = bz2();
        let twists = search_twisting_functions::<ChaCha8Rng>(&k, &x, None, 10);
        let zero = TwistingFunction::zero(&k, &x);
        let eta = twists.iter().find(|t| **t != zero).unwrap();
        let e = twisted_product(&k, eta, &x).unwrap();
        assert!(sections(&e, 4).is_empty());
        let p = some_distribution(&e).unwrap();
        assert!(check_simplicial_distribution(&p, &e).passed());
        let trivial = twisted_product(&k, &zero, &x).unwrap();
        assert_eq!(sections(&trivial, 10).len(), 2);
    }

    #[test]
    fn naturality_failure_is_reported() {
        let k = Arc::new(SimplicialAbelianGroup::constant(2, 1).unwrap());
        let x = Arc::new(TruncatedSimplicialSet::standard_simplex(1, 1).unwrap());
        let e = twisted_product(&k, &TwistingFunction::zero(&k, &x), &x).unwrap();
        let mut p = deterministic(&sections(&e, 1)[0]);
        // Uniform on the non-degenerate edge breaks the vertex faces.
        let edge = (0..x.size(1)).find(|&s| x.face(1, 0, s) != x.face(1, 1, s)).unwrap();
        p.levels[1][edge] = Distribution::new(e.fibre(1, edge).into_iter().map(|a| (a, q(1, 2)))).unwrap();
        let report = check_simplicial_distribution(&p, &e);
        assert!(report.failures.iter().any(|f| f.starts_with("face")));
    }

    #[test]
    fn tensor_realizes_twist_addition() {
        let k = Arc::new(SimplicialAbelianGroup::constant(2, 2).unwrap());
        let x = bz2();
        let twists = search_twisting_functions::<ChaCha8Rng>(&k, &x, None, 10);
        for a in &twists {
            for b in &twists {
                let (ea, eb) = (Arc::new(twisted_product(&k, a, &x).unwrap()), Arc::new(twisted_product(&k, b, &x).unwrap()));
                let t = bundle_tensor(&ea, &eb).unwrap();
                let sum = twisted_product(&k, &a.add(b, &k), &x).unwrap();
                assert!(is_bundle_isomorphism(&t, &sum, &twisted_sum_map(&t, &sum).unwrap()));
                let swapped = bundle_tensor(&eb, &ea).unwrap();
                assert!(is_bundle_isomorphism(&t, &swapped, &braiding_map(&t, &swapped).unwrap()));
            }
        }
    }

    #[test]
    fn mu_is_biconvex_and_valid() {
        let k = Arc::new(SimplicialAbelianGroup::constant(2, 2).unwrap());
        let x = bz2();
        let e = Arc::new(twisted_product(&k, &TwistingFunction::zero(&k, &x), &x).unwrap());
        let t = bundle_tensor(&e, &e).unwrap();
        let secs: Vec<SimplicialDistribution> = sections(&e, 4).iter().map(|s| deterministic(s)).collect();
        let alpha = [q(1, 3), q(2, 3)];
        let p = mix_distributions(&alpha, &secs).unwrap();
        let out = mu_product(&p, &secs[0], &t).unwrap();
        assert!(check_simplicial_distribution(&out, &t).passed());
        let parts: Vec<SimplicialDistribution> = secs.iter().map(|s| mu_product(s, &secs[0], &t).unwrap()).collect();
        assert_eq!(out, mix_distributions(&alpha, &parts).unwrap());
    }

    #[test]
    fn twist_monoid_laws() {
        let k = Arc::new(SimplicialAbelianGroup::constant(2, 2).unwrap());
        let x = bz2();
        let m = TwistMonoid::new(k.clone(), x.clone());
        let unit = m.unit().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let twists = search_twisting_functions::<ChaCha8Rng>(&k, &x, None, 10);
        let elems: Vec<Graded> = twists
            .iter()
            .map(|eta| {
                let bundle = m.bundle(eta).unwrap();
                let p = random_distribution(&bundle, &mut rng).unwrap();
                Graded { eta: eta.clone(), bundle, p }
            })
            .collect();
        for a in &elems {
            assert!(TwistMonoid::same(&m.multiply(&unit, a).unwrap(), a));
            assert!(TwistMonoid::same(&m.multiply(a, &unit).unwrap(), a));
            for b in &elems {
                for c in &elems {
                    let left = m.multiply(&m.multiply(a, b).unwrap(), c).unwrap();
                    let right = m.multiply(a, &m.multiply(b, c).unwrap()).unwrap();
                    assert!(TwistMonoid::same(&left, &right));
                }
            }
        }
    }

    #[test]
    fn unit_bundle_is_a_unit() {
        let k = Arc::new(SimplicialAbelianGroup::nerve_of_cyclic(2, 2).unwrap());
        let x = Arc::new(TruncatedSimplicialSet::standard_simplex(1, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let twists = search_twisting_functions(&k, &x, Some(&mut rng), 3);
        assert!(!twists.is_empty());
        let e = Arc::new(twisted_product(&k, &twists[0], &x).unwrap());
        let unit = Arc::new(twisted_product(&k, &TwistingFunction::zero(&k, &x), &x).unwrap());
        let t = bundle_tensor(&e, &unit).unwrap();
        assert!(is_bundle_isomorphism(&t, &e, &right_unit_map(&t).unwrap()));
    }
}
